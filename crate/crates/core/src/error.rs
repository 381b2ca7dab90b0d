//! Error taxonomy shared across the toolkit.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised along the surface -> flow -> index -> identity pipeline.
#[derive(Debug, Error)]
pub enum Error {
    // Surface evaluation.
    #[error("gauge function evaluated too close to the origin (|x| = {norm:.3e})")]
    ZeroPoint { norm: f64 },
    #[error("point is off the surface: |j(y) - 1| = {defect:.3e} exceeds {tol:.3e}")]
    OffSurface { defect: f64, tol: f64 },
    #[error("gauge gradient degenerate at the requested point (|grad| = {norm:.3e})")]
    DegenerateGradient { norm: f64 },

    // Integration.
    #[error("integration drift {drift:.3e} exceeds budget {budget:.3e}")]
    ToleranceExceeded { drift: f64, budget: f64 },
    #[error("adaptive step size collapsed below {floor:.3e} at t = {t:.6e}")]
    StepUnderflow { t: f64, floor: f64 },
    #[error("half-period path requested on a non-antiperiodic orbit (defect {defect:.3e})")]
    NotAntiperiodic { defect: f64 },

    // Orbit search.
    #[error("Newton iteration failed to converge after {steps} steps (residual {residual:.3e})")]
    NoConvergence { steps: usize, residual: f64 },
    #[error("section Jacobian rank-deficient (sigma_min = {sigma_min:.3e})")]
    SingularJacobian { sigma_min: f64 },

    // Index engine.
    #[error("matrix is not symplectic: defect {defect:.3e} exceeds {tol:.3e}")]
    NotSymplectic { defect: f64, tol: f64 },
    #[error("unresolved crossing cluster in ({lo:.9e}, {hi:.9e}); refine the path sampling")]
    UnresolvedCrossing { lo: f64, hi: f64 },
    #[error("omega-index changed from {coarse} to {fine} under grid refinement")]
    NonIntegerStability { coarse: i64, fine: i64 },
    #[error("one-sided index limits disagree between epsilon values: {first} vs {second}")]
    LimitUnstable { first: i64, second: i64 },
    #[error("mean-index bracket intersection is empty at iterate {m}")]
    EmptyIntersection { m: u32 },
    #[error("orbit is not symmetric; the symmetric index requires an antiperiodic half-path")]
    NotSymmetricOrbit,

    // Normal forms.
    #[error("no N1(1,1) unit block could be isolated (unit eigenvalue count {unit_count})")]
    NoUnitBlock { unit_count: usize },
    #[error("normal-form case ambiguous: {reason}")]
    AmbiguousCase { reason: String },

    // Resonance assembly.
    #[error("critical type numbers violate Remark-style constraints: {violations:?}")]
    InvalidTypeNumbers { violations: Vec<String> },
    #[error("mean-index bracket of orbit `{orbit}` straddles zero; identity sums need a sign")]
    SignAmbiguous { orbit: String },
    #[error("orbit `{orbit}` has zero mean index and contributes unboundedly to the window")]
    UnboundedContribution { orbit: String },
    #[error("truncation window too tight: {reason}")]
    TruncationTooTight { reason: String },
    #[error("iteration record `{orbit}` lacks a splitting number for the index-jump search")]
    MissingSplittingNumber { orbit: String },

    // Driver.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code contract of the CLI: 2 config, 3 numerical, 1 verdict failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::Json(_) => 2,
            _ => 3,
        }
    }
}
