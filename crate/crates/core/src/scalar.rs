//! Scalar abstraction for the numerical pipeline: f32 or f64.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Requirements on the floating-point scalar used by the numeric modules.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Lossy conversion from `f64`, for tolerances and literal constants.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to scalar")
    }

    /// Lossy conversion to `f64`, for reporting.
    fn to64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Numerical tolerances used across the pipeline.
///
/// Defaults follow the documented contracts of the toolkit and are tuned for
/// f64; when instantiating with f32, loosen them accordingly.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<T: Scalar> {
    /// Relative per-step error target of the adaptive integrator.
    pub ode_rel: T,
    /// Absolute per-step error floor of the adaptive integrator.
    pub ode_abs: T,
    /// Maximum permitted |j(y(t)) - 1| drift along a trajectory.
    pub surface_drift: T,
    /// Maximum permitted symplecticity defect of an emitted path.
    pub symplectic_drift: T,
    /// Singular values below this count towards an omega-kernel.
    pub kernel: T,
    /// Eigenvalues are "on the unit circle" when ||lambda|-1| is below this.
    pub on_circle: T,
    /// Eigenvalues are "equal to 1" (or -1) when the distance is below this.
    pub unit_eigen: T,
    /// Closure tolerance |y(tau) - y(0)| for orbit acceptance.
    pub closure: T,
    /// Antiperiodicity tolerance |y(t + tau/2) + y(t)| for symmetric orbits.
    pub antiperiodic: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            ode_rel: T::of(1e-12),
            ode_abs: T::of(1e-14),
            surface_drift: T::of(1e-8),
            symplectic_drift: T::of(1e-8),
            kernel: T::of(1e-6),
            on_circle: T::of(1e-7),
            unit_eigen: T::of(1e-5),
            closure: T::of(1e-7),
            antiperiodic: T::of(1e-7),
        }
    }
}
