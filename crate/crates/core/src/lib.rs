//! Numerical and exact-arithmetic toolkit for closed characteristics on
//! compact star-shaped hypersurfaces in `R^{2n}`.
//!
//! The pipeline runs from a gauge-function description of the hypersurface,
//! through the characteristic flow and its variational equation, to
//! Maslov-type indices of the resulting symplectic paths, closed-form index
//! iteration in exact rational arithmetic, and finally the resonance
//! identities and Morse-series inequalities that tie everything together.
//!
//! Modules mirror the stages:
//! - [`surface`]: gauge functions, normals, Hessians
//! - [`flow`]: characteristic flow and monodromy integration
//! - [`path`]: sampled symplectic paths and closed-form builders
//! - [`orbits`]: closed characteristics and linear stability
//! - [`index`]: omega-index crossing engine, splitting numbers, mean-index brackets
//! - [`iteration`]: Sp(4) normal forms and exact iteration formulas
//! - [`resonance`]: identity sums, Morse series, critical type numbers
//! - [`analyze`]: batch driver behind the `maslovkit` CLI

pub mod analyze;
pub mod config;
pub mod error;
pub mod flow;
pub mod index;
pub mod iteration;
pub mod linalg;
pub mod orbits;
pub mod path;
pub mod report;
pub mod resonance;
pub mod scalar;
pub mod surface;

pub use error::{Error, Result};

/// Default scalar for the numerical pipeline.
pub type Real = f64;

/// Gauge surface over the default scalar.
pub type Surface = surface::GaugeSurface<Real>;
/// Trajectory over the default scalar.
pub type Trajectory = flow::Trajectory<Real>;
/// Symplectic path over the default scalar.
pub type SymplecticPath = path::SymplecticPath<Real>;
/// Closed characteristic over the default scalar.
pub type ClosedCharacteristic = orbits::ClosedCharacteristic<Real>;
/// Index record over the default scalar.
pub type IndexRecord = index::IndexRecord;

/// Exact rational scalar used by the iteration and resonance modules.
pub type Rational = num_rational::BigRational;
