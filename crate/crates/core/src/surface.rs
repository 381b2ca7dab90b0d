//! Star-shaped hypersurfaces described by positively homogeneous gauge
//! functions, with the gradients and Hessians the flow and the linearized
//! system consume.
//!
//! Coordinates pair as `(x_{2k-1}, x_{2k})` per radius, matching the pairwise
//! structure matrix of [`crate::linalg::structure_j`]; each pair spans an
//! invariant plane of the ellipsoid characteristic flow, so monodromy
//! matrices block-diagonalize.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

/// Analytic gauge supplied by the caller: value, gradient and Hessian of a
/// degree-1 positively homogeneous function, C^2 away from the origin.
pub trait CustomGauge<T: Scalar>: Send + Sync {
    fn id(&self) -> &str;
    fn dim_half(&self) -> usize;
    fn value(&self, x: &DVector<T>) -> T;
    fn gradient(&self, x: &DVector<T>) -> DVector<T>;
    fn hessian(&self, x: &DVector<T>) -> DMatrix<T>;
}

#[derive(Clone)]
pub enum SurfaceKind<T: Scalar> {
    /// `j(x) = sqrt(sum_k (x_{2k-1}^2 + x_{2k}^2) / r_k^2)`.
    Ellipsoid { radii: Vec<T> },
    Custom(Arc<dyn CustomGauge<T>>),
}

impl<T: Scalar> fmt::Debug for SurfaceKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceKind::Ellipsoid { radii } => f.debug_struct("Ellipsoid").field("radii", radii).finish(),
            SurfaceKind::Custom(g) => f.debug_struct("Custom").field("id", &g.id()).finish(),
        }
    }
}

/// A star-shaped hypersurface `Sigma = j^{-1}(1)` with the homogeneity degree
/// `alpha` of the index Hamiltonian `H = j^alpha` attached.
#[derive(Debug, Clone)]
pub struct GaugeSurface<T: Scalar> {
    kind: SurfaceKind<T>,
    dim_half: usize,
    alpha: T,
}

const ZERO_POINT_TOL: f64 = 1e-14;
const ON_SURFACE_TOL: f64 = 1e-8;

impl<T: Scalar> GaugeSurface<T> {
    /// Ellipsoid with the given radii; the index Hamiltonian defaults to
    /// `alpha = 1.8` (any fixed value in (1,2) yields the same indices).
    pub fn ellipsoid(radii: &[T]) -> Self {
        assert!(
            (1..=3).contains(&radii.len()),
            "supported phase spaces are R^2, R^4, R^6"
        );
        assert!(radii.iter().all(|r| *r > T::zero()), "radii must be positive");
        GaugeSurface {
            dim_half: radii.len(),
            kind: SurfaceKind::Ellipsoid { radii: radii.to_vec() },
            alpha: T::of(1.8),
        }
    }

    pub fn custom(gauge: Arc<dyn CustomGauge<T>>) -> Self {
        GaugeSurface {
            dim_half: gauge.dim_half(),
            kind: SurfaceKind::Custom(gauge),
            alpha: T::of(1.8),
        }
    }

    pub fn with_alpha(mut self, alpha: T) -> Self {
        assert!(
            alpha > T::one() && alpha < T::of(2.0),
            "homogeneity degree must lie in (1,2)"
        );
        self.alpha = alpha;
        self
    }

    pub fn kind(&self) -> &SurfaceKind<T> {
        &self.kind
    }

    /// Half-dimension n; the phase space is `R^{2n}`.
    pub fn dim_half(&self) -> usize {
        self.dim_half
    }

    pub fn dim(&self) -> usize {
        2 * self.dim_half
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn radii(&self) -> Option<&[T]> {
        match &self.kind {
            SurfaceKind::Ellipsoid { radii } => Some(radii),
            SurfaceKind::Custom(_) => None,
        }
    }

    fn check_nonzero(&self, x: &DVector<T>) -> Result<()> {
        let norm = x.norm();
        if norm < T::of(ZERO_POINT_TOL) {
            return Err(Error::ZeroPoint { norm: norm.to64() });
        }
        Ok(())
    }

    /// Gauge value `j(x) > 0`.
    pub fn gauge_eval(&self, x: &DVector<T>) -> Result<T> {
        self.check_nonzero(x)?;
        Ok(match &self.kind {
            SurfaceKind::Ellipsoid { radii } => {
                let mut q = T::zero();
                for (k, r) in radii.iter().enumerate() {
                    let a = x[2 * k];
                    let b = x[2 * k + 1];
                    q += (a * a + b * b) / (*r * *r);
                }
                q.sqrt()
            }
            SurfaceKind::Custom(g) => g.value(x),
        })
    }

    /// Gradient of the gauge.
    pub fn gauge_gradient(&self, x: &DVector<T>) -> Result<DVector<T>> {
        self.check_nonzero(x)?;
        Ok(match &self.kind {
            SurfaceKind::Ellipsoid { radii } => {
                let j = self.gauge_eval(x)?;
                let mut g = DVector::zeros(self.dim());
                for (k, r) in radii.iter().enumerate() {
                    let d = T::one() / (*r * *r * j);
                    g[2 * k] = x[2 * k] * d;
                    g[2 * k + 1] = x[2 * k + 1] * d;
                }
                g
            }
            SurfaceKind::Custom(g) => g.gradient(x),
        })
    }

    /// Hessian of the gauge itself (degree-0 homogeneous entries).
    pub fn gauge_hessian_raw(&self, x: &DVector<T>) -> Result<DMatrix<T>> {
        self.check_nonzero(x)?;
        Ok(match &self.kind {
            SurfaceKind::Ellipsoid { radii } => {
                let j = self.gauge_eval(x)?;
                let dim = self.dim();
                let mut dx = DVector::zeros(dim);
                let mut h = DMatrix::zeros(dim, dim);
                for (k, r) in radii.iter().enumerate() {
                    let d = T::one() / (*r * *r);
                    dx[2 * k] = x[2 * k] * d;
                    dx[2 * k + 1] = x[2 * k + 1] * d;
                    h[(2 * k, 2 * k)] = d / j;
                    h[(2 * k + 1, 2 * k + 1)] = d / j;
                }
                let j3 = j * j * j;
                h - &dx * dx.transpose() / j3
            }
            SurfaceKind::Custom(g) => g.hessian(x),
        })
    }

    /// Outward normal normalized by `N(y) . y = 1`.
    pub fn outward_normal(&self, y: &DVector<T>) -> Result<DVector<T>> {
        let j = self.gauge_eval(y)?;
        let defect = (j - T::one()).abs();
        if defect > T::of(ON_SURFACE_TOL) {
            return Err(Error::OffSurface {
                defect: defect.to64(),
                tol: ON_SURFACE_TOL,
            });
        }
        self.normal_unchecked(y)
    }

    /// Normal field `grad j / (grad j . y)` without the on-surface check;
    /// degree -1 homogeneous, so usable slightly off the level set.
    pub fn normal_unchecked(&self, y: &DVector<T>) -> Result<DVector<T>> {
        let grad = self.gauge_gradient(y)?;
        let gnorm = grad.norm();
        if gnorm < T::of(1e-12) {
            return Err(Error::DegenerateGradient { norm: gnorm.to64() });
        }
        let denom = grad.dot(y);
        if denom.abs() < T::of(1e-12) {
            return Err(Error::DegenerateGradient { norm: denom.to64() });
        }
        Ok(grad / denom)
    }

    /// Hessian of the index Hamiltonian `H(x) = j(x)^alpha`.
    ///
    /// `H'' = alpha j^{alpha-2} ( j Hess j + (alpha-1) grad j grad j^T )`.
    pub fn gauge_hessian(&self, x: &DVector<T>) -> Result<DMatrix<T>> {
        let j = self.gauge_eval(x)?;
        let grad = self.gauge_gradient(x)?;
        let hess = self.gauge_hessian_raw(x)?;
        let a = self.alpha;
        let scale = a * j.powf(a - T::of(2.0));
        let outer = &grad * grad.transpose() * (a - T::one());
        Ok((hess * j + outer) * scale)
    }

    /// Coefficient of the linearized system along a unit-speed characteristic
    /// orbit: `(1/alpha) Hess(j^alpha)`.
    ///
    /// The Hamiltonian flow of `j^alpha` traverses the characteristic orbit
    /// at `alpha` times its speed; normalizing by `1/alpha` makes the
    /// fundamental solution over one orbit period the monodromy, and the
    /// resulting indices independent of `alpha`.
    pub fn linearized_coefficient(&self, x: &DVector<T>) -> Result<DMatrix<T>> {
        Ok(self.gauge_hessian(x)? / self.alpha)
    }

    /// Defect of the Euler identity `grad j . x - j`, relative to `j`.
    pub fn euler_defect(&self, x: &DVector<T>) -> Result<T> {
        let j = self.gauge_eval(x)?;
        let grad = self.gauge_gradient(x)?;
        Ok(((grad.dot(x) - j) / j).abs())
    }

    /// Rescales a point onto the surface: `x / j(x)`.
    pub fn project(&self, x: &DVector<T>) -> Result<DVector<T>> {
        let j = self.gauge_eval(x)?;
        Ok(x / j)
    }
}

/// Round gauge `j(x) = |x|`; its level set is the unit sphere.
pub struct NormGauge {
    pub dim_half: usize,
}

impl<T: Scalar> CustomGauge<T> for NormGauge {
    fn id(&self) -> &str {
        "unit-norm"
    }
    fn dim_half(&self) -> usize {
        self.dim_half
    }
    fn value(&self, x: &DVector<T>) -> T {
        x.norm()
    }
    fn gradient(&self, x: &DVector<T>) -> DVector<T> {
        x / x.norm()
    }
    fn hessian(&self, x: &DVector<T>) -> DMatrix<T> {
        let n = x.norm();
        let unit = x / n;
        (DMatrix::identity(x.len(), x.len()) - &unit * unit.transpose()) / n
    }
}

/// Quartic star gauge `j = (q_1^2 + q_2^2 + c q_1 q_2)^{1/4}` with per-plane
/// quadratics `q_k = (x_{2k-1}^2 + x_{2k}^2)/r_k^2`.
///
/// Centrally symmetric, C^2 away from 0, and not an ellipsoid for `c != 0`;
/// the coordinate planes stay invariant, so the planar circular orbits of the
/// matching ellipsoid survive with the same periods.
pub struct QuarticGauge<T: Scalar> {
    pub radii: [T; 2],
    pub coupling: T,
}

impl<T: Scalar> QuarticGauge<T> {
    fn plane_quadratics(&self, x: &DVector<T>) -> (T, T) {
        let q1 = (x[0] * x[0] + x[1] * x[1]) / (self.radii[0] * self.radii[0]);
        let q2 = (x[2] * x[2] + x[3] * x[3]) / (self.radii[1] * self.radii[1]);
        (q1, q2)
    }

    fn quartic(&self, x: &DVector<T>) -> T {
        let (q1, q2) = self.plane_quadratics(x);
        q1 * q1 + q2 * q2 + self.coupling * q1 * q2
    }

    fn quartic_gradient(&self, x: &DVector<T>) -> DVector<T> {
        let (q1, q2) = self.plane_quadratics(x);
        let c = self.coupling;
        let mut g = DVector::zeros(4);
        let d1 = T::of(2.0) / (self.radii[0] * self.radii[0]);
        let d2 = T::of(2.0) / (self.radii[1] * self.radii[1]);
        let w1 = T::of(2.0) * q1 + c * q2;
        let w2 = T::of(2.0) * q2 + c * q1;
        g[0] = w1 * d1 * x[0];
        g[1] = w1 * d1 * x[1];
        g[2] = w2 * d2 * x[2];
        g[3] = w2 * d2 * x[3];
        g
    }

    fn quartic_hessian(&self, x: &DVector<T>) -> DMatrix<T> {
        let (q1, q2) = self.plane_quadratics(x);
        let c = self.coupling;
        let d1 = T::of(2.0) / (self.radii[0] * self.radii[0]);
        let d2 = T::of(2.0) / (self.radii[1] * self.radii[1]);
        let mut g1 = DVector::zeros(4);
        g1[0] = d1 * x[0];
        g1[1] = d1 * x[1];
        let mut g2 = DVector::zeros(4);
        g2[2] = d2 * x[2];
        g2[3] = d2 * x[3];
        let mut h1 = DMatrix::zeros(4, 4);
        h1[(0, 0)] = d1;
        h1[(1, 1)] = d1;
        let mut h2 = DMatrix::zeros(4, 4);
        h2[(2, 2)] = d2;
        h2[(3, 3)] = d2;
        let w1 = T::of(2.0) * q1 + c * q2;
        let w2 = T::of(2.0) * q2 + c * q1;
        let two = T::of(2.0);
        &g1 * g1.transpose() * two
            + &g2 * g2.transpose() * two
            + (&g1 * g2.transpose() + &g2 * g1.transpose()) * c
            + h1 * w1
            + h2 * w2
    }
}

impl<T: Scalar> CustomGauge<T> for QuarticGauge<T> {
    fn id(&self) -> &str {
        "quartic"
    }
    fn dim_half(&self) -> usize {
        2
    }
    fn value(&self, x: &DVector<T>) -> T {
        self.quartic(x).powf(T::of(0.25))
    }
    fn gradient(&self, x: &DVector<T>) -> DVector<T> {
        let f = self.quartic(x);
        self.quartic_gradient(x) * (T::of(0.25) * f.powf(T::of(-0.75)))
    }
    fn hessian(&self, x: &DVector<T>) -> DMatrix<T> {
        let f = self.quartic(x);
        let g = self.quartic_gradient(x);
        let h = self.quartic_hessian(x);
        let quarter = T::of(0.25);
        h * (quarter * f.powf(T::of(-0.75)))
            + &g * g.transpose() * (quarter * T::of(-0.75) * f.powf(T::of(-1.75)))
    }
}

/// Built-in custom surfaces addressable from CLI configs by id.
pub fn lookup_custom(id: &str) -> Option<GaugeSurface<f64>> {
    match id {
        "unit-norm" => Some(GaugeSurface::custom(Arc::new(NormGauge { dim_half: 2 }))),
        "quartic-mild" => Some(GaugeSurface::custom(Arc::new(QuarticGauge {
            radii: [1.0, 1.2],
            coupling: 0.15,
        }))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dvec(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn gauge_on_unit_sphere_point() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.0]);
        assert_relative_eq!(s.gauge_eval(&dvec(&[1.0, 0.0, 0.0, 0.0])).unwrap(), 1.0);
    }

    #[test]
    fn gauge_at_semi_axis_endpoint() {
        let s = GaugeSurface::ellipsoid(&[1.0, 2.0]);
        assert_relative_eq!(s.gauge_eval(&dvec(&[0.0, 0.0, 2.0, 0.0])).unwrap(), 1.0);
    }

    #[test]
    fn gauge_homogeneity_from_sphere_point() {
        let s = GaugeSurface::ellipsoid(&[1.0, 2.0]);
        assert_relative_eq!(s.gauge_eval(&dvec(&[3.0, 0.0, 0.0, 0.0])).unwrap(), 3.0);
    }

    #[test]
    fn zero_point_rejected() {
        let s = GaugeSurface::ellipsoid(&[1.0, 2.0]);
        assert!(matches!(
            s.gauge_eval(&dvec(&[0.0, 0.0, 0.0, 1e-15])),
            Err(Error::ZeroPoint { .. })
        ));
    }

    #[test]
    fn sphere_normal_is_radial() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.0]);
        let n = s.outward_normal(&dvec(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!((n - dvec(&[1.0, 0.0, 0.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn ellipsoid_normal_matches_symbolic_oracle() {
        // grad j = D y / j with D = diag(1/r_k^2 twice); at the semi-axis
        // endpoint y = (0,0,2,0) of r = (1,2): grad j = (0,0,1/2,0), and
        // grad j . y = 1, so N = (0,0,1/2,0).
        let s = GaugeSurface::ellipsoid(&[1.0, 2.0]);
        let n = s.outward_normal(&dvec(&[0.0, 0.0, 2.0, 0.0])).unwrap();
        assert!((n - dvec(&[0.0, 0.0, 0.5, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn normal_normalization_identity() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.7]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let raw = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0f64));
            if raw.norm() < 0.3 {
                continue;
            }
            let y = s.project(&raw).unwrap();
            let n = s.outward_normal(&y).unwrap();
            assert_relative_eq!(n.dot(&y), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn off_surface_point_rejected() {
        let s = GaugeSurface::ellipsoid(&[1.0, 2.0]);
        assert!(matches!(
            s.outward_normal(&dvec(&[2.0, 0.0, 0.0, 0.0])),
            Err(Error::OffSurface { .. })
        ));
    }

    #[test]
    fn hamiltonian_hessian_is_symmetric() {
        let s = GaugeSurface::ellipsoid(&[1.0, std::f64::consts::SQRT_2]);
        let x = dvec(&[0.4, -0.2, 0.9, 0.3]);
        let h = s.gauge_hessian(&x).unwrap();
        let defect = (&h - h.transpose()).amax();
        assert!(defect <= 1e-12);
    }

    #[test]
    fn norm_gauge_hessian_matches_analytic_formula() {
        // For j = |x|, H = |x|^alpha has Hessian
        // alpha |x|^{alpha-2} (I + (alpha-2) unit unit^T).
        let s = GaugeSurface::custom(Arc::new(NormGauge { dim_half: 2 })).with_alpha(1.6);
        let x = dvec(&[0.3, -0.7, 0.2, 0.5]);
        let h = s.gauge_hessian(&x).unwrap();
        let alpha = 1.6f64;
        let r = x.norm();
        let unit = &x / r;
        let expected = (DMatrix::<f64>::identity(4, 4) + &unit * unit.transpose() * (alpha - 2.0))
            * (alpha * r.powf(alpha - 2.0));
        assert!((h - expected).amax() < 1e-12);
    }

    fn finite_difference_hessian(s: &GaugeSurface<f64>, x: &DVector<f64>, h: f64) -> DMatrix<f64> {
        let dim = x.len();
        let mut out = DMatrix::zeros(dim, dim);
        let f = |p: &DVector<f64>| s.gauge_eval(p).unwrap().powf(s.alpha());
        for i in 0..dim {
            for j in 0..dim {
                let mut pp = x.clone();
                let mut pm = x.clone();
                let mut mp = x.clone();
                let mut mm = x.clone();
                pp[i] += h;
                pp[j] += h;
                pm[i] += h;
                pm[j] -= h;
                mp[i] -= h;
                mp[j] += h;
                mm[i] -= h;
                mm[j] -= h;
                out[(i, j)] = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h);
            }
        }
        out
    }

    #[test]
    fn hessians_match_finite_differences() {
        let surfaces = vec![
            GaugeSurface::ellipsoid(&[1.0, 1.4]),
            GaugeSurface::custom(Arc::new(QuarticGauge {
                radii: [1.0, 1.2],
                coupling: 0.15,
            })),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for s in surfaces {
            for _ in 0..100 {
                let raw = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0f64));
                if raw.norm() < 0.4 {
                    continue;
                }
                let h = s.gauge_hessian(&raw).unwrap();
                let fd = finite_difference_hessian(&s, &raw, 1e-5);
                let scale = h.amax().max(1.0);
                assert!(
                    (h - fd).amax() / scale < 1e-5,
                    "finite-difference mismatch on {:?}",
                    s.kind()
                );
            }
        }
    }

    #[test]
    fn ellipsoid_gauge_invariant_under_block_rotations() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.9]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0f64));
            if x.norm() < 0.3 {
                continue;
            }
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let (c, sn) = (theta.cos(), theta.sin());
            for k in 0..2usize {
                let mut rx = x.clone();
                rx[2 * k] = c * x[2 * k] - sn * x[2 * k + 1];
                rx[2 * k + 1] = sn * x[2 * k] + c * x[2 * k + 1];
                let a = s.gauge_eval(&x).unwrap();
                let b = s.gauge_eval(&rx).unwrap();
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
