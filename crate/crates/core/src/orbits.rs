//! Closed characteristics: closed-form planar orbits on ellipsoids, Newton
//! shooting on general surfaces, and linear stability from Floquet
//! multipliers.

use crate::error::{Error, Result};
use crate::flow::{self, Trajectory};
use crate::linalg;
use crate::path::{self, blocks, SymplecticPath};
use crate::scalar::{Scalar, Tolerances};
use crate::surface::GaugeSurface;
use nalgebra::{Complex, DMatrix, DVector};

/// A periodic solution of the characteristic flow together with its
/// monodromy data.
#[derive(Debug, Clone)]
pub struct ClosedCharacteristic<T: Scalar> {
    pub surface: GaugeSurface<T>,
    /// Minimal data: period of the orbit as handed in (tau).
    pub period: T,
    pub initial_point: DVector<T>,
    pub symmetric: bool,
    pub prime: bool,
    /// Minimal period recovered by the divisor scan; equals `period` for
    /// prime orbits.
    pub prime_period: T,
    /// One-period trajectory samples.
    pub trajectory: Trajectory<T>,
    /// Monodromy path over one full period.
    pub full_path: SymplecticPath<T>,
    /// Monodromy path over the half period, when the orbit is symmetric.
    pub half_path: Option<SymplecticPath<T>>,
    /// Squared-radius rotation ratios of the transverse planes, for
    /// closed-form ellipsoid orbits (empty otherwise). Each entry is
    /// `r_k^2 / r_j^2` for the transverse plane `j`.
    pub transverse_ratios: Vec<T>,
}

/// How many iterations of the monodromy path to request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathSpan {
    Half,
    Full,
    Periods(u32),
}

impl<T: Scalar> ClosedCharacteristic<T> {
    pub fn monodromy(&self) -> &DMatrix<T> {
        self.full_path.endpoint()
    }

    /// Monodromy path over the requested span.
    ///
    /// `Half` requires a symmetric orbit; `Periods(m)` extends the one-period
    /// path through the periodicity of the linearized system.
    pub fn monodromy_path(&self, span: PathSpan) -> Result<SymplecticPath<T>> {
        match span {
            PathSpan::Full => Ok(self.full_path.clone()),
            PathSpan::Periods(m) => self.full_path.iterate(m),
            PathSpan::Half => self.half_path.clone().ok_or(Error::NotSymmetricOrbit),
        }
    }

    /// Closure defect `|y(tau) - y(0)|`.
    pub fn closure_defect(&self) -> T {
        (self.trajectory.states.last().unwrap() - &self.trajectory.states[0]).norm()
    }

    /// Defect of `gamma(tau) = gamma(tau/2)^2` for symmetric orbits.
    pub fn half_squares_to_full_defect(&self) -> Option<T> {
        self.half_path.as_ref().map(|half| {
            let sq = half.endpoint() * half.endpoint();
            (self.full_path.endpoint() - sq).amax()
        })
    }
}

/// Sample density for monodromy paths: at least 64 samples per full turn of
/// the fastest rotating block, with a floor for slow systems.
fn samples_per_period<T: Scalar>(max_ratio: T) -> usize {
    let turns = max_ratio.to64().abs().max(1.0) + 1.0;
    ((64.0 * turns).ceil() as usize).max(256)
}

/// The `n` planar circular orbits of an ellipsoid, in closed form.
///
/// Orbit `k` runs in the coordinate pair `(x_{2k-1}, x_{2k})` with period
/// `2 pi r_k^2`; its monodromy path is the direct sum of the in-plane shear
/// block and transverse rotations by `2 pi r_k^2 / r_j^2` per period.
pub fn ellipsoid_orbits<T: Scalar>(surface: &GaugeSurface<T>) -> Result<Vec<ClosedCharacteristic<T>>> {
    let radii = surface
        .radii()
        .ok_or_else(|| Error::Config("closed-form orbits require an ellipsoid surface".into()))?
        .to_vec();
    let n = radii.len();
    let alpha = surface.alpha();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let rk = radii[k];
        let period = T::two_pi() * rk * rk;
        let ratios: Vec<T> = (0..n)
            .filter(|j| *j != k)
            .map(|j| rk * rk / (radii[j] * radii[j]))
            .collect();
        let max_ratio = ratios
            .iter()
            .fold(T::one(), |acc, r| acc.max(*r));
        let samples = samples_per_period(max_ratio);

        // Closed-form trajectory: circle of radius r_k in plane k.
        let mut times = Vec::with_capacity(samples + 1);
        let mut states = Vec::with_capacity(samples + 1);
        for i in 0..=samples {
            let t = period * T::of(i as f64 / samples as f64);
            let phi = t / (rk * rk);
            let mut y = DVector::zeros(2 * n);
            y[2 * k] = rk * phi.cos();
            y[2 * k + 1] = rk * phi.sin();
            times.push(t);
            states.push(y);
        }
        let trajectory = Trajectory { times, states };

        // Closed-form monodromy path in scaled time s = t / period.
        let in_plane = blocks::unit_shear(alpha);
        let ratios_cl = ratios.clone();
        let matrix_at = move |s: T| -> DMatrix<T> {
            let mut blocks_vec: Vec<DMatrix<T>> = Vec::with_capacity(n);
            let mut ridx = 0;
            for j in 0..n {
                if j == k {
                    blocks_vec.push(in_plane(s));
                } else {
                    blocks_vec.push(path::rot2(T::two_pi() * ratios_cl[ridx] * s));
                    ridx += 1;
                }
            }
            path::block_diag(&blocks_vec)
        };
        let full_path = scaled_sample(period, period, samples, &matrix_at)?;
        let half_path = scaled_sample(period * T::of(0.5), period, samples / 2, &matrix_at)?;

        out.push(ClosedCharacteristic {
            surface: surface.clone(),
            period,
            initial_point: trajectory.states[0].clone(),
            symmetric: true,
            prime: true,
            prime_period: period,
            trajectory,
            full_path,
            half_path: Some(half_path),
            transverse_ratios: ratios,
        });
    }
    Ok(out)
}

/// Samples `f(s)` with scaled time `s = t / period` over `[0, duration]`.
fn scaled_sample<T: Scalar>(
    duration: T,
    period: T,
    samples: usize,
    f: &dyn Fn(T) -> DMatrix<T>,
) -> Result<SymplecticPath<T>> {
    let span = duration / period;
    let mut times = Vec::with_capacity(samples + 1);
    let mut mats = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let frac = T::of(i as f64 / samples as f64);
        times.push(duration * frac);
        mats.push(f(span * frac));
    }
    SymplecticPath::new(times, mats)
}

/// Integrated (not closed-form) monodromy path of an orbit, for
/// cross-checking the closed forms and for shooting output.
pub fn integrated_paths<T: Scalar>(
    surface: &GaugeSurface<T>,
    y0: &DVector<T>,
    period: T,
    samples: usize,
    tols: &Tolerances<T>,
) -> Result<(Trajectory<T>, SymplecticPath<T>, SymplecticPath<T>)> {
    let (traj, full) = flow::variational_path(surface, y0, period, samples, tols)?;
    let (_, half) = flow::variational_path(surface, y0, period * T::of(0.5), samples / 2, tols)?;
    Ok((traj, full, half))
}

/// Result of a shooting run.
#[derive(Debug, Clone)]
pub struct ShootingOptions<T: Scalar> {
    pub max_newton_steps: usize,
    pub closure_target: T,
    pub samples: usize,
}

impl<T: Scalar> Default for ShootingOptions<T> {
    fn default() -> Self {
        ShootingOptions {
            max_newton_steps: 50,
            closure_target: T::of(1e-9),
            samples: 512,
        }
    }
}

/// Newton iteration on the return map of the section through the seed point
/// orthogonal to the initial flow direction.
pub fn shoot_orbit<T: Scalar>(
    surface: &GaugeSurface<T>,
    seed_point: &DVector<T>,
    seed_period: T,
    opts: &ShootingOptions<T>,
    tols: &Tolerances<T>,
) -> Result<ClosedCharacteristic<T>> {
    let dim = surface.dim();
    let j0 = surface.gauge_eval(seed_point)?;
    if (j0 - T::one()).abs() > T::of(1e-6) {
        return Err(Error::OffSurface {
            defect: (j0 - T::one()).abs().to64(),
            tol: 1e-6,
        });
    }
    let mut y = surface.project(seed_point)?;
    let mut tau = seed_period;

    let mut residual_norm = T::of(f64::INFINITY);
    for _step in 0..opts.max_newton_steps {
        let loose = Tolerances {
            surface_drift: T::of(1e-5),
            ..*tols
        };
        let traj = flow::integrate_flow(surface, &y, tau, 64, &loose)?;
        let y_end = traj.states.last().unwrap().clone();
        let residual = &y_end - &y;
        residual_norm = residual.norm();
        if residual_norm <= opts.closure_target {
            return finish_orbit(surface, &y, tau, opts, tols);
        }

        // Section directions: tangent to the surface at y and transverse to
        // the flow. Radial moves are collapsed by the surface projection and
        // flow-aligned moves are equivalent to a phase shift, so both are
        // excluded from the unknowns.
        let grad = surface.gauge_gradient(&y)?;
        let flow_dir = flow::apply_j(&surface.normal_unchecked(&y)?);
        let mut ortho: Vec<DVector<T>> = Vec::new();
        let mut frame = vec![grad.normalize(), flow_dir.normalize()];
        for i in 0..dim {
            let mut e = DVector::zeros(dim);
            e[i] = T::one();
            for u in &frame {
                let proj = u.dot(&e);
                e -= u * proj;
            }
            if e.norm() > T::of(1e-6) {
                let e = e.normalize();
                frame.push(e.clone());
                ortho.push(e);
            }
            if ortho.len() == dim - 2 {
                break;
            }
        }

        // Finite-difference Jacobian of F(u, tau) = Phi_tau(u) - u over the
        // section directions plus the period direction.
        let h = T::of(1e-7);
        let unknowns = ortho.len() + 1;
        let mut jac = DMatrix::<T>::zeros(dim, unknowns);
        for (col, dir) in ortho.iter().enumerate() {
            let yp = surface.project(&(&y + dir * h))?;
            let tp = flow::integrate_flow(surface, &yp, tau, 64, &loose)?;
            let rp = tp.states.last().unwrap() - &yp;
            jac.column_mut(col).copy_from(&((&rp - &residual) / h));
        }
        let n_end = surface.normal_unchecked(&y_end)?;
        let v_end = flow::apply_j(&n_end);
        jac.column_mut(unknowns - 1).copy_from(&v_end);

        // Least-squares Newton step.
        let svd = jac.clone().svd(true, true);
        let sigma_min = svd
            .singular_values
            .iter()
            .fold(T::of(f64::INFINITY), |a, &s| a.min(s));
        if sigma_min < T::of(1e-10) {
            return Err(Error::SingularJacobian {
                sigma_min: sigma_min.to64(),
            });
        }
        let delta = svd
            .solve(&(-&residual), T::of(1e-13))
            .map_err(|_| Error::SingularJacobian {
                sigma_min: sigma_min.to64(),
            })?;
        let mut y_new = y.clone();
        for (col, dir) in ortho.iter().enumerate() {
            y_new += dir * delta[col];
        }
        y = surface.project(&y_new)?;
        tau += delta[unknowns - 1];
        if tau <= T::of(1e-6) {
            return Err(Error::NoConvergence {
                steps: opts.max_newton_steps,
                residual: residual_norm.to64(),
            });
        }
    }
    Err(Error::NoConvergence {
        steps: opts.max_newton_steps,
        residual: residual_norm.to64(),
    })
}

fn finish_orbit<T: Scalar>(
    surface: &GaugeSurface<T>,
    y0: &DVector<T>,
    tau: T,
    opts: &ShootingOptions<T>,
    tols: &Tolerances<T>,
) -> Result<ClosedCharacteristic<T>> {
    // Prime detection: scan divisors of tau for earlier closure.
    let mut prime = true;
    let mut prime_tau = tau;
    for k in (2..=8u32).rev() {
        let cand = tau / T::of(k as f64);
        let loose = Tolerances {
            surface_drift: T::of(1e-5),
            ..*tols
        };
        if let Ok(t) = flow::integrate_flow(surface, y0, cand, 64, &loose) {
            if (t.states.last().unwrap() - y0).norm() <= T::of(1e-7) {
                prime = false;
                prime_tau = cand;
                break;
            }
        }
    }
    let (traj, full, half) = integrated_paths(surface, y0, tau, opts.samples, tols)?;
    let symmetric = flow::check_symmetric(&traj, tols.antiperiodic);
    Ok(ClosedCharacteristic {
        surface: surface.clone(),
        period: tau,
        initial_point: y0.clone(),
        symmetric,
        prime,
        prime_period: prime_tau,
        trajectory: traj,
        half_path: if symmetric { Some(half) } else { None },
        full_path: full,
        transverse_ratios: Vec::new(),
    })
}

/// Linear stability classes of a closed characteristic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StabilityKind {
    Elliptic,
    Hyperbolic,
    Degenerate,
    Mixed,
}

/// Floquet multipliers with the stability classification.
#[derive(Debug, Clone)]
pub struct StabilityClass<T: Scalar> {
    pub kind: StabilityKind,
    pub multipliers: Vec<Complex<T>>,
    /// Rotation angles in `[0, 2 pi)` of the unit-circle multipliers.
    pub angles: Vec<T>,
}

/// Classifies the monodromy `gamma(tau)` by its Floquet multipliers.
///
/// A multiplier is "on U" when `||lambda| - 1| <= 1e-7` and "equal to 1"
/// when `|lambda - 1| <= 1e-5`.
pub fn classify_stability<T: Scalar>(gamma_tau: &DMatrix<T>) -> Result<StabilityClass<T>> {
    linalg::require_symplectic(gamma_tau, T::of(1e-6))?;
    let multipliers = linalg::complex_eigenvalues(gamma_tau);
    let on_circle = T::of(1e-7);
    let unit_band = T::of(1e-5);
    let off_band = T::of(1e-5);

    let ones = multipliers
        .iter()
        .filter(|l| linalg::cmod(&(**l - Complex::new(T::one(), T::zero()))) <= unit_band)
        .count();
    let circle = multipliers
        .iter()
        .filter(|l| (linalg::cmod(l) - T::one()).abs() <= on_circle)
        .count();
    let off = multipliers
        .iter()
        .filter(|l| (linalg::cmod(l) - T::one()).abs() >= off_band)
        .count();

    let kind = if ones > 2 {
        StabilityKind::Degenerate
    } else if circle == multipliers.len() {
        StabilityKind::Elliptic
    } else if ones == 2 && off == multipliers.len() - 2 {
        StabilityKind::Hyperbolic
    } else {
        StabilityKind::Mixed
    };

    // One representative angle per conjugate pair, in [0, pi].
    let mut angles: Vec<T> = multipliers
        .iter()
        .filter(|l| (linalg::cmod(l) - T::one()).abs() <= on_circle)
        .map(|l| l.im.abs().atan2(l.re))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup_by(|a, b| (*a - *b).abs() < T::of(1e-9));

    Ok(StabilityClass {
        kind,
        multipliers,
        angles,
    })
}

/// Checks that the multipliers close under the symplectic quadruple symmetry
/// `lambda -> 1/lambda, conj(lambda)`; returns the worst mismatch.
pub fn quadruple_defect<T: Scalar>(multipliers: &[Complex<T>]) -> T {
    let mut worst = T::zero();
    for l in multipliers {
        if linalg::cmod(l) < T::of(1e-12) {
            return T::of(f64::INFINITY);
        }
        let inv = Complex::new(T::one(), T::zero()) / *l;
        let best = multipliers
            .iter()
            .map(|m| linalg::cmod(&(*m - inv)))
            .fold(T::of(f64::INFINITY), |a, b| a.min(b));
        worst = worst.max(best);
        let conj = linalg::cconj(l);
        let best_c = multipliers
            .iter()
            .map(|m| linalg::cmod(&(*m - conj)))
            .fold(T::of(f64::INFINITY), |a, b| a.min(b));
        worst = worst.max(best_c);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{block_diag, rot2};
    use nalgebra::DVector;

    fn tols() -> Tolerances<f64> {
        Tolerances::default()
    }

    #[test]
    fn sphere_orbits_are_totally_degenerate() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.0]);
        let orbits = ellipsoid_orbits(&s).unwrap();
        assert_eq!(orbits.len(), 2);
        for orbit in &orbits {
            let st = classify_stability(orbit.monodromy()).unwrap();
            for l in &st.multipliers {
                assert!(
                    linalg::cmod(&(*l - Complex::new(1.0, 0.0))) < 1e-6,
                    "sphere multiplier {l}"
                );
            }
            assert_eq!(st.kind, StabilityKind::Degenerate);
        }
    }

    #[test]
    fn sqrt2_ellipsoid_orbit_one_eigenvalues() {
        // Transverse rotation angle is 2 pi r_1^2 / r_2^2 = pi: multipliers
        // {1, 1, -1, -1}.
        let s = GaugeSurface::ellipsoid(&[1.0, std::f64::consts::SQRT_2]);
        let orbits = ellipsoid_orbits(&s).unwrap();
        let st = classify_stability(orbits[0].monodromy()).unwrap();
        let mut ones = 0;
        let mut minus = 0;
        for l in &st.multipliers {
            if linalg::cmod(&(*l - Complex::new(1.0, 0.0))) < 1e-7 {
                ones += 1;
            }
            if linalg::cmod(&(*l + Complex::new(1.0, 0.0))) < 1e-7 {
                minus += 1;
            }
        }
        assert_eq!((ones, minus), (2, 2));
        assert_eq!(st.kind, StabilityKind::Elliptic);
        // Orbit 2 rotates the transverse plane by 4 pi: multiplier 1 of
        // multiplicity 4.
        let st2 = classify_stability(orbits[1].monodromy()).unwrap();
        assert_eq!(st2.kind, StabilityKind::Degenerate);
    }

    #[test]
    fn closed_form_path_matches_integrated_monodromy() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.3]);
        let orbits = ellipsoid_orbits(&s).unwrap();
        for orbit in &orbits {
            let (_, full, half) = integrated_paths(
                &s,
                &orbit.initial_point,
                orbit.period,
                1024,
                &tols(),
            )
            .unwrap();
            let defect = (full.endpoint() - orbit.full_path.endpoint()).amax();
            assert!(defect < 1e-6, "full-period defect {defect:.2e}");
            let half_defect =
                (half.endpoint() - orbit.half_path.as_ref().unwrap().endpoint()).amax();
            assert!(half_defect < 1e-6, "half-period defect {half_defect:.2e}");
        }
    }

    #[test]
    fn monodromy_satisfies_semigroup_and_half_square() {
        let s = GaugeSurface::ellipsoid(&[1.0, std::f64::consts::SQRT_2]);
        let orbits = ellipsoid_orbits(&s).unwrap();
        let orbit = &orbits[0];
        // gamma(m tau) = gamma(tau)^m for the closed-form path.
        for m in 2..=4u32 {
            let ext = orbit.full_path.iterate(m).unwrap();
            let mut power = DMatrix::<f64>::identity(4, 4);
            for _ in 0..m {
                power = orbit.monodromy() * power;
            }
            assert!((ext.endpoint() - power).amax() < 1e-6);
        }
        // gamma(tau) = gamma(tau/2)^2.
        assert!(orbit.half_squares_to_full_defect().unwrap() < 1e-6);
    }

    #[test]
    fn monodromy_commutes_with_plane_projectors() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.7]);
        let orbits = ellipsoid_orbits(&s).unwrap();
        let m = orbits[0].monodromy();
        for k in 0..2usize {
            let mut p = DMatrix::<f64>::zeros(4, 4);
            p[(2 * k, 2 * k)] = 1.0;
            p[(2 * k + 1, 2 * k + 1)] = 1.0;
            assert!((m * &p - &p * m).amax() < 1e-8);
        }
    }

    #[test]
    fn shooting_reconverges_to_closed_form_orbit() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.3]);
        let exact = &ellipsoid_orbits(&s).unwrap()[0];
        let mut seed = exact.initial_point.clone();
        seed[0] += 1e-3;
        seed[2] += 1e-3;
        let seed = s.project(&seed).unwrap();
        let found = shoot_orbit(
            &s,
            &seed,
            exact.period * 1.0005,
            &ShootingOptions::default(),
            &tols(),
        )
        .unwrap();
        assert!(
            (found.period - exact.period).abs() <= 1e-8,
            "period error {:.2e}",
            (found.period - exact.period).abs()
        );
        assert!(found.prime);
        assert!(found.symmetric);
        assert!(found.closure_defect() <= 1e-7);
        let defect = (found.monodromy() - exact.monodromy()).amax();
        assert!(defect < 1e-6, "monodromy defect {defect:.2e}");
    }

    #[test]
    fn shooting_detects_non_prime_iterate() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.3]);
        let exact = &ellipsoid_orbits(&s).unwrap()[0];
        let found = shoot_orbit(
            &s,
            &exact.initial_point,
            exact.period * 3.0,
            &ShootingOptions::default(),
            &tols(),
        )
        .unwrap();
        assert!(!found.prime);
        assert!((found.prime_period - exact.period).abs() <= 1e-8);
    }

    #[test]
    fn shooting_far_seed_fails_loudly() {
        let s = GaugeSurface::ellipsoid(&[1.0, 2.9]);
        // A generic seed far from the planar orbits with a poor period guess.
        let seed = s
            .project(&DVector::from_row_slice(&[0.7, 0.3, 0.5, -0.4]))
            .unwrap();
        let opts = ShootingOptions {
            max_newton_steps: 8,
            ..ShootingOptions::default()
        };
        assert!(matches!(
            shoot_orbit(&s, &seed, 2.0, &opts, &tols()),
            Err(Error::NoConvergence { .. }) | Err(Error::SingularJacobian { .. })
        ));
    }

    #[test]
    fn reflected_seed_gives_same_orbit_data() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.3]);
        let exact = &ellipsoid_orbits(&s).unwrap()[0];
        let plus = shoot_orbit(
            &s,
            &exact.initial_point,
            exact.period * 1.001,
            &ShootingOptions::default(),
            &tols(),
        )
        .unwrap();
        let minus_seed = -&exact.initial_point;
        let minus = shoot_orbit(
            &s,
            &minus_seed,
            exact.period * 1.001,
            &ShootingOptions::default(),
            &tols(),
        )
        .unwrap();
        assert!((plus.period - minus.period).abs() <= 1e-9);
        let a = classify_stability(plus.monodromy()).unwrap();
        let b = classify_stability(minus.monodromy()).unwrap();
        assert_eq!(a.kind, b.kind);
    }

    #[test]
    fn classification_examples() {
        let n1 = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let elliptic = block_diag(&[n1.clone(), rot2(std::f64::consts::PI / 3.0)]);
        let st = classify_stability(&elliptic).unwrap();
        assert_eq!(st.kind, StabilityKind::Elliptic);
        assert_eq!(st.angles.len(), 2);
        assert!(st.angles[0].abs() < 1e-9);
        assert!((st.angles[1] - std::f64::consts::PI / 3.0).abs() < 1e-9);

        let hyperbolic = block_diag(&[
            n1.clone(),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]),
        ]);
        assert_eq!(
            classify_stability(&hyperbolic).unwrap().kind,
            StabilityKind::Hyperbolic
        );

        let degenerate = block_diag(&[
            n1,
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 1.0]),
        ]);
        assert_eq!(
            classify_stability(&degenerate).unwrap().kind,
            StabilityKind::Degenerate
        );
    }

    #[test]
    fn orbit_monodromies_keep_unit_multiplier_pair() {
        // 1 is a Floquet multiplier of algebraic multiplicity at least 2.
        // The geometric multiplicity is 1 on the forced Jordan block, so the
        // check counts eigenvalues, and the squared kernel has dimension 2.
        let s = GaugeSurface::ellipsoid(&[1.0, 1.45]);
        for orbit in ellipsoid_orbits(&s).unwrap() {
            let st = classify_stability(orbit.monodromy()).unwrap();
            let ones = st
                .multipliers
                .iter()
                .filter(|l| linalg::cmod(&(**l - Complex::new(1.0, 0.0))) <= 1e-5)
                .count();
            assert!(ones >= 2, "unit multiplier count {ones}");
            let k = orbit.monodromy() - DMatrix::<f64>::identity(4, 4);
            let k2 = &k * &k;
            let svd = k2.svd(false, false);
            let small = svd.singular_values.iter().filter(|s| **s <= 1e-5).count();
            assert!(small >= 2, "squared-kernel dimension {small}");
        }
    }

    #[test]
    fn multipliers_close_under_quadruple_symmetry() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.45]);
        for orbit in ellipsoid_orbits(&s).unwrap() {
            let st = classify_stability(orbit.monodromy()).unwrap();
            assert!(quadruple_defect(&st.multipliers) <= 1e-7);
        }
    }

    #[test]
    fn quartic_surface_keeps_planar_orbit_with_ellipsoid_period() {
        // The coupled quartic gauge leaves the coordinate planes invariant;
        // the planar circle of radius r_1 persists with period 2 pi r_1^2.
        use crate::surface::QuarticGauge;
        use std::sync::Arc;
        let s = GaugeSurface::custom(Arc::new(QuarticGauge {
            radii: [1.0, 1.2],
            coupling: 0.15,
        }));
        let seed = DVector::from_row_slice(&[1.0, 0.0, 0.0, 0.0]);
        let orbit = shoot_orbit(
            &s,
            &seed,
            std::f64::consts::TAU * 1.01,
            &ShootingOptions::default(),
            &tols(),
        )
        .unwrap();
        assert!((orbit.period - std::f64::consts::TAU).abs() <= 1e-8);
        assert!(orbit.symmetric);
    }
}
