//! Characteristic flow `y' = J N_Sigma(y)` and its variational equation.
//!
//! The integrator is an adaptive embedded Dormand-Prince 5(4) pair; sample
//! times are hit exactly by clamping steps, so emitted trajectories and
//! symplectic paths carry integrator-accurate values at every sample.
//! Symplecticity is monitored, never enforced.

use crate::error::{Error, Result};
use crate::linalg;
use crate::path::SymplecticPath;
use crate::scalar::{Scalar, Tolerances};
use crate::surface::GaugeSurface;
use nalgebra::{DMatrix, DVector};

/// A time-sampled solution of the characteristic flow.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar> {
    pub times: Vec<T>,
    pub states: Vec<DVector<T>>,
}

impl<T: Scalar> Trajectory<T> {
    /// Maximum of `|j(y(t)) - 1|` over the samples.
    pub fn surface_drift(&self, surface: &GaugeSurface<T>) -> Result<T> {
        let mut worst = T::zero();
        for y in &self.states {
            let j = surface.gauge_eval(y)?;
            worst = worst.max((j - T::one()).abs());
        }
        Ok(worst)
    }

    pub fn duration(&self) -> T {
        *self.times.last().unwrap()
    }

    /// State at a sample index.
    pub fn state(&self, i: usize) -> &DVector<T> {
        &self.states[i]
    }

    /// CSV rows `t, y_1, ..., y_{2n}`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (t, y) in self.times.iter().zip(self.states.iter()) {
            let mut row = vec![format!("{:?}", t.to64())];
            row.extend(y.iter().map(|v| format!("{:?}", v.to64())));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const STEP_FLOOR: f64 = 1e-14;

/// Integrates `y' = f(t, y)` hitting every grid time exactly.
pub fn integrate_to_grid<T: Scalar>(
    f: &dyn Fn(T, &DVector<T>) -> Result<DVector<T>>,
    y0: &DVector<T>,
    grid: &[T],
    rel_tol: T,
    abs_tol: T,
) -> Result<Vec<DVector<T>>> {
    let mut out = Vec::with_capacity(grid.len());
    let mut y = y0.clone();
    let mut t = grid[0];
    out.push(y.clone());
    let span = *grid.last().unwrap() - grid[0];
    let mut h = span * T::of(1e-3);
    let floor = span.abs() * T::of(STEP_FLOOR);
    for target in grid.iter().skip(1) {
        while t < *target {
            let mut step = h.min(*target - t);
            loop {
                let (y_new, err) = dp_step(f, t, &y, step, rel_tol, abs_tol)?;
                if err <= T::one() {
                    t += step;
                    y = y_new;
                    let grow = T::of(0.9) * err.max(T::of(1e-10)).powf(T::of(-0.2));
                    h = step * grow.min(T::of(5.0)).max(T::of(0.2));
                    break;
                }
                let shrink = T::of(0.9) * err.powf(T::of(-0.2));
                step *= shrink.max(T::of(0.1));
                if step < floor {
                    return Err(Error::StepUnderflow {
                        t: t.to64(),
                        floor: floor.to64(),
                    });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn dp_step<T: Scalar>(
    f: &dyn Fn(T, &DVector<T>) -> Result<DVector<T>>,
    t: T,
    y: &DVector<T>,
    h: T,
    rel_tol: T,
    abs_tol: T,
) -> Result<(DVector<T>, T)> {
    let mut k: Vec<DVector<T>> = Vec::with_capacity(7);
    k.push(f(t, y)?);
    for i in 0..6 {
        let mut yi = y.clone();
        for (j, kj) in k.iter().enumerate() {
            let a = T::of(DP_A[i][j]);
            if a != T::zero() {
                yi += kj * (a * h);
            }
        }
        k.push(f(t + T::of(DP_C[i + 1]) * h, &yi)?);
    }
    let mut y5 = y.clone();
    let mut y4 = y.clone();
    for (j, kj) in k.iter().enumerate() {
        if DP_B5[j] != 0.0 {
            y5 += kj * (T::of(DP_B5[j]) * h);
        }
        if DP_B4[j] != 0.0 {
            y4 += kj * (T::of(DP_B4[j]) * h);
        }
    }
    let mut err_sq = T::zero();
    for i in 0..y.len() {
        let scale = abs_tol + rel_tol * y[i].abs().max(y5[i].abs());
        let e = (y5[i] - y4[i]) / scale;
        err_sq += e * e;
    }
    let err = (err_sq / T::of(y.len() as f64)).sqrt();
    Ok((y5, err))
}

/// Integrates the characteristic flow from a point on the surface.
pub fn integrate_flow<T: Scalar>(
    surface: &GaugeSurface<T>,
    y0: &DVector<T>,
    t_end: T,
    samples: usize,
    tols: &Tolerances<T>,
) -> Result<Trajectory<T>> {
    let j0 = surface.gauge_eval(y0)?;
    if (j0 - T::one()).abs() > T::of(1e-8) {
        return Err(Error::OffSurface {
            defect: (j0 - T::one()).abs().to64(),
            tol: 1e-8,
        });
    }
    let grid: Vec<T> = (0..=samples)
        .map(|i| t_end * T::of(i as f64 / samples as f64))
        .collect();
    let rhs = move |_t: T, y: &DVector<T>| -> Result<DVector<T>> {
        let n = surface.normal_unchecked(y)?;
        Ok(apply_j(&n))
    };
    let states = integrate_to_grid(&rhs, y0, &grid, tols.ode_rel, tols.ode_abs)?;
    let traj = Trajectory {
        times: grid,
        states,
    };
    let drift = traj.surface_drift(surface)?;
    if drift > tols.surface_drift {
        return Err(Error::ToleranceExceeded {
            drift: drift.to64(),
            budget: tols.surface_drift.to64(),
        });
    }
    Ok(traj)
}

/// Applies the pairwise structure matrix without materializing it.
pub fn apply_j<T: Scalar>(v: &DVector<T>) -> DVector<T> {
    let mut out = DVector::zeros(v.len());
    for k in 0..v.len() / 2 {
        out[2 * k] = -v[2 * k + 1];
        out[2 * k + 1] = v[2 * k];
    }
    out
}

/// Integrates the flow and the variational system `M' = J A(t) M` with
/// `A(t)` the Hessian of `j^alpha` along the orbit, jointly.
///
/// Returns the trajectory and the symplectic path over `[0, t_end]`.
pub fn variational_path<T: Scalar>(
    surface: &GaugeSurface<T>,
    y0: &DVector<T>,
    t_end: T,
    samples: usize,
    tols: &Tolerances<T>,
) -> Result<(Trajectory<T>, SymplecticPath<T>)> {
    let dim = surface.dim();
    let j0 = surface.gauge_eval(y0)?;
    if (j0 - T::one()).abs() > T::of(1e-8) {
        return Err(Error::OffSurface {
            defect: (j0 - T::one()).abs().to64(),
            tol: 1e-8,
        });
    }
    // State layout: [y; M columns].
    let mut z0 = DVector::zeros(dim + dim * dim);
    z0.rows_mut(0, dim).copy_from(y0);
    for c in 0..dim {
        z0[dim + c * dim + c] = T::one();
    }
    let rhs = move |_t: T, z: &DVector<T>| -> Result<DVector<T>> {
        let y = z.rows(0, dim).into_owned();
        let n = surface.normal_unchecked(&y)?;
        let a = surface.linearized_coefficient(&y)?;
        let mut dz = DVector::zeros(dim + dim * dim);
        dz.rows_mut(0, dim).copy_from(&apply_j(&n));
        for c in 0..dim {
            let col = z.rows(dim + c * dim, dim).into_owned();
            let acol = &a * col;
            dz.rows_mut(dim + c * dim, dim).copy_from(&apply_j(&acol));
        }
        Ok(dz)
    };
    let grid: Vec<T> = (0..=samples)
        .map(|i| t_end * T::of(i as f64 / samples as f64))
        .collect();
    let states = integrate_to_grid(&rhs, &z0, &grid, tols.ode_rel, tols.ode_abs)?;
    let mut traj_states = Vec::with_capacity(states.len());
    let mut mats = Vec::with_capacity(states.len());
    for z in &states {
        traj_states.push(z.rows(0, dim).into_owned());
        let mut m = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            m.column_mut(c).copy_from(&z.rows(dim + c * dim, dim));
        }
        mats.push(m);
    }
    let traj = Trajectory {
        times: grid.clone(),
        states: traj_states,
    };
    let drift = traj.surface_drift(surface)?;
    if drift > tols.surface_drift {
        return Err(Error::ToleranceExceeded {
            drift: drift.to64(),
            budget: tols.surface_drift.to64(),
        });
    }
    let path = SymplecticPath::new(grid, mats)?;
    let defect = path.max_symplectic_defect();
    if defect > tols.symplectic_drift {
        return Err(Error::ToleranceExceeded {
            drift: defect.to64(),
            budget: tols.symplectic_drift.to64(),
        });
    }
    Ok((traj, path))
}

/// Antiperiodicity defect `max_t |y(t + tau/2) + y(t)|` over the first half
/// of a one-period trajectory with an even number of intervals.
pub fn antiperiodicity_defect<T: Scalar>(traj: &Trajectory<T>) -> T {
    let n = traj.times.len() - 1;
    let half = n / 2;
    let mut worst = T::zero();
    for i in 0..=half {
        let d = (&traj.states[i + half] + &traj.states[i]).norm();
        worst = worst.max(d);
    }
    worst
}

/// True iff the orbit trajectory satisfies `y(t + tau/2) = -y(t)` to 1e-7.
pub fn check_symmetric<T: Scalar>(traj: &Trajectory<T>, tol: T) -> bool {
    antiperiodicity_defect(traj) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Tolerances;
    use nalgebra::DVector;

    fn dvec(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn sphere_orbit_is_a_closed_circle() {
        // On the round sphere the orbit through (1,0,0,0) is the unit circle
        // in the first pair-plane with period 2 pi.
        let s = GaugeSurface::ellipsoid(&[1.0, 1.0]);
        let tols = Tolerances::default();
        let tau = std::f64::consts::TAU;
        let traj = integrate_flow(&s, &dvec(&[1.0, 0.0, 0.0, 0.0]), tau, 256, &tols).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last - dvec(&[1.0, 0.0, 0.0, 0.0])).norm() < 1e-8);
        // Mid-orbit sample matches the closed-form circle.
        let quarter = &traj.states[64];
        assert!((quarter - dvec(&[0.0, 1.0, 0.0, 0.0])).norm() < 1e-8);
    }

    #[test]
    fn gauge_is_a_first_integral() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.3]);
        let tols = Tolerances::default();
        let y0 = s.project(&dvec(&[0.6, -0.1, 0.7, 0.2])).unwrap();
        let traj = integrate_flow(&s, &y0, 9.0, 400, &tols).unwrap();
        assert!(traj.surface_drift(&s).unwrap() <= 1e-8);
    }

    #[test]
    fn plane_one_circle_stays_in_invariant_plane() {
        let s = GaugeSurface::ellipsoid(&[1.0, std::f64::consts::SQRT_2]);
        let tols = Tolerances::default();
        let tau = std::f64::consts::TAU; // period of orbit 1 is 2 pi r_1^2
        let traj = integrate_flow(&s, &dvec(&[1.0, 0.0, 0.0, 0.0]), tau, 256, &tols).unwrap();
        for y in &traj.states {
            assert!(y[2].abs() <= 1e-8 && y[3].abs() <= 1e-8);
        }
        assert!((traj.states.last().unwrap() - &traj.states[0]).norm() < 1e-8);
    }

    #[test]
    fn off_surface_start_rejected() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.0]);
        let tols = Tolerances::default();
        assert!(matches!(
            integrate_flow(&s, &dvec(&[1.5, 0.0, 0.0, 0.0]), 1.0, 32, &tols),
            Err(Error::OffSurface { .. })
        ));
    }

    #[test]
    fn circle_trajectory_is_antiperiodic() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.2]);
        let tols = Tolerances::default();
        let traj = integrate_flow(
            &s,
            &dvec(&[1.0, 0.0, 0.0, 0.0]),
            std::f64::consts::TAU,
            256,
            &tols,
        )
        .unwrap();
        assert!(check_symmetric(&traj, 1e-7));
        // The criterion is invariant under reflection of the orbit.
        let reflected = Trajectory {
            times: traj.times.clone(),
            states: traj.states.iter().map(|y| -y).collect(),
        };
        assert!(check_symmetric(&reflected, 1e-7));
    }

    #[test]
    fn translated_orbit_record_is_not_symmetric() {
        let s = GaugeSurface::ellipsoid(&[1.0, 1.2]);
        let tols = Tolerances::default();
        let traj = integrate_flow(
            &s,
            &dvec(&[1.0, 0.0, 0.0, 0.0]),
            std::f64::consts::TAU,
            256,
            &tols,
        )
        .unwrap();
        let off = dvec(&[0.3, 0.0, 0.1, 0.0]);
        let shifted = Trajectory {
            times: traj.times.clone(),
            states: traj.states.iter().map(|y| y + &off).collect(),
        };
        assert!(!check_symmetric(&shifted, 1e-7));
    }
}
