//! Time-sampled symplectic paths `gamma: [0, T] -> Sp(2n)` with
//! `gamma(0) = I`, the object the index engine consumes.
//!
//! Between samples the path is evaluated through the local generator
//! `L_i = log(M_{i+1} M_i^{-1})`, so crossing refinement is deterministic and
//! independent of how the samples were produced (integrator, closed form, or
//! a CSV file).

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct SymplecticPath<T: Scalar> {
    times: Vec<T>,
    mats: Vec<DMatrix<T>>,
    logs: Vec<DMatrix<T>>,
}

impl<T: Scalar> SymplecticPath<T> {
    /// Builds a path from samples; `times` must be strictly increasing from 0
    /// and `mats[0]` must be the identity.
    pub fn new(times: Vec<T>, mats: Vec<DMatrix<T>>) -> Result<Self> {
        if times.len() != mats.len() || times.len() < 2 {
            return Err(Error::Config(
                "symplectic path needs matching times/matrices with at least two samples".into(),
            ));
        }
        if times[0] != T::zero() {
            return Err(Error::Config("symplectic path must start at t = 0".into()));
        }
        let dim = mats[0].nrows();
        if dim % 2 != 0 || mats.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::Config("path matrices must be square of even size".into()));
        }
        let id_defect = (&mats[0] - DMatrix::<T>::identity(dim, dim)).amax();
        if id_defect > T::of(1e-9) {
            return Err(Error::Config(format!(
                "path must start at the identity (defect {:.3e})",
                id_defect.to64()
            )));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config("path times must be strictly increasing".into()));
            }
        }
        let mut logs = Vec::with_capacity(mats.len() - 1);
        for i in 0..mats.len() - 1 {
            let inv = mats[i].clone().try_inverse().ok_or_else(|| Error::NotSymplectic {
                defect: f64::INFINITY,
                tol: 0.0,
            })?;
            let trans = &mats[i + 1] * inv;
            let l = linalg::logm_near_identity(&trans)?;
            logs.push(linalg::project_sp(&l));
        }
        Ok(SymplecticPath { times, mats, logs })
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn dim_half(&self) -> usize {
        self.dim() / 2
    }

    pub fn duration(&self) -> T {
        *self.times.last().unwrap()
    }

    pub fn sample_count(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn matrices(&self) -> &[DMatrix<T>] {
        &self.mats
    }

    pub fn endpoint(&self) -> &DMatrix<T> {
        self.mats.last().unwrap()
    }

    /// Max-abs symplecticity defect over all samples.
    pub fn max_symplectic_defect(&self) -> T {
        self.mats
            .iter()
            .map(linalg::symplectic_defect)
            .fold(T::zero(), |acc, d| acc.max(d))
    }

    fn interval_of(&self, t: T) -> usize {
        match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.min(self.times.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.times.len() - 2),
        }
    }

    /// Path value at an arbitrary `t` in `[0, T]`.
    pub fn eval(&self, t: T) -> DMatrix<T> {
        let i = self.interval_of(t);
        let dt = self.times[i + 1] - self.times[i];
        let theta = (t - self.times[i]) / dt;
        if theta == T::zero() {
            return self.mats[i].clone();
        }
        if theta == T::one() {
            return self.mats[i + 1].clone();
        }
        linalg::expm(&(&self.logs[i] * theta)) * &self.mats[i]
    }

    /// Symmetric coefficient `A(t)` of `gamma' = J A gamma`, piecewise
    /// constant per interval (finite-difference generator).
    pub fn coefficient(&self, t: T) -> DMatrix<T> {
        let i = self.interval_of(t);
        let dt = self.times[i + 1] - self.times[i];
        linalg::generator_from_sp(&(&self.logs[i] / dt))
    }

    /// Coefficient on the first interval, used for the initial crossing term.
    pub fn initial_coefficient(&self) -> DMatrix<T> {
        self.coefficient(T::zero())
    }

    /// Coefficient of the last interval, used at a degenerate endpoint.
    pub fn final_coefficient(&self) -> DMatrix<T> {
        let t = self.times[self.times.len() - 2];
        self.coefficient(t)
    }

    /// New path with midpoints inserted in every interval.
    pub fn refine_double(&self) -> Result<Self> {
        let mut times = Vec::with_capacity(2 * self.times.len() - 1);
        let mut mats = Vec::with_capacity(2 * self.times.len() - 1);
        for i in 0..self.times.len() - 1 {
            times.push(self.times[i]);
            mats.push(self.mats[i].clone());
            let mid = (self.times[i] + self.times[i + 1]) * T::of(0.5);
            times.push(mid);
            mats.push(self.eval(mid));
        }
        times.push(*self.times.last().unwrap());
        mats.push(self.mats.last().unwrap().clone());
        SymplecticPath::new(times, mats)
    }

    /// Extension to `m` periods of the underlying periodic system:
    /// `gamma(t + kT) = gamma(t) gamma(T)^k`.
    pub fn iterate(&self, m: u32) -> Result<Self> {
        assert!(m >= 1);
        let period = self.duration();
        let end = self.endpoint().clone();
        let mut power = DMatrix::<T>::identity(self.dim(), self.dim());
        let mut times = Vec::new();
        let mut mats = Vec::new();
        for k in 0..m {
            let offset = period * T::of(k as f64);
            let start = if k == 0 { 0 } else { 1 };
            for i in start..self.times.len() {
                times.push(self.times[i] + offset);
                mats.push(&self.mats[i] * &power);
            }
            power = &end * power;
        }
        SymplecticPath::new(times, mats)
    }

    /// Serializes as CSV rows `t, m11, m12, ..., m_{2n,2n}` (row-major).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (t, m) in self.times.iter().zip(self.mats.iter()) {
            let mut row = vec![format!("{:?}", t.to64())];
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    row.push(format!("{:?}", m[(i, j)].to64()));
                }
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the CSV form produced by [`SymplecticPath::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut mats = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("line {}: bad number: {}", lineno + 1, e)))
            };
            let t = parse(fields[0])?;
            let entries = fields.len() - 1;
            let dim = (entries as f64).sqrt().round() as usize;
            if dim * dim != entries || dim % 2 != 0 {
                return Err(Error::Config(format!(
                    "line {}: expected t plus a square even-dimension matrix, got {} entries",
                    lineno + 1,
                    entries
                )));
            }
            let mut m = DMatrix::<T>::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] = T::of(parse(fields[1 + i * dim + j])?);
                }
            }
            times.push(T::of(t));
            mats.push(m);
        }
        SymplecticPath::new(times, mats)
    }
}

/// Samples a closed-form path `t in [0, duration] -> Sp(2n)` on a uniform
/// grid. The closure receives scaled time in `[0, duration]`.
pub fn sample_path<T: Scalar>(
    duration: T,
    samples: usize,
    f: impl Fn(T) -> DMatrix<T>,
) -> Result<SymplecticPath<T>> {
    assert!(samples >= 2);
    let mut times = Vec::with_capacity(samples + 1);
    let mut mats = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let t = duration * T::of(i as f64 / samples as f64);
        times.push(t);
        mats.push(f(t));
    }
    SymplecticPath::new(times, mats)
}

/// Builds a block-diagonal matrix from 2x2 blocks.
pub fn block_diag<T: Scalar>(blocks: &[DMatrix<T>]) -> DMatrix<T> {
    let dim: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = DMatrix::zeros(dim, dim);
    let mut off = 0;
    for b in blocks {
        m.view_mut((off, off), (b.nrows(), b.ncols())).copy_from(b);
        off += b.nrows();
    }
    m
}

/// 2x2 rotation `R(theta)`.
pub fn rot2<T: Scalar>(theta: T) -> DMatrix<T> {
    DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

/// Closed-form 2x2 block families for synthetic paths, parameterized by
/// scaled time `s` (one unit per period).
pub mod blocks {
    use super::*;

    /// Pure rotation: `s -> R(rate * s)`.
    pub fn rotation<T: Scalar>(rate: T) -> impl Fn(T) -> DMatrix<T> {
        move |s| rot2(rate * s)
    }

    /// In-plane block of a planar orbit of a homogeneous Hamiltonian:
    /// `s -> R(2 pi s) * [[1, 0], [-(2 - alpha) 2 pi s, 1]]`, which reaches an
    /// `N_1(1,1)`-conjugate shear after each full period.
    pub fn unit_shear<T: Scalar>(alpha: T) -> impl Fn(T) -> DMatrix<T> {
        let tau = T::two_pi();
        move |s| {
            let shear = DMatrix::from_row_slice(
                2,
                2,
                &[T::one(), T::zero(), -(T::of(2.0) - alpha) * tau * s, T::one()],
            );
            rot2(tau * s) * shear
        }
    }

    /// Positive-hyperbolic stretch: `s -> diag(e^{a s}, e^{-a s})`.
    pub fn stretch<T: Scalar>(a: T) -> impl Fn(T) -> DMatrix<T> {
        move |s| {
            DMatrix::from_row_slice(
                2,
                2,
                &[(a * s).exp(), T::zero(), T::zero(), (-a * s).exp()],
            )
        }
    }

    /// Rotating stretch `s -> R(rate s) diag(e^{a s}, e^{-a s})`; with
    /// `rate = 2 pi` it reaches a positive-hyperbolic matrix each period
    /// while passing the unit circle twice per period.
    pub fn rot_stretch<T: Scalar>(rate: T, a: T) -> impl Fn(T) -> DMatrix<T> {
        move |s| rot2(rate * s) * stretch(a)(s)
    }
}

/// Random Hamiltonian paths `gamma(t) = exp(t J S_1) exp(t J S_2)` with
/// positive-definite `S_i`, so every crossing of the engine is regular and
/// positively oriented.
pub fn random_positive_path<T: Scalar, R: rand::Rng>(
    dim_half: usize,
    rng: &mut R,
    samples: usize,
) -> Result<SymplecticPath<T>> {
    let dim = 2 * dim_half;
    let j = linalg::structure_j::<T>(dim);
    let mut gens = Vec::new();
    for _ in 0..2 {
        let raw = DMatrix::<T>::from_fn(dim, dim, |_, _| T::of(rng.gen_range(-1.0..1.0)));
        let spd = &raw * raw.transpose() + DMatrix::<T>::identity(dim, dim) * T::of(0.4);
        gens.push(&j * spd * T::of(rng.gen_range(0.5..4.0)));
    }
    sample_path(T::one(), samples, move |t| {
        linalg::expm(&(&gens[0] * t)) * linalg::expm(&(&gens[1] * t))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampled_rotation_path_is_symplectic_and_interpolates() {
        let path = sample_path(1.0f64, 128, |t| rot2(std::f64::consts::TAU * 0.7 * t)).unwrap();
        assert!(path.max_symplectic_defect() < 1e-12);
        let t = 0.33137;
        let exact = rot2(std::f64::consts::TAU * 0.7 * t);
        assert!((path.eval(t) - exact).amax() < 1e-9);
        // Piecewise generator recovers A = theta' I for a rotation.
        let a = path.coefficient(t);
        let expected = DMatrix::<f64>::identity(2, 2) * (std::f64::consts::TAU * 0.7);
        assert!((a - expected).amax() < 1e-6);
    }

    #[test]
    fn iterate_matches_power_of_endpoint() {
        let path = sample_path(1.0f64, 64, blocks::unit_shear(1.8)).unwrap();
        let three = path.iterate(3).unwrap();
        let expected = path.endpoint() * path.endpoint() * path.endpoint();
        assert!((three.endpoint() - expected).amax() < 1e-9);
        assert!((three.duration() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn csv_roundtrip() {
        let path = sample_path(1.0f64, 16, blocks::rotation(1.25)).unwrap();
        let text = path.to_csv();
        let back = SymplecticPath::<f64>::from_csv(&text).unwrap();
        assert_eq!(back.sample_count(), path.sample_count());
        assert!((back.endpoint() - path.endpoint()).amax() < 1e-15);
    }

    #[test]
    fn csv_rejects_path_not_starting_at_identity() {
        let mut text = String::new();
        text.push_str("0.0,0.0,1.0,1.0,0.0\n");
        text.push_str("1.0,1.0,0.0,0.0,1.0\n");
        assert!(SymplecticPath::<f64>::from_csv(&text).is_err());
    }

    #[test]
    fn random_positive_paths_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let p = random_positive_path::<f64, _>(2, &mut rng, 256).unwrap();
            assert!(p.max_symplectic_defect() < 1e-8);
        }
    }
}
