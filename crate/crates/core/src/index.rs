//! Omega-Maslov-type indices and nullities of symplectic paths by signed
//! crossing counting.
//!
//! For a path `gamma` with `gamma(0) = I` and generator `A(t)` the engine
//! counts the times where `det(gamma(t) - omega I) = 0`, each weighted by the
//! signature of the Hermitian crossing form `v -> v^H A(t) v` on the
//! omega-kernel. For `omega = 1` the start contributes `sgn(A(0))/2`; a
//! degenerate endpoint contributes minus the negative inertia of the endpoint
//! form, which realizes the lower-semicontinuous convention (an endpoint
//! crossing counts only the part a small backward rotation would keep).
//! One-sided limits in `omega` recover splitting numbers.
//!
//! Candidate crossings are found from dips of the smallest singular value of
//! `gamma(t) - omega I`; the Lipschitz bound `|s(t) - s(t')| <= |gamma(t) -
//! gamma(t')|` makes the dip test safe on fine grids, and every candidate is
//! refined by golden-section search before it is accepted or discarded.
//! Anything ambiguous refines locally and then fails loudly.

use crate::error::{Error, Result};
use crate::linalg::{self, FormSignature};
use crate::path::SymplecticPath;
use crate::scalar::Scalar;
use nalgebra::{Complex, DMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;

/// The two real unit circle points the toolkit works at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealOmega {
    One,
    MinusOne,
}

impl RealOmega {
    pub fn value<T: Scalar>(&self) -> T {
        match self {
            RealOmega::One => T::one(),
            RealOmega::MinusOne => -T::one(),
        }
    }
    pub fn complex<T: Scalar>(&self) -> Complex<T> {
        Complex::new(self.value(), T::zero())
    }
}

/// Engine configuration; defaults match the documented thresholds and are
/// tuned for f64.
#[derive(Debug, Clone, Copy)]
pub struct IndexOptions<T: Scalar> {
    /// Singular values below this count towards an omega-kernel of an
    /// endpoint matrix (the declared degeneracy band).
    pub kernel_tol: T,
    /// A refined dip below this (relative to the matrix scale) is accepted
    /// as a crossing. Genuine crossings bottom out near machine precision,
    /// while the closest non-crossing floor is the Jordan near-miss
    /// `eps^2 / c` of the rotational regularization, around 2e-9.
    pub accept_tol: T,
    /// Refined dips between `accept_tol` and this are ambiguous and refine
    /// or fail loudly.
    pub suspicious_tol: T,
    /// Relative threshold under which a crossing-form eigenvalue is null.
    pub form_tol: T,
    /// Re-run on a doubled grid and require identical integers.
    pub verify_refinement: bool,
    /// Epsilon pair for one-sided rotational limits.
    pub eps_pair: (T, T),
    /// Local grid refinements to attempt before failing loudly.
    pub max_refine: u32,
}

impl<T: Scalar> Default for IndexOptions<T> {
    fn default() -> Self {
        IndexOptions {
            kernel_tol: T::of(1e-6),
            accept_tol: T::of(3e-11),
            suspicious_tol: T::of(3e-10),
            form_tol: T::of(1e-9),
            verify_refinement: false,
            eps_pair: (T::of(1e-4), T::of(5e-5)),
            max_refine: 3,
        }
    }
}

/// Evaluator over the periodic extension of a one-period path:
/// `gamma(t + kT) = gamma(t) gamma(T)^k`.
struct Extended<'a, T: Scalar> {
    base: &'a SymplecticPath<T>,
    powers: Vec<DMatrix<T>>,
    periods: u32,
}

impl<'a, T: Scalar> Extended<'a, T> {
    fn new(base: &'a SymplecticPath<T>, periods: u32) -> Self {
        let mut powers = Vec::with_capacity(periods as usize + 1);
        let dim = base.dim();
        powers.push(DMatrix::identity(dim, dim));
        for k in 0..periods as usize {
            powers.push(base.endpoint() * &powers[k]);
        }
        Extended {
            base,
            powers,
            periods,
        }
    }

    fn duration(&self) -> T {
        self.base.duration() * T::of(self.periods as f64)
    }

    fn split(&self, t: T) -> (usize, T) {
        let period = self.base.duration();
        let mut k = (t / period).to64().floor() as i64;
        k = k.clamp(0, self.periods as i64 - 1);
        let mut local = t - period * T::of(k as f64);
        if local > period {
            local = period;
        }
        if local < T::zero() {
            local = T::zero();
        }
        (k as usize, local)
    }

    fn eval(&self, t: T) -> DMatrix<T> {
        let (k, local) = self.split(t);
        self.base.eval(local) * &self.powers[k]
    }

    fn coefficient(&self, t: T) -> DMatrix<T> {
        let (_, local) = self.split(t);
        self.base.coefficient(local)
    }

    fn endpoint(&self) -> &DMatrix<T> {
        &self.powers[self.periods as usize]
    }

    /// All sample nodes plus interval midpoints across every period.
    fn nodes(&self) -> Vec<T> {
        let period = self.base.duration();
        let times = self.base.times();
        let mut out = Vec::new();
        for k in 0..self.periods {
            let offset = period * T::of(k as f64);
            for i in 0..times.len() - 1 {
                out.push(times[i] + offset);
                out.push((times[i] + times[i + 1]) * T::of(0.5) + offset);
            }
        }
        out.push(self.duration());
        out
    }
}

#[derive(Debug, Clone)]
struct Crossing<T: Scalar> {
    t: T,
    kernel_dim: usize,
    signature: i64,
}

fn sigma_min<T: Scalar>(m: &DMatrix<T>, omega: Complex<T>) -> T {
    let n = m.nrows();
    let mc = DMatrix::<Complex<T>>::from_fn(n, n, |i, j| {
        let mut z = Complex::new(m[(i, j)], T::zero());
        if i == j {
            z -= omega;
        }
        z
    });
    let svd = mc.svd(false, false);
    svd.singular_values
        .iter()
        .fold(T::of(f64::INFINITY), |acc, &s| acc.min(s))
}

/// Golden-section minimization of `s(t)` on `[lo, hi]`.
fn golden_min<T: Scalar>(mut lo: T, mut hi: T, s: &dyn Fn(T) -> T) -> (T, T) {
    let phi = T::of(0.618_033_988_749_894_9);
    let mut t1 = hi - (hi - lo) * phi;
    let mut t2 = lo + (hi - lo) * phi;
    let mut f1 = s(t1);
    let mut f2 = s(t2);
    for _ in 0..120 {
        if f1 <= f2 {
            hi = t2;
            t2 = t1;
            f2 = f1;
            t1 = hi - (hi - lo) * phi;
            f1 = s(t1);
        } else {
            lo = t1;
            t1 = t2;
            f1 = f2;
            t2 = lo + (hi - lo) * phi;
            f2 = s(t2);
        }
        if hi - lo <= (hi.abs() + T::one()) * T::of(1e-15) {
            break;
        }
    }
    if f1 <= f2 {
        (t1, f1)
    } else {
        (t2, f2)
    }
}

struct Scan<'a, T: Scalar> {
    ext: &'a Extended<'a, T>,
    omega: Complex<T>,
    opts: &'a IndexOptions<T>,
}

impl<'a, T: Scalar> Scan<'a, T> {
    fn sigma(&self, t: T) -> T {
        sigma_min(&self.ext.eval(t), self.omega)
    }

    fn crossing_at(&self, t: T, s_star: T) -> Result<Crossing<T>> {
        let gamma = self.ext.eval(t);
        // The kernel band must exclude Jordan near-miss directions, whose
        // smallest singular value floors around 1e-9; genuine kernel
        // directions sit at the located dip value.
        let scale = T::one() + gamma.amax();
        let ktol = (self.opts.accept_tol * scale * T::of(10.0)).max(s_star * T::of(4.0));
        let (kernel, _) = linalg::omega_kernel(&gamma, self.omega, ktol);
        if kernel.is_empty() {
            return Err(Error::UnresolvedCrossing {
                lo: t.to64(),
                hi: t.to64(),
            });
        }
        let a = self.ext.coefficient(t);
        let sig = linalg::restricted_form_signature(&a, &kernel, self.opts.form_tol);
        if sig.is_degenerate() {
            return Err(Error::UnresolvedCrossing {
                lo: t.to64(),
                hi: t.to64(),
            });
        }
        Ok(Crossing {
            t,
            kernel_dim: kernel.len(),
            signature: sig.signature(),
        })
    }

    /// Zeros of `sigma` in `[lo, hi]` by recursive Lipschitz bisection.
    ///
    /// Singular values are 1-Lipschitz in the matrix, so a sub-interval whose
    /// endpoint values both exceed `kappa |M(b) - M(a)|` cannot contain a
    /// zero; surviving zones shrink geometrically until golden-section search
    /// resolves them. A Jordan near-miss plateau dies out as soon as the
    /// local matrix variation drops below the plateau height, so the
    /// recursion terminates without counting it.
    fn zeros_in_window(&self, lo: T, hi: T, depth: u32, out: &mut Vec<Crossing<T>>) -> Result<()> {
        if depth > 64 {
            return Err(Error::UnresolvedCrossing {
                lo: lo.to64(),
                hi: hi.to64(),
            });
        }
        let width = hi - lo;
        let atomic = self.ext.duration() * T::of(1e-11);
        if width <= atomic {
            return self.resolve_atomic(lo, hi, out);
        }
        let parts = 12usize;
        let mut ts = Vec::with_capacity(parts + 1);
        let mut ms = Vec::with_capacity(parts + 1);
        let mut ss = Vec::with_capacity(parts + 1);
        for i in 0..=parts {
            let t = lo + width * T::of(i as f64 / parts as f64);
            let m = self.ext.eval(t);
            ss.push(sigma_min(&m, self.omega));
            ts.push(t);
            ms.push(m);
        }
        let kappa = T::of(1.4);
        let mut zone: Option<(usize, usize)> = None;
        let mut zones: Vec<(usize, usize)> = Vec::new();
        for i in 0..parts {
            let gap = (&ms[i + 1] - &ms[i]).norm();
            let feasible = ss[i].min(ss[i + 1]) <= kappa * gap;
            if feasible {
                zone = Some(match zone {
                    None => (i, i + 1),
                    Some((a, _)) => (a, i + 1),
                });
            } else if let Some(z) = zone.take() {
                zones.push(z);
            }
        }
        if let Some(z) = zone.take() {
            zones.push(z);
        }
        for (a, b) in zones {
            if b - a >= 4 {
                // Wide zone (tangential zeros flatten sigma); force
                // geometric progress by halving.
                let mid = (ts[a] + ts[b]) * T::of(0.5);
                self.zeros_in_window(ts[a], mid, depth + 1, out)?;
                self.zeros_in_window(mid, ts[b], depth + 1, out)?;
            } else {
                self.zeros_in_window(ts[a], ts[b], depth + 1, out)?;
            }
        }
        Ok(())
    }

    /// Final resolution of a window too small to subdivide further.
    ///
    /// A zero can sit on the boundary between two atomic windows, in which
    /// case both locate it and the caller's merge pass deduplicates; dips
    /// above the acceptance band are the tails of neighboring zeros or
    /// Jordan near-misses and are skipped. Ambiguity at this scale is the
    /// grid-refinement check's job.
    fn resolve_atomic(&self, lo: T, hi: T, out: &mut Vec<Crossing<T>>) -> Result<()> {
        let (t_star, s_star) = golden_min(lo, hi, &|t| self.sigma(t));
        let scale = T::one() + self.ext.eval(t_star).amax();
        if s_star <= self.opts.accept_tol * scale {
            out.push(self.crossing_at(t_star, s_star)?);
        }
        Ok(())
    }

    /// All interior crossings on `(t_start, T_total)`, endpoint excluded.
    ///
    /// For real omega a margin of `1e-9 T` before the endpoint belongs to
    /// the endpoint convention, not the interior scan; otherwise a
    /// degenerate endpoint zero would be chased into floating-point noise.
    /// Rotated omegas keep the full range: their crossings approach the
    /// endpoint as closely as `eps^2` through the Jordan square-root branch.
    fn interior_crossings(&self, skip_initial_clearance: bool) -> Result<Vec<Crossing<T>>> {
        let total = self.ext.duration();
        let real_omega = self.omega.im == T::zero();
        let t_max = if real_omega {
            total * (T::one() - T::of(1e-9))
        } else {
            total
        };
        let nodes: Vec<T> = self
            .ext
            .nodes()
            .into_iter()
            .map(|t| t.min(t_max))
            .collect();
        // Dedup radius for repeated finds of one zero from adjacent atomic
        // windows, and the crop distance separating interior crossings from
        // the endpoint. Rotated omegas need a tight crop: their crossings can
        // sit 1e-10 T from the endpoint.
        let merge = total * T::of(1e-10);
        let crop = total * T::of(if real_omega { 1e-10 } else { 2e-11 });

        // For omega = 1 the path starts on the singular set; walk out of the
        // initial degeneracy and require sigma to grow while doing so.
        let mut start_idx = 0usize;
        if skip_initial_clearance {
            let clear = (self.opts.kernel_tol * T::of(20.0)).max(T::of(1e-4));
            let mut prev_t = T::zero();
            let mut prev_s = T::zero();
            let mut cleared = None;
            for (i, &t) in nodes.iter().enumerate() {
                let s = self.sigma(t);
                if s >= clear {
                    cleared = Some(i);
                    break;
                }
                if i > 0 && s < prev_s * T::of(0.5) {
                    return Err(Error::UnresolvedCrossing {
                        lo: prev_t.to64(),
                        hi: t.to64(),
                    });
                }
                prev_t = t;
                prev_s = s;
            }
            start_idx = cleared.ok_or(Error::UnresolvedCrossing {
                lo: 0.0,
                hi: total.to64(),
            })?;
        }

        let mut crossings: Vec<Crossing<T>> = Vec::new();
        let mut prev_m = self.ext.eval(nodes[start_idx]);
        let mut prev_s = sigma_min(&prev_m, self.omega);
        let mut prev_node = nodes[start_idx];
        let mut window: Option<(T, T)> = None;
        for &t in nodes.iter().skip(start_idx + 1) {
            let m = self.ext.eval(t);
            let s = sigma_min(&m, self.omega);
            let gap = (&m - &prev_m).norm();
            let thr = gap * T::of(1.5) + self.opts.kernel_tol * T::of(10.0);
            let candidate = prev_s.min(s) <= thr;
            if candidate {
                window = Some(match window {
                    None => (prev_node, t),
                    Some((lo, _)) => (lo, t),
                });
            } else if let Some((lo, hi)) = window.take() {
                self.zeros_in_window(lo, hi, 0, &mut crossings)?;
            }
            prev_node = t;
            prev_m = m;
            prev_s = s;
        }
        if let Some((lo, hi)) = window.take() {
            self.zeros_in_window(lo, hi, 0, &mut crossings)?;
        }

        // Sort, merge duplicates found from overlapping windows, and drop the
        // endpoint zero (handled by the caller's endpoint convention).
        crossings.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
        let mut merged: Vec<Crossing<T>> = Vec::new();
        for c in crossings {
            if let Some(last) = merged.last() {
                if c.t - last.t <= merge {
                    continue;
                }
            }
            merged.push(c);
        }
        merged.retain(|c| c.t < total - crop && c.t > total * T::of(1e-14));
        Ok(merged)
    }
}

/// dim ker(M - omega I) for omega = +-1.
pub fn omega_nullity<T: Scalar>(
    m: &DMatrix<T>,
    omega: RealOmega,
    opts: &IndexOptions<T>,
) -> Result<usize> {
    linalg::require_symplectic(m, T::of(1e-6))?;
    Ok(linalg::real_omega_nullity(
        m,
        omega.value(),
        opts.kernel_tol,
    ))
}

fn initial_term<T: Scalar>(path: &SymplecticPath<T>, opts: &IndexOptions<T>) -> Result<i64> {
    let a0 = path.initial_coefficient();
    let sig = linalg::full_form_signature(&a0, opts.form_tol);
    if sig.is_degenerate() {
        return Err(Error::AmbiguousCase {
            reason: "degenerate initial coefficient A(0); the t = 0 contribution is undefined"
                .into(),
        });
    }
    debug_assert!(sig.signature() % 2 == 0);
    Ok(sig.signature() / 2)
}

fn endpoint_term<T: Scalar>(
    end: &DMatrix<T>,
    final_coeff: &DMatrix<T>,
    omega: Complex<T>,
    opts: &IndexOptions<T>,
) -> Result<(i64, usize)> {
    let (kernel, _) = linalg::omega_kernel(end, omega, opts.kernel_tol);
    if kernel.is_empty() {
        return Ok((0, 0));
    }
    let sig = linalg::restricted_form_signature(final_coeff, &kernel, opts.form_tol);
    if sig.is_degenerate() {
        return Err(Error::UnresolvedCrossing {
            lo: f64::NAN,
            hi: f64::NAN,
        });
    }
    Ok((-(sig.negative as i64), kernel.len()))
}

fn omega_index_extended<T: Scalar>(
    base: &SymplecticPath<T>,
    periods: u32,
    omega: RealOmega,
    opts: &IndexOptions<T>,
) -> Result<i64> {
    let ext = Extended::new(base, periods);
    let scan = Scan {
        ext: &ext,
        omega: omega.complex(),
        opts,
    };
    let crossings = scan.interior_crossings(omega == RealOmega::One)?;
    let mut total: i64 = crossings.iter().map(|c| c.signature).sum();
    if omega == RealOmega::One {
        total += initial_term(base, opts)?;
    }
    let (end_term, _) = endpoint_term(ext.endpoint(), &base.final_coefficient(), omega.complex(), opts)?;
    total += end_term;
    Ok(total)
}

fn with_refinement_ladder<T: Scalar, F>(
    base: &SymplecticPath<T>,
    opts: &IndexOptions<T>,
    f: F,
) -> Result<i64>
where
    F: Fn(&SymplecticPath<T>) -> Result<i64>,
{
    let mut current = base.clone();
    let mut last_err = None;
    for _ in 0..=opts.max_refine {
        match f(&current) {
            Ok(v) => {
                if opts.verify_refinement {
                    let refined = current.refine_double()?;
                    let v2 = f(&refined)?;
                    if v2 != v {
                        return Err(Error::NonIntegerStability {
                            coarse: v,
                            fine: v2,
                        });
                    }
                }
                return Ok(v);
            }
            Err(e @ Error::UnresolvedCrossing { .. }) => {
                last_err = Some(e);
                current = current.refine_double()?;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

/// Maslov-type omega-index `i_omega(gamma)` of a path, by crossing counting.
pub fn omega_index<T: Scalar>(
    path: &SymplecticPath<T>,
    omega: RealOmega,
    opts: &IndexOptions<T>,
) -> Result<i64> {
    with_refinement_ladder(path, opts, |p| omega_index_extended(p, 1, omega, opts))
}

/// Index of the `m`-period extension of a one-period path.
pub fn omega_index_iterated<T: Scalar>(
    path: &SymplecticPath<T>,
    periods: u32,
    omega: RealOmega,
    opts: &IndexOptions<T>,
) -> Result<i64> {
    with_refinement_ladder(path, opts, |p| omega_index_extended(p, periods, omega, opts))
}

/// Crossing-count index at a non-real unit `omega`; no initial or endpoint
/// terms apply. Used for one-sided rotational limits.
pub fn omega_index_unit<T: Scalar>(
    path: &SymplecticPath<T>,
    periods: u32,
    omega: Complex<T>,
    opts: &IndexOptions<T>,
) -> Result<i64> {
    let run = |p: &SymplecticPath<T>| -> Result<i64> {
        let ext = Extended::new(p, periods);
        // The rotated omega must stay clear of the endpoint spectrum, or the
        // one-sided limit is not well posed at this epsilon.
        let closest = linalg::complex_eigenvalues(ext.endpoint())
            .iter()
            .map(|l| linalg::cmod(&(l - omega)))
            .fold(T::of(f64::INFINITY), |a, b| a.min(b));
        if closest < T::of(1e-7) {
            return Err(Error::LimitUnstable { first: 0, second: 0 });
        }
        let scan = Scan {
            ext: &ext,
            omega,
            opts,
        };
        let crossings = scan.interior_crossings(false)?;
        Ok(crossings.iter().map(|c| c.signature).sum())
    };
    with_refinement_ladder(path, opts, run)
}

/// One entry of a per-iterate index table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterateEntry {
    pub m: u32,
    /// Maslov-type index of the m-period path.
    pub index_maslov: i64,
    /// Nullity of the m-th power of the monodromy.
    pub nullity: usize,
}

impl IterateEntry {
    /// Morse-theoretic normalization `i(y^m) = i(y, m) - n`.
    pub fn index_morse(&self, dim_half: usize) -> i64 {
        self.index_maslov - dim_half as i64
    }
}

/// Per-iterate table `(m, i(y,m), nu(y,m))` for `m <= m_max`, computed from a
/// single crossing scan over the `m_max`-period extension.
pub fn iterate_index_table<T: Scalar>(
    path: &SymplecticPath<T>,
    omega: RealOmega,
    m_max: u32,
    opts: &IndexOptions<T>,
) -> Result<Vec<IterateEntry>> {
    let run = |p: &SymplecticPath<T>| -> Result<Vec<IterateEntry>> {
        let ext = Extended::new(p, m_max);
        let scan = Scan {
            ext: &ext,
            omega: omega.complex(),
            opts,
        };
        let crossings = scan.interior_crossings(omega == RealOmega::One)?;
        let init = if omega == RealOmega::One {
            initial_term(p, opts)?
        } else {
            0
        };
        let period = p.duration();
        let merge = ext.duration() * T::of(1e-10);
        let final_coeff = p.final_coefficient();
        let mut out = Vec::with_capacity(m_max as usize);
        for m in 1..=m_max {
            let horizon = period * T::of(m as f64);
            let interior: i64 = crossings
                .iter()
                .filter(|c| c.t < horizon - merge)
                .map(|c| c.signature)
                .sum();
            let end = &ext.powers[m as usize];
            let (end_term, nullity) = endpoint_term(end, &final_coeff, omega.complex(), opts)?;
            out.push(IterateEntry {
                m,
                index_maslov: init + interior + end_term,
                nullity,
            });
        }
        Ok(out)
    };
    // Refinement ladder over the base path.
    let mut current = path.clone();
    let mut last_err = None;
    for _ in 0..=opts.max_refine {
        match run(&current) {
            Ok(v) => {
                if opts.verify_refinement {
                    let refined = current.refine_double()?;
                    let v2 = run(&refined)?;
                    if v2 != v {
                        return Err(Error::NonIntegerStability {
                            coarse: v.last().unwrap().index_maslov,
                            fine: v2.last().unwrap().index_maslov,
                        });
                    }
                }
                return Ok(v);
            }
            Err(e @ Error::UnresolvedCrossing { .. }) => {
                last_err = Some(e);
                current = current.refine_double()?;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

/// Morse-index translation `i(y^m) = i(y, m) - n`; the nullity is unchanged.
pub fn morse_translate(index_maslov: i64, nullity: usize, dim_half: usize) -> (i64, usize) {
    (index_maslov - dim_half as i64, nullity)
}

/// Symmetric-orbit index: `(i_{-1}, nu_{-1})` of the half-period path.
///
/// Callers must ensure the path really is the half path of a symmetric orbit;
/// the nullity always lands in `[1, 2n-1]` for genuine orbits, so values
/// outside that band are reported alongside the result.
pub fn symmetric_index<T: Scalar>(
    half_path: &SymplecticPath<T>,
    opts: &IndexOptions<T>,
) -> Result<(i64, usize)> {
    let i = omega_index(half_path, RealOmega::MinusOne, opts)?;
    let nu = linalg::real_omega_nullity(
        half_path.endpoint(),
        -T::one(),
        opts.kernel_tol,
    );
    Ok((i, nu))
}

/// Bott consistency record: `i(gamma^2-path) = i(gamma) + i_{-1}(gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BottRecord {
    pub two_period: i64,
    pub one_period: i64,
    pub minus_one: i64,
}

impl BottRecord {
    pub fn holds(&self) -> bool {
        self.two_period == self.one_period + self.minus_one
    }
}

/// Evaluates both sides of the Bott-type doubling formula on a one-period
/// closed-orbit path.
pub fn bott_check<T: Scalar>(
    path: &SymplecticPath<T>,
    opts: &IndexOptions<T>,
) -> Result<BottRecord> {
    let two_period = omega_index_iterated(path, 2, RealOmega::One, opts)?;
    let one_period = omega_index(path, RealOmega::One, opts)?;
    let minus_one = omega_index(path, RealOmega::MinusOne, opts)?;
    Ok(BottRecord {
        two_period,
        one_period,
        minus_one,
    })
}

/// Splitting numbers `S^{+-}_{gamma(T)}(omega)` via one-sided rotational
/// limits, evaluated at two epsilon values that must agree.
pub fn splitting_number<T: Scalar>(
    path: &SymplecticPath<T>,
    omega: RealOmega,
    opts: &IndexOptions<T>,
) -> Result<(i64, i64)> {
    let nu = linalg::real_omega_nullity(path.endpoint(), omega.value(), opts.kernel_tol);
    if nu == 0 {
        return Ok((0, 0));
    }
    let base = omega_index(path, omega, opts)?;
    let one_side = |sign: T| -> Result<i64> {
        let mut values = Vec::new();
        for &eps in [opts.eps_pair.0, opts.eps_pair.1].iter() {
            let angle = sign * eps;
            let w = Complex::new(angle.cos(), angle.sin()) * omega.value::<T>();
            values.push(omega_index_unit(path, 1, w, opts)?);
        }
        if values[0] != values[1] {
            return Err(Error::LimitUnstable {
                first: values[0],
                second: values[1],
            });
        }
        Ok(values[0])
    };
    let plus = one_side(T::one())? - base;
    let minus = one_side(-T::one())? - base;
    // 0 <= S^{+-} <= nu holds one side at a time; the sum may reach 2 nu
    // (the forced N1(1,1) block has S^+ = S^- = nu = 1).
    if plus < 0 || minus < 0 || plus as usize > nu || minus as usize > nu {
        return Err(Error::LimitUnstable {
            first: plus,
            second: minus,
        });
    }
    Ok((plus, minus))
}

/// Index record of one orbit: periodic and antiperiodic indices, the
/// per-iterate table in Morse normalization, and the mean-index bracket.
#[derive(Debug, Clone)]
pub struct IndexRecord {
    pub dim_half: usize,
    /// Maslov-type index `i(y, 1)` of the one-period path.
    pub i1: i64,
    pub nu1: usize,
    /// `i_{-1}` of the half-period path, for symmetric orbits.
    pub i_minus_one: Option<i64>,
    pub nu_minus_one: Option<usize>,
    /// `(m, i(y^m), nu(y^m))` in Morse normalization.
    pub iterates: Vec<(u32, i64, usize)>,
    /// Rigorous rational bracket for the mean index.
    pub mean_bracket: (BigRational, BigRational),
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Intersection of the bound `|i(y^m) - m ihat| <= 2n` over all tabulated
/// iterates, as an exact rational interval.
pub fn mean_index_bracket(table: &[(u32, i64)], dim_half: usize) -> Result<(BigRational, BigRational)> {
    assert!(!table.is_empty());
    let two_n = 2 * dim_half as i64;
    let mut lo = rational(i64::MIN / 4, 1);
    let mut hi = rational(i64::MAX / 4, 1);
    for &(m, i_m) in table {
        let m_i = m as i64;
        let cand_lo = rational(i_m - two_n, m_i);
        let cand_hi = rational(i_m + two_n, m_i);
        if cand_lo > lo {
            lo = cand_lo;
        }
        if cand_hi < hi {
            hi = cand_hi;
        }
        if lo > hi {
            return Err(Error::EmptyIntersection { m });
        }
    }
    Ok((lo, hi))
}

/// Mean index of the symmetric problem: half of the periodic mean.
pub fn symmetric_mean_bracket(bracket: &(BigRational, BigRational)) -> (BigRational, BigRational) {
    let two = BigRational::from_integer(BigInt::from(2));
    (&bracket.0 / &two, &bracket.1 / &two)
}

/// Exact symmetric mean index from a known periodic mean index.
pub fn symmetric_mean_exact(ihat: &BigRational) -> BigRational {
    ihat / BigRational::from_integer(BigInt::from(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{blocks, block_diag, sample_path, SymplecticPath};
    use nalgebra::DMatrix;

    fn opts() -> IndexOptions<f64> {
        IndexOptions::default()
    }

    fn rot_pair_path(nu1: f64, nu2: f64, samples: usize) -> SymplecticPath<f64> {
        sample_path(1.0, samples, |t| {
            block_diag(&[
                blocks::rotation(std::f64::consts::TAU * nu1)(t),
                blocks::rotation(std::f64::consts::TAU * nu2)(t),
            ])
        })
        .unwrap()
    }

    #[test]
    fn nullity_examples() {
        let o = opts();
        let id = DMatrix::<f64>::identity(4, 4);
        assert_eq!(omega_nullity(&id, RealOmega::One, &o).unwrap(), 4);
        let rpi = block_diag(&[
            blocks::rotation(std::f64::consts::PI)(1.0),
            blocks::rotation(std::f64::consts::PI)(1.0),
        ]);
        assert_eq!(omega_nullity(&rpi, RealOmega::MinusOne, &o).unwrap(), 4);
        let n1_hyp = block_diag(&[
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]),
        ]);
        assert_eq!(omega_nullity(&n1_hyp, RealOmega::MinusOne, &o).unwrap(), 0);
        let skew = DMatrix::<f64>::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert!(omega_nullity(&skew, RealOmega::One, &o).is_err());
    }

    #[test]
    fn rotation_path_indices() {
        let o = opts();
        // One block rotating by 0.7 turns, one by 0.3: i_1 = 1 + 1 = 2.
        let p = rot_pair_path(0.7, 0.3, 256);
        assert_eq!(omega_index(&p, RealOmega::One, &o).unwrap(), 2);
        // Crossing of -1 happens for the 0.7-turn block only.
        assert_eq!(omega_index(&p, RealOmega::MinusOne, &o).unwrap(), 2);
    }

    #[test]
    fn full_turn_rotation_is_lower_semicontinuous() {
        let o = opts();
        let p = sample_path(1.0, 256, blocks::rotation(std::f64::consts::TAU)).unwrap();
        // Endpoint is the identity; the degenerate crossing does not count.
        assert_eq!(omega_index(&p, RealOmega::One, &o).unwrap(), 1);
        let m = sample_path(1.0, 256, blocks::rotation(-std::f64::consts::TAU)).unwrap();
        assert_eq!(omega_index(&m, RealOmega::One, &o).unwrap(), -3);
    }

    #[test]
    fn hyperbolic_path_has_zero_index() {
        let o = opts();
        let p = sample_path(1.0, 64, blocks::stretch(0.8)).unwrap();
        assert_eq!(omega_index(&p, RealOmega::One, &o).unwrap(), 0);
        assert_eq!(omega_index(&p, RealOmega::MinusOne, &o).unwrap(), 0);
    }

    #[test]
    fn unit_shear_block_matches_closed_form_counts() {
        // The planar orbit block has i(m periods) = 2m - 1.
        let o = opts();
        let p = sample_path(1.0, 256, blocks::unit_shear(1.8)).unwrap();
        for m in 1..=4u32 {
            let i = omega_index_iterated(&p, m, RealOmega::One, &o).unwrap();
            assert_eq!(i, 2 * m as i64 - 1, "m = {}", m);
        }
    }

    #[test]
    fn bott_formula_on_rotation_paths() {
        let o = opts();
        let p = rot_pair_path(0.7, 0.3, 256);
        let record = bott_check(&p, &o).unwrap();
        assert!(record.holds(), "{:?}", record);
        // Degenerate at -1: half-turn block.
        let q = rot_pair_path(0.5, 0.25, 256);
        let record = bott_check(&q, &o).unwrap();
        assert!(record.holds(), "{:?}", record);
    }

    #[test]
    fn splitting_numbers_of_unit_shear_rotation_endpoint() {
        // Endpoint N1(1,1)-conjugate + R(theta): S+ = S- = 1 at omega = 1.
        let o = opts();
        let p = sample_path(1.0, 256, |t| {
            block_diag(&[
                blocks::unit_shear(1.8)(t),
                blocks::rotation(std::f64::consts::TAU * 0.3)(t),
            ])
        })
        .unwrap();
        let (sp, sm) = splitting_number(&p, RealOmega::One, &o).unwrap();
        assert_eq!((sp, sm), (1, 1));
    }

    #[test]
    fn splitting_numbers_zero_without_kernel() {
        let o = opts();
        let p = rot_pair_path(0.7, 0.3, 128);
        assert_eq!(splitting_number(&p, RealOmega::One, &o).unwrap(), (0, 0));
    }

    #[test]
    fn morse_translate_examples() {
        assert_eq!(morse_translate(2, 1, 2), (0, 1));
        // Hyperbolic orbit of the Sp(4) analysis: i(y,1) = 1 gives i(y) = -1.
        assert_eq!(morse_translate(1, 1, 2), (-1, 1));
        assert_eq!(morse_translate(5, 3, 2).1, 3);
    }

    #[test]
    fn mean_bracket_examples() {
        // Hyperbolic iterates i(y^m) = m(i+3) - 3 with i = -1 collapse on 2.
        let table: Vec<(u32, i64)> = (1..=32).map(|m| (m, 2 * m as i64 - 3)).collect();
        let (lo, hi) = mean_index_bracket(&table, 2).unwrap();
        let two = BigRational::from_integer(BigInt::from(2));
        assert!(lo <= two && two <= hi);
        let width = &hi - &lo;
        assert!(width <= rational(8, 32));
        let halved = symmetric_mean_bracket(&(lo, hi));
        assert!(halved.0 <= BigRational::from_integer(BigInt::from(1)));
    }

    #[test]
    fn mean_bracket_rejects_inconsistent_tables() {
        let table = vec![(1u32, 0i64), (16u32, 200i64)];
        assert!(matches!(
            mean_index_bracket(&table, 2),
            Err(Error::EmptyIntersection { .. })
        ));
    }

    #[test]
    fn symmetric_mean_halves_exactly() {
        let ihat = rational(3, 1);
        assert_eq!(symmetric_mean_exact(&ihat), rational(3, 2));
        let b = (rational(29, 10), rational(31, 10));
        let h = symmetric_mean_bracket(&b);
        assert_eq!(h, (rational(29, 20), rational(31, 20)));
    }

    #[test]
    fn refinement_does_not_change_integers() {
        let mut o = opts();
        o.verify_refinement = true;
        let p = rot_pair_path(0.7, 0.3, 128);
        assert_eq!(omega_index(&p, RealOmega::One, &o).unwrap(), 2);
    }

    #[test]
    fn paper_subcase_hyperbolic_half_path() {
        // Half path of the hyperbolic symmetric orbit: in-plane block reaches
        // a negative shear at t = 1/2, transverse block is a pure stretch.
        // i(psi) = 1, i(psi^2) = 1, so ibar = i_{-1}(psi) = 0.
        let o = opts();
        let full = sample_path(1.0, 512, |t| {
            block_diag(&[blocks::unit_shear(1.8)(t), blocks::stretch(0.9)(t)])
        })
        .unwrap();
        let half = sample_path(0.5, 256, |t| {
            block_diag(&[blocks::unit_shear(1.8)(t), blocks::stretch(0.9)(t)])
        })
        .unwrap();
        let i_psi = omega_index(&half, RealOmega::One, &o).unwrap();
        assert_eq!(i_psi, 1);
        let i_full = omega_index(&full, RealOmega::One, &o).unwrap();
        assert_eq!(i_full, 1);
        let (ibar, nubar) = symmetric_index(&half, &o).unwrap();
        assert_eq!(ibar, 0);
        assert_eq!(nubar, 1);
        // Bott split of the full period into half-period data.
        let im1_half = omega_index(&half, RealOmega::MinusOne, &o).unwrap();
        assert_eq!(i_full, i_psi + im1_half);
    }
}
