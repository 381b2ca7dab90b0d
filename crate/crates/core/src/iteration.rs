//! Exact-arithmetic index iteration: Sp(4) normal-form recognition, the
//! closed-form iterate sequences of the four monodromy cases plus the
//! hyperbolic one, symmetric (odd-iterate) tables, and the brute-force
//! common-index-jump search.
//!
//! All sequence evaluation runs in arbitrary-precision rationals; rotation
//! angles that are rational multiples of pi are kept as reduced fractions.

use crate::error::{Error, Result};
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(big(n), big(d))
}

/// Rotation angle, tracked exactly when it is a rational multiple of pi.
#[derive(Debug, Clone, PartialEq)]
pub enum Theta {
    /// `theta = pi * num / den`, reduced, with `0 < num/den < 2`.
    RationalPi { num: i64, den: i64 },
    /// Angle in radians, `0 < theta < 2 pi`, not recognizably rational.
    Irrational(f64),
}

impl Theta {
    pub fn radians(&self) -> f64 {
        match self {
            Theta::RationalPi { num, den } => std::f64::consts::PI * *num as f64 / *den as f64,
            Theta::Irrational(t) => *t,
        }
    }

    /// `theta / pi` as an exact rational when available.
    pub fn over_pi_exact(&self) -> Option<BigRational> {
        match self {
            Theta::RationalPi { num, den } => Some(rat(*num, *den)),
            Theta::Irrational(_) => None,
        }
    }

    /// Minimal `K` with `K theta` a multiple of `2 pi`; `None` for
    /// irrational angles (degenerate iterates never occur).
    pub fn lattice_period(&self) -> Option<u32> {
        match self {
            Theta::RationalPi { num, den } => {
                // K * num / den in 2Z, gcd(num, den) = 1.
                let k = if num % 2 == 0 { *den } else { 2 * den };
                Some(k as u32)
            }
            Theta::Irrational(_) => None,
        }
    }

    /// Exact ceiling `E(m theta / 2 pi)`.
    fn e_of_iterate(&self, m: u32) -> i64 {
        match self {
            Theta::RationalPi { num, den } => {
                let x = rat(m as i64 * num, 2 * den);
                ceil_rational(&x)
            }
            Theta::Irrational(t) => {
                let x = m as f64 * t / std::f64::consts::TAU;
                // Irrational angles must stay clear of the integer lattice for
                // the float ceiling to be trustworthy.
                debug_assert!((x - x.round()).abs() > 1e-12);
                x.ceil() as i64
            }
        }
    }
}

fn ceil_rational(x: &BigRational) -> i64 {
    let c = x.ceil();
    let (num, den) = (c.numer().clone(), c.denom().clone());
    let v: BigInt = num / den;
    i64::try_from(&v).expect("iterate index fits in i64")
}

/// Detects a rational multiple of pi by continued fractions.
pub fn detect_rational_angle(theta: f64, max_den: i64, tol: f64) -> Theta {
    let x = theta / std::f64::consts::PI;
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, x.floor() as i64, 1i64);
    let mut frac = x - x.floor();
    for _ in 0..40 {
        let approx = p1 as f64 / q1 as f64;
        if (x - approx).abs() < tol && q1 <= max_den {
            let g = gcd(p1.abs().max(1), q1);
            return Theta::RationalPi {
                num: p1 / g,
                den: q1 / g,
            };
        }
        if frac.abs() < 1e-15 {
            break;
        }
        let a = (1.0 / frac).floor();
        frac = 1.0 / frac - a;
        let a = a as i64;
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        if q1 > max_den {
            break;
        }
    }
    Theta::Irrational(theta)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Conjugacy classes of 2x2 symplectic blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockClass {
    /// `N_1(1, b)` with `b` in `{-1, 0, 1}`; `b = 0` is the identity.
    ParabolicUnit { b: i8 },
    /// `N_1(-1, b)` with `b` in `{-1, 0, 1}`; `b = 0` is minus the identity.
    ParabolicNegative { b: i8 },
    /// Rotation `R(theta)`, `theta` in `(0, pi) U (pi, 2 pi)` up to the bands.
    Rotation { theta: Theta },
    /// `diag(lambda, 1/lambda)`-conjugate with `|lambda| > 1`.
    Hyperbolic { negative: bool, lambda: f64 },
}

impl BlockClass {
    /// Maslov-normalization iteration correction `c(m)`; the block index is
    /// `i_b(m) = m (i_b(1) - c(1)) + c(m)`.
    fn correction(&self, m: u32) -> i64 {
        let parity = (1 + if m % 2 == 0 { 1 } else { -1 }) / 2;
        match self {
            BlockClass::ParabolicUnit { b } => {
                if *b >= 0 {
                    -1
                } else {
                    0
                }
            }
            BlockClass::ParabolicNegative { b } => {
                if *b == 1 {
                    0
                } else {
                    -parity
                }
            }
            BlockClass::Rotation { theta } => 2 * theta.e_of_iterate(m) - 1,
            BlockClass::Hyperbolic { .. } => 0,
        }
    }

    /// Mean-index contribution beyond the linear rate.
    fn mean_extra(&self) -> Option<Theta> {
        match self {
            BlockClass::Rotation { theta } => Some(theta.clone()),
            _ => None,
        }
    }

    /// Nullity contribution at omega = 1 of the m-th power.
    fn nullity_one(&self, m: u32) -> usize {
        match self {
            BlockClass::ParabolicUnit { b } => {
                if *b == 0 {
                    2
                } else {
                    1
                }
            }
            BlockClass::ParabolicNegative { b } => {
                if m % 2 == 1 {
                    0
                } else if *b == 0 {
                    2
                } else {
                    1
                }
            }
            BlockClass::Rotation { theta } => match theta.lattice_period() {
                Some(k) if m % k == 0 => 2,
                _ => 0,
            },
            BlockClass::Hyperbolic { .. } => 0,
        }
    }

    /// Nullity contribution at omega = -1 of the m-th power.
    fn nullity_minus_one(&self, m: u32) -> usize {
        match self {
            BlockClass::ParabolicUnit { .. } => 0,
            BlockClass::ParabolicNegative { b } => {
                if m % 2 == 0 {
                    0
                } else if *b == 0 {
                    2
                } else {
                    1
                }
            }
            BlockClass::Rotation { theta } => {
                // m theta = pi mod 2 pi, i.e. m theta / pi an odd integer.
                match theta {
                    Theta::RationalPi { num, den } => {
                        let v = rat(m as i64 * num, *den);
                        if v.is_integer() && v.to_integer() % big(2) == big(1) {
                            2
                        } else {
                            0
                        }
                    }
                    Theta::Irrational(_) => 0,
                }
            }
            BlockClass::Hyperbolic { .. } => 0,
        }
    }
}

/// Case taxonomy of a full-period Sp(4) closed-characteristic monodromy.
#[derive(Debug, Clone, PartialEq)]
pub enum CaseTag {
    /// Transverse `N_1(-1, b)`, `b` in `{0, +-1}`.
    Case1 { b: i8 },
    /// Transverse rotation `R(theta)`.
    Case2 { theta: Theta },
    /// Transverse `N_1(1, b)`, `b` in `{0, 1}`.
    Case3 { b: u8 },
    /// Transverse `N_1(1, -1)`.
    Case4,
    /// Transverse hyperbolic.
    HyperbolicTransverse { negative: bool },
}

/// Recognized normal form `P^{-1} (N_1(1,1) diamond M_2) P` of a monodromy.
#[derive(Debug, Clone)]
pub struct NormalFormSp4 {
    pub case: CaseTag,
    pub transverse: BlockClass,
    /// Block-diagonalizing symplectic basis (columns).
    pub witness: DMatrix<f64>,
    /// Max-abs residual of the witness conjugation.
    pub residual: f64,
}

/// Generic two-block decomposition of a 4x4 symplectic matrix, also usable
/// for half-period monodromies that carry no unit eigenvalue.
#[derive(Debug, Clone)]
pub struct BlockPair {
    pub first: BlockClass,
    pub second: BlockClass,
    pub witness: DMatrix<f64>,
    pub residual: f64,
}

const UNIT_BAND: f64 = 1e-5;

fn omega2(v: &[f64; 2], w: &[f64; 2]) -> f64 {
    v[0] * w[1] - v[1] * w[0]
}

/// Classifies a 2x2 symplectic block.
pub fn classify_block(b: &DMatrix<f64>) -> Result<BlockClass> {
    let tr = b[(0, 0)] + b[(1, 1)];
    let disc = tr * tr - 4.0;
    // Eigenvalue distance to +-1 controls the parabolic bands.
    let dist_to = |s: f64| -> f64 {
        // |lambda - s| for the eigenvalue closest to s.
        if disc >= 0.0 {
            let r = disc.sqrt();
            let l1 = (tr + r) / 2.0;
            let l2 = (tr - r) / 2.0;
            (l1 - s).abs().min((l2 - s).abs())
        } else {
            let re = tr / 2.0;
            let im = (-disc).sqrt() / 2.0;
            ((re - s) * (re - s) + im * im).sqrt()
        }
    };
    let near_one = dist_to(1.0) <= UNIT_BAND;
    let near_minus = dist_to(-1.0) <= UNIT_BAND;
    if near_one || near_minus {
        let s = if near_one { 1.0 } else { -1.0 };
        let n = b - DMatrix::<f64>::identity(2, 2) * s;
        let scale = 1.0 + b.amax();
        if n.amax() <= 1e-6 * scale {
            return Ok(if near_one {
                BlockClass::ParabolicUnit { b: 0 }
            } else {
                BlockClass::ParabolicNegative { b: 0 }
            });
        }
        // b-sign from omega(N v, v) with the plane's own symplectic form.
        let v = if (n[(0, 0)].abs() + n[(1, 0)].abs()) >= (n[(0, 1)].abs() + n[(1, 1)].abs()) {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        };
        let nv = [
            n[(0, 0)] * v[0] + n[(0, 1)] * v[1],
            n[(1, 0)] * v[0] + n[(1, 1)] * v[1],
        ];
        let sign = omega2(&nv, &v);
        let bb = if sign > 0.0 { 1i8 } else { -1i8 };
        return Ok(if near_one {
            BlockClass::ParabolicUnit { b: bb }
        } else {
            BlockClass::ParabolicNegative { b: bb }
        });
    }
    if disc < 0.0 {
        // Elliptic: |lambda| = 1 automatically for det = 1.
        let det = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
        if (det - 1.0).abs() > 1e-6 {
            return Err(Error::AmbiguousCase {
                reason: format!("2x2 block determinant {det} is not 1"),
            });
        }
        let phi = (tr / 2.0).clamp(-1.0, 1.0).acos();
        // Krein orientation: positive lower-left entry means the
        // positive-imaginary eigenvalue has positive Krein sign.
        let theta = if b[(1, 0)] > 0.0 {
            phi
        } else {
            std::f64::consts::TAU - phi
        };
        return Ok(BlockClass::Rotation {
            theta: detect_rational_angle(theta, 1024, 1e-9),
        });
    }
    // Real hyperbolic pair.
    let r = disc.sqrt();
    let l1 = (tr + r) / 2.0;
    let l2 = (tr - r) / 2.0;
    let lambda = if l1.abs() >= l2.abs() { l1 } else { l2 };
    if (lambda.abs() - 1.0).abs() < UNIT_BAND {
        return Err(Error::AmbiguousCase {
            reason: format!("real eigenvalue {lambda} sits inside the unit band"),
        });
    }
    Ok(BlockClass::Hyperbolic {
        negative: lambda < 0.0,
        lambda,
    })
}

/// Kernel basis of `p(M)`, with relative tolerance.
fn poly_kernel(p: &DMatrix<f64>, expected: usize) -> Result<Vec<DVector<f64>>> {
    let svd = p.clone().svd(false, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tol = (1e-8 * smax).max(1e-10);
    let v_t = svd.v_t.as_ref().unwrap();
    let mut out = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= tol {
            out.push(v_t.row(i).transpose().into_owned());
        }
    }
    if out.len() != expected {
        return Err(Error::AmbiguousCase {
            reason: format!(
                "invariant subspace has dimension {} (expected {})",
                out.len(),
                expected
            ),
        });
    }
    Ok(out)
}

/// Splits a 4x4 symplectic matrix into two 2x2 blocks along invariant
/// symplectic planes determined by its eigenvalue pairs.
pub fn recognize_blocks(m: &DMatrix<f64>) -> Result<BlockPair> {
    linalg::require_symplectic(m, 1e-6)?;
    if m.nrows() != 4 {
        return Err(Error::AmbiguousCase {
            reason: "normal-form taxonomy is restricted to Sp(4)".into(),
        });
    }
    let eigen = linalg::complex_eigenvalues(m);
    let near = |s: f64| -> usize {
        eigen
            .iter()
            .filter(|l| ((*l) - nalgebra::Complex::new(s, 0.0)).norm() <= UNIT_BAND)
            .count()
    };
    let units = near(1.0);
    let negs = near(-1.0);
    let id = DMatrix::<f64>::identity(4, 4);

    if units == 4 || negs == 4 {
        return four_fold_parabolic(m, if units == 4 { 1.0 } else { -1.0 });
    }

    // Annihilating quadratic of the first eigenvalue pair.
    let pair_poly: DMatrix<f64> = if units >= 2 {
        let k = m - &id;
        &k * &k
    } else if negs >= 2 {
        let k = m + &id;
        &k * &k
    } else {
        // Two non-parabolic pairs; pick the eigenvalue of largest modulus,
        // whose reciprocal-conjugate pair has a real trace.
        let lead = eigen
            .iter()
            .cloned()
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
            .unwrap();
        let pair_tr = if lead.im.abs() > 1e-9 {
            2.0 * lead.re
        } else {
            lead.re + 1.0 / lead.re
        };
        m * m - m * pair_tr + &id
    };
    let basis = poly_kernel(&pair_poly, 2)?;
    split_along(m, &basis[0], &basis[1])
}

/// Two-block splitting when all four eigenvalues sit at `s = +-1`.
///
/// `K = M - sI` must be nilpotent of rank at most 2; any vector `v` with
/// `K v != 0` spans the invariant plane `span(v, K v)`.
fn four_fold_parabolic(m: &DMatrix<f64>, s: f64) -> Result<BlockPair> {
    let id = DMatrix::<f64>::identity(4, 4);
    let k = m - &id * s;
    let scale = 1.0 + m.amax();
    let svd = k.clone().svd(false, false);
    let rank = svd
        .singular_values
        .iter()
        .filter(|v| **v > 1e-7 * scale)
        .count();
    let k2 = &k * &k;
    if rank == 0 {
        return Err(Error::AmbiguousCase {
            reason: "monodromy is (minus) the identity; no preferred splitting".into(),
        });
    }
    if rank >= 3 || k2.amax() > 1e-6 * scale {
        return Err(Error::AmbiguousCase {
            reason: "higher Jordan structure at a parabolic eigenvalue".into(),
        });
    }
    let j = linalg::structure_j::<f64>(4);
    // Candidate plane seeds; prefer the one with the least degenerate
    // symplectic pairing omega(v, K v).
    let mut best: Option<(f64, DVector<f64>, DVector<f64>)> = None;
    let mut candidates: Vec<DVector<f64>> = (0..4)
        .map(|i| {
            let mut e = DVector::<f64>::zeros(4);
            e[i] = 1.0;
            e
        })
        .collect();
    for (a, b) in [(0usize, 1usize), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        let mut e = DVector::<f64>::zeros(4);
        e[a] = 1.0;
        e[b] = 1.0;
        candidates.push(e.normalize());
    }
    for v in candidates {
        let kv = &k * &v;
        if kv.norm() < 1e-7 * scale {
            continue;
        }
        let pairing = ((&j * &v).dot(&kv)).abs() / kv.norm();
        if best.as_ref().map_or(true, |(p, _, _)| pairing > *p) {
            best = Some((pairing, v.clone(), kv.clone()));
        }
    }
    let (pairing, v, kv) = best.ok_or_else(|| Error::AmbiguousCase {
        reason: "no shear direction found at a parabolic eigenvalue".into(),
    })?;
    if pairing < 1e-7 {
        return Err(Error::AmbiguousCase {
            reason: "shear planes are nearly Lagrangian-degenerate".into(),
        });
    }
    split_along(m, &v, &kv.normalize())
}

fn split_along(m: &DMatrix<f64>, u1: &DVector<f64>, u2: &DVector<f64>) -> Result<BlockPair> {
    let j = linalg::structure_j::<f64>(4);
    let omega = |a: &DVector<f64>, b: &DVector<f64>| -> f64 { (&j * a).dot(b) };
    let s = omega(u1, u2);
    if s.abs() < 1e-8 {
        return Err(Error::AmbiguousCase {
            reason: "invariant plane is nearly Lagrangian-degenerate".into(),
        });
    }
    let a1 = u1.clone_owned();
    let b1 = u2 / s;
    // Symplectic projection of the standard basis onto the complement.
    let mut comp: Vec<nalgebra::DVector<f64>> = Vec::new();
    for i in 0..4 {
        let mut e = nalgebra::DVector::<f64>::zeros(4);
        e[i] = 1.0;
        let proj = &e - &a1 * omega(&e, &b1) + &b1 * omega(&e, &a1);
        // Euclidean orthogonalization against what we already have keeps the
        // basis well conditioned.
        let mut w = proj;
        for c in &comp {
            let p = c.dot(&w) / c.norm_squared();
            w -= c * p;
        }
        if w.norm() > 1e-6 {
            comp.push(w);
        }
        if comp.len() == 2 {
            break;
        }
    }
    if comp.len() != 2 {
        return Err(Error::AmbiguousCase {
            reason: "could not complete a symplectic complement".into(),
        });
    }
    let s2 = omega(&comp[0], &comp[1]);
    if s2.abs() < 1e-10 {
        return Err(Error::AmbiguousCase {
            reason: "complement plane is nearly Lagrangian-degenerate".into(),
        });
    }
    let a2 = comp[0].clone_owned();
    let b2 = &comp[1] / s2;

    let mut p = DMatrix::<f64>::zeros(4, 4);
    p.column_mut(0).copy_from(&a1);
    p.column_mut(1).copy_from(&b1);
    p.column_mut(2).copy_from(&a2);
    p.column_mut(3).copy_from(&b2);
    let p_inv = p.clone().try_inverse().ok_or_else(|| Error::AmbiguousCase {
        reason: "witness basis is singular".into(),
    })?;
    let reduced = &p_inv * m * &p;
    let block1 = reduced.view((0, 0), (2, 2)).into_owned();
    let block2 = reduced.view((2, 2), (2, 2)).into_owned();
    let mut off = 0.0f64;
    for (i, j2) in [(0usize, 2usize), (2, 0)] {
        off = off.max(reduced.view((i, j2), (2, 2)).amax());
    }
    let first = classify_block(&block1)?;
    let second = classify_block(&block2)?;
    Ok(BlockPair {
        first,
        second,
        witness: p,
        residual: off,
    })
}

/// Recognizes the full-orbit normal form `N_1(1,1) diamond M_2`.
pub fn recognize_normal_form(gamma_tau: &DMatrix<f64>) -> Result<NormalFormSp4> {
    let eigen = linalg::complex_eigenvalues(gamma_tau);
    let unit_count = eigen
        .iter()
        .filter(|l| ((*l) - nalgebra::Complex::new(1.0, 0.0)).norm() <= UNIT_BAND)
        .count();
    if unit_count < 2 {
        return Err(Error::NoUnitBlock { unit_count });
    }
    let pair = recognize_blocks(gamma_tau)?;
    let (unit, transverse) = match (&pair.first, &pair.second) {
        (BlockClass::ParabolicUnit { b: 1 }, other) => (pair.first.clone(), other.clone()),
        (other, BlockClass::ParabolicUnit { b: 1 }) => (pair.second.clone(), other.clone()),
        _ => {
            return Err(Error::NoUnitBlock { unit_count });
        }
    };
    let _ = unit;
    let case = match &transverse {
        BlockClass::ParabolicNegative { b } => CaseTag::Case1 { b: *b },
        BlockClass::Rotation { theta } => CaseTag::Case2 {
            theta: theta.clone(),
        },
        BlockClass::ParabolicUnit { b } => {
            if *b >= 0 {
                CaseTag::Case3 { b: *b as u8 }
            } else {
                CaseTag::Case4
            }
        }
        BlockClass::Hyperbolic { negative, .. } => CaseTag::HyperbolicTransverse {
            negative: *negative,
        },
    };
    Ok(NormalFormSp4 {
        case,
        transverse,
        witness: pair.witness,
        residual: pair.residual,
    })
}

/// Exact mean index: a rational, or `base + theta/pi` with irrational theta.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanIndex {
    Exact(BigRational),
    WithTheta { base: BigRational, theta_over_pi: f64 },
}

impl MeanIndex {
    pub fn to_f64(&self) -> f64 {
        match self {
            MeanIndex::Exact(r) => rational_to_f64(r),
            MeanIndex::WithTheta { base, theta_over_pi } => rational_to_f64(base) + theta_over_pi,
        }
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let num = r.numer();
    let den = r.denom();
    let fnum: f64 = num.to_string().parse().unwrap();
    let fden: f64 = den.to_string().parse().unwrap();
    fnum / fden
}

/// Closed-form iterate sequence of a two-block monodromy.
#[derive(Debug, Clone)]
pub struct IterationFormula {
    pub label: String,
    pub dim_half: usize,
    pub case: Option<CaseTag>,
    pub blocks: (BlockClass, BlockClass),
    /// Morse-normalized initial index `i(y)`.
    pub i1_morse: i64,
    /// Splitting number `S^+_{gamma(tau)}(1)`, when known.
    pub splitting_plus: Option<i64>,
}

impl IterationFormula {
    /// Builds the formula for a recognized full-orbit normal form.
    pub fn from_normal_form(label: &str, nf: &NormalFormSp4, i1_morse: i64) -> Self {
        // The forced unit block carries S^+(1) = 1; a parabolic-unit
        // transverse block adds its own unit splitting.
        let extra = match &nf.transverse {
            BlockClass::ParabolicUnit { b } => {
                if *b >= 0 {
                    1
                } else {
                    0
                }
            }
            _ => 0,
        };
        IterationFormula {
            label: label.to_string(),
            dim_half: 2,
            case: Some(nf.case.clone()),
            blocks: (BlockClass::ParabolicUnit { b: 1 }, nf.transverse.clone()),
            i1_morse,
            splitting_plus: Some(1 + extra),
        }
    }

    fn correction(&self, m: u32) -> i64 {
        self.blocks.0.correction(m) + self.blocks.1.correction(m)
    }

    /// Maslov-type index `i(y, m)`.
    pub fn index_maslov(&self, m: u32) -> i64 {
        let i1_maslov = self.i1_morse + self.dim_half as i64;
        let rate = i1_maslov - self.correction(1);
        rate * m as i64 + self.correction(m)
    }

    /// Morse-normalized index `i(y^m) = i(y, m) - n`.
    pub fn index_morse(&self, m: u32) -> i64 {
        self.index_maslov(m) - self.dim_half as i64
    }

    /// Nullity `nu(y, m) = nu(y^m)`.
    pub fn nullity(&self, m: u32) -> usize {
        self.blocks.0.nullity_one(m) + self.blocks.1.nullity_one(m)
    }

    /// Exact mean index (per period, same in both normalizations).
    pub fn mean_index(&self) -> MeanIndex {
        let i1_maslov = self.i1_morse + self.dim_half as i64;
        let rate = BigRational::from_integer(big(i1_maslov - self.correction(1)));
        let mut base = rate;
        let mut irrational: Option<f64> = None;
        for block in [&self.blocks.0, &self.blocks.1] {
            if let Some(theta) = block.mean_extra() {
                match theta.over_pi_exact() {
                    Some(q) => base += q,
                    None => {
                        irrational =
                            Some(irrational.unwrap_or(0.0) + theta.radians() / std::f64::consts::PI)
                    }
                }
            }
        }
        match irrational {
            None => MeanIndex::Exact(base),
            Some(t) => MeanIndex::WithTheta {
                base,
                theta_over_pi: t,
            },
        }
    }

    /// Minimal period of the (nullity, index-parity) iterate pattern.
    pub fn class_period(&self) -> Option<u32> {
        let mut k = 1u32;
        // Parity of the index sequence repeats with period 1 or 2.
        if (self.index_maslov(3) - self.index_maslov(1)) % 2 != 0 {
            k = 2;
        }
        for block in [&self.blocks.0, &self.blocks.1] {
            let p = match block {
                BlockClass::ParabolicNegative { .. } => Some(2),
                BlockClass::Rotation { theta } => match theta.lattice_period() {
                    Some(kp) => Some(kp),
                    None => None,
                },
                _ => Some(1),
            };
            match p {
                Some(p) => k = lcm(k, p),
                None => return None,
            }
        }
        Some(k)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    a / (gcd(a as i64, b as i64) as u32) * b
}

/// Symmetric (odd-iterate) index table derived from the half-path formula by
/// the Bott difference `ibar(y^m) = i(psi^{2m}) - i(psi^m)` for odd `m`.
#[derive(Debug, Clone)]
pub struct SymmetricIteration {
    /// Half-path two-block iteration data, Maslov normalization.
    pub half_blocks: (BlockClass, BlockClass),
    pub i_psi_maslov: i64,
    pub dim_half: usize,
}

impl SymmetricIteration {
    pub fn new(pair: &BlockPair, i_psi_maslov: i64) -> Self {
        SymmetricIteration {
            half_blocks: (pair.first.clone(), pair.second.clone()),
            i_psi_maslov,
            dim_half: 2,
        }
    }

    fn psi_index(&self, m: u32) -> i64 {
        let c1 = self.half_blocks.0.correction(1) + self.half_blocks.1.correction(1);
        let cm = self.half_blocks.0.correction(m) + self.half_blocks.1.correction(m);
        (self.i_psi_maslov - c1) * m as i64 + cm
    }

    /// `ibar(y^m)` for odd `m`.
    pub fn ibar(&self, m_odd: u32) -> i64 {
        assert!(m_odd % 2 == 1);
        self.psi_index(2 * m_odd) - self.psi_index(m_odd)
    }

    /// `nubar(y^m) = nu_{-1}(psi^m)` for odd `m`.
    pub fn nubar(&self, m_odd: u32) -> usize {
        assert!(m_odd % 2 == 1);
        self.half_blocks.0.nullity_minus_one(m_odd) + self.half_blocks.1.nullity_minus_one(m_odd)
    }

    /// Mean symmetric index `ibar-hat = ihat(psi)`.
    pub fn mean(&self) -> MeanIndex {
        let c1 = self.half_blocks.0.correction(1) + self.half_blocks.1.correction(1);
        let mut base = BigRational::from_integer(big(self.i_psi_maslov - c1));
        let mut irrational: Option<f64> = None;
        for block in [&self.half_blocks.0, &self.half_blocks.1] {
            if let Some(theta) = block.mean_extra() {
                match theta.over_pi_exact() {
                    Some(q) => base += q,
                    None => {
                        irrational =
                            Some(irrational.unwrap_or(0.0) + theta.radians() / std::f64::consts::PI)
                    }
                }
            }
        }
        match irrational {
            None => MeanIndex::Exact(base),
            Some(t) => MeanIndex::WithTheta {
                base,
                theta_over_pi: t,
            },
        }
    }
}

/// One orbit's data for the common-index-jump search.
#[derive(Debug, Clone)]
pub struct JumpRecord {
    pub formula: IterationFormula,
}

/// Brute-force search for common index jump witnesses: all `(N, m_1..m_k)`
/// with `N <= n_max` satisfying, for every orbit `j`,
/// `i(y_j, 2 m_j + 1) = 2N + i(y_j, 1)` and
/// `i(y_j, 2 m_j - 1) + nu(y_j, 2 m_j - 1)
///    = 2N - (i(y_j, 1) + 2 S^+ - nu(y_j, 1))`.
pub fn find_index_jump(records: &[JumpRecord], n_max: u32) -> Result<Vec<(u32, Vec<u32>)>> {
    if records.is_empty() {
        return Ok(Vec::new());
    }
    for r in records {
        if r.formula.splitting_plus.is_none() {
            return Err(Error::MissingSplittingNumber {
                orbit: r.formula.label.clone(),
            });
        }
    }
    let mut out = Vec::new();
    for n in 1..=n_max {
        let mut per_orbit: Vec<Vec<u32>> = Vec::with_capacity(records.len());
        for r in records {
            let f = &r.formula;
            let i1 = f.index_maslov(1);
            let nu1 = f.nullity(1) as i64;
            let s_plus = f.formula_splitting();
            let target_a = 2 * n as i64 + i1;
            let target_b = 2 * n as i64 - (i1 + 2 * s_plus - nu1);
            let mut ms = Vec::new();
            let m_cap = 4 * n as i64 + 64;
            for m in 1..=m_cap {
                let m = m as u32;
                let a = f.index_maslov(2 * m + 1);
                if a == target_a {
                    let b = f.index_maslov(2 * m - 1) + f.nullity(2 * m - 1) as i64;
                    if b == target_b {
                        ms.push(m);
                    }
                }
                if f.index_maslov(2 * m + 1) > target_a + 8 {
                    break;
                }
            }
            per_orbit.push(ms);
        }
        if per_orbit.iter().all(|v| !v.is_empty()) {
            // Emit the lexicographically first combination per N.
            let combo: Vec<u32> = per_orbit.iter().map(|v| v[0]).collect();
            out.push((n, combo));
        }
    }
    Ok(out)
}

impl IterationFormula {
    fn formula_splitting(&self) -> i64 {
        self.splitting_plus.unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{blocks, block_diag, rot2};

    fn n1(lambda: f64, b: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[lambda, b, 0.0, lambda])
    }

    #[test]
    fn recognizes_rotation_case() {
        let m = block_diag(&[n1(1.0, 1.0), rot2(2.0 * std::f64::consts::PI / 5.0)]);
        let nf = recognize_normal_form(&m).unwrap();
        match nf.case {
            CaseTag::Case2 {
                theta: Theta::RationalPi { num, den },
            } => {
                assert_eq!((num, den), (2, 5));
            }
            other => panic!("expected Case2 rational, got {:?}", other),
        }
        assert!(nf.residual <= 1e-6);
    }

    #[test]
    fn recognizes_negative_parabolic_case() {
        let m = block_diag(&[n1(1.0, 1.0), n1(-1.0, -1.0)]);
        let nf = recognize_normal_form(&m).unwrap();
        assert_eq!(nf.case, CaseTag::Case1 { b: -1 });
    }

    #[test]
    fn recognizes_hyperbolic_case() {
        let m = block_diag(&[
            n1(1.0, 1.0),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]),
        ]);
        let nf = recognize_normal_form(&m).unwrap();
        assert_eq!(
            nf.case,
            CaseTag::HyperbolicTransverse { negative: false }
        );
    }

    #[test]
    fn rejects_paths_without_unit_block() {
        let m = block_diag(&[rot2(1.0), rot2(2.0)]);
        assert!(matches!(
            recognize_normal_form(&m),
            Err(Error::NoUnitBlock { .. })
        ));
    }

    #[test]
    fn conjugated_input_recovers_the_case() {
        // Conjugate by a random symplectic matrix and re-recognize.
        let j = linalg::structure_j::<f64>(4);
        let s = DMatrix::<f64>::from_row_slice(
            4,
            4,
            &[
                1.0, 0.3, -0.2, 0.1, //
                0.3, 0.8, 0.0, -0.4, //
                -0.2, 0.0, 1.2, 0.2, //
                0.1, -0.4, 0.2, 0.9,
            ],
        );
        let g = linalg::expm(&(&j * s * 0.3));
        let core = block_diag(&[n1(1.0, 1.0), rot2(0.7)]);
        let m = &g * core * g.clone().try_inverse().unwrap();
        let nf = recognize_normal_form(&m).unwrap();
        match nf.case {
            CaseTag::Case2 { theta } => {
                assert!((theta.radians() - 0.7).abs() < 1e-7);
            }
            other => panic!("expected Case2, got {:?}", other),
        }
    }

    fn hyperbolic_formula(i1_morse: i64) -> IterationFormula {
        IterationFormula {
            label: "hyp".into(),
            dim_half: 2,
            case: Some(CaseTag::HyperbolicTransverse { negative: true }),
            blocks: (
                BlockClass::ParabolicUnit { b: 1 },
                BlockClass::Hyperbolic {
                    negative: true,
                    lambda: -2.0,
                },
            ),
            i1_morse,
            splitting_plus: Some(1),
        }
    }

    #[test]
    fn hyperbolic_sequence_matches_claimed_form() {
        // i(y^m) = m(i(y)+3) - 3 and nu = 1; with i(y) = -1 the sequence is
        // -1, 1, 3, 5, ... and the mean index is 2.
        let f = hyperbolic_formula(-1);
        for m in 1..=8u32 {
            assert_eq!(f.index_morse(m), 2 * m as i64 - 3);
            assert_eq!(f.nullity(m), 1);
        }
        assert_eq!(f.mean_index(), MeanIndex::Exact(rat(2, 1)));
    }

    #[test]
    fn case2_sequence_frozen_from_exact_evaluation() {
        // i(y) = -2, theta = 2 pi / 3: i(y^m) = 2 E(m/3) - 4, evaluated in
        // exact rationals; the first six values are -2,-2,-2,0,0,0.
        let f = IterationFormula {
            label: "case2".into(),
            dim_half: 2,
            case: None,
            blocks: (
                BlockClass::ParabolicUnit { b: 1 },
                BlockClass::Rotation {
                    theta: Theta::RationalPi { num: 2, den: 3 },
                },
            ),
            i1_morse: -2,
            splitting_plus: Some(1),
        };
        let got: Vec<i64> = (1..=6).map(|m| f.index_morse(m)).collect();
        assert_eq!(got, vec![-2, -2, -2, 0, 0, 0]);
        // nu(y^m) = 1 off lattice, 3 at multiples of K = 3.
        assert_eq!(f.nullity(1), 1);
        assert_eq!(f.nullity(3), 3);
        assert_eq!(f.nullity(6), 3);
        // ihat = i(y) + 2 + theta/pi = 2/3.
        assert_eq!(f.mean_index(), MeanIndex::Exact(rat(2, 3)));
        assert_eq!(f.class_period(), Some(3));
    }

    #[test]
    fn case3_example() {
        let f = IterationFormula {
            label: "case3".into(),
            dim_half: 2,
            case: Some(CaseTag::Case3 { b: 1 }),
            blocks: (
                BlockClass::ParabolicUnit { b: 1 },
                BlockClass::ParabolicUnit { b: 1 },
            ),
            i1_morse: -2,
            splitting_plus: Some(2),
        };
        assert_eq!(f.index_morse(2), 0);
        assert_eq!(f.mean_index(), MeanIndex::Exact(rat(2, 1)));
    }

    #[test]
    fn symmetric_iteration_paper_values() {
        // Hyperbolic half path: N1(-1,-1) + positive hyperbolic with
        // i(psi) = 1 gives ibar(y) = 0 and mean 1.
        let pair = BlockPair {
            first: BlockClass::ParabolicNegative { b: -1 },
            second: BlockClass::Hyperbolic {
                negative: false,
                lambda: 2.0,
            },
            witness: DMatrix::identity(4, 4),
            residual: 0.0,
        };
        let sym = SymmetricIteration::new(&pair, 1);
        assert_eq!(sym.ibar(1), 0);
        assert_eq!(sym.mean(), MeanIndex::Exact(rat(1, 1)));
        // Parity: ibar(y^{2m-1}) - ibar(y) is even.
        for m in 1..=9u32 {
            let modd = 2 * m - 1;
            assert_eq!((sym.ibar(modd) - sym.ibar(1)) % 2, 0);
        }
        assert_eq!(sym.nubar(1), 1);
    }

    #[test]
    fn eq_649_inequality_for_rational_case2() {
        // For Case 2 with i(y) = -2 the mean index is theta/pi and
        // K theta in 2 pi Z forces theta/pi >= 2/K.
        for (num, den) in [(1i64, 3i64), (2, 3), (1, 4), (3, 5), (5, 7)] {
            let theta = Theta::RationalPi { num, den };
            let k = theta.lattice_period().unwrap();
            let f = IterationFormula {
                label: "case2".into(),
                dim_half: 2,
                case: None,
                blocks: (
                    BlockClass::ParabolicUnit { b: 1 },
                    BlockClass::Rotation { theta },
                ),
                i1_morse: -2,
                splitting_plus: Some(1),
            };
            let mean = match f.mean_index() {
                MeanIndex::Exact(r) => r,
                _ => unreachable!(),
            };
            assert!(mean >= rat(2, k as i64));
        }
    }

    #[test]
    fn index_bound_holds_for_formulas() {
        let formulas = vec![
            hyperbolic_formula(-1),
            IterationFormula {
                label: "case2".into(),
                dim_half: 2,
                case: None,
                blocks: (
                    BlockClass::ParabolicUnit { b: 1 },
                    BlockClass::Rotation {
                        theta: Theta::RationalPi { num: 3, den: 7 },
                    },
                ),
                i1_morse: 0,
                splitting_plus: Some(1),
            },
        ];
        for f in &formulas {
            let mean = f.mean_index().to_f64();
            for m in (1..=10_000u32).step_by(97) {
                let diff = f.index_morse(m) as f64 - m as f64 * mean;
                assert!(diff.abs() <= 4.0 + 1e-6, "bound violated at m = {m}");
            }
        }
    }

    #[test]
    fn jump_search_on_two_hyperbolic_orbits() {
        // i(y_1) = 0 and i(y_2) = 2 (Maslov indices 2 and 4): both equalities
        // reduce to m_j (i_j + 3) = N, so the first triple is N = lcm(3,5).
        let records = vec![
            JumpRecord {
                formula: hyperbolic_formula(0),
            },
            JumpRecord {
                formula: hyperbolic_formula(2),
            },
        ];
        let found = find_index_jump(&records, 100).unwrap();
        assert!(!found.is_empty());
        assert_eq!(found[0], (15, vec![5, 3]));
    }

    #[test]
    fn jump_search_irrational_theta() {
        let f = IterationFormula {
            label: "irr".into(),
            dim_half: 2,
            case: None,
            blocks: (
                BlockClass::ParabolicUnit { b: 1 },
                BlockClass::Rotation {
                    theta: Theta::Irrational(std::f64::consts::SQRT_2),
                },
            ),
            i1_morse: 0,
            splitting_plus: Some(1),
        };
        let found = find_index_jump(&[JumpRecord { formula: f }], 1000).unwrap();
        assert!(found.len() >= 3, "found {}", found.len());
    }

    #[test]
    fn empty_jump_search_is_empty() {
        assert!(find_index_jump(&[], 100).unwrap().is_empty());
    }
}
