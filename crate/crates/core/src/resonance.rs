//! Resonance identities and Morse-series inequalities, in exact rational
//! arithmetic.
//!
//! Identity sums run over exact rationals; a shared irrational ratio (an
//! ellipsoid's squared-radius ratio) is carried symbolically as a rational
//! function in one variable, so sums that cancel algebraically produce a
//! residual of exactly zero. Floats enter only through mean-index brackets,
//! which propagate as intervals.

use crate::error::{Error, Result};
use crate::iteration::IterationFormula;
use crate::iteration::MeanIndex;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn to_f64(r: &BigRational) -> f64 {
    crate::iteration::rational_to_f64(r)
}

// ---------------------------------------------------------------------------
// Dense univariate polynomials over the rationals.

#[derive(Debug, Clone, PartialEq)]
pub struct Poly(Vec<BigRational>);

impl Poly {
    fn constant(c: BigRational) -> Self {
        Poly(vec![c]).trimmed()
    }

    fn symbol() -> Self {
        Poly(vec![BigRational::zero(), BigRational::one()])
    }

    fn trimmed(mut self) -> Self {
        while self.0.len() > 1 && self.0.last().map_or(false, |c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    fn degree(&self) -> usize {
        self.0.len() - 1
    }

    fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.0.iter().enumerate() {
            out[i] += c;
        }
        Poly(out).trimmed()
    }

    fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::constant(BigRational::zero());
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out).trimmed()
    }

    /// Euclidean remainder.
    fn rem(&self, div: &Poly) -> Poly {
        let mut r = self.clone();
        while !r.is_zero() && r.degree() >= div.degree() && !div.is_zero() {
            let shift = r.degree() - div.degree();
            let factor = &r.0[r.degree()] / &div.0[div.degree()];
            let mut sub = vec![BigRational::zero(); shift];
            sub.extend(div.0.iter().map(|c| c * &factor));
            r = r.add(&Poly(sub).neg());
            if r.0.len() == 1 && r.0[0].is_zero() {
                break;
            }
        }
        r
    }

    fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let r = x.rem(&y);
            x = y;
            y = r;
        }
        let lead = x.0[x.degree()].clone();
        if lead.is_zero() {
            Poly::constant(BigRational::one())
        } else {
            Poly(x.0.iter().map(|c| c / &lead).collect()).trimmed()
        }
    }

    fn div_exact(&self, div: &Poly) -> Poly {
        let mut r = self.clone();
        let mut q = vec![BigRational::zero(); self.0.len()];
        while !r.is_zero() && r.degree() >= div.degree() {
            let shift = r.degree() - div.degree();
            let factor = &r.0[r.degree()] / &div.0[div.degree()];
            q[shift] = factor.clone();
            let mut sub = vec![BigRational::zero(); shift];
            sub.extend(div.0.iter().map(|c| c * &factor));
            r = r.add(&Poly(sub).neg());
            if r.0.len() == 1 && r.0[0].is_zero() {
                break;
            }
        }
        Poly(q).trimmed()
    }

    fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + to_f64(c))
    }
}

/// Rational function in one symbol, kept reduced.
#[derive(Debug, Clone, PartialEq)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    pub fn constant(c: BigRational) -> Self {
        RatFun {
            num: Poly::constant(c),
            den: Poly::constant(BigRational::one()),
        }
    }

    /// The shared symbol itself.
    pub fn symbol() -> Self {
        RatFun {
            num: Poly::symbol(),
            den: Poly::constant(BigRational::one()),
        }
    }

    fn reduced(self) -> Self {
        if self.num.is_zero() {
            return RatFun::constant(BigRational::zero());
        }
        let g = Poly::gcd(&self.num, &self.den);
        let num = self.num.div_exact(&g);
        let den = self.den.div_exact(&g);
        let lead = den.0[den.degree()].clone();
        RatFun {
            num: Poly(num.0.iter().map(|c| c / &lead).collect()).trimmed(),
            den: Poly(den.0.iter().map(|c| c / &lead).collect()).trimmed(),
        }
    }

    pub fn add(&self, other: &RatFun) -> RatFun {
        RatFun {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
        .reduced()
    }

    pub fn mul(&self, other: &RatFun) -> RatFun {
        RatFun {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
        .reduced()
    }

    pub fn recip(&self) -> RatFun {
        RatFun {
            num: self.den.clone(),
            den: self.num.clone(),
        }
        .reduced()
    }

    pub fn scale(&self, c: &BigRational) -> RatFun {
        RatFun {
            num: self.num.mul(&Poly::constant(c.clone())),
            den: self.den.clone(),
        }
        .reduced()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The constant value when the function has degree zero.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.num.degree() == 0 && self.den.degree() == 0 {
            Some(&self.num.0[0] / &self.den.0[0])
        } else {
            None
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.num.eval(x) / self.den.eval(x)
    }
}

// ---------------------------------------------------------------------------
// Values: exact rationals, rational functions of a shared symbol, intervals.

/// A mean index or identity sum: exact, symbolic in one shared irrational
/// ratio, or a rigorous interval.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(BigRational),
    OfSymbol(RatFun),
    Interval(BigRational, BigRational),
}

impl Value {
    pub fn zero() -> Self {
        Value::Exact(BigRational::zero())
    }

    /// Interval wrapping of a formula mean index that is not exact.
    pub fn from_mean(mean: &MeanIndex) -> Value {
        match mean {
            MeanIndex::Exact(r) => Value::Exact(r.clone()),
            MeanIndex::WithTheta { .. } => {
                let x = mean.to_f64();
                let width = 1e-9;
                Value::Interval(float_to_rational(x - width), float_to_rational(x + width))
            }
        }
    }

    fn to_ratfun(&self) -> Option<RatFun> {
        match self {
            Value::Exact(r) => Some(RatFun::constant(r.clone())),
            Value::OfSymbol(f) => Some(f.clone()),
            Value::Interval(..) => None,
        }
    }

    fn bounds(&self, symbol: Option<f64>) -> (f64, f64) {
        match self {
            Value::Exact(r) => {
                let x = to_f64(r);
                (x, x)
            }
            Value::OfSymbol(f) => {
                let x = f.eval(symbol.expect("symbolic value needs a symbol estimate"));
                (x, x)
            }
            Value::Interval(lo, hi) => (to_f64(lo), to_f64(hi)),
        }
    }

    pub fn add(&self, other: &Value, symbol: Option<f64>) -> Value {
        if let (Some(a), Some(b)) = (self.to_ratfun(), other.to_ratfun()) {
            let sum = a.add(&b);
            return match sum.as_constant() {
                Some(c) => Value::Exact(c),
                None => Value::OfSymbol(sum),
            };
        }
        let (alo, ahi) = self.bounds(symbol);
        let (blo, bhi) = other.bounds(symbol);
        Value::Interval(float_to_rational(alo + blo), float_to_rational(ahi + bhi))
    }

    /// `c / self`; the denominator must have a definite sign.
    pub fn recip_scale(&self, c: &BigRational, symbol: Option<f64>, orbit: &str) -> Result<Value> {
        match self {
            Value::Exact(r) => {
                if r.is_zero() {
                    return Err(Error::UnboundedContribution {
                        orbit: orbit.to_string(),
                    });
                }
                Ok(Value::Exact(c / r))
            }
            Value::OfSymbol(f) => {
                if f.is_zero() {
                    return Err(Error::UnboundedContribution {
                        orbit: orbit.to_string(),
                    });
                }
                Ok(Value::OfSymbol(f.recip().scale(c)))
            }
            Value::Interval(lo, hi) => {
                if lo.is_negative() != hi.is_negative() || lo.is_zero() || hi.is_zero() {
                    return Err(Error::SignAmbiguous {
                        orbit: orbit.to_string(),
                    });
                }
                let a = c / hi;
                let b = c / lo;
                let (lo2, hi2) = if a <= b { (a, b) } else { (b, a) };
                let _ = symbol;
                Ok(Value::Interval(lo2, hi2))
            }
        }
    }

    /// Sign of the value: -1, 0 or +1; intervals straddling zero fail.
    pub fn sign(&self, symbol: Option<f64>, orbit: &str) -> Result<i8> {
        match self {
            Value::Exact(r) => Ok(if r.is_negative() {
                -1
            } else if r.is_zero() {
                0
            } else {
                1
            }),
            Value::OfSymbol(f) => {
                let x = f.eval(symbol.ok_or_else(|| Error::SignAmbiguous {
                    orbit: orbit.to_string(),
                })?);
                Ok(if x < 0.0 {
                    -1
                } else if x == 0.0 {
                    0
                } else {
                    1
                })
            }
            Value::Interval(lo, hi) => {
                if lo.is_positive() {
                    Ok(1)
                } else if hi.is_negative() {
                    Ok(-1)
                } else {
                    Err(Error::SignAmbiguous {
                        orbit: orbit.to_string(),
                    })
                }
            }
        }
    }

    /// Upper bound on the distance to a rational target.
    pub fn residual_bound(&self, target: &BigRational, symbol: Option<f64>) -> f64 {
        match self {
            Value::Exact(r) => to_f64(&(r - target)).abs(),
            Value::OfSymbol(_) => {
                let (lo, _) = self.bounds(symbol);
                (lo - to_f64(target)).abs()
            }
            Value::Interval(lo, hi) => {
                let t = to_f64(target);
                (to_f64(lo) - t).abs().max((to_f64(hi) - t).abs())
            }
        }
    }

    /// Exact equality with a rational target, when decidable.
    pub fn equals_exactly(&self, target: &BigRational) -> bool {
        match self {
            Value::Exact(r) => r == target,
            Value::OfSymbol(f) => f.as_constant().map(|c| &c == target).unwrap_or(false),
            Value::Interval(..) => false,
        }
    }

    pub fn width(&self) -> f64 {
        match self {
            Value::Interval(lo, hi) => to_f64(hi) - to_f64(lo),
            _ => 0.0,
        }
    }
}

fn float_to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

// ---------------------------------------------------------------------------
// Critical type numbers.

/// Violations of the support and exclusivity rules for a critical-type-number
/// list; empty means admissible.
pub fn type_number_violations(k: &[u32], nu: usize) -> Vec<String> {
    let mut out = Vec::new();
    if k.len() != nu {
        out.push(format!(
            "list length {} differs from nullity {}",
            k.len(),
            nu
        ));
        return out;
    }
    if nu == 0 {
        return out;
    }
    let last = nu - 1;
    if k[0] > 1 {
        out.push(format!("k_0 = {} exceeds 1", k[0]));
    }
    if k[last] > 1 {
        out.push(format!("k_{last} = {} exceeds 1", k[last]));
    }
    if k[0] == 1 && k.iter().skip(1).any(|v| *v != 0) {
        out.push("k_0 = 1 requires all higher type numbers to vanish".into());
    }
    if nu >= 2 && k[last] == 1 && k.iter().take(last).any(|v| *v != 0) {
        out.push(format!(
            "k_{last} = 1 requires all lower type numbers to vanish"
        ));
    }
    if nu >= 3 {
        let middle_nonzero = k[1..last].iter().any(|v| *v > 0);
        if middle_nonzero && (k[0] != 0 || k[last] != 0) {
            out.push("an interior type number requires both endpoint values to vanish".into());
        }
    }
    if nu <= 3 {
        let nonzero = k.iter().filter(|v| **v > 0).count();
        if nonzero > 1 {
            out.push(format!(
                "nullity {nu} <= 3 admits at most one non-zero type number, found {nonzero}"
            ));
        }
    }
    out
}

/// Errors unless the type numbers are admissible.
pub fn validate_type_numbers(k: &[u32], nu: usize) -> Result<()> {
    let violations = type_number_violations(k, nu);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidTypeNumbers { violations })
    }
}

/// Per-iterate data of one periodicity class of a degenerate orbit.
#[derive(Debug, Clone)]
pub struct IterateClass {
    /// Morse-normalized index of the iterate.
    pub index: i64,
    pub nullity: usize,
    /// Type numbers `k_0 .. k_{nu-1}`.
    pub type_numbers: Vec<u32>,
}

/// Average Euler characteristic of the periodic problem.
///
/// Non-degenerate orbits: `(-1)^i` when the iterate index jump is even,
/// `(-1)^i / 2` otherwise. Degenerate orbits evaluate the alternating sum
/// over one periodicity class `m = 1..K` exactly.
pub fn euler_hat(
    index: i64,
    jump_even: bool,
    nondegenerate: bool,
    degenerate: Option<&[IterateClass]>,
) -> Result<BigRational> {
    if nondegenerate {
        let sign = if index.rem_euclid(2) == 0 {
            BigRational::one()
        } else {
            -BigRational::one()
        };
        return Ok(if jump_even { sign } else { sign / rat(2, 1) });
    }
    let classes = degenerate.ok_or_else(|| {
        Error::Config("degenerate orbits need supplied critical type numbers".into())
    })?;
    let k = classes.len() as i64;
    let mut sum = BigRational::zero();
    for class in classes {
        validate_type_numbers(&class.type_numbers, class.nullity)?;
        for (l, kl) in class.type_numbers.iter().enumerate() {
            if *kl == 0 {
                continue;
            }
            let sign = if (class.index + l as i64).rem_euclid(2) == 0 {
                BigRational::one()
            } else {
                -BigRational::one()
            };
            sum += sign * BigRational::from_integer(BigInt::from(*kl));
        }
    }
    Ok(sum / rat(k, 1))
}

/// Average Euler characteristic of the symmetric problem (odd iterates).
///
/// Non-degenerate: `(-1)^{ibar}`. Degenerate: `2 / Kbar` times the
/// alternating sum over the odd iterates up to `Kbar - 1`, with `Kbar` even.
pub fn euler_hat_symmetric(
    ibar: i64,
    nondegenerate: bool,
    degenerate: Option<(&[IterateClass], u32)>,
) -> Result<BigRational> {
    if nondegenerate {
        return Ok(if ibar.rem_euclid(2) == 0 {
            BigRational::one()
        } else {
            -BigRational::one()
        });
    }
    let (classes, kbar) = degenerate.ok_or_else(|| {
        Error::Config("degenerate symmetric orbits need supplied critical type numbers".into())
    })?;
    if kbar % 2 != 0 {
        return Err(Error::Config(format!(
            "symmetric periodicity Kbar = {kbar} must be even"
        )));
    }
    let mut sum = BigRational::zero();
    for class in classes {
        validate_type_numbers(&class.type_numbers, class.nullity)?;
        for (l, kl) in class.type_numbers.iter().enumerate() {
            if *kl == 0 {
                continue;
            }
            let sign = if (class.index + l as i64).rem_euclid(2) == 0 {
                BigRational::one()
            } else {
                -BigRational::one()
            };
            sum += sign * BigRational::from_integer(BigInt::from(*kl));
        }
    }
    Ok(sum * rat(2, 1) / rat(kbar as i64, 1))
}

// ---------------------------------------------------------------------------
// Identity sums.

/// Per-orbit invariants entering the resonance identities.
#[derive(Debug, Clone)]
pub struct OrbitInvariants {
    pub id: String,
    /// Mean index of the periodic problem.
    pub mean_index: Value,
    /// Average Euler characteristic of the periodic problem.
    pub euler_hat: BigRational,
    /// Symmetric data `(mean, euler-hat)` for symmetric orbits.
    pub symmetric: Option<(Value, BigRational)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityId {
    PeriodicPositive,
    PeriodicNegative,
    SymmetricPositive,
    SymmetricNegative,
}

impl IdentityId {
    pub fn target(&self) -> BigRational {
        match self {
            IdentityId::PeriodicPositive => rat(1, 2),
            IdentityId::SymmetricPositive => rat(1, 1),
            _ => BigRational::zero(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            IdentityId::PeriodicPositive => "periodic-positive",
            IdentityId::PeriodicNegative => "periodic-negative",
            IdentityId::SymmetricPositive => "symmetric-positive",
            IdentityId::SymmetricNegative => "symmetric-negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of one identity evaluation.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub id: IdentityId,
    pub target: BigRational,
    pub total: Value,
    /// True when the sum equals the target in exact arithmetic.
    pub exact: bool,
    /// Upper bound on |total - target|.
    pub residual: f64,
    pub verdict: Verdict,
    /// The identities quantify over all prime orbits; false when the caller
    /// could not certify completeness of the orbit set, making the verdict
    /// advisory.
    pub complete_orbit_set: bool,
    pub contributions: Vec<(String, f64)>,
    pub note: Option<String>,
}

/// Evaluates the four resonance identities over the supplied orbit set.
///
/// `symbol` is the float estimate of the shared irrational ratio when any
/// mean index is symbolic; `tolerance` bounds the accepted residual for
/// interval-mode sums (exact sums must hit the target identically).
pub fn identity_sums(
    orbits: &[OrbitInvariants],
    symbol: Option<f64>,
    complete_orbit_set: bool,
    tolerance: f64,
) -> Result<Vec<IdentityReport>> {
    let mut reports = Vec::new();
    for (id, symmetric) in [
        (IdentityId::PeriodicPositive, false),
        (IdentityId::PeriodicNegative, false),
        (IdentityId::SymmetricPositive, true),
        (IdentityId::SymmetricNegative, true),
    ] {
        let positive = matches!(
            id,
            IdentityId::PeriodicPositive | IdentityId::SymmetricPositive
        );
        let mut total = Value::zero();
        let mut contributions = Vec::new();
        let mut any = false;
        for orbit in orbits {
            let (mean, chi) = if symmetric {
                match &orbit.symmetric {
                    Some((m, c)) => (m.clone(), c.clone()),
                    None => continue,
                }
            } else {
                (orbit.mean_index.clone(), orbit.euler_hat.clone())
            };
            let sign = mean.sign(symbol, &orbit.id)?;
            if (positive && sign <= 0) || (!positive && sign >= 0) {
                continue;
            }
            let term = mean.recip_scale(&chi, symbol, &orbit.id)?;
            let mid = term.bounds(symbol);
            contributions.push((orbit.id.clone(), 0.5 * (mid.0 + mid.1)));
            total = total.add(&term, symbol);
            any = true;
        }
        let target = id.target();
        let exact = total.equals_exactly(&target);
        let residual = if exact {
            0.0
        } else {
            total.residual_bound(&target, symbol)
        };
        let pass = exact || residual <= tolerance;
        reports.push(IdentityReport {
            id,
            target,
            total,
            exact,
            residual,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            complete_orbit_set,
            contributions,
            note: if any { None } else { Some("empty sum".into()) },
        });
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// Morse series.

/// Per-orbit data feeding the Morse series.
#[derive(Debug, Clone)]
pub struct MorseOrbitData {
    pub id: String,
    /// Iterate indexer: in periodic mode `index_morse(m)` is `i(y^m)`; in
    /// symmetric mode it must yield `ibar(y^m)` at odd `m`.
    pub formula: IterationFormula,
    /// Type numbers per residue class: entry `r` covers the iterate with
    /// `(m - 1) mod K = r` in periodic mode, or the r-th odd iterate modulo
    /// the class count in symmetric mode.
    pub type_numbers: Vec<Vec<u32>>,
}

impl MorseOrbitData {
    /// Non-degenerate orbit of the periodic problem: `k_0(y^m) = 1` exactly
    /// when `i(y^m) - i(y)` is even (the critical module survives the
    /// iteration twist), else the iterate contributes nothing.
    pub fn nondegenerate(id: &str, formula: IterationFormula) -> Self {
        let base = formula.index_morse(1);
        let jump_even = (formula.index_morse(2) - base) % 2 == 0;
        let type_numbers = if jump_even {
            vec![vec![1u32]]
        } else {
            vec![vec![1u32], vec![0u32]]
        };
        MorseOrbitData {
            id: id.to_string(),
            formula,
            type_numbers,
        }
    }

    /// Non-degenerate symmetric orbit: every odd iterate contributes
    /// `kbar_0 = 1` (odd-iterate index differences are always even).
    pub fn nondegenerate_symmetric(id: &str, formula: IterationFormula) -> Self {
        MorseOrbitData {
            id: id.to_string(),
            formula,
            type_numbers: vec![vec![1u32]],
        }
    }
}

/// Exact coefficients of the normalized Morse series on `[-2N, 2N]`.
///
/// `symmetric` restricts to odd iterates. Orbits with zero mean index would
/// contribute infinitely often inside the window and abort the computation.
pub fn morse_series(
    orbits: &[MorseOrbitData],
    window_n: i64,
    symmetric: bool,
) -> Result<BTreeMap<i64, i64>> {
    let mut coeffs: BTreeMap<i64, i64> = BTreeMap::new();
    let hi = 2 * window_n;
    let lo = -2 * window_n;
    for orbit in orbits {
        let mean = orbit.formula.mean_index().to_f64();
        if mean.abs() < 1e-9 {
            return Err(Error::UnboundedContribution {
                orbit: orbit.id.clone(),
            });
        }
        let mut m: u32 = 1;
        let mut class = 0usize;
        loop {
            let idx = orbit.formula.index_morse(m);
            if (mean > 0.0 && idx > hi + 4) || (mean < 0.0 && idx < lo - 4) {
                break;
            }
            let ks = &orbit.type_numbers[class % orbit.type_numbers.len()];
            for (l, k) in ks.iter().enumerate() {
                if *k == 0 {
                    continue;
                }
                let h = idx + l as i64;
                if h >= lo && h <= hi {
                    *coeffs.entry(h).or_insert(0) += *k as i64;
                }
            }
            class += 1;
            m += if symmetric { 2 } else { 1 };
            if m > 2_000_000 {
                return Err(Error::UnboundedContribution {
                    orbit: orbit.id.clone(),
                });
            }
        }
    }
    Ok(coeffs)
}

/// Result of the Morse-inequality analysis.
#[derive(Debug, Clone)]
pub struct MorseVerdict {
    /// Coefficients of `U(t)` on the checked range.
    pub u_coeffs: BTreeMap<i64, i64>,
    /// First degree at which nonnegativity of `U` fails.
    pub first_violation: Option<i64>,
    /// Direct consequence data at the lowest nonzero coefficient `p < 0`:
    /// `(p, m_p, m_{p+1})`; the inequality demands `m_{p+1} >= m_p`.
    pub lowest_check: Option<(i64, i64, i64)>,
    pub pass: bool,
    /// True when the orbit table was empty and the verdict is vacuous.
    pub vacuous: bool,
    pub note: Option<String>,
}

/// Checks `M(t) - 1/(1-t^2) = (1+t) U(t)` by formal division from the bottom
/// of the window, asserting nonnegativity of `U` inside the trustworthy
/// range, plus the direct `m_{p+1} >= m_p` consequence at the lowest nonzero
/// coefficient.
///
/// The top `safety_margin` degrees of the window are dropped: truncation
/// corrupts them by up to one iterate step.
pub fn morse_inequality_check(
    coeffs: &BTreeMap<i64, i64>,
    window_n: i64,
    safety_margin: i64,
) -> Result<MorseVerdict> {
    if coeffs.values().all(|v| *v == 0) {
        return Ok(MorseVerdict {
            u_coeffs: BTreeMap::new(),
            first_violation: None,
            lowest_check: None,
            pass: true,
            vacuous: true,
            note: Some(
                "empty orbit table: comparison with 1/(1-t^2) is vacuous on the window".into(),
            ),
        });
    }
    let hi = 2 * window_n;
    let lo = -2 * window_n;
    let min_idx = *coeffs.iter().find(|(_, v)| **v != 0).unwrap().0;
    if min_idx <= lo || hi - safety_margin <= 0 {
        return Err(Error::TruncationTooTight {
            reason: format!(
                "window [{lo}, {hi}] cannot hold the orbit contributions \
                 (lowest index {min_idx}, safety margin {safety_margin})"
            ),
        });
    }
    let mut u_coeffs = BTreeMap::new();
    let mut prev_u = 0i64;
    let mut first_violation = None;
    let top = hi - safety_margin;
    for h in lo..=top {
        let m_h = coeffs.get(&h).copied().unwrap_or(0);
        let c_h = m_h - i64::from(h >= 0 && h % 2 == 0);
        let u_h = c_h - prev_u;
        u_coeffs.insert(h, u_h);
        if u_h < 0 && first_violation.is_none() {
            first_violation = Some(h);
        }
        prev_u = u_h;
    }
    let lowest_check = if min_idx < 0 {
        let m_p = coeffs.get(&min_idx).copied().unwrap_or(0);
        let m_p1 = coeffs.get(&(min_idx + 1)).copied().unwrap_or(0);
        Some((min_idx, m_p, m_p1))
    } else {
        None
    };
    let lowest_ok = lowest_check.map_or(true, |(_, m_p, m_p1)| m_p1 >= m_p);
    Ok(MorseVerdict {
        pass: first_violation.is_none() && lowest_ok,
        u_coeffs,
        first_violation,
        lowest_check,
        vacuous: false,
        note: None,
    })
}
