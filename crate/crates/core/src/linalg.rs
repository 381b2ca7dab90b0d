//! Symplectic linear algebra helpers on dynamically sized matrices.
//!
//! Coordinates are ordered pairwise `(q_1, p_1, q_2, p_2, ...)`, so the
//! standard structure matrix `J` is the direct sum of 2x2 rotation generators.
//! Every invariant plane of a block-diagonal monodromy is then a pair of
//! consecutive coordinates.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{Complex, DMatrix, DVector};

/// Modulus of a generic complex scalar.
pub fn cmod<T: Scalar>(z: &Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// Conjugate of a generic complex scalar.
pub fn cconj<T: Scalar>(z: &Complex<T>) -> Complex<T> {
    Complex::new(z.re, -z.im)
}

/// Structure matrix `J` as a direct sum of `[[0,-1],[1,0]]` blocks.
pub fn structure_j<T: Scalar>(dim: usize) -> DMatrix<T> {
    assert!(dim % 2 == 0, "symplectic dimension must be even");
    let mut j = DMatrix::zeros(dim, dim);
    for k in 0..dim / 2 {
        j[(2 * k, 2 * k + 1)] = -T::one();
        j[(2 * k + 1, 2 * k)] = T::one();
    }
    j
}

/// Max-abs entry of `M^T J M - J`.
pub fn symplectic_defect<T: Scalar>(m: &DMatrix<T>) -> T {
    let j = structure_j::<T>(m.nrows());
    let d = m.transpose() * &j * m - &j;
    d.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

/// Errors unless `M` is symplectic to the given tolerance.
pub fn require_symplectic<T: Scalar>(m: &DMatrix<T>, tol: T) -> Result<()> {
    let defect = symplectic_defect(m);
    if defect > tol {
        return Err(Error::NotSymplectic {
            defect: defect.to64(),
            tol: tol.to64(),
        });
    }
    Ok(())
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    let norm = a.iter().fold(T::zero(), |acc, &x| acc.max(x.abs())) * T::of(n as f64);
    let mut squarings = 0u32;
    let mut scale = T::one();
    while norm * scale > T::of(0.25) && squarings < 40 {
        scale *= T::of(0.5);
        squarings += 1;
    }
    let b = a * scale;
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..=16 {
        term = &term * &b / T::of(k as f64);
        sum += &term;
    }
    let mut result = sum;
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Principal logarithm of a matrix near the identity.
///
/// Uses the Gregory series `log A = 2 sum_{k odd} Z^k / k` with
/// `Z = (A - I)(A + I)^{-1}`, which converges quickly when `||A - I||` is
/// small; callers must keep transition matrices close to the identity.
pub fn logm_near_identity<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    let id = DMatrix::<T>::identity(n, n);
    let denom = (a + &id)
        .try_inverse()
        .ok_or_else(|| Error::AmbiguousCase {
            reason: "matrix logarithm: A + I singular".into(),
        })?;
    let z = (a - &id) * denom;
    let znorm = z.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
    if znorm.to64() > 0.6 {
        return Err(Error::AmbiguousCase {
            reason: format!("matrix logarithm out of range (|Z| = {:.3e})", znorm.to64()),
        });
    }
    let z2 = &z * &z;
    let mut power = z.clone();
    let mut sum = DMatrix::zeros(n, n);
    for k in 0..24 {
        let coeff = T::of(2.0 / (2.0 * k as f64 + 1.0));
        sum += &power * coeff;
        power = &power * &z2;
        let pnorm = power.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
        if pnorm < T::of(1e-300) {
            break;
        }
    }
    Ok(sum)
}

/// Projects a matrix onto the symplectic Lie algebra `sp(2n)`.
///
/// `X` lies in `sp(2n)` iff `J X` is symmetric; the projection symmetrizes
/// `J X` and maps back.
pub fn project_sp<T: Scalar>(x: &DMatrix<T>) -> DMatrix<T> {
    let j = structure_j::<T>(x.nrows());
    let jx = &j * x;
    let sym = (&jx + jx.transpose()) * T::of(0.5);
    -(&j * sym)
}

/// Generator `A` of a Hamiltonian transition `gamma' = J A gamma`, i.e.
/// `A = -J L` for `L` in `sp(2n)`. Output is symmetrized.
pub fn generator_from_sp<T: Scalar>(l: &DMatrix<T>) -> DMatrix<T> {
    let j = structure_j::<T>(l.nrows());
    let a = -(&j * l);
    (&a + a.transpose()) * T::of(0.5)
}

/// Complex eigenvalues of a real matrix.
pub fn complex_eigenvalues<T: Scalar>(m: &DMatrix<T>) -> Vec<Complex<T>> {
    m.clone().complex_eigenvalues().iter().copied().collect()
}

/// Orthonormal basis of the complex kernel of `M - omega I`, together with
/// the singular values that were treated as zero.
pub fn omega_kernel<T: Scalar>(
    m: &DMatrix<T>,
    omega: Complex<T>,
    tol: T,
) -> (Vec<DVector<Complex<T>>>, Vec<T>) {
    let n = m.nrows();
    let mut mc = DMatrix::<Complex<T>>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            mc[(i, j)] = Complex::new(m[(i, j)], T::zero());
        }
        mc[(i, i)] -= omega;
    }
    let svd = mc.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut kernel = Vec::new();
    let mut small = Vec::new();
    for (idx, sv) in svd.singular_values.iter().enumerate() {
        if *sv < tol {
            small.push(*sv);
            kernel.push(v_t.row(idx).transpose().map(|z| cconj(&z)));
        }
    }
    (kernel, small)
}

/// Dimension of `ker(M - omega I)` for real `omega = +-1`.
pub fn real_omega_nullity<T: Scalar>(m: &DMatrix<T>, omega: T, tol: T) -> usize {
    let n = m.nrows();
    let shifted = m - DMatrix::<T>::identity(n, n) * omega;
    let svd = shifted.svd(false, false);
    svd.singular_values.iter().filter(|s| **s < tol).count()
}

/// Signature data of a Hermitian form restricted to a kernel basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormSignature {
    pub positive: usize,
    pub negative: usize,
    pub null: usize,
}

impl FormSignature {
    pub fn signature(&self) -> i64 {
        self.positive as i64 - self.negative as i64
    }
    pub fn is_degenerate(&self) -> bool {
        self.null > 0
    }
}

/// Signature of `v -> v^H A v` on the span of `basis` (complex vectors).
///
/// The Hermitian form is diagonalized through its real embedding; eigenvalues
/// within `tol` of zero relative to the largest are reported as null.
pub fn restricted_form_signature<T: Scalar>(
    a: &DMatrix<T>,
    basis: &[DVector<Complex<T>>],
    tol: T,
) -> FormSignature {
    let d = basis.len();
    if d == 0 {
        return FormSignature {
            positive: 0,
            negative: 0,
            null: 0,
        };
    }
    let n = a.nrows();
    let ac = DMatrix::<Complex<T>>::from_fn(n, n, |i, j| Complex::new(a[(i, j)], T::zero()));
    let mut form = DMatrix::<Complex<T>>::zeros(d, d);
    for i in 0..d {
        let avj: Vec<DVector<Complex<T>>> = basis.iter().map(|v| &ac * v).collect();
        for j in 0..d {
            form[(i, j)] = basis[i].map(|z| cconj(&z)).dot(&avj[j]);
        }
    }
    // Real embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix is symmetric
    // with doubled eigenvalues.
    let mut emb = DMatrix::<T>::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            emb[(i, j)] = form[(i, j)].re;
            emb[(i + d, j + d)] = form[(i, j)].re;
            emb[(i, j + d)] = -form[(i, j)].im;
            emb[(i + d, j)] = form[(i, j)].im;
        }
    }
    let emb = (&emb + emb.transpose()) * T::of(0.5);
    let eig = emb.symmetric_eigen();
    let scale = eig
        .eigenvalues
        .iter()
        .fold(T::one(), |acc, &x| acc.max(x.abs()));
    let mut positive = 0;
    let mut negative = 0;
    let mut null = 0;
    for &lambda in eig.eigenvalues.iter() {
        if lambda.abs() < tol * scale {
            null += 1;
        } else if lambda > T::zero() {
            positive += 1;
        } else {
            negative += 1;
        }
    }
    FormSignature {
        positive: positive / 2,
        negative: negative / 2,
        null: null / 2,
    }
}

/// Signature of the real symmetric form `v -> v^T A v` on all of `R^{2n}`.
pub fn full_form_signature<T: Scalar>(a: &DMatrix<T>, tol: T) -> FormSignature {
    let sym = (a + a.transpose()) * T::of(0.5);
    let eig = sym.symmetric_eigen();
    let scale = eig
        .eigenvalues
        .iter()
        .fold(T::one(), |acc, &x| acc.max(x.abs()));
    let mut positive = 0;
    let mut negative = 0;
    let mut null = 0;
    for &lambda in eig.eigenvalues.iter() {
        if lambda.abs() < tol * scale {
            null += 1;
        } else if lambda > T::zero() {
            positive += 1;
        } else {
            negative += 1;
        }
    }
    FormSignature {
        positive,
        negative,
        null,
    }
}
