//! Dense real linear-algebra helpers built on nalgebra's SVD.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Absolute floor below which singular values are always treated as zero.
pub const ABSOLUTE_RANK_FLOOR: f64 = 1.0e-12;

/// Full SVD with singular values sorted in descending order.
///
/// Returns `(u, s, v)` with `u` of size m×m, `v` of size n×n, and `s` of
/// length min(m, n), so `a = u[:, ..k] * diag(s) * v[:, ..k]^T`.
pub fn full_svd<T: Scalar>(a: &DMatrix<T>) -> (DMatrix<T>, Vec<T>, DMatrix<T>) {
    let (m, n) = a.shape();
    let k = m.max(n);
    if k == 0 {
        return (DMatrix::zeros(m, m), Vec::new(), DMatrix::zeros(n, n));
    }
    // Pad to a square matrix so the thin SVD is a full one.
    let mut sq = DMatrix::<T>::zeros(k, k);
    sq.view_mut((0, 0), (m, n)).copy_from(a);
    let (u, singular_values, vt) = checked_svd(&sq);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        singular_values[j]
            .partial_cmp(&singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut u_sorted = DMatrix::<T>::zeros(k, k);
    let mut v_sorted = DMatrix::<T>::zeros(k, k);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        v_sorted.set_column(dst, &vt.row(src).transpose());
        s.push(singular_values[src]);
    }
    s.truncate(m.min(n));
    // The padded rows/columns only ever contribute zero singular values, so
    // the leading blocks are the SVD factors of `a`.
    let u_out = orthonormal_completion(&u_sorted.view((0, 0), (m, k)).into_owned(), m);
    let v_out = orthonormal_completion(&v_sorted.view((0, 0), (n, k)).into_owned(), n);
    (u_out, s, v_out)
}

/// One-sided Jacobi is the primary method; nalgebra's bidiagonal QR
/// iteration can stop on an inaccurate factorization when singular values
/// come in close pairs, which happens for every `Ad(g) - Id` on SU(3). The
/// result is checked against `a`, and the QR route is only a fallback.
fn checked_svd<T: Scalar>(a: &DMatrix<T>) -> (DMatrix<T>, DVector<T>, DMatrix<T>) {
    let accept = T::lit(1.0e-13) * max_abs(a).max(T::one());
    let residual = |(u, s, vt): &(DMatrix<T>, DVector<T>, DMatrix<T>)| max_abs(&(u * DMatrix::from_diagonal(s) * vt - a));
    let jacobi = jacobi_svd(a);
    let mut best_err = residual(&jacobi);
    let mut best = jacobi;
    if best_err <= accept {
        return best;
    }
    for eps in [T::default_epsilon(), T::lit(1.0e-15)] {
        let Some(svd) = a.clone().try_svd(true, true, eps, 10_000) else { continue };
        let parts = (svd.u.expect("u requested"), svd.singular_values, svd.v_t.expect("v_t requested"));
        let err = residual(&parts);
        if err < best_err {
            best_err = err;
            best = parts;
        }
    }
    best
}

/// One-sided Jacobi SVD of a square matrix: rotates column pairs of `a` until
/// they are mutually orthogonal, accumulating the rotations in `v`.
fn jacobi_svd<T: Scalar>(a: &DMatrix<T>) -> (DMatrix<T>, DVector<T>, DMatrix<T>) {
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::<T>::identity(n, n);
    let tol = T::lit(1.0e-15);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma.abs() <= tol * (alpha * beta).sqrt() || gamma == T::zero() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let sn = c * t;
                for m in [&mut w, &mut v] {
                    for i in 0..m.nrows() {
                        let (x, y) = (m[(i, p)], m[(i, q)]);
                        m[(i, p)] = c * x - sn * y;
                        m[(i, q)] = sn * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let s = DVector::from_fn(n, |j, _| w.column(j).norm());
    let floor = T::lit(1.0e-300);
    let mut cols = DMatrix::<T>::zeros(n, 2 * n);
    let mut kept = 0;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).unwrap_or(std::cmp::Ordering::Equal));
    let mut s_sorted = Vec::with_capacity(n);
    let mut v_sorted = DMatrix::<T>::zeros(n, n);
    for (dst, &j) in order.iter().enumerate() {
        v_sorted.set_column(dst, &v.column(j));
        s_sorted.push(s[j]);
        if s[j] > floor {
            cols.set_column(kept, &(w.column(j) / s[j]));
            kept += 1;
        }
    }
    // Null directions of `a` get an arbitrary orthonormal complement in `u`.
    cols.view_mut((0, kept), (n, n)).copy_from(&DMatrix::identity(n, n));
    let u = orthonormal_completion(&cols.columns(0, kept + n).into_owned(), n);
    (u, DVector::from_vec(s_sorted), v_sorted.transpose())
}

/// Picks `dim` orthonormal columns spanning the row-truncated factor.
fn orthonormal_completion<T: Scalar>(cols: &DMatrix<T>, dim: usize) -> DMatrix<T> {
    // `cols` is dim×k with k ≥ dim and orthonormal rows (it is a row block of
    // an orthogonal matrix); its column space is all of R^dim. Gram–Schmidt
    // over the columns in order keeps the sorted leading directions.
    let mut out: Vec<DVector<T>> = Vec::with_capacity(dim);
    for j in 0..cols.ncols() {
        if out.len() == dim {
            break;
        }
        let mut v = cols.column(j).into_owned();
        for q in &out {
            let p = q.dot(&v);
            v -= q * p;
        }
        for q in &out {
            let p = q.dot(&v);
            v -= q * p;
        }
        let nv = v.norm();
        if nv > T::lit(1.0e-8) {
            out.push(v / nv);
        }
    }
    DMatrix::from_columns(&out)
}

/// Rank threshold: `rel * sigma_max`, floored at [`ABSOLUTE_RANK_FLOOR`].
pub fn rank_threshold<T: Scalar>(singular: &[T], rel: f64) -> T {
    let smax = singular.iter().copied().fold(T::zero(), |a, b| a.max(b));
    (smax * T::lit(rel)).max(T::lit(ABSOLUTE_RANK_FLOOR * T::TOLERANCE_SCALE))
}

/// Numerical rank. Fails with `IllConditioned` when a singular value sits
/// within two decades of the threshold on either side.
pub fn numerical_rank<T: Scalar>(a: &DMatrix<T>, rel: f64) -> Result<usize> {
    let (_, s, _) = full_svd(a);
    let tol = rank_threshold(&s, rel);
    let lo = tol * T::lit(1.0e-2);
    let hi = tol * T::lit(1.0e2);
    for &v in &s {
        if v > lo && v < hi {
            return Err(Error::IllConditioned {
                value: v.as_f64(),
                tol: tol.as_f64(),
            });
        }
    }
    Ok(s.iter().filter(|&&v| v > tol).count())
}

/// Numerical rank without the conditioning check.
pub fn rank_unchecked<T: Scalar>(a: &DMatrix<T>, rel: f64) -> usize {
    let (_, s, _) = full_svd(a);
    let tol = rank_threshold(&s, rel);
    s.iter().filter(|&&v| v > tol).count()
}

/// Orthonormal basis of the null space, as columns.
pub fn null_space<T: Scalar>(a: &DMatrix<T>, rel: f64) -> DMatrix<T> {
    let n = a.ncols();
    let (_, s, v) = full_svd(a);
    let tol = rank_threshold(&s, rel);
    let r = s.iter().filter(|&&x| x > tol).count();
    v.columns(r, n - r).into_owned()
}

/// Orthonormal basis of the column space, as columns.
pub fn column_space<T: Scalar>(a: &DMatrix<T>, rel: f64) -> DMatrix<T> {
    let (u, s, _) = full_svd(a);
    let tol = rank_threshold(&s, rel);
    let r = s.iter().filter(|&&x| x > tol).count();
    let mut basis = u.columns(0, r).into_owned();
    for j in 0..r {
        fix_sign(&mut basis, j);
    }
    basis
}

/// Makes the first entry of largest magnitude in column `j` positive.
pub fn fix_sign<T: Scalar>(m: &mut DMatrix<T>, j: usize) {
    let col = m.column(j);
    let mut best = 0;
    let mut best_abs = T::zero();
    for i in 0..col.len() {
        let a = col[i].abs();
        if a > best_abs * T::lit(1.0 + 1.0e-9) {
            best = i;
            best_abs = a;
        }
    }
    if col[best] < T::zero() {
        m.column_mut(j).neg_mut();
    }
}

/// Moore–Penrose pseudo-inverse.
pub fn pseudo_inverse<T: Scalar>(a: &DMatrix<T>, rel: f64) -> DMatrix<T> {
    let (m, n) = a.shape();
    let (u, s, v) = full_svd(a);
    let tol = rank_threshold(&s, rel);
    let mut out = DMatrix::<T>::zeros(n, m);
    for (i, &sv) in s.iter().enumerate() {
        if sv > tol {
            out += v.column(i) * u.column(i).transpose() / sv;
        }
    }
    out
}

/// Largest absolute entry.
pub fn max_abs<T: Scalar>(a: &DMatrix<T>) -> T {
    a.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Applies `f` to a real skew-symmetric matrix through the eigendecomposition
/// of the Hermitian matrix `i * a`. Returns the real part of `f(a)`.
pub fn skew_spectral_function<T, F>(a: &DMatrix<T>, f: F) -> DMatrix<T>
where
    T: Scalar,
    F: Fn(Complex<T>) -> Complex<T>,
{
    let (vecs, vals) = skew_eigen(a);
    apply_skew_spectrum(&vecs, &vals, f)
}

/// Eigendecomposition of a real skew-symmetric matrix: `a = V diag(-i mu) V^*`.
pub fn skew_eigen<T: Scalar>(a: &DMatrix<T>) -> (DMatrix<Complex<T>>, Vec<T>) {
    let n = a.nrows();
    let h = DMatrix::<Complex<T>>::from_fn(n, n, |i, j| {
        // i * a, symmetrized against round-off.
        let v = (a[(i, j)] - a[(j, i)]) * T::lit(0.5);
        Complex::new(T::zero(), v)
    });
    let eig = h.symmetric_eigen();
    let vals = eig.eigenvalues.iter().copied().collect();
    (eig.eigenvectors, vals)
}

pub fn apply_skew_spectrum<T, F>(vecs: &DMatrix<Complex<T>>, mu: &[T], f: F) -> DMatrix<T>
where
    T: Scalar,
    F: Fn(Complex<T>) -> Complex<T>,
{
    let n = vecs.nrows();
    let mut d = DMatrix::<Complex<T>>::zeros(n, n);
    for (k, &m) in mu.iter().enumerate() {
        // eigenvalue of a is -i * mu
        d[(k, k)] = f(Complex::new(T::zero(), -m));
    }
    let full = vecs * d * vecs.adjoint();
    full.map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_reconstructs_paired_spectra() {
        // Ad(C) - Id for C in SU(3) has singular values in close pairs.
        use crate::lie_core::{LieGroup, LieGroupSpec};
        use rand::SeedableRng;
        let g = LieGroup::<f64>::new(LieGroupSpec::su(3).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let m = g.adjoint_matrix(&g.random_element(&mut rng)) - DMatrix::<f64>::identity(8, 8);
            let (u, s, v) = full_svd(&m);
            let rec = &u * DMatrix::from_diagonal(&DVector::from_vec(s)) * v.transpose();
            assert!(max_abs(&(rec - &m)) < 1e-13);
            assert!(max_abs(&(u.transpose() * &u - DMatrix::identity(8, 8))) < 1e-13);
            assert!(max_abs(&(v.transpose() * &v - DMatrix::identity(8, 8))) < 1e-13);
        }
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let a = DMatrix::<f64>::from_row_slice(2, 4, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        let ns = null_space(&a, 1e-8);
        assert_eq!(ns.ncols(), 2);
        assert!(max_abs(&(&a * &ns)) < 1e-12);
        let gram = ns.transpose() * &ns;
        assert!(max_abs(&(gram - DMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn rank_and_conditioning() {
        let a = DMatrix::<f64>::from_diagonal(&DVector::from_vec(vec![1.0, 1e-3, 0.0]));
        assert_eq!(numerical_rank(&a, 1e-8).unwrap(), 2);
        let b = DMatrix::<f64>::from_diagonal(&DVector::from_vec(vec![1.0, 1e-8]));
        assert!(matches!(numerical_rank(&b, 1e-8), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn pseudo_inverse_of_projection() {
        let a = DMatrix::<f64>::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let p = pseudo_inverse(&a, 1e-8);
        assert!(max_abs(&(&a * &p * &a - &a)) < 1e-12);
    }

    #[test]
    fn spectral_exp_matches_rotation() {
        let t = 0.7_f64;
        let a = DMatrix::<f64>::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let e = skew_spectral_function(&a, |z| z.exp());
        assert!((e[(0, 0)] - t.cos()).abs() < 1e-13);
        assert!((e[(1, 0)] - t.sin()).abs() < 1e-13);
    }
}
