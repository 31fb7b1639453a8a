//! Twisted cochain complexes `g -> g^{2l+n} -> g` at a representation, their
//! parabolic and relative variants, cohomology dimensions, the duality
//! pairing between degrees 0 and 2, and the cup-product form in degree 1.
//!
//! Middle-term coordinates are blocks of `dim g` basis coordinates, one per
//! generator of the free group in [`SurfaceData::group_generators`] order.
//! In the parabolic variant the block of `z_k` is replaced by coordinates in
//! an orthonormal basis `U_k` of `h_k = im(Ad(phi(z_k)) - Id)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie_core::LieGroup;
use crate::linalg::{column_space, max_abs, null_space, numerical_rank, pseudo_inverse};
use crate::scalar::Scalar;
use crate::surface_words::{fox_row, relator, Assignment, BarChain2, Generator, SurfaceData};

/// Relative SVD threshold for ranks.
pub const RANK_TOL: f64 = 1.0e-8;

/// Bound on `|d1 d0|` at points with central relator value.
pub const CC_TOL: f64 = 1.0e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    Absolute,
    Parabolic,
    Relative,
}

#[derive(Debug, Clone)]
pub struct BoundaryDecomposition<T: Scalar> {
    /// Orthonormal bases of `h_k`, as columns.
    pub h: Vec<DMatrix<T>>,
    /// Orthonormal bases of the stabilizer algebras `s_k`, as columns.
    pub s: Vec<DMatrix<T>>,
    /// `Ad(phi(z_k)) - Id` in basis coordinates.
    pub phi: Vec<DMatrix<T>>,
}

impl<T: Scalar> BoundaryDecomposition<T> {
    pub fn dims(&self) -> Vec<(usize, usize)> {
        self.s.iter().zip(&self.h).map(|(s, h)| (s.ncols(), h.ncols())).collect()
    }
}

#[derive(Debug, Clone)]
pub struct TwistedComplex<T: Scalar> {
    pub variant: Variant,
    pub surface: SurfaceData,
    pub dim_g: usize,
    pub d0: DMatrix<T>,
    pub d1: DMatrix<T>,
    /// `|Ad(phi(r)) - Id|`, zero exactly when `phi(r)` is central.
    pub relator_defect: T,
    /// `|d1 d0|`.
    pub cc_residual: T,
    pub boundary: BoundaryDecomposition<T>,
    /// Map from full middle coordinates to this complex's middle coordinates
    /// (identity for the absolute and relative variants).
    pub projection: DMatrix<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CohomologyDims {
    pub h0: usize,
    pub h1: usize,
    pub h2: usize,
}

impl<T: Scalar> TwistedComplex<T> {
    pub fn middle_dim(&self) -> usize {
        self.d0.nrows()
    }

    pub fn is_central(&self) -> bool {
        self.relator_defect.as_f64() < 1.0e-10 * T::TOLERANCE_SCALE
    }

    /// `dim g - middle + dim g`.
    pub fn euler_characteristic(&self) -> i64 {
        2 * self.dim_g as i64 - self.middle_dim() as i64
    }
}

pub fn boundary_decomposition<T: Scalar>(
    group: &LieGroup<T>,
    phi: &Assignment<T>,
    s: &SurfaceData,
) -> Result<BoundaryDecomposition<T>> {
    let d = group.dim();
    let mut out = BoundaryDecomposition {
        h: Vec::new(),
        s: Vec::new(),
        phi: Vec::new(),
    };
    for k in 1..=s.boundaries {
        let m = group.adjoint_matrix(phi.get(Generator::Z(k))?) - DMatrix::<T>::identity(d, d);
        out.h.push(column_space(&m, RANK_TOL));
        out.s.push(null_space(&m, RANK_TOL));
        out.phi.push(m);
    }
    Ok(out)
}

/// The absolute differentials: `d0 X = (X - Ad(phi(g)) X)_g` and `d1` the Fox
/// row of the relator.
pub fn absolute_differentials<T: Scalar>(
    group: &LieGroup<T>,
    phi: &Assignment<T>,
    s: &SurfaceData,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let d = group.dim();
    let gens = s.group_generators();
    let mut d0 = DMatrix::<T>::zeros(d * gens.len(), d);
    for (i, &g) in gens.iter().enumerate() {
        let blk = DMatrix::<T>::identity(d, d) - group.adjoint_matrix(phi.get(g)?);
        d0.view_mut((i * d, 0), (d, d)).copy_from(&blk);
    }
    let d1 = fox_row(group, &relator(s), &gens, phi)?;
    Ok((d0, d1))
}

/// Largest deviation of the absolute differentials from central differences
/// of the orbit map `X -> (exp(X) phi(g) exp(-X))_g` and of the relator map,
/// both read in right-trivialized coordinates.
pub fn diagram_residual<T: Scalar>(group: &LieGroup<T>, phi: &Assignment<T>, s: &SurfaceData, h: f64) -> Result<T> {
    let d = group.dim();
    let gens = s.group_generators();
    let (d0, d1) = absolute_differentials(group, phi, s)?;
    let h = T::lit(h);
    let basis: Vec<_> = (0..d)
        .map(|i| group.from_coords(&DVector::from_fn(d, |j, _| if i == j { T::one() } else { T::zero() })))
        .collect();
    let right = |plus: &crate::lie_core::GroupElement<T>, minus: &crate::lie_core::GroupElement<T>, base: &crate::lie_core::GroupElement<T>| {
        let dm = (&plus.m - &minus.m).map(|z| z / (h + h));
        group.coords(&group.project(&(dm * base.inverse().m)))
    };
    let mut worst = T::zero();
    for (i, x) in basis.iter().enumerate() {
        let (ep, em) = (group.exp(&x.scaled(h)), group.exp(&x.scaled(-h)));
        for (b, &g) in gens.iter().enumerate() {
            let v = phi.get(g)?;
            let plus = &(&ep * v) * &em;
            let minus = &(&em * v) * &ep;
            let col = right(&plus, &minus, v);
            worst = worst.max((col - d0.view((b * d, i), (d, 1))).amax());
        }
    }
    let r = phi.evaluate(&relator(s))?;
    for (b, &g) in gens.iter().enumerate() {
        let v = phi.get(g)?;
        for (i, x) in basis.iter().enumerate() {
            let mut pp = phi.clone();
            pp.set(g, &group.exp(&x.scaled(h)) * v);
            let mut pm = phi.clone();
            pm.set(g, &group.exp(&x.scaled(-h)) * v);
            let col = right(&pp.evaluate(&relator(s))?, &pm.evaluate(&relator(s))?, &r);
            worst = worst.max((col - d1.column(b * d + i)).amax());
        }
    }
    Ok(worst)
}

pub fn build_complex<T: Scalar>(
    group: &LieGroup<T>,
    phi: &Assignment<T>,
    s: &SurfaceData,
    variant: Variant,
) -> Result<TwistedComplex<T>> {
    let d = group.dim();
    let l2 = 2 * s.genus;
    let full = d * (l2 + s.boundaries);
    let (d0_abs, d1_abs) = absolute_differentials(group, phi, s)?;
    let boundary = boundary_decomposition(group, phi, s)?;
    let r_val = phi.evaluate(&relator(s))?;
    let relator_defect = max_abs(&(group.adjoint_matrix(&r_val) - DMatrix::<T>::identity(d, d)));

    let (d0, d1, projection) = match variant {
        Variant::Absolute => (d0_abs, d1_abs, DMatrix::identity(full, full)),
        Variant::Parabolic => {
            let par: usize = l2 * d + boundary.h.iter().map(|h| h.ncols()).sum::<usize>();
            let mut p = DMatrix::<T>::zeros(par, full);
            p.view_mut((0, 0), (l2 * d, l2 * d))
                .copy_from(&DMatrix::identity(l2 * d, l2 * d));
            let mut row = l2 * d;
            for (k, h) in boundary.h.iter().enumerate() {
                let col = (l2 + k) * d;
                p.view_mut((row, col), (h.ncols(), d)).copy_from(&h.transpose());
                row += h.ncols();
            }
            (&p * &d0_abs, &d1_abs * p.transpose(), p)
        }
        Variant::Relative => {
            let mut d0 = d0_abs.clone();
            let mut post = DMatrix::<T>::identity(full, full);
            for (k, m) in boundary.phi.iter().enumerate() {
                let off = (l2 + k) * d;
                d0.view_mut((off, 0), (d, d))
                    .copy_from(&(-DMatrix::<T>::identity(d, d)));
                post.view_mut((off, off), (d, d)).copy_from(m);
            }
            (d0, &d1_abs * post, DMatrix::identity(full, full))
        }
    };
    let cc_residual = if d0.nrows() == 0 {
        T::zero()
    } else {
        max_abs(&(&d1 * &d0))
    };
    Ok(TwistedComplex {
        variant,
        surface: *s,
        dim_g: d,
        d0,
        d1,
        relator_defect,
        cc_residual,
        boundary,
        projection,
    })
}

/// `(h0, h1, h2)` from SVD ranks; fails when singular values cluster at the
/// threshold.
pub fn cohomology_dims<T: Scalar>(k: &TwistedComplex<T>, rel_tol: f64) -> Result<CohomologyDims> {
    let r0 = numerical_rank(&k.d0, rel_tol)?;
    let r1 = numerical_rank(&k.d1, rel_tol)?;
    let m = k.middle_dim();
    Ok(CohomologyDims {
        h0: k.dim_g - r0,
        h1: m - r1 - r0,
        h2: k.dim_g - r1,
    })
}

/// Residual of the factorization `incl o proj = Phi` on each boundary block.
pub fn comparison_residual<T: Scalar>(b: &BoundaryDecomposition<T>) -> T {
    b.h.iter()
        .zip(&b.phi)
        .map(|(u, m)| {
            let proj = u.transpose() * m;
            max_abs(&(u * proj - m))
        })
        .fold(T::zero(), |a, v| a.max(v))
}

/// Orthonormal basis of `H^0 = ker d0`.
pub fn h0_basis<T: Scalar>(k: &TwistedComplex<T>) -> DMatrix<T> {
    null_space(&k.d0, RANK_TOL)
}

/// Orthonormal basis of the orthogonal complement of `im d1` in `g`, the
/// harmonic representatives of `H^2`.
pub fn h2_basis<T: Scalar>(k: &TwistedComplex<T>) -> DMatrix<T> {
    null_space(&k.d1.transpose(), RANK_TOL)
}

/// Matrix of the pairing `H^0 x H^2 -> R`, `pair(X, c(kappa))`, where a
/// 2-cochain is identified with its value on the relator cell.
pub fn duality_pairing_matrix<T: Scalar>(group: &LieGroup<T>, k: &TwistedComplex<T>) -> DMatrix<T> {
    let a = h0_basis(k);
    let b = h2_basis(k);
    (a.transpose() * b) * group.form_scale()
}

/// The duality pairing of an invariant `u` with a 2-cochain `v`.
pub fn duality_pairing<T: Scalar>(
    group: &LieGroup<T>,
    k: &TwistedComplex<T>,
    u: &DVector<T>,
    v: &DVector<T>,
) -> Result<T> {
    for w in [u, v] {
        if w.len() != k.dim_g {
            return Err(Error::DimensionMismatch {
                expected: k.dim_g,
                got: w.len(),
            });
        }
    }
    let q = h2_basis(k);
    let v_harm = &q * (q.transpose() * v);
    Ok(group.form_scale() * u.dot(&v_harm))
}

/// The cup-product form in full middle coordinates (before projection),
/// antisymmetrized:
///
/// `omega(u, v) = sum_cells m pair(u(a), Ad(phi(a)) v(b)) + sum_k pair(M_k^+ u(z_k), v(z_k))`
///
/// with `u(w)` the crossed-homomorphism extension of `u` and
/// `M_k = Ad(phi(z_k)) - Id`.
pub fn cup_form_matrix<T: Scalar>(
    group: &LieGroup<T>,
    phi: &Assignment<T>,
    s: &SurfaceData,
    c: &BarChain2,
) -> Result<DMatrix<T>> {
    let d = group.dim();
    let gens = s.group_generators();
    let full = d * gens.len();
    let mut w = DMatrix::<T>::zeros(full, full);
    for ((a, b), &m) in &c.cells {
        let fa = fox_row(group, a, &gens, phi)?;
        let fb = fox_row(group, b, &gens, phi)?;
        let ad = group.adjoint_matrix(&phi.evaluate(a)?);
        w += fa.transpose() * ad * fb * T::from_i64(m).unwrap();
    }
    let l2 = 2 * s.genus;
    for k in 1..=s.boundaries {
        let mk = group.adjoint_matrix(phi.get(Generator::Z(k))?) - DMatrix::<T>::identity(d, d);
        let pinv = pseudo_inverse(&mk, RANK_TOL);
        let off = (l2 + k - 1) * d;
        let mut blk = w.view_mut((off, off), (d, d));
        blk += pinv.transpose();
    }
    w *= group.form_scale();
    Ok((&w - w.transpose()) * T::lit(0.5))
}

/// The degree-one cohomology with its symplectic form.
#[derive(Debug, Clone)]
pub struct H1Data<T: Scalar> {
    /// Cocycle representatives orthogonal to the coboundaries, as columns
    /// in the complex's middle coordinates.
    pub basis: DMatrix<T>,
    /// The form on middle coordinates of the parabolic complex.
    pub form: DMatrix<T>,
    /// `basis^T form basis`.
    pub omega: DMatrix<T>,
}

/// Harmonic representatives of `H^1`: null space of `[d1; d0^T]`.
pub fn h1_basis<T: Scalar>(k: &TwistedComplex<T>) -> DMatrix<T> {
    let m = k.middle_dim();
    let rows = k.d1.nrows() + k.d0.ncols();
    let mut stacked = DMatrix::<T>::zeros(rows, m);
    stacked.view_mut((0, 0), (k.d1.nrows(), m)).copy_from(&k.d1);
    stacked
        .view_mut((k.d1.nrows(), 0), (k.d0.ncols(), m))
        .copy_from(&k.d0.transpose());
    let mut b = null_space(&stacked, RANK_TOL);
    for j in 0..b.ncols() {
        crate::linalg::fix_sign(&mut b, j);
    }
    b
}

pub fn parabolic_h1<T: Scalar>(
    group: &LieGroup<T>,
    phi: &Assignment<T>,
    k: &TwistedComplex<T>,
    c: &BarChain2,
) -> Result<H1Data<T>> {
    let w = cup_form_matrix(group, phi, &k.surface, c)?;
    let form = &k.projection * w * k.projection.transpose();
    let basis = h1_basis(k);
    let omega = basis.transpose() * &form * &basis;
    Ok(H1Data { basis, form, omega })
}

/// `omega(u, v)` for parabolic 1-cocycles given in parabolic middle coordinates.
pub fn parabolic_symplectic_form<T: Scalar>(
    group: &LieGroup<T>,
    phi: &Assignment<T>,
    k: &TwistedComplex<T>,
    c: &BarChain2,
    u: &DVector<T>,
    v: &DVector<T>,
) -> Result<T> {
    let tol = T::lit(1.0e-8 * T::TOLERANCE_SCALE);
    for w in [u, v] {
        if w.len() != k.middle_dim() {
            return Err(Error::DimensionMismatch {
                expected: k.middle_dim(),
                got: w.len(),
            });
        }
        let res = (&k.d1 * w).amax();
        if res > tol {
            return Err(Error::NotACocycle {
                residual: res.as_f64(),
            });
        }
    }
    let w = cup_form_matrix(group, phi, &k.surface, c)?;
    let form = &k.projection * w * k.projection.transpose();
    Ok(u.dot(&(form * v)))
}
