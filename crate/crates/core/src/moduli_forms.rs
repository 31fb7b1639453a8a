//! The extended moduli space of a bordered surface, its closed 2-form and
//! momentum maps, and the reduction to spaces with prescribed boundary
//! classes.
//!
//! Points are groupoid assignments `phi~` on `x_j, y_j, a_k, gamma_k` together
//! with lifts `X_0, ..., X_n` satisfying `exp(X_0) = phi~(r~)` and
//! `exp(X_k) = phi~(a_k)`. Tangent vectors carry one right-trivialized
//! element of g per groupoid generator (`xi_g = d phi~(g) phi~(g)^-1`) and the
//! lift velocities `X_j'`.
//!
//! All matrices act on basis coordinates; the groupoid coordinates are laid
//! out in [`SurfaceData::groupoid_generators`] order, `dim g` entries each.

use nalgebra::{DMatrix, DVector};
use nalgebra::Complex;
use rand::Rng;
use serde::Serialize;

use crate::cartan_alcove::TorusPoint;
use crate::conventions::Conventions;
use crate::error::{Error, Result};
use crate::lie_core::{AlgebraElement, GroupElement, LieGroup};
use crate::linalg::{column_space, max_abs, null_space, numerical_rank, pseudo_inverse, rank_unchecked};
use crate::quadrature::integrate;
use crate::numdiff::ridders;
use crate::scalar::Scalar;
use crate::surface_words::{
    build_chain_c, build_chain_c_tilde, fox_row, groupoid_inclusion, relator, relator_tilde, restrict, Assignment,
    BarChain2, Generator, SurfaceData,
};
use crate::twisted_cohomology::{build_complex, cohomology_dims, Variant, RANK_TOL};

/// Absolute tolerance of the beta quadrature.
pub const BETA_QUAD_TOL: f64 = 1.0e-10;
/// Initial step of the Ridders tableau used for exterior derivatives and the
/// momentum check.
pub const FD_STEP: f64 = 1.0e-2;

/// `sigma [pair(Ad(a)^-1 xi1, eta2) - pair(Ad(a)^-1 xi2, eta1)]` for tangents
/// `(xi_i, eta_i)` at `(a, b)`, right-trivialized.
pub fn mc_two_form<T: Scalar>(
    group: &LieGroup<T>,
    conv: &Conventions,
    a: &GroupElement<T>,
    v: (&AlgebraElement<T>, &AlgebraElement<T>),
    w: (&AlgebraElement<T>, &AlgebraElement<T>),
) -> T {
    let ai = a.inverse();
    let first = group.pair(&group.adjoint(&ai, v.0), w.1);
    let second = group.pair(&group.adjoint(&ai, w.0), v.1);
    T::lit(conv.sigma) * (first - second)
}

/// The bi-invariant 3-form at `g` on right-trivialized tangents.
pub fn lambda_form<T: Scalar>(
    group: &LieGroup<T>,
    conv: &Conventions,
    g: &GroupElement<T>,
    xi: &AlgebraElement<T>,
    eta: &AlgebraElement<T>,
    zeta: &AlgebraElement<T>,
) -> T {
    let gi = g.inverse();
    let (a, b, c) = (group.adjoint(&gi, xi), group.adjoint(&gi, eta), group.adjoint(&gi, zeta));
    T::lit(conv.kappa) * group.pair(&a, &group.bracket(&b, &c))
}

/// `lambda` on basis coordinates.
fn lambda_coords<T: Scalar>(group: &LieGroup<T>, conv: &Conventions, a: &DVector<T>, b: &DVector<T>, c: &DVector<T>) -> T {
    let (a, b, c) = (group.from_coords(a), group.from_coords(b), group.from_coords(c));
    T::lit(conv.kappa) * group.pair(&a, &group.bracket(&b, &c))
}

/// Matrix of `beta_X` on basis coordinates:
/// `beta_X(Y, Z) = kappa int_0^1 t^2 pair(X, [L_t Y, L_t Z]) dt` with `L_t` the
/// left-trivialized derivative of exp at `tX`.
pub fn beta_matrix<T: Scalar>(group: &LieGroup<T>, conv: &Conventions, x: &AlgebraElement<T>) -> Result<DMatrix<T>> {
    let a = group.ad_matrix(x);
    let k = -T::lit(conv.kappa) * group.form_scale();
    let q = integrate(
        |t: T| {
            let l = group.dexp_left_matrix(&x.scaled(t));
            (l.transpose() * &a * &l) * (t * t * k)
        },
        0.0,
        1.0,
        BETA_QUAD_TOL * T::TOLERANCE_SCALE,
    )?;
    Ok(q.value)
}

pub fn beta_form<T: Scalar>(
    group: &LieGroup<T>,
    conv: &Conventions,
    x: &AlgebraElement<T>,
    y: &AlgebraElement<T>,
    z: &AlgebraElement<T>,
) -> Result<T> {
    let b = beta_matrix(group, conv, x)?;
    Ok(group.coords(y).dot(&(b * group.coords(z))))
}

/// Kirillov form at `X` on orbit tangents `Y1, Y2 in im ad(X)`:
/// `omega_X(ad_u X, ad_v X) = 2 kappa pair(X, [u, v])`.
pub fn kirillov_form<T: Scalar>(
    group: &LieGroup<T>,
    conv: &Conventions,
    x: &AlgebraElement<T>,
    y1: &DVector<T>,
    y2: &DVector<T>,
) -> T {
    y1.dot(&(kirillov_matrix(group, conv, x) * y2))
}

/// Matrix of the Kirillov form: `s_K * scale * ad(X)^+`.
pub fn kirillov_matrix<T: Scalar>(group: &LieGroup<T>, conv: &Conventions, x: &AlgebraElement<T>) -> DMatrix<T> {
    pseudo_inverse(&group.ad_matrix(x), RANK_TOL) * (T::lit(conv.kirillov_sign()) * group.form_scale())
}

/// Matrix of the class form `tau` at `C` on right-trivialized tangents
/// `zeta in im(Id - Ad C)`.
pub fn tau_matrix<T: Scalar>(group: &LieGroup<T>, conv: &Conventions, c: &GroupElement<T>) -> DMatrix<T> {
    let d = group.dim();
    let z = group.adjoint_matrix(c);
    let m = DMatrix::<T>::identity(d, d) - &z;
    let mp = pseudo_inverse(&m, RANK_TOL);
    let core = z.transpose() - &z;
    mp.transpose() * core * mp * (T::lit(0.5 * conv.tau_sign()) * group.form_scale())
}

/// Sorted (descending) eigenvalues of `-i X / 2 pi`.
pub fn algebra_spectrum<T: Scalar>(x: &AlgebraElement<T>) -> Vec<T> {
    let h = x.x.map(|z| Complex::new(z.im, -z.re));
    let h = (&h + h.adjoint()).map(|z| z * T::lit(0.5));
    let mut ev: Vec<T> = h
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&v| v / T::lit(2.0 * std::f64::consts::PI))
        .collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// A point of the extended moduli space.
#[derive(Debug, Clone)]
pub struct ExtendedPoint<T: Scalar> {
    pub surface: SurfaceData,
    pub phi: Assignment<T>,
    /// `X_0, X_1, ..., X_n`.
    pub lifts: Vec<AlgebraElement<T>>,
}

impl<T: Scalar> ExtendedPoint<T> {
    /// Lifts through the logarithm on O. `NotInB` if a value has no such lift.
    pub fn from_assignment(group: &LieGroup<T>, s: &SurfaceData, phi: Assignment<T>) -> Result<Self> {
        let mut lifts = vec![group.log(&phi.evaluate(&relator_tilde(s))?)?];
        for k in 1..=s.boundaries {
            lifts.push(group.log(phi.get(Generator::A(k))?)?);
        }
        Ok(Self {
            surface: *s,
            phi,
            lifts,
        })
    }

    /// The point with every generator sent to the identity.
    pub fn trivial(group: &LieGroup<T>, s: &SurfaceData) -> Self {
        let phi = Assignment::new(s.groupoid_generators().into_iter().map(|g| (g, group.identity())));
        Self {
            surface: *s,
            phi,
            lifts: vec![group.zero(); s.boundaries + 1],
        }
    }

    /// Largest deviation in `exp(X_0) = phi~(r~)`, `exp(X_k) = phi~(a_k)`.
    pub fn constraint_residual(&self, group: &LieGroup<T>) -> Result<T> {
        let mut worst = group
            .exp(&self.lifts[0])
            .distance(&self.phi.evaluate(&relator_tilde(&self.surface))?);
        for k in 1..=self.surface.boundaries {
            worst = worst.max(group.exp(&self.lifts[k]).distance(self.phi.get(Generator::A(k))?));
        }
        Ok(worst)
    }

    /// The action of `G^{n+1}`: `theta[j]` acts at the object `p_j`.
    pub fn act(&self, group: &LieGroup<T>, theta: &[GroupElement<T>]) -> Self {
        Self {
            surface: self.surface,
            phi: crate::surface_words::groupoid_action(theta, &self.phi),
            lifts: self
                .lifts
                .iter()
                .zip(theta)
                .map(|(x, t)| group.adjoint(t, x))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T: Scalar> {
    /// Right-trivialized generator tangents in groupoid-generator order.
    pub xi: DVector<T>,
    /// `X_0', ..., X_n'` in basis coordinates.
    pub lifts: Vec<DVector<T>>,
}

/// Adjoint-orbit representatives for the boundary lifts.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTuple<T: Scalar> {
    pub reps: Vec<TorusPoint<T>>,
}

impl<T: Scalar> OrbitTuple<T> {
    pub fn representative(&self, group: &LieGroup<T>, k: usize) -> AlgebraElement<T> {
        group.torus_element(&self.reps[k - 1].nu)
    }

    /// Distance between the spectra of `x` and of the `k`-th representative.
    pub fn distance(&self, group: &LieGroup<T>, k: usize, x: &AlgebraElement<T>) -> T {
        let rep = self.representative(group, k);
        if group.spec().is_so3() {
            return (group.so3_angle(x) - group.so3_angle(&rep)).abs();
        }
        algebra_spectrum(x)
            .iter()
            .zip(algebra_spectrum(&rep))
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - b).abs()))
    }

}

impl<T: Scalar + crate::scalar::AlcoveCoord> OrbitTuple<T> {
    /// The orbits through the boundary lifts of `p`.
    pub fn through(group: &LieGroup<T>, p: &ExtendedPoint<T>) -> Result<Self> {
        let mut reps = Vec::new();
        for x in &p.lifts[1..] {
            let nu = if group.spec().is_so3() {
                let v = group.so3_angle(x) / T::lit(4.0 * std::f64::consts::PI);
                vec![v, -v]
            } else {
                algebra_spectrum(x)
            };
            reps.push(TorusPoint::new(group.spec().family, nu)?);
        }
        Ok(Self { reps })
    }
}

/// The forms of the extended moduli space for one surface and one chain `c~`.
#[derive(Debug, Clone)]
pub struct ExtendedForms<'a, T: Scalar> {
    pub group: &'a LieGroup<T>,
    pub conv: Conventions,
    pub surface: SurfaceData,
    /// The group-level chain `c`.
    pub c: BarChain2,
    pub c_tilde: BarChain2,
    gens: Vec<Generator>,
}

impl<'a, T: Scalar> ExtendedForms<'a, T> {
    pub fn new(group: &'a LieGroup<T>, s: &SurfaceData, conv: Conventions) -> Self {
        Self::with_chain(group, s, conv, build_chain_c(s))
    }

    pub fn with_chain(group: &'a LieGroup<T>, s: &SurfaceData, conv: Conventions, c: BarChain2) -> Self {
        let c_tilde = build_chain_c_tilde(&c, s);
        Self {
            group,
            conv,
            surface: *s,
            c,
            c_tilde,
            gens: s.groupoid_generators(),
        }
    }

    fn d(&self) -> usize {
        self.group.dim()
    }

    /// Dimension of the tangent space, `N dim g`.
    pub fn tangent_dim(&self) -> usize {
        self.gens.len() * self.d()
    }

    fn a_offset(&self, k: usize) -> usize {
        (2 * self.surface.genus + k - 1) * self.d()
    }

    /// `X_j' = lift_maps[j] xi`.
    pub fn lift_maps(&self, p: &ExtendedPoint<T>) -> Result<Vec<DMatrix<T>>> {
        let d = self.d();
        let g = self.group;
        let mut out = Vec::with_capacity(p.lifts.len());
        let r = fox_row(g, &relator_tilde(&self.surface), &self.gens, &p.phi)?;
        out.push(g.dexp_right_inverse(&p.lifts[0]) * r);
        for k in 1..=self.surface.boundaries {
            let mut e = DMatrix::<T>::zeros(d, self.tangent_dim());
            e.view_mut((0, self.a_offset(k)), (d, d))
                .copy_from(&g.dexp_right_inverse(&p.lifts[k]));
            out.push(e);
        }
        Ok(out)
    }

    pub fn tangent(&self, p: &ExtendedPoint<T>, xi: DVector<T>) -> Result<TangentVector<T>> {
        let lifts = self.lift_maps(p)?.iter().map(|m| m * &xi).collect();
        Ok(TangentVector { xi, lifts })
    }

    /// Deviation of `v` from the linearized constraints.
    pub fn linearized_residual(&self, p: &ExtendedPoint<T>, v: &TangentVector<T>) -> Result<T> {
        let g = self.group;
        let d = self.d();
        let r = fox_row(g, &relator_tilde(&self.surface), &self.gens, &p.phi)?;
        let mut worst = (g.dexp_right_matrix(&p.lifts[0]) * &v.lifts[0] - r * &v.xi).amax();
        for k in 1..=self.surface.boundaries {
            let a = v.xi.rows(self.a_offset(k), d);
            worst = worst.max((g.dexp_right_matrix(&p.lifts[k]) * &v.lifts[k] - a).amax());
        }
        Ok(worst)
    }

    /// Matrix of the pairing of `c~` with the Maurer–Cartan form, on groupoid
    /// coordinates.
    pub fn omega_c_tilde_matrix(&self, phi: &Assignment<T>) -> Result<DMatrix<T>> {
        cell_form(self.group, &self.conv, &self.c_tilde, &self.gens, phi)
    }

    pub fn omega_c_tilde(&self, phi: &Assignment<T>, v: &TangentVector<T>, w: &TangentVector<T>) -> Result<T> {
        Ok(v.xi.dot(&(self.omega_c_tilde_matrix(phi)? * &w.xi)))
    }

    /// The total form on ambient coordinates `(xi, X_0', ..., X_n')`.
    pub fn ambient_form(&self, p: &ExtendedPoint<T>) -> Result<DMatrix<T>> {
        let d = self.d();
        let nt = self.tangent_dim();
        let n = self.surface.boundaries;
        let mut w = DMatrix::<T>::zeros(nt + (n + 1) * d, nt + (n + 1) * d);
        w.view_mut((0, 0), (nt, nt)).copy_from(&self.omega_c_tilde_matrix(&p.phi)?);
        for (j, x) in p.lifts.iter().enumerate() {
            let mut b = beta_matrix(self.group, &self.conv, x)?;
            if j == 0 {
                b *= -T::lit(self.conv.beta_sign);
            }
            w.view_mut((nt + j * d, nt + j * d), (d, d)).copy_from(&b);
        }
        Ok(w)
    }

    /// The total form in generator coordinates `xi`, lifts eliminated.
    pub fn generator_form(&self, p: &ExtendedPoint<T>) -> Result<DMatrix<T>> {
        let mut w = self.omega_c_tilde_matrix(&p.phi)?;
        for (j, (x, m)) in p.lifts.iter().zip(self.lift_maps(p)?).enumerate() {
            let mut b = beta_matrix(self.group, &self.conv, x)?;
            if j == 0 {
                b *= -T::lit(self.conv.beta_sign);
            }
            w += m.transpose() * b * m;
        }
        Ok(w)
    }

    pub fn omega_total(&self, p: &ExtendedPoint<T>, v: &TangentVector<T>, w: &TangentVector<T>) -> Result<T> {
        let mut total = v.xi.dot(&(self.omega_c_tilde_matrix(&p.phi)? * &w.xi));
        for (j, x) in p.lifts.iter().enumerate() {
            let b = beta_matrix(self.group, &self.conv, x)?;
            let val = v.lifts[j].dot(&(b * &w.lifts[j]));
            total += if j == 0 { -T::lit(self.conv.beta_sign) * val } else { val };
        }
        Ok(total)
    }

    /// Orthonormal basis of the tangent space in ambient coordinates: the null
    /// space of the linearized constraints.
    pub fn tangent_basis(&self, p: &ExtendedPoint<T>) -> Result<DMatrix<T>> {
        let d = self.d();
        let nt = self.tangent_dim();
        let n = self.surface.boundaries;
        let g = self.group;
        let mut k = DMatrix::<T>::zeros((n + 1) * d, nt + (n + 1) * d);
        let r = fox_row(g, &relator_tilde(&self.surface), &self.gens, &p.phi)?;
        k.view_mut((0, 0), (d, nt)).copy_from(&(-r));
        for j in 0..=n {
            k.view_mut((j * d, nt + j * d), (d, d))
                .copy_from(&g.dexp_right_matrix(&p.lifts[j]));
            if j > 0 {
                let mut blk = k.view_mut((j * d, self.a_offset(j)), (d, d));
                blk -= DMatrix::<T>::identity(d, d);
            }
        }
        Ok(null_space(&k, RANK_TOL))
    }

    /// Numerical rank of the total form on the tangent space.
    pub fn rank_omega(&self, p: &ExtendedPoint<T>) -> Result<usize> {
        let t = self.tangent_basis(p)?;
        let gram = t.transpose() * self.ambient_form(p)? * &t;
        numerical_rank(&gram, RANK_TOL)
    }

    /// `mu_0 = X_0` and `mu_k = -X_k` under the identification of g with its
    /// dual. The boundary copies enter the total form with the opposite sign
    /// of beta, which flips their momentum.
    pub fn momentum(&self, p: &ExtendedPoint<T>) -> Vec<AlgebraElement<T>> {
        p.lifts
            .iter()
            .enumerate()
            .map(|(j, x)| if j == 0 { x.clone() } else { x.scaled(-T::one()) })
            .collect()
    }

    /// Fundamental vector field of `x` acting through the factor `j` of
    /// `G^{n+1}`, in generator coordinates.
    pub fn action_vector(&self, p: &ExtendedPoint<T>, j: usize, x: &AlgebraElement<T>) -> Result<DVector<T>> {
        let g = self.group;
        let d = self.d();
        let xc = g.coords(x);
        let mut xi = DVector::<T>::zeros(self.tangent_dim());
        for (i, &gen) in self.gens.iter().enumerate() {
            let val = p.phi.get(gen)?;
            let mut blk = DVector::<T>::zeros(d);
            if gen.target() == j {
                blk += &xc;
            }
            if gen.source() == j {
                blk -= g.adjoint_matrix(val) * &xc;
            }
            xi.rows_mut(i * d, d).copy_from(&blk);
        }
        Ok(xi)
    }

    /// Pushes a tangent at `p` to the tangent at `theta . p`.
    pub fn act_tangent(&self, theta: &[GroupElement<T>], v: &TangentVector<T>) -> TangentVector<T> {
        let g = self.group;
        let d = self.d();
        let mut xi = v.xi.clone();
        for (i, gen) in self.gens.iter().enumerate() {
            let blk = g.adjoint_matrix(&theta[gen.target()]) * v.xi.rows(i * d, d);
            xi.rows_mut(i * d, d).copy_from(&blk);
        }
        let lifts = v
            .lifts
            .iter()
            .zip(theta)
            .map(|(l, t)| g.adjoint_matrix(t) * l)
            .collect();
        TangentVector { xi, lifts }
    }

    /// The point with coordinates `q` in the chart `phi~(g) = exp(q_g) phi~_0(g)`.
    pub fn chart_point(&self, p0: &ExtendedPoint<T>, q: &DVector<T>) -> Result<ExtendedPoint<T>> {
        let d = self.d();
        let mut phi = p0.phi.clone();
        for (i, &gen) in self.gens.iter().enumerate() {
            let e = self.group.exp(&self.group.from_coords(&q.rows(i * d, d).into_owned()));
            phi.set(gen, &e * p0.phi.get(gen)?);
        }
        ExtendedPoint::from_assignment(self.group, &self.surface, phi)
    }

    /// `J^T W J` with `J` the chart Jacobian into right-trivialized tangents.
    fn pull_to_chart(&self, w: DMatrix<T>, q: &DVector<T>) -> DMatrix<T> {
        let d = self.d();
        let nt = self.tangent_dim();
        let mut j = DMatrix::<T>::zeros(nt, nt);
        for i in 0..self.gens.len() {
            let x = self.group.from_coords(&q.rows(i * d, d).into_owned());
            j.view_mut((i * d, i * d), (d, d))
                .copy_from(&self.group.dexp_right_matrix(&x));
        }
        j.transpose() * w * j
    }

    /// The total form in chart coordinates at `q`.
    pub fn chart_form(&self, p0: &ExtendedPoint<T>, q: &DVector<T>) -> Result<DMatrix<T>> {
        let p = self.chart_point(p0, q)?;
        Ok(self.pull_to_chart(self.generator_form(&p)?, q))
    }

    /// The form of `c~` alone in chart coordinates at `q`.
    pub fn chart_form_c_tilde(&self, p0: &ExtendedPoint<T>, q: &DVector<T>) -> Result<DMatrix<T>> {
        let p = self.chart_point(p0, q)?;
        Ok(self.pull_to_chart(self.omega_c_tilde_matrix(&p.phi)?, q))
    }

    /// `<d c~, E* lambda>` on generator tangents at `p`.
    pub fn lambda_pairing(&self, p: &ExtendedPoint<T>, e: [&DVector<T>; 3]) -> Result<T> {
        let mut total = T::zero();
        for (w, &m) in &self.c_tilde.boundary().terms {
            let r = fox_row(self.group, w, &self.gens, &p.phi)?;
            let v: Vec<DVector<T>> = e.iter().map(|x| &r * *x).collect();
            total += T::from_i64(m).unwrap() * lambda_coords(self.group, &self.conv, &v[0], &v[1], &v[2]);
        }
        Ok(total)
    }

    /// `|omega_total(X_H, e) + d(<x, mu_j>)(e)|` with the derivative taken by
    /// Ridders extrapolation along the chart line through `p` in direction `e`.
    pub fn momentum_residual(&self, p: &ExtendedPoint<T>, j: usize, x: &AlgebraElement<T>, e: &DVector<T>) -> Result<T> {
        let xh = self.action_vector(p, j, x)?;
        let lhs = xh.dot(&(self.generator_form(p)? * e));
        let g = self.group;
        let (dmu, _) = ridders(|t: T| Ok(g.pair(x, &self.momentum(&self.chart_point(p, &(e * t))?)[j])), FD_STEP)?;
        Ok((lhs + dmu).abs())
    }
}

/// `sum_cells m sigma scale (L_u^T R_v - R_v^T L_u)` with `R_w` the Fox row of
/// `w` and `L_w = Ad(phi(w))^-1 R_w`.
fn cell_form<T: Scalar>(
    group: &LieGroup<T>,
    conv: &Conventions,
    chain: &BarChain2,
    gens: &[Generator],
    phi: &Assignment<T>,
) -> Result<DMatrix<T>> {
    let n = gens.len() * group.dim();
    let mut w = DMatrix::<T>::zeros(n, n);
    for ((u, v), &m) in &chain.cells {
        let ru = fox_row(group, u, gens, phi)?;
        let lu = group.adjoint_matrix(&phi.evaluate(u)?).transpose() * ru;
        let rv = fox_row(group, v, gens, phi)?;
        let t = lu.transpose() * &rv;
        w += (&t - t.transpose()) * T::from_i64(m).unwrap();
    }
    Ok(w * (T::lit(conv.sigma) * group.form_scale()))
}

/// Exterior derivative of a 2-form field given in chart coordinates,
/// `sum_cyclic d_{e_i} W(e_j, e_k)`, each directional derivative by Ridders
/// extrapolation starting from step `h`.
pub fn exterior_derivative_fd<T, F>(form: F, e: [&DVector<T>; 3], h: f64) -> Result<T>
where
    T: Scalar,
    F: Fn(&DVector<T>) -> Result<DMatrix<T>>,
{
    let mut total = T::zero();
    for i in 0..3 {
        let (a, b, c) = (e[i], e[(i + 1) % 3], e[(i + 2) % 3]);
        let (d, _) = ridders(|t: T| Ok(b.dot(&(form(&(a * t))? * c))), h)?;
        total += d;
    }
    Ok(total)
}

/// Samples a point with `phi~(r~) = Id`: all generators Haar except `a_n`,
/// which is solved for. Points with some `a_k` outside B are rejected.
pub fn sample_zero_locus<T: Scalar, R: Rng + ?Sized>(
    group: &LieGroup<T>,
    s: &SurfaceData,
    rng: &mut R,
    max_attempts: usize,
) -> Result<ExtendedPoint<T>> {
    if s.boundaries == 0 {
        return Err(Error::InvalidSurface {
            genus: s.genus,
            boundaries: s.boundaries,
        });
    }
    let n = s.boundaries;
    for _ in 0..max_attempts {
        let mut phi = Assignment::new(s.groupoid_generators().into_iter().map(|g| (g, group.random_element(rng))));
        phi.set(Generator::A(n), group.identity());
        let r = phi.evaluate(&relator_tilde(s))?;
        // r = P gamma_n gamma_n^-1 with a_n = Id, so a_n = gamma_n^-1 P^-1 gamma_n.
        let gn = phi.get(Generator::Gamma(n))?.clone();
        let an = &(&gn.inverse() * &r.inverse()) * &gn;
        phi.set(Generator::A(n), an);
        match ExtendedPoint::from_assignment(group, s, phi) {
            Ok(mut p) => {
                p.lifts[0] = group.zero();
                return Ok(p);
            }
            Err(Error::NotInB) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RejectionExhausted {
        attempts: max_attempts,
    })
}

/// A point of the constrained space: a surface-group assignment with the
/// boundary values in fixed classes, and the lift `X_0` of the relator value.
#[derive(Debug, Clone)]
pub struct ConstrainedPoint<T: Scalar> {
    pub surface: SurfaceData,
    pub phi: Assignment<T>,
    pub x0: AlgebraElement<T>,
}

impl<T: Scalar> ConstrainedPoint<T> {
    pub fn from_assignment(group: &LieGroup<T>, s: &SurfaceData, phi: Assignment<T>) -> Result<Self> {
        let x0 = group.log(&phi.evaluate(&relator(s))?)?;
        Ok(Self { surface: *s, phi, x0 })
    }
}

/// The constrained form on full surface-group coordinates: the Maurer–Cartan
/// pairing with `c`, minus the relator pullback of beta, plus the class forms
/// on the boundary blocks. Only meaningful on tangents whose `z_k` blocks lie
/// in `im(Id - Ad phi(z_k))`.
pub fn constrained_form_matrix<T: Scalar>(
    group: &LieGroup<T>,
    conv: &Conventions,
    c: &BarChain2,
    p: &ConstrainedPoint<T>,
) -> Result<DMatrix<T>> {
    let s = &p.surface;
    let d = group.dim();
    let gens = s.group_generators();
    let mut w = cell_form(group, conv, c, &gens, &p.phi)?;
    let r = fox_row(group, &relator(s), &gens, &p.phi)?;
    let d0 = group.dexp_right_inverse(&p.x0) * r;
    w -= d0.transpose() * beta_matrix(group, conv, &p.x0)? * &d0 * T::lit(conv.beta_sign);
    for k in 1..=s.boundaries {
        let off = (2 * s.genus + k - 1) * d;
        let mut blk = w.view_mut((off, off), (d, d));
        blk += tau_matrix(group, conv, p.phi.get(Generator::Z(k))?);
    }
    Ok(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct PresymplecticReport {
    pub dim_b: usize,
    pub dim_z: usize,
    pub dim_h: usize,
    pub rank_h: usize,
    pub h1: usize,
    /// `|d mu B|`.
    pub b_in_z: f64,
    /// `|d mu Z^omega|`.
    pub z_omega_in_z: f64,
    pub annihilator_match: bool,
}

impl PresymplecticReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.b_in_z < tol
            && self.z_omega_in_z < tol
            && self.annihilator_match
            && self.rank_h == self.dim_h
            && self.dim_h == self.h1
    }
}

/// The nondegeneracy conditions for presymplectic reduction at a point of
/// the constrained space, on parabolic coordinates.
pub fn presymplectic_check<T: Scalar>(
    group: &LieGroup<T>,
    conv: &Conventions,
    c: &BarChain2,
    p: &ConstrainedPoint<T>,
) -> Result<PresymplecticReport> {
    let k = build_complex(group, &p.phi, &p.surface, Variant::Parabolic)?;
    let w = &k.projection * constrained_form_matrix(group, conv, c, p)? * k.projection.transpose();
    let dmu = group.dexp_right_inverse(&p.x0) * &k.d1;
    let b = column_space(&k.d0, RANK_TOL);
    let z = null_space(&dmu, RANK_TOL);
    let b_in_z = if b.ncols() == 0 { T::zero() } else { max_abs(&(&dmu * &b)) };
    let z_omega = null_space(&(z.transpose() * &w), RANK_TOL);
    let z_omega_in_z = if z_omega.ncols() == 0 { T::zero() } else { max_abs(&(&dmu * &z_omega)) };
    let h = if b.ncols() == 0 {
        z.clone()
    } else {
        &z * null_space(&(b.transpose() * &z), RANK_TOL)
    };
    let rank_h = if h.ncols() == 0 { 0 } else { rank_unchecked(&(h.transpose() * &w * &h), RANK_TOL) };
    let stab = null_space(&k.d0, RANK_TOL);
    let rank_dmu = rank_unchecked(&dmu, RANK_TOL);
    let orth = if stab.ncols() == 0 { T::zero() } else { max_abs(&(stab.transpose() * &dmu)) };
    let annihilator_match = rank_dmu + stab.ncols() == group.dim() && orth.as_f64() < 1e-8 * T::TOLERANCE_SCALE;
    let dims = cohomology_dims(&k, RANK_TOL)?;
    Ok(PresymplecticReport {
        dim_b: b.ncols(),
        dim_z: z.ncols(),
        dim_h: h.ncols(),
        rank_h,
        h1: dims.h1,
        b_in_z: b_in_z.as_f64(),
        z_omega_in_z: z_omega_in_z.as_f64(),
        annihilator_match,
    })
}

#[derive(Debug, Clone)]
pub struct CoverResult<T: Scalar> {
    pub point: ConstrainedPoint<T>,
    /// Largest residual of the pullback identity over the sampled pairs.
    pub residual: T,
}

/// Maps `p` to the constrained space and compares, on random tangent pairs of
/// the level set `mu_k in O_k`, the total form minus the Kirillov forms with
/// the pullback of the constrained form.
pub fn reduce_and_cover<T: Scalar, R: Rng + ?Sized>(
    forms: &ExtendedForms<'_, T>,
    p: &ExtendedPoint<T>,
    orbits: &OrbitTuple<T>,
    rng: &mut R,
    pairs: usize,
) -> Result<CoverResult<T>> {
    let g = forms.group;
    let s = &forms.surface;
    let d = g.dim();
    for k in 1..=s.boundaries {
        let dist = orbits.distance(g, k, &p.lifts[k]);
        if dist.as_f64() > 1e-8 * T::TOLERANCE_SCALE {
            return Err(Error::OrbitMismatch { distance: dist.as_f64() });
        }
    }
    let phi = restrict(&p.phi, s)?;
    let point = ConstrainedPoint {
        surface: *s,
        phi,
        x0: p.lifts[0].clone(),
    };
    let wc = constrained_form_matrix(g, &forms.conv, &forms.c, &point)?;
    let wt = forms.generator_form(p)?;
    let lifts = forms.lift_maps(p)?;
    let kir: Vec<DMatrix<T>> = (1..=s.boundaries).map(|k| kirillov_matrix(g, &forms.conv, &p.lifts[k])).collect();

    // Differential of the restriction map, groupoid to group coordinates.
    let gens = s.groupoid_generators();
    let ggens = s.group_generators();
    let mut iota = DMatrix::<T>::zeros(ggens.len() * d, gens.len() * d);
    for (i, &gen) in ggens.iter().enumerate() {
        let row = fox_row(g, &groupoid_inclusion(gen), &gens, &p.phi)?;
        iota.view_mut((i * d, 0), (d, gens.len() * d)).copy_from(&row);
    }
    let pulled = iota.transpose() * wc * &iota;

    // Level-set tangents: a_k-blocks in im(Id - Ad a_k).
    let hs: Vec<DMatrix<T>> = (1..=s.boundaries)
        .map(|k| {
            let m = DMatrix::<T>::identity(d, d) - g.adjoint_matrix(p.phi.get(Generator::A(k)).unwrap());
            column_space(&m, RANK_TOL)
        })
        .collect();
    let sample = |rng: &mut R| {
        let mut xi = DVector::<T>::from_fn(forms.tangent_dim(), |_, _| T::lit(rng.random_range(-1.0..1.0)));
        for k in 1..=s.boundaries {
            let off = forms.a_offset(k);
            let blk = xi.rows(off, d).into_owned();
            let proj = &hs[k - 1] * (hs[k - 1].transpose() * blk);
            xi.rows_mut(off, d).copy_from(&proj);
        }
        xi
    };
    let mut worst = T::zero();
    for _ in 0..pairs {
        let v = sample(rng);
        let w = sample(rng);
        let mut lhs = v.dot(&(&wt * &w));
        for k in 1..=s.boundaries {
            let (xv, xw) = (&lifts[k] * &v, &lifts[k] * &w);
            lhs -= xv.dot(&(&kir[k - 1] * xw));
        }
        let rhs = v.dot(&(&pulled * &w));
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(CoverResult { point, residual: worst })
}

/// `|tau(exp_* Y1, exp_* Y2) - beta_X(Y1, Y2) + omega_X(Y1, Y2)|` for orbit
/// tangents `Y_i = [u_i, X]`, with the pushforward by central differences.
pub fn tau_identity_residual<T: Scalar>(
    group: &LieGroup<T>,
    conv: &Conventions,
    x: &AlgebraElement<T>,
    u: &AlgebraElement<T>,
    v: &AlgebraElement<T>,
) -> Result<T> {
    let h = T::lit(1.0e-5);
    let c = group.exp(x);
    let push = |y: &AlgebraElement<T>| {
        let p = group.exp(&x.add(&y.scaled(h)));
        let m = group.exp(&x.add(&y.scaled(-h)));
        let dm = (&p.m - &m.m).map(|z| z / (h + h));
        group.coords(&group.project(&(dm * c.inverse().m)))
    };
    let y1 = group.bracket(u, x);
    let y2 = group.bracket(v, x);
    let (z1, z2) = (push(&y1), push(&y2));
    let tau = z1.dot(&(tau_matrix(group, conv, &c) * &z2));
    let b = beta_form(group, conv, x, &y1, &y2)?;
    let (c1, c2) = (group.coords(&y1), group.coords(&y2));
    let kir = c1.dot(&(kirillov_matrix(group, conv, x) * &c2));
    Ok((tau - b + kir).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::LieGroupSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn su2() -> LieGroup<f64> {
        LieGroup::new(LieGroupSpec::su(2).unwrap())
    }

    fn rand_vec(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
        DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_point(g: &LieGroup<f64>, s: &SurfaceData, rng: &mut ChaCha8Rng) -> ExtendedPoint<f64> {
        loop {
            let phi = Assignment::new(s.groupoid_generators().into_iter().map(|x| (x, g.random_element(rng))));
            if let Ok(p) = ExtendedPoint::from_assignment(g, s, phi) {
                return p;
            }
        }
    }

    fn random_theta(g: &LieGroup<f64>, n: usize, rng: &mut ChaCha8Rng) -> Vec<GroupElement<f64>> {
        (0..=n).map(|_| g.random_element(rng)).collect()
    }

    /// `|d omega_c~ - <d c~, E* lambda>|` over a few random triples.
    fn lambda_identity_residual(f: &ExtendedForms<'_, f64>, p: &ExtendedPoint<f64>, rng: &mut ChaCha8Rng) -> f64 {
        let n = f.tangent_dim();
        (0..3)
            .map(|_| {
                let e: Vec<DVector<f64>> = (0..3).map(|_| rand_vec(n, rng)).collect();
                let dw = exterior_derivative_fd(|q| f.chart_form_c_tilde(p, q), [&e[0], &e[1], &e[2]], FD_STEP).unwrap();
                (dw - f.lambda_pairing(p, [&e[0], &e[1], &e[2]]).unwrap()).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn mc_two_form_is_antisymmetric_and_bilinear() {
        let g = su2();
        let conv = Conventions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let (a, _b) = (g.random_element(&mut rng), g.random_element(&mut rng));
        let v: Vec<AlgebraElement<f64>> = (0..4).map(|_| g.random_algebra(&mut rng, 1.0)).collect();
        assert_eq!(mc_two_form(&g, &conv, &a, (&v[0], &v[1]), (&v[0], &v[1])), 0.0);
        let base = mc_two_form(&g, &conv, &a, (&v[0], &v[1]), (&v[2], &v[3]));
        let swapped = mc_two_form(&g, &conv, &a, (&v[2], &v[3]), (&v[0], &v[1]));
        assert!((base + swapped).abs() < 1e-14);
        let scaled = mc_two_form(&g, &conv, &a, (&v[0].scaled(2.5), &v[1].scaled(2.5)), (&v[2], &v[3]));
        assert!((scaled - 2.5 * base).abs() < 1e-12);
    }

    #[test]
    fn lambda_and_beta_basics() {
        let g = su2();
        let conv = Conventions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let h = g.random_element(&mut rng);
        let (x, y) = (g.random_algebra(&mut rng, 1.0), g.random_algebra(&mut rng, 1.0));
        assert!(lambda_form(&g, &conv, &h, &x, &x, &y).abs() < 1e-14);
        assert!(lambda_form(&g, &conv, &h, &x, &y, &x).abs() < 1e-14);
        assert!(max_abs(&beta_matrix(&g, &conv, &g.zero()).unwrap()) < 1e-15);
    }

    #[test]
    fn beta_is_a_primitive_of_exp_lambda() {
        let g = su2();
        let conv = Conventions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let x = g.random_algebra(&mut rng, 1.2);
            let e: Vec<DVector<f64>> = (0..3).map(|_| rand_vec(3, &mut rng)).collect();
            let db = exterior_derivative_fd(
                |q| beta_matrix(&g, &conv, &x.add(&g.from_coords(q))),
                [&e[0], &e[1], &e[2]],
                FD_STEP,
            )
            .unwrap();
            let f = g.dexp_right_matrix(&x);
            let pushed: Vec<DVector<f64>> = e.iter().map(|v| &f * v).collect();
            let l = lambda_coords(&g, &conv, &pushed[0], &pushed[1], &pushed[2]);
            assert!((db - l).abs() < 1e-5, "{db} vs {l}");
        }
    }

    /// Tries the four sign candidates for `(sigma, kappa)`. Exactly the frozen
    /// one satisfies the chain identity for `d omega_c~`, the momentum property
    /// for the base copy, and the standard Kirillov normalization.
    #[test]
    fn calibration_selects_frozen_conventions() {
        let g = su2();
        let s = SurfaceData::new(1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let p = random_point(&g, &s, &mut rng);
        let mut passing = Vec::new();
        for sigma in [0.5, -0.5] {
            for kappa in [0.5, -0.5] {
                let conv = Conventions {
                    sigma,
                    kappa,
                    beta_sign: 1.0,
                };
                let f = ExtendedForms::new(&g, &s, conv);
                let chain = lambda_identity_residual(&f, &p, &mut rng) < 1e-5;
                let x = g.random_algebra(&mut rng, 1.0);
                let e = rand_vec(f.tangent_dim(), &mut rng);
                let momentum = f.momentum_residual(&p, 0, &x, &e).unwrap() < 1e-6;
                let kirillov = conv.kirillov_sign() == 1.0;
                if chain && momentum && kirillov {
                    passing.push(conv);
                }
            }
        }
        assert_eq!(passing, vec![Conventions::default()]);
    }

    #[test]
    fn class_form_identity() {
        let g = su2();
        let conv = Conventions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..20 {
            let x = g.random_algebra(&mut rng, 1.0);
            let (u, v) = (g.random_algebra(&mut rng, 1.0), g.random_algebra(&mut rng, 1.0));
            assert!(tau_identity_residual(&g, &conv, &x, &u, &v).unwrap() < 1e-6);
        }
        // Dropping the class form breaks it.
        let x = g.random_algebra(&mut rng, 1.0);
        let (u, v) = (g.random_algebra(&mut rng, 1.0), g.random_algebra(&mut rng, 1.0));
        let (y1, y2) = (g.bracket(&u, &x), g.bracket(&v, &x));
        let b = beta_form(&g, &conv, &x, &y1, &y2).unwrap();
        let k = kirillov_form(&g, &conv, &x, &g.coords(&y1), &g.coords(&y2));
        assert!((b - k).abs() > 1e-3);
    }

    #[test]
    fn kirillov_form_standard_normalization() {
        let g = LieGroup::<f64>::new(LieGroupSpec::su(3).unwrap());
        let conv = Conventions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let x = g.random_algebra(&mut rng, 1.0);
        for _ in 0..10 {
            let (u, v) = (g.random_algebra(&mut rng, 1.0), g.random_algebra(&mut rng, 1.0));
            let y1 = g.coords(&g.bracket(&u, &x));
            let y2 = g.coords(&g.bracket(&v, &x));
            let expected = g.pair(&x, &g.bracket(&u, &v));
            assert!((kirillov_form(&g, &conv, &x, &y1, &y2) - expected).abs() < 1e-10);
        }
        // Nondegenerate on the orbit tangent space of a regular element.
        let im = column_space(&g.ad_matrix(&x), RANK_TOL);
        let k = im.transpose() * kirillov_matrix(&g, &conv, &x) * &im;
        assert_eq!(rank_unchecked(&k, 1e-8), im.ncols());
    }

    #[test]
    fn omega_total_closed_and_invariant() {
        let g = su2();
        for (l, n, seed) in [(1, 1, 46), (1, 2, 47), (2, 1, 48)] {
            let s = SurfaceData::new(l, n).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = ExtendedForms::new(&g, &s, Conventions::default());
            let p = random_point(&g, &s, &mut rng);
            let dim = f.tangent_dim();
            for _ in 0..3 {
                let e: Vec<DVector<f64>> = (0..3).map(|_| rand_vec(dim, &mut rng)).collect();
                let dw = exterior_derivative_fd(|q| f.chart_form(&p, q), [&e[0], &e[1], &e[2]], FD_STEP).unwrap();
                assert!(dw.abs() < 1e-5, "closedness residual {dw}");
            }
            assert!(lambda_identity_residual(&f, &p, &mut rng) < 1e-5);

            let v = f.tangent(&p, rand_vec(dim, &mut rng)).unwrap();
            let w = f.tangent(&p, rand_vec(dim, &mut rng)).unwrap();
            assert!(f.linearized_residual(&p, &v).unwrap() < 1e-12);
            assert!(f.omega_total(&p, &v, &v).unwrap().abs() < 1e-12);
            let base = f.omega_total(&p, &v, &w).unwrap();
            let theta = random_theta(&g, n, &mut rng);
            let q = p.act(&g, &theta);
            assert!(q.constraint_residual(&g).unwrap() < 1e-12);
            let (tv, tw) = (f.act_tangent(&theta, &v), f.act_tangent(&theta, &w));
            assert!(f.linearized_residual(&q, &tv).unwrap() < 1e-12);
            let moved = f.omega_total(&q, &tv, &tw).unwrap();
            assert!((base - moved).abs() < 1e-9);
            assert!((f.omega_c_tilde(&p.phi, &v, &w).unwrap() - f.omega_c_tilde(&q.phi, &tv, &tw).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn tampered_beta_breaks_closedness() {
        let g = su2();
        let s = SurfaceData::new(1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(49);
        let f = ExtendedForms::new(&g, &s, Conventions::tampered_beta());
        let p = random_point(&g, &s, &mut rng);
        let e: Vec<DVector<f64>> = (0..3).map(|_| rand_vec(f.tangent_dim(), &mut rng)).collect();
        let dw = exterior_derivative_fd(|q| f.chart_form(&p, q), [&e[0], &e[1], &e[2]], FD_STEP).unwrap();
        assert!(dw.abs() > 1e-3);
    }

    #[test]
    fn momentum_property_per_copy() {
        let g = su2();
        let s = SurfaceData::new(1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let f = ExtendedForms::new(&g, &s, Conventions::default());
        for _ in 0..3 {
            let p = random_point(&g, &s, &mut rng);
            for j in 0..=2 {
                let x = g.random_algebra(&mut rng, 1.0);
                let e = rand_vec(f.tangent_dim(), &mut rng);
                assert!(f.momentum_residual(&p, j, &x, &e).unwrap() < 1e-6);
            }
            // Equivariance.
            let theta = random_theta(&g, 2, &mut rng);
            let (m, mq) = (f.momentum(&p), f.momentum(&p.act(&g, &theta)));
            for j in 0..=2 {
                let d = g.coords(&mq[j]) - g.adjoint_matrix(&theta[j]) * g.coords(&m[j]);
                assert!(d.amax() < 1e-10);
            }
        }
        let t = ExtendedPoint::trivial(&g, &s);
        assert!(f.momentum(&t).iter().all(|x| g.coords(x).amax() == 0.0));
    }

    #[test]
    fn full_rank_on_zero_locus() {
        let g = su2();
        for (l, n) in [(1, 1), (1, 2), (2, 1)] {
            let s = SurfaceData::new(l, n).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(51 + l as u64 * 10 + n as u64);
            let f = ExtendedForms::new(&g, &s, Conventions::default());
            for _ in 0..5 {
                let p = sample_zero_locus(&g, &s, &mut rng, 100).unwrap();
                assert!(p.constraint_residual(&g).unwrap() < 1e-10);
                let r = f.rank_omega(&p).unwrap();
                assert_eq!(r, f.tangent_dim());
                assert_eq!(r % 2, 0);
                let q = p.act(&g, &random_theta(&g, n, &mut rng));
                assert_eq!(f.rank_omega(&q).unwrap(), r);
            }
        }
    }

    #[test]
    fn tangent_basis_satisfies_constraints() {
        let g = su2();
        let s = SurfaceData::new(1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let f = ExtendedForms::new(&g, &s, Conventions::default());
        let p = random_point(&g, &s, &mut rng);
        let t = f.tangent_basis(&p).unwrap();
        assert_eq!(t.ncols(), f.tangent_dim());
        let d = g.dim();
        let nt = f.tangent_dim();
        for c in 0..t.ncols() {
            let col = t.column(c);
            let v = TangentVector {
                xi: col.rows(0, nt).into_owned(),
                lifts: (0..=2).map(|j| col.rows(nt + j * d, d).into_owned()).collect(),
            };
            assert!(f.linearized_residual(&p, &v).unwrap() < 1e-12);
        }
    }

    #[test]
    fn presymplectic_conditions_at_irreducible_points() {
        let g = su2();
        let s = SurfaceData::new(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let f = ExtendedForms::new(&g, &s, Conventions::default());
        for _ in 0..5 {
            let p = sample_zero_locus(&g, &s, &mut rng, 100).unwrap();
            let cp = ConstrainedPoint::from_assignment(&g, &s, restrict(&p.phi, &s).unwrap()).unwrap();
            let rep = presymplectic_check(&g, &f.conv, &f.c, &cp).unwrap();
            assert!(rep.passed(1e-8), "{rep:?}");
            assert_eq!(rep.h1, 8);
        }
    }

    #[test]
    fn covering_identity() {
        let g = su2();
        let s = SurfaceData::new(1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let f = ExtendedForms::new(&g, &s, Conventions::default());
        for _ in 0..3 {
            let p = random_point(&g, &s, &mut rng);
            let orbits = OrbitTuple::through(&g, &p).unwrap();
            let r = reduce_and_cover(&f, &p, &orbits, &mut rng, 50).unwrap();
            assert!(r.residual < 1e-7);
        }

        // gamma_k = Id: the image keeps the remaining coordinates.
        let mut p = random_point(&g, &s, &mut rng);
        for k in 1..=2 {
            p.phi.set(Generator::Gamma(k), g.identity());
        }
        let p = ExtendedPoint::from_assignment(&g, &s, p.phi).unwrap();
        let orbits = OrbitTuple::through(&g, &p).unwrap();
        let r = reduce_and_cover(&f, &p, &orbits, &mut rng, 5).unwrap();
        for k in 1..=2 {
            let z = r.point.phi.get(Generator::Z(k)).unwrap();
            assert!(z.distance(p.phi.get(Generator::A(k)).unwrap()) < 1e-15);
        }
        assert_eq!(r.point.phi.get(Generator::X(1)).unwrap(), p.phi.get(Generator::X(1)).unwrap());

        let mut wrong = orbits.clone();
        wrong.reps[0] = TorusPoint::new(wrong.reps[0].family, vec![0.01, -0.01]).unwrap();
        assert!(matches!(
            reduce_and_cover(&f, &p, &wrong, &mut rng, 1),
            Err(Error::OrbitMismatch { .. })
        ));
    }
}
