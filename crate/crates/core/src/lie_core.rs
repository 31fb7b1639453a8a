//! Compact matrix groups SU(n) (2 ≤ n ≤ 4) and SO(3), their Lie algebras,
//! exponential and logarithm, adjoint actions and the invariant form.
//!
//! Algebra elements are stored as complex matrices. Most downstream code
//! works in coordinates with respect to a fixed real basis of g which is
//! orthonormal for `-Re tr(XY)`; in these coordinates `Ad(g)` is orthogonal
//! and `ad(X)` is skew-symmetric.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{apply_skew_spectrum, skew_eigen};
use crate::scalar::Scalar;

pub type CMat<T> = DMatrix<Complex<T>>;

/// Structural tolerance for unitarity and trace checks (f64).
pub const EPS_STRUCT: f64 = 1.0e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupFamily {
    SU(usize),
    SO3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LieGroupSpec {
    pub family: GroupFamily,
    /// Multiplier of the trace form: `pair(X, Y) = -form_scale * Re tr(XY)`.
    pub form_scale: f64,
}

impl LieGroupSpec {
    pub fn su(n: usize) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(Error::InvalidGroup(format!("SU({n}) is not supported")));
        }
        Ok(Self {
            family: GroupFamily::SU(n),
            form_scale: 1.0,
        })
    }

    pub fn so3() -> Self {
        Self {
            family: GroupFamily::SO3,
            form_scale: 1.0,
        }
    }

    pub fn with_form_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidGroup(format!("form scale {scale} must be positive")));
        }
        self.form_scale = scale;
        Ok(self)
    }

    /// Size of the defining matrices.
    pub fn matrix_size(&self) -> usize {
        match self.family {
            GroupFamily::SU(n) => n,
            GroupFamily::SO3 => 3,
        }
    }

    /// The rank parameter `n` (number of torus coordinates `nu`).
    pub fn n(&self) -> usize {
        match self.family {
            GroupFamily::SU(n) => n,
            GroupFamily::SO3 => 2,
        }
    }

    pub fn dim_g(&self) -> usize {
        match self.family {
            GroupFamily::SU(n) => n * n - 1,
            GroupFamily::SO3 => 3,
        }
    }

    pub fn is_so3(&self) -> bool {
        matches!(self.family, GroupFamily::SO3)
    }
}

impl fmt::Display for LieGroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            GroupFamily::SU(n) => write!(f, "SU({n})"),
            GroupFamily::SO3 => write!(f, "SO(3)"),
        }
    }
}

impl FromStr for LieGroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s
            .chars()
            .filter(|c| !matches!(c, '(' | ')' | ' ' | '_' | '-'))
            .collect::<String>()
            .to_ascii_lowercase();
        match t.as_str() {
            "su2" => Self::su(2),
            "su3" => Self::su(3),
            "su4" => Self::su(4),
            "so3" => Ok(Self::so3()),
            _ => Err(Error::InvalidGroup(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement<T: Scalar> {
    pub m: CMat<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement<T: Scalar> {
    pub x: CMat<T>,
}

impl<T: Scalar> GroupElement<T> {
    pub fn identity(size: usize) -> Self {
        Self {
            m: CMat::identity(size, size),
        }
    }

    pub fn inverse(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    /// Max-entry distance to another element.
    pub fn distance(&self, other: &Self) -> T {
        max_abs_c(&(&self.m - &other.m))
    }
}

impl<T: Scalar> Mul for &GroupElement<T> {
    type Output = GroupElement<T>;
    fn mul(self, rhs: Self) -> GroupElement<T> {
        GroupElement { m: &self.m * &rhs.m }
    }
}

impl<T: Scalar> Mul for GroupElement<T> {
    type Output = GroupElement<T>;
    fn mul(self, rhs: Self) -> GroupElement<T> {
        GroupElement { m: self.m * rhs.m }
    }
}

impl<T: Scalar> AlgebraElement<T> {
    pub fn zero(size: usize) -> Self {
        Self {
            x: CMat::zeros(size, size),
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            x: self.x.map(|z| z * s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            x: &self.x + &other.x,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            x: &self.x - &other.x,
        }
    }
}

pub(crate) fn max_abs_c<T: Scalar>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |a, z| a.max(z.modulus()))
}

fn cplx<T: Scalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// A compact matrix group together with its orthonormal algebra basis.
#[derive(Debug, Clone)]
pub struct LieGroup<T: Scalar> {
    spec: LieGroupSpec,
    basis: Vec<CMat<T>>,
}

impl<T: Scalar> LieGroup<T> {
    pub fn new(spec: LieGroupSpec) -> Self {
        let basis = match spec.family {
            GroupFamily::SU(n) => su_basis(n),
            GroupFamily::SO3 => so3_basis(),
        };
        Self { spec, basis }
    }

    pub fn spec(&self) -> &LieGroupSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn size(&self) -> usize {
        self.spec.matrix_size()
    }

    pub fn form_scale(&self) -> T {
        T::lit(self.spec.form_scale)
    }

    pub fn basis(&self) -> &[CMat<T>] {
        &self.basis
    }

    pub fn identity(&self) -> GroupElement<T> {
        GroupElement::identity(self.size())
    }

    pub fn zero(&self) -> AlgebraElement<T> {
        AlgebraElement::zero(self.size())
    }

    /// Residual of the group invariants: unitarity, determinant, and realness
    /// for SO(3).
    pub fn group_residual(&self, g: &GroupElement<T>) -> T {
        let n = self.size();
        let u = max_abs_c(&(g.m.adjoint() * &g.m - CMat::<T>::identity(n, n)));
        let det = g.m.determinant();
        let d = (det - Complex::new(T::one(), T::zero())).modulus();
        let r = if self.spec.is_so3() {
            g.m.iter().fold(T::zero(), |a, z| a.max(z.im.abs()))
        } else {
            T::zero()
        };
        u.max(d).max(r)
    }

    /// Residual of the algebra invariants: skew-hermitian, traceless, and
    /// real for so(3).
    pub fn algebra_residual(&self, x: &AlgebraElement<T>) -> T {
        let s = max_abs_c(&(&x.x + x.x.adjoint()));
        let t = x.x.trace().modulus();
        let r = if self.spec.is_so3() {
            x.x.iter().fold(T::zero(), |a, z| a.max(z.im.abs()))
        } else {
            T::zero()
        };
        s.max(t).max(r)
    }

    /// Coordinates in the orthonormal basis: `c_i = -Re tr(X e_i)`.
    pub fn coords(&self, x: &AlgebraElement<T>) -> DVector<T> {
        DVector::from_iterator(
            self.dim(),
            self.basis.iter().map(|e| -trace_product(&x.x, e).re),
        )
    }

    pub fn from_coords(&self, v: &DVector<T>) -> AlgebraElement<T> {
        let n = self.size();
        let mut x = CMat::<T>::zeros(n, n);
        for (e, &c) in self.basis.iter().zip(v.iter()) {
            x += e.map(|z| z * c);
        }
        AlgebraElement { x }
    }

    /// `pair(X, Y) = -scale * Re tr(XY)`.
    pub fn pair(&self, x: &AlgebraElement<T>, y: &AlgebraElement<T>) -> T {
        -self.form_scale() * trace_product(&x.x, &y.x).re
    }

    pub fn bracket(&self, x: &AlgebraElement<T>, y: &AlgebraElement<T>) -> AlgebraElement<T> {
        AlgebraElement {
            x: &x.x * &y.x - &y.x * &x.x,
        }
    }

    pub fn adjoint(&self, g: &GroupElement<T>, x: &AlgebraElement<T>) -> AlgebraElement<T> {
        AlgebraElement {
            x: &g.m * &x.x * g.m.adjoint(),
        }
    }

    /// Matrix of `Y -> [X, Y]` in basis coordinates (skew-symmetric).
    pub fn ad_matrix(&self, x: &AlgebraElement<T>) -> DMatrix<T> {
        let d = self.dim();
        let mut m = DMatrix::<T>::zeros(d, d);
        for (j, e) in self.basis.iter().enumerate() {
            let br = &x.x * e - e * &x.x;
            for (i, f) in self.basis.iter().enumerate() {
                m[(i, j)] = -trace_product(&br, f).re;
            }
        }
        m
    }

    /// Matrix of `Y -> g Y g^-1` in basis coordinates (orthogonal).
    pub fn adjoint_matrix(&self, g: &GroupElement<T>) -> DMatrix<T> {
        let d = self.dim();
        let gi = g.m.adjoint();
        let mut m = DMatrix::<T>::zeros(d, d);
        for (j, e) in self.basis.iter().enumerate() {
            let c = &g.m * e * &gi;
            for (i, f) in self.basis.iter().enumerate() {
                m[(i, j)] = -trace_product(&c, f).re;
            }
        }
        m
    }

    pub fn exp(&self, x: &AlgebraElement<T>) -> GroupElement<T> {
        let n = self.size();
        // X = i H with H hermitian.
        let h = CMat::<T>::from_fn(n, n, |i, j| {
            let a = x.x[(i, j)];
            let b = x.x[(j, i)].conj();
            // -i * (a - b)/2 symmetrizes against round-off.
            Complex::new(T::zero(), -T::lit(0.5)) * (a - b)
        });
        let eig = h.symmetric_eigen();
        let v = &eig.eigenvectors;
        let mut d = CMat::<T>::zeros(n, n);
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            d[(k, k)] = Complex::new(l.cos(), l.sin());
        }
        let mut m = v * d * v.adjoint();
        if self.spec.is_so3() {
            m = m.map(|z| Complex::new(z.re, T::zero()));
        }
        GroupElement { m }
    }

    /// Eigenphases `arg(lambda) / 2 pi` in (-1/2, 1/2] with the unitary
    /// eigenvectors of a (normal) group element.
    pub fn eigen_decomposition(&self, g: &GroupElement<T>) -> (CMat<T>, Vec<T>) {
        let n = self.size();
        let schur = nalgebra::linalg::Schur::new(g.m.clone());
        let (q, t) = schur.unpack();
        let two_pi = T::lit(2.0 * PI);
        let half = T::lit(0.5);
        let phases = (0..n)
            .map(|k| {
                let z = t[(k, k)];
                let mut nu = z.im.atan2(z.re) / two_pi;
                if nu <= -half {
                    nu += T::one();
                }
                nu
            })
            .collect();
        (q, phases)
    }

    /// Sorted (descending) eigenphases of a group element in (-1/2, 1/2].
    pub fn eigenphases(&self, g: &GroupElement<T>) -> Vec<T> {
        let (_, mut p) = self.eigen_decomposition(g);
        p.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        p
    }

    /// The unique logarithm in the injectivity domain.
    ///
    /// For SU(n) this is the domain O of all X whose ad-eigenvalues `2 pi i nu`
    /// satisfy `|nu| < 1`; for SO(3) it is the ball of rotation angles below pi.
    pub fn log(&self, g: &GroupElement<T>) -> Result<AlgebraElement<T>> {
        let n = self.size();
        let (q, mut nu) = self.eigen_decomposition(g);
        let band = T::lit(T::AMBIGUITY_BAND);
        match self.spec.family {
            GroupFamily::SU(_) => {
                let total = nu.iter().fold(T::zero(), |a, &b| a + b);
                let m = total.round().to_i64().unwrap_or(0);
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&i, &j| nu[j].partial_cmp(&nu[i]).unwrap_or(std::cmp::Ordering::Equal));
                if m > 0 {
                    for &i in order.iter().take(m as usize) {
                        nu[i] -= T::one();
                    }
                } else if m < 0 {
                    for &i in order.iter().rev().take((-m) as usize) {
                        nu[i] += T::one();
                    }
                }
                let hi = nu.iter().copied().fold(T::lit(-10.0), |a, b| a.max(b));
                let lo = nu.iter().copied().fold(T::lit(10.0), |a, b| a.min(b));
                if hi - lo >= T::one() - band {
                    return Err(Error::NotInB);
                }
            }
            GroupFamily::SO3 => {
                if nu.iter().any(|v| v.abs() >= T::lit(0.5) - band) {
                    return Err(Error::NotInB);
                }
            }
        }
        let two_pi = T::lit(2.0 * PI);
        let mut d = CMat::<T>::zeros(n, n);
        for (k, &v) in nu.iter().enumerate() {
            d[(k, k)] = Complex::new(T::zero(), two_pi * v);
        }
        let raw = &q * d * q.adjoint();
        Ok(self.project(&raw))
    }

    /// Orthogonal projection of an arbitrary matrix onto g.
    pub fn project(&self, m: &CMat<T>) -> AlgebraElement<T> {
        let n = self.size();
        let half = T::lit(0.5);
        let mut x = (m - m.adjoint()).map(|z| z * half);
        if self.spec.is_so3() {
            x = x.map(|z| Complex::new(z.re, T::zero()));
        } else {
            let tr = x.trace() / Complex::new(T::from_usize(n).unwrap(), T::zero());
            for i in 0..n {
                x[(i, i)] -= tr;
            }
        }
        AlgebraElement { x }
    }

    /// Eigenvalues of `ad(X)`, purely imaginary, sorted by imaginary part.
    pub fn ad_spectrum(&self, x: &AlgebraElement<T>) -> Vec<Complex<T>> {
        let (_, mu) = skew_eigen(&self.ad_matrix(x));
        let mut ev: Vec<Complex<T>> = mu.into_iter().map(|m| Complex::new(T::zero(), -m)).collect();
        ev.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    /// The parameters `nu` of the ad-eigenvalues `2 pi i nu`.
    pub fn ad_nus(&self, x: &AlgebraElement<T>) -> Vec<T> {
        let two_pi = T::lit(2.0 * PI);
        self.ad_spectrum(x).into_iter().map(|z| z.im / two_pi).collect()
    }

    /// Whether `exp` is regular at X: no ad-eigenvalue equals `2 pi i k`, k ≠ 0.
    pub fn is_exp_regular(&self, x: &AlgebraElement<T>) -> Result<bool> {
        let exact = T::lit(T::EXACT_BAND);
        let amb = T::lit(T::AMBIGUITY_BAND);
        let mut ambiguous = None;
        for nu in self.ad_nus(x) {
            let k = nu.round();
            if k == T::zero() {
                continue;
            }
            let dist = (nu - k).abs();
            if dist <= exact {
                return Ok(false);
            }
            if dist < amb {
                ambiguous = Some((nu, k));
            }
        }
        match ambiguous {
            Some((nu, k)) => Err(Error::BoundaryAmbiguous {
                nu: nu.as_f64(),
                wall: k.as_f64(),
            }),
            None => Ok(true),
        }
    }

    /// Membership in O: every ad-eigenvalue `2 pi i nu` has `|nu| < 1`.
    pub fn in_o(&self, x: &AlgebraElement<T>) -> Result<bool> {
        let exact = T::lit(T::EXACT_BAND);
        let amb = T::lit(T::AMBIGUITY_BAND);
        let mut ambiguous = None;
        for nu in self.ad_nus(x) {
            let a = nu.abs();
            let dist = (a - T::one()).abs();
            if a >= T::one() || dist <= exact {
                return Ok(false);
            }
            if dist < amb {
                ambiguous = Some(nu);
            }
        }
        match ambiguous {
            Some(nu) => Err(Error::BoundaryAmbiguous {
                nu: nu.as_f64(),
                wall: nu.signum().as_f64(),
            }),
            None => Ok(true),
        }
    }

    /// Rotation angle of an so(3) element (its Euclidean length).
    pub fn so3_angle(&self, x: &AlgebraElement<T>) -> T {
        let s = -trace_product(&x.x, &x.x).re * T::lit(0.5);
        s.max(T::zero()).sqrt()
    }

    /// Right-trivialized derivative of exp: `F(ad X)` with `F(z) = (e^z - 1)/z`,
    /// so that `d/dt exp(X + tY) = (F(ad X) Y) exp(X)`.
    pub fn dexp_right_matrix(&self, x: &AlgebraElement<T>) -> DMatrix<T> {
        let (v, mu) = skew_eigen(&self.ad_matrix(x));
        apply_skew_spectrum(&v, &mu, phi_right)
    }

    /// Left-trivialized derivative: `G(ad X)` with `G(z) = (1 - e^-z)/z`, so that
    /// `d/dt exp(X + tY) = exp(X) (G(ad X) Y)`.
    pub fn dexp_left_matrix(&self, x: &AlgebraElement<T>) -> DMatrix<T> {
        let (v, mu) = skew_eigen(&self.ad_matrix(x));
        apply_skew_spectrum(&v, &mu, |z| phi_right(-z))
    }

    /// Inverse of [`Self::dexp_right_matrix`]. Only meaningful where exp is regular.
    pub fn dexp_right_inverse(&self, x: &AlgebraElement<T>) -> DMatrix<T> {
        let (v, mu) = skew_eigen(&self.ad_matrix(x));
        apply_skew_spectrum(&v, &mu, |z| Complex::new(T::one(), T::zero()) / phi_right(z))
    }

    /// Derivative of exp at X in direction Y, as a matrix tangent at exp(X).
    pub fn dexp(&self, x: &AlgebraElement<T>, y: &AlgebraElement<T>) -> CMat<T> {
        let g = self.exp(x);
        let yr = self.from_coords(&(self.dexp_right_matrix(x) * self.coords(y)));
        &yr.x * &g.m
    }

    /// Haar-random group element.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement<T> {
        match self.spec.family {
            GroupFamily::SU(2) => {
                let q = unit_quaternion(rng);
                GroupElement {
                    m: su2_from_quaternion(q),
                }
            }
            GroupFamily::SO3 => {
                let q = unit_quaternion(rng);
                GroupElement {
                    m: so3_from_quaternion(q),
                }
            }
            GroupFamily::SU(n) => haar_su(n, rng),
        }
    }

    /// Algebra element with independent standard normal coordinates times `radius`.
    pub fn random_algebra<R: Rng + ?Sized>(&self, rng: &mut R, radius: f64) -> AlgebraElement<T> {
        let v = DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|_| {
                let s: f64 = StandardNormal.sample(rng);
                T::lit(s * radius)
            }),
        );
        self.from_coords(&v)
    }

    /// Diagonal torus element `2 pi i diag(nu)` (SU(n)) or the so(3) element
    /// with rotation angle `4 pi nu_1` about z (SO(3), lifted coordinates).
    pub fn torus_element(&self, nu: &[T]) -> AlgebraElement<T> {
        let two_pi = T::lit(2.0 * PI);
        match self.spec.family {
            GroupFamily::SU(n) => {
                let mut x = CMat::<T>::zeros(n, n);
                for (k, &v) in nu.iter().enumerate().take(n) {
                    x[(k, k)] = Complex::new(T::zero(), two_pi * v);
                }
                AlgebraElement { x }
            }
            GroupFamily::SO3 => {
                let theta = T::lit(2.0) * two_pi * nu[0];
                let mut x = CMat::<T>::zeros(3, 3);
                x[(1, 0)] = Complex::new(theta, T::zero());
                x[(0, 1)] = Complex::new(-theta, T::zero());
                AlgebraElement { x }
            }
        }
    }
}

/// `tr(A B)` without forming the product.
pub(crate) fn trace_product<T: Scalar>(a: &CMat<T>, b: &CMat<T>) -> Complex<T> {
    let n = a.nrows();
    let mut s = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        for k in 0..n {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

/// `(e^z - 1)/z`, with its Taylor series near 0.
fn phi_right<T: Scalar>(z: Complex<T>) -> Complex<T> {
    if z.modulus() < T::lit(1.0e-5) {
        let one = Complex::new(T::one(), T::zero());
        one + z * T::lit(0.5) + z * z * T::lit(1.0 / 6.0) + z * z * z * T::lit(1.0 / 24.0)
    } else {
        (ComplexField::exp(z) - Complex::new(T::one(), T::zero())) / z
    }
}

fn su_basis<T: Scalar>(n: usize) -> Vec<CMat<T>> {
    let r2 = (0.5f64).sqrt();
    let mut out = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut a = CMat::<T>::zeros(n, n);
            a[(j, k)] = cplx(r2, 0.0);
            a[(k, j)] = cplx(-r2, 0.0);
            out.push(a);
            let mut b = CMat::<T>::zeros(n, n);
            b[(j, k)] = cplx(0.0, r2);
            b[(k, j)] = cplx(0.0, r2);
            out.push(b);
        }
    }
    for m in 1..n {
        let s = 1.0 / ((m * (m + 1)) as f64).sqrt();
        let mut d = CMat::<T>::zeros(n, n);
        for i in 0..m {
            d[(i, i)] = cplx(0.0, s);
        }
        d[(m, m)] = cplx(0.0, -(m as f64) * s);
        out.push(d);
    }
    out
}

fn so3_basis<T: Scalar>() -> Vec<CMat<T>> {
    let r2 = (0.5f64).sqrt();
    // L_x, L_y, L_z with L_a b = e_a × b.
    let pairs = [(2usize, 1usize), (0, 2), (1, 0)];
    pairs
        .iter()
        .map(|&(i, j)| {
            let mut l = CMat::<T>::zeros(3, 3);
            l[(i, j)] = cplx(r2, 0.0);
            l[(j, i)] = cplx(-r2, 0.0);
            l
        })
        .collect()
}

fn unit_quaternion<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-6 {
            return q.map(|v| v / n);
        }
    }
}

fn su2_from_quaternion<T: Scalar>(q: [f64; 4]) -> CMat<T> {
    let [a, b, c, d] = q;
    CMat::from_row_slice(2, 2, &[cplx(a, b), cplx(c, d), cplx(-c, d), cplx(a, -b)])
}

fn so3_from_quaternion<T: Scalar>(q: [f64; 4]) -> CMat<T> {
    let [w, x, y, z] = q;
    let r = [
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    ];
    CMat::from_iterator(3, 3, (0..9).map(|k| cplx(r[(k % 3) * 3 + k / 3], 0.0)))
}

fn haar_su<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> GroupElement<T> {
    let z = DMatrix::<Complex<f64>>::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re, im) * (0.5f64).sqrt()
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    let det = q.determinant();
    let k = rng.random_range(0..n) as f64;
    let ang = -det.arg() / n as f64 + 2.0 * PI * k / n as f64;
    let fix = Complex::new(ang.cos(), ang.sin());
    GroupElement {
        m: q.map(|z| {
            let w = z * fix;
            cplx(w.re, w.im)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn su(n: usize) -> LieGroup<f64> {
        LieGroup::new(LieGroupSpec::su(n).unwrap())
    }

    fn so3() -> LieGroup<f64> {
        LieGroup::new(LieGroupSpec::so3())
    }

    #[test]
    fn bases_are_orthonormal() {
        for g in [su(2), su(3), su(4), so3()] {
            for (i, a) in g.basis().iter().enumerate() {
                for (j, b) in g.basis().iter().enumerate() {
                    let p = -trace_product(a, b).re;
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((p - want).abs() < 1e-14);
                }
                let e = AlgebraElement { x: a.clone() };
                assert!(g.algebra_residual(&e) < 1e-14);
            }
            assert_eq!(g.dim(), g.spec().dim_g());
        }
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let g = su(3);
        assert!(g.exp(&g.zero()).distance(&g.identity()) < 1e-15);
    }

    #[test]
    fn exp_half_turn_su2_is_minus_identity() {
        let g = su(2);
        let x = g.torus_element(&[0.5, -0.5]);
        let e = g.exp(&x);
        let minus = GroupElement {
            m: CMat::<f64>::identity(2, 2).map(|z| -z),
        };
        assert!(e.distance(&minus) < 1e-14);
    }

    #[test]
    fn exp_so3_matches_rodrigues() {
        let g = so3();
        // pi * L_z, with unnormalized L_z.
        let mut x = CMat::<f64>::zeros(3, 3);
        x[(1, 0)] = Complex::new(PI, 0.0);
        x[(0, 1)] = Complex::new(-PI, 0.0);
        let e = g.exp(&AlgebraElement { x: x.clone() });
        let k = x.map(|z| z.re / PI);
        let rod = DMatrix::<f64>::identity(3, 3) + &k * PI.sin() + &k * &k * (1.0 - PI.cos());
        for i in 0..3 {
            for j in 0..3 {
                assert!((e.m[(i, j)].re - rod[(i, j)]).abs() < 1e-14);
            }
        }
        assert!((e.m[(0, 0)].re + 1.0).abs() < 1e-14);
        assert!((e.m[(2, 2)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exp_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for g in [su(2), su(3), su(4), so3()] {
            for _ in 0..10 {
                let x = g.random_algebra(&mut rng, 1.0);
                let h = g.random_element(&mut rng);
                let lhs = g.exp(&g.adjoint(&h, &x));
                let rhs = &(&h * &g.exp(&x)) * &h.inverse();
                assert!(lhs.distance(&rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn ad_spectrum_su2_and_su3() {
        let g = su(2);
        let nus = g.ad_nus(&g.torus_element(&[0.2, -0.2]));
        assert!((nus[0] + 0.4).abs() < 1e-12 && nus[1].abs() < 1e-12 && (nus[2] - 0.4).abs() < 1e-12);

        let g = su(3);
        let v = [0.3, 0.05, -0.35];
        let mut want = vec![0.0, 0.0];
        for j in 0..3 {
            for k in 0..3 {
                if j != k {
                    want.push(v[j] - v[k]);
                }
            }
        }
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got = g.ad_nus(&g.torus_element(&v));
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        let zero = g.ad_spectrum(&g.zero());
        assert!(zero.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn regularity_boundary_cases() {
        let g = su(2);
        assert!(g.is_exp_regular(&g.zero()).unwrap());
        assert!(g.is_exp_regular(&g.torus_element(&[0.3, -0.3])).unwrap());
        assert!(!g.is_exp_regular(&g.torus_element(&[0.5, -0.5])).unwrap());
        let near = 0.5 + 2e-10;
        assert!(matches!(
            g.is_exp_regular(&g.torus_element(&[near, -near])),
            Err(Error::BoundaryAmbiguous { .. })
        ));
        assert!(g.in_o(&g.zero()).unwrap());
        assert!(g.in_o(&g.torus_element(&[0.49, -0.49])).unwrap());
        assert!(!g.in_o(&g.torus_element(&[0.51, -0.51])).unwrap());
    }

    #[test]
    fn log_of_minus_identity_fails() {
        let g = su(2);
        let minus = GroupElement {
            m: CMat::<f64>::identity(2, 2).map(|z| -z),
        };
        assert_eq!(g.log(&minus), Err(Error::NotInB));
        assert!(g.log(&g.identity()).unwrap().x.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn log_exp_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for g in [su(2), su(3), su(4), so3()] {
            let mut tested = 0;
            while tested < 20 {
                let x = g.random_algebra(&mut rng, 1.5);
                let inside = if g.spec().is_so3() {
                    g.so3_angle(&x) < PI - 1e-6
                } else {
                    g.in_o(&x) == Ok(true)
                };
                if !inside {
                    continue;
                }
                let y = g.log(&g.exp(&x)).unwrap();
                assert!(max_abs_c(&(&y.x - &x.x)) < 1e-9, "{}", g.spec());
                tested += 1;
            }
        }
    }

    #[test]
    fn pair_is_ad_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = su(3);
        for _ in 0..100 {
            let x = g.random_algebra(&mut rng, 1.0);
            let y = g.random_algebra(&mut rng, 1.0);
            let h = g.random_element(&mut rng);
            let r = g.pair(&g.adjoint(&h, &x), &g.adjoint(&h, &y)) - g.pair(&x, &y);
            assert!(r.abs() < 1e-10);
            assert!((g.pair(&x, &y) - g.pair(&y, &x)).abs() < 1e-14);
        }
        let x = g.random_algebra(&mut rng, 1.0);
        assert!(max_abs_c(&g.bracket(&x, &x).x) < 1e-15);
        assert!(max_abs_c(&(g.adjoint(&g.identity(), &x).x - &x.x)) < 1e-15);
    }

    #[test]
    fn dexp_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = su(3);
        let h = 1e-4;
        for _ in 0..20 {
            let x = g.random_algebra(&mut rng, 1.0);
            let y = g.random_algebra(&mut rng, 1.0);
            let fd = (g.exp(&x.add(&y.scaled(h))).m - g.exp(&x.sub(&y.scaled(h))).m) / Complex::new(2.0 * h, 0.0);
            assert!(max_abs_c(&(fd - g.dexp(&x, &y))) < 1e-6);
            let l = g.dexp_left_matrix(&x);
            let yl = g.from_coords(&(l * g.coords(&y)));
            assert!(max_abs_c(&(g.exp(&x).m * yl.x - g.dexp(&x, &y))) < 1e-12);
        }
        let y = g.random_algebra(&mut rng, 1.0);
        assert!(max_abs_c(&(g.dexp(&g.zero(), &y) - &y.x)) < 1e-14);
    }

    #[test]
    fn dexp_rank_drops_exactly_at_singular_points() {
        let g = su(2);
        let rank = |nu: f64| crate::linalg::rank_unchecked(&g.dexp_right_matrix(&g.torus_element(&[nu, -nu])), 1e-8);
        assert_eq!(rank(0.3), 3);
        assert_eq!(rank(0.5), 1);
        assert_eq!(rank(0.49), 3);
    }

    #[test]
    fn random_elements_satisfy_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for g in [su(2), su(3), su(4), so3()] {
            for _ in 0..20 {
                let a = g.random_element(&mut rng);
                let b = g.random_element(&mut rng);
                assert!(g.group_residual(&(&a * &b)) < 1e-10);
                assert!(g.group_residual(&a.inverse()) < 1e-10);
            }
        }
    }

    #[test]
    fn single_precision_exp_log() {
        let g = LieGroup::<f32>::new(LieGroupSpec::su(2).unwrap());
        let x = g.torus_element(&[0.2, -0.2]);
        let y = g.log(&g.exp(&x)).unwrap();
        assert!(max_abs_c(&(&y.x - &x.x)) < 1e-4);
    }

    #[test]
    fn parse_group_names() {
        assert_eq!("SU(3)".parse::<LieGroupSpec>().unwrap().dim_g(), 8);
        assert_eq!("so3".parse::<LieGroupSpec>().unwrap().dim_g(), 3);
        assert!("SU(5)".parse::<LieGroupSpec>().is_err());
    }
}
