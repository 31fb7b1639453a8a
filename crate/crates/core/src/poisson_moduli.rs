//! Representation spaces of a bordered surface group with boundary values in
//! B, invariant functions on them, and the Poisson bracket obtained from the
//! symplectic form on parabolic cohomology along each fixed-class leaf.
//!
//! Tangent vectors at a representation are parabolic 1-cocycles; a cocycle
//! `u` moves the point along `phi(g) -> exp(t u_g) phi(g)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cartan_alcove::TorusPoint;
use crate::error::{Error, Result};
use crate::lie_core::{AlgebraElement, GroupElement, LieGroup};
use crate::linalg::{pseudo_inverse, rank_unchecked};
use crate::scalar::Scalar;
use crate::surface_words::{fox_row, relator, Assignment, BarChain2, Generator, SurfaceData, Word};
use crate::twisted_cohomology::{build_complex, cohomology_dims, parabolic_h1, TwistedComplex, Variant, RANK_TOL};

/// Relation tolerance for accepted samples.
pub const EPS_REL: f64 = 1.0e-10;
/// Step for first derivatives of invariant functions.
pub const DIFF_STEP: f64 = 1.0e-5;
/// Step for derivatives of brackets.
pub const NESTED_STEP: f64 = 1.0e-3;
/// Candidates drawn by the free sampler before giving up.
pub const MAX_ATTEMPTS: usize = 1000;

const NEWTON_ITERS: usize = 60;
const NEWTON_RESTARTS: usize = 20;

/// How [`sample_rep`] chooses boundary values.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleMode<T: Scalar> {
    /// Haar-random generators with the last boundary value solved for.
    Free,
    /// Boundary values in the classes of `exp` of the given torus points.
    Constrained(Vec<TorusPoint<T>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SmoothFlags {
    pub h0: usize,
    pub h1: usize,
    pub omega_rank: usize,
}

impl SmoothFlags {
    pub fn is_smooth(&self) -> bool {
        self.h0 == 0 && self.omega_rank == self.h1
    }
}

/// A representation of the surface group with boundary values in B.
#[derive(Debug, Clone)]
pub struct RepPoint<T: Scalar> {
    pub surface: SurfaceData,
    pub phi: Assignment<T>,
    /// `|phi(r) - Id|`.
    pub relation_residual: T,
    /// `X_k = log C_k`, in O.
    pub lifts: Vec<AlgebraElement<T>>,
    /// Conjugators with `C_k = F_k exp(T_k) F_k^-1` (constrained samples only).
    pub frames: Vec<GroupElement<T>>,
    pub flags: SmoothFlags,
}

impl<T: Scalar> RepPoint<T> {
    /// Validates `phi` and computes lifts and smoothness flags.
    pub fn new(group: &LieGroup<T>, s: &SurfaceData, phi: Assignment<T>, c: &BarChain2) -> Result<Self> {
        let relation_residual = phi.evaluate(&relator(s))?.distance(&group.identity());
        let mut lifts = Vec::with_capacity(s.boundaries);
        for k in 1..=s.boundaries {
            lifts.push(group.log(phi.get(Generator::Z(k))?)?);
        }
        let flags = smooth_flags(group, s, &phi, c)?;
        Ok(Self {
            surface: *s,
            phi,
            relation_residual,
            lifts,
            frames: Vec::new(),
            flags,
        })
    }

    /// Conjugates every generator value by `h`.
    pub fn conjugate(&self, group: &LieGroup<T>, h: &GroupElement<T>) -> Self {
        let mut out = self.clone();
        out.phi = self.phi.conjugate(h);
        out.lifts = self.lifts.iter().map(|x| group.adjoint(h, x)).collect();
        out.frames = self.frames.iter().map(|f| h * f).collect();
        out
    }
}

fn smooth_flags<T: Scalar>(group: &LieGroup<T>, s: &SurfaceData, phi: &Assignment<T>, c: &BarChain2) -> Result<SmoothFlags> {
    let k = build_complex(group, phi, s, Variant::Parabolic)?;
    let dims = cohomology_dims(&k, RANK_TOL)?;
    let h = parabolic_h1(group, phi, &k, c)?;
    Ok(SmoothFlags {
        h0: dims.h0,
        h1: h.basis.ncols(),
        omega_rank: rank_unchecked(&h.omega, RANK_TOL),
    })
}

/// The per-point random stream: `seed` selects the key, `index` the stream.
pub fn point_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws one representation. Free mode rejects candidates whose solved
/// boundary value lies outside B; constrained mode runs a damped Newton
/// iteration on the relation with the boundary values moving in their
/// classes.
pub fn sample_rep<T: Scalar>(
    group: &LieGroup<T>,
    s: &SurfaceData,
    c: &BarChain2,
    seed: u64,
    index: u64,
    mode: &SampleMode<T>,
) -> Result<RepPoint<T>> {
    let mut rng = point_rng(seed, index);
    match mode {
        SampleMode::Free => sample_free(group, s, c, &mut rng),
        SampleMode::Constrained(targets) => {
            let tori = class_tori(group, s, targets)?;
            let mut last = Error::NewtonDiverged { residual: f64::INFINITY };
            for _ in 0..NEWTON_RESTARTS {
                let mut phi = Assignment::new(s.group_generators().into_iter().map(|g| (g, group.random_element(&mut rng))));
                let mut frames: Vec<GroupElement<T>> = (0..s.boundaries).map(|_| group.random_element(&mut rng)).collect();
                match newton(group, s, &mut phi, &mut frames, &tori) {
                    Ok(()) => {
                        let mut p = RepPoint::new(group, s, phi, c)?;
                        p.frames = frames;
                        return Ok(p);
                    }
                    Err(e @ Error::NewtonDiverged { .. }) => last = e,
                    Err(e) => return Err(e),
                }
            }
            Err(last)
        }
    }
}

fn sample_free<T: Scalar, R: Rng + ?Sized>(
    group: &LieGroup<T>,
    s: &SurfaceData,
    c: &BarChain2,
    rng: &mut R,
) -> Result<RepPoint<T>> {
    if s.boundaries == 0 {
        return Err(Error::InvalidSurface {
            genus: s.genus,
            boundaries: s.boundaries,
        });
    }
    let last = Generator::Z(s.boundaries);
    for _ in 0..MAX_ATTEMPTS {
        let mut phi = Assignment::new(s.group_generators().into_iter().map(|g| (g, group.random_element(rng))));
        phi.set(last, group.identity());
        let r = phi.evaluate(&relator(s))?;
        phi.set(last, r.inverse());
        match RepPoint::new(group, s, phi, c) {
            Ok(p) => return Ok(p),
            Err(Error::NotInB) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RejectionExhausted { attempts: MAX_ATTEMPTS })
}

fn class_tori<T: Scalar>(group: &LieGroup<T>, s: &SurfaceData, targets: &[TorusPoint<T>]) -> Result<Vec<GroupElement<T>>> {
    if targets.len() != s.boundaries {
        return Err(Error::DimensionMismatch {
            expected: s.boundaries,
            got: targets.len(),
        });
    }
    targets
        .iter()
        .map(|t| {
            let g = group.exp(&group.torus_element(&t.nu));
            group.log(&g)?;
            Ok(g)
        })
        .collect()
}

/// Moves a constrained sample to new class targets by continuation from `prev`.
pub fn continue_rep<T: Scalar>(
    group: &LieGroup<T>,
    prev: &RepPoint<T>,
    targets: &[TorusPoint<T>],
    c: &BarChain2,
) -> Result<RepPoint<T>> {
    let s = &prev.surface;
    let tori = class_tori(group, s, targets)?;
    let mut phi = prev.phi.clone();
    let mut frames = if prev.frames.len() == s.boundaries {
        prev.frames.clone()
    } else {
        vec![group.identity(); s.boundaries]
    };
    newton(group, s, &mut phi, &mut frames, &tori)?;
    let mut p = RepPoint::new(group, s, phi, c)?;
    p.frames = frames;
    Ok(p)
}

/// Damped Gauss–Newton on `log phi(r) = 0` over the free generators and the
/// boundary frames, minimum-norm steps.
fn newton<T: Scalar>(
    group: &LieGroup<T>,
    s: &SurfaceData,
    phi: &mut Assignment<T>,
    frames: &mut [GroupElement<T>],
    tori: &[GroupElement<T>],
) -> Result<()> {
    let d = group.dim();
    let gens = s.group_generators();
    let l2 = 2 * s.genus;
    let tol = T::lit(EPS_REL * T::TOLERANCE_SCALE);
    let place = |phi: &mut Assignment<T>, frames: &[GroupElement<T>]| {
        for (k, (f, t)) in frames.iter().zip(tori).enumerate() {
            phi.set(Generator::Z(k + 1), &(f * t) * &f.inverse());
        }
    };
    let error = |phi: &Assignment<T>| -> Result<T> { Ok(phi.evaluate(&relator(s))?.distance(&group.identity())) };
    place(phi, frames);
    let mut err = error(phi)?;
    for _ in 0..NEWTON_ITERS {
        if err < T::lit(1.0e-3) * tol {
            break;
        }
        let r = phi.evaluate(&relator(s))?;
        let (res, dinv) = match group.log(&r) {
            Ok(x) => (group.coords(&x), group.dexp_right_inverse(&x)),
            Err(_) => (group.coords(&group.project(&r.m)), DMatrix::identity(d, d)),
        };
        let mut jac = fox_row(group, &relator(s), &gens, phi)?;
        for k in 1..=s.boundaries {
            let z = phi.get(Generator::Z(k))?;
            let m = DMatrix::<T>::identity(d, d) - group.adjoint_matrix(z);
            let off = (l2 + k - 1) * d;
            let blk = jac.columns(off, d) * m;
            jac.columns_mut(off, d).copy_from(&blk);
        }
        let step = -pseudo_inverse(&(dinv * jac), 1.0e-12) * res;
        let mut alpha = T::one();
        let mut accepted = false;
        for _ in 0..12 {
            let mut trial = phi.clone();
            let mut tf = frames.to_vec();
            for (i, &g) in gens.iter().enumerate() {
                let e = group.exp(&group.from_coords(&(step.rows(i * d, d) * alpha)));
                match g {
                    Generator::Z(k) => tf[k - 1] = &e * &frames[k - 1],
                    _ => trial.set(g, &e * phi.get(g)?),
                }
            }
            place(&mut trial, &tf);
            let e = error(&trial)?;
            if e < err {
                *phi = trial;
                frames.clone_from_slice(&tf);
                err = e;
                accepted = true;
                break;
            }
            alpha *= T::lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    if err < tol {
        Ok(())
    } else {
        Err(Error::NewtonDiverged { residual: err.as_f64() })
    }
}

/// Sorted eigenphases of each boundary value: the class invariants that
/// identify the leaf through the point.
pub fn leaf_coordinates<T: Scalar>(group: &LieGroup<T>, rho: &RepPoint<T>) -> Result<Vec<Vec<T>>> {
    (1..=rho.surface.boundaries)
        .map(|k| Ok(group.eigenphases(rho.phi.get(Generator::Z(k))?)))
        .collect()
}

/// A conjugation-invariant function on representations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvariantFunction {
    /// `Re tr rho(w)`.
    Wilson(Word),
    /// `Re tr C_k^power`, or its imaginary part.
    BoundaryClass { k: usize, power: u32, imag: bool },
}

impl InvariantFunction {
    pub fn evaluate<T: Scalar>(&self, phi: &Assignment<T>) -> Result<T> {
        match self {
            InvariantFunction::Wilson(w) => Ok(phi.evaluate(w)?.m.trace().re),
            InvariantFunction::BoundaryClass { k, power, imag } => {
                let c = phi.get(Generator::Z(*k))?;
                let mut m = c.m.clone();
                for _ in 1..*power {
                    m = &m * &c.m;
                }
                let t = m.trace();
                Ok(if *imag { t.im } else { t.re })
            }
        }
    }

    /// Wilson function of a word given in text form, e.g. `x1 y1^-1`.
    pub fn wilson(word: &str) -> Result<Self> {
        Ok(InvariantFunction::Wilson(word.parse()?))
    }

    pub fn label(&self) -> String {
        match self {
            InvariantFunction::Wilson(w) => format!("W[{w}]"),
            InvariantFunction::BoundaryClass { k, power, imag } => {
                format!("{}tr(z{k}^{power})", if *imag { "Im" } else { "Re" })
            }
        }
    }
}

/// Class invariants of the `k`-th boundary value that separate classes.
pub fn boundary_invariants<T: Scalar>(group: &LieGroup<T>, k: usize) -> Vec<InvariantFunction> {
    let n = group.size();
    let mut out = vec![InvariantFunction::BoundaryClass { k, power: 1, imag: false }];
    if !group.spec().is_so3() && n >= 3 {
        out.push(InvariantFunction::BoundaryClass { k, power: 1, imag: true });
        for p in 2..n as u32 {
            out.push(InvariantFunction::BoundaryClass { k, power: p, imag: false });
            out.push(InvariantFunction::BoundaryClass { k, power: p, imag: true });
        }
    }
    out
}

/// Default Wilson menu: `x1`, `y1`, `x1 y1`, boundary words and one word
/// crossing two handles (or a handle and a boundary).
pub fn default_wilson_words(s: &SurfaceData) -> Vec<InvariantFunction> {
    let mut words: Vec<String> = Vec::new();
    if s.genus >= 1 {
        words.extend(["x1", "y1", "x1 y1"].map(String::from));
    }
    if s.boundaries >= 1 {
        words.push("z1".into());
    }
    if s.boundaries >= 2 {
        words.push("z1 z2".into());
    }
    if s.genus >= 2 {
        words.push("x1 x2".into());
    } else if s.genus == 1 && s.boundaries >= 1 {
        words.push("y1 z1".into());
    }
    words.iter().map(|w| InvariantFunction::Wilson(w.parse().unwrap())).collect()
}

/// `H^1` of the parabolic complex at a point, with the symplectic matrix.
#[derive(Debug, Clone)]
pub struct LeafTangent<T: Scalar> {
    pub complex: TwistedComplex<T>,
    /// Harmonic cocycles, parabolic coordinates.
    pub basis: DMatrix<T>,
    /// The same cocycles in full generator coordinates.
    pub basis_full: DMatrix<T>,
    pub omega: DMatrix<T>,
}

fn leaf_tangent_at<T: Scalar>(group: &LieGroup<T>, s: &SurfaceData, phi: &Assignment<T>, c: &BarChain2) -> Result<LeafTangent<T>> {
    let k = build_complex(group, phi, s, Variant::Parabolic)?;
    let dims = cohomology_dims(&k, RANK_TOL)?;
    let h = parabolic_h1(group, phi, &k, c)?;
    let rank = rank_unchecked(&h.omega, RANK_TOL);
    if dims.h0 != 0 || rank != h.basis.ncols() {
        return Err(Error::NotSmoothPoint {
            h0: dims.h0,
            rank,
            h1: h.basis.ncols(),
        });
    }
    let basis_full = k.projection.transpose() * &h.basis;
    let omega = (&h.omega - h.omega.transpose()) * T::lit(0.5);
    Ok(LeafTangent {
        complex: k,
        basis: h.basis,
        basis_full,
        omega,
    })
}

/// Harmonic representatives of parabolic `H^1` at a smooth point.
pub fn tangent_basis<T: Scalar>(group: &LieGroup<T>, rho: &RepPoint<T>, c: &BarChain2) -> Result<LeafTangent<T>> {
    leaf_tangent_at(group, &rho.surface, &rho.phi, c)
}

/// `phi(g) -> exp(t v_g) phi(g)` for `v` in full generator coordinates.
pub fn displace<T: Scalar>(group: &LieGroup<T>, s: &SurfaceData, phi: &Assignment<T>, v: &DVector<T>, t: T) -> Result<Assignment<T>> {
    let d = group.dim();
    let mut out = phi.clone();
    for (i, g) in s.group_generators().into_iter().enumerate() {
        let e = group.exp(&group.from_coords(&(v.rows(i * d, d) * t)));
        out.set(g, &e * phi.get(g)?);
    }
    Ok(out)
}

/// Central differences of `f` along every basis cocycle.
pub fn differential_of<T, F>(group: &LieGroup<T>, s: &SurfaceData, phi: &Assignment<T>, tb: &LeafTangent<T>, f: F) -> Result<DVector<T>>
where
    T: Scalar,
    F: Fn(&Assignment<T>) -> Result<T>,
{
    let h = T::lit(DIFF_STEP);
    let mut out = DVector::<T>::zeros(tb.basis_full.ncols());
    for j in 0..tb.basis_full.ncols() {
        let u = tb.basis_full.column(j).into_owned();
        let plus = f(&displace(group, s, phi, &u, h)?)?;
        let minus = f(&displace(group, s, phi, &u, -h)?)?;
        out[j] = (plus - minus) / (h + h);
    }
    Ok(out)
}

pub fn differential<T: Scalar>(
    group: &LieGroup<T>,
    f: &InvariantFunction,
    rho: &RepPoint<T>,
    tb: &LeafTangent<T>,
) -> Result<DVector<T>> {
    differential_of(group, &rho.surface, &rho.phi, tb, |p| f.evaluate(p))
}

/// Coefficients `a` with `omega a = df`.
fn solve_hamiltonian<T: Scalar>(tb: &LeafTangent<T>, df: &DVector<T>) -> Result<DVector<T>> {
    tb.omega.clone().lu().solve(df).ok_or(Error::SingularOmega)
}

/// Hamiltonian vector field of `f` at `phi`, in full generator coordinates.
fn hamiltonian_at<T: Scalar>(
    group: &LieGroup<T>,
    s: &SurfaceData,
    phi: &Assignment<T>,
    c: &BarChain2,
    f: &InvariantFunction,
) -> Result<DVector<T>> {
    let tb = leaf_tangent_at(group, s, phi, c)?;
    let df = differential_of(group, s, phi, &tb, |p| f.evaluate(p))?;
    Ok(&tb.basis_full * solve_hamiltonian(&tb, &df)?)
}

fn bracket_at<T: Scalar>(
    group: &LieGroup<T>,
    s: &SurfaceData,
    phi: &Assignment<T>,
    c: &BarChain2,
    f: &InvariantFunction,
    g: &InvariantFunction,
) -> Result<T> {
    let tb = leaf_tangent_at(group, s, phi, c)?;
    let df = differential_of(group, s, phi, &tb, |p| f.evaluate(p))?;
    let dg = differential_of(group, s, phi, &tb, |p| g.evaluate(p))?;
    Ok(dg.dot(&solve_hamiltonian(&tb, &df)?))
}

/// `{f, g} = dg(X_f)` with `omega X_f = df` on parabolic `H^1`.
pub fn poisson_bracket<T: Scalar>(
    group: &LieGroup<T>,
    f: &InvariantFunction,
    g: &InvariantFunction,
    rho: &RepPoint<T>,
    c: &BarChain2,
) -> Result<T> {
    bracket_at(group, &rho.surface, &rho.phi, c, f, g)
}

/// Independent evaluation of `{f, g}`: integrates the Hamiltonian field of
/// `f` forward and backward for `steps` midpoint steps of size `dt` and
/// takes the slope of `g`.
pub fn flow_bracket<T: Scalar>(
    group: &LieGroup<T>,
    f: &InvariantFunction,
    g: &InvariantFunction,
    rho: &RepPoint<T>,
    c: &BarChain2,
    dt: f64,
    steps: usize,
) -> Result<T> {
    let s = &rho.surface;
    let flow = |sign: f64| -> Result<Assignment<T>> {
        let h = T::lit(sign * dt);
        let mut phi = rho.phi.clone();
        for _ in 0..steps {
            let v1 = hamiltonian_at(group, s, &phi, c, f)?;
            let mid = displace(group, s, &phi, &v1, h * T::lit(0.5))?;
            let v2 = hamiltonian_at(group, s, &mid, c, f)?;
            phi = displace(group, s, &phi, &v2, h)?;
        }
        Ok(phi)
    };
    let plus = g.evaluate(&flow(1.0)?)?;
    let minus = g.evaluate(&flow(-1.0)?)?;
    Ok((plus - minus) / T::lit(2.0 * dt * steps as f64))
}

/// Largest `|{I, g}|` over the class invariants `I` of the `k`-th boundary
/// value and the test functions `g`.
pub fn casimir_check<T: Scalar>(
    group: &LieGroup<T>,
    k: usize,
    rho: &RepPoint<T>,
    tests: &[InvariantFunction],
    c: &BarChain2,
) -> Result<T> {
    let mut worst = T::zero();
    for inv in boundary_invariants(group, k) {
        for g in tests {
            worst = worst.max(poisson_bracket(group, &inv, g, rho, c)?.abs());
        }
    }
    Ok(worst)
}

/// `|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}|`, the outer brackets by central
/// differences of the inner bracket along `exp(+-tau X)`.
pub fn jacobi_check<T: Scalar>(
    group: &LieGroup<T>,
    fns: [&InvariantFunction; 3],
    rho: &RepPoint<T>,
    c: &BarChain2,
    tau: f64,
) -> Result<T> {
    let [f, g, h] = fns;
    if f == g || g == h || f == h {
        return Ok(T::zero());
    }
    let s = &rho.surface;
    let t = T::lit(tau);
    let outer = |a: &InvariantFunction, b: &InvariantFunction, c2: &InvariantFunction| -> Result<T> {
        let v = hamiltonian_at(group, s, &rho.phi, c, a)?;
        let plus = bracket_at(group, s, &displace(group, s, &rho.phi, &v, t)?, c, b, c2)?;
        let minus = bracket_at(group, s, &displace(group, s, &rho.phi, &v, -t)?, c, b, c2)?;
        Ok((plus - minus) / (t + t))
    };
    Ok((outer(f, g, h)? + outer(g, h, f)? + outer(h, f, g)?).abs())
}

/// One row of a bracket table along a path of class targets.
#[derive(Debug, Clone, Serialize)]
pub struct PathRow {
    pub parameter: f64,
    pub classes: Vec<Vec<f64>>,
    pub smooth: bool,
    /// One entry per requested pair; `None` off the smooth stratum.
    pub brackets: Vec<Option<f64>>,
    /// Largest Casimir bracket against the pair functions.
    pub casimir: Option<f64>,
}

/// Follows a path of class targets by continuation from a constrained sample
/// and tabulates brackets of the given pairs.
pub fn bracket_path<T: Scalar>(
    group: &LieGroup<T>,
    s: &SurfaceData,
    c: &BarChain2,
    seed: u64,
    path: &[(f64, Vec<TorusPoint<T>>)],
    pairs: &[(InvariantFunction, InvariantFunction)],
) -> Result<Vec<PathRow>> {
    let mut rows = Vec::with_capacity(path.len());
    let mut prev: Option<RepPoint<T>> = None;
    for (param, targets) in path {
        let rho = match &prev {
            None => sample_rep(group, s, c, seed, 0, &SampleMode::Constrained(targets.clone()))?,
            Some(p) => continue_rep(group, p, targets, c)?,
        };
        let classes = leaf_coordinates(group, &rho)?
            .into_iter()
            .map(|v| v.into_iter().map(|x| x.as_f64()).collect())
            .collect();
        let smooth = rho.flags.is_smooth();
        let mut brackets = Vec::with_capacity(pairs.len());
        let mut casimir = None;
        if smooth {
            for (f, g) in pairs {
                brackets.push(Some(poisson_bracket(group, f, g, &rho, c)?.as_f64()));
            }
            let tests: Vec<InvariantFunction> = pairs.iter().flat_map(|(f, g)| [f.clone(), g.clone()]).collect();
            let mut worst: f64 = 0.0;
            for k in 1..=s.boundaries {
                worst = worst.max(casimir_check(group, k, &rho, &tests, c)?.as_f64());
            }
            casimir = Some(worst);
        } else {
            brackets.resize(pairs.len(), None);
        }
        rows.push(PathRow {
            parameter: *param,
            classes,
            smooth,
            brackets,
            casimir,
        });
        prev = Some(rho);
    }
    Ok(rows)
}

/// Largest difference quotient `|Delta bracket| / |Delta parameter|` of
/// column `j` between consecutive smooth rows.
pub fn continuity_bound(rows: &[PathRow], j: usize) -> f64 {
    rows.windows(2)
        .filter_map(|w| match (w[0].brackets[j], w[1].brackets[j]) {
            (Some(a), Some(b)) => Some((b - a).abs() / (w[1].parameter - w[0].parameter).abs().max(1e-300)),
            _ => None,
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::LieGroupSpec;
    use crate::surface_words::build_chain_c;

    fn su2() -> LieGroup<f64> {
        LieGroup::new(LieGroupSpec::su(2).unwrap())
    }

    fn su2_class(nu: f64) -> TorusPoint<f64> {
        TorusPoint::new(crate::lie_core::GroupFamily::SU(2), vec![nu, -nu]).unwrap()
    }

    #[test]
    fn free_sampling_three_holed_sphere() {
        let g = su2();
        let s = SurfaceData::new(0, 3).unwrap();
        let c = build_chain_c(&s);
        let p = sample_rep(&g, &s, &c, 7, 0, &SampleMode::Free).unwrap();
        assert!(p.relation_residual < 1e-12);
        let q = sample_rep(&g, &s, &c, 7, 0, &SampleMode::Free).unwrap();
        assert_eq!(p.phi, q.phi);
        let other = sample_rep(&g, &s, &c, 7, 1, &SampleMode::Free).unwrap();
        assert_ne!(p.phi, other.phi);
    }

    #[test]
    fn constrained_sampling_hits_targets() {
        let g = su2();
        let s = SurfaceData::new(1, 2).unwrap();
        let c = build_chain_c(&s);
        let targets = vec![su2_class(0.13), su2_class(0.31)];
        let p = sample_rep(&g, &s, &c, 3, 0, &SampleMode::Constrained(targets)).unwrap();
        assert!(p.relation_residual < EPS_REL);
        let lc = leaf_coordinates(&g, &p).unwrap();
        assert!((lc[0][0] - 0.13).abs() < 1e-8 && (lc[0][1] + 0.13).abs() < 1e-8);
        assert!((lc[1][0] - 0.31).abs() < 1e-8);
        // -Id is not a valid target.
        let bad = vec![su2_class(0.5), su2_class(0.1)];
        assert!(matches!(
            sample_rep(&g, &s, &c, 3, 0, &SampleMode::Constrained(bad)),
            Err(Error::NotInB)
        ));
    }

    #[test]
    fn leaf_coordinates_basics() {
        let g = su2();
        let s = SurfaceData::new(1, 2).unwrap();
        let c = build_chain_c(&s);
        let mut phi = Assignment::new(s.group_generators().into_iter().map(|x| (x, g.identity())));
        phi.set(Generator::X(1), g.exp(&g.torus_element(&[0.1, -0.1])));
        let p = RepPoint::new(&g, &s, phi, &c).unwrap();
        assert!(leaf_coordinates(&g, &p).unwrap().iter().flatten().all(|v| v.abs() < 1e-15));

        let p = sample_rep(&g, &s, &c, 5, 0, &SampleMode::Free).unwrap();
        let mut rng = point_rng(5, 99);
        let q = p.conjugate(&g, &g.random_element(&mut rng));
        let (a, b) = (leaf_coordinates(&g, &p).unwrap(), leaf_coordinates(&g, &q).unwrap());
        for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
            assert!((x - y).abs() < 1e-10);
        }
        // SU(2): eigenphases are +-theta/2pi for the rotation parameter theta.
        let z = p.phi.get(Generator::Z(1)).unwrap();
        let theta = (z.m.trace().re / 2.0).clamp(-1.0, 1.0).acos();
        assert!((a[0][0] - theta / (2.0 * std::f64::consts::PI)).abs() < 1e-10);
    }

    #[test]
    fn tangent_basis_genus_two() {
        let g = su2();
        let s = SurfaceData::new(2, 1).unwrap();
        let c = build_chain_c(&s);
        let p = sample_rep(&g, &s, &c, 11, 0, &SampleMode::Free).unwrap();
        let tb = tangent_basis(&g, &p, &c).unwrap();
        assert_eq!(tb.basis.ncols(), 8);
        assert!((&tb.complex.d1 * &tb.basis).amax() < 1e-8);
        // z-blocks of the full cocycles lie in h_1.
        let d = g.dim();
        let m = g.adjoint_matrix(p.phi.get(Generator::Z(1)).unwrap()) - DMatrix::identity(d, d);
        let h = crate::linalg::column_space(&m, RANK_TOL);
        let zb = tb.basis_full.rows(4 * d, d);
        assert!((&zb - &h * (h.transpose() * &zb)).amax() < 1e-8);

        // Reducible point.
        let mut phi = Assignment::new(s.group_generators().into_iter().map(|x| (x, g.identity())));
        phi.set(Generator::X(1), g.exp(&g.torus_element(&[0.1, -0.1])));
        let r = RepPoint::new(&g, &s, phi, &c).unwrap();
        assert!(!r.flags.is_smooth());
        assert!(matches!(tangent_basis(&g, &r, &c), Err(Error::NotSmoothPoint { .. })));
    }

    #[test]
    fn invariant_functions_are_conjugation_invariant() {
        let g = su2();
        let s = SurfaceData::new(1, 2).unwrap();
        let c = build_chain_c(&s);
        let p = sample_rep(&g, &s, &c, 12, 0, &SampleMode::Free).unwrap();
        let mut rng = point_rng(12, 1);
        let q = p.conjugate(&g, &g.random_element(&mut rng));
        let mut fns = default_wilson_words(&s);
        fns.extend(boundary_invariants(&g, 2));
        for f in fns {
            assert!((f.evaluate(&p.phi).unwrap() - f.evaluate(&q.phi).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn differential_rules() {
        let g = su2();
        let s = SurfaceData::new(1, 2).unwrap();
        let c = build_chain_c(&s);
        let p = sample_rep(&g, &s, &c, 13, 0, &SampleMode::Free).unwrap();
        let tb = tangent_basis(&g, &p, &c).unwrap();
        let zero = differential_of(&g, &s, &p.phi, &tb, |_| Ok(2.5)).unwrap();
        assert_eq!(zero.amax(), 0.0);
        let f = InvariantFunction::wilson("x1 y1").unwrap();
        let df = differential(&g, &f, &p, &tb).unwrap();
        let fv = f.evaluate(&p.phi).unwrap();
        let dsq = differential_of(&g, &s, &p.phi, &tb, |q| Ok(f.evaluate(q)?.powi(2))).unwrap();
        assert!((dsq - df * (2.0 * fv)).amax() < 1e-6);
    }

    #[test]
    fn bracket_properties_and_flow_oracle() {
        let g = su2();
        let s = SurfaceData::new(1, 2).unwrap();
        let c = build_chain_c(&s);
        let p = sample_rep(&g, &s, &c, 14, 0, &SampleMode::Free).unwrap();
        let f = InvariantFunction::wilson("x1").unwrap();
        let h = InvariantFunction::wilson("y1").unwrap();
        assert!(poisson_bracket(&g, &f, &f, &p, &c).unwrap().abs() < 1e-10);
        let fg = poisson_bracket(&g, &f, &h, &p, &c).unwrap();
        let gf = poisson_bracket(&g, &h, &f, &p, &c).unwrap();
        assert!((fg + gf).abs() < 1e-8);
        assert!(fg.abs() > 1e-3);
        let flow = flow_bracket(&g, &f, &h, &p, &c, 1e-3, 2).unwrap();
        assert!((flow - fg).abs() < 1e-4, "{flow} vs {fg}");
    }

    #[test]
    fn boundary_invariants_are_casimirs() {
        let g = su2();
        let s = SurfaceData::new(1, 2).unwrap();
        let c = build_chain_c(&s);
        let tests = default_wilson_words(&s);
        for i in 0..5 {
            let p = sample_rep(&g, &s, &c, 15, i, &SampleMode::Free).unwrap();
            for k in 1..=2 {
                assert!(casimir_check(&g, k, &p, &tests, &c).unwrap() < 1e-6);
            }
        }
    }

    #[test]
    fn jacobi_identity() {
        let g = su2();
        let s = SurfaceData::new(1, 2).unwrap();
        let c = build_chain_c(&s);
        let p = sample_rep(&g, &s, &c, 16, 0, &SampleMode::Free).unwrap();
        let fns = default_wilson_words(&s);
        let (a, b, d) = (&fns[0], &fns[1], &fns[2]);
        assert_eq!(jacobi_check(&g, [a, a, b], &p, &c, NESTED_STEP).unwrap(), 0.0);
        let coarse = jacobi_check(&g, [a, b, d], &p, &c, 1e-2).unwrap();
        let fine = jacobi_check(&g, [a, b, d], &p, &c, 1e-3).unwrap();
        assert!(fine < 1e-3, "{fine}");
        assert!(fine < coarse, "{fine} vs {coarse}");
    }

    #[test]
    fn path_of_classes() {
        let g = su2();
        let s = SurfaceData::new(1, 2).unwrap();
        let c = build_chain_c(&s);
        let path: Vec<(f64, Vec<TorusPoint<f64>>)> = (0..6)
            .map(|i| {
                let t = 0.1 + 0.02 * i as f64;
                (t, vec![su2_class(t), su2_class(0.2)])
            })
            .collect();
        let pairs = vec![
            (InvariantFunction::wilson("x1").unwrap(), InvariantFunction::wilson("y1").unwrap()),
            (InvariantFunction::wilson("x1").unwrap(), InvariantFunction::wilson("x1").unwrap()),
        ];
        let rows = bracket_path(&g, &s, &c, 17, &path, &pairs).unwrap();
        assert!(rows.iter().all(|r| r.smooth));
        for r in &rows {
            assert!(r.brackets[1].unwrap().abs() < 1e-10);
            assert!(r.casimir.unwrap() < 1e-6);
            assert!((r.classes[0][0] - r.parameter).abs() < 1e-8);
        }
        assert!(continuity_bound(&rows, 0) < 1e3);
    }
}
