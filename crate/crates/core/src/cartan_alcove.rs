//! Torus, Weyl chamber and alcove geometry.
//!
//! A torus point is the sorted vector `nu` with `X ~ 2 pi i diag(nu)`. For
//! SO(3) the point is stored through the double cover as `(nu, -nu)` with
//! `nu = theta / (4 pi)`, so a rotation angle `theta` below pi corresponds to
//! `nu_1 - nu_2 < 1/2`.
//!
//! The classification functions are generic over [`AlcoveCoord`], so the same
//! code runs on floats (with tolerance bands) and on exact rationals.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie_core::{AlgebraElement, GroupFamily, LieGroup};
use crate::scalar::{AlcoveCoord, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint<C> {
    pub family: GroupFamily,
    pub nu: Vec<C>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilizerType {
    pub partition: Vec<usize>,
    pub dim_stab: usize,
    pub orbit_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrbitFiber {
    pub orbit_dim: usize,
    pub class_dim: usize,
    pub fiber_dim: usize,
}

impl<C: AlcoveCoord> TorusPoint<C> {
    /// Builds a torus point, sorting `nu` into the fundamental chamber.
    pub fn new(family: GroupFamily, mut nu: Vec<C>) -> Result<Self> {
        let expected = match family {
            GroupFamily::SU(n) => n,
            GroupFamily::SO3 => 2,
        };
        if nu.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: nu.len(),
            });
        }
        let sum = nu.iter().fold(C::zero(), |a, b| a + b.clone());
        let tol = C::from_f64(1.0e-10).unwrap_or_else(C::zero);
        if sum.abs() > tol {
            return Err(Error::InvalidGroup(format!(
                "torus point {:?} is not traceless",
                nu
            )));
        }
        nu.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        Ok(Self { family, nu })
    }

    pub fn dim_g(&self) -> usize {
        match self.family {
            GroupFamily::SU(n) => n * n - 1,
            GroupFamily::SO3 => 3,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.nu.iter().map(|v| v.to_f64_lossy()).collect()
    }

    fn spread(&self) -> C {
        self.nu[0].clone() - self.nu[self.nu.len() - 1].clone()
    }
}

/// Sorted eigenvalue parameters of `X / (2 pi i)`.
pub fn chamber_representative<T: Scalar + AlcoveCoord>(
    g: &LieGroup<T>,
    x: &AlgebraElement<T>,
) -> TorusPoint<T> {
    let family = g.spec().family;
    let nu = match family {
        GroupFamily::SU(_) => {
            let n = g.size();
            let h = nalgebra::DMatrix::from_fn(n, n, |i, j| {
                let a = x.x[(i, j)];
                let b = x.x[(j, i)].conj();
                nalgebra::Complex::new(T::zero(), -T::lit(0.5)) * (a - b)
            });
            let two_pi = T::lit(2.0 * PI);
            h.symmetric_eigen()
                .eigenvalues
                .iter()
                .map(|&l| l / two_pi)
                .collect()
        }
        GroupFamily::SO3 => {
            let v = g.so3_angle(x) / T::lit(4.0 * PI);
            vec![v, -v]
        }
    };
    let mut nu: Vec<T> = nu;
    nu.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    TorusPoint { family, nu }
}

/// Classifies `value` against `bound`: `Ok(true)` when clearly below,
/// `Ok(false)` when on or above, ambiguous inside the band.
fn strictly_below<C: AlcoveCoord>(value: &C, bound: &C) -> Result<bool> {
    let d = value.clone() - bound.clone();
    if d.abs() <= C::exact_band() {
        return Ok(false);
    }
    if d.abs() < C::ambiguity_band() {
        return Err(Error::BoundaryAmbiguous {
            nu: value.to_f64_lossy(),
            wall: bound.to_f64_lossy(),
        });
    }
    Ok(d < C::zero())
}

/// Membership in the partially closed alcove on which exp is injective and
/// regular: `nu_1 - nu_n < 1` for SU(n), rotation angle below pi for SO(3).
pub fn in_p_tilde<C: AlcoveCoord>(t: &TorusPoint<C>) -> Result<bool> {
    let bound = match t.family {
        GroupFamily::SU(_) => C::one(),
        GroupFamily::SO3 => C::from_f64(0.5).unwrap(),
    };
    strictly_below(&t.spread(), &bound)
}

/// Membership in the closed alcove (for SU(n), `nu_1 - nu_n <= 1`).
pub fn in_p_bar<C: AlcoveCoord>(t: &TorusPoint<C>) -> bool {
    let bound = match t.family {
        GroupFamily::SU(_) => C::one(),
        GroupFamily::SO3 => C::from_f64(0.5).unwrap(),
    };
    t.spread() <= bound + C::exact_band()
}

/// Groups sorted values into runs; `circular` also joins the last run with
/// the first across the wrap-around at 1.
fn multiplicities<C: AlcoveCoord>(sorted: &[C], circular: bool) -> Result<Vec<usize>> {
    let n = sorted.len();
    let band = C::multiplicity_band();
    let ten = C::from_f64(10.0).unwrap();
    let close = |gap: C| -> Result<bool> {
        if gap <= band {
            Ok(true)
        } else if gap < band.clone() * ten.clone() {
            Err(Error::BoundaryAmbiguous {
                nu: gap.to_f64_lossy(),
                wall: 0.0,
            })
        } else {
            Ok(false)
        }
    };
    let mut runs: Vec<usize> = vec![1];
    for i in 1..n {
        let gap = (sorted[i - 1].clone() - sorted[i].clone()).abs();
        if close(gap)? {
            *runs.last_mut().unwrap() += 1;
        } else {
            runs.push(1);
        }
    }
    if circular && runs.len() > 1 {
        let wrap = C::one() - (sorted[0].clone() - sorted[n - 1].clone()).abs();
        if close(wrap)? {
            let last = runs.pop().unwrap();
            runs[0] += last;
        }
    }
    runs.sort_by(|a, b| b.cmp(a));
    Ok(runs)
}

fn stab_dim(partition: &[usize]) -> usize {
    partition.iter().map(|m| m * m).sum::<usize>() - 1
}

/// Multiplicity pattern of the eigenvalues and the resulting dimensions.
pub fn stabilizer_type<C: AlcoveCoord>(t: &TorusPoint<C>) -> Result<StabilizerType> {
    let partition = multiplicities(&t.nu, false)?;
    let dim_stab = stab_dim(&partition);
    Ok(StabilizerType {
        orbit_dim: t.dim_g() - dim_stab,
        partition,
        dim_stab,
    })
}

/// Orbit dimension, dimension of the conjugacy class of `exp`, and the
/// dimension of the fibre of `exp` restricted to the orbit.
pub fn exp_orbit_fiber<C: AlcoveCoord>(t: &TorusPoint<C>) -> Result<OrbitFiber> {
    let stab = stabilizer_type(t)?;
    let mut frac: Vec<C> = t
        .nu
        .iter()
        .map(|v| v.clone() - v.floor_value())
        .collect();
    frac.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let class_partition = multiplicities(&frac, true)?;
    let class_dim = t.dim_g() - stab_dim(&class_partition);
    Ok(OrbitFiber {
        orbit_dim: stab.orbit_dim,
        class_dim,
        fiber_dim: stab.orbit_dim - class_dim,
    })
}

/// Whether an so(3) element has rotation angle in `[0, pi)`.
pub fn so3_domain_membership<T: Scalar>(g: &LieGroup<T>, x: &AlgebraElement<T>) -> bool {
    let theta = g.so3_angle(x).as_f64();
    theta < PI * (1.0 - T::EXACT_BAND)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub group: String,
    pub family: String,
    pub parameter: String,
    pub nu: Vec<String>,
    pub in_p_tilde: bool,
    pub partition: Vec<usize>,
    pub orbit_dim: usize,
    pub class_dim: usize,
    pub fiber_dim: usize,
}

fn fmt_rat(r: &Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn sweep_row(group: &str, family: &str, param: Rational64, t: TorusPoint<Rational64>) -> SweepRow {
    let stab = stabilizer_type(&t).expect("exact arithmetic is never ambiguous");
    let fib = exp_orbit_fiber(&t).expect("exact arithmetic is never ambiguous");
    SweepRow {
        group: group.to_string(),
        family: family.to_string(),
        parameter: fmt_rat(&param),
        nu: t.nu.iter().map(fmt_rat).collect(),
        in_p_tilde: in_p_tilde(&t).expect("exact arithmetic is never ambiguous"),
        partition: stab.partition,
        orbit_dim: fib.orbit_dim,
        class_dim: fib.class_dim,
        fiber_dim: fib.fiber_dim,
    }
}

/// The grid `0.1, 0.15, ..., 0.65` together with 1/3 and 2/3, sorted.
pub fn default_su3_grid() -> Vec<Rational64> {
    let mut g: Vec<Rational64> = (2..=13).map(|k| Rational64::new(k, 20)).collect();
    g.push(Rational64::new(1, 3));
    g.push(Rational64::new(2, 3));
    g.sort();
    g.dedup();
    g
}

/// Exact SU(3) sweep over the closed alcove along four families:
/// `(v, 0, -v)`, the walls `(v, v, -2v)` and `(2v, -v, -v)`, and the outer
/// face `(v, 1 - 2v, v - 1)`. Points outside the closed alcove are skipped.
pub fn su3_sweep(grid: &[Rational64]) -> Vec<SweepRow> {
    let one = Rational64::from_integer(1);
    let two = Rational64::from_integer(2);
    let zero = Rational64::from_integer(0);
    let families: [(&str, Box<dyn Fn(Rational64) -> Vec<Rational64>>); 4] = [
        ("regular", Box::new(move |v| vec![v, zero, -v])),
        ("wall_upper", Box::new(move |v| vec![v, v, -two * v])),
        ("wall_lower", Box::new(move |v| vec![two * v, -v, -v])),
        ("outer_face", Box::new(move |v| vec![v, one - two * v, v - one])),
    ];
    let mut rows = Vec::new();
    for (name, f) in families.iter() {
        for &v in grid {
            let raw = f(v);
            let sorted = raw.windows(2).all(|w| w[0] >= w[1]);
            let t = TorusPoint::new(GroupFamily::SU(3), raw).expect("traceless by construction");
            if !sorted || !in_p_bar(&t) {
                continue;
            }
            rows.push(sweep_row("SU(3)", name, v, t));
        }
    }
    rows
}

/// Exact SU(2) sweep `(v, -v)` for `v = 0, 1/20, ..., 1/2`.
pub fn su2_sweep() -> Vec<SweepRow> {
    (0..=10)
        .map(|k| {
            let v = Rational64::new(k, 20);
            let t = TorusPoint::new(GroupFamily::SU(2), vec![v, -v]).unwrap();
            sweep_row("SU(2)", "torus", v, t)
        })
        .collect()
}

/// Exact SO(3) sweep over rotation angles `theta = k pi / 8`, k = 0..=8.
/// The parameter column is `theta / pi`.
pub fn so3_sweep() -> Vec<SweepRow> {
    (0..=8)
        .map(|k| {
            let frac = Rational64::new(k, 8);
            let v = frac / Rational64::from_integer(4);
            let t = TorusPoint::new(GroupFamily::SO3, vec![v, -v]).unwrap();
            sweep_row("SO(3)", "rotation", frac, t)
        })
        .collect()
}
