//! Adaptive Gauss–Kronrod (7/15) quadrature for matrix-valued integrands.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::max_abs;
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Error bound above which the integral is rejected.
pub const FAILURE_THRESHOLD: f64 = 1.0e-9;

#[derive(Debug, Clone)]
pub struct QuadResult<T: Scalar> {
    pub value: DMatrix<T>,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15<T, F>(f: &F, a: f64, b: f64) -> (DMatrix<T>, f64)
where
    T: Scalar,
    F: Fn(T) -> DMatrix<T>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(T::lit(c));
    let mut kron = &fc * T::lit(WGK[7]);
    let mut gauss = &fc * T::lit(WG[3]);
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(T::lit(c - dx));
        let f2 = f(T::lit(c + dx));
        let s = f1 + f2;
        kron += &s * T::lit(WGK[i]);
        // Odd Kronrod nodes (1, 3, 5) are the Gauss nodes.
        if i % 2 == 1 {
            gauss += &s * T::lit(WG[i / 2]);
        }
    }
    let kron = kron * T::lit(h);
    let gauss = gauss * T::lit(h);
    let err = max_abs(&(&kron - &gauss)).as_f64();
    (kron, err)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` (max-entry norm).
pub fn integrate<T, F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult<T>>
where
    T: Scalar,
    F: Fn(T) -> DMatrix<T>,
{
    let mut stack = vec![(a, b, 0usize)];
    let mut total: Option<DMatrix<T>> = None;
    let mut error = 0.0;
    let mut evals = 0;
    let width = b - a;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = gk15(&f, lo, hi);
        evals += 15;
        let share = tol * (hi - lo) / width;
        if e <= share.max(1e-15) || depth >= 30 {
            error += e;
            total = Some(match total {
                None => v,
                Some(t) => t + v,
            });
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    if error > FAILURE_THRESHOLD * T::TOLERANCE_SCALE {
        return Err(Error::QuadratureFailure { estimate: error });
    }
    Ok(QuadResult {
        value: total.unwrap_or_else(|| f(T::zero()) * T::zero()),
        error,
        evaluations: evals,
    })
}
