//! Numerical differentiation by Ridders' extrapolation of central
//! differences.

use crate::error::Result;
use crate::scalar::Scalar;

const SHRINK: f64 = 1.4;
const TABLE: usize = 12;
const SAFE: f64 = 2.0;
/// Failed evaluations (e.g. a step leaving the chart) halve the initial step
/// at most this many times.
const MAX_RETRIES: usize = 8;

/// Derivative of `f` at 0 and an error estimate. Central differences at
/// steps `h, h/1.4, h/1.4^2, ...` are extrapolated in a Neville table; the
/// iteration stops once the error estimate starts to grow. The table is
/// restarted from `h/8` and `h/64` and the estimate with the smallest error
/// kept, which guards against a kink or branch jump within `h` of 0.
pub fn ridders<T, F>(f: F, h: f64) -> Result<(T, T)>
where
    T: Scalar,
    F: Fn(T) -> Result<T>,
{
    let mut best: Option<(T, T)> = None;
    for start in [h, h / 8.0, h / 64.0] {
        let r = ridders_retrying(&f, start)?;
        if best.is_none_or(|b| r.1 < b.1) {
            best = Some(r);
        }
    }
    Ok(best.expect("three starts"))
}

fn ridders_retrying<T, F>(f: &F, h: f64) -> Result<(T, T)>
where
    T: Scalar,
    F: Fn(T) -> Result<T>,
{
    let mut h = h;
    let mut last_err = None;
    for _ in 0..=MAX_RETRIES {
        match ridders_from(f, h) {
            Ok(r) => return Ok(r),
            Err(e) => {
                last_err = Some(e);
                h /= 2.0;
            }
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn ridders_from<T, F>(f: &F, h: f64) -> Result<(T, T)>
where
    T: Scalar,
    F: Fn(T) -> Result<T>,
{
    let central = |h: T| -> Result<T> { Ok((f(h)? - f(-h)?) / (h + h)) };
    let con2 = T::lit(SHRINK * SHRINK);
    let mut hh = T::lit(h);
    let mut a = vec![vec![T::zero(); TABLE]; TABLE];
    a[0][0] = central(hh)?;
    let mut best = a[0][0];
    let mut err = T::max_value().unwrap_or_else(|| T::lit(f64::MAX));
    for i in 1..TABLE {
        hh /= T::lit(SHRINK);
        a[0][i] = central(hh)?;
        let mut fac = con2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - T::one());
            fac *= con2;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= T::lit(SAFE) * err {
            break;
        }
    }
    Ok((best, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differentiates_smooth_functions() {
        let (d, e) = ridders(|t: f64| Ok((1.3 + t).exp().sin()), 0.1).unwrap();
        let exact = 1.3f64.exp().cos() * 1.3f64.exp();
        assert!((d - exact).abs() < 1e-10, "{d} vs {exact}");
        assert!(e < 1e-8);
    }

    #[test]
    fn picks_the_smooth_side_of_a_nearby_kink() {
        let (d, _) = ridders(|t: f64| Ok(if t > 0.004 { 10.0 * t } else { t.sin() }), 0.01).unwrap();
        assert!((d - 1.0).abs() < 1e-9, "{d}");
    }

    #[test]
    fn handles_steep_functions() {
        // 1 / (0.01 - t) has derivative 1e4 at 0 and a pole just past the step.
        let (d, _) = ridders(
            |t: f64| {
                if t >= 0.01 {
                    Err(crate::Error::NotInB)
                } else {
                    Ok(1.0 / (0.01 - t))
                }
            },
            0.05,
        )
        .unwrap();
        assert!((d - 1e4).abs() < 1e-4);
    }
}
