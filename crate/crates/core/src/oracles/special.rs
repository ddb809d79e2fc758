//! Bessel-function ratios by continued fraction, and bisection.

use crate::{Error, Result};

/// Modified Lentz evaluation of `b0 + a1/(b1 + a2/(b2 + ...))` with
/// user-supplied partial numerators and denominators (`k ≥ 1`).
fn lentz(b0: f64, a: impl Fn(usize) -> f64, b: impl Fn(usize) -> f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut f = if b0 == 0.0 { TINY } else { b0 };
    let mut c = f;
    let mut d = 0.0;
    for k in 1..100_000 {
        d = b(k) + a(k) * d;
        if d == 0.0 {
            d = TINY;
        }
        c = b(k) + a(k) / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(f);
        }
    }
    Err(Error::NoConvergence("continued fraction for a Bessel ratio".into()))
}

/// `I_{ν+1}(x) / I_ν(x)` for `x > 0`, `ν > -1`.
pub fn bessel_i_ratio(nu: f64, x: f64) -> Result<f64> {
    // I_{ν+1}/I_ν = 1 / (2(ν+1)/x + 1 / (2(ν+2)/x + ...))
    lentz(0.0, |_| 1.0, |k| 2.0 * (nu + k as f64) / x)
}

/// `J_{ν+1}(x) / J_ν(x)` for `x > 0`, `ν > -1`; infinite at zeros of `J_ν`.
pub fn bessel_j_ratio(nu: f64, x: f64) -> Result<f64> {
    // J_{ν+1}/J_ν = 1 / (2(ν+1)/x − 1 / (2(ν+2)/x − ...))
    lentz(0.0, |k| if k == 1 { 1.0 } else { -1.0 }, |k| 2.0 * (nu + k as f64) / x)
}

/// Bisection of a sign change of `f` on `[lo, hi]` down to adjacent
/// floating-point numbers (or 200 halvings).
pub fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoConvergence(format!("no sign change on [{lo}, {hi}]")));
    }
    let lo_negative = flo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_orders_have_closed_forms() {
        // I_{1/2}/I_{-1/2} = tanh x,  J_{1/2}/J_{-1/2} = tan x
        for x in [0.1, 1.0, 3.7] {
            assert!((bessel_i_ratio(-0.5, x).unwrap() - x.tanh()).abs() < 1e-14);
            assert!((bessel_j_ratio(-0.5, x).unwrap() - x.tan()).abs() < 1e-13 * x.tan().abs().max(1.0));
        }
        // I_{3/2}/I_{1/2} = coth x − 1/x
        let x = 2.0f64;
        assert!((bessel_i_ratio(0.5, x).unwrap() - (1.0 / x.tanh() - 1.0 / x)).abs() < 1e-14);
    }

    #[test]
    fn bisection_reaches_machine_precision() {
        let r = bisect(1.0, 2.0, |x| x * x - 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() <= 4.0 * f64::EPSILON);
        assert!(bisect(1.0, 2.0, |x| x * x + 1.0).is_err());
    }
}
