//! Special functions: modified Bessel `K₀`, exponential integral `E₁`,
//! complementary error function.

use crate::{Error, Result};
use core::f64::consts::PI;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Modified Bessel function of the second kind, order zero.
///
/// Power series for `x <= 2`, Steed's continued fraction (Temme's CF2) above.
/// Relative error is at the 1e-15 level on `[1e-3, 50]`.
pub fn bessel_k0(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::NonPositive { name: "x", value: x });
    }
    if x <= 2.0 {
        Ok(k0_series(x))
    } else {
        Ok(k0_steed(x))
    }
}

fn k0_series(x: f64) -> f64 {
    // K0 = -(ln(x/2) + γ) I0(x) + Σ_{k≥1} (x²/4)^k / (k!)² H_k
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut tail = 0.0;
    let mut harmonic = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= y / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += term * harmonic;
        if term * harmonic < 1e-17 * tail.abs().max(1e-300) {
            break;
        }
    }
    -((0.5 * x).ln() + EULER_GAMMA) * i0 + tail
}

fn k0_steed(x: f64) -> f64 {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let _ = h;
    (PI / (2.0 * x)).sqrt() * (-x).exp() / s
}

/// Exponential integral `E₁(x) = ∫ₓ^∞ e^{-s}/s ds` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::NonPositive { name: "x", value: x });
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..100 {
            let kf = k as f64;
            term *= -x / kf;
            let add = term / kf;
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        Ok(-EULER_GAMMA - x.ln() - sum)
    } else {
        // Modified Lentz evaluation of the continued fraction.
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let fi = i as f64;
            let an = -fi * fi;
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok(h * (-x).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k0_reference_values() {
        // Abramowitz & Stegun table 9.8
        let cases = [
            (0.1, 2.427_069_024_702_017),
            (1.0, 0.421_024_438_240_708_3),
            (2.0, 0.113_893_872_749_533_4),
            (5.0, 0.003_691_098_334_042_594),
        ];
        for (x, want) in cases {
            let got = bessel_k0(x).unwrap();
            assert!(((got - want) / want).abs() < 1e-13, "K0({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn k0_branches_agree_at_switch() {
        let lo = k0_series(2.0);
        let hi = k0_steed(2.0);
        assert!(((lo - hi) / hi).abs() < 1e-13);
    }

    #[test]
    fn k0_small_argument_limit() {
        for &x in &[1e-4, 1e-6, 1e-8] {
            let v = bessel_k0(x).unwrap() + (0.5 * x).ln() + EULER_GAMMA;
            assert!(v.abs() < 10.0 * x, "x = {x}: {v}");
        }
    }

    #[test]
    fn k0_rejects_nonpositive() {
        assert!(bessel_k0(0.0).is_err());
        assert!(bessel_k0(-1.0).is_err());
        assert!(bessel_k0(f64::NAN).is_err());
    }

    #[test]
    fn e1_reference_values() {
        let cases = [
            (0.5, 0.559_773_594_776_160_8),
            (1.0, 0.219_383_934_395_520_3),
            (2.0, 0.048_900_510_708_061_02),
            (10.0, 4.156_968_929_685_324e-6),
        ];
        for (x, want) in cases {
            let got = exp_integral_e1(x).unwrap();
            assert!(((got - want) / want).abs() < 1e-13, "E1({x}) = {got}");
        }
    }
}
