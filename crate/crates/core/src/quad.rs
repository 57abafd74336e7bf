//! One-dimensional quadrature: adaptive Simpson, adaptive Gauss–Kronrod
//! (7/15 points) and Gauss–Legendre rules.

use alloc::vec::Vec;

/// Adaptive Simpson quadrature with an absolute tolerance.
///
/// Works on reversed intervals (`b < a`) and returns the signed integral.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, abs_tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod quadrature.
///
/// Subdivides until the error estimate is below `max(abs_tol, rel_tol·|I|)`.
/// The relative criterion keeps accuracy on tiny positive integrands such as
/// heat kernels evaluated far from the source at early times.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, err) = kronrod15(&f, a, b);
    let mut total = whole;
    let mut total_err = err;
    if total_err <= abs_tol.max(rel_tol * total.abs()) {
        return total;
    }
    // (a, b, value, err); split the worst interval first.
    let mut pieces: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    pieces.push((a, b, whole, err));
    for _ in 0..2000 {
        let (worst, _) =
            pieces.iter().enumerate().fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, pv, pe) = pieces.swap_remove(worst);
        let m = 0.5 * (pa + pb);
        let (lv, le) = kronrod15(&f, pa, m);
        let (rv, re) = kronrod15(&f, m, pb);
        total += lv + rv - pv;
        total_err += le + re - pe;
        pieces.push((pa, m, lv, le));
        pieces.push((m, pb, rv, re));
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
    }
    total
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Fixed Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    x.iter().zip(&w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_reversed() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-12);
        let r = adaptive_simpson(|x| x * x * x, 2.0, 0.0, 1e-12);
        assert!((r + 4.0).abs() < 1e-12);
    }

    #[test]
    fn kronrod_relative_accuracy_on_tiny_integrand() {
        // ∫₀¹ 1e-200 e^x dx
        let v = gauss_kronrod(|x| 1e-200 * x.exp(), 0.0, 1.0, 0.0, 1e-13);
        let want = 1e-200 * (core::f64::consts::E - 1.0);
        assert!(((v - want) / want).abs() < 1e-13);
    }

    #[test]
    fn kronrod_peaked_integrand() {
        // ∫₀¹ e^{-1/x} / x² dx = e^{-1}
        let v = gauss_kronrod(|x| if x > 0.0 { (-1.0 / x).exp() / (x * x) } else { 0.0 }, 0.0, 1.0, 0.0, 1e-13);
        assert!((v - (-1.0f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn legendre_exact_for_high_degree() {
        for n in [1, 2, 5, 16] {
            let (_, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
        // degree 2n-1 = 31 exact
        let v = gauss_legendre_integrate(|x| x.powi(30), -1.0, 1.0, 16);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }
}
