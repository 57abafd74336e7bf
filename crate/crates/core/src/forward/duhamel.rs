//! Duhamel convolution by product quadrature and the free-space oracle.

use super::kernels::{HeatKernel, Kernel};
use crate::model::{Intensity, Point, PointSource, TimeGrid};
use crate::quad::gauss_kronrod;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Per-cell kernel moments on `[mτ, (m+1)τ]`:
/// `m0[m] = ∫ K(u) du`, `m1[m] = ∫ ((u - mτ)/τ) K(u) du`.
///
/// Convolving with these moments is exact for intensities that are linear
/// between samples, and the kernel's peak near `u = 0` is integrated by
/// adaptive quadrature instead of being sampled.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMoments {
    pub step: f64,
    pub m0: Vec<f64>,
    pub m1: Vec<f64>,
}

impl KernelMoments {
    pub fn new<K: Kernel + ?Sized>(kernel: &K, step: f64, cells: usize) -> Self {
        let mut m0 = Vec::with_capacity(cells);
        let mut m1 = Vec::with_capacity(cells);
        for m in 0..cells {
            let lo = step * m as f64;
            let hi = step * (m + 1) as f64;
            m0.push(gauss_kronrod(|u| kernel.eval(u), lo, hi, 0.0, 1e-12));
            m1.push(gauss_kronrod(|u| (u - lo) / step * kernel.eval(u), lo, hi, 0.0, 1e-12));
        }
        Self { step, m0, m1 }
    }

    pub fn cells(&self) -> usize {
        self.m0.len()
    }

    /// `∫₀^{kτ} K`.
    pub fn cumulative_mass(&self, k: usize) -> f64 {
        self.m0[..k].iter().sum()
    }
}

/// `ψ(t_k) = ∫₀^{t_k} q(s) K(t_k - s) ds` for `q` linear between samples.
///
/// `q` has one sample per grid node; the output has the same length and
/// `ψ(0) = 0`. Needs `moments.cells() >= q.len() - 1`.
pub fn convolve_moments(q: &[f64], moments: &KernelMoments) -> Vec<f64> {
    let len = q.len();
    let mut psi = vec![0.0; len];
    if len < 2 {
        return psi;
    }
    assert!(moments.cells() + 1 >= len, "kernel moments shorter than the series");
    if q.iter().all(|v| *v == q[0]) {
        let mut acc = 0.0;
        for k in 1..len {
            acc += moments.m0[k - 1];
            psi[k] = q[0] * acc;
        }
        return psi;
    }
    for (k, out) in psi.iter_mut().enumerate().skip(1) {
        let mut s = 0.0;
        for j in 0..k {
            let m = k - 1 - j;
            s += q[j + 1] * moments.m0[m] + (q[j] - q[j + 1]) * moments.m1[m];
        }
        *out = s;
    }
    psi
}

/// Free-space medium with `L = -DΔ + λ₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeSpaceMedium {
    pub dim: usize,
    pub reaction: f64,
    pub diffusivity: f64,
}

impl FreeSpaceMedium {
    pub fn new(dim: usize, reaction: f64) -> Self {
        Self { dim, reaction, diffusivity: 1.0 }
    }
}

/// Sensor series for sources in free space with constant coefficients:
///
/// `ψ(t_k) = Σ_i ∫₀^{t_k} q_i(s) e^{-λ₀(t_k-s)} G_heat(n, |b - x_i|, t_k - s) ds`.
pub fn free_space_response(
    sources: &[PointSource],
    sensor: &Point,
    grid: &TimeGrid,
    dim: usize,
    reaction: f64,
) -> Result<Vec<f64>> {
    free_space_response_in(sources, sensor, grid, &FreeSpaceMedium::new(dim, reaction))
}

/// [`free_space_response`] with an explicit diffusivity.
pub fn free_space_response_in(
    sources: &[PointSource],
    sensor: &Point,
    grid: &TimeGrid,
    medium: &FreeSpaceMedium,
) -> Result<Vec<f64>> {
    let len = grid.len();
    if sensor.dim() != medium.dim {
        return Err(Error::DimensionMismatch { expected: medium.dim, found: sensor.dim() });
    }
    let mut psi = vec![0.0; len];
    for src in sources {
        if src.location.dim() != medium.dim {
            return Err(Error::DimensionMismatch { expected: medium.dim, found: src.location.dim() });
        }
        let r = src.location.distance(sensor);
        if r == 0.0 {
            return Err(Error::SensorAtSource);
        }
        let q = src.intensity.sample(grid);
        if let Intensity::Sampled { q: s } = &src.intensity {
            grid.check_series(s)?;
        }
        if q.iter().all(|v| *v == 0.0) {
            continue;
        }
        let kernel = HeatKernel::new(medium.dim, r, medium.reaction, medium.diffusivity)?;
        let moments = KernelMoments::new(&kernel, grid.step, grid.steps);
        for (p, v) in psi.iter_mut().zip(convolve_moments(&q, &moments)) {
            *p += v;
        }
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::kernels::VKernel;
    use crate::special::erfc;
    use core::f64::consts::PI;

    #[test]
    fn no_sources_or_zero_intensity_gives_zero() {
        let grid = TimeGrid::new(1e-2, 50).unwrap();
        let b = Point::spatial(1.0, 0.0, 0.0);
        let z = free_space_response(&[], &b, &grid, 3, 0.0).unwrap();
        assert!(z.iter().all(|v| *v == 0.0));
        let s = PointSource::constant(Point::spatial(0.0, 0.0, 0.0), 0.0);
        let z = free_space_response(&[s], &b, &grid, 3, 0.0).unwrap();
        assert!(z.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sensor_on_source_is_an_error() {
        let grid = TimeGrid::new(1e-2, 5).unwrap();
        let p = Point::planar(0.5, 0.5);
        let s = PointSource::constant(p, 1.0);
        assert_eq!(free_space_response(&[s], &p, &grid, 2, 0.0), Err(Error::SensorAtSource));
    }

    #[test]
    fn constant_source_in_space_matches_erfc_primitive() {
        // ∫₀^t G₃(1, s) ds = erfc(1/(2√t)) / (4π)
        let grid = TimeGrid::new(1e-2, 400).unwrap();
        let s = PointSource::constant(Point::spatial(0.0, 0.0, 0.0), 1.0);
        let psi = free_space_response(&[s], &Point::spatial(0.0, 1.0, 0.0), &grid, 3, 0.0).unwrap();
        for k in [10, 100, 400] {
            let t = grid.time(k);
            let want = erfc(0.5 / t.sqrt()) / (4.0 * PI);
            assert!((psi[k] - want).abs() < 1e-12, "k={k}: {} vs {want}", psi[k]);
        }
        // steady state: ∫₀^∞ G₃(1, s) ds = 1/(4π) (substituting s = 1/v²), and ψ approaches it from below
        let total = gauss_kronrod(
            |v| {
                if v > 0.0 {
                    2.0 * crate::forward::heat_kernel(3, 1.0, 1.0 / (v * v)).unwrap() / (v * v * v)
                } else {
                    0.0
                }
            },
            0.0,
            60.0,
            0.0,
            1e-12,
        );
        assert!((total - 1.0 / (4.0 * PI)).abs() < 1e-12);
        assert!(psi.windows(2).all(|w| w[1] >= w[0]) && psi[400] < total);
    }

    #[test]
    fn linear_intensity_is_exact() {
        // q(s) = s with V₁ kernel: ψ(t) = ∫₀^t (t-u) K(u) du; compare with direct quadrature.
        let grid = TimeGrid::new(0.05, 40).unwrap();
        let k = VKernel::new(1, 0.5).unwrap();
        let mom = KernelMoments::new(&k, grid.step, grid.steps);
        let q: Vec<f64> = grid.times().collect();
        let psi = convolve_moments(&q, &mom);
        let t = grid.horizon();
        let want = gauss_kronrod(|u| (t - u) * k.eval(u), 0.0, t, 0.0, 1e-13);
        assert!((psi[40] - want).abs() < 1e-12);
    }

    #[test]
    fn superposition_of_sources() {
        let grid = TimeGrid::new(1e-2, 100).unwrap();
        let b = Point::planar(0.3, -0.2);
        let s1 = PointSource::constant(Point::planar(0.0, 0.0), 1.0);
        let s2 = PointSource::sampled(Point::planar(1.0, 0.5), grid.times().map(|t| t.sin()).collect());
        let both = free_space_response(&[s1.clone(), s2.clone()], &b, &grid, 2, 0.3).unwrap();
        let a = free_space_response(&[s1], &b, &grid, 2, 0.3).unwrap();
        let c = free_space_response(&[s2], &b, &grid, 2, 0.3).unwrap();
        for k in 0..grid.len() {
            assert!((both[k] - a[k] - c[k]).abs() < 1e-15);
        }
    }
}
