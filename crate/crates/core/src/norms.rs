//! Discrete functional norms: `L^p`, spectral `H^s`, and a BMO seminorm
//! evaluated over periodic discrete balls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral::{PhysicalField, SpectralField};

/// `(h² Σ |f|^p)^{1/p}`, or the collocation maximum for `p = ∞`.
pub fn lp_norm(f: &PhysicalField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let h2 = f.grid().h() * f.grid().h();
    let sum: f64 = if p == 1.0 {
        f.values().iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        f.values().iter().map(|v| v * v).sum()
    } else {
        f.values().iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((h2 * sum).powf(1.0 / p))
}

/// `(Σ_{k≠0} |k|^{2s} |ŵ_k|²)^{1/2}` with `|k|` the length of the integer wavevector.
pub fn sobolev_norm(w: &SpectralField, s: f64) -> f64 {
    sobolev_norm_sq(w, s).sqrt()
}

pub(crate) fn sobolev_norm_sq(w: &SpectralField, s: f64) -> f64 {
    let n = w.grid().n();
    let c = w.coeffs();
    let mut acc = 0.0;
    w.grid().for_each_mode(|i, j, kx, ky| {
        let e = c[i * n + j].norm_sqr();
        if e == 0.0 {
            return;
        }
        let k2 = (kx * kx + ky * ky) as f64;
        if k2 == 0.0 {
            return;
        }
        acc += if s == 0.0 {
            e
        } else if s == -1.0 {
            e / k2
        } else if s == 1.0 {
            e * k2
        } else {
            e * k2.powf(s)
        };
    });
    acc
}

/// Negative Sobolev orders used as mixing measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixOrder {
    /// `H^{-1}`
    MinusOne,
    /// `H^{-1/2}`
    MinusHalf,
}

impl MixOrder {
    pub fn exponent(self) -> f64 {
        match self {
            MixOrder::MinusOne => -1.0,
            MixOrder::MinusHalf => -0.5,
        }
    }
}

pub fn mix_norm(theta: &SpectralField, order: MixOrder) -> f64 {
    sobolev_norm(theta, order.exponent())
}

/// Ball sampling for the discrete BMO sup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BmoConfig {
    /// Ball radii as fractions of the domain side, ascending, within `[2h, 1/2]`.
    pub radii: Vec<f64>,
    /// Subsampling stride for ball centers, in grid points.
    pub center_stride: usize,
}

impl BmoConfig {
    pub const DEFAULT_STRIDE: usize = 4;

    pub fn new(grid: &Grid, radii: Vec<f64>, center_stride: usize) -> Result<Self> {
        let cfg = BmoConfig { radii, center_stride };
        cfg.validate(grid)?;
        Ok(cfg)
    }

    /// Radii `2h, 4h, 8h, …, 1/2` with the default center stride.
    pub fn doubling(grid: &Grid) -> Self {
        Self::doubling_with_stride(grid, Self::DEFAULT_STRIDE.min(grid.n()))
    }

    pub fn doubling_with_stride(grid: &Grid, center_stride: usize) -> Self {
        let mut radii = Vec::new();
        let mut pts = 2;
        while pts <= grid.n() / 2 {
            radii.push(pts as f64 / grid.n() as f64);
            pts *= 2;
        }
        BmoConfig { radii, center_stride }
    }

    /// Every radius from `2h` to `1/2` in steps of `h`, every grid point a center.
    pub fn exhaustive(grid: &Grid) -> Self {
        let radii = (2..=grid.n() / 2).map(|p| p as f64 / grid.n() as f64).collect();
        BmoConfig {
            radii,
            center_stride: 1,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.radii.is_empty() {
            return Err(Error::InvalidBmoConfig("radii list is empty".into()));
        }
        let tol = 1e-12;
        let lo = 2.0 * grid.h();
        for (idx, &r) in self.radii.iter().enumerate() {
            if !r.is_finite() || r < lo - tol || r > 0.5 + tol {
                return Err(Error::InvalidBmoConfig(format!(
                    "radius {r} outside [{lo}, 0.5] at n = {}",
                    grid.n()
                )));
            }
            if idx > 0 && r < self.radii[idx - 1] {
                return Err(Error::InvalidBmoConfig("radii must be sorted ascending".into()));
            }
        }
        if self.center_stride == 0 || grid.n() % self.center_stride != 0 {
            return Err(Error::InvalidBmoConfig(format!(
                "center stride {} must be >= 1 and divide n = {}",
                self.center_stride,
                grid.n()
            )));
        }
        Ok(())
    }
}

/// Row segments `[lo, hi]` of a discrete periodic disc, indexed by row offset.
struct Disc {
    rows: Vec<(i64, i64, i64)>,
    count: usize,
}

impl Disc {
    fn new(radius_pts: f64, n: usize) -> Disc {
        let half = (n / 2) as i64;
        let reach = (radius_pts + 1e-9).floor() as i64;
        let r2 = radius_pts * radius_pts;
        let mut rows = Vec::new();
        let mut count = 0usize;
        // offsets in (-n/2, n/2] so that wrapped points are counted once
        for dy in (-reach).max(-half + 1)..=reach.min(half) {
            let w = ((r2 - (dy * dy) as f64).max(0.0).sqrt() + 1e-9).floor() as i64;
            let lo = (-w).max(-half + 1);
            let hi = w.min(half);
            count += (hi - lo + 1) as usize;
            rows.push((dy, lo, hi));
        }
        Disc { rows, count }
    }
}

#[inline]
fn abs_dev_sum(seg: &[f64], m: f64) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = seg.chunks_exact(4);
    let rem = chunks.remainder();
    for c in chunks {
        acc[0] += (c[0] - m).abs();
        acc[1] += (c[1] - m).abs();
        acc[2] += (c[2] - m).abs();
        acc[3] += (c[3] - m).abs();
    }
    let mut tail = 0.0;
    for v in rem {
        tail += (v - m).abs();
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Discrete BMO seminorm: the largest mean oscillation
/// `|B|⁻¹ Σ_{x∈B} |f(x) − f_B|` over the sampled periodic balls.
pub fn bmo_seminorm(f: &PhysicalField, cfg: &BmoConfig) -> Result<f64> {
    let grid = f.grid();
    cfg.validate(grid)?;
    let n = grid.n();
    let discs: Vec<Disc> = cfg.radii.iter().map(|r| Disc::new(r * n as f64, n)).collect();
    // fixed padding keeps every ball's arithmetic independent of the radius set
    let pad = n / 2;
    // periodic extension with `pad` ghost points per side; rows are x-offsets
    let m = n + 2 * pad;
    let src = f.values();
    let mut ext = vec![0.0; m * m];
    for a in 0..m {
        let i = (a + n - pad) % n;
        for b in 0..m {
            let j = (b + n - pad) % n;
            ext[a * m + b] = src[i * n + j];
        }
    }
    let mut prefix = vec![0.0; m * (m + 1)];
    for a in 0..m {
        let row = &ext[a * m..(a + 1) * m];
        let out = &mut prefix[a * (m + 1)..(a + 1) * (m + 1)];
        let mut s = 0.0;
        for (b, v) in row.iter().enumerate() {
            s += v;
            out[b + 1] = s;
        }
    }

    let stride = cfg.center_stride;
    let centers_per_side = n / stride;
    let ext = &ext;
    let prefix = &prefix;
    let discs = &discs;
    let row_max = grid.execution().map_indexed(centers_per_side, move |ri| {
        let ci = (ri * stride + pad) as i64;
        let mut best = 0.0f64;
        for cj_idx in 0..centers_per_side {
            let cj = (cj_idx * stride + pad) as i64;
            for disc in discs {
                let mut sum = 0.0;
                for &(dy, lo, hi) in &disc.rows {
                    let base = (ci + dy) as usize * (m + 1);
                    sum += prefix[base + (cj + hi + 1) as usize] - prefix[base + (cj + lo) as usize];
                }
                let mean = sum / disc.count as f64;
                let mut dev = 0.0;
                for &(dy, lo, hi) in &disc.rows {
                    let base = (ci + dy) as usize * m;
                    let seg = &ext[base + (cj + lo) as usize..=base + (cj + hi) as usize];
                    dev += abs_dev_sum(seg, mean);
                }
                best = best.max(dev / disc.count as f64);
            }
        }
        best
    });
    Ok(row_max.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::random_band_field;
    use std::f64::consts::TAU;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    /// Direct evaluation of every sampled ball by testing each grid point's
    /// minimal-image distance to the center.
    fn bmo_brute_force(f: &PhysicalField, cfg: &BmoConfig) -> f64 {
        let n = f.grid().n();
        let half = (n / 2) as i64;
        let wrap = |d: i64| {
            let d = d.rem_euclid(n as i64);
            if d > half {
                d - n as i64
            } else {
                d
            }
        };
        let mut best = 0.0f64;
        for &r in &cfg.radii {
            let rp2 = (r * n as f64).powi(2);
            for ci in (0..n).step_by(cfg.center_stride) {
                for cj in (0..n).step_by(cfg.center_stride) {
                    let mut pts = Vec::new();
                    for i in 0..n {
                        for j in 0..n {
                            let dx = wrap(i as i64 - ci as i64);
                            let dy = wrap(j as i64 - cj as i64);
                            if ((dx * dx + dy * dy) as f64) <= rp2 + 1e-9 {
                                pts.push(f.at(i, j));
                            }
                        }
                    }
                    let mean = pts.iter().sum::<f64>() / pts.len() as f64;
                    let dev = pts.iter().map(|v| (v - mean).abs()).sum::<f64>() / pts.len() as f64;
                    best = best.max(dev);
                }
            }
        }
        best
    }

    #[test]
    fn lp_norms_of_cosine() {
        let g = grid(32);
        let f = PhysicalField::from_fn(&g, |x, _| (TAU * x).cos());
        assert!((lp_norm(&f, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((lp_norm(&f, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        // (1/(2π)) ∫ |cos|^4 = 3/8
        assert!((lp_norm(&f, 4.0).unwrap() - 0.375f64.powf(0.25)).abs() < 1e-14);
        assert!(matches!(lp_norm(&f, 0.5), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn l1_norm_converges_under_refinement() {
        // same band-limited field sampled at n and 4n
        let coarse = random_band_field(&grid(256), 1.0, 6.0, 0.0, 42).to_physical();
        let fine = random_band_field(&grid(1024), 1.0, 6.0, 0.0, 42).to_physical();
        let a = lp_norm(&coarse, 1.0).unwrap();
        let b = lp_norm(&fine, 1.0).unwrap();
        assert!((a - b).abs() <= 1e-3 * b, "{a} vs {b}");
    }

    #[test]
    fn sobolev_single_shell() {
        let g = grid(32);
        let w = PhysicalField::from_fn(&g, |x, _| 2.0 * (TAU * x).cos()).to_spectral();
        for s in [-1.0, -0.5, 0.0, 0.7, 2.0] {
            assert!((sobolev_norm(&w, s) - 2f64.sqrt()).abs() < 1e-12);
        }
        let w2 = PhysicalField::from_fn(&g, |x, _| 2.0 * (2.0 * TAU * x).cos()).to_spectral();
        assert!((sobolev_norm(&w2, -1.0) - 2f64.sqrt() / 2.0).abs() < 1e-12);
        let cb = PhysicalField::from_fn(&g, |x, y| 4.0 * (TAU * x).cos() * (TAU * y).cos()).to_spectral();
        assert!((mix_norm(&cb, MixOrder::MinusOne).powi(2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn parseval() {
        let g = grid(64);
        let f = random_band_field(&g, 1.0, 20.0, 0.5, 3);
        let l2 = lp_norm(&f.to_physical(), 2.0).unwrap();
        assert!((sobolev_norm(&f, 0.0) - l2).abs() <= 1e-12 * l2);
    }

    #[test]
    fn hm1_is_gradient_of_inverse_laplacian() {
        use crate::spectral::Axis;
        let g = grid(64);
        let theta = random_band_field(&g, 1.0, 16.0, 0.0, 5);
        let phi = theta.invert_laplacian().unwrap();
        let gx = lp_norm(&phi.derivative(Axis::X).to_physical(), 2.0).unwrap();
        let gy = lp_norm(&phi.derivative(Axis::Y).to_physical(), 2.0).unwrap();
        let grad = (gx * gx + gy * gy).sqrt();
        // integer-wavenumber norm vs physical gradient differ by 2π
        let hm1 = mix_norm(&theta, MixOrder::MinusOne);
        assert!((hm1 - TAU * grad).abs() <= 1e-12 * hm1);
    }

    #[test]
    fn sobolev_monotone_in_order() {
        let g = grid(32);
        let f = random_band_field(&g, 1.0, 10.0, 0.0, 1);
        let orders = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0];
        for w in orders.windows(2) {
            assert!(sobolev_norm(&f, w[0]) <= sobolev_norm(&f, w[1]));
        }
    }

    #[test]
    fn bmo_config_validation() {
        let g = grid(64);
        assert!(BmoConfig::new(&g, vec![], 4).is_err());
        assert!(BmoConfig::new(&g, vec![0.01], 4).is_err());
        assert!(BmoConfig::new(&g, vec![0.6], 4).is_err());
        assert!(BmoConfig::new(&g, vec![0.25, 0.1], 4).is_err());
        assert!(BmoConfig::new(&g, vec![0.1], 3).is_err());
        assert!(BmoConfig::new(&g, vec![0.1], 0).is_err());
        let d = BmoConfig::doubling(&g);
        assert_eq!(d.radii, vec![2.0 / 64.0, 4.0 / 64.0, 8.0 / 64.0, 16.0 / 64.0, 0.5]);
        d.validate(&g).unwrap();
        let f = PhysicalField::zeros(&g);
        let empty = BmoConfig {
            radii: vec![],
            center_stride: 4,
        };
        assert!(bmo_seminorm(&f, &empty).is_err());
    }

    #[test]
    fn disc_counts_points_once() {
        // radius n/2 on an n-grid: offsets in (-n/2, n/2]² inside the disc
        let n = 16;
        let d = Disc::new(8.0, n);
        let mut brute = 0;
        for dx in -7i64..=8 {
            for dy in -7i64..=8 {
                if dx * dx + dy * dy <= 64 {
                    brute += 1;
                }
            }
        }
        assert_eq!(d.count, brute);
        assert_eq!(Disc::new(1.0, n).count, 5);
        assert_eq!(Disc::new(2.0, n).count, 13);
    }

    #[test]
    fn constant_has_zero_bmo() {
        let g = grid(32);
        let f = PhysicalField::from_fn(&g, |_, _| 3.5);
        assert!(bmo_seminorm(&f, &BmoConfig::doubling(&g)).unwrap() < 1e-14);
    }

    #[test]
    fn matches_brute_force() {
        let g = grid(32);
        let f = random_band_field(&g, 1.0, 6.0, 0.0, 77).to_physical();
        for cfg in [BmoConfig::doubling(&g), BmoConfig::exhaustive(&g)] {
            let fast = bmo_seminorm(&f, &cfg).unwrap();
            let slow = bmo_brute_force(&f, &cfg);
            assert!((fast - slow).abs() <= 1e-12 * slow, "{fast} vs {slow}");
        }
    }

    #[test]
    fn cosine_sweep_agrees_with_exhaustive_low_resolution() {
        let hi = grid(256);
        let lo = grid(64);
        let f_hi = PhysicalField::from_fn(&hi, |x, _| (TAU * x).cos());
        let f_lo = PhysicalField::from_fn(&lo, |x, _| (TAU * x).cos());
        let sweep = bmo_seminorm(&f_hi, &BmoConfig::doubling(&hi)).unwrap();
        let oracle = bmo_brute_force(&f_lo, &BmoConfig::exhaustive(&lo));
        assert!((sweep - oracle).abs() <= 0.05 * oracle, "{sweep} vs {oracle}");
        assert!(sweep <= 1.0);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = grid(64);
        let f = random_band_field(&g, 1.0, 8.0, 0.0, 4).to_physical();
        let cfg = BmoConfig::doubling(&g);
        let par = bmo_seminorm(&f, &cfg).unwrap();
        let gs = g.clone().with_execution(crate::Execution::Sequential);
        let fs = PhysicalField::new(&gs, f.values().to_vec()).unwrap();
        assert_eq!(bmo_seminorm(&fs, &cfg).unwrap(), par);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn bmo_dominated_by_sup(seed in 0u64..100_000, kmax in 1u64..8) {
                let g = grid(32);
                let f = random_band_field(&g, 1.0, kmax as f64, 0.0, seed).to_physical();
                let bmo = bmo_seminorm(&f, &BmoConfig::doubling(&g)).unwrap();
                prop_assert!(bmo <= lp_norm(&f, f64::INFINITY).unwrap());
            }

            #[test]
            fn bmo_shift_and_constant_invariant(seed in 0u64..100_000, shift in 0usize..8, c in -5.0f64..5.0) {
                let g = grid(32);
                let f = random_band_field(&g, 1.0, 5.0, 0.0, seed).to_physical();
                let cfg = BmoConfig::doubling_with_stride(&g, 2);
                let base = bmo_seminorm(&f, &cfg).unwrap();
                let n = g.n();
                let s = 2 * shift;
                let moved: Vec<f64> = (0..n * n)
                    .map(|p| {
                        let (i, j) = (p / n, p % n);
                        f.at((i + s) % n, (j + n - s) % n) + c
                    })
                    .collect();
                let moved = PhysicalField::new(&g, moved).unwrap();
                let other = bmo_seminorm(&moved, &cfg).unwrap();
                prop_assert!((base - other).abs() <= 1e-12 * (1.0 + c.abs()));
            }

            #[test]
            fn bmo_monotone_in_sampling(seed in 0u64..100_000) {
                let g = grid(32);
                let f = random_band_field(&g, 1.0, 6.0, 0.0, seed).to_physical();
                let small = BmoConfig::new(&g, vec![0.125], 4).unwrap();
                let more_radii = BmoConfig::new(&g, vec![0.0625, 0.125, 0.25], 4).unwrap();
                let more_centers = BmoConfig::new(&g, vec![0.0625, 0.125, 0.25], 2).unwrap();
                let a = bmo_seminorm(&f, &small).unwrap();
                let b = bmo_seminorm(&f, &more_radii).unwrap();
                let c = bmo_seminorm(&f, &more_centers).unwrap();
                prop_assert!(a <= b && b <= c);
            }
        }
    }
}
