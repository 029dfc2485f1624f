//! Real periodic fields in physical and Fourier representation, and the
//! spectral operators acting on them.
//!
//! Coefficients follow `w(x) = Σ_k ŵ_k e^{2πi k·x}` with integer `k`, so
//! `ŵ_k = n⁻² Σ_x w(x) e^{-2πi k·x}`. Every constructor and operator keeps
//! `ŵ_{-k} = conj(ŵ_k)` and `ŵ_0 = 0`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Largest tolerated mean mode before `invert_laplacian` refuses its input.
pub const MEAN_MODE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Real samples at the collocation points.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    values: Vec<f64>,
}

/// Fourier coefficients of a real, zero-mean periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl PhysicalField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SampleCount {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(PhysicalField {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        PhysicalField {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f(x, y)` at every collocation point.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                let (x, y) = grid.point(i, j);
                values.push(f(x, y));
            }
        }
        PhysicalField {
            grid: grid.clone(),
            values,
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at collocation point `(i, j)`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n() + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Forward transform; the mean mode is dropped.
    pub fn to_spectral(&self) -> SpectralField {
        let mut z: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.fft_forward(&mut z);
        let scale = 1.0 / self.grid.len() as f64;
        let coeffs = hermitian_part(&self.grid, &z, scale);
        let mut out = SpectralField {
            grid: self.grid.clone(),
            coeffs,
        };
        out.coeffs[0] = ZERO;
        out
    }
}

/// `(Z_k + conj Z_{-k}) · scale / 2`: the transform of the real part of the
/// signal behind `Z`, exactly Hermitian.
fn hermitian_part(grid: &Grid, z: &[Complex64], scale: f64) -> Vec<Complex64> {
    let n = grid.n();
    let half = 0.5 * scale;
    let mut out = vec![ZERO; z.len()];
    for i in 0..n {
        let mi = grid.mirror(i);
        for j in 0..n {
            let mj = grid.mirror(j);
            out[i * n + j] = (z[i * n + j] + z[mi * n + mj].conj()) * half;
        }
    }
    out
}

/// Transform of the imaginary part: `(Z_k − conj Z_{-k}) · scale / (2i)`.
fn antihermitian_part(grid: &Grid, z: &[Complex64], scale: f64) -> Vec<Complex64> {
    let n = grid.n();
    let factor = Complex64::new(0.0, -0.5 * scale);
    let mut out = vec![ZERO; z.len()];
    for i in 0..n {
        let mi = grid.mirror(i);
        for j in 0..n {
            let mj = grid.mirror(j);
            out[i * n + j] = (z[i * n + j] - z[mi * n + mj].conj()) * factor;
        }
    }
    out
}

/// Two real fields through one complex inverse FFT.
pub fn to_physical_pair(a: &SpectralField, b: &SpectralField) -> Result<(PhysicalField, PhysicalField)> {
    a.same_grid(b)?;
    let mut z: Vec<Complex64> = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(p, q)| Complex64::new(p.re - q.im, p.im + q.re))
        .collect();
    a.grid.fft_inverse(&mut z);
    let re = z.iter().map(|c| c.re).collect();
    let im = z.iter().map(|c| c.im).collect();
    Ok((
        PhysicalField {
            grid: a.grid.clone(),
            values: re,
        },
        PhysicalField {
            grid: a.grid.clone(),
            values: im,
        },
    ))
}

/// Two real fields through one complex forward FFT, mean modes dropped.
pub fn to_spectral_pair(p: &PhysicalField, q: &PhysicalField) -> Result<(SpectralField, SpectralField)> {
    if p.grid != q.grid {
        return Err(Error::GridMismatch {
            left: p.grid.n(),
            right: q.grid.n(),
        });
    }
    let grid = &p.grid;
    let mut z: Vec<Complex64> = p
        .values
        .iter()
        .zip(&q.values)
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    grid.fft_forward(&mut z);
    let scale = 1.0 / grid.len() as f64;
    let mut a = SpectralField {
        grid: grid.clone(),
        coeffs: hermitian_part(grid, &z, scale),
    };
    let mut b = SpectralField {
        grid: grid.clone(),
        coeffs: antihermitian_part(grid, &z, scale),
    };
    a.coeffs[0] = ZERO;
    b.coeffs[0] = ZERO;
    Ok((a, b))
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![ZERO; grid.len()],
        }
    }

    /// Wraps raw coefficients. The mean mode is zeroed and the coefficients
    /// are projected onto their Hermitian part, so the result is always a
    /// valid real zero-mean field.
    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SampleCount {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        let mut coeffs = hermitian_part(grid, &coeffs, 1.0);
        coeffs[0] = ZERO;
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Builds a field from `(kx, ky, ŵ_k)` triples; the mirror mode `-k`
    /// receives the conjugate. Repeated modes accumulate.
    pub fn from_modes(grid: &Grid, modes: &[(i64, i64, Complex64)]) -> Self {
        let n = grid.n();
        let mut out = SpectralField::zeros(grid);
        for &(kx, ky, c) in modes {
            if kx == 0 && ky == 0 {
                continue;
            }
            let (i, j) = (grid.index_of(kx), grid.index_of(ky));
            let (mi, mj) = (grid.mirror(i), grid.mirror(j));
            if (i, j) == (mi, mj) {
                out.coeffs[i * n + j] += Complex64::new(c.re, 0.0);
            } else {
                out.coeffs[i * n + j] += c;
                out.coeffs[mi * n + mj] += c.conj();
            }
        }
        out
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of wavenumber `(kx, ky)`.
    pub fn coeff(&self, kx: i64, ky: i64) -> Complex64 {
        let g = &self.grid;
        self.coeffs[g.index_of(kx) * g.n() + g.index_of(ky)]
    }

    #[inline]
    pub fn mean_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Largest violation of `ŵ_{-k} = conj(ŵ_k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let m = self.coeffs[g.mirror(i) * n + g.mirror(j)];
                worst = worst.max((self.coeffs[i * n + j] - m.conj()).norm());
            }
        }
        worst
    }

    pub(crate) fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n(),
                right: other.grid.n(),
            });
        }
        Ok(())
    }

    pub fn to_physical(&self) -> PhysicalField {
        let mut z = self.coeffs.clone();
        self.grid.fft_inverse(&mut z);
        PhysicalField {
            grid: self.grid.clone(),
            values: z.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Coefficient-wise multiplication by `symbol(kx, ky)`.
    fn map_symbol(&self, symbol: impl Fn(usize, usize, i64, i64) -> Complex64) -> SpectralField {
        let n = self.grid.n();
        let mut coeffs = vec![ZERO; self.coeffs.len()];
        self.grid.for_each_mode(|i, j, kx, ky| {
            let c = self.coeffs[i * n + j];
            if c != ZERO {
                coeffs[i * n + j] = c * symbol(i, j, kx, ky);
            }
        });
        coeffs[0] = ZERO;
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// The same trigonometric polynomial on another grid. Modes that do not
    /// fit strictly below the smaller Nyquist index are dropped.
    pub fn resampled(&self, target: &Grid) -> SpectralField {
        let (n, m) = (self.grid.n(), target.n());
        let limit = (n.min(m) / 2) as i64;
        let mut out = SpectralField::zeros(target);
        self.grid.for_each_mode(|i, j, kx, ky| {
            if kx.abs() < limit && ky.abs() < limit {
                out.coeffs[target.index_of(kx) * m + target.index_of(ky)] = self.coeffs[i * n + j];
            }
        });
        out
    }

    /// Multiplies by a real scalar.
    pub fn scaled(&self, a: f64) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `self += a · x`.
    pub fn axpy(&mut self, a: f64, x: &SpectralField) -> Result<()> {
        self.same_grid(x)?;
        for (s, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += v * a;
        }
        Ok(())
    }

    /// `self + a · x` without mutating either operand.
    pub fn plus_scaled(&self, a: f64, x: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(a, x)?;
        Ok(out)
    }

    /// Spectral derivative: multiplication by `2πi k_axis`, Nyquist modes zeroed.
    pub fn derivative(&self, axis: Axis) -> SpectralField {
        let g = self.grid.clone();
        self.map_symbol(|i, j, kx, ky| {
            if g.is_nyquist(i) || g.is_nyquist(j) {
                return ZERO;
            }
            let k = match axis {
                Axis::X => kx,
                Axis::Y => ky,
            };
            Complex64::new(0.0, TAU * k as f64)
        })
    }

    /// Multiplication by `-4π²|k|²`.
    pub fn laplacian(&self) -> SpectralField {
        self.map_symbol(|_, _, kx, ky| Complex64::new(-TAU * TAU * (kx * kx + ky * ky) as f64, 0.0))
    }

    /// `Δ⁻¹`: division by `-4π²|k|²`. Refuses fields whose mean mode is not zero.
    pub fn invert_laplacian(&self) -> Result<SpectralField> {
        let mean = self.coeffs[0].norm();
        if mean > MEAN_MODE_TOLERANCE {
            return Err(Error::NonzeroMean(mean));
        }
        Ok(self.map_symbol(|_, _, kx, ky| {
            let k2 = (kx * kx + ky * ky) as f64;
            if k2 == 0.0 {
                ZERO
            } else {
                Complex64::new(-1.0 / (TAU * TAU * k2), 0.0)
            }
        }))
    }

    /// Velocity `∇^⊥ψ = (−∂_y ψ, ∂_x ψ)` for a streamfunction `ψ = self`.
    pub fn perp_gradient(&self) -> (SpectralField, SpectralField) {
        (self.derivative(Axis::Y).scaled(-1.0), self.derivative(Axis::X))
    }

    /// Riesz transform `∂_axis (−Δ)^{-1/2}`, symbol `i k_axis / |k|`.
    pub fn riesz(&self, axis: Axis) -> SpectralField {
        let g = self.grid.clone();
        self.map_symbol(|i, j, kx, ky| {
            if g.is_nyquist(i) || g.is_nyquist(j) || (kx == 0 && ky == 0) {
                return ZERO;
            }
            let k = match axis {
                Axis::X => kx,
                Axis::Y => ky,
            } as f64;
            let norm = ((kx * kx + ky * ky) as f64).sqrt();
            Complex64::new(0.0, k / norm)
        })
    }

    /// Zeroes every mode with a component above the 2/3-rule cutoff.
    pub fn dealiased(&self) -> SpectralField {
        let cut = self.grid.dealias_cutoff();
        self.map_symbol(|_, _, kx, ky| {
            if kx.abs() > cut || ky.abs() > cut {
                ZERO
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
    }

    /// `Σ |ŵ_k|²` over modes with a component above `cutoff`.
    pub fn energy_above(&self, cutoff: i64) -> f64 {
        let n = self.grid.n();
        let mut acc = 0.0;
        self.grid.for_each_mode(|i, j, kx, ky| {
            if kx.abs() > cutoff || ky.abs() > cutoff {
                acc += self.coeffs[i * n + j].norm_sqr();
            }
        });
        acc
    }

    /// Dealiased pseudospectral Jacobian `∂(a, b) = ∂_x a ∂_y b − ∂_x b ∂_y a`.
    pub fn jacobian(&self, other: &SpectralField) -> Result<SpectralField> {
        self.same_grid(other)?;
        let (ax, ay) = self.dealiased_gradient();
        let (bx, by) = other.dealiased_gradient();
        let prod: Vec<f64> = (0..ax.len()).map(|p| ax[p] * by[p] - bx[p] * ay[p]).collect();
        let prod = PhysicalField {
            grid: self.grid.clone(),
            values: prod,
        };
        Ok(prod.to_spectral().dealiased())
    }

    /// `(∂(self, b), ∂(self, c))` sharing the transforms of `self`. The two
    /// products are transformed separately so that each output is exactly
    /// linear under power-of-two rescaling of its own input.
    pub fn jacobian_shared(&self, b: &SpectralField, c: &SpectralField) -> Result<(SpectralField, SpectralField)> {
        self.same_grid(b)?;
        self.same_grid(c)?;
        let (ax, ay) = self.dealiased_gradient();
        let transform = |f: &SpectralField| {
            let (fx, fy) = f.dealiased_gradient();
            let mut z: Vec<Complex64> = (0..ax.len())
                .map(|p| Complex64::new(ax[p] * fy[p] - fx[p] * ay[p], 0.0))
                .collect();
            self.grid.fft_forward(&mut z);
            dealiased_real_part(&self.grid, &z)
        };
        Ok((transform(b), transform(c)))
    }

    /// Collocation values of `(∂_x w, ∂_y w)` for the dealiased field, through
    /// one inverse transform.
    fn dealiased_gradient(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let n = g.n();
        let cut = g.dealias_cutoff();
        let mut z = vec![ZERO; self.coeffs.len()];
        for i in 0..n {
            let kx = g.wavenumber(i);
            if kx.abs() > cut {
                continue;
            }
            let sx = Complex64::new(0.0, TAU * kx as f64);
            for j in 0..n {
                let ky = g.wavenumber(j);
                let c = self.coeffs[i * n + j];
                if ky.abs() > cut || c == ZERO {
                    continue;
                }
                let dx = c * sx;
                let dy = c * Complex64::new(0.0, TAU * ky as f64);
                z[i * n + j] = Complex64::new(dx.re - dy.im, dx.im + dy.re);
            }
        }
        z[0] = ZERO;
        g.fft_inverse(&mut z);
        z.into_iter().map(|c| (c.re, c.im)).unzip()
    }
}

/// Dealiased spectrum of the real part of the field whose transform is `z`.
fn dealiased_real_part(grid: &Grid, z: &[Complex64]) -> SpectralField {
    let n = grid.n();
    let cut = grid.dealias_cutoff();
    let half = 0.5 / grid.len() as f64;
    let mut a = vec![ZERO; z.len()];
    for i in 0..n {
        if grid.wavenumber(i).abs() > cut {
            continue;
        }
        let mi = grid.mirror(i);
        for j in 0..n {
            if grid.wavenumber(j).abs() > cut {
                continue;
            }
            a[i * n + j] = (z[i * n + j] + z[mi * n + grid.mirror(j)].conj()) * half;
        }
    }
    a[0] = ZERO;
    SpectralField {
        grid: grid.clone(),
        coeffs: a,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::random_band_field;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    fn max_abs(a: &[f64]) -> f64 {
        a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn coeff_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        a.coeffs()
            .iter()
            .zip(b.coeffs())
            .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
    }

    fn coeff_max(a: &SpectralField) -> f64 {
        a.coeffs().iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    fn random_physical(g: &Grid, seed: u64) -> PhysicalField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let vals = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        PhysicalField::new(g, vals).unwrap()
    }

    #[test]
    fn constant_field_has_no_spectrum() {
        let g = grid(32);
        let s = PhysicalField::from_fn(&g, |_, _| 1.0).to_spectral();
        assert!(coeff_max(&s) < 1e-15);
    }

    #[test]
    fn cosine_is_single_mode() {
        let g = grid(32);
        let s = PhysicalField::from_fn(&g, |x, _| (TAU * x).cos()).to_spectral();
        assert!((s.coeff(1, 0) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((s.coeff(-1, 0) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let rest: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() - 0.5;
        assert!(rest.abs() < 1e-15);
    }

    #[test]
    fn random_round_trip() {
        let g = grid(64);
        let f = random_physical(&g, 3);
        let mean = f.mean();
        let back = f.to_spectral().to_physical();
        let centred: Vec<f64> = f.values().iter().map(|v| v - mean).collect();
        assert!(max_diff(back.values(), &centred) <= 1e-12 * max_abs(&centred));
    }

    #[test]
    fn derivative_of_cosine() {
        let g = grid(64);
        let d = PhysicalField::from_fn(&g, |x, _| (TAU * x).cos())
            .to_spectral()
            .derivative(Axis::X)
            .to_physical();
        let exact = PhysicalField::from_fn(&g, |x, _| -TAU * (TAU * x).sin());
        assert!(max_diff(d.values(), exact.values()) < 1e-12 * TAU);

        let dy = PhysicalField::from_fn(&g, |x, _| (TAU * 3.0 * x).sin() + (TAU * x).cos())
            .to_spectral()
            .derivative(Axis::Y);
        assert_eq!(coeff_max(&dy), 0.0);
    }

    #[test]
    fn mixed_derivatives_commute_exactly() {
        let g = grid(32);
        let f = random_physical(&g, 9).to_spectral();
        let xy = f.derivative(Axis::X).derivative(Axis::Y);
        let yx = f.derivative(Axis::Y).derivative(Axis::X);
        // identical symbols, multiplied in opposite order
        assert!(coeff_diff(&xy, &yx) <= 4.0 * f64::EPSILON * coeff_max(&xy));
    }

    #[test]
    fn laplacian_inverse_of_cosine() {
        let g = grid(32);
        let s = PhysicalField::from_fn(&g, |x, _| (TAU * x).cos()).to_spectral();
        let inv = s.invert_laplacian().unwrap().to_physical();
        let exact = PhysicalField::from_fn(&g, |x, _| -(TAU * x).cos() / (4.0 * PI * PI));
        assert!(max_diff(inv.values(), exact.values()) < 1e-12 / (4.0 * PI * PI));
    }

    #[test]
    fn laplacian_round_trips() {
        let g = grid(64);
        let f = random_physical(&g, 11).to_spectral();
        let back = f.laplacian().invert_laplacian().unwrap();
        assert!(coeff_diff(&back, &f) <= 1e-12 * coeff_max(&f));
        assert_eq!(back.mean_mode(), ZERO);
        let fwd = f.invert_laplacian().unwrap().laplacian();
        assert!(coeff_diff(&fwd, &f) <= 1e-12 * coeff_max(&f));
    }

    #[test]
    fn invert_laplacian_rejects_mean() {
        let g = grid(16);
        let mut c = vec![ZERO; g.len()];
        c[0] = Complex64::new(1e-10, 0.0);
        let bad = SpectralField {
            grid: g.clone(),
            coeffs: c,
        };
        assert!(matches!(bad.invert_laplacian(), Err(Error::NonzeroMean(_))));
    }

    #[test]
    fn resampling_interpolates() {
        let coarse = grid(32);
        let fine = grid(128);
        let w = random_band_field(&coarse, 1.0, 8.0, 0.0, 3);
        let up = w.resampled(&fine);
        assert_eq!(up.resampled(&coarse), w);
        let (pc, pf) = (w.to_physical(), up.to_physical());
        for i in 0..32 {
            for j in 0..32 {
                assert!((pc.at(i, j) - pf.at(4 * i, 4 * j)).abs() < 1e-13);
            }
        }
        assert!(pf.max_abs() >= pc.max_abs() - 1e-14);
    }

    #[test]
    fn shear_streamfunction_velocity() {
        let g = grid(32);
        let psi = PhysicalField::from_fn(&g, |_, y| (TAU * y).sin()).to_spectral();
        let (u, v) = psi.perp_gradient();
        let exact = PhysicalField::from_fn(&g, |_, y| -TAU * (TAU * y).cos());
        assert!(max_diff(u.to_physical().values(), exact.values()) < 1e-12 * TAU);
        assert!(v.to_physical().max_abs() < 1e-14);
    }

    #[test]
    fn perp_gradient_is_divergence_free_and_curl_is_laplacian() {
        let g = grid(32);
        let psi = random_physical(&g, 5).to_spectral();
        let (u, v) = psi.perp_gradient();
        let mut div = u.derivative(Axis::X);
        div.axpy(1.0, &v.derivative(Axis::Y)).unwrap();
        assert!(coeff_max(&div) <= 1e-12 * coeff_max(&u.derivative(Axis::X)));

        // curl = ∂_x v − ∂_y u, compared with Δψ on Nyquist-free modes
        let mut curl = v.derivative(Axis::X);
        curl.axpy(-1.0, &u.derivative(Axis::Y)).unwrap();
        let core = psi.dealiased();
        let (cu, cv) = core.perp_gradient();
        let mut ccurl = cv.derivative(Axis::X);
        ccurl.axpy(-1.0, &cu.derivative(Axis::Y)).unwrap();
        let lap = core.laplacian();
        assert!(coeff_diff(&ccurl, &lap) <= 1e-12 * coeff_max(&lap));
        assert!(coeff_max(&curl) > 0.0);
    }

    #[test]
    fn jacobian_of_field_with_itself_vanishes() {
        let g = grid(64);
        let f = random_band_field(&g, 1.0, 12.0, 0.0, 21);
        let j = f.jacobian(&f).unwrap();
        assert_eq!(coeff_max(&j), 0.0);
    }

    #[test]
    fn jacobian_analytic_case() {
        let g = grid(32);
        let a = PhysicalField::from_fn(&g, |x, _| (TAU * x).sin()).to_spectral();
        let b = PhysicalField::from_fn(&g, |_, y| (TAU * y).sin()).to_spectral();
        let j = a.jacobian(&b).unwrap().to_physical();
        let exact = PhysicalField::from_fn(&g, |x, y| TAU * TAU * (TAU * x).cos() * (TAU * y).cos());
        assert!(max_diff(j.values(), exact.values()) < 1e-12 * TAU * TAU);
    }

    #[test]
    fn jacobian_antisymmetric_zero_mean_dealiased() {
        let g = grid(64);
        let a = random_physical(&g, 1).to_spectral();
        let b = random_physical(&g, 2).to_spectral();
        let ab = a.jacobian(&b).unwrap();
        let ba = b.jacobian(&a).unwrap();
        assert!(coeff_diff(&ab, &ba.scaled(-1.0)) <= 1e-12 * coeff_max(&ab));
        assert_eq!(ab.mean_mode(), ZERO);
        assert_eq!(ab.energy_above(g.dealias_cutoff()), 0.0);
        assert_eq!(ab.hermitian_defect(), 0.0);
    }

    #[test]
    fn shared_jacobian_matches_individual() {
        let g = grid(32);
        let a = random_physical(&g, 4).to_spectral();
        let b = random_physical(&g, 5).to_spectral();
        let c = random_physical(&g, 6).to_spectral();
        let (jb, jc) = a.jacobian_shared(&b, &c).unwrap();
        let eb = a.jacobian(&b).unwrap();
        let ec = a.jacobian(&c).unwrap();
        assert!(coeff_diff(&jb, &eb) <= 1e-12 * coeff_max(&eb));
        assert!(coeff_diff(&jc, &ec) <= 1e-12 * coeff_max(&ec));
    }

    #[test]
    fn riesz_of_cosine() {
        let g = grid(32);
        let s = PhysicalField::from_fn(&g, |x, _| (TAU * x).cos()).to_spectral();
        let r = s.riesz(Axis::X).to_physical();
        let exact = PhysicalField::from_fn(&g, |x, _| -(TAU * x).sin());
        assert!(max_diff(r.values(), exact.values()) < 1e-12);
    }

    #[test]
    fn riesz_squares_sum_to_minus_identity() {
        let g = grid(64);
        let w = random_band_field(&g, 1.0, 20.0, 0.0, 8);
        let mut sum = w.riesz(Axis::X).riesz(Axis::X);
        sum.axpy(1.0, &w.riesz(Axis::Y).riesz(Axis::Y)).unwrap();
        sum.axpy(1.0, &w).unwrap();
        assert!(coeff_max(&sum) <= 1e-12 * coeff_max(&w));
    }

    #[test]
    fn velocity_gradient_via_riesz_matches_direct() {
        let g = grid(64);
        let w = random_physical(&g, 17).to_spectral();
        let (u, v) = w.invert_laplacian().unwrap().perp_gradient();
        let direct = [
            u.derivative(Axis::X),
            u.derivative(Axis::Y),
            v.derivative(Axis::X),
            v.derivative(Axis::Y),
        ];
        // (R_x, R_y) ⊗ (R_y, −R_x) ω
        let ry = w.riesz(Axis::Y);
        let mrx = w.riesz(Axis::X).scaled(-1.0);
        let riesz = [
            ry.riesz(Axis::X),
            ry.riesz(Axis::Y),
            mrx.riesz(Axis::X),
            mrx.riesz(Axis::Y),
        ];
        for (d, r) in direct.iter().zip(&riesz) {
            let dp = d.to_physical();
            let rp = r.to_physical();
            assert!(max_diff(dp.values(), rp.values()) <= 1e-12 * max_abs(dp.values()));
        }
    }

    #[test]
    fn from_coeffs_projects_to_valid_field() {
        let g = grid(16);
        let c: Vec<Complex64> = (0..g.len()).map(|v| Complex64::new(v as f64, 1.0)).collect();
        let f = SpectralField::from_coeffs(&g, c).unwrap();
        assert_eq!(f.mean_mode(), ZERO);
        assert_eq!(f.hermitian_defect(), 0.0);
        assert!(SpectralField::from_coeffs(&g, vec![ZERO; 3]).is_err());
    }

    #[test]
    fn pair_transforms_match_single() {
        let g = grid(32);
        let a = random_physical(&g, 30);
        let b = random_physical(&g, 31);
        let (sa, sb) = to_spectral_pair(&a, &b).unwrap();
        assert!(coeff_diff(&sa, &a.to_spectral()) < 1e-14);
        assert!(coeff_diff(&sb, &b.to_spectral()) < 1e-14);
        let (pa, pb) = to_physical_pair(&sa, &sb).unwrap();
        assert!(max_diff(pa.values(), sa.to_physical().values()) < 1e-14);
        assert!(max_diff(pb.values(), sb.to_physical().values()) < 1e-14);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = SpectralField::zeros(&grid(16));
        let b = SpectralField::zeros(&grid(32));
        assert!(matches!(a.jacobian(&b), Err(Error::GridMismatch { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn operators_preserve_hermitian_zero_mean(seed in 0u64..10_000) {
                let g = grid(16);
                let f = random_physical(&g, seed).to_spectral();
                let h = random_physical(&g, seed + 1).to_spectral();
                let outs = [
                    f.derivative(Axis::X),
                    f.derivative(Axis::Y),
                    f.invert_laplacian().unwrap(),
                    f.riesz(Axis::X),
                    f.riesz(Axis::Y),
                    f.perp_gradient().0,
                    f.jacobian(&h).unwrap(),
                ];
                for o in &outs {
                    prop_assert_eq!(o.mean_mode(), ZERO);
                    prop_assert!(o.hermitian_defect() <= 1e-15 * (1.0 + coeff_max(o)));
                }
            }

            #[test]
            fn double_derivative_inverse_is_identity(seed in 0u64..10_000) {
                let g = grid(16);
                let f = random_band_field(&g, 1.0, 6.0, 0.0, seed);
                let mut lap = f.derivative(Axis::X).derivative(Axis::X);
                lap.axpy(1.0, &f.derivative(Axis::Y).derivative(Axis::Y)).unwrap();
                let back = lap.invert_laplacian().unwrap();
                prop_assert!(coeff_diff(&back, &f) <= 1e-12 * coeff_max(&f));
            }
        }
    }
}
