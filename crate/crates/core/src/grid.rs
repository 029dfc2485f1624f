//! Torus discretization and cached 2D FFT plans.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exec::Execution;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans_for(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(p) = cache.read().expect("plan cache poisoned").get(&n) {
        return Arc::clone(p);
    }
    let mut guard = cache.write().expect("plan cache poisoned");
    let entry = guard.entry(n).or_insert_with(|| {
        let mut planner = FftPlanner::new();
        Arc::new(Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    });
    Arc::clone(entry)
}

/// Uniform `n × n` collocation grid on the unit torus `[0,1)²`.
///
/// Samples are stored row-major with the x index as the row: entry `i * n + j`
/// is the point `(i h, j h)`. Spectral coefficients use the same layout with
/// FFT index ordering, so index `i` carries wavenumber [`Grid::wavenumber`]`(i)`.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    exec: Execution,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("exec", &self.exec)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for Grid {}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidResolution(n));
        }
        Ok(Grid {
            n,
            exec: Execution::default(),
            plans: plans_for(n),
        })
    }

    /// Same grid, different loop execution strategy.
    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    #[inline]
    pub fn execution(&self) -> Execution {
        self.exec
    }

    /// Collocation point `(i h, j h)`.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.h(), j as f64 * self.h())
    }

    /// Signed integer wavenumber for FFT index `i`; the Nyquist index maps to `-n/2`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT index holding wavenumber `k` (taken modulo `n`).
    #[inline]
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Index of the mode `-k` for the mode stored at `i`.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    /// Largest per-component wavenumber retained by the 2/3 dealiasing rule.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Calls `f(i, j, kx, ky)` for every spectral index.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, usize, i64, i64)) {
        for i in 0..self.n {
            let kx = self.wavenumber(i);
            for j in 0..self.n {
                f(i, j, kx, self.wavenumber(j));
            }
        }
    }

    /// Unnormalised forward 2D DFT in place.
    pub(crate) fn fft_forward(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.plans.forward);
    }

    /// Unnormalised inverse 2D DFT in place.
    pub(crate) fn fft_inverse(&self, data: &mut [Complex64]) {
        self.fft2(data, &self.plans.inverse);
    }

    fn fft2(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.len());
        let mut tmp = vec![Complex64::new(0.0, 0.0); self.len()];
        self.fft_rows(data, plan);
        transpose(self.exec, data, &mut tmp, self.n);
        self.fft_rows(&mut tmp, plan);
        transpose(self.exec, &tmp, data, self.n);
    }

    fn fft_rows(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        if self.exec.is_parallel() {
            let rows_per_task = (n / 16).max(1);
            self.exec.for_each_chunk(data, rows_per_task * n, |_, chunk| {
                let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
                plan.process_with_scratch(chunk, &mut scratch);
            });
        } else {
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            plan.process_with_scratch(data, &mut scratch);
        }
    }
}

fn transpose(exec: Execution, src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const BLOCK: usize = 16;
    let block = BLOCK.min(n);
    exec.for_each_chunk(dst, block * n, |blk, rows| {
        let r0 = blk * block;
        let nr = rows.len() / n;
        for c0 in (0..n).step_by(block) {
            let c1 = (c0 + block).min(n);
            for r in 0..nr {
                let out = &mut rows[r * n..(r + 1) * n];
                for c in c0..c1 {
                    out[c] = src[c * n + r0 + r];
                }
            }
        }
    });
}
