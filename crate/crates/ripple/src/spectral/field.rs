//! Complex Fourier coefficients of a real periodic field.
//!
//! Normalization: the forward transform is f(k) = (1/(n1*n2)) sum_x f(x) e^{-ik.x},
//! so coefficients approximate the integrals int e^{-ik.x} f(x) dx over [0,1)^2
//! and Parseval reads sum_k |f(k)|^2 = mean_x |f(x)|^2.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::grid::TorusGrid;
use crate::error::{Result, RippleError};

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(n: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, dir == FftDirection::Forward);
    let mut guard = cache.lock().unwrap();
    guard
        .entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(n, dir))
        .clone()
}

/// Unnormalized 2-D FFT over a row-major buffer (x1 fastest, n2 rows of n1).
pub(crate) fn fft2(buf: &mut [Complex64], n1: usize, n2: usize, dir: FftDirection) {
    debug_assert_eq!(buf.len(), n1 * n2);
    let row_fft = plan(n1, dir);
    let mut scratch = vec![Complex64::ZERO; row_fft.get_inplace_scratch_len()];
    for row in buf.chunks_exact_mut(n1) {
        row_fft.process_with_scratch(row, &mut scratch);
    }
    let col_fft = plan(n2, dir);
    let mut scratch = vec![Complex64::ZERO; col_fft.get_inplace_scratch_len()];
    let mut col = vec![Complex64::ZERO; n2];
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            col[i2] = buf[i2 * n1 + i1];
        }
        col_fft.process_with_scratch(&mut col, &mut scratch);
        for i2 in 0..n2 {
            buf[i2 * n1 + i1] = col[i2];
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::ZERO; grid.len()],
        }
    }

    /// Takes ownership of raw coefficients in storage order.
    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(RippleError::Config(format!(
                "coefficient buffer has {} entries for a {}x{} grid",
                coeffs.len(),
                grid.n1(),
                grid.n2()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    /// Forward transform of physical samples (row-major, x1 fastest).
    pub fn from_physical(grid: TorusGrid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(RippleError::Config(format!(
                "sample buffer has {} entries for a {}x{} grid",
                samples.len(),
                grid.n1(),
                grid.n2()
            )));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&mut buf, grid.n1(), grid.n2(), FftDirection::Forward);
        let scale = 1.0 / grid.len() as f64;
        for c in &mut buf {
            *c *= scale;
        }
        Ok(Self { grid, coeffs: buf })
    }

    /// Hermitian completion of a sparse list of modes: each (j1, j2, amp)
    /// sets coeff(k) = amp and coeff(-k) = conj(amp).
    pub fn from_modes(grid: TorusGrid, modes: &[(i64, i64, Complex64)]) -> Self {
        let mut f = Self::zeros(grid);
        for &(j1, j2, amp) in modes {
            let idx = grid.index_of(j1, j2);
            f.coeffs[idx] = amp;
            let conj = grid.conjugate_index(idx);
            if conj != idx {
                f.coeffs[conj] = amp.conj();
            }
        }
        f
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, j1: i64, j2: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(j1, j2)]
    }

    /// Mean of the represented field, i.e. the k = 0 coefficient.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Inverse transform; returns the real parts of the physical samples.
    pub fn to_physical(&self) -> Vec<f64> {
        self.to_physical_complex().iter().map(|c| c.re).collect()
    }

    pub(crate) fn to_physical_complex(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        fft2(&mut buf, self.grid.n1(), self.grid.n2(), FftDirection::Inverse);
        buf
    }

    /// Largest imaginary part of the physical samples relative to the
    /// largest real part; ~1e-16 for Hermitian coefficient sets.
    pub fn imag_residual(&self) -> f64 {
        let phys = self.to_physical_complex();
        let max_re = phys.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        let max_im = phys.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if max_re == 0.0 {
            max_im
        } else {
            max_im / max_re
        }
    }

    /// Largest deviation from coeff(-k) = conj(coeff(k)), relative to the
    /// largest coefficient magnitude.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for idx in self.grid.indices() {
            let conj = self.grid.conjugate_index(idx);
            if conj < idx {
                continue;
            }
            let a = self.coeffs[idx];
            let b = self.coeffs[conj];
            worst = worst.max((a - b.conj()).norm());
            scale = scale.max(a.norm());
        }
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }

    /// Spectral sup norm, max_k |f(k)|; NaN coefficients yield NaN rather
    /// than being masked by the fold.
    pub fn spectral_inf_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for c in &self.coeffs {
            let n = c.norm();
            if n.is_nan() {
                return f64::NAN;
            }
            best = best.max(n);
        }
        best
    }

    /// Sup norm of the physical field; NaN-propagating like the spectral one.
    pub fn sup_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for c in self.to_physical_complex() {
            let n = c.re.abs();
            if n.is_nan() {
                return f64::NAN;
            }
            best = best.max(n);
        }
        best
    }

    /// sum_k |f(k)|^2, which equals the spatial mean of f^2.
    pub fn spectral_energy(&self) -> f64 {
        compensated_sum(self.coeffs.iter().map(|c| c.norm_sqr()))
    }

    /// L2 inner product int f g dx evaluated spectrally (exact for the
    /// represented trigonometric polynomials).
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        let s = compensated_sum(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| (a * b.conj()).re),
        );
        Ok(s)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// True when every k1 = 0 coefficient vanishes (to the given tolerance,
    /// relative to the largest coefficient).
    pub fn is_mean_zero_in_x1(&self, rel_tol: f64) -> bool {
        let scale = self.spectral_inf_norm();
        let tol = if scale == 0.0 { rel_tol } else { rel_tol * scale };
        self.grid.indices().all(|idx| {
            let (j1, _) = self.grid.mode_of(idx);
            j1 != 0 || self.coeffs[idx].norm() <= tol
        })
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(RippleError::GridMismatch(
                self.grid.n1(),
                self.grid.n2(),
                other.grid.n1(),
                other.grid.n2(),
            ));
        }
        Ok(())
    }
}

/// Neumaier-compensated summation; keeps parallel-merged reductions stable.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in it {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
