//! Alias-free pointwise products via 2x zero padding.
//!
//! Both factors are interpolated onto a doubled grid, multiplied pointwise
//! and truncated back, which realizes the exact truncated convolution
//! h(k) = sum_{k'+k''=k} f(k') g(k'') over retained modes. Doubling (rather
//! than 3/2) covers the cubic terms of the Euler-Lagrange equation when they
//! are composed as two successive quadratic products. Coarse Nyquist
//! coefficients are half-split onto the two fine representatives so real
//! fields interpolate to real fields.

use num_complex::Complex64;
use rustfft::FftDirection;

use super::field::{fft2, SpectralField};
use crate::error::Result;

/// Fourier coefficients of the pointwise product f*g, alias-free on the
/// original grid.
pub fn dealiased_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let grid = f.grid();
    let (n1, n2) = (grid.n1(), grid.n2());
    let (m1, m2) = (2 * n1, 2 * n2);

    let mut a = embed(f, m1, m2);
    let mut b = embed(g, m1, m2);
    fft2(&mut a, m1, m2, FftDirection::Inverse);
    fft2(&mut b, m1, m2, FftDirection::Inverse);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft2(&mut a, m1, m2, FftDirection::Forward);
    let scale = 1.0 / (m1 * m2) as f64;

    let mut coeffs = vec![Complex64::ZERO; grid.len()];
    for idx in grid.indices() {
        let (j1, j2) = grid.mode_of(idx);
        let mut c = fine(&a, m1, m2, j1, j2);
        // fold the +n/2 aliases of the truncation back onto the Nyquist lines
        let nyq1 = j1 == -((n1 / 2) as i64);
        let nyq2 = j2 == -((n2 / 2) as i64);
        if nyq1 {
            c += fine(&a, m1, m2, -j1, j2);
        }
        if nyq2 {
            c += fine(&a, m1, m2, j1, -j2);
        }
        if nyq1 && nyq2 {
            c += fine(&a, m1, m2, -j1, -j2);
        }
        coeffs[idx] = c * scale;
    }
    SpectralField::from_coeffs(grid, coeffs)
}

/// Convenience square f*f.
pub fn dealiased_square(f: &SpectralField) -> Result<SpectralField> {
    dealiased_product(f, f)
}

fn fine(buf: &[Complex64], m1: usize, m2: usize, j1: i64, j2: i64) -> Complex64 {
    let i1 = j1.rem_euclid(m1 as i64) as usize;
    let i2 = j2.rem_euclid(m2 as i64) as usize;
    buf[i2 * m1 + i1]
}

fn embed(f: &SpectralField, m1: usize, m2: usize) -> Vec<Complex64> {
    let grid = f.grid();
    let (n1, n2) = (grid.n1(), grid.n2());
    let mut out = vec![Complex64::ZERO; m1 * m2];
    for idx in grid.indices() {
        let c = f.coeffs()[idx];
        if c == Complex64::ZERO {
            continue;
        }
        let (j1, j2) = grid.mode_of(idx);
        let nyq1 = j1 == -((n1 / 2) as i64);
        let nyq2 = j2 == -((n2 / 2) as i64);
        let w = match (nyq1, nyq2) {
            (false, false) => 1.0,
            (true, false) | (false, true) => 0.5,
            (true, true) => 0.25,
        };
        let mut put = |a: i64, b: i64| {
            let i1 = a.rem_euclid(m1 as i64) as usize;
            let i2 = b.rem_euclid(m2 as i64) as usize;
            out[i2 * m1 + i1] += c * w;
        };
        put(j1, j2);
        if nyq1 {
            put(-j1, j2);
        }
        if nyq2 {
            put(j1, -j2);
        }
        if nyq1 && nyq2 {
            put(-j1, -j2);
        }
    }
    out
}

/// O(N^2) truncated-convolution oracle used by small-instance tests: the
/// same half-split Nyquist convention, evaluated by a direct double loop.
pub fn convolution_oracle(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let grid = f.grid();
    let (n1, n2) = (grid.n1() as i64, grid.n2() as i64);
    let split = |j1: i64, j2: i64, c: Complex64| -> Vec<(i64, i64, Complex64)> {
        let nyq1 = j1 == -n1 / 2;
        let nyq2 = j2 == -n2 / 2;
        let w = match (nyq1, nyq2) {
            (false, false) => 1.0,
            (true, false) | (false, true) => 0.5,
            (true, true) => 0.25,
        };
        let mut v = vec![(j1, j2, c * w)];
        if nyq1 {
            v.push((-j1, j2, c * w));
        }
        if nyq2 {
            v.push((j1, -j2, c * w));
        }
        if nyq1 && nyq2 {
            v.push((-j1, -j2, c * w));
        }
        v
    };
    let mut terms_f = Vec::new();
    for idx in grid.indices() {
        let (j1, j2) = grid.mode_of(idx);
        terms_f.extend(split(j1, j2, f.coeffs()[idx]));
    }
    let mut terms_g = Vec::new();
    for idx in grid.indices() {
        let (j1, j2) = grid.mode_of(idx);
        terms_g.extend(split(j1, j2, g.coeffs()[idx]));
    }
    let mut out = SpectralField::zeros(grid);
    let half1 = n1 / 2;
    let half2 = n2 / 2;
    for &(a1, a2, ca) in &terms_f {
        for &(b1, b2, cb) in &terms_g {
            let (s1, s2) = (a1 + b1, a2 + b2);
            // retained modes, with the +n/2 sums folding onto -n/2
            let (t1, fold1) = if s1 == half1 { (-half1, true) } else { (s1, false) };
            let (t2, fold2) = if s2 == half2 { (-half2, true) } else { (s2, false) };
            let _ = (fold1, fold2);
            if t1 < -half1 || t1 >= half1 || t2 < -half2 || t2 >= half2 {
                continue;
            }
            let idx = grid.index_of(t1, t2);
            out.coeffs_mut()[idx] += ca * cb;
        }
    }
    Ok(out)
}
