//! Deterministic, seedable sampling of periodic white noise on the torus.
//!
//! Coefficients are drawn per conjugate mode pair with a counter-based
//! scheme: one ChaCha8 stream keyed by (seed, canonical pair index). The
//! fill is therefore independent of iteration order and parallelizes with
//! no shared state. Variances follow the flat-spectrum normalization
//! <|xi(k)|^2> = 1 for every lattice mode: interior pairs get independent
//! N(0, 1/2) real and imaginary parts, modes on the Nyquist lines and the
//! zero mode get a real N(0, 1) amplitude shared with their conjugate.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, RippleError};
use crate::spectral::{apply_multiplier, MultiplierSpec, SpectralField, TorusGrid};

#[derive(Debug, Clone)]
pub struct NoiseSample {
    field: SpectralField,
    seed: u64,
}

impl NoiseSample {
    /// Wraps an existing realization (e.g. one loaded from a snapshot).
    pub fn from_field(field: SpectralField, seed: u64) -> Self {
        Self { field, seed }
    }

    pub fn field(&self) -> &SpectralField {
        &self.field
    }

    pub fn into_field(self) -> SpectralField {
        self.field
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> TorusGrid {
        self.field.grid()
    }

    /// P xi: the realization with the k1 = 0 column zeroed, as consumed by
    /// the linear solve and every study.
    pub fn projected(&self) -> SpectralField {
        apply_multiplier(&self.field, &MultiplierSpec::projection_p())
            .expect("projection preserves Hermitian symmetry")
    }
}

fn pair_rng(master: &ChaCha8Rng, pair_idx: u64) -> ChaCha8Rng {
    let mut rng = master.clone();
    rng.set_stream(pair_idx);
    rng
}

/// Draws one white-noise realization. Bit-identical for identical
/// (grid, seed) and independent of fill order.
pub fn sample_white_noise(grid: TorusGrid, seed: u64) -> NoiseSample {
    let master = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::ZERO; grid.len()];
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for idx in grid.indices() {
        if !grid.is_canonical(idx) {
            continue;
        }
        let mut rng = pair_rng(&master, idx as u64);
        let conj = grid.conjugate_index(idx);
        let (nyq1, nyq2) = grid.on_nyquist(idx);
        let (j1, j2) = grid.mode_of(idx);
        let real_mode = (j1 == 0 && j2 == 0) || nyq1 || nyq2;
        if real_mode {
            let a: f64 = StandardNormal.sample(&mut rng);
            coeffs[idx] = Complex64::new(a, 0.0);
            if conj != idx {
                coeffs[conj] = Complex64::new(a, 0.0);
            }
        } else {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let z = Complex64::new(re * inv_sqrt2, im * inv_sqrt2);
            coeffs[idx] = z;
            coeffs[conj] = z.conj();
        }
    }
    let field = SpectralField::from_coeffs(grid, coeffs).expect("buffer sized to grid");
    NoiseSample { field, seed }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentRow {
    /// The requested mode tuple (integer lattice coordinates).
    pub tuple: Vec<(i64, i64)>,
    pub mean_re: f64,
    pub mean_im: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub n_samples: usize,
    /// Whether the tuple splits into conjugate pairs (nonzero expectation).
    pub pairs_to_zero: bool,
    /// Empirical mean exceeds 4 standard errors although the fourth-moment
    /// structure predicts zero.
    pub flagged: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
}

impl MomentReport {
    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }
}

fn sums_to_zero(grid: TorusGrid, a: (i64, i64), b: (i64, i64)) -> bool {
    (a.0 + b.0).rem_euclid(grid.n1() as i64) == 0 && (a.1 + b.1).rem_euclid(grid.n2() as i64) == 0
}

fn splits_into_zero_pairs(grid: TorusGrid, t: &[(i64, i64)]) -> bool {
    match t.len() {
        2 => sums_to_zero(grid, t[0], t[1]),
        4 => {
            (sums_to_zero(grid, t[0], t[1]) && sums_to_zero(grid, t[2], t[3]))
                || (sums_to_zero(grid, t[0], t[2]) && sums_to_zero(grid, t[1], t[3]))
                || (sums_to_zero(grid, t[0], t[3]) && sums_to_zero(grid, t[1], t[2]))
        }
        _ => false,
    }
}

/// Empirical second and fourth mixed moments over the given seeds.
///
/// Each tuple must have two or four modes; the product xi(k_1)...xi(k_m) is
/// averaged over realizations. Tuples whose mean exceeds four standard
/// errors even though no two-pair zero-sum structure exists are flagged.
pub fn noise_moment_suite(
    grid: TorusGrid,
    seeds: &[u64],
    tuples: &[Vec<(i64, i64)>],
) -> Result<MomentReport> {
    if tuples.is_empty() {
        return Err(RippleError::Config("empty mode list".into()));
    }
    if seeds.len() < 100 {
        return Err(RippleError::Config(format!(
            "moment suite needs at least 100 seeds, got {}",
            seeds.len()
        )));
    }
    for t in tuples {
        if t.len() != 2 && t.len() != 4 {
            return Err(RippleError::Config(format!(
                "mode tuples must have 2 or 4 entries, got {}",
                t.len()
            )));
        }
    }
    let mut acc: Vec<Vec<Complex64>> = vec![Vec::with_capacity(seeds.len()); tuples.len()];
    for &seed in seeds {
        let xi = sample_white_noise(grid, seed);
        for (ti, t) in tuples.iter().enumerate() {
            let prod = t
                .iter()
                .map(|&(j1, j2)| xi.field.coeff(j1, j2))
                .product::<Complex64>();
            acc[ti].push(prod);
        }
    }
    let rows = tuples
        .iter()
        .zip(acc)
        .map(|(t, vals)| {
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<Complex64>() / n;
            let var_re =
                vals.iter().map(|v| (v.re - mean.re).powi(2)).sum::<f64>() / (n - 1.0);
            let var_im =
                vals.iter().map(|v| (v.im - mean.im).powi(2)).sum::<f64>() / (n - 1.0);
            let se_re = (var_re / n).sqrt();
            let se_im = (var_im / n).sqrt();
            let pairs = splits_into_zero_pairs(grid, t);
            let flagged = !pairs
                && (mean.re.abs() > 4.0 * se_re.max(1e-300)
                    || mean.im.abs() > 4.0 * se_im.max(1e-300));
            MomentRow {
                tuple: t.clone(),
                mean_re: mean.re,
                mean_im: mean.im,
                stderr_re: se_re,
                stderr_im: se_im,
                n_samples: vals.len(),
                pairs_to_zero: pairs,
                flagged,
            }
        })
        .collect();
    Ok(MomentReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{mollify, MaskSpec};

    #[test]
    fn identical_seed_gives_bit_identical_fields() {
        let grid = TorusGrid::new(16, 16).unwrap();
        let a = sample_white_noise(grid, 42);
        let b = sample_white_noise(grid, 42);
        assert_eq!(a.field().coeffs(), b.field().coeffs());
        let c = sample_white_noise(grid, 43);
        assert_ne!(a.field().coeffs(), c.field().coeffs());
    }

    #[test]
    fn realization_is_real_and_hermitian() {
        let grid = TorusGrid::new(12, 8).unwrap();
        let xi = sample_white_noise(grid, 7);
        assert!(xi.field().hermitian_residual() < 1e-15);
        assert!(xi.field().imag_residual() < 1e-12);
    }

    #[test]
    fn per_mode_variance_is_one() {
        let grid = TorusGrid::new(8, 8).unwrap();
        let m = 10_000usize;
        let probes = [(1i64, 0i64), (2, 3), (0, 1), (-4, 2), (3, -4)];
        let mut acc = [0.0f64; 5];
        for seed in 0..m as u64 {
            let xi = sample_white_noise(grid, seed);
            for (i, &(j1, j2)) in probes.iter().enumerate() {
                acc[i] += xi.field().coeff(j1, j2).norm_sqr();
            }
        }
        for (i, &(j1, j2)) in probes.iter().enumerate() {
            let v = acc[i] / m as f64;
            assert!(
                (v - 1.0).abs() < 0.05,
                "mode ({j1},{j2}): <|xi|^2> = {v}"
            );
        }
    }

    #[test]
    fn distinct_modes_are_uncorrelated() {
        let grid = TorusGrid::new(8, 8).unwrap();
        let seeds: Vec<u64> = (0..10_000).collect();
        let report = noise_moment_suite(
            grid,
            &seeds,
            &[vec![(1, 0), (2, 1)], vec![(1, 2), (3, -1)]],
        )
        .unwrap();
        for row in &report.rows {
            assert!(!row.pairs_to_zero);
            assert!(
                row.mean_re.abs() <= 3.0 * row.stderr_re,
                "re correlation {} vs se {}",
                row.mean_re,
                row.stderr_re
            );
            assert!(row.mean_im.abs() <= 3.0 * row.stderr_im);
            assert!(!row.flagged);
        }
    }

    #[test]
    fn fourth_moment_of_modulus_is_two() {
        // |xi(k)|^2 ~ Exp(1) for interior modes, so <|xi|^4> = 2 (the
        // Gaussian components have <Re^4> = 3/4, and 2*(3/4) + 2*(1/4) = 2).
        let grid = TorusGrid::new(8, 8).unwrap();
        let seeds: Vec<u64> = (0..10_000).collect();
        let report =
            noise_moment_suite(grid, &seeds, &[vec![(1, 2), (1, 2), (-1, -2), (-1, -2)]]).unwrap();
        let row = &report.rows[0];
        assert!(row.pairs_to_zero);
        assert!((row.mean_re - 2.0).abs() < 0.2, "got {}", row.mean_re);
    }

    #[test]
    fn independent_pairs_factorize() {
        let grid = TorusGrid::new(8, 8).unwrap();
        let seeds: Vec<u64> = (0..10_000).collect();
        let report =
            noise_moment_suite(grid, &seeds, &[vec![(1, 0), (-1, 0), (2, 2), (-2, -2)]]).unwrap();
        let row = &report.rows[0];
        assert!(row.pairs_to_zero);
        assert!((row.mean_re - 1.0).abs() < 0.1, "got {}", row.mean_re);
    }

    #[test]
    fn no_zero_sum_tuples_vanish() {
        let grid = TorusGrid::new(8, 8).unwrap();
        let seeds: Vec<u64> = (0..2_000).collect();
        let report = noise_moment_suite(
            grid,
            &seeds,
            &[vec![(1, 0), (2, 0), (0, 1), (1, 1)], vec![(1, 1), (1, 1), (1, -1), (2, 0)]],
        )
        .unwrap();
        assert!(!report.any_flagged());
    }

    #[test]
    fn suite_rejects_bad_inputs() {
        let grid = TorusGrid::new(8, 8).unwrap();
        let seeds: Vec<u64> = (0..200).collect();
        assert!(noise_moment_suite(grid, &seeds, &[]).is_err());
        assert!(noise_moment_suite(grid, &seeds[..50], &[vec![(1, 0), (-1, 0)]]).is_err());
        assert!(noise_moment_suite(grid, &seeds, &[vec![(1, 0)]]).is_err());
    }

    #[test]
    fn physical_variance_matches_flat_spectrum() {
        // white noise on the lattice has per-site variance n1*n2
        let grid = TorusGrid::new(16, 16).unwrap();
        let mut acc = 0.0;
        let m = 50;
        for seed in 0..m {
            let phys = sample_white_noise(grid, seed).into_field().to_physical();
            acc += phys.iter().map(|v| v * v).sum::<f64>() / grid.len() as f64;
        }
        let v = acc / m as f64;
        let expect = grid.len() as f64;
        assert!((v / expect - 1.0).abs() < 0.1, "site variance {v} vs {expect}");
    }

    #[test]
    fn log_derivative_of_mollification_matches_delta_phi() {
        let grid = TorusGrid::new(16, 16).unwrap();
        let xi = sample_white_noise(grid, 3).into_field();
        let mask = MaskSpec::gaussian();
        let ell = 0.2;
        let h = 1e-4;
        let up = mollify(&xi, ell * (1.0 + h), &mask).unwrap();
        let dn = mollify(&xi, ell * (1.0 - h), &mask).unwrap();
        // central difference in log ell: (f(l e^h) - f(l e^-h)) / 2h with
        // e^h ~ 1 + h; relative error O(h^2)
        let fd = up.sub(&dn).unwrap().scale(1.0 / (2.0 * h));
        let exact = apply_multiplier(
            &xi,
            &crate::spectral::MultiplierSpec::mollifier_log_deriv(&mask, ell),
        )
        .unwrap();
        let rel = fd.sub(&exact).unwrap().spectral_inf_norm() / exact.spectral_inf_norm();
        assert!(rel < 1e-6, "delta-phi consistency {rel}");
    }
}
