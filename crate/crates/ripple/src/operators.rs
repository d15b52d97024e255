//! Linear solve, Euler-Lagrange nonlinearities, the off-line renormalized
//! product and energy diagnostics.
//!
//! The linearized equation L v = P xi inverts mode-wise through
//! G(k) = |k1| / (|k1|^3 + k2^2). The off-line product
//! F^l = P(v_l d2 R v_l) is the one object the pathwise theory cannot
//! handle and is always computed with the dealiased physical product; the
//! quadratic-sum formula over mode pairs survives only as a small-instance
//! oracle in the tests.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, RippleError};
use crate::experiments::slope::{fit_log_linear, SlopeFit};
use crate::noise::{sample_white_noise, NoiseSample};
use crate::spectral::{
    apply_multiplier, compensated_sum, d_freq, dealiased_product, dealiased_square, mollify,
    MaskSpec, MultiplierSpec, SpectralField, TorusGrid,
};

/// v with L v = P xi: multiply by G and zero the k1 = 0 column.
pub fn solve_linear(xi: &NoiseSample) -> SpectralField {
    apply_multiplier(xi.field(), &MultiplierSpec::green_g())
        .expect("G is a real even symbol")
}

/// Spectral sup norm of L v - P xi; ~1e-16 relative for v = solve_linear.
pub fn linear_residual(v: &SpectralField, xi: &NoiseSample) -> f64 {
    let lv = apply_multiplier(v, &MultiplierSpec::symbol_l()).expect("L is real even");
    let pxi = xi.projected();
    lv.sub(&pxi).expect("same grid").spectral_inf_norm()
}

/// d2 R as one multiplier: -sgn(k1) k2 off the Nyquist lines.
fn d2r() -> MultiplierSpec {
    MultiplierSpec::deriv2().then(&MultiplierSpec::hilbert_r())
}

fn d1r() -> MultiplierSpec {
    MultiplierSpec::deriv1().then(&MultiplierSpec::hilbert_r())
}

/// Off-line product F^l = P(v_l d2 R v_l), dealiased.
pub fn offline_product(v_ell: &SpectralField) -> Result<SpectralField> {
    if !v_ell.is_mean_zero_in_x1(1e-9) {
        return Err(RippleError::Invariant(
            "off-line product needs v_l of vanishing average in x1".into(),
        ));
    }
    let dr = apply_multiplier(v_ell, &d2r())?;
    let prod = dealiased_product(v_ell, &dr)?;
    apply_multiplier(&prod, &MultiplierSpec::projection_p())
}

/// The nonlinearity of the w-equation with the sigma-weighted grouping:
/// Psi = sigma v d2Rw + w d2R(sigma v) + w d2Rw
///     + (1/2) d2 R (w + sigma v)^2 - (1/2)(w + sigma v) d1 R (w + sigma v)^2,
/// all products dealiased, R and derivatives spectral. Callers supply v and
/// w of vanishing average in x1.
pub fn nonlinear_rhs_psi(
    v: &SpectralField,
    w: &SpectralField,
    sigma: f64,
) -> Result<SpectralField> {
    v.check_same_grid(w)?;
    let sv = v.scale(sigma);
    let t1 = dealiased_product(&sv, &apply_multiplier(w, &d2r())?)?;
    let t2 = dealiased_product(w, &apply_multiplier(&sv, &d2r())?)?;
    let t3 = dealiased_product(w, &apply_multiplier(w, &d2r())?)?;
    let s = w.add(&sv)?;
    let sq = dealiased_square(&s)?;
    let t4 = apply_multiplier(&sq, &d2r())?.scale(0.5);
    let t5 = dealiased_product(&s, &apply_multiplier(&sq, &d1r())?)?.scale(0.5);
    t1.add(&t2)?.add(&t3)?.add(&t4)?.sub(&t5)
}

/// Nonlinear part of the Euler-Lagrange operator applied to u:
/// P(u d2 R u) + (1/2) d2 R u^2 - (1/2) P(u d1 R u^2).
pub fn euler_lagrange_nonlinearity(u: &SpectralField) -> Result<SpectralField> {
    let p = MultiplierSpec::projection_p();
    let q1 = apply_multiplier(&dealiased_product(u, &apply_multiplier(u, &d2r())?)?, &p)?;
    let sq = dealiased_square(u)?;
    let q2 = apply_multiplier(&sq, &d2r())?.scale(0.5);
    let q3 = apply_multiplier(&dealiased_product(u, &apply_multiplier(&sq, &d1r())?)?, &p)?
        .scale(0.5);
    q1.add(&q2)?.sub(&q3)
}

/// Spectral sup norm of L u + P(u d2Ru) + (1/2) d2Ru^2 - (1/2) P(u d1Ru^2)
/// - sigma P xi_l.
pub fn euler_lagrange_residual(
    u: &SpectralField,
    xi: &NoiseSample,
    sigma: f64,
    ell: f64,
    mask: &MaskSpec,
) -> Result<f64> {
    let lu = apply_multiplier(u, &MultiplierSpec::symbol_l())?;
    let nl = euler_lagrange_nonlinearity(u)?;
    let forcing = mollify(&xi.projected(), ell, mask)?.scale(sigma);
    Ok(lu.add(&nl)?.sub(&forcing)?.spectral_inf_norm())
}

/// Reduced energy of a configuration m (of vanishing average in x1):
/// int (d1 m)^2 + int (|d1|^{-1/2}(d2 m - d1 m^2/2))^2 - 2 sigma int xi m,
/// all by spectral quadrature. |d1|^{-1/2} is 0 on k1 = 0; the integrand
/// there is mean-free in x1 by construction.
pub fn energy(m: &SpectralField, xi: &NoiseSample, sigma: f64) -> Result<f64> {
    if !m.is_mean_zero_in_x1(1e-9) {
        return Err(RippleError::Invariant(
            "energy needs m of vanishing average in x1 (stray-field term)".into(),
        ));
    }
    let d1m = apply_multiplier(m, &MultiplierSpec::deriv1())?;
    let exchange = d1m.spectral_energy();
    let stray_arg = stray_field_argument(m)?;
    let half = apply_multiplier(&stray_arg, &MultiplierSpec::abs_d1_pow(-0.5))?;
    let stray = half.spectral_energy();
    let zeeman = -2.0 * sigma * xi.field().inner(m)?;
    Ok(exchange + stray + zeeman)
}

/// s = d2 m - d1(m^2 / 2), the argument of the stray-field term.
fn stray_field_argument(m: &SpectralField) -> Result<SpectralField> {
    let d2m = apply_multiplier(m, &MultiplierSpec::deriv2())?;
    let sq = dealiased_square(m)?.scale(0.5);
    d2m.sub(&apply_multiplier(&sq, &MultiplierSpec::deriv1())?)
}

/// L2 gradient of the energy within the mean-zero-in-x1 constraint.
#[allow(dead_code)]
pub(crate) fn energy_gradient(
    m: &SpectralField,
    xi: &NoiseSample,
    sigma: f64,
) -> Result<SpectralField> {
    let d1sq = MultiplierSpec::deriv1().then(&MultiplierSpec::deriv1());
    let t1 = apply_multiplier(m, &d1sq)?.scale(-2.0);
    let s = stray_field_argument(m)?;
    let inv_s = apply_multiplier(&s, &MultiplierSpec::abs_d1_pow(-1.0))?;
    let t2 = apply_multiplier(&inv_s, &MultiplierSpec::deriv2())?.scale(-2.0);
    let t3 = dealiased_product(m, &apply_multiplier(&inv_s, &MultiplierSpec::deriv1())?)?
        .scale(2.0);
    let t4 = xi.field().scale(-2.0 * sigma);
    let g = t1.add(&t2)?.add(&t3)?.add(&t4)?;
    apply_multiplier(&g, &MultiplierSpec::projection_p())
}

/// Bundle of one realization: noise, linear solution, its mollification and
/// the off-line product at scale l.
#[derive(Debug, Clone)]
pub struct RippleState {
    pub xi: NoiseSample,
    pub v: SpectralField,
    pub v_ell: SpectralField,
    pub f_ell: SpectralField,
    pub sigma: f64,
    pub ell: f64,
}

impl RippleState {
    pub fn assemble(xi: NoiseSample, sigma: f64, ell: f64, mask: &MaskSpec) -> Result<Self> {
        let v = solve_linear(&xi);
        let res = linear_residual(&v, &xi);
        let scale = xi.field().spectral_inf_norm().max(1.0);
        if res > 1e-12 * scale {
            return Err(RippleError::Invariant(format!(
                "linear solve residual {res:.2e} above tolerance"
            )));
        }
        let v_ell = mollify(&v, ell, mask)?;
        let f_ell = offline_product(&v_ell)?;
        if !f_ell.is_mean_zero_in_x1(1e-9) {
            return Err(RippleError::Invariant("off-line product escaped range(P)".into()));
        }
        Ok(Self {
            xi,
            v,
            v_ell,
            f_ell,
            sigma,
            ell,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceReport {
    pub cutoffs: Vec<f64>,
    /// -sigma^2 sum_{d(k,0) <= K, k1 != 0} G(k), summed over the grid lattice.
    pub analytic: Vec<f64>,
    pub mc_mean: Vec<f64>,
    pub mc_stderr: Vec<f64>,
    pub n_seeds: usize,
    /// Fit of the positive partial sums against c*ln K + b.
    pub log_fit: SlopeFit,
    /// |mc - analytic| <= 3 stderr at every cutoff.
    pub mc_consistent: bool,
}

/// Partial sums of the linearized-energy series over d-metric balls,
/// together with a Monte Carlo evaluation of <E_lin(u)> at the same
/// cutoffs, u being the critical point of the truncated functional.
pub fn linearized_energy_divergence(
    grid: TorusGrid,
    cutoffs: &[f64],
    seeds: &[u64],
    sigma: f64,
) -> Result<DivergenceReport> {
    if cutoffs.len() < 4 {
        return Err(RippleError::Config(format!(
            "divergence study needs at least 4 cutoffs, got {}",
            cutoffs.len()
        )));
    }
    let g = MultiplierSpec::green_g();
    let analytic: Vec<f64> = cutoffs
        .iter()
        .map(|&cap| {
            let s = compensated_sum(grid.indices().filter_map(|idx| {
                let (k1, k2) = grid.freq_of(idx);
                (k1 != 0.0 && d_freq(k1, k2) <= cap).then(|| g.eval_at(grid, idx).re)
            }));
            -sigma * sigma * s
        })
        .collect();

    let mut sums = vec![0.0f64; cutoffs.len()];
    let mut sq_sums = vec![0.0f64; cutoffs.len()];
    for &seed in seeds {
        let xi = sample_white_noise(grid, seed);
        for (ci, &cap) in cutoffs.iter().enumerate() {
            let trunc = MultiplierSpec::new("ball-cutoff", move |ctx| {
                if ctx.k1 != 0.0 && d_freq(ctx.k1, ctx.k2) <= cap {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                }
            });
            let xic = apply_multiplier(xi.field(), &trunc)?;
            let u = apply_multiplier(&xic, &g)?.scale(sigma);
            let e = linearized_energy(&u, &xi, sigma)?;
            sums[ci] += e;
            sq_sums[ci] += e * e;
        }
    }
    let n = seeds.len() as f64;
    let mc_mean: Vec<f64> = sums.iter().map(|s| s / n).collect();
    let mc_stderr: Vec<f64> = sq_sums
        .iter()
        .zip(&mc_mean)
        .map(|(&sq, &m)| ((sq / n - m * m).max(0.0) / (n - 1.0)).sqrt())
        .collect();
    let fit_pts: Vec<(f64, f64)> = cutoffs
        .iter()
        .zip(&analytic)
        .map(|(&k, &a)| (k, -a))
        .collect();
    let log_fit = fit_log_linear(&fit_pts)?;
    let mc_consistent = mc_mean
        .iter()
        .zip(&mc_stderr)
        .zip(&analytic)
        .all(|((&m, &se), &a)| (m - a).abs() <= 3.0 * se);
    Ok(DivergenceReport {
        cutoffs: cutoffs.to_vec(),
        analytic,
        mc_mean,
        mc_stderr,
        n_seeds: seeds.len(),
        log_fit,
        mc_consistent,
    })
}

/// E_lin(u) = int (d1 u)^2 + int (d2 u) |d1|^{-1} (d2 u) - 2 sigma int xi u,
/// by spectral quadrature.
pub fn linearized_energy(u: &SpectralField, xi: &NoiseSample, sigma: f64) -> Result<f64> {
    let d1u = apply_multiplier(u, &MultiplierSpec::deriv1())?;
    let d2u = apply_multiplier(u, &MultiplierSpec::deriv2())?;
    let nonlocal = apply_multiplier(&d2u, &MultiplierSpec::abs_d1_pow(-1.0))?;
    Ok(d1u.spectral_energy() + d2u.inner(&nonlocal)? - 2.0 * sigma * xi.field().inner(u)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{convolution_oracle, TWO_PI};

    fn mode_field(grid: TorusGrid, modes: &[(i64, i64, Complex64)]) -> SpectralField {
        SpectralField::from_modes(grid, modes)
    }

    #[test]
    fn linear_solve_of_single_mode_matches_hand_value() {
        let grid = TorusGrid::new(8, 8).unwrap();
        // unit spike at k = (2 pi, 0): v(k) = G(k) = 2 pi / (2 pi)^3
        let xi = NoiseSample::from_field(mode_field(grid, &[(1, 0, Complex64::ONE)]), 0);
        let v = solve_linear(&xi);
        let expect = 1.0 / (TWO_PI * TWO_PI);
        assert!((v.coeff(1, 0).re - expect).abs() < 1e-15);
        assert!((v.coeff(-1, 0).re - expect).abs() < 1e-15);
    }

    #[test]
    fn linear_solve_annihilates_k1_zero_content() {
        let grid = TorusGrid::new(8, 8).unwrap();
        let xi =
            NoiseSample::from_field(mode_field(grid, &[(0, 2, Complex64::new(0.5, 0.2))]), 0);
        assert_eq!(solve_linear(&xi).spectral_inf_norm(), 0.0);
    }

    #[test]
    fn linear_solve_is_linear_and_has_tiny_residual() {
        let grid = TorusGrid::new(16, 16).unwrap();
        let a = sample_white_noise(grid, 1);
        let b = sample_white_noise(grid, 2);
        let combo = NoiseSample::from_field(
            a.field().scale(2.0).add(&b.field().scale(-0.5)).unwrap(),
            0,
        );
        let lhs = solve_linear(&combo);
        let rhs = solve_linear(&a).scale(2.0).add(&solve_linear(&b).scale(-0.5)).unwrap();
        assert!(lhs.sub(&rhs).unwrap().spectral_inf_norm() < 1e-12);
        let v = solve_linear(&a);
        assert!(linear_residual(&v, &a) <= 1e-12 * a.field().spectral_inf_norm());
    }

    #[test]
    fn offline_product_vanishes_without_x2_content() {
        let grid = TorusGrid::new(8, 8).unwrap();
        let v = mode_field(grid, &[(1, 0, Complex64::new(0.4, 0.1)), (2, 0, Complex64::new(0.2, 0.0))]);
        let f = offline_product(&v).unwrap();
        assert!(f.spectral_inf_norm() < 1e-14);
    }

    #[test]
    fn offline_product_matches_bilinear_oracle_on_two_pairs() {
        let grid = TorusGrid::new(8, 8).unwrap();
        let v = mode_field(
            grid,
            &[(1, 2, Complex64::new(0.4, -0.2)), (2, -1, Complex64::new(-0.3, 0.1))],
        );
        let fast = offline_product(&v).unwrap();
        let slow = apply_multiplier(
            &convolution_oracle(&v, &apply_multiplier(&v, &d2r()).unwrap()).unwrap(),
            &MultiplierSpec::projection_p(),
        )
        .unwrap();
        let err = fast.sub(&slow).unwrap().spectral_inf_norm();
        assert!(err < 1e-12, "offline product oracle mismatch {err}");
    }

    #[test]
    fn offline_product_requires_projected_input() {
        let grid = TorusGrid::new(8, 8).unwrap();
        let v = mode_field(grid, &[(0, 1, Complex64::new(0.3, 0.3))]);
        assert!(offline_product(&v).is_err());
    }

    #[test]
    fn psi_vanishes_at_zero_and_matches_oracle_on_sparse_modes() {
        let grid = TorusGrid::new(8, 8).unwrap();
        let zero = SpectralField::zeros(grid);
        assert_eq!(
            nonlinear_rhs_psi(&zero, &zero, 0.7).unwrap().spectral_inf_norm(),
            0.0
        );

        // sigma = 0, w a single conjugate pair: Psi reduces to
        // w d2Rw + (1/2) d2 R w^2 - (1/2) w d1 R w^2
        let w = mode_field(grid, &[(1, 1, Complex64::new(0.3, -0.4))]);
        let got = nonlinear_rhs_psi(&zero, &w, 0.0).unwrap();
        let d2rw = apply_multiplier(&w, &d2r()).unwrap();
        let t3 = convolution_oracle(&w, &d2rw).unwrap();
        let sq = convolution_oracle(&w, &w).unwrap();
        let t4 = apply_multiplier(&sq, &d2r()).unwrap().scale(0.5);
        let t5 = convolution_oracle(&w, &apply_multiplier(&sq, &d1r()).unwrap())
            .unwrap()
            .scale(0.5);
        let expect = t3.add(&t4).unwrap().sub(&t5).unwrap();
        let err = got.sub(&expect).unwrap().spectral_inf_norm();
        assert!(err < 1e-12, "psi oracle mismatch {err}");
    }

    #[test]
    fn psi_matches_oracle_with_four_active_modes_and_sigma() {
        let grid = TorusGrid::new(8, 8).unwrap();
        let v = mode_field(
            grid,
            &[(1, 0, Complex64::new(0.2, 0.1)), (1, 1, Complex64::new(-0.1, 0.3))],
        );
        let w = mode_field(
            grid,
            &[(2, -1, Complex64::new(0.15, 0.0)), (1, 2, Complex64::new(0.0, -0.2))],
        );
        let sigma = 0.8;
        let got = nonlinear_rhs_psi(&v, &w, sigma).unwrap();
        let sv = v.scale(sigma);
        let t1 = convolution_oracle(&sv, &apply_multiplier(&w, &d2r()).unwrap()).unwrap();
        let t2 = convolution_oracle(&w, &apply_multiplier(&sv, &d2r()).unwrap()).unwrap();
        let t3 = convolution_oracle(&w, &apply_multiplier(&w, &d2r()).unwrap()).unwrap();
        let s = w.add(&sv).unwrap();
        let sq = convolution_oracle(&s, &s).unwrap();
        let t4 = apply_multiplier(&sq, &d2r()).unwrap().scale(0.5);
        let t5 = convolution_oracle(&s, &apply_multiplier(&sq, &d1r()).unwrap())
            .unwrap()
            .scale(0.5);
        let expect = t1
            .add(&t2)
            .unwrap()
            .add(&t3)
            .unwrap()
            .add(&t4)
            .unwrap()
            .sub(&t5)
            .unwrap();
        let err = got.sub(&expect).unwrap().spectral_inf_norm();
        assert!(err < 1e-12, "psi oracle mismatch {err}");
    }

    #[test]
    fn psi_is_lipschitz_in_w_on_a_battery() {
        let grid = TorusGrid::new(16, 16).unwrap();
        let mut worst: f64 = 0.0;
        for seed in 0..6u64 {
            let v = crate::norms::synthetic_field(grid, 0.75, seed);
            let w = crate::norms::synthetic_field(grid, 1.25, 40 + seed);
            let dw = crate::norms::synthetic_field(grid, 1.25, 80 + seed).scale(1e-3);
            let w2 = w.add(&dw).unwrap();
            let a = nonlinear_rhs_psi(&v, &w, 0.5).unwrap();
            let b = nonlinear_rhs_psi(&v, &w2, 0.5).unwrap();
            let num = a.sub(&b).unwrap().sup_norm();
            let den = (v.sup_norm() + w.sup_norm() + w2.sup_norm()) * dw.sup_norm();
            worst = worst.max(num / den);
        }
        // the constant carries the band-limited derivative norms of the grid
        assert!(worst < 200.0, "Lipschitz constant {worst}");
    }

    #[test]
    fn euler_lagrange_residual_zero_at_origin_and_matches_recomputation() {
        let grid = TorusGrid::new(16, 16).unwrap();
        let xi = sample_white_noise(grid, 3);
        let mask = MaskSpec::gaussian();
        let zero = SpectralField::zeros(grid);
        assert_eq!(
            euler_lagrange_residual(&zero, &xi, 0.0, 0.25, &mask).unwrap(),
            0.0
        );

        // u = sigma v_l: L u cancels the forcing exactly, leaving the pure
        // nonlinear terms
        let sigma = 0.3;
        let state = RippleState::assemble(xi.clone(), sigma, 0.25, &mask).unwrap();
        let u = state.v_ell.scale(sigma);
        let res = euler_lagrange_residual(&u, &xi, sigma, 0.25, &mask).unwrap();
        let nl = euler_lagrange_nonlinearity(&u).unwrap().spectral_inf_norm();
        assert!((res - nl).abs() <= 1e-12 * nl.max(1.0));
    }

    #[test]
    fn energy_of_zero_is_zero_and_precondition_enforced() {
        let grid = TorusGrid::new(16, 16).unwrap();
        let xi = sample_white_noise(grid, 4);
        assert_eq!(energy(&SpectralField::zeros(grid), &xi, 1.0).unwrap(), 0.0);
        let bad = mode_field(grid, &[(0, 1, Complex64::new(0.2, 0.1))]);
        assert!(energy(&bad, &xi, 1.0).is_err());
    }

    #[test]
    fn energy_of_single_mode_matches_three_mode_hand_computation() {
        // m = A cos(2 pi x1): exchange 2 pi^2 A^2, stray pi A^4 / 8
        let grid = TorusGrid::new(16, 16).unwrap();
        let xi = sample_white_noise(grid, 5);
        let a = 0.7;
        let m = mode_field(grid, &[(1, 0, Complex64::new(a / 2.0, 0.0))]);
        let e = energy(&m, &xi, 0.0).unwrap();
        let expect = 2.0 * std::f64::consts::PI.powi(2) * a * a
            + std::f64::consts::PI * a.powi(4) / 8.0;
        assert!((e - expect).abs() < 1e-12 * expect, "energy {e} vs {expect}");
    }

    #[test]
    fn energy_decreases_along_a_small_gradient_step() {
        let grid = TorusGrid::new(16, 16).unwrap();
        let xi = sample_white_noise(grid, 6);
        let sigma = 0.5;
        let m = apply_multiplier(
            &crate::norms::synthetic_field(grid, 0.75, 9),
            &MultiplierSpec::projection_p(),
        )
        .unwrap();
        let e0 = energy(&m, &xi, sigma).unwrap();
        let g = energy_gradient(&m, &xi, sigma).unwrap();
        let m1 = m.sub(&g.scale(1e-6)).unwrap();
        let e1 = energy(&m1, &xi, sigma).unwrap();
        assert!(e1 < e0, "descent failed: {e0} -> {e1}");
    }

    #[test]
    fn divergence_partial_sums_match_direct_enumeration() {
        let grid = TorusGrid::new(16, 64).unwrap();
        let cutoffs = [4.0, 8.0, 12.0, 16.0];
        let report =
            linearized_energy_divergence(grid, &cutoffs, &(0..100).collect::<Vec<_>>(), 1.0)
                .unwrap();
        // independent enumeration over an index box
        for (ci, &cap) in cutoffs.iter().enumerate() {
            let mut s = 0.0;
            for j1 in -8i64..8 {
                for j2 in -32i64..32 {
                    let (k1, k2) = (TWO_PI * j1 as f64, TWO_PI * j2 as f64);
                    if k1 != 0.0 && d_freq(k1, k2) <= cap {
                        s += k1.abs() / (k1.abs().powi(3) + k2 * k2);
                    }
                }
            }
            assert!(
                (report.analytic[ci] + s).abs() < 1e-12 * s.max(1.0),
                "partial sum mismatch at K = {cap}"
            );
        }
        // partial sums grow in magnitude
        for w in report.analytic.windows(2) {
            assert!(w[1] < w[0]);
        }
        // Monte Carlo agrees within 3 standard errors at each cutoff
        assert!(report.mc_consistent);
    }

    #[test]
    fn divergence_needs_at_least_four_cutoffs() {
        let grid = TorusGrid::new(8, 8).unwrap();
        assert!(
            linearized_energy_divergence(grid, &[4.0, 8.0, 12.0], &[0, 1], 1.0).is_err()
        );
    }

    #[test]
    fn offline_product_log_derivative_matches_leibniz_multipliers() {
        // l d/dl F^l by central finite difference in log l against the
        // Leibniz formula P(dv_l d2Rv_l + v_l d2R dv_l) with
        // dv_l = delta-phi_l G xi, evaluated by the convolution oracle
        let grid = TorusGrid::new(8, 8).unwrap();
        let mask = MaskSpec::gaussian();
        let ell = 0.35;
        let xi = mode_field(
            grid,
            &[(1, 1, Complex64::new(0.6, -0.2)), (2, -1, Complex64::new(0.1, 0.4))],
        );
        let v = apply_multiplier(&xi, &MultiplierSpec::green_g()).unwrap();
        let p = MultiplierSpec::projection_p();

        let f_at = |l: f64| {
            let v_l = crate::spectral::mollify(&v, l, &mask).unwrap();
            apply_multiplier(
                &convolution_oracle(&v_l, &apply_multiplier(&v_l, &d2r()).unwrap()).unwrap(),
                &p,
            )
            .unwrap()
        };
        // central difference in log l: (F(l e^h) - F(l e^-h)) / 2h
        let h: f64 = 1e-5;
        let up = f_at(ell * h.exp());
        let dn = f_at(ell * (-h).exp());
        let fd = up.sub(&dn).unwrap().scale(1.0 / (2.0 * h));

        let v_l = crate::spectral::mollify(&v, ell, &mask).unwrap();
        let dv_l =
            apply_multiplier(&v, &MultiplierSpec::mollifier_log_deriv(&mask, ell)).unwrap();
        let term1 = convolution_oracle(&dv_l, &apply_multiplier(&v_l, &d2r()).unwrap()).unwrap();
        let term2 = convolution_oracle(&v_l, &apply_multiplier(&dv_l, &d2r()).unwrap()).unwrap();
        let exact = apply_multiplier(&term1.add(&term2).unwrap(), &p).unwrap();
        let rel = fd.sub(&exact).unwrap().spectral_inf_norm() / exact.spectral_inf_norm();
        assert!(rel < 1e-6, "Leibniz consistency {rel}");
    }

    #[test]
    fn offline_product_moments_concentrate_sublinearly_in_p() {
        // the p-th root of the p-th moment of F^l_T grows slower than p
        let grid = TorusGrid::new(64, 64).unwrap();
        let mask = MaskSpec::gaussian();
        let (ell, t) = (1.0 / 16.0, 1e-4);
        let m = 300;
        let mut sums = [0.0f64; 3];
        for seed in 0..m {
            let xi = sample_white_noise(grid, seed);
            let v_ell =
                crate::spectral::mollify(&solve_linear(&xi), ell, &mask).unwrap();
            let f = offline_product(&v_ell).unwrap();
            let ft = crate::spectral::heat_convolve(&f, t).unwrap().to_physical();
            let n = ft.len() as f64;
            for (i, p) in [2i32, 4, 8].iter().enumerate() {
                sums[i] += ft.iter().map(|x| x.abs().powi(*p)).sum::<f64>() / n;
            }
        }
        let roots: Vec<f64> = [2.0f64, 4.0, 8.0]
            .iter()
            .zip(&sums)
            .map(|(&p, &s)| (s / m as f64).powf(1.0 / p))
            .collect();
        // sublinear growth: the per-p normalized roots decrease
        assert!(
            roots[1] / 4.0 < roots[0] / 2.0 && roots[2] / 8.0 < roots[1] / 4.0,
            "moment roots {roots:?} grow at least linearly in p"
        );
    }

    #[test]
    fn annulus_convolution_sums_are_dominated_by_d_inverse() {
        // sum_{k'+k''=k} d^{-4}(k') d^{-1}(k'') <= C d^{-1}(k) on the lattice
        let grid = TorusGrid::new(64, 64).unwrap();
        let mut worst: f64 = 0.0;
        for &(t1, t2) in &[(1i64, 0i64), (2, 3), (5, -7), (0, 9), (11, 2)] {
            let k = (TWO_PI * t1 as f64, TWO_PI * t2 as f64);
            let mut s = 0.0;
            for idx in grid.indices() {
                let (k1, k2) = grid.freq_of(idx);
                if (k1, k2) == (0.0, 0.0) {
                    continue;
                }
                let (r1, r2) = (k.0 - k1, k.1 - k2);
                if (r1, r2) == (0.0, 0.0) {
                    continue;
                }
                s += d_freq(k1, k2).powi(-4) * d_freq(r1, r2).powi(-1);
            }
            worst = worst.max(s * d_freq(k.0, k.1));
        }
        assert!(worst < 1.0, "annulus sum constant {worst}");
    }
}
