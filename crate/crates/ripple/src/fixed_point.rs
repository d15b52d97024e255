//! Picard iteration for the remainder equation w = Phi(F, v, w) and the
//! assembly u^l = sigma v_l + w.
//!
//! Phi(F, v, w) = -L^{-1} P (sigma^2 F + Psi(v, w)). Because L Phi(w) =
//! -P(sigma^2 F + Psi(w)) holds exactly at the discrete level, the
//! Euler-Lagrange residual of the assembled u equals ||L(w - Phi(w))||, so
//! the iteration tracks both the plain coefficient change and its
//! L-amplified counterpart and stops only when the latter clears the
//! residual budget.

use serde::Serialize;

use crate::error::{Result, RippleError};
use crate::noise::NoiseSample;
use crate::norms::{default_t_grid, holder_neg_semigroup, holder_pos, PairPlan};
use crate::operators::{nonlinear_rhs_psi, RippleState};
use crate::spectral::{apply_multiplier, MaskSpec, MultiplierSpec, SpectralField};

#[derive(Debug, Clone)]
pub struct FixedPointConfig {
    pub sigma: f64,
    pub ell: f64,
    /// Spectral sup-norm tolerance on the iterate change.
    pub tol: f64,
    pub max_iter: usize,
    /// Exponent offset for the reported Hoelder proxies; in (0, 1/8).
    pub epsilon: f64,
    /// Skip the (comparatively expensive) proxy norms in sweeps.
    pub compute_proxies: bool,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            sigma: 1e-3,
            ell: 1.0 / 16.0,
            tol: 1e-10,
            max_iter: 200,
            epsilon: 0.05,
            compute_proxies: true,
        }
    }
}

impl FixedPointConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(RippleError::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(RippleError::Config("max_iter must be >= 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.125) {
            return Err(RippleError::Config(format!(
                "epsilon must lie in (0, 1/8), got {}",
                self.epsilon
            )));
        }
        if self.sigma.is_nan() || self.sigma < 0.0 {
            return Err(RippleError::Config(format!(
                "sigma must be nonnegative, got {}",
                self.sigma
            )));
        }
        if !(self.ell > 0.0 && self.ell <= 1.0) {
            return Err(RippleError::Config(format!(
                "ell must lie in (0, 1], got {}",
                self.ell
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderProxies {
    /// [w] at exponent 5/4 - 2 eps (direct positive estimator).
    pub w_proxy: f64,
    /// [v] at exponent 3/4 - eps.
    pub v_proxy: f64,
    /// [F] at exponent -3/4 - eps (semigroup proxy).
    pub f_proxy: f64,
}

#[derive(Debug, Clone)]
pub struct FixedPointReport {
    pub w: SpectralField,
    pub u: SpectralField,
    pub iterations: usize,
    /// Spectral sup norm of the iterate change, per iteration.
    pub residual_history: Vec<f64>,
    /// Ratios of consecutive changes.
    pub contraction_estimates: Vec<f64>,
    pub converged: bool,
    /// ||w - Phi(w)|| of the final iterate.
    pub fp_residual: f64,
    /// ||L(w - Phi(w))||, which equals the Euler-Lagrange residual of u.
    pub el_residual: f64,
    pub holder_proxies: Option<HolderProxies>,
}

/// One Picard map application: -L^{-1} P (sigma^2 F + Psi(v, w)).
pub fn phi_map(
    f: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    sigma: f64,
) -> Result<SpectralField> {
    let psi = nonlinear_rhs_psi(v, w, sigma)?;
    let rhs = f.scale(sigma * sigma).add(&psi)?;
    Ok(apply_multiplier(&rhs, &MultiplierSpec::green_g())?.scale(-1.0))
}

/// Picard iteration from w0 = 0.
pub fn solve_fixed_point(
    f: &SpectralField,
    v: &SpectralField,
    cfg: &FixedPointConfig,
) -> Result<FixedPointReport> {
    solve_fixed_point_from(f, v, cfg, SpectralField::zeros(f.grid()))
}

/// Picard iteration from an arbitrary start, for uniqueness checks.
pub fn solve_fixed_point_from(
    f: &SpectralField,
    v: &SpectralField,
    cfg: &FixedPointConfig,
    w0: SpectralField,
) -> Result<FixedPointReport> {
    cfg.validate()?;
    f.check_same_grid(v)?;
    f.check_same_grid(&w0)?;
    let l_symbol = MultiplierSpec::symbol_l();
    let mut w = w0;
    let mut history: Vec<f64> = Vec::new();
    let mut growth_streak = 0usize;
    let mut converged = false;
    let mut fp_residual = f64::NAN;
    let mut el_residual = f64::NAN;

    for _ in 0..cfg.max_iter {
        let next = phi_map(f, v, &w, cfg.sigma)?;
        let delta = next.sub(&w)?;
        let change = delta.spectral_inf_norm();
        let change_l = apply_multiplier(&delta, &l_symbol)?.spectral_inf_norm();
        if !change.is_finite() {
            return Err(RippleError::NonContraction {
                iterations: history.len() + 1,
                history,
            });
        }
        if let Some(&prev) = history.last() {
            growth_streak = if change > prev { growth_streak + 1 } else { 0 };
            if growth_streak >= 5 {
                history.push(change);
                return Err(RippleError::NonContraction {
                    iterations: history.len(),
                    history,
                });
            }
        }
        history.push(change);
        // ||L(w_n - Phi(w_n))|| is exactly the Euler-Lagrange residual of
        // the iterate we are about to adopt... of the *previous* one; after
        // the step below, the residual of the adopted iterate is contracted
        // once more. Requiring half the 10*tol budget here leaves room for
        // a contraction factor up to 1.
        fp_residual = change;
        el_residual = change_l;
        w = next;
        if change < cfg.tol && change_l < 5.0 * cfg.tol {
            converged = true;
            break;
        }
    }
    let contraction_estimates: Vec<f64> = history
        .windows(2)
        .map(|p| if p[0] == 0.0 { 0.0 } else { p[1] / p[0] })
        .collect();
    let u = v.scale(cfg.sigma).add(&w)?;
    let holder_proxies = if cfg.compute_proxies {
        let plan = PairPlan::auto(f.grid());
        let t_grid = default_t_grid(f.grid());
        Some(HolderProxies {
            w_proxy: holder_pos(&w, 1.25 - 2.0 * cfg.epsilon, plan)?.value,
            v_proxy: holder_pos(v, 0.75 - cfg.epsilon, plan)?.value,
            f_proxy: holder_neg_semigroup(f, -0.75 - cfg.epsilon, &t_grid)?.value,
        })
    } else {
        None
    };
    Ok(FixedPointReport {
        w,
        u,
        iterations: history.len(),
        residual_history: history,
        contraction_estimates,
        converged,
        fp_residual,
        el_residual,
        holder_proxies,
    })
}

/// NDJSON row for a fixed-point run; field contents are referenced by the
/// content hash of their snapshots.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointRecord {
    pub sigma: f64,
    pub ell: f64,
    pub tol: f64,
    pub iterations: usize,
    pub converged: bool,
    pub fp_residual: f64,
    pub el_residual: f64,
    pub contraction_last: Option<f64>,
    pub holder_proxies: Option<HolderProxies>,
    pub w_hash: String,
    pub u_hash: String,
}

impl FixedPointReport {
    pub fn record(&self, cfg: &FixedPointConfig) -> FixedPointRecord {
        FixedPointRecord {
            sigma: cfg.sigma,
            ell: cfg.ell,
            tol: cfg.tol,
            iterations: self.iterations,
            converged: self.converged,
            fp_residual: self.fp_residual,
            el_residual: self.el_residual,
            contraction_last: self.contraction_estimates.last().copied(),
            holder_proxies: self.holder_proxies.clone(),
            w_hash: crate::spectral::content_hash(&crate::spectral::snapshot::encode(&self.w)),
            u_hash: crate::spectral::content_hash(&crate::spectral::snapshot::encode(&self.u)),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    /// Largest sigma observed to converge within max_iter.
    pub sigma0: f64,
    /// Smallest sigma observed to diverge; sigma0 and this bracket the
    /// threshold, their gap is the bisection error bar.
    pub sigma_diverged: f64,
    pub solves: usize,
    /// Even the smallest probed sigma diverged.
    pub anomalous: bool,
}

/// Bisection for the largest sigma at which the Picard iteration still
/// contracts on this realization. Deterministic given (xi, ell, cfg).
pub fn sigma_threshold_search(
    xi: &NoiseSample,
    ell: f64,
    cfg: &FixedPointConfig,
    mask: &MaskSpec,
) -> Result<ThresholdReport> {
    let state = RippleState::assemble(xi.clone(), 0.0, ell, mask)?;
    let mut solves = 0usize;
    let try_sigma = |sigma: f64, solves: &mut usize| -> bool {
        *solves += 1;
        let cfg = FixedPointConfig {
            sigma,
            ell,
            compute_proxies: false,
            ..cfg.clone()
        };
        matches!(
            solve_fixed_point(&state.f_ell, &state.v_ell, &cfg),
            Ok(rep) if rep.converged
        )
    };

    let mut lo = 1e-6_f64;
    if !try_sigma(lo, &mut solves) {
        // scan further down before declaring the realization anomalous
        let mut s = lo / 4.0;
        let mut found = false;
        while s > 1e-12 {
            if try_sigma(s, &mut solves) {
                lo = s;
                found = true;
                break;
            }
            s /= 4.0;
        }
        if !found {
            return Ok(ThresholdReport {
                sigma0: 0.0,
                sigma_diverged: lo,
                solves,
                anomalous: true,
            });
        }
    }
    let mut hi = lo * 2.0;
    while try_sigma(hi, &mut solves) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            break;
        }
    }
    for _ in 0..20 {
        if (hi - lo) <= 1e-3 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if try_sigma(mid, &mut solves) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdReport {
        sigma0: lo,
        sigma_diverged: hi,
        solves,
        anomalous: false,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    /// Sup-norm and positive-proxy distances between the two solutions.
    pub w_sup_dist: f64,
    pub w_proxy_dist: f64,
    pub f_proxy_dist: f64,
    pub v_proxy_dist: f64,
}

/// Solves for both data pairs and reports the Lipschitz-style distances
/// [w - w'] vs [F - F'] + [v - v']; feeds the mollifier-independence and
/// Cauchy-in-l studies.
pub fn continuity_in_data(
    f: &SpectralField,
    f_prime: &SpectralField,
    v: &SpectralField,
    v_prime: &SpectralField,
    cfg: &FixedPointConfig,
) -> Result<ContinuityReport> {
    let rep = solve_fixed_point(f, v, cfg)?;
    let rep_p = solve_fixed_point(f_prime, v_prime, cfg)?;
    if !(rep.converged && rep_p.converged) {
        return Err(RippleError::NonContraction {
            iterations: rep.iterations.max(rep_p.iterations),
            history: rep.residual_history,
        });
    }
    let dw = rep.w.sub(&rep_p.w)?;
    let plan = PairPlan::auto(f.grid());
    let t_grid = default_t_grid(f.grid());
    Ok(ContinuityReport {
        w_sup_dist: dw.sup_norm(),
        w_proxy_dist: holder_pos(&dw, 1.25 - 2.0 * cfg.epsilon, plan)?.value,
        f_proxy_dist: holder_neg_semigroup(&f.sub(f_prime)?, -0.75 - cfg.epsilon, &t_grid)?
            .value,
        v_proxy_dist: holder_pos(&v.sub(v_prime)?, 0.75 - cfg.epsilon, plan)?.value,
    })
}
