//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Exact spectral identities are checked to 1e-12, small instances against
//! brute-force oracles, and the scaling laws as slope fits over the resolved
//! dyadic range. Run with `cargo test --test acceptance -- --nocapture` to
//! see every line.

use num_complex::Complex64;
use ripple::experiments::config::{GridConfig, OutputConfig, Params, SeedRange, StudyConfig, StudyKind};
use ripple::experiments::studies::{commutator_scaling, run_study};
use ripple::fixed_point::phi_map;
use ripple::noise::{noise_moment_suite, sample_white_noise};
use ripple::operators::{nonlinear_rhs_psi, offline_product};
use ripple::spectral::{
    apply_multiplier, convolution_oracle, dealiased_product, heat_convolve, MultiplierSpec,
    SpectralField, TorusGrid,
};

fn verdict(criterion: u32, name: &str, pass: bool, detail: String) -> bool {
    println!(
        "ACCEPTANCE {criterion:2} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn study_config(kind: StudyKind, n1: usize, n2: usize, start: u64, count: u64) -> StudyConfig {
    StudyConfig {
        schema: 1,
        kind,
        grid: GridConfig { n1, n2 },
        seeds: SeedRange { start, count },
        params: Params::default(),
        output: OutputConfig::default(),
    }
}

// -------------------------------------------------------------------------
// 1. exact spectral identities
// -------------------------------------------------------------------------
#[test]
fn criterion_01_spectral_identities() {
    let grid = TorusGrid::new(128, 128).unwrap();
    let xi = sample_white_noise(grid, 7).into_field();

    // transform round trip
    let phys = xi.to_physical();
    let back = SpectralField::from_physical(grid, &phys).unwrap();
    let rt = back.sub(&xi).unwrap().spectral_inf_norm() / xi.spectral_inf_norm();

    // semigroup composition (f_t)_T = f_{t+T}
    let a = heat_convolve(&heat_convolve(&xi, 3e-4).unwrap(), 7e-4).unwrap();
    let b = heat_convolve(&xi, 1e-3).unwrap();
    let semi = a.sub(&b).unwrap().spectral_inf_norm() / b.spectral_inf_norm();

    // R^2 = -Id on range(P); witness band-limited below Nyquist
    let mut f = apply_multiplier(&xi, &MultiplierSpec::projection_p()).unwrap();
    for idx in grid.indices() {
        let (nyq1, _) = grid.on_nyquist(idx);
        if nyq1 {
            f.coeffs_mut()[idx] = Complex64::ZERO;
        }
    }
    let r = MultiplierSpec::hilbert_r();
    let rr = apply_multiplier(&apply_multiplier(&f, &r).unwrap(), &r).unwrap();
    let rsq = rr.add(&f).unwrap().spectral_inf_norm() / f.spectral_inf_norm();

    // L o L^{-1} P = P
    let gl = MultiplierSpec::green_g().then(&MultiplierSpec::symbol_l());
    let proj = apply_multiplier(&xi, &MultiplierSpec::projection_p()).unwrap();
    let li = apply_multiplier(&xi, &gl)
        .unwrap()
        .sub(&proj)
        .unwrap()
        .spectral_inf_norm()
        / proj.spectral_inf_norm();

    let worst = rt.max(semi).max(rsq).max(li);
    let pass = verdict(
        1,
        "spectral identities",
        worst <= 1e-12,
        format!("round-trip {rt:.1e}, semigroup {semi:.1e}, R^2 {rsq:.1e}, L*G {li:.1e} (all <= 1e-12)"),
    );
    assert!(pass);
}

// -------------------------------------------------------------------------
// 2. white-noise moments
// -------------------------------------------------------------------------
#[test]
fn criterion_02_white_noise_moments() {
    let grid = TorusGrid::new(16, 16).unwrap();
    let seeds: Vec<u64> = (0..10_000).collect();
    // second moments <|xi(k)|^2> = <xi(k) xi(-k)> for a probe set
    let probes: Vec<Vec<(i64, i64)>> = vec![
        vec![(1, 0), (-1, 0)],
        vec![(0, 1), (0, -1)],
        vec![(3, 2), (-3, -2)],
        vec![(-5, 7), (5, -7)],
        vec![(7, -6), (-7, 6)],
        // fourth-moment structure
        vec![(1, 2), (1, 2), (-1, -2), (-1, -2)],
        vec![(1, 0), (-1, 0), (2, 2), (-2, -2)],
        vec![(1, 0), (2, 0), (0, 1), (1, 1)],
        vec![(1, 1), (2, -1), (-1, 2), (3, 3)],
    ];
    let report = noise_moment_suite(grid, &seeds, &probes).unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for row in &report.rows[..5] {
        let ok = (row.mean_re - 1.0).abs() <= 0.05 && row.mean_im.abs() <= 0.05;
        pass &= ok;
        details.push(format!("{:.3}", row.mean_re));
    }
    // <|xi|^4> = 2 within 10%, product of second moments = 1 within 10%
    pass &= (report.rows[5].mean_re - 2.0).abs() <= 0.2;
    pass &= (report.rows[6].mean_re - 1.0).abs() <= 0.1;
    // no zero-sum pairing: mean within 4 stderr of zero
    pass &= !report.rows[7].flagged && !report.rows[8].flagged;
    let pass = verdict(
        2,
        "white-noise moments",
        pass,
        format!(
            "<|xi|^2> = [{}], <|xi|^4> = {:.3}, cross = {:.3}, unpaired flags = {}",
            details.join(", "),
            report.rows[5].mean_re,
            report.rows[6].mean_re,
            report.any_flagged()
        ),
    );
    assert!(pass);
}

// -------------------------------------------------------------------------
// 3. noise-regularity scaling, slope -5/12 +- 0.08
// -------------------------------------------------------------------------
#[test]
fn criterion_03_noise_regularity_scaling() {
    let cfg = study_config(StudyKind::NoiseRegularity, 256, 256, 0, 200);
    let outcome = run_study(&cfg, false).unwrap();
    let slope = outcome.fits[0].fit.slope;
    let pass = verdict(
        3,
        "noise-regularity scaling",
        outcome.all_pass(),
        format!("slope {slope:.4} vs -5/12 = -0.4167 +- 0.08 at 256^2, M = 200"),
    );
    assert!(pass);
}

// -------------------------------------------------------------------------
// 4. off-line product scaling and annulus boundedness
// -------------------------------------------------------------------------
#[test]
fn criterion_04_offline_product_scaling() {
    let cfg = study_config(StudyKind::OfflineProduct, 256, 256, 0, 200);
    let outcome = run_study(&cfg, false).unwrap();
    let slope = outcome.fits[0].fit.slope;
    let ratio = outcome
        .checks
        .iter()
        .find(|c| c.name == "annulus_max_over_min")
        .unwrap()
        .value;
    let pass = verdict(
        4,
        "off-line product scaling",
        outcome.all_pass(),
        format!("slope {slope:.4} vs -0.25 +- 0.06; annulus max/min {ratio:.2} < 20"),
    );
    assert!(pass);
}

// -------------------------------------------------------------------------
// 5. Cauchy rates in the convolution scale
// -------------------------------------------------------------------------
#[test]
fn criterion_05_cauchy_rates() {
    let cfg = study_config(StudyKind::CauchyRate, 256, 256, 0, 16);
    let outcome = run_study(&cfg, false).unwrap();
    let xi_slope = outcome.fits[0].fit.slope;
    let f_slope = outcome.fits[1].fit.slope;
    let pass = verdict(
        5,
        "Cauchy rates",
        outcome.all_pass(),
        format!(
            "nonincreasing proxies; slopes xi {xi_slope:.3}, F {f_slope:.3} >= eps/2 - 0.05 = 0.00"
        ),
    );
    assert!(pass);
}

// -------------------------------------------------------------------------
// 6. brute-force oracle equivalence on sparse instances
// -------------------------------------------------------------------------
#[test]
fn criterion_06_oracle_equivalence() {
    let grid = TorusGrid::new(8, 8).unwrap();
    let f = SpectralField::from_modes(
        grid,
        &[(1, 2, Complex64::new(0.4, -0.3)), (2, -1, Complex64::new(-0.2, 0.1))],
    );
    let g = SpectralField::from_modes(
        grid,
        &[(2, 1, Complex64::new(0.3, 0.0)), (1, 0, Complex64::new(0.0, 0.2))],
    );
    let rel = |a: &SpectralField, b: &SpectralField| -> f64 {
        a.sub(b).unwrap().spectral_inf_norm() / b.spectral_inf_norm().max(1e-300)
    };

    // dealiased product
    let e1 = rel(
        &dealiased_product(&f, &g).unwrap(),
        &convolution_oracle(&f, &g).unwrap(),
    );

    // offline product P(v d2 R v)
    let d2r = MultiplierSpec::deriv2().then(&MultiplierSpec::hilbert_r());
    let p = MultiplierSpec::projection_p();
    let e2 = rel(
        &offline_product(&f).unwrap(),
        &apply_multiplier(
            &convolution_oracle(&f, &apply_multiplier(&f, &d2r).unwrap()).unwrap(),
            &p,
        )
        .unwrap(),
    );

    // nonlinear rhs Psi with sigma
    let sigma = 0.8;
    let d1r = MultiplierSpec::deriv1().then(&MultiplierSpec::hilbert_r());
    let psi_oracle = {
        let sv = f.scale(sigma);
        let t1 = convolution_oracle(&sv, &apply_multiplier(&g, &d2r).unwrap()).unwrap();
        let t2 = convolution_oracle(&g, &apply_multiplier(&sv, &d2r).unwrap()).unwrap();
        let t3 = convolution_oracle(&g, &apply_multiplier(&g, &d2r).unwrap()).unwrap();
        let s = g.add(&sv).unwrap();
        let sq = convolution_oracle(&s, &s).unwrap();
        let t4 = apply_multiplier(&sq, &d2r).unwrap().scale(0.5);
        let t5 = convolution_oracle(&s, &apply_multiplier(&sq, &d1r).unwrap())
            .unwrap()
            .scale(0.5);
        t1.add(&t2).unwrap().add(&t3).unwrap().add(&t4).unwrap().sub(&t5).unwrap()
    };
    let e3 = rel(&nonlinear_rhs_psi(&f, &g, sigma).unwrap(), &psi_oracle);

    // phi map
    let h = SpectralField::from_modes(grid, &[(1, 1, Complex64::new(0.15, 0.05))]);
    let phi_oracle = {
        let psi = psi_oracle.clone();
        let rhs = h.scale(sigma * sigma).add(&psi).unwrap();
        apply_multiplier(&rhs, &MultiplierSpec::green_g()).unwrap().scale(-1.0)
    };
    let e4 = rel(&phi_map(&h, &f, &g, sigma).unwrap(), &phi_oracle);

    let worst = e1.max(e2).max(e3).max(e4);
    let pass = verdict(
        6,
        "oracle equivalence",
        worst <= 1e-12,
        format!("product {e1:.1e}, offline {e2:.1e}, Psi {e3:.1e}, Phi {e4:.1e} (<= 1e-12)"),
    );
    assert!(pass);
}

// -------------------------------------------------------------------------
// 7. fixed point at 128^2, l = 1/16
// -------------------------------------------------------------------------
#[test]
fn criterion_07_fixed_point() {
    let cfg = study_config(StudyKind::FixedPointSweep, 128, 128, 0, 1);
    let outcome = run_study(&cfg, false).unwrap();
    let slope = outcome.fits[0].fit.slope;
    let el = outcome
        .checks
        .iter()
        .find(|c| c.name == "el_residual_max")
        .unwrap()
        .value;
    let pass = verdict(
        7,
        "fixed point",
        outcome.all_pass(),
        format!(
            "converged with contraction < 1, EL residual {el:.2e} <= 1e-9, \
             [u - sigma v_l] slope {slope:.3} vs 2.0 +- 0.1"
        ),
    );
    assert!(pass);
}

// -------------------------------------------------------------------------
// 8. mollifier independence
// -------------------------------------------------------------------------
#[test]
fn criterion_08_mollifier_independence() {
    let cfg = study_config(StudyKind::MollifierIndependence, 128, 128, 0, 1);
    let outcome = run_study(&cfg, false).unwrap();
    let decreasing = outcome.checks.iter().find(|c| c.name == "ratio_decreasing_in_ell").unwrap();
    let final_ratio = outcome.checks.iter().find(|c| c.name == "final_ratio").unwrap();
    let pass = verdict(
        8,
        "mollifier independence",
        outcome.all_pass(),
        format!(
            "gaussian vs quartic: ratios decreasing = {}, final ratio {:.3e} (required < 1e-2)",
            decreasing.pass, final_ratio.value
        ),
    );
    assert!(pass);
}

// -------------------------------------------------------------------------
// 9. commutator scaling for synthetic fields
// -------------------------------------------------------------------------
#[test]
fn criterion_09_commutator_scaling() {
    let grid = TorusGrid::new(512, 2048).unwrap();
    let beta = -0.8;
    let plain = commutator_scaling(grid, 0.7, beta, false, (3, 7), (7, 6), 4, 5, false).unwrap();
    let corrected =
        commutator_scaling(grid, 1.2, beta, true, (3, 7), (7, 6), 4, 5, false).unwrap();
    let e1 = (plain.fit.slope - (0.7 + beta)).abs();
    let e2 = (corrected.fit.slope - (1.2 + beta)).abs();
    let pass = verdict(
        9,
        "commutator scaling",
        e1 <= 0.1 && e2 <= 0.1,
        format!(
            "alpha 0.7: slope {:.3} vs {:.1}; alpha 1.2 (d1-corrected): slope {:.3} vs {:.1} (+- 0.1)",
            plain.fit.slope,
            0.7 + beta,
            corrected.fit.slope,
            1.2 + beta
        ),
    );
    assert!(pass);
}

// -------------------------------------------------------------------------
// 10. Hoelder machinery: oracle agreement and Schauder spread
// -------------------------------------------------------------------------
#[test]
fn criterion_10_holder_machinery() {
    let cfg = study_config(StudyKind::NormBattery, 128, 128, 0, 1);
    let outcome = run_study(&cfg, false).unwrap();
    let oracle = outcome
        .checks
        .iter()
        .find(|c| c.name == "holder_oracle_max_abs_diff")
        .unwrap();
    let spreads: Vec<f64> = outcome
        .checks
        .iter()
        .filter(|c| c.name.starts_with("schauder_spread"))
        .map(|c| c.value)
        .collect();
    let pass = verdict(
        10,
        "Hoelder machinery",
        outcome.all_pass(),
        format!(
            "oracle max diff {:.1e} (exact), Schauder max/min {:?} < 50",
            oracle.value, spreads
        ),
    );
    assert!(pass);
}

// -------------------------------------------------------------------------
// 11. energy divergence
// -------------------------------------------------------------------------
#[test]
fn criterion_11_energy_divergence() {
    let cfg = study_config(StudyKind::EnergyDivergence, 64, 512, 0, 100);
    let outcome = run_study(&cfg, false).unwrap();
    let r2 = outcome
        .checks
        .iter()
        .find(|c| c.name == "log_fit_r_squared")
        .unwrap()
        .value;
    let mc = outcome
        .checks
        .iter()
        .find(|c| c.name == "mc_within_3_stderr")
        .unwrap()
        .pass;
    let pass = verdict(
        11,
        "energy divergence",
        outcome.all_pass(),
        format!("log-fit R^2 = {r2:.4} (required > 0.99), MC within 3 stderr = {mc}"),
    );
    assert!(pass);
}

// -------------------------------------------------------------------------
// 12. determinism of study re-runs
// -------------------------------------------------------------------------
#[test]
fn criterion_12_determinism() {
    let mut cfg = study_config(StudyKind::CauchyRate, 64, 64, 0, 6);
    cfg.params.ell_exponents = Some((2, 6));
    let dir = tempfile::tempdir().unwrap();
    let d1 = dir.path().join("run1");
    let d2 = dir.path().join("run2");
    let o1 = run_study(&cfg, true).unwrap();
    o1.write(&d1).unwrap();
    let o2 = run_study(&cfg, true).unwrap();
    o2.write(&d2).unwrap();
    // parallel run must agree with the strict one bit-for-bit as well
    let o3 = run_study(&cfg, false).unwrap();
    let d3 = dir.path().join("run3");
    o3.write(&d3).unwrap();
    let mut identical = true;
    for name in ["cauchy-rate_rows.csv", "cauchy-rate_checks.ndjson", "cauchy-rate_fits.ndjson"] {
        let a = std::fs::read(d1.join(name)).unwrap();
        let b = std::fs::read(d2.join(name)).unwrap();
        let c = std::fs::read(d3.join(name)).unwrap();
        identical &= a == b && b == c;
    }
    let pass = verdict(
        12,
        "determinism",
        identical,
        "strict re-run and parallel run reproduce outputs bit-for-bit".into(),
    );
    assert!(pass);
}
