//! Versioned TOML study configuration. Unknown keys are rejected so a typo
//! cannot silently corrupt a study.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RippleError};
use crate::spectral::TorusGrid;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    NoiseRegularity,
    OfflineProduct,
    CauchyRate,
    FixedPointSweep,
    MollifierIndependence,
    EnergyDivergence,
    NormBattery,
}

impl std::fmt::Display for StudyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StudyKind::NoiseRegularity => "noise-regularity",
            StudyKind::OfflineProduct => "offline-product",
            StudyKind::CauchyRate => "cauchy-rate",
            StudyKind::FixedPointSweep => "fixed-point-sweep",
            StudyKind::MollifierIndependence => "mollifier-independence",
            StudyKind::EnergyDivergence => "energy-divergence",
            StudyKind::NormBattery => "norm-battery",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n1: usize,
    pub n2: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRange {
    pub start: u64,
    pub count: u64,
}

impl SeedRange {
    pub fn seeds(&self) -> Vec<u64> {
        (self.start..self.start + self.count).collect()
    }

    pub fn label(&self) -> String {
        format!("{}..{}", self.start, self.start + self.count)
    }
}

/// Study-specific knobs; every study documents which ones it reads. All
/// scale grids are dyadic by construction (exponent ranges rather than raw
/// values).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    /// Mollification scale as 2^-ell_exponent.
    pub ell_exponent: Option<i32>,
    /// Dyadic mollification scales 2^-n for n in [lo, hi].
    pub ell_exponents: Option<(i32, i32)>,
    /// Dyadic semigroup times 2^-n for n in [lo, hi] used by slope fits.
    pub t_exponents: Option<(i32, i32)>,
    /// Stride (in dyadic steps) of the proxy-norm T grid.
    pub t_stride: Option<u32>,
    /// Base noise amplitude; fixed-point studies scale it dyadically.
    pub sigma: Option<f64>,
    /// sigma_j = sigma_base * 2^-j for j in [lo, hi]; sigma_base is the
    /// measured threshold when `sigma` is absent.
    pub sigma_exponents: Option<(i32, i32)>,
    pub epsilon: Option<f64>,
    pub mask: Option<String>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// d-ball cutoffs for the energy-divergence study (powers of two).
    pub cutoffs: Option<Vec<f64>>,
    /// Acceptance window around the target slope.
    pub slope_tolerance: Option<f64>,
    /// Max/min bound for annulus and Schauder batteries.
    pub ratio_bound: Option<f64>,
    /// Relative tolerance on the final mollifier-independence ratio.
    pub final_ratio_bound: Option<f64>,
    pub battery_size: Option<usize>,
    /// Sampled pairs for positive Hoelder estimates on large grids.
    pub pairs: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub write_snapshots: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub schema: u32,
    pub kind: StudyKind,
    pub grid: GridConfig,
    pub seeds: SeedRange,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputConfig,
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: StudyConfig = toml::from_str(text)
            .map_err(|e| RippleError::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(RippleError::Config(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        let grid = self.torus_grid()?;
        for (name, n) in [("n1", grid.n1()), ("n2", grid.n2())] {
            if !n.is_power_of_two() {
                return Err(RippleError::Config(format!(
                    "{name} = {n} is not dyadic"
                )));
            }
        }
        if self.seeds.count == 0 {
            return Err(RippleError::Config("seed range is empty".into()));
        }
        if let Some(eps) = self.params.epsilon {
            if !(eps > 0.0 && eps < 0.25) {
                return Err(RippleError::Config(format!(
                    "epsilon must lie in (0, 1/4), got {eps}"
                )));
            }
        }
        if let Some(cutoffs) = &self.params.cutoffs {
            for &c in cutoffs {
                if c <= 0.0 || c.log2().fract().abs() > 1e-12 {
                    return Err(RippleError::Config(format!(
                        "cutoff {c} is not a positive power of two"
                    )));
                }
            }
        }
        for (lo, hi) in [self.params.ell_exponents, self.params.t_exponents]
            .into_iter()
            .flatten()
        {
            if lo > hi {
                return Err(RippleError::Config(format!(
                    "empty dyadic exponent range [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn torus_grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.grid.n1, self.grid.n2)
    }

    pub fn mask(&self) -> Result<crate::spectral::MaskSpec> {
        match self.params.mask.as_deref() {
            None | Some("gaussian") => Ok(crate::spectral::MaskSpec::gaussian()),
            Some("quartic") => Ok(crate::spectral::MaskSpec::quartic()),
            Some(other) => Err(RippleError::Config(format!("unknown mask '{other}'"))),
        }
    }
}

/// Dyadic scales 2^-n for n in lo..=hi.
pub fn dyadic(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|n| 2.0f64.powi(-n)).collect()
}
