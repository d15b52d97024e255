//! Fourier multipliers: scalar symbols on the frequency lattice.
//!
//! Every shipped symbol satisfies symbol(-k) = conj(symbol(k)) so that real
//! fields stay real. Symbols that are odd in one frequency component (d1, d2,
//! R and their composites) have to vanish on the corresponding Nyquist line,
//! where k and -k alias to the same lattice mode.

use std::sync::Arc;

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::{a_symbol, TorusGrid};
use crate::error::{Result, RippleError};

/// Context handed to a symbol: frequency and Nyquist flags of the mode.
#[derive(Debug, Clone, Copy)]
pub struct ModeCtx {
    pub k1: f64,
    pub k2: f64,
    /// Mode sits on the j1 = -n1/2 column.
    pub nyq1: bool,
    /// Mode sits on the j2 = -n2/2 row.
    pub nyq2: bool,
}

type SymbolFn = Arc<dyn Fn(ModeCtx) -> Complex64 + Send + Sync>;

/// A named scalar function on the frequency lattice.
#[derive(Clone)]
pub struct MultiplierSpec {
    name: String,
    symbol: SymbolFn,
}

impl std::fmt::Debug for MultiplierSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MultiplierSpec({})", self.name)
    }
}

impl MultiplierSpec {
    pub fn new<F>(name: impl Into<String>, symbol: F) -> Self
    where
        F: Fn(ModeCtx) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            symbol: Arc::new(symbol),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, ctx: ModeCtx) -> Complex64 {
        (self.symbol)(ctx)
    }

    pub fn eval_at(&self, grid: TorusGrid, idx: usize) -> Complex64 {
        let (k1, k2) = grid.freq_of(idx);
        let (nyq1, nyq2) = grid.on_nyquist(idx);
        self.eval(ModeCtx { k1, k2, nyq1, nyq2 })
    }

    /// Pointwise product of two symbols (composition of the operators).
    pub fn then(&self, other: &MultiplierSpec) -> MultiplierSpec {
        let a = self.symbol.clone();
        let b = other.symbol.clone();
        MultiplierSpec {
            name: format!("{}*{}", other.name, self.name),
            symbol: Arc::new(move |ctx| a(ctx) * b(ctx)),
        }
    }

    /// Projection P: zeroes every k1 = 0 mode.
    pub fn projection_p() -> Self {
        Self::new("P", |ctx| {
            if ctx.k1 == 0.0 {
                Complex64::ZERO
            } else {
                Complex64::ONE
            }
        })
    }

    /// Hilbert transform in x1: i sgn(k1) off the k1 = 0 column.
    pub fn hilbert_r() -> Self {
        Self::new("R", |ctx| {
            if ctx.k1 == 0.0 || ctx.nyq1 {
                Complex64::ZERO
            } else {
                Complex64::new(0.0, ctx.k1.signum())
            }
        })
    }

    /// d/dx1, Nyquist column silenced.
    pub fn deriv1() -> Self {
        Self::new("d1", |ctx| {
            if ctx.nyq1 {
                Complex64::ZERO
            } else {
                Complex64::new(0.0, ctx.k1)
            }
        })
    }

    /// d/dx2, Nyquist row silenced.
    pub fn deriv2() -> Self {
        Self::new("d2", |ctx| {
            if ctx.nyq2 {
                Complex64::ZERO
            } else {
                Complex64::new(0.0, ctx.k2)
            }
        })
    }

    /// |d1|^s; 0 on the k1 = 0 column (always composed with P).
    pub fn abs_d1_pow(s: f64) -> Self {
        Self::new(format!("|d1|^{s}"), move |ctx| {
            if ctx.k1 == 0.0 {
                Complex64::ZERO
            } else {
                Complex64::new(ctx.k1.abs().powf(s), 0.0)
            }
        })
    }

    /// Symbol of L = -d1^2 - |d1|^{-1} d2^2 (0 on k1 = 0).
    pub fn symbol_l() -> Self {
        Self::new("L", |ctx| {
            if ctx.k1 == 0.0 {
                Complex64::ZERO
            } else {
                Complex64::new(super::grid::l_symbol(ctx.k1, ctx.k2), 0.0)
            }
        })
    }

    /// G(k) = |k1| / (|k1|^3 + k2^2), the symbol of L^{-1} P.
    pub fn green_g() -> Self {
        Self::new("G", |ctx| {
            if ctx.k1 == 0.0 {
                Complex64::ZERO
            } else {
                Complex64::new(ctx.k1.abs() / a_symbol(ctx.k1, ctx.k2), 0.0)
            }
        })
    }

    /// G~(k) = -sgn(k1) k2 G(k), the symbol of d2 R L^{-1} P.
    /// Odd in both components, hence silenced on both Nyquist lines.
    pub fn green_g_tilde() -> Self {
        Self::new("Gt", |ctx| {
            if ctx.k1 == 0.0 || ctx.nyq1 || ctx.nyq2 {
                Complex64::ZERO
            } else {
                let g = ctx.k1.abs() / a_symbol(ctx.k1, ctx.k2);
                Complex64::new(-ctx.k1.signum() * ctx.k2 * g, 0.0)
            }
        })
    }

    /// Heat semigroup psi_T with symbol exp(-T(|k1|^3 + k2^2)).
    pub fn heat(t: f64) -> Self {
        Self::new(format!("psi_T(T={t})"), move |ctx| {
            Complex64::new((-t * a_symbol(ctx.k1, ctx.k2)).exp(), 0.0)
        })
    }

    /// Mollifier phi_ell: mask(ell*k1, ell^{3/2}*k2).
    pub fn mollifier(mask: &MaskSpec, ell: f64) -> Self {
        let mask = mask.clone();
        Self::new(format!("phi_ell({},l={ell})", mask.name()), move |ctx| {
            Complex64::new(mask.hat(ell * ctx.k1, ell.powf(1.5) * ctx.k2), 0.0)
        })
    }

    /// delta-phi_ell = ell d/d(ell) of the mollifier symbol:
    /// ell*k1*d1(mask) + (3/2)*ell^{3/2}*k2*d2(mask), evaluated at the
    /// rescaled frequency. Preserves the convolution structure.
    pub fn mollifier_log_deriv(mask: &MaskSpec, ell: f64) -> Self {
        let mask = mask.clone();
        Self::new(format!("dphi_ell({},l={ell})", mask.name()), move |ctx| {
            let u = ell * ctx.k1;
            let v = ell.powf(1.5) * ctx.k2;
            let (d1, d2) = mask.hat_grad(u, v);
            Complex64::new(u * d1 + 1.5 * v * d2, 0.0)
        })
    }

    /// Symbol of the x1 commutator with the heat family,
    /// [x1, psi_T *] = i d/dk1 [psi_T] = -3 i T k1 |k1| psi_T(k).
    pub fn x1_commutator_heat(t: f64) -> Self {
        Self::new(format!("x1comm_psi(T={t})"), move |ctx| {
            if ctx.nyq1 {
                Complex64::ZERO
            } else {
                let psi = (-t * a_symbol(ctx.k1, ctx.k2)).exp();
                Complex64::new(0.0, -3.0 * t * ctx.k1 * ctx.k1.abs() * psi)
            }
        })
    }

    /// Symbol of the x1 commutator with the mollifier family,
    /// [x1, phi_ell *] = i ell d1(mask)(ell k1, ell^{3/2} k2).
    pub fn x1_commutator_mask(mask: &MaskSpec, ell: f64) -> Self {
        let mask = mask.clone();
        Self::new(format!("x1comm_phi({},l={ell})", mask.name()), move |ctx| {
            if ctx.nyq1 {
                return Complex64::ZERO;
            }
            let (d1, _) = mask.hat_grad(ell * ctx.k1, ell.powf(1.5) * ctx.k2);
            Complex64::new(0.0, ell * d1)
        })
    }
}

/// Applies a multiplier after verifying the symbol preserves Hermitian
/// symmetry, i.e. symbol(-k) = conj(symbol(k)) on every paired mode.
pub fn apply_multiplier(f: &SpectralField, m: &MultiplierSpec) -> Result<SpectralField> {
    let grid = f.grid();
    let symbol: Vec<Complex64> = grid.indices().map(|idx| m.eval_at(grid, idx)).collect();
    for idx in grid.indices() {
        let conj = grid.conjugate_index(idx);
        if conj < idx {
            continue;
        }
        let err = (symbol[conj] - symbol[idx].conj()).norm();
        if err > 1e-12 * symbol[idx].norm().max(1.0) {
            return Err(RippleError::Invariant(format!(
                "multiplier '{}' breaks Hermitian symmetry at mode {:?}",
                m.name(),
                grid.mode_of(idx)
            )));
        }
    }
    let coeffs: Vec<Complex64> = symbol
        .into_iter()
        .zip(f.coeffs())
        .map(|(s, c)| s * c)
        .collect();
    SpectralField::from_coeffs(grid, coeffs)
}

/// Convolution with the heat kernel psi_T; requires T > 0.
pub fn heat_convolve(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if t.is_nan() || t <= 0.0 {
        return Err(RippleError::Domain(format!(
            "heat convolution needs T > 0, got {t}"
        )));
    }
    apply_multiplier(f, &MultiplierSpec::heat(t))
}

/// Convolution with the anisotropic mollifier phi_ell; ell in (0, 1].
pub fn mollify(f: &SpectralField, ell: f64, mask: &MaskSpec) -> Result<SpectralField> {
    if !(ell > 0.0 && ell <= 1.0) {
        return Err(RippleError::Domain(format!(
            "mollification scale must lie in (0, 1], got {ell}"
        )));
    }
    mask.validate()?;
    apply_multiplier(f, &MultiplierSpec::mollifier(mask, ell))
}

type MaskFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type MaskGradFn = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

/// A symmetric Schwartz mask in frequency variables, hat(0) = 1.
#[derive(Clone)]
pub struct MaskSpec {
    name: String,
    hat: MaskFn,
    grad: MaskGradFn,
}

impl std::fmt::Debug for MaskSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MaskSpec({})", self.name)
    }
}

impl MaskSpec {
    /// Default mask exp(-|kappa|^2 / 2).
    pub fn gaussian() -> Self {
        Self {
            name: "gaussian".into(),
            hat: Arc::new(|u, v| (-(u * u + v * v) / 2.0).exp()),
            grad: Arc::new(|u, v| {
                let h = (-(u * u + v * v) / 2.0).exp();
                (-u * h, -v * h)
            }),
        }
    }

    /// Second shipped mask exp(-|kappa|^4 / 4) for the kernel-independence
    /// studies.
    pub fn quartic() -> Self {
        Self {
            name: "quartic".into(),
            hat: Arc::new(|u, v| {
                let s = u * u + v * v;
                (-s * s / 4.0).exp()
            }),
            grad: Arc::new(|u, v| {
                let s = u * u + v * v;
                let h = (-s * s / 4.0).exp();
                (-s * u * h, -s * v * h)
            }),
        }
    }

    /// Custom mask with a finite-difference gradient. Meant for tests.
    pub fn custom<F>(name: impl Into<String>, hat: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let hat: MaskFn = Arc::new(hat);
        let h2 = hat.clone();
        Self {
            name: name.into(),
            hat,
            grad: Arc::new(move |u, v| {
                let eps = 1e-6 * (1.0 + u.abs().max(v.abs()));
                (
                    (h2(u + eps, v) - h2(u - eps, v)) / (2.0 * eps),
                    (h2(u, v + eps) - h2(u, v - eps)) / (2.0 * eps),
                )
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn hat(&self, u: f64, v: f64) -> f64 {
        (self.hat)(u, v)
    }

    pub fn hat_grad(&self, u: f64, v: f64) -> (f64, f64) {
        (self.grad)(u, v)
    }

    /// Checks normalization hat(0) = 1 and evenness on a probe set.
    pub fn validate(&self) -> Result<()> {
        if (self.hat(0.0, 0.0) - 1.0).abs() > 1e-12 {
            return Err(RippleError::Invariant(format!(
                "mask '{}' is not normalized: hat(0) = {}",
                self.name,
                self.hat(0.0, 0.0)
            )));
        }
        for &(u, v) in &[(0.3, 0.0), (0.0, 0.7), (1.1, 0.4), (2.5, 1.9), (0.05, 3.0)] {
            if (self.hat(u, v) - self.hat(-u, -v)).abs() > 1e-12 {
                return Err(RippleError::Invariant(format!(
                    "mask '{}' is not even at ({u}, {v})",
                    self.name
                )));
            }
        }
        Ok(())
    }
}
