//! Torus discretization, transforms, Fourier multipliers and alias-free
//! products.

pub mod field;
pub mod grid;
pub mod multiplier;
pub mod product;
pub mod snapshot;

pub use field::{compensated_sum, SpectralField};
pub use grid::{a_symbol, d_freq, l_symbol, TorusGrid, TWO_PI};
pub use multiplier::{
    apply_multiplier, heat_convolve, mollify, MaskSpec, ModeCtx, MultiplierSpec,
};
pub use product::{convolution_oracle, dealiased_product, dealiased_square};
pub use snapshot::{content_hash, read_snapshot, write_snapshot};
