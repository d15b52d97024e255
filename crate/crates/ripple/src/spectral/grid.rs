//! Discretization of the unit 2-torus with paired physical/frequency lattices.
//!
//! Physical samples live at x = (i1/n1, i2/n2), stored row-major with x1
//! fastest (index = i2*n1 + i1). The frequency lattice is
//! K = {(2*pi*j1, 2*pi*j2) : j_i in [-n_i/2, n_i/2)}, so negation acts
//! modulo the lattice and the Nyquist rows/columns map to themselves.

use crate::error::{Result, RippleError};

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Anisotropic Carnot-Caratheodory gauge on frequency space,
/// d(k, 0) = |k1| + |k2|^(2/3).
pub fn d_freq(k1: f64, k2: f64) -> f64 {
    k1.abs() + k2.abs().powf(2.0 / 3.0)
}

/// Symbol of the elliptic operator L = -d1^2 - |d1|^{-1} d2^2 on k1 != 0.
pub fn l_symbol(k1: f64, k2: f64) -> f64 {
    k1 * k1 + k2 * k2 / k1.abs()
}

/// Symbol |k1|^3 + k2^2 of the semigroup generator A.
pub fn a_symbol(k1: f64, k2: f64) -> f64 {
    k1.abs().powi(3) + k2 * k2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct TorusGrid {
    n1: usize,
    n2: usize,
}

impl TorusGrid {
    /// Both dimensions must be even and at least 4.
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 < 4 || n2 < 4 || !n1.is_multiple_of(2) || !n2.is_multiple_of(2) {
            return Err(RippleError::Config(format!(
                "dimensions must be even and >= 4, got {n1}x{n2}"
            )));
        }
        Ok(Self { n1, n2 })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Total number of lattice modes (= number of physical samples).
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer mode (j1, j2) of a storage index, with j_i in [-n_i/2, n_i/2).
    pub fn mode_of(&self, idx: usize) -> (i64, i64) {
        let i1 = idx % self.n1;
        let i2 = idx / self.n1;
        (wrap_mode(i1, self.n1), wrap_mode(i2, self.n2))
    }

    /// Storage index of an integer mode; accepts any representative mod n.
    pub fn index_of(&self, j1: i64, j2: i64) -> usize {
        let i1 = j1.rem_euclid(self.n1 as i64) as usize;
        let i2 = j2.rem_euclid(self.n2 as i64) as usize;
        i2 * self.n1 + i1
    }

    /// Frequency k = 2*pi*(j1, j2) of a storage index.
    pub fn freq_of(&self, idx: usize) -> (f64, f64) {
        let (j1, j2) = self.mode_of(idx);
        (TWO_PI * j1 as f64, TWO_PI * j2 as f64)
    }

    /// Index of the negated mode, taken modulo the lattice so that the
    /// Nyquist rows/columns fold onto themselves.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let (j1, j2) = self.mode_of(idx);
        self.index_of(-j1, -j2)
    }

    /// Modes fixed by negation: (0,0) and the three Nyquist corners.
    pub fn is_self_conjugate(&self, idx: usize) -> bool {
        self.conjugate_index(idx) == idx
    }

    /// True on the Nyquist column (j1 = -n1/2) or row (j2 = -n2/2).
    pub fn on_nyquist(&self, idx: usize) -> (bool, bool) {
        let (j1, j2) = self.mode_of(idx);
        (j1 == -((self.n1 / 2) as i64), j2 == -((self.n2 / 2) as i64))
    }

    /// Canonical representative of the pair {k, -k}: the index that is
    /// not larger than its conjugate. Drives order-independent sampling.
    pub fn is_canonical(&self, idx: usize) -> bool {
        idx <= self.conjugate_index(idx)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> {
        0..self.len()
    }

    /// Physical coordinate of a storage index.
    pub fn point_of(&self, idx: usize) -> (f64, f64) {
        let i1 = idx % self.n1;
        let i2 = idx / self.n1;
        (i1 as f64 / self.n1 as f64, i2 as f64 / self.n2 as f64)
    }
}

fn wrap_mode(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}
