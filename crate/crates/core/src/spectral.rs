//! FFT plumbing shared by the exact propagators.
//!
//! A field is split into its four eigenbasis components; each component is a
//! scalar array that evolves under a constant-coefficient linear equation, so a
//! single multiplication per Fourier mode advances it exactly.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::model::{MomentumGrid, WignerField};
use crate::qmat::{ComplexMat2, Observable, C64};

/// Per-mode Fourier symbols for the four components (a, b) of the field in the
/// eigenbasis of Â, indexed `[a][b][k]`.
pub type Symbols = [[Vec<C64>; 2]; 2];

pub(crate) struct SpectralPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    n: usize,
}

impl SpectralPlan {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            n,
        }
    }

    /// Forward transform in place (unnormalized).
    pub fn forward(&self, data: &mut [C64]) {
        self.forward.process(data);
    }

    /// Inverse transform in place, including the 1/n factor.
    pub fn inverse(&self, data: &mut [C64]) {
        self.inverse.process(data);
        let s = 1.0 / self.n as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }
}

/// Wavenumbers for first-derivative symbols. The Nyquist mode has no partner of
/// opposite sign, so its odd part is set to zero to keep real data real.
pub(crate) fn odd_wavenumbers(grid: &MomentumGrid) -> Vec<f64> {
    let mut u = grid.wavenumbers();
    u[grid.len() / 2] = 0.0;
    u
}

/// Splits a field into the four scalar component arrays in the eigenbasis of `a`.
pub(crate) fn split_components(field: &WignerField, a: &Observable) -> [[Vec<C64>; 2]; 2] {
    let n = field.grid().len();
    let mut comps: [[Vec<C64>; 2]; 2] = Default::default();
    for row in comps.iter_mut() {
        for c in row.iter_mut() {
            *c = Vec::with_capacity(n);
        }
    }
    for v in field.values() {
        let e = a.to_eigenbasis(v);
        for (i, row) in comps.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                c.push(e.m[i][j]);
            }
        }
    }
    comps
}

/// Inverse of [`split_components`].
pub(crate) fn join_components(comps: &[[Vec<C64>; 2]; 2], a: &Observable) -> Vec<ComplexMat2> {
    let n = comps[0][0].len();
    (0..n)
        .map(|j| {
            let e = ComplexMat2::new(comps[0][0][j], comps[0][1][j], comps[1][0][j], comps[1][1][j]);
            a.from_eigenbasis(&e)
        })
        .collect()
}

/// Advances every component by exp(t·symbol_k) mode by mode.
pub(crate) fn apply_symbols(plan: &SpectralPlan, comps: &mut [[Vec<C64>; 2]; 2], symbols: &Symbols, t: f64) {
    for (row, sym_row) in comps.iter_mut().zip(symbols) {
        for (c, sym) in row.iter_mut().zip(sym_row) {
            plan.forward(c);
            for (z, r) in c.iter_mut().zip(sym) {
                *z *= (r * t).exp();
            }
            plan.inverse(c);
        }
    }
}

/// Spectral derivative d^order/dp^order of one scalar array.
pub(crate) fn derivative(plan: &SpectralPlan, grid: &MomentumGrid, data: &[C64], order: u32) -> Vec<C64> {
    let u = if order % 2 == 1 {
        odd_wavenumbers(grid)
    } else {
        grid.wavenumbers()
    };
    let mut buf = data.to_vec();
    plan.forward(&mut buf);
    for (z, u) in buf.iter_mut().zip(&u) {
        *z *= C64::new(0.0, *u).powu(order);
    }
    plan.inverse(&mut buf);
    buf
}

/// Spectral derivative of a whole field, entry by entry in the original basis.
pub fn field_derivative(field: &WignerField, order: u32) -> Vec<ComplexMat2> {
    let grid = field.grid();
    let plan = SpectralPlan::new(grid.len());
    let mut out = vec![ComplexMat2::zero(); grid.len()];
    for i in 0..2 {
        for j in 0..2 {
            let entry: Vec<C64> = field.values().iter().map(|v| v.m[i][j]).collect();
            let d = derivative(&plan, grid, &entry, order);
            for (o, z) in out.iter_mut().zip(d) {
                o.m[i][j] = z;
            }
        }
    }
    out
}
