//! Martingale (historic inverse probability) estimation.
//!
//! Every state change adds `1/xi` to the estimate, where `xi` is the
//! probability that the next unseen element changes the sketch. `xi` is the
//! sum of the per-register change probabilities `nu(r)`, each an integer
//! multiple of `2^-64`, so it is tracked exactly as a 128-bit integer.

use crate::error::{Error, Result};
use crate::params::Params;
use crate::sketch::{Sketch, UpdateOutcome};

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// `nu(r) * 2^64`: probability that a register holding `r` changes with the
/// next unseen element.
pub(crate) fn nu_scaled(params: &Params, r: u64) -> u64 {
    let d = u64::from(params.d());
    let k = r >> d;
    let mut total = params.sigma_scaled_unchecked(k);
    for u in k.saturating_sub(d).max(1)..k {
        if r & (1u64 << (u + d - k)) == 0 {
            total += params.rho_scaled_from_exponent(params.update_exponent(u));
        }
    }
    total
}

/// Probability that register value `r` is changed by the next unseen element.
pub fn nu(r: u64, params: &Params) -> Result<f64> {
    if !params.is_valid_register(r) {
        return Err(Error::Domain(format!(
            "invalid register value {r:#x} for {params}"
        )));
    }
    Ok(nu_scaled(params, r) as f64 / TWO_POW_64)
}

/// Running martingale estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleState {
    estimate: f64,
    xi_scaled: u128,
}

impl Default for MartingaleState {
    fn default() -> Self {
        Self::new()
    }
}

impl MartingaleState {
    /// Estimate 0, state-change probability 1.
    pub fn new() -> Self {
        Self {
            estimate: 0.0,
            xi_scaled: 1u128 << 64,
        }
    }

    #[inline]
    pub fn estimate(&self) -> f64 {
        self.estimate
    }

    /// Current state-change probability.
    #[inline]
    pub fn xi(&self) -> f64 {
        self.xi_scaled as f64 / TWO_POW_64
    }

    /// Accounts for one insertion. Outcomes that did not change the register
    /// are ignored.
    ///
    /// # Panics
    ///
    /// If the outcome does not lower the change probability or lowers it
    /// below zero, which means the outcome does not belong to this state.
    #[inline]
    pub fn update(&mut self, outcome: &UpdateOutcome, params: &Params) {
        if !outcome.changed() {
            return;
        }
        let before = nu_scaled(params, outcome.old_value);
        let after = nu_scaled(params, outcome.new_value);
        assert!(
            after < before && self.xi_scaled > 0,
            "martingale update from {:#x} to {:#x} does not reduce the change probability",
            outcome.old_value,
            outcome.new_value
        );
        self.estimate += TWO_POW_64 / self.xi_scaled as f64;
        self.xi_scaled = self
            .xi_scaled
            .checked_sub(u128::from(before - after))
            .expect("state-change probability dropped below zero");
    }
}

/// A sketch paired with its martingale estimator.
///
/// Only valid for sketches built by insertion; a merged or reduced sketch has
/// no insertion history.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleSketch {
    sketch: Sketch,
    state: MartingaleState,
}

impl MartingaleSketch {
    pub fn new(params: Params) -> Self {
        Self {
            sketch: Sketch::new(params),
            state: MartingaleState::new(),
        }
    }

    #[inline]
    pub fn insert_hash(&mut self, hash: u64) -> UpdateOutcome {
        let outcome = self.sketch.insert_hash(hash);
        self.state.update(&outcome, &self.sketch.params());
        outcome
    }

    #[inline]
    pub(crate) fn apply_update(&mut self, index: usize, u: u64) {
        let outcome = self.sketch.apply_update(index, u);
        self.state.update(&outcome, &self.sketch.params());
    }

    pub fn estimate(&self) -> f64 {
        self.state.estimate()
    }

    pub fn state(&self) -> &MartingaleState {
        &self.state
    }

    pub fn sketch(&self) -> &Sketch {
        &self.sketch
    }

    pub fn into_sketch(self) -> Sketch {
        self.sketch
    }
}
