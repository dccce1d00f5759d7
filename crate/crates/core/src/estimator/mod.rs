//! Distinct-count estimation from sketch states.

mod coefficients;
mod martingale;
mod ml;
mod pmf;

pub use coefficients::{Coefficients, EXPONENT_SLOTS};
pub use martingale::{nu, MartingaleSketch, MartingaleState};
pub use ml::{root_bracket, solve_ml, MlEstimate, RootBracket, MAX_NEWTON_ITERATIONS};
pub use pmf::pmf_register;

use crate::params::Params;
use crate::sketch::Sketch;
use crate::theory;

/// Constant `c` of the first-order bias correction `n / (1 + c/m)`.
pub fn bias_correction_constant(t: u8, d: u8) -> f64 {
    let b = theory::base(t);
    let tail = b.powi(-i32::from(d)) / (b - 1.0);
    let q = 1.0 + tail;
    let z2 = theory::hurwitz_zeta(2.0, q).expect("q > 1");
    let z3 = theory::hurwitz_zeta(3.0, q).expect("q > 1");
    b.ln() * (1.0 + 2.0 * tail) * z3 / (z2 * z2)
}

/// ML estimate of the distinct count, bias corrected.
pub fn estimate_distinct(sketch: &Sketch) -> f64 {
    let params = sketch.params();
    let raw = estimate_distinct_uncorrected(sketch);
    raw / bias_correction_factor(&params)
}

/// ML estimate without the bias correction.
pub fn estimate_distinct_uncorrected(sketch: &Sketch) -> f64 {
    let c = Coefficients::from_sketch(sketch);
    solve_ml(&c, sketch.num_registers() as f64).value
}

/// `1 + c/m`.
pub fn bias_correction_factor(params: &Params) -> f64 {
    1.0 + bias_correction_constant(params.t(), params.d()) / params.num_registers() as f64
}
