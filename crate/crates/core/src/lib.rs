//! Approximate distinct counting with ExaLogLog sketches.
//!
//! ```
//! use exaloglog::{estimate_distinct, Params, Sketch};
//!
//! let mut sketch = Sketch::new(Params::new(2, 20, 8).unwrap());
//! for i in 0u64..10_000 {
//!     // any well mixed 64-bit hash works; this is the splitmix64 finalizer
//!     let mut z = i.wrapping_add(0x9E37_79B9_7F4A_7C15);
//!     z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
//!     z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
//!     sketch.insert_hash(z ^ (z >> 31));
//! }
//! let n = estimate_distinct(&sketch);
//! assert!((n / 10_000.0 - 1.0).abs() < 0.2);
//! ```

pub mod error;
pub mod estimator;
pub mod params;
pub mod sim;
pub mod sketch;
pub mod theory;
pub mod tokens;

pub use error::{Error, Result};
pub use estimator::{
    bias_correction_constant, estimate_distinct, estimate_distinct_uncorrected, nu, pmf_register,
    solve_ml, Coefficients, MartingaleSketch, MartingaleState, MlEstimate,
};
pub use params::Params;
pub use sketch::{merge_registers, Sketch, UpdateOutcome};
pub use tokens::{from_token, to_token, token_pmf, TokenSet};
