use crate::error::{Error, Result};
use crate::params::{pow2_neg, Params};
use crate::sketch::Sketch;

/// Number of slots in the `b` table, indexed directly by exponent `0..=64`.
pub const EXPONENT_SLOTS: usize = 65;

/// Coefficients of the log-likelihood
/// `ln L(n) = -(n/m) a + sum_j b_j ln(1 - exp(-n / (m 2^j)))`.
///
/// `a` is kept as the exact integer `a * 2^(64 - p)`. The all-zero state
/// would need `2^64`; it wraps to 0, which is harmless because a state with
/// every `b_j = 0` is recognised first.
///
/// Token sets produce the same shape with `p = 0` and `t = r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coefficients {
    a_scaled: u64,
    b: [u64; EXPONENT_SLOTS],
    t: u8,
    p: u8,
}

impl Coefficients {
    /// Builds coefficients from raw parts. `b` must be zero outside
    /// `[t + 1, 64 - p]`.
    pub fn new(t: u8, p: u8, a_scaled: u64, b: [u64; EXPONENT_SLOTS]) -> Result<Self> {
        if u32::from(t) + u32::from(p) > 63 {
            return Err(Error::Domain(format!(
                "t + p = {} exceeds 63",
                u32::from(t) + u32::from(p)
            )));
        }
        let c = Self { a_scaled, b, t, p };
        let range = c.exponent_range();
        if let Some(j) =
            (0..EXPONENT_SLOTS as u32).find(|j| !range.contains(j) && b[*j as usize] != 0)
        {
            return Err(Error::Domain(format!(
                "b[{j}] is nonzero outside [{}, {}]",
                range.start(),
                range.end()
            )));
        }
        Ok(c)
    }

    pub(crate) fn empty(t: u8, p: u8) -> Self {
        Self {
            a_scaled: 0,
            b: [0; EXPONENT_SLOTS],
            t,
            p,
        }
    }

    /// Runs over every register of `sketch`.
    pub fn from_sketch(sketch: &Sketch) -> Self {
        let params = sketch.params();
        let mut c = Self::empty(params.t(), params.p());
        let d = u32::from(params.d());
        for r in sketch.registers() {
            c.add_register(&params, d, r);
        }
        c
    }

    #[inline]
    fn add_register(&mut self, params: &Params, d: u32, r: u64) {
        let k = r >> d;
        self.a_scaled = self.a_scaled.wrapping_add(params.sigma_scaled_unchecked(k));
        if k == 0 {
            return;
        }
        self.b[params.update_exponent(k) as usize] += 1;
        let lowest = k.saturating_sub(u64::from(d)).max(1);
        for u in lowest..k {
            let j = params.update_exponent(u);
            if r & (1u64 << (u + u64::from(d) - k)) == 0 {
                self.a_scaled = self
                    .a_scaled
                    .wrapping_add(params.rho_scaled_from_exponent(j));
            } else {
                self.b[j as usize] += 1;
            }
        }
    }

    #[inline]
    pub(crate) fn add_token_exponent(&mut self, j: u32) {
        debug_assert!(self.exponent_range().contains(&j));
        self.b[j as usize] += 1;
        self.a_scaled = self.a_scaled.wrapping_sub(1u64 << (64 - j));
    }

    pub fn t(&self) -> u8 {
        self.t
    }

    pub fn p(&self) -> u8 {
        self.p
    }

    /// `a * 2^(64 - p)`, wrapped modulo `2^64`.
    pub fn a_scaled(&self) -> u64 {
        self.a_scaled
    }

    /// The coefficient `a`. Equals `2^p` for the all-zero state.
    pub fn a(&self) -> f64 {
        if self.is_zero_state() {
            return f64::from(1u32 << self.p);
        }
        self.a_scaled as f64 * pow2_neg(64 - u32::from(self.p))
    }

    #[inline]
    pub fn b(&self, j: u32) -> u64 {
        self.b.get(j as usize).copied().unwrap_or(0)
    }

    pub fn b_table(&self) -> &[u64; EXPONENT_SLOTS] {
        &self.b
    }

    /// Exponents `j` for which `b_j` may be nonzero.
    pub fn exponent_range(&self) -> std::ops::RangeInclusive<u32> {
        u32::from(self.t) + 1..=64 - u32::from(self.p)
    }

    /// True when every `b_j` is zero, i.e. nothing has been recorded.
    pub fn is_zero_state(&self) -> bool {
        self.b.iter().all(|&b| b == 0)
    }
}
