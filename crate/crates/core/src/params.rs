//! Sketch parameters and the update-value distribution they induce.
//!
//! A sketch is described by three integers:
//!
//! - `t`: number of hash bits mixed into the update value next to the
//!   leading-zero count. Update values follow a step distribution that
//!   approximates a geometric distribution with base `2^(2^-t)`.
//! - `d`: number of indicator bits per register. They record which of the
//!   `d` update values directly below the register maximum have occurred.
//! - `p`: precision, the sketch has `m = 2^p` registers.
//!
//! Each register occupies `6 + t + d` bits: `6 + t` bits for the maximum
//! update value and `d` indicator bits below it.

use crate::error::{Error, Result};

/// Default number of extra hash bits per update value.
pub const DEFAULT_T: u8 = 2;
/// Default number of indicator bits, optimal for ML estimation with `t = 2`.
pub const DEFAULT_D: u8 = 20;

/// Smallest supported precision.
pub const MIN_P: u8 = 2;
/// Largest supported precision (`2^26` registers).
pub const MAX_P: u8 = 26;
/// Largest `t` accepted by [`Params::new`]. Larger values need
/// [`Params::new_unrestricted`].
pub const MAX_DEFAULT_T: u8 = 3;

/// Validated `(t, d, p)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Params {
    t: u8,
    d: u8,
    p: u8,
}

impl Params {
    /// Validates `(t, d, p)` with `t <= 3`.
    pub fn new(t: u8, d: u8, p: u8) -> Result<Self> {
        if t > MAX_DEFAULT_T {
            return Err(Error::InvalidParams(format!(
                "t = {t} exceeds {MAX_DEFAULT_T}; use Params::new_unrestricted for larger t"
            )));
        }
        Self::new_unrestricted(t, d, p)
    }

    /// Validates `(t, d, p)` without the `t <= 3` restriction.
    pub fn new_unrestricted(t: u8, d: u8, p: u8) -> Result<Self> {
        if !(MIN_P..=MAX_P).contains(&p) {
            return Err(Error::InvalidParams(format!(
                "p = {p} outside [{MIN_P}, {MAX_P}]"
            )));
        }
        if u32::from(p) + u32::from(t) > 63 {
            return Err(Error::InvalidParams(format!(
                "p + t = {} exceeds 63",
                u32::from(p) + u32::from(t)
            )));
        }
        let width = 6 + u32::from(t) + u32::from(d);
        if width > 64 {
            return Err(Error::InvalidParams(format!(
                "register width 6 + t + d = {width} exceeds 64 bits"
            )));
        }
        Ok(Self { t, d, p })
    }

    /// Default `t = 2, d = 20` at the given precision.
    pub fn with_precision(p: u8) -> Result<Self> {
        Self::new(DEFAULT_T, DEFAULT_D, p)
    }

    #[inline]
    pub fn t(&self) -> u8 {
        self.t
    }

    #[inline]
    pub fn d(&self) -> u8 {
        self.d
    }

    #[inline]
    pub fn p(&self) -> u8 {
        self.p
    }

    /// Number of registers `m = 2^p`.
    #[inline]
    pub fn num_registers(&self) -> usize {
        1usize << self.p
    }

    /// Register width `6 + t + d` in bits.
    #[inline]
    pub fn register_bits(&self) -> u32 {
        6 + u32::from(self.t) + u32::from(self.d)
    }

    /// Size of the packed register array in bytes.
    #[inline]
    pub fn register_bytes(&self) -> usize {
        (self.num_registers() * self.register_bits() as usize).div_ceil(8)
    }

    /// Largest possible update value `(65 - p - t) * 2^t`.
    #[inline]
    pub fn max_update_value(&self) -> u64 {
        (65 - u64::from(self.p) - u64::from(self.t)) << self.t
    }

    /// Largest possible register value.
    #[inline]
    pub fn max_register_value(&self) -> u64 {
        (self.max_update_value() << self.d) | self.indicator_mask()
    }

    #[inline]
    pub(crate) fn indicator_mask(&self) -> u64 {
        (1u64 << self.d) - 1
    }

    /// Exponent `e(u) = min(t + 1 + floor((u - 1) / 2^t), 64 - p)`, so that
    /// update value `u` has probability `2^-e(u)`.
    ///
    /// Also defined for `u = 0`, where the floor is `-1` and `e(0) = t`.
    #[inline]
    pub fn update_exponent(&self, u: u64) -> u32 {
        let t = u32::from(self.t);
        let cap = 64 - u32::from(self.p);
        if u == 0 {
            return t.min(cap);
        }
        let step = ((u - 1) >> t).min(u64::from(cap));
        (t + 1 + step as u32).min(cap)
    }

    fn check_update_value(&self, u: u64, lo: u64) -> Result<()> {
        if u < lo || u > self.max_update_value() {
            return Err(Error::Domain(format!(
                "update value {u} outside [{lo}, {}]",
                self.max_update_value()
            )));
        }
        Ok(())
    }

    /// Probability `2^-e(u)` of update value `u` in `[1, u_max]`.
    pub fn rho(&self, u: u64) -> Result<f64> {
        self.check_update_value(u, 1)?;
        Ok(pow2_neg(self.update_exponent(u)))
    }

    /// Probability that an update value exceeds `k`, for `k` in `[0, u_max]`.
    pub fn sigma(&self, k: u64) -> Result<f64> {
        self.check_update_value(k, 0)?;
        Ok(self.sigma_scaled_unchecked(k) as f64 * pow2_neg(64 - u32::from(self.p)))
    }

    /// `sigma(k) * 2^(64 - p)`, an exact integer.
    pub fn sigma_scaled(&self, k: u64) -> Result<u64> {
        self.check_update_value(k, 0)?;
        Ok(self.sigma_scaled_unchecked(k))
    }

    /// `rho(u) * 2^(64 - p)` for an exponent returned by `update_exponent`.
    #[inline]
    pub(crate) fn rho_scaled_from_exponent(&self, e: u32) -> u64 {
        1u64 << (64 - u32::from(self.p) - e)
    }

    /// Closed form `(2^t (1 - t + e(k)) - k) / 2^e(k)`, scaled by `2^(64 - p)`.
    #[inline]
    pub(crate) fn sigma_scaled_unchecked(&self, k: u64) -> u64 {
        let e = self.update_exponent(k);
        let t = u32::from(self.t);
        let numerator = (u64::from(1 + e - t) << t) - k;
        numerator << (64 - u32::from(self.p) - e)
    }

    /// Splits a hash into its register index and update value.
    #[inline]
    pub fn split_hash(&self, h: u64) -> (usize, u64) {
        let t = u32::from(self.t);
        let pt = u32::from(self.p) + t;
        let index = ((h >> t) as usize) & (self.num_registers() - 1);
        let masked = h | ((1u64 << pt) - 1);
        let u = (u64::from(masked.leading_zeros()) << t) + (h & ((1u64 << t) - 1)) + 1;
        (index, u)
    }

    /// Whether `r` is a reachable register value.
    ///
    /// With maximum `k = r >> d`: `k <= u_max`; `k = 0` implies `r = 0`; and
    /// for `1 <= k <= d` the indicator slot below update value 1 (bit `d - k`)
    /// is set while every lower bit is clear. Insertion marks that slot
    /// because the empty register counts as having seen the value 0.
    pub fn is_valid_register(&self, r: u64) -> bool {
        let d = u32::from(self.d);
        let k = r >> d;
        if k > self.max_update_value() {
            return false;
        }
        if k == 0 {
            return r == 0;
        }
        if k <= u64::from(d) {
            let slot = d - k as u32;
            let low_mask = (1u64 << (slot + 1)) - 1;
            return r & low_mask == 1u64 << slot;
        }
        true
    }
}

impl std::fmt::Display for Params {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "t={} d={} p={}", self.t, self.d, self.p)
    }
}

/// `2^-e` for `e` in `[0, 1074]`.
#[inline]
pub(crate) fn pow2_neg(e: u32) -> f64 {
    f64::powi(2.0, -(e as i32))
}
