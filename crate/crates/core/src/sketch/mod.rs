//! The ExaLogLog sketch: a packed array of `2^p` registers of `6 + t + d`
//! bits each.
//!
//! A register value `r` holds the maximum update value `k = r >> d` in its
//! upper bits. Bit `d - j` of the lower `d` bits (for `j` in `1..=d`) records
//! whether update value `k - j` has been seen.

mod codec;
mod registers;

pub use codec::MAGIC;

use crate::error::{Error, Result};
use crate::params::Params;
use registers::PackedRegisters;

/// Result of a single insertion, consumed by the martingale estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpdateOutcome {
    pub index: usize,
    pub old_value: u64,
    pub new_value: u64,
}

impl UpdateOutcome {
    #[inline]
    pub fn changed(&self) -> bool {
        self.new_value != self.old_value
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sketch {
    params: Params,
    registers: PackedRegisters,
}

impl Sketch {
    pub fn new(params: Params) -> Self {
        Self {
            registers: PackedRegisters::new(params.num_registers(), params.register_bits()),
            params,
        }
    }

    #[inline]
    pub fn params(&self) -> Params {
        self.params
    }

    #[inline]
    pub fn num_registers(&self) -> usize {
        self.registers.len()
    }

    #[inline]
    pub fn register(&self, index: usize) -> u64 {
        self.registers.get(index)
    }

    pub fn registers(&self) -> impl Iterator<Item = u64> + '_ {
        self.registers.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_zero()
    }

    /// Number of registers that have seen at least one update.
    pub fn nonzero_registers(&self) -> usize {
        self.registers().filter(|&r| r != 0).count()
    }

    /// Number of registers at their largest possible value.
    pub fn saturated_registers(&self) -> usize {
        let max = self.params.max_register_value();
        self.registers().filter(|&r| r == max).count()
    }

    /// Inserts a 64-bit hash. Duplicate hashes leave the state unchanged.
    #[inline]
    pub fn insert_hash(&mut self, hash: u64) -> UpdateOutcome {
        let (index, u) = self.params.split_hash(hash);
        self.apply_update(index, u)
    }

    /// Hashes `element` with the caller's 64-bit hash function and inserts it.
    pub fn insert_with<F>(&mut self, element: &[u8], hash: F) -> UpdateOutcome
    where
        F: FnOnce(&[u8]) -> u64,
    {
        self.insert_hash(hash(element))
    }

    /// Records update value `u` (in `[1, u_max]`) in register `index`.
    #[inline]
    pub(crate) fn apply_update(&mut self, index: usize, u: u64) -> UpdateOutcome {
        debug_assert!(u >= 1 && u <= self.params.max_update_value());
        let d = u32::from(self.params.d());
        let old = self.registers.get(index);
        let k = old >> d;
        let new = if u > k {
            let carried = ((1u64 << d) | (old & self.params.indicator_mask()))
                .checked_shr(shift_amount(u - k))
                .unwrap_or(0);
            (u << d) | carried
        } else if k - u <= u64::from(d) && u < k {
            old | (1u64 << (d - (k - u) as u32))
        } else {
            old
        };
        if new != old {
            self.registers.set(index, new);
        }
        UpdateOutcome {
            index,
            old_value: old,
            new_value: new,
        }
    }

    fn check_same_params(&self, other: &Self) -> Result<()> {
        let (a, b) = (self.params, other.params);
        for (field, l, r) in [
            ("t", a.t(), b.t()),
            ("d", a.d(), b.d()),
            ("p", a.p(), b.p()),
        ] {
            if l != r {
                return Err(Error::IncompatibleParams {
                    field,
                    left: u32::from(l),
                    right: u32::from(r),
                });
            }
        }
        Ok(())
    }

    /// Merges `other` into `self`. Both sketches must share `(t, d, p)`.
    pub fn merge_from(&mut self, other: &Self) -> Result<()> {
        self.check_same_params(other)?;
        let d = u32::from(self.params.d());
        for i in 0..self.num_registers() {
            let (a, b) = (self.registers.get(i), other.registers.get(i));
            let merged = merge_registers(a, b, d);
            if merged != a {
                self.registers.set(i, merged);
            }
        }
        Ok(())
    }

    /// Returns the union of two sketches with identical parameters.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.merge_from(other)?;
        Ok(out)
    }

    /// Merges two sketches that share `t` by first reducing both to
    /// `(t, min(d, d'), min(p, p'))`.
    pub fn merge_reduced(&self, other: &Self) -> Result<Self> {
        if self.params.t() != other.params.t() {
            return Err(Error::IncompatibleParams {
                field: "t",
                left: u32::from(self.params.t()),
                right: u32::from(other.params.t()),
            });
        }
        let d = self.params.d().min(other.params.d());
        let p = self.params.p().min(other.params.p());
        self.reduce(d, p)?.merge(&other.reduce(d, p)?)
    }

    /// Converts the sketch to `(t, d', p')` with `d' <= d` and `2 <= p' <= p`.
    /// The result equals a sketch built directly at the smaller parameters
    /// from the same hashes.
    pub fn reduce(&self, new_d: u8, new_p: u8) -> Result<Self> {
        let (t, d, p) = (self.params.t(), self.params.d(), self.params.p());
        if new_d > d {
            return Err(Error::Domain(format!(
                "cannot reduce d from {d} to {new_d}"
            )));
        }
        if new_p > p {
            return Err(Error::Domain(format!(
                "cannot reduce p from {p} to {new_p}"
            )));
        }
        let target = Params::new_unrestricted(t, new_d, new_p)?;
        let mut out = Sketch::new(target);

        let t = u32::from(t);
        let new_d32 = u32::from(new_d);
        let d_shift = u32::from(d - new_d);
        let p_diff = i64::from(p - new_p);
        let threshold = ((64 - i64::from(t) - i64::from(p)) << t) + 1;
        let new_m = target.num_registers();
        let group = 1usize << (p - new_p);

        for i in 0..new_m {
            let mut merged = 0u64;
            for j in 0..group {
                let mut r = self.registers.get(i + j * new_m) >> d_shift;
                let k = (r >> new_d32) as i64;
                if k >= threshold {
                    let bit_len = 64 - i64::from((j as u64).leading_zeros());
                    let shift = (p_diff - bit_len) << t;
                    if shift > 0 {
                        let nbits = i64::from(new_d32) + threshold - k;
                        if nbits > 0 {
                            let nbits = nbits as u32;
                            let low = r & ((1u64 << nbits) - 1);
                            r = ((r >> nbits) << nbits)
                                + low.checked_shr(shift_amount(shift as u64)).unwrap_or(0);
                        }
                        r += (shift as u64) << new_d32;
                    }
                }
                merged = merge_registers(r, merged, new_d32);
            }
            out.registers.set(i, merged);
        }
        Ok(out)
    }

    /// Serializes the sketch: magic byte, `t`, `d`, `p`, then the packed
    /// register bit stream.
    pub fn to_bytes(&self) -> Vec<u8> {
        codec::encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        codec::decode(bytes)
    }

    pub(crate) fn from_parts(params: Params, registers: PackedRegisters) -> Self {
        Self { params, registers }
    }

    pub(crate) fn packed(&self) -> &PackedRegisters {
        &self.registers
    }
}

#[inline]
fn shift_amount(delta: u64) -> u32 {
    u32::try_from(delta).unwrap_or(u32::MAX)
}

/// Merges two registers of sketches with equal parameters and `d`
/// indicator bits.
#[inline]
pub fn merge_registers(r1: u64, r2: u64, d: u32) -> u64 {
    let k1 = r1 >> d;
    let k2 = r2 >> d;
    let low = (1u64 << d) - 1;
    if k1 > k2 && k2 > 0 {
        r1 | ((1u64 << d) | (r2 & low))
            .checked_shr(shift_amount(k1 - k2))
            .unwrap_or(0)
    } else if k2 > k1 && k1 > 0 {
        r2 | ((1u64 << d) | (r1 & low))
            .checked_shr(shift_amount(k2 - k1))
            .unwrap_or(0)
    } else {
        r1 | r2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sketch(t: u8, d: u8, p: u8) -> Sketch {
        Sketch::new(Params::new(t, d, p).unwrap())
    }

    #[test]
    fn insert_zero_hash() {
        let mut s = sketch(2, 6, 2);
        let out = s.insert_hash(0);
        assert_eq!(out.index, 0);
        assert_eq!(out.new_value, 15424);
        assert_eq!(s.register(0), 241 * 64);
    }

    #[test]
    fn insert_all_ones_hash() {
        let mut s = sketch(2, 6, 2);
        let out = s.insert_hash(u64::MAX);
        assert_eq!(out.index, 3);
        assert_eq!(out.new_value, 260);
    }

    #[test]
    fn insert_is_idempotent() {
        let mut s = sketch(2, 20, 4);
        let h = 0x1234_5678_9ABC_DEF0;
        assert!(s.insert_hash(h).changed());
        let second = s.insert_hash(h);
        assert!(!second.changed());
        assert_eq!(second.old_value, second.new_value);
    }

    #[test]
    fn lower_values_set_indicator_bits() {
        let params = Params::new(0, 4, 2).unwrap();
        let mut s = Sketch::new(params);
        s.apply_update(1, 6);
        assert_eq!(s.register(1), 6 << 4);
        s.apply_update(1, 4);
        assert_eq!(s.register(1), (6 << 4) | 0b0100);
        s.apply_update(1, 2); // exactly d below the maximum
        assert_eq!(s.register(1), (6 << 4) | 0b0101);
        s.apply_update(1, 1); // out of indicator range
        assert_eq!(s.register(1), (6 << 4) | 0b0101);
        s.apply_update(1, 7);
        assert_eq!(s.register(1), (7 << 4) | 0b1010);
    }

    #[test]
    fn merge_register_examples() {
        for r in [0u64, 260, 15424, 15424 | 63] {
            assert_eq!(merge_registers(r, 0, 6), r);
            assert_eq!(merge_registers(0, r, 6), r);
            assert_eq!(merge_registers(r, r, 6), r);
        }
        assert_eq!(merge_registers(15424, 260, 6), 15424);
        assert_eq!(merge_registers(260, 15424, 6), 15424);
    }

    #[test]
    fn merge_matches_union_for_traced_hashes() {
        let mut a = sketch(2, 6, 2);
        let mut b = sketch(2, 6, 2);
        let mut both = sketch(2, 6, 2);
        for h in [0u64, 4, 0x10, 0xF0] {
            a.insert_hash(h);
            both.insert_hash(h);
        }
        for h in [u64::MAX, 1 << 40, 0x8] {
            b.insert_hash(h);
            both.insert_hash(h);
        }
        assert_eq!(a.merge(&b).unwrap(), both);
    }

    #[test]
    fn merge_rejects_mismatched_params() {
        let err = sketch(2, 20, 8).merge(&sketch(2, 16, 8)).unwrap_err();
        assert_eq!(
            err,
            Error::IncompatibleParams {
                field: "d",
                left: 20,
                right: 16
            }
        );
        let err = sketch(2, 20, 8).merge(&sketch(1, 20, 8)).unwrap_err();
        assert!(matches!(err, Error::IncompatibleParams { field: "t", .. }));
        assert!(sketch(2, 20, 8).merge_reduced(&sketch(1, 9, 6)).is_err());
    }

    #[test]
    fn reduce_identity_and_empty() {
        let mut s = sketch(2, 20, 6);
        for h in 0..500u64 {
            s.insert_hash(h.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        }
        assert_eq!(s.reduce(20, 6).unwrap(), s);
        let empty = sketch(2, 20, 6).reduce(3, 2).unwrap();
        assert_eq!(empty.params(), Params::new(2, 3, 2).unwrap());
        assert!(empty.is_empty());
    }

    #[test]
    fn reduce_rejects_growth() {
        let s = sketch(2, 20, 6);
        assert!(s.reduce(21, 6).is_err());
        assert!(s.reduce(20, 7).is_err());
        assert!(s.reduce(20, 1).is_err());
    }

    #[test]
    fn reduce_handles_saturating_hash() {
        // h = 0 gives the maximal leading-zero count at every precision.
        let mut hi = sketch(1, 9, 10);
        let mut lo = sketch(1, 9, 3);
        for h in [0u64, 1 << 5, 1 << 12, 3 << 1] {
            hi.insert_hash(h);
            lo.insert_hash(h);
        }
        assert_eq!(hi.reduce(9, 3).unwrap(), lo);
    }
}
