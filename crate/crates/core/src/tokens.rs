//! Hash tokens: `(r + 6)`-bit compressions of 64-bit hashes that keep
//! everything an insertion needs for any sketch with `p + t <= r`.
//!
//! A token stores the lowest `r` hash bits above a 6-bit field holding the
//! number of leading zeros of the hash with its lowest `r` bits forced to 1.
//! Collecting distinct tokens gives a sparse representation from which the
//! distinct count can be estimated directly, or which can be replayed into a
//! sketch once it gets large.

use crate::error::{Error, Result};
use crate::estimator::{solve_ml, Coefficients};
use crate::params::{pow2_neg, Params};
use crate::sketch::Sketch;

/// First byte of a serialized token set (`'T'`).
pub const TOKEN_MAGIC: u8 = 0x54;
/// Smallest token parameter.
pub const MIN_TOKEN_R: u8 = 1;
/// Largest token parameter; tokens then fit into 32 bits.
pub const MAX_TOKEN_R: u8 = 26;

const TOKEN_HEADER_LEN: usize = 6;

#[inline]
fn low_mask(r: u8) -> u64 {
    (1u64 << r) - 1
}

/// Maps a hash to its token.
#[inline]
pub fn to_token(h: u64, r: u8) -> u64 {
    debug_assert!((1..64).contains(&r));
    let nlz = u64::from((h | low_mask(r)).leading_zeros());
    ((h & low_mask(r)) << 6) | nlz
}

/// Whether `token` can come from [`to_token`] with parameter `r`.
pub fn is_valid_token(token: u64, r: u8) -> bool {
    (1..64).contains(&r) && token >> 6 >> r == 0 && token & 63 <= 64 - u64::from(r)
}

/// Representative hash `2^(64 - nlz) - 2^r + low`, computed modulo `2^64`.
///
/// Inserting it changes any sketch with `p + t <= r` exactly like the
/// original hash.
pub fn from_token(token: u64, r: u8) -> Result<u64> {
    if !is_valid_token(token, r) {
        return Err(Error::Domain(format!(
            "token {token:#x} invalid for r = {r}"
        )));
    }
    let nlz = (token & 63) as u32;
    let top = 1u64.checked_shl(64 - nlz).unwrap_or(0);
    Ok(top.wrapping_sub(1u64 << r).wrapping_add(token >> 6))
}

/// Exponent `j` of a token's probability `2^-j`.
#[inline]
fn token_exponent(token: u64, r: u8) -> u32 {
    (u32::from(r) + 1 + (token & 63) as u32).min(64)
}

/// Probability of observing `token` for a uniformly random hash.
pub fn token_pmf(token: u64, r: u8) -> f64 {
    if !is_valid_token(token, r) {
        return 0.0;
    }
    pow2_neg(token_exponent(token, r))
}

/// Distinct tokens for a fixed `r`, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSet {
    r: u8,
    tokens: Vec<u32>,
}

impl TokenSet {
    pub fn new(r: u8) -> Result<Self> {
        if !(MIN_TOKEN_R..=MAX_TOKEN_R).contains(&r) {
            return Err(Error::Domain(format!(
                "token parameter r = {r} outside [{MIN_TOKEN_R}, {MAX_TOKEN_R}]"
            )));
        }
        Ok(Self {
            r,
            tokens: Vec::new(),
        })
    }

    /// Builds a set from arbitrary tokens, deduplicating them.
    pub fn from_tokens<I: IntoIterator<Item = u64>>(r: u8, tokens: I) -> Result<Self> {
        let mut set = Self::new(r)?;
        for token in tokens {
            set.check(token)?;
            set.tokens.push(token as u32);
        }
        set.tokens.sort_unstable();
        set.tokens.dedup();
        Ok(set)
    }

    fn check(&self, token: u64) -> Result<()> {
        if is_valid_token(token, self.r) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "token {token:#x} invalid for r = {}",
                self.r
            )))
        }
    }

    pub fn r(&self) -> u8 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> impl ExactSizeIterator<Item = u64> + '_ {
        self.tokens.iter().map(|&t| u64::from(t))
    }

    pub fn contains(&self, token: u64) -> bool {
        u32::try_from(token).is_ok_and(|t| self.tokens.binary_search(&t).is_ok())
    }

    /// Inserts a token, returns `false` if it was already present.
    pub fn insert(&mut self, token: u64) -> Result<bool> {
        self.check(token)?;
        let token = token as u32;
        match self.tokens.binary_search(&token) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.tokens.insert(pos, token);
                Ok(true)
            }
        }
    }

    pub fn insert_hash(&mut self, h: u64) -> bool {
        self.insert(to_token(h, self.r))
            .expect("tokens from hashes are valid")
    }

    /// Adds many hashes at once; cheaper than repeated [`insert_hash`](Self::insert_hash).
    pub fn extend_hashes<I: IntoIterator<Item = u64>>(&mut self, hashes: I) {
        let r = self.r;
        self.tokens
            .extend(hashes.into_iter().map(|h| to_token(h, r) as u32));
        self.tokens.sort_unstable();
        self.tokens.dedup();
    }

    /// Adds every token of `other`.
    pub fn merge_from(&mut self, other: &Self) -> Result<()> {
        if self.r != other.r {
            return Err(Error::IncompatibleParams {
                field: "r",
                left: self.r.into(),
                right: other.r.into(),
            });
        }
        self.tokens.extend_from_slice(&other.tokens);
        self.tokens.sort_unstable();
        self.tokens.dedup();
        Ok(())
    }

    /// Log-likelihood coefficients; they have the shape of a sketch's with
    /// `t = r` and `p = 0`.
    pub fn coefficients(&self) -> Coefficients {
        let mut c = Coefficients::empty(self.r, 0);
        for token in self.tokens() {
            c.add_token_exponent(token_exponent(token, self.r));
        }
        c
    }

    /// ML estimate of the number of distinct hashes. No bias correction is
    /// applied.
    pub fn estimate(&self) -> f64 {
        solve_ml(&self.coefficients(), 1.0).value
    }

    /// Replays the tokens into a new sketch; requires `p + t <= r`.
    pub fn to_sketch(&self, params: Params) -> Result<Sketch> {
        if u32::from(params.p()) + u32::from(params.t()) > u32::from(self.r) {
            return Err(Error::Domain(format!(
                "tokens with r = {} cannot fill a sketch with {params}, need p + t <= r",
                self.r
            )));
        }
        let mut sketch = Sketch::new(params);
        for token in self.tokens() {
            sketch.insert_hash(from_token(token, self.r)?);
        }
        Ok(sketch)
    }

    /// `'T'`, `r`, little-endian `u32` count, then ascending little-endian
    /// `u32` tokens.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(TOKEN_HEADER_LEN + 4 * self.tokens.len());
        out.push(TOKEN_MAGIC);
        out.push(self.r);
        out.extend_from_slice(&(self.tokens.len() as u32).to_le_bytes());
        for t in &self.tokens {
            out.extend_from_slice(&t.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < TOKEN_HEADER_LEN {
            return Err(Error::Truncated {
                expected: TOKEN_HEADER_LEN,
                found: bytes.len(),
            });
        }
        if bytes[0] != TOKEN_MAGIC {
            return Err(Error::BadMagic {
                expected: TOKEN_MAGIC,
                found: bytes[0],
            });
        }
        let mut set = Self::new(bytes[1])?;
        let count = u32::from_le_bytes(bytes[2..6].try_into().unwrap()) as usize;
        let payload = &bytes[TOKEN_HEADER_LEN..];
        let expected = count
            .checked_mul(4)
            .ok_or_else(|| Error::MalformedTokens(format!("count {count} too large")))?;
        if payload.len() < expected {
            return Err(Error::Truncated {
                expected: TOKEN_HEADER_LEN + expected,
                found: bytes.len(),
            });
        }
        if payload.len() > expected {
            return Err(Error::TrailingBytes(payload.len() - expected));
        }
        set.tokens.reserve(count);
        for chunk in payload.chunks_exact(4) {
            let token = u32::from_le_bytes(chunk.try_into().unwrap());
            if !is_valid_token(token.into(), set.r) {
                return Err(Error::MalformedTokens(format!(
                    "token {token:#x} invalid for r = {}",
                    set.r
                )));
            }
            if set.tokens.last().is_some_and(|&last| last >= token) {
                return Err(Error::MalformedTokens(
                    "tokens not strictly ascending".into(),
                ));
            }
            set.tokens.push(token);
        }
        Ok(set)
    }
}
