//! Closed-form space efficiency of the register layout.
//!
//! The memory-variance product (MVP) is the relative variance of an
//! estimator multiplied by the state size in bits.

use crate::error::{Error, Result};

/// Direct summation terms before the asymptotic tail takes over.
const DIRECT_TERMS: usize = 64;

/// Bernoulli numbers `B_2, B_4, ..., B_10`.
const BERNOULLI: [f64; 5] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0];

/// Largest `d` on the grids of [`mvp_grid_argmin`].
pub const GRID_MAX_D: u8 = 32;

/// Which estimator an MVP refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvpKind {
    Ml,
    Martingale,
}

/// `(t, d)` together with the derived base `b = 2^(2^-t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConfig {
    pub t: u8,
    pub d: u8,
}

impl TheoryConfig {
    pub fn new(t: u8, d: u8) -> Self {
        Self { t, d }
    }

    pub fn base(&self) -> f64 {
        base(self.t)
    }

    /// Bits of the register maximum field, `6 + t`.
    pub fn max_field_bits(&self) -> u32 {
        6 + u32::from(self.t)
    }

    pub fn register_bits(&self) -> u32 {
        self.max_field_bits() + u32::from(self.d)
    }

    /// `b^-d / (b - 1)`
    fn tail(&self) -> f64 {
        let b = self.base();
        b.powi(-i32::from(self.d)) / (b - 1.0)
    }

    pub fn mvp(&self, kind: MvpKind) -> f64 {
        match kind {
            MvpKind::Ml => mvp_ml(self.t, self.d),
            MvpKind::Martingale => mvp_martingale(self.t, self.d),
        }
    }
}

/// `2^(2^-t)`
pub fn base(t: u8) -> f64 {
    f64::powf(2.0, f64::powi(0.5, i32::from(t)))
}

/// Hurwitz zeta `sum_{k>=0} (k + q)^-s` for `s > 1`, `q > 0`.
pub fn hurwitz_zeta(s: f64, q: f64) -> Result<f64> {
    if s.is_nan() || s <= 1.0 || s.is_infinite() {
        return Err(Error::Domain(format!("zeta needs s > 1, got {s}")));
    }
    if q.is_nan() || q <= 0.0 || q.is_infinite() {
        return Err(Error::Domain(format!("zeta needs q > 0, got {q}")));
    }
    let mut sum = 0.0;
    for k in (0..DIRECT_TERMS).rev() {
        sum += (k as f64 + q).powf(-s);
    }
    // Euler-Maclaurin tail starting at x = N + q
    let x = DIRECT_TERMS as f64 + q;
    let x_s = x.powf(-s);
    let mut tail = x * x_s / (s - 1.0) + 0.5 * x_s;
    // term_j = B_2j / (2j)! * s (s+1) ... (s+2j-2) * x^-(s+2j-1)
    let mut rising = s;
    let mut factorial = 2.0;
    let mut power = x_s / x;
    for (j, b) in BERNOULLI.iter().enumerate() {
        tail += b / factorial * rising * power;
        let k = 2.0 * j as f64;
        rising *= (s + k + 1.0) * (s + k + 2.0);
        factorial *= (k + 3.0) * (k + 4.0);
        power /= x * x;
    }
    Ok(sum + tail)
}

/// MVP of an efficient estimator on a densely packed register array.
pub fn mvp_ml(t: u8, d: u8) -> f64 {
    let cfg = TheoryConfig::new(t, d);
    let z = hurwitz_zeta(2.0, 1.0 + cfg.tail()).expect("argument above 1");
    f64::from(cfg.register_bits()) * cfg.base().ln() / z
}

/// MVP of the martingale estimator on a densely packed register array.
pub fn mvp_martingale(t: u8, d: u8) -> f64 {
    let cfg = TheoryConfig::new(t, d);
    f64::from(cfg.register_bits()) * cfg.base().ln() / 2.0 * (1.0 + cfg.tail())
}

/// Expected relative standard error `sqrt(mvp / ((6 + t + d) 2^p))`.
pub fn theoretical_rmse(mvp: f64, t: u8, d: u8, p: u8) -> f64 {
    let bits = f64::from(TheoryConfig::new(t, d).register_bits());
    (mvp / (bits * f64::powi(2.0, i32::from(p)))).sqrt()
}

/// Minimum of the MVP over `t in t_range`, `d in d_range`, as `(t, d, mvp)`.
pub fn mvp_grid_argmin(
    kind: MvpKind,
    t_range: std::ops::RangeInclusive<u8>,
    d_range: std::ops::RangeInclusive<u8>,
) -> Option<(u8, u8, f64)> {
    let mut best: Option<(u8, u8, f64)> = None;
    for t in t_range {
        for d in d_range.clone() {
            let v = TheoryConfig::new(t, d).mvp(kind);
            if best.map_or(true, |(_, _, b)| v < b) {
                best = Some((t, d, v));
            }
        }
    }
    best
}
