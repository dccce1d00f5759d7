//! Maximum-likelihood estimation by Newton's method.
//!
//! With `x = exp(n / (m 2^kmax)) - 1` the likelihood equation becomes
//! `f(x) = a 2^kmax x - sum_{j=0}^{kmax-kmin} b_{kmax-j} 2^j x / ((1+x)^(2^j) - 1) = 0`.
//! `f` is strictly increasing and concave on `x >= 0`, so Newton iterates
//! started left of the root increase monotonically towards it.

use super::coefficients::Coefficients;
use crate::params::pow2_neg;

/// Newton iterations are capped here. Sketch states need at most ~10.
pub const MAX_NEWTON_ITERATIONS: u32 = 64;

/// Result of [`solve_ml`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlEstimate {
    /// Distinct-count estimate; `0` for the empty state, `+inf` when every
    /// register is saturated.
    pub value: f64,
    /// Newton steps evaluated (0 when the start point is already the root).
    pub iterations: u32,
    /// Set if the loop stopped at [`MAX_NEWTON_ITERATIONS`].
    pub hit_iteration_cap: bool,
}

/// Newton start point and upper bound of the root in `x`-space, together
/// with the exponent range of nonzero `b_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lower: f64,
    pub upper: f64,
    pub k_min: u32,
    pub k_max: u32,
}

struct Summary {
    k_min: u32,
    k_max: u32,
    b_sum: f64,
    /// `sum_j b_j 2^(kmax - j)`
    b_pow: f64,
    /// `a 2^kmax`
    a_scaled_to_kmax: f64,
}

fn summarize(c: &Coefficients) -> Option<Summary> {
    let mut k_min = None;
    let mut k_max = 0;
    let mut b_sum = 0.0;
    let mut b_pow = 0.0;
    for j in c.exponent_range() {
        let b = c.b(j);
        if b > 0 {
            k_min.get_or_insert(j);
            k_max = j;
            b_sum += b as f64;
            b_pow += b as f64 * pow2_neg(j);
        }
    }
    let k_min = k_min?;
    let scale = f64::powi(2.0, k_max as i32);
    Some(Summary {
        k_min,
        k_max,
        b_sum,
        b_pow: b_pow * scale,
        a_scaled_to_kmax: c.a() * scale,
    })
}

/// Bracket of the root of `f` derived from Jensen's and Bernoulli's
/// inequalities. `None` for the empty state or when `a = 0`.
pub fn root_bracket(c: &Coefficients) -> Option<RootBracket> {
    let s = summarize(c)?;
    if c.a_scaled() == 0 {
        return None;
    }
    let x = s.b_pow / s.a_scaled_to_kmax;
    Some(RootBracket {
        lower: f64::exp_m1(f64::ln_1p(x) * (s.b_sum / s.b_pow)),
        upper: s.b_sum / s.a_scaled_to_kmax,
        k_min: s.k_min,
        k_max: s.k_max,
    })
}

/// Solves the ML equation for coefficients of a state with `m` registers
/// (`m = 1` for token sets).
pub fn solve_ml(c: &Coefficients, m: f64) -> MlEstimate {
    let mut out = MlEstimate {
        value: 0.0,
        iterations: 0,
        hit_iteration_cap: false,
    };
    let Some(s) = summarize(c) else {
        return out;
    };
    if c.a_scaled() == 0 {
        out.value = f64::INFINITY;
        return out;
    }
    let b = c.b_table();
    let mut x = s.b_pow / s.a_scaled_to_kmax;
    if s.k_min < s.k_max {
        x = f64::exp_m1(f64::ln_1p(x) * (s.b_sum / s.b_pow));
        loop {
            out.iterations += 1;
            let mut lambda = 1.0;
            let mut eta = 0.0;
            let mut y = x;
            let mut k = s.k_max;
            let mut sum_a = b[k as usize] as f64;
            let mut sum_b = 0.0;
            loop {
                k -= 1;
                let z = 2.0 / (2.0 + y);
                lambda *= z;
                eta = eta * (2.0 - z) + (1.0 - z);
                let bk = b[k as usize] as f64;
                sum_a += bk * lambda;
                sum_b += bk * lambda * eta;
                if k <= s.k_min {
                    break;
                }
                y *= y + 2.0;
            }
            let ax = s.a_scaled_to_kmax * x;
            if sum_a <= ax {
                break;
            }
            let previous = x;
            x *= 1.0 + (sum_a - ax) / (sum_b + ax);
            if x <= previous {
                break;
            }
            if out.iterations >= MAX_NEWTON_ITERATIONS {
                out.hit_iteration_cap = true;
                break;
            }
        }
    }
    out.value = m * f64::powi(2.0, s.k_max as i32) * f64::ln_1p(x);
    out
}
