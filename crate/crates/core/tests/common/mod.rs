#![allow(dead_code)]

use std::collections::BTreeSet;

use exaloglog::{Coefficients, Params};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn hashes(rng: &mut impl RngCore, n: usize) -> Vec<u64> {
    (0..n).map(|_| rng.next_u64()).collect()
}

/// Log-uniform integer in `[1, max]`.
pub fn log_uniform(rng: &mut impl Rng, max: f64) -> usize {
    f64::exp(rng.random::<f64>() * max.ln()).round().max(1.0) as usize
}

/// Register index and update value, bit by bit.
pub fn oracle_split(h: u64, t: u32, p: u32) -> (usize, u64) {
    let mut index = 0usize;
    for i in 0..p {
        if h >> (t + i) & 1 == 1 {
            index |= 1 << i;
        }
    }
    let mut nlz = 0u64;
    let mut bit = 63i32;
    while bit >= (p + t) as i32 && h >> bit & 1 == 0 {
        nlz += 1;
        bit -= 1;
    }
    let low = h & ((1u64 << t) - 1);
    (index, nlz * (1 << t) + low + 1)
}

/// Keeps the full set of update values seen per register.
#[derive(Clone)]
pub struct SetModel {
    pub t: u32,
    pub d: u32,
    pub p: u32,
    pub seen: Vec<BTreeSet<u64>>,
}

impl SetModel {
    pub fn new(params: Params) -> Self {
        Self {
            t: params.t().into(),
            d: params.d().into(),
            p: params.p().into(),
            seen: vec![BTreeSet::new(); params.num_registers()],
        }
    }

    pub fn insert(&mut self, h: u64) {
        let (i, u) = oracle_split(h, self.t, self.p);
        self.seen[i].insert(u);
    }

    pub fn union(&mut self, other: &Self) {
        for (a, b) in self.seen.iter_mut().zip(&other.seen) {
            a.extend(b);
        }
    }

    /// Register encoding: maximum `k` above one bit per value `k - 1 ..= k - d`,
    /// where the value 0 counts as always seen.
    pub fn registers(&self) -> Vec<u64> {
        self.seen
            .iter()
            .map(|s| {
                let Some(&k) = s.last() else { return 0 };
                let mut r = k << self.d;
                for j in 1..=u64::from(self.d) {
                    if j <= k && (j == k || s.contains(&(k - j))) {
                        r |= 1 << (u64::from(self.d) - j);
                    }
                }
                r
            })
            .collect()
    }
}

/// Derivative of the log-likelihood in `n`, decreasing.
fn score(c: &Coefficients, m: f64, n: f64) -> f64 {
    let mut g = -c.a() / m;
    for j in c.exponent_range() {
        let b = c.b(j);
        if b > 0 {
            let scale = m * 2f64.powi(j as i32);
            g += b as f64 / scale / f64::exp_m1(n / scale);
        }
    }
    g
}

/// Root of the score by bisection on `ln n`.
pub fn bisection_ml(c: &Coefficients, m: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0f64, 60.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if score(c, m, mid.exp()) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

pub fn log_likelihood(c: &Coefficients, m: f64, n: f64) -> f64 {
    let mut l = -n / m * c.a();
    for j in c.exponent_range() {
        let b = c.b(j);
        if b > 0 {
            l += b as f64 * f64::ln(-f64::exp_m1(-n / (m * 2f64.powi(j as i32))));
        }
    }
    l
}

/// Maximizer of the log-likelihood by golden-section search on `ln n`.
pub fn golden_section_ml(c: &Coefficients, m: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (-10.0f64, 50.0f64);
    let f = |x: f64| log_likelihood(c, m, x.exp());
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// `f(x) = a 2^kmax x - sum_j b_(kmax - j) 2^j x / ((1 + x)^(2^j) - 1)`.
pub fn newton_target(c: &Coefficients, k_max: u32, x: f64) -> f64 {
    let mut f = c.a() * 2f64.powi(k_max as i32) * x;
    for k in c.exponent_range() {
        let b = c.b(k);
        if b > 0 {
            let j = k_max - k;
            let pow = 2f64.powi(j as i32);
            f -= b as f64 * pow * x / f64::exp_m1(pow * f64::ln_1p(x));
        }
    }
    f
}

/// Random coefficients with a nonzero `a` and at least one nonzero `b`,
/// unconstrained apart from the exponent range.
pub fn fuzz_coefficients_unconstrained(rng: &mut impl Rng) -> Coefficients {
    let (t, p, b) = fuzz_b(rng);
    let a_scaled = (rng.next_u64() >> rng.random_range(0..48)).max(1);
    Coefficients::new(t, p, a_scaled, b).unwrap()
}

/// Random coefficients that respect the probability budget of a state:
/// `a + sum_j b_j 2^-j <= 2^p`, since every register splits one unit of
/// update-value probability between `a` and the observed values.
pub fn fuzz_coefficients(rng: &mut impl Rng) -> Coefficients {
    loop {
        let (t, p, b) = fuzz_b(rng);
        let m = f64::powi(2.0, p.into());
        let observed: f64 = (0..b.len())
            .map(|j| b[j] as f64 * f64::powi(2.0, -(j as i32)))
            .sum();
        if observed >= m {
            continue;
        }
        // log-uniform share of the remaining mass
        let budget = (m - observed) * f64::powi(2.0, 64 - i32::from(p));
        let a_scaled =
            (budget * f64::powf(2.0, -rng.random_range(0.0..48.0))).min(u64::MAX as f64) as u64;
        if a_scaled > 0 {
            return Coefficients::new(t, p, a_scaled, b).unwrap();
        }
    }
}

fn fuzz_b(rng: &mut impl Rng) -> (u8, u8, [u64; exaloglog::estimator::EXPONENT_SLOTS]) {
    let t: u8 = rng.random_range(0..=3);
    let p: u8 = rng.random_range(2..=26);
    let lo = u32::from(t) + 1;
    let hi = 64 - u32::from(p);
    let k_min = rng.random_range(lo..=hi);
    let k_max = rng.random_range(k_min..=hi.min(k_min + 40));
    let mut b = [0u64; exaloglog::estimator::EXPONENT_SLOTS];
    let scale = 1u64 << rng.random_range(0..=p.min(20));
    for slot in b.iter_mut().take(k_max as usize + 1).skip(k_min as usize) {
        if rng.random_bool(0.7) {
            *slot = rng.random_range(0..=scale);
        }
    }
    if b.iter().all(|&x| x == 0) {
        b[k_max as usize] = 1;
    }
    (t, p, b)
}

/// Random parameters with `t <= 3`, `p <= max_p`.
pub fn fuzz_params(rng: &mut impl Rng, max_p: u8) -> Params {
    let t = rng.random_range(0..=3);
    let d = rng.random_range(0..=32);
    let p = rng.random_range(2..=max_p);
    Params::new(t, d, p).unwrap()
}

/// Packs register values into the serialized form and parses it back.
pub fn sketch_from_registers(params: Params, registers: &[u64]) -> exaloglog::Sketch {
    let width = params.register_bits() as usize;
    let mut bytes = vec![exaloglog::sketch::MAGIC, params.t(), params.d(), params.p()];
    let mut payload = vec![0u8; params.register_bytes()];
    for (i, &r) in registers.iter().enumerate() {
        for bit in 0..width {
            if r >> bit & 1 == 1 {
                let pos = i * width + bit;
                payload[pos / 8] |= 1 << (pos % 8);
            }
        }
    }
    bytes.extend(payload);
    exaloglog::Sketch::from_bytes(&bytes).unwrap()
}

/// Random but valid register contents: maxima scattered around a random
/// level, indicator bits set with a random density.
pub fn random_register_state(rng: &mut impl Rng) -> exaloglog::Sketch {
    let params = fuzz_params(rng, 12);
    let d = u64::from(params.d());
    let u_max = params.max_update_value() as i64;
    let centre = rng.random_range(0..=u_max);
    let spread = rng.random_range(0..=60i64);
    let density: f64 = rng.random();
    let zeros: f64 = rng.random_range(0.0..0.2);
    let registers: Vec<u64> = (0..params.num_registers())
        .map(|_| {
            if rng.random_bool(zeros) {
                return 0;
            }
            let k = (centre + rng.random_range(-spread..=spread)).clamp(1, u_max) as u64;
            let mut r = k << d;
            for j in 1..=d.min(k) {
                if j == k || rng.random_bool(density) {
                    r |= 1 << (d - j);
                }
            }
            r
        })
        .collect();
    sketch_from_registers(params, &registers)
}
