//! Monte-Carlo estimation error of the estimators.
//!
//! Elements are simulated by uniformly random 64-bit hashes. Beyond
//! `direct_limit` distinct insertions the fast path takes over: for every
//! register and update value it draws the number of further insertions until
//! that pair is hit for the first time (geometric with success probability
//! `rho(u) / m`) and replays these first arrivals in order. Later hits of the
//! same pair cannot change the register, so the state evolves exactly as
//! with individual insertions, up to the independence of the waiting times.
//!
//! Run `i` draws its random numbers from `ChaCha8Rng::seed_from_u64(seed)`
//! switched to stream `i`, so runs are independent and reproducible in any
//! order.

use std::io::Write;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{estimate_distinct, MartingaleSketch};
use crate::params::Params;
use crate::sketch::Sketch;
use crate::theory::{mvp_martingale, mvp_ml, theoretical_rmse};
use crate::tokens::TokenSet;

/// Distinct count after which [`simulate_fast`] stops inserting hashes.
pub const DEFAULT_DIRECT_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Bias-corrected maximum likelihood.
    Ml,
    Martingale,
    /// ML estimate from a set of hash tokens with parameter `r`.
    Tokens(u8),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimPlan {
    pub params: Params,
    pub estimator: EstimatorKind,
    /// Strictly ascending distinct counts at which estimates are taken.
    pub checkpoints: Vec<u64>,
    pub runs: usize,
    pub seed: u64,
    pub direct_limit: u64,
}

impl SimPlan {
    pub fn new(
        params: Params,
        estimator: EstimatorKind,
        checkpoints: Vec<u64>,
        runs: usize,
    ) -> Self {
        Self {
            params,
            estimator,
            checkpoints,
            runs,
            seed: 0,
            direct_limit: DEFAULT_DIRECT_LIMIT,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_direct_limit(mut self, direct_limit: u64) -> Self {
        self.direct_limit = direct_limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidPlan("runs must be positive".into()));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::InvalidPlan("no checkpoints".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPlan(
                "checkpoints must be strictly ascending".into(),
            ));
        }
        if let EstimatorKind::Tokens(r) = self.estimator {
            TokenSet::new(r)?;
            if self.last_checkpoint() > self.direct_limit {
                return Err(Error::InvalidPlan(
                    "token simulation only supports checkpoints up to the direct limit".into(),
                ));
            }
        }
        Ok(())
    }

    fn last_checkpoint(&self) -> u64 {
        self.checkpoints.last().copied().unwrap_or(0)
    }

    /// Random generator of run `run`.
    pub fn run_rng(&self, run: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(run);
        rng
    }

    /// Closed-form relative error for this plan, if one exists.
    pub fn theoretical_rmse(&self) -> Option<f64> {
        let (t, d, p) = (self.params.t(), self.params.d(), self.params.p());
        match self.estimator {
            EstimatorKind::Ml => Some(theoretical_rmse(mvp_ml(t, d), t, d, p)),
            EstimatorKind::Martingale => Some(theoretical_rmse(mvp_martingale(t, d), t, d, p)),
            EstimatorKind::Tokens(_) => None,
        }
    }
}

/// Estimator state driven by the simulation.
enum State {
    Ml(Sketch),
    Martingale(MartingaleSketch),
    Tokens(TokenSet),
}

impl State {
    fn new(plan: &SimPlan) -> Result<Self> {
        Ok(match plan.estimator {
            EstimatorKind::Ml => State::Ml(Sketch::new(plan.params)),
            EstimatorKind::Martingale => State::Martingale(MartingaleSketch::new(plan.params)),
            EstimatorKind::Tokens(r) => State::Tokens(TokenSet::new(r)?),
        })
    }

    #[inline]
    fn insert_hash(&mut self, h: u64) {
        match self {
            State::Ml(s) => {
                s.insert_hash(h);
            }
            State::Martingale(s) => {
                s.insert_hash(h);
            }
            State::Tokens(s) => {
                s.insert_hash(h);
            }
        }
    }

    #[inline]
    fn apply_update(&mut self, index: usize, u: u64) {
        match self {
            State::Ml(s) => {
                s.apply_update(index, u);
            }
            State::Martingale(s) => s.apply_update(index, u),
            State::Tokens(_) => unreachable!("token plans never use the fast path"),
        }
    }

    fn estimate(&self) -> f64 {
        match self {
            State::Ml(s) => estimate_distinct(s),
            State::Martingale(s) => s.estimate(),
            State::Tokens(s) => s.estimate(),
        }
    }
}

/// Inserts `count` random hashes, taking estimates at checkpoints in
/// `(inserted, inserted + count]`.
fn insert_direct(
    state: &mut State,
    rng: &mut ChaCha8Rng,
    checkpoints: &[u64],
    inserted: &mut u64,
    until: u64,
    out: &mut Vec<(u64, f64)>,
) {
    let start = *inserted;
    for &c in checkpoints.iter().filter(|&&c| c > start && c <= until) {
        while *inserted < c {
            state.insert_hash(rng.next_u64());
            *inserted += 1;
        }
        out.push((c, state.estimate()));
    }
    while *inserted < until {
        state.insert_hash(rng.next_u64());
        *inserted += 1;
    }
}

/// Estimates of one run at every checkpoint, inserting every element.
pub fn simulate_direct(plan: &SimPlan, run: u64) -> Result<Vec<(u64, f64)>> {
    plan.validate().or_else(|e| match e {
        // the direct path has no limit
        Error::InvalidPlan(_) if matches!(plan.estimator, EstimatorKind::Tokens(_)) => {
            plan.clone().with_direct_limit(u64::MAX).validate()
        }
        e => Err(e),
    })?;
    let mut rng = plan.run_rng(run);
    let mut state = State::new(plan)?;
    let mut out = Vec::with_capacity(plan.checkpoints.len());
    if plan.checkpoints[0] == 0 {
        out.push((0, state.estimate()));
    }
    let mut inserted = 0;
    insert_direct(
        &mut state,
        &mut rng,
        &plan.checkpoints,
        &mut inserted,
        plan.last_checkpoint(),
        &mut out,
    );
    Ok(out)
}

/// Estimates of one run at every checkpoint, switching to first-arrival
/// event replay after `plan.direct_limit` insertions.
pub fn simulate_fast(plan: &SimPlan, run: u64) -> Result<Vec<(u64, f64)>> {
    plan.validate()?;
    let mut rng = plan.run_rng(run);
    let mut state = State::new(plan)?;
    let mut out = Vec::with_capacity(plan.checkpoints.len());
    if plan.checkpoints[0] == 0 {
        out.push((0, state.estimate()));
    }
    let last = plan.last_checkpoint();
    let switch = plan.direct_limit.min(last);
    let mut inserted = 0;
    insert_direct(
        &mut state,
        &mut rng,
        &plan.checkpoints,
        &mut inserted,
        switch,
        &mut out,
    );
    if switch == last {
        return Ok(out);
    }

    let events = schedule_events(&plan.params, &mut rng, switch, last);
    let mut next = 0;
    for &c in plan.checkpoints.iter().filter(|&&c| c > switch) {
        while let Some(&(time, index, u)) = events.get(next) {
            if time > c {
                break;
            }
            state.apply_update(index as usize, u);
            next += 1;
        }
        out.push((c, state.estimate()));
    }
    Ok(out)
}

/// First arrival after `start` of every `(register, update value)` pair,
/// keeping those not later than `end`, ordered by `(time, register, u)`.
fn schedule_events(
    params: &Params,
    rng: &mut ChaCha8Rng,
    start: u64,
    end: u64,
) -> Vec<(u64, u32, u64)> {
    let m = params.num_registers() as f64;
    let probs: Vec<(u64, f64)> = (1..=params.max_update_value())
        .map(|u| (u, params.rho(u).expect("u in range") / m))
        .collect();
    let mut events = Vec::new();
    for index in 0..params.num_registers() as u32 {
        for &(u, q) in &probs {
            let time = start.saturating_add(sample_geometric(rng, q));
            if time <= end {
                events.push((time, index, u));
            }
        }
    }
    events.sort_unstable();
    events
}

/// Number of Bernoulli(`q`) trials up to and including the first success,
/// saturating at `u64::MAX`. Requires `0 < q < 1`.
pub fn sample_geometric<R: RngCore>(rng: &mut R, q: f64) -> u64 {
    // uniform in (0, 1]
    let uniform = ((rng.next_u64() >> 11) + 1) as f64 * f64::powi(2.0, -53);
    let trials = (uniform.ln() / f64::ln_1p(-q)).ceil();
    if trials < 1.0 {
        1
    } else {
        trials as u64
    }
}

/// Error statistics at one distinct count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub n: u64,
    pub runs: usize,
    pub mean_estimate: f64,
    pub rel_bias: f64,
    pub rel_rmse: f64,
    pub theoretical_rmse: Option<f64>,
}

impl ErrorRow {
    /// Standard error of the mean estimate, relative to `n`.
    pub fn rel_standard_error(&self) -> f64 {
        self.rel_rmse / (self.runs as f64).sqrt()
    }
}

/// Relative bias and RMSE of estimates of the true value `n`.
pub fn aggregate(estimates: &[f64], n: u64) -> Result<ErrorRow> {
    if estimates.len() < 2 {
        return Err(Error::TooFewRuns(estimates.len()));
    }
    if n == 0 {
        return Err(Error::Domain("relative errors need n > 0".into()));
    }
    let nf = n as f64;
    let runs = estimates.len() as f64;
    let sum: f64 = estimates.iter().sum();
    let sum_err: f64 = estimates.iter().map(|e| e - nf).sum();
    let sum_sq: f64 = estimates.iter().map(|e| (e - nf) * (e - nf)).sum();
    Ok(ErrorRow {
        n,
        runs: estimates.len(),
        mean_estimate: sum / runs,
        rel_bias: sum_err / runs / nf,
        rel_rmse: (sum_sq / runs).sqrt() / nf,
        theoretical_rmse: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

pub const CSV_HEADER: &str = "n,runs,mean_estimate,rel_bias,rel_rmse,theoretical_rmse";

impl ErrorReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for row in &self.rows {
            let theory = row
                .theoretical_rmse
                .map(|v| v.to_string())
                .unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                row.n, row.runs, row.mean_estimate, row.rel_bias, row.rel_rmse, theory
            )?;
        }
        Ok(())
    }
}

/// Per-run estimates, `estimates[run][checkpoint]`, computed in parallel.
pub fn run_estimates(plan: &SimPlan) -> Result<Vec<Vec<f64>>> {
    plan.validate()?;
    (0..plan.runs as u64)
        .into_par_iter()
        .map(|run| {
            Ok(simulate_fast(plan, run)?
                .into_iter()
                .map(|(_, e)| e)
                .collect())
        })
        .collect()
}

/// Runs the whole plan and aggregates every checkpoint.
pub fn run_plan(plan: &SimPlan) -> Result<ErrorReport> {
    plan.validate()?;
    if plan.runs < 2 {
        return Err(Error::TooFewRuns(plan.runs));
    }
    if plan.checkpoints[0] == 0 {
        return Err(Error::InvalidPlan(
            "checkpoint 0 has no relative error".into(),
        ));
    }
    let estimates = run_estimates(plan)?;
    let theory = plan.theoretical_rmse();
    let rows = plan
        .checkpoints
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let column: Vec<f64> = estimates.iter().map(|run| run[i]).collect();
            let mut row = aggregate(&column, n)?;
            row.theoretical_rmse = theory;
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport { rows })
}
