//! Parsing of distinct-count lists such as `1e4,2e4` or `ladder:2..6`.

use anyhow::{bail, Context, Result};

/// Parses a nonnegative integer count, also in scientific notation (`1e6`).
pub fn parse_count(s: &str) -> Result<u64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s
        .parse()
        .with_context(|| format!("`{s}` is not a number"))?;
    if v.is_nan() || v < 0.0 || v.fract() != 0.0 || v >= u64::MAX as f64 {
        bail!("`{s}` is not a nonnegative integer count");
    }
    Ok(v as u64)
}

/// `{1, 2, 5} x 10^k` for `k` in `kmin..=kmax`.
fn ladder(spec: &str) -> Result<Vec<u64>> {
    let (lo, hi) = spec
        .split_once("..")
        .with_context(|| format!("ladder `{spec}` must look like kmin..kmax"))?;
    let lo: u32 = lo.trim().parse().context("ladder start")?;
    let hi: u32 = hi.trim().parse().context("ladder end")?;
    if lo > hi || hi > 18 {
        bail!("ladder exponents must satisfy kmin <= kmax <= 18");
    }
    let mut out = Vec::new();
    for k in lo..=hi {
        let base = 10u64.pow(k);
        out.extend([1, 2, 5].iter().filter_map(|&f| base.checked_mul(f)));
    }
    Ok(out)
}

/// Parses a comma-separated checkpoint list into a sorted, deduplicated
/// vector.
pub fn parse_checkpoints(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        match item.strip_prefix("ladder:") {
            Some(spec) => out.extend(ladder(spec)?),
            None => out.push(parse_count(item)?),
        }
    }
    if out.is_empty() {
        bail!("no checkpoints given");
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Parses `a..b` (inclusive) or a single value.
pub fn parse_range(s: &str) -> Result<(u8, u8)> {
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.trim_start_matches('=')),
        None => (s, s),
    };
    let lo: u8 = lo
        .trim()
        .parse()
        .with_context(|| format!("bad range `{s}`"))?;
    let hi: u8 = hi
        .trim()
        .parse()
        .with_context(|| format!("bad range `{s}`"))?;
    if lo > hi {
        bail!("empty range `{s}`");
    }
    Ok((lo, hi))
}
