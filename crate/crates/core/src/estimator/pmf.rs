use crate::error::{Error, Result};
use crate::params::Params;

/// Probability of register value `r` after a Poisson(`n`) number of
/// distinct insertions spread over `m` registers.
pub fn pmf_register(r: u64, n: f64, params: &Params) -> Result<f64> {
    if !params.is_valid_register(r) {
        return Err(Error::Domain(format!(
            "invalid register value {r:#x} for {params}"
        )));
    }
    if n.is_nan() || n < 0.0 {
        return Err(Error::Domain(format!(
            "distinct count {n} is negative or NaN"
        )));
    }
    let lambda = n / params.num_registers() as f64;
    let d = u64::from(params.d());
    let k = r >> d;
    let sigma = params.sigma(k)?;
    if k == 0 {
        return Ok(f64::exp(-lambda * sigma));
    }
    // P(at least one update with value u) = 1 - exp(-lambda rho(u))
    let hit = |u: u64| -> f64 { -f64::exp_m1(-lambda * params.rho(u).unwrap()) };
    let miss = |u: u64| -> f64 { f64::exp(-lambda * params.rho(u).unwrap()) };

    let mut prob = hit(k) * f64::exp(-lambda * sigma);
    for u in k.saturating_sub(d).max(1)..k {
        let bit = (r >> (u + d - k)) & 1;
        prob *= if bit == 1 { hit(u) } else { miss(u) };
    }
    Ok(prob)
}
