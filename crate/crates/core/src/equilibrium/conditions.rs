//! Sufficient conditions for threshold equilibria and the threshold bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::cost_estimate;
use crate::params::ModelParams;
use crate::special::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientCondition {
    pub holds: bool,
    pub critical_gain: f64,
}

/// Low-threshold existence condition (`p > 0`): holds iff
/// `g > N c(0) / ((N - 1) rho^k + 1)` with `rho = (theta + lambda) / (theta + 2 lambda)`.
pub fn sufficient_condition_low(params: &ModelParams) -> Result<SufficientCondition> {
    if params.p() <= 0 {
        return Err(Error::WrongSign("p > 0"));
    }
    let n = params.finite_n()? as f64;
    let cost_at_zero = cost_estimate(0, params)?;
    let rho_k = params.cross_ratio().powi(params.k() as i32);
    let critical_gain = n * cost_at_zero / ((n - 1.0) * rho_k + 1.0);
    Ok(SufficientCondition { holds: params.g() > critical_gain, critical_gain })
}

/// High-threshold existence condition (`p < 0`): holds iff
/// `g < (lambda + theta)^(-p) / Γ(1 - p) * [1 - ((N - 1)/N) (1 - p) rho^(1 - p)]^(-1)`.
pub fn sufficient_condition_high(params: &ModelParams) -> Result<SufficientCondition> {
    let p = params.p();
    if p >= 0 {
        return Err(Error::WrongSign("p < 0"));
    }
    let n = params.finite_n()? as f64;
    let q = (1 - p) as f64;
    let bracket = 1.0 - (n - 1.0) / n * q * params.cross_ratio().powf(q);
    if !(bracket > 0.0) {
        return Err(Error::DegenerateBound(bracket));
    }
    let scale = (-(p as f64) * params.posterior_rate().ln() - ln_gamma(q)).exp();
    let critical_gain = scale / bracket;
    Ok(SufficientCondition { holds: params.g() < critical_gain, critical_gain })
}

/// Relative margin under which `c(y)` and `g` are treated as equal.
pub(crate) const TIE_TOL: f64 = 1e-12;

/// Largest signal at which the cost estimate is still below `g`; `None` when
/// even `c(0) >= g`. No low best response can exceed it.
///
/// Costs within a relative `1e-12` of `g` count as ties, so exact rational
/// ties such as `66 / 1.1 = 60` are not lost to rounding.
pub fn threshold_upper_bound(params: &ModelParams) -> Result<Option<u32>> {
    if params.p() <= 0 {
        return Err(Error::WrongSign("p > 0"));
    }
    last_cost_at_most(params, params.g() * (1.0 - TIE_TOL))
}

/// Largest `y` with `c(y) <= bound` for increasing costs (`p > 0`).
pub(crate) fn last_cost_at_most(params: &ModelParams, bound: f64) -> Result<Option<u32>> {
    let below = |y: u64| -> Result<bool> { Ok(cost_estimate(y, params)? <= bound) };
    if !below(0)? {
        return Ok(None);
    }
    // Bracket by doubling, then bisect.
    let mut lo = 0u64;
    let mut hi = 1u64;
    while below(hi)? {
        lo = hi;
        hi = hi.checked_mul(2).ok_or_else(|| Error::NoSolution("threshold bound overflows".into()))?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    u32::try_from(lo).map(Some).map_err(|_| Error::NoSolution("threshold bound exceeds u32".into()))
}
