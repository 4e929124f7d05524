use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{benefit_estimate, cost_or_infinite, in_monotone_region};
use crate::params::ModelParams;
use crate::policy::{PolicyKind, Threshold, ThresholdProfile};

use super::conditions::threshold_upper_bound;

/// Scan length past which a high-kind crossing is reported as missing.
const HIGH_SCAN_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BestResponse {
    Threshold(u32),
    /// Low kind: no signal makes activation worthwhile.
    Never,
    /// High kind: activation is worthwhile at every signal.
    Always,
}

impl BestResponse {
    /// Cutoff encoding; both `Never` and `Always` map to `tau = -1`.
    pub fn to_threshold(self) -> Threshold {
        match self {
            BestResponse::Threshold(t) => Threshold::At(t),
            BestResponse::Never | BestResponse::Always => Threshold::Never,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingPoint {
    pub y: u64,
    pub benefit: f64,
    /// Infinite where the posterior moment diverges.
    pub cost: f64,
    pub monotone_region: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponseResult {
    pub tau_star: BestResponse,
    /// Every scanned signal up to and including the first one past the crossing.
    pub crossing_diagnostics: Vec<CrossingPoint>,
}

fn check_kind(kind: PolicyKind, params: &ModelParams) -> Result<()> {
    match (kind, params.p() > 0) {
        (PolicyKind::Low, true) | (PolicyKind::High, false) => Ok(()),
        _ => Err(Error::KindMismatch(params.p())),
    }
}

fn point(y: u64, others: &ThresholdProfile, params: &ModelParams) -> Result<CrossingPoint> {
    Ok(CrossingPoint {
        y,
        benefit: benefit_estimate(y, others, params)?,
        cost: cost_or_infinite(y, params),
        monotone_region: in_monotone_region(y, params),
    })
}

/// Best threshold against the `N - 1` thresholds in `others`.
///
/// Low kind: `max{y : b(y) >= c(y)}`, scanned up to the threshold bound and
/// capped there. High kind: `max{y : b(y) < c(y)}`, with
/// `Always` when there is no such `y`.
pub fn best_response(others: &ThresholdProfile, params: &ModelParams) -> Result<BestResponseResult> {
    let kind = others.kind();
    check_kind(kind, params)?;
    let n = params.finite_n()?;
    if others.len() != n - 1 {
        return Err(Error::ProfileLengthMismatch { expected: n - 1, got: others.len() });
    }
    let mut diagnostics = Vec::new();
    match kind {
        PolicyKind::Low => {
            // Beyond the bound c(y) >= g >= b(y), so activation there is at
            // best a tie; the scan stops at the bound and records one more point.
            let bound = threshold_upper_bound(params)?.map(u64::from);
            let mut y = 0u64;
            loop {
                let pt = point(y, others, params)?;
                diagnostics.push(pt);
                if pt.benefit < pt.cost || bound.is_none_or(|t| y > t) {
                    let tau_star = match y {
                        0 => BestResponse::Never,
                        _ => BestResponse::Threshold((y - 1) as u32),
                    };
                    return Ok(BestResponseResult { tau_star, crossing_diagnostics: diagnostics });
                }
                y += 1;
            }
        }
        PolicyKind::High => {
            // Past the start of the monotone region the cost decreases and
            // the benefit increases, so the first activation there is final.
            let monotone_from = (1 - params.p() as i64 - params.k() as i64).max(0) as u64;
            let mut last_idle: Option<u64> = None;
            for y in 0..HIGH_SCAN_LIMIT {
                let pt = point(y, others, params)?;
                diagnostics.push(pt);
                if pt.benefit < pt.cost {
                    last_idle = Some(y);
                } else if y >= monotone_from {
                    let tau_star = match last_idle {
                        None => BestResponse::Always,
                        Some(t) => BestResponse::Threshold(
                            u32::try_from(t).map_err(|_| Error::NoSolution("threshold exceeds u32".into()))?,
                        ),
                    };
                    return Ok(BestResponseResult { tau_star, crossing_diagnostics: diagnostics });
                }
            }
            Err(Error::NoSolution(format!("no crossing within {HIGH_SCAN_LIMIT} signals")))
        }
    }
}

/// Best response of agent `i` to the rest of `profile`.
pub fn best_response_threshold(i: usize, profile: &ThresholdProfile, params: &ModelParams) -> Result<BestResponseResult> {
    if i >= profile.len() {
        return Err(Error::IndexOutOfRange { index: i, n: profile.len() });
    }
    best_response(&profile.others(i), params)
}
