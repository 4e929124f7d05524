use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::ModelParams;
use crate::policy::{PolicyKind, ThresholdProfile};

use super::best_response::best_response_threshold;
use super::conditions::{sufficient_condition_high, sufficient_condition_low};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsRound {
    pub round: usize,
    pub profile: ThresholdProfile,
    pub changed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsResult {
    pub profile: ThresholdProfile,
    pub converged: bool,
    /// Full passes performed, including the final unchanged one.
    pub rounds: usize,
    pub trace: Vec<DynamicsRound>,
    pub warnings: Vec<String>,
}

/// Round-robin best-response dynamics: agents `0..N` update in index order
/// within a round, each against the current thresholds of the others. Stops
/// after a round with no change or after `max_rounds` rounds.
pub fn best_response_dynamics(
    initial: &ThresholdProfile,
    params: &ModelParams,
    max_rounds: usize,
) -> Result<DynamicsResult> {
    let mut warnings = Vec::new();
    let condition = match initial.kind() {
        PolicyKind::Low => sufficient_condition_low(params),
        PolicyKind::High => sufficient_condition_high(params),
    };
    match condition {
        Ok(c) if !c.holds => warnings.push(format!(
            "sufficient condition fails (g = {}, critical gain {}); single crossing is not guaranteed",
            params.g(),
            c.critical_gain
        )),
        Ok(_) => {}
        Err(e) => warnings.push(format!("sufficient condition unavailable: {e}")),
    }

    let mut profile = initial.clone();
    let mut trace = Vec::new();
    for round in 1..=max_rounds {
        let mut changed = 0;
        for i in 0..profile.len() {
            let tau = best_response_threshold(i, &profile, params)?.tau_star.to_threshold();
            if tau != profile.taus()[i] {
                profile.set(i, tau);
                changed += 1;
            }
        }
        trace.push(DynamicsRound { round, profile: profile.clone(), changed });
        if changed == 0 {
            return Ok(DynamicsResult { profile, converged: true, rounds: round, trace, warnings });
        }
    }
    Ok(DynamicsResult { profile, converged: false, rounds: max_rounds, trace, warnings })
}
