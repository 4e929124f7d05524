//! The complete-information game at a fixed state `x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Largest agent count for brute-force Nash enumeration.
pub const MAX_ENUMERATION_AGENTS: usize = 20;

/// Binary action vector `a in {0, 1}^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionProfile(pub Vec<bool>);

impl ActionProfile {
    pub fn zeros(n: usize) -> Self {
        ActionProfile(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        ActionProfile(vec![true; n])
    }

    /// Profile whose bit `i` is bit `i` of `bits`.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        ActionProfile((0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of activating agents `|a|`.
    pub fn active(&self) -> usize {
        self.0.iter().filter(|&&a| a).count()
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut next = self.clone();
        next.0[i] = !next.0[i];
        next
    }
}

fn check_len(a: &ActionProfile, params: &ModelParams) -> Result<usize> {
    let n = params.finite_n()?;
    if a.len() != n {
        return Err(Error::ProfileLengthMismatch { expected: n, got: a.len() });
    }
    Ok(n)
}

/// Action of an agent that observes the state exactly: activate iff
/// `b(N) = g >= c(x)`.
pub fn omniscient_action(x: f64, params: &ModelParams) -> bool {
    params.g() >= params.cost(x)
}

/// `u_i(a, x) = a_i ((g / N) |a| - x^p)`.
pub fn deterministic_utility(i: usize, a: &ActionProfile, x: f64, params: &ModelParams) -> Result<f64> {
    let n = check_len(a, params)?;
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    if !a.0[i] {
        return Ok(0.0);
    }
    Ok(params.g() / n as f64 * a.active() as f64 - params.cost(x))
}

/// Pairwise potential `1/2 sum_i sum_{j != i} phi_ij(a_i, a_j, x)` with
/// `phi_ij = (g/N) a_i a_j + ((a_i + a_j - 1) / (N - 1)) (g/N - c(x))`.
pub fn potential_pairwise(a: &ActionProfile, x: f64, params: &ModelParams) -> Result<f64> {
    let n = check_len(a, params)?;
    let share = params.g() / n as f64;
    let margin = share - params.cost(x);
    let bit = |b: bool| if b { 1.0 } else { 0.0 };
    let mut total = 0.0;
    for (i, &ai) in a.0.iter().enumerate() {
        for (j, &aj) in a.0.iter().enumerate() {
            if i != j {
                total += share * bit(ai && aj) + (bit(ai) + bit(aj) - 1.0) / (n - 1) as f64 * margin;
            }
        }
    }
    Ok(0.5 * total)
}

/// Congestion-game potential `sum_{m=1}^{|a|} ((g/N) m - c(x))`, zero at the
/// all-zeros profile.
pub fn potential_congestion(a: &ActionProfile, x: f64, params: &ModelParams) -> Result<f64> {
    let n = check_len(a, params)?;
    let share = params.g() / n as f64;
    let cost = params.cost(x);
    Ok((1..=a.active()).map(|m| share * m as f64 - cost).sum())
}

/// All pure Nash equilibria at state `x`, by checking every unilateral flip
/// of every profile.
pub fn pure_nash_set(x: f64, params: &ModelParams) -> Result<Vec<ActionProfile>> {
    let n = params.finite_n()?;
    if n > MAX_ENUMERATION_AGENTS {
        return Err(Error::TooManyAgents { max: MAX_ENUMERATION_AGENTS, got: n });
    }
    let mut equilibria = Vec::new();
    for bits in 0..1u64 << n {
        let a = ActionProfile::from_bits(bits, n);
        let mut stable = true;
        for i in 0..n {
            let stay = deterministic_utility(i, &a, x, params)?;
            let deviate = deterministic_utility(i, &a.flipped(i), x, params)?;
            if deviate > stay {
                stable = false;
                break;
            }
        }
        if stable {
            equilibria.push(a);
        }
    }
    Ok(equilibria)
}
