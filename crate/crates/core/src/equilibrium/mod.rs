//! Finite-agent game: the complete-information potential game, threshold
//! best responses, existence conditions, expected utilities and learning
//! dynamics.

mod best_response;
mod conditions;
mod deterministic;
mod dynamics;
mod expected;

pub use best_response::{best_response, best_response_threshold, BestResponse, BestResponseResult, CrossingPoint};
pub(crate) use conditions::{last_cost_at_most, TIE_TOL};
pub use conditions::{sufficient_condition_high, sufficient_condition_low, threshold_upper_bound, SufficientCondition};
pub use deterministic::{
    deterministic_utility, omniscient_action, potential_congestion, potential_pairwise, pure_nash_set,
    ActionProfile, MAX_ENUMERATION_AGENTS,
};
pub use dynamics::{best_response_dynamics, DynamicsResult, DynamicsRound};
pub use expected::{
    activation_given_state, deviation_candidates, expected_potential, expected_threshold_utility,
    quadrature_deviation_audit, QuadratureAudit, QUADRATURE_AUDIT_TOL,
};
