//! Ex-ante expected utilities and potential of threshold profiles.
//!
//! Signals are independent given the state, so both quantities reduce to a
//! one-dimensional integral over the Gamma prior of products of per-agent
//! activation probabilities `F_j(x) = P(agent j activates | X = x)`.

use serde::{Deserialize, Serialize};

use crate::dist::{gamma_pdf_unchecked, poisson_cdf_unchecked, poisson_sf_unchecked, prior_upper_cutoff};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::policy::{PolicyKind, Threshold, ThresholdProfile};
use crate::quadrature::{integrate, QuadratureSpec};

use super::conditions::threshold_upper_bound;

/// Prior tail mass dropped from the integration domain.
const DOMAIN_TAIL: f64 = 1e-14;

/// Default tolerance of the exhaustive deviation audit.
pub const QUADRATURE_AUDIT_TOL: f64 = 1e-6;

/// `P(policy activates | X = x)`.
pub fn activation_given_state(kind: PolicyKind, tau: Threshold, x: f64, params: &ModelParams) -> f64 {
    let rate = params.lambda() * x;
    // The signal is zero almost surely at x = 0.
    let low = match tau.as_i64() {
        None => return if kind == PolicyKind::Low { 1.0 } else { 0.0 },
        Some(t) if rate <= 0.0 => if t >= 0 { 1.0 } else { 0.0 },
        Some(t) if kind == PolicyKind::High => return poisson_sf_unchecked(t, rate),
        Some(t) => poisson_cdf_unchecked(t, rate),
    };
    match kind {
        PolicyKind::Low => low,
        PolicyKind::High => 1.0 - low,
    }
}

fn never_active(kind: PolicyKind, tau: Threshold) -> bool {
    matches!((kind, tau), (PolicyKind::Low, Threshold::Never) | (PolicyKind::High, Threshold::Unbounded))
}

/// Whether the policy activates at some signal `y` with `y + k + p <= 0`,
/// where the posterior cost moment diverges.
fn activates_at_pole(kind: PolicyKind, tau: Threshold, params: &ModelParams) -> bool {
    let last_pole = -(params.p() as i64) - params.k() as i64;
    if last_pole < 0 {
        return false;
    }
    match kind {
        PolicyKind::Low => tau != Threshold::Never,
        PolicyKind::High => tau.as_i64().is_some_and(|t| t < last_pole),
    }
}

fn check_profile(profile: &ThresholdProfile, params: &ModelParams) -> Result<usize> {
    let n = params.finite_n()?;
    if profile.len() != n {
        return Err(Error::ProfileLengthMismatch { expected: n, got: profile.len() });
    }
    Ok(n)
}

fn over_prior<F: Fn(f64) -> f64>(f: F, params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    let upper = prior_upper_cutoff(params, DOMAIN_TAIL);
    let (k, theta) = (params.k() as f64, params.theta());
    integrate(|x| if x > 0.0 { gamma_pdf_unchecked(x, k, theta) * f(x) } else { 0.0 }, 0.0, upper, spec)
}

/// `U_i(tau) = E[F_i(X) ((g/N)(sum_{j != i} F_j(X) + 1) - X^p)]`.
///
/// Negative infinity when agent `i` activates at a signal whose posterior
/// cost moment diverges (`p < 0`, `y + k + p <= 0`).
pub fn expected_threshold_utility(
    i: usize,
    profile: &ThresholdProfile,
    params: &ModelParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let n = check_profile(profile, params)?;
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let kind = profile.kind();
    let own = profile.taus()[i];
    if never_active(kind, own) {
        return Ok(0.0);
    }
    if activates_at_pole(kind, own, params) {
        return Ok(f64::NEG_INFINITY);
    }
    let others = profile.others(i).counts();
    let share = params.g() / n as f64;
    over_prior(
        |x| {
            let f_i = activation_given_state(kind, own, x, params);
            let expected_others: f64 =
                others.iter().map(|&(t, c)| c as f64 * activation_given_state(kind, t, x, params)).sum();
            f_i * (share * (expected_others + 1.0) - params.cost(x))
        },
        params,
        spec,
    )
}

/// Expected pairwise potential `E[Phi(a(Y), X)]`. Given `X = x`, with
/// `S = sum_i F_i`, it equals `((g/N)(S^2 - sum_i F_i^2) + (g/N - x^p)(2S - N)) / 2`.
///
/// Undefined when `E[X^p]` diverges (`k + p <= 0`): the `N x^p / 2` term is
/// then infinite for every profile.
pub fn expected_potential(profile: &ThresholdProfile, params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    let n = check_profile(profile, params)? as f64;
    if params.k() as i64 + params.p() as i64 <= 0 {
        return Err(Error::Domain("expected potential diverges when k + p <= 0".into()));
    }
    let kind = profile.kind();
    let groups = profile.counts();
    let share = params.g() / n;
    over_prior(
        |x| {
            let (mut s, mut s2) = (0.0, 0.0);
            for &(t, c) in &groups {
                let f = activation_given_state(kind, t, x, params);
                s += c as f64 * f;
                s2 += c as f64 * f * f;
            }
            0.5 * (share * (s * s - s2) + (share - params.cost(x)) * (2.0 * s - n))
        },
        params,
        spec,
    )
}

/// Single-agent deviations tried by the audits: `Never` and `0..=T` for the
/// low kind; for the high kind `Never` (always active), `Unbounded` (never
/// active) and `0..=cap`, where `cap` covers the start of the monotone region
/// and every finite threshold in the profile with margin.
pub fn deviation_candidates(profile: &ThresholdProfile, params: &ModelParams) -> Result<Vec<Threshold>> {
    let mut out = vec![Threshold::Never];
    match profile.kind() {
        PolicyKind::Low => {
            if let Some(t) = threshold_upper_bound(params)? {
                out.extend((0..=t).map(Threshold::At));
            }
        }
        PolicyKind::High => {
            let start = (1 - params.p() as i64 - params.k() as i64).max(0) as u32;
            let top = profile.taus().iter().filter_map(|t| t.as_i64()).max().unwrap_or(0).max(0) as u32;
            out.push(Threshold::Unbounded);
            out.extend((0..=start.max(top) * 2 + 20).map(Threshold::At));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureAudit {
    /// Largest `U_i(tau', tau_-i) - U_i(tau)` over agents and candidates.
    pub max_gain: f64,
    pub agent: usize,
    pub deviation: Threshold,
    pub tolerance: f64,
    pub passes: bool,
}

/// Exhaustive single-agent deviation check of `profile` by quadrature.
pub fn quadrature_deviation_audit(
    profile: &ThresholdProfile,
    params: &ModelParams,
    spec: &QuadratureSpec,
    tolerance: f64,
) -> Result<QuadratureAudit> {
    let n = check_profile(profile, params)?;
    let candidates = deviation_candidates(profile, params)?;
    let mut best = QuadratureAudit {
        max_gain: f64::NEG_INFINITY,
        agent: 0,
        deviation: profile.taus().first().copied().unwrap_or(Threshold::Never),
        tolerance,
        passes: true,
    };
    for i in 0..n {
        let incumbent = expected_threshold_utility(i, profile, params, spec)?;
        for &tau in &candidates {
            if tau == profile.taus()[i] {
                continue;
            }
            let gain = expected_threshold_utility(i, &profile.with(i, tau), params, spec)? - incumbent;
            if gain > best.max_gain {
                best = QuadratureAudit { max_gain: gain, agent: i, deviation: tau, ..best };
            }
        }
    }
    best.max_gain = best.max_gain.max(0.0);
    best.passes = best.max_gain < tolerance;
    Ok(best)
}
