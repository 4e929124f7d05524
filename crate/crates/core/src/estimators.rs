//! Conditional cost and benefit estimates entering an agent's best response.

use crate::dist::cross_belief;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::policy::{PolicyKind, Threshold, ThresholdProfile};
use crate::special::ln_gamma;

/// Exponents up to this size use the exact rising/falling factorial product.
const PRODUCT_MAX_EXPONENT: i32 = 16;

/// `E[X^p | Y_i = y] = Γ(p + y + k) / (Γ(y + k) (lambda + theta)^p)`.
///
/// Undefined (the posterior moment diverges) when `p + y + k <= 0`.
pub fn cost_estimate(y: u64, params: &ModelParams) -> Result<f64> {
    let p = params.p();
    let shape = y as f64 + params.k() as f64;
    let rate = params.posterior_rate();
    if shape + p as f64 <= 0.0 {
        return Err(Error::Domain(format!("posterior moment of order {p} diverges at y = {y}")));
    }
    Ok(match p {
        1 => shape / rate,
        -1 => rate / (shape - 1.0),
        _ if p.abs() <= PRODUCT_MAX_EXPONENT => {
            if p > 0 {
                (0..p).map(|i| (shape + i as f64) / rate).product()
            } else {
                (1..=-p).map(|i| rate / (shape - i as f64)).product()
            }
        }
        _ => (ln_gamma(shape + p as f64) - ln_gamma(shape) - p as f64 * rate.ln()).exp(),
    })
}

/// Cost estimate treating a divergent moment as infinite cost.
pub(crate) fn cost_or_infinite(y: u64, params: &ModelParams) -> f64 {
    cost_estimate(y, params).unwrap_or(f64::INFINITY)
}

/// Whether `y` lies where the cost estimate is monotone: every `y >= 0` for
/// `p > 0`, `y >= 1 - p - k` for `p < 0`.
pub fn in_monotone_region(y: u64, params: &ModelParams) -> bool {
    params.p() > 0 || y as i64 >= 1 - params.p() as i64 - params.k() as i64
}

/// `(P(Y_j <= tau | Y_i = y), P(Y_j > tau | Y_i = y))`.
pub fn belief_pair(y: u64, tau: Threshold, params: &ModelParams) -> (f64, f64) {
    match tau {
        Threshold::Never => (0.0, 1.0),
        Threshold::Unbounded => (1.0, 0.0),
        Threshold::At(t) => cross_belief(y, params).split(t as u64),
    }
}

/// Belief that an agent using a low threshold `tau` activates, given `Y_i = y`.
pub fn belief_low(y: u64, tau: Threshold, params: &ModelParams) -> f64 {
    belief_pair(y, tau, params).0
}

/// Belief that an agent using a high threshold `tau` activates, given `Y_i = y`.
pub fn belief_high(y: u64, tau: Threshold, params: &ModelParams) -> f64 {
    belief_pair(y, tau, params).1
}

fn activation_belief(kind: PolicyKind, y: u64, tau: Threshold, params: &ModelParams) -> f64 {
    let (low, high) = belief_pair(y, tau, params);
    match kind {
        PolicyKind::Low => low,
        PolicyKind::High => high,
    }
}

/// `E[b(1 + #active others) | Y_i = y] = (g / N) (sum_j pi_j(y) + 1)`.
pub fn benefit_estimate(y: u64, others: &ThresholdProfile, params: &ModelParams) -> Result<f64> {
    let n = params.finite_n()?;
    if others.len() != n - 1 {
        return Err(Error::ProfileLengthMismatch { expected: n - 1, got: others.len() });
    }
    let kind = others.kind();
    let sum: f64 = match others.common() {
        Some(tau) => (n - 1) as f64 * activation_belief(kind, y, tau, params),
        None => others
            .counts()
            .into_iter()
            .map(|(tau, count)| count as f64 * activation_belief(kind, y, tau, params))
            .sum(),
    };
    Ok(params.g() / n as f64 * (sum + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::cross_belief_pmf;
    use crate::params::AgentCount;

    fn params(k: u32, theta: f64, lambda: f64, p: i32, g: f64, n: u64) -> ModelParams {
        ModelParams::new(k, theta, lambda, p, g, AgentCount::Finite(n)).unwrap()
    }

    #[test]
    fn cost_special_cases() {
        let m = params(1, 1.0, 5.0, 1, 1.0, 2);
        assert_eq!(cost_estimate(0, &m).unwrap(), 1.0 / 6.0);
        let m = params(2, 0.1, 3.0, -1, 1.0, 2);
        assert_eq!(cost_estimate(0, &m).unwrap(), 3.1);
        // Γ(7) / Γ(5) / 3.1^2
        let m = params(1, 0.1, 3.0, 2, 1.0, 2);
        assert!((cost_estimate(4, &m).unwrap() - 30.0 / 9.61).abs() < 1e-13);
    }

    #[test]
    fn cost_product_matches_log_space() {
        for &p in &[2, 3, 7, -2, -3] {
            let m = params(3, 0.4, 1.7, p, 1.0, 2);
            for y in 0..200u64 {
                let shape = y as f64 + 3.0;
                if shape + p as f64 <= 0.0 {
                    continue;
                }
                let logspace = (ln_gamma(shape + p as f64) - ln_gamma(shape) - p as f64 * 2.1f64.ln()).exp();
                let direct = cost_estimate(y, &m).unwrap();
                assert!(((direct - logspace) / direct).abs() < 1e-11, "p {p} y {y}");
            }
        }
    }

    #[test]
    fn cost_pole_is_domain_error() {
        let m = params(1, 1.0, 1.0, -2, 1.0, 2);
        assert!(cost_estimate(0, &m).is_err());
        assert!(cost_estimate(1, &m).is_err());
        assert!(cost_estimate(2, &m).is_ok());
        assert!(!in_monotone_region(1, &m));
        assert!(in_monotone_region(2, &m));
    }

    #[test]
    fn belief_examples() {
        let m = params(1, 1.0, 5.0, 1, 2.0, 3);
        assert!((belief_low(0, Threshold::At(0), &m) - 6.0 / 11.0).abs() < 1e-15);
        assert!((belief_high(0, Threshold::At(0), &m) - 5.0 / 11.0).abs() < 1e-15);
        assert_eq!(belief_low(17, Threshold::Unbounded, &m), 1.0);
        assert_eq!(belief_high(17, Threshold::Unbounded, &m), 0.0);

        let m = params(2, 0.5, 2.0, 1, 2.0, 3);
        let partial: f64 = (0..=5).map(|l| cross_belief_pmf(l, 3, &m)).sum();
        assert!((belief_low(3, Threshold::At(5), &m) - partial).abs() < 1e-14);
        assert!((belief_high(3, Threshold::At(5), &m) - (1.0 - partial)).abs() < 1e-14);
    }

    #[test]
    fn belief_increments_are_pmf_terms() {
        let m = params(2, 0.5, 2.0, 1, 2.0, 3);
        for y in [0u64, 4, 30] {
            for t in 0..40u32 {
                let step = belief_low(y, Threshold::At(t + 1), &m) - belief_low(y, Threshold::At(t), &m);
                assert!((step - cross_belief_pmf(t as u64 + 1, y, &m)).abs() < 1e-13, "y {y} t {t} {step} {}", cross_belief_pmf(t as u64 + 1, y, &m));
                assert!(step >= 0.0);
            }
        }
    }

    #[test]
    fn benefit_examples() {
        let m = params(1, 1.0, 5.0, 1, 2.0, 3);
        let others = ThresholdProfile::homogeneous(PolicyKind::Low, Threshold::At(0), 2);
        let b = benefit_estimate(0, &others, &m).unwrap();
        assert!((b - 46.0 / 33.0).abs() < 1e-14, "{b}");

        let all_in = ThresholdProfile::homogeneous(PolicyKind::Low, Threshold::Unbounded, 2);
        assert_eq!(benefit_estimate(9, &all_in, &m).unwrap(), 2.0);
        let none = ThresholdProfile::homogeneous(PolicyKind::Low, Threshold::Never, 2);
        assert_eq!(benefit_estimate(9, &none, &m).unwrap(), 2.0 / 3.0);

        let mixed = ThresholdProfile::new(PolicyKind::Low, vec![Threshold::At(0), Threshold::Unbounded]);
        let want = 2.0 / 3.0 * (6.0 / 11.0 + 1.0 + 1.0);
        assert!((benefit_estimate(0, &mixed, &m).unwrap() - want).abs() < 1e-14);

        let short = ThresholdProfile::homogeneous(PolicyKind::Low, Threshold::At(0), 1);
        assert_eq!(
            benefit_estimate(0, &short, &m),
            Err(Error::ProfileLengthMismatch { expected: 2, got: 1 })
        );
    }
}
