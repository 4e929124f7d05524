//! Mean-field potential of the infinite-agent game.
//!
//! For a common low threshold `tau` the per-agent potential is
//! `Phi(tau) = E[(g/2) q^2 - (q - 1/2) X^p]` with `q = P(Poisson(lambda X) <= tau)`.
//! It is estimated by sampling the prior; a whole grid of thresholds shares
//! one set of draws so that neighbouring values are compared on common random
//! numbers.

use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::dist::{gamma_sampler, poisson_cdf_prefix, poisson_cdf_unchecked};
use crate::error::{Error, Result};
use crate::estimators::cost_estimate;
use crate::mc::{merge_all, run_chunked, McEstimate, Moments, Stream};
use crate::params::ModelParams;

use crate::equilibrium::{last_cost_at_most, TIE_TOL};

/// Fewest samples accepted by the estimators.
pub const MIN_SAMPLES: u64 = 1_000;

fn check_samples(n_samples: u64) -> Result<()> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples { min: MIN_SAMPLES, got: n_samples });
    }
    Ok(())
}

fn integrand(q: f64, cost: f64, g: f64) -> f64 {
    0.5 * g * q * q - (q - 0.5) * cost
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfpfCurve {
    pub taus: Vec<u32>,
    pub values: Vec<McEstimate>,
    pub params: ModelParams,
    pub n_samples: u64,
    pub seed: u64,
}

impl MfpfCurve {
    /// Largest estimated value, smallest threshold on ties.
    pub fn argmax(&self) -> u32 {
        self.taus[self.argmax_index()]
    }

    fn argmax_index(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.mean > self.values[best].mean {
                best = i;
            }
        }
        best
    }

    /// Whether the curve rises to its maximum and falls afterwards up to
    /// noise: no pair on either side of the argmax moves against that shape
    /// by more than `sigmas` times the sum of their standard errors.
    pub fn is_unimodal(&self, sigmas: f64) -> bool {
        if self.values.is_empty() {
            return true;
        }
        let peak = self.argmax_index();
        let against = |a: &McEstimate, b: &McEstimate| a.mean - b.mean > sigmas * (a.stderr + b.stderr);
        let v = &self.values;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                // Rising side: an earlier point clearly above a later one.
                if j <= peak && against(&v[i], &v[j]) {
                    return false;
                }
                // Falling side: a later point clearly above an earlier one.
                if i >= peak && against(&v[j], &v[i]) {
                    return false;
                }
            }
        }
        true
    }
}

/// Potential at a single threshold.
pub fn mfpf_estimate(tau: u32, params: &ModelParams, n_samples: u64, seed: u64) -> Result<McEstimate> {
    check_samples(n_samples)?;
    let sampler = gamma_sampler(params.k() as f64, params.theta())?;
    let (g, lambda) = (params.g(), params.lambda());
    let moments = run_chunked(
        n_samples,
        seed,
        |rng: &mut Stream, len| {
            let mut m = Moments::default();
            for _ in 0..len {
                let x: f64 = sampler.sample(rng);
                let rate = lambda * x;
                let q = if rate > 0.0 { poisson_cdf_unchecked(tau as i64, rate) } else { 1.0 };
                m.push(integrand(q, params.cost(x), g));
            }
            m
        },
        |a, b| a.merge(&b),
    )
    .expect("at least one chunk");
    Ok(moments.estimate(seed))
}

/// Potential on `tau = 0..=tau_max`, all thresholds sharing the same draws.
pub fn mfpf_curve(params: &ModelParams, tau_max: u32, n_samples: u64, seed: u64) -> Result<MfpfCurve> {
    check_samples(n_samples)?;
    let sampler = gamma_sampler(params.k() as f64, params.theta())?;
    let (g, lambda) = (params.g(), params.lambda());
    let len = tau_max as usize + 1;
    let moments = run_chunked(
        n_samples,
        seed,
        |rng: &mut Stream, chunk| {
            let mut acc = vec![Moments::default(); len];
            let mut cdf = vec![0.0; len];
            for _ in 0..chunk {
                let x: f64 = sampler.sample(rng);
                let rate = lambda * x;
                if rate > 0.0 {
                    poisson_cdf_prefix(rate, &mut cdf);
                } else {
                    cdf.fill(1.0);
                }
                let cost = params.cost(x);
                for (m, &q) in acc.iter_mut().zip(&cdf) {
                    m.push(integrand(q, cost, g));
                }
            }
            acc
        },
        |a, b| merge_all(a, b),
    )
    .expect("at least one chunk");
    Ok(MfpfCurve {
        taus: (0..=tau_max).collect(),
        values: moments.iter().map(|m| m.estimate(seed)).collect(),
        params: *params,
        n_samples,
        seed,
    })
}

/// Maximizer of the estimated potential over `0..=tau_max`.
pub fn mfpf_argmax(params: &ModelParams, tau_max: u32, n_samples: u64, seed: u64) -> Result<(u32, MfpfCurve)> {
    if tau_max < 1 {
        return Err(Error::Domain("tau_max must be at least 1".into()));
    }
    let curve = mfpf_curve(params, tau_max, n_samples, seed)?;
    Ok((curve.argmax(), curve))
}

/// Search range `4 (lambda + theta) max(g, 1) + 10 k`.
pub fn default_tau_max(params: &ModelParams) -> u32 {
    (4.0 * params.posterior_rate() * params.g().max(1.0) + 10.0 * params.k() as f64).ceil() as u32
}

/// Large-population limit of the low-threshold critical gain,
/// `(theta + 2 lambda)^k / (theta + lambda)^(p + k) * Γ(p + k) / Γ(k)`.
pub fn critical_gain_infinite(params: &ModelParams) -> Result<f64> {
    let p = params.p();
    if p <= 0 {
        return Err(Error::WrongSign("p > 0"));
    }
    let k = params.k();
    let rising: f64 = (0..p as u32).map(|i| (k + i) as f64).product();
    let spread = params.theta() + 2.0 * params.lambda();
    Ok(spread.powi(k as i32) / params.posterior_rate().powi(p + k as i32) * rising)
}

/// State cutoff `g^(1/p)` of an agent observing the state exactly.
pub fn tau_omniscient(params: &ModelParams) -> f64 {
    params.g().powf(1.0 / params.p() as f64)
}

/// Signal cutoff treating the posterior cost estimate as the true cost.
///
/// Low regime: `max{tau : c(tau) <= g}`, for `p = 1` in closed form
/// `floor((lambda + theta) g - k)` clamped at zero. High regime (`p < 0`):
/// `max{tau : c(tau) > g}`.
pub fn tau_certainty_equivalence(params: &ModelParams) -> Result<u32> {
    let g = params.g();
    let p = params.p();
    if p == 1 {
        let v = params.posterior_rate() * g - params.k() as f64;
        let floored = (v + 1e-9 * v.abs().max(1.0)).floor();
        return Ok(floored.max(0.0) as u32);
    }
    if p > 0 {
        return last_cost_at_most(params, g * (1.0 + TIE_TOL))?.ok_or_else(|| {
            Error::NoSolution(format!("c(0) exceeds g = {g}"))
        });
    }
    let monotone_from = (1 - p as i64 - params.k() as i64).max(0) as u64;
    let mut last = None;
    let mut y = 0u64;
    loop {
        let above = cost_estimate(y, params).map_or(true, |c| c > g);
        if above {
            last = Some(y);
        } else if y >= monotone_from {
            break;
        }
        y += 1;
    }
    last.map(|t| t as u32).ok_or_else(|| Error::NoSolution(format!("c(tau) <= g = {g} for every tau")))
}

/// Closed forms of the potential at the ends of the threshold range.
pub mod endpoints {
    use crate::error::Result;
    use crate::params::ModelParams;
    use crate::special::ln_gamma;

    /// `E[X^p] = Γ(k + p) / (Γ(k) theta^p)`; infinite when `k + p <= 0`.
    pub fn prior_moment(params: &ModelParams) -> f64 {
        let (k, p) = (params.k() as f64, params.p() as f64);
        if k + p <= 0.0 {
            return f64::INFINITY;
        }
        (ln_gamma(k + p) - ln_gamma(k) - p * params.theta().ln()).exp()
    }

    /// `tau = 0`: `q = e^{-lambda X}`, so the value is
    /// `(g/2) (theta/(theta + 2 lambda))^k - Γ(p + k)/Γ(k) theta^k/(theta + lambda)^(p + k) + E[X^p]/2`.
    pub fn at_zero(params: &ModelParams) -> Result<f64> {
        let (k, p) = (params.k() as f64, params.p() as f64);
        let (theta, lambda, g) = (params.theta(), params.lambda(), params.g());
        let quadratic = 0.5 * g * (theta / (theta + 2.0 * lambda)).powf(k);
        let linear = (ln_gamma(p + k) - ln_gamma(k) + k * theta.ln() - (p + k) * (theta + lambda).ln()).exp();
        Ok(quadratic - linear + 0.5 * prior_moment(params))
    }

    /// `tau -> inf`: `q = 1`, value `(g - E[X^p]) / 2`.
    pub fn at_infinity(params: &ModelParams) -> f64 {
        0.5 * (params.g() - prior_moment(params))
    }
}

/// Reference parameter sets with their published thresholds.
pub mod reference {
    use crate::error::Result;
    use crate::params::{AgentCount, ModelParams};

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct ReferenceRow {
        pub k: u32,
        pub theta: f64,
        pub lambda: f64,
        pub g: f64,
        /// Search range of the potential maximization.
        pub tau_max: u32,
        pub tau_star: u32,
        pub tau_omni: f64,
        pub tau_ce: u32,
    }

    impl ReferenceRow {
        /// Linear cost (`p = 1`) and an unbounded population.
        pub fn params(&self) -> Result<ModelParams> {
            ModelParams::new(self.k, self.theta, self.lambda, 1, self.g, AgentCount::Infinite)
        }
    }

    const fn row(k: u32, theta: f64, lambda: f64, g: f64, tau_max: u32, tau_star: u32, tau_ce: u32) -> ReferenceRow {
        ReferenceRow { k, theta, lambda, g, tau_max, tau_star, tau_omni: g, tau_ce }
    }

    pub const ROWS: [ReferenceRow; 9] = [
        row(1, 1.0, 5.0, 1.0, 50, 1, 5),
        row(1, 1.0, 5.0, 2.0, 50, 5, 11),
        row(1, 1.0, 5.0, 3.0, 50, 10, 17),
        row(2, 0.5, 2.0, 5.0, 75, 3, 10),
        row(2, 0.5, 2.0, 7.5, 75, 8, 16),
        row(2, 0.5, 2.0, 10.0, 75, 13, 23),
        row(3, 0.1, 1.0, 20.0, 150, 0, 19),
        row(3, 0.1, 1.0, 40.0, 150, 16, 41),
        row(3, 0.1, 1.0, 60.0, 150, 32, 63),
    ];

    /// Critical gains of the three parameter blocks in the large-population
    /// limit, with their absolute tolerance.
    pub const CRITICAL_GAINS: [(u32, f64, f64, f64, f64); 3] =
        [(1, 1.0, 5.0, 11.0 / 36.0, 0.0), (2, 0.5, 2.0, 2.592, 1e-3), (3, 0.1, 1.0, 18.97, 1e-2)];
}
