//! Distributions of the Gamma-Poisson model: the Gamma prior and posterior,
//! the Poisson channel, and the Negative Binomial signal marginals.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::special::{ln_gamma, ln_nb_coefficient};

/// Relative size below which a tail term no longer changes a sum.
const TAIL_EPS: f64 = 1e-18;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be a finite positive number, got {v}")))
    }
}

/// Gamma density with the given shape and rate.
pub fn gamma_pdf(x: f64, shape: f64, rate: f64) -> Result<f64> {
    check_positive("shape", shape)?;
    check_positive("rate", rate)?;
    Ok(gamma_pdf_unchecked(x, shape, rate))
}

pub(crate) fn gamma_pdf_unchecked(x: f64, shape: f64, rate: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return match shape.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => rate,
            _ => 0.0,
        };
    }
    (shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x).exp()
}

/// One draw from `Gamma(shape, rate)`.
pub fn gamma_sample<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    Ok(gamma_sampler(shape, rate)?.sample(rng))
}

/// Reusable sampler for `Gamma(shape, rate)`.
pub fn gamma_sampler(shape: f64, rate: f64) -> Result<Gamma<f64>> {
    check_positive("shape", shape)?;
    check_positive("rate", rate)?;
    Gamma::new(shape, 1.0 / rate).map_err(|e| Error::Domain(e.to_string()))
}

/// `ln P(Y = y)` for `Y ~ Poisson(rate)`, `rate > 0`.
pub(crate) fn poisson_ln_pmf(y: u64, rate: f64) -> f64 {
    if y == 0 {
        return -rate;
    }
    y as f64 * rate.ln() - rate - ln_gamma(y as f64 + 1.0)
}

pub fn poisson_pmf(y: u64, rate: f64) -> Result<f64> {
    check_positive("Poisson rate", rate)?;
    Ok(poisson_ln_pmf(y, rate).exp())
}

/// Index window outside of which Poisson(rate) mass is below `e^-800`.
fn poisson_window(rate: f64) -> (u64, u64) {
    let spread = 40.0 * rate.sqrt() + 40.0;
    let lo = (rate - spread).floor().max(0.0) as u64;
    let hi = (rate + spread).ceil() as u64;
    (lo, hi)
}

fn poisson_sum(from: u64, to: u64, rate: f64) -> f64 {
    if from > to {
        return 0.0;
    }
    let ln_rate = rate.ln();
    let mut ln_term = poisson_ln_pmf(from, rate);
    let mut sum = ln_term.exp();
    for y in from + 1..=to {
        ln_term += ln_rate - (y as f64).ln();
        sum += ln_term.exp();
    }
    sum
}

/// `P(Y <= tau)` for `Y ~ Poisson(rate)`; zero for negative `tau`.
pub fn poisson_cdf(tau: i64, rate: f64) -> Result<f64> {
    check_positive("Poisson rate", rate)?;
    Ok(poisson_cdf_unchecked(tau, rate))
}

pub(crate) fn poisson_cdf_unchecked(tau: i64, rate: f64) -> f64 {
    if tau < 0 {
        return 0.0;
    }
    let (lo, hi) = poisson_window(rate);
    poisson_sum(lo, (tau as u64).min(hi), rate).min(1.0)
}

/// `P(Y > tau)`, summed over the upper tail directly.
pub(crate) fn poisson_sf_unchecked(tau: i64, rate: f64) -> f64 {
    if tau < 0 {
        return 1.0;
    }
    let (lo, hi) = poisson_window(rate);
    let from = (tau as u64 + 1).max(lo);
    poisson_sum(from, hi, rate).min(1.0)
}

/// Fills `out[t] = P(Y <= t)` for `t = 0..out.len()` by the forward pmf
/// recurrence. Used where a whole grid of thresholds shares one rate.
pub(crate) fn poisson_cdf_prefix(rate: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    // Below this the linear recurrence cannot underflow at y = 0.
    const LINEAR_MAX_RATE: f64 = 700.0;
    let ln_rate = rate.ln();
    let linear = rate < LINEAR_MAX_RATE;
    let mut ln_term = -rate;
    let mut term = if linear { (-rate).exp() } else { 0.0 };
    let mut sum = if linear { term } else { ln_term.exp() };
    out[0] = sum.min(1.0);
    for y in 1..out.len() {
        if linear {
            term *= rate / y as f64;
        } else {
            ln_term += ln_rate - (y as f64).ln();
            term = ln_term.exp();
        }
        sum += term;
        out[y] = sum.min(1.0);
        if y as f64 > rate && term <= TAIL_EPS * sum {
            let last = out[y];
            out[y + 1..].iter_mut().for_each(|v| *v = last);
            return;
        }
    }
}

/// Negative Binomial counting failures before the `r`-th success:
/// `P(n) = C(n + r - 1, n) q^n (1 - q)^r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegBinomial {
    pub r: f64,
    pub q: f64,
}

impl NegBinomial {
    pub fn ln_pmf(&self, n: u64) -> f64 {
        ln_nb_coefficient(n, self.r) + n as f64 * self.q.ln() + self.r * (-self.q).ln_1p()
    }

    pub fn pmf(&self, n: u64) -> f64 {
        self.ln_pmf(n).exp()
    }

    /// Sum of the pmf from `n = 0` until the terms past the mode are negligible.
    pub fn total_mass(&self) -> f64 {
        let mode = self.mode();
        let mut total = 0.0;
        for n in 0u64.. {
            let term = self.pmf(n);
            total += term;
            if n as f64 > mode && term <= TAIL_EPS * total {
                break;
            }
        }
        total
    }

    fn mode(&self) -> f64 {
        ((self.r - 1.0) * self.q / (1.0 - self.q)).max(0.0).floor()
    }

    /// `(P(N <= tau), P(N > tau))`, each computed from whichever side is
    /// accurate in floating point. The two sum to one up to rounding.
    pub fn split(&self, tau: u64) -> (f64, f64) {
        let mode = self.mode();
        let ln_q = self.q.ln();
        let r = self.r;

        let mut ln_term = r * (-self.q).ln_1p();
        let mut lower = ln_term.exp();
        let mut n = 0u64;
        while n < tau {
            ln_term += ln_q + (n as f64 + r).ln() - (n as f64 + 1.0).ln();
            n += 1;
            let term = ln_term.exp();
            lower += term;
            if n as f64 > mode && term <= TAIL_EPS * lower {
                break;
            }
        }
        if lower <= 0.5 {
            return (lower, 1.0 - lower);
        }

        let mut n = tau + 1;
        let mut ln_term = self.ln_pmf(n);
        let mut upper = ln_term.exp();
        loop {
            ln_term += ln_q + (n as f64 + r).ln() - (n as f64 + 1.0).ln();
            n += 1;
            let term = ln_term.exp();
            upper += term;
            if n as f64 > mode && term <= TAIL_EPS * upper {
                break;
            }
        }
        (1.0 - upper, upper)
    }
}

/// Gamma posterior of the state after one signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    pub shape: f64,
    pub rate: f64,
}

impl PosteriorState {
    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }
}

/// Posterior `X | Y_i = y ~ Gamma(y + k, lambda + theta)`.
pub fn posterior_of_state(y: u64, params: &ModelParams) -> PosteriorState {
    PosteriorState { shape: y as f64 + params.k() as f64, rate: params.posterior_rate() }
}

/// Marginal law of one agent's signal.
pub fn marginal_signal(params: &ModelParams) -> NegBinomial {
    NegBinomial { r: params.k() as f64, q: params.lambda() / params.posterior_rate() }
}

/// `P(Y_i = y)`.
pub fn marginal_signal_pmf(y: u64, params: &ModelParams) -> f64 {
    marginal_signal(params).pmf(y)
}

/// Law of another agent's signal given `Y_i = y`.
pub fn cross_belief(y: u64, params: &ModelParams) -> NegBinomial {
    let (theta, lambda) = (params.theta(), params.lambda());
    NegBinomial { r: params.k() as f64 + y as f64, q: lambda / (theta + 2.0 * lambda) }
}

/// `P(Y_j = ell | Y_i = y)`.
pub fn cross_belief_pmf(ell: u64, y: u64, params: &ModelParams) -> f64 {
    cross_belief(y, params).pmf(ell)
}

/// Smallest `x` with `P(X > x)` and `E[c(X); X > x] / E[c(X)]` both below
/// `eps`, for the prior `X ~ Gamma(k, theta)` with integer `k`.
pub(crate) fn prior_upper_cutoff(params: &ModelParams, eps: f64) -> f64 {
    // For integer shape m, P(Gamma(m, theta) > x) = P(Poisson(theta x) <= m - 1).
    let k = params.k() as i64;
    let theta = params.theta();
    let moment_shape = k + params.p().max(0) as i64;
    let tail = |x: f64| {
        poisson_cdf_unchecked(k - 1, theta * x).max(poisson_cdf_unchecked(moment_shape - 1, theta * x))
    };
    let mut x = (moment_shape as f64 + 1.0) / theta;
    while tail(x) > eps {
        x *= 1.5;
    }
    x
}
