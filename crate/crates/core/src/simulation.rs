//! Forward Monte Carlo of the full game.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::dist::gamma_sampler;
use crate::error::{Error, Result};
use crate::mc::{merge_all, run_chunked, McEstimate, Moments, Stream};
use crate::meanfield::MIN_SAMPLES;
use crate::params::ModelParams;
use crate::policy::{Threshold, ThresholdProfile};

/// Largest population simulated agent by agent.
pub const MAX_SIMULATED_AGENTS: usize = 10_000;

/// One-sided normal quantile used for the audit's 99% upper bound.
pub const Z_99: f64 = 2.5758;

/// Default audit tolerance as a fraction of `g`.
pub const AUDIT_TOL_PER_GAIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRealization {
    pub x: f64,
    pub signals: Vec<u64>,
    pub actions: Vec<bool>,
    pub utilities: Vec<f64>,
}

fn check_samples(n: u64) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples { min: MIN_SAMPLES, got: n });
    }
    Ok(())
}

fn population(profile: &ThresholdProfile, params: &ModelParams) -> Result<usize> {
    let n = params.finite_n()?;
    if n > MAX_SIMULATED_AGENTS {
        return Err(Error::TooManyAgents { max: MAX_SIMULATED_AGENTS, got: n });
    }
    if profile.len() != n {
        return Err(Error::ProfileLengthMismatch { expected: n, got: profile.len() });
    }
    Ok(n)
}

/// Draws of the state and conditionally independent signals.
#[derive(Debug, Clone)]
pub struct SignalSampler {
    prior: Gamma<f64>,
    lambda: f64,
}

impl SignalSampler {
    pub fn new(params: &ModelParams) -> Result<Self> {
        Ok(SignalSampler { prior: gamma_sampler(params.k() as f64, params.theta())?, lambda: params.lambda() })
    }

    pub fn state<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.prior.sample(rng)
    }

    /// One `Poisson(lambda x)` count.
    pub fn signal<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> u64 {
        let rate = self.lambda * x;
        match Poisson::new(rate) {
            Ok(d) => d.sample(rng) as u64,
            Err(_) => 0,
        }
    }

    /// Fills `out` with independent signals at state `x`.
    pub fn signals<R: Rng + ?Sized>(&self, x: f64, rng: &mut R, out: &mut [u64]) {
        match Poisson::new(self.lambda * x) {
            Ok(d) => out.iter_mut().for_each(|y| *y = d.sample(rng) as u64),
            Err(_) => out.fill(0),
        }
    }
}

/// State, signals, actions and realized utilities of one play of the game.
pub fn sample_realization<R: Rng + ?Sized>(
    profile: &ThresholdProfile,
    params: &ModelParams,
    rng: &mut R,
) -> Result<GameRealization> {
    let n = population(profile, params)?;
    let sampler = SignalSampler::new(params)?;
    let x = sampler.state(rng);
    let mut signals = vec![0; n];
    sampler.signals(x, rng, &mut signals);
    let actions: Vec<bool> = (0..n).map(|i| profile.policy(i).activates(signals[i])).collect();
    let active = actions.iter().filter(|&&a| a).count() as f64;
    let payoff = params.g() / n as f64 * active - params.cost(x);
    let utilities = actions.iter().map(|&a| if a { payoff } else { 0.0 }).collect();
    Ok(GameRealization { x, signals, actions, utilities })
}

/// Fraction of agents activating in a realization, averaged over realizations.
pub fn empirical_activation_probability(
    profile: &ThresholdProfile,
    params: &ModelParams,
    n_realizations: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_samples(n_realizations)?;
    let n = population(profile, params)?;
    if profile.common().is_none() {
        return Err(Error::Domain("activation probability needs a homogeneous profile".into()));
    }
    let sampler = SignalSampler::new(params)?;
    let m = run_chunked(
        n_realizations,
        seed,
        |rng: &mut Stream, len| {
            let mut m = Moments::default();
            let mut ys = vec![0; n];
            for _ in 0..len {
                let x = sampler.state(rng);
                sampler.signals(x, rng, &mut ys);
                let active = (0..n).filter(|&i| profile.policy(i).activates(ys[i])).count();
                m.push(active as f64 / n as f64);
            }
            m
        },
        |a, b| a.merge(&b),
    )
    .expect("at least one chunk");
    Ok(m.estimate(seed))
}

/// Per-agent activation frequencies.
pub fn activation_frequencies(
    profile: &ThresholdProfile,
    params: &ModelParams,
    n_realizations: u64,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    check_samples(n_realizations)?;
    let n = population(profile, params)?;
    let sampler = SignalSampler::new(params)?;
    let m = run_chunked(
        n_realizations,
        seed,
        |rng: &mut Stream, len| {
            let mut acc = vec![Moments::default(); n];
            let mut ys = vec![0; n];
            for _ in 0..len {
                let x = sampler.state(rng);
                sampler.signals(x, rng, &mut ys);
                for (i, m) in acc.iter_mut().enumerate() {
                    m.push(if profile.policy(i).activates(ys[i]) { 1.0 } else { 0.0 });
                }
            }
            acc
        },
        |a, b| merge_all(a, b),
    )
    .expect("at least one chunk");
    Ok(m.iter().map(|m| m.estimate(seed)).collect())
}

/// Mean realized utility of each agent.
pub fn realized_utilities(
    profile: &ThresholdProfile,
    params: &ModelParams,
    n_realizations: u64,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    check_samples(n_realizations)?;
    let n = population(profile, params)?;
    let sampler = SignalSampler::new(params)?;
    let share = params.g() / n as f64;
    let m = run_chunked(
        n_realizations,
        seed,
        |rng: &mut Stream, len| {
            let mut acc = vec![Moments::default(); n];
            let mut ys = vec![0; n];
            let mut acts = vec![false; n];
            for _ in 0..len {
                let x = sampler.state(rng);
                sampler.signals(x, rng, &mut ys);
                for i in 0..n {
                    acts[i] = profile.policy(i).activates(ys[i]);
                }
                let payoff = share * acts.iter().filter(|&&a| a).count() as f64 - params.cost(x);
                for (m, &a) in acc.iter_mut().zip(&acts) {
                    m.push(if a { payoff } else { 0.0 });
                }
            }
            acc
        },
        |a, b| merge_all(a, b),
    )
    .expect("at least one chunk");
    Ok(m.iter().map(|m| m.estimate(seed)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub agent: usize,
    pub deviation: Threshold,
    /// Estimated `J_i(tau', tau_-i) - J_i(tau)`.
    pub gain: McEstimate,
    /// 99% upper confidence bound of the gain.
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
    pub max_gain: f64,
    pub max_upper: f64,
    pub epsilon: f64,
    pub n_realizations: u64,
    pub seed: u64,
    pub passes: bool,
}

/// Paired Monte Carlo check that no agent gains from switching to any of
/// `candidates`. Incumbent and deviating utilities are evaluated on the same
/// draws; the profile passes when every gain's 99% upper bound is below
/// `epsilon` (default `1e-3 g`).
pub fn deviation_audit(
    profile: &ThresholdProfile,
    params: &ModelParams,
    candidates: &[Threshold],
    n_realizations: u64,
    seed: u64,
    epsilon: Option<f64>,
) -> Result<AuditReport> {
    check_samples(n_realizations)?;
    let n = population(profile, params)?;
    let epsilon = epsilon.unwrap_or(AUDIT_TOL_PER_GAIN * params.g());
    let sampler = SignalSampler::new(params)?;
    let share = params.g() / n as f64;
    let kind = profile.kind();
    let c = candidates.len();
    let m = run_chunked(
        n_realizations,
        seed,
        |rng: &mut Stream, len| {
            let mut acc = vec![Moments::default(); n * c];
            let mut ys = vec![0; n];
            let mut acts = vec![false; n];
            for _ in 0..len {
                let x = sampler.state(rng);
                sampler.signals(x, rng, &mut ys);
                for i in 0..n {
                    acts[i] = profile.policy(i).activates(ys[i]);
                }
                let active = acts.iter().filter(|&&a| a).count();
                let cost = params.cost(x);
                for i in 0..n {
                    let others = active - acts[i] as usize;
                    let payoff = share * (others + 1) as f64 - cost;
                    let incumbent = if acts[i] { payoff } else { 0.0 };
                    for (j, &tau) in candidates.iter().enumerate() {
                        let a = crate::policy::ThresholdPolicy { kind, tau }.activates(ys[i]);
                        let deviant = if a { payoff } else { 0.0 };
                        acc[i * c + j].push(deviant - incumbent);
                    }
                }
            }
            acc
        },
        |a, b| merge_all(a, b),
    )
    .expect("at least one chunk");

    let mut entries = Vec::with_capacity(n * c);
    for i in 0..n {
        for (j, &deviation) in candidates.iter().enumerate() {
            let gain = m[i * c + j].estimate(seed);
            entries.push(AuditEntry { agent: i, deviation, gain, upper: gain.mean + Z_99 * gain.stderr });
        }
    }
    let max_gain = entries.iter().map(|e| e.gain.mean).fold(f64::NEG_INFINITY, f64::max);
    let max_upper = entries.iter().map(|e| e.upper).fold(f64::NEG_INFINITY, f64::max);
    Ok(AuditReport {
        passes: entries.iter().all(|e| e.upper < epsilon),
        entries,
        max_gain,
        max_upper,
        epsilon,
        n_realizations,
        seed,
    })
}

/// Means of `X` among draws with `Y = y`, for each requested `y`, from joint
/// forward sampling of `(X, Y)`.
pub fn conditional_state_means(params: &ModelParams, ys: &[u64], n_samples: u64, seed: u64) -> Result<Vec<McEstimate>> {
    check_samples(n_samples)?;
    let sampler = SignalSampler::new(params)?;
    let m = run_chunked(
        n_samples,
        seed,
        |rng: &mut Stream, len| {
            let mut acc = vec![Moments::default(); ys.len()];
            for _ in 0..len {
                let x = sampler.state(rng);
                let y = sampler.signal(x, rng);
                if let Some(j) = ys.iter().position(|&v| v == y) {
                    acc[j].push(x);
                }
            }
            acc
        },
        |a, b| merge_all(a, b),
    )
    .expect("at least one chunk");
    Ok(m.iter().map(|m| m.estimate(seed)).collect())
}

/// Empirical pmf of one agent's signal; the last entry collects `y >= len - 1`.
pub fn empirical_signal_pmf(params: &ModelParams, len: usize, n_samples: u64, seed: u64) -> Result<Vec<f64>> {
    check_samples(n_samples)?;
    if len == 0 {
        return Err(Error::Domain("pmf support must be nonempty".into()));
    }
    let sampler = SignalSampler::new(params)?;
    let counts = run_chunked(
        n_samples,
        seed,
        |rng: &mut Stream, chunk| {
            let mut counts = vec![0u64; len];
            for _ in 0..chunk {
                let x = sampler.state(rng);
                let y = sampler.signal(x, rng) as usize;
                counts[y.min(len - 1)] += 1;
            }
            counts
        },
        |a, b| a.iter_mut().zip(b).for_each(|(a, b)| *a += b),
    )
    .expect("at least one chunk");
    Ok(counts.iter().map(|&c| c as f64 / n_samples as f64).collect())
}
