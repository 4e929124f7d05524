//! Model hyperparameters and their JSON representation.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Number of agents in the game. `Infinite` selects the mean-field limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentCount {
    Finite(u64),
    Infinite,
}

impl AgentCount {
    pub fn finite(self) -> Option<u64> {
        match self {
            AgentCount::Finite(n) => Some(n),
            AgentCount::Infinite => None,
        }
    }
}

impl fmt::Display for AgentCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentCount::Finite(n) => write!(f, "{n}"),
            AgentCount::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for AgentCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AgentCount::Finite(n) => s.serialize_u64(*n),
            AgentCount::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for AgentCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct CountVisitor;

        impl Visitor<'_> for CountVisitor {
            type Value = AgentCount;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer or the string \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<AgentCount, E> {
                Ok(AgentCount::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<AgentCount, E> {
                u64::try_from(v)
                    .map(AgentCount::Finite)
                    .map_err(|_| E::custom(format!("negative agent count {v}")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<AgentCount, E> {
                match v {
                    "inf" | "infinite" | "Infinite" => Ok(AgentCount::Infinite),
                    other => other
                        .parse::<u64>()
                        .map(AgentCount::Finite)
                        .map_err(|_| E::custom(format!("invalid agent count {other:?}"))),
                }
            }
        }

        d.deserialize_any(CountVisitor)
    }
}

/// Unvalidated parameter set, as read from a config file or the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub k: f64,
    pub theta: f64,
    pub lambda: f64,
    pub p: i32,
    pub g: f64,
    pub n_agents: AgentCount,
}

/// A validated instance of the Gamma-Poisson global game.
///
/// The state is `X ~ Gamma(k, theta)` (shape, rate), each agent observes
/// `Y_i | X = x ~ Poisson(lambda * x)`, activation costs `x^p` and the
/// benefit of `m` activating agents is `(g / N) * m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    k: u32,
    theta: f64,
    lambda: f64,
    p: i32,
    g: f64,
    n_agents: AgentCount,
}

pub fn validate_params(raw: RawParams) -> Result<ModelParams> {
    if !(raw.theta > 0.0 && raw.theta.is_finite() && raw.lambda > 0.0 && raw.lambda.is_finite()) {
        return Err(Error::NonPositiveRate { theta: raw.theta, lambda: raw.lambda });
    }
    if !(raw.k >= 1.0 && raw.k.fract() == 0.0 && raw.k <= u32::MAX as f64) {
        return Err(Error::InvalidShape(raw.k));
    }
    if raw.p == 0 {
        return Err(Error::ZeroExponent);
    }
    if !(raw.g > 0.0 && raw.g.is_finite()) {
        return Err(Error::InvalidGain(raw.g));
    }
    if let AgentCount::Finite(n) = raw.n_agents {
        if n < 2 {
            return Err(Error::TooFewAgents(n));
        }
    }
    Ok(ModelParams {
        k: raw.k as u32,
        theta: raw.theta,
        lambda: raw.lambda,
        p: raw.p,
        g: raw.g,
        n_agents: raw.n_agents,
    })
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        validate_params(raw)
    }
}

impl From<ModelParams> for RawParams {
    fn from(m: ModelParams) -> Self {
        RawParams {
            k: m.k as f64,
            theta: m.theta,
            lambda: m.lambda,
            p: m.p,
            g: m.g,
            n_agents: m.n_agents,
        }
    }
}

impl ModelParams {
    pub fn new(k: u32, theta: f64, lambda: f64, p: i32, g: f64, n_agents: AgentCount) -> Result<Self> {
        validate_params(RawParams { k: k as f64, theta, lambda, p, g, n_agents })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p(&self) -> i32 {
        self.p
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn n_agents(&self) -> AgentCount {
        self.n_agents
    }

    /// Finite agent count, or `InfiniteAgents` in the mean-field setting.
    pub fn finite_n(&self) -> Result<usize> {
        self.n_agents.finite().map(|n| n as usize).ok_or(Error::InfiniteAgents)
    }

    /// Posterior rate `lambda + theta`, shared by every signal value.
    pub fn posterior_rate(&self) -> f64 {
        self.lambda + self.theta
    }

    /// `(theta + lambda) / (theta + 2 lambda)`, the failure probability of the
    /// cross-belief Negative Binomial.
    pub fn cross_ratio(&self) -> f64 {
        (self.theta + self.lambda) / (self.theta + 2.0 * self.lambda)
    }

    /// Activation cost `c(x) = x^p`.
    pub fn cost(&self, x: f64) -> f64 {
        x.powi(self.p)
    }

    pub fn with_gain(mut self, g: f64) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidGain(g));
        }
        self.g = g;
        Ok(self)
    }

    pub fn with_agents(self, n_agents: AgentCount) -> Result<Self> {
        validate_params(RawParams { n_agents, ..self.into() })
    }
}
