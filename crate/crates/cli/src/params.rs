//! Parameter ingestion: reference row, then config file, then inline flags.

use std::path::PathBuf;

use clap::Args;
use gggp_core::meanfield::reference::{ReferenceRow, ROWS};
use gggp_core::{AgentCount, ModelParams, RawParams};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// JSON file with the model parameters (fields k, theta, lambda, p, g, n_agents).
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,

    /// Start from reference row 1..=9 (linear cost, unbounded population).
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=9))]
    pub row: Option<u8>,

    #[arg(long, global = true)]
    pub k: Option<f64>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub p: Option<i32>,
    #[arg(long, global = true)]
    pub g: Option<f64>,
    /// Number of agents, or `inf`.
    #[arg(long, global = true, value_parser = parse_count)]
    pub n: Option<AgentCount>,
}

fn parse_count(s: &str) -> Result<AgentCount, String> {
    match s {
        "inf" | "infinite" => Ok(AgentCount::Infinite),
        _ => s.parse().map(AgentCount::Finite).map_err(|_| format!("expected an integer or `inf`, got {s:?}")),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialParams {
    k: Option<f64>,
    theta: Option<f64>,
    lambda: Option<f64>,
    p: Option<i32>,
    g: Option<f64>,
    n_agents: Option<AgentCount>,
}

impl PartialParams {
    fn overlay(&mut self, other: PartialParams) {
        self.k = other.k.or(self.k);
        self.theta = other.theta.or(self.theta);
        self.lambda = other.lambda.or(self.lambda);
        self.p = other.p.or(self.p);
        self.g = other.g.or(self.g);
        self.n_agents = other.n_agents.or(self.n_agents);
    }
}

impl ParamArgs {
    pub fn reference_row(&self) -> Option<&'static ReferenceRow> {
        self.row.map(|r| &ROWS[r as usize - 1])
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_none()
            && self.row.is_none()
            && self.k.is_none()
            && self.theta.is_none()
            && self.lambda.is_none()
            && self.p.is_none()
            && self.g.is_none()
            && self.n.is_none()
    }

    /// Merges the three sources; later ones win field by field.
    pub fn resolve(&self) -> Result<ModelParams, CliError> {
        let mut merged = PartialParams::default();
        if let Some(row) = self.reference_row() {
            let raw = RawParams::from(row.params()?);
            merged.overlay(PartialParams {
                k: Some(raw.k),
                theta: Some(raw.theta),
                lambda: Some(raw.lambda),
                p: Some(raw.p),
                g: Some(raw.g),
                n_agents: Some(raw.n_agents),
            });
        }
        if let Some(path) = &self.params {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("reading {}: {e}", path.display())))?;
            let file: PartialParams = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("parsing {}: {e}", path.display())))?;
            merged.overlay(file);
        }
        merged.overlay(PartialParams {
            k: self.k,
            theta: self.theta,
            lambda: self.lambda,
            p: self.p,
            g: self.g,
            n_agents: self.n,
        });
        let missing = |name: &str| CliError::Validation(format!("missing parameter `{name}`"));
        let raw = RawParams {
            k: merged.k.ok_or_else(|| missing("k"))?,
            theta: merged.theta.ok_or_else(|| missing("theta"))?,
            lambda: merged.lambda.ok_or_else(|| missing("lambda"))?,
            p: merged.p.ok_or_else(|| missing("p"))?,
            g: merged.g.ok_or_else(|| missing("g"))?,
            n_agents: merged.n_agents.ok_or_else(|| missing("n_agents"))?,
        };
        Ok(gggp_core::params::validate_params(raw)?)
    }
}
