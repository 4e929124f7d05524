//! The five subcommands. Each returns a fully rendered report.

use gggp_core::equilibrium::{
    best_response_dynamics, deviation_candidates, quadrature_deviation_audit, sufficient_condition_low,
    DynamicsResult, QuadratureAudit, QUADRATURE_AUDIT_TOL,
};
use gggp_core::checks::{self, CheckOptions, SuiteReport, SUITES};
use gggp_core::meanfield::{
    critical_gain_infinite, default_tau_max, mfpf_argmax, mfpf_curve, reference::ROWS, tau_certainty_equivalence,
    tau_omniscient,
};
use gggp_core::quadrature::QuadratureSpec;
use gggp_core::simulation::{deviation_audit, AuditEntry, AuditReport};
use gggp_core::{AgentCount, McEstimate, ModelParams, PolicyKind, Threshold, ThresholdProfile};
use serde::Serialize;

use crate::render::{self, format_number as num, Meta};
use crate::{Cli, CliError, Command, Format, Outcome, EXIT_NUMERICAL, EXIT_OK, EXIT_SUITE};

/// Sample count at which the reference maximizers are expected within one step.
pub const FULL_SAMPLES: u64 = 1_000_000;

/// Largest population the dynamics command accepts.
pub const MAX_DYNAMICS_AGENTS: usize = 32;

pub fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Threshold { tau_max } => threshold(cli, *tau_max),
        Command::Table => table(cli),
        Command::Potential { tau_max } => potential(cli, *tau_max),
        Command::Dynamics { init, max_rounds, no_mc_audit } => dynamics(cli, init, *max_rounds, !*no_mc_audit),
        Command::Check { suite, inject_cost_sign_flip } => check(cli, suite, *inject_cost_sign_flip),
    }
}

fn ok(report: String) -> Outcome {
    Outcome { report, code: EXIT_OK }
}

fn require_low(params: &ModelParams) -> Result<(), CliError> {
    if params.p() > 0 {
        Ok(())
    } else {
        Err(CliError::Validation("the mean-field potential needs p > 0".into()))
    }
}

/// Explicit flag, then the reference row's range, then the default range.
fn resolve_tau_max(cli: &Cli, explicit: Option<u32>, params: &ModelParams) -> u32 {
    explicit
        .or_else(|| cli.global.params.reference_row().map(|r| r.tau_max))
        .unwrap_or_else(|| default_tau_max(params))
}

#[derive(Serialize)]
struct ThresholdReport {
    tau_max: u32,
    tau_star: u32,
    potential_at_tau_star: McEstimate,
    tau_omni: f64,
    tau_ce: Option<u32>,
    /// `finite` for the N-agent condition, `infinite` for its limit.
    critical_gain_regime: &'static str,
    critical_gain: f64,
    critical_gain_infinite: f64,
    condition_holds: bool,
}

fn threshold(cli: &Cli, tau_max: Option<u32>) -> Result<Outcome, CliError> {
    let g = &cli.global;
    let params = g.params.resolve()?;
    require_low(&params)?;
    let tau_max = resolve_tau_max(cli, tau_max, &params);
    let (tau_star, curve) = mfpf_argmax(&params, tau_max, g.n_samples, g.seed)?;
    let infinite = critical_gain_infinite(&params)?;
    let (regime, critical_gain) = match params.n_agents() {
        AgentCount::Finite(_) => ("finite", sufficient_condition_low(&params)?.critical_gain),
        AgentCount::Infinite => ("infinite", infinite),
    };
    let report = ThresholdReport {
        tau_max,
        tau_star,
        potential_at_tau_star: curve.values[tau_star as usize],
        tau_omni: tau_omniscient(&params),
        tau_ce: tau_certainty_equivalence(&params).ok(),
        critical_gain_regime: regime,
        critical_gain,
        critical_gain_infinite: infinite,
        condition_holds: params.g() > critical_gain,
    };
    let meta = Meta::new("threshold", Some(params), g.seed, Some(g.n_samples));
    let text = match g.format {
        Format::Json => render::json(&meta, &report)?,
        Format::Csv => render::csv(
            &meta,
            &[("tau_max", tau_max.to_string()), ("critical_gain_regime", regime.into())],
            &["tau_star", "potential", "stderr", "tau_omni", "tau_ce", "critical_gain", "condition_holds"],
            &[vec![
                tau_star.to_string(),
                num(report.potential_at_tau_star.mean),
                num(report.potential_at_tau_star.stderr),
                num(report.tau_omni),
                report.tau_ce.map_or(String::new(), |t| t.to_string()),
                num(critical_gain),
                report.condition_holds.to_string(),
            ]],
        )?,
    };
    Ok(ok(text))
}

#[derive(Serialize)]
struct TableRow {
    row: usize,
    params: ModelParams,
    tau_max: u32,
    tau_star: u32,
    expected_tau_star: u32,
    tau_star_pass: bool,
    tau_omni: f64,
    expected_tau_omni: f64,
    tau_omni_pass: bool,
    tau_ce: u32,
    expected_tau_ce: u32,
    tau_ce_pass: bool,
}

#[derive(Serialize)]
struct TableReport {
    /// Allowed distance between computed and expected maximizers.
    tau_star_tolerance: u32,
    /// Set when fewer than the full sample count was used.
    reduced_samples: bool,
    all_pass: bool,
    rows: Vec<TableRow>,
}

fn table(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    if !g.params.is_empty() {
        return Err(CliError::Validation("table uses the built-in rows; parameter flags are not accepted".into()));
    }
    let reduced = g.n_samples < FULL_SAMPLES;
    let tolerance = if reduced { 3 } else { 1 };
    let mut rows = Vec::with_capacity(ROWS.len());
    for (i, r) in ROWS.iter().enumerate() {
        let params = r.params()?;
        let (tau_star, _) = mfpf_argmax(&params, r.tau_max, g.n_samples, g.seed)?;
        let tau_omni = tau_omniscient(&params);
        let tau_ce = tau_certainty_equivalence(&params)?;
        rows.push(TableRow {
            row: i + 1,
            params,
            tau_max: r.tau_max,
            tau_star,
            expected_tau_star: r.tau_star,
            tau_star_pass: tau_star.abs_diff(r.tau_star) <= tolerance,
            tau_omni,
            expected_tau_omni: r.tau_omni,
            tau_omni_pass: (tau_omni - r.tau_omni).abs() <= 1e-12 * r.tau_omni.abs().max(1.0),
            tau_ce,
            expected_tau_ce: r.tau_ce,
            tau_ce_pass: tau_ce == r.tau_ce,
        });
    }
    let all_pass = rows.iter().all(|r| r.tau_star_pass && r.tau_omni_pass && r.tau_ce_pass);
    let report = TableReport { tau_star_tolerance: tolerance, reduced_samples: reduced, all_pass, rows };
    let meta = Meta::new("table", None, g.seed, Some(g.n_samples));
    let text = match g.format {
        Format::Json => render::json(&meta, &report)?,
        Format::Csv => {
            let data: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.row.to_string(),
                        r.params.k().to_string(),
                        num(r.params.theta()),
                        num(r.params.lambda()),
                        r.params.p().to_string(),
                        num(r.params.g()),
                        r.params.n_agents().to_string(),
                        r.tau_max.to_string(),
                        r.tau_star.to_string(),
                        r.expected_tau_star.to_string(),
                        r.tau_star_pass.to_string(),
                        num(r.tau_omni),
                        num(r.expected_tau_omni),
                        r.tau_omni_pass.to_string(),
                        r.tau_ce.to_string(),
                        r.expected_tau_ce.to_string(),
                        r.tau_ce_pass.to_string(),
                    ]
                })
                .collect();
            render::csv(
                &meta,
                &[
                    ("tau_star_tolerance", tolerance.to_string()),
                    ("reduced_samples", reduced.to_string()),
                    ("all_pass", all_pass.to_string()),
                ],
                &[
                    "row",
                    "k",
                    "theta",
                    "lambda",
                    "p",
                    "g",
                    "n_agents",
                    "tau_max",
                    "tau_star",
                    "expected_tau_star",
                    "tau_star_pass",
                    "tau_omni",
                    "expected_tau_omni",
                    "tau_omni_pass",
                    "tau_ce",
                    "expected_tau_ce",
                    "tau_ce_pass",
                ],
                &data,
            )?
        }
    };
    Ok(ok(text))
}

#[derive(Serialize)]
struct CurvePoint {
    tau: u32,
    value: f64,
    stderr: f64,
    is_argmax: bool,
}

#[derive(Serialize)]
struct PotentialReport {
    tau_max: u32,
    argmax: u32,
    curve: Vec<CurvePoint>,
}

fn potential(cli: &Cli, tau_max: Option<u32>) -> Result<Outcome, CliError> {
    let g = &cli.global;
    let params = g.params.resolve()?;
    require_low(&params)?;
    let tau_max = resolve_tau_max(cli, tau_max, &params);
    let curve = mfpf_curve(&params, tau_max, g.n_samples, g.seed)?;
    let argmax = curve.argmax();
    let points: Vec<CurvePoint> = curve
        .taus
        .iter()
        .zip(&curve.values)
        .map(|(&tau, v)| CurvePoint { tau, value: v.mean, stderr: v.stderr, is_argmax: tau == argmax })
        .collect();
    let meta = Meta::new("potential", Some(params), g.seed, Some(g.n_samples));
    let text = match g.format {
        Format::Json => render::json(&meta, &PotentialReport { tau_max, argmax, curve: points })?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|p| vec![p.tau.to_string(), num(p.value), num(p.stderr), (p.is_argmax as u8).to_string()])
                .collect();
            render::csv(
                &meta,
                &[("tau_max", tau_max.to_string()), ("argmax", argmax.to_string())],
                &["tau", "value", "stderr", "is_argmax"],
                &rows,
            )?
        }
    };
    Ok(ok(text))
}

/// Accepts the words used in serialized profiles: `never` for low policies,
/// `always` for high ones, `inf` for either.
fn parse_threshold(s: &str, kind: PolicyKind) -> Result<Threshold, CliError> {
    match (s.trim(), kind) {
        ("-1", _) | ("never", PolicyKind::Low) | ("always", PolicyKind::High) => Ok(Threshold::Never),
        ("inf", _) => Ok(Threshold::Unbounded),
        (t, _) => t
            .parse()
            .map(Threshold::At)
            .map_err(|_| CliError::Validation(format!("invalid threshold {t:?} for a {kind:?} policy"))),
    }
}

/// A single value is broadcast to every agent.
fn parse_init(spec: &str, kind: PolicyKind, n: usize) -> Result<ThresholdProfile, CliError> {
    let taus = spec.split(',').map(|t| parse_threshold(t, kind)).collect::<Result<Vec<_>, _>>()?;
    match taus.len() {
        1 => Ok(ThresholdProfile::homogeneous(kind, taus[0], n)),
        len if len == n => Ok(ThresholdProfile::new(kind, taus)),
        len => Err(CliError::Validation(format!("--init lists {len} thresholds for {n} agents"))),
    }
}

#[derive(Serialize)]
struct McAuditSummary {
    n_realizations: u64,
    epsilon: f64,
    max_gain: f64,
    max_upper: f64,
    worst: Option<AuditEntry>,
    passes: bool,
}

impl From<AuditReport> for McAuditSummary {
    fn from(r: AuditReport) -> Self {
        let worst = r.entries.iter().max_by(|a, b| a.upper.total_cmp(&b.upper)).cloned();
        McAuditSummary {
            n_realizations: r.n_realizations,
            epsilon: r.epsilon,
            max_gain: r.max_gain,
            max_upper: r.max_upper,
            worst,
            passes: r.passes,
        }
    }
}

#[derive(Serialize)]
struct DynamicsReport {
    initial: ThresholdProfile,
    max_rounds: usize,
    #[serde(flatten)]
    result: DynamicsResult,
    quadrature_audit: QuadratureAudit,
    mc_audit: Option<McAuditSummary>,
    verdict: &'static str,
}

fn dynamics(cli: &Cli, init: &str, max_rounds: usize, mc_audit: bool) -> Result<Outcome, CliError> {
    let g = &cli.global;
    let params = g.params.resolve()?;
    let n = params.finite_n()?;
    if n > MAX_DYNAMICS_AGENTS {
        return Err(CliError::Validation(format!("dynamics supports at most {MAX_DYNAMICS_AGENTS} agents, got {n}")));
    }
    let kind = if params.p() > 0 { PolicyKind::Low } else { PolicyKind::High };
    let initial = parse_init(init, kind, n)?;
    let result = best_response_dynamics(&initial, &params, max_rounds)?;
    let quad = quadrature_deviation_audit(&result.profile, &params, &QuadratureSpec::default(), QUADRATURE_AUDIT_TOL)?;
    let mc = if mc_audit {
        let candidates = deviation_candidates(&result.profile, &params)?;
        Some(McAuditSummary::from(deviation_audit(&result.profile, &params, &candidates, g.n_samples, g.seed, None)?))
    } else {
        None
    };
    let passes = quad.passes && mc.as_ref().is_none_or(|m| m.passes);
    let verdict = if passes { "PASS" } else { "FAIL" };
    let code = if result.converged { EXIT_OK } else { EXIT_NUMERICAL };
    let report =
        DynamicsReport { initial, max_rounds, result, quadrature_audit: quad, mc_audit: mc, verdict };
    let meta = Meta::new("dynamics", Some(params), g.seed, mc_audit.then_some(g.n_samples));
    let text = match g.format {
        Format::Json => render::json(&meta, &report)?,
        Format::Csv => {
            let mut header = vec!["round".to_string(), "changed".to_string()];
            header.extend((0..n).map(|i| format!("tau_{i}")));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows: Vec<Vec<String>> = report
                .result
                .trace
                .iter()
                .map(|r| {
                    let mut row = vec![r.round.to_string(), r.changed.to_string()];
                    row.extend(r.profile.taus().iter().map(|t| threshold_cell(*t)));
                    row
                })
                .collect();
            let mut extra = vec![
                ("kind", format!("{kind:?}").to_lowercase()),
                ("initial", report.initial.taus().iter().map(|t| threshold_cell(*t)).collect::<Vec<_>>().join(";")),
                ("max_rounds", max_rounds.to_string()),
                ("converged", report.result.converged.to_string()),
                ("rounds", report.result.rounds.to_string()),
                ("quadrature_audit_max_gain", num(report.quadrature_audit.max_gain)),
                ("quadrature_audit_passes", report.quadrature_audit.passes.to_string()),
            ];
            if let Some(m) = &report.mc_audit {
                extra.push(("mc_audit_max_upper", num(m.max_upper)));
                extra.push(("mc_audit_epsilon", num(m.epsilon)));
                extra.push(("mc_audit_passes", m.passes.to_string()));
            }
            extra.push(("verdict", verdict.into()));
            for w in &report.result.warnings {
                extra.push(("warning", w.clone()));
            }
            render::csv(&meta, &extra, &header, &rows)?
        }
    };
    Ok(Outcome { report: text, code })
}

fn threshold_cell(t: Threshold) -> String {
    match t {
        Threshold::Never => "-1".into(),
        Threshold::At(v) => v.to_string(),
        Threshold::Unbounded => "inf".into(),
    }
}

#[derive(Serialize)]
struct CheckReport {
    all_pass: bool,
    suites: Vec<SuiteReport>,
}

fn check(cli: &Cli, suites: &[String], inject_cost_sign_flip: bool) -> Result<Outcome, CliError> {
    let g = &cli.global;
    let options = CheckOptions { seed: g.seed, inject_cost_sign_flip };
    let names: Vec<&str> = if suites.is_empty() { SUITES.to_vec() } else { suites.iter().map(String::as_str).collect() };
    let mut reports = Vec::with_capacity(names.len());
    for name in names {
        let report = checks::run_suite(name, &options).ok_or_else(|| {
            CliError::Validation(format!("unknown suite {name:?} (available: {})", SUITES.join(", ")))
        })??;
        reports.push(report);
    }
    let all_pass = reports.iter().all(|r| r.passed);
    let meta = Meta::new("check", None, g.seed, None);
    let text = match g.format {
        Format::Json => render::json(&meta, &CheckReport { all_pass, suites: reports })?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.name.clone(),
                        r.passed.to_string(),
                        r.checks.to_string(),
                        r.violations.to_string(),
                        r.failures.first().cloned().unwrap_or_default(),
                    ]
                })
                .collect();
            render::csv(
                &meta,
                &[("inject_cost_sign_flip", inject_cost_sign_flip.to_string()), ("all_pass", all_pass.to_string())],
                &["suite", "passed", "checks", "violations", "first_failure"],
                &rows,
            )?
        }
    };
    Ok(Outcome { report: text, code: if all_pass { EXIT_OK } else { EXIT_SUITE } })
}
