//! Invariant suites run by the `check` command.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{cross_belief, gamma_pdf_unchecked, marginal_signal};
use crate::equilibrium::{
    deterministic_utility, expected_potential, expected_threshold_utility, potential_congestion, potential_pairwise,
    pure_nash_set, threshold_upper_bound, ActionProfile,
};
use crate::error::Result;
use crate::estimators::{belief_pair, benefit_estimate, cost_estimate};
use crate::mc::substream;
use crate::meanfield::{critical_gain_infinite, endpoints, mfpf_estimate, reference, tau_certainty_equivalence};
use crate::params::{AgentCount, ModelParams};
use crate::policy::{PolicyKind, Threshold, ThresholdProfile};
use crate::quadrature::{integrate, QuadratureSpec};

pub const SUITES: [&str; 5] = ["monotonicity", "potential", "nash", "normalization", "oracles"];

/// Most failure messages kept per suite.
const MAX_REPORTED: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub seed: u64,
    /// Mutation hook: negate the cost estimate inside the monotonicity suite.
    pub inject_cost_sign_flip: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { seed: 42, inject_cost_sign_flip: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub checks: u64,
    pub violations: u64,
    pub failures: Vec<String>,
}

#[derive(Default)]
struct Tally {
    checks: u64,
    violations: u64,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
            if self.failures.len() < MAX_REPORTED {
                self.failures.push(what());
            }
        }
    }

    fn report(self, name: &str) -> SuiteReport {
        SuiteReport {
            name: name.to_string(),
            passed: self.violations == 0,
            checks: self.checks,
            violations: self.violations,
            failures: self.failures,
        }
    }
}

/// `k in {1,2,3}`, `theta in {0.1, 0.5, 1}`, `lambda in {1, 2, 5}`.
pub fn parameter_grid() -> Vec<(u32, f64, f64)> {
    let mut out = Vec::with_capacity(27);
    for k in [1, 2, 3] {
        for theta in [0.1, 0.5, 1.0] {
            for lambda in [1.0, 2.0, 5.0] {
                out.push((k, theta, lambda));
            }
        }
    }
    out
}

fn grid_params(k: u32, theta: f64, lambda: f64, p: i32, g: f64, n: u64) -> Result<ModelParams> {
    ModelParams::new(k, theta, lambda, p, g, AgentCount::Finite(n))
}

/// Runs the named suite; `None` for an unknown name.
pub fn run_suite(name: &str, options: &CheckOptions) -> Option<Result<SuiteReport>> {
    let report = match name {
        "monotonicity" => monotonicity(options),
        "potential" => potential(options),
        "nash" => nash(options),
        "normalization" => normalization(),
        "oracles" => oracles(options),
        _ => return None,
    };
    Some(report.map(|t| t.report(name)))
}

pub fn run_all(options: &CheckOptions) -> Result<Vec<SuiteReport>> {
    SUITES.iter().map(|s| run_suite(s, options).expect("known suite")).collect()
}

fn monotonicity(options: &CheckOptions) -> Result<Tally> {
    let mut t = Tally::default();
    let sign = if options.inject_cost_sign_flip { -1.0 } else { 1.0 };
    for (k, theta, lambda) in parameter_grid() {
        for p in [1, 2, -1, -2] {
            let m = grid_params(k, theta, lambda, p, 1.0, 5)?;
            let start = if p > 0 { 0 } else { (1 - p as i64 - k as i64).max(0) as u64 };
            let mut prev = sign * cost_estimate(start, &m)?;
            for y in start + 1..=500 {
                let c = sign * cost_estimate(y, &m)?;
                let ok = if p > 0 { c > prev } else { c < prev };
                t.check(ok, || format!("cost not monotone at y={y}, k={k}, theta={theta}, lambda={lambda}, p={p}"));
                prev = c;
            }
        }

        let m = grid_params(k, theta, lambda, 1, 1.0, 5)?;
        for tau in 0..=50u32 {
            let mut prev = belief_pair(0, Threshold::At(tau), &m);
            for y in 1..=300u64 {
                let cur = belief_pair(y, Threshold::At(tau), &m);
                // Saturated low beliefs are compared through their complement.
                let low_down = cur.0 < prev.0 || (cur.0 == prev.0 && cur.1 > prev.1);
                let high_up = cur.1 > prev.1 || (cur.1 == prev.1 && cur.0 < prev.0);
                t.check(low_down, || format!("low belief not decreasing at y={y}, tau={tau}, k={k}, theta={theta}, lambda={lambda}"));
                t.check(high_up, || format!("high belief not increasing at y={y}, tau={tau}, k={k}, theta={theta}, lambda={lambda}"));
                prev = cur;
            }
        }

        let n = 5;
        for tau in [0u32, 10, 50] {
            let low = ThresholdProfile::homogeneous(PolicyKind::Low, Threshold::At(tau), n - 1);
            let high = ThresholdProfile::homogeneous(PolicyKind::High, Threshold::At(tau), n - 1);
            let b_low = benefit_estimate(1000, &low, &m)?;
            let b_high = benefit_estimate(1000, &high, &m)?;
            t.check((b_low - m.g() / n as f64).abs() < 1e-6, || format!("low benefit limit {b_low} at tau={tau}"));
            t.check((b_high - m.g()).abs() < 1e-6, || format!("high benefit limit {b_high} at tau={tau}"));
        }
    }
    Ok(t)
}

fn potential(options: &CheckOptions) -> Result<Tally> {
    let mut t = Tally::default();
    let mut rng = substream(options.seed, 1);

    for _ in 0..1000 {
        let n = rng.random_range(2..=8u64);
        let p = [1, 2, -1, -2][rng.random_range(0..4)];
        let g = rng.random_range(0.1..10.0);
        let x = 10.0 - rng.random_range(0.0..10.0);
        let m = grid_params(1, 1.0, 1.0, p, g, n)?;
        let a = ActionProfile::from_bits(rng.random::<u64>(), n as usize);
        let i = rng.random_range(0..n as usize);
        let on = ActionProfile(a.0.iter().enumerate().map(|(j, &v)| if j == i { true } else { v }).collect());
        let off = ActionProfile(a.0.iter().enumerate().map(|(j, &v)| if j == i { false } else { v }).collect());
        let du = deterministic_utility(i, &on, x, &m)? - deterministic_utility(i, &off, x, &m)?;
        let dp = potential_pairwise(&on, x, &m)? - potential_pairwise(&off, x, &m)?;
        let dc = potential_congestion(&on, x, &m)? - potential_congestion(&off, x, &m)?;
        // Absolute 1e-12 in units of the payoff scale.
        let tol = 1e-12 * g.max(m.cost(x)).max(1.0);
        t.check((du - dp).abs() < tol, || format!("pairwise identity off by {} (n={n}, x={x}, p={p})", du - dp));
        t.check((du - dc).abs() < tol, || format!("congestion identity off by {} (n={n}, x={x}, p={p})", du - dc));
    }

    for n in 2..=8usize {
        for _ in 0..5 {
            let p = [1, 2, -1][rng.random_range(0..3)];
            let x = rng.random_range(0.05..10.0);
            let m = grid_params(1, 1.0, 1.0, p, rng.random_range(0.1..10.0), n as u64)?;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for bits in 0..1u64 << n {
                let a = ActionProfile::from_bits(bits, n);
                let d = potential_pairwise(&a, x, &m)? - potential_congestion(&a, x, &m)?;
                lo = lo.min(d);
                hi = hi.max(d);
            }
            let tol = 1e-12 * m.g().max(m.cost(x)).max(1.0) * n as f64;
            t.check(hi - lo < tol, || format!("potential forms differ by a non-constant {} (n={n})", hi - lo));
        }
    }

    let spec = QuadratureSpec { rel_tol: 1e-10, ..Default::default() };
    let draw_tau = |rng: &mut crate::mc::Stream| match rng.random_range(0..20u32) {
        0 => Threshold::Never,
        1 => Threshold::Unbounded,
        v => Threshold::At(v - 2),
    };
    for _ in 0..200 {
        let row = reference::ROWS[rng.random_range(0..reference::ROWS.len())];
        let n = rng.random_range(2..=5u64);
        let m = row.params()?.with_agents(AgentCount::Finite(n))?;
        let taus: Vec<Threshold> = (0..n).map(|_| draw_tau(&mut rng)).collect();
        let base = ThresholdProfile::new(PolicyKind::Low, taus);
        let i = rng.random_range(0..n as usize);
        let a = base.with(i, draw_tau(&mut rng));
        let b = base.with(i, draw_tau(&mut rng));
        let du = expected_threshold_utility(i, &a, &m, &spec)? - expected_threshold_utility(i, &b, &m, &spec)?;
        let dp = expected_potential(&a, &m, &spec)? - expected_potential(&b, &m, &spec)?;
        t.check((du - dp).abs() < 1e-6, || format!("expected potential identity off by {} ({row:?}, n={n})", du - dp));
    }
    Ok(t)
}

fn nash(options: &CheckOptions) -> Result<Tally> {
    let mut t = Tally::default();
    let mut rng = substream(options.seed, 2);
    for n in 2..=6usize {
        for _ in 0..100 {
            let g = rng.random_range(0.5..5.0);
            let m = grid_params(1, 1.0, 1.0, 1, g, n as u64)?;
            let x = rng.random_range(0.0..1.5 * g);
            let set = pure_nash_set(x, &m)?;
            let inside = set.iter().all(|a| a.active() == 0 || a.active() == n);
            t.check(inside, || format!("equilibrium outside the extreme profiles at n={n}, x={x}, g={g}"));
            t.check(!set.is_empty(), || format!("no pure equilibrium at n={n}, x={x}, g={g}"));
        }
    }
    Ok(t)
}

fn normalization() -> Result<Tally> {
    let mut t = Tally::default();
    let spec = QuadratureSpec::default();
    for (k, theta, lambda) in parameter_grid() {
        let m = grid_params(k, theta, lambda, 1, 1.0, 2)?;
        let total = marginal_signal(&m).total_mass();
        t.check((total - 1.0).abs() < 1e-10, || format!("marginal mass {total} at k={k}, theta={theta}, lambda={lambda}"));
        for y in [0u64, 3, 40] {
            let total = cross_belief(y, &m).total_mass();
            t.check((total - 1.0).abs() < 1e-10, || format!("cross-belief mass {total} at y={y}, k={k}"));
        }
        let upper = 60.0 * (k as f64 + 1.0) / theta;
        let mass = integrate(|x| gamma_pdf_unchecked(x, k as f64, theta), 0.0, upper, &spec)?;
        t.check((mass - 1.0).abs() < 1e-8, || format!("prior mass {mass} at k={k}, theta={theta}"));
    }
    Ok(t)
}

fn oracles(options: &CheckOptions) -> Result<Tally> {
    let mut t = Tally::default();
    let m = grid_params(1, 1.0, 5.0, 1, 2.0, 3)?;
    t.check(cost_estimate(0, &m)? == 1.0 / 6.0, || "c(0) != 1/6".into());
    let (low, _) = belief_pair(0, Threshold::At(0), &m);
    t.check((low - 6.0 / 11.0).abs() < 1e-15, || format!("belief {low} != 6/11"));
    t.check(threshold_upper_bound(&m)? == Some(10), || "threshold bound != 10".into());
    for (k, theta, lambda, want, tol) in reference::CRITICAL_GAINS {
        let mm = ModelParams::new(k, theta, lambda, 1, 1.0, AgentCount::Infinite)?;
        let got = critical_gain_infinite(&mm)?;
        let ok = if tol == 0.0 { got == want } else { (got - want).abs() <= tol };
        t.check(ok, || format!("critical gain {got} vs {want}"));
    }
    for row in reference::ROWS {
        let mm = row.params()?;
        let ce = tau_certainty_equivalence(&mm)?;
        t.check(ce == row.tau_ce, || format!("tau_ce {ce} vs {} for {row:?}", row.tau_ce));
    }
    for row in [reference::ROWS[0], reference::ROWS[4]] {
        let mm = row.params()?;
        let zero = mfpf_estimate(0, &mm, 200_000, options.seed)?;
        let want = endpoints::at_zero(&mm)?;
        t.check(zero.within(want, 3.0), || format!("potential at 0: {} +- {} vs {want}", zero.mean, zero.stderr));
        let far = mfpf_estimate(10_000, &mm, 200_000, options.seed)?;
        let want = endpoints::at_infinity(&mm);
        t.check(far.within(want, 3.0), || format!("potential at inf: {} +- {} vs {want}", far.mean, far.stderr));
    }
    Ok(t)
}
