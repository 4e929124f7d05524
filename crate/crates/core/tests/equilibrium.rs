use gggp_core::equilibrium::{
    best_response, best_response_dynamics, deterministic_utility, deviation_candidates, expected_potential,
    expected_threshold_utility, potential_congestion, potential_pairwise, pure_nash_set, quadrature_deviation_audit,
    threshold_upper_bound, ActionProfile, BestResponse, QUADRATURE_AUDIT_TOL,
};
use gggp_core::estimators::{benefit_estimate, cost_estimate};
use gggp_core::mc::{run_chunked, Moments};
use gggp_core::meanfield::reference;
use gggp_core::quadrature::QuadratureSpec;
use gggp_core::simulation::{deviation_audit, SignalSampler};
use gggp_core::{AgentCount, ModelParams, PolicyKind, Threshold, ThresholdProfile};
use proptest::prelude::*;

fn params(k: u32, theta: f64, lambda: f64, p: i32, g: f64, n: u64) -> ModelParams {
    ModelParams::new(k, theta, lambda, p, g, AgentCount::Finite(n)).unwrap()
}

fn row2(n: u64) -> ModelParams {
    reference::ROWS[1].params().unwrap().with_agents(AgentCount::Finite(n)).unwrap()
}

fn threshold() -> impl Strategy<Value = Threshold> {
    prop_oneof![
        1 => Just(Threshold::Never),
        1 => Just(Threshold::Unbounded),
        8 => (0u32..25).prop_map(Threshold::At),
    ]
}

proptest! {
    #[test]
    fn single_flip_matches_potential(
        n in 2usize..=8,
        bits in any::<u64>(),
        i_frac in 0.0f64..1.0,
        x in 1e-6f64..=10.0,
        p in prop::sample::select(vec![1, 2, 3, -1, -2]),
        g in 0.1f64..10.0,
    ) {
        let m = params(1, 1.0, 1.0, p, g, n as u64);
        let i = ((i_frac * n as f64) as usize).min(n - 1);
        let mut on = ActionProfile::from_bits(bits, n);
        on.0[i] = true;
        let mut off = on.clone();
        off.0[i] = false;
        let du = deterministic_utility(i, &on, x, &m).unwrap() - deterministic_utility(i, &off, x, &m).unwrap();
        let dp = potential_pairwise(&on, x, &m).unwrap() - potential_pairwise(&off, x, &m).unwrap();
        let dc = potential_congestion(&on, x, &m).unwrap() - potential_congestion(&off, x, &m).unwrap();
        let tol = 1e-12 * g.max(m.cost(x)).max(1.0);
        prop_assert!((du - dp).abs() < tol);
        prop_assert!((du - dc).abs() < tol);
    }

    #[test]
    fn nash_set_is_extreme_and_nonempty(n in 2usize..=6, x in 0.0f64..8.0, g in 0.5f64..5.0) {
        let m = params(1, 1.0, 1.0, 1, g, n as u64);
        let set = pure_nash_set(x, &m).unwrap();
        prop_assert!(!set.is_empty());
        prop_assert!(set.iter().all(|a| a.active() == 0 || a.active() == n));
    }

    #[test]
    fn low_best_response_crosses_once_and_respects_bound(
        taus in prop::collection::vec(threshold(), 1..5),
        row in 0usize..9,
    ) {
        let r = reference::ROWS[row];
        let m = params(r.k, r.theta, r.lambda, 1, r.g, taus.len() as u64 + 1);
        let others = ThresholdProfile::new(PolicyKind::Low, taus);
        let bound = threshold_upper_bound(&m).unwrap();
        let top = bound.map_or(0, |t| t as u64 + 1);
        let signs: Vec<bool> = (0..=top)
            .map(|y| benefit_estimate(y, &others, &m).unwrap() >= cost_estimate(y, &m).unwrap())
            .collect();
        prop_assert!(signs.windows(2).filter(|w| w[0] != w[1]).count() <= 1);
        match best_response(&others, &m).unwrap().tau_star {
            BestResponse::Threshold(t) => prop_assert!(bound.is_some_and(|b| t <= b)),
            BestResponse::Never => prop_assert!(!signs[0] || bound.is_none()),
            BestResponse::Always => prop_assert!(false, "low kind cannot be always"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expected_potential_is_exact(
        taus in prop::collection::vec(threshold(), 2..=5),
        a in threshold(),
        b in threshold(),
        i_frac in 0.0f64..1.0,
        row in 0usize..9,
    ) {
        let r = reference::ROWS[row];
        let m = params(r.k, r.theta, r.lambda, 1, r.g, taus.len() as u64);
        let spec = QuadratureSpec { rel_tol: 1e-10, ..Default::default() };
        let i = ((i_frac * taus.len() as f64) as usize).min(taus.len() - 1);
        let base = ThresholdProfile::new(PolicyKind::Low, taus);
        let (pa, pb) = (base.with(i, a), base.with(i, b));
        let du = expected_threshold_utility(i, &pa, &m, &spec).unwrap()
            - expected_threshold_utility(i, &pb, &m, &spec).unwrap();
        let dp = expected_potential(&pa, &m, &spec).unwrap() - expected_potential(&pb, &m, &spec).unwrap();
        prop_assert!((du - dp).abs() < 1e-6, "{} vs {}", du, dp);
    }
}

#[test]
fn potential_forms_differ_by_a_constant() {
    for n in 2..=8usize {
        for (x, p) in [(0.3, 1), (2.5, 2), (7.0, -1)] {
            let m = params(1, 1.0, 1.0, p, 3.0, n as u64);
            let diffs: Vec<f64> = (0..1u64 << n)
                .map(|bits| {
                    let a = ActionProfile::from_bits(bits, n);
                    potential_pairwise(&a, x, &m).unwrap() - potential_congestion(&a, x, &m).unwrap()
                })
                .collect();
            let spread = diffs.iter().cloned().fold(f64::MIN, f64::max) - diffs.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread < 1e-12, "n={n} spread {spread}");
        }
    }
}

#[test]
fn homogeneous_potential_matches_pre_limit_sampling() {
    // Per agent, E[(g/2) q^2 (N-1)/N + (g/N - X^p)(q - 1/2)] with q = P(Y <= tau | X).
    let n = 4u64;
    let m = row2(n);
    let tau = 4u32;
    let profile = ThresholdProfile::homogeneous(PolicyKind::Low, Threshold::At(tau), n as usize);
    let exact = expected_potential(&profile, &m, &QuadratureSpec::default()).unwrap() / n as f64;
    let sampler = SignalSampler::new(&m).unwrap();
    let nf = n as f64;
    let est = run_chunked(
        1_000_000,
        17,
        |rng, len| {
            let mut acc = Moments::default();
            for _ in 0..len {
                let x = sampler.state(rng);
                let rate = m.lambda() * x;
                let mut q = 0.0;
                let mut term = (-rate).exp();
                for y in 0..=tau {
                    if y > 0 {
                        term *= rate / y as f64;
                    }
                    q += term;
                }
                acc.push(0.5 * m.g() * q * q * (nf - 1.0) / nf + (m.g() / nf - x) * (q - 0.5));
            }
            acc
        },
        |a, b| a.merge(&b),
    )
    .unwrap()
    .estimate(17);
    assert!(est.within(exact, 3.0), "{est:?} vs {exact}");
}

#[test]
fn dynamics_converge_to_audited_equilibria() {
    let spec = QuadratureSpec::default();
    for n in [2u64, 3, 4] {
        let m = row2(n);
        let init = ThresholdProfile::homogeneous(PolicyKind::Low, Threshold::At(0), n as usize);
        let r = best_response_dynamics(&init, &m, 20).unwrap();
        assert!(r.converged, "n={n}");
        assert!(r.rounds <= 20);
        let audit = quadrature_deviation_audit(&r.profile, &m, &spec, QUADRATURE_AUDIT_TOL).unwrap();
        assert!(audit.passes, "n={n}: {audit:?}");
        let candidates = deviation_candidates(&r.profile, &m).unwrap();
        let mc = deviation_audit(&r.profile, &m, &candidates, 1_000_000, 42, None).unwrap();
        assert!(mc.passes, "n={n}: max upper {}", mc.max_upper);
    }
}

#[test]
fn idle_profile_fails_both_audits_above_critical_gain() {
    let m = row2(3);
    let idle = ThresholdProfile::homogeneous(PolicyKind::Low, Threshold::Never, 3);
    let spec = QuadratureSpec::default();
    let exact = quadrature_deviation_audit(&idle, &m, &spec, QUADRATURE_AUDIT_TOL).unwrap();
    assert!(!exact.passes && exact.max_gain > 0.0);
    let candidates = deviation_candidates(&idle, &m).unwrap();
    let mc = deviation_audit(&idle, &m, &candidates, 100_000, 1, None).unwrap();
    assert!(!mc.passes && mc.max_gain > 0.0);
}

#[test]
fn trajectories_from_all_active_are_recorded() {
    // Monotone decrease is observed here, not claimed in general.
    let m = row2(3);
    let init = ThresholdProfile::homogeneous(PolicyKind::Low, Threshold::Unbounded, 3);
    let r = best_response_dynamics(&init, &m, 50).unwrap();
    assert!(r.converged);
    let mut prev = init.taus().to_vec();
    for round in &r.trace {
        for (a, b) in round.profile.taus().iter().zip(&prev) {
            assert!(a <= b);
        }
        prev = round.profile.taus().to_vec();
    }
}
