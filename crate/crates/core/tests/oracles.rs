//! Forward-sampling oracles for the closed-form inference and utility code.

use gggp_core::dist::{cross_belief_pmf, gamma_sample, marginal_signal_pmf, posterior_of_state};
use gggp_core::equilibrium::expected_threshold_utility;
use gggp_core::mc::{run_chunked, substream, Moments};
use gggp_core::quadrature::QuadratureSpec;
use gggp_core::simulation::{
    conditional_state_means, empirical_activation_probability, empirical_signal_pmf, realized_utilities,
    SignalSampler,
};
use gggp_core::{AgentCount, ModelParams, PolicyKind, Threshold, ThresholdProfile};

const N: u64 = 1_000_000;

fn params(k: u32, theta: f64, lambda: f64, g: f64, n: u64) -> ModelParams {
    ModelParams::new(k, theta, lambda, 1, g, AgentCount::Finite(n)).unwrap()
}

#[test]
fn conditional_state_mean_matches_posterior() {
    let ys = [0, 1, 3, 10];
    for m in [params(1, 1.0, 5.0, 1.0, 2), params(2, 0.5, 2.0, 1.0, 2)] {
        let means = conditional_state_means(&m, &ys, N, 11).unwrap();
        for (&y, est) in ys.iter().zip(&means) {
            let want = posterior_of_state(y, &m).mean();
            assert!((want - (y as f64 + m.k() as f64) / (m.lambda() + m.theta())).abs() < 1e-15);
            assert!(est.within(want, 3.0), "y={y}: {est:?} vs {want}");
        }
    }
}

#[test]
fn marginal_signal_total_variation() {
    for m in [params(1, 1.0, 5.0, 1.0, 2), params(2, 0.5, 2.0, 1.0, 2), params(3, 0.1, 1.0, 1.0, 2)] {
        let len = 400;
        let empirical = empirical_signal_pmf(&m, len, N, 5).unwrap();
        let mut tv = 0.0;
        let mut head = 0.0;
        for (y, &e) in empirical.iter().enumerate().take(len - 1) {
            let p = marginal_signal_pmf(y as u64, &m);
            head += p;
            tv += (e - p).abs();
        }
        tv += (empirical[len - 1] - (1.0 - head)).abs();
        assert!(0.5 * tv < 0.01, "tv {}", 0.5 * tv);
    }
}

#[test]
fn cross_belief_total_variation() {
    let m = params(1, 1.0, 5.0, 1.0, 2);
    let sampler = SignalSampler::new(&m).unwrap();
    let y_given = 2u64;
    let len = 120;
    let counts = run_chunked(
        N,
        3,
        |rng, chunk| {
            let mut counts = vec![0u64; len];
            for _ in 0..chunk {
                let x = sampler.state(rng);
                if sampler.signal(x, rng) == y_given {
                    counts[(sampler.signal(x, rng) as usize).min(len - 1)] += 1;
                }
            }
            counts
        },
        |a, b| a.iter_mut().zip(b).for_each(|(a, b)| *a += b),
    )
    .unwrap();
    let total: u64 = counts.iter().sum();
    let tv: f64 = (0..len - 1)
        .map(|l| (counts[l] as f64 / total as f64 - cross_belief_pmf(l as u64, y_given, &m)).abs())
        .sum::<f64>()
        * 0.5;
    assert!(total > 50_000);
    assert!(tv < 0.02, "tv {tv}");
}

#[test]
fn gamma_sample_moments() {
    let (shape, rate) = (3.0, 0.5);
    let m = run_chunked(
        N,
        8,
        |rng, len| {
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(gamma_sample(shape, rate, rng).unwrap());
            }
            m
        },
        |a, b| a.merge(&b),
    )
    .unwrap();
    assert!(m.estimate(8).within(shape / rate, 3.0));
    assert!((m.variance() / (shape / (rate * rate)) - 1.0).abs() < 0.02);
}

#[test]
fn signal_mean_follows_tower_rule() {
    let m = params(2, 0.5, 2.0, 1.0, 2);
    let sampler = SignalSampler::new(&m).unwrap();
    let est = run_chunked(
        N,
        2,
        |rng, len| {
            let mut acc = Moments::default();
            for _ in 0..len {
                let x = sampler.state(rng);
                acc.push(sampler.signal(x, rng) as f64);
            }
            acc
        },
        |a, b| a.merge(&b),
    )
    .unwrap()
    .estimate(2);
    assert!(est.within(2.0 * 2.0 / 0.5, 3.0), "{est:?}");
}

#[test]
fn activation_probability_geometric_series() {
    let m = params(1, 1.0, 5.0, 2.0, 3);
    let profile = ThresholdProfile::homogeneous(PolicyKind::Low, Threshold::At(5), 3);
    let est = empirical_activation_probability(&profile, &m, N, 6).unwrap();
    let want = 1.0 - (5.0f64 / 6.0).powi(6);
    assert!(est.within(want, 3.0), "{est:?} vs {want}");
}

#[test]
fn signals_are_exchangeable() {
    let m = params(1, 1.0, 5.0, 1.0, 2);
    let sampler = SignalSampler::new(&m).unwrap();
    let mut rng = substream(21, 0);
    let mut joint = [[0u64; 6]; 6];
    for _ in 0..200_000 {
        let x = sampler.state(&mut rng);
        let (a, b) = (sampler.signal(x, &mut rng), sampler.signal(x, &mut rng));
        joint[a.min(5) as usize][b.min(5) as usize] += 1;
    }
    for i in 0..6 {
        for j in 0..i {
            let (a, b) = (joint[i][j] as f64, joint[j][i] as f64);
            // Under symmetry the difference is approximately normal with variance a + b.
            assert!((a - b).abs() <= 4.0 * (a + b).sqrt(), "{i},{j}: {a} vs {b}");
        }
    }
}

#[test]
fn expected_utility_matches_realized_mean() {
    let spec = QuadratureSpec::default();
    let cases = [
        (params(1, 1.0, 5.0, 2.0, 3), 5),
        (params(2, 0.5, 2.0, 7.5, 4), 8),
        (params(3, 0.1, 1.0, 40.0, 2), 16),
        (params(1, 0.5, 1.0, 1.5, 5), 2),
        (params(2, 1.0, 5.0, 3.0, 3), 4),
    ];
    for (seed, (m, tau)) in cases.into_iter().enumerate() {
        let n = m.finite_n().unwrap();
        let profile = ThresholdProfile::homogeneous(PolicyKind::Low, Threshold::At(tau), n);
        let exact = expected_threshold_utility(0, &profile, &m, &spec).unwrap();
        let mc = realized_utilities(&profile, &m, N, seed as u64).unwrap();
        assert!(mc[0].within(exact, 3.0), "{m:?}: {:?} vs {exact}", mc[0]);
    }
}
