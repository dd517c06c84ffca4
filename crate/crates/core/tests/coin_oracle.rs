mod common;

use common::{batch_mean_se, Coin, Law};
use mf_infer::inference::{
    estimate_g, run_sampler, ConstantMean, Discrete, LogRow, MLaw, MultifidelityParts,
    MultifidelitySampler, Schedule, StopCondition,
};
use mf_infer::models::CoinModel;
use mf_infer::perf::{empirical_perf, j_hi, j_mf};

fn laws() -> [(Law, MLaw); 3] {
    [
        (Law::Poisson, MLaw::Poisson),
        (Law::Binomial(4), MLaw::Binomial { max: 4 }),
        (Law::Geometric, MLaw::Geometric),
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn enumerated_constants_match_brute_force() {
    for q in [[0.5, 0.5], [0.2, 0.8], [0.9, 0.1]] {
        for shift in [0.1, -0.2, 0.0] {
            let model = CoinModel { shift, cost_lo: 1.0, cost_hi: 10.0 };
            let coin = Coin { shift, q, ..Coin::default() };
            let e = model.finite_model(q).enumerate().unwrap();
            let o = coin.oracle(Law::Poisson, 1.0);
            assert!(rel(e.g_bar_hi, o.g_bar) < 1e-12);
            assert!(rel(e.evidence, o.evidence) < 1e-12);
            assert!(rel(e.constants.v_hi, o.v_hi) < 1e-12);
            assert!(rel(e.constants.v_mf, o.v_mf) < 1e-12);
            assert!(rel(e.constants.e_mf, o.e_mf) < 1e-12);
            assert!(rel(j_hi(&e.constants), o.j_hi) < 1e-12);
            for (law, mlaw) in laws() {
                for mu in [0.3, 1.0, 2.5] {
                    let o = coin.oracle(law, mu);
                    let j = j_mf(&e.measure, &|_| mu, &mlaw, &e.constants).unwrap();
                    assert!(rel(j, o.j_mf) < 1e-10, "{law:?} mu={mu} shift={shift}: {j} vs {}", o.j_mf);
                }
            }
        }
    }
}

#[test]
fn multifidelity_weight_is_unbiased_in_expectation() {
    let coin = Coin::default();
    for (law, _) in laws() {
        for mu in [0.1, 1.0, 3.0] {
            let o = coin.oracle(law, mu);
            assert!(rel(o.mean_w_mf, o.evidence) < 1e-11, "{law:?} {mu}");
        }
    }
}

#[test]
fn sampled_weights_follow_the_enumerated_law() {
    let model = CoinModel::default();
    let prior = CoinModel::prior();
    let weighting = CoinModel::weighting();
    let q = Discrete::new(vec![vec![0.25], vec![0.75]], vec![0.3, 0.7]).unwrap();
    let coin = Coin { q: [0.3, 0.7], ..Coin::default() };
    let mu = 0.5;
    let law = MLaw::Geometric;
    let sampler = MultifidelitySampler {
        prior: &prior,
        proposal: &q,
        parts: MultifidelityParts {
            simulator: &model,
            lo_weighting: &weighting,
            hi_weighting: &weighting,
            replicates: 1,
        },
        mean_fn: &ConstantMean(mu),
        law: &law,
        target: &|t: &[f64]| t[0],
    };
    let set = run_sampler(&sampler, 11, StopCondition::Iterations(100_000), Schedule::default()).unwrap();
    let o = coin.oracle(Law::Geometric, mu);

    let w: Vec<f64> = set.samples.iter().map(|s| s.weight).collect();
    let (mean_w, se_w) = batch_mean_se(&w, 50);
    assert!((mean_w - o.evidence).abs() < 4.0 * se_w, "{mean_w} ± {se_w} vs {}", o.evidence);

    let s: Vec<f64> = set
        .samples
        .iter()
        .map(|s| (s.weight * (s.g_value - o.g_bar)).powi(2))
        .collect();
    let (mean_s, se_s) = batch_mean_se(&s, 50);
    let target = o.j_mf / (o.c_lo + mu * o.c_hi);
    assert!((mean_s - target).abs() < 4.0 * se_s, "{mean_s} ± {se_s} vs {target}");

    let g = estimate_g(&set.samples).unwrap();
    assert!((g - o.g_bar).abs() < 0.01, "{g}");

    let rows: Vec<LogRow> = set.samples.iter().map(LogRow::from_sample).collect();
    let perf = empirical_perf(&rows, &law).unwrap();
    assert!(rel(perf.j_mf_hat, o.j_mf) < 0.05, "{} vs {}", perf.j_mf_hat, o.j_mf);
    assert!(rel(perf.j_hi_hat, o.j_hi) < 0.05, "{} vs {}", perf.j_hi_hat, o.j_hi);
    assert!(rel(perf.v_mf, o.v_mf) < 0.05, "{} vs {}", perf.v_mf, o.v_mf);
    assert!(rel(perf.e_mf, o.e_mf) < 0.1, "{} vs {}", perf.e_mf, o.e_mf);
}
