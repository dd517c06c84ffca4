use mf_infer::gillespie::enzyme::{
    enzyme_hi, simulate_coupled_pair, simulate_hi_coupled, EnzymeSettings, HI_PRODUCT_CHANNEL, PRIOR_HIGH,
    PRIOR_LOW,
};
use mf_infer::gillespie::{conservation_checks, parse_network, simulate, simulate_direct, StopRule, UnitPoissonPath};
use mf_infer::rng::{fork, stream};
use proptest::prelude::*;

const BIRTH_DEATH: &str = r#"
species = ["A"]
initial = [0]

[[reaction]]
name = "birth"
reactants = [0]
products = [1]
rate = 5.0

[[reaction]]
name = "death"
reactants = [1]
products = [0]
rate = 1.0
"#;

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn birth_death_from_file_matches_poisson_law() {
    let loaded = parse_network(BIRTH_DEATH).unwrap();
    assert_eq!(loaded.rates, vec![5.0, 1.0]);
    let stop = StopRule::horizon(2.0, 1_000_000);
    let lambda = 5.0 * (1.0 - (-2.0f64).exp());
    let n = 20_000;
    for direct in [false, true] {
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let mut rng = stream(17, i);
                let tr = if direct {
                    simulate_direct(&loaded.network, &[], &mut rng, &stop).unwrap()
                } else {
                    simulate(&loaded.network, &[], &mut rng, vec![], &stop, false).unwrap()
                };
                tr.final_state[0] as f64
            })
            .collect();
        let (m, v) = mean_var(&x);
        let se = (lambda / n as f64).sqrt();
        assert!((m - lambda).abs() < 4.0 * se, "direct={direct}: mean {m} vs {lambda}");
        // Var of the sample variance for Poisson: λ/n + 2λ²/(n-1)
        let se_v = (lambda / n as f64 + 2.0 * lambda * lambda / (n as f64 - 1.0)).sqrt();
        assert!((v - lambda).abs() < 4.0 * se_v, "direct={direct}: var {v} vs {lambda}");
    }
}

#[test]
fn rates_in_theta_override_the_file() {
    let loaded = parse_network(BIRTH_DEATH).unwrap();
    let stop = StopRule::horizon(2.0, 1_000_000);
    let n = 5000;
    let total: f64 = (0..n)
        .map(|i| {
            let tr = simulate(&loaded.network, &[1.0, 1.0], &mut stream(3, i), vec![], &stop, false).unwrap();
            tr.final_state[0] as f64
        })
        .sum();
    let lambda = 1.0 - (-2.0f64).exp();
    assert!((total / n as f64 - lambda).abs() < 4.0 * (lambda / n as f64).sqrt());
}

#[test]
fn pure_death_extinction_time_has_harmonic_mean() {
    let text = "species = [\"A\"]\ninitial = [20]\n[[reaction]]\nreactants = [1]\nproducts = [0]\nrate = 1.0\n";
    let net = parse_network(text).unwrap().network;
    let stop = StopRule::horizon(1e6, 1000);
    let n = 10_000;
    let t: Vec<f64> = (0..n)
        .map(|i| {
            let tr = simulate(&net, &[], &mut stream(8, i), vec![], &stop, false).unwrap();
            assert!(tr.absorbed && tr.final_state == vec![0]);
            tr.final_time
        })
        .collect();
    let (m, v) = mean_var(&t);
    let h: f64 = (1..=20).map(|k| 1.0 / k as f64).sum();
    assert!((m - h).abs() < 4.0 * (v / n as f64).sqrt(), "{m} vs {h}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coupled_enzyme_draws_share_the_low_fidelity_arrivals(
        u in prop::array::uniform3(0.0f64..1.0),
        seed in any::<u64>(),
    ) {
        let theta: Vec<f64> = (0..3).map(|i| PRIOR_LOW[i] + u[i] * (PRIOR_HIGH[i] - PRIOR_LOW[i])).collect();
        let settings = EnzymeSettings::default();
        let before = conservation_checks();
        let mut rng = stream(seed, 0);
        let pair = simulate_coupled_pair(&theta, &mut rng, &settings).unwrap();
        prop_assert!(pair.lo.summary.completed);
        prop_assert!(pair.lo.summary.y.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(pair.shared.len() >= 100);
        for _ in 0..3 {
            let hi = simulate_hi_coupled(&theta, &pair.shared, &mut rng, &settings).unwrap();
            prop_assert!(hi.summary.completed);
            prop_assert!(hi.summary.y.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(hi.final_state[3], 100);
        }
        // the same construction with the paths kept for inspection
        let mut paths = vec![None, None, None];
        paths[HI_PRODUCT_CHANNEL] = Some(UnitPoissonPath::from_prefix(pair.shared.to_vec(), fork(&mut rng)).unwrap());
        let hi = simulate(&enzyme_hi(), &theta, &mut rng, paths, &settings.hi_stop(), false).unwrap();
        let used = hi.paths[HI_PRODUCT_CHANNEL].realized();
        let k = used.len().min(pair.shared.len());
        prop_assert!(k >= 100);
        prop_assert_eq!(&used[..k], &pair.shared[..k]);
        prop_assert!(conservation_checks() > before);
    }
}
