use mrcg::agents::{Strategy, *};
use mrcg::error::Error;
use mrcg::network::Cost;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use Action::{Inside as I, Outside as O};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn fixed(table: &[Action]) -> Strategy {
    let memory = table.len().trailing_zeros();
    Strategy::from_table(memory, 0, table.to_vec()).unwrap()
}

#[test]
fn extreme_biases_are_deterministic() {
    let mut r = rng(0);
    let ones = Strategy::generate(2, 0, &mut r).unwrap();
    assert_eq!(ones.table(), &[I; 4]);
    let zeros = Strategy::generate(2, 4, &mut r).unwrap();
    assert_eq!(zeros.table(), &[O; 4]);
    assert!(matches!(
        Strategy::generate(2, 5, &mut r),
        Err(Error::InvalidBias { bias: 5, table_len: 4 })
    ));
}

#[test]
fn table_lookup_by_history_index() {
    // 000 -> 0, 001 -> 1, 010 -> 1, 011 -> 1, 100 -> 0, 101 -> 1, 110 -> 1, 111 -> 0
    let s = Strategy::from_table(3, 4, vec![O, I, I, I, O, I, I, O]).unwrap();
    assert_eq!(s.table().len(), 8);
    assert_eq!(s.action(0b010), I);
    assert_eq!(s.action(0b111), O);
    assert!(Strategy::from_table(3, 4, vec![O; 7]).is_err());
}

#[test]
fn homogeneous_bias_is_half_the_table() {
    let mut r = rng(1);
    assert_eq!(draw_bias(BiasMode::Homogeneous, 3, &mut r), 4);
    assert_eq!(draw_bias(BiasMode::Homogeneous, 1, &mut r), 1);
    assert_eq!(draw_bias(BiasMode::Homogeneous, 8, &mut r), 128);
}

#[test]
fn heterogeneous_bias_is_uniform() {
    let mut r = rng(2);
    let draws = 50_000;
    let mut counts = [0usize; 5];
    for _ in 0..draws {
        counts[draw_bias(BiasMode::Heterogeneous, 2, &mut r) as usize] += 1;
    }
    let expected = draws as f64 / 5.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // chi-square, 4 dof, p = 0.001 critical value
    assert!(chi2 < 18.47, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn single_strategy_is_always_played() {
    let mind = AgentMind::mrcg(vec![fixed(&[O, I, I, O])]);
    let mut r = rng(3);
    for mu in 0..4 {
        assert_eq!(mind.choose_action(mu, &mut r), mind.strategies()[0].action(mu));
    }
}

#[test]
fn strict_argmax_wins() {
    let mind = AgentMind::with_scores(vec![fixed(&[I, I]), fixed(&[O, O])], vec![3, -1]).unwrap();
    let mut r = rng(4);
    for _ in 0..100 {
        assert_eq!(mind.choose_action(1, &mut r), I);
    }
}

#[test]
fn ties_are_broken_uniformly() {
    let s = 8;
    let mind = AgentMind::mrcg((0..s).map(|_| fixed(&[O, O])).collect());
    let mut r = rng(5);
    let draws = 40_000;
    let mut counts = vec![0usize; s];
    for _ in 0..draws {
        counts[mind.pick_best(&mut r)] += 1;
    }
    let expected = draws as f64 / s as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // chi-square, 7 dof, p = 0.001 critical value
    assert!(chi2 < 24.32, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn score_count_must_match_strategies() {
    assert!(matches!(
        AgentMind::with_scores(vec![fixed(&[O, O]); 2], vec![0]),
        Err(Error::InconsistentLengths(_))
    ));
}

#[test]
fn ties_only_among_maximal_scores() {
    let mind = AgentMind::with_scores(vec![fixed(&[O, O]); 4], vec![1, 5, 2, 5]).unwrap();
    let mut r = rng(6);
    for _ in 0..200 {
        let i = mind.pick_best(&mut r);
        assert!(i == 1 || i == 3);
    }
}

#[test]
fn score_update_examples() {
    let half = |n| Cost::new(n, 2);
    let mut mind = AgentMind::mrcg(vec![fixed(&[I, O]), fixed(&[O, O])]);
    mind.update_scores(0, Cost::from_integer(18), half(23));
    assert_eq!(mind.scores(), &[1, -1]);
    mind.update_scores(0, Cost::from_integer(18), half(49));
    assert_eq!(mind.scores(), &[0, 0]);
    mind.update_scores(1, Cost::from_integer(10), Cost::from_integer(10));
    assert_eq!(mind.scores(), &[0, 0]);
}

#[test]
fn random_policy_is_a_fair_coin() {
    let mind = AgentMind::random();
    let mut r = rng(7);
    let n = 20_000;
    let inside = (0..n).filter(|_| mind.choose_action(0, &mut r) == I).count();
    // 4 sigma of Bin(n, 1/2)
    assert!((inside as f64 - n as f64 / 2.0).abs() < 4.0 * (n as f64 / 4.0).sqrt());
}

fn zero_fraction(s: &Strategy) -> f64 {
    s.table().iter().filter(|&&a| a == O).count() as f64 / s.table().len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

#[test]
fn homogeneous_entries_are_fair() {
    let mut r = rng(8);
    let mind = AgentMind::generate(BiasMode::Homogeneous, 4, 1000, &mut r).unwrap();
    let entries = 1000 * 16;
    let zeros: usize = mind
        .strategies()
        .iter()
        .map(|s| s.table().iter().filter(|&&a| a == O).count())
        .sum();
    let sigma = (entries as f64 / 4.0).sqrt();
    assert!((zeros as f64 - entries as f64 / 2.0).abs() < 3.0 * sigma);
}

#[test]
fn heterogeneous_entries_are_fair_but_more_dispersed() {
    let mut r = rng(9);
    let het = AgentMind::generate(BiasMode::Heterogeneous, 4, 2000, &mut r).unwrap();
    let hom = AgentMind::generate(BiasMode::Homogeneous, 4, 2000, &mut r).unwrap();
    let het_fracs: Vec<f64> = het.strategies().iter().map(zero_fraction).collect();
    let hom_fracs: Vec<f64> = hom.strategies().iter().map(zero_fraction).collect();

    let mean = het_fracs.iter().sum::<f64>() / het_fracs.len() as f64;
    // sd of the mean per-strategy fraction is at most ~0.29/sqrt(2000)
    assert!((mean - 0.5).abs() < 4.0 * 0.3 / 2000f64.sqrt(), "mean {mean}");
    // Homogeneous variance ~ 1/64; heterogeneous ~ 1/12 + small
    assert!(sample_variance(&het_fracs) > 2.0 * sample_variance(&hom_fracs));
}

proptest! {
    #[test]
    fn agreeing_strategies_get_equal_deltas(
        memory in 1u32..5,
        seed in any::<u64>(),
        steps in proptest::collection::vec((any::<u16>(), -1i64..=1), 1..60),
    ) {
        let mut r = rng(seed);
        let mut mind = AgentMind::generate(BiasMode::Heterogeneous, memory, 6, &mut r).unwrap();
        let p = table_len(memory) as usize;
        for (t, &(mu_raw, sign)) in steps.iter().enumerate() {
            let mu = mu_raw as usize % p;
            let before = mind.scores().to_vec();
            mind.update_with_sign(mu, sign);
            let deltas: Vec<i64> = mind.scores().iter().zip(&before).map(|(a, b)| a - b).collect();
            for i in 0..deltas.len() {
                for j in 0..deltas.len() {
                    let (a, b) = (mind.strategies()[i].action(mu), mind.strategies()[j].action(mu));
                    if a == b {
                        prop_assert_eq!(deltas[i], deltas[j]);
                    } else {
                        prop_assert_eq!(deltas[i], -deltas[j]);
                    }
                }
            }
            let t = (t + 1) as i64;
            prop_assert!(mind.scores().iter().all(|s| s.abs() <= t));
        }
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), memory in 1u32..8) {
        let a = AgentMind::generate(BiasMode::Heterogeneous, memory, 8, &mut rng(seed)).unwrap();
        let b = AgentMind::generate(BiasMode::Heterogeneous, memory, 8, &mut rng(seed)).unwrap();
        prop_assert_eq!(a.strategies(), b.strategies());
    }
}
