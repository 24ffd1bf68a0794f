use std::sync::Arc;

use gafuzz::grammar::{
    generate_random, learn_probabilities, parse_grammar, parse_input, sample_weighted, Grammar, ProbabilisticGrammar,
};
use gafuzz::tree::DerivationTree;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn grammar(text: &str) -> Arc<Grammar> {
    Arc::new(parse_grammar(text).unwrap())
}

#[test]
fn round_trip_over_a_thousand_trees() {
    // The listing grammar is unambiguous, so the parse is the same tree.
    let listing = grammar(gafuzz::LISTING_GRAMMAR);
    let json = grammar(gafuzz::JSON_GRAMMAR);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let t = generate_random(&listing, 12, &mut rng).unwrap();
        assert_eq!(parse_input(&listing, &t.serialize()).unwrap(), t);

        let t = generate_random(&json, 20, &mut rng).unwrap();
        let back = parse_input(&json, &t.serialize()).unwrap();
        assert_eq!(back.serialize(), t.serialize());
        assert!(back.conforms_to(&json));
    }
}

/// (root alternative, alternative of its first nonterminal child).
fn first_choices(t: &DerivationTree) -> (usize, usize) {
    let DerivationTree::Nonterminal { alt, children, .. } = t else {
        unreachable!()
    };
    let child = children
        .iter()
        .find_map(|c| match c {
            DerivationTree::Nonterminal { alt, .. } => Some(*alt),
            _ => None,
        })
        .unwrap_or(0);
    (*alt, child)
}

#[test]
fn uniform_weights_sample_like_generate_random() {
    let g = grammar(gafuzz::JSON_GRAMMAR);
    let pg = ProbabilisticGrammar::uniform(g.clone());
    let n = 10_000;
    let mut table = [[0f64; 4]; 2];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..n {
        let (a, b) = first_choices(&generate_random(&g, 12, &mut rng).unwrap());
        table[0][a * 2 + b] += 1.0;
        let (a, b) = first_choices(&sample_weighted(&pg, 12, &mut rng).unwrap());
        table[1][a * 2 + b] += 1.0;
    }
    // Chi-squared test of homogeneity, 2 x 4 table.
    let mut stat = 0.0;
    for col in 0..4 {
        let total = table[0][col] + table[1][col];
        for row in table {
            let expected = total / 2.0;
            stat += (row[col] - expected).powi(2) / expected;
        }
    }
    let p = 1.0 - ChiSquared::new(3.0).unwrap().cdf(stat);
    assert!(p > 0.01, "{table:?}: chi-squared {stat:.2}, p = {p:.3}");
}

#[test]
fn zero_weight_alternative_is_never_drawn() {
    let g = grammar(gafuzz::LISTING_GRAMMAR);
    let mut weights = ProbabilisticGrammar::uniform(g.clone()).all_weights().to_vec();
    let value = g.rule_id("value").unwrap();
    weights[value] = vec![1.0, 1.0, 0.0, 1.0, 1.0, 1.0];
    let pg = ProbabilisticGrammar::new(g.clone(), weights).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let t = sample_weighted(&pg, 10, &mut rng).unwrap();
        // Nested objects only come from value's third alternative.
        assert_eq!(t.serialize().matches('{').count(), 1, "{}", t.serialize());
    }
}

#[test]
fn hand_counted_rule_uses_on_three_samples() {
    let g = grammar(gafuzz::LISTING_GRAMMAR);
    // {} / {"a":1} / {"ab":{}}:
    //   json:  filled 2, empty 2      pairs: single 2, cons 0
    //   value: string 0, number 1, json 1, others 0
    let pg = learn_probabilities(g.clone(), &["{}", r#"{"a":1}"#, r#"{"ab":{}}"#]).unwrap();
    let w = |name: &str| pg.weights(g.rule_id(name).unwrap()).to_vec();
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
    assert!(close(&w("json"), &[3.0 / 6.0, 3.0 / 6.0]));
    assert!(close(&w("pairs"), &[3.0 / 4.0, 1.0 / 4.0]));
    assert!(close(&w("value"), &[1.0 / 8.0, 2.0 / 8.0, 2.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn learned_weights_sum_to_one(seeds in prop::collection::vec(any::<u64>(), 0..6)) {
        let g = grammar(gafuzz::JSON_GRAMMAR);
        let samples: Vec<String> = seeds
            .iter()
            .map(|&s| generate_random(&g, 14, &mut ChaCha8Rng::seed_from_u64(s)).unwrap().serialize())
            .collect();
        let pg = learn_probabilities(g.clone(), &samples).unwrap();
        for w in pg.all_weights() {
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(w.iter().all(|&x| x > 0.0));
        }
    }
}
