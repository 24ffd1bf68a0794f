use std::collections::BTreeMap;

use gafuzz::genetic::{
    one_point_crossover, reorder_mutation, splice_at, splice_lengths, tournament_select, CrossoverKind,
    Individual, Population, Shapes,
};
use gafuzz::grammar::{generate_random, parse_grammar, parse_input, Grammar};
use gafuzz::tree::DerivationTree;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn json() -> (Grammar, Shapes) {
    let g = parse_grammar(gafuzz::JSON_GRAMMAR).unwrap();
    let s = Shapes::detect(&g);
    (g, s)
}

fn tree(g: &Grammar, seed: u64, depth: u32) -> DerivationTree {
    generate_random(g, depth, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn multiset<'a>(items: impl IntoIterator<Item = &'a DerivationTree>) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for t in items {
        *m.entry(t.serialize()).or_default() += 1;
    }
    m
}

fn root_elements(s: &Shapes, t: &DerivationTree) -> Vec<String> {
    let p = s.root_container(t).unwrap();
    s.elements(t.get(&p).unwrap()).unwrap().iter().map(|e| e.serialize()).collect()
}

fn reparses(g: &Grammar, t: &DerivationTree) -> bool {
    t.conforms_to(g) && parse_input(g, &t.serialize()).is_ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_inputs_reparse(seed: u64, depth in 3u32..24) {
        let (g, _) = json();
        let t = tree(&g, seed, depth);
        prop_assert!(t.height() <= depth);
        prop_assert!(reparses(&g, &t));
    }

    #[test]
    fn crossover_offspring_reparse(s1: u64, s2: u64, s3: u64) {
        let (g, s) = json();
        let a = tree(&g, s1, 16);
        let b = tree(&g, s2, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(s3);
        if let Ok((c1, c2, _)) = one_point_crossover(&g, &s, &a, &b, &mut rng) {
            prop_assert!(reparses(&g, &c1));
            prop_assert!(reparses(&g, &c2));
        }
    }

    #[test]
    fn splice_keeps_the_root_elements(s1: u64, s2: u64, cut_a: prop::sample::Index, cut_b: prop::sample::Index) {
        let (g, s) = json();
        let a = tree(&g, s1, 14);
        let b = tree(&g, s2, 14);
        if let Some((la, lb)) = splice_lengths(&s, &a, &b) {
            let (i, j) = (cut_a.index(la + 1), cut_b.index(lb + 1));
            let (c1, c2) = splice_at(&g, &s, &a, &b, i, j).unwrap();
            let (ea, eb) = (root_elements(&s, &a), root_elements(&s, &b));
            let mut before: Vec<String> = ea.iter().chain(&eb).cloned().collect();
            let mut after: Vec<String> = root_elements(&s, &c1).into_iter().chain(root_elements(&s, &c2)).collect();
            before.sort();
            after.sort();
            prop_assert_eq!(before, after);
            let first: Vec<String> = ea[..i].iter().chain(&eb[j..]).cloned().collect();
            prop_assert_eq!(root_elements(&s, &c1), first);
        }
    }

    #[test]
    fn reorder_permutes_one_container(seed: u64, rseed: u64) {
        let (g, s) = json();
        let t = tree(&g, seed, 16);
        let (m, path) = reorder_mutation(&s, &t, &mut ChaCha8Rng::seed_from_u64(rseed));
        prop_assert!(reparses(&g, &m));
        match path {
            None => prop_assert_eq!(m, t),
            Some(p) => {
                let before = s.elements(t.get(&p).unwrap()).unwrap();
                let after = s.elements(m.get(&p).unwrap()).unwrap();
                prop_assert_eq!(multiset(before.iter().copied()), multiset(after.iter().copied()));
                prop_assert_eq!(m.serialize().len(), t.serialize().len());
                prop_assert_eq!(m.node_count(), t.node_count());
            }
        }
    }

    #[test]
    fn tournament_winner_is_best_of_some_sample(fits in prop::collection::vec(0u8..10, 1..30), k in 1usize..8, seed: u64) {
        let (g, _) = json();
        let members: Vec<Individual> = fits
            .iter()
            .map(|&f| {
                let mut m = Individual::new(parse_input(&g, "[]").unwrap());
                m.fitness = Some(f as f64);
                m
            })
            .collect();
        let pop = Population::new(members);
        let k = k.min(pop.len());
        let w = tournament_select(&pop, k, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        // The winner beats at least k - 1 others.
        let beaten = fits.iter().filter(|&&f| f <= fits[w]).count();
        prop_assert!(beaten >= k);
    }
}

#[test]
fn mixed_kinds_fall_back_to_subtree_exchange() {
    let (g, s) = json();
    let a = parse_input(&g, r#"{"a":[1,2]}"#).unwrap();
    let b = parse_input(&g, r#"[3,{"b":4}]"#).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (c1, c2, kind) = one_point_crossover(&g, &s, &a, &b, &mut rng).unwrap();
    assert_eq!(kind, CrossoverKind::SubtreeExchange);
    assert!(reparses(&g, &c1) && reparses(&g, &c2));
}

#[test]
fn listing_grammar_splices_pairs() {
    let g = parse_grammar(gafuzz::LISTING_GRAMMAR).unwrap();
    let s = Shapes::detect(&g);
    let a = parse_input(&g, r#"{"a":1,"b":2}"#).unwrap();
    let b = parse_input(&g, r#"{"x":true,"y":null,"z":"w"}"#).unwrap();
    let (c1, c2) = splice_at(&g, &s, &a, &b, 1, 2).unwrap();
    assert_eq!(c1.serialize(), r#"{"a":1,"z":"w"}"#);
    assert_eq!(c2.serialize(), r#"{"x":true,"y":null,"b":2}"#);
}

#[test]
fn tournament_of_one_is_uniform() {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let (g, _) = json();
    let n = 20;
    let members = (0..n)
        .map(|i| {
            let mut m = Individual::new(parse_input(&g, "[]").unwrap());
            m.fitness = Some(i as f64);
            m
        })
        .collect();
    let pop = Population::new(members);
    let draws = 40_000;
    let mut hits = vec![0u32; n];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..draws {
        hits[tournament_select(&pop, 1, &mut rng).unwrap()] += 1;
    }
    let expected = draws as f64 / n as f64;
    let stat: f64 = hits.iter().map(|&h| (h as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new((n - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "chi-squared {stat:.1}, p = {p:.2e}");
}
