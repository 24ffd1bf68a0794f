//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any failed. Pass criterion numbers as arguments to run
//! a subset, e.g. `cargo test --test acceptance -- 1 4 9`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::process::Command;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use gafuzz::engine::{evaluate, run_campaign, CampaignReport, CampaignState, ExperimentConfig, FuzzContext, Metric};
use gafuzz::fitness::branch_fitness;
use gafuzz::genetic::{one_point_crossover, reorder_mutation, splice_at, splice_lengths, Individual, Population, Shapes};
use gafuzz::grammar::{
    generate_random, learn_probabilities, parse_grammar, parse_input, Grammar, Symbol,
};
use gafuzz::harness::probe::{branch, Raise};
use gafuzz::harness::{FnTarget, Registry, Target, TargetInfo};
use gafuzz::report::improvement;
use gafuzz::tree::DerivationTree;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn main() {
    let checks: [(u32, &str, Check); 9] = [
        (1, "branch fitness is exact", fitness_grid),
        (2, "generated and varied inputs re-parse", validity_closure),
        (3, "operators conserve elements", conservation),
        (4, "learned probabilities match hand counts", learning_oracle),
        (5, "campaign reports are reproducible", reproducibility),
        (6, "experiment 7 beats experiment 1 on branch coverage", comparative),
        (7, "planted bugs are found in most runs", exception_discovery),
        (8, "fitness weights decide the argmax", weight_flip),
        (9, "coverage matches enumerated ground truth", coverage_oracle),
    ];
    let wanted: BTreeSet<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, check) in checks {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let started = Instant::now();
        let result = check();
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n} PASS ({secs:.1} s) {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} FAIL ({secs:.1} s) {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn json() -> (Arc<Grammar>, Shapes) {
    let g = Arc::new(parse_grammar(gafuzz::JSON_GRAMMAR).unwrap());
    let s = Shapes::detect(&g);
    (g, s)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1 -------------------------------------------------------------------------

/// `|y * e - 100 b|` scaled by 2^80, exactly. `y` is a non-negative finite
/// float below 2^8.
fn scaled_error(y: f64, b: u32, e: u32) -> u128 {
    let bits = y.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1 << 52) - 1)) as u128;
    let (mant, pow) = if exp == 0 { (frac, -1074) } else { (frac | 1 << 52, exp - 1075) };
    let shift = pow + 80;
    let lhs = if shift >= 0 {
        (mant * e as u128) << shift
    } else {
        (mant * e as u128) >> -shift
    };
    let rhs = (100 * b as u128) << 80;
    lhs.abs_diff(rhs)
}

fn fitness_grid() -> Result<String, String> {
    let started = Instant::now();
    let mut checked = 0;
    for e in 1..=200u32 {
        for b in 0..=e {
            let got = branch_fitness(b as usize, e).map_err(|err| format!("({b},{e}): {err}"))?;
            if b == 0 {
                ensure(got == 0.0, || format!("(0,{e}) gave {got}"))?;
            } else {
                // Correctly rounded: no neighbouring float is closer.
                let here = scaled_error(got, b, e);
                let below = scaled_error(f64::from_bits(got.to_bits() - 1), b, e);
                let above = scaled_error(f64::from_bits(got.to_bits() + 1), b, e);
                ensure(here <= below && here <= above, || format!("({b},{e}) gave {got:e}"))?;
            }
            if b == e {
                ensure(got == 100.0, || format!("({b},{e}) gave {got}"))?;
            }
            checked += 1;
        }
    }
    let took = started.elapsed();
    ensure(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    Ok(format!("{checked} pairs correctly rounded in {took:?}"))
}

// 2 -------------------------------------------------------------------------

fn reparses(g: &Grammar, t: &DerivationTree) -> bool {
    t.conforms_to(g) && parse_input(g, &t.serialize()).is_ok()
}

fn validity_closure() -> Result<String, String> {
    let (g, s) = json();
    let depth = gafuzz::engine::DEFAULT_MAX_DEPTH;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let started = Instant::now();
    let mut generated = Vec::with_capacity(10_000);
    for i in 0..10_000 {
        let t = generate_random(&g, depth, &mut rng).map_err(|e| format!("generation {i}: {e}"))?;
        ensure(reparses(&g, &t), || format!("generated input {i} does not re-parse"))?;
        generated.push(t);
    }
    let mut offspring = 0;
    while offspring < 10_000 {
        let a = &generated[rng.random_range(0..generated.len())];
        let b = &generated[rng.random_range(0..generated.len())];
        if let Ok((c1, c2, _)) = one_point_crossover(&g, &s, a, b, &mut rng) {
            for c in [c1, c2] {
                ensure(reparses(&g, &c), || format!("offspring {offspring}: {}", c.serialize()))?;
                offspring += 1;
            }
        }
    }
    let mut mutants = 0;
    let mut i = 0;
    while mutants < 10_000 {
        let (m, path) = reorder_mutation(&s, &generated[i % generated.len()], &mut rng);
        i += 1;
        if path.is_some() {
            ensure(reparses(&g, &m), || format!("mutant {mutants}: {}", m.serialize()))?;
            mutants += 1;
        }
    }
    let took = started.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!(
        "10000 generated, {offspring} offspring, {mutants} mutants all re-parse in {:.1} s",
        took.as_secs_f64()
    ))
}

// 3 -------------------------------------------------------------------------

fn multiset(items: impl IntoIterator<Item = String>) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for s in items {
        *m.entry(s).or_default() += 1;
    }
    m
}

fn root_elements(s: &Shapes, t: &DerivationTree) -> Vec<String> {
    let p = s.root_container(t).expect("root container");
    s.elements(t.get(&p).unwrap()).unwrap().iter().map(|e| e.serialize()).collect()
}

fn conservation() -> Result<String, String> {
    let (g, s) = json();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draw = |rng: &mut ChaCha8Rng| generate_random(&g, 16, rng).unwrap();

    for trial in 0..1000 {
        let (t, m, path) = loop {
            let t = draw(&mut rng);
            let (m, path) = reorder_mutation(&s, &t, &mut rng);
            if let Some(p) = path {
                break (t, m, p);
            }
        };
        let elems = |tree: &DerivationTree| {
            multiset(s.elements(tree.get(&path).unwrap()).unwrap().iter().map(|e| e.serialize()))
        };
        ensure(elems(&t) == elems(&m), || format!("reorder trial {trial} changed the elements"))?;
        // Unchanged text is only possible by permuting equal elements.
        ensure(t.serialize() != m.serialize() || elems(&t).values().any(|&c| c > 1), || {
            format!("reorder trial {trial} left distinct elements in place")
        })?;
    }

    for trial in 0..1000 {
        let (a, b, la, lb) = loop {
            let (a, b) = (draw(&mut rng), draw(&mut rng));
            if let Some((la, lb)) = splice_lengths(&s, &a, &b) {
                break (a, b, la, lb);
            }
        };
        let (i, j) = (rng.random_range(0..=la), rng.random_range(0..=lb));
        let (c1, c2) = splice_at(&g, &s, &a, &b, i, j).map_err(|e| e.to_string())?;
        let before = multiset(root_elements(&s, &a).into_iter().chain(root_elements(&s, &b)));
        let after = multiset(root_elements(&s, &c1).into_iter().chain(root_elements(&s, &c2)));
        ensure(before == after, || format!("splice trial {trial} at ({i},{j}) changed the elements"))?;
    }
    Ok("1000 reorder and 1000 splice trials conserve their multisets".into())
}

// 4 -------------------------------------------------------------------------

const NESTED_LISTS: &str = r#"
list  ::= "[" items "]" | "[" "]" ;
items ::= item | item "," items ;
item  ::= "a" | "b" | list ;
"#;

fn learning_oracle() -> Result<String, String> {
    let g = Arc::new(parse_grammar(NESTED_LISTS).map_err(|e| e.to_string())?);
    let samples = ["[]", "[a]", "[a,b]", "[[]]", "[b,[a]]"];
    let pg = learn_probabilities(g.clone(), &samples).map_err(|e| e.to_string())?;
    // Alternative uses counted by hand over the five derivations, plus one.
    //   list:  filled 5, empty 2
    //   items: single 5, cons 2
    //   item:  a 3, b 2, list 2
    let expected: [(&str, &[f64]); 3] = [
        ("list", &[6.0 / 9.0, 3.0 / 9.0]),
        ("items", &[6.0 / 9.0, 3.0 / 9.0]),
        ("item", &[4.0 / 10.0, 3.0 / 10.0, 3.0 / 10.0]),
    ];
    ensure(g.rules().len() == expected.len(), || "unexpected rule count".into())?;
    for (name, want) in expected {
        let id = g.rule_id(name).ok_or_else(|| format!("no rule {name}"))?;
        let got = pg.weights(id);
        ensure(got.len() == want.len(), || format!("{name}: {got:?}"))?;
        for (k, (x, y)) in got.iter().zip(want).enumerate() {
            ensure((x - y).abs() <= 1e-9, || format!("{name} alternative {k}: {x} != {y}"))?;
        }
    }
    json_weights_are_smoothed_counts()?;
    Ok("3 rules within 1e-9 of hand counts; JSON weights equal add-one counts".into())
}

/// On the shipped corpus, each JSON rule's weights equal add-one counts
/// taken by walking the parse trees here.
fn json_weights_are_smoothed_counts() -> Result<(), String> {
    let (g, _) = json();
    let pg = learn_probabilities(g.clone(), &gafuzz::CLASSIC_SAMPLES).map_err(|e| e.to_string())?;
    let mut counts: Vec<Vec<f64>> = g.rules().iter().map(|r| vec![0.0; r.alternatives.len()]).collect();
    fn walk(t: &DerivationTree, counts: &mut [Vec<f64>]) {
        if let DerivationTree::Nonterminal { rule, alt, children } = t {
            counts[*rule][*alt] += 1.0;
            children.iter().for_each(|c| walk(c, counts));
        }
    }
    for s in gafuzz::CLASSIC_SAMPLES {
        walk(&parse_input(&g, s).map_err(|e| e.to_string())?, &mut counts);
    }
    for (rule, c) in counts.iter().enumerate() {
        let total: f64 = c.iter().sum::<f64>() + c.len() as f64;
        for (k, n) in c.iter().enumerate() {
            let want = (n + 1.0) / total;
            let got = pg.weights(rule)[k];
            ensure((got - want).abs() <= 1e-9, || format!("{} alternative {k}: {got} != {want}", g.name(rule)))?;
        }
    }
    Ok(())
}

// 5 -------------------------------------------------------------------------

fn reproducibility() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let grammar = format!("{}/grammars/json.g", env!("CARGO_MANIFEST_DIR"));
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        let status = Command::new(env!("CARGO_BIN_EXE_gafuzz"))
            .args(["--experiment", "7", "--seconds", "30", "--runs", "2", "--seed", "7", "--grammar", &grammar])
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
        outputs.push(out);
    }
    for file in ["coverage_report.csv", "exceptions.csv"] {
        let a = fs::read(outputs[0].join(file)).map_err(|e| e.to_string())?;
        let b = fs::read(outputs[1].join(file)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{file} differs"))?;
    }
    Ok("coverage_report.csv and exceptions.csv byte-identical".into())
}

// 6, 7 ----------------------------------------------------------------------

fn campaign(preset: u8) -> CampaignReport {
    let (g, _) = json();
    let samples = gafuzz::CLASSIC_SAMPLES.iter().map(|s| s.to_string()).collect();
    let ctx = FuzzContext::new(g, samples, Registry::builtin().select("all").unwrap());
    let mut cfg = ExperimentConfig::preset(preset).unwrap();
    cfg.population_size = 100;
    cfg.runs = 10;
    cfg.time_budget = Duration::from_secs(60);
    cfg.master_seed = 2024;
    run_campaign(&cfg, &ctx, None).unwrap()
}

fn experiment_7() -> &'static CampaignReport {
    static REPORT: OnceLock<CampaignReport> = OnceLock::new();
    REPORT.get_or_init(|| campaign(7))
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean over runs of cumulative branch coverage, per target.
fn cumulative_branch(r: &CampaignReport) -> Vec<(String, f64)> {
    let b = Metric::Branch.index();
    r.targets
        .iter()
        .enumerate()
        .map(|(t, info)| (info.name.clone(), mean(r.runs.iter().map(|run| run.targets[t].cumulative[b]))))
        .collect()
}

/// Mean over runs and targets of the per-input mean branch coverage.
fn grand_per_input(r: &CampaignReport) -> f64 {
    let b = Metric::Branch.index();
    mean(r.runs.iter().flat_map(|run| run.targets.iter().map(move |t| t.per_input[b].mean)))
}

fn comparative() -> Result<String, String> {
    let seven = experiment_7();
    let one = campaign(1);
    let (c7, c1) = (cumulative_branch(seven), cumulative_branch(&one));
    let mut table = String::new();
    let mut wins = 0;
    for ((name, x7), (_, x1)) in c7.iter().zip(&c1) {
        if x7 > x1 {
            wins += 1;
        }
        let _ = write!(table, " {name} {x1:.2}->{x7:.2};");
    }
    let (g7, g1) = (grand_per_input(seven), grand_per_input(&one));
    let detail = format!(
        "cumulative wins {wins}/5 [{}], per-input grand mean {g1:.2} -> {g7:.2} ({:+.1}%), wall {:.0} s + {:.0} s",
        table.trim().trim_end_matches(';'),
        improvement(g1, g7),
        seven.wall_time.as_secs_f64(),
        one.wall_time.as_secs_f64()
    );
    ensure(wins >= 4 && g7 > g1, || detail.clone())?;
    Ok(detail)
}

fn exception_discovery() -> Result<String, String> {
    let r = experiment_7();
    let bugs = [
        ("flattener", "DepthLimitExceeded"),
        ("serializer", "EmptyKeyInArray"),
        ("number-validator", "PrecisionLoss"),
    ];
    let counts: Vec<(&str, usize)> = bugs.iter().map(|(t, k)| (*k, r.runs_triggering(t, k))).collect();
    let detail = counts
        .iter()
        .map(|(k, n)| format!("{k} {n}/{}", r.runs.len()))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(counts.iter().all(|(_, n)| *n >= 7), || detail.clone())?;
    Ok(detail)
}

// 8 -------------------------------------------------------------------------

fn weight_flip() -> Result<String, String> {
    let (g, _) = json();
    let ctx = FuzzContext::new(g.clone(), Vec::new(), vec![Registry::builtin().get("serializer").unwrap()]);
    let small = r#"[{"":1}]"#;
    let large = r#"{"alpha":[1,2,3,{"beta":true,"gamma":null}],"delta":{"eps":"x","zeta":[[],{}]},"eta":-12.5e3}"#;
    let mut winners = Vec::new();
    for (wf, ws) in [(0.9, 0.1), (0.1, 0.9)] {
        let mut cfg = ExperimentConfig::custom();
        cfg.set("fitness", "weighted").map_err(|e| e.to_string())?;
        cfg.set("w_feedback", &wf.to_string()).map_err(|e| e.to_string())?;
        cfg.set("w_structure", &ws.to_string()).map_err(|e| e.to_string())?;
        let members = [small, large]
            .iter()
            .map(|s| Individual::new(parse_input(&g, s).unwrap()))
            .collect();
        let mut pop = Population::new(members);
        let mut state = CampaignState::new(&cfg, &ctx).map_err(|e| e.to_string())?;
        evaluate(&mut pop, &cfg, &ctx, &mut state).map_err(|e| e.to_string())?;
        let small_raised = pop.members[0].outcomes.as_ref().unwrap()[0].exception.is_some();
        let large_raised = pop.members[1].outcomes.as_ref().unwrap()[0].exception.is_some();
        ensure(small_raised && !large_raised, || "fixture inputs misbehave".into())?;
        winners.push(pop.best().unwrap());
    }
    ensure(winners == [0, 1], || format!("argmax {winners:?}"))?;
    Ok("(0.9,0.1) picks the small raising input, (0.1,0.9) the large one".into())
}

// 9 -------------------------------------------------------------------------

/// Three branch sites: 0 on a leading minus, 1 on a digit above five,
/// 2 on a single-character input.
fn toy(input: &str) -> Result<(), Raise> {
    if input.starts_with('-') {
        branch(0, line!());
    }
    if input.bytes().any(|c| c.is_ascii_digit() && c > b'5') {
        branch(1, line!());
    }
    if input.len() == 1 {
        branch(2, line!());
    }
    Ok(())
}

const SIGNED_DIGIT: &str = r#"
number ::= sign digit | digit ;
sign   ::= "+" | "-" ;
digit  ::= "0" | "5" | "6" | "9" ;
"#;

/// Every string of a non-recursive grammar, by expanding all alternatives.
fn enumerate(g: &Grammar, rule: usize) -> Vec<String> {
    let mut out = Vec::new();
    for alt in g.alternatives(rule) {
        let mut partial = vec![String::new()];
        for sym in alt {
            let options = match sym {
                Symbol::Terminal(t) => vec![t.clone()],
                Symbol::Nonterminal(r) => enumerate(g, *r),
            };
            partial = partial
                .iter()
                .flat_map(|p| options.iter().map(move |o| format!("{p}{o}")))
                .collect();
        }
        out.extend(partial);
    }
    out
}

fn coverage_oracle() -> Result<String, String> {
    let g = parse_grammar(SIGNED_DIGIT).map_err(|e| e.to_string())?;
    let language = enumerate(&g, g.start());
    ensure(language.len() <= 20, || format!("{} inputs", language.len()))?;
    let distinct: BTreeSet<&String> = language.iter().collect();
    ensure(distinct.len() == language.len(), || "enumeration repeats".into())?;

    // Random generation reaches exactly the enumerated language.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let drawn: BTreeSet<String> = (0..2000)
        .map(|_| generate_random(&g, 8, &mut rng).unwrap().serialize())
        .collect();
    ensure(drawn == language.iter().cloned().collect(), || format!("generated {drawn:?}"))?;

    let target = FnTarget::new(
        TargetInfo {
            name: "toy".into(),
            b_total: 3,
            line_total: 3,
            function_total: 0,
        },
        toy,
    );
    let mut union = BTreeSet::new();
    for input in &language {
        let mut truth = BTreeSet::new();
        let bytes = input.as_bytes();
        if bytes[0] == b'-' {
            truth.insert(0);
        }
        if bytes.iter().any(|&c| matches!(c, b'6'..=b'9')) {
            truth.insert(1);
        }
        if bytes.len() == 1 {
            truth.insert(2);
        }
        let got = target.execute(input, Duration::from_secs(1)).map_err(|e| e.to_string())?;
        ensure(got.covered_branches == truth, || {
            format!("{input}: {:?} != {truth:?}", got.covered_branches)
        })?;
        ensure(got.exception.is_none(), || format!("{input} raised"))?;
        union.extend(truth);
    }
    ensure(union == BTreeSet::from([0, 1, 2]), || format!("union {union:?}"))?;
    Ok(format!("{} inputs, every branch set exact", language.len()))
}
