//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::time::Instant;

use mlcirc::balance::{balance, balance_pipeline};
use mlcirc::bench::{fit, run_bench, BenchConfig};
use mlcirc::circuit::{Circuit, Gate};
use mlcirc::depth::{choose_t, reduce_depth4, reduce_depth_delta, DEFAULT_BUDGET};
use mlcirc::field::Field;
use mlcirc::generate::{generate, GeneratorSpec};
use mlcirc::normalize::{make_right_heavy, normalize_fanin2};
use mlcirc::poly::SparsePolynomial;
use mlcirc::quotient::{check_decomposition, eval_quotient};
use mlcirc::text::serialize;
use mlcirc::var::infer_k;
use mlcirc::verify::{
    brute_force_expand, enumerate_proof_trees, layered_report, random_equiv, sum_monomials, EquivVerdict,
    PolyFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXACT_BUDGET: u128 = 1 << 22;

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn expand(c: &Circuit) -> SparsePolynomial {
    brute_force_expand(c, EXACT_BUDGET).expect("corpus circuits fit the exact budget")
}

fn decomposition(corpus: &[Circuit]) -> Outcome {
    let mut checked = 0;
    let mut with_target = 0;
    let mut failures = Vec::new();
    let mut short = Vec::new();
    for (i, c) in corpus.iter().enumerate() {
        let triples = common::admissible_triples(c, i as u64, 12);
        if triples.len() < 10 {
            short.push(i);
        }
        for (u, v, m) in triples {
            let rep = check_decomposition(c, u, v, m, 20, i as u64).expect("admissible triple");
            checked += 1;
            with_target += usize::from(v.is_some());
            if !rep.holds() {
                failures.push((i, u, v, m));
            }
        }
    }
    Outcome {
        pass: failures.is_empty() && short.is_empty(),
        detail: format!(
            "{checked} triples ({with_target} with a target gate) over {} circuits, {} failures, {} circuits short of 10 triples",
            corpus.len(),
            failures.len(),
            short.len()
        ),
    }
}

fn balancing(corpus: &[Circuit]) -> Outcome {
    let f = Field::default();
    let mut items: Vec<Circuit> = corpus.to_vec();
    for (b, w) in [(4, 2), (8, 2), (4, 4)] {
        items.push(generate(&GeneratorSpec::product_of_sums(b, w), f).unwrap());
    }
    for seed in 0..common::CORPUS_SIZE {
        let base = mlcirc::generate::corpus_spec(seed);
        let mlcirc::generate::Family::RandomMultilinear { gates } = base.family else { unreachable!() };
        items.push(generate(&GeneratorSpec::random_multi_k_ic(gates, 2, base.n, seed), f).unwrap());
    }
    let mut bad = Vec::new();
    let mut worst_exponent: f64 = 0.0;
    for c in &items {
        let (out, rep) = balance_pipeline(c).unwrap();
        let exact = expand(&out) == expand(c);
        let size_ok = (out.size() as f64) <= (c.size() as f64).powi(6);
        worst_exponent = worst_exponent.max((out.size() as f64).ln() / (c.size() as f64).ln());
        if !(rep.max_mul_fanin <= 5 && rep.halving_ok && rep.k_preserved && exact && size_ok) {
            bad.push(c.name().to_string());
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!(
            "{} circuits, {} failing; largest log(out size)/log(in size) = {worst_exponent:.2} (limit 6)",
            items.len(),
            bad.len()
        ),
    }
}

/// The explicit pipeline: fan-in 2, right-heavy, balance, depth 4 at the
/// scheduled threshold.
fn depth4_pipeline(c: &Circuit) -> (mlcirc::depth::LayeredCircuit, mlcirc::depth::ExpansionReport, u32) {
    let binary = normalize_fanin2(c);
    let heavy = make_right_heavy(&binary).unwrap();
    let (bal, _) = balance(&heavy).unwrap();
    let t = choose_t(c.num_vars(), infer_k(c).max(1), c.size().max(2), 2).unwrap().t_value;
    let (l, rep) = reduce_depth4(&bal, t, DEFAULT_BUDGET).unwrap();
    (l, rep, t)
}

fn depth4(corpus: &[Circuit]) -> Outcome {
    let mut bad = Vec::new();
    let mut max_depth_ratio: f64 = 0.0;
    for c in corpus {
        let (l, rep, t) = depth4_pipeline(c);
        let pd = layered_report(&l, 0).product_depth;
        let kn = (infer_k(c).max(1) as usize * c.num_vars()) as f64;
        let depth_ok = rep.tree_depth as f64 <= 20.0 * kn / t as f64;
        max_depth_ratio = max_depth_ratio.max(rep.tree_depth as f64 / (20.0 * kn / t as f64));
        let exact = l.expand(EXACT_BUDGET).unwrap() == expand(c);
        if !(pd == 2 && l.max_bottom_var() <= t && exact && depth_ok && rep.measure_ok) {
            bad.push(c.name().to_string());
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!(
            "{} circuits, {} failing; max tree depth / (20kn/t) = {max_depth_ratio:.2}",
            corpus.len(),
            bad.len()
        ),
    }
}

fn depth_delta(corpus: &[Circuit]) -> Outcome {
    let mut bad = Vec::new();
    let mut runs = 0;
    for c in corpus.iter().filter(|c| c.num_vars() <= 12) {
        let want = expand(c);
        for delta in [2u32, 3, 4] {
            runs += 1;
            let (l, _) = reduce_depth_delta(c, delta, None, DEFAULT_BUDGET).unwrap();
            let pd = layered_report(&l, 0).product_depth;
            let mut ok = pd <= delta as usize && l.expand(EXACT_BUDGET).unwrap() == want;
            if delta == 2 {
                let (reference, _, _) = depth4_pipeline(c);
                ok &= serialize(&l.to_circuit()) == serialize(&reference.to_circuit());
                ok &= l.to_json() == reference.to_json();
            }
            if !ok {
                bad.push(format!("{} delta {delta}", c.name()));
            }
        }
    }
    Outcome { pass: bad.is_empty(), detail: format!("{runs} reductions, {} failing {:?}", bad.len(), bad) }
}

fn bound_ratio() -> Outcome {
    let cfg = BenchConfig {
        families: vec![GeneratorSpec::random_multilinear(100, 12, 0)],
        seeds: 20,
        deltas: vec![2],
        t_values: vec![3, 4, 6],
        trials: 20,
        verify_seed: 0,
        budget: DEFAULT_BUDGET as u64,
    };
    let rows = run_bench(&cfg, Field::default()).unwrap();
    let fits = fit(&rows);
    let verified = rows.iter().all(|r| r.equiv_verdict.ends_with(":equivalent"));
    let spreads: Vec<String> = fits.iter().map(|f| format!("t={} C in [{:.3}, {:.3}] spread {:.2}", f.t, f.c_min, f.c_max, f.spread)).collect();
    Outcome {
        pass: verified && fits.len() == 3 && fits.iter().all(|f| f.rows == 20 && f.spread <= 2.0),
        detail: spreads.join("; "),
    }
}

fn oracle_cross_check(corpus: &[Circuit]) -> Outcome {
    let f = Field::default();
    let small: Vec<&Circuit> = corpus.iter().filter(|c| c.len() <= 16).collect();
    let mut bad = Vec::new();
    let mut pairs = 0;
    for (i, c) in small.iter().enumerate() {
        let trees = enumerate_proof_trees(c, c.output(), None, 1 << 24).unwrap();
        if sum_monomials(c.num_vars(), f, &trees) != expand(c) {
            bad.push(format!("{} plain", c.name()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        for _ in 0..5 {
            let u = rng.gen_range(0..c.len());
            let v = rng.gen_range(0..=u);
            pairs += 1;
            let trees = enumerate_proof_trees(c, u, Some(v), 1 << 24).unwrap();
            let snipped = sum_monomials(c.num_vars(), f, &trees);
            let interpolated = common::multilinear_interpolate(c.num_vars(), f, |p| eval_quotient(c, u, v, p));
            if snipped != interpolated {
                bad.push(format!("{} [{u}:{v}]", c.name()));
            }
        }
    }
    Outcome {
        pass: !small.is_empty() && bad.is_empty(),
        detail: format!("{} circuits with at most 16 gates, {pairs} snipped pairs, {} mismatches", small.len(), bad.len()),
    }
}

fn negative_controls(corpus: &[Circuit]) -> Outcome {
    let f = Field::default();
    let with_consts: Vec<(&Circuit, Vec<usize>)> = corpus
        .iter()
        .map(|c| {
            let cone = c.cone(c.output());
            let live: Vec<usize> =
                (0..c.len()).filter(|&g| cone[g] && matches!(c.gate(g), Gate::Const(_))).collect();
            (c, live)
        })
        .filter(|(_, live)| !live.is_empty())
        .collect();
    let mut detected = 0;
    let total = 50u64;
    for m in 0..total {
        let (c, live) = &with_consts[m as usize % with_consts.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(m);
        let g = live[rng.gen_range(0..live.len())];
        let Gate::Const(old) = *c.gate(g) else { unreachable!() };
        let new = loop {
            let v = f.random(&mut rng);
            if v != old {
                break v;
            }
        };
        let mut gates = c.gates().to_vec();
        gates[g] = Gate::Const(new);
        let mutated = Circuit::new(c.name(), c.num_vars(), gates, c.output(), f).unwrap();
        if matches!(random_equiv(*c, &mutated, 20, m), EquivVerdict::NotEquivalent { .. }) {
            detected += 1;
        }
    }
    Outcome {
        pass: detected == total,
        detail: format!("{detected}/{total} mutations detected across {} circuits with live constants", with_consts.len()),
    }
}

fn main() {
    let corpus = common::corpus();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("decomposition identity", Box::new(|| decomposition(&corpus))),
        ("balancing", Box::new(|| balancing(&corpus))),
        ("depth-4 reduction", Box::new(|| depth4(&corpus))),
        ("depth-delta reduction", Box::new(|| depth_delta(&corpus))),
        ("bound-ratio stability", Box::new(bound_ratio)),
        ("oracle cross-validation", Box::new(|| oracle_cross_check(&corpus))),
        ("negative controls", Box::new(|| negative_controls(&corpus))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {} {name}: {verdict} | {} | {:.1}s", i + 1, out.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!out.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
