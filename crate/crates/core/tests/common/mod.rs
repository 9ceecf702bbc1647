#![allow(dead_code)]

use mlcirc::circuit::{Circuit, GateId};
use mlcirc::field::Field;
use mlcirc::generate::{corpus_spec, generate};
use mlcirc::poly::SparsePolynomial;
use mlcirc::quotient::quotient_table_with;
use mlcirc::var::compute_var;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SIZE: u64 = 50;

pub fn corpus() -> Vec<Circuit> {
    (0..CORPUS_SIZE).map(|s| generate(&corpus_spec(s), Field::default()).unwrap()).collect()
}

/// Multilinear polynomial agreeing with `eval` on `{0,1}^n`, by Möbius
/// inversion over subsets.
pub fn multilinear_interpolate(n: usize, f: Field, eval: impl Fn(&[u64]) -> u64) -> SparsePolynomial {
    let size = 1usize << n;
    let mut vals: Vec<u64> = (0..size)
        .map(|mask| {
            let point: Vec<u64> = (0..n).map(|i| ((mask >> i) & 1) as u64).collect();
            eval(&point)
        })
        .collect();
    for i in 0..n {
        for mask in 0..size {
            if mask & (1 << i) != 0 {
                vals[mask] = f.sub(vals[mask], vals[mask ^ (1 << i)]);
            }
        }
    }
    let mut p = SparsePolynomial::zero(n, f);
    for (mask, &c) in vals.iter().enumerate() {
        let exps: Vec<u32> = (0..n).map(|i| ((mask >> i) & 1) as u32).collect();
        p.add_term(exps, c);
    }
    p
}

/// Up to `want` distinct `(u, v, m)` meeting the decomposition hypotheses,
/// drawn in a seeded order: half with a quotient-reachable `v`, then plain
/// ones, then unreachable (vacuous) ones.
pub fn admissible_triples(c: &Circuit, seed: u64, want: usize) -> Vec<(GateId, Option<GateId>, u32)> {
    let vars = compute_var(c);
    let mut plain = Vec::new();
    let mut reachable = Vec::new();
    let mut vacuous = Vec::new();
    for (u, var) in vars.iter().enumerate() {
        for m in 2..=var.total() {
            plain.push((u, None, m));
        }
    }
    for v in 0..c.len() {
        let table = quotient_table_with(c, &vars, v);
        for u in v + 1..c.len() {
            for m in (vars[v].total() + 1).max(2)..=vars[u].total() {
                match table.potential(u) {
                    Some(p) if p >= m => reachable.push((u, Some(v), m)),
                    None => vacuous.push((u, Some(v), m)),
                    _ => {}
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for pool in [&mut plain, &mut reachable, &mut vacuous] {
        pool.shuffle(&mut rng);
    }
    let mut out: Vec<_> = reachable.iter().copied().take(want / 2).collect();
    let rest = want - out.len();
    out.extend(plain.iter().copied().take(rest));
    let rest = want - out.len();
    out.extend(reachable.iter().copied().skip(want / 2).take(rest));
    let rest = want - out.len();
    out.extend(vacuous.iter().copied().take(rest));
    out
}
