//! Semantic ground truth and structural measurements.
//!
//! [`brute_force_expand`] multiplies out a circuit exactly; it is the oracle
//! every transformation is compared against. [`enumerate_proof_trees`] is an
//! independent second route to the same polynomial through the proof-tree
//! characterization, usable on small circuits. [`random_equiv`] is the
//! Schwartz-Zippel test for anything too large to expand.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateId};
use crate::depth::{LayeredCircuit, Schedule};
use crate::error::{Error, Result};
use crate::field::{trial_rng, Field};
use crate::poly::SparsePolynomial;
use crate::var::compute_var;

/// Anything that denotes a polynomial over `F_p^n`.
pub trait PolyFunction {
    fn num_vars(&self) -> usize;
    fn field(&self) -> Field;
    fn eval_at(&self, point: &[u64]) -> u64;
    /// Exact expansion, refusing anything that might exceed `budget` terms.
    fn expand(&self, budget: u128) -> Result<SparsePolynomial>;
}

impl PolyFunction for Circuit {
    fn num_vars(&self) -> usize {
        Circuit::num_vars(self)
    }

    fn field(&self) -> Field {
        Circuit::field(self)
    }

    fn eval_at(&self, point: &[u64]) -> u64 {
        self.evaluate(point)
    }

    fn expand(&self, budget: u128) -> Result<SparsePolynomial> {
        brute_force_expand(self, budget)
    }
}

/// Exact polynomial of the output gate, by bottom-up sparse arithmetic over
/// the output's cone. Every intermediate polynomial has at most
/// `Π (1 + Var(output)_i)` terms, which is checked against `budget` first.
pub fn brute_force_expand(c: &Circuit, budget: u128) -> Result<SparsePolynomial> {
    expand_gate(c, c.output(), budget)
}

pub(crate) fn expand_gate(c: &Circuit, root: GateId, budget: u128) -> Result<SparsePolynomial> {
    let vars = compute_var(c);
    let needed = vars[root].monomial_bound();
    if needed > budget {
        return Err(Error::ExpansionTooLarge { needed, budget });
    }
    let n = c.num_vars();
    let f = c.field();
    let live = c.cone(root);
    // remaining uses, so finished intermediates can be dropped
    let mut uses = vec![0usize; c.len()];
    for (id, g) in c.gates().iter().enumerate() {
        if live[id] {
            for &ch in g.children() {
                uses[ch] += 1;
            }
        }
    }
    let mut polys: Vec<Option<SparsePolynomial>> = vec![None; c.len()];
    for id in 0..=root {
        if !live[id] {
            continue;
        }
        let p = match c.gate(id) {
            Gate::Input(i) => SparsePolynomial::variable(n, f, *i),
            Gate::Const(v) => SparsePolynomial::constant(n, f, *v),
            Gate::Add(ch) => {
                let mut acc = SparsePolynomial::zero(n, f);
                for &x in ch {
                    acc = acc.add(polys[x].as_ref().expect("child expanded"));
                }
                acc
            }
            Gate::Mul(ch) => {
                let mut acc = SparsePolynomial::constant(n, f, 1);
                for &x in ch {
                    acc = acc.mul(polys[x].as_ref().expect("child expanded"));
                }
                acc
            }
        };
        for &x in c.gate(id).children() {
            uses[x] -= 1;
            if uses[x] == 0 {
                polys[x] = None;
            }
        }
        polys[id] = Some(p);
    }
    Ok(polys[root].take().expect("root expanded"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coeff: u64,
}

/// Number of (optionally `snip`-snipped) proof-trees rooted at each gate.
fn count_trees(c: &Circuit, root: GateId, snip: Option<GateId>) -> u128 {
    let mut plain = vec![0u128; root + 1];
    let mut snipped = vec![0u128; root + 1];
    for id in 0..=root {
        let g = c.gate(id);
        plain[id] = match g {
            Gate::Input(_) | Gate::Const(_) => 1,
            Gate::Add(ch) => ch.iter().fold(0u128, |a, &x| a.saturating_add(plain[x])),
            Gate::Mul(ch) => ch.iter().fold(1u128, |a, &x| a.saturating_mul(plain[x])),
        };
        if let Some(v) = snip {
            snipped[id] = if id == v {
                1
            } else {
                match g {
                    Gate::Input(_) | Gate::Const(_) => 0,
                    Gate::Add(ch) => ch.iter().fold(0u128, |a, &x| a.saturating_add(snipped[x])),
                    Gate::Mul(ch) => {
                        let (last, left) = ch.split_last().expect("validated fan-in");
                        left.iter().fold(snipped[*last], |a, &x| a.saturating_mul(plain[x]))
                    }
                }
            };
        }
    }
    if snip.is_some() {
        snipped[root]
    } else {
        plain[root]
    }
}

/// One monomial per proof-tree rooted at `root`; with `snip = Some(v)`, one
/// per `v`-snipped proof-tree (the occurrence of `v` on the rightmost path is
/// replaced by the constant 1). Zero coefficients are kept, since each entry
/// stands for a tree, not a term. Order follows child order at every choice.
pub fn enumerate_proof_trees(c: &Circuit, root: GateId, snip: Option<GateId>, cap: u128) -> Result<Vec<Monomial>> {
    let count = count_trees(c, root, snip);
    if count > cap {
        return Err(Error::TooManyProofTrees { count, cap });
    }
    let n = c.num_vars();
    let f = c.field();
    let mut plain: Vec<Option<Vec<Monomial>>> = vec![None; root + 1];
    let mut snipped: Vec<Option<Vec<Monomial>>> = vec![None; root + 1];

    fn product(f: Field, a: &[Monomial], b: &[Monomial]) -> Vec<Monomial> {
        let mut out = Vec::with_capacity(a.len() * b.len());
        for x in a {
            for y in b {
                out.push(Monomial {
                    exponents: x.exponents.iter().zip(&y.exponents).map(|(p, q)| p + q).collect(),
                    coeff: f.mul(x.coeff, y.coeff),
                });
            }
        }
        out
    }

    let one = Monomial { exponents: vec![0; n], coeff: 1 % f.modulus() };
    let live = c.cone(root);
    for id in 0..=root {
        if !live[id] {
            continue;
        }
        let g = c.gate(id);
        let p = match g {
            Gate::Input(i) => {
                let mut e = vec![0; n];
                e[*i] = 1;
                vec![Monomial { exponents: e, coeff: 1 % f.modulus() }]
            }
            Gate::Const(v) => vec![Monomial { exponents: vec![0; n], coeff: *v }],
            Gate::Add(ch) => ch.iter().flat_map(|&x| plain[x].clone().expect("child enumerated")).collect(),
            Gate::Mul(ch) => ch
                .iter()
                .fold(vec![one.clone()], |acc, &x| product(f, &acc, plain[x].as_ref().expect("child enumerated"))),
        };
        if let Some(v) = snip {
            let s = if id == v {
                vec![one.clone()]
            } else {
                match g {
                    Gate::Input(_) | Gate::Const(_) => Vec::new(),
                    Gate::Add(ch) => ch.iter().flat_map(|&x| snipped[x].clone().unwrap_or_default()).collect(),
                    Gate::Mul(ch) => {
                        let (last, left) = ch.split_last().expect("validated fan-in");
                        let acc = left.iter().fold(vec![one.clone()], |acc, &x| {
                            product(f, &acc, plain[x].as_ref().expect("child enumerated"))
                        });
                        product(f, &acc, snipped[*last].as_deref().unwrap_or(&[]))
                    }
                }
            };
            snipped[id] = Some(s);
        }
        plain[id] = Some(p);
    }
    Ok(if snip.is_some() { snipped[root].take() } else { plain[root].take() }.unwrap_or_default())
}

/// Sum of enumerated monomials as a polynomial.
pub fn sum_monomials(n: usize, field: Field, monos: &[Monomial]) -> SparsePolynomial {
    let mut p = SparsePolynomial::zero(n, field);
    for m in monos {
        p.add_term(m.exponents.clone(), m.coeff);
    }
    p
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum EquivVerdict {
    Equivalent,
    NotEquivalent { trial: u64, point: Vec<u64>, left: u64, right: u64 },
    IncompatibleArity,
}

impl EquivVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivVerdict::Equivalent)
    }
}

/// Randomized identity test at `trials` uniform points; trial `i` draws its
/// point from the stream seeded with `seed + i`.
pub fn random_equiv<A, B>(a: &A, b: &B, trials: u64, seed: u64) -> EquivVerdict
where
    A: PolyFunction + ?Sized,
    B: PolyFunction + ?Sized,
{
    if a.num_vars() != b.num_vars() || a.field() != b.field() {
        return EquivVerdict::IncompatibleArity;
    }
    let f = a.field();
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let point = f.random_point(&mut rng, a.num_vars());
        let (left, right) = (a.eval_at(&point), b.eval_at(&point));
        if left != right {
            return EquivVerdict::NotEquivalent { trial, point, left, right };
        }
    }
    EquivVerdict::Equivalent
}

/// Exact comparison of both expansions.
pub fn exact_equiv<A, B>(a: &A, b: &B, budget: u128) -> Result<bool>
where
    A: PolyFunction + ?Sized,
    B: PolyFunction + ?Sized,
{
    if a.num_vars() != b.num_vars() || a.field() != b.field() {
        return Err(Error::IncompatibleArity);
    }
    Ok(a.expand(budget)? == b.expand(budget)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivMethod {
    Exact,
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivOutcome {
    pub method: EquivMethod,
    #[serde(flatten)]
    pub verdict: EquivVerdict,
}

impl EquivOutcome {
    /// `exact:equivalent`, `random:not_equivalent`, ...
    pub fn label(&self) -> String {
        let m = match self.method {
            EquivMethod::Exact => "exact",
            EquivMethod::Random => "random",
        };
        let v = match self.verdict {
            EquivVerdict::Equivalent => "equivalent",
            EquivVerdict::NotEquivalent { .. } => "not_equivalent",
            EquivVerdict::IncompatibleArity => "incompatible_arity",
        };
        format!("{m}:{v}")
    }
}

/// Exact comparison when both expansions fit in `budget`, otherwise the
/// randomized test. An exact mismatch is reported with a distinguishing
/// point found by the randomized test when one turns up.
pub fn check_equivalence<A, B>(a: &A, b: &B, budget: u128, trials: u64, seed: u64) -> EquivOutcome
where
    A: PolyFunction + ?Sized,
    B: PolyFunction + ?Sized,
{
    match exact_equiv(a, b, budget) {
        Ok(true) => EquivOutcome { method: EquivMethod::Exact, verdict: EquivVerdict::Equivalent },
        Ok(false) => {
            let verdict = match random_equiv(a, b, trials.max(1), seed) {
                EquivVerdict::Equivalent => {
                    EquivVerdict::NotEquivalent { trial: 0, point: Vec::new(), left: 0, right: 0 }
                }
                other => other,
            };
            EquivOutcome { method: EquivMethod::Exact, verdict }
        }
        Err(Error::IncompatibleArity) => {
            EquivOutcome { method: EquivMethod::Exact, verdict: EquivVerdict::IncompatibleArity }
        }
        Err(_) => EquivOutcome { method: EquivMethod::Random, verdict: random_equiv(a, b, trials, seed) },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub n: usize,
    pub size: usize,
    pub gates: usize,
    pub inputs: usize,
    pub consts: usize,
    pub adds: usize,
    pub muls: usize,
    pub depth: usize,
    pub product_depth: usize,
    pub max_add_fanin: usize,
    pub max_mul_fanin: usize,
    /// Fan-in of the output gate when it is a sum, otherwise 1.
    pub top_fanin: usize,
    /// Per-variable maximum `Var` coordinate over all gates.
    pub var_max: Vec<u32>,
    pub k: u32,
    pub var_output_total: u32,
    /// Semantic total degree of the output polynomial.
    pub degree: Option<u32>,
    /// Set when `degree` is a lower bound from sampled proof-trees rather
    /// than read off the exact expansion.
    pub degree_approximate: bool,
}

/// Longest output-to-leaf path, and the number of product layers on the
/// worst path with consecutive products counting once.
fn depths(c: &Circuit) -> (usize, usize) {
    let mut depth = vec![0usize; c.len()];
    let mut pdepth = vec![0usize; c.len()];
    for (id, g) in c.gates().iter().enumerate() {
        match g {
            Gate::Input(_) | Gate::Const(_) => {}
            Gate::Add(ch) => {
                depth[id] = 1 + ch.iter().map(|&x| depth[x]).max().unwrap_or(0);
                pdepth[id] = ch.iter().map(|&x| pdepth[x]).max().unwrap_or(0);
            }
            Gate::Mul(ch) => {
                depth[id] = 1 + ch.iter().map(|&x| depth[x]).max().unwrap_or(0);
                pdepth[id] = ch
                    .iter()
                    .map(|&x| if matches!(c.gate(x), Gate::Mul(_)) { pdepth[x] } else { pdepth[x] + 1 })
                    .max()
                    .unwrap_or(1);
            }
        }
    }
    (depth[c.output()], pdepth[c.output()])
}

fn sampled_degree(c: &Circuit, samples: u64, seed: u64) -> u32 {
    let mut best = 0;
    for s in 0..samples {
        let mut rng = trial_rng(seed, s);
        let mut deg = vec![0u32; c.len()];
        for (id, g) in c.gates().iter().enumerate() {
            deg[id] = match g {
                Gate::Input(_) => 1,
                Gate::Const(_) => 0,
                Gate::Add(ch) => deg[ch[rng.gen_range(0..ch.len())]],
                Gate::Mul(ch) => ch.iter().map(|&x| deg[x]).sum(),
            };
        }
        best = best.max(deg[c.output()]);
    }
    best
}

pub fn structural_report(c: &Circuit, budget: u128) -> StructuralReport {
    let vars = compute_var(c);
    let mut var_max = vec![0u32; c.num_vars()];
    for v in &vars {
        for (a, &b) in var_max.iter_mut().zip(v.coords()) {
            *a = (*a).max(b);
        }
    }
    let count = |pred: fn(&Gate) -> bool| c.gates().iter().filter(|g| pred(g)).count();
    let max_fanin = |pred: fn(&Gate) -> bool| {
        c.gates().iter().filter(|g| pred(g)).map(|g| g.children().len()).max().unwrap_or(0)
    };
    let (depth, product_depth) = depths(c);
    let (degree, degree_approximate) = match brute_force_expand(c, budget) {
        Ok(p) => (p.degree(), false),
        Err(_) => (Some(sampled_degree(c, 64, 0)), true),
    };
    StructuralReport {
        n: c.num_vars(),
        size: c.size(),
        gates: c.len(),
        inputs: count(|g| matches!(g, Gate::Input(_))),
        consts: count(|g| matches!(g, Gate::Const(_))),
        adds: count(|g| matches!(g, Gate::Add(_))),
        muls: count(|g| matches!(g, Gate::Mul(_))),
        depth,
        product_depth,
        max_add_fanin: max_fanin(|g| matches!(g, Gate::Add(_))),
        max_mul_fanin: max_fanin(|g| matches!(g, Gate::Mul(_))),
        top_fanin: match c.gate(c.output()) {
            Gate::Add(ch) => ch.len(),
            _ => 1,
        },
        k: var_max.iter().copied().max().unwrap_or(0),
        var_max,
        var_output_total: vars[c.output()].total(),
        degree,
        degree_approximate,
    }
}

/// Report for a layered circuit, measured on its flattening.
pub fn layered_report(l: &LayeredCircuit, budget: u128) -> StructuralReport {
    structural_report(&l.to_circuit(), budget)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub k: u32,
    pub s: usize,
    pub t: u32,
    pub delta: u32,
    pub in_size: usize,
    pub out_size: usize,
    pub top_fanin: usize,
    /// `log2(out_size) / (k t + (k n / t) log2 s)`.
    pub bound_ratio: f64,
    /// `log_s(top_fanin) / (k n / t)`.
    pub topfanin_ratio: f64,
    /// `log2(out_size) / (Δ (k n / log2 s)^{1/Δ} log2 s)`.
    pub delta_ratio: f64,
}

/// Measured sizes against the shapes of the size bounds. Nothing is
/// asserted; the constants hidden in the bounds are what is being measured.
pub fn check_bounds(before: &StructuralReport, after: &StructuralReport, schedule: &Schedule) -> BoundReport {
    let k = schedule.k.max(1) as f64;
    let n = schedule.n.max(1) as f64;
    let t = schedule.t_value.max(1) as f64;
    let s = schedule.s.max(2) as f64;
    let delta = schedule.delta.max(1) as f64;
    let log_s = s.log2();
    let out = (after.size.max(1)) as f64;
    let kn = k * n;
    let bound_ratio = out.log2() / (k * t + (kn / t) * log_s);
    let topfanin_ratio = (after.top_fanin.max(1) as f64).log2() / log_s / (kn / t);
    let delta_ratio = out.log2() / (delta * (kn / log_s).powf(1.0 / delta) * log_s);
    BoundReport {
        n: schedule.n,
        k: schedule.k,
        s: schedule.s,
        t: schedule.t_value,
        delta: schedule.delta,
        in_size: before.size,
        out_size: after.size,
        top_fanin: after.top_fanin,
        bound_ratio,
        topfanin_ratio,
        delta_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Builder;

    fn f() -> Field {
        Field::default()
    }

    #[test]
    fn expand_variable_and_product_of_sums() {
        let mut b = Builder::new(1, f());
        let x = b.input(0);
        let p = brute_force_expand(&b.finish("x", x), 16).unwrap();
        assert_eq!(p.to_text(), "1 * x1^1\n");

        let mut b = Builder::new(4, f());
        let x: Vec<_> = (0..4).map(|i| b.input(i)).collect();
        let a1 = b.add(vec![x[0], x[1]]);
        let a2 = b.add(vec![x[2], x[3]]);
        let r = b.mul(vec![a1, a2]);
        let c = b.finish("pos", r);
        let p = brute_force_expand(&c, 16).unwrap();
        assert_eq!(p.num_terms(), 4);
        assert!(p.terms().all(|(_, c)| c == 1));
        assert!(matches!(brute_force_expand(&c, 15), Err(Error::ExpansionTooLarge { needed: 16, .. })));
    }

    #[test]
    fn proof_trees_small() {
        let mut b = Builder::new(4, f());
        let x: Vec<_> = (0..4).map(|i| b.input(i)).collect();
        let m = b.mul(vec![x[0], x[1]]);
        let a = b.add(vec![x[0], x[1]]);
        let c = b.clone().finish("m", m);
        let t = enumerate_proof_trees(&c, m, None, 10).unwrap();
        assert_eq!(t, vec![Monomial { exponents: vec![1, 1, 0, 0], coeff: 1 }]);
        let t = enumerate_proof_trees(&c, a, None, 10).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].exponents, vec![1, 0, 0, 0]);
        assert_eq!(t[1].exponents, vec![0, 1, 0, 0]);

        let a2 = b.add(vec![x[2], x[3]]);
        let r = b.mul(vec![a, a2]);
        let c = b.finish("pos", r);
        let t = enumerate_proof_trees(&c, r, Some(a2), 10).unwrap();
        let exps: Vec<_> = t.iter().map(|m| m.exponents.clone()).collect();
        assert_eq!(exps, vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0]]);
        assert!(matches!(enumerate_proof_trees(&c, r, None, 3), Err(Error::TooManyProofTrees { count: 4, cap: 3 })));
    }

    #[test]
    fn equivalence_verdicts() {
        let mut b = Builder::new(2, f());
        let x = b.input(0);
        let y = b.input(1);
        let one = b.constant(1);
        let m = b.mul(vec![x, one]);
        let a = b.add(vec![m, y]);
        let c1 = b.finish("a", a);
        assert_eq!(random_equiv(&c1, &c1, 20, 0), EquivVerdict::Equivalent);
        let mut gates = c1.gates().to_vec();
        gates[2] = Gate::Const(2);
        let c2 = Circuit::new("b", 2, gates, a, f()).unwrap();
        assert!(matches!(random_equiv(&c1, &c2, 20, 0), EquivVerdict::NotEquivalent { trial: 0, .. }));
        let c3 = Circuit::new("c", 3, c1.gates().to_vec(), a, f()).unwrap();
        assert_eq!(random_equiv(&c1, &c3, 20, 0), EquivVerdict::IncompatibleArity);
        assert!(!exact_equiv(&c1, &c2, 1 << 10).unwrap());
    }

    #[test]
    fn report_for_product() {
        let mut b = Builder::new(2, f());
        let x = b.input(0);
        let y = b.input(1);
        let m = b.mul(vec![x, y]);
        let r = structural_report(&b.finish("m", m), 1 << 10);
        assert_eq!((r.size, r.depth, r.product_depth), (2, 1, 1));
        assert_eq!(r.degree, Some(2));
        assert_eq!(r.k, 1);
        assert_eq!(r.max_mul_fanin, 2);
    }
}
