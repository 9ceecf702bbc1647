//! Reduction of a balanced circuit to a sum of products of sparse
//! polynomials, and the recursive reduction to product-depth Δ.
//!
//! A node of the recursion tree is a product `c · Π w_ℓ` of source gates.
//! While some factor has `|Var| > t`, the heaviest one (smallest id on ties)
//! is replaced by its sum-of-products form read off the balanced circuit,
//! which splits the node into one child per summand. Leaves are products of
//! factors with `|Var| <= t`, each expanded to a sparse polynomial.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::balance::{balance_pipeline, check_balanced};
use crate::circuit::{Builder, Circuit, Gate, GateId};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::SparsePolynomial;
use crate::var::{compute_var, infer_k, VarVector};
use crate::verify::{expand_gate, PolyFunction};

/// Default cap on the number of monomials of a bottom factor.
pub const DEFAULT_BUDGET: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub n: usize,
    pub k: u32,
    pub s: usize,
    pub delta: u32,
    pub t_value: u32,
}

/// Threshold for a reduction to product-depth `delta` of a circuit whose
/// `|Var|` is at most `kn`, with `log₂ s` as the size term.
fn threshold(kn: f64, log_s: f64, delta: u32) -> u32 {
    let t = if delta == 2 { (kn * log_s).sqrt() } else { kn / (kn / log_s).powf(1.0 / delta as f64) };
    // guard against 36.9999... style float noise before the ceiling
    let t = (t - 1e-9).ceil();
    t.clamp(1.0, kn.max(1.0)) as u32
}

/// `t = ⌈√(kn log₂ s)⌉` for `delta = 2`, `t = ⌈kn / (kn / log₂ s)^{1/Δ}⌉`
/// otherwise, clamped to `[1, kn]`.
///
/// ```
/// use mlcirc::depth::choose_t;
/// assert_eq!(choose_t(100, 1, 10_000, 2).unwrap().t_value, 37);
/// assert_eq!(choose_t(64, 1, 256, 3).unwrap().t_value, 32);
/// ```
pub fn choose_t(n: usize, k: u32, s: usize, delta: u32) -> Result<Schedule> {
    if n < 1 || k < 1 || s < 2 || delta < 2 {
        return Err(Error::InvalidParams(format!(
            "need n >= 1, k >= 1, s >= 2, delta >= 2 (got n={n}, k={k}, s={s}, delta={delta})"
        )));
    }
    let kn = (k as u64 * n as u64) as f64;
    Ok(Schedule { n, k, s, delta, t_value: threshold(kn, (s as f64).log2(), delta) })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summand {
    pub coeff: u64,
    /// Indices into the factor pool, with repetition.
    pub factors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    Poly(SparsePolynomial),
    Nested(Box<LayeredCircuit>),
}

/// `Σ_i c_i Π_j F_ij` where every `F_ij` is a sparse polynomial (`delta = 2`)
/// or a layered circuit of product-depth `delta - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredCircuit {
    pub delta: u32,
    pub n: usize,
    pub k: u32,
    pub field: Field,
    pub summands: Vec<Summand>,
    pub pool: Vec<Factor>,
}

impl LayeredCircuit {
    pub fn top_fanin(&self) -> usize {
        self.summands.len()
    }

    /// Largest `|Var|` of a bottom polynomial, at any nesting level.
    pub fn max_bottom_var(&self) -> u32 {
        self.pool
            .iter()
            .map(|f| match f {
                Factor::Poly(p) => p.degree_vector().total(),
                Factor::Nested(l) => l.max_bottom_var(),
            })
            .max()
            .unwrap_or(0)
    }

    /// Flattening with strict layers: every sum and product of every layer
    /// becomes a gate, even with fan-in one.
    pub fn to_circuit(&self) -> Circuit {
        let mut b = Builder::new(self.n, self.field);
        let mut leaves = Leaves::default();
        let root = self.emit(&mut b, &mut leaves);
        b.finish(format!("layered{}", self.delta), root)
    }

    fn emit(&self, b: &mut Builder, leaves: &mut Leaves) -> GateId {
        let pool: Vec<GateId> = self
            .pool
            .iter()
            .map(|f| match f {
                Factor::Poly(p) => emit_poly(p, b, leaves),
                Factor::Nested(l) => l.emit(b, leaves),
            })
            .collect();
        let one = 1 % self.field.modulus();
        let products: Vec<GateId> = self
            .summands
            .iter()
            .map(|s| {
                let mut ch = Vec::with_capacity(s.factors.len() + 1);
                if s.coeff != one || s.factors.is_empty() {
                    ch.push(leaves.constant(b, s.coeff));
                }
                ch.extend(s.factors.iter().map(|&i| pool[i]));
                b.mul(ch)
            })
            .collect();
        if products.is_empty() {
            let z = leaves.constant(b, 0);
            let m = b.mul(vec![z]);
            return b.add(vec![m]);
        }
        b.add(products)
    }

    /// `{delta, summands: [{factors: [...]}]}`; a bottom factor is
    /// `{monomials: [{exponents, coeff}]}`, a nested one is a layered object
    /// itself. A summand coefficient other than one appears as a leading
    /// constant factor.
    pub fn to_json(&self) -> Value {
        let one = 1 % self.field.modulus();
        let pool: Vec<Value> = self
            .pool
            .iter()
            .map(|f| match f {
                Factor::Poly(p) => serde_json::to_value(p.to_json()).expect("plain data"),
                Factor::Nested(l) => l.to_json(),
            })
            .collect();
        let summands: Vec<Value> = self
            .summands
            .iter()
            .map(|s| {
                let mut factors = Vec::with_capacity(s.factors.len() + 1);
                if s.coeff != one || s.factors.is_empty() {
                    let c = SparsePolynomial::constant(self.n, self.field, s.coeff);
                    let mut v = serde_json::to_value(c.to_json()).expect("plain data");
                    if s.coeff == 0 {
                        v = json!({"monomials": [{"exponents": vec![0; self.n], "coeff": 0}]});
                    }
                    factors.push(v);
                }
                factors.extend(s.factors.iter().map(|&i| pool[i].clone()));
                json!({ "factors": factors })
            })
            .collect();
        json!({ "delta": self.delta, "summands": summands })
    }

    fn eval_layer(&self, point: &[u64]) -> u64 {
        let f = self.field;
        let vals: Vec<u64> = self
            .pool
            .iter()
            .map(|p| match p {
                Factor::Poly(p) => p.eval(point),
                Factor::Nested(l) => l.eval_layer(point),
            })
            .collect();
        self.summands
            .iter()
            .fold(0, |acc, s| f.add(acc, s.factors.iter().fold(s.coeff, |m, &i| f.mul(m, vals[i]))))
    }

    fn degree_vector_bound(&self) -> VarVector {
        let pool: Vec<VarVector> = self
            .pool
            .iter()
            .map(|p| match p {
                Factor::Poly(p) => p.degree_vector(),
                Factor::Nested(l) => l.degree_vector_bound(),
            })
            .collect();
        let mut out = VarVector::zero(self.n);
        for s in &self.summands {
            let mut v = VarVector::zero(self.n);
            for &i in &s.factors {
                v.add_assign(&pool[i]);
            }
            out.max_assign(&v);
        }
        out
    }

    fn expand_layer(&self) -> Result<SparsePolynomial> {
        let pool = self
            .pool
            .iter()
            .map(|p| match p {
                Factor::Poly(p) => Ok(p.clone()),
                Factor::Nested(l) => l.expand_layer(),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut acc = SparsePolynomial::zero(self.n, self.field);
        for s in &self.summands {
            let mut prod = SparsePolynomial::constant(self.n, self.field, s.coeff);
            for &i in &s.factors {
                if prod.is_zero() {
                    break;
                }
                prod = prod.mul(&pool[i]);
            }
            acc = acc.add(&prod);
        }
        Ok(acc)
    }
}

impl PolyFunction for LayeredCircuit {
    fn num_vars(&self) -> usize {
        self.n
    }

    fn field(&self) -> Field {
        self.field
    }

    fn eval_at(&self, point: &[u64]) -> u64 {
        self.eval_layer(point)
    }

    fn expand(&self, budget: u128) -> Result<SparsePolynomial> {
        let needed = self.degree_vector_bound().monomial_bound();
        if needed > budget {
            return Err(Error::ExpansionTooLarge { needed, budget });
        }
        self.expand_layer()
    }
}

#[derive(Default)]
struct Leaves {
    inputs: HashMap<usize, GateId>,
    consts: HashMap<u64, GateId>,
}

impl Leaves {
    fn input(&mut self, b: &mut Builder, i: usize) -> GateId {
        *self.inputs.entry(i).or_insert_with(|| b.input(i))
    }

    fn constant(&mut self, b: &mut Builder, c: u64) -> GateId {
        *self.consts.entry(c).or_insert_with(|| b.constant(c))
    }
}

fn emit_poly(p: &SparsePolynomial, b: &mut Builder, leaves: &mut Leaves) -> GateId {
    let one = 1 % p.field().modulus();
    let mut monos = Vec::with_capacity(p.num_terms().max(1));
    for (exps, c) in p.terms() {
        let mut ch = Vec::new();
        if c != one || exps.iter().all(|&e| e == 0) {
            ch.push(leaves.constant(b, c));
        }
        for (i, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                ch.push(leaves.input(b, i));
            }
        }
        monos.push(b.mul(ch));
    }
    if monos.is_empty() {
        let z = leaves.constant(b, 0);
        monos.push(b.mul(vec![z]));
    }
    b.add(monos)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub top_fanin: usize,
    pub tree_depth: usize,
    pub t: u32,
    pub n: usize,
    pub k: u32,
    pub s: usize,
    pub bound_ratio: f64,
    /// `20 kn / t`.
    pub depth_bound: f64,
    pub depth_ok: bool,
    /// Every expansion step dropped the product's `|Var|` by at least `t/4`
    /// or added a factor with `|Var| >= t/16`.
    pub measure_ok: bool,
    pub expansion_steps: u64,
    pub out_size: usize,
}

/// Exact polynomial of one gate; refuses gates whose `Π(1 + Var_i)` exceeds
/// `budget`.
///
/// ```
/// use mlcirc::circuit::Builder;
/// use mlcirc::depth::expand_sparse;
/// use mlcirc::field::Field;
///
/// let mut b = Builder::new(1, Field::default());
/// let x = b.input(0);
/// let sq = b.mul(vec![x, x]);
/// let two = b.constant(2);
/// let lin = b.mul(vec![two, x]);
/// let g = b.add(vec![sq, lin]);
/// let c = b.finish("g", g);
/// let p = expand_sparse(&c, g, 16).unwrap();
/// assert_eq!(p.coeff(&[2]), 1);
/// assert_eq!(p.coeff(&[1]), 2);
/// assert_eq!(p.num_terms(), 2);
/// ```
pub fn expand_sparse(c: &Circuit, gate: GateId, budget: u128) -> Result<SparsePolynomial> {
    expand_gate(c, gate, budget)
}

type Node = Vec<GateId>;
type Split = Vec<(u64, Node)>;

struct Reducer<'a> {
    c: &'a Circuit,
    vars: Vec<VarVector>,
    zero_vals: Vec<u64>,
    t: u32,
    splits: HashMap<GateId, Arc<Split>>,
}

impl<'a> Reducer<'a> {
    fn pot(&self, g: GateId) -> u32 {
        self.vars[g].total()
    }

    /// `(coeff, factors)` with constant-valued factors folded away.
    fn fold(&self, coeff: u64, gates: &[GateId]) -> (u64, Node) {
        let f = self.c.field();
        let mut c = coeff;
        let mut out = Vec::with_capacity(gates.len());
        for &g in gates {
            if self.pot(g) == 0 {
                c = f.mul(c, self.zero_vals[g]);
            } else {
                out.push(g);
            }
        }
        out.sort_unstable();
        (c, out)
    }

    /// Sum-of-products form of `g`: nested sums are flattened, a product
    /// contributes its children.
    fn split(&mut self, g: GateId) -> Arc<Split> {
        if let Some(s) = self.splits.get(&g) {
            return s.clone();
        }
        let one = 1 % self.c.field().modulus();
        let out: Split = match self.c.gate(g) {
            Gate::Mul(ch) => vec![self.fold(one, ch)],
            Gate::Add(ch) => {
                let mut v = Vec::new();
                for &h in ch {
                    match self.c.gate(h) {
                        Gate::Add(_) => v.extend(self.split(h).iter().cloned()),
                        Gate::Mul(gc) => v.push(self.fold(one, gc)),
                        _ => v.push(self.fold(one, &[h])),
                    }
                }
                v
            }
            _ => vec![self.fold(one, &[g])],
        };
        let out = Arc::new(out);
        self.splits.insert(g, out.clone());
        out
    }

    fn heavy_count(&self, node: &Node) -> usize {
        node.iter().filter(|&&g| 16 * self.pot(g) >= self.t).count()
    }

    fn var_total(&self, node: &Node) -> u32 {
        node.iter().map(|&g| self.pot(g)).sum()
    }

    /// Index of the factor to expand, if any exceeds `t`.
    fn pick(&self, node: &Node) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &g) in node.iter().enumerate() {
            if self.pot(g) > self.t && best.is_none_or(|b| self.pot(g) > self.pot(node[b])) {
                best = Some(i);
            }
        }
        best
    }
}

struct TreeOutcome {
    leaves: BTreeMap<Node, u64>,
    depth: usize,
    steps: u64,
    measure_ok: bool,
}

fn build_tree(c: &Circuit, t: u32) -> TreeOutcome {
    let f = c.field();
    let n = c.num_vars();
    let mut r = Reducer { c, vars: compute_var(c), zero_vals: c.evaluate_all(&vec![0; n]), t, splits: HashMap::new() };
    let (c0, root) = r.fold(1 % f.modulus(), &[c.output()]);
    let mut level: BTreeMap<Node, u64> = BTreeMap::new();
    level.insert(root, c0);
    let mut leaves: BTreeMap<Node, u64> = BTreeMap::new();
    let mut depth = 0;
    let mut steps = 0u64;
    let mut measure_ok = true;
    loop {
        let mut next: BTreeMap<Node, u64> = BTreeMap::new();
        let mut expanding = Vec::new();
        for (node, coeff) in level {
            match r.pick(&node) {
                None => {
                    let slot = leaves.entry(node).or_insert(0);
                    *slot = f.add(*slot, coeff);
                }
                Some(i) => {
                    r.split(node[i]);
                    expanding.push((node, coeff, i));
                }
            }
        }
        if expanding.is_empty() {
            break;
        }
        depth += 1;
        let r_ref = &r;
        let splits: HashMap<GateId, &Split> =
            expanding.iter().map(|(node, _, i)| (node[*i], r_ref.splits[&node[*i]].as_ref())).collect();
        let children: Vec<(Vec<(Node, u64)>, bool)> = expanding
            .par_iter()
            .map(|(node, coeff, i)| {
                let g = node[*i];
                let before_total = r_ref.var_total(node);
                let before_heavy = r_ref.heavy_count(node);
                let mut ok = true;
                let mut kids = Vec::new();
                let mut rest = node.clone();
                rest.remove(*i);
                for (sc, sf) in splits[&g].iter() {
                    let mut child = rest.clone();
                    child.extend_from_slice(sf);
                    child.sort_unstable();
                    let after_total = r_ref.var_total(&child);
                    let dropped = 4 * (before_total as u64).saturating_sub(after_total as u64) >= t as u64;
                    if !dropped && r_ref.heavy_count(&child) <= before_heavy {
                        ok = false;
                    }
                    kids.push((child, f.mul(*coeff, *sc)));
                }
                (kids, ok)
            })
            .collect();
        for (kids, ok) in children {
            steps += 1;
            measure_ok &= ok;
            for (child, coeff) in kids {
                let slot = next.entry(child).or_insert(0);
                *slot = f.add(*slot, coeff);
            }
        }
        level = next;
    }
    TreeOutcome { leaves, depth, steps, measure_ok }
}

/// Bottom polynomials of every gate in `gates`, sharing work across gates.
fn expand_factors(c: &Circuit, gates: &[GateId], budget: u128) -> Result<HashMap<GateId, SparsePolynomial>> {
    let vars = compute_var(c);
    let mut memo: HashMap<GateId, SparsePolynomial> = HashMap::new();
    let n = c.num_vars();
    let f = c.field();
    for &root in gates {
        let needed = vars[root].monomial_bound();
        if needed > budget {
            return Err(Error::ExpansionTooLarge { needed, budget });
        }
        // iterative post-order over the not-yet-expanded part of the cone
        let mut stack = vec![(root, false)];
        while let Some((g, ready)) = stack.pop() {
            if memo.contains_key(&g) {
                continue;
            }
            let gate = c.gate(g);
            if !ready {
                stack.push((g, true));
                for &h in gate.children() {
                    if !memo.contains_key(&h) {
                        stack.push((h, false));
                    }
                }
                continue;
            }
            let p = match gate {
                Gate::Input(i) => SparsePolynomial::variable(n, f, *i),
                Gate::Const(v) => SparsePolynomial::constant(n, f, *v),
                Gate::Add(ch) => ch.iter().fold(SparsePolynomial::zero(n, f), |acc, h| acc.add(&memo[h])),
                Gate::Mul(ch) => {
                    ch.iter().fold(SparsePolynomial::constant(n, f, 1), |acc, h| acc.mul(&memo[h]))
                }
            };
            memo.insert(g, p);
        }
    }
    Ok(memo)
}

fn circuit_k(c: &Circuit) -> u32 {
    infer_k(c).max(1)
}

fn require_balanced(c: &Circuit) -> Result<()> {
    let rep = check_balanced(c);
    if !rep.halving_ok {
        return Err(Error::NotBalanced("a product child has more than half its parent's |Var|".into()));
    }
    if rep.max_mul_fanin > 5 {
        return Err(Error::NotBalanced(format!("product fan-in {} exceeds 5", rep.max_mul_fanin)));
    }
    Ok(())
}

/// Core reduction: recursion tree at threshold `t`, then bottom factors as
/// sparse polynomials (`delta == 2`) or as nested reductions of the
/// sub-circuit at each factor gate.
fn reduce_layered(c: &Circuit, t: u32, delta: u32, log_s: f64, budget: u128) -> Result<(LayeredCircuit, TreeOutcome)> {
    let tree = build_tree(c, t);
    let mut gates: Vec<GateId> = tree.leaves.keys().flatten().copied().collect();
    gates.sort_unstable();
    gates.dedup();
    let index: HashMap<GateId, usize> = gates.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let pool = if delta == 2 {
        let polys = expand_factors(c, &gates, budget)?;
        gates.iter().map(|g| Factor::Poly(polys[g].clone())).collect()
    } else {
        let vars = compute_var(c);
        let mut pool = Vec::with_capacity(gates.len());
        for &g in &gates {
            let inner_t = threshold(t as f64, log_s, delta - 1);
            let sub = c.rooted_at(g);
            let _ = &vars;
            let (nested, _) = reduce_layered(&sub, inner_t, delta - 1, log_s, budget)?;
            pool.push(Factor::Nested(Box::new(nested)));
        }
        pool
    };
    let summands = tree
        .leaves
        .iter()
        .map(|(node, &coeff)| Summand { coeff, factors: node.iter().map(|g| index[g]).collect() })
        .collect();
    let layered = LayeredCircuit { delta, n: c.num_vars(), k: circuit_k(c), field: c.field(), summands, pool };
    Ok((layered, tree))
}

fn report(layered: &LayeredCircuit, tree: &TreeOutcome, t: u32, s: usize) -> ExpansionReport {
    let k = layered.k;
    let n = layered.n;
    let kn = (k as u64 * n as u64).max(1) as f64;
    let out_size = layered.to_circuit().size();
    let log_s = (s.max(2) as f64).log2();
    let depth_bound = 20.0 * kn / t as f64;
    ExpansionReport {
        top_fanin: layered.top_fanin(),
        tree_depth: tree.depth,
        t,
        n,
        k,
        s,
        bound_ratio: (out_size.max(1) as f64).log2() / (k as f64 * t as f64 + kn / t as f64 * log_s),
        depth_bound,
        depth_ok: tree.depth as f64 <= depth_bound,
        measure_ok: tree.measure_ok,
        expansion_steps: tree.steps,
        out_size,
    }
}

fn check_t(c: &Circuit, t: u32) -> Result<()> {
    let kn = circuit_k(c) as u64 * c.num_vars().max(1) as u64;
    if t < 1 || t as u64 > kn {
        return Err(Error::InvalidParams(format!("t must lie in [1, {kn}], got {t}")));
    }
    Ok(())
}

/// ΣΠΣΠ form of a balanced circuit with every bottom polynomial of
/// `|Var| <= t`. The report's `s` is the balanced circuit's size.
pub fn reduce_depth4(balanced: &Circuit, t: u32, budget: u128) -> Result<(LayeredCircuit, ExpansionReport)> {
    require_balanced(balanced)?;
    check_t(balanced, t)?;
    let s = balanced.size();
    let (layered, tree) = reduce_layered(balanced, t, 2, (s.max(2) as f64).log2(), budget)?;
    let rep = report(&layered, &tree, t, s);
    Ok((layered, rep))
}

/// Normalizes and balances `circuit`, then reduces it to product-depth
/// `delta`. Thresholds come from [`choose_t`] with `s` the size of the
/// original circuit unless `t` is given; nested levels use the same formula
/// with `kn` replaced by the enclosing threshold.
pub fn reduce_depth_delta(
    circuit: &Circuit,
    delta: u32,
    t: Option<u32>,
    budget: u128,
) -> Result<(LayeredCircuit, ExpansionReport)> {
    if delta < 2 {
        return Err(Error::InvalidParams(format!("delta must be at least 2, got {delta}")));
    }
    let (balanced, _) = balance_pipeline(circuit)?;
    let s = circuit.size().max(2);
    let t = match t {
        Some(t) => t,
        None => choose_t(circuit.num_vars().max(1), circuit_k(circuit), s, delta)?.t_value,
    };
    check_t(circuit, t)?;
    let (layered, tree) = reduce_layered(&balanced, t, delta, (s as f64).log2(), budget)?;
    let rep = report(&layered, &tree, t, s);
    Ok((layered, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::balance;
    use crate::normalize::normalize;
    use crate::verify::{brute_force_expand, structural_report};

    fn f() -> Field {
        Field::default()
    }

    fn product_of_sums(blocks: usize, width: usize) -> Circuit {
        let mut b = Builder::new(blocks * width, f());
        let x: Vec<_> = (0..blocks * width).map(|i| b.input(i)).collect();
        let sums: Vec<_> = x.chunks(width).map(|c| b.add(c.to_vec())).collect();
        let out = b.mul(sums);
        b.finish("pos", out)
    }

    #[test]
    fn schedules() {
        assert_eq!(choose_t(100, 1, 10_000, 2).unwrap().t_value, 37);
        assert_eq!(choose_t(1, 1, 2, 2).unwrap().t_value, 1);
        assert_eq!(choose_t(64, 1, 256, 3).unwrap().t_value, 32);
        assert!(matches!(choose_t(0, 1, 4, 2), Err(Error::InvalidParams(_))));
        assert!(matches!(choose_t(4, 1, 4, 1), Err(Error::InvalidParams(_))));
        assert!(matches!(choose_t(4, 1, 1, 2), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn product_of_sums_depth4() {
        let c = product_of_sums(4, 2);
        let (bal, _) = balance(&normalize(&c)).unwrap();
        let (l, rep) = reduce_depth4(&bal, 2, DEFAULT_BUDGET).unwrap();
        let p = l.expand(DEFAULT_BUDGET).unwrap();
        assert_eq!(p.num_terms(), 16);
        assert!(p.terms().all(|(_, c)| c == 1));
        assert_eq!(p, brute_force_expand(&c, 1 << 10).unwrap());
        assert!(l.max_bottom_var() <= 2);
        assert!(rep.measure_ok && rep.depth_ok, "{rep:?}");
        assert_eq!(structural_report(&l.to_circuit(), 1 << 10).product_depth, 2);
    }

    #[test]
    fn small_output_is_single_leaf() {
        let mut b = Builder::new(2, f());
        let x = b.input(0);
        let y = b.input(1);
        let s = b.add(vec![x, y]);
        let c = b.finish("s", s);
        let (l, rep) = reduce_depth4(&c, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(rep.top_fanin, 1);
        assert_eq!(rep.tree_depth, 0);
        assert_eq!(l.summands[0].factors.len(), 1);
    }

    #[test]
    fn rejects_unbalanced_and_bad_t() {
        let mut b = Builder::new(3, f());
        let x: Vec<_> = (0..3).map(|i| b.input(i)).collect();
        let m = b.mul(vec![x[0], x[1]]);
        let m2 = b.mul(vec![x[2], m]);
        let c = b.finish("m", m2);
        assert!(matches!(reduce_depth4(&c, 1, DEFAULT_BUDGET), Err(Error::NotBalanced(_))));
        let c = product_of_sums(2, 2);
        assert!(matches!(reduce_depth4(&c, 0, DEFAULT_BUDGET), Err(Error::InvalidParams(_))));
        assert!(matches!(reduce_depth4(&c, 5, DEFAULT_BUDGET), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn delta_levels() {
        let c = product_of_sums(4, 2);
        let want = brute_force_expand(&c, 1 << 10).unwrap();
        for delta in 2..=5 {
            let (l, rep) = reduce_depth_delta(&c, delta, None, DEFAULT_BUDGET).unwrap();
            assert_eq!(l.expand(DEFAULT_BUDGET).unwrap(), want, "delta {delta}");
            let sr = structural_report(&l.to_circuit(), 1 << 10);
            assert!(sr.product_depth <= delta as usize, "delta {delta}: {}", sr.product_depth);
            assert!(rep.measure_ok);
        }
    }

    #[test]
    fn json_shape() {
        let c = product_of_sums(2, 2);
        let (l, _) = reduce_depth_delta(&c, 2, Some(2), DEFAULT_BUDGET).unwrap();
        let v = l.to_json();
        assert_eq!(v["delta"], 2);
        assert!(v["summands"][0]["factors"][0]["monomials"].is_array());
    }
}
