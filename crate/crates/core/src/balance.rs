//! Balancing by gate quotients and frontier decomposition.
//!
//! Every polynomial `[u]` and quotient `[u:v]` of the source circuit is a
//! *key*. A key of potential `t` (its `|Var|`) is rewritten as a sum of
//! products whose factors are keys of potential at most `t/2`:
//!
//! * `[u]` uses the plain frontier at `m = ⌈t/2⌉`: one product
//!   `[u:w]·[w_L]·[z]` per product edge `(w, z)` and one product `[u:w]·[z]`
//!   per sum edge, over gates `w` on rightmost paths below `u`.
//! * `[u:v]` uses the frontier with respect to `v`; the factor `[w_L]` is
//!   itself replaced by its own plain decomposition, giving products of up
//!   to five factors `[u:w]·[w_L:p]·[p_L]·[q]·[z:v]`.
//!
//! Keys with a single live variable, or potential at most two, are
//! materialized directly from their values on a small grid of points.
//!
//! Each output node has exactly the `Var` vector of its key: zero
//! coefficients are kept, never pruned. That makes the halving condition a
//! statement about key potentials, which the product builder enforces: a
//! product whose heaviest factor exceeds half the total has that factor
//! replaced by its own decomposition and is distributed out, and a product
//! with more than five factors has its two lightest factors grouped.

use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::circuit::{Builder, Circuit, Gate, GateId};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::normalize::right_heavy_violation;
use crate::quotient::{frontier_slots, quotient_table_with, quotient_values, rightmost_descendants, QuotientTable};
use crate::var::{compute_var, infer_k, VarVector};

/// Something the output circuit computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKey {
    /// `[u]`
    Plain(GateId),
    /// `[u:v]`, only for `u != v` with `v` quotient-reachable from `u`.
    Quot(GateId, GateId),
    /// The variable `x_i` itself, used by materialized monomials.
    Var(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub input_size: usize,
    pub output_size: usize,
    pub k_in: u32,
    pub k_out: u32,
    pub max_mul_fanin: usize,
    pub max_add_fanin: usize,
    pub halving_ok: bool,
    pub k_preserved: bool,
    pub base_case_count: usize,
}

#[derive(Debug, Clone)]
struct Term {
    coeff: u64,
    factors: Vec<NodeKey>,
}

const MAX_MUL_FANIN: usize = 5;

struct Ctx<'a> {
    src: &'a Circuit,
    field: Field,
    n: usize,
    vars: Vec<VarVector>,
    zero_vals: Vec<u64>,
    tables: HashMap<GateId, QuotientTable>,
    zero_quot: HashMap<GateId, Vec<u64>>,
    reach: HashMap<GateId, Rc<Vec<bool>>>,
    out: Builder,
    inputs: Vec<Option<GateId>>,
    consts: HashMap<u64, GateId>,
    nodes: HashMap<NodeKey, GateId>,
    terms: HashMap<NodeKey, Rc<Vec<Term>>>,
    products: HashMap<(u64, Vec<NodeKey>), GateId>,
    base_cases: usize,
}

impl<'a> Ctx<'a> {
    fn new(src: &'a Circuit) -> Self {
        let n = src.num_vars();
        Ctx {
            src,
            field: src.field(),
            n,
            vars: compute_var(src),
            zero_vals: src.evaluate_all(&vec![0; n]),
            tables: HashMap::new(),
            zero_quot: HashMap::new(),
            reach: HashMap::new(),
            out: Builder::new(n, src.field()),
            inputs: vec![None; n],
            consts: HashMap::new(),
            nodes: HashMap::new(),
            terms: HashMap::new(),
            products: HashMap::new(),
            base_cases: 0,
        }
    }

    fn table(&mut self, v: GateId) -> &QuotientTable {
        let (src, vars) = (self.src, &self.vars);
        self.tables.entry(v).or_insert_with(|| quotient_table_with(src, vars, v))
    }

    fn reach(&mut self, u: GateId) -> Rc<Vec<bool>> {
        let src = self.src;
        self.reach.entry(u).or_insert_with(|| Rc::new(rightmost_descendants(src, u))).clone()
    }

    fn var(&mut self, key: NodeKey) -> VarVector {
        match key {
            NodeKey::Plain(u) => self.vars[u].clone(),
            NodeKey::Quot(u, v) => self.table(v).var(u).expect("quotient keys are reachable").clone(),
            NodeKey::Var(i) => VarVector::unit(self.n, i),
        }
    }

    fn potential(&mut self, key: NodeKey) -> u32 {
        match key {
            NodeKey::Plain(u) => self.vars[u].total(),
            NodeKey::Quot(u, v) => self.table(v).potential(u).expect("quotient keys are reachable"),
            NodeKey::Var(_) => 1,
        }
    }

    fn is_base(&mut self, key: NodeKey) -> bool {
        let v = self.var(key);
        v.total() <= 2 || v.support() <= 1
    }

    /// Value of `key` at `point`.
    fn eval_key(&mut self, key: NodeKey, point: &[u64]) -> u64 {
        match key {
            NodeKey::Plain(u) => self.src.evaluate_all(point)[u],
            NodeKey::Quot(u, v) => quotient_values(self.src, &self.src.evaluate_all(point), v)[u],
            NodeKey::Var(i) => point[i],
        }
    }

    /// Value of a key of potential zero, which is a constant.
    fn constant_value(&mut self, key: NodeKey) -> u64 {
        match key {
            NodeKey::Plain(u) => self.zero_vals[u],
            NodeKey::Quot(u, v) => {
                let (src, zero) = (self.src, &self.zero_vals);
                self.zero_quot.entry(v).or_insert_with(|| quotient_values(src, zero, v))[u]
            }
            NodeKey::Var(_) => unreachable!("variables are not constant"),
        }
    }

    fn input_gate(&mut self, i: usize) -> GateId {
        if let Some(g) = self.inputs[i] {
            return g;
        }
        let g = self.out.input(i);
        self.inputs[i] = Some(g);
        g
    }

    fn const_gate(&mut self, c: u64) -> GateId {
        if let Some(&g) = self.consts.get(&c) {
            return g;
        }
        let g = self.out.constant(c);
        self.consts.insert(c, g);
        g
    }

    fn sum(&mut self, parts: Vec<GateId>) -> GateId {
        if parts.len() == 1 {
            parts[0]
        } else {
            self.out.add(parts)
        }
    }

    /// Output gate computing `key`.
    fn node(&mut self, key: NodeKey) -> GateId {
        if let Some(&g) = self.nodes.get(&key) {
            return g;
        }
        let g = if let NodeKey::Var(i) = key {
            self.input_gate(i)
        } else if self.potential(key) == 0 {
            let c = self.constant_value(key);
            self.const_gate(c)
        } else {
            let terms = self.terms_of(key);
            let parts = terms.iter().map(|t| self.product(t.coeff, t.factors.clone())).collect();
            self.sum(parts)
        };
        self.nodes.insert(key, g);
        g
    }

    fn terms_of(&mut self, key: NodeKey) -> Rc<Vec<Term>> {
        if let Some(t) = self.terms.get(&key) {
            return t.clone();
        }
        let terms = if self.is_base(key) {
            self.base_terms(key)
        } else {
            match key {
                NodeKey::Plain(u) => self.plain_terms(u),
                NodeKey::Quot(u, v) => self.quot_terms(u, v),
                NodeKey::Var(_) => unreachable!("variables are base keys"),
            }
        };
        let terms = Rc::new(terms);
        self.terms.insert(key, terms.clone());
        terms
    }

    /// `[u] = Σ_{F_m^×} [u:w][w_L][z] + Σ_{F_m^+} [u:w][z]`, `m = ⌈t/2⌉`.
    fn plain_terms(&mut self, u: GateId) -> Vec<Term> {
        let t = self.vars[u].total();
        let m = t.div_ceil(2);
        let reach = self.reach(u);
        let mut out = Vec::new();
        for e in frontier_slots(self.src, &self.vars, m, None) {
            let w = e.parent;
            if !reach[w] {
                continue;
            }
            let mut factors = Vec::with_capacity(3);
            if w != u {
                factors.push(NodeKey::Quot(u, w));
            }
            match self.src.gate(w) {
                Gate::Mul(ch) => {
                    if e.slot != 1 {
                        continue;
                    }
                    factors.push(NodeKey::Plain(ch[0]));
                    factors.push(NodeKey::Plain(ch[1]));
                }
                Gate::Add(ch) => factors.push(NodeKey::Plain(ch[e.slot])),
                _ => unreachable!("leaves have no edges"),
            }
            out.push(Term { coeff: 1, factors });
        }
        out
    }

    /// `[u:v] = Σ_{F_{m,v}^×} [u:w][w_L][z:v] + Σ_{F_{m,v}^+} [u:w][z:v]`,
    /// with `[w_L]` expanded by its own decomposition when it is not a base
    /// key.
    fn quot_terms(&mut self, u: GateId, v: GateId) -> Vec<Term> {
        let t = self.potential(NodeKey::Quot(u, v));
        let m = t.div_ceil(2);
        let reach = self.reach(u);
        let table = self.table(v).clone();
        let mut out = Vec::new();
        for e in frontier_slots(self.src, &self.vars, m, Some(&table)) {
            let w = e.parent;
            if !reach[w] {
                continue;
            }
            let z = self.src.gate(w).children()[e.slot];
            let head = (w != u).then_some(NodeKey::Quot(u, w));
            let tail = (z != v).then_some(NodeKey::Quot(z, v));
            match self.src.gate(w) {
                Gate::Mul(ch) => {
                    if e.slot != 1 {
                        continue;
                    }
                    let left = NodeKey::Plain(ch[0]);
                    let inner: Rc<Vec<Term>> = if self.is_base(left) {
                        Rc::new(vec![Term { coeff: 1, factors: vec![left] }])
                    } else {
                        self.terms_of(left)
                    };
                    for it in inner.iter() {
                        let mut factors: Vec<NodeKey> = head.into_iter().collect();
                        factors.extend(it.factors.iter().copied());
                        factors.extend(tail);
                        out.push(Term { coeff: it.coeff, factors });
                    }
                }
                Gate::Add(_) => {
                    out.push(Term { coeff: 1, factors: head.into_iter().chain(tail).collect() });
                }
                _ => unreachable!("leaves have no edges"),
            }
        }
        out
    }

    /// Explicit monomials of a key with one live variable or potential at
    /// most two, interpolated from its values on the grid
    /// `Π_i {0, ..., Var_i}` over the live variables.
    fn base_terms(&mut self, key: NodeKey) -> Vec<Term> {
        self.base_cases += 1;
        let var = self.var(key);
        let live: Vec<(usize, u32)> = var.coords().iter().copied().enumerate().filter(|&(_, d)| d > 0).collect();
        let dims: Vec<usize> = live.iter().map(|&(_, d)| d as usize + 1).collect();
        let total: usize = dims.iter().product();
        let f = self.field;
        // values in row-major grid order, last live variable fastest
        let mut values = Vec::with_capacity(total);
        for idx in 0..total {
            let mut point = vec![0u64; self.n];
            let mut rem = idx;
            for (axis, &(i, _)) in live.iter().enumerate().rev() {
                point[i] = (rem % dims[axis]) as u64;
                rem /= dims[axis];
            }
            values.push(self.eval_key(key, &point));
        }
        // values -> coefficients, one axis at a time
        let mut stride = 1;
        for axis in (0..live.len()).rev() {
            let d = dims[axis];
            let block = stride * d;
            for start in 0..total {
                if (start / stride) % d != 0 {
                    continue;
                }
                let ys: Vec<u64> = (0..d).map(|j| values[start + j * stride]).collect();
                let cs = interpolate(f, &ys);
                for (j, c) in cs.into_iter().enumerate() {
                    values[start + j * stride] = c;
                }
            }
            stride = block;
        }
        let mut out = Vec::new();
        for (idx, &coeff) in values.iter().enumerate() {
            let mut rem = idx;
            let mut factors = Vec::new();
            let mut full = true;
            for (axis, &(i, d)) in live.iter().enumerate().rev() {
                let e = rem % dims[axis];
                rem /= dims[axis];
                full &= e == d as usize;
                factors.extend(std::iter::repeat_n(NodeKey::Var(i), e));
            }
            // the top monomial stays even with a zero coefficient so the
            // node keeps the key's full Var vector
            if coeff != 0 || full {
                factors.sort_unstable();
                out.push(Term { coeff, factors });
            }
        }
        out
    }

    /// Output gate computing `coeff · Π factors`.
    fn product(&mut self, mut coeff: u64, factors: Vec<NodeKey>) -> GateId {
        let mut live = Vec::with_capacity(factors.len());
        for k in factors {
            if !matches!(k, NodeKey::Var(_)) && self.potential(k) == 0 {
                let v = self.constant_value(k);
                coeff = self.field.mul(coeff, v);
            } else {
                live.push(k);
            }
        }
        live.sort_unstable();
        let memo = (coeff, live);
        if let Some(&g) = self.products.get(&memo) {
            return g;
        }
        let (coeff, live) = memo.clone();
        let g = self.product_uncached(coeff, live);
        self.products.insert(memo, g);
        g
    }

    fn distribute(&mut self, coeff: u64, expand: NodeKey, rest: &[NodeKey]) -> GateId {
        let terms = self.terms_of(expand);
        let parts = terms
            .iter()
            .map(|t| {
                let mut fs = t.factors.clone();
                fs.extend_from_slice(rest);
                self.product(self.field.mul(coeff, t.coeff), fs)
            })
            .collect();
        self.sum(parts)
    }

    fn product_uncached(&mut self, coeff: u64, live: Vec<NodeKey>) -> GateId {
        let one = 1 % self.field.modulus();
        match live.len() {
            0 => return self.const_gate(coeff),
            1 if coeff == one => return self.node(live[0]),
            1 => {
                return if let NodeKey::Var(i) = live[0] {
                    let c = self.const_gate(coeff);
                    let x = self.input_gate(i);
                    self.out.mul(vec![c, x])
                } else {
                    self.distribute(coeff, live[0], &[])
                };
            }
            _ => {}
        }
        let pots: Vec<u32> = live.iter().map(|&k| self.potential(k)).collect();
        let total: u32 = pots.iter().sum();
        let (heavy, &max) = pots.iter().enumerate().max_by_key(|&(i, p)| (p, std::cmp::Reverse(i))).unwrap();
        if 2 * max > total {
            let mut rest = live.clone();
            let key = rest.remove(heavy);
            return self.distribute(coeff, key, &rest);
        }
        // group the two lightest items until the fan-in fits
        let mut items: Vec<(u32, Vec<NodeKey>)> = live.iter().zip(&pots).map(|(&k, &p)| (p, vec![k])).collect();
        let budget = MAX_MUL_FANIN - usize::from(coeff != one);
        while items.len() > budget {
            items.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            let (pa, mut a) = items.remove(0);
            let (pb, b) = items.remove(0);
            a.extend(b);
            a.sort_unstable();
            items.push((pa + pb, a));
        }
        let mut children = Vec::with_capacity(items.len() + 1);
        if coeff != one {
            children.push(self.const_gate(coeff));
        }
        for (_, keys) in items {
            let g = if keys.len() == 1 { self.node(keys[0]) } else { self.product(one, keys) };
            children.push(g);
        }
        self.out.mul(children)
    }
}

/// Coefficients of the unique polynomial of degree `< ys.len()` taking the
/// value `ys[j]` at `j`.
fn interpolate(f: Field, ys: &[u64]) -> Vec<u64> {
    let d = ys.len();
    let mut coeffs = vec![0u64; d];
    for (j, &y) in ys.iter().enumerate() {
        if y == 0 {
            continue;
        }
        // basis Π_{i≠j} (x - i) / (j - i)
        let mut basis = vec![1 % f.modulus()];
        let mut denom = 1 % f.modulus();
        for i in 0..d {
            if i == j {
                continue;
            }
            let mut next = vec![0u64; basis.len() + 1];
            for (e, &b) in basis.iter().enumerate() {
                next[e + 1] = f.add(next[e + 1], b);
                next[e] = f.sub(next[e], f.mul(b, i as u64 % f.modulus()));
            }
            basis = next;
            denom = f.mul(denom, f.from_i128(j as i128 - i as i128));
        }
        let scale = f.mul(y, f.inv(denom).expect("distinct nodes below p"));
        for (c, b) in coeffs.iter_mut().zip(basis) {
            *c = f.add(*c, f.mul(b, scale));
        }
    }
    coeffs
}

/// Rebuilds a binary, right-heavy circuit so that products have fan-in at
/// most five and every product child carries at most half its parent's
/// `|Var|`. The output computes the same polynomial and is multi-k-ic for
/// the same `k`.
pub fn balance(c: &Circuit) -> Result<(Circuit, BalanceReport)> {
    let diags = crate::circuit::validate(c);
    if !diags.is_empty() {
        return Err(Error::Invalid(diags));
    }
    if let Some(id) = c.gates().iter().position(|g| !g.is_leaf() && g.children().len() != 2) {
        return Err(Error::NotNormalized(id));
    }
    let k = infer_k(c);
    if c.field().modulus() <= k as u64 {
        return Err(Error::FieldTooSmall { p: c.field().modulus(), k });
    }
    let mut ctx = Ctx::new(c);
    if let Some(id) = right_heavy_violation(c, &ctx.vars) {
        return Err(Error::NotNormalized(id));
    }
    let root = ctx.node(NodeKey::Plain(c.output()));
    let base = ctx.base_cases;
    let out = ctx.out.finish(c.name(), root);
    let mut report = check_balanced(&out);
    report.input_size = c.size();
    report.k_in = k;
    report.k_preserved = report.k_out <= k;
    report.base_case_count = base;
    Ok((out, report))
}

/// Full structural scan. A product gate `g` with `|Var(g)| >= 2` passes the
/// halving test when every child `h` has `2|Var(h)| <= |Var(g)|`; products
/// of potential at most one (a scaled variable or a constant) are exempt.
pub fn check_balanced(c: &Circuit) -> BalanceReport {
    let vars = compute_var(c);
    let mut max_mul = 0;
    let mut max_add = 0;
    let mut halving_ok = true;
    for (id, g) in c.gates().iter().enumerate() {
        match g {
            Gate::Mul(ch) => {
                max_mul = max_mul.max(ch.len());
                let p = vars[id].total();
                if p >= 2 && ch.iter().any(|&h| 2 * vars[h].total() > p) {
                    halving_ok = false;
                }
            }
            Gate::Add(ch) => max_add = max_add.max(ch.len()),
            _ => {}
        }
    }
    let k = vars.iter().map(VarVector::max_coord).max().unwrap_or(0);
    BalanceReport {
        input_size: c.size(),
        output_size: c.size(),
        k_in: k,
        k_out: k,
        max_mul_fanin: max_mul,
        max_add_fanin: max_add,
        halving_ok,
        k_preserved: true,
        base_case_count: 0,
    }
}

/// Binary fan-in, right-heaviness, then balancing.
pub fn balance_pipeline(c: &Circuit) -> Result<(Circuit, BalanceReport)> {
    let diags = crate::circuit::validate(c);
    if !diags.is_empty() {
        return Err(Error::Invalid(diags));
    }
    let (out, mut report) = balance(&crate::normalize::normalize(c))?;
    report.input_size = c.size();
    Ok((out, report))
}
