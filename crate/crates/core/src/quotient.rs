//! Gate quotients `[u:v]`, their `Var` vectors, frontier edges, and a
//! randomized checker for the frontier decomposition identities.
//!
//! The quotient follows a four-case recursion: `[v:v] = 1`; a sum gate
//! distributes over its children; a product gate keeps its left part and
//! recurses into its rightmost child only; any other leaf gives `0`. For
//! product gates of fan-in above two, "left part" means every child except
//! the last.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateId};
use crate::error::{Error, Result};
use crate::field::trial_rng;
use crate::var::{compute_var, VarVector};

/// `Var(u:v)` for every gate `u` and one fixed target `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientTable {
    target: GateId,
    var_q: Vec<Option<VarVector>>,
}

impl QuotientTable {
    pub fn target(&self) -> GateId {
        self.target
    }

    /// Whether some `v`-snipped proof-tree is rooted at `u`.
    pub fn reachable(&self, u: GateId) -> bool {
        self.var_q[u].is_some()
    }

    pub fn var(&self, u: GateId) -> Option<&VarVector> {
        self.var_q[u].as_ref()
    }

    pub fn potential(&self, u: GateId) -> Option<u32> {
        self.var_q[u].as_ref().map(VarVector::total)
    }
}

pub fn quotient_table(c: &Circuit, v: GateId) -> QuotientTable {
    quotient_table_with(c, &compute_var(c), v)
}

/// As [`quotient_table`], reusing a precomputed `Var` table.
pub fn quotient_table_with(c: &Circuit, vars: &[VarVector], v: GateId) -> QuotientTable {
    let n = c.num_vars();
    let mut var_q: Vec<Option<VarVector>> = vec![None; c.len()];
    var_q[v] = Some(VarVector::zero(n));
    for u in v + 1..c.len() {
        var_q[u] = match c.gate(u) {
            Gate::Input(_) | Gate::Const(_) => None,
            Gate::Add(ch) => {
                let mut acc: Option<VarVector> = None;
                for &x in ch {
                    if let Some(q) = &var_q[x] {
                        match &mut acc {
                            Some(a) => a.max_assign(q),
                            None => acc = Some(q.clone()),
                        }
                    }
                }
                acc
            }
            Gate::Mul(ch) => {
                let (last, left) = ch.split_last().expect("validated fan-in");
                var_q[*last].as_ref().map(|q| {
                    let mut acc = q.clone();
                    for &x in left {
                        acc.add_assign(&vars[x]);
                    }
                    acc
                })
            }
        };
    }
    QuotientTable { target: v, var_q }
}

/// Gates `w` lying on the rightmost path of some proof-tree rooted at `u`,
/// i.e. those with `[u:w]` syntactically non-zero. Includes `u`.
pub fn rightmost_descendants(c: &Circuit, u: GateId) -> Vec<bool> {
    let mut mark = vec![false; c.len()];
    mark[u] = true;
    for g in (0..=u).rev() {
        if !mark[g] {
            continue;
        }
        match c.gate(g) {
            Gate::Add(ch) => ch.iter().for_each(|&x| mark[x] = true),
            Gate::Mul(ch) => mark[*ch.last().expect("validated fan-in")] = true,
            _ => {}
        }
    }
    mark
}

/// `[u:v]` for every `u`, given the plain gate values `vals` at some point.
pub fn quotient_values(c: &Circuit, vals: &[u64], v: GateId) -> Vec<u64> {
    let f = c.field();
    let mut q = vec![0u64; c.len()];
    q[v] = 1 % f.modulus();
    for u in v + 1..c.len() {
        q[u] = match c.gate(u) {
            Gate::Input(_) | Gate::Const(_) => 0,
            Gate::Add(ch) => ch.iter().fold(0, |acc, &x| f.add(acc, q[x])),
            Gate::Mul(ch) => {
                let (last, left) = ch.split_last().expect("validated fan-in");
                left.iter().fold(q[*last], |acc, &x| f.mul(acc, vals[x]))
            }
        };
    }
    q
}

/// Value of `[u:v]` at `point`.
pub fn eval_quotient(c: &Circuit, u: GateId, v: GateId, point: &[u64]) -> u64 {
    if u < v {
        return 0;
    }
    let vals = c.evaluate_all(point);
    quotient_values(c, &vals, v)[u]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierSet {
    pub m: u32,
    pub target: Option<GateId>,
    /// Edges `(g1, g2)` with `g1` a product gate, one entry per edge
    /// occurrence, sorted.
    pub mul_edges: Vec<(GateId, GateId)>,
    pub add_edges: Vec<(GateId, GateId)>,
}

/// An edge given as parent plus child slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct EdgeSlot {
    pub parent: GateId,
    pub slot: usize,
}

/// Potential used by the frontier: `|Var(g)|`, or `|Var(g:v)|` for reachable
/// gates in target mode.
fn potential(vars: &[VarVector], table: Option<&QuotientTable>, g: GateId) -> Option<u32> {
    match table {
        None => Some(vars[g].total()),
        Some(t) => t.potential(g),
    }
}

pub(crate) fn frontier_slots(
    c: &Circuit,
    vars: &[VarVector],
    m: u32,
    table: Option<&QuotientTable>,
) -> Vec<EdgeSlot> {
    let mut out = Vec::new();
    for (g1, gate) in c.gates().iter().enumerate() {
        let Some(p1) = potential(vars, table, g1) else { continue };
        if p1 < m {
            continue;
        }
        for (slot, &g2) in gate.children().iter().enumerate() {
            if let Some(p2) = potential(vars, table, g2) {
                if p2 < m {
                    out.push(EdgeSlot { parent: g1, slot });
                }
            }
        }
    }
    out
}

/// All `m`-frontier edges, plain or with respect to `target`.
pub fn frontier_edges(c: &Circuit, m: u32, target: Option<GateId>) -> FrontierSet {
    let vars = compute_var(c);
    let table = target.map(|v| quotient_table_with(c, &vars, v));
    frontier_edges_with(c, &vars, m, table.as_ref())
}

pub fn frontier_edges_with(c: &Circuit, vars: &[VarVector], m: u32, table: Option<&QuotientTable>) -> FrontierSet {
    let mut mul_edges = Vec::new();
    let mut add_edges = Vec::new();
    for e in frontier_slots(c, vars, m, table) {
        let gate = c.gate(e.parent);
        let pair = (e.parent, gate.children()[e.slot]);
        match gate {
            Gate::Mul(_) => mul_edges.push(pair),
            _ => add_edges.push(pair),
        }
    }
    mul_edges.sort_unstable();
    add_edges.sort_unstable();
    FrontierSet { m, target: table.map(QuotientTable::target), mul_edges, add_edges }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum DecompositionVerdict {
    Holds,
    Fails { trial: u64, point: Vec<u64>, lhs: u64, rhs: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub u: GateId,
    pub v: Option<GateId>,
    pub m: u32,
    pub trials: u64,
    pub seed: u64,
    pub terms: usize,
    pub result: DecompositionVerdict,
}

impl DecompositionReport {
    pub fn holds(&self) -> bool {
        self.result == DecompositionVerdict::Holds
    }
}

/// Checks the frontier decomposition of `[u]` (no `v`) or `[u:v]` at
/// `trials` random points.
///
/// Without `v` the plain frontier `F_m` is used; it needs `m >= 2` so that
/// every rightmost path, which ends in a leaf of potential at most one,
/// crosses the threshold. With `v` the frontier is taken with respect to `v`
/// and `|Var(u:v)| >= m` is required; a `v` that is not quotient-reachable
/// from `u` makes both sides vanish. Product edges contribute only through
/// their rightmost child.
pub fn check_decomposition(
    c: &Circuit,
    u: GateId,
    v: Option<GateId>,
    m: u32,
    trials: u64,
    seed: u64,
) -> Result<DecompositionReport> {
    let vars = compute_var(c);
    if vars[u].total() < m {
        return Err(Error::PreconditionViolated(format!("|Var({u})| = {} < m = {m}", vars[u].total())));
    }
    let table = match v {
        None => {
            if m < 2 {
                return Err(Error::PreconditionViolated("plain decomposition needs m >= 2".into()));
            }
            None
        }
        Some(v) => {
            if vars[v].total() >= m {
                return Err(Error::PreconditionViolated(format!("|Var({v})| = {} >= m = {m}", vars[v].total())));
            }
            let t = quotient_table_with(c, &vars, v);
            if let Some(p) = t.potential(u) {
                if p < m {
                    return Err(Error::PreconditionViolated(format!("|Var({u}:{v})| = {p} < m = {m}")));
                }
            }
            Some(t)
        }
    };
    let reach = rightmost_descendants(c, u);
    // terms: (w, left part if product, z)
    let mut terms: Vec<(GateId, Option<&[GateId]>, GateId)> = Vec::new();
    for e in frontier_slots(c, &vars, m, table.as_ref()) {
        if !reach[e.parent] {
            continue;
        }
        match c.gate(e.parent) {
            Gate::Mul(ch) => {
                if e.slot + 1 == ch.len() {
                    terms.push((e.parent, Some(&ch[..e.slot]), ch[e.slot]));
                }
            }
            Gate::Add(ch) => terms.push((e.parent, None, ch[e.slot])),
            _ => unreachable!("leaves have no edges"),
        }
    }

    let f = c.field();
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let point = f.random_point(&mut rng, c.num_vars());
        let vals = c.evaluate_all(&point);
        let toward_v = v.map(|v| quotient_values(c, &vals, v));
        let lhs = match &toward_v {
            None => vals[u],
            Some(q) => q[u],
        };
        let mut toward_w: HashMap<GateId, Vec<u64>> = HashMap::new();
        let mut rhs = 0;
        for &(w, left, z) in &terms {
            let q_uw = toward_w.entry(w).or_insert_with(|| quotient_values(c, &vals, w))[u];
            let tail = match &toward_v {
                None => vals[z],
                Some(q) => q[z],
            };
            let mut term = f.mul(q_uw, tail);
            if let Some(left) = left {
                term = left.iter().fold(term, |acc, &x| f.mul(acc, vals[x]));
            }
            rhs = f.add(rhs, term);
        }
        if lhs != rhs {
            return Ok(DecompositionReport {
                u,
                v,
                m,
                trials,
                seed,
                terms: terms.len(),
                result: DecompositionVerdict::Fails { trial, point, lhs, rhs },
            });
        }
    }
    Ok(DecompositionReport { u, v, m, trials, seed, terms: terms.len(), result: DecompositionVerdict::Holds })
}
