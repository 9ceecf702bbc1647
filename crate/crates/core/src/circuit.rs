//! The circuit IR: an immutable DAG of input, constant, addition and
//! multiplication gates over a prime field, with a designated output.
//!
//! Gates are numbered densely and topologically: every child id is strictly
//! smaller than its parent's id. [`validate`] reports every violation of that
//! contract; all other passes assume it holds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;

pub type GateId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    /// Variable `x_{i+1}`; indices are zero-based internally.
    Input(usize),
    Const(u64),
    Add(Vec<GateId>),
    Mul(Vec<GateId>),
}

impl Gate {
    pub fn children(&self) -> &[GateId] {
        match self {
            Gate::Add(c) | Gate::Mul(c) => c,
            _ => &[],
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Gate::Input(_) | Gate::Const(_))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Gate::Input(_) => "input",
            Gate::Const(_) => "const",
            Gate::Add(_) => "add",
            Gate::Mul(_) => "mul",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Diagnostic {
    UnknownChild { gate: GateId, child: GateId },
    ChildNotSmaller { gate: GateId, child: GateId },
    EmptyFanIn { gate: GateId },
    VarOutOfRange { gate: GateId, var: usize },
    NonCanonicalConst { gate: GateId, value: u64 },
    UnknownOutput { output: GateId },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnknownChild { gate, child } => {
                write!(f, "gate {gate}: child {child} does not exist")
            }
            Diagnostic::ChildNotSmaller { gate, child } => {
                write!(f, "gate {gate}: child {child} is not numbered below its parent")
            }
            Diagnostic::EmptyFanIn { gate } => write!(f, "gate {gate}: add/mul with no children"),
            Diagnostic::VarOutOfRange { gate, var } => {
                write!(f, "gate {gate}: variable x{} is out of range", var + 1)
            }
            Diagnostic::NonCanonicalConst { gate, value } => {
                write!(f, "gate {gate}: constant {value} is not reduced")
            }
            Diagnostic::UnknownOutput { output } => write!(f, "output gate {output} does not exist"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    name: String,
    n: usize,
    gates: Vec<Gate>,
    output: GateId,
    field: Field,
}

impl Circuit {
    /// Builds a circuit and rejects it if [`validate`] reports anything.
    pub fn new(name: impl Into<String>, n: usize, gates: Vec<Gate>, output: GateId, field: Field) -> Result<Self> {
        let c = Self::new_unchecked(name, n, gates, output, field);
        let diags = validate(&c);
        if diags.is_empty() {
            Ok(c)
        } else {
            Err(Error::Invalid(diags))
        }
    }

    /// Builds a circuit without checking any invariant. Only [`validate`] is
    /// meaningful on the result until it comes back empty.
    pub fn new_unchecked(name: impl Into<String>, n: usize, gates: Vec<Gate>, output: GateId, field: Field) -> Self {
        Circuit { name: name.into(), n, gates, output, field }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id]
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn output(&self) -> GateId {
        self.output
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Number of edges, i.e. the sum of all fan-ins.
    pub fn size(&self) -> usize {
        self.gates.iter().map(|g| g.children().len()).sum()
    }

    pub fn is_binary(&self) -> bool {
        self.gates.iter().all(|g| g.is_leaf() || g.children().len() == 2)
    }

    /// The same gates re-rooted at `root`.
    pub fn rooted_at(&self, root: GateId) -> Circuit {
        Circuit { output: root, ..self.clone() }
    }

    /// Values of every gate at `point`.
    pub fn evaluate_all(&self, point: &[u64]) -> Vec<u64> {
        let f = self.field;
        let mut vals = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let v = match g {
                Gate::Input(i) => point[*i],
                Gate::Const(c) => *c,
                Gate::Add(ch) => ch.iter().fold(0, |acc, &c| f.add(acc, vals[c])),
                Gate::Mul(ch) => ch.iter().fold(1 % f.modulus(), |acc, &c| f.mul(acc, vals[c])),
            };
            vals.push(v);
        }
        vals
    }

    pub fn evaluate(&self, point: &[u64]) -> u64 {
        self.evaluate_all(point)[self.output]
    }

    /// Marks gates reachable from `root` (inclusive).
    pub fn cone(&self, root: GateId) -> Vec<bool> {
        let mut live = vec![false; self.gates.len()];
        live[root] = true;
        for id in (0..=root).rev() {
            if live[id] {
                for &c in self.gates[id].children() {
                    live[c] = true;
                }
            }
        }
        live
    }
}

/// Checks every structural invariant; one diagnostic per violation.
pub fn validate(c: &Circuit) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (id, g) in c.gates.iter().enumerate() {
        match g {
            Gate::Input(i) if *i >= c.n => out.push(Diagnostic::VarOutOfRange { gate: id, var: *i }),
            Gate::Const(v) if *v >= c.field.modulus() => {
                out.push(Diagnostic::NonCanonicalConst { gate: id, value: *v })
            }
            Gate::Add(ch) | Gate::Mul(ch) => {
                if ch.is_empty() {
                    out.push(Diagnostic::EmptyFanIn { gate: id });
                }
                for &child in ch {
                    if child >= c.gates.len() {
                        out.push(Diagnostic::UnknownChild { gate: id, child });
                    } else if child >= id {
                        out.push(Diagnostic::ChildNotSmaller { gate: id, child });
                    }
                }
            }
            _ => {}
        }
    }
    if c.output >= c.gates.len() {
        out.push(Diagnostic::UnknownOutput { output: c.output });
    }
    out
}

/// Appends gates in topological order.
#[derive(Debug, Clone)]
pub struct Builder {
    n: usize,
    field: Field,
    gates: Vec<Gate>,
}

impl Builder {
    pub fn new(n: usize, field: Field) -> Self {
        Builder { n, field, gates: Vec::new() }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id]
    }

    pub fn push(&mut self, g: Gate) -> GateId {
        debug_assert!(g.children().iter().all(|&c| c < self.gates.len()));
        self.gates.push(g);
        self.gates.len() - 1
    }

    pub fn input(&mut self, var: usize) -> GateId {
        self.push(Gate::Input(var))
    }

    pub fn constant(&mut self, v: u64) -> GateId {
        let v = self.field.reduce(v);
        self.push(Gate::Const(v))
    }

    pub fn add(&mut self, children: Vec<GateId>) -> GateId {
        self.push(Gate::Add(children))
    }

    pub fn mul(&mut self, children: Vec<GateId>) -> GateId {
        self.push(Gate::Mul(children))
    }

    pub fn finish(self, name: impl Into<String>, output: GateId) -> Circuit {
        Circuit::new_unchecked(name, self.n, self.gates, output, self.field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> Field {
        Field::default()
    }

    #[test]
    fn minimal_circuit_is_valid() {
        let c = Circuit::new_unchecked("x", 1, vec![Gate::Input(0)], 0, field());
        assert!(validate(&c).is_empty());
    }

    #[test]
    fn unknown_child() {
        let c = Circuit::new_unchecked("bad", 1, vec![Gate::Input(0), Gate::Add(vec![2])], 1, field());
        assert_eq!(validate(&c), vec![Diagnostic::UnknownChild { gate: 1, child: 2 }]);
    }

    #[test]
    fn self_loop() {
        let c = Circuit::new_unchecked("bad", 1, vec![Gate::Input(0), Gate::Add(vec![1])], 1, field());
        assert_eq!(validate(&c), vec![Diagnostic::ChildNotSmaller { gate: 1, child: 1 }]);
    }

    #[test]
    fn other_violations() {
        let gates = vec![Gate::Input(3), Gate::Const(u64::MAX >> 1), Gate::Mul(vec![])];
        let c = Circuit::new_unchecked("bad", 2, gates, 7, field());
        let d = validate(&c);
        assert_eq!(d.len(), 4);
        assert!(matches!(Circuit::new("bad", 2, vec![Gate::Mul(vec![])], 0, field()), Err(Error::Invalid(_))));
    }

    #[test]
    fn evaluation_and_size() {
        let mut b = Builder::new(2, field());
        let x1 = b.input(0);
        let x2 = b.input(1);
        let m = b.mul(vec![x1, x2]);
        let a = b.add(vec![m, x1]);
        let c = b.finish("c", a);
        assert_eq!(c.size(), 4);
        assert_eq!(c.evaluate(&[3, 5]), 18);
        assert!(c.is_binary());
        assert_eq!(c.cone(m), vec![true, true, true, false]);
    }
}
