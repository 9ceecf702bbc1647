//! Test-input families.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Builder, Circuit, GateId};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::var::VarVector;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `Π_{i=1}^{blocks} Σ_{j=1}^{width} x_{(i-1)·width + j}`.
    ProductOfSums { blocks: usize, width: usize },
    /// Random syntactically multilinear circuit with `gates` gates.
    RandomMultilinear { gates: usize },
    /// Random circuit with every `Var` coordinate at most `k`.
    RandomMultiKIc { gates: usize, k: u32 },
    /// `Π_i (1 + x_i)`, all `2^n` multilinear monomials.
    FullMultilinear,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn product_of_sums(blocks: usize, width: usize) -> Self {
        GeneratorSpec { family: Family::ProductOfSums { blocks, width }, n: blocks * width, seed: 0 }
    }

    pub fn random_multilinear(gates: usize, n: usize, seed: u64) -> Self {
        GeneratorSpec { family: Family::RandomMultilinear { gates }, n, seed }
    }

    pub fn random_multi_k_ic(gates: usize, k: u32, n: usize, seed: u64) -> Self {
        GeneratorSpec { family: Family::RandomMultiKIc { gates, k }, n, seed }
    }

    pub fn full_multilinear(n: usize) -> Self {
        GeneratorSpec { family: Family::FullMultilinear, n, seed: 0 }
    }

    pub fn name(&self) -> String {
        match &self.family {
            Family::ProductOfSums { blocks, width } => format!("pos_{blocks}x{width}"),
            Family::RandomMultilinear { gates } => format!("ml_n{}_g{gates}_s{}", self.n, self.seed),
            Family::RandomMultiKIc { gates, k } => format!("mk{k}_n{}_g{gates}_s{}", self.n, self.seed),
            Family::FullMultilinear => format!("full_n{}", self.n),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

/// Deterministic in the whole spec, seed included.
///
/// ```
/// use mlcirc::generate::{generate, GeneratorSpec};
/// use mlcirc::field::Field;
/// let c = generate(&GeneratorSpec::product_of_sums(4, 2), Field::default()).unwrap();
/// assert_eq!(c.num_vars(), 8);
/// ```
pub fn generate(spec: &GeneratorSpec, field: Field) -> Result<Circuit> {
    if spec.n == 0 {
        return Err(invalid("n must be positive"));
    }
    match spec.family {
        Family::ProductOfSums { blocks, width } => {
            if blocks == 0 || width == 0 {
                return Err(invalid("blocks and width must be positive"));
            }
            if spec.n != blocks * width {
                return Err(invalid(format!("product_of_sums({blocks}, {width}) has n = {}", blocks * width)));
            }
            Ok(product_of_sums(blocks, width, field))
        }
        Family::RandomMultilinear { gates } => random_circuit(gates, 1, spec.n, spec.seed, field, spec.name()),
        Family::RandomMultiKIc { gates, k } => {
            if k == 0 {
                return Err(invalid("k must be positive"));
            }
            random_circuit(gates, k, spec.n, spec.seed, field, spec.name())
        }
        Family::FullMultilinear => Ok(full_multilinear(spec.n, field)),
    }
}

fn product_of_sums(blocks: usize, width: usize, field: Field) -> Circuit {
    let mut b = Builder::new(blocks * width, field);
    let x: Vec<_> = (0..blocks * width).map(|i| b.input(i)).collect();
    let sums: Vec<_> = x.chunks(width).map(|c| if c.len() == 1 { c[0] } else { b.add(c.to_vec()) }).collect();
    let out = if sums.len() == 1 { sums[0] } else { b.mul(sums) };
    b.finish(format!("pos_{blocks}x{width}"), out)
}

fn full_multilinear(n: usize, field: Field) -> Circuit {
    let mut b = Builder::new(n, field);
    let one = b.constant(1);
    let factors: Vec<_> = (0..n)
        .map(|i| {
            let x = b.input(i);
            b.add(vec![one, x])
        })
        .collect();
    let out = if n == 1 { factors[0] } else { b.mul(factors) };
    b.finish(format!("full_n{n}"), out)
}

struct Gen {
    b: Builder,
    vars: Vec<VarVector>,
    used: Vec<bool>,
    rng: ChaCha8Rng,
    k: u32,
}

impl Gen {
    fn push_var(&mut self, id: GateId, v: VarVector) {
        debug_assert_eq!(id, self.vars.len());
        self.vars.push(v);
        self.used.push(false);
    }

    /// Operand choice biased toward recent gates, so circuits get deep.
    fn pick(&mut self) -> GateId {
        let len = self.vars.len();
        if self.rng.gen_bool(0.5) {
            self.rng.gen_range(0..len)
        } else {
            len - 1 - self.rng.gen_range(0..len.min(8))
        }
    }

    fn fits(&self, acc: &VarVector, g: GateId) -> bool {
        acc.coords().iter().zip(self.vars[g].coords()).all(|(a, b)| a + b <= self.k)
    }

    fn constant(&mut self) -> GateId {
        let v = self.rng.gen_range(2..1000u64);
        let id = self.b.constant(v);
        let n = self.vars[0].len();
        self.push_var(id, VarVector::zero(n));
        id
    }

    fn add(&mut self, ch: Vec<GateId>) -> GateId {
        let mut v = VarVector::zero(self.vars[0].len());
        for &c in &ch {
            v.max_assign(&self.vars[c]);
            self.used[c] = true;
        }
        let id = self.b.add(ch);
        self.push_var(id, v);
        id
    }

    fn mul(&mut self, ch: Vec<GateId>) -> GateId {
        let mut v = VarVector::zero(self.vars[0].len());
        for &c in &ch {
            v.add_assign(&self.vars[c]);
            self.used[c] = true;
        }
        let id = self.b.mul(ch);
        self.push_var(id, v);
        id
    }

    /// Operands whose summed `Var` stays within `k`, up to `arity` of them.
    fn mul_operands(&mut self, arity: usize) -> Vec<GateId> {
        let first = self.pick();
        let mut acc = self.vars[first].clone();
        let mut ops = vec![first];
        for _ in 0..40 {
            if ops.len() == arity {
                break;
            }
            let cand = self.pick();
            if self.fits(&acc, cand) && !self.vars[cand].coords().iter().all(|&d| d == 0) {
                acc.add_assign(&self.vars[cand]);
                ops.push(cand);
            }
        }
        ops
    }
}

fn random_circuit(gates: usize, k: u32, n: usize, seed: u64, field: Field, name: String) -> Result<Circuit> {
    if gates < n + 2 {
        return Err(invalid(format!("need at least n + 2 = {} gates, got {gates}", n + 2)));
    }
    let mut g = Gen { b: Builder::new(n, field), vars: Vec::new(), used: Vec::new(), rng: ChaCha8Rng::seed_from_u64(seed), k };
    for i in 0..n {
        let id = g.b.input(i);
        g.push_var(id, VarVector::unit(n, i));
    }
    // the last slot is kept for the sum of dangling gates
    while g.vars.len() + 1 < gates {
        let room = gates - 1 - g.vars.len();
        let with_const = room >= 2 && g.rng.gen_bool(0.1);
        if g.rng.gen_bool(0.5) {
            let arity = if g.rng.gen_bool(0.15) { 3 } else { 2 };
            let mut ops = g.mul_operands(arity);
            if with_const {
                ops.push(g.constant());
            }
            if ops.len() < 2 {
                continue;
            }
            ops.shuffle(&mut g.rng);
            g.mul(ops);
        } else {
            let arity = if g.rng.gen_bool(0.15) { 3 } else { 2 };
            let mut ops: Vec<GateId> = (0..arity).map(|_| g.pick()).collect();
            if with_const {
                ops.push(g.constant());
            }
            g.add(ops);
        }
    }
    let dangling: Vec<GateId> = (n..g.vars.len()).filter(|&i| !g.used[i]).collect();
    let out = match dangling.len() {
        0 => g.add(vec![0, n - 1]),
        1 => dangling[0],
        _ => g.add(dangling),
    };
    Ok(g.b.finish(name, out))
}

/// The acceptance corpus: `n = 4 + seed mod 9`, `gates = 12 + 9 (seed mod 10)`.
pub fn corpus_spec(seed: u64) -> GeneratorSpec {
    GeneratorSpec::random_multilinear(12 + 9 * (seed % 10) as usize, 4 + (seed % 9) as usize, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::validate;
    use crate::text::serialize;
    use crate::var::check_multi_k_ic;

    #[test]
    fn product_of_sums_shape() {
        let c = generate(&GeneratorSpec::product_of_sums(4, 2), Field::default()).unwrap();
        assert_eq!(c.num_vars(), 8);
        assert!(check_multi_k_ic(&c, 1).holds);
        assert_eq!(c.size(), 12);
    }

    #[test]
    fn random_is_deterministic_and_valid() {
        let spec = GeneratorSpec::random_multilinear(50, 6, 7);
        let a = generate(&spec, Field::default()).unwrap();
        let b = generate(&spec, Field::default()).unwrap();
        assert_eq!(serialize(&a), serialize(&b));
        assert!(validate(&a).is_empty());
        assert!(check_multi_k_ic(&a, 1).holds);
        assert!(a.len() <= 50);
    }

    #[test]
    fn multi_k_ic_family() {
        let c = generate(&GeneratorSpec::random_multi_k_ic(50, 2, 5, 3), Field::default()).unwrap();
        assert!(check_multi_k_ic(&c, 2).holds);
    }

    #[test]
    fn every_non_input_gate_is_live() {
        for seed in 0..20 {
            let c = generate(&corpus_spec(seed), Field::default()).unwrap();
            let cone = c.cone(c.output());
            for (id, gate) in c.gates().iter().enumerate() {
                if !matches!(gate, crate::circuit::Gate::Input(_)) {
                    assert!(cone[id], "seed {seed} gate {id}");
                }
            }
        }
    }

    #[test]
    fn bad_specs() {
        let f = Field::default();
        assert!(matches!(generate(&GeneratorSpec::product_of_sums(0, 2), f), Err(Error::InvalidSpec(_))));
        assert!(matches!(generate(&GeneratorSpec::random_multilinear(5, 6, 0), f), Err(Error::InvalidSpec(_))));
        assert!(matches!(generate(&GeneratorSpec::random_multi_k_ic(50, 0, 4, 0), f), Err(Error::InvalidSpec(_))));
        let mut spec = GeneratorSpec::product_of_sums(2, 2);
        spec.n = 5;
        assert!(matches!(generate(&spec, f), Err(Error::InvalidSpec(_))));
    }
}
