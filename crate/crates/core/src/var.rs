//! The `Var` analysis: for each gate, the per-variable maximum degree over
//! all proof-trees rooted there. It is the potential function used by every
//! later pass; `|Var(u)|` is the coordinate sum.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateId};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarVector(Vec<u32>);

impl VarVector {
    pub fn zero(n: usize) -> Self {
        VarVector(vec![0; n])
    }

    pub fn unit(n: usize, var: usize) -> Self {
        let mut v = vec![0; n];
        v[var] = 1;
        VarVector(v)
    }

    pub fn from_vec(v: Vec<u32>) -> Self {
        VarVector(v)
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|Var|`, the sum of coordinates.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn max_coord(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Number of variables with non-zero degree.
    pub fn support(&self) -> usize {
        self.0.iter().filter(|&&d| d > 0).count()
    }

    pub fn add_assign(&mut self, other: &VarVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn max_assign(&mut self, other: &VarVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = (*a).max(*b);
        }
    }

    pub fn sum(&self, other: &VarVector) -> VarVector {
        let mut v = self.clone();
        v.add_assign(other);
        v
    }

    /// Coordinate-wise `self ⪯ other`.
    pub fn le(&self, other: &VarVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `Π (1 + d_i)`, the bound on the number of monomials.
    pub fn monomial_bound(&self) -> u128 {
        self.0.iter().fold(1u128, |acc, &d| acc.saturating_mul(1 + d as u128))
    }
}

impl fmt::Display for VarVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// One topological sweep: unit vectors at inputs, zero at constants, sums at
/// products and coordinate-wise maxima at sums.
pub fn compute_var(c: &Circuit) -> Vec<VarVector> {
    let n = c.num_vars();
    let mut table: Vec<VarVector> = Vec::with_capacity(c.len());
    for g in c.gates() {
        let v = match g {
            Gate::Input(i) => VarVector::unit(n, *i),
            Gate::Const(_) => VarVector::zero(n),
            Gate::Add(ch) => {
                let mut v = VarVector::zero(n);
                for &x in ch {
                    v.max_assign(&table[x]);
                }
                v
            }
            Gate::Mul(ch) => {
                let mut v = VarVector::zero(n);
                for &x in ch {
                    v.add_assign(&table[x]);
                }
                v
            }
        };
        table.push(v);
    }
    table
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiKIc {
    pub k: u32,
    pub holds: bool,
    pub violations: Vec<GateId>,
}

/// Syntactic multi-k-ic check; `k = 1` is syntactic multilinearity.
pub fn check_multi_k_ic(c: &Circuit, k: u32) -> MultiKIc {
    let violations: Vec<GateId> = compute_var(c)
        .iter()
        .enumerate()
        .filter(|(_, v)| v.max_coord() > k)
        .map(|(id, _)| id)
        .collect();
    MultiKIc { k, holds: violations.is_empty(), violations }
}

/// Smallest `k` for which the circuit is multi-k-ic.
pub fn infer_k(c: &Circuit) -> u32 {
    compute_var(c).iter().map(VarVector::max_coord).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Builder;
    use crate::field::Field;

    #[test]
    fn product_plus_variable() {
        // x1*x2 + x1
        let mut b = Builder::new(2, Field::default());
        let x1 = b.input(0);
        let x2 = b.input(1);
        let m = b.mul(vec![x1, x2]);
        let a = b.add(vec![m, x1]);
        let c = b.finish("c", a);
        let t = compute_var(&c);
        assert_eq!(t[a].coords(), &[1, 1]);
        assert_eq!(t[a].total(), 2);
        let r = check_multi_k_ic(&c, 1);
        assert!(r.holds && r.violations.is_empty());
    }

    #[test]
    fn square() {
        let mut b = Builder::new(1, Field::default());
        let x = b.input(0);
        let sq = b.mul(vec![x, x]);
        let c = b.finish("sq", sq);
        assert_eq!(compute_var(&c)[sq].coords(), &[2]);
        assert_eq!(check_multi_k_ic(&c, 1), MultiKIc { k: 1, holds: false, violations: vec![sq] });
        assert!(check_multi_k_ic(&c, 2).holds);
        assert_eq!(infer_k(&c), 2);
    }

    #[test]
    fn product_of_sums() {
        let mut b = Builder::new(4, Field::default());
        let xs: Vec<_> = (0..4).map(|i| b.input(i)).collect();
        let a1 = b.add(vec![xs[0], xs[1]]);
        let a2 = b.add(vec![xs[2], xs[3]]);
        let r = b.mul(vec![a1, a2]);
        let c = b.finish("pos", r);
        let t = compute_var(&c);
        assert_eq!(t[r].coords(), &[1, 1, 1, 1]);
        assert_eq!(t[a1].total(), 2);
        assert_eq!(t[a2].total(), 2);
        assert_eq!(t[r].monomial_bound(), 16);
    }
}
