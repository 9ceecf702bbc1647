//! Sparse multivariate polynomials over `F_p`: a map from exponent vectors
//! to non-zero coefficients.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::var::VarVector;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePolynomial {
    n: usize,
    field: Field,
    terms: BTreeMap<Vec<u32>, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exponents: Vec<u32>,
    pub coeff: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub monomials: Vec<TermJson>,
}

impl SparsePolynomial {
    pub fn zero(n: usize, field: Field) -> Self {
        SparsePolynomial { n, field, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, field: Field, c: u64) -> Self {
        let mut p = Self::zero(n, field);
        p.add_term(vec![0; n], c);
        p
    }

    pub fn variable(n: usize, field: Field, var: usize) -> Self {
        let mut e = vec![0; n];
        e[var] = 1;
        let mut p = Self::zero(n, field);
        p.add_term(e, 1);
        p
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], u64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn coeff(&self, exps: &[u32]) -> u64 {
        self.terms.get(exps).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: u64) {
        debug_assert_eq!(exps.len(), self.n);
        let c = self.field.reduce(c);
        if c == 0 {
            return;
        }
        let f = self.field;
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = f.add(*e.get(), c);
                if s == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: u64) -> Self {
        let mut out = Self::zero(self.n, self.field);
        for (e, &v) in &self.terms {
            out.add_term(e.clone(), self.field.mul(v, c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let f = self.field;
        let mut acc: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let v = f.mul(ca, cb);
                let slot = acc.entry(e).or_insert(0);
                *slot = f.add(*slot, v);
            }
        }
        acc.retain(|_, c| *c != 0);
        SparsePolynomial { n: self.n, field: f, terms: acc }
    }

    pub fn eval(&self, point: &[u64]) -> u64 {
        let f = self.field;
        self.terms.iter().fold(0, |acc, (e, &c)| {
            let m = e
                .iter()
                .enumerate()
                .filter(|(_, &d)| d > 0)
                .fold(c, |m, (i, &d)| f.mul(m, f.pow(point[i], d as u64)));
            f.add(acc, m)
        })
    }

    /// Semantic total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&d| d <= 1))
    }

    /// Per-variable maximum exponent over the support.
    pub fn degree_vector(&self) -> VarVector {
        let mut v = vec![0; self.n];
        for e in self.terms.keys() {
            for (a, &b) in v.iter_mut().zip(e) {
                *a = (*a).max(b);
            }
        }
        VarVector::from_vec(v)
    }

    /// One term per line: `<coeff> * x1^e1 ... xn^en`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (e, c) in &self.terms {
            write!(s, "{c} *").unwrap();
            for (i, d) in e.iter().enumerate() {
                write!(s, " x{}^{d}", i + 1).unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> PolynomialJson {
        PolynomialJson {
            monomials: self.terms.iter().map(|(e, &c)| TermJson { exponents: e.clone(), coeff: c }).collect(),
        }
    }
}
