//! Normalization passes assumed by the quotient machinery: binary fan-in and
//! right-heaviness (`|Var(w_R)| >= |Var(w_L)|` at every product).

use crate::circuit::{Builder, Circuit, Gate, GateId};
use crate::error::{Error, Result};
use crate::var::{compute_var, VarVector};

/// Contracts fan-in-1 gates and splits wider gates left-associatively.
pub fn normalize_fanin2(c: &Circuit) -> Circuit {
    let mut b = Builder::new(c.num_vars(), c.field());
    let mut map: Vec<GateId> = Vec::with_capacity(c.len());
    for g in c.gates() {
        let id = match g {
            Gate::Input(i) => b.input(*i),
            Gate::Const(v) => b.constant(*v),
            Gate::Add(ch) | Gate::Mul(ch) => {
                let mut acc = map[ch[0]];
                for &next in &ch[1..] {
                    let pair = vec![acc, map[next]];
                    acc = if matches!(g, Gate::Add(_)) { b.add(pair) } else { b.mul(pair) };
                }
                acc
            }
        };
        map.push(id);
    }
    b.finish(c.name(), map[c.output()])
}

/// First product gate whose left child outweighs its right child.
pub fn right_heavy_violation(c: &Circuit, vars: &[VarVector]) -> Option<GateId> {
    c.gates().iter().enumerate().find_map(|(id, g)| match g {
        Gate::Mul(ch) if ch.len() == 2 && vars[ch[0]].total() > vars[ch[1]].total() => Some(id),
        _ => None,
    })
}

/// Swaps product children so the heavier one is on the right; ties keep
/// the original order.
pub fn make_right_heavy(c: &Circuit) -> Result<Circuit> {
    if let Some(id) = c.gates().iter().position(|g| !g.is_leaf() && g.children().len() != 2) {
        return Err(Error::NotNormalized(id));
    }
    let vars = compute_var(c);
    let gates = c
        .gates()
        .iter()
        .map(|g| match g {
            Gate::Mul(ch) if vars[ch[0]].total() > vars[ch[1]].total() => Gate::Mul(vec![ch[1], ch[0]]),
            other => other.clone(),
        })
        .collect();
    Ok(Circuit::new_unchecked(c.name(), c.num_vars(), gates, c.output(), c.field()))
}

/// Both passes in order.
pub fn normalize(c: &Circuit) -> Circuit {
    make_right_heavy(&normalize_fanin2(c)).expect("fan-in normalization yields binary gates")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn inputs(b: &mut Builder, n: usize) -> Vec<GateId> {
        (0..n).map(|i| b.input(i)).collect()
    }

    #[test]
    fn splits_left_associatively() {
        let mut b = Builder::new(3, Field::default());
        let x = inputs(&mut b, 3);
        let a = b.add(x.clone());
        let c = normalize_fanin2(&b.finish("c", a));
        assert_eq!(c.gate(3), &Gate::Add(vec![0, 1]));
        assert_eq!(c.gate(4), &Gate::Add(vec![3, 2]));
        assert_eq!(c.output(), 4);
    }

    #[test]
    fn binary_is_fixed_point() {
        let mut b = Builder::new(2, Field::default());
        let x = inputs(&mut b, 2);
        let m = b.mul(vec![x[0], x[1]]);
        let a = b.add(vec![m, x[0]]);
        let c = b.finish("c", a);
        assert_eq!(normalize_fanin2(&c), c);
    }

    #[test]
    fn contracts_unary_gates() {
        let mut b = Builder::new(2, Field::default());
        let x = inputs(&mut b, 2);
        let u = b.add(vec![x[0]]);
        let m = b.mul(vec![u, x[1]]);
        let c = normalize_fanin2(&b.finish("c", m));
        assert_eq!(c.gate(c.output()), &Gate::Mul(vec![0, 1]));
        assert!(c.is_binary());
    }

    #[test]
    fn swaps_heavier_left_child() {
        let mut b = Builder::new(4, Field::default());
        let x = inputs(&mut b, 4);
        let m1 = b.mul(vec![x[0], x[1]]);
        let m2 = b.mul(vec![m1, x[2]]);
        let heavy = b.mul(vec![m2, x[3]]);
        let c = make_right_heavy(&b.finish("c", heavy)).unwrap();
        assert_eq!(c.gate(heavy), &Gate::Mul(vec![x[3], m2]));
        assert_eq!(c.gate(m2), &Gate::Mul(vec![x[2], m1]));
        // tie keeps order
        assert_eq!(c.gate(m1), &Gate::Mul(vec![x[0], x[1]]));
        assert_eq!(right_heavy_violation(&c, &compute_var(&c)), None);
    }

    #[test]
    fn rejects_wide_gates() {
        let mut b = Builder::new(3, Field::default());
        let x = inputs(&mut b, 3);
        let m = b.mul(x);
        assert!(matches!(make_right_heavy(&b.finish("c", m)), Err(Error::NotNormalized(3))));
    }
}
