use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::contract::{pair_cost, PairContraction};
use crate::error::{Error, Result};
use crate::netcon::spec::NetworkSpec;

/// A contraction order without costs, serialized as nested 2-arrays of ids,
/// e.g. `["A", ["B", "C"]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Nested {
    Leaf(String),
    Pair(Box<Nested>, Box<Nested>),
}

impl Nested {
    pub fn leaf(id: impl Into<String>) -> Self {
        Nested::Leaf(id.into())
    }

    pub fn pair(left: Nested, right: Nested) -> Self {
        Nested::Pair(Box::new(left), Box::new(right))
    }
}

/// Binary tree fixing a pairwise contraction sequence. Every merge carries
/// its exact multiplication count and the labels it contracts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractionTree {
    Leaf(String),
    Merge {
        left: Box<ContractionTree>,
        right: Box<ContractionTree>,
        cost: u64,
        contracted: Vec<i64>,
    },
}

/// Open legs `(label, dim)` of a subtree, in contraction output order.
pub(crate) type Legs = Vec<(i64, usize)>;

impl ContractionTree {
    /// Resolves a nested order against `spec`, computing every step cost.
    pub fn annotate(spec: &NetworkSpec, nested: &Nested) -> Result<Self> {
        let tree = Self::annotate_inner(spec, nested)?.0;
        tree.check_covers(spec)?;
        Ok(tree)
    }

    fn annotate_inner(spec: &NetworkSpec, nested: &Nested) -> Result<(Self, Legs)> {
        match nested {
            Nested::Leaf(id) => {
                let slot = spec
                    .slot(id)
                    .ok_or_else(|| Error::validation(format!("sequence names unknown tensor {id:?}")))?;
                Ok((ContractionTree::Leaf(id.clone()), slot.untraced_labels()))
            }
            Nested::Pair(l, r) => {
                let (left, lleg) = Self::annotate_inner(spec, l)?;
                let (right, rleg) = Self::annotate_inner(spec, r)?;
                let (pc, contracted, legs) = merge_legs(&lleg, &rleg);
                let da: Vec<usize> = lleg.iter().map(|&(_, d)| d).collect();
                let db: Vec<usize> = rleg.iter().map(|&(_, d)| d).collect();
                let cost = pair_cost(&da, &db, &pc)?;
                Ok((
                    ContractionTree::Merge { left: Box::new(left), right: Box::new(right), cost, contracted },
                    legs,
                ))
            }
        }
    }

    /// Errors unless the leaves are exactly the spec's ids, each once.
    pub fn check_covers(&self, spec: &NetworkSpec) -> Result<()> {
        let mut leaves: Vec<&str> = self.leaves();
        leaves.sort_unstable();
        let mut ids = spec.ids();
        ids.sort_unstable();
        if leaves != ids {
            return Err(Error::validation(format!(
                "sequence leaves {leaves:?} do not match network tensors {ids:?}"
            )));
        }
        Ok(())
    }

    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ContractionTree::Leaf(id) => out.push(id),
            ContractionTree::Merge { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    /// Step costs in evaluation (post-) order.
    pub fn step_costs(&self) -> Vec<u64> {
        let mut out = Vec::new();
        self.collect_costs(&mut out);
        out
    }

    fn collect_costs(&self, out: &mut Vec<u64>) {
        if let ContractionTree::Merge { left, right, cost, .. } = self {
            left.collect_costs(out);
            right.collect_costs(out);
            out.push(*cost);
        }
    }

    /// Sum of all step costs; saturates at `u64::MAX`.
    pub fn total_cost(&self) -> u64 {
        self.step_costs().into_iter().fold(0u64, |a, c| a.saturating_add(c))
    }

    pub fn to_nested(&self) -> Nested {
        match self {
            ContractionTree::Leaf(id) => Nested::Leaf(id.clone()),
            ContractionTree::Merge { left, right, .. } => Nested::pair(left.to_nested(), right.to_nested()),
        }
    }
}

impl fmt::Display for ContractionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let json = serde_json::to_string(&self.to_nested()).map_err(|_| fmt::Error)?;
        f.write_str(&json)
    }
}

/// Contraction of two leg lists over their common labels. Returns the pair
/// axes, the contracted labels, and the resulting legs (left free then right
/// free).
pub(crate) fn merge_legs(left: &Legs, right: &Legs) -> (PairContraction, Vec<i64>, Legs) {
    let right_labels: BTreeSet<i64> = right.iter().map(|&(l, _)| l).collect();
    let mut pc = PairContraction::default();
    let mut contracted = Vec::new();
    for (i, &(l, _)) in left.iter().enumerate() {
        if l > 0 && right_labels.contains(&l) {
            let j = right.iter().position(|&(m, _)| m == l).expect("label present");
            pc.a_axes.push(i);
            pc.b_axes.push(j);
            contracted.push(l);
        }
    }
    let legs = left
        .iter()
        .chain(right.iter())
        .filter(|(l, _)| !contracted.contains(l))
        .copied()
        .collect();
    (pc, contracted, legs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcon::spec::TensorSlot;

    fn mmv(chi: usize) -> NetworkSpec {
        NetworkSpec::new(vec![
            TensorSlot::new("A", vec![chi, chi], vec![-1, 1]),
            TensorSlot::new("B", vec![chi, chi], vec![1, 2]),
            TensorSlot::new("C", vec![chi], vec![2]),
        ])
    }

    #[test]
    fn costs_of_both_orders() {
        let spec = mmv(10);
        let right = Nested::pair(Nested::leaf("A"), Nested::pair(Nested::leaf("B"), Nested::leaf("C")));
        let left = Nested::pair(Nested::pair(Nested::leaf("A"), Nested::leaf("B")), Nested::leaf("C"));
        let r = ContractionTree::annotate(&spec, &right).unwrap();
        let l = ContractionTree::annotate(&spec, &left).unwrap();
        assert_eq!(r.step_costs(), vec![100, 100]);
        assert_eq!(r.total_cost(), 200);
        assert_eq!(l.step_costs(), vec![1000, 100]);
        assert_eq!(l.total_cost(), 1100);
        assert_eq!(r.to_string(), r#"["A",["B","C"]]"#);
    }

    #[test]
    fn nested_json_round_trip() {
        let n: Nested = serde_json::from_str(r#"[["A","B"],"C"]"#).unwrap();
        assert_eq!(n, Nested::pair(Nested::pair(Nested::leaf("A"), Nested::leaf("B")), Nested::leaf("C")));
        assert!(serde_json::from_str::<Nested>(r#"["A","B","C"]"#).is_err());
    }

    #[test]
    fn mismatched_leaves_are_rejected() {
        let spec = mmv(2);
        let missing = Nested::pair(Nested::leaf("A"), Nested::leaf("B"));
        assert!(ContractionTree::annotate(&spec, &missing).is_err());
        let twice = Nested::pair(Nested::pair(Nested::leaf("A"), Nested::leaf("A")), Nested::leaf("C"));
        assert!(ContractionTree::annotate(&spec, &twice).is_err());
        let unknown = Nested::pair(Nested::pair(Nested::leaf("A"), Nested::leaf("Z")), Nested::leaf("C"));
        assert!(ContractionTree::annotate(&spec, &unknown).is_err());
    }
}
