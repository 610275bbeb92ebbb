//! Contraction-sequence search.
//!
//! Both searches work on the tensors sorted by id, so the tree they return
//! depends only on ids and labels, never on the order tensors were listed in.
//! Merges are oriented with the side holding the lexicographically smaller
//! sorted id list on the left, and ties between equally cheap candidates go
//! to the lexicographically smaller `(cost, leaf ids)` key.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcon::spec::{NetworkSpec, TensorSlot};
use crate::netcon::tree::{merge_legs, ContractionTree, Legs, Nested};

/// Largest network the subset dynamic program accepts.
pub const DP_MAX_TENSORS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Exact minimum over all binary trees, outer products included.
    Dp,
    /// Repeatedly merge the cheapest pair.
    Greedy,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dp" => Ok(Method::Dp),
            "greedy" => Ok(Method::Greedy),
            other => Err(Error::validation(format!("unknown sequence method {other:?}"))),
        }
    }
}

pub fn search_sequence(spec: &NetworkSpec, method: Method) -> Result<ContractionTree> {
    spec.check()?;
    let nested = match method {
        Method::Dp => dp_order(spec)?,
        Method::Greedy => greedy_order(spec),
    };
    ContractionTree::annotate(spec, &nested)
}

/// Dp for networks up to [`DP_MAX_TENSORS`], greedy beyond.
pub fn default_sequence(spec: &NetworkSpec) -> Result<ContractionTree> {
    let method = if spec.len() <= DP_MAX_TENSORS { Method::Dp } else { Method::Greedy };
    search_sequence(spec, method)
}

fn sorted_slots(spec: &NetworkSpec) -> Vec<&TensorSlot> {
    let mut slots: Vec<&TensorSlot> = spec.tensors.iter().collect();
    slots.sort_by(|a, b| a.id.cmp(&b.id));
    slots
}

fn leg_size(legs: &[(i64, usize)]) -> u128 {
    legs.iter().fold(1u128, |acc, &(_, d)| acc.saturating_mul(d as u128))
}

/// Lexicographic comparison of the ascending bit-index lists of two masks.
fn cmp_masks(a: u32, b: u32) -> Ordering {
    let diff = a ^ b;
    if diff == 0 {
        return Ordering::Equal;
    }
    let p = diff.trailing_zeros();
    let (has, other) = if a & (1 << p) != 0 { (Ordering::Less, b) } else { (Ordering::Greater, a) };
    // the list lacking bit p is either exhausted (a prefix, hence smaller) or
    // continues with a larger element
    if other >> p == 0 {
        has.reverse()
    } else {
        has
    }
}

fn dp_order(spec: &NetworkSpec) -> Result<Nested> {
    let n = spec.len();
    if n > DP_MAX_TENSORS {
        return Err(Error::Size(format!(
            "dp search handles at most {DP_MAX_TENSORS} tensors, network has {n}; use greedy"
        )));
    }
    let slots = sorted_slots(spec);
    let mut label_index: BTreeMap<i64, usize> = BTreeMap::new();
    let mut dims = Vec::new();
    let mut bits = vec![0u128; n];
    for (i, s) in slots.iter().enumerate() {
        for (l, d) in s.untraced_labels() {
            let next = label_index.len();
            let k = *label_index.entry(l).or_insert_with(|| {
                dims.push(d);
                next
            });
            if k >= 128 {
                return Err(Error::Size("dp search handles at most 128 distinct labels; use greedy".into()));
            }
            bits[i] |= 1u128 << k;
        }
    }
    let size_of = |set: u128| -> u128 {
        let mut acc = 1u128;
        let mut s = set;
        while s != 0 {
            let k = s.trailing_zeros() as usize;
            acc = acc.saturating_mul(dims[k] as u128);
            s &= s - 1;
        }
        acc
    };

    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let count = full as usize + 1;
    // every internal label joins exactly two tensors, so XOR leaves the legs
    // with one end inside the subset
    let mut open = vec![0u128; count];
    let mut size = vec![1u128; count];
    for s in 1..count {
        let low = s.trailing_zeros() as usize;
        open[s] = open[s & (s - 1)] ^ bits[low];
        size[s] = size_of(open[s]);
    }

    // best[s] = (cost, left part)
    let mut best: Vec<Option<(u128, u32)>> = vec![None; count];
    for i in 0..n {
        best[1 << i] = Some((0, 0));
    }
    for s in 1..count as u32 {
        if s.count_ones() < 2 {
            continue;
        }
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let mut choice: Option<(u128, u32)> = None;
        // enumerate left parts containing the lowest member
        let mut sub = rest;
        loop {
            let a = sub | low;
            if a != s {
                let b = s ^ a;
                if let (Some((ca, _)), Some((cb, _))) = (best[a as usize], best[b as usize]) {
                    let shared = open[a as usize] & open[b as usize];
                    let step = size[a as usize].saturating_mul(size[b as usize]) / size_of(shared);
                    let cost = ca.saturating_add(cb).saturating_add(step);
                    let better = match choice {
                        None => true,
                        Some((c, prev)) => cost < c || (cost == c && cmp_masks(a, prev) == Ordering::Less),
                    };
                    if better {
                        choice = Some((cost, a));
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[s as usize] = choice;
    }

    fn build(best: &[Option<(u128, u32)>], slots: &[&TensorSlot], s: u32) -> Nested {
        if s.count_ones() == 1 {
            return Nested::leaf(slots[s.trailing_zeros() as usize].id.clone());
        }
        let (_, a) = best[s as usize].expect("every subset has a split");
        Nested::pair(build(best, slots, a), build(best, slots, s ^ a))
    }

    Ok(build(&best, &slots, full))
}

struct Partial {
    nested: Nested,
    leaves: Vec<usize>,
    legs: Legs,
}

fn greedy_order(spec: &NetworkSpec) -> Nested {
    let slots = sorted_slots(spec);
    let mut nodes: Vec<Partial> = slots
        .iter()
        .enumerate()
        .map(|(i, s)| Partial { nested: Nested::leaf(s.id.clone()), leaves: vec![i], legs: s.untraced_labels() })
        .collect();
    while nodes.len() > 1 {
        let mut pick: Option<(bool, u128, Vec<usize>, Vec<usize>, usize, usize)> = None;
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                let (a, b) = if nodes[i].leaves <= nodes[j].leaves { (i, j) } else { (j, i) };
                let (_, contracted, _) = merge_legs(&nodes[a].legs, &nodes[b].legs);
                let shared: u128 = nodes[a]
                    .legs
                    .iter()
                    .filter(|(l, _)| contracted.contains(l))
                    .fold(1u128, |acc, &(_, d)| acc.saturating_mul(d as u128));
                let cost = leg_size(&nodes[a].legs).saturating_mul(leg_size(&nodes[b].legs)) / shared;
                // contracting pairs always beat outer products
                let key = (contracted.is_empty(), cost, nodes[a].leaves.clone(), nodes[b].leaves.clone());
                let better = match &pick {
                    None => true,
                    Some((o, c, l, r, _, _)) => key < (*o, *c, l.clone(), r.clone()),
                };
                if better {
                    pick = Some((key.0, key.1, key.2, key.3, a, b));
                }
            }
        }
        let (_, _, _, _, a, b) = pick.expect("at least two nodes");
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        let first = nodes.swap_remove(hi);
        let second = nodes.swap_remove(lo);
        let (left, right) = if first.leaves <= second.leaves { (first, second) } else { (second, first) };
        let (_, _, legs) = merge_legs(&left.legs, &right.legs);
        let mut leaves = left.leaves.clone();
        leaves.extend(&right.leaves);
        leaves.sort_unstable();
        nodes.push(Partial { nested: Nested::pair(left.nested, right.nested), leaves, legs });
    }
    nodes.pop().expect("one node").nested
}
