use std::collections::HashMap;

use crate::contract::{contract_pair, partial_trace};
use crate::error::{Error, Result};
use crate::netcon::search::default_sequence;
use crate::netcon::spec::NetworkSpec;
use crate::netcon::tree::{merge_legs, ContractionTree, Legs};
use crate::tensor::DenseTensor;

/// Contracts a whole network.
///
/// The result's indices follow the open labels in the order `-1, -2, …`.
/// Without an explicit tree, the spec's stored sequence is used, and failing
/// that one is searched for (dp up to 16 tensors, greedy beyond).
pub fn contract_network(
    spec: &NetworkSpec,
    tensors: &HashMap<String, DenseTensor>,
    tree: Option<&ContractionTree>,
) -> Result<DenseTensor> {
    spec.check()?;
    for slot in &spec.tensors {
        let t = tensors
            .get(&slot.id)
            .ok_or_else(|| Error::validation(format!("no tensor supplied for {:?}", slot.id)))?;
        if t.shape() != slot.shape.as_slice() {
            return Err(Error::validation(format!(
                "tensor {:?} has shape {:?}, network expects {:?}",
                slot.id,
                t.shape(),
                slot.shape
            )));
        }
    }
    let searched;
    let tree = match tree.or(spec.sequence.as_ref()) {
        Some(t) => {
            t.check_covers(spec)?;
            t
        }
        None => {
            searched = default_sequence(spec)?;
            &searched
        }
    };

    let (result, legs) = evaluate(spec, tensors, tree)?;
    let labels: Vec<i64> = legs.iter().map(|&(l, _)| l).collect();
    if let Some(l) = labels.iter().find(|&&l| l > 0) {
        return Err(Error::validation(format!("label {l} left uncontracted by the sequence")));
    }
    let perm: Vec<usize> = spec
        .open_labels()
        .iter()
        .map(|l| labels.iter().position(|m| m == l).expect("open label survives"))
        .collect();
    result.permute(&perm)
}

fn evaluate(
    spec: &NetworkSpec,
    tensors: &HashMap<String, DenseTensor>,
    tree: &ContractionTree,
) -> Result<(DenseTensor, Legs)> {
    match tree {
        ContractionTree::Leaf(id) => {
            let slot = spec.slot(id).expect("tree covers spec");
            let traced = partial_trace(&tensors[id], &slot.trace_pairs())?;
            Ok((traced, slot.untraced_labels()))
        }
        ContractionTree::Merge { left, right, .. } => {
            let (a, la) = evaluate(spec, tensors, left)?;
            let (b, lb) = evaluate(spec, tensors, right)?;
            let (pc, _, legs) = merge_legs(&la, &lb);
            Ok((contract_pair(&a, &b, &pc)?, legs))
        }
    }
}
