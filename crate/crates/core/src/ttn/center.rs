use serde::Serialize;

use crate::contract::{contract_pair, PairContraction};
use crate::decomp::{svd, truncate};
use crate::error::{Error, Result};
use crate::netcon::TensorSlot;
use crate::tensor::{difference_norm, Bipartition, DenseTensor};
use crate::ttn::{Edge, TreeNetwork};

/// Default tolerance for accepting a tensor as orthogonality center.
pub const CENTER_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchCheck {
    pub root_label: i64,
    pub leading: String,
    pub members: Vec<String>,
    pub dim: usize,
    /// Max-abs deviation of the branch matrix from the identity.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CenterReport {
    pub center: String,
    pub tol: f64,
    pub branches: Vec<BranchCheck>,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Contracts every branch at `center` with its conjugate and compares the
/// result with the identity.
pub fn verify_center(tn: &TreeNetwork, center: &str, tol: f64) -> Result<CenterReport> {
    let mut branches = Vec::new();
    for b in tn.branches(center)? {
        let rho = tn.branch_matrix(&b)?;
        let dim = rho.shape()[0];
        let deviation = rho.sub(&DenseTensor::identity(dim))?.max_abs();
        branches.push(BranchCheck { root_label: b.root_label, leading: b.leading, members: b.members, dim, deviation });
    }
    let max_deviation = branches.iter().map(|b| b.deviation).fold(0.0, f64::max);
    Ok(CenterReport { center: center.to_string(), tol, passed: max_deviation <= tol, branches, max_deviation })
}

fn require_center(tn: &TreeNetwork, center: &str) -> Result<()> {
    let report = verify_center(tn, center, CENTER_TOL)?;
    if !report.passed {
        return Err(Error::validation(format!(
            "{center:?} is not an orthogonality center: branch deviation {:.3e} exceeds {CENTER_TOL:.0e}",
            report.max_deviation
        )));
    }
    Ok(())
}

/// Norm of the whole network, read off the center tensor.
pub fn center_norm(tn: &TreeNetwork, center: &str) -> Result<f64> {
    require_center(tn, center)?;
    Ok(tn.tensor(center).expect("verified").frobenius_norm())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitReport {
    pub tensor: String,
    pub left: String,
    pub right: String,
    pub new_label: i64,
    pub rank: usize,
    pub spectrum: Vec<f64>,
    pub discarded_weight: f64,
    /// `sqrt(Σ_{k>r} s_k²)` of the split tensor.
    pub local_error: f64,
    pub degenerate: bool,
}

fn fresh_id(tn: &TreeNetwork, base: String) -> String {
    let mut id = base;
    while tn.spec.slot(&id).is_some() {
        id.push('\'');
    }
    id
}

/// Splits tensor `id` across `p` into `id.L = Ũ` and `id.R = S̃·Ṽ†` joined
/// by a new edge of rank `r`. No orthogonality precondition: on a network
/// without a center at `id` this is the naive local truncation.
pub fn split_tensor(tn: &TreeNetwork, id: &str, p: &Bipartition, r: usize) -> Result<(TreeNetwork, SplitReport)> {
    let slot = tn.require(id)?.clone();
    if p.order() != slot.labels.len() {
        return Err(Error::validation(format!(
            "bipartition {p} covers {} indices, {id:?} has {}",
            p.order(),
            slot.labels.len()
        )));
    }
    let full = svd(&tn.tensors[id], p)?;
    let cut = truncate(&full, r)?;
    let left = cut.left().clone();
    let right = contract_pair(cut.middle(), cut.right().expect("svd"), &PairContraction::new(vec![1], vec![0]))?;

    let new_label = tn.spec.tensors.iter().flat_map(|s| s.labels.iter()).copied().max().unwrap_or(0).max(0) + 1;
    let mut left_labels: Vec<i64> = p.rows.iter().map(|&i| slot.labels[i]).collect();
    left_labels.push(new_label);
    let mut right_labels = vec![new_label];
    right_labels.extend(p.cols.iter().map(|&i| slot.labels[i]));
    let left_id = fresh_id(tn, format!("{id}.L"));
    let right_id = fresh_id(tn, format!("{id}.R"));

    let mut out = tn.clone();
    let pos = out.spec.tensors.iter().position(|s| s.id == id).expect("slot");
    out.spec.tensors.splice(
        pos..=pos,
        [
            TensorSlot::new(left_id.clone(), left.shape().to_vec(), left_labels.clone()),
            TensorSlot::new(right_id.clone(), right.shape().to_vec(), right_labels.clone()),
        ],
    );
    out.tensors.remove(id);
    out.tensors.insert(left_id.clone(), left);
    out.tensors.insert(right_id.clone(), right);
    for (labels, owner) in [(&left_labels, &left_id), (&right_labels, &right_id)] {
        for l in labels {
            if let Some(e) = out.edges.get_mut(l) {
                let other = e.other(id).to_string();
                e.ends = if *owner < other { (owner.clone(), other) } else { (other, owner.clone()) };
            }
        }
    }
    let ends = if left_id < right_id { (left_id.clone(), right_id.clone()) } else { (right_id.clone(), left_id.clone()) };
    out.edges.insert(new_label, Edge { label: new_label, ends, dim: r });
    if out.center.as_deref() == Some(id) {
        out.center = Some(right_id.clone());
    }

    let report = SplitReport {
        tensor: id.to_string(),
        left: left_id,
        right: right_id,
        new_label,
        rank: r,
        spectrum: full.spectrum.clone(),
        discarded_weight: cut.report.discarded_weight,
        local_error: cut.report.error,
        degenerate: cut.report.degenerate,
    };
    Ok((out, report))
}

/// Optimal rank-`r` truncation of the center tensor. Because `center` is an
/// orthogonality center, the error of the whole network equals the local
/// error. The new center is the `.R` tensor.
pub fn truncate_at_center(tn: &TreeNetwork, center: &str, p: &Bipartition, r: usize) -> Result<(TreeNetwork, SplitReport)> {
    require_center(tn, center)?;
    let (mut out, report) = split_tensor(tn, center, p, r)?;
    out.center = Some(report.right.clone());
    Ok((out, report))
}

/// `‖H − H′‖` by contracting both networks in full.
pub fn global_error(a: &TreeNetwork, b: &TreeNetwork) -> Result<f64> {
    difference_norm(&a.contract()?, &b.contract()?)
}
