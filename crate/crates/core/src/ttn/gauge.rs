use std::str::FromStr;

use serde::Serialize;

use crate::contract::{contract_pair, PairContraction};
use crate::decomp::{inverse, principal_sqrt, qr_matrix, svd_matrix, HERMITIAN_TOL};
use crate::error::{Error, Result};
use crate::tensor::DenseTensor;
use crate::ttn::TreeNetwork;

/// Largest accepted condition number of a gauge matrix.
pub const MAX_CONDITION: f64 = 1e14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeMethod {
    Pull,
    Direct,
}

impl FromStr for GaugeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pull" => Ok(GaugeMethod::Pull),
            "direct" => Ok(GaugeMethod::Direct),
            _ => Err(Error::validation(format!("unknown method {s:?} (expected pull or direct)"))),
        }
    }
}

/// What one orthogonalization step did to an edge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeGauge {
    pub label: i64,
    /// Tensor on the far side of the edge from the center.
    pub tensor: String,
    pub old_dim: usize,
    pub new_dim: usize,
    /// Condition number of the branch matrix (direct) or of `R` (pull).
    pub condition: f64,
    /// Weight of the branch-matrix eigenvalues dropped as zero modes.
    pub discarded_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthoReport {
    pub method: GaugeMethod,
    pub center: String,
    pub edges: Vec<EdgeGauge>,
}

/// `t'[.., s, ..] = Σ_r t[.., r, ..]·m[r, s]` on `axis`.
fn apply_right(t: &DenseTensor, axis: usize, m: &DenseTensor) -> Result<DenseTensor> {
    let out = contract_pair(t, m, &PairContraction::new(vec![axis], vec![0]))?;
    let n = out.order();
    let perm: Vec<usize> = (0..n)
        .map(|i| match i.cmp(&axis) {
            std::cmp::Ordering::Less => i,
            std::cmp::Ordering::Equal => n - 1,
            std::cmp::Ordering::Greater => i - 1,
        })
        .collect();
    out.permute(&perm)
}

/// `t'[.., s, ..] = Σ_r m[s, r]·t[.., r, ..]` on `axis`.
fn apply_left(m: &DenseTensor, t: &DenseTensor, axis: usize) -> Result<DenseTensor> {
    let out = contract_pair(m, t, &PairContraction::new(vec![1], vec![axis]))?;
    let perm: Vec<usize> = (0..out.order())
        .map(|i| match i.cmp(&axis) {
            std::cmp::Ordering::Less => i + 1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => i,
        })
        .collect();
    out.permute(&perm)
}

fn condition(m: &DenseTensor) -> Result<f64> {
    let (_, s, _) = svd_matrix(m)?;
    Ok(match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    })
}

impl TreeNetwork {
    /// Inserts `x·y` on edge `label`: `x` goes into tensor `x_side`, `y` into
    /// the other endpoint. `x` is `d×k` and `y` is `k×d`.
    fn absorb(&mut self, label: i64, x_side: &str, x: &DenseTensor, y: &DenseTensor) -> Result<()> {
        let edge = self.edges.get(&label).expect("edge").clone();
        let y_side = edge.other(x_side).to_string();
        let p = apply_right(&self.tensors[x_side], self.axis_of(x_side, label), x)?;
        let q = apply_left(y, &self.tensors[&y_side], self.axis_of(&y_side, label))?;
        self.replace(x_side, p);
        self.replace(&y_side, q);
        self.history.entry(label).or_default().push(x.clone());
        Ok(())
    }

    fn center_side(&self, label: i64) -> String {
        let edge = &self.edges[&label];
        match self.orientation().get(&label) {
            Some(id) => id.clone(),
            None => edge.ends.0.clone(),
        }
    }

    fn with_center(&self, center: &str) -> Result<TreeNetwork> {
        self.require(center)?;
        let mut out = self.clone();
        out.center = Some(center.to_string());
        Ok(out)
    }
}

/// Inserts `X·X⁻¹` on an edge. `X` joins the endpoint nearer the center
/// (or the lexicographically smaller id without a center) and `X⁻¹` the
/// other. Returns the new network and the condition number of `X`.
pub fn gauge_transform(tn: &TreeNetwork, label: i64, x: &DenseTensor) -> Result<(TreeNetwork, f64)> {
    let edge = tn.edge(label).ok_or_else(|| Error::validation(format!("no edge with label {label}")))?;
    if x.order() != 2 || x.shape() != [edge.dim, edge.dim] {
        return Err(Error::validation(format!(
            "gauge matrix has shape {:?}, edge {label} needs {}x{}",
            x.shape(),
            edge.dim,
            edge.dim
        )));
    }
    let (x_inv, cond) = inverse(x)?;
    if !(cond <= MAX_CONDITION) {
        return Err(Error::validation(format!("gauge matrix is singular: condition number {cond:.3e} exceeds 1e14")));
    }
    let mut out = tn.clone();
    let side = out.center_side(label);
    out.absorb(label, &side, x, &x_inv)?;
    Ok((out, cond))
}

pub fn orthogonalize(tn: &TreeNetwork, center: &str, method: GaugeMethod) -> Result<(TreeNetwork, OrthoReport)> {
    match method {
        GaugeMethod::Pull => orthogonalize_pull(tn, center),
        GaugeMethod::Direct => orthogonalize_direct(tn, center),
    }
}

/// QR decompositions from the leaves inward: each tensor keeps `Q` and
/// hands `R` on toward the center.
pub fn orthogonalize_pull(tn: &TreeNetwork, center: &str) -> Result<(TreeNetwork, OrthoReport)> {
    let mut out = tn.with_center(center)?;
    let mut edges = Vec::new();
    for (id, label, parent) in out.parents(center).into_iter().rev() {
        let t = &out.tensors[&id];
        let axis = out.axis_of(&id, label);
        let order = t.order();
        let rows: Vec<usize> = (0..order).filter(|&i| i != axis).collect();
        // rows may be empty (a leaf with nothing but its parent edge)
        let mut to_matrix = rows.clone();
        to_matrix.push(axis);
        let d_rows: usize = rows.iter().map(|&i| t.shape()[i]).product();
        let (q, r) = qr_matrix(&t.permute(&to_matrix)?.reshape(vec![d_rows, t.shape()[axis]])?)?;
        let k = q.shape()[1];
        let mut shape: Vec<usize> = rows.iter().map(|&i| t.shape()[i]).collect();
        shape.push(k);
        // move the new index back into the slot of the old one
        let perm: Vec<usize> = (0..order)
            .map(|i| match i.cmp(&axis) {
                std::cmp::Ordering::Less => i,
                std::cmp::Ordering::Equal => order - 1,
                std::cmp::Ordering::Greater => i - 1,
            })
            .collect();
        let q = q.reshape(shape)?.permute(&perm)?;
        let old_dim = t.shape()[axis];
        let cond = condition(&r)?;
        let pt = apply_left(&r, &out.tensors[&parent], out.axis_of(&parent, label))?;
        out.replace(&id, q);
        out.replace(&parent, pt);
        out.history.entry(label).or_default().push(r);
        edges.push(EdgeGauge { label, tensor: id, old_dim, new_dim: k, condition: cond, discarded_weight: 0.0 });
    }
    edges.sort_by_key(|e| e.label);
    Ok((out, OrthoReport { method: GaugeMethod::Pull, center: center.to_string(), edges }))
}

/// Per branch at the center: `X = √ρ` of the branch matrix goes into the
/// center and `X⁻¹` into the branch. Zero modes of `ρ` are dropped, which
/// shrinks the edge.
pub fn orthogonalize_direct(tn: &TreeNetwork, center: &str) -> Result<(TreeNetwork, OrthoReport)> {
    let mut out = tn.with_center(center)?;
    let mut edges = Vec::new();
    for b in tn.branches(center)? {
        let rho = tn.branch_matrix(&b)?;
        let root = principal_sqrt(&rho, HERMITIAN_TOL).map_err(|e| match e {
            Error::Validation(m) => Error::numerical(format!("branch matrix of edge {}: {m}", b.root_label)),
            other => other,
        })?;
        if root.retained() == 0 {
            return Err(Error::numerical(format!("branch at edge {} is degenerate: its branch matrix vanishes", b.root_label)));
        }
        let (x, y) = if root.retained() < root.dim() {
            (root.x_reduced(), root.x_inv_reduced())
        } else {
            (root.x.clone(), root.x_inv.clone())
        };
        out.absorb(b.root_label, center, &x, &y)?;
        edges.push(EdgeGauge {
            label: b.root_label,
            tensor: b.leading.clone(),
            old_dim: root.dim(),
            new_dim: root.retained(),
            condition: root.condition,
            discarded_weight: root.discarded_weight,
        });
    }
    Ok((out, OrthoReport { method: GaugeMethod::Direct, center: center.to_string(), edges }))
}
