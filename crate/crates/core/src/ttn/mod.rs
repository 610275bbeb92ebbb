//! Tree tensor networks: loop-free networks whose positive labels form a
//! tree. Provides gauge transformations on edges, the two ways of creating
//! an orthogonality center, and truncation at the center.
//!
//! All operations leave their input untouched and return a new network.

mod center;
mod gauge;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::manifest::Network;
use crate::netcon::{contract_network, NetworkSpec, TensorSlot};
use crate::tensor::{Bipartition, DenseTensor};

pub use center::{
    center_norm, global_error, split_tensor, truncate_at_center, verify_center, BranchCheck, CenterReport,
    SplitReport, CENTER_TOL,
};
pub use gauge::{
    gauge_transform, orthogonalize, orthogonalize_direct, orthogonalize_pull, EdgeGauge, GaugeMethod,
    OrthoReport, MAX_CONDITION,
};

/// A bond between two tensors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub label: i64,
    /// Endpoint ids, lexicographically ordered.
    pub ends: (String, String),
    pub dim: usize,
}

impl Edge {
    pub fn other(&self, id: &str) -> &str {
        if self.ends.0 == id {
            &self.ends.1
        } else {
            &self.ends.0
        }
    }
}

/// The tensors on one side of an edge at the center.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    /// Label of the edge joining the branch to the center.
    pub root_label: i64,
    /// The branch tensor on that edge.
    pub leading: String,
    /// Members in breadth-first order from `leading`.
    pub members: Vec<String>,
    /// Open labels carried by the members, ascending by magnitude.
    pub open_labels: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct TreeNetwork {
    spec: NetworkSpec,
    tensors: BTreeMap<String, DenseTensor>,
    edges: BTreeMap<i64, Edge>,
    center: Option<String>,
    history: BTreeMap<i64, Vec<DenseTensor>>,
}

/// Checks that the positive labels of `spec` form a tree and pairs each
/// slot with its tensor.
pub fn build_tree(spec: &NetworkSpec, tensors: &HashMap<String, DenseTensor>) -> Result<TreeNetwork> {
    spec.check()?;
    let mut stored = BTreeMap::new();
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
        stored.insert(slot.id.clone(), t.clone());
    }

    let mut ends: BTreeMap<i64, Vec<(&str, usize)>> = BTreeMap::new();
    for slot in &spec.tensors {
        for (&l, &d) in slot.labels.iter().zip(&slot.shape) {
            if l > 0 {
                ends.entry(l).or_default().push((&slot.id, d));
            }
        }
    }
    let mut edges = BTreeMap::new();
    let mut adj: BTreeMap<&str, Vec<(i64, &str)>> = BTreeMap::new();
    for (&l, occ) in &ends {
        let (a, b) = (occ[0].0, occ[1].0);
        if a == b {
            return Err(Error::validation(format!("network has a cycle: label {l} is a trace line on {a:?}")));
        }
        if let Some(path) = path_between(&adj, a, b) {
            let mut labels = path;
            labels.push(l);
            return Err(Error::validation(format!("network has a cycle through labels {labels:?}")));
        }
        adj.entry(a).or_default().push((l, b));
        adj.entry(b).or_default().push((l, a));
        let pair = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        edges.insert(l, Edge { label: l, ends: pair, dim: occ[0].1 });
    }
    let components = spec.components();
    if components.len() > 1 {
        return Err(Error::validation(format!("network is disconnected: components {components:?}")));
    }
    let mut spec = spec.clone();
    spec.sequence = None;
    Ok(TreeNetwork { spec, tensors: stored, edges, center: None, history: BTreeMap::new() })
}

/// Labels on the path from `a` to `b`, if one exists.
fn path_between(adj: &BTreeMap<&str, Vec<(i64, &str)>>, a: &str, b: &str) -> Option<Vec<i64>> {
    let mut prev: HashMap<&str, (i64, &str)> = HashMap::new();
    let mut queue = VecDeque::from([a]);
    let mut seen = BTreeSet::from([a]);
    while let Some(x) = queue.pop_front() {
        if x == b {
            let mut labels = Vec::new();
            let mut cur = b;
            while cur != a {
                let (l, p) = prev[cur];
                labels.push(l);
                cur = p;
            }
            labels.reverse();
            return Some(labels);
        }
        for &(l, y) in adj.get(x).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.insert(y) {
                prev.insert(y, (l, x));
                queue.push_back(y);
            }
        }
    }
    None
}

impl TreeNetwork {
    pub fn from_network(net: &Network) -> Result<Self> {
        let mut tn = build_tree(&net.spec, &net.tensors)?;
        if let Some(c) = &net.center {
            tn.require(c)?;
            tn.center = Some(c.clone());
        }
        Ok(tn)
    }

    /// Manifest form, carrying the center and edge orientations.
    pub fn to_network(&self) -> Network {
        let tensors = self.tensors.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let mut net = Network::new(self.spec.clone(), tensors);
        net.center = self.center.clone();
        net.orientation = self.orientation();
        net
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn tensor(&self, id: &str) -> Option<&DenseTensor> {
        self.tensors.get(id)
    }

    pub fn tensor_map(&self) -> HashMap<String, DenseTensor> {
        self.tensors.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.spec.ids()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn edge(&self, label: i64) -> Option<&Edge> {
        self.edges.get(&label)
    }

    pub fn center(&self) -> Option<&str> {
        self.center.as_deref()
    }

    /// Gauge matrices applied to an edge so far, oldest first.
    pub fn gauge_history(&self, label: i64) -> &[DenseTensor] {
        self.history.get(&label).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Copy with tensor `id` replaced by `t` of the same shape.
    pub fn with_tensor(&self, id: &str, t: DenseTensor) -> Result<TreeNetwork> {
        let slot = self.require(id)?;
        if t.shape() != slot.shape.as_slice() {
            return Err(Error::validation(format!(
                "replacement for {id:?} has shape {:?}, expected {:?}",
                t.shape(),
                slot.shape
            )));
        }
        let mut out = self.clone();
        out.tensors.insert(id.to_string(), t);
        Ok(out)
    }

    fn require(&self, id: &str) -> Result<&TensorSlot> {
        self.spec.slot(id).ok_or_else(|| Error::validation(format!("no tensor {id:?} in the network")))
    }

    /// Edges at `id`, by label.
    fn incident(&self, id: &str) -> Vec<&Edge> {
        self.edges.values().filter(|e| e.ends.0 == id || e.ends.1 == id).collect()
    }

    /// For each non-center tensor, the edge leading toward `center` and the
    /// neighbor across it, in breadth-first order from the center.
    fn parents(&self, center: &str) -> Vec<(String, i64, String)> {
        let mut out = Vec::new();
        let mut queue = VecDeque::from([center.to_string()]);
        let mut seen = BTreeSet::from([center.to_string()]);
        while let Some(x) = queue.pop_front() {
            for e in self.incident(&x) {
                let y = e.other(&x).to_string();
                if seen.insert(y.clone()) {
                    out.push((y.clone(), e.label, x.clone()));
                    queue.push_back(y);
                }
            }
        }
        out
    }

    /// Edge label → endpoint on the center side; empty without a center.
    pub fn orientation(&self) -> BTreeMap<i64, String> {
        match &self.center {
            None => BTreeMap::new(),
            Some(c) => self.parents(c).into_iter().map(|(_, l, p)| (l, p)).collect(),
        }
    }

    /// Splits the indices of a non-center tensor into the edge toward the
    /// center (columns) and everything else (rows).
    pub fn toward_center_bipartition(&self, id: &str) -> Option<Bipartition> {
        let center = self.center.as_deref()?;
        let (_, label, _) = self.parents(center).into_iter().find(|(x, _, _)| x == id)?;
        let slot = self.spec.slot(id)?;
        let axis = slot.labels.iter().position(|&l| l == label)?;
        let rows = (0..slot.labels.len()).filter(|&i| i != axis).collect();
        Bipartition::new(rows, vec![axis], slot.labels.len()).ok()
    }

    /// Branches hanging off `center`, one per incident edge.
    pub fn branches(&self, center: &str) -> Result<Vec<Branch>> {
        self.require(center)?;
        let mut out = Vec::new();
        for e in self.incident(center) {
            let leading = e.other(center).to_string();
            let mut members = vec![leading.clone()];
            let mut seen = BTreeSet::from([center.to_string(), leading.clone()]);
            let mut i = 0;
            while i < members.len() {
                let x = members[i].clone();
                for f in self.incident(&x) {
                    let y = f.other(&x).to_string();
                    if seen.insert(y.clone()) {
                        members.push(y);
                    }
                }
                i += 1;
            }
            let mut open: Vec<i64> = members
                .iter()
                .flat_map(|m| self.spec.slot(m).expect("member").labels.iter().copied())
                .filter(|&l| l < 0)
                .collect();
            open.sort_by_key(|l| -l);
            out.push(Branch { root_label: e.label, leading, members, open_labels: open });
        }
        Ok(out)
    }

    /// `ρ[r, r'] = Σ B[r, rest]·conj(B[r', rest])` over every index of the
    /// branch except its root edge.
    pub fn branch_matrix(&self, branch: &Branch) -> Result<DenseTensor> {
        let m = self.spec.tensors.iter().flat_map(|s| s.labels.iter()).map(|l| l.abs()).max().unwrap_or(0);
        let map_label = |l: i64, bra: bool| -> i64 {
            if l == branch.root_label {
                if bra {
                    -2
                } else {
                    -1
                }
            } else if l < 0 {
                m - l
            } else if bra {
                2 * m + l
            } else {
                l
            }
        };
        let mut slots = Vec::new();
        let mut tensors = HashMap::new();
        for bra in [false, true] {
            for id in &branch.members {
                let slot = self.spec.slot(id).expect("member");
                let key = format!("{}:{id}", if bra { "bra" } else { "ket" });
                let labels = slot.labels.iter().map(|&l| map_label(l, bra)).collect();
                slots.push(TensorSlot::new(key.clone(), slot.shape.clone(), labels));
                let t = &self.tensors[id];
                tensors.insert(key, if bra { t.conjugate() } else { t.clone() });
            }
        }
        contract_network(&NetworkSpec::new(slots), &tensors, None)
    }

    /// Contracts the whole network; indices follow the open labels `-1, -2, …`.
    pub fn contract(&self) -> Result<DenseTensor> {
        contract_network(&self.spec, &self.tensor_map(), None)
    }

    fn axis_of(&self, id: &str, label: i64) -> usize {
        self.spec.slot(id).expect("slot").labels.iter().position(|&l| l == label).expect("label on tensor")
    }

    /// Replaces a tensor, updating its slot shape and the edge dimensions.
    fn replace(&mut self, id: &str, t: DenseTensor) {
        let slot = self.spec.tensors.iter_mut().find(|s| s.id == id).expect("slot");
        slot.shape = t.shape().to_vec();
        for (l, &d) in slot.labels.iter().zip(&slot.shape) {
            if let Some(e) = self.edges.get_mut(l) {
                e.dim = d;
            }
        }
        self.tensors.insert(id.to_string(), t);
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::tensor::{ScalarKind, C64};

    /// Deterministic pseudo-random entries without an RNG dependency.
    pub fn filled(shape: Vec<usize>, seed: u64, complex: bool) -> DenseTensor {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let kind = if complex { ScalarKind::Complex } else { ScalarKind::Real };
        DenseTensor::from_fn(shape, kind, |_| C64::new(next(), if complex { next() } else { 0.0 })).unwrap()
    }

    /// Seven tensors: A joined to B, C and F; B to D and E; C to G. Every
    /// tensor has one open index.
    pub fn seven(chi: usize, open: usize, seed: u64, complex: bool) -> TreeNetwork {
        let layout: [(&str, Vec<i64>); 7] = [
            ("A", vec![1, 2, 3, -1]),
            ("B", vec![1, 4, 5, -2]),
            ("C", vec![2, 6, -3]),
            ("D", vec![4, -4]),
            ("E", vec![5, -5]),
            ("F", vec![3, -6]),
            ("G", vec![6, -7]),
        ];
        let mut slots = Vec::new();
        let mut tensors = HashMap::new();
        for (k, (id, labels)) in layout.into_iter().enumerate() {
            let shape: Vec<usize> = labels.iter().map(|&l| if l > 0 { chi } else { open }).collect();
            tensors.insert(id.to_string(), filled(shape.clone(), seed * 31 + k as u64, complex));
            slots.push(TensorSlot::new(id, shape, labels));
        }
        build_tree(&NetworkSpec::new(slots), &tensors).unwrap()
    }
}
