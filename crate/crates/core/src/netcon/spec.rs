use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::netcon::tree::ContractionTree;

/// One tensor of a network: its id, shape and one label per index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorSlot {
    pub id: String,
    pub shape: Vec<usize>,
    pub labels: Vec<i64>,
}

impl TensorSlot {
    pub fn new(id: impl Into<String>, shape: Vec<usize>, labels: Vec<i64>) -> Self {
        TensorSlot { id: id.into(), shape, labels }
    }

    /// Positive labels occurring twice on this tensor (trace lines), as
    /// pairs of index positions.
    pub fn trace_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for (i, &l) in self.labels.iter().enumerate() {
            if l > 0 {
                if let Some(j) = self.labels[i + 1..].iter().position(|&m| m == l) {
                    pairs.push((i, i + 1 + j));
                }
            }
        }
        pairs
    }

    /// Labels remaining after trace lines are summed out, in index order.
    pub fn untraced_labels(&self) -> Vec<(i64, usize)> {
        let traced: BTreeSet<i64> = self.trace_pairs().iter().map(|&(i, _)| self.labels[i]).collect();
        self.labels
            .iter()
            .zip(&self.shape)
            .filter(|(l, _)| !traced.contains(l))
            .map(|(&l, &d)| (l, d))
            .collect()
    }
}

/// A labeled tensor network in the ncon convention: positive labels are
/// contracted (each appears exactly twice), negative labels `-1..-k` are the
/// open indices of the result.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NetworkSpec {
    pub tensors: Vec<TensorSlot>,
    pub sequence: Option<ContractionTree>,
}

/// One broken network invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Empty,
    DuplicateId(String),
    LabelArity { id: String, labels: usize, order: usize },
    ZeroDimension { id: String },
    ZeroLabel { id: String },
    DanglingLabel { label: i64, id: String },
    OverusedLabel { label: i64, ids: Vec<String> },
    DimensionMismatch { label: i64, first: (String, usize), second: (String, usize) },
    RepeatedOpenLabel { label: i64, ids: Vec<String> },
    OpenLabelGap { missing: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "network has no tensors"),
            Violation::DuplicateId(id) => write!(f, "tensor id {id:?} used more than once"),
            Violation::LabelArity { id, labels, order } => {
                write!(f, "tensor {id:?} has {labels} labels but order {order}")
            }
            Violation::ZeroDimension { id } => write!(f, "tensor {id:?} has a zero dimension"),
            Violation::ZeroLabel { id } => write!(f, "tensor {id:?} uses label 0"),
            Violation::DanglingLabel { label, id } => {
                write!(f, "dangling internal label {label} on tensor {id:?} (appears once)")
            }
            Violation::OverusedLabel { label, ids } => {
                write!(f, "internal label {label} appears more than twice, on {ids:?}")
            }
            Violation::DimensionMismatch { label, first, second } => write!(
                f,
                "label {label} joins {:?} (dim {}) and {:?} (dim {}) with different dimensions",
                first.0, first.1, second.0, second.1
            ),
            Violation::RepeatedOpenLabel { label, ids } => {
                write!(f, "open label {label} appears more than once, on {ids:?}")
            }
            Violation::OpenLabelGap { missing } => {
                write!(f, "open labels are not contiguous: {missing} is missing")
            }
        }
    }
}

impl NetworkSpec {
    pub fn new(tensors: Vec<TensorSlot>) -> Self {
        NetworkSpec { tensors, sequence: None }
    }

    pub fn with_sequence(mut self, tree: ContractionTree) -> Self {
        self.sequence = Some(tree);
        self
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn slot(&self, id: &str) -> Option<&TensorSlot> {
        self.tensors.iter().find(|t| t.id == id)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.tensors.iter().map(|t| t.id.as_str()).collect()
    }

    /// Every broken invariant, or `Ok` when the spec is well formed.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if self.tensors.is_empty() {
            out.push(Violation::Empty);
        }
        let mut ids = BTreeSet::new();
        let mut occurrences: BTreeMap<i64, Vec<(String, usize)>> = BTreeMap::new();
        for t in &self.tensors {
            if !ids.insert(t.id.as_str()) {
                out.push(Violation::DuplicateId(t.id.clone()));
            }
            if t.labels.len() != t.shape.len() {
                out.push(Violation::LabelArity {
                    id: t.id.clone(),
                    labels: t.labels.len(),
                    order: t.shape.len(),
                });
                continue;
            }
            if t.shape.contains(&0) {
                out.push(Violation::ZeroDimension { id: t.id.clone() });
            }
            for (&l, &d) in t.labels.iter().zip(&t.shape) {
                if l == 0 {
                    out.push(Violation::ZeroLabel { id: t.id.clone() });
                } else {
                    occurrences.entry(l).or_default().push((t.id.clone(), d));
                }
            }
        }
        let mut open = Vec::new();
        for (&label, occ) in &occurrences {
            let ids: Vec<String> = occ.iter().map(|(id, _)| id.clone()).collect();
            if label > 0 {
                match occ.len() {
                    1 => out.push(Violation::DanglingLabel { label, id: occ[0].0.clone() }),
                    2 => {
                        if occ[0].1 != occ[1].1 {
                            out.push(Violation::DimensionMismatch {
                                label,
                                first: occ[0].clone(),
                                second: occ[1].clone(),
                            });
                        }
                    }
                    _ => out.push(Violation::OverusedLabel { label, ids }),
                }
            } else {
                if occ.len() > 1 {
                    out.push(Violation::RepeatedOpenLabel { label, ids });
                }
                open.push(-label);
            }
        }
        open.sort_unstable();
        for (k, &l) in open.iter().enumerate() {
            let expected = k as i64 + 1;
            if l != expected {
                out.push(Violation::OpenLabelGap { missing: -expected });
                break;
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// [`validate`](Self::validate) folded into a single error.
    pub fn check(&self) -> Result<()> {
        self.validate().map_err(|v| {
            Error::Validation(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "))
        })
    }

    /// Dimension of every label.
    pub fn label_dims(&self) -> BTreeMap<i64, usize> {
        let mut dims = BTreeMap::new();
        for t in &self.tensors {
            for (&l, &d) in t.labels.iter().zip(&t.shape) {
                dims.insert(l, d);
            }
        }
        dims
    }

    /// Open labels in output order (`-1` first).
    pub fn open_labels(&self) -> Vec<i64> {
        let mut open: Vec<i64> = self.tensors.iter().flat_map(|t| t.labels.iter().copied()).filter(|&l| l < 0).collect();
        open.sort_unstable_by_key(|l| -l);
        open
    }

    /// Shape of the fully contracted network.
    pub fn output_shape(&self) -> Vec<usize> {
        let dims = self.label_dims();
        self.open_labels().iter().map(|l| dims[l]).collect()
    }

    /// Connected components of the label graph, each as sorted ids.
    pub fn components(&self) -> Vec<Vec<String>> {
        let n = self.tensors.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut owner: BTreeMap<i64, usize> = BTreeMap::new();
        for (i, t) in self.tensors.iter().enumerate() {
            for &l in t.labels.iter().filter(|&&l| l > 0) {
                if let Some(&j) = owner.get(&l) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                } else {
                    owner.insert(l, i);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(self.tensors[i].id.clone());
        }
        let mut comps: Vec<Vec<String>> = groups
            .into_values()
            .map(|mut g| {
                g.sort();
                g
            })
            .collect();
        comps.sort();
        comps
    }

    /// Label structure with ids sorted; shapes excluded.
    pub fn structure_key(&self) -> Vec<(String, Vec<i64>)> {
        let mut key: Vec<(String, Vec<i64>)> =
            self.tensors.iter().map(|t| (t.id.clone(), t.labels.clone())).collect();
        key.sort();
        key
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq1(chi: usize) -> NetworkSpec {
        NetworkSpec::new(vec![
            TensorSlot::new("A", vec![chi; 3], vec![1, -2, 2]),
            TensorSlot::new("B", vec![chi; 3], vec![-1, 1, 3]),
            TensorSlot::new("C", vec![chi; 3], vec![3, 2, -3]),
        ])
    }

    #[test]
    fn three_tensor_network_is_valid() {
        let spec = eq1(2);
        assert_eq!(spec.validate(), Ok(()));
        assert_eq!(spec.open_labels(), vec![-1, -2, -3]);
        assert_eq!(spec.output_shape(), vec![2, 2, 2]);
        assert_eq!(spec.components().len(), 1);
    }

    #[test]
    fn dangling_label_is_named() {
        let mut spec = eq1(2);
        spec.tensors[2].labels = vec![4, 2, -3];
        let v = spec.validate().unwrap_err();
        let text: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        assert!(text.iter().any(|t| t.contains("dangling internal label 3")), "{text:?}");
        assert!(text.iter().any(|t| t.contains("dangling internal label 4")), "{text:?}");
    }

    #[test]
    fn mismatched_dims_name_both_tensors() {
        let mut spec = eq1(2);
        spec.tensors[2].shape = vec![3, 2, 2];
        let v = spec.validate().unwrap_err();
        assert_eq!(v.len(), 1);
        let msg = v[0].to_string();
        assert!(msg.contains("\"B\"") && msg.contains("\"C\""), "{msg}");
    }

    #[test]
    fn other_violations() {
        let mut spec = eq1(2);
        spec.tensors[0].labels = vec![1, -4, 2];
        assert!(spec.validate().unwrap_err().contains(&Violation::OpenLabelGap { missing: -2 }));

        let mut spec = eq1(2);
        spec.tensors[0].labels = vec![1, 0, 2];
        assert!(spec.check().is_err());

        let mut spec = eq1(2);
        spec.tensors[1].id = "A".into();
        assert!(spec.validate().unwrap_err().contains(&Violation::DuplicateId("A".into())));

        let mut spec = eq1(2);
        spec.tensors[0].labels.pop();
        assert!(spec.check().is_err());

        assert_eq!(NetworkSpec::default().validate(), Err(vec![Violation::Empty]));
    }

    #[test]
    fn trace_lines_are_detected() {
        let t = TensorSlot::new("T", vec![2, 3, 2], vec![5, -1, 5]);
        assert_eq!(t.trace_pairs(), vec![(0, 2)]);
        assert_eq!(t.untraced_labels(), vec![(-1, 3)]);
        assert!(NetworkSpec::new(vec![t]).check().is_ok());
    }

    #[test]
    fn components_of_disjoint_pairs() {
        let spec = NetworkSpec::new(vec![
            TensorSlot::new("b", vec![2], vec![1]),
            TensorSlot::new("a", vec![2], vec![1]),
            TensorSlot::new("c", vec![2], vec![-1]),
        ]);
        assert_eq!(spec.components(), vec![vec!["a".to_string(), "b".into()], vec!["c".into()]]);
    }
}
