//! JSON network manifests (version 1).
//!
//! ```json
//! {"version": 1,
//!  "tensors": [{"id": "A", "labels": [1, -1], "source": "A.tnt", "shape": [2, 3]}],
//!  "sequence": [["A", "B"], "C"],
//!  "center": "A",
//!  "orientation": {"1": "A"}}
//! ```
//!
//! `source` paths are relative to the manifest. Dimensions come from the
//! `.tnt` files; an optional `shape` must agree with them. `center` and
//! `orientation` (edge label to its center-ward endpoint) are written by
//! the tree gauge tools and ignored elsewhere.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcon::{ContractionTree, Nested, NetworkSpec, TensorSlot};
use crate::tensor::DenseTensor;
use crate::tnt;

pub const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct FileEntry {
    id: String,
    labels: Vec<i64>,
    source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shape: Option<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct File {
    version: u32,
    tensors: Vec<FileEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sequence: Option<Nested>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    center: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    orientation: BTreeMap<i64, String>,
}

/// A network read from (or ready to be written to) a manifest.
#[derive(Clone, Debug, Default)]
pub struct Network {
    pub spec: NetworkSpec,
    pub tensors: HashMap<String, DenseTensor>,
    pub center: Option<String>,
    pub orientation: BTreeMap<i64, String>,
    /// Source file per tensor id, relative to the manifest directory.
    pub sources: HashMap<String, String>,
}

impl Network {
    pub fn new(spec: NetworkSpec, tensors: HashMap<String, DenseTensor>) -> Self {
        Network { spec, tensors, ..Default::default() }
    }

    /// Builds the spec from tensors and labels given in order.
    pub fn from_tensors(items: Vec<(String, Vec<i64>, DenseTensor)>) -> Self {
        let mut slots = Vec::new();
        let mut tensors = HashMap::new();
        for (id, labels, t) in items {
            slots.push(TensorSlot::new(id.clone(), t.shape().to_vec(), labels));
            tensors.insert(id, t);
        }
        Network::new(NetworkSpec::new(slots), tensors)
    }
}

/// Reads a manifest and every tensor it references.
pub fn load(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let file: File = serde_json::from_str(&text)?;
    if file.version != VERSION {
        return Err(Error::Format(format!("unsupported manifest version {}", file.version)));
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut slots = Vec::with_capacity(file.tensors.len());
    let mut tensors = HashMap::new();
    let mut sources = HashMap::new();
    for e in file.tensors {
        if tensors.contains_key(&e.id) {
            return Err(Error::validation(format!("duplicate tensor id {:?} in manifest", e.id)));
        }
        let t = tnt::read(base.join(&e.source))?;
        if let Some(shape) = &e.shape {
            if shape.as_slice() != t.shape() {
                return Err(Error::validation(format!(
                    "manifest lists shape {:?} for {:?} but {} holds {:?}",
                    shape,
                    e.id,
                    e.source,
                    t.shape()
                )));
            }
        }
        slots.push(TensorSlot::new(e.id.clone(), t.shape().to_vec(), e.labels));
        sources.insert(e.id.clone(), e.source);
        tensors.insert(e.id, t);
    }
    let mut spec = NetworkSpec::new(slots);
    spec.check()?;
    if let Some(nested) = &file.sequence {
        spec = spec.clone().with_sequence(ContractionTree::annotate(&spec, nested)?);
    }
    if let Some(c) = &file.center {
        if spec.slot(c).is_none() {
            return Err(Error::validation(format!("center {c:?} is not a tensor of the manifest")));
        }
    }
    Ok(Network { spec, tensors, center: file.center, orientation: file.orientation, sources })
}

fn file_stem(id: &str) -> String {
    let s: String = id.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect();
    if s.is_empty() || s.starts_with('.') {
        format!("t{s}")
    } else {
        s
    }
}

/// Writes `net` as a manifest at `path`, with the tensors as `.tnt` files
/// next to it. Tensors keep their recorded source name when they have one.
pub fn save(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    net.spec.check()?;
    let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    if !base.as_os_str().is_empty() {
        std::fs::create_dir_all(&base)?;
    }
    let mut used = HashSet::new();
    let mut entries = Vec::with_capacity(net.spec.len());
    for slot in &net.spec.tensors {
        let t = net
            .tensors
            .get(&slot.id)
            .ok_or_else(|| Error::validation(format!("no tensor supplied for {:?}", slot.id)))?;
        if t.shape() != slot.shape.as_slice() {
            return Err(Error::validation(format!("tensor {:?} does not match its slot shape", slot.id)));
        }
        let mut source = net.sources.get(&slot.id).cloned().unwrap_or_else(|| format!("{}.tnt", file_stem(&slot.id)));
        let mut k = 1;
        while !used.insert(source.clone()) {
            source = format!("{}_{k}.tnt", file_stem(&slot.id));
            k += 1;
        }
        tnt::write(t, base.join(&source))?;
        entries.push(FileEntry { id: slot.id.clone(), labels: slot.labels.clone(), source, shape: Some(slot.shape.clone()) });
    }
    let file = File {
        version: VERSION,
        tensors: entries,
        sequence: net.spec.sequence.as_ref().map(ContractionTree::to_nested),
        center: net.center.clone(),
        orientation: net.orientation.clone(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}
