use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use crate::error::Result;
use crate::netcon::search::{search_sequence, Method};
use crate::netcon::spec::NetworkSpec;
use crate::netcon::tree::ContractionTree;

/// Default tolerated ratio between current and cached bond dimensions.
pub const DEFAULT_DRIFT: f64 = 2.0;

type StructureKey = Vec<(String, Vec<i64>)>;

struct Entry {
    dims: BTreeMap<i64, usize>,
    tree: ContractionTree,
}

/// Contraction sequences keyed by label structure, reused while every bond
/// dimension stays within a factor `drift` of the dimensions the sequence
/// was searched for.
pub struct SequenceCache {
    method: Method,
    drift: f64,
    entries: RwLock<HashMap<StructureKey, Entry>>,
    searches: AtomicUsize,
}

impl Default for SequenceCache {
    fn default() -> Self {
        Self::new(Method::Dp, DEFAULT_DRIFT)
    }
}

impl SequenceCache {
    pub fn new(method: Method, drift: f64) -> Self {
        SequenceCache { method, drift: drift.max(1.0), entries: RwLock::new(HashMap::new()), searches: AtomicUsize::new(0) }
    }

    /// Number of searches performed so far.
    pub fn searches(&self) -> usize {
        self.searches.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn within_drift(&self, cached: &BTreeMap<i64, usize>, current: &BTreeMap<i64, usize>) -> bool {
        cached.len() == current.len()
            && cached.iter().all(|(l, &d0)| {
                current.get(l).is_some_and(|&d| {
                    let (lo, hi) = if d < d0 { (d, d0) } else { (d0, d) };
                    hi as f64 <= self.drift * lo as f64
                })
            })
    }

    /// Cached tree for `spec` (costs re-evaluated at the current
    /// dimensions), or a freshly searched one that replaces the entry.
    pub fn cached_sequence(&self, spec: &NetworkSpec) -> Result<ContractionTree> {
        spec.check()?;
        let key = spec.structure_key();
        let dims = spec.label_dims();
        {
            let entries = self.entries.read().expect("cache lock");
            if let Some(entry) = entries.get(&key) {
                if self.within_drift(&entry.dims, &dims) {
                    return ContractionTree::annotate(spec, &entry.tree.to_nested());
                }
            }
        }
        self.searches.fetch_add(1, Ordering::Relaxed);
        let tree = search_sequence(spec, self.method)?;
        self.entries.write().expect("cache lock").insert(key, Entry { dims, tree: tree.clone() });
        Ok(tree)
    }
}
