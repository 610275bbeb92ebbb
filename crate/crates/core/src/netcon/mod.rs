//! Whole-network contraction in the ncon labeling convention.

mod cache;
mod evaluate;
mod search;
mod spec;
mod tree;

pub use cache::{SequenceCache, DEFAULT_DRIFT};
pub use evaluate::contract_network;
pub use search::{default_sequence, search_sequence, Method, DP_MAX_TENSORS};
pub use spec::{NetworkSpec, TensorSlot, Violation};
pub use tree::{ContractionTree, Nested};
