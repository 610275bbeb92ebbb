//! Dense tensor-network kernels.
//!
//! - [`tensor`]: the [`DenseTensor`] value type, layout changes, norms,
//!   tensor traces and the unitary / isometry / projector predicates.
//! - [`contract`]: pairwise contraction via matrix multiplication and its
//!   exact multiplication count.
//! - [`netcon`]: ncon-style network specs, contraction-sequence search
//!   (subset dynamic programming and greedy), a sequence cache, and
//!   whole-network evaluation.
//! - [`decomp`]: spectral, QR and singular value decompositions of tensor
//!   unfoldings, optimal low-rank truncation and principal square roots.
//! - [`ttn`]: tree tensor networks, gauge transformations, orthogonality
//!   centers and truncation at a center.
//! - [`tnt`] and [`manifest`]: the binary tensor container and the JSON
//!   network manifest.

pub mod contract;
pub mod decomp;
pub mod error;
pub mod manifest;
pub mod netcon;
pub mod tensor;
pub mod tnt;
pub mod ttn;

pub use error::{Error, Result};
pub use tensor::{Bipartition, DenseTensor, ScalarKind, C64};
