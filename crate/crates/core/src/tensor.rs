//! Dense tensors stored row-major (last index fastest).
//!
//! Every tensor keeps its elements as `Complex64`. The [`ScalarKind`] tag
//! records whether the values are meant to be real; real tensors always have
//! zero imaginary parts, and arithmetic on them is exact with respect to the
//! equivalent `f64` computation. Mixed operations promote to complex.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default absolute tolerance for the special-tensor predicates.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Real,
    Complex,
}

impl ScalarKind {
    /// Kind of the result of combining values of both kinds.
    pub fn join(self, other: ScalarKind) -> ScalarKind {
        if self == ScalarKind::Complex || other == ScalarKind::Complex {
            ScalarKind::Complex
        } else {
            ScalarKind::Real
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
    kind: ScalarKind,
}

pub(crate) fn check_shape(shape: &[usize]) -> Result<usize> {
    let mut total: usize = 1;
    for (i, &d) in shape.iter().enumerate() {
        if d == 0 {
            return Err(Error::validation(format!("dimension {i} is zero in shape {shape:?}")));
        }
        total = total
            .checked_mul(d)
            .ok_or_else(|| Error::validation(format!("shape {shape:?} overflows usize")))?;
    }
    Ok(total)
}

/// Row-major strides for `shape`.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

impl DenseTensor {
    /// Builds a tensor from complex data, validating the length. A `Real` kind
    /// requires every imaginary part to be exactly zero.
    pub fn from_parts(shape: Vec<usize>, data: Vec<C64>, kind: ScalarKind) -> Result<Self> {
        let total = check_shape(&shape)?;
        if data.len() != total {
            return Err(Error::validation(format!(
                "data length {} does not match shape {:?} (expected {})",
                data.len(),
                shape,
                total
            )));
        }
        if kind == ScalarKind::Real && data.iter().any(|z| z.im != 0.0) {
            return Err(Error::validation("real tensor has non-zero imaginary parts"));
        }
        Ok(DenseTensor { shape, data, kind })
    }

    pub fn from_real(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let data = data.into_iter().map(|x| C64::new(x, 0.0)).collect();
        Self::from_parts(shape, data, ScalarKind::Real)
    }

    pub fn from_complex(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        Self::from_parts(shape, data, ScalarKind::Complex)
    }

    /// Builds a tensor by evaluating `f` at every multi-index in row-major order.
    pub fn from_fn(
        shape: Vec<usize>,
        kind: ScalarKind,
        mut f: impl FnMut(&[usize]) -> C64,
    ) -> Result<Self> {
        let total = check_shape(&shape)?;
        let mut data = Vec::with_capacity(total);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..total {
            let mut z = f(&idx);
            if kind == ScalarKind::Real {
                z.im = 0.0;
            }
            data.push(z);
            increment(&mut idx, &shape);
        }
        Ok(DenseTensor { shape, data, kind })
    }

    pub fn zeros(shape: Vec<usize>, kind: ScalarKind) -> Result<Self> {
        let total = check_shape(&shape)?;
        Ok(DenseTensor { shape, data: vec![C64::new(0.0, 0.0); total], kind })
    }

    pub fn ones(shape: Vec<usize>, kind: ScalarKind) -> Result<Self> {
        let total = check_shape(&shape)?;
        Ok(DenseTensor { shape, data: vec![C64::new(1.0, 0.0); total], kind })
    }

    /// Order-0 tensor.
    pub fn scalar(value: C64) -> Self {
        let kind = if value.im == 0.0 { ScalarKind::Real } else { ScalarKind::Complex };
        DenseTensor { shape: Vec::new(), data: vec![value], kind }
    }

    /// `n × n` real identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = C64::new(1.0, 0.0);
        }
        DenseTensor { shape: vec![n, n], data, kind: ScalarKind::Real }
    }

    /// Square diagonal matrix with the given real entries.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for (i, &v) in values.iter().enumerate() {
            data[i * n + i] = C64::new(v, 0.0);
        }
        DenseTensor { shape: vec![n, n], data, kind: ScalarKind::Real }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    /// Total dimension (number of elements).
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn kind(&self) -> ScalarKind {
        self.kind
    }

    pub fn is_real(&self) -> bool {
        self.kind == ScalarKind::Real
    }

    pub fn get(&self, idx: &[usize]) -> Option<C64> {
        if idx.len() != self.shape.len() || idx.iter().zip(&self.shape).any(|(i, d)| i >= d) {
            return None;
        }
        let off: usize = idx.iter().zip(strides(&self.shape)).map(|(i, s)| i * s).sum();
        Some(self.data[off])
    }

    /// Value of an order-0 tensor, or of any tensor with a single element.
    pub fn scalar_value(&self) -> Option<C64> {
        (self.data.len() == 1).then(|| self.data[0])
    }

    /// Relabels the kind to complex. Data is unchanged.
    pub fn into_complex(mut self) -> Self {
        self.kind = ScalarKind::Complex;
        self
    }

    /// Drops imaginary parts when every one of them is below `tol` in
    /// magnitude relative to the largest element; otherwise returns `self`
    /// unchanged.
    pub fn realify(mut self, tol: f64) -> Self {
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        if self.data.iter().all(|z| z.im.abs() <= tol * scale) {
            for z in &mut self.data {
                z.im = 0.0;
            }
            self.kind = ScalarKind::Real;
        }
        self
    }

    pub fn scale(&self, factor: C64) -> Self {
        let kind = if factor.im == 0.0 { self.kind } else { ScalarKind::Complex };
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z * factor).collect(),
            kind,
        }
    }

    /// Element-wise `self - other`.
    pub fn sub(&self, other: &DenseTensor) -> Result<Self> {
        same_shape(self, other)?;
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
            kind: self.kind.join(other.kind),
        })
    }

    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        validate_permutation(perm, self.order())?;
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let src_strides = strides(&self.shape);
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let step: Vec<usize> = perm.iter().map(|&p| src_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; shape.len()];
        let mut offset = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[offset]);
            // odometer increment tracking the source offset
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                offset += step[ax];
                if idx[ax] < shape[ax] {
                    break;
                }
                offset -= step[ax] * shape[ax];
                idx[ax] = 0;
            }
        }
        Ok(DenseTensor { shape, data, kind: self.kind })
    }

    /// Merges consecutive runs of indices. `groups` must list every index
    /// position exactly once, in ascending order.
    pub fn reshape_group(&self, groups: &[Vec<usize>]) -> Result<Self> {
        let mut next = 0usize;
        let mut shape = Vec::with_capacity(groups.len());
        for g in groups {
            if g.is_empty() {
                return Err(Error::validation("empty index group"));
            }
            let mut dim = 1usize;
            for &ax in g {
                if ax != next || ax >= self.order() {
                    return Err(Error::validation(format!(
                        "grouping {groups:?} is not a consecutive run cover of 0..{}; permute first",
                        self.order()
                    )));
                }
                dim *= self.shape[ax];
                next += 1;
            }
            shape.push(dim);
        }
        if next != self.order() {
            return Err(Error::validation(format!(
                "grouping {groups:?} does not cover all {} indices",
                self.order()
            )));
        }
        Ok(DenseTensor { shape, data: self.data.clone(), kind: self.kind })
    }

    /// Reinterprets the data with a new shape of equal total dimension.
    pub fn reshape(&self, shape: Vec<usize>) -> Result<Self> {
        let total = check_shape(&shape)?;
        if total != self.data.len() {
            return Err(Error::validation(format!(
                "cannot reshape {:?} into {:?}",
                self.shape, shape
            )));
        }
        Ok(DenseTensor { shape, data: self.data.clone(), kind: self.kind })
    }

    pub fn conjugate(&self) -> Self {
        match self.kind {
            ScalarKind::Real => self.clone(),
            ScalarKind::Complex => DenseTensor {
                shape: self.shape.clone(),
                data: self.data.iter().map(|z| z.conj()).collect(),
                kind: self.kind,
            },
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest element magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Matrix unfolding across `p`: rows enumerate the row group, columns the
    /// column group, both in row-major order of their listed indices.
    pub fn unfold(&self, p: &Bipartition) -> Result<Self> {
        if p.order() != self.order() {
            return Err(Error::validation(format!(
                "bipartition covers {} indices, tensor has order {}",
                p.order(),
                self.order()
            )));
        }
        let perm: Vec<usize> = p.rows.iter().chain(&p.cols).copied().collect();
        let (d1, d2) = p.dims(&self.shape);
        self.permute(&perm)?.reshape(vec![d1, d2])
    }

    /// Conjugate transpose of a matrix.
    pub fn adjoint(&self) -> Result<Self> {
        if self.order() != 2 {
            return Err(Error::validation(format!("adjoint needs a matrix, got order {}", self.order())));
        }
        Ok(self.permute(&[1, 0])?.conjugate())
    }

    /// Matrix product of two order-2 tensors.
    pub fn matmul(&self, other: &DenseTensor) -> Result<Self> {
        if self.order() != 2 || other.order() != 2 || self.shape[1] != other.shape[0] {
            return Err(Error::validation(format!(
                "cannot multiply {:?} by {:?}",
                self.shape, other.shape
            )));
        }
        let (m, k, n) = (self.shape[0], self.shape[1], other.shape[1]);
        Ok(DenseTensor {
            shape: vec![m, n],
            data: gemm(m, k, n, &self.data, &other.data),
            kind: self.kind.join(other.kind),
        })
    }
}

/// Row-major `m×k` times `k×n`.
pub(crate) fn gemm(m: usize, k: usize, n: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); m * n];
    for i in 0..m {
        let row = &mut c[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip.re == 0.0 && aip.im == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (cj, bj) in row.iter_mut().zip(brow) {
                *cj += aip * bj;
            }
        }
    }
    c
}

/// Advances a row-major multi-index; wraps to all zeros after the last one.
pub(crate) fn increment(idx: &mut [usize], shape: &[usize]) {
    for ax in (0..shape.len()).rev() {
        idx[ax] += 1;
        if idx[ax] < shape[ax] {
            return;
        }
        idx[ax] = 0;
    }
}

pub(crate) fn validate_permutation(perm: &[usize], order: usize) -> Result<()> {
    if perm.len() != order {
        return Err(Error::validation(format!(
            "permutation {perm:?} has length {} but tensor has order {order}",
            perm.len()
        )));
    }
    let mut seen = vec![false; order];
    for &p in perm {
        if p >= order || seen[p] {
            return Err(Error::validation(format!("{perm:?} is not a permutation of 0..{order}")));
        }
        seen[p] = true;
    }
    Ok(())
}

fn same_shape(a: &DenseTensor, b: &DenseTensor) -> Result<()> {
    if a.shape != b.shape {
        return Err(Error::validation(format!("shape mismatch: {:?} vs {:?}", a.shape, b.shape)));
    }
    Ok(())
}

/// Tensor trace: sum over all multi-indices of `a[idx] * b[idx]`.
///
/// Pass `a.conjugate()` to obtain the inner product `Ttr(A†, B)`.
pub fn ttr(a: &DenseTensor, b: &DenseTensor) -> Result<C64> {
    same_shape(a, b)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum())
}

/// `‖a − b‖`, evaluated element-wise.
///
/// For real tensors this equals `sqrt(Ttr(a†,a) − 2|Ttr(a†,b)| + Ttr(b†,b))`
/// whenever the overlap is non-negative; with a phase on the overlap the
/// modulus form is only a lower bound.
pub fn difference_norm(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    same_shape(a, b)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt())
}

/// The three-term overlap expansion of `‖a − b‖²` with a modulus on the
/// cross term.
pub fn overlap_expansion_sq(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    let aa = ttr(&a.conjugate(), a)?.re;
    let ab = ttr(&a.conjugate(), b)?.norm();
    let bb = ttr(&b.conjugate(), b)?.re;
    Ok(aa - 2.0 * ab + bb)
}

/// Split of a tensor's index positions into a row group and a column group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Bipartition {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>, order: usize) -> Result<Self> {
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::validation("both groups of a bipartition must be nonempty"));
        }
        let mut seen = vec![false; order];
        for &ax in rows.iter().chain(&cols) {
            if ax >= order {
                return Err(Error::validation(format!("index {ax} out of range for order {order}")));
            }
            if seen[ax] {
                return Err(Error::validation(format!("index {ax} appears twice in bipartition")));
            }
            seen[ax] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::validation(format!("index {missing} missing from bipartition")));
        }
        Ok(Bipartition { rows, cols })
    }

    /// The matrix bipartition `{0} / {1}`.
    pub fn matrix() -> Self {
        Bipartition { rows: vec![0], cols: vec![1] }
    }

    /// First `split` indices as rows, the rest as columns.
    pub fn split_at(split: usize, order: usize) -> Result<Self> {
        Self::new((0..split).collect(), (split..order).collect(), order)
    }

    /// Parses `"0,1/2,3"`.
    pub fn parse(text: &str, order: usize) -> Result<Self> {
        let (r, c) = text
            .split_once('/')
            .ok_or_else(|| Error::validation(format!("partition {text:?} has no '/'")))?;
        let group = |s: &str| -> Result<Vec<usize>> {
            s.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::validation(format!("bad index {t:?} in partition {text:?}")))
                })
                .collect()
        };
        Self::new(group(r)?, group(c)?, order)
    }

    pub fn order(&self) -> usize {
        self.rows.len() + self.cols.len()
    }

    /// `(d₁, d₂)`: products of the row-group and column-group dimensions.
    pub fn dims(&self, shape: &[usize]) -> (usize, usize) {
        let d1 = self.rows.iter().map(|&i| shape[i]).product();
        let d2 = self.cols.iter().map(|&i| shape[i]).product();
        (d1, d2)
    }

    pub fn transposed(&self) -> Self {
        Bipartition { rows: self.cols.clone(), cols: self.rows.clone() }
    }
}

impl std::fmt::Display for Bipartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{}/{}", join(&self.rows), join(&self.cols))
    }
}

/// Outcome of a special-tensor predicate.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub holds: bool,
    /// Max-abs deviation from the defining identity (infinite when the
    /// dimensions rule it out).
    pub deviation: f64,
    pub reason: Option<String>,
}

impl Verdict {
    fn from_deviation(deviation: f64, tol: f64) -> Self {
        let holds = deviation <= tol;
        let reason = (!holds).then(|| format!("max deviation {deviation:.3e} exceeds {tol:.1e}"));
        Verdict { holds, deviation, reason }
    }

    fn rejected(reason: String) -> Self {
        Verdict { holds: false, deviation: f64::INFINITY, reason: Some(reason) }
    }
}

fn deviation_from_identity(m: &DenseTensor) -> f64 {
    let n = m.shape()[0];
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..m.shape()[1] {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m.data[i * m.shape()[1] + j] - target).norm());
        }
    }
    worst
}

/// `W†W = I` across `p`, requiring `d₁ ≥ d₂`.
pub fn is_isometry(t: &DenseTensor, p: &Bipartition, tol: f64) -> Verdict {
    let w = match t.unfold(p) {
        Ok(w) => w,
        Err(e) => return Verdict::rejected(e.to_string()),
    };
    let (d1, d2) = (w.shape[0], w.shape[1]);
    if d1 < d2 {
        return Verdict::rejected(format!("d1 = {d1} < d2 = {d2}: cannot be an isometry"));
    }
    let wdw = w.adjoint().and_then(|wd| wd.matmul(&w)).expect("matrix shapes agree");
    Verdict::from_deviation(deviation_from_identity(&wdw), tol)
}

/// `U†U = UU† = I` across `p`, requiring `d₁ = d₂`.
pub fn is_unitary(t: &DenseTensor, p: &Bipartition, tol: f64) -> Verdict {
    let u = match t.unfold(p) {
        Ok(u) => u,
        Err(e) => return Verdict::rejected(e.to_string()),
    };
    let (d1, d2) = (u.shape[0], u.shape[1]);
    if d1 != d2 {
        return Verdict::rejected(format!("d1 = {d1} != d2 = {d2}: cannot be unitary"));
    }
    let ud = u.adjoint().expect("matrix");
    let left = deviation_from_identity(&ud.matmul(&u).expect("square"));
    let right = deviation_from_identity(&u.matmul(&ud).expect("square"));
    Verdict::from_deviation(left.max(right), tol)
}

/// `P = P†` and `P² = P` for a square matrix.
pub fn is_projector(m: &DenseTensor, tol: f64) -> Verdict {
    if m.order() != 2 || m.shape[0] != m.shape[1] {
        return Verdict::rejected(format!("projector needs a square matrix, got shape {:?}", m.shape));
    }
    let md = m.adjoint().expect("matrix");
    let hermitian = md.sub(m).expect("same shape").max_abs();
    let idempotent = m.matmul(m).and_then(|mm| mm.sub(m)).expect("square").max_abs();
    Verdict::from_deviation(hermitian.max(idempotent), tol)
}
