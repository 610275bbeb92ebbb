//! Pairwise contraction as matrix multiplication, and its exact cost.

use crate::error::{Error, Result};
use crate::tensor::{gemm, increment, strides, DenseTensor, C64};

/// Index positions of `a` and `b` contracted against each other, pairwise.
/// Empty lists give the outer product.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairContraction {
    pub a_axes: Vec<usize>,
    pub b_axes: Vec<usize>,
}

impl PairContraction {
    pub fn new(a_axes: Vec<usize>, b_axes: Vec<usize>) -> Self {
        PairContraction { a_axes, b_axes }
    }

    pub fn outer() -> Self {
        Self::default()
    }

    pub fn validate(&self, shape_a: &[usize], shape_b: &[usize]) -> Result<()> {
        if self.a_axes.len() != self.b_axes.len() {
            return Err(Error::validation(format!(
                "contraction lists differ in length: {:?} vs {:?}",
                self.a_axes, self.b_axes
            )));
        }
        check_axes("a", &self.a_axes, shape_a.len())?;
        check_axes("b", &self.b_axes, shape_b.len())?;
        for (&i, &j) in self.a_axes.iter().zip(&self.b_axes) {
            if shape_a[i] != shape_b[j] {
                return Err(Error::validation(format!(
                    "dimension mismatch: a axis {i} has {} but b axis {j} has {}",
                    shape_a[i], shape_b[j]
                )));
            }
        }
        Ok(())
    }

    fn free_axes(axes: &[usize], order: usize) -> Vec<usize> {
        (0..order).filter(|ax| !axes.contains(ax)).collect()
    }
}

fn check_axes(name: &str, axes: &[usize], order: usize) -> Result<()> {
    let mut seen = vec![false; order];
    for &ax in axes {
        if ax >= order {
            return Err(Error::validation(format!("{name} axis {ax} out of range for order {order}")));
        }
        if seen[ax] {
            return Err(Error::validation(format!("{name} axis {ax} repeated")));
        }
        seen[ax] = true;
    }
    Ok(())
}

/// Multiplication count `|dim A|·|dim B| / |dim A∩B|`.
pub fn pair_cost(shape_a: &[usize], shape_b: &[usize], pc: &PairContraction) -> Result<u64> {
    pc.validate(shape_a, shape_b)?;
    let prod = |s: &[usize]| s.iter().fold(1u128, |acc, &d| acc * d as u128);
    let shared: u128 = pc.a_axes.iter().map(|&i| shape_a[i] as u128).product();
    let cost = prod(shape_a)
        .checked_mul(prod(shape_b))
        .map(|c| c / shared)
        .filter(|&c| c <= 1u128 << 63)
        .ok_or_else(|| {
            Error::CostOverflow(format!("contracting {shape_a:?} with {shape_b:?} exceeds 2^63"))
        })?;
    Ok(cost as u64)
}

/// Contracts `a` with `b`. Result indices: free indices of `a` in their
/// original order, then free indices of `b` in theirs.
pub fn contract_pair(a: &DenseTensor, b: &DenseTensor, pc: &PairContraction) -> Result<DenseTensor> {
    pc.validate(a.shape(), b.shape())?;
    let free_a = PairContraction::free_axes(&pc.a_axes, a.order());
    let free_b = PairContraction::free_axes(&pc.b_axes, b.order());
    let out_shape: Vec<usize> = free_a
        .iter()
        .map(|&i| a.shape()[i])
        .chain(free_b.iter().map(|&j| b.shape()[j]))
        .collect();
    let kind = a.kind().join(b.kind());

    // A single-element operand only rescales the other one; every contracted
    // or free axis it owns has dimension 1.
    if a.len() == 1 || b.len() == 1 {
        let (s, other) = if a.len() == 1 { (a.data()[0], b) } else { (b.data()[0], a) };
        let data: Vec<C64> = other.data().iter().map(|z| s * z).collect();
        return DenseTensor::from_parts(out_shape, data, kind);
    }

    let d_free_a: usize = free_a.iter().map(|&i| a.shape()[i]).product();
    let d_free_b: usize = free_b.iter().map(|&j| b.shape()[j]).product();
    let d_shared: usize = pc.a_axes.iter().map(|&i| a.shape()[i]).product();

    let perm_a: Vec<usize> = free_a.iter().chain(&pc.a_axes).copied().collect();
    let perm_b: Vec<usize> = pc.b_axes.iter().chain(&free_b).copied().collect();
    let am = a.permute(&perm_a)?;
    let bm = b.permute(&perm_b)?;
    let data = gemm(d_free_a, d_shared, d_free_b, am.data(), bm.data());
    DenseTensor::from_parts(out_shape, data, kind)
}

/// Sums over the diagonal of each listed axis pair. Remaining axes keep their
/// relative order.
pub fn partial_trace(t: &DenseTensor, pairs: &[(usize, usize)]) -> Result<DenseTensor> {
    if pairs.is_empty() {
        return Ok(t.clone());
    }
    let order = t.order();
    let traced: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    check_axes("trace", &traced, order)?;
    for &(i, j) in pairs {
        if t.shape()[i] != t.shape()[j] {
            return Err(Error::validation(format!(
                "trace over axes {i} and {j} with unequal dimensions {} and {}",
                t.shape()[i],
                t.shape()[j]
            )));
        }
    }
    let keep: Vec<usize> = (0..order).filter(|ax| !traced.contains(ax)).collect();
    let out_shape: Vec<usize> = keep.iter().map(|&ax| t.shape()[ax]).collect();
    let trace_shape: Vec<usize> = pairs.iter().map(|&(i, _)| t.shape()[i]).collect();
    let src = strides(t.shape());
    let out_len: usize = out_shape.iter().product();
    let trace_len: usize = trace_shape.iter().product();

    let mut data = Vec::with_capacity(out_len);
    let mut out_idx = vec![0usize; out_shape.len()];
    for _ in 0..out_len {
        let base: usize = keep.iter().zip(&out_idx).map(|(&ax, &i)| i * src[ax]).sum();
        let mut acc = C64::new(0.0, 0.0);
        let mut tr_idx = vec![0usize; pairs.len()];
        for _ in 0..trace_len {
            let off: usize = pairs
                .iter()
                .zip(&tr_idx)
                .map(|(&(i, j), &k)| k * (src[i] + src[j]))
                .sum();
            acc += t.data()[base + off];
            increment(&mut tr_idx, &trace_shape);
        }
        data.push(acc);
        increment(&mut out_idx, &out_shape);
    }
    DenseTensor::from_parts(out_shape, data, t.kind())
}
