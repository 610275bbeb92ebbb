//! Dense matrix kernels on row-major `DenseTensor` matrices: Householder QR,
//! one-sided Jacobi SVD, cyclic Jacobi Hermitian eigensolver and Gaussian
//! elimination.
//!
//! All kernels work in complex arithmetic; a real input only ever meets real
//! rotations and reflections, so its factors come back exactly real. Every
//! routine applies a deterministic phase convention to its output.

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, ScalarKind, C64};

const MAX_SWEEPS: usize = 100;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Column-major scratch matrix; columns are the unit the kernels rotate.
#[derive(Clone)]
struct Cols {
    rows: usize,
    cols: Vec<Vec<C64>>,
}

impl Cols {
    fn from_tensor(m: &DenseTensor) -> Self {
        let (r, c) = (m.shape()[0], m.shape()[1]);
        let cols = (0..c).map(|j| (0..r).map(|i| m.data()[i * c + j]).collect()).collect();
        Cols { rows: r, cols }
    }

    fn identity(n: usize) -> Self {
        let cols = (0..n)
            .map(|j| (0..n).map(|i| if i == j { one() } else { zero() }).collect())
            .collect();
        Cols { rows: n, cols }
    }

    fn into_tensor(self, kind: ScalarKind) -> DenseTensor {
        let (r, c) = (self.rows, self.cols.len());
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            for col in &self.cols {
                let mut z = col[i];
                if kind == ScalarKind::Real {
                    z.im = 0.0;
                }
                data.push(z);
            }
        }
        DenseTensor::from_parts(vec![r, c], data, kind).expect("kernel output shape")
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sq(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

fn diagnostics(m: &DenseTensor) -> String {
    let s = m.shape();
    format!("{}x{} matrix, max-abs {:.3e}, norm {:.3e}", s[0], s[1], m.max_abs(), m.frobenius_norm())
}

/// Unit-modulus phase of `z` (1 for zero).
fn phase(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        one()
    } else {
        z / r
    }
}

/// Index of the first entry of largest magnitude.
fn pivot(col: &[C64]) -> usize {
    let mut best = 0;
    for (i, z) in col.iter().enumerate() {
        if z.norm() > col[best].norm() {
            best = i;
        }
    }
    best
}

/// Applies `[x_p, x_q] ← [x_p, x_q]·W` for the unitary
/// `W = [[c, s], [-s·e, c·e]]`.
fn rotate_pair(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, e: C64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (xp, xq) = (&mut lo[p], &mut hi[0]);
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let (u, v) = (*a, *b * e);
        *a = u * c - v * s;
        *b = u * s + v * c;
    }
}

/// Jacobi rotation parameters `(c, s)` for the real symmetric pair
/// `[[alpha, g], [g, beta]]` with `g > 0`.
fn jacobi_angle(alpha: f64, beta: f64, g: f64) -> (f64, f64) {
    let zeta = (beta - alpha) / (2.0 * g);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, c * t)
}

/// Householder QR: `Q` is `m×k`, `R` is `k×n` with `k = min(m, n)` and a
/// real non-negative diagonal.
pub(crate) fn qr(m: &DenseTensor) -> Result<(DenseTensor, DenseTensor)> {
    let (rows, ncols) = (m.shape()[0], m.shape()[1]);
    let k = rows.min(ncols);
    let mut a = Cols::from_tensor(m);
    let mut reflectors: Vec<Vec<C64>> = Vec::with_capacity(k);
    for j in 0..k {
        let x = &a.cols[j][j..];
        let xnorm = norm_sq(x).sqrt();
        let mut v = x.to_vec();
        if xnorm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = -phase(x[0]) * xnorm;
        v[0] -= alpha;
        let vnorm = norm_sq(&v).sqrt();
        if vnorm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        for col in a.cols[j..].iter_mut() {
            let w = dot(&v, &col[j..]) * 2.0;
            for (z, vi) in col[j..].iter_mut().zip(&v) {
                *z -= vi * w;
            }
        }
        for z in &mut a.cols[j][j + 1..] {
            *z = zero();
        }
        a.cols[j][j] = alpha;
        reflectors.push(v);
    }
    // Q = H_0 ⋯ H_{k-1} applied to the first k columns of the identity
    let mut q = Cols { rows, cols: (0..k).map(|j| (0..rows).map(|i| if i == j { one() } else { zero() }).collect()).collect() };
    for (j, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for col in q.cols.iter_mut() {
            let w = dot(v, &col[j..]) * 2.0;
            for (z, vi) in col[j..].iter_mut().zip(v) {
                *z -= vi * w;
            }
        }
    }
    // R from the upper triangle, then make its diagonal real non-negative
    let mut r = Cols { rows: k, cols: a.cols.iter().map(|c| c[..k].to_vec()).collect() };
    for (j, col) in r.cols.iter_mut().enumerate() {
        for z in col.iter_mut().skip(j + 1) {
            *z = zero();
        }
    }
    for j in 0..k {
        let ph = phase(r.cols[j][j]);
        if ph != one() {
            for z in q.cols[j].iter_mut() {
                *z *= ph;
            }
            let inv = ph.conj();
            for col in r.cols[j..].iter_mut() {
                col[j] *= inv;
            }
            r.cols[j][j] = C64::new(r.cols[j][j].re, 0.0);
        }
    }
    Ok((q.into_tensor(m.kind()), r.into_tensor(m.kind())))
}

/// Economical SVD `A = U·diag(s)·Vh`, singular values descending. In each
/// column of `U` the first entry of largest magnitude is real positive.
pub(crate) fn svd(m: &DenseTensor) -> Result<(DenseTensor, Vec<f64>, DenseTensor)> {
    let (rows, ncols) = (m.shape()[0], m.shape()[1]);
    if rows < ncols {
        let (u, s, vh) = svd_tall(&m.adjoint()?)?;
        // A = (A†)† = Vh†·S·U†; re-apply the phase convention to the new U
        let (u2, vh2) = (vh.adjoint()?, u.adjoint()?);
        let (u2, vh2) = fix_phases(u2, vh2);
        return Ok((u2, s, vh2));
    }
    let (u, s, vh) = svd_tall(m)?;
    let (u, vh) = fix_phases(u, vh);
    Ok((u, s, vh))
}

fn fix_phases(u: DenseTensor, vh: DenseTensor) -> (DenseTensor, DenseTensor) {
    let (kind_u, kind_v) = (u.kind(), vh.kind());
    let mut uc = Cols::from_tensor(&u);
    let mut vc = Cols::from_tensor(&vh.adjoint().expect("matrix"));
    for j in 0..uc.cols.len() {
        let p = pivot(&uc.cols[j]);
        let ph = phase(uc.cols[j][p]);
        if ph != one() {
            let inv = ph.conj();
            for z in uc.cols[j].iter_mut() {
                *z *= inv;
            }
            for z in vc.cols[j].iter_mut() {
                *z *= inv;
            }
            uc.cols[j][p] = C64::new(uc.cols[j][p].re, 0.0);
        }
    }
    let vh = vc.into_tensor(kind_v).adjoint().expect("matrix");
    (uc.into_tensor(kind_u), vh)
}

/// SVD of an `m×n` matrix with `m ≥ n`: QR first, then one-sided Jacobi on
/// the triangular factor.
fn svd_tall(m: &DenseTensor) -> Result<(DenseTensor, Vec<f64>, DenseTensor)> {
    let kind = m.kind();
    let n = m.shape()[1];
    let (q, r) = qr(m)?;
    let mut g = Cols::from_tensor(&r);
    let mut v = Cols::identity(n);
    let tol = f64::EPSILON;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for qi in p + 1..n {
                let alpha = norm_sq(&g.cols[p]);
                let beta = norm_sq(&g.cols[qi]);
                let gamma = dot(&g.cols[p], &g.cols[qi]);
                let gabs = gamma.norm();
                if alpha == 0.0 || beta == 0.0 || gabs <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let e = (gamma / gabs).conj();
                let (c, s) = jacobi_angle(alpha, beta, gabs);
                rotate_pair(&mut g.cols, p, qi, c, s, e);
                rotate_pair(&mut v.cols, p, qi, c, s, e);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical(format!("Jacobi SVD did not converge on {}", diagnostics(m))));
    }

    let norms: Vec<f64> = g.cols.iter().map(|c| norm_sq(c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();

    let mut ur = Cols { rows: n, cols: Vec::with_capacity(n) };
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            ur.cols.push(g.cols[j].iter().map(|z| z / norms[j]).collect());
        } else {
            ur.cols.push(vec![zero(); n]);
            missing.push(slot);
        }
    }
    complete_basis(&mut ur, &missing);
    let vs = Cols { rows: n, cols: order.iter().map(|&j| v.cols[j].clone()).collect() };

    let u = q.matmul(&ur.into_tensor(kind))?;
    let vh = vs.into_tensor(kind).adjoint()?;
    Ok((u, s, vh))
}

/// Fills the listed columns with unit vectors orthogonal to all others.
fn complete_basis(u: &mut Cols, missing: &[usize]) {
    let n = u.rows;
    let mut candidate = 0usize;
    for &slot in missing {
        loop {
            let mut e = vec![zero(); n];
            e[candidate % n] = one();
            candidate += 1;
            // two passes of Gram-Schmidt against every filled column
            for _ in 0..2 {
                for (j, col) in u.cols.iter().enumerate() {
                    if j == slot || (missing.contains(&j) && norm_sq(col) == 0.0) {
                        continue;
                    }
                    let w = dot(col, &e);
                    for (z, c) in e.iter_mut().zip(col) {
                        *z -= c * w;
                    }
                }
            }
            let nrm = norm_sq(&e).sqrt();
            if nrm > 1e-8 {
                u.cols[slot] = e.into_iter().map(|z| z / nrm).collect();
                break;
            }
            if candidate > 2 * n {
                unreachable!("an orthogonal complement vector always exists");
            }
        }
    }
}

/// Eigen-decomposition `H = U·diag(λ)·U†` of a Hermitian matrix by cyclic
/// Jacobi rotations; eigenvalues descending. In each eigenvector the first
/// entry of largest magnitude is real positive.
pub(crate) fn eigh(h: &DenseTensor) -> Result<(Vec<f64>, DenseTensor)> {
    let n = h.shape()[0];
    let mut a: Vec<Vec<C64>> = (0..n).map(|i| h.data()[i * n..(i + 1) * n].to_vec()).collect();
    for (i, row) in a.iter_mut().enumerate() {
        row[i].im = 0.0;
    }
    let mut v = Cols::identity(n);
    let scale = h.frobenius_norm();
    let floor = f64::EPSILON * f64::EPSILON * scale;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let b = a[p][q];
                let babs = b.norm();
                let (app, aqq) = (a[p][p].re, a[q][q].re);
                if babs <= floor || babs <= f64::EPSILON * 1e-2 * (app.abs() * aqq.abs()).sqrt() {
                    continue;
                }
                rotated = true;
                let e = (b / babs).conj();
                let (c, s) = jacobi_angle(app, aqq, babs);
                // columns: A ← A·W
                for row in a.iter_mut() {
                    let (u, w) = (row[p], row[q] * e);
                    row[p] = u * c - w * s;
                    row[q] = u * s + w * c;
                }
                // rows: A ← W†·A
                let ec = e.conj();
                for k in 0..n {
                    let (u, w) = (a[p][k], a[q][k] * ec);
                    a[p][k] = u * c - w * s;
                    a[q][k] = u * s + w * c;
                }
                a[p][q] = zero();
                a[q][p] = zero();
                a[p][p].im = 0.0;
                a[q][q].im = 0.0;
                rotate_pair(&mut v.cols, p, q, c, s, e);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::numerical(format!("Jacobi eigensolver did not converge on {}", diagnostics(h))));
    }
    let vals: Vec<f64> = (0..n).map(|i| a[i][i].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| vals[y].total_cmp(&vals[x]).then(x.cmp(&y)));
    let mut vecs = Cols { rows: n, cols: Vec::with_capacity(n) };
    for &j in &order {
        let mut col = v.cols[j].clone();
        let p = pivot(&col);
        let inv = phase(col[p]).conj();
        for z in col.iter_mut() {
            *z *= inv;
        }
        col[p].im = 0.0;
        vecs.cols.push(col);
    }
    Ok((order.iter().map(|&j| vals[j]).collect(), vecs.into_tensor(h.kind())))
}

/// Inverse of a square matrix (Gaussian elimination with partial pivoting)
/// together with its 2-norm condition number.
pub(crate) fn inverse(m: &DenseTensor) -> Result<(DenseTensor, f64)> {
    let n = m.shape()[0];
    if m.order() != 2 || m.shape()[1] != n {
        return Err(Error::validation(format!("inverse needs a square matrix, got {:?}", m.shape())));
    }
    let (_, s, _) = svd(m)?;
    let cond = match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    };
    if !cond.is_finite() {
        return Err(Error::validation(format!("matrix is singular ({})", diagnostics(m))));
    }
    let mut a: Vec<Vec<C64>> = (0..n).map(|i| m.data()[i * n..(i + 1) * n].to_vec()).collect();
    let mut inv: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| if i == j { one() } else { zero() }).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm())).expect("nonempty");
        if a[piv][col].norm() == 0.0 {
            return Err(Error::validation(format!("matrix is singular ({})", diagnostics(m))));
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != zero() {
                    for j in 0..n {
                        let (x, y) = (a[col][j], inv[col][j]);
                        a[r][j] -= f * x;
                        inv[r][j] -= f * y;
                    }
                }
            }
        }
    }
    let data = inv.into_iter().flatten().collect();
    Ok((DenseTensor::from_parts(vec![n, n], data, m.kind())?, cond))
}
