//! Spectral, QR and singular value decompositions of tensor unfoldings, and
//! optimal low-rank truncation.
//!
//! A tensor is unfolded across a [`Bipartition`] into a `d₁ × d₂` matrix. The
//! left factor keeps the row-group indices followed by one new internal
//! index; the right factor (when there is one) starts with the internal index
//! followed by the column-group indices.

mod kernels;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Bipartition, DenseTensor};

pub(crate) use kernels::{inverse, qr as qr_matrix, svd as svd_matrix};

/// Relative asymmetry tolerated by [`spectral`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Singular values below this fraction of the largest count as zero.
pub const ZERO_RELATIVE: f64 = 1e-14;
/// Relative gap below which the truncation boundary is flagged degenerate.
pub const DEGENERACY_GAP: f64 = 1e-12;
/// Default relative eigenvalue cutoff for [`principal_sqrt`].
pub const SQRT_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorKind {
    Spectral,
    Qr,
    Svd,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    /// Retained rank.
    pub rank: usize,
    /// `Σ_{k>r} s_k²`.
    pub discarded_weight: f64,
    /// `sqrt(discarded_weight)`, the Frobenius error of the truncation.
    pub error: f64,
    /// The kept and discarded values at the boundary are (nearly) equal, so
    /// the retained subspace is not unique.
    pub degenerate: bool,
}

/// Result of a decomposition across a bipartition.
///
/// `factors` holds `[U, S, Vh]` for SVD (with `A = U·S·Vh`), `[Q, R]` for
/// QR and `[U, D]` for the spectral decomposition (`H = U·D·U†`). `S` and `D`
/// are stored as diagonal matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    pub kind: FactorKind,
    pub factors: Vec<DenseTensor>,
    /// Singular values, or eigenvalue magnitudes, in descending order.
    pub spectrum: Vec<f64>,
    /// Signed eigenvalues in the order of the columns of `U` (spectral only).
    pub eigenvalues: Vec<f64>,
    pub bipartition: Bipartition,
    /// Shape of the decomposed tensor.
    pub shape: Vec<usize>,
    pub report: TruncationReport,
}

impl Factorization {
    fn factor(&self, i: usize) -> &DenseTensor {
        &self.factors[i]
    }

    /// `U`, `Q`, or the eigenvectors.
    pub fn left(&self) -> &DenseTensor {
        self.factor(0)
    }

    /// `S`, `R`, or `D`.
    pub fn middle(&self) -> &DenseTensor {
        self.factor(1)
    }

    /// `Vh` for an SVD.
    pub fn right(&self) -> Option<&DenseTensor> {
        self.factors.get(2)
    }

    /// Current inner dimension.
    pub fn rank(&self) -> usize {
        *self.left().shape().last().expect("left factor has an internal index")
    }

    fn dims(&self) -> (usize, usize) {
        self.bipartition.dims(&self.shape)
    }

    /// Left factor as a `d₁ × k` matrix.
    pub fn left_matrix(&self) -> DenseTensor {
        self.left().reshape(vec![self.dims().0, self.rank()]).expect("left factor size")
    }

    /// Right factor as a `k × d₂` matrix: `Vh` for SVD, `R` for QR.
    pub fn right_matrix(&self) -> Option<DenseTensor> {
        let t = match self.kind {
            FactorKind::Svd => self.right()?,
            FactorKind::Qr => self.middle(),
            FactorKind::Spectral => return None,
        };
        Some(t.reshape(vec![t.shape()[0], self.dims().1]).expect("right factor size"))
    }

    /// Product of the factors as a `d₁ × d₂` matrix.
    pub fn reconstruct_matrix(&self) -> Result<DenseTensor> {
        let left = self.left_matrix();
        match self.kind {
            FactorKind::Svd => left.matmul(self.middle())?.matmul(&self.right_matrix().expect("svd")),
            FactorKind::Qr => left.matmul(&self.right_matrix().expect("qr")),
            FactorKind::Spectral => left.matmul(self.middle())?.matmul(&left.adjoint()?),
        }
    }

    /// Product of the factors with the original index order restored.
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let p = &self.bipartition;
        let perm: Vec<usize> = p.rows.iter().chain(&p.cols).copied().collect();
        let permuted_shape: Vec<usize> = perm.iter().map(|&i| self.shape[i]).collect();
        let mut inverse = vec![0; perm.len()];
        for (pos, &ax) in perm.iter().enumerate() {
            inverse[ax] = pos;
        }
        self.reconstruct_matrix()?.reshape(permuted_shape)?.permute(&inverse)
    }
}

fn left_shape(t: &DenseTensor, p: &Bipartition, k: usize) -> Vec<usize> {
    p.rows.iter().map(|&i| t.shape()[i]).chain(std::iter::once(k)).collect()
}

fn right_shape(t: &DenseTensor, p: &Bipartition, k: usize) -> Vec<usize> {
    std::iter::once(k).chain(p.cols.iter().map(|&i| t.shape()[i])).collect()
}

/// Economical SVD across `p`; the spectrum has `min(d₁, d₂)` entries.
pub fn svd(t: &DenseTensor, p: &Bipartition) -> Result<Factorization> {
    let m = t.unfold(p)?;
    let (u, s, vh) = svd_matrix(&m)?;
    let k = s.len();
    Ok(Factorization {
        kind: FactorKind::Svd,
        factors: vec![
            u.reshape(left_shape(t, p, k))?,
            DenseTensor::diagonal(&s),
            vh.reshape(right_shape(t, p, k))?,
        ],
        spectrum: s,
        eigenvalues: Vec::new(),
        bipartition: p.clone(),
        shape: t.shape().to_vec(),
        report: TruncationReport { rank: k, ..Default::default() },
    })
}

/// Economical QR across `p`. Requires `d₁ ≥ d₂`.
pub fn qr(t: &DenseTensor, p: &Bipartition) -> Result<Factorization> {
    let (d1, d2) = p.dims(t.shape());
    if d1 < d2 {
        return Err(Error::validation(format!(
            "economical QR needs d1 >= d2, got {d1} < {d2}; use the transposed bipartition {}",
            p.transposed()
        )));
    }
    let (q, r) = qr_matrix(&t.unfold(p)?)?;
    Ok(Factorization {
        kind: FactorKind::Qr,
        factors: vec![q.reshape(left_shape(t, p, d2))?, r.reshape(right_shape(t, p, d2))?],
        spectrum: Vec::new(),
        eigenvalues: Vec::new(),
        bipartition: p.clone(),
        shape: t.shape().to_vec(),
        report: TruncationReport { rank: d2, ..Default::default() },
    })
}

/// Eigen-decomposition of an unfolding that is Hermitian across `p`.
pub fn spectral(t: &DenseTensor, p: &Bipartition) -> Result<Factorization> {
    let h = t.unfold(p)?;
    let (d1, d2) = (h.shape()[0], h.shape()[1]);
    if d1 != d2 {
        return Err(Error::validation(format!("spectral decomposition needs d1 = d2, got {d1} x {d2}")));
    }
    let hd = h.adjoint()?;
    let asym = h.sub(&hd)?.max_abs();
    let scale = h.max_abs();
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::validation(format!(
            "unfolding is not Hermitian: max |H - H†| = {asym:.3e} (max |H| = {scale:.3e})"
        )));
    }
    let sym = DenseTensor::from_parts(
        vec![d1, d1],
        h.data().iter().zip(hd.data()).map(|(a, b)| (a + b) * 0.5).collect(),
        h.kind(),
    )?;
    let (vals, u) = kernels::eigh(&sym)?;
    let mut spectrum: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    spectrum.sort_by(|a, b| b.total_cmp(a));
    Ok(Factorization {
        kind: FactorKind::Spectral,
        factors: vec![u.reshape(left_shape(t, p, d1))?, DenseTensor::diagonal(&vals)],
        spectrum,
        eigenvalues: vals,
        bipartition: p.clone(),
        shape: t.shape().to_vec(),
        report: TruncationReport { rank: d1, ..Default::default() },
    })
}

/// `sqrt(Σ_{k≥r} values[k]²)` for every `r`, accumulated from the tail.
fn tail_errors(sorted_desc: &[f64]) -> Vec<f64> {
    let mut tails = vec![0.0; sorted_desc.len() + 1];
    for k in (0..sorted_desc.len()).rev() {
        tails[k] = tails[k + 1] + sorted_desc[k] * sorted_desc[k];
    }
    tails
}

/// Keeps the `r` largest values (by magnitude) and their vectors.
pub fn truncate(f: &Factorization, r: usize) -> Result<Factorization> {
    if f.kind == FactorKind::Qr {
        return Err(Error::validation("truncation applies to svd or spectral factorizations"));
    }
    let n = f.spectrum.len();
    if r == 0 || r > n {
        return Err(Error::validation(format!("rank {r} out of range 1..={n}")));
    }
    let tails = tail_errors(&f.spectrum);
    let s1 = f.spectrum[0];
    let degenerate = r < n && f.spectrum[r - 1] - f.spectrum[r] <= DEGENERACY_GAP * s1;
    let report = TruncationReport { rank: r, discarded_weight: tails[r], error: tails[r].sqrt(), degenerate };

    // columns of the left factor to keep, in their current order
    let keep: Vec<usize> = match f.kind {
        FactorKind::Svd => (0..r).collect(),
        _ => {
            let mut by_mag: Vec<usize> = (0..n).collect();
            by_mag.sort_by(|&a, &b| f.eigenvalues[b].abs().total_cmp(&f.eigenvalues[a].abs()).then(a.cmp(&b)));
            let mut kept = by_mag[..r].to_vec();
            kept.sort_unstable();
            kept
        }
    };
    let (d1, d2) = f.dims();
    let left = select_columns(&f.left_matrix(), &keep)?;
    let mut left_shape: Vec<usize> = f.left().shape().to_vec();
    *left_shape.last_mut().expect("internal index") = r;

    let mut out = f.clone();
    out.report = report;
    match f.kind {
        FactorKind::Svd => {
            let vh = f.right_matrix().expect("svd");
            let vh = DenseTensor::from_parts(vec![r, d2], vh.data()[..r * d2].to_vec(), vh.kind())?;
            let mut right_shape = f.right().expect("svd").shape().to_vec();
            right_shape[0] = r;
            out.factors = vec![
                left.reshape(left_shape)?,
                DenseTensor::diagonal(&f.spectrum[..r]),
                vh.reshape(right_shape)?,
            ];
            out.spectrum.truncate(r);
        }
        _ => {
            let vals: Vec<f64> = keep.iter().map(|&i| f.eigenvalues[i]).collect();
            out.factors = vec![left.reshape(left_shape)?, DenseTensor::diagonal(&vals)];
            out.spectrum.truncate(r);
            out.eigenvalues = vals;
        }
    }
    debug_assert_eq!(out.left_matrix().shape(), &[d1, r]);
    Ok(out)
}

/// Smallest rank `r ≥ 1` whose truncation error is at most `max_error`.
/// Values below `1e-14` of the largest count as zero.
pub fn truncate_by_tolerance(f: &Factorization, max_error: f64) -> Result<Factorization> {
    if !(max_error >= 0.0) {
        return Err(Error::validation(format!("tolerance must be non-negative, got {max_error}")));
    }
    truncate(f, rank_for_tolerance(&f.spectrum, max_error))
}

/// Rank that [`truncate_by_tolerance`] would pick for `spectrum`.
pub fn rank_for_tolerance(spectrum: &[f64], max_error: f64) -> usize {
    let cutoff = spectrum.first().copied().unwrap_or(0.0) * ZERO_RELATIVE;
    let effective: Vec<f64> = spectrum.iter().map(|&s| if s > cutoff { s } else { 0.0 }).collect();
    let tails = tail_errors(&effective);
    (1..=spectrum.len()).find(|&r| tails[r].sqrt() <= max_error).unwrap_or(spectrum.len()).max(1)
}

fn select_columns(m: &DenseTensor, keep: &[usize]) -> Result<DenseTensor> {
    let (rows, cols) = (m.shape()[0], m.shape()[1]);
    let mut data = Vec::with_capacity(rows * keep.len());
    for i in 0..rows {
        data.extend(keep.iter().map(|&j| m.data()[i * cols + j]));
    }
    DenseTensor::from_parts(vec![rows, keep.len()], data, m.kind())
}

/// Principal square root of a positive semi-definite matrix, restricted to
/// the eigen-subspace above the cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalSqrt {
    /// `U·sqrt(D)·U†` over the retained eigenvectors.
    pub x: DenseTensor,
    /// `U·D^(-1/2)·U†` over the retained eigenvectors.
    pub x_inv: DenseTensor,
    /// Retained eigenvectors `U`, `d × k`.
    pub basis: DenseTensor,
    /// Retained eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Sum of the dropped eigenvalues.
    pub discarded_weight: f64,
    /// `λ_max / λ_min` over the retained eigenvalues.
    pub condition: f64,
}

impl PrincipalSqrt {
    pub fn dim(&self) -> usize {
        self.x.shape()[0]
    }

    pub fn retained(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U·sqrt(D)`, `d × k`; satisfies `X·X† = ρ` on the retained subspace.
    pub fn x_reduced(&self) -> DenseTensor {
        scale_columns(&self.basis, self.eigenvalues.iter().map(|v| v.sqrt()))
    }

    /// `D^(-1/2)·U†`, `k × d`; a left inverse of [`x_reduced`](Self::x_reduced).
    pub fn x_inv_reduced(&self) -> DenseTensor {
        scale_columns(&self.basis, self.eigenvalues.iter().map(|v| 1.0 / v.sqrt()))
            .adjoint()
            .expect("matrix")
    }
}

fn scale_columns(m: &DenseTensor, factors: impl Iterator<Item = f64>) -> DenseTensor {
    let f: Vec<f64> = factors.collect();
    let cols = m.shape()[1];
    let data = m.data().iter().enumerate().map(|(i, z)| z * f[i % cols]).collect();
    DenseTensor::from_parts(m.shape().to_vec(), data, m.kind()).expect("same shape")
}

/// [`principal_sqrt_with_cutoff`] with the default relative cutoff.
pub fn principal_sqrt(rho: &DenseTensor, tol: f64) -> Result<PrincipalSqrt> {
    principal_sqrt_with_cutoff(rho, tol, SQRT_CUTOFF)
}

/// Principal square root of `rho`. Eigenvalues at or below
/// `cutoff · λ_max` are dropped; an eigenvalue below `-tol · λ_max` means
/// `rho` is not positive semi-definite.
pub fn principal_sqrt_with_cutoff(rho: &DenseTensor, tol: f64, cutoff: f64) -> Result<PrincipalSqrt> {
    if rho.order() != 2 {
        return Err(Error::validation(format!("principal_sqrt needs a matrix, got order {}", rho.order())));
    }
    let f = spectral(rho, &Bipartition::matrix())?;
    let vals = &f.eigenvalues;
    let lmax = vals.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if let Some(&neg) = vals.iter().find(|&&v| v < -tol * lmax) {
        return Err(Error::validation(format!(
            "matrix is not positive semi-definite: eigenvalue {neg:.3e} (largest magnitude {lmax:.3e})"
        )));
    }
    let tau = cutoff * lmax;
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > tau).collect();
    let discarded_weight = (0..vals.len()).filter(|i| !keep.contains(i)).fold(0.0, |acc, i| acc + vals[i].max(0.0));
    let basis = select_columns(f.left(), &keep)?;
    let kept: Vec<f64> = keep.iter().map(|&i| vals[i]).collect();
    let ud = basis.adjoint()?;
    let root = scale_columns(&basis, kept.iter().map(|v| v.sqrt())).matmul(&ud)?;
    let inv_root = scale_columns(&basis, kept.iter().map(|v| 1.0 / v.sqrt())).matmul(&ud)?;
    let condition = match (kept.first(), kept.last()) {
        (Some(&hi), Some(&lo)) => hi / lo,
        _ => f64::INFINITY,
    };
    Ok(PrincipalSqrt { x: root, x_inv: inv_root, basis, eigenvalues: kept, discarded_weight, condition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{ScalarKind, C64};
    use crate::tensor::{is_isometry, is_unitary, DEFAULT_TOL};

    fn mat(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> DenseTensor {
        DenseTensor::from_fn(vec![rows, cols], ScalarKind::Real, |ix| C64::new(f(ix[0], ix[1]), 0.0)).unwrap()
    }

    fn close(a: &DenseTensor, b: &DenseTensor, tol: f64) -> bool {
        a.sub(b).unwrap().max_abs() <= tol
    }

    #[test]
    fn svd_of_diagonal() {
        let d = DenseTensor::diagonal(&[3.0, 2.0, 1.0]);
        let f = svd(&d, &Bipartition::matrix()).unwrap();
        assert_eq!(f.spectrum, vec![3.0, 2.0, 1.0]);
        assert!(close(f.left(), &DenseTensor::identity(3), 1e-15));
        assert!(close(&f.right_matrix().unwrap(), &DenseTensor::identity(3), 1e-15));
        assert_eq!(f.left().kind(), ScalarKind::Real);
    }

    #[test]
    fn svd_of_unsorted_diagonal_sorts_and_fixes_phase() {
        let d = DenseTensor::diagonal(&[1.0, -5.0, 2.0]);
        let f = svd(&d, &Bipartition::matrix()).unwrap();
        assert_eq!(f.spectrum, vec![5.0, 2.0, 1.0]);
        for j in 0..3 {
            let col: Vec<C64> = (0..3).map(|i| f.left().get(&[i, j]).unwrap()).collect();
            let piv = col.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
            assert!(piv.re > 0.0 && piv.im == 0.0);
        }
        assert!(close(&f.reconstruct().unwrap(), &d, 1e-14));
    }

    #[test]
    fn rank_one_outer_product() {
        let u = [0.3, -1.2, 0.7, 2.0];
        let v = [1.5, 0.1, -0.4];
        let a = mat(4, 3, |i, j| u[i] * v[j]);
        let f = svd(&a, &Bipartition::matrix()).unwrap();
        assert!(f.spectrum[0] > 1.0);
        assert!(f.spectrum[1..].iter().all(|&s| s <= 1e-13));
        assert_eq!(rank_for_tolerance(&f.spectrum, 0.0), 1);
    }

    #[test]
    fn wide_unfolding_factors_the_smaller_side() {
        let a = mat(2, 5, |i, j| (i * 5 + j) as f64 + 0.5 * (j as f64).cos());
        let f = svd(&a, &Bipartition::matrix()).unwrap();
        assert_eq!(f.spectrum.len(), 2);
        assert!(is_unitary(f.left(), &Bipartition::matrix(), 1e-12).holds);
        assert!(is_isometry(&f.right_matrix().unwrap().adjoint().unwrap(), &Bipartition::matrix(), 1e-12).holds);
        assert!(close(&f.reconstruct().unwrap(), &a, 1e-12));
    }

    #[test]
    fn svd_of_order_three_tensor() {
        let t = DenseTensor::from_fn(vec![2, 3, 4], ScalarKind::Real, |ix| {
            C64::new(((ix[0] * 12 + ix[1] * 4 + ix[2]) as f64).sin(), 0.0)
        })
        .unwrap();
        let p = Bipartition::new(vec![2, 0], vec![1], 3).unwrap();
        let f = svd(&t, &p).unwrap();
        assert_eq!(f.left().shape(), &[4, 2, 3]);
        assert_eq!(f.right().unwrap().shape(), &[3, 3]);
        let dev = f.reconstruct().unwrap().sub(&t).unwrap().max_abs();
        assert!(dev < 1e-13, "{dev} {:?}", f.spectrum);
        let norm_from_spectrum = f.spectrum.iter().map(|s| s * s).sum::<f64>().sqrt();
        assert!((norm_from_spectrum - t.frobenius_norm()).abs() < 1e-12);
    }

    #[test]
    fn qr_of_identity_and_rank_deficient() {
        let f = qr(&DenseTensor::identity(3), &Bipartition::matrix()).unwrap();
        assert!(close(f.left(), &DenseTensor::identity(3), 0.0));
        assert!(close(f.middle(), &DenseTensor::identity(3), 0.0));

        let a = mat(4, 2, |i, _| (i as f64) + 1.0);
        let f = qr(&a, &Bipartition::matrix()).unwrap();
        assert!(is_isometry(f.left(), &Bipartition::matrix(), 1e-12).holds);
        assert!(close(&f.reconstruct().unwrap(), &a, 1e-12));
        let r = f.middle();
        assert!(r.get(&[1, 1]).unwrap().norm() < 1e-12);
        assert!(r.get(&[1, 0]).unwrap().norm() == 0.0);
    }

    #[test]
    fn qr_rejects_wide_unfolding() {
        let a = mat(2, 3, |i, j| (i + j) as f64);
        let err = qr(&a, &Bipartition::matrix()).unwrap_err();
        assert!(err.to_string().contains("transposed"), "{err}");
    }

    #[test]
    fn spectral_of_diagonal_and_rejection() {
        let f = spectral(&DenseTensor::diagonal(&[-1.0, 5.0]), &Bipartition::matrix()).unwrap();
        assert_eq!(f.eigenvalues, vec![5.0, -1.0]);
        assert_eq!(f.spectrum, vec![5.0, 1.0]);
        let u = f.left();
        assert!(close(u, &DenseTensor::from_real(vec![2, 2], vec![0.0, 1.0, 1.0, 0.0]).unwrap(), 0.0));

        let nh = mat(2, 2, |i, j| if i == 0 && j == 1 { 1.0 } else { 0.0 });
        let err = spectral(&nh, &Bipartition::matrix()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("1.000e0"), "{err}");
        assert!(spectral(&mat(2, 3, |_, _| 0.0), &Bipartition::matrix()).is_err());
    }

    #[test]
    fn truncation_of_diagonal() {
        let d = DenseTensor::diagonal(&[3.0, 2.0, 1.0]);
        let f = svd(&d, &Bipartition::matrix()).unwrap();
        let t = truncate(&f, 2).unwrap();
        assert_eq!(t.report.error, 1.0);
        assert_eq!(t.report.rank, 2);
        assert!(!t.report.degenerate);
        assert!(close(&t.reconstruct().unwrap(), &DenseTensor::diagonal(&[3.0, 2.0, 0.0]), 1e-15));
        let full = truncate(&f, 3).unwrap();
        assert_eq!(full.report.error, 0.0);
        assert!(close(&full.reconstruct().unwrap(), &d, 1e-15));
        assert!(truncate(&f, 0).is_err());
        assert!(truncate(&f, 4).is_err());
        let q = qr(&d, &Bipartition::matrix()).unwrap();
        assert!(truncate(&q, 1).is_err());
    }

    #[test]
    fn degenerate_boundary_is_flagged() {
        let d = DenseTensor::diagonal(&[3.0, 2.0, 2.0]);
        let f = svd(&d, &Bipartition::matrix()).unwrap();
        assert!(truncate(&f, 2).unwrap().report.degenerate);
        assert!(!truncate(&f, 1).unwrap().report.degenerate);
    }

    #[test]
    fn spectral_truncation_keeps_largest_magnitudes() {
        let h = DenseTensor::diagonal(&[1.0, -4.0, 0.5]);
        let f = spectral(&h, &Bipartition::matrix()).unwrap();
        let t = truncate(&f, 2).unwrap();
        assert_eq!(t.eigenvalues, vec![1.0, -4.0]);
        assert!((t.report.error - 0.5).abs() < 1e-15);
        assert!(close(&t.reconstruct().unwrap(), &DenseTensor::diagonal(&[1.0, -4.0, 0.0]), 1e-15));
    }

    #[test]
    fn tolerance_selection() {
        let f = svd(&DenseTensor::diagonal(&[3.0, 2.0, 1.0]), &Bipartition::matrix()).unwrap();
        assert_eq!(truncate_by_tolerance(&f, 1.0).unwrap().report.rank, 2);
        assert_eq!(truncate_by_tolerance(&f, 0.0).unwrap().report.rank, 3);
        assert_eq!(truncate_by_tolerance(&f, 100.0).unwrap().report.rank, 1);
        assert!(truncate_by_tolerance(&f, -1.0).is_err());
        assert_eq!(rank_for_tolerance(&[2.0, 1e-15, 0.0], 0.0), 1);
    }

    #[test]
    fn principal_sqrt_of_simple_matrices() {
        let s = principal_sqrt(&DenseTensor::identity(3), 1e-12).unwrap();
        assert!(close(&s.x, &DenseTensor::identity(3), 1e-15));
        assert!(close(&s.x_inv, &DenseTensor::identity(3), 1e-15));
        let s = principal_sqrt(&DenseTensor::diagonal(&[4.0, 9.0]), 1e-12).unwrap();
        assert!(close(&s.x, &DenseTensor::diagonal(&[2.0, 3.0]), 1e-15));
        assert!(close(&s.x_inv, &DenseTensor::diagonal(&[0.5, 1.0 / 3.0]), 1e-15));
        assert_eq!(s.condition, 9.0 / 4.0);
    }

    #[test]
    fn principal_sqrt_drops_zero_modes_and_rejects_negative() {
        let s = principal_sqrt(&DenseTensor::diagonal(&[4.0, 0.0]), 1e-12).unwrap();
        assert_eq!(s.retained(), 1);
        assert_eq!(s.dim(), 2);
        assert_eq!(s.x_reduced().shape(), &[2, 1]);
        assert_eq!(s.x_inv_reduced().shape(), &[1, 2]);
        let id = s.x_inv_reduced().matmul(&s.x_reduced()).unwrap();
        assert!(close(&id, &DenseTensor::identity(1), 1e-15));
        let err = principal_sqrt(&DenseTensor::diagonal(&[4.0, -1.0]), 1e-12).unwrap_err();
        assert!(err.to_string().contains("positive semi-definite"));
    }

    #[test]
    fn inverse_and_condition() {
        let (inv, cond) = inverse(&DenseTensor::diagonal(&[2.0, 0.5])).unwrap();
        assert!(close(&inv, &DenseTensor::diagonal(&[0.5, 2.0]), 1e-15));
        assert!((cond - 4.0).abs() < 1e-12);
        assert!(inverse(&DenseTensor::zeros(vec![2, 2], ScalarKind::Real).unwrap()).is_err());
    }

    #[test]
    fn is_isometry_holds_for_qr_default_tol() {
        let a = mat(6, 3, |i, j| ((i * 3 + j) as f64 * 0.7).sin());
        let f = qr(&a, &Bipartition::matrix()).unwrap();
        assert!(is_isometry(f.left(), &Bipartition::matrix(), DEFAULT_TOL).holds);
    }
}
