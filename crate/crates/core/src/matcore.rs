//! Dense symmetric-matrix utilities: PSD tests, pseudo-inverse, numerical
//! rank, PSD square root and extremal eigenvalues.
//!
//! Symmetric matrices go through one symmetric eigen-decomposition
//! ([`SpectralDecomp`]); rectangular matrices use a thin SVD.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative singular-value cutoff used for ranks and pseudo-inverses.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Relative eigenvalue slack used by [`psd_check`].
pub const DEFAULT_PSD_TOL: f64 = 1e-9;

/// A real symmetric matrix. Symmetrized on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DMatrix<f64>", into = "DMatrix<f64>")]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Wraps a square, finite matrix, replacing it by `(M + Mᵀ) / 2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        check_finite(&m)?;
        Ok(Self::symmetrized(m))
    }

    /// Like [`SymMatrix::new`] but rejects inputs whose asymmetry exceeds `tol`.
    pub fn new_strict(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        let asym = asymmetry(&m);
        if m.nrows() == m.ncols() && asym > tol {
            return Err(Error::InvalidMatrix(format!(
                "matrix is not symmetric (|M - Mᵀ| = {asym:e})"
            )));
        }
        Self::new(m)
    }

    pub(crate) fn symmetrized(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        Self((m + t) * 0.5)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        Self(DMatrix::identity(n, n) * s)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    /// Block diagonal matrix with the given blocks.
    pub fn block_diagonal(blocks: &[SymMatrix]) -> Self {
        let n: usize = blocks.iter().map(SymMatrix::dim).sum();
        let mut m = DMatrix::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            let k = b.dim();
            m.view_mut((off, off), (k, k)).copy_from(b.as_matrix());
            off += k;
        }
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn spectral(&self) -> SpectralDecomp {
        SpectralDecomp::of(self)
    }

    pub fn lambda_min(&self) -> f64 {
        self.spectral().lambda_min()
    }

    pub fn lambda_max(&self) -> f64 {
        self.spectral().lambda_max()
    }

    /// Largest eigenvalue magnitude (the spectral norm).
    pub fn spectral_radius(&self) -> f64 {
        self.spectral().radius()
    }
}

impl TryFrom<DMatrix<f64>> for SymMatrix {
    type Error = Error;

    fn try_from(m: DMatrix<f64>) -> Result<Self> {
        Self::new(m)
    }
}

impl From<SymMatrix> for DMatrix<f64> {
    fn from(s: SymMatrix) -> Self {
        s.0
    }
}

impl AsRef<DMatrix<f64>> for SymMatrix {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// descending order and orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomp {
    pub fn of(m: &SymMatrix) -> Self {
        let n = m.dim();
        if n == 0 {
            return Self {
                eigenvalues: DVector::zeros(0),
                eigenvectors: DMatrix::zeros(0, 0),
            };
        }
        let eig = m.as_matrix().clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            eigenvectors.set_column(k, &eig.eigenvectors.column(i));
        }
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Smallest eigenvalue; `+inf` for an empty matrix.
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest eigenvalue; `-inf` for an empty matrix.
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |a, &l| a.max(l.abs()))
    }

    /// `V f(Λ) Vᵀ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            self.eigenvectors[(i, j)] * f(self.eigenvalues[j])
        });
        &scaled * self.eigenvectors.transpose()
    }
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMatrix("non-finite entry".into()))
    }
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    (m - m.transpose()).amax()
}

/// True iff `λ_min(M) ≥ −tol · max(1, max|λ|)`.
pub fn psd_check(m: &SymMatrix, tol: f64) -> Result<bool> {
    check_finite(m.as_matrix())?;
    let sd = m.spectral();
    Ok(sd.dim() == 0 || sd.lambda_min() >= -tol * sd.radius().max(1.0))
}

/// PSD test against an explicit magnitude: `λ_min(M) ≥ −tol · scale`.
///
/// Used for difference matrices such as `ZᵀGZ − YᵀY`, whose own spectrum
/// says nothing about the size of the terms that cancelled.
pub fn psd_check_scaled(m: &SymMatrix, tol: f64, scale: f64) -> Result<bool> {
    check_finite(m.as_matrix())?;
    Ok(m.dim() == 0 || m.lambda_min() >= -tol * scale.max(1.0))
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Induced 2-norm (largest singular value); 0 for empty matrices.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Number of singular values above `rank_tol · σ_max`.
pub fn num_rank(m: &DMatrix<f64>, rank_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&v| v > rank_tol * smax).count(),
        _ => 0,
    }
}

/// Number of singular values above the absolute threshold `tol · scale`.
pub fn num_rank_scaled(m: &DMatrix<f64>, rank_tol: f64, scale: f64) -> usize {
    let cut = rank_tol * scale;
    singular_values(m)
        .iter()
        .filter(|&&v| v > cut && v > 0.0)
        .count()
}

/// Moore–Penrose pseudo-inverse; singular values below `rank_tol · σ_max`
/// are treated as zero.
pub fn pinv(m: &DMatrix<f64>, rank_tol: f64) -> DMatrix<f64> {
    pinv_with_cutoff(m, rank_tol * spectral_norm(m))
}

/// Pseudo-inverse dropping singular values `≤ cut` (absolute).
pub fn pinv_with_cutoff(m: &DMatrix<f64>, cut: f64) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = m.clone().svd(true, true);
    if svd.singular_values.amax() == 0.0 {
        return DMatrix::zeros(c, r);
    }
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut out = DMatrix::zeros(c, r);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cut {
            out += vt.row(k).transpose() * u.column(k).transpose() * (1.0 / s);
        }
    }
    out
}

/// Pseudo-inverse of a symmetric matrix via its eigen-decomposition.
/// Eigenvalues with `|λ| ≤ rank_tol · scale` are dropped; `scale` defaults
/// to the spectral radius of `m`.
pub fn pinv_sym(m: &SymMatrix, rank_tol: f64, scale: Option<f64>) -> SymMatrix {
    let sd = m.spectral();
    let cut = rank_tol * scale.unwrap_or_else(|| sd.radius());
    SymMatrix::symmetrized(sd.map(|l| {
        if l.abs() > cut && l != 0.0 {
            1.0 / l
        } else {
            0.0
        }
    }))
}

/// Symmetric PSD square root. Eigenvalues that are negative within the
/// default PSD tolerance are clamped to zero.
pub fn sqrt_psd(m: &SymMatrix) -> Result<SymMatrix> {
    check_finite(m.as_matrix())?;
    let sd = m.spectral();
    if sd.dim() == 0 {
        return Ok(SymMatrix::zeros(0));
    }
    let lmin = sd.lambda_min();
    if lmin < -DEFAULT_PSD_TOL * sd.radius().max(1.0) {
        return Err(Error::NotPsd { min_eig: lmin });
    }
    Ok(SymMatrix::symmetrized(sd.map(|l| l.max(0.0).sqrt())))
}

/// Gram matrix `AᵀA` as a symmetric matrix.
pub fn gram(a: &DMatrix<f64>) -> SymMatrix {
    SymMatrix::symmetrized(a.transpose() * a)
}

/// Projects `m` onto the operator-norm ball of radius `bound` by clipping
/// singular values.
pub fn clip_spectral_norm(m: &DMatrix<f64>, bound: f64) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return m.clone();
    }
    let mut svd = m.clone().svd(true, true);
    for s in svd.singular_values.iter_mut() {
        *s = s.min(bound);
    }
    svd.recompose().expect("u and v_t requested")
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn psd_check_basic_cases() {
        assert!(psd_check(&SymMatrix::identity(2), 0.0).unwrap());
        assert!(!psd_check(&SymMatrix::from_diagonal(&[1.0, -1e-3]), 1e-6).unwrap());
        // Two-point data of the worked example: D = ‖x0‖² − ‖x1‖².
        let d = 2.0 - (1.04f64.powi(2) + 0.15f64.powi(2));
        assert!((d - 0.8959).abs() < 1e-12);
        assert!(psd_check(&SymMatrix::from_diagonal(&[d]), DEFAULT_PSD_TOL).unwrap());
    }

    #[test]
    fn psd_check_rejects_non_finite() {
        let m = SymMatrix(dmatrix![f64::NAN, 0.0; 0.0, 1.0]);
        assert!(matches!(psd_check(&m, 0.0), Err(Error::InvalidMatrix(_))));
        assert!(SymMatrix::new(dmatrix![1.0, f64::INFINITY; 0.0, 1.0]).is_err());
    }

    #[test]
    fn pinv_closed_forms() {
        let p = pinv(&dmatrix![2.0, 0.0; 0.0, 0.0], DEFAULT_RANK_TOL);
        assert!((p - dmatrix![0.5, 0.0; 0.0, 0.0]).amax() < 1e-15);
        let p = pinv(&dmatrix![1.0; 1.0], DEFAULT_RANK_TOL);
        assert!((p - dmatrix![0.5, 0.5]).amax() < 1e-15);
        assert_eq!(
            pinv(&DMatrix::zeros(3, 2), DEFAULT_RANK_TOL),
            DMatrix::zeros(2, 3)
        );
        assert_eq!(
            pinv(&DMatrix::zeros(3, 0), DEFAULT_RANK_TOL).shape(),
            (0, 3)
        );
    }

    #[test]
    fn ranks() {
        assert_eq!(num_rank(&DMatrix::identity(3, 3), DEFAULT_RANK_TOL), 3);
        let u = dmatrix![1.0; 2.0; -1.0];
        let v = dmatrix![0.5; 3.0];
        assert_eq!(num_rank(&(u * v.transpose()), DEFAULT_RANK_TOL), 1);
        assert_eq!(num_rank(&DMatrix::zeros(2, 2), DEFAULT_RANK_TOL), 0);
        // Z = [0,1]ᵀ, Y = [1,0]ᵀ with unit bound: D = ZᵀZ − YᵀY = 0.
        let z = dmatrix![0.0; 1.0];
        let y = dmatrix![1.0; 0.0];
        let d = z.transpose() * &z - y.transpose() * &y;
        assert_eq!(num_rank(&d, DEFAULT_RANK_TOL), 0);
        assert_eq!(num_rank(&z, DEFAULT_RANK_TOL), 1);
    }

    #[test]
    fn sqrt_cases() {
        let s = sqrt_psd(&SymMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert!((s.as_matrix() - dmatrix![2.0, 0.0; 0.0, 3.0]).amax() < 1e-14);
        let s = sqrt_psd(&SymMatrix::identity(3)).unwrap();
        assert!((s.as_matrix() - DMatrix::identity(3, 3)).amax() < 1e-14);
        let s = sqrt_psd(&SymMatrix::scaled_identity(2, 2.9 * 2.9)).unwrap();
        assert!((s.as_matrix() - DMatrix::identity(2, 2) * 2.9).amax() < 1e-14);
        assert!(matches!(
            sqrt_psd(&SymMatrix::from_diagonal(&[1.0, -0.1])),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn spectral_decomp_sorted_descending() {
        let m = SymMatrix::new(dmatrix![1.0, 2.0; 2.0, -3.0]).unwrap();
        let sd = m.spectral();
        assert!(sd.eigenvalues[0] >= sd.eigenvalues[1]);
        let recon = sd.map(|l| l);
        assert!((recon - m.as_matrix()).amax() < 1e-12);
    }

    #[test]
    fn strict_constructor_rejects_asymmetry() {
        assert!(SymMatrix::new_strict(dmatrix![1.0, 2.0; 0.0, 1.0], 1e-12).is_err());
        assert!(SymMatrix::new(dmatrix![1.0, 2.0; 0.0, 1.0]).is_ok());
    }
}
