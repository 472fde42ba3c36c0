//! Interpolation by norm-bounded linear operators.
//!
//! Given data `Z ∈ ℝ^{m×t}`, `Y ∈ ℝ^{n×t}` and a bound `G ⪰ 0`:
//!
//! * [`interp_exists`] decides whether some `M` with `Y = MZ` and
//!   `MᵀM ⪯ G` exists (`YᵀY ⪯ ZᵀGZ`);
//! * [`feasible_output_set`] returns the set of outputs `Mz` of all such
//!   operators, which is an ellipsoid whenever `D = ZᵀGZ − YᵀY` is PSD and
//!   its range is large enough;
//! * [`multi_bound_exists`] handles `M = [M₁ … M_N]` with one bound per
//!   block by searching a PSD completion of `blockdiag(Γ₁ … Γ_N)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::lmi::{AffineMatrixMap, FeasibilityStatus, LmiOracle, LmiProblem};
use crate::matcore::{
    gram, num_rank_scaled, pinv_sym, pinv_with_cutoff, psd_check, psd_check_scaled, spectral_norm,
    sqrt_psd, SymMatrix, DEFAULT_PSD_TOL, DEFAULT_RANK_TOL,
};

/// Data `(Z, Y)` and bound `G` of one interpolation problem.
#[derive(Debug, Clone)]
pub struct InterpInstance {
    z: DMatrix<f64>,
    y: DMatrix<f64>,
    g: SymMatrix,
}

impl InterpInstance {
    pub fn new(z: DMatrix<f64>, y: DMatrix<f64>, g: SymMatrix) -> Result<Self> {
        if z.ncols() != y.ncols() {
            return Err(shape_err(format!(
                "Z has {} columns, Y has {}",
                z.ncols(),
                y.ncols()
            )));
        }
        if g.dim() != z.nrows() {
            return Err(shape_err(format!(
                "G is {0}x{0}, Z has {1} rows",
                g.dim(),
                z.nrows()
            )));
        }
        if !psd_check(&g, DEFAULT_PSD_TOL)? {
            return Err(Error::NotPsd {
                min_eig: g.lambda_min(),
            });
        }
        Ok(Self { z, y, g })
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn g(&self) -> &SymMatrix {
        &self.g
    }

    fn zgz(&self) -> SymMatrix {
        SymMatrix::symmetrized(self.z.transpose() * self.g.as_matrix() * &self.z)
    }

    /// `D = ZᵀGZ − YᵀY`.
    pub fn d_matrix(&self) -> SymMatrix {
        SymMatrix::symmetrized(self.zgz().into_inner() - gram(&self.y).into_inner())
    }

    /// Magnitude of the terms whose difference forms `D`.
    fn d_scale(&self) -> f64 {
        self.zgz()
            .spectral_radius()
            .max(gram(&self.y).spectral_radius())
            .max(1.0)
    }
}

/// True iff an operator `M` with `Y = MZ` and `MᵀM ⪯ G` exists.
pub fn interp_exists(inst: &InterpInstance) -> Result<bool> {
    psd_check_scaled(&inst.d_matrix(), DEFAULT_PSD_TOL, inst.d_scale())
}

/// `{y : (y − c)ᵀ A (y − c) ≤ Q}` with `A ≻ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    pub shape: SymMatrix,
    pub center: DVector<f64>,
    pub level: f64,
}

impl Ellipsoid {
    pub fn new(shape: SymMatrix, center: DVector<f64>, level: f64) -> Result<Self> {
        if shape.dim() != center.len() {
            return Err(shape_err(format!(
                "shape is {0}x{0}, center has {1} entries",
                shape.dim(),
                center.len()
            )));
        }
        let lmin = shape.lambda_min();
        if shape.dim() > 0 && !(lmin > 0.0) {
            return Err(Error::NotPd { min_eig: lmin });
        }
        if !level.is_finite() || level < -1e-9 {
            return Err(Error::InvalidArgument(format!(
                "ellipsoid level {level} is negative"
            )));
        }
        Ok(Self {
            shape,
            center,
            level: level.max(0.0),
        })
    }

    /// Ball of radius `r` around `center`.
    pub fn ball(center: DVector<f64>, radius: f64) -> Result<Self> {
        let n = center.len();
        Self::new(SymMatrix::identity(n), center, radius * radius)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn quad_form(&self, y: &DVector<f64>) -> f64 {
        let d = y - &self.center;
        d.dot(&(self.shape.as_matrix() * &d))
    }

    pub fn contains(&self, y: &DVector<f64>, tol: f64) -> bool {
        self.quad_form(y) <= self.level + tol
    }

    pub fn translated(&self, offset: &DVector<f64>) -> Self {
        Self {
            shape: self.shape.clone(),
            center: &self.center + offset,
            level: self.level,
        }
    }

    /// `√Q · A^{-1/2}`, mapping the unit ball onto the centered ellipsoid.
    pub fn whitening_inverse(&self) -> DMatrix<f64> {
        self.shape.spectral().map(|l| (self.level / l).sqrt())
    }

    /// Point on the boundary in the direction of `u` (need not be normalized).
    pub fn boundary_point(&self, u: &DVector<f64>) -> DVector<f64> {
        let un = u / u.norm();
        &self.center + self.whitening_inverse() * un
    }

    /// `k` boundary points of a planar ellipse, counter-clockwise.
    pub fn boundary_2d(&self, k: usize) -> Result<Vec<[f64; 2]>> {
        if self.dim() != 2 {
            return Err(shape_err(format!(
                "boundary_2d needs a planar ellipsoid, got dimension {}",
                self.dim()
            )));
        }
        let t = self.whitening_inverse();
        Ok((0..k)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                let p = &self.center + &t * DVector::from_column_slice(&[a.cos(), a.sin()]);
                [p[0], p[1]]
            })
            .collect())
    }
}

/// Outcome of the feasible-output-set computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeasibleSet {
    /// The data violate the bound.
    Empty,
    Ellipsoid(Ellipsoid),
    /// `D ⪰ 0` but `rank(D) < rank(G^{1/2}Z)`: the set is a lower-dimensional
    /// ellipsoid that is not characterized here.
    Degenerate,
}

/// Tolerances for the ellipsoid construction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub psd_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: DEFAULT_RANK_TOL,
            psd_tol: DEFAULT_PSD_TOL,
        }
    }
}

/// The building blocks shared by both parameterizations.
struct Parts {
    d: SymMatrix,
    d_pinv: SymMatrix,
    g_half: SymMatrix,
    k: DMatrix<f64>,
    k_pinv: DMatrix<f64>,
}

enum Classified {
    Empty,
    Degenerate,
    Ok(Parts),
}

fn classify(inst: &InterpInstance, tol: Tolerances) -> Result<Classified> {
    let scale = inst.d_scale();
    let d = inst.d_matrix();
    if !psd_check_scaled(&d, tol.psd_tol, scale)? {
        return Ok(Classified::Empty);
    }
    let rank_d = num_rank_scaled(d.as_matrix(), tol.rank_tol, scale);
    let rank_z = num_rank_scaled(inst.zgz().as_matrix(), tol.rank_tol, scale);
    if rank_d != rank_z {
        return Ok(Classified::Degenerate);
    }
    let g_half = sqrt_psd(&inst.g)?;
    let k = g_half.as_matrix() * &inst.z;
    // Same cutoff as the rank test above, since σ(K)² are the eigenvalues of ZᵀGZ.
    let k_pinv = pinv_with_cutoff(&k, (tol.rank_tol * scale).sqrt());
    let d_pinv = pinv_sym(&d, tol.rank_tol, Some(scale));
    Ok(Classified::Ok(Parts {
        d,
        d_pinv,
        g_half,
        k,
        k_pinv,
    }))
}

fn shape_matrix(inst: &InterpInstance, p: &Parts) -> SymMatrix {
    let n = inst.y.nrows();
    SymMatrix::symmetrized(
        DMatrix::identity(n, n) + &inst.y * p.d_pinv.as_matrix() * inst.y.transpose(),
    )
}

/// Feasible outputs `{Mz : Y = MZ, MᵀM ⪯ G}` with default tolerances.
pub fn feasible_output_set(inst: &InterpInstance, z: &DVector<f64>) -> Result<FeasibleSet> {
    feasible_output_set_with(inst, z, Tolerances::default())
}

/// Feasible outputs with `c = Y (G^{1/2}Z)† G^{1/2} z` and
/// `Q = zᵀ G^{1/2} (I − G^{1/2}Z D†D (G^{1/2}Z)†) G^{1/2} z`.
pub fn feasible_output_set_with(
    inst: &InterpInstance,
    z: &DVector<f64>,
    tol: Tolerances,
) -> Result<FeasibleSet> {
    check_z(inst, z)?;
    let p = match classify(inst, tol)? {
        Classified::Empty => return Ok(FeasibleSet::Empty),
        Classified::Degenerate => return Ok(FeasibleSet::Degenerate),
        Classified::Ok(p) => p,
    };
    let gz = p.g_half.as_matrix() * z;
    let center = &inst.y * (&p.k_pinv * &gz);
    let m = inst.z.nrows();
    let proj =
        DMatrix::identity(m, m) - &p.k * (p.d_pinv.as_matrix() * p.d.as_matrix()) * &p.k_pinv;
    let level = gz.dot(&(proj * &gz));
    if level < -1e-9 * gz.norm_squared().max(1.0) {
        log::debug!("ellipsoid level {level:e} clamped to zero");
    }
    Ok(FeasibleSet::Ellipsoid(Ellipsoid::new(
        shape_matrix(inst, &p),
        center,
        level.max(0.0),
    )?))
}

/// The same set through `c = A⁻¹B`, `Q = BᵀA⁻¹B − C` with
/// `B = Y D† ZᵀG z` and `C = zᵀG^{1/2}(G^{1/2}Z D† ZᵀG^{1/2} − I)G^{1/2}z`.
/// Used as a cross-check of [`feasible_output_set`].
pub fn feasible_output_set_schur(
    inst: &InterpInstance,
    z: &DVector<f64>,
    tol: Tolerances,
) -> Result<FeasibleSet> {
    check_z(inst, z)?;
    let p = match classify(inst, tol)? {
        Classified::Empty => return Ok(FeasibleSet::Empty),
        Classified::Degenerate => return Ok(FeasibleSet::Degenerate),
        Classified::Ok(p) => p,
    };
    let shape = shape_matrix(inst, &p);
    let gz = p.g_half.as_matrix() * z;
    let b = &inst.y * p.d_pinv.as_matrix() * inst.z.transpose() * (inst.g.as_matrix() * z);
    let m = inst.z.nrows();
    let inner = &p.k * p.d_pinv.as_matrix() * p.k.transpose() - DMatrix::identity(m, m);
    let c_term = gz.dot(&(inner * &gz));
    let a_inv_b = shape
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or(Error::NotPd {
            min_eig: shape.lambda_min(),
        })?
        .solve(&b);
    let level = b.dot(&a_inv_b) - c_term;
    Ok(FeasibleSet::Ellipsoid(Ellipsoid::new(
        shape,
        a_inv_b,
        level.max(0.0),
    )?))
}

fn check_z(inst: &InterpInstance, z: &DVector<f64>) -> Result<()> {
    if z.len() != inst.z.nrows() {
        return Err(shape_err(format!(
            "z has {} entries, expected {}",
            z.len(),
            inst.z.nrows()
        )));
    }
    Ok(())
}

/// A PSD completion `Ĝ` of `blockdiag(Γ₁ … Γ_N)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompletionCertificate {
    /// The prescribed diagonal blocks `Γᵢ`.
    pub blocks: Vec<SymMatrix>,
    /// Filled off-diagonal blocks `Ĝᵢⱼ` for `i < j`, in lexicographic order.
    pub offdiag: Vec<DMatrix<f64>>,
}

impl CompletionCertificate {
    pub fn block_diagonal(blocks: Vec<SymMatrix>) -> Self {
        let offdiag = block_pairs(blocks.len())
            .map(|(i, j)| DMatrix::zeros(blocks[i].dim(), blocks[j].dim()))
            .collect();
        Self { blocks, offdiag }
    }

    pub fn offsets(&self) -> Vec<usize> {
        offsets(&self.blocks)
    }

    /// The full symmetric matrix `Ĝ`.
    pub fn assembled(&self) -> SymMatrix {
        let off = self.offsets();
        let n = *off.last().unwrap_or(&0);
        let mut g = SymMatrix::block_diagonal(&self.blocks).into_inner();
        for ((i, j), c) in block_pairs(self.blocks.len()).zip(&self.offdiag) {
            g.view_mut((off[i], off[j]), c.shape()).copy_from(c);
            g.view_mut((off[j], off[i]), (c.ncols(), c.nrows()))
                .copy_from(&c.transpose());
        }
        debug_assert_eq!(g.nrows(), n);
        SymMatrix::symmetrized(g)
    }
}

fn offsets(blocks: &[SymMatrix]) -> Vec<usize> {
    let mut off = vec![0];
    for b in blocks {
        off.push(off.last().unwrap() + b.dim());
    }
    off
}

fn block_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

fn stack_rows(zs: &[DMatrix<f64>]) -> DMatrix<f64> {
    let t = zs.first().map_or(0, |z| z.ncols());
    let m: usize = zs.iter().map(|z| z.nrows()).sum();
    let mut out = DMatrix::zeros(m, t);
    let mut r = 0;
    for z in zs {
        out.view_mut((r, 0), z.shape()).copy_from(z);
        r += z.nrows();
    }
    out
}

fn check_multi(zs: &[DMatrix<f64>], y: &DMatrix<f64>, bounds: &[SymMatrix]) -> Result<()> {
    if zs.is_empty() || zs.len() != bounds.len() {
        return Err(shape_err(format!(
            "{} data blocks for {} bounds",
            zs.len(),
            bounds.len()
        )));
    }
    for (i, (z, g)) in zs.iter().zip(bounds).enumerate() {
        if z.ncols() != y.ncols() {
            return Err(shape_err(format!(
                "Z{i} has {} columns, Y has {}",
                z.ncols(),
                y.ncols()
            )));
        }
        if g.dim() != z.nrows() {
            return Err(shape_err(format!(
                "Γ{i} is {0}x{0}, Z{i} has {1} rows",
                g.dim(),
                z.nrows()
            )));
        }
    }
    Ok(())
}

/// Searches a PSD completion `Ĝ` of `blockdiag(bounds)` with
/// `YᵀY ⪯ ZᵀĜZ`, `Z` the vertical stack of `zs`. `None` when the oracle
/// reports infeasibility.
pub fn multi_bound_exists(
    zs: &[DMatrix<f64>],
    y: &DMatrix<f64>,
    bounds: &[SymMatrix],
    oracle: &dyn LmiOracle,
) -> Result<Option<CompletionCertificate>> {
    check_multi(zs, y, bounds)?;
    let off = offsets(bounds);
    let m = *off.last().unwrap();
    let t = y.ncols();
    let z = stack_rows(zs);
    let pairs: Vec<_> = block_pairs(bounds.len()).collect();
    // One variable per entry of each off-diagonal block, column-major.
    let mut vars = Vec::new();
    for &(i, j) in &pairs {
        for s in 0..bounds[j].dim() {
            for r in 0..bounds[i].dim() {
                vars.push((off[i] + r, off[j] + s));
            }
        }
    }
    let base = SymMatrix::block_diagonal(bounds);
    let completion_coeffs = vars
        .iter()
        .map(|&(a, b)| {
            let mut e = DMatrix::zeros(m, m);
            e[(a, b)] = 1.0;
            e[(b, a)] = 1.0;
            e
        })
        .collect();
    let mut problem = LmiProblem::new(vars.len());
    problem.add_constraint(AffineMatrixMap::new(
        base.as_matrix().clone(),
        completion_coeffs,
    )?)?;
    if t > 0 {
        let constant = z.transpose() * base.as_matrix() * &z - y.transpose() * y;
        let coeffs = vars
            .iter()
            .map(|&(a, b)| {
                let outer = z.row(a).transpose() * z.row(b);
                &outer + outer.transpose()
            })
            .collect();
        problem.add_constraint(AffineMatrixMap::new(
            SymMatrix::symmetrized(constant).into_inner(),
            coeffs,
        )?)?;
    }
    let res = oracle.solve_feasibility(&problem)?;
    match res.status {
        FeasibilityStatus::Feasible => {}
        FeasibilityStatus::InfeasibleHeuristic => return Ok(None),
        FeasibilityStatus::MaxIterations => {
            return Err(Error::OracleFailure(format!(
                "iteration cap reached at margin {:e}",
                res.margin
            )));
        }
    }
    let w = res.point.unwrap_or_else(|| DVector::zeros(vars.len()));
    let mut cert = CompletionCertificate::block_diagonal(bounds.to_vec());
    let mut k = 0;
    for (p, &(i, j)) in pairs.iter().enumerate() {
        for s in 0..bounds[j].dim() {
            for r in 0..bounds[i].dim() {
                cert.offdiag[p][(r, s)] = w[k];
                k += 1;
            }
        }
    }
    Ok(Some(cert))
}

/// Reconstructs one admissible `(M₁ … M_N)` from a completion certificate,
/// using the minimum-norm interpolant `M = Y (Ĝ^{1/2}Z)† Ĝ^{1/2}`.
pub fn certificate_to_operators(
    cert: &CompletionCertificate,
    zs: &[DMatrix<f64>],
    y: &DMatrix<f64>,
) -> Result<Vec<DMatrix<f64>>> {
    check_multi(zs, y, &cert.blocks)?;
    let g = cert.assembled();
    let z = stack_rows(zs);
    let g_half = sqrt_psd(&g).map_err(|e| Error::CertificateInvalid(e.to_string()))?;
    let k = g_half.as_matrix() * &z;
    let scale = gram(&k).spectral_radius().max(1.0);
    let k_pinv = pinv_with_cutoff(&k, (DEFAULT_RANK_TOL * scale).sqrt());
    let m = y * k_pinv * g_half.as_matrix();
    let residual = spectral_norm(&(y - &m * &z));
    let ytol = 1e-6 * spectral_norm(y).max(1.0);
    if residual > ytol {
        return Err(Error::CertificateInvalid(format!(
            "interpolation residual {residual:e}"
        )));
    }
    let off = cert.offsets();
    let mut out = Vec::with_capacity(cert.blocks.len());
    for (i, gam) in cert.blocks.iter().enumerate() {
        let mi = m.columns(off[i], gam.dim()).into_owned();
        let bound = gam.lambda_max().max(0.0).sqrt() + 1e-6;
        let norm = spectral_norm(&mi);
        if norm > bound {
            return Err(Error::CertificateInvalid(format!(
                "block {i} has norm {norm} > {bound}"
            )));
        }
        out.push(mi);
    }
    Ok(out)
}
