//! Data-consistency verification and minimal-bound inference.
//!
//! The data satisfy `X₊ − BU = [A V] [X; I]`. Existence of `A` with
//! `‖A‖ ≤ L` and `V` with `‖V‖ ≤ α√t` is equivalent to the existence of
//! `Γ̂ ∈ ℝ^{n×t}` with
//!
//! ```text
//! [ L²Iₙ  Γ̂    ]
//! [ Γ̂ᵀ    α²tIₜ ] ⪰ 0,   L²XᵀX + XᵀΓ̂ + Γ̂ᵀX + tα²Iₜ − YᵀY ⪰ 0,
//! ```
//!
//! with `Y = X₊ − BU`. Both conditions are affine in `Γ̂` and, after the
//! substitutions `ℓ = L²` and `s = α²`, also in the bounds themselves.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::interp::CompletionCertificate;
use crate::lmi::FEAS_TOL;
use crate::lmi::{AffineMatrixMap, FeasibilityStatus, LmiOracle, LmiProblem};
use crate::matcore::{
    pinv, psd_check_scaled, spectral_norm, SymMatrix, DEFAULT_PSD_TOL, DEFAULT_RANK_TOL,
};
use crate::sysio::apply_transform;

/// Data matrices in reversed-time column order:
/// `X = [x_{t−1} … x₀]`, `X₊ = [x_t … x₁]`, `U = [u_{t−1} … u₀]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataBatch {
    pub x: DMatrix<f64>,
    pub x_plus: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl DataBatch {
    pub fn new(
        x: DMatrix<f64>,
        x_plus: DMatrix<f64>,
        u: DMatrix<f64>,
        b: DMatrix<f64>,
    ) -> Result<Self> {
        let n = b.nrows();
        let t = x.ncols();
        if x.nrows() != n || x_plus.nrows() != n {
            return Err(shape_err(format!(
                "X has {} rows and X₊ has {}, B has {n}",
                x.nrows(),
                x_plus.nrows()
            )));
        }
        if u.nrows() != b.ncols() {
            return Err(shape_err(format!(
                "U has {} rows, B has {} columns",
                u.nrows(),
                b.ncols()
            )));
        }
        if x_plus.ncols() != t || u.ncols() != t {
            return Err(shape_err(format!(
                "column counts differ: X {t}, X₊ {}, U {}",
                x_plus.ncols(),
                u.ncols()
            )));
        }
        if [&x, &x_plus, &u, &b]
            .iter()
            .any(|m| m.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidMatrix("non-finite data entry".into()));
        }
        Ok(Self { x, x_plus, u, b })
    }

    /// Autonomous data (`B = 0` with a single zero input channel).
    pub fn autonomous(x: DMatrix<f64>, x_plus: DMatrix<f64>) -> Result<Self> {
        let (n, t) = x.shape();
        Self::new(x, x_plus, DMatrix::zeros(1, t), DMatrix::zeros(n, 1))
    }

    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn t(&self) -> usize {
        self.x.ncols()
    }

    /// `X₊ − BU`.
    pub fn targets(&self) -> DMatrix<f64> {
        &self.x_plus - &self.b * &self.u
    }

    /// Multiplies every data matrix (not `B`) by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            x: &self.x * factor,
            x_plus: &self.x_plus * factor,
            u: &self.u * factor,
            b: self.b.clone(),
        }
    }
}

/// Prior bounds: `‖A‖ ≤ L` (optionally in the `P`-energy metric) and
/// `VVᵀ ⪯ α²tI`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorBounds {
    #[serde(rename = "L")]
    pub l: f64,
    pub alpha: f64,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<SymMatrix>,
}

impl PriorBounds {
    pub fn new(l: f64, alpha: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "L must be positive, got {l}"
            )));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be nonnegative, got {alpha}"
            )));
        }
        Ok(Self { l, alpha, p: None })
    }

    pub fn with_metric(mut self, p: SymMatrix) -> Result<Self> {
        let lmin = p.lambda_min();
        if !(lmin > 0.0) {
            return Err(Error::NotPd { min_eig: lmin });
        }
        self.p = Some(p);
        Ok(self)
    }
}

/// How a bound enters the LMI: fixed value or decision variable.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Bound {
    Fixed(f64),
    Free,
}

/// Layout of the decision vector `w = [ℓ?, s?, vec(Γ̂)]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub l2: Option<usize>,
    pub s: Option<usize>,
    pub gamma: usize,
    pub n: usize,
    pub k: usize,
}

impl Layout {
    pub fn gamma_matrix(&self, w: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(
            self.n,
            self.k,
            &w.as_slice()[self.gamma..self.gamma + self.n * self.k],
        )
    }
}

/// Builds the two consistency LMIs for `Y = A X + V` with `k = X.ncols()`
/// noise columns and budget `α²k`.
pub(crate) fn consistency_problem(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    l2: Bound,
    s: Bound,
) -> Result<(LmiProblem, Layout)> {
    let (n, k) = x.shape();
    if y.shape() != (n, k) {
        return Err(shape_err(format!(
            "targets are {}x{}, expected {n}x{k}",
            y.nrows(),
            y.ncols()
        )));
    }
    let mut next = 0;
    let mut slot = |b: Bound| match b {
        Bound::Free => {
            next += 1;
            Some(next - 1)
        }
        Bound::Fixed(_) => None,
    };
    let l2_slot = slot(l2);
    let s_slot = slot(s);
    let layout = Layout {
        l2: l2_slot,
        s: s_slot,
        gamma: next,
        n,
        k,
    };
    let var_dim = next + n * k;
    let l2v = match l2 {
        Bound::Fixed(v) => v,
        Bound::Free => 0.0,
    };
    let sv = match s {
        Bound::Fixed(v) => v,
        Bound::Free => 0.0,
    };
    let kf = k as f64;

    // Completion block [[ℓI, Γ̂], [Γ̂ᵀ, s k I]].
    let dim1 = n + k;
    let mut c1 = DMatrix::zeros(dim1, dim1);
    for i in 0..n {
        c1[(i, i)] = l2v;
    }
    for j in 0..k {
        c1[(n + j, n + j)] = sv * kf;
    }
    let mut coeff1 = Vec::with_capacity(var_dim);
    if l2_slot.is_some() {
        let mut e = DMatrix::zeros(dim1, dim1);
        e.view_mut((0, 0), (n, n)).fill_with_identity();
        coeff1.push(e);
    }
    if s_slot.is_some() {
        let mut e = DMatrix::zeros(dim1, dim1);
        for j in 0..k {
            e[(n + j, n + j)] = kf;
        }
        coeff1.push(e);
    }
    for j in 0..k {
        for i in 0..n {
            let mut e = DMatrix::zeros(dim1, dim1);
            e[(i, n + j)] = 1.0;
            e[(n + j, i)] = 1.0;
            coeff1.push(e);
        }
    }
    let mut p = LmiProblem::new(var_dim);
    p.add_constraint(AffineMatrixMap::new(c1, coeff1)?)?;

    if k > 0 {
        let xtx = x.transpose() * x;
        let yty = y.transpose() * y;
        let c2 = &xtx * l2v + DMatrix::identity(k, k) * (sv * kf) - &yty;
        let mut coeff2 = Vec::with_capacity(var_dim);
        if l2_slot.is_some() {
            coeff2.push(xtx.clone());
        }
        if s_slot.is_some() {
            coeff2.push(DMatrix::identity(k, k) * kf);
        }
        for j in 0..k {
            for i in 0..n {
                let mut e = DMatrix::zeros(k, k);
                for a in 0..k {
                    e[(a, j)] += x[(i, a)];
                    e[(j, a)] += x[(i, a)];
                }
                coeff2.push(e);
            }
        }
        p.add_constraint(AffineMatrixMap::new(
            SymMatrix::symmetrized(c2).into_inner(),
            coeff2,
        )?)?;
    }
    for idx in [l2_slot, s_slot].into_iter().flatten() {
        let coeffs = (0..var_dim)
            .map(|v| DMatrix::from_element(1, 1, if v == idx { 1.0 } else { 0.0 }))
            .collect();
        p.add_constraint(AffineMatrixMap::new(DMatrix::zeros(1, 1), coeffs)?)?;
    }
    Ok((p, layout))
}

/// Outcome of [`verify`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    /// Completion of `blockdiag(L²Iₙ, α²tIₜ)` whose off-diagonal block is `Γ̂`.
    pub certificate: Option<CompletionCertificate>,
    /// Smallest eigenvalue over both LMIs at the returned point.
    pub margin: f64,
    /// Set when the verdict came from the relaxed `P`-metric transform: it is
    /// sufficient for consistency, not necessary.
    pub conservative: bool,
    pub status: FeasibilityStatus,
}

fn certificate(l2: f64, s: f64, k: usize, gamma: DMatrix<f64>) -> CompletionCertificate {
    let n = gamma.nrows();
    CompletionCertificate {
        blocks: vec![
            SymMatrix::scaled_identity(n, l2),
            SymMatrix::scaled_identity(k, s * k as f64),
        ],
        offdiag: vec![gamma],
    }
}

/// Checks whether the data can be explained by some `A` with `‖A‖ ≤ L` and
/// noise `V` with `VVᵀ ⪯ α²tI`.
pub fn verify(
    data: &DataBatch,
    bounds: &PriorBounds,
    oracle: &dyn LmiOracle,
) -> Result<ConsistencyReport> {
    if let Some(p) = &bounds.p {
        let tr = apply_transform(data, bounds, p)?;
        let mut rep = verify(&tr.batch, &tr.bounds, oracle)?;
        rep.conservative = true;
        return Ok(rep);
    }
    verify_targets(&data.x, &data.targets(), bounds.l, bounds.alpha, oracle)
}

pub(crate) fn verify_targets(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    l: f64,
    alpha: f64,
    oracle: &dyn LmiOracle,
) -> Result<ConsistencyReport> {
    let (l2, s) = (l * l, alpha * alpha);
    if alpha == 0.0 {
        return Ok(noise_free_report(x, y, l2));
    }
    let (problem, layout) = consistency_problem(x, y, Bound::Fixed(l2), Bound::Fixed(s))?;
    let res = oracle.solve_feasibility(&problem)?;
    let w = res
        .point
        .clone()
        .unwrap_or_else(|| DVector::zeros(problem.var_dim()));
    let margin = problem.margin(&w);
    let consistent = res.is_feasible();
    Ok(ConsistencyReport {
        consistent,
        certificate: consistent.then(|| certificate(l2, s, layout.k, layout.gamma_matrix(&w))),
        margin,
        conservative: false,
        status: res.status,
    })
}

/// With `α = 0` the completion block forces `Γ̂ = 0`, leaving the plain
/// interpolation condition `YᵀY ⪯ L²XᵀX`.
fn noise_free_report(x: &DMatrix<f64>, y: &DMatrix<f64>, l2: f64) -> ConsistencyReport {
    let (n, k) = x.shape();
    let xtx = x.transpose() * x * l2;
    let yty = y.transpose() * y;
    let d = SymMatrix::symmetrized(&xtx - &yty);
    let scale = xtx.amax().max(yty.amax()).max(1.0);
    let margin = d.lambda_min().min(l2);
    let consistent = k == 0 || d.lambda_min() >= -DEFAULT_PSD_TOL * scale;
    ConsistencyReport {
        consistent,
        certificate: consistent.then(|| certificate(l2, 0.0, k, DMatrix::zeros(n, k))),
        margin,
        conservative: false,
        status: if consistent {
            FeasibilityStatus::Feasible
        } else {
            FeasibilityStatus::InfeasibleHeuristic
        },
    }
}

/// Re-checks a certificate of [`verify`] against both LMIs with
/// [`psd_check_scaled`], independently of the solver.
pub fn certificate_holds(data: &DataBatch, cert: &CompletionCertificate, tol: f64) -> Result<bool> {
    let g = cert.assembled();
    let scale = g.spectral_radius().max(1.0);
    if !psd_check_scaled(&g, tol, scale)? {
        return Ok(false);
    }
    let n = data.n();
    let t = data.t();
    if cert.blocks.len() != 2 || cert.blocks[0].dim() != n || cert.blocks[1].dim() != t {
        return Err(shape_err("certificate does not match the data dimensions"));
    }
    let y = data.targets();
    let mut z = DMatrix::zeros(n + t, t);
    z.view_mut((0, 0), (n, t)).copy_from(&data.x);
    z.view_mut((n, 0), (t, t)).fill_with_identity();
    let d = SymMatrix::symmetrized(z.transpose() * g.as_matrix() * &z - y.transpose() * &y);
    let scale = d
        .spectral_radius()
        .max((y.transpose() * &y).amax())
        .max(1.0);
    psd_check_scaled(&d, tol, scale)
}

/// Result of a minimal-bound inference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InferenceResult {
    /// `α*` or `L*`.
    pub value: f64,
    pub certificate: CompletionCertificate,
    /// The same optimum obtained by bisection over [`verify`].
    pub cross_check: Option<f64>,
    /// `|value − cross_check|`.
    pub cross_check_residual: Option<f64>,
}

/// Options for the inference programs.
#[derive(Debug, Clone, Copy)]
pub struct InferenceOptions {
    pub cross_check: bool,
    /// Bisection width for the cross-check.
    pub bisection_tol: f64,
    /// Disagreement above which a diagnostic is logged.
    pub cross_check_tol: f64,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        Self {
            cross_check: true,
            bisection_tol: 1e-5,
            cross_check_tol: 1e-3,
        }
    }
}

/// Minimal noise level `α*` for a given `L`.
pub fn min_noise(data: &DataBatch, l: f64, oracle: &dyn LmiOracle) -> Result<InferenceResult> {
    min_noise_with(data, l, oracle, InferenceOptions::default())
}

pub fn min_noise_with(
    data: &DataBatch,
    l: f64,
    oracle: &dyn LmiOracle,
    opts: InferenceOptions,
) -> Result<InferenceResult> {
    PriorBounds::new(l, 0.0)?;
    let x = &data.x;
    let y = data.targets();
    let t = data.t();
    if t == 0 {
        return Ok(InferenceResult {
            value: 0.0,
            certificate: certificate(l * l, 0.0, 0, DMatrix::zeros(data.n(), 0)),
            cross_check: opts.cross_check.then_some(0.0),
            cross_check_residual: opts.cross_check.then_some(0.0),
        });
    }
    let (mut problem, layout) = consistency_problem(x, &y, Bound::Fixed(l * l), Bound::Free)?;
    let s_idx = layout.s.expect("s is free");
    let mut c = DVector::zeros(problem.var_dim());
    c[s_idx] = 1.0;
    problem.set_objective(c)?;
    let (s_star, w) = oracle.solve_linear_objective(&problem)?;
    let value = s_star.max(0.0).sqrt();
    let cert = certificate(l * l, w[s_idx].max(0.0), t, layout.gamma_matrix(&w));
    let cross = if opts.cross_check {
        Some(bisect(value, opts.bisection_tol, |a| {
            Ok(verify_targets(x, &y, l, a, oracle)?.consistent)
        })?)
    } else {
        None
    };
    Ok(finish(value, cert, cross, opts))
}

/// Interval `[0, L̄]` containing `L*(α)`.
///
/// Without a gain bound the smallest noise explaining the data is
/// `V = Y(I − X†X)`, so the data are consistent for some `L` iff
/// `‖Y(I − X†X)‖ ≤ α√t`, and then `L̄ = ‖Y X†‖` is attained by `A = Y X†`.
pub fn gain_bracket(data: &DataBatch, alpha: f64) -> Result<[f64; 2]> {
    let x = &data.x;
    let y = data.targets();
    let xp = pinv(x, DEFAULT_RANK_TOL);
    let fit = &y * &xp;
    let need = spectral_norm(&(&y - &fit * x));
    let budget = alpha * (data.t() as f64).sqrt();
    if need > budget + FEAS_TOL * need.max(1.0) {
        return Err(Error::Infeasible(format!(
            "no gain bound explains the data at alpha = {alpha}: the unexplained part has norm {need:.6} > alpha*sqrt(t) = {budget:.6}"
        )));
    }
    Ok([0.0, spectral_norm(&fit)])
}

/// Minimal energy amplification bound `L*` for a given `α`.
pub fn min_gain(data: &DataBatch, alpha: f64, oracle: &dyn LmiOracle) -> Result<InferenceResult> {
    min_gain_with(data, alpha, oracle, InferenceOptions::default())
}

pub fn min_gain_with(
    data: &DataBatch,
    alpha: f64,
    oracle: &dyn LmiOracle,
    opts: InferenceOptions,
) -> Result<InferenceResult> {
    PriorBounds::new(1.0, alpha)?;
    let x = &data.x;
    let y = data.targets();
    let t = data.t();
    gain_bracket(data, alpha)?;
    if t == 0 {
        return Ok(InferenceResult {
            value: 0.0,
            certificate: certificate(0.0, alpha * alpha, 0, DMatrix::zeros(data.n(), 0)),
            cross_check: opts.cross_check.then_some(0.0),
            cross_check_residual: opts.cross_check.then_some(0.0),
        });
    }
    let (mut problem, layout) =
        consistency_problem(x, &y, Bound::Free, Bound::Fixed(alpha * alpha))?;
    let l_idx = layout.l2.expect("ℓ is free");
    let mut c = DVector::zeros(problem.var_dim());
    c[l_idx] = 1.0;
    problem.set_objective(c)?;
    let (l2_star, w) = oracle.solve_linear_objective(&problem)?;
    let value = l2_star.max(0.0).sqrt();
    let cert = certificate(w[l_idx].max(0.0), alpha * alpha, t, layout.gamma_matrix(&w));
    let cross = if opts.cross_check {
        Some(bisect(value, opts.bisection_tol, |l| {
            if l <= 0.0 {
                return Ok(false);
            }
            Ok(verify_targets(x, &y, l, alpha, oracle)?.consistent)
        })?)
    } else {
        None
    };
    Ok(finish(value, cert, cross, opts))
}

fn finish(
    value: f64,
    certificate: CompletionCertificate,
    cross: Option<f64>,
    opts: InferenceOptions,
) -> InferenceResult {
    let residual = cross.map(|c| (c - value).abs());
    if let Some(r) = residual {
        if r > opts.cross_check_tol {
            log::warn!("SDP optimum {value} and bisection cross-check {cross:?} disagree by {r:e}");
        }
    }
    InferenceResult {
        value,
        certificate,
        cross_check: cross,
        cross_check_residual: residual,
    }
}

/// Smallest `v ≥ 0` with `feasible(v)`, for a predicate monotone in `v`,
/// bracketed around `guess`.
fn bisect(guess: f64, tol: f64, mut feasible: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    if feasible(0.0)? {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = (guess * 1.07).max(tol);
    let mut tries = 0;
    while !feasible(hi)? {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 40 {
            return Err(Error::Infeasible(format!("no feasible value below {hi:e}")));
        }
    }
    // Tighten the lower end near the guess to save iterations.
    let probe = guess * 0.96;
    if probe > lo && probe < hi {
        if feasible(probe)? {
            hi = probe;
        } else {
            lo = probe;
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One point of the noise/gain trade-off curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(rename = "L")]
    pub l: f64,
    pub alpha_star: Option<f64>,
    pub error: Option<String>,
}

/// `α*(L)` over an ascending grid. Failed points are recorded and skipped.
///
/// A certificate at `L` stays valid at any `L′ ≥ L`, so each value is
/// replaced by the running minimum; this removes solver jitter in flat
/// stretches of the curve.
pub fn tradeoff_curve(
    data: &DataBatch,
    grid: &[f64],
    oracle: &dyn LmiOracle,
) -> Result<Vec<CurvePoint>> {
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument("L grid must be ascending".into()));
    }
    let opts = InferenceOptions {
        cross_check: false,
        ..Default::default()
    };
    let solve = |&l: &f64| match min_noise_with(data, l, oracle, opts) {
        Ok(r) => CurvePoint {
            l,
            alpha_star: Some(r.value),
            error: None,
        },
        Err(e) => CurvePoint {
            l,
            alpha_star: None,
            error: Some(e.to_string()),
        },
    };
    #[cfg(feature = "parallel")]
    let mut points: Vec<CurvePoint> = {
        use rayon::prelude::*;
        grid.par_iter().map(solve).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut points: Vec<CurvePoint> = grid.iter().map(solve).collect();
    let mut best = f64::INFINITY;
    for p in &mut points {
        if let Some(a) = p.alpha_star.as_mut() {
            best = best.min(*a);
            *a = best;
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::SoftMinSolver;

    #[test]
    fn empty_data_is_consistent() {
        let data = DataBatch::new(
            DMatrix::zeros(2, 0),
            DMatrix::zeros(2, 0),
            DMatrix::zeros(1, 0),
            DMatrix::zeros(2, 1),
        )
        .unwrap();
        let rep = verify(
            &data,
            &PriorBounds::new(0.3, 0.0).unwrap(),
            &SoftMinSolver::default(),
        )
        .unwrap();
        assert!(rep.consistent);
        assert!(certificate_holds(&data, rep.certificate.as_ref().unwrap(), 1e-6).unwrap());
    }

    #[test]
    fn bounds_validation() {
        assert!(PriorBounds::new(0.0, 0.1).is_err());
        assert!(PriorBounds::new(1.0, -0.1).is_err());
        assert!(PriorBounds::new(1.0, 0.1)
            .unwrap()
            .with_metric(SymMatrix::from_diagonal(&[1.0, 0.0]))
            .is_err());
    }

    #[test]
    fn batch_shape_checks() {
        let r = DataBatch::new(
            DMatrix::zeros(2, 3),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(1, 3),
            DMatrix::zeros(2, 1),
        );
        assert!(matches!(r, Err(Error::Shape(_))));
        let r = DataBatch::new(
            DMatrix::zeros(2, 3),
            DMatrix::zeros(2, 3),
            DMatrix::zeros(2, 3),
            DMatrix::zeros(2, 1),
        );
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn interpolable_data_need_no_noise() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, -0.1, 0.4]);
        let x = DMatrix::from_row_slice(2, 3, &[1.0, 0.2, -0.7, 0.3, -1.0, 0.5]);
        let data = DataBatch::autonomous(x.clone(), &a * &x).unwrap();
        let r = min_noise(&data, 1.0, &SoftMinSolver::default()).unwrap();
        assert!(r.value < 1e-3, "{}", r.value);
        let zero = DataBatch::autonomous(x.clone(), DMatrix::zeros(2, 3)).unwrap();
        let r = min_gain(&zero, 0.0, &SoftMinSolver::default()).unwrap();
        assert!(r.value <= 1e-3, "{}", r.value);
    }
}
