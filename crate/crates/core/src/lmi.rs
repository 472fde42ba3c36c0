//! Feasibility oracle for small dense linear matrix inequalities.
//!
//! A problem is a list of affine maps `Fᵢ(w) = Cᵢ + Σₖ wₖ Fᵢₖ` into symmetric
//! matrices. The oracle maximizes the margin `m(w) = minᵢ λ_min(Fᵢ(w))`
//! through its soft-min smoothing
//!
//! ```text
//! f_μ(w) = −μ · log Σᵢ Σⱼ exp(−λⱼ(Fᵢ(w)) / μ)
//! ```
//!
//! with μ decreased geometrically and an L-BFGS inner loop driven by the
//! analytic gradient `∂f_μ/∂wₖ = Σᵢ tr(Pᵢ Fᵢₖ)`, where `Pᵢ` is the
//! softmax-weighted sum of eigenvector outer products. The verdict always
//! comes from the exact margin, never from `f_μ`.
//!
//! Infeasibility is heuristic: there is no dual certificate.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::SymMatrix;

/// Relative feasibility slack: `ε_feas = FEAS_TOL · scale`.
pub const FEAS_TOL: f64 = 1e-6;

/// Symmetric-matrix-valued affine function of the decision vector.
#[derive(Debug, Clone)]
pub struct AffineMatrixMap {
    constant: SymMatrix,
    coefficients: Vec<SymMatrix>,
    // Upper-triangular nonzeros of each coefficient, for fast evaluation.
    sparse: Vec<Vec<(usize, usize, f64)>>,
}

impl AffineMatrixMap {
    /// Fails with [`Error::IllFormed`] on asymmetric data or mismatched sizes.
    pub fn new(constant: DMatrix<f64>, coefficients: Vec<DMatrix<f64>>) -> Result<Self> {
        let k = constant.nrows();
        if constant.ncols() != k {
            return Err(Error::IllFormed(format!(
                "constant block is {}x{}",
                k,
                constant.ncols()
            )));
        }
        let scale = constant.amax().max(1.0);
        let to_sym = |m: DMatrix<f64>, what: &str| -> Result<SymMatrix> {
            if m.shape() != (k, k) {
                return Err(Error::IllFormed(format!(
                    "{what} is {}x{}, expected {k}x{k}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let asym = (&m - m.transpose()).amax();
            if asym > 1e-12 * scale.max(m.amax()) {
                return Err(Error::IllFormed(format!(
                    "{what} is not symmetric ({asym:e})"
                )));
            }
            SymMatrix::new(m).map_err(|e| Error::IllFormed(format!("{what}: {e}")))
        };
        let constant = to_sym(constant, "constant")?;
        let coefficients = coefficients
            .into_iter()
            .enumerate()
            .map(|(i, m)| to_sym(m, &format!("coefficient {i}")))
            .collect::<Result<Vec<_>>>()?;
        let sparse = coefficients
            .iter()
            .map(|c| {
                let m = c.as_matrix();
                let mut nz = Vec::new();
                for j in 0..k {
                    for i in 0..=j {
                        if m[(i, j)] != 0.0 {
                            nz.push((i, j, m[(i, j)]));
                        }
                    }
                }
                nz
            })
            .collect();
        Ok(Self {
            constant,
            coefficients,
            sparse,
        })
    }

    pub fn dim(&self) -> usize {
        self.constant.dim()
    }

    pub fn num_vars(&self) -> usize {
        self.coefficients.len()
    }

    pub fn constant(&self) -> &SymMatrix {
        &self.constant
    }

    pub fn coefficients(&self) -> &[SymMatrix] {
        &self.coefficients
    }

    pub fn eval(&self, w: &DVector<f64>) -> SymMatrix {
        let mut m = self.constant.as_matrix().clone();
        for (nz, &wk) in self.sparse.iter().zip(w.iter()) {
            if wk == 0.0 {
                continue;
            }
            for &(i, j, v) in nz {
                m[(i, j)] += wk * v;
                if i != j {
                    m[(j, i)] += wk * v;
                }
            }
        }
        SymMatrix::symmetrized(m)
    }
}

/// A finite family of LMIs `Fᵢ(w) ⪰ 0` with an optional linear objective
/// `min cᵀw`.
#[derive(Debug, Clone)]
pub struct LmiProblem {
    var_dim: usize,
    constraints: Vec<AffineMatrixMap>,
    objective: Option<DVector<f64>>,
}

impl LmiProblem {
    pub fn new(var_dim: usize) -> Self {
        Self {
            var_dim,
            constraints: Vec::new(),
            objective: None,
        }
    }

    pub fn add_constraint(&mut self, c: AffineMatrixMap) -> Result<()> {
        if c.num_vars() != self.var_dim {
            return Err(Error::IllFormed(format!(
                "constraint has {} coefficients for {} variables",
                c.num_vars(),
                self.var_dim
            )));
        }
        self.constraints.push(c);
        Ok(())
    }

    pub fn with_constraint(mut self, c: AffineMatrixMap) -> Result<Self> {
        self.add_constraint(c)?;
        Ok(self)
    }

    pub fn set_objective(&mut self, c: DVector<f64>) -> Result<()> {
        if c.len() != self.var_dim {
            return Err(Error::IllFormed(format!(
                "objective has length {}, expected {}",
                c.len(),
                self.var_dim
            )));
        }
        self.objective = Some(c);
        Ok(())
    }

    pub fn with_objective(mut self, c: DVector<f64>) -> Result<Self> {
        self.set_objective(c)?;
        Ok(self)
    }

    pub fn var_dim(&self) -> usize {
        self.var_dim
    }

    pub fn constraints(&self) -> &[AffineMatrixMap] {
        &self.constraints
    }

    pub fn objective(&self) -> Option<&DVector<f64>> {
        self.objective.as_ref()
    }

    /// `max(1, largest constant-block spectral norm)`; tolerances scale with it.
    pub fn scale(&self) -> f64 {
        self.constraints
            .iter()
            .fold(1.0, |s, c| s.max(c.constant().spectral_radius()))
    }

    pub fn feasibility_tolerance(&self) -> f64 {
        FEAS_TOL * self.scale()
    }

    /// Exact margin `minᵢ λ_min(Fᵢ(w))`; `+inf` with no constraints.
    pub fn margin(&self, w: &DVector<f64>) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.eval(w).lambda_min())
            .fold(f64::INFINITY, f64::min)
    }

    /// Per-constraint smallest eigenvalues at `w`.
    pub fn constraint_margins(&self, w: &DVector<f64>) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| c.eval(w).lambda_min())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeasibilityStatus {
    Feasible,
    InfeasibleHeuristic,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct FeasibilityResult {
    pub status: FeasibilityStatus,
    pub point: Option<DVector<f64>>,
    /// Exact margin attained at `point`.
    pub margin: f64,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }
}

/// Anything that can decide LMI feasibility and minimize a linear objective.
pub trait LmiOracle: Sync {
    fn solve_feasibility_from(
        &self,
        p: &LmiProblem,
        start: Option<&DVector<f64>>,
    ) -> Result<FeasibilityResult>;

    fn solve_feasibility(&self, p: &LmiProblem) -> Result<FeasibilityResult> {
        self.solve_feasibility_from(p, None)
    }

    /// Returns `(cᵀw, w)` with `w` feasible to `ε_feas` and the objective
    /// bracketed to within the oracle's objective tolerance.
    fn solve_linear_objective(&self, p: &LmiProblem) -> Result<(f64, DVector<f64>)>;
}

/// Tuning knobs for [`SoftMinSolver`].
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// First smoothing level, relative to the problem scale.
    pub mu_start: f64,
    /// Last smoothing level, relative to the problem scale.
    pub mu_end: f64,
    /// Geometric decrease factor between smoothing levels.
    pub mu_factor: f64,
    pub max_inner_iters: usize,
    pub lbfgs_memory: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Relative bisection width for linear objectives.
    pub objective_tol: f64,
    /// Relative feasibility slack; see [`FEAS_TOL`].
    pub feas_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            mu_start: 1e-1,
            mu_end: 1e-7,
            mu_factor: 0.1,
            max_inner_iters: 400,
            lbfgs_memory: 12,
            restarts: 3,
            seed: 0x5eed,
            objective_tol: 1e-7,
            feas_tol: FEAS_TOL,
        }
    }
}

/// The default oracle: smoothed eigenvalue maximization.
#[derive(Debug, Clone, Default)]
pub struct SoftMinSolver {
    pub options: SolverOptions,
}

impl SoftMinSolver {
    pub fn new(options: SolverOptions) -> Self {
        Self { options }
    }
}

struct Eval {
    smooth: f64,
    margin: f64,
    grad: DVector<f64>,
}

fn evaluate(p: &LmiProblem, w: &DVector<f64>, mu: f64) -> Eval {
    let decomps: Vec<_> = p.constraints.iter().map(|c| c.eval(w).spectral()).collect();
    let margin = decomps
        .iter()
        .map(|d| d.lambda_min())
        .fold(f64::INFINITY, f64::min);
    let mut grad = DVector::zeros(p.var_dim);
    if !margin.is_finite() {
        return Eval {
            smooth: margin,
            margin,
            grad,
        };
    }
    let mut total = 0.0;
    for d in &decomps {
        total += d
            .eigenvalues
            .iter()
            .map(|&l| (-(l - margin) / mu).exp())
            .sum::<f64>();
    }
    let smooth = margin - mu * total.ln();
    for (c, d) in p.constraints.iter().zip(&decomps) {
        let k = d.dim();
        // P = Σⱼ πⱼ vⱼ vⱼᵀ restricted to eigenvalues with non-negligible weight.
        let mut pm = DMatrix::<f64>::zeros(k, k);
        let mut any = false;
        for j in 0..k {
            let pi = (-(d.eigenvalues[j] - margin) / mu).exp() / total;
            if pi < 1e-18 {
                continue;
            }
            any = true;
            let v = d.eigenvectors.column(j);
            pm.ger(pi, &v, &v, 1.0);
        }
        if !any {
            continue;
        }
        for (g, nz) in grad.iter_mut().zip(&c.sparse) {
            let mut acc = 0.0;
            for &(i, j, v) in nz {
                acc += if i == j {
                    v * pm[(i, i)]
                } else {
                    2.0 * v * pm[(i, j)]
                };
            }
            *g += acc;
        }
    }
    Eval {
        smooth,
        margin,
        grad,
    }
}

struct Tracker {
    best_w: DVector<f64>,
    best_margin: f64,
    target: f64,
}

impl Tracker {
    fn offer(&mut self, w: &DVector<f64>, margin: f64) -> bool {
        if margin > self.best_margin {
            self.best_margin = margin;
            self.best_w.copy_from(w);
        }
        self.best_margin >= self.target
    }
}

enum StageEnd {
    Converged,
    Target,
    Cap,
}

/// L-BFGS ascent on `f_μ`. Returns how the stage ended and the final point.
fn ascend(
    p: &LmiProblem,
    w0: DVector<f64>,
    mu: f64,
    opts: &SolverOptions,
    tracker: &mut Tracker,
    scale: f64,
) -> (StageEnd, DVector<f64>, f64) {
    let mut w = w0;
    let mut cur = evaluate(p, &w, mu);
    if tracker.offer(&w, cur.margin) {
        return (StageEnd::Target, w, cur.grad.norm());
    }
    let mut hist: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();
    let gtol = 1e-10 * scale;
    let mut stall = 0;
    for _ in 0..opts.max_inner_iters {
        let gnorm = cur.grad.norm();
        if gnorm <= gtol {
            return (StageEnd::Converged, w, gnorm);
        }
        // Two-loop recursion on the ascent direction (maximization).
        let mut q = cur.grad.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * s.dot(&q);
            q.axpy(-a, y, 1.0);
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            q *= s.dot(y) / y.dot(y);
        } else {
            q *= 0.1 * w.norm().max(1.0) / gnorm;
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * y.dot(&q);
            q.axpy(a - b, s, 1.0);
        }
        let mut dir = q;
        let mut slope = cur.grad.dot(&dir);
        if !(slope > 0.0) {
            hist.clear();
            dir = cur.grad.clone() * (0.1 * w.norm().max(1.0) / gnorm);
            slope = cur.grad.dot(&dir);
        }
        // Backtracking Armijo line search.
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = &w + &dir * step;
            let ev = evaluate(p, &trial, mu);
            if ev.smooth.is_finite() && ev.smooth >= cur.smooth + 1e-4 * step * slope {
                accepted = Some((trial, ev));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, ev)) = accepted else {
            return (StageEnd::Converged, w, gnorm);
        };
        let s = &trial - &w;
        let y = &cur.grad - &ev.grad; // gradient of −f_μ increases along s
        let sy = s.dot(&y);
        let gain = ev.smooth - cur.smooth;
        w = trial;
        cur = ev;
        if tracker.offer(&w, cur.margin) {
            return (StageEnd::Target, w, cur.grad.norm());
        }
        if sy > 1e-16 * s.norm() * y.norm() {
            hist.push_back((s, y, 1.0 / sy));
            if hist.len() > opts.lbfgs_memory {
                hist.pop_front();
            }
        }
        if gain <= 1e-15 * (1.0 + cur.smooth.abs()) {
            stall += 1;
            if stall >= 5 {
                return (StageEnd::Converged, w, cur.grad.norm());
            }
        } else {
            stall = 0;
        }
    }
    let g = cur.grad.norm();
    (StageEnd::Cap, w, g)
}

impl SoftMinSolver {
    fn run(
        &self,
        p: &LmiProblem,
        start: Option<&DVector<f64>>,
        scale: f64,
    ) -> Result<FeasibilityResult> {
        let n = p.var_dim;
        let eps = self.options.feas_tol * scale;
        let w0 = match start {
            Some(s) if s.len() == n => s.clone(),
            Some(s) => {
                return Err(Error::IllFormed(format!(
                    "start point has length {}, expected {n}",
                    s.len()
                )));
            }
            None => DVector::zeros(n),
        };
        if p.constraints.is_empty() {
            return Ok(FeasibilityResult {
                status: FeasibilityStatus::Feasible,
                point: Some(w0),
                margin: f64::INFINITY,
            });
        }
        let target = eps;
        let mut tracker = Tracker {
            best_w: w0.clone(),
            best_margin: p.margin(&w0),
            target,
        };
        if n == 0 || tracker.best_margin >= target {
            return Ok(self.verdict(&tracker, eps, false));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.options.seed);
        let mut origin = w0;
        for attempt in 0..=self.options.restarts {
            let mut w = origin.clone();
            let mut mu = self.options.mu_start * scale;
            let mu_end = self.options.mu_end * scale;
            let mut first_grad = None;
            let mut capped;
            loop {
                let (end, wn, g) = ascend(p, w, mu, &self.options, &mut tracker, scale);
                first_grad.get_or_insert(g);
                w = wn;
                match end {
                    StageEnd::Target => return Ok(self.verdict(&tracker, eps, false)),
                    StageEnd::Cap => capped = mu <= mu_end * 1.0001,
                    StageEnd::Converged => capped = false,
                }
                if mu <= mu_end * 1.0001 {
                    break;
                }
                mu = (mu * self.options.mu_factor).max(mu_end);
            }
            if tracker.best_margin >= -eps {
                return Ok(self.verdict(&tracker, eps, false));
            }
            // Restart only when the ascent never left a flat nonsmooth point.
            let flat = first_grad.unwrap_or(0.0) <= 1e-12 * scale;
            if attempt == self.options.restarts || !flat {
                return Ok(self.verdict(&tracker, eps, capped));
            }
            let sigma = 1e-2 * tracker.best_w.norm().max(1.0);
            origin = tracker.best_w.map(|v| {
                let z: f64 = StandardNormal.sample(&mut rng);
                v + sigma * z
            });
        }
        Ok(self.verdict(&tracker, eps, false))
    }

    fn verdict(&self, t: &Tracker, eps: f64, capped: bool) -> FeasibilityResult {
        let status = if t.best_margin >= -eps {
            FeasibilityStatus::Feasible
        } else if capped {
            FeasibilityStatus::MaxIterations
        } else {
            FeasibilityStatus::InfeasibleHeuristic
        };
        FeasibilityResult {
            status,
            point: Some(t.best_w.clone()),
            margin: t.best_margin,
        }
    }

    /// Feasibility of `p` plus the level constraint `level − cᵀw ≥ 0`.
    fn level_problem(p: &LmiProblem, c: &DVector<f64>, level: f64) -> Result<LmiProblem> {
        let coeffs = c
            .iter()
            .map(|&ck| DMatrix::from_element(1, 1, -ck))
            .collect();
        let mut q = p.clone();
        q.objective = None;
        q.add_constraint(AffineMatrixMap::new(
            DMatrix::from_element(1, 1, level),
            coeffs,
        )?)?;
        Ok(q)
    }
}

impl LmiOracle for SoftMinSolver {
    fn solve_feasibility_from(
        &self,
        p: &LmiProblem,
        start: Option<&DVector<f64>>,
    ) -> Result<FeasibilityResult> {
        self.run(p, start, p.scale())
    }

    fn solve_linear_objective(&self, p: &LmiProblem) -> Result<(f64, DVector<f64>)> {
        let c = p
            .objective
            .clone()
            .ok_or_else(|| Error::IllFormed("problem has no objective".into()))?;
        let scale = p.scale();
        let mut base = p.clone();
        base.objective = None;
        let phase1 = self.run(&base, None, scale)?;
        if !phase1.is_feasible() {
            return Err(Error::Infeasible(format!(
                "phase 1 margin {:e}",
                phase1.margin
            )));
        }
        let mut best_w = phase1.point.expect("feasible result carries a point");
        let mut hi = c.dot(&best_w);
        // Establish a lower bracket by doubling steps below the incumbent.
        let mut delta = hi.abs().max(1.0);
        let mut lo = None;
        for _ in 0..60 {
            let level = hi - delta;
            let q = Self::level_problem(&base, &c, level)?;
            let r = self.run(&q, Some(&best_w), scale)?;
            if r.is_feasible() {
                best_w = r.point.expect("feasible result carries a point");
                hi = level.min(c.dot(&best_w));
                delta *= 2.0;
            } else {
                lo = Some(level);
                break;
            }
        }
        let mut lo =
            lo.ok_or_else(|| Error::Unbounded(format!("objective still feasible at {hi:e}")))?;
        let width = self.options.objective_tol * scale;
        while hi - lo > width {
            let mid = 0.5 * (lo + hi);
            let q = Self::level_problem(&base, &c, mid)?;
            let r = self.run(&q, Some(&best_w), scale)?;
            if r.is_feasible() {
                best_w = r.point.expect("feasible result carries a point");
                hi = mid.min(c.dot(&best_w)).max(lo);
            } else {
                lo = mid;
            }
        }
        Ok((c.dot(&best_w), best_w))
    }
}

/// Deepest point: maximizes `τ` subject to `Fᵢ(w) ⪰ τI` and `τ ≤ cap`.
/// Returns `(τ*, w)`.
pub fn max_margin(oracle: &dyn LmiOracle, p: &LmiProblem, cap: f64) -> Result<(f64, DVector<f64>)> {
    let k = p.var_dim();
    let mut q = LmiProblem::new(k + 1);
    for c in p.constraints() {
        let d = c.dim();
        let mut coeffs: Vec<DMatrix<f64>> = c
            .coefficients()
            .iter()
            .map(|m| m.as_matrix().clone())
            .collect();
        coeffs.push(-DMatrix::identity(d, d));
        q.add_constraint(AffineMatrixMap::new(
            c.constant().as_matrix().clone(),
            coeffs,
        )?)?;
    }
    let mut coeffs = vec![DMatrix::zeros(1, 1); k];
    coeffs.push(DMatrix::from_element(1, 1, -1.0));
    q.add_constraint(AffineMatrixMap::new(
        DMatrix::from_element(1, 1, cap),
        coeffs,
    )?)?;
    let mut obj = DVector::zeros(k + 1);
    obj[k] = -1.0;
    q.set_objective(obj)?;
    let (v, w) = oracle.solve_linear_objective(&q)?;
    Ok((-v, w.rows(0, k).into_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn scalar_problem(constant: f64, coeff: f64) -> LmiProblem {
        LmiProblem::new(1)
            .with_constraint(
                AffineMatrixMap::new(
                    DMatrix::identity(2, 2) * constant,
                    vec![DMatrix::identity(2, 2) * coeff],
                )
                .unwrap(),
            )
            .unwrap()
    }

    #[test]
    fn shifted_identity_is_feasible() {
        let p = scalar_problem(-1.0, 1.0);
        let r = SoftMinSolver::default().solve_feasibility(&p).unwrap();
        assert!(r.is_feasible());
        assert!(r.margin >= 0.0);
        let w = r.point.unwrap();
        assert!((p.margin(&w) - r.margin).abs() < 1e-12);
    }

    #[test]
    fn constant_negative_is_infeasible() {
        let p = LmiProblem::new(1)
            .with_constraint(
                AffineMatrixMap::new(-DMatrix::identity(2, 2), vec![DMatrix::zeros(2, 2)]).unwrap(),
            )
            .unwrap();
        let r = SoftMinSolver::default().solve_feasibility(&p).unwrap();
        assert_eq!(r.status, FeasibilityStatus::InfeasibleHeuristic);
        assert!(r.margin <= -1.0 + 1e-6);
    }

    #[test]
    fn minimize_scalar() {
        let p = scalar_problem(-1.0, 1.0)
            .with_objective(DVector::from_element(1, 1.0))
            .unwrap();
        let (v, w) = SoftMinSolver::default().solve_linear_objective(&p).unwrap();
        assert!((v - 1.0).abs() < 1e-4, "{v}");
        assert!(p.margin(&w) >= -p.feasibility_tolerance());
    }

    #[test]
    fn unbounded_objective_detected() {
        // w·I ⪰ −I holds for every w ≥ −1 but minimizing −w is unbounded.
        let p = scalar_problem(1.0, 1.0)
            .with_objective(DVector::from_element(1, 1.0))
            .unwrap();
        let (v, _) = SoftMinSolver::default().solve_linear_objective(&p).unwrap();
        assert!((v + 1.0).abs() < 1e-4);
        let p = scalar_problem(1.0, 0.0)
            .with_objective(DVector::from_element(1, 1.0))
            .unwrap();
        assert!(matches!(
            SoftMinSolver::default().solve_linear_objective(&p),
            Err(Error::Unbounded(_))
        ));
    }

    #[test]
    fn ill_formed_inputs_rejected() {
        assert!(matches!(
            AffineMatrixMap::new(dmatrix![1.0, 2.0; 0.0, 1.0], vec![]),
            Err(Error::IllFormed(_))
        ));
        assert!(matches!(
            AffineMatrixMap::new(DMatrix::identity(2, 2), vec![DMatrix::identity(3, 3)]),
            Err(Error::IllFormed(_))
        ));
        let mut p = LmiProblem::new(2);
        assert!(p
            .add_constraint(AffineMatrixMap::new(DMatrix::identity(1, 1), vec![]).unwrap())
            .is_err());
    }

    #[test]
    fn two_by_two_coupling() {
        // [[1, w], [w, 1]] ⪰ 0 and [[w − 0.5]] ⪰ 0: feasible for w ∈ [0.5, 1].
        let p = LmiProblem::new(1)
            .with_constraint(
                AffineMatrixMap::new(DMatrix::identity(2, 2), vec![dmatrix![0.0, 1.0; 1.0, 0.0]])
                    .unwrap(),
            )
            .unwrap()
            .with_constraint(AffineMatrixMap::new(dmatrix![-0.5], vec![dmatrix![1.0]]).unwrap())
            .unwrap();
        let r = SoftMinSolver::default().solve_feasibility(&p).unwrap();
        assert!(r.is_feasible());
        let w = r.point.unwrap()[0];
        assert!((0.5 - 1e-6..=1.0 + 1e-6).contains(&w));
        let p = p.with_objective(DVector::from_element(1, -1.0)).unwrap();
        let (v, _) = SoftMinSolver::default().solve_linear_objective(&p).unwrap();
        assert!((v + 1.0).abs() < 1e-4, "{v}");
    }
}
