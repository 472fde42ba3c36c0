//! One-step-ahead prediction from noisy data.
//!
//! The next states `x₊` compatible with the data, the prior bounds and an
//! input `u` are exactly those for which the augmented data
//! `X̄ = [x, X]`, `Ȳ = [x₊ − Bu, X₊ − BU]` pass the consistency test with
//! `t + 1` noise columns ([`membership`]). Without noise the set is one
//! ellipsoid ([`reachable_noisefree`]); with noise it contains the union of
//! ellipsoids obtained from PSD completions of
//! `blockdiag(L²Iₙ, α²(t+1)I_{t+1})` ([`reachable_union`]).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::inference::{
    consistency_problem, verify_targets, Bound, ConsistencyReport, DataBatch, PriorBounds,
};
use crate::interp::{feasible_output_set_with, Ellipsoid, FeasibleSet, InterpInstance, Tolerances};
use crate::lmi::{max_margin, LmiOracle};
use crate::matcore::{
    pinv, psd_check, spectral_norm, SymMatrix, DEFAULT_PSD_TOL, DEFAULT_RANK_TOL,
};

/// Data, current state `x`, candidate input `u` and bounds.
#[derive(Debug, Clone)]
pub struct PredictionInstance {
    pub data: DataBatch,
    pub x: DVector<f64>,
    pub u: DVector<f64>,
    pub bounds: PriorBounds,
}

impl PredictionInstance {
    pub fn new(
        data: DataBatch,
        x: DVector<f64>,
        u: DVector<f64>,
        bounds: PriorBounds,
    ) -> Result<Self> {
        if x.len() != data.n() {
            return Err(shape_err(format!(
                "x has {} entries, expected {}",
                x.len(),
                data.n()
            )));
        }
        if u.len() != data.m() {
            return Err(shape_err(format!(
                "u has {} entries, expected {}",
                u.len(),
                data.m()
            )));
        }
        if bounds.p.is_some() {
            return Err(Error::InvalidArgument(
                "an energy metric P is only supported by consistency checks".into(),
            ));
        }
        Ok(Self { data, x, u, bounds })
    }

    /// `Bu`.
    pub fn offset(&self) -> DVector<f64> {
        &self.data.b * &self.u
    }

    /// Noise-free least-squares prediction `(X₊ − BU) X† x + Bu`.
    pub fn least_squares_prediction(&self) -> DVector<f64> {
        self.data.targets() * (pinv(&self.data.x, DEFAULT_RANK_TOL) * &self.x) + self.offset()
    }

    fn augmented(&self, x_plus: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let (n, t) = (self.data.n(), self.data.t());
        let mut xb = DMatrix::zeros(n, t + 1);
        xb.set_column(0, &self.x);
        xb.view_mut((0, 1), (n, t)).copy_from(&self.data.x);
        let mut yb = DMatrix::zeros(n, t + 1);
        yb.set_column(0, &(x_plus - self.offset()));
        yb.view_mut((0, 1), (n, t)).copy_from(&self.data.targets());
        (xb, yb)
    }
}

/// Reachable-set description. Member ellipsoids are expressed in the
/// shifted coordinate `x₊ − Bu`; see [`NextStateSet::members_absolute`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", content = "members")]
pub enum SetKind {
    Empty,
    ExactEllipsoid(Ellipsoid),
    InnerUnion(Vec<Ellipsoid>),
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextStateSet {
    pub kind: SetKind,
    /// `Bu`.
    pub offset: DVector<f64>,
}

impl NextStateSet {
    /// Members translated by the offset, i.e. as sets of `x₊`.
    pub fn members_absolute(&self) -> Vec<Ellipsoid> {
        match &self.kind {
            SetKind::ExactEllipsoid(e) => vec![e.translated(&self.offset)],
            SetKind::InnerUnion(es) => es.iter().map(|e| e.translated(&self.offset)).collect(),
            SetKind::Empty | SetKind::Degenerate => Vec::new(),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.kind, SetKind::Degenerate)
    }
}

/// Exact test of whether `x₊` is a possible next state.
pub fn membership(
    inst: &PredictionInstance,
    x_plus: &DVector<f64>,
    oracle: &dyn LmiOracle,
) -> Result<bool> {
    Ok(membership_report(inst, x_plus, oracle)?.consistent)
}

/// [`membership`] with the underlying certificate and margin.
pub fn membership_report(
    inst: &PredictionInstance,
    x_plus: &DVector<f64>,
    oracle: &dyn LmiOracle,
) -> Result<ConsistencyReport> {
    if x_plus.len() != inst.data.n() {
        return Err(shape_err(format!(
            "x₊ has {} entries, expected {}",
            x_plus.len(),
            inst.data.n()
        )));
    }
    let (xb, yb) = inst.augmented(x_plus);
    verify_targets(&xb, &yb, inst.bounds.l, inst.bounds.alpha, oracle)
}

/// The exact reachable set when `α = 0`.
pub fn reachable_noisefree(inst: &PredictionInstance) -> Result<NextStateSet> {
    reachable_noisefree_with(inst, Tolerances::default())
}

pub fn reachable_noisefree_with(
    inst: &PredictionInstance,
    tol: Tolerances,
) -> Result<NextStateSet> {
    if inst.bounds.alpha != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "the noise-free set needs alpha = 0, got {}",
            inst.bounds.alpha
        )));
    }
    let n = inst.data.n();
    let l2 = inst.bounds.l * inst.bounds.l;
    let interp = InterpInstance::new(
        inst.data.x.clone(),
        inst.data.targets(),
        SymMatrix::scaled_identity(n, l2),
    )?;
    let kind = match feasible_output_set_with(&interp, &inst.x, tol)? {
        FeasibleSet::Empty => SetKind::Empty,
        FeasibleSet::Degenerate => SetKind::Degenerate,
        FeasibleSet::Ellipsoid(e) => SetKind::ExactEllipsoid(e),
    };
    Ok(NextStateSet {
        kind,
        offset: inst.offset(),
    })
}

/// A PSD completion `Ĝ = [[L²I, C], [Cᵀ, α²(t+1)I]]` with
/// `C = Lα√(t+1) W`, `‖W‖ ≤ 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompletionSample {
    pub w: DMatrix<f64>,
    pub g_hat: SymMatrix,
}

impl CompletionSample {
    pub fn from_w(bounds: &PriorBounds, w: DMatrix<f64>) -> Self {
        let (n, k) = w.shape();
        let l = bounds.l;
        let a2 = bounds.alpha * bounds.alpha * k as f64;
        let c = &w * (l * (a2.sqrt()));
        let mut g = DMatrix::zeros(n + k, n + k);
        g.view_mut((0, 0), (n, n)).fill_diagonal(l * l);
        g.view_mut((n, n), (k, k)).fill_diagonal(a2);
        g.view_mut((0, n), (n, k)).copy_from(&c);
        g.view_mut((n, 0), (k, n)).copy_from(&c.transpose());
        Self {
            w,
            g_hat: SymMatrix::symmetrized(g),
        }
    }
}

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn random_w(rng: &mut ChaCha8Rng, n: usize, k: usize, boundary: bool) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = spectral_norm(&g);
    if norm == 0.0 {
        return g;
    }
    let radius = if boundary { 1.0 } else { rng.random::<f64>() };
    g * (radius / norm)
}

/// Completions for `n` states and `t` data columns. Sample 0 is the
/// block-diagonal completion; odd samples lie on `‖W‖ = 1`, even ones have
/// `‖W‖` uniform in `(0, 1)`. Each sample depends only on `(seed, index)`.
pub fn sample_completions(
    bounds: &PriorBounds,
    n: usize,
    t: usize,
    n_samples: usize,
    seed: u64,
) -> Vec<CompletionSample> {
    let k = t + 1;
    (0..n_samples.max(1))
        .map(|i| {
            let w = if i == 0 || bounds.alpha == 0.0 {
                DMatrix::zeros(n, k)
            } else {
                random_w(&mut sample_rng(seed, i), n, k, i % 2 == 1)
            };
            CompletionSample::from_w(bounds, w)
        })
        .collect()
}

/// Why a completion contributed no member ellipsoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum SkipReason {
    NotPsd,
    RankDeficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedSample {
    pub index: usize,
    pub reason: SkipReason,
}

/// Output of [`reachable_union`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnionResult {
    pub set: NextStateSet,
    pub skipped: Vec<SkippedSample>,
    /// Number of completions tried.
    pub samples: usize,
    /// Set when members from completions anchored at a deepest feasible
    /// completion were added.
    pub anchored: bool,
}

/// `z = [x; 1; 0_t]` and `Z = [X; 0; I_t]`.
fn lifted(inst: &PredictionInstance) -> (DVector<f64>, DMatrix<f64>) {
    let (n, t) = (inst.data.n(), inst.data.t());
    let mut z = DVector::zeros(n + 1 + t);
    z.rows_mut(0, n).copy_from(&inst.x);
    z[n] = 1.0;
    let mut zm = DMatrix::zeros(n + 1 + t, t);
    zm.view_mut((0, 0), (n, t)).copy_from(&inst.data.x);
    zm.view_mut((n + 1, 0), (t, t)).fill_with_identity();
    (z, zm)
}

fn member(
    inst: &PredictionInstance,
    sample: &CompletionSample,
    tol: Tolerances,
) -> Result<std::result::Result<Ellipsoid, SkipReason>> {
    let (z, zm) = lifted(inst);
    let interp = InterpInstance::new(zm, inst.data.targets(), sample.g_hat.clone())?;
    Ok(match feasible_output_set_with(&interp, &z, tol)? {
        FeasibleSet::Ellipsoid(e) => Ok(e),
        FeasibleSet::Empty => Err(SkipReason::NotPsd),
        FeasibleSet::Degenerate => Err(SkipReason::RankDeficient),
    })
}

fn members_of(
    inst: &PredictionInstance,
    samples: &[CompletionSample],
    tol: Tolerances,
) -> Result<(Vec<Ellipsoid>, Vec<SkippedSample>)> {
    let eval = |s: &CompletionSample| member(inst, s, tol);
    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        samples.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = samples.iter().map(eval).collect();
    let mut members = Vec::new();
    let mut skipped = Vec::new();
    for (index, r) in results.into_iter().enumerate() {
        match r? {
            Ok(e) => members.push(e),
            Err(reason) => skipped.push(SkippedSample { index, reason }),
        }
    }
    Ok((members, skipped))
}

/// Inner approximation of the reachable set by a union of ellipsoids, one
/// per usable sampled completion.
///
/// When fewer than half of the samples are usable, further completions are
/// drawn on segments from a deepest feasible completion towards random `W`,
/// cut at the boundary of the feasible region; the result is then flagged
/// `anchored`.
pub fn reachable_union(
    inst: &PredictionInstance,
    n_samples: usize,
    seed: u64,
    oracle: &dyn LmiOracle,
) -> Result<UnionResult> {
    reachable_union_with(inst, n_samples, seed, oracle, Tolerances::default())
}

pub fn reachable_union_with(
    inst: &PredictionInstance,
    n_samples: usize,
    seed: u64,
    oracle: &dyn LmiOracle,
    tol: Tolerances,
) -> Result<UnionResult> {
    let (n, t) = (inst.data.n(), inst.data.t());
    let samples = sample_completions(
        &inst.bounds,
        n,
        t,
        if inst.bounds.alpha == 0.0 {
            1
        } else {
            n_samples
        },
        seed,
    );
    let (mut members, skipped) = members_of(inst, &samples, tol)?;
    let offset = inst.offset();
    let mut anchored = false;
    if inst.bounds.alpha > 0.0 && 2 * members.len() < samples.len() {
        let extra = anchored_completions(inst, n_samples, seed, oracle)?;
        let (more, _) = members_of(inst, &extra, tol)?;
        anchored = !more.is_empty();
        members.extend(more);
    }
    let result = |kind| UnionResult {
        set: NextStateSet {
            kind,
            offset: offset.clone(),
        },
        skipped: skipped.clone(),
        samples: samples.len(),
        anchored,
    };
    if !members.is_empty() {
        return Ok(result(SetKind::InnerUnion(members)));
    }
    let guess = inst.least_squares_prediction();
    let report = membership_report(inst, &guess, oracle)?;
    if !report.consistent {
        log::debug!(
            "all {} completions skipped; center guess margin {:e}",
            samples.len(),
            report.margin
        );
        return Err(Error::EmptyUnion);
    }
    Ok(result(SetKind::Degenerate))
}

/// `λ_min` of `D̂(W) = ZᵀĜZ − YᵀY`, which only involves the data columns of `C`.
fn d_hat_margin(inst: &PredictionInstance, w: &DMatrix<f64>) -> f64 {
    let b = &inst.bounds;
    let t = inst.data.t();
    let k = (t + 1) as f64;
    let c = w.columns(1, t) * (b.l * b.alpha * k.sqrt());
    let x = &inst.data.x;
    let y = inst.data.targets();
    let d = x.transpose() * x * (b.l * b.l)
        + x.transpose() * &c
        + c.transpose() * x
        + DMatrix::identity(t, t) * (b.alpha * b.alpha * k)
        - y.transpose() * &y;
    SymMatrix::symmetrized(d).lambda_min()
}

fn anchored_completions(
    inst: &PredictionInstance,
    n_samples: usize,
    seed: u64,
    oracle: &dyn LmiOracle,
) -> Result<Vec<CompletionSample>> {
    let b = &inst.bounds;
    let (n, t) = (inst.data.n(), inst.data.t());
    let k = t + 1;
    let s = b.alpha * b.alpha;
    let (problem, layout) = consistency_problem(
        &inst.data.x,
        &inst.data.targets(),
        Bound::Fixed(b.l * b.l),
        Bound::Fixed(s * k as f64 / t.max(1) as f64),
    )?;
    let (depth, wv) = max_margin(oracle, &problem, problem.scale())?;
    if depth <= 0.0 {
        return Ok(Vec::new());
    }
    // Γ̂ from the t-column problem with budget α²(t+1) is the data part of C.
    let gamma = layout.gamma_matrix(&wv);
    let radius = b.l * b.alpha * (k as f64).sqrt();
    let mut w0 = DMatrix::zeros(n, k);
    w0.view_mut((0, 1), (n, t)).copy_from(&(gamma / radius));
    let mut out = vec![CompletionSample::from_w(b, w0.clone())];
    for i in 1..n_samples {
        let mut rng = sample_rng(seed, i);
        let target = random_w(&mut rng, n, k, true);
        let feasible = |lam: f64| {
            let w = &w0 + (&target - &w0) * lam;
            spectral_norm(&w) <= 1.0 && d_hat_margin(inst, &w) > 0.0
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        if feasible(1.0) {
            lo = 1.0;
        } else {
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let frac = if i % 2 == 1 {
            0.999
        } else {
            rng.random::<f64>()
        };
        out.push(CompletionSample::from_w(
            b,
            &w0 + (&target - &w0) * (lo * frac),
        ));
    }
    Ok(out)
}

/// Containment of every member in `target`. Empty sets are contained.
pub fn safety_check(set: &NextStateSet, target: &Ellipsoid) -> Result<bool> {
    if set.is_degenerate() {
        return Err(Error::UnsupportedSet);
    }
    let h = &target.shape;
    let g = -(h.as_matrix() * &target.center);
    let c0 = target.quad_form(&DVector::zeros(target.dim()));
    let tol = 1e-9 * target.level.max(1.0);
    for e in set.members_absolute() {
        if e.dim() != target.dim() {
            return Err(shape_err(format!(
                "target has dimension {}, set has {}",
                target.dim(),
                e.dim()
            )));
        }
        let (v, _) = trs_max(&e, h, &g, c0)?;
        if v > target.level + tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Global maximum of `xᵀHx + 2gᵀx + c₀` over the ellipsoid `E`.
///
/// After whitening `x = c + T y` with `‖y‖ ≤ 1` the problem is a trust-region
/// subproblem, solved through its secular equation; the case where `g` has
/// no component along the top eigenspace is handled explicitly.
pub fn trs_max(
    e: &Ellipsoid,
    h: &SymMatrix,
    g: &DVector<f64>,
    c0: f64,
) -> Result<(f64, DVector<f64>)> {
    let n = e.dim();
    if h.dim() != n || g.len() != n {
        return Err(shape_err(format!(
            "objective has dimension {}/{}, ellipsoid {n}",
            h.dim(),
            g.len()
        )));
    }
    if !psd_check(&e.shape, 0.0)? || e.shape.lambda_min() <= 0.0 {
        return Err(Error::NotPsd {
            min_eig: e.shape.lambda_min(),
        });
    }
    let f = |x: &DVector<f64>| x.dot(&(h.as_matrix() * x)) + 2.0 * g.dot(x) + c0;
    let tm = e.whitening_inverse();
    let hw = SymMatrix::symmetrized(tm.transpose() * h.as_matrix() * &tm);
    let gw = tm.transpose() * (h.as_matrix() * &e.center + g);
    let y = ball_max(&hw, &gw);
    let x = &e.center + &tm * y;
    Ok((f(&x), x))
}

/// Maximizer of `yᵀHy + 2gᵀy` over the unit ball.
fn ball_max(h: &SymMatrix, g: &DVector<f64>) -> DVector<f64> {
    let n = h.dim();
    let sd = h.spectral();
    let lam = &sd.eigenvalues;
    let gam = sd.eigenvectors.transpose() * g;
    let l1 = lam[0];
    let norm_at = |eta: f64| -> f64 {
        gam.iter()
            .zip(lam.iter())
            .map(|(gi, li)| (gi / (eta - li)).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let solution = |eta: f64| {
        let coeffs = DVector::from_iterator(
            n,
            gam.iter().zip(lam.iter()).map(|(gi, li)| gi / (eta - li)),
        );
        &sd.eigenvectors * coeffs
    };
    let gnorm = g.norm();
    let scale = lam.amax().max(gnorm).max(1.0);
    if gnorm <= 1e-300 {
        if l1 <= 0.0 {
            return DVector::zeros(n);
        }
        return sd.eigenvectors.column(0).into_owned();
    }
    // Concave case with an interior stationary point.
    if l1 < 0.0 && norm_at(0.0) <= 1.0 {
        return solution(0.0);
    }
    let top_tol = 1e-12 * scale;
    let top: Vec<usize> = (0..n).filter(|&i| lam[i] >= l1 - top_tol).collect();
    let top_weight = top.iter().map(|&i| gam[i] * gam[i]).sum::<f64>().sqrt();
    let floor = l1.max(0.0);
    if top_weight <= 1e-10 * gnorm && l1 >= 0.0 {
        let rest = |i: usize| !top.contains(&i);
        let partial: f64 = (0..n)
            .filter(|&i| rest(i))
            .map(|i| (gam[i] / (l1 - lam[i])).powi(2))
            .sum();
        if partial <= 1.0 {
            let mut coeffs = DVector::zeros(n);
            for i in (0..n).filter(|&i| rest(i)) {
                coeffs[i] = gam[i] / (l1 - lam[i]);
            }
            coeffs[top[0]] = (1.0 - partial).max(0.0).sqrt();
            return &sd.eigenvectors * coeffs;
        }
    }
    // ‖y(η)‖ decreases on (floor, ∞) and is ≤ 1 at floor + ‖g‖.
    let mut lo = floor;
    let mut hi = floor + gnorm;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if norm_at(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y = solution(hi);
    let norm = y.norm();
    if norm > 0.0 && l1 >= 0.0 {
        y / norm
    } else {
        y
    }
}

/// Worst-case one-step cost over the reachable set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostReport {
    /// `max_{x₊} x₊ᵀQc x₊ + uᵀRc u`.
    pub value: f64,
    pub argmax: DVector<f64>,
    /// True when the set is a sampled union, so `value` is a lower bound on
    /// the worst case over the exact set.
    pub lower_bound: bool,
    pub members: usize,
}

/// Worst-case cost: the exact ellipsoid when `α = 0`, the sampled union
/// otherwise.
pub fn worst_case_cost(
    inst: &PredictionInstance,
    qc: &SymMatrix,
    rc: &SymMatrix,
    n_samples: usize,
    seed: u64,
    oracle: &dyn LmiOracle,
) -> Result<CostReport> {
    let n = inst.data.n();
    for (name, m, d) in [("Qc", qc, n), ("Rc", rc, inst.data.m())] {
        if m.dim() != d {
            return Err(shape_err(format!(
                "{name} is {0}x{0}, expected {d}x{d}",
                m.dim()
            )));
        }
        let lmin = m.lambda_min();
        if !(lmin > 0.0) {
            return Err(Error::NotPd { min_eig: lmin });
        }
    }
    let (set, lower_bound) = if inst.bounds.alpha == 0.0 {
        (reachable_noisefree(inst)?, false)
    } else {
        (reachable_union(inst, n_samples, seed, oracle)?.set, true)
    };
    match set.kind {
        SetKind::Degenerate => return Err(Error::UnsupportedSet),
        SetKind::Empty => return Err(Error::Infeasible("the reachable set is empty".into())),
        _ => {}
    }
    let input_cost = inst.u.dot(&(rc.as_matrix() * &inst.u));
    let zero = DVector::zeros(n);
    let members = set.members_absolute();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for e in &members {
        let (v, x) = trs_max(e, qc, &zero, 0.0)?;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, x));
        }
    }
    let (value, argmax) = best.ok_or(Error::EmptyUnion)?;
    Ok(CostReport {
        value: value + input_cost,
        argmax,
        lower_bound,
        members: members.len(),
    })
}

/// PSD re-check of a completion sample.
pub fn completion_is_psd(sample: &CompletionSample) -> Result<bool> {
    psd_check(&sample.g_hat, DEFAULT_PSD_TOL)
}
