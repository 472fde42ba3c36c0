//! Serializable report shapes. Matrices are written row-major.

use ddinterp::interp::Ellipsoid;
use ddinterp::predict::{NextStateSet, SetKind, SkippedSample};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

#[derive(Debug, Serialize)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub psd_tol: f64,
    pub feas_tol: f64,
    pub objective_tol: f64,
}

#[derive(Debug, Serialize)]
pub struct Certificate {
    /// Off-diagonal block of the completion.
    pub gamma: Vec<Vec<f64>>,
    pub g_hat: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    #[serde(rename = "L")]
    pub l: f64,
    pub alpha: f64,
    pub consistent: bool,
    pub conservative: bool,
    pub status: String,
    pub margin: f64,
    pub certificate: Option<Certificate>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Serialize)]
pub struct InferReport {
    pub command: &'static str,
    pub mode: &'static str,
    /// The fixed bound (`L` in alpha mode, `alpha` in L mode).
    pub given: f64,
    pub feasible: bool,
    pub optimum: Option<f64>,
    pub cross_check: Option<f64>,
    pub cross_check_residual: Option<f64>,
    pub conservative: bool,
    pub certificate: Option<Certificate>,
    pub message: Option<String>,
    /// Search interval used for the gain bound.
    pub bracket: Option<[f64; 2]>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Serialize)]
pub struct CurveReport {
    pub command: &'static str,
    pub mode: &'static str,
    pub points: Vec<CurveRow>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Serialize)]
pub struct CurveRow {
    #[serde(rename = "L")]
    pub l: f64,
    pub alpha_star: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct EllipsoidOut {
    pub shape: Vec<Vec<f64>>,
    pub center: Vec<f64>,
    pub level: f64,
}

impl From<&Ellipsoid> for EllipsoidOut {
    fn from(e: &Ellipsoid) -> Self {
        Self {
            shape: rows(e.shape.as_matrix()),
            center: vec(&e.center),
            level: e.level,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SetOut {
    pub tag: &'static str,
    /// `Bu`; members are sets of `x₊ − Bu`.
    pub offset: Vec<f64>,
    pub members: Vec<EllipsoidOut>,
}

impl SetOut {
    pub fn empty(offset: &DVector<f64>) -> Self {
        Self {
            tag: "Empty",
            offset: vec(offset),
            members: Vec::new(),
        }
    }
}

impl From<&NextStateSet> for SetOut {
    fn from(s: &NextStateSet) -> Self {
        let (tag, members) = match &s.kind {
            SetKind::Empty => ("Empty", Vec::new()),
            SetKind::Degenerate => ("Degenerate", Vec::new()),
            SetKind::ExactEllipsoid(e) => ("ExactEllipsoid", vec![e.into()]),
            SetKind::InnerUnion(es) => ("InnerUnion", es.iter().map(Into::into).collect()),
        };
        Self {
            tag,
            offset: vec(&s.offset),
            members,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PredictReport {
    pub command: &'static str,
    #[serde(rename = "L")]
    pub l: f64,
    pub alpha: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub set: SetOut,
    pub least_squares: Vec<f64>,
    pub samples: usize,
    pub anchored: bool,
    pub skipped: Vec<SkippedSample>,
    pub message: Option<String>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Serialize)]
pub struct SafetyRow {
    pub u: Vec<f64>,
    /// `safe`, `unsafe`, `degenerate`, `empty` or `error`.
    pub verdict: &'static str,
    pub message: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SafetyReport {
    pub command: &'static str,
    pub target: EllipsoidOut,
    pub candidates: Vec<SafetyRow>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Serialize)]
pub struct CostRow {
    pub u: Vec<f64>,
    pub value: Option<f64>,
    pub argmax: Option<Vec<f64>>,
    /// Set when the value comes from an inner approximation.
    pub lower_bound: bool,
    pub best: bool,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct CostReport {
    pub command: &'static str,
    /// Sorted by ascending value; failed candidates last.
    pub table: Vec<CostRow>,
    pub tolerances: Tolerances,
}
