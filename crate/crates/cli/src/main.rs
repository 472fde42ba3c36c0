//! `ddinterp`: consistency checks, bound inference and one-step-ahead
//! prediction from trajectory files.
//!
//! Exit codes: 0 affirmative, 3 negative verdict, 4 degenerate set, 1 error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ddinterp::inference::{self, DataBatch, PriorBounds};
use ddinterp::interp::{CompletionCertificate, Ellipsoid, Tolerances as InterpTolerances};
use ddinterp::lmi::{SoftMinSolver, SolverOptions, FEAS_TOL};
use ddinterp::matcore::{SymMatrix, DEFAULT_PSD_TOL, DEFAULT_RANK_TOL};
use ddinterp::predict::{self, NextStateSet, PredictionInstance, SetKind};
use ddinterp::sysio::{self, apply_transform, Dataset};
use ddinterp::Error;
use nalgebra::{DMatrix, DVector};

mod report;
mod svg;

use report::{rows, vec};

const BOUNDARY_POINTS: usize = 256;
const DEFAULT_GRID: &str = "0.5,1,1.5,2,2.5,2.9,4,6.18,10";

#[derive(Debug, Parser)]
#[command(
    name = "ddinterp",
    version,
    about = "Data-driven analysis of noisy linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check whether the data are explained by some ‖A‖ ≤ L and noise level alpha.
    Verify(Common),
    /// Minimal noise level (mode alpha), minimal gain bound (mode L) or the trade-off curve.
    Infer(InferArgs),
    /// Reachable next states for the current state and input.
    Predict(Common),
    /// Check each candidate input against a target ellipsoid.
    Safety(SafetyArgs),
    /// Worst-case one-step quadratic cost for each candidate input.
    Cost(CostArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Trajectory file (JSON, or CSV with one state per row).
    #[arg(long)]
    data: PathBuf,
    /// Energy amplification bound [default: 1].
    #[arg(long = "L")]
    l: Option<f64>,
    /// Noise level [default: 0].
    #[arg(long)]
    alpha: Option<f64>,
    /// Current state as comma-separated values [default: last state].
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Input as comma-separated values; repeat for candidate lists [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    u: Vec<String>,
    /// Number of sampled completions for noisy prediction.
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long, env = "DDINTERP_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    rank_tol: f64,
    #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
    psd_tol: f64,
    /// Relative LMI feasibility slack.
    #[arg(long, default_value_t = FEAS_TOL)]
    feas_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Svg,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Alpha,
    #[value(name = "L")]
    L,
    Curve,
}

#[derive(Debug, Args)]
struct InferArgs {
    #[command(flatten)]
    common: Common,
    /// Defaults to `L` when only --alpha is given, `alpha` otherwise.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Comma-separated ascending L values for curve mode.
    #[arg(long, default_value = DEFAULT_GRID)]
    grid: String,
}

#[derive(Debug, Args)]
struct SafetyArgs {
    #[command(flatten)]
    common: Common,
    /// Target center [default: origin].
    #[arg(long, allow_hyphen_values = true)]
    target_center: Option<String>,
    /// Target ball radius; alternative to --target-shape/--target-level.
    #[arg(long)]
    target_radius: Option<f64>,
    /// Target shape matrix, row-major [default: identity].
    #[arg(long, allow_hyphen_values = true)]
    target_shape: Option<String>,
    #[arg(long)]
    target_level: Option<f64>,
}

#[derive(Debug, Args)]
struct CostArgs {
    #[command(flatten)]
    common: Common,
    /// State weight, row-major [default: identity].
    #[arg(long = "Qc", allow_hyphen_values = true)]
    qc: Option<String>,
    /// Input weight, row-major [default: identity].
    #[arg(long = "Rc", allow_hyphen_values = true)]
    rc: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Affirmative,
    Negative,
    Degenerate,
}

impl From<Outcome> for ExitCode {
    fn from(o: Outcome) -> Self {
        ExitCode::from(match o {
            Outcome::Affirmative => 0,
            Outcome::Negative => 3,
            Outcome::Degenerate => 4,
        })
    }
}

type CliResult<T> = Result<T, String>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Verify(c) => cmd_verify(c),
        Command::Infer(a) => cmd_infer(a),
        Command::Predict(c) => cmd_predict(c),
        Command::Safety(a) => cmd_safety(a),
        Command::Cost(a) => cmd_cost(a),
    };
    match res {
        Ok(o) => o.into(),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

impl Common {
    fn l(&self) -> f64 {
        self.l.unwrap_or(1.0)
    }

    fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(0.0)
    }

    fn bounds(&self) -> CliResult<PriorBounds> {
        PriorBounds::new(self.l(), self.alpha()).map_err(|e| e.to_string())
    }

    fn load(&self) -> CliResult<Dataset> {
        sysio::load(&self.data).map_err(|e| format!("{}: {e}", self.data.display()))
    }

    fn oracle(&self) -> SoftMinSolver {
        SoftMinSolver::new(SolverOptions {
            feas_tol: self.feas_tol,
            ..SolverOptions::default()
        })
    }

    fn interp_tolerances(&self) -> InterpTolerances {
        InterpTolerances {
            rank_tol: self.rank_tol,
            psd_tol: self.psd_tol,
        }
    }

    fn tolerances(&self) -> report::Tolerances {
        report::Tolerances {
            rank_tol: self.rank_tol,
            psd_tol: self.psd_tol,
            feas_tol: self.feas_tol,
            objective_tol: SolverOptions::default().objective_tol,
        }
    }

    fn emit(&self, text: &str) -> CliResult<()> {
        match &self.out {
            Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_json<T: serde::Serialize>(&self, value: &T) -> CliResult<()> {
        let mut text = sysio::to_json(value).map_err(|e| e.to_string())?;
        text.push('\n');
        self.emit(&text)
    }

    fn state(&self, data: &Dataset) -> CliResult<DVector<f64>> {
        match &self.x {
            Some(s) => parse_vector("--x", s, data.batch.n()),
            None => data
                .last_state
                .clone()
                .ok_or_else(|| "the data file has no states; pass --x".to_string()),
        }
    }

    fn inputs(&self, data: &Dataset) -> CliResult<Vec<DVector<f64>>> {
        if self.u.is_empty() {
            return Ok(vec![DVector::zeros(data.batch.m())]);
        }
        self.u
            .iter()
            .map(|s| parse_vector("--u", s, data.batch.m()))
            .collect()
    }
}

fn parse_values(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| format!("{flag}: '{v}': {e}"))
        })
        .collect()
}

fn parse_vector(flag: &str, s: &str, n: usize) -> CliResult<DVector<f64>> {
    let v = parse_values(flag, s)?;
    if v.len() != n {
        return Err(format!("{flag} has {} entries, expected {n}", v.len()));
    }
    Ok(DVector::from_vec(v))
}

fn parse_square(flag: &str, s: Option<&str>, n: usize) -> CliResult<SymMatrix> {
    let Some(s) = s else {
        return Ok(SymMatrix::identity(n));
    };
    let v = parse_values(flag, s)?;
    if v.len() != n * n {
        return Err(format!(
            "{flag} has {} entries, expected {} ({n}x{n} row-major)",
            v.len(),
            n * n
        ));
    }
    SymMatrix::new_strict(DMatrix::from_row_slice(n, n, &v), 1e-12)
        .map_err(|e| format!("{flag}: {e}"))
}

fn certificate(c: &CompletionCertificate) -> report::Certificate {
    report::Certificate {
        gamma: c.offdiag.first().map(rows).unwrap_or_default(),
        g_hat: rows(c.assembled().as_matrix()),
    }
}

fn cmd_verify(c: &Common) -> CliResult<Outcome> {
    let data = c.load()?;
    let mut bounds = c.bounds()?;
    if let Some(p) = &data.p {
        bounds = bounds
            .with_metric(p.clone())
            .map_err(|e| format!("P: {e}"))?;
    }
    let rep = inference::verify(&data.batch, &bounds, &c.oracle()).map_err(|e| e.to_string())?;
    c.emit_json(&report::VerifyReport {
        command: "verify",
        l: bounds.l,
        alpha: bounds.alpha,
        consistent: rep.consistent,
        conservative: rep.conservative,
        status: format!("{:?}", rep.status),
        margin: rep.margin,
        certificate: rep.certificate.as_ref().map(certificate),
        tolerances: c.tolerances(),
    })?;
    Ok(if rep.consistent {
        Outcome::Affirmative
    } else {
        Outcome::Negative
    })
}

/// Data in the coordinates where an energy metric becomes a plain norm
/// bound, with the noise-level factor to undo.
fn inference_data(data: &Dataset) -> CliResult<(DataBatch, f64)> {
    match &data.p {
        None => Ok((data.batch.clone(), 1.0)),
        Some(p) => {
            let unit = PriorBounds::new(1.0, 1.0).map_err(|e| e.to_string())?;
            let tr = apply_transform(&data.batch, &unit, p).map_err(|e| format!("P: {e}"))?;
            Ok((tr.batch, tr.transform.relaxed_alpha_factor))
        }
    }
}

fn cmd_infer(a: &InferArgs) -> CliResult<Outcome> {
    let c = &a.common;
    let data = c.load()?;
    let (batch, factor) = inference_data(&data)?;
    let conservative = data.p.is_some();
    let oracle = c.oracle();
    let mode = a.mode.unwrap_or(if c.alpha.is_some() && c.l.is_none() {
        Mode::L
    } else {
        Mode::Alpha
    });
    match mode {
        Mode::Alpha => {
            let l = c.l();
            let r = inference::min_noise(&batch, l, &oracle).map_err(|e| e.to_string())?;
            c.emit_json(&report::InferReport {
                command: "infer",
                mode: "alpha",
                given: l,
                feasible: true,
                optimum: Some(r.value / factor),
                cross_check: r.cross_check.map(|v| v / factor),
                cross_check_residual: r.cross_check_residual.map(|v| v / factor),
                conservative,
                certificate: Some(certificate(&r.certificate)),
                message: None,
                bracket: None,
                tolerances: c.tolerances(),
            })?;
            Ok(Outcome::Affirmative)
        }
        Mode::L => {
            let alpha = c.alpha();
            let mut rep = report::InferReport {
                command: "infer",
                mode: "L",
                given: alpha,
                feasible: false,
                optimum: None,
                cross_check: None,
                cross_check_residual: None,
                conservative,
                certificate: None,
                message: None,
                bracket: inference::gain_bracket(&batch, alpha * factor).ok(),
                tolerances: c.tolerances(),
            };
            let outcome = match inference::min_gain(&batch, alpha * factor, &oracle) {
                Ok(r) => {
                    rep.feasible = true;
                    rep.optimum = Some(r.value);
                    rep.cross_check = r.cross_check;
                    rep.cross_check_residual = r.cross_check_residual;
                    rep.certificate = Some(certificate(&r.certificate));
                    Outcome::Affirmative
                }
                Err(Error::Infeasible(msg)) => {
                    rep.message = Some(msg);
                    Outcome::Negative
                }
                Err(e) => return Err(e.to_string()),
            };
            c.emit_json(&rep)?;
            Ok(outcome)
        }
        Mode::Curve => {
            let grid = parse_values("--grid", &a.grid)?;
            let pts =
                inference::tradeoff_curve(&batch, &grid, &oracle).map_err(|e| e.to_string())?;
            let points: Vec<report::CurveRow> = pts
                .into_iter()
                .map(|p| report::CurveRow {
                    l: p.l,
                    alpha_star: p.alpha_star.map(|v| v / factor),
                    error: p.error,
                })
                .collect();
            match c.format {
                Format::Csv => {
                    let mut s = String::from("L,alpha_star\n");
                    for p in &points {
                        let v = p.alpha_star.map(sysio::fmt_f64).unwrap_or_default();
                        s.push_str(&format!("{},{v}\n", sysio::fmt_f64(p.l)));
                    }
                    c.emit(&s)?;
                }
                _ => c.emit_json(&report::CurveReport {
                    command: "infer",
                    mode: "curve",
                    points,
                    tolerances: c.tolerances(),
                })?,
            }
            Ok(Outcome::Affirmative)
        }
    }
}

fn reachable(
    c: &Common,
    inst: &PredictionInstance,
) -> Result<(NextStateSet, predict::UnionResult), Error> {
    if inst.bounds.alpha == 0.0 {
        let set = predict::reachable_noisefree_with(inst, c.interp_tolerances())?;
        let r = predict::UnionResult {
            set: set.clone(),
            skipped: Vec::new(),
            samples: 1,
            anchored: false,
        };
        Ok((set, r))
    } else {
        let r = predict::reachable_union_with(
            inst,
            c.samples,
            c.seed,
            &c.oracle(),
            c.interp_tolerances(),
        )?;
        Ok((r.set.clone(), r))
    }
}

fn outcome_of(set: &NextStateSet) -> Outcome {
    match set.kind {
        SetKind::Empty => Outcome::Negative,
        SetKind::Degenerate => Outcome::Degenerate,
        _ => Outcome::Affirmative,
    }
}

fn instance(c: &Common, data: &Dataset, u: DVector<f64>) -> CliResult<PredictionInstance> {
    let x = c.state(data)?;
    PredictionInstance::new(data.batch.clone(), x, u, c.bounds()?).map_err(|e| e.to_string())
}

fn cmd_predict(c: &Common) -> CliResult<Outcome> {
    let data = c.load()?;
    if data.p.is_some() {
        return Err("prediction with an energy metric P is not supported".into());
    }
    let mut inputs = c.inputs(&data)?;
    if inputs.len() > 1 {
        return Err("predict takes a single --u".into());
    }
    let inst = instance(c, &data, inputs.remove(0))?;
    let ls = inst.least_squares_prediction();
    let (set, message, union) = match reachable(c, &inst) {
        Ok((set, r)) => (Some(set), None, Some(r)),
        Err(Error::EmptyUnion) => (None, Some(Error::EmptyUnion.to_string()), None),
        Err(e) => return Err(e.to_string()),
    };
    let outcome = set.as_ref().map_or(Outcome::Negative, outcome_of);
    let rep = report::PredictReport {
        command: "predict",
        l: inst.bounds.l,
        alpha: inst.bounds.alpha,
        x: vec(&inst.x),
        u: vec(&inst.u),
        set: set
            .as_ref()
            .map_or_else(|| report::SetOut::empty(&inst.offset()), Into::into),
        least_squares: vec(&ls),
        samples: union.as_ref().map_or(0, |r| r.samples),
        anchored: union.as_ref().is_some_and(|r| r.anchored),
        skipped: union.map(|r| r.skipped).unwrap_or_default(),
        message,
        tolerances: c.tolerances(),
    };
    match c.format {
        Format::Svg if inst.data.n() == 2 => {
            let members = set
                .as_ref()
                .map(|s| s.members_absolute())
                .unwrap_or_default();
            let plot = svg::Plot {
                title: format!(
                    "reachable set, L = {}, alpha = {}",
                    inst.bounds.l, inst.bounds.alpha
                ),
                members: members
                    .iter()
                    .map(|e| e.boundary_2d(BOUNDARY_POINTS))
                    .collect::<Result<_, _>>()
                    .map_err(|e| e.to_string())?,
                reference: Some(
                    data_free_ball(&inst)
                        .boundary_2d(BOUNDARY_POINTS)
                        .map_err(|e| e.to_string())?,
                ),
                marker: Some([ls[0], ls[1]]),
            };
            c.emit(&plot.render())?;
        }
        Format::Svg => {
            eprintln!(
                "note: plots need a two-dimensional state (n = {}); emitting JSON",
                inst.data.n()
            );
            c.emit_json(&rep)?;
        }
        Format::Json | Format::Csv => c.emit_json(&rep)?,
    }
    Ok(outcome)
}

/// Next states without data: the ball of radius `L‖x‖ + α` around `Bu`.
fn data_free_ball(inst: &PredictionInstance) -> Ellipsoid {
    let r = inst.bounds.l * inst.x.norm() + inst.bounds.alpha;
    Ellipsoid::ball(inst.offset(), r.max(1e-12)).expect("positive radius")
}

fn cmd_safety(a: &SafetyArgs) -> CliResult<Outcome> {
    let c = &a.common;
    let data = c.load()?;
    let n = data.batch.n();
    let center = match &a.target_center {
        Some(s) => parse_vector("--target-center", s, n)?,
        None => DVector::zeros(n),
    };
    let shape = parse_square("--target-shape", a.target_shape.as_deref(), n)?;
    let level = match (a.target_radius, a.target_level) {
        (Some(r), None) => r * r,
        (None, Some(l)) => l,
        _ => return Err("give exactly one of --target-radius and --target-level".into()),
    };
    let target = Ellipsoid::new(shape, center, level).map_err(|e| format!("target: {e}"))?;
    let mut candidates = Vec::new();
    for u in c.inputs(&data)? {
        let inst = instance(c, &data, u.clone())?;
        let (verdict, message) = match reachable(c, &inst) {
            Ok((set, _)) => match predict::safety_check(&set, &target) {
                Ok(_) if matches!(set.kind, SetKind::Empty) => ("empty", None),
                Ok(true) => ("safe", None),
                Ok(false) => ("unsafe", None),
                Err(Error::UnsupportedSet) => ("degenerate", None),
                Err(e) => ("error", Some(e.to_string())),
            },
            Err(Error::EmptyUnion) => ("empty", Some(Error::EmptyUnion.to_string())),
            Err(e) => ("error", Some(e.to_string())),
        };
        candidates.push(report::SafetyRow {
            u: vec(&u),
            verdict,
            message,
        });
    }
    let any_safe = candidates
        .iter()
        .any(|r| r.verdict == "safe" || r.verdict == "empty");
    let all_degenerate = candidates.iter().all(|r| r.verdict == "degenerate");
    c.emit_json(&report::SafetyReport {
        command: "safety",
        target: (&target).into(),
        candidates,
        tolerances: c.tolerances(),
    })?;
    Ok(if any_safe {
        Outcome::Affirmative
    } else if all_degenerate {
        Outcome::Degenerate
    } else {
        Outcome::Negative
    })
}

fn cmd_cost(a: &CostArgs) -> CliResult<Outcome> {
    let c = &a.common;
    let data = c.load()?;
    let qc = parse_square("--Qc", a.qc.as_deref(), data.batch.n())?;
    let rc = parse_square("--Rc", a.rc.as_deref(), data.batch.m())?;
    let oracle = c.oracle();
    let mut table = Vec::new();
    let mut degenerate = 0;
    for u in c.inputs(&data)? {
        let inst = instance(c, &data, u.clone())?;
        let row = match predict::worst_case_cost(&inst, &qc, &rc, c.samples, c.seed, &oracle) {
            Ok(r) => report::CostRow {
                u: vec(&u),
                value: Some(r.value),
                argmax: Some(vec(&r.argmax)),
                lower_bound: r.lower_bound,
                best: false,
                error: None,
            },
            Err(e) => {
                if matches!(e, Error::UnsupportedSet) {
                    degenerate += 1;
                }
                report::CostRow {
                    u: vec(&u),
                    value: None,
                    argmax: None,
                    lower_bound: false,
                    best: false,
                    error: Some(e.to_string()),
                }
            }
        };
        table.push(row);
    }
    table.sort_by(|x, y| match (x.value, y.value) {
        (Some(a), Some(b)) => a.total_cmp(&b),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let any = table.first().is_some_and(|r| r.value.is_some());
    if any {
        table[0].best = true;
    }
    let total = table.len();
    c.emit_json(&report::CostReport {
        command: "cost",
        table,
        tolerances: c.tolerances(),
    })?;
    Ok(if any {
        Outcome::Affirmative
    } else if degenerate == total {
        Outcome::Degenerate
    } else {
        Outcome::Negative
    })
}
