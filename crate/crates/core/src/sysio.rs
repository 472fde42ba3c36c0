//! Trajectory simulation, data-matrix assembly, metric transforms and file
//! I/O.
//!
//! Trajectory files are JSON documents of the form
//! `{"states": [[…], …], "inputs": [[…], …], "B": [[…], …], "P": [[…], …]}`
//! with chronological, row-major entries; `P` is optional. States-only CSV
//! (one state per row) is accepted for autonomous data.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::inference::{DataBatch, PriorBounds};
use crate::matcore::{sqrt_psd, SymMatrix};

/// Chronological measurements `x₀ … x_t` and `u₀ … u_{t−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Vec<DVector<f64>>,
    inputs: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn new(states: Vec<DVector<f64>>, inputs: Vec<DVector<f64>>) -> Result<Self> {
        if states.len() != inputs.len() + 1 {
            return Err(shape_err(format!(
                "{} states need {} inputs, got {}",
                states.len(),
                states.len().saturating_sub(1),
                inputs.len()
            )));
        }
        let n = states[0].len();
        if let Some(k) = states.iter().position(|x| x.len() != n) {
            return Err(shape_err(format!(
                "states[{k}] has {} entries, expected {n}",
                states[k].len()
            )));
        }
        if let Some(m) = inputs.first().map(|u| u.len()) {
            if let Some(k) = inputs.iter().position(|u| u.len() != m) {
                return Err(shape_err(format!(
                    "inputs[{k}] has {} entries, expected {m}",
                    inputs[k].len()
                )));
            }
        }
        Ok(Self { states, inputs })
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn inputs(&self) -> &[DVector<f64>] {
        &self.inputs
    }

    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn last_state(&self) -> &DVector<f64> {
        self.states.last().expect("at least one state")
    }
}

/// Noise generator for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    /// Each `v_k` drawn uniformly in direction with `‖v_k‖ ≤ α`.
    PerStepBounded {
        alpha: f64,
    },
    /// Random split of the total energy `α²t` over the steps, or all of it in
    /// one randomly chosen step when `concentrate` is set.
    EnergyBudget {
        alpha: f64,
        concentrate: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            seed: 0,
        }
    }
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Runs `x_{k+1} = A x_k + B u_k + v_k` and returns the trajectory together
/// with the realized noise `V = [v_{t−1} … v₀]` in data-matrix column order.
pub fn simulate(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    x0: &DVector<f64>,
    inputs: &[DVector<f64>],
    noise: &NoiseSpec,
) -> Result<(Trajectory, DMatrix<f64>)> {
    let n = x0.len();
    if a.shape() != (n, n) {
        return Err(shape_err(format!(
            "A is {}x{}, expected {n}x{n}",
            a.nrows(),
            a.ncols()
        )));
    }
    if b.nrows() != n {
        return Err(shape_err(format!("B has {} rows, expected {n}", b.nrows())));
    }
    if let Some(k) = inputs.iter().position(|u| u.len() != b.ncols()) {
        return Err(shape_err(format!(
            "inputs[{k}] has {} entries, expected {}",
            inputs[k].len(),
            b.ncols()
        )));
    }
    let t = inputs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut steps: Vec<DVector<f64>> = match noise.kind {
        NoiseKind::None => vec![DVector::zeros(n); t],
        NoiseKind::PerStepBounded { alpha } => (0..t)
            .map(|_| {
                let r: f64 = rng.random();
                random_direction(&mut rng, n) * (alpha * r)
            })
            .collect(),
        NoiseKind::EnergyBudget { alpha, concentrate } => {
            let total = alpha * alpha * t as f64;
            let weights: Vec<f64> = if concentrate {
                let j = if t > 0 { rng.random_range(0..t) } else { 0 };
                (0..t).map(|k| if k == j { 1.0 } else { 0.0 }).collect()
            } else {
                let w: Vec<f64> = (0..t).map(|_| rng.sample::<f64, _>(Exp1)).collect();
                let s: f64 = w.iter().sum();
                w.iter().map(|v| v / s).collect()
            };
            weights
                .iter()
                .map(|w| random_direction(&mut rng, n) * (total * w).sqrt())
                .collect()
        }
    };
    // Guard against round-off pushing the realized energy above the budget.
    if let NoiseKind::EnergyBudget { alpha, .. } = noise.kind {
        let energy: f64 = steps.iter().map(|v| v.norm_squared()).sum();
        let budget = alpha * alpha * t as f64;
        if energy > budget && energy > 0.0 {
            let f = (budget / energy).sqrt();
            steps.iter_mut().for_each(|v| *v *= f);
        }
    }
    let mut states = Vec::with_capacity(t + 1);
    states.push(x0.clone());
    for k in 0..t {
        let next = a * &states[k] + b * &inputs[k] + &steps[k];
        states.push(next);
    }
    let mut v = DMatrix::zeros(n, t);
    for (k, step) in steps.iter().enumerate() {
        v.set_column(t - 1 - k, step);
    }
    Ok((Trajectory::new(states, inputs.to_vec())?, v))
}

/// Stacks a trajectory into `X = [x_{t−1} … x₀]`, `X₊ = [x_t … x₁]`,
/// `U = [u_{t−1} … u₀]`.
pub fn build_batch(traj: &Trajectory, b: &DMatrix<f64>) -> Result<DataBatch> {
    let n = traj.states[0].len();
    let t = traj.len();
    let m = b.ncols();
    let mut x = DMatrix::zeros(n, t);
    let mut xp = DMatrix::zeros(n, t);
    let mut u = DMatrix::zeros(m, t);
    for k in 0..t {
        let col = t - 1 - k;
        x.set_column(col, &traj.states[k]);
        xp.set_column(col, &traj.states[k + 1]);
        if traj.inputs[k].len() != m {
            return Err(shape_err(format!(
                "inputs[{k}] has {} entries, B has {m} columns",
                traj.inputs[k].len()
            )));
        }
        u.set_column(col, &traj.inputs[k]);
    }
    DataBatch::new(x, xp, u, b.clone())
}

/// Change of coordinates `x̃ = R x` with `P = RᵀR`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateTransform {
    pub r: DMatrix<f64>,
    pub r_inv: DMatrix<f64>,
    /// `√λ_max(P)`.
    pub relaxed_alpha_factor: f64,
}

impl CoordinateTransform {
    pub fn from_metric(p: &SymMatrix) -> Result<Self> {
        let sd = p.spectral();
        let lmin = sd.lambda_min();
        if !(lmin > 0.0) {
            return Err(Error::NotPd { min_eig: lmin });
        }
        let r = sqrt_psd(p)?.into_inner();
        let r_inv = sd.map(|l| 1.0 / l.sqrt());
        Ok(Self {
            r,
            r_inv,
            relaxed_alpha_factor: sd.lambda_max().sqrt(),
        })
    }

    pub fn forward(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.r * x
    }

    pub fn backward(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.r_inv * x
    }
}

/// Data and bounds in the coordinates where the `P`-energy bound becomes a
/// plain norm bound.
#[derive(Debug, Clone)]
pub struct TransformedData {
    pub batch: DataBatch,
    pub bounds: PriorBounds,
    pub transform: CoordinateTransform,
    /// Always true: the relaxed noise level makes the check sufficient only.
    pub conservative: bool,
}

/// Maps `x ↦ R x`, `B ↦ R B` and `α ↦ α √λ_max(P)`.
pub fn apply_transform(
    batch: &DataBatch,
    bounds: &PriorBounds,
    p: &SymMatrix,
) -> Result<TransformedData> {
    if p.dim() != batch.n() {
        return Err(shape_err(format!(
            "P is {0}x{0}, expected {1}x{1}",
            p.dim(),
            batch.n()
        )));
    }
    let transform = CoordinateTransform::from_metric(p)?;
    let r = &transform.r;
    let out = DataBatch::new(
        r * &batch.x,
        r * &batch.x_plus,
        batch.u.clone(),
        r * &batch.b,
    )?;
    let bounds = PriorBounds::new(bounds.l, bounds.alpha * transform.relaxed_alpha_factor)?;
    Ok(TransformedData {
        batch: out,
        bounds,
        transform,
        conservative: true,
    })
}

/// On-disk trajectory document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub states: Vec<Vec<f64>>,
    /// Omitted or empty means zero input at every transition.
    #[serde(default)]
    pub inputs: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Vec<f64>>>,
}

/// A parsed data file.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub batch: DataBatch,
    /// The final state `x_t`; absent for a file without states.
    pub last_state: Option<DVector<f64>>,
    pub p: Option<SymMatrix>,
}

fn rows_to_matrix(name: &str, rows: &[Vec<f64>], cols: Option<usize>) -> Result<DMatrix<f64>> {
    let c = cols.or_else(|| rows.first().map(Vec::len)).unwrap_or(0);
    if let Some(k) = rows.iter().position(|r| r.len() != c) {
        return Err(Error::Parse(format!(
            "{name}[{k}] has {} entries, expected {c}",
            rows[k].len()
        )));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("{name} contains a non-finite entry")));
    }
    Ok(DMatrix::from_fn(rows.len(), c, |i, j| rows[i][j]))
}

impl TrajectoryFile {
    pub fn into_dataset(self) -> Result<Dataset> {
        let b = rows_to_matrix("B", &self.b, None)?;
        let n = b.nrows();
        let m = b.ncols();
        if n == 0 {
            return Err(Error::Parse("B must have at least one row".into()));
        }
        let p = match &self.p {
            Some(rows) => {
                let pm = rows_to_matrix("P", rows, Some(n))?;
                if pm.nrows() != n {
                    return Err(Error::Parse(format!(
                        "P has {} rows, expected {n}",
                        pm.nrows()
                    )));
                }
                let pm =
                    SymMatrix::new_strict(pm, 1e-9).map_err(|e| Error::Parse(format!("P: {e}")))?;
                let lmin = pm.lambda_min();
                if !(lmin > 0.0) {
                    return Err(Error::Parse(format!(
                        "P is not positive definite (min eigenvalue {lmin:e})"
                    )));
                }
                Some(pm)
            }
            None => None,
        };
        if self.states.is_empty() {
            if !self.inputs.is_empty() {
                return Err(Error::Parse("inputs given without states".into()));
            }
            let batch = DataBatch::new(
                DMatrix::zeros(n, 0),
                DMatrix::zeros(n, 0),
                DMatrix::zeros(m, 0),
                b,
            )?;
            return Ok(Dataset {
                batch,
                last_state: None,
                p,
            });
        }
        let states = rows_to_matrix("states", &self.states, Some(n))?;
        let t = states.nrows() - 1;
        let inputs = if self.inputs.is_empty() {
            vec![vec![0.0; m]; t]
        } else {
            self.inputs
        };
        if inputs.len() != t {
            return Err(Error::Parse(format!(
                "inputs has {} rows, expected {t} (one per transition)",
                inputs.len()
            )));
        }
        let inputs = rows_to_matrix("inputs", &inputs, Some(m))?;
        let traj = Trajectory::new(
            states.row_iter().map(|r| r.transpose()).collect(),
            inputs.row_iter().map(|r| r.transpose()).collect(),
        )?;
        let batch = build_batch(&traj, &b)?;
        Ok(Dataset {
            batch,
            last_state: Some(traj.last_state().clone()),
            p,
        })
    }

    pub fn from_trajectory(traj: &Trajectory, b: &DMatrix<f64>, p: Option<&SymMatrix>) -> Self {
        let rows = |m: &DMatrix<f64>| m.row_iter().map(|r| r.iter().copied().collect()).collect();
        Self {
            states: traj
                .states
                .iter()
                .map(|x| x.iter().copied().collect())
                .collect(),
            inputs: traj
                .inputs
                .iter()
                .map(|u| u.iter().copied().collect())
                .collect(),
            b: rows(b),
            p: p.map(|p| rows(p.as_matrix())),
        }
    }
}

pub fn parse_json(text: &str) -> Result<Dataset> {
    let file: TrajectoryFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_dataset()
}

/// States-only CSV: one state per row, `B = 0` with one zero input channel.
pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut states = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", k + 1)))?;
        states.push(row);
    }
    let n = states
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Parse("CSV file has no states".into()))?;
    let t = states.len() - 1;
    TrajectoryFile {
        states,
        inputs: vec![vec![0.0]; t],
        b: vec![vec![0.0]; n],
        p: None,
    }
    .into_dataset()
}

/// Loads a `.csv` file as states-only data and anything else as JSON.
pub fn load(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => parse_csv(&text),
        _ => parse_json(&text),
    }
}

pub fn save_json(path: &Path, file: &TrajectoryFile) -> Result<()> {
    let text = to_json(file)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON whose floats carry 17 significant digits.
struct Digits17(serde_json::ser::PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + std::io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl serde_json::ser::Formatter for Digits17 {
    delegate!(
        begin_array(), end_array(), begin_array_value(first: bool), end_array_value(),
        begin_object(), end_object(), begin_object_key(first: bool), end_object_key(),
        begin_object_value(), end_object_value(),
    );

    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, w: &mut W, v: f32) -> std::io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

/// Serializes `value` as pretty JSON with every float written to 17
/// significant digits. Non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut out,
        Digits17(serde_json::ser::PrettyFormatter::new()),
    );
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(out).expect("JSON is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn short_batches() {
        let traj = Trajectory::new(
            vec![dvector![1.0, 2.0], dvector![3.0, 4.0]],
            vec![dvector![5.0]],
        )
        .unwrap();
        let b = dmatrix![1.0; 0.0];
        let d = build_batch(&traj, &b).unwrap();
        assert_eq!(d.x, dmatrix![1.0; 2.0]);
        assert_eq!(d.x_plus, dmatrix![3.0; 4.0]);
        assert_eq!(d.u, dmatrix![5.0]);
        let empty = Trajectory::new(vec![dvector![1.0, 2.0]], vec![]).unwrap();
        let d = build_batch(&empty, &b).unwrap();
        assert_eq!(d.x.shape(), (2, 0));
        assert_eq!(d.u.shape(), (1, 0));
    }

    #[test]
    fn trivial_simulations() {
        let x0 = dvector![0.3, -2.0];
        let inputs = vec![dvector![1.0]; 4];
        let b = DMatrix::zeros(2, 1);
        let (traj, _) =
            simulate(&DMatrix::zeros(2, 2), &b, &x0, &inputs, &NoiseSpec::none()).unwrap();
        assert!(traj.states()[1..].iter().all(|x| x.amax() == 0.0));
        let (traj, _) = simulate(
            &DMatrix::identity(2, 2),
            &b,
            &x0,
            &inputs,
            &NoiseSpec::none(),
        )
        .unwrap();
        assert!(traj.states().iter().all(|x| x == &x0));
    }

    #[test]
    fn metric_transform_factor() {
        let t = CoordinateTransform::from_metric(&SymMatrix::from_diagonal(&[4.0, 1.0])).unwrap();
        assert!((t.relaxed_alpha_factor - 2.0).abs() < 1e-15);
        assert!((&t.r * &t.r - dmatrix![4.0, 0.0; 0.0, 1.0]).amax() < 1e-12);
        assert!(matches!(
            CoordinateTransform::from_metric(&SymMatrix::from_diagonal(&[1.0, 0.0])),
            Err(Error::NotPd { .. })
        ));
    }

    #[test]
    fn json_errors_name_the_field() {
        let err = parse_json(r#"{"states": [[1, 2], [3]], "inputs": [[0]], "B": [[0], [0]]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("states[1]"), "{err}");
        let err = parse_json(r#"{"inputs": [], "B": [[0]]}"#).unwrap_err();
        assert!(err.to_string().contains("states"), "{err}");
    }

    #[test]
    fn json_floats_round_trip() {
        let v = vec![0.1, 1.0 / 3.0, -2.5e-300, f64::NAN];
        let text = to_json(&v).unwrap();
        assert!(text.contains("3.3333333333333331e-1"), "{text}");
        let back: Vec<Option<f64>> = serde_json::from_str(&text).unwrap();
        assert_eq!(back[..3], [Some(0.1), Some(1.0 / 3.0), Some(-2.5e-300)]);
        assert_eq!(back[3], None);
    }

    #[test]
    fn csv_import() {
        let d = parse_csv("1,2\n3,4\n5,6\n").unwrap();
        assert_eq!(d.batch.x, dmatrix![3.0, 1.0; 4.0, 2.0]);
        assert_eq!(d.last_state, Some(dvector![5.0, 6.0]));
    }
}
