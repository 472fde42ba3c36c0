use std::path::PathBuf;

use ddinterp::inference::{verify, PriorBounds};
use ddinterp::lmi::SoftMinSolver;
use ddinterp::matcore::{spectral_norm, SymMatrix};
use ddinterp::sysio::{
    apply_transform, build_batch, load, parse_csv, parse_json, save_json, simulate, to_json,
    NoiseKind, NoiseSpec, Trajectory, TrajectoryFile,
};
use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use proptest::prelude::*;

fn data_path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name]
        .iter()
        .collect()
}

#[test]
fn dataset2_batch_is_exact() {
    let d = load(&data_path("dataset2.json")).unwrap();
    let states = [
        [1.0, 1.0],
        [-1.04, 0.15],
        [0.9, -0.4],
        [-0.08, -1.2],
        [-0.5, -0.8],
        [0.83, 0.55],
    ];
    let t = states.len() - 1;
    assert_eq!(d.batch.t(), t);
    for k in 0..t {
        let col = t - 1 - k;
        assert_eq!(d.batch.x.column(col).as_slice(), &states[k]);
        assert_eq!(d.batch.x_plus.column(col).as_slice(), &states[k + 1]);
    }
    assert_eq!(d.last_state.unwrap().as_slice(), &states[t]);
}

#[test]
fn json_file_round_trips_exactly() {
    let a = dmatrix![0.9, 0.1; -0.2, 0.7];
    let b = dmatrix![0.3; 1.0];
    let inputs: Vec<_> = (0..5).map(|k| dvector![(k as f64 * 0.37).sin()]).collect();
    let noise = NoiseSpec {
        kind: NoiseKind::PerStepBounded { alpha: 0.05 },
        seed: 11,
    };
    let (traj, _) = simulate(&a, &b, &dvector![0.123456789, -1.0 / 3.0], &inputs, &noise).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.json");
    save_json(&path, &TrajectoryFile::from_trajectory(&traj, &b, None)).unwrap();
    let back = load(&path).unwrap();
    assert_eq!(back.batch, build_batch(&traj, &b).unwrap());
}

#[test]
fn csv_states_parse_with_zero_input() {
    let d = parse_csv("# comment\n1, 1\n-1.04, 0.15\n\n0.9,-0.4\n").unwrap();
    assert_eq!(d.batch.t(), 2);
    assert_eq!(d.batch.b, DMatrix::zeros(2, 1));
    assert!(parse_csv("1,2\n3,x\n")
        .unwrap_err()
        .to_string()
        .contains("line 2"));
}

#[test]
fn malformed_json_names_the_field() {
    let err = parse_json(r#"{"states": [[1, 2], [3]], "B": [[0], [0]]}"#).unwrap_err();
    assert!(err.to_string().contains("states[1]"), "{err}");
    assert!(
        parse_json(r#"{"states": [[1, 2]], "B": [[0], [0]], "P": [[1, 0], [0, -1]]}"#).is_err()
    );
}

#[test]
fn reports_keep_seventeen_digits() {
    let v: f64 = 0.1 + 0.2;
    let s = to_json(&vec![v]).unwrap();
    let back: Vec<f64> = serde_json::from_str(&s).unwrap();
    assert_eq!(back[0].to_bits(), v.to_bits());
}

#[test]
fn trajectory_rejects_mismatched_lengths() {
    assert!(Trajectory::new(vec![dvector![1.0], dvector![2.0]], vec![]).is_err());
}

fn system(seed: &[f64]) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>, Vec<DVector<f64>>) {
    let mut it = seed.iter().copied().cycle();
    let mut next = || it.next().unwrap();
    let a = DMatrix::from_fn(2, 2, |_, _| next());
    let b = DMatrix::from_fn(2, 1, |_, _| next());
    let x0 = DVector::from_fn(2, |_, _| next());
    let inputs = (0..6).map(|_| DVector::from_element(1, next())).collect();
    (a, b, x0, inputs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simulated_noise_respects_its_bound(
        seed in prop::collection::vec(-1.0f64..1.0, 16),
        alpha in 0.0f64..0.5,
        rng_seed in any::<u64>(),
        concentrate in any::<bool>(),
        per_step in any::<bool>(),
    ) {
        let (a, b, x0, inputs) = system(&seed);
        let kind = if per_step { NoiseKind::PerStepBounded { alpha } } else { NoiseKind::EnergyBudget { alpha, concentrate } };
        let (traj, v) = simulate(&a, &b, &x0, &inputs, &NoiseSpec { kind, seed: rng_seed }).unwrap();
        let d = build_batch(&traj, &b).unwrap();
        let resid = &d.x_plus - &a * &d.x - &b * &d.u;
        prop_assert!((resid - &v).amax() < 1e-12);
        let t = inputs.len() as f64;
        if per_step {
            prop_assert!(v.column_iter().all(|c| c.norm() <= alpha * (1.0 + 1e-12)));
        } else {
            prop_assert!(v.norm_squared() <= alpha * alpha * t * (1.0 + 1e-12));
        }
        prop_assert!(spectral_norm(&v) <= alpha * t.sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn simulation_is_seed_deterministic(seed in prop::collection::vec(-1.0f64..1.0, 16), rng_seed in any::<u64>()) {
        let (a, b, x0, inputs) = system(&seed);
        let noise = NoiseSpec { kind: NoiseKind::PerStepBounded { alpha: 0.2 }, seed: rng_seed };
        let (_, v1) = simulate(&a, &b, &x0, &inputs, &noise).unwrap();
        let (_, v2) = simulate(&a, &b, &x0, &inputs, &noise).unwrap();
        prop_assert_eq!(v1, v2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn transformed_check_accepts_data_from_admissible_systems(
        seed in prop::collection::vec(-1.0f64..1.0, 16),
        p_diag in (0.3f64..3.0, 0.3f64..3.0),
        rng_seed in any::<u64>(),
    ) {
        let (a0, b, x0, inputs) = system(&seed);
        let p = SymMatrix::from_diagonal(&[p_diag.0, p_diag.1]);
        let r = DMatrix::from_diagonal(&dvector![p_diag.0.sqrt(), p_diag.1.sqrt()]);
        let r_inv = r.clone().try_inverse().unwrap();
        let l = spectral_norm(&(&r * &a0 * &r_inv)).max(1e-3);
        let alpha = 0.1;
        let noise = NoiseSpec { kind: NoiseKind::EnergyBudget { alpha, concentrate: false }, seed: rng_seed };
        let (traj, _) = simulate(&a0, &b, &x0, &inputs, &noise).unwrap();
        let batch = build_batch(&traj, &b).unwrap();
        let td = apply_transform(&batch, &PriorBounds::new(l, alpha).unwrap(), &p).unwrap();
        prop_assert!(td.conservative);
        prop_assert!((td.transform.relaxed_alpha_factor - p_diag.0.max(p_diag.1).sqrt()).abs() < 1e-12);
        let rep = verify(&td.batch, &td.bounds, &SoftMinSolver::default()).unwrap();
        prop_assert!(rep.consistent);
    }
}
