use std::path::PathBuf;

use ddinterp::inference::{
    certificate_holds, gain_bracket, min_gain, min_noise, tradeoff_curve, verify, DataBatch,
    PriorBounds,
};
use ddinterp::lmi::SoftMinSolver;
use ddinterp::sysio::{self, build_batch, simulate, NoiseKind, NoiseSpec};
use ddinterp::Error;
use nalgebra::{dmatrix, dvector, DMatrix};

fn batch(name: &str) -> DataBatch {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name]
        .iter()
        .collect();
    sysio::load(&p).unwrap().batch
}

fn oracle() -> SoftMinSolver {
    SoftMinSolver::default()
}

#[test]
fn dataset1_minimal_noise_matches_reference_solver() {
    let d = batch("dataset1.json");
    let r = min_noise(&d, 1.0, &oracle()).unwrap();
    assert!((r.value - 0.06067).abs() < 5e-4, "{}", r.value);
    assert!(r.cross_check_residual.unwrap() < 1e-3);
    let r = min_noise(&d, 0.5, &oracle()).unwrap();
    assert!((r.value - 0.5964).abs() < 1e-3, "{}", r.value);
}

#[test]
fn dataset1_minimal_gain_matches_reference_solver() {
    let d = batch("dataset1.json");
    let r = min_gain(&d, 0.06, &oracle()).unwrap();
    assert!((r.value - 1.000645).abs() < 2e-3, "{}", r.value);
    let r = min_gain(&d, 0.32, &oracle()).unwrap();
    assert!((r.value - 0.7544).abs() < 1e-3, "{}", r.value);
}

#[test]
fn dataset1_verdicts_around_the_minimum() {
    let d = batch("dataset1.json");
    let yes = verify(&d, &PriorBounds::new(1.0, 0.07).unwrap(), &oracle()).unwrap();
    assert!(yes.consistent);
    let cert = yes
        .certificate
        .expect("certificate for a consistent verdict");
    assert!(certificate_holds(&d, &cert, 1e-6).unwrap());
    let no = verify(&d, &PriorBounds::new(1.0, 0.05).unwrap(), &oracle()).unwrap();
    assert!(!no.consistent);
}

#[test]
fn dataset2_needs_the_unexplained_residual() {
    let d = batch("dataset2.json");
    let r = min_noise(&d, 1.0, &oracle()).unwrap();
    assert!((r.value - 0.6024).abs() < 1e-3, "{}", r.value);
    assert!(matches!(gain_bracket(&d, 0.32), Err(Error::Infeasible(_))));
    assert!(matches!(
        min_gain(&d, 0.32, &oracle()),
        Err(Error::Infeasible(_))
    ));
    let br = gain_bracket(&d, 0.65).unwrap();
    assert!(br[0] <= br[1]);
    let l = min_gain(&d, 0.65, &oracle()).unwrap().value;
    assert!(l <= br[1] * (1.0 + 1e-6));
}

#[test]
fn noise_free_data_recover_the_gain() {
    let a = dmatrix![0.6, 0.2; -0.1, 0.5];
    let b = DMatrix::zeros(2, 1);
    let inputs = vec![dvector![0.0]; 4];
    let (traj, _) = simulate(&a, &b, &dvector![1.0, -0.5], &inputs, &NoiseSpec::none()).unwrap();
    let d = build_batch(&traj, &b).unwrap();
    let norm = ddinterp::matcore::spectral_norm(&a);
    let l = min_gain(&d, 0.0, &oracle()).unwrap().value;
    assert!(l <= norm + 1e-4, "{l} vs {norm}");
    assert!(
        verify(&d, &PriorBounds::new(norm * 1.001, 0.0).unwrap(), &oracle())
            .unwrap()
            .consistent
    );
}

#[test]
fn generating_system_is_always_consistent() {
    let a = dmatrix![0.7, 0.2, 0.0; -0.1, 0.8, 0.3; 0.0, -0.2, 0.6];
    let b = dmatrix![0.0; 1.0; 0.5];
    let norm = ddinterp::matcore::spectral_norm(&a);
    for seed in 0..6 {
        let inputs: Vec<_> = (0..6)
            .map(|k| dvector![((k + seed) as f64).cos()])
            .collect();
        let kind = if seed % 2 == 0 {
            NoiseKind::PerStepBounded { alpha: 0.1 }
        } else {
            NoiseKind::EnergyBudget {
                alpha: 0.1,
                concentrate: seed % 3 == 0,
            }
        };
        let (traj, _) = simulate(
            &a,
            &b,
            &dvector![1.0, 0.0, -1.0],
            &inputs,
            &NoiseSpec { kind, seed },
        )
        .unwrap();
        let d = build_batch(&traj, &b).unwrap();
        let rep = verify(&d, &PriorBounds::new(norm, 0.1).unwrap(), &oracle()).unwrap();
        assert!(rep.consistent, "seed {seed}");
    }
}

#[test]
fn curve_is_nonincreasing_and_validates_grid() {
    let d = batch("dataset1.json");
    let pts = tradeoff_curve(&d, &[0.5, 1.0, 2.0], &oracle()).unwrap();
    let vals: Vec<f64> = pts.iter().map(|p| p.alpha_star.unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] <= w[0]), "{vals:?}");
    assert!(matches!(
        tradeoff_curve(&d, &[2.0, 1.0], &oracle()),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn invalid_bounds_are_rejected() {
    assert!(PriorBounds::new(-1.0, 0.1).is_err());
    assert!(PriorBounds::new(1.0, f64::NAN).is_err());
}
