use ddinterp::interp::{
    certificate_to_operators, feasible_output_set, feasible_output_set_schur, interp_exists,
    multi_bound_exists, Ellipsoid, FeasibleSet, InterpInstance, Tolerances,
};
use ddinterp::lmi::SoftMinSolver;
use ddinterp::matcore::{spectral_norm, SymMatrix};
use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use proptest::prelude::*;

fn ellipsoid(set: FeasibleSet) -> Ellipsoid {
    match set {
        FeasibleSet::Ellipsoid(e) => e,
        other => panic!("expected an ellipsoid, got {other:?}"),
    }
}

#[test]
fn two_point_instance_is_interpolable() {
    let inst = InterpInstance::new(
        dmatrix![1.0; 1.0],
        dmatrix![-1.04; 0.15],
        SymMatrix::identity(2),
    )
    .unwrap();
    assert!(interp_exists(&inst).unwrap());
    let d = inst.d_matrix();
    assert!((d.as_matrix()[(0, 0)] - 0.8959).abs() < 1e-12);
}

#[test]
fn norm_violation_is_not_interpolable() {
    let inst = InterpInstance::new(
        dmatrix![0.0; 1.0],
        dmatrix![2.0; 0.0],
        SymMatrix::identity(2),
    )
    .unwrap();
    assert!(!interp_exists(&inst).unwrap());
    assert_eq!(
        feasible_output_set(&inst, &dvector![1.0, 0.0]).unwrap(),
        FeasibleSet::Empty
    );
}

#[test]
fn degenerate_pair_and_its_perturbation() {
    let z = dmatrix![0.0; 1.0];
    let y = dmatrix![1.0; 0.0];
    let inst = InterpInstance::new(z.clone(), y.clone(), SymMatrix::identity(2)).unwrap();
    assert_eq!(
        feasible_output_set(&inst, &dvector![1.0, 1.0]).unwrap(),
        FeasibleSet::Degenerate
    );
    let bumped =
        InterpInstance::new(z, y, SymMatrix::scaled_identity(2, 1.001f64.powi(2))).unwrap();
    assert!(matches!(
        feasible_output_set(&bumped, &dvector![1.0, 1.0]).unwrap(),
        FeasibleSet::Ellipsoid(_)
    ));
}

#[test]
fn query_in_data_span_gives_a_point() {
    let z = dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0];
    let y = dmatrix![0.3, -0.2];
    let inst = InterpInstance::new(z, y, SymMatrix::identity(3)).unwrap();
    let e = ellipsoid(feasible_output_set(&inst, &dvector![2.0, 1.0, 0.0]).unwrap());
    assert!(e.level.abs() < 1e-12);
    assert!((e.center[0] - 0.4).abs() < 1e-12);
}

#[test]
fn no_data_gives_the_ball() {
    let inst = InterpInstance::new(
        DMatrix::zeros(2, 0),
        DMatrix::zeros(2, 0),
        SymMatrix::scaled_identity(2, 4.0),
    )
    .unwrap();
    let e = ellipsoid(feasible_output_set(&inst, &dvector![3.0, 4.0]).unwrap());
    assert!(e.center.norm() < 1e-12);
    assert!((e.level - 100.0).abs() < 1e-9);
    assert!((e.shape.as_matrix() - DMatrix::identity(2, 2)).amax() < 1e-12);
}

#[test]
fn ellipsoid_boundary_points_lie_on_the_level_set() {
    let e = Ellipsoid::new(
        SymMatrix::new(dmatrix![2.0, 0.5; 0.5, 1.0]).unwrap(),
        dvector![1.0, -1.0],
        0.7,
    )
    .unwrap();
    for p in e.boundary_2d(32).unwrap() {
        let y = DVector::from_column_slice(&p);
        assert!((e.quad_form(&y) - 0.7).abs() < 1e-12);
    }
    assert!(e.contains(&e.center, 0.0));
}

#[test]
fn multi_bound_certificate_yields_operators() {
    let a = dmatrix![0.5, 0.2; -0.1, 0.4];
    let x = dmatrix![1.0, 0.3, -0.5; 0.2, -1.0, 0.7];
    let v = dmatrix![0.01, -0.02, 0.0; 0.0, 0.015, -0.01];
    let y = &a * &x + &v;
    let zs = [x.clone(), DMatrix::identity(3, 3)];
    let bounds = [
        SymMatrix::scaled_identity(2, 0.36),
        SymMatrix::scaled_identity(3, 0.03f64.powi(2) * 3.0),
    ];
    let cert = multi_bound_exists(&zs, &y, &bounds, &SoftMinSolver::default())
        .unwrap()
        .expect("consistent data");
    let ops = certificate_to_operators(&cert, &zs, &y).unwrap();
    let fit = &ops[0] * &x + &ops[1];
    assert!((fit - &y).amax() < 1e-6);
    assert!(spectral_norm(&ops[0]) <= 0.6 * (1.0 + 1e-4));
    assert!(spectral_norm(&ops[1]) <= 0.03 * 3f64.sqrt() * (1.0 + 1e-4));
}

fn instance(
    seed: &[f64],
    nz: usize,
    t: usize,
    ny: usize,
    rho: f64,
) -> (InterpInstance, DVector<f64>) {
    let mut it = seed.iter().copied().cycle();
    let mut next = || it.next().unwrap();
    let z = DMatrix::from_fn(nz, t, |_, _| next());
    let r = DMatrix::from_fn(nz, nz, |_, _| next());
    let g = SymMatrix::new(&r * r.transpose() + DMatrix::identity(nz, nz) * 0.5).unwrap();
    let gh = ddinterp::matcore::sqrt_psd(&g).unwrap();
    let n = DMatrix::from_fn(ny, nz, |_, _| next());
    let n = &n * (rho / spectral_norm(&n).max(1e-9));
    let y = n * gh.as_matrix() * &z;
    let q = DVector::from_fn(nz, |_, _| next());
    (InterpInstance::new(z, y, g).unwrap(), q)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn both_parameterizations_agree(
        seed in prop::collection::vec(-1.0f64..1.0, 40),
        nz in 2usize..5,
        ny in 1usize..4,
        rho in 0.1f64..0.95,
    ) {
        let t = nz - 1;
        let (inst, q) = instance(&seed, nz, t, ny, rho);
        let a = feasible_output_set(&inst, &q).unwrap();
        let b = feasible_output_set_schur(&inst, &q, Tolerances::default()).unwrap();
        match (a, b) {
            (FeasibleSet::Ellipsoid(a), FeasibleSet::Ellipsoid(b)) => {
                prop_assert!((a.shape.as_matrix() - b.shape.as_matrix()).amax() < 1e-6 * a.shape.lambda_max());
                prop_assert!((&a.center - &b.center).amax() < 1e-6 * (1.0 + a.center.amax()));
                prop_assert!((a.level - b.level).abs() < 1e-6 * (1.0 + a.level));
            }
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn feasible_data_never_rejected(
        seed in prop::collection::vec(-1.0f64..1.0, 40),
        nz in 1usize..5,
        t in 1usize..5,
        ny in 1usize..4,
        rho in 0.0f64..1.0,
    ) {
        let (inst, _) = instance(&seed, nz, t, ny, rho);
        prop_assert!(interp_exists(&inst).unwrap());
    }
}
