use super::*;
use crate::discretization::{norm_sq, Field, GridDims, Region, SpaceTimeGrid};
use crate::error::Error;
use crate::geometry::{DomainSpec, Face, WeightConfig, WeightParams};

fn setup_1d(n: usize, nt: usize) -> (SpaceTimeGrid, WeightConfig) {
    let spec = DomainSpec::interval(1.0, Face::Left, 0.5);
    let cfg = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
    (
        SpaceTimeGrid::new(&spec, GridDims::new_1d(n, nt), &cfg).unwrap(),
        cfg,
    )
}

fn errors(case: &str, n: usize, nt: usize) -> (f64, f64) {
    let (grid, cfg) = setup_1d(n, nt);
    let m = make_manufactured(case, &grid).unwrap();
    let (u, v) = solve(&m.problem, &SolverOptions::default()).unwrap();
    let eu = norm_sq(&grid, &cfg, Region::Full, &[&u.field.sub(&m.u_exact)])
        .unwrap()
        .sqrt();
    let ev = norm_sq(&grid, &cfg, Region::Full, &[&v.field.sub(&m.v_exact)])
        .unwrap()
        .sqrt();
    (eu, ev)
}

#[test]
fn zero_problem_has_zero_solution() {
    let (grid, _) = setup_1d(9, 9);
    let p = MFGProblem::zero(grid).unwrap();
    let (u, v) = solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(u.field.max_abs(), 0.0);
    assert_eq!(v.field.max_abs(), 0.0);
    assert_eq!(u.residual, 0.0);
}

#[test]
fn zero_problem_in_2d() {
    let spec = DomainSpec::rectangle(1.0, 1.0, &[Face::Left, Face::Bottom, Face::Top], 0.5);
    let cfg = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
    let grid = SpaceTimeGrid::new(&spec, GridDims::new_2d(7, 6, 5), &cfg).unwrap();
    let (u, v) = solve(&MFGProblem::zero(grid).unwrap(), &SolverOptions::default()).unwrap();
    assert_eq!(u.field.max_abs() + v.field.max_abs(), 0.0);
}

#[test]
fn u_does_not_depend_on_v_data() {
    let (grid, _) = setup_1d(17, 33);
    let m = make_manufactured("1d-nonlinear", &grid).unwrap();
    let mut other = m.problem.clone();
    other.v_data = Field::constant(&grid, 7.0);
    other.g = Field::constant(&grid, -3.0);
    let a = solve_u(&m.problem, &SolverOptions::default()).unwrap();
    let b = solve_u(&other, &SolverOptions::default()).unwrap();
    assert_eq!(a.field, b.field);
}

#[test]
fn linear_and_varying_cases_converge_at_second_order() {
    for case in ["1d-linear", "1d-varying-a2"] {
        let (u1, v1) = errors(case, 17, 257);
        let (u2, v2) = errors(case, 33, 1025);
        let (pu, pv) = ((u1 / u2).log2(), (v1 / v2).log2());
        assert!((1.7..=2.3).contains(&pu), "{case}: u order {pu}");
        assert!((1.7..=2.3).contains(&pv), "{case}: v order {pv}");
    }
}

#[test]
fn two_dimensional_case_converges() {
    let spec = DomainSpec::rectangle(1.0, 1.0, &[Face::Left, Face::Bottom, Face::Top], 0.5);
    let cfg = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
    let err = |n: usize, nt: usize| {
        let grid = SpaceTimeGrid::new(&spec, GridDims::new_2d(n, n, nt), &cfg).unwrap();
        let m = make_manufactured("2d-smooth", &grid).unwrap();
        let (u, v) = solve(&m.problem, &SolverOptions::default()).unwrap();
        norm_sq(
            &grid,
            &cfg,
            Region::Full,
            &[&u.field.sub(&m.u_exact), &v.field.sub(&m.v_exact)],
        )
        .unwrap()
        .sqrt()
    };
    let p = (err(9, 65) / err(17, 257)).log2();
    assert!(p > 1.6, "order {p}");
}

#[test]
fn residuals_shrink_like_h2_plus_tau() {
    let res = |n: usize, nt: usize| {
        let (grid, _) = setup_1d(n, nt);
        let m = make_manufactured("1d-nonlinear", &grid).unwrap();
        let (u, v) = solve(&m.problem, &SolverOptions::default()).unwrap();
        let h = grid.h()[0];
        (
            u.residual / (h * h + grid.tau()),
            v.residual / (h * h + grid.tau()),
        )
    };
    let (a, b) = (res(17, 257), res(33, 1025));
    assert!(
        a.0.is_finite() && (b.0 / a.0) < 1.5 && (b.1 / a.1) < 1.5,
        "{a:?} {b:?}"
    );
}

#[test]
fn strong_coupling_on_coarse_grid_fails_the_inner_iteration() {
    // The frozen-gradient fixed point is a contraction only while
    // tau * kappa |grad u| / h stays small.
    let (grid, _) = setup_1d(9, 3);
    let mut m = make_manufactured("1d-nonlinear", &grid).unwrap();
    m.problem.coeffs.kappa = Field::constant(&grid, 50.0);
    m.problem.u_data = m.problem.u_data.scale(4.0);
    let opts = SolverOptions {
        max_inner: 30,
        tol_inner: 1e-10,
    };
    match solve_u(&m.problem, &opts) {
        Err(Error::InnerIteration { .. }) => {}
        other => panic!("expected inner-iteration failure, got {other:?}"),
    }
}
