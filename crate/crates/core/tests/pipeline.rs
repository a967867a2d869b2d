use carleman_mfg::carleman::Theorem2Prepared;
use carleman_mfg::carleman::{
    linear_s_grid, max_admissible_s, sweep_s, BoundaryFunctionalParams, Estimate,
};
use carleman_mfg::config::ExperimentConfig;
use carleman_mfg::discretization::{extract_cauchy, GridDims, SpaceTimeGrid};
use carleman_mfg::geometry::{DomainSpec, Face, WeightConfig, WeightParams};
use carleman_mfg::mfg::{ManufacturedCase, SolverOptions};
use carleman_mfg::runner::{run_mms, run_sweep_t0, run_uc_check};
use carleman_mfg::uc::{manufactured_pair, ramp_perturbation, uc_verify, PairSource, UcOptions};

fn cfg(overrides: &[&str]) -> ExperimentConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    ExperimentConfig::from_toml_with("", None, &o).unwrap()
}

#[test]
fn solved_pair_passes_window_check() {
    let run = run_uc_check(&cfg(&["grid.n1=33", "grid.nt=1025"])).unwrap();
    let v = &run.verdict;
    assert!(v.pass);
    assert!(run.c_emp_bounded);
    assert!(v.gamma_mismatch > 0.0 && v.gamma_mismatch <= run.tol_gamma);
    assert!(v.window_norm < 1e-6, "{}", v.window_norm);
    assert!(v.mismatch.m1 > 0.0 && v.mismatch.m2 > 0.0);
}

#[test]
fn sampled_pair_meets_exact_gamma_tolerance() {
    let run = run_uc_check(&cfg(&[
        "uc.pair_source=\"sampled\"",
        "grid.n1=65",
        "grid.nt=65",
    ]))
    .unwrap();
    assert_eq!(run.verdict.gamma_mismatch, 0.0);
    assert_eq!(run.verdict.window_norm, 0.0);
    assert!(run.verdict.pass);
}

#[test]
fn two_dimensional_pair() {
    let spec = DomainSpec::rectangle(1.0, 1.0, &[Face::Left, Face::Bottom, Face::Top], 0.5);
    let w = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
    let case = ManufacturedCase::get("2d-smooth", w.t0).unwrap();
    let (du, dv) = ramp_perturbation(2, 100.0);
    let build = |n: usize| {
        let grid = SpaceTimeGrid::new(&spec, GridDims::new_2d(n, n, 33), &w).unwrap();
        let pair = manufactured_pair(
            &grid,
            &case,
            &du,
            &dv,
            PairSource::Sampled,
            &SolverOptions::default(),
            0.05,
        )
        .unwrap();
        (grid, pair)
    };
    // sin^2 vanishes to second order on the top/bottom faces: the one-sided
    // normal difference leaves an O(h^3) trace.
    let (g17, p17) = build(17);
    let (grid, pair) = build(33);
    let m17 = extract_cauchy(&g17, &p17.y, Some(&p17.z)).gamma_max_abs();
    let m33 = extract_cauchy(&grid, &pair.y, Some(&pair.z)).gamma_max_abs();
    assert!(m33 > 0.0 && m17 / m33 > 6.0, "{m17} {m33}");

    let prep = Theorem2Prepared::new(&grid, &pair, 0.05).unwrap();
    let sg = linear_s_grid(1.0, 0.5 * max_admissible_s(&w), 12);
    let rep = sweep_s(
        Estimate::Theorem2(&prep),
        &grid,
        &sg,
        &w,
        &BoundaryFunctionalParams::default(),
    )
    .unwrap();
    assert!(
        rep.bounded,
        "{:?}",
        rep.rows.iter().map(|r| r.ratio).collect::<Vec<_>>()
    );
    let (h, tau) = (grid.h_max(), grid.tau());
    let opts = UcOptions {
        tol_gamma: 1e-10 + 20.0 * (h * h + tau),
        ..UcOptions::default()
    };
    let v = uc_verify(&grid, &w, &pair, rep.c_emp, &opts).unwrap();
    assert!(v.pass, "{v:?}");
    assert_eq!(v.window_norm, 0.0);
}

#[test]
fn t0_sweep_covers_target() {
    let rep = run_sweep_t0(&cfg(&["uc.horizon=2.5", "uc.n_t0=6"])).unwrap();
    assert_eq!(rep.cells.len(), 6);
    assert!(rep.all_pass && rep.exhausts);
    let (lo, hi) = rep.union.unwrap();
    assert!(lo > rep.target.0 && hi < rep.target.1);
}

#[test]
fn refinement_ladder_in_two_dimensions() {
    let rows = run_mms(&cfg(&[
        "geometry.dimension=2",
        "geometry.extents=[1.0, 1.0]",
        "geometry.gamma_faces=[\"left\", \"bottom\", \"top\"]",
        "grid.n2=17",
        "mfg.case_id=2d-smooth",
        "mfg.mms_levels=[9, 17]",
    ]))
    .unwrap();
    let p = rows[1].order_u.unwrap();
    assert!(p > 1.7 && p < 2.3, "{p}");
}
