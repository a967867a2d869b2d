use approx::assert_relative_eq;

use super::*;
use crate::carleman::linear_s_grid;
use crate::discretization::{extract_cauchy, norm_sq, Field, GridDims, Region, SpaceTimeGrid};
use crate::error::Error;
use crate::geometry::{DomainSpec, Face, WeightConfig, WeightParams};
use crate::mfg::{ManufacturedCase, SolverOptions};

fn setup_1d(n: usize, nt: usize) -> (SpaceTimeGrid, WeightConfig) {
    let spec = DomainSpec::interval(1.0, Face::Left, 0.5);
    let cfg = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
    (
        SpaceTimeGrid::new(&spec, GridDims::new_1d(n, nt), &cfg).unwrap(),
        cfg,
    )
}

fn same_pair(grid: &SpaceTimeGrid) -> DifferencePair {
    let case = ManufacturedCase::get("1d-nonlinear", 1.0).unwrap();
    let m = case.sample(grid).unwrap();
    let coeffs = case.coefficients(grid).unwrap();
    let r = SolutionRef {
        u: &m.u_exact,
        v: &m.v_exact,
        f: &m.problem.f,
        g: &m.problem.g,
    };
    build_difference(grid, &coeffs, r, r, 0.05).unwrap()
}

#[test]
fn identical_solutions_give_zero_pair() {
    let (grid, cfg) = setup_1d(17, 17);
    let pair = same_pair(&grid);
    assert_eq!(pair.y.max_abs() + pair.z.max_abs(), 0.0);
    assert_eq!(pair.relative_residual, 0.0);
    assert!(pair.input_residuals.iter().all(|&r| r < 0.05));
    let m = compute_mismatch(&grid, &cfg, &pair).unwrap();
    assert_eq!((m.m1, m.m2), (0.0, 0.0));
}

#[test]
fn non_solution_is_rejected() {
    let (grid, _) = setup_1d(17, 17);
    let case = ManufacturedCase::get("1d-nonlinear", 1.0).unwrap();
    let m = case.sample(&grid).unwrap();
    let coeffs = case.coefficients(&grid).unwrap();
    let bad_u = m.u_exact.scale(2.0);
    let good = SolutionRef {
        u: &m.u_exact,
        v: &m.v_exact,
        f: &m.problem.f,
        g: &m.problem.g,
    };
    let bad = SolutionRef { u: &bad_u, ..good };
    let err = build_difference(&grid, &coeffs, good, bad, 0.05).unwrap_err();
    assert!(matches!(err, Error::NotASolution { .. }));
}

#[test]
fn sampled_pair_satisfies_difference_system() {
    let (grid, cfg) = setup_1d(65, 65);
    let case = ManufacturedCase::get("1d-nonlinear", cfg.t0).unwrap();
    let (du, dv) = ramp_perturbation(1, 100.0);
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
    assert!(pair.relative_residual < 5e-3, "{}", pair.relative_residual);
    assert!(pair.c0.max().is_finite());
    // y vanishes near Gamma, so only the slices carry mismatch there.
    assert_eq!(
        extract_cauchy(&grid, &pair.y, Some(&pair.z)).gamma_max_abs(),
        0.0
    );
    let m = compute_mismatch(&grid, &cfg, &pair).unwrap();
    assert!(m.m1 > 0.0 && m.m2 > 0.0);
}

#[test]
fn interior_perturbation_has_no_lateral_mismatch() {
    let (grid, cfg) = setup_1d(33, 33);
    let y = Field::from_fn(&grid, |x, t| {
        let r = (x[0] - 0.5) / 0.3;
        if r.abs() < 1.0 {
            (-1.0 / (1.0 - r * r)).exp() * t
        } else {
            0.0
        }
    });
    let pair = DifferencePair {
        z: Field::zeros(&grid),
        df: Field::zeros(&grid),
        dg: Field::zeros(&grid),
        line1: Field::zeros(&grid),
        line2: Field::zeros(&grid),
        relative_residual: 0.0,
        input_residuals: [0.0; 2],
        c0: LowerOrderConstants {
            r1: 0.0,
            r2: 0.0,
            r3: 0.0,
        },
        y,
    };
    let m = compute_mismatch(&grid, &cfg, &pair).unwrap();
    assert_eq!(m.m1, 0.0);
    assert!(m.m2 > 0.0);
}

#[test]
fn bound_is_zero_and_homogeneous() {
    let (_, cfg) = setup_1d(9, 9);
    let sg = linear_s_grid(1.0, 50.0, 50);
    let zero = eval_bound(&MismatchConstants { m1: 0.0, m2: 0.0 }, &cfg, 3.0, &sg).unwrap();
    assert!(zero.values.iter().all(|&v| v == 0.0));
    let m = MismatchConstants { m1: 0.7, m2: 0.2 };
    let a = eval_bound(&m, &cfg, 1.0, &sg).unwrap();
    let b = eval_bound(&MismatchConstants { m1: 2.1, m2: 0.6 }, &cfg, 2.0, &sg).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert_relative_eq!(*y, 6.0 * x, max_relative = 1e-12);
    }
    assert!(matches!(
        eval_bound(&m, &cfg, 1.0, &[]),
        Err(Error::EmptySGrid)
    ));
}

#[test]
fn bound_decays_and_peaks_at_inverse_rate() {
    let (_, cfg) = setup_1d(9, 9);
    let m = MismatchConstants { m1: 0.0, m2: 1.0 };
    let curve = eval_bound(&m, &cfg, 1.0, &UcOptions::default().s_grid).unwrap();
    let g = cfg.mu2 - cfg.mu1;
    assert_relative_eq!(curve.s_peak, 1.0 / g, max_relative = 1e-2);
    let both = MismatchConstants { m1: 1.0, m2: 1.0 };
    let (lo, hi) = (
        bound_at(&both, cfg.mu1, cfg.mu2, 1.0, 1.0),
        bound_at(&both, cfg.mu1, cfg.mu2, 1.0, 50.0),
    );
    assert!(hi < 1e-6 * lo);
}

#[test]
fn zero_pair_passes_verification() {
    let (grid, cfg) = setup_1d(17, 17);
    let v = uc_verify(&grid, &cfg, &same_pair(&grid), 1.0, &UcOptions::default()).unwrap();
    assert_eq!(v.window_norm, 0.0);
    assert!(v.pass);
}

#[test]
fn lateral_data_on_gamma_is_rejected() {
    let (grid, cfg) = setup_1d(17, 17);
    let mut pair = same_pair(&grid);
    pair.y = Field::from_fn(&grid, |x, t| (1.0 - x[0]) * t);
    let err = uc_verify(&grid, &cfg, &pair, 1.0, &UcOptions::default()).unwrap_err();
    assert!(matches!(err, Error::GammaTrace { .. }));
}

#[test]
fn t0_grid_layout() {
    assert_eq!(t0_grid(2.0, 0.5, 1).unwrap(), vec![1.0]);
    let g = t0_grid(3.0, 0.5, 10).unwrap();
    assert_eq!(g.len(), 10);
    assert!(g.windows(2).all(|w| w[1] > w[0]));
    assert!(g[0] > 0.5 && g[9] < 2.5);
    assert!(matches!(t0_grid(1.0, 0.5, 3), Err(Error::Horizon { .. })));
}

#[test]
fn t0_sweep_covers_the_horizon() {
    let (_, cfg) = setup_1d(9, 9);
    let spec = DomainSpec::interval(1.0, Face::Left, 0.5);
    let cell = |_t0: f64, local: &WeightConfig| {
        let grid = SpaceTimeGrid::new(&spec, GridDims::new_1d(9, 9), local)?;
        let pair = same_pair(&grid);
        Ok((grid, pair, 1.0))
    };
    let single = sweep_t0(2.0, &cfg, 1, &UcOptions::default(), 1, cell).unwrap();
    assert_eq!(single.cells.len(), 1);
    assert_relative_eq!(single.cells[0].t0, 1.0);

    let many = sweep_t0(4.0, &cfg, 10, &UcOptions::default(), 2, cell).unwrap();
    assert!(many.all_pass);
    assert!(many.exhausts);
    let (lo, hi) = many.union.unwrap();
    assert!(
        lo < hi
            && many
                .cells
                .iter()
                .all(|c| c.window.0 >= lo && c.window.1 <= hi)
    );
    assert!(matches!(
        sweep_t0(0.9, &cfg, 3, &UcOptions::default(), 1, cell),
        Err(Error::Horizon { .. })
    ));
}

#[test]
fn zero_data_reconstructs_zero() {
    let (grid, cfg) = setup_1d(9, 9);
    let case = ManufacturedCase::get("1d-nonlinear", cfg.t0).unwrap();
    let sys = LinearizedSystem::from_case(&grid, &case);
    let zero = Field::zeros(&grid);
    let cauchy = extract_cauchy(&grid, &zero, Some(&zero));
    let r = qr_reconstruct(
        &grid,
        &cfg,
        &sys,
        &cauchy,
        &zero,
        &zero,
        &QrOptions::default(),
    )
    .unwrap();
    assert_eq!(r.pair.y.max_abs() + r.pair.z.max_abs(), 0.0);
    assert_eq!(r.functional, 0.0);
}

#[test]
fn reconstruction_recovers_the_solution() {
    let (grid, cfg) = setup_1d(17, 17);
    let case = ManufacturedCase::get("1d-nonlinear", cfg.t0).unwrap();
    let sys = LinearizedSystem::from_case(&grid, &case);
    let (df, dg) = sys.closed_sources(&grid, &case.u, &case.v);
    let (ys, zs) = (case.u.sample(&grid), case.v.sample(&grid));
    let cauchy = extract_cauchy(&grid, &ys, Some(&zs));
    let r = qr_reconstruct(&grid, &cfg, &sys, &cauchy, &df, &dg, &QrOptions::default()).unwrap();
    let err = norm_sq(
        &grid,
        &cfg,
        Region::Window,
        &[&r.pair.y.sub(&ys), &r.pair.z.sub(&zs)],
    )
    .unwrap();
    let size = norm_sq(&grid, &cfg, Region::Window, &[&ys, &zs]).unwrap();
    assert!((err / size).sqrt() < 0.01);
}

#[test]
fn noise_is_seeded() {
    let (grid, _) = setup_1d(9, 9);
    let f = Field::from_fn(&grid, |x, t| x[0] + t);
    let c = extract_cauchy(&grid, &f, Some(&f));
    let a = add_noise(&c, 0.1, 3);
    let b = add_noise(&c, 0.1, 3);
    let d = add_noise(&c, 0.1, 4);
    assert_eq!(a.components[0].gamma_value, b.components[0].gamma_value);
    assert_ne!(a.components[0].gamma_value, d.components[0].gamma_value);
    assert_eq!(
        add_noise(&c, 0.0, 3).components[0].gamma_value,
        c.components[0].gamma_value
    );
}
