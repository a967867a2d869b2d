//! Ratio LHS / RHS of the single-equation and coupled estimates over s.

use carleman_mfg::carleman::{
    linear_s_grid, max_admissible_s, sweep_s, BoundaryFunctionalParams, CarlemanReport, Estimate,
};
use carleman_mfg::carleman::{Lemma1Prepared, Theorem2Prepared};
use carleman_mfg::discretization::{Field, GridDims, SpaceTimeGrid};
use carleman_mfg::geometry::{DomainSpec, Face, WeightConfig, WeightParams};
use carleman_mfg::mfg::{ManufacturedCase, NoLowerOrder, SolverOptions};
use carleman_mfg::runner::bump_field;
use carleman_mfg::uc::{manufactured_pair, ramp_perturbation, PairSource};

fn print(rep: &CarlemanReport) {
    println!(
        "{}: C_emp {:.4e}, bounded {}",
        rep.estimate, rep.c_emp, rep.bounded
    );
    for r in rep.rows.iter().step_by(5) {
        println!(
            "  s {:8.3}  ratio {:.4e}  log lhs {:9.3}  log rhs {:9.3}",
            r.s,
            r.ratio,
            r.lhs.ln(),
            r.rhs().ln()
        );
    }
}

fn main() -> carleman_mfg::Result<()> {
    let spec = DomainSpec::interval(1.0, Face::Left, 0.5);
    let cfg = WeightConfig::for_domain(&spec, &WeightParams::default())?;
    let grid = SpaceTimeGrid::new(&spec, GridDims::new_1d(65, 65), &cfg)?;
    let s_grid = linear_s_grid(1.0, max_admissible_s(&cfg), 40);
    let params = BoundaryFunctionalParams::default();
    let a = Field::constant(&grid, 1.0);

    let f = bump_field(&grid);
    let k2 = Lemma1Prepared::new(2, &grid, &f, &a, &NoLowerOrder)?;
    let k1 = Lemma1Prepared::new(1, &grid, &f.time_reversed(&grid), &a, &NoLowerOrder)?;
    let r2 = sweep_s(Estimate::Lemma1(&k2), &grid, &s_grid, &cfg, &params)?;
    let r1 = sweep_s(Estimate::Lemma1(&k1), &grid, &s_grid, &cfg, &params)?;
    print(&r2);
    let gap = r1
        .rows
        .iter()
        .zip(&r2.rows)
        .map(|(a, b)| (a.ratio - b.ratio).abs() / b.ratio)
        .fold(0.0, f64::max);
    println!("k = 1 on the time-reversed field: largest relative gap {gap:.2e}");

    let case = ManufacturedCase::get("1d-nonlinear", cfg.t0)?;
    let (du, dv) = ramp_perturbation(1, 100.0);
    let pair = manufactured_pair(
        &grid,
        &case,
        &du,
        &dv,
        PairSource::Sampled,
        &SolverOptions::default(),
        0.05,
    )?;
    let prep = Theorem2Prepared::new(&grid, &pair, 0.05)?;
    print(&sweep_s(
        Estimate::Theorem2(&prep),
        &grid,
        &s_grid,
        &cfg,
        &params,
    )?);
    Ok(())
}
