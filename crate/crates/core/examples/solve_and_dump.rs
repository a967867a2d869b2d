//! Solve one manufactured problem, dump the fields and read them back.

use carleman_mfg::discretization::io;
use carleman_mfg::discretization::{GridDims, SpaceTimeGrid};
use carleman_mfg::geometry::{DomainSpec, Face, WeightConfig, WeightParams};
use carleman_mfg::mfg::{make_manufactured, solve, SolverOptions};

fn main() -> carleman_mfg::Result<()> {
    let spec = DomainSpec::interval(1.0, Face::Left, 0.5);
    let cfg = WeightConfig::for_domain(&spec, &WeightParams::default())?;
    let grid = SpaceTimeGrid::new(&spec, GridDims::new_1d(33, 257), &cfg)?;
    let m = make_manufactured("1d-varying-a2", &grid)?;
    let (u, v) = solve(&m.problem, &SolverOptions::default())?;
    println!(
        "residuals u {:.3e} v {:.3e}, inner sweeps <= {}",
        u.residual, v.residual, u.max_inner_used
    );
    println!(
        "max error u {:.3e} v {:.3e}",
        u.field.sub(&m.u_exact).max_abs(),
        v.field.sub(&m.v_exact).max_abs()
    );

    let dir = std::env::temp_dir();
    let csv = dir.join("carleman_mfg_u.csv");
    io::write_csv(
        &grid,
        &u.field,
        &["case: 1d-varying-a2".into()],
        std::fs::File::create(&csv)?,
    )?;
    let back = io::read_csv(&grid, std::io::BufReader::new(std::fs::File::open(&csv)?))?;
    let bin = dir.join("carleman_mfg_v.bin");
    io::write_binary(&grid, &v.field, std::fs::File::create(&bin)?)?;
    let back_v = io::read_binary(&grid, std::fs::File::open(&bin)?)?;
    println!(
        "round trip: csv {} ({:.1e}), binary {} (exact {})",
        csv.display(),
        back.sub(&u.field).max_abs(),
        bin.display(),
        back_v.values() == v.field.values()
    );
    Ok(())
}
