//! Carleman-weighted least squares from Gamma-Cauchy data: refinement with
//! exact data, then a noise ladder.

use carleman_mfg::discretization::{extract_cauchy, norm_sq, GridDims, Region, SpaceTimeGrid};
use carleman_mfg::geometry::{DomainSpec, Face, WeightConfig, WeightParams};
use carleman_mfg::mfg::ManufacturedCase;
use carleman_mfg::uc::{add_noise, qr_reconstruct, LinearizedSystem, QrOptions};

fn main() -> carleman_mfg::Result<()> {
    let spec = DomainSpec::interval(1.0, Face::Left, 0.5);
    let cfg = WeightConfig::for_domain(&spec, &WeightParams::default())?;
    let case = ManufacturedCase::get("1d-nonlinear", cfg.t0)?;
    let run = |n: usize, eta: f64| -> carleman_mfg::Result<(f64, usize)> {
        let grid = SpaceTimeGrid::new(&spec, GridDims::new_1d(n, n), &cfg)?;
        let system = LinearizedSystem::from_case(&grid, &case);
        let (df, dg) = system.closed_sources(&grid, &case.u, &case.v);
        let (ys, zs) = (case.u.sample(&grid), case.v.sample(&grid));
        let mut data = extract_cauchy(&grid, &ys, Some(&zs));
        if eta > 0.0 {
            data = add_noise(&data, eta, 7);
        }
        let r = qr_reconstruct(&grid, &cfg, &system, &data, &df, &dg, &QrOptions::default())?;
        let err = norm_sq(
            &grid,
            &cfg,
            Region::Window,
            &[&r.pair.y.sub(&ys), &r.pair.z.sub(&zs)],
        )?;
        let size = norm_sq(&grid, &cfg, Region::Window, &[&ys, &zs])?;
        Ok(((err / size).sqrt(), r.iterations))
    };
    let mut last = None;
    for n in [9, 17, 33] {
        let (e, it) = run(n, 0.0)?;
        let factor = last.map_or(String::new(), |l: f64| format!("  reduction {:.2}", l / e));
        println!("n = nt = {n:>2}: window error {e:.4e} ({it} CG iterations){factor}");
        last = Some(e);
    }
    for eta in [1e-1, 1e-2, 1e-3] {
        let (e, _) = run(17, eta)?;
        println!("n = 17, noise {eta:.0e}: window error {e:.4e}");
    }
    Ok(())
}
