//! Two solved problems share their Cauchy data on Gamma and differ near
//! the opposite face. The window norm of the difference is checked against
//! the decay bound on three grids.

use carleman_mfg::config::ExperimentConfig;
use carleman_mfg::runner::run_uc_check;

fn main() -> carleman_mfg::Result<()> {
    println!(
        "{:>4} {:>6} {:>12} {:>12} {:>10} {:>10} {:>10} {:>6}",
        "n", "nt", "window", "bound", "slack", "M1", "M2", "pass"
    );
    for n in [17usize, 33, 65] {
        let nt = (n - 1) * (n - 1) + 1;
        let cfg = ExperimentConfig::from_toml_with(
            "",
            None,
            &[format!("grid.n1={n}"), format!("grid.nt={nt}")],
        )?;
        let run = run_uc_check(&cfg)?;
        let v = &run.verdict;
        println!(
            "{n:>4} {nt:>6} {:>12.4e} {:>12.4e} {:>10.3e} {:>10.4} {:>10.4} {:>6}",
            v.window_norm, v.bound_min, v.slack, v.mismatch.m1, v.mismatch.m2, v.pass
        );
    }
    Ok(())
}
