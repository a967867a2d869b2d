//! Slide the observation window across (0, T) and check that the verified
//! windows cover ((1 - r) delta, T - (1 - r) delta).

use carleman_mfg::config::ExperimentConfig;
use carleman_mfg::runner::run_sweep_t0;

fn main() -> carleman_mfg::Result<()> {
    let cfg = ExperimentConfig::from_toml_with(
        "",
        None,
        &["uc.horizon=3.0".into(), "uc.n_t0=10".into()],
    )?;
    let rep = run_sweep_t0(&cfg)?;
    for c in &rep.cells {
        println!(
            "t0 {:.3}  window ({:.3}, {:.3})  norm {:.3e}  pass {}",
            c.t0, c.window.0, c.window.1, c.verdict.window_norm, c.verdict.pass
        );
    }
    println!(
        "union {:?}, target {:?}, granularity {:.3}",
        rep.union, rep.target, rep.granularity
    );
    println!("exhausts {}, all pass {}", rep.exhausts, rep.all_pass);
    Ok(())
}
