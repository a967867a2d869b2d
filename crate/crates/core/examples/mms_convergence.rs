//! Manufactured-solution refinement ladders for a 1D and a 2D case.

use carleman_mfg::config::ExperimentConfig;
use carleman_mfg::runner::run_mms;

fn main() -> carleman_mfg::Result<()> {
    for (case, levels, geometry) in [
        ("1d-nonlinear", "[17, 33, 65, 129]", vec![]),
        (
            "2d-smooth",
            "[9, 17, 33]",
            vec![
                "geometry.dimension=2".to_string(),
                "geometry.extents=[1.0, 1.0]".into(),
                r#"geometry.gamma_faces=["left", "bottom", "top"]"#.into(),
                "grid.n2=33".into(),
            ],
        ),
    ] {
        let mut overrides = vec![
            format!("mfg.case_id={case}"),
            format!("mfg.mms_levels={levels}"),
        ];
        overrides.extend(geometry);
        let cfg = ExperimentConfig::from_toml_with("", None, &overrides)?;
        println!("{case}");
        println!(
            "{:>5} {:>10} {:>10} {:>11} {:>11} {:>7} {:>7}",
            "n", "h", "tau", "err u", "err v", "p_u", "p_v"
        );
        for r in run_mms(&cfg)? {
            let p = |o: Option<f64>| o.map_or("-".into(), |v| format!("{v:.2}"));
            println!(
                "{:>5} {:>10.5} {:>10.3e} {:>11.4e} {:>11.4e} {:>7} {:>7}",
                r.n,
                r.h,
                r.tau,
                r.error_u,
                r.error_v,
                p(r.order_u),
                p(r.order_v)
            );
        }
    }
    Ok(())
}
