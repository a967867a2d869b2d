//! Derive the weight constants for the default interval and a rectangle,
//! then sample the constraint algebra.

use carleman_mfg::geometry::{
    build_d, compute_mu, eval_phi, select_beta, select_r, BetaRule, DomainSpec, Face, WeightConfig,
    WeightParams,
};
use carleman_mfg::carleman::max_admissible_s;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn show(name: &str, spec: &DomainSpec) -> carleman_mfg::Result<()> {
    let cfg = WeightConfig::for_domain(spec, &WeightParams::default())?;
    println!("{name}");
    println!(
        "  d = {:?} . x + {}",
        &cfg.d.gradient[..spec.dimension],
        cfg.d.offset
    );
    println!(
        "  d0 {}  d1 {}  r {:.5}  beta {:.5}  lambda {}",
        cfg.d0, cfg.d1, cfg.r, cfg.beta, cfg.lambda
    );
    println!(
        "  mu1 {:.5}  mu2 {:.5}  valid {}",
        cfg.mu1,
        cfg.mu2,
        cfg.is_valid()
    );
    for t in [cfg.t0 - cfg.delta, cfg.t0, cfg.t0 + cfg.delta] {
        let row: Vec<String> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&x| format!("{:8.4}", eval_phi([x, 0.5], t, &cfg).phi))
            .collect();
        println!("  phi(x, {t:.2}) at x1 = 0..1: {}", row.join(" "));
    }
    Ok(())
}

fn main() -> carleman_mfg::Result<()> {
    show(
        "interval, Gamma = {x = 0}",
        &DomainSpec::interval(1.0, Face::Left, 0.5),
    )?;
    show(
        "unit square, Gamma = left + bottom + top",
        &DomainSpec::rectangle(1.0, 1.0, &[Face::Left, Face::Bottom, Face::Top], 0.5),
    )?;

    let interval = DomainSpec::interval(1.0, Face::Left, 0.5);
    println!("lambda sensitivity on the interval:");
    println!("  {:>6} {:>10} {:>10} {:>12} {:>10}", "lambda", "mu1", "mu2", "mu2 - mu1", "s guard");
    for lambda in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let cfg = WeightConfig::for_domain(&interval, &WeightParams { lambda, ..WeightParams::default() })?;
        println!(
            "  {lambda:>6} {:>10.5} {:>10.5} {:>12.5} {:>10.3}",
            cfg.mu1,
            cfg.mu2,
            cfg.mu2 - cfg.mu1,
            max_admissible_s(&cfg)
        );
    }

    // With d0 taken over the whole closure, d vanishes on the far face and
    // mu2 = exp(-lambda beta r^2 delta^2) < 1 for every admissible r.
    let d = build_d(&interval)?;
    let (d0, d1, delta) = (0.0, 1.0, 0.5);
    let r = select_r(0.5, d1, 0.5)?;
    let beta = select_beta(0.5, d1, delta, r, BetaRule::GeometricMean)?.beta;
    let full = WeightConfig::from_constants(d.clone(), 1.0, beta, 1.0, delta, r, d0, d1);
    match full {
        Ok(cfg) => println!("d0 over the closure: mu2 = {:.5}, valid {}", cfg.mu2, cfg.is_valid()),
        Err(e) => println!("d0 over the closure is rejected: {e}"),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst1, mut worst2) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..10_000 {
        let d1: f64 = rng.random_range(0.01..3.0);
        let d0 = rng.random_range(0.001..=1.0) * d1;
        let delta: f64 = rng.random_range(0.01..2.0);
        let r = select_r(d0, d1, rng.random_range(0.01..0.99))?;
        let beta = select_beta(d0, d1, delta, r, BetaRule::GeometricMean)?.beta;
        let cfg =
            WeightConfig::from_constants(d.clone(), 1.0, beta, delta + 1.0, delta, r, d0, d1)?;
        let (mu1, mu2) = compute_mu(&cfg)?;
        worst1 = worst1.min(mu2 - 1.0);
        worst2 = worst2.min(mu2 - mu1);
    }
    println!(
        "10^4 sampled (d0, d1, delta): min mu2 - 1 = {worst1:.3e}, min mu2 - mu1 = {worst2:.3e}"
    );
    Ok(())
}
