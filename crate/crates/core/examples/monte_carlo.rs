//! Monte Carlo estimate of the occupation probability for the first case
//! study, with 20 exported trajectories (CSV and SVG).
//!
//! `cargo run --release --example monte_carlo -- [n_paths] [out_dir]`

use std::path::PathBuf;

use occucert::cases;
use occucert::simulate::{estimate, export_paths, SimConfig, DEFAULT_DT};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(20_000), |s| s.parse())?;
    let dir: PathBuf = args.next().unwrap_or_else(|| "out/monte_carlo".into()).into();

    let problem = cases::example1();
    let mut cfg = SimConfig::new(DEFAULT_DT, n, 1);
    cfg.record_paths = 20;
    let t = std::time::Instant::now();
    let est = estimate(&problem, &cfg)?;
    println!(
        "p_hat = {:.4}, 95% CI [{:.4}, {:.4}] from {} paths in {:.1?}",
        est.p_hat,
        est.ci_lower,
        est.ci_upper,
        est.n_paths,
        t.elapsed()
    );
    println!(
        "exits {}, numerical failures {}",
        est.n_safety_violations, est.n_failed_numerical
    );
    let paths = export_paths(&problem, &cfg, &dir, "paths")?;
    let ok = paths.iter().filter(|p| p.success).count();
    println!(
        "wrote {} ({} of {} recorded paths reach K)",
        dir.join("paths.svg").display(),
        ok,
        paths.len()
    );
    Ok(())
}
