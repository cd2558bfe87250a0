// A small simulator run driven by the flat config format: design values
// supplied, two blocks, CSV and JSON written to a temporary directory.

use wz_core::sim::{cmd_run, SimConfig, DEFAULT_CONFIG};

pub fn run_example() -> wz_core::Result<String> {
    let mut cfg = SimConfig::parse(DEFAULT_CONFIG)?;
    cfg.n_samples = 1_000;
    cfg.blocks = 2;
    cfg.a_p_units = Some(3.6);
    cfg.sigma2_n_eps_variance = Some(0.185);
    cfg.d2_eps_variance = Some(0.0577);
    let dir = std::env::temp_dir().join(format!("wz_monte_carlo_{}", std::process::id()));
    cfg.output_dir = dir.display().to_string();

    let (summary, _) = cmd_run(&cfg)?;
    println!(
        "{} blocks at n={}: mse {:.4}, loss {:+.2} dB, decoder converged {:.0}%",
        summary.blocks,
        summary.n,
        summary.mse,
        summary.loss_db,
        100.0 * summary.decoder_convergence_rate
    );
    let csv = std::fs::read_to_string(dir.join("blocks.csv")).map_err(|e| wz_core::Error::Config(e.to_string()))?;
    print!("{csv}");
    let _ = std::fs::remove_dir_all(&dir);
    Ok(csv)
}

#[allow(dead_code)]
fn main() -> wz_core::Result<()> {
    run_example().map(|_| ())
}
