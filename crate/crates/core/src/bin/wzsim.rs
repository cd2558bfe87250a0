use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use wz_core::sim::{self, BenchComponent, SimConfig};

#[derive(Parser)]
#[command(name = "wzsim", about = "Residual Wyner-Ziv codec simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// TOML config; the shipped default is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the parameter design flow.
    Design,
    /// Monte Carlo rate-distortion run.
    Run,
    /// Time components over a size sweep.
    Bench {
        /// Comma-separated subset of mod, llr, bp, rbp.
        #[arg(long, default_value = "mod,llr,bp,rbp")]
        component: String,
        /// Comma-separated block lengths; defaults to the config sweep.
        #[arg(long)]
        sizes: Option<String>,
    },
    /// Quantizer distortion against the per-stage ideal.
    QuantizeBench,
    /// BP threshold sweep.
    ChannelBench,
}

fn load(cli: &Cli) -> wz_core::Result<SimConfig> {
    let mut cfg = match &cli.config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::parse(sim::DEFAULT_CONFIG)?,
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn list<T: std::str::FromStr<Err = wz_core::Error>>(s: &str) -> wz_core::Result<Vec<T>> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(str::parse).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| match &cli.cmd {
        Cmd::Design => sim::cmd_design(&cfg).map(|r| {
            print!("{}", r.table());
            0
        }),
        Cmd::Run => sim::cmd_run(&cfg).map(|(s, r)| {
            println!(
                "blocks {}  mse {:.5}  D {:.5}  loss {:.3} dB  decoder converged {:.1}%  flagged {:.1}%",
                s.blocks,
                s.mse,
                s.target_distortion,
                s.loss_db,
                100.0 * s.decoder_convergence_rate,
                100.0 * s.flagged_fraction
            );
            sim::run_exit_code(&r)
        }),
        Cmd::Bench { component, sizes } => {
            let comps: Vec<BenchComponent> = list(component)?;
            let sizes = match sizes {
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse().map_err(|_| wz_core::Error::Config(format!("bad size {x:?}"))))
                    .collect::<wz_core::Result<Vec<usize>>>()?,
                None => cfg.bench_sizes_samples.clone(),
            };
            sim::cmd_bench(&cfg, &comps, &sizes).map(|rows| {
                for r in rows {
                    println!("{:?} n={} {:.3e} s", r.component, r.n, r.mean_seconds);
                }
                0
            })
        }
        Cmd::QuantizeBench => sim::cmd_quantize_bench(&cfg).map(|rows| {
            for stage in [1, 2] {
                let s: Vec<_> = rows.iter().filter(|r| r.stage == stage).collect();
                let d = s.iter().map(|r| r.distortion).sum::<f64>() / s.len().max(1) as f64;
                println!("stage {stage}: mean distortion {d:.5} over {} blocks", s.len());
            }
            0
        }),
        Cmd::ChannelBench => sim::cmd_channel_bench(&cfg).map(|t| {
            println!("threshold {:.4}{}", t.noise_var, if t.unbounded { " (unbounded)" } else { "" });
            0
        }),
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(sim::exit_code(&e) as u8)
        }
    }
}
