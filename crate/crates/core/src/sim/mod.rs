//! Simulator front end: configuration, seeded Monte Carlo runs, benches and
//! report files.
//!
//! Block `b` of a run draws all of its randomness from stream `b` of a
//! ChaCha8 generator seeded with the run seed, so results do not depend on
//! the number of worker threads. CSV rows are written in block order.

mod config;

pub use config::{parse_degrees, SimConfig, DEFAULT_CONFIG};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::bp::{bp_decode, find_noise_threshold, wrapped_gaussian_llr, ChannelObservation, Threshold};
use crate::codec::{evaluate, Codes, RateDistortionReport};
use crate::design::{run_design_flow, DesignReport};
use crate::error::{Error, Result};
use crate::graph::{build_graph, save_graph, ConstellationMap, DegreeProfile, GraphKind};
use crate::lattice::{mod_reduce, wrap};
use crate::rbp::{apriori_llr, quantize_ldgm_stage, quantize_ldpc_stage, rbp_run, Apriori, RbpConfig};

/// Exit status for an error: 2 configuration, 3 infeasible design, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::Io { .. } => 2,
        Error::InfeasibleDesign { .. } => 3,
        _ => 1,
    }
}

/// Exit status of a finished run: 4 when more than a tenth of the blocks
/// hit the restart cap.
pub fn run_exit_code(report: &RateDistortionReport) -> i32 {
    if report.flagged_fraction > 0.1 {
        4
    } else {
        0
    }
}

fn out_path(cfg: &SimConfig, name: &str) -> Result<PathBuf> {
    let dir = Path::new(&cfg.output_dir);
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir.join(name))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    write_file(path, text + "\n")
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let csv_err = |e: csv::Error| Error::InvalidInput(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header).map_err(csv_err)?;
    }
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    write_file(path, bytes)
}

/// Runs `f` on a pool of `cfg.threads` workers.
pub fn with_pool<T: Send>(cfg: &SimConfig, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(cfg.thread_pool()?.install(f))
}

/// Full design flow. Writes `design.json`, `design.txt` and both graphs as alist.
pub fn cmd_design(cfg: &SimConfig) -> Result<DesignReport> {
    let codes = cfg.codes()?;
    let report = with_pool(cfg, || run_design_flow(&cfg.design_config()?, Some(&codes), cfg.seed))??;
    write_json(&out_path(cfg, "design.json")?, &report)?;
    write_file(&out_path(cfg, "design.txt")?, report.table())?;
    save_graph(&codes.ldpc, out_path(cfg, "ldpc.alist")?)?;
    save_graph(&codes.ldgm, out_path(cfg, "ldgm.alist")?)?;
    Ok(report)
}

/// Summary written next to the per-block CSV.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub design: DesignReport,
    pub n: usize,
    pub blocks: usize,
    pub payload_bits: usize,
    pub rate_bits_per_sample: f64,
    pub target_distortion: f64,
    pub mse: f64,
    pub loss_db: f64,
    pub decoder_convergence_rate: f64,
    pub ber: f64,
    pub flagged_fraction: f64,
    pub wall_clock_s: f64,
    pub config: SimConfig,
}

/// Monte Carlo run. The design values not given in the config are measured
/// first. Writes `blocks.csv` and `summary.json`.
pub fn cmd_run(cfg: &SimConfig) -> Result<(RunSummary, RateDistortionReport)> {
    let codes = cfg.codes()?;
    let dist = cfg.side_info_dist()?;
    let (design, report) = with_pool(cfg, || -> Result<_> {
        let design = run_design_flow(&cfg.design_config()?, Some(&codes), cfg.seed)?;
        let (params, codec) = cfg.codec(design.a_eps, design.a_p, design.sigma2_n_eps, design.d2_eps)?;
        let report = evaluate(cfg.blocks, &params, &codes, &dist, &codec, cfg.seed)?;
        Ok((design, report))
    })??;
    write_csv(&out_path(cfg, "blocks.csv")?, &[], &report.blocks)?;
    let summary = RunSummary {
        design,
        n: report.n,
        blocks: report.blocks.len(),
        payload_bits: report.payload_bits,
        rate_bits_per_sample: report.rate_bits_per_sample,
        target_distortion: report.target_distortion,
        mse: report.mse,
        loss_db: report.loss_db,
        decoder_convergence_rate: report.decoder_convergence_rate,
        ber: report.ber,
        flagged_fraction: report.flagged_fraction,
        wall_clock_s: report.wall_clock_s,
        config: cfg.clone(),
    };
    write_json(&out_path(cfg, "summary.json")?, &summary)?;
    Ok((summary, report))
}

/// Components timed by [`cmd_bench`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchComponent {
    /// `mod_reduce` over `n` samples.
    Mod,
    /// Wrapped-Gaussian channel L-values for `n` samples.
    Llr,
    /// Fixed-length BP decoding on the LDPC of length `n`.
    Bp,
    /// Fixed-length reinforced BP on the LDPC of length `n`.
    Rbp,
}

impl std::str::FromStr for BenchComponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mod" => Ok(Self::Mod),
            "llr" => Ok(Self::Llr),
            "bp" => Ok(Self::Bp),
            "rbp" => Ok(Self::Rbp),
            _ => Err(Error::Config(format!("unknown bench component {s:?} (mod, llr, bp, rbp)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRow {
    pub component: BenchComponent,
    pub n: usize,
    pub repetitions: usize,
    /// Iterations per call, 1 for the non-iterative components.
    pub iterations: usize,
    pub mean_seconds: f64,
    pub seconds_per_iteration: f64,
}

/// Iterations per call for the iterative bench components.
pub const BENCH_ITERATIONS: usize = 20;

/// Mean wall-clock of one component at one size.
pub fn bench_one(component: BenchComponent, n: usize, reps: usize, seed: u64) -> Result<BenchRow> {
    let reps = reps.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = 3.0;
    let map = ConstellationMap::pam2(a)?;
    let samples: Vec<f64> = (0..n).map(|_| 10.0 * (rng.random::<f64>() - 0.5)).collect();
    let noisy: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            wrap(map.level_of(0) + 0.55 * z, a)
        })
        .collect();
    let graph = match component {
        BenchComponent::Bp | BenchComponent::Rbp => Some(build_graph(n, &DegreeProfile::default_ldpc(), GraphKind::ParityCheck, seed)?),
        _ => None,
    };
    let obs = ChannelObservation {
        w: noisy,
        modulo: a,
        noise_var: 0.3,
    };
    let llr = wrapped_gaussian_llr(&obs, &map, 3)?;
    let rbp_cfg = RbpConfig {
        max_iters: BENCH_ITERATIONS,
        max_restarts: 0,
        ..RbpConfig::default()
    };
    let targets: Vec<f64> = samples.iter().map(|&x| wrap(x, a)).collect();
    let apriori = Apriori::Bits(apriori_llr(&targets, &map, &rbp_cfg)?);

    let mut total = 0.0;
    let mut iterations = 1;
    for _ in 0..reps {
        let t0 = Instant::now();
        match component {
            BenchComponent::Mod => {
                std::hint::black_box(mod_reduce(&samples, a)?);
            }
            BenchComponent::Llr => {
                std::hint::black_box(wrapped_gaussian_llr(&obs, &map, 3)?);
            }
            BenchComponent::Bp => {
                let out = bp_decode(graph.as_ref().unwrap(), &llr, BENCH_ITERATIONS)?;
                iterations = out.iterations.max(1);
            }
            BenchComponent::Rbp => {
                let out = rbp_run(graph.as_ref().unwrap(), &apriori, &rbp_cfg, seed)?;
                iterations = out.iterations.max(1);
            }
        }
        total += t0.elapsed().as_secs_f64();
    }
    let mean = total / reps as f64;
    Ok(BenchRow {
        component,
        n,
        repetitions: reps,
        iterations,
        mean_seconds: mean,
        seconds_per_iteration: mean / iterations as f64,
    })
}

const BENCH_HEADER: [&str; 6] = ["component", "n", "repetitions", "iterations", "mean_seconds", "seconds_per_iteration"];

/// Timing sweep over `sizes` for every component. Writes `bench.csv`.
pub fn cmd_bench(cfg: &SimConfig, components: &[BenchComponent], sizes: &[usize]) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &c in components {
        for &n in sizes {
            rows.push(bench_one(c, n, cfg.bench_repetitions, cfg.seed)?);
        }
    }
    write_csv(&out_path(cfg, "bench.csv")?, &BENCH_HEADER, &rows)?;
    Ok(rows)
}

/// One quantized block of the shaping-loss sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantizeRow {
    pub block: usize,
    pub stage: u8,
    pub n: usize,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    pub distortion: f64,
    /// Ideal distortion of the stage: `αD + α²P_V` for the first, `αD` for the second.
    pub budget: f64,
    pub loss_db: f64,
}

/// Quantizes `cfg.blocks` uniform targets at `A_ε` with both stages and
/// compares each stage with its ideal distortion. Writes `quantize.csv`.
pub fn cmd_quantize_bench(cfg: &SimConfig) -> Result<Vec<QuantizeRow>> {
    let codes = cfg.codes()?;
    let design = cfg.design_config()?;
    let front = crate::design::design_front(&design)?;
    let a = front.a_eps;
    let (al, d, p_v) = (front.alpha, front.d, cfg.p_v_variance);
    let stage1 = cfg.rbp(Some(cfg.stage1_prior_variance.or(cfg.sigma2_n_eps_variance).unwrap_or(RbpConfig::default().prior_var)));
    let stage2 = cfg.rbp(Some(cfg.stage2_prior_variance.unwrap_or(al * d)));
    let rows = with_pool(cfg, || quantize_rows(&codes, a, al, d, p_v, &stage1, &stage2, cfg.blocks, cfg.seed))??;
    write_csv(&out_path(cfg, "quantize.csv")?, &[], &rows)?;
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn quantize_rows(
    codes: &Codes,
    a: f64,
    alpha: f64,
    d: f64,
    p_v: f64,
    stage1: &RbpConfig,
    stage2: &RbpConfig,
    blocks: usize,
    seed: u64,
) -> Result<Vec<QuantizeRow>> {
    use rayon::prelude::*;
    let n = codes.n();
    let map1 = ConstellationMap::pam2(a)?;
    let map2 = ConstellationMap::pam4_gray(alpha * alpha * p_v, a)?;
    let budget1 = alpha * d + alpha * alpha * p_v;
    let budget2 = alpha * d;
    let keep = |r: Result<crate::rbp::QuantizeResult>| match r {
        Err(Error::Divergence { best, .. }) => Ok(*best),
        other => other,
    };
    let per_block = (0..blocks)
        .into_par_iter()
        .map(|b| -> Result<[QuantizeRow; 2]> {
            let mut rng = crate::codec::block_rng(seed, b as u64);
            let u: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() - 0.5) * a).collect();
            let s1 = keep(quantize_ldpc_stage(&codes.ldpc, &map1, &u, stage1, b as u64))?;
            let s2 = keep(quantize_ldgm_stage(&codes.ldgm, &map2, &s1.error, stage2, b as u64))?;
            let row = |stage, r: &crate::rbp::QuantizeResult, budget: f64| QuantizeRow {
                block: b,
                stage,
                n,
                iterations: r.iterations,
                restarts: r.restarts,
                converged: r.converged,
                distortion: r.distortion,
                budget,
                loss_db: 10.0 * (r.distortion / budget).log10(),
            };
            Ok([row(1, &s1, budget1), row(2, &s2, budget2)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_block.into_iter().flatten().collect())
}

/// BP threshold sweep of the LDPC at `A_ε`. Writes `threshold.csv`.
pub fn cmd_channel_bench(cfg: &SimConfig) -> Result<Threshold> {
    let codes = cfg.codes()?;
    let front = crate::design::design_front(&cfg.design_config()?)?;
    let map = ConstellationMap::pam2(front.a_eps)?;
    let mut rng = crate::codec::block_rng(cfg.seed, u64::MAX);
    let t = find_noise_threshold(&codes.ldpc, &map, &cfg.threshold(), &mut rng)?;
    write_csv(
        &out_path(cfg, "threshold.csv")?,
        &["noise_var", "ber", "blocks", "errors"],
        &t.probes,
    )?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(dir: &Path, threads: usize) -> SimConfig {
        SimConfig {
            n_samples: 1000,
            blocks: 3,
            threads,
            output_dir: dir.display().to_string(),
            a_eps_units: Some(3.0),
            a_p_units: Some(3.6),
            sigma2_n_eps_variance: Some(0.178),
            d2_eps_variance: Some(0.061),
            ..SimConfig::default()
        }
    }

    #[test]
    fn shipped_config_round_trips() {
        let cfg = SimConfig::parse(DEFAULT_CONFIG).unwrap();
        assert_eq!(cfg.a_eps_units, Some(3.0));
        assert_eq!(SimConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn config_errors_map_to_exit_codes() {
        let e = SimConfig::parse("p_v_variance = 0.28\nwidth_px = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config(_)) && e.to_string().contains("width_px"));
        assert_eq!(exit_code(&e), 2);

        let e = SimConfig::parse("p_v_variance = -1.0\n").unwrap_err();
        assert!(e.to_string().contains("p_v_variance"));

        let e = SimConfig::parse("ldpc_alist_path = \"/nonexistent/graph.alist\"\n").unwrap_err();
        assert!(e.to_string().contains("/nonexistent/graph.alist"), "{e}");
        assert_eq!(exit_code(&e), 2);

        let e = SimConfig::parse("ldpc_var_degrees = \"2:0.5, 3:0.2\"\n").unwrap_err();
        assert_eq!(exit_code(&e), 2);
        assert!("fft".parse::<BenchComponent>().is_err());
    }

    #[test]
    fn infeasible_override_exits_3() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SimConfig {
            sigma2_n_eps_variance: Some(0.05),
            a_p_units: None,
            ..quick(dir.path(), 1)
        };
        let e = cmd_run(&cfg).unwrap_err();
        assert!(matches!(e, Error::InfeasibleDesign { .. }));
        assert_eq!(exit_code(&e), 3);
    }

    #[test]
    fn flagged_fraction_sets_exit_4() {
        let dir = tempfile::tempdir().unwrap();
        let (_, mut report) = cmd_run(&quick(dir.path(), 1)).unwrap();
        report.flagged_fraction = 0.1;
        assert_eq!(run_exit_code(&report), 0);
        report.flagged_fraction = 0.2;
        assert_eq!(run_exit_code(&report), 4);
    }

    #[test]
    fn csv_does_not_depend_on_threads() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        cmd_run(&quick(a.path(), 1)).unwrap();
        cmd_run(&quick(b.path(), 2)).unwrap();
        let one = std::fs::read(a.path().join("blocks.csv")).unwrap();
        let two = std::fs::read(b.path().join("blocks.csv")).unwrap();
        assert_eq!(one, two);
        assert_eq!(String::from_utf8_lossy(&one).lines().count(), 4);
        let summary: serde_json::Value =
            serde_json::from_slice(&std::fs::read(a.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["payload_bits"], 953);
    }

    #[test]
    fn empty_bench_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = quick(dir.path(), 1);
        assert!(cmd_bench(&cfg, &[BenchComponent::Mod], &[]).unwrap().is_empty());
        let text = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
        assert_eq!(text, "component,n,repetitions,iterations,mean_seconds,seconds_per_iteration\n");
    }

    #[test]
    fn bench_rows() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SimConfig { bench_repetitions: 1, ..quick(dir.path(), 1) };
        let rows = cmd_bench(&cfg, &[BenchComponent::Mod, BenchComponent::Llr], &[100, 1000]).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.mean_seconds >= 0.0));
    }
}
