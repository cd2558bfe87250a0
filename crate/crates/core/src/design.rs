//! Parameter selection for the residual codec.
//!
//! 1. `D` from the rate, `α = 1 - D/P_V`.
//! 2. `A_ε`: smallest modulo size whose entropy gap `h(G) - h(G mod A)` is
//!    below `ε`, with `G ~ N(0, α²P_V + αD)`.
//! 3. `σ²_{n,ε}`: BP noise threshold of the LDPC at `A_ε`; `R1` follows from `A_ε`.
//! 4. `D_{2,ε}`: measured distortion of the two-stage quantizer at `A_ε`.
//! 5. `A_p`: from the lower bound `A_ε·sqrt(α²P_V / (σ²_{n,ε} - D_{2,ε}))`
//!    upward in steps of 0.01 until probe blocks decode.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};
use std::fmt::Write as _;

use crate::bp::{bp_decode, find_noise_threshold, wrapped_gaussian_llr, ChannelObservation, Probe, ThresholdConfig};
use crate::codec::{block_rng, Codes};
use crate::error::{Error, Result};
use crate::graph::ConstellationMap;
use crate::lattice::{sample_dither, wrap};
use crate::rbp::{quantize_ldgm_stage, quantize_ldpc_stage, QuantizeResult, RbpConfig};
use crate::source::{sample_source, SideInfoDist};

/// `D = P_V · 2^(-2 R2)`.
pub fn target_distortion(p_v: f64, r2: f64) -> f64 {
    p_v * (-2.0 * r2).exp2()
}

/// `α = 1 - D / P_V`.
pub fn alpha(p_v: f64, d: f64) -> f64 {
    1.0 - d / p_v
}

const GAP_GRID: usize = 1 << 14;
const GAP_WRAPS: i64 = 10;

/// Entropy lost to folding a Gaussian of variance `noise_var` modulo `a`,
/// in bits. The folded density is integrated with the trapezoidal rule.
pub fn entropy_gap_epsilon1(a: f64, noise_var: f64) -> Result<f64> {
    if !(noise_var > 0.0) || !(a > 0.0) {
        return Err(Error::InvalidInput(format!(
            "entropy gap needs positive A and variance, got A={a} var={noise_var}"
        )));
    }
    let h_g = 0.5 * (2.0 * PI * E * noise_var).log2();
    let sd = noise_var.sqrt();
    // Ten images either side, more when A is small next to the spread.
    let wraps = GAP_WRAPS.max((10.0 * sd / a).ceil() as i64 + 1);
    let norm = 1.0 / (2.0 * PI * noise_var).sqrt();
    let inv2 = 0.5 / noise_var;
    let h = a / (GAP_GRID - 1) as f64;
    let mut acc = 0.0;
    for i in 0..GAP_GRID {
        let t = -a / 2.0 + i as f64 * h;
        let f: f64 = (-wraps..=wraps).map(|b| norm * (-(t + a * b as f64).powi(2) * inv2).exp()).sum();
        let term = if f > 0.0 { -f * f.log2() } else { 0.0 };
        acc += if i == 0 || i == GAP_GRID - 1 { 0.5 * term } else { term };
    }
    Ok(h_g - acc * h)
}

/// Grid step of the modulo-size search.
pub const A_STEP: f64 = 0.01;

/// Smallest `A` on the 0.01 grid with `entropy_gap_epsilon1(A) < epsilon`.
/// The gap falls monotonically in `A`, so the grid is bisected.
pub fn find_a_eps(epsilon: f64, noise_var: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("ε must be positive, got {epsilon}")));
    }
    let at = |k: u64| k as f64 * A_STEP;
    let ok = |k: u64| entropy_gap_epsilon1(at(k), noise_var).map(|g| g < epsilon);
    if ok(1)? {
        return Ok(at(1));
    }
    let mut hi = ((20.0 * noise_var.sqrt() / A_STEP).ceil() as u64).max(2);
    while !ok(hi)? {
        if hi > 1 << 40 {
            return Err(Error::InvalidInput(format!("no modulo size reaches gap {epsilon}")));
        }
        hi *= 2;
    }
    let mut lo = 1;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(at(hi))
}

/// `R1 = log2 A_ε - ½ log2(2πe α P_V)`, floored at zero.
pub fn rate_r1(a_eps: f64, alpha: f64, p_v: f64) -> f64 {
    (a_eps.log2() - 0.5 * (2.0 * PI * E * alpha * p_v).log2()).max(0.0)
}

/// Smallest practical modulo size that restores decodability:
/// `A_ε · sqrt(α²P_V / (σ²_{n,ε} - D_{2,ε}))`.
pub fn practical_modulo_bound(a_eps: f64, alpha: f64, p_v: f64, sigma2_n_eps: f64, d2_eps: f64) -> Result<f64> {
    if !(sigma2_n_eps > d2_eps) {
        return Err(Error::InfeasibleDesign { sigma2_n_eps, d2_eps });
    }
    Ok((a_eps * a_eps * alpha * alpha * p_v / (sigma2_n_eps - d2_eps)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrDiagnostics {
    pub snr_eps: f64,
    pub snr_p: f64,
    pub d2_p: f64,
    pub sigma2_n_p: f64,
}

/// Channel SNRs before and after enlarging the modulo size, with the
/// stage-2 distortion and decoder threshold stretched by `(A_p/A_ε)²`.
pub fn snr_diagnostics(a_eps: f64, a_p: f64, k: f64, alpha: f64, p_v: f64, d2_eps: f64, sigma2_n_eps: f64) -> Result<SnrDiagnostics> {
    if !(a_eps > 0.0 && a_p >= a_eps) {
        return Err(Error::InvalidInput(format!("need A_p >= A_eps > 0, got {a_p} and {a_eps}")));
    }
    let s2 = (a_p / a_eps).powi(2);
    let d2_p = s2 * d2_eps;
    let ap2 = alpha * alpha * p_v;
    Ok(SnrDiagnostics {
        snr_eps: (a_eps * a_eps / k) / (d2_eps + ap2),
        snr_p: (a_p * a_p / k) / (d2_p + ap2),
        d2_p,
        sigma2_n_p: s2 * sigma2_n_eps,
    })
}

/// Inputs of the design flow. `None` fields are computed or measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub p_v: f64,
    pub r2: f64,
    pub epsilon: f64,
    pub a_eps: Option<f64>,
    pub sigma2_n_eps: Option<f64>,
    pub d2_eps: Option<f64>,
    pub a_p: Option<f64>,
    pub threshold: ThresholdConfig,
    pub stage1: RbpConfig,
    pub stage2: RbpConfig,
    /// A-priori variance of the first stage; `None` uses `σ²_{n,ε}`.
    pub stage1_prior: Option<f64>,
    /// A-priori variance of the second stage; `None` uses `αD`.
    pub stage2_prior: Option<f64>,
    pub decoder_iters: usize,
    /// Blocks quantized for `D_{2,ε}` and reused by every step-5 probe.
    pub probe_blocks: usize,
    pub side_info: SideInfoDist,
}

impl DesignConfig {
    /// Desk-scale defaults around the given source and rate.
    pub fn new(p_v: f64, r2: f64, epsilon: f64) -> Self {
        DesignConfig {
            p_v,
            r2,
            epsilon,
            a_eps: None,
            sigma2_n_eps: None,
            d2_eps: None,
            a_p: None,
            threshold: ThresholdConfig::default(),
            stage1: RbpConfig::default(),
            stage2: RbpConfig::default(),
            stage1_prior: None,
            stage2_prior: None,
            decoder_iters: 200,
            probe_blocks: 20,
            side_info: SideInfoDist::Uniform { lo: -1.5, hi: 1.5 },
        }
    }
}

/// Decoding a pooled probe set at one practical modulo size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModuloProbe {
    pub a_p: f64,
    pub ber: f64,
    pub bit_errors: usize,
    pub converged_blocks: usize,
    pub blocks: usize,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub p_v: f64,
    pub r2: f64,
    pub d: f64,
    pub alpha: f64,
    pub epsilon: f64,
    /// Result of the entropy-gap search, whether or not it was used.
    pub a_eps_search: f64,
    pub a_eps: f64,
    pub epsilon1: f64,
    pub r1: f64,
    /// Rate of the LDPC actually in use, when codes were given.
    pub r1_code: Option<f64>,
    pub sigma2_n_eps: f64,
    pub sigma2_measured: bool,
    pub d2_eps: f64,
    pub d2_measured: bool,
    pub a_p_bound: f64,
    pub a_p: f64,
    pub k: f64,
    pub d2_p: f64,
    pub sigma2_n_p: f64,
    pub snr_eps: f64,
    pub snr_p: f64,
    /// Decoding at `A_ε` with no correction.
    pub uncorrected: Option<ModuloProbe>,
    pub modulo_probes: Vec<ModuloProbe>,
    pub threshold_probes: Vec<Probe>,
    pub final_mse: Option<f64>,
    pub final_loss_db: Option<f64>,
}

impl DesignReport {
    /// Channel decoding is beyond capacity at `A_ε`.
    pub fn beyond_capacity(&self) -> bool {
        self.sigma2_n_eps < self.d2_eps + self.alpha * self.alpha * self.p_v
    }

    /// Human-readable summary, one section per step.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
        let tag = |m: bool| if m { "measured" } else { "supplied" };
        let _ = writeln!(s, "step  quantity               value");
        let _ = writeln!(s, "1     D                      {:.4}", self.d);
        let _ = writeln!(s, "      alpha                  {:.4}", self.alpha);
        let _ = writeln!(s, "2     A_eps (search)         {:.2}", self.a_eps_search);
        let _ = writeln!(s, "      A_eps (used)           {:.2}", self.a_eps);
        let _ = writeln!(s, "      epsilon1 (bits)        {:.5}", self.epsilon1);
        let _ = writeln!(s, "      R1 (bits/symbol)       {:.3}", self.r1);
        let _ = writeln!(s, "      R1 of code             {}", opt(self.r1_code));
        let _ = writeln!(s, "3     sigma2_n_eps           {:.4} ({})", self.sigma2_n_eps, tag(self.sigma2_measured));
        let _ = writeln!(s, "4     D2_eps                 {:.4} ({})", self.d2_eps, tag(self.d2_measured));
        let _ = writeln!(s, "      SNR_eps (dB)           {:.3}", 10.0 * self.snr_eps.log10());
        let _ = writeln!(s, "5     A_p bound              {:.3}", self.a_p_bound);
        let _ = writeln!(s, "      A_p                    {:.2}", self.a_p);
        let _ = writeln!(s, "      D2_p                   {:.4}", self.d2_p);
        let _ = writeln!(s, "      sigma2_n_p             {:.4}", self.sigma2_n_p);
        let _ = writeln!(s, "      SNR_p (dB)             {:.3}", 10.0 * self.snr_p.log10());
        let _ = writeln!(s, "      probe MSE              {}", opt(self.final_mse));
        let _ = writeln!(s, "      probe loss (dB)        {}", opt(self.final_loss_db));
        s
    }
}

/// Quantized probe blocks at `A_ε`: what the decoder needs to replay the
/// equivalent channel at any larger modulo size.
///
/// The dither makes the quantizer input uniform and independent of the
/// source, and the encoder at `A_p` is the encoder at `A_ε` stretched by
/// `s = A_p/A_ε`. So in units of `A_ε` the decoder at `A_p` sees
/// `(c1 + αv/s - e2) mod A_ε` with `c1`, `e2` from these blocks.
#[derive(Debug, Clone)]
pub struct ProbeSet {
    pub a_eps: f64,
    pub alpha: f64,
    pub p_v: f64,
    pub blocks: Vec<ProbeBlock>,
}

#[derive(Debug, Clone)]
pub struct ProbeBlock {
    pub v: Vec<f64>,
    pub stage1: QuantizeResult,
    pub stage2: QuantizeResult,
}

impl ProbeSet {
    /// Encodes `blocks` source blocks at `A_ε`. Diverged quantizers keep
    /// their best effort.
    #[allow(clippy::too_many_arguments)]
    pub fn quantize(
        codes: &Codes,
        a_eps: f64,
        alpha: f64,
        p_v: f64,
        side_info: &SideInfoDist,
        stage1: &RbpConfig,
        stage2: &RbpConfig,
        blocks: usize,
        seed: u64,
    ) -> Result<Self> {
        let n = codes.n();
        let map1 = ConstellationMap::pam2(a_eps)?;
        let map2 = ConstellationMap::pam4_gray(alpha * alpha * p_v, a_eps)?;
        let keep = |r: Result<QuantizeResult>| match r {
            Err(Error::Divergence { best, .. }) => Ok(*best),
            other => other,
        };
        let blocks = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = block_rng(seed, b as u64);
                let src = sample_source(n, side_info, p_v, &mut rng)?;
                let d = sample_dither(n, a_eps, &mut rng)?;
                let u: Vec<f64> = src.x.iter().zip(&d).map(|(x, d)| wrap(alpha * x + d, a_eps)).collect();
                let s1 = keep(quantize_ldpc_stage(&codes.ldpc, &map1, &u, stage1, b as u64))?;
                let s2 = keep(quantize_ldgm_stage(&codes.ldgm, &map2, &s1.error, stage2, b as u64))?;
                Ok(ProbeBlock { v: src.v, stage1: s1, stage2: s2 })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProbeSet { a_eps, alpha, p_v, blocks })
    }

    /// Mean stage-2 distortion at `A_ε`.
    pub fn d2(&self) -> f64 {
        self.blocks.iter().map(|b| b.stage2.distortion).sum::<f64>() / self.blocks.len().max(1) as f64
    }

    /// Mean stage-1 distortion at `A_ε`.
    pub fn d1(&self) -> f64 {
        self.blocks.iter().map(|b| b.stage1.distortion).sum::<f64>() / self.blocks.len().max(1) as f64
    }

    /// Decodes every block at modulo size `a_p`, the decoder assuming
    /// stage-2 distortion `d2_eps` at `A_ε`.
    pub fn decode_at(&self, codes: &Codes, a_p: f64, d2_eps: f64, decoder_iters: usize, wrap_limit: usize) -> Result<ModuloProbe> {
        let s = a_p / self.a_eps;
        let a = self.a_eps;
        let map = ConstellationMap::pam2(a)?;
        let noise_var = d2_eps + self.alpha * self.alpha * self.p_v / (s * s);
        let per_block = self
            .blocks
            .par_iter()
            .map(|b| {
                // c1 = -q, so -w = (q - αv/s + e2) mod A.
                let w: Vec<f64> = b
                    .stage1
                    .symbols
                    .iter()
                    .zip(&b.v)
                    .zip(&b.stage2.error)
                    .map(|((&q, &v), &e2)| wrap(-q + self.alpha * v / s - e2, a))
                    .collect();
                let obs = ChannelObservation {
                    w: w.iter().map(|&x| wrap(-x, a)).collect(),
                    modulo: a,
                    noise_var,
                };
                let llr = wrapped_gaussian_llr(&obs, &map, wrap_limit)?;
                let out = bp_decode(&codes.ldpc, &llr, decoder_iters)?;
                let errors = out.bits.iter().zip(&b.stage1.code_bits).filter(|(x, y)| x != y).count();
                let q_hat = map.map(&out.bits)?;
                let sq: f64 = w
                    .iter()
                    .zip(&q_hat)
                    .zip(&b.v)
                    .map(|((&wi, &qh), &v)| (v - s * wrap(wi + qh, a)).powi(2))
                    .sum();
                Ok((errors, out.converged, sq))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = codes.n();
        let m = self.blocks.len();
        let bit_errors: usize = per_block.iter().map(|r| r.0).sum();
        Ok(ModuloProbe {
            a_p,
            ber: bit_errors as f64 / (n * m) as f64,
            bit_errors,
            converged_blocks: per_block.iter().filter(|r| r.1).count(),
            blocks: m,
            mse: per_block.iter().map(|r| r.2).sum::<f64>() / (n * m) as f64,
        })
    }
}

/// Steps 1 and 2 plus `R1`: pure arithmetic.
pub struct Front {
    pub d: f64,
    pub alpha: f64,
    pub a_eps_search: f64,
    pub a_eps: f64,
    pub epsilon1: f64,
    pub r1: f64,
}

pub fn design_front(cfg: &DesignConfig) -> Result<Front> {
    if !(cfg.p_v > 0.0 && cfg.r2 > 0.0) {
        return Err(Error::InvalidInput(format!("need P_V > 0 and R2 > 0, got {} and {}", cfg.p_v, cfg.r2)));
    }
    let d = target_distortion(cfg.p_v, cfg.r2);
    let alpha = alpha(cfg.p_v, d);
    let surrogate = alpha * alpha * cfg.p_v + alpha * d;
    let a_eps_search = find_a_eps(cfg.epsilon, surrogate)?;
    let a_eps = cfg.a_eps.unwrap_or(a_eps_search);
    Ok(Front {
        d,
        alpha,
        a_eps_search,
        a_eps,
        epsilon1: entropy_gap_epsilon1(a_eps, surrogate)?,
        r1: rate_r1(a_eps, alpha, cfg.p_v),
    })
}

/// Runs all five steps. Without `codes` the thresholds must be supplied and
/// step 5 stops at the bound rounded up to the grid.
pub fn run_design_flow(cfg: &DesignConfig, codes: Option<&Codes>, seed: u64) -> Result<DesignReport> {
    let f = design_front(cfg)?;
    let map1 = ConstellationMap::pam2(f.a_eps)?;

    let mut threshold_probes = Vec::new();
    let (sigma2_n_eps, sigma2_measured) = match (cfg.sigma2_n_eps, codes) {
        (Some(s), _) => (s, false),
        (None, Some(c)) => {
            let mut rng = block_rng(seed, u64::MAX);
            let t = find_noise_threshold(&c.ldpc, &map1, &cfg.threshold, &mut rng)?;
            threshold_probes = t.probes;
            (t.noise_var, true)
        }
        (None, None) => return Err(Error::Config("σ²_n,ε must be supplied when no codes are given".into())),
    };

    let stage1 = RbpConfig {
        prior_var: cfg.stage1_prior.unwrap_or(sigma2_n_eps),
        ..cfg.stage1
    };
    let stage2 = RbpConfig {
        prior_var: cfg.stage2_prior.unwrap_or(f.alpha * f.d),
        ..cfg.stage2
    };
    let needs_probes = codes.is_some() && (cfg.d2_eps.is_none() || cfg.a_p.is_none());
    let probes = match codes {
        Some(c) if needs_probes => Some(ProbeSet::quantize(
            c,
            f.a_eps,
            f.alpha,
            cfg.p_v,
            &cfg.side_info,
            &stage1,
            &stage2,
            cfg.probe_blocks,
            seed,
        )?),
        _ => None,
    };
    let (d2_eps, d2_measured) = match (cfg.d2_eps, &probes) {
        (Some(d2), _) => (d2, false),
        (None, Some(p)) => (p.d2(), true),
        (None, None) => return Err(Error::Config("D2_eps must be supplied when no codes are given".into())),
    };

    let a_p_bound = practical_modulo_bound(f.a_eps, f.alpha, cfg.p_v, sigma2_n_eps, d2_eps)?;
    let wrap_limit = cfg.threshold.wrap_limit;
    let mut modulo_probes = Vec::new();
    let mut uncorrected = None;
    let a_p = match (cfg.a_p, &probes, codes) {
        (Some(a), _, _) => a,
        (None, Some(p), Some(c)) => {
            uncorrected = Some(p.decode_at(c, f.a_eps, d2_eps, cfg.decoder_iters, wrap_limit)?);
            let cap = 3.0 * f.a_eps;
            let mut k = (a_p_bound.max(f.a_eps) / A_STEP - 1e-9).ceil() as u64;
            loop {
                let a = k as f64 * A_STEP;
                if a > cap + 1e-9 {
                    return Err(Error::ModuloSearch { a_max: cap });
                }
                let probe = p.decode_at(c, a, d2_eps, cfg.decoder_iters, wrap_limit)?;
                modulo_probes.push(probe);
                if probe.ber < cfg.threshold.target_ber {
                    break a;
                }
                k += 1;
            }
        }
        _ => (a_p_bound.max(f.a_eps) / A_STEP - 1e-9).ceil() * A_STEP,
    };

    let k = map1.k();
    let snr = snr_diagnostics(f.a_eps, a_p, k, f.alpha, cfg.p_v, d2_eps, sigma2_n_eps)?;
    let final_mse = modulo_probes.last().map(|p| p.mse);
    Ok(DesignReport {
        p_v: cfg.p_v,
        r2: cfg.r2,
        d: f.d,
        alpha: f.alpha,
        epsilon: cfg.epsilon,
        a_eps_search: f.a_eps_search,
        a_eps: f.a_eps,
        epsilon1: f.epsilon1,
        r1: f.r1,
        r1_code: codes.map(|c| c.ldpc.rate()),
        sigma2_n_eps,
        sigma2_measured,
        d2_eps,
        d2_measured,
        a_p_bound,
        a_p,
        k,
        d2_p: snr.d2_p,
        sigma2_n_p: snr.sigma2_n_p,
        snr_eps: snr.snr_eps,
        snr_p: snr.snr_p,
        uncorrected,
        modulo_probes,
        threshold_probes,
        final_mse,
        final_loss_db: final_mse.map(|m| 10.0 * (m / f.d).log10()),
    })
}
