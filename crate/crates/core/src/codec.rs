//! The residual Wyner-Ziv encoder and decoder.
//!
//! Encoder, for a source block `x` and shared dither `d`:
//!
//! ```text
//! u  = (αx + d) mod A
//! c1 = -(2-PAM image of the LDPC codeword nearest to u)   e1 = (u + c1) mod A
//! c2 = 4-PAM image of the LDGM codeword nearest to e1     e2 = (e1 - c2) mod A
//! ```
//!
//! and the LDGM information bits are sent. The decoder regenerates `c2`,
//! forms `w = (c2 - αy_a - d) mod A = (c1 + αv - e2) mod A`, channel-decodes
//! `c1` from it and outputs `x̂ = y_a + (w - ĉ1) mod A`.
//!
//! Everything runs at the practical modulo size `A_p`. Constellations and
//! the quantizers' a-priori variances, which are specified at `A_ε`, are
//! stretched by `A_p / A_ε`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::bp::{bp_decode, wrapped_gaussian_llr, ChannelObservation};
use crate::design;
use crate::error::{Error, Result};
use crate::graph::{build_graph, build_graph_with_checks, ConstellationMap, DegreeProfile, GraphKind, TannerGraph};
use crate::lattice::{sample_dither, wrap};
use crate::rbp::{quantize_ldgm_stage, quantize_ldpc_stage, QuantizeResult, RbpConfig};
use crate::source::{mse, sample_source, SideInfoDist};

/// Scalar system parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WzParams {
    pub p_v: f64,
    pub d: f64,
    pub alpha: f64,
    pub a_eps: f64,
    pub a_p: f64,
    pub r1: f64,
    pub r2: f64,
    pub epsilon: f64,
}

impl WzParams {
    /// Derives `D`, `α` and `R1` from the source variance and the rate.
    pub fn new(p_v: f64, r2: f64, a_eps: f64, a_p: f64, epsilon: f64) -> Result<Self> {
        if !(r2 > 0.0) {
            return Err(Error::InvalidInput(format!("rate must be positive, got {r2}")));
        }
        let d = design::target_distortion(p_v, r2);
        let alpha = design::alpha(p_v, d);
        let p = WzParams {
            p_v,
            d,
            alpha,
            a_eps,
            a_p,
            r1: design::rate_r1(a_eps, alpha, p_v),
            r2,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.p_v > self.d && self.d > 0.0) {
            return bad(format!("need P_V > D > 0, got P_V={} D={}", self.p_v, self.d));
        }
        if (self.alpha - (1.0 - self.d / self.p_v)).abs() > 1e-12 {
            return bad(format!("α = {} but 1 - D/P_V = {}", self.alpha, 1.0 - self.d / self.p_v));
        }
        if !(self.a_eps > 0.0 && self.a_p >= self.a_eps) {
            return bad(format!("need A_p >= A_eps > 0, got A_eps={} A_p={}", self.a_eps, self.a_p));
        }
        if (self.r2 - 0.5 * (self.p_v / self.d).log2()).abs() > 1e-9 {
            return bad(format!("R2 = {} does not match D = {}", self.r2, self.d));
        }
        if !(self.epsilon > 0.0) {
            return bad("entropy-gap threshold must be positive".into());
        }
        Ok(())
    }

    /// Same design at another practical modulo size.
    pub fn with_modulo(&self, a_p: f64) -> Result<Self> {
        let p = WzParams { a_p, ..*self };
        p.validate()?;
        Ok(p)
    }

    /// `A_p / A_ε`.
    pub fn scale(&self) -> f64 {
        self.a_p / self.a_eps
    }

    /// Index length for a block of `n` samples.
    pub fn payload_bits(&self, n: usize) -> usize {
        (n as f64 * self.r2).round() as usize
    }

    /// First-stage 2-PAM at `A_p`.
    pub fn stage1_map(&self) -> Result<ConstellationMap> {
        ConstellationMap::pam2(self.a_p)
    }

    /// Second-stage Gray 4-PAM with energy `α²P_V` at `A_ε`, stretched to `A_p`.
    pub fn stage2_map(&self) -> Result<ConstellationMap> {
        let s = self.scale();
        ConstellationMap::pam4_gray(s * s * self.alpha * self.alpha * self.p_v, self.a_p)
    }
}

/// The two code graphs for one block length.
#[derive(Debug, Clone)]
pub struct Codes {
    pub ldpc: TannerGraph,
    pub ldgm: TannerGraph,
}

impl Codes {
    /// Builds the LDPC on `n` variables and the LDGM with `round(n·R2)`
    /// information bits and `2n` code bits. The two graphs get different
    /// substreams of `seed`.
    pub fn build(n: usize, r2: f64, ldpc: &DegreeProfile, ldgm: &DegreeProfile, seed: u64) -> Result<Self> {
        let k = (n as f64 * r2).round() as usize;
        Ok(Codes {
            ldpc: build_graph(n, ldpc, GraphKind::ParityCheck, seed)?,
            ldgm: build_graph_with_checks(k, 2 * n, ldgm, GraphKind::Generator, seed.wrapping_add(1))?,
        })
    }

    pub fn n(&self) -> usize {
        self.ldpc.n_var()
    }

    pub fn check(&self, params: &WzParams) -> Result<()> {
        let n = self.n();
        if self.ldpc.kind() != GraphKind::ParityCheck || self.ldgm.kind() != GraphKind::Generator {
            return Err(Error::InvalidInput("codes must be an LDPC and an LDGM".into()));
        }
        if self.ldgm.n_chk() != 2 * n {
            return Err(Error::InvalidInput(format!(
                "LDGM has {} code bits, 4-PAM over {n} samples needs {}",
                self.ldgm.n_chk(),
                2 * n
            )));
        }
        if self.ldgm.n_var() != params.payload_bits(n) {
            return Err(Error::InvalidInput(format!(
                "LDGM carries {} bits but rate {} at n={n} needs {}",
                self.ldgm.n_var(),
                params.r2,
                params.payload_bits(n)
            )));
        }
        Ok(())
    }
}

/// Quantizer and decoder settings. The a-priori variances in `stage1` and
/// `stage2` are given at `A_ε` and rescaled with the modulo size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodecConfig {
    pub stage1: RbpConfig,
    pub stage2: RbpConfig,
    /// Stage-2 distortion at `A_ε` the decoder plans for.
    pub d2_eps: f64,
    pub decoder_iters: usize,
    pub wrap_limit: usize,
}

impl CodecConfig {
    /// Stage-1 prior `σ²_{n,ε}`, stage-2 prior `αD`, default schedule otherwise.
    pub fn new(params: &WzParams, sigma2_n_eps: f64, d2_eps: f64) -> Self {
        let base = RbpConfig::default();
        CodecConfig {
            stage1: RbpConfig {
                prior_var: sigma2_n_eps,
                ..base
            },
            stage2: RbpConfig {
                prior_var: params.alpha * params.d,
                ..base
            },
            d2_eps,
            decoder_iters: 200,
            wrap_limit: 3,
        }
    }

    /// Noise variance assumed by the channel decoder: `D_{2,p} + α²P_V`.
    pub fn decoder_noise_var(&self, params: &WzParams) -> f64 {
        let s = params.scale();
        s * s * self.d2_eps + params.alpha * params.alpha * params.p_v
    }

    fn scaled(rbp: &RbpConfig, params: &WzParams) -> RbpConfig {
        let s = params.scale();
        RbpConfig {
            prior_var: rbp.prior_var * s * s,
            ..*rbp
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageStats {
    pub converged: bool,
    pub iterations: usize,
    pub restarts: usize,
    pub distortion: f64,
}

impl From<&QuantizeResult> for StageStats {
    fn from(r: &QuantizeResult) -> Self {
        StageStats {
            converged: r.converged,
            iterations: r.iterations,
            restarts: r.restarts,
            distortion: r.distortion,
        }
    }
}

/// Every intermediate vector of one encoding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodeTrace {
    pub dither: Vec<f64>,
    /// `(αx + d) mod A`.
    pub u: Vec<f64>,
    pub c1_bits: Vec<u8>,
    pub c1: Vec<f64>,
    pub e1: Vec<f64>,
    pub c2: Vec<f64>,
    pub e2: Vec<f64>,
    pub index: Vec<u8>,
    pub stage1: StageStats,
    pub stage2: StageStats,
}

impl EncodeTrace {
    /// True when either quantizer ran out of restarts.
    pub fn diverged(&self) -> bool {
        !(self.stage1.converged && self.stage2.converged)
    }
}

fn best_effort(r: Result<QuantizeResult>) -> Result<QuantizeResult> {
    match r {
        Ok(q) => Ok(q),
        Err(Error::Divergence { best, .. }) => Ok(*best),
        Err(e) => Err(e),
    }
}

fn check_lengths(what: &str, got: usize, n: usize) -> Result<()> {
    if got != n {
        return Err(Error::InvalidInput(format!("{what} has {got} entries, block length is {n}")));
    }
    Ok(())
}

/// Encodes one block, keeping best-effort results when a quantizer
/// diverges. Check [`EncodeTrace::diverged`].
pub fn encode_lenient(x: &[f64], params: &WzParams, codes: &Codes, dither: &[f64], cfg: &CodecConfig, seed: u64) -> Result<EncodeTrace> {
    params.validate()?;
    codes.check(params)?;
    let n = codes.n();
    check_lengths("source", x.len(), n)?;
    check_lengths("dither", dither.len(), n)?;
    let a = params.a_p;
    let u: Vec<f64> = x.iter().zip(dither).map(|(&xi, &di)| wrap(params.alpha * xi + di, a)).collect();

    let map1 = params.stage1_map()?;
    let s1 = best_effort(quantize_ldpc_stage(&codes.ldpc, &map1, &u, &CodecConfig::scaled(&cfg.stage1, params), seed))?;
    let map2 = params.stage2_map()?;
    let s2 = best_effort(quantize_ldgm_stage(
        &codes.ldgm,
        &map2,
        &s1.error,
        &CodecConfig::scaled(&cfg.stage2, params),
        seed ^ 0x5eed_0002,
    ))?;

    Ok(EncodeTrace {
        dither: dither.to_vec(),
        c1: s1.symbols.iter().map(|q| -q).collect(),
        stage1: (&s1).into(),
        stage2: (&s2).into(),
        u,
        c1_bits: s1.code_bits,
        e1: s1.error,
        c2: s2.symbols,
        e2: s2.error,
        index: s2.index,
    })
}

/// Encodes one block and returns the index bits. A diverged quantizer is an
/// error carrying that stage's best effort.
pub fn encode(x: &[f64], params: &WzParams, codes: &Codes, dither: &[f64], cfg: &CodecConfig, seed: u64) -> Result<(Vec<u8>, EncodeTrace)> {
    let t = encode_lenient(x, params, codes, dither, cfg, seed)?;
    let best = if !t.stage1.converged {
        (&t.stage1, t.c1_bits.clone(), Vec::new(), t.c1.iter().map(|c| -c).collect(), t.e1.clone())
    } else if !t.stage2.converged {
        (&t.stage2, codes.ldgm.generate(&t.index), t.index.clone(), t.c2.clone(), t.e2.clone())
    } else {
        return Ok((t.index.clone(), t));
    };
    let (stats, code_bits, index, symbols, error) = best;
    Err(Error::Divergence {
        restarts: stats.restarts,
        best: Box::new(QuantizeResult {
            code_bits,
            index,
            symbols,
            error,
            distortion: stats.distortion,
            converged: false,
            iterations: stats.iterations,
            restarts: stats.restarts,
        }),
    })
}

/// Decoder-side intermediates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeTrace {
    pub w: Vec<f64>,
    pub c1_bits_hat: Vec<u8>,
    pub c1_hat: Vec<f64>,
    pub v_hat: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// `w = (c2 - αy_a - d) mod A`, with `c2` rebuilt from the index.
pub fn folded_observation(index: &[u8], y_a: &[f64], dither: &[f64], params: &WzParams, codes: &Codes) -> Result<Vec<f64>> {
    codes.check(params)?;
    let n = codes.n();
    check_lengths("side information", y_a.len(), n)?;
    check_lengths("dither", dither.len(), n)?;
    if index.len() != codes.ldgm.n_var() {
        return Err(Error::InvalidInput(format!(
            "index has {} bits, the LDGM expects {}",
            index.len(),
            codes.ldgm.n_var()
        )));
    }
    let c2 = params.stage2_map()?.map(&codes.ldgm.generate(index))?;
    Ok(c2
        .iter()
        .zip(y_a)
        .zip(dither)
        .map(|((&c, &y), &d)| wrap(c - params.alpha * y - d, params.a_p))
        .collect())
}

fn reconstruct(w: Vec<f64>, y_a: &[f64], bits: Vec<u8>, params: &WzParams, converged: bool, iterations: usize) -> Result<DecodeTrace> {
    let c1_hat: Vec<f64> = params.stage1_map()?.map(&bits)?.into_iter().map(|q| -q).collect();
    let v_hat: Vec<f64> = w.iter().zip(&c1_hat).map(|(&wi, &c)| wrap(wi - c, params.a_p)).collect();
    let x_hat = y_a.iter().zip(&v_hat).map(|(y, v)| y + v).collect();
    Ok(DecodeTrace {
        w,
        c1_bits_hat: bits,
        c1_hat,
        v_hat,
        x_hat,
        converged,
        iterations,
    })
}

/// Decodes one block. A channel-decoder failure is reported through the
/// flag and the best-effort reconstruction is still returned.
pub fn decode(index: &[u8], y_a: &[f64], dither: &[f64], params: &WzParams, codes: &Codes, cfg: &CodecConfig) -> Result<(Vec<f64>, DecodeTrace, bool)> {
    let w = folded_observation(index, y_a, dither, params, codes)?;
    // w = (c1 + noise) mod A with c1 = -q, so -w observes the PAM image q.
    let obs = ChannelObservation {
        w: w.iter().map(|&x| wrap(-x, params.a_p)).collect(),
        modulo: params.a_p,
        noise_var: cfg.decoder_noise_var(params),
    };
    let llr = wrapped_gaussian_llr(&obs, &params.stage1_map()?, cfg.wrap_limit)?;
    let out = bp_decode(&codes.ldpc, &llr, cfg.decoder_iters)?;
    let t = reconstruct(w, y_a, out.bits, params, out.converged, out.iterations)?;
    Ok((t.x_hat.clone(), t, out.converged))
}

/// Decoding with the channel decoder replaced by the true `c1` bits.
pub fn decode_genie(index: &[u8], y_a: &[f64], dither: &[f64], params: &WzParams, codes: &Codes, c1_bits: &[u8]) -> Result<DecodeTrace> {
    let w = folded_observation(index, y_a, dither, params, codes)?;
    check_lengths("genie codeword", c1_bits.len(), codes.n())?;
    reconstruct(w, y_a, c1_bits.to_vec(), params, true, 0)
}

/// Per-block RNG: stream `block` of the ChaCha generator seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// One simulated block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockRecord {
    pub block: usize,
    pub mse: f64,
    pub stage1_distortion: f64,
    pub stage2_distortion: f64,
    pub stage1_restarts: usize,
    pub stage2_iterations: usize,
    pub decoder_converged: bool,
    pub decoder_iterations: usize,
    /// Channel-decoder bit errors against the encoder's `c1`.
    pub bit_errors: usize,
    /// A quantizer ran out of restarts.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateDistortionReport {
    pub n: usize,
    pub payload_bits: usize,
    pub rate_bits_per_sample: f64,
    pub target_distortion: f64,
    pub mse: f64,
    pub loss_db: f64,
    pub decoder_convergence_rate: f64,
    pub ber: f64,
    pub flagged_fraction: f64,
    pub blocks: Vec<BlockRecord>,
    pub wall_clock_s: f64,
}

impl RateDistortionReport {
    fn from_blocks(params: &WzParams, n: usize, k: usize, blocks: Vec<BlockRecord>, wall: f64) -> Self {
        let m = blocks.len().max(1) as f64;
        let agg = blocks.iter().map(|b| b.mse).sum::<f64>() / m;
        RateDistortionReport {
            n,
            payload_bits: k,
            rate_bits_per_sample: k as f64 / n as f64,
            target_distortion: params.d,
            mse: agg,
            loss_db: loss_db(agg, params.d),
            decoder_convergence_rate: blocks.iter().filter(|b| b.decoder_converged).count() as f64 / m,
            ber: blocks.iter().map(|b| b.bit_errors).sum::<usize>() as f64 / (m * n as f64),
            flagged_fraction: blocks.iter().filter(|b| b.flagged).count() as f64 / m,
            blocks,
            wall_clock_s: wall,
        }
    }
}

/// `10 log10(mse / d)`.
pub fn loss_db(mse: f64, d: f64) -> f64 {
    10.0 * (mse / d).log10()
}

/// Encodes and decodes one fresh block drawn from stream `block` of `seed`.
pub fn simulate_block(block: usize, params: &WzParams, codes: &Codes, dist: &SideInfoDist, cfg: &CodecConfig, seed: u64) -> Result<(BlockRecord, EncodeTrace, DecodeTrace)> {
    let n = codes.n();
    let mut rng = block_rng(seed, block as u64);
    let src = sample_source(n, dist, params.p_v, &mut rng)?;
    let dither = sample_dither(n, params.a_p, &mut rng)?;
    let enc_seed: u64 = rng.random();
    let et = encode_lenient(&src.x, params, codes, &dither, cfg, enc_seed)?;
    let (x_hat, dt, converged) = decode(&et.index, &src.y_a, &dither, params, codes, cfg)?;
    let rec = BlockRecord {
        block,
        mse: mse(&src.x, &x_hat)?,
        stage1_distortion: et.stage1.distortion,
        stage2_distortion: et.stage2.distortion,
        stage1_restarts: et.stage1.restarts,
        stage2_iterations: et.stage2.iterations,
        decoder_converged: converged,
        decoder_iterations: dt.iterations,
        bit_errors: et.c1_bits.iter().zip(&dt.c1_bits_hat).filter(|(a, b)| a != b).count(),
        flagged: et.diverged(),
    };
    Ok((rec, et, dt))
}

/// Monte Carlo over `blocks` blocks on the current rayon pool. Results are
/// ordered by block index and do not depend on the pool size.
pub fn evaluate(blocks: usize, params: &WzParams, codes: &Codes, dist: &SideInfoDist, cfg: &CodecConfig, seed: u64) -> Result<RateDistortionReport> {
    if blocks == 0 {
        return Err(Error::InvalidInput("need at least one block".into()));
    }
    codes.check(params)?;
    let t0 = Instant::now();
    let recs = (0..blocks)
        .into_par_iter()
        .map(|b| simulate_block(b, params, codes, dist, cfg, seed).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    let n = codes.n();
    Ok(RateDistortionReport::from_blocks(params, n, params.payload_bits(n), recs, t0.elapsed().as_secs_f64()))
}

/// Index bits with the header needed to decode them from a file.
///
/// Layout: `n` as u32, R2 as a u16 fraction `num/den`, the block seed as
/// u64, all little endian, then the bits packed LSB first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Payload {
    pub n: u32,
    pub r2_num: u16,
    pub r2_den: u16,
    pub seed: u64,
    pub bits: Vec<u8>,
}

pub const HEADER_BYTES: usize = 16;
const RATE_DEN: u16 = 10_000;

impl Payload {
    pub fn new(n: usize, r2: f64, seed: u64, bits: Vec<u8>) -> Result<Self> {
        let num = (r2 * RATE_DEN as f64).round();
        if !(0.0..=u16::MAX as f64).contains(&num) || n > u32::MAX as usize {
            return Err(Error::InvalidInput(format!("cannot encode n={n}, R2={r2} in the header")));
        }
        let p = Payload {
            n: n as u32,
            r2_num: num as u16,
            r2_den: RATE_DEN,
            seed,
            bits,
        };
        if p.bits.len() != p.expected_bits() {
            return Err(Error::InvalidInput(format!(
                "{} index bits, header implies {}",
                p.bits.len(),
                p.expected_bits()
            )));
        }
        Ok(p)
    }

    pub fn expected_bits(&self) -> usize {
        (self.n as u64 * self.r2_num as u64 + self.r2_den as u64 / 2) as usize / self.r2_den.max(1) as usize
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + self.bits.len().div_ceil(8));
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.r2_num.to_le_bytes());
        out.extend_from_slice(&self.r2_den.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        let mut packed = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            packed[i / 8] |= (b & 1) << (i % 8);
        }
        out.extend_from_slice(&packed);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_BYTES {
            return Err(Error::InvalidInput(format!("payload of {} bytes is shorter than its header", bytes.len())));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let u16_at = |i: usize| u16::from_le_bytes(bytes[i..i + 2].try_into().unwrap());
        let mut p = Payload {
            n: u32_at(0),
            r2_num: u16_at(4),
            r2_den: u16_at(6),
            seed: u64::from_le_bytes(bytes[8..16].try_into().unwrap()),
            bits: Vec::new(),
        };
        if p.r2_den == 0 {
            return Err(Error::InvalidInput("rate denominator is zero".into()));
        }
        let k = p.expected_bits();
        let body = &bytes[HEADER_BYTES..];
        if body.len() != k.div_ceil(8) {
            return Err(Error::InvalidInput(format!("{} payload bytes, header implies {}", body.len(), k.div_ceil(8))));
        }
        p.bits = (0..k).map(|i| (body[i / 8] >> (i % 8)) & 1).collect();
        if k % 8 != 0 && body[k / 8] >> (k % 8) != 0 {
            return Err(Error::InvalidInput("nonzero padding bits".into()));
        }
        Ok(p)
    }

    pub fn rate(&self) -> f64 {
        self.r2_num as f64 / self.r2_den as f64
    }
}
