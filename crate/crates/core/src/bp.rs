//! Sum-product channel decoding of the first-stage codeword from the folded
//! observation, and the noise-threshold measurement used at design time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ConstellationMap, GraphKind, TannerGraph};
use crate::lattice::wrap;

/// Magnitude limit for every L-value.
pub const LLR_CLIP: f64 = 50.0;

#[inline]
pub(crate) fn clip(x: f64) -> f64 {
    x.clamp(-LLR_CLIP, LLR_CLIP)
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}


/// `φ(x) = -ln tanh(x/2) = ln(1 + 2/(e^x - 1))`, an involution on `x > 0`.
#[inline]
pub(crate) fn phi(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    (2.0 / x.exp_m1()).ln_1p()
}

/// Extrinsic tanh-rule update for one check:
/// `out[i] = 2 atanh(tanh(bias/2) · Π_{j≠i} tanh(inp[j]/2))`, where `bias` is
/// an extra L-value attached to the check (`f64::INFINITY` for none).
///
/// Evaluated in sign/magnitude form with `φ` so that large magnitudes keep
/// their ordering instead of collapsing onto `atanh(1 - ε)`. Products over
/// the other edges use prefix/suffix sums, never a division. `scratch` is
/// caller-owned to avoid allocation.
#[inline]
pub(crate) fn check_extrinsic(inp: &[f64], bias: f64, out: &mut [f64], scratch: &mut Vec<f64>) {
    let d = inp.len();
    scratch.clear();
    scratch.extend(inp.iter().map(|&m| phi(m.abs())));
    let mut sign = if bias < 0.0 { -1.0 } else { 1.0 };
    for &m in inp {
        if m < 0.0 {
            sign = -sign;
        }
    }
    // φ of the bias folds in like one more edge.
    let bias_phi = phi(bias.abs());
    let mut acc = bias_phi;
    for i in 0..d {
        out[i] = acc;
        acc += scratch[i];
    }
    let mut suffix = 0.0;
    for i in (0..d).rev() {
        let s = out[i] + suffix;
        suffix += scratch[i];
        let own = if inp[i] < 0.0 { -1.0 } else { 1.0 };
        out[i] = sign * own * phi(s);
    }
}

/// The decoder's view of the equivalent channel: a folded observation and
/// the variance it assumes for the noise.
#[derive(Debug, Clone)]
pub struct ChannelObservation {
    pub w: Vec<f64>,
    pub modulo: f64,
    pub noise_var: f64,
}

/// Per-bit L-values `ln p(w|bit 0) / p(w|bit 1)` of a 2-level constellation
/// under wrapped Gaussian noise, summing `|b| <= wrap_limit` images.
pub fn wrapped_gaussian_llr(obs: &ChannelObservation, map: &ConstellationMap, wrap_limit: usize) -> Result<Vec<f64>> {
    if !(obs.noise_var > 0.0) {
        return Err(Error::InvalidInput(format!(
            "noise variance must be positive, got {}",
            obs.noise_var
        )));
    }
    if map.bits_per_symbol() != 1 {
        return Err(Error::InvalidInput("channel LLRs need a 2-level constellation".into()));
    }
    if wrap_limit == 0 {
        return Err(Error::InvalidInput("wrap limit must be at least 1".into()));
    }
    let s0 = map.level_of(0);
    let s1 = map.level_of(1);
    let inv2 = 0.5 / obs.noise_var;
    let a = obs.modulo;
    Ok(obs
        .w
        .iter()
        .map(|&w| {
            let mut l0 = f64::NEG_INFINITY;
            let mut l1 = f64::NEG_INFINITY;
            for b in -(wrap_limit as i64)..=(wrap_limit as i64) {
                let shift = a * b as f64;
                l0 = log_add(l0, -(w - s0 + shift).powi(2) * inv2);
                l1 = log_add(l1, -(w - s1 + shift).powi(2) * inv2);
            }
            clip(l0 - l1)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub bits: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

/// Message storage for one decode call; edge arrays follow the graph's edge ids.
#[derive(Debug, Clone)]
pub struct MessageState {
    pub var_to_chk: Vec<f64>,
    pub chk_to_var: Vec<f64>,
    pub marginals: Vec<f64>,
    pub iteration: usize,
}

impl MessageState {
    pub fn new(g: &TannerGraph) -> Self {
        MessageState {
            var_to_chk: vec![0.0; g.n_edges()],
            chk_to_var: vec![0.0; g.n_edges()],
            marginals: vec![0.0; g.n_var()],
            iteration: 0,
        }
    }
}

/// Runs all check updates of one flooding iteration.
pub(crate) fn check_pass(g: &TannerGraph, st: &mut MessageState, scratch: &mut (Vec<f64>, Vec<f64>)) {
    let (tanhs, out) = scratch;
    for c in 0..g.n_chk() {
        let r = g.check_edges(c);
        let d = r.len();
        out.resize(d.max(out.len()), 0.0);
        check_extrinsic(&st.var_to_chk[r.clone()], f64::INFINITY, &mut out[..d], tanhs);
        for (k, e) in r.enumerate() {
            st.chk_to_var[e] = clip(out[k]);
        }
    }
}

/// Flooding sum-product decoding; stops as soon as the hard decision has a
/// zero syndrome. A bit whose marginal is exactly zero counts as undecided
/// and blocks convergence.
pub fn bp_decode(g: &TannerGraph, llr: &[f64], max_iters: usize) -> Result<DecodeOutcome> {
    if g.kind() != GraphKind::ParityCheck {
        return Err(Error::InvalidInput("BP channel decoding needs a parity-check graph".into()));
    }
    if llr.len() != g.n_var() {
        return Err(Error::InvalidInput(format!(
            "{} L-values for {} variables",
            llr.len(),
            g.n_var()
        )));
    }
    let mut st = MessageState::new(g);
    let mut bits: Vec<u8> = llr.iter().map(|&l| (l < 0.0) as u8).collect();
    if llr.iter().all(|&l| l != 0.0) && g.syndrome_ok(&bits) {
        return Ok(DecodeOutcome {
            bits,
            converged: true,
            iterations: 0,
        });
    }
    for v in 0..g.n_var() {
        for &e in g.var_edges(v) {
            st.var_to_chk[e as usize] = clip(llr[v]);
        }
    }
    let mut scratch = (Vec::new(), Vec::new());
    for it in 1..=max_iters {
        check_pass(g, &mut st, &mut scratch);
        let mut undecided = false;
        for v in 0..g.n_var() {
            let edges = g.var_edges(v);
            let total: f64 = llr[v] + edges.iter().map(|&e| st.chk_to_var[e as usize]).sum::<f64>();
            st.marginals[v] = total;
            bits[v] = (total < 0.0) as u8;
            undecided |= total == 0.0;
            for &e in edges {
                st.var_to_chk[e as usize] = clip(total - st.chk_to_var[e as usize]);
            }
        }
        st.iteration = it;
        if !undecided && g.syndrome_ok(&bits) {
            return Ok(DecodeOutcome {
                bits,
                converged: true,
                iterations: it,
            });
        }
    }
    Ok(DecodeOutcome {
        bits,
        converged: false,
        iterations: max_iters,
    })
}

/// Settings for the threshold bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct ThresholdConfig {
    pub target_ber: f64,
    /// Codewords simulated per probed variance.
    pub blocks_per_probe: usize,
    /// Bisection stops once the bracket is narrower than this.
    pub tolerance: f64,
    pub max_iters: usize,
    pub wrap_limit: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            target_ber: 1e-4,
            blocks_per_probe: 20,
            tolerance: 1e-3,
            max_iters: 200,
            wrap_limit: 3,
            lo: 0.02,
            hi: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Probe {
    pub noise_var: f64,
    pub ber: f64,
    pub blocks: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    /// Largest probed variance whose BER met the target.
    pub noise_var: f64,
    /// True when even the top of the probe range decoded; the threshold lies above it.
    pub unbounded: bool,
    pub probes: Vec<Probe>,
}

/// Measures the BER of the mod-A channel at one noise variance.
///
/// The channel folds antipodal levels onto a circle, so it is output
/// symmetric and BP errors do not depend on the transmitted codeword; the
/// all-zero word is sent. Noise draws come from `noise_seed`, so probes at
/// different variances share the same normalised noise.
pub fn measure_ber(g: &TannerGraph, map: &ConstellationMap, noise_var: f64, cfg: &ThresholdConfig, noise_seed: u64) -> Result<Probe> {
    let n = g.n_var();
    let s0 = map.level_of(0);
    let sd = noise_var.sqrt();
    let mut errors = 0;
    for block in 0..cfg.blocks_per_probe {
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        rng.set_stream(block as u64);
        let w: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                wrap(s0 + sd * z, map.modulo())
            })
            .collect();
        let obs = ChannelObservation {
            w,
            modulo: map.modulo(),
            noise_var,
        };
        let llr = wrapped_gaussian_llr(&obs, map, cfg.wrap_limit)?;
        let out = bp_decode(g, &llr, cfg.max_iters)?;
        errors += out.bits.iter().filter(|&&b| b != 0).count();
    }
    let total = n * cfg.blocks_per_probe;
    Ok(Probe {
        noise_var,
        ber: errors as f64 / total as f64,
        blocks: cfg.blocks_per_probe,
        errors,
    })
}

/// Bisects for the largest noise variance whose measured BER stays at or
/// below `cfg.target_ber`.
pub fn find_noise_threshold<R: Rng + ?Sized>(
    g: &TannerGraph,
    map: &ConstellationMap,
    cfg: &ThresholdConfig,
    rng: &mut R,
) -> Result<Threshold> {
    if !(cfg.target_ber > 0.0 && cfg.target_ber < 0.5) {
        return Err(Error::InvalidInput(format!(
            "target BER must lie in (0, 0.5), got {}",
            cfg.target_ber
        )));
    }
    if !(cfg.lo > 0.0 && cfg.hi > cfg.lo) {
        return Err(Error::InvalidInput("threshold probe range must satisfy 0 < lo < hi".into()));
    }
    let seed: u64 = rng.random();
    let mut probes = Vec::new();
    let probe = |var: f64, probes: &mut Vec<Probe>| -> Result<bool> {
        let p = measure_ber(g, map, var, cfg, seed)?;
        probes.push(p);
        Ok(p.ber <= cfg.target_ber)
    };

    let (mut lo, mut hi) = (cfg.lo, cfg.hi);
    if !probe(lo, &mut probes)? {
        return Err(Error::Bracket {
            target_ber: cfg.target_ber,
            probes: probes.iter().map(|p| (p.noise_var, p.ber)).collect(),
        });
    }
    if probe(hi, &mut probes)? {
        return Ok(Threshold {
            noise_var: hi,
            unbounded: true,
            probes,
        });
    }
    while hi - lo > cfg.tolerance {
        let mid = 0.5 * (lo + hi);
        if probe(mid, &mut probes)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold {
        noise_var: lo,
        unbounded: false,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, DegreeProfile, LdpcEncoder};

    fn direct_llr(w: f64, s0: f64, s1: f64, a: f64, var: f64, limit: i64) -> f64 {
        let g = |x: f64| (-x * x / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
        let num: f64 = (-limit..=limit).map(|b| g(w - s0 + a * b as f64)).sum();
        let den: f64 = (-limit..=limit).map(|b| g(w - s1 + a * b as f64)).sum();
        (num / den).ln()
    }

    fn obs(w: Vec<f64>, var: f64) -> ChannelObservation {
        ChannelObservation { w, modulo: 3.0, noise_var: var }
    }

    #[test]
    fn llr_symmetry_and_limits() {
        let map = ConstellationMap::pam2(3.0).unwrap();
        let l = wrapped_gaussian_llr(&obs(vec![0.0, -1.5], 0.185), &map, 3).unwrap();
        assert!(l[0].abs() < 1e-12);
        assert!(l[1].abs() < 1e-9);
        let l = wrapped_gaussian_llr(&obs(vec![-0.75, 0.75], 1e-9), &map, 3).unwrap();
        assert_eq!(l, vec![LLR_CLIP, -LLR_CLIP]);
        assert!(wrapped_gaussian_llr(&obs(vec![0.1], 0.0), &map, 3).is_err());
    }

    #[test]
    fn llr_matches_direct_sum() {
        let map = ConstellationMap::pam2(3.0).unwrap();
        let l = wrapped_gaussian_llr(&obs(vec![0.74], 0.185), &map, 3).unwrap();
        let want = direct_llr(0.74, -0.75, 0.75, 3.0, 0.185, 3);
        assert!((l[0] - want).abs() < 1e-12, "{} vs {want}", l[0]);
    }

    #[test]
    fn extrinsic_rule() {
        let mut out = vec![0.0; 3];
        let mut scratch = Vec::new();
        check_extrinsic(&[1.0, -2.0, 0.5], f64::INFINITY, &mut out, &mut scratch);
        let t = |x: f64| (x / 2.0).tanh();
        let want0 = 2.0 * (t(-2.0) * t(0.5)).atanh();
        assert!((out[0] - want0).abs() < 1e-12);
        let want2 = 2.0 * (t(1.0) * t(-2.0)).atanh();
        assert!((out[2] - want2).abs() < 1e-12);
        check_extrinsic(&[1.0, -2.0, 0.5], -0.7, &mut out, &mut scratch);
        let want1 = 2.0 * (t(-0.7) * t(1.0) * t(0.5)).atanh();
        assert!((out[1] - want1).abs() < 1e-12);
        // Large magnitudes keep their order instead of saturating.
        check_extrinsic(&[60.0, 45.0, 80.0], f64::INFINITY, &mut out, &mut scratch);
        assert!(out[2] > 44.0 && out[2] < 45.0 && out[0] < out[1]);
    }

    #[test]
    fn noiseless_codeword_decodes_immediately() {
        let g = build_graph(1000, &DegreeProfile::default_ldpc(), GraphKind::ParityCheck, 3).unwrap();
        let enc = LdpcEncoder::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let c = enc.random_codeword(&mut rng);
            let llr: Vec<f64> = c.iter().map(|&b| if b == 0 { 8.0 } else { -8.0 }).collect();
            let out = bp_decode(&g, &llr, 50).unwrap();
            assert!(out.converged && out.iterations <= 2);
            assert_eq!(out.bits, c);
        }
    }

    #[test]
    fn no_information_does_not_converge() {
        let g = build_graph(1000, &DegreeProfile::default_ldpc(), GraphKind::ParityCheck, 3).unwrap();
        let out = bp_decode(&g, &vec![0.0; 1000], 30).unwrap();
        assert!(!out.converged);
    }

    #[test]
    fn size_mismatch() {
        let g = build_graph(100, &DegreeProfile::regular(3, 6), GraphKind::ParityCheck, 3).unwrap();
        assert!(bp_decode(&g, &[0.0; 99], 10).is_err());
    }

    #[test]
    fn noisy_decoding_recovers_and_syndrome_is_sound() {
        let g = build_graph(2000, &DegreeProfile::default_ldpc(), GraphKind::ParityCheck, 5).unwrap();
        let enc = LdpcEncoder::new(&g);
        let map = ConstellationMap::pam2(3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let c = enc.random_codeword(&mut rng);
            let s = map.map(&c).unwrap();
            let w: Vec<f64> = s
                .iter()
                .map(|&x| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    wrap(x + 0.3 * z, 3.0)
                })
                .collect();
            let llr = wrapped_gaussian_llr(&obs(w, 0.09), &map, 3).unwrap();
            let out = bp_decode(&g, &llr, 100).unwrap();
            assert!(out.converged);
            assert!(g.syndrome_ok(&out.bits));
            assert_eq!(out.bits, c);
        }
    }

    #[test]
    fn rate_zero_graph_is_unbounded() {
        let checks: Vec<Vec<usize>> = (0..200).map(|v| vec![v]).collect();
        let g = TannerGraph::from_checks(GraphKind::ParityCheck, 200, &checks).unwrap();
        let map = ConstellationMap::pam2(3.0).unwrap();
        let cfg = ThresholdConfig { blocks_per_probe: 2, ..Default::default() };
        let t = find_noise_threshold(&g, &map, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(t.unbounded);
        assert_eq!(t.noise_var, cfg.hi);
    }

    #[test]
    fn bracket_failure_carries_probes() {
        let g = build_graph(500, &DegreeProfile::default_ldpc(), GraphKind::ParityCheck, 3).unwrap();
        let map = ConstellationMap::pam2(3.0).unwrap();
        let cfg = ThresholdConfig { lo: 0.5, hi: 0.8, blocks_per_probe: 2, ..Default::default() };
        match find_noise_threshold(&g, &map, &cfg, &mut ChaCha8Rng::seed_from_u64(1)) {
            Err(Error::Bracket { probes, .. }) => assert_eq!(probes.len(), 1),
            other => panic!("expected bracket error, got {other:?}"),
        }
    }

    #[test]
    fn ber_monotone_over_probes() {
        let g = build_graph(2000, &DegreeProfile::default_ldpc(), GraphKind::ParityCheck, 5).unwrap();
        let map = ConstellationMap::pam2(3.0).unwrap();
        let cfg = ThresholdConfig { blocks_per_probe: 4, tolerance: 0.01, ..Default::default() };
        let t = find_noise_threshold(&g, &map, &cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let mut probes = t.probes.clone();
        probes.sort_by(|a, b| a.noise_var.partial_cmp(&b.noise_var).unwrap());
        for w in probes.windows(2) {
            let total = (w[0].blocks * g.n_var()) as f64;
            let se = (w[1].ber.max(1.0 / total) / total).sqrt();
            assert!(w[1].ber + se >= w[0].ber, "{:?}", probes);
        }
        assert!(t.noise_var > 0.1 && t.noise_var < 0.25, "{}", t.noise_var);
    }
}
