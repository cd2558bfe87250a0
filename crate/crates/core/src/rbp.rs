//! Reinforced belief propagation used as a lossy quantizer for both stages.
//!
//! At iteration `t` every variable node's local field is its a-priori L-value
//! plus `π(t) · M(t-1)`, the previous marginal scaled by
//! `π(t) = 1 - γ0 · γ1^t`. With `γ0 = 1` the first iteration is plain BP and
//! the growing self-feedback gradually hardens the marginals onto one
//! codeword. A run that does not settle within `max_iters` is restarted from
//! scratch with `γ1` raised by `restart_increment`.
//!
//! The a-priori information comes from a wrapped Gaussian centred on the
//! target: `f(u | s) = Σ_b N(u - s + A b; 0, prior_var)`, truncated to
//! `|b| <= wrap_limit`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bp::{clip, log_add, phi, MessageState};
use crate::error::{Error, Result};
use crate::graph::{ConstellationMap, GraphKind, TannerGraph};
use crate::lattice::wrap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbpConfig {
    pub gamma0: f64,
    pub gamma1: f64,
    pub max_iters: usize,
    pub restart_increment: f64,
    pub max_restarts: usize,
    pub wrap_limit: usize,
    pub prior_var: f64,
    /// LDGM runs stop once hard decisions stay unchanged this many iterations.
    #[serde(default = "default_stable_iters")]
    pub stable_iters: usize,
    /// Scale of the random fields that seed LDGM information bits.
    #[serde(default = "default_init_field")]
    pub init_field: f64,
    /// Magnitude limit on messages and marginals.
    #[serde(default = "default_llr_clip")]
    pub llr_clip: f64,
}

fn default_llr_clip() -> f64 {
    crate::bp::LLR_CLIP
}

fn default_stable_iters() -> usize {
    5
}

fn default_init_field() -> f64 {
    0.5
}

impl Default for RbpConfig {
    fn default() -> Self {
        RbpConfig {
            gamma0: 1.0,
            gamma1: 0.9998,
            max_iters: 3000,
            restart_increment: 1e-5,
            max_restarts: 10,
            wrap_limit: 3,
            prior_var: 0.185,
            stable_iters: default_stable_iters(),
            init_field: default_init_field(),
            llr_clip: default_llr_clip(),
        }
    }
}

impl RbpConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.gamma0) || !unit(self.gamma1) {
            return Err(Error::InvalidInput(format!(
                "reinforcement constants must lie in [0, 1], got γ0={} γ1={}",
                self.gamma0, self.gamma1
            )));
        }
        if !(self.restart_increment > 0.0) {
            return Err(Error::InvalidInput("restart increment must be positive".into()));
        }
        if !(self.prior_var > 0.0) {
            return Err(Error::InvalidInput(format!(
                "prior variance must be positive, got {}",
                self.prior_var
            )));
        }
        if !(self.llr_clip > 0.0) {
            return Err(Error::InvalidInput("L-value clip must be positive".into()));
        }
        if self.wrap_limit == 0 || self.max_iters == 0 {
            return Err(Error::InvalidInput("wrap limit and iteration cap must be positive".into()));
        }
        Ok(())
    }

    /// Reinforcement weight `π(t)`.
    #[inline]
    pub fn pi(&self, t: usize) -> f64 {
        1.0 - self.gamma0 * self.gamma1.powi(t as i32)
    }
}

/// A-priori information handed to the message passer.
///
/// For a parity-check graph `Bits` holds one L-value per variable. For a
/// generator graph it holds one L-value per code bit (check node); `Pairs`
/// instead gives, for every symbol formed by code bits `2i` and `2i + 1`,
/// the log-likelihood of each 2-bit label (index = label value).
#[derive(Debug, Clone, PartialEq)]
pub enum Apriori {
    Bits(Vec<f64>),
    Pairs(Vec<[f64; 4]>),
}

/// Log-likelihood of every constellation level for every target sample,
/// indexed by label.
pub fn level_loglik(target: &[f64], map: &ConstellationMap, prior_var: f64, wrap_limit: usize) -> Result<Vec<Vec<f64>>> {
    if !(prior_var > 0.0) {
        return Err(Error::InvalidInput(format!("prior variance must be positive, got {prior_var}")));
    }
    let a = map.modulo();
    let inv2 = 0.5 / prior_var;
    let n_labels = 1usize << map.bits_per_symbol();
    Ok(target
        .iter()
        .map(|&u| {
            let mut out = vec![f64::NEG_INFINITY; n_labels];
            for (&lvl, &lab) in map.levels().iter().zip(map.labels()) {
                let mut acc = f64::NEG_INFINITY;
                for b in -(wrap_limit as i64)..=(wrap_limit as i64) {
                    acc = log_add(acc, -(u - lvl + a * b as f64).powi(2) * inv2);
                }
                out[lab as usize] = acc;
            }
            out
        })
        .collect())
}

/// Per-bit a-priori L-values `ln P(bit=0) / P(bit=1)` for quantizing
/// `target`, marginalising each bit over the labels of a multi-bit
/// constellation. Bits are emitted most significant first per symbol.
pub fn apriori_llr(target: &[f64], map: &ConstellationMap, cfg: &RbpConfig) -> Result<Vec<f64>> {
    let ll = level_loglik(target, map, cfg.prior_var, cfg.wrap_limit)?;
    let b = map.bits_per_symbol();
    let mut out = Vec::with_capacity(target.len() * b);
    for row in &ll {
        for bit in (0..b).rev() {
            let (mut l0, mut l1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (lab, &v) in row.iter().enumerate() {
                if (lab >> bit) & 1 == 0 {
                    l0 = log_add(l0, v);
                } else {
                    l1 = log_add(l1, v);
                }
            }
            out.push(clip(l0 - l1));
        }
    }
    Ok(out)
}

/// Raw outcome of a reinforced message-passing run.
#[derive(Debug, Clone, PartialEq)]
pub struct RbpRun {
    /// Hard decisions on the variable nodes: code bits for LDPC, information bits for LDGM.
    pub decisions: Vec<u8>,
    pub converged: bool,
    /// Iterations of the final attempt.
    pub iterations: usize,
    pub restarts: usize,
}

/// Runs reinforced BP with restarts. `seed` makes the run reproducible.
pub fn rbp_run(g: &TannerGraph, apriori: &Apriori, cfg: &RbpConfig, seed: u64) -> Result<RbpRun> {
    cfg.validate()?;
    match (g.kind(), apriori) {
        (GraphKind::ParityCheck, Apriori::Bits(l)) if l.len() == g.n_var() => {}
        (GraphKind::ParityCheck, _) => {
            return Err(Error::InvalidInput("parity-check quantization needs one L-value per variable".into()))
        }
        (GraphKind::Generator, Apriori::Bits(l)) if l.len() == g.n_chk() => {}
        (GraphKind::Generator, Apriori::Pairs(p)) if 2 * p.len() == g.n_chk() => {}
        (GraphKind::Generator, _) => {
            return Err(Error::InvalidInput("generator quantization needs a-priori data per code bit".into()))
        }
    }

    let mut engine = Engine::new(g, apriori);
    let mut last = None;
    for restart in 0..=cfg.max_restarts {
        let mut c = *cfg;
        c.gamma1 = (cfg.gamma1 + restart as f64 * cfg.restart_increment).min(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let (converged, iterations) = engine.run(&c, &mut rng);
        let run = RbpRun {
            decisions: engine.decisions.clone(),
            converged,
            iterations,
            restarts: restart,
        };
        if converged {
            return Ok(run);
        }
        last = Some(run);
    }
    Ok(last.expect("at least one attempt"))
}

struct Engine<'a> {
    g: &'a TannerGraph,
    apriori: &'a Apriori,
    st: MessageState,
    prev: Vec<f64>,
    decisions: Vec<u8>,
    // Channel L-values entering each LDGM code bit.
    channel: Vec<f64>,
    tanhs: Vec<f64>,
    out: Vec<f64>,
    clip: f64,
}

impl<'a> Engine<'a> {
    fn new(g: &'a TannerGraph, apriori: &'a Apriori) -> Self {
        Engine {
            g,
            apriori,
            st: MessageState::new(g),
            prev: vec![0.0; g.n_var()],
            decisions: vec![0; g.n_var()],
            channel: vec![0.0; g.n_chk()],
            tanhs: Vec::new(),
            out: Vec::new(),
            clip: crate::bp::LLR_CLIP,
        }
    }

    fn var_prior(&self, v: usize) -> f64 {
        match (self.g.kind(), self.apriori) {
            (GraphKind::ParityCheck, Apriori::Bits(l)) => l[v],
            _ => 0.0,
        }
    }

    #[inline]
    fn clip(&self, x: f64) -> f64 {
        x.clamp(-self.clip, self.clip)
    }

    fn reset<R: Rng>(&mut self, cfg: &RbpConfig, rng: &mut R) {
        self.clip = cfg.llr_clip;
        self.st.chk_to_var.fill(0.0);
        self.st.iteration = 0;
        self.prev.fill(0.0);
        let g = self.g;
        for v in 0..g.n_var() {
            let seed_field = match g.kind() {
                GraphKind::ParityCheck => 0.0,
                GraphKind::Generator => cfg.init_field * (2.0 * rng.random::<f64>() - 1.0),
            };
            let f = self.clip(self.var_prior(v) + seed_field);
            for &e in g.var_edges(v) {
                self.st.var_to_chk[e as usize] = f;
            }
        }
    }

    /// Check-side half iteration for a parity-check graph.
    fn ldpc_checks(&mut self) {
        let g = self.g;
        for c in 0..g.n_chk() {
            let r = g.check_edges(c);
            let d = r.len();
            self.out.resize(d.max(self.out.len()), 0.0);
            crate::bp::check_extrinsic(&self.st.var_to_chk[r.clone()], f64::INFINITY, &mut self.out[..d], &mut self.tanhs);
            for (k, e) in r.enumerate() {
                self.st.chk_to_var[e] = self.clip(self.out[k]);
            }
        }
    }

    /// `2 atanh(Π tanh(q/2))` over all edges of code bit `a`: its belief from the information bits.
    fn code_bit_belief(&mut self, a: usize) -> f64 {
        let r = self.g.check_edges(a);
        let q = &self.st.var_to_chk[r];
        let negative = q.iter().filter(|&&m| m < 0.0).count() % 2 == 1;
        let mag = phi(q.iter().map(|m| phi(m.abs())).sum());
        if negative {
            -mag
        } else {
            mag
        }
    }

    /// Check-side half iteration for a generator graph: code bits exchange
    /// beliefs with their symbol factor, then send extrinsic messages to the
    /// information bits.
    fn ldgm_checks(&mut self) {
        let g = self.g;
        match self.apriori {
            Apriori::Bits(l) => self.channel.copy_from_slice(l),
            Apriori::Pairs(pairs) => {
                for (i, ll) in pairs.iter().enumerate() {
                    let mu0 = self.code_bit_belief(2 * i);
                    let mu1 = self.code_bit_belief(2 * i + 1);
                    // label = (first bit << 1) | second bit; messages are ln P(0)/P(1).
                    let w = |mu: f64, bit: usize| if bit == 0 { 0.5 * mu } else { -0.5 * mu };
                    let side = |first: usize| log_add(ll[first << 1] + w(mu1, 0), ll[(first << 1) | 1] + w(mu1, 1));
                    self.channel[2 * i] = self.clip(side(0) - side(1));
                    let other = |second: usize| log_add(ll[second] + w(mu0, 0), ll[2 | second] + w(mu0, 1));
                    self.channel[2 * i + 1] = self.clip(other(0) - other(1));
                }
            }
        }
        for a in 0..g.n_chk() {
            let r = g.check_edges(a);
            let d = r.len();
            self.out.resize(d.max(self.out.len()), 0.0);
            crate::bp::check_extrinsic(&self.st.var_to_chk[r.clone()], self.channel[a], &mut self.out[..d], &mut self.tanhs);
            for (k, e) in r.enumerate() {
                self.st.chk_to_var[e] = self.clip(self.out[k]);
            }
        }
    }

    /// Variable-side half iteration with reinforcement weight `pi`. Returns
    /// how many hard decisions changed and whether any marginal is exactly zero.
    fn vars(&mut self, pi: f64) -> (usize, bool) {
        let g = self.g;
        let mut changed = 0;
        let mut undecided = false;
        for v in 0..g.n_var() {
            let edges = g.var_edges(v);
            let field = self.var_prior(v) + pi * self.prev[v];
            let total = field + edges.iter().map(|&e| self.st.chk_to_var[e as usize]).sum::<f64>();
            self.st.marginals[v] = self.clip(total);
            for &e in edges {
                self.st.var_to_chk[e as usize] = self.clip(total - self.st.chk_to_var[e as usize]);
            }
            let bit = (total < 0.0) as u8;
            changed += (bit != self.decisions[v]) as usize;
            undecided |= total == 0.0;
            self.decisions[v] = bit;
        }
        self.prev.copy_from_slice(&self.st.marginals);
        (changed, undecided)
    }

    fn run<R: Rng>(&mut self, cfg: &RbpConfig, rng: &mut R) -> (bool, usize) {
        self.reset(cfg, rng);
        let mut stable = 0;
        for t in 0..cfg.max_iters {
            match self.g.kind() {
                GraphKind::ParityCheck => self.ldpc_checks(),
                GraphKind::Generator => self.ldgm_checks(),
            }
            let (changed, undecided) = self.vars(cfg.pi(t));
            self.st.iteration = t + 1;
            match self.g.kind() {
                GraphKind::ParityCheck => {
                    if !undecided && self.g.syndrome_ok(&self.decisions) {
                        return (true, t + 1);
                    }
                }
                GraphKind::Generator => {
                    stable = if changed == 0 && t > 0 && !undecided { stable + 1 } else { 0 };
                    if stable >= cfg.stable_iters {
                        return (true, t + 1);
                    }
                }
            }
        }
        (false, cfg.max_iters)
    }
}

/// One quantization stage's output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizeResult {
    /// Bits of the chosen codeword (LDPC code bits or LDGM generator output).
    pub code_bits: Vec<u8>,
    /// Information bits of an LDGM codeword: the transmitted index. Empty for LDPC.
    pub index: Vec<u8>,
    /// Constellation image of `code_bits`.
    pub symbols: Vec<f64>,
    /// `(target - symbols) mod A`.
    pub error: Vec<f64>,
    /// Mean squared `error`.
    pub distortion: f64,
    pub converged: bool,
    pub iterations: usize,
    pub restarts: usize,
}

fn finish(target: &[f64], map: &ConstellationMap, code_bits: Vec<u8>, index: Vec<u8>, run: &RbpRun) -> Result<QuantizeResult> {
    let symbols = map.map(&code_bits)?;
    let a = map.modulo();
    let error: Vec<f64> = target.iter().zip(&symbols).map(|(&u, &s)| wrap(u - s, a)).collect();
    let distortion = error.iter().map(|e| e * e).sum::<f64>() / error.len() as f64;
    Ok(QuantizeResult {
        code_bits,
        index,
        symbols,
        error,
        distortion,
        converged: run.converged,
        iterations: run.iterations,
        restarts: run.restarts,
    })
}

fn check_target(target: &[f64], map: &ConstellationMap) -> Result<()> {
    let h = map.modulo() / 2.0;
    if let Some((i, &u)) = target.iter().enumerate().find(|(_, &u)| !(u >= -h && u < h)) {
        return Err(Error::InvalidInput(format!("target[{i}] = {u} outside [-A/2, A/2)")));
    }
    Ok(())
}

/// First-stage quantization: finds the LDPC codeword whose 2-PAM image is
/// closest to `target` in mod-A distance.
///
/// In the codec's sign convention the stage output is `c1 = -symbols`, so
/// `error = (target + c1) mod A`.
pub fn quantize_ldpc_stage(g: &TannerGraph, map: &ConstellationMap, target: &[f64], cfg: &RbpConfig, seed: u64) -> Result<QuantizeResult> {
    if g.kind() != GraphKind::ParityCheck || map.bits_per_symbol() != 1 {
        return Err(Error::InvalidInput("first stage needs a parity-check graph and 2-PAM".into()));
    }
    if target.len() != g.n_var() {
        return Err(Error::InvalidInput(format!("{} targets for {} code bits", target.len(), g.n_var())));
    }
    check_target(target, map)?;
    let apriori = Apriori::Bits(apriori_llr(target, map, cfg)?);
    let run = rbp_run(g, &apriori, cfg, seed)?;
    let res = finish(target, map, run.decisions.clone(), Vec::new(), &run)?;
    if run.converged {
        Ok(res)
    } else {
        Err(Error::Divergence {
            restarts: run.restarts,
            best: Box::new(res),
        })
    }
}

/// Second-stage quantization of `target` (the first-stage residue) with the
/// LDGM. The information bits are the index; `error` is `(target - c2) mod A`.
pub fn quantize_ldgm_stage(g: &TannerGraph, map: &ConstellationMap, target: &[f64], cfg: &RbpConfig, seed: u64) -> Result<QuantizeResult> {
    if g.kind() != GraphKind::Generator {
        return Err(Error::InvalidInput("second stage needs a generator graph".into()));
    }
    let bps = map.bits_per_symbol();
    if g.n_chk() != bps * target.len() {
        return Err(Error::InvalidInput(format!(
            "{} code bits cannot carry {} symbols of {bps} bits",
            g.n_chk(),
            target.len()
        )));
    }
    check_target(target, map)?;
    let apriori = match bps {
        1 => Apriori::Bits(apriori_llr(target, map, cfg)?),
        2 => Apriori::Pairs(
            level_loglik(target, map, cfg.prior_var, cfg.wrap_limit)?
                .into_iter()
                .map(|r| [r[0], r[1], r[2], r[3]])
                .collect(),
        ),
        _ => return Err(Error::InvalidInput("LDGM symbols carry one or two bits".into())),
    };
    let run = rbp_run(g, &apriori, cfg, seed)?;
    let code = g.generate(&run.decisions);
    let res = finish(target, map, code, run.decisions.clone(), &run)?;
    if run.converged {
        Ok(res)
    } else {
        Err(Error::Divergence {
            restarts: run.restarts,
            best: Box::new(res),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::{bp_decode, wrapped_gaussian_llr, ChannelObservation};
    use crate::graph::{build_graph, build_graph_with_checks, DegreeProfile, LdpcEncoder};
    use rand::Rng;

    fn toy_ldpc() -> TannerGraph {
        let p = DegreeProfile::new(vec![(2, 0.5), (3, 0.5)], vec![(5, 1.0)]).unwrap();
        build_graph(28, &p, GraphKind::ParityCheck, 1).unwrap()
    }

    fn uniform(n: usize, a: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (rng.random::<f64>() - 0.5) * a).collect()
    }

    #[test]
    fn apriori_symmetry_and_limits() {
        let map = ConstellationMap::pam2(3.0).unwrap();
        let cfg = RbpConfig::default();
        // 0 and the fold point -1.5 sit halfway between ±0.75.
        let l = apriori_llr(&[0.0, -1.5], &map, &cfg).unwrap();
        assert!(l[0].abs() < 1e-12 && l[1].abs() < 1e-12, "{l:?}");

        let sharp = RbpConfig { prior_var: 1e-4, ..cfg };
        let l = apriori_llr(&[-0.75, 0.75], &map, &sharp).unwrap();
        assert_eq!(l, vec![LLR_CLIP_TEST, -LLR_CLIP_TEST]);
        let ll = level_loglik(&[0.17351], &ConstellationMap::pam4_gray(0.15054, 3.0).unwrap(), 1e-4, 3).unwrap();
        let best = ll[0].iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(best, 0b11);
    }

    const LLR_CLIP_TEST: f64 = crate::bp::LLR_CLIP;

    #[test]
    fn truncation_of_wrap_sum() {
        let map = ConstellationMap::pam4_gray(0.15054, 3.0).unwrap();
        let target = uniform(500, 3.0, 4);
        let few = RbpConfig { prior_var: 0.185, wrap_limit: 3, ..RbpConfig::default() };
        let many = RbpConfig { wrap_limit: 50, ..few };
        let a = apriori_llr(&target, &map, &few).unwrap();
        let b = apriori_llr(&target, &map, &many).unwrap();
        let worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn schedule() {
        let cfg = RbpConfig::default();
        assert_eq!(cfg.pi(0), 0.0);
        let mut last = -1.0;
        for t in [0, 1, 10, 100, 1000, 3000] {
            assert!(cfg.pi(t) >= last);
            last = cfg.pi(t);
        }
        let flat = RbpConfig { gamma1: 1.0, ..cfg };
        assert_eq!(flat.pi(500), 0.0);
    }

    #[test]
    fn rejects_bad_config() {
        for bad in [
            RbpConfig { gamma0: 1.5, ..RbpConfig::default() },
            RbpConfig { restart_increment: 0.0, ..RbpConfig::default() },
            RbpConfig { prior_var: -1.0, ..RbpConfig::default() },
            RbpConfig { wrap_limit: 0, ..RbpConfig::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn without_reinforcement_matches_plain_bp() {
        // γ0 = γ1 = 1 keeps π(t) = 0: static a-priori, ordinary flooding BP.
        let g = build_graph(400, &DegreeProfile::default_ldpc(), GraphKind::ParityCheck, 2).unwrap();
        let map = ConstellationMap::pam2(3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cw = LdpcEncoder::new(&g).random_codeword(&mut rng);
        let w: Vec<f64> = map
            .map(&cw)
            .unwrap()
            .iter()
            .map(|&s| wrap(s + 0.4 * rng.sample::<f64, _>(rand_distr::StandardNormal), 3.0))
            .collect();
        let obs = ChannelObservation { w, modulo: 3.0, noise_var: 0.16 };
        let llr = wrapped_gaussian_llr(&obs, &map, 3).unwrap();
        let bp = bp_decode(&g, &llr, 50).unwrap();
        let cfg = RbpConfig { gamma0: 1.0, gamma1: 1.0, max_iters: 50, max_restarts: 0, ..RbpConfig::default() };
        let run = rbp_run(&g, &Apriori::Bits(llr), &cfg, 0).unwrap();
        assert!(bp.iterations > 0);
        assert_eq!(run.decisions, bp.bits);
        assert_eq!(run.converged, bp.converged);
        assert_eq!(run.iterations, bp.iterations);
    }

    #[test]
    fn ldpc_stage_residual_and_parity() {
        let g = toy_ldpc();
        let map = ConstellationMap::pam2(3.0).unwrap();
        let target = uniform(g.n_var(), 3.0, 5);
        let r = quantize_ldpc_stage(&g, &map, &target, &RbpConfig::default(), 0).unwrap();
        assert!(g.syndrome_ok(&r.code_bits));
        for i in 0..target.len() {
            assert!((r.error[i] - wrap(target[i] - r.symbols[i], 3.0)).abs() < 1e-12);
        }
        let d = r.error.iter().map(|e| e * e).sum::<f64>() / target.len() as f64;
        assert!((d - r.distortion).abs() < 1e-15);
    }

    #[test]
    fn single_codeword_graph() {
        // Every variable pinned by a degree-1 check: only the zero word.
        let checks: Vec<Vec<usize>> = (0..6).map(|v| vec![v]).collect();
        let g = TannerGraph::from_checks(GraphKind::ParityCheck, 6, &checks).unwrap();
        let map = ConstellationMap::pam2(3.0).unwrap();
        let target = uniform(6, 3.0, 6);
        let r = quantize_ldpc_stage(&g, &map, &target, &RbpConfig::default(), 0).unwrap();
        assert_eq!(r.code_bits, vec![0; 6]);
        for i in 0..6 {
            assert_eq!(r.error[i], wrap(target[i] + 0.75, 3.0));
        }
    }

    #[test]
    fn ldgm_stage_is_deterministic() {
        let p = DegreeProfile::new(vec![(2, 0.5), (3, 0.5)], vec![(1, 0.5), (2, 0.5)]).unwrap();
        let g = build_graph_with_checks(60, 128, &p, GraphKind::Generator, 3).unwrap();
        let map = ConstellationMap::pam4_gray(0.15054, 3.0).unwrap();
        let target: Vec<f64> = uniform(64, 1.0, 7);
        let cfg = RbpConfig { prior_var: 0.0548, ..RbpConfig::default() };
        let a = quantize_ldgm_stage(&g, &map, &target, &cfg, 11).unwrap();
        let b = quantize_ldgm_stage(&g, &map, &target, &cfg, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.code_bits, g.generate(&a.index));
        for i in 0..64 {
            assert!((a.error[i] - wrap(target[i] - a.symbols[i], 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_checks() {
        let g = toy_ldpc();
        let map = ConstellationMap::pam2(3.0).unwrap();
        assert!(quantize_ldpc_stage(&g, &map, &[0.0; 3], &RbpConfig::default(), 0).is_err());
        let mut t = vec![0.0; g.n_var()];
        t[0] = 1.5;
        assert!(quantize_ldpc_stage(&g, &map, &t, &RbpConfig::default(), 0).is_err());
        assert!(rbp_run(&g, &Apriori::Pairs(vec![[0.0; 4]; 14]), &RbpConfig::default(), 0).is_err());
    }
}
