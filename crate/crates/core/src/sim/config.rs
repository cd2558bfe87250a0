//! Flat TOML configuration. Every key carries its unit or kind in its name.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::bp::ThresholdConfig;
use crate::codec::{CodecConfig, Codes, WzParams};
use crate::design::DesignConfig;
use crate::error::{Error, Result};
use crate::graph::{build_graph, build_graph_with_checks, load_graph, DegreeProfile, GraphKind};
use crate::rbp::RbpConfig;
use crate::source::SideInfoDist;

/// The configuration shipped with the crate: the design example at desk scale.
pub const DEFAULT_CONFIG: &str = include_str!("../../configs/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub p_v_variance: f64,
    pub r2_bits_per_sample: f64,
    pub epsilon_bits: f64,
    pub n_samples: usize,
    pub blocks: usize,
    pub seed: u64,
    pub threads: usize,
    pub output_dir: String,

    /// `uniform`, `gaussian` or `two_point`.
    pub side_info: String,
    pub side_info_lo_units: f64,
    pub side_info_hi_units: f64,
    pub side_info_mean_units: f64,
    pub side_info_variance: f64,
    pub side_info_p_probability: f64,
    pub side_info_a_units: f64,
    pub side_info_b_units: f64,

    // Design values; absent ones are computed or measured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_eps_units: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_p_units: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2_n_eps_variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d2_eps_variance: Option<f64>,

    pub graph_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ldpc_alist_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ldgm_alist_path: Option<String>,
    /// `degree:fraction` pairs, node perspective.
    pub ldpc_var_degrees: String,
    pub ldpc_chk_degrees: String,
    pub ldgm_var_degrees: String,
    pub ldgm_chk_degrees: String,

    pub rbp_gamma0: f64,
    pub rbp_gamma1: f64,
    pub rbp_max_iterations: usize,
    pub rbp_restart_increment: f64,
    pub rbp_max_restarts: usize,
    pub rbp_wrap_limit: usize,
    pub rbp_llr_clip: f64,
    pub ldgm_stable_iterations: usize,
    pub ldgm_init_field: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage1_prior_variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage2_prior_variance: Option<f64>,

    pub decoder_max_iterations: usize,
    pub threshold_target_ber: f64,
    pub threshold_blocks: usize,
    pub threshold_tolerance_variance: f64,
    pub threshold_lo_variance: f64,
    pub threshold_hi_variance: f64,
    pub probe_blocks: usize,

    pub bench_sizes_samples: Vec<usize>,
    pub bench_repetitions: usize,
}

fn profile_string(entries: &[(usize, f64)]) -> String {
    entries.iter().map(|(d, f)| format!("{d}:{f}")).collect::<Vec<_>>().join(", ")
}

impl Default for SimConfig {
    fn default() -> Self {
        let rbp = RbpConfig::default();
        let th = ThresholdConfig::default();
        let ldpc = DegreeProfile::default_ldpc();
        let ldgm = DegreeProfile::default_ldgm();
        SimConfig {
            p_v_variance: 0.28,
            r2_bits_per_sample: 0.953,
            epsilon_bits: 0.005,
            n_samples: 10_000,
            blocks: 50,
            seed: 1,
            threads: 1,
            output_dir: "out".into(),
            side_info: "uniform".into(),
            side_info_lo_units: -1.5,
            side_info_hi_units: 1.5,
            side_info_mean_units: 0.0,
            side_info_variance: 0.75,
            side_info_p_probability: 0.5,
            side_info_a_units: -0.866,
            side_info_b_units: 0.866,
            a_eps_units: None,
            a_p_units: None,
            sigma2_n_eps_variance: None,
            d2_eps_variance: None,
            graph_seed: 1,
            ldpc_alist_path: None,
            ldgm_alist_path: None,
            ldpc_var_degrees: profile_string(&ldpc.var),
            ldpc_chk_degrees: profile_string(&ldpc.chk),
            ldgm_var_degrees: profile_string(&ldgm.var),
            ldgm_chk_degrees: profile_string(&ldgm.chk),
            rbp_gamma0: rbp.gamma0,
            rbp_gamma1: rbp.gamma1,
            rbp_max_iterations: rbp.max_iters,
            rbp_restart_increment: rbp.restart_increment,
            rbp_max_restarts: rbp.max_restarts,
            rbp_wrap_limit: rbp.wrap_limit,
            rbp_llr_clip: rbp.llr_clip,
            ldgm_stable_iterations: rbp.stable_iters,
            ldgm_init_field: rbp.init_field,
            stage1_prior_variance: None,
            stage2_prior_variance: None,
            decoder_max_iterations: 200,
            threshold_target_ber: th.target_ber,
            threshold_blocks: th.blocks_per_probe,
            threshold_tolerance_variance: th.tolerance,
            threshold_lo_variance: th.lo,
            threshold_hi_variance: th.hi,
            probe_blocks: 20,
            bench_sizes_samples: vec![1_000, 10_000, 100_000],
            bench_repetitions: 5,
        }
    }
}

/// Parses `"2:0.3536, 3:0.4474"` into `(degree, fraction)` pairs.
pub fn parse_degrees(key: &str, s: &str) -> Result<Vec<(usize, f64)>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (d, f) = p
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("{key}: expected degree:fraction, got {p:?}")))?;
            let d = d.trim().parse().map_err(|_| Error::Config(format!("{key}: bad degree {d:?}")))?;
            let f = f.trim().parse().map_err(|_| Error::Config(format!("{key}: bad fraction {f:?}")))?;
            Ok((d, f))
        })
        .collect()
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: &str| Err(Error::Config(format!("{key}: {why}")));
        if !(self.p_v_variance > 0.0) {
            return bad("p_v_variance", "must be positive");
        }
        if !(self.r2_bits_per_sample > 0.0) {
            return bad("r2_bits_per_sample", "must be positive");
        }
        if !(self.epsilon_bits > 0.0) {
            return bad("epsilon_bits", "must be positive");
        }
        if self.n_samples == 0 {
            return bad("n_samples", "must be positive");
        }
        if self.threads == 0 {
            return bad("threads", "must be positive");
        }
        for (key, v) in [
            ("a_eps_units", self.a_eps_units),
            ("a_p_units", self.a_p_units),
            ("sigma2_n_eps_variance", self.sigma2_n_eps_variance),
            ("d2_eps_variance", self.d2_eps_variance),
            ("stage1_prior_variance", self.stage1_prior_variance),
            ("stage2_prior_variance", self.stage2_prior_variance),
        ] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return bad(key, "must be positive");
                }
            }
        }
        self.side_info_dist()?;
        self.rbp(None).validate().map_err(|e| Error::Config(e.to_string()))?;
        for (key, path) in [("ldpc_alist_path", &self.ldpc_alist_path), ("ldgm_alist_path", &self.ldgm_alist_path)] {
            if let Some(p) = path {
                if !Path::new(p).is_file() {
                    return Err(Error::io(
                        PathBuf::from(p),
                        std::io::Error::new(std::io::ErrorKind::NotFound, format!("{key} does not exist")),
                    ));
                }
            }
        }
        self.profiles()?;
        Ok(())
    }

    pub fn side_info_dist(&self) -> Result<SideInfoDist> {
        let d = match self.side_info.as_str() {
            "uniform" => SideInfoDist::Uniform {
                lo: self.side_info_lo_units,
                hi: self.side_info_hi_units,
            },
            "gaussian" => SideInfoDist::Gaussian {
                mean: self.side_info_mean_units,
                variance: self.side_info_variance,
            },
            "two_point" => SideInfoDist::TwoPoint {
                p: self.side_info_p_probability,
                a: self.side_info_a_units,
                b: self.side_info_b_units,
            },
            other => return Err(Error::Config(format!("side_info: unknown law {other:?}"))),
        };
        d.validate().map_err(|e| Error::Config(format!("side_info: {e}")))?;
        Ok(d)
    }

    /// LDPC and LDGM degree profiles.
    pub fn profiles(&self) -> Result<(DegreeProfile, DegreeProfile)> {
        let prof = |vk: &str, v: &str, ck: &str, c: &str| -> Result<DegreeProfile> {
            DegreeProfile::new(parse_degrees(vk, v)?, parse_degrees(ck, c)?).map_err(|e| Error::Config(format!("{vk}/{ck}: {e}")))
        };
        Ok((
            prof("ldpc_var_degrees", &self.ldpc_var_degrees, "ldpc_chk_degrees", &self.ldpc_chk_degrees)?,
            prof("ldgm_var_degrees", &self.ldgm_var_degrees, "ldgm_chk_degrees", &self.ldgm_chk_degrees)?,
        ))
    }

    /// Loads the alist graphs when given, otherwise builds from the profiles.
    pub fn codes(&self) -> Result<Codes> {
        let (ldpc_p, ldgm_p) = self.profiles()?;
        let n = self.n_samples;
        let k = (n as f64 * self.r2_bits_per_sample).round() as usize;
        let ldpc = match &self.ldpc_alist_path {
            Some(p) => load_graph(p, GraphKind::ParityCheck)?,
            None => build_graph(n, &ldpc_p, GraphKind::ParityCheck, self.graph_seed)?,
        };
        let ldgm = match &self.ldgm_alist_path {
            Some(p) => load_graph(p, GraphKind::Generator)?,
            None => build_graph_with_checks(k, 2 * n, &ldgm_p, GraphKind::Generator, self.graph_seed.wrapping_add(1))?,
        };
        if ldpc.n_var() != n {
            return Err(Error::Config(format!("LDPC graph has {} variables, n_samples is {n}", ldpc.n_var())));
        }
        Ok(Codes { ldpc, ldgm })
    }

    /// RBP schedule with the given a-priori variance, or the default one.
    pub fn rbp(&self, prior_var: Option<f64>) -> RbpConfig {
        RbpConfig {
            gamma0: self.rbp_gamma0,
            gamma1: self.rbp_gamma1,
            max_iters: self.rbp_max_iterations,
            restart_increment: self.rbp_restart_increment,
            max_restarts: self.rbp_max_restarts,
            wrap_limit: self.rbp_wrap_limit,
            prior_var: prior_var.unwrap_or(RbpConfig::default().prior_var),
            stable_iters: self.ldgm_stable_iterations,
            init_field: self.ldgm_init_field,
            llr_clip: self.rbp_llr_clip,
        }
    }

    pub fn threshold(&self) -> ThresholdConfig {
        ThresholdConfig {
            target_ber: self.threshold_target_ber,
            blocks_per_probe: self.threshold_blocks,
            tolerance: self.threshold_tolerance_variance,
            max_iters: self.decoder_max_iterations,
            wrap_limit: self.rbp_wrap_limit,
            lo: self.threshold_lo_variance,
            hi: self.threshold_hi_variance,
        }
    }

    pub fn design_config(&self) -> Result<DesignConfig> {
        Ok(DesignConfig {
            p_v: self.p_v_variance,
            r2: self.r2_bits_per_sample,
            epsilon: self.epsilon_bits,
            a_eps: self.a_eps_units,
            sigma2_n_eps: self.sigma2_n_eps_variance,
            d2_eps: self.d2_eps_variance,
            a_p: self.a_p_units,
            threshold: self.threshold(),
            stage1: self.rbp(None),
            stage2: self.rbp(None),
            stage1_prior: self.stage1_prior_variance,
            stage2_prior: self.stage2_prior_variance,
            decoder_iters: self.decoder_max_iterations,
            probe_blocks: self.probe_blocks,
            side_info: self.side_info_dist()?,
        })
    }

    /// Codec parameters and settings once the design values are known.
    pub fn codec(&self, a_eps: f64, a_p: f64, sigma2_n_eps: f64, d2_eps: f64) -> Result<(WzParams, CodecConfig)> {
        let params = WzParams::new(self.p_v_variance, self.r2_bits_per_sample, a_eps, a_p, self.epsilon_bits)?;
        let cfg = CodecConfig {
            stage1: self.rbp(Some(self.stage1_prior_variance.unwrap_or(sigma2_n_eps))),
            stage2: self.rbp(Some(self.stage2_prior_variance.unwrap_or(params.alpha * params.d))),
            d2_eps,
            decoder_iters: self.decoder_max_iterations,
            wrap_limit: self.rbp_wrap_limit,
        };
        Ok((params, cfg))
    }

    pub fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::Config(format!("threads: {e}")))
    }
}
