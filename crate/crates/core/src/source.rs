//! Source/side-information pairs `x = y_a + v` and distortion accounting.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of the decoder side information `y_a`. Parameters are in source units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SideInfoDist {
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, variance: f64 },
    /// `a` with probability `p`, otherwise `b`.
    TwoPoint { p: f64, a: f64, b: f64 },
}

impl SideInfoDist {
    pub fn variance(&self) -> f64 {
        match *self {
            SideInfoDist::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            SideInfoDist::Gaussian { variance, .. } => variance,
            SideInfoDist::TwoPoint { p, a, b } => p * (1.0 - p) * (a - b).powi(2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SideInfoDist::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            SideInfoDist::Gaussian { mean, variance } => mean.is_finite() && variance.is_finite() && variance >= 0.0,
            SideInfoDist::TwoPoint { p, a, b } => (0.0..=1.0).contains(&p) && a.is_finite() && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("bad side-information law {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            SideInfoDist::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            SideInfoDist::Gaussian { mean, variance } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + variance.sqrt() * z
            }
            SideInfoDist::TwoPoint { p, a, b } => {
                if rng.random::<f64>() < p {
                    a
                } else {
                    b
                }
            }
        }
    }
}

/// One block of source samples with its side information and correlation noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceBlock {
    pub x: Vec<f64>,
    pub y_a: Vec<f64>,
    pub v: Vec<f64>,
}

impl SourceBlock {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Draws `n` samples of `x = y_a + v` with `v ~ N(0, p_v)` independent of `y_a`.
pub fn sample_source<R: Rng + ?Sized>(
    n: usize,
    dist: &SideInfoDist,
    p_v: f64,
    rng: &mut R,
) -> Result<SourceBlock> {
    if !(p_v > 0.0 && p_v.is_finite()) {
        return Err(Error::InvalidInput(format!("P_V must be positive, got {p_v}")));
    }
    dist.validate()?;
    let noise = Normal::new(0.0, p_v.sqrt()).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut x = Vec::with_capacity(n);
    let mut y_a = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        let y = dist.sample(rng);
        let vi = noise.sample(rng);
        y_a.push(y);
        v.push(vi);
        x.push(y + vi);
    }
    Ok(SourceBlock { x, y_a, v })
}

/// Per-sample mean squared error.
pub fn mse(x: &[f64], xhat: &[f64]) -> Result<f64> {
    if x.len() != xhat.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            xhat.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::InvalidInput("empty vectors".into()));
    }
    Ok(x.iter().zip(xhat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len() as f64)
}

/// Wyner-Ziv rate `max(0, ½ log2(P_V / D))` in bits per sample.
pub fn wyner_ziv_rate(p_v: f64, d: f64) -> Result<f64> {
    if !(p_v > 0.0 && d > 0.0) {
        return Err(Error::InvalidInput(format!(
            "P_V and D must be positive, got {p_v}, {d}"
        )));
    }
    Ok((0.5 * (p_v / d).log2()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn var(x: &[f64]) -> f64 {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        x.iter().map(|a| (a - m).powi(2)).sum::<f64>() / x.len() as f64
    }

    fn cov(x: &[f64], y: &[f64]) -> f64 {
        let mx = x.iter().sum::<f64>() / x.len() as f64;
        let my = y.iter().sum::<f64>() / y.len() as f64;
        x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / x.len() as f64
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(mse(&[2.0, 0.0], &[0.0, 0.0]).unwrap(), 2.0);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn wz_rate_examples() {
        assert!((wyner_ziv_rate(0.28, 0.0747).unwrap() - 0.9531).abs() < 1e-4);
        assert_eq!(wyner_ziv_rate(1.0, 1.0).unwrap(), 0.0);
        assert!((wyner_ziv_rate(4.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(wyner_ziv_rate(1.0, 2.0).unwrap(), 0.0);
        assert!(wyner_ziv_rate(0.0, 1.0).is_err());
        assert!(wyner_ziv_rate(1.0, -1.0).is_err());
    }

    #[test]
    fn nonpositive_noise_rejected() {
        let d = SideInfoDist::Gaussian { mean: 0.0, variance: 1.0 };
        assert!(sample_source(4, &d, 0.0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn tiny_noise_limit() {
        let d = SideInfoDist::Uniform { lo: -1.5, hi: 1.5 };
        let b = sample_source(1000, &d, 1e-30, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        for (x, y) in b.x.iter().zip(&b.y_a) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn variance_additivity_and_independence() {
        let laws = [
            SideInfoDist::Uniform { lo: -1.5, hi: 1.5 },
            SideInfoDist::Gaussian { mean: 0.0, variance: 0.75 },
            SideInfoDist::TwoPoint { p: 0.5, a: -0.75f64.sqrt(), b: 0.75f64.sqrt() },
        ];
        for (k, law) in laws.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
            let b = sample_source(1_000_000, law, 0.28, &mut rng).unwrap();
            let vx = var(&b.x);
            assert!((vx / (0.75 + 0.28) - 1.0).abs() < 0.01, "{law:?}: var {vx}");
            assert!(cov(&b.y_a, &b.v).abs() < 0.01);
            for i in 0..b.len() {
                assert_eq!(b.x[i], b.y_a[i] + b.v[i]);
            }
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rate_round_trip(p_v in 1e-3f64..1e3, r in 1e-3f64..8.0) {
                let d = p_v * 2f64.powf(-2.0 * r);
                let back = wyner_ziv_rate(p_v, d).unwrap();
                prop_assert!((back - r).abs() <= 1e-12 * r.max(1.0) * 10.0);
            }
        }
    }
}
