use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A PAM level set with its bit labelling.
///
/// `labels[i]` is the bit pattern (most significant bit first) carried by
/// `levels[i]`. `k` relates the modulo size to the signal power:
/// `k = A² / P_signal` for equiprobable levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationMap {
    levels: Vec<f64>,
    labels: Vec<u8>,
    bits_per_symbol: usize,
    modulo: f64,
    k: f64,
}

impl ConstellationMap {
    fn new(levels: Vec<f64>, labels: Vec<u8>, bits_per_symbol: usize, modulo: f64) -> Self {
        let power = levels.iter().map(|l| l * l).sum::<f64>() / levels.len() as f64;
        let k = modulo * modulo / power;
        ConstellationMap {
            levels,
            labels,
            bits_per_symbol,
            modulo,
            k,
        }
    }

    /// Two levels at `±A/4`; bit 0 maps to `-A/4`.
    pub fn pam2(modulo: f64) -> Result<Self> {
        if !(modulo > 0.0 && modulo.is_finite()) {
            return Err(Error::InvalidInput(format!("modulo size must be positive, got {modulo}")));
        }
        Ok(Self::new(vec![-modulo / 4.0, modulo / 4.0], vec![0, 1], 1, modulo))
    }

    /// Four uniformly spaced levels `{-3c, -c, c, 3c}` with average energy
    /// `energy` (so `c = sqrt(energy / 5)`), Gray labelled 00, 01, 11, 10.
    pub fn pam4_gray(energy: f64, modulo: f64) -> Result<Self> {
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::InvalidInput(format!("energy must be positive, got {energy}")));
        }
        if !(modulo > 0.0 && modulo.is_finite()) {
            return Err(Error::InvalidInput(format!("modulo size must be positive, got {modulo}")));
        }
        let c = (energy / 5.0).sqrt();
        Ok(Self::new(
            vec![-3.0 * c, -c, c, 3.0 * c],
            vec![0b00, 0b01, 0b11, 0b10],
            2,
            modulo,
        ))
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn modulo(&self) -> f64 {
        self.modulo
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn signal_power(&self) -> f64 {
        self.modulo * self.modulo / self.k
    }

    /// Level carrying `label`.
    #[inline]
    pub fn level_of(&self, label: u8) -> f64 {
        let i = self.labels.iter().position(|&l| l == label).expect("label outside constellation");
        self.levels[i]
    }

    /// Maps a bit stream, `bits_per_symbol` bits per symbol, onto levels.
    pub fn map(&self, bits: &[u8]) -> Result<Vec<f64>> {
        let b = self.bits_per_symbol;
        if bits.len() % b != 0 {
            return Err(Error::InvalidInput(format!(
                "bit count {} is not a multiple of {b}",
                bits.len()
            )));
        }
        // label -> level lookup
        let mut table = vec![0.0; 1 << b];
        for (lvl, &lab) in self.levels.iter().zip(&self.labels) {
            table[lab as usize] = *lvl;
        }
        Ok(bits
            .chunks(b)
            .map(|chunk| {
                let label = chunk.iter().fold(0usize, |acc, &x| (acc << 1) | (x & 1) as usize);
                table[label]
            })
            .collect())
    }

    /// The same constellation with levels and modulo multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self::new(
            self.levels.iter().map(|l| l * s).collect(),
            self.labels.clone(),
            self.bits_per_symbol,
            self.modulo * s,
        )
    }
}

/// `0 → -A/4`, `1 → +A/4`.
pub fn pam2_map(bits: &[u8], modulo: f64) -> Result<Vec<f64>> {
    ConstellationMap::pam2(modulo)?.map(bits)
}

/// Gray-mapped 4-PAM with average energy `energy`; the modulo size does not
/// affect the levels and is only recorded for `k`.
pub fn pam4_gray_map(bits: &[u8], energy: f64) -> Result<Vec<f64>> {
    ConstellationMap::pam4_gray(energy, 1.0)?.map(bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pam2_levels_and_k() {
        assert_eq!(pam2_map(&[0, 1], 3.0).unwrap(), vec![-0.75, 0.75]);
        assert_eq!(pam2_map(&[0, 0, 0], 3.0).unwrap(), vec![-0.75; 3]);
        let m = ConstellationMap::pam2(3.0).unwrap();
        assert!((m.signal_power() - 9.0 / 16.0).abs() < 1e-15);
        assert!((m.k() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn pam4_levels() {
        let energy = 0.7332f64.powi(2) * 0.28;
        let m = ConstellationMap::pam4_gray(energy, 3.0).unwrap();
        let c = m.levels()[2];
        assert!((5.0 * c * c - energy).abs() < 1e-15);
        assert!((c - 0.1735068).abs() < 1e-7);
        assert!((m.levels()[3] - 0.5205204).abs() < 1e-7);
        assert!(m.levels().iter().sum::<f64>().abs() < 1e-15);
        assert!((m.signal_power() - energy).abs() < 1e-15);
        assert_eq!(pam4_gray_map(&[0, 0, 0, 1, 1, 1, 1, 0], energy).unwrap(), m.levels().to_vec());
        assert!(pam4_gray_map(&[0, 1, 1], energy).is_err());
    }

    #[test]
    fn gray_neighbors_differ_in_one_bit() {
        for m in [ConstellationMap::pam2(3.0).unwrap(), ConstellationMap::pam4_gray(1.0, 3.0).unwrap()] {
            assert!(m.levels().windows(2).all(|w| w[0] < w[1]));
            for w in m.labels().windows(2) {
                assert_eq!((w[0] ^ w[1]).count_ones(), 1);
            }
        }
    }
}
