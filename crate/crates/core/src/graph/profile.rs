use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node-perspective degree distributions for the two sides of a graph.
///
/// Each entry is `(degree, fraction of nodes on that side)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub var: Vec<(usize, f64)>,
    pub chk: Vec<(usize, f64)>,
}

/// Published fractions are rounded to four decimals, so sums within this
/// tolerance are accepted and renormalised.
const SUM_TOLERANCE: f64 = 1e-3;

impl DegreeProfile {
    pub fn new(var: Vec<(usize, f64)>, chk: Vec<(usize, f64)>) -> Result<Self> {
        let p = DegreeProfile { var, chk };
        p.validate()?;
        Ok(p)
    }

    /// Both sides regular.
    pub fn regular(dv: usize, dc: usize) -> Self {
        DegreeProfile {
            var: vec![(dv, 1.0)],
            chk: vec![(dc, 1.0)],
        }
    }

    /// The channel-optimised first-stage LDPC profile: checks all of degree
    /// 12; variables 35.36% degree 2, 44.74% degree 3, 19.89% degree 9.
    pub fn default_ldpc() -> Self {
        DegreeProfile {
            var: vec![(2, 0.3536), (3, 0.4474), (9, 0.1989)],
            chk: vec![(12, 1.0)],
        }
    }

    /// Default second-stage LDGM profile, code-bit side first (`chk`) and
    /// information-bit side (`var`) near-regular.
    pub fn default_ldgm() -> Self {
        DegreeProfile {
            var: vec![(6, 0.5), (7, 0.5)],
            chk: vec![(1, 0.02), (2, 0.38), (3, 0.3), (4, 0.3)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (side, entries) in [("variable", &self.var), ("check", &self.chk)] {
            if entries.is_empty() {
                return Err(Error::InvalidInput(format!("{side} degree list is empty")));
            }
            let mut sum = 0.0;
            for &(d, f) in entries.iter() {
                if d == 0 {
                    return Err(Error::InvalidInput(format!("{side} degree must be >= 1")));
                }
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::InvalidInput(format!(
                        "{side} fraction {f} for degree {d} outside [0, 1]"
                    )));
                }
                sum += f;
            }
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::InvalidInput(format!(
                    "{side} fractions sum to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    fn normalized(entries: &[(usize, f64)]) -> Vec<(usize, f64)> {
        let sum: f64 = entries.iter().map(|e| e.1).sum();
        entries.iter().map(|&(d, f)| (d, f / sum)).collect()
    }

    pub fn avg_var_degree(&self) -> f64 {
        Self::normalized(&self.var).iter().map(|&(d, f)| d as f64 * f).sum()
    }

    pub fn avg_chk_degree(&self) -> f64 {
        Self::normalized(&self.chk).iter().map(|&(d, f)| d as f64 * f).sum()
    }

    /// Design rate of the parity-check code, `1 - avg_var / avg_chk`.
    pub fn ldpc_rate(&self) -> f64 {
        1.0 - self.avg_var_degree() / self.avg_chk_degree()
    }

    /// Splits `n` nodes across degree classes by largest remainder.
    pub(crate) fn node_degrees(entries: &[(usize, f64)], n: usize) -> Vec<usize> {
        let norm = Self::normalized(entries);
        let raw: Vec<f64> = norm.iter().map(|&(_, f)| f * n as f64).collect();
        let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
        let mut left = n - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = raw[a] - raw[a].floor();
            let rb = raw[b] - raw[b].floor();
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        let mut degrees = Vec::with_capacity(n);
        for (i, &(d, _)) in norm.iter().enumerate() {
            degrees.extend(std::iter::repeat_n(d, counts[i]));
        }
        degrees
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_profile_rate() {
        let p = DegreeProfile::default_ldpc();
        p.validate().unwrap();
        // Node perspective: 0.3536*2 + 0.4474*3 + 0.1989*9 = 3.8395 (before renormalising the 0.9999 total).
        let raw: f64 = p.var.iter().map(|&(d, f)| d as f64 * f).sum();
        assert!((raw - 3.8395).abs() < 1e-12);
        assert!((1.0 - raw / 12.0 - 0.680).abs() < 5e-4);
        assert!((p.ldpc_rate() - 0.680).abs() < 5e-4);
    }

    #[test]
    fn edge_perspective_reading_misses_the_rate() {
        // Read as edge fractions, the same numbers imply avg degree 1/Σ(λ_d/d).
        let p = DegreeProfile::default_ldpc();
        let inv: f64 = p.var.iter().map(|&(d, f)| f / d as f64).sum();
        let rate = 1.0 - (1.0 / inv) / 12.0;
        assert!((rate - 0.680).abs() > 0.05, "edge reading gives {rate}");
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(DegreeProfile::new(vec![(2, 0.5)], vec![(4, 1.0)]).is_err());
        assert!(DegreeProfile::new(vec![(0, 1.0)], vec![(4, 1.0)]).is_err());
        assert!(DegreeProfile::new(vec![], vec![(4, 1.0)]).is_err());
        assert!(DegreeProfile::new(vec![(3, 1.0)], vec![(6, 1.2)]).is_err());
    }

    #[test]
    fn largest_remainder_split() {
        let d = DegreeProfile::node_degrees(&DegreeProfile::default_ldpc().var, 10_000);
        assert_eq!(d.len(), 10_000);
        let count = |k| d.iter().filter(|&&x| x == k).count();
        assert_eq!(count(2) + count(3) + count(9), 10_000);
        assert!((count(2) as i64 - 3536).abs() <= 1);
        assert!((count(3) as i64 - 4474).abs() <= 1);
        assert!((count(9) as i64 - 1989).abs() <= 1);
    }
}
