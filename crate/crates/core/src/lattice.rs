//! Scalar modulo-A lattice arithmetic and the shared dither.
//!
//! The lattice is `A·Z` in every coordinate. Reduction maps a real onto the
//! half-open fundamental cell `[-A/2, A/2)`; a value sitting exactly on a
//! half-multiple is sent to `-A/2` (the nearest multiple is rounded up).

use rand::Rng;

use crate::error::{Error, Result};

/// Reduces a single value into `[-a/2, a/2)`.
///
/// Infallible variant used on hot paths; callers guarantee `a > 0` and a
/// finite `x`.
#[inline]
pub fn wrap(x: f64, a: f64) -> f64 {
    let q = (x / a + 0.5).floor();
    let mut r = x - q * a;
    // x/a can round across an integer boundary; pull the residue back in.
    let half = 0.5 * a;
    if r >= half {
        r -= a;
    } else if r < -half {
        r += a;
    }
    r
}

fn check_modulo(a: f64) -> Result<()> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("modulo size must be positive, got {a}")))
    }
}

/// `x mod A`, entrywise.
pub fn mod_reduce(x: &[f64], a: f64) -> Result<Vec<f64>> {
    check_modulo(a)?;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v.is_finite() {
                Ok(wrap(v, a))
            } else {
                Err(Error::InvalidInput(format!("entry {i} is not finite ({v})")))
            }
        })
        .collect()
}

/// The mod-A squared distance `Σ ((b_i - a_i) mod A)²`.
pub fn mod_distance(a: &[f64], b: &[f64], modulo: f64) -> Result<f64> {
    check_modulo(modulo)?;
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = wrap(y - x, modulo);
            d * d
        })
        .sum())
}

/// Draws `n` i.i.d. dither samples uniform on `[-A/2, A/2)`.
pub fn sample_dither<R: Rng + ?Sized>(n: usize, a: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_modulo(a)?;
    if n == 0 {
        return Err(Error::InvalidInput("dither length must be at least 1".into()));
    }
    Ok((0..n).map(|_| (rng.random::<f64>() - 0.5) * a).collect())
}
