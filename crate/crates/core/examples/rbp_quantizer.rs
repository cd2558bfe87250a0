// Both quantization stages on a uniform target, with each stage's
// distortion against its ideal value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wz_core::codec::Codes;
use wz_core::graph::{ConstellationMap, DegreeProfile};
use wz_core::rbp::{quantize_ldgm_stage, quantize_ldpc_stage, RbpConfig};
use wz_core::Error;

pub struct Stages {
    pub d1: f64,
    pub d2: f64,
    pub ldpc_syndrome_ok: bool,
}

pub fn run_example() -> wz_core::Result<Stages> {
    let (a, alpha, p_v, d) = (3.0, 0.7332, 0.28, 0.0747);
    let n = 2_000;
    let codes = Codes::build(n, 0.953, &DegreeProfile::default_ldpc(), &DegreeProfile::default_ldgm(), 4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let target: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() - 0.5) * a).collect();

    // A diverged run still carries its best codeword.
    let best = |r: wz_core::Result<_>| match r {
        Err(Error::Divergence { best, .. }) => Ok(*best),
        other => other,
    };
    let cfg1 = RbpConfig { prior_var: 0.185, ..RbpConfig::default() };
    let s1 = best(quantize_ldpc_stage(&codes.ldpc, &ConstellationMap::pam2(a)?, &target, &cfg1, 0))?;
    let ideal1 = alpha * d + alpha * alpha * p_v;
    println!(
        "stage 1: D1 {:.4} (ideal {ideal1:.4}, {:+.2} dB), {} iterations, {} restarts",
        s1.distortion,
        10.0 * (s1.distortion / ideal1).log10(),
        s1.iterations,
        s1.restarts
    );

    let cfg2 = RbpConfig { prior_var: alpha * d, ..RbpConfig::default() };
    let map2 = ConstellationMap::pam4_gray(alpha * alpha * p_v, a)?;
    let s2 = best(quantize_ldgm_stage(&codes.ldgm, &map2, &s1.error, &cfg2, 0))?;
    println!(
        "stage 2: D2 {:.4} (ideal {:.4}), {} index bits, {} iterations",
        s2.distortion,
        alpha * d,
        s2.index.len(),
        s2.iterations
    );
    Ok(Stages {
        d1: s1.distortion,
        d2: s2.distortion,
        ldpc_syndrome_ok: codes.ldpc.syndrome_ok(&s1.code_bits),
    })
}

#[allow(dead_code)]
fn main() -> wz_core::Result<()> {
    run_example().map(|_| ())
}
