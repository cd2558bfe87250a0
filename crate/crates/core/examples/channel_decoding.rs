// Sum-product decoding over the mod-A channel and a coarse BER curve.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use wz_core::bp::{bp_decode, measure_ber, wrapped_gaussian_llr, ChannelObservation, ThresholdConfig};
use wz_core::graph::{build_graph, ConstellationMap, DegreeProfile, GraphKind, LdpcEncoder};
use wz_core::lattice::wrap;

pub fn run_example() -> wz_core::Result<Vec<(f64, f64)>> {
    let a = 3.0;
    let g = build_graph(2_000, &DegreeProfile::default_ldpc(), GraphKind::ParityCheck, 5)?;
    let map = ConstellationMap::pam2(a)?;

    // One codeword through the channel.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cw = LdpcEncoder::new(&g).random_codeword(&mut rng);
    let noise_var: f64 = 0.12;
    let q = map.map(&cw)?;
    let w: Vec<f64> = q
        .iter()
        .map(|&s| {
            let z: f64 = StandardNormal.sample(&mut rng);
            wrap(s + noise_var.sqrt() * z, a)
        })
        .collect();
    let obs = ChannelObservation { w, modulo: a, noise_var };
    let out = bp_decode(&g, &wrapped_gaussian_llr(&obs, &map, 3)?, 200)?;
    let errors = out.bits.iter().zip(&cw).filter(|(x, y)| x != y).count();
    println!("noise {noise_var}: converged {} after {} iterations, {errors} bit errors", out.converged, out.iterations);

    let cfg = ThresholdConfig { blocks_per_probe: 4, ..ThresholdConfig::default() };
    let mut curve = Vec::new();
    for var in [0.12, 0.16, 0.2, 0.24] {
        let p = measure_ber(&g, &map, var, &cfg, 1)?;
        println!("noise {var:.2}: BER {:.2e}", p.ber);
        curve.push((var, p.ber));
    }
    Ok(curve)
}

#[allow(dead_code)]
fn main() -> wz_core::Result<()> {
    run_example().map(|_| ())
}
