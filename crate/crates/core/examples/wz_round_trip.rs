// One source block through the encoder, into a payload file image, and
// back through the decoder.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wz_core::codec::{decode, encode_lenient, CodecConfig, Codes, Payload, WzParams};
use wz_core::graph::DegreeProfile;
use wz_core::lattice::sample_dither;
use wz_core::source::{mse, sample_source, SideInfoDist};

pub struct RoundTrip {
    pub payload_bytes: usize,
    pub index_bits: usize,
    pub mse: f64,
    pub target: f64,
    pub decoder_converged: bool,
}

pub fn run_example() -> wz_core::Result<RoundTrip> {
    let n = 2_000;
    let params = WzParams::new(0.28, 0.953, 3.0, 3.6, 0.005)?;
    let codes = Codes::build(n, params.r2, &DegreeProfile::default_ldpc(), &DegreeProfile::default_ldgm(), 8)?;
    let cfg = CodecConfig::new(&params, 0.185, 0.0577);

    let seed = 42;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src = sample_source(n, &SideInfoDist::Uniform { lo: -1.5, hi: 1.5 }, params.p_v, &mut rng)?;
    let dither = sample_dither(n, params.a_p, &mut rng)?;

    let trace = encode_lenient(&src.x, &params, &codes, &dither, &cfg, seed)?;
    let bytes = Payload::new(n, params.r2, seed, trace.index.clone())?.to_bytes();
    println!("{} index bits -> {} payload bytes", trace.index.len(), bytes.len());

    // Decoder side: payload, side information and the shared dither.
    let payload = Payload::from_bytes(&bytes)?;
    let (x_hat, _, converged) = decode(&payload.bits, &src.y_a, &dither, &params, &codes, &cfg)?;
    let m = mse(&src.x, &x_hat)?;
    println!(
        "decoder converged: {converged}; MSE {m:.4} vs target {:.4} ({:+.2} dB)",
        params.d,
        10.0 * (m / params.d).log10()
    );
    Ok(RoundTrip {
        payload_bytes: bytes.len(),
        index_bits: trace.index.len(),
        mse: m,
        target: params.d,
        decoder_converged: converged,
    })
}

#[allow(dead_code)]
fn main() -> wz_core::Result<()> {
    run_example().map(|_| ())
}
