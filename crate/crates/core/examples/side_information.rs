// Drawing `x = y_a + v` under three side-information laws, and the
// Wyner-Ziv rate of the design point.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wz_core::source::{mse, sample_source, wyner_ziv_rate, SideInfoDist};

pub fn run_example() -> wz_core::Result<Vec<(String, f64)>> {
    let p_v = 0.28;
    let laws = [
        SideInfoDist::Uniform { lo: -1.5, hi: 1.5 },
        SideInfoDist::Gaussian { mean: 0.0, variance: 0.75 },
        SideInfoDist::TwoPoint { p: 0.5, a: -0.866, b: 0.866 },
    ];
    let mut out = Vec::new();
    for law in laws {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = sample_source(200_000, &law, p_v, &mut rng)?;
        // Side information alone as the estimate: error is exactly v.
        let d = mse(&b.x, &b.y_a)?;
        println!("{law:?}: var(y_a) {:.3}, mse(x, y_a) {d:.4}", law.variance());
        out.push((format!("{law:?}"), d));
    }
    let r = wyner_ziv_rate(p_v, 0.0747)?;
    println!("R_WZ(0.0747) = {r:.4} bits/sample");
    Ok(out)
}

#[allow(dead_code)]
fn main() -> wz_core::Result<()> {
    run_example().map(|_| ())
}
