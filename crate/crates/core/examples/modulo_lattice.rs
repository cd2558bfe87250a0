// Modulo-A arithmetic, mod-A distance and the dither that makes the folded
// source uniform whatever the source looks like.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wz_core::lattice::{mod_distance, mod_reduce, sample_dither};
use wz_core::source::{sample_source, SideInfoDist};

pub struct Summary {
    pub folded: Vec<f64>,
    pub distance: f64,
    /// Histogram of `(αx + d) mod A` over 10 equal bins.
    pub histogram: Vec<usize>,
}

pub fn run_example() -> wz_core::Result<Summary> {
    let a = 3.0;
    let folded = mod_reduce(&[0.0, 1.7, -4.6, 1.5], a)?;
    println!("fold mod {a}: [0, 1.7, -4.6, 1.5] -> {folded:?}");

    let distance = mod_distance(&[2.9], &[-2.9], a)?;
    println!("mod-{a} distance between 2.9 and -2.9: {distance:.4}");

    // A lumpy two-point source still folds to a flat histogram once dithered.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100_000;
    let src = sample_source(n, &SideInfoDist::TwoPoint { p: 0.3, a: -1.0, b: 2.0 }, 0.28, &mut rng)?;
    let d = sample_dither(n, a, &mut rng)?;
    let alpha = 0.7332;
    let scaled: Vec<f64> = src.x.iter().zip(&d).map(|(x, d)| alpha * x + d).collect();
    let u = mod_reduce(&scaled, a)?;
    let mut histogram = vec![0; 10];
    for v in &u {
        histogram[(((v / a) + 0.5) * 10.0) as usize] += 1;
    }
    println!("dithered fold, 10 bins: {histogram:?}");
    Ok(Summary { folded, distance, histogram })
}

#[allow(dead_code)]
fn main() -> wz_core::Result<()> {
    run_example().map(|_| ())
}
