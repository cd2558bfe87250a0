// The five-step design calculation with the decoder threshold and the
// stage-2 distortion plugged in, plus the pieces it is made of.

use wz_core::design::{
    entropy_gap_epsilon1, find_a_eps, practical_modulo_bound, run_design_flow, DesignConfig, DesignReport,
};

pub fn run_example() -> wz_core::Result<DesignReport> {
    let mut cfg = DesignConfig::new(0.28, 0.953, 0.005);
    cfg.a_eps = Some(3.0);
    cfg.sigma2_n_eps = Some(0.185);
    cfg.d2_eps = Some(0.0577);
    let report = run_design_flow(&cfg, None, 0)?;
    print!("{}", report.table());

    let var = report.alpha * report.alpha * report.p_v + report.alpha * report.d;
    for a in [2.8, 2.9, 3.0, 3.1] {
        println!("entropy gap at A = {a:.1}: {:.5} bits", entropy_gap_epsilon1(a, var)?);
    }
    println!("smallest A with gap < 0.005: {:.2}", find_a_eps(0.005, var)?);

    // A threshold at or below the stage-2 distortion cannot be fixed by scaling.
    let err = practical_modulo_bound(3.0, report.alpha, 0.28, 0.05, 0.0577).unwrap_err();
    println!("infeasible: {err}");
    Ok(report)
}

#[allow(dead_code)]
fn main() -> wz_core::Result<()> {
    run_example().map(|_| ())
}
