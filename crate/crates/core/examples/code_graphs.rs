// Building the first-stage LDPC and second-stage LDGM, their alist round
// trip, and the two constellations.

use wz_core::graph::{
    build_graph, build_graph_with_checks, read_alist, write_alist, ConstellationMap, DegreeProfile, GraphKind,
};

pub fn run_example() -> wz_core::Result<f64> {
    let n = 10_000;
    let ldpc = build_graph(n, &DegreeProfile::default_ldpc(), GraphKind::ParityCheck, 1)?;
    println!(
        "LDPC: {} variables, {} checks, rate {:.4}, 4-cycles: {}",
        ldpc.n_var(),
        ldpc.n_chk(),
        ldpc.rate(),
        ldpc.has_four_cycle()
    );
    println!("  variable degrees {:?}", ldpc.var_degree_counts());

    let k = (n as f64 * 0.953).round() as usize;
    let ldgm = build_graph_with_checks(k, 2 * n, &DegreeProfile::default_ldgm(), GraphKind::Generator, 2)?;
    println!("LDGM: {} information bits, {} code bits", ldgm.n_var(), ldgm.n_chk());

    let text = write_alist(&ldpc);
    let back = read_alist(&text, GraphKind::ParityCheck)?;
    assert_eq!(back, ldpc);
    println!("alist: {} lines, round trip ok", text.lines().count());

    let pam2 = ConstellationMap::pam2(3.0)?;
    let pam4 = ConstellationMap::pam4_gray(0.7332f64.powi(2) * 0.28, 3.0)?;
    println!("2-PAM levels {:?}, k = {}", pam2.levels(), pam2.k());
    println!("4-PAM levels {:.5?}, Gray labels {:?}", pam4.levels(), pam4.labels());
    Ok(ldpc.rate())
}

#[allow(dead_code)]
fn main() -> wz_core::Result<()> {
    run_example().map(|_| ())
}
