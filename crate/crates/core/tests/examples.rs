mod modulo_lattice {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/modulo_lattice.rs"));
}

mod side_information {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/side_information.rs"));
}

mod code_graphs {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/code_graphs.rs"));
}

mod channel_decoding {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/channel_decoding.rs"));
}

mod rbp_quantizer {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/rbp_quantizer.rs"));
}

mod wz_round_trip {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/wz_round_trip.rs"));
}

mod design_flow {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/design_flow.rs"));
}

mod monte_carlo_run {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/monte_carlo_run.rs"));
}

#[test]
fn modulo_lattice_runs() {
    let s = modulo_lattice::run_example().expect("modulo example should run");
    let expect = [0.0, -1.3, 1.4, -1.5];
    for (x, e) in s.folded.iter().zip(expect) {
        assert!((x - e).abs() < 1e-12, "{:?}", s.folded);
    }
    assert!((s.distance - 0.04).abs() < 1e-12);
    let total: usize = s.histogram.iter().sum();
    for &c in &s.histogram {
        let share = c as f64 / total as f64;
        assert!((share - 0.1).abs() < 0.01, "{:?}", s.histogram);
    }
}

#[test]
fn side_information_runs() {
    let rows = side_information::run_example().expect("side-information example should run");
    assert_eq!(rows.len(), 3);
    for (_, v) in &rows {
        assert!((v - 0.28).abs() < 0.02, "{rows:?}");
    }
}

#[test]
fn code_graphs_runs() {
    let rate = code_graphs::run_example().expect("graph example should run");
    assert!((rate - 0.68).abs() < 1e-9);
}

#[test]
fn channel_decoding_runs() {
    let curve = channel_decoding::run_example().expect("channel example should run");
    assert_eq!(curve[0].1, 0.0);
    assert!(curve.windows(2).all(|w| w[1].1 >= w[0].1));
    assert!(curve.last().unwrap().1 > 0.05);
}

#[test]
fn rbp_quantizer_runs() {
    let s = rbp_quantizer::run_example().expect("quantizer example should run");
    assert!(s.ldpc_syndrome_ok);
    assert!(s.d1 < 0.30 && s.d2 < 0.09, "d1 {} d2 {}", s.d1, s.d2);
}

#[test]
fn wz_round_trip_runs() {
    let r = wz_round_trip::run_example().expect("round-trip example should run");
    assert_eq!(r.index_bits, 1906);
    assert_eq!(r.payload_bytes, 16 + 239);
    assert!(r.decoder_converged);
    assert!(r.mse < 2.0 * r.target, "mse {} target {}", r.mse, r.target);
}

#[test]
fn design_flow_runs() {
    let r = design_flow::run_example().expect("design example should run");
    assert!(r.a_p >= r.a_p_bound && r.a_p_bound >= r.a_eps);
    assert!((r.r1 - 0.68).abs() < 1e-3);
}

#[test]
fn monte_carlo_run_runs() {
    let csv = monte_carlo_run::run_example().expect("monte-carlo example should run");
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("block,mse"));
    assert_eq!(lines.count(), 2);
}
