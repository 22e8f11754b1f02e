//! Temporary debug harness for the OTS node relaxations.
use gridots_core::network::parse_case;
use gridots_core::ots::*;
use gridots_core::params::cold_start;

const TRIANGLE: &str = r#"
function mpc = tri
mpc.baseMVA = 100.0;
mpc.bus = [
    1  3  0.0    0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
    2  2  60.0   0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
    3  1  120.0  0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
];
mpc.gen = [
    1  50.0  0.0  300.0  -300.0  1.0  100.0  1  300.0  0.0;
    2  50.0  0.0  300.0  -300.0  1.0  100.0  1  300.0  0.0;
];
mpc.gencost = [
    2  0.0  0.0  3  0.02  1.0  0.0;
    2  0.0  0.0  3  0.04  2.0  0.0;
];
mpc.branch = [
    1  2  0.01  0.1   0.0  80.0   0.0  0.0  0.0  0.0  1  -30.0  30.0;
    2  3  0.01  0.12  0.0  100.0  0.0  0.0  0.0  0.0  1  -30.0  30.0;
    1  3  0.01  0.15  0.0  60.0   0.0  0.0  0.0  0.0  1  -30.0  30.0;
];
"#;

fn main() {
    let case = parse_case(TRIANGLE).unwrap();
    let params = cold_start(&case);
    println!("b = {:?}", params.b);
    for u in [
        [true, true, true],
        [false, true, true],
        [true, false, true],
        [true, true, false],
    ] {
        let config = OtsConfig { c_prof: 10.0, ..OtsConfig::default() };
        match solve_fixed_topology(&case, &params, &config, &u) {
            Ok(s) => println!("u={u:?} dispatch={:.4} obj={:.4}", s.dispatch_cost, s.objective),
            Err(e) => println!("u={u:?} error: {e}"),
        }
    }
    let config = OtsConfig { c_prof: 10.0, node_cap: 50, ..OtsConfig::default() };
    match solve_c_dc_ots(&case, &params, &config) {
        Ok(s) => println!("bnb: obj={:.4} opened={:?} nodes={}", s.objective, s.opened_lines, s.nodes),
        Err(e) => println!("bnb error: {e}"),
    }
}
