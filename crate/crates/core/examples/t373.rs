use gridots_core::network::parse_case;
use gridots_core::ots::{solve_c_dc_ots, OtsConfig};
use gridots_core::params::cold_start;
fn main() {
    let text = std::fs::read_to_string("cases/pglib_opf_case5_pjm__api.m").unwrap();
    let case = parse_case(&text).unwrap();
    let cold = cold_start(&case);
    let cfg = OtsConfig { c_prof: 373.19, ..OtsConfig::default() };
    let sol = solve_c_dc_ots(&case, &cold, &cfg).unwrap();
    println!("opened {:?} obj {:.2}", sol.opened_lines, sol.objective);
}
