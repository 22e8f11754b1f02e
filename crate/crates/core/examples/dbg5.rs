//! Temporary: inspect DC-predicted savings for case5 switch candidates.
use gridots_core::dcopf::{solve_dc_opf, DcOpfOptions};
use gridots_core::network::parse_case;
use gridots_core::ots::{solve_fixed_topology, OtsConfig};
use gridots_core::params::cold_start;
use gridots_core::pipeline::{run_o_dc_ots, PipelineConfig};

fn main() {
    let text = std::fs::read_to_string("cases/pglib_opf_case5_pjm__api.m").unwrap();
    let case = parse_case(&text).unwrap();
    let cold = cold_start(&case);
    let cfg = OtsConfig::default();

    let dc_full = solve_dc_opf(&case, &cold, &DcOpfOptions::model4()).unwrap();
    println!("cold DC-OPF full: {:.2}", dc_full.objective);
    for e in 0..6 {
        let mut u = vec![true; 6];
        u[e] = false;
        match solve_fixed_topology(&case, &cold, &cfg, &u) {
            Ok(s) => println!(
                "cold DC, open {}: {:.2} (saving {:.2} = {:.3}%)",
                e + 1,
                s.dispatch_cost,
                dc_full.objective - s.dispatch_cost,
                (dc_full.objective - s.dispatch_cost) / dc_full.objective * 100.0
            ),
            Err(err) => println!("cold DC, open {}: {err}", e + 1),
        }
    }

    // tuned parameters
    for c_prof in [373.19, 746.39, 1492.78] {
        let cfg_p = OtsConfig { c_prof, ..OtsConfig::default() };
        let sol = gridots_core::ots::solve_c_dc_ots(&case, &cold, &cfg_p).unwrap();
        println!(
            "cold C-DC-OTS c_prof={c_prof}: opened {:?} dispatch {:.2} obj {:.2} nodes {} gap {:.2e}",
            sol.opened_lines, sol.dispatch_cost, sol.objective, sol.nodes, sol.gap
        );
    }
    let arts = run_o_dc_ots(&case, &PipelineConfig::default()).unwrap();
    println!(
        "\ntuned: loss {:.4e} -> {:.4e}, chosen c_prof {:.2}",
        arts.trace.as_ref().unwrap().initial_loss(),
        arts.trace.as_ref().unwrap().final_loss(),
        arts.chosen_c_prof
    );
    let tuned = &arts.tuned;
    let full = solve_fixed_topology(&case, tuned, &cfg, &[true; 6]).unwrap();
    println!("tuned DC full: {:.2}", full.dispatch_cost);
    for e in 0..6 {
        let mut u = vec![true; 6];
        u[e] = false;
        match solve_fixed_topology(&case, tuned, &cfg, &u) {
            Ok(s) => println!(
                "tuned DC, open {}: {:.2} (saving {:.2} = {:.3}%)",
                e + 1,
                s.dispatch_cost,
                full.dispatch_cost - s.dispatch_cost,
                (full.dispatch_cost - s.dispatch_cost) / full.dispatch_cost * 100.0
            ),
            Err(err) => println!("tuned DC, open {}: {err}", e + 1),
        }
    }
    for c_prof in [373.19, 746.39, 1492.78] {
        let cfg_p = OtsConfig { c_prof, ..OtsConfig::default() };
        let sol = gridots_core::ots::solve_c_dc_ots(&case, tuned, &cfg_p).unwrap();
        println!(
            "tuned C-DC-OTS c_prof={c_prof}: opened {:?} dispatch {:.2} obj {:.2} nodes {} gap {:.2e}",
            sol.opened_lines, sol.dispatch_cost, sol.objective, sol.nodes, sol.gap
        );
    }
}

#[allow(dead_code)]
fn extra() {}
