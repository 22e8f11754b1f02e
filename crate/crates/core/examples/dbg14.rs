//! Temporary: evaluate the case14 fixture against the target behaviors.
use gridots_core::ac::{solve_ac_opf, AcOpfStatus, Topology};
use gridots_core::network::parse_case;
use gridots_core::ots::{solve_traditional_dc_ots, OtsConfig};
use gridots_core::pipeline::{
    exhaustive_ots, run_o_dc_ots, validate_topology, Outcome, PipelineConfig,
};

fn main() {
    let text = std::fs::read_to_string("cases/pglib_opf_case14_ieee__api.m").unwrap();
    let case = parse_case(&text).unwrap();

    let topo = Topology::full(&case);
    let out = solve_ac_opf(&case, &topo).unwrap();
    println!("baseline: {:?} {:.2}", out.status, out.solution.objective);
    if out.status != AcOpfStatus::Optimal {
        return;
    }
    let base = out.solution.objective;

    // best single openings (AC truth)
    match exhaustive_ots(&case, 1, None, 100) {
        Ok((rep, best)) => println!(
            "exhaustive k=1: best {:?} cost {:?}",
            best,
            rep.ac_objective()
        ),
        Err(e) => println!("exhaustive error: {e}"),
    }

    // traditional DC-OTS
    match solve_traditional_dc_ots(&case, &OtsConfig::default()) {
        Ok(sol) => {
            println!(
                "dc-ots: opened {:?} dc dispatch {:.2} nodes {}",
                sol.opened_lines, sol.dispatch_cost, sol.nodes
            );
            let (outcome, _) = validate_topology(&case, &sol.opened_lines, base);
            println!("dc-ots validation: {:?}", brief(&outcome));
        }
        Err(e) => println!("dc-ots error: {e}"),
    }

    // the paper's set {12,13,14}
    let (outcome, _) = validate_topology(&case, &[12, 13, 14], base);
    println!("validate {{12,13,14}}: {:?}", brief(&outcome));

    // o-dc-ots
    match run_o_dc_ots(&case, &PipelineConfig::default()) {
        Ok(arts) => println!(
            "o-dc-ots: opened {:?} outcome {:?} (loss {:.3e} -> {:.3e})",
            arts.report.opened_lines,
            brief(&arts.report.outcome),
            arts.trace.as_ref().unwrap().initial_loss(),
            arts.trace.as_ref().unwrap().final_loss()
        ),
        Err(e) => println!("o-dc-ots error: {e}"),
    }
}

fn brief(o: &Outcome) -> String {
    match o {
        Outcome::Feasible {
            ac_objective,
            percent_delta,
        } => format!("feasible {:.2} ({:+.2}%)", ac_objective, percent_delta),
        Outcome::Infeasible { violations } => format!(
            "infeasible ({} violations, worst {})",
            violations.len(),
            violations
                .first()
                .map(|v| v.constraint.clone())
                .unwrap_or_default()
        ),
        Outcome::NotSolved { reason } => format!("not solved: {reason}"),
    }
}
