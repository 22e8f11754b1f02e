//! Temporary: evaluate the case30 fixture against the target behaviors.
use gridots_core::ac::{solve_ac_opf, AcOpfStatus, Topology};
use gridots_core::network::parse_case;
use gridots_core::ots::{solve_traditional_dc_ots, OtsConfig};
use gridots_core::pipeline::{run_o_dc_ots, validate_topology, Outcome, PipelineConfig};

fn main() {
    let text = std::fs::read_to_string("cases/pglib_opf_case30_as__api.m").unwrap();
    let mut case = parse_case(&text).unwrap();
    if let Ok(lam) = std::env::var("LAM") {
        let lam: f64 = lam.parse().unwrap();
        let mut buses = case.buses.clone();
        for b in buses.iter_mut() {
            b.p_demand *= lam;
        }
        case = gridots_core::network::NetworkCase::new(
            case.name.clone(), case.base_mva, buses,
            case.branches.clone(), case.generators.clone(),
        ).unwrap();
    }
    let topo = Topology::full(&case);
    let out = solve_ac_opf(&case, &topo).unwrap();
    println!("baseline: {:?} {:.2}", out.status, out.solution.objective);
    if out.status != AcOpfStatus::Optimal {
        for v in out.solution.violations.iter().take(8) {
            println!("  {} {:.4}", v.constraint, v.magnitude);
        }
        return;
    }
    let base = out.solution.objective;
    if std::env::var("SHOW_BINDING").is_ok() {
        println!("dispatch: {:?}", out.solution.p_gen.iter().map(|p| (p * 100.0).round() / 100.0).collect::<Vec<_>>());
        for (e, br) in case.branches.iter().enumerate() {
            let load = out.solution.s_from[e].norm().max(out.solution.s_to[e].norm());
            if load > 0.85 * br.rate_a {
                println!("  line {} ({}-{}): |S|={:.2} rate={:.2} ({:.0}%)",
                    e + 1, br.from_bus, br.to_bus, load, br.rate_a, load / br.rate_a * 100.0);
            }
        }
        let vmin = out.solution.v.iter().cloned().fold(f64::INFINITY, f64::min);
        println!("  min |V| = {:.4}", vmin);
    }

    // single openings that help
    let mut singles: Vec<(usize, f64)> = vec![];
    for e in 1..=case.n_branch() {
        let (o, _) = validate_topology(&case, &[e], base);
        if let Outcome::Feasible { percent_delta, .. } = o {
            if percent_delta < -0.05 {
                singles.push((e, percent_delta));
            }
        }
    }
    singles.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    println!("beneficial singles: {singles:?}");

    // target pair
    let (o, _) = validate_topology(&case, &[11, 22], base);
    println!("validate {{11,22}}: {}", brief(&o));

    // dc-ots and o-dc-ots
    match solve_traditional_dc_ots(&case, &OtsConfig::default()) {
        Ok(sol) => {
            let (o, _) = validate_topology(&case, &sol.opened_lines, base);
            println!(
                "dc-ots: opened {:?} nodes {} -> {}",
                sol.opened_lines,
                sol.nodes,
                brief(&o)
            );
        }
        Err(e) => println!("dc-ots error: {e}"),
    }
    match run_o_dc_ots(&case, &PipelineConfig::default()) {
        Ok(arts) => println!(
            "o-dc-ots: opened {:?} -> {} (loss {:.3e} -> {:.3e}, c_prof {:.1})",
            arts.report.opened_lines,
            brief(&arts.report.outcome),
            arts.trace.as_ref().unwrap().initial_loss(),
            arts.trace.as_ref().unwrap().final_loss(),
            arts.chosen_c_prof,
        ),
        Err(e) => println!("o-dc-ots error: {e}"),
    }
}

fn brief(o: &Outcome) -> String {
    match o {
        Outcome::Feasible {
            ac_objective,
            percent_delta,
        } => format!("feasible {ac_objective:.2} ({percent_delta:+.2}%)"),
        Outcome::Infeasible { violations } => format!(
            "infeasible ({}, worst {})",
            violations.len(),
            violations
                .first()
                .map(|v| v.constraint.clone())
                .unwrap_or_default()
        ),
        Outcome::NotSolved { reason } => format!("not solved: {reason}"),
    }
}
