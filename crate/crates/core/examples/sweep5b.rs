//! Temporary: refine load scale for the chosen 5-bus configuration.
use gridots_core::ac::{solve_ac_opf, AcOpfStatus, Topology};
use gridots_core::network::{parse_case, NetworkCase};

fn solve(case: &NetworkCase, open: &[usize]) -> Option<f64> {
    let mut topo = Topology::full(case);
    for &e in open {
        topo.in_service[e] = false;
    }
    if topo.check_islanding(case).is_err() {
        return None;
    }
    match solve_ac_opf(case, &topo) {
        Ok(out) if out.status == AcOpfStatus::Optimal => Some(out.solution.objective),
        _ => None,
    }
}

fn main() {
    let text = std::fs::read_to_string("cases/pglib_opf_case5_pjm__api.m").unwrap();
    let base = parse_case(&text).unwrap();
    for lam_i in 0..13 {
        let lam = 1.14 + 0.02 * lam_i as f64;
        let mut buses = base.buses.clone();
        for b in buses.iter_mut() {
            b.p_demand *= lam;
        }
        let mut gens = base.generators.clone();
        gens[4].c1 = 1000.0;
        gens[0].c1 = 1400.0;
        gens[1].c1 = 1500.0;
        gens[2].c1 = 4000.0;
        gens[3].c1 = 3000.0;
        for g in gens.iter_mut() {
            g.c2 = 0.0;
        }
        gens[0].p_max *= 3.0;
        gens[1].p_max *= 3.0;
        gens[4].p_max = 3.0;
        let case = NetworkCase::new(
            base.name.clone(),
            base.base_mva,
            buses,
            base.branches.clone(),
            gens,
        )
        .unwrap();
        let Some(full) = solve(&case, &[]) else {
            println!("lam={lam:.2} full infeasible");
            continue;
        };
        let ds: Vec<String> = (0..6)
            .map(|e| {
                solve(&case, &[e])
                    .map(|o| format!("{:+.2}", (o - full) / full * 100.0))
                    .unwrap_or_else(|| "INF".into())
            })
            .collect();
        // a couple of pairs around line 3
        let pair35 = solve(&case, &[2, 4]).map(|o| format!("{:+.2}", (o - full) / full * 100.0)).unwrap_or("INF".into());
        let pair34 = solve(&case, &[2, 3]).map(|o| format!("{:+.2}", (o - full) / full * 100.0)).unwrap_or("INF".into());
        let pair36 = solve(&case, &[2, 5]).map(|o| format!("{:+.2}", (o - full) / full * 100.0)).unwrap_or("INF".into());
        println!("lam={lam:.2} full={full:.0} singles={ds:?} {{3,5}}={pair35} {{3,4}}={pair34} {{3,6}}={pair36}");
    }
}
