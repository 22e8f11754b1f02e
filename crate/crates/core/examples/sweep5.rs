//! Temporary: search 5-bus configurations where opening line 3 = (1,5) is
//! the best single opening with a small saving.
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
    // cost ranks: cheap trio on (g5, g1a, g1b), expensive pair on (g3, g4)
    let cheap_perms = [
        [10.0, 14.0, 15.0],
        [10.0, 15.0, 14.0],
        [14.0, 10.0, 15.0],
        [15.0, 10.0, 14.0],
        [14.0, 15.0, 10.0],
        [15.0, 14.0, 10.0],
    ];
    let pricey = [[30.0, 40.0], [40.0, 30.0]];
    let bus1_scale = [1.0, 2.0, 3.0];
    let brighton_cap = [3.0, 4.5, 6.0];
    for cp in cheap_perms {
        for ep in pricey {
            for b1 in bus1_scale {
                for g5cap in brighton_cap {
                    for lam_i in 0..5 {
                        let lam = 0.9 + 0.1 * lam_i as f64;
                        let mut buses = base.buses.clone();
                        for b in buses.iter_mut() {
                            b.p_demand *= lam;
                        }
                        let mut gens = base.generators.clone();
                        // order in file: g1a(bus1), g1b(bus1), g3, g4, g5
                        gens[4].c1 = cp[0] * 100.0;
                        gens[0].c1 = cp[1] * 100.0;
                        gens[1].c1 = cp[2] * 100.0;
                        gens[2].c1 = ep[0] * 100.0;
                        gens[3].c1 = ep[1] * 100.0;
                        for g in gens.iter_mut() {
                            g.c2 = 0.0;
                        }
                        gens[0].p_max *= b1;
                        gens[1].p_max *= b1;
                        gens[4].p_max = g5cap;
                        let case = NetworkCase::new(
                            base.name.clone(),
                            base.base_mva,
                            buses,
                            base.branches.clone(),
                            gens,
                        )
                        .unwrap();
                        let Some(full) = solve(&case, &[]) else { continue };
                        let Some(d3) = solve(&case, &[2]).map(|o| (o - full) / full * 100.0)
                        else {
                            continue;
                        };
                        if !(-3.5..=-0.5).contains(&d3) {
                            continue;
                        }
                        let others: Vec<Option<f64>> = [0usize, 1, 3, 4, 5]
                            .iter()
                            .map(|&e| solve(&case, &[e]).map(|o| (o - full) / full * 100.0))
                            .collect();
                        if others.iter().flatten().any(|&d| d < d3 + 1e-6) {
                            continue;
                        }
                        println!(
                            "cheap={cp:?} pricey={ep:?} b1={b1} g5cap={g5cap} lam={lam:.2} full={full:.0} d3={d3:.2} others={others:?}"
                        );
                    }
                }
            }
        }
    }
}
