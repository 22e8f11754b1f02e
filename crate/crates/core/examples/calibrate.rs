//! Ad-hoc calibration harness: solve AC-OPF on a case with the loads scaled
//! by a sweep of factors and print the objective for each.
use gridots_core::ac::{solve_ac_opf, Topology};
use gridots_core::network::parse_case;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let path = &args[1];
    let lo: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(1.0);
    let hi: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1.0);
    let steps: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(1);
    let text = std::fs::read_to_string(path).unwrap();
    let base = parse_case(&text).unwrap();

    for k in 0..steps.max(1) {
        let lam = if steps <= 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (steps - 1) as f64
        };
        let mut case = base.clone();
        let buses = case.buses.clone();
        let mut scaled = Vec::new();
        for mut b in buses {
            b.p_demand *= lam;
            scaled.push(b);
        }
        case = gridots_core::network::NetworkCase::new(
            case.name.clone(),
            case.base_mva,
            scaled,
            case.branches.clone(),
            case.generators.clone(),
        )
        .unwrap();
        let mut topo = Topology::full(&case);
        if let Ok(open) = std::env::var("OPEN_LINE") {
            for tok in open.split(',') {
                let e: usize = tok.parse().unwrap();
                topo.in_service[e - 1] = false;
            }
        }
        match solve_ac_opf(&case, &topo) {
            Ok(out) => println!(
                "lambda={lam:.6}  status={:?}  objective={:.2}  kkt={:.2e}",
                out.status, out.solution.objective, out.kkt_residual
            ),
            Err(e) => println!("lambda={lam:.6}  error: {e}"),
        }
    }
}
