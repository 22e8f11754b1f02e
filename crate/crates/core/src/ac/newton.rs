//! Newton-Raphson AC power flow in polar coordinates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{branch_flows, bus_injections, ybus, AcSolution, Topology, PF_TOLERANCE};
use crate::error::SolveError;
use crate::network::NetworkCase;

const MAX_ITER: usize = 50;

/// Fixed setpoints driving a power-flow solve: real dispatch per generator
/// and a voltage setpoint per generator bus.
#[derive(Debug, Clone)]
pub struct Dispatch {
    pub p_gen: Vec<f64>,
    pub v_set: Vec<f64>,
}

impl Dispatch {
    /// Scheduled values from the case file (Pg / Vg columns).
    pub fn from_case(case: &NetworkCase) -> Self {
        Dispatch {
            p_gen: case.generators.iter().map(|g| g.p_start).collect(),
            v_set: case.generators.iter().map(|g| g.v_setpoint).collect(),
        }
    }

    /// Setpoints extracted from a solved operating point.
    pub fn from_solution(case: &NetworkCase, sol: &AcSolution) -> Self {
        Dispatch {
            p_gen: sol.p_gen.clone(),
            v_set: (0..case.n_gen())
                .map(|g| sol.v[case.gen_position(g)])
                .collect(),
        }
    }
}

/// Solve the power-flow equations for the given topology and setpoints.
///
/// Generator buses other than the slack are treated as PV buses (fixed
/// net real injection, fixed voltage magnitude); the rest are PQ. Reactive
/// output is split evenly among the generators of a bus, and the slack
/// residual real power is absorbed by the first slack-bus generator.
pub fn newton_power_flow(
    case: &NetworkCase,
    topology: &Topology,
    dispatch: &Dispatch,
) -> Result<AcSolution, SolveError> {
    if dispatch.p_gen.len() != case.n_gen() || dispatch.v_set.len() != case.n_gen() {
        return Err(SolveError::Invalid(
            "dispatch length does not match generator count".into(),
        ));
    }
    topology.check_islanding(case)?;

    let n = case.n_bus();
    let slack = case.slack_position();
    let y = ybus(case, topology);

    // Bus classification from the generators actually present.
    let mut gens_at = vec![Vec::new(); n];
    for g in 0..case.n_gen() {
        gens_at[case.gen_position(g)].push(g);
    }
    let is_pv: Vec<bool> = (0..n).map(|i| i != slack && !gens_at[i].is_empty()).collect();

    // Net scheduled injections.
    let mut p_sched = vec![0.0; n];
    for i in 0..n {
        p_sched[i] = -case.buses[i].p_demand;
        for &g in &gens_at[i] {
            p_sched[i] += dispatch.p_gen[g];
        }
    }
    let q_sched: Vec<f64> = (0..n).map(|i| -case.buses[i].q_demand).collect();

    let mut v = vec![1.0; n];
    let mut theta = vec![0.0; n];
    for i in 0..n {
        if let Some(&g) = gens_at[i].first() {
            v[i] = dispatch.v_set[g];
        }
    }

    // Unknown ordering: theta at non-slack buses, then v at PQ buses.
    let theta_vars: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let v_vars: Vec<usize> = (0..n).filter(|&i| i != slack && !is_pv[i]).collect();
    let nth = theta_vars.len();
    let nv = v_vars.len();
    let dim = nth + nv;

    let mut converged = false;
    for _ in 0..MAX_ITER {
        let inj = bus_injections(&y, &v, &theta);
        let mut mismatch = DVector::zeros(dim);
        for (k, &i) in theta_vars.iter().enumerate() {
            mismatch[k] = inj[i].re - p_sched[i];
        }
        for (k, &i) in v_vars.iter().enumerate() {
            mismatch[nth + k] = inj[i].im - q_sched[i];
        }
        if mismatch.amax() <= PF_TOLERANCE {
            converged = true;
            break;
        }

        let jac = jacobian(&y, &v, &theta, &theta_vars, &v_vars);
        let delta = jac
            .lu()
            .solve(&mismatch)
            .ok_or_else(|| SolveError::Singular("power-flow Jacobian".into()))?;
        if !delta.iter().all(|d| d.is_finite()) {
            return Err(SolveError::Singular("power-flow Jacobian".into()));
        }
        for (k, &i) in theta_vars.iter().enumerate() {
            theta[i] -= delta[k];
        }
        for (k, &i) in v_vars.iter().enumerate() {
            v[i] -= delta[nth + k];
        }
    }

    let inj = bus_injections(&y, &v, &theta);
    let (s_from, s_to) = branch_flows(case, topology, &v, &theta);

    // Recover per-generator dispatch.
    let mut p_gen = dispatch.p_gen.clone();
    let mut q_gen = vec![0.0; case.n_gen()];
    for i in 0..n {
        if gens_at[i].is_empty() {
            continue;
        }
        let q_required = inj[i].im + case.buses[i].q_demand;
        let share = q_required / gens_at[i].len() as f64;
        for &g in &gens_at[i] {
            q_gen[g] = share;
        }
        if i == slack {
            let p_required = inj[i].re + case.buses[i].p_demand;
            let others: f64 = gens_at[i][1..].iter().map(|&g| dispatch.p_gen[g]).sum();
            p_gen[gens_at[i][0]] = p_required - others;
        }
    }

    let objective = case
        .generators
        .iter()
        .zip(p_gen.iter())
        .map(|(g, &p)| g.cost(p))
        .sum();

    Ok(AcSolution {
        v,
        theta,
        p_gen,
        q_gen,
        s_from,
        s_to,
        objective,
        converged,
        violations: vec![],
    })
}

/// Power-flow Jacobian [dP/dtheta dP/dV; dQ/dtheta dQ/dV] restricted to the
/// unknown columns.
fn jacobian(
    y: &DMatrix<Complex64>,
    v: &[f64],
    theta: &[f64],
    theta_vars: &[usize],
    v_vars: &[usize],
) -> DMatrix<f64> {
    let n = v.len();
    let nth = theta_vars.len();
    let nv = v_vars.len();
    let mut col_of_theta = vec![usize::MAX; n];
    for (k, &i) in theta_vars.iter().enumerate() {
        col_of_theta[i] = k;
    }
    let mut col_of_v = vec![usize::MAX; n];
    for (k, &i) in v_vars.iter().enumerate() {
        col_of_v[i] = nth + k;
    }
    let mut row_of_p = vec![usize::MAX; n];
    for (k, &i) in theta_vars.iter().enumerate() {
        row_of_p[i] = k;
    }
    let mut row_of_q = vec![usize::MAX; n];
    for (k, &i) in v_vars.iter().enumerate() {
        row_of_q[i] = nth + k;
    }

    let mut jac = DMatrix::zeros(nth + nv, nth + nv);
    for i in 0..n {
        for k in 0..n {
            let yik = y[(i, k)];
            if yik.norm_sqr() == 0.0 {
                continue;
            }
            let (g, b) = (yik.re, yik.im);
            let d = theta[i] - theta[k];
            let (s, c) = d.sin_cos();
            if i == k {
                // diagonal contributions handled after the loop via sums
                continue;
            }
            let t = v[i] * v[k] * (g * c + b * s); // P term
            let u = v[i] * v[k] * (g * s - b * c); // Q term

            // dP_i/dtheta_i += -u ; dP_i/dtheta_k = u ; dP_i/dV_i += t/V_i ; dP_i/dV_k = t/V_k
            if row_of_p[i] != usize::MAX {
                let r = row_of_p[i];
                if col_of_theta[i] != usize::MAX {
                    jac[(r, col_of_theta[i])] += -u;
                }
                if col_of_theta[k] != usize::MAX {
                    jac[(r, col_of_theta[k])] += u;
                }
                if col_of_v[i] != usize::MAX {
                    jac[(r, col_of_v[i])] += t / v[i];
                }
                if col_of_v[k] != usize::MAX {
                    jac[(r, col_of_v[k])] += t / v[k];
                }
            }
            // dQ_i/dtheta_i += t ; dQ_i/dtheta_k = -t ; dQ_i/dV_i += u/V_i ; dQ_i/dV_k = u/V_k
            if row_of_q[i] != usize::MAX {
                let r = row_of_q[i];
                if col_of_theta[i] != usize::MAX {
                    jac[(r, col_of_theta[i])] += t;
                }
                if col_of_theta[k] != usize::MAX {
                    jac[(r, col_of_theta[k])] += -t;
                }
                if col_of_v[i] != usize::MAX {
                    jac[(r, col_of_v[i])] += u / v[i];
                }
                if col_of_v[k] != usize::MAX {
                    jac[(r, col_of_v[k])] += u / v[k];
                }
            }
        }
        // self-admittance contributions
        let yii = y[(i, i)];
        if row_of_p[i] != usize::MAX && col_of_v[i] != usize::MAX {
            jac[(row_of_p[i], col_of_v[i])] += 2.0 * v[i] * yii.re;
        }
        if row_of_q[i] != usize::MAX && col_of_v[i] != usize::MAX {
            jac[(row_of_q[i], col_of_v[i])] += -2.0 * v[i] * yii.im;
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_case;

    const TWO_BUS: &str = r#"
function mpc = case2
mpc.baseMVA = 100.0;
mpc.bus = [
    1  3  0.0   0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
    2  1  50.0  20.0 0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
];
mpc.gen = [
    1  50.0  0.0  100.0  -100.0  1.0  100.0  1  300.0  0.0;
];
mpc.gencost = [
    2  0.0  0.0  2  10.0  0.0;
];
mpc.branch = [
    1  2  0.1  0.3  0.0  100.0  0.0  0.0  0.0  0.0  1  -30.0  30.0;
];
"#;

    #[test]
    fn no_load_flat_fixed_point() {
        let text = TWO_BUS.replace("2  1  50.0  20.0", "2  1  0.0  0.0");
        let case = parse_case(&text).unwrap();
        let topo = Topology::full(&case);
        let dispatch = Dispatch {
            p_gen: vec![0.0],
            v_set: vec![1.0],
        };
        let sol = newton_power_flow(&case, &topo, &dispatch).unwrap();
        assert!(sol.converged);
        for i in 0..2 {
            assert!((sol.v[i] - 1.0).abs() < 1e-12);
            assert!(sol.theta[i].abs() < 1e-12);
        }
        assert!(sol.s_from[0].norm() < 1e-12);
    }

    #[test]
    fn lossy_line_from_injection_exceeds_load() {
        let case = parse_case(TWO_BUS).unwrap();
        let topo = Topology::full(&case);
        let dispatch = Dispatch {
            p_gen: vec![0.5],
            v_set: vec![1.0],
        };
        let sol = newton_power_flow(&case, &topo, &dispatch).unwrap();
        assert!(sol.converged);
        // from-side real flow = load + positive line loss
        assert!(sol.s_from[0].re > 0.5);
        let loss = sol.s_from[0].re + sol.s_to[0].re;
        assert!(loss > 0.0);
        // residual check: mismatch at the load bus
        let y = ybus(&case, &topo);
        let inj = bus_injections(&y, &sol.v, &sol.theta);
        assert!((inj[1].re + 0.5).abs() < 1e-8);
        assert!((inj[1].im + 0.2).abs() < 1e-8);
    }

    #[test]
    fn flows_self_consistent() {
        let case = parse_case(TWO_BUS).unwrap();
        let topo = Topology::full(&case);
        let dispatch = Dispatch {
            p_gen: vec![0.5],
            v_set: vec![1.0],
        };
        let sol = newton_power_flow(&case, &topo, &dispatch).unwrap();
        let (s_from, s_to) = branch_flows(&case, &topo, &sol.v, &sol.theta);
        for e in 0..case.n_branch() {
            assert!((s_from[e] - sol.s_from[e]).norm() < 1e-10);
            assert!((s_to[e] - sol.s_to[e]).norm() < 1e-10);
        }
    }
}
