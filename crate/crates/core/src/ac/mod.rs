//! Full AC machinery: bus admittance assembly, Newton-Raphson power flow,
//! an interior-point AC-OPF solver, and the feasibility validator used to
//! vet switching decisions.

mod newton;
mod opf;

pub use newton::{newton_power_flow, Dispatch};
pub use opf::{solve_ac_opf, AcOpfOptions, AcOpfStatus};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::network::NetworkCase;

/// Mismatch tolerance for a converged power-flow solution, per-unit.
pub const PF_TOLERANCE: f64 = 1e-8;
/// Constraint tolerance for the AC feasibility validator.
pub const FEAS_TOLERANCE: f64 = 1e-5;

/// Binary in-service pattern over branches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub in_service: Vec<bool>,
}

impl Topology {
    pub fn full(case: &NetworkCase) -> Self {
        Topology {
            in_service: vec![true; case.n_branch()],
        }
    }

    /// Topology with the given 1-based line numbers opened.
    pub fn with_open_lines(case: &NetworkCase, open: &[usize]) -> Result<Self, SolveError> {
        let mut in_service = vec![true; case.n_branch()];
        for &line in open {
            if line == 0 || line > case.n_branch() {
                return Err(SolveError::Invalid(format!(
                    "line number {line} out of range 1..={}",
                    case.n_branch()
                )));
            }
            in_service[line - 1] = false;
        }
        Ok(Topology { in_service })
    }

    /// 1-based numbers of opened lines.
    pub fn open_lines(&self) -> Vec<usize> {
        self.in_service
            .iter()
            .enumerate()
            .filter(|(_, &u)| !u)
            .map(|(e, _)| e + 1)
            .collect()
    }

    /// Check that every bus carrying demand, generation, or a shunt stays
    /// connected to the slack bus. Returns the slack component membership.
    pub fn check_islanding(&self, case: &NetworkCase) -> Result<Vec<bool>, SolveError> {
        let n = case.n_bus();
        let mut reach = vec![false; n];
        let mut stack = vec![case.slack_position()];
        reach[case.slack_position()] = true;
        while let Some(i) = stack.pop() {
            for e in 0..case.n_branch() {
                if !self.in_service[e] {
                    continue;
                }
                let (f, t) = case.endpoints(e);
                let next = if f == i {
                    t
                } else if t == i {
                    f
                } else {
                    continue;
                };
                if !reach[next] {
                    reach[next] = true;
                    stack.push(next);
                }
            }
        }
        let mut gen_buses = vec![false; n];
        for g in 0..case.n_gen() {
            gen_buses[case.gen_position(g)] = true;
        }
        for (i, bus) in case.buses.iter().enumerate() {
            let injecting = bus.p_demand != 0.0
                || bus.q_demand != 0.0
                || bus.shunt_g != 0.0
                || bus.shunt_b != 0.0
                || gen_buses[i];
            if injecting && !reach[i] {
                return Err(SolveError::Topology(format!(
                    "bus {} islanded from the slack bus",
                    bus.id
                )));
            }
        }
        Ok(reach)
    }
}

/// One violated constraint: family label, identifying index, and magnitude.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub magnitude: f64,
}

/// A solved AC operating point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcSolution {
    /// Voltage magnitudes, per bus position.
    pub v: Vec<f64>,
    /// Voltage angles (radians), slack = 0.
    pub theta: Vec<f64>,
    /// Dispatch per generator, per-unit.
    pub p_gen: Vec<f64>,
    pub q_gen: Vec<f64>,
    /// Complex from-side / to-side flows per branch (zero when out of service).
    pub s_from: Vec<Complex64>,
    pub s_to: Vec<Complex64>,
    /// Total generation cost, $/h.
    pub objective: f64,
    pub converged: bool,
    pub violations: Vec<Violation>,
}

/// Complex bus admittance matrix for an in-service pattern; bus shunts and
/// line charging included.
pub fn ybus(case: &NetworkCase, topology: &Topology) -> DMatrix<Complex64> {
    let n = case.n_bus();
    let mut y = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (e, br) in case.branches.iter().enumerate() {
        if !topology.in_service[e] {
            continue;
        }
        let (f, t) = case.endpoints(e);
        let ys = br.y_series();
        let yc = br.y_shunt_end();
        let tap = Complex64::from_polar(br.tap, br.shift);
        y[(f, f)] += (ys + yc) / (br.tap * br.tap);
        y[(f, t)] += -ys / tap.conj();
        y[(t, f)] += -ys / tap;
        y[(t, t)] += ys + yc;
    }
    for (i, bus) in case.buses.iter().enumerate() {
        y[(i, i)] += Complex64::new(bus.shunt_g, bus.shunt_b);
    }
    y
}

/// Per-branch admittance blocks (Y_ff, Y_ft, Y_tf, Y_tt) of the two-port.
pub fn branch_admittance_blocks(
    br: &crate::network::Branch,
) -> (Complex64, Complex64, Complex64, Complex64) {
    let ys = br.y_series();
    let yc = br.y_shunt_end();
    let tap = Complex64::from_polar(br.tap, br.shift);
    (
        (ys + yc) / (br.tap * br.tap),
        -ys / tap.conj(),
        -ys / tap,
        ys + yc,
    )
}

/// Complex branch flows for a voltage profile. Out-of-service branches get
/// exactly zero flow.
pub fn branch_flows(
    case: &NetworkCase,
    topology: &Topology,
    v: &[f64],
    theta: &[f64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut s_from = vec![Complex64::new(0.0, 0.0); case.n_branch()];
    let mut s_to = vec![Complex64::new(0.0, 0.0); case.n_branch()];
    for (e, br) in case.branches.iter().enumerate() {
        if !topology.in_service[e] {
            continue;
        }
        let (f, t) = case.endpoints(e);
        let vf = Complex64::from_polar(v[f], theta[f]);
        let vt = Complex64::from_polar(v[t], theta[t]);
        let (yff, yft, ytf, ytt) = branch_admittance_blocks(br);
        s_from[e] = vf * (yff * vf + yft * vt).conj();
        s_to[e] = vt * (ytf * vf + ytt * vt).conj();
    }
    (s_from, s_to)
}

/// Net complex injection V .* conj(Y V) at every bus.
pub fn bus_injections(y: &DMatrix<Complex64>, v: &[f64], theta: &[f64]) -> Vec<Complex64> {
    let n = v.len();
    let volt: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(v[i], theta[i]))
        .collect();
    (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                let yik = y[(i, k)];
                if yik.norm_sqr() > 0.0 {
                    acc += yik * volt[k];
                }
            }
            volt[i] * acc.conj()
        })
        .collect()
}

/// Signed apparent-flow targets S^{f,AC}: from-side magnitude carrying the
/// sign of the real part, comparable to the signed DC flow.
pub fn apparent_flow_targets(sol: &AcSolution) -> Vec<f64> {
    sol.s_from
        .iter()
        .map(|s| {
            let mag = s.norm();
            if s.re < 0.0 {
                -mag
            } else {
                mag
            }
        })
        .collect()
}

/// Evaluate every AC-OPF constraint family on a candidate operating point.
/// Returns an empty list iff all constraints hold to [`FEAS_TOLERANCE`].
pub fn check_feasibility(
    case: &NetworkCase,
    topology: &Topology,
    sol: &AcSolution,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let tol = FEAS_TOLERANCE;

    for (i, bus) in case.buses.iter().enumerate() {
        if sol.v[i] < bus.v_min - tol {
            out.push(Violation {
                constraint: format!("voltage_lower bus {}", bus.id),
                magnitude: bus.v_min - sol.v[i],
            });
        }
        if sol.v[i] > bus.v_max + tol {
            out.push(Violation {
                constraint: format!("voltage_upper bus {}", bus.id),
                magnitude: sol.v[i] - bus.v_max,
            });
        }
    }

    for (g, gen) in case.generators.iter().enumerate() {
        let checks = [
            ("p_min", gen.p_min - sol.p_gen[g]),
            ("p_max", sol.p_gen[g] - gen.p_max),
            ("q_min", gen.q_min - sol.q_gen[g]),
            ("q_max", sol.q_gen[g] - gen.q_max),
        ];
        for (label, excess) in checks {
            if excess > tol {
                out.push(Violation {
                    constraint: format!("dispatch_{label} gen {}", g + 1),
                    magnitude: excess,
                });
            }
        }
    }

    let (s_from, s_to) = branch_flows(case, topology, &sol.v, &sol.theta);
    for (e, br) in case.branches.iter().enumerate() {
        if !topology.in_service[e] {
            continue;
        }
        let worst = s_from[e].norm().max(s_to[e].norm());
        if worst > br.rate_a + tol {
            out.push(Violation {
                constraint: format!("thermal line {}", e + 1),
                magnitude: worst - br.rate_a,
            });
        }
        let (f, t) = case.endpoints(e);
        let d = sol.theta[f] - sol.theta[t];
        if d < br.ang_min - tol || d > br.ang_max + tol {
            out.push(Violation {
                constraint: format!("angle_difference line {}", e + 1),
                magnitude: (d - br.ang_max).max(br.ang_min - d),
            });
        }
    }

    // Nodal balance residual with the candidate dispatch.
    let y = ybus(case, topology);
    let inj = bus_injections(&y, &sol.v, &sol.theta);
    let mut p_bus = vec![0.0; case.n_bus()];
    let mut q_bus = vec![0.0; case.n_bus()];
    for g in 0..case.n_gen() {
        p_bus[case.gen_position(g)] += sol.p_gen[g];
        q_bus[case.gen_position(g)] += sol.q_gen[g];
    }
    for (i, bus) in case.buses.iter().enumerate() {
        let res_p = (p_bus[i] - bus.p_demand - inj[i].re).abs();
        let res_q = (q_bus[i] - bus.q_demand - inj[i].im).abs();
        if res_p > tol || res_q > tol {
            out.push(Violation {
                constraint: format!("balance bus {}", bus.id),
                magnitude: res_p.max(res_q),
            });
        }
    }

    if sol.theta[case.slack_position()].abs() > tol {
        out.push(Violation {
            constraint: "slack_reference".into(),
            magnitude: sol.theta[case.slack_position()].abs(),
        });
    }

    out
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
    fn ybus_two_bus() {
        let case = parse_case(TWO_BUS).unwrap();
        let y = ybus(&case, &Topology::full(&case));
        let ys = Complex64::new(1.0, -3.0); // 1/(0.1+0.3j)
        assert!((y[(0, 0)] - ys).norm() < 1e-12);
        assert!((y[(0, 1)] + ys).norm() < 1e-12);
        assert!((y[(1, 1)] - ys).norm() < 1e-12);
    }

    #[test]
    fn apparent_targets_signed() {
        let sol = AcSolution {
            v: vec![],
            theta: vec![],
            p_gen: vec![],
            q_gen: vec![],
            s_from: vec![
                Complex64::new(0.8, 0.0),
                Complex64::new(-0.6, 0.3),
                Complex64::new(0.0, 0.0),
            ],
            s_to: vec![],
            objective: 0.0,
            converged: true,
            violations: vec![],
        };
        let t = apparent_flow_targets(&sol);
        assert!((t[0] - 0.8).abs() < 1e-12);
        assert!((t[1] + 0.45_f64.sqrt()).abs() < 1e-12);
        assert_eq!(t[2], 0.0);
    }

    #[test]
    fn constructed_voltage_violation() {
        let case = parse_case(TWO_BUS).unwrap();
        let topo = Topology::full(&case);
        let sol = AcSolution {
            v: vec![1.2, 1.0],
            theta: vec![0.0, 0.0],
            p_gen: vec![0.5],
            q_gen: vec![0.2],
            s_from: vec![],
            s_to: vec![],
            objective: 0.0,
            converged: true,
            violations: vec![],
        };
        let viols = check_feasibility(&case, &topo, &sol);
        let v = viols
            .iter()
            .find(|v| v.constraint.starts_with("voltage_upper"))
            .expect("voltage violation expected");
        assert!((v.magnitude - 0.1).abs() < 1e-9);
    }

    #[test]
    fn islanding_detected() {
        let case = parse_case(TWO_BUS).unwrap();
        let topo = Topology {
            in_service: vec![false],
        };
        assert!(topo.check_islanding(&case).is_err());
    }
}
