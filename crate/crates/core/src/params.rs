//! DC power-flow parameter vectors (b, gamma, rho, psi): cold-start from
//! impedance data, hot-start from a nominal AC solution, and tuned variants.

use serde::{Deserialize, Serialize};

use crate::ac::AcSolution;
use crate::error::SolveError;
use crate::network::NetworkCase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Cold,
    Hot,
    Tuned,
}

/// Parameters of one DC power-flow model instance. `b` and `rho` have one
/// entry per branch, `gamma` one per bus, `psi` one per branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcParameters {
    pub b: Vec<f64>,
    pub gamma: Vec<f64>,
    pub rho: Vec<f64>,
    pub psi: Vec<f64>,
    pub provenance: Provenance,
}

impl DcParameters {
    pub fn validate(&self, case: &NetworkCase) -> Result<(), SolveError> {
        let e = case.n_branch();
        let n = case.n_bus();
        if self.b.len() != e || self.rho.len() != e || self.psi.len() != e || self.gamma.len() != n
        {
            return Err(SolveError::Invalid(
                "parameter vector lengths do not match the case".into(),
            ));
        }
        let finite = self
            .b
            .iter()
            .chain(&self.gamma)
            .chain(&self.rho)
            .chain(&self.psi)
            .all(|v| v.is_finite());
        if !finite {
            return Err(SolveError::Invalid("non-finite DC parameter".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameter serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, SolveError> {
        serde_json::from_str(text)
            .map_err(|e| SolveError::Invalid(format!("bad parameter JSON: {e}")))
    }
}

/// Cold start: b_jk = Im(-1/z_jk) = x / (r^2 + x^2), all bias vectors zero.
pub fn cold_start(case: &NetworkCase) -> DcParameters {
    let b = case
        .branches
        .iter()
        .map(|br| br.x / (br.r * br.r + br.x * br.x))
        .collect();
    DcParameters {
        b,
        gamma: vec![0.0; case.n_bus()],
        rho: vec![0.0; case.n_branch()],
        psi: vec![0.0; case.n_branch()],
        provenance: Provenance::Cold,
    }
}

/// sin(d)/d with a series branch across the removable singularity.
fn sinc(d: f64) -> f64 {
    if d.abs() < 1e-6 {
        1.0 - d * d / 6.0
    } else {
        d.sin() / d
    }
}

/// Hot start from a converged nominal AC solution: the localized loss model.
///
/// b^hot = b^cold * v_j v_k * sinc(theta_j - theta_k),
/// rho^hot_jk = Re(Y_jk) * v_j (v_j - v_k cos(theta_j - theta_k)),
/// gamma^hot_j = sum of rho over branches leaving j, psi = 0.
/// Transformer branches use the tap-adjusted from-side voltage v_j / tap.
pub fn hot_start(case: &NetworkCase, nominal: &AcSolution) -> Result<DcParameters, SolveError> {
    if !nominal.converged {
        return Err(SolveError::Invalid(
            "hot start requires a converged nominal AC solution".into(),
        ));
    }
    if nominal.v.len() != case.n_bus() {
        return Err(SolveError::Invalid(
            "nominal solution does not match the case".into(),
        ));
    }
    let cold = cold_start(case);
    let mut b = vec![0.0; case.n_branch()];
    let mut rho = vec![0.0; case.n_branch()];
    let mut gamma = vec![0.0; case.n_bus()];
    for (e, br) in case.branches.iter().enumerate() {
        let (f, t) = case.endpoints(e);
        let vf = nominal.v[f] / br.tap;
        let vt = nominal.v[t];
        let d = nominal.theta[f] - nominal.theta[t];
        b[e] = cold.b[e] * vf * vt * sinc(d);
        let g_series = br.y_series().re;
        rho[e] = g_series * vf * (vf - vt * d.cos());
        gamma[f] += rho[e];
    }
    Ok(DcParameters {
        b,
        gamma,
        rho,
        psi: vec![0.0; case.n_branch()],
        provenance: Provenance::Hot,
    })
}

/// Tuned parameters: the optimized (b, psi) with gamma and rho pinned to
/// zero, which is the tuning protocol's parameterization.
pub fn with_tuned(
    case: &NetworkCase,
    b_new: Vec<f64>,
    psi_new: Vec<f64>,
) -> Result<DcParameters, SolveError> {
    if b_new.len() != case.n_branch() || psi_new.len() != case.n_branch() {
        return Err(SolveError::Invalid(
            "tuned vector lengths do not match the branch count".into(),
        ));
    }
    let params = DcParameters {
        b: b_new,
        gamma: vec![0.0; case.n_bus()],
        rho: vec![0.0; case.n_branch()],
        psi: psi_new,
        provenance: Provenance::Tuned,
    };
    params.validate(case)?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ac::{newton_power_flow, Dispatch, Topology};
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
    fn cold_start_values() {
        let case = parse_case(TWO_BUS).unwrap();
        let p = cold_start(&case);
        // x/(r^2+x^2) = 0.3/0.10 = 3.0
        assert!((p.b[0] - 3.0).abs() < 1e-12);
        assert!(p.gamma.iter().all(|&g| g == 0.0));
        assert!(p.rho.iter().all(|&r| r == 0.0));
        assert!(p.psi.iter().all(|&s| s == 0.0));

        let lossless = TWO_BUS.replace("1  2  0.1  0.3", "1  2  0.0  0.5");
        let case = parse_case(&lossless).unwrap();
        assert!((cold_start(&case).b[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cold_b_positive_for_positive_reactance() {
        let case = parse_case(TWO_BUS).unwrap();
        assert!(cold_start(&case).b.iter().all(|&b| b > 0.0));
    }

    #[test]
    fn hot_start_flat_nominal_equals_cold() {
        let case = parse_case(TWO_BUS).unwrap();
        let nominal = AcSolution {
            v: vec![1.0, 1.0],
            theta: vec![0.0, 0.0],
            p_gen: vec![0.0],
            q_gen: vec![0.0],
            s_from: vec![],
            s_to: vec![],
            objective: 0.0,
            converged: true,
            violations: vec![],
        };
        let hot = hot_start(&case, &nominal).unwrap();
        let cold = cold_start(&case);
        assert!((hot.b[0] - cold.b[0]).abs() < 1e-14);
        assert!(hot.gamma.iter().all(|&g| g == 0.0));
        assert!(hot.rho.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn sinc_removable_singularity() {
        // equal angles with unequal voltages: the sinc factor is exactly 1
        let case = parse_case(TWO_BUS).unwrap();
        let nominal = AcSolution {
            v: vec![1.05, 0.98],
            theta: vec![0.2, 0.2],
            p_gen: vec![0.0],
            q_gen: vec![0.0],
            s_from: vec![],
            s_to: vec![],
            objective: 0.0,
            converged: true,
            violations: vec![],
        };
        let hot = hot_start(&case, &nominal).unwrap();
        let cold = cold_start(&case);
        assert!((hot.b[0] - cold.b[0] * 1.05 * 0.98).abs() < 1e-12);
    }

    #[test]
    fn sinc_continuity_across_zero() {
        let case = parse_case(TWO_BUS).unwrap();
        let make = |d: f64| AcSolution {
            v: vec![1.0, 1.0],
            theta: vec![d, 0.0],
            p_gen: vec![0.0],
            q_gen: vec![0.0],
            s_from: vec![],
            s_to: vec![],
            objective: 0.0,
            converged: true,
            violations: vec![],
        };
        let b0 = hot_start(&case, &make(0.0)).unwrap().b[0];
        let bp = hot_start(&case, &make(1e-12)).unwrap().b[0];
        let bm = hot_start(&case, &make(-1e-12)).unwrap().b[0];
        assert!((bp - b0).abs() < 1e-9);
        assert!((bm - b0).abs() < 1e-9);
    }

    #[test]
    fn hot_start_gamma_matches_loss_expression() {
        // gamma at the from bus equals Re(Y) * v_f (v_f - v_t cos dtheta)
        // evaluated on the Newton solution of the lossy 2-bus case.
        let case = parse_case(TWO_BUS).unwrap();
        let topo = Topology::full(&case);
        let dispatch = Dispatch {
            p_gen: vec![0.5],
            v_set: vec![1.0],
        };
        let sol = newton_power_flow(&case, &topo, &dispatch).unwrap();
        assert!(sol.converged);
        let hot = hot_start(&case, &sol).unwrap();
        let g_series = case.branches[0].y_series().re;
        let expect = g_series * sol.v[0] * (sol.v[0] - sol.v[1] * (sol.theta[0] - sol.theta[1]).cos());
        assert!((hot.gamma[0] - expect).abs() < 1e-12);
        assert_eq!(hot.gamma[1], 0.0);
        // the loss proxy is positive on a lossy exporting line
        assert!(hot.gamma[0] > 0.0);
    }

    #[test]
    fn non_converged_nominal_rejected() {
        let case = parse_case(TWO_BUS).unwrap();
        let nominal = AcSolution {
            v: vec![1.0, 1.0],
            theta: vec![0.0, 0.0],
            p_gen: vec![0.0],
            q_gen: vec![0.0],
            s_from: vec![],
            s_to: vec![],
            objective: 0.0,
            converged: false,
            violations: vec![],
        };
        assert!(hot_start(&case, &nominal).is_err());
    }

    #[test]
    fn tuned_identity_update() {
        let case = parse_case(TWO_BUS).unwrap();
        let cold = cold_start(&case);
        let tuned = with_tuned(&case, cold.b.clone(), vec![0.0]).unwrap();
        assert_eq!(tuned.provenance, Provenance::Tuned);
        assert_eq!(tuned.b, cold.b);
        assert_eq!(tuned.gamma, cold.gamma);
        assert_eq!(tuned.rho, cold.rho);
        assert_eq!(tuned.psi, cold.psi);

        let tuned2 = with_tuned(&case, cold.b.clone(), vec![0.25]).unwrap();
        assert_eq!(tuned2.psi, vec![0.25]);
        assert!(tuned2.gamma.iter().all(|&g| g == 0.0));
        assert!(tuned2.rho.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn length_mismatch_rejected() {
        let case = parse_case(TWO_BUS).unwrap();
        assert!(with_tuned(&case, vec![1.0, 2.0], vec![0.0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let case = parse_case(TWO_BUS).unwrap();
        let p = cold_start(&case);
        let back = DcParameters::from_json(&p.to_json()).unwrap();
        assert_eq!(p, back);
    }
}
