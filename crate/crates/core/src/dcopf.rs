//! DC optimal power flow as a convex QP, plus differentiation of its
//! solution map with respect to the parameters (b, psi) through the KKT
//! system of the identified active set.
//!
//! Two constraint sets are supported:
//!
//! * `Model4` - balance includes gamma and rho, thermal limits apply to the
//!   raw flow diag(b) A theta + rho.
//! * `Model6Inner` - the inner problem of the parameter-tuning bilevel
//!   program: balance without bias terms, thermal limits on the adjusted
//!   flow diag(b) A theta + psi, angle-difference box, and a bus-angle box.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::network::NetworkCase;
use crate::params::DcParameters;
use crate::qp::{self, Qp, QpOptions};

pub const DEFAULT_THETA_BOX: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DcOpfMode {
    Model4,
    Model6Inner,
}

#[derive(Debug, Clone)]
pub struct DcOpfOptions {
    pub mode: DcOpfMode,
    /// Bus-angle box (radians), used by `Model6Inner`.
    pub theta_box: f64,
}

impl DcOpfOptions {
    pub fn model4() -> Self {
        DcOpfOptions {
            mode: DcOpfMode::Model4,
            theta_box: DEFAULT_THETA_BOX,
        }
    }

    pub fn model6() -> Self {
        DcOpfOptions {
            mode: DcOpfMode::Model6Inner,
            theta_box: DEFAULT_THETA_BOX,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DcOpfSolution {
    pub p_gen: Vec<f64>,
    pub theta: Vec<f64>,
    /// Raw branch flow: diag(b) A theta (+ rho in Model4).
    pub p_flow: Vec<f64>,
    /// Adjusted flow S^{f,DC} = p_flow + psi.
    pub s_flow_dc: Vec<f64>,
    /// Multipliers for the equality rows (balance per bus, then slack ref).
    pub duals_eq: Vec<f64>,
    /// Multipliers for the inequality rows, in model row order.
    pub duals_in: Vec<f64>,
    /// Indices of binding inequality rows.
    pub active_set: Vec<usize>,
    pub degenerate: bool,
    /// Total cost in $/h, including constant terms.
    pub objective: f64,
}

/// Sensitivities of the adjusted flow vector with respect to b and psi,
/// with the loss gradients computed from them.
#[derive(Debug, Clone)]
pub struct SensitivityBundle {
    /// d S^{f,DC} / d b, |E| x |E| (row = flow entry, column = parameter).
    pub d_flow_d_b: DMatrix<f64>,
    /// d S^{f,DC} / d psi.
    pub d_flow_d_psi: DMatrix<f64>,
    /// d theta / d psi (|N| x |E|), kept for consistency checks.
    pub d_theta_d_psi: DMatrix<f64>,
    /// True when the KKT factorization needed Tikhonov regularization.
    pub degenerate: bool,
}

/// Row layout of the DC-OPF QP, shared by the solver and the KKT
/// differentiation.
struct DcOpfModel {
    qp: Qp,
    ng: usize,
    n: usize,
    ne: usize,
    /// constant cost term (sum of c0)
    cost0: f64,
    /// inequality row offsets
    flow_up: usize,
    flow_lo: usize,
}

fn build_model(
    case: &NetworkCase,
    params: &DcParameters,
    opts: &DcOpfOptions,
) -> Result<DcOpfModel, SolveError> {
    params.validate(case)?;
    let n = case.n_bus();
    let ng = case.n_gen();
    let ne = case.n_branch();
    let nx = ng + n;
    let a = case.incidence();
    let model6 = opts.mode == DcOpfMode::Model6Inner;

    let mut q = DMatrix::zeros(nx, nx);
    let mut c = DVector::zeros(nx);
    let mut cost0 = 0.0;
    for (g, gen) in case.generators.iter().enumerate() {
        q[(g, g)] = 2.0 * gen.c2;
        c[g] = gen.c1;
        cost0 += gen.c0;
    }

    // Equalities: n balance rows, then the slack reference.
    let me = n + 1;
    let mut a_eq = DMatrix::zeros(me, nx);
    let mut b_eq = DVector::zeros(me);
    for g in 0..ng {
        a_eq[(case.gen_position(g), g)] = 1.0;
    }
    for (e, &(f, t)) in a.rows.iter().enumerate() {
        // -A^T diag(b) A theta contribution of branch e
        let be = params.b[e];
        for (i, si) in [(f, 1.0), (t, -1.0)] {
            for (j, sj) in [(f, 1.0), (t, -1.0)] {
                a_eq[(i, ng + j)] -= si * be * sj;
            }
        }
    }
    for i in 0..n {
        b_eq[i] = case.buses[i].p_demand;
        if !model6 {
            b_eq[i] += params.gamma[i];
        }
    }
    if !model6 {
        // rho enters the balance through A^T rho
        for (e, &(f, t)) in a.rows.iter().enumerate() {
            b_eq[f] += params.rho[e];
            b_eq[t] -= params.rho[e];
        }
    }
    a_eq[(n, ng + case.slack_position())] = 1.0;
    b_eq[n] = 0.0;

    // Inequerties: p bounds, flow bounds, angle-difference box,
    // bus-angle box (Model6Inner only).
    let mi = 2 * ng + 2 * ne + 2 * ne + if model6 { 2 * n } else { 0 };
    let mut g_in = DMatrix::zeros(mi, nx);
    let mut h_in = DVector::zeros(mi);
    let mut row = 0;
    for (g, gen) in case.generators.iter().enumerate() {
        g_in[(row, g)] = 1.0;
        h_in[row] = gen.p_max;
        row += 1;
        g_in[(row, g)] = -1.0;
        h_in[row] = -gen.p_min;
        row += 1;
    }
    let flow_up = row;
    for (e, &(f, t)) in a.rows.iter().enumerate() {
        let be = params.b[e];
        g_in[(row, ng + f)] = be;
        g_in[(row, ng + t)] = -be;
        h_in[row] = case.branches[e].rate_a
            - if model6 { params.psi[e] } else { params.rho[e] };
        row += 1;
    }
    let flow_lo = row;
    for (e, &(f, t)) in a.rows.iter().enumerate() {
        let be = params.b[e];
        g_in[(row, ng + f)] = -be;
        g_in[(row, ng + t)] = be;
        h_in[row] = case.branches[e].rate_a
            + if model6 { params.psi[e] } else { params.rho[e] };
        row += 1;
    }
    for (e, &(f, t)) in a.rows.iter().enumerate() {
        g_in[(row, ng + f)] = 1.0;
        g_in[(row, ng + t)] = -1.0;
        h_in[row] = case.branches[e].ang_max;
        row += 1;
        g_in[(row, ng + f)] = -1.0;
        g_in[(row, ng + t)] = 1.0;
        h_in[row] = -case.branches[e].ang_min;
        row += 1;
    }
    if model6 {
        for i in 0..n {
            g_in[(row, ng + i)] = 1.0;
            h_in[row] = opts.theta_box;
            row += 1;
            g_in[(row, ng + i)] = -1.0;
            h_in[row] = opts.theta_box;
            row += 1;
        }
    }
    debug_assert_eq!(row, mi);

    Ok(DcOpfModel {
        qp: Qp {
            q,
            c,
            a_eq,
            b_eq,
            g_in,
            h_in,
        },
        ng,
        n,
        ne,
        cost0,
        flow_up,
        flow_lo,
    })
}

/// Solve the DC-OPF QP to global optimality.
pub fn solve_dc_opf(
    case: &NetworkCase,
    params: &DcParameters,
    opts: &DcOpfOptions,
) -> Result<DcOpfSolution, SolveError> {
    let model = build_model(case, params, opts)?;
    let qsol = qp::solve(&model.qp, &QpOptions::default())?;
    Ok(assemble_solution(case, params, opts, &model, &qsol))
}

fn assemble_solution(
    case: &NetworkCase,
    params: &DcParameters,
    opts: &DcOpfOptions,
    model: &DcOpfModel,
    qsol: &qp::QpSolution,
) -> DcOpfSolution {
    let ng = model.ng;
    let model6 = opts.mode == DcOpfMode::Model6Inner;
    let p_gen: Vec<f64> = (0..ng).map(|g| qsol.x[g]).collect();
    let theta: Vec<f64> = (0..model.n).map(|i| qsol.x[ng + i]).collect();
    let a = case.incidence();
    let dtheta = a.apply(&theta);
    let p_flow: Vec<f64> = (0..model.ne)
        .map(|e| params.b[e] * dtheta[e] + if model6 { 0.0 } else { params.rho[e] })
        .collect();
    let s_flow_dc: Vec<f64> = p_flow
        .iter()
        .zip(params.psi.iter())
        .map(|(f, psi)| f + psi)
        .collect();
    DcOpfSolution {
        p_gen,
        theta,
        p_flow,
        s_flow_dc,
        duals_eq: qsol.y_eq.iter().copied().collect(),
        duals_in: qsol.z_in.iter().copied().collect(),
        active_set: qsol.active.clone(),
        degenerate: qsol.degenerate,
        objective: qsol.objective + model.cost0,
    }
}

/// Differentiate the optimal adjusted flow S^{f,DC} with respect to b and
/// psi by solving the linearized KKT system on the active set.
pub fn differentiate_kkt(
    case: &NetworkCase,
    params: &DcParameters,
    opts: &DcOpfOptions,
    sol: &DcOpfSolution,
) -> Result<SensitivityBundle, SolveError> {
    let model = build_model(case, params, opts)?;
    let nx = model.ng + model.n;
    let me = model.qp.a_eq.nrows();
    let act = &sol.active_set;
    let ma = act.len();
    let dim = nx + me + ma;
    let ne = model.ne;
    let ng = model.ng;
    let n = model.n;
    let model6 = opts.mode == DcOpfMode::Model6Inner;
    let a = case.incidence();
    let dtheta = a.apply(&sol.theta);

    // KKT matrix on the active set.
    let mut k = DMatrix::zeros(dim, dim);
    k.view_mut((0, 0), (nx, nx)).copy_from(&model.qp.q);
    k.view_mut((nx, 0), (me, nx)).copy_from(&model.qp.a_eq);
    k.view_mut((0, nx), (nx, me))
        .copy_from(&model.qp.a_eq.transpose());
    for (r, &i) in act.iter().enumerate() {
        for col in 0..nx {
            k[(nx + me + r, col)] = model.qp.g_in[(i, col)];
            k[(col, nx + me + r)] = model.qp.g_in[(i, col)];
        }
    }

    let lu = k.clone().lu();
    let mut degenerate = false;
    let solve_sys = |rhs: &DVector<f64>, degenerate: &mut bool| -> Option<DVector<f64>> {
        if let Some(sol) = lu.solve(rhs) {
            if sol.iter().all(|v| v.is_finite()) && sol.amax() < 1e14 {
                return Some(sol);
            }
        }
        *degenerate = true;
        let mut reg = qp::KKT_REGULARIZATION;
        for _ in 0..6 {
            let mut kr = k.clone();
            for i in 0..dim {
                kr[(i, i)] += if i < nx { reg } else { -reg };
            }
            if let Some(sol) = kr.lu().solve(rhs) {
                if sol.iter().all(|v| v.is_finite()) {
                    return Some(sol);
                }
            }
            reg *= 100.0;
        }
        None
    };

    // Lookup: is an inequality row active, and at which position.
    let mut act_pos = vec![usize::MAX; model.qp.g_in.nrows()];
    for (r, &i) in act.iter().enumerate() {
        act_pos[i] = r;
    }

    let ba = {
        // diag(b) * A as a dense (ne x n) matrix for the chain rule
        let mut m = DMatrix::zeros(ne, n);
        for (e, &(f, t)) in a.rows.iter().enumerate() {
            m[(e, f)] = params.b[e];
            m[(e, t)] = -params.b[e];
        }
        m
    };

    let mut d_flow_d_b = DMatrix::zeros(ne, ne);
    let mut d_flow_d_psi = DMatrix::zeros(ne, ne);
    let mut d_theta_d_psi = DMatrix::zeros(n, ne);

    for e in 0..ne {
        let (f, t) = a.rows[e];

        // --- derivative w.r.t. b_e ---
        let mut rhs = DVector::zeros(dim);
        // stationarity, theta block: d(A_eq^T y)/db_e = -a_e (a_e . y_bal)
        let y_ae = sol.duals_eq[f] - sol.duals_eq[t];
        rhs[nx + 0]; // no-op, keep indices clear
        let mut stat_theta_f = -y_ae;
        let mut stat_theta_t = y_ae;
        // flow-limit rows contribute (z_up - z_lo) * a_e to the theta block
        let z_up = sol.duals_in[model.flow_up + e];
        let z_lo = sol.duals_in[model.flow_lo + e];
        stat_theta_f += z_up - z_lo;
        stat_theta_t -= z_up - z_lo;
        rhs[ng + f] = stat_theta_f;
        rhs[ng + t] = stat_theta_t;
        // balance residual: -a_e (A theta)_e on rows f and t
        rhs[nx + f] = -dtheta[e];
        rhs[nx + t] = dtheta[e];
        // active flow rows: +-(A theta)_e
        if act_pos[model.flow_up + e] != usize::MAX {
            rhs[nx + me + act_pos[model.flow_up + e]] = dtheta[e];
        }
        if act_pos[model.flow_lo + e] != usize::MAX {
            rhs[nx + me + act_pos[model.flow_lo + e]] = -dtheta[e];
        }
        let neg_rhs = -rhs;
        let d = solve_sys(&neg_rhs, &mut degenerate)
            .ok_or_else(|| SolveError::Singular("DC-OPF sensitivity KKT".into()))?;
        let dth: DVector<f64> = d.rows(ng, n).into();
        // dS/db_e = e_e (A theta)_e + diag(b) A dtheta/db_e
        let mut col = &ba * &dth;
        col[e] += dtheta[e];
        d_flow_d_b.set_column(e, &col);

        // --- derivative w.r.t. psi_e ---
        if model6 {
            let mut rhs = DVector::zeros(dim);
            // psi enters the flow-limit right-hand sides: up row h = rate - psi,
            // residual g x - h, d(residual)/dpsi = +1; lo row h = rate + psi -> -1
            if act_pos[model.flow_up + e] != usize::MAX {
                rhs[nx + me + act_pos[model.flow_up + e]] = 1.0;
            }
            if act_pos[model.flow_lo + e] != usize::MAX {
                rhs[nx + me + act_pos[model.flow_lo + e]] = -1.0;
            }
            let neg_rhs = -rhs;
            let d = solve_sys(&neg_rhs, &mut degenerate)
                .ok_or_else(|| SolveError::Singular("DC-OPF sensitivity KKT".into()))?;
            let dth: DVector<f64> = d.rows(ng, n).into();
            let mut col = &ba * &dth;
            col[e] += 1.0;
            d_flow_d_psi.set_column(e, &col);
            d_theta_d_psi.set_column(e, &dth);
        } else {
            // Model4: psi only shifts the reported flow, S = p_flow + psi.
            d_flow_d_psi[(e, e)] = 1.0;
        }
    }

    Ok(SensitivityBundle {
        d_flow_d_b,
        d_flow_d_psi,
        d_theta_d_psi,
        degenerate,
    })
}

/// Mean squared flow mismatch: L = (1/|E|) * ||s_dc - s_ac||^2.
pub fn loss(s_flow_dc: &[f64], s_flow_ac: &[f64]) -> Result<f64, SolveError> {
    if s_flow_dc.len() != s_flow_ac.len() {
        return Err(SolveError::Invalid("flow vector length mismatch".into()));
    }
    let n = s_flow_dc.len().max(1);
    Ok(s_flow_dc
        .iter()
        .zip(s_flow_ac)
        .map(|(d, a)| (d - a) * (d - a))
        .sum::<f64>()
        / n as f64)
}

/// Loss gradients g = (2/|E|) J^T (s_dc - s_ac) for each parameter block.
pub fn loss_gradients(
    bundle: &SensitivityBundle,
    s_flow_dc: &[f64],
    s_flow_ac: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), SolveError> {
    if s_flow_dc.len() != s_flow_ac.len() {
        return Err(SolveError::Invalid("flow vector length mismatch".into()));
    }
    let ne = s_flow_dc.len();
    let r = DVector::from_iterator(ne, s_flow_dc.iter().zip(s_flow_ac).map(|(d, a)| d - a));
    let scale = 2.0 / ne as f64;
    let g_b = (bundle.d_flow_d_b.transpose() * &r) * scale;
    let g_psi = (bundle.d_flow_d_psi.transpose() * &r) * scale;
    Ok((g_b.iter().copied().collect(), g_psi.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_case;
    use crate::params::{cold_start, with_tuned};

    const TWO_BUS: &str = r#"
function mpc = case2
mpc.baseMVA = 100.0;
mpc.bus = [
    1  3  0.0    0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
    2  1  100.0  0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
];
mpc.gen = [
    1  100.0  0.0  300.0  -300.0  1.0  100.0  1  300.0  0.0;
];
mpc.gencost = [
    2  0.0  0.0  2  0.1  0.0;
];
mpc.branch = [
    1  2  0.0  0.1  0.0  500.0  0.0  0.0  0.0  0.0  1  -30.0  30.0;
];
"#;

    #[test]
    fn two_bus_hand_kkt() {
        let case = parse_case(TWO_BUS).unwrap();
        let params = cold_start(&case);
        assert!((params.b[0] - 10.0).abs() < 1e-12);
        for opts in [DcOpfOptions::model4(), DcOpfOptions::model6()] {
            let sol = solve_dc_opf(&case, &params, &opts).unwrap();
            assert!((sol.p_gen[0] - 1.0).abs() < 1e-8);
            assert!((sol.p_flow[0] - 1.0).abs() < 1e-8);
            assert!((sol.theta[1] + 0.1).abs() < 1e-8);
            assert!((sol.objective - 10.0).abs() < 1e-7);
            assert!(sol.active_set.is_empty());
        }
    }

    #[test]
    fn modes_coincide_with_zero_bias() {
        let case = parse_case(TWO_BUS).unwrap();
        let params = cold_start(&case);
        let m4 = solve_dc_opf(&case, &params, &DcOpfOptions::model4()).unwrap();
        let m6 = solve_dc_opf(&case, &params, &DcOpfOptions::model6()).unwrap();
        assert!((m4.objective - m6.objective).abs() < 1e-8);
        for e in 0..case.n_branch() {
            assert!((m4.s_flow_dc[e] - m6.s_flow_dc[e]).abs() < 1e-8);
        }
    }

    #[test]
    fn radial_sensitivities() {
        // Flow pinned by balance: dS/db = 0, dS/dpsi = I.
        let case = parse_case(TWO_BUS).unwrap();
        let params = cold_start(&case);
        let opts = DcOpfOptions::model6();
        let sol = solve_dc_opf(&case, &params, &opts).unwrap();
        let bundle = differentiate_kkt(&case, &params, &opts, &sol).unwrap();
        assert!(bundle.d_flow_d_b[(0, 0)].abs() < 1e-8);
        assert!((bundle.d_flow_d_psi[(0, 0)] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn psi_shifts_only_flow_report_in_model4() {
        let case = parse_case(TWO_BUS).unwrap();
        let cold = cold_start(&case);
        let tuned = with_tuned(&case, cold.b.clone(), vec![0.25]).unwrap();
        let sol = solve_dc_opf(&case, &tuned, &DcOpfOptions::model4()).unwrap();
        assert!((sol.p_flow[0] - 1.0).abs() < 1e-8);
        assert!((sol.s_flow_dc[0] - 1.25).abs() < 1e-8);
    }

    #[test]
    fn loss_values() {
        assert_eq!(loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let l = loss(&[0.3, 0.0], &[0.0, 0.4]).unwrap();
        assert!((l - 0.125).abs() < 1e-15);
        // homogeneity: scaling both inputs by c scales loss by c^2
        let l2 = loss(&[0.6, 0.0], &[0.0, 0.8]).unwrap();
        assert!((l2 - 4.0 * l).abs() < 1e-15);
        assert!(loss(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn gradient_zero_at_match() {
        let case = parse_case(TWO_BUS).unwrap();
        let params = cold_start(&case);
        let opts = DcOpfOptions::model6();
        let sol = solve_dc_opf(&case, &params, &opts).unwrap();
        let bundle = differentiate_kkt(&case, &params, &opts, &sol).unwrap();
        let targets = sol.s_flow_dc.clone();
        let (g_b, g_psi) = loss_gradients(&bundle, &sol.s_flow_dc, &targets).unwrap();
        assert!(g_b.iter().all(|&g| g == 0.0));
        assert!(g_psi.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn identity_jacobian_gradient() {
        // With dS/dpsi = I (radial, unconstrained): g_psi = (2/|E|) (s_dc - s_ac).
        let case = parse_case(TWO_BUS).unwrap();
        let params = cold_start(&case);
        let opts = DcOpfOptions::model6();
        let sol = solve_dc_opf(&case, &params, &opts).unwrap();
        let bundle = differentiate_kkt(&case, &params, &opts, &sol).unwrap();
        let targets = vec![sol.s_flow_dc[0] - 0.3];
        let (_, g_psi) = loss_gradients(&bundle, &sol.s_flow_dc, &targets).unwrap();
        assert!((g_psi[0] - 2.0 * 0.3).abs() < 1e-9);
    }

    /// Central-difference oracle for the sensitivity columns on a meshed
    /// 3-bus case with a binding thermal limit.
    #[test]
    fn finite_difference_oracle_three_bus() {
        let text = r#"
function mpc = tri
mpc.baseMVA = 100.0;
mpc.bus = [
    1  3  0.0    0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
    2  2  50.0   0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
    3  1  120.0  0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
];
mpc.gen = [
    1  50.0  0.0  300.0  -300.0  1.0  100.0  1  300.0  0.0;
    2  50.0  0.0  300.0  -300.0  1.0  100.0  1  300.0  0.0;
];
mpc.gencost = [
    2  0.0  0.0  3  0.02  1.0  0.0;
    2  0.0  0.0  3  0.04  2.0  0.0;
];
mpc.branch = [
    1  2  0.01  0.1   0.0  80.0   0.0  0.0  0.0  0.0  1  -30.0  30.0;
    2  3  0.01  0.12  0.0  100.0  0.0  0.0  0.0  0.0  1  -30.0  30.0;
    1  3  0.01  0.15  0.0  60.0   0.0  0.0  0.0  0.0  1  -30.0  30.0;
];
"#;
        let case = parse_case(text).unwrap();
        let params = cold_start(&case);
        let opts = DcOpfOptions::model6();
        let sol = solve_dc_opf(&case, &params, &opts).unwrap();
        let bundle = differentiate_kkt(&case, &params, &opts, &sol).unwrap();

        let h = 1e-5;
        for e in 0..case.n_branch() {
            // column of d_flow_d_b by central differences
            let mut bp = params.clone();
            bp.b[e] += h;
            let mut bm = params.clone();
            bm.b[e] -= h;
            let sp = solve_dc_opf(&case, &bp, &opts).unwrap();
            let sm = solve_dc_opf(&case, &bm, &opts).unwrap();
            if sp.active_set != sm.active_set {
                continue; // active-set change inside the stencil
            }
            for r in 0..case.n_branch() {
                let fd = (sp.s_flow_dc[r] - sm.s_flow_dc[r]) / (2.0 * h);
                let an = bundle.d_flow_d_b[(r, e)];
                assert!(
                    (an - fd).abs() < 1e-4 * (1.0 + fd.abs()),
                    "d_flow_d_b({r},{e}) analytic {an} vs fd {fd}"
                );
            }

            let mut pp = params.clone();
            pp.psi[e] += h;
            let mut pm = params.clone();
            pm.psi[e] -= h;
            let sp = solve_dc_opf(&case, &pp, &opts).unwrap();
            let sm = solve_dc_opf(&case, &pm, &opts).unwrap();
            if sp.active_set != sm.active_set {
                continue;
            }
            for r in 0..case.n_branch() {
                let fd = (sp.s_flow_dc[r] - sm.s_flow_dc[r]) / (2.0 * h);
                let an = bundle.d_flow_d_psi[(r, e)];
                assert!(
                    (an - fd).abs() < 1e-4 * (1.0 + fd.abs()),
                    "d_flow_d_psi({r},{e}) analytic {an} vs fd {fd}"
                );
            }
        }
    }

    /// The chain identity dS/dpsi - I = diag(b) A dtheta/dpsi holds exactly.
    #[test]
    fn jacobian_chain_identity() {
        let case = parse_case(TWO_BUS).unwrap();
        let params = cold_start(&case);
        let opts = DcOpfOptions::model6();
        let sol = solve_dc_opf(&case, &params, &opts).unwrap();
        let bundle = differentiate_kkt(&case, &params, &opts, &sol).unwrap();
        let a = case.incidence();
        for e in 0..case.n_branch() {
            for r in 0..case.n_branch() {
                let (f, t) = a.rows[r];
                let chain =
                    params.b[r] * (bundle.d_theta_d_psi[(f, e)] - bundle.d_theta_d_psi[(t, e)]);
                let lhs = bundle.d_flow_d_psi[(r, e)] - if r == e { 1.0 } else { 0.0 };
                assert!((lhs - chain).abs() < 1e-10);
            }
        }
    }
}
