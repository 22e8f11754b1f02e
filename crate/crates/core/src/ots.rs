//! DC optimal transmission switching as a mixed-integer QP, solved by
//! branch-and-bound over the binary line statuses with convex-QP node
//! relaxations.
//!
//! The model is the customized DC-OTS: big-M disjunctions tie the flow
//! variable to diag(b) A theta + rho while a line is in service, thermal
//! limits apply to the adjusted flow p_flow + psi and collapse to zero when
//! the line is out, and angle-difference limits are relaxed through theta^M
//! for open lines. The switching penalty prices each OPENED line at
//! `c_prof` $/h, so a line is switched out only when the dispatch saving
//! exceeds the penalty; the literal variant that prices in-service lines
//! instead is available behind `literal_objective`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::ac::Topology;
use crate::error::SolveError;
use crate::network::NetworkCase;
use crate::params::{cold_start, DcParameters};
use crate::qp::{self, Qp, QpOptions};

pub const DEFAULT_THETA_BOX: f64 = 0.6;
pub const DEFAULT_MIP_GAP: f64 = 1e-4;
const BIG_M_MARGIN: f64 = 1e-6;
const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OtsConfig {
    /// Switching penalty, $/h per opened line.
    pub c_prof: f64,
    /// Price in-service lines instead of opened ones (the literal big-M
    /// model objective). Off by default; see module docs.
    pub literal_objective: bool,
    /// Per-bus angle box, radians.
    pub theta_box: f64,
    /// Angle-disjunction constant; derived from `theta_box` when absent.
    pub theta_big_m: Option<f64>,
    /// Per-branch flow disjunction constants; derived when absent.
    pub flow_big_m: Option<Vec<f64>>,
    /// Relative MILP optimality gap.
    pub mip_gap: f64,
    /// Branch-and-bound node budget.
    pub node_cap: usize,
    /// Switchable branch indices (0-based); all branches when absent.
    pub candidate_lines: Option<Vec<usize>>,
}

impl Default for OtsConfig {
    fn default() -> Self {
        OtsConfig {
            c_prof: 0.0,
            literal_objective: false,
            theta_box: DEFAULT_THETA_BOX,
            theta_big_m: None,
            flow_big_m: None,
            mip_gap: DEFAULT_MIP_GAP,
            node_cap: 200_000,
            candidate_lines: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OtsSolution {
    /// Line statuses, true = in service.
    pub u: Vec<bool>,
    pub p_gen: Vec<f64>,
    pub theta: Vec<f64>,
    pub p_flow: Vec<f64>,
    /// Objective including the switching penalty, $/h.
    pub objective: f64,
    /// Dispatch cost without the penalty term, $/h.
    pub dispatch_cost: f64,
    /// Proven relative optimality gap.
    pub gap: f64,
    /// Explored node count.
    pub nodes: usize,
    /// 1-based numbers of opened lines.
    pub opened_lines: Vec<usize>,
}

impl OtsSolution {
    pub fn topology(&self) -> Topology {
        Topology {
            in_service: self.u.clone(),
        }
    }
}

/// Valid default big-M constants: the flow constant bounds |b_e| * (angle
/// range) + |rho_e| since bus angles live in the theta box; the angle
/// constant bounds any angle difference.
pub fn default_big_m(case: &NetworkCase, params: &DcParameters, theta_box: f64) -> (Vec<f64>, f64) {
    let flow = (0..case.n_branch())
        .map(|e| params.b[e].abs() * 2.0 * theta_box + params.rho[e].abs() + BIG_M_MARGIN)
        .collect();
    (flow, 2.0 * theta_box + BIG_M_MARGIN)
}

/// Solve the customized DC-OTS (penalized switching) for the given
/// parameters.
pub fn solve_c_dc_ots(
    case: &NetworkCase,
    params: &DcParameters,
    config: &OtsConfig,
) -> Result<OtsSolution, SolveError> {
    branch_and_bound(case, params, config)
}

/// Traditional DC-OTS: no switching penalty, cold-start parameters.
pub fn solve_traditional_dc_ots(
    case: &NetworkCase,
    config: &OtsConfig,
) -> Result<OtsSolution, SolveError> {
    let params = cold_start(case);
    let cfg = OtsConfig {
        c_prof: 0.0,
        ..config.clone()
    };
    branch_and_bound(case, &params, &cfg)
}

/// Solve the model with every status fixed; used for incumbent re-checks.
pub fn solve_fixed_topology(
    case: &NetworkCase,
    params: &DcParameters,
    config: &OtsConfig,
    u: &[bool],
) -> Result<OtsSolution, SolveError> {
    if u.len() != case.n_branch() {
        return Err(SolveError::Invalid("status vector length mismatch".into()));
    }
    let cfg = OtsConfig {
        candidate_lines: Some(Vec::new()),
        ..config.clone()
    };
    let model = OtsModel::build(case, params, &cfg)?;
    let mut lb = vec![1.0; case.n_branch()];
    let mut ub = vec![1.0; case.n_branch()];
    for (e, &in_service) in u.iter().enumerate() {
        let v = if in_service { 1.0 } else { 0.0 };
        lb[e] = v;
        ub[e] = v;
    }
    let qsol = model.solve_node(&lb, &ub, None)?;
    Ok(model.assemble(case, &qsol, 0.0, 1))
}

// ---------------------------------------------------------------------------
// Model assembly
// ---------------------------------------------------------------------------

/// Column layout: [p (ng); theta (n); p_flow (E); u (E)].
struct OtsModel {
    qp: Qp,
    ng: usize,
    n: usize,
    ne: usize,
    cost0: f64,
    /// penalty applied per opened line (prose sense) or per closed line
    penalty: f64,
    literal: bool,
    /// inequality row offsets
    flow_def: usize,
    thermal: usize,
    u_upper: usize,
    u_lower: usize,
    /// structural data for pinning rows at fixed statuses
    b: Vec<f64>,
    rho: Vec<f64>,
    psi: Vec<f64>,
    ends: Vec<(usize, usize)>,
    flow_m: Vec<f64>,
}

impl OtsModel {
    fn build(
        case: &NetworkCase,
        params: &DcParameters,
        config: &OtsConfig,
    ) -> Result<Self, SolveError> {
        params.validate(case)?;
        if config.c_prof < 0.0 {
            return Err(SolveError::Invalid("c_prof must be nonnegative".into()));
        }
        if !(config.mip_gap > 0.0) {
            return Err(SolveError::Invalid("mip_gap must be positive".into()));
        }
        let n = case.n_bus();
        let ng = case.n_gen();
        let ne = case.n_branch();
        let nx = ng + n + 2 * ne;
        let a = case.incidence();

        let (m_default, theta_m_default) = default_big_m(case, params, config.theta_box);
        let flow_m = config.flow_big_m.clone().unwrap_or(m_default);
        let theta_m = config.theta_big_m.unwrap_or(theta_m_default);
        for e in 0..ne {
            let needed = params.b[e].abs() * 2.0 * config.theta_box + params.rho[e].abs();
            if flow_m[e] < needed {
                return Err(SolveError::Invalid(format!(
                    "flow big-M for line {} is too small: {} < {}",
                    e + 1,
                    flow_m[e],
                    needed
                )));
            }
        }

        let mut q = DMatrix::zeros(nx, nx);
        let mut c = DVector::zeros(nx);
        let mut cost0 = 0.0;
        for (g, gen) in case.generators.iter().enumerate() {
            q[(g, g)] = 2.0 * gen.c2;
            c[g] = gen.c1;
            cost0 += gen.c0;
        }
        let u_col = |e: usize| ng + n + ne + e;
        let flow_col = |e: usize| ng + n + e;
        if config.literal_objective {
            for e in 0..ne {
                c[u_col(e)] = config.c_prof;
            }
        } else {
            // c_prof * 1'(1 - u) = c_prof*ne - c_prof * 1'u
            for e in 0..ne {
                c[u_col(e)] = -config.c_prof;
            }
            cost0 += config.c_prof * ne as f64;
        }

        // Equalities: balance rows + slack reference.
        let me = n + 1;
        let mut a_eq = DMatrix::zeros(me, nx);
        let mut b_eq = DVector::zeros(me);
        for g in 0..ng {
            a_eq[(case.gen_position(g), g)] = 1.0;
        }
        for (e, &(f, t)) in a.rows.iter().enumerate() {
            a_eq[(f, flow_col(e))] = -1.0;
            a_eq[(t, flow_col(e))] = 1.0;
        }
        for i in 0..n {
            b_eq[i] = case.buses[i].p_demand + params.gamma[i];
        }
        a_eq[(n, ng + case.slack_position())] = 1.0;

        // Inequalities.
        let mi = 2 * ng + 4 * ne + 2 * ne + 2 * n + 2 * ne;
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
        // flow-definition disjunction:
        // p_flow - b(A theta) + M u <= rho + M
        // b(A theta) - p_flow + M u <= M - rho
        let flow_def = row;
        for (e, &(f, t)) in a.rows.iter().enumerate() {
            let be = params.b[e];
            g_in[(row, flow_col(e))] = 1.0;
            g_in[(row, ng + f)] = -be;
            g_in[(row, ng + t)] = be;
            g_in[(row, u_col(e))] = flow_m[e];
            h_in[row] = params.rho[e] + flow_m[e];
            row += 1;
            g_in[(row, flow_col(e))] = -1.0;
            g_in[(row, ng + f)] = be;
            g_in[(row, ng + t)] = -be;
            g_in[(row, u_col(e))] = flow_m[e];
            h_in[row] = flow_m[e] - params.rho[e];
            row += 1;
        }
        // thermal with the psi offset: |p_flow + psi| <= u * rate
        let thermal = row;
        for (e, br) in case.branches.iter().enumerate() {
            g_in[(row, flow_col(e))] = 1.0;
            g_in[(row, u_col(e))] = -br.rate_a;
            h_in[row] = -params.psi[e];
            row += 1;
            g_in[(row, flow_col(e))] = -1.0;
            g_in[(row, u_col(e))] = -br.rate_a;
            h_in[row] = params.psi[e];
            row += 1;
        }
        // angle disjunction
        for (e, &(f, t)) in a.rows.iter().enumerate() {
            let br = &case.branches[e];
            g_in[(row, ng + f)] = 1.0;
            g_in[(row, ng + t)] = -1.0;
            g_in[(row, u_col(e))] = theta_m - br.ang_max;
            h_in[row] = theta_m;
            row += 1;
            g_in[(row, ng + f)] = -1.0;
            g_in[(row, ng + t)] = 1.0;
            g_in[(row, u_col(e))] = theta_m + br.ang_min;
            h_in[row] = theta_m;
            row += 1;
        }
        // bus-angle box
        for i in 0..n {
            g_in[(row, ng + i)] = 1.0;
            h_in[row] = config.theta_box;
            row += 1;
            g_in[(row, ng + i)] = -1.0;
            h_in[row] = config.theta_box;
            row += 1;
        }
        // u box; bounds are tightened per node
        let u_upper = row;
        for e in 0..ne {
            g_in[(row, u_col(e))] = 1.0;
            h_in[row] = 1.0;
            row += 1;
        }
        let u_lower = row;
        for e in 0..ne {
            g_in[(row, u_col(e))] = -1.0;
            h_in[row] = 0.0;
            row += 1;
        }
        debug_assert_eq!(row, mi);

        Ok(OtsModel {
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
            penalty: config.c_prof,
            literal: config.literal_objective,
            flow_def,
            thermal,
            u_upper,
            u_lower,
            b: params.b.clone(),
            rho: params.rho.clone(),
            psi: params.psi.clone(),
            ends: a.rows.clone(),
            flow_m,
        })
    }

    /// Solve the relaxation with per-line status bounds lb <= u <= ub.
    ///
    /// Pinned statuses (lb == ub) are substituted structurally: the status
    /// and the implied flow pin enter as equality rows while the now-
    /// degenerate disjunction rows are slackened. Leaving them as opposing
    /// inequality pairs would break the interior-point solve.
    fn solve_node(
        &self,
        lb: &[f64],
        ub: &[f64],
        warm: Option<&DVector<f64>>,
    ) -> Result<qp::QpSolution, SolveError> {
        let mut qp_node = self.qp.clone();
        let fixed: Vec<usize> = (0..self.ne).filter(|&e| lb[e] == ub[e]).collect();
        for e in 0..self.ne {
            if lb[e] == ub[e] {
                qp_node.h_in[self.u_upper + e] = ub[e] + 1.0;
                qp_node.h_in[self.u_lower + e] = -lb[e] + 1.0;
            } else {
                qp_node.h_in[self.u_upper + e] = ub[e];
                qp_node.h_in[self.u_lower + e] = -lb[e];
            }
        }
        let mut extra_eq: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        let flow_col = |e: usize| self.ng + self.n + e;
        let u_col = |e: usize| self.ng + self.n + self.ne + e;
        for &e in &fixed {
            extra_eq.push((vec![(u_col(e), 1.0)], lb[e]));
            let margin = 10.0 * (self.flow_m[e] + 1.0);
            if lb[e] == 0.0 {
                // open line: flow pinned to -psi; disjunction and thermal
                // rows become redundant
                extra_eq.push((vec![(flow_col(e), 1.0)], -self.psi[e]));
                qp_node.h_in[self.flow_def + 2 * e] += margin;
                qp_node.h_in[self.flow_def + 2 * e + 1] += margin;
                qp_node.h_in[self.thermal + 2 * e] += margin;
                qp_node.h_in[self.thermal + 2 * e + 1] += margin;
            } else {
                // in service: flow tied to b (A theta) + rho exactly;
                // thermal rows stay as the plain box
                let (f, t) = self.ends[e];
                extra_eq.push((
                    vec![
                        (flow_col(e), 1.0),
                        (self.ng + f, -self.b[e]),
                        (self.ng + t, self.b[e]),
                    ],
                    self.rho[e],
                ));
                qp_node.h_in[self.flow_def + 2 * e] += margin;
                qp_node.h_in[self.flow_def + 2 * e + 1] += margin;
            }
        }
        if !extra_eq.is_empty() {
            let me = qp_node.a_eq.nrows();
            let nx = qp_node.c.len();
            let mut a_eq = DMatrix::zeros(me + extra_eq.len(), nx);
            a_eq.view_mut((0, 0), (me, nx)).copy_from(&qp_node.a_eq);
            let mut b_eq = DVector::zeros(me + extra_eq.len());
            b_eq.rows_mut(0, me).copy_from(&qp_node.b_eq);
            for (k, (coeffs, rhs)) in extra_eq.iter().enumerate() {
                for &(col, v) in coeffs {
                    a_eq[(me + k, col)] = v;
                }
                b_eq[me + k] = *rhs;
            }
            qp_node.a_eq = a_eq;
            qp_node.b_eq = b_eq;
        }
        qp::solve(
            &qp_node,
            &QpOptions {
                x0: warm.cloned(),
            },
        )
    }

    fn u_values(&self, qsol: &qp::QpSolution) -> Vec<f64> {
        (0..self.ne)
            .map(|e| qsol.x[self.ng + self.n + self.ne + e])
            .collect()
    }

    fn assemble(
        &self,
        case: &NetworkCase,
        qsol: &qp::QpSolution,
        gap: f64,
        nodes: usize,
    ) -> OtsSolution {
        let u_frac = self.u_values(qsol);
        let u: Vec<bool> = u_frac.iter().map(|&v| v > 0.5).collect();
        let p_gen: Vec<f64> = (0..self.ng).map(|g| qsol.x[g]).collect();
        let theta: Vec<f64> = (0..self.n).map(|i| qsol.x[self.ng + i]).collect();
        let p_flow: Vec<f64> = (0..self.ne).map(|e| qsol.x[self.ng + self.n + e]).collect();
        let dispatch_cost: f64 = case
            .generators
            .iter()
            .zip(p_gen.iter())
            .map(|(g, &p)| g.cost(p))
            .sum();
        let opened: Vec<usize> = u
            .iter()
            .enumerate()
            .filter(|(_, &s)| !s)
            .map(|(e, _)| e + 1)
            .collect();
        let penalty = if self.literal {
            self.penalty * u.iter().filter(|&&s| s).count() as f64
        } else {
            self.penalty * opened.len() as f64
        };
        OtsSolution {
            u,
            p_gen,
            theta,
            p_flow,
            objective: dispatch_cost + penalty,
            dispatch_cost,
            gap,
            nodes,
            opened_lines: opened,
        }
    }
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

struct Node {
    bound: f64,
    seq: usize,
    lb: Vec<f64>,
    ub: Vec<f64>,
    warm: Option<DVector<f64>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.seq == other.seq
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap: invert for best-first (lowest bound),
        // ties broken by insertion order for determinism.
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Does fixing the given statuses island demand or generation? Free and
/// fixed-closed lines count as available.
fn islands_with(case: &NetworkCase, ub: &[f64]) -> bool {
    let topo = Topology {
        in_service: ub.iter().map(|&v| v > 0.5).collect(),
    };
    topo.check_islanding(case).is_err()
}

/// Best-first branch-and-bound over the line statuses.
pub fn branch_and_bound(
    case: &NetworkCase,
    params: &DcParameters,
    config: &OtsConfig,
) -> Result<OtsSolution, SolveError> {
    let model = OtsModel::build(case, params, config)?;
    let ne = model.ne;
    let candidates: Vec<usize> = match &config.candidate_lines {
        Some(list) => {
            for &e in list {
                if e >= ne {
                    return Err(SolveError::Invalid(format!(
                        "candidate line index {e} out of range"
                    )));
                }
            }
            list.clone()
        }
        None => (0..ne).collect(),
    };
    let mut is_candidate = vec![false; ne];
    for &e in &candidates {
        is_candidate[e] = true;
    }

    // Non-candidates stay in service.
    let root_lb: Vec<f64> = (0..ne).map(|e| if is_candidate[e] { 0.0 } else { 1.0 }).collect();
    let root_ub = vec![1.0; ne];

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        seq,
        lb: root_lb,
        ub: root_ub,
        warm: None,
    });

    let mut incumbent: Option<(f64, qp::QpSolution)> = None;
    let mut nodes = 0usize;
    let mut exhausted = true;

    while let Some(node) = heap.pop() {
        // Global bound = this node's bound in best-first order.
        if let Some((inc_obj, _)) = &incumbent {
            let gap = relative_gap(*inc_obj, node.bound);
            if gap <= config.mip_gap {
                // push back so the final gap computation sees it
                heap.push(node);
                exhausted = false;
                break;
            }
        }
        if nodes >= config.node_cap {
            heap.push(node);
            exhausted = false;
            break;
        }

        // Connectivity pre-check on the most connected topology this node
        // allows: if load/generation islands even with every free line in
        // service, no descendant is feasible.
        if islands_with(case, &node.ub) {
            continue;
        }

        nodes += 1;
        let qsol = match model.solve_node(&node.lb, &node.ub, node.warm.as_ref()) {
            Ok(s) => s,
            Err(e) => {
                if std::env::var("OTS_DEBUG").is_ok() {
                    eprintln!("node lb={:?} ub={:?} -> {e}", node.lb, node.ub);
                }
                match e {
                    SolveError::Infeasible(_) => continue,
                    SolveError::IterationCap { .. } => continue,
                    other => return Err(other),
                }
            }
        };
        if std::env::var("OTS_DEBUG").is_ok() {
            eprintln!(
                "node lb={:?} ub={:?} bound={:.2} u={:?} iters={}",
                node.lb, node.ub, qsol.objective + model.cost0,
                model.u_values(&qsol).iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
                qsol.iterations
            );
        }
        let bound = qsol.objective + model.cost0;
        if let Some((inc_obj, _)) = &incumbent {
            if bound >= inc_obj * (1.0 - config.mip_gap) {
                continue;
            }
        }

        let u = model.u_values(&qsol);
        let fractional: Option<usize> = candidates
            .iter()
            .copied()
            .filter(|&e| {
                node.lb[e] < 0.5 && node.ub[e] > 0.5 // still free
            })
            .filter(|&e| u[e] > INTEGRALITY_TOL && u[e] < 1.0 - INTEGRALITY_TOL)
            .min_by(|&a, &b| {
                let fa = (u[a] - 0.5).abs();
                let fb = (u[b] - 0.5).abs();
                fa.partial_cmp(&fb).unwrap_or(Ordering::Equal).then(a.cmp(&b))
            });

        match fractional {
            Some(e) => {
                // branch: u_e = 0 child, then u_e = 1 child
                for fix in [0.0, 1.0] {
                    let mut lb = node.lb.clone();
                    let mut ub = node.ub.clone();
                    lb[e] = fix;
                    ub[e] = fix;
                    seq += 1;
                    heap.push(Node {
                        bound,
                        seq,
                        lb,
                        ub,
                        warm: Some(qsol.x.clone()),
                    });
                }
            }
            None => {
                // integral point: enforce connectivity before accepting
                let statuses: Vec<bool> = u.iter().map(|&v| v > 0.5).collect();
                let topo = Topology {
                    in_service: statuses.clone(),
                };
                if topo.check_islanding(case).is_err() {
                    // integral but islanding: branch on the lowest-index free
                    // line the relaxation switched off
                    let culprit = candidates
                        .iter()
                        .copied()
                        .find(|&e| node.lb[e] < 0.5 && node.ub[e] > 0.5 && u[e] <= 0.5);
                    match culprit {
                        Some(e) => {
                            for fix in [0.0, 1.0] {
                                let mut lb = node.lb.clone();
                                let mut ub = node.ub.clone();
                                lb[e] = fix;
                                ub[e] = fix;
                                seq += 1;
                                heap.push(Node {
                                    bound,
                                    seq,
                                    lb,
                                    ub,
                                    warm: Some(qsol.x.clone()),
                                });
                            }
                        }
                        None => continue, // fully fixed and islanding
                    }
                    continue;
                }
                let better = incumbent
                    .as_ref()
                    .map(|(obj, _)| bound < *obj)
                    .unwrap_or(true);
                if better {
                    incumbent = Some((bound, qsol));
                }
            }
        }
    }

    let (inc_obj, inc_sol) = incumbent.ok_or_else(|| {
        SolveError::Infeasible("no feasible switching pattern found".into())
    })?;
    let lower = if exhausted {
        inc_obj
    } else {
        heap.iter()
            .map(|n| n.bound)
            .fold(f64::INFINITY, f64::min)
            .min(inc_obj)
    };
    let gap = relative_gap(inc_obj, lower).max(0.0);
    Ok(model.assemble(case, &inc_sol, gap, nodes))
}

fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    if !bound.is_finite() {
        return f64::INFINITY;
    }
    (incumbent - bound) / incumbent.abs().max(1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_case;
    use crate::params::cold_start;

    const TRIANGLE: &str = r#"
function mpc = tri
mpc.baseMVA = 100.0;
mpc.bus = [
    1  3  0.0    0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
    2  2  60.0   0.0  0.0  0.0  1  1.0  0.0  230.0  1  1.1  0.9;
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

    #[test]
    fn default_big_m_values() {
        let case = parse_case(TRIANGLE).unwrap();
        let mut params = cold_start(&case);
        params.b = vec![10.0, 10.0, 10.0];
        params.rho = vec![0.0, 0.5, 0.0];
        let (m, theta_m) = default_big_m(&case, &params, 0.6);
        assert!((m[0] - 12.0).abs() < 1e-5);
        assert!((m[1] - 12.5).abs() < 1e-5);
        assert!((theta_m - 1.2).abs() < 1e-5);
        let (m_tight, _) = default_big_m(&case, &params, 0.3);
        assert!((m_tight[0] - 6.0).abs() < 1e-5);
    }

    #[test]
    fn huge_penalty_keeps_all_lines() {
        let case = parse_case(TRIANGLE).unwrap();
        let params = cold_start(&case);
        let config = OtsConfig {
            c_prof: 1e5,
            ..OtsConfig::default()
        };
        let sol = solve_c_dc_ots(&case, &params, &config).unwrap();
        assert!(sol.u.iter().all(|&s| s));
        assert!(sol.opened_lines.is_empty());
        // equals the plain DC-OPF dispatch
        let dc = crate::dcopf::solve_dc_opf(
            &case,
            &params,
            &crate::dcopf::DcOpfOptions::model4(),
        )
        .unwrap();
        assert!((sol.dispatch_cost - dc.objective).abs() < 1e-5 * (1.0 + dc.objective.abs()));
    }

    #[test]
    fn all_fixed_returns_dc_opf() {
        let case = parse_case(TRIANGLE).unwrap();
        let params = cold_start(&case);
        let config = OtsConfig::default();
        let sol =
            solve_fixed_topology(&case, &params, &config, &[true, true, true]).unwrap();
        assert_eq!(sol.nodes, 1);
        assert!(sol.opened_lines.is_empty());
    }

    #[test]
    fn matches_enumeration_on_triangle() {
        let case = parse_case(TRIANGLE).unwrap();
        let params = cold_start(&case);
        let config = OtsConfig {
            c_prof: 10.0,
            ..OtsConfig::default()
        };
        let bb = solve_c_dc_ots(&case, &params, &config).unwrap();

        // brute force over all 2^3 patterns
        let mut best = f64::INFINITY;
        let mut best_u = vec![true; 3];
        for mask in 0..8u32 {
            let u: Vec<bool> = (0..3).map(|e| mask & (1 << e) != 0).collect();
            let topo = Topology {
                in_service: u.clone(),
            };
            if topo.check_islanding(&case).is_err() {
                continue;
            }
            if let Ok(sol) = solve_fixed_topology(&case, &params, &config, &u) {
                if sol.objective < best {
                    best = sol.objective;
                    best_u = u;
                }
            }
        }
        assert!(
            (bb.objective - best).abs() <= 1e-6 * (1.0 + best.abs()),
            "bb {} vs enumeration {} (u: {:?} vs {:?})",
            bb.objective,
            best,
            bb.u,
            best_u
        );
        assert!(bb.gap <= config.mip_gap + 1e-12);
    }

    #[test]
    fn islanding_pattern_rejected() {
        let case = parse_case(TRIANGLE).unwrap();
        let params = cold_start(&case);
        let config = OtsConfig::default();
        // opening lines 2 and 3 islands bus 3 (which has demand)
        let err = solve_fixed_topology(&case, &params, &config, &[true, false, false]);
        assert!(err.is_err() || !err.unwrap().opened_lines.is_empty());
        // through the search: fixing both off via candidates must never
        // produce an islanding incumbent
        let sol = solve_c_dc_ots(&case, &params, &config).unwrap();
        let topo = sol.topology();
        assert!(topo.check_islanding(&case).is_ok());
    }

    #[test]
    fn refixing_statuses_reproduces_dispatch_cost() {
        let case = parse_case(TRIANGLE).unwrap();
        let params = cold_start(&case);
        let config = OtsConfig {
            c_prof: 5.0,
            ..OtsConfig::default()
        };
        let sol = solve_c_dc_ots(&case, &params, &config).unwrap();
        let refixed = solve_fixed_topology(&case, &params, &config, &sol.u).unwrap();
        assert!((refixed.dispatch_cost - sol.dispatch_cost).abs() < 1e-8 * (1.0 + sol.dispatch_cost.abs()));
    }

    #[test]
    fn penalty_monotonicity() {
        let case = parse_case(TRIANGLE).unwrap();
        let params = cold_start(&case);
        let mut previous_open = usize::MAX;
        for c_prof in [0.0, 1.0, 10.0, 100.0, 1e5] {
            let config = OtsConfig {
                c_prof,
                ..OtsConfig::default()
            };
            let sol = solve_c_dc_ots(&case, &params, &config).unwrap();
            assert!(sol.opened_lines.len() <= previous_open);
            previous_open = sol.opened_lines.len();
        }
    }

    /// Big-M validity: with u_e = 0, the disjunctive flow rows stay slack
    /// for every angle profile inside the theta box.
    #[test]
    fn big_m_disjunction_slack_when_open() {
        let case = parse_case(TRIANGLE).unwrap();
        let params = cold_start(&case);
        let theta_box = 0.6;
        let (m, _) = default_big_m(&case, &params, theta_box);
        let a = case.incidence();
        // deterministic grid of angle profiles at the box corners
        for mask in 0..8u32 {
            let theta: Vec<f64> = (0..3)
                .map(|i| if mask & (1 << i) != 0 { theta_box } else { -theta_box })
                .collect();
            let d = a.apply(&theta);
            for e in 0..case.n_branch() {
                // u_e = 0, p_flow_e forced to -psi_e = 0 by thermal row
                let flow = params.b[e] * d[e] + params.rho[e];
                assert!(flow.abs() <= m[e] + 1e-12);
            }
        }
    }
}
