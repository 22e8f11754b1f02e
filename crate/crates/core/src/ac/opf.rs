//! Interior-point AC optimal power flow (polar coordinates, slack angle
//! eliminated).
//!
//! Primal-dual log-barrier method with fraction-to-boundary 0.995 and
//! barrier reduction factor 0.2, started from the flat point (mid-bound
//! voltages, zero angles, mid-bound dispatch). Derivatives are exact; the
//! Hessian of the Lagrangian is assembled from closed-form second
//! derivatives of the polar power-flow terms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{branch_admittance_blocks, branch_flows, ybus, AcSolution, Topology, Violation};
use crate::error::SolveError;
use crate::network::NetworkCase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcOpfStatus {
    /// First-order optimal point found.
    Optimal,
    /// Iteration cap reached with a feasible but not provably optimal point.
    IterationLimit,
    /// The solver converged to a point that still violates primal
    /// feasibility; constraint families are reported in the solution.
    Infeasible,
}

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct AcOpfOptions {
    pub max_iter: usize,
    /// Normalized first-order (KKT) residual target.
    pub kkt_tol: f64,
    /// Absolute equality-residual target (per-unit mismatch).
    pub feas_tol: f64,
}

impl Default for AcOpfOptions {
    fn default() -> Self {
        AcOpfOptions {
            max_iter: 300,
            kkt_tol: 1e-6,
            feas_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AcOpfOutcome {
    pub solution: AcSolution,
    pub status: AcOpfStatus,
    /// Normalized KKT residual at the returned point.
    pub kkt_residual: f64,
}

/// Fraction-to-boundary coefficient.
const XI: f64 = 0.995;
/// Barrier reduction factor per iteration.
const SIGMA: f64 = 0.2;

/// Solve Model-1 AC-OPF restricted to the in-service branches.
pub fn solve_ac_opf(case: &NetworkCase, topology: &Topology) -> Result<AcOpfOutcome, SolveError> {
    solve_ac_opf_with(case, topology, &AcOpfOptions::default())
}

pub fn solve_ac_opf_with(
    case: &NetworkCase,
    topology: &Topology,
    opts: &AcOpfOptions,
) -> Result<AcOpfOutcome, SolveError> {
    let reach = topology.check_islanding(case)?;
    let prob = Problem::build(case, topology, &reach);
    prob.solve(opts)
}

// ---------------------------------------------------------------------------
// Problem assembly
// ---------------------------------------------------------------------------

/// va*vb*(k1*cos(ta-tb) + k2*sin(ta-tb)) and its exact derivatives.
#[derive(Clone, Copy)]
struct PairTerm {
    k1: f64,
    k2: f64,
}

impl PairTerm {
    fn eval(&self, va: f64, vb: f64, d: f64) -> PairEval {
        let (s, c) = d.sin_cos();
        let phi = self.k1 * c + self.k2 * s;
        let dphi = -self.k1 * s + self.k2 * c;
        PairEval {
            value: va * vb * phi,
            d_va: vb * phi,
            d_vb: va * phi,
            d_ta: va * vb * dphi,
            h_va_vb: phi,
            h_va_ta: vb * dphi,
            h_vb_ta: va * dphi,
            h_ta_ta: -va * vb * phi,
        }
    }
}

/// Gradient/Hessian of a pair term over (va, vb, ta, tb); derivatives w.r.t.
/// tb are the negatives of the ta entries.
struct PairEval {
    value: f64,
    d_va: f64,
    d_vb: f64,
    d_ta: f64,
    h_va_vb: f64,
    h_va_ta: f64,
    h_vb_ta: f64,
    h_ta_ta: f64,
}

struct Problem<'a> {
    case: &'a NetworkCase,
    topology: &'a Topology,
    /// slack-component membership; buses outside are pinned to (1, 0)
    reach: Vec<bool>,
    y: DMatrix<Complex64>,
    n: usize,
    ng: usize,
    /// column of theta_i in x, usize::MAX for slack / unreached buses
    theta_col: Vec<usize>,
    /// column of v_i
    v_col: Vec<usize>,
    p_col: Vec<usize>,
    q_col: Vec<usize>,
    dim: usize,
    /// in-service branch indices
    live: Vec<usize>,
    /// objective equilibration factor
    cost_scale: f64,
}

impl<'a> Problem<'a> {
    fn build(case: &'a NetworkCase, topology: &'a Topology, reach: &[bool]) -> Self {
        let n = case.n_bus();
        let ng = case.n_gen();
        let slack = case.slack_position();
        let mut v_col = vec![usize::MAX; n];
        let mut theta_col = vec![usize::MAX; n];
        let mut dim = 0;
        for i in 0..n {
            if reach[i] {
                v_col[i] = dim;
                dim += 1;
            }
        }
        for i in 0..n {
            if reach[i] && i != slack {
                theta_col[i] = dim;
                dim += 1;
            }
        }
        let mut p_col = vec![usize::MAX; ng];
        let mut q_col = vec![usize::MAX; ng];
        for g in 0..ng {
            p_col[g] = dim;
            dim += 1;
        }
        for g in 0..ng {
            q_col[g] = dim;
            dim += 1;
        }
        let cost_scale = case
            .generators
            .iter()
            .map(|g| g.c1.abs().max(2.0 * g.c2))
            .fold(1.0f64, f64::max);
        Problem {
            case,
            topology,
            reach: reach.to_vec(),
            y: ybus(case, topology),
            n,
            ng,
            theta_col,
            v_col,
            p_col,
            q_col,
            dim,
            live: (0..case.n_branch())
                .filter(|&e| topology.in_service[e])
                .collect(),
            cost_scale,
        }
    }

    fn unpack(&self, x: &DVector<f64>) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut v = vec![1.0; self.n];
        let mut theta = vec![0.0; self.n];
        for i in 0..self.n {
            if self.v_col[i] != usize::MAX {
                v[i] = x[self.v_col[i]];
            }
            if self.theta_col[i] != usize::MAX {
                theta[i] = x[self.theta_col[i]];
            }
        }
        let p: Vec<f64> = (0..self.ng).map(|g| x[self.p_col[g]]).collect();
        let q: Vec<f64> = (0..self.ng).map(|g| x[self.q_col[g]]).collect();
        (v, theta, p, q)
    }

    fn flat_start(&self) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim);
        for (i, bus) in self.case.buses.iter().enumerate() {
            if self.v_col[i] != usize::MAX {
                x[self.v_col[i]] = 0.5 * (bus.v_min + bus.v_max);
            }
        }
        for (g, gen) in self.case.generators.iter().enumerate() {
            x[self.p_col[g]] = 0.5 * (gen.p_min + gen.p_max);
            x[self.q_col[g]] = 0.5 * (gen.q_min + gen.q_max);
        }
        x
    }

    fn objective(&self, x: &DVector<f64>) -> f64 {
        self.case
            .generators
            .iter()
            .enumerate()
            .map(|(g, gen)| gen.cost(x[self.p_col[g]]))
            .sum()
    }

    /// Gradient of the equilibrated objective f / cost_scale.
    fn objective_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut grad = DVector::zeros(self.dim);
        for (g, gen) in self.case.generators.iter().enumerate() {
            grad[self.p_col[g]] = gen.marginal_cost(x[self.p_col[g]]) / self.cost_scale;
        }
        grad
    }

    /// Nodal balance equalities: P_inj + p_d - sum p_g = 0 and the Q analog,
    /// for every reached bus. Returns (g, J_g) and accumulates the
    /// lambda-weighted Hessian into `w` when given.
    fn equalities(
        &self,
        x: &DVector<f64>,
        lambda: Option<(&DVector<f64>, &mut DMatrix<f64>)>,
    ) -> (DVector<f64>, DMatrix<f64>) {
        let (v, theta, p, q) = self.unpack(x);
        let rows: Vec<usize> = (0..self.n).filter(|&i| self.reach[i]).collect();
        let m = 2 * rows.len();
        let mut g = DVector::zeros(m);
        let mut jac = DMatrix::zeros(m, self.dim);
        let (lam, mut w) = match lambda {
            Some((l, w)) => (Some(l), Some(w)),
            None => (None, None),
        };

        for (r, &i) in rows.iter().enumerate() {
            let p_row = r;
            let q_row = rows.len() + r;
            let lam_p = lam.map(|l| l[p_row]).unwrap_or(0.0);
            let lam_q = lam.map(|l| l[q_row]).unwrap_or(0.0);

            let mut p_val = 0.0;
            let mut q_val = 0.0;
            for k in 0..self.n {
                let yik = self.y[(i, k)];
                if yik.re == 0.0 && yik.im == 0.0 {
                    continue;
                }
                if k == i {
                    // v_i^2 * G_ii and -v_i^2 * B_ii
                    p_val += v[i] * v[i] * yik.re;
                    q_val += -v[i] * v[i] * yik.im;
                    if self.v_col[i] != usize::MAX {
                        jac[(p_row, self.v_col[i])] += 2.0 * v[i] * yik.re;
                        jac[(q_row, self.v_col[i])] += -2.0 * v[i] * yik.im;
                        if let Some(w) = w.as_deref_mut() {
                            let c = self.v_col[i];
                            w[(c, c)] += 2.0 * (lam_p * yik.re - lam_q * yik.im);
                        }
                    }
                    continue;
                }
                let d = theta[i] - theta[k];
                let pt = PairTerm {
                    k1: yik.re,
                    k2: yik.im,
                }
                .eval(v[i], v[k], d);
                let qt = PairTerm {
                    k1: -yik.im,
                    k2: yik.re,
                }
                .eval(v[i], v[k], d);
                p_val += pt.value;
                q_val += qt.value;
                self.scatter_pair(&mut jac, p_row, i, k, &pt);
                self.scatter_pair(&mut jac, q_row, i, k, &qt);
                if let Some(w) = w.as_deref_mut() {
                    self.scatter_pair_hessian(w, i, k, &pt, lam_p);
                    self.scatter_pair_hessian(w, i, k, &qt, lam_q);
                }
            }

            g[p_row] = p_val + self.case.buses[i].p_demand;
            g[q_row] = q_val + self.case.buses[i].q_demand;
            for gidx in 0..self.ng {
                if self.case.gen_position(gidx) == i {
                    g[p_row] -= p[gidx];
                    g[q_row] -= q[gidx];
                    jac[(p_row, self.p_col[gidx])] = -1.0;
                    jac[(q_row, self.q_col[gidx])] = -1.0;
                }
            }
        }
        (g, jac)
    }

    /// Scatter the 4-variable gradient of a pair term into a Jacobian row.
    fn scatter_pair(&self, jac: &mut DMatrix<f64>, row: usize, a: usize, b: usize, t: &PairEval) {
        if self.v_col[a] != usize::MAX {
            jac[(row, self.v_col[a])] += t.d_va;
        }
        if self.v_col[b] != usize::MAX {
            jac[(row, self.v_col[b])] += t.d_vb;
        }
        if self.theta_col[a] != usize::MAX {
            jac[(row, self.theta_col[a])] += t.d_ta;
        }
        if self.theta_col[b] != usize::MAX {
            jac[(row, self.theta_col[b])] -= t.d_ta;
        }
    }

    /// Accumulate weight * Hessian(pair term) into the dense Lagrangian
    /// Hessian, expanding the (va, vb, ta, tb) block symmetrically.
    fn scatter_pair_hessian(
        &self,
        w: &mut DMatrix<f64>,
        a: usize,
        b: usize,
        t: &PairEval,
        weight: f64,
    ) {
        if weight == 0.0 {
            return;
        }
        let va = self.v_col[a];
        let vb = self.v_col[b];
        let ta = self.theta_col[a];
        let tb = self.theta_col[b];
        let mut add = |r: usize, c: usize, val: f64| {
            if r != usize::MAX && c != usize::MAX {
                w[(r, c)] += weight * val;
                if r != c {
                    w[(c, r)] += weight * val;
                }
            }
        };
        add(va, vb, t.h_va_vb);
        add(va, ta, t.h_va_ta);
        add(va, tb, -t.h_va_ta);
        add(vb, ta, t.h_vb_ta);
        add(vb, tb, -t.h_vb_ta);
        add(ta, ta, t.h_ta_ta);
        add(tb, tb, t.h_ta_ta);
        add(ta, tb, -t.h_ta_ta);
    }

    /// Inequalities h(x) <= 0 with labels; z-weighted Hessian accumulated
    /// into `w` when given.
    fn inequalities(
        &self,
        x: &DVector<f64>,
        z: Option<(&DVector<f64>, &mut DMatrix<f64>)>,
    ) -> (DVector<f64>, DMatrix<f64>, Vec<String>) {
        let (v, theta, p, q) = self.unpack(x);
        let mut rows: Vec<(f64, Vec<(usize, f64)>, String)> = Vec::new();
        let (zvec, mut w) = match z {
            Some((zv, w)) => (Some(zv), Some(w)),
            None => (None, None),
        };

        // voltage boxes
        for (i, bus) in self.case.buses.iter().enumerate() {
            if self.v_col[i] == usize::MAX {
                continue;
            }
            rows.push((
                v[i] - bus.v_max,
                vec![(self.v_col[i], 1.0)],
                format!("voltage_upper bus {}", bus.id),
            ));
            rows.push((
                bus.v_min - v[i],
                vec![(self.v_col[i], -1.0)],
                format!("voltage_lower bus {}", bus.id),
            ));
        }
        // dispatch boxes
        for (g, gen) in self.case.generators.iter().enumerate() {
            rows.push((
                p[g] - gen.p_max,
                vec![(self.p_col[g], 1.0)],
                format!("dispatch_p_max gen {}", g + 1),
            ));
            rows.push((
                gen.p_min - p[g],
                vec![(self.p_col[g], -1.0)],
                format!("dispatch_p_min gen {}", g + 1),
            ));
            rows.push((
                q[g] - gen.q_max,
                vec![(self.q_col[g], 1.0)],
                format!("dispatch_q_max gen {}", g + 1),
            ));
            rows.push((
                gen.q_min - q[g],
                vec![(self.q_col[g], -1.0)],
                format!("dispatch_q_min gen {}", g + 1),
            ));
        }
        // angle-difference boxes (linear)
        for &e in &self.live {
            let br = &self.case.branches[e];
            let (f, t) = self.case.endpoints(e);
            let d = theta[f] - theta[t];
            let mut grad_plus = Vec::new();
            if self.theta_col[f] != usize::MAX {
                grad_plus.push((self.theta_col[f], 1.0));
            }
            if self.theta_col[t] != usize::MAX {
                grad_plus.push((self.theta_col[t], -1.0));
            }
            let grad_minus: Vec<(usize, f64)> =
                grad_plus.iter().map(|&(c, s)| (c, -s)).collect();
            rows.push((
                d - br.ang_max,
                grad_plus,
                format!("angle_upper line {}", e + 1),
            ));
            rows.push((
                br.ang_min - d,
                grad_minus,
                format!("angle_lower line {}", e + 1),
            ));
        }

        let base = rows.len();
        let mut h = DVector::zeros(base + 2 * self.live.len());
        let mut jac = DMatrix::zeros(base + 2 * self.live.len(), self.dim);
        let mut labels = Vec::with_capacity(h.len());
        for (r, (val, grad, label)) in rows.into_iter().enumerate() {
            h[r] = val;
            for (c, gval) in grad {
                jac[(r, c)] = gval;
            }
            labels.push(label);
        }

        // thermal limits |S|^2 / rate^2 - 1 <= 0 on both ends
        for (k, &e) in self.live.iter().enumerate() {
            let br = &self.case.branches[e];
            let (f, t) = self.case.endpoints(e);
            let (yff, yft, ytf, ytt) = branch_admittance_blocks(br);
            let inv_r2 = 1.0 / (br.rate_a * br.rate_a);
            for (side, (ya, yab, a, b)) in
                [(0, (yff, yft, f, t)), (1, (ytf, ytt, t, f))].into_iter()
            {
                // S_a = v_a^2 conj(Ya) + pair terms with Yab
                let row = base + 2 * k + side;
                let (p_self, q_self) = if side == 0 {
                    (yff.re, -yff.im)
                } else {
                    (ytt.re, -ytt.im)
                };
                let y_cross = if side == 0 { yft } else { ytf };
                let _ = (ya, yab);
                let d = theta[a] - theta[b];
                let pt = PairTerm {
                    k1: y_cross.re,
                    k2: y_cross.im,
                }
                .eval(v[a], v[b], d);
                let qt = PairTerm {
                    k1: -y_cross.im,
                    k2: y_cross.re,
                }
                .eval(v[a], v[b], d);
                let p_flow = v[a] * v[a] * p_self + pt.value;
                let q_flow = v[a] * v[a] * q_self + qt.value;
                h[row] = (p_flow * p_flow + q_flow * q_flow) * inv_r2 - 1.0;
                labels.push(format!(
                    "thermal_{} line {}",
                    if side == 0 { "from" } else { "to" },
                    e + 1
                ));

                // gradient of P and Q flows over (va, vb, ta, tb)
                let mut grad_p = [0.0; 4];
                let mut grad_q = [0.0; 4];
                grad_p[0] = 2.0 * v[a] * p_self + pt.d_va;
                grad_p[1] = pt.d_vb;
                grad_p[2] = pt.d_ta;
                grad_p[3] = -pt.d_ta;
                grad_q[0] = 2.0 * v[a] * q_self + qt.d_va;
                grad_q[1] = qt.d_vb;
                grad_q[2] = qt.d_ta;
                grad_q[3] = -qt.d_ta;
                let cols = [self.v_col[a], self.v_col[b], self.theta_col[a], self.theta_col[b]];
                for (j, &c) in cols.iter().enumerate() {
                    if c != usize::MAX {
                        jac[(row, c)] +=
                            2.0 * inv_r2 * (p_flow * grad_p[j] + q_flow * grad_q[j]);
                    }
                }

                if let Some(w) = w.as_deref_mut() {
                    let zw = zvec.map(|zv| zv[row]).unwrap_or(0.0);
                    if zw != 0.0 {
                        // d2(|S|^2) = 2 (gP gP' + P HP + gQ gQ' + Q HQ)
                        let weight = 2.0 * zw * inv_r2;
                        // rank-one parts
                        for (ja, &ca) in cols.iter().enumerate() {
                            if ca == usize::MAX {
                                continue;
                            }
                            for (jb, &cb) in cols.iter().enumerate() {
                                if cb == usize::MAX {
                                    continue;
                                }
                                w[(ca, cb)] += weight
                                    * (grad_p[ja] * grad_p[jb] + grad_q[ja] * grad_q[jb]);
                            }
                        }
                        // curvature of P and Q themselves
                        self.scatter_pair_hessian(w, a, b, &pt, weight * p_flow);
                        self.scatter_pair_hessian(w, a, b, &qt, weight * q_flow);
                        if self.v_col[a] != usize::MAX {
                            let c = self.v_col[a];
                            w[(c, c)] += weight * (p_flow * 2.0 * p_self + q_flow * 2.0 * q_self);
                        }
                    }
                }
            }
        }

        (h, jac, labels)
    }

    // -----------------------------------------------------------------
    // Interior-point loop
    // -----------------------------------------------------------------

    fn solve(&self, opts: &AcOpfOptions) -> Result<AcOpfOutcome, SolveError> {
        let mut x = self.flat_start();
        let (g0, _) = self.equalities(&x, None);
        let me = g0.len();
        let (h0, _, _) = self.inequalities(&x, None);
        let mi = h0.len();

        let mut lambda = DVector::zeros(me);
        let mut s = DVector::from_element(mi, 1.0);
        for i in 0..mi {
            s[i] = (-h0[i]).max(1e-2);
        }
        let mut zdual = DVector::from_element(mi, 1.0);
        for i in 0..mi {
            zdual[i] = (1.0 / s[i]).clamp(1e-4, 1e4);
        }
        let mut mu = s.dot(&zdual) / mi.max(1) as f64;

        let mut status = AcOpfStatus::IterationLimit;
        let mut kkt = f64::INFINITY;
        for _iter in 0..opts.max_iter {
            let grad_f = self.objective_gradient(&x);
            let mut w = DMatrix::zeros(self.dim, self.dim);
            for (g, gen) in self.case.generators.iter().enumerate() {
                w[(self.p_col[g], self.p_col[g])] = 2.0 * gen.c2 / self.cost_scale;
            }
            let (g, jg) = self.equalities(&x, Some((&lambda, &mut w)));
            let (h, jh, _) = self.inequalities(&x, Some((&zdual, &mut w)));

            let r_dual = &grad_f + jg.transpose() * &lambda + jh.transpose() * &zdual;
            let r_h = &h + &s;
            let comp = s.dot(&zdual);

            let dual_scale = 1.0 + lambda.amax().max(zdual.amax());
            let grad_cond = r_dual.amax() / dual_scale;
            let feas_eq = if me > 0 { g.amax() } else { 0.0 };
            let feas_in = r_h.amax();
            let comp_cond = comp / (1.0 + x.amax());
            kkt = grad_cond.max(comp_cond);

            if feas_eq < opts.feas_tol && feas_in < 1e-8 && grad_cond < opts.kkt_tol
                && comp_cond < 1e-7
            {
                status = AcOpfStatus::Optimal;
                break;
            }

            // Reduced KKT system.
            let mut m_mat = w;
            for i in 0..mi {
                let wgt = zdual[i] / s[i];
                let row = jh.row(i);
                for a in 0..self.dim {
                    let ra = row[a];
                    if ra == 0.0 {
                        continue;
                    }
                    for b in 0..self.dim {
                        let rb = row[b];
                        if rb != 0.0 {
                            m_mat[(a, b)] += wgt * ra * rb;
                        }
                    }
                }
            }
            let mut corr = DVector::zeros(mi);
            for i in 0..mi {
                corr[i] = (zdual[i] * r_h[i] - (s[i] * zdual[i] - mu)) / s[i];
            }
            let rhs_x = -&r_dual - jh.transpose() * corr;

            let mut kkt_mat = DMatrix::zeros(self.dim + me, self.dim + me);
            kkt_mat
                .view_mut((0, 0), (self.dim, self.dim))
                .copy_from(&m_mat);
            kkt_mat
                .view_mut((self.dim, 0), (me, self.dim))
                .copy_from(&jg);
            kkt_mat
                .view_mut((0, self.dim), (self.dim, me))
                .copy_from(&jg.transpose());
            let mut rhs = DVector::zeros(self.dim + me);
            rhs.rows_mut(0, self.dim).copy_from(&rhs_x);
            rhs.rows_mut(self.dim, me).copy_from(&(-&g));

            let Some(sol) = solve_with_inertia_correction(kkt_mat, rhs, self.dim, me) else {
                // numerical breakdown: stop and classify the current point
                break;
            };
            let dx: DVector<f64> = sol.rows(0, self.dim).into();
            let dlam: DVector<f64> = sol.rows(self.dim, me).into();
            let ds = -&r_h - &jh * &dx;
            let mut dz = DVector::zeros(mi);
            for i in 0..mi {
                dz[i] = -((s[i] * zdual[i] - mu) + zdual[i] * ds[i]) / s[i];
            }

            let mut alpha_p: f64 = 1.0;
            for i in 0..mi {
                if ds[i] < 0.0 {
                    alpha_p = alpha_p.min(-XI * s[i] / ds[i]);
                }
            }
            let mut alpha_d: f64 = 1.0;
            for i in 0..mi {
                if dz[i] < 0.0 {
                    alpha_d = alpha_d.min(-XI * zdual[i] / dz[i]);
                }
            }

            x += alpha_p * &dx;
            s += alpha_p * &ds;
            lambda += alpha_d * &dlam;
            zdual += alpha_d * &dz;

            // Reduce the barrier only when the step made real progress;
            // otherwise keep it tied to the measured complementarity.
            let comp_now = s.dot(&zdual) / mi.max(1) as f64;
            if alpha_p.min(alpha_d) > 0.1 {
                mu = SIGMA * comp_now;
            } else {
                mu = mu.min(comp_now);
            }
            if !x.iter().all(|v| v.is_finite()) {
                return Err(SolveError::Singular("AC-OPF iterates diverged".into()));
            }
            if alpha_p < 1e-14 && alpha_d < 1e-14 {
                break;
            }
        }

        // Assemble the solution at the final point.
        let (v, theta, p, q) = self.unpack(&x);
        let (s_from, s_to) = branch_flows(self.case, self.topology, &v, &theta);
        let objective = self.objective(&x);
        let mut solution = AcSolution {
            v,
            theta,
            p_gen: p,
            q_gen: q,
            s_from,
            s_to,
            objective,
            converged: status == AcOpfStatus::Optimal,
            violations: vec![],
        };
        if status != AcOpfStatus::Optimal {
            let viols = super::check_feasibility(self.case, self.topology, &solution);
            if !viols.is_empty() {
                status = AcOpfStatus::Infeasible;
            }
            solution.violations = viols;
        }
        Ok(AcOpfOutcome {
            solution,
            status,
            kkt_residual: kkt,
        })
    }
}

/// Solve the reduced KKT system, escalating a Tikhonov shift on the (1,1)
/// block when the factorization fails or returns a non-finite step.
fn solve_with_inertia_correction(
    kkt: DMatrix<f64>,
    rhs: DVector<f64>,
    n: usize,
    m: usize,
) -> Option<DVector<f64>> {
    if let Some(sol) = kkt.clone().lu().solve(&rhs) {
        if sol.iter().all(|v| v.is_finite()) && sol.amax() < 1e12 {
            return Some(sol);
        }
    }
    let mut delta = 1e-8;
    for _ in 0..8 {
        let mut k = kkt.clone();
        for i in 0..n {
            k[(i, i)] += delta;
        }
        for i in n..n + m {
            k[(i, i)] -= delta;
        }
        if let Some(sol) = k.lu().solve(&rhs) {
            if sol.iter().all(|v| v.is_finite()) && sol.amax() < 1e12 {
                return Some(sol);
            }
        }
        delta *= 10.0;
    }
    None
}

/// Like [`check_feasibility`] but folded into violation summaries per family.
pub fn classify_violations(violations: &[Violation]) -> Vec<(String, f64)> {
    let mut fam: Vec<(String, f64)> = Vec::new();
    for v in violations {
        let family = v
            .constraint
            .split_whitespace()
            .next()
            .unwrap_or("other")
            .to_string();
        match fam.iter_mut().find(|(f, _)| *f == family) {
            Some((_, m)) => *m = m.max(v.magnitude),
            None => fam.push((family, v.magnitude)),
        }
    }
    fam
}
