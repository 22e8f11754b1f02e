//! Dense convex quadratic programming.
//!
//! Solves
//! ```text
//!     minimize   1/2 x' Q x + c' x
//!     subject to A x  = b
//!                G x <= h
//! ```
//! with a primal-dual interior-point method (Mehrotra predictor-corrector)
//! followed by an active-set polish: the equality-constrained QP on the
//! identified active set is re-solved so the returned duals and active set
//! are crisp enough for KKT differentiation.

use nalgebra::{DMatrix, DVector};

use crate::error::SolveError;

/// Inequality is counted active when slack < `ACTIVE_SLACK` and its
/// multiplier exceeds `ACTIVE_DUAL`. Constraints with both tiny are
/// weakly active: excluded, with the degeneracy flag raised.
pub const ACTIVE_SLACK: f64 = 1e-7;
pub const ACTIVE_DUAL: f64 = 1e-6;

/// Tikhonov regularization applied when a KKT factorization is singular.
pub const KKT_REGULARIZATION: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Qp {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
    pub g_in: DMatrix<f64>,
    pub h_in: DVector<f64>,
}

impl Qp {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * (x.transpose() * &self.q * x)[(0, 0)] + self.c.dot(x)
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Multipliers for the equalities in the stationarity convention
    /// Qx + c + A'y + G'z = 0.
    pub y_eq: DVector<f64>,
    /// Multipliers for the inequalities, nonnegative.
    pub z_in: DVector<f64>,
    pub objective: f64,
    /// Indices of binding inequality rows.
    pub active: Vec<usize>,
    /// True when weakly-active constraints were detected or the polish
    /// system needed regularization.
    pub degenerate: bool,
    pub iterations: usize,
}

impl QpSolution {
    /// Worst complementarity product z_i * slack_i.
    pub fn max_complementarity(&self, qp: &Qp) -> f64 {
        let slack = &qp.h_in - &qp.g_in * &self.x;
        self.z_in
            .iter()
            .zip(slack.iter())
            .map(|(z, s)| (z * s).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Default)]
pub struct QpOptions {
    /// Warm-start primal point.
    pub x0: Option<DVector<f64>>,
}

const MAX_ITER: usize = 200;
const GAP_TOL: f64 = 1e-10;
const RES_TOL: f64 = 1e-10;

/// Solve a convex QP. Returns `SolveError::Infeasible` with the phase-1
/// residual when no feasible point exists.
///
/// The objective is equilibrated to unit scale internally so convergence
/// tolerances mean the same thing across cost magnitudes; multipliers are
/// scaled back before returning.
pub fn solve(qp: &Qp, opts: &QpOptions) -> Result<QpSolution, SolveError> {
    validate(qp)?;
    let obj_scale = qp.c.amax().max(qp.q.amax()).max(1.0);
    let scaled = Qp {
        q: &qp.q / obj_scale,
        c: &qp.c / obj_scale,
        a_eq: qp.a_eq.clone(),
        b_eq: qp.b_eq.clone(),
        g_in: qp.g_in.clone(),
        h_in: qp.h_in.clone(),
    };
    match interior_point(&scaled, opts) {
        IpmOutcome::Converged(raw) => {
            let mut sol = polish(&scaled, raw);
            sol.y_eq *= obj_scale;
            sol.z_in *= obj_scale;
            sol.objective = qp.objective(&sol.x);
            Ok(sol)
        }
        IpmOutcome::Stalled => {
            let feas = feasibility_residual(&scaled)?;
            if feas > 1e-5 {
                Err(SolveError::Infeasible(format!(
                    "QP infeasible (phase-1 residual {feas:.3e})"
                )))
            } else {
                Err(SolveError::IterationCap {
                    iterations: MAX_ITER,
                    context: "QP interior point".into(),
                })
            }
        }
    }
}

fn validate(qp: &Qp) -> Result<(), SolveError> {
    let n = qp.n();
    if qp.q.nrows() != n || qp.q.ncols() != n {
        return Err(SolveError::Invalid("Q dimension mismatch".into()));
    }
    if qp.a_eq.ncols() != n && qp.a_eq.nrows() > 0 {
        return Err(SolveError::Invalid("A_eq dimension mismatch".into()));
    }
    if qp.g_in.ncols() != n && qp.g_in.nrows() > 0 {
        return Err(SolveError::Invalid("G dimension mismatch".into()));
    }
    if qp.a_eq.nrows() != qp.b_eq.len() || qp.g_in.nrows() != qp.h_in.len() {
        return Err(SolveError::Invalid("rhs dimension mismatch".into()));
    }
    Ok(())
}

enum IpmOutcome {
    Converged(RawSolution),
    Stalled,
}

struct RawSolution {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    iterations: usize,
}

fn interior_point(qp: &Qp, opts: &QpOptions) -> IpmOutcome {
    let n = qp.n();
    let me = qp.a_eq.nrows();
    let mi = qp.g_in.nrows();

    let mut x = opts
        .x0
        .clone()
        .filter(|v| v.len() == n)
        .unwrap_or_else(|| DVector::zeros(n));
    let mut y = DVector::zeros(me);
    let mut s = DVector::from_element(mi, 1.0);
    let mut z = DVector::from_element(mi, 1.0);
    if mi > 0 {
        // Mehrotra-style start: center the slack estimate so no component
        // begins tiny relative to the rest.
        let slack0 = &qp.h_in - &qp.g_in * &x;
        let min_s = slack0.iter().cloned().fold(f64::INFINITY, f64::min);
        let shift = (-1.5 * min_s).max(0.0);
        for i in 0..mi {
            s[i] = slack0[i] + shift;
        }
        let mean = s.iter().sum::<f64>() / mi as f64;
        let extra = 0.5 * mean.max(1.0);
        for i in 0..mi {
            s[i] += extra;
        }
        let z0 = (1.0 + qp.c.amax()) / (1.0 + mean).sqrt();
        let z0 = z0.clamp(1.0, 1e4);
        for i in 0..mi {
            z[i] = z0;
        }
    }

    // Special case: no inequalities -> single KKT solve.
    if mi == 0 {
        let kkt = assemble_kkt(&qp.q, &qp.a_eq, 0.0);
        let mut rhs = DVector::zeros(n + me);
        rhs.rows_mut(0, n).copy_from(&(-&qp.c));
        rhs.rows_mut(n, me).copy_from(&qp.b_eq);
        if let Some(sol) = solve_regularized(kkt, rhs, n, me) {
            return IpmOutcome::Converged(RawSolution {
                x: sol.rows(0, n).into(),
                y: sol.rows(n, me).into(),
                z,
                iterations: 1,
            });
        }
        return IpmOutcome::Stalled;
    }

    for iter in 0..MAX_ITER {
        let slack_gap = s.dot(&z) / mi as f64;
        let r_dual = &qp.q * &x + &qp.c + qp.a_eq.transpose() * &y + qp.g_in.transpose() * &z;
        let r_eq = &qp.a_eq * &x - &qp.b_eq;
        let r_in = &qp.g_in * &x + &s - &qp.h_in;

        let obj = qp.objective(&x);
        let scale = 1.0 + obj.abs();
        let gap_abs = s.dot(&z);
        let dual_scale = 1.0 + qp.c.amax();
        let eq_ok = me == 0 || r_eq.amax() < RES_TOL * (1.0 + qp.b_eq.amax());
        let in_ok = r_in.amax() < RES_TOL * (1.0 + qp.h_in.amax().max(1.0));
        let dual_ok = r_dual.amax() < 1e-7 * dual_scale;
        let gap_ok = gap_abs < GAP_TOL.max(1e-9 * scale);
        // The active-set polish recovers exact stationarity, so accept a
        // point whose primal side and gap are at machine level even if the
        // barrier-Hessian conditioning keeps the raw dual residual larger.
        let dual_floor = gap_abs < 1e-12 * scale && r_dual.amax() < 1e-6 * dual_scale;
        if eq_ok && in_ok && ((dual_ok && gap_ok) || dual_floor) {
            return IpmOutcome::Converged(RawSolution {
                x,
                y,
                z,
                iterations: iter,
            });
        }

        // Normal matrix H = Q + G' (Z/S) G.
        let mut h = qp.q.clone();
        for i in 0..mi {
            let w = z[i] / s[i];
            let gi = qp.g_in.row(i);
            for a in 0..n {
                let ga = gi[a];
                if ga == 0.0 {
                    continue;
                }
                for b in 0..n {
                    h[(a, b)] += w * ga * gi[b];
                }
            }
        }

        // Affine predictor.
        let rc_aff: DVector<f64> = s.component_mul(&z);
        let (dx_a, _dy_a, ds_a, dz_a) =
            match newton_step(qp, &h, &s, &z, &r_dual, &r_eq, &r_in, &rc_aff) {
                Some(v) => v,
                None => return IpmOutcome::Stalled,
            };
        let alpha_p_aff = max_step(&s, &ds_a, 1.0);
        let alpha_d_aff = max_step(&z, &dz_a, 1.0);
        let gap_aff = (&s + alpha_p_aff * &ds_a).dot(&(&z + alpha_d_aff * &dz_a)) / mi as f64;
        let mut sigma = (gap_aff / slack_gap).clamp(0.0, 1.0).powi(3);
        // fall back to a centering step when the affine direction is poor
        if alpha_p_aff.min(alpha_d_aff) < 1e-2 {
            sigma = sigma.max(0.8);
        }

        // Corrector.
        let mut rc = DVector::zeros(mi);
        for i in 0..mi {
            rc[i] = s[i] * z[i] + ds_a[i] * dz_a[i] - sigma * slack_gap;
        }
        let (dx, dy, ds, dz) = match newton_step(qp, &h, &s, &z, &r_dual, &r_eq, &r_in, &rc) {
            Some(v) => v,
            None => return IpmOutcome::Stalled,
        };

        let tau = 0.995f64.max(1.0 - 0.1 * slack_gap).min(0.99999);
        let alpha_p = max_step(&s, &ds, tau);
        let alpha_d = max_step(&z, &dz, tau);
        let _ = dx_a;

        x += alpha_p * &dx;
        s += alpha_p * &ds;
        y += alpha_d * &dy;
        z += alpha_d * &dz;

        if alpha_p < 1e-12 && alpha_d < 1e-12 {
            return IpmOutcome::Stalled;
        }
    }
    IpmOutcome::Stalled
}

/// One reduced Newton solve for the given complementarity residual.
#[allow(clippy::too_many_arguments)]
fn newton_step(
    qp: &Qp,
    h: &DMatrix<f64>,
    s: &DVector<f64>,
    z: &DVector<f64>,
    r_dual: &DVector<f64>,
    r_eq: &DVector<f64>,
    r_in: &DVector<f64>,
    r_comp: &DVector<f64>,
) -> Option<(DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>)> {
    let n = qp.n();
    let me = qp.a_eq.nrows();
    let mi = qp.g_in.nrows();

    // rhs_x = -r_dual - G' S^-1 (Z r_in - r_comp)
    let mut tmp = DVector::zeros(mi);
    for i in 0..mi {
        tmp[i] = (z[i] * r_in[i] - r_comp[i]) / s[i];
    }
    let rhs_x = -r_dual - qp.g_in.transpose() * tmp;

    let kkt = assemble_kkt(h, &qp.a_eq, 0.0);
    let mut rhs = DVector::zeros(n + me);
    rhs.rows_mut(0, n).copy_from(&rhs_x);
    rhs.rows_mut(n, me).copy_from(&(-r_eq));
    let sol = solve_regularized(kkt, rhs, n, me)?;

    let dx: DVector<f64> = sol.rows(0, n).into();
    let dy: DVector<f64> = sol.rows(n, me).into();
    let ds = -r_in - &qp.g_in * &dx;
    let mut dz = DVector::zeros(mi);
    for i in 0..mi {
        dz[i] = -(r_comp[i] + z[i] * ds[i]) / s[i];
    }
    Some((dx, dy, ds, dz))
}

fn assemble_kkt(h: &DMatrix<f64>, a: &DMatrix<f64>, reg: f64) -> DMatrix<f64> {
    let n = h.nrows();
    let m = a.nrows();
    let mut kkt = DMatrix::zeros(n + m, n + m);
    kkt.view_mut((0, 0), (n, n)).copy_from(h);
    if m > 0 {
        kkt.view_mut((n, 0), (m, n)).copy_from(a);
        kkt.view_mut((0, n), (n, m)).copy_from(&a.transpose());
    }
    for i in 0..n {
        kkt[(i, i)] += reg;
    }
    for i in n..n + m {
        kkt[(i, i)] -= reg;
    }
    kkt
}

/// LU solve; on singularity retry with escalating Tikhonov regularization.
fn solve_regularized(
    kkt: DMatrix<f64>,
    rhs: DVector<f64>,
    n: usize,
    m: usize,
) -> Option<DVector<f64>> {
    if let Some(sol) = kkt.clone().lu().solve(&rhs) {
        if sol.iter().all(|v| v.is_finite()) {
            return Some(sol);
        }
    }
    let mut reg = KKT_REGULARIZATION;
    for _ in 0..8 {
        let mut k = kkt.clone();
        for i in 0..n {
            k[(i, i)] += reg;
        }
        for i in n..n + m {
            k[(i, i)] -= reg;
        }
        if let Some(sol) = k.lu().solve(&rhs) {
            if sol.iter().all(|v| v.is_finite()) {
                return Some(sol);
            }
        }
        reg *= 100.0;
    }
    None
}

fn max_step(v: &DVector<f64>, dv: &DVector<f64>, tau: f64) -> f64 {
    let mut alpha: f64 = 1.0;
    for i in 0..v.len() {
        if dv[i] < 0.0 {
            alpha = alpha.min(-tau * v[i] / dv[i]);
        }
    }
    alpha.max(0.0)
}

/// Re-solve the equality-constrained QP on the identified active set so the
/// returned point and multipliers satisfy strict complementarity sharply.
fn polish(qp: &Qp, raw: RawSolution) -> QpSolution {
    let n = qp.n();
    let me = qp.a_eq.nrows();
    let mi = qp.g_in.nrows();

    let slack = &qp.h_in - &qp.g_in * &raw.x;
    let mut active = Vec::new();
    let mut degenerate = false;
    for i in 0..mi {
        let binding = slack[i] < ACTIVE_SLACK;
        let priced = raw.z[i] > ACTIVE_DUAL;
        if binding && priced {
            active.push(i);
        } else if binding && !priced {
            degenerate = true;
        }
    }

    let ma = active.len();
    let mut a_all = DMatrix::zeros(me + ma, n);
    let mut b_all = DVector::zeros(me + ma);
    if me > 0 {
        a_all.view_mut((0, 0), (me, n)).copy_from(&qp.a_eq);
        b_all.rows_mut(0, me).copy_from(&qp.b_eq);
    }
    for (k, &i) in active.iter().enumerate() {
        a_all.row_mut(me + k).copy_from(&qp.g_in.row(i));
        b_all[me + k] = qp.h_in[i];
    }

    let kkt = assemble_kkt(&qp.q, &a_all, 0.0);
    let mut rhs = DVector::zeros(n + me + ma);
    rhs.rows_mut(0, n).copy_from(&(-&qp.c));
    rhs.rows_mut(n, me + ma).copy_from(&b_all);

    let fallback = |degenerate: bool| QpSolution {
        objective: qp.objective(&raw.x),
        x: raw.x.clone(),
        y_eq: raw.y.clone(),
        z_in: raw.z.clone(),
        active: active.clone(),
        degenerate,
        iterations: raw.iterations,
    };

    let direct = kkt.clone().lu().solve(&rhs);
    let needed_reg = direct.is_none();
    let sol = match direct.or_else(|| solve_regularized(kkt, rhs, n, me + ma)) {
        Some(s) if s.iter().all(|v| v.is_finite()) => s,
        _ => return fallback(degenerate),
    };
    let x: DVector<f64> = sol.rows(0, n).into();
    let y: DVector<f64> = sol.rows(n, me).into();
    let z_act: DVector<f64> = sol.rows(n + me, ma).into();

    // Accept the polish only if it stays feasible and correctly signed.
    let slack_new = &qp.h_in - &qp.g_in * &x;
    let feas_ok = slack_new.iter().all(|&s| s > -1e-9);
    let sign_ok = z_act.iter().all(|&z| z > -1e-9);
    if !feas_ok || !sign_ok {
        return fallback(degenerate);
    }

    let mut z_full = DVector::zeros(mi);
    for (k, &i) in active.iter().enumerate() {
        z_full[i] = z_act[k].max(0.0);
    }

    QpSolution {
        objective: qp.objective(&x),
        x,
        y_eq: y,
        z_in: z_full,
        active,
        degenerate: degenerate || needed_reg,
        iterations: raw.iterations,
    }
}

/// Minimum attainable constraint violation, via the always-feasible
/// phase-1 problem
///
/// ```text
///     min 1/2 |t|^2   s.t.  A x = b,  G x - t <= h,  t >= 0.
/// ```
///
/// Equalities stay as hard constraints so the reported residual is not
/// limited to the square root of the solver tolerance.
fn feasibility_residual(qp: &Qp) -> Result<f64, SolveError> {
    let n = qp.n();
    let me = qp.a_eq.nrows();
    let mi = qp.g_in.nrows();
    let nt = n + mi;

    let mut q = DMatrix::zeros(nt, nt);
    for i in n..nt {
        q[(i, i)] = 1.0;
    }
    let c = DVector::zeros(nt);

    let mut a_eq = DMatrix::zeros(me, nt);
    if me > 0 {
        a_eq.view_mut((0, 0), (me, n)).copy_from(&qp.a_eq);
    }

    let mut g = DMatrix::zeros(2 * mi, nt);
    let mut h = DVector::zeros(2 * mi);
    for i in 0..mi {
        for j in 0..n {
            g[(i, j)] = qp.g_in[(i, j)];
        }
        g[(i, n + i)] = -1.0;
        h[i] = qp.h_in[i];
        g[(mi + i, n + i)] = -1.0;
        h[mi + i] = 0.0;
    }

    let phase1 = Qp {
        q,
        c,
        a_eq,
        b_eq: qp.b_eq.clone(),
        g_in: g,
        h_in: h,
    };
    match interior_point(&phase1, &QpOptions::default()) {
        IpmOutcome::Converged(raw) => {
            let x: DVector<f64> = raw.x.rows(0, n).into();
            let eq_res = if me > 0 {
                (&qp.a_eq * &x - &qp.b_eq).amax()
            } else {
                0.0
            };
            // measure the inequality violation from x directly
            let in_res = if mi > 0 {
                (&qp.g_in * &x - &qp.h_in)
                    .iter()
                    .cloned()
                    .fold(0.0f64, f64::max)
            } else {
                0.0
            };
            Ok(eq_res.max(in_res))
        }
        IpmOutcome::Stalled => Err(SolveError::Singular(
            "phase-1 feasibility solve stalled".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dm(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, data)
    }

    fn dv(data: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(data)
    }

    #[test]
    fn unconstrained_quadratic() {
        // min (x-1)^2 + (y+2)^2
        let qp = Qp {
            q: dm(2, 2, &[2.0, 0.0, 0.0, 2.0]),
            c: dv(&[-2.0, 4.0]),
            a_eq: DMatrix::zeros(0, 2),
            b_eq: dv(&[]),
            g_in: DMatrix::zeros(0, 2),
            h_in: dv(&[]),
        };
        let sol = solve(&qp, &QpOptions::default()).unwrap();
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-8);
        assert_relative_eq!(sol.x[1], -2.0, epsilon = 1e-8);
    }

    #[test]
    fn equality_constrained() {
        // min x^2 + y^2 s.t. x + y = 2 -> (1, 1), y_eq = -2
        let qp = Qp {
            q: dm(2, 2, &[2.0, 0.0, 0.0, 2.0]),
            c: dv(&[0.0, 0.0]),
            a_eq: dm(1, 2, &[1.0, 1.0]),
            b_eq: dv(&[2.0]),
            g_in: DMatrix::zeros(0, 2),
            h_in: dv(&[]),
        };
        let sol = solve(&qp, &QpOptions::default()).unwrap();
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.x[1], 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.y_eq[0], -2.0, epsilon = 1e-9);
    }

    #[test]
    fn active_inequality_with_crisp_dual() {
        // min 1/2 x^2 + 1/2 y^2 + x  s.t.  -x - 2y <= -1
        // known solution (-0.6, 0.8)
        let qp = Qp {
            q: dm(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            c: dv(&[1.0, 0.0]),
            a_eq: DMatrix::zeros(0, 2),
            b_eq: dv(&[]),
            g_in: dm(1, 2, &[-1.0, -2.0]),
            h_in: dv(&[-1.0]),
        };
        let sol = solve(&qp, &QpOptions::default()).unwrap();
        assert_relative_eq!(sol.x[0], -0.6, epsilon = 1e-8);
        assert_relative_eq!(sol.x[1], 0.8, epsilon = 1e-8);
        assert_eq!(sol.active, vec![0]);
        // stationarity: x + c + G' z = 0 -> z = 0.4
        assert_relative_eq!(sol.z_in[0], 0.4, epsilon = 1e-8);
        assert!(sol.max_complementarity(&qp) < 1e-8);
    }

    #[test]
    fn inactive_constraints_have_zero_dual_after_polish() {
        let qp = Qp {
            q: dm(1, 1, &[2.0]),
            c: dv(&[-2.0]),
            a_eq: DMatrix::zeros(0, 1),
            b_eq: dv(&[]),
            g_in: dm(2, 1, &[1.0, -1.0]),
            h_in: dv(&[10.0, 10.0]),
        };
        let sol = solve(&qp, &QpOptions::default()).unwrap();
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-9);
        assert!(sol.active.is_empty());
        assert_eq!(sol.z_in[0], 0.0);
        assert_eq!(sol.z_in[1], 0.0);
    }

    #[test]
    fn infeasible_detected() {
        // x <= -1 and -x <= -2 (x >= 2) cannot both hold
        let qp = Qp {
            q: dm(1, 1, &[2.0]),
            c: dv(&[0.0]),
            a_eq: DMatrix::zeros(0, 1),
            b_eq: dv(&[]),
            g_in: dm(2, 1, &[1.0, -1.0]),
            h_in: dv(&[-1.0, -2.0]),
        };
        match solve(&qp, &QpOptions::default()) {
            Err(SolveError::Infeasible(_)) => {}
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn linear_cost_box() {
        // pure LP: min -x s.t. 0 <= x <= 3
        let qp = Qp {
            q: DMatrix::zeros(1, 1),
            c: dv(&[-1.0]),
            a_eq: DMatrix::zeros(0, 1),
            b_eq: dv(&[]),
            g_in: dm(2, 1, &[1.0, -1.0]),
            h_in: dv(&[3.0, 0.0]),
        };
        let sol = solve(&qp, &QpOptions::default()).unwrap();
        assert_relative_eq!(sol.x[0], 3.0, epsilon = 1e-8);
        assert_eq!(sol.active, vec![0]);
        assert_relative_eq!(sol.z_in[0], 1.0, epsilon = 1e-8);
    }

    #[test]
    fn warm_start_agrees_with_cold() {
        let qp = Qp {
            q: dm(2, 2, &[2.0, 0.5, 0.5, 4.0]),
            c: dv(&[1.0, -3.0]),
            a_eq: dm(1, 2, &[1.0, 1.0]),
            b_eq: dv(&[1.0]),
            g_in: dm(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            h_in: dv(&[0.9, 0.5]),
        };
        let cold = solve(&qp, &QpOptions::default()).unwrap();
        let warm = solve(
            &qp,
            &QpOptions {
                x0: Some(dv(&[0.3, 0.7])),
            },
        )
        .unwrap();
        assert_relative_eq!(cold.objective, warm.objective, epsilon = 1e-9);
    }
}
