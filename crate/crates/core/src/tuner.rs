//! Conjugate-gradient tuner for the DC parameters (b, psi).
//!
//! Nonlinear CG with Polak-Ribiere updates (clamped to PR+ by default) and
//! a halving Wolfe line search: starting from alpha = 1, a step is accepted
//! when it satisfies the Armijo condition and the strong curvature test.
//! Each loss/gradient evaluation re-solves the DC-OPF and differentiates
//! its KKT system.

use serde::{Deserialize, Serialize};

use crate::dcopf::{self, DcOpfOptions};
use crate::error::SolveError;
use crate::network::NetworkCase;
use crate::params::{with_tuned, DcParameters};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TunerConfig {
    /// Gradient-norm convergence tolerance.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Armijo constant.
    pub alpha1: f64,
    /// Curvature constant, between alpha1 and 1.
    pub alpha2: f64,
    pub max_halvings: usize,
    /// CG restart interval; 0 means the number of variables.
    pub restart_period: usize,
    /// Use the raw Polak-Ribiere coefficient instead of the PR+ clamp.
    pub plain_pr: bool,
    /// Optional secondary stop on the relative loss change.
    pub loss_change_tol: Option<f64>,
}

impl Default for TunerConfig {
    fn default() -> Self {
        TunerConfig {
            epsilon: 1e-5,
            max_iter: 200,
            alpha1: 1e-4,
            alpha2: 0.4,
            max_halvings: 40,
            restart_period: 0,
            plain_pr: false,
            loss_change_tol: None,
        }
    }
}

impl TunerConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(0.0 < self.alpha1 && self.alpha1 < self.alpha2 && self.alpha2 < 1.0) {
            return Err(SolveError::Invalid(
                "need 0 < alpha1 < alpha2 < 1".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(SolveError::Invalid("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TunerStatus {
    Converged,
    MaxIter,
    LineSearchFailed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TunerTrace {
    pub records: Vec<TraceRecord>,
    pub status: TunerStatus,
}

impl TunerTrace {
    pub fn final_loss(&self) -> f64 {
        self.records.last().map(|r| r.loss).unwrap_or(f64::NAN)
    }

    pub fn initial_loss(&self) -> f64 {
        self.records.first().map(|r| r.loss).unwrap_or(f64::NAN)
    }

    /// CSV rows (iter, loss, grad_norm, alpha, beta).
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["iter", "loss", "grad_norm", "alpha", "beta"])
            .expect("csv write");
        for r in &self.records {
            w.write_record([
                r.iter.to_string(),
                format!("{:.17e}", r.loss),
                format!("{:.17e}", r.grad_norm),
                format!("{:.17e}", r.alpha),
                format!("{:.17e}", r.beta),
            ])
            .expect("csv write");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One evaluation of the objective: loss and gradient, or `None` when the
/// point is not evaluable (infeasible subproblem, non-finite loss).
pub type Evaluation = Option<(f64, Vec<f64>)>;

struct Accepted {
    alpha: f64,
    x: Vec<f64>,
    loss: f64,
    grad: Vec<f64>,
}

/// Halving Wolfe line search along `p` from `x`. Starts at alpha = 1,
/// accepts the first step satisfying Armijo and the strong curvature test;
/// when halvings run out, falls back to the best Armijo-satisfying point.
fn wolfe_search<F>(
    eval: &mut F,
    x: &[f64],
    p: &[f64],
    loss0: f64,
    g0_dot_p: f64,
    cfg: &TunerConfig,
) -> Option<Accepted>
where
    F: FnMut(&[f64]) -> Evaluation,
{
    let mut alpha = 1.0f64;
    let mut best_armijo: Option<Accepted> = None;
    for _ in 0..=cfg.max_halvings {
        let cand: Vec<f64> = x.iter().zip(p).map(|(xi, pi)| xi + alpha * pi).collect();
        if let Some((loss, grad)) = eval(&cand) {
            if loss.is_finite() {
                let armijo = loss <= loss0 + cfg.alpha1 * alpha * g0_dot_p;
                let curvature = dot(&grad, p).abs() <= cfg.alpha2 * g0_dot_p.abs();
                if armijo {
                    let acc = Accepted {
                        alpha,
                        x: cand,
                        loss,
                        grad,
                    };
                    if curvature {
                        return Some(acc);
                    }
                    if best_armijo.as_ref().map(|b| loss < b.loss).unwrap_or(true) {
                        best_armijo = Some(acc);
                    }
                }
            }
        }
        alpha /= 2.0;
    }
    best_armijo
}

/// Minimize a smooth objective with CG / Polak-Ribiere. Exposed generically
/// so the optimizer can be exercised on surrogate objectives.
pub fn minimize<F>(
    mut eval: F,
    x0: &[f64],
    cfg: &TunerConfig,
) -> Result<(Vec<f64>, TunerTrace), SolveError>
where
    F: FnMut(&[f64]) -> Evaluation,
{
    cfg.validate()?;
    let restart = if cfg.restart_period == 0 {
        x0.len().max(1)
    } else {
        cfg.restart_period
    };

    let (mut loss, mut grad) = eval(x0).ok_or_else(|| {
        SolveError::Invalid("objective not evaluable at the initial point".into())
    })?;
    let mut x = x0.to_vec();
    let mut records = vec![TraceRecord {
        iter: 0,
        loss,
        grad_norm: norm(&grad),
        alpha: 0.0,
        beta: 0.0,
    }];

    let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut status = TunerStatus::MaxIter;
    let mut since_restart = 0usize;

    for iter in 1..=cfg.max_iter {
        if norm(&grad) <= cfg.epsilon {
            status = TunerStatus::Converged;
            break;
        }
        let mut g_dot_p = dot(&grad, &dir);
        if g_dot_p >= 0.0 {
            // not a descent direction: reset to steepest descent
            dir = grad.iter().map(|g| -g).collect();
            g_dot_p = dot(&grad, &dir);
            since_restart = 0;
        }
        if g_dot_p == 0.0 {
            status = TunerStatus::Converged;
            break;
        }

        let Some(step) = wolfe_search(&mut eval, &x, &dir, loss, g_dot_p, cfg) else {
            status = TunerStatus::LineSearchFailed;
            break;
        };

        let prev_loss = loss;
        let g_old = grad;
        x = step.x;
        loss = step.loss;
        grad = step.grad;

        // Polak-Ribiere coefficient, clamped to PR+ unless running plain PR.
        let denom = dot(&g_old, &g_old);
        let mut beta = if denom > 0.0 {
            let diff: Vec<f64> = grad.iter().zip(&g_old).map(|(n, o)| n - o).collect();
            dot(&grad, &diff) / denom
        } else {
            0.0
        };
        if !cfg.plain_pr {
            beta = beta.max(0.0);
        }
        since_restart += 1;
        if since_restart >= restart {
            beta = 0.0;
            since_restart = 0;
        }
        for i in 0..dir.len() {
            dir[i] = -grad[i] + beta * dir[i];
        }

        records.push(TraceRecord {
            iter,
            loss,
            grad_norm: norm(&grad),
            alpha: step.alpha,
            beta,
        });

        if let Some(tol) = cfg.loss_change_tol {
            if (prev_loss - loss).abs() <= tol * (1.0 + prev_loss.abs()) {
                status = TunerStatus::Converged;
                break;
            }
        }
    }
    if status == TunerStatus::MaxIter && norm(&grad) <= cfg.epsilon {
        status = TunerStatus::Converged;
    }

    Ok((
        x,
        TunerTrace {
            records,
            status,
        },
    ))
}

/// Tune (b, psi) so the DC-OPF adjusted flows match `targets`. Returns the
/// tuned parameters (gamma = rho = 0) and the optimization trace.
pub fn tune(
    case: &NetworkCase,
    init: &DcParameters,
    targets: &[f64],
    cfg: &TunerConfig,
) -> Result<(DcParameters, TunerTrace), SolveError> {
    cfg.validate()?;
    init.validate(case)?;
    if targets.len() != case.n_branch() {
        return Err(SolveError::Invalid(
            "target vector length does not match the branch count".into(),
        ));
    }
    let ne = case.n_branch();
    let opts = DcOpfOptions::model6();

    let mut eval = |x: &[f64]| -> Evaluation {
        let (b, psi) = x.split_at(ne);
        let params = with_tuned(case, b.to_vec(), psi.to_vec()).ok()?;
        let sol = dcopf::solve_dc_opf(case, &params, &opts).ok()?;
        let loss = dcopf::loss(&sol.s_flow_dc, targets).ok()?;
        if !loss.is_finite() {
            return None;
        }
        let bundle = dcopf::differentiate_kkt(case, &params, &opts, &sol).ok()?;
        let (g_b, g_psi) = dcopf::loss_gradients(&bundle, &sol.s_flow_dc, targets).ok()?;
        let mut grad = g_b;
        grad.extend(g_psi);
        Some((loss, grad))
    };

    let mut x0 = init.b.clone();
    x0.extend(init.psi.iter());
    let (x, trace) = minimize(&mut eval, &x0, cfg)?;
    let (b, psi) = x.split_at(ne);
    let tuned = with_tuned(case, b.to_vec(), psi.to_vec())?;
    Ok((tuned, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_case;
    use crate::params::cold_start;

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
    fn already_optimal_converges_at_iteration_zero() {
        let case = parse_case(TWO_BUS).unwrap();
        let init = cold_start(&case);
        let sol = crate::dcopf::solve_dc_opf(&case, &init, &DcOpfOptions::model6()).unwrap();
        let targets = sol.s_flow_dc.clone();
        let (tuned, trace) = tune(&case, &init, &targets, &TunerConfig::default()).unwrap();
        assert_eq!(trace.status, TunerStatus::Converged);
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].grad_norm, 0.0);
        assert_eq!(tuned.b, init.b);
    }

    #[test]
    fn quadratic_surrogate_two_iterations() {
        // L = 1/2 (x^2 + 2 y^2) from (2, 1): the halving search lands on the
        // exact minimizer each time; CG finishes in two iterations.
        let eval = |x: &[f64]| -> Evaluation {
            let loss = 0.5 * (x[0] * x[0] + 2.0 * x[1] * x[1]);
            Some((loss, vec![x[0], 2.0 * x[1]]))
        };
        let cfg = TunerConfig::default();
        let (x, trace) = minimize(eval, &[2.0, 1.0], &cfg).unwrap();
        assert_eq!(trace.status, TunerStatus::Converged);
        assert!(x[0].abs() < 1e-12 && x[1].abs() < 1e-12);
        // two accepted steps after the initial record
        assert_eq!(trace.records.len(), 3);
    }

    #[test]
    fn steepest_descent_fallback_converges() {
        // force beta = 0 every step via restart_period = 1
        let eval = |x: &[f64]| -> Evaluation {
            let loss = 0.5 * (x[0] * x[0] + 2.0 * x[1] * x[1]);
            Some((loss, vec![x[0], 2.0 * x[1]]))
        };
        let cfg = TunerConfig {
            restart_period: 1,
            max_iter: 500,
            ..TunerConfig::default()
        };
        let (x, trace) = minimize(eval, &[2.0, 1.0], &cfg).unwrap();
        assert_eq!(trace.status, TunerStatus::Converged);
        assert!(norm(&x) < 1e-5);
    }

    #[test]
    fn monotone_descent_and_armijo_recheck() {
        let eval = |x: &[f64]| -> Evaluation {
            // slightly nonconvex but smooth
            let loss = (x[0] - 1.0).powi(2) + 0.5 * (x[1] + 2.0).powi(2)
                + 0.1 * (x[0] * x[1]).sin();
            let g0 = 2.0 * (x[0] - 1.0) + 0.1 * x[1] * (x[0] * x[1]).cos();
            let g1 = (x[1] + 2.0) + 0.1 * x[0] * (x[0] * x[1]).cos();
            Some((loss, vec![g0, g1]))
        };
        let (_, trace) = minimize(eval, &[3.0, 3.0], &TunerConfig::default()).unwrap();
        for w in trace.records.windows(2) {
            assert!(w[1].loss <= w[0].loss + 1e-12);
        }
        assert_eq!(trace.status, TunerStatus::Converged);
    }

    #[test]
    fn polak_ribiere_values() {
        // repeated gradients -> beta = 0 (numerator vanishes)
        let g = vec![0.5, -0.5];
        let diff: Vec<f64> = g.iter().zip(&g).map(|(a, b)| a - b).collect();
        assert_eq!(dot(&g, &diff), 0.0);

        // g_old = (1,0), g_new = (0,1): raw beta = 1
        let g_old = [1.0, 0.0];
        let g_new = [0.0, 1.0];
        let diff: Vec<f64> = g_new.iter().zip(&g_old).map(|(a, b)| a - b).collect();
        let beta = dot(&g_new, &diff) / dot(&g_old, &g_old);
        assert_eq!(beta, 1.0);
    }

    #[test]
    fn wolfe_hand_example() {
        // L(x) = x^2 from x = 1 along p = -2: alpha = 1 fails Armijo,
        // alpha = 1/2 lands exactly on the minimum and passes both tests.
        let mut eval = |x: &[f64]| -> Evaluation { Some((x[0] * x[0], vec![2.0 * x[0]])) };
        let cfg = TunerConfig::default();
        let acc = wolfe_search(&mut eval, &[1.0], &[-2.0], 1.0, -4.0, &cfg).unwrap();
        assert_eq!(acc.alpha, 0.5);
        assert_eq!(acc.x[0], 0.0);
    }

    #[test]
    fn linear_descent_accepts_unit_step() {
        let mut eval = |x: &[f64]| -> Evaluation { Some((x[0], vec![1.0])) };
        let cfg = TunerConfig::default();
        let acc = wolfe_search(&mut eval, &[5.0], &[-1.0], 5.0, -1.0, &cfg).unwrap();
        // Armijo holds at alpha = 1; curvature |g'p| = 1 > alpha2 fails every
        // alpha, so the best Armijo point (the deepest one) is returned.
        assert_eq!(acc.alpha, 1.0);
    }

    #[test]
    fn determinism_bit_identical_traces() {
        let case = parse_case(TWO_BUS).unwrap();
        let init = cold_start(&case);
        let targets = vec![1.3];
        let cfg = TunerConfig::default();
        let (p1, t1) = tune(&case, &init, &targets, &cfg).unwrap();
        let (p2, t2) = tune(&case, &init, &targets, &cfg).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(t1.records.len(), t2.records.len());
        for (a, b) in t1.records.iter().zip(&t2.records) {
            assert_eq!(a.loss.to_bits(), b.loss.to_bits());
            assert_eq!(a.grad_norm.to_bits(), b.grad_norm.to_bits());
            assert_eq!(a.alpha.to_bits(), b.alpha.to_bits());
            assert_eq!(a.beta.to_bits(), b.beta.to_bits());
        }
    }

    #[test]
    fn radial_target_reached_via_psi() {
        // On the radial case the flow is pinned, so only psi can close the
        // gap; the tuner должен drive the loss to (near) zero.
        let case = parse_case(TWO_BUS).unwrap();
        let init = cold_start(&case);
        let targets = vec![1.3];
        let (tuned, trace) = tune(&case, &init, &targets, &TunerConfig::default()).unwrap();
        assert!(trace.final_loss() < 1e-10, "loss {}", trace.final_loss());
        assert!((tuned.psi[0] - 0.3).abs() < 1e-5);
        assert!(tuned.gamma.iter().all(|&g| g == 0.0));
        assert!(tuned.rho.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn csv_export_shape() {
        let eval = |x: &[f64]| -> Evaluation { Some((x[0] * x[0], vec![2.0 * x[0]])) };
        let (_, trace) = minimize(eval, &[1.0], &TunerConfig::default()).unwrap();
        let csv = trace.to_csv();
        let lines: Vec<&str> = csv.trim().lines().collect();
        assert_eq!(lines[0], "iter,loss,grad_norm,alpha,beta");
        assert_eq!(lines.len(), trace.records.len() + 1);
    }
}
