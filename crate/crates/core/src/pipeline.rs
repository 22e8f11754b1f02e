//! Three-phase switching workflow and its baselines.
//!
//! Phase 1 solves AC-OPF on the full topology and extracts the signed
//! apparent-flow targets. Phase 2 tunes (b, psi) against those targets and
//! solves the switching MILP. Phase 3 fixes the chosen statuses and
//! re-solves AC-OPF on the reduced topology, which either certifies the
//! decision with a validated cost or reports it infeasible.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ac::{
    apparent_flow_targets, newton_power_flow, solve_ac_opf, AcOpfStatus, AcSolution, Dispatch,
    Topology, Violation,
};
use crate::error::SolveError;
use crate::network::NetworkCase;
use crate::ots::{self, OtsConfig, OtsSolution};
use crate::params::{cold_start, hot_start, DcParameters};
use crate::tuner::{tune, TunerConfig, TunerTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodId {
    AcopfBase,
    DcOts,
    CDcOts,
    ODcOts,
    Exhaustive,
}

impl MethodId {
    pub fn label(&self) -> &'static str {
        match self {
            MethodId::AcopfBase => "acopf-base",
            MethodId::DcOts => "dc-ots",
            MethodId::CDcOts => "c-dc-ots",
            MethodId::ODcOts => "o-dc-ots",
            MethodId::Exhaustive => "exhaustive",
        }
    }
}

impl std::str::FromStr for MethodId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "acopf-base" => Ok(MethodId::AcopfBase),
            "dc-ots" => Ok(MethodId::DcOts),
            "c-dc-ots" => Ok(MethodId::CDcOts),
            "o-dc-ots" => Ok(MethodId::ODcOts),
            "exhaustive" => Ok(MethodId::Exhaustive),
            other => Err(format!("unknown method '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timings {
    pub tune_seconds: f64,
    pub milp_seconds: f64,
    pub validate_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Feasible {
        ac_objective: f64,
        percent_delta: f64,
    },
    Infeasible {
        violations: Vec<Violation>,
    },
    NotSolved {
        reason: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub case_id: String,
    pub method: MethodId,
    /// 1-based opened-line numbers.
    pub opened_lines: Vec<usize>,
    pub outcome: Outcome,
    pub timings: Timings,
}

impl ValidationReport {
    pub fn ac_objective(&self) -> Option<f64> {
        match &self.outcome {
            Outcome::Feasible { ac_objective, .. } => Some(*ac_objective),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub tuner: TunerConfig,
    pub ots: OtsConfig,
    /// Fixed switching penalty; when absent the penalty is picked by the
    /// 1%-of-base-cost protocol with candidates {0.5x, 1x, 2x}.
    pub c_prof_override: Option<f64>,
    /// Initialize the tuner from a hot-start parameter estimate (requires
    /// one extra power-flow at the Phase-1 dispatch).
    pub hot_start_init: bool,
    /// Disable tuning: Phase 2 runs with the initializer as-is.
    pub tune_enabled: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tuner: TunerConfig::default(),
            ots: OtsConfig::default(),
            c_prof_override: None,
            hot_start_init: false,
            tune_enabled: true,
        }
    }
}

/// Everything produced along the way, for dumps and diagnostics.
#[derive(Debug, Clone)]
pub struct ODcOtsArtifacts {
    pub baseline: AcSolution,
    pub targets: Vec<f64>,
    pub init: DcParameters,
    pub tuned: DcParameters,
    pub trace: Option<TunerTrace>,
    pub chosen_c_prof: f64,
    pub ots: OtsSolution,
    pub validated: Option<AcSolution>,
    pub report: ValidationReport,
}

fn percent_delta(cost: f64, base: f64) -> f64 {
    (cost - base) / base * 100.0
}

/// Solve AC-OPF on the full topology; error when it fails, since nothing
/// downstream is meaningful without the baseline.
fn phase1_baseline(case: &NetworkCase) -> Result<AcSolution, SolveError> {
    let topo = Topology::full(case);
    let out = solve_ac_opf(case, &topo)?;
    if out.status != AcOpfStatus::Optimal {
        return Err(SolveError::Infeasible(format!(
            "baseline AC-OPF did not converge: {:?}, violations {:?}",
            out.status,
            out.solution.violations.len()
        )));
    }
    Ok(out.solution)
}

/// Fix the statuses and validate with a full AC-OPF. Islanding and solver
/// infeasibility both come back as `Outcome::Infeasible`.
pub fn validate_topology(
    case: &NetworkCase,
    opened: &[usize],
    base_cost: f64,
) -> (Outcome, Option<AcSolution>) {
    let topo = match Topology::with_open_lines(case, opened) {
        Ok(t) => t,
        Err(e) => {
            return (
                Outcome::NotSolved {
                    reason: e.to_string(),
                },
                None,
            )
        }
    };
    if let Err(e) = topo.check_islanding(case) {
        return (
            Outcome::Infeasible {
                violations: vec![Violation {
                    constraint: "islanding".into(),
                    magnitude: f64::INFINITY,
                }],
            },
            Some(AcSolution {
                v: vec![],
                theta: vec![],
                p_gen: vec![],
                q_gen: vec![],
                s_from: vec![],
                s_to: vec![],
                objective: f64::NAN,
                converged: false,
                violations: vec![Violation {
                    constraint: e.to_string(),
                    magnitude: f64::INFINITY,
                }],
            }),
        );
    }
    match solve_ac_opf(case, &topo) {
        Ok(out) if out.status == AcOpfStatus::Optimal => {
            let cost = out.solution.objective;
            (
                Outcome::Feasible {
                    ac_objective: cost,
                    percent_delta: percent_delta(cost, base_cost),
                },
                Some(out.solution),
            )
        }
        Ok(out) => (
            Outcome::Infeasible {
                violations: out.solution.violations.clone(),
            },
            Some(out.solution),
        ),
        Err(e) => (
            Outcome::NotSolved {
                reason: e.to_string(),
            },
            None,
        ),
    }
}

/// Switching-penalty protocol: 1% of the traditional DC-OTS dispatch cost,
/// with {0.5x, 1x, 2x} evaluated by AC validation.
fn c_prof_candidates(base_dispatch_cost: f64) -> [f64; 3] {
    let anchor = 0.01 * base_dispatch_cost;
    [0.5 * anchor, anchor, 2.0 * anchor]
}

/// The full three-phase pipeline for the optimized DC-OTS.
pub fn run_o_dc_ots(
    case: &NetworkCase,
    config: &PipelineConfig,
) -> Result<ODcOtsArtifacts, SolveError> {
    let t_tune = Instant::now();
    let baseline = phase1_baseline(case)?;
    let targets = apparent_flow_targets(&baseline);

    let init = if config.hot_start_init {
        let dispatch = Dispatch::from_solution(case, &baseline);
        let nominal = newton_power_flow(case, &Topology::full(case), &dispatch)?;
        hot_start(case, &nominal)?
    } else {
        cold_start(case)
    };

    let (tuned, trace) = if config.tune_enabled {
        let (p, t) = tune(case, &init, &targets, &config.tuner)?;
        (p, Some(t))
    } else {
        let mut p = init.clone();
        p.gamma = vec![0.0; case.n_bus()];
        p.rho = vec![0.0; case.n_branch()];
        (p, None)
    };
    let tune_seconds = t_tune.elapsed().as_secs_f64();

    let mut timings = Timings {
        tune_seconds,
        ..Timings::default()
    };
    let base_cost = baseline.objective;

    // Penalty selection.
    let candidates: Vec<f64> = match config.c_prof_override {
        Some(c) => vec![c],
        None => {
            let t_milp = Instant::now();
            let trad = ots::solve_traditional_dc_ots(case, &config.ots)?;
            timings.milp_seconds += t_milp.elapsed().as_secs_f64();
            c_prof_candidates(trad.dispatch_cost).to_vec()
        }
    };

    let mut best: Option<(f64, OtsSolution, Outcome, Option<AcSolution>, f64)> = None;
    for &c_prof in &candidates {
        let cfg = OtsConfig {
            c_prof,
            ..config.ots.clone()
        };
        let t_milp = Instant::now();
        let sol = ots::solve_c_dc_ots(case, &tuned, &cfg)?;
        timings.milp_seconds += t_milp.elapsed().as_secs_f64();

        let t_val = Instant::now();
        let (outcome, validated) = validate_topology(case, &sol.opened_lines, base_cost);
        timings.validate_seconds += t_val.elapsed().as_secs_f64();

        let score = match &outcome {
            Outcome::Feasible { ac_objective, .. } => *ac_objective,
            _ => f64::INFINITY,
        };
        let better = best.as_ref().map(|(s, ..)| score < *s).unwrap_or(true);
        if better {
            best = Some((score, sol, outcome, validated, c_prof));
        }
    }
    let (_, ots_sol, outcome, validated, chosen_c_prof) =
        best.expect("at least one penalty candidate is always evaluated");

    let report = ValidationReport {
        case_id: case.name.clone(),
        method: MethodId::ODcOts,
        opened_lines: ots_sol.opened_lines.clone(),
        outcome,
        timings,
    };
    Ok(ODcOtsArtifacts {
        baseline,
        targets,
        init,
        tuned,
        trace,
        chosen_c_prof,
        ots: ots_sol,
        validated,
        report,
    })
}

/// Baseline switching methods: traditional DC-OTS and the penalized
/// C-DC-OTS, both with cold-start parameters.
pub fn run_baseline(
    case: &NetworkCase,
    method: MethodId,
    config: &PipelineConfig,
) -> Result<ValidationReport, SolveError> {
    let mut timings = Timings::default();
    let baseline = phase1_baseline(case)?;
    let base_cost = baseline.objective;

    match method {
        MethodId::AcopfBase => Ok(ValidationReport {
            case_id: case.name.clone(),
            method,
            opened_lines: vec![],
            outcome: Outcome::Feasible {
                ac_objective: base_cost,
                percent_delta: 0.0,
            },
            timings,
        }),
        MethodId::DcOts => {
            let t_milp = Instant::now();
            let sol = ots::solve_traditional_dc_ots(case, &config.ots)?;
            timings.milp_seconds = t_milp.elapsed().as_secs_f64();
            let t_val = Instant::now();
            let (outcome, _) = validate_topology(case, &sol.opened_lines, base_cost);
            timings.validate_seconds = t_val.elapsed().as_secs_f64();
            Ok(ValidationReport {
                case_id: case.name.clone(),
                method,
                opened_lines: sol.opened_lines,
                outcome,
                timings,
            })
        }
        MethodId::CDcOts => {
            let params = cold_start(case);
            let candidates: Vec<f64> = match config.c_prof_override {
                Some(c) => vec![c],
                None => {
                    let t_milp = Instant::now();
                    let trad = ots::solve_traditional_dc_ots(case, &config.ots)?;
                    timings.milp_seconds += t_milp.elapsed().as_secs_f64();
                    c_prof_candidates(trad.dispatch_cost).to_vec()
                }
            };
            let mut best: Option<(f64, OtsSolution, Outcome)> = None;
            for &c_prof in &candidates {
                let cfg = OtsConfig {
                    c_prof,
                    ..config.ots.clone()
                };
                let t_milp = Instant::now();
                let sol = ots::solve_c_dc_ots(case, &params, &cfg)?;
                timings.milp_seconds += t_milp.elapsed().as_secs_f64();
                let t_val = Instant::now();
                let (outcome, _) = validate_topology(case, &sol.opened_lines, base_cost);
                timings.validate_seconds += t_val.elapsed().as_secs_f64();
                let score = match &outcome {
                    Outcome::Feasible { ac_objective, .. } => *ac_objective,
                    _ => f64::INFINITY,
                };
                let better = best.as_ref().map(|(s, ..)| score < *s).unwrap_or(true);
                if better {
                    best = Some((score, sol, outcome));
                }
            }
            let (_, sol, outcome) = best.expect("candidates nonempty");
            Ok(ValidationReport {
                case_id: case.name.clone(),
                method,
                opened_lines: sol.opened_lines,
                outcome,
                timings,
            })
        }
        MethodId::ODcOts => run_o_dc_ots(case, config).map(|a| a.report),
        MethodId::Exhaustive => Err(SolveError::Invalid(
            "exhaustive search needs an explicit budget; call exhaustive_ots".into(),
        )),
    }
}

/// Bounded exhaustive search: AC-OPF over every non-islanding topology with
/// at most `max_open` of the candidate lines removed.
pub fn exhaustive_ots(
    case: &NetworkCase,
    max_open: usize,
    candidate_lines: Option<&[usize]>,
    budget: usize,
) -> Result<(ValidationReport, Vec<usize>), SolveError> {
    let candidates: Vec<usize> = match candidate_lines {
        Some(list) => {
            for &e in list {
                if e == 0 || e > case.n_branch() {
                    return Err(SolveError::Invalid(format!(
                        "candidate line {e} out of range 1..={}",
                        case.n_branch()
                    )));
                }
            }
            list.to_vec()
        }
        None => (1..=case.n_branch()).collect(),
    };

    // refuse before doing any work when the subset count exceeds the budget
    let m = candidates.len();
    let mut count: u128 = 0;
    for k in 0..=max_open.min(m) {
        count += binomial(m, k);
        if count > budget as u128 {
            return Err(SolveError::Invalid(format!(
                "enumeration budget exceeded: needs {count}+ topologies > {budget}"
            )));
        }
    }

    let t_val = Instant::now();
    let baseline = phase1_baseline(case)?;
    let base_cost = baseline.objective;

    let mut best_cost = base_cost;
    let mut best_open: Vec<usize> = vec![];
    for k in 1..=max_open.min(m) {
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            let opened: Vec<usize> = subset.iter().map(|&i| candidates[i]).collect();
            if let Ok(topo) = Topology::with_open_lines(case, &opened) {
                if topo.check_islanding(case).is_ok() {
                    if let Ok(out) = solve_ac_opf(case, &topo) {
                        if out.status == AcOpfStatus::Optimal
                            && out.solution.objective < best_cost
                        {
                            best_cost = out.solution.objective;
                            best_open = opened.clone();
                        }
                    }
                }
            }
            // next k-subset in lexicographic order
            let mut i = k;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if subset[i] != i + m - k {
                    subset[i] += 1;
                    for j in i + 1..k {
                        subset[j] = subset[j - 1] + 1;
                    }
                    break;
                }
            }
            if subset[0] == m - k && (0..k).all(|j| subset[j] == j + m - k) {
                break;
            }
        }
    }

    let timings = Timings {
        validate_seconds: t_val.elapsed().as_secs_f64(),
        ..Timings::default()
    };
    let report = ValidationReport {
        case_id: case.name.clone(),
        method: MethodId::Exhaustive,
        opened_lines: best_open.clone(),
        outcome: Outcome::Feasible {
            ac_objective: best_cost,
            percent_delta: percent_delta(best_cost, base_cost),
        },
        timings,
    };
    Ok((report, best_open))
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Run each requested method and collect the reports in a deterministic
/// order.
pub fn compare_methods(
    case: &NetworkCase,
    methods: &[MethodId],
    config: &PipelineConfig,
) -> Result<Vec<ValidationReport>, SolveError> {
    let mut out = Vec::new();
    for &m in methods {
        let report = match m {
            MethodId::Exhaustive => {
                return Err(SolveError::Invalid(
                    "exhaustive is driven via the dedicated subcommand".into(),
                ))
            }
            other => run_baseline(case, other, config)?,
        };
        out.push(report);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Opened-line set in table format: comma-separated numbers or "--".
pub fn format_opened(lines: &[usize]) -> String {
    if lines.is_empty() {
        "--".to_string()
    } else {
        lines
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Aligned plain-text comparison table.
pub fn render_table(reports: &[ValidationReport]) -> String {
    let mut rows: Vec<[String; 6]> = vec![[
        "method".into(),
        "opened".into(),
        "cost ($/h)".into(),
        "delta (%)".into(),
        "tune+milp (s)".into(),
        "validate (s)".into(),
    ]];
    for r in reports {
        let (cost, delta) = match &r.outcome {
            Outcome::Feasible {
                ac_objective,
                percent_delta,
            } => (format!("{:.6}", ac_objective), format!("{:+.2}", percent_delta)),
            Outcome::Infeasible { .. } => ("Inf.".into(), "".into()),
            Outcome::NotSolved { .. } => ("ns.".into(), "".into()),
        };
        rows.push([
            r.method.label().to_string(),
            format_opened(&r.opened_lines),
            cost,
            delta,
            format!("{:.3}", r.timings.tune_seconds + r.timings.milp_seconds),
            format!("{:.3}", r.timings.validate_seconds),
        ]);
    }
    let mut widths = [0usize; 6];
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            out.push_str(&format!("{:w$}  ", cell, w = widths[i]));
        }
        out.push('\n');
    }
    out
}

/// CSV export of comparison reports.
pub fn render_csv(reports: &[ValidationReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "case",
        "method",
        "opened_lines",
        "status",
        "ac_objective",
        "percent_delta",
        "tune_seconds",
        "milp_seconds",
        "validate_seconds",
    ])
    .expect("csv write");
    for r in reports {
        let (status, cost, delta) = match &r.outcome {
            Outcome::Feasible {
                ac_objective,
                percent_delta,
            } => (
                "feasible",
                format!("{ac_objective:.6}"),
                format!("{percent_delta:.4}"),
            ),
            Outcome::Infeasible { .. } => ("infeasible", String::new(), String::new()),
            Outcome::NotSolved { .. } => ("not_solved", String::new(), String::new()),
        };
        w.write_record([
            r.case_id.clone(),
            r.method.label().to_string(),
            r.opened_lines
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(";"),
            status.to_string(),
            cost,
            delta,
            format!("{:.4}", r.timings.tune_seconds),
            format!("{:.4}", r.timings.milp_seconds),
            format!("{:.4}", r.timings.validate_seconds),
        ])
        .expect("csv write");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_case;

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
    fn exhaustive_k0_is_baseline() {
        let case = parse_case(TRIANGLE).unwrap();
        let (report, best) = exhaustive_ots(&case, 0, None, 100).unwrap();
        assert!(best.is_empty());
        match report.outcome {
            Outcome::Feasible { percent_delta, .. } => assert_eq!(percent_delta, 0.0),
            _ => panic!("baseline must be feasible"),
        }
    }

    #[test]
    fn exhaustive_budget_refusal() {
        let case = parse_case(TRIANGLE).unwrap();
        let err = exhaustive_ots(&case, 3, None, 2).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("budget"), "{msg}");
    }

    #[test]
    fn o_dc_ots_runs_and_validates() {
        let case = parse_case(TRIANGLE).unwrap();
        let config = PipelineConfig::default();
        let arts = run_o_dc_ots(&case, &config).unwrap();
        match arts.report.outcome {
            Outcome::Feasible { ac_objective, .. } => {
                assert!(ac_objective > 0.0);
            }
            ref other => panic!("expected feasible outcome, got {other:?}"),
        }
        // oracle dominance at the same open budget
        let k = arts.report.opened_lines.len();
        let (ex, _) = exhaustive_ots(&case, k, None, 100).unwrap();
        let ex_cost = ex.ac_objective().unwrap();
        let ots_cost = arts.report.ac_objective().unwrap();
        assert!(ots_cost >= ex_cost - 1e-6 * (1.0 + ex_cost.abs()));
    }

    #[test]
    fn disabled_tuning_matches_c_dc_ots_baseline() {
        let case = parse_case(TRIANGLE).unwrap();
        let config = PipelineConfig {
            tune_enabled: false,
            ..PipelineConfig::default()
        };
        let arts = run_o_dc_ots(&case, &config).unwrap();
        let base = run_baseline(&case, MethodId::CDcOts, &config).unwrap();
        assert_eq!(arts.report.opened_lines, base.opened_lines);
        let (a, b) = (
            arts.report.ac_objective().unwrap(),
            base.ac_objective().unwrap(),
        );
        assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn reports_reproducible_modulo_timing() {
        let case = parse_case(TRIANGLE).unwrap();
        let config = PipelineConfig::default();
        let r1 = run_baseline(&case, MethodId::DcOts, &config).unwrap();
        let r2 = run_baseline(&case, MethodId::DcOts, &config).unwrap();
        assert_eq!(r1.opened_lines, r2.opened_lines);
        match (&r1.outcome, &r2.outcome) {
            (
                Outcome::Feasible {
                    ac_objective: a, ..
                },
                Outcome::Feasible {
                    ac_objective: b, ..
                },
            ) => assert_eq!(a.to_bits(), b.to_bits()),
            (Outcome::Infeasible { .. }, Outcome::Infeasible { .. }) => {}
            other => panic!("outcomes differ: {other:?}"),
        }
    }

    #[test]
    fn table_rendering() {
        let reports = vec![ValidationReport {
            case_id: "tri".into(),
            method: MethodId::AcopfBase,
            opened_lines: vec![],
            outcome: Outcome::Feasible {
                ac_objective: 1234.5,
                percent_delta: 0.0,
            },
            timings: Timings::default(),
        }];
        let table = render_table(&reports);
        assert!(table.contains("acopf-base"));
        assert!(table.contains("--"));
        let csv = render_csv(&reports);
        assert!(csv.starts_with("case,method"));
        assert!(csv.contains("feasible"));
    }
}
