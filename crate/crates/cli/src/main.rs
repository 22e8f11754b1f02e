//! Command-line front end for the switching-optimization toolkit.
//!
//! Every algorithm in the stack is deterministic, so runs are reproducible
//! from the flags alone; there is no seed to record.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gridots_core::ac::{solve_ac_opf, AcOpfStatus, Topology};
use gridots_core::dcopf::{solve_dc_opf, DcOpfOptions};
use gridots_core::network::{parse_case, NetworkCase};
use gridots_core::ots::{solve_traditional_dc_ots, OtsConfig};
use gridots_core::params::cold_start;
use gridots_core::pipeline::{
    self, compare_methods, exhaustive_ots, format_opened, render_csv, render_table, MethodId,
    Outcome, PipelineConfig, ValidationReport,
};
use gridots_core::tuner::TunerConfig;

#[derive(Parser)]
#[command(
    name = "gridots",
    about = "AC-informed DC optimal transmission switching toolkit",
    version,
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OtsVariant {
    Traditional,
    Custom,
    Optimized,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// MATPOWER case file
    case: PathBuf,
    /// Output format
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the full solution JSON to this path
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct TunerArgs {
    /// Tuner iteration cap
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Gradient-norm tolerance
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    /// Armijo constant
    #[arg(long, default_value_t = 1e-4)]
    alpha1: f64,
    /// Curvature constant
    #[arg(long, default_value_t = 0.4)]
    alpha2: f64,
    /// Initialize from the hot-start parameter estimate
    #[arg(long)]
    hot_start: bool,
}

impl TunerArgs {
    fn to_config(&self) -> TunerConfig {
        TunerConfig {
            epsilon: self.eps,
            max_iter: self.max_iter,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            ..TunerConfig::default()
        }
    }
}

#[derive(Args, Clone)]
struct OtsArgs {
    /// Switching penalty $/h per opened line; picked by the 1%-of-base
    /// protocol when omitted
    #[arg(long)]
    cprof: Option<f64>,
    /// Relative MILP optimality gap
    #[arg(long, default_value_t = 1e-4)]
    mip_gap: f64,
    /// Bus-angle box in radians
    #[arg(long, default_value_t = 0.6)]
    theta_box: f64,
    /// Switchable lines (1-based, comma separated); all lines when omitted
    #[arg(long, value_delimiter = ',')]
    candidates: Option<Vec<usize>>,
}

impl OtsArgs {
    fn to_config(&self) -> Result<OtsConfig> {
        let candidate_lines = match &self.candidates {
            Some(list) => {
                let mut zero_based = Vec::with_capacity(list.len());
                for &l in list {
                    if l == 0 {
                        bail!("line numbers are 1-based");
                    }
                    zero_based.push(l - 1);
                }
                Some(zero_based)
            }
            None => None,
        };
        Ok(OtsConfig {
            c_prof: self.cprof.unwrap_or(0.0),
            mip_gap: self.mip_gap,
            theta_box: self.theta_box,
            candidate_lines,
            ..OtsConfig::default()
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve AC-OPF on the full or reduced topology
    Acopf {
        #[command(flatten)]
        common: CommonArgs,
        /// Lines to open first (1-based, comma separated)
        #[arg(long, value_delimiter = ',')]
        open: Option<Vec<usize>>,
    },
    /// Solve the DC-OPF QP with cold-start parameters
    Dcopf {
        #[command(flatten)]
        common: CommonArgs,
        /// Constraint set: the biased model or the tuning inner model
        #[arg(long, default_value = "model4")]
        mode: String,
    },
    /// Tune the DC parameters (b, psi) against AC apparent flows
    Tune {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        tuner: TunerArgs,
        /// Write the per-iteration trace as CSV
        #[arg(long)]
        trace_csv: Option<PathBuf>,
        /// Write the tuned parameters as JSON
        #[arg(long)]
        params_out: Option<PathBuf>,
    },
    /// Solve a transmission-switching problem
    Ots {
        #[command(flatten)]
        common: CommonArgs,
        /// traditional = no penalty, cold params; custom = penalized, cold
        /// params; optimized = penalized with tuned parameters
        #[arg(long, value_enum, default_value = "optimized")]
        variant: OtsVariant,
        #[command(flatten)]
        tuner: TunerArgs,
        #[command(flatten)]
        ots: OtsArgs,
    },
    /// Validate a switching decision with a full AC-OPF
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// Lines to open (1-based, comma separated)
        #[arg(long, value_delimiter = ',', required = true)]
        open: Vec<usize>,
    },
    /// Bounded exhaustive search over switching patterns
    Exhaustive {
        #[command(flatten)]
        common: CommonArgs,
        /// Maximum number of opened lines
        #[arg(long, default_value_t = 1)]
        max_open: usize,
        /// Candidate lines (1-based); all lines when omitted
        #[arg(long, value_delimiter = ',')]
        candidates: Option<Vec<usize>>,
        /// Topology-count budget
        #[arg(long, default_value_t = 20000)]
        budget: usize,
    },
    /// Run several methods and print a comparison table
    Compare {
        /// MATPOWER case files
        #[arg(required = true)]
        cases: Vec<PathBuf>,
        /// Methods to run
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "acopf-base,dc-ots,c-dc-ots,o-dc-ots"
        )]
        methods: Vec<String>,
        /// Output format
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Cases solved concurrently
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        tuner: TunerArgs,
        #[command(flatten)]
        ots: OtsArgs,
    },
}

/// Six significant digits, the CLI-wide numeric style.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    format!("{:.*}", decimals, x)
}

fn load_case(path: &PathBuf) -> Result<NetworkCase> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read case file {}", path.display()))?;
    Ok(parse_case(&text)?)
}

fn dump_json(path: &Option<PathBuf>, payload: &impl serde::Serialize) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, serde_json::to_string_pretty(payload)?)
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(())
}

fn print_report(report: &ValidationReport, format: Format) -> Result<()> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(report)?),
        Format::Csv => print!("{}", render_csv(std::slice::from_ref(report))),
        Format::Text => {
            println!("case:   {}", report.case_id);
            println!("method: {}", report.method.label());
            println!("opened: {}", format_opened(&report.opened_lines));
            match &report.outcome {
                Outcome::Feasible {
                    ac_objective,
                    percent_delta,
                } => {
                    println!("status: feasible");
                    println!(
                        "cost:   {} $/h ({:+.2}% vs base)",
                        sig6(*ac_objective),
                        percent_delta
                    );
                }
                Outcome::Infeasible { violations } => {
                    println!("status: infeasible");
                    for v in violations.iter().take(12) {
                        println!("  violation: {:40} {:>12}", v.constraint, sig6(v.magnitude));
                    }
                }
                Outcome::NotSolved { reason } => {
                    println!("status: not solved ({reason})");
                }
            }
            println!(
                "time:   tune {:.3}s, milp {:.3}s, validate {:.3}s",
                report.timings.tune_seconds,
                report.timings.milp_seconds,
                report.timings.validate_seconds
            );
        }
    }
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Acopf { common, open } => {
            let case = load_case(&common.case)?;
            let opened = open.unwrap_or_default();
            let topo = Topology::with_open_lines(&case, &opened)?;
            let out = solve_ac_opf(&case, &topo)?;
            dump_json(&common.dump, &out.solution)?;
            match common.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.solution)?),
                _ => {
                    println!("status:    {:?}", out.status);
                    println!("objective: {} $/h", sig6(out.solution.objective));
                    if out.status != AcOpfStatus::Optimal {
                        for v in out.solution.violations.iter().take(12) {
                            println!(
                                "  violation: {:40} {:>12}",
                                v.constraint,
                                sig6(v.magnitude)
                            );
                        }
                    }
                }
            }
            if out.status != AcOpfStatus::Optimal {
                bail!("AC-OPF did not reach an optimal point");
            }
        }
        Command::Dcopf { common, mode } => {
            let case = load_case(&common.case)?;
            let params = cold_start(&case);
            let opts = match mode.as_str() {
                "model4" => DcOpfOptions::model4(),
                "model6" | "model6-inner" => DcOpfOptions::model6(),
                other => bail!("unknown mode '{other}' (use model4 or model6)"),
            };
            let sol = solve_dc_opf(&case, &params, &opts)?;
            dump_json(&common.dump, &sol)?;
            match common.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&sol)?),
                _ => {
                    println!("objective: {} $/h", sig6(sol.objective));
                    println!(
                        "dispatch:  [{}]",
                        sol.p_gen
                            .iter()
                            .map(|p| sig6(*p))
                            .collect::<Vec<_>>()
                            .join(", ")
                    );
                    println!(
                        "flows:     [{}]",
                        sol.p_flow
                            .iter()
                            .map(|f| sig6(*f))
                            .collect::<Vec<_>>()
                            .join(", ")
                    );
                }
            }
        }
        Command::Tune {
            common,
            tuner,
            trace_csv,
            params_out,
        } => {
            let case = load_case(&common.case)?;
            let config = PipelineConfig {
                tuner: tuner.to_config(),
                hot_start_init: tuner.hot_start,
                ..PipelineConfig::default()
            };
            let arts = pipeline::run_o_dc_ots(&case, &config)?;
            let trace = arts.trace.as_ref().expect("tuning enabled");
            if let Some(p) = &trace_csv {
                std::fs::write(p, trace.to_csv())?;
            }
            if let Some(p) = &params_out {
                std::fs::write(p, arts.tuned.to_json())?;
            }
            dump_json(&common.dump, &arts.tuned)?;
            match common.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&arts.tuned)?),
                Format::Csv => print!("{}", trace.to_csv()),
                Format::Text => {
                    println!("iterations: {}", trace.records.len() - 1);
                    println!("status:     {:?}", trace.status);
                    println!(
                        "loss:       {} -> {}",
                        sig6(trace.initial_loss()),
                        sig6(trace.final_loss())
                    );
                }
            }
        }
        Command::Ots {
            common,
            variant,
            tuner,
            ots,
        } => {
            let case = load_case(&common.case)?;
            let ots_config = ots.to_config()?;
            match variant {
                OtsVariant::Traditional => {
                    let sol = solve_traditional_dc_ots(&case, &ots_config)?;
                    dump_json(&common.dump, &sol)?;
                    print_milp(&case, MethodId::DcOts, &sol, common.format)?;
                }
                OtsVariant::Custom => {
                    let config = PipelineConfig {
                        ots: ots_config,
                        c_prof_override: ots.cprof,
                        ..PipelineConfig::default()
                    };
                    let report = pipeline::run_baseline(&case, MethodId::CDcOts, &config)?;
                    dump_json(&common.dump, &report)?;
                    print_report(&report, common.format)?;
                }
                OtsVariant::Optimized => {
                    let config = PipelineConfig {
                        tuner: tuner.to_config(),
                        ots: ots_config,
                        c_prof_override: ots.cprof,
                        hot_start_init: tuner.hot_start,
                        ..PipelineConfig::default()
                    };
                    let arts = pipeline::run_o_dc_ots(&case, &config)?;
                    dump_json(&common.dump, &arts.report)?;
                    print_report(&arts.report, common.format)?;
                }
            }
        }
        Command::Validate { common, open } => {
            let case = load_case(&common.case)?;
            let topo = Topology::full(&case);
            let base = solve_ac_opf(&case, &topo)?;
            if base.status != AcOpfStatus::Optimal {
                bail!("baseline AC-OPF failed; cannot compute deltas");
            }
            let (outcome, solution) =
                pipeline::validate_topology(&case, &open, base.solution.objective);
            let report = ValidationReport {
                case_id: case.name.clone(),
                method: MethodId::AcopfBase,
                opened_lines: open,
                outcome,
                timings: Default::default(),
            };
            dump_json(&common.dump, &solution)?;
            print_report(&report, common.format)?;
            if report.ac_objective().is_none() {
                std::process::exit(1);
            }
        }
        Command::Exhaustive {
            common,
            max_open,
            candidates,
            budget,
        } => {
            let case = load_case(&common.case)?;
            let (report, _) = exhaustive_ots(&case, max_open, candidates.as_deref(), budget)?;
            dump_json(&common.dump, &report)?;
            print_report(&report, common.format)?;
        }
        Command::Compare {
            cases,
            methods,
            format,
            jobs,
            tuner,
            ots,
        } => {
            let methods: Vec<MethodId> = methods
                .iter()
                .map(|m| m.parse().map_err(|e: String| anyhow::anyhow!(e)))
                .collect::<Result<_>>()?;
            let config = PipelineConfig {
                tuner: tuner.to_config(),
                ots: ots.to_config()?,
                c_prof_override: ots.cprof,
                hot_start_init: tuner.hot_start,
                ..PipelineConfig::default()
            };
            let mut all_reports: Vec<ValidationReport> = Vec::new();
            if jobs <= 1 || cases.len() <= 1 {
                for path in &cases {
                    let case = load_case(path)?;
                    all_reports.extend(compare_methods(&case, &methods, &config)?);
                }
            } else {
                let results = std::thread::scope(|scope| {
                    let mut handles = Vec::new();
                    for chunk in cases.chunks(cases.len().div_ceil(jobs)) {
                        let config = &config;
                        let methods = &methods;
                        handles.push(scope.spawn(move || -> Result<Vec<ValidationReport>> {
                            let mut out = Vec::new();
                            for path in chunk {
                                let case = load_case(path)?;
                                out.extend(compare_methods(&case, methods, config)?);
                            }
                            Ok(out)
                        }));
                    }
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("worker panicked"))
                        .collect::<Vec<_>>()
                });
                for r in results {
                    all_reports.extend(r?);
                }
            }
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&all_reports)?),
                Format::Csv => print!("{}", render_csv(&all_reports)),
                Format::Text => print!("{}", render_table(&all_reports)),
            }
        }
    }
    Ok(())
}

/// Print a raw MILP solution (the traditional variant has no validation
/// pass of its own; use `validate` to vet the decision).
fn print_milp(
    case: &NetworkCase,
    method: MethodId,
    sol: &gridots_core::ots::OtsSolution,
    format: Format,
) -> Result<()> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(sol)?),
        _ => {
            println!("case:     {}", case.name);
            println!("method:   {}", method.label());
            println!("opened:   {}", format_opened(&sol.opened_lines));
            println!("dispatch: {} $/h", sig6(sol.dispatch_cost));
            println!("gap:      {}", sig6(sol.gap));
            println!("nodes:    {}", sol.nodes);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
