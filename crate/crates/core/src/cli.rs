//! Command-line front end: scenario loading, command dispatch and output files.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::authenticator::AuthenticatorState;
use crate::channel::{channel_statistics, channel_statistics_at};
use crate::delay_bounds::{
    delay_violation_bound, service_outage, ArrivalModel, OutageMode, ServiceModel, SnrOutageMethod,
};
use crate::error::{Error, Result};
use crate::position_attack::{pmd_map, scenario_authenticator, truncated_search, Grid, SearchReport};
use crate::power_attack::{
    mc_mdp_optimal_pma, mdp_fixed_strategy, mdp_optimal_pma, mdp_optimal_pma_saddlepoint,
    mdp_single_array_closed_form, statistical_power_strategy, PowerStrategy, TailMethod,
};
use crate::scenario::{apply_override, CorrelationModel, Scenario};

const COVERAGE_LEVEL: f64 = 1e-4;
const LOG10_FLOOR: f64 = -15.0;

#[derive(Debug, Parser)]
#[command(name = "dpla", version, about = "Worst-case detection analysis for distributed SIMO authentication")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scenario JSON file (repeat for `compare`).
    #[arg(long, global = true)]
    pub scenario: Vec<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 100_000)]
    pub samples: u64,
    /// Worker threads; 0 picks the machine default.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Overrides the scenario's false-alarm target.
    #[arg(long, global = true)]
    pub pfa: Option<f64>,
    /// Scenario override `path.to.field=value`, repeatable.
    #[arg(long = "set", global = true)]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    Pfa,
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutageArg {
    CentralizedBound,
    ExactIfValid,
    LocalBound,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Detection threshold for the false-alarm target.
    Threshold,
    /// Missed-detection probability with Eve at the scenario's position.
    Mdp {
        /// saddlepoint | closedform | montecarlo | fixed:ETA,PSI | statistical | none
        #[arg(long, default_value = "saddlepoint")]
        method: String,
    },
    /// Missed detection versus false alarm.
    Roc {
        #[arg(long, default_value_t = 1e-4)]
        pfa_min: f64,
        #[arg(long, default_value_t = 1e-1)]
        pfa_max: f64,
        #[arg(long, default_value_t = 13)]
        points: usize,
    },
    /// Approximation versus sampling for the optimal power attack.
    Validate {
        #[arg(long, value_enum, default_value_t = Sweep::Pfa)]
        sweep: Sweep,
        /// Comma-separated values; for `pfa` a log grid is used when omitted.
        #[arg(long)]
        values: Option<String>,
        #[arg(long, default_value_t = 7)]
        points: usize,
    },
    /// log10 of the optimal-attack pmd over the region.
    Heatmap {
        /// Grid spacing in meters; the scenario's coverage resolution by default.
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Truncated search for the worst attacker position.
    Optimize {
        /// Candidates written to the output.
        #[arg(long, default_value_t = 100)]
        top: usize,
    },
    /// One summary row per scenario.
    Compare,
    /// Delay-violation bound per deadline.
    Delay {
        #[arg(long, value_enum, default_value_t = OutageArg::CentralizedBound)]
        outage: OutageArg,
        /// Use the closed-form SNR outage instead of sampling.
        #[arg(long)]
        closed_form: bool,
        /// Fixes p_X instead of deriving it from the link.
        #[arg(long)]
        outage_probability: Option<f64>,
    },
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidScenario(_) | Error::Parse(_) | Error::Io(_) | Error::CoincidentPosition(_) | Error::Domain(_) => 2,
        Error::Unstable | Error::EmptyRegion | Error::EmptyCandidates | Error::BudgetExceeded { .. } => 4,
        Error::DimensionMismatch { .. }
        | Error::NotPositiveDefinite
        | Error::NonFinite(_)
        | Error::NoSignChange { .. }
        | Error::NoConvergence(_)
        | Error::UnsupportedCorrelation { .. }
        | Error::Precondition(_) => 3,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::NotPositiveDefinite => "not_positive_definite",
        Error::NonFinite(_) => "non_finite",
        Error::NoSignChange { .. } => "no_sign_change",
        Error::NoConvergence(_) => "no_convergence",
        Error::CoincidentPosition(_) => "coincident_position",
        Error::UnsupportedCorrelation { .. } => "unsupported_correlation",
        Error::InvalidScenario(_) => "invalid_scenario",
        Error::Parse(_) => "parse",
        Error::EmptyRegion => "empty_region",
        Error::EmptyCandidates => "empty_candidates",
        Error::BudgetExceeded { .. } => "budget_exceeded",
        Error::Unstable => "unstable",
        Error::Precondition(_) => "precondition",
        Error::Io(_) => "io",
    }
}

/// Machine-readable error record.
pub fn error_json(e: &Error) -> Value {
    let mut v = json!({
        "error": error_kind(e),
        "message": e.to_string(),
        "exit_code": exit_code(e),
    });
    if let Error::InvalidScenario(list) = e {
        v["violations"] = json!(list);
    }
    v
}

/// Reads, overrides and validates a scenario file.
pub fn load_scenario(path: &Path, overrides: &[String], pfa: Option<f64>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let mut doc: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    if let Some(p) = pfa {
        doc["false_alarm_target"] = json!(p);
    }
    Scenario::from_value(doc)
}

/// Output produced by a command.
pub struct Output {
    pub body: String,
    /// Printed to stdout when the body goes to a file.
    pub summary: Option<String>,
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi < 1.0) || n < 2 {
        return Err(Error::Domain(format!("need 0 < min < max < 1 and >= 2 points, got ({lo}, {hi}, {n})")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("value '{t}': {e}"))))
        .collect()
}

fn one_scenario(common: &CommonArgs) -> Result<Scenario> {
    match common.scenario.as_slice() {
        [p] => load_scenario(p, &common.overrides, common.pfa),
        [] => Err(Error::Domain("--scenario is required".into())),
        _ => Err(Error::Domain("this command takes exactly one --scenario".into())),
    }
}

#[derive(Serialize)]
struct ThresholdOut {
    scenario: String,
    dof: u32,
    false_alarm_target: f64,
    threshold: f64,
    false_alarm_check: f64,
    mahalanobis_energy: f64,
}

fn cmd_threshold(common: &CommonArgs) -> Result<Output> {
    let s = one_scenario(common)?;
    let auth = scenario_authenticator(&s)?;
    let out = ThresholdOut {
        scenario: s.name.clone(),
        dof: auth.total_dof(),
        false_alarm_target: s.false_alarm_target,
        threshold: auth.threshold(),
        false_alarm_check: auth.false_alarm_rate(),
        mahalanobis_energy: auth.mahalanobis_energy(),
    };
    let summary = format!("T = {} (p_FA check {})", fmt(out.threshold), fmt(out.false_alarm_check));
    Ok(Output {
        body: to_json(&out)?,
        summary: Some(summary),
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn cmd_mdp(common: &CommonArgs, method: &str) -> Result<Output> {
    let s = one_scenario(common)?;
    let eve = s.eve()?;
    let auth = scenario_authenticator(&s)?;
    let eve_stats = channel_statistics(&s, &eve)?;
    let mut out = json!({ "scenario": s.name, "method": method });
    let pmd = match method {
        "saddlepoint" => mdp_optimal_pma_saddlepoint(&auth, &eve_stats, TailMethod::default())?,
        "closedform" => mdp_single_array_closed_form(&auth, &eve_stats)?,
        "montecarlo" => {
            let est = mc_mdp_optimal_pma(&auth, &eve_stats, &[auth.threshold()], common.samples, common.seed)?[0];
            out["std_error"] = json!(est.std_error);
            out["samples"] = json!(est.samples);
            out["seed"] = json!(est.seed);
            est.probability
        }
        "statistical" => {
            let st = statistical_power_strategy(&auth, &eve_stats)?;
            out["strategy"] = json!(st);
            mdp_fixed_strategy(&auth, &eve_stats, st)?
        }
        "none" => mdp_fixed_strategy(&auth, &eve_stats, PowerStrategy::none())?,
        m if m.starts_with("fixed:") => {
            let v = parse_values(&m["fixed:".len()..])?;
            let [eta, psi] = v[..] else {
                return Err(Error::Parse(format!("expected fixed:ETA,PSI, got '{m}'")));
            };
            let st = PowerStrategy::new(eta, psi)?;
            out["strategy"] = json!(st);
            mdp_fixed_strategy(&auth, &eve_stats, st)?
        }
        m => {
            return Err(Error::Parse(format!(
                "unknown method '{m}' (saddlepoint, closedform, montecarlo, fixed:ETA,PSI, statistical, none)"
            )))
        }
    };
    out["pmd"] = json!(pmd);
    Ok(Output {
        body: to_json(&out)?,
        summary: Some(format!("p_MD = {}", fmt(pmd))),
    })
}

fn cmd_roc(common: &CommonArgs, lo: f64, hi: f64, n: usize) -> Result<Output> {
    let s = one_scenario(common)?;
    let eve = s.eve()?;
    let base = scenario_authenticator(&s)?;
    let eve_stats = channel_statistics(&s, &eve)?;
    let mut csv = String::from("p_fa,p_md_opt,p_md_none\n");
    for p in log_grid(lo, hi, n)? {
        let auth = base.rethresholded(base.threshold_for_pfa(p)?)?;
        let opt = mdp_optimal_pma(&auth, &eve_stats)?;
        let none = mdp_fixed_strategy(&auth, &eve_stats, PowerStrategy::none())?;
        writeln!(csv, "{},{},{}", fmt(p), fmt(opt), fmt(none)).expect("string write");
    }
    Ok(Output { body: csv, summary: None })
}

fn cmd_validate(common: &CommonArgs, sweep: Sweep, values: Option<&str>, points: usize) -> Result<Output> {
    let s = one_scenario(common)?;
    let eve = s.eve()?;
    let mut csv = String::from("param,saddlepoint,montecarlo,std_error\n");
    match sweep {
        Sweep::Pfa => {
            let grid = match values {
                Some(v) => parse_values(v)?,
                None => log_grid(1e-4, 1e-1, points)?,
            };
            let base = scenario_authenticator(&s)?;
            let eve_stats = channel_statistics(&s, &eve)?;
            let auths = grid
                .iter()
                .map(|&p| base.rethresholded(base.threshold_for_pfa(p)?))
                .collect::<Result<Vec<_>>>()?;
            let thresholds: Vec<f64> = auths.iter().map(|a| a.threshold()).collect();
            let mc = mc_mdp_optimal_pma(&base, &eve_stats, &thresholds, common.samples, common.seed)?;
            for ((p, a), est) in grid.iter().zip(&auths).zip(&mc) {
                let sp = mdp_optimal_pma(a, &eve_stats)?;
                writeln!(csv, "{},{},{},{}", fmt(*p), fmt(sp), fmt(est.probability), fmt(est.std_error)).expect("string write");
            }
        }
        Sweep::Rho => {
            let grid = parse_values(values.unwrap_or("0,0.3,0.6"))?;
            for rho in grid {
                let mut sc = s.clone();
                sc.correlation = if rho == 0.0 {
                    CorrelationModel::Identity
                } else {
                    CorrelationModel::Exponential { rho }
                };
                sc.validate()?;
                let auth = scenario_authenticator(&sc)?;
                let eve_stats = channel_statistics(&sc, &eve)?;
                let sp = mdp_optimal_pma(&auth, &eve_stats)?;
                let est = mc_mdp_optimal_pma(&auth, &eve_stats, &[auth.threshold()], common.samples, common.seed)?[0];
                writeln!(csv, "{},{},{},{}", fmt(rho), fmt(sp), fmt(est.probability), fmt(est.std_error)).expect("string write");
            }
        }
    }
    Ok(Output { body: csv, summary: None })
}

fn cmd_heatmap(common: &CommonArgs, resolution: Option<f64>) -> Result<Output> {
    let s = one_scenario(common)?;
    let res = resolution.unwrap_or(s.search.coverage_resolution_m);
    let grid = Grid::for_scenario(&s, res)?;
    let auth = scenario_authenticator(&s)?;
    let power = s.eve.as_ref().map_or(s.alice.tx_power, |e| e.tx_power);
    use rayon::prelude::*;
    let rows: Vec<String> = (0..grid.ny)
        .into_par_iter()
        .map(|iy| -> Result<String> {
            let mut out = String::new();
            for ix in 0..grid.nx {
                let p = grid.point(ix, iy);
                let v = match channel_statistics_at(&s, p, power) {
                    Ok(st) => fmt(mdp_optimal_pma(&auth, &st)?.log10().max(LOG10_FLOOR)),
                    Err(Error::CoincidentPosition(_)) => "nan".into(),
                    Err(e) => return Err(e),
                };
                writeln!(out, "{},{},{}", fmt(p[0]), fmt(p[1]), v).expect("string write");
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("x_m,y_m,log10_pmd\n");
    rows.iter().for_each(|r| csv.push_str(r));
    Ok(Output { body: csv, summary: None })
}

#[derive(Serialize)]
struct OptimizeOut<'a> {
    scenario: &'a str,
    optimal_position_pmd: f64,
    grid_points: usize,
    allowed_points: usize,
    lobe_points: usize,
    search_positions: usize,
    small_scale_optima: usize,
    search_fraction: f64,
    evaluated_candidates: usize,
    candidates: &'a [crate::position_attack::CandidatePosition],
}

fn optimize_summary(s: &Scenario, r: &SearchReport, top: usize) -> Result<String> {
    to_json(&OptimizeOut {
        scenario: &s.name,
        optimal_position_pmd: r.optimal_position_pmd(),
        grid_points: r.grid_points,
        allowed_points: r.allowed_points,
        lobe_points: r.lobe_points,
        search_positions: r.search_positions,
        small_scale_optima: r.small_scale_optima,
        search_fraction: r.search_fraction(),
        evaluated_candidates: r.candidates.len(),
        candidates: &r.candidates[..top.min(r.candidates.len())],
    })
}

fn cmd_optimize(common: &CommonArgs, top: usize) -> Result<Output> {
    let s = one_scenario(common)?;
    let r = truncated_search(&s, &s.search)?;
    Ok(Output {
        body: optimize_summary(&s, &r, top)?,
        summary: Some(format!("p_MD^(Opt. Position) = {}", fmt(r.optimal_position_pmd()))),
    })
}

fn cmd_compare(common: &CommonArgs) -> Result<Output> {
    if common.scenario.is_empty() {
        return Err(Error::Domain("--scenario is required".into()));
    }
    let mut csv = String::from(
        "scenario,n_rrh,n_rx,total_antennas,pmd_opt_position,coverage_pct,search_points,total_small_scale_optima\n",
    );
    for path in &common.scenario {
        let s = load_scenario(path, &common.overrides, common.pfa)?;
        let r = truncated_search(&s, &s.search)?;
        let map = pmd_map(&s, s.search.coverage_resolution_m)?;
        let n_rx: Vec<String> = s.rrhs.iter().map(|r| r.num_antennas.to_string()).collect();
        let n_rx = if n_rx.iter().all(|n| *n == n_rx[0]) { n_rx[0].clone() } else { n_rx.join("/") };
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            s.name,
            s.rrhs.len(),
            n_rx,
            s.total_antennas(),
            fmt(r.optimal_position_pmd()),
            fmt(100.0 * map.coverage(COVERAGE_LEVEL)),
            r.search_positions,
            r.small_scale_optima
        )
        .expect("string write");
    }
    Ok(Output { body: csv, summary: None })
}

fn cmd_delay(common: &CommonArgs, outage: OutageArg, closed_form: bool, fixed: Option<f64>) -> Result<Output> {
    let s = one_scenario(common)?;
    let link = s.link;
    let (p_x, note) = match fixed {
        Some(p) => (p, json!({ "source": "fixed" })),
        None => {
            let auth: AuthenticatorState = scenario_authenticator(&s)?;
            let method = if closed_form {
                SnrOutageMethod::ClosedForm
            } else {
                SnrOutageMethod::MonteCarlo {
                    samples: common.samples,
                    seed: common.seed,
                }
            };
            let mode = match outage {
                OutageArg::CentralizedBound => OutageMode::CentralizedBound,
                OutageArg::ExactIfValid => OutageMode::CentralizedExactIfValid,
                OutageArg::LocalBound => OutageMode::LocalBound,
            };
            let r = service_outage(&auth, link.rate_bits, link.noise_n0, mode, method)?;
            (r.p_x, serde_json::to_value(&r).map_err(|e| Error::Parse(e.to_string()))?)
        }
    };
    let arrival = ArrivalModel::new(link.bits_per_frame)?;
    let service = ServiceModel::new(link.rate_bits, link.resources, p_x)?;
    let mut csv = String::from("w,bound,s_opt\n");
    for w in 1..=link.max_deadline_frames {
        let b = delay_violation_bound(&arrival, &service, w)?;
        writeln!(csv, "{w},{},{}", fmt(b.bound), fmt(b.s_opt)).expect("string write");
    }
    let as_printed = note.get("as_printed").and_then(Value::as_bool).unwrap_or(false);
    let mut summary = format!("p_X = {}", fmt(p_x));
    if as_printed {
        summary.push_str(" (as-printed exact case)");
    }
    Ok(Output {
        body: csv,
        summary: Some(summary),
    })
}

/// Runs one parsed command on the current thread pool.
pub fn execute(cli: &Cli) -> Result<Output> {
    let c = &cli.common;
    match &cli.command {
        Command::Threshold => cmd_threshold(c),
        Command::Mdp { method } => cmd_mdp(c, method),
        Command::Roc { pfa_min, pfa_max, points } => cmd_roc(c, *pfa_min, *pfa_max, *points),
        Command::Validate { sweep, values, points } => cmd_validate(c, *sweep, values.as_deref(), *points),
        Command::Heatmap { resolution } => cmd_heatmap(c, *resolution),
        Command::Optimize { top } => cmd_optimize(c, *top),
        Command::Compare => cmd_compare(c),
        Command::Delay {
            outage,
            closed_form,
            outage_probability,
        } => cmd_delay(c, *outage, *closed_form, *outage_probability),
    }
}

/// Writes `body` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(body.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn run_inner(cli: &Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.threads)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    let out = pool.install(|| execute(cli))?;
    match &cli.common.out {
        Some(path) => {
            write_atomic(path, &out.body)?;
            if let Some(s) = out.summary {
                println!("{s}");
            }
        }
        None => {
            print!("{}", out.body);
            if let Some(s) = out.summary {
                eprintln!("{s}");
            }
        }
    }
    Ok(())
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match run_inner(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}
