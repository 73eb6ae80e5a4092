//! Command-line front end: config ingestion, dispatch and reports.
//!
//! Exit codes: 0 pass or certified, 1 fail or refuted, 2 undecided or
//! inconclusive, 3 input error.

mod config;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{
    AffineConfig, BoxConfig, ConfigError, FormConfig, GridConfig, OperatorConfig, OracleConfig,
    PairConfig, Resolved, RunConfig, SpaceConfig, TermConfig,
};
pub use report::{RunReport, Status, Timing, EXIT_FAIL, EXIT_INPUT, EXIT_OK, EXIT_UNDECIDED, SCHEMA_VERSION};

use crate::axioms::{oracle_agreement, run_axiom_suite};
use crate::engine::{
    check_example_bound, classic_darbo_run, darbo_iterate, weak_contraction_run, Certificate,
    EngineError,
};
use crate::shifting::{check_all, combine, FunctionSequencePair, Verdict};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "darbo", version, about = "Measure-of-noncompactness calculus and Darbo-type fixed-point certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Randomized check of the measure axioms M1-M6 and the truncation oracle.
    CheckAxioms(CommonArgs),
    /// Shifting-distance checks for the configured function pair.
    CheckPair(CommonArgs),
    /// Run the nested iteration and emit a certificate.
    Certify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Mode::Main)]
        mode: Mode,
    },
    /// Built-in worked example: pair checks, bound table and certificate.
    Demo(OutputArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON run configuration; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the JSON report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report on stdout instead of the text summary.
    #[arg(long)]
    json: bool,
    /// Record wall-clock time in the report (breaks byte-identical output).
    #[arg(long)]
    timing: bool,
}

/// Which contraction hypothesis `certify` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// `ψ_n(μ(TA)) ≤ φ_n(μ(A))` with the configured pair.
    Main,
    /// Same with `ψ_n = t`.
    Identity,
    /// `ψ_n(μ(TA)) ≤ ψ_n(μ(A)) − φ_n(μ(A))`.
    Weak,
    /// `μ(TA) ≤ k·μ(A)` with `k = classicK`.
    Classic,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Main => "main",
            Mode::Identity => "identity",
            Mode::Weak => "weak",
            Mode::Classic => "classic",
        }
    }
}

/// Parses arguments, runs one command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let started = Instant::now();
    let (mut report, output) = match cli.command {
        Command::CheckAxioms(c) => {
            let seed = c.seed.unwrap_or(DEFAULT_SEED);
            (with_config(&c, "check-axioms", |cfg| cmd_check_axioms(cfg, seed)), c.output)
        }
        Command::CheckPair(c) => (with_config(&c, "check-pair", cmd_check_pair), c.output),
        Command::Certify { common, mode } => {
            (with_config(&common, "certify", |cfg| cmd_certify(cfg, mode)), common.output)
        }
        Command::Demo(o) => (cmd_demo(), o),
    };
    if output.timing {
        report.timing = Some(Timing { elapsed_ms: started.elapsed().as_secs_f64() * 1e3 });
    }
    emit(&report, &output)
}

fn with_config(c: &CommonArgs, command: &'static str, f: impl FnOnce(&RunConfig) -> RunReport) -> RunReport {
    let loaded = match &c.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    };
    let mut report = match loaded {
        Ok(cfg) => f(&cfg),
        Err(e) => {
            let mut r = RunReport::new(command, None);
            r.fail_with(e.to_string());
            r
        }
    };
    if c.seed.is_some() && report.seed.is_none() {
        report.seed = c.seed;
    }
    report
}

fn emit(report: &RunReport, output: &OutputArgs) -> i32 {
    if let Some(path) = &output.out {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("cannot write {}: {e}", path.display());
            return EXIT_INPUT;
        }
    }
    if output.json {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.render_text());
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    report.exit_code
}

fn resolve_or_report(cfg: &RunConfig, report: &mut RunReport) -> Option<Resolved> {
    match cfg.resolve() {
        Ok(r) => Some(r),
        Err(e) => {
            report.fail_with(e.to_string());
            None
        }
    }
}

/// Randomized axiom suite and oracle agreement.
pub fn cmd_check_axioms(cfg: &RunConfig, seed: u64) -> RunReport {
    let mut report = RunReport::new("check-axioms", Some(cfg.clone()));
    report.seed = Some(seed);
    if resolve_or_report(cfg, &mut report).is_none() {
        return report;
    }
    report.axioms = run_axiom_suite::<f64>(&cfg.axioms, seed);
    let o = &cfg.oracle;
    let oracle = oracle_agreement(o.boxes, o.truncation, o.tolerance, seed);
    let failed = report.axioms.iter().any(|a| a.verdict != Verdict::Pass) || oracle.verdict != Verdict::Pass;
    report.oracle = Some(oracle);
    report.set_status(if failed { Status::Fail } else { Status::Pass });
    report
}

/// Uniform convergence, monotonicity, both shifting conditions and
/// equality only at zero.
pub fn cmd_check_pair(cfg: &RunConfig) -> RunReport {
    let mut report = RunReport::new("check-pair", Some(cfg.clone()));
    let Some(r) = resolve_or_report(cfg, &mut report) else {
        return report;
    };
    match check_all(&r.pair, &r.engine.grid, &r.engine.convergence_tol) {
        Ok(checks) => {
            report.set_status(Status::of_verdict(combine(&checks)));
            report.checks = checks;
        }
        Err(e) => report.fail_with(e.to_string()),
    }
    report
}

pub fn cmd_certify(cfg: &RunConfig, mode: Mode) -> RunReport {
    let mut report = RunReport::new("certify", Some(cfg.clone()));
    report.mode = Some(mode.name());
    let Some(r) = resolve_or_report(cfg, &mut report) else {
        return report;
    };
    let result = match mode {
        Mode::Main => darbo_iterate(&r.operator, &r.set, &r.pair, &r.engine),
        Mode::Identity => {
            let pair = FunctionSequencePair::identity_psi(r.pair.phi_seq.clone(), r.pair.phi_limit.clone());
            darbo_iterate(&r.operator, &r.set, &pair, &r.engine)
        }
        Mode::Weak => weak_contraction_run(&r.operator, &r.set, &r.pair, &r.engine),
        Mode::Classic => classic_darbo_run(&r.operator, &r.set, &cfg.classic_k, &r.engine),
    };
    attach(&mut report, result);
    report
}

fn attach(report: &mut RunReport, result: Result<Certificate<f64>, EngineError>) {
    match result {
        Ok(mut cert) => {
            report.set_status(Status::of_outcome(cert.outcome));
            report.checks = std::mem::take(&mut cert.pair_checks);
            report.certificate = Some(cert);
        }
        Err(e) => report.fail_with(e.to_string()),
    }
}

/// The built-in worked example with default settings.
pub fn cmd_demo() -> RunReport {
    let cfg = RunConfig::default();
    let mut report = RunReport::new("demo", Some(cfg.clone()));
    let r = cfg.resolve().expect("built-in configuration is valid");
    match check_example_bound(&r.pair, &r.engine.grid, &cfg.bound_n) {
        Ok(b) => report.example_bound = Some(b),
        Err(e) => {
            report.fail_with(e.to_string());
            return report;
        }
    }
    attach(&mut report, darbo_iterate(&r.operator, &r.set, &r.pair, &r.engine));
    let bound_ok = report.example_bound.as_ref().is_some_and(|b| b.report.verdict == Verdict::Pass);
    if report.status == Status::Certified && !bound_ok {
        report.set_status(Status::Fail);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> RunConfig {
        RunConfig::from_json(json).unwrap()
    }

    fn small() -> RunConfig {
        cfg(r#"{"grid": {"tMax": 5, "step": 0.25, "nLadder": [1, 2, 4, 8, 1048576]}}"#)
    }

    #[test]
    fn defaults_describe_the_worked_example() {
        let r = RunConfig::default().resolve().unwrap();
        assert_eq!(r.engine.tol, 1e-9);
        assert_eq!(r.engine.max_iter, 10_000);
        assert_eq!(r.engine.grid.points().len(), 1001);
        assert_eq!(crate::mnc::hausdorff_mnc(&r.set).into_inner(), 1.0);
    }

    #[test]
    fn config_round_trips() {
        let c = RunConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }

    #[test]
    fn given_pairs_do_not_inherit_default_limits() {
        let c = cfg(r#"{"pair": {"psiSeq": "n*t", "phiSeq": "2+t"}}"#);
        assert_eq!(c.pair.psi_limit, None);
        assert!(RunConfig::from_json(r#"{"pair": {"psiSeq": "t"}}"#).is_err());
    }

    #[test]
    fn operator_forms() {
        let c = cfg(r#"{"operator": {"compose": [{"dTail": {"beta": 0.5}}, {"dTail": {"beta": 0.5}}]}}"#);
        let op = c.resolve().unwrap().operator.materialize();
        assert_eq!(op.d(7), 0.25);
        let c = cfg(r#"{"operator": {"dHead": [0.1], "dTail": {"terms": [{"alpha": 0.1, "rho": 0.5}], "beta": 0.2}}}"#);
        let op = c.resolve().unwrap().operator.materialize();
        assert_eq!(op.d(1), 0.1);
        assert!((op.d(2) - 0.225).abs() < 1e-15);
    }

    #[test]
    fn invalid_inputs_exit_three() {
        let bad_box = cfg(r#"{"set": {"tailLo": {"beta": 0.5}, "tailHi": {"beta": 1}}}"#);
        assert_eq!(cmd_check_axioms(&bad_box, 1).exit_code, EXIT_INPUT);
        let bad_expr = cfg(r#"{"pair": {"psiSeq": "t+", "phiSeq": "t"}}"#);
        let r = cmd_check_pair(&bad_expr);
        assert_eq!(r.exit_code, EXIT_INPUT);
        assert!(r.error.unwrap().contains("pair.psiSeq"));
        assert!(RunConfig::from_json(r#"{"tolerance": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"set": {"tailLo": {"terms": [{"alpha": 1, "rho": 1.5}]}}}"#)
            .unwrap()
            .resolve()
            .is_err());
    }

    #[test]
    fn zero_counts_are_vacuous() {
        let c = cfg(r#"{"axioms": {"m1": 0, "m2": 0, "m3": 0, "m4": 0, "m5": 0, "m6Chains": 0}, "oracle": {"boxes": 0}}"#);
        let r = cmd_check_axioms(&c, 5);
        assert_eq!(r.exit_code, EXIT_OK);
        assert!(r.axioms.iter().all(|a| a.instances == 0));
    }

    #[test]
    fn check_pair_exit_codes() {
        assert_eq!(cmd_check_pair(&small()).exit_code, EXIT_OK);
        let mut broken = small();
        broken.pair = PairConfig {
            psi_seq: "t".into(),
            phi_seq: "t+1".into(),
            psi_limit: Some("t".into()),
            phi_limit: Some("t+1".into()),
        };
        let r = cmd_check_pair(&broken);
        assert_eq!(r.exit_code, EXIT_FAIL);
        assert!(r.checks.iter().any(|c| c.counterexample.is_some()));
        let mut divergent = small();
        divergent.pair = PairConfig { psi_seq: "n*t".into(), phi_seq: "2+t".into(), psi_limit: None, phi_limit: None };
        assert_eq!(cmd_check_pair(&divergent).exit_code, EXIT_UNDECIDED);
    }

    #[test]
    fn certify_modes() {
        assert_eq!(cmd_certify(&small(), Mode::Main).exit_code, EXIT_OK);
        let mut id = small();
        id.operator = OperatorConfig::Scaling { scaling: 1.0 };
        assert_eq!(cmd_certify(&id, Mode::Main).exit_code, EXIT_FAIL);
        let mut slow = small();
        slow.max_iter = 1;
        assert_eq!(cmd_certify(&slow, Mode::Main).exit_code, EXIT_UNDECIDED);
        assert_eq!(cmd_certify(&small(), Mode::Classic).exit_code, EXIT_OK);
        let mut weak = small();
        weak.pair = PairConfig {
            psi_seq: "t".into(),
            phi_seq: "t/2".into(),
            psi_limit: Some("t".into()),
            phi_limit: Some("t/2".into()),
        };
        assert_eq!(cmd_certify(&weak, Mode::Weak).exit_code, EXIT_OK);
        assert_eq!(cmd_certify(&weak, Mode::Identity).exit_code, EXIT_OK);
        // With ψ = t, φ = 2 + t breaks condition (i): a precondition error.
        assert_eq!(cmd_certify(&small(), Mode::Identity).exit_code, EXIT_INPUT);
    }

    #[test]
    fn self_map_failure_is_an_input_error() {
        let mut c = small();
        c.operator = OperatorConfig::Scaling { scaling: 2.0 };
        let r = cmd_certify(&c, Mode::Main);
        assert_eq!(r.exit_code, EXIT_INPUT);
        assert!(r.error.unwrap().contains("into itself"));
    }

    #[test]
    fn run_parses_arguments() {
        assert_eq!(run(["darbo", "--version"]), EXIT_OK);
        assert_eq!(run(["darbo", "certify", "--mode", "sideways"]), EXIT_INPUT);
        assert_eq!(run(["darbo", "check-pair", "--config", "/nonexistent/config.json"]), EXIT_INPUT);
    }
}
