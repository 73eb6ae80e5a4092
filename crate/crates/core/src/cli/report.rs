use std::fmt::Write as _;

use serde::Serialize;

use super::config::RunConfig;
use crate::axioms::{AxiomResult, OracleAgreement};
use crate::engine::{Certificate, ExampleBoundReport, Outcome};
use crate::shifting::{CheckReport, Verdict};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Undecided,
    Certified,
    Refuted,
    Inconclusive,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass | Status::Certified => EXIT_OK,
            Status::Fail | Status::Refuted => EXIT_FAIL,
            Status::Undecided | Status::Inconclusive => EXIT_UNDECIDED,
            Status::Error => EXIT_INPUT,
        }
    }

    pub fn of_verdict(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Status::Pass,
            Verdict::Fail => Status::Fail,
            Verdict::Undecided => Status::Undecided,
        }
    }

    pub fn of_outcome(o: Outcome) -> Self {
        match o {
            Outcome::Certified => Status::Certified,
            Outcome::Refuted => Status::Refuted,
            Outcome::Inconclusive => Status::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub status: Status,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckReport<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example_bound: Option<ExampleBoundReport<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub axioms: Vec<AxiomResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleAgreement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate<f64>>,
    /// Present only when explicitly requested; omitted by default so that
    /// reports are byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
}

impl RunReport {
    pub fn new(command: &'static str, config: Option<RunConfig>) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            mode: None,
            seed: None,
            status: Status::Pass,
            exit_code: EXIT_OK,
            error: None,
            checks: Vec::new(),
            example_bound: None,
            axioms: Vec::new(),
            oracle: None,
            certificate: None,
            timing: None,
            config,
        }
    }

    pub fn set_status(&mut self, status: Status) {
        self.status = status;
        self.exit_code = status.exit_code();
    }

    pub fn fail_with(&mut self, message: String) {
        self.error = Some(message);
        self.set_status(Status::Error);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Human-readable summary.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "{} {}: {}", self.tool, self.command, label(self.status));
        if let Some(e) = &self.error {
            let _ = writeln!(w, "error: {e}");
        }
        if !self.checks.is_empty() {
            let _ = writeln!(w, "\npair checks");
            for c in &self.checks {
                let _ = write!(w, "  {:<22} {}", format!("{:?}", c.check), verdict(c.verdict));
                if let Some(cx) = &c.counterexample {
                    let n = cx.n.map_or("limit".to_string(), |n| format!("n={n}"));
                    let _ = write!(w, "  witness u={} v={} {n}", cx.u, cx.v);
                }
                let _ = writeln!(w);
            }
        }
        if let Some(b) = &self.example_bound {
            let _ = writeln!(w, "\nbound table  (2u - v <= (2n+1)/(n(n+1)) whenever psi_n(u) <= phi_n(v))");
            let _ = writeln!(w, "  {:>9}  {:>24}  {:>24}  {:>12}", "n", "bound", "max(2u - v)", "admissible");
            for r in &b.table {
                let m = r.max_excess.map_or("-".to_string(), |m| format!("{m:.6e}"));
                let _ = writeln!(w, "  {:>9}  {:>24}  {:>24}  {:>12}", r.n, format!("{:.15e}", r.bound), m, r.admissible_pairs);
            }
            if let Some(m) = b.limit_max_excess {
                let _ = writeln!(w, "  {:>9}  {:>24}  {:>24}", "limit", "0", format!("{m:.6e}"));
            }
            let _ = writeln!(w, "  verdict: {}", verdict(b.report.verdict));
        }
        for a in &self.axioms {
            let _ = writeln!(w, "  {:?}  {:>5} instances  {:>3} violations  {}", a.group, a.instances, a.violations, verdict(a.verdict));
        }
        if let Some(o) = &self.oracle {
            let _ = writeln!(
                w,
                "  oracle  {} boxes at N={}  max |diff| = {:.3e}  {}",
                o.boxes, o.truncation, o.max_abs_diff, verdict(o.verdict)
            );
        }
        if let Some(c) = &self.certificate {
            let _ = writeln!(w, "\nmu trace");
            let _ = writeln!(w, "  {:>5}  {:>24}  {:>24}", "k", "mu(A_k)", "mu(T A_k)");
            for s in &c.trace {
                let img = s.mu_image.map_or("-".to_string(), |m| format!("{m:.15e}"));
                let _ = writeln!(w, "  {:>5}  {:>24}  {:>24}", s.k, format!("{:.15e}", s.mu), img);
            }
            for warning in &c.warnings {
                let _ = writeln!(w, "warning: {warning}");
            }
            let _ = write!(w, "\ncertificate {} after {} steps", label(Status::of_outcome(c.outcome)), c.steps);
            if let Some(r) = &c.refutation {
                let n = r.n.map_or("limit".to_string(), |n| format!("n={n}"));
                let _ = write!(w, ": {:?} check at k={} ({n}) lhs={} rhs={}", r.check, r.k, r.lhs, r.rhs);
            }
            let _ = writeln!(w);
        }
        if let Some(t) = &self.timing {
            let _ = writeln!(w, "elapsed {:.1} ms", t.elapsed_ms);
        }
        out
    }
}

fn label(s: Status) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

fn verdict(v: Verdict) -> String {
    label(Status::of_verdict(v))
}
