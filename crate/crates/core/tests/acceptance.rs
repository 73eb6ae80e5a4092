//! Acceptance suite. Each test reports one `PASS`/`FAIL` line on stderr
//! (written past the test harness capture) and then asserts.

use std::io::Write;
use std::time::{Duration, Instant};

use darbo::axioms::{oracle_agreement, run_axiom_suite, AxiomCounts, AxiomGroup};
use darbo::cli::cmd_demo;
use darbo::engine::{
    check_example_bound, classic_darbo_run, darbo_iterate, weak_contraction_run, EngineConfig,
    Outcome,
};
use darbo::expr::parse_expr;
use darbo::mnc::TailForm;
use darbo::scalar::ratio;
use darbo::scenarios::{
    broken_pair, half_scaling, identity_operator, paper_pair, unit_box, BOUND_TABLE_N,
};
use darbo::shifting::{
    check_all, check_condition_i, check_condition_ii, example_bound, recheck,
    CheckKind, FunctionSequencePair, SampleGrid, Verdict,
};
use darbo::{BigRational, TailBoxF64};

fn report(id: u32, name: &str, ok: bool, detail: String) {
    let line = format!(
        "acceptance {id} {:<28} {}  {detail}\n",
        name,
        if ok { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id} failed: {detail}");
}

#[test]
fn criterion_1_worked_example_bound() {
    let start = Instant::now();
    let grid = SampleGrid::<f64>::default();
    let r = check_example_bound(&paper_pair(), &grid, &BOUND_TABLE_N).unwrap();
    let elapsed = start.elapsed();
    let formula_ok = r.table.iter().all(|row| {
        let n = row.n as f64;
        (row.bound - (2.0 * n + 1.0) / (n * (n + 1.0))).abs() <= 1e-15
    });
    let exact_ok = BOUND_TABLE_N.iter().all(|&n| {
        let exact: BigRational = example_bound(n);
        exact == ratio(2 * n as i64 + 1, (n * (n + 1)) as i64)
    });
    let n1 = (r.table[0].bound - 1.5).abs() <= 1e-15;
    let inequality_ok = r.report.verdict == Verdict::Pass
        && r.table.iter().all(|row| row.max_excess.unwrap() <= row.bound + 1e-12);
    let limit_ok = r.limit_max_excess.unwrap() <= 1e-12;
    let ok = formula_ok && exact_ok && n1 && inequality_ok && limit_ok && elapsed < Duration::from_secs(30);
    report(
        1,
        "worked-example bound",
        ok,
        format!(
            "n=1 bound {} n=1e6 bound {:.6e} limit max(2u-v) {:.1e} in {:.2?}",
            r.table[0].bound,
            r.table.last().unwrap().bound,
            r.limit_max_excess.unwrap(),
            elapsed
        ),
    );
}

#[test]
fn criterion_2_contraction_factor() {
    let cfg = EngineConfig::default();
    let c = darbo_iterate(&half_scaling(), &unit_box(), &paper_pair(), &cfg).unwrap();
    let worst = c
        .trace
        .iter()
        .map(|s| ((s.mu - 0.5f64.powi(s.k as i32)) / 0.5f64.powi(s.k as i32)).abs())
        .fold(0.0, f64::max);
    let ok = c.outcome == Outcome::Certified && c.steps == 30 && worst <= 1e-12;
    report(
        2,
        "contraction factor",
        ok,
        format!("{:?} at k={} mu={:e} max rel err {worst:e}", c.outcome, c.steps, c.final_mu()),
    );
}

#[test]
fn criterion_3_axiom_suite() {
    let start = Instant::now();
    let counts = AxiomCounts::default();
    let results = run_axiom_suite::<f64>(&counts, 42);
    let elapsed = start.elapsed();
    let enough = results.iter().all(|r| match r.group {
        AxiomGroup::M1 => r.instances >= 500,
        AxiomGroup::M6 => counts.m6_depth >= 50 && r.instances >= 1,
        _ => r.instances >= 1000,
    });
    let violations: u64 = results.iter().map(|r| r.violations).sum();
    let ok = enough && violations == 0 && elapsed < Duration::from_secs(20);
    let summary: Vec<String> = results.iter().map(|r| format!("{:?}:{}", r.group, r.instances)).collect();
    report(
        3,
        "axiom suite",
        ok,
        format!("{} violations={violations} in {elapsed:.2?}", summary.join(" ")),
    );
}

#[test]
fn criterion_4_oracle_agreement() {
    let r = oracle_agreement(100, 1_000_000, 1e-6, 42);
    let ok = r.boxes == 100 && r.verdict == Verdict::Pass && r.max_abs_diff <= 1e-6;
    report(4, "oracle agreement", ok, format!("max |diff| {:e} over {} boxes", r.max_abs_diff, r.boxes));
}

#[test]
fn criterion_5_shifting_checks() {
    let grid = SampleGrid::<f64>::default();
    let pair = paper_pair();
    let reports = check_all(&pair, &grid, &1e-5).unwrap();
    let five = reports.len() == 5;
    let all_pass = reports.iter().all(|r| r.verdict == Verdict::Pass);
    let uniform = reports.iter().find(|r| r.check == CheckKind::UniformConvergence).unwrap();
    let errors_ok = uniform.sup_errors.len() == grid.n_ladder().len()
        && uniform.sup_errors.iter().all(|e| {
            let n = e.n as f64;
            (e.psi - 1.0 / (n + 1.0)).abs() <= 1e-12 && (e.phi - 1.0 / n).abs() <= 1e-12
        });
    let broken = broken_pair();
    let i = check_condition_i(&broken, &grid).unwrap();
    let ii = check_condition_ii(&broken, &grid).unwrap();
    let broken_ok = i.verdict == Verdict::Fail
        && ii.verdict == Verdict::Fail
        && recheck(&i, &broken, &grid, &1e-5).unwrap()
        && recheck(&ii, &broken, &grid, &1e-5).unwrap();
    let ok = five && all_pass && errors_ok && broken_ok;
    report(
        5,
        "shifting checks",
        ok,
        format!(
            "paper pair pass={all_pass} sup errors={errors_ok}; broken (i) {:?} (ii) {:?}",
            i.counterexample.as_ref().map(|c| (c.u, c.v)),
            ii.counterexample.as_ref().map(|c| (c.u, c.v))
        ),
    );
}

#[test]
fn criterion_6_corollary_recovery() {
    let cfg = EngineConfig::default();
    let half = classic_darbo_run(&half_scaling(), &unit_box(), &0.5, &cfg).unwrap();
    let ratio_ok = half.trace.windows(2).all(|w| w[1].mu / w[0].mu == 0.5);
    let tight = classic_darbo_run(&half_scaling(), &unit_box(), &0.4, &cfg).unwrap();
    let classic_ok = half.outcome == Outcome::Certified
        && ratio_ok
        && tight.outcome == Outcome::Refuted
        && tight.steps == 0;

    let (psi, phi) = (parse_expr("t").unwrap(), parse_expr("t/2").unwrap());
    let weak = FunctionSequencePair::new(psi.clone(), phi.clone()).with_limits(psi, phi);
    let w_half = weak_contraction_run(&half_scaling(), &unit_box(), &weak, &cfg).unwrap();
    let w_id = weak_contraction_run(&identity_operator(), &unit_box(), &weak, &cfg).unwrap();
    let g = TailForm::geometric(1.0, 0.5).unwrap();
    let compact = TailBoxF64::from_tails(-&g, g).unwrap();
    let w_zero = weak_contraction_run(&half_scaling(), &compact, &weak, &cfg).unwrap();
    let weak_ok = w_half.outcome == Outcome::Certified
        && w_id.outcome == Outcome::Refuted
        && w_zero.outcome == Outcome::Certified
        && w_zero.steps == 0;
    report(
        6,
        "corollary recovery",
        classic_ok && weak_ok,
        format!(
            "classic k=1/2 {:?} ratio exact={ratio_ok}, k=0.4 {:?} at k={}; weak {:?}/{:?}/{:?}",
            half.outcome, tight.outcome, tight.steps, w_half.outcome, w_id.outcome, w_zero.outcome
        ),
    );
}

#[test]
fn criterion_7_determinism() {
    let a = cmd_demo().to_json();
    let b = cmd_demo().to_json();
    let ok = a == b && !a.contains("elapsed");
    report(7, "determinism", ok, format!("{} report bytes, identical={}", a.len(), a == b));
}
