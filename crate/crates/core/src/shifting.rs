//! Grid-based verification of the shifting-distance conditions for a pair of
//! function sequences `(ψ_n, φ_n)` and their limits `(ψ, φ)`.
//!
//! Every check is a falsifier on a finite grid `t_j = j·step ∈ [0, t_max]`
//! and a finite ladder of `n`: `Pass` means no violation was found. A `Fail`
//! always carries a counterexample that [`recheck`] confirms by direct
//! evaluation. Counterexamples are the first violation in grid order.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::scalar::{max_of, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShiftingError {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("expression `{which}` failed at t = {t}, n = {n:?}: {source}")]
    Eval {
        which: &'static str,
        t: f64,
        n: Option<u64>,
        #[source]
        source: ExprError,
    },
}

/// `(ψ_n, φ_n)` with optional declared limits `(ψ, φ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSequencePair {
    pub psi_seq: Expr,
    pub phi_seq: Expr,
    pub psi_limit: Option<Expr>,
    pub phi_limit: Option<Expr>,
}

impl FunctionSequencePair {
    pub fn new(psi_seq: Expr, phi_seq: Expr) -> Self {
        FunctionSequencePair { psi_seq, phi_seq, psi_limit: None, phi_limit: None }
    }

    pub fn with_limits(mut self, psi: Expr, phi: Expr) -> Self {
        self.psi_limit = Some(psi);
        self.phi_limit = Some(phi);
        self
    }

    /// `ψ_n = t` for every `n`, so conditions (i) and (ii) specialize to
    /// conditions on `φ_n` alone.
    pub fn identity_psi(phi_seq: Expr, phi_limit: Option<Expr>) -> Self {
        FunctionSequencePair { psi_seq: Expr::T, phi_seq, psi_limit: Some(Expr::T), phi_limit }
    }

    pub fn psi_n<S: Scalar>(&self, t: &S, n: u64) -> Result<S, ShiftingError> {
        eval_seq(&self.psi_seq, "psi_n", t, n)
    }

    pub fn phi_n<S: Scalar>(&self, t: &S, n: u64) -> Result<S, ShiftingError> {
        eval_seq(&self.phi_seq, "phi_n", t, n)
    }

    /// `ψ(t)`: the declared limit, or the dyadic-ladder estimate.
    pub fn psi<S: Scalar>(&self, t: &S, tol: &S) -> Result<S, ShiftingError> {
        eval_limit(self.psi_limit.as_ref(), &self.psi_seq, "psi", t, tol)
    }

    pub fn phi<S: Scalar>(&self, t: &S, tol: &S) -> Result<S, ShiftingError> {
        eval_limit(self.phi_limit.as_ref(), &self.phi_seq, "phi", t, tol)
    }
}

fn eval_seq<S: Scalar>(e: &Expr, which: &'static str, t: &S, n: u64) -> Result<S, ShiftingError> {
    e.eval_at(t, n).map_err(|source| ShiftingError::Eval {
        which,
        t: t.approx_f64(),
        n: Some(n),
        source,
    })
}

fn eval_limit<S: Scalar>(
    declared: Option<&Expr>,
    seq: &Expr,
    which: &'static str,
    t: &S,
    tol: &S,
) -> Result<S, ShiftingError> {
    let res = match declared {
        Some(e) => e.eval(t, &S::one()),
        None => seq.limit_in_n(t, tol),
    };
    res.map_err(|source| ShiftingError::Eval { which, t: t.approx_f64(), n: None, source })
}

/// Default `n` ladder `1, 2, 4, …, 2^20`.
pub fn dyadic_ladder(last_exp: u32) -> Vec<u64> {
    (0..=last_exp).map(|j| 1u64 << j).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleGrid<S> {
    t_max: S,
    step: S,
    n_ladder: Vec<u64>,
}

impl<S: Scalar> SampleGrid<S> {
    pub fn new(t_max: S, step: S, n_ladder: Vec<u64>) -> Result<Self, ShiftingError> {
        if step <= S::zero() {
            return Err(ShiftingError::InvalidGrid("step must be positive"));
        }
        if t_max < step {
            return Err(ShiftingError::InvalidGrid("tMax must be at least step"));
        }
        if n_ladder.is_empty() || n_ladder.contains(&0) {
            return Err(ShiftingError::InvalidGrid("n ladder must be nonempty and start at 1 or more"));
        }
        if n_ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ShiftingError::InvalidGrid("n ladder must be strictly increasing"));
        }
        Ok(SampleGrid { t_max, step, n_ladder })
    }

    pub fn n_ladder(&self) -> &[u64] {
        &self.n_ladder
    }

    pub fn step(&self) -> &S {
        &self.step
    }

    pub fn t_max(&self) -> &S {
        &self.t_max
    }

    /// `t_j = j·step` for `j = 0..=⌊t_max/step⌋`.
    pub fn points(&self) -> Vec<S> {
        let ratio = (self.t_max.clone() / self.step.clone()).approx_f64();
        let count = (ratio + 1e-9).floor() as u64;
        (0..=count).map(|j| S::cast_u64(j) * self.step.clone()).collect()
    }
}

impl Default for SampleGrid<f64> {
    fn default() -> Self {
        SampleGrid { t_max: 100.0, step: 0.1, n_ladder: dyadic_ladder(20) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CheckKind {
    UniformConvergence,
    MonotoneInN,
    ConditionI,
    ConditionII,
    EqualityOnlyAtZero,
    PhiNonnegative,
    ExampleBound,
}

/// A violating `(u, v, n)`; `n = None` refers to the limit functions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample<S> {
    pub u: S,
    pub v: S,
    pub n: Option<u64>,
}

/// Uniform distance from the limit at one ladder index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupError<S> {
    pub n: u64,
    pub psi: S,
    pub phi: S,
}

/// Result of the per-`n` reading of a condition at one ladder index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerNReading<S> {
    pub n: u64,
    pub counterexample: Option<Counterexample<S>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckReport<S> {
    pub check: CheckKind,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample<S>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sup_errors: Vec<SupError<S>>,
    /// Per-`n` reading of the hypothesis; informational, does not affect the verdict.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_n: Vec<PerNReading<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl<S> CheckReport<S> {
    pub fn new(check: CheckKind, verdict: Verdict) -> Self {
        CheckReport {
            check,
            verdict,
            counterexample: None,
            sup_errors: Vec::new(),
            per_n: Vec::new(),
            note: None,
        }
    }

    pub fn fail(check: CheckKind, cx: Counterexample<S>) -> Self {
        let mut r = Self::new(check, Verdict::Fail);
        r.counterexample = Some(cx);
        r
    }

    fn undecided(check: CheckKind, note: String) -> Self {
        let mut r = Self::new(check, Verdict::Undecided);
        r.note = Some(note);
        r
    }
}

/// Tolerance passed to the dyadic-ladder limit estimate.
pub const DEFAULT_LIMIT_TOL: f64 = 1e-9;

struct Tables<S> {
    points: Vec<S>,
    psi_n: Vec<Vec<S>>,
    phi_n: Vec<Vec<S>>,
}

fn sequence_tables<S: Scalar>(
    pair: &FunctionSequencePair,
    grid: &SampleGrid<S>,
) -> Result<Tables<S>, ShiftingError> {
    let points = grid.points();
    let mut psi_n = Vec::with_capacity(grid.n_ladder.len());
    let mut phi_n = Vec::with_capacity(grid.n_ladder.len());
    for &n in &grid.n_ladder {
        psi_n.push(points.iter().map(|t| pair.psi_n(t, n)).collect::<Result<Vec<_>, _>>()?);
        phi_n.push(points.iter().map(|t| pair.phi_n(t, n)).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(Tables { points, psi_n, phi_n })
}

/// Limit values on the grid, or the reason they are unavailable.
fn limit_tables<S: Scalar>(
    pair: &FunctionSequencePair,
    points: &[S],
) -> Result<(Vec<S>, Vec<S>), String> {
    let tol = S::cast_f64(DEFAULT_LIMIT_TOL);
    let psi = points.iter().map(|t| pair.psi(t, &tol)).collect::<Result<Vec<_>, _>>();
    let phi = points.iter().map(|t| pair.phi(t, &tol)).collect::<Result<Vec<_>, _>>();
    match (psi, phi) {
        (Ok(a), Ok(b)) => Ok((a, b)),
        (Err(e), _) | (_, Err(e)) => Err(format!("limit functions unavailable: {e}")),
    }
}

/// Uniform convergence along the ladder: both sup-distance sequences must be
/// nonincreasing and end below `tol`.
pub fn check_uniform_convergence<S: Scalar>(
    pair: &FunctionSequencePair,
    grid: &SampleGrid<S>,
    tol: &S,
) -> Result<CheckReport<S>, ShiftingError> {
    let kind = CheckKind::UniformConvergence;
    let tables = sequence_tables(pair, grid)?;
    let (psi, phi) = match limit_tables(pair, &tables.points) {
        Ok(v) => v,
        Err(note) => return Ok(CheckReport::undecided(kind, note)),
    };
    let tie = S::tie();
    let mut sup_errors = Vec::with_capacity(grid.n_ladder.len());
    let mut witness: Option<Counterexample<S>> = None;
    let mut prev: Option<(S, S)> = None;
    for (k, &n) in grid.n_ladder.iter().enumerate() {
        let (psi_sup, psi_at) = sup_distance(&tables.psi_n[k], &psi);
        let (phi_sup, phi_at) = sup_distance(&tables.phi_n[k], &phi);
        if witness.is_none() {
            if let Some((pp, pf)) = &prev {
                if psi_sup > pp.clone() + tie.clone() {
                    let t = tables.points[psi_at].clone();
                    witness = Some(Counterexample { u: t.clone(), v: t, n: Some(n) });
                } else if phi_sup > pf.clone() + tie.clone() {
                    let t = tables.points[phi_at].clone();
                    witness = Some(Counterexample { u: t.clone(), v: t, n: Some(n) });
                }
            }
        }
        prev = Some((psi_sup.clone(), phi_sup.clone()));
        sup_errors.push(SupError { n, psi: psi_sup, phi: phi_sup });
    }
    if witness.is_none() {
        let last = sup_errors.last().expect("nonempty ladder");
        if last.psi >= *tol || last.phi >= *tol {
            let k = grid.n_ladder.len() - 1;
            let at = if last.psi >= *tol {
                sup_distance(&tables.psi_n[k], &psi).1
            } else {
                sup_distance(&tables.phi_n[k], &phi).1
            };
            let t = tables.points[at].clone();
            witness = Some(Counterexample { u: t.clone(), v: t, n: Some(last.n) });
        }
    }
    let mut report = match witness {
        Some(cx) => CheckReport::fail(kind, cx),
        None => CheckReport::new(kind, Verdict::Pass),
    };
    report.sup_errors = sup_errors;
    Ok(report)
}

fn sup_distance<S: Scalar>(seq: &[S], limit: &[S]) -> (S, usize) {
    let mut best = (S::zero(), 0usize);
    for (j, (a, b)) in seq.iter().zip(limit).enumerate() {
        let d = (a.clone() - b.clone()).abs();
        if d > best.0 {
            best = (d, j);
        }
    }
    best
}

/// `ψ_n` nondecreasing and `φ_n` nonincreasing along consecutive ladder entries.
pub fn check_monotone_in_n<S: Scalar>(
    pair: &FunctionSequencePair,
    grid: &SampleGrid<S>,
) -> Result<CheckReport<S>, ShiftingError> {
    let kind = CheckKind::MonotoneInN;
    let tables = sequence_tables(pair, grid)?;
    let tie = S::tie();
    for k in 0..grid.n_ladder.len().saturating_sub(1) {
        for (j, t) in tables.points.iter().enumerate() {
            let psi_ok = tables.psi_n[k][j] <= tables.psi_n[k + 1][j].clone() + tie.clone();
            let phi_ok = tables.phi_n[k][j].clone() + tie.clone() >= tables.phi_n[k + 1][j];
            if !psi_ok || !phi_ok {
                return Ok(CheckReport::fail(
                    kind,
                    Counterexample { u: t.clone(), v: t.clone(), n: Some(grid.n_ladder[k]) },
                ));
            }
        }
    }
    Ok(CheckReport::new(kind, Verdict::Pass))
}

/// Condition (i): `ψ(u) ≤ φ(v) ⇒ u ≤ v` on all grid pairs.
pub fn check_condition_i<S: Scalar>(
    pair: &FunctionSequencePair,
    grid: &SampleGrid<S>,
) -> Result<CheckReport<S>, ShiftingError> {
    let kind = CheckKind::ConditionI;
    let tables = sequence_tables(pair, grid)?;
    let (psi, phi) = match limit_tables(pair, &tables.points) {
        Ok(v) => v,
        Err(note) => return Ok(CheckReport::undecided(kind, note)),
    };
    let pts = &tables.points;
    let tie = S::tie();
    let first_violation = |lhs: &[S], rhs: &[S]| -> Option<(usize, usize)> {
        for (a, u) in pts.iter().enumerate() {
            for (b, v) in pts.iter().enumerate() {
                if *u > v.clone() + tie.clone() && lhs[a] <= rhs[b].clone() + tie.clone() {
                    return Some((a, b));
                }
            }
        }
        None
    };
    let mut report = match first_violation(&psi, &phi) {
        Some((a, b)) => CheckReport::fail(
            kind,
            Counterexample { u: pts[a].clone(), v: pts[b].clone(), n: None },
        ),
        None => CheckReport::new(kind, Verdict::Pass),
    };
    report.per_n = grid
        .n_ladder
        .iter()
        .enumerate()
        .map(|(k, &n)| PerNReading {
            n,
            counterexample: first_violation(&tables.psi_n[k], &tables.phi_n[k]).map(|(a, b)| {
                Counterexample { u: pts[a].clone(), v: pts[b].clone(), n: Some(n) }
            }),
        })
        .collect();
    Ok(report)
}

/// Condition (ii) on constant sequences `u_k = v_k = w`: no `w > 0` may
/// satisfy `ψ(w) ≤ φ(w)`.
pub fn check_condition_ii<S: Scalar>(
    pair: &FunctionSequencePair,
    grid: &SampleGrid<S>,
) -> Result<CheckReport<S>, ShiftingError> {
    let kind = CheckKind::ConditionII;
    let tables = sequence_tables(pair, grid)?;
    let (psi, phi) = match limit_tables(pair, &tables.points) {
        Ok(v) => v,
        Err(note) => return Ok(CheckReport::undecided(kind, note)),
    };
    let pts = &tables.points;
    let tie = S::tie();
    let first_violation = |lhs: &[S], rhs: &[S]| -> Option<usize> {
        (0..pts.len()).find(|&j| pts[j] > tie && lhs[j] <= rhs[j].clone() + tie.clone())
    };
    let mut report = match first_violation(&psi, &phi) {
        Some(j) => CheckReport::fail(
            kind,
            Counterexample { u: pts[j].clone(), v: pts[j].clone(), n: None },
        ),
        None => CheckReport::new(kind, Verdict::Pass),
    };
    report.note = Some("constant-sequence witnesses only; PASS means no falsification found".into());
    report.per_n = grid
        .n_ladder
        .iter()
        .enumerate()
        .map(|(k, &n)| PerNReading {
            n,
            counterexample: first_violation(&tables.psi_n[k], &tables.phi_n[k]).map(|j| {
                Counterexample { u: pts[j].clone(), v: pts[j].clone(), n: Some(n) }
            }),
        })
        .collect();
    Ok(report)
}

/// `ψ(t) = φ(t)` exactly at `t = 0` and nowhere else on the grid.
pub fn check_equality_only_at_zero<S: Scalar>(
    pair: &FunctionSequencePair,
    grid: &SampleGrid<S>,
) -> Result<CheckReport<S>, ShiftingError> {
    let kind = CheckKind::EqualityOnlyAtZero;
    let pts = grid.points();
    let (psi, phi) = match limit_tables(pair, &pts) {
        Ok(v) => v,
        Err(note) => return Ok(CheckReport::undecided(kind, note)),
    };
    let tie = S::tie();
    for (j, t) in pts.iter().enumerate() {
        let gap = (psi[j].clone() - phi[j].clone()).abs();
        let at_zero = t.is_zero();
        if (at_zero && gap > tie) || (!at_zero && gap <= tie) {
            return Ok(CheckReport::fail(
                kind,
                Counterexample { u: t.clone(), v: t.clone(), n: None },
            ));
        }
    }
    Ok(CheckReport::new(kind, Verdict::Pass))
}

/// Runs the hypotheses of the main theorem: uniform convergence,
/// monotonicity, conditions (i) and (ii).
pub fn check_shifting_pair<S: Scalar>(
    pair: &FunctionSequencePair,
    grid: &SampleGrid<S>,
    convergence_tol: &S,
) -> Result<Vec<CheckReport<S>>, ShiftingError> {
    Ok(vec![
        check_uniform_convergence(pair, grid, convergence_tol)?,
        check_monotone_in_n(pair, grid)?,
        check_condition_i(pair, grid)?,
        check_condition_ii(pair, grid)?,
    ])
}

/// [`check_shifting_pair`] plus [`check_equality_only_at_zero`].
pub fn check_all<S: Scalar>(
    pair: &FunctionSequencePair,
    grid: &SampleGrid<S>,
    convergence_tol: &S,
) -> Result<Vec<CheckReport<S>>, ShiftingError> {
    let mut reports = check_shifting_pair(pair, grid, convergence_tol)?;
    reports.push(check_equality_only_at_zero(pair, grid)?);
    Ok(reports)
}

/// Overall verdict: any `Fail` wins, then any `Undecided`.
pub fn combine<S>(reports: &[CheckReport<S>]) -> Verdict {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if reports.iter().any(|r| r.verdict == Verdict::Undecided) {
        Verdict::Undecided
    } else {
        Verdict::Pass
    }
}

/// Re-evaluates a report's counterexample directly from the expressions.
/// Returns `true` when the recorded violation is confirmed; reports without
/// a counterexample return `false`.
pub fn recheck<S: Scalar>(
    report: &CheckReport<S>,
    pair: &FunctionSequencePair,
    grid: &SampleGrid<S>,
    convergence_tol: &S,
) -> Result<bool, ShiftingError> {
    let Some(cx) = &report.counterexample else {
        return Ok(false);
    };
    let tie = S::tie();
    let ltol = S::cast_f64(DEFAULT_LIMIT_TOL);
    let (u, v) = (&cx.u, &cx.v);
    Ok(match report.check {
        CheckKind::ConditionI => {
            u.clone() > v.clone() + tie.clone() && pair.psi(u, &ltol)? <= pair.phi(v, &ltol)? + tie
        }
        CheckKind::ConditionII => {
            *u > tie && pair.psi(u, &ltol)? <= pair.phi(u, &ltol)? + tie
        }
        CheckKind::EqualityOnlyAtZero => {
            let gap = (pair.psi(u, &ltol)? - pair.phi(u, &ltol)?).abs();
            if u.is_zero() {
                gap > tie
            } else {
                gap <= tie
            }
        }
        CheckKind::MonotoneInN => {
            let n = cx.n.expect("ladder index");
            let k = grid.n_ladder.iter().position(|&m| m == n).expect("n on ladder");
            let next = grid.n_ladder[k + 1];
            pair.psi_n(u, n)? > pair.psi_n(u, next)? + tie.clone()
                || pair.phi_n(u, n)? + tie < pair.phi_n(u, next)?
        }
        CheckKind::UniformConvergence => {
            let n = cx.n.expect("ladder index");
            let k = grid.n_ladder.iter().position(|&m| m == n).expect("n on ladder");
            let d_psi = (pair.psi_n(u, n)? - pair.psi(u, &ltol)?).abs();
            let d_phi = (pair.phi_n(u, n)? - pair.phi(u, &ltol)?).abs();
            let increased = k
                .checked_sub(1)
                .and_then(|p| report.sup_errors.get(p))
                .is_some_and(|prev| {
                    d_psi > prev.psi.clone() + tie.clone() || d_phi > prev.phi.clone() + tie.clone()
                });
            let last = k + 1 == grid.n_ladder.len();
            increased || (last && max_of(d_psi, d_phi) >= *convergence_tol)
        }
        CheckKind::ExampleBound => {
            let two = S::one() + S::one();
            let admissible = match cx.n {
                Some(n) => pair.psi_n(u, n)? <= pair.phi_n(v, n)?,
                None => pair.psi(u, &ltol)? <= pair.phi(v, &ltol)?,
            };
            let bound = cx.n.map_or_else(S::zero, example_bound::<S>);
            admissible && two * u.clone() - v.clone() > bound + tie
        }
        CheckKind::PhiNonnegative => {
            let phi = match cx.n {
                Some(n) => pair.phi_n(u, n)?,
                None => pair.phi(u, &ltol)?,
            };
            phi + tie < S::zero()
        }
    })
}

/// `(2n + 1) / (n(n + 1))`, the finite-`n` slack of the worked example's
/// contraction inequality `2u − v ≤ (2n+1)/(n(n+1))`.
pub fn example_bound<S: Scalar>(n: u64) -> S {
    let n = S::cast_u64(n);
    let two = S::one() + S::one();
    (two * n.clone() + S::one()) / (n.clone() * (n + S::one()))
}
