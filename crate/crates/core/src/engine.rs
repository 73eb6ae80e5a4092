//! The nested iteration `A_{k+1} = Conv(T A_k)` behind the generalized
//! Darbo theorem, with every hypothesis re-checked at each step.
//!
//! For affine diagonal `T` and a box `A_k`, `T A_k` is already a closed
//! convex box, so the hull step is the identity and `μ(Conv(T A_k)) =
//! μ(T A_k)` holds by construction (it is still asserted every step).
//!
//! A run ends `Certified` once `μ(A_k) < tol`, `Refuted` on the first step
//! where nesting or the contraction inequality fails, and `Inconclusive`
//! after `max_iter` steps.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{BinOp, Expr};
use crate::mnc::{hausdorff_mnc, subset_decision, Inclusion, MncError, TailBox, DEFAULT_HORIZON};
use crate::operators::{
    fixed_point_witness, verify_self_map, FixedPointWitness, OperatorError, OperatorSpec,
    WITNESS_HORIZON,
};
use crate::scalar::{max_of, min_of, Scalar};
use crate::shifting::{
    check_equality_only_at_zero, check_shifting_pair, example_bound, CheckKind, CheckReport,
    Counterexample, FunctionSequencePair, SampleGrid, ShiftingError, Verdict, DEFAULT_LIMIT_TOL,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Shifting(#[from] ShiftingError),
    #[error(transparent)]
    Mnc(#[from] MncError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Certified,
    Refuted,
    Inconclusive,
}

/// Form of the per-step contraction inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Hypothesis {
    /// `ψ_n(μ(TA)) ≤ φ_n(μ(A))`.
    Shifting,
    /// `ψ_n(μ(TA)) ≤ ψ_n(μ(A)) − φ_n(μ(A))`.
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum StepCheck {
    Nesting,
    ConvRewrite,
    PerN,
    Limit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Margin<S> {
    /// Ladder index, or `None` for the limit functions.
    pub n: Option<u64>,
    pub lhs: S,
    pub rhs: S,
    /// `rhs − lhs`; negative beyond the tie slack means violated.
    pub margin: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IterationState<S> {
    pub k: u64,
    /// `A_k`.
    pub set: TailBox<S>,
    pub mu: S,
    /// `μ(T A_k)`; absent on the terminal state.
    pub mu_image: Option<S>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub margins: Vec<Margin<S>>,
    pub p_estimate: S,
}

/// A violated step assertion, re-checkable from the trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Refutation<S> {
    pub k: u64,
    pub check: StepCheck,
    pub n: Option<u64>,
    pub lhs: S,
    pub rhs: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate<S> {
    pub outcome: Outcome,
    pub hypothesis: Hypothesis,
    pub steps: u64,
    pub trace: Vec<IterationState<S>>,
    pub witness: Option<FixedPointWitness<S>>,
    /// First violation of the refuting step, in check order.
    pub refutation: Option<Refutation<S>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Refutation<S>>,
    /// Ratio `μ_k / μ_{k−1}` over the last step, when defined.
    pub decay_ratio: Option<S>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pair_checks: Vec<CheckReport<S>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl<S: Scalar> Certificate<S> {
    pub fn mu_trace(&self) -> Vec<S> {
        self.trace.iter().map(|s| s.mu.clone()).collect()
    }

    pub fn final_mu(&self) -> &S {
        &self.trace.last().expect("nonempty trace").mu
    }
}

/// Default per-step ladder `1, 10, …, 10^6`.
pub fn decimal_ladder() -> Vec<u64> {
    (0..=6).map(|j| 10u64.pow(j)).collect()
}

#[derive(Debug, Clone)]
pub struct EngineConfig<S> {
    pub tol: S,
    pub max_iter: u64,
    pub n_ladder: Vec<u64>,
    /// Grid for the pair preconditions.
    pub grid: SampleGrid<S>,
    pub convergence_tol: S,
    /// When `false`, failed pair checks become warnings instead of errors.
    pub enforce_pair_checks: bool,
    pub witness_horizon: u64,
    /// Index horizon for exact sign and inclusion decisions.
    pub horizon: u64,
}

impl EngineConfig<f64> {
    pub fn with_grid(grid: SampleGrid<f64>) -> Self {
        EngineConfig {
            tol: 1e-9,
            max_iter: 10_000,
            n_ladder: decimal_ladder(),
            grid,
            convergence_tol: 1e-5,
            enforce_pair_checks: true,
            witness_horizon: WITNESS_HORIZON,
            horizon: DEFAULT_HORIZON,
        }
    }
}

impl Default for EngineConfig<f64> {
    fn default() -> Self {
        Self::with_grid(SampleGrid::default())
    }
}

/// Runs the iteration under the main hypothesis `ψ_n(μ(TA)) ≤ φ_n(μ(A))`.
pub fn darbo_iterate<S: Scalar>(
    t: &OperatorSpec<S>,
    e: &TailBox<S>,
    pair: &FunctionSequencePair,
    cfg: &EngineConfig<S>,
) -> Result<Certificate<S>, EngineError> {
    check_self_map(t, e)?;
    let reports = check_shifting_pair(pair, &cfg.grid, &cfg.convergence_tol)?;
    let warnings = gate(&reports, cfg.enforce_pair_checks)?;
    let mut cert = iterate(t, e, pair, Hypothesis::Shifting, cfg)?;
    cert.pair_checks = reports;
    cert.warnings = warnings;
    Ok(cert)
}

/// Classic Darbo condition `μ(TA) ≤ k·μ(A)`, run as `ψ_n = t`, `φ_n = k·t`.
pub fn classic_darbo_run<S: Scalar>(
    t: &OperatorSpec<S>,
    e: &TailBox<S>,
    k: &S,
    cfg: &EngineConfig<S>,
) -> Result<Certificate<S>, EngineError> {
    if *k < S::zero() || *k >= S::one() {
        return Err(EngineError::Precondition(format!(
            "contraction constant {} is outside [0, 1)",
            k.approx_f64()
        )));
    }
    darbo_iterate(t, e, &classic_pair(k), cfg)
}

/// The pair `(t, k·t)`; the constant is carried as an exact rational.
pub fn classic_pair<S: Scalar>(k: &S) -> FunctionSequencePair {
    let k_expr = Expr::constant(k.to_rational());
    let phi = Expr::binary(BinOp::Mul, k_expr, Expr::T);
    FunctionSequencePair::new(Expr::T, phi.clone()).with_limits(Expr::T, phi)
}

/// Weak-contraction form `ψ_n(μ(TA)) ≤ ψ_n(μ(A)) − φ_n(μ(A))`.
pub fn weak_contraction_run<S: Scalar>(
    t: &OperatorSpec<S>,
    e: &TailBox<S>,
    pair: &FunctionSequencePair,
    cfg: &EngineConfig<S>,
) -> Result<Certificate<S>, EngineError> {
    check_self_map(t, e)?;
    let mut reports = vec![check_equality_only_at_zero(&weak_rearranged(pair), &cfg.grid)?];
    reports.push(check_phi_nonneg(pair, &cfg.grid)?);
    let warnings = gate(&reports, cfg.enforce_pair_checks)?;
    let mut cert = iterate(t, e, pair, Hypothesis::Weak, cfg)?;
    cert.pair_checks = reports;
    cert.warnings = warnings;
    Ok(cert)
}

/// Runs the iteration with the given hypothesis and no pair preconditions
/// beyond `T(E) ⊆ E`.
pub fn iterate<S: Scalar>(
    t: &OperatorSpec<S>,
    e: &TailBox<S>,
    pair: &FunctionSequencePair,
    hypothesis: Hypothesis,
    cfg: &EngineConfig<S>,
) -> Result<Certificate<S>, EngineError> {
    let op = t.materialize();
    let tie = S::tie();
    let ltol = S::cast_f64(DEFAULT_LIMIT_TOL);
    let mut a = e.clone();
    let mut trace: Vec<IterationState<S>> = Vec::new();
    let mut history: Vec<S> = Vec::new();
    let mut k = 0u64;
    let (outcome, violations) = loop {
        let mu = hausdorff_mnc(&a).into_inner();
        history.push(mu.clone());
        let p_estimate = aitken(&history);
        if mu < cfg.tol || k == cfg.max_iter {
            trace.push(IterationState { k, set: a.clone(), mu: mu.clone(), mu_image: None, margins: Vec::new(), p_estimate });
            let outcome = if mu < cfg.tol { Outcome::Certified } else { Outcome::Inconclusive };
            break (outcome, Vec::new());
        }
        let image = op.apply_to_box_with_horizon(&a, cfg.horizon)?;
        let next = image.clone();
        let mu_image = hausdorff_mnc(&image).into_inner();
        let mut violations = Vec::new();
        let mu_next = hausdorff_mnc(&next).into_inner();
        if mu_next != mu_image {
            violations.push(Refutation { k, check: StepCheck::ConvRewrite, n: None, lhs: mu_next.clone(), rhs: mu_image.clone() });
        }
        if subset_decision(&next, &a, cfg.horizon) != Inclusion::Included {
            violations.push(Refutation { k, check: StepCheck::Nesting, n: None, lhs: mu_next, rhs: mu.clone() });
        }
        let mut margins = Vec::with_capacity(cfg.n_ladder.len() + 1);
        for &n in &cfg.n_ladder {
            let lhs = pair.psi_n(&mu_image, n)?;
            let rhs = match hypothesis {
                Hypothesis::Shifting => pair.phi_n(&mu, n)?,
                Hypothesis::Weak => pair.psi_n(&mu, n)? - pair.phi_n(&mu, n)?,
            };
            if lhs > rhs.clone() + tie.clone() {
                violations.push(Refutation { k, check: StepCheck::PerN, n: Some(n), lhs: lhs.clone(), rhs: rhs.clone() });
            }
            margins.push(Margin { n: Some(n), margin: rhs.clone() - lhs.clone(), lhs, rhs });
        }
        let lhs = pair.psi(&mu_image, &ltol)?;
        let rhs = match hypothesis {
            Hypothesis::Shifting => pair.phi(&mu, &ltol)?,
            Hypothesis::Weak => pair.psi(&mu, &ltol)? - pair.phi(&mu, &ltol)?,
        };
        if lhs > rhs.clone() + tie.clone() {
            violations.push(Refutation { k, check: StepCheck::Limit, n: None, lhs: lhs.clone(), rhs: rhs.clone() });
        }
        margins.push(Margin { n: None, margin: rhs.clone() - lhs.clone(), lhs, rhs });
        trace.push(IterationState { k, set: a.clone(), mu, mu_image: Some(mu_image), margins, p_estimate });
        if !violations.is_empty() {
            break (Outcome::Refuted, violations);
        }
        a = next;
        k += 1;
    };
    let decay_ratio = match history.as_slice() {
        [.., prev, last] if !prev.is_zero() => Some(last.clone() / prev.clone()),
        _ => None,
    };
    let witness = if outcome == Outcome::Certified && op.is_contractive(cfg.horizon).unwrap_or(false) {
        Some(fixed_point_witness(&op, cfg.witness_horizon)?)
    } else {
        None
    };
    Ok(Certificate {
        outcome,
        hypothesis,
        steps: k,
        trace,
        witness,
        refutation: violations.first().cloned(),
        violations,
        decay_ratio,
        pair_checks: Vec::new(),
        warnings: Vec::new(),
    })
}

/// Aitken Δ² extrapolation of the μ sequence, clamped to `[0, μ_k]`.
fn aitken<S: Scalar>(history: &[S]) -> S {
    let last = history.last().expect("nonempty").clone();
    if let [.., x0, x1, x2] = history {
        let d1 = x1.clone() - x0.clone();
        let d2 = x2.clone() - x1.clone();
        let denom = d2.clone() - d1;
        if !denom.is_zero() {
            let p = x2.clone() - d2.clone() * d2 / denom;
            return max_of(S::zero(), min_of(p, last));
        }
    }
    last
}

fn check_self_map<S: Scalar>(t: &OperatorSpec<S>, e: &TailBox<S>) -> Result<(), EngineError> {
    if verify_self_map(t, e)? {
        Ok(())
    } else {
        Err(EngineError::Precondition("operator does not map E into itself".into()))
    }
}

fn gate<S>(reports: &[CheckReport<S>], enforce: bool) -> Result<Vec<String>, EngineError> {
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| r.verdict != Verdict::Pass)
        .map(|r| format!("pair check {:?} returned {:?}", r.check, r.verdict))
        .collect();
    if enforce && !failed.is_empty() {
        return Err(EngineError::Precondition(failed.join("; ")));
    }
    Ok(failed)
}

/// `φ_n(t) ≥ 0` on the grid and ladder, and `φ(t) ≥ 0`.
fn check_phi_nonneg<S: Scalar>(
    pair: &FunctionSequencePair,
    grid: &SampleGrid<S>,
) -> Result<CheckReport<S>, EngineError> {
    let kind = CheckKind::PhiNonnegative;
    let ltol = S::cast_f64(DEFAULT_LIMIT_TOL);
    let tie = S::tie();
    for t in grid.points() {
        for &n in grid.n_ladder() {
            if pair.phi_n(&t, n)? + tie.clone() < S::zero() {
                return Ok(CheckReport::fail(kind, Counterexample { u: t.clone(), v: t, n: Some(n) }));
            }
        }
        if pair.phi(&t, &ltol)? + tie.clone() < S::zero() {
            return Ok(CheckReport::fail(kind, Counterexample { u: t.clone(), v: t, n: None }));
        }
    }
    Ok(CheckReport::new(kind, Verdict::Pass))
}

/// `(ψ_n, ψ_n − φ_n)`: the weak inequality read as a main-form pair.
pub fn weak_rearranged(pair: &FunctionSequencePair) -> FunctionSequencePair {
    let diff = |a: &Expr, b: &Expr| Expr::binary(BinOp::Sub, a.clone(), b.clone());
    FunctionSequencePair {
        psi_seq: pair.psi_seq.clone(),
        phi_seq: diff(&pair.psi_seq, &pair.phi_seq),
        psi_limit: pair.psi_limit.clone(),
        phi_limit: match (&pair.psi_limit, &pair.phi_limit) {
            (Some(p), Some(f)) => Some(diff(p, f)),
            _ => None,
        },
    }
}

/// One row of the worked-example bound table.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundRow<S> {
    pub n: u64,
    pub bound: S,
    /// `max(2u − v)` over admissible grid pairs.
    pub max_excess: Option<S>,
    pub admissible_pairs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExampleBoundReport<S> {
    pub report: CheckReport<S>,
    pub table: Vec<BoundRow<S>>,
    /// `max(2u − v)` over grid pairs admissible for the limit functions.
    pub limit_max_excess: Option<S>,
}

/// For each `n`, every grid pair with `ψ_n(u) ≤ φ_n(v)` must satisfy
/// `2u − v ≤ (2n+1)/(n(n+1))`; in the limit, `ψ(u) ≤ φ(v)` must force
/// `2u − v ≤ 0`, i.e. `u ≤ v/2`.
pub fn check_example_bound<S: Scalar>(
    pair: &FunctionSequencePair,
    grid: &SampleGrid<S>,
    n_list: &[u64],
) -> Result<ExampleBoundReport<S>, EngineError> {
    let pts = grid.points();
    let tie = S::tie();
    let two = S::one() + S::one();
    let ltol = S::cast_f64(DEFAULT_LIMIT_TOL);
    let mut table = Vec::with_capacity(n_list.len());
    let mut witness: Option<Counterexample<S>> = None;

    let mut scan = |lhs: &[S], rhs: &[S], bound: &S, n: Option<u64>| -> (Option<S>, u64) {
        let mut max_excess: Option<S> = None;
        let mut count = 0u64;
        for (a, u) in pts.iter().enumerate() {
            for (b, v) in pts.iter().enumerate() {
                if lhs[a] <= rhs[b] {
                    count += 1;
                    let excess = two.clone() * u.clone() - v.clone();
                    if witness.is_none() && excess > bound.clone() + tie.clone() {
                        witness = Some(Counterexample { u: u.clone(), v: v.clone(), n });
                    }
                    max_excess = Some(match max_excess {
                        Some(m) => max_of(m, excess),
                        None => excess,
                    });
                }
            }
        }
        (max_excess, count)
    };

    for &n in n_list {
        let psi: Vec<S> = pts.iter().map(|t| pair.psi_n(t, n)).collect::<Result<_, _>>()?;
        let phi: Vec<S> = pts.iter().map(|t| pair.phi_n(t, n)).collect::<Result<_, _>>()?;
        let bound = example_bound::<S>(n);
        let (max_excess, admissible_pairs) = scan(&psi, &phi, &bound, Some(n));
        table.push(BoundRow { n, bound, max_excess, admissible_pairs });
    }
    let psi: Vec<S> = pts.iter().map(|t| pair.psi(t, &ltol)).collect::<Result<_, _>>()?;
    let phi: Vec<S> = pts.iter().map(|t| pair.phi(t, &ltol)).collect::<Result<_, _>>()?;
    let (limit_max_excess, _) = scan(&psi, &phi, &S::zero(), None);

    let decreasing = table.windows(2).all(|w| w[1].bound < w[0].bound || w[1].n <= w[0].n);
    let mut report = CheckReport::new(CheckKind::ExampleBound, Verdict::Pass);
    if let Some(cx) = witness {
        report = CheckReport::fail(CheckKind::ExampleBound, cx);
    } else if !decreasing {
        report.verdict = Verdict::Fail;
        report.note = Some("bound does not decrease along the n list".into());
    }
    Ok(ExampleBoundReport { report, table, limit_max_excess })
}
