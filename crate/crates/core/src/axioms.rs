//! Randomized checks of the measure-of-noncompactness axioms M1–M6 for the
//! Hausdorff measure on tail boxes, plus agreement with the truncation
//! oracle.
//!
//! Random boxes are built as a center point (tail tending to 0) plus
//! nonnegative radius forms, so every generated box is valid by
//! construction. Coefficients are multiples of 1/16 and ratios multiples of
//! 1/100, which keeps exact-rational runs cheap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mnc::{
    convex_combination, hausdorff_mnc, mnc_of_conv_descriptor, mnc_union, subset,
    truncation_tail_sup, GeomTerm, MncError, SetUnion, TailBox, TailForm,
};
use crate::scalar::Scalar;
use crate::shifting::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AxiomGroup {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
}

/// Instance counts per group. M6 runs `m6_chains` chains of depth `m6_depth`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct AxiomCounts {
    pub m1: u64,
    pub m2: u64,
    pub m3: u64,
    pub m4: u64,
    pub m5: u64,
    pub m6_chains: u64,
    pub m6_depth: u64,
}

impl Default for AxiomCounts {
    fn default() -> Self {
        AxiomCounts { m1: 500, m2: 1000, m3: 1000, m4: 1000, m5: 1000, m6_chains: 20, m6_depth: 50 }
    }
}

impl AxiomCounts {
    pub fn zero() -> Self {
        AxiomCounts { m1: 0, m2: 0, m3: 0, m4: 0, m5: 0, m6_chains: 0, m6_depth: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AxiomResult {
    pub group: AxiomGroup,
    pub instances: u64,
    pub violations: u64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<String>,
}

struct Tally {
    group: AxiomGroup,
    instances: u64,
    violations: u64,
    first: Option<String>,
}

impl Tally {
    fn new(group: AxiomGroup) -> Self {
        Tally { group, instances: 0, violations: 0, first: None }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some(describe());
            }
        }
    }

    fn finish(self) -> AxiomResult {
        AxiomResult {
            group: self.group,
            instances: self.instances,
            violations: self.violations,
            verdict: if self.violations == 0 { Verdict::Pass } else { Verdict::Fail },
            first_violation: self.first,
        }
    }
}

/// Shape limits for random boxes.
#[derive(Debug, Clone, Copy)]
pub struct BoxShape {
    pub max_head: usize,
    pub max_terms: usize,
    /// Largest ratio, as a multiple of 1/100.
    pub max_rho_pct: u32,
    pub max_coeff: f64,
}

impl Default for BoxShape {
    fn default() -> Self {
        BoxShape { max_head: 3, max_terms: 3, max_rho_pct: 99, max_coeff: 10.0 }
    }
}

/// Seeded generator of valid tail boxes.
pub struct BoxSampler {
    rng: ChaCha8Rng,
    shape: BoxShape,
}

impl BoxSampler {
    pub fn new(seed: u64, shape: BoxShape) -> Self {
        BoxSampler { rng: ChaCha8Rng::seed_from_u64(seed), shape }
    }

    fn coeff<S: Scalar>(&mut self, lo: f64, hi: f64) -> S {
        let k = self.rng.gen_range((lo * 16.0) as i64..=(hi * 16.0) as i64);
        S::cast_f64(k as f64) / S::cast_u64(16)
    }

    fn rho<S: Scalar>(&mut self) -> S {
        let k = self.rng.gen_range(1..=self.shape.max_rho_pct);
        S::cast_u64(k as u64) / S::cast_u64(100)
    }

    /// Fraction in `[0, 1]`, a multiple of 1/16.
    pub fn weight<S: Scalar>(&mut self) -> S {
        self.coeff(0.0, 1.0)
    }

    fn form<S: Scalar>(&mut self, nonneg: bool, beta: S) -> TailForm<S> {
        let c = self.shape.max_coeff;
        let n = self.rng.gen_range(0..=self.shape.max_terms);
        let terms = (0..n)
            .map(|_| GeomTerm {
                alpha: if nonneg { self.coeff(0.0, c) } else { self.coeff(-c, c) },
                rho: self.rho(),
            })
            .collect();
        TailForm::new(terms, beta).expect("ratios below 1")
    }

    /// A box with vanishing tails when `compact`, otherwise with random
    /// asymptotic radii.
    pub fn tail_box<S: Scalar>(&mut self, compact: bool) -> TailBox<S> {
        let c = self.shape.max_coeff;
        let h = self.rng.gen_range(0..=self.shape.max_head);
        let (mut head_lo, mut head_hi) = (Vec::with_capacity(h), Vec::with_capacity(h));
        for _ in 0..h {
            let mid: S = self.coeff(-c, c);
            let (a, b): (S, S) = (self.coeff(0.0, c), self.coeff(0.0, c));
            head_lo.push(mid.clone() - a);
            head_hi.push(mid + b);
        }
        let center = self.form(false, S::zero());
        let (blo, bhi) = if compact {
            (S::zero(), S::zero())
        } else {
            (self.coeff(0.0, c), self.coeff(0.0, c))
        };
        let r_lo = self.form(true, blo);
        let r_hi = self.form(true, bhi);
        TailBox::new(head_lo, head_hi, &center - &r_lo, &center + &r_hi)
            .expect("center plus nonnegative radii is a valid box")
    }

    /// `a` enlarged by nonnegative forms on both sides, so `a ⊆ result`.
    pub fn superset<S: Scalar>(&mut self, a: &TailBox<S>) -> TailBox<S> {
        let c = self.shape.max_coeff;
        let head_lo = a.head_lo().iter().map(|x| x.clone() - self.coeff(0.0, c)).collect();
        let head_hi = a.head_hi().iter().map(|x| x.clone() + self.coeff(0.0, c)).collect();
        let (b_lo, b_hi) = (self.coeff(0.0, c), self.coeff(0.0, c));
        let grow_lo = self.form(true, b_lo);
        let grow_hi = self.form(true, b_hi);
        TailBox::new(head_lo, head_hi, a.tail_lo() - &grow_lo, a.tail_hi() + &grow_hi)
            .expect("enlarging a valid box keeps it valid")
    }
}

/// Runs M1–M6 with independent streams per group derived from `seed`.
pub fn run_axiom_suite<S: Scalar>(counts: &AxiomCounts, seed: u64) -> Vec<AxiomResult> {
    let shape = BoxShape::default();
    let stream = |g: u64| BoxSampler::new(seed.wrapping_add(g), shape);
    vec![
        check_m1::<S>(&mut stream(1), counts.m1),
        check_m2::<S>(&mut stream(2), counts.m2),
        check_m3::<S>(&mut stream(3), counts.m3),
        check_m4::<S>(&mut stream(4), counts.m4),
        check_m5::<S>(&mut stream(5), counts.m5),
        check_m6::<S>(&mut stream(6), counts.m6_chains, counts.m6_depth),
    ]
}

/// Vanishing tails give `μ = 0`, and the box is flagged relatively compact.
fn check_m1<S: Scalar>(rng: &mut BoxSampler, count: u64) -> AxiomResult {
    let mut t = Tally::new(AxiomGroup::M1);
    for _ in 0..count {
        let a = rng.tail_box::<S>(true);
        let mu = hausdorff_mnc(&a);
        t.record(mu.is_zero() && a.is_relatively_compact(), || format!("mu = {}", mu.value()));
    }
    t.finish()
}

/// `A ⊆ B ⇒ μ(A) ≤ μ(B)`; the inclusion itself must also be recognized.
fn check_m2<S: Scalar>(rng: &mut BoxSampler, count: u64) -> AxiomResult {
    let mut t = Tally::new(AxiomGroup::M2);
    for _ in 0..count {
        let compact = rng.rng.gen_bool(0.2);
        let a = rng.tail_box::<S>(compact);
        let b = rng.superset(&a);
        let (ma, mb) = (hausdorff_mnc(&a).into_inner(), hausdorff_mnc(&b).into_inner());
        let ok = subset(&a, &b) && ma <= mb;
        t.record(ok, || format!("subset undecided or mu(A) = {ma} > mu(B) = {mb}"));
    }
    t.finish()
}

/// `μ(closure A) = μ(A)`.
fn check_m3<S: Scalar>(rng: &mut BoxSampler, count: u64) -> AxiomResult {
    let mut t = Tally::new(AxiomGroup::M3);
    for _ in 0..count {
        let a = rng.tail_box::<S>(false);
        let c = a.closure();
        t.record(c == a && hausdorff_mnc(&c) == hausdorff_mnc(&a), || "closure changed mu".into());
    }
    t.finish()
}

/// `μ(conv U) = μ(U)` for finite unions.
fn check_m4<S: Scalar>(rng: &mut BoxSampler, count: u64) -> AxiomResult {
    let mut t = Tally::new(AxiomGroup::M4);
    for _ in 0..count {
        let k = rng.rng.gen_range(1..=4);
        let boxes = (0..k).map(|_| rng.tail_box::<S>(false)).collect();
        let u = SetUnion::new(boxes).expect("nonempty");
        let (mu, mc) = (mnc_union(&u), mnc_of_conv_descriptor(&u));
        t.record(mu == mc, || format!("union {} vs hull {}", mu.value(), mc.value()));
    }
    t.finish()
}

/// `μ(λA + (1−λ)B) ≤ λμ(A) + (1−λ)μ(B)`.
fn check_m5<S: Scalar>(rng: &mut BoxSampler, count: u64) -> AxiomResult {
    let mut t = Tally::new(AxiomGroup::M5);
    for _ in 0..count {
        let lambda: S = rng.weight();
        let (a, b) = (rng.tail_box::<S>(false), rng.tail_box::<S>(false));
        let lhs = convex_combination(&lambda, &a, &b).map(|c| hausdorff_mnc(&c).into_inner());
        let rhs = lambda.clone() * hausdorff_mnc(&a).into_inner()
            + (S::one() - lambda) * hausdorff_mnc(&b).into_inner();
        match lhs {
            Ok(lhs) => t.record(lhs <= rhs.clone() + S::tie(), || format!("{lhs} > {rhs}")),
            Err(e) => t.record(false, || e.to_string()),
        }
    }
    t.finish()
}

/// Nested chains `A_{k+1} = λA_k + (1−λ){x_k}` with `x_k ∈ A_k` have
/// `μ(A_k) → 0`; a point of the deepest box must lie in every `A_k`.
fn check_m6<S: Scalar>(rng: &mut BoxSampler, chains: u64, depth: u64) -> AxiomResult {
    let mut t = Tally::new(AxiomGroup::M6);
    for _ in 0..chains {
        let lambda = S::cast_u64(rng.rng.gen_range(4..=14)) / S::cast_u64(16);
        match nested_chain(rng.tail_box::<S>(false), &lambda, depth) {
            Ok(chain) => {
                let x = chain.last().expect("nonempty chain").member_point();
                let nested = chain.windows(2).all(|w| subset(&w[1], &w[0]));
                let first = hausdorff_mnc(&chain[0]).into_inner();
                let last = hausdorff_mnc(chain.last().unwrap()).into_inner();
                let decayed = last <= first.clone() * crate::scalar::powu(&lambda, depth) + S::tie();
                let inside = chain.iter().position(|a| !a.contains(&x));
                t.record(nested && decayed && inside.is_none(), || {
                    format!("nested {nested}, decayed {decayed}, escapes at {inside:?}")
                });
            }
            Err(e) => t.record(false, || e.to_string()),
        }
    }
    t.finish()
}

fn nested_chain<S: Scalar>(a0: TailBox<S>, lambda: &S, depth: u64) -> Result<Vec<TailBox<S>>, MncError> {
    let mut chain = vec![a0];
    for _ in 0..depth {
        let a = chain.last().unwrap();
        let next = convex_combination(lambda, a, &a.member_point().as_box())?;
        chain.push(next);
    }
    Ok(chain)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleAgreement {
    pub boxes: u64,
    pub truncation: u64,
    pub tolerance: f64,
    pub max_abs_diff: f64,
    pub violations: u64,
    pub verdict: Verdict,
}

/// `|truncation_tail_sup(A, N) − μ(A)| ≤ tol` over random boxes.
pub fn oracle_agreement(count: u64, truncation: u64, tol: f64, seed: u64) -> OracleAgreement {
    let mut rng = BoxSampler::new(seed, BoxShape::default());
    let mut max_abs_diff = 0.0f64;
    let mut violations = 0;
    for _ in 0..count {
        let compact = rng.rng.gen_bool(0.2);
        let a = rng.tail_box::<f64>(compact);
        let oracle = truncation_tail_sup(&a, truncation).expect("truncation beyond the head");
        let diff = (oracle - hausdorff_mnc(&a).into_inner()).abs();
        max_abs_diff = max_abs_diff.max(diff);
        if diff > tol {
            violations += 1;
        }
    }
    OracleAgreement {
        boxes: count,
        truncation,
        tolerance: tol,
        max_abs_diff,
        violations,
        verdict: if violations == 0 { Verdict::Pass } else { Verdict::Fail },
    }
}
