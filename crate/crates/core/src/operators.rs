//! Affine diagonal operators `x_i ↦ d_i x_i + e_i` on the null-sequence space.
//!
//! These map tail boxes to tail boxes exactly and commute with Minkowski
//! combinations, so `Conv(T A) = T A` for every box `A`.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::mnc::{
    subset_decision, Inclusion, MncError, SignDecision, TailBox, TailForm, TailPoint,
    DEFAULT_HORIZON,
};
use crate::scalar::{max_of, min_of, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("sign of the coefficient sequence is undecided within {horizon} coordinates")]
    SignUndecided { horizon: u64 },
    #[error("offset sequence must tend to 0 (asymptotic value {0})")]
    OffsetNotNull(f64),
    #[error("operator is not contractive: {0}")]
    NotContractive(String),
    #[error("self-map test undecided within the horizon")]
    InclusionUndecided,
    #[error(transparent)]
    Mnc(#[from] MncError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagonalAffineOperator<S> {
    d_head: Vec<S>,
    d_tail: TailForm<S>,
    e_head: Vec<S>,
    e_tail: TailForm<S>,
}

impl<S: Scalar> DiagonalAffineOperator<S> {
    pub fn new(
        d_head: Vec<S>,
        d_tail: TailForm<S>,
        e_head: Vec<S>,
        e_tail: TailForm<S>,
    ) -> Result<Self, OperatorError> {
        if !e_tail.asym().is_zero() {
            return Err(OperatorError::OffsetNotNull(e_tail.asym().approx_f64()));
        }
        Ok(DiagonalAffineOperator { d_head, d_tail, e_head, e_tail })
    }

    /// `x ↦ c·x`.
    pub fn scaling(c: S) -> Self {
        DiagonalAffineOperator {
            d_head: Vec::new(),
            d_tail: TailForm::constant(c),
            e_head: Vec::new(),
            e_tail: TailForm::zero(),
        }
    }

    pub fn identity() -> Self {
        Self::scaling(S::one())
    }

    pub fn d(&self, i: u64) -> S {
        coord(&self.d_head, &self.d_tail, i)
    }

    pub fn e(&self, i: u64) -> S {
        coord(&self.e_head, &self.e_tail, i)
    }

    pub fn d_tail(&self) -> &TailForm<S> {
        &self.d_tail
    }

    pub fn e_tail(&self) -> &TailForm<S> {
        &self.e_tail
    }

    fn head_len(&self) -> usize {
        self.d_head.len().max(self.e_head.len())
    }

    /// `self ∘ inner`, i.e. apply `inner` first.
    pub fn after(&self, inner: &Self) -> Self {
        let h = self.head_len().max(inner.head_len());
        let d_head = (1..=h as u64).map(|i| self.d(i) * inner.d(i)).collect();
        let e_head = (1..=h as u64).map(|i| self.d(i) * inner.e(i) + self.e(i)).collect();
        let d_tail = &self.d_tail * &inner.d_tail;
        let e_tail = &(&self.d_tail * &inner.e_tail) + &self.e_tail;
        DiagonalAffineOperator { d_head, d_tail, e_head, e_tail }
    }

    pub fn apply_point(&self, x: &TailPoint<S>) -> TailPoint<S> {
        let h = self.head_len().max(x.head().len());
        let head = (1..=h as u64).map(|i| self.d(i) * x.coordinate(i) + self.e(i)).collect();
        let tail = &(&self.d_tail * x.tail()) + &self.e_tail;
        TailPoint::new(head, tail).expect("affine image of a null sequence is null")
    }

    /// Exact image `T(A)`. Coordinates up to the index beyond which `d_i`
    /// keeps a constant sign are materialized into the head.
    pub fn apply_to_box(&self, a: &TailBox<S>) -> Result<TailBox<S>, OperatorError> {
        self.apply_to_box_with_horizon(a, DEFAULT_HORIZON)
    }

    pub fn apply_to_box_with_horizon(
        &self,
        a: &TailBox<S>,
        horizon: u64,
    ) -> Result<TailBox<S>, OperatorError> {
        let base = self.head_len().max(a.head_len()) as u64 + 1;
        let sign = self
            .d_tail
            .eventual_sign(base, horizon)
            .ok_or(OperatorError::SignUndecided { horizon })?;
        let h = (sign.from - 1) as usize;
        let (mut head_lo, mut head_hi) = (Vec::with_capacity(h), Vec::with_capacity(h));
        for i in 1..=h as u64 {
            let (lo, hi) = a.coordinate(i);
            let (d, e) = (self.d(i), self.e(i));
            let x = d.clone() * lo;
            let y = d * hi;
            head_lo.push(min_of(x.clone(), y.clone()) + e.clone());
            head_hi.push(max_of(x, y) + e);
        }
        let (lo_src, hi_src) = match sign.sign {
            Ordering::Less => (a.tail_hi(), a.tail_lo()),
            _ => (a.tail_lo(), a.tail_hi()),
        };
        let tail_lo = &(&self.d_tail * lo_src) + &self.e_tail;
        let tail_hi = &(&self.d_tail * hi_src) + &self.e_tail;
        Ok(TailBox::new(head_lo, head_hi, tail_lo, tail_hi)?)
    }

    /// Decides `sup_i |d_i| < 1`.
    pub fn is_contractive(&self, horizon: u64) -> Result<bool, OperatorError> {
        if self.d_head.iter().any(|d| d.abs() >= S::one()) {
            return Ok(false);
        }
        let start = self.d_head.len() as u64 + 1;
        match self.d_tail.decide_abs_below(&S::one(), start, horizon) {
            SignDecision::Holds => Ok(true),
            SignDecision::Violated { .. } => Ok(false),
            SignDecision::Undecided => Err(OperatorError::SignUndecided { horizon }),
        }
    }
}

fn coord<S: Scalar>(head: &[S], tail: &TailForm<S>, i: u64) -> S {
    let k = (i - 1) as usize;
    if k < head.len() {
        head[k].clone()
    } else {
        tail.eval(i)
    }
}

/// A single affine diagonal operator or a composition applied left to right.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec<S> {
    Single(DiagonalAffineOperator<S>),
    /// `ops[0]` is applied first.
    Compose(Vec<DiagonalAffineOperator<S>>),
}

impl<S: Scalar> OperatorSpec<S> {
    /// The materialized affine diagonal form.
    pub fn materialize(&self) -> DiagonalAffineOperator<S> {
        match self {
            OperatorSpec::Single(op) => op.clone(),
            OperatorSpec::Compose(ops) => ops
                .iter()
                .fold(DiagonalAffineOperator::identity(), |acc, op| op.after(&acc)),
        }
    }
}

impl<S: Scalar> From<DiagonalAffineOperator<S>> for OperatorSpec<S> {
    fn from(op: DiagonalAffineOperator<S>) -> Self {
        OperatorSpec::Single(op)
    }
}

pub fn apply_to_box<S: Scalar>(
    t: &OperatorSpec<S>,
    a: &TailBox<S>,
) -> Result<TailBox<S>, OperatorError> {
    t.materialize().apply_to_box(a)
}

/// `T(E) ⊆ E`.
pub fn verify_self_map<S: Scalar>(
    t: &OperatorSpec<S>,
    e: &TailBox<S>,
) -> Result<bool, OperatorError> {
    let image = apply_to_box(t, e)?;
    match subset_decision(&image, e, DEFAULT_HORIZON) {
        Inclusion::Included => Ok(true),
        Inclusion::Excluded { .. } => Ok(false),
        Inclusion::Undecided => Err(OperatorError::InclusionUndecided),
    }
}

/// Fixed point `x_i = e_i / (1 − d_i)` of a contractive operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FixedPointWitness<S> {
    pub head: Vec<S>,
    /// Closed-form tail when `d` has a constant tail; otherwise the head
    /// covers every coordinate up to `horizon` and the tail is absent.
    pub tail: Option<TailForm<S>>,
    pub horizon: u64,
    /// `max_{i ≤ horizon} |T(x)_i − x_i|`.
    pub residual: S,
}

/// Number of coordinates checked for the witness residual.
pub const WITNESS_HORIZON: u64 = 1_000;

pub fn fixed_point_witness<S: Scalar>(
    t: &DiagonalAffineOperator<S>,
    horizon: u64,
) -> Result<FixedPointWitness<S>, OperatorError> {
    if !t.is_contractive(DEFAULT_HORIZON)? {
        return Err(OperatorError::NotContractive("sup |d_i| ≥ 1".into()));
    }
    let solve = |i: u64| t.e(i) / (S::one() - t.d(i));
    let (head, tail) = if t.d_tail.is_constant() {
        let h = t.head_len() as u64;
        let c = t.d_tail.asym().clone();
        let tail = t.e_tail.scale(&(S::one() / (S::one() - c)));
        ((1..=h).map(solve).collect::<Vec<_>>(), Some(tail))
    } else {
        ((1..=horizon).map(solve).collect::<Vec<_>>(), None)
    };
    let x = |i: u64| -> S {
        let k = (i - 1) as usize;
        match (&tail, head.get(k)) {
            (_, Some(v)) => v.clone(),
            (Some(f), None) => f.eval(i),
            (None, None) => unreachable!("head covers the horizon"),
        }
    };
    let residual = (1..=horizon)
        .map(|i| (t.d(i) * x(i) + t.e(i) - x(i)).abs())
        .fold(S::zero(), max_of);
    Ok(FixedPointWitness { head, tail, horizon, residual })
}
