//! Hausdorff measure of noncompactness on tail boxes in the null-sequence
//! space `c_0` with the sup norm.
//!
//! For a box `A` the Hausdorff measure equals `lim_N sup_{i>N} max(|lo_i|, |hi_i|)`,
//! which for tail-form envelopes is `max(|asym(lo)|, |asym(hi)|)`. Head
//! coordinates span a finite-dimensional factor and never contribute.

mod tail_box;
mod tail_form;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::{max_of, min_of, powu, Scalar};

pub use tail_box::{Inclusion, TailBox, TailPoint};
pub use tail_form::{EventualSign, GeomTerm, SignDecision, TailForm};

/// Default number of coordinates examined before an ordering question is
/// reported as undecided.
pub const DEFAULT_HORIZON: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MncError {
    #[error("geometric ratio {0} is outside [0, 1)")]
    RatioOutOfRange(f64),
    #[error("head arrays differ in length ({lo} vs {hi})")]
    HeadLengthMismatch { lo: usize, hi: usize },
    #[error("lower bound exceeds upper bound at coordinate {coordinate}")]
    InvertedInterval { coordinate: u64 },
    #[error("box misses the null-sequence space: asym(lo) = {asym_lo}, asym(hi) = {asym_hi}")]
    OutsideSpace { asym_lo: f64, asym_hi: f64 },
    #[error("undecided within the horizon: {0}")]
    Undecided(&'static str),
    #[error("point has nonzero asymptotic value {0}")]
    NotNullSequence(f64),
    #[error("box is not degenerate")]
    NotDegenerate,
    #[error("convex weight {0} is outside [0, 1]")]
    WeightOutOfRange(f64),
    #[error("set union is empty")]
    EmptyUnion,
    #[error("truncation index {n} is below the head length {head}")]
    TruncationInsideHead { n: u64, head: usize },
}

/// Value of the measure of noncompactness.
#[derive(Debug, Clone, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct MncValue<S>(S);

impl<S: Scalar> MncValue<S> {
    pub fn value(&self) -> &S {
        &self.0
    }

    pub fn into_inner(self) -> S {
        self.0
    }

    /// Membership in the kernel of the measure.
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

pub fn hausdorff_mnc<S: Scalar>(a: &TailBox<S>) -> MncValue<S> {
    MncValue(max_of(a.tail_lo().asym().abs(), a.tail_hi().asym().abs()))
}

/// Nonempty finite union of boxes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetUnion<S> {
    boxes: Vec<TailBox<S>>,
}

impl<S: Scalar> SetUnion<S> {
    pub fn new(boxes: Vec<TailBox<S>>) -> Result<Self, MncError> {
        if boxes.is_empty() {
            return Err(MncError::EmptyUnion);
        }
        Ok(SetUnion { boxes })
    }

    pub fn boxes(&self) -> &[TailBox<S>] {
        &self.boxes
    }
}

pub fn mnc_union<S: Scalar>(u: &SetUnion<S>) -> MncValue<S> {
    u.boxes
        .iter()
        .map(hausdorff_mnc)
        .reduce(|a, b| if b > a { b } else { a })
        .expect("nonempty union")
}

/// Coordinatewise bounding box of a union, which contains its closed convex
/// hull. Tail envelopes are the pointwise min/max of the members' forms.
#[derive(Debug, Clone)]
pub struct ConvHullDescriptor<S> {
    head_lo: Vec<S>,
    head_hi: Vec<S>,
    lower: Vec<TailForm<S>>,
    upper: Vec<TailForm<S>>,
}

impl<S: Scalar> ConvHullDescriptor<S> {
    pub fn of_union(u: &SetUnion<S>) -> Self {
        let h = u.boxes.iter().map(TailBox::head_len).max().unwrap_or(0);
        let aligned: Vec<TailBox<S>> = u.boxes.iter().map(|b| b.with_head_len(h)).collect();
        let head_lo = (0..h)
            .map(|k| {
                aligned.iter().map(|b| b.head_lo()[k].clone()).reduce(min_of).expect("nonempty")
            })
            .collect();
        let head_hi = (0..h)
            .map(|k| {
                aligned.iter().map(|b| b.head_hi()[k].clone()).reduce(max_of).expect("nonempty")
            })
            .collect();
        ConvHullDescriptor {
            head_lo,
            head_hi,
            lower: aligned.iter().map(|b| b.tail_lo().clone()).collect(),
            upper: aligned.iter().map(|b| b.tail_hi().clone()).collect(),
        }
    }

    pub fn coordinate(&self, i: u64) -> (S, S) {
        let k = (i - 1) as usize;
        if k < self.head_lo.len() {
            return (self.head_lo[k].clone(), self.head_hi[k].clone());
        }
        let lo = self.lower.iter().map(|f| f.eval(i)).reduce(min_of).expect("nonempty");
        let hi = self.upper.iter().map(|f| f.eval(i)).reduce(max_of).expect("nonempty");
        (lo, hi)
    }

    /// Asymptotic values of the lower and upper envelopes.
    pub fn asym(&self) -> (S, S) {
        let lo = self.lower.iter().map(|f| f.asym().clone()).reduce(min_of).expect("nonempty");
        let hi = self.upper.iter().map(|f| f.asym().clone()).reduce(max_of).expect("nonempty");
        (lo, hi)
    }
}

pub fn mnc_of_conv_descriptor<S: Scalar>(u: &SetUnion<S>) -> MncValue<S> {
    let (lo, hi) = ConvHullDescriptor::of_union(u).asym();
    MncValue(max_of(lo.abs(), hi.abs()))
}

/// Coordinatewise Minkowski combination `λA + (1 − λ)B`.
pub fn convex_combination<S: Scalar>(
    lambda: &S,
    a: &TailBox<S>,
    b: &TailBox<S>,
) -> Result<TailBox<S>, MncError> {
    if *lambda < S::zero() || *lambda > S::one() {
        return Err(MncError::WeightOutOfRange(lambda.approx_f64()));
    }
    if lambda.is_one() {
        return Ok(a.clone());
    }
    if lambda.is_zero() {
        return Ok(b.clone());
    }
    let mu = S::one() - lambda.clone();
    let h = a.head_len().max(b.head_len());
    let (a, b) = (a.with_head_len(h), b.with_head_len(h));
    let mix = |x: &S, y: &S| lambda.clone() * x.clone() + mu.clone() * y.clone();
    let head_lo = a.head_lo().iter().zip(b.head_lo()).map(|(x, y)| mix(x, y)).collect();
    let head_hi = a.head_hi().iter().zip(b.head_hi()).map(|(x, y)| mix(x, y)).collect();
    let tail_lo = &a.tail_lo().scale(lambda) + &b.tail_lo().scale(&mu);
    let tail_hi = &a.tail_hi().scale(lambda) + &b.tail_hi().scale(&mu);
    TailBox::new(head_lo, head_hi, tail_lo, tail_hi)
}

/// `A ⊆ B`, decided exactly up to [`DEFAULT_HORIZON`]; undecided counts as
/// `false`.
pub fn subset<S: Scalar>(a: &TailBox<S>, b: &TailBox<S>) -> bool {
    a.inclusion_in(b, DEFAULT_HORIZON) == Inclusion::Included
}

pub fn subset_decision<S: Scalar>(a: &TailBox<S>, b: &TailBox<S>, horizon: u64) -> Inclusion {
    a.inclusion_in(b, horizon)
}

pub fn scale_translate<S: Scalar>(a: &TailBox<S>, c: &S, shift: &TailPoint<S>) -> TailBox<S> {
    a.scale_translate(c, shift)
}

/// Upper cap on coordinates scanned by [`truncation_tail_sup`].
const ORACLE_MAX_SCAN: u64 = 10_000_000;

/// `sup_{i>N} max(|lo_i|, |hi_i|)` by direct evaluation of the envelopes.
///
/// The scan stops once the remaining geometric contribution is below
/// `1e-18` relative to the running supremum.
pub fn truncation_tail_sup<S: Scalar>(a: &TailBox<S>, n: u64) -> Result<S, MncError> {
    if (n as usize) < a.head_len() {
        return Err(MncError::TruncationInsideHead { n, head: a.head_len() });
    }
    Ok(max_of(scan_sup(a.tail_lo(), n), scan_sup(a.tail_hi(), n)))
}

fn scan_sup<S: Scalar>(f: &TailForm<S>, n: u64) -> S {
    let first = n + 1;
    let mut weights: Vec<S> = f.terms().iter().map(|t| t.alpha.clone() * powu(&t.rho, first)).collect();
    let eps = S::cast_f64(1e-18);
    let mut sup = S::zero();
    for _ in 0..ORACLE_MAX_SCAN {
        let value = weights.iter().fold(f.asym().clone(), |s, w| s + w.clone());
        sup = max_of(sup, value.abs());
        let remaining = weights.iter().fold(S::zero(), |s, w| s + w.abs());
        if remaining <= eps.clone() * (S::one() + sup.clone()) {
            break;
        }
        for (w, t) in weights.iter_mut().zip(f.terms()) {
            *w = w.clone() * t.rho.clone();
        }
    }
    sup
}
