use serde::Serialize;

use super::tail_form::{SignDecision, TailForm};
use super::{MncError, DEFAULT_HORIZON};
use crate::scalar::{max_of, min_of, Scalar};

/// Coordinatewise interval set in the null-sequence space.
///
/// Coordinates `1..=h` carry explicit intervals; coordinates `i > h` are
/// bounded by the tail envelopes `tail_lo(i) ≤ x_i ≤ tail_hi(i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TailBox<S> {
    head_lo: Vec<S>,
    head_hi: Vec<S>,
    tail_lo: TailForm<S>,
    tail_hi: TailForm<S>,
}

/// A single element of the null-sequence space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailPoint<S> {
    head: Vec<S>,
    tail: TailForm<S>,
}

/// Result of an exact inclusion test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inclusion {
    Included,
    /// First coordinate where an endpoint of the inner box escapes.
    Excluded { coordinate: u64 },
    Undecided,
}

impl<S: Scalar> TailBox<S> {
    pub fn new(
        head_lo: Vec<S>,
        head_hi: Vec<S>,
        tail_lo: TailForm<S>,
        tail_hi: TailForm<S>,
    ) -> Result<Self, MncError> {
        let b = TailBox { head_lo, head_hi, tail_lo, tail_hi };
        b.validate()?;
        Ok(b)
    }

    /// Box with no head and the given envelopes.
    pub fn from_tails(tail_lo: TailForm<S>, tail_hi: TailForm<S>) -> Result<Self, MncError> {
        Self::new(Vec::new(), Vec::new(), tail_lo, tail_hi)
    }

    /// `{x : |x_i| ≤ r for all i}`.
    pub fn ball(r: S) -> Result<Self, MncError> {
        Self::from_tails(TailForm::constant(-r.clone()), TailForm::constant(r))
    }

    fn validate(&self) -> Result<(), MncError> {
        if self.head_lo.len() != self.head_hi.len() {
            return Err(MncError::HeadLengthMismatch {
                lo: self.head_lo.len(),
                hi: self.head_hi.len(),
            });
        }
        for (k, (lo, hi)) in self.head_lo.iter().zip(&self.head_hi).enumerate() {
            if lo > hi {
                return Err(MncError::InvertedInterval { coordinate: k as u64 + 1 });
            }
        }
        let (blo, bhi) = (self.tail_lo.asym(), self.tail_hi.asym());
        if blo > bhi {
            return Err(MncError::InvertedInterval { coordinate: u64::MAX });
        }
        if *blo > S::zero() || *bhi < S::zero() {
            return Err(MncError::OutsideSpace {
                asym_lo: blo.approx_f64(),
                asym_hi: bhi.approx_f64(),
            });
        }
        let width = (&self.tail_hi - &self.tail_lo).shift(&S::tie());
        match width.decide_nonneg(self.tail_start(), DEFAULT_HORIZON) {
            SignDecision::Holds => Ok(()),
            SignDecision::Violated { index } => {
                Err(MncError::InvertedInterval { coordinate: index })
            }
            SignDecision::Undecided => Err(MncError::Undecided("tail envelope ordering")),
        }
    }

    pub fn head_len(&self) -> usize {
        self.head_lo.len()
    }

    /// First coordinate described by the tail envelopes.
    pub fn tail_start(&self) -> u64 {
        self.head_lo.len() as u64 + 1
    }

    pub fn head_lo(&self) -> &[S] {
        &self.head_lo
    }

    pub fn head_hi(&self) -> &[S] {
        &self.head_hi
    }

    pub fn tail_lo(&self) -> &TailForm<S> {
        &self.tail_lo
    }

    pub fn tail_hi(&self) -> &TailForm<S> {
        &self.tail_hi
    }

    /// Interval at coordinate `i ≥ 1`.
    pub fn coordinate(&self, i: u64) -> (S, S) {
        assert!(i >= 1, "coordinates start at 1");
        let k = (i - 1) as usize;
        if k < self.head_lo.len() {
            (self.head_lo[k].clone(), self.head_hi[k].clone())
        } else {
            (self.tail_lo.eval(i), self.tail_hi.eval(i))
        }
    }

    /// Same set, with the head materialized out to `h` coordinates.
    pub fn with_head_len(&self, h: usize) -> Self {
        let mut out = self.clone();
        for i in self.head_lo.len() + 1..=h {
            let (lo, hi) = self.coordinate(i as u64);
            out.head_lo.push(lo);
            out.head_hi.push(hi);
        }
        out
    }

    /// `true` when both envelopes vanish asymptotically.
    pub fn is_relatively_compact(&self) -> bool {
        self.tail_lo.asym().is_zero() && self.tail_hi.asym().is_zero()
    }

    /// Closure. Boxes are closed, so this is the identity.
    pub fn closure(&self) -> Self {
        self.clone()
    }

    /// A point of the box: `x_i = lo_i + θ(hi_i − lo_i)` with `θ` chosen so
    /// that the tail of `x` tends to 0.
    pub fn member_point(&self) -> TailPoint<S> {
        let (blo, bhi) = (self.tail_lo.asym().clone(), self.tail_hi.asym().clone());
        let two = S::one() + S::one();
        let theta = if bhi == blo { S::one() / two } else { -blo.clone() / (bhi - blo) };
        let head = self
            .head_lo
            .iter()
            .zip(&self.head_hi)
            .map(|(lo, hi)| lo.clone() + theta.clone() * (hi.clone() - lo.clone()))
            .collect();
        let tail = &self.tail_lo + &(&self.tail_hi - &self.tail_lo).scale(&theta);
        // The asymptotic value is zero in exact arithmetic; drop rounding residue.
        let residue = tail.asym().clone();
        TailPoint { head, tail: tail.shift(&-residue) }
    }

    /// Image of the box under `x ↦ c·x + shift`.
    pub fn scale_translate(&self, c: &S, shift: &TailPoint<S>) -> Self {
        let h = self.head_len().max(shift.head.len());
        let a = self.with_head_len(h);
        let s = shift.with_head_len(h);
        let (mut head_lo, mut head_hi) = (Vec::with_capacity(h), Vec::with_capacity(h));
        for k in 0..h {
            let x = c.clone() * a.head_lo[k].clone();
            let y = c.clone() * a.head_hi[k].clone();
            head_lo.push(min_of(x.clone(), y.clone()) + s.head[k].clone());
            head_hi.push(max_of(x, y) + s.head[k].clone());
        }
        let (lo, hi) = if *c >= S::zero() {
            (a.tail_lo.scale(c), a.tail_hi.scale(c))
        } else {
            (a.tail_hi.scale(c), a.tail_lo.scale(c))
        };
        TailBox { head_lo, head_hi, tail_lo: &lo + &s.tail, tail_hi: &hi + &s.tail }
    }

    /// Decides `self ⊆ other` with slack [`Scalar::tie`].
    pub fn inclusion_in(&self, other: &Self, horizon: u64) -> Inclusion {
        let h = self.head_len().max(other.head_len());
        let a = self.with_head_len(h);
        let b = other.with_head_len(h);
        let tie = S::tie();
        for k in 0..h {
            if a.head_lo[k].clone() + tie.clone() < b.head_lo[k]
                || a.head_hi[k] > b.head_hi[k].clone() + tie.clone()
            {
                return Inclusion::Excluded { coordinate: k as u64 + 1 };
            }
        }
        let start = h as u64 + 1;
        let lo_gap = (&a.tail_lo - &b.tail_lo).shift(&tie);
        let hi_gap = (&b.tail_hi - &a.tail_hi).shift(&tie);
        let lo = lo_gap.decide_nonneg(start, horizon);
        let hi = hi_gap.decide_nonneg(start, horizon);
        match (lo, hi) {
            (SignDecision::Violated { index: i }, SignDecision::Violated { index: j }) => {
                Inclusion::Excluded { coordinate: i.min(j) }
            }
            (SignDecision::Violated { index }, _) | (_, SignDecision::Violated { index }) => {
                Inclusion::Excluded { coordinate: index }
            }
            (SignDecision::Holds, SignDecision::Holds) => Inclusion::Included,
            _ => Inclusion::Undecided,
        }
    }

    pub fn contains(&self, x: &TailPoint<S>) -> bool {
        x.as_box().inclusion_in(self, DEFAULT_HORIZON) == Inclusion::Included
    }
}

impl<S: Scalar> TailPoint<S> {
    pub fn new(head: Vec<S>, tail: TailForm<S>) -> Result<Self, MncError> {
        if !tail.asym().is_zero() {
            return Err(MncError::NotNullSequence(tail.asym().approx_f64()));
        }
        Ok(TailPoint { head, tail })
    }

    pub fn origin() -> Self {
        TailPoint { head: Vec::new(), tail: TailForm::zero() }
    }

    /// Extracts the point of a degenerate box (`lo = hi`).
    pub fn from_degenerate(b: &TailBox<S>) -> Result<Self, MncError> {
        if b.head_lo != b.head_hi || b.tail_lo != b.tail_hi {
            return Err(MncError::NotDegenerate);
        }
        Self::new(b.head_lo.clone(), b.tail_lo.clone())
    }

    pub fn head(&self) -> &[S] {
        &self.head
    }

    pub fn tail(&self) -> &TailForm<S> {
        &self.tail
    }

    pub fn coordinate(&self, i: u64) -> S {
        let k = (i - 1) as usize;
        if k < self.head.len() {
            self.head[k].clone()
        } else {
            self.tail.eval(i)
        }
    }

    pub fn with_head_len(&self, h: usize) -> Self {
        let mut out = self.clone();
        for i in self.head.len() + 1..=h {
            out.head.push(self.tail.eval(i as u64));
        }
        out
    }

    /// The singleton `{x}` as a degenerate box.
    pub fn as_box(&self) -> TailBox<S> {
        TailBox {
            head_lo: self.head.clone(),
            head_hi: self.head.clone(),
            tail_lo: self.tail.clone(),
            tail_hi: self.tail.clone(),
        }
    }
}
