//! Sequences of the form `f(i) = Σ_j α_j ρ_j^i + β` with `0 ≤ ρ_j < 1`.
//!
//! Indices start at 1. A term with `ρ = 0` vanishes at every index `i ≥ 1`
//! and is dropped on normalization.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use super::MncError;
use crate::scalar::{max_of, powu, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeomTerm<S> {
    pub alpha: S,
    pub rho: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailForm<S> {
    terms: Vec<GeomTerm<S>>,
    beta: S,
}

/// Outcome of deciding `f(i) ≥ 0` for every index from some start on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignDecision {
    Holds,
    /// Smallest index with `f(i) < 0`.
    Violated { index: u64 },
    /// The dominance index lies beyond the horizon.
    Undecided,
}

/// Index from which the sign of a tail form is constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventualSign {
    pub from: u64,
    pub sign: Ordering,
}

impl<S: Scalar> TailForm<S> {
    pub fn new(terms: Vec<GeomTerm<S>>, beta: S) -> Result<Self, MncError> {
        for term in &terms {
            if term.rho < S::zero() || term.rho >= S::one() {
                return Err(MncError::RatioOutOfRange(term.rho.approx_f64()));
            }
        }
        Ok(TailForm { terms, beta }.normalized())
    }

    pub fn constant(beta: S) -> Self {
        TailForm { terms: Vec::new(), beta }
    }

    pub fn zero() -> Self {
        Self::constant(S::zero())
    }

    /// `alpha · rho^i`.
    pub fn geometric(alpha: S, rho: S) -> Result<Self, MncError> {
        Self::new(vec![GeomTerm { alpha, rho }], S::zero())
    }

    pub fn terms(&self) -> &[GeomTerm<S>] {
        &self.terms
    }

    /// Asymptotic value, i.e. `β`.
    pub fn asym(&self) -> &S {
        &self.beta
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, i: u64) -> S {
        self.terms
            .iter()
            .fold(self.beta.clone(), |acc, t| acc + t.alpha.clone() * powu(&t.rho, i))
    }

    /// `f(start), f(start + 1), …`, advancing each power by one multiply.
    pub fn values_from(&self, start: u64) -> impl Iterator<Item = S> + '_ {
        let mut powers: Vec<S> = self.terms.iter().map(|t| powu(&t.rho, start)).collect();
        std::iter::from_fn(move || {
            let v = self
                .terms
                .iter()
                .zip(&powers)
                .fold(self.beta.clone(), |acc, (t, p)| acc + t.alpha.clone() * p.clone());
            for (p, t) in powers.iter_mut().zip(&self.terms) {
                *p = p.clone() * t.rho.clone();
            }
            Some(v)
        })
    }

    fn rho_max(&self) -> S {
        self.terms.iter().fold(S::zero(), |m, t| max_of(m, t.rho.clone()))
    }

    fn abs_alpha_sum(&self) -> S {
        self.terms.iter().fold(S::zero(), |s, t| s + t.alpha.abs())
    }

    /// `Σ|α_j| ρ_max^i`, an upper bound on `|f(i) − β|`.
    pub fn deviation_bound(&self, i: u64) -> S {
        self.abs_alpha_sum() * powu(&self.rho_max(), i)
    }

    /// Merges equal ratios and drops vanishing terms; terms end up sorted by
    /// decreasing ratio.
    fn normalized(mut self) -> Self {
        self.terms.retain(|t| !t.alpha.is_zero() && !t.rho.is_zero());
        self.terms
            .sort_by(|a, b| b.rho.partial_cmp(&a.rho).unwrap_or(Ordering::Equal));
        let mut merged: Vec<GeomTerm<S>> = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            match merged.last_mut() {
                Some(last) if last.rho == t.rho => last.alpha = last.alpha.clone() + t.alpha,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !t.alpha.is_zero());
        TailForm { terms: merged, beta: self.beta }
    }

    pub fn scale(&self, c: &S) -> Self {
        TailForm {
            terms: self
                .terms
                .iter()
                .map(|t| GeomTerm { alpha: t.alpha.clone() * c.clone(), rho: t.rho.clone() })
                .collect(),
            beta: self.beta.clone() * c.clone(),
        }
        .normalized()
    }

    pub fn shift(&self, c: &S) -> Self {
        TailForm { terms: self.terms.clone(), beta: self.beta.clone() + c.clone() }
    }

    /// Smallest `K ≥ start` beyond which the sign of `f` no longer changes,
    /// together with that sign. `None` if `K` would exceed `start + horizon`.
    ///
    /// With `β ≠ 0`, `K` is the first index with `Σ|α_j| ρ_max^K < |β|`.
    /// With `β = 0` the term of largest ratio dominates the rest once
    /// `Σ_{k>0} |α_k| (ρ_k/ρ_0)^K < |α_0|`.
    pub fn eventual_sign(&self, start: u64, horizon: u64) -> Option<EventualSign> {
        let start = start.max(1);
        if self.terms.is_empty() {
            return Some(EventualSign { from: start, sign: sign_of(&self.beta) });
        }
        let (target, sign, rest): (S, Ordering, Vec<GeomTerm<S>>) = if !self.beta.is_zero() {
            (self.beta.abs(), sign_of(&self.beta), self.terms.clone())
        } else {
            let lead = &self.terms[0];
            let rest = self.terms[1..]
                .iter()
                .map(|t| GeomTerm { alpha: t.alpha.clone(), rho: t.rho.clone() / lead.rho.clone() })
                .collect();
            (lead.alpha.abs(), sign_of(&lead.alpha), rest)
        };
        if rest.is_empty() {
            return Some(EventualSign { from: start, sign });
        }
        let mut weights: Vec<S> =
            rest.iter().map(|t| t.alpha.abs() * powu(&t.rho, start)).collect();
        let mut i = start;
        loop {
            let bound = weights.iter().fold(S::zero(), |s, w| s + w.clone());
            if bound < target {
                return Some(EventualSign { from: i, sign });
            }
            if i - start >= horizon {
                return None;
            }
            for (w, t) in weights.iter_mut().zip(&rest) {
                *w = w.clone() * t.rho.clone();
            }
            i += 1;
        }
    }

    /// Decides `f(i) ≥ 0` for all `i ≥ start`: pointwise below the
    /// dominance index, by the eventual sign beyond it.
    pub fn decide_nonneg(&self, start: u64, horizon: u64) -> SignDecision {
        let start = start.max(1);
        let Some(ev) = self.eventual_sign(start, horizon) else {
            return SignDecision::Undecided;
        };
        for (i, v) in (start..ev.from).zip(self.values_from(start)) {
            if v < S::zero() {
                return SignDecision::Violated { index: i };
            }
        }
        if ev.sign == Ordering::Less {
            SignDecision::Violated { index: ev.from }
        } else {
            SignDecision::Holds
        }
    }

    /// Decides `|f(i)| < bound` for all `i ≥ start`.
    pub fn decide_abs_below(&self, bound: &S, start: u64, horizon: u64) -> SignDecision {
        let start = start.max(1);
        if self.beta.abs() >= *bound {
            let index = (start..=start + horizon)
                .find(|&i| self.eval(i).abs() >= *bound)
                .unwrap_or(start);
            return SignDecision::Violated { index };
        }
        let margin = bound.clone() - self.beta.abs();
        let mut i = start;
        let alpha_sum = self.abs_alpha_sum();
        let rho = self.rho_max();
        let mut dev = alpha_sum * powu(&rho, start);
        while dev >= margin {
            if self.eval(i).abs() >= *bound {
                return SignDecision::Violated { index: i };
            }
            if i - start >= horizon {
                return SignDecision::Undecided;
            }
            dev = dev * rho.clone();
            i += 1;
        }
        SignDecision::Holds
    }
}

fn sign_of<S: Scalar>(x: &S) -> Ordering {
    x.partial_cmp(&S::zero()).unwrap_or(Ordering::Equal)
}

impl<S: Scalar> Add for &TailForm<S> {
    type Output = TailForm<S>;

    fn add(self, rhs: &TailForm<S>) -> TailForm<S> {
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        TailForm { terms, beta: self.beta.clone() + rhs.beta.clone() }.normalized()
    }
}

impl<S: Scalar> Neg for &TailForm<S> {
    type Output = TailForm<S>;

    fn neg(self) -> TailForm<S> {
        self.scale(&-S::one())
    }
}

impl<S: Scalar> Sub for &TailForm<S> {
    type Output = TailForm<S>;

    fn sub(self, rhs: &TailForm<S>) -> TailForm<S> {
        self + &(-rhs)
    }
}

/// Pointwise product; ratios multiply and stay in `[0, 1)`.
impl<S: Scalar> Mul for &TailForm<S> {
    type Output = TailForm<S>;

    fn mul(self, rhs: &TailForm<S>) -> TailForm<S> {
        let mut terms = Vec::with_capacity((self.terms.len() + 1) * (rhs.terms.len() + 1));
        for a in &self.terms {
            for b in &rhs.terms {
                terms.push(GeomTerm {
                    alpha: a.alpha.clone() * b.alpha.clone(),
                    rho: a.rho.clone() * b.rho.clone(),
                });
            }
            terms.push(GeomTerm { alpha: a.alpha.clone() * rhs.beta.clone(), rho: a.rho.clone() });
        }
        for b in &rhs.terms {
            terms.push(GeomTerm { alpha: b.alpha.clone() * self.beta.clone(), rho: b.rho.clone() });
        }
        TailForm { terms, beta: self.beta.clone() * rhs.beta.clone() }.normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    fn form(terms: &[(f64, f64)], beta: f64) -> TailForm<f64> {
        TailForm::new(
            terms.iter().map(|&(alpha, rho)| GeomTerm { alpha, rho }).collect(),
            beta,
        )
        .unwrap()
    }

    #[test]
    fn rejects_ratio_outside_unit_interval() {
        assert!(TailForm::new(vec![GeomTerm { alpha: 1.0, rho: 1.0 }], 0.0).is_err());
        assert!(TailForm::new(vec![GeomTerm { alpha: 1.0, rho: -0.1 }], 0.0).is_err());
    }

    #[test]
    fn eval_and_asym() {
        let f = form(&[(2.0, 0.5)], 1.0);
        assert_eq!(f.eval(1), 2.0);
        assert_eq!(f.eval(3), 1.25);
        assert_eq!(*f.asym(), 1.0);
        for i in 1..60 {
            assert!((f.eval(i) - f.asym()).abs() <= f.deviation_bound(i));
        }
    }

    #[test]
    fn incremental_values_match_eval() {
        let f = TailForm::new(
            vec![GeomTerm { alpha: ratio(3, 2), rho: ratio(2, 3) }, GeomTerm { alpha: ratio(-1, 1), rho: ratio(1, 5) }],
            ratio(1, 7),
        )
        .unwrap();
        for (i, v) in (4..40).zip(f.values_from(4)) {
            assert_eq!(v, f.eval(i));
        }
    }

    #[test]
    fn normalization_merges_ratios() {
        let f = form(&[(1.0, 0.5), (2.0, 0.5), (3.0, 0.0), (0.0, 0.25)], 0.0);
        assert_eq!(f.terms(), &[GeomTerm { alpha: 3.0, rho: 0.5 }]);
    }

    #[test]
    fn product_expands_all_cross_terms() {
        let a = form(&[(1.0, 0.5)], 0.5);
        let b = form(&[(2.0, 0.25)], -1.0);
        let p = &a * &b;
        for i in 1..20 {
            assert!((p.eval(i) - a.eval(i) * b.eval(i)).abs() < 1e-14);
        }
        assert_eq!(*p.asym(), -0.5);
    }

    #[test]
    fn exact_product_in_rationals() {
        let a = TailForm::new(
            vec![GeomTerm { alpha: ratio(1, 1), rho: ratio(1, 2) }],
            ratio(1, 2),
        )
        .unwrap();
        let sq = &a * &a;
        for i in 1..12 {
            assert_eq!(sq.eval(i), a.eval(i) * a.eval(i));
        }
    }

    #[test]
    fn nonneg_with_positive_beta() {
        // 1 - (0.5 + 0.5^i) = 0.5 - 0.5^i ≥ 0 for i ≥ 1.
        let diff = &TailForm::constant(1.0) - &form(&[(1.0, 0.5)], 0.5);
        assert_eq!(diff.decide_nonneg(1, 10_000), SignDecision::Holds);
        // 0.5 - 0.9^i is negative for i ≤ 6.
        let f = form(&[(-1.0, 0.9)], 0.5);
        assert_eq!(f.decide_nonneg(1, 10_000), SignDecision::Violated { index: 1 });
        assert_eq!(f.decide_nonneg(7, 10_000), SignDecision::Holds);
    }

    #[test]
    fn nonneg_with_negative_beta_is_violated() {
        let f = form(&[(5.0, 0.5)], -0.1);
        match f.decide_nonneg(1, 10_000) {
            SignDecision::Violated { index } => assert!(f.eval(index) < 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nonneg_with_zero_beta_uses_leading_term() {
        // 2·0.5^i - 3·0.25^i is 0.25 at i = 1 and positive after.
        let f = form(&[(2.0, 0.5), (-3.0, 0.25)], 0.0);
        assert_eq!(f.decide_nonneg(1, 10_000), SignDecision::Holds);
        let g = form(&[(2.0, 0.5), (-5.0, 0.25)], 0.0);
        assert_eq!(g.decide_nonneg(1, 10_000), SignDecision::Violated { index: 1 });
        assert_eq!(g.decide_nonneg(2, 10_000), SignDecision::Holds);
        let h = form(&[(-1.0, 0.9), (4.0, 0.5)], 0.0);
        assert!(matches!(h.decide_nonneg(1, 10_000), SignDecision::Violated { .. }));
    }

    #[test]
    fn horizon_limits_the_search() {
        // 1e-9 + (-1)·0.999^i needs roughly 20700 steps to settle.
        let f = form(&[(-1.0, 0.999)], 1e-9);
        assert_eq!(f.decide_nonneg(1, 100), SignDecision::Undecided);
    }

    #[test]
    fn zero_form_is_nonneg() {
        let z: TailForm<BigRational> = TailForm::zero();
        assert_eq!(z.decide_nonneg(1, 0), SignDecision::Holds);
        assert_eq!(z.eventual_sign(3, 0).unwrap().sign, Ordering::Equal);
    }

    #[test]
    fn abs_below() {
        let d = form(&[(0.5, 0.5)], 0.5);
        // |0.5 + 0.5^(i+1)| < 1 for i ≥ 1, since 0.5^(i+1) ≤ 0.25.
        assert_eq!(d.decide_abs_below(&1.0, 1, 1000), SignDecision::Holds);
        let d = form(&[(1.0, 0.5)], 0.6);
        assert_eq!(d.decide_abs_below(&1.0, 1, 1000), SignDecision::Violated { index: 1 });
        let d = TailForm::constant(1.0);
        assert!(matches!(d.decide_abs_below(&1.0, 1, 1000), SignDecision::Violated { .. }));
    }
}
