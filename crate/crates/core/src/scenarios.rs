//! Built-in worked example: the shifting pair
//! `ψ_n(t) = 2 + 2t − 1/(n+1)`, `φ_n(t) = 2 + t + 1/n` with limits
//! `ψ(t) = 2 + 2t`, `φ(t) = 2 + t`, the unit box and `T x = x/2`.

use crate::expr::parse_expr;
use crate::mnc::TailBox;
use crate::operators::{DiagonalAffineOperator, OperatorSpec};
use crate::scalar::Scalar;
use crate::shifting::FunctionSequencePair;

pub const PAPER_PSI_SEQ: &str = "(2*n*(1+t)+2*t+1)/(n+1)";
pub const PAPER_PHI_SEQ: &str = "(n*(2+t)+1)/n";
pub const PAPER_PSI: &str = "2+2*t";
pub const PAPER_PHI: &str = "2+t";

/// `n` ladder for the bound table.
pub const BOUND_TABLE_N: [u64; 5] = [1, 10, 100, 1000, 1_000_000];

pub fn paper_pair() -> FunctionSequencePair {
    pair_from(PAPER_PSI_SEQ, PAPER_PHI_SEQ, Some((PAPER_PSI, PAPER_PHI)))
}

/// `ψ = t`, `φ = t + 1`: violates both shifting conditions.
pub fn broken_pair() -> FunctionSequencePair {
    pair_from("t", "t+1", Some(("t", "t+1")))
}

fn pair_from(psi: &str, phi: &str, limits: Option<(&str, &str)>) -> FunctionSequencePair {
    let p = FunctionSequencePair::new(parse_expr(psi).unwrap(), parse_expr(phi).unwrap());
    match limits {
        Some((a, b)) => p.with_limits(parse_expr(a).unwrap(), parse_expr(b).unwrap()),
        None => p,
    }
}

/// `{x : |x_i| ≤ 1}`.
pub fn unit_box<S: Scalar>() -> TailBox<S> {
    TailBox::ball(S::one()).expect("unit ball is valid")
}

pub fn half_scaling<S: Scalar>() -> OperatorSpec<S> {
    let two = S::one() + S::one();
    OperatorSpec::Single(DiagonalAffineOperator::scaling(S::one() / two))
}

pub fn identity_operator<S: Scalar>() -> OperatorSpec<S> {
    OperatorSpec::Single(DiagonalAffineOperator::identity())
}
