//! Exact Hausdorff measure of noncompactness on tail-described boxes in the
//! null-sequence space, shifting-distance pair checks, and a certifier for
//! the Darbo-type iteration `A_{k+1} = Conv(T A_k)`.
//!
//! Everything numeric is generic over [`scalar::Scalar`]; the aliases below
//! fix the two instantiations used in practice.

pub mod axioms;
pub mod cli;
pub mod engine;
pub mod expr;
pub mod mnc;
pub mod operators;
pub mod scalar;
pub mod scenarios;
pub mod shifting;

pub use num_rational::BigRational;

pub type TailFormF64 = mnc::TailForm<f64>;
pub type TailBoxF64 = mnc::TailBox<f64>;
pub type OperatorF64 = operators::DiagonalAffineOperator<f64>;
pub type CertificateF64 = engine::Certificate<f64>;

pub type ExactTailForm = mnc::TailForm<BigRational>;
pub type ExactTailBox = mnc::TailBox<BigRational>;
pub type ExactOperator = operators::DiagonalAffineOperator<BigRational>;
pub type ExactCertificate = engine::Certificate<BigRational>;
