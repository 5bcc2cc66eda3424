//! Generalized Holmstedt estimates for K-functionals between weighted
//! real interpolation spaces with slowly varying weights.
//!
//! Everything is generic over [`Scalar`]; the aliases below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bracket;
pub mod conditions;
pub mod couples;
pub mod engine;
pub mod error;
pub mod grid;
pub mod phi;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod sv;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Sv = sv::SvDescriptor<f64>;
pub type Grid = grid::LogGrid<f64>;
pub type Quad = quadrature::Quadrature<f64>;
pub type Phi = phi::PhiParam<f64>;
pub type Element = couples::CoupleElement<f64>;
pub type Profile = couples::KProfile<f64>;
pub type Seq = couples::WeightedSeq<f64>;
pub type Step = couples::StepFn<f64>;
pub type Rho = conditions::RhoTable<f64>;
pub type ConditionReport = conditions::ConditionReport<f64>;
pub type EquivalenceReport = engine::EquivalenceReport<f64>;
pub type EquivalenceConfig = engine::EquivalenceConfig<f64>;
pub type Envelope = sv::EnvelopeReport<f64>;
