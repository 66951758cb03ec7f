//! Oriented matroids given by chirotopes or cocircuit sets, their programs and mutations.

pub mod acceptance;
pub mod canonical;
pub mod chirotope;
pub mod classify;
pub mod error;
pub mod extensions;
pub mod faces;
pub mod geometry;
pub mod io;
pub mod om;
pub mod programs;
pub mod sign;

pub use chirotope::{Chirotope, ValidationReport, Violation};
pub use error::{Error, Result};
pub use faces::MutationCertificate;
pub use geometry::{PointConfig, Scalar};
pub use om::{Inseparability, OrientedMatroid, Provenance};
pub use programs::{DirectedCycleWitness, Program, Verdict};
pub use sign::{ElementSet, Sign, SignVector};

/// Exact configurations over arbitrary-precision rationals.
pub type RationalConfig = PointConfig<num_rational::BigRational>;
/// Exact configurations over 128-bit integers. Entries must stay small enough that
/// the fraction-free minors do not overflow.
pub type IntConfig = PointConfig<i128>;
/// Floating-point configurations; signs are subject to rounding.
pub type FloatConfig = PointConfig<f64>;
