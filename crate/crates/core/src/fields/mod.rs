//! Closed-form spinor and vector fields and the symmetries acting on them.
//!
//! Every field here is a finite sum of terms
//! `coeff * (b^2 / (b^2 + |x-c|^2))^a * (lo + gamma.((x-c)/b) hi)`,
//! which is closed under the Dirac operator, translations, dilations,
//! rotations with their spin lifts, and (at envelope power d/2) conformal
//! inversion. Derivatives are therefore exact: no numerical differentiation
//! enters any verification path, finite differences only cross-check.

mod equality;
mod pair;
mod phase;
mod spinor;
mod vector;

pub use equality::{
    equality_data, make_sigma, reduce_skew_to_sigma, skew_rank, structure_report, EqualityData,
    SkewReduction, StructureReport,
};
pub use pair::{scalar_pair, PairData, RadialProfile, ScalarZeroMode, ZeroModePair};
pub use phase::{GaugePhase, GaugePhaseData, PhaseTerm, PhaseTermData};
pub use spinor::{twistor, SpinorField, SpinorFieldData, SpinorTerm, SpinorTermData};
pub use vector::{assemble_potential, power_divergence_of, VectorField, VectorFieldData};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("field dimension {field} does not match gamma set dimension {gammas}")]
    DimensionMismatch { field: usize, gammas: usize },
    #[error("conformal inversion needs every envelope power equal to d/2, found {0}")]
    NotInvertible(f64),
    #[error("conformal inversion of gauge-transformed pairs is not supported; strip the phase first")]
    PhaseNotInvertible,
    #[error("spinor data must be nonzero")]
    ZeroSpinor,
    #[error("{0}")]
    BadDescriptor(String),
    #[error("operation needs odd dimension, got {0}")]
    EvenDimension(usize),
}
