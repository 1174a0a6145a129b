//! Information gain, operation fidelity and reversibility of quantum
//! measurements, the trade-off relations linking them, and a simulator for
//! the qutrit photonic experiment that probes them.
//!
//! All numerical code is generic over the scalar type through [`Real`]; the
//! aliases at the crate root fix it to `f64`.

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod families;
pub mod linalg;
pub mod measurement;
pub mod scalar;
pub mod state;

pub use bounds::{classify_saturation, global_gap, pairwise_gaps, SaturationFlags};
pub use error::{Error, Result};
pub use families::{closed_form_triple, compile_angles, family, sweep, FamilyId};
pub use measurement::{random_measurement, random_unitary, Completeness};
pub use scalar::Real;
pub use state::fidelity_pure;

pub type CMatrix = linalg::CMatrix<f64>;
pub type Svd = linalg::Svd<f64>;
pub type PureState = state::PureState<f64>;
pub type DensityMatrix = state::DensityMatrix<f64>;
pub type Measurement = measurement::Measurement<f64>;
pub type MeasurementFile = measurement::MeasurementFile<f64>;
pub type InfoTriple = measurement::InfoTriple<f64>;
pub type ReversalOperation = measurement::ReversalOperation<f64>;
pub type EmpiricalTriple = measurement::EmpiricalTriple<f64>;
pub type BoundReport = bounds::BoundReport<f64>;
pub type SweepRow = families::SweepRow<f64>;
pub type OutcomeAngles = families::OutcomeAngles<f64>;
pub type SicSet = experiment::SicSet<f64>;
pub type ExperimentResult = experiment::ExperimentResult<f64>;

pub type MeasurementF32 = measurement::Measurement<f32>;
pub type InfoTripleF32 = measurement::InfoTriple<f32>;
