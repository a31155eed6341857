//! Thermodynamics of discrete energy spectra: Gibbs populations, entropy
//! surfaces, staircase cooling protocols, adiabatic-reachability solvers,
//! and projective energy-measurement statistics.
//!
//! Units are dimensionless with k = 1; every built-in spectrum family keeps
//! its ground level at exactly energy 0, so only gaps matter. The numerical
//! core is generic over the floating-point scalar through [`Scalar`]
//! (`f32` or `f64`); the `*64` aliases below pin the precision used by the
//! command-line tool and the test suites. Default tolerances assume `f64`.

// Validation sites write `!(x > y)` so that NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod measurement;
pub mod numeric;
pub mod output;
pub mod processes;
pub mod scalar;
pub mod spectra;
pub mod thermo;
pub mod unattainability;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use measurement::{MeasurementRecord, StateVector};
pub use processes::{ProtocolStep, ProtocolTrace, StaircaseResult};
pub use spectra::{Level, ParameterDomain, SpectrumModel, TablePoint, TruncationPolicy};
pub use thermo::{EntropySurface, ThermalState};

/// `f64` aliases, the default precision.
pub type Level64 = spectra::Level<f64>;
pub type ParameterDomain64 = spectra::ParameterDomain<f64>;
pub type SpectrumModel64 = spectra::SpectrumModel<f64>;
pub type TruncationPolicy64 = spectra::TruncationPolicy<f64>;
pub type ThermalState64 = thermo::ThermalState<f64>;
pub type EntropySurface64 = thermo::EntropySurface<f64>;
pub type ProtocolStep64 = processes::ProtocolStep<f64>;
pub type ProtocolTrace64 = processes::ProtocolTrace<f64>;
pub type StaircaseResult64 = processes::StaircaseResult<f64>;
pub type StateVector64 = measurement::StateVector<f64>;
pub type MeasurementRecord64 = measurement::MeasurementRecord<f64>;

/// `f32` aliases for callers trading precision for footprint.
pub type Level32 = spectra::Level<f32>;
pub type SpectrumModel32 = spectra::SpectrumModel<f32>;
pub type ThermalState32 = thermo::ThermalState<f32>;
pub type EntropySurface32 = thermo::EntropySurface<f32>;
