//! Three-level maser heat engine driven by a classical field and coupled to
//! two baths through a global (GKLS) dissipator.
//!
//! Start from [`EngineParams`], build an [`Engine`] and query its
//! stationary thermodynamics, heat-flux decomposition and power
//! fluctuations. [`dynamics`] integrates the transient.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomposition;
pub mod dissipator;
pub mod dynamics;
pub mod error;
pub mod fcs;
pub mod model;
pub mod stationary;

pub use dissipator::{CouplingScheme, DissipatorRates};
pub use error::{Error, Result};
pub use model::{CouplingTable, EngineParams, SpectralData, C64};
pub use stationary::{DomainStatus, DomainVerdict, Engine, StationaryState, ThermoReport};
