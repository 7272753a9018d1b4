//! Broadband continuous-variable teleportation of a light beam: closed-form
//! coherence of the teleported field, a Wigner-picture Monte Carlo engine for
//! its Gaussian sector, and squeezing/filter design tools.

pub mod analytic;
pub mod config;
pub mod error;
pub mod mc;
pub mod mollow;
pub mod params;
pub mod run;
pub mod series;
pub mod transfer;

pub use error::{Error, Result};
pub use params::{db_from_lambda, lambda_from_db, validate_regime, RegimeReport, TeleporterParams};
pub use series::{CorrelationKind, CorrelationSeries, Spectrum};
