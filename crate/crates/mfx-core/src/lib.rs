//! Multifractal detrended cross-correlation analysis of synchronized time
//! series, with front-ends for FX tick data: q-dependent detrended
//! cross-correlation coefficients, correlation-induced hierarchical
//! clustering, triangular-arbitrage scanning, currency indices, and
//! power-law tail estimation.

pub mod arbitrage;
pub mod cluster;
pub mod error;
pub mod ingest;
pub mod marketstats;
pub mod mfcca;
pub mod numeric;
pub mod rho;
pub mod surrogate;

pub use error::{Error, Result};
