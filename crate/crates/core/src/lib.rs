//! Rolling minimum-spanning-tree networks over daily stock returns, topological
//! portfolio selection, market-regime labelling and a regime-conditioned backtest.

pub mod backtest;
pub mod error;
pub mod ingest;
pub mod network;
pub mod regime;
pub mod selection;
pub mod stats;
pub mod synth;
pub mod topology;

pub use error::{Error, Result};
