//! Agent-based market simulator with a frustrated spin lattice driving
//! market orders into a price-time-priority limit order book.
//!
//! Random traders supply liquidity with limit orders, Ising traders (or
//! liquidity takers, as a control) consume it with market orders, and the
//! price is whatever the book trades at. An equilibrium-pricing reference
//! model driven by the same lattice lives in [`baseline`], and [`stats`]
//! measures return distributions, volatility and squared-return
//! autocorrelation.
//!
//! ```
//! use spinbook::config::RunConfig;
//!
//! let cfg = RunConfig { T: 200, N_random: 50, N_ising: 16, L: 4, ..RunConfig::default() };
//! let out = spinbook::engine::run(&cfg).unwrap();
//! assert_eq!(out.series.len(), 200);
//! ```

use std::path::PathBuf;

pub mod agents;
pub mod baseline;
pub mod config;
pub mod engine;
pub mod lattice;
pub mod orderbook;
pub mod output;
pub mod presets;
pub mod stats;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
    #[error(transparent)]
    Baseline(#[from] baseline::BaselineError),
    #[error("output directory {0} is not writable: {1}")]
    OutputDir(PathBuf, std::io::Error),
    #[error("cannot write {0}: {1}")]
    Write(PathBuf, std::io::Error),
    #[error("cannot read {0}: {1}")]
    Read(PathBuf, String),
    #[error("no prices.csv or returns.csv in {0}")]
    MissingInput(PathBuf),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
