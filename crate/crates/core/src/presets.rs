//! Named experiment presets.

use crate::config::RunConfig;

/// Ising traders on the 12x12 lattice against the random-trader background.
pub const ISING_PRESET: &str = "paper-fig1-3";
/// Same background with liquidity takers in place of Ising traders.
pub const TAKER_PRESET: &str = "paper-fig3-lt";

pub const NAMES: [&str; 2] = [ISING_PRESET, TAKER_PRESET];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub name: &'static str,
    pub config: RunConfig,
    pub dt_list: Vec<u64>,
    pub window: usize,
}

pub fn ising_market_config() -> RunConfig {
    RunConfig {
        N_random: 2160,
        mu_lt: 600.0,
        N_ising: 144,
        N_lt: 0,
        L: 12,
        J: 1.0,
        alpha: 4.0,
        beta: 1.45,
        q_sweep: 0.001,
        dt_list: vec![10, 30, 60, 360, 540, 720],
        window: 1000,
        // from `calibrate-c --target 5.4` under these parameters
        c: 0.3,
        sigma_price: 10.0,
        ..RunConfig::default()
    }
}

pub fn preset(name: &str) -> Option<ExperimentPreset> {
    let config = match name {
        ISING_PRESET => ising_market_config(),
        TAKER_PRESET => RunConfig { N_ising: 0, N_lt: 144, ..ising_market_config() },
        _ => return None,
    };
    let name = NAMES.into_iter().find(|n| *n == name)?;
    Some(ExperimentPreset {
        name,
        dt_list: config.dt_list.clone(),
        window: config.window,
        config,
    })
}
