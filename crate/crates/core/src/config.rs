//! Run configuration.
//!
//! Config files are flat `key = value` text (a TOML subset). Keys match the
//! field names below exactly, e.g. `T`, `N_random`, `J`, `q_sweep`.

use serde::{Deserialize, Serialize};

use crate::agents::{BehaviorParams, PriceReference, TraderKind};
use crate::lattice::{FieldMode, LatticeParams, SweepOrder};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("cannot parse config: {0}")]
    Parse(String),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[allow(non_snake_case)]
pub struct RunConfig {
    /// Master seed for every random stream of the run.
    pub seed: u64,
    /// Number of time steps.
    pub T: u64,
    pub N_random: usize,
    /// Ising traders; either 0 or exactly `L * L`.
    pub N_ising: usize,
    pub N_lt: usize,
    /// Waiting-time scale: a kind with N traders waits `c * N` steps on average.
    pub c: f64,
    /// Waiting-time scale for market-order traders (Ising and liquidity
    /// takers); `c` when absent.
    pub c_market: Option<f64>,
    /// Mean limit-order lifetime in steps.
    pub mu_lt: f64,
    /// Mean order volume in shares.
    pub mu_vol: f64,
    /// Standard deviation of the random traders' limit-price offset, ticks.
    pub sigma_price: f64,
    pub J: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Lattice side length.
    pub L: usize,
    /// Probability of one lattice sweep per step.
    pub q_sweep: f64,
    /// Currency value of one tick.
    pub tick_value: f64,
    /// Initial price in ticks.
    pub p0: u64,
    /// Return intervals for the statistics stage.
    pub dt_list: Vec<u64>,
    /// Volatility window for the statistics stage.
    pub window: usize,
    /// Leading steps skipped by the statistics stage.
    pub warmup: u64,
    pub sweep_order: SweepOrder,
    pub field_mode: FieldMode,
    pub price_reference: PriceReference,
    /// Record the order-event log.
    pub order_events: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            T: 100_000,
            N_random: 2160,
            N_ising: 144,
            N_lt: 0,
            c: 0.3,
            c_market: None,
            mu_lt: 600.0,
            mu_vol: 100.0,
            sigma_price: 10.0,
            J: 1.0,
            alpha: 4.0,
            beta: 1.45,
            L: 12,
            q_sweep: 0.001,
            tick_value: 0.01,
            p0: 10_000,
            dt_list: vec![10, 30, 60, 360, 540, 720],
            window: 1000,
            warmup: 10_000,
            sweep_order: SweepOrder::Random,
            field_mode: FieldMode::PerUpdate,
            price_reference: PriceReference::OwnSide,
            order_events: false,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("RunConfig always serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |field, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("c", self.c)?;
        if let Some(c) = self.c_market {
            positive("c_market", c)?;
        }
        positive("mu_lt", self.mu_lt)?;
        positive("mu_vol", self.mu_vol)?;
        positive("sigma_price", self.sigma_price)?;
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("tick_value", self.tick_value)?;
        if !self.J.is_finite() {
            return Err(invalid("J", "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.q_sweep) {
            return Err(invalid("q_sweep", format!("must lie in [0, 1], got {}", self.q_sweep)));
        }
        if self.L == 0 {
            return Err(invalid("L", "lattice side must be >= 1"));
        }
        if self.N_ising != 0 && self.N_ising != self.L * self.L {
            return Err(invalid(
                "N_ising",
                format!("must be 0 or L*L = {}, got {}", self.L * self.L, self.N_ising),
            ));
        }
        if self.p0 == 0 {
            return Err(invalid("p0", "initial price must be >= 1 tick"));
        }
        if self.dt_list.contains(&0) {
            return Err(invalid("dt_list", "return intervals must be >= 1"));
        }
        if self.window == 0 {
            return Err(invalid("window", "must be >= 1"));
        }
        let traders = self.N_random + self.N_ising + self.N_lt;
        if traders > u32::MAX as usize {
            return Err(invalid("N_random", "too many traders"));
        }
        Ok(())
    }

    pub fn lattice_params(&self) -> LatticeParams {
        LatticeParams {
            side: self.L,
            coupling: self.J,
            alpha: self.alpha,
            beta: self.beta,
            sweep_order: self.sweep_order,
            field_mode: self.field_mode,
        }
    }

    pub fn behavior(&self) -> BehaviorParams {
        BehaviorParams {
            mu_vol: self.mu_vol,
            sigma_price: self.sigma_price,
            mu_lt: self.mu_lt,
            c: self.c,
        }
    }

    /// Waiting-time scale for traders of `kind`.
    pub fn c_for(&self, kind: TraderKind) -> f64 {
        match kind {
            TraderKind::Random => self.c,
            TraderKind::Ising | TraderKind::LiquidityTaker => self.c_market.unwrap_or(self.c),
        }
    }

    /// Mean Ising waiting time, `c_market * N_ising`.
    pub fn mu_wt_ising(&self) -> f64 {
        self.c_for(TraderKind::Ising) * self.N_ising as f64
    }
}
