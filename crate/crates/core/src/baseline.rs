//! Equilibrium-pricing reference model.
//!
//! Fundamentalists demand `a m log(p*/p)`, interacting traders demand
//! `b n M`. Zeroing the sum with a constant fundamental price fixes the log
//! price to `log p* + lambda M` with `lambda = b n / (a m)`, so one period's
//! log return is `lambda (M_next - M_now)`.

use serde::Serialize;

use crate::engine::stream_rng;
use crate::lattice::{LatticeParams, SpinLattice};

const STREAM_BASELINE_LATTICE: u64 = 1;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BaselineError {
    #[error("price must be positive, got {0}")]
    NonPositivePrice(f64),
    #[error("parameter `{0}` must be finite and > 0")]
    InvalidParam(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BkfParams {
    /// Fundamentalist reaction strength.
    pub a: f64,
    /// Interacting-trader strength.
    pub b: f64,
    /// Number of fundamentalists.
    pub m: f64,
    /// Number of interacting traders.
    pub n: f64,
    /// Constant fundamental price.
    pub p_star: f64,
}

impl BkfParams {
    pub fn new(a: f64, b: f64, m: f64, n: f64, p_star: f64) -> Result<Self, BaselineError> {
        for (name, v) in [("a", a), ("b", b), ("m", m), ("n", n), ("p_star", p_star)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(BaselineError::InvalidParam(name));
            }
        }
        Ok(BkfParams { a, b, m, n, p_star })
    }

    /// Parameters with `a m = b n`, i.e. `lambda = 1`, for `n` interacting traders.
    pub fn unit_lambda(n: f64, p_star: f64) -> Self {
        BkfParams { a: 1.0, b: 1.0, m: n, n, p_star }
    }

    pub fn lambda(&self) -> f64 {
        (self.b * self.n) / (self.a * self.m)
    }

    /// Log of the price at which fundamentalist and interacting demand balance.
    pub fn equilibrium_log_price(&self, magnetization: f64) -> f64 {
        self.p_star.ln() + self.lambda() * magnetization
    }

    pub fn equilibrium_price(&self, magnetization: f64) -> f64 {
        self.equilibrium_log_price(magnetization).exp()
    }
}

pub fn fundamentalist_demand(price: f64, params: &BkfParams) -> Result<f64, BaselineError> {
    if !(price > 0.0) {
        return Err(BaselineError::NonPositivePrice(price));
    }
    Ok(params.a * params.m * (params.p_star / price).ln())
}

/// Fundamentalist demand at a price given by its logarithm; stays finite
/// where the price itself would overflow.
pub fn fundamentalist_demand_at_log_price(log_price: f64, params: &BkfParams) -> f64 {
    params.a * params.m * (params.p_star.ln() - log_price)
}

pub fn interacting_demand(magnetization: f64, params: &BkfParams) -> f64 {
    params.b * params.n * magnetization
}

pub fn equilibrium_log_return(m_next: f64, m_now: f64, params: &BkfParams) -> f64 {
    params.lambda() * (m_next - m_now)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineOutput {
    /// `M(t)` for `t = 0..=T`.
    pub magnetization: Vec<f64>,
    /// `r_l(t) = lambda (M(t+1) - M(t))` for `t = 0..T`.
    pub log_returns: Vec<f64>,
}

/// Evolves the lattice by one sweep per period for `steps` periods.
pub fn run_baseline(
    lattice: LatticeParams,
    params: &BkfParams,
    steps: u64,
    seed: u64,
) -> BaselineOutput {
    let mut rng = stream_rng(seed, STREAM_BASELINE_LATTICE);
    let lat = SpinLattice::random(lattice, &mut rng);
    run_baseline_from(lat, params, steps, seed)
}

/// As [`run_baseline`], starting from a given lattice.
pub fn run_baseline_from(
    mut lattice: SpinLattice,
    params: &BkfParams,
    steps: u64,
    seed: u64,
) -> BaselineOutput {
    let mut rng = stream_rng(seed, STREAM_BASELINE_LATTICE + 1);
    let mut magnetization = Vec::with_capacity(steps as usize + 1);
    let mut log_returns = Vec::with_capacity(steps as usize);
    magnetization.push(lattice.magnetization());
    for _ in 0..steps {
        let m_now = lattice.magnetization();
        lattice.sweep(&mut rng);
        let m_next = lattice.magnetization();
        magnetization.push(m_next);
        log_returns.push(equilibrium_log_return(m_next, m_now, params));
    }
    BaselineOutput { magnetization, log_returns }
}
