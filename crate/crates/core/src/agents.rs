//! Trader behaviours.
//!
//! * `Random` traders place limit orders with Gaussian price offsets around a
//!   reference price and exponentially distributed volume and lifetime.
//! * `LiquidityTaker`s place market orders on a fair coin.
//! * `Ising` traders place market orders whose side is the spin at their site.
//!
//! All continuous draws are rounded up to integers with a floor of one.

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::lattice::SpinLattice;
use crate::orderbook::{OrderBook, OrderRequest, RequestKind, Side, TickPrice, TraderId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraderKind {
    Random,
    LiquidityTaker,
    Ising,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraderState {
    pub id: TraderId,
    pub kind: TraderKind,
    pub next_action: u64,
    /// Lattice site, for Ising traders only.
    pub site: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BehaviorParams {
    pub mu_vol: f64,
    pub sigma_price: f64,
    pub mu_lt: f64,
    pub c: f64,
}

/// Which book price a random trader centres its limit price on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceReference {
    /// Best bid for buys, best ask for sells.
    #[default]
    OwnSide,
    /// Best ask for buys, best bid for sells.
    OppositeSide,
}

/// Exponential variate with the given mean, before rounding.
pub fn sample_exponential<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    Exp::new(1.0 / mean)
        .expect("exponential mean must be positive")
        .sample(rng)
}

/// `ceil(x)`, at least 1.
pub fn ceil_at_least_one(x: f64) -> u64 {
    let c = x.ceil();
    if c.is_nan() || c < 1.0 {
        1
    } else {
        c as u64
    }
}

/// Waiting time until a trader's next action: exponential with mean
/// `c * n_of_kind`, rounded up to a whole step.
pub fn draw_waiting_time<R: Rng + ?Sized>(rng: &mut R, n_of_kind: usize, c: f64) -> u64 {
    debug_assert!(n_of_kind >= 1 && c > 0.0);
    ceil_at_least_one(sample_exponential(rng, c * n_of_kind as f64))
}

pub fn draw_volume<R: Rng + ?Sized>(rng: &mut R, mu_vol: f64) -> u64 {
    ceil_at_least_one(sample_exponential(rng, mu_vol))
}

fn draw_side<R: Rng + ?Sized>(rng: &mut R) -> Side {
    if rng.random_bool(0.5) {
        Side::Buy
    } else {
        Side::Sell
    }
}

/// Reference price for a limit order on `side`. Falls back to the opposite
/// best, then the last traded price (which starts at the initial price).
pub fn reference_price(book: &OrderBook, side: Side, reference: PriceReference) -> TickPrice {
    let (first, second) = match reference {
        PriceReference::OwnSide => (side, side.opposite()),
        PriceReference::OppositeSide => (side.opposite(), side),
    };
    book.best(first)
        .or_else(|| book.best(second))
        .unwrap_or_else(|| book.last_trade_price())
}

pub fn random_trader_act<R: Rng + ?Sized>(
    state: &TraderState,
    book: &OrderBook,
    params: &BehaviorParams,
    reference: PriceReference,
    rng: &mut R,
) -> OrderRequest {
    let side = draw_side(rng);
    let offset = Normal::new(0.0, params.sigma_price)
        .expect("sigma_price must be finite and non-negative")
        .sample(rng);
    let centre = reference_price(book, side, reference).ticks() as f64;
    let price = TickPrice::from_f64_clamped(centre + offset);
    let volume = draw_volume(rng, params.mu_vol);
    let lifetime = ceil_at_least_one(sample_exponential(rng, params.mu_lt));
    OrderRequest {
        trader_id: state.id,
        side,
        volume,
        kind: RequestKind::Limit { price, lifetime },
    }
}

pub fn liquidity_taker_act<R: Rng + ?Sized>(
    state: &TraderState,
    params: &BehaviorParams,
    rng: &mut R,
) -> OrderRequest {
    let side = draw_side(rng);
    OrderRequest {
        trader_id: state.id,
        side,
        volume: draw_volume(rng, params.mu_vol),
        kind: RequestKind::Market,
    }
}

pub fn ising_trader_act<R: Rng + ?Sized>(
    state: &TraderState,
    lattice: &SpinLattice,
    params: &BehaviorParams,
    rng: &mut R,
) -> OrderRequest {
    let site = state.site.expect("Ising trader without a lattice site");
    let side = if lattice.spin(site) > 0 { Side::Buy } else { Side::Sell };
    OrderRequest {
        trader_id: state.id,
        side,
        volume: draw_volume(rng, params.mu_vol),
        kind: RequestKind::Market,
    }
}
