//! Tick-discretized double-auction limit order book.
//!
//! Both sides are kept in strict price-time priority. Incoming orders are
//! matched on arrival for as long as they are marketable; every fill executes
//! at the resting order's limit price. Limit orders carry an expiry step and
//! are removed by [`OrderBook::expire`] before any trading at that step.

use std::collections::BTreeMap;
use std::fmt;

pub type OrderId = u64;
pub type TraderId = u32;

/// Price expressed in integer ticks. Always at least one tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TickPrice(u64);

impl TickPrice {
    pub const MIN: TickPrice = TickPrice(1);

    pub fn new(ticks: u64) -> Option<Self> {
        (ticks >= 1).then_some(TickPrice(ticks))
    }

    /// Rounds a real-valued tick quote to the nearest tick, clamped to one tick.
    pub fn from_f64_clamped(ticks: f64) -> Self {
        let rounded = ticks.round();
        if rounded.is_nan() || rounded < 1.0 {
            TickPrice::MIN
        } else if rounded >= u64::MAX as f64 {
            TickPrice(u64::MAX)
        } else {
            TickPrice(rounded as u64)
        }
    }

    pub fn ticks(self) -> u64 {
        self.0
    }
}

impl fmt::Display for TickPrice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    Limit { price: TickPrice, expires_at: u64 },
    Market,
}

impl OrderKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrderKind::Limit { .. } => "limit",
            OrderKind::Market => "market",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Order {
    pub id: OrderId,
    pub trader_id: TraderId,
    pub side: Side,
    pub kind: OrderKind,
    pub volume: u64,
    pub placed_at: u64,
    /// Arrival counter; lower values have time priority.
    pub seq: u64,
}

impl Order {
    pub fn limit_price(&self) -> Option<TickPrice> {
        match self.kind {
            OrderKind::Limit { price, .. } => Some(price),
            OrderKind::Market => None,
        }
    }
}

/// What a trader hands to the book before it is stamped with id and sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderRequest {
    pub trader_id: TraderId,
    pub side: Side,
    pub volume: u64,
    pub kind: RequestKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequestKind {
    Limit { price: TickPrice, lifetime: u64 },
    Market,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trade {
    pub time: u64,
    pub price: TickPrice,
    pub volume: u64,
    pub buy_trader: TraderId,
    pub sell_trader: TraderId,
    pub buy_order: OrderId,
    pub sell_order: OrderId,
}

/// A limit order sitting in the book.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RestingOrder {
    pub id: OrderId,
    pub trader_id: TraderId,
    pub side: Side,
    pub price: TickPrice,
    pub volume: u64,
    pub placed_at: u64,
    pub expires_at: u64,
    pub seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderEventKind {
    Place,
    Fill,
    Rest,
    Expire,
    Cancel,
}

impl OrderEventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OrderEventKind::Place => "place",
            OrderEventKind::Fill => "fill",
            OrderEventKind::Rest => "rest",
            OrderEventKind::Expire => "expire",
            OrderEventKind::Cancel => "cancel",
        }
    }
}

/// One row of the optional order-event log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderEvent {
    pub time: u64,
    pub event: OrderEventKind,
    pub order_id: OrderId,
    pub side: Side,
    pub market: bool,
    pub price: Option<TickPrice>,
    pub volume: u64,
}

// Bids sort by descending price, asks by ascending price; ties by seq.
type LevelKey = (u64, u64);

#[derive(Debug, Clone, Default)]
struct BookSide {
    orders: BTreeMap<LevelKey, RestingOrder>,
    volume: u64,
}

impl BookSide {
    fn key(side: Side, price: TickPrice, seq: u64) -> LevelKey {
        match side {
            Side::Buy => (u64::MAX - price.ticks(), seq),
            Side::Sell => (price.ticks(), seq),
        }
    }

    fn best(&self) -> Option<&RestingOrder> {
        self.orders.values().next()
    }
}

#[derive(Debug, Clone)]
pub struct OrderBook {
    bids: BookSide,
    asks: BookSide,
    expiry: BTreeMap<(u64, u64), (Side, TickPrice)>,
    last_trade_price: TickPrice,
    next_seq: u64,
    events: Option<Vec<OrderEvent>>,
}

impl OrderBook {
    pub fn new(initial_price: TickPrice) -> Self {
        OrderBook {
            bids: BookSide::default(),
            asks: BookSide::default(),
            expiry: BTreeMap::new(),
            last_trade_price: initial_price,
            next_seq: 0,
            events: None,
        }
    }

    /// Turns on the order-event log. Events accumulate until drained.
    pub fn with_event_log(mut self) -> Self {
        self.events = Some(Vec::new());
        self
    }

    pub fn take_events(&mut self) -> Vec<OrderEvent> {
        self.events.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn last_trade_price(&self) -> TickPrice {
        self.last_trade_price
    }

    pub fn best_bid(&self) -> Option<TickPrice> {
        self.bids.best().map(|o| o.price)
    }

    pub fn best_ask(&self) -> Option<TickPrice> {
        self.asks.best().map(|o| o.price)
    }

    pub fn best(&self, side: Side) -> Option<TickPrice> {
        match side {
            Side::Buy => self.best_bid(),
            Side::Sell => self.best_ask(),
        }
    }

    /// Mean of best bid and best ask, ties rounded up to the next tick.
    pub fn midpoint(&self) -> Option<TickPrice> {
        let (bid, ask) = (self.best_bid()?, self.best_ask()?);
        let sum = bid.ticks() + ask.ticks();
        TickPrice::new(sum / 2 + sum % 2)
    }

    pub fn resting_count(&self) -> usize {
        self.bids.orders.len() + self.asks.orders.len()
    }

    pub fn resting_volume(&self, side: Side) -> u64 {
        self.side(side).volume
    }

    /// Resting orders of one side in priority order.
    pub fn resting(&self, side: Side) -> impl Iterator<Item = &RestingOrder> + '_ {
        self.side(side).orders.values()
    }

    /// Stamps a request with the next id/sequence number and routes it.
    pub fn submit(&mut self, request: OrderRequest, now: u64) -> Vec<Trade> {
        let seq = self.next_seq;
        let kind = match request.kind {
            RequestKind::Limit { price, lifetime } => OrderKind::Limit {
                price,
                expires_at: now.saturating_add(lifetime),
            },
            RequestKind::Market => OrderKind::Market,
        };
        let order = Order {
            id: seq,
            trader_id: request.trader_id,
            side: request.side,
            kind,
            volume: request.volume,
            placed_at: now,
            seq,
        };
        match kind {
            OrderKind::Limit { .. } => self.place_limit(order),
            OrderKind::Market => self.place_market(order),
        }
    }

    /// Matches a limit order while marketable, then rests the remainder.
    ///
    /// Market orders passed here are routed to [`OrderBook::place_market`].
    pub fn place_limit(&mut self, order: Order) -> Vec<Trade> {
        let OrderKind::Limit { price, expires_at } = order.kind else {
            return self.place_market(order);
        };
        debug_assert!(order.volume > 0);
        self.next_seq = self.next_seq.max(order.seq + 1);
        self.log(order.placed_at, OrderEventKind::Place, &order, order.volume);

        let mut trades = Vec::new();
        let remaining = self.match_against(&order, Some(price), &mut trades);
        if remaining > 0 {
            let resting = RestingOrder {
                id: order.id,
                trader_id: order.trader_id,
                side: order.side,
                price,
                volume: remaining,
                placed_at: order.placed_at,
                expires_at,
                seq: order.seq,
            };
            let side = self.side_mut(order.side);
            side.orders
                .insert(BookSide::key(order.side, price, order.seq), resting);
            side.volume += remaining;
            self.expiry.insert((expires_at, order.seq), (order.side, price));
            self.log(order.placed_at, OrderEventKind::Rest, &order, remaining);
        }
        trades
    }

    /// Walks the opposite side until the order is filled or the side is
    /// empty. Any unfilled remainder is cancelled.
    pub fn place_market(&mut self, order: Order) -> Vec<Trade> {
        debug_assert!(order.volume > 0);
        self.next_seq = self.next_seq.max(order.seq + 1);
        self.log(order.placed_at, OrderEventKind::Place, &order, order.volume);

        let mut trades = Vec::new();
        let remaining = self.match_against(&order, None, &mut trades);
        if remaining > 0 {
            if trades.is_empty() {
                log::debug!(
                    "market {} order {} found empty opposite side at t={}",
                    order.side.as_str(),
                    order.id,
                    order.placed_at
                );
            }
            self.log(order.placed_at, OrderEventKind::Cancel, &order, remaining);
        }
        trades
    }

    /// Removes every resting order with `expires_at <= now`.
    pub fn expire(&mut self, now: u64) -> Vec<RestingOrder> {
        let mut removed = Vec::new();
        while let Some(entry) = self.expiry.first_entry() {
            let (expires_at, seq) = *entry.key();
            if expires_at > now {
                break;
            }
            let (side, price) = entry.remove();
            let book_side = self.side_mut(side);
            if let Some(order) = book_side.orders.remove(&BookSide::key(side, price, seq)) {
                book_side.volume -= order.volume;
                removed.push(order);
            }
        }
        if self.events.is_some() {
            for order in &removed {
                self.push_event(OrderEvent {
                    time: now,
                    event: OrderEventKind::Expire,
                    order_id: order.id,
                    side: order.side,
                    market: false,
                    price: Some(order.price),
                    volume: order.volume,
                });
            }
        }
        removed
    }

    fn match_against(
        &mut self,
        order: &Order,
        limit: Option<TickPrice>,
        trades: &mut Vec<Trade>,
    ) -> u64 {
        let mut remaining = order.volume;
        let resting_side = order.side.opposite();
        while remaining > 0 {
            let book_side = self.side_mut(resting_side);
            let Some(mut entry) = book_side.orders.first_entry() else {
                break;
            };
            let best = *entry.get();
            let marketable = match (order.side, limit) {
                (_, None) => true,
                (Side::Buy, Some(p)) => p >= best.price,
                (Side::Sell, Some(p)) => p <= best.price,
            };
            if !marketable {
                break;
            }
            let fill = remaining.min(best.volume);
            remaining -= fill;
            book_side.volume -= fill;
            if fill == best.volume {
                entry.remove();
                self.expiry.remove(&(best.expires_at, best.seq));
            } else {
                entry.get_mut().volume -= fill;
            }
            let (buy, sell) = match order.side {
                Side::Buy => ((order.trader_id, order.id), (best.trader_id, best.id)),
                Side::Sell => ((best.trader_id, best.id), (order.trader_id, order.id)),
            };
            trades.push(Trade {
                time: order.placed_at,
                price: best.price,
                volume: fill,
                buy_trader: buy.0,
                sell_trader: sell.0,
                buy_order: buy.1,
                sell_order: sell.1,
            });
            self.last_trade_price = best.price;
            if self.events.is_some() {
                self.push_event(OrderEvent {
                    time: order.placed_at,
                    event: OrderEventKind::Fill,
                    order_id: best.id,
                    side: best.side,
                    market: false,
                    price: Some(best.price),
                    volume: fill,
                });
            }
        }
        remaining
    }

    fn log(&mut self, time: u64, event: OrderEventKind, order: &Order, volume: u64) {
        if self.events.is_some() {
            self.push_event(OrderEvent {
                time,
                event,
                order_id: order.id,
                side: order.side,
                market: matches!(order.kind, OrderKind::Market),
                price: order.limit_price(),
                volume,
            });
        }
    }

    fn push_event(&mut self, event: OrderEvent) {
        if let Some(events) = self.events.as_mut() {
            events.push(event);
        }
    }

    fn side(&self, side: Side) -> &BookSide {
        match side {
            Side::Buy => &self.bids,
            Side::Sell => &self.asks,
        }
    }

    fn side_mut(&mut self, side: Side) -> &mut BookSide {
        match side {
            Side::Buy => &mut self.bids,
            Side::Sell => &mut self.asks,
        }
    }
}
