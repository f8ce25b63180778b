//! Discrete-time event loop.
//!
//! Every step runs four phases in a fixed order:
//!
//! 1. expire resting orders with `expires_at <= t`,
//! 2. with probability `q_sweep`, sweep the spin lattice once,
//! 3. shuffle every trader due at `t` and let each act once,
//! 4. record the last traded price, the number of trades and `M(t)`.
//!
//! All randomness comes from one master seed split into independent ChaCha
//! streams, one per purpose, so a run is reproducible from `(config, seed)`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::agents::{self, BehaviorParams, TraderKind, TraderState};
use crate::config::{ConfigError, RunConfig};
use crate::lattice::SpinLattice;
use crate::orderbook::{OrderBook, OrderEvent, TickPrice, Trade, TraderId};

const STREAM_SHUFFLE: u64 = 0;
const STREAM_LATTICE: u64 = 1;
const STREAM_SWEEP_COIN: u64 = 2;
const STREAM_RANDOM: u64 = 3;
const STREAM_LIQUIDITY_TAKER: u64 = 4;
const STREAM_ISING: u64 = 5;

/// Opens stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct Streams {
    shuffle: ChaCha8Rng,
    lattice: ChaCha8Rng,
    sweep_coin: ChaCha8Rng,
    random: ChaCha8Rng,
    liquidity_taker: ChaCha8Rng,
    ising: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        Streams {
            shuffle: stream_rng(seed, STREAM_SHUFFLE),
            lattice: stream_rng(seed, STREAM_LATTICE),
            sweep_coin: stream_rng(seed, STREAM_SWEEP_COIN),
            random: stream_rng(seed, STREAM_RANDOM),
            liquidity_taker: stream_rng(seed, STREAM_LIQUIDITY_TAKER),
            ising: stream_rng(seed, STREAM_ISING),
        }
    }

    fn for_kind(&mut self, kind: TraderKind) -> &mut ChaCha8Rng {
        match kind {
            TraderKind::Random => &mut self.random,
            TraderKind::LiquidityTaker => &mut self.liquidity_taker,
            TraderKind::Ising => &mut self.ising,
        }
    }
}

/// Per-step series. `prices[t]` carries the last traded price forward when
/// nothing trades at `t`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriceSeries {
    pub prices: Vec<u64>,
    pub trades: Vec<u32>,
    pub magnetization: Vec<f64>,
    pub resting_orders: Vec<u32>,
}

impl PriceSeries {
    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub time: u64,
    pub price: TickPrice,
    pub trades: u32,
    pub magnetization: f64,
    pub swept: bool,
    pub expired: usize,
    pub actions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub steps: u64,
    pub final_price: u64,
    pub min_price: u64,
    pub max_price: u64,
    pub total_trades: u64,
    pub mean_trades_per_step: f64,
    pub sweeps: u64,
    pub first_sweep_step: Option<u64>,
    /// Q from the closed-form expression for this config.
    pub q_prediction: Option<f64>,
    /// Fraction of Ising traders that acted before the first sweep.
    pub realized_first_action_ratio: Option<f64>,
    pub final_resting_orders: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub series: PriceSeries,
    pub trades: Vec<Trade>,
    pub order_events: Vec<OrderEvent>,
    pub final_lattice: SpinLattice,
    pub summary: RunSummary,
}

pub struct Simulation {
    config: RunConfig,
    behavior: BehaviorParams,
    book: OrderBook,
    lattice: SpinLattice,
    traders: Vec<TraderState>,
    schedule: BTreeMap<u64, Vec<TraderId>>,
    streams: Streams,
    now: u64,
    series: PriceSeries,
    trades: Vec<Trade>,
    order_events: Vec<OrderEvent>,
    sweeps: u64,
    first_sweep: Option<u64>,
    acted_before_sweep: usize,
    ising_acted: Vec<bool>,
    ising_offset: usize,
    due: Vec<TraderId>,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let mut streams = Streams::new(config.seed);
        let lattice = SpinLattice::random(config.lattice_params(), &mut streams.lattice);
        let initial = TickPrice::new(config.p0).expect("validated p0");
        let mut book = OrderBook::new(initial);
        if config.order_events {
            book = book.with_event_log();
        }

        let mut traders = Vec::with_capacity(config.N_random + config.N_lt + config.N_ising);
        let kinds = [
            (TraderKind::Random, config.N_random),
            (TraderKind::LiquidityTaker, config.N_lt),
            (TraderKind::Ising, config.N_ising),
        ];
        let mut schedule: BTreeMap<u64, Vec<TraderId>> = BTreeMap::new();
        for (kind, count) in kinds {
            for k in 0..count {
                let id = traders.len() as TraderId;
                // every trader starts as if its previous action was at t = -1
                let next_action =
                    agents::draw_waiting_time(streams.for_kind(kind), count, config.c_for(kind)) - 1;
                traders.push(TraderState {
                    id,
                    kind,
                    next_action,
                    site: (kind == TraderKind::Ising).then_some(k),
                });
                schedule.entry(next_action).or_default().push(id);
            }
        }

        Ok(Simulation {
            behavior: config.behavior(),
            ising_offset: config.N_random + config.N_lt,
            ising_acted: vec![false; config.N_ising],
            book,
            lattice,
            traders,
            schedule,
            streams,
            now: 0,
            series: PriceSeries::default(),
            trades: Vec::new(),
            order_events: Vec::new(),
            sweeps: 0,
            first_sweep: None,
            acted_before_sweep: 0,
            due: Vec::new(),
            config,
        })
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn book(&self) -> &OrderBook {
        &self.book
    }

    pub fn lattice(&self) -> &SpinLattice {
        &self.lattice
    }

    pub fn traders(&self) -> &[TraderState] {
        &self.traders
    }

    pub fn series(&self) -> &PriceSeries {
        &self.series
    }

    pub fn trades(&self) -> &[Trade] {
        &self.trades
    }

    pub fn first_sweep(&self) -> Option<u64> {
        self.first_sweep
    }

    /// Fraction of Ising traders that acted before the first sweep, once a
    /// sweep has happened.
    pub fn realized_first_action_ratio(&self) -> Option<f64> {
        if self.config.N_ising == 0 {
            return None;
        }
        self.first_sweep
            .map(|_| self.acted_before_sweep as f64 / self.config.N_ising as f64)
    }

    pub fn step(&mut self) -> StepReport {
        self.step_observed(|_, _, _| {})
    }

    /// Runs one step, calling `observe(trader, order_side_request, lattice)`
    /// just before each order is submitted.
    pub fn step_observed<F>(&mut self, mut observe: F) -> StepReport
    where
        F: FnMut(&TraderState, &crate::orderbook::OrderRequest, &SpinLattice),
    {
        let t = self.now;

        let expired = self.book.expire(t).len();

        let swept = self.config.q_sweep > 0.0
            && !self.lattice.is_empty()
            && self.streams.sweep_coin.random_bool(self.config.q_sweep);
        if swept {
            self.lattice.sweep(&mut self.streams.lattice);
            self.sweeps += 1;
            self.first_sweep.get_or_insert(t);
        }

        let mut due = std::mem::take(&mut self.due);
        due.clear();
        while let Some(entry) = self.schedule.first_entry() {
            if *entry.key() > t {
                break;
            }
            due.extend(entry.remove());
        }
        due.sort_unstable();
        due.shuffle(&mut self.streams.shuffle);

        let mut step_trades = 0u32;
        for &id in &due {
            let trader = self.traders[id as usize];
            let rng = self.streams.for_kind(trader.kind);
            let request = match trader.kind {
                TraderKind::Random => agents::random_trader_act(
                    &trader,
                    &self.book,
                    &self.behavior,
                    self.config.price_reference,
                    rng,
                ),
                TraderKind::LiquidityTaker => {
                    agents::liquidity_taker_act(&trader, &self.behavior, rng)
                }
                TraderKind::Ising => {
                    agents::ising_trader_act(&trader, &self.lattice, &self.behavior, rng)
                }
            };
            observe(&trader, &request, &self.lattice);
            let fills = self.book.submit(request, t);
            step_trades += fills.len() as u32;
            self.trades.extend(fills);

            if trader.kind == TraderKind::Ising && self.first_sweep.is_none() {
                let k = id as usize - self.ising_offset;
                if !std::mem::replace(&mut self.ising_acted[k], true) {
                    self.acted_before_sweep += 1;
                }
            }

            let count = self.kind_count(trader.kind);
            let wait = agents::draw_waiting_time(
                self.streams.for_kind(trader.kind),
                count,
                self.config.c_for(trader.kind),
            );
            let next = t + wait;
            self.traders[id as usize].next_action = next;
            self.schedule.entry(next).or_default().push(id);
        }
        let actions = due.len();
        self.due = due;

        if self.config.order_events {
            self.order_events.extend(self.book.take_events());
        }

        let price = self.book.last_trade_price();
        let magnetization = self.lattice.magnetization();
        self.series.prices.push(price.ticks());
        self.series.trades.push(step_trades);
        self.series.magnetization.push(magnetization);
        self.series.resting_orders.push(self.book.resting_count() as u32);
        self.now += 1;

        StepReport {
            time: t,
            price,
            trades: step_trades,
            magnetization,
            swept,
            expired,
            actions,
        }
    }

    fn kind_count(&self, kind: TraderKind) -> usize {
        match kind {
            TraderKind::Random => self.config.N_random,
            TraderKind::LiquidityTaker => self.config.N_lt,
            TraderKind::Ising => self.config.N_ising,
        }
    }

    /// Steps until `T` is reached.
    pub fn run_to_end(&mut self) {
        while self.now < self.config.T {
            self.step();
        }
    }

    pub fn summary(&self) -> RunSummary {
        let total_trades = self.trades.len() as u64;
        let steps = self.series.len() as u64;
        let q_prediction = (self.config.N_ising > 0 && self.config.q_sweep > 0.0)
            .then(|| first_action_ratio_closed_form(self.config.q_sweep, self.config.mu_wt_ising()));
        RunSummary {
            seed: self.config.seed,
            steps,
            final_price: self.book.last_trade_price().ticks(),
            min_price: self.series.prices.iter().copied().min().unwrap_or(self.config.p0),
            max_price: self.series.prices.iter().copied().max().unwrap_or(self.config.p0),
            total_trades,
            mean_trades_per_step: if steps == 0 { 0.0 } else { total_trades as f64 / steps as f64 },
            sweeps: self.sweeps,
            first_sweep_step: self.first_sweep,
            q_prediction,
            realized_first_action_ratio: self.realized_first_action_ratio(),
            final_resting_orders: self.book.resting_count(),
        }
    }

    pub fn into_output(self) -> RunOutput {
        let summary = self.summary();
        RunOutput {
            config: self.config,
            series: self.series,
            trades: self.trades,
            order_events: self.order_events,
            final_lattice: self.lattice,
            summary,
        }
    }
}

/// Runs a full simulation of `config.T` steps.
pub fn run(config: &RunConfig) -> Result<RunOutput, ConfigError> {
    let mut sim = Simulation::new(config.clone())?;
    sim.run_to_end();
    Ok(sim.into_output())
}

/// Runs `runs` copies of `config` with seeds `seed_base + i`, in parallel.
/// Results are returned in run-index order.
pub fn run_batch(config: &RunConfig, runs: usize, seed_base: u64) -> Result<Vec<RunOutput>, ConfigError> {
    config.validate()?;
    (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut cfg = config.clone();
            cfg.seed = seed_base.wrapping_add(i as u64);
            run(&cfg)
        })
        .collect()
}

const Q_TAIL_BOUND: f64 = 1e-12;

/// Expected fraction of Ising traders acting before the first lattice sweep,
/// by direct summation over the step of the first sweep:
/// `sum_n q (1-q)^(n-1) (1 - exp(-(n-1)/mu))`, truncated once the remaining
/// probability mass `(1-q)^n` drops below 1e-12.
pub fn first_action_ratio(q_sweep: f64, mu_wt_ising: f64) -> f64 {
    assert!(q_sweep > 0.0 && q_sweep <= 1.0, "q_sweep must lie in (0, 1]");
    assert!(mu_wt_ising > 0.0, "mu_wt_ising must be positive");
    let survive = 1.0 - q_sweep;
    let mut weight = q_sweep;
    let mut tail = 1.0;
    let mut sum = 0.0;
    let mut compensation = 0.0;
    let mut k = 0u64;
    loop {
        let term = weight * -(-(k as f64) / mu_wt_ising).exp_m1();
        // Kahan summation keeps long series accurate
        let y = term - compensation;
        let s = sum + y;
        compensation = (s - sum) - y;
        sum = s;
        tail *= survive;
        if tail < Q_TAIL_BOUND {
            break;
        }
        weight *= survive;
        k += 1;
    }
    sum
}

/// Closed form of [`first_action_ratio`]: `1 - q / (1 - (1-q) e^(-1/mu))`.
pub fn first_action_ratio_closed_form(q_sweep: f64, mu_wt_ising: f64) -> f64 {
    let decay = (-1.0 / mu_wt_ising).exp();
    1.0 - q_sweep / (1.0 - (1.0 - q_sweep) * decay)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub c: f64,
    pub trades_per_step: f64,
    pub iterations: usize,
}

/// Mean trades per step after `config.warmup`.
pub fn measured_trade_rate(config: &RunConfig) -> Result<f64, ConfigError> {
    let out = run(config)?;
    let skip = (config.warmup as usize).min(out.series.len());
    let tail = &out.series.trades[skip..];
    if tail.is_empty() {
        return Ok(0.0);
    }
    Ok(tail.iter().map(|&n| n as f64).sum::<f64>() / tail.len() as f64)
}

/// Bisects `c` on a log scale until the measured trade rate is within
/// `rel_tol` of `target`. The trade rate falls as `c` grows.
pub fn calibrate_c(base: &RunConfig, target: f64, rel_tol: f64) -> Result<Calibration, ConfigError> {
    let rate_at = |c: f64| {
        let mut cfg = base.clone();
        cfg.c = c;
        measured_trade_rate(&cfg)
    };
    let (mut lo, mut hi) = (1e-3f64, 1e3f64);
    let mut best = Calibration { c: base.c, trades_per_step: f64::NAN, iterations: 0 };
    for iteration in 1..=60 {
        let mid = (lo.ln() * 0.5 + hi.ln() * 0.5).exp();
        let rate = rate_at(mid)?;
        best = Calibration { c: mid, trades_per_step: rate, iterations: iteration };
        if (rate / target - 1.0).abs() <= rel_tol {
            break;
        }
        if rate > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}
