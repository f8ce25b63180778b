//! Reference limit order book: a flat vector scanned linearly.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaiveOrder {
    pub id: u64,
    pub trader: u32,
    pub buy: bool,
    pub price: u64,
    pub volume: u64,
    pub expires_at: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaiveTrade {
    pub time: u64,
    pub price: u64,
    pub volume: u64,
    pub buy_trader: u32,
    pub sell_trader: u32,
    pub buy_order: u64,
    pub sell_order: u64,
}

pub struct NaiveBook {
    pub orders: Vec<NaiveOrder>,
    pub last_price: u64,
    next_id: u64,
}

impl NaiveBook {
    pub fn new(last_price: u64) -> Self {
        NaiveBook { orders: Vec::new(), last_price, next_id: 0 }
    }

    /// Index of the best resting order on the given side: highest bid or
    /// lowest ask, earliest id on ties.
    fn best(&self, buy: bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, o) in self.orders.iter().enumerate() {
            if o.buy != buy {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(j) => {
                    let b = &self.orders[j];
                    let better = if buy { o.price > b.price } else { o.price < b.price };
                    if better || (o.price == b.price && o.id < b.id) {
                        Some(i)
                    } else {
                        Some(j)
                    }
                }
            };
        }
        best
    }

    pub fn best_price(&self, buy: bool) -> Option<u64> {
        self.best(buy).map(|i| self.orders[i].price)
    }

    /// Submits an order; `limit = None` is a market order. Returns the trades
    /// and the id given to the order.
    pub fn submit(
        &mut self,
        trader: u32,
        buy: bool,
        volume: u64,
        limit: Option<(u64, u64)>,
        now: u64,
    ) -> (Vec<NaiveTrade>, u64) {
        let id = self.next_id;
        self.next_id += 1;
        let mut remaining = volume;
        let mut trades = Vec::new();
        while remaining > 0 {
            let Some(i) = self.best(!buy) else { break };
            let resting = self.orders[i];
            if let Some((price, _)) = limit {
                let crosses = if buy { price >= resting.price } else { price <= resting.price };
                if !crosses {
                    break;
                }
            }
            let fill = remaining.min(resting.volume);
            remaining -= fill;
            self.orders[i].volume -= fill;
            let (buy_trader, sell_trader, buy_order, sell_order) = if buy {
                (trader, resting.trader, id, resting.id)
            } else {
                (resting.trader, trader, resting.id, id)
            };
            trades.push(NaiveTrade {
                time: now,
                price: resting.price,
                volume: fill,
                buy_trader,
                sell_trader,
                buy_order,
                sell_order,
            });
            self.last_price = resting.price;
            if self.orders[i].volume == 0 {
                self.orders.remove(i);
            }
        }
        if let (Some((price, lifetime)), true) = (limit, remaining > 0) {
            self.orders.push(NaiveOrder {
                id,
                trader,
                buy,
                price,
                volume: remaining,
                expires_at: now + lifetime,
            });
        }
        (trades, id)
    }

    /// Removes orders with `expires_at <= now`, in (expiry, id) order.
    pub fn expire(&mut self, now: u64) -> Vec<NaiveOrder> {
        let mut gone: Vec<NaiveOrder> = self.orders.iter().copied().filter(|o| o.expires_at <= now).collect();
        self.orders.retain(|o| o.expires_at > now);
        gone.sort_by_key(|o| (o.expires_at, o.id));
        gone
    }

    pub fn volume(&self) -> u64 {
        self.orders.iter().map(|o| o.volume).sum()
    }
}
