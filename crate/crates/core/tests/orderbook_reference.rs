mod common;

use common::naive_book::{NaiveBook, NaiveTrade};
use proptest::prelude::*;
use spinbook::orderbook::{OrderBook, OrderRequest, RequestKind, Side, TickPrice};

#[derive(Debug, Clone)]
enum Op {
    Advance(u64),
    Limit { buy: bool, trader: u32, volume: u64, price: u64, lifetime: u64 },
    Market { buy: bool, trader: u32, volume: u64 },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (1..4u64).prop_map(Op::Advance),
        (any::<bool>(), 0..8u32, 1..30u64, 95..106u64, 1..20u64)
            .prop_map(|(buy, trader, volume, price, lifetime)| Op::Limit { buy, trader, volume, price, lifetime }),
        (any::<bool>(), 0..8u32, 1..50u64).prop_map(|(buy, trader, volume)| Op::Market { buy, trader, volume }),
    ]
}

fn side(buy: bool) -> Side {
    if buy { Side::Buy } else { Side::Sell }
}

proptest! {
    #[test]
    fn matches_reference_book(ops in prop::collection::vec(op(), 1..300)) {
        let mut book = OrderBook::new(TickPrice::new(100).unwrap());
        let mut naive = NaiveBook::new(100);
        let mut now = 0;
        for op in ops {
            match op {
                Op::Advance(d) => {
                    now += d;
                    let a: Vec<u64> = book.expire(now).iter().map(|o| o.id).collect();
                    let b: Vec<u64> = naive.expire(now).iter().map(|o| o.id).collect();
                    prop_assert_eq!(a, b);
                }
                Op::Limit { buy, trader, volume, price, lifetime } => {
                    let kind = RequestKind::Limit { price: TickPrice::new(price).unwrap(), lifetime };
                    let got = book.submit(OrderRequest { trader_id: trader, side: side(buy), volume, kind }, now);
                    let (want, _) = naive.submit(trader, buy, volume, Some((price, lifetime)), now);
                    let got: Vec<_> = got.iter().map(|t| (t.price.ticks(), t.volume, t.buy_order, t.sell_order)).collect();
                    let want: Vec<_> = want.iter().map(|t: &NaiveTrade| (t.price, t.volume, t.buy_order, t.sell_order)).collect();
                    prop_assert_eq!(got, want);
                }
                Op::Market { buy, trader, volume } => {
                    let req = OrderRequest { trader_id: trader, side: side(buy), volume, kind: RequestKind::Market };
                    let got = book.submit(req, now);
                    let (want, _) = naive.submit(trader, buy, volume, None, now);
                    prop_assert_eq!(got.len(), want.len());
                    prop_assert!(got.iter().zip(&want).all(|(a, b)| a.price.ticks() == b.price && a.volume == b.volume));
                }
            }
            prop_assert_eq!(book.best_bid().map(|p| p.ticks()), naive.best_price(true));
            prop_assert_eq!(book.best_ask().map(|p| p.ticks()), naive.best_price(false));
            prop_assert_eq!(book.last_trade_price().ticks(), naive.last_price);
            prop_assert_eq!(book.resting_volume(Side::Buy) + book.resting_volume(Side::Sell), naive.volume());
            if let (Some(b), Some(a)) = (book.best_bid(), book.best_ask()) {
                prop_assert!(b < a);
            }
        }
    }
}
