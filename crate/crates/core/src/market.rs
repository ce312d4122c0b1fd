//! Variable-price extension.
//!
//! Every agent has the same linear curves. As a buyer holding balance `A`:
//! `p = 2 - K (h - e A)`; as a seller: `p = K (h + e A)`. Setting them equal
//! for buyer `i` and seller `j` gives the pair's quote
//! `h = 1/K + e (A_i - A_j) / 2`, `p = 1 + K e (A_i + A_j) / 2`.
//! The week's market price is the mean quote over all drawn pairs; each buyer
//! then takes `2/K + e A_i - p/K` hours at that price.

use crate::economy::{EconomyState, SimParams, WeekRecord};
use crate::engine::{self, Pricing, Trade};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Equilibrium of one buyer-seller pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairQuote {
    pub buyer: usize,
    pub seller: usize,
    pub hours: f64,
    pub price: f64,
}

pub fn buyer_price(hours: f64, balance: f64, k_slope: f64, e_sensitivity: f64) -> f64 {
    2.0 - k_slope * (hours - e_sensitivity * balance)
}

pub fn seller_price(hours: f64, balance: f64, k_slope: f64, e_sensitivity: f64) -> f64 {
    k_slope * (hours + e_sensitivity * balance)
}

/// Quantity and price on which both curves agree.
pub fn pair_quote(
    buyer_balance: f64,
    seller_balance: f64,
    k_slope: f64,
    e_sensitivity: f64,
) -> Result<(f64, f64)> {
    if k_slope.is_nan() || k_slope <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "price slope must be positive, got {k_slope}"
        )));
    }
    let hours = 1.0 / k_slope + e_sensitivity * (buyer_balance - seller_balance) / 2.0;
    let price = 1.0 + k_slope * e_sensitivity * (buyer_balance + seller_balance) / 2.0;
    Ok((hours, price))
}

/// Quotes for every `(i, sellers[i])` pair, from the given balances.
pub fn quote_pairs(
    balances: &[f64],
    sellers: &[usize],
    params: &SimParams,
) -> Result<Vec<PairQuote>> {
    sellers
        .iter()
        .enumerate()
        .map(|(buyer, &seller)| {
            let (hours, price) = pair_quote(
                balances[buyer],
                balances[seller],
                params.k_slope,
                params.e_sensitivity,
            )?;
            Ok(PairQuote {
                buyer,
                seller,
                hours,
                price,
            })
        })
        .collect()
}

/// Mean quoted price.
pub fn weekly_market_price(quotes: &[PairQuote]) -> Result<f64> {
    if quotes.is_empty() {
        return Err(Error::EmptyMarket);
    }
    Ok(quotes.iter().map(|q| q.price).sum::<f64>() / quotes.len() as f64)
}

/// Hours a buyer takes at price `p`, never negative.
pub fn demand_at_price(balance: f64, price: f64, k_slope: f64, e_sensitivity: f64) -> f64 {
    (2.0 / k_slope + e_sensitivity * balance - price / k_slope).max(0.0)
}

/// Advance one market-price week and also return the executed trades.
pub fn market_step_week_traced(
    state: &mut EconomyState,
    rng: &mut Rng,
    params: &SimParams,
) -> (WeekRecord, Vec<Trade>) {
    let sellers = engine::assign_sellers(state.accounts.len(), rng).expect("validated params");
    let opening = state.accounts.clone();
    let price = quote_pairs(&opening, &sellers, params)
        .and_then(|q| weekly_market_price(&q))
        // no pairs means no trade; the price is only a placeholder
        .unwrap_or(1.0);
    let pricing = Pricing::Market {
        price,
        opening: &opening,
    };
    let round = engine::purchase_round(state, &sellers, rng, params, &pricing);
    let tax_revenue = engine::volume_tax_revenue(&round, params);
    let record = engine::close_week(state, rng, params, &round, tax_revenue, Some(price));
    (record, round.trades)
}

/// Advance one market-price week.
pub fn market_step_week(state: &mut EconomyState, rng: &mut Rng, params: &SimParams) -> WeekRecord {
    market_step_week_traced(state, rng, params).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::PriceMode;
    use crate::rng::Rng;
    use proptest::prelude::*;

    const K: f64 = 0.2;
    const E: f64 = 0.1;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn curves_meet_at_one_dollar_five_hours() {
        assert_eq!(buyer_price(5.0, 0.0, K, E), 1.0);
        assert_eq!(seller_price(5.0, 0.0, K, E), 1.0);
        assert_eq!(buyer_price(0.0, 0.0, K, E), 2.0);
        assert_eq!(seller_price(0.0, 0.0, K, E), 0.0);
        assert!(close(buyer_price(5.0, 10.0, K, E), 1.2));
        assert!(close(seller_price(5.0, 10.0, K, E), 1.2));
    }

    #[test]
    fn pair_quotes() {
        assert_eq!(pair_quote(0.0, 0.0, K, E).unwrap(), (5.0, 1.0));
        let (h, p) = pair_quote(10.0, 0.0, K, E).unwrap();
        assert!(close(h, 5.5) && close(p, 1.1));
        let (h, p) = pair_quote(10.0, -10.0, K, E).unwrap();
        assert!(close(h, 6.0));
        assert_eq!(p, 1.0);
        assert!(pair_quote(0.0, 0.0, 0.0, E).is_err());
        assert!(pair_quote(0.0, 0.0, -1.0, E).is_err());
    }

    fn quote(a: f64, b: f64) -> PairQuote {
        let (hours, price) = pair_quote(a, b, K, E).unwrap();
        PairQuote {
            buyer: 0,
            seller: 1,
            hours,
            price,
        }
    }

    #[test]
    fn market_price_is_the_mean_quote() {
        assert_eq!(weekly_market_price(&[quote(0.0, 0.0)]).unwrap(), 1.0);
        let p = weekly_market_price(&[quote(10.0, 0.0), quote(0.0, 10.0)]).unwrap();
        assert!(close(p, 1.1));
        let p = weekly_market_price(&[quote(10.0, -10.0), quote(-10.0, 10.0)]).unwrap();
        assert_eq!(p, 1.0);
        assert!(matches!(weekly_market_price(&[]), Err(Error::EmptyMarket)));
    }

    #[test]
    fn demand_examples() {
        assert_eq!(demand_at_price(0.0, 1.0, K, E), 5.0);
        assert_eq!(demand_at_price(0.0, 2.0, K, E), 0.0);
        assert!(close(demand_at_price(10.0, 1.0, K, E), 6.0));
        assert!(close(demand_at_price(-10.0, 1.0, K, E), 4.0));
        assert_eq!(demand_at_price(-100.0, 1.0, K, E), 0.0);
    }

    #[test]
    fn clamped_demand_posts_nothing() {
        // agent 1 sits in the credit band but demand at p is zero
        let p = SimParams {
            n_agents: 2,
            mood_odds: 10,
            loan_limit: -100.0,
            e_sensitivity: 1.0,
            price_mode: PriceMode::Market,
            ..Default::default()
        };
        let mut s = EconomyState::new(&p).unwrap();
        s.accounts = vec![-50.0, 0.0];
        let (rec, trades) = market_step_week_traced(&mut s, &mut Rng::new(3), &p);
        assert!(trades.iter().all(|t| t.buyer != 0));
        assert_eq!(rec.loans, 0);
        assert_eq!(rec.market_price, Some(1.0 + 0.2 * (-50.0) / 2.0));
    }

    #[test]
    fn symmetric_balances_price_at_one() {
        let p = SimParams {
            n_agents: 2,
            price_mode: PriceMode::Market,
            ..Default::default()
        };
        let mut s = EconomyState::new(&p).unwrap();
        s.accounts = vec![8.0, -8.0];
        let rec = market_step_week(&mut s, &mut Rng::new(1), &p);
        assert_eq!(rec.market_price, Some(1.0));
    }

    #[test]
    fn zero_balance_week_matches_fixed_mode() {
        for mood in [7, 10] {
            for seed in 0..50 {
                let fixed = SimParams {
                    mood_odds: mood,
                    ..Default::default()
                };
                let market = SimParams {
                    price_mode: PriceMode::Market,
                    ..fixed.clone()
                };
                let mut a = EconomyState::new(&fixed).unwrap();
                let mut b = a.clone();
                let (ra, ta) = engine::step_week_traced(&mut a, &mut Rng::new(seed), &fixed);
                let (rb, tb) = market_step_week_traced(&mut b, &mut Rng::new(seed), &market);
                assert_eq!(rb.market_price, Some(1.0));
                assert!(tb.iter().all(|t| t.hours == 5.0 && t.amount == 5.0));
                assert_eq!(ta, tb);
                assert_eq!((ra.sales, ra.loans), (rb.sales, rb.loans));
                assert_eq!(ra.accounts, rb.accounts);
                assert_eq!(ra.gov_balance, rb.gov_balance);
            }
        }
    }

    proptest! {
        #[test]
        fn quotes_solve_both_curves(a in -1000.0f64..1000.0, b in -1000.0f64..1000.0) {
            let (h, p) = pair_quote(a, b, K, E).unwrap();
            prop_assert!((buyer_price(h, a, K, E) - p).abs() < 1e-12);
            prop_assert!((seller_price(h, b, K, E) - p).abs() < 1e-12);
        }

        #[test]
        fn market_price_within_quote_range(bal in prop::collection::vec(-200.0f64..200.0, 2..20)) {
            let n = bal.len();
            let sellers: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
            let quotes = quote_pairs(&bal, &sellers, &SimParams::default()).unwrap();
            let p = weekly_market_price(&quotes).unwrap();
            let lo = quotes.iter().map(|q| q.price).fold(f64::INFINITY, f64::min);
            let hi = quotes.iter().map(|q| q.price).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        }

        #[test]
        fn demand_is_monotone(a in -200.0f64..200.0, da in 0.0f64..50.0, p in 0.0f64..4.0, dp in 0.0f64..2.0) {
            let base = demand_at_price(a, p, K, E);
            prop_assert!(base >= 0.0);
            prop_assert!(demand_at_price(a, p + dp, K, E) <= base);
            prop_assert!(demand_at_price(a + da, p, K, E) >= base);
        }

        #[test]
        fn market_mode_conserves_money(seed in any::<u64>(), share in 0.0f64..=1.0) {
            let p = SimParams { price_mode: PriceMode::Market, tax_seller_share: share, ..Default::default() };
            let mut s = EconomyState::new(&p).unwrap();
            let mut rng = Rng::new(seed);
            let start = s.money_supply();
            while s.week < p.weeks {
                let rec = market_step_week(&mut s, &mut rng, &p);
                prop_assert!(rec.loans <= rec.sales);
                prop_assert!((s.money_supply() - start).abs() < 1e-6);
            }
        }
    }
}
