//! Fixed-price weekly update.
//!
//! Each week runs, in order: seller assignment, one purchase opportunity per
//! buyer, interest accrual and banker spending, the government's tax and
//! spending postings, the lowest-account default check, and the reserve
//! compliance update. Every posting is a transfer between agent accounts, the
//! bank's reserve account and the government account, so total money is
//! constant across a run.

use crate::economy::{DefaultEvent, EconomyState, PriceMode, SimParams, SimResult, WeekRecord};
use crate::error::{Error, Result};
use crate::market;
use crate::rng::Rng;

/// One executed purchase. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trade {
    pub buyer: usize,
    pub seller: usize,
    pub hours: f64,
    pub amount: f64,
    pub on_credit: bool,
}

/// Counts and postings from one week's purchase round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundOutcome {
    pub sales: u32,
    pub loans: u32,
    /// Sum of per-sale tax accruals as returned by [`post_sale`].
    pub tax_accrued: f64,
    pub trades: Vec<Trade>,
}

/// How much a buyer spends in this round.
pub(crate) enum Pricing<'a> {
    Fixed,
    Market {
        price: f64,
        /// Balances at the start of the round; demand is read from these.
        opening: &'a [f64],
    },
}

impl Pricing<'_> {
    /// `(hours, amount)` for `buyer`.
    fn quantity(&self, buyer: usize, params: &SimParams) -> (f64, f64) {
        match self {
            Pricing::Fixed => (params.purchase_hours, params.purchase_amount()),
            Pricing::Market { price, opening } => {
                let hours = market::demand_at_price(
                    opening[buyer],
                    *price,
                    params.k_slope,
                    params.e_sensitivity,
                );
                (hours, price * hours)
            }
        }
    }
}

/// Draw a seller for every buyer, redrawing whenever a buyer picks itself.
/// Returned indices are 0-based.
pub fn assign_sellers(n_agents: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    if n_agents < 2 {
        return Err(Error::InvalidArgument(format!(
            "seller assignment needs at least 2 agents, got {n_agents}"
        )));
    }
    Ok((0..n_agents)
        .map(|buyer| loop {
            let seller = rng.pick(n_agents) - 1;
            if seller != buyer {
                break seller;
            }
        })
        .collect())
}

/// Debit the buyer, credit the seller, and return the tax owed on the sale.
///
/// The seller bears `tax_seller_share` of the tax and the buyer the rest, so
/// with the default share of 1 the buyer pays `amount` and the seller
/// receives `(1 - tax) * amount`.
pub fn post_sale(
    accounts: &mut [f64],
    buyer: usize,
    seller: usize,
    amount: f64,
    params: &SimParams,
) -> Result<f64> {
    if buyer == seller {
        return Err(Error::InvalidArgument(format!(
            "agent {} cannot buy from itself",
            buyer + 1
        )));
    }
    let s = params.tax_seller_share;
    let tax = params.tax_rate;
    if s == 1.0 {
        accounts[buyer] -= amount;
        accounts[seller] += (1.0 - tax) * amount;
    } else {
        accounts[buyer] -= amount * (1.0 + tax * (1.0 - s));
        accounts[seller] += amount * (1.0 - tax * s);
    }
    Ok(tax * amount)
}

/// One purchase opportunity per buyer, in index order, against live balances.
pub fn transaction_round(
    state: &mut EconomyState,
    sellers: &[usize],
    rng: &mut Rng,
    params: &SimParams,
) -> RoundOutcome {
    purchase_round(state, sellers, rng, params, &Pricing::Fixed)
}

pub(crate) fn purchase_round(
    state: &mut EconomyState,
    sellers: &[usize],
    rng: &mut Rng,
    params: &SimParams,
    pricing: &Pricing<'_>,
) -> RoundOutcome {
    let mut out = RoundOutcome::default();
    let lending_open = state.lending_open();
    let accounts = &mut state.accounts;

    let buy = |accounts: &mut [f64], i: usize, on_credit: bool, out: &mut RoundOutcome| {
        let (hours, amount) = pricing.quantity(i, params);
        if amount <= 0.0 {
            return;
        }
        out.tax_accrued += post_sale(accounts, i, sellers[i], amount, params)
            .expect("sellers never equal their buyer");
        out.sales += 1;
        if on_credit {
            out.loans += 1;
        }
        out.trades.push(Trade {
            buyer: i,
            seller: sellers[i],
            hours,
            amount,
            on_credit,
        });
    };

    for i in 0..accounts.len() {
        // Three independent tests in sequence; each reads the balance left by
        // the previous one.
        if accounts[i] >= params.loan_limit && accounts[i] <= 0.0 && lending_open {
            let coin = rng.pick(10) as u32;
            if coin <= params.mood_odds {
                buy(accounts, i, true, &mut out);
            }
        }
        if accounts[i] < params.upper_threshold && accounts[i] > 0.0 {
            let coin = rng.pick(10) as u32;
            if coin <= params.midband_buy_odds {
                buy(accounts, i, false, &mut out);
            }
        }
        if params.upper_threshold < accounts[i] {
            buy(accounts, i, false, &mut out);
        }
    }
    out
}

/// Total loans `L` and deposits `D` at the moment of the call.
pub fn loans_and_deposits(accounts: &[f64]) -> (f64, f64) {
    let loans = 0.0 - accounts.iter().map(|&a| a.min(0.0)).sum::<f64>();
    let deposits = accounts.iter().map(|&a| a.max(0.0)).sum::<f64>();
    (loans, deposits)
}

/// Charge loan interest, pay deposit interest, credit the bank with the loan
/// interest and let the bank spend its share of it across all agents.
///
/// Returns `(L, D)` as they stood before any interest was posted.
pub fn accrue_interest_and_bank(state: &mut EconomyState, params: &SimParams) -> (f64, f64) {
    let (loans, deposits) = loans_and_deposits(&state.accounts);
    let rl = params.loan_rate_weekly;
    let rd = params.deposit_rate_weekly;
    for a in state.accounts.iter_mut() {
        let loan_interest = -a.min(0.0) * rl;
        let deposit_interest = a.max(0.0) * rd;
        *a = *a - loan_interest + deposit_interest;
    }
    state.cb_balance += rl * loans;

    let bank_spending = params.banker_spend_fraction * rl * loans;
    if bank_spending != 0.0 {
        let share = bank_spending / state.accounts.len() as f64;
        for a in state.accounts.iter_mut() {
            *a += share;
        }
        state.cb_balance -= bank_spending;
    }
    (loans, deposits)
}

/// Week tax revenue in fixed-price mode: every sale moves the same amount.
pub fn fixed_tax_revenue(sales: u32, params: &SimParams) -> f64 {
    params.tax_rate * f64::from(sales) * params.purchase_amount()
}

/// Week tax revenue when sale amounts vary: tax rate times sales times the
/// mean amount per sale. Equal to the sum of per-sale accruals, and bitwise
/// equal to [`fixed_tax_revenue`] when every sale moves the fixed amount.
pub fn volume_tax_revenue(round: &RoundOutcome, params: &SimParams) -> f64 {
    if round.sales == 0 {
        return 0.0;
    }
    let volume: f64 = round.trades.iter().map(|t| t.amount).sum();
    params.tax_rate * f64::from(round.sales) * (volume / f64::from(round.sales))
}

/// Post the week's tax revenue to the government, pay deposit interest out of
/// the government account, and spend a multiple of the revenue equally across
/// all agents. Returns the revenue posted.
pub fn fiscal_update(
    state: &mut EconomyState,
    deposits: f64,
    tax_revenue: f64,
    params: &SimParams,
) -> f64 {
    state.gov_balance += tax_revenue;
    state.gov_balance -= params.deposit_rate_weekly * deposits;
    let spending = params.spend_taxes_multiple * tax_revenue;
    let share = spending / state.accounts.len() as f64;
    for a in state.accounts.iter_mut() {
        *a += share;
    }
    state.gov_balance -= spending;
    tax_revenue
}

/// Probability that the lowest account defaults: certain below the default
/// limit, zero for positive balances, and linear in between.
pub fn default_probability(balance: f64, default_limit: f64) -> Result<f64> {
    if default_limit.is_nan() || default_limit >= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "default limit must be negative, got {default_limit}"
        )));
    }
    Ok(if balance < default_limit {
        1.0
    } else if balance > 0.0 {
        0.0
    } else {
        balance / default_limit
    })
}

/// Roll for a default on the lowest account (first index on ties).
///
/// Consumes exactly one unit draw, whether or not a default is possible.
pub fn default_step(
    state: &mut EconomyState,
    rng: &mut Rng,
    params: &SimParams,
) -> Option<DefaultEvent> {
    let (agent, balance) =
        state
            .accounts
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |(bi, bv), (i, v)| {
                    if v < bv {
                        (i, v)
                    } else {
                        (bi, bv)
                    }
                },
            );
    let y = default_probability(balance, params.default_limit).expect("validated params");
    let x = rng.uniform_unit();
    if x < y {
        state.accounts[agent] = 0.0;
        state.cb_balance += balance;
        Some(DefaultEvent {
            week: state.week + 1,
            agent: agent + 1,
            amount: balance,
        })
    } else {
        None
    }
}

/// Reserve-requirement slack: `cb + (1 - rho) D - L`. Non-negative means the
/// bank may lend next week.
pub fn compliance_value(cb: f64, deposits: f64, loans: f64, reserve_ratio: f64) -> f64 {
    cb + (1.0 - reserve_ratio) * deposits - loans
}

/// Shared tail of a week once purchases are done.
pub(crate) fn close_week(
    state: &mut EconomyState,
    rng: &mut Rng,
    params: &SimParams,
    round: &RoundOutcome,
    tax_revenue: f64,
    market_price: Option<f64>,
) -> WeekRecord {
    let (loans_outstanding, deposits) = accrue_interest_and_bank(state, params);
    fiscal_update(state, deposits, tax_revenue, params);
    let default_event = default_step(state, rng, params);
    // L and D are the mid-week values, not recomputed after spending or default.
    let compliance = compliance_value(
        state.cb_balance,
        deposits,
        loans_outstanding,
        params.reserve_ratio,
    );
    state.week += 1;
    state.compliance_prev = compliance;
    WeekRecord {
        week: state.week,
        sales: round.sales,
        loans: round.loans,
        deposits,
        loans_outstanding,
        tax_revenue,
        cb_balance: state.cb_balance,
        gov_balance: state.gov_balance,
        compliance,
        default_event,
        market_price,
        accounts: state.accounts.clone(),
    }
}

/// Advance one fixed-price week and also return the executed trades.
pub fn step_week_traced(
    state: &mut EconomyState,
    rng: &mut Rng,
    params: &SimParams,
) -> (WeekRecord, Vec<Trade>) {
    let sellers = assign_sellers(state.accounts.len(), rng).expect("validated params");
    let round = transaction_round(state, &sellers, rng, params);
    let tax_revenue = fixed_tax_revenue(round.sales, params);
    let record = close_week(state, rng, params, &round, tax_revenue, None);
    (record, round.trades)
}

/// Advance one fixed-price week.
pub fn step_week(state: &mut EconomyState, rng: &mut Rng, params: &SimParams) -> WeekRecord {
    step_week_traced(state, rng, params).0
}

/// Advance one week in whichever price mode `params` selects.
pub fn advance(state: &mut EconomyState, rng: &mut Rng, params: &SimParams) -> WeekRecord {
    match params.price_mode {
        PriceMode::Fixed => step_week(state, rng, params),
        PriceMode::Market => market::market_step_week(state, rng, params),
    }
}

/// Run weeks 2 through `weeks` from the initial state.
pub fn run_simulation(params: &SimParams, seed: u64) -> Result<SimResult> {
    let mut state = EconomyState::new(params)?;
    let mut rng = Rng::new(seed);
    let mut weeks = Vec::with_capacity(params.weeks);
    weeks.push(WeekRecord::initial(&state));
    while state.week < params.weeks {
        weeks.push(advance(&mut state, &mut rng, params));
    }
    let total_sales: f64 = weeks.iter().map(|w| f64::from(w.sales)).sum();
    let total_cb: f64 = weeks.iter().map(|w| w.cb_balance).sum();
    Ok(SimResult {
        params: params.clone(),
        seed,
        average_weekly_sales: total_sales / params.weeks as f64,
        average_bank_account: total_cb / params.weeks as f64,
        weeks,
    })
}
