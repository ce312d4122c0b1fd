//! Parameters, state and per-week observables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// How the price of a block of service is set each week.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceMode {
    /// Every purchase is `purchase_hours` at `price_per_hour`.
    #[default]
    Fixed,
    /// Price is the weekly mean of pairwise equilibrium quotes; quantity
    /// follows each buyer's demand curve.
    Market,
}

impl PriceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PriceMode::Fixed => "fixed",
            PriceMode::Market => "market",
        }
    }
}

impl std::str::FromStr for PriceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(PriceMode::Fixed),
            "market" => Ok(PriceMode::Market),
            other => Err(Error::InvalidArgument(format!(
                "price mode must be `fixed` or `market`, got `{other}`"
            ))),
        }
    }
}

/// Full parameter record. Defaults are the reference model's values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub n_agents: usize,
    pub weeks: usize,
    /// Accepted and echoed; the weekly loop iterates over agents, not this.
    pub weekly_transactions: u32,
    pub loan_rate_weekly: f64,
    pub deposit_rate_weekly: f64,
    pub tax_rate: f64,
    pub spend_taxes_multiple: f64,
    pub banker_spend_fraction: f64,
    /// Odds out of 10 that a loan-eligible agent buys on credit.
    pub mood_odds: u32,
    /// Balances below this always default.
    pub default_limit: f64,
    /// The bank refuses credit to balances below this.
    pub loan_limit: f64,
    pub initial_reserves: f64,
    pub reserve_ratio: f64,
    pub purchase_hours: f64,
    pub price_per_hour: f64,
    /// Odds out of 10 that an agent with a small positive balance buys.
    pub midband_buy_odds: u32,
    /// Balances strictly above this always buy.
    pub upper_threshold: f64,
    /// Share of the sales tax borne by the seller; the buyer pays the rest.
    pub tax_seller_share: f64,
    pub price_mode: PriceMode,
    pub k_slope: f64,
    pub e_sensitivity: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            n_agents: 10,
            weeks: 53,
            weekly_transactions: 10,
            loan_rate_weekly: 0.07 / 52.0,
            deposit_rate_weekly: 0.06 / 52.0,
            tax_rate: 0.20,
            spend_taxes_multiple: 1.0,
            banker_spend_fraction: 0.0,
            mood_odds: 7,
            default_limit: -500.0,
            loan_limit: -5.0,
            initial_reserves: 10.0,
            reserve_ratio: 0.1,
            purchase_hours: 5.0,
            price_per_hour: 1.0,
            midband_buy_odds: 9,
            upper_threshold: 10.0,
            tax_seller_share: 1.0,
            price_mode: PriceMode::Fixed,
            k_slope: 1.0 / 5.0,
            e_sensitivity: 1.0 / 10.0,
        }
    }
}

impl SimParams {
    /// Every violated constraint, in field order. Empty means valid.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut check = |ok: bool, key: &'static str, constraint: &str| {
            if !ok {
                out.push(Violation {
                    key,
                    constraint: constraint.to_string(),
                });
            }
        };
        let unit = |x: f64| (0.0..=1.0).contains(&x);

        check(self.n_agents >= 2, "n_agents", "must be at least 2");
        check(self.weeks >= 2, "weeks", "must be at least 2");
        check(
            self.weekly_transactions >= 1,
            "weekly_transactions",
            "must be positive",
        );
        check(
            self.loan_rate_weekly >= 0.0 && self.loan_rate_weekly.is_finite(),
            "loan_rate_weekly",
            "must be a finite value >= 0",
        );
        check(
            self.deposit_rate_weekly >= 0.0 && self.deposit_rate_weekly.is_finite(),
            "deposit_rate_weekly",
            "must be a finite value >= 0",
        );
        check(unit(self.tax_rate), "tax_rate", "must lie in [0, 1]");
        check(
            self.spend_taxes_multiple >= 0.0 && self.spend_taxes_multiple.is_finite(),
            "spend_taxes_multiple",
            "must be a finite value >= 0",
        );
        check(
            unit(self.banker_spend_fraction),
            "banker_spend_fraction",
            "must lie in [0, 1]",
        );
        check(self.mood_odds <= 10, "mood_odds", "must lie in [0, 10]");
        check(
            self.default_limit < 0.0 && self.default_limit.is_finite(),
            "default_limit",
            "must be a finite value < 0",
        );
        check(
            self.loan_limit <= 0.0 && self.loan_limit.is_finite(),
            "loan_limit",
            "must be a finite value <= 0",
        );
        check(
            self.default_limit < self.loan_limit,
            "default_limit",
            "must be below loan_limit",
        );
        check(
            self.initial_reserves.is_finite(),
            "initial_reserves",
            "must be finite",
        );
        check(
            unit(self.reserve_ratio),
            "reserve_ratio",
            "must lie in [0, 1]",
        );
        check(
            self.purchase_hours > 0.0 && self.purchase_hours.is_finite(),
            "purchase_hours",
            "must be a finite value > 0",
        );
        check(
            self.price_per_hour > 0.0 && self.price_per_hour.is_finite(),
            "price_per_hour",
            "must be a finite value > 0",
        );
        check(
            self.midband_buy_odds <= 10,
            "midband_buy_odds",
            "must lie in [0, 10]",
        );
        check(
            self.upper_threshold.is_finite(),
            "upper_threshold",
            "must be finite",
        );
        check(
            unit(self.tax_seller_share),
            "tax_seller_share",
            "must lie in [0, 1]",
        );
        check(
            self.k_slope > 0.0 && self.k_slope.is_finite(),
            "k_slope",
            "must be a finite value > 0",
        );
        check(
            self.e_sensitivity >= 0.0 && self.e_sensitivity.is_finite(),
            "e_sensitivity",
            "must be a finite value >= 0",
        );
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Money moved by one fixed-price purchase.
    pub fn purchase_amount(&self) -> f64 {
        self.purchase_hours * self.price_per_hour
    }
}

/// Live economy between weekly steps.
#[derive(Debug, Clone, PartialEq)]
pub struct EconomyState {
    /// 1-based; week 1 is the stored initial row.
    pub week: usize,
    /// Agent balances. Negative balances are loans from the bank.
    pub accounts: Vec<f64>,
    /// Commercial bank's account at the central bank, which is also its capital.
    pub cb_balance: f64,
    /// Government account at the central bank. No debt limit.
    pub gov_balance: f64,
    /// Last computed compliance value; gates next week's lending.
    pub compliance_prev: f64,
}

impl EconomyState {
    /// Week-1 state: zero accounts, the bank holding its initial reserves.
    pub fn new(params: &SimParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            week: 1,
            accounts: vec![0.0; params.n_agents],
            cb_balance: params.initial_reserves,
            gov_balance: 0.0,
            compliance_prev: 0.0,
        })
    }

    /// Total money across the three pools. Constant over a run.
    pub fn money_supply(&self) -> f64 {
        self.accounts.iter().sum::<f64>() + self.cb_balance + self.gov_balance
    }

    pub fn lending_open(&self) -> bool {
        self.compliance_prev >= 0.0 && self.cb_balance >= 0.0
    }
}

/// Alias matching the operation name used across the docs.
pub fn init_state(params: &SimParams) -> Result<EconomyState> {
    EconomyState::new(params)
}

/// Lowest account written off in a given week.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefaultEvent {
    pub week: usize,
    /// 1-based agent index.
    pub agent: usize,
    /// Balance before the reset; never positive.
    pub amount: f64,
}

/// Observables for one week.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeekRecord {
    pub week: usize,
    pub sales: u32,
    pub loans: u32,
    pub deposits: f64,
    pub loans_outstanding: f64,
    pub tax_revenue: f64,
    pub cb_balance: f64,
    pub gov_balance: f64,
    pub compliance: f64,
    pub default_event: Option<DefaultEvent>,
    pub market_price: Option<f64>,
    /// Post-default snapshot of every account.
    pub accounts: Vec<f64>,
}

impl WeekRecord {
    /// The stored row for week 1, before any trading.
    pub fn initial(state: &EconomyState) -> Self {
        Self {
            week: state.week,
            sales: 0,
            loans: 0,
            deposits: 0.0,
            loans_outstanding: 0.0,
            tax_revenue: 0.0,
            cb_balance: state.cb_balance,
            gov_balance: state.gov_balance,
            compliance: state.compliance_prev,
            default_event: None,
            market_price: None,
            accounts: state.accounts.clone(),
        }
    }
}

/// One complete run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub params: SimParams,
    pub seed: u64,
    /// One record per week, week 1 first.
    pub weeks: Vec<WeekRecord>,
    /// Total sales over all weeks divided by the week count.
    pub average_weekly_sales: f64,
    pub average_bank_account: f64,
}

impl SimResult {
    pub fn total_sales(&self) -> u64 {
        self.weeks.iter().map(|w| u64::from(w.sales)).sum()
    }

    pub fn total_loans(&self) -> u64 {
        self.weeks.iter().map(|w| u64::from(w.loans)).sum()
    }

    pub fn defaults(&self) -> impl Iterator<Item = &DefaultEvent> {
        self.weeks.iter().filter_map(|w| w.default_event.as_ref())
    }

    pub fn final_week(&self) -> &WeekRecord {
        self.weeks.last().expect("a run has at least two weeks")
    }

    pub fn sales_series(&self) -> Vec<f64> {
        self.weeks.iter().map(|w| f64::from(w.sales)).collect()
    }

    pub fn loans_series(&self) -> Vec<f64> {
        self.weeks.iter().map(|w| f64::from(w.loans)).collect()
    }

    pub fn cb_series(&self) -> Vec<f64> {
        self.weeks.iter().map(|w| w.cb_balance).collect()
    }

    pub fn gov_series(&self) -> Vec<f64> {
        self.weeks.iter().map(|w| w.gov_balance).collect()
    }

    pub fn compliance_series(&self) -> Vec<f64> {
        self.weeks.iter().map(|w| w.compliance).collect()
    }
}

/// Sum of a weekly series divided by the number of weeks, counting the
/// inactive first week in the divisor.
pub fn average_over_weeks(series: &[f64], weeks: usize) -> Result<f64> {
    if series.len() != weeks {
        return Err(Error::InvalidArgument(format!(
            "series has {} entries, expected {weeks}",
            series.len()
        )));
    }
    if weeks == 0 {
        return Err(Error::InvalidArgument("weeks must be positive".into()));
    }
    Ok(series.iter().sum::<f64>() / weeks as f64)
}
