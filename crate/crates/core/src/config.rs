//! Flat key/value configuration.
//!
//! Documents are TOML tables of scalars (a JSON object is also accepted).
//! Each parameter has a long name and, for the reference parameter list, a
//! short alias (`N`, `W`, `rl`, `loanlimit`, ...). Absent keys keep their
//! defaults; unknown keys are rejected.

use std::fmt;

use serde::Serialize;

use crate::economy::{PriceMode, SimParams};
use crate::error::{Error, Result};

/// A scalar parameter value before it is checked against its field type.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Text(String),
}

impl ParamValue {
    /// Integer if it parses as one, else real, else text.
    pub fn parse(token: &str) -> Self {
        let t = token.trim();
        if let Ok(i) = t.parse::<i64>() {
            ParamValue::Int(i)
        } else if let Ok(x) = t.parse::<f64>() {
            ParamValue::Real(x)
        } else {
            ParamValue::Text(t.to_string())
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ParamValue::Int(_) => "integer",
            ParamValue::Real(_) => "real",
            ParamValue::Text(_) => "string",
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Real(x) => write!(f, "{x}"),
            ParamValue::Text(s) => f.write_str(s),
        }
    }
}

/// `(canonical name, short alias)`.
const KEYS: &[(&str, Option<&str>)] = &[
    ("n_agents", Some("N")),
    ("weeks", Some("W")),
    ("weekly_transactions", Some("T")),
    ("loan_rate_weekly", Some("rl")),
    ("deposit_rate_weekly", Some("rd")),
    ("tax_rate", Some("tax")),
    ("spend_taxes_multiple", Some("spendtaxes")),
    ("banker_spend_fraction", Some("spend")),
    ("mood_odds", Some("mood")),
    ("default_limit", Some("defaultlimit")),
    ("loan_limit", Some("loanlimit")),
    ("initial_reserves", None),
    ("reserve_ratio", None),
    ("purchase_hours", None),
    ("price_per_hour", None),
    ("midband_buy_odds", None),
    ("upper_threshold", None),
    ("tax_seller_share", None),
    ("price_mode", None),
    ("k_slope", None),
    ("e_sensitivity", None),
];

/// Canonical name for a long name or alias.
pub fn canonical_key(key: &str) -> Option<&'static str> {
    KEYS.iter()
        .find(|(long, short)| *long == key || *short == Some(key))
        .map(|(long, _)| *long)
}

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn as_real(key: &str, v: &ParamValue) -> Result<f64> {
    match v {
        ParamValue::Int(i) => Ok(*i as f64),
        ParamValue::Real(x) => Ok(*x),
        other => Err(config_err(
            key,
            format!("expected a number, got {}", other.kind()),
        )),
    }
}

fn as_count<T: TryFrom<i64>>(key: &str, v: &ParamValue) -> Result<T> {
    match v {
        ParamValue::Int(i) => {
            T::try_from(*i).map_err(|_| config_err(key, format!("{i} is out of range")))
        }
        other => Err(config_err(
            key,
            format!("expected a non-negative integer, got {}", other.kind()),
        )),
    }
}

impl SimParams {
    /// Assign one parameter by long name or alias. Range constraints are
    /// checked separately by [`SimParams::validate`].
    pub fn set(&mut self, key: &str, value: &ParamValue) -> Result<()> {
        let name = canonical_key(key).ok_or_else(|| config_err(key, "unknown parameter"))?;
        match name {
            "n_agents" => self.n_agents = as_count(key, value)?,
            "weeks" => self.weeks = as_count(key, value)?,
            "weekly_transactions" => self.weekly_transactions = as_count(key, value)?,
            "loan_rate_weekly" => self.loan_rate_weekly = as_real(key, value)?,
            "deposit_rate_weekly" => self.deposit_rate_weekly = as_real(key, value)?,
            "tax_rate" => self.tax_rate = as_real(key, value)?,
            "spend_taxes_multiple" => self.spend_taxes_multiple = as_real(key, value)?,
            "banker_spend_fraction" => self.banker_spend_fraction = as_real(key, value)?,
            "mood_odds" => self.mood_odds = as_count(key, value)?,
            "default_limit" => self.default_limit = as_real(key, value)?,
            "loan_limit" => self.loan_limit = as_real(key, value)?,
            "initial_reserves" => self.initial_reserves = as_real(key, value)?,
            "reserve_ratio" => self.reserve_ratio = as_real(key, value)?,
            "purchase_hours" => self.purchase_hours = as_real(key, value)?,
            "price_per_hour" => self.price_per_hour = as_real(key, value)?,
            "midband_buy_odds" => self.midband_buy_odds = as_count(key, value)?,
            "upper_threshold" => self.upper_threshold = as_real(key, value)?,
            "tax_seller_share" => self.tax_seller_share = as_real(key, value)?,
            "price_mode" => {
                self.price_mode = match value {
                    ParamValue::Text(s) => s
                        .parse::<PriceMode>()
                        .map_err(|_| config_err(key, "must be `fixed` or `market`"))?,
                    other => {
                        return Err(config_err(
                            key,
                            format!("expected `fixed` or `market`, got {}", other.kind()),
                        ))
                    }
                }
            }
            "k_slope" => self.k_slope = as_real(key, value)?,
            "e_sensitivity" => self.e_sensitivity = as_real(key, value)?,
            _ => unreachable!("every canonical key is handled"),
        }
        Ok(())
    }
}

fn scalar_from_toml(key: &str, v: &toml::Value) -> Result<ParamValue> {
    match v {
        toml::Value::Integer(i) => Ok(ParamValue::Int(*i)),
        toml::Value::Float(x) => Ok(ParamValue::Real(*x)),
        toml::Value::String(s) => Ok(ParamValue::Text(s.clone())),
        _ => Err(config_err(key, "expected a scalar value")),
    }
}

fn scalar_from_json(key: &str, v: &serde_json::Value) -> Result<ParamValue> {
    match v {
        serde_json::Value::Number(n) => Ok(match n.as_i64() {
            Some(i) => ParamValue::Int(i),
            None => ParamValue::Real(n.as_f64().unwrap_or(f64::NAN)),
        }),
        serde_json::Value::String(s) => Ok(ParamValue::Text(s.clone())),
        _ => Err(config_err(key, "expected a scalar value")),
    }
}

fn parse_entries(text: &str) -> Result<Vec<(String, ParamValue)>> {
    if text.trim_start().starts_with('{') {
        let map: serde_json::Map<String, serde_json::Value> =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        map.iter()
            .map(|(k, v)| Ok((k.clone(), scalar_from_json(k, v)?)))
            .collect()
    } else {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Parse(e.to_string().trim_end().to_string()))?;
        table
            .iter()
            .map(|(k, v)| Ok((k.clone(), scalar_from_toml(k, v)?)))
            .collect()
    }
}

/// Parse a configuration document into a validated parameter record.
pub fn load_config(text: &str) -> Result<SimParams> {
    let mut params = SimParams::default();
    let mut seen: Vec<(&'static str, String)> = Vec::new();
    for (key, value) in parse_entries(text)? {
        let name = canonical_key(&key).ok_or_else(|| config_err(&key, "unknown parameter"))?;
        if let Some((_, first)) = seen.iter().find(|(n, _)| *n == name) {
            return Err(config_err(&key, format!("duplicates `{first}`")));
        }
        params.set(&key, &value)?;
        seen.push((name, key));
    }
    params.validate()?;
    Ok(params)
}

/// Render parameters as a TOML document using long names.
pub fn to_config_string(params: &SimParams) -> String {
    let mut t = toml::Table::new();
    let int = |v: u64| toml::Value::Integer(v as i64);
    let real = toml::Value::Float;
    t.insert("n_agents".into(), int(params.n_agents as u64));
    t.insert("weeks".into(), int(params.weeks as u64));
    t.insert(
        "weekly_transactions".into(),
        int(params.weekly_transactions.into()),
    );
    t.insert("loan_rate_weekly".into(), real(params.loan_rate_weekly));
    t.insert(
        "deposit_rate_weekly".into(),
        real(params.deposit_rate_weekly),
    );
    t.insert("tax_rate".into(), real(params.tax_rate));
    t.insert(
        "spend_taxes_multiple".into(),
        real(params.spend_taxes_multiple),
    );
    t.insert(
        "banker_spend_fraction".into(),
        real(params.banker_spend_fraction),
    );
    t.insert("mood_odds".into(), int(params.mood_odds.into()));
    t.insert("default_limit".into(), real(params.default_limit));
    t.insert("loan_limit".into(), real(params.loan_limit));
    t.insert("initial_reserves".into(), real(params.initial_reserves));
    t.insert("reserve_ratio".into(), real(params.reserve_ratio));
    t.insert("purchase_hours".into(), real(params.purchase_hours));
    t.insert("price_per_hour".into(), real(params.price_per_hour));
    t.insert(
        "midband_buy_odds".into(),
        int(params.midband_buy_odds.into()),
    );
    t.insert("upper_threshold".into(), real(params.upper_threshold));
    t.insert("tax_seller_share".into(), real(params.tax_seller_share));
    t.insert(
        "price_mode".into(),
        toml::Value::String(params.price_mode.as_str().into()),
    );
    t.insert("k_slope".into(), real(params.k_slope));
    t.insert("e_sensitivity".into(), real(params.e_sensitivity));
    toml::to_string(&t).expect("a flat table always serializes")
}
