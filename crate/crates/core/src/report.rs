//! CSV tables and SVG charts.
//!
//! Reals are written with Rust's shortest round-trip formatting, so a parsed
//! CSV reproduces the in-memory values bit for bit and identical runs give
//! byte-identical files.

use std::fmt::Write as _;

use crate::economy::{DefaultEvent, SimResult, WeekRecord};
use crate::error::{Error, Result};
use crate::harness::{EnsembleSummary, SweepTable};

pub const WEEKS_HEADER: &str = "week,sales,loans,deposits,loans_outstanding,tax_revenue,cb_balance,gov_balance,compliance,default_agent,default_amount,market_price";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per week, week 1 included.
pub fn write_weeks_csv(result: &SimResult) -> String {
    let mut out = String::with_capacity(64 * (result.weeks.len() + 1));
    out.push_str(WEEKS_HEADER);
    out.push('\n');
    for w in &result.weeks {
        let ev = w.default_event.as_ref();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            w.week,
            w.sales,
            w.loans,
            w.deposits,
            w.loans_outstanding,
            w.tax_revenue,
            w.cb_balance,
            w.gov_balance,
            w.compliance,
            opt(ev.map(|e| e.agent)),
            opt(ev.map(|e| e.amount)),
            opt(w.market_price),
        );
    }
    out
}

/// The full balance matrix: `week,agent_1..agent_N`.
pub fn write_accounts_csv(result: &SimResult) -> String {
    let n = result.params.n_agents;
    let mut out = String::from("week");
    for i in 1..=n {
        let _ = write!(out, ",agent_{i}");
    }
    out.push('\n');
    for w in &result.weeks {
        let _ = write!(out, "{}", w.week);
        for a in &w.accounts {
            let _ = write!(out, ",{a}");
        }
        out.push('\n');
    }
    out
}

fn parse_field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {name} `{s}`")))
}

fn parse_opt<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<Option<T>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_field(line, name, s).map(Some)
    }
}

/// Rebuild week records from the two CSV tables written for a run.
pub fn read_run_csv(weeks_csv: &str, accounts_csv: &str) -> Result<Vec<WeekRecord>> {
    let mut lines = weeks_csv.lines();
    if lines.next() != Some(WEEKS_HEADER) {
        return Err(Error::Parse("weeks table has an unexpected header".into()));
    }
    let mut acc_lines = accounts_csv.lines().skip(1);
    let mut records = Vec::new();
    for (k, line) in lines.enumerate() {
        let n = k + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(Error::Parse(format!("line {n}: expected 12 fields")));
        }
        let week: usize = parse_field(n, "week", f[0])?;
        let agent: Option<usize> = parse_opt(n, "default_agent", f[9])?;
        let amount: Option<f64> = parse_opt(n, "default_amount", f[10])?;
        let default_event = match (agent, amount) {
            (Some(agent), Some(amount)) => Some(DefaultEvent {
                week,
                agent,
                amount,
            }),
            (None, None) => None,
            _ => return Err(Error::Parse(format!("line {n}: half a default event"))),
        };
        let acc_line = acc_lines
            .next()
            .ok_or_else(|| Error::Parse(format!("accounts table has no row for week {week}")))?;
        let mut cells = acc_line.split(',');
        let acc_week: usize = parse_field(n, "week", cells.next().unwrap_or(""))?;
        if acc_week != week {
            return Err(Error::Parse(format!(
                "accounts row {acc_week} does not match week {week}"
            )));
        }
        let accounts = cells
            .map(|c| parse_field(n, "balance", c))
            .collect::<Result<Vec<f64>>>()?;
        records.push(WeekRecord {
            week,
            sales: parse_field(n, "sales", f[1])?,
            loans: parse_field(n, "loans", f[2])?,
            deposits: parse_field(n, "deposits", f[3])?,
            loans_outstanding: parse_field(n, "loans_outstanding", f[4])?,
            tax_revenue: parse_field(n, "tax_revenue", f[5])?,
            cb_balance: parse_field(n, "cb_balance", f[6])?,
            gov_balance: parse_field(n, "gov_balance", f[7])?,
            compliance: parse_field(n, "compliance", f[8])?,
            default_event,
            market_price: parse_opt(n, "market_price", f[11])?,
            accounts,
        });
    }
    Ok(records)
}

/// One row per seed.
pub fn write_ensemble_runs_csv(summary: &EnsembleSummary) -> String {
    let mut out = String::from(
        "seed,average_weekly_sales,total_sales,total_loans,defaults,final_cb_balance,final_gov_balance,negative_compliance_weeks,frozen_insolvency\n",
    );
    for r in &summary.runs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.seed,
            r.average_weekly_sales,
            r.total_sales,
            r.total_loans,
            r.defaults,
            r.final_cb_balance,
            r.final_gov_balance,
            r.negative_compliance_weeks,
            r.frozen_insolvency,
        );
    }
    out
}

const SUMMARY_COLUMNS: &str = "seeds,mean_sales,std_sales,min_sales,p01_sales,p99_sales,max_sales,mean_defaults,frac_any_default,frac_two_plus_defaults,frac_terminal_insolvent,frac_negative_compliance_weeks,mean_final_cb_balance,mean_final_gov_balance";

fn summary_cells(s: &EnsembleSummary) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        s.seed_count,
        s.mean_sales,
        s.std_sales,
        s.min_sales,
        s.p01_sales,
        s.p99_sales,
        s.max_sales,
        s.mean_defaults,
        s.frac_any_default,
        s.frac_two_plus_defaults,
        s.frac_terminal_insolvent,
        s.frac_negative_compliance_weeks,
        s.mean_final_cb_balance,
        s.mean_final_gov_balance,
    )
}

/// Header plus a single aggregate row.
pub fn write_ensemble_summary_csv(summary: &EnsembleSummary) -> String {
    format!("{SUMMARY_COLUMNS}\n{}\n", summary_cells(summary))
}

/// One row per grid point: the swept values then the ensemble aggregates.
pub fn write_sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("point");
    for p in &table.parameters {
        let _ = write!(out, ",{p}");
    }
    let _ = writeln!(out, ",{SUMMARY_COLUMNS}");
    for row in &table.rows {
        let _ = write!(out, "{}", row.point_index);
        for (_, v) in &row.assignments {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", summary_cells(&row.summary));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Bar,
    Line,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

fn tick_label(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Standalone 800x400 SVG of a weekly series, weeks numbered from 1.
pub fn render_chart_svg(
    series: &[f64],
    kind: ChartKind,
    x_label: &str,
    y_label: &str,
) -> Result<String> {
    if series.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot chart an empty series".into(),
        ));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "series contains a non-finite value".into(),
        ));
    }
    let lo = series.iter().copied().fold(0.0f64, f64::min);
    let hi = series.iter().copied().fold(0.0f64, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let n = series.len() as f64;
    let slot = plot_w / n;
    let y_of = |v: f64| TOP + plot_h * (hi - v) / span;
    let x_mid = |i: usize| LEFT + slot * (i as f64 + 0.5);
    let base = y_of(0.0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<g font-family="sans-serif" font-size="12" fill="black">"#
    );

    // axes and zero line
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.2}" stroke="black"/>"#,
        TOP + plot_h
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{LEFT}" y1="{base:.2}" x2="{:.2}" y2="{base:.2}" stroke="#888"/>"##,
        LEFT + plot_w
    );

    let mut ticks = vec![lo, 0.0, hi];
    ticks.dedup();
    for t in ticks {
        let y = y_of(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    for (i, label) in [(0, 1), (series.len() - 1, series.len())] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            x_mid(i),
            TOP + plot_h + 16.0
        );
    }

    match kind {
        ChartKind::Bar => {
            let bar_w = slot * 0.8;
            for (i, &v) in series.iter().enumerate() {
                let y = y_of(v);
                let _ = writeln!(
                    svg,
                    r##"<rect x="{:.2}" y="{:.2}" width="{bar_w:.2}" height="{:.2}" fill="#3a6ea5"/>"##,
                    x_mid(i) - bar_w / 2.0,
                    y.min(base),
                    (y - base).abs()
                );
            }
        }
        ChartKind::Line => {
            let points = series
                .iter()
                .enumerate()
                .map(|(i, &v)| format!("{:.2},{:.2}", x_mid(i), y_of(v)))
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(
                svg,
                r##"<polyline points="{points}" fill="none" stroke="#3a6ea5" stroke-width="1.5"/>"##
            );
        }
    }

    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{0:.2}" text-anchor="middle" transform="rotate(-90 16 {0:.2})">{1}</text>"#,
        TOP + plot_h / 2.0,
        escape(y_label)
    );
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

/// The five standard charts for a run, as `(file name, svg)`.
pub fn run_charts(result: &SimResult) -> Result<Vec<(&'static str, String)>> {
    Ok(vec![
        (
            "weekly_sales.svg",
            render_chart_svg(
                &result.sales_series(),
                ChartKind::Bar,
                "week",
                "weekly sales",
            )?,
        ),
        (
            "government_account.svg",
            render_chart_svg(
                &result.gov_series(),
                ChartKind::Line,
                "week",
                "government account",
            )?,
        ),
        (
            "bank_account.svg",
            render_chart_svg(
                &result.cb_series(),
                ChartKind::Line,
                "week",
                "commercial bank account",
            )?,
        ),
        (
            "compliance.svg",
            render_chart_svg(
                &result.compliance_series(),
                ChartKind::Line,
                "week",
                "compliance",
            )?,
        ),
        (
            "weekly_loans.svg",
            render_chart_svg(
                &result.loans_series(),
                ChartKind::Bar,
                "week",
                "weekly loans",
            )?,
        ),
    ])
}
