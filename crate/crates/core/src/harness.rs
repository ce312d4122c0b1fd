//! Seed ensembles and parameter sweeps.
//!
//! Runs are independent and execute on the rayon pool. Results come back in
//! seed-list order, so every statistic here is a pure function of
//! `(params, seeds)` no matter how the pool schedules work.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ParamValue;
use crate::economy::{SimParams, SimResult};
use crate::engine::run_simulation;
use crate::error::{Error, Result};

/// Per-run figures kept by an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStats {
    pub seed: u64,
    pub average_weekly_sales: f64,
    pub total_sales: u64,
    pub total_loans: u64,
    pub defaults: u32,
    pub final_cb_balance: f64,
    pub final_gov_balance: f64,
    /// Active weeks (2..=W) ending with negative compliance.
    pub negative_compliance_weeks: u32,
    /// The bank ends insolvent and made no loans after it last went negative.
    pub frozen_insolvency: bool,
}

impl RunStats {
    pub fn from_result(r: &SimResult) -> Self {
        let active = &r.weeks[1..];
        let last = r.final_week();
        let frozen_insolvency = last.cb_balance < 0.0 && {
            let start = r
                .weeks
                .iter()
                .rposition(|w| w.cb_balance >= 0.0)
                .map_or(0, |k| k + 1);
            r.weeks[start + 1..].iter().all(|w| w.loans == 0)
        };
        Self {
            seed: r.seed,
            average_weekly_sales: r.average_weekly_sales,
            total_sales: r.total_sales(),
            total_loans: r.total_loans(),
            defaults: r.defaults().count() as u32,
            final_cb_balance: last.cb_balance,
            final_gov_balance: last.gov_balance,
            negative_compliance_weeks: active.iter().filter(|w| w.compliance < 0.0).count() as u32,
            frozen_insolvency,
        }
    }
}

/// Aggregate statistics over a seed ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub params: SimParams,
    pub seed_count: usize,
    pub runs: Vec<RunStats>,
    pub mean_sales: f64,
    /// Population standard deviation.
    pub std_sales: f64,
    pub min_sales: f64,
    pub max_sales: f64,
    /// Nearest-rank 1st percentile.
    pub p01_sales: f64,
    /// Nearest-rank 99th percentile.
    pub p99_sales: f64,
    pub mean_defaults: f64,
    pub frac_any_default: f64,
    pub frac_two_plus_defaults: f64,
    pub frac_terminal_insolvent: f64,
    /// Pooled over all active weeks of all runs.
    pub frac_negative_compliance_weeks: f64,
    pub mean_final_cb_balance: f64,
    pub mean_final_gov_balance: f64,
}

/// Nearest-rank percentile of an ascending slice.
pub fn nearest_rank(sorted: &[f64], pct: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn mean(xs: impl Iterator<Item = f64>, n: usize) -> f64 {
    xs.sum::<f64>() / n as f64
}

impl EnsembleSummary {
    pub fn from_runs(params: SimParams, runs: Vec<RunStats>) -> Self {
        let n = runs.len();
        let sales: Vec<f64> = runs.iter().map(|r| r.average_weekly_sales).collect();
        let mean_sales = mean(sales.iter().copied(), n);
        let var = mean(sales.iter().map(|s| (s - mean_sales).powi(2)), n);
        let mut sorted = sales.clone();
        sorted.sort_by(f64::total_cmp);
        let frac = |pred: &dyn Fn(&RunStats) -> bool| {
            runs.iter().filter(|r| pred(r)).count() as f64 / n as f64
        };
        let active_weeks = (params.weeks - 1) * n;
        let negative_weeks: u64 = runs
            .iter()
            .map(|r| u64::from(r.negative_compliance_weeks))
            .sum();
        Self {
            seed_count: n,
            mean_sales,
            std_sales: var.sqrt(),
            min_sales: sorted[0],
            max_sales: sorted[n - 1],
            p01_sales: nearest_rank(&sorted, 1.0),
            p99_sales: nearest_rank(&sorted, 99.0),
            mean_defaults: mean(runs.iter().map(|r| f64::from(r.defaults)), n),
            frac_any_default: frac(&|r| r.defaults >= 1),
            frac_two_plus_defaults: frac(&|r| r.defaults >= 2),
            frac_terminal_insolvent: frac(&|r| r.final_cb_balance < 0.0),
            frac_negative_compliance_weeks: negative_weeks as f64 / active_weeks as f64,
            mean_final_cb_balance: mean(runs.iter().map(|r| r.final_cb_balance), n),
            mean_final_gov_balance: mean(runs.iter().map(|r| r.final_gov_balance), n),
            params,
            runs,
        }
    }
}

/// Run every seed and summarise.
pub fn run_ensemble(params: &SimParams, seeds: &[u64]) -> Result<EnsembleSummary> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument(
            "an ensemble needs at least one seed".into(),
        ));
    }
    let mut seen = HashSet::with_capacity(seeds.len());
    if let Some(dup) = seeds.iter().find(|s| !seen.insert(**s)) {
        return Err(Error::InvalidArgument(format!("seed {dup} appears twice")));
    }
    params.validate()?;
    let runs = seeds
        .par_iter()
        .map(|&seed| run_simulation(params, seed).map(|r| RunStats::from_result(&r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleSummary::from_runs(params.clone(), runs))
}

/// `count` consecutive seeds starting at `base_seed`.
pub fn consecutive_seeds(base_seed: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|r| base_seed.wrapping_add(r))
        .collect()
}

/// Seed of one replicate at one grid point.
pub fn grid_seed(base_seed: u64, point_index: usize, replicate: usize) -> u64 {
    base_seed
        .wrapping_mul(1_000_003)
        .wrapping_add((point_index as u64).wrapping_mul(10_007))
        .wrapping_add(replicate as u64)
}

/// Axes of a sweep; the grid is their cartesian product with the first axis
/// varying slowest.
#[derive(Debug, Clone, Default)]
pub struct ParamGrid {
    pub axes: Vec<(String, Vec<ParamValue>)>,
}

impl ParamGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn axis(mut self, name: impl Into<String>, values: Vec<ParamValue>) -> Self {
        self.axes.push((name.into(), values));
        self
    }

    /// Every grid point as `(name, value)` assignments, in declaration order.
    pub fn points(&self) -> Vec<Vec<(String, ParamValue)>> {
        let mut points = vec![Vec::new()];
        for (name, values) in &self.axes {
            points = points
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push((name.clone(), v.clone()));
                        p
                    })
                })
                .collect();
        }
        points
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub point_index: usize,
    pub assignments: Vec<(String, ParamValue)>,
    pub summary: EnsembleSummary,
}

impl SweepRow {
    pub fn label(&self) -> String {
        point_label(&self.assignments)
    }
}

fn point_label(assignments: &[(String, ParamValue)]) -> String {
    assignments
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub parameters: Vec<String>,
    pub base_seed: u64,
    pub seeds_per_point: usize,
    pub rows: Vec<SweepRow>,
}

/// One ensemble per grid point, rows in grid order.
///
/// Every point is validated before any simulation runs.
pub fn sweep(
    base: &SimParams,
    grid: &ParamGrid,
    seeds_per_point: usize,
    base_seed: u64,
) -> Result<SweepTable> {
    if grid.axes.is_empty() || grid.axes.iter().any(|(_, v)| v.is_empty()) {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    if seeds_per_point == 0 {
        return Err(Error::InvalidArgument(
            "seeds per point must be positive".into(),
        ));
    }
    let points = grid.points();
    let mut configured = Vec::with_capacity(points.len());
    for (index, assignments) in points.iter().enumerate() {
        let wrap = |source: Error| Error::GridPoint {
            index,
            label: point_label(assignments),
            source: Box::new(source),
        };
        let mut params = base.clone();
        for (key, value) in assignments {
            params.set(key, value).map_err(wrap)?;
        }
        params.validate().map_err(wrap)?;
        configured.push(params);
    }
    let rows = configured
        .into_iter()
        .zip(points)
        .enumerate()
        .map(|(index, (params, assignments))| {
            let seeds: Vec<u64> = (0..seeds_per_point)
                .map(|r| grid_seed(base_seed, index, r))
                .collect();
            Ok(SweepRow {
                point_index: index,
                assignments,
                summary: run_ensemble(&params, &seeds)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        parameters: grid.axes.iter().map(|(n, _)| n.clone()).collect(),
        base_seed,
        seeds_per_point,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_percentiles() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(nearest_rank(&xs, 1.0), 1.0);
        assert_eq!(nearest_rank(&xs, 99.0), 99.0);
        assert_eq!(nearest_rank(&xs, 50.0), 50.0);
        assert_eq!(nearest_rank(&[3.0], 1.0), 3.0);
        assert_eq!(nearest_rank(&[3.0], 99.0), 3.0);
        assert_eq!(nearest_rank(&[1.0, 2.0, 3.0], 99.0), 3.0);
        assert_eq!(nearest_rank(&[1.0, 2.0, 3.0], 1.0), 1.0);
    }

    #[test]
    fn idle_economy_summary() {
        let p = SimParams {
            mood_odds: 0,
            ..Default::default()
        };
        let s = run_ensemble(&p, &consecutive_seeds(10, 20)).unwrap();
        assert_eq!((s.mean_sales, s.std_sales), (0.0, 0.0));
        assert_eq!(s.mean_defaults, 0.0);
        assert_eq!(s.frac_any_default, 0.0);
    }

    #[test]
    fn single_seed_summary_is_that_run() {
        let p = SimParams::default();
        let s = run_ensemble(&p, &[17]).unwrap();
        let r = run_simulation(&p, 17).unwrap();
        assert_eq!(s.mean_sales, r.average_weekly_sales);
        assert_eq!(s.min_sales, s.max_sales);
        assert_eq!(s.std_sales, 0.0);
        assert_eq!(s.runs[0], RunStats::from_result(&r));
    }

    #[test]
    fn seed_list_errors() {
        let p = SimParams::default();
        assert!(run_ensemble(&p, &[]).is_err());
        assert!(matches!(
            run_ensemble(&p, &[1, 2, 1]),
            Err(Error::InvalidArgument(m)) if m.contains("seed 1")
        ));
    }

    #[test]
    fn ensemble_is_order_independent_and_matches_standalone_runs() {
        let p = SimParams::default();
        let seeds = consecutive_seeds(300, 64);
        let a = run_ensemble(&p, &seeds).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_ensemble(&p, &seeds).unwrap());
        assert_eq!(a, b);
        for (stats, &seed) in a.runs.iter().zip(&seeds) {
            let solo = run_simulation(&p, seed).unwrap();
            assert_eq!(*stats, RunStats::from_result(&solo));
        }
        assert!(a.min_sales <= a.p01_sales && a.p01_sales <= a.mean_sales);
        assert!(a.mean_sales <= a.p99_sales && a.p99_sales <= a.max_sales);
    }

    #[test]
    fn grid_points_in_declaration_order() {
        let g = ParamGrid::new()
            .axis("tax", vec![ParamValue::Real(0.1), ParamValue::Real(0.2)])
            .axis(
                "mood",
                vec![ParamValue::Int(5), ParamValue::Int(7), ParamValue::Int(9)],
            );
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(point_label(&pts[0]), "tax=0.1,mood=5");
        assert_eq!(point_label(&pts[1]), "tax=0.1,mood=7");
        assert_eq!(point_label(&pts[5]), "tax=0.2,mood=9");
    }

    #[test]
    fn single_point_sweep_equals_ensemble() {
        let base = SimParams::default();
        let g = ParamGrid::new().axis("loanlimit", vec![ParamValue::Int(-15)]);
        let t = sweep(&base, &g, 40, 5).unwrap();
        assert_eq!(t.rows.len(), 1);
        let p = SimParams {
            loan_limit: -15.0,
            ..Default::default()
        };
        let seeds: Vec<u64> = (0..40).map(|r| grid_seed(5, 0, r)).collect();
        assert_eq!(t.rows[0].summary, run_ensemble(&p, &seeds).unwrap());
    }

    #[test]
    fn bad_grid_point_is_named() {
        let g = ParamGrid::new().axis("tax", vec![ParamValue::Real(0.2), ParamValue::Real(1.5)]);
        match sweep(&SimParams::default(), &g, 3, 1) {
            Err(Error::GridPoint { index, label, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(label, "tax=1.5");
            }
            other => panic!("unexpected {other:?}"),
        }
        let g = ParamGrid::new().axis("moood", vec![ParamValue::Int(3)]);
        assert!(matches!(
            sweep(&SimParams::default(), &g, 3, 1),
            Err(Error::GridPoint { index: 0, .. })
        ));
    }

    #[test]
    fn grid_seeds_do_not_collide_at_desk_scale() {
        let mut seen = HashSet::new();
        for point in 0..50 {
            for r in 0..1000 {
                assert!(seen.insert(grid_seed(7, point, r)));
            }
        }
    }
}
