//! Batch runs of a scenario and the CSV files they produce.
//!
//! Files written by [`run_experiment`] (schema version [`SCHEMA_VERSION`]):
//!
//! * `trials.csv`: `trial,planner,rv,wv,visited,waste,path_length`
//! * `aggregate.csv`: `planner,trials,rv_mean,rv_std,wv_mean,wv_std,visited_mean,visited_std,waste_mean,waste_std,path_length_mean,path_length_std`
//! * `curve_gain.csv`: `planner,visited,gain_fraction` (mean over trials)
//! * `curve_waste.csv`: `planner,visited,waste` (mean over trials)
//! * `abort_rates.csv`: `ratio,mu,trials,aborts,rate`
//! * `abort_grid.csv`: `mu_low,mu_high,ratio_low,ratio_high,trials,aborts,rate`
//! * `abort_marginals.csv`: `mu_low,mu_high,range_low,range_high`
//! * `manifest.toml`: scenario name, seed, trials, schema version
//!
//! Standard deviations are sample deviations (zero for a single trial).
//! Results are gathered before anything is written, so the files do not
//! depend on how trials were scheduled.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::error::ScenarioError;
use crate::scenario::{ScenarioKind, ScenarioSpec};
use crate::sim::abort_study::{abort_rate_grid, abort_rate_study, marginal_ranges, AbortPoint};
use crate::sim::{
    check_invariants, compute_metrics, curve, execute, CurvePoint, Metrics, Mission, MissionTrace,
    PlannerKind, RandomSource, Violation,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("trial {trial}, planner {planner}: {violation}{}", dump_note(.dump))]
    Violation {
        trial: usize,
        planner: PlannerKind,
        violation: Violation,
        trace: Box<MissionTrace>,
        dump: Option<PathBuf>,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

fn dump_note(dump: &Option<PathBuf>) -> String {
    dump.as_ref()
        .map(|p| format!(" (trace written to {})", p.display()))
        .unwrap_or_default()
}

/// One mission run.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: usize,
    pub planner: PlannerKind,
    pub metrics: Metrics,
    pub curve: Vec<CurvePoint>,
    pub trace: MissionTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateRow {
    pub planner: PlannerKind,
    pub trials: usize,
    pub rv_mean: f64,
    pub rv_std: f64,
    pub wv_mean: f64,
    pub wv_std: f64,
    pub visited_mean: f64,
    pub visited_std: f64,
    pub waste_mean: f64,
    pub waste_std: f64,
    pub path_length_mean: f64,
    pub path_length_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow {
    pub mu_low: f64,
    pub mu_high: f64,
    pub ratio_low: f64,
    pub ratio_high: f64,
    pub trials: usize,
    pub aborts: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalRow {
    pub mu_low: f64,
    pub mu_high: f64,
    /// Range of mean rate across the `ratio_low` axis.
    pub range_low: f64,
    /// Range of mean rate across the `ratio_high` axis.
    pub range_high: f64,
}

/// Everything a run produced, in a fixed order.
#[derive(Debug, Clone, Default)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<AggregateRow>,
    pub abort_points: Vec<AbortPoint>,
    pub grid: Vec<GridRow>,
    pub marginals: Vec<MarginalRow>,
}

/// Run every `(trial, planner)` pair of a mission scenario, checking the
/// execution invariants on each trace. Records come back sorted by trial,
/// then by the order of `spec.planners`.
pub fn run_trials(spec: &ScenarioSpec) -> Result<Vec<TrialRecord>, ExperimentError> {
    if spec.trials == 0 {
        return Ok(Vec::new());
    }
    let missions: Vec<Mission> = if spec.is_deterministic() {
        let m = spec.mission(0)?;
        vec![m; spec.trials]
    } else {
        (0..spec.trials)
            .into_par_iter()
            .map(|t| spec.mission(t))
            .collect::<Result<_, _>>()?
    };
    let jobs: Vec<(usize, PlannerKind)> = (0..spec.trials)
        .flat_map(|t| spec.planners.iter().map(move |&p| (t, p)))
        .collect();
    jobs.into_par_iter()
        .map(|(trial, planner)| {
            let mission = &missions[trial];
            let fail = |violation, trace| ExperimentError::Violation {
                trial,
                planner,
                violation,
                trace: Box::new(trace),
                dump: None,
            };
            let trace =
                execute(mission, planner, spec.robots).map_err(|e| fail(e.violation, *e.trace))?;
            if let Err(v) = check_invariants(&trace, mission) {
                return Err(fail(v, trace));
            }
            Ok(TrialRecord {
                trial,
                planner,
                metrics: compute_metrics(&trace),
                curve: curve(&trace),
                trace,
            })
        })
        .collect()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn aggregate(records: &[TrialRecord], planners: &[PlannerKind]) -> Vec<AggregateRow> {
    planners
        .iter()
        .map(|&planner| {
            let ms: Vec<&Metrics> = records
                .iter()
                .filter(|r| r.planner == planner)
                .map(|r| &r.metrics)
                .collect();
            let stat =
                |f: fn(&Metrics) -> f64| mean_std(&ms.iter().map(|m| f(m)).collect::<Vec<_>>());
            let (rv_mean, rv_std) = stat(|m| m.rv_ratio);
            let (wv_mean, wv_std) = stat(|m| m.wv_ratio);
            let (visited_mean, visited_std) = stat(|m| m.visited as f64);
            let (waste_mean, waste_std) = stat(|m| m.total_waste);
            let (path_length_mean, path_length_std) = stat(|m| m.path_length);
            AggregateRow {
                planner,
                trials: ms.len(),
                rv_mean,
                rv_std,
                wv_mean,
                wv_std,
                visited_mean,
                visited_std,
                waste_mean,
                waste_std,
                path_length_mean,
                path_length_std,
            }
        })
        .collect()
}

/// Mean curve over trials for one planner. A trial that finished early
/// holds its final value.
pub fn mean_curve(records: &[TrialRecord], planner: PlannerKind) -> Vec<CurvePoint> {
    let curves: Vec<&[CurvePoint]> = records
        .iter()
        .filter(|r| r.planner == planner)
        .map(|r| r.curve.as_slice())
        .collect();
    let len = curves.iter().map(|c| c.len()).max().unwrap_or(0);
    (0..len)
        .map(|k| {
            let (mut gain, mut waste) = (0.0, 0.0);
            for c in &curves {
                if let Some(p) = c.get(k).or(c.last()) {
                    gain += p.gain_fraction;
                    waste += p.waste;
                }
            }
            let n = curves.len() as f64;
            CurvePoint {
                visited: k + 1,
                gain_fraction: gain / n,
                waste: waste / n,
            }
        })
        .collect()
}

/// Run a scenario in memory.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ExperimentResult, ExperimentError> {
    spec.validate()?;
    let source = RandomSource::new(spec.seed);
    let mut out = ExperimentResult::default();
    match spec.kind() {
        ScenarioKind::Mission => {
            out.records = run_trials(spec)?;
            out.aggregates = aggregate(&out.records, &spec.planners);
        }
        ScenarioKind::AbortStudy => {
            let s = spec.abort_study.as_ref().expect("kind checked");
            out.abort_points =
                abort_rate_study(&s.gain_ratios, &s.budget_ratios, spec.trials, &source);
        }
        ScenarioKind::AbortGrid => {
            let s = spec.abort_grid.as_ref().expect("kind checked");
            for &[mu_low, mu_high] in &s.configs {
                let points = abort_rate_grid(
                    (mu_low, mu_high),
                    &s.ratios_low,
                    &s.ratios_high,
                    spec.trials,
                    &source,
                );
                let rates: Vec<f64> = points.iter().map(|p| p.rate).collect();
                let (range_low, range_high) =
                    marginal_ranges(&rates, s.ratios_low.len(), s.ratios_high.len());
                out.marginals.push(MarginalRow {
                    mu_low,
                    mu_high,
                    range_low,
                    range_high,
                });
                out.grid.extend(points.iter().map(|p| GridRow {
                    mu_low,
                    mu_high,
                    ratio_low: p.ratios[0],
                    ratio_high: p.ratios[1],
                    trials: p.trials,
                    aborts: p.aborts,
                    rate: p.rate,
                }));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OutputOptions {
    /// Also write one trace file per run under `traces/`.
    pub traces: bool,
}

fn write_csv<T: Serialize>(
    dir: &Path,
    name: &str,
    rows: impl IntoIterator<Item = T>,
) -> Result<PathBuf, ExperimentError> {
    let path = dir.join(name);
    let err = |source| ExperimentError::Csv {
        path: path.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&path).map_err(err)?;
    for row in rows {
        w.serialize(row).map_err(err)?;
    }
    w.flush().map_err(|source| ExperimentError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

// header-only file so empty results still carry their schema
fn write_header(dir: &Path, name: &str, header: &str) -> Result<PathBuf, ExperimentError> {
    let path = dir.join(name);
    std::fs::write(&path, format!("{header}\n")).map_err(|source| ExperimentError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn write_text(path: PathBuf, text: &str) -> Result<PathBuf, ExperimentError> {
    std::fs::write(&path, text).map_err(|source| ExperimentError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

#[derive(Serialize)]
struct TrialRow {
    trial: usize,
    planner: PlannerKind,
    rv: f64,
    wv: f64,
    visited: usize,
    waste: f64,
    path_length: f64,
}

#[derive(Serialize)]
struct GainRow {
    planner: PlannerKind,
    visited: usize,
    gain_fraction: f64,
}

#[derive(Serialize)]
struct WasteRow {
    planner: PlannerKind,
    visited: usize,
    waste: f64,
}

#[derive(Serialize)]
struct RateRow {
    ratio: f64,
    mu: f64,
    trials: usize,
    aborts: usize,
    rate: f64,
}

/// Run a scenario and write its CSV files into `out_dir` (created if
/// missing). Returns the in-memory result and the files written.
///
/// On an invariant violation the offending trace is written to
/// `violation_trial<k>_<planner>.trace` before the error is returned.
pub fn run_experiment(
    spec: &ScenarioSpec,
    out_dir: &Path,
    opts: OutputOptions,
) -> Result<(ExperimentResult, Vec<PathBuf>), ExperimentError> {
    std::fs::create_dir_all(out_dir).map_err(|source| ExperimentError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let result = match run_scenario(spec) {
        Err(ExperimentError::Violation {
            trial,
            planner,
            violation,
            trace,
            ..
        }) => {
            let path = out_dir.join(format!("violation_trial{trial}_{planner}.trace"));
            let dump = std::fs::write(&path, trace.to_text()).ok().map(|_| path);
            return Err(ExperimentError::Violation {
                trial,
                planner,
                violation,
                trace,
                dump,
            });
        }
        other => other?,
    };
    let mut files = Vec::new();
    let manifest = format!(
        "schema = {SCHEMA_VERSION}\nname = {:?}\nseed = {}\ntrials = {}\n",
        spec.name, spec.seed, spec.trials
    );
    files.push(write_text(out_dir.join("manifest.toml"), &manifest)?);
    match spec.kind() {
        ScenarioKind::Mission => {
            let rows = result.records.iter().map(|r| TrialRow {
                trial: r.trial,
                planner: r.planner,
                rv: r.metrics.rv_ratio,
                wv: r.metrics.wv_ratio,
                visited: r.metrics.visited,
                waste: r.metrics.total_waste,
                path_length: r.metrics.path_length,
            });
            if result.records.is_empty() {
                files.push(write_header(
                    out_dir,
                    "trials.csv",
                    "trial,planner,rv,wv,visited,waste,path_length",
                )?);
            } else {
                files.push(write_csv(out_dir, "trials.csv", rows)?);
            }
            files.push(write_csv(out_dir, "aggregate.csv", &result.aggregates)?);
            let mut gain = Vec::new();
            let mut waste = Vec::new();
            for &p in &spec.planners {
                for c in mean_curve(&result.records, p) {
                    gain.push(GainRow {
                        planner: p,
                        visited: c.visited,
                        gain_fraction: c.gain_fraction,
                    });
                    waste.push(WasteRow {
                        planner: p,
                        visited: c.visited,
                        waste: c.waste,
                    });
                }
            }
            if gain.is_empty() {
                files.push(write_header(
                    out_dir,
                    "curve_gain.csv",
                    "planner,visited,gain_fraction",
                )?);
                files.push(write_header(
                    out_dir,
                    "curve_waste.csv",
                    "planner,visited,waste",
                )?);
            } else {
                files.push(write_csv(out_dir, "curve_gain.csv", gain)?);
                files.push(write_csv(out_dir, "curve_waste.csv", waste)?);
            }
            if opts.traces {
                let dir = out_dir.join("traces");
                std::fs::create_dir_all(&dir).map_err(|source| ExperimentError::Io {
                    path: dir.clone(),
                    source,
                })?;
                for r in &result.records {
                    let path = dir.join(format!("trial{}_{}.trace", r.trial, r.planner));
                    files.push(write_text(path, &r.trace.to_text())?);
                }
            }
        }
        ScenarioKind::AbortStudy => {
            let rows = result.abort_points.iter().map(|p| RateRow {
                ratio: p.ratios[0],
                mu: p.gain_ratios[0],
                trials: p.trials,
                aborts: p.aborts,
                rate: p.rate,
            });
            files.push(write_csv(out_dir, "abort_rates.csv", rows)?);
        }
        ScenarioKind::AbortGrid => {
            files.push(write_csv(out_dir, "abort_grid.csv", &result.grid)?);
            files.push(write_csv(
                out_dir,
                "abort_marginals.csv",
                &result.marginals,
            )?);
        }
    }
    Ok((result, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn zero_trials_is_empty_success() {
        let mut spec = crate::scenario::preset("table1_s1").unwrap();
        spec.trials = 0;
        let dir = tempfile::tempdir().unwrap();
        let (res, files) = run_experiment(&spec, dir.path(), OutputOptions::default()).unwrap();
        assert!(res.records.is_empty());
        assert!(files.iter().all(|f| f.exists()));
        let trials = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
        assert_eq!(
            trials.trim(),
            "trial,planner,rv,wv,visited,waste,path_length"
        );
    }
}
