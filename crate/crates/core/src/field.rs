//! Gridded sensor fields turned into task sets.
//!
//! A cell whose reading falls short of the desired level holds a task whose
//! cost is the shortfall. Band thresholds split shortfalls into priority
//! levels: a task's level is the number of thresholds strictly below its
//! shortfall, so with `bands = [0]` every positive shortfall is level 1.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;

use crate::error::FieldError;
use crate::graph::{AisleGraph, VertexId};
use crate::sim::{Budgets, Mission};
use crate::task::{ClassSet, PriorityClass, Task};

/// Travel and resource budgets used for field-scale runs.
pub const FIELD_BUDGETS: Budgets = Budgets {
    resource: 400.0,
    energy: 800.0,
};

/// Rectangular grid of readings; `None` marks a cell without data.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    rows: usize,
    cols: usize,
    values: Vec<Option<f64>>,
}

impl FieldGrid {
    pub fn new(rows: usize, cols: usize, values: Vec<Option<f64>>) -> Result<Self, FieldError> {
        if rows == 0 || cols == 0 {
            return Err(FieldError::Empty);
        }
        if values.len() != rows * cols {
            return Err(FieldError::Ragged {
                line: 0,
                expected: rows * cols,
                found: values.len(),
            });
        }
        Ok(Self { rows, cols, values })
    }

    /// Comma-separated rows, one grid row per line. Empty cells have no data.
    pub fn parse(text: &str) -> Result<Self, FieldError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut values = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(rows + 1, |p| p.line() as usize);
            let expected = *cols.get_or_insert(record.len());
            if record.len() != expected {
                return Err(FieldError::Ragged {
                    line,
                    expected,
                    found: record.len(),
                });
            }
            for (j, cell) in record.iter().enumerate() {
                if cell.is_empty() {
                    values.push(None);
                    continue;
                }
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => values.push(Some(v)),
                    _ => {
                        return Err(FieldError::NotNumeric {
                            line,
                            col: j + 1,
                            value: cell.to_string(),
                        })
                    }
                }
            }
            rows += 1;
        }
        Self::new(rows, cols.unwrap_or(0), values)
    }

    pub fn load(path: &Path) -> Result<Self, FieldError> {
        let text = std::fs::read_to_string(path).map_err(|source| FieldError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c > 0 {
                    out.push(',');
                }
                if let Some(v) = self.get(r, c) {
                    let _ = write!(out, "{v}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Reading at zero-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.cols + col]
    }

    /// Smooth random field around `desired`: a few low-frequency waves plus
    /// small per-cell noise, so shortfalls come in spatially coherent
    /// patches.
    pub fn synthetic<R: Rng + ?Sized>(
        rows: usize,
        cols: usize,
        desired: f64,
        rng: &mut R,
    ) -> Result<Self, FieldError> {
        let waves: Vec<(f64, f64, f64, f64)> = [2.5, 1.8, 1.0]
            .iter()
            .map(|&amp| {
                let fx = rng.random_range(0.5..3.0);
                let fy = rng.random_range(0.5..3.0);
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                (amp, fx, fy, phase)
            })
            .collect();
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let y = r as f64 / rows as f64;
            for c in 0..cols {
                let x = c as f64 / cols as f64;
                let smooth: f64 = waves
                    .iter()
                    .map(|(a, fx, fy, ph)| {
                        a * (std::f64::consts::TAU * (fx * x + fy * y) + ph).sin()
                    })
                    .sum();
                let noise = rng.random_range(-0.5..0.5);
                values.push(Some(desired - 1.0 + smooth + noise));
            }
        }
        Self::new(rows, cols, values)
    }
}

fn check_bands(bands: &[f64]) -> Result<(), FieldError> {
    if bands.is_empty()
        || bands.iter().any(|b| !b.is_finite())
        || bands.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(FieldError::Bands);
    }
    Ok(())
}

/// Tasks and priority classes read off a grid. Level `s` gets gain ratio
/// `gain_ratios[s - 1]` (default `s`) and the mean shortfall of its band as
/// mean cost. Levels without any task are left out.
pub fn field_tasks(
    grid: &FieldGrid,
    desired: f64,
    bands: &[f64],
    gain_ratios: Option<&[f64]>,
) -> Result<(ClassSet, Vec<Task>), FieldError> {
    check_bands(bands)?;
    let mut tasks = Vec::new();
    let mut sums = vec![(0.0, 0usize); bands.len()];
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            let Some(v) = grid.get(r, c) else { continue };
            let deficit = (desired - v).max(0.0);
            let level = bands.iter().filter(|&&t| deficit > t).count();
            if deficit <= 0.0 || level == 0 {
                continue;
            }
            sums[level - 1].0 += deficit;
            sums[level - 1].1 += 1;
            tasks.push(Task::new(
                VertexId::new(r + 1, c + 1),
                level as u32,
                deficit,
            ));
        }
    }
    let classes: Vec<PriorityClass> = sums
        .iter()
        .enumerate()
        .filter(|(_, (_, n))| *n > 0)
        .map(|(i, (sum, n))| {
            let level = i as u32 + 1;
            let mu = gain_ratios
                .and_then(|g| g.get(i).copied())
                .unwrap_or(f64::from(level));
            PriorityClass::new(level, mu, sum / *n as f64)
        })
        .collect();
    let classes = if classes.is_empty() {
        ClassSet::single(1.0, 1.0)
    } else {
        ClassSet::new(classes)
    }
    .map_err(|e| FieldError::Mission(e.into()))?;
    Ok((classes, tasks))
}

/// Unit-cost graph matching a grid, with base stations at the middle row of
/// both connector columns.
pub fn field_graph(rows: usize, cols: usize) -> Result<AisleGraph, FieldError> {
    let mid = (rows / 2).max(1);
    AisleGraph::uniform(
        rows,
        cols,
        1.0,
        [VertexId::new(mid, 0), VertexId::new(mid, cols + 1)],
    )
    .map_err(|e| FieldError::Mission(e.into()))
}

/// Mission built from a grid with field budgets and default gain ratios.
pub fn mission_from_grid(
    grid: &FieldGrid,
    desired: f64,
    bands: &[f64],
) -> Result<Mission, FieldError> {
    let (classes, tasks) = field_tasks(grid, desired, bands, None)?;
    let graph = field_graph(grid.rows(), grid.cols())?;
    Ok(Mission::new(
        Arc::new(graph),
        classes,
        tasks,
        FIELD_BUDGETS,
        None,
    )?)
}

/// Read a grid file and build its mission.
pub fn ingest_field_grid(path: &Path, desired: f64, bands: &[f64]) -> Result<Mission, FieldError> {
    mission_from_grid(&FieldGrid::load(path)?, desired, bands)
}
