//! How often the stopping rule ends a trip with an abort, with an unlimited
//! supply of tasks at every level and no travel.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use super::rng::{Purpose, RandomSource};
use crate::stopping::{select_level, TripState};
use crate::task::{ClassSet, PriorityClass};

/// One trip from a full `budget`: keep taking the highest feasible level
/// until the rule says stop (`false`) or a task overruns the budget (`true`).
pub fn abort_trial<R: Rng + ?Sized>(classes: &ClassSet, budget: f64, rng: &mut R) -> bool {
    let mut state = TripState::new(budget, 0.0);
    let top = classes.max_level();
    let cs = classes.as_slice();
    while let Some(i) = select_level(state, top, classes, |_| true) {
        let draw: f64 = Exp1.sample(rng);
        let cost = draw * cs[i].mean_cost;
        if cost > state.p {
            return true;
        }
        state.p -= cost;
        state.q += cs[i].gain_ratio * cost;
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbortPoint {
    /// Budget over mean cost for each class, in class order.
    pub ratios: Vec<f64>,
    /// Gain ratio of each class, in class order.
    pub gain_ratios: Vec<f64>,
    pub trials: usize,
    pub aborts: usize,
    pub rate: f64,
}

/// Fraction of `trials` trips that end in an abort. Trial `k` always uses
/// the same random stream, so points that differ only in parameters are
/// compared on identical draws.
pub fn abort_rate(
    classes: &ClassSet,
    budget: f64,
    trials: usize,
    source: &RandomSource,
) -> AbortPoint {
    let aborts = (0..trials)
        .into_par_iter()
        .filter(|&k| {
            abort_trial(
                classes,
                budget,
                &mut source.stream(Purpose::AbortStudy, k as u64, 0),
            )
        })
        .count();
    AbortPoint {
        ratios: classes.iter().map(|c| budget / c.mean_cost).collect(),
        gain_ratios: classes.iter().map(|c| c.gain_ratio).collect(),
        trials,
        aborts,
        rate: if trials == 0 {
            0.0
        } else {
            aborts as f64 / trials as f64
        },
    }
}

/// Single-level sweep over budget/mean-cost ratios for each gain ratio.
/// The budget is fixed at 1 and the mean cost set to `1 / ratio`.
pub fn abort_rate_study(
    gain_ratios: &[f64],
    budget_ratios: &[f64],
    trials: usize,
    source: &RandomSource,
) -> Vec<AbortPoint> {
    let mut out = Vec::with_capacity(gain_ratios.len() * budget_ratios.len());
    for &ratio in budget_ratios {
        for &mu in gain_ratios {
            let classes = ClassSet::single(mu, 1.0 / ratio).expect("positive parameters");
            out.push(abort_rate(&classes, 1.0, trials, source));
        }
    }
    out
}

/// Two-level grid over `(budget / w_1, budget / w_2)` with gain ratios
/// `mu = (mu_1, mu_2)`, budget fixed at 1.
pub fn abort_rate_grid(
    mu: (f64, f64),
    ratios_low: &[f64],
    ratios_high: &[f64],
    trials: usize,
    source: &RandomSource,
) -> Vec<AbortPoint> {
    let mut out = Vec::with_capacity(ratios_low.len() * ratios_high.len());
    for &r1 in ratios_low {
        for &r2 in ratios_high {
            let classes = ClassSet::new([
                PriorityClass::new(1, mu.0, 1.0 / r1),
                PriorityClass::new(2, mu.1, 1.0 / r2),
            ])
            .expect("gain ratios must increase");
            out.push(abort_rate(&classes, 1.0, trials, source));
        }
    }
    out
}

/// Range of the row means and of the column means of a rate grid laid out
/// row-major as `rows x cols`. Returns `(range over rows, range over cols)`.
pub fn marginal_ranges(rates: &[f64], rows: usize, cols: usize) -> (f64, f64) {
    let range = |v: Vec<f64>| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let row_means = (0..rows)
        .map(|r| rates[r * cols..(r + 1) * cols].iter().sum::<f64>() / cols as f64)
        .collect();
    let col_means = (0..cols)
        .map(|c| (0..rows).map(|r| rates[r * cols + c]).sum::<f64>() / rows as f64)
        .collect();
    (range(row_means), range(col_means))
}
