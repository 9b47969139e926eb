//! One-stage-look-ahead stopping rule for exponential task costs.
//!
//! With remaining resource `p` and trip gain `q`, performing one more level-`s`
//! task is worthwhile while `q < g(p, s)` where
//! `g(p, s) = (mu / lambda) (exp(lambda p) - 1 - lambda p)`.

use std::collections::HashMap;

use crate::error::{ClassError, StoppingError};
use crate::task::{ClassSet, PriorityClass, TaskBoard};

/// Remaining resource `p` and gain `q` accumulated on the current trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripState {
    pub p: f64,
    pub q: f64,
}

impl TripState {
    pub fn new(p: f64, q: f64) -> Self {
        Self { p, q }
    }
}

/// `exp(x) - 1 - x` without cancellation for small `x`.
pub fn expm1_minus_x(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let mut term = x * x / 2.0;
        let mut sum = term;
        let mut k = 2.0;
        while term.abs() > sum.abs() * 1e-17 {
            k += 1.0;
            term *= x / k;
            sum += term;
        }
        sum
    } else {
        x.exp_m1() - x
    }
}

/// `ln(exp(x) - 1 - x)` for `x > 0`, finite even where `exp(x)` overflows.
pub fn ln_expm1_minus_x(x: f64) -> f64 {
    if x < 30.0 {
        expm1_minus_x(x).ln()
    } else {
        x + (-(1.0 + x) * (-x).exp()).ln_1p()
    }
}

fn g(p: f64, mu: f64, lambda: f64) -> f64 {
    mu / lambda * expm1_minus_x(lambda * p)
}

/// Stopping boundary `g(p, s)`.
pub fn boundary(p: f64, class: &PriorityClass) -> Result<f64, StoppingError> {
    if !(p >= 0.0) {
        return Err(StoppingError::NegativeResource(p));
    }
    Ok(g(p, class.gain_ratio, class.rate()))
}

/// `ln g(p, s)` for `p > 0`.
pub fn ln_boundary(p: f64, class: &PriorityClass) -> f64 {
    (class.gain_ratio * class.mean_cost).ln() + ln_expm1_minus_x(p / class.mean_cost)
}

/// True when another level-`s` task is worth attempting: `p > 0` and
/// `q < g(p, s)`. Sitting on the boundary means stop.
pub fn is_level_feasible(state: TripState, class: &PriorityClass) -> bool {
    if !(state.p > 0.0) {
        return false;
    }
    if state.q <= 0.0 {
        return true;
    }
    let x = state.p / class.mean_cost;
    if x < 30.0 {
        state.q < g(state.p, class.gain_ratio, class.rate())
    } else {
        state.q.ln() < ln_boundary(state.p, class)
    }
}

/// Priority descent: starting at the highest class with level `<= start_level`,
/// return the index of the first class that is feasible and has work left.
///
/// On an infeasible level, lower levels whose mean cost is not smaller are
/// skipped outright, since their boundary lies below the current one. A
/// feasible level with nothing pending falls through to the next level down.
pub fn select_level(
    state: TripState,
    start_level: u32,
    classes: &ClassSet,
    has_pending: impl Fn(usize) -> bool,
) -> Option<usize> {
    let cs = classes.as_slice();
    let mut idx = classes.index_at_or_below(start_level)?;
    loop {
        if is_level_feasible(state, &cs[idx]) {
            if has_pending(idx) {
                return Some(idx);
            }
        } else {
            while idx > 0 && cs[idx - 1].mean_cost >= cs[idx].mean_cost {
                idx -= 1;
            }
        }
        if idx == 0 {
            return None;
        }
        idx -= 1;
    }
}

/// Pending tasks of a single level, grouped by row as `(row, count)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidateSet {
    /// 0 when empty.
    pub level: u32,
    pub rows: Vec<(usize, usize)>,
}

impl CandidateSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn task_count(&self) -> usize {
        self.rows.iter().map(|(_, c)| c).sum()
    }

    pub fn count_in(&self, row: usize) -> usize {
        self.rows
            .iter()
            .find(|(r, _)| *r == row)
            .map_or(0, |(_, c)| *c)
    }
}

/// Candidate tasks `Q1` and the level they belong to.
pub fn sample_q1(state: TripState, start_level: u32, board: &TaskBoard) -> CandidateSet {
    let classes = board.classes();
    match select_level(state, start_level, classes, |c| {
        board.pending_at_class(c) > 0
    }) {
        Some(c) => CandidateSet {
            level: classes.as_slice()[c].level,
            rows: board.rows_with_pending(c),
        },
        None => CandidateSet::empty(),
    }
}

/// How the boundary curves of a lower and a higher level relate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryRelation {
    /// The lower level's mean cost is at least the higher one's, so its
    /// boundary lies below everywhere.
    MeanCostDominated,
    /// The higher level's boundary lies below the lower one's for all `p > 0`.
    Condition1,
    /// The higher boundary is on top up to `crossing`, below afterwards.
    Condition2 { crossing: f64 },
}

pub fn classify_boundaries(
    low: &PriorityClass,
    high: &PriorityClass,
) -> Result<BoundaryRelation, StoppingError> {
    if low.level >= high.level || low.gain_ratio >= high.gain_ratio {
        return Err(ClassError::Ordering.into());
    }
    if low.mean_cost >= high.mean_cost {
        return Ok(BoundaryRelation::MeanCostDominated);
    }
    let diff = |p: f64| ln_boundary(p, high) - ln_boundary(p, low);
    let lo = 1e-9 * low.mean_cost.min(high.mean_cost);
    let hi = 200.0 * low.mean_cost.max(high.mean_cost);
    let (flo, fhi) = (diff(lo), diff(hi));
    if !(flo >= 0.0 && fhi < 0.0) {
        return Ok(BoundaryRelation::Condition1);
    }
    Ok(BoundaryRelation::Condition2 {
        crossing: illinois(diff, lo, hi, flo, fhi, 1e-12),
    })
}

// Regula falsi with the Illinois modification.
fn illinois(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    rtol: f64,
) -> f64 {
    let mut side = 0i8;
    for _ in 0..500 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() <= rtol * c.abs() {
            return c;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa /= 2.0;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb /= 2.0;
            }
            side = 1;
        }
    }
    (a + b) / 2.0
}

/// Discretized value of the expected-return recursion
/// `Phi(p, q) = max(q, max_s int_0^p lambda e^{-lambda x} Phi(p - x, q + mu x) dx)`
/// with `Phi(p, q) = q` at `p = 0`. An abort yields nothing.
///
/// Resource lives on the lattice `p = j h`; the cost integral is split into
/// cells of width `h` with `Phi` interpolated linearly inside each cell and
/// the exponential weight integrated exactly. The tail beyond `40 / lambda`
/// is dropped. Used as a test oracle only.
#[derive(Debug, Clone)]
pub struct DpOracle {
    classes: Vec<PriorityClass>,
    h: f64,
    // per class: (a_k, b_k) weights of the cell [k h, (k + 1) h]
    weights: Vec<Vec<(f64, f64)>>,
    memo: HashMap<Vec<u32>, f64>,
}

impl DpOracle {
    pub fn new(classes: &ClassSet, grid_step: f64) -> Result<Self, StoppingError> {
        if !(grid_step > 0.0) || !grid_step.is_finite() {
            return Err(StoppingError::Grid);
        }
        let weights = classes
            .iter()
            .map(|c| {
                let lh = c.rate() * grid_step;
                let cells = (40.0 / lh).ceil() as usize;
                let decay = (-lh).exp();
                let mass = -(-lh).exp_m1();
                let b_unit = mass / lh - decay;
                let mut out = Vec::with_capacity(cells);
                let mut e = 1.0;
                for _ in 0..cells {
                    let m = e * mass;
                    let b = e * b_unit;
                    out.push((m - b, b));
                    e *= decay;
                }
                out
            })
            .collect();
        Ok(Self {
            classes: classes.as_slice().to_vec(),
            h: grid_step,
            weights,
            memo: HashMap::new(),
        })
    }

    /// `Phi` at a lattice state: `p` must be a multiple of the grid step and
    /// `q` a multiple of `mu_1 * h`.
    pub fn value(&mut self, state: TripState) -> Result<f64, StoppingError> {
        let j = lattice_index(state.p, self.h)?;
        let m0 = lattice_index(state.q, self.classes[0].gain_ratio * self.h)?;
        if j == 0 {
            return Ok(state.q);
        }
        if self.classes.len() == 1 {
            return Ok(self.single_class_grid(j as usize, m0 as usize)[j as usize][m0 as usize]);
        }
        let mut key = vec![0u32; self.classes.len() + 1];
        key[0] = j;
        key[1] = m0;
        Ok(self.eval(key))
    }

    fn q_of(&self, m: &[u32]) -> f64 {
        self.classes
            .iter()
            .zip(m)
            .map(|(c, &k)| c.gain_ratio * self.h * f64::from(k))
            .sum()
    }

    fn eval(&mut self, key: Vec<u32>) -> f64 {
        let j = key[0] as usize;
        let q = self.q_of(&key[1..]);
        if j == 0 {
            return q;
        }
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let mut best = q;
        for s in 0..self.classes.len() {
            let cells = j.min(self.weights[s].len());
            let w: Vec<(f64, f64)> = self.weights[s][..cells].to_vec();
            let mut rest = 0.0;
            for (k, &(a, b)) in w.iter().enumerate() {
                if k > 0 {
                    rest += a * self.eval(shift(&key, s, k));
                }
                rest += b * self.eval(shift(&key, s, k + 1));
            }
            let cont = rest / (1.0 - w[0].0);
            if cont > best {
                best = cont;
            }
        }
        self.memo.insert(key, best);
        best
    }

    /// Single-class table `phi[j][i] = Phi(j h, i mu h)` for `j <= j_max` and
    /// `i <= i_max`.
    pub fn single_class_grid(&self, j_max: usize, i_max: usize) -> Vec<Vec<f64>> {
        let mu_h = self.classes[0].gain_ratio * self.h;
        let w = &self.weights[0];
        let mut phi: Vec<Vec<f64>> = Vec::with_capacity(j_max + 1);
        for j in 0..=j_max {
            let width = i_max + (j_max - j) + 1;
            let mut row = Vec::with_capacity(width);
            for i in 0..width {
                let q = mu_h * i as f64;
                if j == 0 {
                    row.push(q);
                    continue;
                }
                let cells = j.min(w.len());
                let mut rest = 0.0;
                for (k, &(a, b)) in w.iter().enumerate().take(cells) {
                    if k > 0 {
                        rest += a * phi[j - k][i + k];
                    }
                    rest += b * phi[j - k - 1][i + k + 1];
                }
                row.push(q.max(rest / (1.0 - w[0].0)));
            }
            phi.push(row);
        }
        for row in &mut phi {
            row.truncate(i_max + 1);
        }
        phi
    }
}

fn shift(key: &[u32], class: usize, k: usize) -> Vec<u32> {
    let mut next = key.to_vec();
    next[0] -= k as u32;
    next[1 + class] += k as u32;
    next
}

fn lattice_index(x: f64, step: f64) -> Result<u32, StoppingError> {
    let r = x / step;
    let k = r.round();
    if !(x >= 0.0) || (r - k).abs() > 1e-6 || k > f64::from(u32::MAX) {
        return Err(StoppingError::Grid);
    }
    Ok(k as u32)
}

/// Evaluate the oracle at one state.
pub fn dp_value_oracle(
    state: TripState,
    classes: &ClassSet,
    grid_step: f64,
) -> Result<f64, StoppingError> {
    DpOracle::new(classes, grid_step)?.value(state)
}
