//! Stochastic-vertex-cost aisle graph.
//!
//! A field with `m` rows and `n` sampling locations per row becomes an
//! `m x (n + 2)` lattice: interior columns `1..=n` hold tasks, columns `0`
//! and `n + 1` are virtual connector columns. Rows only connect through the
//! connector columns, and motion inside a row never reverses.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// A vertex `v_{row,col}`: `row` in `1..=m`, `col` in `0..=n+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId {
    pub row: usize,
    pub col: usize,
}

impl VertexId {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v({},{})", self.row, self.col)
    }
}

/// Direction of travel along a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Heading {
    /// Toward column 0 (`hl`).
    Left,
    /// Toward column n+1 (`hr`).
    Right,
}

impl Heading {
    pub fn reversed(self) -> Self {
        match self {
            Heading::Left => Heading::Right,
            Heading::Right => Heading::Left,
        }
    }

    /// The connector column a robot moving this way exits through.
    pub fn exit_side(self) -> Side {
        match self {
            Heading::Left => Side::Left,
            Heading::Right => Side::Right,
        }
    }
}

/// One of the two virtual connector columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Column 0.
    Left,
    /// Column n+1.
    Right,
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// Heading of a robot entering a row from this side.
    pub fn inward(self) -> Heading {
        match self {
            Side::Left => Heading::Right,
            Side::Right => Heading::Left,
        }
    }

    fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}

/// Edge cost table.
///
/// `horizontal[i][j]` is the cost of `e_{i+1, j^+}`, the edge between columns
/// `j` and `j + 1` of row `i + 1` (`j` in `0..=n`). `left[i]` / `right[i]` are
/// the vertical edges between rows `i + 1` and `i + 2` on columns 0 / n+1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCosts {
    pub horizontal: Vec<Vec<f64>>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl EdgeCosts {
    /// Every edge costs `cost` except the zero-cost connector edges.
    pub fn uniform(m: usize, n: usize, cost: f64) -> Self {
        let row: Vec<f64> = (0..=n)
            .map(|j| if j == 0 || j == n { 0.0 } else { cost })
            .collect();
        Self {
            horizontal: vec![row; m],
            left: vec![cost; m.saturating_sub(1)],
            right: vec![cost; m.saturating_sub(1)],
        }
    }
}

/// Aisle graph with `m` rows and `n` interior columns. Immutable once built.
#[derive(Debug, Clone)]
pub struct AisleGraph {
    m: usize,
    n: usize,
    costs: EdgeCosts,
    bases: Vec<VertexId>,
    base_mask: Vec<bool>,
    // hprefix[i][j] = cost from column 0 to column j along row i+1
    hprefix: Vec<Vec<f64>>,
    // vprefix[side][i] = cost from row 1 to row i+1 along that column
    vprefix: [Vec<f64>; 2],
    beta: Vec<f64>,
    // cheapest return from the end of a row when no base sits on that column
    crossover: [Vec<f64>; 2],
}

impl AisleGraph {
    pub fn new(
        m: usize,
        n: usize,
        costs: EdgeCosts,
        bases: impl IntoIterator<Item = VertexId>,
    ) -> Result<Self, GraphError> {
        if m == 0 || n == 0 {
            return Err(GraphError::EmptyGraph { m, n });
        }
        if costs.horizontal.len() != m
            || costs.horizontal.iter().any(|r| r.len() != n + 1)
            || costs.left.len() != m - 1
            || costs.right.len() != m - 1
        {
            return Err(GraphError::CostShape { m, n });
        }
        let all = costs
            .horizontal
            .iter()
            .flatten()
            .chain(&costs.left)
            .chain(&costs.right);
        for &c in all {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(GraphError::NegativeCost(c));
            }
        }
        for (i, row) in costs.horizontal.iter().enumerate() {
            for j in [0, n] {
                if row[j] != 0.0 {
                    return Err(GraphError::NonzeroConnector {
                        row: i + 1,
                        edge: j,
                        cost: row[j],
                    });
                }
            }
        }

        let mut bases: Vec<VertexId> = bases.into_iter().collect();
        bases.sort();
        bases.dedup();
        if bases.is_empty() {
            return Err(GraphError::NoBaseStation);
        }
        let mut base_mask = vec![false; m * (n + 2)];
        for b in &bases {
            if b.row == 0 || b.row > m || b.col > n + 1 {
                return Err(GraphError::VertexOutOfRange { vertex: *b, m, n });
            }
            if b.col != 0 && b.col != n + 1 {
                return Err(GraphError::InteriorBase(*b));
            }
            base_mask[(b.row - 1) * (n + 2) + b.col] = true;
        }

        let hprefix: Vec<Vec<f64>> = costs
            .horizontal
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                let mut out = Vec::with_capacity(n + 2);
                out.push(0.0);
                for &c in row {
                    acc += c;
                    out.push(acc);
                }
                out
            })
            .collect();
        let prefix = |col: &[f64]| {
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(m);
            out.push(0.0);
            for &c in col {
                acc += c;
                out.push(acc);
            }
            out
        };
        let vprefix = [prefix(&costs.left), prefix(&costs.right)];
        let beta = costs
            .horizontal
            .iter()
            .map(|row| row[1..n].iter().sum())
            .collect();

        let mut graph = Self {
            m,
            n,
            costs,
            bases,
            base_mask,
            hprefix,
            vprefix,
            beta,
            crossover: [Vec::new(), Vec::new()],
        };
        graph.crossover = [
            graph.compute_crossover(Side::Left),
            graph.compute_crossover(Side::Right),
        ];
        Ok(graph)
    }

    /// Graph with every non-connector edge costing `cost`.
    pub fn uniform(
        m: usize,
        n: usize,
        cost: f64,
        bases: impl IntoIterator<Item = VertexId>,
    ) -> Result<Self, GraphError> {
        Self::new(m, n, EdgeCosts::uniform(m, n, cost), bases)
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    /// Interior columns per row (`n`).
    pub fn interior_cols(&self) -> usize {
        self.n
    }

    pub fn costs(&self) -> &EdgeCosts {
        &self.costs
    }

    pub fn bases(&self) -> &[VertexId] {
        &self.bases
    }

    pub fn vertex_count(&self) -> usize {
        self.m * (self.n + 2)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.row >= 1 && v.row <= self.m && v.col <= self.n + 1
    }

    pub fn is_interior(&self, v: VertexId) -> bool {
        v.col >= 1 && v.col <= self.n
    }

    pub fn side_of(&self, v: VertexId) -> Option<Side> {
        if v.col == 0 {
            Some(Side::Left)
        } else if v.col == self.n + 1 {
            Some(Side::Right)
        } else {
            None
        }
    }

    pub fn side_col(&self, side: Side) -> usize {
        match side {
            Side::Left => 0,
            Side::Right => self.n + 1,
        }
    }

    pub fn is_base(&self, v: VertexId) -> bool {
        self.contains(v) && self.base_mask[self.index(v)]
    }

    /// Dense index in `0..vertex_count()`, row-major.
    pub fn index(&self, v: VertexId) -> usize {
        (v.row - 1) * (self.n + 2) + v.col
    }

    /// Undirected neighbours following the aisle edge rules.
    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(3);
        if self.is_interior(v) {
            out.push(VertexId::new(v.row, v.col - 1));
            out.push(VertexId::new(v.row, v.col + 1));
        } else {
            if v.row > 1 {
                out.push(VertexId::new(v.row - 1, v.col));
            }
            if v.row < self.m {
                out.push(VertexId::new(v.row + 1, v.col));
            }
            let into = if v.col == 0 { 1 } else { self.n };
            out.push(VertexId::new(v.row, into));
        }
        out
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    /// Cost of the edge between two adjacent vertices.
    pub fn edge_cost(&self, a: VertexId, b: VertexId) -> Option<f64> {
        if !self.contains(a) || !self.contains(b) {
            return None;
        }
        if a.row == b.row && a.col.abs_diff(b.col) == 1 {
            let j = a.col.min(b.col);
            return Some(self.costs.horizontal[a.row - 1][j]);
        }
        if a.col == b.col && a.row.abs_diff(b.row) == 1 {
            let i = a.row.min(b.row) - 1;
            return match self.side_of(a)? {
                Side::Left => Some(self.costs.left[i]),
                Side::Right => Some(self.costs.right[i]),
            };
        }
        None
    }

    /// Directed successors of `(pose, heading)` with the heading after the move.
    ///
    /// Interior vertices only move forward. On a connector column a robot can
    /// always move vertically (which turns it to face the field), and can
    /// enter the row it stands on when it already faces inward, when the
    /// vertex is a base station, or when no vertical move exists.
    pub fn directed_moves(
        &self,
        pose: VertexId,
        heading: Heading,
    ) -> Vec<(VertexId, Heading, f64)> {
        let mut out = Vec::with_capacity(3);
        match self.side_of(pose) {
            None => {
                let next = match heading {
                    Heading::Right => VertexId::new(pose.row, pose.col + 1),
                    Heading::Left => VertexId::new(pose.row, pose.col - 1),
                };
                let j = pose.col.min(next.col);
                out.push((next, heading, self.costs.horizontal[pose.row - 1][j]));
            }
            Some(side) => {
                let inward = side.inward();
                let column = match side {
                    Side::Left => &self.costs.left,
                    Side::Right => &self.costs.right,
                };
                if pose.row > 1 {
                    out.push((
                        VertexId::new(pose.row - 1, pose.col),
                        inward,
                        column[pose.row - 2],
                    ));
                }
                if pose.row < self.m {
                    out.push((
                        VertexId::new(pose.row + 1, pose.col),
                        inward,
                        column[pose.row - 1],
                    ));
                }
                if self.can_enter(pose, heading) {
                    let (col, j) = match side {
                        Side::Left => (1, 0),
                        Side::Right => (self.n, self.n),
                    };
                    out.push((
                        VertexId::new(pose.row, col),
                        inward,
                        self.costs.horizontal[pose.row - 1][j],
                    ));
                }
            }
        }
        out
    }

    /// Vertices reachable in one legal move.
    pub fn legal_moves(&self, pose: VertexId, heading: Heading) -> Vec<VertexId> {
        self.directed_moves(pose, heading)
            .into_iter()
            .map(|(v, _, _)| v)
            .collect()
    }

    fn can_enter(&self, pose: VertexId, heading: Heading) -> bool {
        match self.side_of(pose) {
            Some(side) => heading == side.inward() || self.is_base(pose) || self.m == 1,
            None => false,
        }
    }

    fn check_row(&self, row: usize) -> Result<(), GraphError> {
        if row == 0 || row > self.m {
            Err(GraphError::RowOutOfRange { row, m: self.m })
        } else {
            Ok(())
        }
    }

    /// Vertical travel cost between two rows along one connector column.
    pub fn vertical_cost(&self, side: Side, from_row: usize, to_row: usize) -> f64 {
        let p = &self.vprefix[side.index()];
        (p[to_row - 1] - p[from_row - 1]).abs()
    }

    /// Cost of continuing from an interior vertex to the end of its row.
    pub fn forward_cost(&self, pose: VertexId, heading: Heading) -> f64 {
        let p = &self.hprefix[pose.row - 1];
        match heading {
            Heading::Right => p[self.n + 1] - p[pose.col],
            Heading::Left => p[pose.col],
        }
    }

    /// `t_beta`: cost of crossing a row between its two interior end vertices.
    pub fn t_beta(&self, row: usize) -> Result<f64, GraphError> {
        self.check_row(row)?;
        Ok(self.beta[row - 1])
    }

    /// `t_gamma`: vertical cost from the end of `row` reached while moving
    /// `heading_after_row` to the closest base station on that column.
    pub fn t_gamma(&self, row: usize, heading_after_row: Heading) -> Result<f64, GraphError> {
        self.check_row(row)?;
        let side = heading_after_row.exit_side();
        let col = self.side_col(side);
        self.bases
            .iter()
            .filter(|b| b.col == col)
            .map(|b| self.vertical_cost(side, row, b.row))
            .min_by(f64::total_cmp)
            .ok_or(GraphError::NoBaseOnColumn { row, col })
    }

    /// Return cost from the end of `row` after traversing it with
    /// `heading_after_row`: `t_gamma` when a base sits on that column,
    /// otherwise the cheapest single crossover through another row.
    pub fn exit_return_cost(&self, row: usize, heading_after_row: Heading) -> f64 {
        match self.t_gamma(row, heading_after_row) {
            Ok(c) => c,
            Err(_) => self.crossover[heading_after_row.exit_side().index()][row - 1],
        }
    }

    fn compute_crossover(&self, side: Side) -> Vec<f64> {
        let other = side.opposite();
        let other_col = self.side_col(other);
        let other_bases: Vec<usize> = self
            .bases
            .iter()
            .filter(|b| b.col == other_col)
            .map(|b| b.row)
            .collect();
        (1..=self.m)
            .map(|row| {
                let mut best = f64::INFINITY;
                for r in 1..=self.m {
                    let to_entry = if r == row {
                        self.bounce_cost(VertexId::new(row, self.side_col(side)))
                    } else {
                        self.vertical_cost(side, row, r)
                    };
                    for &b in &other_bases {
                        let c = to_entry + self.beta[r - 1] + self.vertical_cost(other, r, b);
                        if c < best {
                            best = c;
                        }
                    }
                }
                best
            })
            .collect()
    }

    /// Cost for a robot that just left a row at a connector vertex to turn
    /// around and re-enter it: free at a base or on a single-row graph,
    /// otherwise one step up or down the column and back.
    pub fn bounce_cost(&self, at: VertexId) -> f64 {
        match self.bounce_neighbor(at) {
            Some((_, c)) => 2.0 * c,
            None => 0.0,
        }
    }

    fn bounce_neighbor(&self, at: VertexId) -> Option<(VertexId, f64)> {
        if self.is_base(at) || self.m == 1 {
            return None;
        }
        let side = self.side_of(at)?;
        let column = match side {
            Side::Left => &self.costs.left,
            Side::Right => &self.costs.right,
        };
        let up = (at.row > 1).then(|| (VertexId::new(at.row - 1, at.col), column[at.row - 2]));
        let down =
            (at.row < self.m).then(|| (VertexId::new(at.row + 1, at.col), column[at.row - 1]));
        match (up, down) {
            (Some(u), Some(d)) => Some(if d.1 < u.1 { d } else { u }),
            (u, d) => u.or(d),
        }
    }

    /// Side from which a robot at `pose` would enter `row` without reversing.
    pub fn entry_side(&self, pose: VertexId, heading: Heading) -> Side {
        self.side_of(pose).unwrap_or_else(|| heading.exit_side())
    }

    /// `t_alpha`: cost from `pose` to the entry vertex of `row`, leaving the
    /// current row ahead and travelling along that connector column. For the
    /// robot's own row (mid-row) this is the forward in-row cost only.
    pub fn t_alpha(&self, pose: VertexId, heading: Heading, row: usize) -> f64 {
        match self.side_of(pose) {
            None if row == pose.row => self.forward_cost(pose, heading),
            None => {
                self.forward_cost(pose, heading)
                    + self.vertical_cost(heading.exit_side(), pose.row, row)
            }
            Some(_) if row == pose.row => {
                if self.can_enter(pose, heading) {
                    0.0
                } else {
                    self.bounce_cost(pose)
                }
            }
            Some(side) => self.vertical_cost(side, pose.row, row),
        }
    }

    /// Energy needed to work in `row` and still reach a base station:
    /// `t_alpha + t_beta + t_gamma`. When the robot is already inside `row`
    /// the remaining forward cost replaces `t_alpha + t_beta`.
    pub fn through_row_cost(&self, pose: VertexId, heading: Heading, row: usize) -> f64 {
        if self.is_interior(pose) && pose.row == row {
            return self.forward_cost(pose, heading) + self.exit_return_cost(row, heading);
        }
        let entry = self.entry_side(pose, heading);
        let traverse = entry.inward();
        self.t_alpha(pose, heading, row) + self.beta[row - 1] + self.exit_return_cost(row, traverse)
    }

    /// Vertices (excluding `pose`) walked to the row end ahead.
    pub fn exit_path(&self, pose: VertexId, heading: Heading) -> Vec<VertexId> {
        if !self.is_interior(pose) {
            return Vec::new();
        }
        match heading {
            Heading::Right => ((pose.col + 1)..=self.n + 1)
                .map(|c| VertexId::new(pose.row, c))
                .collect(),
            Heading::Left => (0..pose.col)
                .rev()
                .map(|c| VertexId::new(pose.row, c))
                .collect(),
        }
    }

    fn vertical_path(&self, col: usize, from_row: usize, to_row: usize) -> Vec<VertexId> {
        if to_row >= from_row {
            ((from_row + 1)..=to_row)
                .map(|r| VertexId::new(r, col))
                .collect()
        } else {
            (to_row..from_row)
                .rev()
                .map(|r| VertexId::new(r, col))
                .collect()
        }
    }

    /// Walk (excluding `pose`) matching `t_alpha`: ends on the connector
    /// vertex of `row` from which the robot enters it, or is empty when the
    /// robot is already inside `row`.
    pub fn approach_path(&self, pose: VertexId, heading: Heading, row: usize) -> Vec<VertexId> {
        if self.is_interior(pose) && pose.row == row {
            return Vec::new();
        }
        let mut path = self.exit_path(pose, heading);
        let at = path.last().copied().unwrap_or(pose);
        if at.row == row {
            if !self.can_enter(at, heading) {
                if let Some((nb, _)) = self.bounce_neighbor(at) {
                    path.push(nb);
                    path.push(at);
                }
            }
        } else {
            path.extend(self.vertical_path(at.col, at.row, row));
        }
        path
    }

    /// Walk (excluding `from`) along `row` in direction `heading` up to and
    /// including column `to_col`.
    pub fn in_row_path(
        &self,
        row: usize,
        from_col: usize,
        heading: Heading,
        to_col: usize,
    ) -> Vec<VertexId> {
        match heading {
            Heading::Right => ((from_col + 1)..=to_col)
                .map(|c| VertexId::new(row, c))
                .collect(),
            Heading::Left => (to_col..from_col)
                .rev()
                .map(|c| VertexId::new(row, c))
                .collect(),
        }
    }

    fn state_index(&self, v: VertexId, h: Heading) -> usize {
        self.index(v) * 2 + usize::from(h == Heading::Right)
    }

    /// Minimum-cost legal walk from `(pose, heading)` to any vertex accepted
    /// by `goal`. Returns the cost and the walk excluding `pose`.
    pub fn shortest_walk(
        &self,
        pose: VertexId,
        heading: Heading,
        goal: impl Fn(VertexId) -> bool,
    ) -> Option<(f64, Vec<VertexId>)> {
        let states = self.vertex_count() * 2;
        let mut dist = vec![f64::INFINITY; states];
        let mut prev: Vec<Option<(VertexId, Heading)>> = vec![None; states];
        let mut heap = BinaryHeap::new();
        let start = self.state_index(pose, heading);
        dist[start] = 0.0;
        heap.push(QueueEntry {
            cost: 0.0,
            vertex: pose,
            heading,
        });
        while let Some(QueueEntry {
            cost,
            vertex,
            heading,
        }) = heap.pop()
        {
            let idx = self.state_index(vertex, heading);
            if cost > dist[idx] {
                continue;
            }
            if goal(vertex) {
                let mut path = vec![vertex];
                let mut cur = (vertex, heading);
                while let Some(p) = prev[self.state_index(cur.0, cur.1)] {
                    path.push(p.0);
                    cur = p;
                }
                path.pop();
                path.reverse();
                return Some((cost, path));
            }
            for (next, nh, c) in self.directed_moves(vertex, heading) {
                let ni = self.state_index(next, nh);
                let nc = cost + c;
                if nc < dist[ni] {
                    dist[ni] = nc;
                    prev[ni] = Some((vertex, heading));
                    heap.push(QueueEntry {
                        cost: nc,
                        vertex: next,
                        heading: nh,
                    });
                }
            }
        }
        None
    }

    /// Cheapest legal walk to any base station.
    pub fn route_to_base(&self, pose: VertexId, heading: Heading) -> Option<(f64, Vec<VertexId>)> {
        self.shortest_walk(pose, heading, |v| self.is_base(v))
    }

    /// Heading after stepping from `from` to the adjacent `to`.
    pub fn heading_after(&self, from: VertexId, to: VertexId, heading: Heading) -> Heading {
        if from.row != to.row {
            return self.side_of(to).map(Side::inward).unwrap_or(heading);
        }
        if to.col > from.col {
            Heading::Right
        } else {
            Heading::Left
        }
    }

    /// Whether stepping `from -> to` is a legal move under `heading`.
    pub fn is_legal_step(&self, from: VertexId, heading: Heading, to: VertexId) -> bool {
        self.directed_moves(from, heading)
            .iter()
            .any(|(v, _, _)| *v == to)
    }
}

#[derive(Debug)]
struct QueueEntry {
    cost: f64,
    vertex: VertexId,
    heading: Heading,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    // min-heap on cost, ties broken by vertex order for determinism
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.vertex.cmp(&self.vertex))
            .then_with(|| (other.heading as u8).cmp(&(self.heading as u8)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_graph() -> AisleGraph {
        AisleGraph::uniform(3, 3, 1.0, [VertexId::new(2, 0)]).unwrap()
    }

    fn field20() -> AisleGraph {
        AisleGraph::uniform(20, 15, 1.0, [VertexId::new(10, 0), VertexId::new(10, 16)]).unwrap()
    }

    #[test]
    fn small_graph_shape() {
        let g = small_graph();
        assert_eq!(g.vertex_count(), 15);
        assert_eq!(g.degree(VertexId::new(2, 0)), 3);
        assert_eq!(g.degree(VertexId::new(2, 4)), 3);
        for corner in [(1, 0), (3, 0), (1, 4), (3, 4)] {
            assert_eq!(g.degree(VertexId::new(corner.0, corner.1)), 2);
        }
        for r in 1..=3 {
            for c in 1..=3 {
                assert_eq!(g.degree(VertexId::new(r, c)), 2);
            }
        }
    }

    #[test]
    fn minimal_graph() {
        let g = AisleGraph::uniform(1, 1, 0.0, [VertexId::new(1, 0)]).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert!(g.degree(VertexId::new(1, 0)) <= 2);
        assert!(g.degree(VertexId::new(1, 2)) <= 2);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            AisleGraph::uniform(3, 3, 1.0, [VertexId::new(2, 2)]),
            Err(GraphError::InteriorBase(_))
        ));
        assert!(matches!(
            AisleGraph::uniform(3, 3, -1.0, [VertexId::new(2, 0)]),
            Err(GraphError::NegativeCost(_))
        ));
        let mut costs = EdgeCosts::uniform(3, 3, 1.0);
        costs.horizontal[1][0] = 0.5;
        assert!(matches!(
            AisleGraph::new(3, 3, costs, [VertexId::new(2, 0)]),
            Err(GraphError::NonzeroConnector { .. })
        ));
        assert!(matches!(
            AisleGraph::uniform(3, 3, 1.0, []),
            Err(GraphError::NoBaseStation)
        ));
    }

    #[test]
    fn legal_moves_examples() {
        let g = small_graph();
        assert_eq!(
            g.legal_moves(VertexId::new(1, 2), Heading::Right),
            vec![VertexId::new(1, 3)]
        );
        for h in [Heading::Left, Heading::Right] {
            let mut got = g.legal_moves(VertexId::new(2, 0), h);
            got.sort();
            assert_eq!(
                got,
                vec![
                    VertexId::new(1, 0),
                    VertexId::new(2, 1),
                    VertexId::new(3, 0)
                ]
            );
        }
        assert_eq!(
            g.legal_moves(VertexId::new(1, 4), Heading::Right),
            vec![VertexId::new(2, 4)]
        );
    }

    #[test]
    fn single_row_boundary_always_has_a_move() {
        let g = AisleGraph::uniform(1, 2, 1.0, [VertexId::new(1, 0)]).unwrap();
        assert_eq!(
            g.legal_moves(VertexId::new(1, 3), Heading::Right),
            vec![VertexId::new(1, 2)]
        );
    }

    #[test]
    fn t_beta_examples() {
        assert_eq!(small_graph().t_beta(1).unwrap(), 2.0);
        let zero = AisleGraph::uniform(4, 5, 0.0, [VertexId::new(1, 0)]).unwrap();
        assert_eq!(zero.t_beta(3).unwrap(), 0.0);
        assert_eq!(field20().t_beta(5).unwrap(), 14.0);
        assert!(small_graph().t_beta(4).is_err());
    }

    #[test]
    fn t_gamma_examples() {
        assert_eq!(small_graph().t_gamma(3, Heading::Left).unwrap(), 1.0);
        assert_eq!(small_graph().t_gamma(2, Heading::Left).unwrap(), 0.0);
        assert_eq!(field20().t_gamma(1, Heading::Right).unwrap(), 9.0);
        assert!(matches!(
            small_graph().t_gamma(3, Heading::Right),
            Err(GraphError::NoBaseOnColumn { .. })
        ));
    }

    #[test]
    fn t_alpha_examples() {
        let g = small_graph();
        assert_eq!(g.t_alpha(VertexId::new(1, 1), Heading::Right, 3), 4.0);
        assert_eq!(g.t_alpha(VertexId::new(3, 0), Heading::Right, 3), 0.0);
        assert_eq!(
            field20().t_alpha(VertexId::new(10, 0), Heading::Right, 10),
            0.0
        );
        // just exited row 1 at a non-base connector: step down and back up
        assert_eq!(g.t_alpha(VertexId::new(1, 4), Heading::Right, 1), 2.0);
    }

    #[test]
    fn approach_path_matches_t_alpha() {
        let g = small_graph();
        let pose = VertexId::new(1, 1);
        let path = g.approach_path(pose, Heading::Right, 3);
        assert_eq!(path.last(), Some(&VertexId::new(3, 4)));
        let mut cost = 0.0;
        let mut prev = pose;
        for v in &path {
            cost += g.edge_cost(prev, *v).unwrap();
            prev = *v;
        }
        assert_eq!(cost, g.t_alpha(pose, Heading::Right, 3));
    }

    #[test]
    fn return_route_from_far_corner() {
        let g = small_graph();
        // from v(1,4) facing out the only way home crosses a row
        let (cost, path) = g
            .route_to_base(VertexId::new(1, 4), Heading::Right)
            .unwrap();
        assert_eq!(path.last(), Some(&VertexId::new(2, 0)));
        assert_eq!(cost, 1.0 + 2.0 + 0.0);
        assert_eq!(
            g.route_to_base(VertexId::new(2, 0), Heading::Right)
                .unwrap()
                .1,
            vec![]
        );
    }

    #[test]
    fn crossover_used_without_base_on_exit_column() {
        let g = small_graph();
        // row 3 traversed rightward ends on column 4 which has no base
        assert_eq!(g.exit_return_cost(3, Heading::Right), 1.0 + 2.0);
        assert_eq!(
            g.through_row_cost(VertexId::new(1, 1), Heading::Right, 3),
            4.0 + 2.0 + 1.0
        );
    }
}
