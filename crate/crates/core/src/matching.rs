//! Minimum-cost one-sided perfect matching of rows (cannot-link members)
//! onto columns (centers).
//!
//! Dense Hungarian algorithm with potentials, O(rows^2 * cols). Costs are
//! carried as `(cost, tie)` pairs compared lexicographically, where `tie`
//! encodes the column chosen for each row as base-`cols` digits. Among all
//! optimal matchings the solver therefore returns the lexicographically
//! smallest assignment vector.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Sub, SubAssign};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    costs: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, costs: Vec<f64>) -> Result<Self> {
        if costs.len() != rows * cols {
            return Err(Error::InvalidParameter(format!(
                "{} costs for a {rows} x {cols} matrix",
                costs.len()
            )));
        }
        if rows > cols {
            return Err(Error::MatchingShape { rows, cols });
        }
        if let Some(v) = costs.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "matching costs must be finite and >= 0, found {v}"
            )));
        }
        Ok(Self { rows, cols, costs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged cost rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.costs[r * self.cols + c]
    }

    /// Copy without row `r`.
    pub fn without_row(&self, r: usize) -> CostMatrix {
        let mut costs = Vec::with_capacity((self.rows - 1) * self.cols);
        for i in (0..self.rows).filter(|&i| i != r) {
            costs.extend_from_slice(&self.costs[i * self.cols..(i + 1) * self.cols]);
        }
        CostMatrix {
            rows: self.rows - 1,
            cols: self.cols,
            costs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Column matched to each row; injective.
    pub assignment: Vec<usize>,
    pub total_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    cost: f64,
    tie: i128,
}

impl Key {
    const ZERO: Key = Key { cost: 0.0, tie: 0 };
    const INF: Key = Key {
        cost: f64::INFINITY,
        tie: 0,
    };
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(
            self.cost
                .total_cmp(&other.cost)
                .then(self.tie.cmp(&other.tie)),
        )
    }
}

impl Add for Key {
    type Output = Key;
    fn add(self, o: Key) -> Key {
        Key {
            cost: self.cost + o.cost,
            tie: self.tie + o.tie,
        }
    }
}

impl Sub for Key {
    type Output = Key;
    fn sub(self, o: Key) -> Key {
        Key {
            cost: self.cost - o.cost,
            tie: self.tie - o.tie,
        }
    }
}

impl AddAssign for Key {
    fn add_assign(&mut self, o: Key) {
        *self = *self + o;
    }
}

impl SubAssign for Key {
    fn sub_assign(&mut self, o: Key) {
        *self = *self - o;
    }
}

/// Per-row weights `cols^(rows-1-r)` for the tie component, or `None` when
/// the encoding would not fit comfortably in an i128.
fn tie_weights(rows: usize, cols: usize) -> Option<Vec<i128>> {
    let mut w = vec![0i128; rows];
    let mut acc: i128 = 1;
    for r in (0..rows).rev() {
        w[r] = acc;
        acc = acc.checked_mul(cols as i128)?;
    }
    // potentials accumulate sums of a few rows' worth of digits
    acc.checked_mul(4 * (rows as i128 + 1))?;
    Some(w)
}

pub fn min_cost_matching(m: &CostMatrix) -> Result<Matching> {
    let (n, cols) = (m.rows, m.cols);
    if n > cols {
        return Err(Error::MatchingShape { rows: n, cols });
    }
    if n == 0 {
        return Ok(Matching {
            assignment: Vec::new(),
            total_cost: 0.0,
        });
    }
    // exact tie-breaking is dropped only for very large matrices
    let weights = tie_weights(n, cols).unwrap_or_else(|| vec![0; n]);
    let key = |r: usize, c: usize| Key {
        cost: m.get(r, c),
        tie: weights[r] * c as i128,
    };

    let mut u = vec![Key::ZERO; n + 1];
    let mut v = vec![Key::ZERO; cols + 1];
    let mut p = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    let mut minv = vec![Key::INF; cols + 1];
    let mut used = vec![false; cols + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.fill(Key::INF);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = Key::INF;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = key(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![usize::MAX; n];
    for j in 1..=cols {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    debug_assert!(assignment.iter().all(|&c| c < cols));
    let total_cost = assignment
        .iter()
        .enumerate()
        .map(|(r, &c)| m.get(r, c))
        .sum();
    Ok(Matching {
        assignment,
        total_cost,
    })
}
