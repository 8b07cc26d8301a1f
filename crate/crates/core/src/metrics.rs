//! External clustering metrics against ground-truth labels, and the
//! pair-level agreement of a constraint collection with those labels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintCollection;
use crate::error::{Error, Result};
use crate::matching::{min_cost_matching, CostMatrix};

/// Contingency table with rows = predicted clusters, cols = true classes.
/// Labels are densified in ascending order.
#[derive(Debug, Clone)]
pub struct Contingency {
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
}

impl Contingency {
    pub fn new(pred: &[i64], truth: &[i64]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::DimensionMismatch {
                left: pred.len(),
                right: truth.len(),
            });
        }
        if pred.is_empty() {
            return Err(Error::InvalidParameter(
                "metrics need at least one label".into(),
            ));
        }
        let rows = densify(pred);
        let cols = densify(truth);
        let mut counts = vec![vec![0u64; cols.len()]; rows.len()];
        for (p, t) in pred.iter().zip(truth) {
            counts[rows[p]][cols[t]] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..cols.len())
            .map(|c| counts.iter().map(|r| r[c]).sum())
            .collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            n: pred.len() as u64,
        })
    }
}

fn densify(labels: &[i64]) -> BTreeMap<i64, usize> {
    let mut map: BTreeMap<i64, usize> = labels.iter().map(|&l| (l, 0)).collect();
    for (i, v) in map.values_mut().enumerate() {
        *v = i;
    }
    map
}

#[inline]
fn comb2(x: u64) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Accuracy under the best one-to-one relabeling of clusters onto classes.
pub fn acc_hungarian(pred: &[i64], truth: &[i64]) -> Result<f64> {
    let table = Contingency::new(pred, truth)?;
    let (r, c) = (table.row_sums.len(), table.col_sums.len());
    let max = table.counts.iter().flatten().copied().max().unwrap_or(0) as f64;
    // matching needs rows <= cols; transpose when there are more clusters
    let (rows, cols, costs): (usize, usize, Vec<f64>) = if r <= c {
        (
            r,
            c,
            table
                .counts
                .iter()
                .flatten()
                .map(|&v| max - v as f64)
                .collect(),
        )
    } else {
        (
            c,
            r,
            (0..c)
                .flat_map(|j| table.counts.iter().map(move |row| max - row[j] as f64))
                .collect(),
        )
    };
    let matching = min_cost_matching(&CostMatrix::new(rows, cols, costs)?)?;
    let matched = rows as f64 * max - matching.total_cost;
    Ok(matched / table.n as f64)
}

/// Fraction of point pairs on which both labelings agree. A single point has
/// no pairs and scores 1.
pub fn rand_index(pred: &[i64], truth: &[i64]) -> Result<f64> {
    let t = Contingency::new(pred, truth)?;
    let total = comb2(t.n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let same_both: f64 = t.counts.iter().flatten().map(|&v| comb2(v)).sum();
    let same_pred: f64 = t.row_sums.iter().map(|&v| comb2(v)).sum();
    let same_truth: f64 = t.col_sums.iter().map(|&v| comb2(v)).sum();
    let agree = total + 2.0 * same_both - same_pred - same_truth;
    Ok(agree / total)
}

/// Adjusted Rand index. Returns 1 when the expected and maximum indices
/// coincide (both labelings trivial), matching the usual convention.
pub fn ari(pred: &[i64], truth: &[i64]) -> Result<f64> {
    let t = Contingency::new(pred, truth)?;
    let total = comb2(t.n);
    let index: f64 = t.counts.iter().flatten().map(|&v| comb2(v)).sum();
    let a: f64 = t.row_sums.iter().map(|&v| comb2(v)).sum();
    let b: f64 = t.col_sums.iter().map(|&v| comb2(v)).sum();
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = a * b / total;
    let max = 0.5 * (a + b);
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// Mutual information normalized by the arithmetic mean of the entropies.
/// Two single-cluster labelings score 1.
pub fn nmi(pred: &[i64], truth: &[i64]) -> Result<f64> {
    let t = Contingency::new(pred, truth)?;
    let n = t.n as f64;
    let entropy = |sums: &[u64]| -> f64 {
        sums.iter()
            .filter(|&&v| v > 0)
            .map(|&v| {
                let p = v as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let hp = entropy(&t.row_sums);
    let ht = entropy(&t.col_sums);
    let same_partition = t.row_sums.len() == t.col_sums.len()
        && t.counts
            .iter()
            .all(|row| row.iter().filter(|&&v| v > 0).count() == 1);
    if same_partition {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij == 0 {
                continue;
            }
            let nij = nij as f64;
            mi += nij / n * (n * nij / (t.row_sums[i] as f64 * t.col_sums[j] as f64)).ln();
        }
    }
    let mean = 0.5 * (hp + ht);
    Ok((mi / mean).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringScores {
    pub acc: f64,
    pub nmi: f64,
    pub ri: f64,
    pub ari: f64,
}

pub fn score_all(pred: &[i64], truth: &[i64]) -> Result<ClusteringScores> {
    Ok(ClusteringScores {
        acc: acc_hungarian(pred, truth)?,
        nmi: nmi(pred, truth)?,
        ri: rand_index(pred, truth)?,
        ari: ari(pred, truth)?,
    })
}

/// Agreement of constraint-implied pairs with the truth: every pair inside an
/// ML set should share a label and every pair inside a CL set should not.
/// `None` when the collection implies no pairs.
pub fn constraint_ri(collection: &ConstraintCollection, truth: &[i64]) -> Result<Option<f64>> {
    let mut pairs = 0u64;
    let mut agree = 0u64;
    let check = |idx: usize| -> Result<i64> {
        truth.get(idx).copied().ok_or(Error::InvalidConstraint {
            index: idx,
            n: truth.len(),
        })
    };
    for set in &collection.ml_sets {
        for (a, &i) in set.members.iter().enumerate() {
            for &j in &set.members[a + 1..] {
                pairs += 1;
                agree += u64::from(check(i)? == check(j)?);
            }
        }
    }
    for set in &collection.cl_sets {
        for (a, &i) in set.members.iter().enumerate() {
            for &j in &set.members[a + 1..] {
                pairs += 1;
                agree += u64::from(check(i)? != check(j)?);
            }
        }
    }
    Ok((pairs > 0).then(|| agree as f64 / pairs as f64))
}
