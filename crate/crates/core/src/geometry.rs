//! Distances, farthest-first k-center, and the radius-level grid used to
//! propose must-link candidates.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddedDataset;
use crate::error::{Error, Result};
use crate::rng;

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn checked_sq_dist(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(sq_dist(a, b))
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

/// Cost used by the clustering and matching terms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    #[default]
    Squared,
    Euclidean,
}

impl Distance {
    #[inline]
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        self.from_sq(sq_dist(a, b))
    }

    #[inline]
    pub fn from_sq(self, sq: f64) -> f64 {
        match self {
            Distance::Squared => sq,
            Distance::Euclidean => sq.sqrt(),
        }
    }
}

/// Max pairwise Euclidean distance among the given rows.
pub fn diameter(data: &EmbeddedDataset, members: &[usize]) -> f64 {
    let mut best = 0.0f64;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            best = best.max(sq_dist(data.point(i), data.point(j)));
        }
    }
    best.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    dim: usize,
    coords: Vec<f64>,
}

impl CenterSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!(
                "center matrix of {} values is not k x {dim} with k >= 1",
                coords.len()
            )));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite center coordinate".into(),
            ));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("ragged center rows".into()));
        }
        Self::new(dim, rows.concat())
    }

    pub fn k(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn center_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    /// Nearest center and its squared distance; ties go to the lowest index.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, c) in self.iter().enumerate() {
            let d = sq_dist(x, c);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KCenterResult {
    /// Indices of the data points chosen as centers, in selection order.
    pub centers: Vec<usize>,
    /// Largest Euclidean distance from any point to its nearest chosen center.
    pub cost_kc: f64,
}

impl KCenterResult {
    /// Index into `centers` of the nearest chosen point, with its distance.
    pub fn nearest(&self, data: &EmbeddedDataset, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (slot, &c) in self.centers.iter().enumerate() {
            let d = sq_dist(x, data.point(c));
            if d < best.1 {
                best = (slot, d);
            }
        }
        (best.0, best.1.sqrt())
    }
}

/// Farthest-first traversal (a 2-approximation of the min-max k-center
/// objective). The first center is drawn uniformly under `seed`.
pub fn gonzalez_kcenter(data: &EmbeddedDataset, k: usize, seed: u64) -> Result<KCenterResult> {
    check_k(k, data.n())?;
    let first = rng::stream(seed, 0x6b63).random_range(0..data.n());
    gonzalez_from(data, k, first)
}

/// Farthest-first traversal from a fixed first center. Ties on the farthest
/// distance go to the lowest index.
pub fn gonzalez_from(data: &EmbeddedDataset, k: usize, first: usize) -> Result<KCenterResult> {
    let n = data.n();
    check_k(k, n)?;
    if first >= n {
        return Err(Error::InvalidParameter(format!(
            "first center {first} >= n"
        )));
    }
    let mut chosen = vec![false; n];
    let mut centers = Vec::with_capacity(k);
    let mut nearest_sq = vec![f64::INFINITY; n];
    let mut next = first;
    loop {
        chosen[next] = true;
        centers.push(next);
        let c = data.point(next);
        for (i, slot) in nearest_sq.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(data.point(i), c));
        }
        if centers.len() == k {
            break;
        }
        let mut far = (usize::MAX, f64::NEG_INFINITY);
        for (i, &d) in nearest_sq.iter().enumerate() {
            if !chosen[i] && d > far.1 {
                far = (i, d);
            }
        }
        next = far.0;
    }
    let cost_kc = nearest_sq.iter().cloned().fold(0.0, f64::max).sqrt();
    Ok(KCenterResult { centers, cost_kc })
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k must satisfy 1 <= k <= n (k = {k}, n = {n})"
        )));
    }
    Ok(())
}

/// Radii `r_j = (1 + eps)^j * sqrt(cost_kc / (10 n dim))`, stopping at the
/// first level with `r_j >= 2 cost_kc`.
///
/// `cost_kc == 0` means every point coincides with a center; this is reported
/// as [`Error::Degenerate`] and callers fall back to `[0.0]`
/// (see [`grid_levels_or_flat`]).
pub fn grid_levels(cost_kc: f64, n: usize, dim: usize, eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be in (0, 1), got {eps}"
        )));
    }
    if n == 0 || dim == 0 {
        return Err(Error::InvalidParameter("n and dim must be >= 1".into()));
    }
    if cost_kc == 0.0 {
        return Err(Error::Degenerate("k-center cost is zero".into()));
    }
    if !(cost_kc > 0.0) || !cost_kc.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "cost_kc must be finite and > 0, got {cost_kc}"
        )));
    }
    let base = (cost_kc / (10.0 * n as f64 * dim as f64)).sqrt();
    let limit = 2.0 * cost_kc;
    let mut levels = Vec::new();
    let mut j = 0i32;
    loop {
        let r = (1.0 + eps).powi(j) * base;
        levels.push(r);
        if r >= limit {
            break;
        }
        j += 1;
    }
    Ok(levels)
}

pub fn grid_levels_or_flat(cost_kc: f64, n: usize, dim: usize, eps: f64) -> Result<Vec<f64>> {
    match grid_levels(cost_kc, n, dim, eps) {
        Err(Error::Degenerate(_)) => Ok(vec![0.0]),
        other => other,
    }
}

/// Where the cube lattice of a level is anchored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridAnchor {
    /// One lattice per level, cells `floor(x / r_j)` shared by all centers.
    Global,
    /// One lattice per (level, nearest k-center point), with a cell centered
    /// on that point: `round((x - c) / r_j)`.
    #[default]
    NearestCenter,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CellKey {
    pub level: usize,
    /// Slot in the k-center list the lattice is anchored at, if any.
    pub anchor: Option<usize>,
    pub coords: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPartition {
    pub levels: Vec<f64>,
    pub cells: BTreeMap<CellKey, Vec<usize>>,
}

impl GridPartition {
    /// Level a point was placed at.
    pub fn level_of(&self, point: usize) -> Option<usize> {
        self.cells
            .iter()
            .find(|(_, members)| members.contains(&point))
            .map(|(key, _)| key.level)
    }
}

/// Buckets every point into exactly one cube cell.
///
/// A point belongs to level `j` when `r_{j-1} < d <= r_j`, with `d` its
/// distance to the nearest k-center point (level 0 covers `[0, r_0]`, and the
/// last level absorbs anything farther). Cells at level `j` are cubes of side
/// `r_j`, so any two members are within `r_j * sqrt(dim)` of each other.
pub fn grid_partition(
    data: &EmbeddedDataset,
    kcenter: &KCenterResult,
    levels: &[f64],
    anchor: GridAnchor,
) -> Result<GridPartition> {
    if levels.is_empty() {
        return Err(Error::InvalidParameter(
            "grid needs at least one level".into(),
        ));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "levels must be strictly increasing".into(),
        ));
    }
    let mut cells: BTreeMap<CellKey, Vec<usize>> = BTreeMap::new();
    for i in 0..data.n() {
        let x = data.point(i);
        let (slot, d) = kcenter.nearest(data, x);
        let level = levels.partition_point(|&r| r < d).min(levels.len() - 1);
        let side = levels[level];
        let key = if side == 0.0 {
            // only points coinciding with their center reach a zero-width level
            CellKey {
                level,
                anchor: Some(slot),
                coords: Vec::new(),
            }
        } else {
            match anchor {
                GridAnchor::Global => CellKey {
                    level,
                    anchor: None,
                    coords: x.iter().map(|v| (v / side).floor() as i64).collect(),
                },
                GridAnchor::NearestCenter => {
                    let c = data.point(kcenter.centers[slot]);
                    CellKey {
                        level,
                        anchor: Some(slot),
                        coords: x
                            .iter()
                            .zip(c)
                            .map(|(v, o)| ((v - o) / side + 0.5).floor() as i64)
                            .collect(),
                    }
                }
            }
        };
        cells.entry(key).or_default().push(i);
    }
    Ok(GridPartition {
        levels: levels.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticSpec, TextRecord};
    use proptest::prelude::*;

    pub(crate) fn dataset(dim: usize, values: Vec<f64>) -> EmbeddedDataset {
        let n = values.len() / dim;
        let records = (0..n)
            .map(|i| TextRecord {
                id: i,
                text: format!("p{i}"),
                label: None,
            })
            .collect();
        EmbeddedDataset::new(records, dim, values).unwrap()
    }

    fn brute_kcenter(data: &EmbeddedDataset, k: usize) -> f64 {
        fn rec(data: &EmbeddedDataset, k: usize, start: usize, chosen: &mut Vec<usize>) -> f64 {
            if chosen.len() == k {
                return (0..data.n())
                    .map(|i| {
                        chosen
                            .iter()
                            .map(|&c| dist(data.point(i), data.point(c)))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(0.0, f64::max);
            }
            let mut best = f64::INFINITY;
            for c in start..data.n() {
                chosen.push(c);
                best = best.min(rec(data, k, c + 1, chosen));
                chosen.pop();
            }
            best
        }
        rec(data, k, 0, &mut Vec::new())
    }

    #[test]
    fn sq_dist_examples() {
        assert_eq!(sq_dist(&[1.5, -2.0], &[1.5, -2.0]), 0.0);
        assert_eq!(sq_dist(&[0.0, 0.0], &[3.0, 4.0]), 25.0);
        assert!(checked_sq_dist(&[0.0], &[0.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn sq_dist_matches_scalar_loop(pair in (1usize..20).prop_flat_map(|d| (
            proptest::collection::vec(-1e3f64..1e3, d),
            proptest::collection::vec(-1e3f64..1e3, d),
        ))) {
            let (a, b) = pair;
            let mut acc = 0.0;
            for i in 0..a.len() {
                let diff = a[i] - b[i];
                acc += diff * diff;
            }
            prop_assert!((sq_dist(&a, &b) - acc).abs() <= 1e-12 * acc.max(1.0));
        }

        #[test]
        fn gonzalez_within_twice_optimum(
            vals in proptest::collection::vec(-10.0f64..10.0, 4..20),
            k in 1usize..4,
            seed in 0u64..1000,
        ) {
            let dim = 2;
            let n = vals.len() / dim;
            prop_assume!(k <= n);
            let data = dataset(dim, vals[..n * dim].to_vec());
            let res = gonzalez_kcenter(&data, k, seed).unwrap();
            let opt = brute_kcenter(&data, k);
            prop_assert!(res.cost_kc <= 2.0 * opt + 1e-9, "{} > 2 * {}", res.cost_kc, opt);
            prop_assert_eq!(&res, &gonzalez_kcenter(&data, k, seed).unwrap());
        }

        #[test]
        fn grid_cells_are_disjoint_cover_with_bounded_diameter(
            vals in proptest::collection::vec(-5.0f64..5.0, 60),
            seed in 0u64..100,
            global in any::<bool>(),
        ) {
            let dim = 3;
            let data = dataset(dim, vals);
            let kc = gonzalez_kcenter(&data, 3, seed).unwrap();
            let levels = grid_levels_or_flat(kc.cost_kc, data.n(), dim, 0.1).unwrap();
            let anchor = if global { GridAnchor::Global } else { GridAnchor::NearestCenter };
            let grid = grid_partition(&data, &kc, &levels, anchor).unwrap();
            let mut seen = vec![0; data.n()];
            for (key, members) in &grid.cells {
                for &m in members {
                    seen[m] += 1;
                }
                let bound = grid.levels[key.level] * (dim as f64).sqrt();
                prop_assert!(diameter(&data, members) <= bound * (1.0 + 1e-9));
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn kcenter_all_points_is_zero_cost() {
        let data = dataset(2, vec![0.0, 1.0, 2.0, 3.0, -1.0, 4.0]);
        assert_eq!(gonzalez_kcenter(&data, 3, 9).unwrap().cost_kc, 0.0);
    }

    #[test]
    fn kcenter_line_example() {
        let data = dataset(1, vec![0.0, 1.0, 10.0]);
        let res = gonzalez_from(&data, 2, 0).unwrap();
        assert_eq!(res.centers, vec![0, 2]);
        assert_eq!(res.cost_kc, 1.0);
        assert_eq!(brute_kcenter(&data, 2), 1.0);
    }

    #[test]
    fn kcenter_rejects_k_above_n() {
        let data = dataset(1, vec![0.0, 1.0]);
        assert!(gonzalez_kcenter(&data, 3, 0).is_err());
        assert!(gonzalez_kcenter(&data, 0, 0).is_err());
    }

    #[test]
    fn kcenter_with_duplicates_never_repeats_a_center() {
        let data = dataset(1, vec![1.0, 1.0, 1.0, 1.0]);
        let res = gonzalez_from(&data, 3, 2).unwrap();
        let mut c = res.centers.clone();
        c.sort();
        c.dedup();
        assert_eq!(c.len(), 3);
        assert_eq!(res.cost_kc, 0.0);
    }

    #[test]
    fn levels_follow_formula() {
        let levels = grid_levels(1.0, 10, 1, 0.1).unwrap();
        assert!((levels[0] - 0.1).abs() < 1e-15);
        assert!((levels[1] - 0.11).abs() < 1e-15);
        for w in levels.windows(2) {
            assert!((w[1] / w[0] - 1.1).abs() < 1e-12);
        }
        assert!(*levels.last().unwrap() >= 2.0);
        assert!(levels[levels.len() - 2] < 2.0);
    }

    #[test]
    fn degenerate_levels_fall_back() {
        assert!(matches!(
            grid_levels(0.0, 5, 2, 0.1),
            Err(Error::Degenerate(_))
        ));
        assert_eq!(grid_levels_or_flat(0.0, 5, 2, 0.1).unwrap(), vec![0.0]);
        assert!(grid_levels(1.0, 5, 2, 1.5).is_err());
    }

    #[test]
    fn identical_points_share_one_cell() {
        let data = dataset(2, [3.0, -1.0].repeat(6));
        let kc = gonzalez_kcenter(&data, 2, 0).unwrap();
        let levels = grid_levels_or_flat(kc.cost_kc, data.n(), 2, 0.1).unwrap();
        for anchor in [GridAnchor::Global, GridAnchor::NearestCenter] {
            let grid = grid_partition(&data, &kc, &levels, anchor).unwrap();
            // both centers coincide; nearest-center ties resolve to the first slot
            assert_eq!(grid.cells.len(), 1);
            assert_eq!(grid.cells.values().next().unwrap().len(), 6);
        }
    }

    #[test]
    fn far_apart_coordinate_splits_cells() {
        let data = dataset(2, vec![0.0, 0.0, 0.5, 0.0, 1000.0, 0.0, 1000.5, 0.0]);
        let kc = gonzalez_from(&data, 2, 0).unwrap();
        let levels = grid_levels_or_flat(kc.cost_kc, data.n(), 2, 0.1).unwrap();
        let max_side = *levels.last().unwrap();
        assert!(1000.0 > max_side);
        for anchor in [GridAnchor::Global, GridAnchor::NearestCenter] {
            let grid = grid_partition(&data, &kc, &levels, anchor).unwrap();
            let cell_of = |p: usize| grid.cells.iter().position(|(_, m)| m.contains(&p)).unwrap();
            assert_ne!(cell_of(0), cell_of(2));
            assert_ne!(cell_of(1), cell_of(3));
        }
    }

    #[test]
    fn random_instance_cell_diameters() {
        let data = generate_synthetic(&SyntheticSpec {
            k_true: 2,
            n: 20,
            dim: 3,
            separation: 4.0,
            seed: 11,
        })
        .unwrap();
        let kc = gonzalez_kcenter(&data, 2, 5).unwrap();
        let levels = grid_levels(kc.cost_kc, data.n(), data.dim(), 0.1).unwrap();
        let grid = grid_partition(&data, &kc, &levels, GridAnchor::Global).unwrap();
        for (key, members) in &grid.cells {
            let mut worst = 0.0f64;
            for &a in members {
                for &b in members {
                    worst = worst.max(dist(data.point(a), data.point(b)));
                }
            }
            assert!(worst <= grid.levels[key.level] * 3f64.sqrt());
        }
    }

    #[test]
    fn nearest_center_ties_pick_lowest() {
        let c = CenterSet::from_rows(&[vec![0.0], vec![10.0]]).unwrap();
        assert_eq!(c.nearest(&[5.0]), (0, 25.0));
        assert_eq!(c.nearest(&[6.0]).0, 1);
    }
}
