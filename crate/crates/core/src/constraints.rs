//! Must-link and cannot-link set generation from oracle answers.
//!
//! Pipeline: a k-center solution fixes the grid radii; every grid cell is
//! asked as one group query and each returned group of two or more texts
//! becomes a must-link set. Repeated queries at binary-searched diameters
//! decide which must-link sets are hard. Cannot-link sets grow by sampling
//! points farther than `cost_kc` from every current member. The full pool
//! is later subsampled per constraint ratio by [`mix_constraints`].

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddedDataset;
use crate::error::{Error, Result};
use crate::geometry::{self, GridAnchor, GridPartition};
use crate::oracle::{ClMembershipQuery, ClVerdict, LedgerTotals, MlGroupQuery, Oracle, QueryItem};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlSet {
    /// Sorted point indices.
    pub members: Vec<usize>,
    pub hard: bool,
    /// Largest pairwise Euclidean distance among members.
    pub diameter: f64,
    /// Grid level of the cell that produced the set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    /// Index of the group query that produced the set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<usize>,
}

impl MlSet {
    /// A soft set with unknown diameter and provenance.
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        Self {
            members,
            hard: false,
            diameter: 0.0,
            level: None,
            query: None,
        }
    }

    pub fn measured(data: &EmbeddedDataset, members: Vec<usize>) -> Self {
        let mut set = Self::new(members);
        set.diameter = geometry::diameter(data, &set.members);
        set
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_pair(&self) -> bool {
        self.members.len() == 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClSet {
    /// Point indices in the order they joined the set.
    pub members: Vec<usize>,
    /// Membership queries spent growing the set.
    #[serde(default)]
    pub queries: u64,
    /// Candidates the oracle matched to a member.
    #[serde(default)]
    pub rejections: u64,
}

impl ClSet {
    pub fn new(members: Vec<usize>) -> Self {
        Self {
            members,
            queries: 0,
            rejections: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Largest diameters still treated as hard, for pairs and for larger sets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub psi_pair: f64,
    pub psi_set: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintCollection {
    pub ml_sets: Vec<MlSet>,
    pub cl_sets: Vec<ClSet>,
    /// Queries attributed to these sets (the full generation run for a pool,
    /// the producing queries for a selection).
    pub ledger: LedgerTotals,
    pub thresholds: ThresholdResult,
    /// Set when a selection ran out of constraints before its target ratio.
    pub below_target: bool,
}

impl ConstraintCollection {
    /// Distinct point indices named by any set.
    pub fn constrained_points(&self) -> BTreeSet<usize> {
        self.ml_sets
            .iter()
            .flat_map(|s| s.members.iter())
            .chain(self.cl_sets.iter().flat_map(|s| s.members.iter()))
            .copied()
            .collect()
    }

    pub fn constrained_ratio(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.constrained_points().len() as f64 / n as f64
    }

    /// Checks that every index is `< n`, ML sets have at least two distinct
    /// members, and CL members are distinct.
    pub fn validate(&self, n: usize) -> Result<()> {
        for (i, s) in self.ml_sets.iter().enumerate() {
            check_members(i, &s.members, n)?;
            if s.members.len() < 2 {
                return Err(Error::InvalidConstraint { index: i, n });
            }
        }
        for (i, s) in self.cl_sets.iter().enumerate() {
            check_members(self.ml_sets.len() + i, &s.members, n)?;
        }
        Ok(())
    }

    /// Subsample this pool to a constraint ratio; see [`mix_constraints`].
    /// Consistency queries and thresholds are carried over unchanged since
    /// every selection depends on them.
    pub fn select(&self, target_ratio: f64, n: usize, seed: u64) -> Result<ConstraintCollection> {
        let mut out = mix_constraints(&self.ml_sets, &self.cl_sets, target_ratio, n, seed)?;
        out.thresholds = self.thresholds;
        if !out.ml_sets.is_empty() || !out.cl_sets.is_empty() {
            out.ledger.consistency_queries = self.ledger.consistency_queries;
        }
        Ok(out)
    }
}

fn check_members(index: usize, members: &[usize], n: usize) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &m in members {
        if m >= n || !seen.insert(m) {
            return Err(Error::InvalidConstraint { index, n });
        }
    }
    Ok(())
}

/// Pairwise queries a pair-at-a-time protocol would spend on the same sets:
/// `C(|X|, 2)` per ML set, `C(|Y|, 2)` per CL set plus one per rejected
/// candidate.
pub fn fsc_equivalent_queries(c: &ConstraintCollection) -> u64 {
    let pairs = |m: usize| (m * m.saturating_sub(1) / 2) as u64;
    c.ml_sets.iter().map(|s| pairs(s.len())).sum::<u64>()
        + c.cl_sets
            .iter()
            .map(|s| pairs(s.len()) + s.rejections)
            .sum::<u64>()
}

// ---------------------------------------------------------------------------
// Must-link generation

#[derive(Debug, Clone, PartialEq)]
pub struct MlGeneration {
    pub sets: Vec<MlSet>,
    /// Distinct candidate diameters per grid level, ascending.
    pub psi_by_level: BTreeMap<usize, Vec<f64>>,
    pub queries: usize,
}

/// One group query per chunk of at most `m_max` cell members; every returned
/// group with two or more texts becomes a soft ML set.
pub fn generate_ml_sets(
    data: &EmbeddedDataset,
    oracle: &Oracle,
    grid: &GridPartition,
    m_max: usize,
) -> Result<MlGeneration> {
    if m_max < 2 {
        return Err(Error::InvalidParameter(format!(
            "m_max must be >= 2, got {m_max}"
        )));
    }
    let mut chunks: Vec<(usize, &[usize])> = Vec::new();
    for (key, members) in &grid.cells {
        for chunk in members.chunks(m_max) {
            if chunk.len() >= 2 {
                chunks.push((key.level, chunk));
            }
        }
    }
    let queries = chunks
        .iter()
        .map(|(_, c)| MlGroupQuery::from_indices(data, c))
        .collect::<Result<Vec<_>>>()?;
    let answers = oracle.query_ml_groups(&queries);

    let mut sets = Vec::new();
    for (qi, ((level, chunk), answer)) in chunks.iter().zip(answers).enumerate() {
        for group in answer?.groups() {
            if group.len() < 2 {
                continue;
            }
            let mut set = MlSet::measured(data, group.iter().map(|&g| chunk[g]).collect());
            set.level = Some(*level);
            set.query = Some(qi);
            sets.push(set);
        }
    }
    let sets = dedup_ml_sets(sets);
    let mut psi_by_level: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for s in &sets {
        psi_by_level
            .entry(s.level.unwrap_or(0))
            .or_default()
            .push(s.diameter);
    }
    for v in psi_by_level.values_mut() {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    Ok(MlGeneration {
        sets,
        psi_by_level,
        queries: queries.len(),
    })
}

/// Drops sets equal to or contained in another set, keeping first occurrences.
pub fn dedup_ml_sets(sets: Vec<MlSet>) -> Vec<MlSet> {
    let mut order: Vec<usize> = (0..sets.len()).collect();
    // larger sets first so containment only needs checking against kept sets
    order.sort_by_key(|&i| std::cmp::Reverse(sets[i].len()));
    let mut keep = vec![false; sets.len()];
    let mut kept: Vec<BTreeSet<usize>> = Vec::new();
    for i in order {
        let s: BTreeSet<usize> = sets[i].members.iter().copied().collect();
        if kept.iter().any(|k| s.is_subset(k)) {
            continue;
        }
        keep[i] = true;
        kept.push(s);
    }
    sets.into_iter()
        .zip(keep)
        .filter_map(|(s, k)| k.then_some(s))
        .collect()
}

/// Largest index `i` into ascending `psi` for which `probe(i)` passes,
/// assuming passes are downward closed. `None` when the smallest fails.
pub fn binary_search_threshold(
    len: usize,
    mut probe: impl FnMut(usize) -> Result<bool>,
) -> Result<Option<usize>> {
    let (mut lo, mut hi) = (0usize, len);
    let mut best = None;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if probe(mid)? {
            best = Some(mid);
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Hard thresholds per arity class. Each probe asks the first candidate with
/// the probed diameter `alpha` times and passes when all answers agree.
pub fn compute_hard_thresholds(
    data: &EmbeddedDataset,
    oracle: &Oracle,
    candidates: &[MlSet],
    alpha_pair: u32,
    alpha_set: u32,
) -> Result<ThresholdResult> {
    let class_threshold = |pairs: bool, alpha: u32| -> Result<f64> {
        let mut reps: Vec<&MlSet> = candidates.iter().filter(|s| s.is_pair() == pairs).collect();
        reps.sort_by(|a, b| a.diameter.total_cmp(&b.diameter));
        reps.dedup_by(|b, a| a.diameter == b.diameter);
        let best = binary_search_threshold(reps.len(), |i| {
            let q = MlGroupQuery::from_indices(data, &reps[i].members)?;
            oracle.consistency_repeat(&q, alpha)
        })?;
        Ok(best.map_or(0.0, |i| reps[i].diameter))
    };
    Ok(ThresholdResult {
        psi_pair: class_threshold(true, alpha_pair)?,
        psi_set: class_threshold(false, alpha_set)?,
    })
}

pub fn classify_hard_soft(sets: &mut [MlSet], t: &ThresholdResult) {
    for s in sets {
        let psi = if s.is_pair() { t.psi_pair } else { t.psi_set };
        s.hard = s.diameter <= psi;
    }
}

// ---------------------------------------------------------------------------
// Cannot-link generation

const CL_STREAM: u64 = 0x636c;

/// Grows CL sets of at most `k` points whose members are pairwise farther
/// than `radius` apart, keeping a candidate only when the oracle matches it
/// to no current member. Rejected candidates are skipped for the current set
/// only. Every seeded set covers its members; sets of one point are dropped.
pub fn generate_cl_sets(
    data: &EmbeddedDataset,
    oracle: &Oracle,
    radius: f64,
    k: usize,
    seed: u64,
) -> Result<Vec<ClSet>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be >= 2, got {k}")));
    }
    let n = data.n();
    let mut rng = rng::stream(seed, CL_STREAM);
    let mut covered = vec![false; n];
    let mut uncovered: Vec<usize> = (0..n).collect();
    let r_sq = radius * radius;
    let mut out = Vec::new();

    while !uncovered.is_empty() {
        let start = uncovered[rng.random_range(0..uncovered.len())];
        let mut set = ClSet::new(vec![start]);
        let mut excluded = vec![false; n];
        excluded[start] = true;
        // squared distance from each point to the nearest member so far
        let mut gap: Vec<f64> = (0..n)
            .map(|i| geometry::sq_dist(data.point(i), data.point(start)))
            .collect();
        let mut items = vec![QueryItem::from_dataset(data, start)];

        while set.members.len() < k {
            let eligible: Vec<usize> = uncovered
                .iter()
                .copied()
                .filter(|&i| !excluded[i] && gap[i] > r_sq)
                .collect();
            if eligible.is_empty() {
                break;
            }
            let cand = eligible[rng.random_range(0..eligible.len())];
            excluded[cand] = true;
            let q = ClMembershipQuery::new(items.clone(), QueryItem::from_dataset(data, cand))?;
            set.queries += 1;
            match oracle.query_cl_membership(&q)? {
                ClVerdict::None => {
                    set.members.push(cand);
                    items.push(QueryItem::from_dataset(data, cand));
                    let c = data.point(cand);
                    for (i, g) in gap.iter_mut().enumerate() {
                        *g = g.min(geometry::sq_dist(data.point(i), c));
                    }
                }
                ClVerdict::Matched(_) => set.rejections += 1,
            }
        }
        for &m in &set.members {
            covered[m] = true;
        }
        uncovered.retain(|&i| !covered[i]);
        if set.members.len() >= 2 {
            out.push(set);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Ratio-controlled selection

const MIX_STREAM: u64 = 0x6d6978;

/// Picks CL sets in random order, each with every ML set sharing a member,
/// until the constrained ratio reaches `target_ratio`; then tops up with
/// random remaining ML sets. The ledger counts the distinct producing group
/// queries of the chosen ML sets and the membership queries of the chosen
/// CL sets.
pub fn mix_constraints(
    ml_sets: &[MlSet],
    cl_sets: &[ClSet],
    target_ratio: f64,
    n: usize,
    seed: u64,
) -> Result<ConstraintCollection> {
    if !(0.0..=1.0).contains(&target_ratio) {
        return Err(Error::InvalidParameter(format!(
            "target ratio must be in [0, 1], got {target_ratio}"
        )));
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = rng::stream(seed, MIX_STREAM);
    let mut cl_order: Vec<usize> = (0..cl_sets.len()).collect();
    cl_order.shuffle(&mut rng);
    let mut ml_order: Vec<usize> = (0..ml_sets.len()).collect();
    ml_order.shuffle(&mut rng);

    let mut by_point: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in ml_sets.iter().enumerate() {
        for &m in &s.members {
            by_point.entry(m).or_default().push(i);
        }
    }

    let mut covered = vec![false; n];
    let mut n_covered = 0usize;
    let mut cover = |members: &[usize], n_covered: &mut usize| {
        for &m in members {
            if !std::mem::replace(&mut covered[m], true) {
                *n_covered += 1;
            }
        }
    };
    let reached = |c: usize| c as f64 >= target_ratio * n as f64;

    let mut out = ConstraintCollection::default();
    let mut ml_used = vec![false; ml_sets.len()];
    let mut done = reached(0);
    for &ci in &cl_order {
        if done {
            break;
        }
        let y = &cl_sets[ci];
        cover(&y.members, &mut n_covered);
        out.cl_sets.push(y.clone());
        let mut linked: Vec<usize> = y
            .members
            .iter()
            .flat_map(|m| by_point.get(m).into_iter().flatten().copied())
            .filter(|&i| !ml_used[i])
            .collect();
        linked.sort_unstable();
        linked.dedup();
        for i in linked {
            ml_used[i] = true;
            cover(&ml_sets[i].members, &mut n_covered);
            out.ml_sets.push(ml_sets[i].clone());
        }
        done = reached(n_covered);
    }
    for &i in &ml_order {
        if done {
            break;
        }
        if ml_used[i] {
            continue;
        }
        ml_used[i] = true;
        cover(&ml_sets[i].members, &mut n_covered);
        out.ml_sets.push(ml_sets[i].clone());
        done = reached(n_covered);
    }
    if !done {
        log::warn!(
            "constraints exhausted at ratio {:.4} below target {target_ratio}",
            n_covered as f64 / n as f64
        );
        out.below_target = true;
    }

    let mut ml_queries = BTreeSet::new();
    let mut anonymous = 0u64;
    for s in &out.ml_sets {
        match s.query {
            Some(q) => {
                ml_queries.insert(q);
            }
            None => anonymous += 1,
        }
    }
    out.ledger = LedgerTotals {
        ml_queries: ml_queries.len() as u64 + anonymous,
        cl_queries: out.cl_sets.iter().map(|s| s.queries).sum(),
        consistency_queries: 0,
    };
    Ok(out)
}

// ---------------------------------------------------------------------------
// Full generation run

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationParams {
    pub m_max: usize,
    pub alpha_pair: u32,
    pub alpha_set: u32,
    /// Growth factor of the grid radii minus one.
    pub eps: f64,
    pub anchor: GridAnchor,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            m_max: 10,
            alpha_pair: 5,
            alpha_set: 10,
            eps: 0.1,
            anchor: GridAnchor::default(),
        }
    }
}

/// k-center, grid, ML sets, thresholds, and CL sets in one pass. The ledger
/// of the result is the oracle's totals after generation.
pub fn generate_constraints(
    data: &EmbeddedDataset,
    oracle: &Oracle,
    k: usize,
    params: &GenerationParams,
    seed: u64,
) -> Result<ConstraintCollection> {
    let kc = geometry::gonzalez_kcenter(data, k, seed)?;
    let levels = geometry::grid_levels_or_flat(kc.cost_kc, data.n(), data.dim(), params.eps)?;
    let grid = geometry::grid_partition(data, &kc, &levels, params.anchor)?;
    log::info!(
        "k-center cost {:.4}, {} levels, {} cells",
        kc.cost_kc,
        levels.len(),
        grid.cells.len()
    );
    let mut ml = generate_ml_sets(data, oracle, &grid, params.m_max)?;
    let thresholds =
        compute_hard_thresholds(data, oracle, &ml.sets, params.alpha_pair, params.alpha_set)?;
    classify_hard_soft(&mut ml.sets, &thresholds);
    let cl_sets = generate_cl_sets(data, oracle, kc.cost_kc, k, seed)?;
    Ok(ConstraintCollection {
        ml_sets: ml.sets,
        cl_sets,
        ledger: oracle.totals(),
        thresholds,
        below_target: false,
    })
}

// ---------------------------------------------------------------------------
// Constraint file

#[derive(Debug, Serialize, Deserialize)]
struct FileMeta {
    ml_queries: u64,
    cl_queries: u64,
    #[serde(default)]
    consistency_queries: u64,
    psi_pair: f64,
    psi_set: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    below_target: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct ConstraintFile {
    ml: Vec<MlSet>,
    cl: Vec<ClSet>,
    meta: FileMeta,
}

/// Serializes with record ids; for datasets built by this crate ids equal
/// point indices.
pub fn to_json(c: &ConstraintCollection) -> Result<String> {
    let file = ConstraintFile {
        ml: c.ml_sets.clone(),
        cl: c.cl_sets.clone(),
        meta: FileMeta {
            ml_queries: c.ledger.ml_queries,
            cl_queries: c.ledger.cl_queries,
            consistency_queries: c.ledger.consistency_queries,
            psi_pair: c.thresholds.psi_pair,
            psi_set: c.thresholds.psi_set,
            below_target: c.below_target,
        },
    };
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}

pub fn from_json(s: &str) -> Result<ConstraintCollection> {
    let f: ConstraintFile = serde_json::from_str(s)?;
    Ok(ConstraintCollection {
        ml_sets: f.ml,
        cl_sets: f.cl,
        ledger: LedgerTotals {
            ml_queries: f.meta.ml_queries,
            cl_queries: f.meta.cl_queries,
            consistency_queries: f.meta.consistency_queries,
        },
        thresholds: ThresholdResult {
            psi_pair: f.meta.psi_pair,
            psi_set: f.meta.psi_set,
        },
        below_target: f.meta.below_target,
    })
}

pub fn write_constraints(path: &Path, c: &ConstraintCollection) -> Result<()> {
    fs::write(path, to_json(c)?).map_err(|e| Error::io(path, e))
}

/// Reads a constraint file and checks its indices against `n` points.
pub fn read_constraints(path: &Path, n: usize) -> Result<ConstraintCollection> {
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let c = from_json(&s)?;
    c.validate(n)?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticSpec, TextRecord};
    use crate::geometry::CellKey;
    use crate::oracle::{SimOracle, SimOracleConfig};
    use proptest::prelude::*;

    fn dataset(points: &[Vec<f64>], labels: &[i64]) -> EmbeddedDataset {
        let records = labels
            .iter()
            .enumerate()
            .map(|(id, &l)| TextRecord {
                id,
                text: format!("t{id}"),
                label: Some(l),
            })
            .collect();
        EmbeddedDataset::new(records, points[0].len(), points.concat()).unwrap()
    }

    fn exact(data: &EmbeddedDataset) -> Oracle {
        Oracle::new(
            SimOracle::from_dataset(
                data,
                SimOracleConfig {
                    error_rate: 0.0,
                    seed: 0,
                },
            )
            .unwrap(),
        )
    }

    fn one_cell(members: Vec<usize>) -> GridPartition {
        let mut cells = BTreeMap::new();
        cells.insert(
            CellKey {
                level: 2,
                anchor: None,
                coords: vec![0],
            },
            members,
        );
        GridPartition {
            levels: vec![0.5, 1.0, 2.0],
            cells,
        }
    }

    fn line(n: usize, labels: &[i64]) -> EmbeddedDataset {
        let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 * 0.1]).collect();
        dataset(&pts, labels)
    }

    #[test]
    fn pure_cell_becomes_one_set() {
        let data = line(4, &[3, 3, 3, 3]);
        let oracle = exact(&data);
        let got = generate_ml_sets(&data, &oracle, &one_cell(vec![0, 1, 2, 3]), 10).unwrap();
        assert_eq!(got.sets.len(), 1);
        assert_eq!(got.sets[0].members, vec![0, 1, 2, 3]);
        assert_eq!(got.sets[0].level, Some(2));
        assert!((got.sets[0].diameter - 0.3).abs() < 1e-12);
        assert_eq!(oracle.totals().ml_queries, 1);
    }

    #[test]
    fn cells_are_chunked_by_m_max() {
        let data = line(7, &[0; 7]);
        let oracle = exact(&data);
        let got = generate_ml_sets(&data, &oracle, &one_cell((0..7).collect()), 5).unwrap();
        assert_eq!(got.queries, 2);
        assert_eq!(oracle.totals().ml_queries, 2);
        let sizes: Vec<usize> = got.sets.iter().map(MlSet::len).collect();
        assert_eq!(sizes, vec![5, 2]);
        // a trailing single point is skipped without a query
        let oracle = exact(&data);
        generate_ml_sets(&data, &oracle, &one_cell((0..7).collect()), 6).unwrap();
        assert_eq!(oracle.totals().ml_queries, 1);
    }

    #[test]
    fn exact_oracle_sets_are_label_pure() {
        let data = generate_synthetic(&SyntheticSpec {
            k_true: 4,
            n: 200,
            dim: 4,
            separation: 2.0,
            seed: 3,
        })
        .unwrap();
        let labels = data.labels().unwrap();
        let oracle = exact(&data);
        let kc = geometry::gonzalez_kcenter(&data, 4, 3).unwrap();
        let levels = geometry::grid_levels(kc.cost_kc, 200, 4, 0.1).unwrap();
        let grid = geometry::grid_partition(&data, &kc, &levels, GridAnchor::default()).unwrap();
        let got = generate_ml_sets(&data, &oracle, &grid, 10).unwrap();
        assert!(!got.sets.is_empty());
        for s in &got.sets {
            assert!(s.members.iter().all(|&m| labels[m] == labels[s.members[0]]));
        }
    }

    #[test]
    fn ml_sets_dedup_subsets() {
        let sets = vec![
            MlSet::new(vec![1, 2]),
            MlSet::new(vec![1, 2, 3]),
            MlSet::new(vec![4, 5]),
            MlSet::new(vec![5, 4]),
        ];
        let got: Vec<Vec<usize>> = dedup_ml_sets(sets).into_iter().map(|s| s.members).collect();
        assert_eq!(got, vec![vec![1, 2, 3], vec![4, 5]]);
    }

    #[test]
    fn binary_search_against_linear_scan() {
        let psi = [0.1, 0.3, 0.4, 0.6, 0.9];
        let mut probes = 0;
        let got = binary_search_threshold(psi.len(), |i| {
            probes += 1;
            Ok(psi[i] <= 0.5)
        })
        .unwrap();
        assert_eq!(got.map(|i| psi[i]), Some(0.4));
        assert!(probes <= 4, "{probes} probes");
        let linear = psi.iter().rposition(|&d| d <= 0.5);
        assert_eq!(got, linear);
        assert_eq!(binary_search_threshold(5, |_| Ok(false)).unwrap(), None);
        assert_eq!(binary_search_threshold(0, |_| Ok(true)).unwrap(), None);
    }

    proptest! {
        #[test]
        fn binary_search_finds_last_pass(len in 0usize..40, cut in 0usize..41) {
            let mut probes = 0u32;
            let got = binary_search_threshold(len, |i| { probes += 1; Ok(i < cut) }).unwrap();
            let want = (0..len).rev().find(|&i| i < cut);
            prop_assert_eq!(got, want);
            let bound = (usize::BITS - len.leading_zeros()) + 1;
            prop_assert!(probes <= bound);
        }

        #[test]
        fn shrinking_psi_never_hardens(
            diams in proptest::collection::vec((0.0f64..2.0, 2usize..5), 1..20),
            a in 0.0f64..2.0, b in 0.0f64..2.0, c in 0.0f64..2.0, d in 0.0f64..2.0,
        ) {
            let mk = || diams.iter().map(|&(dm, size)| {
                let mut s = MlSet::new((0..size).collect());
                s.diameter = dm;
                s
            }).collect::<Vec<_>>();
            let big = ThresholdResult { psi_pair: a.max(b), psi_set: c.max(d) };
            let small = ThresholdResult { psi_pair: a.min(b), psi_set: c.min(d) };
            let (mut x, mut y) = (mk(), mk());
            classify_hard_soft(&mut x, &big);
            classify_hard_soft(&mut y, &small);
            for (s, t) in x.iter().zip(&y) {
                prop_assert!(s.hard || !t.hard);
            }
        }

        #[test]
        fn mix_reaches_target_when_possible(
            seed in 0u64..1000,
            target in 0.0f64..=1.0,
        ) {
            let n = 30;
            let cl: Vec<ClSet> = (0..10).map(|i| ClSet::new(vec![i, i + 10])).collect();
            let ml: Vec<MlSet> = (0..10).map(|i| MlSet::new(vec![i + 10, i + 20])).collect();
            let got = mix_constraints(&ml, &cl, target, n, seed).unwrap();
            prop_assert!(got.constrained_ratio(n) >= target);
            prop_assert!(!got.below_target);
            prop_assert_eq!(&got, &mix_constraints(&ml, &cl, target, n, seed).unwrap());
        }
    }

    #[test]
    fn exact_oracle_thresholds_are_max_diameters() {
        let pts: Vec<Vec<f64>> = [0.0, 0.2, 1.0, 1.5, 3.0, 3.1, 3.3, 6.0, 6.4, 7.0]
            .iter()
            .map(|&v| vec![v])
            .collect();
        let data = dataset(&pts, &[0; 10]);
        let oracle = exact(&data);
        let sets = vec![
            MlSet::measured(&data, vec![0, 1]),
            MlSet::measured(&data, vec![2, 3]),
            MlSet::measured(&data, vec![4, 5, 6]),
            MlSet::measured(&data, vec![7, 8, 9]),
        ];
        let t = compute_hard_thresholds(&data, &oracle, &sets, 5, 10).unwrap();
        assert!((t.psi_pair - 0.5).abs() < 1e-12);
        assert!((t.psi_set - 1.0).abs() < 1e-12);
        let only_sets = compute_hard_thresholds(&data, &oracle, &sets[2..], 5, 10).unwrap();
        assert_eq!(only_sets.psi_pair, 0.0);
        // two diameters per class: the first probe lands on the larger one
        assert_eq!(oracle.totals().consistency_queries, 5 + 10 + 10);
    }

    #[test]
    fn classification_follows_arity_thresholds() {
        let mut sets = vec![
            MlSet::new(vec![0, 1]),
            MlSet::new(vec![0, 1, 2]),
            MlSet::new(vec![3, 4, 5]),
        ];
        sets[1].diameter = 0.5;
        classify_hard_soft(
            &mut sets,
            &ThresholdResult {
                psi_pair: 0.0,
                psi_set: 0.0,
            },
        );
        assert_eq!(
            sets.iter().map(|s| s.hard).collect::<Vec<_>>(),
            vec![true, false, true]
        );

        let mut batch: Vec<MlSet> = (0..12)
            .map(|i| {
                let mut s = MlSet::new((0..2 + i % 3).collect());
                s.diameter = i as f64 * 0.25;
                s
            })
            .collect();
        let t = ThresholdResult {
            psi_pair: 1.0,
            psi_set: 1.5,
        };
        classify_hard_soft(&mut batch, &t);
        for s in &batch {
            let want = s.diameter <= if s.len() == 2 { 1.0 } else { 1.5 };
            assert_eq!(s.hard, want);
        }
    }

    fn three_blobs() -> EmbeddedDataset {
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for (b, c) in [0.0, 100.0, 200.0].iter().enumerate() {
            for j in 0..4 {
                pts.push(vec![c + j as f64 * 0.1, 0.0]);
                labels.push(b as i64);
            }
        }
        dataset(&pts, &labels)
    }

    #[test]
    fn separated_blobs_fill_first_cl_set() {
        let data = three_blobs();
        let kc = geometry::gonzalez_kcenter(&data, 3, 0).unwrap();
        assert!(kc.cost_kc < 1.0);
        let oracle = exact(&data);
        let sets = generate_cl_sets(&data, &oracle, kc.cost_kc, 3, 7).unwrap();
        assert_eq!(sets[0].len(), 3);
        assert_eq!(sets[0].rejections, 0);
        // every point gets covered by full sets: 4 sets of one point per blob
        assert_eq!(sets.len(), 4);
        assert_eq!(oracle.totals().cl_queries, 8);
    }

    #[test]
    fn cl_sets_are_heterogeneous_and_bounded() {
        let data = generate_synthetic(&SyntheticSpec {
            k_true: 5,
            n: 150,
            dim: 3,
            separation: 1.0,
            seed: 11,
        })
        .unwrap();
        let labels = data.labels().unwrap();
        let oracle = exact(&data);
        let sets = generate_cl_sets(&data, &oracle, 0.5, 5, 2).unwrap();
        assert!(!sets.is_empty());
        let mut seen = BTreeSet::new();
        for s in &sets {
            assert!(s.len() >= 2 && s.len() <= 5);
            let ls: BTreeSet<i64> = s.members.iter().map(|&m| labels[m]).collect();
            assert_eq!(ls.len(), s.len());
            for &m in &s.members {
                assert!(seen.insert(m), "point {m} in two CL sets");
            }
            assert_eq!(s.queries, s.len() as u64 - 1 + s.rejections);
        }
        let total: u64 = sets.iter().map(|s| s.queries).sum();
        assert!(total <= oracle.totals().cl_queries);
    }

    #[test]
    fn mix_hand_trace() {
        let cl = vec![ClSet::new(vec![0, 1])];
        let ml = vec![MlSet::new(vec![1, 2])];
        let got = mix_constraints(&ml, &cl, 0.3, 10, 0).unwrap();
        assert_eq!(got.cl_sets, cl);
        assert_eq!(got.ml_sets, ml);
        assert_eq!(got.constrained_ratio(10), 0.3);
        assert!(!got.below_target);

        let empty = mix_constraints(&ml, &cl, 0.0, 10, 0).unwrap();
        assert!(empty.ml_sets.is_empty() && empty.cl_sets.is_empty());

        let short = mix_constraints(&ml, &cl, 0.5, 10, 0).unwrap();
        assert!(short.below_target);
        assert!(mix_constraints(&ml, &cl, 1.5, 10, 0).is_err());
    }

    #[test]
    fn mix_attributes_queries() {
        let mut ml: Vec<MlSet> = (0..4).map(|i| MlSet::new(vec![2 * i, 2 * i + 1])).collect();
        ml[0].query = Some(0);
        ml[1].query = Some(0);
        ml[2].query = Some(1);
        ml[3].query = Some(2);
        let mut cl = ClSet::new(vec![0, 2]);
        cl.queries = 5;
        cl.rejections = 4;
        let got = mix_constraints(&ml, &[cl], 0.4, 10, 1).unwrap();
        assert_eq!(got.ml_sets.len(), 2);
        assert_eq!(got.ledger.ml_queries, 1);
        assert_eq!(got.ledger.cl_queries, 5);
        // pairs: 1 + 1 from ML, 1 + 4 rejections from CL
        assert_eq!(fsc_equivalent_queries(&got), 7);
    }

    #[test]
    fn fsc_counts_pairs() {
        let mut c = ConstraintCollection::default();
        c.ml_sets.push(MlSet::new((0..5).collect()));
        c.cl_sets.push(ClSet::new(vec![0, 6, 7]));
        assert_eq!(fsc_equivalent_queries(&c), 10 + 3);
    }

    #[test]
    fn file_round_trip_and_validation() {
        let data = three_blobs();
        let oracle = exact(&data);
        let c = generate_constraints(&data, &oracle, 3, &GenerationParams::default(), 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        write_constraints(&path, &c).unwrap();
        let back = read_constraints(&path, data.n()).unwrap();
        assert_eq!(back, c);
        assert_eq!(to_json(&back).unwrap(), fs::read_to_string(&path).unwrap());
        let v: serde_json::Value = serde_json::from_str(&to_json(&c).unwrap()).unwrap();
        assert!(v["ml"].is_array() && v["cl"].is_array());
        assert!(v["meta"]["psi_pair"].is_number());
        assert!(read_constraints(&path, 5).is_err());
    }

    #[test]
    fn generation_is_deterministic_and_ledgered() {
        let data = generate_synthetic(&SyntheticSpec {
            k_true: 4,
            n: 120,
            dim: 4,
            separation: 3.0,
            seed: 9,
        })
        .unwrap();
        let cfg = SimOracleConfig {
            error_rate: 0.1,
            seed: 4,
        };
        let run = || {
            let oracle = Oracle::new(SimOracle::from_dataset(&data, cfg).unwrap());
            let c =
                generate_constraints(&data, &oracle, 4, &GenerationParams::default(), 2).unwrap();
            let lines = oracle.ledger().transcript().len() as u64;
            assert_eq!(lines, c.ledger.total());
            to_json(&c).unwrap()
        };
        assert_eq!(run(), run());
    }
}
