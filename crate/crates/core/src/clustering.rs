//! Constrained k-means with penalties.
//!
//! [`lsck_hc`] alternates a constrained assignment and a center update:
//!
//! 1. Every must-link component is split by nearest center and its parts
//!    are merged back while keeping them apart would cost more than the
//!    must-link penalty `w_m` ([`partition_soft`]). Hard components stay
//!    whole.
//! 2. Each resulting group is replaced by its weighted mass center and
//!    cannot-link sets are placed by a matching-based local search that may
//!    release members at penalty `w_cl` ([`cl_local_search`]).
//! 3. Everything else goes to its nearest center, and centers move to the
//!    means of their clusters.
//!
//! Ties are broken toward the lowest index throughout.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::{ConstraintCollection, MlSet};
use crate::dataset::EmbeddedDataset;
use crate::error::{Error, Result};
use crate::geometry::{sq_dist, CenterSet, Distance};
use crate::matching::{min_cost_matching, CostMatrix};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoint {
    pub coords: Vec<f64>,
    pub weight: f64,
}

impl WeightedPoint {
    pub fn unit(coords: &[f64]) -> Self {
        Self {
            coords: coords.to_vec(),
            weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalties {
    pub w_m: f64,
    pub w_cl: f64,
}

impl Penalties {
    pub fn new(w_m: f64, w_cl: f64) -> Result<Self> {
        let p = Self { w_m, w_cl };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("w_m", self.w_m), ("w_cl", self.w_cl)] {
            if !(w >= 0.0) || w.is_nan() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be >= 0, got {w}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Convergence {
    /// Squared center displacement below which iteration stops; `None`
    /// means `1e-4` times the squared bounding-box diagonal.
    pub tol: Option<f64>,
    pub max_iters: usize,
}

impl Default for Convergence {
    fn default() -> Self {
        Self {
            tol: None,
            max_iters: 100,
        }
    }
}

impl Convergence {
    pub fn resolve_tol(&self, data: &EmbeddedDataset) -> f64 {
        self.tol.unwrap_or_else(|| 1e-4 * data.bbox_diag_sq())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringConfig {
    pub k: usize,
    pub penalties: Penalties,
    #[serde(default)]
    pub convergence: Convergence,
    #[serde(default)]
    pub distance: Distance,
}

/// Counters collected while clustering.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Savings `g_y` evaluated in the cannot-link search.
    pub g_checks: u64,
    /// Savings found below zero beyond rounding tolerance.
    pub g_negative: u64,
    pub ml_merges: u64,
    pub cl_commits: u64,
    pub cl_releases: u64,
    /// Cannot-link sets whose already placed members shared a center.
    pub cl_pinned_collisions: u64,
    /// Cannot-link sets with more unplaced members than unused centers.
    pub cl_pinned_overflows: u64,
    /// Seeding had to reuse points for lack of distinct candidates.
    pub degenerate_seeding: bool,
}

impl Diagnostics {
    fn absorb(&mut self, o: &Diagnostics) {
        self.g_checks += o.g_checks;
        self.g_negative += o.g_negative;
        self.ml_merges += o.ml_merges;
        self.cl_commits += o.cl_commits;
        self.cl_releases += o.cl_releases;
        self.cl_pinned_collisions += o.cl_pinned_collisions;
        self.cl_pinned_overflows += o.cl_pinned_overflows;
        self.degenerate_seeding |= o.degenerate_seeding;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    /// Cluster id in `0..k` per point.
    pub assignment: Vec<usize>,
    /// Centers the final assignment was computed against.
    pub centers: CenterSet,
    /// Sum of squared distances of points to their cluster means.
    pub objective: f64,
    /// Objective after each iteration's assignment.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: Diagnostics,
}

// ---------------------------------------------------------------------------
// Seeding

#[derive(Debug, Clone, PartialEq)]
pub struct Seeding {
    pub centers: CenterSet,
    pub degenerate: bool,
}

const SEED_STREAM: u64 = 0x6b7070;

/// Weighted k-means++: the first center is drawn with probability
/// proportional to weight, later ones proportional to weight times squared
/// distance to the nearest chosen center. If every remaining candidate sits
/// on a chosen center the draw falls back to weight alone and the result is
/// flagged degenerate.
pub fn kmeanspp_seed(points: &[WeightedPoint], k: usize, seed: u64) -> Result<Seeding> {
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if points
        .iter()
        .any(|p| !(p.weight > 0.0) || !p.weight.is_finite())
    {
        return Err(Error::InvalidParameter(
            "seeding weights must be positive".into(),
        ));
    }
    let dim = points[0].coords.len();
    let mut rng = rng::stream(seed, SEED_STREAM);
    let weights: Vec<f64> = points.iter().map(|p| p.weight).collect();
    let mut coords = Vec::with_capacity(k * dim);
    let mut degenerate = false;

    let first = sample(&weights, &mut rng);
    coords.extend_from_slice(&points[first].coords);
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(&p.coords, &points[first].coords))
        .collect();
    for _ in 1..k {
        let scores: Vec<f64> = weights.iter().zip(&d2).map(|(w, d)| w * d).collect();
        let next = if scores.iter().sum::<f64>() > 0.0 {
            sample(&scores, &mut rng)
        } else {
            degenerate = true;
            sample(&weights, &mut rng)
        };
        let c = points[next].coords.clone();
        for (slot, p) in d2.iter_mut().zip(points) {
            *slot = slot.min(sq_dist(&p.coords, &c));
        }
        coords.extend_from_slice(&c);
    }
    Ok(Seeding {
        centers: CenterSet::new(dim, coords)?,
        degenerate,
    })
}

/// Index drawn with probability proportional to `scores`.
fn sample(scores: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = scores.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &s) in scores.iter().enumerate() {
        acc += s;
        if u < acc {
            return i;
        }
    }
    // rounding left u at the very top: take the last positive score
    scores.iter().rposition(|&s| s > 0.0).unwrap_or(0)
}

// ---------------------------------------------------------------------------
// Must-link components and partitions

/// Overlapping must-link sets joined into disjoint components. A component
/// is hard only when every set in it is hard.
#[derive(Debug, Clone, PartialEq)]
pub struct MlComponent {
    pub members: Vec<usize>,
    pub hard: bool,
}

pub fn ml_components(ml_sets: &[MlSet], n: usize, honor_hard: bool) -> Result<Vec<MlComponent>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut in_set = vec![false; n];
    for (i, s) in ml_sets.iter().enumerate() {
        if s.members.iter().any(|&m| m >= n) {
            return Err(Error::InvalidConstraint { index: i, n });
        }
        for &m in &s.members {
            in_set[m] = true;
        }
        for w in s.members.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut by_root: BTreeMap<usize, MlComponent> = BTreeMap::new();
    for p in (0..n).filter(|&p| in_set[p]) {
        let r = find(&mut parent, p);
        by_root
            .entry(r)
            .or_insert_with(|| MlComponent {
                members: Vec::new(),
                hard: true,
            })
            .members
            .push(p);
    }
    for s in ml_sets {
        if !(honor_hard && s.hard) {
            if let Some(&m) = s.members.first() {
                let r = find(&mut parent, m);
                by_root.get_mut(&r).expect("member has a component").hard = false;
            }
        }
    }
    Ok(by_root
        .into_values()
        .filter(|c| c.members.len() >= 2)
        .collect())
}

/// A block of points that is assigned as one unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub members: Vec<usize>,
    pub centroid: Vec<f64>,
}

impl Group {
    fn new(data: &EmbeddedDataset, members: Vec<usize>) -> Self {
        let centroid = mean_of(data, &members);
        Self { members, centroid }
    }

    pub fn weight(&self) -> f64 {
        self.members.len() as f64
    }
}

fn mean_of(data: &EmbeddedDataset, members: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; data.dim()];
    for &m in members {
        for (a, v) in c.iter_mut().zip(data.point(m)) {
            *a += v;
        }
    }
    let inv = 1.0 / members.len() as f64;
    c.iter_mut().for_each(|a| *a *= inv);
    c
}

/// Splits a soft component by nearest center, then repeatedly merges
/// partitions. Partitions are scanned largest first (lowest index on ties);
/// `P_j` joins `P_i` when
/// `(w_m + d(mean P_i, c_i)) |P_i| + (w_m + d(mean P_j, c_j)) |P_j|`
/// exceeds the cost of the union at the center nearest its mean, `c_i` and
/// `c_j` being the centers nearest each partition's mean. Passes repeat
/// until none merges.
pub fn partition_soft(
    data: &EmbeddedDataset,
    members: &[usize],
    centers: &CenterSet,
    w_m: f64,
    distance: Distance,
    merges: &mut u64,
) -> Vec<Group> {
    let mut by_center: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &m in members {
        by_center
            .entry(centers.nearest(data.point(m)).0)
            .or_default()
            .push(m);
    }
    let mut parts: Vec<Group> = by_center
        .into_values()
        .map(|ms| Group::new(data, ms))
        .collect();
    let split_cost = |g: &Group| {
        let (_, sq) = centers.nearest(&g.centroid);
        (w_m + distance.from_sq(sq)) * g.weight()
    };
    'pass: loop {
        // stable sort keeps the earlier partition first among equal sizes
        parts.sort_by_key(|g| std::cmp::Reverse(g.members.len()));
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                let mut union = parts[i].members.clone();
                union.extend_from_slice(&parts[j].members);
                let merged = Group::new(data, union);
                let c = centers.center(centers.nearest(&merged.centroid).0);
                let joint: f64 = merged
                    .members
                    .iter()
                    .map(|&p| distance.eval(data.point(p), c))
                    .sum();
                if split_cost(&parts[i]) + split_cost(&parts[j]) > joint {
                    *merges += 1;
                    parts[i] = merged;
                    parts.remove(j);
                    continue 'pass;
                }
            }
        }
        break;
    }
    for p in &mut parts {
        p.members.sort_unstable();
    }
    parts
}

/// Groups for one assignment round: soft components partitioned at
/// `centers`, hard components whole.
fn ml_groups(
    data: &EmbeddedDataset,
    comps: &[MlComponent],
    centers: &CenterSet,
    w_m: f64,
    distance: Distance,
    diag: &mut Diagnostics,
) -> Vec<Group> {
    let mut out = Vec::new();
    for c in comps {
        if c.hard {
            out.push(Group::new(data, c.members.clone()));
        } else {
            out.extend(partition_soft(
                data,
                &c.members,
                centers,
                w_m,
                distance,
                &mut diag.ml_merges,
            ));
        }
    }
    out
}

/// Seeding input: points outside hard components with weight one in index
/// order, then one mass center per hard component weighted by its size.
fn seeding_points(data: &EmbeddedDataset, comps: &[MlComponent]) -> Vec<WeightedPoint> {
    let mut in_hard = vec![false; data.n()];
    let hard: Vec<&MlComponent> = comps.iter().filter(|c| c.hard).collect();
    for c in &hard {
        for &m in &c.members {
            in_hard[m] = true;
        }
    }
    let mut pts: Vec<WeightedPoint> = (0..data.n())
        .filter(|&i| !in_hard[i])
        .map(|i| WeightedPoint::unit(data.point(i)))
        .collect();
    pts.extend(hard.iter().map(|c| WeightedPoint {
        coords: mean_of(data, &c.members),
        weight: c.members.len() as f64,
    }));
    pts
}

/// Seeding plus must-link partitioning at the seeded centers.
pub fn ml_penalty_cluster(
    data: &EmbeddedDataset,
    ml_sets: &[MlSet],
    w_m: f64,
    k: usize,
    seed: u64,
    distance: Distance,
) -> Result<(Vec<Group>, CenterSet)> {
    check_k(k, data.n())?;
    let comps = ml_components(ml_sets, data.n(), true)?;
    let seeding = kmeanspp_seed(&seeding_points(data, &comps), k, seed)?;
    let mut diag = Diagnostics::default();
    let groups = ml_groups(data, &comps, &seeding.centers, w_m, distance, &mut diag);
    Ok((groups, seeding.centers))
}

// ---------------------------------------------------------------------------
// Cannot-link local search

#[derive(Debug, Clone, PartialEq)]
pub struct ClSearchOutcome {
    /// Center per unit, `None` for units outside every cannot-link set.
    pub assigned: Vec<Option<usize>>,
    pub diagnostics: Diagnostics,
}

/// Places the members of each cannot-link set (given as unit indices).
///
/// For the unplaced members `Y` of a set: `M` is the minimum matching of
/// `Y` to centers at cost `weight * d`. For each `y`, `M'` is the minimum
/// matching of `Y \ {y}`, `g_y = cost(M) - cost(M') - weight_y d(y, c(y))`
/// with `c(y)` the nearest center, and `num_y` the weight of `y` plus that
/// of members whose center differs between `M` and `M'`. With `y*` the
/// first maximizer of `g_y`, `M` is committed if `g_{y*} < num_{y*} w_cl`;
/// otherwise `y*` goes to `c(y*)` and the search repeats without it.
///
/// Sets are processed in order. Members placed by an earlier set keep their
/// center, and their centers are withheld from the matching.
pub fn cl_local_search(
    units: &[WeightedPoint],
    cl_sets: &[Vec<usize>],
    centers: &CenterSet,
    w_cl: f64,
    distance: Distance,
) -> Result<ClSearchOutcome> {
    let k = centers.k();
    let mut assigned: Vec<Option<usize>> = vec![None; units.len()];
    let mut diag = Diagnostics::default();
    for (si, set) in cl_sets.iter().enumerate() {
        let mut ys: Vec<usize> = Vec::with_capacity(set.len());
        for &u in set {
            if u >= units.len() {
                return Err(Error::InvalidConstraint {
                    index: si,
                    n: units.len(),
                });
            }
            if !ys.contains(&u) {
                ys.push(u);
            }
        }
        if ys.len() > k {
            return Err(Error::InvalidParameter(format!(
                "cannot-link set {si} has {} members for {k} centers",
                ys.len()
            )));
        }
        let mut taken = vec![false; k];
        let mut collision = false;
        ys.retain(|&u| match assigned[u] {
            Some(c) => {
                collision |= std::mem::replace(&mut taken[c], true);
                false
            }
            None => true,
        });
        diag.cl_pinned_collisions += collision as u64;
        let mut cols: Vec<usize> = (0..k).filter(|&c| !taken[c]).collect();
        if ys.len() > cols.len() {
            diag.cl_pinned_overflows += 1;
            cols = (0..k).collect();
        }
        resolve_set(
            units,
            ys,
            &cols,
            centers,
            w_cl,
            distance,
            &mut assigned,
            &mut diag,
        )?;
    }
    Ok(ClSearchOutcome {
        assigned,
        diagnostics: diag,
    })
}

#[allow(clippy::too_many_arguments)]
fn resolve_set(
    units: &[WeightedPoint],
    mut ys: Vec<usize>,
    cols: &[usize],
    centers: &CenterSet,
    w_cl: f64,
    distance: Distance,
    assigned: &mut [Option<usize>],
    diag: &mut Diagnostics,
) -> Result<()> {
    while !ys.is_empty() {
        let costs: Vec<f64> = ys
            .iter()
            .flat_map(|&u| {
                cols.iter().map(move |&c| {
                    units[u].weight * distance.eval(&units[u].coords, centers.center(c))
                })
            })
            .collect();
        let matrix = CostMatrix::new(ys.len(), cols.len(), costs)?;
        let m = min_cost_matching(&matrix)?;

        // (position, g, num, nearest center)
        let mut best: Option<(usize, f64, f64, usize)> = None;
        for pos in 0..ys.len() {
            let without = min_cost_matching(&matrix.without_row(pos))?;
            let mut num = units[ys[pos]].weight;
            for (r, &u) in ys.iter().enumerate().filter(|&(r, _)| r != pos) {
                let r2 = if r < pos { r } else { r - 1 };
                if m.assignment[r] != without.assignment[r2] {
                    num += units[u].weight;
                }
            }
            let y = &units[ys[pos]];
            let (cy, sq) = centers.nearest(&y.coords);
            let dy = y.weight * distance.from_sq(sq);
            let mut g = m.total_cost - without.total_cost - dy;
            diag.g_checks += 1;
            let tol = 1e-9 * (m.total_cost.abs() + dy + 1.0);
            if g < -tol {
                diag.g_negative += 1;
                log::error!("negative cannot-link saving {g}");
            } else if g < 0.0 {
                g = 0.0;
            }
            if best.is_none_or(|b| g > b.1) {
                best = Some((pos, g, num, cy));
            }
        }
        let (pos, g, num, cy) = best.expect("nonempty set");
        if g < num * w_cl {
            for (r, &u) in ys.iter().enumerate() {
                assigned[u] = Some(cols[m.assignment[r]]);
            }
            diag.cl_commits += 1;
            return Ok(());
        }
        assigned[ys[pos]] = Some(cy);
        ys.remove(pos);
        diag.cl_releases += 1;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Outer loop

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k must satisfy 1 <= k <= n (k = {k}, n = {n})"
        )));
    }
    Ok(())
}

/// Sum of squared distances to cluster means.
pub fn kmeans_objective(data: &EmbeddedDataset, assignment: &[usize], k: usize) -> f64 {
    let means = cluster_means(data, assignment, k);
    assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| means[c].as_ref().map_or(0.0, |m| sq_dist(data.point(i), m)))
        .sum()
}

fn cluster_means(data: &EmbeddedDataset, assignment: &[usize], k: usize) -> Vec<Option<Vec<f64>>> {
    let mut sums = vec![vec![0.0; data.dim()]; k];
    let mut counts = vec![0usize; k];
    for (i, &c) in assignment.iter().enumerate() {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(data.point(i)) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(mut s, n)| {
            (n > 0).then(|| {
                s.iter_mut().for_each(|v| *v /= n as f64);
                s
            })
        })
        .collect()
}

struct Prepared {
    comps: Vec<MlComponent>,
    /// Cannot-link sets as point indices.
    cl_sets: Vec<Vec<usize>>,
}

impl Prepared {
    fn new(data: &EmbeddedDataset, c: &ConstraintCollection, honor_hard: bool) -> Result<Self> {
        c.validate(data.n())?;
        Ok(Self {
            comps: ml_components(&c.ml_sets, data.n(), honor_hard)?,
            cl_sets: c.cl_sets.iter().map(|s| s.members.clone()).collect(),
        })
    }

    fn empty() -> Self {
        Self {
            comps: Vec::new(),
            cl_sets: Vec::new(),
        }
    }
}

/// One constrained assignment at fixed centers.
fn assign(
    data: &EmbeddedDataset,
    prep: &Prepared,
    centers: &CenterSet,
    penalties: Penalties,
    distance: Distance,
    diag: &mut Diagnostics,
) -> Result<Vec<usize>> {
    let n = data.n();
    let groups = ml_groups(data, &prep.comps, centers, penalties.w_m, distance, diag);
    if groups.is_empty() && prep.cl_sets.is_empty() {
        return Ok((0..n).map(|i| centers.nearest(data.point(i)).0).collect());
    }

    // units: groups first, then loose points in index order
    let mut unit_of = vec![usize::MAX; n];
    let mut units: Vec<WeightedPoint> = Vec::with_capacity(n);
    for (gi, g) in groups.iter().enumerate() {
        for &m in &g.members {
            unit_of[m] = gi;
        }
        units.push(WeightedPoint {
            coords: g.centroid.clone(),
            weight: g.weight(),
        });
    }
    for i in 0..n {
        if unit_of[i] == usize::MAX {
            unit_of[i] = units.len();
            units.push(WeightedPoint::unit(data.point(i)));
        }
    }
    let cl_units: Vec<Vec<usize>> = prep
        .cl_sets
        .iter()
        .map(|s| s.iter().map(|&p| unit_of[p]).collect())
        .collect();
    let search = cl_local_search(&units, &cl_units, centers, penalties.w_cl, distance)?;
    diag.absorb(&search.diagnostics);
    let unit_center: Vec<usize> = units
        .iter()
        .zip(&search.assigned)
        .map(|(u, a)| a.unwrap_or_else(|| centers.nearest(&u.coords).0))
        .collect();
    Ok(unit_of.iter().map(|&u| unit_center[u]).collect())
}

fn run(
    data: &EmbeddedDataset,
    prep: &Prepared,
    k: usize,
    penalties: Penalties,
    convergence: &Convergence,
    distance: Distance,
    seed: u64,
) -> Result<ClusteringResult> {
    check_k(k, data.n())?;
    penalties.validate()?;
    if convergence.max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
    }
    let tol = convergence.resolve_tol(data);
    let seeding = kmeanspp_seed(&seeding_points(data, &prep.comps), k, seed)?;
    let mut diag = Diagnostics {
        degenerate_seeding: seeding.degenerate,
        ..Diagnostics::default()
    };
    let mut centers = seeding.centers;
    let mut previous: Option<Vec<usize>> = None;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let assignment = loop {
        iterations += 1;
        let assignment = assign(data, prep, &centers, penalties, distance, &mut diag)?;
        history.push(kmeans_objective(data, &assignment, k));
        if previous.as_ref() == Some(&assignment) {
            converged = true;
            break assignment;
        }
        let means = cluster_means(data, &assignment, k);
        let mut next = centers.clone();
        let mut shift = 0.0f64;
        for (c, m) in means.iter().enumerate() {
            if let Some(m) = m {
                shift = shift.max(sq_dist(centers.center(c), m));
                next.center_mut(c).copy_from_slice(m);
            }
        }
        if shift < tol {
            converged = true;
            break assignment;
        }
        if iterations >= convergence.max_iters {
            break assignment;
        }
        centers = next;
        previous = Some(assignment);
    };
    Ok(ClusteringResult {
        objective: kmeans_objective(data, &assignment, k),
        assignment,
        centers,
        history,
        iterations,
        converged,
        diagnostics: diag,
    })
}

/// Constrained clustering with hard must-link components honored.
pub fn lsck_hc(
    data: &EmbeddedDataset,
    constraints: &ConstraintCollection,
    config: &ClusteringConfig,
    seed: u64,
) -> Result<ClusteringResult> {
    let prep = Prepared::new(data, constraints, true)?;
    run(
        data,
        &prep,
        config.k,
        config.penalties,
        &config.convergence,
        config.distance,
        seed,
    )
}

/// As [`lsck_hc`] with every must-link set treated as soft.
pub fn lsck(
    data: &EmbeddedDataset,
    constraints: &ConstraintCollection,
    config: &ClusteringConfig,
    seed: u64,
) -> Result<ClusteringResult> {
    let prep = Prepared::new(data, constraints, false)?;
    run(
        data,
        &prep,
        config.k,
        config.penalties,
        &config.convergence,
        config.distance,
        seed,
    )
}

/// k-means++ seeding followed by Lloyd iterations.
pub fn kmeans_baseline(
    data: &EmbeddedDataset,
    k: usize,
    seed: u64,
    convergence: &Convergence,
) -> Result<ClusteringResult> {
    let zero = Penalties {
        w_m: 0.0,
        w_cl: 0.0,
    };
    run(
        data,
        &Prepared::empty(),
        k,
        zero,
        convergence,
        Distance::Squared,
        seed,
    )
}

/// Both penalties set to the mean distance from a point to its center in
/// one baseline run.
pub fn default_penalties(
    data: &EmbeddedDataset,
    k: usize,
    seed: u64,
    convergence: &Convergence,
    distance: Distance,
) -> Result<Penalties> {
    let base = kmeans_baseline(data, k, seed, convergence)?;
    let total: f64 = base
        .assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| distance.eval(data.point(i), base.centers.center(c)))
        .sum();
    let w = total / data.n() as f64;
    Ok(Penalties { w_m: w, w_cl: w })
}
