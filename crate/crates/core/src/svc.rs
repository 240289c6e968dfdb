//! Shattering under strategic responses.
//!
//! Pattern counting on explicit finite spaces (strategic and adversarial
//! variants), plus executable versions of the constructions that shatter
//! points with linear classifiers: polygon costs that shatter any number of
//! copies of the origin, and the basis construction that shatters
//! `d + 1 - dim(kernel)` points under any seminorm.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Hyperplane, Seminorm};
use crate::linalg::{complement_basis, dot, null_vector, scale};
use crate::serm::sphere_directions;
use crate::strategic::{best_response_label, separable_best_response_label, CostModel, DataPoint, InstanceMeta, Label, StrategicInstance};

/// Largest point count for which patterns are tracked exactly.
pub const MAX_EXACT_POINTS: usize = 20;
/// Cap on the number of point subsets examined by exhaustive searches.
const MAX_COMBINATIONS: u64 = 20_000_000;

/// A finite feature set with explicit classifiers, move costs and preferences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteStrategicSpace {
    /// Display names of the features.
    pub names: Vec<String>,
    /// Label tables, one per classifier.
    pub family: Vec<Vec<Label>>,
    /// `cost[x][z]` is the cost for an agent at `x` to present `z`; may be infinite.
    pub cost: Vec<Vec<f64>>,
    pub preferences: Vec<f64>,
}

impl FiniteStrategicSpace {
    pub fn new(names: Vec<String>, family: Vec<Vec<Label>>, cost: Vec<Vec<f64>>, preferences: Vec<f64>) -> Result<Self> {
        let m = names.len();
        if cost.len() != m || cost.iter().any(|row| row.len() != m) {
            return invalid("cost table must be square over the feature set");
        }
        if family.iter().any(|h| h.len() != m || h.iter().any(|l| *l != 1 && *l != -1)) {
            return invalid("every classifier must label every feature with +1 or -1");
        }
        for (x, row) in cost.iter().enumerate() {
            if row[x] != 0.0 {
                return invalid(format!("cost of staying at feature {x} must be 0"));
            }
            if row.iter().any(|c| c.is_nan() || *c < 0.0) {
                return invalid("costs must be non-negative");
            }
        }
        if preferences.iter().any(|r| !r.is_finite()) {
            return invalid("preferences must be finite");
        }
        Ok(FiniteStrategicSpace { names, family, cost, preferences })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn with_preferences(&self, preferences: Vec<f64>) -> Self {
        FiniteStrategicSpace { preferences, ..self.clone() }
    }

    /// Symmetric with the triangle inequality, checked exhaustively.
    pub fn is_metric(&self) -> bool {
        let m = self.len();
        for x in 0..m {
            for z in 0..m {
                if self.cost[x][z] != self.cost[z][x] || (x != z && self.cost[x][z] <= 0.0) {
                    return false;
                }
                for y in 0..m {
                    if self.cost[x][y] + self.cost[y][z] < self.cost[x][z] - 1e-12 {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Label after an agent at `x` with preference `r` best-responds to classifier `h`.
    pub fn best_response(&self, h: usize, x: usize, r: f64) -> Label {
        let table = &self.family[h];
        let here = table[x];
        let want = if r > 0.0 {
            1
        } else if r < 0.0 {
            -1
        } else {
            return here;
        };
        if here == want {
            return here;
        }
        if (0..self.len()).any(|z| table[z] == want && self.cost[x][z] <= r.abs()) {
            want
        } else {
            here
        }
    }

    /// Corrupted label: `Some(h(x))` if every feature within `budget` of `x`
    /// shares its label, `None` otherwise.
    pub fn corrupted(&self, h: usize, x: usize, budget: f64) -> Option<Label> {
        let table = &self.family[h];
        let ok = (0..self.len()).all(|z| self.cost[x][z] > budget || table[z] == table[x]);
        ok.then_some(table[x])
    }
}

/// Distinct label patterns realized on a fixed list of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShatterReport {
    pub n: usize,
    /// Number of distinct patterns.
    pub sigma: usize,
    /// Each realized pattern with the index of the first classifier producing it.
    pub patterns: Vec<(Vec<Label>, usize)>,
    /// True when the family was enumerated in full rather than sampled.
    pub exact: bool,
}

impl ShatterReport {
    pub fn is_shattered(&self) -> bool {
        self.n < usize::BITS as usize && self.sigma == 1usize << self.n
    }
}

fn encode(pattern: &[Label]) -> u64 {
    pattern.iter().enumerate().fold(0u64, |acc, (i, &l)| if l == 1 { acc | (1 << i) } else { acc })
}

/// Collect the patterns `pattern_of(h)` over `0..family_size`.
pub fn collect_patterns(
    n: usize,
    family_size: usize,
    exact: bool,
    mut pattern_of: impl FnMut(usize) -> Result<Vec<Label>>,
) -> Result<ShatterReport> {
    if n > MAX_EXACT_POINTS {
        return Err(Error::ResourceLimit(format!("pattern bookkeeping is capped at {MAX_EXACT_POINTS} points")));
    }
    let mut seen: BTreeMap<u64, (Vec<Label>, usize)> = BTreeMap::new();
    for h in 0..family_size {
        let p = pattern_of(h)?;
        seen.entry(encode(&p)).or_insert((p, h));
    }
    let mut patterns: Vec<(Vec<Label>, usize)> = seen.into_values().collect();
    patterns.sort_by_key(|(_, h)| *h);
    Ok(ShatterReport { n, sigma: patterns.len(), patterns, exact })
}

/// Patterns realized on `(feature, preference)` pairs of a finite space.
pub fn shattering_coefficient_finite(space: &FiniteStrategicSpace, items: &[(usize, f64)]) -> Result<ShatterReport> {
    if items.iter().any(|&(x, _)| x >= space.len()) {
        return invalid("feature index outside the space");
    }
    collect_patterns(items.len(), space.family.len(), true, |h| {
        Ok(items.iter().map(|&(x, r)| space.best_response(h, x, r)).collect())
    })
}

/// Patterns realized by linear classifiers on seminorm-cost points.
pub fn shattering_coefficient_linear(points: &[DataPoint], costs: &[Seminorm], family: &[Hyperplane]) -> Result<ShatterReport> {
    if costs.len() != points.len() {
        return invalid("one seminorm per point is required");
    }
    collect_patterns(points.len(), family.len(), false, |h| {
        points.iter().zip(costs).map(|(p, l)| best_response_label(&family[h], p, l)).collect()
    })
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Visit every k-subset of `0..m` in lexicographic order until `f` returns true.
fn any_combination(m: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    if k > m {
        return false;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if f(&idx) {
            return true;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return false;
            }
        }
        if k == 0 || idx[i] == i + m - k {
            return false;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Largest `n <= n_max` such that some `n` distinct items are shattered, where
/// `item_patterns[h][i]` is the (binary) outcome of item `i` under classifier `h`.
fn max_shattered(item_patterns: &[Vec<bool>], n_items: usize, n_max: usize) -> Result<usize> {
    let family = item_patterns.len();
    let mut best = 0;
    for n in 1..=n_max.min(n_items) {
        if n >= usize::BITS as usize || (1usize << n) > family {
            break;
        }
        if binomial(n_items as u64, n as u64) > MAX_COMBINATIONS {
            return Err(Error::ResourceLimit(format!("too many {n}-subsets of {n_items} items")));
        }
        let target = 1usize << n;
        let mut seen = vec![false; target];
        let found = any_combination(n_items, n, |idx| {
            seen.iter_mut().for_each(|s| *s = false);
            let mut count = 0;
            for h in item_patterns {
                let code = idx.iter().enumerate().fold(0usize, |acc, (b, &i)| if h[i] { acc | (1 << b) } else { acc });
                if !seen[code] {
                    seen[code] = true;
                    count += 1;
                    if count == target {
                        return true;
                    }
                }
            }
            false
        });
        if !found {
            break;
        }
        best = n;
    }
    Ok(best)
}

/// Exact strategic VC dimension of a finite space, capped at `n_max`.
pub fn svc_finite(space: &FiniteStrategicSpace, n_max: usize) -> Result<usize> {
    let items: Vec<(usize, f64)> =
        (0..space.len()).flat_map(|x| space.preferences.iter().map(move |&r| (x, r))).collect();
    let table: Vec<Vec<bool>> = (0..space.family.len())
        .map(|h| items.iter().map(|&(x, r)| space.best_response(h, x, r) == 1).collect())
        .collect();
    max_shattered(&table, items.len(), n_max)
}

/// Classic VC dimension of the family (no movement).
pub fn vc_finite(space: &FiniteStrategicSpace, n_max: usize) -> Result<usize> {
    svc_finite(&space.with_preferences(vec![0.0]), n_max)
}

/// Exact adversarial VC dimension for the relation "cost at most `budget`",
/// using corrupted classifiers and maximizing over features and labels.
pub fn avc_finite(space: &FiniteStrategicSpace, budget: f64, n_max: usize) -> Result<usize> {
    let items: Vec<(usize, Label)> = (0..space.len()).flat_map(|x| [(x, 1), (x, -1)]).collect();
    // Outcome is "loss incurred"; an ambiguous corrupted label always loses.
    let table: Vec<Vec<bool>> = (0..space.family.len())
        .map(|h| items.iter().map(|&(x, y)| space.corrupted(h, x, budget) != Some(y)).collect())
        .collect();
    max_shattered(&table, items.len(), n_max)
}

/// The space on `[n]` plus its power set where point classifiers over subsets
/// shatter `[n]` strategically while their plain and adversarial VC dimensions
/// stay at one.
pub fn build_power_set_space(n: usize) -> Result<FiniteStrategicSpace> {
    if n == 0 || n > 4 {
        return invalid("the power-set space is built for 1 <= n <= 4");
    }
    let subsets = 1usize << n;
    let m = n + subsets;
    let mut names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    for mask in 0..subsets {
        let members: Vec<String> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| (b + 1).to_string()).collect();
        names.push(format!("{{{}}}", members.join(",")));
    }
    let element = |idx: usize| -> std::result::Result<usize, usize> {
        if idx < n {
            Ok(idx + 1)
        } else {
            Err(idx - n)
        }
    };
    let mut cost = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            cost[a][b] = match (element(a), element(b)) {
                (Ok(x), Ok(z)) => (x + z) as f64,
                (Err(_), Err(_)) => 1.0,
                (Ok(x), Err(s)) | (Err(s), Ok(x)) => {
                    if s >> (x - 1) & 1 == 1 {
                        x as f64
                    } else {
                        x as f64 + 1.0
                    }
                }
            };
        }
    }
    let family: Vec<Vec<Label>> =
        (0..subsets).map(|s| (0..m).map(|idx| if idx == n + s { 1 } else { -1 }).collect()).collect();
    let preferences: Vec<f64> = (1..=n).flat_map(|i| [i as f64, -(i as f64)]).collect();
    FiniteStrategicSpace::new(names, family, cost, preferences)
}

/// Copies of the origin with polygon costs, and one witness per label pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonConstruction {
    pub points: Vec<DataPoint>,
    pub costs: Vec<Seminorm>,
    /// Circle point for each subset, indexed by bitmask.
    pub circle: Vec<Vec<f64>>,
    /// `(pattern, witness)` for every pattern, indexed by bitmask.
    pub witnesses: Vec<(Vec<Label>, Hyperplane)>,
}

impl PolygonConstruction {
    pub fn instance(&self) -> Result<StrategicInstance> {
        StrategicInstance::new(
            2,
            CostModel::InstanceWise { seminorms: self.costs.clone() },
            self.points.clone(),
            InstanceMeta { name: format!("polygon-shattering-{}", self.points.len()), ..Default::default() },
        )
    }
}

/// Shatter `n` copies of the origin (preference +1) with linear classifiers in the plane.
///
/// Subset `k` sits at angle `pi (k + 1/2) / 2^n`, on an open half circle, so
/// the reflected copies never coincide with the originals.
pub fn build_polygon_shattering(n: usize) -> Result<PolygonConstruction> {
    if !(2..=6).contains(&n) {
        return invalid("the polygon construction is built for 2 <= n <= 6");
    }
    let count = 1usize << n;
    let circle: Vec<Vec<f64>> = (0..count)
        .map(|k| {
            let a = std::f64::consts::PI * (k as f64 + 0.5) / count as f64;
            vec![a.cos(), a.sin()]
        })
        .collect();
    let mirrored: Vec<Vec<f64>> = circle.iter().map(|p| scale(p, -1.0)).collect();
    let mut costs = Vec::with_capacity(n);
    for i in 0..n {
        let mut vertices = Vec::new();
        for (k, p) in circle.iter().enumerate() {
            if k >> i & 1 == 1 {
                vertices.push(p.clone());
                vertices.push(scale(p, -1.0));
            }
        }
        costs.push(Seminorm::polytope(vertices)?);
    }
    let points = vec![DataPoint::new(vec![0.0, 0.0], 1, 1.0); n];
    let mut witnesses = Vec::with_capacity(count);
    for k in 0..count {
        let s = &circle[k];
        let best_other = circle
            .iter()
            .chain(&mirrored)
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, p)| dot(s, p))
            .fold(f64::NEG_INFINITY, f64::max);
        let threshold = (1.0 + best_other) / 2.0;
        let pattern = (0..n).map(|i| if k >> i & 1 == 1 { 1 } else { -1 }).collect();
        witnesses.push((pattern, Hyperplane::new(s.clone(), -threshold)));
    }
    Ok(PolygonConstruction { points, costs, circle, witnesses })
}

/// Points shattered under a shared seminorm, with one witness per subset.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisConstruction {
    pub points: Vec<DataPoint>,
    pub seminorm: Seminorm,
    /// Common scale applied to every point.
    pub scale: f64,
    /// `(pattern, witness)` for every subset, indexed by bitmask over the points.
    pub witnesses: Vec<(Vec<Label>, Hyperplane)>,
}

impl BasisConstruction {
    pub fn instance(&self) -> Result<StrategicInstance> {
        StrategicInstance::new(
            self.seminorm.dim(),
            CostModel::Invariant { seminorm: self.seminorm.clone() },
            self.points.clone(),
            InstanceMeta { name: format!("basis-shattering-{}", self.points.len()), ..Default::default() },
        )
    }

    pub fn family(&self) -> Vec<Hyperplane> {
        self.witnesses.iter().map(|(_, h)| h.clone()).collect()
    }
}

/// The origin plus an orthonormal basis of the kernel's complement, scaled so
/// that for every subset a hyperplane separates it no matter how the points move.
/// Preferences cycle through `prefs`.
pub fn build_basis_shattering(l: &Seminorm, prefs: &[f64]) -> Result<BasisConstruction> {
    if prefs.is_empty() || prefs.iter().any(|r| !r.is_finite()) {
        return invalid("need at least one finite preference");
    }
    let d = l.dim();
    let basis = complement_basis(l.kernel(), d);
    let t = basis.len();
    if t + 1 > MAX_EXACT_POINTS {
        return Err(Error::ResourceLimit("too many points to enumerate every subset".into()));
    }
    let mut base_points = vec![vec![0.0; d]];
    base_points.extend(basis.iter().cloned());
    let rs: Vec<f64> = (0..=t).map(|i| prefs[i % prefs.len()]).collect();
    let max_r = rs.iter().fold(0.0f64, |m, r| m.max(r.abs()));

    // Unscaled witnesses: value +1 on members, -1 on the rest.
    let mut raw = Vec::with_capacity(1 << (t + 1));
    for mask in 0..(1usize << (t + 1)) {
        let pattern: Vec<Label> = (0..=t).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
        let b = f64::from(pattern[0]);
        let mut w = vec![0.0; d];
        for (i, q) in basis.iter().enumerate() {
            let c = f64::from(pattern[i + 1]) - b;
            for (wj, qj) in w.iter_mut().zip(q) {
                *wj += c * qj;
            }
        }
        raw.push((pattern, w, b));
    }
    let mut reach: f64 = 0.0;
    for (_, w, _) in &raw {
        let dual = l.dual_value(w)?;
        if dual.is_infinite() {
            return Err(Error::NumericalFailure("witness normal is not orthogonal to the kernel".into()));
        }
        reach = reach.max(max_r * dual);
    }
    let delta = (2.0 * reach).max(1.0);
    let points = base_points.iter().zip(&rs).map(|(x, &r)| DataPoint::new(scale(x, delta), 1, r)).collect();
    let witnesses = raw.into_iter().map(|(p, w, b)| (p, Hyperplane::new(w, delta * b))).collect();
    Ok(BasisConstruction { points, seminorm: l.clone(), scale: delta, witnesses })
}

/// Largest subset (at most 3) of `(feature, preference)` pairs shattered
/// under a separable cost `max(c2(z) - c1(x), 0)`.
pub fn separable_svc_probe(
    c1: &[f64],
    c2: &[f64],
    family: &[Vec<Label>],
    prefs: &[f64],
    trial_budget: usize,
    seed: u64,
) -> Result<SeparableProbeReport> {
    let m = c1.len();
    if c2.len() != m || family.iter().any(|h| h.len() != m) {
        return invalid("cost tables and label tables must cover the same space");
    }
    if c1.iter().zip(c2).any(|(a, b)| b > a) {
        return invalid("separable cost requires c2 <= c1 pointwise");
    }
    if prefs.contains(&0.0) {
        return invalid("preference set must exclude 0");
    }
    let items: Vec<(usize, f64)> = (0..m).flat_map(|x| prefs.iter().map(move |&r| (x, r))).collect();
    let outcome: Vec<Vec<bool>> = family
        .iter()
        .map(|h| items.iter().map(|&(x, r)| separable_best_response_label(h, x, r, c1, c2) == 1).collect())
        .collect();
    let shattered = |idx: &[usize]| -> bool {
        let target = 1usize << idx.len();
        let mut seen = vec![false; target];
        let mut count = 0;
        for h in &outcome {
            let code = idx.iter().enumerate().fold(0usize, |acc, (b, &i)| if h[i] { acc | (1 << b) } else { acc });
            if !seen[code] {
                seen[code] = true;
                count += 1;
            }
        }
        count == target
    };
    let mut best = 0;
    for k in 1..=2 {
        if any_combination(items.len(), k, |idx| shattered(idx)) {
            best = k;
        }
    }
    let total = binomial(items.len() as u64, 3);
    let mut triples_checked = 0u64;
    let mut triple: Option<[usize; 3]> = None;
    if total as usize <= trial_budget {
        any_combination(items.len(), 3, |idx| {
            triples_checked += 1;
            if shattered(idx) {
                triple = Some([idx[0], idx[1], idx[2]]);
                return true;
            }
            false
        });
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trial_budget {
            let mut idx = [0usize; 3];
            loop {
                for v in idx.iter_mut() {
                    *v = rng.gen_range(0..items.len());
                }
                if idx[0] != idx[1] && idx[1] != idx[2] && idx[0] != idx[2] {
                    break;
                }
            }
            triples_checked += 1;
            if shattered(&idx) {
                triple = Some(idx);
                break;
            }
        }
    }
    if triple.is_some() {
        best = 3;
    }
    Ok(SeparableProbeReport {
        max_shattered: best,
        triples_checked,
        exhaustive: total as usize <= trial_budget,
        shattered_triple: triple.map(|t| t.map(|i| items[i])),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableProbeReport {
    pub max_shattered: usize,
    pub triples_checked: u64,
    pub exhaustive: bool,
    pub shattered_triple: Option<[(usize, f64); 3]>,
}

/// Outcome of searching for point sets that beat the `d + 1 - dim(kernel)` bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsifierReport {
    pub trials: usize,
    /// Points per trial.
    pub points: usize,
    /// Trials in which every pattern was realized.
    pub violations: usize,
    /// Most patterns realized in any trial.
    pub max_patterns: usize,
    /// Trials in which the pattern predicted to be missing was indeed missing.
    pub predicted_missing: usize,
    /// Predicted missing pattern from the first trial.
    pub example_missing: Vec<Label>,
}

/// Random point sets of size `d + 2 - dim(kernel)` against a large sampled family.
pub fn falsify_shattering_bound(l: &Seminorm, trials: usize, directions: usize, seed: u64) -> Result<FalsifierReport> {
    let d = l.dim();
    let basis = complement_basis(l.kernel(), d);
    let t = basis.len();
    let m = t + 2;
    if m > MAX_EXACT_POINTS {
        return Err(Error::ResourceLimit("too many points per trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Normals in the complement; the rest only produce the sign-of-preference pattern.
    let dirs: Vec<Vec<f64>> = if t == 0 {
        Vec::new()
    } else {
        sphere_directions(t, directions.max(2))
            .into_iter()
            .map(|c| {
                let mut w = vec![0.0; d];
                for (ci, q) in c.iter().zip(&basis) {
                    for (wj, qj) in w.iter_mut().zip(q) {
                        *wj += ci * qj;
                    }
                }
                w
            })
            .collect()
    };
    let mut report = FalsifierReport {
        trials,
        points: m,
        violations: 0,
        max_patterns: 0,
        predicted_missing: 0,
        example_missing: Vec::new(),
    };
    for trial in 0..trials {
        let xs: Vec<Vec<f64>> = (0..m).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let rs: Vec<f64> = (0..m)
            .map(|_| {
                let v: f64 = rng.gen_range(0.1..2.0);
                if rng.gen_bool(0.5) {
                    v
                } else {
                    -v
                }
            })
            .collect();
        let mut seen = std::collections::BTreeSet::new();
        seen.insert(encode(&rs.iter().map(|&r| if r >= 0.0 { 1 } else { -1 }).collect::<Vec<_>>()));
        for w in &dirs {
            let dual = l.dual_value(w)?;
            let mut cuts: Vec<f64> = xs.iter().zip(&rs).map(|(x, r)| -dot(w, x) - r * dual).collect();
            cuts.sort_by(f64::total_cmp);
            let mut offsets = vec![cuts[0] - 1.0];
            offsets.extend(cuts.iter().copied());
            for b in offsets {
                let pattern: Vec<Label> =
                    cuts_pattern(w, b, dual, &xs, &rs);
                seen.insert(encode(&pattern));
            }
        }
        report.max_patterns = report.max_patterns.max(seen.len());
        if seen.len() == 1 << m {
            report.violations += 1;
        }
        // Predicted missing pattern: sign of a vector orthogonal to every realizable value vector.
        let mut rows = vec![vec![1.0; m]];
        for q in &basis {
            rows.push(xs.iter().map(|x| dot(q, x)).collect());
        }
        if let Some(mut u) = null_vector(&rows, m, 1e-9) {
            if dot(&u, &rs) > 0.0 {
                u = scale(&u, -1.0);
            }
            let missing: Vec<Label> = u.iter().map(|&v| if v >= -1e-12 { 1 } else { -1 }).collect();
            if !seen.contains(&encode(&missing)) {
                report.predicted_missing += 1;
            }
            if trial == 0 {
                report.example_missing = missing;
            }
        }
    }
    Ok(report)
}

fn cuts_pattern(w: &[f64], b: f64, dual: f64, xs: &[Vec<f64>], rs: &[f64]) -> Vec<Label> {
    xs.iter().zip(rs).map(|(x, r)| if dot(w, x) + b >= -r * dual { 1 } else { -1 }).collect()
}
