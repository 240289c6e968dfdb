//! Randomized linear classifiers.
//!
//! An agent facing a mixture moves before the coin is flipped and maximizes
//! `r * P[+1] - cost`. Among equally good moves the one worst for the learner
//! is taken. In the plane with at most three components the optimum is found
//! by enumerating the cells of the line arrangement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Hyperplane, Seminorm};
use crate::linalg::{axpy, dot, solve, sub};
use crate::serm::{serm_bruteforce, sphere_directions};
use crate::strategic::{predict_raw, strategic_loss, CostModel, DataPoint, Label, StrategicInstance};

/// Largest mixture handled by the arrangement enumeration.
pub const MAX_COMPONENTS: usize = 3;
/// Offset `w.z + b` used to step just across a boundary.
const NUDGE: f64 = 1e-6;
const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomizedClassifier {
    pub components: Vec<Hyperplane>,
    pub probs: Vec<f64>,
}

impl RandomizedClassifier {
    pub fn new(components: Vec<Hyperplane>, probs: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return invalid("a mixture needs at least one component");
        }
        if components.len() != probs.len() {
            return invalid("one probability per component is required");
        }
        let d = components[0].dim();
        if components.iter().any(|h| h.dim() != d) {
            return invalid("mixture components must share a dimension");
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return invalid("mixture probabilities must be non-negative and sum to 1");
        }
        Ok(RandomizedClassifier { components, probs })
    }

    pub fn deterministic(h: Hyperplane) -> Self {
        RandomizedClassifier { components: vec![h], probs: vec![1.0] }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }
}

/// Probability that the mixture labels `z` positive.
pub fn positive_probability(mix: &RandomizedClassifier, z: &[f64]) -> Result<f64> {
    if z.len() != mix.dim() {
        return invalid("dimension mismatch between mixture and feature");
    }
    Ok(mix.components.iter().zip(&mix.probs).filter(|(h, _)| predict_raw(h, z) == 1).map(|(_, p)| p).sum())
}

/// An agent's move against a mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandResponse {
    pub z: Vec<f64>,
    pub cost: f64,
    pub positive_probability: f64,
    pub utility: f64,
}

/// A candidate target with its cost and the set of components labeling it positive.
#[derive(Clone, Debug)]
struct Candidate {
    z: Vec<f64>,
    cost: f64,
    positive: u8,
}

fn positive_mask(components: &[Hyperplane], z: &[f64]) -> u8 {
    components.iter().enumerate().fold(0u8, |m, (j, h)| if predict_raw(h, z) == 1 { m | 1 << j } else { m })
}

fn seminorm_candidates(components: &[Hyperplane], x: &[f64], l: &Seminorm) -> Result<Vec<Candidate>> {
    if x.len() != 2 {
        return Err(Error::ResourceLimit("mixture best responses are enumerated in the plane only".into()));
    }
    let lines: Vec<&Hyperplane> = components.iter().filter(|h| !h.is_constant()).collect();
    let mut points = vec![x.to_vec()];
    for h in &lines {
        let dual = l.dual(&h.w)?;
        if !dual.value.is_finite() || dual.value <= 0.0 {
            return invalid("mixture components need normals with a finite, positive dual norm");
        }
        let u = dual.maximizer.ok_or(Error::DegenerateDirection)?;
        let on = axpy(x, -h.value(x) / dual.value, &u);
        let wn2 = dot(&h.w, &h.w);
        points.push(axpy(&on, NUDGE / wn2, &h.w));
        points.push(axpy(&on, -NUDGE / wn2, &h.w));
        points.push(on);
    }
    for a in 0..lines.len() {
        for b in a + 1..lines.len() {
            let (wa, wb) = (&lines[a].w, &lines[b].w);
            if (wa[0] * wb[1] - wa[1] * wb[0]).abs() <= 1e-12 * dot(wa, wa).sqrt() * dot(wb, wb).sqrt() {
                continue;
            }
            let rows = vec![wa.clone(), wb.clone()];
            let Some(corner) = solve(&rows, &[-lines[a].b, -lines[b].b]) else { continue };
            for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                if let Some(dir) = solve(&rows, &[sa * NUDGE, sb * NUDGE]) {
                    points.push(axpy(&corner, 1.0, &dir));
                }
            }
            points.push(corner);
        }
    }
    points
        .into_iter()
        .map(|z| {
            let cost = l.eval(&sub(&z, x))?;
            Ok(Candidate { positive: positive_mask(components, &z), z, cost })
        })
        .collect()
}

fn candidates_for(components: &[Hyperplane], inst: &StrategicInstance, i: usize) -> Result<Vec<Candidate>> {
    let x = &inst.points[i].x;
    match &inst.cost {
        CostModel::Invariant { .. } | CostModel::InstanceWise { .. } => {
            seminorm_candidates(components, x, inst.seminorm_for(i)?)
        }
        CostModel::ZeroCostRegion { space, regions } => Ok(std::iter::once(x)
            .chain(regions[i].iter().map(|&j| &space[j]))
            .map(|z| Candidate { z: z.clone(), cost: 0.0, positive: positive_mask(components, z) })
            .collect()),
        CostModel::Separable { .. } => invalid("mixture best responses need a seminorm or zero-cost-region cost"),
    }
}

fn mask_probability(mask: u8, probs: &[f64]) -> f64 {
    probs.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, p)| p).sum()
}

/// Index of the chosen candidate: best utility, then worst for the learner, then cheapest.
fn choose(cands: &[Candidate], p: &DataPoint, probs: &[f64]) -> (usize, f64, f64) {
    let mut best = 0;
    let mut best_u = f64::NEG_INFINITY;
    let mut best_p = 0.0;
    for (k, c) in cands.iter().enumerate() {
        let pp = mask_probability(c.positive, probs);
        let u = p.r * pp - c.cost;
        let better = if u > best_u + TIE_TOL {
            true
        } else if u >= best_u - TIE_TOL {
            let worse_for_learner = if p.y == 1 { pp < best_p - TIE_TOL } else { pp > best_p + TIE_TOL };
            let same_loss = (pp - best_p).abs() <= TIE_TOL;
            worse_for_learner || (same_loss && c.cost < cands[best].cost)
        } else {
            false
        };
        if better {
            best = k;
            best_u = u;
            best_p = pp;
        }
    }
    (best, best_p, best_u)
}

fn check_mixture(mix: &RandomizedClassifier, inst: &StrategicInstance) -> Result<()> {
    if mix.len() > MAX_COMPONENTS {
        return Err(Error::ResourceLimit(format!("mixtures are limited to {MAX_COMPONENTS} components")));
    }
    if mix.dim() != inst.dim {
        return invalid("dimension mismatch between mixture and instance");
    }
    Ok(())
}

/// Best response of point `i` to the mixture.
pub fn rand_best_response(mix: &RandomizedClassifier, inst: &StrategicInstance, i: usize) -> Result<RandResponse> {
    check_mixture(mix, inst)?;
    let p = inst.points.get(i).ok_or_else(|| Error::InvalidInput(format!("no point {i}")))?;
    let cands = candidates_for(&mix.components, inst, i)?;
    let (k, pp, u) = choose(&cands, p, &mix.probs);
    Ok(RandResponse { z: cands[k].z.clone(), cost: cands[k].cost, positive_probability: pp, utility: u })
}

pub fn rand_responses(mix: &RandomizedClassifier, inst: &StrategicInstance) -> Result<Vec<RandResponse>> {
    (0..inst.len()).map(|i| rand_best_response(mix, inst, i)).collect()
}

fn point_loss(y: Label, positive_probability: f64) -> f64 {
    if y == 1 {
        1.0 - positive_probability
    } else {
        positive_probability
    }
}

/// Expected fraction of misclassified points after every agent best-responds.
pub fn rand_strategic_loss(mix: &RandomizedClassifier, inst: &StrategicInstance) -> Result<f64> {
    if inst.is_empty() {
        return Ok(0.0);
    }
    let responses = rand_responses(mix, inst)?;
    let total: f64 = inst.points.iter().zip(&responses).map(|(p, r)| point_loss(p.y, r.positive_probability)).sum();
    Ok(total / inst.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub best_det: f64,
    pub best_rand: f64,
    pub deterministic: Hyperplane,
    pub mixture: RandomizedClassifier,
    pub agent_responses: Vec<Vec<f64>>,
    /// Component tuples evaluated over the probability grid.
    pub tuples_examined: usize,
}

impl GapReport {
    pub fn gap(&self) -> f64 {
        self.best_det - self.best_rand
    }
}

/// Candidate components: sampled normals with offsets at and between the
/// points where some agent's behavior can change.
fn hyperplane_pool(inst: &StrategicInstance, directions: usize) -> Result<Vec<Hyperplane>> {
    let mut pool = Vec::new();
    for w in sphere_directions(inst.dim, directions) {
        let mut cuts = Vec::new();
        for (i, p) in inst.points.iter().enumerate() {
            match &inst.cost {
                CostModel::ZeroCostRegion { space, regions } => {
                    cuts.push(-dot(&w, &p.x));
                    cuts.extend(regions[i].iter().map(|&j| -dot(&w, &space[j])));
                }
                _ => {
                    let dual = inst.seminorm_for(i)?.dual_value(&w)?;
                    if !dual.is_finite() {
                        continue;
                    }
                    for f in [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0] {
                        cuts.push(-dot(&w, &p.x) - f * p.r * dual);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        if cuts.is_empty() {
            continue;
        }
        let mut offsets = vec![cuts[0] - 1.0, cuts[cuts.len() - 1] + 1.0];
        offsets.extend(cuts.windows(2).map(|c| 0.5 * (c[0] + c[1])));
        offsets.extend(cuts.iter().copied());
        pool.extend(offsets.into_iter().map(|b| Hyperplane::new(w.clone(), b)));
    }
    Ok(pool)
}

fn prob_grid(k: usize) -> Vec<Vec<f64>> {
    match k {
        2 => (1..20).map(|i| vec![i as f64 / 20.0, 1.0 - i as f64 / 20.0]).collect(),
        3 => {
            let mut g = Vec::new();
            for a in 1..10 {
                for b in 1..10 - a {
                    let (pa, pb) = (a as f64 / 10.0, b as f64 / 10.0);
                    g.push(vec![pa, pb, 1.0 - pa - pb]);
                }
            }
            g
        }
        _ => vec![vec![1.0]],
    }
}

/// Best mixture loss over a grid of probabilities for a fixed set of components.
fn best_over_grid(components: &[Hyperplane], inst: &StrategicInstance) -> Result<(f64, Vec<f64>)> {
    let cands: Vec<Vec<Candidate>> = (0..inst.len()).map(|i| candidates_for(components, inst, i)).collect::<Result<_>>()?;
    let mut best = (f64::INFINITY, Vec::new());
    for probs in prob_grid(components.len()) {
        let loss: f64 = inst
            .points
            .iter()
            .zip(&cands)
            .map(|(p, c)| point_loss(p.y, choose(c, p, &probs).1))
            .sum::<f64>()
            / inst.len() as f64;
        if loss < best.0 - 1e-12 {
            best = (loss, probs);
        }
    }
    Ok(best)
}

/// Compare the best deterministic classifier with mixtures of two or three
/// candidate hyperplanes on a probability grid. `budget` bounds both the
/// deterministic direction count and the number of component tuples.
pub fn search_randomization_gap(inst: &StrategicInstance, budget: usize, seed: u64) -> Result<GapReport> {
    if inst.dim != 2 {
        return invalid("the randomization gap search works in the plane");
    }
    if inst.is_empty() {
        return invalid("empty instance");
    }
    let det = serm_bruteforce(inst, budget.clamp(64, 4096))?;
    let pool = hyperplane_pool(inst, 48)?;
    let mut best_det = det.loss;
    let mut deterministic = det.h.clone();
    for h in &pool {
        let loss = strategic_loss(h, inst)?;
        if loss < best_det - 1e-12 {
            best_det = loss;
            deterministic = h.clone();
        }
    }

    let m = pool.len();
    let all_pairs = m * m.saturating_sub(1) / 2;
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    if all_pairs <= budget {
        for a in 0..m {
            for b in a + 1..m {
                tuples.push(vec![a, b]);
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let triples = budget / 4;
        while tuples.len() < budget - triples {
            let (a, b) = (rng.gen_range(0..m), rng.gen_range(0..m));
            if a != b {
                tuples.push(vec![a, b]);
            }
        }
        while tuples.len() < budget {
            let t = [rng.gen_range(0..m), rng.gen_range(0..m), rng.gen_range(0..m)];
            if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                tuples.push(t.to_vec());
            }
        }
    }
    let results: Vec<(f64, Vec<f64>)> = tuples
        .par_iter()
        .map(|t| {
            let comps: Vec<Hyperplane> = t.iter().map(|&j| pool[j].clone()).collect();
            best_over_grid(&comps, inst)
        })
        .collect::<Result<_>>()?;
    let mut best_idx = None;
    let mut best_rand = f64::INFINITY;
    for (k, (loss, _)) in results.iter().enumerate() {
        if *loss < best_rand - 1e-12 {
            best_rand = *loss;
            best_idx = Some(k);
        }
    }
    let mixture = match best_idx {
        Some(k) => RandomizedClassifier::new(tuples[k].iter().map(|&j| pool[j].clone()).collect(), results[k].1.clone())?,
        None => {
            best_rand = best_det;
            RandomizedClassifier::deterministic(deterministic.clone())
        }
    };
    let agent_responses = rand_responses(&mixture, inst)?.into_iter().map(|r| r.z).collect();
    Ok(GapReport { best_det, best_rand, deterministic, mixture, agent_responses, tuples_examined: tuples.len() })
}

/// Bundled search results with a positive randomization gap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    /// Shared l2 cost, every agent with the same preference; a mixture separates perfectly.
    UniformReward,
    /// Free movement within regions, not separable; a mixture still does better.
    ZeroCost,
}

impl std::str::FromStr for Witness {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-reward" => Ok(Witness::UniformReward),
            "zero-cost" => Ok(Witness::ZeroCost),
            _ => invalid(format!("unknown witness {s:?}; expected uniform-reward or zero-cost")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessGenerator {
    pub script: String,
    pub seed: u64,
    pub budget: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub generator: WitnessGenerator,
    pub instance: StrategicInstance,
    pub report: GapReport,
}

/// Load a bundled witness written by the `witness_search` example.
pub fn bundled_witness(which: Witness) -> Result<WitnessFile> {
    let text = match which {
        Witness::UniformReward => include_str!("../data/uniform_reward_gap.json"),
        Witness::ZeroCost => include_str!("../data/zero_cost_gap.json"),
    };
    let file: WitnessFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("bundled witness is malformed: {e}")))?;
    file.instance.validate()?;
    Ok(file)
}

/// A finite zero-cost problem: agents move for free within their regions of a
/// finite sample space; classifiers are label tables over that space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteZeroCostProblem {
    pub labels: Vec<Label>,
    pub preferences: Vec<f64>,
    /// Sample-space index where each agent starts.
    pub home: Vec<usize>,
    /// Sample-space indices each agent can reach for free.
    pub regions: Vec<Vec<usize>>,
    pub family: Vec<Vec<Label>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroCostVerdict {
    NoMixtureSeparates,
    DeterministicAlsoSeparates,
    Counterexample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroCostReport {
    pub verdict: ZeroCostVerdict,
    /// A separating mixture (family indices and probabilities), if any.
    pub separating_mixture: Option<(Vec<usize>, Vec<f64>)>,
    /// A separating family member, if any.
    pub separating_member: Option<usize>,
}

fn finite_mixture_loss(prob: &FiniteZeroCostProblem, support: &[usize], probs: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..prob.labels.len() {
        let cands: Vec<Candidate> = std::iter::once(prob.home[i])
            .chain(prob.regions[i].iter().copied())
            .map(|z| Candidate {
                z: Vec::new(),
                cost: 0.0,
                positive: support.iter().enumerate().fold(0u8, |m, (j, &h)| if prob.family[h][z] == 1 { m | 1 << j } else { m }),
            })
            .collect();
        let p = DataPoint::new(Vec::new(), prob.labels[i], prob.preferences[i]);
        total += point_loss(p.y, choose(&cands, &p, probs).1);
    }
    total
}

/// Search mixtures of up to three family members (probability step 0.05) for
/// zero loss, and check that a single member then also achieves zero loss.
pub fn zero_cost_check_tables(prob: &FiniteZeroCostProblem) -> Result<ZeroCostReport> {
    let n = prob.labels.len();
    if prob.preferences.len() != n || prob.home.len() != n || prob.regions.len() != n {
        return invalid("labels, preferences, homes and regions must have one entry per agent");
    }
    let m = prob.family.first().map_or(0, |h| h.len());
    if prob.family.iter().any(|h| h.len() != m) || prob.home.iter().chain(prob.regions.iter().flatten()).any(|&z| z >= m) {
        return invalid("label tables must cover every sample-space index used");
    }
    let f = prob.family.len();
    let separating_member = (0..f).find(|&h| finite_mixture_loss(prob, &[h], &[1.0]) <= 1e-9);
    let mut grids: Vec<Vec<Vec<f64>>> = vec![Vec::new(), vec![vec![1.0]], Vec::new(), Vec::new()];
    grids[2] = (1..20).map(|i| vec![i as f64 / 20.0, 1.0 - i as f64 / 20.0]).collect();
    for a in 1..20 {
        for b in 1..20 - a {
            grids[3].push(vec![a as f64 / 20.0, b as f64 / 20.0, (20 - a - b) as f64 / 20.0]);
        }
    }
    let mut separating_mixture = None;
    'search: for size in 1..=3.min(f) {
        let mut support: Vec<usize> = (0..size).collect();
        loop {
            for probs in &grids[size] {
                if finite_mixture_loss(prob, &support, probs) <= 1e-9 {
                    separating_mixture = Some((support.clone(), probs.clone()));
                    break 'search;
                }
            }
            let mut i = size;
            while i > 0 && support[i - 1] == f - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            support[i - 1] += 1;
            for j in i..size {
                support[j] = support[j - 1] + 1;
            }
        }
    }
    let verdict = match (&separating_mixture, separating_member) {
        (None, None) => ZeroCostVerdict::NoMixtureSeparates,
        (_, Some(_)) => ZeroCostVerdict::DeterministicAlsoSeparates,
        (Some(_), None) => ZeroCostVerdict::Counterexample,
    };
    Ok(ZeroCostReport { verdict, separating_mixture, separating_member })
}

/// The same check for a zero-cost-region instance and an explicit list of hyperplanes.
pub fn zero_cost_separability_check(inst: &StrategicInstance, family: &[Hyperplane]) -> Result<ZeroCostReport> {
    let CostModel::ZeroCostRegion { space, regions } = &inst.cost else {
        return invalid("zero-cost check needs a zero-cost-region instance");
    };
    let mut sample: Vec<Vec<f64>> = space.clone();
    let home: Vec<usize> = (0..inst.len()).map(|i| space.len() + i).collect();
    sample.extend(inst.points.iter().map(|p| p.x.clone()));
    let tables = family.iter().map(|h| sample.iter().map(|z| predict_raw(h, z)).collect()).collect();
    zero_cost_check_tables(&FiniteZeroCostProblem {
        labels: inst.points.iter().map(|p| p.y).collect(),
        preferences: inst.points.iter().map(|p| p.r).collect(),
        home,
        regions: regions.clone(),
        family: tables,
    })
}

/// A random finite zero-cost problem for falsification runs.
pub fn random_zero_cost_problem(seed: u64, space: usize, agents: usize, family: usize) -> FiniteZeroCostProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tables: Vec<Vec<Label>> =
        (0..family).map(|_| (0..space).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect()).collect();
    // Half the time the labels come from a family member, so separable cases occur.
    let truth = rng.gen_bool(0.5).then(|| rng.gen_range(0..family));
    let mut labels = Vec::new();
    let mut prefs = Vec::new();
    let mut home = Vec::new();
    let mut regions = Vec::new();
    for _ in 0..agents {
        let h = rng.gen_range(0..space);
        let region: Vec<usize> = (0..space).filter(|&z| z != h && rng.gen_bool(0.3)).collect();
        let r: f64 = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(-2.0..2.0) };
        let y = match truth {
            Some(t) => {
                let want = if r > 0.0 { 1 } else { -1 };
                let reach = region.iter().any(|&z| tables[t][z] == want);
                if r != 0.0 && reach && tables[t][h] != want {
                    want
                } else {
                    tables[t][h]
                }
            }
            None => {
                if rng.gen_bool(0.5) {
                    1
                } else {
                    -1
                }
            }
        };
        labels.push(y);
        prefs.push(r);
        home.push(h);
        regions.push(region);
    }
    FiniteZeroCostProblem { labels, preferences: prefs, home, regions, family: tables }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate_instance, GeneratorConfig, PreferenceMode};
    use crate::strategic::{best_response_label, InstanceMeta};
    use proptest::prelude::*;

    fn l2_instance(points: Vec<DataPoint>) -> StrategicInstance {
        StrategicInstance::new(2, CostModel::Invariant { seminorm: Seminorm::l2(2) }, points, InstanceMeta::default()).unwrap()
    }

    fn wedge() -> RandomizedClassifier {
        RandomizedClassifier::new(
            vec![Hyperplane::new(vec![-0.5, 1.0], 0.0), Hyperplane::new(vec![0.5, 1.0], 0.0)],
            vec![0.5, 0.5],
        )
        .unwrap()
    }

    #[test]
    fn validates_probabilities() {
        let h = Hyperplane::new(vec![1.0, 0.0], 0.0);
        assert!(RandomizedClassifier::new(vec![h.clone()], vec![0.9]).is_err());
        assert!(RandomizedClassifier::new(vec![h.clone(), h.clone()], vec![1.5, -0.5]).is_err());
        assert!(RandomizedClassifier::new(vec![], vec![]).is_err());
        assert!(RandomizedClassifier::new(vec![h.clone(), h], vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn positive_probability_examples() {
        let mix = wedge();
        assert_eq!(positive_probability(&mix, &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(positive_probability(&mix, &[0.0, -1.0]).unwrap(), 0.0);
        assert_eq!(positive_probability(&mix, &[2.0, 0.5]).unwrap(), 0.5);
        let one = RandomizedClassifier::deterministic(Hyperplane::new(vec![1.0, 0.0], 0.0));
        assert_eq!(positive_probability(&one, &[-1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn indifferent_agent_stays() {
        let inst = l2_instance(vec![DataPoint::new(vec![0.3, -2.0], -1, 0.0)]);
        let r = rand_best_response(&wedge(), &inst, 0).unwrap();
        assert_eq!(r.z, vec![0.3, -2.0]);
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn wedge_mixture_separates_collinear_points() {
        // Two negatives around one positive on a horizontal line: no single line separates them.
        let inst = l2_instance(vec![
            DataPoint::new(vec![-0.55, -0.95], -1, 1.0),
            DataPoint::new(vec![0.0, -0.95], 1, 1.0),
            DataPoint::new(vec![0.55, -0.95], -1, 1.0),
        ]);
        assert_eq!(rand_strategic_loss(&wedge(), &inst).unwrap(), 0.0);
        let r = rand_best_response(&wedge(), &inst, 1).unwrap();
        assert!((r.cost - 0.95).abs() < 1e-5);
        assert_eq!(r.positive_probability, 1.0);
        for h in &wedge().components {
            assert!(strategic_loss(h, &inst).unwrap() > 0.0);
        }
    }

    #[test]
    fn learner_worst_tie() {
        // Positive point at distance exactly r from the only line: indifferent, so it stays negative.
        let inst = l2_instance(vec![DataPoint::new(vec![-1.0, 0.0], 1, 1.0)]);
        let mix = RandomizedClassifier::deterministic(Hyperplane::new(vec![1.0, 0.0], 0.0));
        assert_eq!(rand_strategic_loss(&mix, &inst).unwrap(), 1.0);
        let neg = l2_instance(vec![DataPoint::new(vec![-1.0, 0.0], -1, 1.0)]);
        assert_eq!(rand_strategic_loss(&mix, &neg).unwrap(), 1.0);
    }

    #[test]
    fn zero_cost_response_maximizes_probability() {
        let space = vec![vec![0.0, 1.0], vec![3.0, 1.0], vec![3.0, -1.0]];
        let inst = StrategicInstance::new(
            2,
            CostModel::ZeroCostRegion { space, regions: vec![vec![0, 1, 2]] },
            vec![DataPoint::new(vec![0.0, -1.0], -1, 1.0)],
            InstanceMeta::default(),
        )
        .unwrap();
        let r = rand_best_response(&wedge(), &inst, 0).unwrap();
        assert_eq!(r.z, vec![0.0, 1.0]);
        assert_eq!(r.positive_probability, 1.0);
    }

    #[test]
    fn rejects_large_mixtures() {
        let h = Hyperplane::new(vec![1.0, 0.0], 0.0);
        let mix = RandomizedClassifier::new(vec![h; 4], vec![0.25; 4]).unwrap();
        let inst = l2_instance(vec![DataPoint::new(vec![0.0, 0.0], 1, 1.0)]);
        assert!(matches!(rand_best_response(&mix, &inst, 0), Err(Error::ResourceLimit(_))));
        let inst3 = StrategicInstance::new(
            3,
            CostModel::Invariant { seminorm: Seminorm::l2(3) },
            vec![DataPoint::new(vec![0.0; 3], 1, 1.0)],
            InstanceMeta::default(),
        )
        .unwrap();
        let one = RandomizedClassifier::deterministic(Hyperplane::new(vec![1.0, 0.0, 0.0], 0.0));
        assert!(matches!(rand_best_response(&one, &inst3, 0), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn single_component_matches_deterministic_rule() {
        for seed in 0..20 {
            let mut cfg = GeneratorConfig::invariant(2, 12, Seminorm::l1(2), PreferenceMode::General);
            cfg.separable = false;
            let inst = generate_instance(&cfg, seed).unwrap();
            let h = Hyperplane::new(vec![0.3 + seed as f64 * 0.1, -1.0], 0.2);
            let mix = RandomizedClassifier::deterministic(h.clone());
            let l = inst.seminorm_for(0).unwrap();
            for (i, p) in inst.points.iter().enumerate() {
                let resp = rand_best_response(&mix, &inst, i).unwrap();
                let det = best_response_label(&h, p, l).unwrap();
                assert_eq!(resp.positive_probability == 1.0, det == 1, "seed {seed} point {i}");
            }
            assert_eq!(rand_strategic_loss(&mix, &inst).unwrap(), strategic_loss(&h, &inst).unwrap());
        }
    }

    #[test]
    fn no_gain_without_preferences() {
        for seed in 0..3 {
            let mut cfg = GeneratorConfig::invariant(2, 8, Seminorm::l2(2), PreferenceMode::General);
            cfg.separable = false;
            cfg.label_noise = 0.3;
            let inst = generate_instance(&cfg, seed).unwrap().with_zero_preferences();
            let rep = search_randomization_gap(&inst, 400, seed).unwrap();
            assert!(rep.gap() <= 1e-12, "{rep:?}");
        }
    }

    #[test]
    fn gap_search_finds_the_wedge() {
        let inst = l2_instance(vec![
            DataPoint::new(vec![-0.55, -0.95], -1, 1.0),
            DataPoint::new(vec![0.0, -0.95], 1, 1.0),
            DataPoint::new(vec![0.55, -0.95], -1, 1.0),
        ]);
        let rep = search_randomization_gap(&inst, 20_000, 0).unwrap();
        assert!((rep.best_det - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(rep.best_rand, 0.0);
        assert_eq!(rand_strategic_loss(&rep.mixture, &inst).unwrap(), 0.0);
        assert_eq!(rep.agent_responses.len(), 3);
    }

    #[test]
    fn bundled_witnesses_reproduce() {
        let u = bundled_witness(Witness::UniformReward).unwrap();
        assert!(u.instance.points.iter().all(|p| p.r == u.instance.points[0].r));
        assert_eq!(rand_strategic_loss(&u.report.mixture, &u.instance).unwrap(), 0.0);
        assert!(u.report.best_det > 0.0);
        let z = bundled_witness(Witness::ZeroCost).unwrap();
        assert!(matches!(z.instance.cost, CostModel::ZeroCostRegion { .. }));
        let loss = rand_strategic_loss(&z.report.mixture, &z.instance).unwrap();
        assert!((loss - z.report.best_rand).abs() < 1e-12);
        assert!(loss < z.report.best_det);
    }

    #[test]
    fn zero_cost_examples() {
        // Member 0 separates; member 1 does not.
        let prob = FiniteZeroCostProblem {
            labels: vec![1, -1],
            preferences: vec![1.0, 1.0],
            home: vec![0, 1],
            regions: vec![vec![2], vec![]],
            family: vec![vec![-1, -1, 1], vec![1, 1, -1]],
        };
        let rep = zero_cost_check_tables(&prob).unwrap();
        assert_eq!(rep.verdict, ZeroCostVerdict::DeterministicAlsoSeparates);
        assert_eq!(rep.separating_member, Some(0));
        // A negative that can always reach a positive feature under every table.
        let hopeless = FiniteZeroCostProblem {
            labels: vec![-1, 1],
            preferences: vec![1.0, 0.0],
            home: vec![0, 1],
            regions: vec![vec![1], vec![]],
            family: vec![vec![-1, 1], vec![1, 1], vec![-1, -1]],
        };
        assert_eq!(zero_cost_check_tables(&hopeless).unwrap().verdict, ZeroCostVerdict::NoMixtureSeparates);
    }

    #[test]
    fn zero_cost_hyperplane_family() {
        let space = vec![vec![2.0, 0.0]];
        let inst = StrategicInstance::new(
            2,
            CostModel::ZeroCostRegion { space, regions: vec![vec![0], vec![]] },
            vec![DataPoint::new(vec![-1.0, 0.0], 1, 1.0), DataPoint::new(vec![0.0, 5.0], -1, 1.0)],
            InstanceMeta::default(),
        )
        .unwrap();
        let family = vec![Hyperplane::new(vec![1.0, -1.0], 0.0), Hyperplane::new(vec![0.0, 1.0], 0.0)];
        let rep = zero_cost_separability_check(&inst, &family).unwrap();
        assert_eq!(rep.verdict, ZeroCostVerdict::DeterministicAlsoSeparates);
        assert_eq!(rep.separating_member, Some(0));
    }

    #[test]
    fn random_zero_cost_problems_never_contradict() {
        for seed in 0..200 {
            let prob = random_zero_cost_problem(seed, 6, 4, 6);
            let rep = zero_cost_check_tables(&prob).unwrap();
            assert_ne!(rep.verdict, ZeroCostVerdict::Counterexample, "seed {seed}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn agents_do_not_gain_by_keeping_old_moves(
            a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0,
            p in 0.05f64..0.95, q in 0.05f64..0.95,
            x in -2.0f64..2.0, y in -2.0f64..2.0, r in -2.0f64..2.0,
        ) {
            let comps = vec![Hyperplane::new(vec![a, 1.0], b), Hyperplane::new(vec![1.0, c], d)];
            let inst = l2_instance(vec![DataPoint::new(vec![x, y], 1, r)]);
            let old = RandomizedClassifier::new(comps.clone(), vec![p, 1.0 - p]).unwrap();
            let new = RandomizedClassifier::new(comps, vec![q, 1.0 - q]).unwrap();
            let kept = rand_best_response(&old, &inst, 0).unwrap();
            let fresh = rand_best_response(&new, &inst, 0).unwrap();
            let kept_utility = r * positive_probability(&new, &kept.z).unwrap() - kept.cost;
            prop_assert!(fresh.utility >= kept_utility - 1e-9);
            // Loss with the old move is affine in the probabilities.
            let at = |t: f64| {
                let m = RandomizedClassifier::new(old.components.clone(), vec![t, 1.0 - t]).unwrap();
                point_loss(1, positive_probability(&m, &kept.z).unwrap())
            };
            prop_assert!((at(0.5) - 0.5 * (at(0.0) + at(1.0))).abs() < 1e-12);
        }
    }
}
