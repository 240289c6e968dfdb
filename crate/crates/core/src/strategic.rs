//! Data points, cost models, agent best responses and the strategic 0-1 loss.
//!
//! An agent at `x` with preference `r` for label +1 moves to the `z` that
//! maximizes `r * I(h(z) = +1) - c(z; x)`. Under a seminorm cost the outcome
//! only depends on the signed distance `s = (w.x + b) / l*(w)`: the agent
//! ends up positive iff `s >= -r`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Hyperplane, Seminorm, DEFAULT_ETA};
use crate::linalg::{axpy, dot};

/// A label in {-1, +1}.
pub type Label = i8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub x: Vec<f64>,
    pub y: Label,
    /// Reward for being labeled +1 (the reward for -1 is normalized to 0).
    pub r: f64,
}

impl DataPoint {
    pub fn new(x: Vec<f64>, y: Label, r: f64) -> Self {
        DataPoint { x, y, r }
    }
}

/// How much it costs each agent to move.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CostModel {
    /// One seminorm shared by all points.
    Invariant { seminorm: Seminorm },
    /// One seminorm per point, in point order.
    InstanceWise { seminorms: Vec<Seminorm> },
    /// `c(z; x) = max(c2(z) - c1(x), 0)` over a finite sample space.
    Separable { space: Vec<Vec<f64>>, c1: Vec<f64>, c2: Vec<f64> },
    /// Point `i` may move for free to any `space[j]` with `j` in `regions[i]`.
    ZeroCostRegion { space: Vec<Vec<f64>>, regions: Vec<Vec<usize>> },
}

impl CostModel {
    pub fn is_seminorm(&self) -> bool {
        matches!(self, CostModel::Invariant { .. } | CostModel::InstanceWise { .. })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Human-readable description of the preference set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preference_set: Option<String>,
    /// Hyperplane the generator used to place the points, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Hyperplane>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategicInstance {
    pub dim: usize,
    pub cost: CostModel,
    pub points: Vec<DataPoint>,
    #[serde(default)]
    pub meta: InstanceMeta,
}

impl StrategicInstance {
    pub fn new(dim: usize, cost: CostModel, points: Vec<DataPoint>, meta: InstanceMeta) -> Result<Self> {
        let inst = StrategicInstance { dim, cost, points, meta };
        inst.validate()?;
        Ok(inst)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks shapes, labels and cost-model consistency.
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            if p.x.len() != self.dim {
                return invalid(format!("point {i} has dimension {}, expected {}", p.x.len(), self.dim));
            }
            if p.y != 1 && p.y != -1 {
                return invalid(format!("point {i} has label {}, expected +1 or -1", p.y));
            }
            if !p.r.is_finite() || p.x.iter().any(|v| !v.is_finite()) {
                return invalid(format!("point {i} has a non-finite coordinate or preference"));
            }
        }
        match &self.cost {
            CostModel::Invariant { seminorm } => {
                if seminorm.dim() != self.dim {
                    return invalid("seminorm dimension differs from instance dimension");
                }
            }
            CostModel::InstanceWise { seminorms } => {
                if seminorms.len() != self.points.len() {
                    return invalid("instance-wise cost needs one seminorm per point");
                }
                if seminorms.iter().any(|s| s.dim() != self.dim) {
                    return invalid("seminorm dimension differs from instance dimension");
                }
            }
            CostModel::Separable { space, c1, c2 } => {
                if c1.len() != space.len() || c2.len() != space.len() {
                    return invalid("separable cost tables must match the sample space size");
                }
                if space.iter().any(|z| z.len() != self.dim) {
                    return invalid("sample space element has the wrong dimension");
                }
                if c1.iter().zip(c2).any(|(a, b)| b > a) {
                    return invalid("separable cost requires c2(x) <= c1(x) everywhere");
                }
                for (i, p) in self.points.iter().enumerate() {
                    if space_index(space, &p.x).is_none() {
                        return invalid(format!("point {i} is not an element of the sample space"));
                    }
                }
            }
            CostModel::ZeroCostRegion { space, regions } => {
                if regions.len() != self.points.len() {
                    return invalid("zero-cost model needs one region per point");
                }
                if space.iter().any(|z| z.len() != self.dim) {
                    return invalid("sample space element has the wrong dimension");
                }
                if regions.iter().flatten().any(|&j| j >= space.len()) {
                    return invalid("region index outside the sample space");
                }
            }
        }
        Ok(())
    }

    /// Seminorm governing point `i`.
    pub fn seminorm_for(&self, i: usize) -> Result<&Seminorm> {
        match &self.cost {
            CostModel::Invariant { seminorm } => Ok(seminorm),
            CostModel::InstanceWise { seminorms } => {
                seminorms.get(i).ok_or_else(|| Error::InvalidInput(format!("no seminorm for point {i}")))
            }
            _ => invalid("cost model is not induced by a seminorm"),
        }
    }

    /// Copy with every preference set to zero.
    pub fn with_zero_preferences(&self) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            p.r = 0.0;
        }
        out
    }
}

pub(crate) fn space_index(space: &[Vec<f64>], x: &[f64]) -> Option<usize> {
    space.iter().position(|z| z.as_slice() == x)
}

/// +1 iff `w.x + b >= 0` (boundary is positive).
pub fn predict_raw(h: &Hyperplane, x: &[f64]) -> Label {
    predict_raw_eta(h, x, DEFAULT_ETA)
}

pub fn predict_raw_eta(h: &Hyperplane, x: &[f64], eta: f64) -> Label {
    if h.value(x) >= -eta {
        1
    } else {
        -1
    }
}

fn sign_label(r: f64) -> Option<Label> {
    if r > 0.0 {
        Some(1)
    } else if r < 0.0 {
        Some(-1)
    } else {
        None
    }
}

/// `(w.x + b) / l*(w)`; infinite duals give `None`.
pub fn signed_distance(h: &Hyperplane, x: &[f64], l: &Seminorm) -> Result<Option<f64>> {
    let dual = l.dual_value(&h.w)?;
    if dual.is_infinite() {
        return Ok(None);
    }
    if dual <= 0.0 {
        return Err(Error::DegenerateDirection);
    }
    Ok(Some(h.value(x) / dual))
}

/// Label the classifier assigns after the agent best-responds.
pub fn best_response_label(h: &Hyperplane, p: &DataPoint, l: &Seminorm) -> Result<Label> {
    best_response_label_eta(h, p, l, DEFAULT_ETA)
}

pub fn best_response_label_eta(h: &Hyperplane, p: &DataPoint, l: &Seminorm, eta: f64) -> Result<Label> {
    if h.w.len() != p.x.len() || l.dim() != p.x.len() {
        return invalid("dimension mismatch between classifier, point and cost");
    }
    if h.is_constant() {
        return Ok(predict_raw_eta(h, &p.x, eta));
    }
    let dual = l.dual_value(&h.w)?;
    if dual.is_infinite() {
        return Ok(sign_label(p.r).unwrap_or_else(|| predict_raw_eta(h, &p.x, eta)));
    }
    if dual <= 0.0 {
        return Err(Error::DegenerateDirection);
    }
    let s = h.value(&p.x) / dual;
    Ok(if s >= -p.r - eta { 1 } else { -1 })
}

/// A cheapest feature the agent can move to that realizes its best-response label.
pub fn best_response_point(h: &Hyperplane, p: &DataPoint, l: &Seminorm) -> Result<Vec<f64>> {
    best_response_point_eta(h, p, l, DEFAULT_ETA)
}

pub fn best_response_point_eta(h: &Hyperplane, p: &DataPoint, l: &Seminorm, eta: f64) -> Result<Vec<f64>> {
    let raw = predict_raw_eta(h, &p.x, eta);
    let label = best_response_label_eta(h, p, l, eta)?;
    if label == raw {
        return Ok(p.x.clone());
    }
    let wn2 = dot(&h.w, &h.w);
    // Final value of w.z + b: just inside the target side.
    let target = if label == 1 { eta } else { -2.0 * eta };
    let dual = l.dual(&h.w)?;
    let v = h.value(&p.x);
    if dual.value.is_infinite() {
        // Slide along the kernel component of w, which is free.
        let mut k = vec![0.0; h.w.len()];
        for q in l.kernel() {
            k = axpy(&k, dot(q, &h.w), q);
        }
        let t = (target - v) / dot(&k, &h.w);
        return Ok(axpy(&p.x, t, &k));
    }
    let u = dual.maximizer.ok_or(Error::DegenerateDirection)?;
    // Moving along u by t changes w.x + b by t * l*(w).
    let t = -v / dual.value;
    let z = axpy(&p.x, t, &u);
    Ok(axpy(&z, target / wn2, &h.w))
}

/// Utility `r * I(label +1) - cost` of ending at `z`.
pub fn utility(h: &Hyperplane, p: &DataPoint, l: &Seminorm, z: &[f64]) -> Result<f64> {
    let cost = l.eval(&crate::linalg::sub(z, &p.x))?;
    let pos = if predict_raw(h, z) == 1 { 1.0 } else { 0.0 };
    Ok(p.r * pos - cost)
}

/// Best-response labels of every point, for any cost model.
pub fn strategic_labels(h: &Hyperplane, inst: &StrategicInstance) -> Result<Vec<Label>> {
    strategic_labels_eta(h, inst, DEFAULT_ETA)
}

pub fn strategic_labels_eta(h: &Hyperplane, inst: &StrategicInstance, eta: f64) -> Result<Vec<Label>> {
    if h.dim() != inst.dim {
        return invalid("classifier dimension differs from instance dimension");
    }
    match &inst.cost {
        CostModel::Invariant { .. } | CostModel::InstanceWise { .. } => inst
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| best_response_label_eta(h, p, inst.seminorm_for(i)?, eta))
            .collect(),
        CostModel::Separable { space, c1, c2 } => {
            let table: Vec<Label> = space.iter().map(|z| predict_raw_eta(h, z, eta)).collect();
            inst.points
                .iter()
                .map(|p| {
                    let xi = space_index(space, &p.x).ok_or_else(|| Error::InvalidInput("point outside space".into()))?;
                    Ok(separable_best_response_label(&table, xi, p.r, c1, c2))
                })
                .collect()
        }
        CostModel::ZeroCostRegion { space, regions } => Ok(inst
            .points
            .iter()
            .zip(regions)
            .map(|(p, region)| {
                let here = predict_raw_eta(h, &p.x, eta);
                match sign_label(p.r) {
                    None => here,
                    Some(want) => {
                        if here == want || region.iter().any(|&j| predict_raw_eta(h, &space[j], eta) == want) {
                            want
                        } else {
                            here
                        }
                    }
                }
            })
            .collect()),
    }
}

/// Fraction of points whose best-response label differs from the true label.
pub fn strategic_loss(h: &Hyperplane, inst: &StrategicInstance) -> Result<f64> {
    strategic_loss_eta(h, inst, DEFAULT_ETA)
}

pub fn strategic_loss_eta(h: &Hyperplane, inst: &StrategicInstance, eta: f64) -> Result<f64> {
    if inst.is_empty() {
        return invalid("strategic loss of an empty instance");
    }
    let labels = strategic_labels_eta(h, inst, eta)?;
    let wrong = labels.iter().zip(&inst.points).filter(|(l, p)| **l != p.y).count();
    Ok(wrong as f64 / inst.len() as f64)
}

/// Plain 0-1 loss with no movement.
pub fn raw_loss(h: &Hyperplane, inst: &StrategicInstance) -> Result<f64> {
    if inst.is_empty() {
        return invalid("loss of an empty instance");
    }
    let wrong = inst.points.iter().filter(|p| predict_raw(h, &p.x) != p.y).count();
    Ok(wrong as f64 / inst.len() as f64)
}

/// Best response under a separable cost over a finite space.
///
/// `h` is the classifier's label table over the space. If the agent already
/// has its preferred label it keeps it; otherwise it switches iff some `z`
/// with `c2(z) <= c1(x) + |r|` carries the preferred label.
pub fn separable_best_response_label(h: &[Label], x: usize, r: f64, c1: &[f64], c2: &[f64]) -> Label {
    let here = h[x];
    let Some(want) = sign_label(r) else { return here };
    if here == want {
        return here;
    }
    let budget = c1[x] + r.abs();
    if (0..h.len()).any(|z| h[z] == want && c2[z] <= budget) {
        want
    } else {
        here
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Adversarial,
    EssentiallyAdversarial,
    General,
}

/// Regime tag plus the statistics it is decided from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreferenceRegime {
    pub regime: Regime,
    /// Smallest preference among negative points (+inf if there are none).
    pub min_neg: f64,
    /// Largest preference among positive points (-inf if there are none).
    pub max_pos: f64,
}

impl PreferenceRegime {
    pub fn is_essentially_adversarial(&self) -> bool {
        self.regime != Regime::General
    }
}

pub fn classify_regime(inst: &StrategicInstance) -> PreferenceRegime {
    let min_neg = inst.points.iter().filter(|p| p.y == -1).map(|p| p.r).fold(f64::INFINITY, f64::min);
    let max_pos = inst.points.iter().filter(|p| p.y == 1).map(|p| p.r).fold(f64::NEG_INFINITY, f64::max);
    let regime = if min_neg >= 0.0 && max_pos <= 0.0 {
        Regime::Adversarial
    } else if min_neg >= max_pos {
        Regime::EssentiallyAdversarial
    } else {
        Regime::General
    };
    PreferenceRegime { regime, min_neg, max_pos }
}

/// One row of the per-point best-response audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub index: usize,
    pub raw_label: Label,
    pub br_label: Label,
    pub signed_distance: f64,
    pub moved: bool,
    pub cost_spent: f64,
}

pub fn audit(h: &Hyperplane, inst: &StrategicInstance) -> Result<Vec<AuditRow>> {
    let labels = strategic_labels(h, inst)?;
    let mut rows = Vec::with_capacity(inst.len());
    for (i, (p, &br)) in inst.points.iter().zip(&labels).enumerate() {
        let raw = predict_raw(h, &p.x);
        let (signed, cost) = match &inst.cost {
            CostModel::Invariant { .. } | CostModel::InstanceWise { .. } => {
                let l = inst.seminorm_for(i)?;
                let signed = if h.is_constant() {
                    h.value(&p.x)
                } else {
                    signed_distance(h, &p.x, l)?.unwrap_or(if p.r >= 0.0 { f64::MAX } else { f64::MIN })
                };
                let z = if h.is_constant() { p.x.clone() } else { best_response_point(h, p, l)? };
                (signed, l.eval(&crate::linalg::sub(&z, &p.x))?)
            }
            CostModel::Separable { space, c1, c2 } => {
                let cost = if br != raw {
                    let xi = space_index(space, &p.x).expect("validated");
                    space
                        .iter()
                        .enumerate()
                        .filter(|(_, z)| predict_raw(h, z) == br)
                        .map(|(j, _)| (c2[j] - c1[xi]).max(0.0))
                        .fold(f64::INFINITY, f64::min)
                } else {
                    0.0
                };
                (h.value(&p.x), cost)
            }
            CostModel::ZeroCostRegion { .. } => (h.value(&p.x), 0.0),
        };
        rows.push(AuditRow { index: i, raw_label: raw, br_label: br, signed_distance: signed, moved: br != raw, cost_spent: cost });
    }
    Ok(rows)
}
