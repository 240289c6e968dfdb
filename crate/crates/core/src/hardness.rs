//! Reduction from the partition problem to strategic ERM.
//!
//! Builds the hard instances for the two intractable situations (invariant
//! cost with general preferences, instance-wise cost with essentially
//! adversarial preferences), checks Yes certificates, and provides exact
//! oracles for small inputs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{invalid, Error, Result};
use crate::geometry::{Hyperplane, Seminorm};
use crate::linalg::{dot, unit};
use crate::strategic::{strategic_loss, CostModel, DataPoint, InstanceMeta, StrategicInstance};

pub const DEFAULT_SLACK: f64 = 0.25;
/// Largest input handled by the meet-in-the-middle partition solver.
pub const MAX_PARTITION_LEN: usize = 24;
/// Largest input handled by the sign-pattern oracle.
pub const MAX_EXACT_DIM: usize = 12;
const TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionInput {
    pub values: Vec<u64>,
    pub slack: f64,
}

impl PartitionInput {
    pub fn new(values: Vec<u64>, slack: f64) -> Result<Self> {
        if values.is_empty() {
            return invalid("partition input needs at least one value");
        }
        if values.contains(&0) {
            return invalid("partition values must be positive");
        }
        if !(slack > 0.0 && slack < 1.0) {
            return invalid("slack must lie in (0, 1)");
        }
        Ok(PartitionInput { values, slack })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }
}

/// Which intractable setting the reduction targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    /// Shared l2 cost, general preferences.
    Invariant,
    /// Per-point scaled l2 costs, essentially adversarial preferences (for slack <= 1/2).
    InstanceWise,
}

impl Setting {
    pub fn name(self) -> &'static str {
        match self {
            Setting::Invariant => "invariant",
            Setting::InstanceWise => "instance-wise",
        }
    }
}

impl std::str::FromStr for Setting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "invariant" => Ok(Setting::Invariant),
            "instance-wise" => Ok(Setting::InstanceWise),
            _ => invalid(format!("unknown reduction setting {s:?}; expected invariant or instance-wise")),
        }
    }
}

/// `2d + 3` points: two on each axis, then the value vector and two multiples.
pub fn generate_partition_instance(pin: &PartitionInput, setting: Setting) -> Result<StrategicInstance> {
    let d = pin.dim();
    let root = (d as f64).sqrt();
    let eps = pin.slack;
    let c: Vec<f64> = pin.values.iter().map(|&v| v as f64).collect();
    let mut points = Vec::with_capacity(2 * d + 3);
    for i in 0..d {
        points.push(DataPoint::new(scale_unit(d, i, 2.0 * root), 1, 4.0));
        points.push(DataPoint::new(scale_unit(d, i, root), -1, 1.0 - eps));
    }
    points.push(DataPoint::new(c.clone(), 1, 2.0));
    points.push(DataPoint::new(c.iter().map(|v| 2.0 * v).collect(), -1, 2.0 - eps));
    points.push(DataPoint::new(c.iter().map(|v| 3.0 * v).collect(), 1, 2.0));

    let cost = match setting {
        Setting::Invariant => CostModel::Invariant { seminorm: Seminorm::l2(d) },
        Setting::InstanceWise => {
            // Positive points keep the same threshold r / k with a smaller preference.
            let mut seminorms = Vec::with_capacity(points.len());
            for p in points.iter_mut() {
                let k = if p.y == 1 {
                    let k = if p.r == 4.0 { 0.125 } else { 0.25 };
                    p.r *= k;
                    k
                } else {
                    1.0
                };
                seminorms.push(Seminorm::scaled_l2(d, k)?);
            }
            CostModel::InstanceWise { seminorms }
        }
    };
    let mut meta = InstanceMeta {
        name: format!("partition-reduction-{}", setting.name()),
        ..Default::default()
    };
    meta.extra.insert("partition_values".into(), json!(pin.values));
    meta.extra.insert("slack".into(), json!(eps));
    meta.extra.insert("setting".into(), json!(setting.name()));
    StrategicInstance::new(d, cost, points, meta)
}

fn scale_unit(d: usize, i: usize, s: f64) -> Vec<f64> {
    let mut v = unit(d, i);
    v[i] = s;
    v
}

/// Values, slack and setting read back from a reduction instance, after
/// checking that regenerating from them reproduces the instance exactly.
fn recover(inst: &StrategicInstance) -> Result<(PartitionInput, Setting)> {
    let d = inst.dim;
    if inst.len() != 2 * d + 3 {
        return invalid("not a partition reduction instance: wrong point count");
    }
    let c = &inst.points[2 * d].x;
    let mut values = Vec::with_capacity(d);
    for &v in c {
        if !(v >= 1.0 && v.fract() == 0.0 && v < 2f64.powi(53)) {
            return invalid("not a partition reduction instance: value vector is not positive integers");
        }
        values.push(v as u64);
    }
    let neg_r = inst.points[1].r;
    let slack = match inst.meta.extra.get("slack").and_then(|v| v.as_f64()) {
        Some(s) if 1.0 - s == neg_r => s,
        _ => 1.0 - neg_r,
    };
    let setting = match inst.cost {
        CostModel::Invariant { .. } => Setting::Invariant,
        CostModel::InstanceWise { .. } => Setting::InstanceWise,
        _ => return invalid("not a partition reduction instance: unexpected cost model"),
    };
    let pin = PartitionInput::new(values, slack)?;
    let again = generate_partition_instance(&pin, setting)?;
    if again.points != inst.points || again.cost != inst.cost {
        return invalid("not a partition reduction instance: layout differs from the construction");
    }
    Ok((pin, setting))
}

/// Movement threshold `r * l*(w)` for a unit-l2 normal: the preference over the cost scale.
fn unit_thresholds(inst: &StrategicInstance) -> Result<Vec<f64>> {
    let probe = unit(inst.dim, 0);
    (0..inst.len())
        .map(|i| {
            let k = inst.seminorm_for(i)?.eval(&probe)?;
            Ok(inst.points[i].r / k)
        })
        .collect()
}

/// Largest violation of the relaxed separation constraints by `(w, b)`, taking
/// each point's threshold at `||w||_2 = 1`.
pub fn reduction_violation(inst: &StrategicInstance, w: &[f64], b: f64, slack: f64) -> Result<f64> {
    let theta = unit_thresholds(inst)?;
    let mut worst: f64 = 0.0;
    for (p, t) in inst.points.iter().zip(theta) {
        let v = dot(w, &p.x) + b;
        let gap = if p.y == 1 { -t - v } else { v - (-t - slack) };
        worst = worst.max(gap);
    }
    Ok(worst)
}

fn certificate_normal(d: usize, subset: &[usize]) -> Vec<f64> {
    let root = (d as f64).sqrt();
    (0..d).map(|i| if subset.contains(&i) { 1.0 / root } else { -1.0 / root }).collect()
}

/// True iff `subset` (0-based) balances the values and the matching unit
/// normal with offset -2 separates the instance strategically.
pub fn verify_yes_certificate(inst: &StrategicInstance, subset: &[usize]) -> Result<bool> {
    let (pin, _) = recover(inst)?;
    let d = pin.dim();
    if subset.iter().any(|&i| i >= d) {
        return invalid("subset index outside the value list");
    }
    let inside: u64 = (0..d).filter(|i| subset.contains(i)).map(|i| pin.values[i]).sum();
    if 2 * inside != pin.total() {
        return Ok(false);
    }
    let w = certificate_normal(d, subset);
    let h = Hyperplane::new(w.clone(), -2.0);
    let unit_norm = (dot(&w, &w).sqrt() - 1.0).abs() <= TOL;
    Ok(unit_norm && reduction_violation(inst, &w, -2.0, pin.slack)? <= TOL && strategic_loss(&h, inst)? == 0.0)
}

/// Meet-in-the-middle subset sum; returns 0-based indices of a balanced subset.
pub fn solve_partition_exact(pin: &PartitionInput) -> Result<Option<Vec<usize>>> {
    let d = pin.dim();
    if d > MAX_PARTITION_LEN {
        return Err(Error::ResourceLimit(format!("partition solver handles at most {MAX_PARTITION_LEN} values")));
    }
    let total = pin.total();
    if total % 2 == 1 {
        return Ok(None);
    }
    let target = total / 2;
    let half = d / 2;
    let (left, right) = pin.values.split_at(half);
    let sums = |vals: &[u64]| -> Vec<(u64, u32)> {
        (0u32..1 << vals.len())
            .map(|mask| {
                let s = vals.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| *v).sum();
                (s, mask)
            })
            .collect()
    };
    let mut right_sums: HashMap<u64, u32> = HashMap::new();
    for (s, mask) in sums(right) {
        right_sums.entry(s).or_insert(mask);
    }
    let mut best: Option<(u32, u32)> = None;
    for (s, lmask) in sums(left) {
        if s > target {
            continue;
        }
        if let Some(&rmask) = right_sums.get(&(target - s)) {
            let key = (lmask, rmask);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    Ok(best.map(|(lmask, rmask)| {
        let mut subset: Vec<usize> = (0..half).filter(|i| lmask >> i & 1 == 1).collect();
        subset.extend((0..d - half).filter(|i| rmask >> i & 1 == 1).map(|i| i + half));
        subset
    }))
}

/// Optimum of "maximize `||w||^2` subject to the relaxed separation constraints and `||w|| <= 1`".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionOptimum {
    pub value: f64,
    pub w: Vec<f64>,
    pub b: f64,
}

/// Exact optimum for reduction instances with at most 12 values.
///
/// The value-vector triple forces `c . w = 0` and `b = -2`; the axis points
/// then box each coordinate to `[-1/sqrt(d), 1/sqrt(d)]`. Maximizing a convex
/// function over the box cut by a hyperplane is attained at a vertex, so it
/// suffices to enumerate sign patterns with at most one free coordinate.
pub fn reduction_optimum_exact(inst: &StrategicInstance) -> Result<ReductionOptimum> {
    let (pin, _) = recover(inst)?;
    let d = pin.dim();
    if d > MAX_EXACT_DIM {
        return Err(Error::ResourceLimit(format!("sign enumeration handles at most {MAX_EXACT_DIM} values")));
    }
    let theta = unit_thresholds(inst)?;
    let n = inst.len();
    let (t1, t2, t3) = (theta[n - 3], theta[n - 2], theta[n - 1]);
    // Multiples (1, 2, 3) of c with labels (+, -, +): t2 + slack == t1 == t3 pins c.w to 0 and b to -t1.
    if (t1 - t3).abs() > TOL || (t2 + pin.slack - t1).abs() > TOL {
        return Err(Error::NumericalFailure("value-vector thresholds do not force the offset".into()));
    }
    let b = -t1;
    let root = (d as f64).sqrt();
    let c: Vec<f64> = pin.values.iter().map(|&v| v as f64).collect();
    let mut best = ReductionOptimum { value: 0.0, w: vec![0.0; d], b };
    let mut consider = |w: Vec<f64>| -> Result<()> {
        let value = dot(&w, &w);
        if value > best.value + 1e-12 && value <= 1.0 + TOL && reduction_violation(inst, &w, b, pin.slack)? <= TOL {
            best = ReductionOptimum { value, w, b };
        }
        Ok(())
    };
    for mask in 0u32..1 << d {
        let signs: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { 1.0 / root } else { -1.0 / root }).collect();
        if dot(&c, &signs).abs() <= TOL {
            consider(signs.clone())?;
        }
        for free in 0..d {
            let rest: f64 = (0..d).filter(|&i| i != free).map(|i| c[i] * signs[i]).sum();
            let wf = -rest / c[free];
            if wf.abs() <= 1.0 / root + TOL {
                let mut w = signs.clone();
                w[free] = wf;
                consider(w)?;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::serm::{serm_instancewise_adversarial, serm_invariant_essentially_adversarial};
    use crate::strategic::{classify_regime, Regime};
    use proptest::prelude::*;

    fn pin(values: &[u64]) -> PartitionInput {
        PartitionInput::new(values.to_vec(), DEFAULT_SLACK).unwrap()
    }

    #[test]
    fn layout() {
        let inst = generate_partition_instance(&pin(&[1, 1, 2]), Setting::Invariant).unwrap();
        assert_eq!(inst.len(), 9);
        let tail: Vec<(i8, f64)> = inst.points[6..].iter().map(|p| (p.y, p.r)).collect();
        assert_eq!(tail, vec![(1, 2.0), (-1, 1.75), (1, 2.0)]);
        assert_eq!(inst.points[8].x, vec![3.0, 3.0, 6.0]);
        assert_eq!(inst.points[0].x, vec![2.0 * 3f64.sqrt(), 0.0, 0.0]);
        assert_eq!(classify_regime(&inst).regime, Regime::General);

        let inst2 = generate_partition_instance(&pin(&[1, 1, 2]), Setting::InstanceWise).unwrap();
        assert!(inst2.points.iter().filter(|p| p.y == 1).all(|p| p.r == 0.5));
        assert_eq!(classify_regime(&inst2).regime, Regime::EssentiallyAdversarial);
    }

    #[test]
    fn large_slack_leaves_the_essentially_adversarial_regime() {
        let p = PartitionInput::new(vec![1, 1], 0.75).unwrap();
        let inst = generate_partition_instance(&p, Setting::InstanceWise).unwrap();
        assert_eq!(classify_regime(&inst).regime, Regime::General);
    }

    #[test]
    fn polynomial_solvers_refuse_the_reductions() {
        let p = pin(&[1, 1, 2]);
        let one = generate_partition_instance(&p, Setting::Invariant).unwrap();
        let two = generate_partition_instance(&p, Setting::InstanceWise).unwrap();
        assert!(matches!(serm_invariant_essentially_adversarial(&one), Err(Error::RegimeViolation(_))));
        assert!(matches!(serm_instancewise_adversarial(&two, 1e-6), Err(Error::RegimeViolation(_))));
    }

    #[test]
    fn settings_share_thresholds() {
        let p = pin(&[3, 1, 4, 1, 5]);
        let one = generate_partition_instance(&p, Setting::Invariant).unwrap();
        let two = generate_partition_instance(&p, Setting::InstanceWise).unwrap();
        let (a, b) = (unit_thresholds(&one).unwrap(), unit_thresholds(&two).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9);
        }
        for (p1, p2) in one.points.iter().zip(&two.points) {
            assert_eq!((&p1.x, p1.y), (&p2.x, p2.y));
        }
    }

    #[test]
    fn certificate_examples() {
        for setting in [Setting::Invariant, Setting::InstanceWise] {
            let inst = generate_partition_instance(&pin(&[1, 1, 2]), setting).unwrap();
            assert!(verify_yes_certificate(&inst, &[2]).unwrap());
            assert!(verify_yes_certificate(&inst, &[0, 1]).unwrap());
            assert!(!verify_yes_certificate(&inst, &[0]).unwrap());
            let odd = generate_partition_instance(&pin(&[1, 1, 3]), setting).unwrap();
            for mask in 0..8usize {
                let s: Vec<usize> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
                assert!(!verify_yes_certificate(&odd, &s).unwrap());
            }
        }
    }

    #[test]
    fn certificate_constraints_by_hand() {
        // Values (1, 1, 2), subset {third}: normal (-1, -1, 1)/sqrt(3), offset -2.
        let inst = generate_partition_instance(&pin(&[1, 1, 2]), Setting::Invariant).unwrap();
        let w = certificate_normal(3, &[2]);
        let r3 = 3f64.sqrt();
        assert_eq!(w, vec![-1.0 / r3, -1.0 / r3, 1.0 / r3]);
        let values: Vec<f64> = inst.points.iter().map(|p| dot(&w, &p.x) - 2.0).collect();
        let expected = [-4.0, -3.0, -4.0, -3.0, 0.0, -1.0, -2.0, -2.0, -2.0];
        for (v, e) in values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12, "{values:?}");
        }
    }

    #[test]
    fn rejects_foreign_instances() {
        let mut inst = generate_partition_instance(&pin(&[1, 1, 2]), Setting::Invariant).unwrap();
        inst.points[0].r = 3.0;
        assert!(matches!(reduction_optimum_exact(&inst), Err(Error::InvalidInput(_))));
        assert!(matches!(verify_yes_certificate(&inst, &[2]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn partition_solver_examples() {
        let s = solve_partition_exact(&pin(&[1, 1, 2])).unwrap().unwrap();
        let sum: u64 = s.iter().map(|&i| [1, 1, 2][i]).sum();
        assert_eq!(sum, 2);
        assert_eq!(solve_partition_exact(&pin(&[1, 2, 4])).unwrap(), None);
        assert_eq!(solve_partition_exact(&pin(&[5, 5])).unwrap().map(|s| s.len()), Some(1));
        assert!(matches!(solve_partition_exact(&pin(&[1; 25])), Err(Error::ResourceLimit(_))));
        let big: Vec<u64> = (1..=24).collect();
        let s = solve_partition_exact(&pin(&big)).unwrap().unwrap();
        assert_eq!(s.iter().map(|&i| big[i]).sum::<u64>(), 150);
    }

    #[test]
    fn exact_optimum_examples() {
        let yes = generate_partition_instance(&pin(&[1, 1]), Setting::Invariant).unwrap();
        let opt = reduction_optimum_exact(&yes).unwrap();
        assert!((opt.value - 1.0).abs() < 1e-12);
        assert_eq!(opt.b, -2.0);
        // Values (1, 2, 4): the best vertex pins the two small coordinates to the same
        // bound and solves for the third, giving 2/3 + (3 / (4 sqrt 3))^2.
        let no = generate_partition_instance(&pin(&[1, 2, 4]), Setting::Invariant).unwrap();
        let opt = reduction_optimum_exact(&no).unwrap();
        let r3 = 3f64.sqrt();
        let mut best: f64 = 0.0;
        for s1 in [-1.0, 1.0] {
            for s2 in [-1.0, 1.0] {
                for s3 in [-1.0, 1.0] {
                    let s = [s1, s2, s3];
                    let c = [1.0, 2.0, 4.0];
                    for free in 0..3 {
                        let rest: f64 = (0..3).filter(|&i| i != free).map(|i| c[i] * s[i]).sum::<f64>() / r3;
                        let wf = -rest / c[free];
                        if wf.abs() <= 1.0 / r3 + 1e-12 {
                            best = best.max(2.0 / 3.0 + wf * wf);
                        }
                    }
                }
            }
        }
        assert!((opt.value - best).abs() < 1e-12);
        assert!(opt.value < 1.0);
        assert!((best - (2.0 / 3.0 + 3.0 / 16.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_normal_satisfies_every_reduction() {
        for values in [vec![1, 2, 4], vec![7], vec![2, 2, 3, 9]] {
            for setting in [Setting::Invariant, Setting::InstanceWise] {
                let inst = generate_partition_instance(&pin(&values), setting).unwrap();
                let d = values.len();
                assert!(reduction_violation(&inst, &vec![0.0; d], -2.0, DEFAULT_SLACK).unwrap() <= 0.0);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn oracles_agree(values in proptest::collection::vec(1u64..6, 1..7), slack in 0.05f64..0.5) {
            let p = PartitionInput::new(values.clone(), slack).unwrap();
            let subset = solve_partition_exact(&p).unwrap();
            for setting in [Setting::Invariant, Setting::InstanceWise] {
                let inst = generate_partition_instance(&p, setting).unwrap();
                let opt = reduction_optimum_exact(&inst).unwrap();
                let hits_one = (opt.value - 1.0).abs() < 1e-9;
                prop_assert_eq!(hits_one, subset.is_some());
                if let Some(s) = &subset {
                    prop_assert!(verify_yes_certificate(&inst, s).unwrap());
                    let complement: Vec<usize> = (0..values.len()).filter(|i| !s.contains(i)).collect();
                    prop_assert!(verify_yes_certificate(&inst, &complement).unwrap());
                }
            }
        }
    }
}
