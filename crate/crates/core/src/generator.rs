//! Seeded synthetic instances.
//!
//! A ground-truth hyperplane is drawn first; each point then gets a label and
//! a preference, and its feature is slid along the dual maximizer of its cost
//! until its signed distance clears the best-response threshold by `margin`.
//! Separable instances are therefore separable by construction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Hyperplane, PNorm, Seminorm};
use crate::linalg::{axpy, dot, norm2, scale};
use crate::strategic::{CostModel, DataPoint, InstanceMeta, StrategicInstance};

/// How preferences are drawn given the label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PreferenceMode {
    /// Positives get `r` in `[-r_max, 0]`, negatives `[0, r_max]`.
    Adversarial,
    /// Positives get `r` in `[threshold - r_max, threshold]`, negatives `[threshold, threshold + r_max]`.
    EssentiallyAdversarial { threshold: f64 },
    /// Every point gets `r` in `[-r_max, r_max]`.
    General,
    /// Uniform draw from a finite set, independent of the label.
    Discrete { values: Vec<f64> },
}

impl PreferenceMode {
    fn describe(&self, r_max: f64) -> String {
        match self {
            PreferenceMode::Adversarial => format!("adversarial, |r| <= {r_max}"),
            PreferenceMode::EssentiallyAdversarial { threshold } => {
                format!("essentially adversarial around {threshold}, spread {r_max}")
            }
            PreferenceMode::General => format!("[-{r_max}, {r_max}]"),
            PreferenceMode::Discrete { values } => format!("{values:?}"),
        }
    }
}

/// Cost model family to draw from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CostSpec {
    Invariant { seminorm: Seminorm },
    /// Per-point weighted lp norm with all weights equal to one uniform draw from `scale`.
    InstanceWise { p: PNorm, scale: (f64, f64) },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub dim: usize,
    pub n: usize,
    #[serde(default = "half")]
    pub pos_fraction: f64,
    /// Distance (in signed-distance units) by which every point clears its threshold.
    pub margin: f64,
    #[serde(default = "one")]
    pub r_max: f64,
    pub preferences: PreferenceMode,
    pub cost: CostSpec,
    #[serde(default = "yes")]
    pub separable: bool,
    /// Probability of flipping each label; only allowed when not separable.
    #[serde(default)]
    pub label_noise: f64,
    /// Half-width of the feature box and of the extra random clearance.
    #[serde(default = "three")]
    pub spread: f64,
}

fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn three() -> f64 {
    3.0
}
fn yes() -> bool {
    true
}

impl GeneratorConfig {
    /// Separable instance under a shared seminorm.
    pub fn invariant(dim: usize, n: usize, seminorm: Seminorm, preferences: PreferenceMode) -> Self {
        GeneratorConfig {
            dim,
            n,
            pos_fraction: 0.5,
            margin: 0.1,
            r_max: 1.0,
            preferences,
            cost: CostSpec::Invariant { seminorm },
            separable: true,
            label_noise: 0.0,
            spread: 3.0,
        }
    }

    /// Separable adversarial instance with per-point scaled norms.
    pub fn instance_wise(dim: usize, n: usize, p: PNorm, scale: (f64, f64)) -> Self {
        GeneratorConfig {
            dim,
            n,
            pos_fraction: 0.5,
            margin: 0.1,
            r_max: 1.0,
            preferences: PreferenceMode::Adversarial,
            cost: CostSpec::InstanceWise { p, scale },
            separable: true,
            label_noise: 0.0,
            spread: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if self.dim == 0 {
            return bad("dimension must be positive");
        }
        if !(0.0..=1.0).contains(&self.pos_fraction) {
            return bad("pos_fraction must lie in [0, 1]");
        }
        if !(self.r_max.is_finite() && self.r_max >= 0.0) || !(self.spread.is_finite() && self.spread > 0.0) {
            return bad("r_max must be non-negative and spread positive");
        }
        if !self.margin.is_finite() {
            return bad("margin must be finite");
        }
        if self.separable && self.margin <= 0.0 {
            return bad("separable instances need a positive margin");
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return bad("label_noise must lie in [0, 1]");
        }
        if self.separable && self.label_noise > 0.0 {
            return bad("separable instances cannot have label noise");
        }
        match &self.preferences {
            PreferenceMode::Discrete { values } if values.is_empty() || values.iter().any(|v| !v.is_finite()) => {
                return bad("discrete preference set must be non-empty and finite")
            }
            PreferenceMode::EssentiallyAdversarial { threshold } if !threshold.is_finite() => {
                return bad("threshold must be finite")
            }
            _ => {}
        }
        match &self.cost {
            CostSpec::Invariant { seminorm } if seminorm.dim() != self.dim => {
                return bad("seminorm dimension differs from the requested dimension")
            }
            CostSpec::InstanceWise { scale: (lo, hi), .. } if !(*lo > 0.0 && hi >= lo && hi.is_finite()) => {
                return bad("instance-wise scale range must satisfy 0 < lo <= hi")
            }
            _ => {}
        }
        Ok(())
    }
}

/// A fixed distribution: ground truth and cost family are drawn once from
/// `dist_seed`, then any number of samples can be drawn.
#[derive(Clone, Debug)]
pub struct InstanceGenerator {
    config: GeneratorConfig,
    dist_seed: u64,
    truth: Hyperplane,
}

impl InstanceGenerator {
    pub fn new(config: GeneratorConfig, dist_seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(dist_seed);
        let kernel: Vec<Vec<f64>> = match &config.cost {
            CostSpec::Invariant { seminorm } => seminorm.kernel().to_vec(),
            CostSpec::InstanceWise { .. } => Vec::new(),
        };
        let mut w: Vec<f64>;
        loop {
            w = (0..config.dim).map(|_| rng.sample(StandardNormal)).collect();
            for k in &kernel {
                w = axpy(&w, -dot(k, &w), k);
            }
            if norm2(&w) > 1e-3 {
                break;
            }
        }
        // Unit dual norm for a shared cost, unit Euclidean norm otherwise.
        let size = match &config.cost {
            CostSpec::Invariant { seminorm } => seminorm.dual_value(&w)?,
            CostSpec::InstanceWise { .. } => norm2(&w),
        };
        if !(size.is_finite() && size > 0.0) {
            return Err(Error::InvalidSpec("ground-truth direction has no finite positive dual norm".into()));
        }
        let w = scale(&w, 1.0 / size);
        let b = rng.gen_range(-0.5..0.5) * config.spread;
        Ok(InstanceGenerator { config, dist_seed, truth: Hyperplane::new(w, b) })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn ground_truth(&self) -> &Hyperplane {
        &self.truth
    }

    fn draw_preference(&self, rng: &mut ChaCha8Rng, y: i8) -> f64 {
        let rm = self.config.r_max;
        let u: f64 = rng.gen_range(0.0..=1.0);
        match &self.config.preferences {
            PreferenceMode::Adversarial => -(y as f64) * u * rm,
            PreferenceMode::EssentiallyAdversarial { threshold } => threshold - (y as f64) * u * rm,
            PreferenceMode::General => (2.0 * u - 1.0) * rm,
            PreferenceMode::Discrete { values } => *values.choose(rng).expect("validated non-empty"),
        }
    }

    fn draw_seminorm(&self, rng: &mut ChaCha8Rng) -> Result<Seminorm> {
        match &self.config.cost {
            CostSpec::Invariant { seminorm } => Ok(seminorm.clone()),
            CostSpec::InstanceWise { p, scale: (lo, hi) } => {
                let a = if hi > lo { rng.gen_range(*lo..*hi) } else { *lo };
                Seminorm::lp(*p, vec![a; self.config.dim])
            }
        }
    }

    /// Draw `n` points with the given sample seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<StrategicInstance> {
        let cfg = &self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ self.dist_seed.rotate_left(32));
        let mut points = Vec::with_capacity(n);
        let mut seminorms = Vec::with_capacity(n);
        for _ in 0..n {
            let y: i8 = if rng.gen_bool(cfg.pos_fraction) { 1 } else { -1 };
            let r = self.draw_preference(&mut rng, y);
            let l = self.draw_seminorm(&mut rng)?;
            let base: Vec<f64> = (0..cfg.dim).map(|_| rng.gen_range(-cfg.spread..cfg.spread)).collect();
            let dual = l.dual(&self.truth.w)?;
            let u = dual.maximizer.ok_or_else(|| Error::InvalidSpec("ground truth has no dual maximizer".into()))?;
            let extra = rng.gen_range(0.0..1.0) * cfg.spread;
            let target = if y == 1 { -r + cfg.margin + extra } else { -r - cfg.margin - extra };
            let current = self.truth.value(&base) / dual.value;
            let x = axpy(&base, target - current, &u);
            let y = if cfg.label_noise > 0.0 && rng.gen_bool(cfg.label_noise) { -y } else { y };
            points.push(DataPoint::new(x, y, r));
            seminorms.push(l);
        }
        let cost = match &cfg.cost {
            CostSpec::Invariant { seminorm } => CostModel::Invariant { seminorm: seminorm.clone() },
            CostSpec::InstanceWise { .. } => CostModel::InstanceWise { seminorms },
        };
        let mut meta = InstanceMeta {
            name: format!("generated-d{}-n{}", cfg.dim, n),
            seed: Some(seed),
            preference_set: Some(cfg.preferences.describe(cfg.r_max)),
            ground_truth: Some(self.truth.clone()),
            ..Default::default()
        };
        meta.extra.insert("dist_seed".into(), self.dist_seed.into());
        meta.extra.insert("separable".into(), cfg.separable.into());
        meta.extra.insert("margin".into(), cfg.margin.into());
        StrategicInstance::new(cfg.dim, cost, points, meta)
    }
}

/// One-shot instance with `config.n` points; distribution and sample share the seed.
pub fn generate_instance(config: &GeneratorConfig, seed: u64) -> Result<StrategicInstance> {
    InstanceGenerator::new(config.clone(), seed)?.sample(config.n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategic::{classify_regime, strategic_loss, Regime};

    #[test]
    fn same_seed_same_bytes() {
        let cfg = GeneratorConfig::invariant(3, 25, Seminorm::l1(3), PreferenceMode::General);
        let a = serde_json::to_string(&generate_instance(&cfg, 7).unwrap()).unwrap();
        let b = serde_json::to_string(&generate_instance(&cfg, 7).unwrap()).unwrap();
        let c = serde_json::to_string(&generate_instance(&cfg, 8).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn requested_point_count() {
        let cfg = GeneratorConfig::invariant(2, 13, Seminorm::l2(2), PreferenceMode::Adversarial);
        assert_eq!(generate_instance(&cfg, 1).unwrap().len(), 13);
    }

    #[test]
    fn ground_truth_separates_every_mode() {
        let modes = [
            PreferenceMode::Adversarial,
            PreferenceMode::EssentiallyAdversarial { threshold: 0.7 },
            PreferenceMode::General,
            PreferenceMode::Discrete { values: vec![-1.0, 2.0] },
        ];
        let norms = [
            Seminorm::l1(2),
            Seminorm::l2(2),
            Seminorm::linf(2),
            Seminorm::degenerate(Seminorm::l2(1), vec![vec![1.0, 1.0]]).unwrap(),
        ];
        for mode in &modes {
            for l in &norms {
                for seed in 0..5 {
                    let cfg = GeneratorConfig::invariant(2, 30, l.clone(), mode.clone());
                    let inst = generate_instance(&cfg, seed).unwrap();
                    let h = inst.meta.ground_truth.clone().unwrap();
                    assert_eq!(strategic_loss(&h, &inst).unwrap(), 0.0, "{mode:?} {l:?} {seed}");
                }
            }
        }
        let cfg = GeneratorConfig::instance_wise(3, 40, PNorm::Two, (0.2, 3.0));
        let inst = generate_instance(&cfg, 3).unwrap();
        assert_eq!(strategic_loss(inst.meta.ground_truth.as_ref().unwrap(), &inst).unwrap(), 0.0);
        assert_eq!(classify_regime(&inst).regime, Regime::Adversarial);
    }

    #[test]
    fn regimes_follow_preference_mode() {
        let cfg = GeneratorConfig::invariant(2, 40, Seminorm::l2(2), PreferenceMode::EssentiallyAdversarial { threshold: 2.0 });
        let reg = classify_regime(&generate_instance(&cfg, 4).unwrap());
        assert!(reg.is_essentially_adversarial() && reg.min_neg >= 2.0 && reg.max_pos <= 2.0);
    }

    #[test]
    fn contradictory_specs_rejected() {
        let mut cfg = GeneratorConfig::invariant(2, 5, Seminorm::l2(2), PreferenceMode::General);
        cfg.label_noise = 0.1;
        assert!(matches!(generate_instance(&cfg, 0), Err(Error::InvalidSpec(_))));
        cfg.label_noise = 0.0;
        cfg.margin = -1.0;
        assert!(matches!(generate_instance(&cfg, 0), Err(Error::InvalidSpec(_))));
        let cfg = GeneratorConfig::invariant(3, 5, Seminorm::l2(2), PreferenceMode::General);
        assert!(matches!(generate_instance(&cfg, 0), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn label_noise_flips_some_labels() {
        let mut cfg = GeneratorConfig::invariant(2, 200, Seminorm::l2(2), PreferenceMode::General);
        cfg.separable = false;
        cfg.label_noise = 0.3;
        let inst = generate_instance(&cfg, 2).unwrap();
        let loss = strategic_loss(inst.meta.ground_truth.as_ref().unwrap(), &inst).unwrap();
        assert!(loss > 0.15 && loss < 0.45, "{loss}");
    }
}
