//! Empirical learning curves: train strategic ERM on growing samples from a
//! realizable distribution and measure strategic loss on a large test draw.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::generator::{GeneratorConfig, InstanceGenerator, PreferenceMode};
use crate::geometry::{Hyperplane, Seminorm};
use crate::serm::{serm_bruteforce, serm_instancewise_adversarial, serm_invariant_essentially_adversarial, SermStatus};
use crate::strategic::{classify_regime, strategic_loss, CostModel, Regime, StrategicInstance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningCurveConfig {
    pub generator: GeneratorConfig,
    pub schedule: Vec<usize>,
    pub seeds: usize,
    pub test_size: usize,
    /// Seed of the ground truth; training and test draws vary with the run seed.
    pub dist_seed: u64,
    /// Direction budget of the brute-force fallback.
    pub brute_budget: usize,
}

impl LearningCurveConfig {
    /// Planar l2 cost with essentially adversarial preferences and a thin margin.
    pub fn realizable_default() -> Self {
        let mut generator =
            GeneratorConfig::invariant(2, 0, Seminorm::l2(2), PreferenceMode::EssentiallyAdversarial { threshold: 0.5 });
        generator.margin = 0.02;
        LearningCurveConfig {
            generator,
            schedule: vec![10, 30, 100, 300],
            seeds: 20,
            test_size: 10_000,
            dist_seed: 11,
            brute_budget: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRun {
    pub n: usize,
    pub seed: u64,
    pub train_loss: f64,
    pub test_loss: f64,
    /// True when the polynomial solver failed and brute force supplied the classifier.
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub mean_test_loss: f64,
    pub std_test_loss: f64,
    pub fallbacks: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendTest {
    pub rho: f64,
    /// Two-sided p-value of the t approximation.
    pub p_value: f64,
    pub runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
    pub runs: Vec<CurveRun>,
    pub trend: TrendTest,
}

/// Strategic ERM with the solver matching the instance's regime; brute force
/// when no polynomial solver applies or it does not separate. The flag marks fallbacks.
pub fn train(inst: &StrategicInstance, brute_budget: usize) -> Result<(Hyperplane, bool)> {
    let regime = classify_regime(inst);
    let fast = match &inst.cost {
        CostModel::Invariant { .. } if regime.is_essentially_adversarial() => {
            Some(serm_invariant_essentially_adversarial(inst))
        }
        CostModel::InstanceWise { .. } if regime.regime == Regime::Adversarial => {
            Some(serm_instancewise_adversarial(inst, 1e-6))
        }
        _ => None,
    };
    match fast {
        Some(Ok(sol)) if sol.status == SermStatus::Separated => Ok((sol.h, false)),
        Some(Err(e @ (Error::InvalidInput(_) | Error::InvalidSpec(_)))) => Err(e),
        _ => Ok((serm_bruteforce(inst, brute_budget)?.h, true)),
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (average ranks for ties) with a two-sided p-value
/// from the t distribution with `n - 2` degrees of freedom.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<TrendTest> {
    let n = xs.len();
    if n != ys.len() || n < 3 {
        return Err(Error::InvalidInput("spearman needs two equal-length samples of size >= 3".into()));
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(TrendTest { rho: 0.0, p_value: 1.0, runs: n });
    }
    let rho = sxy / (sxx * syy).sqrt();
    let df = (n - 2) as f64;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::NumericalFailure(e.to_string()))?;
        2.0 * dist.cdf(-t.abs())
    };
    Ok(TrendTest { rho, p_value, runs: n })
}

/// Run every `(seed, n)` pair; seeds run in parallel and merge in seed order.
pub fn learning_curve(cfg: &LearningCurveConfig) -> Result<LearningCurve> {
    if cfg.schedule.is_empty() || cfg.seeds == 0 || cfg.test_size == 0 {
        return Err(Error::InvalidSpec("schedule, seed count and test size must be non-empty".into()));
    }
    if cfg.schedule.contains(&0) {
        return Err(Error::InvalidSpec("sample sizes must be positive".into()));
    }
    let gen = InstanceGenerator::new(cfg.generator.clone(), cfg.dist_seed)?;
    let per_seed: Vec<Vec<CurveRun>> = (0..cfg.seeds as u64)
        .into_par_iter()
        .map(|seed| {
            let test = gen.sample(cfg.test_size, u64::MAX - seed)?;
            cfg.schedule
                .iter()
                .map(|&n| {
                    let train_set = gen.sample(n, seed)?;
                    let (h, fallback) = train(&train_set, cfg.brute_budget)?;
                    Ok(CurveRun {
                        n,
                        seed,
                        train_loss: strategic_loss(&h, &train_set)?,
                        test_loss: strategic_loss(&h, &test)?,
                        fallback,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let runs: Vec<CurveRun> = per_seed.into_iter().flatten().collect();
    let points = cfg
        .schedule
        .iter()
        .map(|&n| {
            let losses: Vec<f64> = runs.iter().filter(|r| r.n == n).map(|r| r.test_loss).collect();
            let k = losses.len() as f64;
            let mean = losses.iter().sum::<f64>() / k;
            let var = if losses.len() > 1 { losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
            CurvePoint {
                n,
                mean_test_loss: mean,
                std_test_loss: var.sqrt(),
                fallbacks: runs.iter().filter(|r| r.n == n && r.fallback).count(),
            }
        })
        .collect();
    let xs: Vec<f64> = runs.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = runs.iter().map(|r| r.test_loss).collect();
    let trend = if runs.len() >= 3 { spearman(&xs, &ys)? } else { TrendTest { rho: 0.0, p_value: 1.0, runs: runs.len() } };
    Ok(LearningCurve { points, runs, trend })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn spearman_against_hand_values() {
        let t = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[5.0, 6.0, 7.0, 8.0, 7.0]).unwrap();
        // Ranks (1..5) vs (1, 2, 3.5, 5, 3.5): rho = 0.8207826816681233.
        assert!((t.rho - 0.8207826816681233).abs() < 1e-12);
        // Two-sided p from t = rho sqrt(3 / (1 - rho^2)) with 3 degrees of freedom.
        assert!((t.p_value - 0.08858700531354381).abs() < 1e-9, "{}", t.p_value);
        let perfect = spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(perfect.rho, -1.0);
        assert_eq!(perfect.p_value, 0.0);
        let flat = spearman(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(flat.p_value, 1.0);
    }

    #[test]
    fn small_curve_shape() {
        let mut cfg = LearningCurveConfig::realizable_default();
        cfg.schedule = vec![5, 40];
        cfg.seeds = 3;
        cfg.test_size = 500;
        let curve = learning_curve(&cfg).unwrap();
        assert_eq!(curve.points.len(), 2);
        assert_eq!(curve.runs.len(), 6);
        assert!(curve.runs.iter().all(|r| r.train_loss == 0.0));
        assert_eq!(curve.runs.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![0, 0, 1, 1, 2, 2]);
        let again = learning_curve(&cfg).unwrap();
        assert_eq!(curve, again);
    }

    #[test]
    fn full_population_test_matches_train() {
        let cfg = LearningCurveConfig::realizable_default();
        let gen = InstanceGenerator::new(cfg.generator.clone(), cfg.dist_seed).unwrap();
        let pop = gen.sample(60, 3).unwrap();
        let (h, _) = train(&pop, 500).unwrap();
        assert_eq!(strategic_loss(&h, &pop).unwrap(), 0.0);
    }
}
