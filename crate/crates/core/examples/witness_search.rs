//! Searches random small planar instances for a positive randomization gap
//! and writes the first hit of each kind to `data/`.
//!
//! `cargo run --release --example witness_search [-- <seed>]`

use std::path::PathBuf;

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use stratlearn::randomization::{search_randomization_gap, GapReport};
use stratlearn::{CostModel, DataPoint, InstanceMeta, Seminorm, StrategicInstance};

const BUDGET: usize = 10_000;
const MAX_ATTEMPTS: u64 = 5_000;

fn label(rng: &mut ChaCha8Rng) -> i8 {
    if rng.gen_bool(0.5) {
        1
    } else {
        -1
    }
}

/// Four points in a box, l2 cost, the same preference for everyone.
fn uniform_reward_instance(seed: u64) -> Result<StrategicInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..4)
        .map(|_| DataPoint::new(vec![rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)], label(&mut rng), 1.0))
        .collect();
    let meta = InstanceMeta { name: "uniform-reward-gap".into(), seed: Some(seed), ..Default::default() };
    Ok(StrategicInstance::new(2, CostModel::Invariant { seminorm: Seminorm::l2(2) }, points, meta)?)
}

/// Four agents moving for free within random subsets of five sample points.
fn zero_cost_instance(seed: u64) -> Result<StrategicInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
    let mut points = Vec::new();
    let mut regions = Vec::new();
    for _ in 0..4 {
        let x = vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let r = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        points.push(DataPoint::new(x, label(&mut rng), r));
        regions.push((0..space.len()).filter(|_| rng.gen_bool(0.4)).collect());
    }
    let meta = InstanceMeta { name: "zero-cost-gap".into(), seed: Some(seed), ..Default::default() };
    Ok(StrategicInstance::new(2, CostModel::ZeroCostRegion { space, regions }, points, meta)?)
}

fn search(
    name: &str,
    base_seed: u64,
    build: impl Fn(u64) -> Result<StrategicInstance>,
    accept: impl Fn(&GapReport) -> bool,
) -> Result<()> {
    for attempt in 0..MAX_ATTEMPTS {
        let seed = base_seed + attempt;
        let inst = build(seed)?;
        let report = search_randomization_gap(&inst, BUDGET, seed)?;
        if accept(&report) {
            println!("{name}: seed {seed} det {:.4} rand {:.4}", report.best_det, report.best_rand);
            let out = json!({
                "generator": { "script": "examples/witness_search.rs", "seed": seed, "budget": BUDGET },
                "instance": inst,
                "report": report,
            });
            let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(format!("{name}.json"));
            std::fs::write(&path, serde_json::to_string_pretty(&out)? + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            return Ok(());
        }
    }
    anyhow::bail!("{name}: no witness in {MAX_ATTEMPTS} attempts")
}

fn main() -> Result<()> {
    let base_seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2024);
    search("uniform_reward_gap", base_seed, uniform_reward_instance, |r| r.best_rand == 0.0 && r.best_det > 0.0)?;
    search("zero_cost_gap", base_seed, zero_cost_instance, |r| r.best_rand > 0.0 && r.best_rand < r.best_det - 1e-9)?;
    Ok(())
}
