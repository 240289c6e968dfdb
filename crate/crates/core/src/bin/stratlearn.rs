//! Command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use stratlearn::generator::{generate_instance, CostSpec, GeneratorConfig, InstanceGenerator, PreferenceMode};
use stratlearn::hardness::{
    generate_partition_instance, reduction_optimum_exact, solve_partition_exact, verify_yes_certificate,
    PartitionInput, Setting, DEFAULT_SLACK, MAX_EXACT_DIM,
};
use stratlearn::io::{
    audit_csv, check_input_path, check_output_path, curve_csv, envelope, instance_json, read_instance, read_json,
    to_pretty, write_bytes, write_json,
};
use stratlearn::learning::{learning_curve, LearningCurveConfig};
use stratlearn::randomization::{bundled_witness, search_randomization_gap, Witness};
use stratlearn::serm::{serm_bruteforce, serm_instancewise_adversarial_with, serm_invariant_essentially_adversarial_with};
use stratlearn::svc::{
    avc_finite, build_basis_shattering, build_polygon_shattering, build_power_set_space, falsify_shattering_bound,
    shattering_coefficient_finite, shattering_coefficient_linear, svc_finite, vc_finite,
};
use stratlearn::{
    audit, classify_regime, strategic_loss, CostModel, Error, Hyperplane, PNorm, Seminorm, SermConfig, SermStatus,
    StrategicInstance,
};

#[derive(Parser)]
#[command(name = "stratlearn", version, about = "Strategic linear classification toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for every random choice; recorded in the output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Result file; printed to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override (bisection width for the instance-wise solver).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Work budget (directions, trials or mixture tuples depending on the command).
    #[arg(long, global = true)]
    budget: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance.
    Gen(GenArgs),
    /// Learn a classifier with strategic ERM.
    Solve(SolveArgs),
    /// Strategic loss and per-point audit of a classifier.
    Eval(EvalArgs),
    /// Count label patterns of the shattering constructions.
    Shatter(ShatterArgs),
    /// Partition reduction instance with verdict.
    Hardness(HardnessArgs),
    /// Compare deterministic and randomized classifiers.
    RandGap(RandGapArgs),
    /// Test loss against training-set size.
    LearningCurve(CurveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Adversarial,
    EssentiallyAdversarial,
    General,
}

#[derive(Clone, Copy, ValueEnum)]
enum CostArg {
    L1,
    L2,
    Linf,
    InstanceL1,
    InstanceL2,
    InstanceLinf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "essentially-adversarial")]
    regime: RegimeArg,
    #[arg(long, value_enum, default_value = "l2")]
    cost: CostArg,
    #[arg(long, default_value_t = 0.1)]
    margin: f64,
    /// Label flip probability; any positive value makes the instance non-separable.
    #[arg(long, default_value_t = 0.0, conflicts_with = "separable")]
    noise: f64,
    /// Require a separable instance (the default when no noise is given).
    #[arg(long)]
    separable: bool,
    /// Seed of the ground truth; defaults to the sample seed.
    #[arg(long)]
    dist_seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    /// Pick from the instance's cost model and preferences.
    Auto,
    Invariant,
    InstanceWise,
    Brute,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    solver: SolverArg,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    instance: PathBuf,
    /// JSON with `w` and `b`, at top level or under `result`.
    #[arg(long)]
    classifier: PathBuf,
    /// Evaluate with every preference set to 0 (no movement).
    #[arg(long)]
    r_zero: bool,
    /// Per-point audit CSV.
    #[arg(long)]
    audit: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructionArg {
    /// Copies of the origin under polygon costs in the plane.
    Polygons,
    /// Origin plus a basis of the kernel's complement under one seminorm.
    Basis,
    /// Power-set space where strategic and classic dimensions differ.
    PowerSet,
    /// Random point sets one larger than the basis construction.
    BoundCheck,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L1,
    L2,
    Linf,
    /// l2 with the first coordinate axis free (needs dim >= 2).
    Degenerate,
}

#[derive(Args)]
struct ShatterArgs {
    #[arg(long, value_enum)]
    construction: ConstructionArg,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, value_enum, default_value = "l2")]
    norm: NormArg,
}

#[derive(Args)]
struct HardnessArgs {
    /// Comma-separated positive integers.
    #[arg(long, value_delimiter = ',', required = true)]
    c: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    slack: f64,
    /// `invariant` or `instance-wise`.
    #[arg(long, default_value = "invariant")]
    setting: String,
    /// Where to write the reduction instance.
    #[arg(long)]
    instance_out: Option<PathBuf>,
}

#[derive(Args)]
struct RandGapArgs {
    /// Bundled witness: `uniform-reward` or `zero-cost`.
    #[arg(long, conflicts_with = "instance")]
    witness: Option<String>,
    #[arg(long)]
    instance: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, value_delimiter = ',', default_value = "10,30,100,300")]
    schedule: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    #[arg(long, default_value_t = 10_000)]
    test_size: usize,
    /// Per-size summary CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// What a command produced: the result JSON plus any extra files and an exit status.
struct Outcome {
    doc: Value,
    extra_files: Vec<(PathBuf, Vec<u8>)>,
    exit: Option<Error>,
}

impl Outcome {
    fn ok(doc: Value) -> Self {
        Outcome { doc, extra_files: Vec::new(), exit: None }
    }
}

fn seminorm(norm: NormArg, dim: usize) -> anyhow::Result<Seminorm> {
    Ok(match norm {
        NormArg::L1 => Seminorm::l1(dim),
        NormArg::L2 => Seminorm::l2(dim),
        NormArg::Linf => Seminorm::linf(dim),
        NormArg::Degenerate => {
            if dim < 2 {
                return Err(Error::InvalidInput("degenerate norm needs dim >= 2".into()).into());
            }
            let mut axis = vec![0.0; dim];
            axis[0] = 1.0;
            Seminorm::degenerate(Seminorm::l2(dim - 1), vec![axis])?
        }
    })
}

fn cmd_gen(c: &Common, a: &GenArgs) -> anyhow::Result<Outcome> {
    let prefs = match a.regime {
        RegimeArg::Adversarial => PreferenceMode::Adversarial,
        RegimeArg::EssentiallyAdversarial => PreferenceMode::EssentiallyAdversarial { threshold: 0.5 },
        RegimeArg::General => PreferenceMode::General,
    };
    let cost = match a.cost {
        CostArg::L1 => CostSpec::Invariant { seminorm: Seminorm::l1(a.dim) },
        CostArg::L2 => CostSpec::Invariant { seminorm: Seminorm::l2(a.dim) },
        CostArg::Linf => CostSpec::Invariant { seminorm: Seminorm::linf(a.dim) },
        CostArg::InstanceL1 => CostSpec::InstanceWise { p: PNorm::One, scale: (0.5, 2.0) },
        CostArg::InstanceL2 => CostSpec::InstanceWise { p: PNorm::Two, scale: (0.5, 2.0) },
        CostArg::InstanceLinf => CostSpec::InstanceWise { p: PNorm::Inf, scale: (0.5, 2.0) },
    };
    let mut cfg = GeneratorConfig::invariant(a.dim, a.n, Seminorm::l2(a.dim.max(1)), prefs);
    cfg.cost = cost;
    cfg.margin = a.margin;
    cfg.label_noise = a.noise;
    cfg.separable = a.noise == 0.0;
    let inst = match a.dist_seed {
        Some(d) => InstanceGenerator::new(cfg, d)?.sample(a.n, c.seed)?,
        None => generate_instance(&cfg, c.seed)?,
    };
    Ok(Outcome::ok(instance_json(&inst)?))
}

fn cmd_solve(c: &Common, a: &SolveArgs) -> anyhow::Result<Outcome> {
    check_input_path(&a.instance)?;
    let inst = read_instance(&a.instance)?;
    let cfg = SermConfig { eps_tol: c.tol.unwrap_or(SermConfig::default().eps_tol), ..SermConfig::default() };
    let budget = c.budget.unwrap_or(2000);
    let solver = match a.solver {
        SolverArg::Auto => match (&inst.cost, classify_regime(&inst).is_essentially_adversarial()) {
            (CostModel::Invariant { .. }, true) => SolverArg::Invariant,
            (CostModel::InstanceWise { .. }, _) => SolverArg::InstanceWise,
            _ => SolverArg::Brute,
        },
        s => s,
    };
    let (name, sol) = match solver {
        SolverArg::Invariant => ("invariant", serm_invariant_essentially_adversarial_with(&inst, &cfg)?),
        SolverArg::InstanceWise => ("instance-wise", serm_instancewise_adversarial_with(&inst, &cfg)?),
        _ => ("brute", serm_bruteforce(&inst, budget)?),
    };
    let exit = match sol.status {
        SermStatus::Separated => None,
        SermStatus::Infeasible if name != "brute" => Some(Error::Infeasible("no strategic separator exists".into())),
        SermStatus::NumericalFailure => Some(Error::NumericalFailure("solution failed verification".into())),
        _ => None,
    };
    let config = json!({
        "seed": c.seed, "instance": a.instance, "solver": name, "eps_tol": cfg.eps_tol, "budget": budget,
    });
    Ok(Outcome { doc: envelope("solve", config, &sol)?, extra_files: Vec::new(), exit })
}

fn read_classifier(path: &Path) -> anyhow::Result<Hyperplane> {
    check_input_path(path)?;
    let v: Value = read_json(path)?;
    let body = v.get("result").cloned().unwrap_or(v);
    let w: Vec<f64> = serde_json::from_value(body.get("w").cloned().unwrap_or(Value::Null))
        .map_err(|e| Error::InvalidInput(format!("{}: classifier needs a numeric `w`: {e}", path.display())))?;
    let b = body
        .get("b")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::InvalidInput(format!("{}: classifier needs a numeric `b`", path.display())))?;
    Ok(Hyperplane::new(w, b))
}

fn cmd_eval(c: &Common, a: &EvalArgs) -> anyhow::Result<Outcome> {
    check_input_path(&a.instance)?;
    if let Some(p) = &a.audit {
        check_output_path(p)?;
    }
    let mut inst = read_instance(&a.instance)?;
    if a.r_zero {
        inst = inst.with_zero_preferences();
    }
    let h = read_classifier(&a.classifier)?;
    if h.dim() != inst.dim {
        return Err(Error::InvalidInput("classifier and instance dimensions differ".into()).into());
    }
    let loss = strategic_loss(&h, &inst)?;
    let rows = audit(&h, &inst)?;
    let csv = audit_csv(&rows)?;
    let mut result = json!({
        "n": inst.len(),
        "strategic_loss": loss,
        "errors": rows.iter().zip(&inst.points).filter(|(r, p)| r.br_label != p.y).count(),
        "moved": rows.iter().filter(|r| r.moved).count(),
        "audit_rows": rows.len(),
        "audit_sha256": stratlearn::io::sha256_hex(&csv),
    });
    let mut extra = Vec::new();
    if let Some(p) = &a.audit {
        extra.push((p.clone(), csv));
    } else {
        result["audit"] = serde_json::to_value(&rows)?;
    }
    let config = json!({ "seed": c.seed, "instance": a.instance, "classifier": a.classifier, "r_zero": a.r_zero });
    Ok(Outcome { doc: envelope("eval", config, result)?, extra_files: extra, exit: None })
}

fn cmd_shatter(c: &Common, a: &ShatterArgs) -> anyhow::Result<Outcome> {
    let result = match a.construction {
        ConstructionArg::Polygons => {
            let con = build_polygon_shattering(a.n)?;
            let family: Vec<Hyperplane> = con.witnesses.iter().map(|(_, h)| h.clone()).collect();
            let mut rep = shattering_coefficient_linear(&con.points, &con.costs, &family)?;
            // The witness list covers every pattern, so the count is exact.
            rep.exact = rep.is_shattered();
            json!({ "construction": "polygons", "report": rep, "shattered": rep.is_shattered(), "witness_lines": family.len() })
        }
        ConstructionArg::Basis => {
            let l = seminorm(a.norm, a.dim)?;
            let con = build_basis_shattering(&l, &[1.0, -2.0, 0.5])?;
            let costs = vec![l.clone(); con.points.len()];
            let mut rep = shattering_coefficient_linear(&con.points, &costs, &con.family())?;
            rep.exact = rep.is_shattered();
            json!({
                "construction": "basis", "dim": a.dim, "kernel_dim": l.kernel_dim(), "scale": con.scale,
                "report": rep, "shattered": rep.is_shattered(),
            })
        }
        ConstructionArg::PowerSet => {
            let space = build_power_set_space(a.n)?;
            let items: Vec<(usize, f64)> = (0..a.n).map(|i| (i, (i + 1) as f64)).collect();
            let rep = shattering_coefficient_finite(&space, &items)?;
            let avc: Vec<usize> = (1..=a.n).map(|r| avc_finite(&space, r as f64, a.n + 1)).collect::<Result<_, _>>()?;
            json!({
                "construction": "power-set", "report": rep, "svc": svc_finite(&space, a.n + 1)?,
                "vc": vc_finite(&space, a.n + 1)?, "avc_by_budget": avc, "metric": space.is_metric(),
            })
        }
        ConstructionArg::BoundCheck => {
            let l = seminorm(a.norm, a.dim)?;
            let rep = falsify_shattering_bound(&l, c.budget.unwrap_or(1000), 200, c.seed)?;
            json!({ "construction": "bound-check", "dim": a.dim, "kernel_dim": l.kernel_dim(), "report": rep })
        }
    };
    let config = json!({ "seed": c.seed, "n": a.n, "dim": a.dim, "budget": c.budget });
    Ok(Outcome::ok(envelope("shatter", config, result)?))
}

fn cmd_hardness(c: &Common, a: &HardnessArgs) -> anyhow::Result<Outcome> {
    if let Some(p) = &a.instance_out {
        check_output_path(p)?;
    }
    let setting: Setting = a.setting.parse()?;
    let pin = PartitionInput::new(a.c.clone(), a.slack)?;
    let inst = generate_partition_instance(&pin, setting)?;
    let subset = solve_partition_exact(&pin)?;
    let certificate_ok = match &subset {
        Some(s) => verify_yes_certificate(&inst, s)?,
        None => false,
    };
    let optimum = if pin.dim() <= MAX_EXACT_DIM { Some(reduction_optimum_exact(&inst)?) } else { None };
    let result = json!({
        "values": pin.values,
        "slack": pin.slack,
        "setting": setting.name(),
        "verdict": if subset.is_some() { "yes" } else { "no" },
        "subset": subset,
        "certificate_verified": certificate_ok,
        "regime": classify_regime(&inst).regime,
        "reduction_optimum": optimum,
    });
    let mut extra = Vec::new();
    if let Some(p) = &a.instance_out {
        extra.push((p.clone(), to_pretty(&instance_json(&inst)?).into_bytes()));
    }
    let config = json!({ "seed": c.seed, "c": a.c, "slack": a.slack, "setting": setting.name() });
    Ok(Outcome { doc: envelope("hardness", config, result)?, extra_files: extra, exit: None })
}

fn cmd_rand_gap(c: &Common, a: &RandGapArgs) -> anyhow::Result<Outcome> {
    let (inst, source): (StrategicInstance, Value) = match (&a.witness, &a.instance) {
        (Some(w), _) => {
            let which: Witness = w.parse()?;
            (bundled_witness(which)?.instance, json!(w))
        }
        (None, Some(p)) => {
            check_input_path(p)?;
            (read_instance(p)?, json!(p))
        }
        (None, None) => return Err(Error::InvalidInput("give --witness or --instance".into()).into()),
    };
    let budget = c.budget.unwrap_or(10_000);
    let rep = search_randomization_gap(&inst, budget, c.seed)?;
    let mut result = serde_json::to_value(&rep)?;
    result["gap"] = json!(rep.gap());
    let config = json!({ "seed": c.seed, "source": source, "budget": budget });
    Ok(Outcome::ok(envelope("rand-gap", config, result)?))
}

fn cmd_learning_curve(c: &Common, a: &CurveArgs) -> anyhow::Result<Outcome> {
    if let Some(p) = &a.csv {
        check_output_path(p)?;
    }
    let mut cfg = LearningCurveConfig::realizable_default();
    cfg.schedule = a.schedule.clone();
    cfg.seeds = a.seeds;
    cfg.test_size = a.test_size;
    cfg.dist_seed = c.seed;
    if let Some(b) = c.budget {
        cfg.brute_budget = b;
    }
    let curve = learning_curve(&cfg)?;
    let mut extra = Vec::new();
    if let Some(p) = &a.csv {
        extra.push((p.clone(), curve_csv(&curve)?));
    }
    Ok(Outcome { doc: envelope("learning-curve", serde_json::to_value(&cfg)?, &curve)?, extra_files: extra, exit: None })
}

fn run(cli: &Cli) -> anyhow::Result<Option<Error>> {
    if let Some(p) = &cli.common.out {
        check_output_path(p)?;
    }
    let start = Instant::now();
    let c = &cli.common;
    let mut outcome = match &cli.command {
        Command::Gen(a) => cmd_gen(c, a)?,
        Command::Solve(a) => cmd_solve(c, a)?,
        Command::Eval(a) => cmd_eval(c, a)?,
        Command::Shatter(a) => cmd_shatter(c, a)?,
        Command::Hardness(a) => cmd_hardness(c, a)?,
        Command::RandGap(a) => cmd_rand_gap(c, a)?,
        Command::LearningCurve(a) => cmd_learning_curve(c, a)?,
    };
    let mut artifacts = serde_json::Map::new();
    for (path, bytes) in &outcome.extra_files {
        let hash = write_bytes(path, bytes)?;
        artifacts.insert(path.display().to_string(), json!(hash));
    }
    if !artifacts.is_empty() {
        if let Value::Object(map) = &mut outcome.doc {
            map.insert("artifacts".into(), Value::Object(artifacts));
        }
    }
    match &c.out {
        Some(path) => {
            let hash = write_json(path, &outcome.doc)?;
            // Timing lives beside the result so the result itself stays reproducible.
            let meta = json!({
                "result_sha256": hash,
                "wall_time_ms": start.elapsed().as_secs_f64() * 1e3,
            });
            let mut meta_path = path.clone().into_os_string();
            meta_path.push(".meta");
            write_json(Path::new(&meta_path), &meta).context("writing run metadata")?;
        }
        None => print!("{}", to_pretty(&outcome.doc)),
    }
    Ok(outcome.exit.take())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(e)) => {
            eprintln!("stratlearn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(err) => {
            eprintln!("stratlearn: {err:#}");
            let code = err.downcast_ref::<Error>().map_or(1, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

