//! Strategic empirical risk minimization over linear classifiers.
//!
//! Two exact solvers cover the tractable regimes (shared seminorm with
//! essentially adversarial preferences, and per-point seminorms with
//! adversarial preferences). Both linearize dual-norm constraints over an
//! outer polytope of the unit ball, so any classifier they return is checked
//! against the exact best responses before it is reported. A brute-force
//! direction sweep serves as an oracle for everything else.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ApproxConfig, BallPolytope, Hyperplane, Seminorm, DEFAULT_ETA};
use crate::linalg::{axpy, complement_basis, dot, norm2, scale, sub};
use crate::lp::{solve_lp, LinearProgram, Relation, Sense};
use crate::strategic::{
    best_response_label, classify_regime, predict_raw, strategic_loss, CostModel, Label, StrategicInstance,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SermStatus {
    Separated,
    Infeasible,
    NumericalFailure,
}

/// Per-point outcome of checking a classifier against the best-response rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub index: usize,
    /// 1: y=+1, r>=0; 2: y=+1, r<0; 3: y=-1, r<=0; 4: y=-1, r>0.
    pub case: u8,
    pub pass: bool,
    /// `s + r` for positives and `-(s + r)` for negatives, where `s` is the
    /// signed distance; positive means the point clears its threshold.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SermSolution {
    pub status: SermStatus,
    #[serde(flatten)]
    pub h: Hyperplane,
    pub epsilon: f64,
    /// Dual norm of the normal vector before rescaling (shared cost), or the
    /// largest per-point dual norm of the returned normal (otherwise).
    pub alpha: f64,
    pub loss: f64,
    /// Bisection steps on the slack (per-point solver only); below the cap means it converged.
    #[serde(default)]
    pub iterations: usize,
    pub certificate: Vec<PointCheck>,
}

/// Solver knobs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SermConfig {
    pub approx: ApproxConfig,
    pub eta: f64,
    /// Relative bisection width for the per-point solver.
    pub eps_tol: f64,
    pub max_bisections: usize,
}

impl Default for SermConfig {
    fn default() -> Self {
        SermConfig { approx: ApproxConfig::default(), eta: DEFAULT_ETA, eps_tol: 1e-6, max_bisections: 60 }
    }
}

fn case_of(y: Label, r: f64) -> u8 {
    match (y, r >= 0.0, r <= 0.0) {
        (1, true, _) => 1,
        (1, false, _) => 2,
        (_, _, true) => 3,
        _ => 4,
    }
}

/// Check every point of a seminorm-cost instance against `h`.
pub fn check_solution(inst: &StrategicInstance, h: &Hyperplane) -> Result<Vec<PointCheck>> {
    if !inst.cost.is_seminorm() {
        return invalid("check_solution needs a seminorm cost model");
    }
    inst.points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let l = inst.seminorm_for(i)?;
            let label = best_response_label(h, p, l)?;
            let dual = if h.is_constant() { 1.0 } else { l.dual_value(&h.w)? };
            let s = if dual.is_infinite() {
                if p.r > 0.0 {
                    f64::INFINITY
                } else if p.r < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    h.value(&p.x).signum() * f64::INFINITY
                }
            } else if h.is_constant() {
                // Nobody moves: the raw value acts as the margin.
                h.value(&p.x) - p.r
            } else {
                h.value(&p.x) / dual
            };
            let margin = f64::from(p.y) * (s + p.r);
            Ok(PointCheck { index: i, case: case_of(p.y, p.r), pass: label == p.y, margin })
        })
        .collect()
}

/// Rescale an optimum of the relaxed program (dual norm `alpha <= 1`) to one
/// with unit dual norm and slack `eps / alpha`.
pub fn rescale_relaxed(w: &[f64], b: f64, eps: f64, alpha: f64, min_neg: f64, max_pos: f64) -> (Hyperplane, f64) {
    let mid = (min_neg + max_pos) / 2.0;
    let wb = scale(w, 1.0 / alpha);
    let bb = b / alpha + (1.0 / alpha - 1.0) * mid;
    (Hyperplane::new(wb, bb), eps / alpha)
}

/// Unit-dual direction orthogonal to the kernel of `l`.
fn unit_dual_direction(l: &Seminorm) -> Result<Vec<f64>> {
    let d = l.dim();
    let u = complement_basis(l.kernel(), d)
        .into_iter()
        .next()
        .ok_or_else(|| Error::InvalidInput("seminorm vanishes identically".into()))?;
    let dual = l.dual_value(&u)?;
    Ok(scale(&u, 1.0 / dual))
}

fn finish(inst: &StrategicInstance, h: Hyperplane, epsilon: f64, alpha: f64) -> Result<SermSolution> {
    let certificate = check_solution(inst, &h)?;
    let loss = strategic_loss(&h, inst)?;
    if loss > 0.0 {
        return Err(Error::NumericalFailure(format!("solver output misclassifies a fraction {loss} of the points")));
    }
    Ok(SermSolution { status: SermStatus::Separated, h, epsilon, alpha, loss, iterations: 0, certificate })
}

/// Shared seminorm, essentially adversarial preferences.
pub fn serm_invariant_essentially_adversarial(inst: &StrategicInstance) -> Result<SermSolution> {
    serm_invariant_essentially_adversarial_with(inst, &SermConfig::default())
}

pub fn serm_invariant_essentially_adversarial_with(inst: &StrategicInstance, cfg: &SermConfig) -> Result<SermSolution> {
    let CostModel::Invariant { seminorm: l } = &inst.cost else {
        return invalid("this solver needs an instance-invariant seminorm cost");
    };
    if inst.is_empty() {
        return invalid("empty instance");
    }
    let reg = classify_regime(inst);
    if !reg.is_essentially_adversarial() {
        return Err(Error::RegimeViolation(format!(
            "min over negatives {} is below max over positives {}",
            reg.min_neg, reg.max_pos
        )));
    }
    let d = inst.dim;
    let pos: Vec<_> = inst.points.iter().filter(|p| p.y == 1).collect();
    let neg: Vec<_> = inst.points.iter().filter(|p| p.y == -1).collect();

    if pos.is_empty() || neg.is_empty() {
        // One label only: any unit-dual direction works once b clears every threshold by 1.
        let w = unit_dual_direction(l)?;
        let b = if neg.is_empty() {
            pos.iter().map(|p| -p.r - dot(&w, &p.x)).fold(f64::NEG_INFINITY, f64::max) + 1.0
        } else {
            neg.iter().map(|p| -p.r - dot(&w, &p.x)).fold(f64::INFINITY, f64::min) - 1.0
        };
        return finish(inst, Hyperplane::new(w, b), 1.0, 1.0);
    }

    let ball = l.ball_polytope(&cfg.approx)?;
    // Variables: w (d), b, eps.
    let n = d + 2;
    let mut lp = LinearProgram::new(Sense::Maximize, n);
    lp.objective[d + 1] = 1.0;
    let row = |x: &[f64], b: f64, e: f64| {
        let mut c = x.to_vec();
        c.push(b);
        c.push(e);
        c
    };
    for p in &pos {
        lp.add(row(&p.x, 1.0, 0.0), Relation::Ge, -p.r);
    }
    for p in &neg {
        lp.add(row(&p.x, 1.0, 1.0), Relation::Le, -p.r);
    }
    for v in &ball.vertices {
        lp.add(row(v, 0.0, 0.0), Relation::Le, 1.0);
    }
    for k in &ball.kernel {
        lp.add(row(k, 0.0, 0.0), Relation::Eq, 0.0);
    }
    let sol = solve_lp(&lp)?;
    let mut w: Vec<f64> = sol.x[..d].to_vec();
    for k in l.kernel() {
        w = axpy(&w, -dot(k, &w), k);
    }
    let b = sol.x[d];
    let mut eps = sol.x[d + 1];
    if eps <= cfg.eta {
        return Err(Error::Infeasible(format!("largest slack {eps:.3e} does not exceed the tolerance")));
    }
    let mut alpha = l.dual_value(&w)?;
    if alpha < 1e-12 {
        // Constant optimum: tilt slightly, trading half the slack for a usable direction.
        let u = unit_dual_direction(l)?;
        let u = scale(&u, 1.0 / ball.dual(&u).max(1.0));
        let reach = inst.points.iter().map(|p| l.eval(&p.x)).collect::<Result<Vec<_>>>()?;
        let reach = reach.into_iter().fold(0.0, f64::max);
        let lambda = if reach > 0.0 { (eps / (4.0 * reach)).min(1.0) } else { 1.0 };
        w = scale(&u, lambda);
        eps /= 2.0;
        alpha = l.dual_value(&w)?;
    }
    let (h, eps_bar) = rescale_relaxed(&w, b, eps, alpha, reg.min_neg, reg.max_pos);
    let check = l.dual_value(&h.w)?;
    if (check - 1.0).abs() > 1e-7 {
        return Err(Error::NumericalFailure(format!("rescaled dual norm is {check}")));
    }
    finish(inst, h, eps_bar, alpha)
}

/// Outer balls and kernels for every point, sharing work between equal seminorms.
fn point_balls(inst: &StrategicInstance, approx: &ApproxConfig) -> Result<Vec<BallPolytope>> {
    let mut seen: Vec<(&Seminorm, BallPolytope)> = Vec::new();
    let mut out = Vec::with_capacity(inst.len());
    for i in 0..inst.len() {
        let l = inst.seminorm_for(i)?;
        if let Some((_, ball)) = seen.iter().find(|(s, _)| *s == l) {
            out.push(ball.clone());
            continue;
        }
        let ball = l.ball_polytope(approx)?;
        seen.push((l, ball.clone()));
        out.push(ball);
    }
    Ok(out)
}

/// Is the linearized per-point system feasible at slack `eps`? Returns the
/// witness hyperplane and its normalized margin when it is.
fn system_witness(inst: &StrategicInstance, balls: &[BallPolytope], eps: f64, eta: f64) -> Result<Option<(Hyperplane, f64)>> {
    let d = inst.dim;
    // Variables: w (d), b, t.
    let mut lp = LinearProgram::new(Sense::Maximize, d + 2);
    lp.objective[d + 1] = 1.0;
    lp.bounds[d + 1] = (f64::NEG_INFINITY, 1.0);
    for (p, ball) in inst.points.iter().zip(balls) {
        for v in &ball.vertices {
            let mut c: Vec<f64>;
            if p.y == 1 {
                // w.x + b >= -r * (w.v)
                c = axpy(&p.x, p.r, v);
                c.push(1.0);
                c.push(0.0);
                lp.add(c, Relation::Ge, 0.0);
            } else {
                // -(w.x + b) >= (r + eps)(w.v) + t
                c = axpy(&p.x, p.r + eps, v);
                c.push(1.0);
                c.push(1.0);
                lp.add(c, Relation::Le, 0.0);
            }
        }
        for k in &ball.kernel {
            let mut c = k.clone();
            c.extend([0.0, 0.0]);
            lp.add(c, Relation::Eq, 0.0);
        }
    }
    for v in &balls[0].vertices {
        let mut c = v.clone();
        c.extend([0.0, 0.0]);
        lp.add(c, Relation::Le, 1.0);
    }
    let sol = match solve_lp(&lp) {
        Ok(s) => s,
        Err(Error::Infeasible(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let t = sol.x[d + 1];
    if t <= eta {
        return Ok(None);
    }
    Ok(Some((Hyperplane::new(sol.x[..d].to_vec(), sol.x[d]), t)))
}

/// Probe the linearized per-point system at a fixed slack.
pub fn system_feasible_at(inst: &StrategicInstance, eps: f64) -> Result<bool> {
    let balls = point_balls(inst, &ApproxConfig::default())?;
    Ok(system_witness(inst, &balls, eps, DEFAULT_ETA)?.is_some())
}

/// Per-point seminorms, adversarial preferences.
pub fn serm_instancewise_adversarial(inst: &StrategicInstance, eps_tol: f64) -> Result<SermSolution> {
    serm_instancewise_adversarial_with(inst, &SermConfig { eps_tol, ..SermConfig::default() })
}

pub fn serm_instancewise_adversarial_with(inst: &StrategicInstance, cfg: &SermConfig) -> Result<SermSolution> {
    if !inst.cost.is_seminorm() {
        return invalid("this solver needs seminorm costs");
    }
    if inst.is_empty() {
        return invalid("empty instance");
    }
    if !(cfg.eps_tol > 0.0) {
        return invalid("eps_tol must be positive");
    }
    let reg = classify_regime(inst);
    if !(reg.min_neg >= 0.0 && reg.max_pos <= 0.0) {
        return Err(Error::RegimeViolation(format!(
            "preferences are not adversarial (min over negatives {}, max over positives {})",
            reg.min_neg, reg.max_pos
        )));
    }
    let balls = point_balls(inst, &cfg.approx)?;
    let probe = |eps: f64| system_witness(inst, &balls, eps, cfg.eta);

    let Some(mut best) = probe(cfg.eps_tol)? else {
        return Err(Error::Infeasible(format!("no separating classifier at slack {}", cfg.eps_tol)));
    };
    let mut lo = cfg.eps_tol;
    let max_r = inst.points.iter().map(|p| p.r.abs()).fold(0.0, f64::max);
    let mut spread: f64 = 0.0;
    for (i, a) in inst.points.iter().enumerate() {
        let l = inst.seminorm_for(i)?;
        for b in &inst.points {
            spread = spread.max(l.eval(&sub(&a.x, &b.x))?);
        }
    }
    let mut hi = max_r + spread + 1.0;
    let mut doublings = 0;
    loop {
        match probe(hi)? {
            Some(wit) => {
                lo = hi;
                best = wit;
                if doublings == cfg.max_bisections {
                    break;
                }
                hi *= 2.0;
                doublings += 1;
            }
            None => break,
        }
    }
    let mut bisections = 0;
    if lo < hi {
        for _ in 0..cfg.max_bisections {
            if hi - lo <= cfg.eps_tol * hi {
                break;
            }
            bisections += 1;
            let mid = 0.5 * (lo + hi);
            match probe(mid)? {
                Some(wit) => {
                    lo = mid;
                    best = wit;
                }
                None => hi = mid,
            }
        }
    }
    let (mut h, _) = best;
    for ball in &balls {
        for k in &ball.kernel {
            h.w = axpy(&h.w, -dot(k, &h.w), k);
        }
    }
    let mut alpha: f64 = 0.0;
    for i in 0..inst.len() {
        let a = inst.seminorm_for(i)?.dual_value(&h.w)?;
        alpha = alpha.max(a);
    }
    let mut sol = finish(inst, h, lo, alpha)?;
    sol.iterations = bisections;
    Ok(sol)
}

/// Deterministic, roughly uniform unit directions in R^d.
pub fn sphere_directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    match d {
        0 => vec![],
        1 => vec![vec![1.0], vec![-1.0]],
        2 => {
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            (0..count)
                .map(|k| {
                    let a = std::f64::consts::TAU * ((k as f64 * phi) % 1.0);
                    vec![a.cos(), a.sin()]
                })
                .collect()
        }
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let rad = (1.0 - z * z).max(0.0).sqrt();
                    let a = golden * k as f64;
                    vec![rad * a.cos(), rad * a.sin(), z]
                })
                .collect()
        }
        _ => {
            // Kronecker sequence pushed through the normal quantile, then normalized.
            let normal = Normal::new(0.0, 1.0).expect("standard normal");
            let primes = first_primes(d);
            (0..count)
                .map(|k| {
                    let v: Vec<f64> = primes
                        .iter()
                        .map(|&p| {
                            let u = ((k as f64 + 0.5) * (p as f64).sqrt()) % 1.0;
                            normal.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12))
                        })
                        .collect();
                    let n = norm2(&v);
                    scale(&v, 1.0 / n)
                })
                .collect()
        }
    }
}

fn first_primes(k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    let mut c = 2u64;
    while out.len() < k {
        if (2..c).take_while(|q| q * q <= c).all(|q| !c.is_multiple_of(q)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Offset above which point `i` is labeled +1 under normal `w`: the label is
/// +1 iff `b >= threshold`.
fn label_threshold(inst: &StrategicInstance, i: usize, w: &[f64]) -> Result<f64> {
    let p = &inst.points[i];
    match &inst.cost {
        CostModel::Invariant { .. } | CostModel::InstanceWise { .. } => {
            let dual = inst.seminorm_for(i)?.dual_value(w)?;
            Ok(if dual.is_infinite() {
                if p.r > 0.0 {
                    f64::NEG_INFINITY
                } else if p.r < 0.0 {
                    f64::INFINITY
                } else {
                    -dot(w, &p.x)
                }
            } else {
                -dot(w, &p.x) - p.r * dual
            })
        }
        CostModel::ZeroCostRegion { space, regions } => {
            let reach = std::iter::once(&p.x).chain(regions[i].iter().map(|&j| &space[j]));
            let vals = reach.map(|z| -dot(w, z));
            Ok(if p.r > 0.0 {
                vals.fold(f64::INFINITY, f64::min)
            } else if p.r < 0.0 {
                vals.fold(f64::NEG_INFINITY, f64::max)
            } else {
                -dot(w, &p.x)
            })
        }
        CostModel::Separable { .. } => invalid("brute force does not support separable costs"),
    }
}

/// Best offset for a fixed normal: `(errors, b)`.
fn best_offset(inst: &StrategicInstance, w: &[f64]) -> Result<(usize, f64)> {
    let n = inst.len();
    let mut cuts: Vec<(f64, Label)> =
        (0..n).map(|i| Ok((label_threshold(inst, i, w)?, inst.points[i].y))).collect::<Result<_>>()?;
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let finite: Vec<f64> = cuts.iter().map(|c| c.0).filter(|v| v.is_finite()).collect();
    let low = finite.first().copied().unwrap_or(0.0) - 1.0;
    // Start below every finite threshold: only -inf thresholds are positive.
    let mut errors = cuts.iter().filter(|(t, y)| (*t <= low) != (*y == 1)).count();
    let mut best = (errors, low);
    let mut k = 0;
    while k < n {
        let t = cuts[k].0;
        if !t.is_finite() || t <= low {
            k += 1;
            continue;
        }
        // Moving b up to t turns every point with this threshold positive.
        while k < n && cuts[k].0 == t {
            if cuts[k].1 == 1 {
                errors -= 1;
            } else {
                errors += 1;
            }
            k += 1;
        }
        if errors < best.0 {
            best = (errors, t);
        }
    }
    Ok(best)
}

/// Sweep `direction_budget` directions, trying every breakpoint offset.
pub fn serm_bruteforce(inst: &StrategicInstance, direction_budget: usize) -> Result<SermSolution> {
    if inst.is_empty() {
        return invalid("empty instance");
    }
    if matches!(inst.cost, CostModel::Separable { .. }) {
        return invalid("brute force does not support separable costs");
    }
    let d = inst.dim;
    let mut dirs = sphere_directions(d, direction_budget.max(1));
    if let CostModel::Invariant { seminorm } = &inst.cost {
        let kernel = seminorm.kernel();
        if !kernel.is_empty() {
            // Random directions almost never avoid the kernel, so add their projections.
            let extra: Vec<Vec<f64>> = dirs
                .iter()
                .filter_map(|v| {
                    let mut u = v.clone();
                    for k in kernel {
                        u = axpy(&u, -dot(k, &u), k);
                    }
                    let n = norm2(&u);
                    (n > 1e-9).then(|| scale(&u, 1.0 / n))
                })
                .collect();
            dirs.extend(extra);
        }
    }
    let results: Vec<Result<(usize, f64)>> = dirs.par_iter().map(|w| best_offset(inst, w)).collect();
    // Constant classifiers first, so they win ties.
    let pos = inst.points.iter().filter(|p| p.y == 1).count();
    let neg = inst.len() - pos;
    let mut best = if neg <= pos { (neg, Hyperplane::constant(d, 1.0)) } else { (pos, Hyperplane::constant(d, -1.0)) };
    for (w, r) in dirs.iter().zip(results) {
        let (errors, b) = r?;
        if errors < best.0 {
            best = (errors, Hyperplane::new(w.clone(), b));
        }
    }
    let h = best.1;
    let loss = strategic_loss(&h, inst)?;
    let certificate = if inst.cost.is_seminorm() { check_solution(inst, &h)? } else { Vec::new() };
    let alpha = if h.is_constant() || !inst.cost.is_seminorm() {
        0.0
    } else {
        let mut a: f64 = 0.0;
        for i in 0..inst.len() {
            a = a.max(inst.seminorm_for(i)?.dual_value(&h.w)?);
        }
        a
    };
    let status = if loss == 0.0 { SermStatus::Separated } else { SermStatus::Infeasible };
    Ok(SermSolution { status, h, epsilon: 0.0, alpha, loss, iterations: 0, certificate })
}

/// Plain 0-1 disagreement, for reporting next to the strategic loss.
pub fn raw_errors(inst: &StrategicInstance, h: &Hyperplane) -> usize {
    inst.points.iter().filter(|p| predict_raw(h, &p.x) != p.y).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate_instance, GeneratorConfig, PreferenceMode};
    use crate::geometry::PNorm;
    use crate::strategic::{DataPoint, InstanceMeta};

    fn inst(d: usize, l: Seminorm, pts: Vec<DataPoint>) -> StrategicInstance {
        StrategicInstance::new(d, CostModel::Invariant { seminorm: l }, pts, InstanceMeta::default()).unwrap()
    }

    fn one_dim_example() -> StrategicInstance {
        inst(1, Seminorm::l2(1), vec![DataPoint::new(vec![0.0], 1, 0.0), DataPoint::new(vec![5.0], -1, 1.0)])
    }

    /// Grid over (w, b) in [-1,1] x [-10,10] for the relaxed program's objective.
    fn grid_max_slack(inst: &StrategicInstance) -> (f64, f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 0..=200 {
            let w = -1.0 + i as f64 * 0.01;
            for j in 0..=2000 {
                let b = -10.0 + j as f64 * 0.01;
                let feasible_pos = inst.points.iter().filter(|p| p.y == 1).all(|p| w * p.x[0] + b >= -p.r - 1e-12);
                if !feasible_pos {
                    continue;
                }
                let slack = inst
                    .points
                    .iter()
                    .filter(|p| p.y == -1)
                    .map(|p| -p.r - (w * p.x[0] + b))
                    .fold(f64::INFINITY, f64::min);
                if slack > best.0 {
                    best = (slack, w, b);
                }
            }
        }
        best
    }

    #[test]
    fn one_dimensional_relaxation_matches_grid() {
        let example = one_dim_example();
        let (slack, gw, gb) = grid_max_slack(&example);
        assert!((slack - 4.0).abs() < 1e-9 && (gw + 1.0).abs() < 1e-9 && gb.abs() < 1e-9);
        let sol = serm_invariant_essentially_adversarial(&example).unwrap();
        assert_eq!(sol.status, SermStatus::Separated);
        assert!((sol.h.w[0] + 1.0).abs() < 1e-9, "{:?}", sol.h);
        assert!(sol.h.b.abs() < 1e-9);
        assert!((sol.epsilon - 4.0).abs() < 1e-9);
        assert!((sol.alpha - 1.0).abs() < 1e-9);
        assert_eq!(sol.loss, 0.0);
    }

    #[test]
    fn rescaling_substitution() {
        let (h, eps) = rescale_relaxed(&[-0.5], 0.0, 2.0, 0.5, 1.0, 0.0);
        assert_eq!(h.w, vec![-1.0]);
        assert!((h.b - 0.5).abs() < 1e-15);
        assert_eq!(eps, 4.0);
    }

    #[test]
    fn regime_violation_is_reported() {
        let bad = inst(1, Seminorm::l2(1), vec![DataPoint::new(vec![0.0], 1, 5.0), DataPoint::new(vec![1.0], -1, 0.0)]);
        assert!(matches!(serm_invariant_essentially_adversarial(&bad), Err(Error::RegimeViolation(_))));
        assert!(matches!(serm_instancewise_adversarial(&bad, 1e-6), Err(Error::RegimeViolation(_))));
    }

    #[test]
    fn non_separable_instance_is_infeasible() {
        // A negative between two positives on a line cannot be cut out by a halfspace.
        let pts = vec![
            DataPoint::new(vec![-1.0], 1, 0.0),
            DataPoint::new(vec![0.0], -1, 0.0),
            DataPoint::new(vec![1.0], 1, 0.0),
        ];
        let x = inst(1, Seminorm::l2(1), pts);
        assert!(matches!(serm_invariant_essentially_adversarial(&x), Err(Error::Infeasible(_))));
        assert!(matches!(serm_instancewise_adversarial(&x, 1e-6), Err(Error::Infeasible(_))));
        assert!(serm_bruteforce(&x, 10).unwrap().loss > 0.0);
    }

    #[test]
    fn single_label_instances() {
        let only_pos = inst(2, Seminorm::l2(2), vec![DataPoint::new(vec![1.0, 2.0], 1, -3.0)]);
        let sol = serm_invariant_essentially_adversarial(&only_pos).unwrap();
        assert_eq!(sol.loss, 0.0);
        let only_neg = inst(2, Seminorm::l1(2), vec![DataPoint::new(vec![1.0, 2.0], -1, 3.0)]);
        assert_eq!(serm_invariant_essentially_adversarial(&only_neg).unwrap().loss, 0.0);
        assert_eq!(serm_instancewise_adversarial(&only_neg, 1e-6).unwrap().loss, 0.0);
        assert_eq!(serm_bruteforce(&only_neg, 8).unwrap().loss, 0.0);
    }

    #[test]
    fn zero_preferences_reduce_to_margin_separation() {
        let pts = vec![
            DataPoint::new(vec![0.0, 0.0], 1, 0.0),
            DataPoint::new(vec![1.0, 0.0], 1, 0.0),
            DataPoint::new(vec![0.0, 3.0], -1, 0.0),
            DataPoint::new(vec![1.0, 3.0], -1, 0.0),
        ];
        let x = inst(2, Seminorm::linf(2), pts);
        let sol = serm_instancewise_adversarial(&x, 1e-7).unwrap();
        assert_eq!(sol.loss, 0.0);
        // The best normal is vertical; the linf dual of (0, -1) is 1, so the slack is the gap 3.
        assert!((sol.epsilon - 3.0).abs() < 1e-5, "{}", sol.epsilon);
    }

    #[test]
    fn check_solution_cases_and_flip() {
        let cfg = GeneratorConfig::invariant(2, 30, Seminorm::l2(2), PreferenceMode::General);
        let g = generate_instance(&cfg, 11).unwrap();
        let truth = g.meta.ground_truth.clone().unwrap();
        let rows = check_solution(&g, &truth).unwrap();
        assert!(rows.iter().all(|r| r.pass && r.margin > 0.0));
        assert!(rows.iter().any(|r| r.case != rows[0].case));
        let flipped = check_solution(&g, &truth.flipped()).unwrap();
        assert!(flipped.iter().any(|r| !r.pass));
    }

    #[test]
    fn solvers_and_oracle_agree_on_generated_instances() {
        for seed in 0..6 {
            let cfg = GeneratorConfig::invariant(
                2,
                15,
                Seminorm::l2(2),
                PreferenceMode::EssentiallyAdversarial { threshold: 0.5 },
            );
            let g = generate_instance(&cfg, seed).unwrap();
            let s1 = serm_invariant_essentially_adversarial(&g).unwrap();
            assert_eq!(s1.loss, 0.0);
            assert!((g.seminorm_for(0).unwrap().dual_value(&s1.h.w).unwrap() - 1.0).abs() <= 1e-7);
            assert!(s1.alpha <= 1.0 + 1e-12);
            assert_eq!(serm_bruteforce(&g, 1000).unwrap().loss, 0.0, "seed {seed}");

            let cfg = GeneratorConfig::instance_wise(2, 15, PNorm::Two, (0.5, 2.0));
            let g = generate_instance(&cfg, seed).unwrap();
            let s2 = serm_instancewise_adversarial(&g, 1e-6).unwrap();
            assert_eq!(s2.loss, 0.0);
            assert!(s2.epsilon > 0.0);
            assert_eq!(serm_bruteforce(&g, 1000).unwrap().loss, 0.0, "seed {seed}");
        }
    }

    #[test]
    fn oblique_normal_is_found() {
        // Positives and negatives split along the anti-diagonal only.
        let pts = vec![
            DataPoint::new(vec![0.0, 0.0], 1, 0.0),
            DataPoint::new(vec![2.0, -2.0], 1, -0.1),
            DataPoint::new(vec![-2.0, 2.0], 1, 0.0),
            DataPoint::new(vec![1.0, 1.0], -1, 0.2),
            DataPoint::new(vec![3.0, -1.0], -1, 0.0),
            DataPoint::new(vec![-1.0, 3.0], -1, 0.1),
        ];
        let costs = (0..6).map(|i| Seminorm::scaled_l2(2, 1.0 + i as f64 * 0.2).unwrap()).collect();
        let x = StrategicInstance::new(2, CostModel::InstanceWise { seminorms: costs }, pts, InstanceMeta::default())
            .unwrap();
        let sol = serm_instancewise_adversarial(&x, 1e-6).unwrap();
        assert_eq!(sol.loss, 0.0);
        let w = &sol.h.w;
        assert!(w[0] < 0.0 && w[1] < 0.0 && (w[0] / w[1] - 1.0).abs() < 0.5, "{w:?}");
        assert_eq!(serm_bruteforce(&x, 2000).unwrap().loss, 0.0);
        for k in [axis(1.0, 0.0), axis(-1.0, 0.0), axis(0.0, 1.0), axis(0.0, -1.0)] {
            assert!(best_offset(&x, &k).unwrap().0 > 0);
        }
    }

    fn axis(a: f64, b: f64) -> Vec<f64> {
        vec![a, b]
    }

    #[test]
    fn bisection_feasibility_is_monotone() {
        let cfg = GeneratorConfig::instance_wise(2, 12, PNorm::One, (0.5, 2.0));
        let g = generate_instance(&cfg, 5).unwrap();
        let sol = serm_instancewise_adversarial(&g, 1e-6).unwrap();
        for frac in [0.1, 0.25, 0.5, 0.75, 0.99] {
            assert!(system_feasible_at(&g, sol.epsilon * frac).unwrap());
        }
        assert!(!system_feasible_at(&g, sol.epsilon * 1.01 + 1e-6).unwrap());
    }

    #[test]
    fn solutions_are_deterministic() {
        let cfg = GeneratorConfig::invariant(2, 20, Seminorm::l1(2), PreferenceMode::Adversarial);
        let g = generate_instance(&cfg, 9).unwrap();
        let a = serde_json::to_string(&serm_invariant_essentially_adversarial(&g).unwrap()).unwrap();
        let b = serde_json::to_string(&serm_invariant_essentially_adversarial(&g).unwrap()).unwrap();
        assert_eq!(a, b);
        let a = serde_json::to_string(&serm_bruteforce(&g, 300).unwrap()).unwrap();
        let b = serde_json::to_string(&serm_bruteforce(&g, 300).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_cost_is_handled() {
        let l = Seminorm::degenerate(Seminorm::l1(1), vec![vec![0.0, 1.0]]).unwrap();
        let cfg = GeneratorConfig::invariant(2, 20, l, PreferenceMode::EssentiallyAdversarial { threshold: 1.0 });
        let g = generate_instance(&cfg, 3).unwrap();
        let sol = serm_invariant_essentially_adversarial(&g).unwrap();
        assert_eq!(sol.loss, 0.0);
        assert!(sol.h.w[1].abs() < 1e-12);
        assert_eq!(serm_bruteforce(&g, 50).unwrap().loss, 0.0);
    }

    #[test]
    fn sphere_directions_are_unit() {
        for d in 1..6 {
            for v in sphere_directions(d, 40) {
                assert!((norm2(&v) - 1.0).abs() < 1e-12);
            }
        }
    }
}
