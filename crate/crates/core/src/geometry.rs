//! Seminorms, their duals, polytope gauges and the minimum cost of moving a
//! point onto a hyperplane.
//!
//! A seminorm `l` induces the manipulation cost `c(z; x) = l(z - x)`. Its
//! dual `l*(w) = sup { w.z : l(z) <= 1 }` turns the cost of reaching the
//! hyperplane `w.x + b = 0` into `|w.x + b| / l*(w)`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{complement_basis, dot, norm2, orthonormalize, rank, scale, solve};
use crate::lp::{solve_lp, LinearProgram, Relation, Sense};

/// Default tolerance for sign decisions at decision boundaries.
pub const DEFAULT_ETA: f64 = 1e-9;

/// Exponent of a weighted lp seminorm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PNorm {
    One,
    Two,
    Inf,
}

impl Serialize for PNorm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PNorm::One => s.serialize_u8(1),
            PNorm::Two => s.serialize_u8(2),
            PNorm::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PNorm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v == 1.0 => Ok(PNorm::One),
            Raw::Num(v) if v == 2.0 => Ok(PNorm::Two),
            Raw::Str(s) if s.eq_ignore_ascii_case("inf") => Ok(PNorm::Inf),
            _ => Err(serde::de::Error::custom("p must be 1, 2 or \"inf\"")),
        }
    }
}

/// Wire format of a seminorm.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SeminormRepr {
    Lp { p: PNorm, weights: Vec<f64> },
    Polytope { vertices: Vec<Vec<f64>> },
    Degenerate { base: Box<Seminorm>, kernel_basis: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Lp { p: PNorm, weights: Vec<f64> },
    Polytope { vertices: Vec<Vec<f64>> },
    Degenerate {
        base: Box<Seminorm>,
        kernel_basis: Vec<Vec<f64>>,
        /// Orthonormalized kernel.
        kernel: Vec<Vec<f64>>,
        /// Orthonormal basis of the kernel's complement; the base acts on these coordinates.
        complement: Vec<Vec<f64>>,
    },
}

/// A seminorm on R^d: weighted lp, the gauge of a symmetric polytope, or a base
/// seminorm applied after projecting out a kernel subspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeminormRepr", into = "SeminormRepr")]
pub struct Seminorm {
    kind: Kind,
    dim: usize,
}

impl TryFrom<SeminormRepr> for Seminorm {
    type Error = Error;
    fn try_from(r: SeminormRepr) -> Result<Self> {
        match r {
            SeminormRepr::Lp { p, weights } => Seminorm::lp(p, weights),
            SeminormRepr::Polytope { vertices } => Seminorm::polytope(vertices),
            SeminormRepr::Degenerate { base, kernel_basis } => Seminorm::degenerate(*base, kernel_basis),
        }
    }
}

impl From<Seminorm> for SeminormRepr {
    fn from(s: Seminorm) -> Self {
        match s.kind {
            Kind::Lp { p, weights } => SeminormRepr::Lp { p, weights },
            Kind::Polytope { vertices } => SeminormRepr::Polytope { vertices },
            Kind::Degenerate { base, kernel_basis, .. } => SeminormRepr::Degenerate { base, kernel_basis },
        }
    }
}

/// Dual norm value with a unit-ball element attaining it, when one exists.
#[derive(Clone, Debug, PartialEq)]
pub struct DualValue {
    pub value: f64,
    pub maximizer: Option<Vec<f64>>,
}

/// Outer polytope approximation of a unit ball, used to linearize `l*(w) <= t`
/// as `w.v <= t` for every vertex `v` plus `w.k = 0` for every kernel vector.
#[derive(Clone, Debug, PartialEq)]
pub struct BallPolytope {
    pub vertices: Vec<Vec<f64>>,
    pub kernel: Vec<Vec<f64>>,
    /// True when the vertex set reproduces the dual exactly.
    pub exact: bool,
    /// Bound on `approx_dual / dual - 1`.
    pub rel_error: f64,
}

impl BallPolytope {
    /// `max_v w.v`, or infinity when `w` is not orthogonal to the kernel.
    pub fn dual(&self, w: &[f64]) -> f64 {
        let scale_ref = norm2(w).max(1.0);
        if self.kernel.iter().any(|k| dot(k, w).abs() > 1e-9 * scale_ref) {
            return f64::INFINITY;
        }
        self.vertices.iter().map(|v| dot(v, w)).fold(0.0, f64::max)
    }
}

/// Limits for the polytope approximation of lp balls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxConfig {
    /// Vertex count of the circumscribed polygon used for l2 in the plane.
    pub l2_vertices_2d: usize,
    /// Cap on vertices per ball in any dimension.
    pub max_vertices: usize,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig { l2_vertices_2d: 256, max_vertices: 64 }
    }
}

/// Maps the seminorm-level errors of a dimension check.
fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return invalid(format!("dimension mismatch: expected {expected}, got {got}"));
    }
    Ok(())
}

impl Seminorm {
    pub fn lp(p: PNorm, weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return invalid("lp weights must be finite and positive");
        }
        let dim = weights.len();
        Ok(Seminorm { kind: Kind::Lp { p, weights }, dim })
    }

    pub fn l1(d: usize) -> Self {
        Seminorm::lp(PNorm::One, vec![1.0; d]).expect("unit weights")
    }

    pub fn l2(d: usize) -> Self {
        Seminorm::lp(PNorm::Two, vec![1.0; d]).expect("unit weights")
    }

    pub fn linf(d: usize) -> Self {
        Seminorm::lp(PNorm::Inf, vec![1.0; d]).expect("unit weights")
    }

    /// `k * ||.||_2` on R^d.
    pub fn scaled_l2(d: usize, k: f64) -> Result<Self> {
        Seminorm::lp(PNorm::Two, vec![k; d])
    }

    /// Gauge of `conv(vertices)`. The list must be origin-symmetric and span R^d.
    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = validate_symmetric_vertices(&vertices)?;
        if rank(&vertices, 1e-9) < dim {
            return invalid("polytope vertices do not span the ambient space");
        }
        Ok(Seminorm { kind: Kind::Polytope { vertices }, dim })
    }

    /// `base` applied to the coordinates of `v` in an orthonormal basis of the
    /// complement of `span(kernel_basis)`. The base acts on R^(d - k).
    pub fn degenerate(base: Seminorm, kernel_basis: Vec<Vec<f64>>) -> Result<Self> {
        if kernel_basis.is_empty() {
            return invalid("degenerate seminorm needs at least one kernel vector");
        }
        let dim = kernel_basis[0].len();
        if dim == 0 || kernel_basis.iter().any(|k| k.len() != dim || k.iter().any(|v| !v.is_finite())) {
            return invalid("kernel vectors must share a positive dimension and be finite");
        }
        let kernel = orthonormalize(&kernel_basis, 1e-9)
            .ok_or_else(|| Error::InvalidInput("kernel basis is linearly dependent".into()))?;
        let complement = complement_basis(&kernel, dim);
        if base.dim != dim - kernel.len() {
            return invalid(format!(
                "base seminorm acts on dimension {}, expected {}",
                base.dim,
                dim - kernel.len()
            ));
        }
        Ok(Seminorm {
            kind: Kind::Degenerate { base: Box::new(base), kernel_basis, kernel, complement },
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Orthonormal basis of the kernel (empty unless degenerate).
    pub fn kernel(&self) -> &[Vec<f64>] {
        match &self.kind {
            Kind::Degenerate { kernel, .. } => kernel,
            _ => &[],
        }
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel().len()
    }

    pub fn is_polytope(&self) -> bool {
        matches!(self.kind, Kind::Polytope { .. })
    }

    /// Evaluate `l(v)`.
    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        check_dim(self.dim, v.len())?;
        Ok(match &self.kind {
            Kind::Lp { p, weights } => match p {
                PNorm::One => v.iter().zip(weights).map(|(x, a)| a * x.abs()).sum(),
                PNorm::Two => v.iter().zip(weights).map(|(x, a)| (a * x).powi(2)).sum::<f64>().sqrt(),
                PNorm::Inf => v.iter().zip(weights).map(|(x, a)| a * x.abs()).fold(0.0, f64::max),
            },
            Kind::Polytope { vertices } => polygon_gauge(vertices, v)?,
            Kind::Degenerate { base, complement, .. } => {
                let coords: Vec<f64> = complement.iter().map(|u| dot(u, v)).collect();
                base.eval(&coords)?
            }
        })
    }

    /// `l*(w)` with a maximizing unit-ball element.
    pub fn dual(&self, w: &[f64]) -> Result<DualValue> {
        check_dim(self.dim, w.len())?;
        Ok(match &self.kind {
            Kind::Lp { p, weights } => lp_dual(*p, weights, w),
            Kind::Polytope { vertices } => {
                let mut best = 0usize;
                let mut val = f64::NEG_INFINITY;
                for (i, v) in vertices.iter().enumerate() {
                    let s = dot(v, w);
                    if s > val {
                        val = s;
                        best = i;
                    }
                }
                DualValue { value: val.max(0.0), maximizer: Some(vertices[best].clone()) }
            }
            Kind::Degenerate { base, kernel, complement, .. } => {
                let scale_ref = norm2(w).max(1.0);
                if kernel.iter().any(|k| dot(k, w).abs() > 1e-9 * scale_ref) {
                    DualValue { value: f64::INFINITY, maximizer: None }
                } else {
                    let coords: Vec<f64> = complement.iter().map(|u| dot(u, w)).collect();
                    let inner = base.dual(&coords)?;
                    let maximizer = inner.maximizer.map(|u| {
                        let mut z = vec![0.0; self.dim];
                        for (c, b) in u.iter().zip(complement) {
                            for (zi, bi) in z.iter_mut().zip(b) {
                                *zi += c * bi;
                            }
                        }
                        z
                    });
                    DualValue { value: inner.value, maximizer }
                }
            }
        })
    }

    pub fn dual_value(&self, w: &[f64]) -> Result<f64> {
        self.dual(w).map(|d| d.value)
    }

    /// Outer polytope approximation of the unit ball (exact except for l2 in d >= 2).
    pub fn ball_polytope(&self, cfg: &ApproxConfig) -> Result<BallPolytope> {
        match &self.kind {
            Kind::Lp { p, weights } => lp_ball(*p, weights, cfg),
            Kind::Polytope { vertices } => Ok(BallPolytope {
                vertices: vertices.clone(),
                kernel: Vec::new(),
                exact: true,
                rel_error: 0.0,
            }),
            Kind::Degenerate { base, kernel, complement, .. } => {
                let inner = base.ball_polytope(cfg)?;
                let vertices = inner
                    .vertices
                    .iter()
                    .map(|u| {
                        let mut z = vec![0.0; self.dim];
                        for (c, b) in u.iter().zip(complement) {
                            for (zi, bi) in z.iter_mut().zip(b) {
                                *zi += c * bi;
                            }
                        }
                        z
                    })
                    .collect();
                Ok(BallPolytope { vertices, kernel: kernel.clone(), exact: inner.exact, rel_error: inner.rel_error })
            }
        }
    }
}

fn lp_dual(p: PNorm, weights: &[f64], w: &[f64]) -> DualValue {
    let d = w.len();
    if d == 0 {
        return DualValue { value: 0.0, maximizer: Some(Vec::new()) };
    }
    match p {
        PNorm::One => {
            let mut best = 0usize;
            let mut val = -1.0;
            for i in 0..d {
                let s = w[i].abs() / weights[i];
                if s > val {
                    val = s;
                    best = i;
                }
            }
            let mut z = vec![0.0; d];
            z[best] = if w[best] >= 0.0 { 1.0 } else { -1.0 } / weights[best];
            DualValue { value: val, maximizer: Some(z) }
        }
        PNorm::Two => {
            let val = w.iter().zip(weights).map(|(x, a)| (x / a).powi(2)).sum::<f64>().sqrt();
            let z = if val > 0.0 {
                w.iter().zip(weights).map(|(x, a)| x / (a * a) / val).collect()
            } else {
                vec![0.0; d]
            };
            DualValue { value: val, maximizer: Some(z) }
        }
        PNorm::Inf => {
            let val = w.iter().zip(weights).map(|(x, a)| x.abs() / a).sum();
            let z = w.iter().zip(weights).map(|(x, a)| if *x >= 0.0 { 1.0 } else { -1.0 } / a).collect();
            DualValue { value: val, maximizer: Some(z) }
        }
    }
}

fn lp_ball(p: PNorm, weights: &[f64], cfg: &ApproxConfig) -> Result<BallPolytope> {
    let d = weights.len();
    let exact = |vertices| Ok(BallPolytope { vertices, kernel: Vec::new(), exact: true, rel_error: 0.0 });
    if d == 0 {
        return exact(Vec::new());
    }
    match p {
        PNorm::One => {
            let mut vs = Vec::with_capacity(2 * d);
            for i in 0..d {
                for s in [1.0, -1.0] {
                    let mut v = vec![0.0; d];
                    v[i] = s / weights[i];
                    vs.push(v);
                }
            }
            exact(vs)
        }
        PNorm::Inf => {
            if d >= 63 || (1usize << d) > cfg.max_vertices {
                return Err(Error::ResourceLimit(format!("l-infinity ball in dimension {d} exceeds the vertex cap")));
            }
            let vs = (0..1usize << d)
                .map(|mask| (0..d).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 } / weights[i]).collect())
                .collect();
            exact(vs)
        }
        PNorm::Two => {
            if d == 1 {
                return exact(vec![vec![1.0 / weights[0]], vec![-1.0 / weights[0]]]);
            }
            let (sphere, inradius) = sphere_cover(d, cfg)?;
            let lift = 1.0 / inradius;
            let vertices = sphere
                .iter()
                .map(|u| u.iter().zip(weights).map(|(x, a)| x * lift / a).collect())
                .collect();
            Ok(BallPolytope { vertices, kernel: Vec::new(), exact: false, rel_error: lift - 1.0 })
        }
    }
}

/// Symmetric unit vectors together with the inradius of their convex hull.
fn sphere_cover(d: usize, cfg: &ApproxConfig) -> Result<(Vec<Vec<f64>>, f64)> {
    if d == 2 {
        let m = cfg.l2_vertices_2d.max(4) & !1;
        if m > cfg.max_vertices.max(cfg.l2_vertices_2d) {
            return Err(Error::ResourceLimit("polygon vertex count exceeds cap".into()));
        }
        let pts = (0..m)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        return Ok((pts, (std::f64::consts::PI / m as f64).cos()));
    }
    let full = 3usize.checked_pow(d as u32).map(|v| v - 1);
    let pts: Vec<Vec<f64>> = if full.is_some_and(|c| c <= cfg.max_vertices) {
        ternary_directions(d)
    } else if d < 63 && 2 * d + (1usize << d) <= cfg.max_vertices {
        let mut v = cross_polytope(d);
        let s = 1.0 / (d as f64).sqrt();
        for mask in 0..1usize << d {
            v.push((0..d).map(|i| if mask >> i & 1 == 1 { -s } else { s }).collect());
        }
        v
    } else {
        if 2 * d > cfg.max_vertices {
            return Err(Error::ResourceLimit(format!("l2 ball in dimension {d} exceeds the vertex cap")));
        }
        return Ok((cross_polytope(d), 1.0 / (d as f64).sqrt()));
    };
    let r = cached_inradius(d, pts.len(), &pts);
    Ok((pts, r))
}

fn cross_polytope(d: usize) -> Vec<Vec<f64>> {
    let mut v = Vec::with_capacity(2 * d);
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            v.push(e);
        }
    }
    v
}

fn ternary_directions(d: usize) -> Vec<Vec<f64>> {
    let total = 3usize.pow(d as u32);
    let mut out = Vec::with_capacity(total - 1);
    for code in 0..total {
        let mut c = code;
        let v: Vec<f64> = (0..d)
            .map(|_| {
                let digit = c % 3;
                c /= 3;
                digit as f64 - 1.0
            })
            .collect();
        let n = norm2(&v);
        if n > 0.0 {
            out.push(scale(&v, 1.0 / n));
        }
    }
    out
}

fn cached_inradius(d: usize, count: usize, pts: &[Vec<f64>]) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&r) = cache.lock().unwrap().get(&(d, count)) {
        return r;
    }
    let r = hull_inradius(pts);
    cache.lock().unwrap().insert((d, count), r);
    r
}

/// Distance from the origin to the nearest facet of `conv(pts)`, found by
/// enumerating hyperplanes through d-subsets of the points.
pub(crate) fn hull_inradius(pts: &[Vec<f64>]) -> f64 {
    let d = pts[0].len();
    let n = pts.len();
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| pts[i].clone()).collect();
        if let Some(normal) = solve(&rows, &vec![1.0; d]) {
            if normal.iter().all(|v| v.is_finite()) && pts.iter().all(|p| dot(p, &normal) <= 1.0 + 1e-9) {
                let dist = 1.0 / norm2(&normal);
                if dist < best {
                    best = dist;
                }
            }
        }
        // Next combination.
        let mut k = d;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < n - d + k {
                idx[k] += 1;
                for j in k + 1..d {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Checks origin symmetry and shape; returns the dimension.
fn validate_symmetric_vertices(vertices: &[Vec<f64>]) -> Result<usize> {
    if vertices.is_empty() {
        return invalid("polytope needs at least one vertex");
    }
    let dim = vertices[0].len();
    if dim == 0 || vertices.iter().any(|v| v.len() != dim || v.iter().any(|x| !x.is_finite())) {
        return invalid("polytope vertices must share a positive dimension and be finite");
    }
    for v in vertices {
        let scale_ref = norm2(v).max(1.0);
        let found = vertices.iter().any(|u| u.iter().zip(v).all(|(a, b)| (a + b).abs() <= 1e-9 * scale_ref));
        if !found {
            return invalid("polytope vertex list is not origin-symmetric");
        }
    }
    Ok(dim)
}

/// `l(v)` for any seminorm.
pub fn eval_seminorm(l: &Seminorm, v: &[f64]) -> Result<f64> {
    l.eval(v)
}

/// `l*(w)`; infinite exactly when `w` is not orthogonal to the kernel of `l`.
pub fn dual_norm(l: &Seminorm, w: &[f64]) -> Result<f64> {
    l.dual_value(w)
}

/// A hyperplane `w.x + b = 0`; points with `w.x + b >= 0` are labeled +1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub w: Vec<f64>,
    pub b: f64,
}

impl Hyperplane {
    pub fn new(w: Vec<f64>, b: f64) -> Self {
        Hyperplane { w, b }
    }

    /// Classifier with `w = 0`, labeling everything by the sign of `b`.
    pub fn constant(d: usize, b: f64) -> Self {
        Hyperplane { w: vec![0.0; d], b }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn is_constant(&self) -> bool {
        self.w.iter().all(|v| *v == 0.0)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }

    pub fn flipped(&self) -> Self {
        Hyperplane { w: self.w.iter().map(|v| -v).collect(), b: -self.b }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Hyperplane { w: scale(&self.w, s), b: self.b * s }
    }
}

/// Minimum of `l(z - x)` over the hyperplane: `|w.x + b| / l*(w)`.
///
/// When `l*(w)` is infinite the kernel of `l` contains a direction that
/// crosses the hyperplane for free, so the cost is 0.
pub fn min_cost_to_hyperplane(l: &Seminorm, x: &[f64], h: &Hyperplane) -> Result<f64> {
    check_dim(l.dim(), x.len())?;
    check_dim(l.dim(), h.w.len())?;
    let dual = l.dual_value(&h.w)?;
    if dual == f64::INFINITY {
        return Ok(0.0);
    }
    if dual <= 0.0 {
        return Err(Error::DegenerateDirection);
    }
    Ok(h.value(x).abs() / dual)
}

/// Gauge of `v` with respect to `conv(vertices)`:
/// `min { sum lambda : sum lambda_j v_j = v, lambda >= 0 }`, infinite when `v`
/// lies outside the span of the vertices.
pub fn polygon_gauge(vertices: &[Vec<f64>], v: &[f64]) -> Result<f64> {
    let dim = validate_symmetric_vertices(vertices)?;
    check_dim(dim, v.len())?;
    if v.iter().all(|x| *x == 0.0) {
        return Ok(0.0);
    }
    // A listed vertex (or a positive multiple of one) sits on a ray through a
    // vertex; the LP below handles the general case.
    let m = vertices.len();
    let mut lp = LinearProgram::new(Sense::Minimize, m);
    lp.objective = vec![1.0; m];
    lp.bounds = vec![(0.0, f64::INFINITY); m];
    for i in 0..dim {
        lp.add(vertices.iter().map(|u| u[i]).collect(), Relation::Eq, v[i]);
    }
    match solve_lp(&lp) {
        Ok(sol) => Ok(sol.objective.max(0.0)),
        Err(Error::Infeasible(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square() -> Vec<Vec<f64>> {
        vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]
    }

    fn degenerate_second_axis() -> Seminorm {
        Seminorm::degenerate(Seminorm::l2(1), vec![vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn euclidean_eval() {
        assert_eq!(Seminorm::l2(2).eval(&[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn polytope_gauge_of_vertex_is_one() {
        let l = Seminorm::polytope(square()).unwrap();
        assert!((l.eval(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_kills_kernel() {
        assert_eq!(degenerate_second_axis().eval(&[0.0, 7.0]).unwrap(), 0.0);
        assert_eq!(degenerate_second_axis().eval(&[-2.0, 7.0]).unwrap(), 2.0);
    }

    #[test]
    fn l1_dual_is_linf() {
        assert_eq!(dual_norm(&Seminorm::l1(2), &[3.0, -4.0]).unwrap(), 4.0);
    }

    #[test]
    fn polytope_dual_is_vertex_max() {
        let l = Seminorm::polytope(square()).unwrap();
        assert_eq!(dual_norm(&l, &[3.0, -4.0]).unwrap(), 4.0);
    }

    #[test]
    fn degenerate_dual_infinite_off_complement() {
        assert_eq!(dual_norm(&degenerate_second_axis(), &[0.0, 1.0]).unwrap(), f64::INFINITY);
        assert_eq!(dual_norm(&degenerate_second_axis(), &[-3.0, 0.0]).unwrap(), 3.0);
    }

    #[test]
    fn min_cost_examples() {
        let h = Hyperplane::new(vec![3.0, 4.0], 5.0);
        assert!((min_cost_to_hyperplane(&Seminorm::l2(2), &[0.0, 0.0], &h).unwrap() - 1.0).abs() < 1e-15);
        let c = min_cost_to_hyperplane(&Seminorm::linf(2), &[0.0, 0.0], &h).unwrap();
        assert!((c - 5.0 / 7.0).abs() < 1e-15);
        assert_eq!(min_cost_to_hyperplane(&Seminorm::l2(2), &[-3.0, 1.0], &h).unwrap(), 0.0);
    }

    #[test]
    fn min_cost_degenerate_direction_and_free_crossing() {
        let h0 = Hyperplane::constant(2, 1.0);
        assert_eq!(min_cost_to_hyperplane(&Seminorm::l2(2), &[0.0, 0.0], &h0), Err(Error::DegenerateDirection));
        let h = Hyperplane::new(vec![0.0, 1.0], 5.0);
        assert_eq!(min_cost_to_hyperplane(&degenerate_second_axis(), &[1.0, 1.0], &h).unwrap(), 0.0);
    }

    #[test]
    fn gauge_of_edge_midpoint_and_origin() {
        assert!((polygon_gauge(&square(), &[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(polygon_gauge(&square(), &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn gauge_matches_grid_oracle() {
        // Frozen by the grid oracle below: min eps on a 1e-4 grid with v in eps*square.
        let oracle = |v: [f64; 2]| {
            let mut e = 0.0;
            while v[0].abs() + v[1].abs() > e + 1e-12 {
                e += 1e-4;
            }
            e
        };
        assert!((oracle([0.5, 0.5]) - 1.0).abs() < 2e-4);
        for v in [[0.3, -0.2], [1.5, 0.25], [-0.7, -0.7]] {
            let g = polygon_gauge(&square(), &v).unwrap();
            assert!((g - oracle(v)).abs() < 2e-4, "{v:?}: {g}");
        }
    }

    #[test]
    fn gauge_outside_span_is_infinite() {
        let seg = vec![vec![1.0, 1.0], vec![-1.0, -1.0]];
        assert_eq!(polygon_gauge(&seg, &[1.0, 0.0]).unwrap(), f64::INFINITY);
        assert!((polygon_gauge(&seg, &[2.0, 2.0]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_polytope_rejected() {
        assert!(Seminorm::polytope(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
        assert!(Seminorm::polytope(vec![vec![1.0, 1.0], vec![-1.0, -1.0]]).is_err());
    }

    #[test]
    fn json_round_trip() {
        for l in [
            Seminorm::l1(3),
            Seminorm::linf(2),
            Seminorm::polytope(square()).unwrap(),
            degenerate_second_axis(),
        ] {
            let s = serde_json::to_string(&l).unwrap();
            let back: Seminorm = serde_json::from_str(&s).unwrap();
            assert_eq!(back, l);
        }
        let s = serde_json::to_string(&Seminorm::linf(1)).unwrap();
        assert_eq!(s, r#"{"kind":"lp","p":"inf","weights":[1.0]}"#);
        let parsed: Seminorm = serde_json::from_str(r#"{"kind":"lp","p":2,"weights":[1,2]}"#).unwrap();
        assert_eq!(parsed.eval(&[0.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn l2_ball_polygon_is_outer_and_tight() {
        let cfg = ApproxConfig::default();
        let ball = Seminorm::l2(2).ball_polytope(&cfg).unwrap();
        assert_eq!(ball.vertices.len(), 256);
        for k in 0..1000 {
            let t = k as f64 * 0.0063;
            let w = [t.cos(), t.sin()];
            let approx = ball.dual(&w);
            assert!(approx >= 1.0 - 1e-12 && approx <= 1.0 + ball.rel_error + 1e-12);
        }
    }

    #[test]
    fn l2_ball_in_three_dimensions_is_outer() {
        let cfg = ApproxConfig::default();
        let ball = Seminorm::l2(3).ball_polytope(&cfg).unwrap();
        assert_eq!(ball.vertices.len(), 26);
        assert!(ball.rel_error > 0.0 && ball.rel_error < 0.25);
        let mut worst: f64 = 0.0;
        for i in 0..2000 {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / 2000.0;
            let phi = i as f64 * 2.399963229728653;
            let r = (1.0 - z * z).sqrt();
            let w = [r * phi.cos(), r * phi.sin(), z];
            let approx = ball.dual(&w);
            assert!(approx >= 1.0 - 1e-9, "{approx}");
            worst = worst.max(approx - 1.0);
        }
        assert!(worst <= ball.rel_error + 1e-9);
    }

    #[test]
    fn linf_ball_cap() {
        let cfg = ApproxConfig::default();
        assert!(Seminorm::linf(6).ball_polytope(&cfg).is_ok());
        assert!(matches!(Seminorm::linf(7).ball_polytope(&cfg), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn dimension_mismatch_is_invalid_input() {
        assert!(matches!(Seminorm::l2(2).eval(&[1.0]), Err(Error::InvalidInput(_))));
        assert!(matches!(dual_norm(&Seminorm::l2(2), &[1.0]), Err(Error::InvalidInput(_))));
    }

    fn arb_seminorm() -> impl Strategy<Value = Seminorm> {
        let lp = (prop_oneof![Just(PNorm::One), Just(PNorm::Two), Just(PNorm::Inf)], prop::collection::vec(0.2f64..3.0, 2))
            .prop_map(|(p, w)| Seminorm::lp(p, w).unwrap());
        let poly = prop::collection::vec((0.0f64..std::f64::consts::PI, 0.3f64..2.0), 2..5).prop_map(|pts| {
            let mut vs = Vec::new();
            for (t, r) in pts {
                vs.push(vec![r * t.cos(), r * t.sin()]);
                vs.push(vec![-r * t.cos(), -r * t.sin()]);
            }
            vs.push(vec![1.0, 0.0]);
            vs.push(vec![-1.0, 0.0]);
            vs.push(vec![0.0, 1.0]);
            vs.push(vec![0.0, -1.0]);
            Seminorm::polytope(vs).unwrap()
        });
        let degen = (0.0f64..std::f64::consts::PI, 0.2f64..3.0).prop_map(|(t, a)| {
            Seminorm::degenerate(Seminorm::lp(PNorm::Two, vec![a]).unwrap(), vec![vec![t.cos(), t.sin()]]).unwrap()
        });
        prop_oneof![lp, poly, degen]
    }

    fn vec2() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, 2)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn homogeneity(l in arb_seminorm(), v in vec2(), lam in -4.0f64..4.0) {
            let lhs = l.eval(&scale(&v, lam)).unwrap();
            let rhs = lam.abs() * l.eval(&v).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
        }

        #[test]
        fn triangle(l in arb_seminorm(), u in vec2(), v in vec2()) {
            let s: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
            prop_assert!(l.eval(&s).unwrap() <= l.eval(&u).unwrap() + l.eval(&v).unwrap() + 1e-9);
        }

        #[test]
        fn dual_bounds_inner_products(l in arb_seminorm(), w in vec2(), z in vec2()) {
            let lz = l.eval(&z).unwrap();
            let d = l.dual(&w).unwrap();
            if lz > 1e-12 && d.value.is_finite() {
                let zn = scale(&z, 1.0 / lz);
                prop_assert!(dot(&w, &zn) <= d.value + 1e-9);
            }
            if let Some(m) = d.maximizer {
                if d.value.is_finite() {
                    prop_assert!(l.eval(&m).unwrap() <= 1.0 + 1e-9);
                    prop_assert!((dot(&w, &m) - d.value).abs() <= 1e-6 * (1.0 + d.value));
                }
            }
        }

        #[test]
        fn min_cost_matches_projected_search(l in arb_seminorm(), w in vec2(), b in -3.0f64..3.0, x in vec2()) {
            prop_assume!(norm2(&w) > 0.1);
            let h = Hyperplane::new(w.clone(), b);
            let got = min_cost_to_hyperplane(&l, &x, &h).unwrap();
            if l.dual_value(&w).unwrap().is_infinite() {
                prop_assert_eq!(got, 0.0);
                return Ok(());
            }
            // Oracle: parametrize the line and scan densely, then refine by golden section.
            let wn = norm2(&w);
            let foot: Vec<f64> = x.iter().zip(&w).map(|(xi, wi)| xi - (dot(&w, &x) + b) * wi / (wn * wn)).collect();
            let dir = [-w[1] / wn, w[0] / wn];
            let f = |t: f64| l.eval(&[foot[0] + t * dir[0] - x[0], foot[1] + t * dir[1] - x[1]]).unwrap();
            let mut best_t = 0.0;
            let mut best = f64::INFINITY;
            let span = 60.0;
            let steps = 6000;
            for k in 0..=steps {
                let t = -span + 2.0 * span * k as f64 / steps as f64;
                let v = f(t);
                if v < best { best = v; best_t = t; }
            }
            let (mut lo, mut hi) = (best_t - 0.03, best_t + 0.03);
            for _ in 0..100 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if f(m1) < f(m2) { hi = m2 } else { lo = m1 }
            }
            let oracle = best.min(f(0.5 * (lo + hi)));
            prop_assert!((got - oracle).abs() <= 1e-6 * (1.0 + oracle), "got {got}, oracle {oracle}");
        }

        #[test]
        fn gauge_of_listed_vertex_is_one(angles in prop::collection::vec(0.0f64..std::f64::consts::PI, 2..6)) {
            // Points on the unit circle are all extreme points of their hull.
            let mut vs = Vec::new();
            for t in &angles {
                vs.push(vec![t.cos(), t.sin()]);
                vs.push(vec![-t.cos(), -t.sin()]);
            }
            for v in &vs {
                let g = polygon_gauge(&vs, v).unwrap();
                prop_assert!((g - 1.0).abs() <= 1e-12, "{g}");
            }
        }
    }
}
