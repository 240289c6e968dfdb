//! Dense two-phase simplex on a condensed (dictionary) tableau.
//!
//! Pivoting follows Bland's rule, so runs are deterministic and cannot cycle
//! in exact arithmetic. The tableau keeps only nonbasic columns, which keeps
//! the many-rows/few-columns programs built by the solvers cheap.

use serde::{Deserialize, Serialize};

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
    Feasibility,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

/// A linear program over `objective.len()` variables.
///
/// Every variable carries a `(lower, upper)` bound pair; infinite entries mean
/// the side is unbounded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

impl LinearProgram {
    /// Program with `n` free variables and a zero objective.
    pub fn new(sense: Sense, n: usize) -> Self {
        LinearProgram {
            sense,
            objective: vec![0.0; n],
            constraints: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return invalid("bounds length differs from objective length");
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return invalid("non-finite objective coefficient");
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return invalid(format!("bad bounds on variable {j}"));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return invalid(format!("constraint {i} has {} coefficients, expected {n}", c.coeffs.len()));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return invalid(format!("constraint {i} has a non-finite entry"));
            }
        }
        Ok(())
    }
}

const PIVOT_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;

/// How an original variable maps onto the nonnegative internal variables.
#[derive(Clone, Copy)]
enum VarMap {
    Shift { col: usize, offset: f64 },
    Mirror { col: usize, offset: f64 },
    Split { pos: usize, neg: usize },
}

/// Solve `lp`, returning an optimal vertex (or any feasible point for
/// `Sense::Feasibility`).
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();

    // Map variables onto y >= 0.
    let mut maps = Vec::with_capacity(n);
    let mut ny = 0usize;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: ny, offset: lo });
            if hi.is_finite() {
                extra_rows.push((ny, hi - lo));
            }
            ny += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Mirror { col: ny, offset: hi });
            ny += 1;
        } else {
            maps.push(VarMap::Split { pos: ny, neg: ny + 1 });
            ny += 2;
        }
    }

    // Rows in the form a.y <= b.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut a = vec![0.0; ny];
        let mut rhs = c.rhs;
        for (j, &v) in c.coeffs.iter().enumerate() {
            match maps[j] {
                VarMap::Shift { col, offset } => {
                    a[col] += v;
                    rhs -= v * offset;
                }
                VarMap::Mirror { col, offset } => {
                    a[col] -= v;
                    rhs -= v * offset;
                }
                VarMap::Split { pos, neg } => {
                    a[pos] += v;
                    a[neg] -= v;
                }
            }
        }
        match c.rel {
            Relation::Le => rows.push((a, rhs)),
            Relation::Ge => rows.push((a.iter().map(|v| -v).collect(), -rhs)),
            Relation::Eq => {
                rows.push((a.iter().map(|v| -v).collect(), -rhs));
                rows.push((a, rhs));
            }
        }
    }
    for (col, cap) in extra_rows {
        let mut a = vec![0.0; ny];
        a[col] = 1.0;
        rows.push((a, cap));
    }

    let sign = match lp.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
        Sense::Feasibility => 0.0,
    };
    let mut cy = vec![0.0; ny];
    for (j, &v) in lp.objective.iter().enumerate() {
        let v = sign * v;
        match maps[j] {
            VarMap::Shift { col, .. } => cy[col] += v,
            VarMap::Mirror { col, .. } => cy[col] -= v,
            VarMap::Split { pos, neg } => {
                cy[pos] += v;
                cy[neg] -= v;
            }
        }
    }

    let mut tab = Tableau::new(ny, rows);
    tab.find_feasible()?;
    let objective: Vec<(usize, f64)> = cy.iter().copied().enumerate().filter(|(_, c)| *c != 0.0).collect();
    tab.set_objective(&objective);
    tab.optimize()?;

    let y = tab.primal_values();
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, offset } => offset + y[col],
            VarMap::Mirror { col, offset } => offset - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
    Ok(LpSolution { x, objective, pivots: tab.pivots })
}

/// Dictionary `x_B[r] = beta[r] - sum_j a[r][j] * x_N[j]`, objective
/// `z = z0 + sum_j c[j] * x_N[j]`.
struct Tableau {
    m: usize,
    cols: usize,
    a: Vec<f64>,
    beta: Vec<f64>,
    c: Vec<f64>,
    z0: f64,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    ny: usize,
    pivots: usize,
    max_pivots: usize,
    /// Original rows `a.y <= b`, indexed by slack id minus `ny`.
    orig_a: Vec<Vec<f64>>,
    orig_b: Vec<f64>,
    /// Id of the phase-one artificial variable while it exists.
    art: Option<usize>,
    /// Current objective as `(variable id, coefficient)` pairs.
    objective: Vec<(usize, f64)>,
}

/// Rebuild the dictionary from the original rows this often.
const REFACTOR_EVERY: usize = 32;

impl Tableau {
    fn new(ny: usize, rows: Vec<(Vec<f64>, f64)>) -> Self {
        let m = rows.len();
        let cols = ny;
        let mut a = Vec::with_capacity(m * cols);
        let mut beta = Vec::with_capacity(m);
        let mut orig_a = Vec::with_capacity(m);
        for (row, rhs) in rows {
            a.extend_from_slice(&row);
            beta.push(rhs);
            orig_a.push(row);
        }
        let orig_b = beta.clone();
        Tableau {
            m,
            cols,
            a,
            beta,
            c: vec![0.0; cols],
            z0: 0.0,
            basic: (ny..ny + m).collect(),
            nonbasic: (0..ny).collect(),
            ny,
            pivots: 0,
            max_pivots: 50 * (m + ny) + 1000,
            orig_a,
            orig_b,
            art: None,
            objective: Vec::new(),
        }
    }

    #[inline]
    fn at(&self, r: usize, j: usize) -> f64 {
        self.a[r * self.cols + j]
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.at(r, j);
        let row_start = r * cols;
        for k in 0..cols {
            if k != j {
                self.a[row_start + k] /= p;
            }
        }
        self.a[row_start + j] = 1.0 / p;
        self.beta[r] /= p;
        let pivot_row: Vec<f64> = self.a[row_start..row_start + cols].to_vec();
        let beta_r = self.beta[r];
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * cols + j];
            if f == 0.0 {
                continue;
            }
            let base = i * cols;
            for k in 0..cols {
                if k != j {
                    self.a[base + k] -= f * pivot_row[k];
                }
            }
            self.a[base + j] = -f * pivot_row[j];
            self.beta[i] -= f * beta_r;
        }
        let cj = self.c[j];
        if cj != 0.0 {
            for k in 0..cols {
                if k != j {
                    self.c[k] -= cj * pivot_row[k];
                }
            }
            self.c[j] = -cj * pivot_row[j];
            self.z0 += cj * beta_r;
        }
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[j]);
        self.pivots += 1;
    }

    /// Bland's rule iterations until optimal; `Err(Unbounded)` on a ray.
    fn optimize(&mut self) -> Result<()> {
        loop {
            if self.pivots > self.max_pivots {
                return Err(Error::NumericalFailure("pivot limit exceeded".into()));
            }
            let mut enter: Option<usize> = None;
            for j in 0..self.cols {
                if self.c[j] > FEAS_TOL && enter.is_none_or(|e| self.nonbasic[j] < self.nonbasic[e]) {
                    enter = Some(j);
                }
            }
            let Some(j) = enter else {
                if self.refactor() {
                    // Fresh values may expose a remaining improving column.
                    if (0..self.cols).any(|j| self.c[j] > FEAS_TOL) {
                        continue;
                    }
                }
                return Ok(());
            };
            // Harris ratio test: among rows within tolerance of the tightest
            // ratio, pivot on the largest entry (lowest basic id on ties).
            let mut bound = f64::INFINITY;
            for r in 0..self.m {
                let arj = self.at(r, j);
                if arj > PIVOT_TOL {
                    bound = bound.min((self.beta[r].max(0.0) + FEAS_TOL) / arj);
                }
            }
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let arj = self.at(r, j);
                if arj > PIVOT_TOL && self.beta[r].max(0.0) / arj <= bound {
                    let better = match leave {
                        None => true,
                        Some((lr, la)) => arj > la || arj == la && self.basic[r] < self.basic[lr],
                    };
                    if better {
                        leave = Some((r, arj));
                    }
                }
            }
            let Some((r, _)) = leave else { return Err(Error::Unbounded) };
            self.pivot(r, j);
            if self.pivots.is_multiple_of(REFACTOR_EVERY) {
                self.refactor();
            }
        }
    }

    /// Phase one with a single artificial column.
    fn find_feasible(&mut self) -> Result<()> {
        let (worst, min_beta) = self
            .beta
            .iter()
            .enumerate()
            .fold((usize::MAX, 0.0), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
        if min_beta >= -FEAS_TOL {
            for b in &mut self.beta {
                if *b < 0.0 {
                    *b = 0.0;
                }
            }
            return Ok(());
        }
        // Append the artificial column x0 with coefficient -1 in every row.
        let art = self.ny + self.m;
        let old = self.cols;
        let mut a = Vec::with_capacity(self.m * (old + 1));
        for r in 0..self.m {
            a.extend_from_slice(&self.a[r * old..(r + 1) * old]);
            a.push(-1.0);
        }
        self.a = a;
        self.cols = old + 1;
        self.nonbasic.push(art);
        self.art = Some(art);
        self.set_objective(&[(art, -1.0)]);
        self.pivot(worst, old);
        self.optimize().map_err(|e| match e {
            Error::Unbounded => Error::NumericalFailure("phase one reported unbounded".into()),
            other => other,
        })?;
        if self.z0 < -FEAS_TOL * (1.0 + self.beta.iter().fold(0.0f64, |m, b| m.max(b.abs()))) {
            return Err(Error::Infeasible("linear program has no feasible point".into()));
        }
        // Drive the artificial variable out of the basis if it stayed there.
        if let Some(r) = self.basic.iter().position(|&v| v == art) {
            let mut best: Option<usize> = None;
            for j in 0..self.cols {
                if self.nonbasic[j] != art && best.is_none_or(|b| self.at(r, j).abs() > self.at(r, b).abs()) {
                    best = Some(j);
                }
            }
            match best {
                Some(j) if self.at(r, j).abs() > PIVOT_TOL => self.pivot(r, j),
                _ => {
                    // Redundant row: drop it, and the artificial with it.
                    self.remove_row(r);
                }
            }
        }
        if let Some(jart) = self.nonbasic.iter().position(|&v| v == art) {
            self.remove_col(jart);
        }
        self.art = None;
        for b in &mut self.beta {
            if *b < 0.0 && *b > -FEAS_TOL * 10.0 {
                *b = 0.0;
            }
        }
        Ok(())
    }

    fn remove_row(&mut self, r: usize) {
        let cols = self.cols;
        self.a.drain(r * cols..(r + 1) * cols);
        self.beta.remove(r);
        self.basic.remove(r);
        self.m -= 1;
    }

    fn remove_col(&mut self, j: usize) {
        let old = self.cols;
        let mut a = Vec::with_capacity(self.m * (old - 1));
        for r in 0..self.m {
            for k in 0..old {
                if k != j {
                    a.push(self.a[r * old + k]);
                }
            }
        }
        self.a = a;
        self.cols = old - 1;
        self.nonbasic.remove(j);
        self.c.remove(j);
    }

    /// Install the objective `sum coef * x_id`, expressed in the current nonbasic variables.
    fn set_objective(&mut self, objective: &[(usize, f64)]) {
        self.objective = objective.to_vec();
        self.c = vec![0.0; self.cols];
        self.z0 = 0.0;
        for &(v, coef) in objective {
            if let Some(j) = self.nonbasic.iter().position(|&u| u == v) {
                self.c[j] += coef;
            } else if let Some(r) = self.basic.iter().position(|&u| u == v) {
                self.z0 += coef * self.beta[r];
                for j in 0..self.cols {
                    self.c[j] -= coef * self.at(r, j);
                }
            }
        }
    }

    /// Coefficient of variable `v` in original row `i` (as `a.y <= b`).
    fn row_coef(&self, i: usize, v: usize) -> f64 {
        if v < self.ny {
            self.orig_a[i][v]
        } else if Some(v) == self.art {
            -1.0
        } else {
            0.0
        }
    }

    fn is_structural(&self, v: usize) -> bool {
        v < self.ny || Some(v) == self.art
    }

    /// Recompute the dictionary for the current basis from the original rows,
    /// discarding accumulated rounding. Returns false (and changes nothing)
    /// when the basis matrix is singular.
    fn refactor(&mut self) -> bool {
        let ny = self.ny;
        // Tight rows (nonbasic slacks) determine the basic structurals.
        let tight: Vec<(usize, usize)> = self
            .nonbasic
            .iter()
            .enumerate()
            .filter(|(_, &v)| !self.is_structural(v))
            .map(|(q, &v)| (q, v - ny))
            .collect();
        let basic_struct: Vec<(usize, usize)> =
            self.basic.iter().enumerate().filter(|(_, &v)| self.is_structural(v)).map(|(r, &v)| (r, v)).collect();
        let k = tight.len();
        if k != basic_struct.len() {
            return false;
        }
        let m_inv = if k == 0 {
            DMatrix::<f64>::zeros(0, 0)
        } else {
            let m = DMatrix::from_fn(k, k, |a, b| self.row_coef(tight[a].1, basic_struct[b].1));
            match m.try_inverse() {
                Some(inv) => inv,
                None => return false,
            }
        };
        // y_B = beta_y - G x_N.
        let rhs = DVector::from_fn(k, |a, _| self.orig_b[tight[a].1]);
        let beta_y = &m_inv * rhs;
        let mut g = DMatrix::<f64>::zeros(k, self.cols);
        for q in 0..self.cols {
            let v = self.nonbasic[q];
            let col = if self.is_structural(v) {
                &m_inv * DVector::from_fn(k, |a, _| self.row_coef(tight[a].1, v))
            } else {
                let a = tight.iter().position(|&(qq, _)| qq == q).expect("tight slack");
                m_inv.column(a).into_owned()
            };
            g.set_column(q, &col);
        }
        let cols = self.cols;
        let mut new_a = vec![0.0; self.m * cols];
        let mut new_beta = vec![0.0; self.m];
        for (b, &(r, _)) in basic_struct.iter().enumerate() {
            new_beta[r] = beta_y[b];
            for q in 0..cols {
                new_a[r * cols + q] = g[(b, q)];
            }
        }
        for r in 0..self.m {
            let v = self.basic[r];
            if self.is_structural(v) {
                continue;
            }
            let i = v - ny;
            let coefs: Vec<f64> = basic_struct.iter().map(|&(_, u)| self.row_coef(i, u)).collect();
            new_beta[r] = self.orig_b[i] - coefs.iter().zip(beta_y.iter()).map(|(c, y)| c * y).sum::<f64>();
            for q in 0..cols {
                let mut val: f64 = -coefs.iter().enumerate().map(|(b, c)| c * g[(b, q)]).sum::<f64>();
                let u = self.nonbasic[q];
                if self.is_structural(u) {
                    val += self.row_coef(i, u);
                }
                new_a[r * cols + q] = val;
            }
        }
        self.a = new_a;
        self.beta = new_beta;
        let objective = std::mem::take(&mut self.objective);
        self.set_objective(&objective);
        true
    }

    fn primal_values(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.ny];
        for (r, &v) in self.basic.iter().enumerate() {
            if v < self.ny {
                y[v] = self.beta[r].max(0.0);
            }
        }
        y
    }
}
