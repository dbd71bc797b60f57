//! Linear goal-programming model, a dense bounded-variable simplex, and a
//! brute-force vertex enumerator used to check it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::goalmem::{unclamped_membership, LinearFn, MembershipSpec};
use crate::nlpcore::VariableBox;
use crate::sigmodel::{Constraint, CrispFn, CrispProgram, Objective, Program, Relation, Sense, Signomial, Term};

pub const PIVOT_TOLERANCE: f64 = 1e-11;
const COST_TOLERANCE: f64 = 1e-9;
const FEASIBILITY: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;
/// Largest number of columns (structural plus slack) the vertex oracle enumerates.
pub const ORACLE_MAX_COLUMNS: usize = 20;
pub const ORACLE_MAX_VARIABLES: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("pivot element {value:.3e} below tolerance")]
    DegeneratePivot { value: f64 },
    #[error("iteration limit reached after {0} pivots")]
    IterationLimit(usize),
    #[error("malformed model: {0}")]
    Structure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize objective . x` subject to `rows` and `lower <= x <= upper`.
/// Lower bounds must be finite; upper bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub names: Vec<String>,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn check(&self) -> Result<(), LpError> {
        let n = self.names.len();
        if self.objective.len() != n || self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Structure("vector lengths disagree with variable count".into()));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.coeffs.len() != n {
                return Err(LpError::Structure(format!("row {i} has {} coefficients, expected {n}", r.coeffs.len())));
            }
            if r.coeffs.iter().chain([&r.rhs]).any(|v| !v.is_finite()) {
                return Err(LpError::Structure(format!("row {i} has a non-finite entry")));
            }
        }
        for j in 0..n {
            if !self.lower[j].is_finite() || self.upper[j].is_nan() || self.upper[j] < self.lower[j] {
                return Err(LpError::Structure(format!("bad bounds on {}", self.names[j])));
            }
        }
        Ok(())
    }

    pub fn row_activity(&self, i: usize, x: &[f64]) -> f64 {
        self.rows[i].coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    /// Largest row or bound violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = (0..self.rows.len()).map(|i| {
            let a = self.row_activity(i, x);
            let r = &self.rows[i];
            match r.relation {
                Relation::Eq => (a - r.rhs).abs(),
                Relation::Le => (a - r.rhs).max(0.0),
                Relation::Ge => (r.rhs - a).max(0.0),
            }
        });
        let bounds = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| (lo - v).max(v - hi).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    /// Plain-text dump, one row per line in 12-character columns.
    pub fn dump(&self) -> String {
        let cell = |s: String| format!("{s:>12}");
        let num = |v: f64| {
            if v.is_infinite() {
                cell(if v > 0.0 { "inf".into() } else { "-inf".into() })
            } else {
                cell(format!("{v:.6}"))
            }
        };
        let mut out = String::new();
        out += &cell("".into());
        for n in &self.names {
            out += &cell(n.clone());
        }
        out += &cell("rel".into());
        out += &cell("rhs".into());
        out += "\n";
        out += &cell("min".into());
        for &c in &self.objective {
            out += &num(c);
        }
        out += "\n";
        for (i, r) in self.rows.iter().enumerate() {
            out += &cell(format!("r{}", i + 1));
            for &a in &r.coeffs {
                out += &num(a);
            }
            out += &cell(r.relation.to_string());
            out += &num(r.rhs);
            out += "\n";
        }
        out += &cell("lower".into());
        for &v in &self.lower {
            out += &num(v);
        }
        out += "\n";
        out += &cell("upper".into());
        for &v in &self.upper {
            out += &num(v);
        }
        out += "\n";
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Basic(usize),
    AtLower,
    AtUpper,
}

/// Equality form over shifted variables `0 <= y <= u`: structural columns,
/// then one slack per inequality row, then one artificial per row.
struct Standard {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    u: Vec<f64>,
    cost: Vec<f64>,
    structural: usize,
    artificial_start: usize,
}

fn standardize(lp: &LinearProgram) -> Standard {
    let n = lp.names.len();
    let m = lp.rows.len();
    let slacks: Vec<usize> = (0..m).filter(|&i| lp.rows[i].relation != Relation::Eq).collect();
    let width = n + slacks.len() + m;
    let artificial_start = n + slacks.len();
    let mut a = vec![vec![0.0; width]; m];
    let mut b = vec![0.0; m];
    for (i, r) in lp.rows.iter().enumerate() {
        a[i][..n].copy_from_slice(&r.coeffs);
        b[i] = r.rhs - r.coeffs.iter().zip(&lp.lower).map(|(c, l)| c * l).sum::<f64>();
    }
    for (s, &i) in slacks.iter().enumerate() {
        a[i][n + s] = match lp.rows[i].relation {
            Relation::Le => 1.0,
            _ => -1.0,
        };
    }
    for i in 0..m {
        if b[i] < 0.0 {
            for v in a[i].iter_mut() {
                *v = -*v;
            }
            b[i] = -b[i];
        }
        a[i][artificial_start + i] = 1.0;
    }
    let mut u = vec![f64::INFINITY; width];
    for j in 0..n {
        u[j] = lp.upper[j] - lp.lower[j];
    }
    let mut cost = vec![0.0; width];
    cost[..n].copy_from_slice(&lp.objective);
    Standard { a, b, u, cost, structural: n, artificial_start }
}

struct Tableau {
    t: Vec<Vec<f64>>,
    xb: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<Status>,
    u: Vec<f64>,
    pivots: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn value(&self, j: usize) -> f64 {
        match self.status[j] {
            Status::Basic(r) => self.xb[r],
            Status::AtLower => 0.0,
            Status::AtUpper => self.u[j],
        }
    }

    /// Bland-rule primal simplex for `minimize cost . y` over columns with
    /// `allowed[j]` eligible to enter.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<Outcome, LpError> {
        let m = self.t.len();
        let width = cost.len();
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Err(LpError::IterationLimit(self.pivots));
            }
            let mut entering = None;
            for j in 0..width {
                if !allowed[j] || self.u[j] == 0.0 {
                    continue;
                }
                let dir = match self.status[j] {
                    Status::Basic(_) => continue,
                    Status::AtLower => 1.0,
                    Status::AtUpper => -1.0,
                };
                let d = cost[j] - (0..m).map(|i| cost[self.basis[i]] * self.t[i][j]).sum::<f64>();
                if dir * d < -COST_TOLERANCE {
                    entering = Some((j, dir));
                    break;
                }
            }
            let Some((j, dir)) = entering else { return Ok(Outcome::Optimal) };

            let mut step = self.u[j];
            let mut leave: Option<(usize, bool)> = None;
            for i in 0..m {
                let alpha = dir * self.t[i][j];
                let bi = self.basis[i];
                let (limit, to_upper) = if alpha > PIVOT_TOLERANCE {
                    (self.xb[i].max(0.0) / alpha, false)
                } else if alpha < -PIVOT_TOLERANCE && self.u[bi].is_finite() {
                    ((self.u[bi] - self.xb[i]).max(0.0) / -alpha, true)
                } else {
                    continue;
                };
                let better = match leave {
                    _ if limit < step => true,
                    Some((r, _)) => limit == step && bi < self.basis[r],
                    None => false,
                };
                if better {
                    step = limit;
                    leave = Some((i, to_upper));
                }
            }
            if step.is_infinite() {
                return Ok(Outcome::Unbounded);
            }
            for i in 0..m {
                self.xb[i] -= dir * self.t[i][j] * step;
            }
            self.pivots += 1;
            match leave {
                None => {
                    self.status[j] = if dir > 0.0 { Status::AtUpper } else { Status::AtLower };
                }
                Some((r, to_upper)) => {
                    let entering_value = if dir > 0.0 { step } else { self.u[j] - step };
                    let old = self.basis[r];
                    self.status[old] = if to_upper { Status::AtUpper } else { Status::AtLower };
                    self.pivot(r, j)?;
                    self.basis[r] = j;
                    self.status[j] = Status::Basic(r);
                    self.xb[r] = entering_value;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) -> Result<(), LpError> {
        let p = self.t[r][j];
        if p.abs() < PIVOT_TOLERANCE {
            return Err(LpError::DegeneratePivot { value: p });
        }
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[j];
            if f != 0.0 {
                for (v, pr) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
            }
        }
        Ok(())
    }
}

/// Two-phase bounded-variable primal simplex with Bland's rule.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpResult, LpError> {
    lp.check()?;
    let s = standardize(lp);
    let m = s.a.len();
    let width = s.u.len();
    let mut tab = Tableau {
        t: s.a.clone(),
        xb: s.b.clone(),
        basis: (0..m).map(|i| s.artificial_start + i).collect(),
        status: (0..width)
            .map(|j| if j >= s.artificial_start { Status::Basic(j - s.artificial_start) } else { Status::AtLower })
            .collect(),
        u: s.u.clone(),
        pivots: 0,
    };

    let phase1: Vec<f64> = (0..width).map(|j| if j >= s.artificial_start { 1.0 } else { 0.0 }).collect();
    let everything = vec![true; width];
    tab.optimize(&phase1, &everything)?;
    let infeasibility: f64 = (s.artificial_start..width).map(|j| tab.value(j)).sum();
    let scale = 1.0 + s.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let infeasible = |tab: &Tableau| LpResult {
        status: LpStatus::Infeasible,
        x: vec![f64::NAN; s.structural],
        objective: f64::NAN,
        pivots: tab.pivots,
    };
    if infeasibility > FEASIBILITY * scale {
        return Ok(infeasible(&tab));
    }

    for j in s.artificial_start..width {
        tab.u[j] = 0.0;
        if let Status::AtUpper = tab.status[j] {
            tab.status[j] = Status::AtLower;
        }
    }
    let allowed: Vec<bool> = (0..width).map(|j| j < s.artificial_start).collect();
    let outcome = tab.optimize(&s.cost, &allowed)?;
    let x: Vec<f64> = (0..s.structural)
        .map(|j| (lp.lower[j] + tab.value(j)).clamp(lp.lower[j], lp.upper[j]))
        .collect();
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpResult {
        status: match outcome {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Unbounded => LpStatus::Unbounded,
        },
        x,
        objective,
        pivots: tab.pivots,
    })
}

/// Solves the square system `a y = b` by Gaussian elimination with partial
/// pivoting; `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &k| a[i][c].abs().total_cmp(&a[k][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[i][k] -= f * a[c][k];
                }
                b[i] -= f * b[c];
            }
        }
    }
    let mut y = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c][k] * y[k]).sum();
        y[c] = (b[c] - s) / a[c][c];
    }
    Some(y)
}

fn combinations(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else { return };
        idx[i] += 1;
        for t in i + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// Exhaustive enumeration of basic solutions. Assumes the optimum, if any,
/// is attained; unbounded programs are not detected.
pub fn vertex_oracle(lp: &LinearProgram) -> Result<LpResult, LpError> {
    lp.check()?;
    if lp.names.len() > ORACLE_MAX_VARIABLES {
        return Err(LpError::Unsupported(format!(
            "vertex oracle handles at most {ORACLE_MAX_VARIABLES} variables, got {}",
            lp.names.len()
        )));
    }
    let s = standardize(lp);
    let m = s.a.len();
    let width = s.artificial_start;
    if width > ORACLE_MAX_COLUMNS {
        return Err(LpError::Unsupported(format!("{width} columns exceed the oracle limit")));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |y: Vec<f64>| {
        let x: Vec<f64> = (0..s.structural).map(|j| lp.lower[j] + y[j]).collect();
        if lp.max_violation(&x) > 1e-9 * (1.0 + s.b.iter().fold(0.0f64, |a, v| a.max(v.abs()))) {
            return;
        }
        let obj: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        if best.as_ref().is_none_or(|(b, _)| obj < *b - 1e-12) {
            best = Some((obj, x));
        }
    };
    combinations(width, m.min(width), |basis| {
        let nonbasic: Vec<usize> = (0..width).filter(|j| !basis.contains(j)).collect();
        let choices: Vec<usize> = nonbasic.iter().copied().filter(|&j| s.u[j].is_finite() && s.u[j] > 0.0).collect();
        for mask in 0u32..(1u32 << choices.len()) {
            let mut y = vec![0.0; width];
            for (bit, &j) in choices.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    y[j] = s.u[j];
                }
            }
            let rhs: Vec<f64> = (0..m)
                .map(|i| s.b[i] - nonbasic.iter().map(|&j| s.a[i][j] * y[j]).sum::<f64>())
                .collect();
            if basis.len() < m {
                // More rows than columns: check the all-nonbasic point directly.
                let ok = (0..m).all(|i| (rhs[i] - basis.iter().map(|&j| s.a[i][j] * y[j]).sum::<f64>()).abs() < 1e-9);
                if ok {
                    consider(y.clone());
                }
                continue;
            }
            let sub: Vec<Vec<f64>> = (0..m).map(|i| basis.iter().map(|&j| s.a[i][j]).collect()).collect();
            let Some(yb) = solve_square(sub, rhs) else { continue };
            for (k, &j) in basis.iter().enumerate() {
                y[j] = yb[k];
            }
            if basis.iter().all(|&j| y[j] >= -1e-9 && y[j] <= s.u[j] + 1e-9) {
                consider(y);
            }
        }
    });
    Ok(match best {
        Some((objective, x)) => LpResult { status: LpStatus::Optimal, x, objective, pivots: 0 },
        None => LpResult {
            status: LpStatus::Infeasible,
            x: vec![f64::NAN; s.structural],
            objective: f64::NAN,
            pivots: 0,
        },
    })
}

/// Layout of the goal-programming LP: `x`, `d-`, optionally `d+`, then `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FgpModel {
    pub lp: LinearProgram,
    pub dimension: usize,
    pub goals: usize,
    pub surplus: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FgpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub d_minus: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub d_plus: Vec<f64>,
    pub beta: f64,
    pub pivots: usize,
}

impl FgpModel {
    fn beta_index(&self) -> usize {
        self.lp.names.len() - 1
    }

    pub fn solution(&self, r: &LpResult) -> FgpSolution {
        let (n, k) = (self.dimension, self.goals);
        let d_plus = if self.surplus { r.x[n + k..n + 2 * k].to_vec() } else { Vec::new() };
        FgpSolution {
            status: r.status,
            x: r.x[..n].to_vec(),
            d_minus: r.x[n..n + k].to_vec(),
            d_plus,
            beta: r.x[self.beta_index()],
            pivots: r.pivots,
        }
    }

    pub fn solve(&self) -> Result<FgpSolution, LpError> {
        simplex_solve(&self.lp).map(|r| self.solution(&r))
    }
}

/// Goal-programming LP: minimize `beta` subject to
/// `g_k(x) + d-_k (- d+_k) = 1`, `beta >= d-_k`, the box, `d >= 0` and
/// `0 <= beta <= 1`.
pub fn assemble_fgp(goals: &[LinearFn], bounds: &VariableBox, surplus: bool) -> Result<FgpModel, LpError> {
    if goals.is_empty() {
        return Err(LpError::Structure("at least one goal is required".into()));
    }
    let n = bounds.dimension();
    if let Some(g) = goals.iter().find(|g| g.coeffs.len() != n) {
        return Err(LpError::Structure(format!("goal has {} coefficients, box has {n}", g.coeffs.len())));
    }
    let k = goals.len();
    let mut names: Vec<String> = (1..=n).map(|l| format!("x{l}")).collect();
    names.extend((1..=k).map(|i| format!("d{i}-")));
    if surplus {
        names.extend((1..=k).map(|i| format!("d{i}+")));
    }
    names.push("beta".into());
    let width = names.len();
    let beta = width - 1;

    let mut rows = Vec::with_capacity(2 * k);
    for (i, g) in goals.iter().enumerate() {
        let mut coeffs = vec![0.0; width];
        coeffs[..n].copy_from_slice(&g.coeffs);
        coeffs[n + i] = 1.0;
        if surplus {
            coeffs[n + k + i] = -1.0;
        }
        rows.push(Row { coeffs, relation: Relation::Eq, rhs: 1.0 - g.constant });
    }
    for i in 0..k {
        let mut coeffs = vec![0.0; width];
        coeffs[beta] = 1.0;
        coeffs[n + i] = -1.0;
        rows.push(Row { coeffs, relation: Relation::Ge, rhs: 0.0 });
    }
    let mut objective = vec![0.0; width];
    objective[beta] = 1.0;
    let mut lower = bounds.lower.clone();
    lower.resize(width, 0.0);
    let mut upper = bounds.upper.clone();
    upper.resize(width, f64::INFINITY);
    upper[beta] = 1.0;
    let lp = LinearProgram { names, objective, rows, lower, upper };
    lp.check()?;
    Ok(FgpModel { lp, dimension: n, goals: k, surplus })
}

fn extend(f: &CrispFn) -> CrispFn {
    Signomial {
        terms: f
            .terms
            .iter()
            .map(|t| {
                let mut e = t.exponents.clone();
                e.push(0.0);
                Term { coeff: t.coeff, exponents: e }
            })
            .collect(),
    }
}

fn with_level_variable(
    specs: &[MembershipSpec],
    p: &CrispProgram,
    name: &str,
    sense: Sense,
    level_sign: f64,
    relation_rhs: impl Fn(f64) -> f64,
) -> CrispProgram {
    let n = p.dimension();
    let mut variables = p.variables.clone();
    variables.push(name.into());
    let level = |c: f64| {
        let mut e = vec![0.0; n + 1];
        e[n] = 1.0;
        Term { coeff: c, exponents: e }
    };
    let mut constraints: Vec<Constraint<f64>> = p
        .constraints
        .iter()
        .map(|c| Constraint { terms: extend(&c.terms), relation: c.relation, rhs: c.rhs })
        .collect();
    for s in specs {
        let mu = unclamped_membership(s, &p.objectives[s.objective].terms);
        let mut terms = extend(&mu);
        let constant: f64 = terms.terms.iter().filter(|t| t.exponents.iter().all(|&e| e == 0.0)).map(|t| t.coeff).sum();
        terms.terms.retain(|t| t.exponents.iter().any(|&e| e != 0.0));
        terms.terms.push(level(level_sign));
        constraints.push(Constraint { terms, relation: Relation::Ge, rhs: relation_rhs(constant) });
    }
    constraints.push(Constraint { terms: Signomial { terms: vec![level(1.0)] }, relation: Relation::Le, rhs: 1.0 });
    Program {
        variables,
        objectives: vec![Objective { sense, terms: Signomial { terms: vec![level(1.0)] } }],
        constraints,
    }
}

/// `maximize lambda` subject to `mu_k(x) >= lambda`, the original
/// constraints and `0 <= lambda <= 1`. The last variable is `lambda`.
pub fn assemble_maxmin(specs: &[MembershipSpec], p: &CrispProgram) -> CrispProgram {
    with_level_variable(specs, p, "lambda", Sense::Maximize, -1.0, |c| -c)
}

/// `minimize beta` subject to `mu_k(x) + beta >= 1`, the original
/// constraints and `0 <= beta <= 1`. The last variable is `beta`.
pub fn assemble_minmax(specs: &[MembershipSpec], p: &CrispProgram) -> CrispProgram {
    with_level_variable(specs, p, "beta", Sense::Minimize, 1.0, |c| 1.0 - c)
}
