//! Single-objective nonlinear optimization over the crisp constraint region.
//!
//! Each restart runs a quadratic-penalty outer loop with multiplier shifts
//! (method of multipliers), minimizing the penalized function with a
//! bound-projected Nelder-Mead search and finishing with a projected-gradient
//! polish. Restart points come from a seeded, shifted Halton sequence over
//! the search box. Restarts are independent and may run in parallel; the
//! best one is chosen by an ordered reduction, so results do not depend on
//! the execution mode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par::{map_indexed, Execution};
use crate::sigmodel::{CrispFn, CrispProgram, ModelError, Relation, Sense};

/// Scaled constraint violation accepted as feasible.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-6;

const TIE_TOLERANCE: f64 = 1e-9;
const POLISH_ITERATIONS: usize = 200;
const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NlpError {
    #[error("no feasible point found in {restarts} restarts (least violation {violation:.3e})")]
    InfeasibleOrUnbounded { restarts: usize, violation: f64 },
    #[error("no restart converged to a feasible point (best violation {violation:.3e})")]
    NonConvergence { x: Vec<f64>, value: f64, violation: f64 },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{sense} objective {objective}: {source}")]
    Payoff {
        objective: usize,
        sense: Sense,
        source: Box<NlpError>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NlpConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Penalty weights for successive outer rounds; the last one is reused
    /// while the iterate is still infeasible.
    pub penalty_schedule: Vec<f64>,
    pub tolerance: f64,
    /// Inner iteration budget per outer round.
    pub max_iterations: usize,
    /// Fallback upper bound for variables no constraint limits.
    pub upper_guess: Option<f64>,
    pub execution: Execution,
}

impl Default for NlpConfig {
    fn default() -> Self {
        NlpConfig {
            restarts: 64,
            seed: 42,
            penalty_schedule: vec![1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7],
            tolerance: 1e-8,
            max_iterations: 2000,
            upper_guess: None,
            execution: Execution::default(),
        }
    }
}

impl NlpConfig {
    pub fn check(&self) -> Result<(), NlpError> {
        if self.restarts == 0 {
            return Err(NlpError::Config("restarts must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(NlpError::Config("tolerance must be positive".into()));
        }
        if self.penalty_schedule.is_empty() || self.penalty_schedule.iter().any(|&w| !(w > 0.0)) {
            return Err(NlpError::Config("penalty schedule must hold positive weights".into()));
        }
        if self.max_iterations == 0 {
            return Err(NlpError::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub start: Vec<f64>,
    pub iterations: usize,
    pub value: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<f64>,
    pub value: f64,
    pub violation: f64,
    #[serde(skip)]
    pub log: Vec<RestartRecord>,
}

/// Per-variable limits `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl VariableBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        debug_assert_eq!(lower.len(), upper.len());
        VariableBox { lower, upper }
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&lo, &hi))| v >= lo - tol && v <= hi + tol)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lower.iter().zip(&self.upper).any(|(lo, hi)| hi <= lo)
    }

    fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    fn project(&self, x: &mut [f64]) {
        for ((v, &lo), &hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(lo, hi);
        }
    }
}

/// Extreme of one objective in one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extreme {
    pub x: Vec<f64>,
    pub value: f64,
    /// All objectives evaluated at `x`.
    pub objective_values: Vec<f64>,
    #[serde(skip)]
    pub log: Vec<RestartRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffRow {
    pub objective: usize,
    pub sense: Sense,
    pub max: Extreme,
    pub min: Extreme,
}

/// Individual maxima and minima of every objective over the constraint region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffTable {
    pub rows: Vec<PayoffRow>,
}

impl PayoffTable {
    fn solutions(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.rows.iter().flat_map(|r| [&r.max.x, &r.min.x])
    }

    /// Plain-text rendering with one column per solution.
    pub fn render(&self, variables: &[String]) -> String {
        let mut headers = vec!["x".to_string()];
        let mut columns: Vec<&Extreme> = Vec::new();
        for r in &self.rows {
            headers.push(format!("Max f{}", r.objective + 1));
            headers.push(format!("Min f{}", r.objective + 1));
            columns.push(&r.max);
            columns.push(&r.min);
        }
        let mut out = String::new();
        let line = |cells: &[String]| cells.iter().map(|c| format!("{c:>12}")).collect::<String>() + "\n";
        out += &line(&headers);
        for (l, name) in variables.iter().enumerate() {
            let mut cells = vec![name.clone()];
            cells.extend(columns.iter().map(|e| format!("{:.3}", e.x[l])));
            out += &line(&cells);
        }
        for k in 0..self.rows.len() {
            let mut cells = vec![format!("f{}", k + 1)];
            cells.extend(columns.iter().map(|e| format!("{:.3}", e.objective_values[k])));
            out += &line(&cells);
        }
        out
    }
}

/// Scaled residual form of one constraint: `<= 0` for inequalities, `= 0`
/// for equalities.
struct Scaled<'a> {
    f: &'a CrispFn,
    rhs: f64,
    scale: f64,
    relation: Relation,
}

impl Scaled<'_> {
    fn residual(&self, x: &[f64]) -> f64 {
        let r = match self.f.eval(x) {
            Ok(v) => (v - self.rhs) / self.scale,
            Err(_) => return f64::INFINITY,
        };
        match self.relation {
            Relation::Le | Relation::Eq => r,
            Relation::Ge => -r,
        }
    }

    fn residual_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let g = safe_gradient(self.f, x)?;
        let s = match self.relation {
            Relation::Ge => -1.0 / self.scale,
            _ => 1.0 / self.scale,
        };
        Some(g.into_iter().map(|v| v * s).collect())
    }

    fn violation(&self, r: f64) -> f64 {
        match self.relation {
            Relation::Eq => r.abs(),
            _ => r.max(0.0),
        }
    }
}

/// Gradient evaluated with singular boundary coordinates nudged inward.
fn safe_gradient(f: &CrispFn, x: &[f64]) -> Option<Vec<f64>> {
    match f.gradient(x) {
        Ok(g) => Some(g),
        Err(ModelError::SingularGradient { .. }) => {
            let nudged: Vec<f64> = x.iter().map(|&v| v.max(1e-8)).collect();
            f.gradient(&nudged).ok()
        }
        Err(_) => None,
    }
}

struct Penalized<'a> {
    objective: &'a CrispFn,
    /// +1 to minimize, -1 to maximize.
    sign: f64,
    fscale: f64,
    constraints: Vec<Scaled<'a>>,
    bounds: VariableBox,
}

impl<'a> Penalized<'a> {
    fn new(objective: &'a CrispFn, sense: Sense, constraints: Vec<Scaled<'a>>, bounds: VariableBox) -> Self {
        let sign = match sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let probes = [bounds.center(), bounds.upper.clone(), bounds.lower.clone()];
        let fscale = probes
            .iter()
            .filter_map(|p| objective.eval(p).ok())
            .filter(|v| v.is_finite())
            .fold(1.0f64, |m, v| m.max(v.abs()));
        Penalized { objective, sign, fscale, constraints, bounds }
    }

    fn phi(&self, x: &[f64]) -> f64 {
        match self.objective.eval(x) {
            Ok(v) if v.is_finite() => self.sign * v / self.fscale,
            _ => f64::INFINITY,
        }
    }

    fn merit(&self, x: &[f64], mult: &[f64], rho: f64) -> f64 {
        let mut m = self.phi(x);
        for (c, &lam) in self.constraints.iter().zip(mult) {
            let r = c.residual(x);
            m += match c.relation {
                Relation::Eq => lam * r + 0.5 * rho * r * r,
                _ => {
                    let s = (r + lam / rho).max(0.0);
                    0.5 * rho * (s * s - (lam / rho) * (lam / rho))
                }
            };
        }
        if m.is_nan() {
            f64::INFINITY
        } else {
            m
        }
    }

    fn merit_gradient(&self, x: &[f64], mult: &[f64], rho: f64) -> Option<Vec<f64>> {
        let mut g: Vec<f64> = safe_gradient(self.objective, x)?
            .into_iter()
            .map(|v| self.sign * v / self.fscale)
            .collect();
        for (c, &lam) in self.constraints.iter().zip(mult) {
            let r = c.residual(x);
            let w = match c.relation {
                Relation::Eq => lam + rho * r,
                _ => (lam + rho * r).max(0.0),
            };
            if w != 0.0 {
                for (gi, ci) in g.iter_mut().zip(c.residual_gradient(x)?) {
                    *gi += w * ci;
                }
            }
        }
        g.iter().all(|v| v.is_finite()).then_some(g)
    }

    fn violation(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.violation(c.residual(x)))
            .fold(0.0, f64::max)
    }

    fn update_multipliers(&self, x: &[f64], mult: &mut [f64], rho: f64) {
        for (c, lam) in self.constraints.iter().zip(mult.iter_mut()) {
            let r = c.residual(x);
            if !r.is_finite() {
                continue;
            }
            *lam = match c.relation {
                Relation::Eq => *lam + rho * r,
                _ => (*lam + rho * r).max(0.0),
            };
        }
    }
}

/// Bound-projected Nelder-Mead. Returns the best vertex, its value and the
/// number of iterations used.
fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    step: &[f64],
    bounds: &VariableBox,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] = if v[i] + step[i] <= bounds.upper[i] {
            v[i] + step[i]
        } else {
            v[i] - step[i]
        };
        bounds.project(&mut v);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let width: f64 = bounds
        .lower
        .iter()
        .zip(&bounds.upper)
        .map(|(a, b)| b - a)
        .fold(0.0, f64::max);
    let xtol = 1e-10 * (1.0 + width);

    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        let mut p: Vec<f64> = c.iter().zip(w).map(|(ci, wi)| ci + t * (wi - ci)).collect();
        bounds.project(&mut p);
        p
    };

    let mut iterations = 0;
    while iterations < max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let best = values[0];
        let worst = values[n];
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if best.is_finite() && (worst - best).abs() <= tol * (1.0 + best.abs()) && diameter <= xtol.max(tol) {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let reflected = point(&centroid, &simplex[n], -1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = point(&centroid, &simplex[n], -2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (contracted, fc) = if fr < values[n] {
                let c = point(&centroid, &simplex[n], -0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = point(&centroid, &simplex[n], 0.5);
                let fc = f(&c);
                (c, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = point(&simplex[0].clone(), &simplex[i], 0.5);
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .unwrap_or(0);
    (simplex[best].clone(), values[best], iterations)
}

/// Projected gradient descent with Armijo backtracking on the merit.
fn polish(pen: &Penalized<'_>, x: Vec<f64>, mult: &[f64], rho: f64) -> (Vec<f64>, usize) {
    let mut x = x;
    let mut fx = pen.merit(&x, mult, rho);
    let width = pen
        .bounds
        .lower
        .iter()
        .zip(&pen.bounds.upper)
        .map(|(a, b)| b - a)
        .fold(0.0, f64::max)
        .max(1e-12);
    let mut t = f64::NAN;
    let mut used = 0;
    for _ in 0..POLISH_ITERATIONS {
        let Some(g) = pen.merit_gradient(&x, mult, rho) else { break };
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax == 0.0 {
            break;
        }
        if !t.is_finite() {
            t = 0.01 * width / gmax;
        }
        used += 1;
        let mut accepted = false;
        let mut tries = 0;
        while tries < 60 {
            let mut y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
            pen.bounds.project(&mut y);
            let decrease: f64 = g.iter().zip(x.iter().zip(&y)).map(|(gi, (a, b))| gi * (a - b)).sum();
            let fy = pen.merit(&y, mult, rho);
            if decrease > 0.0 && fy <= fx - 1e-4 * decrease {
                let moved = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                x = y;
                fx = fy;
                accepted = moved > 1e-14 * (1.0 + width);
                break;
            }
            t *= 0.5;
            tries += 1;
        }
        if !accepted {
            break;
        }
        t *= 2.0;
    }
    (x, used)
}

/// Halton point `index` in the unit cube, shifted by `shift` modulo 1.
fn halton(index: usize, dim: usize, shift: &[f64]) -> Vec<f64> {
    (0..dim)
        .map(|d| {
            let base = PRIMES[d % PRIMES.len()] as usize;
            let mut f = 1.0;
            let mut r = 0.0;
            let mut i = index;
            while i > 0 {
                f /= base as f64;
                r += f * (i % base) as f64;
                i /= base;
            }
            (r + shift[d]).fract()
        })
        .collect()
}

fn start_points(bounds: &VariableBox, cfg: &NlpConfig) -> Vec<Vec<f64>> {
    let n = bounds.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    (0..cfg.restarts)
        .map(|i| {
            let u = halton(i + 1, n, &shift);
            u.iter()
                .zip(bounds.lower.iter().zip(&bounds.upper))
                .map(|(t, (lo, hi))| lo + t * (hi - lo))
                .collect()
        })
        .collect()
}

struct RestartOutcome {
    x: Vec<f64>,
    value: f64,
    violation: f64,
    record: RestartRecord,
}

fn run_restart(pen: &Penalized<'_>, start: Vec<f64>, cfg: &NlpConfig) -> RestartOutcome {
    let n = start.len();
    let mut x = start.clone();
    let mut mult = vec![0.0; pen.constraints.len()];
    let mut step: Vec<f64> = pen
        .bounds
        .lower
        .iter()
        .zip(&pen.bounds.upper)
        .map(|(a, b)| 0.1 * (b - a))
        .collect();
    let mut iterations = 0;
    let schedule = &cfg.penalty_schedule;
    let rounds = if pen.constraints.is_empty() { 3 } else { schedule.len() + 5 };
    let mut rho = schedule[0];
    let mut previous = f64::INFINITY;
    for round in 0..rounds {
        rho = schedule[round.min(schedule.len() - 1)];
        let (xn, _, it) = nelder_mead(|y| pen.merit(y, &mult, rho), &x, &step, &pen.bounds, cfg.tolerance, cfg.max_iterations);
        iterations += it;
        x = xn;
        pen.update_multipliers(&x, &mut mult, rho);
        let phi = pen.phi(&x);
        let violation = pen.violation(&x);
        for (s, (lo, hi)) in step.iter_mut().zip(pen.bounds.lower.iter().zip(&pen.bounds.upper)) {
            *s = (*s * 0.3).max(1e-6 * (hi - lo));
        }
        let settled = (phi - previous).abs() <= 1e3 * cfg.tolerance * (1.0 + phi.abs());
        previous = phi;
        if round + 1 >= schedule.len().min(3) && violation <= 1e-2 * FEASIBILITY_TOLERANCE && settled {
            break;
        }
    }
    let (x, used) = polish(pen, x, &mult, rho);
    iterations += used;
    debug_assert_eq!(x.len(), n);
    let value = pen.sign * pen.phi(&x) * pen.fscale;
    let violation = pen.violation(&x);
    RestartOutcome {
        record: RestartRecord { start, iterations, value, violation },
        x,
        value,
        violation,
    }
}

fn multistart(pen: &Penalized<'_>, cfg: &NlpConfig) -> Result<Solution, NlpError> {
    cfg.check()?;
    let starts = start_points(&pen.bounds, cfg);
    let outcomes = map_indexed(starts.len(), cfg.execution, |i| run_restart(pen, starts[i].clone(), cfg));

    let mut best: Option<&RestartOutcome> = None;
    for o in outcomes.iter().filter(|o| o.violation <= FEASIBILITY_TOLERANCE && o.value.is_finite()) {
        best = Some(match best {
            None => o,
            Some(b) => {
                let (ob, bb) = (pen.sign * o.value, pen.sign * b.value);
                if (ob - bb).abs() <= TIE_TOLERANCE * (1.0 + bb.abs()) {
                    if o.x.partial_cmp(&b.x) == Some(std::cmp::Ordering::Less) {
                        o
                    } else {
                        b
                    }
                } else if ob < bb {
                    o
                } else {
                    b
                }
            }
        });
    }
    let log: Vec<RestartRecord> = outcomes.iter().map(|o| o.record.clone()).collect();
    match best {
        Some(b) => Ok(Solution {
            x: b.x.clone(),
            value: b.value,
            violation: b.violation,
            log,
        }),
        None => {
            let least = outcomes
                .iter()
                .min_by(|a, b| a.violation.total_cmp(&b.violation))
                .expect("at least one restart");
            if least.violation.is_finite() && least.violation <= 1e-3 {
                Err(NlpError::NonConvergence {
                    x: least.x.clone(),
                    value: least.value,
                    violation: least.violation,
                })
            } else {
                Err(NlpError::InfeasibleOrUnbounded {
                    restarts: cfg.restarts,
                    violation: least.violation,
                })
            }
        }
    }
}

fn scaled_constraints(p: &CrispProgram) -> Vec<Scaled<'_>> {
    p.constraints
        .iter()
        .map(|c| Scaled {
            f: &c.terms,
            rhs: c.rhs,
            scale: 1.0 + c.rhs.abs(),
            relation: c.relation,
        })
        .collect()
}

/// Search box for the unboxed problem: `x >= 0`, with upper limits read off
/// `<=` and `=` constraints whose terms are all nonnegative on `x >= 0`
/// (each single-variable term `c x^a <= b` yields `x <= (b/c)^(1/a)`).
/// Variables no constraint limits get `upper_guess`, or ten times the
/// largest right-hand side.
pub fn search_bounds(p: &CrispProgram, cfg: &NlpConfig) -> VariableBox {
    let n = p.dimension();
    let largest_rhs = p.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
    let fallback = cfg.upper_guess.unwrap_or(10.0 * largest_rhs.max(1.0));
    let mut upper = vec![f64::INFINITY; n];
    for c in p.constraints.iter().filter(|c| c.relation != Relation::Ge) {
        let terms = &c.terms.terms;
        let constant: f64 = terms
            .iter()
            .filter(|t| t.exponents.iter().all(|&e| e == 0.0))
            .map(|t| t.coeff)
            .sum();
        let nonneg = terms
            .iter()
            .all(|t| t.coeff >= 0.0 && t.exponents.iter().all(|&e| e >= 0.0));
        let budget = c.rhs - constant;
        if !nonneg || budget < 0.0 {
            continue;
        }
        for t in terms {
            let active: Vec<usize> = (0..n).filter(|&l| t.exponents[l] != 0.0).collect();
            if let [l] = active.as_slice() {
                if t.coeff > 0.0 {
                    let limit = (budget / t.coeff).powf(1.0 / t.exponents[*l]);
                    upper[*l] = upper[*l].min(limit);
                }
            }
        }
    }
    for u in upper.iter_mut() {
        if !u.is_finite() {
            *u = fallback;
        }
    }
    VariableBox::new(vec![0.0; n], upper)
}

/// Optimizes objective `objective` of `p` in direction `sense` over the
/// constraint region.
pub fn solve_single(p: &CrispProgram, objective: usize, sense: Sense, cfg: &NlpConfig) -> Result<Solution, NlpError> {
    let f = &p.objective(objective)?.terms;
    let bounds = search_bounds(p, cfg);
    tracing::debug!(objective, %sense, upper = ?bounds.upper, "search bounds");
    let pen = Penalized::new(f, sense, scaled_constraints(p), bounds);
    multistart(&pen, cfg)
}

/// Optimizes `f` over a box with no other constraints.
pub fn optimize_over_box(f: &CrispFn, sense: Sense, bounds: &VariableBox, cfg: &NlpConfig) -> Result<Solution, NlpError> {
    let pen = Penalized::new(f, sense, Vec::new(), bounds.clone());
    multistart(&pen, cfg)
}

fn extreme(p: &CrispProgram, s: Solution) -> Result<Extreme, NlpError> {
    let objective_values = p.objective_values(&s.x)?;
    Ok(Extreme { x: s.x, value: s.value, objective_values, log: s.log })
}

/// Individual maximum and minimum of every objective.
pub fn payoff_table(p: &CrispProgram, cfg: &NlpConfig) -> Result<PayoffTable, NlpError> {
    let mut rows = Vec::with_capacity(p.objectives.len());
    for (k, o) in p.objectives.iter().enumerate() {
        let solve = |sense| {
            solve_single(p, k, sense, cfg)
                .and_then(|s| extreme(p, s))
                .map_err(|e| NlpError::Payoff { objective: k, sense, source: Box::new(e) })
        };
        let max = solve(Sense::Maximize)?;
        let min = solve(Sense::Minimize)?;
        rows.push(PayoffRow { objective: k, sense: o.sense, max, min });
    }
    Ok(PayoffTable { rows })
}

/// Smallest box holding every payoff-table solution.
pub fn variable_box(t: &PayoffTable) -> VariableBox {
    let n = t.rows.first().map_or(0, |r| r.max.x.len());
    let mut lower = vec![f64::INFINITY; n];
    let mut upper = vec![f64::NEG_INFINITY; n];
    for x in t.solutions() {
        for l in 0..n {
            lower[l] = lower[l].min(x[l]);
            upper[l] = upper[l].max(x[l]);
        }
    }
    VariableBox::new(lower, upper)
}

/// Signomial evaluated on a tensor grid from per-axis power tables.
struct GridFn {
    coeffs: Vec<f64>,
    /// `tables[term][var][i] = grid_l[i]^exponent`
    tables: Vec<Vec<Vec<f64>>>,
}

impl GridFn {
    fn new(f: &CrispFn, axes: &[Vec<f64>]) -> Self {
        let tables = f
            .terms
            .iter()
            .map(|t| {
                axes.iter()
                    .enumerate()
                    .map(|(l, axis)| {
                        axis.iter()
                            .map(|&v| crate::sigmodel::power(l, v, t.exponents[l]).unwrap_or(f64::NAN))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        GridFn {
            coeffs: f.terms.iter().map(|t| t.coeff).collect(),
            tables,
        }
    }

    fn eval(&self, idx: &[usize]) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.tables)
            .map(|(c, tab)| c * tab.iter().zip(idx).map(|(axis, &i)| axis[i]).product::<f64>())
            .sum()
    }
}

/// Exhaustive grid search with `resolution` intervals per axis (so
/// `resolution + 1` points). Only feasible grid points count. Meant for
/// verification on problems with at most four variables.
pub fn grid_oracle(
    p: &CrispProgram,
    objective: usize,
    sense: Sense,
    resolution: usize,
    bounds: Option<&VariableBox>,
    execution: Execution,
) -> Result<Solution, NlpError> {
    let n = p.dimension();
    if n == 0 || n > 4 {
        return Err(NlpError::Unsupported(format!("grid oracle needs 1 to 4 variables, got {n}")));
    }
    if resolution == 0 {
        return Err(NlpError::Unsupported("grid resolution must be positive".into()));
    }
    let f = &p.objective(objective)?.terms;
    let bounds = bounds.cloned().unwrap_or_else(|| search_bounds(p, &NlpConfig::default()));
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|l| {
            let (lo, hi) = (bounds.lower[l], bounds.upper[l]);
            (0..=resolution).map(|i| lo + (hi - lo) * i as f64 / resolution as f64).collect()
        })
        .collect();
    let obj = GridFn::new(f, &axes);
    let cons: Vec<(GridFn, f64, Relation)> = p
        .constraints
        .iter()
        .map(|c| (GridFn::new(&c.terms, &axes), c.rhs, c.relation))
        .collect();
    let sign = if sense == Sense::Maximize { -1.0 } else { 1.0 };
    let points = resolution + 1;
    let rest: usize = points.pow(n as u32 - 1);

    let slices = map_indexed(points, execution, |first| {
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut idx = vec![0usize; n];
        idx[0] = first;
        for r in 0..rest {
            let mut q = r;
            for slot in idx.iter_mut().skip(1) {
                *slot = q % points;
                q /= points;
            }
            let feasible = cons.iter().all(|(g, rhs, rel)| {
                let v = g.eval(&idx);
                let tol = 1e-12 * (1.0 + rhs.abs());
                match rel {
                    Relation::Le => v <= rhs + tol,
                    Relation::Ge => v >= rhs - tol,
                    Relation::Eq => (v - rhs).abs() <= tol,
                }
            });
            if !feasible {
                continue;
            }
            let v = sign * obj.eval(&idx);
            if v.is_finite() && best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, idx.clone()));
            }
        }
        best
    });
    let (v, idx) = slices
        .into_iter()
        .flatten()
        .fold(None::<(f64, Vec<usize>)>, |acc, cur| match acc {
            Some(a) if a.0 <= cur.0 => Some(a),
            _ => Some(cur),
        })
        .ok_or(NlpError::InfeasibleOrUnbounded { restarts: 0, violation: f64::INFINITY })?;
    let x: Vec<f64> = idx.iter().enumerate().map(|(l, &i)| axes[l][i]).collect();
    Ok(Solution { x, value: sign * v, violation: 0.0, log: Vec::new() })
}
