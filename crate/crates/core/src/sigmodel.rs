//! Multiobjective signomial programs with fuzzy or crisp coefficients.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::it2num::{FuzzyError, It2Number, Side};

/// Lower clamp for variables carrying a fractional or negative exponent
/// when differentiating.
pub const GRAD_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("x{variable} = {base} cannot be raised to {exponent}")]
    Domain {
        variable: usize,
        base: f64,
        exponent: f64,
    },
    #[error("gradient is singular in x{variable} at the boundary")]
    SingularGradient { variable: usize },
    #[error("point has {got} components, program has {expected} variables")]
    Dimension { expected: usize, got: usize },
    #[error("objective index {0} out of range")]
    NoSuchObjective(usize),
    #[error("invalid program: {0}")]
    Invalid(String),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    #[serde(alias = "max")]
    Maximize,
    #[serde(alias = "min")]
    Minimize,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Maximize => "max",
            Sense::Minimize => "min",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

/// A coefficient as written in a problem file: a plain real or an IT2 record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Crisp(f64),
    Fuzzy(It2Number),
}

impl Coefficient {
    pub fn expected_value(&self) -> f64 {
        match self {
            Coefficient::Crisp(v) => *v,
            Coefficient::Fuzzy(n) => n.expected_value(),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(v: f64) -> Self {
        Coefficient::Crisp(v)
    }
}

impl From<It2Number> for Coefficient {
    fn from(n: It2Number) -> Self {
        Coefficient::Fuzzy(n)
    }
}

/// `coeff * prod_l x_l^exponents[l]`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term<C> {
    pub coeff: C,
    pub exponents: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signomial<C> {
    pub terms: Vec<Term<C>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective<C> {
    pub sense: Sense,
    pub terms: Signomial<C>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint<C> {
    pub terms: Signomial<C>,
    pub relation: Relation,
    pub rhs: C,
}

/// Objectives with senses, relational constraints and implicit `x >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program<C> {
    pub variables: Vec<String>,
    pub objectives: Vec<Objective<C>>,
    pub constraints: Vec<Constraint<C>>,
}

/// Problem as read from a file; coefficients may be fuzzy or crisp.
pub type FuzzyProgram = Program<Coefficient>;
pub type CrispProgram = Program<f64>;
pub type CrispFn = Signomial<f64>;

impl<C> Signomial<C> {
    pub fn map_coeffs<D>(&self, mut f: impl FnMut(&C) -> D) -> Signomial<D> {
        Signomial {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: f(&t.coeff),
                    exponents: t.exponents.clone(),
                })
                .collect(),
        }
    }
}

impl<C> Program<C> {
    pub fn dimension(&self) -> usize {
        self.variables.len()
    }

    pub fn map_coeffs<D>(&self, mut f: impl FnMut(&C) -> D) -> Program<D> {
        Program {
            variables: self.variables.clone(),
            objectives: self
                .objectives
                .iter()
                .map(|o| Objective {
                    sense: o.sense,
                    terms: o.terms.map_coeffs(&mut f),
                })
                .collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    terms: c.terms.map_coeffs(&mut f),
                    relation: c.relation,
                    rhs: f(&c.rhs),
                })
                .collect(),
        }
    }
}

impl FuzzyProgram {
    /// Replaces every coefficient by its expected value. Traversal order is
    /// objectives, then constraints (terms before rhs).
    pub fn defuzzify(&self) -> CrispProgram {
        self.map_coeffs(Coefficient::expected_value)
    }

    pub fn is_crisp(&self) -> bool {
        let fuzzy = |c: &Coefficient| matches!(c, Coefficient::Fuzzy(_));
        !self
            .objectives
            .iter()
            .flat_map(|o| o.terms.terms.iter().map(|t| &t.coeff))
            .chain(self.constraints.iter().flat_map(|c| {
                c.terms.terms.iter().map(|t| &t.coeff).chain(std::iter::once(&c.rhs))
            }))
            .any(fuzzy)
    }
}

impl From<&CrispProgram> for FuzzyProgram {
    fn from(p: &CrispProgram) -> Self {
        p.map_coeffs(|&v| Coefficient::Crisp(v))
    }
}

/// `x^a` with `0^0 = 1` and `0^a = 0` for `a > 0`.
pub(crate) fn power(variable: usize, x: f64, a: f64) -> Result<f64, ModelError> {
    if a == 0.0 {
        return Ok(1.0);
    }
    if a == 1.0 {
        return Ok(x);
    }
    if x == 0.0 {
        return if a > 0.0 {
            Ok(0.0)
        } else {
            Err(ModelError::Domain { variable, base: x, exponent: a })
        };
    }
    if x < 0.0 && a.fract() != 0.0 {
        return Err(ModelError::Domain { variable, base: x, exponent: a });
    }
    if a == 2.0 {
        Ok(x * x)
    } else {
        Ok(x.powf(a))
    }
}

impl Term<f64> {
    pub fn eval(&self, x: &[f64]) -> Result<f64, ModelError> {
        let mut v = self.coeff;
        for (l, (&xl, &a)) in x.iter().zip(&self.exponents).enumerate() {
            v *= power(l, xl, a)?;
        }
        Ok(v)
    }
}

impl CrispFn {
    pub fn constant(c: f64, n: usize) -> Self {
        Signomial {
            terms: vec![Term { coeff: c, exponents: vec![0.0; n] }],
        }
    }

    /// Affine function `coeffs . x + constant` as a signomial.
    pub fn affine(coeffs: &[f64], constant: f64) -> Self {
        let n = coeffs.len();
        let mut terms: Vec<_> = coeffs
            .iter()
            .enumerate()
            .map(|(l, &c)| {
                let mut e = vec![0.0; n];
                e[l] = 1.0;
                Term { coeff: c, exponents: e }
            })
            .collect();
        terms.push(Term { coeff: constant, exponents: vec![0.0; n] });
        Signomial { terms }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, ModelError> {
        self.check_dimension(x)?;
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    fn check_dimension(&self, x: &[f64]) -> Result<(), ModelError> {
        match self.terms.iter().find(|t| t.exponents.len() != x.len()) {
            Some(t) => Err(ModelError::Dimension {
                expected: t.exponents.len(),
                got: x.len(),
            }),
            None => Ok(()),
        }
    }

    /// Analytic gradient. Variables at or below [`GRAD_EPSILON`] whose
    /// exponent lies in `(0, 1)` or below zero make the gradient singular.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_dimension(x)?;
        let mut g = vec![0.0; x.len()];
        for t in &self.terms {
            for l in 0..x.len() {
                let al = t.exponents[l];
                if al == 0.0 || t.coeff == 0.0 {
                    continue;
                }
                if al < 1.0 && x[l] <= GRAD_EPSILON {
                    return Err(ModelError::SingularGradient { variable: l });
                }
                let mut v = t.coeff * al * power(l, x[l], al - 1.0)?;
                for (j, (&xj, &aj)) in x.iter().zip(&t.exponents).enumerate() {
                    if j != l {
                        v *= power(j, xj, aj)?;
                    }
                }
                g[l] += v;
            }
        }
        Ok(g)
    }

    /// Coefficients and constant when every term is constant or linear in a
    /// single variable.
    pub fn as_affine(&self) -> Option<(Vec<f64>, f64)> {
        let n = self.terms.first()?.exponents.len();
        let mut coeffs = vec![0.0; n];
        let mut constant = 0.0;
        for t in &self.terms {
            let nonzero: Vec<usize> = (0..n).filter(|&l| t.exponents[l] != 0.0).collect();
            match nonzero.as_slice() {
                [] => constant += t.coeff,
                [l] if t.exponents[*l] == 1.0 => coeffs[*l] += t.coeff,
                _ => return None,
            }
        }
        Some((coeffs, constant))
    }

    pub fn is_affine(&self) -> bool {
        self.as_affine().is_some()
    }
}

impl CrispProgram {
    pub fn objective(&self, k: usize) -> Result<&Objective<f64>, ModelError> {
        self.objectives.get(k).ok_or(ModelError::NoSuchObjective(k))
    }

    pub fn objective_values(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.objectives.iter().map(|o| o.terms.eval(x)).collect()
    }

    /// Largest constraint violation, each scaled by `1 + |rhs|`.
    pub fn max_violation(&self, x: &[f64]) -> Result<f64, ModelError> {
        let mut worst = x.iter().fold(0.0f64, |w, &v| w.max(-v));
        for c in &self.constraints {
            let g = c.terms.eval(x)?;
            let r = (g - c.rhs) / (1.0 + c.rhs.abs());
            let v = match c.relation {
                Relation::Le => r.max(0.0),
                Relation::Ge => (-r).max(0.0),
                Relation::Eq => r.abs(),
            };
            worst = worst.max(v);
        }
        Ok(worst)
    }
}

/// One finding from [`validate_program`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.errors.push(Issue { location: location.into(), message: message.into() });
    }

    fn warn(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(Issue { location: location.into(), message: message.into() });
    }
}

/// Structural and numeric checks. With `strict`, trapezoid ordering
/// problems are reported as errors instead of warnings.
pub fn validate_program(p: &FuzzyProgram, strict: bool) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = p.dimension();
    if n == 0 {
        report.error("variables", "program has no decision variables");
    }
    match p.objectives.len() {
        0 => report.error("objectives", "program has no objectives"),
        1 => report.warn("objectives", "only one objective; the model is not multiobjective"),
        _ => {}
    }
    if p.constraints.is_empty() {
        report.error("constraints", "program has no constraints");
    }

    let mut check_coeff = |report: &mut ValidationReport, loc: String, c: &Coefficient| match c {
        Coefficient::Crisp(v) if !v.is_finite() => report.error(loc, format!("non-finite coefficient {v}")),
        Coefficient::Crisp(_) => {}
        Coefficient::Fuzzy(num) => {
            let sides = num.ordering_issues();
            if !sides.is_empty() {
                let which: Vec<String> = sides.iter().map(Side::to_string).collect();
                let msg = format!("abscissae not ordered in {} trapezoid(s)", which.join(" and "));
                if strict {
                    report.error(loc, msg);
                } else {
                    report.warn(loc, msg);
                }
            }
        }
    };
    let check_fn = |report: &mut ValidationReport,
                    check_coeff: &mut dyn FnMut(&mut ValidationReport, String, &Coefficient),
                    loc: String,
                    f: &Signomial<Coefficient>| {
        if f.terms.is_empty() {
            report.error(loc.clone(), "function has no terms");
        }
        for (i, t) in f.terms.iter().enumerate() {
            let tloc = format!("{loc}.terms[{i}]");
            if t.exponents.len() != n {
                report.error(
                    format!("{tloc}.exponents"),
                    format!("{} exponents for {} variables", t.exponents.len(), n),
                );
            } else if let Some(e) = t.exponents.iter().find(|e| !e.is_finite()) {
                report.error(format!("{tloc}.exponents"), format!("non-finite exponent {e}"));
            }
            check_coeff(report, format!("{tloc}.coeff"), &t.coeff);
        }
    };

    for (k, o) in p.objectives.iter().enumerate() {
        check_fn(&mut report, &mut check_coeff, format!("objectives[{k}]"), &o.terms);
    }
    for (j, c) in p.constraints.iter().enumerate() {
        check_fn(&mut report, &mut check_coeff, format!("constraints[{j}]"), &c.terms);
        check_coeff(&mut report, format!("constraints[{j}].rhs"), &c.rhs);
    }

    if report.is_ok() {
        for (l, name) in p.variables.iter().enumerate() {
            let capped = p.constraints.iter().any(|c| {
                c.relation != Relation::Ge
                    && c.terms.terms.iter().any(|t| t.exponents[l] > 0.0 && t.coeff.expected_value() > 0.0)
            });
            if !capped {
                report.warn(
                    format!("variables[{l}]"),
                    format!("{name} has no upper-limiting constraint; the model may be unbounded"),
                );
            }
        }
    }
    report
}
