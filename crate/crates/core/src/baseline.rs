//! Reference results of other goal-programming approaches, and a weighted
//! additive goal model for comparison runs.
//!
//! The weighted additive model is not one of the tabulated approaches; it
//! only exercises the goal weights on the same linearized goals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::goalmem::{GoalError, LinearFn, MembershipSpec};
use crate::lpsolve::{simplex_solve, FgpSolution, LinearProgram, LpError, Row};
use crate::nlpcore::VariableBox;
use crate::sigmodel::Relation;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("no reference results for example {0}")]
    UnknownExample(u32),
    #[error("{0} goals but {1} weights")]
    WeightCount(usize, usize),
    #[error(transparent)]
    Goal(#[from] GoalError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Published result of one method on one example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub method: String,
    pub proposed: bool,
    pub x: Option<Vec<f64>>,
    pub f: Vec<f64>,
    pub mu: Vec<f64>,
}

impl ReferenceRow {
    pub fn membership_sum(&self) -> f64 {
        self.mu.iter().sum()
    }
}

fn row(method: &str, proposed: bool, x: Option<[f64; 3]>, f: [f64; 2], mu: [f64; 2]) -> ReferenceRow {
    ReferenceRow {
        method: method.into(),
        proposed,
        x: x.map(|v| v.to_vec()),
        f: f.to_vec(),
        mu: mu.to_vec(),
    }
}

pub fn reference_table(example: u32) -> Result<Vec<ReferenceRow>, BaselineError> {
    match example {
        1 => Ok(vec![
            row("proposed", true, Some([0.458, 12.710, 1.946]), [74.938, 54.699], [0.963, 1.00]),
            row("Mohamed", false, Some([0.348, 13.677, 1.549]), [68.894, 56.342], [0.834, 0.928]),
            row("Gupta-Bhattacharjee model I", false, Some([0.341, 13.782, 1.418]), [67.404, 56.191], [0.801, 0.935]),
            row("Gupta-Bhattacharjee model II", false, Some([0.315, 12.607, 2.334]), [75.950, 55.443], [0.984, 0.968]),
        ]),
        2 => Ok(vec![
            row("proposed", true, Some([1.051, 3.209, 1.697]), [279.275, 21.471], [0.986, 0.935]),
            row("Mohamed", false, None, [263.617, 22.876], [0.944, 0.795]),
            row("Gupta-Bhattacharjee model I", false, None, [257.515, 21.355], [0.851, 0.947]),
            row("Gupta-Bhattacharjee model II", false, None, [280.011, 21.683], [0.990, 0.914]),
        ]),
        other => Err(BaselineError::UnknownExample(other)),
    }
}

/// Reciprocal tolerance widths.
pub fn goal_weights(specs: &[MembershipSpec]) -> Result<Vec<f64>, BaselineError> {
    specs
        .iter()
        .map(|s| {
            s.check()?;
            Ok(1.0 / s.width())
        })
        .collect()
}

/// Minimizes `sum_k w_k d-_k` subject to `g_k(x) + d-_k = 1` and the box.
pub fn solve_weighted_additive(goals: &[LinearFn], bounds: &VariableBox, weights: &[f64]) -> Result<FgpSolution, BaselineError> {
    if goals.len() != weights.len() {
        return Err(BaselineError::WeightCount(goals.len(), weights.len()));
    }
    if goals.is_empty() {
        return Err(LpError::Structure("at least one goal is required".into()).into());
    }
    let n = bounds.dimension();
    let k = goals.len();
    let mut names: Vec<String> = (1..=n).map(|l| format!("x{l}")).collect();
    names.extend((1..=k).map(|i| format!("d{i}-")));
    let rows = goals
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut coeffs = vec![0.0; n + k];
            coeffs[..n].copy_from_slice(&g.coeffs);
            coeffs[n + i] = 1.0;
            Row { coeffs, relation: Relation::Eq, rhs: 1.0 - g.constant }
        })
        .collect();
    let mut objective = vec![0.0; n];
    objective.extend_from_slice(weights);
    let mut lower = bounds.lower.clone();
    lower.resize(n + k, 0.0);
    let mut upper = bounds.upper.clone();
    upper.resize(n + k, f64::INFINITY);
    let lp = LinearProgram { names, objective, rows, lower, upper };
    let r = simplex_solve(&lp)?;
    let d_minus = r.x[n..].to_vec();
    Ok(FgpSolution {
        status: r.status,
        x: r.x[..n].to_vec(),
        beta: d_minus.iter().fold(0.0, |a: f64, &b| a.max(b)),
        d_minus,
        d_plus: Vec::new(),
        pivots: r.pivots,
    })
}

/// CSV with columns `method,x1..xn,f1..fl,mu1..mul`; missing solutions
/// leave the x cells empty.
pub fn comparison_csv(rows: &[ReferenceRow]) -> Result<String, BaselineError> {
    let n = rows.iter().filter_map(|r| r.x.as_ref().map(Vec::len)).max().unwrap_or(0);
    let l = rows.iter().map(|r| r.f.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["method".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=l).map(|i| format!("f{i}")));
    header.extend((1..=l).map(|i| format!("mu{i}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.method.clone()];
        match &r.x {
            Some(x) => rec.extend(x.iter().map(f64::to_string)),
            None => rec.extend(std::iter::repeat_n(String::new(), n)),
        }
        rec.extend(r.f.iter().map(f64::to_string));
        rec.extend(r.mu.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
