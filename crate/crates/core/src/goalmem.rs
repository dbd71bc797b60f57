//! Fuzzy goals, their membership functions and first-order linearization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nlpcore::PayoffTable;
use crate::sigmodel::{CrispFn, ModelError, Sense, Term};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GoalError {
    #[error("objective {objective}: tolerance interval [{low}, {high}] is narrower than {min_width:e}")]
    Degenerate {
        objective: usize,
        low: f64,
        high: f64,
        min_width: f64,
    },
    #[error("linear function has {got} coefficients, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite coefficient in linearization")]
    NonFinite,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoalKind {
    /// Approximately at least the aspiration; zero at or below `limit`.
    MaxGoal,
    /// Approximately at most the aspiration; zero at or above `limit`.
    MinGoal,
}

/// One fuzzy goal. `limit` is the lower tolerance limit of a max-goal or
/// the upper tolerance limit of a min-goal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipSpec {
    pub objective: usize,
    pub kind: GoalKind,
    pub aspiration: f64,
    pub limit: f64,
}

/// Smallest allowed tolerance interval for aspiration `s`.
pub fn min_width(s: f64) -> f64 {
    1e-6 * (1.0 + s.abs())
}

impl MembershipSpec {
    pub fn new(objective: usize, kind: GoalKind, aspiration: f64, limit: f64) -> Result<Self, GoalError> {
        let spec = MembershipSpec { objective, kind, aspiration, limit };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<(), GoalError> {
        let w = min_width(self.aspiration);
        if !(self.width() >= w) {
            let (low, high) = match self.kind {
                GoalKind::MaxGoal => (self.limit, self.aspiration),
                GoalKind::MinGoal => (self.aspiration, self.limit),
            };
            return Err(GoalError::Degenerate {
                objective: self.objective,
                low,
                high,
                min_width: w,
            });
        }
        Ok(())
    }

    /// Signed tolerance width: `s - L` for a max-goal, `U - s` for a min-goal.
    pub fn width(&self) -> f64 {
        match self.kind {
            GoalKind::MaxGoal => self.aspiration - self.limit,
            GoalKind::MinGoal => self.limit - self.aspiration,
        }
    }

    /// Middle-branch membership of objective value `f`, not clamped.
    pub fn ramp(&self, f: f64) -> f64 {
        match self.kind {
            GoalKind::MaxGoal => (f - self.limit) / self.width(),
            GoalKind::MinGoal => (self.limit - f) / self.width(),
        }
    }

    /// Membership of objective value `f`, in `[0, 1]`.
    pub fn membership(&self, f: f64) -> f64 {
        self.ramp(f).clamp(0.0, 1.0)
    }

    /// Same goal with a different tolerance limit, if the interval stays wide enough.
    pub fn with_limit(&self, limit: f64) -> Result<Self, GoalError> {
        MembershipSpec::new(self.objective, self.kind, self.aspiration, limit)
    }
}

/// Affine function `coeffs . x + constant`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFn {
    pub coeffs: Vec<f64>,
    pub constant: f64,
}

impl LinearFn {
    pub fn new(coeffs: Vec<f64>, constant: f64) -> Result<Self, GoalError> {
        if coeffs.iter().chain([&constant]).any(|v| !v.is_finite()) {
            return Err(GoalError::NonFinite);
        }
        Ok(LinearFn { coeffs, constant })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.constant
    }

    pub fn to_signomial(&self) -> CrispFn {
        CrispFn::affine(&self.coeffs, self.constant)
    }
}

/// One goal per objective, direction taken from the declared sense.
pub fn build_goals(t: &PayoffTable) -> Result<Vec<MembershipSpec>, GoalError> {
    t.rows
        .iter()
        .map(|r| match r.sense {
            Sense::Maximize => MembershipSpec::new(r.objective, GoalKind::MaxGoal, r.max.value, r.min.value),
            Sense::Minimize => MembershipSpec::new(r.objective, GoalKind::MinGoal, r.min.value, r.max.value),
        })
        .collect()
}

/// Clamped membership of `f(x)`.
pub fn eval_membership(spec: &MembershipSpec, f: &CrispFn, x: &[f64]) -> Result<f64, GoalError> {
    Ok(spec.membership(f.eval(x)?))
}

/// The middle branch as a signomial: every coefficient of `f` divided by
/// the signed width, plus the constant term.
pub fn unclamped_membership(spec: &MembershipSpec, f: &CrispFn) -> CrispFn {
    let n = f.terms.first().map_or(0, |t| t.exponents.len());
    let w = spec.width();
    let (sign, constant) = match spec.kind {
        GoalKind::MaxGoal => (1.0, -spec.limit / w),
        GoalKind::MinGoal => (-1.0, spec.limit / w),
    };
    let mut terms: Vec<Term<f64>> = f
        .terms
        .iter()
        .map(|t| Term { coeff: sign * t.coeff / w, exponents: t.exponents.clone() })
        .collect();
    terms.push(Term { coeff: constant, exponents: vec![0.0; n] });
    CrispFn { terms }
}

/// First-order expansion of `g` at `x_star`, with the zeroth-order term
/// folded into the constant. Affine inputs are returned exactly.
pub fn linearize_fn(g: &CrispFn, x_star: &[f64]) -> Result<LinearFn, GoalError> {
    if let Some((coeffs, constant)) = g.as_affine() {
        if coeffs.len() != x_star.len() {
            return Err(GoalError::Dimension { expected: x_star.len(), got: coeffs.len() });
        }
        return LinearFn::new(coeffs, constant);
    }
    let value = g.eval(x_star)?;
    let grad = g.gradient(x_star)?;
    let constant = value - grad.iter().zip(x_star).map(|(d, x)| d * x).sum::<f64>();
    LinearFn::new(grad, constant)
}

/// Linearization of the unclamped membership of `f` at `x_star`.
pub fn taylor_linearize(spec: &MembershipSpec, f: &CrispFn, x_star: &[f64]) -> Result<LinearFn, GoalError> {
    linearize_fn(&unclamped_membership(spec, f), x_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture;
    use approx::assert_abs_diff_eq;

    fn ex1() -> crate::sigmodel::CrispProgram {
        fixture("example1_crisp").unwrap().defuzzify()
    }

    #[test]
    fn branch_endpoints() {
        let g = MembershipSpec::new(0, GoalKind::MaxGoal, 10.0, 2.0).unwrap();
        assert_eq!(g.membership(10.0), 1.0);
        assert_eq!(g.membership(2.0), 0.0);
        assert_eq!(g.membership(30.0), 1.0);
        assert_eq!(g.membership(6.0), 0.5);
        let g = MembershipSpec::new(1, GoalKind::MinGoal, 2.0, 10.0).unwrap();
        assert_eq!(g.membership(2.0), 1.0);
        assert_eq!(g.membership(10.0), 0.0);
        assert_eq!(g.membership(4.0), 0.75);
    }

    #[test]
    fn degenerate_interval_rejected() {
        assert!(matches!(
            MembershipSpec::new(0, GoalKind::MaxGoal, 5.0, 5.0),
            Err(GoalError::Degenerate { .. })
        ));
        assert!(MembershipSpec::new(0, GoalKind::MinGoal, 5.0, 4.0).is_err());
    }

    #[test]
    fn membership_at_reported_points() {
        let g = MembershipSpec::new(0, GoalKind::MaxGoal, 76.694, 29.785).unwrap();
        assert_abs_diff_eq!(g.membership(74.938), 0.963, epsilon = 5e-4);
        let g = MembershipSpec::new(1, GoalKind::MinGoal, 20.820, 30.858).unwrap();
        assert_abs_diff_eq!(g.membership(21.471), 0.935, epsilon = 5e-4);
    }

    #[test]
    fn unclamped_coefficients_divide_by_width() {
        let p = ex1();
        let g = MembershipSpec::new(0, GoalKind::MaxGoal, 76.694, 29.785).unwrap();
        let m = unclamped_membership(&g, &p.objectives[0].terms);
        let expect = [0.487, -0.056, 0.492, -0.085, 0.490, -0.078, -0.635];
        for (t, e) in m.terms.iter().zip(expect) {
            assert_abs_diff_eq!(t.coeff, e, epsilon = 1e-3);
        }
        for (t, o) in m.terms.iter().zip(&p.objectives[0].terms.terms) {
            assert_eq!(t.coeff, o.coeff / g.width());
        }
        let g = MembershipSpec::new(1, GoalKind::MinGoal, 54.699, 77.653).unwrap();
        let lin = taylor_linearize(&g, &p.objectives[1].terms, &[1.0, 1.0, 1.0]).unwrap();
        for (c, e) in lin.coeffs.iter().zip([-0.120, -0.157, -0.169]) {
            assert_abs_diff_eq!(*c, e, epsilon = 1e-3);
        }
        assert_abs_diff_eq!(lin.constant, 3.383, epsilon = 1e-3);
    }

    #[test]
    fn linearization_matches_at_expansion_point_and_decays_quadratically() {
        let p = ex1();
        let g = MembershipSpec::new(0, GoalKind::MaxGoal, 76.694, 29.785).unwrap();
        let f = &p.objectives[0].terms;
        let u = unclamped_membership(&g, f);
        let x = [0.458, 12.344, 2.703];
        let lin = taylor_linearize(&g, f, &x).unwrap();
        assert_abs_diff_eq!(lin.eval(&x), u.eval(&x).unwrap(), epsilon = 1e-12);
        for l in 0..3 {
            let err = |h: f64| {
                let mut y = x;
                y[l] += h;
                (lin.eval(&y) - u.eval(&y).unwrap()).abs()
            };
            let ratio = err(1e-2) / err(1e-3);
            assert!((50.0..200.0).contains(&ratio), "axis {l}: ratio {ratio}");
        }
    }

    #[test]
    fn affine_membership_is_reproduced_exactly() {
        let f = CrispFn::affine(&[2.0, -1.0], 3.0);
        let g = MembershipSpec::new(0, GoalKind::MinGoal, 1.0, 9.0).unwrap();
        let u = unclamped_membership(&g, &f);
        let lin = taylor_linearize(&g, &f, &[0.4, 7.0]).unwrap();
        let (c, k) = u.as_affine().unwrap();
        assert_eq!(lin.coeffs, c);
        assert_eq!(lin.constant, k);
    }

    #[test]
    fn linear_fn_serializes_with_named_fields() {
        let l = LinearFn::new(vec![1.0, -2.0], 0.5).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(s, r#"{"coeffs":[1.0,-2.0],"constant":0.5}"#);
        assert!(LinearFn::new(vec![f64::NAN], 0.0).is_err());
    }
}
