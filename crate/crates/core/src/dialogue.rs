//! The interactive loop: propose a compromise solution, take the decision
//! maker's verdict, tighten tolerance limits and solve again.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::goalmem::{build_goals, taylor_linearize, unclamped_membership, GoalKind, LinearFn, MembershipSpec};
use crate::lpsolve::{assemble_fgp, FgpModel, FgpSolution, LpStatus};
use crate::nlpcore::{optimize_over_box, payoff_table, variable_box, NlpConfig, NlpError, PayoffTable, VariableBox};
use crate::sigmodel::{CrispProgram, FuzzyProgram, Sense};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DialogueError {
    #[error("session is {0}, not awaiting a decision")]
    InvalidState(SessionStatus),
    #[error("invalid decision: {0}")]
    InvalidDecision(String),
    #[error("no tolerance limit can be tightened for objectives {targets:?}")]
    NoProgress { targets: Vec<usize> },
    #[error("{stage} failed: {message}")]
    Stage { stage: Stage, message: String, infeasible: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Payoff,
    Goals,
    Argmax,
    Linearize,
    Solve,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Payoff => "payoff",
            Stage::Goals => "goals",
            Stage::Argmax => "argmax",
            Stage::Linearize => "linearize",
            Stage::Solve => "solve",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionStatus {
    AwaitingDecision,
    Finished,
    Failed,
}

impl std::fmt::Display for SessionStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SessionStatus::AwaitingDecision => "awaiting-decision",
            SessionStatus::Finished => "finished",
            SessionStatus::Failed => "failed",
        })
    }
}

/// Where nonlinear memberships are expanded after a revision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relinearization {
    /// At the incumbent proposal.
    #[default]
    Incumbent,
    /// At fresh maximizers of each membership over the box.
    Argmax,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub nlp: NlpConfig,
    /// Add surplus deviations to every goal row from the start.
    pub surplus: bool,
    pub relinearization: Relinearization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Revise,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<usize>,
}

impl Decision {
    pub fn satisfied() -> Self {
        Decision { verdict: Verdict::Satisfied, targets: Vec::new() }
    }

    pub fn revise(targets: Vec<usize>) -> Self {
        Decision { verdict: Verdict::Revise, targets }
    }

    fn check(&self, objectives: usize) -> Result<(), DialogueError> {
        match self.verdict {
            Verdict::Satisfied if !self.targets.is_empty() => {
                Err(DialogueError::InvalidDecision("a satisfied verdict takes no targets".into()))
            }
            Verdict::Revise if self.targets.is_empty() => {
                Err(DialogueError::InvalidDecision("revise needs at least one target".into()))
            }
            _ => match self.targets.iter().find(|&&k| k >= objectives) {
                Some(k) => Err(DialogueError::InvalidDecision(format!("objective {k} does not exist"))),
                None => Ok(()),
            },
        }
    }
}

/// Scripted decisions for unattended runs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DecisionScript {
    pub decisions: Vec<Decision>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub iteration: usize,
    pub x: Vec<f64>,
    pub objective_values: Vec<f64>,
    /// Memberships of the objective values under the goals built from the
    /// payoff table.
    pub membership: Vec<f64>,
    /// Memberships under the tolerance limits in force for this iteration.
    pub membership_current: Vec<f64>,
    pub beta: f64,
    pub d_minus: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub d_plus: Vec<f64>,
    pub linearization_points: Vec<Option<Vec<f64>>>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub goals: Vec<MembershipSpec>,
    pub linearizations: Vec<LinearFn>,
    pub proposal: Proposal,
    pub decision: Option<Decision>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: Stage,
    pub message: String,
    pub infeasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub program: FuzzyProgram,
    pub crisp: CrispProgram,
    pub config: SessionConfig,
    pub status: SessionStatus,
    pub payoff: Option<PayoffTable>,
    #[serde(rename = "box")]
    pub bounds: Option<VariableBox>,
    pub initial_goals: Vec<MembershipSpec>,
    pub goals: Vec<MembershipSpec>,
    pub iterations: Vec<Iteration>,
    pub failure: Option<Failure>,
    #[serde(skip)]
    last_model: Option<FgpModel>,
}

/// Trace file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub program: FuzzyProgram,
    pub status: SessionStatus,
    pub payoff: Option<PayoffTable>,
    #[serde(rename = "box")]
    pub bounds: Option<VariableBox>,
    pub failure: Option<Failure>,
    pub iterations: Vec<Iteration>,
}

fn stage_error(stage: Stage, e: impl std::fmt::Display, infeasible: bool) -> DialogueError {
    DialogueError::Stage { stage, message: e.to_string(), infeasible }
}

fn nlp_infeasible(e: &NlpError) -> bool {
    match e {
        NlpError::InfeasibleOrUnbounded { .. } => true,
        NlpError::Payoff { source, .. } => nlp_infeasible(source),
        _ => false,
    }
}

impl Session {
    pub fn proposal(&self) -> Option<&Proposal> {
        self.iterations.last().map(|i| &i.proposal)
    }

    pub fn last_model(&self) -> Option<&FgpModel> {
        self.last_model.as_ref()
    }

    pub fn decisions(&self) -> Vec<&Decision> {
        self.iterations.iter().filter_map(|i| i.decision.as_ref()).collect()
    }

    fn fail(&mut self, e: DialogueError) {
        if let DialogueError::Stage { stage, message, infeasible } = e {
            self.failure = Some(Failure { stage, message, infeasible });
        }
        self.status = SessionStatus::Failed;
    }

    fn bounds(&self) -> &VariableBox {
        self.bounds.as_ref().expect("box is set before iterating")
    }

    /// Maximizer of each nonlinear membership over the box; `None` for
    /// affine memberships.
    fn argmax_points(&self) -> Result<Vec<Option<Vec<f64>>>, DialogueError> {
        self.goals
            .iter()
            .map(|g| {
                let f = &self.crisp.objectives[g.objective].terms;
                if f.is_affine() {
                    return Ok(None);
                }
                let sense = match g.kind {
                    GoalKind::MaxGoal => Sense::Maximize,
                    GoalKind::MinGoal => Sense::Minimize,
                };
                optimize_over_box(f, sense, self.bounds(), &self.config.nlp)
                    .map(|s| Some(s.x))
                    .map_err(|e| stage_error(Stage::Argmax, e, false))
            })
            .collect()
    }

    fn propose(&mut self, points: Vec<Option<Vec<f64>>>) -> Result<Iteration, DialogueError> {
        let n = self.crisp.dimension();
        let linearizations = self
            .goals
            .iter()
            .zip(&points)
            .map(|(g, p)| {
                let f = &self.crisp.objectives[g.objective].terms;
                let at = p.clone().unwrap_or_else(|| vec![0.0; n]);
                taylor_linearize(g, f, &at).map_err(|e| stage_error(Stage::Linearize, e, false))
            })
            .collect::<Result<Vec<_>, _>>()?;

        let solve = |surplus| {
            let model = assemble_fgp(&linearizations, self.bounds(), surplus).map_err(|e| stage_error(Stage::Solve, e, false))?;
            let sol = model.solve().map_err(|e| stage_error(Stage::Solve, e, false))?;
            Ok::<(FgpModel, FgpSolution), DialogueError>((model, sol))
        };
        let (mut model, mut sol) = solve(self.config.surplus)?;
        if sol.status == LpStatus::Infeasible && !self.config.surplus {
            tracing::info!("goal LP infeasible without surplus deviations; retrying with them");
            (model, sol) = solve(true)?;
        }
        if sol.status != LpStatus::Optimal {
            return Err(stage_error(
                Stage::Solve,
                format!("goal LP is {:?}", sol.status).to_lowercase(),
                sol.status == LpStatus::Infeasible,
            ));
        }
        let objective_values = self
            .crisp
            .objective_values(&sol.x)
            .map_err(|e| stage_error(Stage::Solve, e, false))?;
        let members = |goals: &[MembershipSpec]| -> Vec<f64> {
            goals.iter().map(|g| g.membership(objective_values[g.objective])).collect()
        };
        let proposal = Proposal {
            iteration: self.iterations.len() + 1,
            membership: members(&self.initial_goals),
            membership_current: members(&self.goals),
            objective_values: objective_values.clone(),
            x: sol.x,
            beta: sol.beta,
            d_minus: sol.d_minus,
            d_plus: sol.d_plus,
            linearization_points: points,
            pivots: sol.pivots,
        };
        self.last_model = Some(model);
        Ok(Iteration {
            goals: self.goals.clone(),
            linearizations,
            proposal,
            decision: None,
        })
    }

    fn start(&mut self) -> Result<(), DialogueError> {
        let payoff = payoff_table(&self.crisp, &self.config.nlp).map_err(|e| {
            let infeasible = nlp_infeasible(&e);
            stage_error(Stage::Payoff, e, infeasible)
        })?;
        self.bounds = Some(variable_box(&payoff));
        self.goals = build_goals(&payoff).map_err(|e| stage_error(Stage::Goals, e, false))?;
        self.initial_goals = self.goals.clone();
        self.payoff = Some(payoff);
        let points = self.argmax_points()?;
        let it = self.propose(points)?;
        self.iterations.push(it);
        Ok(())
    }

    /// Applies a verdict to the current proposal.
    pub fn decide(&mut self, d: Decision) -> Result<&Proposal, DialogueError> {
        if self.status != SessionStatus::AwaitingDecision {
            return Err(DialogueError::InvalidState(self.status));
        }
        d.check(self.crisp.objectives.len())?;
        let incumbent = self.proposal().expect("awaiting sessions have a proposal").clone();
        if d.verdict == Verdict::Satisfied {
            self.iterations.last_mut().expect("proposal exists").decision = Some(d);
            self.status = SessionStatus::Finished;
            return Ok(self.proposal().expect("proposal exists"));
        }

        let mut goals = self.goals.clone();
        let mut moved = false;
        for g in goals.iter_mut().filter(|g| d.targets.contains(&g.objective)) {
            let f = incumbent.objective_values[g.objective];
            let tighter = match g.kind {
                GoalKind::MaxGoal => f > g.limit,
                GoalKind::MinGoal => f < g.limit,
            };
            if let (true, Ok(updated)) = (tighter, g.with_limit(f)) {
                *g = updated;
                moved = true;
            }
        }
        if !moved {
            return Err(DialogueError::NoProgress { targets: d.targets.clone() });
        }

        let previous_goals = std::mem::replace(&mut self.goals, goals);
        let points = match self.config.relinearization {
            Relinearization::Incumbent => self
                .goals
                .iter()
                .map(|g| {
                    let affine = unclamped_membership(g, &self.crisp.objectives[g.objective].terms).is_affine();
                    (!affine).then(|| incumbent.x.clone())
                })
                .collect(),
            Relinearization::Argmax => match self.argmax_points() {
                Ok(p) => p,
                Err(e) => {
                    self.goals = previous_goals;
                    return Err(e);
                }
            },
        };
        match self.propose(points) {
            Ok(it) => {
                self.iterations.last_mut().expect("proposal exists").decision = Some(d);
                self.iterations.push(it);
                Ok(self.proposal().expect("just pushed"))
            }
            Err(e) => {
                self.goals = previous_goals;
                Err(e)
            }
        }
    }

    pub fn trace(&self) -> Trace {
        Trace {
            program: self.program.clone(),
            status: self.status,
            payoff: self.payoff.clone(),
            bounds: self.bounds.clone(),
            failure: self.failure.clone(),
            iterations: self.iterations.clone(),
        }
    }
}

/// Runs the opening steps: payoff table, box, goals, linearization and the
/// first goal LP. Errors leave the session in the failed state.
pub fn open_session(program: &FuzzyProgram, config: SessionConfig) -> Session {
    let crisp = program.defuzzify();
    let mut s = Session {
        program: program.clone(),
        crisp,
        config,
        status: SessionStatus::AwaitingDecision,
        payoff: None,
        bounds: None,
        initial_goals: Vec::new(),
        goals: Vec::new(),
        iterations: Vec::new(),
        failure: None,
        last_model: None,
    };
    if let Err(e) = s.start() {
        tracing::warn!(error = %e, "session failed to open");
        s.iterations.clear();
        s.fail(e);
    }
    s
}

/// Opens a session and applies `decisions` in order, stopping at the first
/// error or once the session finishes.
pub fn replay(program: &FuzzyProgram, config: SessionConfig, decisions: &[Decision]) -> Result<Session, (Session, DialogueError)> {
    let mut s = open_session(program, config);
    if let Some(f) = &s.failure {
        let e = DialogueError::Stage { stage: f.stage, message: f.message.clone(), infeasible: f.infeasible };
        return Err((s, e));
    }
    for d in decisions {
        if s.status != SessionStatus::AwaitingDecision {
            break;
        }
        if let Err(e) = s.decide(d.clone()) {
            return Err((s, e));
        }
    }
    Ok(s)
}
