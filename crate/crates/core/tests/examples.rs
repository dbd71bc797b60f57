use it2fgp::baseline::{goal_weights, solve_weighted_additive};
use it2fgp::dialogue::{open_session, replay, Decision, DialogueError, SessionConfig, SessionStatus};
use it2fgp::fixtures::{fixture, FIXTURE_NAMES};
use it2fgp::goalmem::{build_goals, unclamped_membership, GoalKind};
use it2fgp::lpsolve::{assemble_maxmin, assemble_minmax, LpStatus};
use it2fgp::nlpcore::{optimize_over_box, payoff_table, solve_single, variable_box, NlpConfig, FEASIBILITY_TOLERANCE};
use it2fgp::sigmodel::{validate_program, CrispProgram, FuzzyProgram, Sense};

fn crisp(name: &str) -> CrispProgram {
    fixture(name).unwrap().defuzzify()
}

#[test]
fn fuzzy_example_reports_unordered_resources() {
    let p = fixture("example1_fuzzy").unwrap();
    let lenient = validate_program(&p, false);
    assert!(lenient.is_ok());
    assert_eq!(lenient.warnings.iter().filter(|w| w.message.contains("order")).count(), 2);
    let strict = validate_program(&p, true);
    assert!(!strict.is_ok());
}

#[test]
fn fixtures_round_trip_through_json() {
    for name in FIXTURE_NAMES {
        let p = fixture(name).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: FuzzyProgram = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back, "{name}");
    }
}

#[test]
fn payoff_solutions_are_feasible_and_consistent() {
    for name in ["example1_crisp", "example2_crisp", "example1_fuzzy", "example2_fuzzy"] {
        let p = crisp(name);
        let t = payoff_table(&p, &NlpConfig::default()).unwrap();
        for r in &t.rows {
            for e in [&r.max, &r.min] {
                assert!(p.max_violation(&e.x).unwrap() <= FEASIBILITY_TOLERANCE, "{name}");
                assert!((e.objective_values[r.objective] - e.value).abs() <= 1e-12 * (1.0 + e.value.abs()));
            }
            assert!(r.max.value > r.min.value);
        }
        let b = variable_box(&t);
        assert!(b.lower.iter().zip(&b.upper).all(|(l, u)| l <= u));
    }
}

#[test]
fn membership_and_objective_share_a_maximizer() {
    let p = crisp("example2_crisp");
    let t = payoff_table(&p, &NlpConfig::default()).unwrap();
    let goals = build_goals(&t).unwrap();
    let b = variable_box(&t);
    let cfg = NlpConfig { restarts: 16, ..NlpConfig::default() };
    let f = &p.objectives[0].terms;
    let by_f = optimize_over_box(f, Sense::Maximize, &b, &cfg).unwrap();
    let by_mu = optimize_over_box(&unclamped_membership(&goals[0], f), Sense::Maximize, &b, &cfg).unwrap();
    for (a, c) in by_f.x.iter().zip(&by_mu.x) {
        assert!((a - c).abs() < 1e-4, "{:?} vs {:?}", by_f.x, by_mu.x);
    }
    assert!((by_mu.value - goals[0].ramp(by_f.value)).abs() < 1e-9);
}

#[test]
fn maxmin_and_minmax_agree_on_example_one() {
    let p = crisp("example1_crisp");
    let t = payoff_table(&p, &NlpConfig::default()).unwrap();
    let goals = build_goals(&t).unwrap();
    let cfg = NlpConfig::default();
    let maxmin = assemble_maxmin(&goals, &p);
    let minmax = assemble_minmax(&goals, &p);
    let a = solve_single(&maxmin, 0, Sense::Maximize, &cfg).unwrap();
    let b = solve_single(&minmax, 0, Sense::Minimize, &cfg).unwrap();
    let lambda = a.value;
    assert!((0.0..=1.0 + 1e-9).contains(&lambda));
    let n = p.dimension();
    let f = p.objective_values(&a.x[..n]).unwrap();
    for g in &goals {
        assert!(g.ramp(f[g.objective]) >= lambda - 1e-5);
    }
    assert!(p.max_violation(&a.x[..n]).unwrap() <= FEASIBILITY_TOLERANCE);
    let min_mu = |x: &[f64]| {
        let f = p.objective_values(&x[..n]).unwrap();
        goals.iter().map(|g| g.membership(f[g.objective])).fold(1.0, f64::min)
    };
    assert!((min_mu(&a.x) - min_mu(&b.x)).abs() < 1e-4, "{} vs {}", min_mu(&a.x), min_mu(&b.x));
    assert!((b.value - (1.0 - lambda)).abs() < 1e-4);
}

#[test]
fn revising_tightens_only_targeted_limits() {
    let s = replay(&fixture("example2_crisp").unwrap(), SessionConfig::default(), &[Decision::revise(vec![0])]).unwrap();
    assert_eq!(s.iterations.len(), 2);
    let (before, after) = (&s.iterations[0], &s.iterations[1]);
    let old_f1 = before.proposal.objective_values[0];
    assert_eq!(after.goals[0].limit, old_f1);
    assert!(after.goals[0].limit >= before.goals[0].limit);
    assert_eq!(after.goals[1], before.goals[1]);
    assert_eq!(after.goals[0].membership(old_f1), 0.0);
    assert_eq!(after.proposal.linearization_points[0].as_deref(), Some(before.proposal.x.as_slice()));
    assert_eq!(s.decisions(), vec![&Decision::revise(vec![0])]);
    assert_eq!(s.status, SessionStatus::AwaitingDecision);
    for p in s.iterations.iter().map(|i| &i.proposal) {
        assert!(p.membership.iter().chain(&p.membership_current).all(|m| (0.0..=1.0).contains(m)));
        assert_eq!(p.objective_values, s.crisp.objective_values(&p.x).unwrap());
    }
}

#[test]
fn revising_a_goal_at_its_aspiration_makes_no_progress() {
    let mut s = open_session(&fixture("example1_crisp").unwrap(), SessionConfig::default());
    assert_eq!(s.goals[1].kind, GoalKind::MinGoal);
    let before = s.clone();
    let err = s.decide(Decision::revise(vec![1])).unwrap_err();
    assert!(matches!(err, DialogueError::NoProgress { .. }), "{err}");
    assert_eq!(s, before);
    s.decide(Decision::satisfied()).unwrap();
    assert_eq!(s.status, SessionStatus::Finished);
}

#[test]
fn trace_has_the_documented_shape() {
    let script = [Decision::revise(vec![0]), Decision::satisfied()];
    let s = replay(&fixture("example2_crisp").unwrap(), SessionConfig::default(), &script).unwrap();
    let v = serde_json::to_value(s.trace()).unwrap();
    assert!(v["program"]["objectives"].is_array());
    let its = v["iterations"].as_array().unwrap();
    assert_eq!(its.len(), 2);
    for key in ["goals", "linearizations", "proposal", "decision"] {
        assert!(its[0].get(key).is_some(), "{key}");
    }
    assert_eq!(its[0]["linearizations"][0].as_object().unwrap().len(), 2);
    assert_eq!(its[1]["decision"]["verdict"], "satisfied");
}

#[test]
fn weighted_additive_baseline_is_feasible() {
    let s = open_session(&fixture("example1_crisp").unwrap(), SessionConfig::default());
    let it = &s.iterations[0];
    let w = goal_weights(&s.goals).unwrap();
    let b = s.bounds.as_ref().unwrap();
    let r = solve_weighted_additive(&it.linearizations, b, &w).unwrap();
    assert_eq!(r.status, LpStatus::Optimal);
    assert!(b.contains(&r.x, 1e-12));
    for (g, d) in it.linearizations.iter().zip(&r.d_minus) {
        assert!((g.eval(&r.x) + d - 1.0).abs() <= 1e-9);
    }
    let f = s.crisp.objective_values(&r.x).unwrap();
    assert!(s.goals.iter().all(|g| (0.0..=1.0).contains(&g.membership(f[g.objective]))));
}

#[test]
fn literal_relinearization_reading_is_available() {
    let cfg = SessionConfig {
        relinearization: it2fgp::dialogue::Relinearization::Argmax,
        ..SessionConfig::default()
    };
    let s = replay(&fixture("example2_crisp").unwrap(), cfg, &[Decision::revise(vec![0])]).unwrap();
    let points = &s.iterations[1].proposal.linearization_points;
    assert_eq!(points[0], s.iterations[0].proposal.linearization_points[0]);
}
