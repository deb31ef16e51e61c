//! Concrete semantics of valuated timed automata.
//!
//! States are pairs of a location and a clock valuation satisfying the
//! location's valuated invariant. A run alternates delay and discrete
//! transitions; each step of [`Run`] is one combined delay-plus-edge
//! transition.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    Constraint, EdgeId, Inequality, LocationId, ModelError, ParamValuation, PtaModel,
};
use crate::rational::{rat, ratio, Rational};

/// Total assignment of nonnegative rationals to the model's clocks, aligned
/// with the model's clock order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClockValuation {
    values: Vec<Rational>,
}

impl ClockValuation {
    pub fn new(values: Vec<Rational>) -> Self {
        ClockValuation { values }
    }

    /// The valuation assigning 0 to all of `n` clocks.
    pub fn zero(n: usize) -> Self {
        ClockValuation {
            values: alloc::vec![rat(0); n],
        }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, c: crate::model::ClockId) -> Result<&Rational, ModelError> {
        self.values.get(c.0).ok_or(ModelError::UnknownClock(c))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// `w + d`: every clock advanced by `d`.
    pub fn advanced(&self, d: &Rational) -> ClockValuation {
        ClockValuation {
            values: self.values.iter().map(|v| v + d).collect(),
        }
    }

    /// `[w]_R`: clocks in `resets` set to 0, others unchanged.
    pub fn reset<'a, I>(&self, resets: I) -> ClockValuation
    where
        I: IntoIterator<Item = &'a crate::model::ClockId>,
    {
        let mut values = self.values.clone();
        for c in resets {
            if c.0 < values.len() {
                values[c.0] = rat(0);
            }
        }
        ClockValuation { values }
    }
}

/// A location paired with a clock valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteState {
    pub location: LocationId,
    pub clocks: ClockValuation,
}

impl ConcreteState {
    pub fn initial(model: &PtaModel) -> Self {
        ConcreteState {
            location: model.initial,
            clocks: ClockValuation::zero(model.clock_count()),
        }
    }
}

/// One combined transition: delay `delay` in the current location, then fire
/// `edge`, landing in `state`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunStep {
    pub delay: Rational,
    pub edge: EdgeId,
    pub state: ConcreteState,
}

/// A finite run: the initial state followed by combined transitions. The
/// length of a run is its number of edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub initial: ConcreteState,
    pub steps: Vec<RunStep>,
}

impl Run {
    /// The empty run from the model's initial state.
    pub fn empty(model: &PtaModel) -> Self {
        Run {
            initial: ConcreteState::initial(model),
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last_state(&self) -> &ConcreteState {
        self.steps.last().map(|s| &s.state).unwrap_or(&self.initial)
    }

    /// State at index `i`: the initial state for `i == 0`, otherwise the
    /// state reached by step `i - 1`.
    pub fn state_at(&self, i: usize) -> &ConcreteState {
        if i == 0 {
            &self.initial
        } else {
            &self.steps[i - 1].state
        }
    }

    /// Total sum of the delays along the run.
    pub fn total_time(&self) -> Rational {
        self.steps.iter().fold(rat(0), |acc, s| acc + &s.delay)
    }
}

/// Reachability target: a location (by id) or an atomic-proposition label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Goal {
    Location(LocationId),
    Label(String),
}

impl Goal {
    pub fn matches(&self, model: &PtaModel, location: LocationId) -> bool {
        match self {
            Goal::Location(l) => *l == location,
            Goal::Label(lb) => model.location(location).labels.contains(lb),
        }
    }
}

/// Error raised by the transition functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    /// The invariant fails somewhere in `[0, d]`; carries the first violated
    /// inequality rendered with clock names.
    InvariantViolated { location: String, inequality: String },
    EdgeSourceMismatch { edge: EdgeId, at: String },
    GuardUnsatisfied { edge: EdgeId, inequality: String },
    TargetInvariantUnsatisfied { edge: EdgeId, inequality: String },
    NegativeDelay,
    Model(ModelError),
}

impl From<ModelError> for SemanticsError {
    fn from(e: ModelError) -> Self {
        SemanticsError::Model(e)
    }
}

impl fmt::Display for SemanticsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticsError::InvariantViolated { location, inequality } => {
                write!(f, "invariant of '{location}' violated: {inequality}")
            }
            SemanticsError::EdgeSourceMismatch { edge, at } => {
                write!(f, "edge {edge} does not leave location '{at}'")
            }
            SemanticsError::GuardUnsatisfied { edge, inequality } => {
                write!(f, "guard of edge {edge} unsatisfied: {inequality}")
            }
            SemanticsError::TargetInvariantUnsatisfied { edge, inequality } => {
                write!(f, "target invariant of edge {edge} unsatisfied: {inequality}")
            }
            SemanticsError::NegativeDelay => write!(f, "negative delay"),
            SemanticsError::Model(e) => write!(f, "{e}"),
        }
    }
}

fn render_inequality(model: &PtaModel, ineq: &Inequality, v: &ParamValuation) -> String {
    use alloc::format;
    let bound = ineq
        .bound
        .eval(v)
        .map(|b| format!("{b}"))
        .unwrap_or_else(|_| String::from("?"));
    format!(
        "{} {} {}",
        model.clocks.get(ineq.clock.0).map(String::as_str).unwrap_or("?"),
        ineq.rel.symbol(),
        bound
    )
}

/// Whether `w` satisfies the constraint with every parameter replaced by its
/// value under `v`.
pub fn satisfies(
    w: &ClockValuation,
    c: &Constraint,
    v: &ParamValuation,
) -> Result<bool, ModelError> {
    Ok(first_violated(w, c, v)?.is_none())
}

fn first_violated<'c>(
    w: &ClockValuation,
    c: &'c Constraint,
    v: &ParamValuation,
) -> Result<Option<&'c Inequality>, ModelError> {
    for ineq in c.inequalities() {
        let lhs = w.get(ineq.clock)?;
        let rhs = ineq.bound.eval(v)?;
        if !ineq.rel.holds(lhs, &rhs) {
            return Ok(Some(ineq));
        }
    }
    Ok(None)
}

/// Delays `d` time units in place. The invariant must hold throughout
/// `[0, d]`; since each inequality's satisfied delay set is an interval, a
/// conjunction holding at both endpoints holds on the whole of `[0, d]`, so
/// only the endpoints are checked.
pub fn delay_successor(
    s: &ConcreteState,
    d: &Rational,
    model: &PtaModel,
    v: &ParamValuation,
) -> Result<ConcreteState, SemanticsError> {
    if d.is_negative() {
        return Err(SemanticsError::NegativeDelay);
    }
    let invariant = &model.location(s.location).invariant;
    let advanced = s.clocks.advanced(d);
    for w in [&s.clocks, &advanced] {
        if let Some(ineq) = first_violated(w, invariant, v)? {
            return Err(SemanticsError::InvariantViolated {
                location: model.location_name(s.location).into(),
                inequality: render_inequality(model, ineq, v),
            });
        }
    }
    Ok(ConcreteState {
        location: s.location,
        clocks: advanced,
    })
}

/// Fires `edge` from `s`: the guard must hold, clocks in the reset set drop
/// to 0, and the target invariant must hold at the new valuation.
pub fn discrete_successor(
    s: &ConcreteState,
    edge: EdgeId,
    model: &PtaModel,
    v: &ParamValuation,
) -> Result<ConcreteState, SemanticsError> {
    let e = model.edge(edge);
    if e.source != s.location {
        return Err(SemanticsError::EdgeSourceMismatch {
            edge,
            at: model.location_name(s.location).into(),
        });
    }
    if let Some(ineq) = first_violated(&s.clocks, &e.guard, v)? {
        return Err(SemanticsError::GuardUnsatisfied {
            edge,
            inequality: render_inequality(model, ineq, v),
        });
    }
    let clocks = s.clocks.reset(e.resets.iter());
    if let Some(ineq) = first_violated(&clocks, &model.location(e.target).invariant, v)? {
        return Err(SemanticsError::TargetInvariantUnsatisfied {
            edge,
            inequality: render_inequality(model, ineq, v),
        });
    }
    Ok(ConcreteState {
        location: e.target,
        clocks,
    })
}

/// One combined transition: delay `d`, then fire `edge`.
pub fn step(
    s: &ConcreteState,
    d: &Rational,
    edge: EdgeId,
    model: &PtaModel,
    v: &ParamValuation,
) -> Result<ConcreteState, SemanticsError> {
    let delayed = delay_successor(s, d, model, v)?;
    discrete_successor(&delayed, edge, model, v)
}

/// Failure report of [`validate_run`]: the index of the first invalid step
/// (`None` for an invalid initial state) and the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunFailure {
    pub step: Option<usize>,
    pub reason: SemanticsError,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(i) => write!(f, "step {i}: {}", self.reason),
            None => write!(f, "initial state: {}", self.reason),
        }
    }
}

/// Replays the run and reports the first invalid step. The run must start at
/// the model's initial state `(ℓ_0, 0)` and each step must be a valid
/// combined transition producing exactly the recorded state.
pub fn validate_run(model: &PtaModel, v: &ParamValuation, run: &Run) -> Result<(), RunFailure> {
    let invalid_initial = |reason| RunFailure { step: None, reason };
    if run.initial.location != model.initial || !run.initial.clocks.is_zero() {
        return Err(invalid_initial(SemanticsError::EdgeSourceMismatch {
            edge: EdgeId(0),
            at: model.location_name(run.initial.location).into(),
        }));
    }
    match satisfies(&run.initial.clocks, &model.location(model.initial).invariant, v) {
        Ok(true) => {}
        Ok(false) => {
            return Err(invalid_initial(SemanticsError::InvariantViolated {
                location: model.location_name(model.initial).into(),
                inequality: String::from("initial invariant"),
            }))
        }
        Err(e) => return Err(invalid_initial(e.into())),
    }

    let mut current = run.initial.clone();
    for (i, s) in run.steps.iter().enumerate() {
        match step(&current, &s.delay, s.edge, model, v) {
            Ok(next) if next == s.state => current = next,
            Ok(_) => {
                return Err(RunFailure {
                    step: Some(i),
                    reason: SemanticsError::EdgeSourceMismatch {
                        edge: s.edge,
                        at: String::from("recorded state differs from replay"),
                    },
                })
            }
            Err(reason) => return Err(RunFailure { step: Some(i), reason }),
        }
    }
    Ok(())
}

/// Total sum of the delays along `run`.
pub fn total_time(run: &Run) -> Rational {
    run.total_time()
}

/// Randomized incomplete search for a run reaching `goal`.
///
/// Keeps a bounded FIFO queue of partial runs. Candidate delays at each state
/// are 0 plus, for every invariant inequality of the current location, the
/// distance to its bound and half of it (when nonnegative); boundary-critical
/// behaviors are far more likely to be hit this way than by uniform sampling.
/// Deterministic for a given seed. Returning `None` proves nothing.
pub fn random_explore(
    model: &PtaModel,
    v: &ParamValuation,
    goal: &Goal,
    budget: usize,
    seed: u64,
) -> Option<Run> {
    const QUEUE_CAP: usize = 256;

    let initial = ConcreteState::initial(model);
    if satisfies(&initial.clocks, &model.location(initial.location).invariant, v) != Ok(true) {
        return None;
    }
    let start = Run {
        initial,
        steps: Vec::new(),
    };
    if goal.matches(model, start.initial.location) {
        return Some(start);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges_by_source = model.edges_by_source();
    let mut queue: VecDeque<Run> = VecDeque::new();
    queue.push_back(start);
    let mut expansions = 0usize;

    while let Some(run) = queue.pop_front() {
        if expansions >= budget {
            break;
        }
        expansions += 1;

        let state = run.last_state().clone();
        let mut delays = candidate_delays(model, v, &state);
        delays.shuffle(&mut rng);

        for d in delays {
            let Ok(delayed) = delay_successor(&state, &d, model, v) else {
                continue;
            };
            let mut edges = edges_by_source[state.location.0].clone();
            edges.shuffle(&mut rng);
            for edge in edges {
                let Ok(next) = discrete_successor(&delayed, edge, model, v) else {
                    continue;
                };
                let mut extended = run.clone();
                extended.steps.push(RunStep {
                    delay: d.clone(),
                    edge,
                    state: next.clone(),
                });
                if goal.matches(model, next.location) {
                    return Some(extended);
                }
                if queue.len() < QUEUE_CAP {
                    queue.push_back(extended);
                } else if rng.gen_bool(0.5) {
                    // Queue full: replace a random entry to keep exploring.
                    let i = rng.gen_range(0..queue.len());
                    queue[i] = extended;
                }
            }
        }
    }
    None
}

/// 0, plus distance-to-bound and half-distance for each invariant inequality
/// whose bound lies ahead of the current clock value.
fn candidate_delays(model: &PtaModel, v: &ParamValuation, s: &ConcreteState) -> Vec<Rational> {
    let mut out = alloc::vec![rat(0)];
    for ineq in model.location(s.location).invariant.inequalities() {
        let (Ok(bound), Ok(val)) = (ineq.bound.eval(v), s.clocks.get(ineq.clock)) else {
            continue;
        };
        let distance = bound - val;
        if !distance.is_negative() {
            out.push(&distance * ratio(1, 2));
            out.push(distance);
        }
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        ActionId, ClockId, Constraint, Edge, Inequality, LinearBound, Location, ParamId, PtaModel,
        Relation,
    };
    use alloc::collections::BTreeSet;
    use alloc::vec;

    fn ineq(clock: usize, rel: Relation, params: Vec<usize>, d: i64) -> Inequality {
        Inequality::new(
            ClockId(clock),
            rel,
            LinearBound::new(params.into_iter().map(ParamId).collect(), d),
        )
    }

    /// Two locations, one edge, one clock, one parameter.
    fn two_location_model(invariant0: Constraint, invariant1: Constraint, resets: Vec<usize>) -> PtaModel {
        PtaModel {
            actions: vec!["a".into()],
            clocks: vec!["x".into(), "y".into()],
            params: vec!["p".into()],
            locations: vec![
                Location::with_invariant("l0", invariant0),
                Location::with_invariant("l1", invariant1),
            ],
            initial: LocationId(0),
            edges: vec![Edge {
                source: LocationId(0),
                guard: Constraint::TRUE,
                action: Some(ActionId(0)),
                resets: resets.into_iter().map(ClockId).collect(),
                target: LocationId(1),
            }],
            param_bounds: None,
        }
    }

    #[test]
    fn empty_constraint_always_satisfied() {
        let w = ClockValuation::new(vec![rat(17), rat(3)]);
        let v = ParamValuation::new(vec![rat(0)]);
        assert!(satisfies(&w, &Constraint::TRUE, &v).unwrap());
    }

    #[test]
    fn non_strict_boundary_satisfied_strict_not() {
        let w = ClockValuation::new(vec![rat(1)]);
        let v = ParamValuation::new(vec![rat(1)]);
        let le = Constraint::new(vec![ineq(0, Relation::Le, vec![0], 0)]);
        let lt = Constraint::new(vec![ineq(0, Relation::Lt, vec![0], 0)]);
        assert!(satisfies(&w, &le, &v).unwrap());
        assert!(!satisfies(&w, &lt, &v).unwrap());
    }

    #[test]
    fn delay_with_true_invariant_always_succeeds() {
        let m = two_location_model(Constraint::TRUE, Constraint::TRUE, vec![]);
        let v = ParamValuation::new(vec![rat(1)]);
        let s = ConcreteState::initial(&m);
        let next = delay_successor(&s, &rat(100), &m, &v).unwrap();
        assert_eq!(next.clocks.values()[0], rat(100));
    }

    #[test]
    fn delay_to_closed_boundary_succeeds() {
        let inv = Constraint::new(vec![Inequality::new(
            ClockId(0),
            Relation::Le,
            LinearBound::constant(1),
        )]);
        let m = two_location_model(inv, Constraint::TRUE, vec![]);
        let v = ParamValuation::new(vec![rat(1)]);
        let s = ConcreteState::initial(&m);
        let next = delay_successor(&s, &rat(1), &m, &v).unwrap();
        assert_eq!(next.clocks.values()[0], rat(1));
    }

    #[test]
    fn delay_to_strict_boundary_fails() {
        let inv = Constraint::new(vec![Inequality::new(
            ClockId(0),
            Relation::Lt,
            LinearBound::constant(1),
        )]);
        let m = two_location_model(inv, Constraint::TRUE, vec![]);
        let v = ParamValuation::new(vec![rat(1)]);
        let s = ConcreteState::initial(&m);
        assert!(matches!(
            delay_successor(&s, &rat(1), &m, &v),
            Err(SemanticsError::InvariantViolated { .. })
        ));
    }

    #[test]
    fn discrete_resets_only_listed_clocks() {
        let m = two_location_model(Constraint::TRUE, Constraint::TRUE, vec![0]);
        let v = ParamValuation::new(vec![rat(1)]);
        let s = ConcreteState {
            location: LocationId(0),
            clocks: ClockValuation::new(vec![rat(5), rat(7)]),
        };
        let next = discrete_successor(&s, EdgeId(0), &m, &v).unwrap();
        assert_eq!(next.clocks.values(), &[rat(0), rat(7)]);
    }

    #[test]
    fn discrete_guard_unsatisfied_is_distinct_error() {
        let mut m = two_location_model(Constraint::TRUE, Constraint::TRUE, vec![]);
        m.edges[0].guard = Constraint::new(vec![ineq(0, Relation::Le, vec![0], 0)]);
        let v = ParamValuation::new(vec![rat(1)]);
        let s = ConcreteState {
            location: LocationId(0),
            clocks: ClockValuation::new(vec![rat(2), rat(0)]),
        };
        assert!(matches!(
            discrete_successor(&s, EdgeId(0), &m, &v),
            Err(SemanticsError::GuardUnsatisfied { .. })
        ));
    }

    #[test]
    fn discrete_target_invariant_unsatisfied_is_distinct_error() {
        let target_inv = Constraint::new(vec![Inequality::new(
            ClockId(0),
            Relation::Lt,
            LinearBound::constant(0),
        )]);
        let m = two_location_model(Constraint::TRUE, target_inv, vec![]);
        let v = ParamValuation::new(vec![rat(1)]);
        let s = ConcreteState::initial(&m);
        assert!(matches!(
            discrete_successor(&s, EdgeId(0), &m, &v),
            Err(SemanticsError::TargetInvariantUnsatisfied { .. })
        ));
    }

    #[test]
    fn zero_delay_step_equals_discrete() {
        let m = two_location_model(Constraint::TRUE, Constraint::TRUE, vec![0]);
        let v = ParamValuation::new(vec![rat(1)]);
        let s = ConcreteState {
            location: LocationId(0),
            clocks: ClockValuation::new(vec![rat(3), rat(4)]),
        };
        assert_eq!(
            step(&s, &rat(0), EdgeId(0), &m, &v).unwrap(),
            discrete_successor(&s, EdgeId(0), &m, &v).unwrap()
        );
    }

    #[test]
    fn validate_empty_run_checks_initial_invariant() {
        let bad_inv = Constraint::new(vec![Inequality::new(
            ClockId(0),
            Relation::Lt,
            LinearBound::constant(0),
        )]);
        let good = two_location_model(Constraint::TRUE, Constraint::TRUE, vec![]);
        let bad = two_location_model(bad_inv, Constraint::TRUE, vec![]);
        let v = ParamValuation::new(vec![rat(1)]);
        assert!(validate_run(&good, &v, &Run::empty(&good)).is_ok());
        let failure = validate_run(&bad, &v, &Run::empty(&bad)).unwrap_err();
        assert_eq!(failure.step, None);
    }

    #[test]
    fn validate_reports_first_bad_index() {
        let inv = Constraint::new(vec![Inequality::new(
            ClockId(0),
            Relation::Lt,
            LinearBound::constant(1),
        )]);
        let m = two_location_model(inv, Constraint::TRUE, vec![]);
        let v = ParamValuation::new(vec![rat(1)]);
        let run = Run {
            initial: ConcreteState::initial(&m),
            steps: vec![RunStep {
                delay: rat(1),
                edge: EdgeId(0),
                state: ConcreteState {
                    location: LocationId(1),
                    clocks: ClockValuation::new(vec![rat(1), rat(1)]),
                },
            }],
        };
        let failure = validate_run(&m, &v, &run).unwrap_err();
        assert_eq!(failure.step, Some(0));
        assert!(matches!(failure.reason, SemanticsError::InvariantViolated { .. }));
    }

    #[test]
    fn total_time_sums_delays() {
        let m = two_location_model(Constraint::TRUE, Constraint::TRUE, vec![]);
        let mut run = Run::empty(&m);
        assert_eq!(total_time(&run), rat(0));
        run.steps.push(RunStep {
            delay: ratio(1, 2),
            edge: EdgeId(0),
            state: ConcreteState::initial(&m),
        });
        run.steps.push(RunStep {
            delay: ratio(1, 4),
            edge: EdgeId(0),
            state: ConcreteState::initial(&m),
        });
        assert_eq!(total_time(&run), ratio(3, 4));
    }

    #[test]
    fn explore_goal_at_initial_returns_empty_run() {
        let m = two_location_model(Constraint::TRUE, Constraint::TRUE, vec![]);
        let v = ParamValuation::new(vec![rat(1)]);
        let run = random_explore(&m, &v, &Goal::Location(LocationId(0)), 100, 7).unwrap();
        assert!(run.is_empty());
    }

    #[test]
    fn explore_unreachable_goal_returns_none() {
        // Edge goes 0 -> 1, nothing reaches a third location.
        let mut m = two_location_model(Constraint::TRUE, Constraint::TRUE, vec![]);
        m.locations.push(Location::new("l2"));
        let v = ParamValuation::new(vec![rat(1)]);
        assert!(random_explore(&m, &v, &Goal::Location(LocationId(2)), 500, 7).is_none());
    }

    #[test]
    fn explore_finds_goal_behind_strict_invariant() {
        let inv = Constraint::new(vec![ineq(0, Relation::Lt, vec![0], 0)]);
        let m = two_location_model(Constraint::TRUE, inv, vec![]);
        let v = ParamValuation::new(vec![rat(1)]);
        let run = random_explore(&m, &v, &Goal::Location(LocationId(1)), 500, 7).unwrap();
        assert!(validate_run(&m, &v, &run).is_ok());
        assert_eq!(run.last_state().location, LocationId(1));
    }

    #[test]
    fn explore_is_deterministic_for_a_seed() {
        let m = two_location_model(Constraint::TRUE, Constraint::TRUE, vec![0]);
        let v = ParamValuation::new(vec![rat(1)]);
        let goal = Goal::Location(LocationId(1));
        assert_eq!(
            random_explore(&m, &v, &goal, 200, 42),
            random_explore(&m, &v, &goal, 200, 42)
        );
    }

    #[test]
    fn explore_by_label() {
        let mut m = two_location_model(Constraint::TRUE, Constraint::TRUE, vec![]);
        m.locations[1].labels.insert("bug".into());
        let v = ParamValuation::new(vec![rat(1)]);
        let run = random_explore(&m, &v, &Goal::Label("bug".into()), 200, 1).unwrap();
        assert_eq!(run.last_state().location, LocationId(1));
    }
}
