//! The parametric-timed-automaton data model.
//!
//! A model is a finite automaton over real-valued clocks and unknown
//! rational-valued parameters. Constraints are conjunctions of inequalities
//! `clock ⋈ p_1 + ... + p_k + d` where every parameter coefficient is 0 or 1
//! and `d` is an integer (a substituted model may carry rational constants,
//! see [`substitute`]). Constraints on transitions are guards; constraints on
//! locations are invariants.
//!
//! Identifiers are interned: clocks, parameters, locations, actions and edges
//! are addressed by dense indices and names are kept only for reporting.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::rational::{denominator_lcm, rat, Rational};

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub usize);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "#{}", self.0)
            }
        }
    };
}

id_type!(
    /// Index into [`PtaModel::clocks`].
    ClockId
);
id_type!(
    /// Index into [`PtaModel::params`].
    ParamId
);
id_type!(
    /// Index into [`PtaModel::locations`].
    LocationId
);
id_type!(
    /// Index into [`PtaModel::edges`].
    EdgeId
);
id_type!(
    /// Index into [`PtaModel::actions`].
    ActionId
);

/// Comparison operator of an inequality. Upper relations are exactly
/// `Lt` and `Le`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Relation {
    pub fn is_upper(self) -> bool {
        matches!(self, Relation::Lt | Relation::Le)
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Lt | Relation::Gt)
    }

    /// Whether `lhs rel rhs` holds.
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

/// Right-hand side of an inequality: a sum of distinct parameters plus a
/// constant.
///
/// The parameter list is kept sorted. The constant is an integer in the
/// parametric syntax; substituted models carry rational constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearBound {
    params: Vec<ParamId>,
    constant: Rational,
}

impl LinearBound {
    /// Sum of `params` plus integer constant `d`. The parameter list is
    /// sorted; duplicates are preserved so that [`validate_model`] can report
    /// them.
    pub fn new(mut params: Vec<ParamId>, d: i64) -> Self {
        params.sort_unstable();
        LinearBound {
            params,
            constant: rat(d),
        }
    }

    /// Pure-constant bound.
    pub fn constant(d: i64) -> Self {
        LinearBound::new(Vec::new(), d)
    }

    /// Pure rational constant; used by [`substitute`].
    pub fn constant_rational(c: Rational) -> Self {
        LinearBound {
            params: Vec::new(),
            constant: c,
        }
    }

    pub fn params(&self) -> &[ParamId] {
        &self.params
    }

    pub fn constant_value(&self) -> &Rational {
        &self.constant
    }

    /// Value of the bound under `v`: `Σ v(p_i) + d`.
    pub fn eval(&self, v: &ParamValuation) -> Result<Rational, ModelError> {
        let mut sum = self.constant.clone();
        for &p in &self.params {
            sum += v.get(p)?;
        }
        Ok(sum)
    }
}

/// A single inequality `clock ⋈ bound`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Inequality {
    pub clock: ClockId,
    pub rel: Relation,
    pub bound: LinearBound,
}

impl Inequality {
    pub fn new(clock: ClockId, rel: Relation, bound: LinearBound) -> Self {
        Inequality { clock, rel, bound }
    }
}

/// Conjunction of inequalities. The empty conjunction is the canonical
/// "true" constraint.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Constraint {
    inequalities: Vec<Inequality>,
}

impl Constraint {
    pub const TRUE: Constraint = Constraint {
        inequalities: Vec::new(),
    };

    pub fn new(inequalities: Vec<Inequality>) -> Self {
        Constraint { inequalities }
    }

    pub fn is_true(&self) -> bool {
        self.inequalities.is_empty()
    }

    pub fn inequalities(&self) -> &[Inequality] {
        &self.inequalities
    }
}

/// A location with its invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    /// Atomic propositions attached to the location.
    pub labels: BTreeSet<String>,
    pub invariant: Constraint,
}

impl Location {
    pub fn new(name: impl Into<String>) -> Self {
        Location {
            name: name.into(),
            labels: BTreeSet::new(),
            invariant: Constraint::TRUE,
        }
    }

    pub fn with_invariant(name: impl Into<String>, invariant: Constraint) -> Self {
        Location {
            name: name.into(),
            labels: BTreeSet::new(),
            invariant,
        }
    }
}

/// An edge `(source, guard, action, resets, target)`. `action == None` is the
/// silent action ε.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: LocationId,
    pub guard: Constraint,
    pub action: Option<ActionId>,
    pub resets: BTreeSet<ClockId>,
    pub target: LocationId,
}

/// Inclusive integer interval for one parameter of a bounded model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamBounds {
    pub min: i64,
    pub max: i64,
}

/// A parametric timed automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtaModel {
    pub actions: Vec<String>,
    pub clocks: Vec<String>,
    pub params: Vec<String>,
    pub locations: Vec<Location>,
    pub initial: LocationId,
    pub edges: Vec<Edge>,
    /// When present, covers every parameter (bounded model).
    pub param_bounds: Option<Vec<ParamBounds>>,
}

impl PtaModel {
    pub fn clock_count(&self) -> usize {
        self.clocks.len()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn location(&self, id: LocationId) -> &Location {
        &self.locations[id.0]
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    pub fn location_name(&self, id: LocationId) -> &str {
        &self.locations[id.0].name
    }

    pub fn find_location(&self, name: &str) -> Option<LocationId> {
        self.locations
            .iter()
            .position(|l| l.name == name)
            .map(LocationId)
    }

    pub fn find_clock(&self, name: &str) -> Option<ClockId> {
        self.clocks.iter().position(|c| c == name).map(ClockId)
    }

    pub fn find_param(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p == name).map(ParamId)
    }

    pub fn find_action(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a == name).map(ActionId)
    }

    /// Edge ids grouped by source location, in declaration order.
    pub fn edges_by_source(&self) -> Vec<Vec<EdgeId>> {
        let mut out = alloc::vec![Vec::new(); self.locations.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if e.source.0 < out.len() {
                out[e.source.0].push(EdgeId(i));
            }
        }
        out
    }

    /// All constraints of the model: every invariant followed by every guard.
    fn all_constraints(&self) -> impl Iterator<Item = (&Constraint, ConstraintSite<'_>)> {
        let invs = self
            .locations
            .iter()
            .map(|l| (&l.invariant, ConstraintSite::Invariant(&l.name)));
        let guards = self.edges.iter().enumerate().map(|(i, e)| {
            (
                &e.guard,
                ConstraintSite::Guard(i, &self.locations[e.source.0].name),
            )
        });
        invs.chain(guards)
    }

    /// Checks that `v` is admissible for this model: total, nonnegative, and
    /// inside the parameter bounds when the model is bounded.
    pub fn check_valuation(&self, v: &ParamValuation) -> Result<(), ModelError> {
        if v.len() != self.params.len() {
            return Err(ModelError::ValuationSize {
                expected: self.params.len(),
                got: v.len(),
            });
        }
        for (i, value) in v.values().iter().enumerate() {
            if value.is_negative() {
                return Err(ModelError::NegativeParameter {
                    param: self.params[i].clone(),
                });
            }
            if let Some(bounds) = &self.param_bounds {
                let b = &bounds[i];
                if value < &rat(b.min) || value > &rat(b.max) {
                    return Err(ModelError::ValuationOutOfBounds {
                        param: self.params[i].clone(),
                        min: b.min,
                        max: b.max,
                    });
                }
            }
        }
        Ok(())
    }
}

enum ConstraintSite<'a> {
    Invariant(&'a str),
    Guard(usize, &'a str),
}

impl fmt::Display for ConstraintSite<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintSite::Invariant(loc) => write!(f, "invariant of location '{loc}'"),
            ConstraintSite::Guard(idx, src) => write!(f, "guard of edge #{idx} from '{src}'"),
        }
    }
}

/// Assignment of a nonnegative rational to every parameter of a model,
/// aligned with the model's parameter order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamValuation {
    values: Vec<Rational>,
}

impl ParamValuation {
    pub fn new(values: Vec<Rational>) -> Self {
        ParamValuation { values }
    }

    /// The valuation assigning 1 to each of `n` parameters.
    pub fn all_ones(n: usize) -> Self {
        ParamValuation {
            values: alloc::vec![rat(1); n],
        }
    }

    /// The valuation assigning the same value to each of `n` parameters.
    pub fn uniform(n: usize, value: Rational) -> Self {
        ParamValuation {
            values: alloc::vec![value; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, p: ParamId) -> Result<&Rational, ModelError> {
        self.values.get(p.0).ok_or(ModelError::UnknownParam(p))
    }
}

/// Syntactic class membership and well-formedness report.
///
/// `is_pta_iu` implies `is_pta_i` and `has_nonnegative_constants`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassReport {
    /// Every guard is the empty (true) constraint.
    pub is_pta_i: bool,
    /// `is_pta_i`, and every invariant inequality is an upper bound
    /// (`<` or `<=`) with a nonnegative constant.
    pub is_pta_iu: bool,
    /// The model declares integer bounds for all parameters.
    pub is_bounded: bool,
    /// Every constraint constant in the model is `>= 0`.
    pub has_nonnegative_constants: bool,
    /// Human-readable diagnostics pointing at the offending edges and
    /// inequalities, empty when both class checks pass.
    pub violations: Vec<String>,
}

/// Structural or usage error over the model API.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    Invalid(Vec<String>),
    UnknownParam(ParamId),
    UnknownClock(ClockId),
    ValuationSize { expected: usize, got: usize },
    NegativeParameter { param: String },
    ValuationOutOfBounds { param: String, min: i64, max: i64 },
    HasParameters,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Invalid(violations) => {
                write!(f, "invalid model:")?;
                for v in violations {
                    write!(f, "\n  {v}")?;
                }
                Ok(())
            }
            ModelError::UnknownParam(p) => write!(f, "unknown parameter {p}"),
            ModelError::UnknownClock(c) => write!(f, "unknown clock {c}"),
            ModelError::ValuationSize { expected, got } => {
                write!(f, "valuation covers {got} parameters, model has {expected}")
            }
            ModelError::NegativeParameter { param } => {
                write!(f, "parameter '{param}' valuated negative")
            }
            ModelError::ValuationOutOfBounds { param, min, max } => {
                write!(f, "parameter '{param}' valuated outside [{min}, {max}]")
            }
            ModelError::HasParameters => write!(f, "model still has parameters"),
        }
    }
}

/// Checks every structural invariant of the model and, when the structure is
/// sound, returns the class report. Violations are reported with location and
/// edge names and never silently repaired.
pub fn validate_model(model: &PtaModel) -> Result<ClassReport, ModelError> {
    let mut errors = Vec::new();

    check_unique("clock", &model.clocks, &mut errors);
    check_unique("parameter", &model.params, &mut errors);
    check_unique("action", &model.actions, &mut errors);
    let names: Vec<&str> = model.locations.iter().map(|l| l.name.as_str()).collect();
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            errors.push(format!("duplicate location name '{name}'"));
        }
    }

    if model.initial.0 >= model.locations.len() {
        errors.push(format!("initial location {} undeclared", model.initial));
    }

    for (i, edge) in model.edges.iter().enumerate() {
        if edge.source.0 >= model.locations.len() {
            errors.push(format!("edge #{i}: dangling source {}", edge.source));
        }
        if edge.target.0 >= model.locations.len() {
            errors.push(format!("edge #{i}: dangling target {}", edge.target));
        }
        if let Some(a) = edge.action {
            if a.0 >= model.actions.len() {
                errors.push(format!("edge #{i}: dangling action {a}"));
            }
        }
        for &c in &edge.resets {
            if c.0 >= model.clocks.len() {
                errors.push(format!("edge #{i}: reset of undeclared clock {c}"));
            }
        }
    }

    let parametric = !model.params.is_empty();
    for (constraint, site) in model.all_constraints() {
        for ineq in constraint.inequalities() {
            if ineq.clock.0 >= model.clocks.len() {
                errors.push(format!("{site}: undeclared clock {}", ineq.clock));
            }
            let mut seen = BTreeSet::new();
            for &p in ineq.bound.params() {
                if p.0 >= model.params.len() {
                    errors.push(format!("{site}: undeclared parameter {p}"));
                } else if !seen.insert(p) {
                    errors.push(format!(
                        "{site}: duplicate parameter '{}' in bound (coefficients must be 0 or 1)",
                        model.params[p.0]
                    ));
                }
            }
            // Parametric syntax fixes d ∈ ℤ; only valuated models may carry
            // rational constants.
            if parametric && !ineq.bound.constant_value().is_integer() {
                errors.push(format!(
                    "{site}: non-integer constant {} in parametric model",
                    ineq.bound.constant_value()
                ));
            }
        }
    }

    if let Some(bounds) = &model.param_bounds {
        if bounds.len() != model.params.len() {
            errors.push(format!(
                "parameter bounds cover {} of {} parameters",
                bounds.len(),
                model.params.len()
            ));
        }
        for (i, b) in bounds.iter().enumerate().take(model.params.len()) {
            if b.min > b.max {
                errors.push(format!(
                    "parameter '{}': empty bound interval [{}, {}]",
                    model.params[i], b.min, b.max
                ));
            }
            if b.min < 0 {
                errors.push(format!(
                    "parameter '{}': negative lower bound {}",
                    model.params[i], b.min
                ));
            }
        }
    }

    if errors.is_empty() {
        Ok(classify(model))
    } else {
        Err(ModelError::Invalid(errors))
    }
}

fn check_unique(kind: &str, names: &[String], errors: &mut Vec<String>) {
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            errors.push(format!("duplicate {kind} name '{name}'"));
        }
    }
}

/// Purely syntactic class membership check. Never evaluates semantics.
pub fn classify(model: &PtaModel) -> ClassReport {
    let mut violations = Vec::new();

    let mut is_pta_i = true;
    for (i, edge) in model.edges.iter().enumerate() {
        if !edge.guard.is_true() {
            is_pta_i = false;
            violations.push(format!(
                "edge #{i} ('{}' -> '{}'): nonempty guard (class requires true guards)",
                model.locations[edge.source.0].name, model.locations[edge.target.0].name
            ));
        }
    }

    let mut has_nonnegative_constants = true;
    for (constraint, site) in model.all_constraints() {
        for ineq in constraint.inequalities() {
            if ineq.bound.constant_value().is_negative() {
                has_nonnegative_constants = false;
                violations.push(format!(
                    "{site}: negative constant in '{} {} ... {}'",
                    model.clocks[ineq.clock.0],
                    ineq.rel.symbol(),
                    ineq.bound.constant_value()
                ));
            }
        }
    }

    let mut invariants_upper = true;
    for loc in &model.locations {
        for ineq in loc.invariant.inequalities() {
            if !ineq.rel.is_upper() {
                invariants_upper = false;
                violations.push(format!(
                    "invariant of location '{}': '{} {}' is not an upper bound",
                    loc.name,
                    model.clocks[ineq.clock.0],
                    ineq.rel.symbol()
                ));
            }
        }
    }

    ClassReport {
        is_pta_i,
        is_pta_iu: is_pta_i && invariants_upper && has_nonnegative_constants,
        is_bounded: model.param_bounds.is_some(),
        has_nonnegative_constants,
        violations,
    }
}

/// Replaces every parameter occurrence by its value under `v`. The result
/// has no parameters; every bound becomes a pure rational constant.
pub fn substitute(model: &PtaModel, v: &ParamValuation) -> Result<PtaModel, ModelError> {
    model.check_valuation(v)?;
    let subst_constraint = |c: &Constraint| -> Result<Constraint, ModelError> {
        let ineqs = c
            .inequalities()
            .iter()
            .map(|ineq| {
                Ok(Inequality::new(
                    ineq.clock,
                    ineq.rel,
                    LinearBound::constant_rational(ineq.bound.eval(v)?),
                ))
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Ok(Constraint::new(ineqs))
    };

    let locations = model
        .locations
        .iter()
        .map(|l| {
            Ok(Location {
                name: l.name.clone(),
                labels: l.labels.clone(),
                invariant: subst_constraint(&l.invariant)?,
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    let edges = model
        .edges
        .iter()
        .map(|e| {
            Ok(Edge {
                source: e.source,
                guard: subst_constraint(&e.guard)?,
                action: e.action,
                resets: e.resets.clone(),
                target: e.target,
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;

    Ok(PtaModel {
        actions: model.actions.clone(),
        clocks: model.clocks.clone(),
        params: Vec::new(),
        locations,
        initial: model.initial,
        edges,
        param_bounds: None,
    })
}

/// Multiplies every constant of a parameter-free model by the least common
/// multiple of the constant denominators, so all constants become integers.
/// Returns the rescaled model and the scale factor. Location reachability is
/// preserved: the change of variables `t ↦ scale · t` maps runs to runs.
pub fn rescale(model: &PtaModel) -> Result<(PtaModel, BigInt), ModelError> {
    if !model.params.is_empty() {
        return Err(ModelError::HasParameters);
    }
    let constants: Vec<&Rational> = model
        .all_constraints()
        .flat_map(|(c, _)| c.inequalities().iter().map(|i| i.bound.constant_value()))
        .collect();
    let scale = denominator_lcm(constants.into_iter());
    let factor = Rational::from_integer(scale.clone());

    let mut scaled = model.clone();
    for loc in &mut scaled.locations {
        loc.invariant = scale_constraint(&loc.invariant, &factor);
    }
    for edge in &mut scaled.edges {
        edge.guard = scale_constraint(&edge.guard, &factor);
    }
    Ok((scaled, scale))
}

fn scale_constraint(c: &Constraint, factor: &Rational) -> Constraint {
    Constraint::new(
        c.inequalities()
            .iter()
            .map(|ineq| {
                Inequality::new(
                    ineq.clock,
                    ineq.rel,
                    LinearBound::constant_rational(ineq.bound.constant_value() * factor),
                )
            })
            .collect(),
    )
}

impl PtaModel {
    /// True iff every constraint constant is an integer (zone-oracle input
    /// requirement; see [`rescale`]).
    pub fn has_integer_constants(&self) -> bool {
        self.all_constraints()
            .all(|(c, _)| c.inequalities().iter().all(|i| i.bound.constant_value().is_integer()))
    }

    /// Largest absolute constant value, rounded up to an integer; 0 for a
    /// constraint-free model.
    pub fn max_abs_constant(&self) -> BigInt {
        let mut max = BigInt::zero();
        for (c, _) in self.all_constraints() {
            for ineq in c.inequalities() {
                let v = ineq.bound.constant_value().abs().ceil().to_integer();
                if v > max {
                    max = v;
                }
            }
        }
        max
    }
}
