//! Parametric timed automata with only invariants: data model, concrete
//! semantics, the guard-to-invariant transformation, reachability emptiness
//! and exact synthesis for the upper-bound-invariant subclass, a zone-based
//! reachability oracle for valuated automata, and a two-counter-machine
//! encoder.
//!
//! All arithmetic is exact rational; there is no floating point anywhere in
//! this crate. Every type is immutable after construction and every operation
//! is a pure function, so the whole API is safe for unrestricted concurrent
//! use.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod decision;
pub mod gadgets;
pub mod model;
pub mod rational;
pub mod semantics;
pub mod transform;
pub mod zone;

pub use decision::{ef_emptiness, ef_synthesis, RenderedConstraint, Sign, SignRegion, SynthesisResult};
pub use model::{
    ClassReport, Constraint, Edge, Inequality, LinearBound, Location, ParamValuation, PtaModel,
    Relation,
};
pub use rational::Rational;
pub use semantics::{ClockValuation, ConcreteState, Goal, Run};
pub use transform::{guards_to_invariants, TransformMap};
pub use zone::{ta_reachable, Dbm};
