//! Exact construction and analysis of correlation polytopes for
//! two-party measurement scenarios augmented by classical communication:
//! deterministic protocol enumeration, facet enumeration over exact
//! rationals, explicit inequality catalogs, operator-norm certificates,
//! a floating-point quantum sampler, and a Monte Carlo protocol
//! simulator.

pub mod catalog;
pub mod model;
pub mod ncpoly;
pub mod polytope;
pub mod protocols;
pub mod quantum;
pub mod rational;
pub mod simulate;

pub use model::{
    one_way_no_signaling, protocol_table, table_to_vector, to_correlation, validate_prob_table,
    vector_to_table, CommModel, CorrMatrix, DetProtocol, Direction, FacetList, HRepresentation,
    LinearInequality, ModelError, Picture, PointList, ProbTable, ProbVector, ProtocolPattern,
    Scenario,
};
pub use rational::Rat;
