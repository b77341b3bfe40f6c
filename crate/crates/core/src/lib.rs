//! Long-run average cost analysis for vector addition systems with states.

pub mod decision;
pub mod generators;
pub mod graph;
pub mod io;
pub mod iqp;
pub mod linalg;
pub mod model;
pub mod reach_n;
pub mod semantics;
pub mod templates;

pub use model::{
    CostFunction, CounterVector, Configuration, Domain, ExtendedValue, Lasso, ModelError, Transition, Vass,
};
