//! Counterfactual explanations for GCN node classification that mix local
//! edge deletions with attack-style edge additions.

pub mod baselines;
pub mod candidates;
pub mod datasets;
pub mod error;
pub mod explain;
pub mod gnn;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod optimizer;
pub mod pruner;
pub mod report;
pub mod theory;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use graph::{Edge, Edit, Graph, NodeId, Perturbation};
