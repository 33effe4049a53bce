//! Causal discovery and backdoor effect estimation for tabular fire-test data.
//!
//! The pipeline: load or synthesize a [`dataset::Table`], learn a DAG with
//! [`discovery::learn_structure`], overlay domain constraints
//! ([`graph::apply_constraints`]), estimate average treatment effects of
//! mean-binarized inputs ([`inference`]), stress-test each estimate
//! ([`refute`]) and contrast causal estimates with predictive models under
//! fix-to-mean interventions ([`baselines`]).

pub mod baselines;
pub mod dataset;
pub mod discovery;
pub mod error;
pub mod graph;
pub mod inference;
pub mod refute;
pub mod regression;

pub use baselines::{ForestModel, LinearModel, Predictor};
pub use dataset::{Column, Role, Schema, Table};
pub use discovery::{learn_structure, DiscoveryConfig, WeightedAdjacency};
pub use error::{Error, Result};
pub use graph::{ConstraintSet, Dag};
pub use inference::{CausalEstimate, CausalQuery, DagConfigKind, StudyReport};
pub use refute::{RefutationMethod, RefutationResult, RefuteConfig};
