//! Self-stabilizing blacklist/whitelist, maximal independent set and minimal
//! dominating set protocols, composed by priority and run under an unfair daemon.

pub mod engine;
pub mod error;
pub mod export;
pub mod graph;
pub mod oracles;
pub mod protocols;
pub mod scenarios;

pub use engine::{
    AlgorithmId, AlgorithmStack, BoundReport, Composition, Configuration, Cycle, Daemon, MoveRecord,
    PolicyKind, Projection, RunOptions, RunOutcome, SchedulerPolicy, StackBuilder, System, Tier,
    Trace,
};
pub use error::{Error, Result};
pub use graph::{Edge, Graph, GraphBuilder, GroupMap, NodeId, NodeSet};
pub use protocols::{BwDesignation, Designation, Kind, Protocol, Rule, RuleSet, State};
