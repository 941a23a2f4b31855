use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GroupMap};
use crate::protocols::{BwDesignation, Kind, Protocol};

use super::bounds;

/// Priority, protocol kind and display label of one protocol instance.
/// Lower priority values gate higher ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgorithmId {
    pub priority: u32,
    pub kind: Kind,
    pub label: String,
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// How a tier's own nodes relate to the base graph's nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    /// Tier nodes are the base nodes.
    Identity,
    /// Each tier node stands for a set of base nodes.
    Groups(GroupMap),
}

/// One protocol instance together with the graph it evaluates neighborhoods on.
#[derive(Debug, Clone)]
pub struct Tier {
    pub id: AlgorithmId,
    pub protocol: Protocol,
    pub topology: Graph,
    pub projection: Projection,
}

impl Tier {
    pub fn new(priority: u32, label: impl Into<String>, protocol: Protocol, topology: Graph) -> Self {
        Tier {
            id: AlgorithmId {
                priority,
                kind: protocol.kind(),
                label: label.into(),
            },
            protocol,
            topology,
            projection: Projection::Identity,
        }
    }

    /// A tier over a compacted graph whose nodes map onto base-node groups.
    pub fn grouped(
        priority: u32,
        label: impl Into<String>,
        protocol: Protocol,
        topology: Graph,
        groups: GroupMap,
    ) -> Self {
        Tier {
            projection: Projection::Groups(groups),
            ..Tier::new(priority, label, protocol, topology)
        }
    }

    pub fn kind(&self) -> Kind {
        self.id.kind
    }

    pub fn label(&self) -> &str {
        &self.id.label
    }
}

/// How tiers share state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Composition {
    /// One variable per tier; lower priorities gate higher ones.
    #[default]
    Hierarchical,
    /// Equal priority: every tier reads and writes one shared variable per
    /// node and nothing is gated.
    Shared,
}

/// Ordered protocol instances with strictly increasing priorities.
#[derive(Debug, Clone)]
pub struct AlgorithmStack {
    tiers: Vec<Tier>,
    composition: Composition,
}

impl AlgorithmStack {
    pub fn new(tiers: Vec<Tier>, composition: Composition) -> Result<Self> {
        if tiers.is_empty() {
            return Err(Error::InvalidStack("a stack needs at least one algorithm".into()));
        }
        for w in tiers.windows(2) {
            if w[0].id.priority >= w[1].id.priority {
                return Err(Error::InvalidStack(format!(
                    "priorities must strictly increase: {} ({}) then {} ({})",
                    w[0].id.label, w[0].id.priority, w[1].id.label, w[1].id.priority
                )));
            }
        }
        let mut labels = BTreeSet::new();
        for t in &tiers {
            if !labels.insert(t.id.label.as_str()) {
                return Err(Error::InvalidStack(format!("duplicate label `{}`", t.id.label)));
            }
        }
        Ok(AlgorithmStack { tiers, composition })
    }

    pub fn hierarchical(tiers: Vec<Tier>) -> Result<Self> {
        Self::new(tiers, Composition::Hierarchical)
    }

    pub fn tiers(&self) -> &[Tier] {
        &self.tiers
    }

    pub fn tier(&self, index: usize) -> &Tier {
        &self.tiers[index]
    }

    pub fn len(&self) -> usize {
        self.tiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiers.is_empty()
    }

    pub fn composition(&self) -> Composition {
        self.composition
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.tiers.iter().position(|t| t.id.label == label)
    }

    pub fn kinds(&self) -> Vec<Kind> {
        self.tiers.iter().map(Tier::kind).collect()
    }

    /// Combined worst case `Σ_k Π_{i≤k} bound(a_i, n)` in priority order.
    pub fn combined_bound(&self, n: u64) -> u64 {
        bounds::combined_bound(&self.kinds(), n)
    }
}

/// Builds a stack whose tiers all read one graph, with priorities `1, 2, ...`.
#[derive(Debug)]
pub struct StackBuilder<'g> {
    graph: &'g Graph,
    tiers: Vec<Tier>,
}

impl<'g> StackBuilder<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        StackBuilder {
            graph,
            tiers: Vec::new(),
        }
    }

    fn push(mut self, label: &str, protocol: Protocol) -> Self {
        let priority = self.tiers.len() as u32 + 1;
        self.tiers
            .push(Tier::new(priority, label, protocol, self.graph.clone()));
        self
    }

    pub fn bw(self, label: &str, designation: BwDesignation) -> Self {
        self.push(label, Protocol::Bw(designation))
    }

    pub fn mis(self, label: &str) -> Self {
        self.push(label, Protocol::Mis)
    }

    pub fn mds(self, label: &str) -> Self {
        self.push(label, Protocol::Mds)
    }

    pub fn build(self) -> Result<AlgorithmStack> {
        AlgorithmStack::hierarchical(self.tiers)
    }

    pub fn build_shared(self) -> Result<AlgorithmStack> {
        AlgorithmStack::new(self.tiers, Composition::Shared)
    }
}
