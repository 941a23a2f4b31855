//! Undirected simple graphs with stable numeric node identities.
//!
//! A [`Graph`] is immutable once built. Nodes are kept sorted by [`NodeId`],
//! and every algorithm in the crate that needs a tie-break uses that order.
//! Edges may carry a direction flag (parts flow is drawn with arrows), but all
//! neighborhood queries treat the graph as undirected.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unique positive node identifier. Ordered by integer value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

/// An ordered set of node ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet(BTreeSet<NodeId>);

impl NodeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: NodeId) -> bool {
        self.0.insert(id)
    }

    pub fn remove(&mut self, id: NodeId) -> bool {
        self.0.remove(&id)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.0.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        self.0.intersection(&other.0).copied().collect()
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        self.0.union(&other.0).copied().collect()
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Copy of the set with `id` removed.
    pub fn without(&self, id: NodeId) -> NodeSet {
        let mut s = self.clone();
        s.remove(id);
        s
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        NodeSet(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[u32; N]> for NodeSet {
    fn from(ids: [u32; N]) -> Self {
        ids.into_iter().map(NodeId).collect()
    }
}

impl IntoIterator for NodeSet {
    type Item = NodeId;
    type IntoIter = std::collections::btree_set::IntoIter<NodeId>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = NodeId;
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, NodeId>>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, id) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str("}")
    }
}

/// An edge as declared. `from`/`to` only matter when `directed` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub directed: bool,
}

impl Edge {
    fn key(&self) -> (NodeId, NodeId) {
        (self.from.min(self.to), self.from.max(self.to))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    ids: Vec<NodeId>,
    labels: Vec<Option<String>>,
    index: BTreeMap<NodeId, usize>,
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

impl Default for Graph {
    fn default() -> Self {
        GraphBuilder::new().build()
    }
}

impl Graph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    /// Graph on ids `1..=n` with the given undirected edges.
    pub fn from_edges(n: u32, edges: &[(u32, u32)]) -> Result<Graph> {
        let mut b = GraphBuilder::new();
        for i in 1..=n {
            b.add_node(NodeId(i), None)?;
        }
        for &(a, c) in edges {
            b.add_edge(NodeId(a), NodeId(c), false)?;
        }
        Ok(b.build())
    }

    /// Order `n = |V|`.
    pub fn order(&self) -> usize {
        self.ids.len()
    }

    /// Size `m = |E|`.
    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn nodes(&self) -> NodeSet {
        self.ids.iter().copied().collect()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    /// Edges sorted by their unordered endpoint pair.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        match (self.index.get(&a), self.index.get(&b)) {
            (Some(&i), Some(&j)) => self.adj[i].binary_search(&j).is_ok(),
            _ => false,
        }
    }

    pub fn label(&self, id: NodeId) -> Option<&str> {
        self.index_of(id).and_then(|i| self.labels[i].as_deref())
    }

    /// The label if present, otherwise the numeric id.
    pub fn display_name(&self, id: NodeId) -> String {
        match self.label(id) {
            Some(l) => l.to_string(),
            None => id.to_string(),
        }
    }

    pub fn id_of_label(&self, label: &str) -> Option<NodeId> {
        self.labels
            .iter()
            .position(|l| l.as_deref() == Some(label))
            .map(|i| self.ids[i])
    }

    /// Resolve a label, falling back to a numeric id.
    pub fn resolve(&self, name: &str) -> Result<NodeId> {
        if let Some(id) = self.id_of_label(name) {
            return Ok(id);
        }
        match name.parse::<u32>() {
            Ok(v) if self.contains(NodeId(v)) => Ok(NodeId(v)),
            _ => Err(Error::UnknownLabel(name.to_string())),
        }
    }

    pub fn format_set(&self, s: &NodeSet) -> String {
        let names: Vec<String> = s.iter().map(|id| self.display_name(id)).collect();
        format!("{{{}}}", names.join(", "))
    }

    pub(crate) fn index_of(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub(crate) fn id_at(&self, idx: usize) -> NodeId {
        self.ids[idx]
    }

    pub(crate) fn neighbor_indices(&self, idx: usize) -> &[usize] {
        &self.adj[idx]
    }

    fn checked_index(&self, id: NodeId) -> Result<usize> {
        self.index_of(id).ok_or(Error::UnknownNode(id))
    }

    pub fn degree(&self, id: NodeId) -> Result<usize> {
        Ok(self.adj[self.checked_index(id)?].len())
    }

    /// `N(i)`: nodes sharing an edge with `i`.
    pub fn open_neighborhood(&self, id: NodeId) -> Result<NodeSet> {
        let i = self.checked_index(id)?;
        Ok(self.adj[i].iter().map(|&j| self.ids[j]).collect())
    }

    /// `N[i] = N(i) ∪ {i}`.
    pub fn closed_neighborhood(&self, id: NodeId) -> Result<NodeSet> {
        let mut s = self.open_neighborhood(id)?;
        s.insert(id);
        Ok(s)
    }

    /// Subgraph on `keep` with every edge of `self` whose endpoints both survive.
    pub fn induced_subgraph(&self, keep: &NodeSet) -> Result<Graph> {
        for id in keep {
            self.checked_index(id)?;
        }
        let mut b = GraphBuilder::new();
        for id in keep {
            let label = self.label(id).map(str::to_string);
            b.add_node(id, label)?;
        }
        for e in &self.edges {
            if keep.contains(e.from) && keep.contains(e.to) {
                b.add_edge(e.from, e.to, e.directed)?;
            }
        }
        Ok(b.build())
    }

    /// Same node set, different edges. Used for tiers that read their own edge relation.
    pub fn with_edges(&self, edges: impl IntoIterator<Item = Edge>) -> Result<Graph> {
        let mut b = GraphBuilder::new();
        for (i, &id) in self.ids.iter().enumerate() {
            b.add_node(id, self.labels[i].clone())?;
        }
        for e in edges {
            b.add_edge(e.from, e.to, e.directed)?;
        }
        Ok(b.build())
    }

    /// True iff the graph has at most one connected component.
    pub fn is_connected(&self) -> bool {
        if self.ids.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.ids.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        reached == self.ids.len()
    }

    /// Serialize to the line-based text format accepted by [`Graph::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, id) in self.ids.iter().enumerate() {
            match &self.labels[i] {
                Some(l) => out.push_str(&format!("node {l} {id}\n")),
                None => out.push_str(&format!("node {id} {id}\n")),
            }
        }
        for e in &self.edges {
            let a = self.display_name(e.from);
            let b = self.display_name(e.to);
            if e.directed {
                out.push_str(&format!("edge {a} {b} directed\n"));
            } else {
                out.push_str(&format!("edge {a} {b}\n"));
            }
        }
        out
    }

    /// Parse the graph text format.
    ///
    /// ```text
    /// # comment
    /// node A          # id assigned in first-seen order
    /// node B 7        # explicit id
    /// edge A B
    /// edge B C directed
    /// ```
    ///
    /// Labels first seen in an `edge` line are declared implicitly. Nodes
    /// without an explicit id get the smallest unused id, in input order.
    pub fn parse(text: &str) -> Result<Graph> {
        let mut decls: Vec<(String, Option<u32>, usize)> = Vec::new();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        let mut edges: Vec<(String, String, bool, usize)> = Vec::new();

        let mut declare = |label: &str, id: Option<u32>, line: usize, explicit: bool| -> Result<()> {
            match seen.get(label) {
                Some(&k) => {
                    if explicit {
                        if decls[k].2 != 0 {
                            return Err(Error::parse(line, format!("node `{label}` declared twice")));
                        }
                        decls[k].1 = id;
                        decls[k].2 = line;
                    }
                }
                None => {
                    seen.insert(label.to_string(), decls.len());
                    decls.push((label.to_string(), id, if explicit { line } else { 0 }));
                }
            }
            Ok(())
        };

        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            match toks[0] {
                "node" => {
                    let (label, id) = match toks.len() {
                        2 => (toks[1], None),
                        3 => {
                            let id = toks[2]
                                .parse::<u32>()
                                .map_err(|_| Error::parse(line, format!("bad node id `{}`", toks[2])))?;
                            if id == 0 {
                                return Err(Error::parse(line, "node ids must be positive"));
                            }
                            (toks[1], Some(id))
                        }
                        _ => return Err(Error::parse(line, "expected `node <label> [id]`")),
                    };
                    declare(label, id, line, true)?;
                }
                "edge" => {
                    let directed = match toks.len() {
                        3 => false,
                        4 if toks[3] == "directed" => true,
                        _ => {
                            return Err(Error::parse(line, "expected `edge <a> <b> [directed]`"));
                        }
                    };
                    declare(toks[1], None, line, false)?;
                    declare(toks[2], None, line, false)?;
                    edges.push((toks[1].to_string(), toks[2].to_string(), directed, line));
                }
                other => {
                    return Err(Error::parse(line, format!("unknown directive `{other}`")));
                }
            }
        }

        // a bare numeric label claims that id unless another node declares it
        let explicit: BTreeSet<u32> = decls.iter().filter_map(|d| d.1).collect();
        let wanted = decls.iter().map(|(label, id, _)| {
            id.or_else(|| label.parse::<u32>().ok().filter(|v| *v > 0 && !explicit.contains(v)))
        });
        let ids = assign_ids(wanted)?;
        let mut b = GraphBuilder::new();
        let mut by_label = BTreeMap::new();
        for ((label, _, _), id) in decls.iter().zip(&ids) {
            let shown = (*label != id.to_string()).then(|| label.clone());
            b.add_node(*id, shown)?;
            by_label.insert(label.clone(), *id);
        }
        for (a, c, directed, line) in edges {
            b.add_edge(by_label[&a], by_label[&c], directed)
                .map_err(|e| Error::parse(line, e.to_string()))?;
        }
        Ok(b.build())
    }
}

impl FromStr for Graph {
    type Err = Error;
    fn from_str(s: &str) -> Result<Graph> {
        Graph::parse(s)
    }
}

/// Explicit ids are kept; the rest get the smallest unused positive id in input order.
pub(crate) fn assign_ids(explicit: impl Iterator<Item = Option<u32>> + Clone) -> Result<Vec<NodeId>> {
    let mut used = BTreeSet::new();
    for id in explicit.clone().flatten() {
        if !used.insert(id) {
            return Err(Error::DuplicateNode(NodeId(id)));
        }
    }
    let mut next = 1u32;
    let mut out = Vec::new();
    for id in explicit {
        match id {
            Some(v) => out.push(NodeId(v)),
            None => {
                while used.contains(&next) {
                    next += 1;
                }
                used.insert(next);
                out.push(NodeId(next));
            }
        }
    }
    Ok(out)
}

/// Incremental construction of a [`Graph`]. Duplicate edges are merged.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    nodes: BTreeMap<NodeId, Option<String>>,
    edges: BTreeMap<(NodeId, NodeId), Edge>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: NodeId, label: Option<String>) -> Result<&mut Self> {
        if id.0 == 0 {
            return Err(Error::ZeroId);
        }
        if self.nodes.contains_key(&id) {
            return Err(Error::DuplicateNode(id));
        }
        if let Some(l) = &label {
            if self.nodes.values().any(|x| x.as_deref() == Some(l.as_str())) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        self.nodes.insert(id, label);
        Ok(self)
    }

    /// Returns `false` when the unordered pair was already present.
    pub fn add_edge(&mut self, from: NodeId, to: NodeId, directed: bool) -> Result<bool> {
        if from == to {
            return Err(Error::SelfLoop(from));
        }
        for id in [from, to] {
            if !self.nodes.contains_key(&id) {
                return Err(Error::UnknownNode(id));
            }
        }
        let e = Edge { from, to, directed };
        if self.edges.contains_key(&e.key()) {
            return Ok(false);
        }
        self.edges.insert(e.key(), e);
        Ok(true)
    }

    pub fn build(self) -> Graph {
        let ids: Vec<NodeId> = self.nodes.keys().copied().collect();
        let labels: Vec<Option<String>> = self.nodes.into_values().collect();
        let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for &(a, b) in self.edges.keys() {
            let (i, j) = (index[&a], index[&b]);
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph {
            ids,
            labels,
            index,
            adj,
            edges: self.edges.into_values().collect(),
        }
    }
}

/// Maps each node of a compacted graph to the base nodes it stands for
/// (a supplier group-node to its columns).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupMap {
    groups: BTreeMap<NodeId, NodeSet>,
}

impl GroupMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every node stands for itself.
    pub fn identity(g: &Graph) -> Self {
        GroupMap {
            groups: g.node_ids().iter().map(|&id| (id, NodeSet::from_iter([id]))).collect(),
        }
    }

    pub fn insert(&mut self, group: NodeId, members: NodeSet) {
        self.groups.insert(group, members);
    }

    pub fn members(&self, group: NodeId) -> Option<&NodeSet> {
        self.groups.get(&group)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &NodeSet)> {
        self.groups.iter().map(|(&k, v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Union of all member sets.
    pub fn covered(&self) -> NodeSet {
        self.groups.values().fold(NodeSet::new(), |acc, s| acc.union(s))
    }

    /// Groups containing `member`.
    pub fn groups_of(&self, member: NodeId) -> NodeSet {
        self.groups
            .iter()
            .filter(|(_, s)| s.contains(member))
            .map(|(&g, _)| g)
            .collect()
    }
}
