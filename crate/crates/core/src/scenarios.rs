//! Manufacturing-hall IP-risk scenarios: columns, white/blacklists, supplier
//! tables and parts flow, turned into a prioritized protocol stack.
//!
//! Scenario text format, one section per header, `#` starts a comment:
//!
//! ```text
//! [columns]
//! A B C D E F
//! [edges]
//! A B
//! [lists]
//! BW1: A=in C=out
//! [suppliers]
//! A: X
//! B: X Y
//! public: Y
//! [flow]
//! A -> C
//! C -- E
//! [stack]
//! bw BW1 list=BW1
//! mis MIS graph=compacted
//! mds MDS graph=flow
//! ```

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{
    AlgorithmStack, BoundReport, Composition, Configuration, Cycle, RunOutcome, System, Tier,
};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, GroupMap, NodeId, NodeSet};
use crate::oracles;
use crate::protocols::{BwDesignation, Designation, Kind, Protocol, State};

/// A named white/blacklist. Columns not mentioned are whitelisted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BwList {
    pub name: String,
    pub entries: Vec<(String, Designation)>,
}

/// A parts-flow connection between two columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowEdge {
    pub from: String,
    pub to: String,
    pub directed: bool,
}

/// Which edge relation a tier evaluates neighborhoods on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TierSource {
    /// A white/blacklist; BW reads no neighbors.
    List(String),
    /// One node per supplier, adjacent when their column sets meet.
    Compacted,
    /// Columns, adjacent when they share a supplier.
    Full,
    /// Columns with the `[edges]` relation.
    Base,
    /// Columns with the parts-flow relation.
    Flow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierSpec {
    pub kind: Kind,
    pub label: String,
    pub source: TierSource,
}

/// Supplier assignments per column, with suppliers whose exposure is acceptable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupplierTable {
    /// Every column in order, with its suppliers.
    pub columns: Vec<(String, Vec<String>)>,
    /// Suppliers that contribute no edges.
    pub public: BTreeSet<String>,
}

impl SupplierTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, column: &str, suppliers: &[&str]) -> &mut Self {
        self.columns
            .push((column.to_string(), suppliers.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn set_public(&mut self, supplier: &str) -> &mut Self {
        self.public.insert(supplier.to_string());
        self
    }

    /// All supplier names, sorted.
    pub fn suppliers(&self) -> BTreeSet<String> {
        self.columns.iter().flat_map(|(_, s)| s.iter().cloned()).collect()
    }

    /// Column indices of one supplier, in column order.
    fn columns_of(&self, supplier: &str) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, (_, s))| s.iter().any(|x| x == supplier))
            .map(|(i, _)| i)
            .collect()
    }
}

fn column_nodes(labels: &[String]) -> Result<crate::graph::GraphBuilder> {
    let mut b = Graph::builder();
    for (i, l) in labels.iter().enumerate() {
        b.add_node(NodeId(i as u32 + 1), Some(l.clone()))?;
    }
    Ok(b)
}

fn column_id(i: usize) -> NodeId {
    NodeId(i as u32 + 1)
}

/// Columns as nodes; the columns of every non-public supplier form a clique.
pub fn build_full_supplier_graph(t: &SupplierTable) -> Result<Graph> {
    let labels: Vec<String> = t.columns.iter().map(|(c, _)| c.clone()).collect();
    let mut b = column_nodes(&labels)?;
    for s in t.suppliers() {
        if t.public.contains(&s) {
            continue;
        }
        let cols = t.columns_of(&s);
        for (k, &a) in cols.iter().enumerate() {
            for &c in &cols[k + 1..] {
                b.add_edge(column_id(a), column_id(c), false)?;
            }
        }
    }
    Ok(b.build())
}

/// One node per supplier, labelled by its columns (`"BCD"`); two suppliers
/// are adjacent when neither is public and their column sets intersect.
/// Group members use the column ids of [`build_full_supplier_graph`].
pub fn build_compacted_supplier_graph(t: &SupplierTable) -> Result<(Graph, GroupMap)> {
    let suppliers: Vec<String> = t.suppliers().into_iter().collect();
    let short = t.columns.iter().all(|(c, _)| c.chars().count() == 1);
    let mut b = Graph::builder();
    let mut groups = GroupMap::new();
    let mut cols = Vec::new();
    let mut used = BTreeSet::new();
    for (k, s) in suppliers.iter().enumerate() {
        let members = t.columns_of(s);
        let names: Vec<&str> = members.iter().map(|&i| t.columns[i].0.as_str()).collect();
        let mut label = names.join(if short { "" } else { "+" });
        if !used.insert(label.clone()) {
            label = format!("{label}:{s}");
            used.insert(label.clone());
        }
        let id = NodeId(k as u32 + 1);
        b.add_node(id, Some(label))?;
        groups.insert(id, members.iter().map(|&i| column_id(i)).collect());
        cols.push(members.into_iter().collect::<BTreeSet<usize>>());
    }
    for i in 0..suppliers.len() {
        for j in i + 1..suppliers.len() {
            let private = !t.public.contains(&suppliers[i]) && !t.public.contains(&suppliers[j]);
            if private && !cols[i].is_disjoint(&cols[j]) {
                b.add_edge(NodeId(i as u32 + 1), NodeId(j as u32 + 1), false)?;
            }
        }
    }
    Ok((b.build(), groups))
}

/// Columns named by the edges, in order of first appearance; adjacency is
/// undirected and direction flags are kept for export.
pub fn build_flow_graph(edges: &[FlowEdge]) -> Result<Graph> {
    let mut labels: Vec<String> = Vec::new();
    for e in edges {
        for c in [&e.from, &e.to] {
            if !labels.contains(c) {
                labels.push(c.clone());
            }
        }
    }
    flow_on(&labels, edges)
}

fn flow_on(labels: &[String], edges: &[FlowEdge]) -> Result<Graph> {
    let mut b = column_nodes(labels)?;
    let find = |c: &str| {
        labels
            .iter()
            .position(|l| l == c)
            .map(column_id)
            .ok_or_else(|| Error::Scenario(format!("flow references unknown column `{c}`")))
    };
    for e in edges {
        b.add_edge(find(&e.from)?, find(&e.to)?, e.directed)?;
    }
    Ok(b.build())
}

/// A parsed scenario. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub columns: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub lists: Vec<BwList>,
    /// Columns with a supplier line, in file order.
    pub suppliers: Vec<(String, Vec<String>)>,
    pub public: Vec<String>,
    pub flow: Vec<FlowEdge>,
    pub stack: Vec<TierSpec>,
}

const SECTIONS: [&str; 6] = ["columns", "edges", "lists", "suppliers", "flow", "stack"];

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        let mut sc = Scenario::default();
        let mut section: Option<&str> = None;
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| Error::parse(line_no, m);
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                section = Some(
                    SECTIONS
                        .iter()
                        .find(|s| **s == name)
                        .ok_or_else(|| err(format!("unknown section `[{name}]`")))?,
                );
                continue;
            }
            match section {
                None => return Err(err("content before the first section header".into())),
                Some("columns") => {
                    for c in line.split_whitespace() {
                        if sc.columns.iter().any(|x| x == c) {
                            return Err(err(format!("duplicate column `{c}`")));
                        }
                        if c == "public" {
                            return Err(err("`public` is reserved".into()));
                        }
                        sc.columns.push(c.to_string());
                    }
                }
                Some("edges") => {
                    let t: Vec<&str> = line.split_whitespace().collect();
                    if t.len() != 2 {
                        return Err(err("expected `<column> <column>`".into()));
                    }
                    sc.check_column(t[0]).map_err(err)?;
                    sc.check_column(t[1]).map_err(err)?;
                    if t[0] == t[1] {
                        return Err(err(format!("self-loop on `{}`", t[0])));
                    }
                    sc.edges.push((t[0].to_string(), t[1].to_string()));
                }
                Some("lists") => {
                    let (name, rest) = line
                        .split_once(':')
                        .ok_or_else(|| err("expected `<list>: <column>=in|out ...`".into()))?;
                    let name = name.trim();
                    if name.is_empty() || name.contains(char::is_whitespace) {
                        return Err(err(format!("bad list name `{name}`")));
                    }
                    let mut entries = Vec::new();
                    for tok in rest.split_whitespace() {
                        let (c, d) = tok
                            .split_once('=')
                            .ok_or_else(|| err(format!("expected `<column>=in|out`, got `{tok}`")))?;
                        sc.check_column(c).map_err(err)?;
                        let d: Designation = d.parse().map_err(err)?;
                        entries.push((c.to_string(), d));
                    }
                    let list = match sc.lists.iter_mut().find(|l| l.name == name) {
                        Some(l) => l,
                        None => {
                            sc.lists.push(BwList {
                                name: name.to_string(),
                                entries: Vec::new(),
                            });
                            sc.lists.last_mut().expect("just pushed")
                        }
                    };
                    for (c, d) in entries {
                        if list.entries.iter().any(|(x, _)| *x == c) {
                            return Err(err(format!("column `{c}` listed twice in `{name}`")));
                        }
                        list.entries.push((c, d));
                    }
                }
                Some("suppliers") => {
                    let (col, rest) = line
                        .split_once(':')
                        .ok_or_else(|| err("expected `<column>: <supplier> ...`".into()))?;
                    let col = col.trim();
                    let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                    if col == "public" {
                        sc.public.extend(names);
                        continue;
                    }
                    sc.check_column(col).map_err(err)?;
                    if sc.suppliers.iter().any(|(c, _)| c == col) {
                        return Err(err(format!("suppliers of `{col}` given twice")));
                    }
                    sc.suppliers.push((col.to_string(), names));
                }
                Some("flow") => {
                    let t: Vec<&str> = line.split_whitespace().collect();
                    let directed = match t.as_slice() {
                        [_, "->", _] => true,
                        [_, "--", _] => false,
                        _ => return Err(err("expected `<column> -> <column>` or `<column> -- <column>`".into())),
                    };
                    sc.check_column(t[0]).map_err(err)?;
                    sc.check_column(t[2]).map_err(err)?;
                    if t[0] == t[2] {
                        return Err(err(format!("self-loop on `{}`", t[0])));
                    }
                    sc.flow.push(FlowEdge {
                        from: t[0].to_string(),
                        to: t[2].to_string(),
                        directed,
                    });
                }
                Some("stack") => {
                    let spec = parse_tier(line).map_err(err)?;
                    if let TierSource::List(name) = &spec.source {
                        if !sc.lists.iter().any(|l| &l.name == name) {
                            return Err(err(format!("unknown list `{name}`")));
                        }
                    }
                    if sc.stack.iter().any(|t| t.label == spec.label) {
                        return Err(err(format!("duplicate algorithm label `{}`", spec.label)));
                    }
                    sc.stack.push(spec);
                }
                Some(_) => unreachable!("section names are checked"),
            }
        }
        for p in &sc.public {
            if !sc.suppliers.iter().any(|(_, s)| s.contains(p)) {
                return Err(Error::Scenario(format!("public supplier `{p}` supplies no column")));
            }
        }
        Ok(sc)
    }

    fn check_column(&self, c: &str) -> std::result::Result<(), String> {
        if self.columns.iter().any(|x| x == c) {
            Ok(())
        } else {
            Err(format!("unknown column `{c}`"))
        }
    }

    /// Canonical text form; [`Scenario::parse`] reads it back unchanged.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("[columns]\n");
        if !self.columns.is_empty() {
            let _ = writeln!(out, "{}", self.columns.join(" "));
        }
        if !self.edges.is_empty() {
            out.push_str("\n[edges]\n");
            for (a, b) in &self.edges {
                let _ = writeln!(out, "{a} {b}");
            }
        }
        if !self.lists.is_empty() {
            out.push_str("\n[lists]\n");
            for l in &self.lists {
                let entries: Vec<String> = l.entries.iter().map(|(c, d)| format!("{c}={d}")).collect();
                let _ = writeln!(out, "{}: {}", l.name, entries.join(" "));
            }
        }
        if !self.suppliers.is_empty() || !self.public.is_empty() {
            out.push_str("\n[suppliers]\n");
            for (c, s) in &self.suppliers {
                let _ = writeln!(out, "{c}: {}", s.join(" "));
            }
            if !self.public.is_empty() {
                let _ = writeln!(out, "public: {}", self.public.join(" "));
            }
        }
        if !self.flow.is_empty() {
            out.push_str("\n[flow]\n");
            for e in &self.flow {
                let arrow = if e.directed { "->" } else { "--" };
                let _ = writeln!(out, "{} {arrow} {}", e.from, e.to);
            }
        }
        if !self.stack.is_empty() {
            out.push_str("\n[stack]\n");
            for t in &self.stack {
                let _ = writeln!(out, "{t}");
            }
        }
        out
    }

    /// Supplier table over every column, with the scenario's public suppliers.
    pub fn supplier_table(&self) -> SupplierTable {
        SupplierTable {
            columns: self
                .columns
                .iter()
                .map(|c| {
                    let s = self
                        .suppliers
                        .iter()
                        .find(|(x, _)| x == c)
                        .map(|(_, s)| s.clone())
                        .unwrap_or_default();
                    (c.clone(), s)
                })
                .collect(),
            public: self.public.iter().cloned().collect(),
        }
    }

    /// Columns with the `[edges]` relation.
    pub fn base_graph(&self) -> Result<Graph> {
        let mut b = column_nodes(&self.columns)?;
        for (a, c) in &self.edges {
            b.add_edge(self.id(a)?, self.id(c)?, false)?;
        }
        Ok(b.build())
    }

    /// Columns with the parts-flow relation; columns outside the flow are isolated.
    pub fn flow_graph(&self) -> Result<Graph> {
        flow_on(&self.columns, &self.flow)
    }

    fn id(&self, c: &str) -> Result<NodeId> {
        self.columns
            .iter()
            .position(|x| x == c)
            .map(column_id)
            .ok_or_else(|| Error::Scenario(format!("unknown column `{c}`")))
    }

    fn designation(&self, list: &str) -> Result<BwDesignation> {
        let l = self
            .lists
            .iter()
            .find(|l| l.name == list)
            .ok_or_else(|| Error::Scenario(format!("unknown list `{list}`")))?;
        l.entries.iter().map(|(c, d)| Ok((self.id(c)?, *d))).collect()
    }

    /// Exhaustive search for a column set both the supplier MIS (compacted)
    /// and the flow MDS accept, with `extra_public` suppliers made public.
    pub fn joint_feasibility(
        &self,
        extra_public: &[String],
        rule: oracles::SelectionRule,
    ) -> Result<oracles::FeasibilityVerdict> {
        let mut table = self.supplier_table();
        let known = table.suppliers();
        for p in extra_public {
            if !known.contains(p) {
                return Err(Error::Scenario(format!("unknown supplier `{p}`")));
            }
            table.public.insert(p.clone());
        }
        let (compacted, groups) = build_compacted_supplier_graph(&table)?;
        oracles::joint_feasibility(&compacted, &groups, &self.flow_graph()?, rule, oracles::DEFAULT_CAP)
    }

    /// Builds the system the scenario describes.
    ///
    /// The base graph has the columns as nodes and the union of every edge
    /// relation; each tier reads only its own relation.
    pub fn assemble(&self, opts: &AssembleOptions) -> Result<System> {
        if self.stack.is_empty() {
            return Err(Error::Scenario("the [stack] section declares no algorithm".into()));
        }
        let mut table = self.supplier_table();
        let known = table.suppliers();
        for p in &opts.public {
            if !known.contains(p) {
                return Err(Error::Scenario(format!("unknown supplier `{p}`")));
            }
            table.public.insert(p.clone());
        }
        let full = build_full_supplier_graph(&table)?;
        let flow = self.flow_graph()?;
        let base_edges = self.base_graph()?;
        let all_edges = base_edges
            .edges()
            .iter()
            .chain(full.edges())
            .chain(flow.edges())
            .map(|e| Edge { directed: false, ..*e });
        let base = base_edges.with_edges(all_edges.collect::<Vec<_>>())?;
        let shared = opts.composition == Composition::Shared;
        let mut tiers = Vec::with_capacity(self.stack.len());
        for (k, spec) in self.stack.iter().enumerate() {
            let priority = k as u32 + 1;
            let protocol = match spec.kind {
                Kind::Bw => match &spec.source {
                    TierSource::List(l) => Protocol::Bw(self.designation(l)?),
                    _ => unreachable!("bw tiers always name a list"),
                },
                Kind::Mis => Protocol::Mis,
                Kind::Mds => Protocol::Mds,
            };
            let source = match (&spec.source, opts.supplier_graph) {
                (TierSource::Compacted | TierSource::Full, _) if shared => &TierSource::Full,
                (TierSource::Compacted | TierSource::Full, Some(SupplierGraph::Full)) => &TierSource::Full,
                (TierSource::Compacted | TierSource::Full, Some(SupplierGraph::Compacted)) => {
                    &TierSource::Compacted
                }
                (s, _) => s,
            };
            let tier = match source {
                TierSource::List(_) | TierSource::Base => {
                    Tier::new(priority, spec.label.clone(), protocol, base_edges.clone())
                }
                TierSource::Full => Tier::new(priority, spec.label.clone(), protocol, full.clone()),
                TierSource::Flow => Tier::new(priority, spec.label.clone(), protocol, flow.clone()),
                TierSource::Compacted => {
                    let (g, groups) = build_compacted_supplier_graph(&table)?;
                    Tier::grouped(priority, spec.label.clone(), protocol, g, groups)
                }
            };
            tiers.push(tier);
        }
        System::new(base, AlgorithmStack::new(tiers, opts.composition)?)
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::parse(s)
    }
}

fn parse_tier(line: &str) -> std::result::Result<TierSpec, String> {
    let t: Vec<&str> = line.split_whitespace().collect();
    if t.len() < 2 || t.len() > 3 {
        return Err("expected `<bw|mis|mds> <label> [key=value]`".into());
    }
    let kind: Kind = t[0].parse()?;
    let label = t[1].to_string();
    let option = match t.get(2) {
        Some(o) => Some(o.split_once('=').ok_or_else(|| format!("expected key=value, got `{o}`"))?),
        None => None,
    };
    let source = match (kind, option) {
        (Kind::Bw, Some(("list", l))) => TierSource::List(l.to_string()),
        (Kind::Bw, _) => return Err("bw needs `list=<name>`".into()),
        (Kind::Mis, None) => TierSource::Compacted,
        (Kind::Mis, Some(("graph", "compacted"))) => TierSource::Compacted,
        (Kind::Mis, Some(("graph", "full"))) => TierSource::Full,
        (Kind::Mis, Some(("graph", "base"))) => TierSource::Base,
        (Kind::Mds, None) => TierSource::Flow,
        (Kind::Mds, Some(("graph", "flow"))) => TierSource::Flow,
        (Kind::Mds, Some(("graph", "base"))) => TierSource::Base,
        (_, Some((k, v))) => return Err(format!("unsupported option `{k}={v}` for {kind}")),
    };
    Ok(TierSpec { kind, label, source })
}

impl fmt::Display for TierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let option = match &self.source {
            TierSource::List(l) => format!("list={l}"),
            TierSource::Compacted => "graph=compacted".into(),
            TierSource::Full => "graph=full".into(),
            TierSource::Base => "graph=base".into(),
            TierSource::Flow => "graph=flow".into(),
        };
        write!(f, "{} {} {option}", self.kind, self.label)
    }
}

/// Which supplier graph MIS tiers use, overriding the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupplierGraph {
    Compacted,
    Full,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssembleOptions {
    pub supplier_graph: Option<SupplierGraph>,
    /// Suppliers treated as public on top of the scenario's own.
    pub public: Vec<String>,
    /// `Shared` puts every tier on one variable per column and forces the full supplier graph.
    pub composition: Composition,
}

const MULTI_LIST: &str = include_str!("../scenarios/multi_list.scn");
const CONTENTION: &str = include_str!("../scenarios/contention.scn");
const THREE_TIER: &str = include_str!("../scenarios/three_tier.scn");

/// Names of the scenarios compiled into the library.
pub const BUILTIN: [&str; 3] = ["multi-list", "contention", "three-tier"];

pub fn builtin(name: &str) -> Option<Scenario> {
    let text = match name {
        "multi-list" => MULTI_LIST,
        "contention" => CONTENTION,
        "three-tier" => THREE_TIER,
        _ => return None,
    };
    Some(Scenario::parse(text).expect("built-in scenarios parse"))
}

/// A connected random scenario on `n` columns `C1..Cn` with one list,
/// a supplier table, a flow forest and the stack `[bw, mis, mds]`.
pub fn random_scenario(n: usize, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let columns: Vec<String> = (1..=n).map(|i| format!("C{i}")).collect();
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((columns[j].clone(), columns[i].clone()));
    }
    let entries = columns
        .iter()
        .map(|c| {
            let d = if rng.gen_bool(0.2) { Designation::Out } else { Designation::In };
            (c.clone(), d)
        })
        .collect();
    let supplier_count = (n / 3).max(1);
    let mut suppliers: Vec<(String, Vec<String>)> = Vec::new();
    for c in &columns {
        let k = rng.gen_range(0..=2usize).min(supplier_count);
        let mut names: Vec<String> = (0..supplier_count).map(|s| format!("S{}", s + 1)).collect();
        names.shuffle(&mut rng);
        names.truncate(k);
        names.sort();
        if !names.is_empty() {
            suppliers.push((c.clone(), names));
        }
    }
    let mut flow = Vec::new();
    for i in 1..n {
        if rng.gen_bool(0.8) {
            let j = rng.gen_range(0..i);
            flow.push(FlowEdge {
                from: columns[j].clone(),
                to: columns[i].clone(),
                directed: true,
            });
        }
    }
    Scenario {
        columns,
        edges,
        lists: vec![BwList {
            name: "L".into(),
            entries,
        }],
        suppliers,
        public: Vec::new(),
        flow,
        stack: vec![
            TierSpec {
                kind: Kind::Bw,
                label: "BW".into(),
                source: TierSource::List("L".into()),
            },
            TierSpec {
                kind: Kind::Mis,
                label: "MIS".into(),
                source: TierSource::Compacted,
            },
            TierSpec {
                kind: Kind::Mds,
                label: "MDS".into(),
                source: TierSource::Flow,
            },
        ],
    }
}

/// One tier's stabilized result read back on the columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierResult {
    pub label: String,
    pub kind: Kind,
    pub priority: u32,
    /// Column label and the tier's value there.
    pub states: Vec<(String, State)>,
    /// Columns this tier keeps in.
    pub in_columns: Vec<String>,
    /// The tier's own in-set, by its node labels (group labels for compacted tiers).
    pub in_set: Vec<String>,
    /// Nodes the tier solves on after lower-tier exclusions.
    pub induced_n: usize,
    /// Oracle check of the in-set on the induced subgraph; absent when the run did not stabilize.
    pub oracle_ok: Option<bool>,
}

/// What every tier decided per column, and where they all agree on `in`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskReport {
    pub stabilized: bool,
    pub steps: u64,
    pub total_moves: u64,
    pub cycle: Option<Cycle>,
    pub tiers: Vec<TierResult>,
    pub intersection: Vec<String>,
    pub bounds: BoundReport,
    pub warnings: Vec<String>,
}

fn names(g: &Graph, s: &NodeSet) -> Vec<String> {
    s.iter().map(|v| g.display_name(v)).collect()
}

/// Checks a tier's in-set with the oracles on the subgraph its lower tiers leave it.
pub fn tier_oracle_ok(system: &System, c: &Configuration, tier: usize) -> bool {
    let t = system.tier(tier);
    let induced = system.induced_nodes(c, tier);
    let in_set = system.in_set(c, tier);
    if !in_set.is_subset(&induced) {
        return false;
    }
    let sub = match t.topology.induced_subgraph(&induced) {
        Ok(g) => g,
        Err(_) => return false,
    };
    match &t.protocol {
        Protocol::Bw(d) => induced
            .iter()
            .all(|v| in_set.contains(v) == (d.get(v) == Designation::In)),
        Protocol::Mis => oracles::is_maximal_independent(&sub, &in_set),
        Protocol::Mds => oracles::is_minimal_dominating(&sub, &in_set),
    }
}

impl RiskReport {
    pub fn new(system: &System, outcome: &RunOutcome) -> RiskReport {
        let c = &outcome.final_config;
        let g = system.graph();
        let mut tiers = Vec::new();
        let mut warnings = Vec::new();
        let mut intersection = g.nodes();
        for (k, t) in system.stack().tiers().iter().enumerate() {
            let cols = system.in_columns(c, k);
            intersection = intersection.intersection(&cols);
            let induced = system.induced_nodes(c, k);
            let in_set = system.in_set(c, k);
            if outcome.stabilized && in_set.is_empty() && !induced.is_empty() {
                warnings.push(format!("{} keeps nothing in on its induced subgraph", t.label()));
            }
            if outcome.stabilized && cols.is_empty() {
                warnings.push(format!("{} keeps no column in; this dimension is unresolved", t.label()));
            }
            tiers.push(TierResult {
                label: t.label().to_string(),
                kind: t.kind(),
                priority: t.id.priority,
                states: g
                    .node_ids()
                    .iter()
                    .map(|&v| g.display_name(v))
                    .zip(system.projected_states(c, k))
                    .collect(),
                in_columns: names(g, &cols),
                in_set: names(&t.topology, &in_set),
                induced_n: induced.len(),
                oracle_ok: outcome.stabilized.then(|| tier_oracle_ok(system, c, k)),
            });
        }
        if outcome.stabilized && intersection.is_empty() {
            warnings.push("no column is in under every algorithm".into());
        }
        if !outcome.stabilized {
            warnings.push(match outcome.cycle {
                Some(cy) => format!(
                    "livelock: configuration repeated after {} steps (period {})",
                    cy.detected_at_step, cy.period
                ),
                None => "move budget exhausted before stabilization".into(),
            });
        }
        RiskReport {
            stabilized: outcome.stabilized,
            steps: outcome.trace.steps,
            total_moves: outcome.trace.len() as u64,
            cycle: outcome.cycle,
            tiers,
            intersection: names(g, &intersection),
            bounds: system.bound_report(c, &outcome.trace),
            warnings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let status = if self.stabilized { "stabilized" } else { "not stabilized" };
        let _ = writeln!(out, "{status} after {} moves in {} steps", self.total_moves, self.steps);
        let width = self
            .tiers
            .first()
            .map(|t| t.states.iter().map(|(c, _)| c.len()).max().unwrap_or(0))
            .unwrap_or(0)
            .max("column".len());
        let _ = write!(out, "\n{:width$}", "column");
        for t in &self.tiers {
            let _ = write!(out, "  {:>6}", t.label);
        }
        out.push('\n');
        let rows = self.tiers.first().map(|t| t.states.len()).unwrap_or(0);
        for r in 0..rows {
            let _ = write!(out, "{:width$}", self.tiers[0].states[r].0);
            for t in &self.tiers {
                let _ = write!(out, "  {:>6}", t.states[r].1.name());
            }
            out.push('\n');
        }
        out.push('\n');
        for t in &self.tiers {
            let oracle = match t.oracle_ok {
                Some(true) => "oracle ok",
                Some(false) => "oracle FAILED",
                None => "oracle skipped",
            };
            let _ = writeln!(
                out,
                "{} ({}): in {{{}}} on {} nodes, columns {{{}}}, {oracle}",
                t.label,
                t.kind,
                t.in_set.join(", "),
                t.induced_n,
                t.in_columns.join(", ")
            );
        }
        let _ = writeln!(out, "intersection: {{{}}}", self.intersection.join(", "));
        out.push('\n');
        for b in &self.bounds.tiers {
            let _ = writeln!(
                out,
                "bound {}: {} moves after lower tiers settled (of {}), limit {} on n={} [{}]",
                b.label,
                b.moves_after_lower_stable,
                b.total_moves,
                b.bound,
                b.induced_n,
                if b.pass { "pass" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "bound combined: {} moves, limit {} on n={} [{}]",
            self.bounds.total_moves,
            self.bounds.combined_bound,
            self.bounds.combined_n,
            if self.bounds.combined_pass { "pass" } else { "FAIL" }
        );
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Daemon, PolicyKind, RunOptions, SchedulerPolicy};

    fn table_one() -> SupplierTable {
        let mut t = SupplierTable::new();
        t.add("A", &["X"])
            .add("B", &["X", "Y"])
            .add("C", &["Y"])
            .add("D", &["Y", "Z"])
            .add("E", &["Z"])
            .add("F", &["X", "Z"]);
        t
    }

    fn edge_names(g: &Graph) -> BTreeSet<String> {
        g.edges()
            .iter()
            .map(|e| {
                let mut p = [g.display_name(e.from), g.display_name(e.to)];
                p.sort();
                p.concat()
            })
            .collect()
    }

    #[test]
    fn full_supplier_graph_of_table_one() {
        let g = build_full_supplier_graph(&table_one()).unwrap();
        let want: BTreeSet<String> = ["AB", "AF", "BF", "BC", "BD", "CD", "DE", "DF", "EF"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(edge_names(&g), want);
    }

    #[test]
    fn full_supplier_graph_trivia() {
        let mut t = SupplierTable::new();
        t.add("A", &["X"]);
        assert_eq!(build_full_supplier_graph(&t).unwrap().size(), 0);
        let mut t = SupplierTable::new();
        t.add("A", &["X", "Y"]).add("B", &["X", "Y"]);
        assert_eq!(build_full_supplier_graph(&t).unwrap().size(), 1);
    }

    #[test]
    fn compacted_graph_of_table_one_is_a_triangle() {
        let (g, groups) = build_compacted_supplier_graph(&table_one()).unwrap();
        let labels: Vec<String> = g.node_ids().iter().map(|&v| g.display_name(v)).collect();
        assert_eq!(labels, ["ABF", "BCD", "DEF"]);
        assert_eq!(g.size(), 3);
        for &v in g.node_ids() {
            assert!(oracles::is_maximal_independent(&g, &NodeSet::from_iter([v])));
        }
        assert_eq!(groups.members(NodeId(2)), Some(&NodeSet::from([2, 3, 4])));
    }

    #[test]
    fn public_supplier_isolates_its_group() {
        let mut t = table_one();
        t.set_public("Y");
        let (g, _) = build_compacted_supplier_graph(&t).unwrap();
        let bcd = g.id_of_label("BCD").unwrap();
        assert_eq!(g.degree(bcd).unwrap(), 0);
        assert_eq!(g.size(), 1);
        let full = build_full_supplier_graph(&t).unwrap();
        assert!(!full.has_edge(NodeId(3), NodeId(4)));
    }

    #[test]
    fn disjoint_suppliers_give_edgeless_compacted_graph() {
        let mut t = SupplierTable::new();
        t.add("A", &["X"]).add("B", &["Y"]);
        let (g, _) = build_compacted_supplier_graph(&t).unwrap();
        assert_eq!(g.size(), 0);
        assert_eq!(oracles::maximal_independent_sets(&g, 16).unwrap(), vec![g.nodes()]);
    }

    #[test]
    fn compacted_and_full_agree_on_adjacency() {
        let t = table_one();
        let full = build_full_supplier_graph(&t).unwrap();
        let (g, groups) = build_compacted_supplier_graph(&t).unwrap();
        for &a in g.node_ids() {
            for &b in g.node_ids() {
                if a >= b {
                    continue;
                }
                let shared = !groups.members(a).unwrap().intersection(groups.members(b).unwrap()).is_empty();
                assert_eq!(g.has_edge(a, b), shared);
                if shared {
                    let ma = groups.members(a).unwrap();
                    assert!(ma.iter().any(|x| groups.members(b).unwrap().iter().any(|y| x == y || full.has_edge(x, y))));
                }
            }
        }
    }

    #[test]
    fn flow_graph_builders() {
        let path = build_flow_graph(&[
            FlowEdge { from: "A".into(), to: "B".into(), directed: true },
            FlowEdge { from: "B".into(), to: "C".into(), directed: true },
        ])
        .unwrap();
        assert_eq!(path.order(), 3);
        assert_eq!(edge_names(&path), ["AB", "BC"].iter().map(|s| s.to_string()).collect());
        assert!(path.edges().iter().all(|e| e.directed));
        assert_eq!(build_flow_graph(&[]).unwrap().order(), 0);
    }

    #[test]
    fn builtins_parse_and_round_trip() {
        for name in BUILTIN {
            let sc = builtin(name).unwrap();
            assert_eq!(Scenario::parse(&sc.to_text()).unwrap(), sc, "{name}");
            sc.assemble(&AssembleOptions::default()).unwrap();
        }
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("[columns]\nA B\n[edges]\nA Z\n", 4),
            ("A B\n", 1),
            ("[columns]\nA\n[nope]\n", 3),
            ("[columns]\nA\n[lists]\nL: A=maybe\n", 4),
            ("[columns]\nA\n\n[stack]\nbw B list=missing\n", 5),
            ("[columns]\nA B\n[flow]\nA => B\n", 4),
        ];
        for (text, line) in cases {
            match Scenario::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn empty_stack_cannot_assemble() {
        let sc = Scenario::parse("[columns]\nA B\n").unwrap();
        assert!(matches!(sc.assemble(&AssembleOptions::default()), Err(Error::Scenario(_))));
    }

    #[test]
    fn multi_list_assembles_two_bw_tiers() {
        let sc = builtin("multi-list").unwrap();
        let sys = sc.assemble(&AssembleOptions::default()).unwrap();
        assert_eq!(sys.graph().order(), 5);
        assert_eq!(sys.stack().kinds(), [Kind::Bw, Kind::Bw]);
    }

    #[test]
    fn three_tier_order_and_priorities() {
        let sys = builtin("three-tier").unwrap().assemble(&AssembleOptions::default()).unwrap();
        assert_eq!(sys.stack().kinds(), [Kind::Bw, Kind::Mis, Kind::Mds]);
        let pr: Vec<u32> = sys.stack().tiers().iter().map(|t| t.id.priority).collect();
        assert_eq!(pr, [1, 2, 3]);
    }

    #[test]
    fn shared_mode_uses_full_supplier_graph() {
        let opts = AssembleOptions {
            composition: Composition::Shared,
            ..Default::default()
        };
        let sys = builtin("contention").unwrap().assemble(&opts).unwrap();
        assert!(sys.stack().tiers().iter().all(|t| t.projection == crate::engine::Projection::Identity));
        assert_eq!(sys.tier(0).topology.size(), 9);
    }

    #[test]
    fn unknown_public_supplier_is_rejected() {
        let opts = AssembleOptions {
            public: vec!["Q".into()],
            ..Default::default()
        };
        assert!(builtin("contention").unwrap().assemble(&opts).is_err());
    }

    #[test]
    fn whitelist_only_report_keeps_everything() {
        let sc = Scenario::parse("[columns]\nA B C\n[edges]\nA B\n[lists]\nW:\n[stack]\nbw W list=W\n").unwrap();
        let sys = sc.assemble(&AssembleOptions::default()).unwrap();
        let mut d = Daemon::new(SchedulerPolicy::new(PolicyKind::Synchronous, 0));
        let out = sys.run(sys.random_configuration(1), &mut d, RunOptions { max_moves: 1000, detect_cycles: true });
        let r = RiskReport::new(&sys, &out);
        assert_eq!(r.intersection, ["A", "B", "C"]);
        assert!(r.warnings.is_empty());
        assert!(r.to_text().contains("intersection: {A, B, C}"));
    }

    #[test]
    fn random_scenarios_are_seeded_and_valid() {
        assert_eq!(random_scenario(12, 4), random_scenario(12, 4));
        assert_ne!(random_scenario(12, 4), random_scenario(12, 5));
        for seed in 0..20 {
            let sc = random_scenario(10, seed);
            assert_eq!(Scenario::parse(&sc.to_text()).unwrap(), sc);
            sc.assemble(&AssembleOptions::default()).unwrap();
        }
    }
}
