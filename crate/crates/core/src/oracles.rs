//! Exhaustive ground truth for set properties, the domination chain and the
//! joint MIS/MDS feasibility search. Independent of the engine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GroupMap, NodeId, NodeSet};

/// Default largest graph the subset enumerations accept.
pub const DEFAULT_CAP: usize = 16;

fn closed(g: &Graph, v: NodeId) -> NodeSet {
    g.closed_neighborhood(v).unwrap_or_default()
}

fn covered_by(g: &Graph, s: &NodeSet) -> NodeSet {
    s.iter().fold(NodeSet::new(), |acc, v| acc.union(&closed(g, v)))
}

/// No edge of `g` has both endpoints in `s`.
pub fn is_independent(g: &Graph, s: &NodeSet) -> bool {
    g.edges().iter().all(|e| !(s.contains(e.from) && s.contains(e.to)))
}

/// Independent, and every node outside `s` has a neighbor in `s`.
pub fn is_maximal_independent(g: &Graph, s: &NodeSet) -> bool {
    is_independent(g, s)
        && g.node_ids().iter().all(|&v| {
            s.contains(v)
                || g.open_neighborhood(v)
                    .map(|n| n.iter().any(|u| s.contains(u)))
                    .unwrap_or(false)
        })
}

/// `N[s]` is the whole node set.
pub fn is_dominating(g: &Graph, s: &NodeSet) -> bool {
    covered_by(g, s).len() == g.order() && s.is_subset(&g.nodes())
}

/// Dominating, and dropping any member breaks domination.
pub fn is_minimal_dominating(g: &Graph, s: &NodeSet) -> bool {
    is_dominating(g, s) && s.iter().all(|v| !is_dominating(g, &s.without(v)))
}

/// Every member covers some node of `N[s]` that no other member covers.
pub fn is_irredundant(g: &Graph, s: &NodeSet) -> bool {
    s.iter().all(|v| {
        let others = covered_by(g, &s.without(v));
        closed(g, v).iter().any(|u| !others.contains(u))
    })
}

/// Closed neighborhoods of `g` as bitmasks over node indices.
struct Masks {
    ids: Vec<NodeId>,
    closed: Vec<u32>,
}

impl Masks {
    fn new(g: &Graph, cap: usize) -> Result<Self> {
        let n = g.order();
        if n > cap || n > 31 {
            return Err(Error::CapExceeded { n, cap });
        }
        let ids = g.node_ids().to_vec();
        let closed = ids
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut m = 1u32 << i;
                for u in g.open_neighborhood(v).expect("own node") {
                    m |= 1 << ids.binary_search(&u).expect("own node");
                }
                m
            })
            .collect();
        Ok(Masks { ids, closed })
    }

    fn n(&self) -> usize {
        self.ids.len()
    }

    fn full(&self) -> u32 {
        ((1u64 << self.n()) - 1) as u32
    }

    fn cover(&self, s: u32) -> u32 {
        bits(s).fold(0, |acc, i| acc | self.closed[i])
    }

    fn independent(&self, s: u32) -> bool {
        bits(s).all(|i| self.closed[i] & s == 1 << i)
    }

    fn maximal_independent(&self, s: u32) -> bool {
        self.independent(s) && self.cover(s) == self.full()
    }

    fn dominating(&self, s: u32) -> bool {
        self.cover(s) == self.full()
    }

    fn minimal_dominating(&self, s: u32) -> bool {
        self.dominating(s) && bits(s).all(|i| !self.dominating(s & !(1 << i)))
    }

    fn irredundant(&self, s: u32) -> bool {
        bits(s).all(|i| {
            let others = bits(s & !(1 << i)).fold(0, |acc, j| acc | self.closed[j]);
            self.closed[i] & !others != 0
        })
    }

    /// Irredundance is hereditary, so maximality is a one-node extension check.
    fn maximal_irredundant(&self, s: u32) -> bool {
        self.irredundant(s) && (0..self.n()).all(|i| s & (1 << i) != 0 || !self.irredundant(s | (1 << i)))
    }

    fn to_set(&self, s: u32) -> NodeSet {
        bits(s).map(|i| self.ids[i]).collect()
    }
}

fn bits(s: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |&i| s & (1 << i) != 0)
}

fn enumerate(g: &Graph, cap: usize, keep: impl Fn(&Masks, u32) -> bool) -> Result<Vec<NodeSet>> {
    let m = Masks::new(g, cap)?;
    Ok((0..=m.full()).filter(|&s| keep(&m, s)).map(|s| m.to_set(s)).collect())
}

/// All maximal independent sets, in ascending bitmask order.
pub fn maximal_independent_sets(g: &Graph, cap: usize) -> Result<Vec<NodeSet>> {
    enumerate(g, cap, Masks::maximal_independent)
}

/// All minimal dominating sets, in ascending bitmask order.
pub fn minimal_dominating_sets(g: &Graph, cap: usize) -> Result<Vec<NodeSet>> {
    enumerate(g, cap, Masks::minimal_dominating)
}

/// All maximal irredundant sets, in ascending bitmask order.
pub fn maximal_irredundant_sets(g: &Graph, cap: usize) -> Result<Vec<NodeSet>> {
    enumerate(g, cap, Masks::maximal_irredundant)
}

/// The six chain parameters `ir ≤ γ ≤ i ≤ β₀ ≤ Γ ≤ IR`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominationChain {
    pub ir: usize,
    pub gamma: usize,
    pub i_g: usize,
    pub beta0: usize,
    pub gamma_upper: usize,
    pub ir_upper: usize,
}

impl DominationChain {
    pub fn values(&self) -> [usize; 6] {
        [self.ir, self.gamma, self.i_g, self.beta0, self.gamma_upper, self.ir_upper]
    }

    pub fn is_ordered(&self) -> bool {
        self.values().windows(2).all(|w| w[0] <= w[1])
    }
}

/// One smallest or largest set per chain parameter, in chain order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub chain: DominationChain,
    pub ir: NodeSet,
    pub gamma: NodeSet,
    pub i_g: NodeSet,
    pub beta0: NodeSet,
    pub gamma_upper: NodeSet,
    pub ir_upper: NodeSet,
}

#[derive(Default)]
struct Extremes {
    min: Option<(usize, u32)>,
    max: Option<(usize, u32)>,
}

impl Extremes {
    fn add(&mut self, s: u32) {
        let k = s.count_ones() as usize;
        if self.min.is_none_or(|(m, _)| k < m) {
            self.min = Some((k, s));
        }
        if self.max.is_none_or(|(m, _)| k > m) {
            self.max = Some((k, s));
        }
    }
}

/// Exact chain parameters with witnesses, by enumeration of all subsets.
pub fn domination_chain_report(g: &Graph, cap: usize) -> Result<ChainReport> {
    let m = Masks::new(g, cap)?;
    let (mut irr, mut dom, mut ind) = (Extremes::default(), Extremes::default(), Extremes::default());
    for s in 0..=m.full() {
        if m.maximal_irredundant(s) {
            irr.add(s);
        }
        if m.minimal_dominating(s) {
            dom.add(s);
        }
        if m.maximal_independent(s) {
            ind.add(s);
        }
    }
    // the empty set is the only candidate on the empty graph and qualifies for all three
    let get = |e: Option<(usize, u32)>| e.unwrap_or((0, 0));
    let pick = [irr.min, dom.min, ind.min, ind.max, dom.max, irr.max].map(get);
    Ok(ChainReport {
        chain: DominationChain {
            ir: pick[0].0,
            gamma: pick[1].0,
            i_g: pick[2].0,
            beta0: pick[3].0,
            gamma_upper: pick[4].0,
            ir_upper: pick[5].0,
        },
        ir: m.to_set(pick[0].1),
        gamma: m.to_set(pick[1].1),
        i_g: m.to_set(pick[2].1),
        beta0: m.to_set(pick[3].1),
        gamma_upper: m.to_set(pick[4].1),
        ir_upper: m.to_set(pick[5].1),
    })
}

pub fn domination_chain(g: &Graph, cap: usize) -> Result<DominationChain> {
    domination_chain_report(g, cap).map(|r| r.chain)
}

/// How a set of selected columns selects group nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// A group is selected if any of its columns is.
    AnyColumn,
    /// A group is selected if all of its columns are.
    AllColumns,
}

impl SelectionRule {
    pub const ALL: [SelectionRule; 2] = [SelectionRule::AnyColumn, SelectionRule::AllColumns];

    pub fn name(self) -> &'static str {
        match self {
            SelectionRule::AnyColumn => "any-column",
            SelectionRule::AllColumns => "all-columns",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub witness: Option<NodeSet>,
    pub sets_examined: u64,
}

/// Searches for a column set that the MDS side and the MIS side can both settle on.
///
/// Columns are the nodes of `g_mds`; `groups` maps each node of `g_mis` to its
/// columns. A column set `s` is a joint solution when `s` dominates `g_mds`,
/// the groups it selects form a maximal independent set of `g_mis`, and every
/// grouped column of `s` belongs to a selected group. Subsets are tried in
/// ascending bitmask order over sorted column ids; the first hit is the witness.
pub fn joint_feasibility(
    g_mis: &Graph,
    groups: &GroupMap,
    g_mds: &Graph,
    rule: SelectionRule,
    cap: usize,
) -> Result<FeasibilityVerdict> {
    for &gid in g_mis.node_ids() {
        let cols = groups
            .members(gid)
            .ok_or_else(|| Error::NodeSetMismatch(format!("group node {gid} has no columns")))?;
        if let Some(c) = cols.iter().find(|&c| !g_mds.contains(c)) {
            return Err(Error::NodeSetMismatch(format!(
                "group node {gid} lists column {c} which the flow graph lacks"
            )));
        }
    }
    if let Some((gid, _)) = groups.iter().find(|(gid, _)| !g_mis.contains(*gid)) {
        return Err(Error::NodeSetMismatch(format!(
            "group {gid} is not a node of the independent-set graph"
        )));
    }
    let masks = Masks::new(g_mds, cap)?;
    let columns = g_mds.node_ids();
    let col_mask = |set: &NodeSet| -> u32 {
        set.iter()
            .map(|c| 1u32 << columns.binary_search(&c).expect("checked above"))
            .fold(0, |a, b| a | b)
    };
    let group_masks: Vec<(NodeId, u32)> = g_mis
        .node_ids()
        .iter()
        .map(|&gid| (gid, col_mask(groups.members(gid).expect("checked above"))))
        .collect();
    let grouped = group_masks.iter().fold(0, |a, &(_, m)| a | m);
    let mut examined = 0u64;
    for s in 0..=masks.full() {
        examined += 1;
        if !masks.dominating(s) {
            continue;
        }
        let selected: Vec<&(NodeId, u32)> = group_masks
            .iter()
            .filter(|(_, m)| match rule {
                SelectionRule::AnyColumn => s & m != 0,
                SelectionRule::AllColumns => s & m == *m,
            })
            .collect();
        let in_selected = selected.iter().fold(0, |a, &&(_, m)| a | m);
        if s & grouped & !in_selected != 0 {
            continue;
        }
        let group_set: NodeSet = selected.iter().map(|&&(gid, _)| gid).collect();
        if is_maximal_independent(g_mis, &group_set) {
            return Ok(FeasibilityVerdict {
                feasible: true,
                witness: Some(masks.to_set(s)),
                sets_examined: examined,
            });
        }
    }
    Ok(FeasibilityVerdict {
        feasible: false,
        witness: None,
        sets_examined: examined,
    })
}

/// [`joint_feasibility`] where both sides run on the same nodes.
pub fn joint_feasibility_same_nodes(g_mis: &Graph, g_mds: &Graph, cap: usize) -> Result<FeasibilityVerdict> {
    if g_mis.node_ids() != g_mds.node_ids() {
        return Err(Error::NodeSetMismatch("the two graphs have different node sets".into()));
    }
    joint_feasibility(g_mis, &GroupMap::identity(g_mis), g_mds, SelectionRule::AnyColumn, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(1, 2), (2, 3)]).unwrap()
    }

    fn k3() -> Graph {
        Graph::from_edges(3, &[(1, 2), (2, 3), (1, 3)]).unwrap()
    }

    fn star(leaves: u32) -> Graph {
        let edges: Vec<(u32, u32)> = (2..=leaves + 1).map(|l| (1, l)).collect();
        Graph::from_edges(leaves + 1, &edges).unwrap()
    }

    fn cycle(n: u32) -> Graph {
        let edges: Vec<(u32, u32)> = (1..=n).map(|i| (i, i % n + 1)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn independence() {
        let g = path3();
        assert!(is_independent(&g, &NodeSet::new()));
        assert!(is_independent(&g, &NodeSet::from([2])));
        assert!(!is_independent(&g, &NodeSet::from([1, 2])));
        assert!(is_maximal_independent(&g, &NodeSet::from([2])));
        assert!(!is_maximal_independent(&g, &NodeSet::from([1])));
        assert!(is_maximal_independent(&g, &NodeSet::from([1, 3])));
        for v in 1..=3 {
            assert!(is_maximal_independent(&k3(), &NodeSet::from([v])));
        }
    }

    #[test]
    fn domination() {
        let g = star(4);
        assert!(is_dominating(&g, &g.nodes()));
        assert!(!is_dominating(&g, &NodeSet::new()));
        assert!(is_dominating(&g, &NodeSet::from([1])));
        assert!(is_minimal_dominating(&g, &NodeSet::from([1])));
        assert!(!is_minimal_dominating(&g, &NodeSet::from([1, 2])));
        assert!(is_minimal_dominating(&g, &NodeSet::from([2, 3, 4, 5])));
    }

    #[test]
    fn irredundance() {
        let g = k3();
        assert!(is_irredundant(&g, &NodeSet::new()));
        assert!(is_irredundant(&g, &NodeSet::from([1])));
        assert!(!is_irredundant(&g, &NodeSet::from([1, 2])));
        let p = Graph::from_edges(4, &[(1, 2), (2, 3), (3, 4)]).unwrap();
        assert!(is_irredundant(&p, &NodeSet::from([1, 4])));
        assert!(is_irredundant(&p, &NodeSet::from([2, 3])));
    }

    #[test]
    fn chains_of_small_graphs() {
        let c = domination_chain(&k3(), DEFAULT_CAP).unwrap();
        assert_eq!(c.values(), [1; 6]);
        let p4 = Graph::from_edges(4, &[(1, 2), (2, 3), (3, 4)]).unwrap();
        let c = domination_chain(&p4, DEFAULT_CAP).unwrap();
        assert_eq!((c.gamma, c.beta0, c.i_g), (2, 2, 2));
        let c = domination_chain(&cycle(5), DEFAULT_CAP).unwrap();
        assert_eq!((c.gamma, c.beta0), (2, 2));
        assert!(c.is_ordered());
        let c = domination_chain(&star(4), DEFAULT_CAP).unwrap();
        assert_eq!(c.values(), [1, 1, 1, 4, 4, 4]);
    }

    #[test]
    fn chain_witnesses_have_claimed_sizes() {
        let g = cycle(6);
        let r = domination_chain_report(&g, DEFAULT_CAP).unwrap();
        assert_eq!(r.gamma.len(), r.chain.gamma);
        assert!(is_minimal_dominating(&g, &r.gamma));
        assert!(is_maximal_independent(&g, &r.beta0));
        assert!(is_irredundant(&g, &r.ir_upper));
        assert_eq!(r.ir_upper.len(), r.chain.ir_upper);
    }

    #[test]
    fn cap_is_enforced() {
        let g = Graph::from_edges(17, &[]).unwrap();
        match domination_chain(&g, DEFAULT_CAP) {
            Err(Error::CapExceeded { n: 17, cap: 16 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bitmask_and_set_oracles_agree() {
        let g = Graph::from_edges(6, &[(1, 2), (2, 3), (3, 4), (4, 5), (2, 6), (6, 4)]).unwrap();
        let mis = maximal_independent_sets(&g, DEFAULT_CAP).unwrap();
        let mds = minimal_dominating_sets(&g, DEFAULT_CAP).unwrap();
        let irr = maximal_irredundant_sets(&g, DEFAULT_CAP).unwrap();
        for s in &mis {
            assert!(is_maximal_independent(&g, s));
            assert!(is_minimal_dominating(&g, s));
        }
        for s in &mds {
            assert!(is_minimal_dominating(&g, s));
        }
        for s in &irr {
            assert!(is_irredundant(&g, s));
        }
        let count_mis = (0u32..64)
            .map(|m| (1..=6).filter(|i| m & (1 << (i - 1)) != 0).collect::<Vec<u32>>())
            .filter(|v| is_maximal_independent(&g, &v.iter().map(|&i| NodeId(i)).collect()))
            .count();
        assert_eq!(mis.len(), count_mis);
    }

    #[test]
    fn joint_on_identical_graphs() {
        let one = Graph::from_edges(1, &[]).unwrap();
        let v = joint_feasibility_same_nodes(&one, &one, DEFAULT_CAP).unwrap();
        assert!(v.feasible);
        assert_eq!(v.witness, Some(NodeSet::from([1])));
        let v = joint_feasibility_same_nodes(&path3(), &path3(), DEFAULT_CAP).unwrap();
        assert_eq!(v.witness, Some(NodeSet::from([2])));
    }

    #[test]
    fn joint_mismatch_is_an_error() {
        let mut groups = GroupMap::new();
        groups.insert(NodeId(1), NodeSet::from([9]));
        let g = Graph::from_edges(1, &[]).unwrap();
        assert!(matches!(
            joint_feasibility(&g, &groups, &path3(), SelectionRule::AnyColumn, DEFAULT_CAP),
            Err(Error::NodeSetMismatch(_))
        ));
        assert!(joint_feasibility_same_nodes(&g, &path3(), DEFAULT_CAP).is_err());
    }
}
