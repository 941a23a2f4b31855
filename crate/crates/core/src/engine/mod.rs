//! Execution of a protocol stack under a daemon until no rule is enabled.
//!
//! A process is a `(node, tier)` pair. Each step the daemon picks a nonempty
//! set of enabled processes; all of their guards are read from the pre-step
//! configuration and each fires the first enabled rule of its protocol.

mod bounds;
mod scheduler;
mod stack;
mod trace;

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use bounds::{bound_for, combined_bound, BoundReport, TierBound};
pub use scheduler::{Candidate, Daemon, PolicyKind, SchedulerPolicy};
pub use stack::{AlgorithmId, AlgorithmStack, Composition, Projection, StackBuilder, Tier};
pub use trace::{moves_after_lower_stable, MoveRecord, Trace};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, NodeSet};
use crate::protocols::{bw_guards, mds_guards, mis_guards, Kind, Protocol, RuleSet, State};

/// Value of every `(node, tier)` variable. Tiers sharing a variable share a slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    slots: Vec<Vec<State>>,
}

impl Configuration {
    /// Raw values of one slot, indexed like the slot's topology nodes.
    pub fn slot(&self, slot: usize) -> &[State] {
        &self.slots[slot]
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }
}

/// Random stream for initial configurations.
const INIT_STREAM: u64 = 0;

/// A base graph plus the stack running on it, with derived lookup tables.
#[derive(Debug, Clone)]
pub struct System {
    graph: Graph,
    stack: AlgorithmStack,
    slot_of: Vec<usize>,
    slot_domains: Vec<&'static [State]>,
    /// Per tier: group index → base indices (empty for identity tiers).
    members: Vec<Vec<Vec<usize>>>,
    /// Per tier: base index → group indices (empty for identity tiers).
    groups_of: Vec<Vec<Vec<usize>>>,
}

/// Enabled process with the rules that hold.
#[derive(Debug, Clone, Copy)]
struct Process {
    tier: usize,
    node: usize,
    id: NodeId,
    rules: RuleSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub max_moves: u64,
    /// Stop with a proof of livelock when a deterministic policy revisits a configuration.
    pub detect_cycles: bool,
}

/// A configuration seen twice under a deterministic policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    /// Step count at which the repeat was observed.
    pub detected_at_step: u64,
    /// Length of the cycle in steps.
    pub period: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub final_config: Configuration,
    pub trace: Trace,
    pub stabilized: bool,
    pub cycle: Option<Cycle>,
}

impl System {
    pub fn new(graph: Graph, stack: AlgorithmStack) -> Result<Self> {
        let base_ids = graph.node_ids().to_vec();
        let mut members = Vec::with_capacity(stack.len());
        let mut groups_of = Vec::with_capacity(stack.len());
        for tier in stack.tiers() {
            match &tier.projection {
                Projection::Identity => {
                    if tier.topology.node_ids() != base_ids.as_slice() {
                        return Err(Error::InvalidStack(format!(
                            "tier {} must run on the base node set",
                            tier.label()
                        )));
                    }
                    members.push(Vec::new());
                    groups_of.push(Vec::new());
                }
                Projection::Groups(map) => {
                    if stack.composition() == Composition::Shared {
                        return Err(Error::InvalidStack(format!(
                            "tier {} is compacted; shared composition needs every tier on the base nodes",
                            tier.label()
                        )));
                    }
                    let mut m = Vec::new();
                    let mut inverse = vec![Vec::new(); graph.order()];
                    for (gi, &gid) in tier.topology.node_ids().iter().enumerate() {
                        let cols = map.members(gid).ok_or_else(|| {
                            Error::InvalidStack(format!(
                                "tier {}: group node {gid} has no member list",
                                tier.label()
                            ))
                        })?;
                        if cols.is_empty() {
                            return Err(Error::InvalidStack(format!(
                                "tier {}: group node {gid} has no members",
                                tier.label()
                            )));
                        }
                        let mut idxs = Vec::new();
                        for c in cols {
                            let ci = graph.index_of(c).ok_or(Error::UnknownNode(c))?;
                            idxs.push(ci);
                            inverse[ci].push(gi);
                        }
                        m.push(idxs);
                    }
                    members.push(m);
                    groups_of.push(inverse);
                }
            }
        }
        let (slot_of, slot_domains) = match stack.composition() {
            Composition::Hierarchical => (
                (0..stack.len()).collect(),
                stack.tiers().iter().map(|t| t.kind().domain()).collect(),
            ),
            Composition::Shared => {
                let domain = if stack.kinds().contains(&Kind::Mds) {
                    Kind::Mds.domain()
                } else {
                    Kind::Mis.domain()
                };
                (vec![0; stack.len()], vec![domain])
            }
        };
        Ok(System {
            graph,
            stack,
            slot_of,
            slot_domains,
            members,
            groups_of,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn stack(&self) -> &AlgorithmStack {
        &self.stack
    }

    pub fn tier(&self, index: usize) -> &Tier {
        self.stack.tier(index)
    }

    pub fn tier_index(&self, label: &str) -> Result<usize> {
        self.stack
            .position(label)
            .ok_or_else(|| Error::InvalidStack(format!("no algorithm labelled `{label}`")))
    }

    /// Largest order among tier graphs; the `n` of the combined ceiling.
    pub fn combined_n(&self) -> u64 {
        self.stack
            .tiers()
            .iter()
            .map(|t| t.topology.order())
            .max()
            .unwrap_or(0) as u64
    }

    /// Ten times the combined ceiling.
    pub fn default_max_moves(&self) -> u64 {
        self.stack
            .combined_bound(self.combined_n())
            .saturating_mul(10)
            .max(1)
    }

    fn fresh(&self, mut fill: impl FnMut(&'static [State]) -> State) -> Configuration {
        let mut slots = Vec::with_capacity(self.slot_domains.len());
        for (slot, &domain) in self.slot_domains.iter().enumerate() {
            let tier = self.slot_of.iter().position(|&s| s == slot).unwrap_or(0);
            let n = self.stack.tier(tier).topology.order();
            slots.push((0..n).map(|_| fill(domain)).collect());
        }
        Configuration { slots }
    }

    /// Every variable at its protocol's out value (`out1` for MDS).
    pub fn all_out(&self) -> Configuration {
        self.fresh(|domain| {
            if domain.contains(&State::Out) {
                State::Out
            } else {
                State::Out1
            }
        })
    }

    /// Every variable drawn uniformly from its domain; deterministic per seed.
    pub fn random_configuration(&self, seed: u64) -> Configuration {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(INIT_STREAM);
        self.fresh(|domain| domain[rng.gen_range(0..domain.len())])
    }

    fn node_index(&self, tier: usize, node: NodeId) -> Result<usize> {
        self.stack
            .tier(tier)
            .topology
            .index_of(node)
            .ok_or(Error::UnknownNode(node))
    }

    fn check_tier(&self, tier: usize) -> Result<()> {
        if tier >= self.stack.len() {
            return Err(Error::InvalidStack(format!("no tier at index {tier}")));
        }
        Ok(())
    }

    pub fn value(&self, c: &Configuration, tier: usize, node: NodeId) -> Result<State> {
        self.check_tier(tier)?;
        let i = self.node_index(tier, node)?;
        Ok(c.slots[self.slot_of[tier]][i])
    }

    /// Overwrite one variable; the state must belong to the variable's domain.
    pub fn set_value(&self, c: &mut Configuration, tier: usize, node: NodeId, state: State) -> Result<()> {
        self.check_tier(tier)?;
        let i = self.node_index(tier, node)?;
        let slot = self.slot_of[tier];
        if !self.slot_domains[slot].contains(&state) {
            return Err(Error::InvalidStack(format!(
                "state {state} is outside the domain of {}",
                self.stack.tier(tier).label()
            )));
        }
        c.slots[slot][i] = state;
        Ok(())
    }

    /// A tier's value read at a base node. Compacted tiers report `in` if any
    /// group containing the node is in, `wait` if none is in but one waits,
    /// and `out` otherwise; nodes outside every group read as `in`.
    fn projected(&self, c: &Configuration, tier: usize, base: usize) -> State {
        let values = &c.slots[self.slot_of[tier]];
        match self.stack.tier(tier).projection {
            Projection::Identity => values[base],
            Projection::Groups(_) => {
                let groups = &self.groups_of[tier][base];
                if groups.is_empty() {
                    return State::In;
                }
                let mut waiting = false;
                for &g in groups {
                    match values[g] {
                        State::In => return State::In,
                        State::Wait => waiting = true,
                        _ => {}
                    }
                }
                if waiting {
                    State::Wait
                } else {
                    State::Out
                }
            }
        }
    }

    /// Base node excluded by some tier below `tier`.
    fn base_gated(&self, c: &Configuration, tier: usize, base: usize) -> bool {
        (0..tier).any(|lower| self.projected(c, lower, base).is_out())
    }

    fn gated_at(&self, c: &Configuration, tier: usize, node: usize) -> bool {
        if self.stack.composition() == Composition::Shared || tier == 0 {
            return false;
        }
        match self.stack.tier(tier).projection {
            Projection::Identity => self.base_gated(c, tier, node),
            Projection::Groups(_) => self.members[tier][node]
                .iter()
                .all(|&b| self.base_gated(c, tier, b)),
        }
    }

    /// `(∃a < self)(x_a(i) = out)` for the tier at `tier`.
    pub fn gate(&self, c: &Configuration, tier: usize, node: NodeId) -> Result<bool> {
        self.check_tier(tier)?;
        let i = self.node_index(tier, node)?;
        Ok(self.gated_at(c, tier, i))
    }

    fn rules_at(&self, c: &Configuration, tier: usize, node: usize) -> RuleSet {
        let t = self.stack.tier(tier);
        let values = &c.slots[self.slot_of[tier]];
        let state = values[node];
        let gated = self.gated_at(c, tier, node);
        let id = t.topology.id_at(node);
        let neighbors = || {
            t.topology
                .neighbor_indices(node)
                .iter()
                .map(|&j| (t.topology.id_at(j), values[j]))
        };
        match &t.protocol {
            Protocol::Bw(designation) => bw_guards(state, designation.get(id), gated),
            Protocol::Mis => mis_guards(id, state, neighbors(), gated),
            Protocol::Mds => mds_guards(id, state, neighbors(), gated),
        }
    }

    /// Rules of `tier` whose guards hold at `node` under `c`.
    pub fn enabled_rules(&self, c: &Configuration, tier: usize, node: NodeId) -> Result<RuleSet> {
        self.check_tier(tier)?;
        let i = self.node_index(tier, node)?;
        Ok(self.rules_at(c, tier, i))
    }

    fn enabled_processes(&self, c: &Configuration) -> Vec<Process> {
        let mut out = Vec::new();
        for (tier, t) in self.stack.tiers().iter().enumerate() {
            for node in 0..t.topology.order() {
                let rules = self.rules_at(c, tier, node);
                if !rules.is_empty() {
                    out.push(Process {
                        tier,
                        node,
                        id: t.topology.id_at(node),
                        rules,
                    });
                }
            }
        }
        out.sort_by_key(|p| (p.id, p.tier));
        out
    }

    pub fn is_stable(&self, c: &Configuration) -> bool {
        self.stack
            .tiers()
            .iter()
            .enumerate()
            .all(|(tier, t)| (0..t.topology.order()).all(|node| self.rules_at(c, tier, node).is_empty()))
    }

    /// Number of enabled `(node, tier)` processes.
    pub fn enabled_count(&self, c: &Configuration) -> usize {
        self.enabled_processes(c).len()
    }

    /// Largest number of simultaneously enabled rules of one protocol at one node.
    pub fn max_rules_per_process(&self, c: &Configuration) -> usize {
        self.enabled_processes(c)
            .iter()
            .map(|p| p.rules.len())
            .max()
            .unwrap_or(0)
    }

    /// Fit a rule's target into the variable's domain (`out` becomes `out1`
    /// in a shared four-state variable).
    fn fit(&self, slot: usize, s: State) -> State {
        if s == State::Out && !self.slot_domains[slot].contains(&State::Out) {
            State::Out1
        } else {
            s
        }
    }

    /// One daemon step. Fails with [`Error::AlreadyStable`] when nothing is enabled.
    pub fn step(&self, c: &Configuration, daemon: &mut Daemon) -> Result<(Configuration, Vec<MoveRecord>)> {
        let enabled = self.enabled_processes(c);
        if enabled.is_empty() {
            return Err(Error::AlreadyStable);
        }
        let candidates: Vec<Candidate> = enabled
            .iter()
            .map(|p| Candidate {
                node: p.id,
                tier: p.tier,
            })
            .collect();
        let mut picked = daemon.select(&candidates);
        if self.stack.composition() == Composition::Shared {
            // one writer per shared variable; `enabled` is sorted by (node, tier)
            let mut seen = BTreeSet::new();
            picked.retain(|&k| seen.insert(enabled[k].node));
        }
        let step = daemon.advance();
        let mut next = c.clone();
        let mut moves = Vec::with_capacity(picked.len());
        for k in picked {
            let p = enabled[k];
            let rule = p.rules.first().expect("enabled process has a rule");
            let slot = self.slot_of[p.tier];
            let old = c.slots[slot][p.node];
            let new = self.fit(slot, rule.target());
            next.slots[slot][p.node] = new;
            moves.push(MoveRecord {
                step,
                node: p.id,
                tier: p.tier,
                priority: self.stack.tier(p.tier).id.priority,
                rule,
                old,
                new,
            });
        }
        Ok((next, moves))
    }

    /// Step until stable or until `max_moves` moves have been made.
    pub fn run(&self, initial: Configuration, daemon: &mut Daemon, opts: RunOptions) -> RunOutcome {
        let detect = opts.detect_cycles && daemon.policy().kind.is_deterministic();
        let mut current = initial;
        let mut trace = Trace::default();
        let mut moves = 0u64;
        // Brent's cycle detection on exact configurations
        let mut tortoise = current.clone();
        let mut power = 1u64;
        let mut lambda = 0u64;
        let mut stabilized = false;
        let mut cycle = None;
        loop {
            if self.is_stable(&current) {
                stabilized = true;
                break;
            }
            if moves >= opts.max_moves {
                break;
            }
            let (next, made) = self.step(&current, daemon).expect("not stable");
            moves += made.len() as u64;
            trace.moves.extend(made);
            trace.steps += 1;
            current = next;
            if detect {
                lambda += 1;
                if current == tortoise {
                    cycle = Some(Cycle {
                        detected_at_step: trace.steps,
                        period: lambda,
                    });
                    break;
                }
                if lambda == power {
                    tortoise = current.clone();
                    power *= 2;
                    lambda = 0;
                }
            }
        }
        match (stabilized, cycle) {
            (true, _) => log::debug!("stabilized after {} moves in {} steps", moves, trace.steps),
            (false, Some(c)) => log::debug!("configuration repeats with period {} at step {}", c.period, c.detected_at_step),
            (false, None) => log::debug!("move budget of {} exhausted", opts.max_moves),
        }
        RunOutcome {
            final_config: current,
            trace,
            stabilized,
            cycle,
        }
    }

    /// Replays `trace` from `initial`, checking that every move's rule was the
    /// one the engine would fire in the pre-step configuration.
    pub fn replay(&self, initial: &Configuration, trace: &Trace) -> Result<Configuration> {
        let mut current = initial.clone();
        let mut k = 0;
        while k < trace.moves.len() {
            let step = trace.moves[k].step;
            let mut next = current.clone();
            while k < trace.moves.len() && trace.moves[k].step == step {
                let m = &trace.moves[k];
                let fail = |message: String| Error::Replay { step, message };
                self.check_tier(m.tier).map_err(|e| fail(e.to_string()))?;
                let i = self.node_index(m.tier, m.node).map_err(|e| fail(e.to_string()))?;
                let slot = self.slot_of[m.tier];
                if current.slots[slot][i] != m.old {
                    return Err(fail(format!("node {} held {}, trace says {}", m.node, current.slots[slot][i], m.old)));
                }
                let rules = self.rules_at(&current, m.tier, i);
                if rules.first() != Some(m.rule) {
                    return Err(fail(format!("node {}: enabled {rules}, trace fired {}", m.node, m.rule)));
                }
                if m.old == m.new {
                    return Err(fail(format!("node {}: move does not change the value", m.node)));
                }
                next.slots[slot][i] = m.new;
                k += 1;
            }
            current = next;
        }
        Ok(current)
    }

    /// Tier nodes whose value is `in`.
    pub fn in_set(&self, c: &Configuration, tier: usize) -> NodeSet {
        let t = self.stack.tier(tier);
        let values = &c.slots[self.slot_of[tier]];
        (0..t.topology.order())
            .filter(|&i| values[i] == State::In)
            .map(|i| t.topology.id_at(i))
            .collect()
    }

    /// Tier nodes not excluded by a lower tier: the induced subgraph the tier solves on.
    pub fn induced_nodes(&self, c: &Configuration, tier: usize) -> NodeSet {
        let t = self.stack.tier(tier);
        (0..t.topology.order())
            .filter(|&i| !self.gated_at(c, tier, i))
            .map(|i| t.topology.id_at(i))
            .collect()
    }

    /// A tier's value at every base node (projected through groups for compacted tiers).
    pub fn projected_states(&self, c: &Configuration, tier: usize) -> Vec<State> {
        (0..self.graph.order()).map(|b| self.projected(c, tier, b)).collect()
    }

    /// Base nodes the tier keeps in: projected value `in` and not excluded below.
    pub fn in_columns(&self, c: &Configuration, tier: usize) -> NodeSet {
        (0..self.graph.order())
            .filter(|&b| self.projected(c, tier, b) == State::In && !self.base_gated(c, tier, b))
            .map(|b| self.graph.id_at(b))
            .collect()
    }

    /// Per-tier and combined move counts against their ceilings.
    ///
    /// A tier's ceiling uses the order of its induced subgraph in `final_config`.
    pub fn bound_report(&self, final_config: &Configuration, trace: &Trace) -> BoundReport {
        let mut tiers = Vec::new();
        for (index, t) in self.stack.tiers().iter().enumerate() {
            let induced = self.induced_nodes(final_config, index);
            let after = trace.moves_after_lower_stable(t.id.priority);
            let gated_after = trace.moves_after_lower_stable_where(t.id.priority, |m| !induced.contains(m.node));
            let induced_n = induced.len() as u64;
            let bound = bound_for(t.kind(), induced_n);
            tiers.push(TierBound {
                label: t.id.label.clone(),
                kind: t.kind(),
                priority: t.id.priority,
                total_moves: trace.moves_of(index),
                moves_after_lower_stable: after,
                gated_moves_after_lower_stable: gated_after,
                induced_n,
                bound,
                pass: after <= bound,
            });
        }
        let combined_n = self.combined_n();
        let combined_bound = self.stack.combined_bound(combined_n);
        let total_moves = trace.len() as u64;
        BoundReport {
            tiers,
            total_moves,
            combined_n,
            combined_bound,
            combined_pass: total_moves <= combined_bound,
        }
    }
}
