//! The three guarded-command protocols: white/blacklist (BW), maximal
//! independent set (MIS) and 1-minimal dominating set (MDS).
//!
//! Guards are pure functions of a node's own value, its neighbors' values and
//! one boolean `gated`, which the engine sets when some lower-priority
//! algorithm currently holds the node out. Each function returns every rule
//! whose guard holds; when more than one holds, the engine fires the first in
//! listing order ([`RuleSet::first`]).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "BW")]
    Bw,
    #[serde(rename = "MIS")]
    Mis,
    #[serde(rename = "MDS")]
    Mds,
}

impl Kind {
    /// The protocol's variable domain.
    pub fn domain(self) -> &'static [State] {
        match self {
            Kind::Bw | Kind::Mis => &[State::Out, State::Wait, State::In],
            Kind::Mds => &[State::Out1, State::Out2, State::Wait, State::In],
        }
    }

    /// Rules in listing order.
    pub fn rules(self) -> &'static [Rule] {
        match self {
            Kind::Bw | Kind::Mis => &[Rule::RWait, Rule::RBack, Rule::RIn, Rule::ROut],
            Kind::Mds => &[
                Rule::RWait,
                Rule::RBack1,
                Rule::RBack2,
                Rule::RIn,
                Rule::ROut1,
                Rule::ROut2,
            ],
        }
    }

    /// The value a node holds when it is excluded.
    pub fn out_state(self) -> State {
        match self {
            Kind::Bw | Kind::Mis => State::Out,
            Kind::Mds => State::Out1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Bw => "BW",
            Kind::Mis => "MIS",
            Kind::Mds => "MDS",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "bw" => Ok(Kind::Bw),
            "mis" => Ok(Kind::Mis),
            "mds" => Ok(Kind::Mds),
            _ => Err(format!("unknown protocol kind `{s}`")),
        }
    }
}

/// Value of a protocol variable `x_a(i)`.
///
/// BW and MIS use `{out, wait, in}`; MDS splits `out` into `out1`
/// (dominated by exactly one member) and `out2` (dominated by several).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum State {
    Out,
    Out1,
    Out2,
    Wait,
    In,
}

impl State {
    /// Every out flavor counts as `out` for gating.
    pub fn is_out(self) -> bool {
        matches!(self, State::Out | State::Out1 | State::Out2)
    }

    pub fn name(self) -> &'static str {
        match self {
            State::Out => "out",
            State::Out1 => "out1",
            State::Out2 => "out2",
            State::Wait => "wait",
            State::In => "in",
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for State {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "out" => Ok(State::Out),
            "out1" => Ok(State::Out1),
            "out2" => Ok(State::Out2),
            "wait" => Ok(State::Wait),
            "in" => Ok(State::In),
            _ => Err(format!("unknown state `{s}`")),
        }
    }
}

/// Rule names. Discriminant order matches listing order for every protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    RWait = 0,
    RBack = 1,
    RBack1 = 2,
    RBack2 = 3,
    RIn = 4,
    ROut = 5,
    ROut1 = 6,
    ROut2 = 7,
}

const ALL_RULES: [Rule; 8] = [
    Rule::RWait,
    Rule::RBack,
    Rule::RBack1,
    Rule::RBack2,
    Rule::RIn,
    Rule::ROut,
    Rule::ROut1,
    Rule::ROut2,
];

impl Rule {
    /// The value assigned when the rule fires.
    pub fn target(self) -> State {
        match self {
            Rule::RWait => State::Wait,
            Rule::RBack | Rule::ROut => State::Out,
            Rule::RBack1 | Rule::ROut1 => State::Out1,
            Rule::RBack2 | Rule::ROut2 => State::Out2,
            Rule::RIn => State::In,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rule::RWait => "RWait",
            Rule::RBack => "RBack",
            Rule::RBack1 => "RBack1",
            Rule::RBack2 => "RBack2",
            Rule::RIn => "RIn",
            Rule::ROut => "ROut",
            Rule::ROut1 => "ROut1",
            Rule::ROut2 => "ROut2",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Small set of rules, iterated in listing order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct RuleSet(u8);

impl RuleSet {
    pub const EMPTY: RuleSet = RuleSet(0);

    pub fn insert(&mut self, r: Rule) {
        self.0 |= 1 << r as u8;
    }

    pub fn contains(self, r: Rule) -> bool {
        self.0 & (1 << r as u8) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// The rule that fires when several are enabled.
    pub fn first(self) -> Option<Rule> {
        self.iter().next()
    }

    pub fn iter(self) -> impl Iterator<Item = Rule> {
        ALL_RULES.into_iter().filter(move |r| self.contains(*r))
    }

    fn with(mut self, cond: bool, r: Rule) -> Self {
        if cond {
            self.insert(r);
        }
        self
    }
}

impl FromIterator<Rule> for RuleSet {
    fn from_iter<I: IntoIterator<Item = Rule>>(iter: I) -> Self {
        let mut s = RuleSet::EMPTY;
        for r in iter {
            s.insert(r);
        }
        s
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.iter().map(Rule::name).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

/// Whitelist (`In`) or blacklist (`Out`) designation, the function `BW(i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Designation {
    In,
    Out,
}

impl FromStr for Designation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "in" => Ok(Designation::In),
            "out" => Ok(Designation::Out),
            _ => Err(format!("designation must be `in` or `out`, got `{s}`")),
        }
    }
}

impl fmt::Display for Designation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Designation::In => "in",
            Designation::Out => "out",
        })
    }
}

/// `BW(i)` over a graph. Nodes without an entry are whitelisted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BwDesignation(BTreeMap<NodeId, Designation>);

impl BwDesignation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, id: NodeId, d: Designation) {
        self.0.insert(id, d);
    }

    pub fn get(&self, id: NodeId) -> Designation {
        self.0.get(&id).copied().unwrap_or(Designation::In)
    }

    pub fn blacklisted(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0
            .iter()
            .filter(|(_, d)| **d == Designation::Out)
            .map(|(&id, _)| id)
    }
}

impl FromIterator<(NodeId, Designation)> for BwDesignation {
    fn from_iter<I: IntoIterator<Item = (NodeId, Designation)>>(iter: I) -> Self {
        BwDesignation(iter.into_iter().collect())
    }
}

/// A protocol instance with its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Protocol {
    Bw(BwDesignation),
    Mis,
    Mds,
}

impl Protocol {
    pub fn kind(&self) -> Kind {
        match self {
            Protocol::Bw(_) => Kind::Bw,
            Protocol::Mis => Kind::Mis,
            Protocol::Mds => Kind::Mds,
        }
    }
}

/// Blacklist/whitelist guards.
pub fn bw_guards(state: State, designation: Designation, gated: bool) -> RuleSet {
    let whitelisted = designation == Designation::In;
    RuleSet::EMPTY
        .with(state.is_out() && whitelisted && !gated, Rule::RWait)
        .with(state == State::Wait && (!whitelisted || gated), Rule::RBack)
        .with(state == State::Wait && whitelisted && !gated, Rule::RIn)
        .with(
            (state == State::In || state == State::Wait) && (!whitelisted || gated),
            Rule::ROut,
        )
}

/// Maximal independent set guards. `neighbors` yields `(id(k), x_MIS(k))` over `N(i)`.
pub fn mis_guards(
    id: NodeId,
    state: State,
    neighbors: impl IntoIterator<Item = (NodeId, State)>,
    gated: bool,
) -> RuleSet {
    let mut in_neighbor = false;
    let mut smaller_waiting = false;
    for (k, s) in neighbors {
        in_neighbor |= s == State::In;
        smaller_waiting |= s == State::Wait && k < id;
    }
    RuleSet::EMPTY
        .with(state.is_out() && !in_neighbor && !gated, Rule::RWait)
        .with(state == State::Wait && (in_neighbor || gated), Rule::RBack)
        .with(
            state == State::Wait && !in_neighbor && !smaller_waiting && !gated,
            Rule::RIn,
        )
        .with(state == State::In && (in_neighbor || gated), Rule::ROut)
}

/// Minimal dominating set guards. `neighbors` yields `(id(k), x_MDS(k))` over `N(i)`.
///
/// `ROut1`/`ROut2` read as `in ∧ ((count ∧ no out1 neighbor) ∨ gated)`.
pub fn mds_guards(
    id: NodeId,
    state: State,
    neighbors: impl IntoIterator<Item = (NodeId, State)>,
    gated: bool,
) -> RuleSet {
    let mut in_count = 0usize;
    let mut out1_neighbor = false;
    let mut smaller_waiting = false;
    for (k, s) in neighbors {
        in_count += usize::from(s == State::In);
        out1_neighbor |= s == State::Out1;
        smaller_waiting |= s == State::Wait && k < id;
    }
    let waiting = state == State::Wait;
    let member = state == State::In;
    RuleSet::EMPTY
        .with(state.is_out() && in_count == 0 && !gated, Rule::RWait)
        .with(waiting && (in_count == 1 || gated), Rule::RBack1)
        .with(
            (state == State::Out1 || waiting) && (in_count > 1 || gated),
            Rule::RBack2,
        )
        .with(
            waiting && in_count == 0 && !smaller_waiting && !gated,
            Rule::RIn,
        )
        .with(
            member && ((in_count == 1 && !out1_neighbor) || gated),
            Rule::ROut1,
        )
        .with(
            member && ((in_count > 1 && !out1_neighbor) || gated),
            Rule::ROut2,
        )
}
