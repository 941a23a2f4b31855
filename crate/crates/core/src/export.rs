//! Trace, bound-report and DOT serializations.

use std::fmt::Write as _;

use serde::Serialize;

use crate::engine::{BoundReport, Configuration, System, Trace};
use crate::protocols::{Rule, State};

#[derive(Serialize)]
struct TraceLine<'a> {
    step: u64,
    node: String,
    algorithm: &'a str,
    rule: Rule,
    old: State,
    new: State,
}

/// One JSON object per move, one move per line.
pub fn trace_jsonl(system: &System, trace: &Trace) -> String {
    let mut out = String::new();
    for m in &trace.moves {
        let tier = system.tier(m.tier);
        let line = TraceLine {
            step: m.step,
            node: tier.topology.display_name(m.node),
            algorithm: tier.label(),
            rule: m.rule,
            old: m.old,
            new: m.new,
        };
        out.push_str(&serde_json::to_string(&line).expect("trace line serializes"));
        out.push('\n');
    }
    out
}

pub fn bound_report_json(report: &BoundReport) -> String {
    serde_json::to_string_pretty(report).expect("bound report serializes")
}

fn color(s: State) -> &'static str {
    match s {
        State::In => "palegreen",
        State::Wait => "gold",
        State::Out => "lightcoral",
        State::Out1 => "lightcoral",
        State::Out2 => "lightpink",
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One tier's graph with nodes filled by their state in `c`.
pub fn tier_dot(system: &System, c: &Configuration, tier: usize) -> String {
    let t = system.tier(tier);
    let g = &t.topology;
    let mut out = String::new();
    let _ = writeln!(out, "graph {} {{", quote(t.label()));
    out.push_str("  node [style=filled];\n");
    for &v in g.node_ids() {
        let s = system.value(c, tier, v).expect("tier node");
        let name = g.display_name(v);
        let _ = writeln!(
            out,
            "  {} [label={}, fillcolor={}];",
            quote(&name),
            quote(&format!("{name}\\n{s}")),
            color(s)
        );
    }
    for e in g.edges() {
        let dir = if e.directed { " [dir=forward]" } else { "" };
        let _ = writeln!(
            out,
            "  {} -- {}{dir};",
            quote(&g.display_name(e.from)),
            quote(&g.display_name(e.to))
        );
    }
    out.push_str("}\n");
    out
}
