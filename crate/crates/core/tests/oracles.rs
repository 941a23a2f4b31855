mod common;

use ipstab_core::oracles::{self, SelectionRule, DEFAULT_CAP};
use ipstab_core::scenarios::{self, build_compacted_supplier_graph};
use ipstab_core::{Graph, NodeSet};

fn flow() -> Graph {
    scenarios::builtin("contention").unwrap().flow_graph().unwrap()
}

fn named(g: &Graph, s: &NodeSet) -> String {
    s.iter().map(|v| g.display_name(v)).collect()
}

#[test]
fn drawn_flow_dominating_set_is_minimal() {
    let g = flow();
    let ce: NodeSet = ["C", "E"].iter().map(|l| g.id_of_label(l).unwrap()).collect();
    assert!(oracles::is_minimal_dominating(&g, &ce));
}

#[test]
fn flow_minimal_dominating_sets() {
    let g = flow();
    let mut sets: Vec<String> = oracles::minimal_dominating_sets(&g, DEFAULT_CAP)
        .unwrap()
        .iter()
        .map(|s| named(&g, s))
        .collect();
    sets.sort();
    assert_eq!(sets, ["ABDF", "ABE", "CDF", "CE"]);
}

#[test]
fn every_flow_dominating_set_spans_adjacent_supplier_groups() {
    let sc = scenarios::builtin("contention").unwrap();
    let (compact, groups) = build_compacted_supplier_graph(&sc.supplier_table()).unwrap();
    let g = flow();
    for s in oracles::minimal_dominating_sets(&g, DEFAULT_CAP).unwrap() {
        let touched: Vec<_> = groups.iter().filter(|(_, m)| !m.intersection(&s).is_empty()).map(|(id, _)| id).collect();
        let adjacent = touched.iter().any(|&a| touched.iter().any(|&b| compact.has_edge(a, b)));
        assert!(adjacent, "{}", named(&g, &s));
    }
    // and no single group's columns dominate the flow
    for (_, members) in groups.iter() {
        assert!(!oracles::is_dominating(&g, members));
    }
}

#[test]
fn contention_is_infeasible_under_both_conventions() {
    let sc = scenarios::builtin("contention").unwrap();
    for rule in SelectionRule::ALL {
        let v = sc.joint_feasibility(&[], rule).unwrap();
        assert!(!v.feasible, "{}", rule.name());
        assert_eq!(v.witness, None);
        assert_eq!(v.sets_examined, 64);
    }
}

#[test]
fn public_supplier_verdict_is_checked_by_brute_force() {
    let sc = scenarios::builtin("contention").unwrap();
    let mut table = sc.supplier_table();
    table.set_public("Y");
    let (compact, groups) = build_compacted_supplier_graph(&table).unwrap();
    let g = flow();
    for rule in SelectionRule::ALL {
        let v = sc.joint_feasibility(&["Y".to_string()], rule).unwrap();
        if let Some(w) = &v.witness {
            assert!(oracles::is_dominating(&g, w));
            let chosen: NodeSet = groups
                .iter()
                .filter(|(_, m)| match rule {
                    SelectionRule::AnyColumn => !m.intersection(w).is_empty(),
                    SelectionRule::AllColumns => m.is_subset(w),
                })
                .map(|(id, _)| id)
                .collect();
            assert!(oracles::is_maximal_independent(&compact, &chosen));
        }
    }
}

#[test]
fn joint_on_equal_graphs_is_always_feasible() {
    for n in 1..=5 {
        for g in common::all_connected(n) {
            let v = oracles::joint_feasibility_same_nodes(&g, &g, DEFAULT_CAP).unwrap();
            assert!(v.feasible);
            let w = v.witness.unwrap();
            assert!(oracles::is_maximal_independent(&g, &w) && oracles::is_dominating(&g, &w));
        }
    }
}

#[test]
fn chain_values_on_named_graphs() {
    let k3 = Graph::from_edges(3, &[(1, 2), (2, 3), (1, 3)]).unwrap();
    assert_eq!(oracles::domination_chain(&k3, DEFAULT_CAP).unwrap().values(), [1; 6]);
    let c5 = Graph::from_edges(5, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)]).unwrap();
    let c = oracles::domination_chain(&c5, DEFAULT_CAP).unwrap();
    assert!(c.is_ordered());
    assert_eq!((c.gamma, c.beta0), (2, 2));
}

#[test]
fn irredundant_definition_is_the_private_neighbor_one() {
    let k3 = Graph::from_edges(3, &[(1, 2), (2, 3), (1, 3)]).unwrap();
    assert!(!oracles::is_irredundant(&k3, &NodeSet::from([1, 2])));
    for s in oracles::maximal_irredundant_sets(&k3, DEFAULT_CAP).unwrap() {
        assert_eq!(s.len(), 1);
    }
}
