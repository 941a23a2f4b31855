mod common;

use ipstab_core::engine::combined_bound;
use ipstab_core::scenarios::{self, AssembleOptions};
use ipstab_core::{
    AlgorithmStack, BwDesignation, Composition, Daemon, Designation, Graph, GroupMap, Kind, NodeId, NodeSet,
    PolicyKind, Protocol, RunOptions, SchedulerPolicy, StackBuilder, State, System, Tier,
};

fn opts(max_moves: u64) -> RunOptions {
    RunOptions {
        max_moves,
        detect_cycles: true,
    }
}

#[test]
fn combined_bound_matches_closed_form() {
    let kinds = [Kind::Bw, Kind::Mis, Kind::Mds];
    assert_eq!(combined_bound(&kinds, 10), 20520);
    for n in 5..200u64 {
        assert_eq!(combined_bound(&kinds, n), 24 * n.pow(3) - 34 * n.pow(2) - 8 * n);
    }
}

#[test]
fn default_budget_is_ten_times_combined_bound() {
    let g = Graph::from_edges(10, &[(1, 2)]).unwrap();
    let stack = StackBuilder::new(&g).bw("BW", BwDesignation::new()).mis("MIS").mds("MDS").build().unwrap();
    let sys = System::new(g, stack).unwrap();
    assert_eq!(sys.default_max_moves(), 205200);
}

#[test]
fn bw_single_blacklisted_node_settles_out() {
    let g = Graph::from_edges(1, &[]).unwrap();
    let des: BwDesignation = [(NodeId(1), Designation::Out)].into_iter().collect();
    let sys = System::new(g.clone(), StackBuilder::new(&g).bw("BW", des).build().unwrap()).unwrap();
    for seed in 0..30 {
        let mut d = Daemon::new(SchedulerPolicy::new(PolicyKind::CentralRandom, seed));
        let out = sys.run(sys.random_configuration(seed), &mut d, opts(100));
        assert!(out.stabilized);
        assert_eq!(sys.value(&out.final_config, 0, NodeId(1)).unwrap(), State::Out);
        assert!(out.trace.len() <= 1);
    }
}

#[test]
fn lower_tier_exclusion_restricts_mis_to_induced_subgraph() {
    // path 1-2-3-4-5 with 3 blacklisted: MIS must solve {1,2} and {4,5} separately
    let g = Graph::from_edges(5, &[(1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
    let des: BwDesignation = [(NodeId(3), Designation::Out)].into_iter().collect();
    let sys = System::new(g.clone(), StackBuilder::new(&g).bw("BW", des).mis("MIS").build().unwrap()).unwrap();
    let keep = NodeSet::from([1, 2, 4, 5]);
    let sub = g.induced_subgraph(&keep).unwrap();
    for policy in PolicyKind::ALL {
        for seed in 0..20 {
            let mut d = Daemon::new(SchedulerPolicy::new(policy, seed));
            let out = sys.run(sys.random_configuration(seed), &mut d, opts(10_000));
            assert!(out.stabilized);
            assert_eq!(sys.induced_nodes(&out.final_config, 1), keep);
            let mis = sys.in_set(&out.final_config, 1);
            assert!(!mis.contains(NodeId(3)));
            assert!(ipstab_core::oracles::is_maximal_independent(&sub, &mis));
        }
    }
}

#[test]
fn compacted_tier_projects_groups_onto_columns() {
    // columns 1..4; groups g1 = {1,2}, g2 = {2,3}; column 4 ungrouped
    let base = Graph::from_edges(4, &[]).unwrap();
    let compact = Graph::from_edges(2, &[(1, 2)]).unwrap();
    let mut groups = GroupMap::new();
    groups.insert(NodeId(1), NodeSet::from([1, 2]));
    groups.insert(NodeId(2), NodeSet::from([2, 3]));
    let des: BwDesignation = [(NodeId(1), Designation::Out), (NodeId(2), Designation::Out)].into_iter().collect();
    let tiers = vec![
        Tier::new(1, "BW", Protocol::Bw(des), base.clone()),
        Tier::grouped(2, "MIS", Protocol::Mis, compact, groups),
    ];
    let sys = System::new(base, AlgorithmStack::hierarchical(tiers).unwrap()).unwrap();
    let mut d = Daemon::new(SchedulerPolicy::new(PolicyKind::Synchronous, 0));
    let out = sys.run(sys.all_out(), &mut d, opts(1000));
    assert!(out.stabilized);
    // g1's columns are all blacklisted, so only g2 may join
    assert_eq!(sys.induced_nodes(&out.final_config, 1), NodeSet::from([2]));
    assert_eq!(sys.in_set(&out.final_config, 1), NodeSet::from([2]));
    assert_eq!(sys.in_columns(&out.final_config, 1), NodeSet::from([3, 4]));
}

#[test]
fn equal_priority_contention_has_no_stable_configuration() {
    let sys = scenarios::builtin("contention")
        .unwrap()
        .assemble(&AssembleOptions {
            composition: Composition::Shared,
            ..Default::default()
        })
        .unwrap();
    let domain = Kind::Mds.domain();
    let n = sys.graph().order() as u32;
    let mut c = sys.all_out();
    let mut stable = 0;
    for code in 0..4usize.pow(n) {
        let mut k = code;
        for v in 1..=n {
            sys.set_value(&mut c, 0, NodeId(v), domain[k % 4]).unwrap();
            k /= 4;
        }
        stable += sys.is_stable(&c) as usize;
    }
    assert_eq!(stable, 0);
}

#[test]
fn equal_priority_contention_livelocks_under_every_deterministic_daemon() {
    let sys = scenarios::builtin("contention")
        .unwrap()
        .assemble(&AssembleOptions {
            composition: Composition::Shared,
            ..Default::default()
        })
        .unwrap();
    for policy in PolicyKind::ALL.into_iter().filter(|p| p.is_deterministic()) {
        let mut d = Daemon::new(SchedulerPolicy::new(policy, 0));
        let out = sys.run(sys.all_out(), &mut d, opts(1_000_000));
        assert!(!out.stabilized);
        let cycle = out.cycle.expect("finite state space under a deterministic daemon");
        assert!(cycle.period >= 1);
    }
    // random daemons cannot prove a cycle but never stabilize either
    let mut d = Daemon::new(SchedulerPolicy::new(PolicyKind::CentralRandom, 3));
    let out = sys.run(sys.all_out(), &mut d, opts(20_000));
    assert!(!out.stabilized && out.cycle.is_none());
    assert!(out.trace.len() >= 20_000);
}

#[test]
fn replay_reproduces_every_run() {
    let sys = scenarios::builtin("three-tier").unwrap().assemble(&AssembleOptions::default()).unwrap();
    for policy in PolicyKind::ALL {
        for seed in 0..25 {
            let init = sys.random_configuration(seed);
            let mut d = Daemon::new(SchedulerPolicy::new(policy, seed));
            let out = sys.run(init.clone(), &mut d, opts(sys.default_max_moves()));
            assert!(out.stabilized);
            assert_eq!(sys.replay(&init, &out.trace).unwrap(), out.final_config);
        }
    }
}

#[test]
fn central_daemons_move_one_process_per_step() {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
    let g = common::random_connected(15, 0.2, &mut rng);
    let sys = System::new(g.clone(), StackBuilder::new(&g).mis("MIS").mds("MDS").build().unwrap()).unwrap();
    for policy in PolicyKind::ALL.into_iter().filter(|p| p.is_central()) {
        let mut d = Daemon::new(SchedulerPolicy::new(policy, 4));
        let out = sys.run(sys.random_configuration(4), &mut d, opts(100_000));
        assert_eq!(out.trace.len() as u64, out.trace.steps);
    }
}
