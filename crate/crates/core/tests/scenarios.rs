use ipstab_core::oracles;
use ipstab_core::scenarios::{self, AssembleOptions, RiskReport, Scenario, SupplierGraph};
use ipstab_core::{Daemon, NodeSet, PolicyKind, RunOptions, SchedulerPolicy, System};

fn run(sys: &System, policy: PolicyKind, seed: u64) -> ipstab_core::RunOutcome {
    let mut d = Daemon::new(SchedulerPolicy::new(policy, seed));
    sys.run(
        sys.random_configuration(seed),
        &mut d,
        RunOptions {
            max_moves: sys.default_max_moves(),
            detect_cycles: true,
        },
    )
}

#[test]
fn multi_list_report_matches_the_table() {
    let sys = scenarios::builtin("multi-list").unwrap().assemble(&AssembleOptions::default()).unwrap();
    let out = run(&sys, PolicyKind::Synchronous, 1);
    let r = RiskReport::new(&sys, &out);
    assert_eq!(r.tiers[0].in_columns, ["A", "B", "E"]);
    assert_eq!(r.intersection, ["A", "B"]);
    assert!(r.tiers.iter().all(|t| t.oracle_ok == Some(true)));
}

#[test]
fn hierarchy_resolves_contention() {
    let sc = scenarios::builtin("contention").unwrap();
    for mode in [SupplierGraph::Compacted, SupplierGraph::Full] {
        let sys = sc
            .assemble(&AssembleOptions {
                supplier_graph: Some(mode),
                ..Default::default()
            })
            .unwrap();
        for policy in PolicyKind::ALL {
            for seed in 0..20 {
                let out = run(&sys, policy, seed);
                assert!(out.stabilized);
                let mis = sys.in_set(&out.final_config, 0);
                assert!(oracles::is_maximal_independent(&sys.tier(0).topology, &mis));
                assert!(scenarios::tier_oracle_ok(&sys, &out.final_config, 1));
            }
        }
    }
}

#[test]
fn intersection_is_the_set_intersection_of_tier_columns() {
    for seed in 0..30 {
        let sc = scenarios::random_scenario(14, seed);
        let sys = sc.assemble(&AssembleOptions::default()).unwrap();
        let out = run(&sys, PolicyKind::ALL[seed as usize % 6], seed);
        let r = RiskReport::new(&sys, &out);
        let mut expect: Option<Vec<String>> = None;
        for t in &r.tiers {
            expect = Some(match expect {
                None => t.in_columns.clone(),
                Some(e) => e.into_iter().filter(|c| t.in_columns.contains(c)).collect(),
            });
        }
        assert_eq!(r.intersection, expect.unwrap());
        for t in &r.tiers {
            assert_eq!(t.oracle_ok, Some(true), "seed {seed} {}", t.label);
        }
    }
}

#[test]
fn three_tier_reports_pass_oracles() {
    let sys = scenarios::builtin("three-tier").unwrap().assemble(&AssembleOptions::default()).unwrap();
    for policy in PolicyKind::ALL {
        let out = run(&sys, policy, 5);
        let r = RiskReport::new(&sys, &out);
        assert!(r.stabilized);
        assert!(r.tiers.iter().all(|t| t.oracle_ok == Some(true)));
        assert!(!r.intersection.contains(&"C".to_string()));
    }
}

#[test]
fn public_supplier_frees_its_group() {
    let sc = scenarios::builtin("contention").unwrap();
    let sys = sc
        .assemble(&AssembleOptions {
            public: vec!["Y".into()],
            ..Default::default()
        })
        .unwrap();
    let out = run(&sys, PolicyKind::CentralAdversarialMinId, 0);
    let bcd = sys.tier(0).topology.id_of_label("BCD").unwrap();
    assert!(sys.in_set(&out.final_config, 0).contains(bcd));
    let _ = NodeSet::new();
}

#[test]
fn scenario_text_round_trips() {
    let text = "# demo\n[columns]\nI13 I14\nJ13\n[edges]\nI13 J13\n[lists]\nL: I13=out\nL: J13=in\n[suppliers]\nI13: S\nJ13: S T\npublic: T\n[flow]\nI13 -> I14\nI14 -- J13\n[stack]\nbw B list=L\nmis M graph=full\nmds D\n";
    let sc = Scenario::parse(text).unwrap();
    assert_eq!(sc.lists.len(), 1);
    assert_eq!(sc.lists[0].entries.len(), 2);
    assert_eq!(Scenario::parse(&sc.to_text()).unwrap(), sc);
    assert_eq!(sc.to_text(), Scenario::parse(&sc.to_text()).unwrap().to_text());
}
