mod common;

use common::checks::{self, cached, config, run, STRATEGIES};
use gts_core::explore::{is_fresh_iso, is_fresh_subsumption, Config, Freshness, Frontier, Mode, Strategy, TransitionSystem};
use gts_core::grammar::{bundled_grammar, parse_grammar, Grammar};
use gts_core::multiplicity::Multiplicity;
use gts_core::{Arity, Graph, Shape};

fn grammar(name: &str) -> Grammar {
    bundled_grammar(name).expect("bundled grammar")
}

/// A one-node shape labelled `label` with the given multiplicity.
fn single(label: &str, m: Multiplicity) -> Shape {
    let mut alphabet = gts_core::Alphabet::new();
    let p = alphabet.declare("P", Arity::Unary).unwrap();
    let q = alphabet.declare("Q", Arity::Unary).unwrap();
    let mut g = Graph::new();
    g.add_node(0);
    g.add_edge(0, if label == "P" { p } else { q }, 0).unwrap();
    Shape::concrete(&g).with_node_mult(0, m).unwrap()
}

#[test]
fn counter_has_three_abstract_states() {
    let e = run(&grammar("counter"), &config(Strategy::Dfs, true));
    assert!(e.stats.complete);
    assert_eq!(e.stats.generated, 3);
    assert_eq!(e.stats.subsumed, 0);
    let mut mults: Vec<String> = e
        .system
        .states()
        .map(|(_, s)| s.nodes().map(|v| s.node_mult(v).to_string()).collect::<Vec<_>>().join(","))
        .collect();
    mults.sort();
    assert_eq!(mults, ["", "1", "2+"]);
}

#[test]
fn empty_rule_set_has_one_state() {
    let g = parse_grammar("grammar idle\nlabel P unary\n\ngraph\n  node a P\n").unwrap();
    for strategy in STRATEGIES {
        for subsumption in [false, true] {
            let e = run(&g, &config(strategy, subsumption));
            assert_eq!(e.stats.generated, 1);
            assert_eq!(e.stats.relevant, 1);
            assert_eq!(e.stats.subsumed, 0);
            assert_eq!(e.stats.discarded, 0);
            assert_eq!(e.system.transitions().len(), 0);
        }
    }
}

#[test]
fn firewall_subsumption_generates_fewer_states() {
    // DFS ties with the maximum here; see the test below.
    let g = grammar("firewall-2");
    let on = &cached(&g, &config(Strategy::Bfs, true)).stats;
    let off = &cached(&g, &config(Strategy::Bfs, false)).stats;
    assert!(on.complete && off.complete);
    assert!(on.generated < off.generated, "{} vs {}", on.generated, off.generated);
}

#[test]
fn iso_freshness() {
    let two = single("P", Multiplicity::TWO_PLUS);
    let mut ts = TransitionSystem::default();
    assert_eq!(is_fresh_iso(&two, &two.colouring(), &ts), Freshness::Fresh { subsumed: vec![], discarded: 0 });
    let id = ts.insert(two.clone());
    assert_eq!(is_fresh_iso(&two, &two.colouring(), &ts), Freshness::Known(id));
    let one = single("P", Multiplicity::ONE_PLUS);
    assert!(matches!(is_fresh_iso(&one, &one.colouring(), &ts), Freshness::Fresh { .. }));
}

#[test]
fn subsumption_freshness() {
    let two = single("P", Multiplicity::TWO_PLUS);
    let one = single("P", Multiplicity::ONE_PLUS);
    let any = single("P", Multiplicity::ZERO_PLUS);
    assert_eq!(two.certificate(), one.certificate());
    assert_ne!(two.certificate(), single("Q", Multiplicity::TWO_PLUS).certificate());
    assert!(two.is_subsumed_by(&one) && !one.is_subsumed_by(&two));

    let mut ts = TransitionSystem::default();
    let mut frontier = Frontier::new(Strategy::Dfs);
    let u = ts.insert(two.clone());
    frontier.push(u);
    assert_eq!(is_fresh_subsumption(&two, &two.colouring(), &ts, &mut frontier), Freshness::Known(u));
    assert_eq!(
        is_fresh_subsumption(&one, &one.colouring(), &ts, &mut frontier),
        Freshness::Fresh { subsumed: vec![u], discarded: 1 }
    );
    assert!(!frontier.contains(u));

    // Both members of a chain are subsumed by its top in one call.
    let mut ts = TransitionSystem::default();
    let mut frontier = Frontier::new(Strategy::Bfs);
    let a = ts.insert(two);
    let b = ts.insert(one.clone());
    frontier.push(b);
    assert_eq!(
        is_fresh_subsumption(&any, &any.colouring(), &ts, &mut frontier),
        Freshness::Fresh { subsumed: vec![a, b], discarded: 1 }
    );
    assert_eq!(is_fresh_subsumption(&one, &one.colouring(), &ts, &mut frontier), Freshness::Known(b));
}

#[test]
fn abstraction_is_finite() {
    for name in ["firewall-2", "linked-list"] {
        let c = Config { timeout: checks::timeout(60), ..config(Strategy::Dfs, true) };
        let e = run(&grammar(name), &c);
        assert!(e.stats.complete, "{name}");
        assert!(e.stats.generated <= 10_000, "{name}: {}", e.stats.generated);
        assert_eq!(checks::normalise_fixpoint_states(&e, name), Vec::<String>::new());
        e.system.audit().unwrap();
    }
}

#[test]
fn relevant_states_agree_across_strategies() {
    for g in checks::bundled_grammars() {
        let bfs = &cached(&g, &config(Strategy::Bfs, true)).stats;
        let dfs = &cached(&g, &config(Strategy::Dfs, true)).stats;
        assert!(bfs.complete && dfs.complete, "{}", g.name);
        assert_eq!(bfs.relevant, dfs.relevant, "{}", g.name);
    }
}

#[test]
fn accounting_identities_hold() {
    for g in checks::bundled_grammars() {
        for strategy in STRATEGIES {
            for subsumption in [false, true] {
                for mode in [Mode::Full, Mode::Reach] {
                    let c = Config { mode, ..config(strategy, subsumption) };
                    let e = cached(&g, &c);
                    assert_eq!(checks::accounting(&g.name, &c, &e), Vec::<String>::new());
                    e.system.audit().unwrap();
                    if mode == Mode::Full {
                        assert_eq!(e.stats.transitions_generated, e.system.transitions().len());
                    }
                }
            }
        }
    }
}

#[test]
fn reach_mode_keeps_relevant_states() {
    for g in checks::bundled_grammars() {
        for strategy in STRATEGIES {
            let full = cached(&g, &config(strategy, true));
            let reach = cached(&g, &Config { mode: Mode::Reach, ..config(strategy, true) });
            assert_eq!(full.stats.relevant, reach.stats.relevant, "{} {strategy}", g.name);
            assert_eq!(reach.system.transitions().len(), 0);
            assert_eq!(reach.stats.transitions_generated, 0);
            for (_, s) in reach.system.states() {
                assert!(full.system.relevant_states().any(|(_, t)| t.strictly_isomorphic(s)), "{}", g.name);
            }
        }
    }
}

#[test]
fn runs_are_deterministic() {
    for g in checks::bundled_grammars() {
        for strategy in STRATEGIES {
            for subsumption in [false, true] {
                let c = config(strategy, subsumption);
                let (a, b) = (cached(&g, &c), run(&g, &c));
                assert_eq!(checks::stable_row(&a, &g.name, &c), checks::stable_row(&b, &g.name, &c));
                let ta: Vec<_> = a.system.transitions().cloned().collect();
                let tb: Vec<_> = b.system.transitions().cloned().collect();
                assert_eq!(ta, tb);
            }
        }
    }
}

#[test]
fn subsumption_never_generates_more_than_the_maximum() {
    for g in checks::bundled_grammars() {
        let maximum = cached(&g, &config(Strategy::Dfs, false)).stats.maximum.expect("complete run");
        for strategy in STRATEGIES {
            assert!(cached(&g, &config(strategy, true)).stats.generated <= maximum, "{} {strategy}", g.name);
        }
    }
}

#[test]
fn firewall_reduction_trend() {
    let rows: Vec<(String, checks::Reduction)> =
        ["firewall-3", "firewall-4"].iter().map(|n| (n.to_string(), checks::reduction(&grammar(n)))).collect();
    assert_eq!(checks::reduction_trend(&rows), Vec::<String>::new());
}

/// On the smallest firewall DFS happens to visit every abstract state: the
/// packet classes only grow, and the state holding no safe outer packet is
/// popped last. The trend check reports this; here it is pinned so a change
/// in search order is noticed.
#[test]
fn smallest_firewall_dfs_reaches_the_maximum() {
    let r = checks::reduction(&grammar("firewall-2"));
    assert_eq!(r.dfs, r.maximum);
    assert!(r.dfs > r.bfs);
}

#[test]
fn limits_mark_runs_incomplete() {
    let g = grammar("firewall-3");
    let e = run(&g, &Config { max_states: Some(5), ..config(Strategy::Bfs, false) });
    assert!(!e.stats.complete);
    assert_eq!(e.stats.maximum, None);
    assert!(e.stats.generated <= 5);
}

#[test]
fn concrete_depth_bound_is_complete() {
    let c = Config { engine: gts_core::explore::Engine::Concrete, max_depth: Some(6), ..config(Strategy::Bfs, false) };
    let e = run(&grammar("counter"), &c);
    assert!(e.stats.complete);
    assert_eq!(e.stats.generated, 7);
}
