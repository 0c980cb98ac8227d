// Property checks shared by the per-module tests and the acceptance report.
// Each returns the list of violations it found, empty when the property holds.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Duration;

use gts_core::explore::{explore, Config, Engine, Exploration, Mode, Strategy};
use gts_core::grammar::{bundled, bundled_grammar, Grammar};
use gts_core::iso::{certificate, find_isomorphism};
use gts_core::multiplicity::Multiplicity;
use gts_core::shape::covered;
use gts_core::transform::{abstract_successors, normalise};
use gts_core::abstract_graph;

use rand::Rng;

use super::*;

pub fn multiplicity_oracle() -> Vec<String> {
    let mut bad = Vec::new();
    for a in Multiplicity::BOUNDED {
        for b in Multiplicity::BOUNDED {
            let sums: BTreeSet<u32> =
                members(a).iter().flat_map(|x| members(b).into_iter().map(move |y| plus(*x, y))).collect();
            let expected = smallest_cover(&sums);
            if a.add(b) != expected {
                bad.push(format!("{a} + {b} = {}, expected {expected}", a.add(b)));
            }
            let included = members(a).is_subset(&members(b));
            if a.is_subsumed_by(b) != included || b.subsumes(a) != included {
                bad.push(format!("{a} below {b}: got {}, expected {included}", a.is_subsumed_by(b)));
            }
        }
        let removable: BTreeSet<u32> =
            members(a).into_iter().filter(|k| *k > 0).map(|k| if k == OMEGA { k } else { k - 1 }).collect();
        match a.subtract_one() {
            Ok(m) if !removable.is_empty() && m == smallest_cover(&removable) => {}
            Err(_) if removable.is_empty() => {}
            got => bad.push(format!("{a} - 1 = {got:?}, from {removable:?}")),
        }
    }
    bad
}

pub fn multiplicity_order_laws() -> Vec<String> {
    let mut bad = Vec::new();
    let all = Multiplicity::BOUNDED;
    for a in all {
        if !a.is_subsumed_by(a) {
            bad.push(format!("{a} not reflexive"));
        }
        for b in all {
            if a.is_subsumed_by(b) && b.is_subsumed_by(a) && a != b {
                bad.push(format!("{a} and {b} below each other"));
            }
            for c in all {
                if a.is_subsumed_by(b) && b.is_subsumed_by(c) && !a.is_subsumed_by(c) {
                    bad.push(format!("{a} below {b} below {c} but not below {c}"));
                }
            }
        }
    }
    bad
}

/// Shapes of random graphs, their renamed copies and random widenings.
pub fn random_shapes(seed: u64, count: usize, max_nodes: u32) -> Vec<Shape> {
    let l = labels();
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let g = random_graph(&mut rng, &l, max_nodes, 0.15);
            let s = abstract_graph(&permuted(&mut rng, &g));
            if i % 2 == 0 {
                widened(&mut rng, &s)
            } else {
                s
            }
        })
        .collect()
}

pub fn shape_order_laws(seed: u64, count: usize) -> Vec<String> {
    let mut bad = Vec::new();
    let mut rng = rng(seed);
    for (i, s) in random_shapes(seed, count, 6).iter().enumerate() {
        if !s.is_subsumed_by(s) {
            bad.push(format!("shape {i} not below itself"));
        }
        let t = widened(&mut rng, s);
        let u = widened(&mut rng, &t);
        if !s.is_subsumed_by(&t) || !t.is_subsumed_by(&u) {
            bad.push(format!("shape {i} not below its widening"));
        }
        if !s.is_subsumed_by(&u) {
            bad.push(format!("shape {i}: transitivity fails"));
        }
        let mutual = s.is_subsumed_by(&t) && t.is_subsumed_by(s);
        if mutual != s.strictly_isomorphic(&t) {
            bad.push(format!("shape {i}: mutual subsumption disagrees with strict isomorphism"));
        }
    }
    bad
}

pub fn certificate_soundness(seed: u64, graphs: usize, copies: usize) -> Vec<String> {
    let l = labels();
    let mut rng = rng(seed);
    let mut bad = Vec::new();
    for i in 0..graphs {
        let g = random_graph(&mut rng, &l, 10, 0.12);
        let c = certificate(&g);
        for _ in 0..copies {
            let h = permuted(&mut rng, &g);
            if certificate(&h) != c {
                bad.push(format!("graph {i}: certificate changed under renaming"));
            }
            if find_isomorphism(&g, &h).is_none() {
                bad.push(format!("graph {i}: renamed copy not found isomorphic"));
            }
        }
    }
    bad
}

pub fn isomorphism_oracle(seed: u64, pairs: usize) -> Vec<String> {
    let l = labels();
    let mut rng = rng(seed);
    let mut bad = Vec::new();
    for i in 0..pairs {
        let g = random_graph(&mut rng, &l, 6, 0.2);
        // Half the pairs are renamed copies with one edge possibly toggled.
        let mut h = permuted(&mut rng, &g);
        if i % 2 == 1 && h.node_count() > 0 {
            let nodes: Vec<_> = h.nodes().collect();
            let (s, t) = (nodes[rng.gen_range(0..nodes.len())], nodes[rng.gen_range(0..nodes.len())]);
            let label = l.binary[rng.gen_range(0..l.binary.len())];
            if !h.remove_edge(&gts_core::Edge::new(s, label, t)) {
                h.add_edge(s, label, t).unwrap();
            }
        }
        let expected = brute_force_isomorphic(&g, &h);
        let found = find_isomorphism(&g, &h);
        if found.is_some() != expected {
            bad.push(format!("pair {i}: search says {}, brute force says {expected}", found.is_some()));
        }
        if found.is_some() && certificate(&g) != certificate(&h) {
            bad.push(format!("pair {i}: isomorphic graphs with different certificates"));
        }
        if find_isomorphism(&h, &g).is_some() != expected {
            bad.push(format!("pair {i}: search is not symmetric"));
        }
    }
    bad
}

pub fn config(strategy: Strategy, subsumption: bool) -> Config {
    Config { strategy, subsumption, ..Config::default() }
}

pub const STRATEGIES: [Strategy; 2] = [Strategy::Bfs, Strategy::Dfs];

/// Concrete states reachable within `depth` steps that no stored abstract
/// state covers, for every strategy and subsumption setting.
pub fn soundness(grammar: &Grammar, depth: usize) -> Vec<String> {
    let concrete = Config {
        engine: Engine::Concrete,
        strategy: Strategy::Bfs,
        subsumption: false,
        max_depth: Some(depth),
        ..Config::default()
    };
    let oracle = explore(grammar, &concrete).expect("concrete run");
    let mut bad = Vec::new();
    for strategy in STRATEGIES {
        for subsumption in [false, true] {
            let c = config(strategy, subsumption);
            let run = explore(grammar, &c).expect("abstract run");
            if !run.stats.complete {
                bad.push(format!("{}: {strategy}/{subsumption} did not finish", grammar.name));
                continue;
            }
            let states: Vec<&Shape> = run.system.states().map(|(_, s)| s).collect();
            for (id, g) in oracle.system.states() {
                if !covered(g.graph(), states.iter().copied()) {
                    bad.push(format!("{}: concrete state {id} uncovered ({strategy}, subsumption {subsumption})", grammar.name));
                }
            }
        }
    }
    bad
}

/// Every concrete step `g -r-> h` of the oracle is matched by an abstract
/// step of `r` from the shape of `g` whose result covers `h`.
pub fn commutation(grammar: &Grammar, depth: usize) -> Vec<String> {
    let concrete = Config {
        engine: Engine::Concrete,
        strategy: Strategy::Bfs,
        subsumption: false,
        max_depth: Some(depth),
        ..Config::default()
    };
    let oracle = explore(grammar, &concrete).expect("concrete run");
    let mut bad = Vec::new();
    for t in oracle.system.transitions() {
        let g = oracle.system.state(t.source).expect("stored");
        let h = oracle.system.state(t.target).expect("stored");
        let rule = grammar.rule(&t.rule).expect("known rule");
        let targets: Vec<Shape> = abstract_successors(rule, &abstract_graph(g.graph()))
            .expect("abstract step")
            .into_iter()
            .map(|step| step.target)
            .collect();
        if !covered(h.graph(), targets.iter()) {
            bad.push(format!("{}: step {} -{}-> {} not covered", grammar.name, t.source, t.rule, t.target));
        }
    }
    bad
}

pub fn run(grammar: &Grammar, config: &Config) -> Exploration {
    explore(grammar, config).expect("exploration")
}

type Memo = Mutex<HashMap<String, Arc<OnceLock<Arc<Exploration>>>>>;

/// `run`, shared across the tests of one binary. Concurrent requests for the
/// same configuration wait for a single exploration.
pub fn cached(grammar: &Grammar, config: &Config) -> Arc<Exploration> {
    static MEMO: OnceLock<Memo> = OnceLock::new();
    let key = format!("{} {config:?}", grammar.name);
    let slot = MEMO.get_or_init(Default::default).lock().unwrap().entry(key).or_default().clone();
    slot.get_or_init(|| Arc::new(run(grammar, config))).clone()
}

pub fn bundled_grammars() -> Vec<Grammar> {
    bundled().iter().map(|(name, _)| bundled_grammar(name).expect("bundled")).collect()
}

/// The three numbers the reduction trend is judged on.
#[derive(Clone, Copy, Debug)]
pub struct Reduction {
    pub maximum: usize,
    pub dfs: usize,
    pub bfs: usize,
}

pub fn reduction(grammar: &Grammar) -> Reduction {
    let unsubsumed = Config { mode: Mode::Reach, ..config(Strategy::Dfs, false) };
    let maximum = cached(grammar, &unsubsumed).stats.maximum.expect("complete run");
    let dfs = cached(grammar, &config(Strategy::Dfs, true)).stats.generated;
    let bfs = cached(grammar, &config(Strategy::Bfs, true)).stats.generated;
    Reduction { maximum, dfs, bfs }
}

pub fn reduction_trend(rows: &[(String, Reduction)]) -> Vec<String> {
    let mut bad = Vec::new();
    for (name, r) in rows {
        if r.dfs >= r.maximum {
            bad.push(format!("{name}: DFS generated {} is not below the maximum {}", r.dfs, r.maximum));
        }
        if r.dfs > r.bfs {
            bad.push(format!("{name}: DFS generated {} exceeds BFS generated {}", r.dfs, r.bfs));
        }
    }
    for pair in rows.windows(2) {
        let ratio = |r: &Reduction| r.dfs as f64 / r.maximum as f64;
        if ratio(&pair[1].1) >= ratio(&pair[0].1) {
            bad.push(format!(
                "ratio does not fall from {} ({:.3}) to {} ({:.3})",
                pair[0].0,
                ratio(&pair[0].1),
                pair[1].0,
                ratio(&pair[1].1)
            ));
        }
    }
    bad
}

pub fn accounting(name: &str, c: &Config, e: &Exploration) -> Vec<String> {
    let s = &e.stats;
    let mut bad = Vec::new();
    if s.relevant != s.generated - s.subsumed {
        bad.push(format!("{name} {c:?}: relevant {} != generated {} - subsumed {}", s.relevant, s.generated, s.subsumed));
    }
    if !c.subsumption && (s.maximum != Some(s.generated) || s.subsumed != 0 || s.discarded != 0) {
        bad.push(format!("{name} {c:?}: subsumption off but {s:?}"));
    }
    bad
}

/// The CSV row without the time and memory columns.
pub fn stable_row(e: &Exploration, name: &str, c: &Config) -> String {
    let row = e.stats.csv_row(name, c);
    let fields: Vec<&str> = row.split(',').collect();
    [&fields[..12], &fields[14..]].concat().join(",")
}

pub fn normalise_fixpoint_random(seed: u64, count: usize) -> Vec<String> {
    let l = labels();
    let mut rng = rng(seed);
    let mut bad = Vec::new();
    for i in 0..count {
        let g = random_graph(&mut rng, &l, 8, 0.15);
        let s = abstract_graph(&g);
        if !normalise(&s).strictly_isomorphic(&s) {
            bad.push(format!("graph {i}: normalise moved its shape"));
        }
    }
    bad
}

pub fn normalise_fixpoint_states(e: &Exploration, name: &str) -> Vec<String> {
    e.system
        .states()
        .filter(|(_, s)| !normalise(s).strictly_isomorphic(s))
        .map(|(id, _)| format!("{name}: state {id} is not normal"))
        .collect()
}

pub fn timeout(secs: u64) -> Option<Duration> {
    Some(Duration::from_secs(secs))
}
