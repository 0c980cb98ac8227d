// Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use gts_core::graph::{Alphabet, Arity, Edge, Graph, Label, NodeId};
use gts_core::multiplicity::{Multiplicity, Upper};
use gts_core::Shape;

pub mod checks;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two unary and two binary labels.
pub struct Labels {
    pub alphabet: Alphabet,
    pub unary: Vec<Label>,
    pub binary: Vec<Label>,
}

pub fn labels() -> Labels {
    let mut alphabet = Alphabet::new();
    let unary = vec![alphabet.declare("A", Arity::Unary).unwrap(), alphabet.declare("B", Arity::Unary).unwrap()];
    let binary = vec![alphabet.declare("f", Arity::Binary).unwrap(), alphabet.declare("g", Arity::Binary).unwrap()];
    Labels { alphabet, unary, binary }
}

/// A random graph with at most `max_nodes` nodes and roughly `density`
/// binary edges per ordered node pair and label.
pub fn random_graph(rng: &mut impl Rng, l: &Labels, max_nodes: u32, density: f64) -> Graph {
    let n = rng.gen_range(0..=max_nodes);
    let mut g = Graph::new();
    for v in 0..n {
        g.add_node(v);
        for a in &l.unary {
            if rng.gen_bool(0.5) {
                g.add_edge(v, *a, v).unwrap();
            }
        }
    }
    for s in 0..n {
        for t in 0..n {
            for b in &l.binary {
                if rng.gen_bool(density) {
                    g.add_edge(s, *b, t).unwrap();
                }
            }
        }
    }
    g
}

/// `g` with its nodes renamed by a random injective map onto sparse ids.
pub fn permuted(rng: &mut impl Rng, g: &Graph) -> Graph {
    let nodes: Vec<NodeId> = g.nodes().collect();
    let mut ids: Vec<NodeId> = (0..nodes.len() as NodeId).map(|i| 3 * i + 7).collect();
    ids.shuffle(rng);
    let map: BTreeMap<NodeId, NodeId> = nodes.into_iter().zip(ids).collect();
    g.rename(&map)
}

fn edge_set(g: &Graph) -> BTreeSet<Edge> {
    g.edges().copied().collect()
}

/// Isomorphism by trying every bijection.
pub fn brute_force_isomorphic(g: &Graph, h: &Graph) -> bool {
    if g.node_count() != h.node_count() || g.edge_count() != h.edge_count() {
        return false;
    }
    let gn: Vec<NodeId> = g.nodes().collect();
    let mut hn: Vec<NodeId> = h.nodes().collect();
    let target = edge_set(h);
    permutations(&mut hn, 0, &mut |perm| {
        let map: BTreeMap<NodeId, NodeId> = gn.iter().copied().zip(perm.iter().copied()).collect();
        g.edges().all(|e| target.contains(&Edge::new(map[&e.source], e.label, map[&e.target])))
    })
}

fn permutations(items: &mut [NodeId], k: usize, test: &mut dyn FnMut(&[NodeId]) -> bool) -> bool {
    if k == items.len() {
        return test(items);
    }
    for i in k..items.len() {
        items.swap(k, i);
        if permutations(items, k + 1, test) {
            items.swap(k, i);
            return true;
        }
        items.swap(k, i);
    }
    false
}

/// Stand-in for ω among the sample representatives.
pub const OMEGA: u32 = u32::MAX;

/// The counts 0..=10 and ω.
pub fn representatives() -> Vec<u32> {
    (0..=10).chain([OMEGA]).collect()
}

pub fn members(m: Multiplicity) -> BTreeSet<u32> {
    representatives()
        .into_iter()
        .filter(|k| match m.hi() {
            Upper::Omega => *k >= m.lo(),
            Upper::Finite(h) => *k != OMEGA && *k >= m.lo() && *k <= h,
        })
        .collect()
}

/// Smallest bounded value whose sample set contains every value in `ks`,
/// where values past the sample range count as large finite numbers.
pub fn smallest_cover(ks: &BTreeSet<u32>) -> Multiplicity {
    let covers = |m: Multiplicity| {
        ks.iter().all(|k| match m.hi() {
            Upper::Omega => *k >= m.lo(),
            Upper::Finite(h) => *k != OMEGA && *k >= m.lo() && *k <= h,
        })
    };
    let candidates: Vec<Multiplicity> = Multiplicity::BOUNDED.into_iter().filter(|m| covers(*m)).collect();
    *candidates
        .iter()
        .find(|m| candidates.iter().all(|o| m.is_subsumed_by(*o)))
        .expect("the bounded values form a lattice under inclusion")
}

pub fn plus(a: u32, b: u32) -> u32 {
    if a == OMEGA || b == OMEGA {
        OMEGA
    } else {
        a + b
    }
}

/// The shape with every node multiplicity replaced by a random bounded value
/// that subsumes it.
pub fn widened(rng: &mut impl Rng, s: &Shape) -> Shape {
    let mut out = s.clone();
    for v in s.nodes() {
        let above: Vec<Multiplicity> =
            Multiplicity::BOUNDED.into_iter().filter(|m| !m.is_zero() && s.node_mult(v).is_subsumed_by(*m)).collect();
        out = out.with_node_mult(v, *above.choose(rng).unwrap()).unwrap();
    }
    out
}
