//! Graph certificates and isomorphism search.
//!
//! Certificates come from iterated colour refinement: every node starts with a
//! colour derived from its unary labels and is repeatedly recoloured from the
//! multiset of `(label, direction, neighbour colour)` triples around it. The
//! certificate combines the sorted final colours, so isomorphic graphs always
//! collide while distinct graphs may (rarely) collide as well.
//!
//! The refined colours also seed the isomorphism search: a node can only be
//! mapped onto a node of the same colour.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};
use std::ops::ControlFlow;

use crate::graph::{Graph, Label, Morphism, NodeId};

/// Isomorphism-invariant hash of a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Certificate(pub u64);

fn hash_of<T: Hash>(value: &T) -> u64 {
    let mut h = DefaultHasher::new();
    value.hash(&mut h);
    h.finish()
}

/// Stable node colours of a graph, indexed densely in node order.
#[derive(Clone, Debug)]
pub struct Colouring {
    nodes: Vec<NodeId>,
    colours: Vec<u64>,
    certificate: Certificate,
}

impl Colouring {
    pub fn of(g: &Graph) -> Colouring {
        Colouring::with_seed(g, |_| 0)
    }

    /// Colour refinement starting from unary labels combined with `seed(v)`.
    pub fn with_seed(g: &Graph, seed: impl Fn(NodeId) -> u64) -> Colouring {
        let nodes: Vec<NodeId> = g.nodes().collect();
        let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut adjacency: Vec<Vec<(Label, bool, usize)>> = vec![Vec::new(); nodes.len()];
        for e in g.binary_edges() {
            let (s, t) = (index[&e.source], index[&e.target]);
            adjacency[s].push((e.label, true, t));
            adjacency[t].push((e.label, false, s));
        }
        let mut colours: Vec<u64> =
            nodes.iter().map(|v| hash_of(&(g.labels_unchecked(*v).bits(), seed(*v)))).collect();
        let mut classes = count_classes(&colours);
        for _ in 0..nodes.len() {
            let next: Vec<u64> = (0..nodes.len())
                .map(|i| {
                    let mut around: Vec<(Label, bool, u64)> =
                        adjacency[i].iter().map(|(l, out, j)| (*l, *out, colours[*j])).collect();
                    around.sort_unstable();
                    hash_of(&(colours[i], around))
                })
                .collect();
            let next_classes = count_classes(&next);
            colours = next;
            if next_classes == classes {
                break;
            }
            classes = next_classes;
        }
        let mut sorted = colours.clone();
        sorted.sort_unstable();
        let certificate = Certificate(hash_of(&(nodes.len(), g.edge_count(), sorted)));
        Colouring { nodes, colours, certificate }
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    pub fn colour(&self, v: NodeId) -> Option<u64> {
        self.nodes.binary_search(&v).ok().map(|i| self.colours[i])
    }
}

fn count_classes(colours: &[u64]) -> usize {
    colours.iter().collect::<BTreeSet<_>>().len()
}

/// Iso-invariant certificate of a graph.
pub fn certificate(g: &Graph) -> Certificate {
    Colouring::of(g).certificate()
}

/// Finds some isomorphism `g → h`, if one exists.
pub fn find_isomorphism(g: &Graph, h: &Graph) -> Option<Morphism> {
    let mut found = None;
    let _ = for_each_isomorphism(g, h, |m| {
        found = Some(m.clone());
        ControlFlow::Break(())
    });
    found
}

/// Enumerates isomorphisms `g → h` until `visit` breaks.
pub fn for_each_isomorphism<F>(g: &Graph, h: &Graph, visit: F) -> ControlFlow<()>
where
    F: FnMut(&Morphism) -> ControlFlow<()>,
{
    let cg = Colouring::of(g);
    let ch = Colouring::of(h);
    for_each_isomorphism_coloured(g, &cg, h, &ch, visit)
}

struct Dense {
    nodes: Vec<NodeId>,
    loops: Vec<Vec<Label>>,
    /// Neighbour index → sorted `(label, outgoing)` pairs, self-loops excluded.
    adjacency: Vec<BTreeMap<usize, Vec<(Label, bool)>>>,
}

impl Dense {
    fn new(g: &Graph) -> Dense {
        let nodes: Vec<NodeId> = g.nodes().collect();
        let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut loops = vec![Vec::new(); nodes.len()];
        let mut adjacency = vec![BTreeMap::new(); nodes.len()];
        for e in g.edges() {
            let (s, t) = (index[&e.source], index[&e.target]);
            if s == t {
                loops[s].push(e.label);
            } else {
                adjacency[s].entry(t).or_insert_with(Vec::new).push((e.label, true));
                adjacency[t].entry(s).or_insert_with(Vec::new).push((e.label, false));
            }
        }
        for m in &mut adjacency {
            for v in m.values_mut() {
                v.sort_unstable();
            }
        }
        Dense { nodes, loops, adjacency }
    }
}

/// Same as [`for_each_isomorphism`] with precomputed colourings.
pub fn for_each_isomorphism_coloured<F>(
    g: &Graph,
    cg: &Colouring,
    h: &Graph,
    ch: &Colouring,
    mut visit: F,
) -> ControlFlow<()>
where
    F: FnMut(&Morphism) -> ControlFlow<()>,
{
    if g.node_count() != h.node_count()
        || g.edge_count() != h.edge_count()
        || cg.certificate != ch.certificate
    {
        return ControlFlow::Continue(());
    }
    let dg = Dense::new(g);
    let dh = Dense::new(h);
    let n = dg.nodes.len();

    let mut candidates: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (j, c) in ch.colours.iter().enumerate() {
        candidates.entry(*c).or_default().push(j);
    }
    let order = search_order(&dg, cg, &candidates);

    let mut search = Search {
        dg: &dg,
        dh: &dh,
        colours: &cg.colours,
        candidates: &candidates,
        order: &order,
        forward: vec![usize::MAX; n],
        backward: vec![usize::MAX; n],
    };
    search.extend(0, &mut visit)
}

fn search_order(dg: &Dense, cg: &Colouring, candidates: &BTreeMap<u64, Vec<usize>>) -> Vec<usize> {
    let n = dg.nodes.len();
    let class_size = |i: usize| candidates.get(&cg.colours[i]).map_or(0, Vec::len);
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n)
            .filter(|i| !placed[*i])
            .min_by_key(|i| {
                let linked = dg.adjacency[*i].keys().filter(|j| placed[**j]).count();
                (std::cmp::Reverse(linked), class_size(*i), *i)
            })
            .expect("unplaced node");
        placed[next] = true;
        order.push(next);
    }
    order
}

struct Search<'a> {
    dg: &'a Dense,
    dh: &'a Dense,
    colours: &'a [u64],
    candidates: &'a BTreeMap<u64, Vec<usize>>,
    order: &'a [usize],
    forward: Vec<usize>,
    backward: Vec<usize>,
}

impl Search<'_> {
    fn extend<F>(&mut self, depth: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&Morphism) -> ControlFlow<()>,
    {
        if depth == self.order.len() {
            let map = (0..self.order.len())
                .map(|i| (self.dg.nodes[i], self.dh.nodes[self.forward[i]]))
                .collect();
            return visit(&Morphism::new(map));
        }
        let i = self.order[depth];
        let Some(pool) = self.candidates.get(&self.colours[i]) else {
            return ControlFlow::Continue(());
        };
        for &j in pool {
            if self.backward[j] != usize::MAX || !self.compatible(i, j) {
                continue;
            }
            self.forward[i] = j;
            self.backward[j] = i;
            let flow = self.extend(depth + 1, visit);
            self.forward[i] = usize::MAX;
            self.backward[j] = usize::MAX;
            flow?;
        }
        ControlFlow::Continue(())
    }

    fn compatible(&self, i: usize, j: usize) -> bool {
        if self.dg.loops[i] != self.dh.loops[j] {
            return false;
        }
        let mut linked = 0;
        for (k, labels) in &self.dg.adjacency[i] {
            let image = self.forward[*k];
            if image == usize::MAX {
                continue;
            }
            linked += 1;
            if self.dh.adjacency[j].get(&image) != Some(labels) {
                return false;
            }
        }
        let linked_h =
            self.dh.adjacency[j].keys().filter(|k| self.backward[**k] != usize::MAX).count();
        linked == linked_h
    }
}
