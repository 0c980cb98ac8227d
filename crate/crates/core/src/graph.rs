//! Simple directed labelled graphs.
//!
//! Labels are split into unary and binary ones. A unary label is carried by a
//! self-loop, which is the only way a node gets labelled: `lab(v)` is the set
//! of unary self-loop labels at `v`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

pub type NodeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arity {
    Unary,
    Binary,
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arity::Unary => "unary",
            Arity::Binary => "binary",
        })
    }
}

/// Interned label handle. Names live in an [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    arity: Arity,
    index: u16,
}

impl Label {
    /// Smallest label in the derived order, useful as a range start.
    pub const MIN: Label = Label { arity: Arity::Unary, index: 0 };

    pub fn arity(self) -> Arity {
        self.arity
    }

    pub fn is_unary(self) -> bool {
        self.arity == Arity::Unary
    }

    pub fn index(self) -> usize {
        self.index as usize
    }
}

/// Maximum number of unary labels in one alphabet (label sets are bitsets).
pub const MAX_UNARY_LABELS: usize = 64;

/// The label partition `Lab = Lab^U ⊎ Lab^B` of one grammar.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    unary: Vec<String>,
    binary: Vec<String>,
}

impl Alphabet {
    pub fn new() -> Alphabet {
        Alphabet::default()
    }

    /// Declares a label, or returns the existing one if the arity agrees.
    pub fn declare(&mut self, name: &str, arity: Arity) -> Result<Label> {
        if name.is_empty() {
            return Err(Error::InvalidEdge("empty label name".into()));
        }
        if let Some(existing) = self.lookup(name) {
            if existing.arity != arity {
                return Err(Error::InvalidEdge(format!(
                    "label `{name}` declared {} and {arity}",
                    existing.arity
                )));
            }
            return Ok(existing);
        }
        let names = match arity {
            Arity::Unary => &mut self.unary,
            Arity::Binary => &mut self.binary,
        };
        if arity == Arity::Unary && names.len() >= MAX_UNARY_LABELS {
            return Err(Error::Unsupported(format!(
                "more than {MAX_UNARY_LABELS} unary labels"
            )));
        }
        names.push(name.to_string());
        Ok(Label { arity, index: (names.len() - 1) as u16 })
    }

    pub fn lookup(&self, name: &str) -> Option<Label> {
        if let Some(i) = self.unary.iter().position(|n| n == name) {
            return Some(Label { arity: Arity::Unary, index: i as u16 });
        }
        self.binary
            .iter()
            .position(|n| n == name)
            .map(|i| Label { arity: Arity::Binary, index: i as u16 })
    }

    pub fn name(&self, label: Label) -> &str {
        match label.arity {
            Arity::Unary => &self.unary[label.index()],
            Arity::Binary => &self.binary[label.index()],
        }
    }

    /// All labels in declaration order, unary first.
    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        let unary = (0..self.unary.len()).map(|i| Label { arity: Arity::Unary, index: i as u16 });
        let binary =
            (0..self.binary.len()).map(|i| Label { arity: Arity::Binary, index: i as u16 });
        unary.chain(binary)
    }

    pub fn label_set_names(&self, set: LabelSet) -> Vec<&str> {
        set.iter().map(|l| self.name(l)).collect()
    }
}

/// A set of unary labels, stored as a bitset over label indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelSet(u64);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn insert(&mut self, label: Label) {
        debug_assert!(label.is_unary());
        self.0 |= 1 << label.index();
    }

    pub fn remove(&mut self, label: Label) {
        self.0 &= !(1 << label.index());
    }

    pub fn contains(self, label: Label) -> bool {
        label.is_unary() && self.0 & (1 << label.index()) != 0
    }

    pub fn is_superset(self, other: LabelSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn iter(self) -> impl Iterator<Item = Label> {
        (0..MAX_UNARY_LABELS as u16)
            .filter(move |i| self.0 & (1 << i) != 0)
            .map(|index| Label { arity: Arity::Unary, index })
    }
}

impl FromIterator<Label> for LabelSet {
    fn from_iter<I: IntoIterator<Item = Label>>(iter: I) -> LabelSet {
        let mut set = LabelSet::EMPTY;
        for l in iter {
            set.insert(l);
        }
        set
    }
}

/// Edge direction relative to a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Out,
    In,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Out => Dir::In,
            Dir::In => Dir::Out,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: NodeId,
    pub label: Label,
    pub target: NodeId,
}

impl Edge {
    pub fn new(source: NodeId, label: Label, target: NodeId) -> Edge {
        Edge { source, label, target }
    }

    /// The endpoint on the far side of `dir` as seen from the edge's near end.
    pub fn far(&self, dir: Dir) -> NodeId {
        match dir {
            Dir::Out => self.target,
            Dir::In => self.source,
        }
    }

    pub fn is_loop(&self) -> bool {
        self.source == self.target
    }
}

/// A finite simple directed graph over interned labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Graph {
    nodes: BTreeSet<NodeId>,
    edges: BTreeSet<Edge>,
}

impl Graph {
    pub fn new() -> Graph {
        Graph::default()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + Clone + '_ {
        self.nodes.iter().copied()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &Edge> + Clone + '_ {
        self.edges.iter()
    }

    /// Edges with binary labels (`E^B`).
    pub fn binary_edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(|e| !e.label.is_unary())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        self.nodes.contains(&v)
    }

    pub fn has_edge(&self, source: NodeId, label: Label, target: NodeId) -> bool {
        self.edges.contains(&Edge::new(source, label, target))
    }

    pub fn add_node(&mut self, v: NodeId) -> bool {
        self.nodes.insert(v)
    }

    /// Adds a node with an id one larger than any present.
    pub fn fresh_node(&mut self) -> NodeId {
        let id = self.next_node_id();
        self.nodes.insert(id);
        id
    }

    pub fn next_node_id(&self) -> NodeId {
        self.nodes.last().map_or(0, |v| v + 1)
    }

    /// Adds an edge; returns `false` if it was already present.
    pub fn add_edge(&mut self, source: NodeId, label: Label, target: NodeId) -> Result<bool> {
        for v in [source, target] {
            if !self.nodes.contains(&v) {
                return Err(Error::UnknownNode(v));
            }
        }
        if label.is_unary() && source != target {
            return Err(Error::InvalidEdge(format!(
                "unary label between distinct nodes {source} and {target}"
            )));
        }
        Ok(self.edges.insert(Edge::new(source, label, target)))
    }

    pub fn remove_edge(&mut self, edge: &Edge) -> bool {
        self.edges.remove(edge)
    }

    /// Removes a node together with all incident edges.
    pub fn remove_node(&mut self, v: NodeId) -> bool {
        if !self.nodes.remove(&v) {
            return false;
        }
        self.edges.retain(|e| e.source != v && e.target != v);
        true
    }

    /// `lab(v)`: the unary labels on self-loops at `v`.
    pub fn node_labels(&self, v: NodeId) -> Result<LabelSet> {
        if !self.contains_node(v) {
            return Err(Error::UnknownNode(v));
        }
        Ok(self.labels_unchecked(v))
    }

    pub(crate) fn labels_unchecked(&self, v: NodeId) -> LabelSet {
        self.edges_from(v).filter(|e| e.label.is_unary()).map(|e| e.label).collect()
    }

    /// All edges with source `v`, in edge order.
    pub fn edges_from(&self, v: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        let lo = Edge::new(v, Label::MIN, 0);
        self.edges.range(lo..).take_while(move |e| e.source == v)
    }

    /// All edges with target `v`.
    pub fn edges_to(&self, v: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.target == v)
    }

    /// Binary edges incident to `v` in direction `dir` (self-loops count in both).
    pub fn incident(&self, v: NodeId, dir: Dir) -> Vec<Edge> {
        match dir {
            Dir::Out => self.edges_from(v).filter(|e| !e.label.is_unary()).copied().collect(),
            Dir::In => self.edges_to(v).filter(|e| !e.label.is_unary()).copied().collect(),
        }
    }

    /// `out(v, l, C)`: outgoing `l`-edges from `v` into nodes of `c`.
    pub fn out_edges(&self, v: NodeId, l: Label, c: &BTreeSet<NodeId>) -> Result<Vec<Edge>> {
        self.check_binary_query(v, l, c)?;
        Ok(self.edges_from(v).filter(|e| e.label == l && c.contains(&e.target)).copied().collect())
    }

    /// `in(v, l, C)`: incoming `l`-edges into `v` from nodes of `c`.
    pub fn in_edges(&self, v: NodeId, l: Label, c: &BTreeSet<NodeId>) -> Result<Vec<Edge>> {
        self.check_binary_query(v, l, c)?;
        Ok(self.edges_to(v).filter(|e| e.label == l && c.contains(&e.source)).copied().collect())
    }

    fn check_binary_query(&self, v: NodeId, l: Label, c: &BTreeSet<NodeId>) -> Result<()> {
        if !self.contains_node(v) {
            return Err(Error::UnknownNode(v));
        }
        if let Some(w) = c.iter().find(|w| !self.contains_node(**w)) {
            return Err(Error::UnknownNode(*w));
        }
        if l.is_unary() {
            return Err(Error::InvalidEdge("neighbourhood query with a unary label".into()));
        }
        Ok(())
    }

    /// Image of the graph under an injective renaming of node ids.
    pub fn rename(&self, map: &BTreeMap<NodeId, NodeId>) -> Graph {
        let nodes = self.nodes.iter().map(|v| map[v]).collect();
        let edges = self.edges.iter().map(|e| Edge::new(map[&e.source], e.label, map[&e.target])).collect();
        Graph { nodes, edges }
    }
}

/// A total map on the nodes of a source graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Morphism {
    node_map: BTreeMap<NodeId, NodeId>,
}

impl Morphism {
    pub fn new(node_map: BTreeMap<NodeId, NodeId>) -> Morphism {
        Morphism { node_map }
    }

    pub fn identity(g: &Graph) -> Morphism {
        Morphism { node_map: g.nodes().map(|v| (v, v)).collect() }
    }

    pub fn get(&self, v: NodeId) -> Option<NodeId> {
        self.node_map.get(&v).copied()
    }

    pub fn apply(&self, v: NodeId) -> NodeId {
        self.node_map[&v]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.node_map.iter().map(|(a, b)| (*a, *b))
    }

    pub fn as_map(&self) -> &BTreeMap<NodeId, NodeId> {
        &self.node_map
    }

    pub fn len(&self) -> usize {
        self.node_map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_map.is_empty()
    }

    pub fn is_injective(&self) -> bool {
        let image: BTreeSet<_> = self.node_map.values().collect();
        image.len() == self.node_map.len()
    }

    /// Inverse map; `None` unless injective.
    pub fn inverse(&self) -> Option<Morphism> {
        if !self.is_injective() {
            return None;
        }
        Some(Morphism { node_map: self.node_map.iter().map(|(a, b)| (*b, *a)).collect() })
    }

    /// Checks totality on `source` and preservation of every edge into `target`.
    pub fn is_morphism(&self, source: &Graph, target: &Graph) -> bool {
        source.nodes().all(|v| self.get(v).is_some_and(|w| target.contains_node(w)))
            && source
                .edges()
                .all(|e| target.has_edge(self.apply(e.source), e.label, self.apply(e.target)))
    }
}
