//! Shapes: graphs folded under neighbourhood equivalence.
//!
//! A shape node stands for a set of concrete nodes (its node multiplicity says
//! how many). Edge multiplicities are kept per represented node: the count of
//! `l`-edges that *each* member of `v` has towards the nodes of a similarity
//! block. The similarity relation is label-set equality (radius-0
//! equivalence), so a block is identified by its label set and edge
//! multiplicities are keyed by `(node, label, direction, label set)`.
//!
//! A missing key means multiplicity zero. In a well-formed shape a key is
//! present exactly when a shape edge links the node to that block.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::graph::{Dir, Graph, Label, LabelSet, Morphism, NodeId};
use crate::iso::{self, Certificate, Colouring};
use crate::multiplicity::{Multiplicity, Upper};

/// Disjoint blocks covering a node set, ordered by smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<BTreeSet<NodeId>>,
}

impl Partition {
    pub fn from_blocks(mut blocks: Vec<BTreeSet<NodeId>>) -> Partition {
        blocks.retain(|b| !b.is_empty());
        blocks.sort_by_key(|b| *b.first().expect("non-empty block"));
        Partition { blocks }
    }

    /// Groups `nodes` by `key`.
    pub fn group_by<K: Ord>(nodes: impl Iterator<Item = NodeId>, key: impl Fn(NodeId) -> K) -> Partition {
        let mut groups: BTreeMap<K, BTreeSet<NodeId>> = BTreeMap::new();
        for v in nodes {
            groups.entry(key(v)).or_default().insert(v);
        }
        Partition::from_blocks(groups.into_values().collect())
    }

    pub fn blocks(&self) -> &[BTreeSet<NodeId>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, v: NodeId) -> Option<&BTreeSet<NodeId>> {
        self.blocks.iter().find(|b| b.contains(&v))
    }

    pub fn same_block(&self, v: NodeId, w: NodeId) -> bool {
        self.block_of(v).is_some_and(|b| b.contains(&w))
    }

    /// Every block of `self` lies inside some block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks.iter().all(|b| {
            let first = *b.first().expect("non-empty block");
            coarser.block_of(first).is_some_and(|c| b.is_subset(c))
        })
    }
}

/// Per-member edge count key: `l`-edges of `node` in direction `dir` towards
/// the similarity block with label set `block`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    pub node: NodeId,
    pub label: Label,
    pub dir: Dir,
    pub block: LabelSet,
}

impl EdgeKey {
    pub fn new(node: NodeId, label: Label, dir: Dir, block: LabelSet) -> EdgeKey {
        EdgeKey { node, label, dir, block }
    }
}

/// Radius-1 neighbourhood signature: bounded counts per `(label, dir, block)`.
pub type Signature = BTreeMap<(Label, Dir, LabelSet), Multiplicity>;

/// Signature of `v` computed from the concrete edges of `g`.
pub fn graph_signature(g: &Graph, v: NodeId) -> Signature {
    let mut counts: BTreeMap<(Label, Dir, LabelSet), usize> = BTreeMap::new();
    for e in g.edges_from(v).filter(|e| !e.label.is_unary()) {
        *counts.entry((e.label, Dir::Out, g.labels_unchecked(e.target))).or_default() += 1;
    }
    for e in g.edges_to(v).filter(|e| !e.label.is_unary()) {
        *counts.entry((e.label, Dir::In, g.labels_unchecked(e.source))).or_default() += 1;
    }
    counts.into_iter().map(|(k, n)| (k, Multiplicity::approx_card(n))).collect()
}

pub type SignatureKey = Vec<((Label, Dir, LabelSet), (u32, Upper))>;

/// Totally ordered form of a signature, for grouping.
pub fn signature_key(sig: &Signature) -> SignatureKey {
    sig.iter().map(|(k, m)| (*k, m.sort_key())).collect()
}

/// The radius-0 and radius-1 neighbourhood equivalences of `g`.
pub fn neighbourhood_partition(g: &Graph) -> (Partition, Partition) {
    let level0 = Partition::group_by(g.nodes(), |v| g.labels_unchecked(v));
    let level1 =
        Partition::group_by(g.nodes(), |v| (g.labels_unchecked(v), signature_key(&graph_signature(g, v))));
    (level0, level1)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Shape {
    graph: Graph,
    node_mult: BTreeMap<NodeId, Multiplicity>,
    edge_mult: BTreeMap<EdgeKey, Multiplicity>,
}

/// Folds every radius-1 class of `g` into one shape node.
pub fn abstract_graph(g: &Graph) -> Shape {
    let (_, level1) = neighbourhood_partition(g);
    let mut class_of: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut shape = Shape::default();
    for (id, block) in level1.blocks().iter().enumerate() {
        let id = id as NodeId;
        let representative = *block.first().expect("non-empty block");
        for v in block {
            class_of.insert(*v, id);
        }
        shape.graph.add_node(id);
        shape.node_mult.insert(id, Multiplicity::approx_card(block.len()));
        for ((label, dir, set), m) in graph_signature(g, representative) {
            shape.edge_mult.insert(EdgeKey::new(id, label, dir, set), m);
        }
    }
    for e in g.edges() {
        shape
            .graph
            .add_edge(class_of[&e.source], e.label, class_of[&e.target])
            .expect("quotient edge endpoints exist");
    }
    shape
}

/// Result of comparing a candidate shape `t` against a stored shape `u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `t ⊑ u`.
    Subsumed,
    /// `u ⊑ t` and not `t ⊑ u`.
    Subsumes,
    Unrelated,
}

impl Shape {
    /// Lifts a graph to a shape where every node is concrete.
    pub fn concrete(g: &Graph) -> Shape {
        let mut shape = Shape { graph: g.clone(), ..Shape::default() };
        for v in g.nodes() {
            shape.node_mult.insert(v, Multiplicity::ONE);
            for ((label, dir, set), m) in graph_signature(g, v) {
                shape.edge_mult.insert(EdgeKey::new(v, label, dir, set), m);
            }
        }
        shape
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + Clone + '_ {
        self.graph.nodes()
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn labels(&self, v: NodeId) -> LabelSet {
        self.graph.labels_unchecked(v)
    }

    pub fn node_mult(&self, v: NodeId) -> Multiplicity {
        self.node_mult.get(&v).copied().unwrap_or(Multiplicity::ZERO)
    }

    pub fn is_concrete(&self, v: NodeId) -> bool {
        self.node_mult(v).is_concrete()
    }

    pub fn is_collector(&self, v: NodeId) -> bool {
        self.graph.contains_node(v) && !self.is_concrete(v)
    }

    pub fn edge_mult(&self, key: EdgeKey) -> Multiplicity {
        self.edge_mult.get(&key).copied().unwrap_or(Multiplicity::ZERO)
    }

    pub fn out_mult(&self, v: NodeId, label: Label, block: LabelSet) -> Multiplicity {
        self.edge_mult(EdgeKey::new(v, label, Dir::Out, block))
    }

    pub fn in_mult(&self, v: NodeId, label: Label, block: LabelSet) -> Multiplicity {
        self.edge_mult(EdgeKey::new(v, label, Dir::In, block))
    }

    pub fn edge_mults(&self) -> impl Iterator<Item = (EdgeKey, Multiplicity)> + '_ {
        self.edge_mult.iter().map(|(k, m)| (*k, *m))
    }

    /// Edge-count entries of one node.
    pub fn signature(&self, v: NodeId) -> Signature {
        let lo = EdgeKey::new(v, Label::MIN, Dir::Out, LabelSet::EMPTY);
        self.edge_mult
            .range(lo..)
            .take_while(|(k, _)| k.node == v)
            .map(|(k, m)| ((k.label, k.dir, k.block), *m))
            .collect()
    }

    /// The similarity relation: nodes grouped by label set.
    pub fn similarity(&self) -> Partition {
        Partition::group_by(self.graph.nodes(), |v| self.labels(v))
    }

    pub fn certificate(&self) -> Certificate {
        iso::certificate(&self.graph)
    }

    pub fn colouring(&self) -> Colouring {
        Colouring::of(&self.graph)
    }

    /// A finer colouring that also tells nodes apart by multiplicity and
    /// counts. Only strictly isomorphic shapes are bound to share its
    /// certificate, so it must not be used to look for subsumption.
    pub fn strict_colouring(&self) -> Colouring {
        Colouring::with_seed(&self.graph, |v| {
            let mut h = DefaultHasher::new();
            self.node_mult(v).hash(&mut h);
            signature_key(&self.signature(v)).hash(&mut h);
            h.finish()
        })
    }

    // Mutation is reserved for the transformation pipeline.

    pub(crate) fn graph_mut(&mut self) -> &mut Graph {
        &mut self.graph
    }

    pub(crate) fn set_node_mult(&mut self, v: NodeId, m: Multiplicity) {
        self.node_mult.insert(v, m);
    }

    pub(crate) fn set_edge_mult(&mut self, key: EdgeKey, m: Multiplicity) {
        if m.is_zero() {
            self.edge_mult.remove(&key);
        } else {
            self.edge_mult.insert(key, m);
        }
    }

    pub(crate) fn remove_node(&mut self, v: NodeId) {
        self.graph.remove_node(v);
        self.node_mult.remove(&v);
        self.edge_mult.retain(|k, _| k.node != v);
    }

    /// A copy with the multiplicity of `v` replaced. Zero is refused, since
    /// a node without members is no node at all.
    pub fn with_node_mult(&self, v: NodeId, m: Multiplicity) -> Result<Shape> {
        if !self.graph.contains_node(v) {
            return Err(Error::UnknownNode(v));
        }
        if m.is_zero() {
            return Err(Error::Precondition(format!("node {v} cannot have multiplicity 0")));
        }
        let mut out = self.clone();
        out.node_mult.insert(v, m);
        Ok(out)
    }

    /// Consistent renaming of node ids.
    pub fn rename(&self, map: &BTreeMap<NodeId, NodeId>) -> Shape {
        Shape {
            graph: self.graph.rename(map),
            node_mult: self.node_mult.iter().map(|(v, m)| (map[v], *m)).collect(),
            edge_mult: self
                .edge_mult
                .iter()
                .map(|(k, m)| (EdgeKey { node: map[&k.node], ..*k }, *m))
                .collect(),
        }
    }

    /// Checks the structural invariants of a normalised shape.
    pub fn check_invariants(&self) -> Result<()> {
        let nodes: BTreeSet<NodeId> = self.graph.nodes().collect();
        let mult_nodes: BTreeSet<NodeId> = self.node_mult.keys().copied().collect();
        if nodes != mult_nodes {
            return Err(Error::Precondition("node multiplicity map is not total".into()));
        }
        if let Some((v, _)) = self.node_mult.iter().find(|(_, m)| m.is_zero()) {
            return Err(Error::Precondition(format!("node {v} has multiplicity 0")));
        }
        let mut linked: BTreeSet<EdgeKey> = BTreeSet::new();
        for e in self.graph.binary_edges() {
            linked.insert(EdgeKey::new(e.source, e.label, Dir::Out, self.labels(e.target)));
            linked.insert(EdgeKey::new(e.target, e.label, Dir::In, self.labels(e.source)));
        }
        let keyed: BTreeSet<EdgeKey> = self.edge_mult.keys().copied().collect();
        if linked != keyed {
            return Err(Error::Precondition(
                "edge multiplicities do not match the shape edges".into(),
            ));
        }
        if let Some((k, _)) = self.edge_mult.iter().find(|(_, m)| m.is_zero()) {
            return Err(Error::Precondition(format!("zero edge multiplicity at {k:?}")));
        }
        Ok(())
    }

    /// `self ⊑ other` via the node bijection `phi`.
    fn below_via(&self, other: &Shape, phi: &Morphism) -> bool {
        let nodes_ok = self
            .node_mult
            .iter()
            .all(|(v, m)| m.is_subsumed_by(other.node_mult(phi.apply(*v))));
        if !nodes_ok {
            return false;
        }
        let mapped = |k: &EdgeKey| EdgeKey { node: phi.apply(k.node), ..*k };
        self.edge_mult.iter().all(|(k, m)| m.is_subsumed_by(other.edge_mult(mapped(k))))
            && other.edge_mult.iter().all(|(k, m)| {
                // keys of `other` without a counterpart here are zero on this side
                let back = self.edge_mult.keys().any(|mine| mapped(mine) == *k);
                back || Multiplicity::ZERO.is_subsumed_by(*m)
            })
    }

    /// A witness isomorphism for `self ⊑ other`, if any.
    pub fn subsumption_witness(&self, other: &Shape) -> Option<Morphism> {
        let mut witness = None;
        let _ = iso::for_each_isomorphism(&self.graph, &other.graph, |phi| {
            if self.below_via(other, phi) {
                witness = Some(phi.clone());
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        witness
    }

    /// `self ⊑ other`.
    pub fn is_subsumed_by(&self, other: &Shape) -> bool {
        self.subsumption_witness(other).is_some()
    }

    /// `self ⊑ other` and `other ⊑ self` through the same isomorphism.
    pub fn strictly_isomorphic(&self, other: &Shape) -> bool {
        let (cs, co) = (self.strict_colouring(), other.strict_colouring());
        self.strictly_isomorphic_coloured(&cs, other, &co)
    }

    pub(crate) fn strictly_isomorphic_coloured(
        &self,
        mine: &Colouring,
        other: &Shape,
        theirs: &Colouring,
    ) -> bool {
        if self.node_mult.len() != other.node_mult.len() || self.edge_mult.len() != other.edge_mult.len() {
            return false;
        }
        let mut found = false;
        let _ = iso::for_each_isomorphism_coloured(&self.graph, mine, &other.graph, theirs, |phi| {
            if self.equal_via(other, phi) {
                found = true;
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        found
    }

    fn equal_via(&self, other: &Shape, phi: &Morphism) -> bool {
        self.node_mult.iter().all(|(v, m)| other.node_mult(phi.apply(*v)) == *m)
            && self
                .edge_mult
                .iter()
                .all(|(k, m)| other.edge_mult.get(&EdgeKey { node: phi.apply(k.node), ..*k }) == Some(m))
    }

    /// Compares candidate `self` against stored `other` with a single
    /// isomorphism enumeration serving both subsumption directions.
    pub fn relate(&self, other: &Shape) -> Relation {
        let (cs, co) = (self.colouring(), other.colouring());
        self.relate_coloured(&cs, other, &co)
    }

    pub(crate) fn relate_coloured(&self, mine: &Colouring, other: &Shape, theirs: &Colouring) -> Relation {
        let mut relation = Relation::Unrelated;
        let _ = iso::for_each_isomorphism_coloured(&self.graph, mine, &other.graph, theirs, |phi| {
            if self.below_via(other, phi) {
                relation = Relation::Subsumed;
                return ControlFlow::Break(());
            }
            if relation == Relation::Unrelated {
                let inverse = phi.inverse().expect("isomorphisms are injective");
                if other.below_via(self, &inverse) {
                    relation = Relation::Subsumes;
                }
            }
            ControlFlow::Continue(())
        });
        relation
    }
}

/// `s ⊑ t`.
pub fn shape_subsumes(t: &Shape, s: &Shape) -> bool {
    s.is_subsumed_by(t)
}

/// Graph-only certificate: mutually subsumable shapes always collide.
pub fn shape_certificate(s: &Shape) -> Certificate {
    s.certificate()
}

/// `true` iff `g` is a concretisation of one of `states`: its abstraction is
/// subsumed by the state once some possibly-empty nodes are taken away.
pub fn covered<'a>(g: &Graph, states: impl IntoIterator<Item = &'a Shape>) -> bool {
    let shape = abstract_graph(g);
    let colouring = shape.colouring();
    states.into_iter().any(|t| t.covers(&shape, &colouring))
}

impl Shape {
    /// The shape with `nodes` and their incident edges removed. Counts of
    /// the remaining nodes are kept as they are.
    pub fn without(&self, nodes: &[NodeId]) -> Shape {
        let mut out = self.clone();
        for v in nodes {
            out.remove_node(*v);
        }
        out
    }

    fn covers(&self, abstraction: &Shape, colouring: &Colouring) -> bool {
        let Some(excess) = self.node_count().checked_sub(abstraction.node_count()) else {
            return false;
        };
        let optional: Vec<NodeId> = self.nodes().filter(|v| self.node_mult(*v).contains(0)).collect();
        if excess > optional.len() {
            return false;
        }
        let mut found = false;
        for_each_combination(optional.len(), excess, &mut |picked| {
            let dropped: Vec<NodeId> = picked.iter().map(|i| optional[*i]).collect();
            let candidate = self.without(&dropped);
            let theirs = candidate.colouring();
            found = theirs.certificate() == colouring.certificate()
                && abstraction.relate_coloured(colouring, &candidate, &theirs) == Relation::Subsumed;
            found
        });
        found
    }
}

/// Calls `visit` on each `k`-subset of `0..n` until it returns `true`.
fn for_each_combination(n: usize, k: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn go(start: usize, n: usize, k: usize, picked: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if picked.len() == k {
            return visit(picked);
        }
        for i in start..n {
            picked.push(i);
            if go(i + 1, n, k, picked, visit) {
                return true;
            }
            picked.pop();
        }
        false
    }
    go(0, n, k, &mut Vec::with_capacity(k), visit)
}
