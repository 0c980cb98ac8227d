use std::collections::BTreeMap;

use crate::graph::{LabelSet, NodeId};
use crate::multiplicity::Multiplicity;
use crate::shape::{signature_key, EdgeKey, Shape, Signature};

fn bounded_signature(s: &Shape, v: NodeId) -> Signature {
    s.signature(v)
        .into_iter()
        .map(|(k, m)| (k, m.bounded()))
        .filter(|(_, m)| !m.is_zero())
        .collect()
}

/// Folds nodes with equal labels and equal bounded signatures.
///
/// Node multiplicities of folded nodes are added; edge counts are per member
/// and therefore taken over unchanged. Nodes are renumbered from zero in order
/// of their smallest original id.
pub fn normalise(s: &Shape) -> Shape {
    let mut groups: BTreeMap<(LabelSet, Vec<_>), Vec<NodeId>> = BTreeMap::new();
    for v in s.nodes().filter(|v| !s.node_mult(*v).is_zero()) {
        let key = (s.labels(v), signature_key(&bounded_signature(s, v)));
        groups.entry(key).or_default().push(v);
    }
    let mut members: Vec<Vec<NodeId>> = groups.into_values().collect();
    members.sort_by_key(|m| m[0]);

    let mut out = Shape::default();
    let mut image: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for (id, group) in members.iter().enumerate() {
        let id = id as NodeId;
        out.graph_mut().add_node(id);
        let mult = group.iter().fold(Multiplicity::ZERO, |acc, v| acc.add(s.node_mult(*v)));
        out.set_node_mult(id, mult);
        for ((label, dir, block), m) in bounded_signature(s, group[0]) {
            out.set_edge_mult(EdgeKey::new(id, label, dir, block), m);
        }
        for v in group {
            image.insert(*v, id);
        }
    }
    for e in s.graph().edges() {
        if let (Some(a), Some(b)) = (image.get(&e.source), image.get(&e.target)) {
            out.graph_mut().add_edge(*a, e.label, *b).expect("endpoints exist");
        }
    }
    out
}
