use std::collections::BTreeMap;
use std::ops::ControlFlow;

use super::matching::{for_each_match, Assignment};
use super::rule::Rule;
use crate::graph::{Dir, Graph, Label, LabelSet, Morphism, NodeId};
use crate::shape::{EdgeKey, Shape};

/// Non-injective morphisms of the rule's LHS into the shape graph whose
/// sharing of images is permitted by the multiplicities.
pub fn prematch(rule: &Rule, s: &Shape) -> Vec<Morphism> {
    let lhs = rule.lhs();
    let mut found = Vec::new();
    let mut within_capacity = |a: &Assignment, _x: NodeId, h: NodeId| {
        let sharing = a.values().filter(|k| **k == h).count() as u32;
        s.node_mult(h).hi().admits(sharing)
    };
    let _ = for_each_match(&lhs, s.graph(), &Assignment::new(), &mut within_capacity, &mut |a| {
        if edges_feasible(&lhs, s, a) {
            found.push(Morphism::new(a.clone()));
        }
        ControlFlow::Continue(())
    });
    found
}

/// Each LHS node needs at most as many `l`-edges into a block as the shape allows.
pub(crate) fn edges_feasible(lhs: &Graph, s: &Shape, a: &Assignment) -> bool {
    let mut demand: BTreeMap<(NodeId, Label, Dir, LabelSet), u32> = BTreeMap::new();
    for e in lhs.binary_edges() {
        let (src, tgt) = (a[&e.source], a[&e.target]);
        *demand.entry((e.source, e.label, Dir::Out, s.labels(tgt))).or_default() += 1;
        *demand.entry((e.target, e.label, Dir::In, s.labels(src))).or_default() += 1;
    }
    demand.into_iter().all(|((x, label, dir, block), n)| {
        s.edge_mult(EdgeKey::new(a[&x], label, dir, block)).hi().admits(n)
    })
}
