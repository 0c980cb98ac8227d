//! Backtracking search for structure-preserving node maps.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use crate::graph::{Graph, NodeId};

pub(crate) type Assignment = BTreeMap<NodeId, NodeId>;

/// Enumerates maps of `pattern` into `host` extending `seed`, in lexicographic
/// order of pattern-node assignments. `allow` vets each tentative assignment
/// after the structural checks.
pub(crate) fn for_each_match(
    pattern: &Graph,
    host: &Graph,
    seed: &Assignment,
    allow: &mut dyn FnMut(&Assignment, NodeId, NodeId) -> bool,
    visit: &mut dyn FnMut(&Assignment) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let order = search_order(pattern, seed);
    let mut assignment = seed.clone();
    extend(pattern, host, &order, 0, &mut assignment, allow, visit)
}

fn search_order(pattern: &Graph, seed: &Assignment) -> Vec<NodeId> {
    let mut placed: Vec<NodeId> = seed.keys().copied().collect();
    let mut order = Vec::new();
    let mut rest: Vec<NodeId> = pattern.nodes().filter(|v| !seed.contains_key(v)).collect();
    while !rest.is_empty() {
        let linked = |v: NodeId| {
            pattern
                .binary_edges()
                .filter(|e| {
                    (e.source == v && placed.contains(&e.target)) || (e.target == v && placed.contains(&e.source))
                })
                .count()
        };
        let (i, _) = rest
            .iter()
            .enumerate()
            .max_by_key(|(i, v)| (linked(**v), std::cmp::Reverse(*i)))
            .expect("non-empty");
        let v = rest.remove(i);
        placed.push(v);
        order.push(v);
    }
    order
}

fn extend(
    pattern: &Graph,
    host: &Graph,
    order: &[NodeId],
    depth: usize,
    assignment: &mut Assignment,
    allow: &mut dyn FnMut(&Assignment, NodeId, NodeId) -> bool,
    visit: &mut dyn FnMut(&Assignment) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let Some(&x) = order.get(depth) else {
        return visit(assignment);
    };
    let wanted = pattern.labels_unchecked(x);
    for h in host.nodes() {
        if !host.labels_unchecked(h).is_superset(wanted) {
            continue;
        }
        assignment.insert(x, h);
        let consistent = pattern.edges_from(x).chain(pattern.edges_to(x)).all(|e| {
            match (assignment.get(&e.source), assignment.get(&e.target)) {
                (Some(s), Some(t)) => host.has_edge(*s, e.label, *t),
                _ => true,
            }
        });
        if consistent && allow(assignment, x, h) {
            extend(pattern, host, order, depth + 1, assignment, allow, visit)?;
        }
        assignment.remove(&x);
    }
    ControlFlow::Continue(())
}

/// Whether `h` is not already the image of another pattern node.
pub(crate) fn injective_at(assignment: &Assignment, x: NodeId, h: NodeId) -> bool {
    assignment.iter().all(|(y, k)| *y == x || *k != h)
}
