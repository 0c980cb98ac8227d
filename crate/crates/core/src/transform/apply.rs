use std::collections::{BTreeMap, BTreeSet};

use super::materialise::{refine, relabel, Materialisation};
use super::rule::{Role, Rule};
use crate::error::{Error, Result};
use crate::graph::{Dir, Edge, LabelSet, NodeId};
use crate::multiplicity::Multiplicity;
use crate::shape::{EdgeKey, Shape};

/// Rule application on the concrete part of a materialised shape.
///
/// Edge counts move by exact amounts; materialisation has already split
/// every affected collector so that each shift is uniform across members.
pub fn apply(rule: &Rule, mat: &Materialisation) -> Result<Shape> {
    let mut s = mat.shape.clone();
    let m = &mat.matching;
    let pre: BTreeMap<NodeId, LabelSet> = s.nodes().map(|v| (v, s.labels(v))).collect();

    for e in rule.edges_with(Role::Eraser).filter(|e| !e.label.is_unary()) {
        let (a, b) = (m.apply(e.source), m.apply(e.target));
        if s.graph_mut().remove_edge(&Edge::new(a, e.label, b)) {
            shift(&mut s, EdgeKey::new(a, e.label, Dir::Out, pre[&b]), -1)?;
            shift(&mut s, EdgeKey::new(b, e.label, Dir::In, pre[&a]), -1)?;
        }
    }

    for v in rule.nodes_with(Role::Eraser) {
        let x = m.apply(v);
        let incident: Vec<Edge> = s
            .graph()
            .binary_edges()
            .filter(|e| (e.source == x) != (e.target == x))
            .copied()
            .collect();
        for e in incident {
            if e.source == x {
                shift(&mut s, EdgeKey::new(e.target, e.label, Dir::In, pre[&x]), -1)?;
            } else {
                shift(&mut s, EdgeKey::new(e.source, e.label, Dir::Out, pre[&x]), -1)?;
            }
        }
        s.remove_node(x);
    }

    let mut post = pre.clone();
    let mut changed = BTreeSet::new();
    for v in rule.relabelled() {
        let x = m.apply(v);
        for l in rule.removed_labels(v).iter() {
            s.graph_mut().remove_edge(&Edge::new(x, l, x));
        }
        for l in rule.added_labels(v).iter() {
            s.graph_mut().add_edge(x, l, x)?;
        }
        let labels = relabel(pre[&x], rule, v);
        if labels != pre[&x] {
            post.insert(x, labels);
            changed.insert(x);
        }
    }
    let edges: Vec<Edge> = s.graph().binary_edges().copied().collect();
    for e in edges {
        if changed.contains(&e.target) {
            shift(&mut s, EdgeKey::new(e.source, e.label, Dir::Out, pre[&e.target]), -1)?;
            shift(&mut s, EdgeKey::new(e.source, e.label, Dir::Out, post[&e.target]), 1)?;
        }
        if changed.contains(&e.source) {
            shift(&mut s, EdgeKey::new(e.target, e.label, Dir::In, pre[&e.source]), -1)?;
            shift(&mut s, EdgeKey::new(e.target, e.label, Dir::In, post[&e.source]), 1)?;
        }
    }

    let mut image = m.as_map().clone();
    for v in rule.nodes_with(Role::Creator) {
        let id = s.graph_mut().fresh_node();
        s.set_node_mult(id, Multiplicity::ONE);
        image.insert(v, id);
    }
    for e in rule.edges_with(Role::Creator).filter(|e| e.label.is_unary()) {
        if rule.node_role(e.source) == Some(Role::Creator) {
            s.graph_mut().add_edge(image[&e.source], e.label, image[&e.source])?;
        }
    }
    for e in rule.edges_with(Role::Creator).filter(|e| !e.label.is_unary()) {
        let (a, b) = (image[&e.source], image[&e.target]);
        if s.graph_mut().add_edge(a, e.label, b)? {
            let (la, lb) = (s.labels(a), s.labels(b));
            shift(&mut s, EdgeKey::new(a, e.label, Dir::Out, lb), 1)?;
            shift(&mut s, EdgeKey::new(b, e.label, Dir::In, la), 1)?;
        }
    }
    Ok(s)
}

fn shift(s: &mut Shape, key: EdgeKey, delta: i8) -> Result<()> {
    let m = s.edge_mult(key);
    let shifted = if delta < 0 {
        m.minus_one_exact()
            .map_err(|_| Error::Precondition(format!("edge count underflow at node {}", key.node)))?
    } else {
        m.plus_one_exact()
    };
    s.set_edge_mult(key, shifted);
    Ok(())
}

fn is_precise(m: Multiplicity) -> bool {
    matches!(m.bounded(), Multiplicity::ZERO | Multiplicity::ONE | Multiplicity::TWO_PLUS)
}

/// Prunes an applied shape and splits imprecise counts of concrete nodes that
/// could otherwise merge with a look-alike during normalisation.
///
/// A concrete node whose count is, say, `1+` stands for graphs where that
/// node is in different neighbourhood classes. As long as no other node
/// carries its labels this is harmless; otherwise each precise case is
/// explored separately.
pub fn resolve(s: &Shape) -> Vec<Shape> {
    let Some(s) = refine(s) else {
        return Vec::new();
    };
    let mut choices: Vec<(EdgeKey, Vec<Multiplicity>)> = Vec::new();
    for u in s.nodes().filter(|u| s.is_concrete(*u)) {
        let labels = s.labels(u);
        if !s.nodes().any(|w| w != u && s.labels(w) == labels) {
            continue;
        }
        for ((label, dir, block), m) in s.signature(u) {
            if !is_precise(m) {
                let cases = [Multiplicity::ZERO, Multiplicity::ONE, Multiplicity::at_least(2)]
                    .into_iter()
                    .filter_map(|c| m.meet(c))
                    .collect();
                choices.push((EdgeKey::new(u, label, dir, block), cases));
            }
        }
    }
    let mut shapes = vec![s];
    for (key, cases) in choices {
        shapes = shapes
            .iter()
            .flat_map(|sh| {
                cases.iter().filter_map(move |c| {
                    let mut sh = sh.clone();
                    sh.set_edge_mult(key, *c);
                    refine(&sh)
                })
            })
            .collect();
    }
    shapes
}
