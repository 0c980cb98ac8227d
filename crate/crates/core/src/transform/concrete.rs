//! Plain graph rewriting, used by the concrete engine and as a test oracle.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use super::matching::{for_each_match, injective_at, Assignment};
use super::rule::{Role, Rule};
use crate::error::{Error, Result};
use crate::graph::{Graph, Morphism};

/// Injective matches of the rule's LHS into `g` that admit no embargo extension.
pub fn concrete_matches(rule: &Rule, g: &Graph) -> Vec<Morphism> {
    let lhs = rule.lhs();
    let nac = rule.has_nac().then(|| rule.nac_graph());
    let mut found = Vec::new();
    let _ = for_each_match(&lhs, g, &Assignment::new(), &mut injective_at, &mut |m| {
        if nac.as_ref().is_none_or(|n| !extends(n, g, m)) {
            found.push(Morphism::new(m.clone()));
        }
        ControlFlow::Continue(())
    });
    found
}

fn extends(nac: &Graph, g: &Graph, m: &Assignment) -> bool {
    let mut hit = false;
    let _ = for_each_match(nac, g, m, &mut injective_at, &mut |_| {
        hit = true;
        ControlFlow::Break(())
    });
    hit
}

/// Applies the rule at `m`, deleting dangling edges of erased nodes.
pub fn concrete_apply(rule: &Rule, m: &Morphism, g: &Graph) -> Result<Graph> {
    let lhs = rule.lhs();
    if !m.is_injective() || !m.is_morphism(&lhs, g) || m.len() != lhs.node_count() {
        return Err(Error::Precondition(format!("not a match of rule `{}`", rule.name())));
    }
    let mut h = g.clone();
    for e in rule.edges_with(Role::Eraser) {
        h.remove_edge(&crate::graph::Edge::new(m.apply(e.source), e.label, m.apply(e.target)));
    }
    for v in rule.nodes_with(Role::Eraser) {
        h.remove_node(m.apply(v));
    }
    let mut image: BTreeMap<_, _> = m.as_map().clone();
    for v in rule.nodes_with(Role::Creator) {
        image.insert(v, h.fresh_node());
    }
    for e in rule.edges_with(Role::Creator) {
        h.add_edge(image[&e.source], e.label, image[&e.target])?;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Alphabet, Arity, Label};

    struct Net {
        p: Label,
        loc: Label,
        at: Label,
        conn: Label,
    }

    fn net() -> (Net, Graph) {
        let mut a = Alphabet::new();
        let l = Net {
            p: a.declare("P", Arity::Unary).unwrap(),
            loc: a.declare("Loc", Arity::Unary).unwrap(),
            at: a.declare("at", Arity::Binary).unwrap(),
            conn: a.declare("conn", Arity::Binary).unwrap(),
        };
        let mut g = Graph::new();
        for v in 0..5 {
            g.add_node(v);
        }
        g.add_edge(0, l.loc, 0).unwrap();
        g.add_edge(1, l.loc, 1).unwrap();
        g.add_edge(0, l.conn, 1).unwrap();
        for p in 2..5 {
            g.add_edge(p, l.p, p).unwrap();
        }
        g.add_edge(2, l.at, 0).unwrap();
        g.add_edge(3, l.at, 0).unwrap();
        g.add_edge(4, l.at, 1).unwrap();
        (l, g)
    }

    fn create_at(l: &Net) -> Rule {
        let mut r = Rule::new("new");
        r.add_node(0, Role::Reader).unwrap();
        r.add_edge(0, l.loc, 0, Role::Reader).unwrap();
        r.add_node(1, Role::Creator).unwrap();
        r.add_edge(1, l.p, 1, Role::Creator).unwrap();
        r.add_edge(1, l.at, 0, Role::Creator).unwrap();
        r
    }

    fn move_packet(l: &Net) -> Rule {
        let mut r = Rule::new("mv");
        for v in 0..3 {
            r.add_node(v, Role::Reader).unwrap();
        }
        r.add_edge(0, l.p, 0, Role::Reader).unwrap();
        r.add_edge(1, l.conn, 2, Role::Reader).unwrap();
        r.add_edge(0, l.at, 1, Role::Eraser).unwrap();
        r.add_edge(0, l.at, 2, Role::Creator).unwrap();
        r
    }

    #[test]
    fn creation_matches_every_location() {
        let (l, g) = net();
        let r = create_at(&l);
        let ms = concrete_matches(&r, &g);
        assert_eq!(ms.len(), 2);
        let h = concrete_apply(&r, &ms[0], &g).unwrap();
        assert_eq!(h.node_count(), 6);
        assert!(h.has_edge(5, l.at, 0));
        assert!(h.has_edge(5, l.p, 5));
    }

    #[test]
    fn transfer_matches_packets_at_the_source() {
        let (l, g) = net();
        let r = move_packet(&l);
        let ms = concrete_matches(&r, &g);
        assert_eq!(ms.len(), 2);
        let h = concrete_apply(&r, &ms[0], &g).unwrap();
        assert!(h.has_edge(2, l.at, 1));
        assert!(!h.has_edge(2, l.at, 0));
    }

    #[test]
    fn embargo_blocks_matches() {
        let (l, g) = net();
        let mut r = create_at(&l);
        // forbid creation where a packet already sits
        r.add_node(9, Role::Embargo).unwrap();
        r.add_edge(9, l.at, 0, Role::Embargo).unwrap();
        assert!(concrete_matches(&r, &g).is_empty());

        let mut r = Rule::new("dup");
        r.add_node(0, Role::Reader).unwrap();
        r.add_node(1, Role::Reader).unwrap();
        r.add_edge(0, l.conn, 1, Role::Reader).unwrap();
        assert_eq!(concrete_matches(&r, &g).len(), 1);
    }

    #[test]
    fn erasing_a_node_drops_its_edges() {
        let (l, g) = net();
        let mut r = Rule::new("kill");
        r.add_node(0, Role::Eraser).unwrap();
        r.add_edge(0, l.p, 0, Role::Eraser).unwrap();
        let ms = concrete_matches(&r, &g);
        assert_eq!(ms.len(), 3);
        let h = concrete_apply(&r, &ms[0], &g).unwrap();
        assert_eq!(h.node_count(), 4);
        assert_eq!(h.edge_count(), g.edge_count() - 2);
    }

    #[test]
    fn readers_only_rule_is_identity() {
        let (l, g) = net();
        let mut r = Rule::new("look");
        r.add_node(0, Role::Reader).unwrap();
        r.add_edge(0, l.loc, 0, Role::Reader).unwrap();
        for m in concrete_matches(&r, &g) {
            assert_eq!(concrete_apply(&r, &m, &g).unwrap(), g);
        }
    }
}
