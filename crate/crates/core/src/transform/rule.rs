//! Single-graph rules whose elements carry roles.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Label, LabelSet, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// Matched and kept.
    Reader,
    /// Matched and deleted.
    Eraser,
    /// Created.
    Creator,
    /// Forbidden extension of the match.
    Embargo,
}

impl Role {
    pub fn in_lhs(self) -> bool {
        matches!(self, Role::Reader | Role::Eraser)
    }

    pub fn in_rhs(self) -> bool {
        matches!(self, Role::Reader | Role::Creator)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Role::Reader => "use",
            Role::Eraser => "del",
            Role::Creator => "new",
            Role::Embargo => "not",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    name: String,
    graph: Graph,
    node_roles: BTreeMap<NodeId, Role>,
    edge_roles: BTreeMap<Edge, Role>,
}

impl Rule {
    pub fn new(name: impl Into<String>) -> Rule {
        Rule {
            name: name.into(),
            graph: Graph::new(),
            node_roles: BTreeMap::new(),
            edge_roles: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Declares a node; redeclaring with a different role is an error.
    pub fn add_node(&mut self, v: NodeId, role: Role) -> Result<()> {
        match self.node_roles.get(&v) {
            Some(existing) if *existing != role => Err(Error::InvalidEdge(format!(
                "node {v} declared with roles {existing} and {role}"
            ))),
            _ => {
                self.graph.add_node(v);
                self.node_roles.insert(v, role);
                Ok(())
            }
        }
    }

    /// Adds an edge; `source == target` with a unary label attaches a label.
    pub fn add_edge(&mut self, source: NodeId, label: Label, target: NodeId, role: Role) -> Result<()> {
        let edge = Edge::new(source, label, target);
        if let Some(existing) = self.edge_roles.get(&edge) {
            if *existing != role {
                return Err(Error::InvalidEdge(format!("edge declared with roles {existing} and {role}")));
            }
        }
        self.graph.add_edge(source, label, target)?;
        self.edge_roles.insert(edge, role);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.node_roles.is_empty()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn node_role(&self, v: NodeId) -> Option<Role> {
        self.node_roles.get(&v).copied()
    }

    pub fn edge_role(&self, e: &Edge) -> Option<Role> {
        self.edge_roles.get(e).copied()
    }

    pub fn nodes_with(&self, role: Role) -> impl Iterator<Item = NodeId> + '_ {
        self.node_roles.iter().filter(move |(_, r)| **r == role).map(|(v, _)| *v)
    }

    pub fn edges_with(&self, role: Role) -> impl Iterator<Item = Edge> + '_ {
        self.edge_roles.iter().filter(move |(_, r)| **r == role).map(|(e, _)| *e)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, Role)> + '_ {
        self.node_roles.iter().map(|(v, r)| (*v, *r))
    }

    pub fn edges(&self) -> impl Iterator<Item = (Edge, Role)> + '_ {
        self.edge_roles.iter().map(|(e, r)| (*e, *r))
    }

    fn project(&self, keep: impl Fn(Role) -> bool) -> Graph {
        let mut g = Graph::new();
        for (v, r) in &self.node_roles {
            if keep(*r) {
                g.add_node(*v);
            }
        }
        for (e, r) in &self.edge_roles {
            if keep(*r) {
                g.add_edge(e.source, e.label, e.target).expect("validated rule");
            }
        }
        g
    }

    /// Readers and erasers.
    pub fn lhs(&self) -> Graph {
        self.project(Role::in_lhs)
    }

    /// Readers and creators.
    pub fn rhs(&self) -> Graph {
        self.project(Role::in_rhs)
    }

    pub fn has_nac(&self) -> bool {
        self.node_roles.values().chain(self.edge_roles.values()).any(|r| *r == Role::Embargo)
    }

    /// The LHS extended with every embargo element.
    pub fn nac_graph(&self) -> Graph {
        self.project(|r| r != Role::Creator)
    }

    /// Labels of an LHS node before application.
    pub fn pre_labels(&self, v: NodeId) -> LabelSet {
        self.unary_at(v, Role::in_lhs)
    }

    /// Labels a reader node gains.
    pub fn added_labels(&self, v: NodeId) -> LabelSet {
        self.unary_at(v, |r| r == Role::Creator)
    }

    /// Labels a reader node loses.
    pub fn removed_labels(&self, v: NodeId) -> LabelSet {
        self.unary_at(v, |r| r == Role::Eraser)
    }

    fn unary_at(&self, v: NodeId, keep: impl Fn(Role) -> bool) -> LabelSet {
        self.graph
            .edges_from(v)
            .filter(|e| e.label.is_unary() && keep(self.edge_roles[e]))
            .map(|e| e.label)
            .collect()
    }

    /// Reader nodes whose label set changes.
    pub fn relabelled(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes_with(Role::Reader)
            .filter(|v| !self.added_labels(*v).is_empty() || !self.removed_labels(*v).is_empty())
    }

    /// Checks that roles of edges agree with roles of their endpoints.
    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Precondition(format!("rule `{}` has no elements", self.name)));
        }
        for (e, role) in &self.edge_roles {
            let ends = [self.node_roles[&e.source], self.node_roles[&e.target]];
            let ok = match role {
                Role::Reader => ends.iter().all(|r| *r == Role::Reader),
                Role::Eraser => ends.iter().all(|r| r.in_lhs()),
                Role::Creator => ends.iter().all(|r| r.in_rhs()),
                Role::Embargo => ends.iter().all(|r| matches!(r, Role::Reader | Role::Embargo)),
            };
            if !ok {
                return Err(Error::Precondition(format!(
                    "rule `{}`: {role} edge {}-{}->{} touches a node with an incompatible role",
                    self.name,
                    e.source,
                    e.label.index(),
                    e.target
                )));
            }
        }
        Ok(())
    }
}
