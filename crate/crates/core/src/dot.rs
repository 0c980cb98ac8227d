//! Graphviz output for shapes and transition systems.

use std::fmt::Write as _;

use crate::explore::TransitionSystem;
use crate::graph::{Alphabet, Dir, LabelSet};
use crate::shape::Shape;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn label_names(alphabet: &Alphabet, set: LabelSet) -> String {
    alphabet.label_set_names(set).join(" ")
}

/// One line per node: id, labels, multiplicity and non-zero edge counts.
pub fn describe_shape(s: &Shape, alphabet: &Alphabet) -> String {
    let mut out = String::new();
    for v in s.nodes() {
        let _ = write!(out, "n{v} [{}] x{}", label_names(alphabet, s.labels(v)), s.node_mult(v));
        for ((label, dir, block), m) in s.signature(v) {
            let arrow = if dir == Dir::Out { "->" } else { "<-" };
            let _ = write!(out, " {}{arrow}{{{}}}:{m}", alphabet.name(label), label_names(alphabet, block));
        }
        out.push('\n');
    }
    for e in s.graph().binary_edges() {
        let _ = writeln!(out, "n{} -{}-> n{}", e.source, alphabet.name(e.label), e.target);
    }
    out
}

/// A shape as a DOT digraph. Node labels show unary labels and the node
/// multiplicity; collectors are drawn with a double border.
pub fn shape_dot(s: &Shape, alphabet: &Alphabet) -> String {
    let mut out = String::from("digraph shape {\n  node [shape=box];\n");
    for v in s.nodes() {
        let mut lines = vec![format!("n{v}: {}", label_names(alphabet, s.labels(v)))];
        if !s.is_concrete(v) {
            lines.push(s.node_mult(v).to_string());
        }
        for ((label, dir, block), m) in s.signature(v) {
            let arrow = if dir == Dir::Out { "out" } else { "in" };
            lines.push(format!("{arrow} {} {{{}}}: {m}", alphabet.name(label), label_names(alphabet, block)));
        }
        let text: Vec<String> = lines.iter().map(|l| escape(l)).collect();
        let peripheries = if s.is_collector(v) { 2 } else { 1 };
        let _ = writeln!(out, "  n{v} [label=\"{}\", peripheries={peripheries}];", text.join("\\n"));
    }
    for e in s.graph().binary_edges() {
        let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", e.source, e.target, escape(alphabet.name(e.label)));
    }
    out.push_str("}\n");
    out
}

/// The transition system as a DOT digraph; subsumed states are dashed and
/// the start state is bold.
pub fn transition_system_dot(ts: &TransitionSystem) -> String {
    let mut out = String::from("digraph transitions {\n  node [shape=circle];\n");
    for (id, _) in ts.states() {
        let mut style = Vec::new();
        if ts.is_subsumed(id) {
            style.push("dashed");
        }
        if id == ts.start() {
            style.push("bold");
        }
        if style.is_empty() {
            let _ = writeln!(out, "  s{id};");
        } else {
            let _ = writeln!(out, "  s{id} [style=\"{}\"];", style.join(","));
        }
    }
    for t in ts.transitions() {
        let _ = writeln!(out, "  s{} -> s{} [label=\"{}\"];", t.source, t.target, escape(&t.rule));
    }
    out.push_str("}\n");
    out
}
