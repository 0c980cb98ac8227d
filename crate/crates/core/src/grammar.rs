//! Line-oriented grammar files.
//!
//! ```text
//! # comment
//! grammar counter
//! label P unary
//! label at binary
//! graph
//!   node a P
//!   edge a -at-> a
//! rule create
//!   new node p P
//! ```
//!
//! Rule lines carry a role prefix: `use` (read), `del` (erase), `new`
//! (create) or `not` (forbid; all `not` lines of a rule form one negative
//! condition). The first line that mentions a rule node fixes its role; a
//! later `node` line for the same id only adds labels with that line's role,
//! which is how relabelling is written:
//!
//! ```text
//!   use node c Cell
//!   del node c Empty
//!   new node c Full
//! ```
//!
//! Here `c` is read, must carry `Empty`, loses it and gains `Full`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Alphabet, Arity, Graph, Label, NodeId};
use crate::transform::{Role, Rule};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    pub name: String,
    pub alphabet: Alphabet,
    pub start: Graph,
    pub rules: Vec<Rule>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Reject negative application conditions.
    pub abstract_only: bool,
}

impl Grammar {
    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name() == name)
    }

    pub fn has_nacs(&self) -> bool {
        self.rules.iter().any(Rule::has_nac)
    }
}

pub fn parse_grammar(text: &str) -> Result<Grammar> {
    parse_grammar_with(text, ParseOptions::default())
}

enum Section {
    Top,
    Graph,
    Rule,
}

struct Parser {
    options: ParseOptions,
    grammar: Grammar,
    section: Section,
    graph_ids: BTreeMap<String, NodeId>,
    rule_ids: BTreeMap<String, NodeId>,
    rule_line: usize,
}

pub fn parse_grammar_with(text: &str, options: ParseOptions) -> Result<Grammar> {
    let mut p = Parser {
        options,
        grammar: Grammar {
            name: String::new(),
            alphabet: Alphabet::new(),
            start: Graph::new(),
            rules: Vec::new(),
        },
        section: Section::Top,
        graph_ids: BTreeMap::new(),
        rule_ids: BTreeMap::new(),
        rule_line: 0,
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        p.line(i + 1, &tokens).map_err(|e| at_line(i + 1, e))?;
    }
    p.finish_rule()?;
    Ok(p.grammar)
}

fn at_line(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { line: 0, message } => Error::Parse { line, message },
        Error::Parse { .. } => e,
        other => Error::Parse { line, message: other.to_string() },
    }
}

fn fail<T>(message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line: 0, message: message.into() })
}

impl Parser {
    fn line(&mut self, line: usize, tokens: &[&str]) -> Result<()> {
        match tokens[0] {
            "grammar" => {
                let [_, name] = tokens else { return fail("expected `grammar <name>`") };
                self.grammar.name = name.to_string();
            }
            "label" => {
                let [_, name, arity] = tokens else { return fail("expected `label <name> unary|binary`") };
                let arity = match *arity {
                    "unary" => Arity::Unary,
                    "binary" => Arity::Binary,
                    other => return fail(format!("unknown arity `{other}`")),
                };
                self.grammar.alphabet.declare(name, arity)?;
            }
            "graph" => {
                if tokens.len() != 1 {
                    return fail("`graph` takes no arguments");
                }
                self.finish_rule()?;
                if !self.grammar.start.is_empty() {
                    return fail("duplicate `graph` block");
                }
                self.section = Section::Graph;
            }
            "rule" => {
                let [_, name] = tokens else { return fail("expected `rule <name>`") };
                self.finish_rule()?;
                if self.grammar.rule(name).is_some() {
                    return fail(format!("duplicate rule `{name}`"));
                }
                self.grammar.rules.push(Rule::new(*name));
                self.rule_ids.clear();
                self.rule_line = line;
                self.section = Section::Rule;
            }
            "node" | "edge" if matches!(self.section, Section::Graph) => self.graph_element(tokens)?,
            "use" | "new" | "del" | "not" if matches!(self.section, Section::Rule) => self.rule_element(tokens)?,
            other => return fail(format!("unexpected `{other}`")),
        }
        Ok(())
    }

    fn finish_rule(&mut self) -> Result<()> {
        if let Section::Rule = self.section {
            let rule = self.grammar.rules.last().expect("open rule");
            let line = self.rule_line;
            if rule.is_empty() {
                return Err(at_line(line, Error::Parse { line: 0, message: format!("rule `{}` has an empty body", rule.name()) }));
            }
            rule.validate().map_err(|e| at_line(line, e))?;
        }
        self.section = Section::Top;
        Ok(())
    }

    fn label(&self, name: &str, arity: Arity) -> Result<Label> {
        match self.grammar.alphabet.lookup(name) {
            None => fail(format!("unknown label `{name}`")),
            Some(l) if l.arity() != arity => fail(format!("label `{name}` is not {arity}")),
            Some(l) => Ok(l),
        }
    }

    fn edge_label(&self, token: &str) -> Result<Label> {
        let Some(name) = token.strip_prefix('-').and_then(|t| t.strip_suffix("->")) else {
            return fail(format!("expected `-<label>->`, found `{token}`"));
        };
        match self.grammar.alphabet.lookup(name) {
            None => fail(format!("unknown label `{name}`")),
            Some(l) => Ok(l),
        }
    }

    fn graph_element(&mut self, tokens: &[&str]) -> Result<()> {
        match tokens {
            ["node", id, labels @ ..] => {
                let next = self.graph_ids.len() as NodeId;
                let v = *self.graph_ids.entry(id.to_string()).or_insert(next);
                self.grammar.start.add_node(v);
                for name in labels {
                    let l = self.label(name, Arity::Unary)?;
                    self.grammar.start.add_edge(v, l, v)?;
                }
            }
            ["edge", src, label, tgt] => {
                let l = self.edge_label(label)?;
                let (Some(s), Some(t)) = (self.graph_ids.get(*src), self.graph_ids.get(*tgt)) else {
                    return fail(format!("edge endpoint not declared: `{src}` or `{tgt}`"));
                };
                if l.is_unary() && s != t {
                    return fail("unary label on an edge between distinct nodes");
                }
                self.grammar.start.add_edge(*s, l, *t)?;
            }
            _ => return fail("malformed graph line"),
        }
        Ok(())
    }

    fn rule_element(&mut self, tokens: &[&str]) -> Result<()> {
        let role = match tokens[0] {
            "use" => Role::Reader,
            "new" => Role::Creator,
            "del" => Role::Eraser,
            _ => Role::Embargo,
        };
        if role == Role::Embargo && self.options.abstract_only {
            return fail("negative application conditions are not supported by the abstract engine");
        }
        match &tokens[1..] {
            ["node", id, labels @ ..] => {
                let labels = labels
                    .iter()
                    .map(|n| self.label(n, Arity::Unary))
                    .collect::<Result<Vec<_>>>()?;
                let next = self.rule_ids.len() as NodeId;
                let rule = self.grammar.rules.last_mut().expect("open rule");
                let v = match self.rule_ids.get(*id) {
                    Some(v) => *v,
                    None => {
                        self.rule_ids.insert(id.to_string(), next);
                        rule.add_node(next, role)?;
                        next
                    }
                };
                for l in labels {
                    rule.add_edge(v, l, v, role)?;
                }
            }
            ["edge", src, label, tgt] => {
                let l = self.edge_label(label)?;
                let (Some(s), Some(t)) = (self.rule_ids.get(*src), self.rule_ids.get(*tgt)) else {
                    return fail(format!("edge endpoint not declared: `{src}` or `{tgt}`"));
                };
                if l.is_unary() && s != t {
                    return fail("unary label on an edge between distinct nodes");
                }
                let rule = self.grammar.rules.last_mut().expect("open rule");
                rule.add_edge(*s, l, *t, role)?;
            }
            _ => return fail("malformed rule line"),
        }
        Ok(())
    }
}

/// Renders a grammar in the file format; parsing the output gives the same grammar.
pub fn render_grammar(g: &Grammar) -> String {
    let a = &g.alphabet;
    let mut out = String::new();
    if !g.name.is_empty() {
        let _ = writeln!(out, "grammar {}", g.name);
    }
    for l in a.labels() {
        let _ = writeln!(out, "label {} {}", a.name(l), l.arity());
    }
    if !g.start.is_empty() {
        out.push_str("graph\n");
        for v in g.start.nodes() {
            let labels = a.label_set_names(g.start.labels_unchecked(v));
            let _ = writeln!(out, "  {}", words(&["node".into(), format!("n{v}")], &labels));
        }
        for e in g.start.binary_edges() {
            let _ = writeln!(out, "  edge n{} -{}-> n{}", e.source, a.name(e.label), e.target);
        }
    }
    for r in &g.rules {
        let _ = writeln!(out, "rule {}", r.name());
        for (v, role) in r.nodes() {
            let labels_with = |want: Role| -> Vec<&str> {
                r.graph()
                    .edges_from(v)
                    .filter(|e| e.label.is_unary() && r.edge_role(e) == Some(want))
                    .map(|e| a.name(e.label))
                    .collect()
            };
            let head = [role.keyword().to_string(), "node".into(), format!("n{v}")];
            let _ = writeln!(out, "  {}", words(&head, &labels_with(role)));
            for other in [Role::Reader, Role::Eraser, Role::Creator, Role::Embargo] {
                let labels = labels_with(other);
                if other != role && !labels.is_empty() {
                    let head = [other.keyword().to_string(), "node".into(), format!("n{v}")];
                    let _ = writeln!(out, "  {}", words(&head, &labels));
                }
            }
        }
        for (e, role) in r.edges().filter(|(e, _)| !e.label.is_unary()) {
            let _ = writeln!(out, "  {role} edge n{} -{}-> n{}", e.source, a.name(e.label), e.target);
        }
    }
    out
}

fn words(head: &[String], rest: &[&str]) -> String {
    head.iter().map(String::as_str).chain(rest.iter().copied()).collect::<Vec<_>>().join(" ")
}

/// The grammars shipped with the crate, as `(name, source)` pairs. All of
/// them have abstract state spaces that explore in well under a minute;
/// `grammars/firewall-6F.gg` is a larger stress case kept outside this list.
pub fn bundled() -> [(&'static str, &'static str); 6] {
    [
        ("counter", include_str!("../grammars/counter.gg")),
        ("linked-list", include_str!("../grammars/linked-list.gg")),
        ("circ-buf-0", include_str!("../grammars/circ-buf-0.gg")),
        ("firewall-2", include_str!("../grammars/firewall-2.gg")),
        ("firewall-3", include_str!("../grammars/firewall-3.gg")),
        ("firewall-4", include_str!("../grammars/firewall-4.gg")),
    ]
}

pub fn bundled_grammar(name: &str) -> Option<Grammar> {
    bundled()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_grammar(text).expect("bundled grammars parse"))
}
