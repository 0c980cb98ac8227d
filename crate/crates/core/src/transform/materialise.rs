//! Materialisation: pulling concrete nodes out of collectors so that a
//! prematch becomes an injective match on a concrete subgraph.
//!
//! Every split keeps label sets, so block-level edge counts are never
//! disturbed: a part inherits the per-member counts of the node it came from.
//! Branching happens in two places: how the shape edges of a split node are
//! distributed among its parts, and how collector neighbours of deleted or
//! relabelled nodes break up by adjacency and exact edge count. Edge choices
//! that overrun a count are cut during the search; the survivors are pruned
//! by [`refine`], which only enforces necessary conditions, so the result
//! over-approximates.

use std::collections::BTreeMap;

use super::prematch::edges_feasible;
use super::rule::{Role, Rule};
use crate::error::{Error, Result};
use crate::graph::{Dir, Edge, Label, LabelSet, Morphism, NodeId};
use crate::multiplicity::{Multiplicity, Upper};
use crate::shape::{EdgeKey, Shape, Signature};

/// A partially materialised shape with an injective match into its
/// concrete nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Materialisation {
    pub shape: Shape,
    pub matching: Morphism,
}

struct Part {
    mult: Multiplicity,
    overrides: Signature,
}

type Branch = (Shape, BTreeMap<NodeId, NodeId>);

pub fn materialise(rule: &Rule, m: &Morphism, s: &Shape) -> Result<Vec<Materialisation>> {
    let lhs = rule.lhs();
    if !m.is_morphism(&lhs, s.graph()) || m.len() != lhs.node_count() {
        return Err(Error::Precondition(format!("not a prematch of rule `{}`", rule.name())));
    }
    let mut preimages: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for (x, u) in m.pairs() {
        preimages.entry(u).or_default().push(x);
    }
    for (u, xs) in &preimages {
        if !s.node_mult(*u).hi().admits(xs.len() as u32) {
            return Err(Error::Precondition(format!("node {u} cannot host {} matched nodes", xs.len())));
        }
    }
    if !edges_feasible(&lhs, s, m.as_map()) {
        return Err(Error::Precondition("prematch exceeds an edge multiplicity".into()));
    }

    let mut branches: Vec<Branch> = vec![(s.clone(), m.as_map().clone())];
    for (u, xs) in &preimages {
        if s.is_concrete(*u) {
            continue;
        }
        let mut rest = s.node_mult(*u);
        for _ in xs {
            rest = rest.minus_one_exact()?;
        }
        // A remainder that may be empty stays as a possibly-empty collector.
        let remainders = if rest.is_zero() { vec![None] } else { vec![Some(rest.bounded())] };
        let mut next = Vec::new();
        for (shape, assignment) in &branches {
            for remainder in &remainders {
                let mut parts: Vec<Part> =
                    xs.iter().map(|_| Part { mult: Multiplicity::ONE, overrides: Signature::new() }).collect();
                if let Some(mult) = remainder {
                    parts.push(Part { mult: *mult, overrides: Signature::new() });
                }
                for (split, ids) in split_node(shape, *u, &parts, &|_, _, _| None) {
                    let mut assignment = assignment.clone();
                    for (x, id) in xs.iter().zip(&ids) {
                        assignment.insert(*x, *id);
                    }
                    next.push((split, assignment));
                }
            }
        }
        branches = next;
    }
    branches.retain(|(shape, a)| lhs.edges().all(|e| shape.graph().has_edge(a[&e.source], e.label, a[&e.target])));

    let touched: Vec<(NodeId, bool)> = rule
        .nodes_with(Role::Eraser)
        .map(|v| (v, true))
        .chain(rule.relabelled().map(|v| (v, false)))
        .collect();
    if !touched.is_empty() {
        let mut next = Vec::new();
        for (shape, assignment) in branches {
            let changes: BTreeMap<NodeId, (LabelSet, Option<LabelSet>)> = touched
                .iter()
                .map(|(v, erased)| {
                    let x = assignment[v];
                    let pre = shape.labels(x);
                    let post = (!erased).then(|| relabel(pre, rule, *v));
                    (x, (pre, post))
                })
                .collect();
            let neighbours: Vec<NodeId> = shape
                .nodes()
                .filter(|w| shape.is_collector(*w) && !links(&shape, *w, &changes).is_empty())
                .collect();
            let mut shapes = vec![shape];
            for w in neighbours {
                shapes = shapes.iter().flat_map(|sh| split_neighbour(sh, w, &changes)).collect();
            }
            next.extend(shapes.into_iter().map(|sh| (sh, assignment.clone())));
        }
        branches = next;
    }

    let mut out: Vec<Materialisation> = Vec::new();
    for (shape, assignment) in branches {
        let mat = Materialisation { shape, matching: Morphism::new(assignment) };
        if !out.contains(&mat) {
            out.push(mat);
        }
    }
    Ok(out)
}

pub(crate) fn relabel(pre: LabelSet, rule: &Rule, v: NodeId) -> LabelSet {
    let mut post = pre;
    for l in rule.removed_labels(v).iter() {
        post.remove(l);
    }
    for l in rule.added_labels(v).iter() {
        post.insert(l);
    }
    post
}

/// Edges between `w` and changed nodes, as `(changed node, label, dir from w)`.
fn links(
    s: &Shape,
    w: NodeId,
    changes: &BTreeMap<NodeId, (LabelSet, Option<LabelSet>)>,
) -> Vec<(NodeId, Label, Dir)> {
    let g = s.graph();
    let out = g
        .edges_from(w)
        .filter(|e| !e.label.is_unary() && changes.contains_key(&e.target))
        .map(|e| (e.target, e.label, Dir::Out));
    let inc = g
        .edges_to(w)
        .filter(|e| !e.label.is_unary() && changes.contains_key(&e.source))
        .map(|e| (e.source, e.label, Dir::In));
    let mut all: Vec<_> = out.chain(inc).collect();
    all.sort();
    all.dedup();
    all
}

/// Splits collector `w` into groups of members that agree on their adjacency
/// to changed nodes and on the exact value of every count the change shifts.
fn split_neighbour(s: &Shape, w: NodeId, changes: &BTreeMap<NodeId, (LabelSet, Option<LabelSet>)>) -> Vec<Shape> {
    let links = links(s, w, changes);
    assert!(links.len() < 16, "too many links to changed nodes");
    let signature = s.signature(w);
    let mut groups: Vec<(u32, Signature)> = Vec::new();
    for mask in 0u32..(1 << links.len()) {
        let mut decrements: BTreeMap<(Label, Dir, LabelSet), u32> = BTreeMap::new();
        for (i, (x, label, dir)) in links.iter().enumerate() {
            if mask & (1 << i) != 0 {
                let (pre, post) = changes[x];
                *decrements.entry((*label, *dir, pre)).or_default() += 1;
                if let Some(post) = post {
                    decrements.entry((*label, *dir, post)).or_default();
                }
            }
        }
        let mut options = vec![Signature::new()];
        for (key, dec) in decrements {
            let count = signature.get(&key).copied().unwrap_or(Multiplicity::ZERO);
            let pieces = pieces(count, dec);
            options = options
                .iter()
                .flat_map(|o| {
                    pieces.iter().map(move |p| {
                        let mut o = o.clone();
                        o.insert(key, *p);
                        o
                    })
                })
                .collect();
        }
        groups.extend(options.into_iter().map(|o| (mask, o)));
    }
    assert!(groups.len() < 16, "too many neighbour groups");

    let mut out = Vec::new();
    for chosen in non_empty_subsets(groups.len()) {
        if !s.node_mult(w).hi().admits(chosen.len() as u32) {
            continue;
        }
        let base = if chosen.len() == 1 { s.node_mult(w) } else { Multiplicity::ONE_PLUS };
        let Some(parts) = chosen
            .iter()
            .map(|i| {
                let mult = base.meet(group_bound(s, w, &links, groups[*i].0))?;
                Some(Part { mult, overrides: groups[*i].1.clone() })
            })
            .collect::<Option<Vec<Part>>>()
        else {
            continue;
        };
        let masks: Vec<u32> = chosen.iter().map(|i| groups[*i].0).collect();
        let forced = |e: &Edge, src: Option<usize>, tgt: Option<usize>| -> Option<bool> {
            let (part, link) = match (src, tgt) {
                (Some(p), None) => (p, (e.target, e.label, Dir::Out)),
                (None, Some(p)) => (p, (e.source, e.label, Dir::In)),
                _ => return None,
            };
            let i = links.iter().position(|l| *l == link)?;
            Some(masks[part] & (1 << i) != 0)
        };
        out.extend(split_node(s, w, &parts, &forced).into_iter().map(|(sh, _)| sh));
    }
    out
}

/// How many members of `w` can share the adjacency `mask`: each linked
/// changed node is concrete and takes at most its count of such edges.
fn group_bound(s: &Shape, w: NodeId, links: &[(NodeId, Label, Dir)], mask: u32) -> Multiplicity {
    let mut hi = Upper::Omega;
    for (i, (x, label, dir)) in links.iter().enumerate() {
        if mask & (1 << i) != 0 {
            hi = hi.min(s.edge_mult(EdgeKey::new(*x, *label, dir.flip(), s.labels(w))).hi());
        }
    }
    let lo = u32::from(mask != 0);
    Multiplicity::new(lo, hi).unwrap_or(Multiplicity::ZERO)
}

/// Exact pieces of `count` such that removing `dec` edges and adding a few
/// more always lands on a precise bounded value.
fn pieces(count: Multiplicity, dec: u32) -> Vec<Multiplicity> {
    let top = 1 + dec;
    let lo = count.lo().max(dec);
    let mut out: Vec<Multiplicity> = (lo..=top).filter(|j| count.contains(*j)).map(Multiplicity::exactly).collect();
    if count.hi() > Upper::Finite(top) {
        out.push(Multiplicity::new(lo.max(top + 1), count.hi()).expect("non-empty tail"));
    }
    out
}

fn non_empty_subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << n)).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
}

type Forced<'a> = dyn Fn(&Edge, Option<usize>, Option<usize>) -> Option<bool> + 'a;

/// Replaces `u` by `parts`, distributing each incident shape edge over a
/// non-empty set of part-level edges. `forced(edge, source part, target
/// part)` may pin a candidate edge in or out.
fn split_node(
    s: &Shape,
    u: NodeId,
    parts: &[Part],
    forced: &Forced<'_>,
) -> Vec<(Shape, Vec<NodeId>)> {
    let labels = s.labels(u);
    let signature = s.signature(u);
    let incident: Vec<Edge> = s
        .graph()
        .binary_edges()
        .filter(|e| e.source == u || e.target == u)
        .copied()
        .collect();

    let mut base = s.clone();
    base.remove_node(u);
    let mut ids = Vec::with_capacity(parts.len());
    for part in parts {
        let id = base.graph_mut().fresh_node();
        for l in labels.iter() {
            base.graph_mut().add_edge(id, l, id).expect("fresh node");
        }
        base.set_node_mult(id, part.mult);
        let mut counts = signature.clone();
        counts.extend(part.overrides.iter().map(|(k, m)| (*k, *m)));
        for ((label, dir, block), m) in counts {
            base.set_edge_mult(EdgeKey::new(id, label, dir, block), m);
        }
        ids.push(id);
    }

    let ends = |v: NodeId| -> Vec<(NodeId, Option<usize>)> {
        if v == u {
            ids.iter().enumerate().map(|(i, id)| (*id, Some(i))).collect()
        } else {
            vec![(v, None)]
        }
    };
    // Each incident shape edge becomes a non-empty set of candidate edges.
    let mut required = Vec::new();
    let mut free: Vec<(usize, Edge)> = Vec::new();
    let mut needs = vec![true; incident.len()];
    for (i, e) in incident.iter().enumerate() {
        let mut any = false;
        for (src, si) in ends(e.source) {
            for (tgt, ti) in ends(e.target) {
                let candidate = Edge::new(src, e.label, tgt);
                match forced(e, si, ti) {
                    Some(true) => {
                        required.push(candidate);
                        needs[i] = false;
                    }
                    Some(false) => {}
                    None => {
                        free.push((i, candidate));
                        any = true;
                    }
                }
            }
        }
        if needs[i] && !any {
            return Vec::new();
        }
    }
    let mut remaining = vec![0usize; incident.len()];
    for (i, _) in &free {
        remaining[*i] += 1;
    }

    let mut search = Search { base: &base, load: Loads::new(&base), chosen: Vec::new(), out: Vec::new() };
    for e in &required {
        if !search.load.add(&base, e) {
            return Vec::new();
        }
    }
    search.chosen.extend(required.iter().copied());
    search.run(&free, 0, &mut needs, &mut remaining);
    search.out.into_iter().map(|shape| (shape, ids.clone())).collect()
}

/// Lower bounds on the edge counts already used up by chosen edges.
struct Loads(BTreeMap<EdgeKey, u32>);

impl Loads {
    fn new(s: &Shape) -> Loads {
        let mut loads = Loads(BTreeMap::new());
        for e in s.graph().binary_edges() {
            loads.add(s, e);
        }
        loads
    }

    fn keys(s: &Shape, e: &Edge) -> [(EdgeKey, u32); 2] {
        [
            (EdgeKey::new(e.source, e.label, Dir::Out, s.labels(e.target)), contribution(s, e.source, e.target).lo()),
            (EdgeKey::new(e.target, e.label, Dir::In, s.labels(e.source)), contribution(s, e.target, e.source).lo()),
        ]
    }

    /// Records `e`; false if some count can no longer be met.
    fn add(&mut self, s: &Shape, e: &Edge) -> bool {
        let mut fits = true;
        for (key, c) in Loads::keys(s, e) {
            let slot = self.0.entry(key).or_insert(0);
            *slot += c;
            fits &= s.edge_mult(key).hi().admits(*slot);
        }
        fits
    }

    fn remove(&mut self, s: &Shape, e: &Edge) {
        for (key, c) in Loads::keys(s, e) {
            *self.0.get_mut(&key).expect("recorded") -= c;
        }
    }
}

/// Backtracking over the free candidate edges of a split.
struct Search<'a> {
    base: &'a Shape,
    load: Loads,
    chosen: Vec<Edge>,
    out: Vec<Shape>,
}

impl Search<'_> {
    fn run(&mut self, free: &[(usize, Edge)], k: usize, needs: &mut [bool], remaining: &mut [usize]) {
        let Some((i, e)) = free.get(k).copied() else {
            let mut shape = self.base.clone();
            for e in &self.chosen {
                shape.graph_mut().add_edge(e.source, e.label, e.target).expect("parts exist");
            }
            if let Some(shape) = refine(&shape) {
                self.out.push(shape);
            }
            return;
        };
        remaining[i] -= 1;
        if self.load.add(self.base, &e) {
            let need = needs[i];
            needs[i] = false;
            self.chosen.push(e);
            self.run(free, k + 1, needs, remaining);
            self.chosen.pop();
            needs[i] = need;
        }
        self.load.remove(self.base, &e);
        if !(needs[i] && remaining[i] == 0) {
            self.run(free, k + 1, needs, remaining);
        }
        remaining[i] += 1;
    }
}

/// What the shape edges of `u` allow for one of its counts.
fn contribution(s: &Shape, u: NodeId, t: NodeId) -> Multiplicity {
    let far_hi = s.node_mult(t).hi();
    match (s.is_concrete(u), s.is_concrete(t)) {
        (true, true) => Multiplicity::ONE,
        (true, false) => Multiplicity::new(s.node_mult(t).lo().min(1), far_hi).expect("lo at most 1"),
        (false, true) => Multiplicity::ZERO_ONE,
        (false, false) => Multiplicity::new(0, far_hi).expect("lo 0"),
    }
}

/// Intersects every edge count with what the shape edges can supply, and
/// node multiplicities and counts with the edge balance between blocks,
/// until nothing changes. Nodes left with no members are removed. Returns
/// `None` when the constraints cannot be met.
pub(crate) fn refine(s: &Shape) -> Option<Shape> {
    let mut out = s.clone();
    for _ in 0..16 {
        let supplied = supply(&out)?;
        let balanced = balance(&supplied)?;
        if balanced == out {
            return Some(out);
        }
        out = balanced;
    }
    Some(out)
}

fn supply(s: &Shape) -> Option<Shape> {
    let mut out = s.clone();
    for u in s.nodes() {
        let mut supply: BTreeMap<(Label, Dir, LabelSet), Multiplicity> = BTreeMap::new();
        for e in s.graph().edges_from(u).filter(|e| !e.label.is_unary()) {
            let slot = supply.entry((e.label, Dir::Out, s.labels(e.target))).or_insert(Multiplicity::ZERO);
            *slot = slot.add_exact(contribution(s, u, e.target));
        }
        for e in s.graph().edges_to(u).filter(|e| !e.label.is_unary()) {
            let slot = supply.entry((e.label, Dir::In, s.labels(e.source))).or_insert(Multiplicity::ZERO);
            *slot = slot.add_exact(contribution(s, u, e.source));
        }
        let mut keys: Vec<(Label, Dir, LabelSet)> = supply.keys().copied().collect();
        keys.extend(s.signature(u).into_keys());
        keys.sort();
        keys.dedup();
        for (label, dir, block) in keys {
            let key = EdgeKey::new(u, label, dir, block);
            let linked = supply.get(&(label, dir, block));
            let met = s.edge_mult(key).meet(linked.copied().unwrap_or(Multiplicity::ZERO))?;
            if linked.is_some() && met.is_zero() {
                return None;
            }
            out.set_edge_mult(key, met);
        }
    }
    Some(out)
}

/// Interval over the naturals with an unbounded top, for balance arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Span {
    lo: u64,
    hi: Option<u64>,
}

impl Span {
    const ZERO: Span = Span { lo: 0, hi: Some(0) };

    fn of(m: Multiplicity) -> Span {
        let hi = match m.hi() {
            Upper::Finite(h) => Some(u64::from(h)),
            Upper::Omega => None,
        };
        Span { lo: u64::from(m.lo()), hi }
    }

    fn to_multiplicity(self) -> Option<Multiplicity> {
        let clamp = |v: u64| u32::try_from(v).unwrap_or(u32::MAX);
        let hi = match self.hi {
            Some(h) if h < u64::from(u32::MAX) => Upper::Finite(clamp(h)),
            _ => Upper::Omega,
        };
        Multiplicity::new(clamp(self.lo), hi)
    }

    fn add(self, o: Span) -> Span {
        Span { lo: self.lo.saturating_add(o.lo), hi: self.hi.zip(o.hi).map(|(a, b)| a.saturating_add(b)) }
    }

    fn mul(self, o: Span) -> Span {
        let hi = match (self.hi, o.hi) {
            (Some(0), _) | (_, Some(0)) => Some(0),
            (Some(a), Some(b)) => Some(a.saturating_mul(b)),
            _ => None,
        };
        Span { lo: self.lo.saturating_mul(o.lo), hi }
    }

    fn meet(self, o: Span) -> Option<Span> {
        let lo = self.lo.max(o.lo);
        let hi = match (self.hi, o.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        (hi.is_none_or(|h| lo <= h)).then_some(Span { lo, hi })
    }

    /// The values `x` can take when `x + rest` lies in `self`.
    fn without(self, rest: Span) -> Span {
        let lo = rest.hi.map_or(0, |h| self.lo.saturating_sub(h));
        Span { lo, hi: self.hi.map(|h| h.saturating_sub(rest.lo)) }
    }
}

/// A node's share of a block-to-block edge total: its member count times the
/// per-member edge count.
struct Term {
    node: NodeId,
    key: EdgeKey,
}

/// Counts `l`-edges from label set `A` into label set `B` once from each
/// end: the sum over `A`-nodes of members times out-count equals the sum
/// over `B`-nodes of members times in-count.
fn balance(s: &Shape) -> Option<Shape> {
    let mut sides: BTreeMap<(Label, LabelSet, LabelSet), [Vec<Term>; 2]> = BTreeMap::new();
    for (key, _) in s.edge_mults() {
        let here = s.labels(key.node);
        let (group, side) = match key.dir {
            Dir::Out => ((key.label, here, key.block), 0),
            Dir::In => ((key.label, key.block, here), 1),
        };
        sides.entry(group).or_default()[side].push(Term { node: key.node, key });
    }
    let mut out = s.clone();
    let mut emptied = Vec::new();
    for [from, to] in sides.values() {
        let span = |sh: &Shape, t: &Term| Span::of(sh.node_mult(t.node)).mul(Span::of(sh.edge_mult(t.key)));
        let total = |terms: &[Term], sh: &Shape| terms.iter().map(|t| span(sh, t)).fold(Span::ZERO, Span::add);
        let agreed = total(from, &out).meet(total(to, &out))?;
        for terms in [from, to] {
            for (i, t) in terms.iter().enumerate() {
                let rest = terms
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, o)| span(&out, o))
                    .fold(Span::ZERO, Span::add);
                let share = agreed.without(rest);
                let (mult, count) = narrow(Span::of(out.node_mult(t.node)), Span::of(out.edge_mult(t.key)), share)?;
                let mult = mult.to_multiplicity()?;
                if mult.is_zero() {
                    emptied.push(t.node);
                } else {
                    out.set_node_mult(t.node, mult);
                }
                let count = count.to_multiplicity()?;
                if count.is_zero() {
                    return None;
                }
                out.set_edge_mult(t.key, count);
            }
        }
    }
    for v in emptied {
        out.remove_node(v);
    }
    Some(out)
}

/// Narrows members `m` and per-member count `c` so that `m * c` can land in
/// `share`.
fn narrow(m: Span, c: Span, share: Span) -> Option<(Span, Span)> {
    let min_members = match c.hi {
        Some(0) => 0,
        Some(h) => share.lo.div_ceil(h),
        None => u64::from(share.lo > 0),
    };
    let max_members = if c.lo > 0 { share.hi.map(|h| h / c.lo) } else { None };
    let m = m.meet(Span { lo: min_members, hi: max_members })?;
    let c = match m.hi {
        Some(k) if k == m.lo && k > 0 => {
            let others = k - 1;
            let lo = c.hi.map_or(0, |h| share.lo.saturating_sub(others.saturating_mul(h)));
            let hi = share.hi.map(|h| h.saturating_sub(others.saturating_mul(c.lo)));
            c.meet(Span { lo, hi })?
        }
        _ => c,
    };
    Some((m, c))
}
