//! State space exploration over shapes (abstract engine) or graphs (concrete
//! engine), with optional shape subsumption.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::graph::NodeId;
use crate::iso::{Certificate, Colouring};
use crate::shape::{abstract_graph, Relation, Shape};
use crate::transform::{apply, concrete_apply, concrete_matches, materialise, normalise, prematch, resolve};

pub type StateId = usize;

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum $name { $($variant),+ }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($name::$variant => $text),+ })
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<$name> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::Unsupported(format!(
                        concat!("unknown ", stringify!($name), " `{}`"), other
                    ))),
                }
            }
        }
    };
}

keyword_enum!(Engine { Abstract => "abstract", Concrete => "concrete" });
keyword_enum!(Strategy { Bfs => "bfs", Dfs => "dfs" });
keyword_enum!(Mode { Full => "full", Reach => "reach" });

#[derive(Clone, Debug)]
pub struct Config {
    pub engine: Engine,
    pub strategy: Strategy,
    pub subsumption: bool,
    pub mode: Mode,
    /// Stop once this many states have been generated.
    pub max_states: Option<usize>,
    /// Concrete engine only: states at this depth are not expanded. The
    /// bound is part of the problem, so hitting it does not make a run
    /// incomplete.
    pub max_depth: Option<usize>,
    pub timeout: Option<Duration>,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            engine: Engine::Abstract,
            strategy: Strategy::Dfs,
            subsumption: true,
            mode: Mode::Full,
            max_states: None,
            max_depth: None,
            timeout: None,
        }
    }
}

/// A rule application `source -rule,match-> target`. The match is kept as
/// sorted pairs of rule node and state node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: StateId,
    pub rule: String,
    pub matching: Vec<(NodeId, NodeId)>,
    pub target: StateId,
}

/// Stored states, bucketed by certificate, and the transitions between them.
///
/// Concrete states are kept as shapes in which every node is concrete, so
/// strict isomorphism coincides with graph isomorphism.
#[derive(Clone, Debug, Default)]
pub struct TransitionSystem {
    states: Vec<Option<Shape>>,
    colourings: Vec<Option<Colouring>>,
    buckets: BTreeMap<Certificate, Vec<StateId>>,
    transitions: BTreeSet<Transition>,
    subsumed: BTreeSet<StateId>,
    start: StateId,
}

impl TransitionSystem {
    pub fn start(&self) -> StateId {
        self.start
    }

    /// Stored state `id`; `None` once evicted in reachability mode.
    pub fn state(&self, id: StateId) -> Option<&Shape> {
        self.states.get(id).and_then(Option::as_ref)
    }

    /// Number of states ever added.
    pub fn generated(&self) -> usize {
        self.states.len()
    }

    /// Stored states with their ids.
    pub fn states(&self) -> impl Iterator<Item = (StateId, &Shape)> + '_ {
        self.states.iter().enumerate().filter_map(|(i, s)| s.as_ref().map(|s| (i, s)))
    }

    /// States never marked as subsumed.
    pub fn relevant_states(&self) -> impl Iterator<Item = (StateId, &Shape)> + '_ {
        self.states().filter(|(i, _)| !self.subsumed.contains(i))
    }

    pub fn is_subsumed(&self, id: StateId) -> bool {
        self.subsumed.contains(&id)
    }

    pub fn transitions(&self) -> impl ExactSizeIterator<Item = &Transition> + '_ {
        self.transitions.iter()
    }

    /// Stores `shape` as a new state without any freshness check. States are
    /// bucketed by graph certificate, which suits both freshness checks.
    pub fn insert(&mut self, shape: Shape) -> StateId {
        let colouring = shape.colouring();
        self.add(shape, colouring)
    }

    fn add(&mut self, shape: Shape, colouring: Colouring) -> StateId {
        let id = self.states.len();
        self.buckets.entry(colouring.certificate()).or_default().push(id);
        self.states.push(Some(shape));
        self.colourings.push(Some(colouring));
        id
    }

    fn evict(&mut self, id: StateId) {
        if let Some(c) = self.colourings[id].take() {
            if let Some(bucket) = self.buckets.get_mut(&c.certificate()) {
                bucket.retain(|u| *u != id);
            }
        }
        self.states[id] = None;
    }

    fn candidates(&self, c: Certificate) -> Vec<StateId> {
        self.buckets.get(&c).cloned().unwrap_or_default()
    }

    fn stored(&self, id: StateId) -> (&Shape, &Colouring) {
        let s = self.states[id].as_ref().expect("bucketed states are stored");
        let c = self.colourings[id].as_ref().expect("bucketed states are stored");
        (s, c)
    }

    /// Checks that transitions connect stored states and that no two stored
    /// states are strictly isomorphic.
    pub fn audit(&self) -> Result<()> {
        for t in &self.transitions {
            if self.state(t.source).is_none() || self.state(t.target).is_none() {
                return Err(Error::Precondition(format!("dangling transition {} -> {}", t.source, t.target)));
            }
        }
        for bucket in self.buckets.values() {
            for (i, a) in bucket.iter().enumerate() {
                for b in &bucket[i + 1..] {
                    let (sa, ca) = self.stored(*a);
                    let (sb, cb) = self.stored(*b);
                    if sa.strictly_isomorphic_coloured(ca, sb, cb) {
                        return Err(Error::Precondition(format!("states {a} and {b} are isomorphic")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Pending states. Removal of arbitrary members is lazy: removed ids stay in
/// the queue and are skipped when popped.
#[derive(Clone, Debug)]
pub struct Frontier {
    policy: Strategy,
    queue: VecDeque<StateId>,
    pending: BTreeSet<StateId>,
}

impl Frontier {
    pub fn new(policy: Strategy) -> Frontier {
        Frontier { policy, queue: VecDeque::new(), pending: BTreeSet::new() }
    }

    pub fn push(&mut self, id: StateId) {
        if self.pending.insert(id) {
            self.queue.push_back(id);
        }
    }

    pub fn pop(&mut self) -> Option<StateId> {
        loop {
            let id = match self.policy {
                Strategy::Bfs => self.queue.pop_front()?,
                Strategy::Dfs => self.queue.pop_back()?,
            };
            if self.pending.remove(&id) {
                return Some(id);
            }
        }
    }

    /// Removes `id` if pending; reports whether it was.
    pub fn remove(&mut self, id: StateId) -> bool {
        self.pending.remove(&id)
    }

    pub fn contains(&self, id: StateId) -> bool {
        self.pending.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExplorationStats {
    /// Abstract state count without subsumption, when known.
    pub maximum: Option<usize>,
    pub generated: usize,
    /// Distinct states ever marked as subsumed.
    pub subsumed: usize,
    pub relevant: usize,
    /// Removals from the frontier caused by subsumption.
    pub discarded: usize,
    pub transitions_generated: usize,
    /// Transitions leaving relevant states.
    pub transitions_relevant: usize,
    pub wall_time: Duration,
    pub peak_memory: Option<u64>,
    pub complete: bool,
}

pub const CSV_HEADER: &str = "grammar,engine,strategy,subsumption,mode,maximum,generated,subsumed,relevant,\
discarded,transitions_generated,transitions_relevant,time_ms,peak_mem_bytes,complete";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Table,
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

fn or_blank<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl ExplorationStats {
    /// One CSV row, without header.
    pub fn csv_row(&self, grammar: &str, config: &Config) -> String {
        format!(
            "{grammar},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            config.engine,
            config.strategy,
            on_off(config.subsumption),
            config.mode,
            or_blank(self.maximum),
            self.generated,
            self.subsumed,
            self.relevant,
            self.discarded,
            self.transitions_generated,
            self.transitions_relevant,
            self.wall_time.as_millis(),
            or_blank(self.peak_memory),
            self.complete,
        )
    }
}

/// Renders the statistics as CSV (header plus row) or as an aligned table.
pub fn stats_report(stats: &ExplorationStats, grammar: &str, config: &Config, format: ReportFormat) -> String {
    let row = stats.csv_row(grammar, config);
    match format {
        ReportFormat::Csv => format!("{CSV_HEADER}\n{row}\n"),
        ReportFormat::Table => {
            let mut out = String::new();
            for (k, v) in CSV_HEADER.split(',').zip(row.split(',')) {
                let _ = writeln!(out, "{k:<22} {}", if v.is_empty() { "-" } else { v });
            }
            out
        }
    }
}

/// Peak resident set size of this process, where the platform reports it.
pub fn peak_memory() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

#[derive(Clone, Debug)]
pub struct Exploration {
    pub system: TransitionSystem,
    pub stats: ExplorationStats,
}

/// Outcome of a freshness check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Freshness {
    /// The candidate is new. `subsumed` lists stored states it subsumes;
    /// `discarded` of them were still pending and have left the frontier.
    Fresh { subsumed: Vec<StateId>, discarded: usize },
    /// The candidate is represented by this stored state.
    Known(StateId),
}

/// Fresh iff no stored state is strictly isomorphic to `t`.
pub fn is_fresh_iso(t: &Shape, colouring: &Colouring, ts: &TransitionSystem) -> Freshness {
    for u in ts.candidates(colouring.certificate()) {
        let (su, cu) = ts.stored(u);
        if t.strictly_isomorphic_coloured(colouring, su, cu) {
            return Freshness::Known(u);
        }
    }
    Freshness::Fresh { subsumed: Vec::new(), discarded: 0 }
}

/// Fresh iff no stored state subsumes `t`. Stored states subsumed by a fresh
/// `t` are collected and taken off the frontier.
pub fn is_fresh_subsumption(t: &Shape, colouring: &Colouring, ts: &TransitionSystem, frontier: &mut Frontier) -> Freshness {
    let mut subsumed = Vec::new();
    for u in ts.candidates(colouring.certificate()) {
        let (su, cu) = ts.stored(u);
        match t.relate_coloured(colouring, su, cu) {
            Relation::Subsumed => return Freshness::Known(u),
            Relation::Subsumes => subsumed.push(u),
            Relation::Unrelated => {}
        }
    }
    let discarded = subsumed.iter().filter(|u| frontier.remove(**u)).count();
    Freshness::Fresh { subsumed, discarded }
}

struct Successor {
    rule: String,
    matching: Vec<(NodeId, NodeId)>,
    target: Shape,
}

/// Successors of `s` in rule order, or `None` once `expired` reports true.
/// The deadline is polled between materialisations, since a single abstract
/// step can be expensive.
fn successors(grammar: &Grammar, engine: Engine, s: &Shape, expired: &dyn Fn() -> bool) -> Result<Option<Vec<Successor>>> {
    let mut out = Vec::new();
    for rule in &grammar.rules {
        match engine {
            Engine::Abstract => {
                for m in prematch(rule, s) {
                    let matching: Vec<(NodeId, NodeId)> = m.pairs().collect();
                    for mat in materialise(rule, &m, s)? {
                        if expired() {
                            return Ok(None);
                        }
                        for t in resolve(&apply(rule, &mat)?) {
                            out.push(Successor {
                                rule: rule.name().to_string(),
                                matching: matching.clone(),
                                target: normalise(&t),
                            });
                        }
                    }
                }
            }
            Engine::Concrete => {
                for m in concrete_matches(rule, s.graph()) {
                    let h = concrete_apply(rule, &m, s.graph())?;
                    out.push(Successor {
                        rule: rule.name().to_string(),
                        matching: m.pairs().collect(),
                        target: Shape::concrete(&h),
                    });
                }
            }
        }
    }
    Ok(Some(out))
}

/// Explores the state space of `grammar`.
pub fn explore(grammar: &Grammar, config: &Config) -> Result<Exploration> {
    if config.engine == Engine::Abstract && grammar.has_nacs() {
        return Err(Error::Unsupported("negative application conditions need the concrete engine".into()));
    }
    if config.engine == Engine::Concrete && config.subsumption {
        return Err(Error::Unsupported("subsumption needs the abstract engine".into()));
    }
    let clock = Instant::now();
    let reach = config.mode == Mode::Reach;
    let mut ts = TransitionSystem::default();
    let mut frontier = Frontier::new(config.strategy);
    let mut depth: Vec<usize> = Vec::new();
    let mut discarded = 0;
    let mut complete = true;

    let start = match config.engine {
        Engine::Abstract => abstract_graph(&grammar.start),
        Engine::Concrete => Shape::concrete(&grammar.start),
    };
    // Without subsumption only strict isomorphism matters, so states can be
    // bucketed by the finer certificate.
    let colour = |s: &Shape| if config.subsumption { s.colouring() } else { s.strict_colouring() };
    let colouring = colour(&start);
    ts.start = ts.add(start, colouring);
    depth.push(0);
    frontier.push(ts.start);

    'outer: while let Some(s) = frontier.pop() {
        if config.max_depth.is_some_and(|d| depth[s] >= d) {
            continue;
        }
        let shape = ts.state(s).expect("frontier states are stored").clone();
        let expired = || config.timeout.is_some_and(|t| clock.elapsed() >= t);
        let Some(succs) = successors(grammar, config.engine, &shape, &expired)? else {
            complete = false;
            break;
        };
        for succ in succs {
            if expired() {
                complete = false;
                break 'outer;
            }
            let colouring = colour(&succ.target);
            let fresh = if config.subsumption {
                is_fresh_subsumption(&succ.target, &colouring, &ts, &mut frontier)
            } else {
                is_fresh_iso(&succ.target, &colouring, &ts)
            };
            let target = match fresh {
                Freshness::Known(u) => u,
                Freshness::Fresh { subsumed, discarded: removed } => {
                    if config.max_states.is_some_and(|m| ts.generated() >= m) {
                        complete = false;
                        break 'outer;
                    }
                    discarded += removed;
                    for u in subsumed {
                        if ts.subsumed.insert(u) && reach {
                            ts.evict(u);
                        }
                    }
                    let t = ts.add(succ.target, colouring);
                    depth.push(depth[s] + 1);
                    frontier.push(t);
                    t
                }
            };
            if !reach {
                ts.transitions.insert(Transition { source: s, rule: succ.rule, matching: succ.matching, target });
            }
        }
    }

    let generated = ts.generated();
    let subsumed = ts.subsumed.len();
    let transitions_relevant = ts.transitions.iter().filter(|t| !ts.subsumed.contains(&t.source)).count();
    let stats = ExplorationStats {
        maximum: (config.engine == Engine::Abstract && !config.subsumption && complete).then_some(generated),
        generated,
        subsumed,
        relevant: generated - subsumed,
        discarded,
        transitions_generated: ts.transitions.len(),
        transitions_relevant,
        wall_time: clock.elapsed(),
        peak_memory: peak_memory(),
        complete,
    };
    Ok(Exploration { system: ts, stats })
}
