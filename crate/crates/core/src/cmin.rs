//! Minimum attack budget that keeps a fault undiagnosed forever.
//!
//! Attacks become `(event, cost)`-labelled edges of a corrupted automaton;
//! its twin verifier carries independent per-side costs. States on a
//! zero-cost cycle pairing a faulty run with a normal one are the ending
//! states, and the cheapest way to reach them (measured as the larger of
//! the two side costs) is found with a Pareto label-correcting search.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::attack::{AttackModel, Cost};
use crate::automata::{PlantNfa, StateId, Symbol};
use crate::diagnoser::FaultLabel;
use crate::error::Result;
use crate::graph;

/// `(e, c)`: observed symbol (`None` for ε) and the cost paid to produce it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CnLabel {
    pub event: Option<Symbol>,
    pub cost: Cost,
}

/// Plant whose edges also encode attacks as `(event, cost)` labels.
/// `(ε, 0)` is the implicit identity and is not stored.
#[derive(Clone, Debug)]
pub struct CorruptedAutomaton {
    num_states: usize,
    initial: Vec<StateId>,
    observable: Vec<bool>,
    /// Per state, label to sorted targets.
    moves: Vec<BTreeMap<CnLabel, BTreeSet<StateId>>>,
    max_cost: Cost,
}

impl CorruptedAutomaton {
    pub fn build(plant: &PlantNfa, model: &AttackModel) -> Result<Self> {
        model.validate_against(plant)?;
        let mut moves: Vec<BTreeMap<CnLabel, BTreeSet<StateId>>> =
            vec![BTreeMap::new(); plant.num_states()];
        for x in plant.states() {
            let m = &mut moves[x.index()];
            let mut add = |event, cost, y: StateId| {
                m.entry(CnLabel { event, cost }).or_default().insert(y);
            };
            for &(e, y) in plant.edges_from(x) {
                add(Some(e), 0, y);
            }
            for (&s, &c) in model.deletions() {
                for y in plant.successors(x, s) {
                    add(None, c, y);
                }
            }
            for (&e, &c) in model.insertions() {
                add(Some(e), c, x);
            }
            for (&(from, to), &c) in model.substitutions() {
                for y in plant.successors(x, from) {
                    add(Some(to), c, y);
                }
            }
        }
        Ok(CorruptedAutomaton {
            num_states: plant.num_states(),
            initial: plant.initial().iter().copied().collect(),
            observable: plant.symbols().map(|s| plant.is_observable(s)).collect(),
            moves,
            max_cost: model.max_cost(),
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn max_cost(&self) -> Cost {
        self.max_cost
    }

    /// Stored labels at `x` (the identity `(ε, 0)` excluded).
    pub fn labels(&self, x: StateId) -> impl Iterator<Item = CnLabel> + '_ {
        self.moves[x.index()].keys().copied()
    }

    /// `δ_cn(x, label)`, with `(ε, 0)` mapping `x` to itself.
    pub fn successors(&self, x: StateId, label: CnLabel) -> BTreeSet<StateId> {
        if label
            == (CnLabel {
                event: None,
                cost: 0,
            })
        {
            return BTreeSet::from([x]);
        }
        self.moves[x.index()]
            .get(&label)
            .cloned()
            .unwrap_or_default()
    }

    fn is_silent(&self, label: CnLabel) -> bool {
        matches!(label.event, Some(e) if !self.observable[e.index()])
    }

    /// Labels that emit an observation or ε, the identity included.
    fn visible_labels(&self, x: StateId) -> Vec<CnLabel> {
        let mut out = vec![CnLabel {
            event: None,
            cost: 0,
        }];
        out.extend(self.labels(x).filter(|&l| !self.is_silent(l)));
        out.sort();
        out.dedup();
        out
    }

    pub fn num_edges(&self) -> usize {
        self.moves
            .iter()
            .flat_map(|m| m.values())
            .map(BTreeSet::len)
            .sum()
    }
}

/// Which verifier sides execute a transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Movers {
    Left,
    Right,
    Both,
}

/// Verifier transition labelled `((e, c), (e, c'))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MvEdge {
    pub from: usize,
    pub event: Option<Symbol>,
    pub left_cost: Cost,
    pub right_cost: Cost,
    pub movers: Movers,
    pub to: usize,
}

impl MvEdge {
    pub fn is_free(&self) -> bool {
        self.left_cost == 0 && self.right_cost == 0
    }
}

/// Modified-verifier state `(x₁, l₁, x₂, l₂)` over plant states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairState {
    pub left: StateId,
    pub left_label: FaultLabel,
    pub right: StateId,
    pub right_label: FaultLabel,
}

impl PairState {
    pub fn is_confused(&self) -> bool {
        self.left_label != self.right_label
    }
}

/// Twin verifier over the corrupted automaton.
#[derive(Clone, Debug)]
pub struct ModifiedVerifier {
    states: Vec<PairState>,
    index: HashMap<PairState, usize>,
    initial: Vec<usize>,
    edges: Vec<MvEdge>,
    out: Vec<Vec<usize>>,
}

impl ModifiedVerifier {
    /// Observed symbols and ε synchronize both sides with independent
    /// costs; unobservable plant events interleave at zero cost, marking a
    /// side F when it executes a fault. The pure identity pair
    /// `((ε,0),(ε,0))` is left out.
    pub fn build(gc: &CorruptedAutomaton, faults: &BTreeSet<Symbol>) -> Self {
        let mut v = ModifiedVerifier {
            states: Vec::new(),
            index: HashMap::new(),
            initial: Vec::new(),
            edges: Vec::new(),
            out: Vec::new(),
        };
        let mut queue = VecDeque::new();
        for &x in gc.initial() {
            for &y in gc.initial() {
                let (i, _) = v.intern(PairState {
                    left: x,
                    left_label: FaultLabel::N,
                    right: y,
                    right_label: FaultLabel::N,
                });
                v.initial.push(i);
                queue.push_back(i);
            }
        }
        let mark = |l: FaultLabel, e: Symbol| {
            if faults.contains(&e) {
                FaultLabel::F
            } else {
                l
            }
        };
        while let Some(i) = queue.pop_front() {
            let q = v.states[i];
            let mut moves: Vec<(MvEdge, PairState)> = Vec::new();
            let (ll, rl) = (gc.visible_labels(q.left), gc.visible_labels(q.right));
            for &a in &ll {
                for &b in rl.iter().filter(|b| b.event == a.event) {
                    if a.event.is_none() && a.cost == 0 && b.cost == 0 {
                        continue;
                    }
                    for x in gc.successors(q.left, a) {
                        for y in gc.successors(q.right, b) {
                            let edge = MvEdge {
                                from: i,
                                event: a.event,
                                left_cost: a.cost,
                                right_cost: b.cost,
                                movers: Movers::Both,
                                to: 0,
                            };
                            moves.push((
                                edge,
                                PairState {
                                    left: x,
                                    right: y,
                                    ..q
                                },
                            ));
                        }
                    }
                }
            }
            let silent = |x: StateId| -> BTreeSet<Symbol> {
                gc.labels(x)
                    .filter(|&l| gc.is_silent(l))
                    .filter_map(|l| l.event)
                    .collect()
            };
            let (ls, rs) = (silent(q.left), silent(q.right));
            let zero = |e: Symbol| CnLabel {
                event: Some(e),
                cost: 0,
            };
            let free = |e: Symbol, movers| MvEdge {
                from: i,
                event: Some(e),
                left_cost: 0,
                right_cost: 0,
                movers,
                to: 0,
            };
            for &e in &ls {
                for x in gc.successors(q.left, zero(e)) {
                    let t = PairState {
                        left: x,
                        left_label: mark(q.left_label, e),
                        ..q
                    };
                    moves.push((free(e, Movers::Left), t));
                }
            }
            for &e in &rs {
                for y in gc.successors(q.right, zero(e)) {
                    let t = PairState {
                        right: y,
                        right_label: mark(q.right_label, e),
                        ..q
                    };
                    moves.push((free(e, Movers::Right), t));
                }
            }
            for &e in ls.intersection(&rs) {
                for x in gc.successors(q.left, zero(e)) {
                    for y in gc.successors(q.right, zero(e)) {
                        let t = PairState {
                            left: x,
                            left_label: mark(q.left_label, e),
                            right: y,
                            right_label: mark(q.right_label, e),
                        };
                        moves.push((free(e, Movers::Both), t));
                    }
                }
            }
            for (mut edge, t) in moves {
                let (j, fresh) = v.intern(t);
                if fresh {
                    queue.push_back(j);
                }
                edge.to = j;
                v.out[i].push(v.edges.len());
                v.edges.push(edge);
            }
        }
        v
    }

    fn intern(&mut self, s: PairState) -> (usize, bool) {
        if let Some(&i) = self.index.get(&s) {
            return (i, false);
        }
        let i = self.states.len();
        self.states.push(s);
        self.index.insert(s, i);
        self.out.push(Vec::new());
        (i, true)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[PairState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> PairState {
        self.states[i]
    }

    pub fn index_of(&self, s: PairState) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn edges(&self) -> &[MvEdge] {
        &self.edges
    }

    pub fn edges_from(&self, i: usize) -> impl Iterator<Item = &MvEdge> + '_ {
        self.out[i].iter().map(move |&e| &self.edges[e])
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.from, e.to)).collect()
    }

    fn free_confused(&self, e: usize) -> bool {
        let edge = &self.edges[e];
        edge.is_free() && self.states[edge.from].is_confused() && self.states[edge.to].is_confused()
    }

    /// States on a cycle of zero-cost transitions through confused states.
    pub fn ending_states(&self) -> Vec<usize> {
        let pairs = self.pairs();
        let cyclic = graph::cyclic_nodes(
            self.states.len(),
            &pairs,
            |i| self.states[i].is_confused(),
            |e| self.free_confused(e),
        );
        (0..self.states.len()).filter(|&i| cyclic[i]).collect()
    }

    /// A zero-cost confused cycle through `state`, as edge indices.
    pub fn ending_cycle(&self, state: usize) -> Option<Vec<usize>> {
        let pairs = self.pairs();
        graph::cycle_through(&self.out, &pairs, state, |e| self.free_confused(e))
    }
}

/// Left and right accumulated path costs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CostPair {
    pub left: Cost,
    pub right: Cost,
}

impl CostPair {
    pub fn new(left: Cost, right: Cost) -> Self {
        CostPair { left, right }
    }

    pub fn total(self) -> Cost {
        self.left.max(self.right)
    }

    /// Componentwise `≤` and different.
    pub fn dominates(self, other: CostPair) -> bool {
        self != other && self.left <= other.left && self.right <= other.right
    }

    fn extend(self, e: &MvEdge) -> CostPair {
        CostPair {
            left: self.left.saturating_add(e.left_cost),
            right: self.right.saturating_add(e.right_cost),
        }
    }
}

/// Antichain of cost pairs under componentwise order, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParetoSet {
    pairs: Vec<CostPair>,
}

impl ParetoSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pairs(&self) -> &[CostPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, p: CostPair) -> bool {
        self.pairs.binary_search(&p).is_ok()
    }

    /// Inserts `candidate` unless an equal or dominating pair is present,
    /// dropping the pairs it dominates. Returns whether the set changed.
    pub fn update(&mut self, candidate: CostPair) -> bool {
        if self
            .pairs
            .iter()
            .any(|&p| p == candidate || p.dominates(candidate))
        {
            return false;
        }
        self.pairs.retain(|&p| !candidate.dominates(p));
        let at = self.pairs.binary_search(&candidate).unwrap_err();
        self.pairs.insert(at, candidate);
        true
    }

    pub fn is_antichain(&self) -> bool {
        self.pairs
            .iter()
            .all(|&a| self.pairs.iter().all(|&b| !a.dominates(b)))
    }

    pub fn min_total(&self) -> Option<Cost> {
        self.pairs.iter().map(|p| p.total()).min()
    }
}

/// Free-function form of [`ParetoSet::update`].
pub fn pareto_update(labels: &mut ParetoSet, candidate: CostPair) -> bool {
    labels.update(candidate)
}

/// Result of the minimum-budget search.
#[derive(Clone, Debug)]
pub struct CminReport {
    pub cmin: Option<Cost>,
    pub verifier: ModifiedVerifier,
    pub ending_states: Vec<usize>,
    /// Pareto labels per verifier state at termination.
    pub labels: Vec<ParetoSet>,
    /// Edges of a cheapest path from an initial state into an ending state.
    pub path: Vec<usize>,
    /// Zero-cost confused cycle entered at the end of `path`.
    pub cycle: Vec<usize>,
    /// Successful label insertions performed by the search.
    pub label_insertions: usize,
}

/// Bound on total label work: states times distinct cost pairs per state.
pub fn label_work_limit(num_plant_states: usize, max_cost: Cost) -> usize {
    let states = 4 * num_plant_states * num_plant_states;
    states * (states * max_cost as usize + 1)
}

/// Pareto labels of all verifier states, propagated from `(0,0)` at the
/// initial states with a FIFO label-correcting worklist.
fn propagate(
    v: &ModifiedVerifier,
) -> (
    Vec<ParetoSet>,
    HashMap<(usize, CostPair), (usize, CostPair)>,
    usize,
) {
    let n = v.len();
    let mut labels = vec![ParetoSet::new(); n];
    // (state, pair) -> (edge, pair at the edge's source)
    let mut pred: HashMap<(usize, CostPair), (usize, CostPair)> = HashMap::new();
    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();
    let mut insertions = 0;
    for &i in v.initial() {
        if labels[i].update(CostPair::default()) {
            insertions += 1;
        }
        if !queued[i] {
            queued[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        queued[i] = false;
        let current = labels[i].pairs().to_vec();
        for &e in &v.out[i] {
            let edge = v.edges[e];
            for &p in &current {
                let cand = p.extend(&edge);
                if labels[edge.to].update(cand) {
                    insertions += 1;
                    pred.insert((edge.to, cand), (e, p));
                    if !queued[edge.to] {
                        queued[edge.to] = true;
                        queue.push_back(edge.to);
                    }
                }
            }
        }
    }
    (labels, pred, insertions)
}

/// Pareto labels of every state of `v`.
pub fn pareto_labels(v: &ModifiedVerifier) -> Vec<ParetoSet> {
    propagate(v).0
}

/// Smallest budget with which an attacker can steer both runs into a
/// zero-cost confused cycle, or `None` when no such cycle exists.
pub fn compute_cmin(
    plant: &PlantNfa,
    model: &AttackModel,
    faults: &BTreeSet<Symbol>,
) -> Result<CminReport> {
    let gc = CorruptedAutomaton::build(plant, model)?;
    let v = ModifiedVerifier::build(&gc, faults);
    let ending_states = v.ending_states();
    let (labels, pred, label_insertions) = propagate(&v);
    let best = ending_states
        .iter()
        .flat_map(|&q| labels[q].pairs().iter().map(move |&p| (p.total(), q, p)))
        .min();
    let (cmin, path, cycle) = match best {
        None => (None, Vec::new(), Vec::new()),
        Some((total, q, p)) => {
            let mut path = Vec::new();
            let (mut state, mut pair) = (q, p);
            while let Some(&(e, prev)) = pred.get(&(state, pair)) {
                path.push(e);
                state = v.edges[e].from;
                pair = prev;
            }
            path.reverse();
            let cycle = v
                .ending_cycle(q)
                .expect("ending state lies on a free cycle");
            (Some(total), path, cycle)
        }
    };
    Ok(CminReport {
        cmin,
        verifier: v,
        ending_states,
        labels,
        path,
        cycle,
        label_insertions,
    })
}
