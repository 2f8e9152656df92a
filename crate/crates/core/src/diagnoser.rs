//! Fault diagnosability under cost-bounded observation tampering.
//!
//! Attacks are folded into the plant as extra transitions over
//! cost-layered states ([`CostedPlant`]); a twin-plant verifier over that
//! automaton ([`FVerifier`]) then exposes non-diagnosability as a cycle on
//! which one copy has seen a fault and the other has not.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::attack::{AttackLabel, AttackModel, Cost};
use crate::automata::{PlantNfa, StateId, Symbol};
use crate::error::{Error, PreconditionViolation, Result, WitnessStep};
use crate::graph;

/// A state `(x, c)`: plant state `x` reached after spending `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CostedState {
    pub plant_state: StateId,
    pub cost: Cost,
}

/// Event labelling a transition of the costed plant. A deletion moves the
/// plant along `σ` but emits nothing, so it is a fresh unobservable marker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MnEvent {
    Plant(Symbol),
    Deletion(Symbol),
}

/// Transition of the costed plant. `attack` is `None` for ordinary plant
/// moves, otherwise the deletion, insertion or substitution it realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MnEdge {
    pub from: usize,
    pub event: MnEvent,
    pub attack: Option<AttackLabel>,
    pub to: usize,
}

/// Plant with attacks embedded as cost-increasing transitions; every
/// stored cost is at most `bound`.
#[derive(Clone, Debug)]
pub struct CostedPlant {
    bound: Cost,
    observable: Vec<bool>,
    states: Vec<CostedState>,
    index: HashMap<CostedState, usize>,
    initial: Vec<usize>,
    edges: Vec<MnEdge>,
    out: Vec<Vec<usize>>,
}

impl CostedPlant {
    /// Accessible part of the layered automaton. Fails when the result has
    /// a cycle of unobservable events or a state with no successor.
    pub fn build(plant: &PlantNfa, model: &AttackModel, bound: Cost) -> Result<Self> {
        let gm = Self::build_unchecked(plant, model, bound)?;
        gm.check_assumptions(plant)?;
        Ok(gm)
    }

    /// Same construction without the liveness and unobservable-cycle checks.
    pub fn build_unchecked(plant: &PlantNfa, model: &AttackModel, bound: Cost) -> Result<Self> {
        model.validate_against(plant)?;
        let mut gm = CostedPlant {
            bound,
            observable: plant.symbols().map(|s| plant.is_observable(s)).collect(),
            states: Vec::new(),
            index: HashMap::new(),
            initial: Vec::new(),
            edges: Vec::new(),
            out: Vec::new(),
        };
        let mut queue = VecDeque::new();
        for &x in plant.initial() {
            let (i, _) = gm.intern(CostedState {
                plant_state: x,
                cost: 0,
            });
            gm.initial.push(i);
            queue.push_back(i);
        }
        while let Some(i) = queue.pop_front() {
            let CostedState {
                plant_state: x,
                cost: c,
            } = gm.states[i];
            let mut moves: Vec<(MnEvent, Option<AttackLabel>, StateId, Cost)> = Vec::new();
            for &(e, y) in plant.edges_from(x) {
                moves.push((MnEvent::Plant(e), None, y, c));
            }
            let within = |w: Cost| c.checked_add(w).filter(|&t| t <= bound);
            for (&s, &w) in model.deletions() {
                if let Some(t) = within(w) {
                    for y in plant.successors(x, s) {
                        moves.push((MnEvent::Deletion(s), Some(AttackLabel::Del(s)), y, t));
                    }
                }
            }
            for (&e, &w) in model.insertions() {
                if let Some(t) = within(w) {
                    moves.push((MnEvent::Plant(e), Some(AttackLabel::Ins(e)), x, t));
                }
            }
            for (&(from, to), &w) in model.substitutions() {
                if let Some(t) = within(w) {
                    for y in plant.successors(x, from) {
                        let label = AttackLabel::Sub { from, to };
                        moves.push((MnEvent::Plant(to), Some(label), y, t));
                    }
                }
            }
            for (event, attack, y, t) in moves {
                let (j, fresh) = gm.intern(CostedState {
                    plant_state: y,
                    cost: t,
                });
                if fresh {
                    queue.push_back(j);
                }
                gm.out[i].push(gm.edges.len());
                gm.edges.push(MnEdge {
                    from: i,
                    event,
                    attack,
                    to: j,
                });
            }
        }
        Ok(gm)
    }

    fn intern(&mut self, s: CostedState) -> (usize, bool) {
        if let Some(&i) = self.index.get(&s) {
            return (i, false);
        }
        let i = self.states.len();
        self.states.push(s);
        self.index.insert(s, i);
        self.out.push(Vec::new());
        (i, true)
    }

    fn check_assumptions(&self, plant: &PlantNfa) -> Result<(), PreconditionViolation> {
        let pairs: Vec<(usize, usize)> = self.edges.iter().map(|e| (e.from, e.to)).collect();
        let silent: Vec<Vec<usize>> = self
            .out
            .iter()
            .map(|es| {
                es.iter()
                    .copied()
                    .filter(|&e| !self.is_observable(self.edges[e].event))
                    .collect()
            })
            .collect();
        if let Some(cycle) = graph::find_cycle(&silent, &pairs) {
            return Err(PreconditionViolation::UnobservableCycle {
                cycle: cycle
                    .into_iter()
                    .map(|e| self.render_edge(plant, e))
                    .collect(),
            });
        }
        if let Some(i) = (0..self.states.len()).find(|&i| self.out[i].is_empty()) {
            return Err(PreconditionViolation::NotLive {
                state: self.render_state(plant, i),
            });
        }
        Ok(())
    }

    pub fn bound(&self) -> Cost {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[CostedState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> CostedState {
        self.states[i]
    }

    pub fn index_of(&self, s: CostedState) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn edges(&self) -> &[MnEdge] {
        &self.edges
    }

    pub fn edges_from(&self, i: usize) -> impl Iterator<Item = &MnEdge> + '_ {
        self.out[i].iter().map(move |&e| &self.edges[e])
    }

    pub fn is_observable(&self, event: MnEvent) -> bool {
        match event {
            MnEvent::Plant(s) => self.observable[s.index()],
            MnEvent::Deletion(_) => false,
        }
    }

    /// Targets of `event` from state `i`.
    pub fn successors(&self, i: usize, event: MnEvent) -> BTreeSet<CostedState> {
        self.edges_from(i)
            .filter(|e| e.event == event)
            .map(|e| self.states[e.to])
            .collect()
    }

    pub fn render_state(&self, plant: &PlantNfa, i: usize) -> String {
        let s = self.states[i];
        format!("({},{})", plant.state_name(s.plant_state), s.cost)
    }

    pub fn render_event(plant: &PlantNfa, event: MnEvent) -> String {
        match event {
            MnEvent::Plant(s) => plant.symbol_name(s).to_string(),
            MnEvent::Deletion(s) => format!("del_{}", plant.symbol_name(s)),
        }
    }

    pub fn render_edge(&self, plant: &PlantNfa, e: usize) -> WitnessStep {
        let edge = self.edges[e];
        WitnessStep {
            from: self.render_state(plant, edge.from),
            event: Self::render_event(plant, edge.event),
            to: self.render_state(plant, edge.to),
        }
    }
}

/// Whether a verifier component has executed a fault.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaultLabel {
    N,
    F,
}

impl fmt::Display for FaultLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaultLabel::N => "N",
            FaultLabel::F => "F",
        })
    }
}

/// Verifier state `(x₁, l₁, x₂, l₂)` over indices into a [`CostedPlant`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VerifierState {
    pub left: usize,
    pub left_label: FaultLabel,
    pub right: usize,
    pub right_label: FaultLabel,
}

impl VerifierState {
    pub fn is_confused(&self) -> bool {
        self.left_label != self.right_label
    }

    pub fn mirrored(&self) -> Self {
        VerifierState {
            left: self.right,
            left_label: self.right_label,
            right: self.left,
            right_label: self.left_label,
        }
    }
}

/// Verifier transition; each side either stays put (`None`) or follows
/// the named costed-plant edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifierEdge {
    pub from: usize,
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub to: usize,
}

/// Twin-plant verifier tracking pairs of runs with equal observations.
#[derive(Clone, Debug)]
pub struct FVerifier {
    states: Vec<VerifierState>,
    index: HashMap<VerifierState, usize>,
    initial: Vec<usize>,
    edges: Vec<VerifierEdge>,
    out: Vec<Vec<usize>>,
}

impl FVerifier {
    /// Observable events move both sides together; unobservable events
    /// (faults and deletion markers included) move the left side, the right
    /// side, or both on the same event. Executing a fault marks that side F.
    pub fn build(gm: &CostedPlant, faults: &BTreeSet<Symbol>) -> Self {
        let is_fault = |e: MnEvent| matches!(e, MnEvent::Plant(s) if faults.contains(&s));
        let mark = |l: FaultLabel, e: MnEvent| if is_fault(e) { FaultLabel::F } else { l };
        let mut v = FVerifier {
            states: Vec::new(),
            index: HashMap::new(),
            initial: Vec::new(),
            edges: Vec::new(),
            out: Vec::new(),
        };
        let mut queue = VecDeque::new();
        for &x in gm.initial() {
            for &y in gm.initial() {
                let (i, _) = v.intern(VerifierState {
                    left: x,
                    left_label: FaultLabel::N,
                    right: y,
                    right_label: FaultLabel::N,
                });
                v.initial.push(i);
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            let q = v.states[i];
            let mut moves: Vec<(Option<usize>, Option<usize>, VerifierState)> = Vec::new();
            for &le in &gm.out[q.left] {
                let l = gm.edges[le];
                if gm.is_observable(l.event) {
                    continue;
                }
                moves.push((
                    Some(le),
                    None,
                    VerifierState {
                        left: l.to,
                        left_label: mark(q.left_label, l.event),
                        ..q
                    },
                ));
            }
            for &re in &gm.out[q.right] {
                let r = gm.edges[re];
                if gm.is_observable(r.event) {
                    continue;
                }
                moves.push((
                    None,
                    Some(re),
                    VerifierState {
                        right: r.to,
                        right_label: mark(q.right_label, r.event),
                        ..q
                    },
                ));
            }
            for &le in &gm.out[q.left] {
                let l = gm.edges[le];
                for &re in &gm.out[q.right] {
                    let r = gm.edges[re];
                    if l.event != r.event {
                        continue;
                    }
                    moves.push((
                        Some(le),
                        Some(re),
                        VerifierState {
                            left: l.to,
                            left_label: mark(q.left_label, l.event),
                            right: r.to,
                            right_label: mark(q.right_label, r.event),
                        },
                    ));
                }
            }
            for (left, right, t) in moves {
                let (j, fresh) = v.intern(t);
                if fresh {
                    queue.push_back(j);
                }
                v.out[i].push(v.edges.len());
                v.edges.push(VerifierEdge {
                    from: i,
                    left,
                    right,
                    to: j,
                });
            }
        }
        v
    }

    fn intern(&mut self, s: VerifierState) -> (usize, bool) {
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

    pub fn states(&self) -> &[VerifierState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> VerifierState {
        self.states[i]
    }

    pub fn index_of(&self, s: VerifierState) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn edges(&self) -> &[VerifierEdge] {
        &self.edges
    }

    pub fn edges_from(&self, i: usize) -> impl Iterator<Item = &VerifierEdge> + '_ {
        self.out[i].iter().map(move |&e| &self.edges[e])
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.from, e.to)).collect()
    }

    /// A cycle of verifier edges whose states all pair an F side with an N
    /// side, if one exists.
    pub fn find_confused_cycle(&self) -> Option<Vec<usize>> {
        let pairs = self.pairs();
        let confused = |i: usize| self.states[i].is_confused();
        let keep = |e: usize| confused(pairs[e].0) && confused(pairs[e].1);
        let cyclic = graph::cyclic_nodes(self.states.len(), &pairs, confused, keep);
        let start = cyclic.iter().position(|&c| c)?;
        let cycle = graph::cycle_through(&self.out, &pairs, start, keep)
            .expect("node in a nontrivial component lies on a cycle");
        let first = self.states[start];
        assert!(
            cycle.iter().all(|&e| {
                let s = self.states[pairs[e].1];
                (s.left_label, s.right_label) == (first.left_label, first.right_label)
            }),
            "fault labels must be constant along a verifier cycle"
        );
        Some(cycle)
    }

    /// Shortest edge path from an initial state to `target`.
    pub fn access_path(&self, target: usize) -> Option<Vec<usize>> {
        let pairs = self.pairs();
        graph::bfs_path(
            &self.out,
            &pairs,
            self.initial.iter().copied(),
            |v| v == target,
            |_| true,
        )
    }
}

/// One transition of a costed-plant run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunStep {
    pub from: CostedState,
    pub event: MnEvent,
    pub attack: Option<AttackLabel>,
    pub to: CostedState,
}

/// A lasso-shaped run: `prefix` followed by `cycle` repeated forever.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Run {
    pub prefix: Vec<RunStep>,
    pub cycle: Vec<RunStep>,
}

impl Run {
    fn observed(gm: &CostedPlant, steps: &[RunStep]) -> Vec<Symbol> {
        steps
            .iter()
            .filter(|s| gm.is_observable(s.event))
            .filter_map(|s| match s.event {
                MnEvent::Plant(e) => Some(e),
                MnEvent::Deletion(_) => None,
            })
            .collect()
    }
}

/// Two runs with identical observations, only one of which contains a
/// fault, that can be pumped forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub faulty: Run,
    pub normal: Run,
    pub observed_prefix: Vec<Symbol>,
    pub observed_cycle: Vec<Symbol>,
}

/// Verdict of the diagnosability check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnosis {
    pub diagnosable: bool,
    pub budget: Cost,
    pub costed_plant_states: usize,
    pub verifier_states: usize,
    pub counterexample: Option<Counterexample>,
}

/// Largest verifier the construction can produce for a plant with `n`
/// states analysed at `budget`.
pub fn verifier_size_limit(n: usize, budget: Cost) -> usize {
    let side = 2 * n * (budget as usize + 2);
    side * side
}

fn check_faults(plant: &PlantNfa, faults: &BTreeSet<Symbol>) -> Result<()> {
    for &f in faults {
        if f.index() >= plant.num_symbols() {
            return Err(Error::UnknownSymbol(format!("#{}", f.0)));
        }
        if plant.is_observable(f) {
            return Err(Error::InvalidPlant(format!(
                "fault `{}` must be unobservable",
                plant.symbol_name(f)
            )));
        }
    }
    Ok(())
}

/// Decides whether every fault is eventually detected no matter how an
/// attacker spending at most `budget` tampers with the observations.
pub fn verify_diagnosability(
    plant: &PlantNfa,
    model: &AttackModel,
    faults: &BTreeSet<Symbol>,
    budget: Cost,
) -> Result<Diagnosis> {
    check_faults(plant, faults)?;
    let gm = CostedPlant::build(plant, model, budget)?;
    let v = FVerifier::build(&gm, faults);
    assert!(
        v.len() <= verifier_size_limit(plant.num_states(), budget),
        "verifier has {} states, above the (2|X|(C+2))² limit",
        v.len()
    );
    let counterexample = v
        .find_confused_cycle()
        .map(|cycle| counterexample(&gm, &v, &cycle));
    Ok(Diagnosis {
        diagnosable: counterexample.is_none(),
        budget,
        costed_plant_states: gm.len(),
        verifier_states: v.len(),
        counterexample,
    })
}

fn counterexample(gm: &CostedPlant, v: &FVerifier, cycle: &[usize]) -> Counterexample {
    let start = v.edges[cycle[0]].from;
    let access = v
        .access_path(start)
        .expect("verifier states are accessible");
    let left_faulty = v.states[start].left_label == FaultLabel::F;
    let replay = |edges: &[usize], left: bool| -> Vec<RunStep> {
        edges
            .iter()
            .filter_map(|&e| {
                let ve = v.edges[e];
                if left {
                    ve.left
                } else {
                    ve.right
                }
            })
            .map(|me| {
                let m = gm.edges[me];
                RunStep {
                    from: gm.states[m.from],
                    event: m.event,
                    attack: m.attack,
                    to: gm.states[m.to],
                }
            })
            .collect()
    };
    let side = |left: bool| Run {
        prefix: replay(&access, left),
        cycle: replay(cycle, left),
    };
    let (faulty, normal) = (side(left_faulty), side(!left_faulty));
    let observed_prefix = Run::observed(gm, &faulty.prefix);
    let observed_cycle = Run::observed(gm, &faulty.cycle);
    debug_assert_eq!(observed_prefix, Run::observed(gm, &normal.prefix));
    debug_assert_eq!(observed_cycle, Run::observed(gm, &normal.cycle));
    Counterexample {
        faulty,
        normal,
        observed_prefix,
        observed_cycle,
    }
}
