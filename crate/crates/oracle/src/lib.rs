//! Brute-force reference answers for the analyses in `tamper-core`.
//!
//! Everything here is deliberately naive: estimates come from enumerating
//! matching sequences, diagnosability from exploring observation-indexed
//! belief sets of the attacked plant, and the minimum budget from an
//! exhaustive cost-bounded search. Only the plant and attack-model types and
//! their enumerators are shared with the production code.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use tamper_core::attack::{attacker_projection, AttackModel, Cost};
use tamper_core::automata::{PlantNfa, StateId, StateSet, Symbol};
use thiserror::Error;

pub mod gen;

/// Size caps that keep the oracles from exploding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_string_length: usize,
    pub max_cost: Cost,
    pub max_states: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_string_length: 8,
            max_cost: 6,
            max_states: 6,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle refused: {0}")]
    TooLarge(String),
}

impl OracleBudget {
    fn check(&self, plant: &PlantNfa, len: usize, cost: Cost) -> Result<(), OracleError> {
        if plant.num_states() > self.max_states {
            return Err(OracleError::TooLarge(format!(
                "{} plant states > {}",
                plant.num_states(),
                self.max_states
            )));
        }
        if len > self.max_string_length {
            return Err(OracleError::TooLarge(format!(
                "string length {len} > {}",
                self.max_string_length
            )));
        }
        if cost > self.max_cost {
            return Err(OracleError::TooLarge(format!(
                "cost {cost} > {}",
                self.max_cost
            )));
        }
        Ok(())
    }
}

/// Least cost per plant state over all matching sequences of `received`
/// with cost at most `budget`.
pub fn oracle_estimate(
    plant: &PlantNfa,
    model: &AttackModel,
    received: &[Symbol],
    budget: Cost,
    caps: OracleBudget,
) -> Result<BTreeMap<StateId, Cost>, OracleError> {
    caps.check(plant, received.len(), budget)?;
    let mut best: BTreeMap<StateId, Cost> = BTreeMap::new();
    for seq in model.enumerate_matching(received, budget) {
        let word = attacker_projection(&seq.labels);
        let reached = plant
            .reach(plant.initial(), &word)
            .expect("projection is observable");
        for x in reached {
            let e = best.entry(x).or_insert(seq.cost);
            *e = (*e).min(seq.cost);
        }
    }
    Ok(best)
}

/// Edge of the attacked plant over `(x, spent)` states.
#[derive(Clone, Copy, Debug)]
struct Move {
    /// Observation emitted, if any.
    emits: Option<Symbol>,
    fault: bool,
    to: (StateId, Cost),
}

/// Attacked plant where every run pays for its own attacks, capped at `budget`.
fn attacked_moves(
    plant: &PlantNfa,
    model: &AttackModel,
    faults: &BTreeSet<Symbol>,
    budget: Cost,
    x: StateId,
    c: Cost,
) -> Vec<Move> {
    let mut out = Vec::new();
    for &(e, y) in plant.edges_from(x) {
        out.push(Move {
            emits: plant.is_observable(e).then_some(e),
            fault: faults.contains(&e),
            to: (y, c),
        });
    }
    for (&s, &w) in model.deletions() {
        if c + w <= budget {
            for &(e, y) in plant.edges_from(x) {
                if e == s {
                    out.push(Move {
                        emits: None,
                        fault: false,
                        to: (y, c + w),
                    });
                }
            }
        }
    }
    for (&s, &w) in model.insertions() {
        if c + w <= budget {
            out.push(Move {
                emits: Some(s),
                fault: false,
                to: (x, c + w),
            });
        }
    }
    for (&(from, to), &w) in model.substitutions() {
        if c + w <= budget {
            for &(e, y) in plant.edges_from(x) {
                if e == from {
                    out.push(Move {
                        emits: Some(to),
                        fault: false,
                        to: (y, c + w),
                    });
                }
            }
        }
    }
    out
}

/// What is known about runs ending in one attacked-plant state: whether a
/// fault-free run gets there, and the longest suffix (capped) executed
/// after a fault by a faulty run getting there.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Knowledge {
    normal: bool,
    faulty: Option<u32>,
}

type Belief = BTreeMap<(StateId, Cost), Knowledge>;

/// Decides diagnosability under attacks of total cost at most `budget` by
/// exploring every observation sequence. The fault is undetectable iff
/// some observation admits both a fault-free run and a faulty run that has
/// executed at least `horizon` events since the fault. A twin of such runs
/// passes through more than `(|X|(C+1))²` (faulty, normal) configurations,
/// so it revisits one and the confusion can be pumped forever; that count
/// plus one is the horizon, well inside `(2|X|(C+2))²`.
pub fn oracle_diagnosable(
    plant: &PlantNfa,
    model: &AttackModel,
    faults: &BTreeSet<Symbol>,
    budget: Cost,
    caps: OracleBudget,
) -> Result<bool, OracleError> {
    caps.check(plant, 0, budget)?;
    let side = plant.num_states() as u32 * (budget + 1);
    let horizon = side * side + 1;
    let moves = |x, c| attacked_moves(plant, model, faults, budget, x, c);

    let closure = |mut belief: Belief| -> Belief {
        let mut queue: VecDeque<(StateId, Cost)> = belief.keys().copied().collect();
        while let Some(p) = queue.pop_front() {
            let k = belief[&p];
            for m in moves(p.0, p.1).into_iter().filter(|m| m.emits.is_none()) {
                let next = advance(k, m.fault, horizon);
                let slot = belief.entry(m.to).or_default();
                let merged = merge(*slot, next);
                if merged != *slot {
                    *slot = merged;
                    queue.push_back(m.to);
                }
            }
        }
        belief
    };

    let start: Belief = plant
        .initial()
        .iter()
        .map(|&x| {
            (
                (x, 0),
                Knowledge {
                    normal: true,
                    faulty: None,
                },
            )
        })
        .collect();
    let start = closure(start);
    let mut seen: HashSet<Belief> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let observable: Vec<Symbol> = plant.observable_symbols().collect();
    while let Some(belief) = queue.pop_front() {
        let normal = belief.values().any(|k| k.normal);
        let stuck = belief
            .values()
            .any(|k| k.faulty.is_some_and(|n| n >= horizon));
        if normal && stuck {
            return Ok(false);
        }
        for &s in &observable {
            let mut next = Belief::new();
            for (&p, &k) in &belief {
                for m in moves(p.0, p.1).into_iter().filter(|m| m.emits == Some(s)) {
                    let slot = next.entry(m.to).or_default();
                    *slot = merge(*slot, advance(k, m.fault, horizon));
                }
            }
            if next.is_empty() {
                continue;
            }
            let next = closure(next);
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Ok(true)
}

fn advance(k: Knowledge, fault: bool, horizon: u32) -> Knowledge {
    let after = k.faulty.map(|n| (n + 1).min(horizon));
    if fault {
        let from_normal = k.normal.then_some(0);
        Knowledge {
            normal: false,
            faulty: after.max(from_normal),
        }
    } else {
        Knowledge {
            normal: k.normal,
            faulty: after,
        }
    }
}

fn merge(a: Knowledge, b: Knowledge) -> Knowledge {
    Knowledge {
        normal: a.normal || b.normal,
        faulty: a.faulty.max(b.faulty),
    }
}

/// Twin-plant state: `(left, left faulty, right, right faulty)`.
pub type Twin = (StateId, bool, StateId, bool);

/// Twin-plant transition with per-side attack costs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TwinEdge {
    pub from: Twin,
    pub left_cost: Cost,
    pub right_cost: Cost,
    pub to: Twin,
}

/// Every single-side step of the corrupted plant from `x`: `(observation,
/// cost, target, unobservable plant event)`; `None` observation means
/// nothing is seen.
fn corrupted_steps(
    plant: &PlantNfa,
    model: &AttackModel,
    x: StateId,
) -> Vec<(Option<Symbol>, Cost, StateId, Option<Symbol>)> {
    let mut out = Vec::new();
    for &(e, y) in plant.edges_from(x) {
        if plant.is_observable(e) {
            out.push((Some(e), 0, y, None));
        } else {
            out.push((None, 0, y, Some(e)));
        }
        for (&(from, to), &w) in model.substitutions() {
            if from == e {
                out.push((Some(to), w, y, None));
            }
        }
        if let Some(w) = model.deletion_cost(e) {
            out.push((None, w, y, None));
        }
    }
    for (&s, &w) in model.insertions() {
        out.push((Some(s), w, x, None));
    }
    out
}

/// All transitions of the accessible twin plant over the corrupted
/// automaton. Unobservable plant events move one side or both at zero
/// cost; everything else pairs equal observations (or silence) with
/// independent costs. Staying put on both sides is not a transition.
pub fn twin_edges(
    plant: &PlantNfa,
    model: &AttackModel,
    faults: &BTreeSet<Symbol>,
) -> (Vec<Twin>, Vec<TwinEdge>) {
    let steps: Vec<_> = plant
        .states()
        .map(|x| corrupted_steps(plant, model, x))
        .collect();
    let initial: Vec<Twin> = plant
        .initial()
        .iter()
        .flat_map(|&x| plant.initial().iter().map(move |&y| (x, false, y, false)))
        .collect();
    let mut seen: BTreeSet<Twin> = initial.iter().copied().collect();
    let mut queue: VecDeque<Twin> = initial.iter().copied().collect();
    let mut edges: HashSet<TwinEdge> = HashSet::new();
    while let Some(q @ (x, fx, y, fy)) = queue.pop_front() {
        let mut add = |lc, rc, to: Twin| {
            edges.insert(TwinEdge {
                from: q,
                left_cost: lc,
                right_cost: rc,
                to,
            });
            if seen.insert(to) {
                queue.push_back(to);
            }
        };
        // "Stay" on one side is a zero-cost silent step.
        let stay = |z: StateId| (None, 0, z, None);
        let left: Vec<_> = steps[x.index()].iter().copied().chain([stay(x)]).collect();
        let right: Vec<_> = steps[y.index()].iter().copied().chain([stay(y)]).collect();
        for &(lo, lc, lx, le) in &left {
            for &(ro, rc, ry, re) in &right {
                if lo != ro {
                    continue;
                }
                let l_stays = (lo, lc, lx, le) == stay(x);
                let r_stays = (ro, rc, ry, re) == stay(y);
                if l_stays && r_stays {
                    continue;
                }
                // Unobservable plant events may pair only with the same
                // event on the other side or with staying put.
                match (le, re) {
                    (Some(a), Some(b)) if a != b => continue,
                    (Some(_), None) if !r_stays => continue,
                    (None, Some(_)) if !l_stays => continue,
                    _ => {}
                }
                let nfx = fx || le.is_some_and(|e| faults.contains(&e));
                let nfy = fy || re.is_some_and(|e| faults.contains(&e));
                add(lc, rc, (lx, nfx, ry, nfy));
            }
        }
    }
    let mut edges: Vec<TwinEdge> = edges.into_iter().collect();
    edges.sort_by_key(|e| (e.from, e.to, e.left_cost, e.right_cost));
    (seen.into_iter().collect(), edges)
}

fn confused(q: Twin) -> bool {
    q.1 != q.3
}

/// Twin states that return to themselves along zero-cost transitions
/// through confused states, found by a search from each candidate.
pub fn oracle_ending_states(
    plant: &PlantNfa,
    model: &AttackModel,
    faults: &BTreeSet<Symbol>,
) -> BTreeSet<Twin> {
    let (states, edges) = twin_edges(plant, model, faults);
    let free: Vec<&TwinEdge> = edges
        .iter()
        .filter(|e| e.left_cost == 0 && e.right_cost == 0 && confused(e.from) && confused(e.to))
        .collect();
    let mut result = BTreeSet::new();
    for &q in states.iter().filter(|&&q| confused(q)) {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<Twin> = free.iter().filter(|e| e.from == q).map(|e| e.to).collect();
        while let Some(p) = stack.pop() {
            if p == q {
                result.insert(q);
                break;
            }
            if seen.insert(p) {
                stack.extend(free.iter().filter(|e| e.from == p).map(|e| e.to));
            }
        }
    }
    result
}

/// Every `(left, right)` cost pair realizable by some path to each twin
/// state with both sides at most `limit`.
pub fn reachable_costs(
    plant: &PlantNfa,
    model: &AttackModel,
    faults: &BTreeSet<Symbol>,
    limit: Cost,
) -> BTreeMap<Twin, BTreeSet<(Cost, Cost)>> {
    let (_, edges) = twin_edges(plant, model, faults);
    let mut by_source: BTreeMap<Twin, Vec<&TwinEdge>> = BTreeMap::new();
    for e in &edges {
        by_source.entry(e.from).or_default().push(e);
    }
    let mut seen: BTreeSet<(Twin, Cost, Cost)> = BTreeSet::new();
    let mut stack: Vec<(Twin, Cost, Cost)> = plant
        .initial()
        .iter()
        .flat_map(|&x| {
            plant
                .initial()
                .iter()
                .map(move |&y| ((x, false, y, false), 0, 0))
        })
        .collect();
    while let Some(s @ (q, l, r)) = stack.pop() {
        if !seen.insert(s) {
            continue;
        }
        for e in by_source.get(&q).into_iter().flatten() {
            let (nl, nr) = (l + e.left_cost, r + e.right_cost);
            if nl <= limit && nr <= limit {
                stack.push((e.to, nl, nr));
            }
        }
    }
    let mut out: BTreeMap<Twin, BTreeSet<(Cost, Cost)>> = BTreeMap::new();
    for (q, l, r) in seen {
        out.entry(q).or_default().insert((l, r));
    }
    out
}

/// Minimal elements of a set of cost pairs under componentwise order.
pub fn antichain(pairs: &BTreeSet<(Cost, Cost)>) -> BTreeSet<(Cost, Cost)> {
    pairs
        .iter()
        .copied()
        .filter(|&(l, r)| {
            !pairs
                .iter()
                .any(|&(a, b)| (a, b) != (l, r) && a <= l && b <= r)
        })
        .collect()
}

/// Smallest `C` such that some path spending at most `C` on each side
/// reaches a zero-cost confused cycle, or `None` if no such cycle exists.
pub fn oracle_cmin(
    plant: &PlantNfa,
    model: &AttackModel,
    faults: &BTreeSet<Symbol>,
    caps: OracleBudget,
) -> Result<Option<Cost>, OracleError> {
    caps.check(plant, 0, model.max_cost().min(caps.max_cost))?;
    let ending = oracle_ending_states(plant, model, faults);
    if ending.is_empty() {
        return Ok(None);
    }
    let twins = 4 * plant.num_states() * plant.num_states();
    let ceiling = (twins as Cost) * model.max_cost();
    for c in 0..=ceiling {
        let reach = reachable_costs(plant, model, faults, c);
        if ending.iter().any(|q| reach.contains_key(q)) {
            return Ok(Some(c));
        }
    }
    unreachable!("ending states are reachable and simple paths cost at most |Q|·c_max")
}

/// The set reached by the plant from its initial states under `word`.
pub fn reach_from_initial(plant: &PlantNfa, word: &[Symbol]) -> StateSet {
    plant.reach(plant.initial(), word).expect("observable word")
}
