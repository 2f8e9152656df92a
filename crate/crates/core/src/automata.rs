//! Plant automata under partial observation: the NFA itself, natural
//! projection, unobservable reach, the subset-construction observer, and
//! the structural checks used before diagnosability analysis.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, PreconditionViolation, Result, WitnessStep};
use crate::graph;

/// Dense identifier of a plant state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned event symbol. Symbols are compared by identity; the empty
/// string is represented by an empty sequence, never by a symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u32);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub type StateSet = BTreeSet<StateId>;

/// Names that may not be used for states or events.
const RESERVED_NAMES: &[&str] = &["", "ε", "eps", "epsilon"];

/// Nondeterministic plant automaton with an observable/unobservable event
/// partition and a distinguished set of fault events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlantNfa {
    state_names: Vec<String>,
    symbol_names: Vec<String>,
    observable: Vec<bool>,
    fault: Vec<bool>,
    initial: StateSet,
    /// Outgoing transitions per state, sorted by (symbol, target).
    out: Vec<Vec<(Symbol, StateId)>>,
    state_lookup: HashMap<String, StateId>,
    symbol_lookup: HashMap<String, Symbol>,
}

/// Incremental, name-based constructor for [`PlantNfa`].
#[derive(Clone, Debug, Default)]
pub struct PlantBuilder {
    states: Vec<String>,
    observable: Vec<String>,
    unobservable: Vec<String>,
    faults: Vec<String>,
    initial: Vec<String>,
    transitions: Vec<(String, String, String)>,
}

impl PlantBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn states<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.states.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn observable<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.observable.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn unobservable<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.unobservable.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn faults<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.faults.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn initial<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.initial.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn transition(
        mut self,
        from: impl Into<String>,
        event: impl Into<String>,
        to: impl Into<String>,
    ) -> Self {
        self.transitions
            .push((from.into(), event.into(), to.into()));
        self
    }

    pub fn build(self) -> Result<PlantNfa> {
        let mut state_lookup = HashMap::new();
        for (i, name) in self.states.iter().enumerate() {
            check_name(name, "state")?;
            if state_lookup
                .insert(name.clone(), StateId(i as u32))
                .is_some()
            {
                return Err(Error::InvalidPlant(format!("duplicate state `{name}`")));
            }
        }
        let mut symbol_lookup = HashMap::new();
        let mut symbol_names = Vec::new();
        let mut observable = Vec::new();
        for (name, obs) in self
            .observable
            .iter()
            .map(|n| (n, true))
            .chain(self.unobservable.iter().map(|n| (n, false)))
        {
            check_name(name, "event")?;
            let sym = Symbol(symbol_names.len() as u32);
            if symbol_lookup.insert(name.clone(), sym).is_some() {
                return Err(Error::InvalidPlant(format!(
                    "event `{name}` is listed twice (observable and unobservable sets must be disjoint)"
                )));
            }
            symbol_names.push(name.clone());
            observable.push(obs);
        }
        let mut fault = vec![false; symbol_names.len()];
        for name in &self.faults {
            let sym = *symbol_lookup
                .get(name)
                .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
            if observable[sym.index()] {
                return Err(Error::InvalidPlant(format!(
                    "fault event `{name}` must be unobservable"
                )));
            }
            fault[sym.index()] = true;
        }
        if self.initial.is_empty() {
            return Err(Error::InvalidPlant("initial state set is empty".into()));
        }
        let mut initial = StateSet::new();
        for name in &self.initial {
            let x = *state_lookup
                .get(name)
                .ok_or_else(|| Error::UnknownState(name.clone()))?;
            initial.insert(x);
        }
        let mut out: Vec<Vec<(Symbol, StateId)>> = vec![Vec::new(); self.states.len()];
        for (from, event, to) in &self.transitions {
            let x = *state_lookup
                .get(from)
                .ok_or_else(|| Error::UnknownState(from.clone()))?;
            let y = *state_lookup
                .get(to)
                .ok_or_else(|| Error::UnknownState(to.clone()))?;
            let e = *symbol_lookup
                .get(event)
                .ok_or_else(|| Error::UnknownSymbol(event.clone()))?;
            out[x.index()].push((e, y));
        }
        for edges in &mut out {
            edges.sort_unstable();
            edges.dedup();
        }
        Ok(PlantNfa {
            state_names: self.states,
            symbol_names,
            observable,
            fault,
            initial,
            out,
            state_lookup,
            symbol_lookup,
        })
    }
}

fn check_name(name: &str, what: &str) -> Result<()> {
    if RESERVED_NAMES.contains(&name) || name.chars().any(char::is_whitespace) {
        return Err(Error::InvalidPlant(format!(
            "`{name}` is not a legal {what} name"
        )));
    }
    Ok(())
}

impl PlantNfa {
    pub fn builder() -> PlantBuilder {
        PlantBuilder::new()
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.symbol_names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.state_names.len() as u32).map(StateId)
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.symbol_names.len() as u32).map(Symbol)
    }

    pub fn observable_symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.symbols().filter(|s| self.is_observable(*s))
    }

    pub fn unobservable_symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.symbols().filter(|s| !self.is_observable(*s))
    }

    pub fn fault_symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.symbols().filter(|s| self.is_fault(*s))
    }

    pub fn is_observable(&self, s: Symbol) -> bool {
        self.observable[s.index()]
    }

    pub fn is_fault(&self, s: Symbol) -> bool {
        self.fault[s.index()]
    }

    pub fn initial(&self) -> &StateSet {
        &self.initial
    }

    pub fn state(&self, name: &str) -> Result<StateId> {
        self.state_lookup
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn symbol(&self, name: &str) -> Result<Symbol> {
        self.symbol_lookup
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    /// Resolves a name that must denote an observable event.
    pub fn observable_symbol(&self, name: &str) -> Result<Symbol> {
        let s = self.symbol(name)?;
        if !self.is_observable(s) {
            return Err(Error::NotObservable(name.to_string()));
        }
        Ok(s)
    }

    /// Resolves a whitespace-separated list of symbol names.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Symbol>> {
        text.split_whitespace().map(|n| self.symbol(n)).collect()
    }

    pub fn state_name(&self, x: StateId) -> &str {
        &self.state_names[x.index()]
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        &self.symbol_names[s.index()]
    }

    pub fn render_set(&self, set: &StateSet) -> String {
        let names: Vec<&str> = set.iter().map(|&x| self.state_name(x)).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn render_word(&self, word: &[Symbol]) -> String {
        let names: Vec<&str> = word.iter().map(|&s| self.symbol_name(s)).collect();
        names.join(" ")
    }

    /// Outgoing transitions of `x`, sorted by symbol then target.
    pub fn edges_from(&self, x: StateId) -> &[(Symbol, StateId)] {
        &self.out[x.index()]
    }

    pub fn successors(&self, x: StateId, s: Symbol) -> impl Iterator<Item = StateId> + '_ {
        let edges = &self.out[x.index()];
        let start = edges.partition_point(|&(e, _)| e < s);
        edges[start..]
            .iter()
            .take_while(move |&&(e, _)| e == s)
            .map(|&(_, y)| y)
    }

    /// All transitions `(x, σ, x')` in canonical order.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, Symbol, StateId)> + '_ {
        self.states()
            .flat_map(move |x| self.out[x.index()].iter().map(move |&(e, y)| (x, e, y)))
    }

    pub fn num_transitions(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    fn check_states<'a>(&self, set: impl IntoIterator<Item = &'a StateId>) -> Result<()> {
        for x in set {
            if x.index() >= self.num_states() {
                return Err(Error::UnknownState(format!("#{}", x.0)));
            }
        }
        Ok(())
    }

    fn check_symbols(&self, word: &[Symbol]) -> Result<()> {
        for s in word {
            if s.index() >= self.num_symbols() {
                return Err(Error::UnknownSymbol(format!("#{}", s.0)));
            }
        }
        Ok(())
    }

    fn check_observable(&self, word: &[Symbol]) -> Result<()> {
        self.check_symbols(word)?;
        for &s in word {
            if !self.is_observable(s) {
                return Err(Error::NotObservable(self.symbol_name(s).to_string()));
            }
        }
        Ok(())
    }

    /// Extended transition function over an arbitrary event string.
    pub fn step(&self, from: &StateSet, word: &[Symbol]) -> Result<StateSet> {
        self.check_states(from)?;
        self.check_symbols(word)?;
        let mut cur = from.clone();
        for &s in word {
            cur = cur.iter().flat_map(|&x| self.successors(x, s)).collect();
            if cur.is_empty() {
                break;
            }
        }
        Ok(cur)
    }

    /// Natural projection: erases unobservable events.
    pub fn project(&self, word: &[Symbol]) -> Result<Vec<Symbol>> {
        self.check_symbols(word)?;
        Ok(word
            .iter()
            .copied()
            .filter(|&s| self.is_observable(s))
            .collect())
    }

    /// States reachable from `from` through unobservable events only
    /// (including `from` itself).
    pub fn unobservable_closure(&self, from: &StateSet) -> StateSet {
        let mut seen = from.clone();
        let mut stack: Vec<StateId> = from.iter().copied().collect();
        while let Some(x) = stack.pop() {
            for &(e, y) in self.edges_from(x) {
                if !self.is_observable(e) && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen
    }

    /// One observable step followed by unobservable closure; `from` is
    /// assumed to be closed already.
    fn observe_closed(&self, from: &StateSet, s: Symbol) -> StateSet {
        let next: StateSet = from.iter().flat_map(|&x| self.successors(x, s)).collect();
        self.unobservable_closure(&next)
    }

    /// States consistent with observing `word` from some state of `from`.
    pub fn reach(&self, from: &StateSet, word: &[Symbol]) -> Result<StateSet> {
        self.check_states(from)?;
        self.check_observable(word)?;
        Ok(self.reach_unchecked(from, word))
    }

    pub(crate) fn reach_unchecked(&self, from: &StateSet, word: &[Symbol]) -> StateSet {
        let mut cur = self.unobservable_closure(from);
        for &s in word {
            if cur.is_empty() {
                break;
            }
            cur = self.observe_closed(&cur, s);
        }
        cur
    }

    /// Reach from a single state; the building block of every product.
    pub(crate) fn reach_one(&self, x: StateId, word: &[Symbol]) -> StateSet {
        self.reach_unchecked(&StateSet::from([x]), word)
    }

    /// Finds a cycle made only of unobservable transitions, if any.
    pub fn unobservable_cycle(&self) -> Option<Vec<(StateId, Symbol, StateId)>> {
        let triples: Vec<(StateId, Symbol, StateId)> = self
            .transitions()
            .filter(|&(_, e, _)| !self.is_observable(e))
            .collect();
        let edges: Vec<(usize, usize)> = triples
            .iter()
            .map(|&(x, _, y)| (x.index(), y.index()))
            .collect();
        let mut out = vec![Vec::new(); self.num_states()];
        for (i, &(s, _)) in edges.iter().enumerate() {
            out[s].push(i);
        }
        graph::find_cycle(&out, &edges).map(|c| c.into_iter().map(|e| triples[e]).collect())
    }

    pub fn check_no_unobservable_cycles(&self) -> Result<(), PreconditionViolation> {
        match self.unobservable_cycle() {
            None => Ok(()),
            Some(cycle) => Err(PreconditionViolation::UnobservableCycle {
                cycle: cycle
                    .into_iter()
                    .map(|(x, e, y)| WitnessStep {
                        from: self.state_name(x).to_string(),
                        event: self.symbol_name(e).to_string(),
                        to: self.state_name(y).to_string(),
                    })
                    .collect(),
            }),
        }
    }

    /// States reachable from the initial set by any event string.
    pub fn reachable_states(&self) -> StateSet {
        let mut seen = self.initial.clone();
        let mut stack: Vec<StateId> = seen.iter().copied().collect();
        while let Some(x) = stack.pop() {
            for &(_, y) in self.edges_from(x) {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen
    }

    /// First reachable state without outgoing transitions, if any.
    pub fn dead_state(&self) -> Option<StateId> {
        self.reachable_states()
            .into_iter()
            .find(|&x| self.edges_from(x).is_empty())
    }

    pub fn check_liveness(&self) -> Result<(), PreconditionViolation> {
        match self.dead_state() {
            None => Ok(()),
            Some(x) => Err(PreconditionViolation::NotLive {
                state: self.state_name(x).to_string(),
            }),
        }
    }
}

/// Subset-construction observer over the observable alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObserverDfa {
    states: Vec<StateSet>,
    index: BTreeMap<StateSet, usize>,
    transitions: Vec<BTreeMap<Symbol, usize>>,
}

impl ObserverDfa {
    /// Accessible part of the observer, starting from the unobservable
    /// closure of the initial states. Empty successor sets are omitted.
    pub fn build(nfa: &PlantNfa) -> Self {
        let observable: Vec<Symbol> = nfa.observable_symbols().collect();
        let init = nfa.unobservable_closure(nfa.initial());
        let mut obs = ObserverDfa {
            states: vec![init.clone()],
            index: BTreeMap::from([(init, 0)]),
            transitions: vec![BTreeMap::new()],
        };
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for &s in &observable {
                let next = nfa.observe_closed(&obs.states[i], s);
                if next.is_empty() {
                    continue;
                }
                let j = match obs.index.get(&next) {
                    Some(&j) => j,
                    None => {
                        let j = obs.states.len();
                        obs.index.insert(next.clone(), j);
                        obs.states.push(next);
                        obs.transitions.push(BTreeMap::new());
                        queue.push_back(j);
                        j
                    }
                };
                obs.transitions[i].insert(s, j);
            }
        }
        obs
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &StateSet {
        &self.states[i]
    }

    pub fn states(&self) -> &[StateSet] {
        &self.states
    }

    pub fn index_of(&self, set: &StateSet) -> Option<usize> {
        self.index.get(set).copied()
    }

    pub fn next(&self, i: usize, s: Symbol) -> Option<usize> {
        self.transitions[i].get(&s).copied()
    }

    pub fn transitions_from(&self, i: usize) -> impl Iterator<Item = (Symbol, usize)> + '_ {
        self.transitions[i].iter().map(|(&s, &j)| (s, j))
    }

    /// Runs the observer on `word`; `None` if the word leaves the
    /// observable language.
    pub fn run(&self, word: &[Symbol]) -> Option<&StateSet> {
        let mut cur = self.initial();
        for &s in word {
            cur = self.next(cur, s)?;
        }
        Some(&self.states[cur])
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
