//! Least-cost state estimation under tampered observations.
//!
//! The explicit construction synchronizes the plant with the costed
//! observation DFA ([`ProductAutomaton::build`]), prunes it to minimum-cost
//! copies ([`ProductAutomaton::reduce`]) and reads the estimate off the final
//! stage ([`ProductAutomaton::ending_estimates`]). [`estimate_least_cost`]
//! computes the same estimate with a stage-by-stage cost relaxation that
//! never materializes the product.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, VecDeque};

use crate::attack::{AttackLabel, AttackModel, Cost};
use crate::automata::{PlantNfa, StateId, StateSet, Symbol};
use crate::error::{Error, Result};
use crate::matching::{CostedObservationDfa, StageCost};

/// A state `(x, stage, cost)` of the synchronized product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    pub plant_state: StateId,
    pub stage: usize,
    pub cost: Cost,
}

/// Accessible synchronization of a plant with a costed observation DFA.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductAutomaton {
    final_stage: usize,
    bound: Cost,
    states: Vec<ProductState>,
    index: HashMap<ProductState, usize>,
    initial: Vec<usize>,
    edges: Vec<(usize, AttackLabel, usize)>,
}

impl ProductAutomaton {
    /// Builds `AC(plant ‖ gsc)`. Plain labels move the plant by the
    /// observed symbol; attacked labels move it by the attacker projection
    /// (so insertions only take unobservable steps).
    pub fn build(plant: &PlantNfa, gsc: &CostedObservationDfa) -> Result<Self> {
        check_alphabet(plant, gsc)?;
        let mut moves: HashMap<(StateId, Option<Symbol>), Vec<StateId>> = HashMap::new();
        let mut product = ProductAutomaton {
            final_stage: gsc.final_stage(),
            bound: gsc.bound(),
            states: Vec::new(),
            index: HashMap::new(),
            initial: Vec::new(),
            edges: Vec::new(),
        };
        // Track which gsc state each product state sits on.
        let mut gsc_of: Vec<usize> = Vec::new();
        let mut queue = VecDeque::new();
        let start = gsc.state(gsc.initial());
        for x in plant.unobservable_closure(plant.initial()) {
            let (i, fresh) = product.intern(ProductState {
                plant_state: x,
                stage: start.stage,
                cost: start.cost,
            });
            if fresh {
                gsc_of.push(gsc.initial());
                product.initial.push(i);
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            let x = product.states[i].plant_state;
            for &(label, q) in gsc.edges_from(gsc_of[i]) {
                let sc = gsc.state(q);
                let targets = moves.entry((x, label.original())).or_insert_with(|| {
                    let word: Vec<Symbol> = label.original().into_iter().collect();
                    plant.reach_one(x, &word).into_iter().collect()
                });
                for &y in targets.iter() {
                    let (j, fresh) = product.intern(ProductState {
                        plant_state: y,
                        stage: sc.stage,
                        cost: sc.cost,
                    });
                    if fresh {
                        gsc_of.push(q);
                        queue.push_back(j);
                    }
                    product.edges.push((i, label, j));
                }
            }
        }
        let limit = plant.num_states() * (product.final_stage + 1) * (product.bound as usize + 1);
        assert!(
            product.states.len() <= limit,
            "product has {} states, exceeding |X|(|w|+1)(B+1) = {limit}",
            product.states.len()
        );
        Ok(product)
    }

    fn intern(&mut self, s: ProductState) -> (usize, bool) {
        if let Some(&i) = self.index.get(&s) {
            return (i, false);
        }
        let i = self.states.len();
        self.states.push(s);
        self.index.insert(s, i);
        (i, true)
    }

    /// Keeps, for every `(x, stage)`, only the cheapest copy, together with
    /// the transitions among kept states, then re-takes the accessible part.
    pub fn reduce(&self) -> Self {
        let mut best: HashMap<(StateId, usize), Cost> = HashMap::new();
        for s in &self.states {
            let e = best.entry((s.plant_state, s.stage)).or_insert(s.cost);
            *e = (*e).min(s.cost);
        }
        let keep = |i: usize| {
            let s = self.states[i];
            best[&(s.plant_state, s.stage)] == s.cost
        };
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.states.len()];
        for (e, &(i, _, j)) in self.edges.iter().enumerate() {
            if keep(i) && keep(j) {
                out[i].push(e);
            }
        }
        let mut reduced = ProductAutomaton {
            final_stage: self.final_stage,
            bound: self.bound,
            states: Vec::new(),
            index: HashMap::new(),
            initial: Vec::new(),
            edges: Vec::new(),
        };
        let mut remap: Vec<Option<usize>> = vec![None; self.states.len()];
        let mut queue = VecDeque::new();
        for &i in self.initial.iter().filter(|&&i| keep(i)) {
            let (k, _) = reduced.intern(self.states[i]);
            remap[i] = Some(k);
            reduced.initial.push(k);
            queue.push_back(i);
        }
        while let Some(i) = queue.pop_front() {
            for &e in &out[i] {
                let (_, label, j) = self.edges[e];
                let k = match remap[j] {
                    Some(k) => k,
                    None => {
                        let (k, _) = reduced.intern(self.states[j]);
                        remap[j] = Some(k);
                        queue.push_back(j);
                        k
                    }
                };
                reduced.edges.push((remap[i].unwrap(), label, k));
            }
        }
        reduced
    }

    /// Least-cost `(x, c)` pairs at the final stage. Pairs whose cost
    /// exceeds `budget` (the saturated sentinel when `bound = budget + 1`)
    /// are reported separately as over budget.
    pub fn ending_estimates(&self, received: &[Symbol], budget: Cost) -> Estimate {
        let mut least: BTreeMap<StateId, Cost> = BTreeMap::new();
        for s in self.states.iter().filter(|s| s.stage == self.final_stage) {
            let e = least.entry(s.plant_state).or_insert(s.cost);
            *e = (*e).min(s.cost);
        }
        Estimate::split(received, budget, least)
    }

    pub fn final_stage(&self) -> usize {
        self.final_stage
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

    pub fn states(&self) -> &[ProductState] {
        &self.states
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn edges(&self) -> &[(usize, AttackLabel, usize)] {
        &self.edges
    }

    pub fn index_of(&self, s: ProductState) -> Option<usize> {
        self.index.get(&s).copied()
    }

    /// Targets of `label` from `s`.
    pub fn successors(&self, s: ProductState, label: AttackLabel) -> BTreeSet<ProductState> {
        let Some(i) = self.index_of(s) else {
            return BTreeSet::new();
        };
        self.edges
            .iter()
            .filter(|&&(a, l, _)| a == i && l == label)
            .map(|&(_, _, b)| self.states[b])
            .collect()
    }
}

fn check_alphabet(plant: &PlantNfa, gsc: &CostedObservationDfa) -> Result<()> {
    let observable = |s: Symbol| s.index() < plant.num_symbols() && plant.is_observable(s);
    let labels = (0..gsc.len()).flat_map(|i| gsc.edges_from(i).iter().map(|e| e.0));
    for label in labels {
        let ok = [label.original(), label.reported()]
            .into_iter()
            .flatten()
            .all(observable);
        if !ok {
            return Err(Error::AlphabetMismatch(format!(
                "observation machine label {label} is not over the plant's observable events"
            )));
        }
    }
    if !gsc.word().iter().all(|&s| observable(s)) {
        return Err(Error::AlphabetMismatch(
            "received word is not over the plant's observable events".into(),
        ));
    }
    Ok(())
}

/// Least-cost state estimate for one received word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Estimate {
    pub received: Vec<Symbol>,
    pub budget: Cost,
    /// Plant states consistent within budget, with their least cost.
    pub entries: BTreeMap<StateId, Cost>,
    /// States only explainable by spending more than the budget.
    pub over_budget: BTreeSet<StateId>,
    /// One minimum-cost matching sequence per estimated state (witness mode).
    pub witnesses: BTreeMap<StateId, Vec<AttackLabel>>,
}

impl Estimate {
    fn split(received: &[Symbol], budget: Cost, least: BTreeMap<StateId, Cost>) -> Self {
        let (entries, over): (BTreeMap<_, _>, BTreeMap<_, _>) =
            least.into_iter().partition(|&(_, c)| c <= budget);
        Estimate {
            received: received.to_vec(),
            budget,
            entries,
            over_budget: over.into_keys().collect(),
            witnesses: BTreeMap::new(),
        }
    }

    pub fn states(&self) -> StateSet {
        self.entries.keys().copied().collect()
    }

    pub fn cost(&self, x: StateId) -> Option<Cost> {
        self.entries.get(&x).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Least-cost estimate of the plant state after receiving `received`,
/// assuming the attacker spent at most `budget`.
pub fn estimate_least_cost(
    plant: &PlantNfa,
    model: &AttackModel,
    received: &[Symbol],
    budget: Cost,
) -> Result<Estimate> {
    Sweep::run(plant, model, received, budget, false)
}

/// Like [`estimate_least_cost`], also returning one cheapest matching
/// sequence per estimated state.
pub fn estimate_with_witnesses(
    plant: &PlantNfa,
    model: &AttackModel,
    received: &[Symbol],
    budget: Cost,
) -> Result<Estimate> {
    Sweep::run(plant, model, received, budget, true)
}

/// Explicit route: build the product, reduce it, read the final stage.
pub fn estimate_via_product(
    plant: &PlantNfa,
    model: &AttackModel,
    received: &[Symbol],
    budget: Cost,
) -> Result<Estimate> {
    let gsc = CostedObservationDfa::build(plant, received, model, budget.saturating_add(1))?;
    let reduced = ProductAutomaton::build(plant, &gsc)?.reduce();
    Ok(reduced.ending_estimates(received, budget))
}

type Pred = Option<(usize, StateId, AttackLabel)>;

/// Forward relaxation over stages. Within a stage only deletion labels
/// apply and each costs at least one unit, so a Dijkstra pass settles it.
struct Sweep<'a> {
    plant: &'a PlantNfa,
    bound: Cost,
    /// `steps[x][σ]`: plant states reachable from `x` observing exactly σ.
    steps: Vec<HashMap<Symbol, Vec<StateId>>>,
    closures: Vec<Vec<StateId>>,
    cost: Vec<Vec<Option<Cost>>>,
    pred: Vec<Vec<Pred>>,
}

impl<'a> Sweep<'a> {
    fn run(
        plant: &'a PlantNfa,
        model: &AttackModel,
        received: &[Symbol],
        budget: Cost,
        witness: bool,
    ) -> Result<Estimate> {
        model.validate_against(plant)?;
        for &s in received {
            if s.index() >= plant.num_symbols() {
                return Err(Error::UnknownSymbol(format!("#{}", s.0)));
            }
            if !plant.is_observable(s) {
                return Err(Error::NotObservable(plant.symbol_name(s).to_string()));
            }
        }
        let n = plant.num_states();
        let observable: Vec<Symbol> = plant.observable_symbols().collect();
        let steps = plant
            .states()
            .map(|x| {
                observable
                    .iter()
                    .map(|&s| (s, plant.reach_one(x, &[s]).into_iter().collect()))
                    .collect()
            })
            .collect();
        let closures = plant
            .states()
            .map(|x| plant.reach_one(x, &[]).into_iter().collect())
            .collect();
        let stages = received.len() + 1;
        let mut sweep = Sweep {
            plant,
            bound: budget.saturating_add(1),
            steps,
            closures,
            cost: vec![vec![None; n]; stages],
            pred: vec![vec![None; n]; stages],
        };
        for x in plant.unobservable_closure(plant.initial()) {
            sweep.cost[0][x.index()] = Some(0);
        }
        let deletions: Vec<(AttackLabel, Cost)> = model.deletion_labels().collect();
        for stage in 0..stages {
            sweep.settle_deletions(stage, &deletions);
            if let Some(&next) = received.get(stage) {
                let labels = model.explaining_labels(next);
                for x in plant.states() {
                    let Some(c) = sweep.cost[stage][x.index()] else {
                        continue;
                    };
                    for &(label, lc) in &labels {
                        let nc = c.saturating_add(lc).min(sweep.bound);
                        for y in sweep.targets(x, label) {
                            sweep.relax(stage + 1, y, nc, (stage, x, label));
                        }
                    }
                }
            }
        }
        let least: BTreeMap<StateId, Cost> = sweep.cost[stages - 1]
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (StateId(i as u32), c)))
            .collect();
        let mut estimate = Estimate::split(received, budget, least);
        if witness {
            for &x in estimate.entries.keys() {
                estimate.witnesses.insert(x, sweep.witness(stages - 1, x));
            }
        }
        Ok(estimate)
    }

    fn targets(&self, x: StateId, label: AttackLabel) -> Vec<StateId> {
        match label.original() {
            None => self.closures[x.index()].clone(),
            Some(s) => self.steps[x.index()].get(&s).cloned().unwrap_or_default(),
        }
    }

    fn relax(
        &mut self,
        stage: usize,
        y: StateId,
        c: Cost,
        from: (usize, StateId, AttackLabel),
    ) -> bool {
        let slot = &mut self.cost[stage][y.index()];
        if slot.is_none_or(|old| c < old) {
            *slot = Some(c);
            self.pred[stage][y.index()] = Some(from);
            return true;
        }
        false
    }

    fn settle_deletions(&mut self, stage: usize, deletions: &[(AttackLabel, Cost)]) {
        if deletions.is_empty() {
            return;
        }
        let mut heap: BinaryHeap<Reverse<(Cost, StateId)>> = self.cost[stage]
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| Reverse((c, StateId(i as u32)))))
            .collect();
        while let Some(Reverse((c, x))) = heap.pop() {
            if self.cost[stage][x.index()] != Some(c) {
                continue;
            }
            for &(label, dc) in deletions {
                let nc = c.saturating_add(dc).min(self.bound);
                for y in self.targets(x, label) {
                    if self.relax(stage, y, nc, (stage, x, label)) {
                        heap.push(Reverse((nc, y)));
                    }
                }
            }
        }
    }

    fn witness(&self, stage: usize, x: StateId) -> Vec<AttackLabel> {
        let mut labels = Vec::new();
        let (mut stage, mut x) = (stage, x);
        while let Some((ps, px, label)) = self.pred[stage][x.index()] {
            labels.push(label);
            stage = ps;
            x = px;
        }
        labels.reverse();
        debug_assert!(self.plant.num_states() > 0);
        labels
    }
}

/// Convenience used by the DOT exporter and tests: the `(stage, cost)`
/// coordinates of a product state.
impl From<ProductState> for StageCost {
    fn from(s: ProductState) -> Self {
        StageCost {
            stage: s.stage,
            cost: s.cost,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::attacker_projection;
    use crate::automata::ObserverDfa;
    use crate::fixtures;

    fn ps(g: &PlantNfa, x: &str, stage: usize, cost: Cost) -> ProductState {
        ProductState {
            plant_state: g.state(x).unwrap(),
            stage,
            cost,
        }
    }

    #[test]
    fn substitution_edge_in_full_product_is_pruned() {
        let g = fixtures::fig1_plant();
        let m = fixtures::table1_attacks(&g);
        let w = g.parse_word("β α α").unwrap();
        let gsc = CostedObservationDfa::build(&g, &w, &m, 3).unwrap();
        let h = ProductAutomaton::build(&g, &gsc).unwrap();
        let (a, b) = (g.symbol("α").unwrap(), g.symbol("β").unwrap());
        let t_ab = AttackLabel::Sub { from: a, to: b };
        let from = ps(&g, "1", 0, 0);
        let expected: BTreeSet<_> = [ps(&g, "2", 1, 2), ps(&g, "3", 1, 2)].into();
        assert_eq!(h.successors(from, t_ab), expected);

        let rh = h.reduce();
        assert!(rh.successors(from, t_ab).is_empty());
        assert!(rh.index_of(ps(&g, "2", 1, 0)).is_some());
        assert!(rh.index_of(ps(&g, "3", 1, 0)).is_some());
        assert!(rh.index_of(ps(&g, "2", 1, 2)).is_none());
        // Insertions from 2 and 3 are dominated as well.
        assert!(rh
            .successors(ps(&g, "2", 0, 0), AttackLabel::Ins(b))
            .is_empty());
        assert!(rh
            .successors(ps(&g, "3", 0, 0), AttackLabel::Ins(b))
            .is_empty());
    }

    #[test]
    fn reduction_is_identity_without_duplicates() {
        let g = fixtures::fig1_plant();
        let w = g.parse_word("α β").unwrap();
        let gsc = CostedObservationDfa::build(&g, &w, &AttackModel::empty(), 1).unwrap();
        let h = ProductAutomaton::build(&g, &gsc).unwrap();
        let rh = h.reduce();
        assert_eq!(rh.len(), h.len());
        assert_eq!(rh.edges().len(), h.edges().len());
    }

    #[test]
    fn empty_model_matches_observer() {
        let g = fixtures::fig1_plant();
        let obs = ObserverDfa::build(&g);
        for text in ["", "α", "α β α", "β α α", "γ γ", "β β β"] {
            let w = g.parse_word(text).unwrap();
            let est = estimate_least_cost(&g, &AttackModel::empty(), &w, 0).unwrap();
            let expected = obs.run(&w).cloned().unwrap_or_default();
            assert_eq!(est.states(), expected, "word {text:?}");
            assert!(est.entries.values().all(|&c| c == 0));
            assert_eq!(
                estimate_via_product(&g, &AttackModel::empty(), &w, 0).unwrap(),
                est
            );
        }
    }

    #[test]
    fn infeasible_word_gives_empty_estimate() {
        let g = fixtures::fig1_plant();
        let w = g.parse_word("γ γ").unwrap();
        let est = estimate_least_cost(&g, &fixtures::table1_attacks(&g), &w, 0).unwrap();
        assert!(est.is_empty());
    }

    #[test]
    fn witnesses_realize_reported_costs() {
        let g = fixtures::fig1_plant();
        let m = fixtures::table1_attacks(&g);
        let w = g.parse_word("β α α").unwrap();
        let est = estimate_with_witnesses(&g, &m, &w, 4).unwrap();
        assert_eq!(est.witnesses.len(), est.entries.len());
        for (&x, labels) in &est.witnesses {
            assert_eq!(m.sequence_cost(labels).unwrap(), est.entries[&x]);
            assert_eq!(crate::attack::attacked_image(labels), w);
            let reached = g
                .reach(&g.initial().clone(), &attacker_projection(labels))
                .unwrap();
            assert!(reached.contains(&x));
        }
    }

    #[test]
    fn budget_monotonicity_on_fixture() {
        let g = fixtures::fig1_plant();
        let m = fixtures::table1_attacks(&g);
        let w = g.parse_word("β α α").unwrap();
        let low = estimate_least_cost(&g, &m, &w, 0).unwrap();
        let high = estimate_least_cost(&g, &m, &w, 2).unwrap();
        for (x, c) in &low.entries {
            assert!(high.entries[x] <= *c);
        }
    }
}
