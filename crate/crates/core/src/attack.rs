//! Attacker capabilities and costs, relabeled matching sequences, and the
//! brute-force enumerators of tampered and matching sequence sets.
//!
//! The enumerators exist for testing and small inputs; estimation itself
//! goes through the automaton constructions in [`crate::matching`] and
//! [`crate::estimator`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::automata::{PlantNfa, Symbol};
use crate::error::{Error, Result};

/// Attack costs are natural numbers; every individual attack costs at least 1.
pub type Cost = u32;

/// Deletable, insertable and substitutable observable events with their
/// per-action costs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AttackModel {
    deletions: BTreeMap<Symbol, Cost>,
    insertions: BTreeMap<Symbol, Cost>,
    /// Keyed by (original, reported).
    substitutions: BTreeMap<(Symbol, Symbol), Cost>,
}

/// A symbol of a matching sequence: either a plainly observed event or an
/// attacked label that names the tampering it undoes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttackLabel {
    Plain(Symbol),
    /// `d_σ`: σ occurred but its observation was deleted.
    Del(Symbol),
    /// `i_σ`: the reported σ was inserted by the attacker.
    Ins(Symbol),
    /// `t_{σσ'}`: σ occurred and was reported as σ'.
    Sub {
        from: Symbol,
        to: Symbol,
    },
}

/// A matching sequence together with its total attack cost.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CostedSequence {
    pub labels: Vec<AttackLabel>,
    pub cost: Cost,
}

impl AttackLabel {
    pub fn is_plain(self) -> bool {
        matches!(self, AttackLabel::Plain(_))
    }

    /// Event that actually occurred in the plant, if any.
    pub fn original(self) -> Option<Symbol> {
        match self {
            AttackLabel::Plain(s) | AttackLabel::Del(s) => Some(s),
            AttackLabel::Sub { from, .. } => Some(from),
            AttackLabel::Ins(_) => None,
        }
    }

    /// Event that reached the estimator, if any.
    pub fn reported(self) -> Option<Symbol> {
        match self {
            AttackLabel::Plain(s) | AttackLabel::Ins(s) => Some(s),
            AttackLabel::Sub { to, .. } => Some(to),
            AttackLabel::Del(_) => None,
        }
    }

    pub fn render(self, plant: &PlantNfa) -> String {
        let n = |s: Symbol| plant.symbol_name(s);
        match self {
            AttackLabel::Plain(s) => n(s).to_string(),
            AttackLabel::Del(s) => format!("d_{{{}}}", n(s)),
            AttackLabel::Ins(s) => format!("i_{{{}}}", n(s)),
            AttackLabel::Sub { from, to } => format!("t_{{{},{}}}", n(from), n(to)),
        }
    }
}

impl fmt::Display for AttackLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AttackLabel::Plain(s) => write!(f, "{}", s.0),
            AttackLabel::Del(s) => write!(f, "d_{}", s.0),
            AttackLabel::Ins(s) => write!(f, "i_{}", s.0),
            AttackLabel::Sub { from, to } => write!(f, "t_{}_{}", from.0, to.0),
        }
    }
}

/// Recovers the pre-attack observation encoded by a matching sequence.
pub fn attacker_projection(labels: &[AttackLabel]) -> Vec<Symbol> {
    labels.iter().filter_map(|l| l.original()).collect()
}

/// Replays the attacks encoded by a matching sequence, yielding the
/// sequence the estimator received.
pub fn attacked_image(labels: &[AttackLabel]) -> Vec<Symbol> {
    labels.iter().filter_map(|l| l.reported()).collect()
}

impl AttackModel {
    /// The model with no attacker capabilities.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn builder(plant: &PlantNfa) -> AttackModelBuilder<'_> {
        AttackModelBuilder {
            plant,
            model: AttackModel::default(),
            error: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.deletions.is_empty() && self.insertions.is_empty() && self.substitutions.is_empty()
    }

    pub fn add_deletion(&mut self, s: Symbol, cost: Cost) -> Result<()> {
        positive(cost)?;
        if self.deletions.insert(s, cost).is_some() {
            return Err(Error::InvalidAttackModel(format!(
                "deletion of symbol {} given twice",
                s.0
            )));
        }
        Ok(())
    }

    pub fn add_insertion(&mut self, s: Symbol, cost: Cost) -> Result<()> {
        positive(cost)?;
        if self.insertions.insert(s, cost).is_some() {
            return Err(Error::InvalidAttackModel(format!(
                "insertion of symbol {} given twice",
                s.0
            )));
        }
        Ok(())
    }

    pub fn add_substitution(&mut self, from: Symbol, to: Symbol, cost: Cost) -> Result<()> {
        positive(cost)?;
        if from == to {
            return Err(Error::InvalidAttackModel(
                "identity substitutions are not attacks".into(),
            ));
        }
        if self.substitutions.insert((from, to), cost).is_some() {
            return Err(Error::InvalidAttackModel(format!(
                "substitution {}->{} given twice",
                from.0, to.0
            )));
        }
        Ok(())
    }

    pub fn deletions(&self) -> &BTreeMap<Symbol, Cost> {
        &self.deletions
    }

    pub fn insertions(&self) -> &BTreeMap<Symbol, Cost> {
        &self.insertions
    }

    pub fn substitutions(&self) -> &BTreeMap<(Symbol, Symbol), Cost> {
        &self.substitutions
    }

    pub fn deletion_cost(&self, s: Symbol) -> Option<Cost> {
        self.deletions.get(&s).copied()
    }

    pub fn insertion_cost(&self, s: Symbol) -> Option<Cost> {
        self.insertions.get(&s).copied()
    }

    pub fn substitution_cost(&self, from: Symbol, to: Symbol) -> Option<Cost> {
        self.substitutions.get(&(from, to)).copied()
    }

    /// Largest individual attack cost (0 for the empty model).
    pub fn max_cost(&self) -> Cost {
        self.deletions
            .values()
            .chain(self.insertions.values())
            .chain(self.substitutions.values())
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Every symbol mentioned by the model.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.deletions
            .keys()
            .chain(self.insertions.keys())
            .copied()
            .chain(self.substitutions.keys().flat_map(|&(a, b)| [a, b]))
            .collect()
    }

    /// Checks that the model only mentions observable events of `plant`.
    pub fn validate_against(&self, plant: &PlantNfa) -> Result<()> {
        for s in self.symbols() {
            if s.index() >= plant.num_symbols() {
                return Err(Error::AlphabetMismatch(format!(
                    "attack model mentions unknown symbol #{}",
                    s.0
                )));
            }
            if !plant.is_observable(s) {
                return Err(Error::AlphabetMismatch(format!(
                    "attack model mentions unobservable event `{}`",
                    plant.symbol_name(s)
                )));
            }
        }
        Ok(())
    }

    /// Cost of one label under this model.
    pub fn label_cost(&self, label: AttackLabel) -> Result<Cost> {
        let cost = match label {
            AttackLabel::Plain(_) => Some(0),
            AttackLabel::Del(s) => self.deletion_cost(s),
            AttackLabel::Ins(s) => self.insertion_cost(s),
            AttackLabel::Sub { from, to } => self.substitution_cost(from, to),
        };
        cost.ok_or_else(|| Error::LabelNotPermitted(label.to_string()))
    }

    pub fn permits(&self, label: AttackLabel) -> bool {
        self.label_cost(label).is_ok()
    }

    /// Total cost of a matching sequence.
    pub fn sequence_cost(&self, labels: &[AttackLabel]) -> Result<Cost> {
        labels
            .iter()
            .try_fold(0, |acc: Cost, &l| Ok(acc + self.label_cost(l)?))
    }

    /// Deletion labels `d_σ`, in symbol order.
    pub fn deletion_labels(&self) -> impl Iterator<Item = (AttackLabel, Cost)> + '_ {
        self.deletions
            .iter()
            .map(|(&s, &c)| (AttackLabel::Del(s), c))
    }

    /// Labels that explain one reported symbol: the symbol itself, its
    /// insertion, and every substitution that reports it.
    pub fn explaining_labels(&self, reported: Symbol) -> Vec<(AttackLabel, Cost)> {
        let mut labels = vec![(AttackLabel::Plain(reported), 0)];
        if let Some(c) = self.insertion_cost(reported) {
            labels.push((AttackLabel::Ins(reported), c));
        }
        labels.extend(
            self.substitutions
                .iter()
                .filter(|(&(_, to), _)| to == reported)
                .map(|(&(from, to), &c)| (AttackLabel::Sub { from, to }, c)),
        );
        labels
    }

    /// Tampered versions of `observed` with total cost at most `budget`,
    /// each with the smallest cost that produces it, in canonical
    /// (cost, length, symbols) order.
    pub fn enumerate_tampered(
        &self,
        observed: &[Symbol],
        budget: Cost,
    ) -> Vec<(Vec<Symbol>, Cost)> {
        let mut found: BTreeMap<Vec<Symbol>, Cost> = BTreeMap::new();
        let mut buf = Vec::new();
        self.tamper_gap(observed, 0, 0, budget, &mut buf, &mut found);
        let mut out: Vec<_> = found.into_iter().collect();
        out.sort_by(|a, b| (a.1, a.0.len(), &a.0).cmp(&(b.1, b.0.len(), &b.0)));
        out
    }

    fn tamper_gap(
        &self,
        observed: &[Symbol],
        pos: usize,
        cost: Cost,
        budget: Cost,
        buf: &mut Vec<Symbol>,
        found: &mut BTreeMap<Vec<Symbol>, Cost>,
    ) {
        if pos == observed.len() {
            let best = found.entry(buf.clone()).or_insert(cost);
            *best = (*best).min(cost);
        }
        for (&s, &c) in &self.insertions {
            if cost + c <= budget {
                buf.push(s);
                self.tamper_gap(observed, pos, cost + c, budget, buf, found);
                buf.pop();
            }
        }
        if pos < observed.len() {
            let sym = observed[pos];
            buf.push(sym);
            self.tamper_gap(observed, pos + 1, cost, budget, buf, found);
            buf.pop();
            if let Some(c) = self.deletion_cost(sym) {
                if cost + c <= budget {
                    self.tamper_gap(observed, pos + 1, cost + c, budget, buf, found);
                }
            }
            for (&(from, to), &c) in self.substitutions.range((sym, Symbol(0))..) {
                if from != sym {
                    break;
                }
                if cost + c <= budget {
                    buf.push(to);
                    self.tamper_gap(observed, pos + 1, cost + c, budget, buf, found);
                    buf.pop();
                }
            }
        }
    }

    /// Matching sequences of `reported` with cost at most `budget`, in
    /// canonical (cost, length, labels) order.
    pub fn enumerate_matching(&self, reported: &[Symbol], budget: Cost) -> Vec<CostedSequence> {
        let explain: Vec<Vec<(AttackLabel, Cost)>> = reported
            .iter()
            .map(|&s| self.explaining_labels(s))
            .collect();
        let mut out = Vec::new();
        let mut buf = Vec::new();
        self.match_gap(&explain, 0, 0, budget, &mut buf, &mut out);
        out.sort_by(|a, b| {
            (a.cost, a.labels.len(), &a.labels).cmp(&(b.cost, b.labels.len(), &b.labels))
        });
        out
    }

    fn match_gap(
        &self,
        explain: &[Vec<(AttackLabel, Cost)>],
        pos: usize,
        cost: Cost,
        budget: Cost,
        buf: &mut Vec<AttackLabel>,
        out: &mut Vec<CostedSequence>,
    ) {
        if pos == explain.len() {
            out.push(CostedSequence {
                labels: buf.clone(),
                cost,
            });
        }
        for (label, c) in self.deletion_labels() {
            if cost + c <= budget {
                buf.push(label);
                self.match_gap(explain, pos, cost + c, budget, buf, out);
                buf.pop();
            }
        }
        if pos < explain.len() {
            for &(label, c) in &explain[pos] {
                if cost + c <= budget {
                    buf.push(label);
                    self.match_gap(explain, pos + 1, cost + c, budget, buf, out);
                    buf.pop();
                }
            }
        }
    }
}

fn positive(cost: Cost) -> Result<()> {
    if cost == 0 {
        return Err(Error::InvalidAttackModel(
            "attack costs must be strictly positive".into(),
        ));
    }
    Ok(())
}

/// Name-based constructor for [`AttackModel`] that validates every symbol
/// against a plant's observable alphabet.
pub struct AttackModelBuilder<'a> {
    plant: &'a PlantNfa,
    model: AttackModel,
    error: Option<Error>,
}

impl AttackModelBuilder<'_> {
    fn apply(mut self, f: impl FnOnce(&PlantNfa, &mut AttackModel) -> Result<()>) -> Self {
        if self.error.is_none() {
            if let Err(e) = f(self.plant, &mut self.model) {
                self.error = Some(e);
            }
        }
        self
    }

    pub fn delete(self, event: &str, cost: Cost) -> Self {
        self.apply(|p, m| m.add_deletion(p.observable_symbol(event)?, cost))
    }

    pub fn insert(self, event: &str, cost: Cost) -> Self {
        self.apply(|p, m| m.add_insertion(p.observable_symbol(event)?, cost))
    }

    pub fn substitute(self, from: &str, to: &str, cost: Cost) -> Self {
        self.apply(|p, m| {
            m.add_substitution(p.observable_symbol(from)?, p.observable_symbol(to)?, cost)
        })
    }

    pub fn build(self) -> Result<AttackModel> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.model),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn setup() -> (PlantNfa, AttackModel) {
        let g = fixtures::fig1_plant();
        let m = fixtures::table1_attacks(&g);
        (g, m)
    }

    fn sym(g: &PlantNfa, n: &str) -> Symbol {
        g.symbol(n).unwrap()
    }

    #[test]
    fn label_costs_from_table() {
        let (g, m) = setup();
        let (a, b) = (sym(&g, "α"), sym(&g, "β"));
        assert_eq!(
            m.label_cost(AttackLabel::Sub { from: a, to: b }).unwrap(),
            2
        );
        assert_eq!(m.label_cost(AttackLabel::Del(a)).unwrap(), 3);
        assert_eq!(m.label_cost(AttackLabel::Plain(b)).unwrap(), 0);
        assert!(matches!(
            m.label_cost(AttackLabel::Del(b)),
            Err(Error::LabelNotPermitted(_))
        ));
    }

    #[test]
    fn sequence_costs() {
        let (g, m) = setup();
        let (a, b, c) = (sym(&g, "α"), sym(&g, "β"), sym(&g, "γ"));
        let t_ca = AttackLabel::Sub { from: c, to: a };
        assert_eq!(
            m.sequence_cost(&[AttackLabel::Plain(b), t_ca, t_ca])
                .unwrap(),
            2
        );
        assert_eq!(m.sequence_cost(&[]).unwrap(), 0);
        assert_eq!(
            m.sequence_cost(&[
                AttackLabel::Ins(b),
                AttackLabel::Plain(a),
                AttackLabel::Plain(a)
            ])
            .unwrap(),
            2
        );
    }

    #[test]
    fn projection_recovers_original() {
        let (g, _) = setup();
        let (a, b, c) = (sym(&g, "α"), sym(&g, "β"), sym(&g, "γ"));
        let seq = [
            AttackLabel::Plain(b),
            AttackLabel::Sub { from: c, to: a },
            AttackLabel::Plain(a),
        ];
        assert_eq!(attacker_projection(&seq), vec![b, c, a]);
        assert_eq!(attacked_image(&seq), vec![b, a, a]);
        let ins = [
            AttackLabel::Ins(b),
            AttackLabel::Plain(a),
            AttackLabel::Plain(a),
        ];
        assert_eq!(attacker_projection(&ins), vec![a, a]);
        let plain = [AttackLabel::Plain(c), AttackLabel::Plain(a)];
        assert_eq!(attacker_projection(&plain), vec![c, a]);
    }

    #[test]
    fn empty_model_enumerations_are_singletons() {
        let (g, _) = setup();
        let w = g.parse_word("α β γ").unwrap();
        let m = AttackModel::empty();
        assert_eq!(m.enumerate_tampered(&w, 5), vec![(w.clone(), 0)]);
        let matching = m.enumerate_matching(&w, 5);
        assert_eq!(matching.len(), 1);
        assert_eq!(matching[0].cost, 0);
        assert_eq!(attacker_projection(&matching[0].labels), w);
    }

    #[test]
    fn single_symbol_tampering() {
        let (g, m) = setup();
        let got = m.enumerate_tampered(&[sym(&g, "γ")], 1);
        assert_eq!(got, vec![(vec![sym(&g, "γ")], 0), (vec![sym(&g, "α")], 1)]);
    }

    #[test]
    fn model_validation() {
        let g = fixtures::fig1_plant();
        let zero = AttackModel::builder(&g).delete("α", 0).build();
        assert!(matches!(zero, Err(Error::InvalidAttackModel(_))));
        let ident = AttackModel::builder(&g).substitute("α", "α", 1).build();
        assert!(matches!(ident, Err(Error::InvalidAttackModel(_))));
        let unobs = AttackModel::builder(&g).insert("ζ", 1).build();
        assert!(matches!(unobs, Err(Error::NotObservable(_))));
    }
}
