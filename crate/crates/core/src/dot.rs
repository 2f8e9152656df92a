//! Graphviz renderings of every automaton in the crate.

use std::fmt::Write;

use crate::automata::{ObserverDfa, PlantNfa};
use crate::cmin::{ModifiedVerifier, Movers};
use crate::diagnoser::{CostedPlant, FVerifier};
use crate::estimator::ProductAutomaton;
use crate::matching::CostedObservationDfa;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

struct Dot {
    out: String,
}

impl Dot {
    fn new(name: &str) -> Self {
        let mut out = String::new();
        writeln!(out, "digraph {} {{", quote(name)).unwrap();
        out.push_str("  rankdir=LR;\n  node [shape=circle];\n");
        Dot { out }
    }

    fn node(&mut self, id: usize, label: &str, initial: bool) {
        writeln!(self.out, "  n{id} [label={}];", quote(label)).unwrap();
        if initial {
            writeln!(self.out, "  init{id} [shape=point];\n  init{id} -> n{id};").unwrap();
        }
    }

    fn edge(&mut self, from: usize, to: usize, label: &str) {
        writeln!(self.out, "  n{from} -> n{to} [label={}];", quote(label)).unwrap();
    }

    fn same_rank(&mut self, ids: impl IntoIterator<Item = usize>) {
        let ids: Vec<String> = ids.into_iter().map(|i| format!("n{i}")).collect();
        if !ids.is_empty() {
            writeln!(self.out, "  {{ rank=same; {}; }}", ids.join("; ")).unwrap();
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("}\n");
        self.out
    }
}

pub fn plant(g: &PlantNfa) -> String {
    let mut d = Dot::new("plant");
    for x in g.states() {
        d.node(x.index(), g.state_name(x), g.initial().contains(&x));
    }
    for (x, e, y) in g.transitions() {
        d.edge(x.index(), y.index(), g.symbol_name(e));
    }
    d.finish()
}

pub fn observer(g: &PlantNfa, obs: &ObserverDfa) -> String {
    let mut d = Dot::new("observer");
    for (i, set) in obs.states().iter().enumerate() {
        d.node(i, &g.render_set(set), i == obs.initial());
    }
    for i in 0..obs.len() {
        for (s, j) in obs.transitions_from(i) {
            d.edge(i, j, g.symbol_name(s));
        }
    }
    d.finish()
}

/// Stages are laid out as columns.
pub fn observation_dfa(g: &PlantNfa, gsc: &CostedObservationDfa) -> String {
    let mut d = Dot::new("observation");
    for (i, sc) in gsc.states().iter().enumerate() {
        d.node(
            i,
            &format!("({},{})", sc.stage, sc.cost),
            i == gsc.initial(),
        );
    }
    for i in 0..gsc.len() {
        for &(label, j) in gsc.edges_from(i) {
            d.edge(i, j, &label.render(g));
        }
    }
    for stage in 0..=gsc.final_stage() {
        d.same_rank((0..gsc.len()).filter(|&i| gsc.state(i).stage == stage));
    }
    d.finish()
}

pub fn product(g: &PlantNfa, h: &ProductAutomaton) -> String {
    let mut d = Dot::new("product");
    for (i, s) in h.states().iter().enumerate() {
        let label = format!("({},({},{}))", g.state_name(s.plant_state), s.stage, s.cost);
        d.node(i, &label, h.initial().contains(&i));
    }
    for &(i, label, j) in h.edges() {
        d.edge(i, j, &label.render(g));
    }
    for stage in 0..=h.final_stage() {
        d.same_rank((0..h.len()).filter(|&i| h.states()[i].stage == stage));
    }
    d.finish()
}

pub fn costed_plant(g: &PlantNfa, gm: &CostedPlant) -> String {
    let mut d = Dot::new("costed_plant");
    for i in 0..gm.len() {
        d.node(i, &gm.render_state(g, i), gm.initial().contains(&i));
    }
    for e in gm.edges() {
        d.edge(e.from, e.to, &CostedPlant::render_event(g, e.event));
    }
    d.finish()
}

pub fn verifier(g: &PlantNfa, gm: &CostedPlant, v: &FVerifier) -> String {
    let mut d = Dot::new("verifier");
    for (i, s) in v.states().iter().enumerate() {
        let label = format!(
            "({},{},{},{})",
            gm.render_state(g, s.left),
            s.left_label,
            gm.render_state(g, s.right),
            s.right_label
        );
        d.node(i, &label, v.initial().contains(&i));
    }
    for e in v.edges() {
        let side = |m: Option<usize>| match m {
            Some(m) => CostedPlant::render_event(g, gm.edges()[m].event),
            None => "ε".to_string(),
        };
        d.edge(
            e.from,
            e.to,
            &format!("({},{})", side(e.left), side(e.right)),
        );
    }
    d.finish()
}

pub fn modified_verifier(g: &PlantNfa, v: &ModifiedVerifier) -> String {
    let mut d = Dot::new("modified_verifier");
    for (i, s) in v.states().iter().enumerate() {
        let label = format!(
            "({},{},{},{})",
            g.state_name(s.left),
            s.left_label,
            g.state_name(s.right),
            s.right_label
        );
        d.node(i, &label, v.initial().contains(&i));
    }
    for e in v.edges() {
        let name = e.event.map_or("ε", |s| g.symbol_name(s));
        let side = |moves: bool, c| {
            if moves {
                format!("({name},{c})")
            } else {
                "(ε,0)".into()
            }
        };
        let label = format!(
            "({},{})",
            side(e.movers != Movers::Right, e.left_cost),
            side(e.movers != Movers::Left, e.right_cost)
        );
        d.edge(e.from, e.to, &label);
    }
    d.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn observer_labels_are_sets() {
        let g = fixtures::fig1_plant();
        let text = observer(&g, &ObserverDfa::build(&g));
        assert!(text.starts_with("digraph \"observer\" {"));
        assert!(text.contains("label=\"{0,1,2,3,4}\""));
        assert!(text.contains("label=\"{2,3,4}\""));
        assert!(text.trim_end().ends_with('}'));
    }

    #[test]
    fn quoting_escapes() {
        assert_eq!(quote("a\"b"), "\"a\\\"b\"");
    }

    #[test]
    fn stages_share_ranks() {
        let g = fixtures::fig1_plant();
        let m = fixtures::table1_attacks(&g);
        let w = g.parse_word("β α").unwrap();
        let gsc = CostedObservationDfa::build(&g, &w, &m, 3).unwrap();
        let text = observation_dfa(&g, &gsc);
        assert_eq!(text.matches("rank=same").count(), 3);
        assert!(text.contains("i_{β}"));
    }
}
