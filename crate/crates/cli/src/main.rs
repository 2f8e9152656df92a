use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use tamper_core::cmin::{compute_cmin, CminReport, CorruptedAutomaton, ModifiedVerifier};
use tamper_core::diagnoser::{CostedPlant, CostedState, FVerifier, MnEvent, RunStep};
use tamper_core::estimator::{estimate_least_cost, estimate_with_witnesses, ProductAutomaton};
use tamper_core::io::{parse_attacks, parse_plant};
use tamper_core::{
    dot, fixtures, verify_diagnosability, AttackModel, CostedObservationDfa, Error, ObserverDfa,
    PlantNfa, PreconditionViolation, Symbol,
};

#[derive(Parser)]
#[command(
    name = "tamper",
    version,
    about = "Estimation and diagnosability under tampered observations"
)]
struct Cli {
    /// Plant JSON file.
    #[arg(long, global = true, conflicts_with = "fixture")]
    plant: Option<PathBuf>,
    /// Use a built-in plant (and its cost table unless --attacks is given).
    #[arg(long, global = true, value_enum)]
    fixture: Option<Fixture>,
    /// Attack cost table JSON file. Defaults to no attacks.
    #[arg(long, global = true)]
    attacks: Option<PathBuf>,
    /// Fault events, comma or space separated. Defaults to the plant's faults.
    #[arg(long, global = true)]
    faults: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fixture {
    Fig1,
    Fig4,
    Fig6,
    Toy,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Graph {
    Plant,
    Observer,
    ObservationDfa,
    Product,
    CostedPlant,
    Verifier,
    ModifiedVerifier,
}

#[derive(Subcommand)]
enum Command {
    /// Build the observer (subset construction) of the plant.
    Observer,
    /// Least-cost state estimate for a received observation sequence.
    Estimate {
        /// Received observations, whitespace separated.
        #[arg(long)]
        obs: String,
        #[arg(long)]
        budget: u32,
        /// Include one cheapest matching sequence per state.
        #[arg(long)]
        witness: bool,
        /// Also write the reduced product automaton here.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Decide diagnosability against attackers with the given budget.
    Diagnose {
        #[arg(long)]
        budget: u32,
        /// Include a faulty and a normal run with the same observations.
        #[arg(long)]
        witness: bool,
        /// Also write the verifier here.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Smallest budget that defeats diagnosis forever.
    Cmin {
        #[arg(long)]
        witness: bool,
        /// Also write the modified verifier here.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Print one of the intermediate automata in DOT.
    ExportDot {
        #[arg(value_enum)]
        graph: Graph,
        /// Observation sequence, for the observation DFA and product.
        #[arg(long)]
        obs: Option<String>,
        #[arg(long, default_value_t = 0)]
        budget: u32,
    },
}

enum Failure {
    Input(Value),
    Precondition(PreconditionViolation),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Precondition(v) => Failure::Precondition(v),
            Error::Json(e) => Failure::Input(json!({
                "error": "malformed json",
                "message": e.to_string(),
                "line": e.line(),
                "column": e.column(),
            })),
            other => {
                Failure::Input(json!({ "error": "invalid input", "message": other.to_string() }))
            }
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Input(v)) => {
            eprintln!("{}", pretty(&v));
            ExitCode::from(2)
        }
        Err(Failure::Precondition(v)) => {
            eprintln!(
                "{}",
                pretty(
                    &json!({ "error": "precondition violated", "message": v.to_string(), "witness": v })
                )
            );
            ExitCode::from(3)
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| {
        Failure::Input(json!({
            "error": "unreadable file",
            "message": format!("{}: {e}", path.display()),
        }))
    })
}

fn write(path: &Path, text: &str) -> Outcome<()> {
    fs::write(path, text).map_err(|e| {
        Failure::Input(json!({
            "error": "unwritable file",
            "message": format!("{}: {e}", path.display()),
        }))
    })
}

fn load(cli: &Cli) -> Outcome<(PlantNfa, AttackModel)> {
    let (plant_json, default_attacks) = match (&cli.plant, cli.fixture) {
        (Some(p), _) => (read(p)?, fixtures::EMPTY_ATTACKS),
        (None, Some(f)) => {
            let (_, p, a) = fixtures::CORPUS[f as usize];
            (p.to_string(), a)
        }
        (None, None) => {
            return Err(Failure::Input(
                json!({ "error": "invalid input", "message": "one of --plant or --fixture is required" }),
            ))
        }
    };
    let plant = parse_plant(&plant_json)?;
    let attacks = match &cli.attacks {
        Some(p) => read(p)?,
        None => default_attacks.to_string(),
    };
    let model = parse_attacks(&attacks, &plant)?;
    Ok((plant, model))
}

fn faults(cli: &Cli, plant: &PlantNfa) -> Outcome<BTreeSet<Symbol>> {
    match &cli.faults {
        None => Ok(plant.fault_symbols().collect()),
        Some(list) => list
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| plant.symbol(s).map_err(Failure::from))
            .collect(),
    }
}

fn run(cli: &Cli) -> Outcome<String> {
    let (plant, model) = load(cli)?;
    match &cli.command {
        Command::Observer => Ok(observer(cli.format, &plant)),
        Command::Estimate {
            obs,
            budget,
            witness,
            dot: dot_path,
        } => {
            let word = plant.parse_word(obs)?;
            let est = if *witness {
                estimate_with_witnesses(&plant, &model, &word, *budget)?
            } else {
                estimate_least_cost(&plant, &model, &word, *budget)?
            };
            let product = || -> Outcome<String> {
                let gsc = CostedObservationDfa::build(&plant, &word, &model, budget + 1)?;
                Ok(dot::product(
                    &plant,
                    &ProductAutomaton::build(&plant, &gsc)?.reduce(),
                ))
            };
            if let Some(path) = dot_path {
                write(path, &product()?)?;
            }
            let name = |x| plant.state_name(x).to_string();
            match cli.format {
                Format::Dot => product(),
                Format::Text => Ok(est
                    .entries
                    .iter()
                    .map(|(&x, c)| format!("{} {c}\n", name(x)))
                    .collect()),
                Format::Json => {
                    let mut out = json!({
                        "estimates": est.entries.iter()
                            .map(|(&x, c)| json!({ "state": name(x), "cost": c }))
                            .collect::<Vec<_>>(),
                        "over_budget": est.over_budget.iter().map(|&x| name(x)).collect::<Vec<_>>(),
                    });
                    if *witness {
                        out["witnesses"] = est
                            .witnesses
                            .iter()
                            .map(|(&x, labels)| {
                                let seq: Vec<String> =
                                    labels.iter().map(|l| l.render(&plant)).collect();
                                (name(x), json!(seq))
                            })
                            .collect::<serde_json::Map<_, _>>()
                            .into();
                    }
                    Ok(pretty(&out) + "\n")
                }
            }
        }
        Command::Diagnose {
            budget,
            witness,
            dot: dot_path,
        } => {
            let f = faults(cli, &plant)?;
            let d = verify_diagnosability(&plant, &model, &f, *budget)?;
            let verifier = || -> Outcome<String> {
                let gm = CostedPlant::build(&plant, &model, *budget)?;
                Ok(dot::verifier(&plant, &gm, &FVerifier::build(&gm, &f)))
            };
            if let Some(path) = dot_path {
                write(path, &verifier()?)?;
            }
            match cli.format {
                Format::Dot => verifier(),
                Format::Text => Ok(format!(
                    "{}diagnosable with budget {budget}\n",
                    if d.diagnosable { "" } else { "not " }
                )),
                Format::Json => {
                    let mut out = json!({ "diagnosable": d.diagnosable });
                    if *witness {
                        out["witness"] = d.counterexample.as_ref().map_or(Value::Null, |cx| {
                            json!({
                                "faulty": run_json(&plant, &cx.faulty.prefix, &cx.faulty.cycle),
                                "normal": run_json(&plant, &cx.normal.prefix, &cx.normal.cycle),
                                "observed_prefix": words(&plant, &cx.observed_prefix),
                                "observed_cycle": words(&plant, &cx.observed_cycle),
                            })
                        });
                    }
                    Ok(pretty(&out) + "\n")
                }
            }
        }
        Command::Cmin {
            witness,
            dot: dot_path,
        } => {
            plant
                .check_no_unobservable_cycles()
                .map_err(Failure::Precondition)?;
            plant.check_liveness().map_err(Failure::Precondition)?;
            let f = faults(cli, &plant)?;
            let report = compute_cmin(&plant, &model, &f)?;
            if let Some(path) = dot_path {
                write(path, &dot::modified_verifier(&plant, &report.verifier))?;
            }
            match cli.format {
                Format::Dot => Ok(dot::modified_verifier(&plant, &report.verifier)),
                Format::Text => Ok(match report.cmin {
                    Some(c) => format!("{c}\n"),
                    None => "none\n".to_string(),
                }),
                Format::Json => {
                    let mut out = match report.cmin {
                        Some(c) => json!({ "cmin": c }),
                        None => json!({ "cmin": null, "reason": "no modified F-confused cycle" }),
                    };
                    if *witness && report.cmin.is_some() {
                        out["witness"] = cmin_witness(&plant, &report);
                    }
                    Ok(pretty(&out) + "\n")
                }
            }
        }
        Command::ExportDot { graph, obs, budget } => {
            export(&plant, &model, cli, *graph, obs.as_deref(), *budget)
        }
    }
}

fn observer(format: Format, plant: &PlantNfa) -> String {
    let obs = ObserverDfa::build(plant);
    let set = |i| plant.render_set(obs.state(i));
    let edges = (0..obs.len()).flat_map(|i| obs.transitions_from(i).map(move |(s, j)| (i, s, j)));
    match format {
        Format::Dot => dot::observer(plant, &obs),
        Format::Text => edges
            .map(|(i, s, j)| format!("{} -{}-> {}\n", set(i), plant.symbol_name(s), set(j)))
            .collect(),
        Format::Json => {
            let out = json!({
                "initial": set(obs.initial()),
                "states": (0..obs.len()).map(set).collect::<Vec<_>>(),
                "transitions": edges
                    .map(|(i, s, j)| json!({ "from": set(i), "event": plant.symbol_name(s), "to": set(j) }))
                    .collect::<Vec<_>>(),
            });
            pretty(&out) + "\n"
        }
    }
}

fn export(
    plant: &PlantNfa,
    model: &AttackModel,
    cli: &Cli,
    graph: Graph,
    obs: Option<&str>,
    budget: u32,
) -> Outcome<String> {
    let word = || -> Outcome<Vec<Symbol>> {
        let text = obs.ok_or_else(|| {
            Failure::Input(
                json!({ "error": "invalid input", "message": "--obs is required for this graph" }),
            )
        })?;
        Ok(plant.parse_word(text)?)
    };
    Ok(match graph {
        Graph::Plant => dot::plant(plant),
        Graph::Observer => dot::observer(plant, &ObserverDfa::build(plant)),
        Graph::ObservationDfa => dot::observation_dfa(
            plant,
            &CostedObservationDfa::build(plant, &word()?, model, budget + 1)?,
        ),
        Graph::Product => {
            let gsc = CostedObservationDfa::build(plant, &word()?, model, budget + 1)?;
            dot::product(plant, &ProductAutomaton::build(plant, &gsc)?)
        }
        Graph::CostedPlant => dot::costed_plant(plant, &CostedPlant::build(plant, model, budget)?),
        Graph::Verifier => {
            let gm = CostedPlant::build(plant, model, budget)?;
            dot::verifier(plant, &gm, &FVerifier::build(&gm, &faults(cli, plant)?))
        }
        Graph::ModifiedVerifier => {
            let gc = CorruptedAutomaton::build(plant, model)?;
            dot::modified_verifier(plant, &ModifiedVerifier::build(&gc, &faults(cli, plant)?))
        }
    })
}

fn words(plant: &PlantNfa, w: &[Symbol]) -> Vec<String> {
    w.iter()
        .map(|&s| plant.symbol_name(s).to_string())
        .collect()
}

fn costed(plant: &PlantNfa, s: CostedState) -> String {
    format!("({},{})", plant.state_name(s.plant_state), s.cost)
}

fn step_json(plant: &PlantNfa, s: &RunStep) -> Value {
    let event = match s.event {
        MnEvent::Plant(e) => plant.symbol_name(e).to_string(),
        MnEvent::Deletion(e) => format!("del_{}", plant.symbol_name(e)),
    };
    json!({
        "from": costed(plant, s.from),
        "event": event,
        "attack": s.attack.map(|a| a.render(plant)),
        "to": costed(plant, s.to),
    })
}

fn run_json(plant: &PlantNfa, prefix: &[RunStep], cycle: &[RunStep]) -> Value {
    let steps = |v: &[RunStep]| v.iter().map(|s| step_json(plant, s)).collect::<Vec<_>>();
    json!({ "prefix": steps(prefix), "cycle": steps(cycle) })
}

fn cmin_witness(plant: &PlantNfa, report: &CminReport) -> Value {
    let v = &report.verifier;
    let pair = |i: usize| {
        let s = v.state(i);
        format!(
            "({},{},{},{})",
            plant.state_name(s.left),
            s.left_label,
            plant.state_name(s.right),
            s.right_label
        )
    };
    let edges = |list: &[usize]| {
        list.iter()
            .map(|&e| {
                let e = &v.edges()[e];
                json!({
                    "from": pair(e.from),
                    "event": e.event.map(|s| plant.symbol_name(s).to_string()),
                    "costs": [e.left_cost, e.right_cost],
                    "to": pair(e.to),
                })
            })
            .collect::<Vec<_>>()
    };
    json!({ "path": edges(&report.path), "cycle": edges(&report.cycle) })
}
