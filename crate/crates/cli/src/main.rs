//! Command-line interface over the graph-products library: word reduction,
//! disk diagrams, contact-graph bounds, and subgroup analysis, all driven
//! by one TOML project configuration.
//!
//! Exit codes: 0 on success, 2 for input errors, 3 for exhausted budgets,
//! and 4 when `oracle-check` detects a disagreement.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use graph_products::analyze::{run_analysis, AnalysisOptions, AnalyzeError};
use graph_products::config::{config_hash, parse_config, ConfigError, ProjectConfig};
use graph_products::contact::{hyperplanes_crossed, ContactError, StarMetric};
use graph_products::diagram::{DiagramError, DiskDiagram};
use graph_products::oracle::{prism_ball, star_distances, OracleError};
use graph_products::render::{contact_dot, diagram_svg};
use graph_products::words::WordError;
use graph_products::PrismWord;

/// Exact computation in graph products of groups.
#[derive(Parser)]
#[command(name = "gprod", version)]
struct Cli {
    /// Project configuration file.
    #[arg(long, global = true, default_value = "gprod.toml")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a word to its canonical geodesic form.
    Reduce { word: String },
    /// List every geodesic spelling of a word's element, sorted.
    Geodesics {
        word: String,
        /// Cap on the number of spellings explored.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Star length of a word, with one optimal factorization.
    StarLength { word: String },
    /// Build and validate the disk diagram of an identity word.
    Diagram {
        word: String,
        /// Write an SVG rendering here.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Print the diagram as JSON instead of a summary.
        #[arg(long)]
        json: bool,
    },
    /// Left-comb a diagram at the designated boundary range start..end.
    Comb {
        word: String,
        start: usize,
        end: usize,
        /// Print the combed diagram as JSON as well.
        #[arg(long)]
        json: bool,
    },
    /// Distance bounds between all hyperplanes crossed by a word.
    ContactBounds {
        word: String,
        /// Write the contact graph in DOT format here.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Prism and star lengths of the powers of a word, as JSON lines.
    Orbit {
        word: String,
        /// Largest power to measure.
        #[arg(long, default_value_t = 10)]
        horizon: usize,
    },
    /// Analyze a configured subgroup and print one JSON report.
    Analyze {
        subgroup: String,
        /// Largest expression length to sample.
        #[arg(long)]
        horizon: Option<usize>,
        /// Cap on sampled expressions and per-diagram checks.
        #[arg(long)]
        budget: Option<usize>,
        /// Sampling seed; defaults to the configured seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare the reducer and both metrics against breadth-first oracles.
    OracleCheck {
        /// Ball radius to enumerate.
        #[arg(long, default_value_t = 3)]
        radius: usize,
        /// Cap on ball size.
        #[arg(long)]
        budget: Option<usize>,
    },
}

const INPUT: u8 = 2;
const BUDGET: u8 = 3;
const INVARIANT: u8 = 4;

struct CliError {
    code: u8,
    message: String,
}

fn input(message: impl Into<String>) -> CliError {
    CliError {
        code: INPUT,
        message: message.into(),
    }
}

impl From<WordError> for CliError {
    fn from(e: WordError) -> CliError {
        let code = match e {
            WordError::ShuffleBudget { .. } => BUDGET,
            _ => INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ContactError> for CliError {
    fn from(e: ContactError) -> CliError {
        match e {
            ContactError::Word(inner) => inner.into(),
            other => input(other.to_string()),
        }
    }
}

impl From<AnalyzeError> for CliError {
    fn from(e: AnalyzeError) -> CliError {
        match e {
            AnalyzeError::Word(inner) => inner.into(),
            AnalyzeError::Contact(inner) => inner.into(),
            other => input(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> CliError {
        let code = match e {
            OracleError::LimitExceeded { .. } => BUDGET,
            _ => INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> CliError {
        input(e.to_string())
    }
}

impl From<DiagramError> for CliError {
    fn from(e: DiagramError) -> CliError {
        input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> CliError {
        input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn load_project(path: &Path) -> Result<(ProjectConfig, String), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    let config = parse_config(&text)?;
    for warning in config.warnings() {
        eprintln!("warning: {warning}");
    }
    Ok((config, text))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| input(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (config, text) = load_project(&cli.config)?;
    match cli.command {
        Command::Reduce { word } => {
            let canonical = PrismWord::parse(&config.graph, &word)?.canonical();
            println!("{}", canonical.serialize());
            println!("length: {}", canonical.len());
        }
        Command::Geodesics { word, budget } => {
            let canonical = PrismWord::parse(&config.graph, &word)?.canonical();
            let limit = budget.unwrap_or(config.budgets.shuffles);
            let mut spellings: Vec<String> = canonical
                .geodesic_representatives(limit)?
                .iter()
                .map(PrismWord::serialize)
                .collect();
            spellings.sort();
            for spelling in spellings {
                println!("{spelling}");
            }
        }
        Command::StarLength { word } => {
            let canonical = PrismWord::parse(&config.graph, &word)?.canonical();
            let metric = StarMetric::new(&config.graph);
            println!("star length: {}", metric.star_length(&canonical));
            let factors: Vec<String> = metric
                .star_factorization(&canonical)
                .iter()
                .map(PrismWord::serialize)
                .collect();
            println!("factors: {}", factors.join(" | "));
        }
        Command::Diagram { word, svg, json } => {
            let boundary = PrismWord::parse(&config.graph, &word)?;
            let diagram = DiskDiagram::build(&boundary)?;
            if let Some(path) = svg {
                write_file(&path, &diagram_svg(&diagram))?;
            }
            if json {
                println!("{}", diagram.to_json());
            } else {
                println!("blocks: {}", diagram.blocks().len());
                println!("violations: {}", diagram.validate(None).len());
            }
        }
        Command::Comb {
            word,
            start,
            end,
            json,
        } => {
            let boundary = PrismWord::parse(&config.graph, &word)?;
            let diagram = DiskDiagram::build(&boundary)?;
            let combed = diagram.left_comb(&(start..end))?;
            println!("combed: {}", combed.word.serialize());
            println!("permutation: {:?}", combed.permutation);
            if json {
                println!("{}", combed.diagram.to_json());
            }
        }
        Command::ContactBounds { word, dot } => {
            let canonical = PrismWord::parse(&config.graph, &word)?.canonical();
            let hyperplanes = hyperplanes_crossed(&canonical)?;
            let metric = StarMetric::new(&config.graph);
            for i in 0..hyperplanes.len() {
                for j in i + 1..hyperplanes.len() {
                    let (lower, upper) =
                        metric.contact_distance_bounds(&hyperplanes[i], &hyperplanes[j])?;
                    println!("h{i} h{j}: {lower} {upper}");
                }
            }
            if let Some(path) = dot {
                write_file(&path, &contact_dot(&hyperplanes)?)?;
            }
        }
        Command::Orbit { word, horizon } => {
            let base = PrismWord::parse(&config.graph, &word)?;
            let metric = StarMetric::new(&config.graph);
            let profile = metric.orbit_profile(&base, horizon)?;
            for row in &profile.rows {
                println!("{}", serde_json::to_string(row)?);
            }
            let estimate = serde_json::json!({
                "translation_estimate": profile.translation_estimate,
            });
            println!("{}", serde_json::to_string(&estimate)?);
        }
        Command::Analyze {
            subgroup,
            horizon,
            budget,
            seed,
        } => {
            let spec = config
                .subgroup_spec(&subgroup)
                .ok_or_else(|| input(format!("no subgroup named `{subgroup}` in the configuration")))??;
            let options = AnalysisOptions {
                horizon: horizon.unwrap_or(10),
                budget: budget.unwrap_or(config.budgets.expressions),
                seed: seed.unwrap_or(config.seed),
                subgroup_name: subgroup,
                config_hash: config_hash(&text),
            };
            let report = run_analysis(&spec, &options)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::OracleCheck { radius, budget } => {
            let limit = budget.unwrap_or(config.budgets.ball);
            let ball = prism_ball(&config.graph, radius, limit)?;
            let metric = StarMetric::new(&config.graph);
            let star = star_distances(&ball);
            let mut mismatches = 0usize;
            for (key, expected) in ball.iter() {
                let word = PrismWord::from_letters(&config.graph, key.clone())?;
                if word.prism_length() != expected {
                    eprintln!(
                        "prism mismatch at {}: ball {expected}, reducer {}",
                        word.serialize(),
                        word.prism_length()
                    );
                    mismatches += 1;
                }
                match star.get(key) {
                    Some(&s) if metric.star_length(&word) == s => {}
                    Some(&s) => {
                        eprintln!(
                            "star mismatch at {}: ball {s}, metric {}",
                            word.serialize(),
                            metric.star_length(&word)
                        );
                        mismatches += 1;
                    }
                    None => {
                        eprintln!("star search never reached {}", word.serialize());
                        mismatches += 1;
                    }
                }
            }
            if mismatches > 0 {
                return Err(CliError {
                    code: INVARIANT,
                    message: format!("{mismatches} oracle mismatches at radius {radius}"),
                });
            }
            println!("checked {} elements to radius {radius}; oracles agree", ball.len());
        }
    }
    Ok(())
}
