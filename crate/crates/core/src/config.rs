//! Project configuration: one TOML document declaring the defining graph,
//! vertex groups, named subgroups, enumeration budgets and the random seed.
//!
//! The accepted schema, with `budgets`, `subgroups`, `seed` and
//! `acknowledge_hypotheses` optional:
//!
//! ```toml
//! seed = 7
//!
//! [graph]
//! vertices = ["a", "b", "c", "d"]
//! edges = [["a", "b"], ["b", "c"], ["c", "d"]]
//!
//! [groups]
//! a = "Z"
//! b = "Z/5"
//! c = "Z^2"
//! d = "F2"
//!
//! [budgets]
//! shuffles = 100000
//! ball = 100000
//! expressions = 100000
//!
//! [subgroups.h1]
//! generators = ["a:1.d:1"]
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::analyze::{AnalyzeError, SubgroupSpec};
use crate::graph::DefiningGraph;
use crate::groups::GroupSpec;
use crate::words::PrismWord;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid TOML: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("{field}: {problem}")]
    Field { field: String, problem: String },
}

fn field_error(field: impl Into<String>, problem: impl ToString) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        problem: problem.to_string(),
    }
}

/// Enumeration caps. Each one bounds a different search: geodesic shuffle
/// expansion, oracle ball size, and subgroup expression sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default = "default_budget")]
    pub shuffles: usize,
    #[serde(default = "default_budget")]
    pub ball: usize,
    #[serde(default = "default_budget")]
    pub expressions: usize,
}

fn default_budget() -> usize {
    100_000
}

impl Default for Budgets {
    fn default() -> Budgets {
        Budgets {
            shuffles: default_budget(),
            ball: default_budget(),
            expressions: default_budget(),
        }
    }
}

/// A parsed and validated project configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectConfig {
    pub graph: Arc<DefiningGraph>,
    pub subgroups: BTreeMap<String, Vec<PrismWord>>,
    pub budgets: Budgets,
    pub seed: u64,
    pub acknowledge_hypotheses: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    acknowledge_hypotheses: bool,
    graph: RawGraph,
    groups: BTreeMap<String, String>,
    #[serde(default)]
    budgets: Budgets,
    #[serde(default)]
    subgroups: BTreeMap<String, RawSubgroup>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    vertices: Vec<String>,
    #[serde(default)]
    edges: Vec<(String, String)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubgroup {
    generators: Vec<String>,
}

/// Parses and validates a configuration document. Every diagnostic names
/// the offending field; TOML syntax errors carry their own line numbers.
pub fn parse_config(text: &str) -> Result<ProjectConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;

    let mut vertices: Vec<(&str, GroupSpec)> = Vec::with_capacity(raw.graph.vertices.len());
    for name in &raw.graph.vertices {
        let spec_text = raw
            .groups
            .get(name)
            .ok_or_else(|| field_error(format!("groups.{name}"), "no group assigned"))?;
        let spec: GroupSpec = spec_text
            .parse()
            .map_err(|e| field_error(format!("groups.{name}"), e))?;
        vertices.push((name, spec));
    }
    for name in raw.groups.keys() {
        if !raw.graph.vertices.contains(name) {
            return Err(field_error(
                format!("groups.{name}"),
                format!("`{name}` is not a declared vertex"),
            ));
        }
    }
    for (x, y) in &raw.graph.edges {
        for end in [x, y] {
            if !raw.graph.vertices.contains(end) {
                return Err(field_error(
                    "graph.edges",
                    format!("undeclared vertex `{end}`"),
                ));
            }
        }
    }
    let edges: Vec<(&str, &str)> = raw
        .graph
        .edges
        .iter()
        .map(|(x, y)| (x.as_str(), y.as_str()))
        .collect();
    let graph = Arc::new(
        DefiningGraph::new(&vertices, &edges).map_err(|e| field_error("graph", e))?,
    );

    let mut subgroups = BTreeMap::new();
    for (name, sub) in &raw.subgroups {
        let mut generators = Vec::with_capacity(sub.generators.len());
        for (i, text) in sub.generators.iter().enumerate() {
            let word = PrismWord::parse(&graph, text).map_err(|e| {
                field_error(format!("subgroups.{name}.generators[{i}]"), e)
            })?;
            if word.canonical().letters().is_empty() {
                return Err(field_error(
                    format!("subgroups.{name}.generators[{i}]"),
                    "generator reduces to the identity",
                ));
            }
            generators.push(word);
        }
        subgroups.insert(name.clone(), generators);
    }

    Ok(ProjectConfig {
        graph,
        subgroups,
        budgets: raw.budgets,
        seed: raw.seed.unwrap_or(0),
        acknowledge_hypotheses: raw.acknowledge_hypotheses,
    })
}

impl ProjectConfig {
    /// Builds the named subgroup, or `None` when it is not declared.
    pub fn subgroup_spec(&self, name: &str) -> Option<Result<SubgroupSpec, AnalyzeError>> {
        self.subgroups
            .get(name)
            .map(|gens| SubgroupSpec::new(&self.graph, gens.clone()))
    }

    /// Hypothesis warnings: conditions under which some guarantees do not
    /// apply. Suppressed when the config sets `acknowledge_hypotheses`.
    pub fn warnings(&self) -> Vec<String> {
        if self.acknowledge_hypotheses {
            return Vec::new();
        }
        let mut out = Vec::new();
        let finite: Vec<&str> = self
            .graph
            .vertices()
            .filter(|&v| self.graph.group(v).is_finite())
            .map(|v| self.graph.name(v))
            .collect();
        if !finite.is_empty() {
            out.push(format!(
                "groups: finite vertex groups ({}) fall outside the infinite-group hypothesis; join-busting conclusions carry a torsion caveat",
                finite.join(", ")
            ));
        }
        if self.graph.has_isolated_vertices() {
            out.push(
                "graph: isolated vertices present; star-length comparisons are skipped where they assume every star is a join"
                    .to_string(),
            );
        }
        out
    }

    /// Renders the canonical TOML form; `parse_config` of the result equals
    /// this config.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("seed = {}\n", self.seed));
        if self.acknowledge_hypotheses {
            out.push_str("acknowledge_hypotheses = true\n");
        }
        out.push_str("\n[graph]\nvertices = [");
        let names: Vec<String> = self
            .graph
            .vertices()
            .map(|v| format!("\"{}\"", self.graph.name(v)))
            .collect();
        out.push_str(&names.join(", "));
        out.push_str("]\nedges = [");
        let mut edges = Vec::new();
        for u in self.graph.vertices() {
            for v in self.graph.vertices() {
                if u < v && self.graph.adjacent(u, v) {
                    edges.push(format!(
                        "[\"{}\", \"{}\"]",
                        self.graph.name(u),
                        self.graph.name(v)
                    ));
                }
            }
        }
        out.push_str(&edges.join(", "));
        out.push_str("]\n\n[groups]\n");
        for v in self.graph.vertices() {
            out.push_str(&format!(
                "{} = \"{}\"\n",
                self.graph.name(v),
                self.graph.group(v)
            ));
        }
        out.push_str(&format!(
            "\n[budgets]\nshuffles = {}\nball = {}\nexpressions = {}\n",
            self.budgets.shuffles, self.budgets.ball, self.budgets.expressions
        ));
        for (name, gens) in &self.subgroups {
            out.push_str(&format!("\n[subgroups.{name}]\ngenerators = ["));
            let rendered: Vec<String> =
                gens.iter().map(|g| format!("\"{}\"", g.serialize())).collect();
            out.push_str(&rendered.join(", "));
            out.push_str("]\n");
        }
        out
    }
}

/// FNV-1a hash of a configuration text, rendered as 16 hex digits; stamps
/// reports so they can be traced back to their exact inputs.
pub fn config_hash(text: &str) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}
