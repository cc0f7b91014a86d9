//! Empirical subgroup diagnostics: join-window profiles, diagram-measured
//! distortion constants, stability obstruction certificates, and a
//! reduction-control audit over sampled pairing diagrams.
//!
//! A subgroup is given by prism words for its generators. Expressions over
//! the generators and their inverses are enumerated in length order (or
//! sampled once the space outgrows the budget), and every diagnostic is a
//! maximum or a table over that shared sample, so a report is reproducible
//! from its seed.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::{essential_support, is_conjugate_into_join, ContactError, StarMetric};
use crate::diagram::{DiagramError, DiskDiagram};
use crate::graph::{DefiningGraph, GraphError, VertexId, VertexSet};
use crate::words::{Letter, PrismWord, WordError};

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("subgroup generator reduces to the identity")]
    TrivialGenerator,
    #[error("word is not geodesic")]
    NotGeodesic,
    #[error("word has letters outside {lambda}")]
    OutsideSet { lambda: String },
    #[error("horizon must be positive")]
    BadHorizon,
}

/// A finitely generated subgroup, described by prism words for its
/// generators. The empty list describes the trivial subgroup.
#[derive(Debug, Clone)]
pub struct SubgroupSpec {
    graph: Arc<DefiningGraph>,
    generators: Vec<PrismWord>,
}

impl SubgroupSpec {
    /// Canonicalizes the generators. Rejects generators that reduce to the
    /// identity and generators over a different defining graph.
    pub fn new(
        graph: &Arc<DefiningGraph>,
        generators: Vec<PrismWord>,
    ) -> Result<SubgroupSpec, AnalyzeError> {
        let mut canon = Vec::with_capacity(generators.len());
        for g in &generators {
            if g.graph() != graph {
                return Err(AnalyzeError::Word(WordError::GraphMismatch));
            }
            let c = g.canonical();
            if c.letters().is_empty() {
                return Err(AnalyzeError::TrivialGenerator);
            }
            canon.push(c);
        }
        Ok(SubgroupSpec {
            graph: graph.clone(),
            generators: canon,
        })
    }

    pub fn graph(&self) -> &Arc<DefiningGraph> {
        &self.graph
    }

    pub fn generators(&self) -> &[PrismWord] {
        &self.generators
    }

    /// Longest prism length among the generators; zero for the trivial
    /// subgroup.
    pub fn max_generator_length(&self) -> usize {
        self.generators
            .iter()
            .map(|g| g.prism_length())
            .max()
            .unwrap_or(0)
    }
}

/// One reduced expression over the subgroup generators and their inverses.
#[derive(Debug, Clone)]
pub struct SampledWord {
    /// Generator indices with an inversion flag, in spelling order.
    pub expression: Vec<(usize, bool)>,
    /// Concatenation of the generator prism words, without reduction.
    pub spelling: PrismWord,
    /// Canonical form of the element the expression spells.
    pub element: PrismWord,
}

impl SampledWord {
    /// Renders the expression as `s1.s2^-1.s1`, numbering generators from 1.
    pub fn expression_string(&self) -> String {
        self.expression
            .iter()
            .map(|&(i, inv)| {
                if inv {
                    format!("s{}^-1", i + 1)
                } else {
                    format!("s{}", i + 1)
                }
            })
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// Reduced expressions up to a length horizon, with one representative
/// expression per distinct nontrivial element.
#[derive(Debug)]
pub struct SubgroupSample {
    /// Expressions in enumeration order: length ascending, then
    /// lexicographic when exhaustive.
    pub words: Vec<SampledWord>,
    /// Indices into `words` of the first expression spelling each element,
    /// excluding expressions that reduce to the identity.
    pub representatives: Vec<usize>,
    /// Whether every reduced expression up to the horizon was enumerated.
    pub exhaustive: bool,
}

/// Number of reduced expressions of length 1 through `horizon` over
/// `gens` generators, saturating at `u64::MAX`.
fn reduced_expression_count(gens: usize, horizon: usize) -> u64 {
    let alphabet = 2 * gens as u64;
    if alphabet == 0 {
        return 0;
    }
    let mut total: u64 = 0;
    let mut at_length = alphabet;
    for _ in 0..horizon {
        total = total.saturating_add(at_length);
        at_length = at_length.saturating_mul(alphabet - 1);
    }
    total
}

fn letter_of_index(idx: usize) -> (usize, bool) {
    (idx / 2, idx % 2 == 1)
}

fn cancels(prev: (usize, bool), next: (usize, bool)) -> bool {
    prev.0 == next.0 && prev.1 != next.1
}

/// Enumerates or samples reduced expressions of length 1 through `horizon`
/// and records the first expression seen for each nontrivial element. The
/// budget caps the number of expressions; below it the enumeration is
/// exhaustive, above it each length gets an equal share of seeded random
/// draws.
pub fn sample_expressions(
    h: &SubgroupSpec,
    horizon: usize,
    budget: usize,
    seed: u64,
) -> Result<SubgroupSample, AnalyzeError> {
    if horizon == 0 {
        return Err(AnalyzeError::BadHorizon);
    }
    let gens = h.generators.len();
    let alphabet = 2 * gens;
    let exhaustive = reduced_expression_count(gens, horizon) <= budget as u64;

    let mut expressions: Vec<Vec<(usize, bool)>> = Vec::new();
    if exhaustive {
        let mut frontier: Vec<Vec<(usize, bool)>> = vec![Vec::new()];
        for _ in 0..horizon {
            let mut next = Vec::new();
            for prefix in &frontier {
                for idx in 0..alphabet {
                    let letter = letter_of_index(idx);
                    if let Some(&last) = prefix.last() {
                        if cancels(last, letter) {
                            continue;
                        }
                    }
                    let mut word = prefix.clone();
                    word.push(letter);
                    next.push(word);
                }
            }
            expressions.extend(next.iter().cloned());
            frontier = next;
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen: BTreeSet<Vec<(usize, bool)>> = BTreeSet::new();
        let quota = (budget / horizon).max(1);
        for length in 1..=horizon {
            let mut drawn = 0;
            let mut attempts = 0;
            while drawn < quota && attempts < 4 * quota {
                attempts += 1;
                let mut word = Vec::with_capacity(length);
                word.push(letter_of_index(rng.gen_range(0..alphabet)));
                for _ in 1..length {
                    let last = *word.last().expect("word is nonempty");
                    let forbidden = 2 * last.0 + usize::from(!last.1);
                    let mut idx = rng.gen_range(0..alphabet - 1);
                    if idx == forbidden {
                        idx = alphabet - 1;
                    }
                    word.push(letter_of_index(idx));
                }
                if seen.insert(word.clone()) {
                    expressions.push(word);
                    drawn += 1;
                }
            }
        }
    }

    let mut words = Vec::with_capacity(expressions.len());
    let mut first_seen: BTreeMap<PrismWord, usize> = BTreeMap::new();
    let mut representatives = Vec::new();
    for expression in expressions {
        let mut spelling = PrismWord::identity(&h.graph);
        for &(i, inv) in &expression {
            let g = if inv {
                h.generators[i].inverse()
            } else {
                h.generators[i].clone()
            };
            spelling = spelling.concat(&g)?;
        }
        let element = spelling.canonical();
        let idx = words.len();
        if !element.letters().is_empty() && !first_seen.contains_key(&element) {
            first_seen.insert(element.clone(), idx);
            representatives.push(idx);
        }
        words.push(SampledWord {
            expression,
            spelling,
            element,
        });
    }
    Ok(SubgroupSample {
        words,
        representatives,
        exhaustive,
    })
}

/// Longest contiguous window of a word whose support lies inside a join,
/// with the containing join as witness.
#[derive(Debug, Clone)]
pub struct JoinWindow {
    pub length: usize,
    pub range: Range<usize>,
    pub witness: Option<VertexSet>,
}

fn widest_join_window(
    graph: &DefiningGraph,
    letters: &[Letter],
) -> Result<JoinWindow, AnalyzeError> {
    let contained = |counts: &BTreeMap<VertexId, usize>| -> Result<Option<VertexSet>, GraphError> {
        let support: VertexSet = counts.keys().copied().collect();
        graph.is_contained_in_join(&support)
    };
    let mut best = JoinWindow {
        length: 0,
        range: 0..0,
        witness: None,
    };
    let mut counts: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut start = 0;
    for end in 0..letters.len() {
        *counts.entry(letters[end].vertex).or_insert(0) += 1;
        let mut witness = contained(&counts)?;
        while witness.is_none() && !counts.is_empty() {
            let v = letters[start].vertex;
            let c = counts.get_mut(&v).expect("window letter is counted");
            *c -= 1;
            if *c == 0 {
                counts.remove(&v);
            }
            start += 1;
            if counts.is_empty() {
                break;
            }
            witness = contained(&counts)?;
        }
        if let Some(lambda) = witness {
            if end + 1 - start > best.length {
                best = JoinWindow {
                    length: end + 1 - start,
                    range: start..end + 1,
                    witness: Some(lambda),
                };
            }
        }
    }
    Ok(best)
}

/// Longest contiguous subword of a geodesic whose support is contained in
/// a join, with the earliest such window and its containing join. Errors
/// on non-geodesic input.
pub fn max_join_subword(word: &PrismWord) -> Result<JoinWindow, AnalyzeError> {
    if !word.is_geodesic() {
        return Err(AnalyzeError::NotGeodesic);
    }
    widest_join_window(word.graph(), word.letters())
}

/// Join-window growth of a subgroup: the widest window over the spellings
/// of all sampled reduced expressions, tracked per expression length.
#[derive(Debug, Clone)]
pub struct JoinBustingProfile {
    /// Widest window at the full horizon.
    pub n_obs: usize,
    /// `per_length[l - 1]` is the widest window over expressions of length
    /// at most `l`; nondecreasing.
    pub per_length: Vec<usize>,
    /// First expression attaining `n_obs`, rendered as `s1.s2^-1`.
    pub argmax_expression: String,
    /// Spelling positions of the widest window inside the argmax.
    pub window: Range<usize>,
    /// Join containing the widest window's support; `None` when every
    /// window is empty.
    pub witness: Option<VertexSet>,
    pub exhaustive: bool,
}

fn profile_from_sample(
    h: &SubgroupSpec,
    sample: &SubgroupSample,
    horizon: usize,
) -> Result<JoinBustingProfile, AnalyzeError> {
    let mut per_length = vec![0usize; horizon];
    let mut best = JoinBustingProfile {
        n_obs: 0,
        per_length: Vec::new(),
        argmax_expression: String::new(),
        window: 0..0,
        witness: None,
        exhaustive: sample.exhaustive,
    };
    for word in &sample.words {
        let window = widest_join_window(h.graph(), word.spelling.letters())?;
        let slot = word.expression.len() - 1;
        per_length[slot] = per_length[slot].max(window.length);
        if window.length > best.n_obs {
            best.n_obs = window.length;
            best.argmax_expression = word.expression_string();
            best.window = window.range;
            best.witness = window.witness;
        }
    }
    for l in 1..horizon {
        per_length[l] = per_length[l].max(per_length[l - 1]);
    }
    best.per_length = per_length;
    Ok(best)
}

/// Widest join window over the spellings of reduced expressions of length
/// up to `horizon`.
pub fn join_busting_profile(
    h: &SubgroupSpec,
    horizon: usize,
    budget: usize,
    seed: u64,
) -> Result<JoinBustingProfile, AnalyzeError> {
    let sample = sample_expressions(h, horizon, budget, seed)?;
    profile_from_sample(h, &sample, horizon)
}

/// Constants measured on the pairing diagrams of the sampled elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasuredConstants {
    /// Widest generator-index spread of one dual graph rooted in two
    /// generator segments of a pairing diagram.
    pub d_obs: usize,
    /// Longest run of generator segments none of whose letters lies in a
    /// dual graph rooted in the geodesic side.
    pub k_obs: usize,
    /// Widest window that stays bridged after splitting an expression at
    /// the window and recombining through the window's own geodesic.
    pub c_obs: usize,
}

/// Pairing diagram of a sampled expression: its spelling followed by the
/// formal inverse of the canonical geodesic of its element.
fn pairing_diagram(word: &SampledWord) -> Result<DiskDiagram, AnalyzeError> {
    let boundary = word.spelling.concat(&word.element.inverse())?;
    Ok(DiskDiagram::build(&boundary)?)
}

/// Start position of each generator segment inside the spelling, plus the
/// total spelling length as a final entry.
fn segment_starts(h: &SubgroupSpec, expression: &[(usize, bool)]) -> Vec<usize> {
    let mut starts = Vec::with_capacity(expression.len() + 1);
    let mut acc = 0;
    for &(i, _) in expression {
        starts.push(acc);
        acc += h.generators[i].letters().len();
    }
    starts.push(acc);
    starts
}

fn constants_from_sample(
    h: &SubgroupSpec,
    sample: &SubgroupSample,
    budget: usize,
) -> Result<MeasuredConstants, AnalyzeError> {
    let mut out = MeasuredConstants {
        d_obs: 0,
        k_obs: 0,
        c_obs: 0,
    };
    let mut glued_diagrams = 0;
    for &idx in &sample.representatives {
        let word = &sample.words[idx];
        let n = word.expression.len();
        let starts = segment_starts(h, &word.expression);
        let spelling_len = starts[n];
        let diagram = pairing_diagram(word)?;

        let segment_of = |p: usize| -> usize {
            starts.partition_point(|&s| s <= p) - 1
        };
        let mut contributes = vec![false; n];
        for block in diagram.blocks() {
            let spelling_roots: Vec<usize> = block
                .roots
                .iter()
                .copied()
                .filter(|&p| p < spelling_len)
                .collect();
            if spelling_roots.len() >= 2 {
                let lo = segment_of(spelling_roots[0]);
                let hi = segment_of(*spelling_roots.last().expect("roots are nonempty"));
                out.d_obs = out.d_obs.max(hi - lo);
            }
            if block.roots.iter().any(|&p| p >= spelling_len) {
                for &p in &spelling_roots {
                    contributes[segment_of(p)] = true;
                }
            }
        }
        let mut run = 0;
        for &hit in &contributes {
            if hit {
                run = 0;
            } else {
                run += 1;
                out.k_obs = out.k_obs.max(run);
            }
        }

        // Windows with a nonempty prefix and suffix: cut the window out of
        // the pairing diagram and glue in a diagram pairing the window's
        // spelling against its own geodesic.
        for i in 1..n.saturating_sub(1) {
            for j in i..n - 1 {
                if glued_diagrams >= budget {
                    break;
                }
                glued_diagrams += 1;
                let range = starts[i]..starts[j + 1];
                let window_spelling = PrismWord::from_letters(
                    h.graph(),
                    diagram.boundary().letters()[range.clone()].to_vec(),
                )?;
                let u = window_spelling.canonical();
                let inner = window_spelling.inverse().concat(&u)?;
                let inner_diagram = DiskDiagram::build(&inner)?;
                let glued = DiskDiagram::concatenate(
                    &diagram,
                    &inner_diagram,
                    range.clone(),
                    0..window_spelling.letters().len(),
                )?;
                let prefix = 0..starts[i];
                let u_range = starts[i]..starts[i] + u.letters().len();
                let suffix = u_range.end..u_range.end + spelling_len - starts[j + 1];
                for block in glued.blocks() {
                    let hits = |r: &Range<usize>| block.roots.iter().any(|p| r.contains(p));
                    if hits(&u_range) && hits(&prefix) && hits(&suffix) {
                        out.c_obs = out.c_obs.max(j - i);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Measures the spread, vanishing-run and recombination constants on the
/// pairing diagrams of all sampled elements. The budget additionally caps
/// the number of glued window diagrams.
pub fn measure_constants(
    h: &SubgroupSpec,
    horizon: usize,
    budget: usize,
    seed: u64,
) -> Result<MeasuredConstants, AnalyzeError> {
    let sample = sample_expressions(h, horizon, budget, seed)?;
    constants_from_sample(h, &sample, budget)
}

/// One sampled element with its three lengths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistortionRow {
    /// Length of the shortest sampled expression for the element; the true
    /// subgroup length when the sample is exhaustive.
    pub subgroup_length: usize,
    pub prism_length: usize,
    pub star_length: usize,
}

/// Distortion table with the inequalities checked against the measured
/// constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistortionSummary {
    pub rows: Vec<DistortionRow>,
    /// Strict spread bound: one more than the widest observed spread.
    pub d_constant: usize,
    /// Vanishing-run bound: the longest observed run.
    pub k_constant: usize,
    /// Join-window bound used for the star comparison.
    pub n_constant: usize,
    /// Rows violating any applicable inequality.
    pub violations: usize,
    pub consistent: bool,
    /// Multiplicative constant fitted so both sampled inequalities hold.
    pub fitted_lambda: f64,
    /// Additive constant fitted alongside `fitted_lambda`.
    pub fitted_c: f64,
}

fn distortion_from_sample(
    h: &SubgroupSpec,
    sample: &SubgroupSample,
    metric: &StarMetric,
    constants: &MeasuredConstants,
    n_obs: usize,
) -> DistortionSummary {
    let m_h = h.max_generator_length();
    let d = constants.d_obs + 1;
    let k = constants.k_obs;
    let n = n_obs.max(1);
    let skip_star_comparison = h.graph().has_isolated_vertices();
    let mut rows = Vec::with_capacity(sample.representatives.len());
    let mut violations = 0;
    for &idx in &sample.representatives {
        let word = &sample.words[idx];
        let row = DistortionRow {
            subgroup_length: word.expression.len(),
            prism_length: word.element.prism_length(),
            star_length: metric.star_length(&word.element),
        };
        let mut ok = row.subgroup_length <= (k + d) * row.prism_length + k;
        ok &= row.star_length <= row.prism_length;
        ok &= row.prism_length <= m_h * row.subgroup_length;
        if !skip_star_comparison {
            ok &= row.prism_length <= n * row.star_length;
        }
        if !ok {
            violations += 1;
        }
        rows.push(row);
    }
    let fitted_lambda = m_h.max(k + d).max(1) as f64;
    let fitted_c = k as f64;
    DistortionSummary {
        rows,
        d_constant: d,
        k_constant: k,
        n_constant: n,
        violations,
        consistent: violations == 0,
        fitted_lambda,
        fitted_c,
    }
}

/// Tabulates subgroup, prism and star lengths for every sampled element
/// and checks the distortion inequalities against the measured constants.
pub fn distortion_table(
    h: &SubgroupSpec,
    horizon: usize,
    budget: usize,
    seed: u64,
) -> Result<DistortionSummary, AnalyzeError> {
    let sample = sample_expressions(h, horizon, budget, seed)?;
    let constants = constants_from_sample(h, &sample, budget)?;
    let profile = profile_from_sample(h, &sample, horizon)?;
    let metric = StarMetric::new(h.graph());
    Ok(distortion_from_sample(
        h,
        &sample,
        &metric,
        &constants,
        profile.n_obs,
    ))
}

/// Least window length at which every window of the word meets every
/// vertex of `lambda`; `None` when no length up to the word length works.
/// The word must be geodesic and supported inside `lambda`.
pub fn homogeneity_index(
    word: &PrismWord,
    lambda: &VertexSet,
) -> Result<Option<usize>, AnalyzeError> {
    if !word.is_geodesic() {
        return Err(AnalyzeError::NotGeodesic);
    }
    if !word.support().is_subset(lambda) {
        return Err(AnalyzeError::OutsideSet {
            lambda: word.graph().set_names(lambda),
        });
    }
    let letters = word.letters();
    let n = letters.len();
    for m in 1..=n {
        let covers = (0..=n - m).all(|i| {
            let seen: VertexSet = letters[i..i + m].iter().map(|l| l.vertex).collect();
            lambda.is_subset(&seen)
        });
        if covers {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// Whether an element has infinite order. Finite order happens exactly
/// when the cyclically reduced core is supported on a complete subgraph
/// with every letter of finite order; the core then lives in a direct
/// product of finite cyclic groups.
pub fn element_has_infinite_order(word: &PrismWord) -> bool {
    let (support, conj) = essential_support(word);
    if support.is_empty() {
        return false;
    }
    let graph = word.graph();
    let clique = support
        .iter()
        .all(|&u| support.iter().all(|&v| u == v || graph.adjacent(u, v)));
    if !clique {
        return true;
    }
    let core = conj
        .inverse()
        .multiply(word)
        .and_then(|w| w.multiply(&conj))
        .expect("same graph");
    core.letters()
        .iter()
        .any(|l| graph.group(l.vertex).has_infinite_order(&l.element))
}

/// A sampled subgroup element together with a join it conjugates into:
/// `conjugator⁻¹ · element · conjugator` lies in the parabolic on `lambda`.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub expression: String,
    pub element: PrismWord,
    pub lambda: VertexSet,
    pub conjugator: PrismWord,
    pub infinite_order: bool,
}

fn certificates_from_sample(sample: &SubgroupSample) -> Result<Vec<Certificate>, AnalyzeError> {
    let mut out = Vec::new();
    for &idx in &sample.representatives {
        let word = &sample.words[idx];
        if let Some((lambda, conjugator)) = is_conjugate_into_join(&word.element)? {
            out.push(Certificate {
                expression: word.expression_string(),
                element: word.element.clone(),
                lambda,
                conjugator,
                infinite_order: element_has_infinite_order(&word.element),
            });
        }
    }
    Ok(out)
}

/// Sampled elements that conjugate into a join subgroup. Any infinite-order
/// entry obstructs stability of the subgroup's orbit.
pub fn obstruction_certificates(
    h: &SubgroupSpec,
    horizon: usize,
    budget: usize,
    seed: u64,
) -> Result<Vec<Certificate>, AnalyzeError> {
    let sample = sample_expressions(h, horizon, budget, seed)?;
    certificates_from_sample(&sample)
}

/// Outcome of the reduction-control audit: every sampled pairing diagram
/// is left-combed and the segment-span inequality is checked at every
/// designated letter pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedconSummary {
    pub diagrams: usize,
    pub checks: usize,
    pub failures: usize,
}

fn redcon_from_sample(
    h: &SubgroupSpec,
    sample: &SubgroupSample,
    budget: usize,
) -> Result<RedconSummary, AnalyzeError> {
    let mut out = RedconSummary {
        diagrams: 0,
        checks: 0,
        failures: 0,
    };
    let m_h = h.max_generator_length();
    for &idx in &sample.representatives {
        let word = &sample.words[idx];
        let m_w = word.element.letters().len();
        if m_w < 2 || out.checks >= budget {
            continue;
        }
        let spelling_len = word.spelling.letters().len();
        let diagram = pairing_diagram(word)?;
        let w_range = spelling_len..spelling_len + m_w;
        let combed = diagram.left_comb(&w_range)?.diagram;
        let segments: Vec<usize> = word
            .expression
            .iter()
            .map(|&(i, _)| h.generators[i].letters().len())
            .collect();
        out.diagrams += 1;
        for ell in 0..m_w - 1 {
            for r in ell + 1..m_w {
                if out.checks >= budget {
                    break;
                }
                out.checks += 1;
                if !combed.reduction_control_check(&w_range, ell, r, &segments, m_h)? {
                    out.failures += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Left-combs every sampled pairing diagram and counts failures of the
/// segment-span inequality over all designated letter pairs.
pub fn redcon_audit(
    h: &SubgroupSpec,
    horizon: usize,
    budget: usize,
    seed: u64,
) -> Result<RedconSummary, AnalyzeError> {
    let sample = sample_expressions(h, horizon, budget, seed)?;
    redcon_from_sample(h, &sample, budget)
}

/// Inputs fixed before an analysis run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub horizon: usize,
    pub budget: usize,
    pub seed: u64,
    pub subgroup_name: String,
    pub config_hash: String,
}

/// Join-busting section of a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JoinBustingSection {
    pub n_obs: usize,
    pub per_length: Vec<usize>,
    pub argmax_expression: String,
    pub witness: Option<String>,
}

/// Certificate section entry of a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateSection {
    pub expression: String,
    pub element: String,
    pub lambda: String,
    pub conjugator: String,
    pub infinite_order: bool,
}

/// Full analysis of one subgroup, reproducible from the seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub subgroup: String,
    pub generators: Vec<String>,
    pub config_hash: String,
    pub seed: u64,
    pub horizon: usize,
    pub budget: usize,
    pub exhaustive: bool,
    pub sample_size: usize,
    pub distinct_elements: usize,
    pub max_generator_length: usize,
    pub finite_vertex_groups: bool,
    pub isolated_vertices: bool,
    pub join_busting: JoinBustingSection,
    pub constants: MeasuredConstants,
    pub distortion: DistortionSummary,
    pub certificates: Vec<CertificateSection>,
    pub redcon: RedconSummary,
}

/// Runs every diagnostic over one shared expression sample and assembles
/// the report.
pub fn run_analysis(
    h: &SubgroupSpec,
    options: &AnalysisOptions,
) -> Result<AnalysisReport, AnalyzeError> {
    let graph = h.graph().clone();
    let sample = sample_expressions(h, options.horizon, options.budget, options.seed)?;
    let profile = profile_from_sample(h, &sample, options.horizon)?;
    let constants = constants_from_sample(h, &sample, options.budget)?;
    let metric = StarMetric::new(&graph);
    let distortion = distortion_from_sample(h, &sample, &metric, &constants, profile.n_obs);
    let certificates = certificates_from_sample(&sample)?;
    let redcon = redcon_from_sample(h, &sample, options.budget)?;
    let finite_vertex_groups = graph.vertices().all(|v| graph.group(v).is_finite());
    Ok(AnalysisReport {
        subgroup: options.subgroup_name.clone(),
        generators: h.generators.iter().map(|g| g.serialize()).collect(),
        config_hash: options.config_hash.clone(),
        seed: options.seed,
        horizon: options.horizon,
        budget: options.budget,
        exhaustive: sample.exhaustive,
        sample_size: sample.words.len(),
        distinct_elements: sample.representatives.len(),
        max_generator_length: h.max_generator_length(),
        finite_vertex_groups,
        isolated_vertices: graph.has_isolated_vertices(),
        join_busting: JoinBustingSection {
            n_obs: profile.n_obs,
            per_length: profile.per_length,
            argmax_expression: profile.argmax_expression,
            witness: profile.witness.map(|w| graph.set_names(&w)),
        },
        constants,
        distortion,
        certificates: certificates
            .into_iter()
            .map(|c| CertificateSection {
                expression: c.expression,
                element: c.element.serialize(),
                lambda: graph.set_names(&c.lambda),
                conjugator: c.conjugator.serialize(),
                infinite_order: c.infinite_order,
            })
            .collect(),
        redcon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DefiningGraph;
    use crate::groups::GroupSpec;
    use proptest::prelude::*;

    fn p4() -> Arc<DefiningGraph> {
        Arc::new(
            DefiningGraph::new(
                &[
                    ("a", GroupSpec::InfiniteCyclic),
                    ("b", GroupSpec::InfiniteCyclic),
                    ("c", GroupSpec::InfiniteCyclic),
                    ("d", GroupSpec::InfiniteCyclic),
                ],
                &[("a", "b"), ("b", "c"), ("c", "d")],
            )
            .unwrap(),
        )
    }

    fn p4_mod3() -> Arc<DefiningGraph> {
        Arc::new(
            DefiningGraph::new(
                &[
                    ("a", GroupSpec::FiniteCyclic { order: 3 }),
                    ("b", GroupSpec::FiniteCyclic { order: 3 }),
                    ("c", GroupSpec::FiniteCyclic { order: 3 }),
                    ("d", GroupSpec::FiniteCyclic { order: 3 }),
                ],
                &[("a", "b"), ("b", "c"), ("c", "d")],
            )
            .unwrap(),
        )
    }

    fn w(graph: &Arc<DefiningGraph>, text: &str) -> PrismWord {
        PrismWord::parse(graph, text).unwrap()
    }

    fn subgroup(graph: &Arc<DefiningGraph>, gens: &[&str]) -> SubgroupSpec {
        let words = gens.iter().map(|t| w(graph, t)).collect();
        SubgroupSpec::new(graph, words).unwrap()
    }

    #[test]
    fn expression_enumeration_is_reduced_and_deduplicated() {
        let g = p4();
        let h = subgroup(&g, &["a:1.d:1"]);
        let sample = sample_expressions(&h, 4, 1000, 7).unwrap();
        assert!(sample.exhaustive);
        assert_eq!(sample.words.len(), 8);
        assert_eq!(sample.representatives.len(), 8);
        for word in &sample.words {
            for pair in word.expression.windows(2) {
                assert!(!cancels(pair[0], pair[1]));
            }
            assert_eq!(
                word.spelling.letters().len(),
                2 * word.expression.len(),
                "spelling concatenates one generator word per expression letter"
            );
        }

        let two = subgroup(&g, &["a:1.b:1", "b:-1.c:1"]);
        let sample = sample_expressions(&two, 2, 1000, 7).unwrap();
        assert_eq!(sample.words.len(), 4 + 12);
        let mut elements = BTreeSet::new();
        for &idx in &sample.representatives {
            let word = &sample.words[idx];
            assert!(!word.element.letters().is_empty());
            assert!(elements.insert(word.element.clone()));
        }
    }

    #[test]
    fn sampling_above_the_budget_is_seeded_and_deterministic() {
        let g = p4();
        let h = subgroup(&g, &["a:1.b:1", "b:-1.c:1"]);
        let first = sample_expressions(&h, 5, 6, 42).unwrap();
        let second = sample_expressions(&h, 5, 6, 42).unwrap();
        assert!(!first.exhaustive);
        assert!(!first.words.is_empty());
        let render = |s: &SubgroupSample| -> Vec<String> {
            s.words.iter().map(|w| w.expression_string()).collect()
        };
        assert_eq!(render(&first), render(&second));
    }

    #[test]
    fn join_windows_follow_the_join_order() {
        let g = p4();
        let whole = max_join_subword(&w(&g, "a:1.b:1.c:1")).unwrap();
        assert_eq!(whole.length, 3);
        assert_eq!(whole.range, 0..3);
        // {a, b, c} is the star of b: the join of {b} with {a, c}.
        assert_eq!(g.set_names(&whole.witness.unwrap()), "{a, b, c}");

        let alternating = max_join_subword(&w(&g, "a:1.d:1.a:2.d:2")).unwrap();
        assert_eq!(alternating.length, 1);

        let middle = max_join_subword(&w(&g, "a:1.d:1.b:1.a:2")).unwrap();
        assert_eq!(middle.length, 2);
        assert_eq!(middle.range, 1..3);
        assert_eq!(g.set_names(&middle.witness.unwrap()), "{b, c, d}");

        let empty = max_join_subword(&PrismWord::identity(&g)).unwrap();
        assert_eq!(empty.length, 0);
        assert!(empty.witness.is_none());

        let err = max_join_subword(&w(&g, "a:1.b:1.a:-1")).unwrap_err();
        assert!(matches!(err, AnalyzeError::NotGeodesic));
    }

    #[test]
    fn join_busting_separates_the_reference_subgroups() {
        let g = p4();
        let elliptic = subgroup(&g, &["a:1.b:1"]);
        let profile = join_busting_profile(&elliptic, 20, 100_000, 7).unwrap();
        assert_eq!(profile.n_obs, 40);
        for (l, &n) in profile.per_length.iter().enumerate() {
            assert_eq!(n, 2 * (l + 1));
        }
        assert_eq!(g.set_names(&profile.witness.unwrap()), "{a, b}");
        assert!(profile.argmax_expression.starts_with("s1"));

        let busting = subgroup(&g, &["a:1.d:1"]);
        let profile = join_busting_profile(&busting, 20, 100_000, 7).unwrap();
        assert_eq!(profile.n_obs, 1);
        assert!(profile.per_length.iter().all(|&n| n == 1));

        let trivial = SubgroupSpec::new(&g, Vec::new()).unwrap();
        let profile = join_busting_profile(&trivial, 5, 100, 7).unwrap();
        assert_eq!(profile.n_obs, 0);
    }

    #[test]
    fn diagram_constants_match_reference_subgroups() {
        let g = p4();
        let busting = subgroup(&g, &["a:1.d:1"]);
        let constants = measure_constants(&busting, 6, 100_000, 7).unwrap();
        assert_eq!(
            constants,
            MeasuredConstants {
                d_obs: 0,
                k_obs: 0,
                c_obs: 0
            }
        );

        let elliptic = subgroup(&g, &["a:1.b:1"]);
        let narrow = measure_constants(&elliptic, 4, 100_000, 7).unwrap();
        let wide = measure_constants(&elliptic, 8, 100_000, 7).unwrap();
        assert!(narrow.d_obs >= 1);
        assert!(wide.d_obs > narrow.d_obs, "spread grows with the horizon");

        let mixed = subgroup(&g, &["a:1.b:1", "b:-1.c:1"]);
        let constants = measure_constants(&mixed, 3, 100_000, 7).unwrap();
        assert!(constants.d_obs >= 1);

        let cancelling = subgroup(&g, &["a:1.b:1", "b:-1.a:-1.c:1"]);
        let constants = measure_constants(&cancelling, 2, 100_000, 7).unwrap();
        assert!(constants.k_obs >= 1, "a fully cancelled generator vanishes");
    }

    #[test]
    fn distortion_rows_match_reference_subgroups() {
        let g = p4();
        let busting = subgroup(&g, &["a:1.d:1"]);
        let table = distortion_table(&busting, 8, 100_000, 7).unwrap();
        assert!(table.consistent);
        assert_eq!(table.rows.len(), 16);
        for row in &table.rows {
            assert_eq!(row.prism_length, 2 * row.subgroup_length);
            assert_eq!(row.star_length, row.prism_length);
        }
        assert_eq!(table.d_constant, 1);
        assert_eq!(table.k_constant, 0);
        assert_eq!(table.fitted_lambda, 2.0);
        assert_eq!(table.fitted_c, 0.0);

        let elliptic = subgroup(&g, &["a:1.b:1"]);
        let table = distortion_table(&elliptic, 8, 100_000, 7).unwrap();
        assert!(table.consistent);
        for row in &table.rows {
            assert_eq!(row.prism_length, 2);
            assert_eq!(row.star_length, 1);
        }
    }

    #[test]
    fn homogeneity_index_goldens() {
        let g = p4();
        let lambda: VertexSet = w(&g, "a:1.d:1").support();
        assert_eq!(
            homogeneity_index(&w(&g, "a:1.d:1.a:2.d:2"), &lambda).unwrap(),
            Some(2)
        );
        assert_eq!(homogeneity_index(&w(&g, "a:1"), &lambda).unwrap(), None);
        let single: VertexSet = w(&g, "a:1").support();
        assert_eq!(homogeneity_index(&w(&g, "a:1"), &single).unwrap(), Some(1));
        assert!(matches!(
            homogeneity_index(&w(&g, "a:1.b:1"), &single).unwrap_err(),
            AnalyzeError::OutsideSet { .. }
        ));
        assert!(matches!(
            homogeneity_index(&w(&g, "a:1.b:1.a:-1"), &lambda).unwrap_err(),
            AnalyzeError::NotGeodesic
        ));
    }

    #[test]
    fn element_order_detection() {
        let g = p4();
        assert!(element_has_infinite_order(&w(&g, "a:1")));
        assert!(!element_has_infinite_order(&PrismWord::identity(&g)));

        let f = p4_mod3();
        assert!(!element_has_infinite_order(&w(&f, "a:1.b:1")));
        assert!(element_has_infinite_order(&w(&f, "a:1.c:1")));
        assert!(!element_has_infinite_order(&w(&f, "c:1.a:1.c:-1")));
    }

    #[test]
    fn certificates_expose_join_ellipticity() {
        let g = p4();
        let elliptic = subgroup(&g, &["a:1.b:1"]);
        let certs = obstruction_certificates(&elliptic, 5, 100_000, 7).unwrap();
        assert_eq!(certs.len(), 10);
        for cert in &certs {
            assert_eq!(g.set_names(&cert.lambda), "{a, b}");
            assert!(cert.conjugator.letters().is_empty());
            assert!(cert.infinite_order);
        }

        let busting = subgroup(&g, &["a:1.d:1"]);
        let certs = obstruction_certificates(&busting, 12, 100_000, 7).unwrap();
        assert!(certs.is_empty());

        let conjugated = subgroup(&g, &["c:1.a:1.b:1.c:-1"]);
        let certs = obstruction_certificates(&conjugated, 3, 100_000, 7).unwrap();
        assert!(!certs.is_empty());
        for cert in &certs {
            let core = cert
                .conjugator
                .inverse()
                .multiply(&cert.element)
                .and_then(|x| x.multiply(&cert.conjugator))
                .unwrap();
            assert!(core.support().is_subset(&cert.lambda));
            assert!(g.is_join(&cert.lambda).unwrap().is_some());
        }

        let hidden = subgroup(&g, &["c:1.a:1.d:1.c:-1"]);
        let certs = obstruction_certificates(&hidden, 3, 100_000, 7).unwrap();
        assert!(certs.is_empty(), "the core {{a, d}} sits in no join");
    }

    #[test]
    fn redcon_audit_is_clean_on_reference_subgroups() {
        let g = p4();
        for (gens, horizon) in [
            (vec!["a:1.d:1"], 6),
            (vec!["a:1.b:1"], 6),
            (vec!["a:1.b:1", "b:-1.c:1"], 3),
        ] {
            let h = subgroup(&g, &gens);
            let audit = redcon_audit(&h, horizon, 100_000, 7).unwrap();
            assert!(audit.checks > 0);
            assert_eq!(audit.failures, 0, "generators {gens:?}");
        }
    }

    #[test]
    fn analysis_report_is_deterministic_json() {
        let g = p4();
        let h = subgroup(&g, &["a:1.b:1", "b:-1.c:1"]);
        let options = AnalysisOptions {
            horizon: 3,
            budget: 100_000,
            seed: 11,
            subgroup_name: "mixed".to_string(),
            config_hash: "deadbeef".to_string(),
        };
        let first = run_analysis(&h, &options).unwrap();
        let second = run_analysis(&h, &options).unwrap();
        let a = serde_json::to_string(&first).unwrap();
        let b = serde_json::to_string(&second).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"config_hash\":\"deadbeef\""));
        assert!(first.exhaustive);
        assert!(!first.finite_vertex_groups);
        assert!(!first.isolated_vertices);
        let parsed: AnalysisReport = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed.sample_size, first.sample_size);
    }

    fn letter_strategy(graph: Arc<DefiningGraph>) -> impl Strategy<Value = Letter> {
        use crate::groups::GroupElement;
        (0u32..4, prop_oneof![(-3i64..0), (1i64..4)]).prop_map(move |(v, e)| {
            Letter::new(&graph, VertexId(v), GroupElement::Int(e)).unwrap()
        })
    }

    fn word_strategy(max_len: usize) -> impl Strategy<Value = PrismWord> {
        let graph = p4();
        let g2 = graph.clone();
        proptest::collection::vec(letter_strategy(graph), 0..max_len)
            .prop_map(move |letters| PrismWord::from_letters(&g2, letters).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn join_windows_are_sound(word in word_strategy(10)) {
            let canonical = word.canonical();
            let window = max_join_subword(&canonical).unwrap();
            if let Some(lambda) = &window.witness {
                let support: VertexSet = canonical.letters()[window.range.clone()]
                    .iter()
                    .map(|l| l.vertex)
                    .collect();
                prop_assert!(support.is_subset(lambda));
                prop_assert!(canonical.graph().is_join(lambda).unwrap().is_some());
            } else {
                prop_assert_eq!(window.length, 0);
            }
            prop_assert!(window.length <= canonical.prism_length());
            if !canonical.letters().is_empty() {
                // No isolated vertices here, so single letters always fit.
                prop_assert!(window.length >= 1);
            }
        }

        #[test]
        fn infinite_order_detection_agrees_with_powers(word in word_strategy(8)) {
            let canonical = word.canonical();
            if element_has_infinite_order(&canonical) {
                for n in 2..=6 {
                    prop_assert!(!canonical.pow(n).letters().is_empty());
                }
            } else {
                // All vertex groups here are torsion free, so only the
                // identity has finite order.
                prop_assert!(canonical.letters().is_empty());
            }
        }
    }
}
