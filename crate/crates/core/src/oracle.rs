//! Independent length checkers built on breadth-first search.
//!
//! Everything here deliberately avoids the reduction and canonicalization
//! machinery in [`crate::words`]: words are normalized by incremental right
//! multiplication and deduplicated through their Foata level decomposition,
//! so agreement between the two code paths is meaningful evidence rather
//! than a tautology.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{DefiningGraph, VertexSet};
use crate::words::{Letter, PrismWord};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("vertex group at `{vertex}` is infinite; ball enumeration needs finite groups")]
    InfiniteVertexGroup { vertex: String },
    #[error("ball enumeration exceeded the element limit {limit}")]
    LimitExceeded { limit: usize },
}

/// Right-multiplies a geodesic word by one letter, keeping it geodesic.
/// The letter walks left past adjacent-vertex letters; it either merges
/// with the first same-vertex letter it reaches or settles at the end.
/// No cascade is needed: a deletion cannot create a new mergeable pair,
/// because the deleted letter's vertex is adjacent to everything that
/// followed it.
pub fn right_multiply(graph: &DefiningGraph, word: &mut Vec<Letter>, letter: &Letter) {
    let v = letter.vertex;
    let mut i = word.len();
    while i > 0 {
        let cand = &word[i - 1];
        if cand.vertex == v {
            let spec = graph.group(v);
            let product = spec
                .multiply(&cand.element, &letter.element)
                .expect("same vertex group");
            if spec.is_identity(&product) {
                word.remove(i - 1);
            } else {
                word[i - 1] = Letter {
                    vertex: v,
                    element: product,
                };
            }
            return;
        }
        if !graph.adjacent(cand.vertex, v) {
            break;
        }
        i -= 1;
    }
    word.push(letter.clone());
}

/// Geodesic spelling of an arbitrary letter sequence, built letter by
/// letter through [`right_multiply`].
pub fn oracle_normal_form(graph: &DefiningGraph, letters: &[Letter]) -> Vec<Letter> {
    let mut word = Vec::new();
    for l in letters {
        right_multiply(graph, &mut word, l);
    }
    word
}

/// Foata levels of a geodesic word: each level collects the letters that
/// commute to the front of what remains, sorted within the level. Two
/// geodesic words spell the same element exactly when their levels agree.
pub fn foata_levels(graph: &DefiningGraph, word: &[Letter]) -> Vec<Vec<Letter>> {
    let mut rest = word.to_vec();
    let mut levels = Vec::new();
    while !rest.is_empty() {
        let minimal: Vec<usize> = (0..rest.len())
            .filter(|&i| {
                rest[..i]
                    .iter()
                    .all(|e| graph.adjacent(e.vertex, rest[i].vertex))
            })
            .collect();
        let mut level: Vec<Letter> = minimal.iter().map(|&i| rest[i].clone()).collect();
        level.sort();
        for &i in minimal.iter().rev() {
            rest.remove(i);
        }
        levels.push(level);
    }
    levels
}

/// Canonical key of an arbitrary letter sequence: normalize, then flatten
/// the Foata levels.
pub fn oracle_key(graph: &DefiningGraph, letters: &[Letter]) -> Vec<Letter> {
    let normal = oracle_normal_form(graph, letters);
    foata_levels(graph, &normal).into_iter().flatten().collect()
}

/// Ball of a graph product over finite vertex groups: every element within
/// the radius, keyed by Foata form, with its exact word-metric distance.
#[derive(Debug)]
pub struct PrismBall {
    graph: Arc<DefiningGraph>,
    radius: usize,
    dist: HashMap<Vec<Letter>, usize>,
}

impl PrismBall {
    pub fn graph(&self) -> &Arc<DefiningGraph> {
        &self.graph
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    /// Exact distance of a word's element, or `None` outside the ball.
    pub fn distance(&self, word: &PrismWord) -> Option<usize> {
        self.dist
            .get(&oracle_key(&self.graph, word.letters()))
            .copied()
    }

    /// Foata representatives with their distances.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<Letter>, usize)> {
        self.dist.iter().map(|(k, &d)| (k, d))
    }
}

fn prism_generators(graph: &DefiningGraph) -> Result<Vec<Letter>, OracleError> {
    let mut out = Vec::new();
    for v in graph.vertices() {
        let elements =
            graph
                .group(v)
                .nontrivial_elements()
                .ok_or_else(|| OracleError::InfiniteVertexGroup {
                    vertex: graph.name(v).to_string(),
                })?;
        out.extend(elements.into_iter().map(|element| Letter { vertex: v, element }));
    }
    Ok(out)
}

/// Breadth-first enumeration of the radius-`radius` ball, failing fast when
/// more than `limit` elements appear.
pub fn prism_ball(
    graph: &Arc<DefiningGraph>,
    radius: usize,
    limit: usize,
) -> Result<PrismBall, OracleError> {
    let gens = prism_generators(graph)?;
    let mut dist: HashMap<Vec<Letter>, usize> = HashMap::new();
    dist.insert(Vec::new(), 0);
    let mut queue: VecDeque<(Vec<Letter>, usize)> = VecDeque::from([(Vec::new(), 0)]);
    while let Some((word, d)) = queue.pop_front() {
        if d == radius {
            continue;
        }
        for gen in &gens {
            let mut next = word.clone();
            right_multiply(graph, &mut next, gen);
            let key = foata_levels(graph, &next)
                .into_iter()
                .flatten()
                .collect::<Vec<_>>();
            if !dist.contains_key(&key) {
                if dist.len() >= limit {
                    return Err(OracleError::LimitExceeded { limit });
                }
                dist.insert(key, d + 1);
                queue.push_back((next, d + 1));
            }
        }
    }
    Ok(PrismBall {
        graph: graph.clone(),
        radius,
        dist: dist
            .into_iter()
            .collect(),
    })
}

/// Star-metric distances of every ball element, by breadth-first search
/// over the ball with one generator per star-supported ball element. Exact
/// for the whole ball: optimal star factors multiply along a prism
/// geodesic, so intermediate positions never leave the ball.
pub fn star_distances(ball: &PrismBall) -> HashMap<Vec<Letter>, usize> {
    let graph = &ball.graph;
    let stars: Vec<VertexSet> = graph.vertices().map(|v| graph.vertex_star(v)).collect();
    let gens: Vec<Vec<Letter>> = ball
        .dist
        .keys()
        .filter(|key| {
            !key.is_empty()
                && stars
                    .iter()
                    .any(|s| key.iter().all(|l| s.contains(&l.vertex)))
        })
        .cloned()
        .collect();
    let mut dist: HashMap<Vec<Letter>, usize> = HashMap::new();
    dist.insert(Vec::new(), 0);
    let mut queue: VecDeque<Vec<Letter>> = VecDeque::from([Vec::new()]);
    while let Some(word) = queue.pop_front() {
        let d = dist[&word];
        for gen in &gens {
            let mut next = word.clone();
            for l in gen {
                right_multiply(graph, &mut next, l);
            }
            let key = foata_levels(graph, &next)
                .into_iter()
                .flatten()
                .collect::<Vec<_>>();
            if ball.dist.contains_key(&key) && !dist.contains_key(&key) {
                dist.insert(key.clone(), d + 1);
                queue.push_back(key);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::StarMetric;
    use crate::groups::GroupSpec;

    fn p4_mod(order: u64) -> Arc<DefiningGraph> {
        let spec = GroupSpec::FiniteCyclic { order };
        Arc::new(
            DefiningGraph::new(
                &[
                    ("a", spec.clone()),
                    ("b", spec.clone()),
                    ("c", spec.clone()),
                    ("d", spec),
                ],
                &[("a", "b"), ("b", "c"), ("c", "d")],
            )
            .unwrap(),
        )
    }

    fn p4_free() -> Arc<DefiningGraph> {
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

    #[test]
    fn right_multiplication_merges() {
        let g = p4_free();
        let word = PrismWord::parse(&g, "a:1.b:1.a:1").unwrap();
        let normal = oracle_normal_form(&g, word.letters());
        assert_eq!(normal.len(), 2);
        let key = oracle_key(&g, word.letters());
        let via_reducer = word.canonical();
        assert_eq!(key, via_reducer.letters().to_vec());
    }

    #[test]
    fn foata_separates_elements() {
        let g = p4_free();
        // Commuting spellings of one element: the right-multiplication
        // forms differ as words, the Foata keys agree.
        let z = PrismWord::parse(&g, "a:1.b:1").unwrap();
        let zc = PrismWord::parse(&g, "b:1.a:1").unwrap();
        assert_ne!(
            oracle_normal_form(&g, z.letters()),
            oracle_normal_form(&g, zc.letters())
        );
        assert_eq!(oracle_key(&g, z.letters()), oracle_key(&g, zc.letters()));

        // a and c do not commute: genuinely different elements, different
        // keys.
        let x = PrismWord::parse(&g, "a:1.c:1").unwrap();
        let y = PrismWord::parse(&g, "c:1.a:1").unwrap();
        assert_ne!(oracle_key(&g, x.letters()), oracle_key(&g, y.letters()));
        assert_ne!(oracle_key(&g, x.letters()), oracle_key(&g, z.letters()));
    }

    #[test]
    fn ball_counts_match_hand_enumeration() {
        let g = p4_mod(3);
        assert_eq!(prism_ball(&g, 0, 10).unwrap().len(), 1);
        assert_eq!(prism_ball(&g, 1, 100).unwrap().len(), 9);
        // Distance-2 elements: 6 ordered non-adjacent vertex pairs and
        // 3 unordered adjacent ones, each contributing 2·2 products.
        assert_eq!(prism_ball(&g, 2, 1000).unwrap().len(), 9 + 24 + 12);
    }

    #[test]
    fn ball_distances_agree_with_reducer() {
        let g = p4_mod(3);
        let ball = prism_ball(&g, 3, 100_000).unwrap();
        for (key, d) in ball.iter() {
            let word = PrismWord::from_letters(&g, key.clone()).unwrap();
            assert_eq!(word.prism_length(), d, "{}", word.serialize());
        }
    }

    #[test]
    fn star_distances_spot_checks() {
        let g = p4_mod(3);
        let ball = prism_ball(&g, 3, 100_000).unwrap();
        let star = star_distances(&ball);
        let metric = StarMetric::new(&g);
        for text in ["a:1.b:1", "a:1.d:1", "a:1.d:1.a:2", "c:1.a:1.d:1"] {
            let word = PrismWord::parse(&g, text).unwrap();
            let key = oracle_key(&g, word.letters());
            assert_eq!(
                star[&key],
                metric.star_length(&word),
                "star length of {text}"
            );
        }
    }

    #[test]
    fn infinite_groups_are_rejected() {
        let g = p4_free();
        assert_eq!(
            prism_ball(&g, 2, 100).unwrap_err(),
            OracleError::InfiniteVertexGroup {
                vertex: "a".to_string()
            }
        );
    }

    #[test]
    fn limit_is_enforced() {
        let g = p4_mod(3);
        assert_eq!(
            prism_ball(&g, 2, 10).unwrap_err(),
            OracleError::LimitExceeded { limit: 10 }
        );
    }
}
