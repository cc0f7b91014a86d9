//! Words in the prism generating set: every nontrivial element of every
//! vertex group is a single letter. Two rewriting moves generate all
//! equalities between words of the same element: swapping letters of
//! adjacent vertices, and merging two letters of the same vertex once only
//! star-letters separate them. A word is geodesic exactly when no merge is
//! reachable, and all geodesics of an element differ by swaps alone.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DefiningGraph, GraphError, VertexId, VertexSet};
use crate::groups::{GroupElement, GroupError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("letter at vertex `{0}` is the identity; prism letters are nontrivial")]
    TrivialLetter(String),
    #[error("cannot parse word `{text}`: {reason}")]
    Parse { text: String, reason: String },
    #[error("shuffle enumeration exceeded the budget of {limit} words")]
    ShuffleBudget { limit: usize },
    #[error("words belong to different defining graphs")]
    GraphMismatch,
    #[error("trace move {index} ({move_desc}) is illegal on this word")]
    BadTrace { index: usize, move_desc: String },
}

/// One prism generator: a nontrivial element of one vertex group.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub vertex: VertexId,
    pub element: GroupElement,
}

impl Letter {
    pub fn new(
        graph: &DefiningGraph,
        vertex: VertexId,
        element: GroupElement,
    ) -> Result<Self, WordError> {
        let spec = graph.group(vertex);
        spec.multiply(&element, &spec.identity())?;
        if spec.is_identity(&element) {
            return Err(WordError::TrivialLetter(graph.name(vertex).to_string()));
        }
        Ok(Letter { vertex, element })
    }
}

/// A word in the prism generating set over a fixed defining graph.
#[derive(Debug, Clone)]
pub struct PrismWord {
    graph: Arc<DefiningGraph>,
    letters: Vec<Letter>,
}

// Words are compared by their letters; callers keep one ambient graph per
// computation, and the arithmetic entry points reject mixed graphs.
impl PartialEq for PrismWord {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters
    }
}

impl Eq for PrismWord {}

impl std::hash::Hash for PrismWord {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.letters.hash(state);
    }
}

impl PartialOrd for PrismWord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PrismWord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let by_len = self.letters.len().cmp(&other.letters.len());
        by_len.then_with(|| self.letters.cmp(&other.letters))
    }
}

/// A single rewriting move; positions refer to the word the move is applied
/// to, not the original input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    /// Swap the letters at positions `i` and `i+1` (their vertices must be
    /// adjacent).
    Swap(usize),
    /// Combine the same-vertex letters at positions `i` and `i+1`; if the
    /// product is trivial both letters disappear.
    Merge(usize),
}

/// Replayable record of the rewriting that turned one word into another.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub moves: Vec<Move>,
}

impl ReductionTrace {
    /// Applies the recorded moves to `word`, failing if any move is illegal
    /// where it lands.
    pub fn replay(&self, word: &PrismWord) -> Result<PrismWord, WordError> {
        let graph = word.graph.clone();
        let mut letters = word.letters.clone();
        for (index, mv) in self.moves.iter().enumerate() {
            let bad = |desc: String| WordError::BadTrace {
                index,
                move_desc: desc,
            };
            match *mv {
                Move::Swap(i) => {
                    if i + 1 >= letters.len() {
                        return Err(bad(format!("swap {i} out of range")));
                    }
                    if !graph.adjacent(letters[i].vertex, letters[i + 1].vertex) {
                        return Err(bad(format!("swap {i} between non-commuting letters")));
                    }
                    letters.swap(i, i + 1);
                }
                Move::Merge(i) => {
                    if i + 1 >= letters.len() {
                        return Err(bad(format!("merge {i} out of range")));
                    }
                    let v = letters[i].vertex;
                    if letters[i + 1].vertex != v {
                        return Err(bad(format!("merge {i} across distinct vertices")));
                    }
                    let spec = graph.group(v);
                    let product = spec.multiply(&letters[i].element, &letters[i + 1].element)?;
                    letters.remove(i + 1);
                    if spec.is_identity(&product) {
                        letters.remove(i);
                    } else {
                        letters[i].element = product;
                    }
                }
            }
        }
        Ok(PrismWord { graph, letters })
    }
}

impl PrismWord {
    pub fn identity(graph: &Arc<DefiningGraph>) -> Self {
        PrismWord {
            graph: graph.clone(),
            letters: Vec::new(),
        }
    }

    pub fn from_letters(graph: &Arc<DefiningGraph>, letters: Vec<Letter>) -> Result<Self, WordError> {
        for l in &letters {
            Letter::new(graph, l.vertex, l.element.clone())?;
        }
        Ok(PrismWord {
            graph: graph.clone(),
            letters,
        })
    }

    pub fn graph(&self) -> &Arc<DefiningGraph> {
        &self.graph
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Vertices used by the letters of this word (meaningful as the support
    /// of the element when the word is geodesic).
    pub fn support(&self) -> VertexSet {
        self.letters.iter().map(|l| l.vertex).collect()
    }

    /// Parses `vertex:payload` tokens separated by `.`; a token without a
    /// colon continues the previous payload (free-group payloads contain
    /// dots themselves).
    pub fn parse(graph: &Arc<DefiningGraph>, text: &str) -> Result<Self, WordError> {
        let err = |reason: &str| WordError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        if text.trim().is_empty() {
            return Ok(Self::identity(graph));
        }
        let mut tokens: Vec<(String, String)> = Vec::new();
        for piece in text.trim().split('.') {
            match piece.split_once(':') {
                Some((vertex, payload)) => {
                    tokens.push((vertex.to_string(), payload.to_string()));
                }
                None => match tokens.last_mut() {
                    Some((_, payload)) => {
                        payload.push('.');
                        payload.push_str(piece);
                    }
                    None => return Err(err("word must start with a `vertex:payload` token")),
                },
            }
        }
        let mut letters = Vec::with_capacity(tokens.len());
        for (vertex_name, payload) in tokens {
            let vertex = graph.vertex(&vertex_name)?;
            let element = graph.group(vertex).parse_payload(&payload)?;
            letters.push(Letter::new(graph, vertex, element)?);
        }
        Ok(PrismWord {
            graph: graph.clone(),
            letters,
        })
    }

    /// Serializes back to the `vertex:payload` dot-separated form; inverse
    /// of [`PrismWord::parse`], byte for byte.
    pub fn serialize(&self) -> String {
        self.letters
            .iter()
            .map(|l| {
                format!(
                    "{}:{}",
                    self.graph.name(l.vertex),
                    self.graph.group(l.vertex).serialize_payload(&l.element)
                )
            })
            .collect::<Vec<_>>()
            .join(".")
    }

    /// First pair `(i, j)` with `i < j` of same-vertex letters separated
    /// only by star-letters of that vertex, if any. Such a pair is exactly
    /// what blocks a word from being geodesic.
    pub fn geodesic_violation(&self) -> Option<(usize, usize)> {
        let g = &self.graph;
        for i in 0..self.letters.len() {
            let v = self.letters[i].vertex;
            for j in (i + 1)..self.letters.len() {
                let u = self.letters[j].vertex;
                if u == v {
                    return Some((i, j));
                }
                if !g.adjacent(u, v) {
                    break;
                }
            }
        }
        None
    }

    pub fn is_geodesic(&self) -> bool {
        self.geodesic_violation().is_none()
    }

    /// Rewrites to the canonical geodesic form: repeatedly resolve the least
    /// violating pair by commuting the right letter inward and merging, then
    /// order the result as the lexicographically least shuffle. The returned
    /// trace replays the input to the output exactly.
    pub fn reduce_to_geodesic(&self) -> (PrismWord, ReductionTrace) {
        let graph = self.graph.clone();
        let mut letters = self.letters.clone();
        let mut moves = Vec::new();

        loop {
            let probe = PrismWord {
                graph: graph.clone(),
                letters: letters.clone(),
            };
            let Some((i, j)) = probe.geodesic_violation() else {
                break;
            };
            for k in ((i + 1)..j).rev() {
                letters.swap(k, k + 1);
                moves.push(Move::Swap(k));
            }
            let v = letters[i].vertex;
            let spec = graph.group(v);
            let product = spec
                .multiply(&letters[i].element, &letters[i + 1].element)
                .expect("same vertex group");
            moves.push(Move::Merge(i));
            letters.remove(i + 1);
            if spec.is_identity(&product) {
                letters.remove(i);
            } else {
                letters[i].element = product;
            }
        }

        canonical_shuffle(&graph, &mut letters, &mut moves);
        (PrismWord { graph, letters }, ReductionTrace { moves })
    }

    /// Length of the element this word spells, i.e. of its geodesic form.
    pub fn prism_length(&self) -> usize {
        if self.is_geodesic() {
            self.letters.len()
        } else {
            self.reduce_to_geodesic().0.len()
        }
    }

    /// Canonical geodesic form of the same element.
    pub fn canonical(&self) -> PrismWord {
        self.reduce_to_geodesic().0
    }

    /// All geodesic words spelling this element, i.e. the full shuffle class
    /// of the canonical form, capped by `limit`.
    pub fn geodesic_representatives(&self, limit: usize) -> Result<Vec<PrismWord>, WordError> {
        let start = self.canonical();
        let graph = start.graph.clone();
        let mut seen: BTreeSet<Vec<Letter>> = BTreeSet::new();
        seen.insert(start.letters.clone());
        let mut queue = vec![start.letters];
        while let Some(current) = queue.pop() {
            for i in 0..current.len().saturating_sub(1) {
                if graph.adjacent(current[i].vertex, current[i + 1].vertex) {
                    let mut next = current.clone();
                    next.swap(i, i + 1);
                    if seen.insert(next.clone()) {
                        if seen.len() > limit {
                            return Err(WordError::ShuffleBudget { limit });
                        }
                        queue.push(next);
                    }
                }
            }
        }
        Ok(seen
            .into_iter()
            .map(|letters| PrismWord {
                graph: graph.clone(),
                letters,
            })
            .collect())
    }

    /// Splits off the maximal left divisor supported in `a`: repeatedly
    /// extracts the earliest `a`-supported letter that commutes to the
    /// front. Returns `(head, tail)` with `head · tail = self` and lengths
    /// adding; both parts come back in canonical order.
    pub fn head_in_parabolic(&self, a: &VertexSet) -> (PrismWord, PrismWord) {
        let geodesic = if self.is_geodesic() {
            self.clone()
        } else {
            self.canonical()
        };
        let graph = geodesic.graph.clone();
        let mut rest = geodesic.letters;
        let mut head = Vec::new();
        loop {
            let pick = (0..rest.len()).find(|&i| {
                a.contains(&rest[i].vertex)
                    && (0..i).all(|k| graph.adjacent(rest[k].vertex, rest[i].vertex))
            });
            match pick {
                Some(i) => head.push(rest.remove(i)),
                None => break,
            }
        }
        let head = PrismWord {
            graph: graph.clone(),
            letters: head,
        };
        let tail = PrismWord {
            graph,
            letters: rest,
        };
        (head.canonical(), tail.canonical())
    }

    /// Splits off the maximal right divisor supported in `a`, the mirror of
    /// [`PrismWord::head_in_parabolic`]. Returns `(prefix, divisor)` with
    /// `prefix · divisor = self`.
    pub fn strip_right_divisor(&self, a: &VertexSet) -> (PrismWord, PrismWord) {
        let geodesic = if self.is_geodesic() {
            self.clone()
        } else {
            self.canonical()
        };
        let graph = geodesic.graph.clone();
        let mut rest = geodesic.letters;
        let mut divisor: Vec<Letter> = Vec::new();
        loop {
            let pick = (0..rest.len()).rev().find(|&i| {
                a.contains(&rest[i].vertex)
                    && ((i + 1)..rest.len())
                        .all(|k| graph.adjacent(rest[k].vertex, rest[i].vertex))
            });
            match pick {
                Some(i) => divisor.insert(0, rest.remove(i)),
                None => break,
            }
        }
        let prefix = PrismWord {
            graph: graph.clone(),
            letters: rest,
        };
        let divisor = PrismWord {
            graph,
            letters: divisor,
        };
        (prefix.canonical(), divisor.canonical())
    }

    /// Whether the element lies in the parabolic subgroup on `a`.
    pub fn in_parabolic(&self, a: &VertexSet) -> bool {
        self.canonical().letters.iter().all(|l| a.contains(&l.vertex))
    }

    /// Splits the element as `x · y` with `x` supported in `a` and `y` in
    /// `b`, if possible: take the maximal `a`-head and test the tail.
    pub fn in_parabolic_product(
        &self,
        a: &VertexSet,
        b: &VertexSet,
    ) -> Option<(PrismWord, PrismWord)> {
        let (head, tail) = self.head_in_parabolic(a);
        if tail.in_parabolic(b) {
            Some((head, tail))
        } else {
            None
        }
    }

    /// Plain concatenation, without reduction.
    pub fn concat(&self, other: &PrismWord) -> Result<PrismWord, WordError> {
        if !(Arc::ptr_eq(&self.graph, &other.graph) || self.graph == other.graph) {
            return Err(WordError::GraphMismatch);
        }
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Ok(PrismWord {
            graph: self.graph.clone(),
            letters,
        })
    }

    /// Product in the group: concatenate and reduce to canonical form.
    pub fn multiply(&self, other: &PrismWord) -> Result<PrismWord, WordError> {
        Ok(self.concat(other)?.canonical())
    }

    /// The formal inverse word: letters reversed and inverted. Spells the
    /// inverse element, and is geodesic whenever the input is.
    pub fn inverse(&self) -> PrismWord {
        let letters = self
            .letters
            .iter()
            .rev()
            .map(|l| Letter {
                vertex: l.vertex,
                element: self
                    .graph
                    .group(l.vertex)
                    .invert(&l.element)
                    .expect("letter belongs to its group"),
            })
            .collect();
        PrismWord {
            graph: self.graph.clone(),
            letters,
        }
    }

    /// Canonical form of the `n`-th power (negative `n` inverts first).
    pub fn pow(&self, n: i32) -> PrismWord {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = PrismWord::identity(&self.graph);
        for _ in 0..n.unsigned_abs() {
            acc = acc.multiply(&base).expect("same graph");
        }
        acc
    }
}

impl fmt::Display for PrismWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.serialize())
    }
}

/// Reorders geodesic letters into the lexicographically least shuffle,
/// recording the swaps: selection of the least front-movable letter, moved
/// by adjacent transpositions.
fn canonical_shuffle(graph: &DefiningGraph, letters: &mut [Letter], moves: &mut Vec<Move>) {
    let n = letters.len();
    for pos in 0..n {
        let mut best: Option<usize> = None;
        for k in pos..n {
            let movable = (pos..k).all(|m| graph.adjacent(letters[m].vertex, letters[k].vertex));
            if movable {
                match best {
                    Some(b) if letters[k] >= letters[b] => {}
                    _ => best = Some(k),
                }
            }
        }
        let b = best.expect("position itself is always movable");
        for m in (pos..b).rev() {
            letters.swap(m, m + 1);
            moves.push(Move::Swap(m));
        }
    }
}
