//! Star metric, hyperplane carriers, contact-graph distance bounds, and
//! elliptic/loxodromic diagnostics.
//!
//! The star generating set extends the prism one: a star word is any
//! nontrivial element supported in the star of a single vertex. Star length
//! is the least number of such factors. Hyperplanes are tracked through
//! their carriers, which are cosets of star parabolics; two hyperplanes are
//! in contact exactly when their carriers intersect.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DefiningGraph, VertexId, VertexSet};
use crate::words::{Letter, PrismWord, WordError};

#[derive(Debug, Error)]
pub enum ContactError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("word is not geodesic")]
    NotGeodesic,
    #[error("hyperplanes belong to different defining graphs")]
    GraphMismatch,
    #[error("power horizon must be at least 1")]
    BadHorizon,
}

/// Hyperplane dual to a letter at `vertex`, remembered through the carrier
/// coset `g · G_Star(vertex)`. The representative is canonical: no
/// `Star(vertex)`-letter can be stripped from its right, so equal cosets
/// produce equal representatives.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hyperplane {
    pub vertex: VertexId,
    pub carrier_rep: PrismWord,
}

impl Hyperplane {
    /// Hyperplane at `vertex` whose carrier contains `position · G_Star(vertex)`.
    pub fn new(vertex: VertexId, position: &PrismWord) -> Hyperplane {
        let star = position.graph().vertex_star(vertex);
        let (prefix, _divisor) = position.strip_right_divisor(&star);
        Hyperplane {
            vertex,
            carrier_rep: prefix,
        }
    }

    /// Whether the carriers share a point: the connecting element must
    /// factor through the two star parabolics.
    pub fn carriers_intersect(&self, other: &Hyperplane) -> Result<bool, ContactError> {
        let graph = self.carrier_rep.graph();
        if graph != other.carrier_rep.graph() {
            return Err(ContactError::GraphMismatch);
        }
        let x = self.carrier_rep.inverse().multiply(&other.carrier_rep)?;
        let a = graph.vertex_star(self.vertex);
        let b = graph.vertex_star(other.vertex);
        Ok(x.in_parabolic_product(&a, &b).is_some())
    }
}

/// One row of an orbit profile: exact lengths of the n-th power.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub n: usize,
    pub prism: usize,
    pub star: usize,
}

/// Power-by-power length growth of a cyclic subgroup, with the star-length
/// slope at the horizon. The estimate upper-bounds the stable translation
/// length at this horizon; it certifies nothing beyond it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitProfile {
    pub rows: Vec<OrbitRow>,
    pub translation_estimate: f64,
}

/// Star-length calculator with a shared monotone memo: concurrent readers,
/// insert-if-absent writers, answers independent of interleaving.
pub struct StarMetric {
    graph: Arc<DefiningGraph>,
    stars: Vec<VertexSet>,
    memo: RwLock<HashMap<Vec<Letter>, usize>>,
}

impl StarMetric {
    pub fn new(graph: &Arc<DefiningGraph>) -> StarMetric {
        let stars: BTreeSet<VertexSet> =
            graph.vertices().map(|v| graph.vertex_star(v)).collect();
        StarMetric {
            graph: graph.clone(),
            stars: stars.into_iter().collect(),
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn graph(&self) -> &Arc<DefiningGraph> {
        &self.graph
    }

    /// Least `n` such that the element splits as `s_1 ⋯ s_n` with every
    /// factor inside one star parabolic. Computed by the recurrence
    /// `f(g) = 1 + min f(tail)` over stars with a nonempty maximal head;
    /// taking the maximal head per star is lossless because enlarging the
    /// first factor keeps the remainder decomposable.
    pub fn star_length(&self, word: &PrismWord) -> usize {
        self.star_length_canonical(word.canonical())
    }

    fn star_length_canonical(&self, word: PrismWord) -> usize {
        if word.is_empty() {
            return 0;
        }
        if let Some(&n) = self.memo.read().expect("memo lock").get(word.letters()) {
            return n;
        }
        let mut best = usize::MAX;
        for star in &self.stars {
            let (head, tail) = word.head_in_parabolic(star);
            if head.is_empty() {
                continue;
            }
            best = best.min(1 + self.star_length_canonical(tail));
        }
        debug_assert!(best < usize::MAX, "every letter lies in its own star");
        self.memo
            .write()
            .expect("memo lock")
            .insert(word.letters().to_vec(), best);
        best
    }

    /// One optimal star decomposition, following the recurrence greedily;
    /// factors multiply back to the element and their count is the star
    /// length.
    pub fn star_factorization(&self, word: &PrismWord) -> Vec<PrismWord> {
        let mut cur = word.canonical();
        let mut factors = Vec::new();
        while !cur.is_empty() {
            let target = self.star_length_canonical(cur.clone());
            let chosen = self
                .stars
                .iter()
                .filter_map(|star| {
                    let (head, tail) = cur.head_in_parabolic(star);
                    (!head.is_empty()).then_some((head, tail))
                })
                .find(|(_, tail)| 1 + self.star_length_canonical(tail.clone()) == target)
                .expect("recurrence admits a witness");
            factors.push(chosen.0);
            cur = chosen.1;
        }
        factors
    }

    /// Sandwich bounds on the contact-graph distance between two
    /// hyperplanes: `(0, 0)` for equal ones, `(1, 1)` for distinct carriers
    /// that intersect, and otherwise `(max(0, s − 2), 2s + 2)` where `s` is
    /// the star length of the connecting element.
    pub fn contact_distance_bounds(
        &self,
        h1: &Hyperplane,
        h2: &Hyperplane,
    ) -> Result<(usize, usize), ContactError> {
        if h1 == h2 {
            return Ok((0, 0));
        }
        if h1.carriers_intersect(h2)? {
            return Ok((1, 1));
        }
        let x = h1.carrier_rep.inverse().multiply(&h2.carrier_rep)?;
        let s = self.star_length(&x);
        Ok((s.saturating_sub(2), 2 * s + 2))
    }

    /// Breadth-first contact distance inside a restricted hyperplane set:
    /// the two endpoints plus every hyperplane based at a prefix of some
    /// geodesic spelling of the connecting element. That set contains a
    /// contact path of length at most `2s + 2`, so a result is always
    /// within the sandwich bounds. Returns `None` when the shuffle budget
    /// is exhausted or the endpoints fail to connect inside the set.
    pub fn restricted_contact_distance(
        &self,
        h1: &Hyperplane,
        h2: &Hyperplane,
        budget: usize,
    ) -> Result<Option<usize>, ContactError> {
        if h1.carrier_rep.graph() != h2.carrier_rep.graph() {
            return Err(ContactError::GraphMismatch);
        }
        if h1 == h2 {
            return Ok(Some(0));
        }
        let x = h1.carrier_rep.inverse().multiply(&h2.carrier_rep)?;
        let spellings = match x.geodesic_representatives(budget) {
            Ok(reps) => reps,
            Err(WordError::ShuffleBudget { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let mut candidates: BTreeSet<Hyperplane> = BTreeSet::new();
        candidates.insert(h1.clone());
        candidates.insert(h2.clone());
        for spelling in &spellings {
            for cut in 0..=spelling.len() {
                let prefix = PrismWord::from_letters(
                    self.graph(),
                    spelling.letters()[..cut].to_vec(),
                )?;
                let position = h1.carrier_rep.multiply(&prefix)?;
                for v in self.graph.vertices() {
                    candidates.insert(Hyperplane::new(v, &position));
                }
                if candidates.len() > budget {
                    return Ok(None);
                }
            }
        }
        let nodes: Vec<Hyperplane> = candidates.into_iter().collect();
        let index: BTreeMap<&Hyperplane, usize> =
            nodes.iter().enumerate().map(|(i, h)| (h, i)).collect();
        let start = index[h1];
        let goal = index[h2];
        let mut dist = vec![usize::MAX; nodes.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            if u == goal {
                return Ok(Some(dist[u]));
            }
            for w in 0..nodes.len() {
                if dist[w] == usize::MAX && nodes[u].carriers_intersect(&nodes[w])? {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        Ok(None)
    }

    /// Exact prism and star lengths of `g, g², …, g^n_max`, plus the star
    /// slope at the horizon.
    pub fn orbit_profile(
        &self,
        word: &PrismWord,
        n_max: usize,
    ) -> Result<OrbitProfile, ContactError> {
        if n_max == 0 {
            return Err(ContactError::BadHorizon);
        }
        let base = word.canonical();
        let mut cur = PrismWord::identity(self.graph());
        let mut rows = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            cur = cur.multiply(&base)?;
            rows.push(OrbitRow {
                n,
                prism: cur.prism_length(),
                star: self.star_length(&cur),
            });
        }
        let translation_estimate = rows.last().map_or(0.0, |r| r.star as f64 / r.n as f64);
        Ok(OrbitProfile {
            rows,
            translation_estimate,
        })
    }
}

/// Hyperplanes dual to the letters of a geodesic word, in first-crossing
/// order with duplicates merged: letter `i` at vertex `v` crosses the
/// hyperplane carried by `(w_1 ⋯ w_{i−1}) · G_Star(v)`.
pub fn hyperplanes_crossed(word: &PrismWord) -> Result<Vec<Hyperplane>, ContactError> {
    if !word.is_geodesic() {
        return Err(ContactError::NotGeodesic);
    }
    let graph = word.graph();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for i in 0..word.len() {
        let prefix = PrismWord::from_letters(graph, word.letters()[..i].to_vec())?;
        let h = Hyperplane::new(word.letters()[i].vertex, &prefix);
        if seen.insert(h.clone()) {
            out.push(h);
        }
    }
    Ok(out)
}

fn front_movable(graph: &DefiningGraph, letters: &[Letter], i: usize) -> bool {
    letters[..i]
        .iter()
        .all(|l| graph.adjacent(l.vertex, letters[i].vertex))
}

fn end_movable(graph: &DefiningGraph, letters: &[Letter], j: usize) -> bool {
    letters[j + 1..]
        .iter()
        .all(|l| graph.adjacent(l.vertex, letters[j].vertex))
}

/// Cyclic reduction: conjugates the element until no rotation of its
/// geodesic admits a length reduction. Returns the support of the reduced
/// core and the conjugator `c`, so that `c⁻¹ · g · c` is the core; `g` is
/// conjugate into the parabolic on the support.
///
/// A geodesic shortens under rotation exactly when some letter commutes to
/// the front while a distinct letter of the same vertex commutes to the
/// end; conjugating by the front letter then merges the pair.
pub fn essential_support(word: &PrismWord) -> (VertexSet, PrismWord) {
    let graph = word.graph().clone();
    let mut cur = word.canonical();
    let mut conj = PrismWord::identity(&graph);
    'reduce: loop {
        let letters = cur.letters();
        for i in 0..letters.len() {
            if !front_movable(&graph, letters, i) {
                continue;
            }
            let v = letters[i].vertex;
            let partner = (0..letters.len())
                .find(|&j| j != i && letters[j].vertex == v && end_movable(&graph, letters, j));
            if partner.is_some() {
                let ell = PrismWord::from_letters(&graph, vec![letters[i].clone()])
                    .expect("letter already validated");
                cur = ell
                    .inverse()
                    .multiply(&cur)
                    .and_then(|w| w.multiply(&ell))
                    .expect("same graph");
                conj = conj.multiply(&ell).expect("same graph");
                continue 'reduce;
            }
        }
        break;
    }
    (cur.support(), conj)
}

/// Searches for a join witness of ellipticity: cyclically reduces, then
/// asks the defining graph whether the core's support sits inside a join.
/// A witness `(Λ, c)` satisfies `c⁻¹ · g · c ∈ G_Λ` with `Λ` a join, which
/// pins every conjugated power inside two star factors.
pub fn is_conjugate_into_join(
    word: &PrismWord,
) -> Result<Option<(VertexSet, PrismWord)>, ContactError> {
    let (support, conj) = essential_support(word);
    if support.is_empty() {
        return Ok(None);
    }
    let witness = word
        .graph()
        .is_contained_in_join(&support)
        .map_err(WordError::from)?;
    Ok(witness.map(|lambda| (lambda, conj)))
}
