//! Seeded random generators for words, identity words and supported words.
//! Everything is driven by one explicit seed so test corpora and reports
//! can be regenerated exactly.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{DefiningGraph, VertexId, VertexSet};
use crate::groups::{GroupElement, GroupSpec};
use crate::words::{Letter, PrismWord};

/// Seeded source of random letters and words over one defining graph.
pub struct WordSampler {
    graph: Arc<DefiningGraph>,
    rng: ChaCha8Rng,
}

impl WordSampler {
    pub fn new(graph: &Arc<DefiningGraph>, seed: u64) -> WordSampler {
        WordSampler {
            graph: graph.clone(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn graph(&self) -> &Arc<DefiningGraph> {
        &self.graph
    }

    fn element(&mut self, spec: &GroupSpec) -> GroupElement {
        match spec {
            GroupSpec::InfiniteCyclic => {
                let mut e = self.rng.gen_range(-3i64..3);
                if e >= 0 {
                    e += 1;
                }
                GroupElement::Int(e)
            }
            GroupSpec::FreeAbelian { rank } => {
                let n = *rank as usize;
                let mut v = vec![0i64; n];
                while v.iter().all(|&x| x == 0) {
                    for slot in v.iter_mut() {
                        *slot = self.rng.gen_range(-2i64..=2);
                    }
                }
                GroupElement::IntVec(v)
            }
            GroupSpec::FiniteCyclic { order } => {
                let cap = (*order - 1).min(6);
                GroupElement::Residue(self.rng.gen_range(1..=cap))
            }
            GroupSpec::Free { rank } => {
                let g = self.rng.gen_range(0..*rank);
                let mut e = self.rng.gen_range(-2i64..2);
                if e >= 0 {
                    e += 1;
                }
                GroupElement::FreeWord(vec![(g, e)])
            }
        }
    }

    /// A uniformly random vertex with a nontrivial element of its group.
    pub fn letter(&mut self) -> Letter {
        let v = VertexId(self.rng.gen_range(0..self.graph.vertex_count() as u32));
        self.letter_at(v)
    }

    fn letter_at(&mut self, v: VertexId) -> Letter {
        let spec = self.graph.group(v).clone();
        let element = self.element(&spec);
        Letter::new(&self.graph, v, element).expect("sampled element is nontrivial")
    }

    /// A random word of exactly `len` letters.
    pub fn word(&mut self, len: usize) -> PrismWord {
        let letters = (0..len).map(|_| self.letter()).collect();
        PrismWord::from_letters(&self.graph, letters).expect("sampled letters are valid")
    }

    /// A random word of `len` letters supported in `support`.
    pub fn supported_word(&mut self, support: &VertexSet, len: usize) -> PrismWord {
        let vertices: Vec<VertexId> = support.iter().copied().collect();
        let letters = (0..len)
            .map(|_| {
                let v = vertices[self.rng.gen_range(0..vertices.len())];
                self.letter_at(v)
            })
            .collect();
        PrismWord::from_letters(&self.graph, letters).expect("sampled letters are valid")
    }

    /// Applies `swaps` random commuting transpositions in place; the word
    /// keeps spelling the same element.
    pub fn shuffle(&mut self, word: &PrismWord, swaps: usize) -> PrismWord {
        let mut letters = word.letters().to_vec();
        if letters.len() >= 2 {
            for _ in 0..swaps {
                let p = self.rng.gen_range(0..letters.len() - 1);
                let (u, v) = (letters[p].vertex, letters[p + 1].vertex);
                if u != v && self.graph.adjacent(u, v) {
                    letters.swap(p, p + 1);
                }
            }
        }
        PrismWord::from_letters(&self.graph, letters).expect("swaps preserve validity")
    }

    /// A random identity word: `w · w̄` for a random `w` of `half_len`
    /// letters, shuffled by commuting transpositions, then conjugated by a
    /// random word of `conjugator_len` letters.
    pub fn identity_word(&mut self, half_len: usize, conjugator_len: usize) -> PrismWord {
        let w = self.word(half_len);
        let mirror = w.concat(&w.inverse()).expect("same graph");
        let shuffled = self.shuffle(&mirror, 4 * mirror.letters().len());
        let c = self.word(conjugator_len);
        c.concat(&shuffled)
            .and_then(|x| x.concat(&c.inverse()))
            .expect("same graph")
    }
}
