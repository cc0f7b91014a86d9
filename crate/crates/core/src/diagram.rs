//! Combinatorial disk diagrams: a cyclic boundary word spelling the
//! identity, partitioned into blocks. Each block carries one vertex, its
//! positions multiply to the identity around the boundary, and two blocks
//! may interleave only if their vertices are adjacent. Blocks play the role
//! of dual graphs; their boundary positions are the roots.

use std::collections::BTreeSet;
use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DefiningGraph, VertexId};
use crate::words::{Letter, PrismWord, ReductionTrace, WordError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagramError {
    #[error("boundary word does not spell the identity")]
    NotIdentityWord,
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("range {start}..{end} is out of bounds for a boundary of length {len}")]
    RangeOutOfBounds { start: usize, end: usize, len: usize },
    #[error("shared ranges do not spell a word and its inverse: {0}")]
    SharedRangeMismatch(String),
    #[error("diagrams belong to different defining graphs")]
    GraphMismatch,
    #[error("boundary position {position} is not covered by exactly one block")]
    Malformed { position: usize },
    #[error("designated range does not spell a geodesic word")]
    RangeNotGeodesic,
    #[error("letter {w_index} of the designated word lies in a block with no outside root")]
    UnrootedLetter { w_index: usize },
    #[error("letters at positions {position} and {position_next} do not commute")]
    NonCommutingSwap { position: usize, position_next: usize },
    #[error("combing stalled: two letters share a beginning or ending value")]
    CombingStuck,
    #[error("diagram is not combed: {0}")]
    NotCombed(String),
    #[error("segmentation does not cover the outer boundary: {0}")]
    BadSegmentation(String),
    #[error("block {block} has no gap {gap}")]
    BadGap { block: usize, gap: usize },
    #[error("block {block} carrier word leaves the link of its vertex")]
    CarrierOutsideLink { block: usize },
    #[error("cannot decode diagram: {0}")]
    Decode(String),
}

/// One block of the boundary partition: the combinatorial shadow of a dual
/// graph, remembered through the boundary positions it is rooted at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualGraph {
    pub vertex: VertexId,
    /// Boundary positions of this block, ascending.
    pub roots: Vec<usize>,
}

/// Violations reported by [`DiskDiagram::validate`]; a well-formed diagram
/// reports none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    BoundaryNotIdentity,
    PositionUncovered { position: usize },
    PositionRepeated { position: usize },
    RootOutOfRange { block: usize, position: usize },
    MixedVertexBlock { block: usize },
    SingletonBlock { block: usize },
    BlockProductNotIdentity { block: usize },
    ForbiddenCrossing { first: usize, second: usize },
    DesignatedRangeNotGeodesic,
    MultipleRootsInDesignatedRange { block: usize },
}

/// Beginning and ending functions of a designated boundary word: for each of
/// its letters, the first and last outer-boundary index sharing its block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombingFunctions {
    pub beginning: Vec<usize>,
    pub ending: Vec<usize>,
}

impl CombingFunctions {
    pub fn beginning_strictly_increasing(&self) -> bool {
        self.beginning.windows(2).all(|p| p[0] < p[1])
    }

    pub fn ending_strictly_increasing(&self) -> bool {
        self.ending.windows(2).all(|p| p[0] < p[1])
    }
}

/// Result of combing: the rewritten diagram, the reordered designated word,
/// and the permutation sending new letter positions to old ones.
#[derive(Debug, Clone)]
pub struct CombResult {
    pub diagram: DiskDiagram,
    pub word: PrismWord,
    pub permutation: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct DiagramJson {
    boundary: Vec<String>,
    blocks: Vec<BlockJson>,
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    vertex: String,
    roots: Vec<usize>,
}

/// Disk diagram over a fixed defining graph. The basepoint sits before
/// boundary position 0; rotating it is harmless for every property checked
/// here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiskDiagram {
    boundary: PrismWord,
    blocks: Vec<DualGraph>,
    provenance: Option<ReductionTrace>,
}

impl DiskDiagram {
    /// Builds the canonical diagram of an identity word by replaying its
    /// reduction: every merge welds the ancestries of the two letters into
    /// one block.
    pub fn build(word: &PrismWord) -> Result<DiskDiagram, DiagramError> {
        let (reduced, trace) = word.reduce_to_geodesic();
        if !reduced.is_empty() {
            return Err(DiagramError::NotIdentityWord);
        }
        let graph = word.graph().clone();
        let n = word.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }

        // Replay the trace over slots labelled with original positions.
        let mut slots: Vec<(Letter, usize)> = word
            .letters()
            .iter()
            .cloned()
            .zip(0..n)
            .collect();
        for mv in &trace.moves {
            match *mv {
                crate::words::Move::Swap(i) => slots.swap(i, i + 1),
                crate::words::Move::Merge(i) => {
                    let (left, right) = (slots[i].clone(), slots[i + 1].clone());
                    let ra = find(&mut parent, left.1);
                    let rb = find(&mut parent, right.1);
                    parent[rb] = ra;
                    let spec = graph.group(left.0.vertex);
                    let product = spec
                        .multiply(&left.0.element, &right.0.element)
                        .expect("merge within one vertex group");
                    slots.remove(i + 1);
                    if spec.is_identity(&product) {
                        slots.remove(i);
                    } else {
                        slots[i] = (
                            Letter {
                                vertex: left.0.vertex,
                                element: product,
                            },
                            ra,
                        );
                    }
                }
            }
        }
        debug_assert!(slots.is_empty());

        let mut by_class: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for p in 0..n {
            by_class.entry(find(&mut parent, p)).or_default().push(p);
        }
        let mut blocks: Vec<DualGraph> = by_class
            .into_values()
            .map(|roots| DualGraph {
                vertex: word.letters()[roots[0]].vertex,
                roots,
            })
            .collect();
        blocks.sort_by_key(|b| b.roots[0]);
        Ok(DiskDiagram {
            boundary: word.clone(),
            blocks,
            provenance: Some(trace),
        })
    }

    pub fn boundary(&self) -> &PrismWord {
        &self.boundary
    }

    pub fn blocks(&self) -> &[DualGraph] {
        &self.blocks
    }

    pub fn provenance(&self) -> Option<&ReductionTrace> {
        self.provenance.as_ref()
    }

    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    fn graph(&self) -> &Arc<DefiningGraph> {
        self.boundary.graph()
    }

    /// Block index covering each boundary position; errors on malformed
    /// partitions.
    fn position_blocks(&self) -> Result<Vec<usize>, DiagramError> {
        let mut map = vec![usize::MAX; self.len()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &p in &block.roots {
                if p >= self.len() || map[p] != usize::MAX {
                    return Err(DiagramError::Malformed {
                        position: p.min(self.len().saturating_sub(1)),
                    });
                }
                map[p] = b;
            }
        }
        if let Some(p) = map.iter().position(|&b| b == usize::MAX) {
            return Err(DiagramError::Malformed { position: p });
        }
        Ok(map)
    }

    /// Checks every structural requirement and returns the violations as
    /// data; an empty list means the diagram is valid.
    pub fn validate(&self, designated: Option<Range<usize>>) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.len();
        let graph = self.graph();

        if !self.boundary.canonical().is_empty() {
            out.push(Violation::BoundaryNotIdentity);
        }

        let mut coverage = vec![0usize; n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &p in &block.roots {
                if p >= n {
                    out.push(Violation::RootOutOfRange { block: b, position: p });
                } else {
                    coverage[p] += 1;
                }
            }
            if block.roots.len() < 2 {
                out.push(Violation::SingletonBlock { block: b });
            }
            let letters = self.boundary.letters();
            if block
                .roots
                .iter()
                .filter(|&&p| p < n)
                .any(|&p| letters[p].vertex != block.vertex)
            {
                out.push(Violation::MixedVertexBlock { block: b });
            } else {
                let spec = graph.group(block.vertex);
                let mut acc = spec.identity();
                for &p in block.roots.iter().filter(|&&p| p < n) {
                    acc = spec
                        .multiply(&acc, &letters[p].element)
                        .expect("vertices agree");
                }
                if !spec.is_identity(&acc) {
                    out.push(Violation::BlockProductNotIdentity { block: b });
                }
            }
        }
        for (p, &count) in coverage.iter().enumerate() {
            if count == 0 {
                out.push(Violation::PositionUncovered { position: p });
            } else if count > 1 {
                out.push(Violation::PositionRepeated { position: p });
            }
        }

        for i in 0..self.blocks.len() {
            for j in (i + 1)..self.blocks.len() {
                if blocks_interleave(&self.blocks[i].roots, &self.blocks[j].roots)
                    && !graph.adjacent(self.blocks[i].vertex, self.blocks[j].vertex)
                {
                    out.push(Violation::ForbiddenCrossing { first: i, second: j });
                }
            }
        }

        if let Some(range) = designated {
            let word = self.range_word(&range);
            match word {
                Ok(word) if word.is_geodesic() => {
                    for (b, block) in self.blocks.iter().enumerate() {
                        let inside = block
                            .roots
                            .iter()
                            .filter(|&&p| range.contains(&p))
                            .count();
                        if inside > 1 {
                            out.push(Violation::MultipleRootsInDesignatedRange { block: b });
                        }
                    }
                }
                _ => out.push(Violation::DesignatedRangeNotGeodesic),
            }
        }

        out
    }

    fn range_word(&self, range: &Range<usize>) -> Result<PrismWord, DiagramError> {
        if range.start > range.end || range.end > self.len() {
            return Err(DiagramError::RangeOutOfBounds {
                start: range.start,
                end: range.end,
                len: self.len(),
            });
        }
        PrismWord::from_letters(
            self.graph(),
            self.boundary.letters()[range.clone()].to_vec(),
        )
        .map_err(Into::into)
    }

    /// Moves the basepoint forward by `k` positions; every structural
    /// property is rotation invariant.
    pub fn rotate(&self, k: usize) -> DiskDiagram {
        let n = self.len();
        if n == 0 {
            return self.clone();
        }
        let k = k % n;
        let letters: Vec<Letter> = (0..n)
            .map(|i| self.boundary.letters()[(i + k) % n].clone())
            .collect();
        let boundary = PrismWord::from_letters(self.graph(), letters).expect("letters valid");
        let mut blocks: Vec<DualGraph> = self
            .blocks
            .iter()
            .map(|b| {
                let mut roots: Vec<usize> = b.roots.iter().map(|&p| (p + n - k) % n).collect();
                roots.sort_unstable();
                DualGraph {
                    vertex: b.vertex,
                    roots,
                }
            })
            .collect();
        blocks.sort_by_key(|b| b.roots[0]);
        DiskDiagram {
            boundary,
            blocks,
            provenance: None,
        }
    }

    /// Glues two diagrams along ranges spelling a word and its inverse; the
    /// shared letters disappear and their blocks weld together.
    pub fn concatenate(
        d1: &DiskDiagram,
        d2: &DiskDiagram,
        shared1: Range<usize>,
        shared2: Range<usize>,
    ) -> Result<DiskDiagram, DiagramError> {
        if d1.graph() != d2.graph() {
            return Err(DiagramError::GraphMismatch);
        }
        let graph = d1.graph().clone();
        for (d, r) in [(d1, &shared1), (d2, &shared2)] {
            if r.start >= r.end || r.end > d.len() {
                return Err(DiagramError::RangeOutOfBounds {
                    start: r.start,
                    end: r.end,
                    len: d.len(),
                });
            }
        }
        let len = shared1.end - shared1.start;
        if shared2.end - shared2.start != len {
            return Err(DiagramError::SharedRangeMismatch(format!(
                "lengths {} and {} differ",
                len,
                shared2.end - shared2.start
            )));
        }
        for k in 0..len {
            let l1 = &d1.boundary.letters()[shared1.start + k];
            let l2 = &d2.boundary.letters()[shared2.start + (len - 1 - k)];
            let inv = graph
                .group(l1.vertex)
                .invert(&l1.element)
                .expect("letter in its group");
            if l2.vertex != l1.vertex || l2.element != inv {
                return Err(DiagramError::SharedRangeMismatch(format!(
                    "position {} of the first range does not invert its partner",
                    shared1.start + k
                )));
            }
        }

        let (n1, n2) = (d1.len(), d2.len());
        let a1 = shared1.start;
        let c1 = n1 - shared1.end;
        let a2 = shared2.start;
        let c2 = n2 - shared2.end;

        // New boundary: a1 ++ c2 ++ a2 ++ c1.
        let mut letters: Vec<Letter> = Vec::with_capacity(a1 + c2 + a2 + c1);
        letters.extend_from_slice(&d1.boundary.letters()[..shared1.start]);
        letters.extend_from_slice(&d2.boundary.letters()[shared2.end..]);
        letters.extend_from_slice(&d2.boundary.letters()[..shared2.start]);
        letters.extend_from_slice(&d1.boundary.letters()[shared1.end..]);
        let boundary = PrismWord::from_letters(&graph, letters)?;

        let map1 = |p: usize| -> Option<usize> {
            if p < shared1.start {
                Some(p)
            } else if p >= shared1.end {
                Some(a1 + c2 + a2 + (p - shared1.end))
            } else {
                None
            }
        };
        let map2 = |q: usize| -> Option<usize> {
            if q >= shared2.end {
                Some(a1 + (q - shared2.end))
            } else if q < shared2.start {
                Some(a1 + c2 + q)
            } else {
                None
            }
        };

        let pos1 = d1.position_blocks()?;
        let pos2 = d2.position_blocks()?;
        let total = d1.blocks.len() + d2.blocks.len();
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for k in 0..len {
            let b1 = pos1[shared1.start + k];
            let b2 = d1.blocks.len() + pos2[shared2.start + (len - 1 - k)];
            let (ra, rb) = (find(&mut parent, b1), find(&mut parent, b2));
            parent[rb] = ra;
        }

        let mut grouped: std::collections::BTreeMap<usize, (VertexId, Vec<usize>)> =
            Default::default();
        for (b, block) in d1.blocks.iter().enumerate() {
            let class = find(&mut parent, b);
            let entry = grouped.entry(class).or_insert((block.vertex, Vec::new()));
            entry.1.extend(block.roots.iter().filter_map(|&p| map1(p)));
        }
        for (b, block) in d2.blocks.iter().enumerate() {
            let class = find(&mut parent, d1.blocks.len() + b);
            let entry = grouped.entry(class).or_insert((block.vertex, Vec::new()));
            entry.1.extend(block.roots.iter().filter_map(|&q| map2(q)));
        }
        let mut blocks: Vec<DualGraph> = grouped
            .into_values()
            .filter(|(_, roots)| !roots.is_empty())
            .map(|(vertex, mut roots)| {
                roots.sort_unstable();
                DualGraph { vertex, roots }
            })
            .collect();
        blocks.sort_by_key(|b| b.roots[0]);

        Ok(DiskDiagram {
            boundary,
            blocks,
            provenance: None,
        })
    }

    /// Positions of the designated word's letters and of the complementary
    /// outer boundary, both in reading order. The designated range holds the
    /// formal inverse of the word it designates.
    fn designated_layout(
        &self,
        w_range: &Range<usize>,
    ) -> Result<(Vec<usize>, Vec<usize>), DiagramError> {
        let n = self.len();
        if w_range.start > w_range.end || w_range.end > n {
            return Err(DiagramError::RangeOutOfBounds {
                start: w_range.start,
                end: w_range.end,
                len: n,
            });
        }
        let m = w_range.end - w_range.start;
        let w_positions: Vec<usize> = (0..m).map(|i| w_range.start + (m - 1 - i)).collect();
        let outer: Vec<usize> = (0..n - m).map(|j| (w_range.end + j) % n).collect();
        Ok((w_positions, outer))
    }

    /// The word designated by a range: reverse inverse of the range letters.
    pub fn designated_word(&self, w_range: &Range<usize>) -> Result<PrismWord, DiagramError> {
        Ok(self.range_word(w_range)?.inverse())
    }

    /// Beginning and ending functions of the designated geodesic word.
    pub fn combing_functions(
        &self,
        w_range: &Range<usize>,
    ) -> Result<CombingFunctions, DiagramError> {
        let word = self.designated_word(w_range)?;
        if !word.is_geodesic() {
            return Err(DiagramError::RangeNotGeodesic);
        }
        let (w_positions, outer) = self.designated_layout(w_range)?;
        let position_blocks = self.position_blocks()?;
        let mut outer_index = vec![usize::MAX; self.len()];
        for (j, &p) in outer.iter().enumerate() {
            outer_index[p] = j;
        }
        let mut beginning = Vec::with_capacity(w_positions.len());
        let mut ending = Vec::with_capacity(w_positions.len());
        for (i, &p) in w_positions.iter().enumerate() {
            let block = &self.blocks[position_blocks[p]];
            let outer_roots: Vec<usize> = block
                .roots
                .iter()
                .filter_map(|&q| {
                    let j = outer_index[q];
                    (j != usize::MAX).then_some(j)
                })
                .collect();
            match (outer_roots.iter().min(), outer_roots.iter().max()) {
                (Some(&lo), Some(&hi)) => {
                    beginning.push(lo);
                    ending.push(hi);
                }
                _ => return Err(DiagramError::UnrootedLetter { w_index: i }),
            }
        }
        Ok(CombingFunctions { beginning, ending })
    }

    /// Swaps the adjacent boundary letters at `position` and `position + 1`
    /// (their vertices must be adjacent), carrying the block structure
    /// along.
    pub fn commuting_operation(&self, position: usize) -> Result<DiskDiagram, DiagramError> {
        let n = self.len();
        if position + 1 >= n {
            return Err(DiagramError::RangeOutOfBounds {
                start: position,
                end: position + 2,
                len: n,
            });
        }
        let letters = self.boundary.letters();
        if !self
            .graph()
            .adjacent(letters[position].vertex, letters[position + 1].vertex)
        {
            return Err(DiagramError::NonCommutingSwap {
                position,
                position_next: position + 1,
            });
        }
        let mut new_letters = letters.to_vec();
        new_letters.swap(position, position + 1);
        let boundary = PrismWord::from_letters(self.graph(), new_letters)?;
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mut roots: Vec<usize> = b
                    .roots
                    .iter()
                    .map(|&p| {
                        if p == position {
                            position + 1
                        } else if p == position + 1 {
                            position
                        } else {
                            p
                        }
                    })
                    .collect();
                roots.sort_unstable();
                DualGraph {
                    vertex: b.vertex,
                    roots,
                }
            })
            .collect();
        Ok(DiskDiagram {
            boundary,
            blocks,
            provenance: None,
        })
    }

    fn comb(&self, w_range: &Range<usize>, by_ending: bool) -> Result<CombResult, DiagramError> {
        let mut diagram = self.clone();
        let cf = diagram.combing_functions(w_range)?;
        let mut keys = if by_ending { cf.ending } else { cf.beginning };
        let m = keys.len();
        let mut permutation: Vec<usize> = (0..m).collect();
        let bound = m * m + 1;
        for _ in 0..bound {
            let Some(i) = (0..m.saturating_sub(1)).find(|&i| keys[i] > keys[i + 1]) else {
                break;
            };
            // w-letters i and i+1 sit at boundary positions in reverse
            // order inside the range.
            let p = w_range.start + (m - 2 - i);
            diagram = diagram.commuting_operation(p)?;
            keys.swap(i, i + 1);
            permutation.swap(i, i + 1);
        }
        if !keys.windows(2).all(|p| p[0] < p[1]) {
            return Err(DiagramError::CombingStuck);
        }
        let word = diagram.designated_word(w_range)?;
        Ok(CombResult {
            diagram,
            word,
            permutation,
        })
    }

    /// Reorders the designated word by commuting swaps until the beginning
    /// function is strictly increasing.
    pub fn left_comb(&self, w_range: &Range<usize>) -> Result<CombResult, DiagramError> {
        self.comb(w_range, false)
    }

    /// Reorders the designated word by commuting swaps until the ending
    /// function is strictly increasing.
    pub fn right_comb(&self, w_range: &Range<usize>) -> Result<CombResult, DiagramError> {
        self.comb(w_range, true)
    }

    /// The reduced boundary word strictly between two consecutive roots of a
    /// block; it must be supported in the link of the block's vertex.
    pub fn carrier_word(&self, block: usize, gap: usize) -> Result<PrismWord, DiagramError> {
        let b = self
            .blocks
            .get(block)
            .ok_or(DiagramError::BadGap { block, gap })?;
        let k = b.roots.len();
        if gap >= k {
            return Err(DiagramError::BadGap { block, gap });
        }
        let n = self.len();
        let from = b.roots[gap];
        let to = b.roots[(gap + 1) % k];
        let mut letters = Vec::new();
        let mut p = (from + 1) % n;
        while p != to {
            letters.push(self.boundary.letters()[p].clone());
            p = (p + 1) % n;
        }
        let word = PrismWord::from_letters(self.graph(), letters)?.canonical();
        let link = self.graph().vertex_link(b.vertex);
        if !word.support().is_subset(&link) {
            return Err(DiagramError::CarrierOutsideLink { block });
        }
        Ok(word)
    }

    /// Reduction-control inequality for a combed diagram. Cut the outer
    /// boundary into segments (given by their lengths, in reading order)
    /// and let `L`, `R` be the segments containing the beginnings of
    /// designated letters `ell` and `r`. The letters `ell..=r` begin at
    /// strictly increasing outer positions, all inside segments `L..=R`,
    /// so a sound segment bound forces
    /// `(R - L + 1) * max_segment_word_length >= r - ell + 1`.
    /// Returns whether that inequality holds.
    pub fn reduction_control_check(
        &self,
        w_range: &Range<usize>,
        ell: usize,
        r: usize,
        segment_lengths: &[usize],
        max_segment_word_length: usize,
    ) -> Result<bool, DiagramError> {
        let cf = self.combing_functions(w_range)?;
        if !cf.beginning_strictly_increasing() {
            return Err(DiagramError::NotCombed(
                "beginning function is not strictly increasing".to_string(),
            ));
        }
        let m = cf.beginning.len();
        if ell >= r || r >= m {
            return Err(DiagramError::BadSegmentation(format!(
                "letter indices {ell} < {r} must lie below {m}"
            )));
        }
        if max_segment_word_length == 0 {
            return Err(DiagramError::BadSegmentation(
                "segment word length bound must be positive".to_string(),
            ));
        }
        let outer_len = self.len() - (w_range.end - w_range.start);
        let total: usize = segment_lengths.iter().sum();
        if total != outer_len {
            return Err(DiagramError::BadSegmentation(format!(
                "segment lengths sum to {total}, outer boundary has {outer_len} letters"
            )));
        }
        let segment_of = |j: usize| -> usize {
            let mut acc = 0;
            for (s, &len) in segment_lengths.iter().enumerate() {
                acc += len;
                if j < acc {
                    return s;
                }
            }
            segment_lengths.len().saturating_sub(1)
        };
        let seg_l = segment_of(cf.beginning[ell]);
        let seg_r = segment_of(cf.beginning[r]);
        let spanned = seg_r.saturating_sub(seg_l) + 1;
        Ok(spanned * max_segment_word_length > r - ell)
    }

    /// Encodes as JSON: boundary letter tokens plus blocks.
    pub fn to_json(&self) -> String {
        let graph = self.graph();
        let data = DiagramJson {
            boundary: self
                .boundary
                .letters()
                .iter()
                .map(|l| {
                    format!(
                        "{}:{}",
                        graph.name(l.vertex),
                        graph.group(l.vertex).serialize_payload(&l.element)
                    )
                })
                .collect(),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockJson {
                    vertex: graph.name(b.vertex).to_string(),
                    roots: b.roots.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&data).expect("serializable")
    }

    /// Decodes a diagram produced by [`DiskDiagram::to_json`].
    pub fn from_json(graph: &Arc<DefiningGraph>, text: &str) -> Result<DiskDiagram, DiagramError> {
        let data: DiagramJson =
            serde_json::from_str(text).map_err(|e| DiagramError::Decode(e.to_string()))?;
        let mut letters = Vec::with_capacity(data.boundary.len());
        for token in &data.boundary {
            let word = PrismWord::parse(graph, token)?;
            if word.len() != 1 {
                return Err(DiagramError::Decode(format!(
                    "boundary token `{token}` is not a single letter"
                )));
            }
            letters.push(word.letters()[0].clone());
        }
        let boundary = PrismWord::from_letters(graph, letters)?;
        let mut blocks = Vec::with_capacity(data.blocks.len());
        for b in &data.blocks {
            let vertex = graph.vertex(&b.vertex).map_err(WordError::from)?;
            let mut roots = b.roots.clone();
            roots.sort_unstable();
            blocks.push(DualGraph { vertex, roots });
        }
        Ok(DiskDiagram {
            boundary,
            blocks,
            provenance: None,
        })
    }
}

/// Cyclic interleaving: `b` must occupy at least two distinct gaps of `a`
/// (and conversely); only then do the two blocks cross.
fn blocks_interleave(a: &[usize], b: &[usize]) -> bool {
    if a.len() < 2 || b.len() < 2 {
        return false;
    }
    let gap_of = |p: usize| -> usize {
        let pp = a.partition_point(|&r| r < p);
        if pp == 0 || pp == a.len() {
            a.len() - 1
        } else {
            pp - 1
        }
    };
    let gaps: BTreeSet<usize> = b.iter().map(|&p| gap_of(p)).collect();
    gaps.len() >= 2
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

    fn w(graph: &Arc<DefiningGraph>, text: &str) -> PrismWord {
        PrismWord::parse(graph, text).unwrap()
    }

    fn mirror(graph: &Arc<DefiningGraph>, text: &str) -> PrismWord {
        let word = w(graph, text);
        word.concat(&word.inverse()).unwrap()
    }

    #[test]
    fn square_diagram() {
        let g = p4();
        let d = DiskDiagram::build(&w(&g, "a:1.b:1.a:-1.b:-1")).unwrap();
        assert_eq!(d.blocks().len(), 2);
        assert_eq!(d.blocks()[0].roots, vec![0, 2]);
        assert_eq!(d.blocks()[1].roots, vec![1, 3]);
        assert!(d.validate(None).is_empty());
    }

    #[test]
    fn non_identity_word_is_rejected() {
        let g = p4();
        assert_eq!(
            DiskDiagram::build(&w(&g, "a:1.b:1")).unwrap_err(),
            DiagramError::NotIdentityWord
        );
    }

    #[test]
    fn mirror_diagrams_pair_letters() {
        let g = p4();
        let d = DiskDiagram::build(&mirror(&g, "a:1.d:1.a:1")).unwrap();
        assert!(d.validate(None).is_empty());
        assert_eq!(d.blocks().len(), 3);
        for block in d.blocks() {
            assert_eq!(block.roots.len(), 2);
            assert_eq!(block.roots[0] + block.roots[1], 5);
        }
    }

    #[test]
    fn validate_flags_bad_partition() {
        let g = p4();
        let d = DiskDiagram::build(&w(&g, "a:1.b:1.a:-1.b:-1")).unwrap();
        let json = d.to_json();
        // Corrupt the partition: claim both a-letters live with the b-block.
        let bad = json.replace("\"roots\": [\n        0,\n        2\n      ]", "\"roots\": [\n        0\n      ]");
        let decoded = DiskDiagram::from_json(&g, &bad).unwrap();
        let violations = decoded.validate(None);
        assert!(!violations.is_empty());
    }

    #[test]
    fn crossing_requires_adjacency() {
        let g = p4();
        // Hand-build an interleaving a/c pattern; a and c are not adjacent.
        let json = r#"{
            "boundary": ["a:1", "c:1", "a:-1", "c:-1"],
            "blocks": [
                {"vertex": "a", "roots": [0, 2]},
                {"vertex": "c", "roots": [1, 3]}
            ]
        }"#;
        let d = DiskDiagram::from_json(&g, json).unwrap();
        assert!(d
            .validate(None)
            .contains(&Violation::ForbiddenCrossing { first: 0, second: 1 }));
    }

    #[test]
    fn designated_range_single_rooting() {
        let g = p4();
        let word = w(&g, "a:1.d:1");
        let s = word.concat(&word.inverse()).unwrap();
        let d = DiskDiagram::build(&s).unwrap();
        let violations = d.validate(Some(2..4));
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn rotation_preserves_validity() {
        let g = p4();
        let d = DiskDiagram::build(&mirror(&g, "a:1.b:2.c:1")).unwrap();
        for k in 0..d.len() {
            assert!(d.rotate(k).validate(None).is_empty(), "rotation {k}");
        }
    }

    #[test]
    fn concatenate_mirror_with_mirror() {
        let g = p4();
        let d1 = DiskDiagram::build(&mirror(&g, "a:1.b:1")).unwrap();
        let d2 = DiskDiagram::build(&mirror(&g, "a:1.b:1")).unwrap();
        // Glue along the w-part of d1 (positions 0..2) and the matching
        // inverse inside d2 (positions 2..4).
        let glued = DiskDiagram::concatenate(&d1, &d2, 0..2, 2..4).unwrap();
        assert_eq!(glued.boundary().serialize(), "a:1.b:1.b:-1.a:-1");
        assert!(glued.validate(None).is_empty());
    }

    #[test]
    fn concatenate_rejects_mismatched_ranges() {
        let g = p4();
        let d1 = DiskDiagram::build(&mirror(&g, "a:1.b:1")).unwrap();
        let d2 = DiskDiagram::build(&mirror(&g, "a:2.b:1")).unwrap();
        assert!(matches!(
            DiskDiagram::concatenate(&d1, &d2, 0..2, 2..4),
            Err(DiagramError::SharedRangeMismatch(_))
        ));
    }

    #[test]
    fn combing_functions_of_mirror() {
        let g = p4();
        let word = w(&g, "a:1.d:1.a:1");
        let s = word.concat(&word.inverse()).unwrap();
        let d = DiskDiagram::build(&s).unwrap();
        let cf = d.combing_functions(&(3..6)).unwrap();
        // Mirror diagram: letter i of w pairs with outer letter i.
        assert_eq!(cf.beginning, vec![0, 1, 2]);
        assert_eq!(cf.ending, vec![0, 1, 2]);
        assert!(cf.beginning_strictly_increasing());
    }

    #[test]
    fn left_comb_sorts_beginnings() {
        let g = p4();
        // g-part spells (a,1)(b,1); designated word is the commuted order
        // (b,1)(a,1), so its beginning function starts out decreasing.
        let boundary = w(&g, "a:1.b:1.a:-1.b:-1");
        let d = DiskDiagram::build(&boundary).unwrap();
        let cf = d.combing_functions(&(2..4)).unwrap();
        assert_eq!(cf.beginning, vec![1, 0]);

        let combed = d.left_comb(&(2..4)).unwrap();
        let cf2 = combed.diagram.combing_functions(&(2..4)).unwrap();
        assert!(cf2.beginning_strictly_increasing());
        assert_eq!(combed.word.serialize(), "a:1.b:1");
        assert_eq!(combed.permutation, vec![1, 0]);
        assert!(combed.diagram.validate(None).is_empty());

        // Beginning values transport through the permutation.
        for (new_i, &old_i) in combed.permutation.iter().enumerate() {
            assert_eq!(cf2.beginning[new_i], cf.beginning[old_i]);
            assert_eq!(cf2.ending[new_i], cf.ending[old_i]);
        }
    }

    #[test]
    fn carrier_word_of_square() {
        let g = p4();
        let d = DiskDiagram::build(&w(&g, "a:1.b:1.a:-1.b:-1")).unwrap();
        // Between the two a-roots (positions 0 and 2) sits the letter b:1,
        // which lies in the link of a.
        let carrier = d.carrier_word(0, 0).unwrap();
        assert_eq!(carrier.serialize(), "b:1");
        // The other gap holds b:-1.
        let carrier = d.carrier_word(0, 1).unwrap();
        assert_eq!(carrier.serialize(), "b:-1");
    }

    #[test]
    fn carrier_word_flags_corruption() {
        let g = p4();
        let json = r#"{
            "boundary": ["a:1", "c:1", "a:-1", "c:-1"],
            "blocks": [
                {"vertex": "a", "roots": [0, 2]},
                {"vertex": "c", "roots": [1, 3]}
            ]
        }"#;
        let d = DiskDiagram::from_json(&g, json).unwrap();
        assert_eq!(
            d.carrier_word(0, 0).unwrap_err(),
            DiagramError::CarrierOutsideLink { block: 0 }
        );
    }

    #[test]
    fn json_roundtrip() {
        let g = p4();
        let d = DiskDiagram::build(&mirror(&g, "a:1.b:1.c:-2")).unwrap();
        let decoded = DiskDiagram::from_json(&g, &d.to_json()).unwrap();
        assert_eq!(decoded.boundary(), d.boundary());
        assert_eq!(decoded.blocks(), d.blocks());
    }

    fn letter_strategy(graph: Arc<DefiningGraph>) -> impl Strategy<Value = Letter> {
        use crate::graph::VertexId;
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
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn shuffled_conjugated_mirrors_validate(
            word in word_strategy(6),
            conj in word_strategy(3),
            swaps in proptest::collection::vec(0usize..64, 0..12),
            rotation in 0usize..16,
        ) {
            let graph = word.graph().clone();
            let s = conj
                .concat(&word).unwrap()
                .concat(&word.inverse()).unwrap()
                .concat(&conj.inverse()).unwrap();
            let mut letters = s.letters().to_vec();
            for &p in &swaps {
                if letters.len() >= 2 {
                    let p = p % (letters.len() - 1);
                    if graph.adjacent(letters[p].vertex, letters[p + 1].vertex) {
                        letters.swap(p, p + 1);
                    }
                }
            }
            let shuffled = PrismWord::from_letters(&graph, letters).unwrap();
            let d = DiskDiagram::build(&shuffled).unwrap();
            prop_assert!(d.validate(None).is_empty());
            prop_assert!(d.rotate(rotation).validate(None).is_empty());
        }

        #[test]
        fn combing_preserves_functions(word in word_strategy(6)) {
            let wc = word.canonical();
            let m = wc.len();
            let s = wc.concat(&wc.inverse()).unwrap();
            let d = DiskDiagram::build(&s).unwrap();
            prop_assert!(d.validate(Some(m..2 * m)).is_empty());

            let cf = d.combing_functions(&(m..2 * m)).unwrap();
            let combed = d.left_comb(&(m..2 * m)).unwrap();
            let cf2 = combed.diagram.combing_functions(&(m..2 * m)).unwrap();
            prop_assert!(cf2.beginning_strictly_increasing());
            for (new_i, &old_i) in combed.permutation.iter().enumerate() {
                prop_assert_eq!(cf2.beginning[new_i], cf.beginning[old_i]);
                prop_assert_eq!(cf2.ending[new_i], cf.ending[old_i]);
            }
            prop_assert_eq!(combed.word.canonical(), wc);
        }
    }

    #[test]
    fn reduction_control_on_mirror() {
        let g = p4();
        let word = w(&g, "a:1.d:1.a:1.d:1");
        let s = word.concat(&word.inverse()).unwrap();
        let d = DiskDiagram::build(&s).unwrap();
        // Outer boundary = the four generator letters; segment it as two
        // two-letter generators with word length 2. The mirror pairing is
        // the tight case: 2 segments * length 2 = 4 beginnings.
        let ok = d
            .reduction_control_check(&(4..8), 0, 3, &[2, 2], 2)
            .unwrap();
        assert!(ok);
        // A dishonest length bound makes the inequality fail.
        let bad = d
            .reduction_control_check(&(4..8), 0, 3, &[4], 1)
            .unwrap();
        assert!(!bad);
    }
}
