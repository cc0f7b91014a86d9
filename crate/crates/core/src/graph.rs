//! Defining graphs: finite simple graphs with a group attached to each
//! vertex, plus the link/star/join combinatorics that drive everything else.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::GroupSpec;

/// Index of a vertex in its defining graph, in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A set of vertices of one defining graph.
pub type VertexSet = BTreeSet<VertexId>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown vertex identifier `{0}`")]
    UnknownVertex(String),
    #[error("vertex identifier `{0}` declared twice")]
    DuplicateVertex(String),
    #[error("vertex identifier `{0}` may not contain `:` or `.`")]
    InvalidVertexName(String),
    #[error("edge {0}-{0} is a loop; the defining graph must be simple")]
    LoopEdge(String),
    #[error("the empty vertex set is not allowed here")]
    EmptyVertexSet,
    #[error("vertex `{0}` has no group assigned")]
    MissingGroup(String),
}

/// Finite simple graph with vertex groups; the ambient object for words,
/// diagrams and hyperplanes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefiningGraph {
    names: Vec<String>,
    adjacency: Vec<BTreeSet<u32>>,
    groups: Vec<GroupSpec>,
}

impl DefiningGraph {
    /// Builds a graph from vertex names, edges (as name pairs) and one group
    /// per vertex, in declaration order.
    pub fn new(
        vertices: &[(&str, GroupSpec)],
        edges: &[(&str, &str)],
    ) -> Result<Self, GraphError> {
        let mut names = Vec::with_capacity(vertices.len());
        let mut groups = Vec::with_capacity(vertices.len());
        for (name, spec) in vertices {
            if name.contains(':') || name.contains('.') || name.is_empty() {
                return Err(GraphError::InvalidVertexName(name.to_string()));
            }
            if names.iter().any(|n| n == name) {
                return Err(GraphError::DuplicateVertex(name.to_string()));
            }
            names.push(name.to_string());
            groups.push(spec.clone());
        }
        let mut adjacency = vec![BTreeSet::new(); names.len()];
        let lookup = |name: &str| {
            names
                .iter()
                .position(|n| n == name)
                .map(|i| i as u32)
                .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
        };
        for (x, y) in edges {
            let (i, j) = (lookup(x)?, lookup(y)?);
            if i == j {
                return Err(GraphError::LoopEdge(x.to_string()));
            }
            adjacency[i as usize].insert(j);
            adjacency[j as usize].insert(i);
        }
        Ok(DefiningGraph {
            names,
            adjacency,
            groups,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.names.len() as u32).map(VertexId)
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.index()]
    }

    pub fn group(&self, v: VertexId) -> &GroupSpec {
        &self.groups[v.index()]
    }

    pub fn vertex(&self, name: &str) -> Result<VertexId, GraphError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| VertexId(i as u32))
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    /// Resolves a list of vertex names to a set, rejecting unknown names.
    pub fn vertex_set(&self, names: &[&str]) -> Result<VertexSet, GraphError> {
        names.iter().map(|n| self.vertex(n)).collect()
    }

    pub fn adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.adjacency[u.index()].contains(&v.0)
    }

    /// Link of a single vertex: its neighbours.
    pub fn vertex_link(&self, v: VertexId) -> VertexSet {
        self.adjacency[v.index()].iter().map(|&i| VertexId(i)).collect()
    }

    /// Link of a set: vertices adjacent to every member. The link of the
    /// empty set is the whole vertex set.
    pub fn link(&self, s: &VertexSet) -> VertexSet {
        let mut out: VertexSet = self.vertices().collect();
        for &v in s {
            let lk = self.vertex_link(v);
            out = out.intersection(&lk).copied().collect();
        }
        out
    }

    /// Star of a set: the set together with its link.
    pub fn star(&self, s: &VertexSet) -> VertexSet {
        let mut out = self.link(s);
        out.extend(s.iter().copied());
        out
    }

    pub fn vertex_star(&self, v: VertexId) -> VertexSet {
        let mut out = self.vertex_link(v);
        out.insert(v);
        out
    }

    /// Decides whether the induced subgraph on `s` is a join, i.e. splits as
    /// `A ⊔ B` with every `A`-`B` edge present. Detected through
    /// connectivity of the complement graph; the witness puts the complement
    /// component of the least vertex into `A` and the rest into `B`.
    pub fn is_join(&self, s: &VertexSet) -> Result<Option<(VertexSet, VertexSet)>, GraphError> {
        if s.is_empty() {
            return Err(GraphError::EmptyVertexSet);
        }
        if s.len() == 1 {
            return Ok(None);
        }
        let verts: Vec<VertexId> = s.iter().copied().collect();
        let least = verts[0];
        let mut component: VertexSet = VertexSet::new();
        let mut queue = vec![least];
        component.insert(least);
        while let Some(u) = queue.pop() {
            for &v in &verts {
                if !component.contains(&v) && !self.adjacent(u, v) {
                    component.insert(v);
                    queue.push(v);
                }
            }
        }
        if component.len() == s.len() {
            return Ok(None);
        }
        let rest: VertexSet = s.difference(&component).copied().collect();
        Ok(Some((component, rest)))
    }

    /// Finds a join subgraph containing `s`, if any: either `s` itself is a
    /// join, or `link(s)` is nonempty and `star(s)` works.
    pub fn is_contained_in_join(&self, s: &VertexSet) -> Result<Option<VertexSet>, GraphError> {
        if s.is_empty() {
            return Err(GraphError::EmptyVertexSet);
        }
        if self.is_join(s)?.is_some() {
            return Ok(Some(s.clone()));
        }
        if !self.link(s).is_empty() {
            return Ok(Some(self.star(s)));
        }
        Ok(None)
    }

    pub fn has_isolated_vertices(&self) -> bool {
        self.adjacency.iter().any(|a| a.is_empty())
    }

    /// Renders a vertex set with declared names, e.g. `{a, c}`.
    pub fn set_names(&self, s: &VertexSet) -> String {
        let inner: Vec<&str> = s.iter().map(|&v| self.name(v)).collect();
        format!("{{{}}}", inner.join(", "))
    }
}

impl fmt::Display for DefiningGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "graph on {{{}}}", self.names.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupSpec;
    use proptest::prelude::*;

    fn p4() -> DefiningGraph {
        DefiningGraph::new(
            &[
                ("a", GroupSpec::InfiniteCyclic),
                ("b", GroupSpec::InfiniteCyclic),
                ("c", GroupSpec::InfiniteCyclic),
                ("d", GroupSpec::InfiniteCyclic),
            ],
            &[("a", "b"), ("b", "c"), ("c", "d")],
        )
        .unwrap()
    }

    fn c4() -> DefiningGraph {
        DefiningGraph::new(
            &[
                ("a", GroupSpec::InfiniteCyclic),
                ("b", GroupSpec::InfiniteCyclic),
                ("c", GroupSpec::InfiniteCyclic),
                ("d", GroupSpec::InfiniteCyclic),
            ],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            DefiningGraph::new(&[("a", GroupSpec::InfiniteCyclic)], &[("a", "a")]),
            Err(GraphError::LoopEdge("a".into()))
        );
        assert_eq!(
            DefiningGraph::new(&[("a", GroupSpec::InfiniteCyclic)], &[("a", "z")]),
            Err(GraphError::UnknownVertex("z".into()))
        );
        let g = p4();
        assert_eq!(g.vertex("q"), Err(GraphError::UnknownVertex("q".into())));
    }

    #[test]
    fn link_and_star_on_p4() {
        let g = p4();
        let b = g.vertex_set(&["b"]).unwrap();
        assert_eq!(g.link(&b), g.vertex_set(&["a", "c"]).unwrap());
        assert_eq!(g.star(&b), g.vertex_set(&["a", "b", "c"]).unwrap());

        let ad = g.vertex_set(&["a", "d"]).unwrap();
        assert_eq!(g.link(&ad), VertexSet::new());

        assert_eq!(g.link(&VertexSet::new()).len(), 4);
    }

    #[test]
    fn join_detection_on_p4_and_c4() {
        let g = p4();
        let ab = g.vertex_set(&["a", "b"]).unwrap();
        let witness = g.is_join(&ab).unwrap().unwrap();
        assert_eq!(witness.0, g.vertex_set(&["a"]).unwrap());
        assert_eq!(witness.1, g.vertex_set(&["b"]).unwrap());

        let ad = g.vertex_set(&["a", "d"]).unwrap();
        assert_eq!(g.is_join(&ad).unwrap(), None);
        assert_eq!(g.is_contained_in_join(&ad).unwrap(), None);

        let c4 = c4();
        let all = c4.vertex_set(&["a", "b", "c", "d"]).unwrap();
        let (x, y) = c4.is_join(&all).unwrap().unwrap();
        assert_eq!(x, c4.vertex_set(&["a", "c"]).unwrap());
        assert_eq!(y, c4.vertex_set(&["b", "d"]).unwrap());
    }

    #[test]
    fn containment_in_join_uses_star() {
        let g = p4();
        let a = g.vertex_set(&["a"]).unwrap();
        assert_eq!(
            g.is_contained_in_join(&a).unwrap(),
            Some(g.vertex_set(&["a", "b"]).unwrap())
        );
        assert_eq!(
            g.is_contained_in_join(&VertexSet::new()),
            Err(GraphError::EmptyVertexSet)
        );
    }

    #[test]
    fn isolated_vertex_flag() {
        let g = DefiningGraph::new(
            &[
                ("a", GroupSpec::InfiniteCyclic),
                ("b", GroupSpec::InfiniteCyclic),
                ("c", GroupSpec::InfiniteCyclic),
            ],
            &[("a", "b")],
        )
        .unwrap();
        assert!(g.has_isolated_vertices());
        assert!(!p4().has_isolated_vertices());
    }

    /// Exhaustive reference for join containment: try every subset of the
    /// vertex set as a candidate join and test it directly.
    fn contained_in_join_exhaustive(g: &DefiningGraph, s: &VertexSet) -> bool {
        let n = g.vertex_count();
        for mask in 1u32..(1 << n) {
            let cand: VertexSet = (0..n as u32)
                .filter(|i| mask & (1 << i) != 0)
                .map(VertexId)
                .collect();
            if !s.is_subset(&cand) {
                continue;
            }
            // A join needs a bipartition with all cross edges present; try
            // every split of the candidate.
            let verts: Vec<VertexId> = cand.iter().copied().collect();
            let k = verts.len();
            for split in 1u32..(1 << (k - 1)) {
                let mut ok = true;
                for i in 0..k {
                    for j in 0..k {
                        let (si, sj) = (split >> i & 1, split >> j & 1);
                        if si != sj && !g.adjacent(verts[i], verts[j]) {
                            ok = false;
                        }
                    }
                }
                if ok {
                    return true;
                }
            }
        }
        false
    }

    fn arbitrary_graph() -> impl Strategy<Value = DefiningGraph> {
        (2usize..=6, any::<u32>()).prop_map(|(n, bits)| {
            let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
            let vertices: Vec<(&str, GroupSpec)> = names
                .iter()
                .map(|s| (s.as_str(), GroupSpec::InfiniteCyclic))
                .collect();
            let mut edges = Vec::new();
            let mut bit = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if bits >> (bit % 32) & 1 == 1 {
                        edges.push((i, j));
                    }
                    bit += 7;
                }
            }
            let edge_names: Vec<(&str, &str)> = edges
                .iter()
                .map(|&(i, j)| (names[i].as_str(), names[j].as_str()))
                .collect();
            DefiningGraph::new(&vertices, &edge_names).unwrap()
        })
    }

    proptest! {
        #[test]
        fn link_monotone_and_inside_star(g in arbitrary_graph(), mask in any::<u8>()) {
            let s: VertexSet = g.vertices().filter(|v| mask >> v.0 & 1 == 1).collect();
            let t: VertexSet = g.vertices().collect();
            prop_assert!(g.link(&t).is_subset(&g.link(&s)));
            prop_assert!(g.link(&s).is_subset(&g.star(&s)));
        }

        #[test]
        fn join_containment_matches_exhaustive(g in arbitrary_graph(), mask in any::<u8>()) {
            let s: VertexSet = g.vertices().filter(|v| mask >> v.0 & 1 == 1).collect();
            prop_assume!(!s.is_empty());
            let fast = g.is_contained_in_join(&s).unwrap();
            let slow = contained_in_join_exhaustive(&g, &s);
            prop_assert_eq!(fast.is_some(), slow);
            if let Some(lambda) = fast {
                prop_assert!(s.is_subset(&lambda));
                prop_assert!(g.is_join(&lambda).unwrap().is_some());
            }
        }

        #[test]
        fn join_witness_partition_is_sound(g in arbitrary_graph(), mask in any::<u8>()) {
            let s: VertexSet = g.vertices().filter(|v| mask >> v.0 & 1 == 1).collect();
            prop_assume!(s.len() >= 2);
            if let Some((x, y)) = g.is_join(&s).unwrap() {
                prop_assert!(!x.is_empty() && !y.is_empty());
                let union: VertexSet = x.union(&y).copied().collect();
                prop_assert_eq!(union, s);
                for &u in &x {
                    for &v in &y {
                        prop_assert!(g.adjacent(u, v));
                    }
                }
            }
        }
    }
}
