//! Filtered marked graphs, tightened edge paths and circuits, and the
//! translation between paths and words through the marking.
//!
//! A marked graph is a core graph with oriented edges paired by an
//! involution, a stratum index per edge pair forming the filtration
//! `G₁ ⊂ … ⊂ G_k`, a spanning tree and a basis assignment for the non-tree
//! edges. The shipped corpus is rose-based (marking = identity) but the
//! structure supports general graphs.

use crate::words::{Letter, Word, WordError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge endpoints are not composable at position {0}")]
    NotComposable(usize),
    #[error("path is empty")]
    EmptyPath,
    #[error("unknown edge id {0:?}")]
    UnknownEdge(String),
    #[error("vertex {0} out of range")]
    BadVertex(usize),
    #[error("invalid marked graph: {0}")]
    Invalid(String),
    #[error("word/path translation needs a bijective basis assignment")]
    NonBijectiveBasis,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A positive edge of a marked graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub stratum: usize,
}

/// An oriented edge: a positive edge index together with a direction.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedEdge(u32);

impl OrientedEdge {
    pub fn forward(edge: usize) -> Self {
        OrientedEdge((edge as u32) << 1)
    }

    pub fn backward(edge: usize) -> Self {
        OrientedEdge(((edge as u32) << 1) | 1)
    }

    pub fn edge(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_forward(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn reversed(self) -> Self {
        OrientedEdge(self.0 ^ 1)
    }

    /// Dense index in `0..2·edges`, used for direction-indexed tables.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        OrientedEdge(i as u32)
    }
}

impl fmt::Debug for OrientedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}e{}", if self.is_forward() { "" } else { "-" }, self.edge())
    }
}

/// A tightened edge path; circuits carry the `cyclic` flag and are kept
/// cyclically tight (no cancellation across the seam).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EdgePath {
    edges: Vec<OrientedEdge>,
    cyclic: bool,
}

impl EdgePath {
    pub fn empty() -> Self {
        EdgePath {
            edges: Vec::new(),
            cyclic: false,
        }
    }

    pub(crate) fn from_parts(edges: Vec<OrientedEdge>, cyclic: bool) -> Self {
        EdgePath { edges, cyclic }
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn reversed(&self) -> EdgePath {
        EdgePath {
            edges: self.edges.iter().rev().map(|e| e.reversed()).collect(),
            cyclic: self.cyclic,
        }
    }

    pub fn subpath(&self, lo: usize, hi: usize) -> EdgePath {
        EdgePath {
            edges: self.edges[lo..hi].to_vec(),
            cyclic: false,
        }
    }

    /// Rotation of a circuit by `k` edges.
    pub fn rotate(&self, k: usize) -> EdgePath {
        assert!(self.cyclic);
        if self.edges.is_empty() {
            return self.clone();
        }
        let k = k % self.edges.len();
        let mut edges = self.edges[k..].to_vec();
        edges.extend_from_slice(&self.edges[..k]);
        EdgePath {
            edges,
            cyclic: true,
        }
    }
}

impl fmt::Debug for EdgePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", if self.cyclic { "circuit" } else { "path" })?;
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{e:?}")?;
        }
        write!(f, "]")
    }
}

/// An unordered pair of directions at a common vertex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Turn(pub OrientedEdge, pub OrientedEdge);

impl Turn {
    /// Normalized so the pair is unordered.
    pub fn new(a: OrientedEdge, b: OrientedEdge) -> Self {
        if a <= b {
            Turn(a, b)
        } else {
            Turn(b, a)
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.0 == self.1
    }
}

impl fmt::Debug for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{:?},{:?}}}", self.0, self.1)
    }
}

/// A core graph with filtration, spanning tree and marking data.
#[derive(Clone, PartialEq, Eq)]
pub struct MarkedGraph {
    rank: usize,
    vertices: usize,
    edges: Vec<Edge>,
    /// Indices of spanning-tree edges.
    tree: Vec<usize>,
    /// Basis word assigned to each non-tree edge (by edge index).
    basis: BTreeMap<usize, Word>,
    strata_count: usize,
}

impl MarkedGraph {
    pub fn new(
        rank: usize,
        vertices: usize,
        edges: Vec<Edge>,
        tree: Vec<usize>,
        basis: BTreeMap<usize, Word>,
    ) -> Result<Self, GraphError> {
        for e in &edges {
            if e.from >= vertices || e.to >= vertices {
                return Err(GraphError::BadVertex(e.from.max(e.to)));
            }
            if e.stratum == 0 {
                return Err(GraphError::Invalid(format!(
                    "edge {:?} has stratum 0; strata are 1-based",
                    e.id
                )));
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for e in &edges {
            if !ids.insert(&e.id) {
                return Err(GraphError::Invalid(format!("duplicate edge id {:?}", e.id)));
            }
        }
        let strata_count = edges.iter().map(|e| e.stratum).max().unwrap_or(0);
        for r in 1..=strata_count {
            if !edges.iter().any(|e| e.stratum == r) {
                return Err(GraphError::Invalid(format!("stratum {r} is empty")));
            }
        }
        for &t in &tree {
            if t >= edges.len() {
                return Err(GraphError::Invalid("tree references unknown edge".into()));
            }
        }
        if vertices > 1 {
            let mut reach = vec![false; vertices];
            reach[0] = true;
            let mut changed = true;
            while changed {
                changed = false;
                for &t in &tree {
                    let e = &edges[t];
                    if reach[e.from] != reach[e.to] {
                        reach[e.from] = true;
                        reach[e.to] = true;
                        changed = true;
                    }
                }
            }
            if tree.len() != vertices - 1 || reach.iter().any(|r| !r) {
                return Err(GraphError::Invalid("tree is not spanning".into()));
            }
        } else if !tree.is_empty() {
            return Err(GraphError::Invalid(
                "tree must be empty for a one-vertex graph".into(),
            ));
        }
        for (i, _) in edges.iter().enumerate() {
            let is_tree = tree.contains(&i);
            if !is_tree && !basis.contains_key(&i) {
                return Err(GraphError::Invalid(format!(
                    "non-tree edge {:?} has no basis assignment",
                    edges[i].id
                )));
            }
        }
        for w in basis.values() {
            w.fits_rank(rank)?;
        }
        // Core graph: no valence-1 vertices.
        let mut val = vec![0usize; vertices];
        for e in &edges {
            val[e.from] += 1;
            val[e.to] += 1;
        }
        if val.iter().any(|&v| v <= 1) {
            return Err(GraphError::Invalid("graph has a valence-≤1 vertex".into()));
        }
        Ok(MarkedGraph {
            rank,
            vertices,
            edges,
            tree,
            basis,
            strata_count,
        })
    }

    /// A rose with one petal per generator and the identity marking; petal
    /// `i` gets the stratum `strata[i]`.
    pub fn rose(rank: usize, strata: &[usize]) -> Result<Self, GraphError> {
        assert_eq!(strata.len(), rank);
        let edges = (0..rank)
            .map(|i| Edge {
                id: Letter::new(i + 1, true).unwrap().to_char().to_string(),
                from: 0,
                to: 0,
                stratum: strata[i],
            })
            .collect();
        let basis = (0..rank)
            .map(|i| (i, Word::generator(i + 1).unwrap()))
            .collect();
        MarkedGraph::new(rank, 1, edges, Vec::new(), basis)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_list(&self) -> &[Edge] {
        &self.edges
    }

    pub fn tree_edges(&self) -> &[usize] {
        &self.tree
    }

    pub fn basis_assignment(&self) -> &BTreeMap<usize, Word> {
        &self.basis
    }

    pub fn strata_count(&self) -> usize {
        self.strata_count
    }

    pub fn edge_index(&self, id: &str) -> Result<usize, GraphError> {
        self.edges
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| GraphError::UnknownEdge(id.to_string()))
    }

    pub fn stratum_of(&self, e: OrientedEdge) -> usize {
        self.edges[e.edge()].stratum
    }

    /// Positive edge indices of the stratum `H_r`.
    pub fn stratum_edges(&self, r: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edges[i].stratum == r)
            .collect()
    }

    pub fn origin(&self, e: OrientedEdge) -> usize {
        let edge = &self.edges[e.edge()];
        if e.is_forward() {
            edge.from
        } else {
            edge.to
        }
    }

    pub fn terminus(&self, e: OrientedEdge) -> usize {
        self.origin(e.reversed())
    }

    /// All directions (oriented edges) based at `v`.
    pub fn directions_at(&self, v: usize) -> Vec<OrientedEdge> {
        let mut out = Vec::new();
        for i in 0..self.edges.len() {
            for e in [OrientedEdge::forward(i), OrientedEdge::backward(i)] {
                if self.origin(e) == v {
                    out.push(e);
                }
            }
        }
        out
    }

    pub fn direction_count(&self) -> usize {
        2 * self.edges.len()
    }

    /// Tighten a raw oriented-edge sequence; checks composability.
    pub fn tighten(&self, raw: &[OrientedEdge]) -> Result<EdgePath, GraphError> {
        for (i, win) in raw.windows(2).enumerate() {
            if self.terminus(win[0]) != self.origin(win[1]) {
                return Err(GraphError::NotComposable(i));
            }
        }
        let mut stack: Vec<OrientedEdge> = Vec::new();
        for &e in raw {
            if stack.last() == Some(&e.reversed()) {
                stack.pop();
            } else {
                stack.push(e);
            }
        }
        Ok(EdgePath {
            edges: stack,
            cyclic: false,
        })
    }

    /// Tighten a circuit: linear tightening plus cancellation across the
    /// seam. The result may be empty (a null-homotopic circuit).
    pub fn tighten_cyclic(&self, raw: &[OrientedEdge]) -> Result<EdgePath, GraphError> {
        if let (Some(&first), Some(&last)) = (raw.first(), raw.last()) {
            if self.terminus(last) != self.origin(first) {
                return Err(GraphError::NotComposable(raw.len().saturating_sub(1)));
            }
        }
        let mut p = self.tighten(raw)?;
        while p.edges.len() >= 2
            && p.edges.first() == p.edges.last().map(|e| e.reversed()).as_ref()
        {
            p.edges.pop();
            p.edges.remove(0);
        }
        p.cyclic = true;
        Ok(p)
    }

    pub fn as_circuit(&self, p: &EdgePath) -> Result<EdgePath, GraphError> {
        self.tighten_cyclic(&p.edges)
    }

    /// Maximum stratum index over the edges of `p`.
    pub fn height(&self, p: &EdgePath) -> Result<usize, GraphError> {
        p.edges
            .iter()
            .map(|e| self.stratum_of(*e))
            .max()
            .ok_or(GraphError::EmptyPath)
    }

    /// Length of `p` counting only edges of stratum `r`.
    pub fn stratum_length(&self, p: &EdgePath, r: usize) -> usize {
        p.edges
            .iter()
            .filter(|e| self.stratum_of(**e) == r)
            .count()
    }

    /// Marking image of a path: concatenate the basis words of its non-tree
    /// edges (inverted for reversed crossings) and reduce.
    pub fn path_to_word(&self, p: &EdgePath) -> Word {
        let mut letters = Vec::new();
        for e in &p.edges {
            if self.tree.contains(&e.edge()) {
                continue;
            }
            let w = &self.basis[&e.edge()];
            if e.is_forward() {
                letters.extend(w.letters().iter().copied());
            } else {
                letters.extend(w.letters().iter().rev().map(|l| l.inverse()));
            }
        }
        Word::reduce(letters)
    }

    /// Inverse translation, defined when the basis assignment is a bijection
    /// onto single generators: each letter maps to the tree-conjugated loop
    /// of its edge.
    pub fn word_to_path(&self, w: &Word) -> Result<EdgePath, GraphError> {
        let mut letter_edge: BTreeMap<usize, usize> = BTreeMap::new();
        for (&e, word) in &self.basis {
            if word.len() != 1 || !word.letters()[0].is_positive() {
                return Err(GraphError::NonBijectiveBasis);
            }
            if letter_edge.insert(word.letters()[0].index(), e).is_some() {
                return Err(GraphError::NonBijectiveBasis);
            }
        }
        if letter_edge.len() != self.rank {
            return Err(GraphError::NonBijectiveBasis);
        }
        let tree_paths = self.tree_paths_to_root();
        let mut raw: Vec<OrientedEdge> = Vec::new();
        for &l in w.letters() {
            let Some(&e) = letter_edge.get(&l.index()) else {
                return Err(GraphError::NonBijectiveBasis);
            };
            let oe = if l.is_positive() {
                OrientedEdge::forward(e)
            } else {
                OrientedEdge::backward(e)
            };
            // root → origin, the edge itself, terminus → root
            let to_origin = tree_paths[self.origin(oe)].reversed();
            raw.extend(to_origin.edges.iter().copied());
            raw.push(oe);
            raw.extend(tree_paths[self.terminus(oe)].edges.iter().copied());
        }
        self.tighten(&raw)
    }

    /// Circuit in `G` realizing a conjugacy-class representative.
    pub fn word_to_circuit(&self, w: &Word) -> Result<EdgePath, GraphError> {
        let p = self.word_to_path(w)?;
        self.tighten_cyclic(p.edges())
    }

    /// Tree paths from each vertex to vertex 0 along spanning-tree edges.
    fn tree_paths_to_root(&self) -> Vec<EdgePath> {
        let mut paths: Vec<Option<Vec<OrientedEdge>>> = vec![None; self.vertices];
        paths[0] = Some(Vec::new());
        let mut changed = true;
        while changed {
            changed = false;
            for &t in &self.tree {
                let e = &self.edges[t];
                if paths[e.from].is_some() && paths[e.to].is_none() {
                    let mut p = vec![OrientedEdge::backward(t)];
                    p.extend(paths[e.from].clone().unwrap());
                    paths[e.to] = Some(p);
                    changed = true;
                } else if paths[e.to].is_some() && paths[e.from].is_none() {
                    let mut p = vec![OrientedEdge::forward(t)];
                    p.extend(paths[e.to].clone().unwrap());
                    paths[e.from] = Some(p);
                    changed = true;
                }
            }
        }
        paths
            .into_iter()
            .map(|p| EdgePath {
                edges: p.unwrap_or_default(),
                cyclic: false,
            })
            .collect()
    }

    /// Edge-id rendering of a path (capitals for reversed edges).
    pub fn describe_path(&self, p: &EdgePath) -> String {
        let mut s = String::new();
        for e in &p.edges {
            let id = &self.edges[e.edge()].id;
            if e.is_forward() {
                s.push_str(id);
            } else {
                for c in id.chars() {
                    s.push(c.to_ascii_uppercase());
                }
            }
        }
        if s.is_empty() {
            s.push('1');
        }
        s
    }
}

impl fmt::Debug for MarkedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MarkedGraph(rank {}, {} vertices, {} edges, {} strata)",
            self.rank,
            self.vertices,
            self.edges.len(),
            self.strata_count
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3_rose() -> MarkedGraph {
        MarkedGraph::rose(3, &[1, 2, 2]).unwrap()
    }

    fn raw_path(g: &MarkedGraph, spec: &str) -> Vec<OrientedEdge> {
        spec.chars()
            .map(|c| {
                let idx = g.edge_index(&c.to_ascii_lowercase().to_string()).unwrap();
                if c.is_lowercase() {
                    OrientedEdge::forward(idx)
                } else {
                    OrientedEdge::backward(idx)
                }
            })
            .collect()
    }

    #[test]
    fn tighten_cancels() {
        let g = f3_rose();
        let tight = g.tighten(&raw_path(&g, "aAb")).unwrap();
        assert_eq!(g.describe_path(&tight), "b");
        assert_eq!(g.tighten(tight.edges()).unwrap(), tight);
    }

    #[test]
    fn cyclic_tighten_cancels_across_seam() {
        let g = f3_rose();
        let tight = g.tighten_cyclic(&raw_path(&g, "abA")).unwrap();
        assert_eq!(g.describe_path(&tight), "b");
    }

    #[test]
    fn height_examples() {
        let g = f3_rose();
        let h = |spec: &str| g.height(&g.tighten(&raw_path(&g, spec)).unwrap()).unwrap();
        assert_eq!(h("a"), 1);
        assert_eq!(h("bc"), 2);
        assert_eq!(h("ab"), 2);
        assert_eq!(g.height(&EdgePath::empty()), Err(GraphError::EmptyPath));
    }

    #[test]
    fn rose_path_word_translation() {
        let g = f3_rose();
        let p = g.tighten(&raw_path(&g, "bc")).unwrap();
        let w = g.path_to_word(&p);
        assert_eq!(w, Word::parse("bc").unwrap());
        assert_eq!(g.word_to_path(&w).unwrap(), p);
        assert!(g.word_to_path(&Word::identity()).unwrap().is_empty());
        assert!(g.path_to_word(&EdgePath::empty()).is_identity());
    }

    #[test]
    fn non_rose_graph_validates_and_translates() {
        // Theta graph: two vertices, three parallel edges.
        let edges = vec![
            Edge { id: "p".into(), from: 0, to: 1, stratum: 1 },
            Edge { id: "q".into(), from: 0, to: 1, stratum: 1 },
            Edge { id: "r".into(), from: 0, to: 1, stratum: 2 },
        ];
        let mut basis = BTreeMap::new();
        basis.insert(1usize, Word::parse("a").unwrap());
        basis.insert(2usize, Word::parse("b").unwrap());
        let g = MarkedGraph::new(2, 2, edges, vec![0], basis).unwrap();
        let p = EdgePath {
            edges: vec![OrientedEdge::forward(0), OrientedEdge::backward(1)],
            cyclic: false,
        };
        assert_eq!(g.path_to_word(&p), Word::parse("A").unwrap());
        // Round trip through the marking tightens.
        let w = Word::parse("ab").unwrap();
        let path = g.word_to_path(&w).unwrap();
        assert_eq!(g.path_to_word(&path), w);
    }
}
