//! Folded core graphs (Stallings automata) for finite-rank subgroups of `F`,
//! and the subgroup-system algebra built on them: carrying tests, fiber
//! products, the meet, malnormality and automorphism images.
//!
//! A folded graph is a deterministic partial automaton over the signed
//! alphabet: at most one edge with a given signed label leaves each vertex.
//! Vertices of a based graph correspond to the cosets of the subgroup that
//! the trace of a reduced word can reach, so tracing decides membership.

use crate::words::{BasisAutomorphism, ConjugacyClass, Letter, Word, WordError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StallingsError {
    #[error("every generating word is trivial")]
    AllTrivial,
    #[error("conjugacy class is trivial")]
    TrivialClass,
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error(transparent)]
    Word(#[from] WordError),
}

fn slot(l: Letter) -> usize {
    2 * (l.index() - 1) + usize::from(!l.is_positive())
}

fn slot_letter(s: usize) -> Letter {
    Letter::new(s / 2 + 1, s % 2 == 0).unwrap()
}

/// A folded graph with edges labeled by positive generators. `next[v][slot]`
/// is the endpoint of the unique edge with that signed label at `v`, if any.
#[derive(Clone, PartialEq, Eq)]
pub struct CoreGraph {
    rank: usize,
    next: Vec<Vec<Option<u32>>>,
    basepoint: Option<u32>,
}

impl CoreGraph {
    /// Folded based graph with fundamental group `⟨words⟩`.
    pub fn from_generators(rank: usize, words: &[Word]) -> Result<Self, StallingsError> {
        for w in words {
            w.fits_rank(rank)?;
        }
        if words.iter().all(Word::is_identity) {
            return Err(StallingsError::AllTrivial);
        }
        let mut edges: Vec<(u32, u32, Letter)> = Vec::new();
        let mut n_vertices = 1u32;
        for w in words {
            if w.is_identity() {
                continue;
            }
            let mut prev = 0u32;
            for (i, &l) in w.letters().iter().enumerate() {
                let target = if i + 1 == w.len() {
                    0
                } else {
                    n_vertices += 1;
                    n_vertices - 1
                };
                if l.is_positive() {
                    edges.push((prev, target, l));
                } else {
                    edges.push((target, prev, l.inverse()));
                }
                prev = target;
            }
        }
        let mut g = fold(rank, n_vertices as usize, edges, Some(0));
        g.trim();
        Ok(g)
    }

    /// The rank-`n` rose: one vertex, one loop per generator.
    pub fn rose(rank: usize) -> Self {
        let mut next = vec![vec![None; 2 * rank]];
        for i in 1..=rank {
            let l = Letter::new(i, true).unwrap();
            next[0][slot(l)] = Some(0);
            next[0][slot(l.inverse())] = Some(0);
        }
        CoreGraph {
            rank,
            next,
            basepoint: Some(0),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vertex_count(&self) -> usize {
        self.next.len()
    }

    pub fn basepoint(&self) -> Option<u32> {
        self.basepoint
    }

    pub fn with_basepoint(mut self, v: u32) -> Self {
        self.basepoint = Some(v);
        self
    }

    pub fn without_basepoint(mut self) -> Self {
        self.basepoint = None;
        self
    }

    pub fn step(&self, v: u32, l: Letter) -> Option<u32> {
        self.next[v as usize][slot(l)]
    }

    /// Follow `letters` from `v`; `None` when the trace leaves the graph.
    pub fn trace(&self, v: u32, letters: &[Letter]) -> Option<u32> {
        let mut cur = v;
        for &l in letters {
            cur = self.step(cur, l)?;
        }
        Some(cur)
    }

    /// Membership of `w` in the subgroup at the basepoint.
    pub fn contains_element(&self, w: &Word) -> bool {
        let base = self.basepoint.unwrap_or(0);
        self.trace(base, w.letters()) == Some(base)
    }

    /// True if `letters` is readable as a path starting at some vertex.
    pub fn readable_anywhere(&self, letters: &[Letter]) -> bool {
        (0..self.next.len() as u32).any(|v| self.trace(v, letters).is_some())
    }

    /// True if the cyclic word closes up at some vertex.
    pub fn reads_closed_loop(&self, letters: &[Letter]) -> bool {
        (0..self.next.len() as u32).any(|v| self.trace(v, letters) == Some(v))
    }

    /// Number of positive edges.
    pub fn edge_count(&self) -> usize {
        self.positive_edges().len()
    }

    pub fn positive_edges(&self) -> Vec<(u32, u32, Letter)> {
        let mut out = Vec::new();
        for v in 0..self.next.len() {
            for s in (0..2 * self.rank).step_by(2) {
                if let Some(t) = self.next[v][s] {
                    out.push((v as u32, t, slot_letter(s)));
                }
            }
        }
        out
    }

    /// First Betti number: the rank of the fundamental group.
    pub fn subgroup_rank(&self) -> usize {
        let e = self.edge_count();
        let v = self.vertex_count();
        (e + 1).saturating_sub(v)
    }

    fn valence(&self, v: usize) -> usize {
        self.next[v].iter().flatten().count()
    }

    /// Iteratively remove valence-≤1 vertices (keeping the basepoint). For a
    /// basepoint-free graph this leaves the core carrying all loops.
    fn trim(&mut self) {
        loop {
            let mut removed = false;
            for v in 0..self.next.len() {
                if Some(v as u32) == self.basepoint {
                    continue;
                }
                if self.valence(v) <= 1 {
                    // Detach and mark empty.
                    for s in 0..2 * self.rank {
                        if let Some(t) = self.next[v][s] {
                            let back = slot(slot_letter(s).inverse());
                            if self.next[t as usize][back] == Some(v as u32) {
                                self.next[t as usize][back] = None;
                            }
                            self.next[v][s] = None;
                        }
                    }
                    removed = true;
                }
            }
            if !removed {
                break;
            }
        }
        self.compact();
    }

    fn compact(&mut self) {
        let keep: Vec<usize> = (0..self.next.len())
            .filter(|&v| self.valence(v) > 0 || Some(v as u32) == self.basepoint)
            .collect();
        let mut remap = vec![u32::MAX; self.next.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new as u32;
        }
        let next = keep
            .iter()
            .map(|&old| {
                self.next[old]
                    .iter()
                    .map(|t| t.map(|t| remap[t as usize]))
                    .collect()
            })
            .collect();
        self.basepoint = self.basepoint.map(|b| remap[b as usize]);
        self.next = next;
    }

    /// BFS certificate from a fixed start; a complete isomorphism invariant
    /// for connected folded graphs (determinism pins the whole map once one
    /// vertex is matched).
    fn certificate_from(&self, start: u32) -> Vec<i64> {
        let mut order = vec![u32::MAX; self.next.len()];
        let mut bfs = VecDeque::new();
        order[start as usize] = 0;
        bfs.push_back(start);
        let mut count = 1u32;
        let mut cert = Vec::new();
        while let Some(v) = bfs.pop_front() {
            for s in 0..2 * self.rank {
                match self.next[v as usize][s] {
                    None => cert.push(-1),
                    Some(t) => {
                        if order[t as usize] == u32::MAX {
                            order[t as usize] = count;
                            count += 1;
                            bfs.push_back(t);
                        }
                        cert.push(i64::from(order[t as usize]));
                    }
                }
            }
        }
        cert
    }

    /// Canonical certificate: minimal BFS certificate over all start
    /// vertices (the basepoint alone, for based graphs). Two graphs are
    /// label-isomorphic iff their certificates agree.
    pub fn certificate(&self) -> Vec<i64> {
        if self.next.is_empty() {
            return Vec::new();
        }
        match self.basepoint {
            Some(b) => self.certificate_from(b),
            None => (0..self.next.len() as u32)
                .map(|v| self.certificate_from(v))
                .min()
                .unwrap(),
        }
    }

    /// Renumber vertices into the canonical BFS order.
    pub fn canonicalize(&self) -> CoreGraph {
        if self.next.is_empty() {
            return self.clone();
        }
        let start = match self.basepoint {
            Some(b) => b,
            None => (0..self.next.len() as u32)
                .min_by_key(|&v| self.certificate_from(v))
                .unwrap(),
        };
        let mut order = vec![u32::MAX; self.next.len()];
        let mut bfs = VecDeque::new();
        order[start as usize] = 0;
        bfs.push_back(start);
        let mut count = 1u32;
        let mut layout = vec![start];
        while let Some(v) = bfs.pop_front() {
            for s in 0..2 * self.rank {
                if let Some(t) = self.next[v as usize][s] {
                    if order[t as usize] == u32::MAX {
                        order[t as usize] = count;
                        count += 1;
                        layout.push(t);
                        bfs.push_back(t);
                    }
                }
            }
        }
        let next = layout
            .iter()
            .map(|&old| {
                self.next[old as usize]
                    .iter()
                    .map(|t| t.map(|t| order[t as usize]))
                    .collect()
            })
            .collect();
        CoreGraph {
            rank: self.rank,
            next,
            basepoint: self.basepoint.map(|b| order[b as usize]),
        }
    }

    /// Path words from `root` to every vertex along a BFS spanning tree.
    fn tree_words(&self, root: u32) -> Vec<Option<Word>> {
        let mut words: Vec<Option<Word>> = vec![None; self.next.len()];
        words[root as usize] = Some(Word::identity());
        let mut bfs = VecDeque::new();
        bfs.push_back(root);
        while let Some(v) = bfs.pop_front() {
            for s in 0..2 * self.rank {
                if let Some(t) = self.next[v as usize][s] {
                    if words[t as usize].is_none() {
                        let w = words[v as usize]
                            .as_ref()
                            .unwrap()
                            .mul(&Word::reduce([slot_letter(s)]));
                        words[t as usize] = Some(w);
                        bfs.push_back(t);
                    }
                }
            }
        }
        words
    }

    /// A free basis for the subgroup at `root`, one word per non-tree edge.
    pub fn generators(&self, root: u32) -> Vec<Word> {
        let words = self.tree_words(root);
        let mut gens = Vec::new();
        let mut tree_edges = BTreeSet::new();
        // Recover which positive edges the BFS used.
        let mut seen = vec![false; self.next.len()];
        seen[root as usize] = true;
        let mut bfs = VecDeque::new();
        bfs.push_back(root);
        while let Some(v) = bfs.pop_front() {
            for s in 0..2 * self.rank {
                if let Some(t) = self.next[v as usize][s] {
                    if !seen[t as usize] {
                        seen[t as usize] = true;
                        let l = slot_letter(s);
                        let key = if l.is_positive() {
                            (v, t, l)
                        } else {
                            (t, v, l.inverse())
                        };
                        tree_edges.insert(key);
                        bfs.push_back(t);
                    }
                }
            }
        }
        for (u, t, l) in self.positive_edges() {
            if tree_edges.contains(&(u, t, l)) {
                continue;
            }
            let (Some(pu), Some(pt)) = (&words[u as usize], &words[t as usize]) else {
                continue;
            };
            let gen = pu.mul(&Word::reduce([l])).mul(&pt.inverse());
            if !gen.is_identity() {
                gens.push(gen);
            }
        }
        gens
    }

    /// One nontrivial loop word based at some vertex, if the graph has one.
    fn sample_loop(&self) -> Option<(u32, Word)> {
        for v in 0..self.next.len() as u32 {
            let gens = self.generators(v);
            if let Some(g) = gens.into_iter().find(|g| !g.is_identity()) {
                return Some((v, g));
            }
        }
        None
    }
}

impl fmt::Debug for CoreGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CoreGraph(rank {}, {} vertices, {} edges",
            self.rank,
            self.vertex_count(),
            self.edge_count()
        )?;
        if let Some(b) = self.basepoint {
            write!(f, ", base {b}")?;
        }
        write!(f, ")")
    }
}

/// Fold an edge multiset into a deterministic graph by repeatedly merging
/// the endpoints of same-labeled edges sharing a vertex.
fn fold(rank: usize, n_vertices: usize, edges: Vec<(u32, u32, Letter)>, base: Option<u32>) -> CoreGraph {
    let mut parent: Vec<u32> = (0..n_vertices as u32).collect();
    fn find(parent: &mut Vec<u32>, v: u32) -> u32 {
        let mut root = v;
        while parent[root as usize] != root {
            root = parent[root as usize];
        }
        let mut cur = v;
        while parent[cur as usize] != root {
            let nxt = parent[cur as usize];
            parent[cur as usize] = root;
            cur = nxt;
        }
        root
    }

    let work = edges;
    loop {
        // Map each (vertex, signed slot) to a target; clashes trigger merges.
        let mut targets: BTreeMap<(u32, usize), u32> = BTreeMap::new();
        let mut merged = false;
        for &(u, v, l) in &work {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            for (from, to, s) in [(ru, rv, slot(l)), (rv, ru, slot(l.inverse()))] {
                match targets.get(&(from, s)) {
                    Some(&t) if find(&mut parent, t) != to => {
                        let rt = find(&mut parent, t);
                        parent[rt as usize] = to;
                        merged = true;
                    }
                    Some(_) => {}
                    None => {
                        targets.insert((from, s), to);
                    }
                }
            }
            if merged {
                break;
            }
        }
        if !merged {
            break;
        }
    }

    // Compact classes and install the deterministic transitions.
    let mut remap: BTreeMap<u32, u32> = BTreeMap::new();
    let mut fresh = 0u32;
    let mut id = |parent: &mut Vec<u32>, remap: &mut BTreeMap<u32, u32>, v: u32| -> u32 {
        let r = find(parent, v);
        *remap.entry(r).or_insert_with(|| {
            fresh += 1;
            fresh - 1
        })
    };
    let base = base.map(|b| id(&mut parent, &mut remap, b));
    let mut pairs: Vec<(u32, u32, Letter)> = Vec::new();
    for (u, v, l) in work {
        let cu = id(&mut parent, &mut remap, u);
        let cv = id(&mut parent, &mut remap, v);
        pairs.push((cu, cv, l));
    }
    let n = fresh as usize;
    let mut next = vec![vec![None; 2 * rank]; n];
    for (u, v, l) in pairs {
        next[u as usize][slot(l)] = Some(v);
        next[v as usize][slot(l.inverse())] = Some(u);
    }
    CoreGraph {
        rank,
        next,
        basepoint: base,
    }
}

/// Check whether `⟨words⟩ = F`: the folded based graph, trimmed, must be the
/// rank-n rose.
pub fn folds_to_full_rose(rank: usize, words: &[Word]) -> bool {
    let Ok(g) = CoreGraph::from_generators(rank, words) else {
        return false;
    };
    g.vertex_count() == 1 && g.edge_count() == rank
}

/// Label-synchronized product of two folded graphs; the machinery behind
/// intersections of conjugates.
fn raw_fiber_product(k1: &CoreGraph, k2: &CoreGraph) -> (Vec<Vec<Option<u32>>>, usize) {
    let n1 = k1.vertex_count();
    let n2 = k2.vertex_count();
    let rank = k1.rank;
    let idx = |u: u32, v: u32| (u as usize) * n2 + v as usize;
    let mut next = vec![vec![None; 2 * rank]; n1 * n2];
    for u in 0..n1 as u32 {
        for v in 0..n2 as u32 {
            for s in 0..2 * rank {
                if let (Some(tu), Some(tv)) = (k1.next[u as usize][s], k2.next[v as usize][s]) {
                    next[idx(u, v)][s] = Some(idx(tu, tv) as u32);
                }
            }
        }
    }
    (next, n2)
}

/// The nontrivial core components of the fiber product `K1 ×_G K2`. Each
/// represents `[A ∩ B^w]` for some conjugator `w`.
pub fn fiber_product(k1: &CoreGraph, k2: &CoreGraph) -> Vec<CoreGraph> {
    fiber_product_components(k1, k2)
        .into_iter()
        .map(|(g, _, _)| g.canonicalize())
        .collect()
}

/// Like [`fiber_product`], additionally reporting, per component, a sample
/// nontrivial loop word together with the product-vertex pair `(u, v)` it is
/// based at (so the loop closes at `u` in `k1` and at `v` in `k2`).
fn fiber_product_components(
    k1: &CoreGraph,
    k2: &CoreGraph,
) -> Vec<(CoreGraph, Word, (u32, u32))> {
    assert_eq!(k1.rank, k2.rank);
    let (next, n2) = raw_fiber_product(k1, k2);
    let total = next.len();
    let mut comp_seen = vec![false; total];
    let mut out = Vec::new();
    for start in 0..total {
        if comp_seen[start] || next[start].iter().flatten().count() == 0 {
            continue;
        }
        // Collect the component.
        let mut members = Vec::new();
        let mut bfs = VecDeque::new();
        comp_seen[start] = true;
        bfs.push_back(start as u32);
        while let Some(v) = bfs.pop_front() {
            members.push(v);
            for t in next[v as usize].iter().flatten() {
                if !comp_seen[*t as usize] {
                    comp_seen[*t as usize] = true;
                    bfs.push_back(*t);
                }
            }
        }
        let mut remap = BTreeMap::new();
        for (i, &m) in members.iter().enumerate() {
            remap.insert(m, i as u32);
        }
        let sub_next: Vec<Vec<Option<u32>>> = members
            .iter()
            .map(|&m| {
                next[m as usize]
                    .iter()
                    .map(|t| t.map(|t| remap[&t]))
                    .collect()
            })
            .collect();
        let mut g = CoreGraph {
            rank: k1.rank,
            next: sub_next,
            basepoint: None,
        };
        // Trim while tracking which product vertices survive coring.
        let mut live: Vec<u32> = members.clone();
        loop {
            let mut removed = false;
            for v in 0..g.next.len() {
                if g.valence(v) == 0 || g.valence(v) > 1 {
                    continue;
                }
                for s in 0..2 * g.rank {
                    if let Some(t) = g.next[v][s] {
                        let back = slot(slot_letter(s).inverse());
                        if g.next[t as usize][back] == Some(v as u32) {
                            g.next[t as usize][back] = None;
                        }
                        g.next[v][s] = None;
                    }
                }
                removed = true;
            }
            if !removed {
                break;
            }
        }
        let kept: Vec<usize> = (0..g.next.len()).filter(|&v| g.valence(v) > 0).collect();
        if kept.is_empty() {
            continue;
        }
        let mut vmap = vec![u32::MAX; g.next.len()];
        for (new, &old) in kept.iter().enumerate() {
            vmap[old] = new as u32;
        }
        let cored = CoreGraph {
            rank: g.rank,
            next: kept
                .iter()
                .map(|&old| {
                    g.next[old]
                        .iter()
                        .map(|t| t.map(|t| vmap[t as usize]))
                        .collect()
                })
                .collect(),
            basepoint: None,
        };
        live = kept.iter().map(|&old| live[old]).collect();
        if cored.subgroup_rank() == 0 {
            continue;
        }
        let Some((base, loop_word)) = cored.sample_loop() else {
            continue;
        };
        let prod = live[base as usize] as usize;
        let pair = ((prod / n2) as u32, (prod % n2) as u32);
        out.push((cored, loop_word, pair));
    }
    out
}

/// A finite collection of conjugacy classes of nontrivial finite-rank
/// subgroups, held as basepoint-free canonical core graphs, deduplicated up
/// to conjugacy and deterministically ordered.
#[derive(Clone, PartialEq, Eq)]
pub struct SubgroupSystem {
    rank: usize,
    components: Vec<CoreGraph>,
}

/// Witness for a malnormality failure: a nontrivial `element` of
/// `K_s^conjugator ∩ K_t` with `conjugator ∉ K_s` when `s = t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalnormalityWitness {
    pub s: usize,
    pub t: usize,
    pub conjugator: Word,
    pub element: Word,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MalnormalityReport {
    pub malnormal: bool,
    pub witness: Option<MalnormalityWitness>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub invariant: bool,
    /// Index of an original component with no conjugate image component.
    pub failed_component: Option<usize>,
}

impl SubgroupSystem {
    pub fn new(rank: usize, components: Vec<CoreGraph>) -> Self {
        let mut canon: Vec<CoreGraph> = components
            .into_iter()
            .filter(|c| c.vertex_count() > 0 && c.subgroup_rank() > 0)
            .map(|c| c.without_basepoint().canonicalize())
            .collect();
        canon.sort_by_key(|c| c.certificate());
        canon.dedup_by_key(|c| c.certificate());
        SubgroupSystem {
            rank,
            components: canon,
        }
    }

    /// Build from generator word lists, one per component.
    pub fn from_generator_lists(rank: usize, lists: &[Vec<Word>]) -> Result<Self, StallingsError> {
        let mut comps = Vec::new();
        for gens in lists {
            comps.push(CoreGraph::from_generators(rank, gens)?);
        }
        Ok(SubgroupSystem::new(rank, comps))
    }

    /// The system `{[F]}` consisting of the whole group.
    pub fn whole_group(rank: usize) -> Self {
        SubgroupSystem::new(rank, vec![CoreGraph::rose(rank)])
    }

    pub fn empty(rank: usize) -> Self {
        SubgroupSystem {
            rank,
            components: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn components(&self) -> &[CoreGraph] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    /// Generator word lists (the JSON wire form).
    pub fn generator_lists(&self) -> Vec<Vec<Word>> {
        self.components.iter().map(|c| c.generators(0)).collect()
    }

    /// True iff the cyclic word of `c` reads a closed loop somewhere in some
    /// component, i.e. some conjugate of `c` lies in some `K_s`.
    pub fn carries_conjugacy(&self, c: &ConjugacyClass) -> Result<bool, StallingsError> {
        if c.is_trivial() {
            return Err(StallingsError::TrivialClass);
        }
        Ok(self
            .components
            .iter()
            .any(|k| k.reads_closed_loop(c.rep().letters())))
    }

    /// Element-level membership in the union of the chosen representatives
    /// `K_s` (basepoint 0 of the canonical graphs).
    pub fn contains_element(&self, w: &Word) -> bool {
        !w.is_identity()
            && self
                .components
                .iter()
                .any(|k| k.trace(0, w.letters()) == Some(0))
    }

    /// The meet: all nontrivial `[A ∩ B^w]`, deduplicated up to conjugacy.
    pub fn meet(&self, other: &SubgroupSystem) -> SubgroupSystem {
        let mut comps = Vec::new();
        for a in &self.components {
            for b in &other.components {
                comps.extend(fiber_product(a, b));
            }
        }
        SubgroupSystem::new(self.rank, comps)
    }

    /// Malnormality via fiber products: for all `s ≤ t` no nontrivial
    /// off-diagonal component may survive coring. The diagonal component of
    /// `K_s × K_s` cores to the diagonal copy of `K_s`, so it is recognized
    /// by any one of its vertices being a diagonal pair.
    pub fn is_malnormal(&self) -> MalnormalityReport {
        for (s, ks) in self.components.iter().enumerate() {
            for (t, kt) in self.components.iter().enumerate().skip(s) {
                for (_, loop_word, (au, av)) in fiber_product_components(ks, kt) {
                    if s == t && au == av {
                        continue;
                    }
                    let p = ks.tree_words(0)[au as usize].clone().unwrap();
                    let q = kt.tree_words(0)[av as usize].clone().unwrap();
                    // The loop closes at au in K_s and at av in K_t, so
                    // p ℓ p⁻¹ ∈ K_s and q ℓ q⁻¹ ∈ K_t, giving
                    // q ℓ q⁻¹ ∈ K_s^{p q⁻¹} ∩ K_t.
                    let witness = MalnormalityWitness {
                        s,
                        t,
                        conjugator: p.mul(&q.inverse()),
                        element: loop_word.conjugate_by(&q),
                    };
                    return MalnormalityReport {
                        malnormal: false,
                        witness: Some(witness),
                    };
                }
            }
        }
        MalnormalityReport {
            malnormal: true,
            witness: None,
        }
    }

    /// Apply `aut` to the generators of each component and refold.
    pub fn image(&self, aut: &BasisAutomorphism) -> Result<SubgroupSystem, StallingsError> {
        if aut.rank() != self.rank {
            return Err(StallingsError::RankMismatch(aut.rank(), self.rank));
        }
        let mut comps = Vec::new();
        for c in &self.components {
            let gens = c
                .generators(0)
                .iter()
                .map(|g| aut.apply(g))
                .collect::<Result<Vec<_>, _>>()?;
            comps.push(CoreGraph::from_generators(self.rank, &gens)?);
        }
        Ok(SubgroupSystem::new(self.rank, comps))
    }

    /// Check `[φ(K_s)] = [K_s]` componentwise.
    pub fn invariance(&self, aut: &BasisAutomorphism) -> Result<InvarianceReport, StallingsError> {
        let image = self.image(aut)?;
        let img_certs: BTreeSet<Vec<i64>> =
            image.components.iter().map(|c| c.certificate()).collect();
        for (i, c) in self.components.iter().enumerate() {
            if !img_certs.contains(&c.certificate()) {
                return Ok(InvarianceReport {
                    invariant: false,
                    failed_component: Some(i),
                });
            }
        }
        Ok(InvarianceReport {
            invariant: self.components.len() == image.components.len(),
            failed_component: None,
        })
    }
}

impl fmt::Debug for SubgroupSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lists = self.generator_lists();
        write!(f, "{{")?;
        for (i, gens) in lists.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[⟨")?;
            for (j, g) in gens.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{g}")?;
            }
            write!(f, "⟩]")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(ws: &[&str]) -> Vec<Word> {
        ws.iter().map(|s| Word::parse(s).unwrap()).collect()
    }

    fn system(rank: usize, lists: &[&[&str]]) -> SubgroupSystem {
        let lists: Vec<Vec<Word>> = lists.iter().map(|l| words(l)).collect();
        SubgroupSystem::from_generator_lists(rank, &lists).unwrap()
    }

    #[test]
    fn single_loop_generator() {
        let g = CoreGraph::from_generators(2, &words(&["a"])).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 1);
        assert!(g.contains_element(&Word::parse("aaaaa").unwrap()));
        assert!(!g.contains_element(&Word::parse("ab").unwrap()));
    }

    #[test]
    fn basis_folds_to_rose() {
        assert!(folds_to_full_rose(2, &words(&["a", "b"])));
        assert!(!folds_to_full_rose(2, &words(&["aa", "b"])));
        assert!(folds_to_full_rose(2, &words(&["ab", "b"])));
    }

    #[test]
    fn two_generator_subgroup_membership() {
        let g = CoreGraph::from_generators(2, &words(&["aa", "abA"])).unwrap();
        assert!(g.contains_element(&Word::parse("aa").unwrap()));
        assert!(g.contains_element(&Word::parse("abA").unwrap()));
        assert!(g.contains_element(&Word::parse("aba").unwrap()));
        assert!(!g.contains_element(&Word::parse("a").unwrap()));
        assert!(!g.contains_element(&Word::parse("b").unwrap()));
    }

    #[test]
    fn carries_conjugacy_basics() {
        let s = system(2, &[&["a"]]);
        let a3 = ConjugacyClass::of(&Word::parse("aaa").unwrap());
        let ab = ConjugacyClass::of(&Word::parse("ab").unwrap());
        assert!(s.carries_conjugacy(&a3).unwrap());
        assert!(!s.carries_conjugacy(&ab).unwrap());
        let trivial = ConjugacyClass::of(&Word::identity());
        assert_eq!(
            s.carries_conjugacy(&trivial),
            Err(StallingsError::TrivialClass)
        );
    }

    #[test]
    fn fiber_product_shared_letter() {
        let k1 = CoreGraph::from_generators(3, &words(&["a", "b"]))
            .unwrap()
            .without_basepoint()
            .canonicalize();
        let k2 = CoreGraph::from_generators(3, &words(&["b", "c"]))
            .unwrap()
            .without_basepoint()
            .canonicalize();
        let comps = fiber_product(&k1, &k2);
        assert_eq!(comps.len(), 1);
        let b_loop = ConjugacyClass::of(&Word::parse("b").unwrap());
        assert!(comps[0].reads_closed_loop(b_loop.rep().letters()));
        assert_eq!(comps[0].subgroup_rank(), 1);
    }

    #[test]
    fn fiber_product_disjoint_letters() {
        let k1 = CoreGraph::from_generators(2, &words(&["a"])).unwrap();
        let k2 = CoreGraph::from_generators(2, &words(&["b"])).unwrap();
        assert!(fiber_product(&k1, &k2).is_empty());
    }

    #[test]
    fn self_product_of_malnormal_cyclic_is_diagonal() {
        let k = CoreGraph::from_generators(2, &words(&["aab"]))
            .unwrap()
            .without_basepoint()
            .canonicalize();
        let comps = fiber_product(&k, &k);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].certificate(), k.certificate());
    }

    #[test]
    fn meet_examples() {
        let s1 = system(3, &[&["a", "b"]]);
        let s2 = system(3, &[&["b", "c"]]);
        let m = s1.meet(&s2);
        assert_eq!(m, system(3, &[&["b"]]));

        let whole = SubgroupSystem::whole_group(3);
        assert_eq!(s1.meet(&whole), s1);

        let sa = system(3, &[&["a"]]);
        let sb = system(3, &[&["b"]]);
        assert!(sa.meet(&sb).is_empty());
    }

    #[test]
    fn malnormality_verdicts() {
        assert!(system(2, &[&["a"], &["b"]]).is_malnormal().malnormal);
        assert!(system(2, &[&["ab"]]).is_malnormal().malnormal);

        let report = system(2, &[&["aa"]]).is_malnormal();
        assert!(!report.malnormal);
        let w = report.witness.unwrap();
        assert!(!w.element.is_identity());
        // element ∈ K^conjugator: conjugator · element · conjugator⁻¹... the
        // convention is element ∈ K^x = x⁻¹Kx, so x · element · x⁻¹ ∈ K.
        let sys = system(2, &[&["aa"]]);
        let moved = w.element.conjugate_by(&w.conjugator);
        assert!(sys.components()[w.s].trace(0, moved.letters()) == Some(0));
        assert!(sys.components()[w.t].trace(0, w.element.letters()) == Some(0));
        if w.s == w.t {
            assert!(!sys.contains_element(&w.conjugator));
        }
    }

    #[test]
    fn image_system_examples() {
        let aut = BasisAutomorphism::parse(3, &["a", "bc", "b"]).unwrap();
        let sa = system(3, &[&["a"]]);
        assert_eq!(sa.image(&aut).unwrap(), sa);
        assert!(sa.invariance(&aut).unwrap().invariant);

        let sb = system(3, &[&["b"]]);
        let img = sb.image(&aut).unwrap();
        assert_eq!(img, system(3, &[&["bc"]]));
        assert!(!sb.invariance(&aut).unwrap().invariant);

        let id = BasisAutomorphism::identity(3);
        assert!(sb.invariance(&id).unwrap().invariant);
    }
}
