//! Topological representatives and their dynamical analysis: transition
//! matrices, Perron–Frobenius eigenvalues, strata classification, the turn
//! map and legality, relative train track conditions, bounded cancellation,
//! critical constants and Nielsen path search.

use crate::markedgraph::{EdgePath, GraphError, MarkedGraph, OrientedEdge, Turn};
use crate::scalar::Real;
use crate::words::{BasisAutomorphism, Word, WordError};
use crate::Scalar;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrainMapError {
    #[error("stratum {0} does not exist")]
    BadStratum(usize),
    #[error("transition matrix is not irreducible")]
    NotIrreducible,
    #[error("stratum {0} is not exponentially growing")]
    NotEg(usize),
    #[error("iterate length exceeded the cap of {0} edges")]
    CapExceeded(usize),
    #[error("ill-formed topological representative: {0}")]
    Malformed(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Guard on intermediate path lengths during iteration. Overridable through
/// the CLI via `TTDYN_ITER_CAP`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterationCap(pub usize);

impl Default for IterationCap {
    fn default() -> Self {
        IterationCap(10_000_000)
    }
}

/// A topological representative `f: G → G` respecting the filtration.
#[derive(Clone)]
pub struct TopRep {
    graph: MarkedGraph,
    vertex_map: Vec<usize>,
    /// Tightened image of each positive edge.
    edge_images: Vec<EdgePath>,
    /// User assertion that the represented outer automorphism is
    /// rotationless; checked only partially (see [`TopRep::validate`]).
    rotationless_asserted: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<String>,
    /// Induced automorphism on `F` through the marking, when defined.
    pub induced: Option<BasisAutomorphism>,
    /// Partial rotationlessness evidence: all periodic directions found up
    /// to the probed period were fixed.
    pub periodic_directions_fixed: Option<bool>,
}

impl TopRep {
    pub fn new(
        graph: MarkedGraph,
        vertex_map: Vec<usize>,
        edge_images: Vec<EdgePath>,
        rotationless_asserted: bool,
    ) -> Result<Self, TrainMapError> {
        if vertex_map.len() != graph.vertex_count() {
            return Err(TrainMapError::Malformed(format!(
                "vertex map covers {} of {} vertices",
                vertex_map.len(),
                graph.vertex_count()
            )));
        }
        if edge_images.len() != graph.edge_list().len() {
            return Err(TrainMapError::Malformed(format!(
                "edge map covers {} of {} edges",
                edge_images.len(),
                graph.edge_list().len()
            )));
        }
        for (&v, _) in vertex_map.iter().zip(0..) {
            if v >= graph.vertex_count() {
                return Err(TrainMapError::Malformed(format!("vertex image {v} out of range")));
            }
        }
        Ok(TopRep {
            graph,
            vertex_map,
            edge_images,
            rotationless_asserted,
        })
    }

    /// Build on a rose from generator images given as words.
    pub fn on_rose(
        rank: usize,
        strata: &[usize],
        images: &[&str],
        rotationless: bool,
    ) -> Result<Self, TrainMapError> {
        let graph = MarkedGraph::rose(rank, strata)?;
        let imgs = images
            .iter()
            .map(|s| {
                let w = Word::parse(s)?;
                Ok(graph.word_to_path(&w)?)
            })
            .collect::<Result<Vec<_>, TrainMapError>>()?;
        TopRep::new(graph, vec![0], imgs, rotationless)
    }

    pub fn graph(&self) -> &MarkedGraph {
        &self.graph
    }

    pub fn rotationless_asserted(&self) -> bool {
        self.rotationless_asserted
    }

    pub fn vertex_image(&self, v: usize) -> usize {
        self.vertex_map[v]
    }

    pub fn edge_image(&self, e: OrientedEdge) -> EdgePath {
        let img = &self.edge_images[e.edge()];
        if e.is_forward() {
            img.clone()
        } else {
            img.reversed()
        }
    }

    /// The turn map on directions: the first edge of the image path, when
    /// the image is nontrivial.
    pub fn direction_image(&self, d: OrientedEdge) -> Option<OrientedEdge> {
        let img = &self.edge_images[d.edge()];
        if img.is_empty() {
            return None;
        }
        Some(if d.is_forward() {
            img.edges()[0]
        } else {
            img.edges()[img.len() - 1].reversed()
        })
    }

    /// Tightened image of a path or circuit, guarded by `cap`.
    pub fn map_path(&self, p: &EdgePath, cap: IterationCap) -> Result<EdgePath, TrainMapError> {
        let mut raw: Vec<OrientedEdge> = Vec::new();
        for &e in p.edges() {
            let img = &self.edge_images[e.edge()];
            if e.is_forward() {
                raw.extend(img.edges().iter().copied());
            } else {
                raw.extend(img.edges().iter().rev().map(|x| x.reversed()));
            }
            if raw.len() > cap.0 {
                return Err(TrainMapError::CapExceeded(cap.0));
            }
        }
        Ok(if p.is_cyclic() {
            self.graph.tighten_cyclic(&raw)?
        } else {
            self.graph.tighten(&raw)?
        })
    }

    /// `f^n_#(p)`, tightened at every step (cyclically for circuits).
    pub fn iterate_path(
        &self,
        p: &EdgePath,
        n: u32,
        cap: IterationCap,
    ) -> Result<EdgePath, TrainMapError> {
        let mut cur = p.clone();
        for _ in 0..n {
            cur = self.map_path(&cur, cap)?;
        }
        Ok(cur)
    }

    /// Structural and marking validation.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let g = &self.graph;
        for (i, e) in g.edge_list().iter().enumerate() {
            let img = &self.edge_images[i];
            let (want_from, want_to) = (self.vertex_map[e.from], self.vertex_map[e.to]);
            if img.is_empty() {
                if want_from != want_to {
                    violations.push(format!(
                        "edge {:?} has trivial image but its endpoints map apart",
                        e.id
                    ));
                }
                continue;
            }
            if g.origin(img.edges()[0]) != want_from
                || g.terminus(img.edges()[img.len() - 1]) != want_to
            {
                violations.push(format!("image of edge {:?} does not respect the vertex map", e.id));
            }
            let height = g.height(img).unwrap_or(0);
            if height > e.stratum {
                violations.push(format!(
                    "filtration violated: f({:?}) has height {} > stratum {}",
                    e.id, height, e.stratum
                ));
            }
        }
        // Marking: the induced endomorphism must be an automorphism.
        let induced = self.induced_automorphism();
        match &induced {
            Ok(aut) => {
                if !aut.is_surjective() {
                    violations.push("induced endomorphism is not surjective".into());
                }
            }
            Err(e) => violations.push(format!("marking translation failed: {e}")),
        }
        let periodic_fixed = self.periodic_directions_fixed(6);
        ValidationReport {
            valid: violations.is_empty(),
            violations,
            induced: induced.ok(),
            periodic_directions_fixed: Some(periodic_fixed),
        }
    }

    /// The outer automorphism through the marking: generator `x_i` maps to
    /// the marking image of `f(word_to_path(x_i))`.
    pub fn induced_automorphism(&self) -> Result<BasisAutomorphism, TrainMapError> {
        let rank = self.graph.rank();
        let mut images = Vec::with_capacity(rank);
        for i in 1..=rank {
            let gen = Word::generator(i)?;
            let path = self.graph.word_to_path(&gen)?;
            let image = self.map_path(&path, IterationCap::default())?;
            images.push(self.graph.path_to_word(&image));
        }
        Ok(BasisAutomorphism::new(rank, images)?)
    }

    /// Partial rotationlessness witness: every direction periodic under the
    /// turn map with period ≤ `max_period` is actually fixed.
    pub fn periodic_directions_fixed(&self, max_period: u32) -> bool {
        for d in 0..self.graph.direction_count() {
            let d0 = OrientedEdge::from_index(d);
            let mut cur = d0;
            for k in 1..=max_period {
                match self.direction_image(cur) {
                    Some(next) => cur = next,
                    None => break,
                }
                if cur == d0 && k > 1 {
                    return false;
                }
                if cur == d0 {
                    break;
                }
            }
        }
        true
    }

    /// Transition matrix of stratum `r`.
    pub fn transition_matrix(&self, r: usize) -> Result<TransitionMatrix, TrainMapError> {
        if r == 0 || r > self.graph.strata_count() {
            return Err(TrainMapError::BadStratum(r));
        }
        let edges = self.graph.stratum_edges(r);
        let pos = |e: usize| edges.iter().position(|&x| x == e);
        let dim = edges.len();
        let mut entries = vec![0u64; dim * dim];
        for (j, &ej) in edges.iter().enumerate() {
            for oe in self.edge_images[ej].edges() {
                if let Some(i) = pos(oe.edge()) {
                    entries[i * dim + j] += 1;
                }
            }
        }
        Ok(TransitionMatrix {
            stratum: r,
            dim,
            entries,
            edge_ids: edges
                .iter()
                .map(|&e| self.graph.edge_list()[e].id.clone())
                .collect(),
        })
    }

    /// Classify every stratum.
    pub fn classify_strata(&self) -> Result<StrataReport, TrainMapError> {
        let mut strata = Vec::new();
        for r in 1..=self.graph.strata_count() {
            let m = self.transition_matrix(r)?;
            let info = if m.is_zero() {
                StratumInfo {
                    stratum: r,
                    class: StratumClass::Zero,
                    irreducible: false,
                    pf_eigenvalue: None,
                    edges: m.edge_ids.clone(),
                }
            } else if m.is_irreducible() {
                let lambda: Scalar = pf_eigenvalue(&m)?;
                let class = if lambda > 1.0 + 1e-9 {
                    StratumClass::Eg
                } else {
                    StratumClass::Neg
                };
                StratumInfo {
                    stratum: r,
                    class,
                    irreducible: true,
                    pf_eigenvalue: Some(lambda),
                    edges: m.edge_ids.clone(),
                }
            } else {
                StratumInfo {
                    stratum: r,
                    class: StratumClass::Mixed,
                    irreducible: false,
                    pf_eigenvalue: None,
                    edges: m.edge_ids.clone(),
                }
            };
            strata.push(info);
        }
        Ok(StrataReport { strata })
    }

    /// All illegal non-degenerate turns: those whose turn-map orbit becomes
    /// degenerate. Orbits that repeat or leave the domain are legal.
    pub fn illegal_turns(&self) -> BTreeSet<Turn> {
        let g = &self.graph;
        let mut illegal = BTreeSet::new();
        for v in 0..g.vertex_count() {
            let dirs = g.directions_at(v);
            for (i, &d1) in dirs.iter().enumerate() {
                for &d2 in dirs.iter().skip(i + 1) {
                    let turn = Turn::new(d1, d2);
                    if self.turn_is_illegal(turn) {
                        illegal.insert(turn);
                    }
                }
            }
        }
        illegal
    }

    fn turn_is_illegal(&self, turn: Turn) -> bool {
        let mut seen = BTreeSet::new();
        let mut cur = turn;
        loop {
            if cur.is_degenerate() {
                return true;
            }
            if !seen.insert(cur) {
                return false;
            }
            match (self.direction_image(cur.0), self.direction_image(cur.1)) {
                (Some(a), Some(b)) => cur = Turn::new(a, b),
                _ => return false,
            }
        }
    }

    /// Illegal turns of height ≤ `r`.
    pub fn illegal_turns_up_to(&self, r: usize) -> BTreeSet<Turn> {
        self.illegal_turns()
            .into_iter()
            .filter(|t| {
                self.graph.stratum_of(t.0).max(self.graph.stratum_of(t.1)) <= r
            })
            .collect()
    }

    /// A path is r-legal when it has height ≤ r and crosses no illegal turn
    /// involving a stratum-r edge.
    pub fn is_r_legal(&self, p: &EdgePath, r: usize, illegal: &BTreeSet<Turn>) -> bool {
        let n = p.len();
        if n == 0 {
            return true;
        }
        let seam = if p.is_cyclic() { n } else { n - 1 };
        for i in 0..seam {
            let a = p.edges()[i];
            let b = p.edges()[(i + 1) % n];
            let turn = Turn::new(a.reversed(), b);
            let height = self.graph.stratum_of(turn.0).max(self.graph.stratum_of(turn.1));
            if height >= r && illegal.contains(&turn) {
                return false;
            }
        }
        true
    }

    /// Relative train track conditions, with condition (2) checked on
    /// connecting paths up to `conn_bound` edges.
    pub fn check_rtt(&self, conn_bound: usize) -> Result<RttReport, TrainMapError> {
        let strata = self.classify_strata()?;
        let illegal = self.illegal_turns();
        let g = &self.graph;
        let mut report = RttReport {
            pass: true,
            legal_image_failures: Vec::new(),
            direction_failures: Vec::new(),
            connecting_path_failures: Vec::new(),
            connecting_bound: conn_bound,
        };
        for info in strata.eg_strata() {
            let r = info.stratum;
            for &e in &g.stratum_edges(r) {
                for d in [OrientedEdge::forward(e), OrientedEdge::backward(e)] {
                    // (1) images of EG edges are r-legal
                    let img = self.edge_image(d);
                    if !self.is_r_legal(&img, r, &illegal) {
                        report.pass = false;
                        report
                            .legal_image_failures
                            .push(format!("f({}) is not {}-legal", g.describe_path(
                                &EdgePath::from_parts(vec![d], false)), r));
                    }
                    // (3) the turn map keeps H_r directions in H_r
                    match self.direction_image(d) {
                        Some(next) if g.stratum_of(next) == r => {}
                        _ => {
                            report.pass = false;
                            report.direction_failures.push(format!(
                                "Tf leaves stratum {} at direction {}",
                                r,
                                g.describe_path(&EdgePath::from_parts(vec![d], false))
                            ));
                        }
                    }
                }
            }
            // (2) nondegenerate connecting paths in G_{r-1} with endpoints
            // at vertices of H_r inside G_{r-1} have nontrivial image.
            let h_r_vertices: BTreeSet<usize> = g
                .stratum_edges(r)
                .iter()
                .flat_map(|&e| {
                    let edge = &g.edge_list()[e];
                    [edge.from, edge.to]
                })
                .collect();
            let lower_vertices: BTreeSet<usize> = (0..g.edge_list().len())
                .filter(|&e| g.edge_list()[e].stratum < r)
                .flat_map(|e| {
                    let edge = &g.edge_list()[e];
                    [edge.from, edge.to]
                })
                .collect();
            let anchors: Vec<usize> = h_r_vertices
                .intersection(&lower_vertices)
                .copied()
                .collect();
            for &start in &anchors {
                let mut stack: Vec<Vec<OrientedEdge>> = vec![Vec::new()];
                while let Some(cur) = stack.pop() {
                    if cur.len() >= conn_bound {
                        continue;
                    }
                    let at = cur
                        .last()
                        .map(|&e| g.terminus(e))
                        .unwrap_or(start);
                    for d in g.directions_at(at) {
                        if g.stratum_of(d) >= r {
                            continue;
                        }
                        if cur.last().map(|&e| e.reversed()) == Some(d) {
                            continue;
                        }
                        let mut next = cur.clone();
                        next.push(d);
                        let end = g.terminus(d);
                        if anchors.contains(&end) {
                            let p = EdgePath::from_parts(next.clone(), false);
                            let img = self.map_path(&p, IterationCap::default())?;
                            if img.is_empty() {
                                report.pass = false;
                                report.connecting_path_failures.push(format!(
                                    "f#({}) is trivial",
                                    g.describe_path(&p)
                                ));
                            }
                        }
                        stack.push(next);
                    }
                }
            }
        }
        Ok(report)
    }

    /// Certified bounded-cancellation bound: the sum of image lengths.
    pub fn bcc_certified(&self) -> usize {
        self.edge_images.iter().map(EdgePath::len).sum()
    }

    /// Largest cancellation observed when mapping tight concatenations
    /// `u·v`: `(|f#(u)| + |f#(v)| − |f#(uv)|) / 2`. Exhaustive over short
    /// pairs, then randomized.
    pub fn bcc_empirical(&self, samples: usize, maxlen: usize, seed: u64) -> usize {
        let mut best = 0usize;
        let cap = IterationCap::default();
        let consider = |u: &EdgePath, v: &EdgePath, this: &TopRep| {
            if u.is_empty() || v.is_empty() {
                return 0;
            }
            if this.graph.terminus(u.edges()[u.len() - 1]) != this.graph.origin(v.edges()[0]) {
                return 0;
            }
            if u.edges()[u.len() - 1] == v.edges()[0].reversed() {
                return 0;
            }
            let mut raw = u.edges().to_vec();
            raw.extend_from_slice(v.edges());
            let (Ok(fu), Ok(fv)) = (this.map_path(u, cap), this.map_path(v, cap)) else {
                return 0;
            };
            let Ok(fuv) = this
                .graph
                .tighten(&raw)
                .map_err(TrainMapError::Graph)
                .and_then(|p| this.map_path(&p, cap))
            else {
                return 0;
            };
            (fu.len() + fv.len()).saturating_sub(fuv.len()) / 2
        };
        // Exhaustive over pairs of tight paths with ≤ 2 edges.
        let short = self.tight_paths_up_to(2);
        for u in &short {
            for v in &short {
                best = best.max(consider(u, v, self));
            }
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let u = self.random_tight_path(&mut rng, maxlen);
            let v = self.random_tight_path_from(
                &mut rng,
                maxlen,
                u.edges().last().copied(),
            );
            best = best.max(consider(&u, &v, self));
        }
        best
    }

    fn tight_paths_up_to(&self, maxlen: usize) -> Vec<EdgePath> {
        let g = &self.graph;
        let mut out = Vec::new();
        let mut stack: Vec<Vec<OrientedEdge>> = (0..g.direction_count())
            .map(|d| vec![OrientedEdge::from_index(d)])
            .collect();
        while let Some(cur) = stack.pop() {
            out.push(EdgePath::from_parts(cur.clone(), false));
            if cur.len() >= maxlen {
                continue;
            }
            let at = self.graph.terminus(*cur.last().unwrap());
            for d in g.directions_at(at) {
                if Some(d.reversed()) == cur.last().copied() {
                    continue;
                }
                let mut next = cur.clone();
                next.push(d);
                stack.push(next);
            }
        }
        out
    }

    fn random_tight_path<R: Rng>(&self, rng: &mut R, maxlen: usize) -> EdgePath {
        self.random_tight_path_from(rng, maxlen, None)
    }

    fn random_tight_path_from<R: Rng>(
        &self,
        rng: &mut R,
        maxlen: usize,
        after: Option<OrientedEdge>,
    ) -> EdgePath {
        let g = &self.graph;
        let len = rng.gen_range(1..=maxlen);
        let mut edges: Vec<OrientedEdge> = Vec::with_capacity(len);
        let mut prev = after;
        let mut at = match after {
            Some(e) => g.terminus(e),
            None => rng.gen_range(0..g.vertex_count()),
        };
        for _ in 0..len {
            let choices: Vec<OrientedEdge> = g
                .directions_at(at)
                .into_iter()
                .filter(|d| Some(d.reversed()) != prev)
                .collect();
            if choices.is_empty() {
                break;
            }
            let d = choices[rng.gen_range(0..choices.len())];
            edges.push(d);
            at = g.terminus(d);
            prev = Some(d);
        }
        EdgePath::from_parts(edges, false)
    }

    /// Critical constant `2·BCC(f)/(λ_r − 1)` for an EG stratum, from the
    /// certified cancellation bound.
    pub fn critical_constant<T: Real>(&self, r: usize) -> Result<T, TrainMapError> {
        let m = self.transition_matrix(r)?;
        if m.is_zero() || !m.is_irreducible() {
            return Err(TrainMapError::NotEg(r));
        }
        let lambda: T = pf_eigenvalue(&m)?;
        if lambda <= T::one() + T::from_f64(1e-9).unwrap() {
            return Err(TrainMapError::NotEg(r));
        }
        let bcc = T::from_count(self.bcc_certified() as u64);
        Ok((T::from_count(2) * bcc) / (lambda - T::one()))
    }

    /// All tightened nontrivial paths with endpoints at vertices, at most
    /// `max_len` edges long, fixed by `f^k_#` for some `k ≤ period_bound`.
    /// The `period` recorded is the minimal one; genuine Nielsen paths have
    /// period 1. A path and its reverse are reported once.
    pub fn find_nielsen_paths(
        &self,
        max_len: usize,
        period_bound: u32,
    ) -> Result<Vec<NielsenPath>, TrainMapError> {
        let cap = IterationCap::default();
        let mut out = Vec::new();
        let mut seen: BTreeSet<Vec<OrientedEdge>> = BTreeSet::new();
        for p in self.tight_paths_up_to(max_len) {
            let key = p.edges().to_vec();
            let rev_key = p.reversed().edges().to_vec();
            if seen.contains(&key) || seen.contains(&rev_key) {
                continue;
            }
            // Keep the orientation with the smaller edge sequence.
            let p = if rev_key < key { p.reversed() } else { p };
            seen.insert(p.edges().to_vec());
            let mut cur = p.clone();
            for k in 1..=period_bound {
                cur = match self.map_path(&cur, cap) {
                    Ok(c) => c,
                    Err(TrainMapError::CapExceeded(_)) => break,
                    Err(e) => return Err(e),
                };
                if cur == p {
                    out.push(NielsenPath {
                        path: p.clone(),
                        period: k,
                    });
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Analysis bundle shared by the lamination and legality machinery.
    pub fn analyze(&self, opts: &AnalysisOptions) -> Result<TrainMapAnalysis, TrainMapError> {
        let strata = self.classify_strata()?;
        let illegal = self.illegal_turns();
        let bcc_certified = self.bcc_certified();
        let bcc_empirical = self
            .bcc_empirical(opts.bcc_samples, opts.bcc_maxlen, opts.seed)
            .max(if self.is_identity_map() { 0 } else { 1 });
        let mut crit_max: f64 = 0.0;
        for info in strata.eg_strata() {
            let lambda = info.pf_eigenvalue.expect("EG stratum has an eigenvalue");
            let c = 2.0 * bcc_empirical as f64 / (lambda - 1.0);
            crit_max = crit_max.max(c);
        }
        let protection_constant = (crit_max.ceil() as usize).max(1);
        Ok(TrainMapAnalysis {
            strata,
            illegal_turns: illegal,
            bcc_certified,
            bcc_empirical,
            protection_constant,
        })
    }

    fn is_identity_map(&self) -> bool {
        self.edge_images
            .iter()
            .enumerate()
            .all(|(i, p)| p.edges() == [OrientedEdge::forward(i)])
    }
}

impl std::fmt::Debug for TopRep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TopRep(")?;
        for (i, e) in self.graph.edge_list().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}↦{}", e.id, self.graph.describe_path(&self.edge_images[i]))?;
        }
        write!(f, ")")
    }
}

/// Per-stratum crossing counts: entry `(i, j)` is the number of times the
/// tightened image of edge `j` crosses edge `i` in either direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub stratum: usize,
    pub dim: usize,
    pub entries: Vec<u64>,
    pub edge_ids: Vec<String>,
}

impl TransitionMatrix {
    pub fn from_rows(stratum: usize, rows: &[&[u64]]) -> Self {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim);
            entries.extend_from_slice(row);
        }
        TransitionMatrix {
            stratum,
            dim,
            entries,
            edge_ids: (0..dim).map(|i| format!("e{i}")).collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.dim + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// Irreducibility as strong connectivity of the crossing digraph.
    pub fn is_irreducible(&self) -> bool {
        if self.dim == 0 {
            return false;
        }
        if self.dim == 1 {
            return self.entries[0] > 0;
        }
        let forward = |i: usize| {
            (0..self.dim)
                .filter(move |&j| self.get(j, i) > 0)
                .collect::<Vec<_>>()
        };
        let backward = |i: usize| {
            (0..self.dim)
                .filter(move |&j| self.get(i, j) > 0)
                .collect::<Vec<_>>()
        };
        for neighbors in [&forward as &dyn Fn(usize) -> Vec<usize>, &backward] {
            let mut reach = vec![false; self.dim];
            let mut stack = vec![0usize];
            reach[0] = true;
            while let Some(v) = stack.pop() {
                for w in neighbors(v) {
                    if !reach[w] {
                        reach[w] = true;
                        stack.push(w);
                    }
                }
            }
            if reach.iter().any(|&r| !r) {
                return false;
            }
        }
        true
    }
}

/// Perron–Frobenius eigenvalue of an irreducible nonnegative integer matrix
/// via power iteration on `M + I` (the shift makes the matrix primitive, so
/// the iteration converges even for periodic matrices).
pub fn pf_eigenvalue<T: Real>(m: &TransitionMatrix) -> Result<T, TrainMapError> {
    if !m.is_irreducible() {
        return Err(TrainMapError::NotIrreducible);
    }
    let n = m.dim;
    if n == 1 {
        return Ok(T::from_count(m.entries[0]));
    }
    let mut v: Vec<T> = vec![T::one(); n];
    let mut lambda = T::zero();
    let tol = T::epsilon() * T::from_count(64);
    for _ in 0..200_000 {
        let mut w = vec![T::zero(); n];
        for i in 0..n {
            let mut acc = v[i]; // the +I shift
            for j in 0..n {
                acc = acc + T::from_count(m.get(i, j)) * v[j];
            }
            w[i] = acc;
        }
        // Rayleigh quotient of the shifted matrix.
        let num = w.iter().zip(&v).fold(T::zero(), |a, (x, y)| a + *x * *y);
        let den = v.iter().fold(T::zero(), |a, x| a + *x * *x);
        let next = num / den;
        let scale = w.iter().cloned().fold(T::zero(), |a, x| a.max(x));
        for x in &mut w {
            *x = *x / scale;
        }
        v = w;
        if (next - lambda).abs() <= tol * next.abs() {
            return Ok(next - T::one());
        }
        lambda = next;
    }
    Ok(lambda - T::one())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StratumClass {
    Zero,
    Neg,
    Eg,
    /// Nonzero but reducible transition matrix; such a filtration is not in
    /// relative train track form.
    Mixed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StratumInfo {
    pub stratum: usize,
    pub class: StratumClass,
    pub irreducible: bool,
    pub pf_eigenvalue: Option<Scalar>,
    pub edges: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrataReport {
    pub strata: Vec<StratumInfo>,
}

impl StrataReport {
    pub fn eg_strata(&self) -> impl Iterator<Item = &StratumInfo> {
        self.strata
            .iter()
            .filter(|s| matches!(s.class, StratumClass::Eg))
    }

    pub fn stratum(&self, r: usize) -> Option<&StratumInfo> {
        self.strata.iter().find(|s| s.stratum == r)
    }

    /// Minimum EG stretch factor, if any stratum is EG.
    pub fn min_eg_eigenvalue(&self) -> Option<Scalar> {
        self.eg_strata()
            .filter_map(|s| s.pf_eigenvalue)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RttReport {
    pub pass: bool,
    pub legal_image_failures: Vec<String>,
    pub direction_failures: Vec<String>,
    pub connecting_path_failures: Vec<String>,
    pub connecting_bound: usize,
}

#[derive(Debug, Clone)]
pub struct NielsenPath {
    pub path: EdgePath,
    pub period: u32,
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub bcc_samples: usize,
    pub bcc_maxlen: usize,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            bcc_samples: 2_000,
            bcc_maxlen: 8,
            seed: 7,
        }
    }
}

/// Cached dynamical data consumed by the lamination and legality layers.
///
/// `protection_constant` is the integer `C` used for leaf-segment lengths:
/// the ceiling of the largest critical constant computed from the empirical
/// cancellation bound (the certified bound is also carried; see the README
/// for the tradeoff).
#[derive(Debug, Clone)]
pub struct TrainMapAnalysis {
    pub strata: StrataReport,
    pub illegal_turns: BTreeSet<Turn>,
    pub bcc_certified: usize,
    pub bcc_empirical: usize,
    pub protection_constant: usize,
}

/// Edge map keyed by edge id, the JSON wire form of a [`TopRep`].
pub fn edge_map_to_paths(
    graph: &MarkedGraph,
    edge_map: &BTreeMap<String, String>,
) -> Result<Vec<EdgePath>, TrainMapError> {
    let mut images = vec![None; graph.edge_list().len()];
    for (id, image) in edge_map {
        let idx = graph.edge_index(id)?;
        let mut raw = Vec::new();
        if image != "1" {
            for c in image.chars() {
                if c.is_whitespace() {
                    continue;
                }
                let eidx = graph.edge_index(&c.to_ascii_lowercase().to_string())?;
                raw.push(if c.is_lowercase() {
                    OrientedEdge::forward(eidx)
                } else {
                    OrientedEdge::backward(eidx)
                });
            }
        }
        images[idx] = Some(graph.tighten(&raw)?);
    }
    images
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            p.ok_or_else(|| {
                TrainMapError::Malformed(format!(
                    "edge {:?} missing from edge map",
                    graph.edge_list()[i].id
                ))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn f3_gold() -> TopRep {
        TopRep::on_rose(3, &[1, 2, 2], &["a", "bc", "b"], true).unwrap()
    }

    fn f4_twist() -> TopRep {
        TopRep::on_rose(4, &[1, 2, 3, 3], &["a", "b", "cd", "c"], true).unwrap()
    }

    fn identity_rose(rank: usize) -> TopRep {
        let strata: Vec<usize> = (1..=rank).collect();
        let images: Vec<String> = (1..=rank)
            .map(|i| crate::words::Letter::new(i, true).unwrap().to_char().to_string())
            .collect();
        let refs: Vec<&str> = images.iter().map(String::as_str).collect();
        TopRep::on_rose(rank, &strata, &refs, true).unwrap()
    }

    fn circuit(f: &TopRep, w: &str) -> EdgePath {
        f.graph()
            .word_to_circuit(&Word::parse(w).unwrap())
            .unwrap()
    }

    #[test]
    fn validate_f3_gold_and_identity() {
        let report = f3_gold().validate();
        assert!(report.valid, "{:?}", report.violations);
        assert!(identity_rose(3).validate().valid);
    }

    #[test]
    fn validate_catches_non_surjective() {
        // b and c both map into ⟨a,b⟩; c never appears in any image.
        let f = TopRep::on_rose(3, &[1, 2, 2], &["a", "b", "ab"], false).unwrap();
        let report = f.validate();
        assert!(!report.valid);
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("not surjective")));
    }

    #[test]
    fn transition_matrices() {
        let f = f3_gold();
        let m2 = f.transition_matrix(2).unwrap();
        assert_eq!(m2.entries, vec![1, 1, 1, 0]);
        let m1 = f.transition_matrix(1).unwrap();
        assert_eq!(m1.entries, vec![1]);
        let id = identity_rose(3);
        let m = id.transition_matrix(2).unwrap();
        assert_eq!(m.entries, vec![1]);
        assert!(f.transition_matrix(9).is_err());
    }

    #[test]
    fn pf_eigenvalue_examples() {
        let fib = TransitionMatrix::from_rows(1, &[&[1, 1], &[1, 0]]);
        let lambda: f64 = pf_eigenvalue(&fib).unwrap();
        assert!((lambda - 1.618_033_988_749_895).abs() < 1e-9);
        let one = TransitionMatrix::from_rows(1, &[&[1]]);
        assert_eq!(pf_eigenvalue::<f64>(&one).unwrap(), 1.0);
        let two = TransitionMatrix::from_rows(1, &[&[2]]);
        assert_eq!(pf_eigenvalue::<f64>(&two).unwrap(), 2.0);
        // Periodic (permutation) matrix: the +I shift keeps iteration stable.
        let perm = TransitionMatrix::from_rows(1, &[&[0, 1], &[1, 0]]);
        let lam: f64 = pf_eigenvalue(&perm).unwrap();
        assert!((lam - 1.0).abs() < 1e-9);
        // Generic instantiation at f32.
        let lam32: f32 = pf_eigenvalue(&fib).unwrap();
        assert!((lam32 - 1.618_034).abs() < 1e-4);
    }

    #[test]
    fn not_irreducible_is_an_error() {
        let m = TransitionMatrix::from_rows(1, &[&[1, 1], &[0, 1]]);
        assert!(!m.is_irreducible());
        assert_eq!(pf_eigenvalue::<f64>(&m), Err(TrainMapError::NotIrreducible));
    }

    #[test]
    fn strata_classification() {
        let f = f3_gold();
        let report = f.classify_strata().unwrap();
        assert_eq!(report.stratum(1).unwrap().class, StratumClass::Neg);
        assert_eq!(report.stratum(2).unwrap().class, StratumClass::Eg);
        assert!((report.stratum(2).unwrap().pf_eigenvalue.unwrap() - 1.618034).abs() < 1e-5);

        let id = identity_rose(3);
        for s in &id.classify_strata().unwrap().strata {
            assert_eq!(s.class, StratumClass::Neg);
        }

        let tw = f4_twist();
        let report = tw.classify_strata().unwrap();
        assert_eq!(report.stratum(3).unwrap().class, StratumClass::Eg);
        assert!((report.stratum(3).unwrap().pf_eigenvalue.unwrap() - 1.618034).abs() < 1e-5);
    }

    #[test]
    fn turn_classification_f3_gold() {
        let f = f3_gold();
        let g = f.graph();
        let e = |spec: &str| {
            let idx = g.edge_index(&spec.to_ascii_lowercase()).unwrap();
            if spec.chars().next().unwrap().is_lowercase() {
                OrientedEdge::forward(idx)
            } else {
                OrientedEdge::backward(idx)
            }
        };
        let illegal = f.illegal_turns();
        // {b, c}: Tf sends it to {b, b}.
        assert!(illegal.contains(&Turn::new(e("b"), e("c"))));
        // {b̄, c}: the orbit cycles without degenerating.
        assert!(!illegal.contains(&Turn::new(e("B"), e("c"))));
        // Height filter: {b, c} has height 2.
        assert!(f.illegal_turns_up_to(1).is_empty());
        assert!(f.illegal_turns_up_to(2).contains(&Turn::new(e("b"), e("c"))));
    }

    #[test]
    fn iterate_path_examples() {
        let f = f3_gold();
        let cap = IterationCap::default();
        let c = circuit(&f, "c");
        let it3 = f.iterate_path(&c, 3, cap).unwrap();
        assert_eq!(f.graph().describe_path(&it3), "bcb");
        assert_eq!(f.iterate_path(&c, 0, cap).unwrap(), c);
        // Fibonacci lengths from b.
        let b = circuit(&f, "b");
        let mut lens = Vec::new();
        for n in 0..8 {
            lens.push(f.iterate_path(&b, n, cap).unwrap().len());
        }
        assert_eq!(lens, vec![1, 2, 3, 5, 8, 13, 21, 34]);
    }

    #[test]
    fn iterate_cap_guard() {
        let f = f3_gold();
        let b = circuit(&f, "b");
        let err = f.iterate_path(&b, 40, IterationCap(1_000)).unwrap_err();
        assert_eq!(err, TrainMapError::CapExceeded(1_000));
    }

    #[test]
    fn semigroup_property_of_iteration() {
        let f = f3_gold();
        let cap = IterationCap::default();
        for w in ["b", "ab", "bC", "abc"] {
            let p = circuit(&f, w);
            for n in 0..=4u32 {
                for m in 0..=4u32 {
                    let lhs = f.iterate_path(&p, n + m, cap).unwrap();
                    let rhs = f
                        .iterate_path(&f.iterate_path(&p, n, cap).unwrap(), m, cap)
                        .unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn rtt_checks() {
        assert!(f3_gold().check_rtt(6).unwrap().pass);
        assert!(identity_rose(3).check_rtt(6).unwrap().pass);
        assert!(f4_twist().check_rtt(6).unwrap().pass);
        // b ↦ bc, c ↦ b̄: the turn {b̄, c} degenerates under Tf
        // ({b̄,c} → {c̄,b̄} → {b,c̄} → {b,b}) yet f(b) = b·c crosses it.
        let bad = TopRep::on_rose(3, &[1, 2, 2], &["a", "bc", "B"], false).unwrap();
        assert!(bad.validate().valid, "witness map must be an automorphism");
        let report = bad.check_rtt(6).unwrap();
        assert!(!report.pass);
        assert!(!report.legal_image_failures.is_empty());
    }

    #[test]
    fn bcc_bounds() {
        let f = f3_gold();
        assert_eq!(f.bcc_certified(), 4);
        let emp = f.bcc_empirical(2_000, 8, 7);
        assert!(emp <= f.bcc_certified());
        assert_eq!(emp, 1, "F3-GOLD cancels exactly one letter at worst");
        let id = identity_rose(3);
        assert_eq!(id.bcc_empirical(500, 6, 7), 0);
        assert_eq!(id.bcc_certified(), 3);
    }

    #[test]
    fn critical_constants() {
        let f = f3_gold();
        let c: f64 = f.critical_constant(2).unwrap();
        assert!((c - 12.944).abs() < 1e-3);
        assert_eq!(
            f.critical_constant::<f64>(1),
            Err(TrainMapError::NotEg(1))
        );
        // 2B/(3−1) = B on a one-stratum doubling-ish example is covered in
        // the oracle tests; here check the formula's λ=3 shortcut directly.
        let m = TransitionMatrix::from_rows(1, &[&[3]]);
        let lam: f64 = pf_eigenvalue(&m).unwrap();
        assert_eq!(lam, 3.0);
    }

    #[test]
    fn nielsen_search() {
        let f = f3_gold();
        let found = f.find_nielsen_paths(3, 1).unwrap();
        // The fixed edge a is a Nielsen loop (reported in one orientation).
        assert!(found.iter().any(|np| {
            let d = f.graph().describe_path(&np.path);
            (d == "a" || d == "A") && np.period == 1
        }));
        // No height-2 Nielsen path of length ≤ 6.
        let found6 = f.find_nielsen_paths(6, 1).unwrap();
        assert!(found6
            .iter()
            .all(|np| f.graph().height(&np.path).unwrap() == 1));
        // Identity fixes everything.
        let id = identity_rose(2);
        let all = id.find_nielsen_paths(2, 1).unwrap();
        assert!(all.iter().all(|np| np.period == 1));
        assert!(!all.is_empty());
    }

    #[test]
    fn eg_growth_tracks_eigenvalue() {
        let f = f3_gold();
        let lambda = 1.618_033_988_749_895_f64;
        let b = circuit(&f, "b");
        let cap = IterationCap::default();
        let l15 = f
            .iterate_path(&b, 15, cap)
            .unwrap()
            .len() as f64;
        let ratio = l15 / lambda.powi(15);
        // Converges to a positive constant; at n = 15 the ratio test is
        // within 5% of its limit (next term ratio).
        let l16 = f.iterate_path(&b, 16, cap).unwrap().len() as f64;
        assert!((l16 / l15 - lambda).abs() / lambda < 0.05);
        assert!(ratio > 0.1 && ratio < 10.0);
    }

    #[test]
    fn analysis_bundle() {
        let f = f3_gold();
        let a = f.analyze(&AnalysisOptions::default()).unwrap();
        assert_eq!(a.bcc_certified, 4);
        assert_eq!(a.bcc_empirical, 1);
        // C = ceil(2·1/(λ−1)) = ceil(3.236) = 4.
        assert_eq!(a.protection_constant, 4);
    }
}
