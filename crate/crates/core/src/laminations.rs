//! Finite approximations of attracting and repelling laminations:
//! generic-leaf segments, attracting neighborhoods `V±`, the
//! weak-attraction trichotomy, admissibility checking, nonattracting
//! subgroup systems and their sink.
//!
//! The attraction machinery works on rose-marked graphs, where edge paths
//! and reduced words coincide; a generic leaf is approximated by iterating a
//! single edge of its stratum, and every verdict is scoped by the depth and
//! segment-length parameters recorded in the reports.

use crate::markedgraph::{EdgePath, MarkedGraph};
use crate::stallings::{StallingsError, SubgroupSystem};
use crate::trainmap::{
    AnalysisOptions, IterationCap, StratumClass, TopRep, TrainMapAnalysis, TrainMapError,
};
use crate::words::{BasisAutomorphism, ConjugacyClass, Word, WordError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaminationError {
    #[error("graph is not a rose with identity marking")]
    NotRose,
    #[error("iterate length exceeded the cap")]
    CapExceeded,
    #[error("neighborhood has no defining segments")]
    EmptyNeighborhood,
    #[error("every exponentially growing leaf is carried by the system")]
    EmptyLaminationSet,
    #[error("V+ and V- could not be separated: {plus:?} overlaps {minus:?}")]
    DisjointnessFailed { plus: Word, minus: Word },
    #[error("stratum {0} is not exponentially growing")]
    NotEg(usize),
    #[error("candidate system carries a class attracted to the lamination: {0}")]
    VerificationFailed(ConjugacyClass),
    #[error(transparent)]
    Train(#[from] TrainMapError),
    #[error(transparent)]
    Stallings(#[from] StallingsError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Require the rose shape the attraction machinery depends on.
pub fn require_rose(g: &MarkedGraph) -> Result<(), LaminationError> {
    let rose = g.vertex_count() == 1
        && g.tree_edges().is_empty()
        && g.basis_assignment().len() == g.edge_list().len()
        && g.basis_assignment()
            .values()
            .all(|w| w.len() == 1 && w.letters()[0].is_positive());
    if rose {
        Ok(())
    } else {
        Err(LaminationError::NotRose)
    }
}

fn stratum_of_letter(g: &MarkedGraph, l: crate::words::Letter) -> usize {
    g.edge_list()[l.index() - 1].stratum
}

/// A topological representative bundled with its cached analysis and the
/// outer automorphism it induces through the marking.
#[derive(Debug, Clone)]
pub struct AutomorphismData {
    pub rep: TopRep,
    pub analysis: TrainMapAnalysis,
    pub aut: BasisAutomorphism,
}

impl AutomorphismData {
    pub fn build(rep: TopRep, opts: &AnalysisOptions) -> Result<Self, LaminationError> {
        require_rose(rep.graph())?;
        let analysis = rep.analyze(opts)?;
        let aut = rep.induced_automorphism()?;
        Ok(AutomorphismData { rep, analysis, aut })
    }

    pub fn rank(&self) -> usize {
        self.rep.graph().rank()
    }

    /// EG strata indices.
    pub fn eg_strata(&self) -> Vec<usize> {
        self.analysis
            .strata
            .eg_strata()
            .map(|s| s.stratum)
            .collect()
    }
}

/// Depth-limited generic leaf data for one EG stratum: one deep iterate of a
/// seed edge, from which all segments are sliced centrally (so shorter
/// segments nest inside longer ones by construction).
#[derive(Debug, Clone)]
pub struct LeafFamily {
    pub stratum: usize,
    pub seed: Word,
    pub depth: u32,
    pub word: Word,
}

#[derive(Debug, Clone, Copy)]
pub struct LeafOptions {
    pub min_length: usize,
    pub max_depth: u32,
    pub cap: IterationCap,
}

impl Default for LeafOptions {
    fn default() -> Self {
        LeafOptions {
            min_length: 4096,
            max_depth: 48,
            cap: IterationCap::default(),
        }
    }
}

impl LeafFamily {
    /// Iterate the first edge of `H_r` until the tightened image is at
    /// least `min_length` long (or the depth bound is hit).
    pub fn build(f: &TopRep, r: usize, opts: &LeafOptions) -> Result<LeafFamily, LaminationError> {
        require_rose(f.graph())?;
        let edges = f.graph().stratum_edges(r);
        let e = *edges.first().ok_or(TrainMapError::BadStratum(r))?;
        let seed_path =
            EdgePath::from_parts(vec![crate::markedgraph::OrientedEdge::forward(e)], false);
        let seed = f.graph().path_to_word(&seed_path);
        let mut cur = seed_path;
        let mut depth = 0;
        while cur.len() < opts.min_length && depth < opts.max_depth {
            let next = f.map_path(&cur, opts.cap)?;
            if next.len() <= cur.len() && depth > 2 {
                break; // not growing
            }
            cur = next;
            depth += 1;
        }
        Ok(LeafFamily {
            stratum: r,
            seed,
            depth,
            word: f.graph().path_to_word(&cur),
        })
    }

    /// Central subword whose `H_r`-length is at least `target`; `None` when
    /// the whole leaf word is too short.
    pub fn central_segment(&self, g: &MarkedGraph, target_hr: usize) -> Option<Word> {
        let letters = self.word.letters();
        let n = letters.len();
        if n == 0 || target_hr == 0 {
            return None;
        }
        let mut lo = n / 2;
        let mut hi = n / 2;
        let mut count = 0usize;
        while count < target_hr {
            let grew = if hi < n {
                if stratum_of_letter(g, letters[hi]) == self.stratum {
                    count += 1;
                }
                hi += 1;
                true
            } else {
                false
            };
            if count >= target_hr {
                break;
            }
            if lo > 0 {
                lo -= 1;
                if stratum_of_letter(g, letters[lo]) == self.stratum {
                    count += 1;
                }
            } else if !grew {
                return None;
            }
        }
        Some(Word::reduce(letters[lo..hi].iter().copied()))
    }
}

/// Standalone leaf-segment extraction: iterate an `H_r` edge until the
/// image has at least `2L+1` edges, then return the central `L`.
pub fn leaf_segment(
    f: &TopRep,
    r: usize,
    l: usize,
    cap: IterationCap,
) -> Result<Word, LaminationError> {
    require_rose(f.graph())?;
    let edges = f.graph().stratum_edges(r);
    let e = *edges.first().ok_or(TrainMapError::BadStratum(r))?;
    let mut cur = EdgePath::from_parts(vec![crate::markedgraph::OrientedEdge::forward(e)], false);
    let mut guard = 0;
    while cur.len() < 2 * l + 1 {
        let next = f.map_path(&cur, cap)?;
        if next.len() <= cur.len() {
            guard += 1;
            if guard > 4 {
                return Err(LaminationError::NotEg(r));
            }
        }
        cur = next;
    }
    let w = f.graph().path_to_word(&cur);
    let start = (w.len() - l) / 2;
    Ok(Word::reduce(w.letters()[start..start + l].iter().copied()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Plus,
    Minus,
}

/// An attracting (or repelling) neighborhood: a finite set of defining leaf
/// segments, one or more per uncarried EG stratum. A path or circuit lies in
/// the neighborhood when it contains a defining segment or its inverse.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Neighborhood {
    pub polarity: Polarity,
    pub segments: Vec<Word>,
}

fn contains_linear(hay: &Word, needle: &Word) -> bool {
    hay.contains_subword(needle) || hay.contains_subword(&needle.inverse())
}

/// Containment in the periodic bi-infinite word spanned by a circuit.
fn contains_cyclic(cycle: &Word, needle: &Word) -> bool {
    let (core, _) = cycle.cyclic_reduce();
    if core.is_identity() {
        return needle.is_identity();
    }
    let copies = needle.len() / core.len() + 2;
    let mut letters = Vec::with_capacity(core.len() * copies);
    for _ in 0..copies {
        letters.extend(core.letters().iter().copied());
    }
    contains_windows(&letters, needle) || contains_windows(&letters, &needle.inverse())
}

fn contains_windows(letters: &[crate::words::Letter], needle: &Word) -> bool {
    if needle.len() == 0 {
        return true;
    }
    if needle.len() > letters.len() {
        return false;
    }
    letters
        .windows(needle.len())
        .any(|win| win == needle.letters())
}

impl Neighborhood {
    /// Containment of a word (`cyclic` for circuits / conjugacy classes).
    pub fn contains_word(&self, w: &Word, cyclic: bool) -> Result<bool, LaminationError> {
        if self.segments.is_empty() {
            return Err(LaminationError::EmptyNeighborhood);
        }
        Ok(self.segments.iter().any(|seg| {
            if cyclic {
                contains_cyclic(w, seg)
            } else {
                contains_linear(w, seg)
            }
        }))
    }

    pub fn contains_class(&self, c: &ConjugacyClass) -> Result<bool, LaminationError> {
        self.contains_word(c.rep(), true)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NeighborhoodOptions {
    pub max_doublings: u32,
    pub leaf: LeafOptions,
}

impl Default for NeighborhoodOptions {
    fn default() -> Self {
        NeighborhoodOptions {
            max_doublings: 4,
            leaf: LeafOptions::default(),
        }
    }
}

/// Is a leaf family carried by `K`? Tested by lifting a long central
/// segment to the Stallings graphs (readable anywhere in some component).
fn leaf_carried_by(k: &SubgroupSystem, family: &LeafFamily, g: &MarkedGraph, len: usize) -> bool {
    let probe = family
        .central_segment(g, len)
        .unwrap_or_else(|| family.word.clone());
    k.components()
        .iter()
        .any(|c| c.readable_anywhere(probe.letters()))
}

/// Build `(V⁺, V⁻)` from the EG strata of `fwd` and `bwd` whose leaves are
/// not carried by `K`, with defining segments of `H_r`-length at least `2C`,
/// doubling segment lengths until neither side's segments occur inside the
/// other's.
pub fn build_neighborhoods(
    fwd: &AutomorphismData,
    bwd: &AutomorphismData,
    k: &SubgroupSystem,
    opts: &NeighborhoodOptions,
) -> Result<(Neighborhood, Neighborhood), LaminationError> {
    let c = fwd
        .analysis
        .protection_constant
        .max(bwd.analysis.protection_constant);
    let mut target = 2 * c;
    for _ in 0..=opts.max_doublings {
        let plus = gather_segments(fwd, k, target, &opts.leaf)?;
        let minus = gather_segments(bwd, k, target, &opts.leaf)?;
        if plus.is_empty() && minus.is_empty() {
            return Err(LaminationError::EmptyLaminationSet);
        }
        match first_overlap(&plus, &minus) {
            None => {
                return Ok((
                    Neighborhood {
                        polarity: Polarity::Plus,
                        segments: plus,
                    },
                    Neighborhood {
                        polarity: Polarity::Minus,
                        segments: minus,
                    },
                ))
            }
            Some(_) => target *= 2,
        }
    }
    let plus = gather_segments(fwd, k, target, &opts.leaf)?;
    let minus = gather_segments(bwd, k, target, &opts.leaf)?;
    let (p, m) = first_overlap(&plus, &minus).expect("loop exits only on overlap");
    Err(LaminationError::DisjointnessFailed { plus: p, minus: m })
}

fn gather_segments(
    data: &AutomorphismData,
    k: &SubgroupSystem,
    target: usize,
    leaf_opts: &LeafOptions,
) -> Result<Vec<Word>, LaminationError> {
    let g = data.rep.graph();
    let mut segments = Vec::new();
    for r in data.eg_strata() {
        let family = LeafFamily::build(&data.rep, r, leaf_opts)?;
        if leaf_carried_by(k, &family, g, target) {
            continue;
        }
        if let Some(seg) = family.central_segment(g, target) {
            segments.push(seg);
        }
    }
    Ok(segments)
}

fn first_overlap(plus: &[Word], minus: &[Word]) -> Option<(Word, Word)> {
    for p in plus {
        for m in minus {
            if contains_linear(p, m) || contains_linear(m, p) {
                return Some((p.clone(), m.clone()));
            }
        }
    }
    None
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationSample {
    pub n: u32,
    pub forward_len: usize,
    pub backward_len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum WeakAttraction {
    CarriedByK,
    AttractedPlus { n: u32 },
    AttractedMinus { n: u32 },
    Inconclusive { trace: Vec<IterationSample> },
}

impl WeakAttraction {
    pub fn is_attracted(&self) -> bool {
        matches!(
            self,
            WeakAttraction::AttractedPlus { .. } | WeakAttraction::AttractedMinus { .. }
        )
    }
}

/// The weak-attraction trichotomy for a conjugacy class: carried by `K`,
/// attracted into `V⁺` under forward iteration, attracted into `V⁻` under
/// the inverse, or inconclusive within `maxiter`.
pub fn weak_attraction_test(
    fwd: &AutomorphismData,
    bwd: &AutomorphismData,
    k: &SubgroupSystem,
    v_plus: &Neighborhood,
    v_minus: &Neighborhood,
    class: &ConjugacyClass,
    maxiter: u32,
) -> Result<WeakAttraction, LaminationError> {
    if class.is_trivial() {
        return Err(StallingsError::TrivialClass.into());
    }
    if !k.is_empty() && k.carries_conjugacy(class)? {
        return Ok(WeakAttraction::CarriedByK);
    }
    let mut forward = class.clone();
    let mut backward = class.clone();
    let mut trace = Vec::new();
    for n in 0..=maxiter {
        if !v_plus.segments.is_empty() && v_plus.contains_class(&forward)? {
            return Ok(WeakAttraction::AttractedPlus { n });
        }
        if !v_minus.segments.is_empty() && v_minus.contains_class(&backward)? {
            return Ok(WeakAttraction::AttractedMinus { n });
        }
        trace.push(IterationSample {
            n,
            forward_len: forward.len(),
            backward_len: backward.len(),
        });
        forward = forward.apply(&fwd.aut)?;
        backward = backward.apply(&bwd.aut)?;
    }
    Ok(WeakAttraction::Inconclusive { trace })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleParams {
    pub maxlen: usize,
    pub maxiter: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaItem {
    pub item: u8,
    pub name: String,
    pub pass: bool,
    pub empirical: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub all_pass: bool,
    pub items: Vec<SaItem>,
    pub params: SampleParams,
}

/// Check the five admissibility conditions for `K` against `φ` (given by
/// forward and inverse representatives). Items 2 and 5 are empirical: they
/// are verified on finite leaf segments and a finite conjugacy-class sample.
pub fn check_admissible(
    fwd: &AutomorphismData,
    bwd: &AutomorphismData,
    k: &SubgroupSystem,
    params: &SampleParams,
    opts: &NeighborhoodOptions,
) -> Result<AdmissibilityReport, LaminationError> {
    let mut items = Vec::new();

    let mal = k.is_malnormal();
    items.push(SaItem {
        item: 1,
        name: "malnormal".into(),
        pass: mal.malnormal,
        empirical: false,
        detail: match &mal.witness {
            None => "no conjugate overlap among components".into(),
            Some(w) => format!(
                "K_{}^x ∩ K_{} nontrivial for x = {} (element {})",
                w.s, w.t, w.conjugator, w.element
            ),
        },
    });

    let c = fwd
        .analysis
        .protection_constant
        .max(bwd.analysis.protection_constant);
    let plus_uncarried = uncarried_strata(fwd, k, 2 * c, &opts.leaf)?;
    let minus_uncarried = uncarried_strata(bwd, k, 2 * c, &opts.leaf)?;
    items.push(SaItem {
        item: 2,
        name: "uncarried laminations on both sides".into(),
        pass: !plus_uncarried.is_empty() && !minus_uncarried.is_empty(),
        empirical: true,
        detail: format!(
            "uncarried EG strata: forward {:?}, inverse {:?} (segments of length {} probed)",
            plus_uncarried,
            minus_uncarried,
            2 * c
        ),
    });

    let inv = k.invariance(&fwd.aut)?;
    items.push(SaItem {
        item: 3,
        name: "system invariant under the automorphism".into(),
        pass: inv.invariant,
        empirical: false,
        detail: match inv.failed_component {
            None => "component set preserved up to conjugacy".into(),
            Some(i) => format!("component {i} is not preserved"),
        },
    });

    let nbhd = build_neighborhoods(fwd, bwd, k, opts);
    let (sa4_pass, sa4_detail, neighborhoods) = match nbhd {
        Ok((vp, vm)) => (
            true,
            format!(
                "V+ ({} segments) and V- ({} segments) disjoint",
                vp.segments.len(),
                vm.segments.len()
            ),
            Some((vp, vm)),
        ),
        Err(LaminationError::EmptyLaminationSet) => (
            false,
            "no uncarried leaf segments to build neighborhoods from".into(),
            None,
        ),
        Err(LaminationError::DisjointnessFailed { plus, minus }) => (
            false,
            format!("segments overlap after doubling limit: {plus} vs {minus}"),
            None,
        ),
        Err(e) => return Err(e),
    };
    items.push(SaItem {
        item: 4,
        name: "disjoint attracting neighborhoods".into(),
        pass: sa4_pass,
        empirical: false,
        detail: sa4_detail,
    });

    let (sa5_pass, sa5_detail) = match &neighborhoods {
        None => (
            false,
            "skipped: no neighborhoods (SA(4) unavailable)".to_string(),
        ),
        Some((vp, vm)) => {
            let mut witnesses = Vec::new();
            let mut tested = 0usize;
            for class in crate::words::classes_up_to(fwd.rank(), params.maxlen) {
                let outcome = weak_attraction_test(fwd, bwd, k, vp, vm, &class, params.maxiter)?;
                match outcome {
                    WeakAttraction::CarriedByK => {}
                    WeakAttraction::AttractedPlus { .. }
                    | WeakAttraction::AttractedMinus { .. } => tested += 1,
                    WeakAttraction::Inconclusive { .. } => {
                        if witnesses.len() < 10 {
                            witnesses.push(class.to_string());
                        }
                    }
                }
            }
            if witnesses.is_empty() {
                (
                    true,
                    format!(
                        "all {tested} uncarried classes of length ≤ {} attracted within {} iterations",
                        params.maxlen, params.maxiter
                    ),
                )
            } else {
                (
                    false,
                    format!(
                        "classes neither carried nor attracted within {} iterations: {}",
                        params.maxiter,
                        witnesses.join(", ")
                    ),
                )
            }
        }
    };
    items.push(SaItem {
        item: 5,
        name: "total attraction off the system".into(),
        pass: sa5_pass,
        empirical: true,
        detail: sa5_detail,
    });

    Ok(AdmissibilityReport {
        all_pass: items.iter().all(|i| i.pass),
        items,
        params: params.clone(),
    })
}

fn uncarried_strata(
    data: &AutomorphismData,
    k: &SubgroupSystem,
    seg_len: usize,
    leaf_opts: &LeafOptions,
) -> Result<Vec<usize>, LaminationError> {
    let mut out = Vec::new();
    for r in data.eg_strata() {
        let family = LeafFamily::build(&data.rep, r, leaf_opts)?;
        if !leaf_carried_by(k, &family, data.rep.graph(), seg_len) {
            out.push(r);
        }
    }
    Ok(out)
}

/// How a nonattracting system is obtained.
#[derive(Debug, Clone)]
pub enum NonattractingMode {
    /// Trust a user-supplied system (after the empirical verification).
    Supplied(SubgroupSystem),
    /// Build from the non-`H_r`, non-zero-stratum subgraph plus closed
    /// Nielsen loops of height `r`.
    Heuristic,
}

#[derive(Debug, Clone, Copy)]
pub struct NonattractingOptions {
    pub verify_maxlen: usize,
    pub verify_maxiter: u32,
    pub nielsen_len: usize,
    pub leaf: LeafOptions,
}

impl Default for NonattractingOptions {
    fn default() -> Self {
        NonattractingOptions {
            verify_maxlen: 4,
            verify_maxiter: 20,
            nielsen_len: 8,
            leaf: LeafOptions::default(),
        }
    }
}

/// The nonattracting subgroup system of the stratum-`r` lamination.
///
/// The heuristic follows the nongeometric recipe (components of the
/// complementary subgraph) augmented by closed height-`r` Nielsen loops
/// (the geometric-case generator); either way the candidate is verified
/// empirically: no carried class up to the bound may be attracted to the
/// stratum-`r` leaf.
pub fn nonattracting_system(
    data: &AutomorphismData,
    r: usize,
    mode: NonattractingMode,
    opts: &NonattractingOptions,
) -> Result<SubgroupSystem, LaminationError> {
    let strata = &data.analysis.strata;
    let info = strata.stratum(r).ok_or(TrainMapError::BadStratum(r))?;
    if info.class != StratumClass::Eg {
        return Err(LaminationError::NotEg(r));
    }
    let candidate = match mode {
        NonattractingMode::Supplied(s) => s,
        NonattractingMode::Heuristic => {
            let g = data.rep.graph();
            let mut lists: Vec<Vec<Word>> = Vec::new();
            // On a rose the complementary subgraph has a single component
            // whose loops are the non-H_r, non-zero letters.
            let mut gens = Vec::new();
            for (i, e) in g.edge_list().iter().enumerate() {
                if e.stratum == r {
                    continue;
                }
                if strata.stratum(e.stratum).map(|s| s.class) == Some(StratumClass::Zero) {
                    continue;
                }
                gens.push(Word::generator(i + 1)?);
            }
            if !gens.is_empty() {
                lists.push(gens);
            }
            for np in data.rep.find_nielsen_paths(opts.nielsen_len, 1)? {
                if g.height(&np.path).unwrap_or(0) != r {
                    continue;
                }
                let closed = match (np.path.edges().first(), np.path.edges().last()) {
                    (Some(&f0), Some(&l0)) => g.origin(f0) == g.terminus(l0),
                    _ => false,
                };
                if !closed {
                    continue;
                }
                let w = g.path_to_word(&np.path);
                if !w.is_identity() {
                    lists.push(vec![w]);
                }
            }
            if lists.is_empty() {
                SubgroupSystem::empty(data.rank())
            } else {
                SubgroupSystem::from_generator_lists(data.rank(), &lists)?
            }
        }
    };
    // Verification: no carried class may be attracted to the stratum-r leaf.
    let family = LeafFamily::build(&data.rep, r, &opts.leaf)?;
    let target = 2 * data.analysis.protection_constant;
    let Some(seg) = family.central_segment(data.rep.graph(), target) else {
        return Ok(candidate);
    };
    let v_r = Neighborhood {
        polarity: Polarity::Plus,
        segments: vec![seg],
    };
    for class in crate::words::classes_up_to(data.rank(), opts.verify_maxlen) {
        if candidate.is_empty() || !candidate.carries_conjugacy(&class)? {
            continue;
        }
        let mut cur = class.clone();
        for _ in 0..=opts.verify_maxiter {
            if v_r.contains_class(&cur)? {
                return Err(LaminationError::VerificationFailed(class));
            }
            cur = cur.apply(&data.aut)?;
        }
    }
    Ok(candidate)
}

/// The nonattracting sink: the meet of the nonattracting systems over all
/// EG strata; the whole group when nothing grows exponentially.
pub fn sink(
    data: &AutomorphismData,
    supplied: Option<&BTreeMap<usize, SubgroupSystem>>,
    opts: &NonattractingOptions,
) -> Result<SubgroupSystem, LaminationError> {
    let eg = data.eg_strata();
    if eg.is_empty() {
        return Ok(SubgroupSystem::whole_group(data.rank()));
    }
    let mut acc: Option<SubgroupSystem> = None;
    for r in eg {
        let mode = match supplied.and_then(|m| m.get(&r)) {
            Some(s) => NonattractingMode::Supplied(s.clone()),
            None => NonattractingMode::Heuristic,
        };
        let system = nonattracting_system(data, r, mode, opts)?;
        acc = Some(match acc {
            None => system,
            Some(prev) => prev.meet(&system),
        });
    }
    Ok(acc.expect("at least one EG stratum"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub independent: bool,
    /// A common leaf subword of length ≥ the threshold, when found.
    pub witness: Option<Word>,
    pub segment_threshold: usize,
    pub depth: u32,
}

/// Finite-proxy independence test: the two automorphisms share no common
/// leaf subsegment of length ≥ `threshold` among the uncarried lamination
/// families of either polarity. A `false` verdict carries a witness; `true`
/// means "no obstruction found to the given depth".
pub fn independence_test(
    first: (&AutomorphismData, &AutomorphismData),
    second: (&AutomorphismData, &AutomorphismData),
    k: &SubgroupSystem,
    threshold: usize,
    depth: u32,
) -> Result<IndependenceReport, LaminationError> {
    let leaf_opts = LeafOptions {
        max_depth: depth,
        ..LeafOptions::default()
    };
    let words_i = lamination_words(first, k, threshold, &leaf_opts)?;
    let words_j = lamination_words(second, k, threshold, &leaf_opts)?;
    for wi in &words_i {
        for wj in &words_j {
            let hit = common_subword(wi, wj, threshold)
                .or_else(|| common_subword(wi, &wj.inverse(), threshold));
            if let Some(common) = hit {
                return Ok(IndependenceReport {
                    independent: false,
                    witness: Some(common),
                    segment_threshold: threshold,
                    depth,
                });
            }
        }
    }
    Ok(IndependenceReport {
        independent: true,
        witness: None,
        segment_threshold: threshold,
        depth,
    })
}

fn lamination_words(
    pair: (&AutomorphismData, &AutomorphismData),
    k: &SubgroupSystem,
    seg_len: usize,
    leaf_opts: &LeafOptions,
) -> Result<Vec<Word>, LaminationError> {
    let mut out = Vec::new();
    for data in [pair.0, pair.1] {
        for r in data.eg_strata() {
            let family = LeafFamily::build(&data.rep, r, leaf_opts)?;
            if k.is_empty() || !leaf_carried_by(k, &family, data.rep.graph(), seg_len) {
                out.push(family.word.clone());
            }
        }
    }
    Ok(out)
}

/// First common subword of exactly `len` letters, if any.
fn common_subword(a: &Word, b: &Word, len: usize) -> Option<Word> {
    if len == 0 || a.len() < len || b.len() < len {
        return None;
    }
    let grams: std::collections::HashSet<&[crate::words::Letter]> =
        a.letters().windows(len).collect();
    b.letters()
        .windows(len)
        .find(|w| grams.contains(*w))
        .map(|w| Word::reduce(w.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3_gold_pair() -> (AutomorphismData, AutomorphismData) {
        let f = TopRep::on_rose(3, &[1, 2, 2], &["a", "bc", "b"], true).unwrap();
        let fi = TopRep::on_rose(3, &[1, 2, 2], &["a", "c", "Cb"], true).unwrap();
        let opts = AnalysisOptions::default();
        (
            AutomorphismData::build(f, &opts).unwrap(),
            AutomorphismData::build(fi, &opts).unwrap(),
        )
    }

    fn sys_a() -> SubgroupSystem {
        SubgroupSystem::from_generator_lists(3, &[vec![Word::parse("a").unwrap()]]).unwrap()
    }

    #[test]
    fn leaf_segment_examples() {
        let (fwd, _) = f3_gold_pair();
        let cap = IterationCap::default();
        let seg = leaf_segment(&fwd.rep, 2, 5, cap).unwrap();
        assert_eq!(seg.len(), 5);
        // Central 5 of f⁵(b) = bcbbcbcbbcbbc.
        assert_eq!(seg, Word::parse("cbcbb").unwrap());
        let one = leaf_segment(&fwd.rep, 2, 1, cap).unwrap();
        assert_eq!(one.len(), 1);
        // Segments are factors of the deep leaf word.
        let family = LeafFamily::build(&fwd.rep, 2, &LeafOptions::default()).unwrap();
        assert!(family.word.contains_subword(&seg));
        let seg10 = leaf_segment(&fwd.rep, 2, 10, cap).unwrap();
        assert!(family.word.contains_subword(&seg10));
    }

    #[test]
    fn central_segments_nest() {
        let (fwd, _) = f3_gold_pair();
        let family = LeafFamily::build(&fwd.rep, 2, &LeafOptions::default()).unwrap();
        let g = fwd.rep.graph();
        let s8 = family.central_segment(g, 8).unwrap();
        let s16 = family.central_segment(g, 16).unwrap();
        assert!(s16.contains_subword(&s8));
    }

    #[test]
    fn neighborhoods_for_f3_gold() {
        let (fwd, bwd) = f3_gold_pair();
        let (vp, vm) =
            build_neighborhoods(&fwd, &bwd, &sys_a(), &NeighborhoodOptions::default()).unwrap();
        assert_eq!(vp.segments.len(), 1);
        assert_eq!(vm.segments.len(), 1);
        // Defining segment itself is contained.
        assert!(vp.contains_word(&vp.segments[0], false).unwrap());
        // a-power circuits have no H2 letters at all.
        let ak = ConjugacyClass::of(&Word::parse("aaaa").unwrap());
        assert!(!vp.contains_class(&ak).unwrap());
        // Segment-level disjointness both ways.
        assert!(!vp.contains_word(&vm.segments[0], false).unwrap());
        assert!(!vm.contains_word(&vp.segments[0], false).unwrap());
    }

    #[test]
    fn whole_group_system_kills_laminations() {
        let (fwd, bwd) = f3_gold_pair();
        let whole = SubgroupSystem::whole_group(3);
        let err =
            build_neighborhoods(&fwd, &bwd, &whole, &NeighborhoodOptions::default()).unwrap_err();
        assert_eq!(err, LaminationError::EmptyLaminationSet);
    }

    #[test]
    fn weak_attraction_trichotomy() {
        let (fwd, bwd) = f3_gold_pair();
        let k = sys_a();
        let (vp, vm) =
            build_neighborhoods(&fwd, &bwd, &k, &NeighborhoodOptions::default()).unwrap();
        let run = |w: &str| {
            weak_attraction_test(
                &fwd,
                &bwd,
                &k,
                &vp,
                &vm,
                &ConjugacyClass::of(&Word::parse(w).unwrap()),
                20,
            )
            .unwrap()
        };
        assert!(matches!(run("aaaaa"), WeakAttraction::CarriedByK));
        match run("b") {
            WeakAttraction::AttractedPlus { n } => assert!(n <= 10),
            other => panic!("expected plus attraction, got {other:?}"),
        }
        assert!(run("ab").is_attracted());
    }

    #[test]
    fn forward_containment_is_monotone_once_true() {
        let (fwd, bwd) = f3_gold_pair();
        let k = sys_a();
        let (vp, _) = build_neighborhoods(&fwd, &bwd, &k, &NeighborhoodOptions::default()).unwrap();
        for w in ["b", "ab", "bc", "bC"] {
            let mut cur = ConjugacyClass::of(&Word::parse(w).unwrap());
            let mut inside = false;
            for _ in 0..=16 {
                let now = vp.contains_class(&cur).unwrap();
                if inside {
                    assert!(now, "containment must persist for {w}");
                }
                inside = now;
                cur = cur.apply(&fwd.aut).unwrap();
            }
            assert!(inside);
        }
    }

    #[test]
    fn admissibility_f3_gold_bare_system() {
        // {[⟨a⟩]} satisfies SA(1)-(4) but not SA(5): the boundary class
        // [bcBC] of the geometric stratum is periodic (φ[b,c] = [c,b]), so
        // it is neither carried nor ever attracted.
        let (fwd, bwd) = f3_gold_pair();
        let report = check_admissible(
            &fwd,
            &bwd,
            &sys_a(),
            &SampleParams {
                maxlen: 4,
                maxiter: 20,
            },
            &NeighborhoodOptions::default(),
        )
        .unwrap();
        assert!(report.items[0].pass);
        assert!(report.items[1].pass);
        assert!(report.items[2].pass);
        assert!(report.items[3].pass);
        assert!(!report.items[4].pass);
        assert!(report.items[4].detail.contains("[bcBC]"), "{report:?}");
        assert!(report.items[1].empirical && report.items[4].empirical);
        // At sample length ≤ 3 the boundary class is invisible and the
        // empirical check passes.
        let short = check_admissible(
            &fwd,
            &bwd,
            &sys_a(),
            &SampleParams {
                maxlen: 3,
                maxiter: 20,
            },
            &NeighborhoodOptions::default(),
        )
        .unwrap();
        assert!(short.all_pass, "{short:?}");
    }

    fn sys_a_boundary() -> SubgroupSystem {
        SubgroupSystem::from_generator_lists(
            3,
            &[
                vec![Word::parse("a").unwrap()],
                vec![Word::parse("bcBC").unwrap()],
            ],
        )
        .unwrap()
    }

    #[test]
    fn admissibility_f3_gold_with_boundary_class() {
        // Adding the boundary cyclic group [⟨bcBC⟩] yields a system passing
        // all five conditions at sample length 4.
        let (fwd, bwd) = f3_gold_pair();
        let report = check_admissible(
            &fwd,
            &bwd,
            &sys_a_boundary(),
            &SampleParams {
                maxlen: 4,
                maxiter: 20,
            },
            &NeighborhoodOptions::default(),
        )
        .unwrap();
        assert!(report.all_pass, "{report:?}");
    }

    #[test]
    fn admissibility_whole_group_fails_sa2() {
        let (fwd, bwd) = f3_gold_pair();
        let report = check_admissible(
            &fwd,
            &bwd,
            &SubgroupSystem::whole_group(3),
            &SampleParams {
                maxlen: 3,
                maxiter: 10,
            },
            &NeighborhoodOptions::default(),
        )
        .unwrap();
        assert!(!report.all_pass);
        assert!(!report.items[1].pass, "SA(2) must fail");
    }

    #[test]
    fn nonattracting_heuristic_f3_gold() {
        let (fwd, _) = f3_gold_pair();
        let s = nonattracting_system(
            &fwd,
            2,
            NonattractingMode::Heuristic,
            &NonattractingOptions::default(),
        )
        .unwrap();
        assert_eq!(s, sys_a());
    }

    #[test]
    fn nonattracting_rejects_bad_supplied() {
        let (fwd, _) = f3_gold_pair();
        // ⟨b⟩ carries [b], which is attracted to the stratum-2 lamination.
        let bad =
            SubgroupSystem::from_generator_lists(3, &[vec![Word::parse("b").unwrap()]]).unwrap();
        let err = nonattracting_system(
            &fwd,
            2,
            NonattractingMode::Supplied(bad),
            &NonattractingOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, LaminationError::VerificationFailed(_)));
    }

    #[test]
    fn sink_f3_gold() {
        let (fwd, _) = f3_gold_pair();
        let s = sink(&fwd, None, &NonattractingOptions::default()).unwrap();
        assert_eq!(s, sys_a());
        assert!(s.is_malnormal().malnormal);
    }

    #[test]
    fn sink_of_identity_is_whole_group() {
        let id = TopRep::on_rose(3, &[1, 2, 3], &["a", "b", "c"], true).unwrap();
        let data = AutomorphismData::build(id, &AnalysisOptions::default()).unwrap();
        let s = sink(&data, None, &NonattractingOptions::default()).unwrap();
        assert_eq!(s, SubgroupSystem::whole_group(3));
    }

    #[test]
    fn independence_self_and_inverse_fail() {
        let (fwd, bwd) = f3_gold_pair();
        let k = sys_a();
        let self_report = independence_test((&fwd, &bwd), (&fwd, &bwd), &k, 40, 12).unwrap();
        assert!(!self_report.independent);
        let inv_report = independence_test((&fwd, &bwd), (&bwd, &fwd), &k, 40, 12).unwrap();
        assert!(!inv_report.independent);
        assert!(inv_report.witness.unwrap().len() >= 40);
    }

    #[test]
    fn independence_of_swapped_conjugate() {
        let (fwd, bwd) = f3_gold_pair();
        // σφσ⁻¹ for σ = (b↔c): b ↦ c, c ↦ cb; its inverse is b ↦ b⁻¹c, c ↦ b.
        let psi = TopRep::on_rose(3, &[1, 2, 2], &["a", "c", "cb"], true).unwrap();
        let psi_inv = TopRep::on_rose(3, &[1, 2, 2], &["a", "Bc", "b"], true).unwrap();
        let opts = AnalysisOptions::default();
        let pf = AutomorphismData::build(psi, &opts).unwrap();
        let pb = AutomorphismData::build(psi_inv, &opts).unwrap();
        assert!(pf.aut.compose(&pb.aut).unwrap().is_identity());
        let report = independence_test((&fwd, &bwd), (&pf, &pb), &sys_a(), 40, 12).unwrap();
        assert!(report.independent, "witness: {:?}", report.witness);
    }
}
