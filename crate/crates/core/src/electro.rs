//! The electric (coned-off) length on `F` relative to a subgroup system,
//! the relative legality ratio, and the length-comparison experiment.
//!
//! The dynamic-programming electric length is an upper-bound estimate of the
//! true coned-off distance: it only shortcuts subwords of the chosen
//! representative through a cone. All flaring experiments use the DP value
//! uniformly; the exhaustive shortest-path search is the desk-scale
//! calibration oracle.

use crate::laminations::{AutomorphismData, LeafFamily, LeafOptions};
use crate::stallings::{MalnormalityWitness, SubgroupSystem};
use crate::trainmap::StratumClass;
use crate::words::{ConjugacyClass, Letter, Word};
use crate::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElectroError {
    #[error("subgroup system is not malnormal")]
    NotMalnormal(MalnormalityWitness),
    #[error("search budget of {0} states exceeded")]
    SearchBudgetExceeded(usize),
    #[error("sample set is empty")]
    EmptySample,
    #[error(transparent)]
    Lamination(#[from] crate::laminations::LaminationError),
    #[error(transparent)]
    Stallings(#[from] crate::stallings::StallingsError),
}

/// Electric-length queries relative to a malnormal subgroup system. Each
/// component automaton is canonical with base vertex 0, fixing the subgroup
/// representative `K_s`; cone adjacency is `x ~ x·k` for `k ∈ K_s`.
#[derive(Debug, Clone)]
pub struct ElectricContext {
    rank: usize,
    system: SubgroupSystem,
}

impl ElectricContext {
    pub fn new(rank: usize, system: SubgroupSystem) -> Result<Self, ElectroError> {
        let mal = system.is_malnormal();
        if !mal.malnormal {
            return Err(ElectroError::NotMalnormal(mal.witness.unwrap()));
        }
        Ok(ElectricContext { rank, system })
    }

    /// Cone-free context (the empty system): electric length degenerates to
    /// word length.
    pub fn cone_free(rank: usize) -> Self {
        ElectricContext {
            rank,
            system: SubgroupSystem::empty(rank),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn system(&self) -> &SubgroupSystem {
        &self.system
    }

    /// Dynamic program over the reduced word: a step is one letter or one
    /// cone crossing through a subword lying in some `K_s`.
    pub fn electric_length(&self, w: &Word) -> usize {
        let letters = w.letters();
        let n = letters.len();
        if n == 0 {
            return 0;
        }
        let mut cost = vec![usize::MAX; n + 1];
        cost[0] = 0;
        for i in 1..=n {
            cost[i] = cost[i - 1].saturating_add(1);
            // Subwords w[j..i] in K_s: walk the inverse word backwards from
            // the base; every return to base marks a valid j.
            for comp in self.system.components() {
                let base = 0u32;
                let mut state = base;
                let mut j = i;
                while j > 0 {
                    match comp.step(state, letters[j - 1].inverse()) {
                        Some(next) => {
                            state = next;
                            j -= 1;
                            if state == base {
                                cost[i] = cost[i].min(cost[j].saturating_add(1));
                            }
                        }
                        None => break,
                    }
                }
            }
        }
        cost[n]
    }

    /// Minimum DP electric length over all cyclic rotations of the
    /// canonical representative.
    pub fn electric_norm(&self, c: &ConjugacyClass) -> usize {
        let rep = c.rep();
        if rep.is_identity() {
            return 0;
        }
        (0..rep.len())
            .map(|k| self.electric_length(&rep.rotate(k)))
            .min()
            .unwrap()
    }

    /// All elements of `K_s` with reduced length ≤ `cap`, per component:
    /// non-backtracking closed walks at the base.
    fn cone_steps(&self, cap: usize) -> Vec<Word> {
        let mut out: HashSet<Word> = HashSet::new();
        for comp in self.system.components() {
            let base = 0u32;
            let mut stack: Vec<(u32, Vec<Letter>)> = vec![(base, Vec::new())];
            while let Some((v, path)) = stack.pop() {
                if path.len() >= cap {
                    continue;
                }
                for idx in 1..=self.rank {
                    for pos in [true, false] {
                        let l = Letter::new(idx, pos).unwrap();
                        if path.last() == Some(&l.inverse()) {
                            continue;
                        }
                        if let Some(t) = comp.step(v, l) {
                            let mut next = path.clone();
                            next.push(l);
                            if t == base {
                                out.insert(Word::reduce(next.iter().copied()));
                            }
                            stack.push((t, next));
                        }
                    }
                }
            }
        }
        out.remove(&Word::identity());
        out.into_iter().collect()
    }

    /// Shortest path from the identity to `w` in the graph on reduced words
    /// whose steps are right multiplication by a generator or by a
    /// nontrivial element of some `K_s` of length ≤ `step_cap`.
    /// Bidirectional breadth-first search; `budget` bounds visited states.
    pub fn exact_electric_length(
        &self,
        w: &Word,
        step_cap: usize,
        budget: usize,
    ) -> Result<usize, ElectroError> {
        if w.is_identity() {
            return Ok(0);
        }
        let mut steps: Vec<Word> = Vec::new();
        for idx in 1..=self.rank {
            steps.push(Word::generator(idx).unwrap());
            steps.push(Word::generator(idx).unwrap().inverse());
        }
        steps.extend(self.cone_steps(step_cap));

        let mut dist: [HashMap<Word, usize>; 2] = [HashMap::new(), HashMap::new()];
        dist[0].insert(Word::identity(), 0);
        dist[1].insert(w.clone(), 0);
        let mut frontier: [Vec<Word>; 2] = [vec![Word::identity()], vec![w.clone()]];
        let mut depth = [0usize; 2];
        let mut best: Option<usize> = None;

        loop {
            if let Some(b) = best {
                if depth[0] + depth[1] + 2 > b {
                    return Ok(b);
                }
            }
            if frontier[0].is_empty() && frontier[1].is_empty() {
                return Ok(best.expect("w is reachable: generators alone spell it"));
            }
            let side = if (frontier[0].len() <= frontier[1].len() && !frontier[0].is_empty())
                || frontier[1].is_empty()
            {
                0
            } else {
                1
            };
            let other = 1 - side;
            let mut next_frontier = Vec::new();
            let current = std::mem::take(&mut frontier[side]);
            for u in current {
                let du = dist[side][&u];
                for s in &steps {
                    let v = u.mul(s);
                    if dist[side].contains_key(&v) {
                        continue;
                    }
                    dist[side].insert(v.clone(), du + 1);
                    if dist[0].len() + dist[1].len() > budget {
                        return Err(ElectroError::SearchBudgetExceeded(budget));
                    }
                    if let Some(&dv) = dist[other].get(&v) {
                        let cand = du + 1 + dv;
                        best = Some(best.map_or(cand, |b| b.min(cand)));
                    }
                    next_frontier.push(v);
                }
            }
            frontier[side] = next_frontier;
            depth[side] += 1;
        }
    }
}

/// Suffix automaton for longest-factor queries against a fixed text.
struct SuffixAutomaton {
    next: Vec<BTreeMap<i8, usize>>,
    link: Vec<i32>,
    len: Vec<usize>,
    last: usize,
}

impl SuffixAutomaton {
    fn new(text: &[Letter]) -> Self {
        let mut sam = SuffixAutomaton {
            next: vec![BTreeMap::new()],
            link: vec![-1],
            len: vec![0],
            last: 0,
        };
        for &l in text {
            sam.extend(encode(l));
        }
        sam
    }

    fn extend(&mut self, c: i8) {
        let cur = self.next.len();
        self.next.push(BTreeMap::new());
        self.link.push(-1);
        self.len.push(self.len[self.last] + 1);
        let mut p = self.last as i32;
        while p >= 0 && !self.next[p as usize].contains_key(&c) {
            self.next[p as usize].insert(c, cur);
            p = self.link[p as usize];
        }
        if p < 0 {
            self.link[cur] = 0;
        } else {
            let q = self.next[p as usize][&c];
            if self.len[p as usize] + 1 == self.len[q] {
                self.link[cur] = q as i32;
            } else {
                let clone = self.next.len();
                self.next.push(self.next[q].clone());
                self.link.push(self.link[q]);
                self.len.push(self.len[p as usize] + 1);
                while p >= 0 && self.next[p as usize].get(&c) == Some(&q) {
                    self.next[p as usize].insert(c, clone);
                    p = self.link[p as usize];
                }
                self.link[q] = clone as i32;
                self.link[cur] = clone as i32;
            }
        }
        self.last = cur;
    }

    /// `stats[j]` = length of the longest suffix of `query[..j]` that is a
    /// factor of the text.
    fn matching_stats(&self, query: &[Letter]) -> Vec<usize> {
        let mut out = Vec::with_capacity(query.len() + 1);
        out.push(0);
        let mut state = 0usize;
        let mut l = 0usize;
        for &ch in query {
            let c = encode(ch);
            loop {
                if let Some(&nxt) = self.next[state].get(&c) {
                    state = nxt;
                    l += 1;
                    break;
                }
                if self.link[state] < 0 {
                    l = 0;
                    break;
                }
                state = self.link[state] as usize;
                l = self.len[state];
            }
            out.push(l);
        }
        out
    }
}

fn encode(l: Letter) -> i8 {
    let k = l.index() as i8;
    if l.is_positive() {
        k
    } else {
        -k
    }
}

/// Longest-factor matcher against a leaf word in either orientation.
pub struct LeafMatcher {
    fwd: SuffixAutomaton,
    rev: SuffixAutomaton,
}

impl LeafMatcher {
    pub fn new(leaf: &Word) -> Self {
        LeafMatcher {
            fwd: SuffixAutomaton::new(leaf.letters()),
            rev: SuffixAutomaton::new(leaf.inverse().letters()),
        }
    }

    /// `m[i]` = longest factor of the leaf (or its inverse) starting at
    /// position `i` of `query`.
    fn longest_match_at(&self, query: &[Letter]) -> Vec<usize> {
        let n = query.len();
        let mut out = vec![0usize; n + 1];
        for sam in [&self.fwd, &self.rev] {
            let stats = sam.matching_stats(query);
            // stats[j] bounds matches ending at j; convert to "longest
            // starting at i" with the monotone scan m_i = max{m : stats[i+m] ≥ m}.
            let mut m = 0usize;
            for i in 0..n {
                if m > 0 {
                    m -= 1;
                }
                while i + m < n && stats[i + m + 1] >= m + 1 {
                    m += 1;
                }
                out[i] = out[i].max(m);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermBreakdown {
    /// "eg" terms carry a stratum; everything else is "other".
    pub kind: String,
    pub stratum: usize,
    pub start: usize,
    pub len: usize,
    /// Mass excluded because it lifts to the Stallings graph of K.
    pub lifted: usize,
    /// Mass excluded as fixed-edge / Nielsen-path concatenations.
    pub ignored: usize,
    /// Mass counted into the relative length L_K.
    pub counted: usize,
    /// H_r mass of maximal leaf segments of length ≥ 2C (counted into L_leg).
    pub leaf_mass: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LegalityBreakdown {
    pub circuit: Word,
    /// Rotation of the canonical representative realizing the reported ratio.
    pub rotation: usize,
    pub terms: Vec<TermBreakdown>,
    pub legal_leaf_mass: usize,
    pub relative_mass: usize,
    /// `LEG_K`: legal leaf mass over relative mass (0 when the latter is 0).
    pub ratio: Scalar,
    /// The protection threshold 2C used for leaf segments.
    pub threshold: usize,
}

/// Per-automorphism data the legality computation needs.
pub struct LegalityContext<'a> {
    pub data: &'a AutomorphismData,
    pub matchers: BTreeMap<usize, LeafMatcher>,
    pub uncarried: Vec<usize>,
    pub ignored_tokens: Vec<Word>,
    pub threshold: usize,
}

impl<'a> LegalityContext<'a> {
    pub fn build(
        data: &'a AutomorphismData,
        electric: &ElectricContext,
        nielsen_len: usize,
    ) -> Result<Self, ElectroError> {
        let leaf_opts = LeafOptions::default();
        let threshold = 2 * data.analysis.protection_constant;
        let mut matchers = BTreeMap::new();
        let mut uncarried = Vec::new();
        for r in data.eg_strata() {
            let family = LeafFamily::build(&data.rep, r, &leaf_opts)?;
            let carried = electric
                .system
                .components()
                .iter()
                .any(|c| {
                    let probe = family
                        .central_segment(data.rep.graph(), threshold)
                        .unwrap_or_else(|| family.word.clone());
                    c.readable_anywhere(probe.letters())
                });
            if !carried {
                uncarried.push(r);
                matchers.insert(r, LeafMatcher::new(&family.word));
            }
        }
        // Fixed edges and short indivisible Nielsen words are ignored mass.
        let mut tokens: Vec<Word> = Vec::new();
        let nps = data
            .rep
            .find_nielsen_paths(nielsen_len, 1)
            .map_err(crate::laminations::LaminationError::Train)?;
        let mut np_words: Vec<Word> = nps
            .iter()
            .map(|np| data.rep.graph().path_to_word(&np.path))
            .filter(|w| !w.is_identity())
            .collect();
        np_words.sort_by_key(Word::len);
        for w in np_words {
            if !decomposes_into(&w, &tokens) {
                tokens.push(w);
            }
        }
        Ok(LegalityContext {
            data,
            matchers,
            uncarried,
            ignored_tokens: tokens,
            threshold,
        })
    }

    fn stratum_class(&self, r: usize) -> StratumClass {
        self.data
            .analysis
            .strata
            .stratum(r)
            .map(|s| s.class)
            .unwrap_or(StratumClass::Zero)
    }

    /// Relative legality of a conjugacy class (as a circuit): the greedy
    /// breakdown maximized over rotations of the representative.
    pub fn legality_of_class(&self, electric: &ElectricContext, c: &ConjugacyClass) -> LegalityBreakdown {
        let rep = c.rep();
        if rep.is_identity() {
            return self.empty_breakdown(rep.clone());
        }
        let mut best: Option<LegalityBreakdown> = None;
        for k in 0..rep.len() {
            let rot = rep.rotate(k);
            let mut bd = self.legality_linear(electric, &rot);
            bd.rotation = k;
            let better = match &best {
                None => true,
                Some(b) => {
                    bd.ratio > b.ratio
                        || (bd.ratio == b.ratio && bd.legal_leaf_mass > b.legal_leaf_mass)
                }
            };
            if better {
                best = Some(bd);
            }
        }
        let mut out = best.unwrap();
        out.circuit = rep.clone();
        out
    }

    fn empty_breakdown(&self, w: Word) -> LegalityBreakdown {
        LegalityBreakdown {
            circuit: w,
            rotation: 0,
            terms: Vec::new(),
            legal_leaf_mass: 0,
            relative_mass: 0,
            ratio: 0.0,
            threshold: self.threshold,
        }
    }

    /// Greedy breakdown of a linear word at a fixed cut.
    pub fn legality_linear(&self, electric: &ElectricContext, w: &Word) -> LegalityBreakdown {
        let g = self.data.rep.graph();
        let letters = w.letters();
        let n = letters.len();
        let mut terms = Vec::new();
        let mut total_leaf = 0usize;
        let mut total_counted = 0usize;

        // Split at stratum-class changes: EG strata form their own terms
        // (absorbing adjacent zero-stratum letters); everything else groups
        // by stratum.
        let mut keys: Vec<(bool, usize)> = letters
            .iter()
            .map(|&l| {
                let r = g.edge_list()[l.index() - 1].stratum;
                (self.stratum_class(r) == StratumClass::Eg, r)
            })
            .collect();
        // Zero-stratum letters are absorbed into a neighboring EG term when
        // that stratum envelopes them (higher index).
        for i in 0..n {
            let r = g.edge_list()[letters[i].index() - 1].stratum;
            if self.stratum_class(r) != StratumClass::Zero {
                continue;
            }
            let left = i.checked_sub(1).map(|j| keys[j]);
            let right = keys.get(i + 1).copied();
            for cand in [left, right].into_iter().flatten() {
                if cand.0 && cand.1 > r {
                    keys[i] = cand;
                    break;
                }
            }
        }

        let mut start = 0usize;
        while start < n {
            let key = keys[start];
            let mut end = start + 1;
            while end < n && keys[end] == key {
                end += 1;
            }
            let seg = &letters[start..end];
            if key.0 && self.uncarried.contains(&key.1) {
                let (lifted, ignored, counted, leaf_mass) =
                    self.eg_term_masses(electric, seg, key.1);
                total_leaf += leaf_mass;
                total_counted += counted;
                terms.push(TermBreakdown {
                    kind: "eg".into(),
                    stratum: key.1,
                    start,
                    len: seg.len(),
                    lifted,
                    ignored,
                    counted,
                    leaf_mass,
                });
            } else {
                terms.push(TermBreakdown {
                    kind: "other".into(),
                    stratum: key.1,
                    start,
                    len: seg.len(),
                    lifted: 0,
                    ignored: 0,
                    counted: 0,
                    leaf_mass: 0,
                });
            }
            start = end;
        }

        let ratio = if total_counted == 0 {
            0.0
        } else {
            total_leaf as Scalar / total_counted as Scalar
        };
        LegalityBreakdown {
            circuit: w.clone(),
            rotation: 0,
            terms,
            legal_leaf_mass: total_leaf,
            relative_mass: total_counted,
            ratio,
            threshold: self.threshold,
        }
    }

    /// Masses of an EG term: greedily excise maximal K-liftable runs, then
    /// fixed/Nielsen runs; what remains is counted, and within it maximal
    /// leaf segments with enough H_r mass contribute to L_leg.
    fn eg_term_masses(
        &self,
        electric: &ElectricContext,
        seg: &[Letter],
        r: usize,
    ) -> (usize, usize, usize, usize) {
        let g = self.data.rep.graph();
        let n = seg.len();
        let mut excluded = vec![false; n]; // lifted or ignored
        let mut lifted = 0usize;

        // Longest K-liftable run starting at each position.
        let mut i = 0usize;
        while i < n {
            let mut best = 0usize;
            for comp in electric.system.components() {
                for v in 0..comp.vertex_count() as u32 {
                    let mut state = v;
                    let mut len = 0usize;
                    while i + len < n {
                        match comp.step(state, seg[i + len]) {
                            Some(nxt) => {
                                state = nxt;
                                len += 1;
                            }
                            None => break,
                        }
                    }
                    best = best.max(len);
                }
            }
            if best > 0 {
                for k in i..i + best {
                    excluded[k] = true;
                }
                lifted += best;
                i += best;
            } else {
                i += 1;
            }
        }

        // Fixed / Nielsen token runs on the unlifted remainder.
        let mut ignored = 0usize;
        let mut i = 0usize;
        while i < n {
            if excluded[i] {
                i += 1;
                continue;
            }
            let mut j = i;
            loop {
                let mut advanced = false;
                for tok in &self.ignored_tokens {
                    for cand in [tok.clone(), tok.inverse()] {
                        let m = cand.len();
                        if m == 0 || j + m > n || excluded[j..j + m].iter().any(|&e| e) {
                            continue;
                        }
                        if &seg[j..j + m] == cand.letters() {
                            j += m;
                            advanced = true;
                            break;
                        }
                    }
                    if advanced {
                        break;
                    }
                }
                if !advanced {
                    break;
                }
            }
            if j > i {
                for k in i..j {
                    excluded[k] = true;
                }
                ignored += j - i;
                i = j;
            } else {
                i += 1;
            }
        }

        let counted = n - lifted - ignored;

        // Leaf segments within maximal counted runs.
        let mut leaf_mass = 0usize;
        if let Some(matcher) = self.matchers.get(&r) {
            let mut i = 0usize;
            while i < n {
                if excluded[i] {
                    i += 1;
                    continue;
                }
                let mut j = i;
                while j < n && !excluded[j] {
                    j += 1;
                }
                let chunk = &seg[i..j];
                let matches = matcher.longest_match_at(chunk);
                let mut p = 0usize;
                while p < chunk.len() {
                    let m = matches[p];
                    if m == 0 {
                        p += 1;
                        continue;
                    }
                    let hr = chunk[p..p + m]
                        .iter()
                        .filter(|l| g.edge_list()[l.index() - 1].stratum == r)
                        .count();
                    if hr >= self.threshold {
                        leaf_mass += hr;
                        p += m;
                    } else {
                        p += 1;
                    }
                }
                i = j;
            }
        }
        (lifted, ignored, counted, leaf_mass)
    }
}

fn decomposes_into(w: &Word, tokens: &[Word]) -> bool {
    if tokens.is_empty() {
        return false;
    }
    let letters = w.letters();
    let n = letters.len();
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for i in 0..n {
        if !reach[i] {
            continue;
        }
        for tok in tokens {
            for cand in [tok.clone(), tok.inverse()] {
                let m = cand.len();
                if m > 0 && i + m <= n && &letters[i..i + m] == cand.letters() {
                    reach[i + m] = true;
                }
            }
        }
    }
    reach[n]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonSample {
    pub class: ConjugacyClass,
    pub relative_mass: usize,
    pub electric_norm: usize,
    pub ratio: Scalar,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LengthComparisonReport {
    /// Empirical constant: max over samples of max(L_K/‖·‖, ‖·‖/L_K).
    pub j: Scalar,
    pub samples: Vec<ComparisonSample>,
    pub rejected_carried: Vec<ConjugacyClass>,
}

/// The length-comparison experiment over circuits not carried by `K`.
pub fn length_comparison(
    legality: &LegalityContext<'_>,
    electric: &ElectricContext,
    samples: &[ConjugacyClass],
) -> Result<LengthComparisonReport, ElectroError> {
    let mut out = Vec::new();
    let mut rejected = Vec::new();
    let mut j: Scalar = 0.0;
    for c in samples {
        if c.is_trivial() || electric.system.carries_conjugacy(c)? {
            rejected.push(c.clone());
            continue;
        }
        let bd = legality.legality_of_class(electric, c);
        let el = electric.electric_norm(c);
        let lk = bd.relative_mass;
        let ratio = if el == 0 || lk == 0 {
            0.0
        } else {
            let a = lk as Scalar / el as Scalar;
            let b = el as Scalar / lk as Scalar;
            a.max(b)
        };
        j = j.max(ratio);
        out.push(ComparisonSample {
            class: c.clone(),
            relative_mass: lk,
            electric_norm: el,
            ratio,
        });
    }
    if out.is_empty() {
        return Err(ElectroError::EmptySample);
    }
    Ok(LengthComparisonReport {
        j,
        samples: out,
        rejected_carried: rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainmap::{AnalysisOptions, TopRep};

    fn ctx_a() -> ElectricContext {
        let sys =
            SubgroupSystem::from_generator_lists(3, &[vec![Word::parse("a").unwrap()]]).unwrap();
        ElectricContext::new(3, sys).unwrap()
    }

    fn ctx_a_rank2() -> ElectricContext {
        let sys =
            SubgroupSystem::from_generator_lists(2, &[vec![Word::parse("a").unwrap()]]).unwrap();
        ElectricContext::new(2, sys).unwrap()
    }

    #[test]
    fn dp_examples() {
        let ctx = ctx_a();
        assert_eq!(ctx.electric_length(&Word::parse("aaaaa").unwrap()), 1);
        assert_eq!(
            ctx.electric_length(&Word::parse("aaaaabaaac").unwrap()),
            4
        );
        assert_eq!(ctx.electric_length(&Word::identity()), 0);
        // Cone-free degeneration.
        let free = ElectricContext::cone_free(2);
        for w in crate::words::words_up_to(2, 4) {
            assert_eq!(free.electric_length(&w), w.len());
        }
    }

    #[test]
    fn dp_never_exceeds_word_length() {
        let ctx = ctx_a_rank2();
        for w in crate::words::words_up_to(2, 5) {
            assert!(ctx.electric_length(&w) <= w.len());
        }
    }

    #[test]
    fn rejects_non_malnormal_system() {
        let sys =
            SubgroupSystem::from_generator_lists(2, &[vec![Word::parse("aa").unwrap()]]).unwrap();
        assert!(matches!(
            ElectricContext::new(2, sys),
            Err(ElectroError::NotMalnormal(_))
        ));
    }

    #[test]
    fn exact_search_examples() {
        let ctx = ctx_a_rank2();
        let a9 = Word::parse("aaaaaaaaa").unwrap();
        assert_eq!(ctx.exact_electric_length(&a9, 9, 500_000).unwrap(), 1);
        let b = Word::parse("b").unwrap();
        assert_eq!(ctx.exact_electric_length(&b, 4, 500_000).unwrap(), 1);
        let ajbak = Word::parse("aabaaa").unwrap();
        assert_eq!(ctx.exact_electric_length(&ajbak, 8, 500_000).unwrap(), 3);
        assert_eq!(ctx.electric_length(&ajbak), 3);
    }

    #[test]
    fn exact_budget_guard() {
        let ctx = ctx_a_rank2();
        let w = Word::parse("abababab").unwrap();
        assert!(matches!(
            ctx.exact_electric_length(&w, 8, 10),
            Err(ElectroError::SearchBudgetExceeded(10))
        ));
    }

    #[test]
    fn suffix_automaton_matching() {
        let leaf = Word::parse("bcbbcbcbbcbbc").unwrap();
        let m = LeafMatcher::new(&leaf);
        let hits = m.longest_match_at(Word::parse("cbcb").unwrap().letters());
        assert_eq!(hits[0], 4);
        // Inverse orientation matches too.
        let hits = m.longest_match_at(Word::parse("CBBCB").unwrap().letters());
        assert_eq!(hits[0], 5);
        // Something foreign.
        let hits = m.longest_match_at(Word::parse("ccc").unwrap().letters());
        assert!(hits[0] <= 1);
    }

    fn gold_legality<'a>(
        data: &'a AutomorphismData,
        ctx: &ElectricContext,
    ) -> LegalityContext<'a> {
        LegalityContext::build(data, ctx, 6).unwrap()
    }

    #[test]
    fn legality_examples() {
        let f = TopRep::on_rose(3, &[1, 2, 2], &["a", "bc", "b"], true).unwrap();
        let data = AutomorphismData::build(f, &AnalysisOptions::default()).unwrap();
        let ctx = ctx_a();
        let leg = gold_legality(&data, &ctx);

        // f⁸([b]) is one long leaf segment: ratio 1.
        let mut b = ConjugacyClass::of(&Word::parse("b").unwrap());
        for _ in 0..8 {
            b = b.apply(&data.aut).unwrap();
        }
        let bd = leg.legality_of_class(&ctx, &b);
        assert_eq!(bd.ratio, 1.0, "{bd:?}");

        // Pure a-powers have no relative mass at all.
        let ak = ConjugacyClass::of(&Word::parse("aaaa").unwrap());
        let bd = leg.legality_of_class(&ctx, &ak);
        assert_eq!(bd.relative_mass, 0);
        assert_eq!(bd.ratio, 0.0);

        // a³b: only b counts, and it is far below the threshold.
        let akb = ConjugacyClass::of(&Word::parse("aaab").unwrap());
        let bd = leg.legality_of_class(&ctx, &akb);
        assert_eq!(bd.relative_mass, 1);
        assert_eq!(bd.legal_leaf_mass, 0);
        assert_eq!(bd.ratio, 0.0);
    }

    #[test]
    fn legality_growth_along_iterates() {
        let f = TopRep::on_rose(3, &[1, 2, 2], &["a", "bc", "b"], true).unwrap();
        let data = AutomorphismData::build(f, &AnalysisOptions::default()).unwrap();
        let ctx = ctx_a();
        let leg = gold_legality(&data, &ctx);
        let mut c = ConjugacyClass::of(&Word::parse("b").unwrap());
        let mut ratios = Vec::new();
        for n in 0..=10 {
            if n >= 5 {
                ratios.push(leg.legality_of_class(&ctx, &c).ratio);
            }
            c = c.apply(&data.aut).unwrap();
        }
        assert!(ratios.iter().all(|&r| r >= 0.9), "{ratios:?}");
    }

    #[test]
    fn length_comparison_families() {
        let f = TopRep::on_rose(3, &[1, 2, 2], &["a", "bc", "b"], true).unwrap();
        let data = AutomorphismData::build(f, &AnalysisOptions::default()).unwrap();
        let ctx = ctx_a();
        let leg = gold_legality(&data, &ctx);
        // a^k b: L_K = 1, electric norm 2, so J ≥ 2, bounded in k.
        let samples: Vec<ConjugacyClass> = (1..=8)
            .map(|k| {
                let mut s = "a".repeat(k);
                s.push('b');
                ConjugacyClass::of(&Word::parse(&s).unwrap())
            })
            .collect();
        let report = length_comparison(&leg, &ctx, &samples).unwrap();
        assert_eq!(report.j, 2.0);
        for s in &report.samples {
            assert_eq!(s.relative_mass, 1);
            assert_eq!(s.electric_norm, 2);
        }
        // Carried classes are rejected.
        let carried = vec![ConjugacyClass::of(&Word::parse("aa").unwrap())];
        assert!(matches!(
            length_comparison(&leg, &ctx, &carried),
            Err(ElectroError::EmptySample)
        ));
    }
}
