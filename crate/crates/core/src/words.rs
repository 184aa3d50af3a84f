//! Reduced words, conjugacy classes and basis-defined automorphisms of the
//! free group `F` of rank `n ≥ 2`.
//!
//! Words are serialized as ASCII with `a..z` for generators and capital
//! letters for inverses (`A = a⁻¹`), which caps the supported rank at 26.
//! The letter order `a < a⁻¹ < b < b⁻¹ < …` is fixed globally so canonical
//! forms are deterministic.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Largest rank representable in the ASCII serialization.
pub const MAX_RANK: usize = 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("letter index {index} outside rank range 1..={rank}")]
    LetterOutOfRange { index: usize, rank: usize },
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("character {0:?} is not a word letter")]
    BadChar(char),
    #[error("rank {0} not supported (must be 2..={MAX_RANK})")]
    BadRank(usize),
    #[error("expected {expected} generator images, got {got}")]
    ImageCount { expected: usize, got: usize },
    #[error("images do not generate the free group")]
    NotSurjective,
}

/// A signed generator: positive sign is the generator itself, negative its
/// inverse. Stored as a nonzero `i8`, `+k` / `-k` for generator `k` (1-based).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter(i8);

impl Letter {
    pub fn new(index: usize, positive: bool) -> Result<Self, WordError> {
        if index == 0 || index > MAX_RANK {
            return Err(WordError::LetterOutOfRange {
                index,
                rank: MAX_RANK,
            });
        }
        let k = index as i8;
        Ok(Letter(if positive { k } else { -k }))
    }

    /// 1-based generator index.
    pub fn index(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    pub fn from_char(c: char) -> Result<Self, WordError> {
        match c {
            'a'..='z' => Ok(Letter((c as u8 - b'a' + 1) as i8)),
            'A'..='Z' => Ok(Letter(-((c as u8 - b'A' + 1) as i8))),
            _ => Err(WordError::BadChar(c)),
        }
    }

    pub fn to_char(self) -> char {
        let base = if self.is_positive() { b'a' } else { b'A' };
        (base + (self.index() as u8 - 1)) as char
    }

    fn fits_rank(self, rank: usize) -> Result<(), WordError> {
        if self.index() > rank {
            Err(WordError::LetterOutOfRange {
                index: self.index(),
                rank,
            })
        } else {
            Ok(())
        }
    }

    /// Order key realizing `a < a⁻¹ < b < b⁻¹ < …`.
    fn order_key(self) -> (usize, bool) {
        (self.index(), !self.is_positive())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A reduced word in `F`. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Reduce an arbitrary letter sequence by cancelling adjacent inverse
    /// pairs. The result is the unique reduced word equal to the input in `F`.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            match stack.last() {
                Some(&top) if top == l.inverse() => {
                    stack.pop();
                }
                _ => stack.push(l),
            }
        }
        Word(stack)
    }

    pub fn generator(index: usize) -> Result<Self, WordError> {
        Ok(Word(vec![Letter::new(index, true)?]))
    }

    pub fn parse(s: &str) -> Result<Self, WordError> {
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            if c.is_whitespace() {
                continue;
            }
            letters.push(Letter::from_char(c)?);
        }
        Ok(Word::reduce(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_index(&self) -> usize {
        self.0.iter().map(|l| l.index()).max().unwrap_or(0)
    }

    pub fn fits_rank(&self, rank: usize) -> Result<(), WordError> {
        for l in &self.0 {
            l.fits_rank(rank)?;
        }
        Ok(())
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Group multiplication; only the seam needs cancelling.
    pub fn mul(&self, rhs: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &rhs.0 {
            match out.last() {
                Some(&top) if top == l.inverse() => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Word(out)
    }

    pub fn conjugate_by(&self, c: &Word) -> Word {
        c.mul(self).mul(&c.inverse())
    }

    pub fn pow(&self, n: i32) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&f), Some(&l)) => f != l.inverse(),
            _ => true,
        }
    }

    /// Split `w = conjugator · core · conjugator⁻¹` with `core` cyclically
    /// reduced. Returns `(core, conjugator)`.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let mut lo = 0usize;
        let mut hi = self.0.len();
        while hi - lo >= 2 && self.0[lo] == self.0[hi - 1].inverse() {
            lo += 1;
            hi -= 1;
        }
        let core = Word(self.0[lo..hi].to_vec());
        let conj = Word(self.0[..lo].to_vec());
        (core, conj)
    }

    /// Left rotation by `k`: for a cyclically reduced word this is a
    /// conjugate, again cyclically reduced.
    pub fn rotate(&self, k: usize) -> Word {
        if self.0.is_empty() {
            return Word::identity();
        }
        let k = k % self.0.len();
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    /// True if `needle` occurs as a (contiguous) subword.
    pub fn contains_subword(&self, needle: &Word) -> bool {
        if needle.len() == 0 {
            return true;
        }
        if needle.len() > self.len() {
            return false;
        }
        self.0
            .windows(needle.len())
            .any(|win| win == needle.letters())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for Word {
    type Err = WordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Word::parse(s)
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&format_args!(
            "{}",
            self.0.iter().map(|l| l.to_char()).collect::<String>()
        ))
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// A conjugacy class, held by its canonical representative: the
/// lexicographically least word among all cyclic rotations of the cyclically
/// reduced core and of its inverse.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConjugacyClass {
    rep: Word,
}

impl ConjugacyClass {
    pub fn of(w: &Word) -> Self {
        let (core, _) = w.cyclic_reduce();
        let mut best: Option<Word> = None;
        for cand in [core.clone(), core.inverse()] {
            for k in 0..cand.len().max(1) {
                let rot = cand.rotate(k);
                if best.as_ref().is_none_or(|b| rot < *b) {
                    best = Some(rot);
                }
            }
        }
        ConjugacyClass {
            rep: best.unwrap_or_default(),
        }
    }

    pub fn rep(&self) -> &Word {
        &self.rep
    }

    pub fn is_trivial(&self) -> bool {
        self.rep.is_identity()
    }

    pub fn len(&self) -> usize {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rep.is_identity()
    }

    pub fn apply(&self, aut: &BasisAutomorphism) -> Result<ConjugacyClass, WordError> {
        Ok(ConjugacyClass::of(&aut.apply(&self.rep)?))
    }
}

impl fmt::Display for ConjugacyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.rep)
    }
}

impl fmt::Debug for ConjugacyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Enumerate all nontrivial conjugacy classes with representative length at
/// most `maxlen`, deduplicated, in deterministic order.
pub fn classes_up_to(rank: usize, maxlen: usize) -> Vec<ConjugacyClass> {
    let mut seen = std::collections::BTreeSet::new();
    let mut stack: Vec<Vec<Letter>> = vec![Vec::new()];
    while let Some(cur) = stack.pop() {
        if cur.len() >= maxlen {
            continue;
        }
        for idx in 1..=rank {
            for pos in [true, false] {
                let l = Letter::new(idx, pos).unwrap();
                if cur.last() == Some(&l.inverse()) {
                    continue;
                }
                let mut next = cur.clone();
                next.push(l);
                let w = Word(next.clone());
                if !w.is_identity() {
                    seen.insert(ConjugacyClass::of(&w));
                }
                stack.push(next);
            }
        }
    }
    seen.into_iter().collect()
}

/// Enumerate all reduced words of length `1..=maxlen`, deterministic order.
pub fn words_up_to(rank: usize, maxlen: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..maxlen {
        let mut next_frontier = Vec::new();
        for cur in &frontier {
            for idx in 1..=rank {
                for pos in [true, false] {
                    let l = Letter::new(idx, pos).unwrap();
                    if cur.last() == Some(&l.inverse()) {
                        continue;
                    }
                    let mut next = cur.clone();
                    next.push(l);
                    out.push(Word(next.clone()));
                    next_frontier.push(next);
                }
            }
        }
        frontier = next_frontier;
    }
    out
}

/// An automorphism of `F` given by the images of the positive generators.
///
/// Construction validates ranks only; surjectivity (hence, by the Hopf
/// property, bijectivity) is certified by [`BasisAutomorphism::is_surjective`]
/// via a Stallings fold of the image words.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisAutomorphism {
    rank: usize,
    images: Vec<Word>,
}

impl BasisAutomorphism {
    pub fn new(rank: usize, images: Vec<Word>) -> Result<Self, WordError> {
        if rank < 2 || rank > MAX_RANK {
            return Err(WordError::BadRank(rank));
        }
        if images.len() != rank {
            return Err(WordError::ImageCount {
                expected: rank,
                got: images.len(),
            });
        }
        for w in &images {
            w.fits_rank(rank)?;
        }
        Ok(BasisAutomorphism { rank, images })
    }

    pub fn parse(rank: usize, images: &[&str]) -> Result<Self, WordError> {
        let images = images
            .iter()
            .map(|s| Word::parse(s))
            .collect::<Result<Vec<_>, _>>()?;
        BasisAutomorphism::new(rank, images)
    }

    pub fn identity(rank: usize) -> Self {
        let images = (1..=rank).map(|i| Word::generator(i).unwrap()).collect();
        BasisAutomorphism { rank, images }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image_of(&self, l: Letter) -> Word {
        let w = &self.images[l.index() - 1];
        if l.is_positive() {
            w.clone()
        } else {
            w.inverse()
        }
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, w)| w.letters() == [Letter::new(i + 1, true).unwrap()])
    }

    pub fn apply(&self, w: &Word) -> Result<Word, WordError> {
        w.fits_rank(self.rank)?;
        let mut out: Vec<Letter> = Vec::with_capacity(w.len());
        for &l in w.letters() {
            let img = &self.images[l.index() - 1];
            let iter: Box<dyn Iterator<Item = Letter>> = if l.is_positive() {
                Box::new(img.letters().iter().copied())
            } else {
                Box::new(img.letters().iter().rev().map(|x| x.inverse()))
            };
            for x in iter {
                match out.last() {
                    Some(&top) if top == x.inverse() => {
                        out.pop();
                    }
                    _ => out.push(x),
                }
            }
        }
        Ok(Word(out))
    }

    /// Composition: `(g ∘ h)(x) = g(h(x))`.
    pub fn compose(&self, h: &BasisAutomorphism) -> Result<BasisAutomorphism, WordError> {
        if self.rank != h.rank {
            return Err(WordError::RankMismatch(self.rank, h.rank));
        }
        let images = h
            .images
            .iter()
            .map(|w| self.apply(w))
            .collect::<Result<Vec<_>, _>>()?;
        BasisAutomorphism::new(self.rank, images)
    }

    /// Iterated image `aut^n(w)`; `n = 0` is the identity.
    pub fn apply_power(&self, w: &Word, n: u32) -> Result<Word, WordError> {
        let mut out = w.clone();
        for _ in 0..n {
            out = self.apply(&out)?;
        }
        Ok(out)
    }

    /// Surjectivity of the induced endomorphism, decided by folding the
    /// subgroup graph of the image words and checking it is the rank-n rose.
    /// By the Hopf property this certifies the map is an automorphism.
    pub fn is_surjective(&self) -> bool {
        crate::stallings::folds_to_full_rose(self.rank, &self.images)
    }

    /// Inverse automorphism via Nielsen reduction of the image tuple with a
    /// parallel tuple tracking the transformations.
    ///
    /// Errors with [`WordError::NotSurjective`] when the images do not
    /// generate `F`.
    pub fn invert(&self) -> Result<BasisAutomorphism, WordError> {
        if !self.is_surjective() {
            return Err(WordError::NotSurjective);
        }
        nielsen_invert(self)
    }
}

impl fmt::Debug for BasisAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Aut(rank {})[", self.rank)?;
        for (i, w) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}↦{}", Letter::new(i + 1, true).unwrap().to_char(), w)?;
        }
        write!(f, "]")
    }
}

/// State of the Nielsen reduction: pairs `(u_i, v_i)` with the invariant
/// `aut(v_i) = u_i`. Elementary moves shorten the `u` side; when the `u`
/// tuple becomes the standard basis the `v` tuple reads off the inverse.
fn nielsen_invert(aut: &BasisAutomorphism) -> Result<BasisAutomorphism, WordError> {
    let n = aut.rank;
    let mut us: Vec<Word> = aut.images.clone();
    let mut vs: Vec<Word> = (1..=n).map(|i| Word::generator(i).unwrap()).collect();

    let total = |ws: &[Word]| ws.iter().map(Word::len).sum::<usize>();

    // Strictly length-reducing elementary moves, with a bounded breadth-first
    // search across length-preserving plateaus when no strict move exists.
    // Peak reduction guarantees the standard basis is reachable without ever
    // increasing total length.
    let mut guard = 0usize;
    'outer: while total(&us) > n {
        guard += 1;
        if guard > 10_000 {
            return Err(WordError::NotSurjective);
        }
        if apply_first_reducing_move(&mut us, &mut vs) {
            continue 'outer;
        }
        // Plateau: search tuples of equal total length for one admitting a
        // strict reduction.
        let mut seen = std::collections::BTreeSet::new();
        let mut queue = std::collections::VecDeque::new();
        seen.insert(certificate(&us));
        queue.push_back((us.clone(), vs.clone()));
        let budget = 50_000usize;
        let mut expanded = 0usize;
        while let Some((cu, cv)) = queue.pop_front() {
            expanded += 1;
            if expanded > budget {
                return Err(WordError::NotSurjective);
            }
            for (nu, nv) in plateau_neighbors(&cu, &cv) {
                if !seen.insert(certificate(&nu)) {
                    continue;
                }
                let mut tu = nu.clone();
                let mut tv = nv.clone();
                if apply_first_reducing_move(&mut tu, &mut tv) {
                    us = tu;
                    vs = tv;
                    continue 'outer;
                }
                queue.push_back((nu, nv));
            }
        }
        return Err(WordError::NotSurjective);
    }

    // Each u_i is now a single letter; assemble the inverse images.
    let mut inv_images: Vec<Option<Word>> = vec![None; n];
    for (u, v) in us.iter().zip(&vs) {
        debug_assert_eq!(u.len(), 1);
        let l = u.letters()[0];
        let img = if l.is_positive() { v.clone() } else { v.inverse() };
        if inv_images[l.index() - 1].replace(img).is_some() {
            return Err(WordError::NotSurjective);
        }
    }
    let images = inv_images
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or(WordError::NotSurjective)?;
    BasisAutomorphism::new(n, images)
}

fn certificate(us: &[Word]) -> Vec<Vec<i8>> {
    us.iter()
        .map(|w| w.letters().iter().map(|l| if l.is_positive() { l.index() as i8 } else { -(l.index() as i8) }).collect())
        .collect()
}

fn elementary_products(u_i: &Word, u_j: &Word) -> [Word; 4] {
    [
        u_i.mul(u_j),
        u_i.mul(&u_j.inverse()),
        u_j.mul(u_i),
        u_j.inverse().mul(u_i),
    ]
}

fn apply_move(us: &mut [Word], vs: &mut [Word], i: usize, j: usize, kind: usize) {
    let (nu, nv) = match kind {
        0 => (us[i].mul(&us[j]), vs[i].mul(&vs[j])),
        1 => (us[i].mul(&us[j].inverse()), vs[i].mul(&vs[j].inverse())),
        2 => (us[j].mul(&us[i]), vs[j].mul(&vs[i])),
        _ => (us[j].inverse().mul(&us[i]), vs[j].inverse().mul(&vs[i])),
    };
    us[i] = nu;
    vs[i] = nv;
}

fn apply_first_reducing_move(us: &mut [Word], vs: &mut [Word]) -> bool {
    let n = us.len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let cands = elementary_products(&us[i], &us[j]);
            for (kind, cand) in cands.iter().enumerate() {
                if cand.len() < us[i].len() && !cand.is_identity() {
                    apply_move(us, vs, i, j, kind);
                    return true;
                }
            }
        }
    }
    false
}

fn plateau_neighbors(us: &[Word], vs: &[Word]) -> Vec<(Vec<Word>, Vec<Word>)> {
    let n = us.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let cands = elementary_products(&us[i], &us[j]);
            for (kind, cand) in cands.iter().enumerate() {
                if cand.len() == us[i].len() && !cand.is_identity() {
                    let mut nu = us.to_vec();
                    let mut nv = vs.to_vec();
                    apply_move(&mut nu, &mut nv, i, j, kind);
                    out.push((nu, nv));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn f3_gold() -> BasisAutomorphism {
        BasisAutomorphism::parse(3, &["a", "bc", "b"]).unwrap()
    }

    #[test]
    fn reduce_cancels_forced_pair() {
        let w = Word::parse("aAb").unwrap();
        assert_eq!(w, Word::parse("b").unwrap());
        assert_eq!(Word::parse("").unwrap(), Word::identity());
    }

    #[test]
    fn reduce_is_idempotent_on_samples() {
        for w in words_up_to(2, 5) {
            assert_eq!(Word::reduce(w.letters().iter().copied()), w);
        }
    }

    #[test]
    fn cyclic_reduce_examples() {
        let (core, conj) = Word::parse("abA").unwrap().cyclic_reduce();
        assert_eq!(core, Word::parse("b").unwrap());
        assert_eq!(conj, Word::parse("a").unwrap());

        let (core, conj) = Word::parse("bc").unwrap().cyclic_reduce();
        assert_eq!(core, Word::parse("bc").unwrap());
        assert!(conj.is_identity());
    }

    #[test]
    fn apply_f3_gold() {
        let aut = f3_gold();
        assert_eq!(
            aut.apply(&Word::parse("b").unwrap()).unwrap(),
            Word::parse("bc").unwrap()
        );
        assert!(aut.apply(&Word::identity()).unwrap().is_identity());
        let twice = aut.compose(&aut).unwrap();
        assert_eq!(
            twice.apply(&Word::parse("b").unwrap()).unwrap(),
            Word::parse("bcb").unwrap()
        );
    }

    #[test]
    fn compose_identity_laws() {
        let aut = f3_gold();
        let id = BasisAutomorphism::identity(3);
        assert_eq!(aut.compose(&id).unwrap(), aut);
        assert_eq!(id.compose(&aut).unwrap(), aut);
    }

    #[test]
    fn invert_f3_gold() {
        let aut = f3_gold();
        let inv = aut.invert().unwrap();
        let expected = BasisAutomorphism::parse(3, &["a", "c", "Cb"]).unwrap();
        assert_eq!(inv, expected);
        assert!(aut.compose(&inv).unwrap().is_identity());
        assert!(inv.compose(&aut).unwrap().is_identity());
    }

    #[test]
    fn invert_identity() {
        let id = BasisAutomorphism::identity(4);
        assert_eq!(id.invert().unwrap(), id);
    }

    #[test]
    fn invert_rejects_proper_subgroup() {
        let endo = BasisAutomorphism::parse(2, &["aa", "b"]).unwrap();
        assert!(!endo.is_surjective());
        assert_eq!(endo.invert(), Err(WordError::NotSurjective));
    }

    #[test]
    fn canonical_class_is_conjugation_invariant() {
        let w = Word::parse("abC").unwrap();
        let class = ConjugacyClass::of(&w);
        for c in words_up_to(3, 3) {
            assert_eq!(ConjugacyClass::of(&w.conjugate_by(&c)), class);
        }
        assert_eq!(ConjugacyClass::of(&w.inverse()), class);
    }

    #[test]
    fn class_enumeration_contains_fixed_points() {
        let classes = classes_up_to(2, 2);
        assert!(classes.contains(&ConjugacyClass::of(&Word::parse("a").unwrap())));
        assert!(classes.contains(&ConjugacyClass::of(&Word::parse("ab").unwrap())));
        // [ab] and [ba] coincide.
        assert_eq!(
            ConjugacyClass::of(&Word::parse("ab").unwrap()),
            ConjugacyClass::of(&Word::parse("ba").unwrap())
        );
    }

    #[test]
    fn alphabet_order() {
        let a = Letter::from_char('a').unwrap();
        let a_inv = Letter::from_char('A').unwrap();
        let b = Letter::from_char('b').unwrap();
        assert!(a < a_inv && a_inv < b);
    }
}
