//! Words in free groups: free and cyclic reduction, evaluation in concrete
//! groups, Stallings folding and the combination of word equations into a
//! single word.

use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;
use thiserror::Error;

use crate::group::{GroupElement, GroupOps, GroupTable, Payload};

/// Generator names in order; uppercase denotes the inverse.
pub const GENERATOR_NAMES: [char; 8] = ['x', 'y', 'z', 'w', 'a', 'b', 'c', 'd'];
pub const MAX_RANK: usize = GENERATOR_NAMES.len();

const BITS_PER_LETTER: u32 = 4;
const LETTERS_PER_CHUNK: usize = 15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("cannot parse word `{0}`")]
    Parse(String),
    #[error("word uses generator {index} but only {available} images were given")]
    Arity { index: usize, available: usize },
    #[error("input word {0} is trivial")]
    TrivialInput(usize),
    #[error("no words given")]
    Empty,
}

/// A generator or its inverse. Generators are numbered from 0.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter {
    generator: u8,
    inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Letter {
        assert!(generator < MAX_RANK, "generator index out of range");
        Letter { generator: generator as u8, inverse }
    }

    pub fn generator(self) -> usize {
        self.generator as usize
    }

    pub fn is_inverse(self) -> bool {
        self.inverse
    }

    pub fn inv(self) -> Letter {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    /// Dense code in `0..2·rank`: generator `i` is `2i`, its inverse `2i+1`.
    pub fn code(self) -> usize {
        2 * self.generator as usize + self.inverse as usize
    }

    pub fn from_code(code: usize) -> Letter {
        Letter::new(code / 2, code % 2 == 1)
    }

    /// All `2·rank` letters, ordered by code.
    pub fn all(rank: usize) -> impl Iterator<Item = Letter> {
        (0..2 * rank).map(Letter::from_code)
    }

    fn name(self) -> char {
        let c = GENERATOR_NAMES[self.generator as usize];
        if self.inverse {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }
}

/// A freely reduced word.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct ReducedWord {
    letters: Vec<Letter>,
}

/// Freely reduces a letter sequence.
pub fn reduce(letters: &[Letter]) -> ReducedWord {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    ReducedWord { letters: out }
}

/// The cyclically reduced conjugate of `w`.
pub fn cyclic_reduce(w: &ReducedWord) -> ReducedWord {
    w.cyclic_decomposition().1
}

impl ReducedWord {
    pub fn empty() -> ReducedWord {
        ReducedWord::default()
    }

    pub fn generator(i: usize) -> ReducedWord {
        ReducedWord { letters: vec![Letter::new(i, false)] }
    }

    pub fn from_letters(letters: &[Letter]) -> ReducedWord {
        reduce(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// One more than the largest generator index used; 0 for the empty word.
    pub fn rank(&self) -> usize {
        self.letters.iter().map(|l| l.generator() + 1).max().unwrap_or(0)
    }

    pub fn concat(&self, other: &ReducedWord) -> ReducedWord {
        let mut cancel = 0;
        while cancel < self.len().min(other.len())
            && self.letters[self.len() - 1 - cancel] == other.letters[cancel].inv()
        {
            cancel += 1;
        }
        let mut letters = Vec::with_capacity(self.len() + other.len() - 2 * cancel);
        letters.extend_from_slice(&self.letters[..self.len() - cancel]);
        letters.extend_from_slice(&other.letters[cancel..]);
        ReducedWord { letters }
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord { letters: self.letters.iter().rev().map(|l| l.inv()).collect() }
    }

    pub fn pow(&self, n: i64) -> ReducedWord {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = ReducedWord::empty();
        for _ in 0..n.unsigned_abs() {
            acc = acc.concat(&base);
        }
        acc
    }

    pub fn commutator(a: &ReducedWord, b: &ReducedWord) -> ReducedWord {
        a.concat(b).concat(&a.inverse()).concat(&b.inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.len() < 2 || self.letters[0] != self.letters[self.len() - 1].inv()
    }

    /// Writes `w = c · v · c⁻¹` with `v` cyclically reduced; returns `(c, v)`.
    pub fn cyclic_decomposition(&self) -> (ReducedWord, ReducedWord) {
        let n = self.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.letters[k] == self.letters[n - 1 - k].inv() {
            k += 1;
        }
        (
            ReducedWord { letters: self.letters[..k].to_vec() },
            ReducedWord { letters: self.letters[k..n - k].to_vec() },
        )
    }

    /// Cyclic rotation by `shift` letters; only meaningful for cyclically
    /// reduced words, where it stays reduced.
    pub fn rotate(&self, shift: usize) -> ReducedWord {
        let mut letters = self.letters.clone();
        if !letters.is_empty() {
            let s = shift % letters.len();
            letters.rotate_left(s);
        }
        ReducedWord { letters }
    }

    /// Shortest `r` with `self = r^k`; assumes `self` cyclically reduced.
    pub fn primitive_root(&self) -> (ReducedWord, usize) {
        let n = self.len();
        if n == 0 {
            return (ReducedWord::empty(), 1);
        }
        for period in 1..=n {
            if n % period == 0 && (period..n).all(|i| self.letters[i] == self.letters[i - period]) {
                return (ReducedWord { letters: self.letters[..period].to_vec() }, n / period);
            }
        }
        unreachable!()
    }

    /// Product of the images letter by letter.
    pub fn evaluate(&self, group: &dyn GroupOps, images: &[GroupElement]) -> Result<GroupElement, WordError> {
        self.check_arity(images.len())?;
        let inverses: Vec<GroupElement> = images.iter().map(|g| group.inverse(g)).collect();
        let mut acc = group.identity();
        for l in &self.letters {
            let g = if l.inverse { &inverses[l.generator()] } else { &images[l.generator()] };
            acc = group.multiply(&acc, g);
        }
        Ok(acc)
    }

    /// Evaluation on a multiplication table, images given by index.
    pub fn evaluate_indexed(&self, table: &GroupTable, images: &[usize]) -> Result<usize, WordError> {
        self.check_arity(images.len())?;
        let mut acc = table.identity();
        for l in &self.letters {
            let g = images[l.generator()];
            acc = table.mul(acc, if l.inverse { table.inv(g) } else { g });
        }
        Ok(acc)
    }

    fn check_arity(&self, available: usize) -> Result<(), WordError> {
        match self.rank() {
            r if r > available => Err(WordError::Arity { index: r - 1, available }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if run == 1 {
                write!(f, "{}", l.name())?;
            } else {
                write!(f, "{}^{}", l.name(), run)?;
            }
            i += run;
        }
        Ok(())
    }
}

/// Accepts `x y X Y`, `xyXY`, `x^3 y^-2`, `x^{-1}` and `1`/`e` for the
/// empty word. Uppercase letters are inverses.
impl FromStr for ReducedWord {
    type Err = WordError;

    fn from_str(text: &str) -> Result<ReducedWord, WordError> {
        let bad = || WordError::Parse(text.to_string());
        let t = text.trim();
        if t.is_empty() || t == "1" || t == "e" {
            return Ok(ReducedWord::empty());
        }
        let chars: Vec<char> = t.chars().collect();
        let mut letters = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() || c == '*' || c == '.' {
                i += 1;
                continue;
            }
            let g = GENERATOR_NAMES.iter().position(|&n| n == c.to_ascii_lowercase()).ok_or_else(bad)?;
            let base = Letter::new(g, c.is_ascii_uppercase());
            i += 1;
            let mut exp: i64 = 1;
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let braced = i < chars.len() && chars[i] == '{';
                if braced {
                    i += 1;
                }
                let start = i;
                if i < chars.len() && chars[i] == '-' {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                exp = s.parse().map_err(|_| bad())?;
                if braced {
                    if i >= chars.len() || chars[i] != '}' {
                        return Err(bad());
                    }
                    i += 1;
                }
            }
            let l = if exp < 0 { base.inv() } else { base };
            for _ in 0..exp.unsigned_abs() {
                letters.push(l);
            }
        }
        Ok(reduce(&letters))
    }
}

/// All reduced words of length exactly `len` over `rank` generators, in
/// lexicographic order of letter codes.
pub fn reduced_words_of_length(rank: usize, len: usize) -> Vec<ReducedWord> {
    let mut out = vec![ReducedWord::empty()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * (2 * rank).saturating_sub(1).max(1));
        for w in &out {
            for l in Letter::all(rank) {
                if w.letters.last() != Some(&l.inv()) {
                    let mut letters = w.letters.clone();
                    letters.push(l);
                    next.push(ReducedWord { letters });
                }
            }
        }
        out = next;
    }
    out
}

/// All reduced words of length `1..=max_len`.
pub fn nontrivial_words_up_to(rank: usize, max_len: usize) -> Vec<ReducedWord> {
    (1..=max_len).flat_map(|n| reduced_words_of_length(rank, n)).collect()
}

/// Packs a word into a group element payload: the length followed by
/// 4-bit letter codes, 15 per slot.
pub fn pack(rank: usize, w: &ReducedWord) -> GroupElement {
    debug_assert!(w.rank() <= rank);
    let mut payload: Payload = SmallVec::new();
    payload.push(w.len() as i64);
    for chunk in w.letters.chunks(LETTERS_PER_CHUNK) {
        let mut v: i64 = 0;
        for (i, l) in chunk.iter().enumerate() {
            v |= (l.code() as i64) << (BITS_PER_LETTER * i as u32);
        }
        payload.push(v);
    }
    GroupElement::from_payload(payload)
}

pub fn unpack(rank: usize, payload: &[i64]) -> ReducedWord {
    try_unpack(rank, payload).expect("payload is a packed reduced word")
}

/// Inverse of [`pack`]; `None` if the payload is not a canonical packed
/// reduced word of the given rank.
pub fn try_unpack(rank: usize, payload: &[i64]) -> Option<ReducedWord> {
    let (&len, chunks) = payload.split_first()?;
    let len = usize::try_from(len).ok()?;
    if chunks.len() != len.div_ceil(LETTERS_PER_CHUNK) {
        return None;
    }
    let mut letters = Vec::with_capacity(len);
    for (c, &v) in chunks.iter().enumerate() {
        let count = (len - c * LETTERS_PER_CHUNK).min(LETTERS_PER_CHUNK);
        if v < 0 || (count < 16 && (v >> (BITS_PER_LETTER * count as u32)) != 0) {
            return None;
        }
        for i in 0..count {
            let code = ((v >> (BITS_PER_LETTER * i as u32)) & 0xf) as usize;
            if code >= 2 * rank {
                return None;
            }
            letters.push(Letter::from_code(code));
        }
    }
    let w = ReducedWord { letters };
    (reduce(&w.letters) == w).then_some(w)
}

/// A folded labeled graph with a base vertex; the subgroup it represents is
/// the set of labels of closed paths at the base.
#[derive(Clone, Debug)]
pub struct StallingsGraph {
    vertex_count: usize,
    /// Edges `(source, generator, target)`, each read forwards as the
    /// generator and backwards as its inverse.
    edges: Vec<(usize, usize, usize)>,
    base: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut v: usize) -> usize {
        while self.0[v] != v {
            self.0[v] = self.0[self.0[v]];
            v = self.0[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        self.0[hi] = lo;
        true
    }
}

impl StallingsGraph {
    /// Folds the bouquet of the given words at a common base.
    pub fn from_words(words: &[ReducedWord]) -> StallingsGraph {
        let mut vertex_count = 1;
        let mut edges = Vec::new();
        for w in words {
            if w.is_empty() {
                continue;
            }
            let mut at = 0;
            for (i, l) in w.letters.iter().enumerate() {
                let next = if i + 1 == w.len() {
                    0
                } else {
                    vertex_count += 1;
                    vertex_count - 1
                };
                if l.inverse {
                    edges.push((next, l.generator(), at));
                } else {
                    edges.push((at, l.generator(), next));
                }
                at = next;
            }
        }
        let mut graph = StallingsGraph { vertex_count, edges, base: 0 };
        graph.fold();
        graph.trim();
        graph
    }

    fn fold(&mut self) {
        let mut uf = UnionFind((0..self.vertex_count).collect());
        loop {
            let mut changed = false;
            let mut out: rustc_hash::FxHashMap<(usize, usize), usize> = Default::default();
            let mut inc: rustc_hash::FxHashMap<(usize, usize), usize> = Default::default();
            for &(s, g, t) in &self.edges {
                let (s, t) = (uf.find(s), uf.find(t));
                if let Some(&t2) = out.get(&(s, g)) {
                    changed |= uf.union(t, t2);
                } else {
                    out.insert((s, g), t);
                }
                let t = uf.find(t);
                if let Some(&s2) = inc.get(&(t, g)) {
                    changed |= uf.union(s, s2);
                } else {
                    inc.insert((t, g), s);
                }
            }
            if !changed {
                break;
            }
        }
        let mut edges: Vec<_> = self.edges.iter().map(|&(s, g, t)| (uf.find(s), g, uf.find(t))).collect();
        edges.sort_unstable();
        edges.dedup();
        self.base = uf.find(self.base);
        self.relabel(edges);
    }

    // Drops non-base vertices of degree one until none remain.
    fn trim(&mut self) {
        let mut edges = self.edges.clone();
        loop {
            let mut degree = vec![0usize; self.vertex_count];
            for &(s, _, t) in &edges {
                degree[s] += 1;
                degree[t] += 1;
            }
            let before = edges.len();
            edges.retain(|&(s, _, t)| {
                !(s != self.base && degree[s] == 1 || t != self.base && degree[t] == 1)
            });
            if edges.len() == before {
                break;
            }
        }
        self.relabel(edges);
    }

    fn relabel(&mut self, edges: Vec<(usize, usize, usize)>) {
        let mut map = vec![usize::MAX; self.vertex_count];
        map[self.base] = 0;
        let mut next = 1;
        for &(s, _, t) in &edges {
            for v in [s, t] {
                if map[v] == usize::MAX {
                    map[v] = next;
                    next += 1;
                }
            }
        }
        self.edges = edges.into_iter().map(|(s, g, t)| (map[s], g, map[t])).collect();
        self.edges.sort_unstable();
        self.vertex_count = next;
        self.base = 0;
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize, usize)] {
        &self.edges
    }

    /// Rank of the represented subgroup: edges minus vertices plus one.
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.vertex_count
    }

    /// No vertex has two outgoing or two incoming edges with the same label.
    pub fn is_folded(&self) -> bool {
        let mut out = rustc_hash::FxHashSet::default();
        let mut inc = rustc_hash::FxHashSet::default();
        self.edges.iter().all(|&(s, g, t)| out.insert((s, g)) && inc.insert((t, g)))
    }

    /// Whether `w` labels a closed path at the base, i.e. lies in the subgroup.
    pub fn accepts(&self, w: &ReducedWord) -> bool {
        let mut at = self.base;
        for l in &w.letters {
            let step = if l.inverse {
                self.edges.iter().find(|&&(_, g, t)| t == at && g == l.generator()).map(|e| e.0)
            } else {
                self.edges.iter().find(|&&(s, g, _)| s == at && g == l.generator()).map(|e| e.2)
            };
            match step {
                Some(v) => at = v,
                None => return false,
            }
        }
        at == self.base
    }
}

/// Rank of ⟨w1, w2⟩ and, when it is cyclic and nontrivial, a generator `u`
/// with `w1 = u^l` and `w2 = u^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupRank {
    pub rank: usize,
    pub generator: Option<ReducedWord>,
    pub exponents: Option<(i64, i64)>,
}

pub fn stallings_rank(w1: &ReducedWord, w2: &ReducedWord) -> SubgroupRank {
    let graph = StallingsGraph::from_words(&[w1.clone(), w2.clone()]);
    let rank = graph.rank();
    if rank != 1 {
        return SubgroupRank { rank, generator: None, exponents: None };
    }
    let seed = if w1.is_empty() { w2 } else { w1 };
    let (conj, core) = seed.cyclic_decomposition();
    let (root, _) = core.primitive_root();
    let u = conj.concat(&root).concat(&conj.inverse());
    let l = exponent_of(w1, &u, root.len());
    let m = exponent_of(w2, &u, root.len());
    SubgroupRank { rank, generator: Some(u), exponents: Some((l, m)) }
}

fn exponent_of(w: &ReducedWord, u: &ReducedWord, root_len: usize) -> i64 {
    let k = (cyclic_reduce(w).len() / root_len) as i64;
    if u.pow(k) == *w {
        k
    } else {
        debug_assert_eq!(u.pow(-k), *w, "word is not a power of the cyclic generator");
        -k
    }
}

/// A nontrivial word solved by every solution of any of the inputs, folded
/// pairwise from the left: `u^{lm}` when a pair generates a cyclic subgroup,
/// the commutator otherwise.
pub fn combine_words(words: &[ReducedWord]) -> Result<ReducedWord, WordError> {
    if words.is_empty() {
        return Err(WordError::Empty);
    }
    if let Some(i) = words.iter().position(|w| w.is_empty()) {
        return Err(WordError::TrivialInput(i));
    }
    let mut acc = words[0].clone();
    for w in &words[1..] {
        acc = combine_pair(&acc, w);
    }
    Ok(acc)
}

fn combine_pair(w1: &ReducedWord, w2: &ReducedWord) -> ReducedWord {
    let info = stallings_rank(w1, w2);
    match (info.rank, info.generator, info.exponents) {
        (1, Some(u), Some((l, m))) => u.pow(l * m),
        _ => ReducedWord::commutator(w1, w2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;
    use proptest::prelude::*;

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(w("x X y"), w("y"));
        assert_eq!(w(""), ReducedWord::empty());
        assert_eq!(w("x y Y x"), w("x^2"));
        assert_eq!(w("x^2").to_string(), "x^2");
        assert_eq!(w("x^-1 y").to_string(), "X y");
        assert_eq!(w("x^{-2}"), w("XX"));
    }

    #[test]
    fn cyclic_reduction_examples() {
        assert_eq!(cyclic_reduce(&w("X y x")), w("y"));
        assert_eq!(cyclic_reduce(&w("x y X y")), w("x y X y"));
        assert_eq!(cyclic_reduce(&w("x y y X")), w("y^2"));
        let (c, v) = w("x y y X").cyclic_decomposition();
        assert_eq!(c.concat(&v).concat(&c.inverse()), w("x y y X"));
    }

    #[test]
    fn evaluation_examples() {
        let z5 = Group::cyclic(5).unwrap();
        let two = z5.parse_element("2").unwrap();
        assert_eq!(z5.format_element(&w("x^2").evaluate(&z5, &[two]).unwrap()), "4");
        let z6 = Group::cyclic(6).unwrap();
        for a in z6.elements().unwrap() {
            for b in z6.elements().unwrap() {
                let v = w("x y X Y").evaluate(&z6, &[a.clone(), b]).unwrap();
                assert_eq!(v, z6.identity());
            }
        }
        let sl = Group::sl2(5).unwrap();
        let (x, _) = crate::group::margulis_generators(5).unwrap();
        assert_eq!(w("x^5").evaluate(&sl, &[x]).unwrap(), sl.identity());
        assert!(w("x y").evaluate(&z6, &[z6.identity()]).is_err());
    }

    #[test]
    fn rank_examples() {
        let r = stallings_rank(&w("x^2"), &w("x^3"));
        assert_eq!(r.rank, 1);
        assert_eq!(r.generator, Some(w("x")));
        assert_eq!(r.exponents, Some((2, 3)));
        assert_eq!(stallings_rank(&w("x"), &w("y")).rank, 2);
        assert_eq!(stallings_rank(&w("x y X"), &w("y")).rank, 2);
        assert_eq!(stallings_rank(&w(""), &w("")).rank, 0);
        let r = stallings_rank(&w("x y X"), &w("x Y^2 X"));
        assert_eq!(r.rank, 1);
        assert_eq!(r.generator, Some(w("x y X")));
        assert_eq!(r.exponents, Some((1, -2)));
        let r = stallings_rank(&w(""), &w("y^4"));
        assert_eq!((r.rank, r.exponents), (1, Some((0, 4))));
    }

    #[test]
    fn combine_examples() {
        assert_eq!(combine_words(&[w("x^2"), w("x^3")]).unwrap(), w("x^6"));
        assert_eq!(combine_words(&[w("x"), w("y")]).unwrap(), w("x y X Y"));
        assert!(combine_words(&[w("x"), w("")]).is_err());
        assert!(combine_words(&[]).is_err());
    }

    // Two elements of a free group generate a cyclic subgroup exactly when
    // they commute.
    fn commutation_rank(a: &ReducedWord, b: &ReducedWord) -> usize {
        match (a.is_empty(), b.is_empty()) {
            (true, true) => 0,
            (true, false) | (false, true) => 1,
            _ if a.concat(b) == b.concat(a) => 1,
            _ => 2,
        }
    }

    #[test]
    fn folding_rank_matches_commutation() {
        let mut words = nontrivial_words_up_to(2, 4);
        words.push(ReducedWord::empty());
        for a in &words {
            for b in &words {
                let r = stallings_rank(a, b);
                assert_eq!(r.rank, commutation_rank(a, b), "{a} / {b}");
                let g = StallingsGraph::from_words(&[a.clone(), b.clone()]);
                assert!(g.is_folded());
                assert!(g.accepts(a) && g.accepts(b));
            }
        }
    }

    #[test]
    fn packing_round_trips() {
        for word in nontrivial_words_up_to(2, 4) {
            let p = pack(2, &word);
            assert_eq!(unpack(2, p.payload()), word);
        }
        let long = w("x y").pow(20);
        assert_eq!(unpack(2, pack(2, &long).payload()), long);
        assert!(try_unpack(2, &[1, 7]).is_none());
        assert!(try_unpack(2, &[2, 0b0001_0000]).is_none());
    }

    #[test]
    fn word_counts() {
        for n in 0..6 {
            let expected = if n == 0 { 1 } else { 4 * 3usize.pow(n as u32 - 1) };
            assert_eq!(reduced_words_of_length(2, n).len(), expected);
        }
    }

    fn arb_word(max_len: usize) -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec((0usize..2, any::<bool>()), 0..max_len)
            .prop_map(|ls| reduce(&ls.into_iter().map(|(g, i)| Letter::new(g, i)).collect::<Vec<_>>()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn reduce_is_idempotent_and_cancels_inverse(word in arb_word(24)) {
            prop_assert_eq!(reduce(word.letters()), word.clone());
            prop_assert!(word.concat(&word.inverse()).is_empty());
            prop_assert_eq!(word.to_string().parse::<ReducedWord>().unwrap(), word);
        }
    }

    proptest! {
        #[test]
        fn evaluation_is_multiplicative(a in arb_word(12), b in arb_word(12), i in 0usize..24, j in 0usize..24) {
            let s4 = Group::symmetric(4).unwrap();
            let els = s4.elements().unwrap();
            let imgs = [els[i].clone(), els[j].clone()];
            let lhs = a.concat(&b).evaluate(&s4, &imgs).unwrap();
            let rhs = s4.multiply(&a.evaluate(&s4, &imgs).unwrap(), &b.evaluate(&s4, &imgs).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn rank_one_gives_powers(a in arb_word(8), b in arb_word(8)) {
            let r = stallings_rank(&a, &b);
            if let (Some(u), Some((l, m))) = (r.generator, r.exponents) {
                prop_assert_eq!(u.pow(l), a.clone());
                prop_assert_eq!(u.pow(m), b.clone());
                let q8 = Group::Quaternion;
                let els = q8.elements().unwrap();
                for x in &els {
                    for y in &els {
                        let imgs = [x.clone(), y.clone()];
                        let uv = u.evaluate(&q8, &imgs).unwrap();
                        prop_assert_eq!(a.evaluate(&q8, &imgs).unwrap(), q8.pow(&uv, l));
                    }
                }
            }
        }

        #[test]
        fn cyclic_reduction_is_a_conjugate(a in arb_word(16)) {
            let (c, v) = a.cyclic_decomposition();
            prop_assert!(v.is_cyclically_reduced());
            prop_assert_eq!(c.concat(&v).concat(&c.inverse()), a);
        }
    }
}
