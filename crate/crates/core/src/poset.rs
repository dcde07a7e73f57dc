//! Finite posets and the constructions that turn a group with a connection
//! set into posets and digraphs.
//!
//! Point layout of the constructions, for a group table with n elements:
//! the Cayley poset has minimal points `0..n` (the copy G) and maximal
//! points `n..2n` (the copy G′); the three-level poset built from a digraph
//! adds `2n..3n` (G″). Inside every copy, point `i` stands for table
//! element `i`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::GroupTable;

pub const DEFAULT_POINT_CAP: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("empty connection set")]
    EmptySet,
    #[error("the connection set is the whole group, its complement is empty")]
    WholeGroup,
    #[error("{points} points exceed the cap of {cap}")]
    TooLarge { points: usize, cap: usize },
    #[error("relation is not a strict partial order: {0}")]
    NotAnOrder(String),
    #[error("point index {0} out of range")]
    BadIndex(usize),
    #[error("cannot read poset: {0}")]
    Format(String),
}

/// Square bit matrix, one row of u64 words per point.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitMatrix {
    n: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> BitMatrix {
        let stride = n.div_ceil(64).max(1);
        BitMatrix { n, stride, bits: vec![0; n * stride] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.stride + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.stride + j / 64] |= 1 << (j % 64);
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.stride..(i + 1) * self.stride]
    }

    /// Indices set in row `i`, ascending.
    pub fn row_iter(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + b)
            })
        })
    }

    pub fn row_count(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::new(self.n);
        for i in 0..self.n {
            for j in self.row_iter(i) {
                t.set(j, i);
            }
        }
        t
    }

    /// Warshall closure in place.
    pub fn close_transitively(&mut self) {
        for k in 0..self.n {
            let row_k: Vec<u64> = self.row(k).to_vec();
            for i in 0..self.n {
                if self.get(i, k) {
                    let start = i * self.stride;
                    for (w, &b) in row_k.iter().enumerate() {
                        self.bits[start + w] |= b;
                    }
                }
            }
        }
    }

    /// Matrix with rows and columns renumbered: entry (p(i), p(j)) = (i, j).
    pub fn permuted(&self, perm: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::new(self.n);
        for i in 0..self.n {
            for j in self.row_iter(i) {
                out.set(perm[i], perm[j]);
            }
        }
        out
    }
}

/// A finite strict partial order with labeled points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePoset {
    labels: Vec<String>,
    less: BitMatrix,
    covers: Vec<(usize, usize)>,
}

impl FinitePoset {
    /// Transitive closure of the given pairs `(a, b)` meaning a < b.
    pub fn from_relations(labels: Vec<String>, pairs: &[(usize, usize)]) -> Result<FinitePoset, PosetError> {
        Self::from_relations_capped(labels, pairs, DEFAULT_POINT_CAP)
    }

    pub fn from_relations_capped(
        labels: Vec<String>,
        pairs: &[(usize, usize)],
        cap: usize,
    ) -> Result<FinitePoset, PosetError> {
        let n = labels.len();
        if n > cap {
            return Err(PosetError::TooLarge { points: n, cap });
        }
        let mut less = BitMatrix::new(n);
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(PosetError::BadIndex(a.max(b)));
            }
            less.set(a, b);
        }
        less.close_transitively();
        Self::from_order(labels, less)
    }

    /// Wraps a relation that must already be a strict order.
    pub fn from_order(labels: Vec<String>, less: BitMatrix) -> Result<FinitePoset, PosetError> {
        let n = labels.len();
        if less.len() != n {
            return Err(PosetError::NotAnOrder("matrix size differs from point count".into()));
        }
        for i in 0..n {
            if less.get(i, i) {
                return Err(PosetError::NotAnOrder(format!("cycle through {}", labels[i])));
            }
        }
        for i in 0..n {
            for j in less.row_iter(i) {
                if less.get(j, i) {
                    return Err(PosetError::NotAnOrder(format!("{} and {} are mutually below", labels[i], labels[j])));
                }
                for k in less.row_iter(j) {
                    if !less.get(i, k) {
                        return Err(PosetError::NotAnOrder("not transitive".into()));
                    }
                }
            }
        }
        let mut covers = Vec::new();
        for i in 0..n {
            for j in less.row_iter(i) {
                if !less.row_iter(i).any(|k| less.get(k, j)) {
                    covers.push((i, j));
                }
            }
        }
        Ok(FinitePoset { labels, less, covers })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    #[inline]
    pub fn less(&self, a: usize, b: usize) -> bool {
        self.less.get(a, b)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        a == b || self.less(a, b) || self.less(b, a)
    }

    pub fn order_matrix(&self) -> &BitMatrix {
        &self.less
    }

    /// Cover pairs `(a, b)` with a ⋖ b, sorted.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn covers_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::new(self.len());
        for &(a, b) in &self.covers {
            m.set(a, b);
        }
        m
    }

    /// Number of pairs a < b.
    pub fn relation_count(&self) -> usize {
        self.less.count()
    }

    pub fn above(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.less.row_iter(a)
    }

    pub fn below(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&b| self.less(b, a)).collect()
    }

    pub fn minimal_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| (0..self.len()).all(|b| !self.less(b, a))).collect()
    }

    pub fn maximal_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.less.row_count(a) == 0).collect()
    }

    /// Points strictly above every point of `set`.
    pub fn upper_bounds(&self, set: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|&u| set.iter().all(|&a| self.less(a, u))).collect()
    }

    /// Length of a longest chain at or below each point.
    pub fn depths(&self) -> Vec<usize> {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        let below_count: Vec<usize> = (0..n).map(|a| (0..n).filter(|&b| self.less(b, a)).count()).collect();
        order.sort_by_key(|&a| below_count[a]);
        let mut depth = vec![0usize; n];
        for &a in &order {
            for b in self.less.row_iter(a) {
                depth[b] = depth[b].max(depth[a] + 1);
            }
        }
        depth
    }

    /// Number of covers in a longest chain.
    pub fn height(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Connected components of the comparability graph, as point lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut i = 0;
            while i < members.len() {
                let a = members[i];
                for b in 0..n {
                    if comp[b] == usize::MAX && (self.less(a, b) || self.less(b, a)) {
                        comp[b] = id;
                        members.push(b);
                    }
                }
                i += 1;
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// The same points with the order reversed.
    pub fn opposite(&self) -> FinitePoset {
        let less = self.less.transpose();
        let mut covers: Vec<(usize, usize)> = self.covers.iter().map(|&(a, b)| (b, a)).collect();
        covers.sort_unstable();
        FinitePoset { labels: self.labels.clone(), less, covers }
    }

    /// Whether `perm` (point i ↦ perm[i]) preserves the order in both
    /// directions.
    pub fn is_automorphism(&self, perm: &[usize]) -> bool {
        if perm.len() != self.len() {
            return false;
        }
        let mut seen = vec![false; self.len()];
        if perm.iter().any(|&p| p >= self.len() || std::mem::replace(&mut seen[p], true)) {
            return false;
        }
        (0..self.len()).all(|a| (0..self.len()).all(|b| self.less(a, b) == self.less(perm[a], perm[b])))
    }

    pub fn to_json(&self) -> PosetJson {
        PosetJson { points: self.labels.clone(), covers: self.covers.iter().map(|&(a, b)| [a, b]).collect() }
    }

    pub fn from_json(json: &PosetJson) -> Result<FinitePoset, PosetError> {
        let pairs: Vec<(usize, usize)> = json.covers.iter().map(|c| (c[0], c[1])).collect();
        FinitePoset::from_relations(json.points.clone(), &pairs)
    }

    /// Hasse diagram, points ranked by depth.
    pub fn to_dot(&self) -> String {
        let depths = self.depths();
        let mut out = String::from("digraph hasse {\n  rankdir=BT;\n  node [shape=plaintext];\n");
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "  p{i} [label=\"{}\"];", l.replace('"', "'"));
        }
        for d in 0..=self.height() {
            let same: Vec<String> = (0..self.len()).filter(|&i| depths[i] == d).map(|i| format!("p{i}")).collect();
            if !same.is_empty() {
                let _ = writeln!(out, "  {{ rank=same; {} }}", same.join("; "));
            }
        }
        for &(a, b) in &self.covers {
            let _ = writeln!(out, "  p{a} -> p{b} [arrowhead=none];");
        }
        out.push_str("}\n");
        out
    }
}

/// JSON form of a poset: point labels and cover pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetJson {
    pub points: Vec<String>,
    pub covers: Vec<[usize; 2]>,
}

/// A directed graph on labeled vertices, optionally split into two parts
/// with all edges going from part 0 to part 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledDigraph {
    labels: Vec<String>,
    edges: Vec<(usize, usize)>,
    parts: Option<Vec<u8>>,
}

impl LabeledDigraph {
    pub fn new(labels: Vec<String>, mut edges: Vec<(usize, usize)>, parts: Option<Vec<u8>>) -> Result<LabeledDigraph, PosetError> {
        let n = labels.len();
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n) {
            return Err(PosetError::BadIndex(a.max(b)));
        }
        if let Some(p) = &parts {
            if p.len() != n || edges.iter().any(|&(a, b)| p[a] == p[b]) {
                return Err(PosetError::NotAnOrder("edge inside a part of the bipartition".into()));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(LabeledDigraph { labels, edges, parts })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn parts(&self) -> Option<&[u8]> {
        self.parts.as_deref()
    }

    pub fn adjacency(&self) -> BitMatrix {
        let mut m = BitMatrix::new(self.len());
        for &(a, b) in &self.edges {
            m.set(a, b);
        }
        m
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, _)| a == v).count()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a, b)).is_ok()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph g {\n");
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "  v{i} [label=\"{}\"];", l.replace('"', "'"));
        }
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "  v{a} -> v{b};");
        }
        out.push_str("}\n");
        out
    }
}

fn check_set(table: &GroupTable, set: &[usize]) -> Result<Vec<usize>, PosetError> {
    if set.is_empty() {
        return Err(PosetError::EmptySet);
    }
    if let Some(&s) = set.iter().find(|&&s| s >= table.order()) {
        return Err(PosetError::BadIndex(s));
    }
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    Ok(s)
}

fn primed(label: &str, primes: usize) -> String {
    format!("{label}{}", "'".repeat(primes))
}

/// The poset on G ⊔ G′ with g < h′ iff g⁻¹h ∈ S.
pub fn build_cayley_poset(table: &GroupTable, set: &[usize]) -> Result<FinitePoset, PosetError> {
    build_cayley_poset_capped(table, set, DEFAULT_POINT_CAP)
}

pub fn build_cayley_poset_capped(table: &GroupTable, set: &[usize], cap: usize) -> Result<FinitePoset, PosetError> {
    let set = check_set(table, set)?;
    let n = table.order();
    if 2 * n > cap {
        return Err(PosetError::TooLarge { points: 2 * n, cap });
    }
    let labels = (0..2)
        .flat_map(|copy| (0..n).map(move |i| (copy, i)))
        .map(|(copy, i)| primed(table.label(i), copy))
        .collect();
    let mut less = BitMatrix::new(2 * n);
    for g in 0..n {
        for &s in &set {
            less.set(g, n + table.mul(g, s));
        }
    }
    FinitePoset::from_order(labels, less)
}

/// The bipartite graph with edges (g, (gs)′); same pairs as the Cayley poset.
pub fn build_haar_graph(table: &GroupTable, set: &[usize]) -> Result<LabeledDigraph, PosetError> {
    let set = check_set(table, set)?;
    let n = table.order();
    let labels = (0..2).flat_map(|c| (0..n).map(move |i| primed(table.label(i), c))).collect();
    let edges = (0..n).flat_map(|g| set.iter().map(move |&s| (g, n + table.mul(g, s)))).collect();
    let parts = (0..2 * n).map(|i| (i >= n) as u8).collect();
    LabeledDigraph::new(labels, edges, Some(parts))
}

/// The digraph on G with edges (g, gs).
pub fn build_drr_digraph(table: &GroupTable, set: &[usize]) -> Result<LabeledDigraph, PosetError> {
    let n = table.order();
    if let Some(&s) = set.iter().find(|&&s| s >= n) {
        return Err(PosetError::BadIndex(s));
    }
    let labels = table.labels().to_vec();
    let edges = (0..n).flat_map(|g| set.iter().map(move |&s| (g, table.mul(g, s)))).collect();
    LabeledDigraph::new(labels, edges, None)
}

/// Three copies G, G′, G″ of the digraph's vertex set with g < g′ < g″ for
/// every g and g < h″ for every edge (g, h).
pub fn build_babai_poset(digraph: &LabeledDigraph) -> Result<FinitePoset, PosetError> {
    let n = digraph.len();
    if 3 * n > DEFAULT_POINT_CAP {
        return Err(PosetError::TooLarge { points: 3 * n, cap: DEFAULT_POINT_CAP });
    }
    let labels = (0..3).flat_map(|c| digraph.labels().iter().map(move |l| primed(l, c))).collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for g in 0..n {
        pairs.push((g, n + g));
        pairs.push((n + g, 2 * n + g));
    }
    for &(g, h) in digraph.edges() {
        pairs.push((g, 2 * n + h));
    }
    FinitePoset::from_relations(labels, &pairs)
}

/// G ∖ S.
pub fn complement_connection(table: &GroupTable, set: &[usize]) -> Result<Vec<usize>, PosetError> {
    let mut member = vec![false; table.order()];
    for &s in set {
        if s >= table.order() {
            return Err(PosetError::BadIndex(s));
        }
        member[s] = true;
    }
    let out: Vec<usize> = (0..table.order()).filter(|&g| !member[g]).collect();
    if out.is_empty() {
        return Err(PosetError::WholeGroup);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Group, GroupOps};

    fn table(desc: &str) -> GroupTable {
        GroupTable::new(&Group::parse(desc).unwrap()).unwrap()
    }

    fn idx(t: &GroupTable, g: &Group, s: &str) -> usize {
        t.index_of(&g.parse_element(s).unwrap()).unwrap()
    }

    fn set_of(desc: &str, elems: &[&str]) -> (GroupTable, Vec<usize>) {
        let g = Group::parse(desc).unwrap();
        let t = GroupTable::new(&g).unwrap();
        let s = elems.iter().map(|e| idx(&t, &g, e)).collect();
        (t, s)
    }

    #[test]
    fn cayley_poset_examples() {
        let (t, s) = set_of("z:9", &["0", "1", "3"]);
        let p = build_cayley_poset(&t, &s).unwrap();
        assert_eq!(p.len(), 18);
        assert_eq!(p.covers().len(), 27);
        assert_eq!(p.relation_count(), 27);
        assert_eq!(p.height(), 1);
        assert!(p.is_connected());

        let (t, s) = set_of("z:6", &["0", "3"]);
        assert_eq!(build_cayley_poset(&t, &s).unwrap().components().len(), 3);

        let t = table("z:1");
        let p = build_cayley_poset(&t, &[0]).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.less(0, 1));
        assert_eq!(p.labels(), ["0", "0'"]);

        assert_eq!(build_cayley_poset(&t, &[]), Err(PosetError::EmptySet));
        let big = table("sl2:7");
        assert!(matches!(build_cayley_poset(&big, &[0]), Err(PosetError::TooLarge { .. })));
    }

    #[test]
    fn haar_graph_matches_poset() {
        for desc in ["z:9", "s:3", "q8", "z2^k:3"] {
            let t = table(desc);
            for mask in 1u32..(1 << t.order()).min(64) {
                let s: Vec<usize> = (0..t.order()).filter(|i| mask >> i & 1 == 1).collect();
                let haar = build_haar_graph(&t, &s).unwrap();
                let p = build_cayley_poset(&t, &s).unwrap();
                assert_eq!(haar.edges(), p.covers());
            }
        }
        let t = table("z:2");
        let h = build_haar_graph(&t, &[0]).unwrap();
        assert_eq!(h.edges(), [(0, 2), (1, 3)]);
    }

    #[test]
    fn drr_digraph_examples() {
        let (t, s) = set_of("z:9", &["1", "3"]);
        let d = build_drr_digraph(&t, &s).unwrap();
        assert!((0..9).all(|v| d.out_degree(v) == 2));
        let (t, s) = set_of("z:9", &["0", "1"]);
        let d = build_drr_digraph(&t, &s).unwrap();
        assert!((0..9).all(|v| d.has_edge(v, v)));
    }

    #[test]
    fn babai_poset_shape() {
        let (t, s) = set_of("z:9", &["1", "3"]);
        let d = build_drr_digraph(&t, &s).unwrap();
        let p = build_babai_poset(&d).unwrap();
        assert_eq!(p.len(), 27);
        assert_eq!(p.height(), 2);
        for g in 9..18 {
            assert_eq!(p.covers().iter().filter(|&&(_, b)| b == g).count(), 1);
            assert_eq!(p.covers().iter().filter(|&&(a, _)| a == g).count(), 1);
        }
    }

    #[test]
    fn opposite_is_an_involution() {
        let (t, s) = set_of("s:3", &["e", "(12)", "(123)"]);
        let p = build_cayley_poset(&t, &s).unwrap();
        assert_eq!(p.opposite().opposite(), p);
        assert_eq!(p.opposite().minimal_points(), p.maximal_points());
    }

    #[test]
    fn complement_example() {
        let (t, s) = set_of("z:6", &["0", "1", "3"]);
        let c = complement_connection(&t, &s).unwrap();
        let g = Group::cyclic(6).unwrap();
        let labels: Vec<String> = c.iter().map(|&i| g.format_element(t.element(i))).collect();
        assert_eq!(labels, ["2", "4", "5"]);
        let all: Vec<usize> = (0..6).collect();
        assert_eq!(complement_connection(&t, &all), Err(PosetError::WholeGroup));
    }

    #[test]
    fn non_orders_are_rejected() {
        let labels = vec!["a".to_string(), "b".to_string()];
        assert!(FinitePoset::from_relations(labels.clone(), &[(0, 1), (1, 0)]).is_err());
        assert!(FinitePoset::from_relations(labels.clone(), &[(0, 0)]).is_err());
        let mut m = BitMatrix::new(3);
        m.set(0, 1);
        m.set(1, 2);
        let three = vec!["a".into(), "b".into(), "c".into()];
        assert!(FinitePoset::from_order(three, m).is_err());
    }

    #[test]
    fn closure_and_covers() {
        let labels: Vec<String> = (0..4).map(|i| i.to_string()).collect();
        let p = FinitePoset::from_relations(labels, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        assert!(p.less(0, 3));
        assert_eq!(p.covers(), [(0, 1), (1, 2), (2, 3)]);
        assert_eq!(p.height(), 3);
        assert_eq!(p.upper_bounds(&[0, 1]), [2, 3]);
    }

    #[test]
    fn json_round_trip() {
        let (t, s) = set_of("z:5", &["0", "2"]);
        let p = build_cayley_poset(&t, &s).unwrap();
        let text = serde_json::to_string(&p.to_json()).unwrap();
        let back: PosetJson = serde_json::from_str(&text).unwrap();
        assert_eq!(FinitePoset::from_json(&back).unwrap(), p);
        assert!(p.to_dot().contains("rank=same"));
    }

    // Connectivity holds exactly when SS⁻¹ generates the group.
    #[test]
    fn connectivity_matches_generation() {
        for desc in ["z:4", "z:6", "z:8", "z2^k:2", "z2^k:3", "s:3", "q8", "d:4", "prod(z:2,z:4)"] {
            let t = table(desc);
            for mask in 1u32..(1 << t.order()) {
                let s: Vec<usize> = (0..t.order()).filter(|i| mask >> i & 1 == 1).collect();
                let p = build_cayley_poset(&t, &s).unwrap();
                assert_eq!(p.height(), 1);
                let diff = crate::cayley::difference_set(&t, &s);
                let spans = t.generated(&diff).iter().all(|&b| b);
                assert_eq!(p.is_connected(), spans, "{desc} {mask:b}");
            }
        }
    }

    // Two minimal points have a common upper bound iff h ∈ gSS⁻¹.
    #[test]
    fn common_upper_bounds_match_neighborhoods() {
        for desc in ["z:12", "s:3", "q8", "d:6", "prod(z:2,z:6)"] {
            let t = table(desc);
            let n = t.order();
            for mask in [0b1011u32, 0b100110, 0b1110001, 0b10010011] {
                let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let p = build_cayley_poset(&t, &s).unwrap();
                let diff = crate::cayley::difference_set(&t, &s);
                for g in 0..n {
                    for h in 0..n {
                        let in_nb = diff.contains(&t.mul(t.inv(g), h));
                        assert_eq!(!p.upper_bounds(&[g, h]).is_empty(), in_nb);
                    }
                }
            }
        }
    }
}
