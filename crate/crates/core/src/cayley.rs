//! Cayley graphs with respect to a tuple of generators: balls, girth,
//! S-neighborhoods and affinity.
//!
//! A generator that is the identity contributes a loop at every vertex and a
//! generator of order two a double edge, so the graph has girth one or two
//! in those cases. Closed walks without backtracking correspond to reduced
//! words, which is how girth is computed.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::freegroup::{Letter, ReducedWord};
use crate::group::{GroupElement, GroupOps, GroupTable};

pub const DEFAULT_GIRTH_LIMIT: usize = 24;
pub const DEFAULT_NODE_BUDGET: usize = 8_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CayleyError {
    #[error("no generators given")]
    NoGenerators,
    #[error("at most {max} generators are supported, got {got}")]
    TooManyGenerators { max: usize, got: usize },
    #[error("ball exceeded the budget of {budget} nodes at radius {radius}")]
    Budget { budget: usize, radius: usize },
    #[error("empty connection set")]
    EmptySet,
}

/// Result of a girth search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Girth {
    /// Shortest relation, with a reduced word of that length evaluating to e.
    Finite { length: usize, witness: ReducedWord },
    /// No nontrivial reduced word of length at most the limit is trivial.
    ExceedsLimit(usize),
}

impl Girth {
    pub fn length(&self) -> Option<usize> {
        match self {
            Girth::Finite { length, .. } => Some(*length),
            Girth::ExceedsLimit(_) => None,
        }
    }

    /// Whether the girth is known to be strictly greater than `n`.
    pub fn exceeds(&self, n: usize) -> bool {
        match self {
            Girth::Finite { length, .. } => *length > n,
            Girth::ExceedsLimit(limit) => *limit >= n,
        }
    }
}

impl std::fmt::Display for Girth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Girth::Finite { length, .. } => write!(f, "{length}"),
            Girth::ExceedsLimit(limit) => write!(f, "> {limit}"),
        }
    }
}

struct Node {
    element: GroupElement,
    depth: usize,
    /// Parent node and the letter leading from it; the root has none.
    parent: Option<(usize, Letter)>,
}

/// Cayley graph of a group with respect to an ordered generator tuple.
pub struct CayleyGraph<'a> {
    group: &'a dyn GroupOps,
    gens: Vec<GroupElement>,
    steps: Vec<GroupElement>,
    node_budget: usize,
}

impl<'a> CayleyGraph<'a> {
    pub fn new(group: &'a dyn GroupOps, gens: Vec<GroupElement>) -> Result<CayleyGraph<'a>, CayleyError> {
        if gens.is_empty() {
            return Err(CayleyError::NoGenerators);
        }
        if gens.len() > crate::freegroup::MAX_RANK {
            return Err(CayleyError::TooManyGenerators { max: crate::freegroup::MAX_RANK, got: gens.len() });
        }
        let steps = Letter::all(gens.len())
            .map(|l| {
                let g = &gens[l.generator()];
                if l.is_inverse() {
                    group.inverse(g)
                } else {
                    g.clone()
                }
            })
            .collect();
        Ok(CayleyGraph { group, gens, steps, node_budget: DEFAULT_NODE_BUDGET })
    }

    pub fn with_node_budget(mut self, budget: usize) -> Self {
        self.node_budget = budget;
        self
    }

    pub fn group(&self) -> &dyn GroupOps {
        self.group
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.gens
    }

    /// Vertex degree counting loops and multiple edges: 2 per generator.
    pub fn degree(&self) -> usize {
        2 * self.gens.len()
    }

    fn step(&self, g: &GroupElement, l: Letter) -> GroupElement {
        self.group.multiply(g, &self.steps[l.code()])
    }

    /// Length of the shortest nontrivial reduced word in the generators that
    /// evaluates to the identity, if it is at most `limit`.
    ///
    /// Breadth-first search from e over non-backtracking steps; every edge
    /// closing a cycle yields a relation of length d(u) + 1 + d(v), and the
    /// smallest of these is the girth because the graph is vertex-transitive.
    pub fn girth(&self, limit: usize) -> Result<Girth, CayleyError> {
        if limit == 0 {
            return Ok(Girth::ExceedsLimit(0));
        }
        let mut nodes = vec![Node { element: self.group.identity(), depth: 0, parent: None }];
        let mut index: FxHashMap<GroupElement, usize> = FxHashMap::default();
        index.insert(self.group.identity(), 0);
        let rank = self.gens.len();
        let max_depth = (limit - 1) / 2;
        let mut best: Option<(usize, usize, Letter, usize)> = None;
        let mut level_start = 0;
        for depth in 0..=max_depth {
            let level_end = nodes.len();
            if level_start == level_end {
                break;
            }
            if let Some((len, ..)) = best {
                if len <= 2 * depth + 1 {
                    break;
                }
            }
            for u in level_start..level_end {
                let back = nodes[u].parent.map(|(_, l)| l.inv());
                for l in Letter::all(rank) {
                    if Some(l) == back {
                        continue;
                    }
                    let v_el = self.step(&nodes[u].element, l);
                    match index.get(&v_el) {
                        Some(&v) => {
                            let len = depth + 1 + nodes[v].depth;
                            if len <= limit && best.is_none_or(|(b, ..)| len < b) {
                                best = Some((len, u, l, v));
                            }
                        }
                        None => {
                            if nodes.len() >= self.node_budget {
                                return Err(CayleyError::Budget { budget: self.node_budget, radius: depth });
                            }
                            index.insert(v_el.clone(), nodes.len());
                            nodes.push(Node { element: v_el, depth: depth + 1, parent: Some((u, l)) });
                        }
                    }
                }
            }
            level_start = level_end;
        }
        Ok(match best {
            Some((length, u, l, v)) => {
                let witness = path_word(&nodes, u)
                    .concat(&ReducedWord::from_letters(&[l]))
                    .concat(&path_word(&nodes, v).inverse());
                debug_assert_eq!(witness.len(), length);
                Girth::Finite { length, witness }
            }
            None => Girth::ExceedsLimit(limit),
        })
    }

    /// All vertices within distance `radius` of e, in breadth-first order.
    pub fn ball(&self, radius: usize) -> Result<BfsBall, CayleyError> {
        let mut nodes = vec![Node { element: self.group.identity(), depth: 0, parent: None }];
        let mut index: FxHashMap<GroupElement, usize> = FxHashMap::default();
        index.insert(self.group.identity(), 0);
        let mut level_start = 0;
        for depth in 0..radius {
            let level_end = nodes.len();
            for u in level_start..level_end {
                let back = nodes[u].parent.map(|(_, l)| l.inv());
                for l in Letter::all(self.gens.len()) {
                    if Some(l) == back {
                        continue;
                    }
                    let v_el = self.step(&nodes[u].element, l);
                    if index.contains_key(&v_el) {
                        continue;
                    }
                    if nodes.len() >= self.node_budget {
                        return Err(CayleyError::Budget { budget: self.node_budget, radius: depth });
                    }
                    index.insert(v_el.clone(), nodes.len());
                    nodes.push(Node { element: v_el, depth: depth + 1, parent: Some((u, l)) });
                }
            }
            level_start = level_end;
        }
        let mut edges = Vec::new();
        for (u, node) in nodes.iter().enumerate() {
            for k in 0..self.gens.len() {
                if let Some(&v) = index.get(&self.step(&node.element, Letter::new(k, false))) {
                    edges.push((u, k, v));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let words = (0..nodes.len()).map(|i| path_word(&nodes, i)).collect();
        Ok(BfsBall {
            radius,
            elements: nodes.iter().map(|n| n.element.clone()).collect(),
            distances: nodes.iter().map(|n| n.depth).collect(),
            words,
            edges,
        })
    }

    /// DOT rendering of the ball of the given radius; vertices labeled by
    /// element, edges by generator.
    pub fn ball_dot(&self, radius: usize) -> Result<String, CayleyError> {
        let ball = self.ball(radius)?;
        let mut out = String::from("digraph cayley {\n  node [shape=circle];\n");
        for (i, g) in ball.elements.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", self.group.format_element(g).replace('"', "'"));
        }
        for &(u, g, v) in &ball.edges {
            let name = crate::freegroup::GENERATOR_NAMES[g];
            let _ = writeln!(out, "  n{u} -> n{v} [label=\"{name}\"];");
        }
        out.push_str("}\n");
        Ok(out)
    }
}

fn path_word(nodes: &[Node], mut i: usize) -> ReducedWord {
    let mut letters = Vec::with_capacity(nodes[i].depth);
    while let Some((p, l)) = nodes[i].parent {
        letters.push(l);
        i = p;
    }
    letters.reverse();
    ReducedWord::from_letters(&letters)
}

/// A ball around e: elements in breadth-first order with their distances,
/// a geodesic word for each, and the edges `(from, generator, to)` with
/// both endpoints inside.
#[derive(Clone, Debug)]
pub struct BfsBall {
    pub radius: usize,
    pub elements: Vec<GroupElement>,
    pub distances: Vec<usize>,
    pub words: Vec<ReducedWord>,
    pub edges: Vec<(usize, usize, usize)>,
}

impl BfsBall {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn distance_of(&self, g: &GroupElement) -> Option<usize> {
        self.elements.iter().position(|h| h == g).map(|i| self.distances[i])
    }
}

/// The set g·S·S⁻¹, sorted.
pub fn neighborhood(group: &dyn GroupOps, set: &[GroupElement], g: &GroupElement) -> Result<Vec<GroupElement>, CayleyError> {
    if set.is_empty() {
        return Err(CayleyError::EmptySet);
    }
    let mut out = BTreeSet::new();
    for s in set {
        let gs = group.multiply(g, s);
        for t in set {
            out.insert(group.multiply(&gs, &group.inverse(t)));
        }
    }
    Ok(out.into_iter().collect())
}

/// |N_S(g) ∩ N_S(h)|.
pub fn affinity(group: &dyn GroupOps, set: &[GroupElement], g: &GroupElement, h: &GroupElement) -> Result<usize, CayleyError> {
    let a = neighborhood(group, set, g)?;
    let b = neighborhood(group, set, h)?;
    let b: BTreeSet<_> = b.into_iter().collect();
    Ok(a.iter().filter(|x| b.contains(*x)).count())
}

/// The set S·S⁻¹ as table indices, sorted.
pub fn difference_set(table: &GroupTable, set: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> =
        set.iter().flat_map(|&s| set.iter().map(move |&t| table.mul(s, table.inv(t)))).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Affinity matrix over a finite group: entry (g, h) is |gSS⁻¹ ∩ hSS⁻¹|.
/// Depends only on g⁻¹h, so it is computed from one row.
pub fn affinity_matrix(table: &GroupTable, set: &[usize]) -> Vec<Vec<u32>> {
    let n = table.order();
    let diff = difference_set(table, set);
    let mut mark = vec![false; n];
    for &d in &diff {
        mark[d] = true;
    }
    // α(e, k) = #{d ∈ D : k⁻¹d ∈ D}
    let base: Vec<u32> = (0..n)
        .map(|k| diff.iter().filter(|&&d| mark[table.mul(table.inv(k), d)]).count() as u32)
        .collect();
    (0..n).map(|g| (0..n).map(|h| base[table.mul(table.inv(g), h)]).collect()).collect()
}

/// DOT rendering of the full Cayley digraph of a finite group.
pub fn cayley_dot(table: &GroupTable, gens: &[usize]) -> String {
    let mut out = String::from("digraph cayley {\n  node [shape=circle];\n");
    for i in 0..table.order() {
        let _ = writeln!(out, "  n{i} [label=\"{}\"];", table.label(i).replace('"', "'"));
    }
    for i in 0..table.order() {
        for (k, &s) in gens.iter().enumerate() {
            let name = crate::freegroup::GENERATOR_NAMES[k];
            let _ = writeln!(out, "  n{i} -> n{} [label=\"{name}\"];", table.mul(i, s));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freegroup::nontrivial_words_up_to;
    use crate::group::{margulis_generators, Group};

    fn el(g: &Group, s: &str) -> GroupElement {
        g.parse_element(s).unwrap()
    }

    // Naive oracle: shortest nontrivial reduced word that evaluates to e.
    fn naive_girth(group: &Group, gens: &[GroupElement], max_len: usize) -> Option<usize> {
        nontrivial_words_up_to(gens.len(), max_len)
            .into_iter()
            .find(|w| w.evaluate(group, gens).unwrap() == group.identity())
            .map(|w| w.len())
    }

    #[test]
    fn girth_examples() {
        let f2 = Group::free(2).unwrap();
        let gens = vec![el(&f2, "x"), el(&f2, "y")];
        let g = CayleyGraph::new(&f2, gens).unwrap().girth(DEFAULT_GIRTH_LIMIT).unwrap();
        assert_eq!(g, Girth::ExceedsLimit(24));
        assert_eq!(g.to_string(), "> 24");

        let z = Group::Integers;
        let g = CayleyGraph::new(&z, vec![el(&z, "1"), el(&z, "3")]).unwrap().girth(24).unwrap();
        assert_eq!(g.length(), Some(4));
        let Girth::Finite { witness, .. } = g else { unreachable!() };
        assert_eq!(witness.evaluate(&z, &[el(&z, "1"), el(&z, "3")]).unwrap(), z.identity());

        let s3 = Group::symmetric(3).unwrap();
        let g = CayleyGraph::new(&s3, vec![el(&s3, "(12)"), el(&s3, "(123)")]).unwrap().girth(24).unwrap();
        assert_eq!(g.length(), Some(2));
    }

    #[test]
    fn loops_and_double_edges() {
        let z5 = Group::cyclic(5).unwrap();
        let g = CayleyGraph::new(&z5, vec![z5.identity()]).unwrap().girth(10).unwrap();
        assert_eq!(g.length(), Some(1));
        let g = CayleyGraph::new(&z5, vec![el(&z5, "1"), el(&z5, "1")]).unwrap().girth(10).unwrap();
        assert_eq!(g.length(), Some(2));
        let z2 = Group::cyclic(2).unwrap();
        let g = CayleyGraph::new(&z2, vec![el(&z2, "1")]).unwrap().girth(10).unwrap();
        assert_eq!(g.length(), Some(2));
    }

    #[test]
    fn girth_matches_word_enumeration() {
        let cases: Vec<(Group, Vec<&str>)> = vec![
            (Group::cyclic(7).unwrap(), vec!["1", "2"]),
            (Group::cyclic(12).unwrap(), vec!["1", "5"]),
            (Group::cyclic(9).unwrap(), vec!["2"]),
            (Group::symmetric(4).unwrap(), vec!["(1234)", "(12)"]),
            (Group::symmetric(4).unwrap(), vec!["(123)", "(234)"]),
            (Group::Quaternion, vec!["i", "j"]),
            (Group::dihedral(5).unwrap(), vec!["r", "s"]),
            (Group::sl2(5).unwrap(), vec!["[1,2;0,1]", "[1,0;2,1]"]),
            (Group::sl2(7).unwrap(), vec!["[1,2;0,1]", "[1,0;2,1]"]),
            (Group::Integers, vec!["2", "3"]),
            (Group::Integers, vec!["5", "7"]),
        ];
        for (group, gens) in cases {
            let gens: Vec<GroupElement> = gens.iter().map(|s| el(&group, s)).collect();
            let fast = CayleyGraph::new(&group, gens.clone()).unwrap().girth(10).unwrap();
            let slow = naive_girth(&group, &gens, 10);
            assert_eq!(fast.length(), slow, "{group}");
            if let Girth::Finite { witness, length } = fast {
                assert_eq!(witness.len(), length);
                assert_eq!(witness.evaluate(&group, &gens).unwrap(), group.identity());
            }
        }
    }

    #[test]
    fn margulis_girth_mod_13_matches_naive() {
        let g = Group::sl2(13).unwrap();
        let (x, y) = margulis_generators(13).unwrap();
        let fast = CayleyGraph::new(&g, vec![x.clone(), y.clone()]).unwrap().girth(9).unwrap();
        assert_eq!(fast.length(), naive_girth(&g, &[x, y], 9));
    }

    #[test]
    fn node_budget_reports_radius() {
        let f2 = Group::free(2).unwrap();
        let graph = CayleyGraph::new(&f2, vec![el(&f2, "x"), el(&f2, "y")]).unwrap().with_node_budget(100);
        assert_eq!(graph.girth(24), Err(CayleyError::Budget { budget: 100, radius: 3 }));
    }

    #[test]
    fn ball_sizes_in_free_group() {
        let f2 = Group::free(2).unwrap();
        let graph = CayleyGraph::new(&f2, vec![el(&f2, "x"), el(&f2, "y")]).unwrap();
        let ball = graph.ball(3).unwrap();
        assert_eq!(ball.len(), 1 + 4 + 12 + 36);
        assert_eq!(ball.edges.len(), ball.len() - 1);
        for (w, g) in ball.words.iter().zip(&ball.elements) {
            assert_eq!(&crate::freegroup::pack(2, w), g);
        }
        assert_eq!(ball.distance_of(&el(&f2, "x Y")), Some(2));
    }

    #[test]
    fn ball_distances_satisfy_triangle_inequality() {
        let g = Group::symmetric(4).unwrap();
        let graph = CayleyGraph::new(&g, vec![el(&g, "(1234)"), el(&g, "(12)")]).unwrap();
        let ball = graph.ball(10).unwrap();
        assert_eq!(ball.len(), 24);
        for &(u, _, v) in &ball.edges {
            assert!(ball.distances[u].abs_diff(ball.distances[v]) <= 1);
        }
        for (i, w) in ball.words.iter().enumerate() {
            assert_eq!(w.len(), ball.distances[i]);
        }
    }

    #[test]
    fn neighborhood_examples() {
        let z = Group::cyclic(10).unwrap();
        let set = vec![el(&z, "0"), el(&z, "1"), el(&z, "3")];
        let nb = neighborhood(&z, &set, &el(&z, "4")).unwrap();
        let expected: Vec<GroupElement> = (1..=7).map(|i| el(&z, &i.to_string())).collect();
        assert_eq!(nb, expected);
        let g = el(&z, "6");
        assert_eq!(neighborhood(&z, &[z.identity()], &g).unwrap(), vec![g]);
        assert!(neighborhood(&z, &[], &z.identity()).is_err());
    }

    #[test]
    fn affinity_examples() {
        for n in 8..14u64 {
            let z = Group::cyclic(n).unwrap();
            let set = vec![el(&z, "0"), el(&z, "1"), el(&z, "3")];
            for i in 0..n {
                let a = el(&z, &i.to_string());
                let b = el(&z, &(i + 1).to_string());
                assert_eq!(affinity(&z, &set, &a, &b).unwrap(), 6);
            }
        }
        let z12 = Group::cyclic(12).unwrap();
        let set = vec![el(&z12, "0"), el(&z12, "1"), el(&z12, "3")];
        assert_eq!(affinity(&z12, &set, &el(&z12, "0"), &el(&z12, "5")).unwrap(), 2);
        assert_eq!(affinity(&z12, &set, &el(&z12, "2"), &el(&z12, "2")).unwrap(), 7);
    }

    #[test]
    fn affinity_matrix_matches_direct_computation() {
        let g = Group::symmetric(3).unwrap();
        let t = GroupTable::new(&g).unwrap();
        let set_el = vec![g.identity(), el(&g, "(12)"), el(&g, "(123)")];
        let set: Vec<usize> = set_el.iter().map(|s| t.index_of(s).unwrap()).collect();
        let m = affinity_matrix(&t, &set);
        for a in 0..6 {
            for b in 0..6 {
                let direct = affinity(&g, &set_el, t.element(a), t.element(b)).unwrap();
                assert_eq!(m[a][b] as usize, direct);
            }
        }
    }
}
