//! Automorphism groups of finite relational structures by
//! individualization and refinement, and the classification of group
//! actions on posets.
//!
//! A [`Structure`] is a point set with directed relations, an invariant
//! initial coloring and optionally an invariant weight matrix. Posets use
//! their order relation, colors from depth, co-depth and up/down degrees,
//! and, at height one, the affinity of points (the number of points sharing
//! a common bound with both) as weights.

use std::hash::{Hash, Hasher};

use num_bigint::BigUint;
use num_traits::One;
use rustc_hash::{FxHashSet, FxHasher};
use serde::Serialize;
use thiserror::Error;

use crate::perm::{self, Permutation};
use crate::poset::{BitMatrix, FinitePoset, LabeledDigraph};

pub const AUT_POINT_CAP: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutError {
    #[error("{points} points exceed the engine cap of {cap}")]
    TooLarge { points: usize, cap: usize },
    #[error("point {0} out of range")]
    BadPoint(usize),
    #[error("the action of {0} is not an automorphism")]
    NotAutomorphism(String),
    #[error("action permutations have {got} points, the poset has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("action has {perms} permutations but {labels} element labels")]
    LabelMismatch { perms: usize, labels: usize },
}

/// Points with relations, colors and weights that automorphisms preserve.
#[derive(Clone, Debug)]
pub struct Structure {
    n: usize,
    relations: Vec<BitMatrix>,
    transposed: Vec<BitMatrix>,
    colors: Vec<u64>,
    weights: Option<Vec<Vec<u32>>>,
}

impl Structure {
    pub fn new(n: usize, relations: Vec<BitMatrix>, colors: Vec<u64>) -> Structure {
        assert!(relations.iter().all(|r| r.len() == n) && colors.len() == n);
        let transposed = relations.iter().map(|r| r.transpose()).collect();
        Structure { n, relations, transposed, colors, weights: None }
    }

    pub fn with_weights(mut self, weights: Vec<Vec<u32>>) -> Structure {
        assert!(weights.len() == self.n && weights.iter().all(|r| r.len() == self.n));
        self.weights = Some(weights);
        self
    }

    pub fn from_poset(p: &FinitePoset) -> Structure {
        let n = p.len();
        let depth = p.depths();
        let co_depth = p.opposite().depths();
        let colors = (0..n)
            .map(|i| {
                let up = p.order_matrix().row_count(i) as u64;
                let down = p.below(i).len() as u64;
                (depth[i] as u64) << 48 | (co_depth[i] as u64) << 32 | up << 16 | down
            })
            .collect();
        let s = Structure::new(n, vec![p.order_matrix().clone()], colors);
        if p.height() == 1 {
            let w = affinity_weights(p);
            s.with_weights(w)
        } else {
            s
        }
    }

    pub fn from_digraph(d: &LabeledDigraph) -> Structure {
        Structure::new(d.len(), vec![d.adjacency()], vec![0; d.len()])
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_automorphism(&self, p: &Permutation) -> bool {
        if p.len() != self.n {
            return false;
        }
        if (0..self.n).any(|i| self.colors[i] != self.colors[p.apply(i)]) {
            return false;
        }
        for r in &self.relations {
            for i in 0..self.n {
                if r.row_count(i) != r.row_count(p.apply(i)) {
                    return false;
                }
                if r.row_iter(i).any(|j| !r.get(p.apply(i), p.apply(j))) {
                    return false;
                }
            }
        }
        if let Some(w) = &self.weights {
            for i in 0..self.n {
                for j in 0..self.n {
                    if w[i][j] != w[p.apply(i)][p.apply(j)] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// For a height-one poset: for two points on the same level, the number of
/// points on that level sharing a bound with both.
fn affinity_weights(p: &FinitePoset) -> Vec<Vec<u32>> {
    let n = p.len();
    let less = p.order_matrix();
    let more = less.transpose();
    let mut shared = BitMatrix::new(n);
    for a in 0..n {
        for u in less.row_iter(a) {
            for b in more.row_iter(u) {
                shared.set(a, b);
            }
        }
        for u in more.row_iter(a) {
            for b in less.row_iter(u) {
                shared.set(a, b);
            }
        }
    }
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    shared.row(a).iter().zip(shared.row(b)).map(|(x, y)| (x & y).count_ones()).sum()
                })
                .collect()
        })
        .collect()
}

/// Ordered partition of the points; cells are identified by their start
/// position in `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Partition {
    order: Vec<usize>,
    cell: Vec<usize>,
    end: Vec<usize>,
    cells: usize,
}

impl Partition {
    fn from_colors(colors: &[u64]) -> Partition {
        let n = colors.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| (colors[v], v));
        let mut p = Partition { order, cell: vec![0; n], end: vec![0; n], cells: 0 };
        let mut s = 0;
        while s < n {
            let mut e = s + 1;
            while e < n && colors[p.order[e]] == colors[p.order[s]] {
                e += 1;
            }
            p.set_cell(s, e);
            s = e;
        }
        p
    }

    fn set_cell(&mut self, s: usize, e: usize) {
        for i in s..e {
            self.cell[self.order[i]] = s;
        }
        self.end[s] = e;
        self.cells += 1;
    }

    /// First smallest non-singleton cell.
    fn target_cell(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        let mut s = 0;
        while s < self.order.len() {
            let e = self.end[s];
            if e - s > 1 && best.is_none_or(|(bs, be)| e - s < be - bs) {
                best = Some((s, e));
            }
            s = e;
        }
        best
    }

    /// Moves `v` to the front of its cell and splits it off.
    fn individualize(&self, v: usize) -> Partition {
        let mut p = self.clone();
        let s = p.cell[v];
        let e = p.end[s];
        if e - s == 1 {
            return p;
        }
        let pos = (s..e).find(|&i| p.order[i] == v).expect("vertex in its cell");
        p.order[s..=pos].rotate_right(1);
        p.cells -= 1;
        p.set_cell(s, s + 1);
        p.set_cell(s + 1, e);
        p
    }

    fn shape(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.cells);
        let mut s = 0;
        while s < self.order.len() {
            out.push(self.end[s]);
            s = self.end[s];
        }
        out
    }
}

/// One node of the leftmost path of the search tree.
struct PathNode {
    partition: Partition,
    shape: Vec<usize>,
    trace: u64,
}

/// Result of an automorphism group computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutGroup {
    pub generators: Vec<Permutation>,
    pub order: BigUint,
    pub orbits: Vec<Vec<usize>>,
}

impl AutGroup {
    pub fn orbit_count(&self) -> usize {
        self.orbits.len()
    }
}

/// Searches automorphisms of one structure.
pub struct AutEngine<'a> {
    s: &'a Structure,
}

impl<'a> AutEngine<'a> {
    pub fn new(s: &'a Structure) -> Result<AutEngine<'a>, AutError> {
        if s.n > AUT_POINT_CAP {
            return Err(AutError::TooLarge { points: s.n, cap: AUT_POINT_CAP });
        }
        Ok(AutEngine { s })
    }

    fn signature(&self, p: &Partition, v: usize, scratch: &mut Vec<(usize, u64)>) -> Vec<u64> {
        let mut sig = Vec::new();
        for (r, (m, mt)) in self.s.relations.iter().zip(&self.s.transposed).enumerate() {
            for (d, mat) in [m, mt].into_iter().enumerate() {
                sig.push(u64::MAX - (2 * r + d) as u64);
                scratch.clear();
                scratch.extend(mat.row_iter(v).map(|u| (p.cell[u], 1)));
                push_counts(&mut sig, scratch);
            }
        }
        if let Some(w) = &self.s.weights {
            sig.push(u64::MAX - 1000);
            scratch.clear();
            scratch.extend((0..self.s.n).filter(|&u| u != v && w[v][u] > 0).map(|u| (p.cell[u], w[v][u] as u64)));
            scratch.sort_unstable();
            let mut i = 0;
            while i < scratch.len() {
                let c = scratch[i].0;
                let (mut sum, mut sq) = (0u64, 0u64);
                while i < scratch.len() && scratch[i].0 == c {
                    sum += scratch[i].1;
                    sq += scratch[i].1 * scratch[i].1;
                    i += 1;
                }
                sig.extend([c as u64, sum, sq]);
            }
        }
        sig
    }

    /// Splits cells by neighbor counts until stable; returns a hash of the
    /// splits performed, which is invariant under isomorphism.
    fn refine(&self, p: &mut Partition) -> u64 {
        let n = self.s.n;
        let mut hasher = FxHasher::default();
        let mut scratch = Vec::new();
        loop {
            let sigs: Vec<Vec<u64>> = (0..n).map(|v| self.signature(p, v, &mut scratch)).collect();
            let before = p.cells;
            let mut s = 0;
            let old = p.clone();
            while s < n {
                let e = old.end[s];
                if e - s > 1 {
                    p.order[s..e].sort_by(|&a, &b| sigs[a].cmp(&sigs[b]));
                    let mut starts = vec![s];
                    for i in s + 1..e {
                        if sigs[p.order[i]] != sigs[p.order[i - 1]] {
                            starts.push(i);
                        }
                    }
                    if starts.len() > 1 {
                        p.cells -= 1;
                        starts.push(e);
                        for w in starts.windows(2) {
                            p.set_cell(w[0], w[1]);
                            (w[0], w[1]).hash(&mut hasher);
                            sigs[p.order[w[0]]].hash(&mut hasher);
                        }
                    }
                }
                s = e;
            }
            if p.cells == before {
                break;
            }
        }
        p.cells.hash(&mut hasher);
        hasher.finish()
    }

    fn refined(&self, mut p: Partition) -> (Partition, u64) {
        let t = self.refine(&mut p);
        (p, t)
    }

    fn leftmost_path(&self, root: Partition) -> Vec<PathNode> {
        let (mut p, mut trace) = self.refined(root);
        let mut path = Vec::new();
        loop {
            let target = p.target_cell();
            let shape = p.shape();
            let next = target.map(|(s, _)| p.individualize(p.order[s]));
            path.push(PathNode { partition: p, shape, trace });
            match next {
                Some(child) => (p, trace) = self.refined(child),
                None => return path,
            }
        }
    }

    fn leaf_map(&self, leftmost: &Partition, leaf: &Partition) -> Permutation {
        let mut images = vec![0usize; self.s.n];
        for (a, b) in leftmost.order.iter().zip(&leaf.order) {
            images[*a] = *b;
        }
        Permutation::from_images(&images).expect("leaves are orderings of all points")
    }

    /// Looks for an automorphism fixing the individualized points above
    /// `level` and sending the first point of its target cell to `w`.
    fn search_branch(&self, path: &[PathNode], level: usize, w: usize) -> Option<Permutation> {
        let child = path[level].partition.individualize(w);
        self.descend(path, level + 1, child)
    }

    fn descend(&self, path: &[PathNode], level: usize, p: Partition) -> Option<Permutation> {
        let (p, trace) = self.refined(p);
        let node = &path[level];
        if trace != node.trace || p.shape() != node.shape {
            return None;
        }
        match p.target_cell() {
            None => {
                let sigma = self.leaf_map(&path[path.len() - 1].partition, &p);
                self.s.is_automorphism(&sigma).then_some(sigma)
            }
            Some((s, e)) => {
                (s..e).find_map(|i| self.descend(path, level + 1, p.individualize(p.order[i])))
            }
        }
    }

    /// The full automorphism group.
    pub fn automorphism_group(&self) -> AutGroup {
        let n = self.s.n;
        let path = self.leftmost_path(Partition::from_colors(&self.s.colors));
        let mut gens: Vec<Permutation> = Vec::new();
        let mut order = BigUint::one();
        for k in (0..path.len() - 1).rev() {
            let part = &path[k].partition;
            let (s, e) = part.target_cell().expect("inner nodes have a target cell");
            let b = part.order[s];
            let mut orbit = orbit_of(b, n, &gens);
            for i in s + 1..e {
                let w = part.order[i];
                if orbit[w] {
                    continue;
                }
                if let Some(sigma) = self.search_branch(&path, k, w) {
                    gens.push(sigma);
                    orbit = orbit_of(b, n, &gens);
                }
            }
            order *= BigUint::from(orbit.iter().filter(|&&x| x).count());
        }
        gens.sort();
        let orbits = perm::orbits(n, &gens);
        AutGroup { generators: gens, order, orbits }
    }

    /// `None` if every automorphism fixing `point` is the identity,
    /// otherwise one nontrivial automorphism fixing it.
    pub fn stabilizer_witness(&self, point: usize) -> Result<Option<Permutation>, AutError> {
        if point >= self.s.n {
            return Err(AutError::BadPoint(point));
        }
        let root = Partition::from_colors(&self.s.colors);
        let path = self.leftmost_path(root.individualize(point));
        for k in 0..path.len() - 1 {
            let part = &path[k].partition;
            let (s, e) = part.target_cell().expect("inner nodes have a target cell");
            for i in s + 1..e {
                if let Some(sigma) = self.search_branch(&path, k, part.order[i]) {
                    return Ok(Some(sigma));
                }
            }
        }
        Ok(None)
    }
}

fn push_counts(sig: &mut Vec<u64>, cells: &mut [(usize, u64)]) {
    cells.sort_unstable();
    let mut i = 0;
    while i < cells.len() {
        let c = cells[i].0;
        let mut count = 0;
        while i < cells.len() && cells[i].0 == c {
            count += 1;
            i += 1;
        }
        sig.push((c as u64) << 32 | count);
    }
}

fn orbit_of(b: usize, n: usize, gens: &[Permutation]) -> Vec<bool> {
    let mut seen = vec![false; n];
    seen[b] = true;
    let mut stack = vec![b];
    while let Some(x) = stack.pop() {
        for g in gens {
            let y = g.apply(x);
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

pub fn automorphism_group(p: &FinitePoset) -> Result<AutGroup, AutError> {
    let s = Structure::from_poset(p);
    Ok(AutEngine::new(&s)?.automorphism_group())
}

pub fn digraph_automorphism_group(d: &LabeledDigraph) -> Result<AutGroup, AutError> {
    let s = Structure::from_digraph(d);
    Ok(AutEngine::new(&s)?.automorphism_group())
}

/// Whether only the identity fixes `point`; otherwise a witness.
pub fn stabilizer_is_trivial(p: &FinitePoset, point: usize) -> Result<(bool, Option<Permutation>), AutError> {
    let s = Structure::from_poset(p);
    let witness = AutEngine::new(&s)?.stabilizer_witness(point)?;
    Ok((witness.is_none(), witness))
}

/// A nontrivial automorphism, with the point it fixes if any and the group
/// element it comes from when it is part of the action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<String>,
    pub cycles: String,
    pub permutation: Permutation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    NotFree,
    SemiRegular,
    Regular,
    CayleyRepresentation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepresentationVerdict {
    pub kind: VerdictKind,
    /// Orbits of the action (of Aut for a bare poset).
    pub orbits: usize,
    /// Whether the action accounts for every automorphism.
    pub full: bool,
    #[serde(serialize_with = "serialize_big")]
    pub order: BigUint,
    #[serde(serialize_with = "serialize_big")]
    pub action_order: BigUint,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

fn serialize_big<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn witness_for(p: &FinitePoset, sigma: Permutation, element: Option<String>) -> Witness {
    let fixed_point = sigma.fixed_points().first().map(|&i| p.label(i).to_string());
    Witness { element, fixed_point, cycles: sigma.describe(p.labels()), permutation: sigma }
}

/// Classifies a group action on a poset given by one permutation per group
/// element. Free actions with two orbits on a height-one poset that account
/// for all automorphisms are Cayley representations.
pub fn classify_action(
    p: &FinitePoset,
    action: &[Permutation],
    element_labels: &[String],
) -> Result<RepresentationVerdict, AutError> {
    if action.len() != element_labels.len() {
        return Err(AutError::LabelMismatch { perms: action.len(), labels: element_labels.len() });
    }
    let s = Structure::from_poset(p);
    let engine = AutEngine::new(&s)?;
    for (g, label) in action.iter().zip(element_labels) {
        if g.len() != p.len() {
            return Err(AutError::SizeMismatch { expected: p.len(), got: g.len() });
        }
        if !s.is_automorphism(g) {
            return Err(AutError::NotAutomorphism(label.clone()));
        }
    }
    let action_order = BigUint::from(action.len());
    let orbits = perm::orbits(p.len(), action).len();
    let aut = engine.automorphism_group();
    let full = aut.order == action_order;
    let nontrivial_fixing = action
        .iter()
        .zip(element_labels)
        .find(|(g, _)| !g.is_identity() && !g.fixed_points().is_empty());
    let identities = action.iter().filter(|g| g.is_identity()).count();
    let verdict = |kind, witness| RepresentationVerdict {
        kind,
        orbits,
        full,
        order: aut.order.clone(),
        action_order: action_order.clone(),
        witness,
    };
    if let Some((g, label)) = nontrivial_fixing {
        return Ok(verdict(VerdictKind::NotFree, Some(witness_for(p, g.clone(), Some(label.clone())))));
    }
    if identities > 1 {
        let (g, label) = action.iter().zip(element_labels).filter(|(g, _)| g.is_identity()).nth(1).unwrap();
        return Ok(verdict(VerdictKind::NotFree, Some(witness_for(p, g.clone(), Some(label.clone())))));
    }
    let kind = match (full, orbits) {
        (true, 1) => VerdictKind::Regular,
        (true, 2) if p.height() == 1 => VerdictKind::CayleyRepresentation,
        _ => VerdictKind::SemiRegular,
    };
    let witness = if full {
        None
    } else {
        Some(extra_automorphism(p, &engine, &aut, action)?)
    };
    Ok(verdict(kind, witness))
}

// An automorphism outside the action: one fixing an orbit representative if
// possible, else a generator of Aut that the action does not contain.
fn extra_automorphism(
    p: &FinitePoset,
    engine: &AutEngine,
    aut: &AutGroup,
    action: &[Permutation],
) -> Result<Witness, AutError> {
    for orbit in perm::orbits(p.len(), action) {
        if let Some(sigma) = engine.stabilizer_witness(orbit[0])? {
            return Ok(witness_for(p, sigma, None));
        }
    }
    let inside: FxHashSet<&Permutation> = action.iter().collect();
    let g = aut.generators.iter().find(|g| !inside.contains(g)).expect("a larger group has a generator outside");
    Ok(witness_for(p, g.clone(), None))
}

/// Classifies Aut(P) acting on P.
pub fn classify_poset(p: &FinitePoset) -> Result<RepresentationVerdict, AutError> {
    let s = Structure::from_poset(p);
    let engine = AutEngine::new(&s)?;
    let aut = engine.automorphism_group();
    let mut witness = None;
    for orbit in &aut.orbits {
        if let Some(sigma) = engine.stabilizer_witness(orbit[0])? {
            witness = Some(witness_for(p, sigma, None));
            break;
        }
    }
    let orbits = aut.orbits.len();
    let kind = match (&witness, orbits) {
        (Some(_), _) => VerdictKind::NotFree,
        (None, 1) => VerdictKind::Regular,
        (None, 2) if p.height() == 1 => VerdictKind::CayleyRepresentation,
        (None, _) => VerdictKind::SemiRegular,
    };
    Ok(RepresentationVerdict { kind, orbits, full: true, action_order: aut.order.clone(), order: aut.order, witness })
}
