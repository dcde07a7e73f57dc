//! Extensions G ⋊ ℤ: the group H on G × ℤ, finite windows of the layered
//! posets built from a Cayley poset or a Babai poset, the H-action on a
//! window, and rank functions.
//!
//! The infinite posets are only ever inspected through windows, so every
//! action check here is a necessary condition on the window.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::aut;
use crate::group::{GroupAutomorphism, GroupError, GroupTable};
use crate::poset::{build_drr_digraph, FinitePoset, PosetError};
use crate::search::{self, SearchError};

/// Largest window, in points.
pub const WINDOW_CAP: usize = 4096;
/// Largest base group whose Cayley poset is verified before gluing.
pub const VERIFY_CAP: usize = 128;

#[derive(Debug, Error)]
pub enum ExtensionError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Aut(#[from] aut::AutError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("window of {points} points exceeds the cap {cap}")]
    TooLarge { points: usize, cap: usize },
    #[error("bad element index {0}")]
    BadElement(usize),
    #[error("action checks need a finite base group")]
    InfiniteBase,
}

/// The group G together with ψ(1) ∈ Aut(G). The integers are truncated to
/// [−radius, radius] and products leaving that range are undefined.
#[derive(Clone, Debug)]
pub enum BaseGroup {
    Finite { table: GroupTable, psi: Vec<usize> },
    Integers { negate: bool, radius: i64 },
}

impl BaseGroup {
    pub fn finite(table: GroupTable, psi: &GroupAutomorphism) -> Result<BaseGroup, ExtensionError> {
        psi.verify(&table)?;
        let psi = psi.index_images(&table);
        Ok(BaseGroup::Finite { table, psi })
    }

    /// ℤ with ψ(1) = id, or ψ(1) = −id when `negate` is set.
    pub fn integers(negate: bool, radius: i64) -> BaseGroup {
        BaseGroup::Integers { negate, radius }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, BaseGroup::Finite { .. })
    }

    /// Number of (represented) elements.
    pub fn len(&self) -> usize {
        match self {
            BaseGroup::Finite { table, .. } => table.order(),
            BaseGroup::Integers { radius, .. } => 2 * *radius as usize + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn identity(&self) -> usize {
        match self {
            BaseGroup::Finite { table, .. } => table.identity(),
            BaseGroup::Integers { radius, .. } => *radius as usize,
        }
    }

    pub fn label(&self, a: usize) -> String {
        match self {
            BaseGroup::Finite { table, .. } => table.label(a).to_string(),
            BaseGroup::Integers { .. } => self.integer(a).to_string(),
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            BaseGroup::Finite { table, .. } => table.descriptor().to_string(),
            BaseGroup::Integers { .. } => "z".into(),
        }
    }

    fn integer(&self, a: usize) -> i64 {
        match self {
            BaseGroup::Integers { radius, .. } => a as i64 - radius,
            BaseGroup::Finite { .. } => unreachable!("finite base"),
        }
    }

    /// Index of the integer `k`, if represented.
    pub fn index_of_integer(&self, k: i64) -> Option<usize> {
        match self {
            BaseGroup::Integers { radius, .. } if k.abs() <= *radius => Some((k + radius) as usize),
            _ => None,
        }
    }

    pub fn mul(&self, a: usize, b: usize) -> Option<usize> {
        match self {
            BaseGroup::Finite { table, .. } => Some(table.mul(a, b)),
            BaseGroup::Integers { .. } => self.index_of_integer(self.integer(a) + self.integer(b)),
        }
    }

    pub fn inv(&self, a: usize) -> usize {
        match self {
            BaseGroup::Finite { table, .. } => table.inv(a),
            BaseGroup::Integers { .. } => self.index_of_integer(-self.integer(a)).expect("range is symmetric"),
        }
    }

    /// ψ(n)(a).
    pub fn psi_pow(&self, n: i64, a: usize) -> usize {
        match self {
            BaseGroup::Finite { psi, .. } => {
                let mut x = a;
                if n >= 0 {
                    for _ in 0..n {
                        x = psi[x];
                    }
                } else {
                    for _ in 0..-n {
                        x = psi.iter().position(|&y| y == x).expect("bijection");
                    }
                }
                x
            }
            BaseGroup::Integers { negate, .. } => {
                if *negate && n % 2 != 0 {
                    self.inv(a)
                } else {
                    a
                }
            }
        }
    }
}

/// An element (g, n) of H, with g an index into the base group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct HElement {
    pub g: usize,
    pub n: i64,
}

/// H = G × ℤ with (g₁,n₁)(g₂,n₂) = (ψ(n₂)(g₁)·g₂, n₁+n₂), isomorphic to
/// G ⋊_ψ ℤ via (g, n) ↦ (ψ(−n)(g), −n).
#[derive(Clone, Debug)]
pub struct ExtensionGroupH {
    base: BaseGroup,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub elements: usize,
    pub identity: bool,
    pub inverses: bool,
    pub associativity: bool,
    /// The map to G ⋊ ℤ is multiplicative and squares to the identity.
    pub isomorphism: bool,
    pub triples_checked: usize,
}

impl AxiomReport {
    pub fn all_hold(&self) -> bool {
        self.identity && self.inverses && self.associativity && self.isomorphism
    }
}

impl ExtensionGroupH {
    pub fn new(base: BaseGroup) -> ExtensionGroupH {
        ExtensionGroupH { base }
    }

    pub fn base(&self) -> &BaseGroup {
        &self.base
    }

    pub fn identity(&self) -> HElement {
        HElement { g: self.base.identity(), n: 0 }
    }

    pub fn multiply(&self, a: HElement, b: HElement) -> Option<HElement> {
        let g = self.base.mul(self.base.psi_pow(b.n, a.g), b.g)?;
        Some(HElement { g, n: a.n + b.n })
    }

    pub fn inverse(&self, a: HElement) -> HElement {
        HElement { g: self.base.psi_pow(-a.n, self.base.inv(a.g)), n: -a.n }
    }

    /// (g, n) ↦ (ψ(−n)(g), −n), as a pair in G ⋊_ψ ℤ.
    pub fn to_semidirect(&self, a: HElement) -> (usize, i64) {
        (self.base.psi_pow(-a.n, a.g), -a.n)
    }

    /// (a, m)(b, k) = (a·ψ(m)(b), m + k) in G ⋊_ψ ℤ.
    pub fn semidirect_multiply(&self, a: (usize, i64), b: (usize, i64)) -> Option<(usize, i64)> {
        Some((self.base.mul(a.0, self.base.psi_pow(a.1, b.0))?, a.1 + b.1))
    }

    pub fn label(&self, a: HElement) -> String {
        format!("({}, {})", self.base.label(a.g), a.n)
    }

    /// Elements (g, n) with |n| ≤ `max_n`; for ℤ, only |g| ≤ radius / 3 so
    /// that triple products stay in range.
    pub fn sample(&self, max_n: i64) -> Vec<HElement> {
        let gs: Vec<usize> = match &self.base {
            BaseGroup::Finite { table, .. } => (0..table.order()).collect(),
            BaseGroup::Integers { radius, .. } => {
                let r = radius / 3;
                (-r..=r).map(|k| self.base.index_of_integer(k).unwrap()).collect()
            }
        };
        (-max_n..=max_n).flat_map(|n| gs.iter().map(move |&g| HElement { g, n })).collect()
    }

    /// Group axioms and the isomorphism with G ⋊ ℤ on [`sample`](Self::sample).
    pub fn verify_axioms(&self, max_n: i64) -> AxiomReport {
        let elems = self.sample(max_n);
        let e = self.identity();
        let identity = elems.iter().all(|&a| self.multiply(e, a) == Some(a) && self.multiply(a, e) == Some(a));
        let inverses = elems.iter().all(|&a| self.multiply(a, self.inverse(a)) == Some(e));
        let mut associativity = true;
        let mut isomorphism = elems.iter().all(|&a| {
            let (g, n) = self.to_semidirect(a);
            self.to_semidirect(HElement { g, n }) == (a.g, a.n)
        });
        let mut triples = 0;
        for &a in &elems {
            for &b in &elems {
                let Some(ab) = self.multiply(a, b) else { continue };
                if self.semidirect_multiply(self.to_semidirect(a), self.to_semidirect(b)) != Some(self.to_semidirect(ab)) {
                    isomorphism = false;
                }
                for &c in &elems {
                    let left = self.multiply(ab, c);
                    let right = self.multiply(b, c).and_then(|bc| self.multiply(a, bc));
                    if left.is_some() && right.is_some() {
                        triples += 1;
                        associativity &= left == right;
                    }
                }
            }
        }
        AxiomReport { elements: elems.len(), identity, inverses, associativity, isomorphism, triples_checked: triples }
    }
}

/// Which layered construction a window comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    /// Copies of P(G, S) with (g′, n) glued to (ψ(1)(g), n + 1).
    Cayley,
    /// Copies of the Babai poset with (g″, n) glued to (ψ(1)(g), n + 1).
    Babai,
}

/// A point of a window: level 0 is (g, copy), level 1 is (g′, copy) in a
/// Babai window. Primed points of a Cayley window and double-primed points
/// of a Babai window are the level-0 points of the next copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WindowPoint {
    pub copy: i64,
    pub level: u8,
    pub element: usize,
}

#[derive(Clone, Debug)]
pub struct WindowedPoset {
    pub kind: WindowKind,
    pub radius: i64,
    pub set: Vec<usize>,
    pub poset: FinitePoset,
    pub points: Vec<WindowPoint>,
    /// Layer index: the copy for Cayley windows; 2·copy + level for Babai.
    pub layer: Vec<i64>,
    /// Whether the base block was verified by the automorphism engine.
    pub base_verified: bool,
    base_len: usize,
}

impl WindowedPoset {
    /// Index of a point, if it lies in the window.
    pub fn index(&self, p: WindowPoint) -> Option<usize> {
        let (n, m) = (self.radius, self.base_len);
        if p.element >= m {
            return None;
        }
        match p.level {
            0 if (-n..=n + 1).contains(&p.copy) => Some((p.copy + n) as usize * m + p.element),
            1 if self.kind == WindowKind::Babai && (-n..=n).contains(&p.copy) => {
                Some((2 * n + 2) as usize * m + (p.copy + n) as usize * m + p.element)
            }
            _ => None,
        }
    }
}

fn verify_cayley_base(base: &BaseGroup, set: &[usize]) -> Result<bool, ExtensionError> {
    match base {
        BaseGroup::Finite { table, .. } => {
            if table.order() == 2 {
                return Err(ExtensionError::Precondition("the base group must not be ℤ₂".into()));
            }
            if table.order() > VERIFY_CAP {
                return Ok(false);
            }
            if !search::is_cayley_representation(table, set)? {
                return Err(ExtensionError::Precondition("P(G, S) is not a Cayley representation".into()));
            }
            Ok(true)
        }
        BaseGroup::Integers { .. } => Ok(false),
    }
}

fn verify_babai_base(base: &BaseGroup, set: &[usize]) -> Result<bool, ExtensionError> {
    let BaseGroup::Finite { table, .. } = base else {
        return Err(ExtensionError::Precondition("Babai windows need a finite base group".into()));
    };
    if table.order() == 1 {
        return Err(ExtensionError::Precondition("the trivial group is handled by Cayley windows".into()));
    }
    let digraph = build_drr_digraph(table, set)?;
    let order = aut::digraph_automorphism_group(&digraph)?.order;
    if order != num_bigint::BigUint::from(table.order()) {
        return Err(ExtensionError::Precondition(format!(
            "the digraph has {order} automorphisms, so it is not a DRR of a group of order {}",
            table.order()
        )));
    }
    Ok(true)
}

/// Copies n ∈ [−radius, radius] of the base block glued along the
/// identification, with the transitive closure of the per-copy orders.
pub fn build_window(kind: WindowKind, h: &ExtensionGroupH, set: &[usize], radius: i64) -> Result<WindowedPoset, ExtensionError> {
    let base = h.base();
    let m = base.len();
    if let Some(&bad) = set.iter().find(|&&s| s >= m) {
        return Err(ExtensionError::BadElement(bad));
    }
    if set.is_empty() || radius < 0 {
        return Err(ExtensionError::Precondition("need a nonempty set and radius ≥ 0".into()));
    }
    let base_verified = match kind {
        WindowKind::Cayley => verify_cayley_base(base, set)?,
        WindowKind::Babai => verify_babai_base(base, set)?,
    };
    let copies = (2 * radius + 1) as usize;
    let total = (copies + 1) * m + if kind == WindowKind::Babai { copies * m } else { 0 };
    if total > WINDOW_CAP {
        return Err(ExtensionError::TooLarge { points: total, cap: WINDOW_CAP });
    }
    let mut points = Vec::with_capacity(total);
    for c in -radius..=radius + 1 {
        points.extend((0..m).map(|g| WindowPoint { copy: c, level: 0, element: g }));
    }
    if kind == WindowKind::Babai {
        for c in -radius..=radius {
            points.extend((0..m).map(|g| WindowPoint { copy: c, level: 1, element: g }));
        }
    }
    let mut window = WindowedPoset {
        kind,
        radius,
        set: set.to_vec(),
        poset: FinitePoset::from_relations(Vec::new(), &[])?,
        layer: points.iter().map(|p| if kind == WindowKind::Babai { 2 * p.copy + p.level as i64 } else { p.copy }).collect(),
        points,
        base_verified,
        base_len: m,
    };
    let at = |w: &WindowedPoset, copy: i64, level: u8, element: usize| w.index(WindowPoint { copy, level, element }).unwrap();
    let mut pairs = Vec::new();
    for c in -radius..=radius {
        for g in 0..m {
            let bottom = at(&window, c, 0, g);
            for &s in set {
                if let Some(top) = base.mul(g, s) {
                    pairs.push((bottom, at(&window, c + 1, 0, base.psi_pow(1, top))));
                }
            }
            if kind == WindowKind::Babai {
                let mid = at(&window, c, 1, g);
                pairs.push((bottom, mid));
                pairs.push((mid, at(&window, c + 1, 0, base.psi_pow(1, g))));
            }
        }
    }
    let labels = window
        .points
        .iter()
        .map(|p| format!("({}{}, {})", base.label(p.element), if p.level == 1 { "'" } else { "" }, p.copy))
        .collect();
    window.poset = FinitePoset::from_relations_capped(labels, &pairs, WINDOW_CAP)?;
    Ok(window)
}

/// h·p: (g₁,n₁)·(g, c) = (ψ(c)(g₁)·g, c + n₁) on every level.
pub fn act(h: &ExtensionGroupH, w: &WindowedPoset, e: HElement, point: usize) -> Option<usize> {
    let p = w.points[point];
    let g = h.base().mul(h.base().psi_pow(p.copy, e.g), p.element)?;
    w.index(WindowPoint { copy: p.copy + e.n, level: p.level, element: g })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActionReport {
    pub elements_checked: usize,
    pub injective: bool,
    pub order_preserving: bool,
    /// No element other than the identity fixes a point.
    pub free: bool,
    /// Orbits met by interior points (copies within radius − 1).
    pub orbit_types: usize,
    /// Every interior point is in the orbit of (e, 0), or of (e′, 0) for
    /// primed points.
    pub interior_transitive: bool,
    pub necessary_only: bool,
    pub note: String,
}

/// Checks the H-action on the window for every h = (g, n) with
/// |n| ≤ radius − 1, on the points whose image stays inside.
pub fn check_action_on_window(h: &ExtensionGroupH, w: &WindowedPoset) -> Result<ActionReport, ExtensionError> {
    if !h.base().is_finite() {
        return Err(ExtensionError::InfiniteBase);
    }
    let elems = h.sample((w.radius - 1).max(0));
    let e = h.identity();
    let n = w.points.len();
    let per_element: Vec<(bool, bool, bool, Vec<(usize, usize)>)> = elems
        .par_iter()
        .map(|&x| {
            let images: Vec<Option<usize>> = (0..n).map(|p| act(h, w, x, p)).collect();
            let domain: Vec<usize> = (0..n).filter(|&p| images[p].is_some()).collect();
            let mut hit = vec![false; n];
            let mut injective = true;
            for &p in &domain {
                injective &= !std::mem::replace(&mut hit[images[p].unwrap()], true);
            }
            let order = domain.iter().all(|&a| {
                domain.iter().all(|&b| w.poset.less(a, b) == w.poset.less(images[a].unwrap(), images[b].unwrap()))
            });
            let free = x == e || domain.iter().all(|&p| images[p] != Some(p));
            let moves = domain.iter().map(|&p| (p, images[p].unwrap())).collect();
            (injective, order, free, moves)
        })
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for (_, _, _, moves) in &per_element {
        for &(a, b) in moves {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let interior: Vec<usize> = (0..n).filter(|&p| w.points[p].copy.abs() < w.radius.max(1)).collect();
    let mut roots: Vec<usize> = interior.iter().map(|&p| find(&mut parent, p)).collect();
    roots.sort_unstable();
    roots.dedup();
    let anchor = |level: u8| w.index(WindowPoint { copy: 0, level, element: h.base().identity() });
    let interior_transitive = interior.iter().all(|&p| {
        let a = anchor(w.points[p].level).expect("copy 0 is in the window");
        find(&mut parent, p) == find(&mut parent, a)
    });
    Ok(ActionReport {
        elements_checked: elems.len(),
        injective: per_element.iter().all(|r| r.0),
        order_preserving: per_element.iter().all(|r| r.1),
        free: per_element.iter().all(|r| r.2),
        orbit_types: roots.len(),
        interior_transitive,
        necessary_only: true,
        note: format!("necessary conditions verified on window {}", w.radius),
    })
}

/// A point-to-integer map that increases along the order and by exactly
/// one across covers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankFunction {
    pub rank: Vec<i64>,
}

/// Why a poset is not graded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum NonGradedWitness {
    /// Two saturated chains with the same endpoints and different lengths.
    Chains { short: Vec<String>, long: Vec<String> },
    /// A closed walk in the cover graph whose up-steps and down-steps differ.
    Cycle { walk: Vec<String> },
}

/// Saturated chains from `x` realizing the shortest and longest cover
/// distance to each point above it.
fn chain_extremes(p: &FinitePoset, x: usize) -> (Vec<Option<(usize, usize)>>, Vec<usize>, Vec<usize>) {
    let n = p.len();
    let depth = p.depths();
    let mut order: Vec<usize> = (0..n).filter(|&y| p.less(x, y)).collect();
    order.sort_by_key(|&y| depth[y]);
    let mut best: Vec<Option<(usize, usize)>> = vec![None; n];
    let (mut short_pred, mut long_pred) = (vec![usize::MAX; n], vec![usize::MAX; n]);
    best[x] = Some((0, 0));
    for &y in std::iter::once(&x).chain(order.iter()) {
        let Some((lo, hi)) = best[y] else { continue };
        for &(a, b) in p.covers() {
            if a != y {
                continue;
            }
            let entry = best[b].get_or_insert((usize::MAX, 0));
            if lo + 1 < entry.0 {
                entry.0 = lo + 1;
                short_pred[b] = y;
            }
            if hi + 1 > entry.1 {
                entry.1 = hi + 1;
                long_pred[b] = y;
            }
        }
    }
    (best, short_pred, long_pred)
}

fn walk_back(pred: &[usize], from: usize, to: usize) -> Vec<usize> {
    let mut chain = vec![to];
    let mut cur = to;
    while cur != from {
        cur = pred[cur];
        chain.push(cur);
    }
    chain.reverse();
    chain
}

/// Assigns ranks by breadth-first search over covers (+1 upward, −1
/// downward), normalized to minimum 0 in each component.
pub fn gradedness(p: &FinitePoset) -> Result<RankFunction, NonGradedWitness> {
    let n = p.len();
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for &(a, b) in p.covers() {
        adj[a].push((b, 1));
        adj[b].push((a, -1));
    }
    let mut rank: Vec<Option<i64>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut conflict = None;
    'outer: for root in 0..n {
        if rank[root].is_some() {
            continue;
        }
        rank[root] = Some(0);
        let mut queue = std::collections::VecDeque::from([root]);
        let mut component = vec![root];
        while let Some(u) = queue.pop_front() {
            for &(v, step) in &adj[u] {
                let want = rank[u].unwrap() + step;
                match rank[v] {
                    None => {
                        rank[v] = Some(want);
                        parent[v] = u;
                        component.push(v);
                        queue.push_back(v);
                    }
                    Some(r) if r != want => {
                        conflict = Some((u, v));
                        break 'outer;
                    }
                    _ => {}
                }
            }
        }
        let low = component.iter().map(|&v| rank[v].unwrap()).min().unwrap();
        for &v in &component {
            rank[v] = Some(rank[v].unwrap() - low);
        }
    }
    let Some((u, v)) = conflict else {
        return Ok(RankFunction { rank: rank.into_iter().map(Option::unwrap).collect() });
    };
    for x in 0..n {
        let (best, short_pred, long_pred) = chain_extremes(p, x);
        if let Some(y) = (0..n).find(|&y| best[y].is_some_and(|(lo, hi)| lo != hi)) {
            let names = |c: Vec<usize>| c.into_iter().map(|i| p.label(i).to_string()).collect();
            return Err(NonGradedWitness::Chains {
                short: names(walk_back(&short_pred, x, y)),
                long: names(walk_back(&long_pred, x, y)),
            });
        }
    }
    // tree path to u, the edge u–v, tree path back from v
    let up = |mut a: usize| {
        let mut path = vec![a];
        while parent[a] != usize::MAX {
            a = parent[a];
            path.push(a);
        }
        path
    };
    let (mut pu, mut pv) = (up(u), up(v));
    while pu.len() > 1 && pv.len() > 1 && pu[pu.len() - 2] == pv[pv.len() - 2] {
        pu.pop();
        pv.pop();
    }
    pu.reverse();
    pu.extend(pv);
    Err(NonGradedWitness::Cycle { walk: pu.into_iter().map(|i| p.label(i).to_string()).collect() })
}

/// Checks a rank function against the definition.
pub fn is_rank_function(p: &FinitePoset, rank: &[i64]) -> bool {
    p.covers().iter().all(|&(a, b)| rank[b] == rank[a] + 1)
        && (0..p.len()).all(|a| p.above(a).all(|b| rank[a] < rank[b]))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EpimorphismReport {
    pub base_point: String,
    pub pairs_checked: usize,
    pub additive: bool,
    pub image_min: i64,
    pub image_max: i64,
    /// The image is every integer of a symmetric interval.
    pub onto_symmetric_interval: bool,
    pub necessary_only: bool,
}

/// f(h) = ρ(h·x) − ρ(x) for x = (e, 0): checks f(h₁h₂) = f(h₁) + f(h₂)
/// whenever all three images lie in the window, and that the values fill
/// a symmetric interval.
pub fn rank_epimorphism_check(h: &ExtensionGroupH, w: &WindowedPoset, rank: &RankFunction) -> Result<EpimorphismReport, ExtensionError> {
    if !is_rank_function(&w.poset, &rank.rank) {
        return Err(ExtensionError::Precondition("not a rank function of the window".into()));
    }
    let x = w.index(WindowPoint { copy: 0, level: 0, element: h.base().identity() }).expect("copy 0");
    let f = |e: HElement| act(h, w, e, x).map(|p| rank.rank[p] - rank.rank[x]);
    let elems: Vec<HElement> = h.sample((w.radius - 1).max(0)).into_iter().filter(|&e| f(e).is_some()).collect();
    let mut additive = true;
    let mut pairs = 0;
    for &a in &elems {
        for &b in &elems {
            if let Some(fab) = h.multiply(a, b).and_then(|ab| f(ab)) {
                pairs += 1;
                additive &= fab == f(a).unwrap() + f(b).unwrap();
            }
        }
    }
    let mut values: Vec<i64> = elems.iter().map(|&e| f(e).unwrap()).collect();
    values.sort_unstable();
    values.dedup();
    let (lo, hi) = (values.first().copied().unwrap_or(0), values.last().copied().unwrap_or(0));
    Ok(EpimorphismReport {
        base_point: w.poset.label(x).to_string(),
        pairs_checked: pairs,
        additive,
        image_min: lo,
        image_max: hi,
        onto_symmetric_interval: lo == -hi && values.len() as i64 == hi - lo + 1,
        necessary_only: true,
    })
}

/// The integers `lo..=hi` ordered by a ◁ b iff b − a ≥ 2.
pub fn gap_order_window(lo: i64, hi: i64) -> Result<FinitePoset, ExtensionError> {
    let labels: Vec<String> = (lo..=hi).map(|k| k.to_string()).collect();
    let n = labels.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 2..n).map(move |b| (a, b))).collect();
    Ok(FinitePoset::from_relations_capped(labels, &pairs, WINDOW_CAP)?)
}
