//! Executable certificate for two-generated groups whose Cayley graph has
//! girth greater than 21: with S = {e, x, x², x⁴, y, y³}, the Cayley poset
//! P(G, S) is a Cayley representation.
//!
//! The certificate recomputes everything it relies on inside G: the girth,
//! the 27 elements of S·S⁻¹, the affinities α(e, g) against a table computed
//! in the free group, and the upper-bound facts that rule out the
//! orientation-reversing candidates.

use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::Serialize;
use thiserror::Error;

use crate::cayley::{self, CayleyError, CayleyGraph, Girth};
use crate::freegroup::{self, ReducedWord};
use crate::group::{is_prime, margulis_generators, Group, GroupElement, GroupError, GroupOps};
use crate::search::{self, SearchOptions, SearchOutcome};

/// Relations of length up to this must be absent.
pub const REQUIRED_GIRTH: usize = 21;
/// Girth search limit used by [`certify`].
pub const CERTIFY_GIRTH_LIMIT: usize = 22;
/// Largest finite group whose generation is checked by closure.
pub const CLOSURE_CAP: u64 = 1 << 21;
/// Number of elements of S·S⁻¹ when no short relation holds.
pub const NEIGHBORHOOD_SIZE: usize = 27;

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Cayley(#[from] CayleyError),
    #[error("{0} is not an element of the group")]
    NotInGroup(String),
    #[error("the generators span a subgroup of order {span}, not {order}")]
    Generation { span: u64, order: u64 },
    #[error("certificate check failed: {0}")]
    Inconsistent(String),
}

/// The connection set as exponent words: x⁰, x¹, x², x⁴, y¹, y³.
fn connection_words() -> Vec<ReducedWord> {
    let x = ReducedWord::generator(0);
    let y = ReducedWord::generator(1);
    vec![ReducedWord::empty(), x.clone(), x.pow(2), x.pow(4), y.clone(), y.pow(3)]
}

/// S·S⁻¹ in the free group, sorted by word.
fn difference_words() -> Vec<ReducedWord> {
    let s = connection_words();
    let mut out: Vec<ReducedWord> = s.iter().flat_map(|a| s.iter().map(move |b| a.concat(&b.inverse()))).collect();
    out.sort();
    out.dedup();
    out
}

/// One entry of the affinity table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffinityEntry {
    pub word: String,
    pub affinity: usize,
}

/// α(e, g) for the 26 nonidentity g ∈ S·S⁻¹ inside F(x, y), by exact
/// intersection of gSS⁻¹ with SS⁻¹. Sorted by word.
pub fn f2_reference_table() -> Vec<AffinityEntry> {
    let diff = difference_words();
    assert_eq!(diff.len(), NEIGHBORHOOD_SIZE);
    assert!(diff.iter().all(|w| w.len() <= 7));
    let set: FxHashSet<&ReducedWord> = diff.iter().collect();
    let mut out = Vec::new();
    for g in diff.iter().filter(|w| !w.is_empty()) {
        let mut count = 0;
        for d in &diff {
            let moved = g.concat(d);
            assert!(moved.len() <= 14);
            // membership equates `moved` with a word of length ≤ 7
            for other in &diff {
                assert!(moved.concat(&other.inverse()).len() <= 21);
            }
            if set.contains(&moved) {
                count += 1;
            }
        }
        out.push(AffinityEntry { word: g.to_string(), affinity: count });
    }
    out
}

/// How generation of G by x and y was established.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum Generation {
    /// The generated subgroup was enumerated and has the order of G.
    Closure { order: u64 },
    /// Powers of x and y give the elementary transvections of SL₂(p).
    Transvections,
    /// x and y are the free basis of F₂, up to inversion and order.
    FreeBasis,
    /// Not checked; the verdict assumes x and y generate G.
    Unchecked,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GirthRecord {
    pub limit: usize,
    /// `None` when no relation of length ≤ limit exists.
    pub length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl GirthRecord {
    fn new(g: &Girth, limit: usize) -> GirthRecord {
        match g {
            Girth::Finite { length, witness } => {
                GirthRecord { limit, length: Some(*length), witness: Some(witness.to_string()) }
            }
            Girth::ExceedsLimit(_) => GirthRecord { limit, length: None, witness: None },
        }
    }

    pub fn exceeds(&self, n: usize) -> bool {
        self.length.is_none_or(|l| l > n)
    }
}

/// A set of minimal points and whether it has an upper bound in P(G, S).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UpperBoundCheck {
    pub points: Vec<String>,
    /// Upper bounds found, as labels of maximal points.
    pub upper_bounds: Vec<String>,
    pub expected: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Verdict {
    Applicable,
    NotApplicable {
        reason: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        witness: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MainTheoremCertificate {
    pub group: String,
    pub generators: [String; 2],
    pub generation: Generation,
    pub girth: GirthRecord,
    pub connection_set: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub affinity_table: Vec<AffinityEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub upper_bounds: Vec<UpperBoundCheck>,
    /// A negative verdict says nothing about whether G is representable.
    pub sufficient_only: bool,
    pub verdict: Verdict,
}

impl MainTheoremCertificate {
    pub fn is_applicable(&self) -> bool {
        self.verdict == Verdict::Applicable
    }
}

fn check_generation(group: &Group, x: &GroupElement, y: &GroupElement) -> Result<Generation, CertificateError> {
    match group {
        Group::Free { rank: 2 } => {
            let basis = [ReducedWord::generator(0), ReducedWord::generator(1)];
            let word = |g: &GroupElement| freegroup::unpack(2, g.payload());
            let (wx, wy) = (word(x), word(y));
            let matches = |w: &ReducedWord, b: &ReducedWord| *w == *b || *w == b.inverse();
            if (matches(&wx, &basis[0]) && matches(&wy, &basis[1])) || (matches(&wx, &basis[1]) && matches(&wy, &basis[0])) {
                return Ok(Generation::FreeBasis);
            }
            Ok(Generation::Unchecked)
        }
        Group::SpecialLinear2 { p } if group.order().is_none_or(|o| o > CLOSURE_CAP) => {
            let reaches = |g: &GroupElement, target: &[i64]| {
                let target = GroupElement::new(target);
                let mut cur = g.clone();
                for _ in 0..*p {
                    if cur == target {
                        return true;
                    }
                    cur = group.multiply(&cur, g);
                }
                false
            };
            if reaches(x, &[1, 1, 0, 1]) && reaches(y, &[1, 0, 1, 1]) {
                Ok(Generation::Transvections)
            } else {
                Ok(Generation::Unchecked)
            }
        }
        _ => match group.order() {
            Some(order) if order <= CLOSURE_CAP => {
                let span = closure_order(group, &[x.clone(), y.clone()]);
                if span == order {
                    Ok(Generation::Closure { order })
                } else {
                    Err(CertificateError::Generation { span, order })
                }
            }
            _ => Ok(Generation::Unchecked),
        },
    }
}

fn closure_order(group: &dyn GroupOps, gens: &[GroupElement]) -> u64 {
    let mut seen: FxHashSet<GroupElement> = FxHashSet::default();
    let mut stack = vec![group.identity()];
    seen.insert(group.identity());
    while let Some(g) = stack.pop() {
        for s in gens {
            let h = group.multiply(&g, s);
            if seen.insert(h.clone()) {
                stack.push(h);
            }
        }
    }
    seen.len() as u64
}

/// Upper bounds of a set of minimal points of P(G, S): the h with a⁻¹h ∈ S
/// for every a, i.e. the intersection of the translates a·S.
fn upper_bounds(group: &dyn GroupOps, set: &[GroupElement], points: &[GroupElement]) -> Vec<GroupElement> {
    let mut common: Vec<GroupElement> = set.iter().map(|s| group.multiply(&points[0], s)).collect();
    for a in &points[1..] {
        let translate: FxHashSet<GroupElement> = set.iter().map(|s| group.multiply(a, s)).collect();
        common.retain(|h| translate.contains(h));
    }
    common.sort();
    common.dedup();
    common
}

fn upper_bound_checks(group: &dyn GroupOps, x: &GroupElement, y: &GroupElement, set: &[GroupElement]) -> Vec<UpperBoundCheck> {
    let words = |spec: &[(usize, i64)]| -> Vec<ReducedWord> {
        spec.iter()
            .map(|&(g, k)| if k == 0 { ReducedWord::empty() } else { ReducedWord::generator(g).pow(k) })
            .collect()
    };
    let cases: [(Vec<ReducedWord>, &str); 5] = [
        (words(&[(0, 0), (1, -1)]), "unique"),
        (words(&[(0, 0), (0, 2), (0, 3), (0, 4)]), "some"),
        (words(&[(0, 0), (0, -2), (0, -3), (0, -4)]), "none"),
        (words(&[(0, 0), (1, 2), (1, 3)]), "some"),
        (words(&[(0, 0), (1, -2), (1, -3)]), "none"),
    ];
    let images = [x.clone(), y.clone()];
    let identity = group.identity();
    cases
        .iter()
        .map(|(ws, expected)| {
            let points: Vec<GroupElement> = ws.iter().map(|w| w.evaluate(group, &images).expect("rank two")).collect();
            let bounds = upper_bounds(group, set, &points);
            let holds = match *expected {
                "unique" => bounds == [identity.clone()],
                "some" => !bounds.is_empty(),
                _ => bounds.is_empty(),
            };
            UpperBoundCheck {
                points: ws.iter().map(|w| w.to_string()).collect(),
                upper_bounds: bounds.iter().map(|b| format!("{}'", group.format_element(b))).collect(),
                expected: expected.to_string(),
                holds,
            }
        })
        .collect()
}

/// Runs the girth check and, if it passes, verifies the neighborhood, the
/// affinity table and the upper-bound facts inside G.
pub fn certify(group: &Group, x: &GroupElement, y: &GroupElement) -> Result<MainTheoremCertificate, CertificateError> {
    for g in [x, y] {
        if !group.contains(g) {
            return Err(CertificateError::NotInGroup(format!("{:?}", g.payload())));
        }
    }
    let generation = check_generation(group, x, y)?;
    let graph = CayleyGraph::new(group, vec![x.clone(), y.clone()])?;
    let girth = graph.girth(CERTIFY_GIRTH_LIMIT)?;
    let girth = GirthRecord::new(&girth, CERTIFY_GIRTH_LIMIT);
    let images = [x.clone(), y.clone()];
    let set: Vec<GroupElement> = connection_words().iter().map(|w| w.evaluate(group, &images).expect("rank two")).collect();
    let mut cert = MainTheoremCertificate {
        group: group.descriptor(),
        generators: [group.format_element(x), group.format_element(y)],
        generation,
        girth: girth.clone(),
        connection_set: set.iter().map(|g| group.format_element(g)).collect(),
        affinity_table: Vec::new(),
        upper_bounds: Vec::new(),
        sufficient_only: true,
        verdict: Verdict::Applicable,
    };
    if !girth.exceeds(REQUIRED_GIRTH) {
        cert.verdict = Verdict::NotApplicable {
            reason: format!("girth {} is at most {REQUIRED_GIRTH}", girth.length.unwrap_or(0)),
            witness: girth.witness,
        };
        return Ok(cert);
    }

    let neighborhood = cayley::neighborhood(group, &set, &group.identity())?;
    if neighborhood.len() != NEIGHBORHOOD_SIZE {
        return Err(CertificateError::Inconsistent(format!("|SS⁻¹| = {}", neighborhood.len())));
    }
    let reference = f2_reference_table();
    let member: FxHashSet<&GroupElement> = neighborhood.iter().collect();
    for entry in &reference {
        let w: ReducedWord = entry.word.parse().expect("reference words parse");
        let g = w.evaluate(group, &images).expect("rank two");
        if !member.contains(&g) {
            return Err(CertificateError::Inconsistent(format!("{} is not in SS⁻¹", entry.word)));
        }
        let affinity = neighborhood.iter().filter(|d| member.contains(&group.multiply(&g, d))).count();
        if affinity != entry.affinity {
            return Err(CertificateError::Inconsistent(format!(
                "α(e, {}) = {affinity}, expected {}",
                entry.word, entry.affinity
            )));
        }
        cert.affinity_table.push(AffinityEntry { word: entry.word.clone(), affinity });
    }
    cert.upper_bounds = upper_bound_checks(group, x, y, &set);
    if let Some(bad) = cert.upper_bounds.iter().find(|c| !c.holds) {
        return Err(CertificateError::Inconsistent(format!("upper bounds of {{{}}}", bad.points.join(", "))));
    }
    Ok(cert)
}

/// Tree-shape comparison of the radius-`radius` ball of a Cayley graph
/// with the ball of the free group on the same number of generators.
pub fn ball_matches_free(graph: &CayleyGraph, radius: usize) -> Result<bool, CertificateError> {
    let rank = graph.generators().len();
    let free = Group::free(rank)?;
    let free_gens: Vec<GroupElement> =
        (0..rank).map(|i| freegroup::pack(rank, &ReducedWord::generator(i))).collect();
    let free_graph = CayleyGraph::new(&free, free_gens)?;
    let shape = |ball: &cayley::BfsBall| -> (bool, Vec<(usize, usize)>) {
        let mut degree = vec![0usize; ball.len()];
        let mut loops = false;
        for &(u, _, v) in &ball.edges {
            loops |= u == v;
            degree[u] += 1;
            degree[v] += 1;
        }
        let tree = !loops && ball.edges.len() + 1 == ball.len();
        let mut profile: Vec<(usize, usize)> = ball.distances.iter().copied().zip(degree).collect();
        profile.sort_unstable();
        (tree, profile)
    };
    let (tree, profile) = shape(&graph.ball(radius)?);
    let (_, free_profile) = shape(&free_graph.ball(radius)?);
    Ok(tree && profile == free_profile)
}

/// (1+√2)^m = a + b√2.
fn silver_power(m: u32) -> (i128, i128) {
    let (mut a, mut b) = (1i128, 0i128);
    for _ in 0..m {
        (a, b) = (a + 2 * b, a + b);
    }
    (a, b)
}

/// Whether 2·log_{1+√2}(p/2) − 1 ≤ `girth`, decided in exact arithmetic as
/// p² ≤ 4·(1+√2)^(girth+1).
pub fn margulis_bound_at_most(p: u64, girth: usize) -> bool {
    let (a, b) = silver_power(girth as u32 + 1);
    let rhs = p as i128 * p as i128 - 4 * a;
    rhs <= 0 || 32 * b * b >= rhs * rhs
}

/// Whether the Margulis lower bound alone already guarantees girth > 21.
pub fn margulis_bound_exceeds_21(p: u64) -> bool {
    !margulis_bound_at_most(p, REQUIRED_GIRTH)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeScanEntry {
    pub p: u64,
    pub girth: GirthRecord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeScan {
    pub entries: Vec<PrimeScanEntry>,
    /// Smallest prime whose Margulis Cayley graph has girth > 21.
    pub first_applicable: Option<u64>,
}

/// Scans odd primes from `start` upward by BFS girth of SL₂(p) with the
/// Margulis generators, stopping at the first prime with girth > 21 or
/// after `max_p`.
pub fn scan_margulis_primes(start: u64, max_p: u64) -> Result<PrimeScan, CertificateError> {
    let primes: Vec<u64> = (start.max(3)..=max_p).filter(|&p| is_prime(p)).collect();
    let batch = rayon::current_num_threads().max(1) * 2;
    let mut entries = Vec::new();
    for chunk in primes.chunks(batch) {
        let results: Result<Vec<PrimeScanEntry>, CertificateError> = chunk
            .par_iter()
            .map(|&p| {
                let group = Group::sl2(p)?;
                let (x, y) = margulis_generators(p)?;
                let graph = CayleyGraph::new(&group, vec![x, y])?;
                let girth = graph.girth(CERTIFY_GIRTH_LIMIT)?;
                Ok(PrimeScanEntry { p, girth: GirthRecord::new(&girth, CERTIFY_GIRTH_LIMIT) })
            })
            .collect();
        for entry in results? {
            let done = entry.girth.exceeds(REQUIRED_GIRTH);
            let p = entry.p;
            entries.push(entry);
            if done {
                return Ok(PrimeScan { entries, first_applicable: Some(p) });
            }
        }
    }
    Ok(PrimeScan { entries, first_applicable: None })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossValidation {
    pub group: String,
    pub certificate_applicable: bool,
    /// A Cayley connection set found by exhaustive search, if any.
    pub search_found: Option<Vec<String>>,
    /// Whether {0, 1, 3} gives a Cayley representation (checked for n ≥ 9).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_013_represents: Option<bool>,
    /// The certificate never contradicts the search.
    pub consistent: bool,
}

/// Certificate versus exhaustive search on cyclic groups ℤn, n in `range`,
/// with generators x = 1, y = 2 (y = 1 for n ≤ 2).
pub fn cross_validate_small(range: std::ops::RangeInclusive<u64>) -> Result<Vec<CrossValidation>, CertificateError> {
    let mut out = Vec::new();
    for n in range {
        let group = Group::cyclic(n)?;
        let x = GroupElement::new(&[1 % n as i64]);
        let y = GroupElement::new(&[if n > 2 { 2 } else { 1 % n as i64 }]);
        let cert = certify(&group, &x, &y)?;
        let table = crate::group::GroupTable::new(&group)?;
        let report = search::search_cayley_table(&table, SearchOptions::default())
            .map_err(|e| CertificateError::Inconsistent(e.to_string()))?;
        let search_found = match report.outcome {
            SearchOutcome::Found { set } => Some(set),
            SearchOutcome::ExhaustedNone => None,
        };
        let set_013_represents = if n >= 9 {
            let set: Vec<usize> = [0, 1, 3].iter().map(|&i| table.index_of(&GroupElement::new(&[i])).unwrap()).collect();
            Some(search::is_cayley_representation(&table, &set).map_err(|e| CertificateError::Inconsistent(e.to_string()))?)
        } else {
            None
        };
        let consistent = !cert.is_applicable() || search_found.is_some();
        out.push(CrossValidation {
            group: group.descriptor(),
            certificate_applicable: cert.is_applicable(),
            search_found,
            set_013_represents,
            consistent,
        });
    }
    Ok(out)
}

/// The subtree of the Cayley tree of F₂ spanned by geodesics from e to the
/// points of S·S⁻¹.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NeighborhoodTree {
    /// Words sorted by length, then lexicographically.
    pub nodes: Vec<String>,
    /// Whether each node lies in S·S⁻¹.
    pub in_neighborhood: Vec<bool>,
    /// (parent, child) pairs.
    pub edges: Vec<(usize, usize)>,
}

pub fn neighborhood_tree() -> NeighborhoodTree {
    let diff = difference_words();
    let mut words: Vec<ReducedWord> = diff
        .iter()
        .flat_map(|w| (0..=w.len()).map(move |k| ReducedWord::from_letters(&w.letters()[..k])))
        .collect();
    words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    words.dedup();
    let index = |w: &ReducedWord| words.iter().position(|v| v == w).expect("prefix closed");
    let edges = words
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, w)| (index(&ReducedWord::from_letters(&w.letters()[..w.len() - 1])), i))
        .collect();
    NeighborhoodTree {
        in_neighborhood: words.iter().map(|w| diff.contains(w)).collect(),
        nodes: words.iter().map(|w| if w.is_empty() { "e".to_string() } else { w.to_string() }).collect(),
        edges,
    }
}

impl NeighborhoodTree {
    /// Points of S·S⁻¹ drawn as boxes, the other vertices as small dots.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph neighborhood {\n");
        for (i, (name, inside)) in self.nodes.iter().zip(&self.in_neighborhood).enumerate() {
            let shape = if *inside { "box" } else { "point" };
            out.push_str(&format!("  n{i} [label=\"{name}\", shape={shape}];\n"));
        }
        for (a, b) in &self.edges {
            out.push_str(&format!("  n{a} -- n{b};\n"));
        }
        out.push_str("}\n");
        out
    }
}
