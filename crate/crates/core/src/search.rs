//! Exhaustive searches over connection sets: Cayley representations of
//! small groups, and semi-regular three-orbit posets built from the
//! left-regular action on three copies of a group.

use num_bigint::BigUint;
use rustc_hash::FxHashSet;
use serde::Serialize;
use thiserror::Error;

use crate::aut::{self, AutEngine, AutError, Structure};
use crate::group::{group_automorphisms, Group, GroupError, GroupTable};
use crate::poset::{build_cayley_poset, BitMatrix, FinitePoset, PosetError};

/// Largest group searched for Cayley representations.
pub const SEARCH_CAP: usize = 16;
/// Largest group for the three-orbit enumeration.
pub const THREE_ORBIT_CAP: usize = 6;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("group of order {order} is above the search cap of {cap}")]
    TooLarge { order: usize, cap: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Aut(#[from] AutError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Identify connection sets related by right translation, group
    /// automorphisms and complement.
    pub prune: bool,
    /// Stop at the first Cayley representation.
    pub stop_at_first: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { prune: true, stop_at_first: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchCounters {
    /// Subsets the stabilizer test was run on.
    pub tried: u64,
    pub pruned_translation: u64,
    pub pruned_automorphism: u64,
    pub pruned_complement: u64,
    /// Number of candidate subsets: all nonempty proper subsets, or the one
    /// subset of the trivial group.
    pub total: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SearchOutcome {
    Found { set: Vec<String> },
    ExhaustedNone,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub group: String,
    pub order: usize,
    #[serde(flatten)]
    pub outcome: SearchOutcome,
    /// All Cayley connection sets among the representatives tried, when the
    /// search did not stop early.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub found: Vec<Vec<String>>,
    pub counters: SearchCounters,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

impl SearchReport {
    pub fn has_cayley_representation(&self) -> bool {
        matches!(self.outcome, SearchOutcome::Found { .. })
    }
}

/// Whether P(G, S) is a Cayley representation: only the identity fixes e.
pub fn is_cayley_representation(table: &GroupTable, set: &[usize]) -> Result<bool, SearchError> {
    let p = build_cayley_poset(table, set)?;
    Ok(aut::stabilizer_is_trivial(&p, table.identity())?.0)
}

fn mask_to_set(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

fn map_mask(mask: u32, images: &[usize]) -> u32 {
    let mut out = 0;
    for (i, &j) in images.iter().enumerate() {
        if mask >> i & 1 == 1 {
            out |= 1 << j;
        }
    }
    out
}

/// Looks for a connection set S with P(G, S) a Cayley representation.
pub fn search_cayley(group: &Group, options: SearchOptions) -> Result<SearchReport, SearchError> {
    let table = GroupTable::new(group)?;
    search_cayley_table(&table, options)
}

pub fn search_cayley_table(table: &GroupTable, options: SearchOptions) -> Result<SearchReport, SearchError> {
    let n = table.order();
    if n > SEARCH_CAP {
        return Err(SearchError::TooLarge { order: n, cap: SEARCH_CAP });
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let candidate = |mask: u32| mask != 0 && (mask != full || n == 1);
    let total = (1u64 << n) - if n == 1 { 1 } else { 2 };

    // right translations s ↦ s·h as index images
    let translations: Vec<Vec<usize>> = (0..n).map(|h| (0..n).map(|s| table.mul(s, h)).collect()).collect();
    let automorphisms: Vec<Vec<usize>> = if options.prune {
        group_automorphisms(table, SEARCH_CAP)?.iter().map(|a| a.index_images(table)).collect()
    } else {
        Vec::new()
    };

    let mut seen = vec![false; 1usize << n];
    let mut counters = SearchCounters { total, ..Default::default() };
    let mut found = Vec::new();
    let label = |set: &[usize]| set.iter().map(|&i| table.label(i).to_string()).collect::<Vec<_>>();
    for mask in 1..=full {
        if !candidate(mask) || seen[mask as usize] {
            continue;
        }
        seen[mask as usize] = true;
        counters.tried += 1;
        if options.prune {
            let mut orbit = vec![mask];
            for t in &translations {
                let m = map_mask(mask, t);
                if !seen[m as usize] {
                    seen[m as usize] = true;
                    counters.pruned_translation += 1;
                    orbit.push(m);
                }
            }
            // ψ(Sh) = ψ(S)ψ(h), so the images of S alone reach every class
            for a in &automorphisms {
                let image = map_mask(mask, a);
                for t in &translations {
                    let m = map_mask(image, t);
                    if !seen[m as usize] {
                        seen[m as usize] = true;
                        counters.pruned_automorphism += 1;
                        orbit.push(m);
                    }
                }
            }
            for m in orbit {
                let c = full & !m;
                if candidate(c) && !seen[c as usize] {
                    seen[c as usize] = true;
                    counters.pruned_complement += 1;
                }
            }
        }
        let set = mask_to_set(mask, n);
        if is_cayley_representation(table, &set)? {
            found.push(label(&set));
            if options.stop_at_first {
                break;
            }
        }
    }
    let outcome = match found.first() {
        None => SearchOutcome::ExhaustedNone,
        Some(set) => SearchOutcome::Found { set: set.clone() },
    };
    let found = if options.stop_at_first { Vec::new() } else { found };
    Ok(SearchReport { group: table.descriptor().to_string(), order: n, outcome, found, counters, wall_ms: None })
}

/// Groups of order at most 16 for which no Cayley representation exists,
/// as checked by exhaustive search.
pub const NON_CAYLEY_GROUPS: [&str; 11] =
    ["z:3", "z:4", "z:5", "z:6", "z:7", "z2^k:2", "z2^k:3", "z2^k:4", "z3^k:2", "s:3", "q8"];

pub fn reproduce_contraejemplos() -> Result<Vec<SearchReport>, SearchError> {
    let options = SearchOptions { prune: true, stop_at_first: true };
    NON_CAYLEY_GROUPS
        .iter()
        .map(|d| search_cayley(&Group::parse(d).expect("known descriptor"), options))
        .collect()
}

/// How two copies of the group are related in a three-orbit candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    None,
    /// Copy i below copy j.
    Up,
    /// Copy j below copy i.
    Down,
}

/// The copy pairs (0,1), (0,2), (1,2).
pub const COPY_PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// A semi-regular three-orbit poset: for each copy pair, an orientation
/// and a connection set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreeOrbitPoset {
    pub orientations: [Orientation; 3],
    pub sets: [Vec<usize>; 3],
    pub poset: FinitePoset,
}

/// Order relation on G ⊔ G′ ⊔ G″ (point `copy·n + g`) generated by the
/// given orientations and connection sets: for `Up` on pair (i, j),
/// g in copy i lies below h in copy j iff g⁻¹h ∈ S.
pub fn three_copy_relation(table: &GroupTable, orientations: &[Orientation; 3], sets: &[Vec<usize>; 3]) -> BitMatrix {
    let n = table.order();
    let mut m = BitMatrix::new(3 * n);
    for (k, &(i, j)) in COPY_PAIRS.iter().enumerate() {
        let (lo, hi) = match orientations[k] {
            Orientation::None => continue,
            Orientation::Up => (i, j),
            Orientation::Down => (j, i),
        };
        for g in 0..n {
            for &s in &sets[k] {
                m.set(lo * n + g, hi * n + table.mul(g, s));
            }
        }
    }
    m.close_transitively();
    m
}

fn three_copy_labels(table: &GroupTable) -> Vec<String> {
    (0..3).flat_map(|c| (0..table.order()).map(move |g| format!("{}{}", table.label(g), "'".repeat(c)))).collect()
}

/// Checks that an order on three copies of G is a strict order invariant
/// under the left-regular action, has no comparabilities inside a copy, and
/// that the action accounts for all of its automorphisms.
pub fn validate_three_orbit_candidate(table: &GroupTable, less: &BitMatrix) -> Result<Option<FinitePoset>, SearchError> {
    let n = table.order();
    if less.len() != 3 * n {
        return Ok(None);
    }
    for c in 0..3 {
        for a in 0..n {
            for b in 0..n {
                if less.get(c * n + a, c * n + b) {
                    return Ok(None);
                }
            }
        }
    }
    for g in 0..n {
        for x in 0..3 * n {
            for y in less.row_iter(x) {
                let (gx, gy) = ((x / n) * n + table.mul(g, x % n), (y / n) * n + table.mul(g, y % n));
                if !less.get(gx, gy) {
                    return Ok(None);
                }
            }
        }
    }
    let poset = match FinitePoset::from_order(three_copy_labels(table), less.clone()) {
        Ok(p) => p,
        Err(_) => return Ok(None),
    };
    let s = Structure::from_poset(&poset);
    let aut = AutEngine::new(&s)?.automorphism_group();
    Ok((aut.order == BigUint::from(n)).then_some(poset))
}

/// All semi-regular three-orbit posets on G ⊔ G′ ⊔ G″ with the
/// left-regular action, deduplicated by order relation.
pub fn enumerate_three_orbit(table: &GroupTable) -> Result<Vec<ThreeOrbitPoset>, SearchError> {
    let n = table.order();
    if n > THREE_ORBIT_CAP {
        return Err(SearchError::TooLarge { order: n, cap: THREE_ORBIT_CAP });
    }
    let mut options: Vec<(Orientation, Vec<usize>)> = vec![(Orientation::None, Vec::new())];
    for o in [Orientation::Up, Orientation::Down] {
        for mask in 1u32..(1 << n) {
            options.push((o, mask_to_set(mask, n)));
        }
    }
    let mut seen: FxHashSet<BitMatrix> = FxHashSet::default();
    let mut out = Vec::new();
    for a in &options {
        for b in &options {
            for c in &options {
                let orientations = [a.0, b.0, c.0];
                let sets = [a.1.clone(), b.1.clone(), c.1.clone()];
                let less = three_copy_relation(table, &orientations, &sets);
                if seen.contains(&less) {
                    continue;
                }
                seen.insert(less.clone());
                if let Some(poset) = validate_three_orbit_candidate(table, &less)? {
                    out.push(ThreeOrbitPoset { orientations, sets, poset });
                }
            }
        }
    }
    Ok(out)
}
