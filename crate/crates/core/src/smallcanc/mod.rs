//! Finite presentations, pieces of symmetrized relator sets, the C'(λ)
//! condition and random presentation models.

mod sample;
pub mod suffix;

pub use sample::{
    density_relator_count, few_relators_trial, random_cyclically_reduced, random_cyclically_reduced_up_to, sample_density,
    sample_few_relators, short_relator_bound, FewRelatorsTrial, DENSITY_CAP,
};

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::freegroup::{ReducedWord, GENERATOR_NAMES, MAX_RANK};

/// Minimum relator length for the Cayley-representation criteria.
pub const MIN_RELATOR_LENGTH: usize = 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmallCancError {
    #[error("generator count must be in 1..={MAX_RANK}, got {0}")]
    Generators(usize),
    #[error("relator {0} is not cyclically reduced")]
    NotCyclicallyReduced(String),
    #[error("trivial relator")]
    TrivialRelator,
    #[error("relator {word} uses more than {generators} generators")]
    Rank { word: String, generators: usize },
    #[error("bad presentation: {0}")]
    Parse(String),
    #[error("λ must lie strictly between 0 and 1")]
    Lambda,
    #[error("{count} relators exceed the sample cap {cap}")]
    SampleCap { count: String, cap: usize },
    #[error("invalid sampler parameter: {0}")]
    Parameter(String),
}

/// ⟨x₁, …, xₙ | r₁, …, r_m⟩ with cyclically reduced nontrivial relators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    generators: usize,
    relators: Vec<ReducedWord>,
}

impl Presentation {
    pub fn new(generators: usize, relators: Vec<ReducedWord>) -> Result<Presentation, SmallCancError> {
        if generators == 0 || generators > MAX_RANK {
            return Err(SmallCancError::Generators(generators));
        }
        for r in &relators {
            if r.is_empty() {
                return Err(SmallCancError::TrivialRelator);
            }
            if !r.is_cyclically_reduced() {
                return Err(SmallCancError::NotCyclicallyReduced(r.to_string()));
            }
            if r.rank() > generators {
                return Err(SmallCancError::Rank { word: r.to_string(), generators });
            }
        }
        Ok(Presentation { generators, relators })
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn relators(&self) -> &[ReducedWord] {
        &self.relators
    }

    pub fn min_relator_length(&self) -> Option<usize> {
        self.relators.iter().map(|r| r.len()).min()
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = GENERATOR_NAMES[..self.generators].iter().map(|c| c.to_string()).collect();
        let rels: Vec<String> = self.relators.iter().map(|r| r.to_string()).collect();
        write!(f, "<{} | {}>", gens.join(","), rels.join(", "))
    }
}

/// Parses `<x,y | x y X Y, x^2 y^3>`. Generators must be the first names
/// of `x, y, z, w, a, b, c, d` in order.
impl FromStr for Presentation {
    type Err = SmallCancError;

    fn from_str(s: &str) -> Result<Presentation, SmallCancError> {
        let body = s
            .trim()
            .strip_prefix('<')
            .and_then(|b| b.strip_suffix('>'))
            .ok_or_else(|| SmallCancError::Parse("expected <generators | relators>".into()))?;
        let (gens, rels) = body.split_once('|').ok_or_else(|| SmallCancError::Parse("missing '|'".into()))?;
        let names: Vec<&str> = gens.split(',').map(str::trim).filter(|g| !g.is_empty()).collect();
        for (i, name) in names.iter().enumerate() {
            if i >= MAX_RANK || *name != GENERATOR_NAMES[i].to_string() {
                return Err(SmallCancError::Parse(format!("generator {} should be {}", name, GENERATOR_NAMES.get(i).unwrap_or(&'?'))));
            }
        }
        let mut relators = Vec::new();
        // column of each relator, counted in characters from the start of the input
        let mut column = s[..rels.as_ptr() as usize - s.as_ptr() as usize].chars().count();
        for (i, r) in rels.split(',').enumerate() {
            let lead = r.chars().take_while(|c| c.is_whitespace()).count();
            if !r.trim().is_empty() {
                let w = r.trim().parse::<ReducedWord>().map_err(|e| {
                    SmallCancError::Parse(format!("relator {} at column {}: {e}", i + 1, column + lead + 1))
                })?;
                relators.push(w);
            }
            column += r.chars().count() + 1;
        }
        Presentation::new(names.len(), relators)
    }
}

/// One element of the symmetrized set: a cyclic shift of a relator or of
/// its inverse, located inside the doubled-word text.
struct Origin {
    relator: usize,
    start: usize,
    len: usize,
}

/// Per-relator longest piece: the longest common prefix of one of its
/// cyclic shifts (or of its inverse) with a different element of the
/// symmetrized set. Two origins spelling the same word count as distinct
/// elements, and then their common prefix is capped at length − 1.
pub fn relator_max_pieces(p: &Presentation) -> Vec<usize> {
    let width = 2 * p.generators as u32;
    let mut text: Vec<u32> = Vec::new();
    let mut origins: Vec<Origin> = Vec::new();
    let mut separator = width;
    for (j, r) in p.relators.iter().enumerate() {
        for w in [r.clone(), r.inverse()] {
            let codes: Vec<u32> = w.letters().iter().map(|l| l.code() as u32).collect();
            let base = text.len();
            text.extend_from_slice(&codes);
            text.extend_from_slice(&codes);
            text.push(separator);
            separator += 1;
            origins.extend((0..codes.len()).map(|s| Origin { relator: j, start: base + s, len: codes.len() }));
        }
    }
    let mut best = vec![0usize; p.relators.len()];
    if origins.len() < 2 {
        return best;
    }
    let sa = suffix::suffix_array(&text);
    let lcp = suffix::lcp_array(&text, &sa);
    let mut origin_at = vec![usize::MAX; text.len()];
    for (k, o) in origins.iter().enumerate() {
        origin_at[o.start] = k;
    }
    let mut rank = vec![0usize; text.len()];
    for (i, &s) in sa.iter().enumerate() {
        rank[s] = i;
    }
    let piece = |a: &Origin, b: &Origin, common: usize| {
        let l = common.min(a.len).min(b.len);
        if l == a.len && a.len == b.len {
            l - 1
        } else {
            l
        }
    };
    for o in &origins {
        let r = rank[o.start];
        let mut own = 0usize;
        // walk down then up the suffix array while the running LCP can
        // still beat the best piece found for this origin
        let mut run = usize::MAX;
        for i in r + 1..sa.len() {
            run = run.min(lcp[i]);
            if run <= own {
                break;
            }
            if let Some(other) = origins.get(origin_at[sa[i]]) {
                own = own.max(piece(o, other, run));
            }
        }
        run = usize::MAX;
        for i in (0..r).rev() {
            run = run.min(lcp[i + 1]);
            if run <= own {
                break;
            }
            if let Some(other) = origins.get(origin_at[sa[i]]) {
                own = own.max(piece(o, other, run));
            }
        }
        best[o.relator] = best[o.relator].max(own);
    }
    best
}

/// Longest piece over the whole symmetrized set.
pub fn max_piece_length(p: &Presentation) -> usize {
    relator_max_pieces(p).into_iter().max().unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProperPower {
    pub root: String,
    pub exponent: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CancellationReport {
    pub presentation: String,
    pub generators: usize,
    pub relator_lengths: Vec<usize>,
    pub max_piece: usize,
    pub relator_max_pieces: Vec<usize>,
    pub lambda: String,
    pub satisfies_lambda: bool,
    pub satisfies_c16: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proper_power: Option<ProperPower>,
    pub cayley_representable: bool,
    /// Which rule produced a positive flag.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
}

fn satisfies(lambda: Ratio<u64>, pieces: &[usize], p: &Presentation) -> bool {
    // |piece| < λ·|r|  ⇔  |piece|·den < num·|r|
    pieces
        .iter()
        .zip(&p.relators)
        .all(|(&piece, r)| piece as u64 * lambda.denom() < *lambda.numer() * r.len() as u64)
}

/// Decides C'(λ) and the Cayley-representation criteria: two generators
/// and either C'(1/6) with every relator of length ≥ 22, or a single
/// relator that is a proper power of length ≥ 22.
pub fn check_c_lambda(p: &Presentation, lambda: Ratio<u64>) -> Result<CancellationReport, SmallCancError> {
    if *lambda.numer() == 0 || lambda >= Ratio::from_integer(1) {
        return Err(SmallCancError::Lambda);
    }
    let pieces = relator_max_pieces(p);
    let satisfies_lambda = satisfies(lambda, &pieces, p);
    let satisfies_c16 = satisfies(Ratio::new(1, 6), &pieces, p);
    let long = p.min_relator_length().is_none_or(|m| m >= MIN_RELATOR_LENGTH);
    let proper_power = match p.relators.as_slice() {
        [r] => {
            let (root, exponent) = r.primitive_root();
            (exponent >= 2).then(|| ProperPower { root: root.to_string(), exponent })
        }
        _ => None,
    };
    let basis = if p.generators != 2 {
        None
    } else if p.relators.is_empty() {
        Some("free")
    } else if satisfies_c16 && long {
        Some("small-cancellation")
    } else if proper_power.is_some() && long {
        Some("proper-power")
    } else {
        None
    };
    Ok(CancellationReport {
        presentation: p.to_string(),
        generators: p.generators,
        relator_lengths: p.relators.iter().map(|r| r.len()).collect(),
        max_piece: pieces.iter().copied().max().unwrap_or(0),
        relator_max_pieces: pieces,
        lambda: lambda.to_string(),
        satisfies_lambda,
        satisfies_c16,
        proper_power,
        cayley_representable: basis.is_some(),
        basis: basis.map(str::to_string),
    })
}

/// Number of cyclically reduced words of length exactly `len` and of
/// length between 1 and `len` on `n` generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicCount {
    pub length: usize,
    #[serde(serialize_with = "as_string")]
    pub exact: BigUint,
    #[serde(serialize_with = "as_string")]
    pub up_to: BigUint,
}

fn as_string<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Cyclically reduced words of length l are closed walks of length l in
/// the letter graph where a → b unless b = a⁻¹, so c_l = trace(Aˡ).
pub fn count_cyclically_reduced(n: usize, len: usize) -> CyclicCount {
    let letters = 2 * n;
    let allowed = |a: usize, b: usize| b != (a ^ 1);
    // rows[a] = e_a·Aᵏ
    let mut rows: Vec<Vec<BigUint>> =
        (0..letters).map(|a| (0..letters).map(|b| BigUint::from((a == b) as u8)).collect()).collect();
    let mut up_to = BigUint::from(0u8);
    let mut exact = BigUint::from(0u8);
    for _ in 0..len {
        rows = rows
            .iter()
            .map(|row| {
                (0..letters)
                    .map(|b| {
                        (0..letters).filter(|&a| allowed(a, b)).map(|a| &row[a]).fold(BigUint::from(0u8), |acc, v| acc + v)
                    })
                    .collect()
            })
            .collect();
        exact = (0..letters).map(|a| &rows[a][a]).fold(BigUint::from(0u8), |acc, v| acc + v);
        up_to += &exact;
    }
    CyclicCount { length: len, exact, up_to }
}
