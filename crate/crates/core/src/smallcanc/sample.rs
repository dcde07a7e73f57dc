//! Random presentations: the few-relators model (m cyclically reduced words
//! of length at most l) and the density model (⌊(2n−1)^{dl}⌋ words of
//! length exactly l).
//!
//! Sample i of a batch draws from ChaCha8 stream i of the seed, so batches
//! are reproducible regardless of thread count.

use num_bigint::{BigUint, RandBigInt};
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_c_lambda, count_cyclically_reduced, Presentation, SmallCancError, MIN_RELATOR_LENGTH};
use crate::freegroup::{Letter, ReducedWord, MAX_RANK};

/// Most relators the density model will draw.
pub const DENSITY_CAP: usize = 1 << 16;

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn check_generators(n: usize) -> Result<(), SmallCancError> {
    if n == 0 || n > MAX_RANK {
        return Err(SmallCancError::Generators(n));
    }
    Ok(())
}

/// Uniform over reduced words of length `len`, rejecting until the word is
/// cyclically reduced; conditioning keeps the result uniform.
pub fn random_cyclically_reduced<R: Rng>(rng: &mut R, n: usize, len: usize) -> ReducedWord {
    loop {
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        for i in 0..len {
            let l = if i == 0 {
                Letter::from_code(rng.gen_range(0..2 * n))
            } else {
                // the 2n−1 letters other than the inverse of the previous one
                let back = letters[i - 1].inv().code();
                let c = rng.gen_range(0..2 * n - 1);
                Letter::from_code(if c >= back { c + 1 } else { c })
            };
            letters.push(l);
        }
        let w = ReducedWord::from_letters(&letters);
        if w.is_cyclically_reduced() {
            return w;
        }
    }
}

/// Uniform over cyclically reduced words of length 1..=`max_len`: the
/// length k is drawn with weight c_k.
pub fn random_cyclically_reduced_up_to<R: Rng>(rng: &mut R, n: usize, weights: &[BigUint]) -> ReducedWord {
    let total: BigUint = weights.iter().sum();
    let mut pick = rng.gen_biguint_below(&total);
    for (k, w) in weights.iter().enumerate() {
        if pick < *w {
            return random_cyclically_reduced(rng, n, k + 1);
        }
        pick -= w;
    }
    unreachable!("pick is below the total weight")
}

fn length_weights(n: usize, max_len: usize) -> Vec<BigUint> {
    (1..=max_len).map(|k| count_cyclically_reduced(n, k).exact).collect()
}

/// `count` presentations with `m` relators each, uniform among cyclically
/// reduced words of length at most `l`.
pub fn sample_few_relators(n: usize, m: usize, l: usize, count: usize, seed: u64) -> Result<Vec<Presentation>, SmallCancError> {
    check_generators(n)?;
    if l == 0 || m == 0 {
        return Err(SmallCancError::Parameter("m and l must be positive".into()));
    }
    let weights = length_weights(n, l);
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let relators = (0..m).map(|_| random_cyclically_reduced_up_to(&mut rng, n, &weights)).collect();
            Presentation::new(n, relators)
        })
        .collect()
}

/// ⌊(2n−1)^{dl}⌋ computed exactly as the q-th integer root of
/// (2n−1)^{pl} for d = p/q.
pub fn density_relator_count(n: usize, d: Ratio<u64>, l: usize) -> BigUint {
    let base = BigUint::from(2 * n as u64 - 1);
    let power = base.pow((*d.numer() as u128 * l as u128).try_into().expect("exponent fits"));
    power.nth_root((*d.denom()).try_into().expect("denominator fits"))
}

/// One density-model presentation: ⌊(2n−1)^{dl}⌋ independent uniform
/// cyclically reduced words of length exactly `l`.
pub fn sample_density(n: usize, d: Ratio<u64>, l: usize, seed: u64) -> Result<Presentation, SmallCancError> {
    check_generators(n)?;
    if d.is_zero() || d >= Ratio::one() || l == 0 {
        return Err(SmallCancError::Parameter("need 0 < d < 1 and l ≥ 1".into()));
    }
    let count = density_relator_count(n, d, l);
    let count = match count.to_usize() {
        Some(c) if c <= DENSITY_CAP => c,
        _ => return Err(SmallCancError::SampleCap { count: count.to_string(), cap: DENSITY_CAP }),
    };
    let mut rng = stream(seed, 0);
    let relators = (0..count).map(|_| random_cyclically_reduced(&mut rng, n, l)).collect();
    Presentation::new(n, relators)
}

/// Exact upper bound on the fraction of m-tuples of cyclically reduced
/// words of length ≤ l on two generators containing a word of length
/// ≤ 21: m·2^m·3^21·3^{lm−l} / (8^m·3^{lm−2m}).
pub fn short_relator_bound(m: usize, l: usize) -> Ratio<BigUint> {
    let three = BigUint::from(3u8);
    let (m32, l32) = (m as u32, l as u32);
    let numer = BigUint::from(m) * BigUint::from(2u8).pow(m32) * three.pow(21 + l32 * m32 - l32);
    let denom = BigUint::from(8u8).pow(m32) * three.pow(l32 * m32 - 2 * m32);
    Ratio::new(numer, denom)
}

/// Outcome counts of a few-relators Monte Carlo batch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FewRelatorsTrial {
    pub generators: usize,
    pub relators: usize,
    pub max_length: usize,
    pub samples: usize,
    pub seed: u64,
    pub c16: usize,
    /// Samples whose relators all have length ≥ 22.
    pub long: usize,
    /// Samples satisfying C'(1/6) with all relators of length ≥ 22.
    pub c16_and_long: usize,
    pub cayley_representable: usize,
}

pub fn few_relators_trial(n: usize, m: usize, l: usize, count: usize, seed: u64) -> Result<FewRelatorsTrial, SmallCancError> {
    let samples = sample_few_relators(n, m, l, count, seed)?;
    let reports = samples
        .par_iter()
        .map(|p| check_c_lambda(p, Ratio::new(1, 6)).map(|r| (r, p.min_relator_length().unwrap_or(0) >= MIN_RELATOR_LENGTH)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FewRelatorsTrial {
        generators: n,
        relators: m,
        max_length: l,
        samples: count,
        seed,
        c16: reports.iter().filter(|(r, _)| r.satisfies_c16).count(),
        long: reports.iter().filter(|(_, long)| *long).count(),
        c16_and_long: reports.iter().filter(|(r, long)| r.satisfies_c16 && *long).count(),
        cayley_representable: reports.iter().filter(|(r, _)| r.cayley_representable).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_counts() {
        assert_eq!(density_relator_count(2, Ratio::new(1, 10), 20), BigUint::from(9u8));
        assert_eq!(density_relator_count(2, Ratio::new(1, 2), 4), BigUint::from(9u8));
        // ⌊3^{1/3·4}⌋ = ⌊4.326…⌋
        assert_eq!(density_relator_count(2, Ratio::new(1, 3), 4), BigUint::from(4u8));
        let p = sample_density(2, Ratio::new(1, 10), 20, 7).unwrap();
        assert_eq!(p.relators().len(), 9);
        assert!(p.relators().iter().all(|r| r.len() == 20 && r.is_cyclically_reduced()));
        assert!(matches!(sample_density(2, Ratio::new(9, 10), 40, 7), Err(SmallCancError::SampleCap { .. })));
    }

    #[test]
    fn few_relator_samples_respect_contract() {
        let a = sample_few_relators(2, 2, 60, 50, 7).unwrap();
        assert!(a.iter().all(|p| p.relators().len() == 2 && p.relators().iter().all(|r| r.len() <= 60)));
        assert_eq!(a, sample_few_relators(2, 2, 60, 50, 7).unwrap());
        assert_ne!(a, sample_few_relators(2, 2, 60, 50, 8).unwrap());
    }

    #[test]
    fn short_relators_are_negligible_at_length_60() {
        let bound = short_relator_bound(1, 60);
        let tiny = Ratio::new(BigUint::from(1u8), BigUint::from(10u8).pow(15));
        assert!(bound < tiny);
        let samples = sample_few_relators(2, 1, 60, 10_000, 7).unwrap();
        assert_eq!(samples.iter().filter(|p| p.relators()[0].len() <= 21).count(), 0);
    }
}
