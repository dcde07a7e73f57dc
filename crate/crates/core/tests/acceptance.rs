//! Acceptance suite: one PASS/FAIL line per criterion, with timings.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use posetrep::aut::{automorphism_group, classify_poset, stabilizer_is_trivial, VerdictKind};
use posetrep::cayley::CayleyGraph;
use posetrep::certificate::{certify, f2_reference_table, margulis_bound_at_most, scan_margulis_primes, NEIGHBORHOOD_SIZE};
use posetrep::extensions::{
    build_window, check_action_on_window, gap_order_window, gradedness, BaseGroup, ExtensionGroupH, NonGradedWitness, WindowKind,
};
use posetrep::freegroup::{self, combine_words, nontrivial_words_up_to, reduced_words_of_length, ReducedWord};
use posetrep::group::{group_automorphisms, is_prime, margulis_generators, Group, GroupAutomorphism, GroupElement, GroupTable};
use posetrep::poset::{build_babai_poset, build_cayley_poset, build_drr_digraph, complement_connection, FinitePoset};
use posetrep::search::{enumerate_three_orbit, is_cayley_representation, reproduce_contraejemplos, validate_three_orbit_candidate, SearchOutcome};
use posetrep::smallcanc::{count_cyclically_reduced, few_relators_trial};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn table(desc: &str) -> GroupTable {
    GroupTable::new(&Group::parse(desc).unwrap()).unwrap()
}

fn index(t: &GroupTable, desc: &str, element: &str) -> usize {
    t.index_of(&Group::parse(desc).unwrap().parse_element(element).unwrap()).unwrap()
}

fn cyclic_check(n: u64, set: &[&str]) -> bool {
    let desc = format!("z:{n}");
    let t = table(&desc);
    let s: Vec<usize> = set.iter().map(|e| index(&t, &desc, e)).collect();
    let p = build_cayley_poset(&t, &s).unwrap();
    let aut = automorphism_group(&p).unwrap();
    let verdict = classify_poset(&p).unwrap();
    let free = (0..p.len()).all(|x| stabilizer_is_trivial(&p, x).unwrap().0);
    aut.order == BigUint::from(n) && aut.orbit_count() == 2 && free && verdict.kind == VerdictKind::CayleyRepresentation
}

fn criterion_1() -> Outcome {
    let bad: Vec<u64> = (9..=20).filter(|&n| !cyclic_check(n, &["0", "1", "3"])).collect();
    let z8 = cyclic_check(8, &["0", "1", "2", "4"]);
    outcome(bad.is_empty() && z8, format!("ℤn {{0,1,3}} failures for n in 9..20: {bad:?}; ℤ8 {{0,1,2,4}}: {z8}"))
}

fn criterion_2() -> Outcome {
    let reports = reproduce_contraejemplos().unwrap();
    let found: Vec<&str> =
        reports.iter().filter(|r| r.outcome != SearchOutcome::ExhaustedNone).map(|r| r.group.as_str()).collect();
    let tried: u64 = reports.iter().map(|r| r.counters.tried).sum();
    outcome(reports.len() == 11 && found.is_empty(), format!("{} groups exhausted, {tried} stabilizer tests, representable: {found:?}", reports.len()))
}

fn criterion_3() -> Outcome {
    let valid = enumerate_three_orbit(&table("z2^k:2")).unwrap();
    let t = table("z:9");
    let set = vec![index(&t, "z:9", "1"), index(&t, "z:9", "3")];
    let babai = build_babai_poset(&build_drr_digraph(&t, &set).unwrap()).unwrap();
    let control = validate_three_orbit_candidate(&t, babai.order_matrix()).unwrap().is_some();
    let aut = automorphism_group(&babai).unwrap();
    let control_ok = control && aut.order == BigUint::from(9u8) && aut.orbit_count() == 3;
    outcome(valid.is_empty() && control_ok, format!("ℤ₂² valid three-orbit posets: {}; ℤ₉ Babai control semi-regular with 3 orbits: {control_ok}", valid.len()))
}

fn x_power(word: &str) -> bool {
    word.parse::<ReducedWord>().unwrap().letters().iter().all(|l| l.generator() == 0)
}

fn criterion_4() -> Outcome {
    let f2 = Group::free(2).unwrap();
    let x = freegroup::pack(2, &ReducedWord::generator(0));
    let y = freegroup::pack(2, &ReducedWord::generator(1));
    let cert = certify(&f2, &x, &y).unwrap();
    let t = &cert.affinity_table;
    let mut twelve: Vec<&str> = t.iter().filter(|e| e.affinity == 12).map(|e| e.word.as_str()).collect();
    let mut nine: Vec<&str> = t.iter().filter(|e| e.affinity == 9 && !x_power(&e.word)).map(|e| e.word.as_str()).collect();
    twelve.sort_unstable();
    nine.sort_unstable();
    let size = t.len() + 1;
    let first = &cert.upper_bounds[0];
    let unique = first.expected == "unique" && first.holds && first.upper_bounds == ["1'"];
    let bounds_hold = cert.upper_bounds.iter().all(|c| c.holds);
    let pass = twelve == ["X", "x"] && nine == ["Y", "y"] && size == NEIGHBORHOOD_SIZE && unique && bounds_hold && *t == f2_reference_table();
    outcome(pass, format!("α = 12 at {twelve:?}, α = 9 off ⟨x⟩ at {nine:?}, |SS⁻¹| = {size}, unique upper bound of {{e, y⁻¹}}: {unique}, all five upper-bound checks: {bounds_hold}"))
}

fn criterion_5() -> Outcome {
    let scan = scan_margulis_primes(3, 1000).unwrap();
    // SL₂(2): both generators are trivial, girth 1 against bound −1
    let mut failures = Vec::new();
    if !margulis_bound_at_most(2, 1) {
        failures.push(2);
    }
    for p in (3..=200).filter(|&p| is_prime(p)) {
        let e = scan.entries.iter().find(|e| e.p == p).unwrap();
        let girth = e.girth.length.unwrap_or(e.girth.limit + 1);
        if !margulis_bound_at_most(p, girth) {
            failures.push(p);
        }
    }
    let Some(first) = scan.first_applicable else {
        return outcome(false, "scan found no prime with girth > 21");
    };
    let group = Group::sl2(first).unwrap();
    let (x, y) = margulis_generators(first).unwrap();
    let cert = certify(&group, &x, &y).unwrap();
    let girth = CayleyGraph::new(&group, vec![x, y]).unwrap().girth(22).unwrap().length();
    let matches = cert.affinity_table == f2_reference_table();
    let pass = failures.is_empty() && cert.is_applicable() && matches && cert.upper_bounds.iter().all(|c| c.holds);
    outcome(pass, format!("bound failures {failures:?}; first prime with girth > 21: {first} (girth {girth:?}); certificate applicable: {}, affinity table equals F₂: {matches}", cert.is_applicable()))
}

const GROUPS_UP_TO_8: [&str; 14] =
    ["z:1", "z:2", "z:3", "z:4", "z2^k:2", "z:5", "z:6", "s:3", "z:7", "z:8", "prod(z:2,z:4)", "z2^k:3", "d:4", "q8"];

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = 0;
    let mut checked = 0;
    for d in GROUPS_UP_TO_8 {
        let t = table(d);
        let n = t.order();
        if n < 2 {
            // the only connection set is {e}, and its complement is empty
            continue;
        }
        let auts = group_automorphisms(&t, 8).unwrap();
        for _ in 0..200 {
            let mask = rng.gen_range(1u32..(1 << n) - 1);
            let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let h = rng.gen_range(0..n);
            let psi = auts[rng.gen_range(0..auts.len())].index_images(&t);
            let status = is_cayley_representation(&t, &s).unwrap();
            let shifted: Vec<usize> = s.iter().map(|&x| t.mul(x, h)).collect();
            let mapped: Vec<usize> = s.iter().map(|&x| psi[x]).collect();
            let comp = complement_connection(&t, &s).unwrap();
            for other in [shifted, mapped, comp] {
                checked += 1;
                if is_cayley_representation(&t, &other).unwrap() != status {
                    violations += 1;
                }
            }
        }
    }
    outcome(violations == 0, format!("{violations} violations in {checked} transformed sets over 13 nontrivial groups"))
}

/// Automorphisms by running through every permutation (Heap's algorithm).
fn all_permutation_automorphisms(p: &FinitePoset) -> Vec<Vec<usize>> {
    let n = p.len();
    let relations: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).filter(move |&b| p.less(a, b)).map(move |b| (a, b))).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    let keep = |perm: &[usize]| relations.iter().all(|&(a, b)| p.less(perm[a], perm[b]));
    if keep(&perm) {
        out.push(perm.clone());
    }
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            if keep(&perm) {
                out.push(perm.clone());
            }
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn orbit_partition(n: usize, auts: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut orbits: Vec<Vec<usize>> = (0..n)
        .map(|x| {
            let mut o: Vec<usize> = auts.iter().map(|a| a[x]).collect();
            o.sort_unstable();
            o.dedup();
            o
        })
        .collect();
    orbits.sort();
    orbits.dedup();
    orbits
}

fn engine_agrees(p: &FinitePoset) -> bool {
    let engine = automorphism_group(p).unwrap();
    let brute = all_permutation_automorphisms(p);
    let mut engine_orbits: Vec<Vec<usize>> = engine
        .orbits
        .iter()
        .map(|o| {
            let mut o = o.clone();
            o.sort_unstable();
            o
        })
        .collect();
    engine_orbits.sort();
    engine.order == BigUint::from(brute.len()) && engine_orbits == orbit_partition(p.len(), &brute)
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut mismatches = Vec::new();
    for i in 0..100 {
        let n = rng.gen_range(6..=10);
        let density: f64 = rng.gen_range(0.05..0.6);
        let mut shuffled: Vec<usize> = (0..n).collect();
        for k in (1..n).rev() {
            shuffled.swap(k, rng.gen_range(0..=k));
        }
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(density) {
                    pairs.push((shuffled[a], shuffled[b]));
                }
            }
        }
        let p = FinitePoset::from_relations((0..n).map(|k| k.to_string()).collect(), &pairs).unwrap();
        if !engine_agrees(&p) {
            mismatches.push(format!("random #{i}"));
        }
    }
    let mut cayley = 0;
    for d in ["z:1", "z:2", "z:3", "z:4", "z2^k:2", "z:5"] {
        let t = table(d);
        let n = t.order();
        for mask in 1u32..1 << n {
            let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let p = build_cayley_poset(&t, &s).unwrap();
            cayley += 1;
            if !engine_agrees(&p) {
                mismatches.push(format!("{d} {s:?}"));
            }
        }
    }
    outcome(mismatches.is_empty(), format!("100 random posets and {cayley} Cayley posets; mismatches: {mismatches:?}"))
}

fn criterion_8() -> Outcome {
    let mut count_failures = Vec::new();
    for l in 1..=20usize {
        let exact = count_cyclically_reduced(2, l).exact;
        if l <= 12 {
            let brute = reduced_words_of_length(2, l).iter().filter(|w| w.is_cyclically_reduced()).count();
            if exact != BigUint::from(brute) {
                count_failures.push(l);
            }
        }
        if exact > BigUint::from(4u8) * BigUint::from(3u8).pow(l as u32 - 1) {
            count_failures.push(l);
        }
    }
    let trial = few_relators_trial(2, 2, 60, 200, 7).unwrap();
    let fraction = Ratio::new(trial.c16_and_long, trial.samples);
    let pass = count_failures.is_empty() && fraction >= Ratio::new(95, 100);
    outcome(
        pass,
        format!(
            "count failures {count_failures:?}; C'(1/6) with all relators ≥ 22: {}/{} (need ≥ 95/100; {} of {} have all relators ≥ 22)",
            trial.c16_and_long, trial.samples, trial.long, trial.samples
        ),
    )
}

fn criterion_9() -> Outcome {
    let words = nontrivial_words_up_to(2, 4);
    let tables: Vec<GroupTable> = ["z:1", "z:2", "z:3", "z:4", "z2^k:2", "z:5", "z:6", "s:3"].iter().map(|d| table(d)).collect();
    // solution sets of each input word, per group
    let solutions: Vec<Vec<Vec<bool>>> = tables
        .iter()
        .map(|t| {
            let n = t.order();
            words
                .iter()
                .map(|w| (0..n * n).map(|k| w.evaluate_indexed(t, &[k / n, k % n]).unwrap() == t.identity()).collect())
                .collect()
        })
        .collect();
    let mut violations = 0u64;
    let mut trivial_outputs = 0u64;
    let mut pairs = 0u64;
    for (i, w1) in words.iter().enumerate() {
        for (j, w2) in words.iter().enumerate() {
            pairs += 1;
            let w = combine_words(&[w1.clone(), w2.clone()]).unwrap();
            if w.is_empty() {
                trivial_outputs += 1;
            }
            for (t, sol) in tables.iter().zip(&solutions) {
                let n = t.order();
                for k in 0..n * n {
                    if (sol[i][k] || sol[j][k]) && w.evaluate_indexed(t, &[k / n, k % n]).unwrap() != t.identity() {
                        violations += 1;
                    }
                }
            }
        }
    }
    outcome(
        violations == 0 && trivial_outputs == 0,
        format!("{pairs} word pairs over 8 groups: {violations} violations, {trivial_outputs} trivial outputs"),
    )
}

fn criterion_10() -> Outcome {
    let z9 = table("z:9");
    let mut axioms_ok = true;
    for psi in [GroupAutomorphism::Identity, GroupAutomorphism::Inversion] {
        let h = ExtensionGroupH::new(BaseGroup::finite(z9.clone(), &psi).unwrap());
        axioms_ok &= h.verify_axioms(3).all_hold();
    }
    let s3 = table("s:3");
    let conj: Vec<usize> = (0..6).map(|g| s3.mul(s3.mul(1, g), s3.inv(1))).collect();
    axioms_ok &= ExtensionGroupH::new(BaseGroup::finite(s3, &GroupAutomorphism::Table(conj)).unwrap()).verify_axioms(3).all_hold();
    axioms_ok &= ExtensionGroupH::new(BaseGroup::integers(true, 12)).verify_axioms(3).all_hold();

    let h = ExtensionGroupH::new(BaseGroup::finite(z9.clone(), &GroupAutomorphism::Identity).unwrap());
    let set: Vec<usize> = [0, 1, 3].iter().map(|&k| z9.index_of(&GroupElement::new(&[k])).unwrap()).collect();
    let w = build_window(WindowKind::Cayley, &h, &set, 3).unwrap();
    let graded = gradedness(&w.poset).is_ok_and(|r| r.rank.iter().zip(&w.layer).all(|(r, l)| *r == l + 3));
    let action = check_action_on_window(&h, &w).unwrap();
    let action_ok = action.free && action.interior_transitive && action.order_preserving && action.injective;

    let chains = match gradedness(&gap_order_window(0, 6).unwrap()) {
        Err(NonGradedWitness::Chains { short, long }) => short == ["0", "3", "6"] && long == ["0", "2", "4", "6"],
        _ => false,
    };
    outcome(
        axioms_ok && graded && action_ok && chains,
        format!("H axioms: {axioms_ok}; ℤ₉ window N=3 graded by layer: {graded}; free and interior-transitive: {action_ok}; (ℤ,◁) chains 0◁3◁6 and 0◁2◁4◁6: {chains}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 10] = [
        ("cyclic family ℤn {0,1,3} and ℤ8 {0,1,2,4}", criterion_1, Some(Duration::from_secs(5))),
        ("exhaustion of the eleven non-representable groups", criterion_2, Some(Duration::from_secs(600))),
        ("no three-orbit posets for ℤ₂², ℤ₉ Babai control", criterion_3, Some(Duration::from_secs(60))),
        ("F₂ affinity table and upper bounds", criterion_4, Some(Duration::from_secs(1))),
        ("SL₂ girth bound, prime scan, certificate", criterion_5, Some(Duration::from_secs(120))),
        ("invariance under translation, automorphism, complement", criterion_6, None),
        ("automorphism engine against all permutations", criterion_7, None),
        ("cyclically reduced counts and few-relators sampler", criterion_8, Some(Duration::from_secs(60))),
        ("combine_words exhaustive check", criterion_9, Some(Duration::from_secs(300))),
        ("extensions: H axioms, graded window, non-graded example", criterion_10, None),
    ];
    let mut passed = 0;
    for (k, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = result.pass && in_time;
        passed += pass as usize;
        let budget = limit.map(|l| format!(" of {}s", l.as_secs())).unwrap_or_default();
        println!(
            "{} {:>2} {name}: {} [{:.2}s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{passed}/{} criteria passed", criteria.len());
}
