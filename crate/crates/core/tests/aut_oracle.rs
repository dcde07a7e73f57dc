use num_bigint::BigUint;
use posetrep::aut::{automorphism_group, stabilizer_is_trivial, AutGroup};
use posetrep::group::{Group, GroupTable};
use posetrep::perm::{closure_size, Permutation};
use posetrep::poset::{build_cayley_poset, FinitePoset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All automorphisms by backtracking over partial maps that preserve the
/// order between assigned points.
fn brute_automorphisms(p: &FinitePoset) -> Vec<Vec<usize>> {
    fn go(p: &FinitePoset, images: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let i = images.len();
        if i == p.len() {
            out.push(images.clone());
            return;
        }
        for c in 0..p.len() {
            if used[c] {
                continue;
            }
            let ok = (0..i).all(|j| p.less(j, i) == p.less(images[j], c) && p.less(i, j) == p.less(c, images[j]));
            if ok {
                used[c] = true;
                images.push(c);
                go(p, images, used, out);
                images.pop();
                used[c] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(p, &mut Vec::new(), &mut vec![false; p.len()], &mut out);
    out
}

fn brute_orbit_count(p: &FinitePoset, auts: &[Vec<usize>]) -> usize {
    let mut rep: Vec<usize> = (0..p.len()).collect();
    for i in 0..p.len() {
        rep[i] = auts.iter().map(|a| a[i]).min().unwrap();
    }
    // orbit of i is the set of its images, so its minimum identifies it
    let mut reps = rep.clone();
    reps.sort_unstable();
    reps.dedup();
    reps.len()
}

fn check(p: &FinitePoset) -> AutGroup {
    let aut = automorphism_group(p).unwrap();
    let brute = brute_automorphisms(p);
    assert_eq!(aut.order, BigUint::from(brute.len()), "order of {:?}", p.covers());
    assert_eq!(aut.orbit_count(), brute_orbit_count(p, &brute));
    for g in &aut.generators {
        assert!(p.is_automorphism(&g.images()));
    }
    if brute.len() <= 10_000 {
        assert_eq!(closure_size(p.len(), &aut.generators, 10_000), Some(brute.len()));
    }
    for point in 0..p.len() {
        let fixing = brute.iter().filter(|a| a[point] == point).count();
        let (trivial, witness) = stabilizer_is_trivial(p, point).unwrap();
        assert_eq!(trivial, fixing == 1);
        if let Some(w) = witness {
            assert_eq!(w.apply(point), point);
            assert!(!w.is_identity());
            assert!(p.is_automorphism(&w.images()));
        }
    }
    aut
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Every strict order on `n` labeled points.
fn all_posets(n: usize) -> Vec<FinitePoset> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    'mask: for mask in 0u64..1 << pairs.len() {
        let rel = |a: usize, b: usize| -> bool {
            a != b && {
                let k = pairs.iter().position(|&p| p == (a, b)).unwrap();
                mask >> k & 1 == 1
            }
        };
        for a in 0..n {
            for b in 0..n {
                if rel(a, b) {
                    if rel(b, a) {
                        continue 'mask;
                    }
                    for c in 0..n {
                        if rel(b, c) && !rel(a, c) {
                            continue 'mask;
                        }
                    }
                }
            }
        }
        let chosen: Vec<(usize, usize)> = pairs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &p)| p).collect();
        out.push(FinitePoset::from_relations(labels(n), &chosen).unwrap());
    }
    out
}

#[test]
fn exhaustive_small_posets() {
    let counts: Vec<usize> = (1..=5).map(|n| all_posets(n).len()).collect();
    assert_eq!(counts, [1, 3, 19, 219, 4231]);
    for n in 1..=5 {
        for p in all_posets(n) {
            check(&p);
        }
    }
}

fn random_poset(rng: &mut ChaCha8Rng, n: usize) -> FinitePoset {
    let density: f64 = rng.gen_range(0.05..0.6);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                pairs.push((perm[a], perm[b]));
            }
        }
    }
    FinitePoset::from_relations(labels(n), &pairs).unwrap()
}

#[test]
fn random_posets_up_to_ten_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.gen_range(6..=10);
        let p = random_poset(&mut rng, n);
        let aut = check(&p);
        assert_eq!(aut.order, automorphism_group(&p.opposite()).unwrap().order);
    }
}

#[test]
fn symmetric_structures() {
    // antichains, chains and complete bipartite posets
    for n in 1..=8 {
        let anti = FinitePoset::from_relations(labels(n), &[]).unwrap();
        let fact: u64 = (1..=n as u64).product();
        assert_eq!(automorphism_group(&anti).unwrap().order, BigUint::from(fact));
        let chain: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        let chain = FinitePoset::from_relations(labels(n), &chain).unwrap();
        assert_eq!(automorphism_group(&chain).unwrap().order, BigUint::from(1u32));
    }
    let k: Vec<(usize, usize)> = (0..5).flat_map(|a| (5..11).map(move |b| (a, b))).collect();
    let p = FinitePoset::from_relations(labels(11), &k).unwrap();
    assert_eq!(automorphism_group(&p).unwrap().order, BigUint::from(120u32 * 720));
}

fn left_action_perm(t: &GroupTable, g: usize) -> Permutation {
    let n = t.order();
    let images: Vec<usize> = (0..2 * n).map(|i| if i < n { t.mul(g, i) } else { n + t.mul(g, i - n) }).collect();
    Permutation::from_images(&images).unwrap()
}

#[test]
fn cayley_posets_of_small_groups() {
    for desc in ["z:1", "z:2", "z:3", "z:4", "z2^k:2", "z:5"] {
        let t = GroupTable::new(&Group::parse(desc).unwrap()).unwrap();
        let n = t.order();
        for mask in 1u32..(1 << n) {
            let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let p = build_cayley_poset(&t, &s).unwrap();
            let aut = check(&p);
            for g in 0..n {
                assert!(p.is_automorphism(&left_action_perm(&t, g).images()));
            }
            let spans = t.generated(&posetrep::cayley::difference_set(&t, &s)).iter().all(|&b| b);
            if spans {
                assert_eq!(&aut.order % BigUint::from(n), BigUint::from(0u32));
            }
        }
    }
}

#[test]
fn larger_cayley_posets_against_brute_force() {
    for (desc, set) in [("z:6", vec![0usize, 1, 3]), ("z:7", vec![0, 1, 3]), ("s:3", vec![0, 1, 3]), ("z:8", vec![0, 1, 2, 4])] {
        let t = GroupTable::new(&Group::parse(desc).unwrap()).unwrap();
        let p = build_cayley_poset(&t, &set).unwrap();
        check(&p);
    }
}
