use posetrep::extensions::{
    act, build_window, check_action_on_window, gap_order_window, gradedness, is_rank_function, rank_epimorphism_check, BaseGroup,
    ExtensionError, ExtensionGroupH, HElement, RankFunction, WindowKind, WindowPoint,
};
use posetrep::group::{Group, GroupAutomorphism, GroupElement, GroupTable};
use proptest::prelude::*;

fn table(g: Group) -> GroupTable {
    GroupTable::new(&g).unwrap()
}

fn z(n: u64) -> GroupTable {
    table(Group::cyclic(n).unwrap())
}

fn idx(t: &GroupTable, k: i64) -> usize {
    t.index_of(&GroupElement::new(&[k])).unwrap()
}

fn z9_h(psi: GroupAutomorphism) -> (GroupTable, ExtensionGroupH) {
    let t = z(9);
    let h = ExtensionGroupH::new(BaseGroup::finite(t.clone(), &psi).unwrap());
    (t, h)
}

fn set(t: &GroupTable, ks: &[i64]) -> Vec<usize> {
    ks.iter().map(|&k| idx(t, k)).collect()
}

#[test]
fn z9_cayley_window_is_graded_by_layer() {
    let (t, h) = z9_h(GroupAutomorphism::Identity);
    let w = build_window(WindowKind::Cayley, &h, &set(&t, &[0, 1, 3]), 2).unwrap();
    assert_eq!(w.poset.len(), 54);
    assert!(w.base_verified);
    let rank = gradedness(&w.poset).unwrap();
    let shifted: Vec<i64> = w.layer.iter().map(|l| l + 2).collect();
    assert_eq!(rank.rank, shifted);
    assert_eq!(w.poset.height(), 2 * 2 + 1);
}

#[test]
fn comparabilities_cross_layers() {
    for (kind, ks, psi) in [
        (WindowKind::Cayley, vec![0, 1, 3], GroupAutomorphism::Inversion),
        (WindowKind::Babai, vec![1, 3], GroupAutomorphism::Identity),
    ] {
        let (t, h) = z9_h(psi);
        let w = build_window(kind, &h, &set(&t, &ks), 2).unwrap();
        let n = w.poset.len();
        for a in 0..n {
            for b in 0..n {
                if w.poset.less(a, b) {
                    assert!(w.layer[a] < w.layer[b]);
                }
            }
        }
        // g < h″ covers in Babai windows skip the primed layer
        let step = |a: usize, b: usize| w.layer[b] - w.layer[a];
        for &(a, b) in w.poset.covers() {
            match kind {
                WindowKind::Cayley => assert_eq!(step(a, b), 1),
                WindowKind::Babai => assert!(step(a, b) == 1 || (step(a, b) == 2 && w.points[a].level == 0)),
            }
        }
    }
}

#[test]
fn babai_window_mid_points_are_the_thin_ones() {
    let (t, h) = z9_h(GroupAutomorphism::Identity);
    let w = build_window(WindowKind::Babai, &h, &set(&t, &[1, 3]), 1).unwrap();
    assert_eq!(w.poset.len(), 3 * 2 * 9 + 9);
    let covers = w.poset.covers();
    for (p, point) in w.points.iter().enumerate() {
        let down = covers.iter().filter(|c| c.1 == p).count();
        let up = covers.iter().filter(|c| c.0 == p).count();
        let thin = down == 1 && up == 1;
        match point.level {
            1 => assert!(thin, "{point:?}"),
            _ if point.copy == 0 => assert!(!thin, "{point:?}"),
            _ => {}
        }
    }
}

#[test]
fn shift_action_is_free_and_order_preserving() {
    let (t, h) = z9_h(GroupAutomorphism::Identity);
    let w = build_window(WindowKind::Cayley, &h, &set(&t, &[0, 1, 3]), 3).unwrap();
    let shift = HElement { g: idx(&t, 3), n: 1 };
    let n = w.poset.len();
    let mut domain = Vec::new();
    for p in 0..n {
        if let Some(q) = act(&h, &w, shift, p) {
            let (a, b) = (w.points[p], w.points[q]);
            assert_eq!(b.copy, a.copy + 1);
            assert_eq!(t.label(b.element), t.label(t.mul(idx(&t, 3), a.element)));
            assert_ne!(p, q);
            domain.push((p, q));
        }
    }
    assert_eq!(domain.len(), w.poset.len() - 9);
    for &(a, ha) in &domain {
        for &(b, hb) in &domain {
            assert_eq!(w.poset.less(a, b), w.poset.less(ha, hb));
        }
    }
    for p in 0..n {
        assert_eq!(act(&h, &w, h.identity(), p), Some(p));
    }
    let report = check_action_on_window(&h, &w).unwrap();
    assert!(report.injective && report.order_preserving && report.free && report.interior_transitive);
    assert_eq!(report.orbit_types, 1);
    assert!(report.necessary_only);
}

#[test]
fn twisted_and_babai_actions() {
    let (t, h) = z9_h(GroupAutomorphism::Inversion);
    let w = build_window(WindowKind::Cayley, &h, &set(&t, &[0, 1, 3]), 2).unwrap();
    let r = check_action_on_window(&h, &w).unwrap();
    assert!(r.injective && r.order_preserving && r.free && r.interior_transitive);
    assert_eq!(r.orbit_types, 1);

    let (t, h) = z9_h(GroupAutomorphism::Identity);
    let w = build_window(WindowKind::Babai, &h, &set(&t, &[1, 3]), 2).unwrap();
    let r = check_action_on_window(&h, &w).unwrap();
    assert!(r.injective && r.order_preserving && r.free && r.interior_transitive);
    assert_eq!(r.orbit_types, 2);
}

#[test]
fn preconditions() {
    let z2 = table(Group::cyclic(2).unwrap());
    let h = ExtensionGroupH::new(BaseGroup::finite(z2.clone(), &GroupAutomorphism::Identity).unwrap());
    assert!(matches!(build_window(WindowKind::Cayley, &h, &[0, 1], 1), Err(ExtensionError::Precondition(_))));

    let v4 = table(Group::elementary_abelian(2, 2).unwrap());
    let h = ExtensionGroupH::new(BaseGroup::finite(v4.clone(), &GroupAutomorphism::Identity).unwrap());
    for s in [vec![1], vec![1, 2], vec![1, 2, 3]] {
        assert!(matches!(build_window(WindowKind::Babai, &h, &s, 1), Err(ExtensionError::Precondition(_))));
    }
    // S = 2 − S, so g ↦ −g, h′ ↦ (2 − h)′ is an extra automorphism
    let (t, h) = z9_h(GroupAutomorphism::Identity);
    assert!(build_window(WindowKind::Cayley, &h, &set(&t, &[0, 1, 2]), 1).is_err());
    assert!(matches!(
        build_window(WindowKind::Cayley, &h, &set(&t, &[0, 1, 3]), 300),
        Err(ExtensionError::TooLarge { .. })
    ));
}

#[test]
fn gap_order_chains() {
    let p = gap_order_window(0, 6).unwrap();
    assert!(gradedness(&p).is_err());
    // shorter windows are graded
    for hi in 0..=3 {
        let p = gap_order_window(0, hi).unwrap();
        let rank = gradedness(&p).unwrap();
        assert!(is_rank_function(&p, &rank.rank));
    }
}

#[test]
fn z9_rank_epimorphism() {
    let (t, h) = z9_h(GroupAutomorphism::Identity);
    let w = build_window(WindowKind::Cayley, &h, &set(&t, &[0, 1, 3]), 3).unwrap();
    let rank = gradedness(&w.poset).unwrap();
    let r = rank_epimorphism_check(&h, &w, &rank).unwrap();
    assert!(r.additive && r.onto_symmetric_interval);
    assert_eq!((r.image_min, r.image_max), (-2, 2));
    let x = w.index(WindowPoint { copy: 0, level: 0, element: t.identity() }).unwrap();
    for g in 0..9 {
        for n in -2..=2 {
            let hx = act(&h, &w, HElement { g, n }, x).unwrap();
            assert_eq!(rank.rank[hx] - rank.rank[x], n);
        }
    }
    let bogus = RankFunction { rank: vec![0; w.poset.len()] };
    assert!(rank_epimorphism_check(&h, &w, &bogus).is_err());
}

#[test]
fn klein_bottle_window() {
    let h = ExtensionGroupH::new(BaseGroup::integers(true, 30));
    let s: Vec<usize> = [0, 1, 3].iter().map(|&k| h.base().index_of_integer(k).unwrap()).collect();
    let w = build_window(WindowKind::Cayley, &h, &s, 2).unwrap();
    assert!(!w.base_verified);
    let rank = gradedness(&w.poset).unwrap();
    let r = rank_epimorphism_check(&h, &w, &rank).unwrap();
    assert!(r.additive && r.onto_symmetric_interval, "{r:?}");
    assert_eq!((r.image_min, r.image_max), (-1, 1));
    assert!(matches!(check_action_on_window(&h, &w), Err(ExtensionError::InfiniteBase)));
}

#[test]
fn s3_twisted_window() {
    let s3 = table(Group::symmetric(3).unwrap());
    let t = 1;
    let conj: Vec<usize> = (0..6).map(|g| s3.mul(s3.mul(t, g), s3.inv(t))).collect();
    let h = ExtensionGroupH::new(BaseGroup::finite(s3.clone(), &GroupAutomorphism::Table(conj)).unwrap());
    assert!(h.verify_axioms(3).all_hold());
    let found = posetrep::search::search_cayley_table(&s3, Default::default()).unwrap();
    if let posetrep::search::SearchOutcome::Found { set } = found.outcome {
        let set: Vec<usize> = set.iter().map(|l| s3.labels().iter().position(|m| m == l).unwrap()).collect();
        let w = build_window(WindowKind::Cayley, &h, &set, 2).unwrap();
        let r = check_action_on_window(&h, &w).unwrap();
        assert!(r.free && r.order_preserving && r.interior_transitive);
        assert!(gradedness(&w.poset).is_ok());
    }
}

proptest! {
    #[test]
    fn h_laws_on_z9(a in 0usize..9, b in 0usize..9, c in 0usize..9, n1 in -4i64..=4, n2 in -4i64..=4, n3 in -4i64..=4, twist in any::<bool>()) {
        let (_, h) = z9_h(if twist { GroupAutomorphism::Inversion } else { GroupAutomorphism::Identity });
        let (x, y, w) = (HElement { g: a, n: n1 }, HElement { g: b, n: n2 }, HElement { g: c, n: n3 });
        let m = |p, q| h.multiply(p, q).unwrap();
        prop_assert_eq!(m(m(x, y), w), m(x, m(y, w)));
        prop_assert_eq!(m(h.identity(), x), x);
        prop_assert_eq!(m(x, h.inverse(x)), h.identity());
        prop_assert_eq!(h.semidirect_multiply(h.to_semidirect(x), h.to_semidirect(y)), Some(h.to_semidirect(m(x, y))));
    }
}
