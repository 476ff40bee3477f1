use std::collections::BTreeSet;

use proptest::prelude::*;

use pants_atlas::curve_model::{canonical_split, disjoint, strand_oracle, CurveCode, CyclicInterval, Side};
use pants_atlas::labelled_sphere::{recognize, verify_universal_labelled};
use pants_atlas::polygon::{count_triangles, realized_triangle_types, ChordGraph};
use pants_atlas::type_census::{enum_pants_types, LabelledTree, TreeBuilder};
use pants_atlas::unlabelled_sphere::{covers_pants_types, IndexFamily};

/// Random code on `n` punctures from a nonempty mask and a side pattern.
fn arb_code(n: u32) -> impl Strategy<Value = CurveCode> {
    (1u32..(1 << n), any::<u32>()).prop_map(move |(mask, sides)| {
        let s: Vec<u32> = (1..=n).filter(|j| mask >> (j - 1) & 1 == 1).collect();
        let f: Vec<(u32, Side)> = (s[0]..=s[s.len() - 1])
            .filter(|j| mask >> (j - 1) & 1 == 0)
            .map(|j| (j, if sides >> j & 1 == 1 { Side::Below } else { Side::Above }))
            .collect();
        CurveCode::new(n, s, f).unwrap()
    })
}

fn arb_pair() -> impl Strategy<Value = (CurveCode, CurveCode)> {
    (3u32..=9).prop_flat_map(|n| (arb_code(n), arb_code(n)))
}

/// Random trivalent tree on `n` leaves by repeated edge subdivision.
fn arb_tree(n: u32) -> impl Strategy<Value = LabelledTree> {
    (proptest::collection::vec(any::<u32>(), n as usize), any::<u64>()).prop_map(move |(picks, shuffle)| {
        // vertex 0 is the centre, 1..=3 its leaves; each step subdivides an edge
        let mut edges: Vec<(usize, usize)> = vec![(0, 1), (0, 2), (0, 3)];
        let mut leaves: Vec<usize> = vec![1, 2, 3];
        let mut next = 4;
        for &pick in &picks[3..] {
            let (u, v) = edges.swap_remove(pick as usize % edges.len());
            let (mid, leaf) = (next, next + 1);
            next += 2;
            edges.extend([(u, mid), (mid, v), (mid, leaf)]);
            leaves.push(leaf);
        }
        let mut b = TreeBuilder::default();
        for _ in 0..next {
            b.add_vertex();
        }
        for &(u, v) in &edges {
            b.add_edge(u, v);
        }
        let mut labels: Vec<u32> = (1..=n).collect();
        let mut x = shuffle;
        for i in (1..labels.len()).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            labels.swap(i, (x >> 33) as usize % (i + 1));
        }
        let pairs: Vec<(usize, u32)> = leaves.into_iter().zip(labels).collect();
        b.finish(&pairs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn disjointness_is_symmetric_and_matches_oracle((a, b) in arb_pair()) {
        let d = disjoint(&a, &b).unwrap();
        prop_assert_eq!(d, disjoint(&b, &a).unwrap());
        prop_assert_eq!(d, strand_oracle(&a, &b).unwrap());
    }

    #[test]
    fn disjoint_codes_have_compatible_splits((a, b) in arb_pair()) {
        if disjoint(&a, &b).unwrap() {
            let (s, t): (BTreeSet<u32>, BTreeSet<u32>) =
                (a.enclosed().iter().copied().collect(), b.enclosed().iter().copied().collect());
            prop_assert!(s.is_subset(&t) || t.is_subset(&s) || s.is_disjoint(&t));
        }
    }

    #[test]
    fn every_code_is_disjoint_from_itself(a in (3u32..=9).prop_flat_map(arb_code)) {
        prop_assert!(disjoint(&a, &a).unwrap());
    }

    #[test]
    fn coverage_is_monotone(n in 8u32..40, base in proptest::collection::btree_set(1u32..40, 2..10), extra in 1u32..40) {
        let s: Vec<u32> = base.into_iter().filter(|&i| i <= n).collect();
        let small = IndexFamily::new(n, s.clone());
        let mut bigger = s;
        bigger.push(extra.min(n));
        let big = IndexFamily::new(n, bigger);
        let missing_small: BTreeSet<_> = covers_pants_types(&small, false).into_iter().collect();
        let missing_big: BTreeSet<_> = covers_pants_types(&big, false).into_iter().collect();
        prop_assert!(missing_big.is_subset(&missing_small));
        prop_assert!(missing_small.len() <= enum_pants_types(n, false).len());
    }

    #[test]
    fn recognition_on_larger_trees(t in (9u32..=14).prop_flat_map(arb_tree)) {
        let root = t.default_root().unwrap();
        let rec = recognize(&t, root).unwrap();
        prop_assert_eq!(rec.edges.len(), t.leaf_count() as usize - 3);
        prop_assert!(rec.certify(&t).unwrap());
    }

    #[test]
    fn recognition_is_root_independent_in_outcome(t in (5u32..=10).prop_flat_map(arb_tree), pick in any::<usize>()) {
        let internal: Vec<usize> = t.internal_vertices().collect();
        let root = internal[pick % internal.len()];
        prop_assert!(recognize(&t, root).unwrap().certify(&t).unwrap());
    }

    #[test]
    fn triangle_types_never_exceed_triangles(n in 4u32..=20, mask in any::<u64>(), seed in any::<u64>()) {
        let edges: Vec<(u32, u32)> = (1..=n)
            .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
            .enumerate()
            .filter(|(k, _)| (mask ^ seed.rotate_left(*k as u32 % 64)) >> (k % 64) & 1 == 1)
            .map(|(_, e)| e)
            .collect();
        let g = ChordGraph::new(n, edges).unwrap();
        prop_assert!(realized_triangle_types(&g).len() as u64 <= count_triangles(&g));
    }

    #[test]
    fn cyclic_interval_split_is_its_complement_class(n in 4u32..=12, i in 0i64..12, len in 2i64..10) {
        let len = len.min(i64::from(n) - 2);
        let a = CyclicInterval::new(n, i, i + len);
        let inside = a.enclosed();
        prop_assert_eq!(inside.len() as i64, len);
        let outside: Vec<u32> = (1..=n).filter(|x| !inside.contains(x)).collect();
        prop_assert_eq!(canonical_split(n, &inside), canonical_split(n, &outside));
    }
}

#[test]
fn a_subfamily_missing_one_split_is_not_universal() {
    // without a curve around {1,2} (or its complement) no tree with that
    // cherry can be realized
    let n = 5;
    let fam = pants_atlas::labelled_sphere::gen_lambda(n, 2, 2).unwrap().codes;
    let full = verify_universal_labelled(&fam, n).unwrap();
    let mut missing = fam.clone();
    missing.retain(|c| c.enclosed() != [1, 2]);
    let cut = verify_universal_labelled(&missing, n).unwrap();
    assert!(cut.realized < full.realized);
    assert!(!cut.is_universal());
}
