mod common;

use mrank::abelian::{eventual_kernel, eventual_kernel_with_steps, eventual_quotient, subgroup_rank, GroupElement, GroupPresentation, PresEndomorphism};
use mrank::linalg::{hnf_basis, kernel_basis, rank, IntMatrix};
use mrank::trajectory::trajectory_rank_sequence;
use proptest::prelude::*;

/// A presented endomorphism: `Z^g` modulo `t·e_i` for `i` in a random subset `S`, with the
/// matrix zeroed where it would move `S` outside itself.
fn endo_strategy(gs: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = PresEndomorphism> {
    gs.prop_flat_map(|g| {
        (
            prop::collection::vec(prop::collection::vec(-3i64..=3, g), g),
            prop::collection::vec(any::<bool>(), g),
            2i64..=4,
        )
            .prop_map(move |(mut rows, torsion, t)| {
                let s: Vec<usize> = (0..g).filter(|&i| torsion[i]).collect();
                for &i in &s {
                    for (j, row) in rows.iter_mut().enumerate() {
                        if !s.contains(&j) {
                            row[i] = 0;
                        }
                    }
                }
                let cols: Vec<Vec<i64>> = s.iter().map(|&i| (0..g).map(|j| if j == i { t } else { 0 }).collect()).collect();
                let rel = IntMatrix::from_rows_i64(&cols, g).unwrap().transpose();
                let rel = if s.is_empty() { IntMatrix::zeros(g, 0) } else { rel };
                let m = IntMatrix::from_rows_i64(&rows, g).unwrap();
                PresEndomorphism::new(GroupPresentation::new(g, rel).unwrap(), m).unwrap()
            })
    })
}

fn free_endo_strategy(gs: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = PresEndomorphism> {
    gs.prop_flat_map(|g| {
        prop::collection::vec(prop::collection::vec(-3i64..=3, g), g).prop_map(move |rows| {
            PresEndomorphism::new(GroupPresentation::free(g), IntMatrix::from_rows_i64(&rows, g).unwrap()).unwrap()
        })
    })
}

fn saturated_kernel_form(m: &IntMatrix) -> Vec<Vec<num_bigint::BigInt>> {
    hnf_basis(&kernel_basis(m).transpose())
}

proptest! {
    #![proptest_config(common::config(0x5eed_0002))]

    #[test]
    fn subgroup_rank_is_monotone_and_bounded(
        endo in endo_strategy(1..=4),
        coords in prop::collection::vec(prop::collection::vec(-4i64..=4, 4), 0..6),
    ) {
        let pres = endo.carrier();
        let g = pres.generators();
        let elems: Vec<GroupElement> = coords.iter().map(|c| GroupElement::from_i64(&c[..g])).collect();
        let mut prev = 0;
        for k in 0..=elems.len() {
            let r = subgroup_rank(pres, &elems[..k]).unwrap();
            prop_assert!(r >= prev);
            prop_assert!(r <= pres.rank());
            prev = r;
        }
    }

    #[test]
    fn kernel_chain_stabilizes_by_g(endo in free_endo_strategy(1..=4)) {
        let m = endo.matrix();
        let g = m.rows();
        prop_assert_eq!(saturated_kernel_form(&m.pow(g).unwrap()), saturated_kernel_form(&m.pow(g + 1).unwrap()));
        let (k, steps) = eventual_kernel_with_steps(&endo);
        prop_assert!(steps <= g);
        prop_assert_eq!(hnf_basis(&k.transpose()), saturated_kernel_form(&m.pow(g).unwrap()));
    }

    #[test]
    fn eventual_kernel_is_invariant_and_contains_torsion(endo in endo_strategy(1..=4)) {
        let k = eventual_kernel(&endo);
        let g = endo.carrier().generators();
        // φ(K) ⊆ K ⊗ Q
        let image = endo.matrix().mul(&k).unwrap();
        prop_assert_eq!(rank(&k.hstack(&image).unwrap()), k.cols());
        // every relation is in K ⊗ Q
        prop_assert_eq!(rank(&k.hstack(endo.carrier().relations()).unwrap()), k.cols());
        prop_assert!(k.cols() <= g);
    }

    /// The quotient map intertwines the dynamics, and rank sequences on both sides differ
    /// by `rk(T_n ∩ K)`: non-decreasing and at most `rk K`.
    #[test]
    fn quotient_preserves_rank_growth(endo in free_endo_strategy(3..=4), coords in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..4)) {
        let g = endo.carrier().generators();
        let q = eventual_quotient(&endo);
        let pm = q.projection.mul(endo.matrix()).unwrap();
        let mp = q.system.matrix().mul(&q.projection).unwrap();
        prop_assert_eq!(pm, mp);

        let k = eventual_kernel(&endo).cols();
        let elems: Vec<GroupElement> = coords.iter().map(|c| GroupElement::from_i64(&c[..g])).collect();
        let n = 2 * g + 2;
        let full = trajectory_rank_sequence(&endo, &elems, n).unwrap();
        if q.system.carrier().generators() == 0 {
            prop_assert!(full.iter().all(|&a| a <= k));
            return Ok(());
        }
        let projected: Vec<GroupElement> = elems.iter().map(|e| GroupElement::new(q.projection.mul_vec(&e.coords).unwrap())).collect();
        let reduced = trajectory_rank_sequence(&q.system, &projected, n).unwrap();
        let diff: Vec<usize> = full.iter().zip(&reduced).map(|(a, b)| a - b).collect();
        prop_assert!(diff.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(diff.iter().all(|&x| x <= k));
    }

    #[test]
    fn element_equality_is_a_congruence(
        endo in endo_strategy(1..=3),
        raw in prop::collection::vec(prop::collection::vec(-6i64..=6, 3), 4),
    ) {
        let pres = endo.carrier();
        let g = pres.generators();
        let e: Vec<GroupElement> = raw.iter().map(|c| GroupElement::from_i64(&c[..g])).collect();
        let eq = |a: &GroupElement, b: &GroupElement| pres.elements_equal(a, b).unwrap();
        prop_assert!(eq(&e[0], &e[0]));
        prop_assert_eq!(eq(&e[0], &e[1]), eq(&e[1], &e[0]));
        if eq(&e[0], &e[1]) && eq(&e[1], &e[2]) {
            prop_assert!(eq(&e[0], &e[2]));
        }
        if eq(&e[0], &e[1]) {
            prop_assert!(eq(&e[0].add(&e[3]), &e[1].add(&e[3])));
            prop_assert!(eq(&endo.apply_to(&e[0]), &endo.apply_to(&e[1])));
        }
        // shifting by a relation never changes the class
        for r in pres.relations().columns() {
            let shifted = GroupElement::new(e[2].coords.iter().zip(&r).map(|(a, b)| a + b * 3).collect());
            prop_assert!(eq(&e[2], &shifted));
        }
    }
}

/// Sequence-level comparison between a system and its eventual-kernel quotient.
///
/// Limits agree (both are 0 on finitely generated carriers), but whole sequences need not:
/// an element with a component in the kernel keeps contributing that component's rank.
#[test]
fn sequences_differ_by_a_bounded_amount() {
    let endo = PresEndomorphism::new(GroupPresentation::free(2), IntMatrix::from_i64(&[&[2, 0], &[0, 0]])).unwrap();
    let q = eventual_quotient(&endo);
    let e = GroupElement::from_i64(&[1, 1]);
    let full = trajectory_rank_sequence(&endo, std::slice::from_ref(&e), 4).unwrap();
    let reduced = trajectory_rank_sequence(&q.system, &[GroupElement::new(q.projection.mul_vec(&e.coords).unwrap())], 4).unwrap();
    assert_eq!(full, vec![1, 2, 2, 2]);
    assert_eq!(reduced, vec![1, 1, 1, 1]);
    // generators taken from a complement of the kernel give identical sequences
    let f = GroupElement::from_i64(&[1, 0]);
    let full = trajectory_rank_sequence(&endo, std::slice::from_ref(&f), 4).unwrap();
    let reduced = trajectory_rank_sequence(&q.system, &[GroupElement::new(q.projection.mul_vec(&f.coords).unwrap())], 4).unwrap();
    assert_eq!(full, reduced);
}

#[test]
fn trivial_carrier_is_legal() {
    let endo = PresEndomorphism::new(GroupPresentation::free(0), IntMatrix::zeros(0, 0)).unwrap();
    assert_eq!(eventual_kernel(&endo).cols(), 0);
    assert_eq!(subgroup_rank(endo.carrier(), &[]).unwrap(), 0);
    let r = mrank::mean_rank(&endo, &Default::default()).unwrap();
    assert_eq!(r.estimate, Some(mrank::Rational::integer(0)));
}
