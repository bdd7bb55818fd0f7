mod common;

use std::collections::BTreeMap;

use mrank::abelian::{GroupElement, GroupPresentation, PresEndomorphism};
use mrank::ca_dual::{CASpec, ConvolutionSystem, SupportedVector};
use mrank::linalg::{IntMatrix, StoreMode};
use mrank::trajectory::{
    mean_rank, mean_rank_of_set, running_infimum, trajectory_rank_sequence, trajectory_rank_sequence_with, EngineParams,
    Status,
};
use mrank::{Error, Rational};
use num_bigint::BigInt;
use proptest::prelude::*;

fn system_strategy(max_d: usize) -> impl Strategy<Value = ConvolutionSystem> {
    (1..=max_d, prop::collection::btree_set(-2i64..=2, 1..=3)).prop_flat_map(|(d, support)| {
        let n = support.len();
        prop::collection::vec(prop::collection::vec(prop::collection::vec(-3i64..=3, d), d), n).prop_map(move |ms| {
            let terms = support.iter().zip(ms).map(|(&j, rows)| (j, IntMatrix::from_rows_i64(&rows, d).unwrap())).collect();
            ConvolutionSystem::dual_of(&CASpec::new(d, terms).unwrap())
        })
    })
}

fn vector_strategy(d: usize) -> impl Strategy<Value = SupportedVector> {
    prop::collection::btree_map(-2i64..=2, prop::collection::vec(-2i64..=2, d), 1..=3).prop_map(move |m| {
        let m: BTreeMap<i64, Vec<BigInt>> = m.into_iter().map(|(k, v)| (k, v.into_iter().map(BigInt::from).collect())).collect();
        SupportedVector::from_map(d, m).unwrap()
    })
}

fn system_and_sets() -> impl Strategy<Value = (ConvolutionSystem, Vec<SupportedVector>, Vec<SupportedVector>)> {
    system_strategy(2).prop_flat_map(|s| {
        let d = s.d();
        (Just(s), prop::collection::vec(vector_strategy(d), 1..=3), prop::collection::vec(vector_strategy(d), 1..=3))
    })
}

const N: usize = 10;

proptest! {
    #![proptest_config(common::config(0x5eed_0003))]

    #[test]
    fn matches_brute_force_and_is_subadditive((sys, e, _) in system_and_sets()) {
        let seq = trajectory_rank_sequence(&sys, &e, N).unwrap();
        prop_assert_eq!(&seq, &common::brute_force_sequence(&sys, &e, N));
        for n in 1..=N {
            for m in 1..=N - n {
                prop_assert!(seq[n + m - 1] <= seq[n - 1] + seq[m - 1]);
            }
        }
        prop_assert!(seq.windows(2).all(|w| w[0] <= w[1]));
        // increments never grow
        let inc: Vec<usize> = seq.windows(2).map(|w| w[1] - w[0]).collect();
        prop_assert!(inc.windows(2).all(|w| w[1] <= w[0]), "{:?}", seq);
    }

    #[test]
    fn monotone_in_the_set_and_union_bound((sys, e, f) in system_and_sets()) {
        let a = trajectory_rank_sequence(&sys, &e, N).unwrap();
        let b = trajectory_rank_sequence(&sys, &f, N).unwrap();
        let union: Vec<SupportedVector> = e.iter().chain(&f).cloned().collect();
        let u = trajectory_rank_sequence(&sys, &union, N).unwrap();
        for n in 0..N {
            prop_assert!(a[n] <= u[n] && b[n] <= u[n]);
            prop_assert!(u[n] <= a[n] + b[n]);
        }
    }

    #[test]
    fn order_and_store_mode_do_not_matter((sys, e, _) in system_and_sets()) {
        let base = trajectory_rank_sequence(&sys, &e, N).unwrap();
        let mut rev = e.clone();
        rev.reverse();
        prop_assert_eq!(&trajectory_rank_sequence(&sys, &rev, N).unwrap(), &base);
        for mode in [StoreMode::Exact, StoreMode::Verified] {
            prop_assert_eq!(&trajectory_rank_sequence_with(&sys, &e, N, mode, None).unwrap(), &base);
        }
    }

    #[test]
    fn report_bounds_are_consistent((sys, e, _) in system_and_sets()) {
        let p = EngineParams { max_n: 16, ..EngineParams::default() };
        let r = mean_rank_of_set(&sys, &e, &p).unwrap();
        prop_assert_eq!(r.upper_bound, running_infimum(&r.rank_sequence));
        if let (Some(est), Some(ub)) = (r.estimate, r.upper_bound) {
            prop_assert!(est <= ub);
        }
        // the last increment is also an upper bound for the limit
        let set = &r.schedule_trace[0];
        if let (Some(est), Some(inc)) = (r.estimate, set.last_increment) {
            prop_assert!(est <= Rational::integer(inc));
        }
        if r.status == Status::ExactForced {
            prop_assert!(r.estimate.is_some());
        }
    }
}

fn e0() -> SupportedVector {
    SupportedVector::basis(1, 0, 0)
}

#[test]
fn spec_examples() {
    let shift = ConvolutionSystem::dual_of(&CASpec::full_shift(1));
    assert_eq!(trajectory_rank_sequence(&shift, &[e0()], 5).unwrap(), vec![1, 2, 3, 4, 5]);
    let dbl = PresEndomorphism::new(GroupPresentation::free(1), IntMatrix::from_i64(&[&[2]])).unwrap();
    assert_eq!(trajectory_rank_sequence(&dbl, &[GroupElement::from_i64(&[1])], 5).unwrap(), vec![1; 5]);
    let lf = ConvolutionSystem::dual_of(&CASpec::scalar(&[(0, 1), (1, 1)]).unwrap());
    assert_eq!(trajectory_rank_sequence(&lf, &[e0()], 5).unwrap(), vec![1, 2, 3, 4, 5]);

    let p = EngineParams { max_n: 10, ..EngineParams::default() };
    let r = mean_rank_of_set(&shift, &[e0()], &p).unwrap();
    assert_eq!((r.upper_bound, r.estimate, r.status), (Some(Rational::integer(1)), Some(Rational::integer(1)), Status::ExactForced));
    let r = mean_rank_of_set(&dbl, &[GroupElement::from_i64(&[1])], &p).unwrap();
    assert_eq!((r.upper_bound, r.estimate, r.status), (Some(Rational::new(1, 10)), Some(Rational::integer(0)), Status::ExactForced));
    let r = mean_rank_of_set(&lf, &[e0()], &p).unwrap();
    assert_eq!(r.estimate, Some(Rational::integer(1)));

    for d in 1..=2u64 {
        let r = mean_rank(&ConvolutionSystem::dual_of(&CASpec::full_shift(d as usize)), &EngineParams::default()).unwrap();
        assert_eq!(r.estimate, Some(Rational::integer(d)));
    }
}

#[test]
fn binomial_oracle() {
    // columns of (1+x)^i, i < n, form a unitriangular binomial matrix: rank n
    let lf = ConvolutionSystem::dual_of(&CASpec::scalar(&[(0, 1), (1, 1)]).unwrap());
    let n = 12;
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut row = vec![0i64; n];
            let mut c = 1i64;
            for (k, slot) in row.iter_mut().enumerate().take(i + 1) {
                *slot = c;
                c = c * (i - k) as i64 / (k + 1) as i64;
            }
            row
        })
        .collect();
    let oracle: Vec<usize> = (1..=n).map(|k| common::dense_rank(&rows[..k])).collect();
    assert_eq!(trajectory_rank_sequence(&lf, &[e0()], n).unwrap(), oracle);
}

#[test]
fn invalid_inputs() {
    let shift = ConvolutionSystem::dual_of(&CASpec::full_shift(1));
    assert!(matches!(trajectory_rank_sequence(&shift, &[], 3), Err(Error::InvalidElement(_))));
    assert!(matches!(trajectory_rank_sequence(&shift, &[SupportedVector::basis(2, 0, 0)], 3), Err(Error::InvalidElement(_))));
    assert!(trajectory_rank_sequence(&shift, &[e0()], 0).is_err());
    match trajectory_rank_sequence_with(&shift, &[e0()], 10, StoreMode::Modular, Some(4)) {
        Err(Error::ResourceLimit { partial }) => assert_eq!(partial, vec![1, 2, 3, 4]),
        other => panic!("unexpected {other:?}"),
    }
    let p = EngineParams { max_rank: Some(3), ..EngineParams::default() };
    let r = mean_rank(&ConvolutionSystem::dual_of(&CASpec::scalar(&[(0, 1), (1, 1)]).unwrap()), &p).unwrap();
    assert_eq!(r.status, Status::BoundOnly);
    assert_eq!(r.estimate, None);
    assert!(EngineParams { stabilization_window: 0, ..EngineParams::default() }.validate().is_err());
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let spec = CASpec::new(2, vec![(-1, IntMatrix::from_i64(&[&[1, 2], &[0, 1]])), (1, IntMatrix::from_i64(&[&[0, 0], &[3, 1]]))]).unwrap();
    let sys = ConvolutionSystem::dual_of(&spec);
    let p = EngineParams { max_n: 24, ..EngineParams::default() };
    let reports: Vec<_> = [1, 2, 5]
        .iter()
        .map(|&k| rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap().install(|| mean_rank(&sys, &p).unwrap()))
        .collect();
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);
}
