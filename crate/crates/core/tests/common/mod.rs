//! Independent oracles: plain Gaussian elimination over the rationals.
#![allow(dead_code)]

use std::collections::BTreeMap;

use mrank::ca_dual::{apply_laurent, ConvolutionSystem, SupportedVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::test_runner::{Config, FileFailurePersistence, RngSeed};

pub fn config(seed: u64) -> Config {
    Config {
        cases: 200,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: Some(Box::new(FileFailurePersistence::Off)),
        ..Config::default()
    }
}

/// Rank of a list of rows, each a map from coordinate to integer.
pub fn rational_rank(rows: &[BTreeMap<i64, BigInt>]) -> usize {
    let mut basis: Vec<(i64, BTreeMap<i64, BigRational>)> = Vec::new();
    for r in rows {
        let mut v: BTreeMap<i64, BigRational> =
            r.iter().filter(|(_, x)| !x.is_zero()).map(|(k, x)| (*k, BigRational::from_integer(x.clone()))).collect();
        for (pivot, b) in &basis {
            if let Some(c) = v.get(pivot).cloned() {
                for (k, x) in b {
                    let e = v.entry(*k).or_insert_with(BigRational::zero);
                    *e -= &c * x;
                }
                v.retain(|_, x| !x.is_zero());
            }
        }
        if let Some((&pivot, lead)) = v.iter().next() {
            let inv = BigRational::one() / lead;
            let v = v.iter().map(|(k, x)| (*k, x * &inv)).collect();
            basis.push((pivot, v));
        }
    }
    basis.len()
}

pub fn dense_rank(rows: &[Vec<i64>]) -> usize {
    let maps: Vec<BTreeMap<i64, BigInt>> =
        rows.iter().map(|r| r.iter().enumerate().map(|(i, &x)| (i as i64, BigInt::from(x))).collect()).collect();
    rational_rank(&maps)
}

pub fn flatten(v: &SupportedVector) -> BTreeMap<i64, BigInt> {
    let d = v.d() as i64;
    v.entries()
        .iter()
        .flat_map(|(s, blk)| blk.iter().enumerate().map(move |(c, x)| (s * d + c as i64, x.clone())))
        .collect()
}

/// `a_n` for `n = 1..=len` by brute force: every layer recomputed, ranks from scratch.
pub fn brute_force_sequence(system: &ConvolutionSystem, gens: &[SupportedVector], len: usize) -> Vec<usize> {
    let mut rows = Vec::new();
    let mut layer: Vec<SupportedVector> = gens.to_vec();
    let mut out = Vec::new();
    for _ in 0..len {
        rows.extend(layer.iter().map(flatten));
        out.push(rational_rank(&rows));
        layer = layer.iter().map(|v| apply_laurent(system.laurent(), v).unwrap()).collect();
    }
    out
}
