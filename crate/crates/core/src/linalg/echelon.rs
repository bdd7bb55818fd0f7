//! Incremental echelon stores over sparse integer vectors.
//!
//! Vectors are indexed by `i64` coordinates. Rows are kept as dense bands starting at
//! their leading (smallest) coordinate, which keeps elimination local for the banded
//! vectors produced by shift-convolution trajectories.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::modular::{inv_mod, mul_mod, reduce, sub_mod, PRIMES};

/// Finitely supported integer vector; entries sorted by coordinate, no explicit zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(i64, BigInt)>,
}

impl SparseVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_map(map: BTreeMap<i64, BigInt>) -> Self {
        Self { entries: map.into_iter().filter(|(_, x)| !x.is_zero()).collect() }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, BigInt)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, x) in pairs {
            *map.entry(k).or_insert_with(BigInt::zero) += x;
        }
        Self::from_map(map)
    }

    /// Dense slice placed at coordinates `offset, offset + 1, …`.
    pub fn from_dense(offset: i64, values: &[BigInt]) -> Self {
        Self::from_pairs(values.iter().enumerate().map(|(i, x)| (offset + i as i64, x.clone())))
    }

    pub fn entries(&self) -> &[(i64, BigInt)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, coord: i64) -> BigInt {
        match self.entries.binary_search_by_key(&coord, |(k, _)| *k) {
            Ok(i) => self.entries[i].1.clone(),
            Err(_) => BigInt::zero(),
        }
    }

    /// Smallest and largest coordinate in the support.
    pub fn support_bounds(&self) -> Option<(i64, i64)> {
        Some((self.entries.first()?.0, self.entries.last()?.0))
    }

    fn band_mod(&self, p: u64) -> Option<Band<u64>> {
        let (lo, hi) = self.support_bounds()?;
        let mut vals = vec![0u64; (hi - lo + 1) as usize];
        for (k, x) in &self.entries {
            vals[(k - lo) as usize] = reduce(x, p);
        }
        let mut band = Band { start: lo, vals };
        band.trim_mod();
        (!band.vals.is_empty()).then_some(band)
    }

    fn band_exact(&self) -> Option<Band<BigInt>> {
        let (lo, hi) = self.support_bounds()?;
        let mut vals = vec![BigInt::zero(); (hi - lo + 1) as usize];
        for (k, x) in &self.entries {
            vals[(k - lo) as usize] = x.clone();
        }
        Some(Band { start: lo, vals })
    }
}

#[derive(Clone, Debug)]
struct Band<T> {
    start: i64,
    vals: Vec<T>,
}

impl Band<u64> {
    fn trim_mod(&mut self) {
        let lead = self.vals.iter().position(|&x| x != 0).unwrap_or(self.vals.len());
        self.vals.drain(..lead);
        self.start += lead as i64;
        while self.vals.last() == Some(&0) {
            self.vals.pop();
        }
    }
}

impl Band<BigInt> {
    fn trim(&mut self) {
        let lead = self.vals.iter().position(|x| !x.is_zero()).unwrap_or(self.vals.len());
        self.vals.drain(..lead);
        self.start += lead as i64;
        while self.vals.last().is_some_and(Zero::is_zero) {
            self.vals.pop();
        }
    }

    fn make_primitive(&mut self) {
        let g = self.vals.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        if !g.is_zero() && !g.is_one() {
            for x in &mut self.vals {
                *x /= &g;
            }
        }
        if self.vals.first().is_some_and(|x| x.is_negative()) {
            for x in &mut self.vals {
                *x = -std::mem::take(x);
            }
        }
    }
}

/// Echelon basis modulo a single prime; pivot rows are monic at their lead.
#[derive(Clone, Debug)]
pub struct ModularEchelonStore {
    prime: u64,
    pivots: BTreeMap<i64, Band<u64>>,
}

impl ModularEchelonStore {
    pub fn new(prime: u64) -> Self {
        Self { prime, pivots: BTreeMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Inserts `v`; returns whether it was independent of the rows already present.
    pub fn insert(&mut self, v: &SparseVector) -> bool {
        let p = self.prime;
        let Some(mut band) = v.band_mod(p) else {
            return false;
        };
        loop {
            let lead = band.start;
            let Some(row) = self.pivots.get(&lead) else {
                let inv = inv_mod(band.vals[0], p);
                for x in &mut band.vals {
                    *x = mul_mod(*x, inv, p);
                }
                self.pivots.insert(lead, band);
                return true;
            };
            let f = band.vals[0];
            if band.vals.len() < row.vals.len() {
                band.vals.resize(row.vals.len(), 0);
            }
            for (x, &r) in band.vals.iter_mut().zip(&row.vals) {
                *x = sub_mod(*x, mul_mod(f, r, p), p);
            }
            band.trim_mod();
            if band.vals.is_empty() {
                return false;
            }
        }
    }
}

/// Fraction-free echelon basis over the integers; rows primitive with positive lead.
#[derive(Clone, Debug, Default)]
pub struct ExactEchelonStore {
    pivots: BTreeMap<i64, Band<BigInt>>,
}

impl ExactEchelonStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn insert(&mut self, v: &SparseVector) -> bool {
        let Some(mut band) = v.band_exact() else {
            return false;
        };
        band.make_primitive();
        loop {
            let lead = band.start;
            let Some(row) = self.pivots.get(&lead) else {
                self.pivots.insert(lead, band);
                return true;
            };
            // band <- (row_lead / g)·band − (band_lead / g)·row
            let g = row.vals[0].gcd(&band.vals[0]);
            let a = &row.vals[0] / &g;
            let b = &band.vals[0] / &g;
            if band.vals.len() < row.vals.len() {
                band.vals.resize(row.vals.len(), BigInt::zero());
            }
            for (i, x) in band.vals.iter_mut().enumerate() {
                let r = row.vals.get(i).map_or_else(BigInt::zero, |r| &b * r);
                *x = &a * &*x - r;
            }
            band.trim();
            if band.vals.is_empty() {
                return false;
            }
            band.make_primitive();
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StoreMode {
    /// Two independent primes; a disagreement is reported to the caller.
    #[default]
    Modular,
    Exact,
    /// Exact store is authoritative; modular stores run alongside and mismatches are counted.
    Verified,
}

/// Two primes disagreed on whether a vector is independent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeDisagreement;

/// Rank store used by trajectory computations.
#[derive(Clone, Debug)]
pub struct EchelonStore {
    mode: StoreMode,
    modular: Vec<ModularEchelonStore>,
    exact: Option<ExactEchelonStore>,
    mismatches: usize,
}

impl EchelonStore {
    pub fn new(mode: StoreMode) -> Self {
        let modular = match mode {
            StoreMode::Exact => Vec::new(),
            _ => PRIMES[..2].iter().map(|&p| ModularEchelonStore::new(p)).collect(),
        };
        let exact = (mode != StoreMode::Modular).then(ExactEchelonStore::new);
        Self { mode, modular, exact, mismatches: 0 }
    }

    pub fn mode(&self) -> StoreMode {
        self.mode
    }

    pub fn rank(&self) -> usize {
        match &self.exact {
            Some(e) => e.rank(),
            None => self.modular[0].rank(),
        }
    }

    /// Number of insertions where the modular and exact routes disagreed (verified mode).
    pub fn mismatches(&self) -> usize {
        self.mismatches
    }

    pub fn insert(&mut self, v: &SparseVector) -> Result<bool, PrimeDisagreement> {
        let verdicts: Vec<bool> = self.modular.iter_mut().map(|s| s.insert(v)).collect();
        match &mut self.exact {
            None => {
                if verdicts.windows(2).any(|w| w[0] != w[1]) {
                    return Err(PrimeDisagreement);
                }
                Ok(verdicts[0])
            }
            Some(exact) => {
                let truth = exact.insert(v);
                if verdicts.iter().any(|&m| m != truth) {
                    self.mismatches += 1;
                }
                Ok(truth)
            }
        }
    }
}
