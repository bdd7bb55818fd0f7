//! Algebraic cellular automata on `(T^d)^Z` and their duals.
//!
//! A rule `F(x)_n = Σ_{j∈I} M_j x_{n+j}` dualizes, under the pairing
//! `⟨χ, x⟩ = Σ_n χ_n · x_n mod 1`, to the convolution `(F̂χ)_m = Σ_j M_jᵀ χ_{m−j}` on
//! `⊕_Z Z^d`. Expanding `⟨χ, F(x)⟩` and substituting `m = n + j` gives the formula; the
//! tests check it against exact rational pairings.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{IntMatrix, SparseVector};
use crate::trajectory::{mean_rank, DiscreteModule, EngineParams, GeneratorSet, MeanRankReport, Quantity};

pub const DUALITY_CITATION: &str =
    "mean dimension of a compact metrizable abelian group with an endomorphism equals the mean rank of the dual endomorphism on the Pontryagin dual group";

/// Local rule `x ↦ Σ_{j∈I} M_j x_{·+j}` on `(T^d)^Z`, with `M_j` acting on `T^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CASpec {
    d: usize,
    coefficients: BTreeMap<i64, IntMatrix>,
}

impl CASpec {
    pub fn new(d: usize, terms: Vec<(i64, IntMatrix)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidAutomaton("alphabet dimension must be at least 1".into()));
        }
        if terms.is_empty() {
            return Err(Error::InvalidAutomaton("support must be nonempty".into()));
        }
        let mut coefficients = BTreeMap::new();
        for (j, m) in terms {
            if m.rows() != d || m.cols() != d {
                return Err(Error::InvalidAutomaton(format!(
                    "coefficient at index {j} is {}x{}, expected {d}x{d}",
                    m.rows(),
                    m.cols()
                )));
            }
            if coefficients.insert(j, m).is_some() {
                return Err(Error::InvalidAutomaton(format!("support index {j} appears twice")));
            }
        }
        Ok(Self { d, coefficients })
    }

    /// `d = 1` shorthand: `terms` are `(j, scalar)`.
    pub fn scalar(terms: &[(i64, i64)]) -> Result<Self> {
        Self::new(1, terms.iter().map(|&(j, c)| (j, IntMatrix::from_i64(&[&[c]]))).collect())
    }

    /// Unit rule `I = {1}` with identity coefficient: the shift on `(T^d)^Z`.
    pub fn full_shift(d: usize) -> Self {
        Self::new(d, vec![(1, IntMatrix::identity(d))]).expect("valid")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn support(&self) -> Vec<i64> {
        self.coefficients.keys().copied().collect()
    }

    pub fn coefficients(&self) -> &BTreeMap<i64, IntMatrix> {
        &self.coefficients
    }

    /// Coefficient at `j`, zero off the support.
    pub fn coefficient(&self, j: i64) -> IntMatrix {
        self.coefficients.get(&j).cloned().unwrap_or_else(|| IntMatrix::zeros(self.d, self.d))
    }

    /// Applies the automaton to a finitely supported point with rational coordinates.
    /// Coordinates are not reduced modulo 1; compare pairings in `Q/Z`.
    pub fn apply_to_point(&self, x: &TorusPoint) -> Result<TorusPoint> {
        x.check(self.d)?;
        let mut out: BTreeMap<i64, Vec<BigRational>> = BTreeMap::new();
        for (&site, v) in &x.entries {
            for (&j, m) in &self.coefficients {
                // x_{site} feeds F(x)_{site − j}
                let target = out.entry(site - j).or_insert_with(|| vec![BigRational::zero(); self.d]);
                for (r, t) in target.iter_mut().enumerate() {
                    for (c, xc) in v.iter().enumerate() {
                        *t += BigRational::from_integer(m[(r, c)].clone()) * xc;
                    }
                }
            }
        }
        Ok(TorusPoint::from_map(self.d, out))
    }
}

/// Finitely supported point of `(Q^d)^Z`, standing for its image in `(T^d)^Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusPoint {
    d: usize,
    entries: BTreeMap<i64, Vec<BigRational>>,
}

impl TorusPoint {
    pub fn from_map(d: usize, entries: BTreeMap<i64, Vec<BigRational>>) -> Self {
        let entries = entries.into_iter().filter(|(_, v)| v.iter().any(|x| !x.is_zero())).collect();
        Self { d, entries }
    }

    pub fn entries(&self) -> &BTreeMap<i64, Vec<BigRational>> {
        &self.entries
    }

    fn check(&self, d: usize) -> Result<()> {
        if self.d != d || self.entries.values().any(|v| v.len() != d) {
            return Err(Error::DimensionMismatch(format!("point over T^{} used with d = {d}", self.d)));
        }
        Ok(())
    }
}

/// `⟨χ, x⟩ = Σ_n χ_n · x_n`, reduced into `[0, 1)`.
pub fn pairing(chi: &SupportedVector, x: &TorusPoint) -> Result<BigRational> {
    if chi.d != x.d {
        return Err(Error::DimensionMismatch(format!("character over Z^{} paired with point over T^{}", chi.d, x.d)));
    }
    let mut total = BigRational::zero();
    for (site, c) in &chi.entries {
        if let Some(v) = x.entries.get(site) {
            for (ci, xi) in c.iter().zip(v) {
                total += BigRational::from_integer(ci.clone()) * xi;
            }
        }
    }
    Ok(&total - total.floor())
}

/// Finitely supported element of `⊕_Z Z^d`; zero blocks are pruned.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SupportedVector {
    d: usize,
    entries: BTreeMap<i64, Vec<BigInt>>,
}

impl SupportedVector {
    pub fn zero(d: usize) -> Self {
        Self { d, entries: BTreeMap::new() }
    }

    pub fn from_map(d: usize, entries: BTreeMap<i64, Vec<BigInt>>) -> Result<Self> {
        if let Some((site, v)) = entries.iter().find(|(_, v)| v.len() != d) {
            return Err(Error::DimensionMismatch(format!("block at site {site} has length {}, expected {d}", v.len())));
        }
        let entries = entries.into_iter().filter(|(_, v)| v.iter().any(|x| !x.is_zero())).collect();
        Ok(Self { d, entries })
    }

    /// Standard basis vector `e_site^{(component)}`.
    pub fn basis(d: usize, site: i64, component: usize) -> Self {
        let mut v = vec![BigInt::zero(); d];
        v[component] = BigInt::one();
        Self { d, entries: BTreeMap::from([(site, v)]) }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &BTreeMap<i64, Vec<BigInt>> {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_bounds(&self) -> Option<(i64, i64)> {
        Some((*self.entries.keys().next()?, *self.entries.keys().next_back()?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(format!("adding vectors over Z^{} and Z^{}", self.d, other.d)));
        }
        let mut entries = self.entries.clone();
        for (site, v) in &other.entries {
            let slot = entries.entry(*site).or_insert_with(|| vec![BigInt::zero(); self.d]);
            for (a, b) in slot.iter_mut().zip(v) {
                *a += b;
            }
        }
        Self::from_map(self.d, entries)
    }

    /// Translation by `k` sites.
    pub fn shift(&self, k: i64) -> Self {
        Self { d: self.d, entries: self.entries.iter().map(|(s, v)| (s + k, v.clone())).collect() }
    }

    fn to_sparse(&self) -> SparseVector {
        let d = self.d as i64;
        SparseVector::from_pairs(
            self.entries
                .iter()
                .flat_map(|(site, v)| v.iter().enumerate().map(move |(c, x)| (site * d + c as i64, x.clone()))),
        )
    }
}

/// Finitely supported family of `d×d` integer matrices acting by convolution on `⊕_Z Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentMatrix {
    d: usize,
    terms: BTreeMap<i64, IntMatrix>,
}

impl LaurentMatrix {
    pub fn new(d: usize, terms: BTreeMap<i64, IntMatrix>) -> Result<Self> {
        if let Some((j, _)) = terms.iter().find(|(_, m)| m.rows() != d || m.cols() != d) {
            return Err(Error::DimensionMismatch(format!("term at index {j} is not {d}x{d}")));
        }
        Ok(Self { d, terms })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &BTreeMap<i64, IntMatrix> {
        &self.terms
    }

    /// Width of the hull of the support together with 0: how far trajectory supports spread per step.
    pub fn spread(&self) -> u64 {
        let lo = self.terms.keys().next().map_or(0, |&j| j.min(0));
        let hi = self.terms.keys().next_back().map_or(0, |&j| j.max(0));
        (hi - lo) as u64
    }
}

pub fn dualize_ca(spec: &CASpec) -> LaurentMatrix {
    let terms = spec.coefficients.iter().map(|(&j, m)| (j, m.transpose())).collect();
    LaurentMatrix { d: spec.d, terms }
}

/// `(φ·v)_m = Σ_j N_j · v_{m−j}`.
pub fn apply_laurent(phi: &LaurentMatrix, v: &SupportedVector) -> Result<SupportedVector> {
    if phi.d != v.d {
        return Err(Error::DimensionMismatch(format!("{0}x{0} Laurent matrix applied to a vector over Z^{1}", phi.d, v.d)));
    }
    let mut out: BTreeMap<i64, Vec<BigInt>> = BTreeMap::new();
    for (&site, block) in &v.entries {
        for (&j, n) in &phi.terms {
            let image = n.mul_vec(block)?;
            let slot = out.entry(site + j).or_insert_with(|| vec![BigInt::zero(); phi.d]);
            for (a, b) in slot.iter_mut().zip(image) {
                *a += b;
            }
        }
    }
    SupportedVector::from_map(phi.d, out)
}

/// `⊕_Z Z^d` with a convolution endomorphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvolutionSystem {
    laurent: LaurentMatrix,
}

impl ConvolutionSystem {
    pub fn new(laurent: LaurentMatrix) -> Self {
        Self { laurent }
    }

    pub fn dual_of(spec: &CASpec) -> Self {
        Self::new(dualize_ca(spec))
    }

    pub fn laurent(&self) -> &LaurentMatrix {
        &self.laurent
    }

    pub fn d(&self) -> usize {
        self.laurent.d
    }

    /// Basis vectors at sites `−w..=w`.
    pub fn window(&self, w: usize) -> Vec<SupportedVector> {
        let w = w as i64;
        (-w..=w).flat_map(|s| (0..self.d()).map(move |c| (s, c))).map(|(s, c)| SupportedVector::basis(self.d(), s, c)).collect()
    }

    /// `ker φ^n` stabilizes by `n = d`: over `Q(x)` it is a chain of subspaces of `Q(x)^d`,
    /// and a Laurent kernel is the lattice points of its rational kernel.
    pub fn kernel_stabilization_bound(&self) -> usize {
        self.d()
    }
}

impl DiscreteModule for ConvolutionSystem {
    type Element = SupportedVector;

    fn apply(&self, x: &SupportedVector) -> SupportedVector {
        apply_laurent(&self.laurent, x).expect("element dimension validated")
    }

    fn embed(&self, x: &SupportedVector) -> SparseVector {
        x.to_sparse()
    }

    fn validate(&self, x: &SupportedVector) -> Result<()> {
        if x.d != self.d() {
            return Err(Error::InvalidElement(format!("vector over Z^{} in a system over Z^{}", x.d, self.d())));
        }
        Ok(())
    }

    fn schedule_set(&self, step: usize) -> Option<GeneratorSet<SupportedVector>> {
        Some(GeneratorSet { label: format!("W={step}"), elements: self.window(step) })
    }

    /// Layer `n` of the window-`W` trajectory lives on `2W + 1 + (n − 1)·spread` sites.
    fn growth_bound(&self) -> Option<u64> {
        Some(self.d() as u64 * self.laurent.spread())
    }
}

/// Mean dimension of `((T^d)^Z, F)` computed as the mean rank of its dual.
pub fn ca_mean_dimension(spec: &CASpec, params: &EngineParams) -> Result<MeanRankReport> {
    let system = ConvolutionSystem::dual_of(spec);
    Ok(mean_rank(&system, params)?.labelled(Quantity::MeanDimension, DUALITY_CITATION))
}
