//! Natural extensions and inverse limits, computed on the dual side.
//!
//! Dualizing exchanges the surjective core `⋂ φ^n(X)` with the quotient of `X̂` by its
//! eventual kernel `⋃ ker φ̂^n`, and the natural extension with the colimit of
//! `X̂ → X̂ → …` along `φ̂`. On the quotient `φ̂` is injective modulo torsion, so the
//! colimit embeds level by level and never has to be materialized.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abelian::{GroupElement, PresEndomorphism};
use crate::ca_dual::{CASpec, ConvolutionSystem, DUALITY_CITATION};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, rank, IntMatrix, SparseVector};
use crate::rational::Rational;
use crate::trajectory::{mean_rank, DiscreteModule, EngineParams, GeneratorSet, MeanRankReport, Quantity, Status};

pub const COLIMIT_CITATION: &str =
    "mean rank of a colimit equals the supremum of the mean ranks of the levels reduced modulo their eventual kernels; for an injective endomorphism it equals the mean rank of the group itself";
pub const CORE_CITATION: &str =
    "restricting to the surjective core does not change mean dimension; dually, the quotient by the eventual kernel does not change mean rank";
pub const NATEXT_CITATION: &str = "the natural extension of an algebraic dynamical system has the same mean dimension";
pub const TOWER_CITATION: &str =
    "mean dimension of an inverse limit of algebraic systems with surjective connecting maps is the supremum over the levels";

/// `A / ker φ^s` presented implicitly: elements of `A`, ranks measured after applying `φ^s`.
///
/// With `s` at least the stabilization index of the kernel chain, `ker φ^s` is the
/// eventual kernel and `φ^s` is injective on the quotient tensored with `Q`.
#[derive(Clone, Debug)]
pub struct KernelQuotient<M> {
    inner: M,
    steps: usize,
}

impl<M: DiscreteModule> KernelQuotient<M> {
    pub fn new(inner: M, steps: usize) -> Self {
        Self { inner, steps }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

fn iterate<M: DiscreteModule>(m: &M, x: &M::Element, k: usize) -> M::Element {
    (0..k).fold(x.clone(), |y, _| m.apply(&y))
}

impl<M: DiscreteModule> DiscreteModule for KernelQuotient<M> {
    type Element = M::Element;

    fn apply(&self, x: &M::Element) -> M::Element {
        self.inner.apply(x)
    }

    fn embed(&self, x: &M::Element) -> SparseVector {
        self.inner.embed(&iterate(&self.inner, x, self.steps))
    }

    fn relations(&self) -> Vec<SparseVector> {
        self.inner.relations()
    }

    fn validate(&self, x: &M::Element) -> Result<()> {
        self.inner.validate(x)
    }

    fn schedule_set(&self, step: usize) -> Option<GeneratorSet<M::Element>> {
        self.inner.schedule_set(step)
    }

    fn growth_bound(&self) -> Option<u64> {
        self.inner.growth_bound()
    }
}

/// Systems that know how to pass to their quotient by the eventual kernel.
pub trait Reducible: DiscreteModule {
    type Reduced: DiscreteModule + Send;

    fn reduce(&self) -> Self::Reduced;
}

impl Reducible for PresEndomorphism {
    type Reduced = PresEndomorphism;

    fn reduce(&self) -> PresEndomorphism {
        crate::abelian::reduced_injective_quotient(self)
    }
}

impl Reducible for ConvolutionSystem {
    type Reduced = KernelQuotient<ConvolutionSystem>;

    fn reduce(&self) -> Self::Reduced {
        KernelQuotient::new(self.clone(), self.kernel_stabilization_bound())
    }
}

/// `(k, v)` stands for `φ^{-k}(v)`; `(k, v)` is identified with `(k + 1, φ(v))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColimitElement<E> {
    pub level: usize,
    pub payload: E,
}

/// Colimit of `A → A → …` along an endomorphism that is injective modulo torsion, truncated
/// to levels `0..=depth`. Level `k` is embedded into level `depth` by `φ^{depth − k}`.
#[derive(Clone, Debug)]
pub struct ColimitCarrier<M> {
    inner: M,
    depth: usize,
}

impl<M: DiscreteModule> ColimitCarrier<M> {
    pub fn new(inner: M, depth: usize) -> Self {
        Self { inner, depth }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<M: DiscreteModule> DiscreteModule for ColimitCarrier<M> {
    type Element = ColimitElement<M::Element>;

    fn apply(&self, x: &Self::Element) -> Self::Element {
        ColimitElement { level: x.level, payload: self.inner.apply(&x.payload) }
    }

    fn embed(&self, x: &Self::Element) -> SparseVector {
        self.inner.embed(&iterate(&self.inner, &x.payload, self.depth - x.level))
    }

    fn relations(&self) -> Vec<SparseVector> {
        self.inner.relations()
    }

    fn validate(&self, x: &Self::Element) -> Result<()> {
        if x.level > self.depth {
            return Err(Error::InvalidElement(format!("level {} beyond truncation depth {}", x.level, self.depth)));
        }
        self.inner.validate(&x.payload)
    }

    /// The inner set `E_j` placed at every level `0..=min(j, depth)`.
    fn schedule_set(&self, step: usize) -> Option<GeneratorSet<Self::Element>> {
        let base = self.inner.schedule_set(step)?;
        let top = step.min(self.depth);
        let elements = (0..=top)
            .flat_map(|level| base.elements.iter().map(move |e| ColimitElement { level, payload: e.clone() }))
            .collect();
        Some(GeneratorSet { label: format!("{} at levels 0..={top}", base.label), elements })
    }

    fn growth_bound(&self) -> Option<u64> {
        self.inner.growth_bound()
    }
}

impl ColimitCarrier<PresEndomorphism> {
    /// Lowest-level representative. Requires `φ` injective on the carrier, as it is after
    /// reduction to a free quotient.
    pub fn canonicalize(&self, x: &ColimitElement<GroupElement>) -> Result<ColimitElement<GroupElement>> {
        self.validate(x)?;
        let mut cur = x.clone();
        while cur.level > 0 {
            match self.inner.preimage(&cur.payload)? {
                Some(pre) => cur = ColimitElement { level: cur.level - 1, payload: pre },
                None => break,
            }
        }
        Ok(cur)
    }

    /// Equality in the colimit, compared at the common level `depth`.
    pub fn elements_equal(&self, a: &ColimitElement<GroupElement>, b: &ColimitElement<GroupElement>) -> Result<bool> {
        self.validate(a)?;
        self.validate(b)?;
        let lift = |x: &ColimitElement<GroupElement>| iterate(&self.inner, &x.payload, self.depth - x.level);
        self.inner.carrier().elements_equal(&lift(a), &lift(b))
    }
}

pub const DEFAULT_COLIMIT_DEPTH: usize = 2;

/// Mean rank of the colimit of the reduced system.
pub fn colimit_mean_rank<M: Reducible>(system: &M, params: &EngineParams) -> Result<MeanRankReport> {
    let carrier = ColimitCarrier::new(system.reduce(), DEFAULT_COLIMIT_DEPTH);
    Ok(mean_rank(&carrier, params)?.labelled(Quantity::MeanRank, COLIMIT_CITATION))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equal,
    Disagree,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub name: String,
    pub report: MeanRankReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NatextReport {
    pub legs: Vec<Leg>,
    pub verdict: Verdict,
    pub value: Option<Rational>,
    pub citations: Vec<String>,
}

/// A system whose natural extension can be checked: a presented endomorphism (already on
/// the dual side) or an algebraic cellular automaton.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SystemSpec {
    MatrixEndo(PresEndomorphism),
    CellularAutomaton(CASpec),
}

impl SystemSpec {
    pub fn mean_rank(&self, params: &EngineParams) -> Result<MeanRankReport> {
        match self {
            SystemSpec::MatrixEndo(e) => mean_rank(e, params),
            SystemSpec::CellularAutomaton(s) => crate::ca_dual::ca_mean_dimension(s, params),
        }
    }
}

fn three_legs<M: Reducible>(system: &M, params: &EngineParams) -> Result<Vec<Leg>> {
    let ((direct, reduced), colimit) = rayon::join(
        || rayon::join(|| mean_rank(system, params), || mean_rank(&system.reduce(), params)),
        || colimit_mean_rank(system, params),
    );
    Ok(vec![
        Leg { name: "direct".into(), report: direct? },
        Leg { name: "eventual-kernel-quotient".into(), report: reduced?.labelled(Quantity::MeanRank, CORE_CITATION) },
        Leg { name: "colimit".into(), report: colimit? },
    ])
}

/// Computes the mean rank (i) directly, (ii) after quotienting the eventual kernel and
/// (iii) on the colimit of the reduced system; the three must agree.
pub fn natural_extension_check(spec: &SystemSpec, params: &EngineParams) -> Result<NatextReport> {
    params.validate()?;
    let legs = match spec {
        SystemSpec::MatrixEndo(e) => three_legs(e, params)?,
        SystemSpec::CellularAutomaton(s) => three_legs(&ConvolutionSystem::dual_of(s), params)?,
    };
    let values: Vec<Option<Rational>> =
        legs.iter().map(|l| l.report.is_resolved().then_some(l.report.estimate).flatten()).collect();
    let (verdict, value) = if values.iter().any(Option::is_none) {
        (Verdict::Unresolved, None)
    } else if values.windows(2).all(|w| w[0] == w[1]) {
        (Verdict::Equal, values[0])
    } else {
        (Verdict::Disagree, None)
    };
    let mut citations = vec![NATEXT_CITATION.to_string(), CORE_CITATION.to_string(), COLIMIT_CITATION.to_string()];
    if matches!(spec, SystemSpec::CellularAutomaton(_)) {
        citations.push(DUALITY_CITATION.to_string());
    }
    Ok(NatextReport { legs, verdict, value, citations })
}

/// Finite inverse system of algebraic dynamical systems.
///
/// For automaton levels, `connecting[n]` is the sitewise torus map from level `n + 1` onto
/// level `n` (a `d_n × d_{n+1}` integer matrix). For presented endomorphisms, which already
/// live on the dual side, `connecting[n]` is the dual embedding from level `n` into level
/// `n + 1` (a `g_{n+1} × g_n` matrix).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSpec {
    levels: Vec<SystemSpec>,
    connecting: Vec<IntMatrix>,
}

fn invalid(level: usize, reason: impl Into<String>) -> Error {
    Error::InvalidTower { level, reason: reason.into() }
}

impl TowerSpec {
    pub fn new(levels: Vec<SystemSpec>, connecting: Vec<IntMatrix>) -> Result<Self> {
        if levels.is_empty() {
            return Err(invalid(0, "a tower needs at least one level"));
        }
        if connecting.len() + 1 != levels.len() {
            return Err(invalid(0, format!("{} levels need {} connecting maps, got {}", levels.len(), levels.len() - 1, connecting.len())));
        }
        for (n, psi) in connecting.iter().enumerate() {
            match (&levels[n], &levels[n + 1]) {
                (SystemSpec::CellularAutomaton(lo), SystemSpec::CellularAutomaton(hi)) => check_ca_link(n, lo, hi, psi)?,
                (SystemSpec::MatrixEndo(lo), SystemSpec::MatrixEndo(hi)) => check_endo_link(n, lo, hi, psi)?,
                _ => return Err(invalid(n, "levels of different kinds cannot be connected")),
            }
        }
        Ok(Self { levels, connecting })
    }

    pub fn levels(&self) -> &[SystemSpec] {
        &self.levels
    }

    pub fn connecting(&self) -> &[IntMatrix] {
        &self.connecting
    }
}

/// `ψ: (T^{d_hi})^Z → (T^{d_lo})^Z` sitewise; commutes with the rules and is onto.
fn check_ca_link(n: usize, lo: &CASpec, hi: &CASpec, psi: &IntMatrix) -> Result<()> {
    if psi.rows() != lo.d() || psi.cols() != hi.d() {
        return Err(invalid(n, format!("connecting map is {}x{}, expected {}x{}", psi.rows(), psi.cols(), lo.d(), hi.d())));
    }
    let mut support = lo.support();
    support.extend(hi.support());
    support.sort_unstable();
    support.dedup();
    for j in support {
        let left = psi.mul(&hi.coefficient(j))?;
        let right = lo.coefficient(j).mul(psi)?;
        if left != right {
            return Err(invalid(n, format!("connecting map does not commute with the rules at index {j}")));
        }
    }
    // a torus homomorphism is onto iff its integer matrix has full row rank
    if rank(psi) != lo.d() {
        return Err(invalid(n, "connecting map is not surjective"));
    }
    Ok(())
}

/// `C: A_lo → A_hi` on the dual side; well defined, commutes with the maps, and injective.
fn check_endo_link(n: usize, lo: &PresEndomorphism, hi: &PresEndomorphism, c: &IntMatrix) -> Result<()> {
    let (g_lo, g_hi) = (lo.carrier().generators(), hi.carrier().generators());
    if c.rows() != g_hi || c.cols() != g_lo {
        return Err(invalid(n, format!("connecting map is {}x{}, expected {g_hi}x{g_lo}", c.rows(), c.cols())));
    }
    for r in lo.carrier().relations().columns() {
        if !hi.carrier().contains_relation(&c.mul_vec(&r)?)? {
            return Err(invalid(n, "connecting map does not respect relations"));
        }
    }
    let diff = c.mul(lo.matrix())?.sub(&hi.matrix().mul(c)?)?;
    for col in diff.columns() {
        if !hi.carrier().contains_relation(&col)? {
            return Err(invalid(n, "connecting map does not commute with the endomorphisms"));
        }
    }
    // {v : C·v ∈ R_hi} must equal R_lo, i.e. the dual map is injective
    let neg_r = IntMatrix::zeros(g_hi, hi.carrier().relations().cols()).sub(hi.carrier().relations())?;
    let k = kernel_basis(&c.hstack(&neg_r)?);
    for col in k.columns() {
        if !lo.carrier().contains_relation(&col[..g_lo])? {
            return Err(invalid(n, "connecting map is not surjective on the primal side"));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerReport {
    pub levels: Vec<MeanRankReport>,
    /// Supremum of the resolved estimates over levels `0..=n`.
    pub running_sup: Vec<Option<Rational>>,
    pub supremum: Option<Rational>,
    /// Largest per-level upper bound; bounds the supremum whenever every level has one.
    pub upper_bound: Option<Rational>,
    pub status: Status,
    pub note: String,
    pub citations: Vec<String>,
}

pub fn tower_mean_rank(tower: &TowerSpec, params: &EngineParams) -> Result<TowerReport> {
    params.validate()?;
    let levels: Vec<MeanRankReport> =
        tower.levels.par_iter().map(|l| l.mean_rank(params)).collect::<Result<_>>()?;
    let mut running_sup = Vec::with_capacity(levels.len());
    let mut acc: Option<Rational> = None;
    let mut resolved = true;
    for r in &levels {
        resolved &= r.is_resolved();
        acc = if resolved { acc.max(r.estimate) } else { None };
        running_sup.push(acc);
    }
    let status = if !resolved {
        Status::BoundOnly
    } else if levels.iter().all(|r| r.status == Status::ExactForced) {
        Status::ExactForced
    } else {
        Status::IncrementStable
    };
    let upper_bound = if levels.iter().all(|r| r.upper_bound.is_some()) {
        levels.iter().filter_map(|r| r.upper_bound).max()
    } else {
        None
    };
    Ok(TowerReport {
        supremum: acc,
        running_sup,
        upper_bound,
        status,
        note: format!("sup over provided levels ({} levels)", levels.len()),
        levels,
        citations: vec![TOWER_CITATION.to_string()],
    })
}
