//! The mean-rank engine.
//!
//! For a discrete abelian group `A` with endomorphism `φ` and a finite set `E ⊆ A`,
//! the n-trajectory `T_n(E)` is the subgroup generated by `E, φ(E), …, φ^{n−1}(E)` and
//! `a_n = rk T_n(E)`. The sequence is subadditive, so `a_n / n` converges to its infimum,
//! the mean rank of `E`; the mean rank of `(A, φ)` is the supremum over finite `E`.
//!
//! Two facts drive the implementation:
//!
//! * `T_{n+1} ⊗ Q = T_n ⊗ Q + φ(B_n)`, where `B_n` is any set of layer-`n` vectors that
//!   completes a basis of `T_n` over `T_{n−1}`. Only those vectors are pushed forward,
//!   so each step costs `a_n − a_{n−1}` insertions rather than `|E|`.
//! * `φ` induces a surjection `T_n / T_{n−1} → T_{n+1} / T_n`, so the increments
//!   `a_{n+1} − a_n` never increase. A zero increment therefore pins the limit at 0,
//!   and the latest increment is itself an upper bound for the limit.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{EchelonStore, PrimeDisagreement, SparseVector, StoreMode};
use crate::rational::Rational;

/// A discrete abelian group together with one endomorphism acting on it.
///
/// Elements are mapped into a free coordinate space by [`DiscreteModule::embed`];
/// the group is that space modulo the span of [`DiscreteModule::relations`]. Ranks are
/// computed over the rationals, so torsion in the relations is irrelevant.
pub trait DiscreteModule: Sync {
    type Element: Clone + fmt::Debug + Send + Sync;

    /// The endomorphism. Must be additive.
    fn apply(&self, x: &Self::Element) -> Self::Element;

    /// Coordinates of `x`; must be an injective homomorphism modulo `relations`.
    fn embed(&self, x: &Self::Element) -> SparseVector;

    fn relations(&self) -> Vec<SparseVector> {
        Vec::new()
    }

    fn validate(&self, x: &Self::Element) -> Result<()>;

    /// The `step`-th set of an increasing exhausting sequence `E_0 ⊆ E_1 ⊆ …`.
    ///
    /// A finite schedule (returning `None` past its end) must end on a set that
    /// generates the whole group.
    fn schedule_set(&self, step: usize) -> Option<GeneratorSet<Self::Element>>;

    /// Analytic upper bound for the mean rank of the whole system, if one is known.
    /// Finitely generated groups have bounded trajectories and report 0.
    fn growth_bound(&self) -> Option<u64> {
        None
    }

    /// Rank of the subgroup generated by `elems`.
    fn rank_of_span(&self, elems: &[Self::Element]) -> usize {
        let mut store = EchelonStore::new(StoreMode::Exact);
        let base = insert_all(&mut store, &self.relations());
        for x in elems {
            let _ = store.insert(&self.embed(x));
        }
        store.rank() - base
    }
}

fn insert_all(store: &mut EchelonStore, vectors: &[SparseVector]) -> usize {
    for v in vectors {
        let _ = store.insert(v);
    }
    store.rank()
}

#[derive(Clone, Debug)]
pub struct GeneratorSet<E> {
    pub label: String,
    pub elements: Vec<E>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// The value is pinned analytically by the computed data.
    ExactForced,
    /// Increments were constant over the stabilization window.
    IncrementStable,
    /// Only the upper bound is available.
    BoundOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// A forced estimate met the system's analytic upper bound.
    AnalyticBound,
    /// Consecutive schedule sets agreed on a resolved estimate.
    StableAcrossSchedule,
    /// The finite schedule ended on a generating set.
    ScheduleExhausted,
    /// `max_schedule_steps` ran out before the estimates stabilized.
    StepsExhausted,
    /// A schedule set could not be resolved at the given `max_n`.
    UnresolvedSet,
    /// The rank budget was exceeded.
    ResourceLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    MeanRank,
    /// Mean dimension of the compact dual system, equal to the mean rank computed here.
    MeanDimension,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineParams {
    pub max_n: usize,
    pub stabilization_window: usize,
    pub max_schedule_steps: usize,
    pub stable_schedule_steps: usize,
    pub store_mode: StoreMode,
    /// Upper limit on the size of the echelon store; `None` is unlimited.
    pub max_rank: Option<usize>,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            max_n: 64,
            stabilization_window: 5,
            max_schedule_steps: 9,
            stable_schedule_steps: 2,
            store_mode: StoreMode::Modular,
            max_rank: None,
        }
    }
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("max_n", self.max_n),
            ("stabilization_window", self.stabilization_window),
            ("max_schedule_steps", self.max_schedule_steps),
            ("stable_schedule_steps", self.stable_schedule_steps),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidParameters(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub insertions: u64,
    pub exact_fallbacks: u64,
    pub verify_mismatches: u64,
}

impl Counters {
    fn absorb(&mut self, other: &Counters) {
        self.insertions += other.insertions;
        self.exact_fallbacks += other.exact_fallbacks;
        self.verify_mismatches += other.verify_mismatches;
    }
}

/// Result for one generating set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetReport {
    pub label: String,
    pub set_size: usize,
    pub rank_sequence: Vec<usize>,
    /// `min a_n / n` over the computed range; a certified upper bound for the limit.
    pub upper_bound: Option<Rational>,
    /// Last increment `a_N − a_{N−1}`; also a certified upper bound since increments never grow.
    pub last_increment: Option<u64>,
    pub estimate: Option<Rational>,
    pub status: Status,
    pub resource_limited: bool,
    pub counters: Counters,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeanRankReport {
    pub quantity: Quantity,
    /// Rank sequence of the last schedule set used.
    pub rank_sequence: Vec<usize>,
    pub upper_bound: Option<Rational>,
    pub estimate: Option<Rational>,
    pub status: Status,
    pub stop_reason: StopReason,
    pub schedule_trace: Vec<SetReport>,
    pub parameters: EngineParams,
    pub citations: Vec<String>,
    pub counters: Counters,
}

impl MeanRankReport {
    pub fn is_resolved(&self) -> bool {
        self.status != Status::BoundOnly && self.estimate.is_some()
    }

    pub fn labelled(mut self, quantity: Quantity, citation: &str) -> Self {
        self.quantity = quantity;
        self.citations.push(citation.to_string());
        self
    }
}

/// Incrementally maintained echelon generating set of `T_n(E, φ)`.
pub struct TrajectoryBasis<'a, M: DiscreteModule> {
    module: &'a M,
    store: EchelonStore,
    relation_rank: usize,
    /// Images under `φ` of the vectors that raised the rank in the previous step.
    frontier: Vec<M::Element>,
    rank_sequence: Vec<usize>,
    insertions: u64,
    max_rank: Option<usize>,
}

impl<'a, M: DiscreteModule> TrajectoryBasis<'a, M> {
    pub fn new(module: &'a M, generators: &[M::Element], mode: StoreMode, max_rank: Option<usize>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidElement("generating set must be nonempty".into()));
        }
        for x in generators {
            module.validate(x)?;
        }
        let mut store = EchelonStore::new(mode);
        let mut insertions = 0;
        for r in module.relations() {
            // relations never disagree in practice; on the off chance, fall back
            if store.insert(&r).is_err() {
                return Self::new(module, generators, StoreMode::Exact, max_rank);
            }
            insertions += 1;
        }
        Ok(Self {
            module,
            relation_rank: store.rank(),
            store,
            frontier: generators.to_vec(),
            rank_sequence: Vec::new(),
            insertions,
            max_rank,
        })
    }

    pub fn rank_sequence(&self) -> &[usize] {
        &self.rank_sequence
    }

    pub fn mode(&self) -> StoreMode {
        self.store.mode()
    }

    /// Adds the next layer and returns the new rank `a_n`.
    fn step(&mut self) -> std::result::Result<Option<usize>, PrimeDisagreement> {
        let mut next = Vec::new();
        for x in &self.frontier {
            self.insertions += 1;
            if self.store.insert(&self.module.embed(x))? {
                next.push(self.module.apply(x));
                if self.max_rank.is_some_and(|m| self.store.rank() > m) {
                    return Ok(None);
                }
            }
        }
        self.frontier = next;
        let a = self.store.rank() - self.relation_rank;
        self.rank_sequence.push(a);
        Ok(Some(a))
    }
}

struct Trajectory {
    sequence: Vec<usize>,
    resource_limited: bool,
    counters: Counters,
}

fn run_trajectory<M: DiscreteModule>(
    module: &M,
    generators: &[M::Element],
    n: usize,
    mode: StoreMode,
    max_rank: Option<usize>,
) -> Result<Trajectory> {
    let mut counters = Counters::default();
    let mut mode = mode;
    'attempt: loop {
        let mut basis = TrajectoryBasis::new(module, generators, mode, max_rank)?;
        for _ in 0..n {
            match basis.step() {
                Ok(Some(_)) => {}
                Ok(None) => {
                    counters.insertions += basis.insertions;
                    return Ok(Trajectory { sequence: basis.rank_sequence, resource_limited: true, counters });
                }
                Err(PrimeDisagreement) => {
                    counters.insertions += basis.insertions;
                    counters.exact_fallbacks += 1;
                    mode = StoreMode::Exact;
                    continue 'attempt;
                }
            }
        }
        counters.insertions += basis.insertions;
        counters.verify_mismatches += basis.store.mismatches() as u64;
        return Ok(Trajectory { sequence: basis.rank_sequence, resource_limited: false, counters });
    }
}

/// `(a_1, …, a_N)` with `a_n = rk T_n(E, φ)`.
pub fn trajectory_rank_sequence<M: DiscreteModule>(module: &M, generators: &[M::Element], n: usize) -> Result<Vec<usize>> {
    trajectory_rank_sequence_with(module, generators, n, StoreMode::Modular, None)
}

pub fn trajectory_rank_sequence_with<M: DiscreteModule>(
    module: &M,
    generators: &[M::Element],
    n: usize,
    mode: StoreMode,
    max_rank: Option<usize>,
) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidParameters("trajectory length must be at least 1".into()));
    }
    let t = run_trajectory(module, generators, n, mode, max_rank)?;
    if t.resource_limited {
        return Err(Error::ResourceLimit { partial: t.sequence });
    }
    Ok(t.sequence)
}

/// `min_n a_n / n`.
pub fn running_infimum(sequence: &[usize]) -> Option<Rational> {
    sequence
        .iter()
        .enumerate()
        .map(|(i, &a)| Rational::new(a as u64, i as u64 + 1))
        .min()
}

fn increments(sequence: &[usize]) -> Vec<u64> {
    sequence.windows(2).map(|w| (w[1] - w[0]) as u64).collect()
}

/// Classifies a computed rank sequence.
///
/// `per_step_max` is the largest increment the set can produce; `growth_bound` is the
/// analytic bound for the whole system, which also bounds every set.
fn classify(
    sequence: &[usize],
    per_step_max: u64,
    growth_bound: Option<u64>,
    window: usize,
) -> (Option<Rational>, Status) {
    if growth_bound == Some(0) {
        return (Some(Rational::integer(0)), Status::ExactForced);
    }
    let inc = increments(sequence);
    if inc.last() == Some(&0) {
        // increments never grow back, so the sequence is bounded from here on
        return (Some(Rational::integer(0)), Status::ExactForced);
    }
    if inc.len() < window {
        return (None, Status::BoundOnly);
    }
    let linear = sequence.iter().enumerate().all(|(i, &a)| a as u64 == per_step_max * (i as u64 + 1));
    if linear {
        return (Some(Rational::integer(per_step_max)), Status::ExactForced);
    }
    let tail = &inc[inc.len() - window..];
    if tail.iter().all(|&d| d == tail[0]) {
        return (Some(Rational::integer(tail[0])), Status::IncrementStable);
    }
    (None, Status::BoundOnly)
}

fn set_report<M: DiscreteModule>(module: &M, set: &GeneratorSet<M::Element>, params: &EngineParams) -> Result<SetReport> {
    let t = run_trajectory(module, &set.elements, params.max_n, params.store_mode, params.max_rank)?;
    let per_step_max = match module.growth_bound() {
        Some(b) => b.min(set.elements.len() as u64),
        None => set.elements.len() as u64,
    };
    let (estimate, status) = if t.resource_limited {
        (None, Status::BoundOnly)
    } else {
        classify(&t.sequence, per_step_max, module.growth_bound(), params.stabilization_window)
    };
    let inc = increments(&t.sequence);
    Ok(SetReport {
        label: set.label.clone(),
        set_size: set.elements.len(),
        upper_bound: running_infimum(&t.sequence),
        last_increment: inc.last().copied(),
        rank_sequence: t.sequence,
        estimate,
        status,
        resource_limited: t.resource_limited,
        counters: t.counters,
    })
}

fn single_set_report(set: SetReport, params: &EngineParams) -> MeanRankReport {
    let stop_reason = if set.resource_limited { StopReason::ResourceLimit } else { StopReason::ScheduleExhausted };
    MeanRankReport {
        quantity: Quantity::MeanRank,
        rank_sequence: set.rank_sequence.clone(),
        upper_bound: set.upper_bound,
        estimate: set.estimate,
        status: set.status,
        stop_reason,
        counters: set.counters.clone(),
        schedule_trace: vec![set],
        parameters: params.clone(),
        citations: Vec::new(),
    }
}

/// Mean rank of one finite set `E`.
pub fn mean_rank_of_set<M: DiscreteModule>(module: &M, generators: &[M::Element], params: &EngineParams) -> Result<MeanRankReport> {
    params.validate()?;
    let set = GeneratorSet { label: "E".to_string(), elements: generators.to_vec() };
    Ok(single_set_report(set_report(module, &set, params)?, params))
}

/// Mean rank of the whole system: runs the schedule `E_0 ⊆ E_1 ⊆ …` and takes the
/// supremum of the per-set estimates.
///
/// Sets are evaluated in batches sized to the current rayon pool; results are merged
/// in schedule order so the report does not depend on the number of workers.
pub fn mean_rank<M: DiscreteModule>(module: &M, params: &EngineParams) -> Result<MeanRankReport> {
    params.validate()?;
    let batch = rayon::current_num_threads().max(1);
    let bound = module.growth_bound();
    let mut trace: Vec<SetReport> = Vec::new();
    let mut streak: Option<(Rational, usize)> = None;
    let mut step = 0;
    let stop_reason = 'schedule: loop {
        if step >= params.max_schedule_steps {
            break StopReason::StepsExhausted;
        }
        let end = (step + batch).min(params.max_schedule_steps);
        let sets: Vec<_> = (step..end).map_while(|s| module.schedule_set(s)).collect();
        let schedule_ended = sets.len() < end - step;
        let reports: Vec<Result<SetReport>> = sets.par_iter().map(|s| set_report(module, s, params)).collect();
        for r in reports {
            let r = r?;
            let (status, estimate, limited) = (r.status, r.estimate, r.resource_limited);
            trace.push(r);
            if limited {
                break 'schedule StopReason::ResourceLimit;
            }
            let Some(est) = estimate.filter(|_| status != Status::BoundOnly) else {
                break 'schedule StopReason::UnresolvedSet;
            };
            if status == Status::ExactForced && bound.is_some_and(|b| Rational::integer(b) == est) {
                break 'schedule StopReason::AnalyticBound;
            }
            streak = match streak {
                Some((v, k)) if v == est => Some((v, k + 1)),
                _ => Some((est, 1)),
            };
            if streak.is_some_and(|(_, k)| k >= params.stable_schedule_steps) {
                break 'schedule StopReason::StableAcrossSchedule;
            }
        }
        if schedule_ended {
            break StopReason::ScheduleExhausted;
        }
        step = end;
    };

    let mut counters = Counters::default();
    for r in &trace {
        counters.absorb(&r.counters);
    }
    let last = trace.last();
    let running_max = trace
        .iter()
        .filter(|r| r.status != Status::BoundOnly)
        .filter_map(|r| r.estimate)
        .max();
    let (estimate, status) = if bound == Some(0) {
        (Some(Rational::integer(0)), Status::ExactForced)
    } else {
        match stop_reason {
            StopReason::AnalyticBound => (bound.map(Rational::integer), Status::ExactForced),
            StopReason::StableAcrossSchedule => (running_max, Status::IncrementStable),
            StopReason::ScheduleExhausted => match last {
                Some(l) if l.status != Status::BoundOnly => (running_max, l.status),
                _ => (None, Status::BoundOnly),
            },
            _ => (None, Status::BoundOnly),
        }
    };
    Ok(MeanRankReport {
        quantity: Quantity::MeanRank,
        rank_sequence: last.map(|l| l.rank_sequence.clone()).unwrap_or_default(),
        upper_bound: last.and_then(|l| l.upper_bound),
        estimate,
        status,
        stop_reason,
        schedule_trace: trace,
        parameters: params.clone(),
        citations: Vec::new(),
        counters,
    })
}
