//! Mean rank of endomorphisms of discrete abelian groups, computed exactly.
//!
//! Through Pontryagin duality the mean dimension of an algebraic dynamical system
//! `(X, φ)` equals the mean rank of the dual endomorphism on the discrete group `X̂`.
//! This crate computes the latter: trajectory ranks are exact integers, limits are
//! bracketed by a certified upper bound and an increment-stabilization estimate.

pub mod abelian;
pub mod ca_dual;
pub mod error;
pub mod linalg;
pub mod natext;
pub mod rational;
pub mod trajectory;

pub use abelian::{GroupElement, GroupPresentation, PresEndomorphism};
pub use ca_dual::{CASpec, ConvolutionSystem, LaurentMatrix, SupportedVector};
pub use error::{Error, Result};
pub use natext::{natural_extension_check, tower_mean_rank, NatextReport, SystemSpec, TowerReport, TowerSpec, Verdict};
pub use rational::Rational;
pub use trajectory::{
    mean_rank, mean_rank_of_set, trajectory_rank_sequence, DiscreteModule, EngineParams, GeneratorSet,
    MeanRankReport, Quantity, SetReport, Status, StopReason,
};
