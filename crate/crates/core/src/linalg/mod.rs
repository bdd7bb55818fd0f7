//! Exact integer linear algebra: rank, normal forms, kernels and lattice membership.

mod echelon;
mod lattice;
mod matrix;
pub mod modular;
mod normal_form;
mod rank;

pub use echelon::{EchelonStore, ExactEchelonStore, ModularEchelonStore, PrimeDisagreement, SparseVector, StoreMode};
pub use lattice::{kernel_basis, solve_in_lattice};
pub use matrix::IntMatrix;
pub use normal_form::{determinant, hnf, hnf_basis, snf, SmithDecomposition};
pub use rank::{rank, rank_exact, rank_modular, rank_with, RankMode};
