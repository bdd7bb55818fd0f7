//! Finitely generated abelian groups given by presentations, and their endomorphisms.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hnf, hnf_basis, kernel_basis, rank, snf, solve_in_lattice, IntMatrix, SparseVector};
use crate::trajectory::{DiscreteModule, GeneratorSet};

/// `Z^g` modulo the column lattice of `relations` (a `g × m` matrix).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPresentation {
    generators: usize,
    relations: IntMatrix,
}

/// Coset representative in `Z^g`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub coords: Vec<BigInt>,
}

impl GroupElement {
    pub fn new(coords: Vec<BigInt>) -> Self {
        Self { coords }
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        Self { coords: coords.iter().map(|&x| BigInt::from(x)).collect() }
    }

    pub fn zero(g: usize) -> Self {
        Self { coords: vec![BigInt::zero(); g] }
    }

    pub fn basis(g: usize, i: usize) -> Self {
        let mut e = Self::zero(g);
        e.coords[i] = BigInt::one();
        e
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect() }
    }
}

/// Structure of a presented group: `Z^free_rank ⊕ ⊕ Z/t_i` with `t_1 | t_2 | …`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalGroup {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl GroupPresentation {
    pub fn new(generators: usize, relations: IntMatrix) -> Result<Self> {
        if relations.rows() != generators {
            return Err(Error::DimensionMismatch(format!(
                "relation matrix has {} rows for {} generators",
                relations.rows(),
                generators
            )));
        }
        Ok(Self { generators, relations })
    }

    pub fn free(generators: usize) -> Self {
        Self { generators, relations: IntMatrix::zeros(generators, 0) }
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    /// Torsion-free rank `g − rank(R)`.
    pub fn rank(&self) -> usize {
        self.generators - rank(&self.relations)
    }

    fn check(&self, x: &GroupElement) -> Result<()> {
        if x.coords.len() != self.generators {
            return Err(Error::DimensionMismatch(format!(
                "element with {} coordinates in a group on {} generators",
                x.coords.len(),
                self.generators
            )));
        }
        Ok(())
    }

    pub fn contains_relation(&self, v: &[BigInt]) -> Result<bool> {
        Ok(solve_in_lattice(&self.relations, v)?.is_some())
    }

    pub fn elements_equal(&self, a: &GroupElement, b: &GroupElement) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        self.contains_relation(&a.sub(b).coords)
    }

    /// SNF-based invariants; used only for comparing groups.
    pub fn canonicalize(&self) -> CanonicalGroup {
        let s = snf(&self.relations);
        let torsion = s.diagonal.iter().filter(|d| !d.is_one()).cloned().collect();
        CanonicalGroup { free_rank: self.generators - s.diagonal.len(), torsion }
    }
}

/// Rank of the subgroup generated by `elems`: `rank([E | R]) − rank(R)`.
pub fn subgroup_rank(pres: &GroupPresentation, elems: &[GroupElement]) -> Result<usize> {
    for e in elems {
        pres.check(e)?;
    }
    let cols: Vec<Vec<BigInt>> = elems.iter().map(|e| e.coords.clone()).collect();
    let e = IntMatrix::from_columns(&cols, pres.generators)?;
    let stacked = e.hstack(&pres.relations)?;
    Ok(rank(&stacked) - rank(&pres.relations))
}

/// Whether `m` maps the relation lattice into itself.
pub fn is_endomorphism(pres: &GroupPresentation, m: &IntMatrix) -> Result<bool> {
    if m.rows() != pres.generators || m.cols() != pres.generators {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix on a group with {} generators",
            m.rows(),
            m.cols(),
            pres.generators
        )));
    }
    for r in pres.relations.columns() {
        if !pres.contains_relation(&m.mul_vec(&r)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A well-defined endomorphism of a presented group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresEndomorphism {
    carrier: GroupPresentation,
    matrix: IntMatrix,
}

impl PresEndomorphism {
    pub fn new(carrier: GroupPresentation, matrix: IntMatrix) -> Result<Self> {
        if !is_endomorphism(&carrier, &matrix)? {
            return Err(Error::NotEndomorphism(format!(
                "matrix {} does not preserve the relation lattice",
                matrix
            )));
        }
        Ok(Self { carrier, matrix })
    }

    pub fn carrier(&self) -> &GroupPresentation {
        &self.carrier
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn apply_to(&self, x: &GroupElement) -> GroupElement {
        GroupElement::new(self.matrix.mul_vec(&x.coords).expect("element length checked"))
    }

    /// Some `y` with `φ(y) = x` in the group, if one exists.
    pub fn preimage(&self, x: &GroupElement) -> Result<Option<GroupElement>> {
        self.carrier.check(x)?;
        let g = self.carrier.generators;
        let system = self.matrix.hstack(&self.carrier.relations)?;
        Ok(solve_in_lattice(&system, &x.coords)?.map(|sol| GroupElement::new(sol[..g].to_vec())))
    }
}

/// Rows spanning the rational annihilator of the relation lattice: `P·v = 0` iff
/// some nonzero multiple of `v` is a relation.
fn relation_annihilator(pres: &GroupPresentation) -> IntMatrix {
    kernel_basis(&pres.relations.transpose()).transpose()
}

/// Basis (columns) of the saturation of `⋃_n ker(φ^n)` together with the relations.
///
/// The chain `K_0 ⊆ K_1 ⊆ …` of saturated lattices `K_n = {v : M^n v ∈ R ⊗ Q}` is
/// strictly increasing in rank until it stabilizes, so it stops within `g` steps.
pub fn eventual_kernel(endo: &PresEndomorphism) -> IntMatrix {
    eventual_kernel_with_steps(endo).0
}

/// Also returns the number of powers needed before two successive kernels coincided.
pub fn eventual_kernel_with_steps(endo: &PresEndomorphism) -> (IntMatrix, usize) {
    let g = endo.carrier.generators;
    let p = relation_annihilator(&endo.carrier);
    let mut power = IntMatrix::identity(g);
    let mut current = kernel_basis(&p);
    let mut current_hnf = hnf_basis(&current.transpose());
    for n in 1..=g + 1 {
        power = endo.matrix.mul(&power).expect("square");
        let next = kernel_basis(&p.mul(&power).expect("shapes agree"));
        let next_hnf = hnf_basis(&next.transpose());
        if next_hnf == current_hnf {
            return (current, n - 1);
        }
        current = next;
        current_hnf = next_hnf;
    }
    unreachable!("kernel chain of a {g}x{g} matrix must stabilize within {g} steps")
}

/// The quotient by the eventual kernel, together with the projection `Z^g → Z^{g'}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventualQuotient {
    pub system: PresEndomorphism,
    /// `g' × g` integer matrix; surjective with kernel equal to the eventual kernel.
    pub projection: IntMatrix,
}

pub fn eventual_quotient(endo: &PresEndomorphism) -> EventualQuotient {
    let g = endo.carrier.generators;
    let kernel = eventual_kernel(endo);
    let k = kernel.cols();
    if k == 0 && endo.carrier.relations.cols() == 0 {
        return EventualQuotient { system: endo.clone(), projection: IntMatrix::identity(g) };
    }
    // U·K = [H; 0]; the last g−k rows of U project onto a complement of the saturated K
    let (_, u) = hnf(&kernel);
    let (_, u_inv) = hnf(&u);
    let rest: Vec<usize> = (k..g).collect();
    let all: Vec<usize> = (0..g).collect();
    let projection = u.select(&rest, &all);
    let section = u_inv.select(&all, &rest);
    let induced = projection
        .mul(&endo.matrix)
        .and_then(|pm| pm.mul(&section))
        .expect("shapes agree");
    let system = PresEndomorphism { carrier: GroupPresentation::free(g - k), matrix: induced };
    EventualQuotient { system, projection }
}

/// `A / ⋃ ker(φ^n)` with the induced (injective modulo torsion) endomorphism.
pub fn reduced_injective_quotient(endo: &PresEndomorphism) -> PresEndomorphism {
    eventual_quotient(endo).system
}

impl DiscreteModule for PresEndomorphism {
    type Element = GroupElement;

    fn apply(&self, x: &GroupElement) -> GroupElement {
        self.apply_to(x)
    }

    fn embed(&self, x: &GroupElement) -> SparseVector {
        SparseVector::from_dense(0, &x.coords)
    }

    fn relations(&self) -> Vec<SparseVector> {
        self.carrier.relations.columns().iter().map(|c| SparseVector::from_dense(0, c)).collect()
    }

    fn validate(&self, x: &GroupElement) -> Result<()> {
        self.carrier.check(x).map_err(|e| Error::InvalidElement(e.to_string()))
    }

    /// `E_j` = the first `j + 1` generators; a single zero element for the trivial group.
    fn schedule_set(&self, step: usize) -> Option<GeneratorSet<GroupElement>> {
        let g = self.carrier.generators;
        if g == 0 {
            return (step == 0).then(|| GeneratorSet { label: "{0}".into(), elements: vec![GroupElement::zero(0)] });
        }
        (step < g).then(|| GeneratorSet {
            label: format!("e_1..e_{}", step + 1),
            elements: (0..=step).map(|i| GroupElement::basis(g, i)).collect(),
        })
    }

    fn growth_bound(&self) -> Option<u64> {
        Some(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{mean_rank, trajectory_rank_sequence, EngineParams, Status};
    use crate::Rational;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    fn z_plus_z2() -> GroupPresentation {
        GroupPresentation::new(2, m(&[&[0], &[2]])).unwrap()
    }

    #[test]
    fn subgroup_rank_examples() {
        let free = GroupPresentation::free(2);
        let e = [GroupElement::from_i64(&[1, 2]), GroupElement::from_i64(&[2, 4])];
        assert_eq!(subgroup_rank(&free, &e).unwrap(), 1);
        assert_eq!(subgroup_rank(&z_plus_z2(), &[GroupElement::from_i64(&[0, 1])]).unwrap(), 0);
        assert_eq!(subgroup_rank(&free, &[]).unwrap(), 0);
        assert!(subgroup_rank(&free, &[GroupElement::from_i64(&[1])]).is_err());
    }

    #[test]
    fn endomorphism_examples() {
        let free = GroupPresentation::free(3);
        assert!(is_endomorphism(&free, &m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]])).unwrap());
        let z2 = GroupPresentation::new(1, m(&[&[2]])).unwrap();
        assert!(is_endomorphism(&z2, &m(&[&[1]])).unwrap());
        assert!(is_endomorphism(&z2, &m(&[&[3]])).unwrap());
        // Z ⊕ Z/2: sending the torsion generator to the free one is not well defined
        assert!(!is_endomorphism(&z_plus_z2(), &m(&[&[0, 1], &[0, 0]])).unwrap());
        assert!(is_endomorphism(&z_plus_z2(), &m(&[&[0, 0], &[1, 1]])).unwrap());
        assert!(is_endomorphism(&free, &m(&[&[1]])).is_err());
    }

    #[test]
    fn eventual_kernel_examples() {
        let nil = PresEndomorphism::new(GroupPresentation::free(2), m(&[&[0, 1], &[0, 0]])).unwrap();
        let (k, steps) = eventual_kernel_with_steps(&nil);
        assert_eq!(k.cols(), 2);
        assert_eq!(steps, 2);

        let id = PresEndomorphism::new(GroupPresentation::free(2), IntMatrix::identity(2)).unwrap();
        assert_eq!(eventual_kernel(&id).cols(), 0);

        let dbl = PresEndomorphism::new(GroupPresentation::free(1), m(&[&[2]])).unwrap();
        assert_eq!(eventual_kernel(&dbl).cols(), 0);
    }

    #[test]
    fn reduced_quotient_examples() {
        let nil = PresEndomorphism::new(GroupPresentation::free(2), m(&[&[0, 1], &[0, 0]])).unwrap();
        let q = reduced_injective_quotient(&nil);
        assert_eq!(q.carrier().generators(), 0);

        let dbl = PresEndomorphism::new(GroupPresentation::free(1), m(&[&[2]])).unwrap();
        assert_eq!(reduced_injective_quotient(&dbl), dbl);

        let proj = PresEndomorphism::new(GroupPresentation::free(2), m(&[&[2, 0], &[0, 0]])).unwrap();
        let q = eventual_quotient(&proj);
        assert_eq!(q.system.matrix(), &m(&[&[2]]));
        assert_eq!(q.system.carrier().generators(), 1);
        // the projection kills e_2 and intertwines the maps
        let pm = q.projection.mul(proj.matrix()).unwrap();
        let mp = q.system.matrix().mul(&q.projection).unwrap();
        assert_eq!(pm, mp);
        assert!(q.projection.column(1).iter().all(Zero::is_zero));
    }

    #[test]
    fn quotient_kills_torsion() {
        // Z ⊕ Z/2 with identity: eventual kernel is the saturated torsion part
        let endo = PresEndomorphism::new(z_plus_z2(), IntMatrix::identity(2)).unwrap();
        let q = reduced_injective_quotient(&endo);
        assert_eq!(q.carrier().canonicalize(), CanonicalGroup { free_rank: 1, torsion: vec![] });
        assert_eq!(z_plus_z2().canonicalize(), CanonicalGroup { free_rank: 1, torsion: vec![BigInt::from(2)] });
    }

    #[test]
    fn element_equality_is_modulo_relations() {
        let g = z_plus_z2();
        let a = GroupElement::from_i64(&[3, 1]);
        let b = GroupElement::from_i64(&[3, 5]);
        let c = GroupElement::from_i64(&[3, 2]);
        assert!(g.elements_equal(&a, &b).unwrap());
        assert!(!g.elements_equal(&a, &c).unwrap());
    }

    #[test]
    fn trajectories_on_finite_carriers() {
        let dbl = PresEndomorphism::new(GroupPresentation::free(1), m(&[&[2]])).unwrap();
        let seq = trajectory_rank_sequence(&dbl, &[GroupElement::from_i64(&[1])], 5).unwrap();
        assert_eq!(seq, vec![1, 1, 1, 1, 1]);

        let swap = PresEndomorphism::new(GroupPresentation::free(2), m(&[&[0, 1], &[1, 0]])).unwrap();
        let r = mean_rank(&swap, &EngineParams::default()).unwrap();
        assert_eq!(r.estimate, Some(Rational::integer(0)));
        assert_eq!(r.status, Status::ExactForced);
    }

    #[test]
    fn preimage_in_presented_group() {
        let dbl = PresEndomorphism::new(GroupPresentation::free(1), m(&[&[2]])).unwrap();
        assert_eq!(dbl.preimage(&GroupElement::from_i64(&[6])).unwrap(), Some(GroupElement::from_i64(&[3])));
        assert_eq!(dbl.preimage(&GroupElement::from_i64(&[5])).unwrap(), None);
    }
}
