//! Closed subgroups of a compact abelian group `T^k × Π ℤ/m_i`.
//!
//! Group elements are parametrized by `y ∈ ℝ^k × Π (1/m_i)ℤ` modulo `ℤ^{k+f}`;
//! a character is an integer vector `χ ∈ ℤ^{k+f}` acting by `exp(2πi⟨χ, y⟩)`.
//! The subgroup cut out by a set of characters is the annihilator of the
//! lattice they span together with the relations `m_i e_{k+i}`, so subgroups
//! are in bijection with such relation lattices. The row Hermite form of that
//! lattice is the canonical key used for equality and containment.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::hnf::{lattice_contains, row_hnf};
use super::snf::smith_normal_form;
use super::IntMatrix;
use crate::error::{Error, Result};

/// The ambient group `T^k × Π ℤ/m_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AmbientGroup {
    pub torus_rank: usize,
    pub moduli: Vec<i64>,
}

impl AmbientGroup {
    pub fn parameter_dim(&self) -> usize {
        self.torus_rank + self.moduli.len()
    }
}

/// A closed subgroup `H ≅ T^r × Π ℤ/d_i` of an ambient group, in canonical form.
///
/// `embedding` has one row per ambient parameter and one column per generator:
/// first an integer basis of the identity component's lattice (Hermite form),
/// then one generator of order `d_i` per invariant factor. Equality only looks
/// at the ambient group and the canonical relation lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupDescriptor {
    pub ambient: AmbientGroup,
    pub torus_rank: usize,
    #[serde(with = "crate::serde_util::bigint_vec")]
    pub invariant_factors: Vec<BigInt>,
    #[serde(with = "crate::serde_util::rational_rows")]
    pub embedding: Vec<Vec<BigRational>>,
    pub relations: IntMatrix,
}

impl PartialEq for GroupDescriptor {
    fn eq(&self, other: &Self) -> bool {
        group_equal(self, other)
    }
}

impl Eq for GroupDescriptor {}

impl std::hash::Hash for GroupDescriptor {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ambient.hash(state);
        self.relations.hash(state);
    }
}

impl GroupDescriptor {
    /// The whole ambient group.
    pub fn full(ambient: &AmbientGroup) -> Self {
        let f = ambient.moduli.len();
        subgroup_structure(
            &IntMatrix::zeros(ambient.torus_rank, 0),
            &IntMatrix::zeros(f, 0),
            &ambient.moduli,
        )
        .expect("empty character set is always well-formed")
    }

    pub fn is_trivial(&self) -> bool {
        self.torus_rank == 0 && self.invariant_factors.is_empty()
    }

    /// Order of the component group `Π d_i`.
    pub fn component_order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    pub fn generator_count(&self) -> usize {
        self.torus_rank + self.invariant_factors.len()
    }

    /// Integer `k × r` basis of the identity component inside `ℝ^k`.
    pub fn identity_component_basis(&self) -> IntMatrix {
        let k = self.ambient.torus_rank;
        let mut m = IntMatrix::zeros(k, self.torus_rank);
        for i in 0..k {
            for c in 0..self.torus_rank {
                m[(i, c)] = self.embedding[i][c].to_integer();
            }
        }
        m
    }

    /// `self ⊆ other` as subsets of the ambient group.
    pub fn is_subgroup_of(&self, other: &GroupDescriptor) -> Result<bool> {
        if self.ambient != other.ambient {
            return Err(Error::IncompatibleGroup);
        }
        // H₁ ⊆ H₂  ⇔  L₂ ⊆ L₁ for the annihilating lattices.
        Ok((0..other.relations.rows())
            .all(|i| lattice_contains(&self.relations, other.relations.row(i))))
    }

    /// Short human-readable form such as `T^1 × Z/2`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.torus_rank > 0 {
            parts.push(format!("T^{}", self.torus_rank));
        }
        for d in &self.invariant_factors {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" × ")
        }
    }
}

/// A character of a subgroup in the subgroup's own coordinates: an integer
/// weight on each circle factor and a residue modulo each invariant factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterDescriptor {
    #[serde(with = "crate::serde_util::bigint_vec")]
    pub torus: Vec<BigInt>,
    #[serde(with = "crate::serde_util::bigint_vec")]
    pub finite: Vec<BigInt>,
    #[serde(with = "crate::serde_util::bigint_vec")]
    pub moduli: Vec<BigInt>,
}

impl CharacterDescriptor {
    pub fn is_trivial(&self) -> bool {
        self.torus.iter().all(Zero::is_zero) && self.finite.iter().all(Zero::is_zero)
    }

    /// Order of the character, or `None` when it has infinite order.
    pub fn order(&self) -> Option<BigInt> {
        if self.torus.iter().any(|w| !w.is_zero()) {
            return None;
        }
        let mut order = BigInt::one();
        for (r, d) in self.finite.iter().zip(&self.moduli) {
            let o = d / r.gcd(d);
            order = order.lcm(&o);
        }
        Some(order)
    }
}

/// Isotropy subgroup `{g : χ_j(g) = 1 for every column j}` of `T^k × Π ℤ/m_i`.
///
/// `torus_weights` is `k × s` and `finite_chars` is `f × s` with `f = moduli.len()`.
pub fn subgroup_structure(
    torus_weights: &IntMatrix,
    finite_chars: &IntMatrix,
    moduli: &[i64],
) -> Result<GroupDescriptor> {
    let k = torus_weights.rows();
    let f = moduli.len();
    let s = torus_weights.cols();
    if finite_chars.rows() != f {
        return Err(Error::DimensionMismatch {
            context: "finite character rows vs moduli",
            expected: f,
            found: finite_chars.rows(),
        });
    }
    if finite_chars.cols() != s {
        return Err(Error::DimensionMismatch {
            context: "finite character columns vs torus weight columns",
            expected: s,
            found: finite_chars.cols(),
        });
    }
    if let Some(m) = moduli.iter().find(|&&m| m < 2) {
        return Err(Error::InvalidWeightSystem(format!("modulus {m} is below 2")));
    }

    // Relation matrix [[A_S, 0], [C_S, diag(m)]]; its columns span the
    // characters that are trivial on the subgroup.
    let relation = torus_weights
        .hstack(&IntMatrix::zeros(k, f))
        .vstack(&finite_chars.hstack(&IntMatrix::diagonal(moduli)));
    let snf = smith_normal_form(&relation);
    let diag = snf.diagonal();
    let rank = snf.rank();
    let dim = k + f;

    // H = { Uᵀy' : d_i y'_i ∈ ℤ for i < rank } mod ℤ^{k+f}.
    let torus_rows: Vec<Vec<BigInt>> = (rank..dim).map(|i| snf.u.row(i).to_vec()).collect();
    let torus_basis = row_hnf(&IntMatrix::from_rows(dim, &torus_rows));
    let torus_rank = torus_basis.rows();
    debug_assert_eq!(torus_rank, k - torus_weights.rank());

    let mut invariant_factors = Vec::new();
    let mut finite_gens: Vec<Vec<BigRational>> = Vec::new();
    for (i, d) in diag.iter().enumerate().take(rank) {
        if d.is_one() {
            continue;
        }
        invariant_factors.push(d.clone());
        let gen = snf
            .u
            .row(i)
            .iter()
            .map(|x| {
                let q = BigRational::new(x.clone(), d.clone());
                &q - q.floor()
            })
            .collect();
        finite_gens.push(gen);
    }

    let mut embedding = vec![Vec::with_capacity(torus_rank + finite_gens.len()); dim];
    for (row, out) in embedding.iter_mut().enumerate() {
        for c in 0..torus_rank {
            out.push(BigRational::from_integer(torus_basis[(c, row)].clone()));
        }
        for g in &finite_gens {
            out.push(g[row].clone());
        }
    }

    Ok(GroupDescriptor {
        ambient: AmbientGroup {
            torus_rank: k,
            moduli: moduli.to_vec(),
        },
        torus_rank,
        invariant_factors,
        embedding,
        relations: row_hnf(&relation.transpose()),
    })
}

/// Restricts the ambient character `(weight, finite_char)` to `h`.
pub fn restrict_character(
    weight: &[i64],
    finite_char: &[i64],
    h: &GroupDescriptor,
) -> Result<CharacterDescriptor> {
    if weight.len() != h.ambient.torus_rank || finite_char.len() != h.ambient.moduli.len() {
        return Err(Error::IncompatibleGroup);
    }
    let chi: Vec<BigRational> = weight
        .iter()
        .chain(finite_char)
        .map(|&x| BigRational::from_integer(BigInt::from(x)))
        .collect();
    let pair = |c: usize| -> BigRational {
        chi.iter()
            .zip(&h.embedding)
            .map(|(x, row)| x * &row[c])
            .sum()
    };
    let torus = (0..h.torus_rank)
        .map(|c| {
            let v = pair(c);
            debug_assert!(v.is_integer());
            v.to_integer()
        })
        .collect();
    let finite = h
        .invariant_factors
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let v = pair(h.torus_rank + i) * BigRational::from_integer(d.clone());
            debug_assert!(v.is_integer());
            v.to_integer().mod_floor(d)
        })
        .collect();
    Ok(CharacterDescriptor {
        torus,
        finite,
        moduli: h.invariant_factors.clone(),
    })
}

/// Whether two descriptors describe the same subgroup of the same ambient group.
pub fn group_equal(g1: &GroupDescriptor, g2: &GroupDescriptor) -> bool {
    g1.ambient == g2.ambient && g1.relations == g2.relations
}

pub(crate) fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64().ok_or_else(|| Error::Overflow(x.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_torus(weights: &[i64]) -> GroupDescriptor {
        let w: Vec<Vec<i64>> = vec![weights.to_vec()];
        subgroup_structure(
            &IntMatrix::from_rows(weights.len(), &w),
            &IntMatrix::zeros(0, weights.len()),
            &[],
        )
        .unwrap()
    }

    #[test]
    fn empty_condition_set_is_everything() {
        let g = one_torus(&[]);
        assert_eq!(g.torus_rank, 1);
        assert!(g.invariant_factors.is_empty());

        let amb = AmbientGroup {
            torus_rank: 2,
            moduli: vec![2, 3],
        };
        let full = GroupDescriptor::full(&amb);
        assert_eq!(full.torus_rank, 2);
        assert_eq!(full.invariant_factors, vec![BigInt::from(6)]);
    }

    #[test]
    fn weight_two_gives_z2() {
        let g = one_torus(&[2]);
        assert_eq!(g.torus_rank, 0);
        assert_eq!(g.invariant_factors, vec![BigInt::from(2)]);
        assert_eq!(g.label(), "Z/2");
    }

    #[test]
    fn opposite_weights_give_trivial_group() {
        assert!(one_torus(&[1, -1]).is_trivial());
    }

    #[test]
    fn restriction_to_z2() {
        let h = one_torus(&[2]);
        let c = restrict_character(&[1], &[], &h).unwrap();
        assert!(!c.is_trivial());
        assert_eq!(c.order(), Some(BigInt::from(2)));
        assert!(restrict_character(&[0], &[], &h).unwrap().is_trivial());
        assert!(restrict_character(&[4], &[], &h).unwrap().is_trivial());
    }

    #[test]
    fn restriction_to_trivial_group() {
        let h = one_torus(&[1, -1]);
        for w in [-3, 0, 1, 7] {
            assert!(restrict_character(&[w], &[], &h).unwrap().is_trivial());
        }
    }

    #[test]
    fn restriction_rejects_foreign_characters() {
        let h = one_torus(&[2]);
        assert_eq!(
            restrict_character(&[1, 1], &[], &h),
            Err(Error::IncompatibleGroup)
        );
    }

    #[test]
    fn equality_is_canonical() {
        let a = one_torus(&[2]);
        assert!(group_equal(&a, &a));
        assert!(group_equal(&a, &one_torus(&[-2])));
        assert!(group_equal(&a, &one_torus(&[2, 4, -6])));
        assert!(!group_equal(&a, &one_torus(&[1])));
        assert!(!group_equal(&one_torus(&[1, -1]), &a));
    }

    #[test]
    fn containment() {
        let z2 = one_torus(&[2]);
        let z4 = one_torus(&[4]);
        let trivial = one_torus(&[1]);
        assert!(z2.is_subgroup_of(&z4).unwrap());
        assert!(!z4.is_subgroup_of(&z2).unwrap());
        assert!(trivial.is_subgroup_of(&z2).unwrap());
    }

    #[test]
    fn finite_factors_combine() {
        // T^1 × Z/2 acting by (weight 2, sign): kernel is {(t, a): 2t + a/2 ∈ ℤ}.
        let g = subgroup_structure(
            &IntMatrix::from_rows(1, &[vec![2]]),
            &IntMatrix::from_rows(1, &[vec![1]]),
            &[2],
        )
        .unwrap();
        assert_eq!(g.torus_rank, 0);
        assert_eq!(g.component_order(), BigInt::from(4));
    }
}
