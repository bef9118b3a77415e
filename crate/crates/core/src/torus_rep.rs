//! Weight systems of diagonal abelian actions on `ℂⁿ` and their moment maps.
//!
//! Sign convention: with `ω(u, w) = Σ Im(ū_j w_j)` and the infinitesimal action
//! `X·z_j = i⟨A_j, X⟩ z_j`, pairing the radial primitive `½ι(R)ω` with the
//! generating vector field gives
//!
//! ```text
//! Φ_i(z) = ½ Σ_j A_ij |z_j|²
//! ```
//!
//! so positive weights contribute positive moment. Finite factors have a zero
//! Lie algebra and never enter the moment map.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlin::{restrict_character, AmbientGroup, GroupDescriptor, IntMatrix};
use crate::support::{Support, MAX_COORDINATES};

/// Allowed deviation of `|z|` from 1 for sphere inputs.
pub const SPHERE_TOLERANCE: f64 = 1e-9;

/// A linear action of `T^k × Π ℤ/m_i` on `ℂⁿ`, diagonal in the standard basis.
///
/// Column `j` of `weights` is the torus weight of `z_j`; column `j` of
/// `finite_chars` holds its residues modulo each `m_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "WeightSystemRepr", into = "WeightSystemRepr")]
pub struct WeightSystem {
    torus_rank: usize,
    moduli: Vec<i64>,
    weights: Vec<Vec<i64>>,
    finite_chars: Vec<Vec<i64>>,
    n: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightSystemRepr {
    torus_rank: usize,
    #[serde(default)]
    moduli: Vec<i64>,
    #[serde(default)]
    weights: Vec<Vec<i64>>,
    #[serde(default)]
    finite_chars: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
}

impl TryFrom<WeightSystemRepr> for WeightSystem {
    type Error = Error;

    fn try_from(r: WeightSystemRepr) -> Result<Self> {
        let n = match r.dimension {
            Some(n) => n,
            None => r
                .weights
                .first()
                .or(r.finite_chars.first())
                .map(Vec::len)
                .ok_or_else(|| {
                    Error::InvalidWeightSystem(
                        "`dimension` is required when there are no weight rows".into(),
                    )
                })?,
        };
        WeightSystem::new(r.torus_rank, r.moduli, r.weights, r.finite_chars, n)
    }
}

impl From<WeightSystem> for WeightSystemRepr {
    fn from(ws: WeightSystem) -> Self {
        let dimension = (ws.weights.is_empty() && ws.finite_chars.is_empty()).then_some(ws.n);
        WeightSystemRepr {
            torus_rank: ws.torus_rank,
            moduli: ws.moduli,
            weights: ws.weights,
            finite_chars: ws.finite_chars,
            dimension,
        }
    }
}

impl WeightSystem {
    /// Validates shapes and reduces finite characters into `[0, m_i)`.
    pub fn new(
        torus_rank: usize,
        moduli: Vec<i64>,
        weights: Vec<Vec<i64>>,
        mut finite_chars: Vec<Vec<i64>>,
        n: usize,
    ) -> Result<Self> {
        if weights.len() != torus_rank {
            return Err(Error::InvalidWeightSystem(format!(
                "expected {torus_rank} weight rows, found {}",
                weights.len()
            )));
        }
        if finite_chars.len() != moduli.len() {
            return Err(Error::InvalidWeightSystem(format!(
                "expected {} finite character rows, found {}",
                moduli.len(),
                finite_chars.len()
            )));
        }
        if let Some(row) = weights.iter().chain(&finite_chars).find(|r| r.len() != n) {
            return Err(Error::InvalidWeightSystem(format!(
                "row of length {} in a system of dimension {n}",
                row.len()
            )));
        }
        if let Some(m) = moduli.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidWeightSystem(format!("modulus {m} is below 2")));
        }
        if n > MAX_COORDINATES {
            return Err(Error::InvalidWeightSystem(format!(
                "dimension {n} exceeds {MAX_COORDINATES}"
            )));
        }
        for (row, &m) in finite_chars.iter_mut().zip(&moduli) {
            for c in row.iter_mut() {
                *c = c.rem_euclid(m);
            }
        }
        Ok(WeightSystem {
            torus_rank,
            moduli,
            weights,
            finite_chars,
            n,
        })
    }

    /// A pure torus action; `rows` is `k × n`.
    pub fn torus(rows: &[&[i64]]) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.len());
        let weights = rows.iter().map(|r| r.to_vec()).collect();
        Self::new(rows.len(), Vec::new(), weights, Vec::new(), n)
    }

    /// A circle action with the given weights.
    pub fn circle(weights: &[i64]) -> Self {
        Self::torus(&[weights]).expect("a single row is always well-formed")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn torus_rank(&self) -> usize {
        self.torus_rank
    }

    pub fn moduli(&self) -> &[i64] {
        &self.moduli
    }

    pub fn weight_rows(&self) -> &[Vec<i64>] {
        &self.weights
    }

    pub fn finite_char_rows(&self) -> &[Vec<i64>] {
        &self.finite_chars
    }

    pub fn ambient(&self) -> AmbientGroup {
        AmbientGroup {
            torus_rank: self.torus_rank,
            moduli: self.moduli.clone(),
        }
    }

    /// Torus weight of coordinate `j`.
    pub fn weight(&self, j: usize) -> Vec<i64> {
        self.weights.iter().map(|r| r[j]).collect()
    }

    /// Finite character residues of coordinate `j`.
    pub fn finite_char(&self, j: usize) -> Vec<i64> {
        self.finite_chars.iter().map(|r| r[j]).collect()
    }

    /// Coordinates fixed by the whole group (zero weight and zero residues).
    pub fn everywhere_fixed(&self) -> Support {
        Support::from_indices((0..self.n).filter(|&j| {
            self.weights.iter().all(|r| r[j] == 0) && self.finite_chars.iter().all(|r| r[j] == 0)
        }))
    }

    /// `k × |S|` torus weight matrix of the coordinates in `s`.
    pub fn torus_matrix(&self, s: Support) -> IntMatrix {
        let idx = s.indices();
        let rows: Vec<Vec<i64>> = self
            .weights
            .iter()
            .map(|r| idx.iter().map(|&j| r[j]).collect())
            .collect();
        IntMatrix::from_rows(idx.len(), &rows)
    }

    /// `f × |S|` finite character matrix of the coordinates in `s`.
    pub fn finite_matrix(&self, s: Support) -> IntMatrix {
        let idx = s.indices();
        let rows: Vec<Vec<i64>> = self
            .finite_chars
            .iter()
            .map(|r| idx.iter().map(|&j| r[j]).collect())
            .collect();
        IntMatrix::from_rows(idx.len(), &rows)
    }

    pub fn check_support(&self, s: Support) -> Result<()> {
        if s.bound() > self.n {
            Err(Error::SupportOutOfRange { support: s, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Phase `⟨A_j, t⟩ + Σ c_ij a_i / m_i` (in turns) of `g` on coordinate `j`.
    pub fn character_turns(&self, j: usize, g: &GroupElement) -> f64 {
        let torus: f64 = self
            .weights
            .iter()
            .zip(&g.torus)
            .map(|(r, t)| r[j] as f64 * t)
            .sum();
        let finite: f64 = self
            .finite_chars
            .iter()
            .zip(&self.moduli)
            .zip(&g.finite)
            .map(|((r, &m), &a)| ((r[j] * a).rem_euclid(m)) as f64 / m as f64)
            .sum();
        torus + finite
    }

    /// `g·z`.
    pub fn act(&self, g: &GroupElement, z: &Point) -> Result<Point> {
        self.check_point(z)?;
        if g.torus.len() != self.torus_rank || g.finite.len() != self.moduli.len() {
            return Err(Error::IncompatibleGroup);
        }
        let coords = z
            .coords
            .iter()
            .enumerate()
            .map(|(j, c)| c * Complex64::from_polar(1.0, TAU * self.character_turns(j, g)))
            .collect();
        Ok(Point { coords, t: z.t })
    }

    fn check_point(&self, z: &Point) -> Result<()> {
        if z.coords.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "point coordinates",
                expected: self.n,
                found: z.coords.len(),
            });
        }
        Ok(())
    }
}

/// A point of `ℂⁿ`, optionally with a contactization coordinate `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Point { coords, t: None }
    }

    pub fn real(coords: &[f64]) -> Self {
        Point::new(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero(n: usize) -> Self {
        Point::new(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, lambda: f64) -> Point {
        Point {
            coords: self.coords.iter().map(|c| c * lambda).collect(),
            t: self.t,
        }
    }

    /// Coordinates with modulus above `tol`.
    pub fn support(&self, tol: f64) -> Support {
        Support::from_indices(
            self.coords
                .iter()
                .enumerate()
                .filter(|(_, c)| c.norm() > tol)
                .map(|(j, _)| j),
        )
    }

    /// Zeroes the coordinates outside `s`.
    pub fn restricted(&self, s: Support) -> Point {
        Point {
            coords: self
                .coords
                .iter()
                .enumerate()
                .map(|(j, c)| if s.contains(j) { *c } else { Complex64::new(0.0, 0.0) })
                .collect(),
            t: self.t,
        }
    }

    /// The point as a real vector `(Re z_0, Im z_0, Re z_1, …)`.
    pub fn to_real(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|c| [c.re, c.im]).collect()
    }
}

/// An element `(t, a)` of `T^k × Π ℤ/m_i`; `t` in turns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub torus: Vec<f64>,
    pub finite: Vec<i64>,
}

/// A value of the moment map in the dual of the torus Lie algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MomentValue(pub Vec<f64>);

impl MomentValue {
    pub fn zero(k: usize) -> Self {
        MomentValue(vec![0.0; k])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &MomentValue) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `Φ_i(z) = ½ Σ_j A_ij |z_j|²`.
pub fn moment_map(ws: &WeightSystem, z: &Point) -> Result<MomentValue> {
    ws.check_point(z)?;
    let sq: Vec<f64> = z.coords.iter().map(|c| c.norm_sqr()).collect();
    Ok(MomentValue(
        ws.weights
            .iter()
            .map(|row| 0.5 * row.iter().zip(&sq).map(|(&a, s)| a as f64 * s).sum::<f64>())
            .collect(),
    ))
}

/// Moment map of the trivially extended action on `ℂⁿ × ℝ`; it ignores `t`.
pub fn contactization_moment(ws: &WeightSystem, z: &Point) -> Result<MomentValue> {
    if z.t.is_none() {
        return Err(Error::DimensionMismatch {
            context: "contactization point without a t coordinate",
            expected: ws.n + 1,
            found: ws.n,
        });
    }
    moment_map(ws, z)
}

/// Moment map on the symplectization `M × ℝ`: `Ψ(m, t) = -eᵗ Φ(m)`.
pub fn symplectization_moment(phi: &MomentValue, t: f64) -> MomentValue {
    let s = -t.exp();
    MomentValue(phi.0.iter().map(|x| s * x).collect())
}

/// Contact moment map of the induced action on the unit sphere.
pub fn sphere_contact_moment(ws: &WeightSystem, z: &Point) -> Result<MomentValue> {
    let norm = z.norm();
    if (norm - 1.0).abs() > SPHERE_TOLERANCE {
        return Err(Error::OffSphere { norm });
    }
    moment_map(ws, z)
}

/// Splits the coordinates into those fixed by `h` and those it moves.
pub fn fixed_subspace(ws: &WeightSystem, h: &GroupDescriptor) -> Result<(Support, Support)> {
    if h.ambient != ws.ambient() {
        return Err(Error::IncompatibleGroup);
    }
    let mut fixed = Support::EMPTY;
    let mut moving = Support::EMPTY;
    for j in 0..ws.n {
        if restrict_character(&ws.weight(j), &ws.finite_char(j), h)?.is_trivial() {
            fixed = fixed.with(j);
        } else {
            moving = moving.with(j);
        }
    }
    Ok((fixed, moving))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intlin::subgroup_structure;

    fn assert_moment(m: &MomentValue, expected: &[f64]) {
        assert_eq!(m.0.len(), expected.len());
        for (a, b) in m.0.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn moment_examples() {
        let ws = WeightSystem::circle(&[1, -1]);
        assert_moment(&moment_map(&ws, &Point::zero(2)).unwrap(), &[0.0]);
        assert_moment(&moment_map(&ws, &Point::real(&[1.0, 1.0])).unwrap(), &[0.0]);

        let ws = WeightSystem::circle(&[2, -2, 1]);
        assert_moment(&moment_map(&ws, &Point::real(&[1.0, 1.0, 0.0])).unwrap(), &[0.0]);
        assert_moment(&moment_map(&ws, &Point::real(&[1.0, 0.0, 1.0])).unwrap(), &[1.5]);
    }

    #[test]
    fn moment_matches_finite_difference_of_primitive() {
        // ⟨Φ(z), X⟩ = ½ ω(z, X·z); evaluate the pairing directly.
        let ws = WeightSystem::torus(&[&[2, -2, 1], &[0, 1, 3]]).unwrap();
        let z = Point::new(vec![
            Complex64::new(0.3, -0.7),
            Complex64::new(1.1, 0.2),
            Complex64::new(-0.4, 0.5),
        ]);
        let phi = moment_map(&ws, &z).unwrap();
        for (i, row) in ws.weight_rows().iter().enumerate() {
            // Vector field by central difference of the flow exp(isA_ij).
            let h = 1e-6;
            let mut pairing = 0.0;
            for (j, c) in z.coords.iter().enumerate() {
                let a = row[j] as f64;
                let fwd = c * Complex64::from_polar(1.0, a * h);
                let bwd = c * Complex64::from_polar(1.0, -a * h);
                let v = (fwd - bwd) / (2.0 * h);
                pairing += 0.5 * (c.conj() * v).im;
            }
            assert!((phi.0[i] - pairing).abs() < 1e-8);
        }
    }

    #[test]
    fn contactization_ignores_t() {
        let ws = WeightSystem::circle(&[1, -1]);
        let z = Point::zero(2).with_t(5.0);
        assert_moment(&contactization_moment(&ws, &z).unwrap(), &[0.0]);
        let z = Point::real(&[1.0, 1.0]).with_t(-2.0);
        assert_moment(&contactization_moment(&ws, &z).unwrap(), &[0.0]);
        let ws = WeightSystem::circle(&[1]);
        let z = Point::real(&[2.0]).with_t(-3.0);
        assert_moment(&contactization_moment(&ws, &z).unwrap(), &[2.0]);
        assert!(contactization_moment(&ws, &Point::real(&[2.0])).is_err());
    }

    #[test]
    fn symplectization_examples() {
        assert_moment(&symplectization_moment(&MomentValue(vec![0.0]), 3.0), &[0.0]);
        assert_moment(&symplectization_moment(&MomentValue(vec![1.0]), 0.0), &[-1.0]);
        assert_moment(
            &symplectization_moment(&MomentValue(vec![2.0, -1.0]), 2f64.ln()),
            &[-4.0, 2.0],
        );
    }

    #[test]
    fn sphere_moment() {
        let ws = WeightSystem::circle(&[1, -1]);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_moment(&sphere_contact_moment(&ws, &Point::real(&[r, r])).unwrap(), &[0.0]);
        let ws = WeightSystem::circle(&[1, 1]);
        assert_moment(&sphere_contact_moment(&ws, &Point::real(&[1.0, 0.0])).unwrap(), &[0.5]);
        let z = Point::new(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        assert_moment(&sphere_contact_moment(&ws, &z).unwrap(), &[0.5]);
        assert!(matches!(
            sphere_contact_moment(&ws, &Point::real(&[1.0, 1.0])),
            Err(Error::OffSphere { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let ws = WeightSystem::circle(&[1, -1]);
        assert!(matches!(
            moment_map(&ws, &Point::zero(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fixed_subspace_examples() {
        let ws = WeightSystem::circle(&[1, -1]);
        let trivial = subgroup_structure(
            &IntMatrix::from_rows(1, &[vec![1]]),
            &IntMatrix::zeros(0, 1),
            &[],
        )
        .unwrap();
        assert_eq!(fixed_subspace(&ws, &trivial).unwrap(), (Support::full(2), Support::EMPTY));
        let full = GroupDescriptor::full(&ws.ambient());
        assert_eq!(fixed_subspace(&ws, &full).unwrap(), (Support::EMPTY, Support::full(2)));

        let ws = WeightSystem::circle(&[2, -2, 1]);
        let z2 = subgroup_structure(
            &IntMatrix::from_rows(1, &[vec![2]]),
            &IntMatrix::zeros(0, 1),
            &[],
        )
        .unwrap();
        assert_eq!(
            fixed_subspace(&ws, &z2).unwrap(),
            (Support::from_indices([0, 1]), Support::singleton(2))
        );

        let other = WeightSystem::torus(&[&[1, 0], &[0, 1]]).unwrap();
        assert_eq!(fixed_subspace(&other, &z2), Err(Error::IncompatibleGroup));
    }

    #[test]
    fn action_preserves_moment() {
        let ws = WeightSystem::new(1, vec![3], vec![vec![2, -1]], vec![vec![1, 2]], 2).unwrap();
        let z = Point::new(vec![Complex64::new(0.3, 0.4), Complex64::new(-1.0, 0.2)]);
        let g = GroupElement {
            torus: vec![0.37],
            finite: vec![2],
        };
        let gz = ws.act(&g, &z).unwrap();
        let d = moment_map(&ws, &gz).unwrap().max_abs_diff(&moment_map(&ws, &z).unwrap());
        assert!(d < 1e-14);
    }

    #[test]
    fn serde_roundtrip_and_validation() {
        let ws = WeightSystem::new(1, vec![2], vec![vec![1, -1, 0]], vec![vec![0, 3, -1]], 3)
            .unwrap();
        assert_eq!(ws.finite_char(1), vec![1]);
        assert_eq!(ws.finite_char(2), vec![1]);
        let json = serde_json::to_string(&ws).unwrap();
        assert_eq!(serde_json::from_str::<WeightSystem>(&json).unwrap(), ws);

        let bare = r#"{"torus_rank":0,"dimension":2}"#;
        let ws: WeightSystem = serde_json::from_str(bare).unwrap();
        assert_eq!(ws.n(), 2);
        let json = serde_json::to_string(&ws).unwrap();
        assert_eq!(serde_json::from_str::<WeightSystem>(&json).unwrap(), ws);

        assert!(serde_json::from_str::<WeightSystem>(r#"{"torus_rank":0}"#).is_err());
        assert!(serde_json::from_str::<WeightSystem>(
            r#"{"torus_rank":1,"weights":[[1,2],[3,4]]}"#
        )
        .is_err());
    }
}
