use nalgebra::DMatrix;

use super::{norm, orthonormalize, SampleBatch};
use crate::error::{Error, Result};
use crate::torus_rep::{Point, WeightSystem};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PcaOptions {
    /// Singular values above `theta · σ_max` count as dimensions.
    pub theta: f64,
    pub min_samples: usize,
}

impl Default for PcaOptions {
    fn default() -> Self {
        PcaOptions {
            theta: 1e-3,
            min_samples: 50,
        }
    }
}

/// Orthonormal basis of the tangent space to the orbit through `z`, as
/// vectors in `ℝ^{2n}` (real and imaginary parts interleaved).
pub fn orbit_tangent_basis(ws: &WeightSystem, z: &Point) -> Vec<Vec<f64>> {
    let raw = ws
        .weight_rows()
        .iter()
        .map(|row| {
            // d/dt of e^{2πi a_j t} z_j at t = 0 is 2πi a_j z_j.
            z.coords
                .iter()
                .zip(row)
                .flat_map(|(c, &a)| {
                    let v = c * num_complex::Complex64::new(0.0, a as f64);
                    [v.re, v.im]
                })
                .collect()
        })
        .collect();
    orthonormalize(raw, 1e-9)
}

/// Local dimension of the sampled set near `center`.
///
/// Differences `z − center` of the samples within `radius` are projected off
/// the orbit directions at `center`; the result is the number of singular
/// values above `θ · σ_max`, or 0 when the samples coincide with the center.
pub fn estimate_local_dimension(
    batch: &SampleBatch,
    center: &Point,
    radius: f64,
    options: PcaOptions,
) -> Result<usize> {
    let c = center.to_real();
    let orbit = orbit_tangent_basis(&batch.system, center);
    let rows: Vec<Vec<f64>> = batch
        .points
        .iter()
        .map(|p| {
            p.to_real()
                .iter()
                .zip(&c)
                .map(|(a, b)| a - b)
                .collect::<Vec<f64>>()
        })
        .filter(|d| norm(d) <= radius)
        .collect();
    if rows.len() < options.min_samples {
        return Err(Error::InsufficientSamples {
            found: rows.len(),
            required: options.min_samples,
        });
    }
    let dim = c.len();
    let mut m = DMatrix::<f64>::zeros(rows.len(), dim);
    for (i, mut d) in rows.into_iter().enumerate() {
        for q in &orbit {
            let t: f64 = d.iter().zip(q).map(|(a, b)| a * b).sum();
            for (x, y) in d.iter_mut().zip(q) {
                *x -= t * y;
            }
        }
        for (j, v) in d.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    let sv = m.singular_values();
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    if smax <= f64::EPSILON * radius.max(f64::MIN_POSITIVE) {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > options.theta * smax).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::sample_near;
    use crate::strat::QuotientKind;

    #[test]
    fn examples() {
        let ws = WeightSystem::circle(&[0]);
        let center = Point::real(&[0.8]);
        let b = sample_near(&ws, QuotientKind::Symplectic, &center, 200, 1e-4, 1).unwrap();
        assert_eq!(estimate_local_dimension(&b, &center, 1e-4, PcaOptions::default()), Ok(2));

        let ws = WeightSystem::circle(&[1, -1]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let center = Point::real(&[h, h]);
        let b = sample_near(&ws, QuotientKind::Symplectic, &center, 200, 1e-4, 2).unwrap();
        assert_eq!(estimate_local_dimension(&b, &center, 1e-4, PcaOptions::default()), Ok(2));
        let b = sample_near(&ws, QuotientKind::ContactSphere, &center, 200, 1e-4, 3).unwrap();
        assert_eq!(estimate_local_dimension(&b, &center, 1e-4, PcaOptions::default()), Ok(1));

        let origin = Point::zero(2);
        let b = sample_near(&ws, QuotientKind::Symplectic, &origin, 60, 1e-4, 4).unwrap();
        assert_eq!(estimate_local_dimension(&b, &origin, 1e-4, PcaOptions::default()), Ok(0));
        let few = sample_near(&ws, QuotientKind::Symplectic, &center, 10, 1e-4, 5).unwrap();
        assert_eq!(
            estimate_local_dimension(&few, &center, 1e-4, PcaOptions::default()),
            Err(Error::InsufficientSamples { found: 10, required: 50 })
        );
    }
}
