//! Monte Carlo checks of the combinatorial engine.
//!
//! Points of `Φ⁻¹(0)` are built from squared moduli `x` in the cone
//! `{A_S x = 0, x > 0}` and independent phases. Every random stream is derived
//! from a 64-bit seed and a per-item index, so batches are reproducible
//! bit for bit regardless of thread count.

mod connectivity;
mod pca;
mod verify;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlin::{rational_kernel, IntMatrix};
use crate::strat::{assemble_partition, feasible_witness, open_dense_stratum, QuotientKind};
use crate::support::Support;
use crate::torus_rep::{moment_map, Point, WeightSystem};

pub use connectivity::{
    quotient_connectivity, quotient_distance, ConnectivityOptions, ConnectivityResult,
    GroupGrid,
};
pub use pca::{estimate_local_dimension, orbit_tangent_basis, PcaOptions};
pub use verify::{
    verify_ledgers, ConnectivityCheck, DensityCheck, NeighborhoodCheck, StratumCheck,
    VerificationBudget, VerificationReport,
};

/// Maximal `‖Φ(z)‖` accepted for a sampled point.
pub const LEVEL_TOLERANCE: f64 = 1e-8;

/// Moduli below this count as zero when reading off a sampled support.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

/// Points sampled from a zero level, with the data needed to reproduce them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub system: WeightSystem,
    pub kind: QuotientKind,
    pub seed: u64,
    pub points: Vec<Point>,
    /// Number of points with each support, sorted by support.
    pub histogram: Vec<(Support, usize)>,
}

impl SampleBatch {
    fn new(system: &WeightSystem, kind: QuotientKind, seed: u64, points: Vec<Point>) -> Self {
        let mut histogram: Vec<(Support, usize)> = Vec::new();
        let mut supports: Vec<Support> =
            points.iter().map(|p| p.support(SUPPORT_TOLERANCE)).collect();
        supports.sort_unstable();
        for s in supports {
            match histogram.last_mut() {
                Some((t, c)) if *t == s => *c += 1,
                _ => histogram.push((s, 1)),
            }
        }
        SampleBatch {
            system: system.clone(),
            kind,
            seed,
            points,
            histogram,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Concatenates two batches of the same system and kind.
    pub fn merge(&self, other: &SampleBatch) -> Result<SampleBatch> {
        if self.system != other.system || self.kind != other.kind {
            return Err(Error::IncompatibleGroup);
        }
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        Ok(SampleBatch::new(&self.system, self.kind, self.seed, points))
    }

    /// Largest `‖Φ(z)‖` over the batch.
    pub fn level_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| moment_map(&self.system, p).map_or(f64::INFINITY, |m| m.norm()))
            .fold(0.0, f64::max)
    }
}

/// Independent random stream `stream` of the generator seeded by `seed`.
pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Orthonormal basis of `{v : A v = 0}` (and `Σ v = 0` when `fix_sum`), from
/// the exact rational kernel.
pub(crate) fn kernel_basis(a: &IntMatrix, fix_sum: bool) -> Vec<Vec<f64>> {
    let m = if fix_sum {
        let ones = vec![1i64; a.cols()];
        a.vstack(&IntMatrix::from_rows(a.cols(), &[ones]))
    } else {
        a.clone()
    };
    let raw: Vec<Vec<f64>> = rational_kernel(&m)
        .iter()
        .map(|v| v.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect())
        .collect();
    orthonormalize(raw, 1e-10)
}

/// Modified Gram–Schmidt, applied twice; drops vectors that become negligible.
pub(crate) fn orthonormalize(vectors: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut v in vectors {
        let scale = norm(&v);
        if scale == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &out {
                let d = dot(&v, q);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= d * y;
                }
            }
        }
        let n = norm(&v);
        if n > tol * scale {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A point of the support-`s` piece of the zero level with `Σ x = 1`, as
/// squared moduli indexed by `s.indices()`.
fn interior_moduli(ws: &WeightSystem, s: Support) -> Result<Vec<f64>> {
    let w = feasible_witness(ws, s).ok_or(Error::InfeasibleSupport(s))?;
    let x: Vec<f64> = w.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    let total: f64 = x.iter().sum();
    Ok(x.into_iter().map(|v| v / total).collect())
}

/// Assembles a point from squared moduli on `s` and phases in turns.
fn point_from(n: usize, s: Support, x: &[f64], phases: &[f64]) -> Point {
    let mut coords = vec![Complex64::new(0.0, 0.0); n];
    for ((j, &xj), &th) in s.iter().zip(x).zip(phases) {
        coords[j] = Complex64::from_polar(xj.max(0.0).sqrt(), std::f64::consts::TAU * th);
    }
    Point::new(coords)
}

fn check_level(ws: &WeightSystem, p: &Point) -> Result<()> {
    let r = moment_map(ws, p)?.norm();
    if r <= LEVEL_TOLERANCE {
        Ok(())
    } else {
        Err(Error::integrity("zero-level", format!("sample has ‖Φ‖ = {r:e}")))
    }
}

/// Chord `[lo, hi]` of `{x + λ d ≥ 0}`.
fn chord(x: &[f64], d: &[f64]) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (&xi, &di) in x.iter().zip(d) {
        if di > 0.0 {
            lo = lo.max(-xi / di);
        } else if di < 0.0 {
            hi = hi.min(-xi / di);
        }
    }
    (lo, hi)
}

fn random_direction(rng: &mut ChaCha8Rng, basis: &[Vec<f64>], len: usize) -> Vec<f64> {
    let mut d = vec![0.0; len];
    for b in basis {
        let c: f64 = rng.sample(StandardNormal);
        for (x, y) in d.iter_mut().zip(b) {
            *x += c * y;
        }
    }
    d
}

/// Samples `count` points of `Φ⁻¹(0)` with support exactly `s`.
///
/// Squared moduli are drawn along a random chord of the feasible polytope
/// through an interior point; phases are uniform. Contact batches lie on the
/// unit sphere, symplectic ones at radius in `[0.5, 1.5]`. The empty support
/// gives the single point `0` (symplectic only).
pub fn sample_zero_level(
    ws: &WeightSystem,
    kind: QuotientKind,
    s: Support,
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    ws.check_support(s)?;
    if s.is_empty() {
        return match kind {
            QuotientKind::Symplectic => Ok(SampleBatch::new(ws, kind, seed, vec![Point::zero(ws.n())])),
            QuotientKind::ContactSphere => Err(Error::InfeasibleSupport(s)),
        };
    }
    let x0 = interior_moduli(ws, s)?;
    let basis = kernel_basis(&ws.torus_matrix(s), true);
    let n = ws.n();
    let points = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let d = random_direction(&mut rng, &basis, x0.len());
            let (lo, hi) = chord(&x0, &d);
            let lambda = if basis.is_empty() {
                0.0
            } else {
                0.95 * (lo + (hi - lo) * rng.random::<f64>())
            };
            let radius_sq = match kind {
                QuotientKind::ContactSphere => 1.0,
                QuotientKind::Symplectic => rng.random_range(0.5f64..1.5).powi(2),
            };
            let x: Vec<f64> = x0
                .iter()
                .zip(&d)
                .map(|(a, b)| (a + lambda * b) * radius_sq)
                .collect();
            let phases: Vec<f64> = (0..x.len()).map(|_| rng.random::<f64>()).collect();
            let p = point_from(n, s, &x, &phases);
            check_level(ws, &p)?;
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch::new(ws, kind, seed, points))
}

/// Samples `count` points of the same support as `center` within about
/// `radius` of it, moving along the zero level (and the sphere for the contact
/// kind).
pub fn sample_near(
    ws: &WeightSystem,
    kind: QuotientKind,
    center: &Point,
    count: usize,
    radius: f64,
    seed: u64,
) -> Result<SampleBatch> {
    if center.coords.len() != ws.n() {
        return Err(Error::DimensionMismatch {
            context: "center coordinates",
            expected: ws.n(),
            found: center.coords.len(),
        });
    }
    check_level(ws, center)?;
    let s = center.support(SUPPORT_TOLERANCE);
    if s.is_empty() {
        return Ok(SampleBatch::new(ws, kind, seed, vec![center.clone(); count]));
    }
    let idx = s.indices();
    let xc: Vec<f64> = idx.iter().map(|&j| center.coords[j].norm_sqr()).collect();
    let theta: Vec<f64> = idx
        .iter()
        .map(|&j| center.coords[j].arg() / std::f64::consts::TAU)
        .collect();
    let rmin = xc.iter().fold(f64::INFINITY, |a, &b| a.min(b)).sqrt();
    let radius = radius.min(0.5 * rmin);
    let basis = kernel_basis(&ws.torus_matrix(s), kind == QuotientKind::ContactSphere);
    let phase_step = radius / (2.0 * (idx.len() as f64).sqrt());
    let n = ws.n();
    let points = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            // Scale the modulus step so the largest change of |z_j| is at
            // most radius / 2, whatever the size of z_j.
            let mut d = random_direction(&mut rng, &basis, xc.len());
            let stretch = d
                .iter()
                .zip(&xc)
                .map(|(v, xj)| v.abs() / (2.0 * xj.sqrt()))
                .fold(0.0, f64::max);
            let u: f64 = rng.random::<f64>();
            for v in d.iter_mut() {
                *v = if stretch > 0.0 { *v * 0.5 * radius * u / stretch } else { 0.0 };
            }
            let scale = match kind {
                QuotientKind::ContactSphere => 1.0,
                QuotientKind::Symplectic => 1.0 + 0.5 * radius * rng.random_range(-1.0f64..1.0),
            };
            let x: Vec<f64> = xc.iter().zip(&d).map(|(a, b)| (a + b) * scale).collect();
            let phases: Vec<f64> = theta
                .iter()
                .zip(&xc)
                .map(|(t, xj)| {
                    t + phase_step * rng.random_range(-1.0f64..1.0)
                        / (xj.sqrt() * std::f64::consts::TAU)
                })
                .collect();
            let p = point_from(n, s, &x, &phases);
            check_level(ws, &p)?;
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch::new(ws, kind, seed, points))
}

/// Volume-weighted samples of the whole zero level: squared moduli uniform on
/// the polytope `{x ≥ 0, A x = 0, Σ x = 1}` (hit-and-run), uniform phases.
///
/// Symplectic batches are rescaled to a radius uniform in `[0.5, 1.5]`. When
/// the zero level is `{0}` the symplectic batch consists of the origin and the
/// contact batch is empty.
pub fn sample_volume(
    ws: &WeightSystem,
    kind: QuotientKind,
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    const CHUNK: usize = 512;
    let top = maximal_feasible_support(ws)?;
    if top.is_empty() {
        let points = match kind {
            QuotientKind::Symplectic => vec![Point::zero(ws.n()); count],
            QuotientKind::ContactSphere => Vec::new(),
        };
        return Ok(SampleBatch::new(ws, kind, seed, points));
    }
    let x0 = interior_moduli(ws, top)?;
    let basis = kernel_basis(&ws.torus_matrix(top), true);
    let dim = basis.len();
    let burn_in = 50 * (dim + 1);
    let thin = 2 * dim + 1;
    let n = ws.n();
    let chunks = count.div_ceil(CHUNK);
    let points = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            let mut x = x0.clone();
            let mut out = Vec::with_capacity(len);
            let step = |x: &mut Vec<f64>, rng: &mut ChaCha8Rng| {
                if dim == 0 {
                    return;
                }
                let d = random_direction(rng, &basis, x.len());
                let (lo, hi) = chord(x, &d);
                let lambda = lo + (hi - lo) * rng.random::<f64>();
                for (a, b) in x.iter_mut().zip(&d) {
                    *a = (*a + lambda * b).max(0.0);
                }
            };
            for _ in 0..burn_in {
                step(&mut x, &mut rng);
            }
            for _ in 0..len {
                for _ in 0..thin {
                    step(&mut x, &mut rng);
                }
                let radius_sq = match kind {
                    QuotientKind::ContactSphere => 1.0,
                    QuotientKind::Symplectic => rng.random_range(0.5f64..1.5).powi(2),
                };
                let total: f64 = x.iter().sum();
                let xs: Vec<f64> = x.iter().map(|v| v * radius_sq / total).collect();
                let phases: Vec<f64> = (0..xs.len()).map(|_| rng.random::<f64>()).collect();
                out.push(point_from(n, top, &xs, &phases));
            }
            out
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    for p in &points {
        check_level(ws, p)?;
    }
    Ok(SampleBatch::new(ws, kind, seed, points))
}

/// Union of all feasible supports, itself feasible since feasible supports
/// are closed under union.
pub fn maximal_feasible_support(ws: &WeightSystem) -> Result<Support> {
    let p = assemble_partition(ws, QuotientKind::Symplectic)?;
    Ok(p.strata
        .iter()
        .flat_map(|s| s.supports.iter().copied())
        .fold(p.free_coords, Support::union))
}

/// Fraction of the batch lying in the principal stratum of its component.
pub fn density_fraction(ws: &WeightSystem, batch: &SampleBatch) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let p = assemble_partition(ws, batch.kind)?;
    let principal = open_dense_stratum(&p)?;
    let hits = batch
        .points
        .iter()
        .filter(|z| {
            p.stratum_of(z.support(SUPPORT_TOLERANCE))
                .is_some_and(|s| principal.contains(&s))
        })
        .count();
    Ok(hits as f64 / batch.len() as f64)
}
