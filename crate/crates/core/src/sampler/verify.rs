use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{
    density_fraction, estimate_local_dimension, interior_moduli, point_from,
    quotient_connectivity, rng_for, sample_near, sample_volume, ConnectivityOptions,
    ConnectivityResult, PcaOptions, SampleBatch, LEVEL_TOLERANCE,
};
use crate::error::Result;
use crate::local_model::{slice_representation, LinkTree};
use crate::strat::{isotropy_of_support, zero_feasible, QuotientKind};
use crate::support::Support;
use crate::torus_rep::{moment_map, GroupElement, Point, WeightSystem};

/// Sample sizes and limits for [`verify_ledgers`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationBudget {
    /// Samples per local dimension estimate.
    pub samples_per_estimate: usize,
    /// Samples per link connectivity check.
    pub connectivity_samples: usize,
    /// Volume-weighted samples for the density check.
    pub density_samples: usize,
    /// Random points for the homogeneity and equivariance residuals.
    pub residual_points: usize,
    /// Neighbor supports examined per stratum.
    pub neighbor_supports: usize,
    /// Tree nodes examined before the report is marked incomplete.
    pub max_nodes: usize,
    /// Sampling radius relative to the smallest nonzero modulus.
    pub relative_radius: f64,
    pub pca: PcaOptionsRepr,
    pub connectivity: ConnectivityOptions,
}

/// Serializable copy of [`PcaOptions`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaOptionsRepr {
    pub theta: f64,
    pub min_samples: usize,
}

impl From<PcaOptionsRepr> for PcaOptions {
    fn from(p: PcaOptionsRepr) -> Self {
        PcaOptions {
            theta: p.theta,
            min_samples: p.min_samples,
        }
    }
}

impl Default for VerificationBudget {
    fn default() -> Self {
        let pca = PcaOptions::default();
        VerificationBudget {
            samples_per_estimate: 200,
            connectivity_samples: 2000,
            density_samples: 100_000,
            residual_points: 10_000,
            neighbor_supports: 16,
            max_nodes: 512,
            relative_radius: 1e-4,
            pca: PcaOptionsRepr {
                theta: pca.theta,
                min_samples: pca.min_samples,
            },
            connectivity: ConnectivityOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumCheck {
    /// Strata leading from the root to the tree holding this stratum.
    pub path: Vec<usize>,
    pub stratum: usize,
    pub predicted: usize,
    pub estimated: Option<usize>,
    pub detail: Option<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodCheck {
    pub path: Vec<usize>,
    pub stratum: usize,
    pub predicted: Vec<usize>,
    pub observed: Vec<usize>,
    /// Link weight systems computed at other member supports agree.
    pub member_links_agree: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityCheck {
    pub path: Vec<usize>,
    pub result: ConnectivityResult,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityCheck {
    pub fraction: f64,
    pub samples: usize,
    pub threshold: f64,
    pub pass: bool,
}

/// Outcome of the sampled checks on a link tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub kind: QuotientKind,
    pub budget: VerificationBudget,
    pub level_tolerance: f64,
    pub strata: Vec<StratumCheck>,
    pub neighborhoods: Vec<NeighborhoodCheck>,
    pub connectivity: Vec<ConnectivityCheck>,
    pub density: Option<DensityCheck>,
    pub homogeneity_residual: f64,
    pub equivariance_residual: f64,
    pub homogeneity_tolerance: f64,
    pub complete: bool,
    pub pass: bool,
}

impl VerificationReport {
    /// Human-readable lines describing each failed check.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in self.strata.iter().filter(|c| !c.pass) {
            out.push(format!(
                "dimension of S{} at {:?}: predicted {}, estimated {:?}{}",
                c.stratum,
                c.path,
                c.predicted,
                c.estimated,
                c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
            ));
        }
        for c in self.neighborhoods.iter().filter(|c| !c.pass) {
            out.push(format!(
                "neighborhood of S{} at {:?}: predicted {:?}, observed {:?}, member links agree: {}",
                c.stratum, c.path, c.predicted, c.observed, c.member_links_agree
            ));
        }
        for c in self.connectivity.iter().filter(|c| !c.pass) {
            out.push(format!("link at {:?} has {} components", c.path, c.result.components));
        }
        if let Some(d) = self.density.as_ref().filter(|d| !d.pass) {
            out.push(format!("principal density {} below {}", d.fraction, d.threshold));
        }
        if self.homogeneity_residual > self.homogeneity_tolerance {
            out.push(format!("homogeneity residual {:e}", self.homogeneity_residual));
        }
        if self.equivariance_residual > self.homogeneity_tolerance {
            out.push(format!("equivariance residual {:e}", self.equivariance_residual));
        }
        if !self.complete {
            out.push("budget exhausted or tree truncated; report incomplete".into());
        }
        out
    }
}

/// Derives an independent seed for the `tag`-th check.
fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Ctx<'a> {
    seed: u64,
    budget: &'a VerificationBudget,
    tag: u64,
    nodes_seen: usize,
    complete: bool,
    strata: Vec<StratumCheck>,
    neighborhoods: Vec<NeighborhoodCheck>,
    connectivity: Vec<ConnectivityCheck>,
}

impl Ctx<'_> {
    fn next_seed(&mut self) -> u64 {
        self.tag += 1;
        derive_seed(self.seed, self.tag)
    }
}

/// Samples near each stratum of `tree` and its links and compares what is
/// observed with the engine's predictions.
pub fn verify_ledgers(
    tree: &LinkTree,
    budget: &VerificationBudget,
    seed: u64,
) -> Result<VerificationReport> {
    let mut ctx = Ctx {
        seed,
        budget,
        tag: 0,
        nodes_seen: 0,
        complete: !tree.is_truncated(),
        strata: Vec::new(),
        neighborhoods: Vec::new(),
        connectivity: Vec::new(),
    };
    visit(tree, &mut Vec::new(), &mut ctx)?;

    let ws = tree.system();
    let kind = tree.partition.kind;
    let density = if tree.partition.is_empty() {
        None
    } else {
        let s = ctx.next_seed();
        let batch = sample_volume(ws, kind, budget.density_samples, s)?;
        let fraction = density_fraction(ws, &batch)?;
        Some(DensityCheck {
            fraction,
            samples: batch.len(),
            threshold: 0.99,
            pass: fraction >= 0.99,
        })
    };
    let s = ctx.next_seed();
    let (homogeneity_residual, equivariance_residual) =
        moment_residuals(ws, budget.residual_points, s)?;
    let homogeneity_tolerance = 1e-9;

    let complete = ctx.complete;
    let pass = complete
        && ctx.strata.iter().all(|c| c.pass)
        && ctx.neighborhoods.iter().all(|c| c.pass)
        && ctx.connectivity.iter().all(|c| c.pass)
        && density.as_ref().is_none_or(|d| d.pass)
        && homogeneity_residual <= homogeneity_tolerance
        && equivariance_residual <= homogeneity_tolerance;
    Ok(VerificationReport {
        seed,
        kind,
        budget: *budget,
        level_tolerance: LEVEL_TOLERANCE,
        strata: ctx.strata,
        neighborhoods: ctx.neighborhoods,
        connectivity: ctx.connectivity,
        density,
        homogeneity_residual,
        equivariance_residual,
        homogeneity_tolerance,
        complete,
        pass,
    })
}

fn visit(tree: &LinkTree, path: &mut Vec<usize>, ctx: &mut Ctx<'_>) -> Result<()> {
    let ws = tree.system();
    let kind = tree.partition.kind;
    if kind == QuotientKind::ContactSphere && !tree.partition.is_empty() {
        let s = ctx.next_seed();
        let batch = sample_volume(ws, kind, ctx.budget.connectivity_samples, s)?;
        let result = quotient_connectivity(ws, &batch, &ctx.budget.connectivity)?;
        ctx.connectivity.push(ConnectivityCheck {
            path: path.clone(),
            pass: result.components == 1,
            result,
        });
    }
    for node in &tree.nodes {
        if ctx.nodes_seen >= ctx.budget.max_nodes {
            ctx.complete = false;
            return Ok(());
        }
        ctx.nodes_seen += 1;
        let sigma = &tree.partition.strata[node.stratum];

        let center = generic_point(ws, node.base_support)?;
        let s = ctx.next_seed();
        let estimate = local_dimension(ws, kind, &center, ctx.budget, s);
        ctx.strata.push(StratumCheck {
            path: path.clone(),
            stratum: node.stratum,
            predicted: node.dimension,
            estimated: estimate.as_ref().ok().copied(),
            detail: estimate.as_ref().err().map(|e| e.to_string()),
            pass: estimate.as_ref().ok() == Some(&node.dimension),
        });

        let member_links_agree = sigma.supports.iter().take(8).all(|&m| {
            let full = m.union(tree.partition.free_coords);
            slice_representation(ws, full)
                .map(|sl| {
                    let link = (!sl.moving.is_empty()).then_some(sl.weight_system);
                    node.link.is_none() || link == node.link
                })
                .unwrap_or(false)
        });
        let s = ctx.next_seed();
        let observed = neighborhood_dimensions(ws, kind, node.base_support, &center, ctx.budget, s)?;
        ctx.neighborhoods.push(NeighborhoodCheck {
            path: path.clone(),
            stratum: node.stratum,
            pass: observed == node.predicted_dimensions && member_links_agree,
            predicted: node.predicted_dimensions.clone(),
            observed,
            member_links_agree,
        });

        if let Some(child) = &node.children {
            path.push(node.stratum);
            visit(child, path, ctx)?;
            path.pop();
        }
    }
    Ok(())
}

/// A point with support exactly `s`, `|z| = 1` and real coordinates.
fn generic_point(ws: &WeightSystem, s: Support) -> Result<Point> {
    if s.is_empty() {
        return Ok(Point::zero(ws.n()));
    }
    let x = interior_moduli(ws, s)?;
    Ok(point_from(ws.n(), s, &x, &vec![0.0; x.len()]))
}

fn min_modulus(p: &Point) -> f64 {
    p.coords
        .iter()
        .map(|c| c.norm())
        .filter(|&r| r > 0.0)
        .fold(f64::INFINITY, f64::min)
}

fn local_dimension(
    ws: &WeightSystem,
    kind: QuotientKind,
    center: &Point,
    budget: &VerificationBudget,
    seed: u64,
) -> Result<usize> {
    let rmin = min_modulus(center);
    let radius = if rmin.is_finite() {
        budget.relative_radius * rmin
    } else {
        budget.relative_radius
    };
    let batch: SampleBatch = sample_near(ws, kind, center, budget.samples_per_estimate, radius, seed)?;
    estimate_local_dimension(&batch, center, 2.0 * radius, budget.pca.into())
}

/// Dimensions of the pieces observed next to `center`: for each feasible
/// support `U ⊇ S`, move slightly toward the largest support with the same
/// isotropy as `U` and estimate the local dimension there.
fn neighborhood_dimensions(
    ws: &WeightSystem,
    kind: QuotientKind,
    s: Support,
    center: &Point,
    budget: &VerificationBudget,
    seed: u64,
) -> Result<Vec<usize>> {
    let rest = Support::full(ws.n()).difference(s);
    let mut rng = rng_for(seed, u64::MAX);
    let extensions: Vec<Support> = if rest.len() <= 10 {
        rest.subsets().collect()
    } else {
        (0..budget.neighbor_supports * 8)
            .map(|_| Support::from_indices(rest.iter().filter(|_| rng.random::<bool>())))
            .collect()
    };
    let mut saturated: Vec<Support> = Vec::new();
    for t in extensions {
        let u = s.union(t);
        if (kind == QuotientKind::ContactSphere && u.is_empty()) || !zero_feasible(ws, u) {
            continue;
        }
        let sat = saturate(ws, u);
        if !saturated.contains(&sat) {
            saturated.push(sat);
        }
        if saturated.len() >= budget.neighbor_supports {
            break;
        }
    }
    saturated.sort_unstable();

    let xc: Vec<f64> = center.coords.iter().map(|c| c.norm_sqr()).collect();
    let mut dims = Vec::new();
    for (i, &u) in saturated.iter().enumerate() {
        let target = generic_point(ws, u)?;
        let lambda = if u == s { 0.0 } else { 1e-2 };
        let x: Vec<f64> = u
            .iter()
            .map(|j| (1.0 - lambda) * xc[j] + lambda * target.coords[j].norm_sqr())
            .collect();
        let p = point_from(ws.n(), u, &x, &vec![0.0; x.len()]);
        let d = local_dimension(ws, kind, &p, budget, derive_seed(seed, i as u64))?;
        dims.push(d);
    }
    dims.sort_unstable();
    dims.dedup();
    Ok(dims)
}

/// The largest support containing `u` with the same isotropy.
fn saturate(ws: &WeightSystem, u: Support) -> Support {
    let h = isotropy_of_support(ws, u);
    let mut out = u;
    for j in Support::full(ws.n()).difference(u).iter() {
        let v = u.with(j);
        if zero_feasible(ws, v) && isotropy_of_support(ws, v) == h {
            out = out.with(j);
        }
    }
    out
}

/// Largest relative violations of `Φ(λz) = λ²Φ(z)` and `Φ(g·z) = Φ(z)`.
pub(crate) fn moment_residuals(ws: &WeightSystem, count: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = rng_for(seed, 0);
    let amax = ws
        .weight_rows()
        .iter()
        .flatten()
        .fold(1i64, |a, &b| a.max(b.abs())) as f64;
    let mut hom: f64 = 0.0;
    let mut equi: f64 = 0.0;
    for _ in 0..count {
        let coords = (0..ws.n())
            .map(|_| {
                num_complex::Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
            .collect();
        let z = Point::new(coords);
        let lambda: f64 = 10f64.powf(rng.random_range(-1.0..1.0));
        let scale = amax * z.norm_sqr();
        let phi = moment_map(ws, &z)?;
        let phi_l = moment_map(ws, &z.scaled(lambda))?;
        for (a, b) in phi_l.0.iter().zip(&phi.0) {
            hom = hom.max((a - lambda * lambda * b).abs() / (lambda * lambda * scale));
        }
        let g = GroupElement {
            torus: (0..ws.torus_rank()).map(|_| rng.random::<f64>()).collect(),
            finite: ws.moduli().iter().map(|&m| rng.random_range(0..m)).collect(),
        };
        let phi_g = moment_map(ws, &ws.act(&g, &z)?)?;
        for (a, b) in phi_g.0.iter().zip(&phi.0) {
            equi = equi.max((a - b).abs() / scale);
        }
    }
    Ok((hom, equi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_model::{default_max_depth, link_tree};

    fn small_budget() -> VerificationBudget {
        VerificationBudget {
            density_samples: 2000,
            connectivity_samples: 400,
            residual_points: 200,
            ..VerificationBudget::default()
        }
    }

    fn check(ws: &WeightSystem, kind: QuotientKind) -> VerificationReport {
        let tree = link_tree(ws, kind, default_max_depth(ws)).unwrap();
        let r = verify_ledgers(&tree, &small_budget(), 11).unwrap();
        assert!(r.pass, "{:#?}", r.failures());
        r
    }

    #[test]
    fn trivial_action_passes() {
        let r = check(&WeightSystem::circle(&[0, 0]), QuotientKind::Symplectic);
        assert_eq!(r.strata.len(), 1);
        assert_eq!(r.density.as_ref().unwrap().fraction, 1.0);
    }

    #[test]
    fn opposite_weights() {
        let r = check(&WeightSystem::circle(&[1, -1]), QuotientKind::Symplectic);
        let origin = &r.neighborhoods[0];
        assert_eq!(origin.observed, vec![0, 2]);
        assert_eq!(r.connectivity.len(), 1);
    }

    #[test]
    fn two_plus_one_minus() {
        let r = check(&WeightSystem::circle(&[1, 1, -1]), QuotientKind::Symplectic);
        assert_eq!(r.neighborhoods[0].observed, vec![0, 4]);
    }

    #[test]
    fn reports_are_reproducible() {
        let ws = WeightSystem::circle(&[2, -2, 1]);
        let tree = link_tree(&ws, QuotientKind::Symplectic, 3).unwrap();
        let a = verify_ledgers(&tree, &small_budget(), 5).unwrap();
        let b = verify_ledgers(&tree, &small_budget(), 5).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.pass, "{:#?}", a.failures());
    }
}
