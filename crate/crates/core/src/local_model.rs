//! Local models `ℝ^{2m} × cone(L)` of the quotient at each stratum, and the
//! recursive tree of links.
//!
//! At a point of support `S` with isotropy `H = H_S`, the symplectic normal
//! representation splits into coordinates on which `H` acts trivially and the
//! rest. The quotient germ is `U × cone(S(W)//H)` where `U` is the fixed part
//! modulo the orbit directions and `W` collects the moving coordinates. The
//! link `S(W)//H` is again a contact quotient of a linear abelian action, so
//! the construction recurses on `H` acting on `W`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlin::{
    restrict_character, smith_normal_form, to_i64, GroupDescriptor, IntMatrix,
};
use crate::strat::{
    assemble_partition, cone_descriptor, isotropy_of_support, orbit_dimension,
    product_descriptor, zero_feasible, Partition, QuotientKind, StratificationDescriptor,
};
use crate::support::Support;
use crate::torus_rep::{moment_map, MomentValue, Point, WeightSystem};

/// The isotropy representation at a point of support `base_support`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRep {
    pub base_support: Support,
    pub isotropy: GroupDescriptor,
    /// Ambient coordinates on which the isotropy acts trivially.
    pub fixed: Support,
    /// Ambient coordinates on which it acts nontrivially.
    pub moving: Support,
    /// `rank A_S`, the dimension of the orbit through the base point.
    pub orbit_dimension: usize,
    /// `H ≅ T^h × Π ℤ/d_i` acting on the moving coordinates, in the
    /// generators of the isotropy descriptor.
    pub weight_system: WeightSystem,
    /// `coords[i]` is the ambient coordinate of coordinate `i` of `weight_system`.
    pub coords: Vec<usize>,
}

impl SliceRep {
    /// Real dimension of the symplectic slice directions fixed by `H`
    /// (the `U` factor of the symplectic local model).
    pub fn fixed_dimension(&self) -> usize {
        2 * (self.fixed.len() - self.orbit_dimension)
    }
}

pub fn slice_representation(ws: &WeightSystem, s: Support) -> Result<SliceRep> {
    ws.check_support(s)?;
    if !zero_feasible(ws, s) {
        return Err(Error::InfeasibleSupport(s));
    }
    let h = isotropy_of_support(ws, s);
    let mut fixed = Support::EMPTY;
    let mut coords = Vec::new();
    let mut chars = Vec::new();
    for j in 0..ws.n() {
        let chi = restrict_character(&ws.weight(j), &ws.finite_char(j), &h)?;
        if chi.is_trivial() {
            fixed = fixed.with(j);
        } else {
            coords.push(j);
            chars.push(chi);
        }
    }
    let moving = Support::from_indices(coords.iter().copied());
    let m = coords.len();
    let weights = (0..h.torus_rank)
        .map(|c| chars.iter().map(|x| to_i64(&x.torus[c])).collect())
        .collect::<Result<Vec<Vec<i64>>>>()?;
    let moduli = h
        .invariant_factors
        .iter()
        .map(to_i64)
        .collect::<Result<Vec<i64>>>()?;
    let finite_chars = (0..moduli.len())
        .map(|i| chars.iter().map(|x| to_i64(&x.finite[i])).collect())
        .collect::<Result<Vec<Vec<i64>>>>()?;
    let weight_system = WeightSystem::new(h.torus_rank, moduli, weights, finite_chars, m)?;
    Ok(SliceRep {
        base_support: s,
        orbit_dimension: orbit_dimension(ws, s),
        isotropy: h,
        fixed,
        moving,
        weight_system,
        coords,
    })
}

/// `(dim U, link)` for `V//H(0) = U × cone(S(W)//H)`; the link weight system
/// is absent when `H` moves no coordinate.
pub fn vs_decomposition(slice: &SliceRep) -> (usize, Option<WeightSystem>) {
    let link = (!slice.moving.is_empty()).then(|| slice.weight_system.clone());
    (slice.fixed_dimension(), link)
}

/// Default recursion depth: the ambient dimension, which always suffices.
pub fn default_max_depth(ws: &WeightSystem) -> usize {
    ws.n().max(1)
}

/// A quotient together with the local model at each of its strata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkTree {
    /// Distance from the root; links of depth-`d` strata live at depth `d + 1`.
    pub depth: usize,
    pub partition: Partition,
    /// `coords[i]` is the coordinate of the parent system that coordinate `i`
    /// of this system came from (the identity at the root).
    pub coords: Vec<usize>,
    pub nodes: Vec<LinkNode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkNode {
    pub stratum: usize,
    pub dimension: usize,
    pub base_support: Support,
    /// Dimension of the disk factor of the local model.
    pub fixed_dim: usize,
    /// Action of the isotropy on the unit sphere of the moving coordinates;
    /// absent exactly when the stratum is open.
    pub link: Option<WeightSystem>,
    pub link_dimension: Option<usize>,
    /// Stratum dimensions of `disk × cone(link)`.
    pub predicted_dimensions: Vec<usize>,
    /// Dimensions of `σ` and the strata whose closure contains it.
    pub neighborhood_dimensions: Vec<usize>,
    /// Ambient stratum of each link stratum.
    pub link_strata_map: Vec<usize>,
    pub truncated: bool,
    pub children: Option<Box<LinkTree>>,
}

impl LinkTree {
    pub fn system(&self) -> &WeightSystem {
        &self.partition.ambient
    }

    /// Largest depth reached by any subtree.
    pub fn height(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| n.children.as_ref())
            .map(|c| c.height())
            .max()
            .unwrap_or(self.depth)
    }

    pub fn is_truncated(&self) -> bool {
        self.nodes
            .iter()
            .any(|n| n.truncated || n.children.as_ref().is_some_and(|c| c.is_truncated()))
    }

    /// Visits every tree (this one first), depth first.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a LinkTree)) {
        f(self);
        for n in &self.nodes {
            if let Some(c) = &n.children {
                c.walk(f);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        let mut count = 0;
        self.walk(&mut |t| count += t.nodes.len());
        count
    }

    /// Re-checks the stored ledgers of every node against the stored
    /// partitions, without recomputing anything from the weight systems.
    /// Intended for trees read back from disk.
    pub fn check_integrity(&self) -> Result<()> {
        let mut result = Ok(());
        self.walk(&mut |t| {
            if result.is_ok() {
                result = t.check_level();
            }
        });
        result
    }

    fn check_level(&self) -> Result<()> {
        let p = &self.partition;
        p.check_integrity()?;
        if self.nodes.len() != p.strata.len() {
            return Err(Error::integrity(
                "link-tree",
                format!("depth {}: {} nodes for {} strata", self.depth, self.nodes.len(), p.strata.len()),
            ));
        }
        for (sigma, node) in self.nodes.iter().enumerate() {
            let fail = |ledger: &'static str, detail: String| {
                Err(Error::integrity(ledger, format!("depth {}, S{sigma}: {detail}", self.depth)))
            };
            let stratum = &p.strata[sigma];
            if node.stratum != sigma || node.dimension != stratum.dimension {
                return fail("link-tree", "node does not match its stratum".into());
            }
            if node.fixed_dim != node.dimension {
                return fail(
                    "dimension",
                    format!("disk dimension {} but stratum dimension {}", node.fixed_dim, node.dimension),
                );
            }
            if node.link.is_none() != stratum.is_open {
                return fail("open-link", "link presence disagrees with openness".into());
            }
            let above = p.above(sigma);
            let mut neighborhood: Vec<usize> = std::iter::once(stratum.dimension)
                .chain(above.iter().map(|&t| p.strata[t].dimension))
                .collect();
            neighborhood.sort_unstable();
            neighborhood.dedup();
            if node.neighborhood_dimensions != neighborhood || node.predicted_dimensions != neighborhood {
                return fail(
                    "local-model",
                    format!(
                        "model dimensions {:?}, stored neighborhood {:?}, partition neighborhood {neighborhood:?}",
                        node.predicted_dimensions, node.neighborhood_dimensions
                    ),
                );
            }
            if let Some(link_dim) = node.link_dimension {
                let top = neighborhood.last().copied().unwrap_or(0);
                if link_dim % 2 == 0 || node.fixed_dim + link_dim + 1 != top {
                    return fail(
                        "dimension",
                        format!("{} + {link_dim} + 1 differs from neighborhood dimension {top}", node.fixed_dim),
                    );
                }
            }
            if node.link_strata_map.iter().any(|tau| !above.contains(tau)) {
                return fail("link-map", format!("{:?} leaves the strata above", node.link_strata_map));
            }
            if let (Some(child), Some(link)) = (&node.children, &node.link) {
                if child.system() != link || child.depth != self.depth + 1 {
                    return fail("link-tree", "child tree does not match the link".into());
                }
            }
        }
        Ok(())
    }
}

/// Builds the partition of `ws` and recursively the local model at each stratum.
pub fn link_tree(ws: &WeightSystem, kind: QuotientKind, max_depth: usize) -> Result<LinkTree> {
    if max_depth == 0 {
        return Err(Error::InvalidWeightSystem("max_depth must be at least 1".into()));
    }
    build_tree(ws, kind, (0..ws.n()).collect(), 0, max_depth)
}

fn build_tree(
    ws: &WeightSystem,
    kind: QuotientKind,
    coords: Vec<usize>,
    depth: usize,
    max_depth: usize,
) -> Result<LinkTree> {
    let partition = assemble_partition(ws, kind)?;
    let nodes = (0..partition.strata.len())
        .into_par_iter()
        .map(|sigma| build_node(&partition, sigma, depth, max_depth))
        .collect::<Result<Vec<_>>>()?;
    Ok(LinkTree {
        depth,
        partition,
        coords,
        nodes,
    })
}

fn build_node(p: &Partition, sigma: usize, depth: usize, max_depth: usize) -> Result<LinkNode> {
    let ws = &p.ambient;
    let stratum = &p.strata[sigma];
    let base = stratum.representative().union(p.free_coords);
    let slice = slice_representation(ws, base)?;
    let fixed_dim = match p.kind {
        QuotientKind::Symplectic => slice.fixed_dimension(),
        QuotientKind::ContactSphere => slice.fixed_dimension() - 1,
    };
    let above = p.above(sigma);
    let mut neighborhood: Vec<usize> = std::iter::once(stratum.dimension)
        .chain(above.iter().map(|&t| p.strata[t].dimension))
        .collect();
    neighborhood.sort_unstable();
    neighborhood.dedup();

    let check = |ok: bool, ledger: &'static str, detail: String| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::integrity(ledger, format!("depth {depth}, S{sigma}: {detail}")))
        }
    };
    check(
        fixed_dim == stratum.dimension,
        "dimension",
        format!("disk dimension {fixed_dim} but stratum dimension {}", stratum.dimension),
    )?;

    let (_, link_ws) = vs_decomposition(&slice);
    let link_partition = match &link_ws {
        Some(l) => Some(assemble_partition(l, QuotientKind::ContactSphere)?),
        None => None,
    };
    let link_partition = link_partition.filter(|lp| !lp.is_empty());
    check(
        link_partition.is_none() == stratum.is_open,
        "open-link",
        format!(
            "link is {} but stratum is {}",
            if link_partition.is_none() { "empty" } else { "nonempty" },
            if stratum.is_open { "open" } else { "not open" }
        ),
    )?;

    let disk = StratificationDescriptor::single("disk", fixed_dim);
    let Some(lp) = link_partition else {
        return Ok(LinkNode {
            stratum: sigma,
            dimension: stratum.dimension,
            base_support: base,
            fixed_dim,
            link: None,
            link_dimension: None,
            predicted_dimensions: product_descriptor(&disk, &StratificationDescriptor::point())
                .dimension_set(),
            neighborhood_dimensions: neighborhood,
            link_strata_map: Vec::new(),
            truncated: false,
            children: None,
        });
    };

    let link_dim = lp.dimension().expect("nonempty partition");
    check(link_dim % 2 == 1, "parity", format!("link has even dimension {link_dim}"))?;
    let cone = cone_descriptor(&lp.descriptor());
    check(
        cone.dimension() == Some(link_dim + 1),
        "cone",
        format!("cone dimension {:?} for link dimension {link_dim}", cone.dimension()),
    )?;
    let predicted = product_descriptor(&disk, &cone).dimension_set();
    check(
        predicted == neighborhood,
        "local-model",
        format!("model dimensions {predicted:?} but neighborhood dimensions {neighborhood:?}"),
    )?;
    let top = above.iter().map(|&t| p.strata[t].dimension).max().unwrap_or(0);
    check(
        fixed_dim + link_dim + 1 == top,
        "dimension",
        format!("{fixed_dim} + {link_dim} + 1 differs from neighborhood dimension {top}"),
    )?;

    // Each link stratum is a slice of the ambient stratum through `base ∪ T`.
    let mut map = Vec::with_capacity(lp.strata.len());
    for ls in &lp.strata {
        let t = ls.representative().union(lp.free_coords).remap(&slice.coords);
        let tau = p.stratum_of(base.union(t)).ok_or_else(|| {
            Error::integrity("link-map", format!("support {} is not feasible", base.union(t)))
        })?;
        check(
            above.contains(&tau),
            "link-map",
            format!("link stratum maps to S{tau}, which is not above S{sigma}"),
        )?;
        check(
            p.strata[tau].dimension == fixed_dim + ls.dimension + 1,
            "link-map",
            format!(
                "S{tau} has dimension {} but the cone over its link piece has {}",
                p.strata[tau].dimension,
                fixed_dim + ls.dimension + 1
            ),
        )?;
        map.push(tau);
    }
    let mut image = map.clone();
    image.sort_unstable();
    image.dedup();
    let mut above_sorted = above.clone();
    above_sorted.sort_unstable();
    check(
        image.len() == map.len() && image == above_sorted,
        "link-map",
        format!("link strata map to {map:?}, expected a bijection onto {above_sorted:?}"),
    )?;

    let (children, truncated) = if depth + 1 > max_depth {
        (None, true)
    } else {
        let child = build_tree(
            &lp.ambient,
            QuotientKind::ContactSphere,
            slice.coords.clone(),
            depth + 1,
            max_depth,
        )?;
        (Some(Box::new(child)), false)
    };

    Ok(LinkNode {
        stratum: sigma,
        dimension: stratum.dimension,
        base_support: base,
        fixed_dim,
        link: link_ws,
        link_dimension: Some(link_dim),
        predicted_dimensions: predicted,
        neighborhood_dimensions: neighborhood,
        link_strata_map: map,
        truncated,
        children,
    })
}

/// A splitting `𝔤* = 𝔥° ⊕ i(𝔥*)` derived from the Smith form of the identity
/// component basis `E` (`k × h`).
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSplitting {
    /// `E`, the integer basis of `𝔥 ⊂ ℝ^k`.
    pub basis: IntMatrix,
    /// `k × h` lift `i` with `Eᵀ i = I`.
    pub lift: Vec<Vec<BigRational>>,
    /// `k × (k − h)` basis of the annihilator `𝔥°`.
    pub annihilator: IntMatrix,
}

impl MomentSplitting {
    pub fn new(h: &GroupDescriptor) -> Self {
        let e = h.identity_component_basis();
        let k = e.rows();
        let r = e.cols();
        // U Eᵀ V = D = [diag(d) | 0];  then Eᵀ (V D⁺ U) = I.
        let snf = smith_normal_form(&e.transpose());
        let diag = snf.diagonal();
        debug_assert_eq!(snf.rank(), r);
        let mut lift = vec![vec![BigRational::zero(); r]; k];
        for (row, out) in lift.iter_mut().enumerate() {
            for (c, o) in out.iter_mut().enumerate() {
                let mut acc = BigRational::zero();
                for (t, d) in diag.iter().enumerate().take(r) {
                    acc += BigRational::new(&snf.v[(row, t)] * &snf.u[(t, c)], d.clone());
                }
                *o = acc;
            }
        }
        let ann_cols: Vec<Vec<BigInt>> = (r..k).map(|c| snf.v.column(c)).collect();
        let annihilator = IntMatrix::from_columns(k, &ann_cols);
        MomentSplitting {
            basis: e,
            lift,
            annihilator,
        }
    }

    pub fn torus_rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn isotropy_rank(&self) -> usize {
        self.basis.cols()
    }

    /// `Eᵀ η`, which vanishes iff `η ∈ 𝔥°`.
    pub fn restrict_exact(&self, eta: &[BigRational]) -> Vec<BigRational> {
        (0..self.isotropy_rank())
            .map(|c| {
                (0..self.torus_rank())
                    .map(|i| BigRational::from_integer(self.basis[(i, c)].clone()) * &eta[i])
                    .sum()
            })
            .collect()
    }

    pub fn lift_exact(&self, xi: &[BigRational]) -> Vec<BigRational> {
        self.lift
            .iter()
            .map(|row| row.iter().zip(xi).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `F(η, w) = η + i(Φ_W(w))`, the moment map of the local model on the
/// slice `{[e, η, w]}`.
///
/// `eta` must lie in `𝔥°` up to a relative tolerance of `1e-9`.
pub fn model_moment(slice: &SliceRep, eta: &[f64], w: &Point) -> Result<MomentValue> {
    let split = MomentSplitting::new(&slice.isotropy);
    let k = split.torus_rank();
    if eta.len() != k {
        return Err(Error::DimensionMismatch {
            context: "model covector",
            expected: k,
            found: eta.len(),
        });
    }
    let scale = 1.0 + eta.iter().map(|x| x.abs()).fold(0.0, f64::max);
    for c in 0..split.isotropy_rank() {
        let r: f64 = (0..k)
            .map(|i| split.basis[(i, c)].to_f64().unwrap_or(f64::NAN) * eta[i])
            .sum();
        if r.abs() > 1e-9 * scale {
            return Err(Error::NotInAnnihilator);
        }
    }
    let phi = moment_map(&slice.weight_system, w)?;
    let out = (0..k)
        .map(|i| {
            eta[i]
                + split.lift[i]
                    .iter()
                    .zip(&phi.0)
                    .map(|(l, p)| rational_to_f64(l) * p)
                    .sum::<f64>()
        })
        .collect();
    Ok(MomentValue(out))
}

/// Exact `F(η, w)` where `w` is given by its squared moduli `x_j = |w_j|²`.
pub fn model_moment_exact(
    slice: &SliceRep,
    eta: &[BigRational],
    x: &[BigRational],
) -> Result<Vec<BigRational>> {
    MomentSplitting::new(&slice.isotropy).evaluate_exact(&slice.weight_system, eta, x)
}

impl MomentSplitting {
    /// `η + i(Φ_W(w))` for the weights of `w_system`, exactly.
    pub fn evaluate_exact(
        &self,
        w_system: &WeightSystem,
        eta: &[BigRational],
        x: &[BigRational],
    ) -> Result<Vec<BigRational>> {
        if eta.len() != self.torus_rank() {
            return Err(Error::DimensionMismatch {
                context: "model covector",
                expected: self.torus_rank(),
                found: eta.len(),
            });
        }
        if w_system.torus_rank() != self.isotropy_rank() {
            return Err(Error::IncompatibleGroup);
        }
        if x.len() != w_system.n() {
            return Err(Error::DimensionMismatch {
                context: "slice coordinates",
                expected: w_system.n(),
                found: x.len(),
            });
        }
        if x.iter().any(Signed::is_negative) {
            return Err(Error::InvalidWeightSystem("squared moduli must be nonnegative".into()));
        }
        if self.restrict_exact(eta).iter().any(|v| !v.is_zero()) {
            return Err(Error::NotInAnnihilator);
        }
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let phi: Vec<BigRational> = w_system
            .weight_rows()
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .map(|(&a, xj)| BigRational::from_integer(BigInt::from(a)) * xj)
                    .sum::<BigRational>()
                    * &half
            })
            .collect();
        let lifted = self.lift_exact(&phi);
        Ok(eta.iter().zip(lifted).map(|(e, l)| e + l).collect())
    }
}
