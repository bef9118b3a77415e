//! Orbit-type stratification of `V//G(0)` and of the contact quotient `S//G`.
//!
//! For a diagonal action the isotropy group of a point depends only on its
//! support `S`, and the zero level meets the support-`S` piece iff the cone
//! `{A_S x = 0, x > 0}` is nonempty (`x_j = |z_j|²`). Each such piece is
//! connected. The closure of the support-`T` piece contains the support-`S`
//! piece exactly when `S ⊆ T`, so the canonical partition is computed from the
//! poset of feasible supports:
//!
//! * strata are the connected components, under inclusion, of feasible
//!   supports with equal isotropy;
//! * `σ ≺ τ` (σ lies in the closure of τ) iff some member of σ is contained in
//!   some member of τ;
//! * a stratum is open iff it lies in no other stratum's closure.
//!
//! Coordinates fixed by the whole group are split off first (`V = U × W`).
//! Stratum members are stored as supports in the remaining coordinates; the
//! full member set of a stratum is `{S ∪ F : S a member, F ⊆ free_coords}`
//! (with `S ∪ F ≠ ∅` for the contact kind).

use std::collections::HashMap;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlin::{subgroup_structure, GroupDescriptor};
use crate::lp;
use crate::support::Support;
use crate::torus_rep::WeightSystem;
use crate::union_find::UnionFind;

/// Default limit on coordinates for exact support enumeration.
pub const DEFAULT_N_MAX: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuotientKind {
    /// `V//G(0) = Φ⁻¹(0)/G`.
    #[serde(rename = "symplectic-at-zero", alias = "symplectic")]
    Symplectic,
    /// `S//G = (S ∩ Φ⁻¹(0))/G` for the unit sphere `S ⊂ V`.
    #[serde(rename = "contact-sphere", alias = "contact")]
    ContactSphere,
}

impl QuotientKind {
    pub fn name(self) -> &'static str {
        match self {
            QuotientKind::Symplectic => "symplectic-at-zero",
            QuotientKind::ContactSphere => "contact-sphere",
        }
    }
}

/// Whether some point with support exactly `s` lies on `Φ⁻¹(0)`.
pub fn zero_feasible(ws: &WeightSystem, s: Support) -> bool {
    feasible_witness(ws, s).is_some()
}

/// Squared moduli `x_j ≥ 1` (in the order of `s.indices()`) with `A_S x = 0`.
pub fn feasible_witness(ws: &WeightSystem, s: Support) -> Option<Vec<BigRational>> {
    assert!(s.bound() <= ws.n(), "support {s} out of range");
    lp::positive_kernel_point(&ws.torus_matrix(s))
}

/// Isotropy group of any point whose support is exactly `s`.
pub fn isotropy_of_support(ws: &WeightSystem, s: Support) -> GroupDescriptor {
    assert!(s.bound() <= ws.n(), "support {s} out of range");
    subgroup_structure(&ws.torus_matrix(s), &ws.finite_matrix(s), ws.moduli())
        .expect("weight systems are validated on construction")
}

/// Dimension of the orbit through a point of support `s`, i.e. `rank A_S`.
pub fn orbit_dimension(ws: &WeightSystem, s: Support) -> usize {
    ws.torus_matrix(s).rank()
}

/// Dimension of the quotient piece of support `s`:
/// `2(|S| − rank A_S)`, minus one on the sphere.
pub fn stratum_dimension(ws: &WeightSystem, s: Support, kind: QuotientKind) -> Result<usize> {
    ws.check_support(s)?;
    if !zero_feasible(ws, s) || (kind == QuotientKind::ContactSphere && s.is_empty()) {
        return Err(Error::InfeasibleSupport(s));
    }
    Ok(piece_dimension(s.len(), orbit_dimension(ws, s), kind))
}

fn piece_dimension(support_len: usize, orbit_dim: usize, kind: QuotientKind) -> usize {
    let sym = 2 * (support_len - orbit_dim);
    match kind {
        QuotientKind::Symplectic => sym,
        QuotientKind::ContactSphere => sym - 1,
    }
}

/// One connected orbit-type piece of the quotient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub id: usize,
    pub isotropy: GroupDescriptor,
    /// Member supports in the non-free coordinates, sorted.
    pub supports: Vec<Support>,
    pub dimension: usize,
    pub is_open: bool,
    pub is_principal: bool,
}

impl Stratum {
    /// Members not contained in another member.
    pub fn maximal_supports(&self) -> Vec<Support> {
        self.supports
            .iter()
            .copied()
            .filter(|s| !self.supports.iter().any(|t| s.is_proper_subset(*t)))
            .collect()
    }

    /// The largest member (by size, then bitmask).
    pub fn representative(&self) -> Support {
        *self
            .supports
            .iter()
            .max_by_key(|s| (s.len(), s.bits()))
            .expect("strata are nonempty")
    }

    pub fn label(&self) -> String {
        format!("S{}", self.id)
    }
}

/// The canonical partition of a quotient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub kind: QuotientKind,
    pub ambient: WeightSystem,
    /// Coordinates fixed by the whole group, split off before enumeration.
    pub free_coords: Support,
    pub strata: Vec<Stratum>,
    /// Pairs `(σ, τ)` with `σ ≺ τ`; transitively closed.
    pub frontier: Vec<(usize, usize)>,
    /// Connected components of the quotient, as sorted lists of strata.
    pub components: Vec<Vec<usize>>,
}

impl Partition {
    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    /// Total dimension (maximum stratum dimension), `None` for the empty quotient.
    pub fn dimension(&self) -> Option<usize> {
        self.strata.iter().map(|s| s.dimension).max()
    }

    /// Stratum containing the full-coordinate support `t`, if `t` is feasible.
    pub fn stratum_of(&self, t: Support) -> Option<usize> {
        if self.kind == QuotientKind::ContactSphere && t.is_empty() {
            return None;
        }
        let reduced = t.difference(self.free_coords);
        self.strata
            .iter()
            .position(|s| s.supports.binary_search(&reduced).is_ok())
    }

    pub fn precedes(&self, lower: usize, upper: usize) -> bool {
        self.frontier.contains(&(lower, upper))
    }

    /// Strata whose closure contains `sigma`.
    pub fn above(&self, sigma: usize) -> Vec<usize> {
        self.frontier
            .iter()
            .filter(|&&(l, _)| l == sigma)
            .map(|&(_, u)| u)
            .collect()
    }

    pub fn component_of(&self, sigma: usize) -> usize {
        self.components
            .iter()
            .position(|c| c.contains(&sigma))
            .expect("every stratum belongs to a component")
    }

    pub fn descriptor(&self) -> StratificationDescriptor {
        StratificationDescriptor {
            pieces: self
                .strata
                .iter()
                .map(|s| Piece {
                    label: s.label(),
                    dimension: s.dimension,
                })
                .collect(),
        }
    }

    /// Structural checks that need no recomputation: parity, frontier order,
    /// disjointness, and one principal stratum per component.
    pub fn check_integrity(&self) -> Result<()> {
        let n = self.strata.len();
        for (i, s) in self.strata.iter().enumerate() {
            if s.id != i {
                return Err(Error::integrity("stratum-ids", format!("stratum {i} has id {}", s.id)));
            }
            if s.supports.is_empty() || s.supports.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::integrity(
                    "partition",
                    format!("stratum {i} has empty or unsorted members"),
                ));
            }
            let even = s.dimension % 2 == 0;
            let want_even = self.kind == QuotientKind::Symplectic;
            if even != want_even {
                return Err(Error::integrity(
                    "parity",
                    format!(
                        "{} stratum {i} has dimension {}",
                        self.kind.name(),
                        s.dimension
                    ),
                ));
            }
            if s.is_principal && !s.is_open {
                return Err(Error::integrity("open-dense", format!("principal stratum {i} is not open")));
            }
        }
        let mut seen = HashMap::new();
        for s in &self.strata {
            for t in &s.supports {
                if let Some(prev) = seen.insert(*t, s.id) {
                    return Err(Error::integrity(
                        "partition",
                        format!("support {t} lies in strata {prev} and {}", s.id),
                    ));
                }
            }
        }
        for &(a, b) in &self.frontier {
            if a >= n || b >= n || a == b || self.precedes(b, a) {
                return Err(Error::integrity("frontier", format!("bad frontier pair ({a}, {b})")));
            }
            if self.strata[a].dimension >= self.strata[b].dimension {
                return Err(Error::integrity(
                    "frontier",
                    format!("S{a} ≺ S{b} but dimensions are {} and {}", self.strata[a].dimension, self.strata[b].dimension),
                ));
            }
            for &(c, d) in &self.frontier {
                if c == b && !self.precedes(a, d) {
                    return Err(Error::integrity("frontier", format!("S{a} ≺ S{b} ≺ S{d} not closed")));
                }
            }
            if self.strata[a].is_open {
                return Err(Error::integrity("open-dense", format!("open stratum S{a} lies in a closure")));
            }
        }
        for s in &self.strata {
            if !s.is_open && self.above(s.id).is_empty() {
                return Err(Error::integrity("open-dense", format!("S{} is maximal but not open", s.id)));
            }
        }
        if self.is_empty() {
            return if self.components.is_empty() && self.frontier.is_empty() {
                Ok(())
            } else {
                Err(Error::integrity("partition", "empty quotient with components or frontier"))
            };
        }
        open_dense_stratum(self).map(|_| ())
    }
}

/// Enumerates feasible supports and assembles the canonical partition.
pub fn assemble_partition(ws: &WeightSystem, kind: QuotientKind) -> Result<Partition> {
    assemble_partition_with_limit(ws, kind, DEFAULT_N_MAX)
}

pub fn assemble_partition_with_limit(
    ws: &WeightSystem,
    kind: QuotientKind,
    n_max: usize,
) -> Result<Partition> {
    let free = ws.everywhere_fixed();
    let moving = Support::full(ws.n()).difference(free);
    if moving.len() > n_max {
        return Err(Error::TooManyCoordinates {
            n: moving.len(),
            n_max,
        });
    }
    let allow_empty = kind == QuotientKind::Symplectic || !free.is_empty();

    let candidates: Vec<Support> = moving
        .subsets()
        .filter(|s| allow_empty || !s.is_empty())
        .collect();
    let feasible: Vec<(Support, GroupDescriptor)> = candidates
        .par_iter()
        .filter(|s| zero_feasible(ws, **s))
        .map(|&s| (s, isotropy_of_support(ws, s)))
        .collect();

    let index: HashMap<Support, usize> =
        feasible.iter().enumerate().map(|(i, (s, _))| (*s, i)).collect();
    let mut group_of: HashMap<&GroupDescriptor, usize> = HashMap::new();
    let groups: Vec<usize> = feasible
        .iter()
        .map(|(_, g)| {
            let next = group_of.len();
            *group_of.entry(g).or_insert(next)
        })
        .collect();

    // Equal isotropy along S ⊂ T forces equal orbit rank, so every coordinate
    // of T∖S lies in the span of A_S and each intermediate support is feasible
    // with the same isotropy: single-coordinate steps suffice.
    let mut uf = UnionFind::new(feasible.len());
    for (i, (s, _)) in feasible.iter().enumerate() {
        for j in moving.difference(*s).iter() {
            if let Some(&t) = index.get(&s.with(j)) {
                if groups[t] == groups[i] {
                    uf.union(i, t);
                }
            }
        }
    }

    let free_len = free.len();
    let mut strata: Vec<Stratum> = uf
        .groups()
        .into_iter()
        .map(|members| {
            let mut supports: Vec<Support> = members.iter().map(|&i| feasible[i].0).collect();
            supports.sort_unstable();
            let dimension = supports
                .iter()
                .map(|&s| piece_dimension(s.len() + free_len, orbit_dimension(ws, s), kind))
                .max()
                .expect("components are nonempty");
            Stratum {
                id: 0,
                isotropy: feasible[members[0]].1.clone(),
                supports,
                dimension,
                is_open: false,
                is_principal: false,
            }
        })
        .collect();
    strata.sort_by_key(|s| (s.dimension, s.supports[0]));
    for (i, s) in strata.iter_mut().enumerate() {
        s.id = i;
    }

    let frontier = frontier_relation(&strata)?;
    for s in strata.iter_mut() {
        s.is_open = !frontier.iter().any(|&(l, _)| l == s.id);
    }
    let components = components(strata.len(), &frontier);

    let mut partition = Partition {
        kind,
        ambient: ws.clone(),
        free_coords: free,
        strata,
        frontier,
        components,
    };
    if let Ok(principal) = open_dense_stratum(&partition) {
        for p in principal {
            partition.strata[p].is_principal = true;
        }
    }
    Ok(partition)
}

fn frontier_relation(strata: &[Stratum]) -> Result<Vec<(usize, usize)>> {
    let maximal: Vec<Vec<Support>> = strata.iter().map(Stratum::maximal_supports).collect();
    let n = strata.len();
    let mut rel = vec![vec![false; n]; n];
    for (a, sa) in strata.iter().enumerate() {
        for (b, mb) in maximal.iter().enumerate() {
            if a != b {
                rel[a][b] = sa
                    .supports
                    .iter()
                    .any(|s| mb.iter().any(|t| s.is_proper_subset(*t)));
            }
        }
    }
    // Warshall closure; the direct relation should already be closed.
    for k in 0..n {
        for i in 0..n {
            if rel[i][k] {
                for j in 0..n {
                    if rel[k][j] {
                        rel[i][j] = true;
                    }
                }
            }
        }
    }
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if !rel[a][b] {
                continue;
            }
            if rel[b][a] || a == b {
                return Err(Error::integrity(
                    "frontier",
                    format!("frontier relation between S{a} and S{b} is not antisymmetric"),
                ));
            }
            if strata[a].dimension >= strata[b].dimension {
                return Err(Error::integrity(
                    "frontier",
                    format!(
                        "S{a} ≺ S{b} with dimensions {} ≥ {}",
                        strata[a].dimension, strata[b].dimension
                    ),
                ));
            }
            if !strata[b].isotropy.is_subgroup_of(&strata[a].isotropy)? {
                return Err(Error::integrity(
                    "frontier",
                    format!("S{a} ≺ S{b} but isotropy of S{b} is not contained in that of S{a}"),
                ));
            }
            pairs.push((a, b));
        }
    }
    Ok(pairs)
}

fn components(n: usize, frontier: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(n);
    for &(a, b) in frontier {
        uf.union(a, b);
    }
    uf.groups()
}

/// The unique open dense stratum of each connected component.
pub fn open_dense_stratum(p: &Partition) -> Result<Vec<usize>> {
    if p.strata.is_empty() {
        return Err(Error::integrity("open-dense", "empty partition has no open stratum"));
    }
    let mut out = Vec::with_capacity(p.components.len());
    for comp in &p.components {
        let open: Vec<usize> = comp.iter().copied().filter(|&s| p.strata[s].is_open).collect();
        match open.as_slice() {
            [r] => {
                if let Some(&bad) = comp.iter().find(|&&s| s != *r && !p.precedes(s, *r)) {
                    return Err(Error::integrity(
                        "open-dense",
                        format!("S{bad} is not in the closure of the open stratum S{r}"),
                    ));
                }
                out.push(*r);
            }
            [] => {
                return Err(Error::integrity(
                    "open-dense",
                    format!("component {comp:?} has no open stratum"),
                ))
            }
            many => {
                return Err(Error::integrity(
                    "open-dense",
                    format!("component {comp:?} has several open strata {many:?}"),
                ))
            }
        }
    }
    Ok(out)
}

/// A labelled list of piece dimensions of a partitioned space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratificationDescriptor {
    pub pieces: Vec<Piece>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub label: String,
    pub dimension: usize,
}

impl StratificationDescriptor {
    pub fn empty() -> Self {
        StratificationDescriptor { pieces: Vec::new() }
    }

    pub fn point() -> Self {
        Self::single("pt", 0)
    }

    pub fn single(label: &str, dimension: usize) -> Self {
        StratificationDescriptor {
            pieces: vec![Piece {
                label: label.to_string(),
                dimension,
            }],
        }
    }

    /// `sup` of the piece dimensions; `None` for the empty space.
    pub fn dimension(&self) -> Option<usize> {
        self.pieces.iter().map(|p| p.dimension).max()
    }

    /// Sorted, deduplicated piece dimensions.
    pub fn dimension_set(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.pieces.iter().map(|p| p.dimension).collect();
        d.sort_unstable();
        d.dedup();
        d
    }
}

/// `cone(X) = {*} ⊔ ⋃ S_i × (0, 1)`; `dim cone(X) = dim X + 1`.
pub fn cone_descriptor(d: &StratificationDescriptor) -> StratificationDescriptor {
    let mut pieces = vec![Piece {
        label: "vertex".to_string(),
        dimension: 0,
    }];
    pieces.extend(d.pieces.iter().map(|p| Piece {
        label: format!("cone({})", p.label),
        dimension: p.dimension + 1,
    }));
    StratificationDescriptor { pieces }
}

/// Pieces `S_i × P_j` of a product.
pub fn product_descriptor(
    a: &StratificationDescriptor,
    b: &StratificationDescriptor,
) -> StratificationDescriptor {
    let pieces = a
        .pieces
        .iter()
        .flat_map(|p| {
            b.pieces.iter().map(move |q| Piece {
                label: format!("{}×{}", p.label, q.label),
                dimension: p.dimension + q.dimension,
            })
        })
        .collect();
    StratificationDescriptor { pieces }
}
