use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SampleBatch;
use crate::error::{Error, Result};
use crate::torus_rep::{Point, WeightSystem};
use crate::union_find::UnionFind;

/// A finite set of group elements: a torus grid times every element of the
/// finite factor.
#[derive(Clone, Debug)]
pub struct GroupGrid {
    /// Grid points per torus dimension.
    pub per_dim: usize,
    weights: Vec<Vec<f64>>,
    torus: Vec<Vec<f64>>,
    /// `phases[g][j]`: the character of coordinate `j` at element `g`.
    phases: Vec<Vec<Complex64>>,
    /// Finite-factor phase of each element, per coordinate (in turns).
    finite_turns: Vec<Vec<f64>>,
}

impl GroupGrid {
    /// `per_dim^k` torus points with `per_dim ≤ 32` chosen so the torus grid
    /// has at most `cap` points.
    pub fn new(ws: &WeightSystem, cap: usize) -> Self {
        let k = ws.torus_rank();
        let per_dim = if k == 0 {
            1
        } else {
            let mut p = 32usize;
            while p > 2 && p.pow(k as u32) > cap {
                p -= 1;
            }
            p
        };
        let torus_points = per_dim.pow(k as u32);
        let torus: Vec<Vec<f64>> = (0..torus_points)
            .map(|mut idx| {
                (0..k)
                    .map(|_| {
                        let t = (idx % per_dim) as f64 / per_dim as f64;
                        idx /= per_dim;
                        t
                    })
                    .collect()
            })
            .collect();

        let n = ws.n();
        let moduli = ws.moduli();
        let finite_count: usize = moduli.iter().map(|&m| m as usize).product();
        let finite_turns: Vec<Vec<f64>> = (0..finite_count)
            .map(|mut idx| {
                let a: Vec<i64> = moduli
                    .iter()
                    .map(|&m| {
                        let v = (idx % m as usize) as i64;
                        idx /= m as usize;
                        v
                    })
                    .collect();
                (0..n)
                    .map(|j| {
                        ws.finite_char_rows()
                            .iter()
                            .zip(moduli)
                            .zip(&a)
                            .map(|((row, &m), &ai)| (row[j] * ai).rem_euclid(m) as f64 / m as f64)
                            .sum()
                    })
                    .collect()
            })
            .collect();

        let weights: Vec<Vec<f64>> = (0..n)
            .map(|j| ws.weight(j).into_iter().map(|a| a as f64).collect())
            .collect();
        let mut phases = Vec::with_capacity(torus.len() * finite_turns.len());
        let mut elements = Vec::with_capacity(phases.capacity());
        for f in &finite_turns {
            for t in &torus {
                phases.push(
                    (0..n)
                        .map(|j| {
                            let turns: f64 =
                                weights[j].iter().zip(t).map(|(a, x)| a * x).sum::<f64>() + f[j];
                            Complex64::from_polar(1.0, TAU * turns)
                        })
                        .collect(),
                );
                elements.push(f.clone());
            }
        }
        GroupGrid {
            per_dim,
            weights,
            torus,
            phases,
            finite_turns: elements,
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    fn torus_point(&self, g: usize) -> &[f64] {
        &self.torus[g % self.torus.len()]
    }
}

/// `Re Σ c_j e^{2πi(⟨a_j, t⟩ + f_j)}` with gradient and Hessian in `t`.
fn objective(grid: &GroupGrid, c: &[Complex64], t: &[f64], f: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
    let k = t.len();
    let mut val = 0.0;
    let mut grad = DVector::zeros(k);
    let mut hess = DMatrix::zeros(k, k);
    for (j, cj) in c.iter().enumerate() {
        if cj.norm_sqr() == 0.0 {
            continue;
        }
        let a = &grid.weights[j];
        let turns: f64 = a.iter().zip(t).map(|(x, y)| x * y).sum::<f64>() + f[j];
        let e = cj * Complex64::from_polar(1.0, TAU * turns);
        val += e.re;
        for p in 0..k {
            grad[p] -= TAU * a[p] * e.im;
            for q in 0..k {
                hess[(p, q)] -= TAU * TAU * a[p] * a[q] * e.re;
            }
        }
    }
    (val, grad, hess)
}

/// Local maximization of the alignment from a grid point.
fn refine(grid: &GroupGrid, c: &[Complex64], g: usize, start: f64) -> f64 {
    let k = grid.weights.first().map_or(0, |w| w.len());
    if k == 0 {
        return start;
    }
    let f = &grid.finite_turns[g];
    let mut t = grid.torus_point(g).to_vec();
    let mut best = start;
    let lipschitz: f64 = c
        .iter()
        .zip(&grid.weights)
        .map(|(cj, a)| cj.norm() * a.iter().map(|x| x * x).sum::<f64>())
        .sum::<f64>()
        * TAU
        * TAU;
    if lipschitz == 0.0 {
        return start;
    }
    for _ in 0..20 {
        let (val, grad, hess) = objective(grid, c, &t, f);
        best = best.max(val);
        if grad.norm() < 1e-14 * (1.0 + lipschitz) {
            break;
        }
        // Newton step on a concave patch, otherwise a gradient step.
        let step = match (-&hess).cholesky() {
            Some(ch) => ch.solve(&grad),
            None => grad.clone() / lipschitz,
        };
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..8 {
            let trial: Vec<f64> = t.iter().zip(step.iter()).map(|(a, b)| a + scale * b).collect();
            let (v, _, _) = objective(grid, c, &trial, f);
            if v > val {
                t = trial;
                best = best.max(v);
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    best
}

/// `min_g ‖z − g·w‖` over the grid, refined locally from the best elements.
pub fn quotient_distance(grid: &GroupGrid, z: &Point, w: &Point) -> f64 {
    let c: Vec<Complex64> = z.coords.iter().zip(&w.coords).map(|(a, b)| a.conj() * b).collect();
    let base = z.norm_sqr() + w.norm_sqr();
    let mut top = [(f64::NEG_INFINITY, 0usize); 2];
    for (g, ph) in grid.phases.iter().enumerate() {
        let s: f64 = c.iter().zip(ph).map(|(a, b)| (a * b).re).sum();
        if s > top[0].0 {
            top[1] = top[0];
            top[0] = (s, g);
        } else if s > top[1].0 {
            top[1] = (s, g);
        }
    }
    let mut best = top[0].0;
    for &(s, g) in &top {
        if s.is_finite() {
            best = best.max(refine(grid, &c, g, s));
        }
    }
    (base - 2.0 * best).max(0.0).sqrt()
}

fn modulus_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityOptions {
    /// Fixed edge length; derived from the sample when absent.
    pub eps: Option<f64>,
    /// `ε = eps_scale ×` median distance to the `⌈2 ln N⌉`-th nearest neighbor.
    pub eps_scale: f64,
    /// Cap on the number of torus grid points.
    pub grid_cap: usize,
    /// Number of points whose neighbor distances set the scale.
    pub reference_points: usize,
}

impl Default for ConnectivityOptions {
    fn default() -> Self {
        ConnectivityOptions {
            eps: None,
            eps_scale: 3.0,
            grid_cap: 1024,
            reference_points: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityResult {
    pub components: usize,
    pub eps: f64,
    /// Neighbor rank used for the scale (0 when `eps` was given).
    pub neighbor_rank: usize,
    /// Median neighbor distance (0 when `eps` was given).
    pub scale: f64,
    pub grid_points_per_dim: usize,
    pub group_elements: usize,
    pub samples: usize,
}

/// Connected components of the ε-graph on the batch in the quotient metric.
pub fn quotient_connectivity(
    ws: &WeightSystem,
    batch: &SampleBatch,
    options: &ConnectivityOptions,
) -> Result<ConnectivityResult> {
    let pts = &batch.points;
    let n = pts.len();
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let grid = GroupGrid::new(ws, options.grid_cap);
    let moduli: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| p.coords.iter().map(|c| c.norm()).collect())
        .collect();

    let (eps, rank, scale) = match options.eps {
        Some(e) if e > 0.0 => (e, 0, 0.0),
        Some(e) => {
            return Err(Error::InvalidWeightSystem(format!("eps must be positive, got {e}")))
        }
        None if n == 1 => (f64::INFINITY, 0, 0.0),
        None => {
            let rank = ((2.0 * (n as f64).ln()).ceil() as usize).clamp(1, n - 1);
            let refs = options.reference_points.clamp(1, n);
            let mut dists: Vec<f64> = (0..refs)
                .map(|i| kth_neighbor(&grid, pts, &moduli, i, rank))
                .collect();
            dists.sort_by(f64::total_cmp);
            let median = dists[dists.len() / 2];
            (options.eps_scale * median, rank, median)
        }
    };

    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if uf.find(i) == uf.find(j) || modulus_gap(&moduli[i], &moduli[j]) > eps {
                continue;
            }
            if quotient_distance(&grid, &pts[i], &pts[j]) <= eps {
                uf.union(i, j);
            }
        }
    }
    Ok(ConnectivityResult {
        components: uf.count(),
        eps,
        neighbor_rank: rank,
        scale,
        grid_points_per_dim: grid.per_dim,
        group_elements: grid.len(),
        samples: n,
    })
}

/// Distance from point `i` to its `rank`-th nearest neighbor.
fn kth_neighbor(grid: &GroupGrid, pts: &[Point], moduli: &[Vec<f64>], i: usize, rank: usize) -> f64 {
    let mut order: Vec<(f64, usize)> = (0..pts.len())
        .filter(|&j| j != i)
        .map(|j| (modulus_gap(&moduli[i], &moduli[j]), j))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Vec<f64> = Vec::with_capacity(rank + 1);
    for (bound, j) in order {
        if best.len() == rank && bound >= best[rank - 1] {
            break;
        }
        let d = quotient_distance(grid, &pts[i], &pts[j]);
        let pos = best.partition_point(|&x| x <= d);
        best.insert(pos, d);
        best.truncate(rank);
    }
    best[rank - 1]
}
