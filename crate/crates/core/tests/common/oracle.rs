//! Brute-force orbit-type classification of circle actions by sampling.
//!
//! Points are drawn with random supports and exponential squared moduli and
//! pushed onto the zero level by rescaling one sign class of weights. Each
//! observed support gets a numerically measured isotropy group (from the
//! fixers among `t = p/60`) and a piece dimension (numeric rank of the sampled
//! moduli plus free phases minus orbit dimension). Pieces with equal isotropy
//! that are related by inclusion are merged.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KEEP_ROWS: usize = 400;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Piece {
    pub supports: Vec<u64>,
    pub isotropy: String,
    pub dimension: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub strata: Vec<Piece>,
    /// `(lower, upper)` as pairs of support lists.
    pub frontier: BTreeSet<(Vec<u64>, Vec<u64>)>,
}

struct Observed {
    rows: Vec<Vec<f64>>,
    z: Vec<Complex64>,
}

pub fn classify(weights: &[i64], contact: bool, samples: usize, seed: u64) -> Classification {
    let n = weights.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: BTreeMap<u64, Observed> = BTreeMap::new();
    for _ in 0..samples {
        let mut x: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random::<bool>() {
                    -(1.0 - rng.random::<f64>()).ln()
                } else {
                    0.0
                }
            })
            .collect();
        let pos: f64 = (0..n).filter(|&j| weights[j] > 0).map(|j| weights[j] as f64 * x[j]).sum();
        let neg: f64 = (0..n).filter(|&j| weights[j] < 0).map(|j| -weights[j] as f64 * x[j]).sum();
        if pos > 0.0 && neg > 0.0 {
            for j in 0..n {
                if weights[j] > 0 {
                    x[j] *= neg / pos;
                }
            }
        } else {
            for j in 0..n {
                if weights[j] != 0 {
                    x[j] = 0.0;
                }
            }
        }
        let support: u64 = (0..n).filter(|&j| x[j] > 0.0).fold(0, |m, j| m | 1 << j);
        if contact {
            if support == 0 {
                continue;
            }
            let total: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= total);
        }
        let entry = seen.entry(support).or_insert_with(|| Observed {
            rows: Vec::new(),
            z: (0..n)
                .map(|j| Complex64::from_polar(x[j].sqrt(), std::f64::consts::TAU * rng.random::<f64>()))
                .collect(),
        });
        if entry.rows.len() < KEEP_ROWS {
            entry.rows.push((0..n).filter(|&j| support >> j & 1 == 1).map(|j| x[j]).collect());
        }
    }

    let info: Vec<(u64, String, usize)> = seen
        .iter()
        .map(|(&s, obs)| (s, isotropy(weights, &obs.z), dimension(weights, s, obs, contact)))
        .collect();

    // Merge pieces with equal isotropy related by inclusion.
    let m = info.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for a in 0..m {
        for b in 0..m {
            let (sa, sb) = (info[a].0, info[b].0);
            if a != b && sa & !sb == 0 && info[a].1 == info[b].1 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..m {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut strata: Vec<Piece> = groups
        .values()
        .map(|g| Piece {
            supports: g.iter().map(|&i| info[i].0).collect(),
            isotropy: info[g[0]].1.clone(),
            dimension: g.iter().map(|&i| info[i].2).max().unwrap(),
        })
        .collect();
    strata.sort();

    let k = strata.len();
    let mut rel = vec![vec![false; k]; k];
    for a in 0..k {
        for b in 0..k {
            rel[a][b] = a != b
                && strata[a].supports.iter().any(|&s| {
                    strata[b].supports.iter().any(|&t| s != t && s & !t == 0)
                });
        }
    }
    for c in 0..k {
        for a in 0..k {
            for b in 0..k {
                if rel[a][c] && rel[c][b] {
                    rel[a][b] = true;
                }
            }
        }
    }
    let mut frontier = BTreeSet::new();
    for a in 0..k {
        for b in 0..k {
            if rel[a][b] {
                frontier.insert((strata[a].supports.clone(), strata[b].supports.clone()));
            }
        }
    }
    Classification { strata, frontier }
}

/// Isotropy of `z` read off from the grid `t = p/60`, which contains every
/// finite isotropy group of a circle action with weights in `[-3, 3]`.
fn isotropy(weights: &[i64], z: &[Complex64]) -> String {
    let fixers = (0..60)
        .filter(|&p| {
            let t = p as f64 / 60.0;
            z.iter().zip(weights).all(|(c, &a)| {
                let g = Complex64::from_polar(1.0, std::f64::consts::TAU * a as f64 * t);
                (g * c - c).norm() < 1e-9
            })
        })
        .count();
    match fixers {
        60 => "T^1".to_string(),
        1 => "1".to_string(),
        c => format!("Z/{c}"),
    }
}

fn numeric_rank(rows: &[Vec<f64>], cols: usize) -> usize {
    if rows.is_empty() || cols == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    if smax < 1e-12 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-8 * smax).count()
}

fn dimension(weights: &[i64], support: u64, obs: &Observed, contact: bool) -> usize {
    let size = support.count_ones() as usize;
    let moduli_rank = if contact {
        let mean: Vec<f64> = (0..size)
            .map(|j| obs.rows.iter().map(|r| r[j]).sum::<f64>() / obs.rows.len() as f64)
            .collect();
        let centered: Vec<Vec<f64>> = obs
            .rows
            .iter()
            .map(|r| r.iter().zip(&mean).map(|(a, b)| a - b).collect())
            .collect();
        numeric_rank(&centered, size)
    } else {
        numeric_rank(&obs.rows, size)
    };
    let orbit: f64 = obs
        .z
        .iter()
        .zip(weights)
        .map(|(c, &a)| (c * a as f64).norm_sqr())
        .sum();
    let orbit_dim = usize::from(orbit > 1e-20);
    moduli_rank + size - orbit_dim
}
