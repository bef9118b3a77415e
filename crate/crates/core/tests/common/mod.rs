#![allow(dead_code)]

pub mod oracle;

use strat_forge::WeightSystem;

/// The fixed ten-system corpus used by the sampled checks.
pub fn corpus() -> Vec<(&'static str, WeightSystem)> {
    vec![
        ("circle (1,-1)", WeightSystem::circle(&[1, -1])),
        ("circle (1,1,-1)", WeightSystem::circle(&[1, 1, -1])),
        ("circle (2,-2,1)", WeightSystem::circle(&[2, -2, 1])),
        ("circle (1,1,-1,-1)", WeightSystem::circle(&[1, 1, -1, -1])),
        (
            "T2 [[1,0,-1],[0,1,-1]]",
            WeightSystem::torus(&[&[1, 0, -1], &[0, 1, -1]]).unwrap(),
        ),
        ("circle (2,-2,3,-3)", WeightSystem::circle(&[2, -2, 3, -3])),
        (
            "Z/2 x Z/2 on C^2",
            WeightSystem::new(0, vec![2, 2], vec![], vec![vec![1, 0], vec![0, 1]], 2).unwrap(),
        ),
        (
            "T1 x Z/2 (1,-1,0)",
            WeightSystem::new(1, vec![2], vec![vec![1, -1, 0]], vec![vec![0, 1, 1]], 3).unwrap(),
        ),
        ("trivial (0,0)", WeightSystem::circle(&[0, 0])),
        (
            "T2 [[1,-1,0,0],[0,0,1,-1]]",
            WeightSystem::torus(&[&[1, -1, 0, 0], &[0, 0, 1, -1]]).unwrap(),
        ),
    ]
}

/// Every circle action on `ℂⁿ`, `1 ≤ n ≤ 3`, with weights in `[-3, 3]`.
pub fn circle_corpus() -> Vec<WeightSystem> {
    let mut out = Vec::new();
    for n in 1..=3u32 {
        for code in 0..7usize.pow(n) {
            let mut c = code;
            let w: Vec<i64> = (0..n)
                .map(|_| {
                    let v = (c % 7) as i64 - 3;
                    c /= 7;
                    v
                })
                .collect();
            out.push(WeightSystem::circle(&w));
        }
    }
    out
}
