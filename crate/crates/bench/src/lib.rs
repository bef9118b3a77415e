//! Shared fixtures for the benchmarks.

use strat_forge::WeightSystem;

/// Named systems of increasing size used across the benchmarks.
pub fn systems() -> Vec<(&'static str, WeightSystem)> {
    vec![
        ("circle_2_-2_1", WeightSystem::circle(&[2, -2, 1])),
        ("circle_1_1_-1_-1", WeightSystem::circle(&[1, 1, -1, -1])),
        ("circle_2_-2_3_-3", WeightSystem::circle(&[2, -2, 3, -3])),
        (
            "t2_decoupled",
            WeightSystem::torus(&[&[1, -1, 0, 0], &[0, 0, 1, -1]]).expect("valid"),
        ),
        (
            "t2_six",
            WeightSystem::torus(&[&[1, -1, 2, -2, 1, 0], &[0, 1, -1, 1, -2, 1]]).expect("valid"),
        ),
        (
            "circle_eight",
            WeightSystem::circle(&[1, 2, 3, -1, -2, -3, 1, -1]),
        ),
    ]
}

/// Deterministic integer matrices with entries in `[-50, 50]`.
pub fn matrices(count: usize, rows: usize, cols: usize) -> Vec<Vec<Vec<i64>>> {
    let mut state: u64 = 0x2545_F491_4F6C_DD1D;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 101) as i64 - 50
    };
    (0..count)
        .map(|_| (0..rows).map(|_| (0..cols).map(|_| next()).collect()).collect())
        .collect()
}
