//! Spectral grid, discretized Wiener modes of the steady state, and the
//! mode-resolved representation of perturbations.
//!
//! The expectation over the probability space is never sampled: every
//! second moment is an exact sum over orthonormal Gaussian directions.

mod checkpoint;
mod grid;
mod modes;
mod state;

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use grid::{GridSpec, SpectralGrid};
pub use modes::{build_mode_set, steady_density, Background, Mode, ModeSet};
pub use state::{compute_density, density_from_fields, hartree_potential, DensityPath, HartreeMap, PerturbationShape, RandomFieldState};
pub(crate) use state::real_part_checked;

use rayon::prelude::*;

/// Items per chunk in mode reductions; fixed so sums are reproducible.
const CHUNK: usize = 8;

/// Σ_i contribution_i over `count` items into a length-`len` vector.
///
/// Chunks are accumulated in parallel, a bounded wave at a time, and added
/// to the total in index order, so the result does not depend on the
/// number of threads.
pub(crate) fn chunked_sum<F>(count: usize, len: usize, contribute: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let starts: Vec<usize> = (0..count).step_by(CHUNK).collect();
    let wave = 2 * rayon::current_num_threads().max(1);
    let mut total = vec![0.0; len];
    for group in starts.chunks(wave) {
        let partial: Vec<Vec<f64>> = group
            .par_iter()
            .map(|&s| {
                let mut acc = vec![0.0; len];
                for i in s..(s + CHUNK).min(count) {
                    contribute(i, &mut acc);
                }
                acc
            })
            .collect();
        for p in partial {
            for (t, v) in total.iter_mut().zip(p) {
                *t += v;
            }
        }
    }
    total
}
