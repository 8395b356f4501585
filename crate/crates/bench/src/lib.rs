//! Fixed workloads shared by the benchmarks.

use delayhit::workload::{case_rng, random_sequence};
use delayhit::{ModelParams, RequestSequence};

/// A reproducible trace of `len` requests over `n` items, a quarter of them idle.
pub fn trace(n: u32, len: usize, seed: u64) -> RequestSequence {
    random_sequence(&mut case_rng(seed, 0), n, len, 0.25)
}

pub fn params(n: u32, k: u32, delay: u32) -> ModelParams {
    ModelParams::new(n, k, delay).expect("benchmark parameters are positive")
}
