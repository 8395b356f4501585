//! Seeded random instances.

use std::ops::RangeInclusive;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::latency::HitSequence;
use crate::model::{Item, ModelParams, RequestSequence, IDLE};
use crate::policy::PolicyKind;

/// Parameter ranges for random instances.
#[derive(Debug, Clone)]
pub struct InstanceSpace {
    pub k: RangeInclusive<u32>,
    pub delay: RangeInclusive<u32>,
    /// `n` is drawn from `k+1 ..= max(n_max, k+1)`.
    pub n_max: u32,
    pub len: RangeInclusive<usize>,
    pub idle_probability: f64,
}

impl Default for InstanceSpace {
    fn default() -> Self {
        InstanceSpace {
            k: 1..=4,
            delay: 1..=8,
            n_max: 8,
            len: 1..=50,
            idle_probability: 0.25,
        }
    }
}

/// Independent stream for case `case` under `seed`, regardless of evaluation order.
pub fn case_rng(seed: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case);
    rng
}

pub fn random_params(rng: &mut impl Rng, space: &InstanceSpace) -> ModelParams {
    let k = rng.gen_range(space.k.clone());
    let delay = rng.gen_range(space.delay.clone());
    let n = rng.gen_range(k + 1..=space.n_max.max(k + 1));
    ModelParams::new(n, k, delay).expect("positive ranges")
}

/// Each slot is idle with probability `idle_probability`, otherwise uniform over `1..=n`.
pub fn random_sequence(
    rng: &mut impl Rng,
    n: u32,
    len: usize,
    idle_probability: f64,
) -> RequestSequence {
    (0..len)
        .map(|_| {
            if rng.gen_bool(idle_probability) {
                IDLE
            } else {
                rng.gen_range(1..=n)
            }
        })
        .collect::<Vec<Item>>()
        .into()
}

pub fn random_instance(
    rng: &mut impl Rng,
    space: &InstanceSpace,
) -> (ModelParams, RequestSequence) {
    let params = random_params(rng, space);
    let len = rng.gen_range(space.len.clone());
    let seq = random_sequence(rng, params.n, len, space.idle_probability);
    (params, seq)
}

pub fn random_bits(rng: &mut impl Rng, len: usize) -> HitSequence {
    HitSequence::new((0..len).map(|_| rng.gen_bool(0.5)).collect())
}

pub fn random_policy_kind(rng: &mut impl Rng) -> PolicyKind {
    PolicyKind::ALL[rng.gen_range(0..PolicyKind::ALL.len())]
}

/// A random target set of at most `k` items for the static policy.
pub fn random_static_set(rng: &mut impl Rng, params: &ModelParams) -> Vec<Item> {
    let size = rng.gen_range(0..=params.k);
    let mut items: Vec<Item> = (1..=params.n).collect();
    for i in 0..size as usize {
        let j = rng.gen_range(i..items.len());
        items.swap(i, j);
    }
    items.truncate(size as usize);
    items.sort_unstable();
    items
}
