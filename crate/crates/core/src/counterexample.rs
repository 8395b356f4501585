//! A trace on which one extra hit raises total delayed-hits latency.
//!
//! With `z = floor(Z/2)`, item `k+1` is requested at `t = 1`, again at `t = Z+1`,
//! and as a burst of `z` requests ending at `t = 2Z`. Caching it from the first
//! fetch turns `t = Z+1` into a hit, but then nothing is in flight when the burst
//! arrives and the burst pays far more than it saves. Item `k+2` (requested at
//! `t = 2` and in a closing block of `Z` requests) forces the cache slot used by
//! `k+1` to be handed over at `t = Z+1`. For `k > 1`, blocks of `Z` requests for
//! items `2..=k` pin the other cache slots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latency::{antimonotone_latency, delayed_hits_latency, dominates, HitSequence};
use crate::model::{
    replay, EvictionSequence, Item, Latency, ModelParams, RequestSequence, Time, IDLE,
};
use crate::opt::{brute_force_opt, is_hit_sequence_feasible, SearchLimits};

pub const MIN_DELAY: u32 = 5;

pub fn half_delay(delay: u32) -> u32 {
    delay / 2
}

/// `z(Z - z) - Z`: latency added by the extra hit.
pub fn predicted_gap(delay: u32) -> i64 {
    let z = half_delay(delay) as i64;
    let delay = delay as i64;
    z * (delay - z) - delay
}

/// The single-item gadget together with its two closed-form latencies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildingBlock {
    pub sequence: RequestSequence,
    /// Every request misses.
    pub all_miss_latency: Latency,
    /// Only the first request hits.
    pub first_hit_latency: Latency,
}

pub fn building_block(k: u32, delay: u32) -> BuildingBlock {
    let z = half_delay(delay) as Latency;
    let zd = delay as Latency;
    let mut items = vec![IDLE; delay as usize];
    items[0] = k + 1;
    for slot in &mut items[(delay - half_delay(delay)) as usize..] {
        *slot = k + 1;
    }
    BuildingBlock {
        sequence: RequestSequence::new(items),
        all_miss_latency: zd + z * (z + 1) / 2,
        first_hit_latency: (zd + 1) * z - z * (z + 1) / 2,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleSpec {
    #[serde(rename = "Z")]
    pub delay: u32,
    pub k: u32,
    pub z: u32,
    pub params: ModelParams,
    pub sigma_prime: RequestSequence,
    pub b: HitSequence,
    pub b_prime: HitSequence,
    /// The only coordinate where `b` and `b'` differ.
    pub flip_time: Time,
    pub predicted_gap: i64,
}

/// Builds the trace and the two hit sequences. Requires `Z >= 5` and `k >= 1`.
pub fn counterexample_sequence(k: u32, delay: u32) -> Result<CounterexampleSpec> {
    if delay < MIN_DELAY {
        return Err(Error::Unsupported(format!(
            "the counterexample needs Z >= {MIN_DELAY}, got Z={delay}"
        )));
    }
    let params = ModelParams::new(k + 2, k, delay)?;
    let zd = delay as usize;
    let z = half_delay(delay) as usize;
    let len = 2 * zd * (k as usize + 1);
    let mut items = vec![IDLE; len];
    let mut set = |t: Time, item: Item| items[t - 1] = item;

    set(1, k + 1);
    set(2, k + 2);
    set(zd + 1, k + 1);
    for t in 2 * zd - z + 1..=2 * zd {
        set(t, k + 1);
    }
    // Pinning blocks for items 2..=k, then the closing block for k+2, each Z long
    // and starting 2Z after the previous one.
    for (block, item) in (2..=k).chain(std::iter::once(k + 2)).enumerate() {
        let start = 3 * zd + 1 + 2 * zd * block;
        for t in start..start + zd {
            set(t, item);
        }
    }

    let sigma_prime = RequestSequence::new(items);
    let b = HitSequence::new(
        sigma_prime
            .items()
            .iter()
            .enumerate()
            .map(|(idx, &item)| item == IDLE || idx + 1 > 2 * zd)
            .collect(),
    );
    let mut b_prime = b.clone();
    b_prime.set(zd + 1, true);

    Ok(CounterexampleSpec {
        delay,
        k,
        z: z as u32,
        params,
        sigma_prime,
        b,
        b_prime,
        flip_time: zd + 1,
        predicted_gap: predicted_gap(delay),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonAntimonotonicityReport {
    #[serde(rename = "Z")]
    pub delay: u32,
    pub k: u32,
    pub z: u32,
    pub latency_b: Latency,
    pub latency_b_prime: Latency,
    pub gap: i64,
    pub predicted_gap: i64,
    pub gap_over_z_squared: f64,
    pub witness_b: EvictionSequence,
    pub witness_b_prime: EvictionSequence,
    pub antimonotone_latency_b: Latency,
    pub antimonotone_latency_b_prime: Latency,
    /// Exact optimum, when the oracle ran within budget.
    pub opt_latency: Option<Latency>,
    pub oracle_budget_exceeded: bool,
}

fn violation(check: &'static str, detail: String) -> Error {
    Error::Violation { check, detail }
}

/// Checks order, feasibility, the gap identity and, when `oracle` is set, that
/// `b` attains the offline optimum. `limits` bounds the oracle only; the pinned
/// feasibility searches run under the default limits.
pub fn verify_nonantimonotonicity(
    spec: &CounterexampleSpec,
    limits: SearchLimits,
    oracle: bool,
) -> Result<NonAntimonotonicityReport> {
    let seq = &spec.sigma_prime;
    let params = spec.params;

    if !dominates(&spec.b, &spec.b_prime)? {
        return Err(violation("order", "b is not below b'".into()));
    }
    let differing: Vec<Time> = (1..=seq.len())
        .filter(|&t| spec.b.at(t) != spec.b_prime.at(t))
        .collect();
    if differing != [spec.flip_time] {
        return Err(violation(
            "order",
            format!("b and b' differ at {differing:?}"),
        ));
    }

    let certify = |b: &HitSequence, name: &str| -> Result<(EvictionSequence, Latency)> {
        let witness = is_hit_sequence_feasible(params, seq, b, SearchLimits::default())?
            .ok_or_else(|| violation("feasibility", format!("{name} is not feasible")))?;
        let replayed = replay(params, seq, &witness)?;
        if replayed.hit_sequence != *b {
            return Err(violation(
                "feasibility",
                format!("{name} witness replays differently"),
            ));
        }
        Ok((witness, replayed.total_latency))
    };
    let (witness_b, replayed_b) = certify(&spec.b, "b")?;
    let (witness_b_prime, replayed_b_prime) = certify(&spec.b_prime, "b'")?;

    let latency_b = delayed_hits_latency(seq, spec.delay, &spec.b)?.total;
    let latency_b_prime = delayed_hits_latency(seq, spec.delay, &spec.b_prime)?.total;
    if (latency_b, latency_b_prime) != (replayed_b, replayed_b_prime) {
        return Err(violation(
            "latency-function",
            format!("closed form ({latency_b}, {latency_b_prime}) vs replay ({replayed_b}, {replayed_b_prime})"),
        ));
    }
    let gap = latency_b_prime as i64 - latency_b as i64;
    if gap != spec.predicted_gap || gap <= 0 {
        return Err(violation(
            "gap",
            format!("gap {gap}, predicted {}", spec.predicted_gap),
        ));
    }

    let antimonotone_latency_b = antimonotone_latency(seq, spec.delay, &spec.b)?.total;
    let antimonotone_latency_b_prime = antimonotone_latency(seq, spec.delay, &spec.b_prime)?.total;
    if antimonotone_latency_b_prime > antimonotone_latency_b {
        return Err(violation(
            "antimonotone",
            format!("{antimonotone_latency_b_prime} > {antimonotone_latency_b}"),
        ));
    }

    let (opt_latency, oracle_budget_exceeded) = if oracle {
        match brute_force_opt(params, seq, limits) {
            Ok(opt) if opt.min_latency == latency_b => (Some(opt.min_latency), false),
            Ok(opt) => {
                return Err(violation(
                    "optimality",
                    format!("OPT {} differs from l(b) = {latency_b}", opt.min_latency),
                ))
            }
            Err(Error::BudgetExceeded { .. }) => (None, true),
            Err(e) => return Err(e),
        }
    } else {
        (None, false)
    };

    Ok(NonAntimonotonicityReport {
        delay: spec.delay,
        k: spec.k,
        z: spec.z,
        latency_b,
        latency_b_prime,
        gap,
        predicted_gap: spec.predicted_gap,
        gap_over_z_squared: gap as f64 / (spec.delay as f64).powi(2),
        witness_b,
        witness_b_prime,
        antimonotone_latency_b,
        antimonotone_latency_b_prime,
        opt_latency,
        oracle_budget_exceeded,
    })
}
