//! Adaptive adversary against deterministic online policies.
//!
//! The trace is built from isolated segments: a pure request `(0^Z, i, 0^Z)` and
//! bursty requests `(0^Z, i^Z, 0^Z)`. It opens with a pure request for `k + 1`,
//! then repeatedly appends a bursty request for whichever item of `{1, ..., k+1}`
//! the policy does not hold, marking that item, until `k` items are marked. The
//! policy misses everything, while a static cache holding `{1, ..., k+1}` minus
//! an unmarked item misses only the opening request.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{simulate, Engine, Item, Latency, ModelParams, RequestSequence, IDLE};
use crate::policy::{Policy, StaticSet};
use crate::report::Ratio;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Pure,
    Bursty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub item: Item,
    pub rendered: Vec<Item>,
}

impl Segment {
    /// Latency of the segment when its first request misses.
    pub fn miss_cost(&self, delay: u32) -> Latency {
        let z = delay as Latency;
        match self.kind {
            SegmentKind::Pure => z,
            SegmentKind::Bursty => z * (z + 1) / 2,
        }
    }
}

fn render(item: Item, repeats: u32, delay: u32) -> Vec<Item> {
    let idle = std::iter::repeat_n(IDLE, delay as usize);
    idle.clone()
        .chain(std::iter::repeat_n(item, repeats as usize))
        .chain(idle)
        .collect()
}

pub fn pure_segment(item: Item, delay: u32) -> Segment {
    Segment {
        kind: SegmentKind::Pure,
        item,
        rendered: render(item, 1, delay),
    }
}

pub fn bursty_segment(item: Item, delay: u32) -> Segment {
    Segment {
        kind: SegmentKind::Bursty,
        item,
        rendered: render(item, delay, delay),
    }
}

/// Items that received a bursty request. Insert-only.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MarkSet(BTreeSet<Item>);

impl MarkSet {
    pub fn mark(&mut self, item: Item) {
        self.0.insert(item);
    }

    pub fn contains(&self, item: Item) -> bool {
        self.0.contains(&item)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Item> + '_ {
        self.0.iter().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryReport {
    pub policy: String,
    pub sigma_a: RequestSequence,
    pub segments: Vec<(SegmentKind, Item)>,
    pub marked: MarkSet,
    pub bursty_count: usize,
    /// Set when the segment cap stopped construction before `k` items were marked.
    pub capped: bool,
    pub policy_latency: Latency,
    pub opt_latency: Latency,
    /// The unmarked item the static witness leaves out of its cache.
    pub opt_witness_item: Item,
    pub ratio_lower_bound: Ratio,
    /// `1 + bursty_count * (Z + 1) / 2`.
    pub guaranteed_ratio: Ratio,
}

pub fn default_cap(k: u32) -> usize {
    10 * k as usize
}

/// Builds the adversarial trace against `policy`, interleaved with simulating it.
///
/// `policy` must be deterministic and fresh; the report's latency is the
/// latency of this very run.
pub fn build_adversarial_sequence(
    policy: &mut dyn Policy,
    params: ModelParams,
    cap: usize,
) -> Result<AdversaryReport> {
    params.validate()?;
    let k = params.k;
    if params.n <= k {
        return Err(Error::InvalidParams(format!(
            "adversary needs n > k (n={}, k={k})",
            params.n
        )));
    }
    let delay = params.delay;
    let mut engine = Engine::new(params)?;
    let mut sigma = RequestSequence::default();
    let mut segments = Vec::new();
    let mut marked = MarkSet::default();

    let mut play =
        |segment: Segment, engine: &mut Engine, sigma: &mut RequestSequence| -> Result<()> {
            for &item in &segment.rendered {
                let rec = engine.push(item, policy)?;
                if item != IDLE && rec.hit {
                    return Err(Error::PolicyHit {
                        policy: policy.name().to_string(),
                        time: rec.time,
                        item,
                    });
                }
            }
            debug_assert!(engine.is_quiescent());
            sigma.extend_from_slice(&segment.rendered);
            segments.push((segment.kind, segment.item));
            Ok(())
        };

    play(pure_segment(k + 1, delay), &mut engine, &mut sigma)?;
    let mut bursty_count = 0;
    while marked.len() < k as usize && bursty_count < cap {
        let absent = (1..=k + 1)
            .find(|&i| !engine.cache().contains(i))
            .expect("k items cannot cover k + 1");
        play(bursty_segment(absent, delay), &mut engine, &mut sigma)?;
        marked.mark(absent);
        bursty_count += 1;
    }
    let capped = marked.len() < k as usize;

    let policy_latency = engine.finish()?.total_latency;
    let z = delay as Latency;
    let floor = z + bursty_count as Latency * z * (z + 1) / 2;
    if policy_latency < floor {
        return Err(Error::Violation {
            check: "adversary-latency",
            detail: format!("policy latency {policy_latency} below {floor}"),
        });
    }

    // Some item of {1..k+1} is unmarked whenever fewer than k + 1 items are marked.
    let opt_witness_item =
        (1..=k + 1)
            .find(|&i| !marked.contains(i))
            .ok_or_else(|| Error::Violation {
                check: "adversary-witness",
                detail: "every item of {1..k+1} is marked".into(),
            })?;
    let witness_set = (1..=k + 1).filter(|&i| i != opt_witness_item);
    let opt_latency = simulate(params, &sigma, &mut StaticSet::new(witness_set))?.total_latency;
    if opt_latency != z {
        return Err(Error::Violation {
            check: "adversary-witness",
            detail: format!("static witness latency {opt_latency}, expected {z}"),
        });
    }

    Ok(AdversaryReport {
        policy: policy.name().to_string(),
        sigma_a: sigma,
        segments,
        bursty_count,
        capped,
        marked,
        policy_latency,
        opt_latency,
        opt_witness_item,
        ratio_lower_bound: Ratio::new(policy_latency, opt_latency),
        guaranteed_ratio: Ratio::new(2 + bursty_count as Latency * (z + 1), 2),
    })
}
