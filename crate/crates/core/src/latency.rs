//! Closed-form latency of a hit sequence, for both model variants.
//!
//! For a miss at `t`, the serving fetch is the earliest request for the same item
//! inside the window `[t - Z + 1, t]` that dispatched a fetch. In the standard
//! model only misses dispatch; in the antimonotone model every request does. The
//! request's latency is `Z - (t - p)` where `p` is that earliest dispatch.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{Latency, RequestSequence, IDLE};

/// `b_t = 1` for a full hit, `0` for a miss or delayed hit.
///
/// Idle slots carry `1` by convention; the latency functions treat them as hits
/// regardless of the stored bit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HitSequence(Vec<bool>);

impl HitSequence {
    pub fn new(bits: Vec<bool>) -> Self {
        HitSequence(bits)
    }

    pub fn all_misses(len: usize) -> Self {
        HitSequence(vec![false; len])
    }

    pub fn all_hits(len: usize) -> Self {
        HitSequence(vec![true; len])
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        HitSequence(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bit at 1-based time `t`.
    pub fn at(&self, t: usize) -> bool {
        self.0[t - 1]
    }

    pub fn set(&mut self, t: usize, bit: bool) {
        self.0[t - 1] = bit;
    }

    /// Copy with the bits at idle slots forced to 1.
    pub fn normalized(&self, sequence: &RequestSequence) -> Self {
        HitSequence(
            self.0
                .iter()
                .zip(sequence.items())
                .map(|(&b, &i)| b || i == IDLE)
                .collect(),
        )
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.0.iter().map(|&b| b as u8).collect()
    }
}

impl Serialize for HitSequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_u8().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HitSequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let bits = Vec::<u8>::deserialize(deserializer)?;
        Ok(HitSequence::from_bits(&bits))
    }
}

/// Per-request latencies together with their sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub per_request: Vec<Latency>,
    pub total: Latency,
}

fn check_lengths(sequence: &RequestSequence, b: &HitSequence) -> Result<()> {
    if sequence.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: sequence.len(),
            got: b.len(),
        });
    }
    Ok(())
}

fn evaluate(
    sequence: &RequestSequence,
    delay: u32,
    b: &HitSequence,
    hits_dispatch: bool,
) -> Result<LatencyBreakdown> {
    check_lengths(sequence, b)?;
    let items = sequence.items();
    let z = delay as usize;
    let miss = |t: usize| items[t] != IDLE && !b.bits()[t];

    let per_request: Vec<Latency> = (0..items.len())
        .map(|t| {
            if !miss(t) {
                return 0;
            }
            let start = (t + 1).saturating_sub(z);
            let p = (start..=t)
                .find(|&s| items[s] == items[t] && (hits_dispatch || miss(s)))
                .expect("a miss is its own server");
            (z - (t - p)) as Latency
        })
        .collect();
    let total = per_request.iter().sum();
    Ok(LatencyBreakdown { per_request, total })
}

/// Latency of hit sequence `b` on `sequence` in the standard delayed-hits model.
pub fn delayed_hits_latency(
    sequence: &RequestSequence,
    delay: u32,
    b: &HitSequence,
) -> Result<LatencyBreakdown> {
    evaluate(sequence, delay, b, false)
}

/// Latency of hit sequence `b` when every request, hit or miss, dispatches a fetch.
pub fn antimonotone_latency(
    sequence: &RequestSequence,
    delay: u32,
    b: &HitSequence,
) -> Result<LatencyBreakdown> {
    evaluate(sequence, delay, b, true)
}

/// Coordinate-wise order: true iff `b_t <= b'_t` for every `t`.
pub fn dominates(b: &HitSequence, b_prime: &HitSequence) -> Result<bool> {
    if b.len() != b_prime.len() {
        return Err(Error::LengthMismatch {
            expected: b.len(),
            got: b_prime.len(),
        });
    }
    Ok(b.bits()
        .iter()
        .zip(b_prime.bits())
        .all(|(&lo, &hi)| !lo || hi))
}
