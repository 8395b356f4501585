//! Eviction policies.
//!
//! A policy is consulted only when a fetched item returns and is not resident. It
//! answers with `0` to decline caching, or with a resident item to evict.
//! Online policies see the request history up to the current step; offline
//! policies are built with the full trace.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{CacheState, EvictionSequence, Item, ModelParams, RequestSequence, Time, IDLE};

/// What a policy may look at when deciding.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub time: Time,
    pub returned: Item,
    pub cache: &'a CacheState,
    /// `i_1, ..., i_t`.
    pub requests: &'a [Item],
    /// `j_1, ..., j_{t-1}`.
    pub evictions: &'a [Item],
    pub params: &'a ModelParams,
}

pub trait Policy {
    fn name(&self) -> &str;

    /// Eviction for the returned item: `0` declines, otherwise a resident item.
    fn decide(&mut self, obs: &Observation<'_>) -> Result<Item>;
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<Item> {
        (**self).decide(obs)
    }
}

/// Evicts the resident item whose most recent request is oldest.
/// Items never requested count as oldest; ties go to the smallest index.
#[derive(Debug, Clone, Default)]
pub struct Lru;

impl Policy for Lru {
    fn name(&self) -> &str {
        "lru"
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<Item> {
        let last_use = |item: Item| {
            obs.requests
                .iter()
                .rposition(|&r| r == item)
                .map_or(0, |pos| pos + 1)
        };
        Ok(obs
            .cache
            .iter()
            .min_by_key(|&item| (last_use(item), item))
            .unwrap_or(IDLE))
    }
}

/// Evicts the longest-resident item. The initial items are treated as inserted
/// at time 0; ties go to the smallest index. One instance per simulation.
#[derive(Debug, Clone, Default)]
pub struct Fifo {
    inserted: BTreeMap<Item, Time>,
}

impl Policy for Fifo {
    fn name(&self) -> &str {
        "fifo"
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<Item> {
        let victim = obs
            .cache
            .iter()
            .min_by_key(|&item| (self.inserted.get(&item).copied().unwrap_or(0), item))
            .unwrap_or(IDLE);
        self.inserted.remove(&victim);
        self.inserted.insert(obs.returned, obs.time);
        Ok(victim)
    }
}

/// Never caches anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeverCache;

impl Policy for NeverCache {
    fn name(&self) -> &str {
        "never"
    }

    fn decide(&mut self, _obs: &Observation<'_>) -> Result<Item> {
        Ok(IDLE)
    }
}

/// Caches the items of a fixed target set as they come back, evicting
/// non-target items (smallest first), and never evicts a target item.
#[derive(Debug, Clone)]
pub struct StaticSet {
    target: BTreeSet<Item>,
}

impl StaticSet {
    pub fn new(target: impl IntoIterator<Item = Item>) -> Self {
        StaticSet {
            target: target.into_iter().filter(|&i| i != IDLE).collect(),
        }
    }

    pub fn target(&self) -> &BTreeSet<Item> {
        &self.target
    }
}

impl Policy for StaticSet {
    fn name(&self) -> &str {
        "static"
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<Item> {
        if self.target.len() > obs.params.k as usize {
            return Err(Error::InvalidParams(format!(
                "static set of size {} exceeds k={}",
                self.target.len(),
                obs.params.k
            )));
        }
        if !self.target.contains(&obs.returned) {
            return Ok(IDLE);
        }
        Ok(obs
            .cache
            .iter()
            .find(|item| !self.target.contains(item))
            .unwrap_or(IDLE))
    }
}

/// Belady's offline rule: among the resident items and the returned one, drop
/// the item requested again furthest in the future. Never-again items come
/// first; ties go to the smallest index. Dropping the returned item declines.
#[derive(Debug, Clone)]
pub struct Belady {
    sequence: RequestSequence,
}

impl Belady {
    pub fn new(sequence: RequestSequence) -> Self {
        Belady { sequence }
    }
}

impl Policy for Belady {
    fn name(&self) -> &str {
        "belady"
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<Item> {
        let future = &self.sequence.items()[obs.time.min(self.sequence.len())..];
        let next_use = |item: Item| future.iter().position(|&r| r == item).unwrap_or(usize::MAX);
        let victim = obs
            .cache
            .iter()
            .chain(std::iter::once(obs.returned))
            .max_by_key(|&item| (next_use(item), std::cmp::Reverse(item)))
            .unwrap_or(IDLE);
        Ok(if victim == obs.returned { IDLE } else { victim })
    }
}

/// Uniform choice among declining and every resident item, from a seeded stream.
#[derive(Debug, Clone)]
pub struct RandomEviction {
    rng: ChaCha8Rng,
}

impl RandomEviction {
    pub fn new(seed: u64) -> Self {
        RandomEviction {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandomEviction {
    fn name(&self) -> &str {
        "random"
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<Item> {
        let mut options = vec![IDLE];
        options.extend(obs.cache.iter());
        Ok(*options.choose(&mut self.rng).expect("non-empty"))
    }
}

/// Plays back a fixed eviction schedule.
#[derive(Debug, Clone)]
pub struct Scripted {
    evictions: EvictionSequence,
}

impl Scripted {
    pub fn new(evictions: EvictionSequence) -> Self {
        Scripted { evictions }
    }
}

impl Policy for Scripted {
    fn name(&self) -> &str {
        "scripted"
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<Item> {
        Ok(self
            .evictions
            .choices()
            .get(obs.time - 1)
            .copied()
            .unwrap_or(IDLE))
    }
}

/// Names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Lru,
    Fifo,
    Never,
    Static,
    Belady,
    Random,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Lru,
        PolicyKind::Fifo,
        PolicyKind::Never,
        PolicyKind::Static,
        PolicyKind::Belady,
        PolicyKind::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Lru => "lru",
            PolicyKind::Fifo => "fifo",
            PolicyKind::Never => "never",
            PolicyKind::Static => "static",
            PolicyKind::Belady => "belady",
            PolicyKind::Random => "random",
        }
    }

    /// Decisions depend only on the history seen so far.
    pub fn is_online(self) -> bool {
        !matches!(self, PolicyKind::Belady)
    }

    pub fn is_deterministic(self) -> bool {
        !matches!(self, PolicyKind::Random)
    }

    /// Builds a fresh policy. `sequence` is used by offline policies, `static_set`
    /// by the static policy (defaults to the initial cache), `seed` by the
    /// random one.
    pub fn build(
        self,
        sequence: &RequestSequence,
        static_set: Option<&[Item]>,
        seed: u64,
    ) -> Box<dyn Policy + Send> {
        match self {
            PolicyKind::Lru => Box::new(Lru),
            PolicyKind::Fifo => Box::<Fifo>::default(),
            PolicyKind::Never => Box::new(NeverCache),
            PolicyKind::Static => {
                Box::new(StaticSet::new(static_set.unwrap_or(&[]).iter().copied()))
            }
            PolicyKind::Belady => Box::new(Belady::new(sequence.clone())),
            PolicyKind::Random => Box::new(RandomEviction::new(seed)),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|kind| kind.as_str() == s)
            .ok_or_else(|| Error::UnknownPolicy(s.to_string()))
    }
}
