//! Discrete-time delayed-hits cache semantics.
//!
//! Every timestep has a request phase followed by a retrieval phase. A miss at
//! time `t` appends `(item, t)` to the in-flight queue and dispatches a fetch that
//! returns in the retrieval phase of `t + Z - 1`. A returning fetch serves every
//! queued request for its item, each incurring `t_return - t_request + 1`, and the
//! caching policy is consulted only if the returned item is not already resident.
//!
//! In [`Mode::Antimonotone`] a fetch is dispatched for hits as well, so a hit can
//! serve later misses for the same item.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latency::HitSequence;
use crate::policy::{Observation, Policy};

/// Item identifier. `0` is the idle slot and never a real item.
pub type Item = u32;
/// 1-based timestep index.
pub type Time = usize;
/// Latency in timesteps.
pub type Latency = u64;

/// The idle request.
pub const IDLE: Item = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Standard,
    Antimonotone,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Standard => f.write_str("standard"),
            Mode::Antimonotone => f.write_str("antimonotone"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Mode::Standard),
            "antimonotone" => Ok(Mode::Antimonotone),
            other => Err(Error::InvalidParams(format!("unknown model '{other}'"))),
        }
    }
}

/// Universe size, cache capacity, fetch delay and model variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: u32,
    pub k: u32,
    #[serde(rename = "Z")]
    pub delay: u32,
    pub mode: Mode,
}

impl ModelParams {
    pub fn new(n: u32, k: u32, delay: u32) -> Result<Self> {
        let params = ModelParams {
            n,
            k,
            delay,
            mode: Mode::Standard,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.delay == 0 {
            return Err(Error::InvalidParams(format!(
                "n, k and Z must be positive (n={}, k={}, Z={})",
                self.n, self.k, self.delay
            )));
        }
        Ok(())
    }

    /// Retrieval time of a fetch dispatched at `dispatched`.
    pub fn return_time(&self, dispatched: Time) -> Time {
        dispatched + self.delay as usize - 1
    }
}

/// A request trace `(i_1, ..., i_T)`; `0` marks an idle slot.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequestSequence(Vec<Item>);

impl RequestSequence {
    pub fn new(items: Vec<Item>) -> Self {
        RequestSequence(items)
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Item requested at 1-based time `t`.
    pub fn at(&self, t: Time) -> Item {
        self.0[t - 1]
    }

    pub fn max_item(&self) -> Item {
        self.0.iter().copied().max().unwrap_or(IDLE)
    }

    pub fn validate(&self, n: u32) -> Result<()> {
        match self.0.iter().position(|&i| i > n) {
            Some(pos) => Err(Error::ItemOutOfRange {
                time: pos + 1,
                item: self.0[pos],
                n,
            }),
            None => Ok(()),
        }
    }

    pub fn push(&mut self, item: Item) {
        self.0.push(item);
    }

    pub fn extend_from_slice(&mut self, items: &[Item]) {
        self.0.extend_from_slice(items);
    }

    pub fn into_inner(self) -> Vec<Item> {
        self.0
    }
}

impl From<Vec<Item>> for RequestSequence {
    fn from(items: Vec<Item>) -> Self {
        RequestSequence(items)
    }
}

/// Resident set of the cache.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CacheState(BTreeSet<Item>);

impl CacheState {
    /// The initial state `{1, ..., k}`.
    pub fn initial(k: u32) -> Self {
        CacheState((1..=k).collect())
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

    /// Resident items in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = Item> + '_ {
        self.0.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<Item> {
        self.iter().collect()
    }

    fn swap(&mut self, evict: Item, insert: Item) {
        self.0.remove(&evict);
        self.0.insert(insert);
    }
}

impl FromIterator<Item> for CacheState {
    fn from_iter<I: IntoIterator<Item = Item>>(iter: I) -> Self {
        CacheState(iter.into_iter().collect())
    }
}

/// A fetch travelling to the backing store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fetch {
    pub item: Item,
    pub dispatched: Time,
}

/// Requests waiting to be served, and the fetches that will serve them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InFlightQueue {
    pending: Vec<(Item, Time)>,
    fetches: VecDeque<Fetch>,
}

impl InFlightQueue {
    pub fn pending(&self) -> &[(Item, Time)] {
        &self.pending
    }

    pub fn fetches(&self) -> impl Iterator<Item = &Fetch> {
        self.fetches.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty() && self.fetches.is_empty()
    }

    /// Earliest dispatch time of an in-flight fetch for `item`.
    fn earliest_fetch(&self, item: Item) -> Option<Time> {
        self.fetches
            .iter()
            .find(|f| f.item == item)
            .map(|f| f.dispatched)
    }
}

/// Eviction choices `(j_1, ..., j_T)`; `0` means nothing was evicted at that step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvictionSequence(Vec<Item>);

impl EvictionSequence {
    pub fn new(choices: Vec<Item>) -> Self {
        EvictionSequence(choices)
    }

    pub fn zeros(len: usize) -> Self {
        EvictionSequence(vec![IDLE; len])
    }

    pub fn choices(&self) -> &[Item] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Everything observable from one complete run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub hit_sequence: HitSequence,
    pub per_request_latency: Vec<Latency>,
    pub eviction_sequence: EvictionSequence,
    /// `S_0, ..., S_T`.
    pub cache_history: Vec<CacheState>,
    pub total_latency: Latency,
}

impl SimulationResult {
    /// Number of non-idle requests that were not full hits.
    pub fn miss_count(&self, sequence: &RequestSequence) -> usize {
        sequence
            .items()
            .iter()
            .zip(self.hit_sequence.bits())
            .filter(|(&i, &b)| i != IDLE && !b)
            .count()
    }
}

/// What happened during one timestep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub time: Time,
    pub item: Item,
    pub hit: bool,
    pub returned: Option<Item>,
    pub eviction: Item,
}

/// Hashable snapshot of everything that influences future latency.
///
/// Pending requests are excluded: their latency is already fixed by the fetches
/// in flight.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateKey {
    clock: Time,
    awaiting: Option<Item>,
    cache: Vec<Item>,
    fetches: Vec<Fetch>,
}

/// Replayable delayed-hits state machine.
///
/// Drive it either with [`Engine::step`], which consults a policy, or with the
/// split [`Engine::begin_step`] / [`Engine::resolve`] pair used by the offline
/// search to branch on caching decisions.
#[derive(Debug, Clone)]
pub struct Engine {
    params: ModelParams,
    clock: Time,
    cache: CacheState,
    queue: InFlightQueue,
    requests: Vec<Item>,
    evictions: Vec<Item>,
    latencies: Vec<Latency>,
    hits: Vec<bool>,
    history: Vec<CacheState>,
    awaiting: Option<Item>,
    served: Latency,
}

impl Engine {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let cache = CacheState::initial(params.k);
        Ok(Engine {
            params,
            clock: 0,
            history: vec![cache.clone()],
            cache,
            queue: InFlightQueue::default(),
            requests: Vec::new(),
            evictions: Vec::new(),
            latencies: Vec::new(),
            hits: Vec::new(),
            awaiting: None,
            served: 0,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Index of the last completed (or in-progress) timestep.
    pub fn clock(&self) -> Time {
        self.clock
    }

    pub fn cache(&self) -> &CacheState {
        &self.cache
    }

    pub fn queue(&self) -> &InFlightQueue {
        &self.queue
    }

    pub fn requests(&self) -> &[Item] {
        &self.requests
    }

    pub fn hits(&self) -> &[bool] {
        &self.hits
    }

    pub fn evictions(&self) -> &[Item] {
        &self.evictions
    }

    /// Item awaiting a caching decision, if any.
    pub fn awaiting(&self) -> Option<Item> {
        self.awaiting
    }

    /// True when no fetch is in flight and no request is waiting.
    pub fn is_quiescent(&self) -> bool {
        self.queue.is_empty() && self.awaiting.is_none()
    }

    /// Runs one full timestep at time `t`, consulting `policy` if a decision arises.
    pub fn step(&mut self, t: Time, item: Item, policy: &mut dyn Policy) -> Result<StepRecord> {
        if t != self.clock + 1 {
            return Err(Error::ClockMismatch {
                expected: self.clock + 1,
                got: t,
            });
        }
        let returned = self.begin_step(item)?;
        let eviction = match returned {
            Some(_) => {
                let choice = policy.decide(&self.observation()?)?;
                self.resolve(choice)?;
                choice
            }
            None => IDLE,
        };
        Ok(StepRecord {
            time: t,
            item,
            hit: self.hits[t - 1],
            returned: returned.or_else(|| self.returned_resident(t)),
            eviction,
        })
    }

    /// Appends `item` and advances one timestep with the next clock value.
    pub fn push(&mut self, item: Item, policy: &mut dyn Policy) -> Result<StepRecord> {
        self.step(self.clock + 1, item, policy)
    }

    fn returned_resident(&self, t: Time) -> Option<Item> {
        let dispatched = t.checked_sub(self.params.delay as usize - 1)?;
        if dispatched == 0 {
            return None;
        }
        let item = self.requests[dispatched - 1];
        let fetched = match self.params.mode {
            Mode::Standard => !self.hits[dispatched - 1],
            Mode::Antimonotone => true,
        };
        (item != IDLE && fetched).then_some(item)
    }

    /// Request phase plus the return/serve part of the retrieval phase.
    ///
    /// Returns the returned item when it is not resident and a caching decision is
    /// required; the step is then completed by [`Engine::resolve`]. Otherwise the
    /// step is complete on return.
    pub fn begin_step(&mut self, item: Item) -> Result<Option<Item>> {
        if self.awaiting.is_some() {
            return Err(Error::DecisionPending { time: self.clock });
        }
        let t = self.clock + 1;
        if item > self.params.n {
            return Err(Error::ItemOutOfRange {
                time: t,
                item,
                n: self.params.n,
            });
        }
        self.clock = t;
        self.requests.push(item);
        self.latencies.push(0);

        if item == IDLE {
            self.hits.push(true);
        } else if self.cache.contains(item) {
            self.hits.push(true);
            if self.params.mode == Mode::Antimonotone {
                self.dispatch(item, t);
            }
        } else {
            self.hits.push(false);
            self.queue.pending.push((item, t));
            self.dispatch(item, t);
        }

        match self.retrieve(t) {
            Some(returned) if !self.cache.contains(returned) => {
                self.awaiting = Some(returned);
                Ok(Some(returned))
            }
            _ => {
                self.close_step(IDLE);
                Ok(None)
            }
        }
    }

    /// Applies a caching decision: `0` declines, otherwise evicts `eviction` for
    /// the returned item.
    pub fn resolve(&mut self, eviction: Item) -> Result<()> {
        let returned = self.awaiting.ok_or(Error::NoDecisionPending)?;
        if eviction != IDLE {
            if !self.cache.contains(eviction) {
                return Err(Error::InfeasibleEviction {
                    time: self.clock,
                    item: eviction,
                });
            }
            self.cache.swap(eviction, returned);
            assert_eq!(
                self.cache.len(),
                self.params.k as usize,
                "cache size drifted"
            );
        }
        self.awaiting = None;
        self.close_step(eviction);
        Ok(())
    }

    /// Observation handed to a policy while a decision is pending.
    pub fn observation(&self) -> Result<Observation<'_>> {
        let returned = self.awaiting.ok_or(Error::NoDecisionPending)?;
        Ok(Observation {
            time: self.clock,
            returned,
            cache: &self.cache,
            requests: &self.requests,
            evictions: &self.evictions,
            params: &self.params,
        })
    }

    fn dispatch(&mut self, item: Item, t: Time) {
        self.queue.fetches.push_back(Fetch {
            item,
            dispatched: t,
        });
    }

    /// Returns the fetch due at `t`, if any, and serves its waiting requests.
    fn retrieve(&mut self, t: Time) -> Option<Item> {
        let due = self.queue.fetches.front()?;
        debug_assert!(self.params.return_time(due.dispatched) >= t);
        if self.params.return_time(due.dispatched) != t {
            return None;
        }
        let fetch = self.queue.fetches.pop_front()?;
        let latencies = &mut self.latencies;
        let served = &mut self.served;
        self.queue.pending.retain(|&(item, requested)| {
            if item != fetch.item {
                return true;
            }
            let latency = (t - requested + 1) as Latency;
            latencies[requested - 1] = latency;
            *served += latency;
            false
        });
        Some(fetch.item)
    }

    fn close_step(&mut self, eviction: Item) {
        self.evictions.push(eviction);
        self.history.push(self.cache.clone());
    }

    /// Latency already determined: served requests plus waiting requests, whose
    /// serving fetch is already in flight.
    pub fn committed_latency(&self) -> Latency {
        let waiting: Latency = self
            .queue
            .pending
            .iter()
            .map(|&(item, requested)| {
                let dispatched = self
                    .queue
                    .earliest_fetch(item)
                    .expect("waiting request without a fetch in flight");
                (self.params.return_time(dispatched) - requested + 1) as Latency
            })
            .sum();
        self.served + waiting
    }

    pub fn state_key(&self) -> StateKey {
        StateKey {
            clock: self.clock,
            awaiting: self.awaiting,
            cache: self.cache.to_vec(),
            fetches: self.queue.fetches.iter().copied().collect(),
        }
    }

    /// Runs retrieval-only steps until every waiting request is served, then
    /// assembles the result. Policies are not consulted while draining.
    pub fn finish(mut self) -> Result<SimulationResult> {
        if self.awaiting.is_some() {
            return Err(Error::DecisionPending { time: self.clock });
        }
        let mut t = self.clock;
        while !self.queue.fetches.is_empty() {
            t += 1;
            self.retrieve(t);
        }
        debug_assert!(self.queue.pending.is_empty());
        Ok(SimulationResult {
            hit_sequence: HitSequence::new(self.hits),
            total_latency: self.served,
            per_request_latency: self.latencies,
            eviction_sequence: EvictionSequence(self.evictions),
            cache_history: self.history,
        })
    }
}

/// Runs `policy` over the whole sequence and drains the queue.
pub fn simulate(
    params: ModelParams,
    sequence: &RequestSequence,
    policy: &mut dyn Policy,
) -> Result<SimulationResult> {
    sequence.validate(params.n)?;
    let mut engine = Engine::new(params)?;
    for (idx, &item) in sequence.items().iter().enumerate() {
        engine.step(idx + 1, item, policy)?;
    }
    engine.finish()
}

/// Replays a fixed eviction schedule.
///
/// A nonzero choice at a step that offers no caching decision is reported as an
/// infeasible eviction, as is the eviction of a non-resident item.
pub fn replay(
    params: ModelParams,
    sequence: &RequestSequence,
    evictions: &EvictionSequence,
) -> Result<SimulationResult> {
    if evictions.len() != sequence.len() {
        return Err(Error::LengthMismatch {
            expected: sequence.len(),
            got: evictions.len(),
        });
    }
    let mut script = crate::policy::Scripted::new(evictions.clone());
    let result = simulate(params, sequence, &mut script)?;
    if let Some(t) = result
        .eviction_sequence
        .choices()
        .iter()
        .zip(evictions.choices())
        .position(|(got, want)| got != want)
    {
        return Err(Error::InfeasibleEviction {
            time: t + 1,
            item: evictions.choices()[t],
        });
    }
    Ok(result)
}
