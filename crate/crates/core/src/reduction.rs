//! Running an antimonotone-model policy inside the standard model.
//!
//! The wrapped policy `B` owns a cache of `k + Z` slots and simulates the inner
//! policy `A` (cache `k`, antimonotone model) step for step. `B` never evicts an
//! item of `A`'s cache (`s0`) nor an item requested during the last `Z` steps
//! (`s1`). Those are exactly the items whose antimonotone-model fetch is still
//! outstanding, which is the only way `A` can beat a plain miss. Every other
//! slot is free for reuse, smallest index first.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    simulate, Engine, Item, Latency, Mode, ModelParams, RequestSequence, Time, IDLE,
};
use crate::policy::{Observation, Policy};

/// Snapshot of the wrapped policy's bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionState {
    /// Inner policy's cache.
    pub s0: BTreeSet<Item>,
    /// Items requested during the last `window` steps.
    pub s1: BTreeSet<Item>,
    pub inner_clock: Time,
}

pub struct ReductionPolicy {
    name: String,
    inner: Box<dyn Policy + Send>,
    engine: Engine,
    window: usize,
    max_protected: usize,
}

impl ReductionPolicy {
    /// `inner_params` describes `A`: cache `k`; the mode is forced to antimonotone.
    pub fn new(inner: Box<dyn Policy + Send>, inner_params: ModelParams) -> Result<Self> {
        let params = inner_params.with_mode(Mode::Antimonotone);
        Ok(ReductionPolicy {
            name: format!("reduction({})", inner.name()),
            inner,
            engine: Engine::new(params)?,
            window: params.delay as usize,
            max_protected: 0,
        })
    }

    /// Overrides the recent-request window (defaults to `Z`).
    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    /// Parameters for the outer standard-model run: cache `k + window`.
    pub fn outer_params(&self) -> ModelParams {
        let inner = self.engine.params();
        ModelParams {
            k: inner.k + self.window as u32,
            mode: Mode::Standard,
            ..*inner
        }
    }

    /// Largest `|s0 ∪ s1|` seen at any decision.
    pub fn max_protected(&self) -> usize {
        self.max_protected
    }

    pub fn state(&self, requests: &[Item]) -> ReductionState {
        ReductionState {
            s0: self.engine.cache().iter().collect(),
            s1: self.recent(requests),
            inner_clock: self.engine.clock(),
        }
    }

    fn recent(&self, requests: &[Item]) -> BTreeSet<Item> {
        let start = requests.len().saturating_sub(self.window);
        requests[start..]
            .iter()
            .copied()
            .filter(|&i| i != IDLE)
            .collect()
    }

    fn catch_up(&mut self, requests: &[Item]) -> Result<()> {
        while self.engine.clock() < requests.len() {
            let t = self.engine.clock() + 1;
            self.engine.step(t, requests[t - 1], &mut self.inner)?;
        }
        Ok(())
    }
}

impl Policy for ReductionPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<Item> {
        self.catch_up(obs.requests)?;
        let mut protected = self.recent(obs.requests);
        protected.extend(self.engine.cache().iter());
        self.max_protected = self.max_protected.max(protected.len());
        if !protected.contains(&obs.returned) {
            return Ok(IDLE);
        }
        Ok(obs
            .cache
            .iter()
            .find(|item| !protected.contains(item))
            .unwrap_or(IDLE))
    }
}

/// Wraps `inner` (cache `k`, antimonotone model) into a standard-model policy
/// for a cache of `k + Z`.
pub fn wrap_reduction(
    inner: Box<dyn Policy + Send>,
    inner_params: ModelParams,
) -> Result<ReductionPolicy> {
    ReductionPolicy::new(inner, inner_params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominationViolation {
    pub time: Time,
    pub inner_latency: Latency,
    pub wrapped_latency: Latency,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominationReport {
    pub inner_policy: String,
    pub inner_latencies: Vec<Latency>,
    pub wrapped_latencies: Vec<Latency>,
    pub inner_total: Latency,
    pub wrapped_total: Latency,
    pub max_protected: usize,
    pub violations: Vec<DominationViolation>,
}

impl DominationReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.wrapped_total <= self.inner_total
    }

    pub fn first_violation(&self) -> Option<Error> {
        self.violations.first().map(|v| Error::Violation {
            check: "domination",
            detail: format!(
                "t={}: wrapped latency {} > inner latency {}",
                v.time, v.wrapped_latency, v.inner_latency
            ),
        })
    }
}

/// Runs `A` in the antimonotone model with cache `k` and the wrapped `B` in the
/// standard model with cache `k + Z`, and compares them request by request.
pub fn verify_domination(
    sequence: &RequestSequence,
    make_inner: &dyn Fn() -> Box<dyn Policy + Send>,
    params: ModelParams,
) -> Result<DominationReport> {
    let inner_params = params.with_mode(Mode::Antimonotone);
    let mut inner = make_inner();
    let inner_name = inner.name().to_string();
    let a = simulate(inner_params, sequence, &mut inner)?;

    let mut wrapped = wrap_reduction(make_inner(), inner_params)?;
    let b = simulate(wrapped.outer_params(), sequence, &mut wrapped)?;

    let violations = a
        .per_request_latency
        .iter()
        .zip(&b.per_request_latency)
        .enumerate()
        .filter(|(_, (a, b))| b > a)
        .map(|(idx, (&a, &b))| DominationViolation {
            time: idx + 1,
            inner_latency: a,
            wrapped_latency: b,
        })
        .collect();

    Ok(DominationReport {
        inner_policy: inner_name,
        inner_total: a.total_latency,
        wrapped_total: b.total_latency,
        inner_latencies: a.per_request_latency,
        wrapped_latencies: b.per_request_latency,
        max_protected: wrapped.max_protected(),
        violations,
    })
}
