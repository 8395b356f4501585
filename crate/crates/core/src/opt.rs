//! Exact offline search over caching decisions for small instances.
//!
//! Decisions only arise when a returned item is not resident, with `k + 1`
//! options each (decline, or evict one of the `k` residents). The search walks
//! them depth-first in time order, trying the options in ascending item order,
//! and prunes with the latency already committed by the engine plus a memo of
//! the cheapest cost seen for each engine state.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latency::HitSequence;
use crate::model::{
    simulate, Engine, EvictionSequence, Item, Latency, ModelParams, RequestSequence, StateKey, IDLE,
};
use crate::policy::{Belady, Lru, Policy};

/// Search budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_nodes: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_nodes: 1 << 22 }
    }
}

/// Optimal offline latency and one schedule attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptResult {
    pub min_latency: Latency,
    pub witness_evictions: EvictionSequence,
    pub witness_hits: HitSequence,
    pub nodes: u64,
}

struct Budget {
    used: u64,
    limit: u64,
}

impl Budget {
    fn new(limits: SearchLimits) -> Self {
        Budget {
            used: 0,
            limit: limits.max_nodes,
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            return Err(Error::BudgetExceeded { limit: self.limit });
        }
        Ok(())
    }
}

/// Feeds requests until a decision is pending or the trace is exhausted.
/// Returns true if a decision is pending.
fn advance(engine: &mut Engine, sequence: &RequestSequence) -> Result<bool> {
    while engine.clock() < sequence.len() {
        let item = sequence.at(engine.clock() + 1);
        if engine.begin_step(item)?.is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

fn options(engine: &Engine) -> Vec<Item> {
    std::iter::once(IDLE).chain(engine.cache().iter()).collect()
}

struct OptSearch<'a> {
    sequence: &'a RequestSequence,
    budget: Budget,
    ceiling: Latency,
    best: Option<(Latency, Engine)>,
    memo: HashMap<StateKey, Latency>,
}

impl OptSearch<'_> {
    fn visit(&mut self, mut engine: Engine) -> Result<()> {
        self.budget.tick()?;
        let pending = advance(&mut engine, self.sequence)?;
        let committed = engine.committed_latency();
        if committed > self.ceiling || self.best.as_ref().is_some_and(|(b, _)| committed >= *b) {
            return Ok(());
        }
        if !pending {
            let total = engine.clone().finish()?.total_latency;
            debug_assert_eq!(total, committed);
            self.best = Some((total, engine));
            return Ok(());
        }
        match self.memo.get(&engine.state_key()) {
            Some(&seen) if seen <= committed => return Ok(()),
            _ => {
                self.memo.insert(engine.state_key(), committed);
            }
        }
        for choice in options(&engine) {
            let mut child = engine.clone();
            child.resolve(choice)?;
            self.visit(child)?;
        }
        Ok(())
    }
}

/// Minimum total latency over all eviction schedules, with a canonical witness
/// (the lexicographically smallest optimal decision sequence).
pub fn brute_force_opt(
    params: ModelParams,
    sequence: &RequestSequence,
    limits: SearchLimits,
) -> Result<OptResult> {
    sequence.validate(params.n)?;
    let heuristic = [
        simulate(params, sequence, &mut Lru)?.total_latency,
        simulate(params, sequence, &mut Belady::new(sequence.clone()))?.total_latency,
    ]
    .into_iter()
    .min()
    .unwrap_or(0);
    let mut search = OptSearch {
        sequence,
        budget: Budget::new(limits),
        ceiling: heuristic,
        best: None,
        memo: HashMap::new(),
    };
    search.visit(Engine::new(params)?)?;
    let (min_latency, engine) = search
        .best
        .expect("the heuristic schedule is always within the ceiling");
    let result = engine.finish()?;
    Ok(OptResult {
        min_latency,
        witness_evictions: result.eviction_sequence,
        witness_hits: result.hit_sequence,
        nodes: search.budget.used,
    })
}

/// Whether some eviction schedule produces exactly `b` (idle bits ignored),
/// with a witness schedule when it does.
pub fn is_hit_sequence_feasible(
    params: ModelParams,
    sequence: &RequestSequence,
    b: &HitSequence,
    limits: SearchLimits,
) -> Result<Option<EvictionSequence>> {
    sequence.validate(params.n)?;
    if b.len() != sequence.len() {
        return Err(Error::LengthMismatch {
            expected: sequence.len(),
            got: b.len(),
        });
    }
    let target = b.normalized(sequence);
    let mut budget = Budget::new(limits);
    let mut dead: HashSet<StateKey> = HashSet::new();

    fn visit(
        mut engine: Engine,
        sequence: &RequestSequence,
        target: &HitSequence,
        budget: &mut Budget,
        dead: &mut HashSet<StateKey>,
    ) -> Result<Option<EvictionSequence>> {
        budget.tick()?;
        let pending = advance(&mut engine, sequence)?;
        if engine.hits() != &target.bits()[..engine.hits().len()] {
            return Ok(None);
        }
        if !pending {
            return Ok(Some(engine.finish()?.eviction_sequence));
        }
        // With the hit prefix pinned, the engine state alone decides the future.
        if !dead.insert(engine.state_key()) {
            return Ok(None);
        }
        for choice in options(&engine) {
            let mut child = engine.clone();
            child.resolve(choice)?;
            if let Some(w) = visit(child, sequence, target, budget, dead)? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }

    visit(
        Engine::new(params)?,
        sequence,
        &target,
        &mut budget,
        &mut dead,
    )
}

/// A feasible hit sequence with its latency and one schedule realising it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibleOutcome {
    pub hits: HitSequence,
    pub latency: Latency,
    pub witness: EvictionSequence,
}

/// Every distinct feasible hit sequence, ordered by hit sequence.
pub fn feasible_hit_sequences(
    params: ModelParams,
    sequence: &RequestSequence,
    limits: SearchLimits,
) -> Result<Vec<FeasibleOutcome>> {
    sequence.validate(params.n)?;
    let mut budget = Budget::new(limits);
    let mut seen: HashSet<(StateKey, Vec<bool>)> = HashSet::new();
    let mut found: BTreeMap<HitSequence, FeasibleOutcome> = BTreeMap::new();

    let mut stack = vec![Engine::new(params)?];
    while let Some(mut engine) = stack.pop() {
        budget.tick()?;
        if !advance(&mut engine, sequence)? {
            let result = engine.finish()?;
            found
                .entry(result.hit_sequence.clone())
                .or_insert(FeasibleOutcome {
                    hits: result.hit_sequence,
                    latency: result.total_latency,
                    witness: result.eviction_sequence,
                });
            continue;
        }
        if !seen.insert((engine.state_key(), engine.hits().to_vec())) {
            continue;
        }
        for choice in options(&engine).into_iter().rev() {
            let mut child = engine.clone();
            child.resolve(choice)?;
            stack.push(child);
        }
    }
    Ok(found.into_values().collect())
}

/// The minimum latency and every feasible hit sequence attaining it.
pub fn optimal_hit_sequences(
    params: ModelParams,
    sequence: &RequestSequence,
    limits: SearchLimits,
) -> Result<(Latency, Vec<FeasibleOutcome>)> {
    let all = feasible_hit_sequences(params, sequence, limits)?;
    let min = all.iter().map(|o| o.latency).min().unwrap_or(0);
    Ok((min, all.into_iter().filter(|o| o.latency == min).collect()))
}

/// Convenience: latency of `policy` compared against the exact optimum.
pub fn policy_vs_opt(
    params: ModelParams,
    sequence: &RequestSequence,
    policy: &mut dyn Policy,
    limits: SearchLimits,
) -> Result<(Latency, OptResult)> {
    let latency = simulate(params, sequence, policy)?.total_latency;
    Ok((latency, brute_force_opt(params, sequence, limits)?))
}
