//! Exact simulation and analysis of caching with delayed hits.
//!
//! A cache of `k` items sits in front of a backing store that takes `Z`
//! timesteps to answer. Requests that miss while a fetch for the same item is
//! already outstanding pay only the remaining wait. This crate provides:
//!
//! * [`model`]: the step-by-step state machine, in the standard and
//!   fetch-on-hit (antimonotone) variants;
//! * [`latency`]: closed-form latency of a hit sequence and the bit-vector order;
//! * [`policy`]: LRU, FIFO, static, Belady and friends;
//! * [`opt`]: exact offline optimum and hit-sequence feasibility for small traces;
//! * [`adversary`]: the adaptive trace that makes any deterministic online policy
//!   pay `Omega(kZ)` times the optimum;
//! * [`counterexample`]: a trace where an extra hit increases latency;
//! * [`reduction`]: running a fetch-on-hit policy in the standard model with
//!   `Z` extra cache slots, never doing worse on any request.
//!
//! All times and latencies are integers.

pub mod adversary;
pub mod check;
pub mod counterexample;
pub mod error;
pub mod latency;
pub mod model;
pub mod opt;
pub mod policy;
pub mod reduction;
pub mod report;
pub mod trace;
pub mod workload;

pub use error::{Error, Result};
pub use latency::{
    antimonotone_latency, delayed_hits_latency, dominates, HitSequence, LatencyBreakdown,
};
pub use model::{
    replay, simulate, CacheState, Engine, EvictionSequence, InFlightQueue, Item, Latency, Mode,
    ModelParams, RequestSequence, SimulationResult, StepRecord, Time, IDLE,
};
pub use opt::{brute_force_opt, is_hit_sequence_feasible, OptResult, SearchLimits};
pub use policy::{Belady, Fifo, Lru, NeverCache, Policy, PolicyKind, RandomEviction, StaticSet};
pub use report::{Ratio, ReportEnvelope, ReportParams};
