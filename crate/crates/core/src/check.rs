//! Randomized property suites.
//!
//! Each case draws from its own seeded stream, so results do not depend on how
//! cases are scheduled across threads. Counts and the first failing case (by
//! index) are reported.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::latency::{antimonotone_latency, delayed_hits_latency, dominates, HitSequence};
use crate::model::{simulate, Mode, IDLE};
use crate::policy::{Fifo, Lru, Policy};
use crate::reduction::verify_domination;
use crate::workload::{
    case_rng, random_bits, random_instance, random_policy_kind, random_static_set, InstanceSpace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Simulated latency equals the closed-form latency of the simulated hits.
    Latency,
    /// The fetch-on-hit latency never increases when hits are added.
    Antimono,
    /// The wrapped policy never loses to its inner policy on any request.
    Reduction,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Latency => "latency",
            Suite::Antimono => "antimono",
            Suite::Reduction => "reduction",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "latency" => Ok(Suite::Latency),
            "antimono" => Ok(Suite::Antimono),
            "reduction" => Ok(Suite::Reduction),
            other => Err(Error::InvalidParams(format!("unknown suite '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseFailure {
    pub case: u64,
    pub witness: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: Suite,
    pub seed: u64,
    pub cases: u64,
    pub passed: u64,
    pub failed: u64,
    /// Individual assertions evaluated across all cases.
    pub checks: u64,
    pub first_failure: Option<CaseFailure>,
}

impl CheckReport {
    pub fn is_clean(&self) -> bool {
        self.failed == 0
    }
}

type CaseOutcome = std::result::Result<u64, serde_json::Value>;

pub fn run_suite(suite: Suite, cases: u64, seed: u64) -> CheckReport {
    let outcomes: Vec<CaseOutcome> = (0..cases)
        .into_par_iter()
        .map(|case| match suite {
            Suite::Latency => latency_case(seed, case),
            Suite::Antimono => antimono_case(seed, case),
            Suite::Reduction => reduction_case(seed, case),
        })
        .collect();

    let mut report = CheckReport {
        suite,
        seed,
        cases,
        passed: 0,
        failed: 0,
        checks: 0,
        first_failure: None,
    };
    for (case, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(checks) => {
                report.passed += 1;
                report.checks += checks;
            }
            Err(witness) => {
                report.failed += 1;
                report.first_failure.get_or_insert(CaseFailure {
                    case: case as u64,
                    witness,
                });
            }
        }
    }
    report
}

fn error_witness(e: Error) -> serde_json::Value {
    json!({ "error": e.to_string() })
}

fn latency_case(seed: u64, case: u64) -> CaseOutcome {
    let mut rng = case_rng(seed, case);
    let (params, seq) = random_instance(&mut rng, &InstanceSpace::default());
    let kind = random_policy_kind(&mut rng);
    let static_set = random_static_set(&mut rng, &params);
    let policy_seed: u64 = rng.gen();
    let mut checks = 0;

    for mode in [Mode::Standard, Mode::Antimonotone] {
        let p = params.with_mode(mode);
        let mut policy = kind.build(&seq, Some(&static_set), policy_seed);
        let res = simulate(p, &seq, &mut policy).map_err(error_witness)?;
        let closed = match mode {
            Mode::Standard => delayed_hits_latency(&seq, p.delay, &res.hit_sequence),
            Mode::Antimonotone => antimonotone_latency(&seq, p.delay, &res.hit_sequence),
        }
        .map_err(error_witness)?;
        let in_range = res.per_request_latency.iter().all(|&l| l <= p.delay as u64);
        let hits_free = seq
            .items()
            .iter()
            .zip(res.hit_sequence.bits())
            .zip(&res.per_request_latency)
            .all(|((&i, &b), &l)| !(b || i == IDLE) || l == 0);
        let unit_delay = p.delay != 1 || res.total_latency == res.miss_count(&seq) as u64;
        checks += 4;
        if closed.per_request != res.per_request_latency
            || closed.total != res.total_latency
            || !in_range
            || !hits_free
            || !unit_delay
        {
            return Err(json!({
                "params": p,
                "policy": kind.as_str(),
                "sequence": seq,
                "hits": res.hit_sequence,
                "simulated": res.per_request_latency,
                "closed_form": closed.per_request,
            }));
        }
    }
    Ok(checks)
}

fn antimono_case(seed: u64, case: u64) -> CaseOutcome {
    let mut rng = case_rng(seed, case);
    let (params, seq) = random_instance(&mut rng, &InstanceSpace::default());
    let b = random_bits(&mut rng, seq.len()).normalized(&seq);
    let base = antimonotone_latency(&seq, params.delay, &b).map_err(error_witness)?;
    let mut checks = 0;

    let fail = |upper: &HitSequence, lo: u64, hi: u64| {
        json!({
            "params": params,
            "sequence": seq,
            "b": b,
            "b_prime": upper,
            "latency_b": lo,
            "latency_b_prime": hi,
        })
    };

    for t in 1..=seq.len() {
        if b.at(t) {
            continue;
        }
        let mut flipped = b.clone();
        flipped.set(t, true);
        let lat = antimonotone_latency(&seq, params.delay, &flipped).map_err(error_witness)?;
        checks += 1;
        if lat.total > base.total {
            return Err(fail(&flipped, base.total, lat.total));
        }
    }

    let upper = HitSequence::new(
        b.bits()
            .iter()
            .map(|&bit| bit || rng.gen_bool(0.5))
            .collect(),
    );
    debug_assert!(dominates(&b, &upper).unwrap_or(false));
    let lat = antimonotone_latency(&seq, params.delay, &upper).map_err(error_witness)?;
    checks += 1;
    if lat.total > base.total {
        return Err(fail(&upper, base.total, lat.total));
    }
    Ok(checks)
}

fn reduction_case(seed: u64, case: u64) -> CaseOutcome {
    let mut rng = case_rng(seed, case);
    let space = InstanceSpace {
        len: 1..=200,
        ..InstanceSpace::default()
    };
    let (params, seq) = random_instance(&mut rng, &space);
    let use_lru = rng.gen_bool(0.5);
    let make = move || -> Box<dyn Policy + Send> {
        if use_lru {
            Box::new(Lru)
        } else {
            Box::<Fifo>::default()
        }
    };
    let report = verify_domination(&seq, &make, params).map_err(error_witness)?;
    let capacity_ok = report.max_protected <= (params.k + params.delay) as usize;
    if !report.holds() || !capacity_ok {
        return Err(json!({
            "params": params,
            "inner_policy": report.inner_policy,
            "sequence": seq,
            "violations": report.violations,
            "max_protected": report.max_protected,
        }));
    }
    Ok(seq.len() as u64 + 1)
}
