//! Reference implementations written straight from the definitions, sharing no
//! code with the library beyond its data types.

#![allow(dead_code)]

use delayhit::{Error, Item, Latency, ModelParams, Policy, RequestSequence, IDLE};

/// Per-request latency of hit bits `b`. With `ignore_bits_for_origin`, the
/// earliest same-item request in the window counts whether or not it hit.
pub fn latency_by_definition(
    seq: &[Item],
    delay: u32,
    b: &[bool],
    ignore_bits_for_origin: bool,
) -> Vec<Latency> {
    let z = delay as usize;
    (0..seq.len())
        .map(|t| {
            if seq[t] == IDLE || b[t] {
                return 0;
            }
            let lo = (t + 1).saturating_sub(z);
            let origin = (lo..=t)
                .find(|&u| seq[u] == seq[t] && (ignore_bits_for_origin || !b[u]))
                .expect("t itself qualifies");
            (z - (t - origin)) as Latency
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classical {
    Lru,
    Fifo,
    /// Furthest next use among residents and the newcomer; the newcomer may be bypassed.
    Belady,
}

/// Misses of classical demand paging with initial cache `{1..k}`.
pub fn classical_misses(seq: &[Item], k: u32, rule: Classical) -> usize {
    // resident -> (last use, insertion time); the initial items count as time 0
    let mut cache: Vec<(Item, usize, usize)> = (1..=k).map(|i| (i, 0, 0)).collect();
    let mut misses = 0;
    for (idx, &item) in seq.iter().enumerate() {
        let t = idx + 1;
        if item == IDLE {
            continue;
        }
        if let Some(slot) = cache.iter_mut().find(|s| s.0 == item) {
            slot.1 = t;
            continue;
        }
        misses += 1;
        let victim = match rule {
            Classical::Lru => cache.iter().min_by_key(|s| (s.1, s.0)).map(|s| s.0),
            Classical::Fifo => cache.iter().min_by_key(|s| (s.2, s.0)).map(|s| s.0),
            Classical::Belady => {
                let next = |x: Item| seq[t..].iter().position(|&r| r == x).unwrap_or(usize::MAX);
                let worst = cache
                    .iter()
                    .map(|s| s.0)
                    .chain([item])
                    .max_by_key(|&x| next(x))
                    .unwrap();
                (worst != item).then_some(worst)
            }
        };
        if let Some(v) = victim {
            cache.retain(|s| s.0 != v);
            cache.push((item, t, t));
        }
    }
    misses
}

/// Follows a fixed prefix of decisions; at the first decision past it, records
/// the available options and aborts the run.
struct Prefix<'a> {
    choices: &'a [Item],
    next: usize,
    options: Option<Vec<Item>>,
}

impl Policy for Prefix<'_> {
    fn name(&self) -> &str {
        "prefix"
    }

    fn decide(&mut self, obs: &delayhit::policy::Observation<'_>) -> delayhit::Result<Item> {
        if let Some(&c) = self.choices.get(self.next) {
            self.next += 1;
            return Ok(c);
        }
        let mut opts = vec![IDLE];
        opts.extend(obs.cache.iter());
        self.options = Some(opts);
        Err(Error::DecisionPending { time: obs.time })
    }
}

/// Minimum total latency by enumerating every decision vector and re-running
/// the simulator from scratch for each prefix. Exponential; tiny inputs only.
pub fn naive_opt(params: ModelParams, seq: &RequestSequence) -> Latency {
    fn go(params: ModelParams, seq: &RequestSequence, prefix: &mut Vec<Item>) -> Latency {
        let mut p = Prefix {
            choices: prefix,
            next: 0,
            options: None,
        };
        match delayhit::simulate(params, seq, &mut p) {
            Ok(res) => res.total_latency,
            Err(_) => {
                let options = p.options.expect("aborted at a decision");
                options
                    .into_iter()
                    .map(|c| {
                        prefix.push(c);
                        let v = go(params, seq, prefix);
                        prefix.pop();
                        v
                    })
                    .min()
                    .unwrap()
            }
        }
    }
    go(params, seq, &mut Vec::new())
}
