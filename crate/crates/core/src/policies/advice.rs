use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ceil_log2, counter_width, slot_hash, Choice, Policy, StateSpace};
use crate::error::{Error, Result};

/// Bins holding at least `threshold` balls, with their counts, sorted by bin.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdviceList {
    pub threshold: u32,
    pub entries: Vec<(usize, u32)>,
}

impl AdviceList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The advice oracle: every bin whose load is at least `threshold`.
pub fn build_advice(loads: &[u32], threshold: u32) -> Result<AdviceList> {
    if threshold == 0 {
        return Err(Error::InvalidConfig("advice threshold must be at least 1".into()));
    }
    let entries = loads
        .iter()
        .enumerate()
        .filter(|(_, &l)| l >= threshold)
        .map(|(i, &l)| (i, l))
        .collect();
    Ok(AdviceList { threshold, entries })
}

/// Memoryless policy driven by per-ball advice about overloaded bins.
///
/// Before every ball it receives the list of bins with load at least `T`.
/// A listed bin is avoided whenever its pair-mate is unlisted; two listed
/// bins are compared by count; two unlisted bins resolve to the first.
///
/// The list is maintained incrementally from the bin that received the
/// previous ball, which yields exactly what [`build_advice`] would return
/// on the true loads since loads never decrease.
#[derive(Clone, Debug)]
pub struct AdvicePolicy {
    threshold: u32,
    list: BTreeMap<usize, u32>,
    id: u64,
    n: usize,
    balls: u64,
    max_bits: u64,
    list_bound: Option<f64>,
    bound_violations: u64,
}

impl AdvicePolicy {
    pub fn new(threshold: u32) -> Result<Self> {
        if threshold == 0 {
            return Err(Error::InvalidConfig("advice threshold must be at least 1".into()));
        }
        Ok(Self {
            threshold,
            list: BTreeMap::new(),
            id: 0,
            n: 0,
            balls: 0,
            max_bits: 0,
            list_bound: None,
            bound_violations: 0,
        })
    }

    /// Count the steps at which the advice list is longer than `bound`.
    pub fn with_list_bound(mut self, bound: f64) -> Self {
        self.list_bound = Some(bound);
        self
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    /// Replace the current advice outright.
    pub fn set_advice(&mut self, advice: &AdviceList) {
        self.list = advice.entries.iter().copied().collect();
        self.id = self
            .list
            .iter()
            .fold(0u64, |acc, (&b, &c)| acc.wrapping_add(slot_hash(b, c)));
        self.record_size();
    }

    pub fn advice(&self) -> AdviceList {
        AdviceList {
            threshold: self.threshold,
            entries: self.list.iter().map(|(&b, &c)| (b, c)).collect(),
        }
    }

    /// Steps at which the list exceeded the configured bound.
    pub fn bound_violations(&self) -> u64 {
        self.bound_violations
    }

    fn advice_bits(&self) -> u64 {
        let entry = ceil_log2(self.n.max(1) as u64) as u64 + counter_width(self.balls) as u64;
        self.list.len() as u64 * entry
    }

    fn record_size(&mut self) {
        self.max_bits = self.max_bits.max(self.advice_bits());
        if let Some(bound) = self.list_bound {
            if self.list.len() as f64 > bound {
                self.bound_violations += 1;
            }
        }
    }

    fn set_entry(&mut self, bin: usize, count: u32) {
        if let Some(old) = self.list.insert(bin, count) {
            self.id = self.id.wrapping_sub(slot_hash(bin, old));
        }
        self.id = self.id.wrapping_add(slot_hash(bin, count));
    }
}

impl Policy for AdvicePolicy {
    fn name(&self) -> &str {
        "advice"
    }

    fn reset(&mut self, n: usize, balls: u64) {
        self.n = n;
        self.balls = balls;
        self.list.clear();
        self.id = 0;
        self.max_bits = 0;
        self.bound_violations = 0;
    }

    fn dims(&self) -> Option<(usize, u64)> {
        (self.n > 0).then_some((self.n, self.balls))
    }

    fn observe(&mut self, loads: &[u32], last_placed: Option<usize>) {
        match last_placed {
            Some(bin) => {
                if loads[bin] >= self.threshold {
                    self.set_entry(bin, loads[bin]);
                }
            }
            None => {
                self.list.clear();
                self.id = 0;
                for (bin, &l) in loads.iter().enumerate() {
                    if l >= self.threshold {
                        self.set_entry(bin, l);
                    }
                }
            }
        }
        self.record_size();
    }

    fn choice(&self, bin_a: usize, bin_b: usize) -> Choice {
        if bin_a == bin_b {
            return Choice::Bin(bin_a);
        }
        match (self.list.get(&bin_a), self.list.get(&bin_b)) {
            (Some(_), None) => Choice::Bin(bin_b),
            (None, Some(_)) => Choice::Bin(bin_a),
            (Some(ca), Some(cb)) => match ca.cmp(cb) {
                std::cmp::Ordering::Less => Choice::Bin(bin_a),
                std::cmp::Ordering::Greater => Choice::Bin(bin_b),
                std::cmp::Ordering::Equal => Choice::coin(bin_a, bin_b),
            },
            (None, None) => Choice::Bin(bin_a),
        }
    }

    fn update(&mut self, _bin_a: usize, _bin_b: usize, _chosen: usize) {}

    fn state_id(&self) -> u64 {
        self.id
    }

    fn state_key(&self) -> Vec<u32> {
        self.list.iter().flat_map(|(&b, &c)| [b as u32, c]).collect()
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Declared
    }

    fn memory_bits(&self) -> u64 {
        self.max_bits
    }

    fn clone_box(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}
