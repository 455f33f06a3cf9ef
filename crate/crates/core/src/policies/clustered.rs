use serde::{Deserialize, Serialize};

use super::{counter_width, slot_hash, Choice, Policy, StateSpace};
use crate::error::{Error, Result};

/// Layout of the per-cluster counters: bins `k*c .. (k+1)*c` form cluster
/// `k`, and each cluster keeps one saturating ball counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub cluster_size: usize,
    pub counter_cap: u32,
}

impl ClusterConfig {
    pub fn new(cluster_size: usize, counter_cap: u32) -> Result<Self> {
        if cluster_size == 0 {
            return Err(Error::InvalidConfig("cluster size must be at least 1".into()));
        }
        if counter_cap == 0 {
            return Err(Error::InvalidConfig("counter cap must be at least 1".into()));
        }
        Ok(Self {
            cluster_size,
            counter_cap,
        })
    }

    /// `c = ceil(log2 log2 n)` (at least 1) with cap `4c`.
    pub fn default_for(n: usize) -> Self {
        let c = default_cluster_size(n);
        Self {
            cluster_size: c,
            counter_cap: 4 * c as u32,
        }
    }

    pub fn counter_width(&self) -> u32 {
        counter_width(self.counter_cap as u64)
    }

    pub fn clusters(&self, n: usize) -> usize {
        n.div_ceil(self.cluster_size)
    }

    pub fn total_bits(&self, n: usize) -> u64 {
        self.clusters(n) as u64 * self.counter_width() as u64
    }
}

pub(crate) fn default_cluster_size(n: usize) -> usize {
    let lg = (n as f64).log2();
    if lg <= 1.0 {
        return 1;
    }
    (lg.log2().ceil() as usize).max(1)
}

/// Two-choice over cluster totals: the ball goes to whichever offered bin
/// sits in the cluster with the smaller counter.
#[derive(Clone, Debug)]
pub struct ClusteredPolicy {
    config: ClusterConfig,
    counters: Vec<u32>,
    n: usize,
    balls: u64,
    id: u64,
}

impl ClusteredPolicy {
    pub fn new(config: ClusterConfig) -> Self {
        Self {
            config,
            counters: Vec::new(),
            n: 0,
            balls: 0,
            id: 0,
        }
    }

    /// A policy over `n` bins whose counters already hold `counters`.
    pub fn with_counters(config: ClusterConfig, n: usize, counters: Vec<u32>) -> Result<Self> {
        if counters.len() != config.clusters(n) {
            return Err(Error::InvalidConfig(format!(
                "expected {} counters for n = {n}, got {}",
                config.clusters(n),
                counters.len()
            )));
        }
        if let Some(c) = counters.iter().find(|&&c| c > config.counter_cap) {
            return Err(Error::InvalidConfig(format!(
                "counter value {c} exceeds cap {}",
                config.counter_cap
            )));
        }
        let id = counters
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &c)| acc.wrapping_add(slot_hash(k, c)));
        Ok(Self {
            config,
            counters,
            n,
            balls: n as u64,
            id,
        })
    }

    pub fn config(&self) -> &ClusterConfig {
        &self.config
    }

    pub fn counters(&self) -> &[u32] {
        &self.counters
    }

    #[inline]
    pub fn cluster_of(&self, bin: usize) -> usize {
        bin / self.config.cluster_size
    }
}

impl Policy for ClusteredPolicy {
    fn name(&self) -> &str {
        "clustered"
    }

    fn reset(&mut self, n: usize, balls: u64) {
        self.n = n;
        self.balls = balls;
        self.counters.clear();
        self.counters.resize(self.config.clusters(n), 0);
        self.id = 0;
    }

    fn dims(&self) -> Option<(usize, u64)> {
        (self.n > 0).then_some((self.n, self.balls))
    }

    fn choice(&self, bin_a: usize, bin_b: usize) -> Choice {
        if bin_a == bin_b {
            return Choice::Bin(bin_a);
        }
        let ca = self.counters[self.cluster_of(bin_a)];
        let cb = self.counters[self.cluster_of(bin_b)];
        match ca.cmp(&cb) {
            std::cmp::Ordering::Less => Choice::Bin(bin_a),
            std::cmp::Ordering::Greater => Choice::Bin(bin_b),
            std::cmp::Ordering::Equal => Choice::coin(bin_a, bin_b),
        }
    }

    fn update(&mut self, _bin_a: usize, _bin_b: usize, chosen: usize) {
        let k = self.cluster_of(chosen);
        let old = self.counters[k];
        if old < self.config.counter_cap {
            self.counters[k] = old + 1;
            self.id = self
                .id
                .wrapping_sub(slot_hash(k, old))
                .wrapping_add(slot_hash(k, old + 1));
        }
    }

    fn state_id(&self) -> u64 {
        self.id
    }

    fn state_key(&self) -> Vec<u32> {
        self.counters.clone()
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Finite {
            log2_size: self.counters.len() as f64 * ((self.config.counter_cap as f64) + 1.0).log2(),
        }
    }

    fn memory_bits(&self) -> u64 {
        self.config.total_bits(self.n)
    }

    fn clone_box(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}
