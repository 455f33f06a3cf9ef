//! The allocation process: `balls` balls, each offered an ordered pair of
//! independent uniform bins (repeats allowed), placed by a policy.

use std::collections::BTreeMap;

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policies::Policy;
use crate::rng::sim_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub balls: u64,
    pub seed: u64,
    pub record_trace: bool,
}

impl SimConfig {
    /// `n` balls into `n` bins, no trace.
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            balls: n as u64,
            seed,
            record_trace: false,
        }
    }

    pub fn with_balls(mut self, balls: u64) -> Self {
        self.balls = balls;
        self
    }

    pub fn with_trace(mut self, record: bool) -> Self {
        self.record_trace = record;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.balls == 0 {
            return Err(Error::InvalidConfig("balls must be at least 1".into()));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::InvalidConfig("n must fit in 32 bits".into()));
        }
        if self.balls > u32::MAX as u64 {
            return Err(Error::InvalidConfig("balls must fit in 32 bits".into()));
        }
        Ok(())
    }
}

/// Per-bin ball counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BinLoads(pub Vec<u32>);

impl BinLoads {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&l| l as u64).sum()
    }

    pub fn max_load(&self) -> Result<u32> {
        max_load(&self.0)
    }

    pub fn histogram(&self) -> Result<BTreeMap<u32, usize>> {
        load_histogram(&self.0)
    }
}

impl From<Vec<u32>> for BinLoads {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub memory_state_id: u64,
    pub bin_a: u32,
    pub bin_b: u32,
    pub chosen: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub final_loads: BinLoads,
    pub max_load: u32,
    pub memory_bits: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<StepRecord>>,
}

pub fn max_load(loads: &[u32]) -> Result<u32> {
    loads.iter().copied().max().ok_or(Error::EmptyLoads)
}

pub fn load_histogram(loads: &[u32]) -> Result<BTreeMap<u32, usize>> {
    if loads.is_empty() {
        return Err(Error::EmptyLoads);
    }
    let mut hist = BTreeMap::new();
    for &l in loads {
        *hist.entry(l).or_insert(0) += 1;
    }
    Ok(hist)
}

/// What an observer sees after each placement.
pub struct StepView<'a> {
    pub record: StepRecord,
    /// Loads including the ball just placed.
    pub loads: &'a [u32],
    /// The policy in the memory state that made this decision.
    pub policy: &'a dyn Policy,
}

pub fn simulate_run(config: &SimConfig, policy: &mut dyn Policy) -> Result<RunResult> {
    simulate_with_observer(config, policy, |_| {})
}

/// Run the process, calling `observer` after every placement and before the
/// policy updates its memory.
pub fn simulate_with_observer<F>(config: &SimConfig, policy: &mut dyn Policy, mut observer: F) -> Result<RunResult>
where
    F: FnMut(StepView<'_>),
{
    config.validate()?;
    let n = config.n;
    let mut rng = sim_rng(config.seed);
    let mut loads = vec![0u32; n];
    let mut trace = config.record_trace.then(|| Vec::with_capacity(config.balls as usize));
    let mut last = None;

    policy.reset(n, config.balls);
    for step in 0..config.balls {
        policy.observe(&loads, last);
        let bin_a = rng.random_range(0..n);
        let bin_b = rng.random_range(0..n);
        let memory_state_id = policy.state_id();
        let chosen = policy.decide(bin_a, bin_b, &mut rng);
        if chosen != bin_a && chosen != bin_b {
            return Err(Error::IllegalChoice {
                policy: policy.name().to_string(),
                step,
                bin_a,
                bin_b,
                chosen,
            });
        }
        loads[chosen] += 1;
        let record = StepRecord {
            step,
            memory_state_id,
            bin_a: bin_a as u32,
            bin_b: bin_b as u32,
            chosen: chosen as u32,
        };
        observer(StepView {
            record,
            loads: &loads,
            policy: &*policy,
        });
        if let Some(t) = trace.as_mut() {
            t.push(record);
        }
        policy.update(bin_a, bin_b, chosen);
        last = Some(chosen);
    }

    let max_load = max_load(&loads)?;
    Ok(RunResult {
        final_loads: BinLoads(loads),
        max_load,
        memory_bits: policy.memory_bits(),
        trace,
    })
}

/// Rebuild the load vector a trace ends in.
pub fn replay_loads(n: usize, trace: &[StepRecord]) -> Result<BinLoads> {
    let mut loads = vec![0u32; n];
    for r in trace {
        let c = r.chosen as usize;
        if c >= n {
            return Err(Error::MalformedTrace(format!(
                "step {} places into bin {c} but n = {n}",
                r.step
            )));
        }
        loads[c] += 1;
    }
    Ok(BinLoads(loads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::toy::{ToyPolicy, ToyRule};
    use crate::policies::{GreedyTwoChoice, OneChoice};

    #[test]
    fn single_bin() {
        let r = simulate_run(&SimConfig::new(1, 3), &mut GreedyTwoChoice::new()).unwrap();
        assert_eq!(r.final_loads.0, vec![1]);
        assert_eq!(r.max_load, 1);
    }

    #[test]
    fn conservation_small() {
        let r = simulate_run(&SimConfig::new(4, 99), &mut GreedyTwoChoice::new()).unwrap();
        assert_eq!(r.final_loads.total(), 4);
        assert!(r.max_load <= 4);
    }

    #[test]
    fn same_seed_same_result() {
        let cfg = SimConfig::new(4, 1234).with_trace(true);
        let a = simulate_run(&cfg, &mut GreedyTwoChoice::new()).unwrap();
        let b = simulate_run(&cfg, &mut GreedyTwoChoice::new()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_empty_config() {
        let mut p = OneChoice::new();
        assert!(simulate_run(&SimConfig::new(0, 0), &mut p).is_err());
        assert!(simulate_run(&SimConfig::new(4, 0).with_balls(0), &mut p).is_err());
    }

    #[test]
    fn trace_only_when_requested() {
        let mut p = OneChoice::new();
        let cfg = SimConfig::new(8, 5);
        assert!(simulate_run(&cfg, &mut p).unwrap().trace.is_none());
        let t = simulate_run(&cfg.with_trace(true), &mut p).unwrap().trace.unwrap();
        assert_eq!(t.len(), 8);
        assert!(t.iter().all(|r| r.chosen == r.bin_a));
    }

    #[test]
    fn illegal_policy_is_caught() {
        let mut p = ToyPolicy::new(ToyRule::IllegalZero);
        let err = simulate_run(&SimConfig::new(64, 1), &mut p).unwrap_err();
        assert!(matches!(err, Error::IllegalChoice { .. }));
    }

    #[test]
    fn helpers() {
        assert_eq!(max_load(&[0, 0, 0]).unwrap(), 0);
        assert_eq!(max_load(&[3, 1, 2]).unwrap(), 3);
        assert_eq!(max_load(&[5]).unwrap(), 5);
        assert!(max_load(&[]).is_err());

        let h = load_histogram(&[2, 0, 1]).unwrap();
        assert_eq!(h.into_iter().collect::<Vec<_>>(), vec![(0, 1), (1, 1), (2, 1)]);
        assert_eq!(
            load_histogram(&[1, 1, 1]).unwrap().into_iter().collect::<Vec<_>>(),
            vec![(1, 3)]
        );
        assert_eq!(
            load_histogram(&[0, 0]).unwrap().into_iter().collect::<Vec<_>>(),
            vec![(0, 2)]
        );
        assert!(load_histogram(&[]).is_err());
    }

    #[test]
    fn replay_matches_final_loads() {
        let cfg = SimConfig::new(32, 8).with_balls(100).with_trace(true);
        let r = simulate_run(&cfg, &mut GreedyTwoChoice::new()).unwrap();
        assert_eq!(replay_loads(32, r.trace.as_ref().unwrap()).unwrap(), r.final_loads);
    }
}
