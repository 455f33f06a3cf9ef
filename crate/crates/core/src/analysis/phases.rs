//! Phase decomposition of a run.
//!
//! The first `L * floor(n/L)` balls are split into `L` phases of
//! `floor(n/L)` balls. `S_i` is the set of bins holding at least `i` balls
//! at the end of phase `i`; each is compared with `(eps/(4L))^i n/2` where
//! `eps = 1/(2L)`. The `S_i` are snapshots from different moments and are
//! never compared with one another.
//!
//! With a live policy the report can also intersect `S_i` with forbidden
//! sets of memory states visited during the run. That check is empirical:
//! it only looks at states that actually occurred.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::bounds::theoretical_bounds;
use super::placement::{
    exact_placement_probs, forbidden_flags_f64, forbidden_set, placement_probs_f64, ENUMERATION_LIMIT,
};
use crate::error::{Error, Result};
use crate::policies::{Policy, Rational};
use crate::sim::{simulate_with_observer, RunResult, SimConfig, StepRecord};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub n: usize,
    pub phases: usize,
    pub phase_size: u64,
    pub delta: f64,
}

impl PhaseConfig {
    pub fn new(n: usize, phases: usize, delta: f64) -> Result<Self> {
        if phases == 0 {
            return Err(Error::InvalidConfig("need at least one phase".into()));
        }
        if n < phases {
            return Err(Error::InvalidConfig(format!("{phases} phases do not fit into n = {n}")));
        }
        Ok(Self {
            n,
            phases,
            phase_size: (n / phases) as u64,
            delta,
        })
    }

    /// `L = max(1, floor((delta/2) log n / log log n))`.
    pub fn from_bounds(n: usize, delta: f64) -> Result<Self> {
        let b = theoretical_bounds(n as u64, delta)?;
        Self::new(n, (b.lower_l.floor() as usize).max(1), delta)
    }

    pub fn epsilon(&self) -> Rational {
        Rational::new(1, 2 * self.phases as i64)
    }

    pub fn epsilon_f64(&self) -> f64 {
        1.0 / (2.0 * self.phases as f64)
    }

    /// `(eps/(4L))^i * n/2`.
    pub fn threshold(&self, i: usize) -> f64 {
        let ratio = self.epsilon_f64() / (4.0 * self.phases as f64);
        ratio.powi(i as i32) * self.n as f64 / 2.0
    }

    pub fn balls_needed(&self) -> u64 {
        self.phases as u64 * self.phase_size
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub phase: usize,
    pub s_size: usize,
    pub threshold: f64,
    pub pass: bool,
    /// `|S_i|` minus the `L - i` visited forbidden sets that remove the most
    /// of it, picked greedily.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap_greedy: Option<usize>,
    /// `|S_i|` minus the union of every visited forbidden set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap_union: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap_pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub config: PhaseConfig,
    pub epsilon: f64,
    pub rows: Vec<PhaseRow>,
    /// Distinct memory states whose forbidden sets were computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states_examined: Option<usize>,
    /// Why the forbidden-set overlap was not computed, if it was requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap_skipped: Option<String>,
}

impl PhaseReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Tracks loads and takes `S_i` snapshots at phase ends.
struct PhaseTracker {
    pc: PhaseConfig,
    loads: Vec<u32>,
    placed: u64,
    snapshots: Vec<Vec<bool>>,
}

impl PhaseTracker {
    fn new(pc: PhaseConfig) -> Self {
        Self {
            pc,
            loads: vec![0; pc.n],
            placed: 0,
            snapshots: vec![vec![true; pc.n]],
        }
    }

    fn place(&mut self, bin: usize) -> Result<()> {
        if bin >= self.pc.n {
            return Err(Error::MalformedTrace(format!("bin {bin} outside 0..{}", self.pc.n)));
        }
        self.loads[bin] += 1;
        self.placed += 1;
        if self.placed <= self.pc.balls_needed() && self.placed.is_multiple_of(self.pc.phase_size) {
            let i = (self.placed / self.pc.phase_size) as u32;
            self.snapshots.push(self.loads.iter().map(|&l| l >= i).collect());
        }
        Ok(())
    }

    fn finish(self, forbidden: Option<&[Vec<bool>]>) -> Result<PhaseReport> {
        if self.placed < self.pc.balls_needed() {
            return Err(Error::TraceTooShort {
                have: self.placed,
                need: self.pc.balls_needed(),
            });
        }
        let pc = self.pc;
        let rows = self
            .snapshots
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let s_size = s.iter().filter(|&&x| x).count();
                let threshold = pc.threshold(i);
                let (overlap_greedy, overlap_union) = match forbidden {
                    Some(sets) => {
                        let (g, u) = overlaps(s, sets, pc.phases - i);
                        (Some(g), Some(u))
                    }
                    None => (None, None),
                };
                PhaseRow {
                    phase: i,
                    s_size,
                    threshold,
                    pass: s_size as f64 >= threshold,
                    overlap_greedy,
                    overlap_union,
                    overlap_pass: overlap_greedy.map(|g| g as f64 >= threshold),
                }
            })
            .collect();
        Ok(PhaseReport {
            config: pc,
            epsilon: pc.epsilon_f64(),
            rows,
            states_examined: forbidden.map(|f| f.len()),
            overlap_skipped: None,
        })
    }
}

/// `(greedy, union)` remainders of `s` after removing forbidden sets.
fn overlaps(s: &[bool], sets: &[Vec<bool>], picks: usize) -> (usize, usize) {
    let union = s
        .iter()
        .enumerate()
        .filter(|&(i, &x)| x && !sets.iter().any(|f| f[i]))
        .count();
    let mut remaining: Vec<bool> = s.to_vec();
    for _ in 0..picks {
        let best = sets
            .iter()
            .map(|f| remaining.iter().zip(f).filter(|(&r, &x)| r && x).count())
            .enumerate()
            .max_by_key(|&(idx, hit)| (hit, std::cmp::Reverse(idx)));
        match best {
            Some((idx, hit)) if hit > 0 => {
                for (r, &x) in remaining.iter_mut().zip(&sets[idx]) {
                    if x {
                        *r = false;
                    }
                }
            }
            _ => break,
        }
    }
    (remaining.iter().filter(|&&x| x).count(), union)
}

/// Phase report from a stored trace over `n` bins.
pub fn phase_report_from_trace(trace: &[StepRecord], pc: PhaseConfig) -> Result<PhaseReport> {
    let mut tracker = PhaseTracker::new(pc);
    for r in trace {
        tracker.place(r.chosen as usize)?;
    }
    tracker.finish(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapOptions {
    /// Give up on the overlap check after this many distinct states.
    pub max_states: usize,
}

impl Default for OverlapOptions {
    fn default() -> Self {
        Self { max_states: 256 }
    }
}

/// Simulate `config` with `policy` and report phases, optionally with the
/// forbidden-set overlap over visited memory states.
pub fn phase_report_run(
    config: &SimConfig,
    policy: &mut dyn Policy,
    pc: PhaseConfig,
    overlap: Option<OverlapOptions>,
) -> Result<(RunResult, PhaseReport)> {
    if pc.n != config.n {
        return Err(Error::InvalidConfig(format!(
            "phase layout is for n = {}, run has n = {}",
            pc.n, config.n
        )));
    }
    if config.balls < pc.balls_needed() {
        return Err(Error::TraceTooShort {
            have: config.balls,
            need: pc.balls_needed(),
        });
    }

    let mut skip_reason = match overlap {
        Some(_) if config.n > ENUMERATION_LIMIT => Some(format!(
            "n = {} exceeds the enumeration guard of {ENUMERATION_LIMIT}",
            config.n
        )),
        _ => None,
    };
    let mut collecting = overlap.is_some() && skip_reason.is_none();
    let max_states = overlap.map_or(0, |o| o.max_states);
    let eps = pc.epsilon();
    let mut visited: HashSet<u64> = HashSet::new();
    let mut distinct_sets: HashSet<Vec<bool>> = HashSet::new();
    let mut sets: Vec<Vec<bool>> = Vec::new();
    let mut failure: Option<Error> = None;
    let mut tracker = PhaseTracker::new(pc);

    let run = simulate_with_observer(config, policy, |view| {
        if let Err(e) = tracker.place(view.record.chosen as usize) {
            failure.get_or_insert(e);
        }
        if !collecting || failure.is_some() || !visited.insert(view.record.memory_state_id) {
            return;
        }
        if visited.len() > max_states {
            collecting = false;
            skip_reason = Some(format!("more than {max_states} distinct memory states visited"));
            sets.clear();
            return;
        }
        match forbidden_flags(view.policy, config.n, eps) {
            Ok(flags) => {
                if distinct_sets.insert(flags.clone()) {
                    sets.push(flags);
                }
            }
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let report = if collecting {
        let mut r = tracker.finish(Some(&sets))?;
        r.states_examined = Some(visited.len());
        r
    } else {
        let mut r = tracker.finish(None)?;
        r.overlap_skipped = skip_reason;
        r
    };
    Ok((run, report))
}

/// Exact membership for small `n`, float membership otherwise.
fn forbidden_flags(policy: &dyn Policy, n: usize, eps: Rational) -> Result<Vec<bool>> {
    if n <= 64 {
        let p = exact_placement_probs(policy, n)?;
        let f = forbidden_set(&p, eps)?;
        let mut flags = vec![false; n];
        for &i in &f.members {
            flags[i] = true;
        }
        Ok(flags)
    } else {
        let p = placement_probs_f64(policy, n)?;
        forbidden_flags_f64(&p, *eps.numer() as f64 / *eps.denom() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::{GreedyTwoChoice, OneChoice};
    use crate::sim::simulate_run;

    #[test]
    fn thresholds() {
        let pc = PhaseConfig::new(16, 1, 0.5).unwrap();
        assert_eq!(pc.epsilon_f64(), 0.5);
        assert_eq!(pc.threshold(1), 1.0);

        let pc = PhaseConfig::new(100, 2, 0.5).unwrap();
        assert_eq!(pc.phase_size, 50);
        assert_eq!(pc.threshold(0), 50.0);
        assert_eq!(pc.threshold(1), 1.5625);
        assert!((pc.threshold(2) / pc.threshold(1) - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn config_errors() {
        assert!(PhaseConfig::new(16, 0, 0.5).is_err());
        assert!(PhaseConfig::new(2, 3, 0.5).is_err());
        assert_eq!(PhaseConfig::from_bounds(1 << 16, 0.5).unwrap().phases, 1);
        assert_eq!(PhaseConfig::from_bounds(1 << 16, 1.0).unwrap().phases, 2);
    }

    #[test]
    fn single_phase_passes_with_any_ball() {
        let cfg = SimConfig::new(16, 3).with_trace(true);
        let run = simulate_run(&cfg, &mut OneChoice::new()).unwrap();
        let pc = PhaseConfig::new(16, 1, 0.5).unwrap();
        let rep = phase_report_from_trace(run.trace.as_ref().unwrap(), pc).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert_eq!(rep.rows[0].s_size, 16);
        assert!(rep.rows[1].s_size >= 1);
        assert!(rep.all_pass());
    }

    #[test]
    fn short_trace_is_rejected() {
        let cfg = SimConfig::new(16, 3).with_balls(10).with_trace(true);
        let run = simulate_run(&cfg, &mut OneChoice::new()).unwrap();
        let pc = PhaseConfig::new(16, 1, 0.5).unwrap();
        assert!(matches!(
            phase_report_from_trace(run.trace.as_ref().unwrap(), pc),
            Err(Error::TraceTooShort { have: 10, need: 16 })
        ));
    }

    #[test]
    fn extra_balls_do_not_move_snapshots() {
        let pc = PhaseConfig::new(10, 3, 0.5).unwrap();
        let base: Vec<StepRecord> = (0..9)
            .map(|i| StepRecord {
                step: i,
                memory_state_id: 0,
                bin_a: 0,
                bin_b: 0,
                chosen: (i % 3) as u32,
            })
            .collect();
        let mut longer = base.clone();
        longer.push(StepRecord {
            step: 9,
            memory_state_id: 0,
            bin_a: 5,
            bin_b: 5,
            chosen: 5,
        });
        let a = phase_report_from_trace(&base, pc).unwrap();
        let b = phase_report_from_trace(&longer, pc).unwrap();
        assert_eq!(a, b);
        // 3 balls each to bins 0,1,2 in turn: S_1 = 3 bins, S_2 = 3, S_3 = 3
        assert_eq!(a.rows.iter().map(|r| r.s_size).collect::<Vec<_>>(), vec![10, 3, 3, 3]);
    }

    #[test]
    fn live_run_matches_trace_replay() {
        let pc = PhaseConfig::new(64, 2, 0.5).unwrap();
        let cfg = SimConfig::new(64, 17).with_trace(true);
        let (run, live) = phase_report_run(&cfg, &mut GreedyTwoChoice::new(), pc, None).unwrap();
        let replay = phase_report_from_trace(run.trace.as_ref().unwrap(), pc).unwrap();
        assert_eq!(live, replay);
    }

    #[test]
    fn overlap_for_stateless_policy() {
        let pc = PhaseConfig::new(32, 2, 0.5).unwrap();
        let cfg = SimConfig::new(32, 4);
        let (_, rep) = phase_report_run(&cfg, &mut OneChoice::new(), pc, Some(OverlapOptions::default())).unwrap();
        // a single state with empty forbidden set
        assert_eq!(rep.states_examined, Some(1));
        for row in &rep.rows {
            assert_eq!(row.overlap_greedy, Some(row.s_size));
            assert_eq!(row.overlap_union, Some(row.s_size));
        }
    }

    #[test]
    fn overlap_skipped_when_too_many_states() {
        let pc = PhaseConfig::new(32, 2, 0.5).unwrap();
        let cfg = SimConfig::new(32, 4);
        let opts = OverlapOptions { max_states: 3 };
        let (_, rep) = phase_report_run(&cfg, &mut GreedyTwoChoice::new(), pc, Some(opts)).unwrap();
        assert!(rep.overlap_skipped.is_some());
        assert!(rep.rows.iter().all(|r| r.overlap_greedy.is_none()));
    }

    #[test]
    fn overlap_greedy_never_below_union() {
        let pc = PhaseConfig::new(48, 3, 0.5).unwrap();
        let cfg = SimConfig::new(48, 9);
        let opts = OverlapOptions { max_states: 1000 };
        let (_, rep) = phase_report_run(&cfg, &mut GreedyTwoChoice::new(), pc, Some(opts)).unwrap();
        assert!(rep.overlap_skipped.is_none());
        for row in &rep.rows {
            assert!(row.overlap_greedy.unwrap() >= row.overlap_union.unwrap());
            assert!(row.overlap_greedy.unwrap() <= row.s_size);
        }
    }
}
