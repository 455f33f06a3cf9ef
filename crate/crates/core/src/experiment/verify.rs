use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{build_policy, PolicyKind, PolicyParams};
use crate::analysis::{exact_placement_probs, reachable_states, sweep_claim1, StateVerdict, SweepConfig};
use crate::error::Result;
use crate::policies::{Policy, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub policy: PolicyKind,
    pub params: PolicyParams,
    pub n: usize,
    pub delta: f64,
    pub epsilons: Vec<Rational>,
    /// Explore every memory state reachable within this many balls.
    pub depth: u64,
    pub subsets: usize,
    pub seed: u64,
    pub state_limit: usize,
}

impl VerifyOptions {
    pub fn new(policy: PolicyKind, n: usize) -> Self {
        Self {
            policy,
            params: PolicyParams::default(),
            n,
            delta: 0.5,
            epsilons: crate::analysis::default_epsilon_grid(),
            depth: 0,
            subsets: 1000,
            seed: 0,
            state_limit: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub policy: String,
    pub n: usize,
    pub depth: u64,
    pub states: usize,
    pub epsilons: Vec<f64>,
    pub subsets_per_check: usize,
    pub checks: u64,
    pub part1_violations: u64,
    pub part2_violations: u64,
    pub sum_violations: u64,
    pub offer_bound_violations: u64,
    pub worst_part1_margin: f64,
    pub worst_part2_margin: f64,
    /// True iff neither part of the claim failed anywhere.
    pub ok: bool,
    pub per_state: Vec<StateVerdict>,
}

/// Sweep the placement-probability claims over every memory state of
/// `policy` reachable within `depth` balls. `policy` must already be reset.
pub fn verify_policy(
    policy: &dyn Policy,
    n: usize,
    depth: u64,
    sweep: &SweepConfig,
    state_limit: usize,
) -> Result<VerifyReport> {
    let states = reachable_states(policy, n, depth, state_limit)?;
    let per_state = states
        .par_iter()
        .map(|s| {
            let p = exact_placement_probs(s.policy.as_ref(), n)?;
            sweep_claim1(&p, sweep)
        })
        .collect::<Result<Vec<_>>>()?;

    let sum = |f: fn(&StateVerdict) -> u64| per_state.iter().map(f).sum::<u64>();
    let part1_violations = sum(|v| v.part1_violations);
    let part2_violations = sum(|v| v.part2_violations);
    Ok(VerifyReport {
        policy: policy.name().to_string(),
        n,
        depth,
        states: per_state.len(),
        epsilons: sweep
            .epsilons
            .iter()
            .map(|e| *e.numer() as f64 / *e.denom() as f64)
            .collect(),
        subsets_per_check: sweep.subsets,
        checks: sum(|v| v.checks),
        part1_violations,
        part2_violations,
        sum_violations: sum(|v| !v.sum_is_one as u64),
        offer_bound_violations: sum(|v| !v.offer_bound_ok as u64),
        worst_part1_margin: per_state
            .iter()
            .map(|v| v.worst_part1_margin)
            .fold(f64::INFINITY, f64::min),
        worst_part2_margin: per_state
            .iter()
            .map(|v| v.worst_part2_margin)
            .fold(f64::INFINITY, f64::min),
        ok: part1_violations == 0 && part2_violations == 0,
        per_state,
    })
}

/// The `verify` command: build the named policy and sweep it.
pub fn cli_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut policy = build_policy(opts.policy, opts.n, opts.delta, &opts.params)?;
    policy.reset(opts.n, (opts.n as u64).max(opts.depth));
    let sweep = SweepConfig {
        epsilons: opts.epsilons.clone(),
        subsets: opts.subsets,
        seed: opts.seed,
    };
    verify_policy(policy.as_ref(), opts.n, opts.depth, &sweep, opts.state_limit)
}
