//! Checks of the two placement-probability facts every legal policy obeys:
//!
//! 1. a set `S` receives the ball with probability at least
//!    `epsilon |S \ F| / n`;
//! 2. the forbidden set `F` has at most `epsilon n` members.
//!
//! [`check_claim1`] works on arbitrary subsets in exact rationals.
//! [`MaskChecker`] is the same test for `n <= 64` with subsets as bitmasks
//! and all arithmetic in integers over a common denominator, which is what
//! makes sweeping thousands of states and subsets cheap.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::One;
use rand::RngExt;
use serde::{Deserialize, Serialize};

use super::placement::{check_epsilon, forbidden_set, ratio_to_f64, PlacementProbs};
use crate::error::{Error, Result};
use crate::policies::Rational;
use crate::rng::sim_rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim1Report {
    pub part1_ok: bool,
    pub part2_ok: bool,
    /// `Σ_{i in S} p_i`.
    pub lhs: f64,
    /// `epsilon |S \ F| / n`.
    pub rhs: f64,
    pub forbidden: usize,
    pub epsilon_n: f64,
}

pub fn check_claim1(p: &PlacementProbs, epsilon: Rational, subset: &[usize]) -> Result<Claim1Report> {
    let f = forbidden_set(p, epsilon)?;
    let s: BTreeSet<usize> = subset.iter().copied().collect();
    if let Some(&bad) = s.iter().find(|&&i| i >= p.n) {
        return Err(Error::InvalidConfig(format!("subset bin {bad} outside 0..{}", p.n)));
    }
    let lhs: Rational = s.iter().map(|&i| p.probs[i]).sum();
    let outside = s.iter().filter(|&&i| !f.contains(i)).count() as i64;
    let n = p.n as i64;
    let rhs = epsilon * outside / n;
    let eps_n = epsilon * n;
    Ok(Claim1Report {
        part1_ok: lhs >= rhs,
        part2_ok: Rational::from_integer(f.len() as i64) <= eps_n,
        lhs: ratio_to_f64(&lhs),
        rhs: ratio_to_f64(&rhs),
        forbidden: f.len(),
        epsilon_n: ratio_to_f64(&eps_n),
    })
}

/// Integer form of a placement vector for fast subset checks, `n <= 64`.
pub struct MaskChecker {
    n: usize,
    denom: i128,
    numers: Vec<i128>,
    /// `tables[j][v]`: summed numerators of the bins `8j + k` for set bits `k` of `v`.
    tables: Vec<[i128; 256]>,
}

impl MaskChecker {
    pub fn new(p: &PlacementProbs) -> Result<Self> {
        if p.n == 0 || p.n > 64 {
            return Err(Error::InvalidConfig(format!(
                "mask checks need 1 <= n <= 64, got {}",
                p.n
            )));
        }
        let denom = p.probs.iter().fold(1i128, |acc, r| acc.lcm(&(*r.denom() as i128)));
        let numers: Vec<i128> = p
            .probs
            .iter()
            .map(|r| *r.numer() as i128 * (denom / *r.denom() as i128))
            .collect();
        let tables = (0..p.n.div_ceil(8))
            .map(|j| {
                let mut t = [0i128; 256];
                for v in 1..256usize {
                    let low = v.trailing_zeros() as usize;
                    let bin = 8 * j + low;
                    let w = numers.get(bin).copied().unwrap_or(0);
                    t[v] = t[v & (v - 1)] + w;
                }
                t
            })
            .collect();
        Ok(Self {
            n: p.n,
            denom,
            numers,
            tables,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn full_mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    /// Bits of bins with `p_i < epsilon / n`.
    pub fn forbidden_mask(&self, epsilon: Rational) -> u64 {
        let (a, b) = (*epsilon.numer() as i128, *epsilon.denom() as i128);
        let n = self.n as i128;
        self.numers
            .iter()
            .enumerate()
            .filter(|(_, &num)| num * n * b < a * self.denom)
            .fold(0u64, |m, (i, _)| m | (1u64 << i))
    }

    /// `Σ_{i in mask} p_i` times the common denominator.
    pub fn mass(&self, mask: u64) -> i128 {
        self.tables
            .iter()
            .enumerate()
            .map(|(j, t)| t[((mask >> (8 * j)) & 0xff) as usize])
            .sum()
    }

    pub fn part2_ok(&self, forbidden: u64, epsilon: Rational) -> bool {
        let (a, b) = (*epsilon.numer() as i128, *epsilon.denom() as i128);
        forbidden.count_ones() as i128 * b <= a * self.n as i128
    }

    /// Exact verdict of part 1 for subset `mask`, and `lhs - rhs` as a float.
    pub fn part1(&self, mask: u64, forbidden: u64, epsilon: Rational) -> (bool, f64) {
        let (a, b) = (*epsilon.numer() as i128, *epsilon.denom() as i128);
        let n = self.n as i128;
        let mass = self.mass(mask);
        let outside = (mask & !forbidden).count_ones() as i128;
        let ok = mass * n * b >= a * outside * self.denom;
        let margin = mass as f64 / self.denom as f64 - (a * outside) as f64 / (b * n) as f64;
        (ok, margin)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub epsilons: Vec<Rational>,
    /// Subsets per `(state, epsilon)`. When `2^n` does not exceed this, all
    /// subsets are checked instead.
    pub subsets: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            epsilons: super::placement::default_epsilon_grid(),
            subsets: 1000,
            seed: 0,
        }
    }
}

/// Outcome of sweeping one memory state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVerdict {
    pub memory_state_id: u64,
    pub sum_is_one: bool,
    pub max_prob: f64,
    /// Every `p_i <= 2/n - 1/n²`.
    pub offer_bound_ok: bool,
    pub exhaustive_subsets: bool,
    pub checks: u64,
    pub part1_violations: u64,
    pub part2_violations: u64,
    /// Smallest `lhs - rhs` seen over all subsets and epsilons.
    pub worst_part1_margin: f64,
    /// Smallest `epsilon n - |F|` over the epsilon grid.
    pub worst_part2_margin: f64,
}

impl StateVerdict {
    pub fn claim_ok(&self) -> bool {
        self.part1_violations == 0 && self.part2_violations == 0
    }
}

pub fn sweep_claim1(p: &PlacementProbs, cfg: &SweepConfig) -> Result<StateVerdict> {
    for &eps in &cfg.epsilons {
        check_epsilon(eps)?;
    }
    let bound = p.offer_bound();
    let mut verdict = StateVerdict {
        memory_state_id: p.memory_state_id,
        sum_is_one: p.sum() == Rational::one(),
        max_prob: p.probs.iter().map(ratio_to_f64).fold(0.0, f64::max),
        offer_bound_ok: p.probs.iter().all(|x| *x <= bound),
        exhaustive_subsets: p.n < 64 && (1u64 << p.n) <= cfg.subsets as u64,
        checks: 0,
        part1_violations: 0,
        part2_violations: 0,
        worst_part1_margin: f64::INFINITY,
        worst_part2_margin: f64::INFINITY,
    };
    let mut rng = sim_rng(cfg.seed ^ p.memory_state_id);

    if p.n <= 64 {
        let checker = MaskChecker::new(p)?;
        let full = checker.full_mask();
        for &eps in &cfg.epsilons {
            let fmask = checker.forbidden_mask(eps);
            if !checker.part2_ok(fmask, eps) {
                verdict.part2_violations += 1;
            }
            let eps_n = ratio_to_f64(&eps) * p.n as f64;
            verdict.worst_part2_margin = verdict.worst_part2_margin.min(eps_n - fmask.count_ones() as f64);

            let mut check = |mask: u64| {
                let (ok, margin) = checker.part1(mask, fmask, eps);
                verdict.checks += 1;
                if !ok {
                    verdict.part1_violations += 1;
                }
                verdict.worst_part1_margin = verdict.worst_part1_margin.min(margin);
            };
            if verdict.exhaustive_subsets {
                (0..=full).for_each(&mut check);
            } else {
                for _ in 0..cfg.subsets {
                    check(rng.random::<u64>() & full);
                }
            }
        }
    } else {
        for &eps in &cfg.epsilons {
            let mut part2_seen = false;
            for _ in 0..cfg.subsets.max(1) {
                let subset: Vec<usize> = (0..p.n).filter(|_| rng.random::<bool>()).collect();
                let r = check_claim1(p, eps, &subset)?;
                verdict.checks += 1;
                if !r.part1_ok {
                    verdict.part1_violations += 1;
                }
                verdict.worst_part1_margin = verdict.worst_part1_margin.min(r.lhs - r.rhs);
                if !part2_seen {
                    part2_seen = true;
                    if !r.part2_ok {
                        verdict.part2_violations += 1;
                    }
                    verdict.worst_part2_margin = verdict.worst_part2_margin.min(r.epsilon_n - r.forbidden as f64);
                }
            }
        }
    }
    Ok(verdict)
}
