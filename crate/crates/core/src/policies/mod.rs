//! Allocation policies and their memory accounting.
//!
//! A policy sees its own memory and the ordered pair of offered bins, and
//! returns a [`Choice`]: either a fixed bin or a coin flip between two bins.
//! Sampling (`decide`) and exact enumeration (`choice`) go through the same
//! description, so the placement probabilities computed by the analysis
//! module are the ones the simulator actually realises.

mod advice;
mod clustered;
mod greedy;
mod one_choice;
pub mod toy;

pub use advice::{build_advice, AdviceList, AdvicePolicy};
pub use clustered::{ClusterConfig, ClusteredPolicy};
pub use greedy::GreedyTwoChoice;
pub use one_choice::OneChoice;

use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::RngExt;

use crate::rng::SimRng;
use crate::sim::SimConfig;

/// Exact probabilities. Denominators stay small (they divide 2n² for every
/// policy shipped here), so 64-bit components are ample.
pub type Rational = Ratio<i64>;

/// What a policy does with one offered pair in its current memory state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Choice {
    Bin(usize),
    /// Place into `first` with probability `p_first`, else into `second`.
    Mix {
        first: usize,
        second: usize,
        p_first: Rational,
    },
}

impl Choice {
    pub fn coin(first: usize, second: usize) -> Self {
        Choice::Mix {
            first,
            second,
            p_first: Rational::new(1, 2),
        }
    }

    /// Bins with positive probability, paired with that probability.
    pub fn outcomes(&self) -> impl Iterator<Item = (usize, Rational)> {
        let pair = match *self {
            Choice::Bin(b) => [(b, Rational::one()), (b, Rational::zero())],
            Choice::Mix { first, second, p_first } => [(first, p_first), (second, Rational::one() - p_first)],
        };
        pair.into_iter().filter(|(_, p)| !p.is_zero())
    }

    pub fn sample(&self, rng: &mut SimRng) -> usize {
        match *self {
            Choice::Bin(b) => b,
            Choice::Mix { first, second, p_first } => {
                let hit = if p_first == Rational::new(1, 2) {
                    rng.random::<bool>()
                } else {
                    rng.random_ratio(*p_first.numer() as u32, *p_first.denom() as u32)
                };
                if hit {
                    first
                } else {
                    second
                }
            }
        }
    }
}

/// Size of a policy's reachable memory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateSpace {
    Finite {
        log2_size: f64,
    },
    /// Full-knowledge or externally advised policies that declare a budget
    /// instead of bounding their state set.
    Declared,
}

pub trait Policy: Send + Sync {
    fn name(&self) -> &str;

    /// Prepare a fresh memory for a run over `n` bins and `balls` balls.
    fn reset(&mut self, n: usize, balls: u64);

    /// `(n, balls)` from the last reset, if any.
    fn dims(&self) -> Option<(usize, u64)>;

    /// Hook called with the true loads before every decision. Only the
    /// advice policy listens; `last_placed` is the bin that received the
    /// previous ball (`None` before the first ball or after a jump).
    fn observe(&mut self, _loads: &[u32], _last_placed: Option<usize>) {}

    fn choice(&self, bin_a: usize, bin_b: usize) -> Choice;

    fn decide(&mut self, bin_a: usize, bin_b: usize, rng: &mut SimRng) -> usize {
        self.choice(bin_a, bin_b).sample(rng)
    }

    fn update(&mut self, bin_a: usize, bin_b: usize, chosen: usize);

    /// Opaque identifier of the current memory state. Equal states always
    /// share an id; distinct states collide only by hash accident.
    fn state_id(&self) -> u64;

    /// Exact encoding of the current memory state.
    fn state_key(&self) -> Vec<u32>;

    fn state_space(&self) -> StateSpace;

    /// Bit budget for the current dimensions. The advice policy reports the
    /// largest per-step advice it has received since the last reset.
    fn memory_bits(&self) -> u64;

    fn clone_box(&self) -> Box<dyn Policy>;
}

impl Clone for Box<dyn Policy> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// Bit budget of `policy` for a run described by `config`.
///
/// A policy already reset for these dimensions answers directly (this keeps
/// the per-run maximum of the advice policy); otherwise a fresh copy is
/// reset and asked.
pub fn memory_bits(policy: &dyn Policy, config: &SimConfig) -> u64 {
    if policy.dims() == Some((config.n, config.balls)) {
        policy.memory_bits()
    } else {
        let mut fresh = policy.clone_box();
        fresh.reset(config.n, config.balls);
        fresh.memory_bits()
    }
}

/// `ceil(log2(x))` for `x >= 1`.
pub(crate) fn ceil_log2(x: u64) -> u32 {
    debug_assert!(x >= 1);
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Bits needed to store a counter that ranges over `0..=max`.
pub(crate) fn counter_width(max: u64) -> u32 {
    ceil_log2(max + 1)
}

/// Per-slot contribution to an incrementally maintained state id. Zero
/// values contribute nothing, so an all-zero memory has id 0.
#[inline]
pub(crate) fn slot_hash(slot: usize, value: u32) -> u64 {
    if value == 0 {
        return 0;
    }
    let mut z = ((slot as u64) << 32 | value as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_small_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(16), 4);
        assert_eq!(ceil_log2(17), 5);
        assert_eq!(counter_width(16), 5);
        assert_eq!(counter_width(15), 4);
    }

    #[test]
    fn coin_outcomes_sum_to_one() {
        let c = Choice::coin(3, 5);
        let total: Rational = c.outcomes().map(|(_, p)| p).sum();
        assert_eq!(total, Rational::one());
        assert_eq!(Choice::Bin(2).outcomes().count(), 1);
    }

    #[test]
    fn biased_coin_frequency() {
        let c = Choice::Mix {
            first: 0,
            second: 1,
            p_first: Rational::new(1, 3),
        };
        let mut rng = crate::rng::sim_rng(9);
        let hits = (0..30_000).filter(|_| c.sample(&mut rng) == 0).count();
        // 5 sigma of Binomial(30000, 1/3) is about 408
        assert!((hits as i64 - 10_000).abs() < 410, "hits = {hits}");
    }
}
