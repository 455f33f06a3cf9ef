//! Small memoryless rules used to exercise the analysis code.
//!
//! `IllegalZero` breaks the placement contract on purpose (it ignores the
//! offered pair) and exists only as a negative control.

use super::{Choice, Policy, Rational, StateSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToyRule {
    /// Larger index of the pair.
    MaxIndex,
    /// Smaller index of the pair.
    MinIndex,
    /// First bin with probability 1/3.
    BiasedFirst,
    /// Always bin 0, whatever is offered.
    IllegalZero,
}

#[derive(Clone, Debug)]
pub struct ToyPolicy {
    rule: ToyRule,
    dims: Option<(usize, u64)>,
}

impl ToyPolicy {
    pub fn new(rule: ToyRule) -> Self {
        Self { rule, dims: None }
    }
}

impl Policy for ToyPolicy {
    fn name(&self) -> &str {
        match self.rule {
            ToyRule::MaxIndex => "max-index",
            ToyRule::MinIndex => "min-index",
            ToyRule::BiasedFirst => "biased-first",
            ToyRule::IllegalZero => "illegal-zero",
        }
    }

    fn reset(&mut self, n: usize, balls: u64) {
        self.dims = Some((n, balls));
    }

    fn dims(&self) -> Option<(usize, u64)> {
        self.dims
    }

    fn choice(&self, bin_a: usize, bin_b: usize) -> Choice {
        match self.rule {
            ToyRule::MaxIndex => Choice::Bin(bin_a.max(bin_b)),
            ToyRule::MinIndex => Choice::Bin(bin_a.min(bin_b)),
            ToyRule::BiasedFirst if bin_a != bin_b => Choice::Mix {
                first: bin_a,
                second: bin_b,
                p_first: Rational::new(1, 3),
            },
            ToyRule::BiasedFirst => Choice::Bin(bin_a),
            ToyRule::IllegalZero => Choice::Bin(0),
        }
    }

    fn update(&mut self, _bin_a: usize, _bin_b: usize, _chosen: usize) {}

    fn state_id(&self) -> u64 {
        0
    }

    fn state_key(&self) -> Vec<u32> {
        Vec::new()
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Finite { log2_size: 0.0 }
    }

    fn memory_bits(&self) -> u64 {
        0
    }

    fn clone_box(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}
