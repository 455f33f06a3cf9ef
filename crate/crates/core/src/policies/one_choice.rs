use super::{Choice, Policy, StateSpace};

/// Memoryless baseline: always take the first offered bin, which makes every
/// ball land in a uniformly random bin.
#[derive(Clone, Debug, Default)]
pub struct OneChoice {
    dims: Option<(usize, u64)>,
}

impl OneChoice {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Policy for OneChoice {
    fn name(&self) -> &str {
        "one-choice"
    }

    fn reset(&mut self, n: usize, balls: u64) {
        self.dims = Some((n, balls));
    }

    fn dims(&self) -> Option<(usize, u64)> {
        self.dims
    }

    fn choice(&self, bin_a: usize, _bin_b: usize) -> Choice {
        Choice::Bin(bin_a)
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sim_rng;

    #[test]
    fn takes_first_bin() {
        let mut p = OneChoice::new();
        let mut rng = sim_rng(0);
        assert_eq!(p.decide(3, 7, &mut rng), 3);
        assert_eq!(p.decide(0, 0, &mut rng), 0);
        assert_eq!(p.memory_bits(), 0);
    }
}
