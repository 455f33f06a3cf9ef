use super::{counter_width, slot_hash, Choice, Policy, StateSpace};

/// Two-choice with full knowledge: keeps every bin's load and places the
/// ball into the less loaded of the two offered bins. Ties go to a fair coin.
#[derive(Clone, Debug, Default)]
pub struct GreedyTwoChoice {
    loads: Vec<u32>,
    balls: u64,
    id: u64,
}

impl GreedyTwoChoice {
    pub fn new() -> Self {
        Self::default()
    }

    /// Start from an explicit load vector instead of the empty one.
    pub fn with_loads(loads: Vec<u32>, balls: u64) -> Self {
        let id = loads
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &l)| acc.wrapping_add(slot_hash(i, l)));
        Self { loads, balls, id }
    }

    pub fn loads(&self) -> &[u32] {
        &self.loads
    }
}

impl Policy for GreedyTwoChoice {
    fn name(&self) -> &str {
        "greedy"
    }

    fn reset(&mut self, n: usize, balls: u64) {
        self.loads.clear();
        self.loads.resize(n, 0);
        self.balls = balls;
        self.id = 0;
    }

    fn dims(&self) -> Option<(usize, u64)> {
        (!self.loads.is_empty()).then_some((self.loads.len(), self.balls))
    }

    fn choice(&self, bin_a: usize, bin_b: usize) -> Choice {
        if bin_a == bin_b {
            return Choice::Bin(bin_a);
        }
        let (la, lb) = (self.loads[bin_a], self.loads[bin_b]);
        match la.cmp(&lb) {
            std::cmp::Ordering::Less => Choice::Bin(bin_a),
            std::cmp::Ordering::Greater => Choice::Bin(bin_b),
            std::cmp::Ordering::Equal => Choice::coin(bin_a, bin_b),
        }
    }

    fn update(&mut self, _bin_a: usize, _bin_b: usize, chosen: usize) {
        let old = self.loads[chosen];
        self.loads[chosen] = old + 1;
        self.id = self
            .id
            .wrapping_sub(slot_hash(chosen, old))
            .wrapping_add(slot_hash(chosen, old + 1));
    }

    fn state_id(&self) -> u64 {
        self.id
    }

    fn state_key(&self) -> Vec<u32> {
        self.loads.clone()
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Declared
    }

    fn memory_bits(&self) -> u64 {
        self.loads.len() as u64 * counter_width(self.balls) as u64
    }

    fn clone_box(&self) -> Box<dyn Policy> {
        Box::new(self.clone())
    }
}
