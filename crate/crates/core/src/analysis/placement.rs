//! Placement probabilities of a policy in a fixed memory state, obtained by
//! enumerating all `n²` ordered pairs.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policies::{Choice, Policy, Rational};

/// Largest `n` for which pair enumeration is attempted.
pub const ENUMERATION_LIMIT: usize = 1 << 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementProbs {
    pub n: usize,
    pub memory_state_id: u64,
    pub probs: Vec<Rational>,
}

impl PlacementProbs {
    pub fn sum(&self) -> Rational {
        self.probs.iter().sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(ratio_to_f64).collect()
    }

    /// `2/n - 1/n²`: the chance that a given bin is offered at all.
    pub fn offer_bound(&self) -> Rational {
        let n = self.n as i64;
        Rational::new(2 * n - 1, n * n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementProbsF64 {
    pub n: usize,
    pub memory_state_id: u64,
    pub probs: Vec<f64>,
}

pub(crate) fn ratio_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_enumerable(policy: &dyn Policy, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    match policy.dims() {
        Some((pn, _)) if pn == n => Ok(()),
        Some((pn, _)) => Err(Error::InvalidConfig(format!("policy is set up for {pn} bins, not {n}"))),
        None => Err(Error::InvalidConfig("policy has not been reset".into())),
    }
}

fn bin_in_range(bin: usize, n: usize, policy: &dyn Policy) -> Result<usize> {
    if bin < n {
        Ok(bin)
    } else {
        Err(Error::InvalidConfig(format!(
            "policy `{}` places into bin {bin} outside 0..{n}",
            policy.name()
        )))
    }
}

/// Exact `p_i = (1/n²) Σ_{(a,b)} P(choose i | state, a, b)`.
pub fn exact_placement_probs(policy: &dyn Policy, n: usize) -> Result<PlacementProbs> {
    check_enumerable(policy, n)?;
    let mut acc = vec![Rational::zero(); n];
    for a in 0..n {
        for b in 0..n {
            match policy.choice(a, b) {
                Choice::Bin(bin) => acc[bin_in_range(bin, n, policy)?] += Rational::one(),
                choice => {
                    for (bin, p) in choice.outcomes() {
                        acc[bin_in_range(bin, n, policy)?] += p;
                    }
                }
            }
        }
    }
    let pairs = (n * n) as i64;
    Ok(PlacementProbs {
        n,
        memory_state_id: policy.state_id(),
        probs: acc.into_iter().map(|x| x / pairs).collect(),
    })
}

/// Same enumeration in floating point.
pub fn placement_probs_f64(policy: &dyn Policy, n: usize) -> Result<PlacementProbsF64> {
    check_enumerable(policy, n)?;
    let mut acc = vec![0.0f64; n];
    for a in 0..n {
        for b in 0..n {
            match policy.choice(a, b) {
                Choice::Bin(bin) => acc[bin_in_range(bin, n, policy)?] += 1.0,
                Choice::Mix { first, second, p_first } => {
                    let pf = ratio_to_f64(&p_first);
                    acc[bin_in_range(first, n, policy)?] += pf;
                    acc[bin_in_range(second, n, policy)?] += 1.0 - pf;
                }
            }
        }
    }
    let pairs = (n * n) as f64;
    Ok(PlacementProbsF64 {
        n,
        memory_state_id: policy.state_id(),
        probs: acc.into_iter().map(|x| x / pairs).collect(),
    })
}

/// Bins whose placement probability is strictly below `epsilon / n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbiddenSet {
    pub epsilon: Rational,
    pub members: Vec<usize>,
}

impl ForbiddenSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, bin: usize) -> bool {
        self.members.binary_search(&bin).is_ok()
    }
}

pub fn check_epsilon(epsilon: Rational) -> Result<()> {
    if epsilon <= Rational::zero() || epsilon >= Rational::one() {
        return Err(Error::EpsilonOutOfRange(epsilon.to_string()));
    }
    Ok(())
}

/// Parse a decimal such as `0.05` into the nearest simple fraction.
pub fn epsilon_from_f64(x: f64) -> Result<Rational> {
    let r = Rational::approximate_float(x).ok_or_else(|| Error::EpsilonOutOfRange(x.to_string()))?;
    check_epsilon(r)?;
    Ok(r)
}

/// `{0.05, 0.10, ..., 0.95}`.
pub fn default_epsilon_grid() -> Vec<Rational> {
    (1..20).map(|k| Rational::new(k, 20)).collect()
}

pub fn forbidden_set(p: &PlacementProbs, epsilon: Rational) -> Result<ForbiddenSet> {
    check_epsilon(epsilon)?;
    let cutoff = epsilon / p.n as i64;
    let members = p
        .probs
        .iter()
        .enumerate()
        .filter(|(_, pi)| **pi < cutoff)
        .map(|(i, _)| i)
        .collect();
    Ok(ForbiddenSet { epsilon, members })
}

/// Float-mode membership flags, `p_i < epsilon / n`.
pub fn forbidden_flags_f64(p: &PlacementProbsF64, epsilon: f64) -> Result<Vec<bool>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon.to_string()));
    }
    let cutoff = epsilon / p.n as f64;
    Ok(p.probs.iter().map(|&pi| pi < cutoff).collect())
}
