use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::policies::Policy;

/// A memory state reached after `balls` placements, with the loads of the
/// path that first reached it.
pub struct ReachedState {
    pub policy: Box<dyn Policy>,
    pub loads: Vec<u32>,
    pub balls: u64,
}

/// Breadth-first enumeration of the memory states a policy can occupy
/// within `max_balls` placements, starting from its current state.
///
/// Every ordered pair and every choice with positive probability is
/// followed. States are deduplicated on [`Policy::state_key`]; the
/// returned list is in discovery order, so it is deterministic.
pub fn reachable_states(start: &dyn Policy, n: usize, max_balls: u64, limit: usize) -> Result<Vec<ReachedState>> {
    let mut root = start.clone_box();
    let loads = vec![0u32; n];
    root.observe(&loads, None);

    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    seen.insert(root.state_key());
    let mut out = vec![ReachedState {
        policy: root,
        loads,
        balls: 0,
    }];
    let mut frontier = 0..1;

    for depth in 1..=max_balls {
        let mut discovered = Vec::new();
        for idx in frontier.clone() {
            let node = &out[idx];
            for a in 0..n {
                for b in 0..n {
                    for (bin, _) in node.policy.choice(a, b).outcomes() {
                        if bin >= n {
                            return Err(Error::InvalidConfig(format!(
                                "policy `{}` places into bin {bin} outside 0..{n}",
                                node.policy.name()
                            )));
                        }
                        let mut policy = node.policy.clone_box();
                        let mut loads = node.loads.clone();
                        loads[bin] += 1;
                        policy.update(a, b, bin);
                        policy.observe(&loads, Some(bin));
                        if seen.insert(policy.state_key()) {
                            if out.len() + discovered.len() >= limit {
                                return Err(Error::StateLimit { limit });
                            }
                            discovered.push(ReachedState {
                                policy,
                                loads,
                                balls: depth,
                            });
                        }
                    }
                }
            }
        }
        if discovered.is_empty() {
            break;
        }
        let start = out.len();
        out.extend(discovered);
        frontier = start..out.len();
    }
    Ok(out)
}
