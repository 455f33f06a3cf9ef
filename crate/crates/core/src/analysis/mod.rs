//! Exact placement probabilities, forbidden sets, phase tracking and the
//! closed-form bounds and tails that go with them.

mod bounds;
mod claim;
mod phases;
mod placement;
mod poisson;
mod reachable;

pub use bounds::{advice_list_size_check, theoretical_bounds, AdviceSizeReport, TheoreticalBounds};
pub use claim::{check_claim1, sweep_claim1, Claim1Report, MaskChecker, StateVerdict, SweepConfig};
pub use phases::{phase_report_from_trace, phase_report_run, OverlapOptions, PhaseConfig, PhaseReport, PhaseRow};
pub use placement::{
    check_epsilon, default_epsilon_grid, epsilon_from_f64, exact_placement_probs, forbidden_flags_f64, forbidden_set,
    placement_probs_f64, ForbiddenSet, PlacementProbs, PlacementProbsF64, ENUMERATION_LIMIT,
};
pub use poisson::{poisson_upper_tail, PoissonTail};
pub use reachable::{reachable_states, ReachedState};
