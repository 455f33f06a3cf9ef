use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonTail {
    pub lambda: f64,
    pub t: u64,
    /// `P(X >= t)` for `X ~ Poisson(lambda)`.
    pub tail: f64,
    /// `e^-lambda lambda^t / t!`, the first term of the tail.
    pub leading_term: f64,
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// Upper tail of a Poisson distribution.
///
/// Below the mean the tail is one minus the lower partial sum; above it the
/// tail terms are summed directly, which keeps small tails accurate in
/// relative terms. Terms come from the ratio recurrence in log space, so
/// large `lambda` does not underflow `e^-lambda`.
pub fn poisson_upper_tail(lambda: f64, t: u64) -> Result<PoissonTail> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
    }
    let ln_lambda = lambda.ln();
    let ln_leading = -lambda + t as f64 * ln_lambda - ln_factorial(t);
    let leading_term = ln_leading.exp();

    let tail = if t == 0 {
        1.0
    } else if (t as f64) <= lambda {
        let mut ln_term = -lambda;
        let mut partial = 0.0;
        for k in 0..t {
            if k > 0 {
                ln_term += ln_lambda - (k as f64).ln();
            }
            partial += ln_term.exp();
        }
        (1.0 - partial).max(0.0)
    } else {
        let mut ln_term = ln_leading;
        let mut sum = 0.0;
        let mut k = t;
        loop {
            let term = ln_term.exp();
            sum += term;
            if term <= sum * 1e-18 || term == 0.0 {
                break;
            }
            k += 1;
            ln_term += ln_lambda - (k as f64).ln();
        }
        sum.min(1.0)
    };

    Ok(PoissonTail {
        lambda,
        t,
        tail,
        leading_term,
    })
}
