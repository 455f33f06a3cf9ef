use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form quantities for `n` bins and memory exponent `delta`, all with
/// base-2 logarithms and left unrounded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalBounds {
    pub n: u64,
    pub delta: f64,
    /// `(delta/2) log n / log log n`: max-load lower bound and phase count.
    pub lower_l: f64,
    /// `2 delta log n / log log n`: advice threshold.
    pub upper_t: f64,
    /// `1 / (2 lower_l)`.
    pub epsilon: f64,
    /// `n^delta / (2 log n)`: w.h.p. size of the advice list.
    pub advice_list_bound: f64,
}

impl TheoreticalBounds {
    /// Smallest integer load that counts as "at least `upper_t`".
    pub fn advice_threshold(&self) -> u32 {
        (self.upper_t.ceil() as u32).max(1)
    }

    pub fn log2_log2_n(&self) -> f64 {
        (self.n as f64).log2().log2()
    }
}

pub fn theoretical_bounds(n: u64, delta: f64) -> Result<TheoreticalBounds> {
    if n < 4 {
        return Err(Error::InvalidConfig(format!("bounds need n >= 4, got {n}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidConfig(format!("delta must lie in (0, 1], got {delta}")));
    }
    let lg = (n as f64).log2();
    let ratio = lg / lg.log2();
    let lower_l = delta / 2.0 * ratio;
    Ok(TheoreticalBounds {
        n,
        delta,
        lower_l,
        upper_t: 2.0 * delta * ratio,
        epsilon: 1.0 / (2.0 * lower_l),
        advice_list_bound: (n as f64).powf(delta) / (2.0 * lg),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdviceSizeReport {
    pub threshold: u32,
    pub count_over_t: usize,
    pub bound: f64,
    pub ok: bool,
}

/// Count bins with at least `T` balls and compare against the list-size
/// bound. The bound is a high-probability statement, so a miss is a data
/// point rather than an error.
pub fn advice_list_size_check(loads: &[u32], n: u64, delta: f64) -> Result<AdviceSizeReport> {
    let b = theoretical_bounds(n, delta)?;
    let threshold = b.advice_threshold();
    let count_over_t = loads.iter().filter(|&&l| l >= threshold).count();
    Ok(AdviceSizeReport {
        threshold,
        count_over_t,
        bound: b.advice_list_bound,
        ok: count_over_t as f64 <= b.advice_list_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formula_values() {
        let b = theoretical_bounds(1 << 16, 0.5).unwrap();
        assert!((b.lower_l - 1.0).abs() < 1e-12);
        assert!((b.upper_t - 4.0).abs() < 1e-12);
        assert!((b.epsilon - 0.5).abs() < 1e-12);

        let b = theoretical_bounds(1 << 16, 1.0).unwrap();
        assert!((b.lower_l - 2.0).abs() < 1e-12);
        assert!((b.upper_t - 8.0).abs() < 1e-12);

        let b = theoretical_bounds(1 << 20, 0.5).unwrap();
        assert!((b.advice_list_bound - 25.6).abs() < 1e-9);
        assert_eq!(b.advice_threshold(), 5);
    }

    #[test]
    fn domain_errors() {
        assert!(theoretical_bounds(3, 0.5).is_err());
        assert!(theoretical_bounds(16, 0.0).is_err());
        assert!(theoretical_bounds(16, 1.5).is_err());
        assert!(theoretical_bounds(16, f64::NAN).is_err());
    }

    #[test]
    fn light_loads_pass_size_check() {
        let r = advice_list_size_check(&[0, 1, 2, 3], 1 << 16, 0.5).unwrap();
        assert_eq!(r.threshold, 4);
        assert_eq!(r.count_over_t, 0);
        assert!(r.ok);
    }

    proptest! {
        #[test]
        fn t_is_four_l(log_n in 2u32..60, delta in 0.01f64..=1.0) {
            let b = theoretical_bounds(1u64 << log_n, delta).unwrap();
            prop_assert!((b.upper_t - 4.0 * b.lower_l).abs() <= 1e-12 * b.upper_t.max(1.0));
        }
    }
}
