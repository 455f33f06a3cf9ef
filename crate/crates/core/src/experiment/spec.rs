use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::theoretical_bounds;
use crate::error::{Error, Result};
use crate::policies::toy::{ToyPolicy, ToyRule};
use crate::policies::{AdvicePolicy, ClusterConfig, ClusteredPolicy, GreedyTwoChoice, OneChoice, Policy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    OneChoice,
    Greedy,
    Clustered,
    Advice,
    MaxIndex,
    MinIndex,
    BiasedFirst,
    /// Negative control: ignores the offered pair.
    IllegalZero,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 8] = [
        PolicyKind::OneChoice,
        PolicyKind::Greedy,
        PolicyKind::Clustered,
        PolicyKind::Advice,
        PolicyKind::MaxIndex,
        PolicyKind::MinIndex,
        PolicyKind::BiasedFirst,
        PolicyKind::IllegalZero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::OneChoice => "one-choice",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Clustered => "clustered",
            PolicyKind::Advice => "advice",
            PolicyKind::MaxIndex => "max-index",
            PolicyKind::MinIndex => "min-index",
            PolicyKind::BiasedFirst => "biased-first",
            PolicyKind::IllegalZero => "illegal-zero",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownPolicy(s.to_string()))
    }
}

/// Optional overrides shared by every policy in an experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub cluster_size: Option<usize>,
    pub counter_cap: Option<u32>,
    pub advice_threshold: Option<u32>,
}

/// Instantiate `kind` for `n` bins. Clustered defaults to
/// `c = ceil(log2 log2 n)`, cap `4c`; advice defaults to `T` from the bounds
/// for `(n, delta)` and counts steps where the list outgrows its bound.
pub fn build_policy(kind: PolicyKind, n: usize, delta: f64, params: &PolicyParams) -> Result<Box<dyn Policy>> {
    Ok(match kind {
        PolicyKind::OneChoice => Box::new(OneChoice::new()),
        PolicyKind::Greedy => Box::new(GreedyTwoChoice::new()),
        PolicyKind::Clustered => {
            let d = ClusterConfig::default_for(n);
            let c = params.cluster_size.unwrap_or(d.cluster_size);
            let cap = params.counter_cap.unwrap_or(4 * c as u32);
            Box::new(ClusteredPolicy::new(ClusterConfig::new(c, cap)?))
        }
        PolicyKind::Advice => {
            let bounds = theoretical_bounds(n as u64, delta).ok();
            let threshold = match (params.advice_threshold, bounds) {
                (Some(t), _) => t,
                (None, Some(b)) => b.advice_threshold(),
                (None, None) => {
                    return Err(Error::InvalidConfig(
                        "advice threshold needs n >= 4 and delta in (0, 1], or an explicit threshold".into(),
                    ))
                }
            };
            let mut p = AdvicePolicy::new(threshold)?;
            if let Some(b) = bounds {
                p = p.with_list_bound(b.advice_list_bound);
            }
            Box::new(p)
        }
        PolicyKind::MaxIndex => Box::new(ToyPolicy::new(ToyRule::MaxIndex)),
        PolicyKind::MinIndex => Box::new(ToyPolicy::new(ToyRule::MinIndex)),
        PolicyKind::BiasedFirst => Box::new(ToyPolicy::new(ToyRule::BiasedFirst)),
        PolicyKind::IllegalZero => Box::new(ToyPolicy::new(ToyRule::IllegalZero)),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

/// A scaling scan: every policy at every `n`, `trials` times.
///
/// Read from TOML; every key is optional:
///
/// ```toml
/// n_values = [16384, 131072]
/// delta = 0.5
/// policies = ["one-choice", "greedy", "clustered"]
/// trials = 20
/// base_seed = 7
/// format = "csv"
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n_values: Vec<usize>,
    pub delta: f64,
    pub policies: Vec<PolicyKind>,
    pub trials: u64,
    pub base_seed: u64,
    /// Balls per run; `None` throws `n`.
    pub balls: Option<u64>,
    pub cluster_size: Option<usize>,
    pub counter_cap: Option<u32>,
    pub advice_threshold: Option<u32>,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
    /// Record wall-clock time per run. Off by default so that output files
    /// depend only on the spec.
    pub timing: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            n_values: vec![1 << 14],
            delta: 0.5,
            policies: vec![PolicyKind::OneChoice, PolicyKind::Greedy],
            trials: 20,
            base_seed: 0,
            balls: None,
            cluster_size: None,
            counter_cap: None,
            advice_threshold: None,
            output_path: None,
            format: OutputFormat::Csv,
            timing: false,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn params(&self) -> PolicyParams {
        PolicyParams {
            cluster_size: self.cluster_size,
            counter_cap: self.counter_cap,
            advice_threshold: self.advice_threshold,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::InvalidConfig("n_values must not be empty".into()));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 4) {
            return Err(Error::InvalidConfig(format!("every n must be at least 4, got {n}")));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta must lie in (0, 1], got {}",
                self.delta
            )));
        }
        if self.policies.is_empty() {
            return Err(Error::InvalidConfig("at least one policy is required".into()));
        }
        if self.balls == Some(0) {
            return Err(Error::InvalidConfig("balls must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_names_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(k.name().parse::<PolicyKind>().unwrap(), k);
            let mut p = build_policy(k, 16, 0.5, &PolicyParams::default()).unwrap();
            p.reset(16, 16);
            assert_eq!(p.name(), k.name());
        }
        assert!(matches!(
            "two-choice".parse::<PolicyKind>(),
            Err(Error::UnknownPolicy(_))
        ));
    }

    #[test]
    fn toml_spec() {
        let spec = ExperimentSpec::from_toml_str(
            r#"
            n_values = [16, 32]
            policies = ["greedy", "clustered"]
            trials = 3
            cluster_size = 4
            format = "json"
            "#,
        )
        .unwrap();
        assert_eq!(spec.n_values, vec![16, 32]);
        assert_eq!(spec.policies, vec![PolicyKind::Greedy, PolicyKind::Clustered]);
        assert_eq!(spec.format, OutputFormat::Json);
        assert_eq!(spec.params().cluster_size, Some(4));
        assert_eq!(spec.delta, 0.5);
        spec.validate().unwrap();

        assert!(ExperimentSpec::from_toml_str("policies = [\"nope\"]").is_err());
        assert!(ExperimentSpec::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn validation() {
        let ok = ExperimentSpec::default();
        ok.validate().unwrap();
        for bad in [
            ExperimentSpec {
                trials: 0,
                ..ok.clone()
            },
            ExperimentSpec {
                n_values: vec![],
                ..ok.clone()
            },
            ExperimentSpec {
                n_values: vec![3],
                ..ok.clone()
            },
            ExperimentSpec {
                delta: 0.0,
                ..ok.clone()
            },
            ExperimentSpec {
                delta: 1.1,
                ..ok.clone()
            },
            ExperimentSpec {
                policies: vec![],
                ..ok.clone()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn advice_needs_a_threshold_source() {
        assert!(build_policy(PolicyKind::Advice, 2, 0.5, &PolicyParams::default()).is_err());
        let params = PolicyParams {
            advice_threshold: Some(2),
            ..Default::default()
        };
        assert!(build_policy(PolicyKind::Advice, 2, 0.5, &params).is_ok());
    }
}
