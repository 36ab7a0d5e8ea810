//! Randomized trial runner and the reports it produces.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::generate::trial_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    pub trials: usize,
    pub max_size: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { trials: 300, max_size: 4, seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub instance: String,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<CheckSummary>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.failed == 0)
    }

    pub fn total_checks(&self) -> usize {
        self.checks.iter().map(|c| c.passed + c.failed).sum()
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckSummary> {
        self.checks.iter().filter(|c| c.failed > 0)
    }

    /// Combines reports of the same instance into one.
    pub fn merge(suite: &str, reports: Vec<SuiteReport>) -> SuiteReport {
        let first = &reports[0];
        SuiteReport {
            suite: suite.to_string(),
            instance: first.instance.clone(),
            trials: first.trials,
            seed: first.seed,
            checks: reports.into_iter().flat_map(|r| r.checks).collect(),
        }
    }
}

/// Outcomes collected during one trial.
#[derive(Debug, Default)]
pub struct Trial {
    outcomes: Vec<(&'static str, Option<String>)>,
}

impl Trial {
    /// Records a check; `detail` is only rendered when it fails.
    pub fn check(&mut self, name: &'static str, outcome: Result<bool>, detail: impl FnOnce() -> String) {
        let failure = match outcome {
            Ok(true) => None,
            Ok(false) => Some(detail()),
            Err(e) => Some(format!("{e}; {}", detail())),
        };
        self.outcomes.push((name, failure));
    }

    pub fn pass(&mut self, name: &'static str) {
        self.outcomes.push((name, None));
    }

    pub fn fail(&mut self, name: &'static str, detail: String) {
        self.outcomes.push((name, Some(detail)));
    }
}

/// Runs `trials` independent trials in parallel; trial `k` draws from
/// stream `k` of the seed, so reports do not depend on scheduling.
pub fn run_trials<F>(suite: &str, instance: &str, config: &SuiteConfig, body: F) -> SuiteReport
where
    F: Fn(&mut ChaCha8Rng, &mut Trial) -> Result<()> + Sync,
{
    let results: Vec<Trial> = (0..config.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(config.seed, k as u64);
            let mut trial = Trial::default();
            if let Err(e) = body(&mut rng, &mut trial) {
                trial.fail("trial setup", format!("trial {k}: {e}"));
            }
            trial
        })
        .collect();
    summarize(suite, instance, config.trials, config.seed, results)
}

/// Tallies the outcomes of finished trials by check name.
pub fn summarize(suite: &str, instance: &str, trials: usize, seed: u64, results: Vec<Trial>) -> SuiteReport {
    let mut checks: Vec<CheckSummary> = Vec::new();
    for (k, trial) in results.into_iter().enumerate() {
        for (name, failure) in trial.outcomes {
            let idx = match checks.iter().position(|c| c.name == name) {
                Some(i) => i,
                None => {
                    checks.push(CheckSummary { name: name.to_string(), passed: 0, failed: 0, counterexample: None });
                    checks.len() - 1
                }
            };
            let c = &mut checks[idx];
            match failure {
                None => c.passed += 1,
                Some(detail) => {
                    c.failed += 1;
                    if c.counterexample.is_none() {
                        c.counterexample = Some(format!("trial {k}: {detail}"));
                    }
                }
            }
        }
    }
    SuiteReport {
        suite: suite.to_string(),
        instance: instance.to_string(),
        trials,
        seed,
        checks,
    }
}
