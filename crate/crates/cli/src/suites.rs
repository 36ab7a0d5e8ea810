//! The randomized suites behind `workbench axioms`.

use markov_spaces::axioms::{verify_bayes, verify_markov_axioms};
use markov_spaces::finstoch::FinStoch;
use markov_spaces::gauss::Gauss;
use markov_spaces::generate::Generate;
use markov_spaces::ip::{verify_criteria, verify_ip_axioms};
use markov_spaces::namepool::verify_name_pool;
use markov_spaces::report::{SuiteConfig, SuiteReport};
use markov_spaces::setmulti::SetMulti;
use markov_spaces::strongname::StrongName;
use serde_json::{json, Value};

use crate::doc::Instance;

/// Tolerance for the Gaussian independence suites when `--tol` is absent.
/// Those suites chain several pseudoinverses, so they lose more precision
/// than the plain axioms.
pub const GAUSS_INDEPENDENCE_TOL: f64 = 1e-7;

/// The name-pool oracle is exhaustive, so its arity is capped.
pub const NAME_POOL_MAX_ARITY: usize = 3;

fn generic<M: Generate>(axioms: &M, independence: &M, config: &SuiteConfig) -> Vec<SuiteReport> {
    vec![
        verify_markov_axioms(axioms, config),
        verify_bayes(axioms, config),
        verify_criteria(independence, config),
        verify_ip_axioms(independence, config),
    ]
}

pub fn run_suites(instance: Instance, config: &SuiteConfig, tol: Option<f64>) -> Vec<SuiteReport> {
    match instance {
        Instance::Finstoch => generic(&FinStoch, &FinStoch, config),
        Instance::Setmulti => generic(&SetMulti, &SetMulti, config),
        Instance::Gauss => {
            let axioms = tol.map(Gauss::with_tol).unwrap_or_default();
            let independence = Gauss::with_tol(tol.unwrap_or(GAUSS_INDEPENDENCE_TOL));
            generic(&axioms, &independence, config)
        }
        Instance::Strongname => {
            let mut reports = generic(&StrongName, &StrongName, config);
            reports.push(verify_name_pool(config.max_size.min(NAME_POOL_MAX_ARITY) as u32));
            reports
        }
    }
}

/// The `axioms` report and whether every suite passed.
pub fn axioms_report(instance: Instance, config: &SuiteConfig, tol: Option<f64>) -> (Value, bool) {
    let reports = run_suites(instance, config, tol);
    let ok = reports.iter().all(SuiteReport::ok);
    let report = json!({
        "instance": instance,
        "config": config,
        "tol": tol,
        "ok": ok,
        "suites": reports,
    });
    (report, ok)
}
