mod common;

use common::oracles::{random_surjection_square, random_table_square};
use markov_spaces::generate::trial_rng;
use markov_spaces::independence::IndependenceOps;
use markov_spaces::finstoch::FinStoch;

#[test]
fn independence_matches_conditional_independence_of_tables() {
    let mut independent = 0;
    for trial in 0..200 {
        let mut rng = trial_rng(11, trial);
        let t = random_table_square(&mut rng, 4);
        let sq = t.to_square().unwrap();
        let verdict = FinStoch.is_independent_checked(&sq).unwrap();
        assert_eq!(verdict, t.conditionally_independent(), "{t:?}");
        independent += verdict as usize;
    }
    assert!(independent > 20 && independent < 180, "{independent} independent squares");
}

#[test]
fn setmulti_independence_is_weak_pullback() {
    let mut weak = 0;
    for trial in 0..200 {
        let mut rng = trial_rng(12, trial);
        let sq = random_surjection_square(&mut rng, 4);
        weak += sq.generic_vs_weak_pullback().unwrap() as usize;
    }
    assert!(weak > 20 && weak < 180, "{weak} weak pullbacks");
}
