#![allow(dead_code)]

use std::sync::Arc;

use markov_spaces::finstoch::{rational, FinStoch, StochMatrix};
use markov_spaces::spaces::{SampleSpace, SpaceMorphism, SpaceOps};

pub fn func(cod: usize, table: &[usize]) -> StochMatrix {
    StochMatrix::from_function(cod, table).unwrap()
}

/// Bit `i` (least significant first) of `0..4`.
pub fn bit(i: usize) -> StochMatrix {
    let table: Vec<usize> = (0..4).map(|w| (w >> i) & 1).collect();
    func(2, &table)
}

pub fn parity() -> StochMatrix {
    func(2, &[0, 1, 1, 0])
}

pub fn uniform(n: usize) -> Arc<SampleSpace<FinStoch>> {
    FinStoch.mk_space(StochMatrix::uniform(n)).unwrap()
}

pub fn point() -> Arc<SampleSpace<FinStoch>> {
    uniform(1)
}

pub fn dist(weights: &[i64]) -> StochMatrix {
    let total: i64 = weights.iter().sum();
    StochMatrix::state(weights.iter().map(|&w| rational(w, total)).collect()).unwrap()
}

pub fn to_point(x: &Arc<SampleSpace<FinStoch>>) -> SpaceMorphism<FinStoch> {
    FinStoch.mk_map(x, &point(), StochMatrix::from_function(1, &vec![0; *x.object()]).unwrap()).unwrap()
}

pub mod oracles;
