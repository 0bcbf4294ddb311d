//! Random acyclic CAOs for differential and round-trip testing.
//!
//! Entities are spread over layers and operators only point from a layer to
//! strictly higher layers, so every generated topology is a DAG.

use std::ops::RangeInclusive;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{validate, CaoSpec, EntityId, OperatorForm, RawCao, RawEntity, RawOperator, ValidateOptions};
use crate::state::StateVector;

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub entities: RangeInclusive<usize>,
    pub radices: RangeInclusive<u64>,
    pub coefficients: RangeInclusive<u64>,
    pub max_initial: u64,
    /// 1 restricts generation to L and D operators.
    pub max_inputs: usize,
    pub max_outputs: usize,
    /// Chance that an eligible entity starts a new operator.
    pub density: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            entities: 2..=12,
            radices: 2..=16,
            coefficients: 1..=9,
            max_initial: 1_000_000,
            max_inputs: 3,
            max_outputs: 3,
            density: 0.8,
        }
    }
}

impl GenConfig {
    pub fn line_distribution_only(mut self) -> Self {
        self.max_inputs = 1;
        self
    }
}

pub fn random_raw<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> RawCao {
    let m = rng.gen_range(cfg.entities.clone());
    let layer_count = rng.gen_range(1..=m);
    let mut layers: Vec<usize> = (0..m).map(|_| rng.gen_range(0..layer_count)).collect();
    layers.sort_unstable();
    let top = layers[m - 1];

    let names: Vec<String> = (0..m).map(|i| format!("x{i}")).collect();
    let mut used = vec![false; m];
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);

    let mut operators = Vec::new();
    for &seed in &order {
        if used[seed] || layers[seed] == top || !rng.gen_bool(cfg.density) {
            continue;
        }
        let mut inputs = vec![seed];
        let mut pool: Vec<usize> = (0..m).filter(|&i| i != seed && !used[i] && layers[i] != top).collect();
        pool.shuffle(rng);
        let extra = rng.gen_range(0..cfg.max_inputs);
        inputs.extend(pool.into_iter().take(extra));

        let floor = inputs.iter().map(|&i| layers[i]).max().unwrap_or(0);
        let mut candidates: Vec<usize> = (0..m).filter(|&i| layers[i] > floor).collect();
        if candidates.is_empty() {
            continue;
        }
        candidates.shuffle(rng);
        let v = rng.gen_range(1..=cfg.max_outputs.min(candidates.len()));
        let outputs: Vec<usize> = candidates.into_iter().take(v).collect();

        for &i in &inputs {
            used[i] = true;
        }
        let form = if rng.gen_bool(0.5) {
            Some(OperatorForm::infer(inputs.len(), outputs.len()).expect("non-empty"))
        } else {
            None
        };
        operators.push(RawOperator {
            form,
            inputs: inputs
                .iter()
                .map(|&i| (names[i].clone(), rng.gen_range(cfg.radices.clone())))
                .collect(),
            outputs: outputs
                .iter()
                .map(|&i| (names[i].clone(), rng.gen_range(cfg.coefficients.clone())))
                .collect(),
        });
    }

    RawCao {
        name: format!("fuzz_m{m}"),
        entities: names
            .into_iter()
            .map(|name| RawEntity { name, role: None })
            .collect(),
        operators,
        initial: vec![],
    }
}

pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> CaoSpec {
    validate(&random_raw(rng, cfg), ValidateOptions::default()).expect("layered generation yields valid DAGs")
}

/// Uniform cardinals in `0..=max`, with roughly a third of entities left empty.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, spec: &CaoSpec, max: u64) -> StateVector {
    let mut state = StateVector::zeros(spec.m());
    for i in 0..spec.m() {
        if rng.gen_bool(2.0 / 3.0) {
            state.set(EntityId(i), BigUint::from(rng.gen_range(0..=max)));
        }
    }
    state
}
