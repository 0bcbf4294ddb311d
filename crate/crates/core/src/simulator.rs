//! Running transformations to a fixed point, conservation analysis and
//! classical positional presets.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use thiserror::Error;

use crate::linalg;
use crate::matrix::{self, DerivedOperators, EngineError, ParameterSchedule, Transition};
use crate::model::{validate, CaoSpec, ModelError, OperatorForm, ParameterSet, RawCao, RawEntity, RawOperator, ValidateOptions};
use crate::operational::{self, OperationalError};
use crate::state::{CarryVector, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Engine {
    Matrix,
    Operational,
    /// Both engines in lock-step; any disagreement is an error.
    #[default]
    Both,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Matrix => "matrix",
            Engine::Operational => "operational",
            Engine::Both => "both",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Termination {
    FixedPoint,
    StepLimit,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::FixedPoint => "fixed-point",
            Termination::StepLimit => "step-limit",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Operational(#[from] OperationalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("engines diverged at step {step}: {detail}")]
    EngineDivergence { step: u64, detail: String },
    #[error("weight {basis} not conserved at step {step}: expected {expected}, found {found}")]
    ConservationViolated {
        basis: usize,
        step: u64,
        expected: BigRational,
        found: BigRational,
    },
}

/// State and carries at step `k`, plus the parameters in force.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub k: u64,
    pub parameters: ParameterSet,
    pub state: StateVector,
    pub partial: CarryVector,
    pub common: CarryVector,
}

/// A recorded transformation: entries for `k = 0..=step_count`.
///
/// The last entry of a fixed-point trace has all-zero common carries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CstTrace {
    pub spec: CaoSpec,
    pub entries: Vec<TraceEntry>,
    pub termination: Termination,
}

impl CstTrace {
    pub fn step_count(&self) -> u64 {
        self.entries.len().saturating_sub(1) as u64
    }

    pub fn initial(&self) -> &StateVector {
        &self.entries[0].state
    }

    pub fn final_state(&self) -> &StateVector {
        &self.entries[self.entries.len() - 1].state
    }

    pub fn states(&self) -> impl Iterator<Item = &StateVector> {
        self.entries.iter().map(|e| &e.state)
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig<'a> {
    pub max_steps: u64,
    pub engine: Engine,
    pub schedule: Option<&'a ParameterSchedule>,
}

impl Default for RunConfig<'_> {
    fn default() -> Self {
        RunConfig {
            max_steps: 1000,
            engine: Engine::Both,
            schedule: None,
        }
    }
}

/// Parameters and operators for the current step, re-derived only when the
/// schedule changes them.
struct StepContext<'a> {
    topology: &'a CaoSpec,
    schedule: Option<&'a ParameterSchedule>,
    current: Option<(ParameterSet, CaoSpec, DerivedOperators)>,
}

impl<'a> StepContext<'a> {
    fn new(topology: &'a CaoSpec, schedule: Option<&'a ParameterSchedule>) -> Self {
        StepContext {
            topology,
            schedule,
            current: None,
        }
    }

    fn at(&mut self, k: u64) -> Result<&(ParameterSet, CaoSpec, DerivedOperators), SimError> {
        let params = match self.schedule {
            Some(s) => s.at(k)?.clone(),
            None => match &self.current {
                Some(_) => return Ok(self.current.as_ref().expect("checked")),
                None => self.topology.parameters(),
            },
        };
        let stale = self.current.as_ref().is_none_or(|(p, _, _)| *p != params);
        if stale {
            let spec = self.topology.with_parameters(&params)?;
            let ops = matrix::derive(&spec);
            self.current = Some((params, spec, ops));
        }
        Ok(self.current.as_ref().expect("just set"))
    }
}

fn advance(engine: Engine, state: &StateVector, spec: &CaoSpec, ops: &DerivedOperators, k: u64) -> Result<Transition, SimError> {
    match engine {
        Engine::Matrix => Ok(matrix::step(state, ops)?),
        Engine::Operational => Ok(operational::step_operational(state, spec)?),
        Engine::Both => {
            let by_matrix = matrix::step(state, ops);
            let by_procedure = operational::step_operational(state, spec);
            match (by_matrix, by_procedure) {
                (Ok(a), Ok(b)) if a == b => Ok(a),
                (a, b) => Err(SimError::EngineDivergence {
                    step: k,
                    detail: describe_divergence(state, &a.map_err(|e| e.to_string()), &b.map_err(|e| e.to_string())),
                }),
            }
        }
    }
}

fn describe_divergence(state: &StateVector, a: &Result<Transition, String>, b: &Result<Transition, String>) -> String {
    let show = |r: &Result<Transition, String>| match r {
        Ok(t) => format!("next {} partial {} common {}", t.next, t.partial, t.common),
        Err(e) => format!("error: {e}"),
    };
    format!("from {state}: matrix gives [{}], operational gives [{}]", show(a), show(b))
}

/// Iterates until the common carries vanish or `max_steps` transitions ran.
pub fn run(spec: &CaoSpec, initial: &StateVector, config: &RunConfig<'_>) -> Result<CstTrace, SimError> {
    spec.check_dimension(initial.len())?;
    if let Some(s) = config.schedule {
        s.check(spec)?;
    }
    let mut ctx = StepContext::new(spec, config.schedule);
    let mut entries = Vec::new();
    let mut state = initial.clone();
    let mut k = 0u64;
    let termination = loop {
        let (params, step_spec, ops) = ctx.at(k)?;
        let t = advance(config.engine, &state, step_spec, ops, k)?;
        let done = t.common.is_zero();
        entries.push(TraceEntry {
            k,
            parameters: params.clone(),
            state: std::mem::replace(&mut state, t.next),
            partial: t.partial,
            common: t.common,
        });
        if done {
            break Termination::FixedPoint;
        }
        if k == config.max_steps {
            break Termination::StepLimit;
        }
        k += 1;
    };
    Ok(CstTrace {
        spec: spec.clone(),
        entries,
        termination,
    })
}

/// Step budget used by the termination guard for acyclic CAOs.
pub fn step_budget(spec: &CaoSpec) -> Option<u64> {
    spec.depth().map(|d| 10 * (d as u64 + 1))
}

/// A rational vector `w` with `wᵀ(Rᵀ − N) = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightVector(pub Vec<BigRational>);

impl WeightVector {
    pub fn dot(&self, state: &StateVector) -> BigRational {
        let ints: Vec<BigInt> = state.values().iter().map(|v| BigInt::from(v.clone())).collect();
        linalg::dot(&self.0, &ints)
    }

    pub fn from_integers(values: &[i64]) -> Self {
        WeightVector(values.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Rational basis of the left null space of `Rᵀ − N`, each vector scaled to
/// primitive integers.
pub fn conserved_weights(spec: &CaoSpec) -> Vec<WeightVector> {
    weights_of(&matrix::derive(spec))
}

pub fn weights_of(ops: &DerivedOperators) -> Vec<WeightVector> {
    let b = linalg::from_integers(&ops.control_matrix());
    linalg::left_null_space(&b, ops.m())
        .iter()
        .map(|w| WeightVector(linalg::primitive(w)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConservationReport {
    /// `w·#(k)` for each basis vector, identical at every step.
    pub constants: Vec<BigRational>,
}

pub fn check_conservation(trace: &CstTrace, weights: &[WeightVector]) -> Result<ConservationReport, SimError> {
    let mut constants = Vec::with_capacity(weights.len());
    for (basis, w) in weights.iter().enumerate() {
        let expected = w.dot(trace.initial());
        for entry in &trace.entries {
            let found = w.dot(&entry.state);
            if found != expected {
                return Err(SimError::ConservationViolated {
                    basis,
                    step: entry.k,
                    expected,
                    found,
                });
            }
        }
        constants.push(expected);
    }
    Ok(ConservationReport { constants })
}

/// Positional numeration as a chain of L operators `e0 -> e1 -> ...`, each
/// with radix `base` and coefficient 1. Digits settle least significant first.
pub fn build_linear_chain(base: u64, length: usize) -> CaoSpec {
    assert!(base >= 2, "chain base must be at least 2");
    assert!(length >= 1, "chain needs at least one entity");
    let name = |t: usize| format!("e{t}");
    let raw = RawCao {
        name: format!("chain_base{base}_len{length}"),
        entities: (0..length)
            .map(|t| RawEntity {
                name: name(t),
                role: None,
            })
            .collect(),
        operators: (0..length - 1)
            .map(|t| RawOperator {
                form: Some(OperatorForm::L),
                inputs: vec![(name(t), base)],
                outputs: vec![(name(t + 1), 1)],
            })
            .collect(),
        initial: vec![],
    };
    validate(&raw, ValidateOptions::default()).expect("chain is a valid DAG")
}

/// Digits of `value` in `base`, least significant first, obtained by running
/// the chain to its fixed point. The last digit absorbs any overflow.
pub fn radix_digits(value: &BigUint, base: u64, length: usize) -> Result<(Vec<BigUint>, u64), SimError> {
    let spec = build_linear_chain(base, length);
    let mut initial = StateVector::zeros(length);
    initial.set(crate::model::EntityId(0), value.clone());
    let config = RunConfig {
        max_steps: length as u64,
        engine: Engine::Matrix,
        schedule: None,
    };
    let trace = run(&spec, &initial, &config)?;
    Ok((trace.final_state().values().to_vec(), trace.step_count()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub step: u64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub steps_compared: u64,
    pub divergence: Option<Divergence>,
}

impl EquivalenceReport {
    pub fn is_equal(&self) -> bool {
        self.divergence.is_none()
    }
}

/// Runs both engines side by side for up to `steps` transitions.
pub fn compare_engines(spec: &CaoSpec, initial: &StateVector, steps: u64) -> EquivalenceReport {
    let ops = matrix::derive(spec);
    let mut state = initial.clone();
    let mut compared = 0;
    while compared < steps {
        let a = matrix::step(&state, &ops).map_err(|e| e.to_string());
        let b = operational::step_operational(&state, spec).map_err(|e| e.to_string());
        if a != b {
            return EquivalenceReport {
                steps_compared: compared,
                divergence: Some(Divergence {
                    step: compared,
                    detail: describe_divergence(&state, &a, &b),
                }),
            };
        }
        compared += 1;
        let t = a.expect("equal results, both Ok or both Err");
        if t.common.is_zero() {
            break;
        }
        state = t.next;
    }
    EquivalenceReport {
        steps_compared: compared,
        divergence: None,
    }
}
