//! Matrix form of the state equation.
//!
//! The CAO is a linear discrete system with nonlinear control:
//!
//! ```text
//! #(k+1) = A·#(k) + B·u(#(k)),   A = I,   B = Rᵀ − N,   u = Λ ∘ floor ∘ N⁻
//! ```
//!
//! `N` is the diagonal of radices, `N⁻` its exact rational inverse (zero where
//! an entity feeds no operator), `Rᵀ` holds conversion coefficients and `Λ`
//! folds partial carries into common carries by taking the minimum over the
//! inputs of each fusing (F/M) operator. With no fusing operator `Λ` is the
//! identity and the equation degenerates to `#(k+1) = #(k) + (Rᵀ − N)⌊N⁻#(k)⌋`.
//!
//! In `Rᵀ` each output coefficient of an operator appears under exactly one
//! of its input columns (see [`crate::model::OperatorSpec::representative_input`]). Since
//! the common carry is replicated across a group, spreading the coefficient
//! over every input column would count each transformant once per input.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CaoSpec, EntityId, ModelError, ParameterSet};
use crate::state::{CarryVector, StateVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("state has dimension {found}, operators expect {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("internal consistency failure: component {entity} of the next state is negative ({value})")]
    NegativeComponent { entity: usize, value: BigInt },
    #[error("no parameters scheduled for step {step} and no default")]
    ScheduleGap { step: u64 },
    #[error("scheduled parameters do not fit the topology: {0}")]
    InvalidParameters(#[from] ModelError),
    #[error("the no-Λ state equation only applies when there are no F/M operators")]
    FusingOperatorsPresent,
}

/// N, N⁻, Rᵀ and the Λ grouping of one parameter set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedOperators {
    radices: Vec<u64>,
    inverse_radices: Vec<BigRational>,
    transfer: Vec<Vec<u64>>,
    carry_groups: Vec<Vec<EntityId>>,
}

pub fn derive(spec: &CaoSpec) -> DerivedOperators {
    let m = spec.m();
    let mut radices = vec![0u64; m];
    let mut transfer = vec![vec![0u64; m]; m];
    let mut carry_groups = Vec::new();

    for op in spec.operators() {
        for input in &op.inputs {
            radices[input.entity.0] = input.radix;
        }
        for (position, output) in op.outputs.iter().enumerate() {
            let column = op.representative_input(position);
            transfer[output.entity.0][column.0] += output.coefficient;
        }
        if op.form.is_fusing() {
            carry_groups.push(op.inputs.iter().map(|i| i.entity).collect());
        }
    }

    let inverse_radices = radices
        .iter()
        .map(|&n| {
            if n == 0 {
                BigRational::zero()
            } else {
                BigRational::new(BigInt::one(), BigInt::from(n))
            }
        })
        .collect();

    DerivedOperators {
        radices,
        inverse_radices,
        transfer,
        carry_groups,
    }
}

impl DerivedOperators {
    pub fn m(&self) -> usize {
        self.radices.len()
    }

    /// Diagonal of N.
    pub fn radices(&self) -> &[u64] {
        &self.radices
    }

    /// Diagonal of N⁻.
    pub fn inverse_radices(&self) -> &[BigRational] {
        &self.inverse_radices
    }

    /// Rᵀ, indexed `[target][source]`.
    pub fn transfer(&self) -> &[Vec<u64>] {
        &self.transfer
    }

    pub fn carry_groups(&self) -> &[Vec<EntityId>] {
        &self.carry_groups
    }

    /// The control matrix B = Rᵀ − N.
    pub fn control_matrix(&self) -> Vec<Vec<i128>> {
        let m = self.m();
        (0..m)
            .map(|row| {
                (0..m)
                    .map(|col| {
                        let r = i128::from(self.transfer[row][col]);
                        if row == col {
                            r - i128::from(self.radices[row])
                        } else {
                            r
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn check(&self, found: usize) -> Result<(), EngineError> {
        if found == self.m() {
            Ok(())
        } else {
            Err(EngineError::DimensionMismatch {
                expected: self.m(),
                found,
            })
        }
    }
}

/// `⌊N⁻ #⌋`, computed from the exact rational reciprocals.
pub fn partial_carries(state: &StateVector, ops: &DerivedOperators) -> Result<CarryVector, EngineError> {
    ops.check(state.len())?;
    let carries = state
        .values()
        .iter()
        .zip(&ops.inverse_radices)
        .map(|(value, inv)| {
            let scaled = BigRational::from_integer(BigInt::from(value.clone())) * inv;
            scaled
                .floor()
                .to_integer()
                .to_biguint()
                .expect("floor of a non-negative rational is non-negative")
        })
        .collect();
    Ok(CarryVector::new(carries))
}

/// Λ applied to partial carries: min over each carry group, identity elsewhere.
pub fn common_carries(partial: &CarryVector, ops: &DerivedOperators) -> Result<CarryVector, EngineError> {
    ops.check(partial.len())?;
    let mut common = partial.clone();
    for group in &ops.carry_groups {
        let min = group
            .iter()
            .map(|id| partial.get(*id))
            .min()
            .cloned()
            .unwrap_or_default();
        for id in group {
            common.set(*id, min.clone());
        }
    }
    for (i, &n) in ops.radices.iter().enumerate() {
        if n == 0 {
            common.set(EntityId(i), BigUint::zero());
        }
    }
    Ok(common)
}

/// One step of the state equation, with the carry vectors that drove it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub next: StateVector,
    pub partial: CarryVector,
    pub common: CarryVector,
}

pub fn step(state: &StateVector, ops: &DerivedOperators) -> Result<Transition, EngineError> {
    let partial = partial_carries(state, ops)?;
    let common = common_carries(&partial, ops)?;
    let next = apply_control(state, ops, &common)?;
    Ok(Transition { next, partial, common })
}

/// The state equation without Λ; only valid when no operator fuses inputs.
pub fn step_linear(state: &StateVector, ops: &DerivedOperators) -> Result<Transition, EngineError> {
    if !ops.carry_groups.is_empty() {
        return Err(EngineError::FusingOperatorsPresent);
    }
    let partial = partial_carries(state, ops)?;
    let next = apply_control(state, ops, &partial)?;
    Ok(Transition {
        next,
        common: partial.clone(),
        partial,
    })
}

/// `# + (Rᵀ − N)·control`, in exact integers.
fn apply_control(state: &StateVector, ops: &DerivedOperators, control: &CarryVector) -> Result<StateVector, EngineError> {
    let b = ops.control_matrix();
    let control: Vec<BigInt> = control.values().iter().map(|c| BigInt::from(c.clone())).collect();
    let mut next = Vec::with_capacity(state.len());
    for (i, row) in b.iter().enumerate() {
        let mut value = BigInt::from(state[i].clone());
        for (coef, c) in row.iter().zip(&control) {
            if *coef != 0 && !c.is_zero() {
                value += BigInt::from(*coef) * c;
            }
        }
        if value.is_negative() {
            return Err(EngineError::NegativeComponent { entity: i, value });
        }
        next.push(value.to_biguint().expect("checked non-negative"));
    }
    Ok(StateVector::new(next))
}

/// Step-indexed parameters over a fixed topology.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterSchedule {
    pub default: Option<ParameterSet>,
    pub steps: BTreeMap<u64, ParameterSet>,
}

impl ParameterSchedule {
    pub fn constant(params: ParameterSet) -> Self {
        ParameterSchedule {
            default: Some(params),
            steps: BTreeMap::new(),
        }
    }

    pub fn with_step(mut self, k: u64, params: ParameterSet) -> Self {
        self.steps.insert(k, params);
        self
    }

    pub fn at(&self, k: u64) -> Result<&ParameterSet, EngineError> {
        self.steps
            .get(&k)
            .or(self.default.as_ref())
            .ok_or(EngineError::ScheduleGap { step: k })
    }

    /// Every scheduled set must fit the topology.
    pub fn check(&self, topology: &CaoSpec) -> Result<(), ModelError> {
        for params in self.default.iter().chain(self.steps.values()) {
            topology.check_parameters(params)?;
        }
        Ok(())
    }
}

/// Operators for step `k` of a non-stationary CAO.
pub fn scheduled_operators(topology: &CaoSpec, schedule: &ParameterSchedule, k: u64) -> Result<DerivedOperators, EngineError> {
    let params = schedule.at(k)?;
    Ok(derive(&topology.with_parameters(params)?))
}

pub fn step_nonstationary(
    state: &StateVector,
    topology: &CaoSpec,
    schedule: &ParameterSchedule,
    k: u64,
) -> Result<Transition, EngineError> {
    step(state, &scheduled_operators(topology, schedule, k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use num_traits::ToPrimitive;

    fn ops() -> DerivedOperators {
        derive(&presets::worked_example())
    }

    #[test]
    fn control_matrix_matches_printed() {
        // rows/cols: i j d s g u h
        let expected: Vec<Vec<i64>> = vec![
            vec![-10, 0, 0, 0, 0, 0, 0],
            vec![0, -8, 0, 0, 0, 0, 0],
            vec![1, 0, -8, 0, 0, 0, 0],
            vec![0, 2, 0, -10, 0, 0, 0],
            vec![0, 0, 2, 1, -4, 0, 0],
            vec![0, 0, 0, 3, 0, -2, 0],
            vec![0, 0, 0, 0, 1, 0, 0],
        ];
        let b: Vec<Vec<i64>> = ops()
            .control_matrix()
            .into_iter()
            .map(|row| row.into_iter().map(|v| v.to_i64().unwrap()).collect())
            .collect();
        assert_eq!(b, expected);
    }

    #[test]
    fn inverse_radix_diagonal() {
        let d = ops();
        let expected: Vec<BigRational> = [10, 8, 8, 10, 4, 2]
            .iter()
            .map(|&n| BigRational::new(BigInt::one(), BigInt::from(n)))
            .chain(std::iter::once(BigRational::zero()))
            .collect();
        assert_eq!(d.inverse_radices(), expected.as_slice());
        for (n, inv) in d.radices().iter().zip(d.inverse_radices()) {
            if *n != 0 {
                assert_eq!(BigRational::from_integer(BigInt::from(*n)) * inv, BigRational::one());
            }
        }
    }

    #[test]
    fn single_line_operators() {
        let spec = presets::line(2, 3);
        let d = derive(&spec);
        assert_eq!(d.transfer(), &[vec![0, 0], vec![3, 0]]);
        assert_eq!(d.radices(), &[2, 0]);
        assert!(d.carry_groups().is_empty());
    }

    #[test]
    fn carries_of_initial_state() {
        let d = ops();
        let state = StateVector::from_u64s(&[100, 100, 0, 0, 0, 0, 0]);
        let p = partial_carries(&state, &d).unwrap();
        assert_eq!(p, CarryVector::from_u64s(&[10, 12, 0, 0, 0, 0, 0]));
        let pc = common_carries(&p, &d).unwrap();
        assert_eq!(pc, CarryVector::from_u64s(&[10, 10, 0, 0, 0, 0, 0]));
        assert!(partial_carries(&StateVector::zeros(7), &d).unwrap().is_zero());
    }

    #[test]
    fn fusion_group_takes_minimum() {
        let d = ops();
        let p = CarryVector::from_u64s(&[0, 2, 0, 0, 1, 3, 0]);
        assert_eq!(common_carries(&p, &d).unwrap(), CarryVector::from_u64s(&[0, 0, 0, 0, 1, 1, 0]));
    }

    #[test]
    fn ungrouped_carries_pass_through() {
        let spec = crate::simulator::build_linear_chain(10, 4);
        let d = derive(&spec);
        let p = CarryVector::from_u64s(&[3, 4, 5, 0]);
        assert_eq!(common_carries(&p, &d).unwrap(), p);
    }

    #[test]
    fn worked_example_steps() {
        let d = ops();
        let trace = [
            [100, 100, 0, 0, 0, 0, 0],
            [0, 20, 10, 20, 0, 0, 0],
            [0, 20, 2, 0, 4, 6, 0],
            [0, 20, 2, 0, 0, 4, 1],
        ];
        for pair in trace.windows(2) {
            let t = step(&StateVector::from_u64s(&pair[0]), &d).unwrap();
            assert_eq!(t.next, StateVector::from_u64s(&pair[1]));
        }
        let last = step(&StateVector::from_u64s(&trace[3]), &d).unwrap();
        assert!(last.common.is_zero());
        assert_eq!(last.next, StateVector::from_u64s(&trace[3]));
    }

    #[test]
    fn linear_path_refuses_fusing_operators() {
        assert_eq!(step_linear(&StateVector::zeros(7), &ops()), Err(EngineError::FusingOperatorsPresent));
    }

    #[test]
    fn dimension_is_checked() {
        assert!(matches!(
            step(&StateVector::zeros(3), &ops()),
            Err(EngineError::DimensionMismatch { expected: 7, found: 3 })
        ));
    }

    #[test]
    fn two_step_schedule() {
        let spec = presets::line(10, 1);
        let mut second = spec.parameters();
        second.operators[0].radices[0] = 5;
        let schedule = ParameterSchedule {
            default: None,
            steps: [(0, spec.parameters()), (1, second)].into_iter().collect(),
        };
        let s0 = StateVector::from_u64s(&[27, 0]);
        let s1 = step_nonstationary(&s0, &spec, &schedule, 0).unwrap().next;
        assert_eq!(s1, StateVector::from_u64s(&[7, 2]));
        let s2 = step_nonstationary(&s1, &spec, &schedule, 1).unwrap().next;
        assert_eq!(s2, StateVector::from_u64s(&[2, 3]));
        assert_eq!(
            step_nonstationary(&s2, &spec, &schedule, 2),
            Err(EngineError::ScheduleGap { step: 2 })
        );
    }

    #[test]
    fn constant_schedule_is_stationary() {
        let spec = presets::worked_example();
        let schedule = ParameterSchedule::constant(spec.parameters());
        let d = derive(&spec);
        let mut s = StateVector::from_u64s(&[100, 100, 0, 0, 0, 0, 0]);
        for k in 0..5 {
            let a = step(&s, &d).unwrap();
            let b = step_nonstationary(&s, &spec, &schedule, k).unwrap();
            assert_eq!(a, b);
            s = a.next;
        }
    }
}
