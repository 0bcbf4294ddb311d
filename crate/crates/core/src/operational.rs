//! Direct execution of the operator procedures.
//!
//! This engine never builds a matrix. Each operator computes its partial
//! carries by integer division, takes their minimum as the common carry,
//! leaves the remainders in its inputs and adds transformants to its outputs.
//! A step evaluates every operator against the same snapshot and then sums
//! the effects, which is what the matrix engine must agree with.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use thiserror::Error;

use crate::matrix::Transition;
use crate::model::{CaoSpec, EntityId, OperatorForm, OperatorSpec};
use crate::state::{CarryVector, StateVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperationalError {
    #[error("operator has form {found}, procedure expects {expected}")]
    FormMismatch { expected: OperatorForm, found: OperatorForm },
    #[error("state has dimension {found}, CAO has {expected} entities")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entity {entity} would become negative")]
    Underflow { entity: usize },
}

/// What one operator does to the state during a step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorEffect {
    /// `⌊#ᵢ/nᵢ⌋` for each input, in declaration order.
    pub partial: Vec<(EntityId, BigUint)>,
    pub common: BigUint,
    /// Amount removed from each input: `common · nᵢ`.
    pub debits: Vec<(EntityId, BigUint)>,
    /// Transformant added to each output: `common · r`.
    pub credits: Vec<(EntityId, BigUint)>,
}

impl OperatorEffect {
    pub fn is_noop(&self) -> bool {
        self.common.is_zero()
    }
}

fn expect_form(op: &OperatorSpec, expected: OperatorForm) -> Result<(), OperationalError> {
    if op.form == expected {
        Ok(())
    } else {
        Err(OperationalError::FormMismatch {
            expected,
            found: op.form,
        })
    }
}

/// Line operator: carry, remainder, one transformant.
pub fn apply_l(state: &StateVector, op: &OperatorSpec) -> Result<OperatorEffect, OperationalError> {
    expect_form(op, OperatorForm::L)?;
    let input = op.inputs[0];
    let output = op.outputs[0];
    let cardinal = state.get(input.entity);
    let (carry, remainder) = cardinal.div_rem(&BigUint::from(input.radix));
    let q = &carry * output.coefficient;
    Ok(OperatorEffect {
        partial: vec![(input.entity, carry.clone())],
        debits: vec![(input.entity, cardinal - remainder)],
        credits: vec![(output.entity, q)],
        common: carry,
    })
}

/// Distribution operator: one carry, a transformant per output.
pub fn apply_d(state: &StateVector, op: &OperatorSpec) -> Result<OperatorEffect, OperationalError> {
    expect_form(op, OperatorForm::D)?;
    let input = op.inputs[0];
    let cardinal = state.get(input.entity);
    let (carry, remainder) = cardinal.div_rem(&BigUint::from(input.radix));
    let credits = op
        .outputs
        .iter()
        .map(|o| (o.entity, &carry * o.coefficient))
        .collect();
    Ok(OperatorEffect {
        partial: vec![(input.entity, carry.clone())],
        debits: vec![(input.entity, cardinal - remainder)],
        credits,
        common: carry,
    })
}

/// Fusion operator: common carry over all inputs, one transformant.
pub fn apply_f(state: &StateVector, op: &OperatorSpec) -> Result<OperatorEffect, OperationalError> {
    expect_form(op, OperatorForm::F)?;
    Ok(fused(state, op))
}

/// Multi operator: common carry over all inputs, a transformant per output.
pub fn apply_m(state: &StateVector, op: &OperatorSpec) -> Result<OperatorEffect, OperationalError> {
    expect_form(op, OperatorForm::M)?;
    Ok(fused(state, op))
}

// (i) partial carries, (ii) their minimum, (iii) remainders, (iv)-(v) transformants.
fn fused(state: &StateVector, op: &OperatorSpec) -> OperatorEffect {
    let partial: Vec<(EntityId, BigUint)> = op
        .inputs
        .iter()
        .map(|i| (i.entity, state.get(i.entity) / i.radix))
        .collect();
    let common = partial.iter().map(|(_, p)| p).min().cloned().unwrap_or_default();
    let debits = op.inputs.iter().map(|i| (i.entity, &common * i.radix)).collect();
    let credits = op.outputs.iter().map(|o| (o.entity, &common * o.coefficient)).collect();
    OperatorEffect {
        partial,
        common,
        debits,
        credits,
    }
}

/// Dispatches on the operator's form.
pub fn apply(state: &StateVector, op: &OperatorSpec) -> OperatorEffect {
    let effect = match op.form {
        OperatorForm::L => apply_l(state, op),
        OperatorForm::D => apply_d(state, op),
        OperatorForm::F => apply_f(state, op),
        OperatorForm::M => apply_m(state, op),
    };
    effect.expect("dispatch matches form")
}

/// The min-carry procedure for an operator of any valence.
pub fn apply_generic(state: &StateVector, op: &OperatorSpec) -> OperatorEffect {
    fused(state, op)
}

/// One synchronous step: all operators read the same snapshot.
pub fn step_operational(state: &StateVector, spec: &CaoSpec) -> Result<Transition, OperationalError> {
    if state.len() != spec.m() {
        return Err(OperationalError::DimensionMismatch {
            expected: spec.m(),
            found: state.len(),
        });
    }
    let m = spec.m();
    let effects: Vec<OperatorEffect> = spec.operators().iter().map(|op| apply(state, op)).collect();

    let mut partial = CarryVector::zeros(m);
    let mut common = CarryVector::zeros(m);
    let mut next = state.clone();
    for effect in &effects {
        for (id, p) in &effect.partial {
            partial.set(*id, p.clone());
            common.set(*id, effect.common.clone());
        }
        for (id, debit) in &effect.debits {
            let current = next.get(*id);
            if debit > current {
                return Err(OperationalError::Underflow { entity: id.0 });
            }
            let reduced = current - debit;
            next.set(*id, reduced);
        }
    }
    for effect in &effects {
        for (id, q) in &effect.credits {
            let raised = next.get(*id) + q;
            next.set(*id, raised);
        }
    }
    Ok(Transition { next, partial, common })
}
