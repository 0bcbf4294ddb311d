//! State and carry vectors.
//!
//! Cardinals are unbounded non-negative integers, so both vectors are thin
//! wrappers over `Vec<BigUint>` indexed by entity position.

use std::fmt;
use std::ops::Index;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::model::EntityId;

/// The multicardinal of a CAO in vector form: one cardinal per entity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct StateVector(Vec<BigUint>);

impl StateVector {
    pub fn new(values: Vec<BigUint>) -> Self {
        StateVector(values)
    }

    pub fn zeros(m: usize) -> Self {
        StateVector(vec![BigUint::zero(); m])
    }

    pub fn from_u64s(values: &[u64]) -> Self {
        StateVector(values.iter().map(|&v| BigUint::from(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, id: EntityId) -> &BigUint {
        &self.0[id.0]
    }

    pub fn set(&mut self, id: EntityId, value: BigUint) {
        self.0[id.0] = value;
    }

    pub fn values(&self) -> &[BigUint] {
        &self.0
    }

    pub fn into_values(self) -> Vec<BigUint> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

impl Index<usize> for StateVector {
    type Output = BigUint;

    fn index(&self, i: usize) -> &BigUint {
        &self.0[i]
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

/// Partial carries `p(k)` or common carries `p.(k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CarryVector(Vec<BigUint>);

impl CarryVector {
    pub fn new(values: Vec<BigUint>) -> Self {
        CarryVector(values)
    }

    pub fn zeros(m: usize) -> Self {
        CarryVector(vec![BigUint::zero(); m])
    }

    pub fn from_u64s(values: &[u64]) -> Self {
        CarryVector(values.iter().map(|&v| BigUint::from(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, id: EntityId) -> &BigUint {
        &self.0[id.0]
    }

    pub(crate) fn set(&mut self, id: EntityId, value: BigUint) {
        self.0[id.0] = value;
    }

    pub fn values(&self) -> &[BigUint] {
        &self.0
    }

    /// True when every component is zero, i.e. no operator can fire.
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

impl Index<usize> for CarryVector {
    type Output = BigUint;

    fn index(&self, i: usize) -> &BigUint {
        &self.0[i]
    }
}

impl fmt::Display for CarryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, values: &[BigUint]) -> fmt::Result {
    f.write_str("(")?;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str(")")
}
