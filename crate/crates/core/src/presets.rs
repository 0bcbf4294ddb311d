//! Ready-made CAOs.

use num_bigint::BigUint;

use crate::model::{validate, CaoSpec, OperatorForm, RawCao, RawEntity, RawOperator, Role, ValidateOptions};

fn raw_op(form: OperatorForm, inputs: &[(&str, u64)], outputs: &[(&str, u64)]) -> RawOperator {
    RawOperator {
        form: Some(form),
        inputs: inputs.iter().map(|(n, r)| (n.to_string(), *r)).collect(),
        outputs: outputs.iter().map(|(n, c)| (n.to_string(), *c)).collect(),
    }
}

/// Seven entities joined by one operator of each form:
/// `M(i:10, j:8) -> (d:1, s:2)`, `L(d:8) -> (g:2)`, `D(s:10) -> (g:1, u:3)`,
/// `F(g:4, u:2) -> (h:1)`, starting from `i = j = 100`.
pub fn worked_example() -> CaoSpec {
    use Role::*;
    let entities = [
        ("i", Initial),
        ("j", Initial),
        ("d", Intermediate),
        ("s", Intermediate),
        ("g", Intermediate),
        ("u", Intermediate),
        ("h", Final),
    ];
    let raw = RawCao {
        name: "worked_example".into(),
        entities: entities
            .iter()
            .map(|(n, r)| RawEntity {
                name: n.to_string(),
                role: Some(*r),
            })
            .collect(),
        operators: vec![
            raw_op(OperatorForm::M, &[("i", 10), ("j", 8)], &[("d", 1), ("s", 2)]),
            raw_op(OperatorForm::L, &[("d", 8)], &[("g", 2)]),
            raw_op(OperatorForm::D, &[("s", 10)], &[("g", 1), ("u", 3)]),
            raw_op(OperatorForm::F, &[("g", 4), ("u", 2)], &[("h", 1)]),
        ],
        initial: vec![("i".into(), BigUint::from(100u32)), ("j".into(), BigUint::from(100u32))],
    };
    validate(&raw, ValidateOptions::default()).expect("worked example is valid")
}

/// Two entities `a -> b` joined by a single L operator.
pub fn line(radix: u64, coefficient: u64) -> CaoSpec {
    let raw = RawCao {
        name: "line".into(),
        entities: vec![
            RawEntity {
                name: "a".into(),
                role: None,
            },
            RawEntity {
                name: "b".into(),
                role: None,
            },
        ],
        operators: vec![raw_op(OperatorForm::L, &[("a", radix)], &[("b", coefficient)])],
        initial: vec![],
    };
    validate(&raw, ValidateOptions::default()).expect("line parameters must satisfy radix >= 2, coefficient >= 1")
}
