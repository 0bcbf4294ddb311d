//! Canonical text and DOT output.

use std::fmt::Write as _;

use crate::model::{CaoSpec, Role};

/// Canonical form: explicit roles and forms, one statement per line.
pub fn serialize(spec: &CaoSpec) -> String {
    let mut out = String::new();
    let name = |id: crate::model::EntityId| spec.entity(id).name.as_str();
    writeln!(out, "cao {} {{", spec.name()).unwrap();
    for e in spec.entities() {
        writeln!(out, "    entity {} {};", e.name, e.role.keyword()).unwrap();
    }
    if !spec.operators().is_empty() {
        out.push('\n');
    }
    for op in spec.operators() {
        let ins: Vec<String> = op.inputs.iter().map(|i| format!("{}:{}", name(i.entity), i.radix)).collect();
        let outs: Vec<String> = op
            .outputs
            .iter()
            .map(|o| format!("{}:{}", name(o.entity), o.coefficient))
            .collect();
        writeln!(out, "    operator {} ({}) -> ({});", op.form, ins.join(", "), outs.join(", ")).unwrap();
    }
    let init: Vec<String> = spec
        .to_raw()
        .initial
        .iter()
        .map(|(n, v)| format!("{n} = {v}"))
        .collect();
    if !init.is_empty() {
        writeln!(out, "\n    init {};", init.join(", ")).unwrap();
    }
    out.push_str("}\n");
    out
}

fn shape(role: Role) -> &'static str {
    match role {
        Role::Initial => "triangle",
        Role::Intermediate => "circle",
        Role::Final => "invtriangle",
    }
}

/// Graphviz digraph: entity nodes shaped by role, one box per operator,
/// input edges labelled with radices and output edges with coefficients.
pub fn export_dot(spec: &CaoSpec) -> String {
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", spec.name()).unwrap();
    if spec.m() > 0 {
        out.push_str("    rankdir=LR;\n");
    }
    for e in spec.entities() {
        writeln!(out, "    \"{}\" [shape={}];", e.name, shape(e.role)).unwrap();
    }
    for (k, op) in spec.operators().iter().enumerate() {
        writeln!(out, "    \"op:{k}\" [label=\"{}\", shape=box];", op.form).unwrap();
    }
    for (k, op) in spec.operators().iter().enumerate() {
        for i in &op.inputs {
            writeln!(out, "    \"{}\" -> \"op:{k}\" [label=\"{}\"];", spec.entity(i.entity).name, i.radix).unwrap();
        }
        for o in &op.outputs {
            writeln!(
                out,
                "    \"op:{k}\" -> \"{}\" [label=\"{}\"];",
                spec.entity(o.entity).name,
                o.coefficient
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}
