//! Trace and schedule files.
//!
//! The structured trace is JSON carrying `format_version`, the full CAO
//! description, the parameters in force at every step, the state and carry
//! vectors, and the termination status. Cardinals are decimal strings so
//! values of any size survive the round trip.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::ParameterSchedule;
use crate::model::{
    validate, CaoSpec, OperatorForm, ParameterSet, RawCao, RawEntity, RawOperator, Role, ValidateOptions,
    ValidationReport,
};
use crate::simulator::{CstTrace, Termination, TraceEntry};
use crate::state::{CarryVector, StateVector};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceFormat {
    Rows,
    Structured,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error(transparent)]
    Spec(#[from] ValidationReport),
}

pub fn export_trace(trace: &CstTrace, format: TraceFormat) -> String {
    match format {
        TraceFormat::Rows => rows(trace),
        TraceFormat::Structured => {
            serde_json::to_string_pretty(&TraceDoc::from(trace)).expect("trace documents always serialize") + "\n"
        }
    }
}

fn rows(trace: &CstTrace) -> String {
    let mut out = String::new();
    let names: Vec<&str> = trace.spec.entities().iter().map(|e| e.name.as_str()).collect();
    writeln!(
        out,
        "# cao {}: {} after {} steps",
        trace.spec.name(),
        trace.termination.name(),
        trace.step_count()
    )
    .unwrap();
    let carries: Vec<String> = names.iter().map(|n| format!("p.{n}")).collect();
    writeln!(out, "# k | {} | {}", names.join(" "), carries.join(" ")).unwrap();
    for e in &trace.entries {
        writeln!(out, "{} | {} | {}", e.k, join(e.state.values()), join(e.common.values())).unwrap();
    }
    out
}

fn join(values: &[BigUint]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

#[derive(Serialize, Deserialize)]
struct TraceDoc {
    format_version: u32,
    spec: SpecDoc,
    termination: String,
    step_count: u64,
    steps: Vec<StepDoc>,
}

#[derive(Serialize, Deserialize)]
struct SpecDoc {
    name: String,
    entities: Vec<EntityDoc>,
    operators: Vec<OperatorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default_state: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct EntityDoc {
    name: String,
    role: Role,
}

#[derive(Serialize, Deserialize)]
struct OperatorDoc {
    form: OperatorForm,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct StepDoc {
    k: u64,
    parameters: ParameterSet,
    state: Vec<String>,
    partial: Vec<String>,
    common: Vec<String>,
}

fn strings(values: &[BigUint]) -> Vec<String> {
    values.iter().map(ToString::to_string).collect()
}

fn numbers(values: &[String]) -> Result<Vec<BigUint>, FormatError> {
    values
        .iter()
        .map(|s| {
            s.parse::<BigUint>()
                .map_err(|_| FormatError::Invalid(format!("`{s}` is not a non-negative integer")))
        })
        .collect()
}

impl From<&CstTrace> for TraceDoc {
    fn from(trace: &CstTrace) -> Self {
        let spec = &trace.spec;
        let name = |id: crate::model::EntityId| spec.entity(id).name.clone();
        TraceDoc {
            format_version: FORMAT_VERSION,
            spec: SpecDoc {
                name: spec.name().to_string(),
                entities: spec
                    .entities()
                    .iter()
                    .map(|e| EntityDoc {
                        name: e.name.clone(),
                        role: e.role,
                    })
                    .collect(),
                operators: spec
                    .operators()
                    .iter()
                    .map(|op| OperatorDoc {
                        form: op.form,
                        inputs: op.inputs.iter().map(|i| name(i.entity)).collect(),
                        outputs: op.outputs.iter().map(|o| name(o.entity)).collect(),
                    })
                    .collect(),
                default_state: spec.default_state().map(|s| strings(s.values())),
            },
            termination: trace.termination.name().to_string(),
            step_count: trace.step_count(),
            steps: trace
                .entries
                .iter()
                .map(|e| StepDoc {
                    k: e.k,
                    parameters: e.parameters.clone(),
                    state: strings(e.state.values()),
                    partial: strings(e.partial.values()),
                    common: strings(e.common.values()),
                })
                .collect(),
        }
    }
}

/// Reads a structured trace back. The CAO's own radices and coefficients
/// are taken from the first step's parameters.
pub fn parse_trace(text: &str) -> Result<CstTrace, FormatError> {
    let doc: TraceDoc = serde_json::from_str(text)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(FormatError::Version(doc.format_version));
    }
    let first = doc
        .steps
        .first()
        .ok_or_else(|| FormatError::Invalid("a trace has at least its initial step".into()))?;
    if first.parameters.operators.len() != doc.spec.operators.len() {
        return Err(FormatError::Invalid("parameters do not match the operator list".into()));
    }

    let mut operators = Vec::with_capacity(doc.spec.operators.len());
    for (op, params) in doc.spec.operators.iter().zip(&first.parameters.operators) {
        if op.inputs.len() != params.radices.len() || op.outputs.len() != params.coefficients.len() {
            return Err(FormatError::Invalid("parameter shape does not match operator valence".into()));
        }
        operators.push(RawOperator {
            form: Some(op.form),
            inputs: op.inputs.iter().cloned().zip(params.radices.iter().copied()).collect(),
            outputs: op.outputs.iter().cloned().zip(params.coefficients.iter().copied()).collect(),
        });
    }
    let raw = RawCao {
        name: doc.spec.name.clone(),
        entities: doc
            .spec
            .entities
            .iter()
            .map(|e| RawEntity {
                name: e.name.clone(),
                role: Some(e.role),
            })
            .collect(),
        operators,
        initial: vec![],
    };
    let spec = validate(&raw, ValidateOptions { allow_cycles: true })?;
    let default_state = match &doc.spec.default_state {
        Some(values) => Some(StateVector::new(numbers(values)?)),
        None => None,
    };
    let spec = spec
        .with_default_state(default_state)
        .map_err(|e| FormatError::Invalid(e.to_string()))?;

    let m = spec.m();
    let mut entries = Vec::with_capacity(doc.steps.len());
    for s in &doc.steps {
        spec.check_parameters(&s.parameters)
            .map_err(|e| FormatError::Invalid(format!("step {}: {e}", s.k)))?;
        let state = numbers(&s.state)?;
        let partial = numbers(&s.partial)?;
        let common = numbers(&s.common)?;
        if state.len() != m || partial.len() != m || common.len() != m {
            return Err(FormatError::Invalid(format!("step {}: vectors must have {m} components", s.k)));
        }
        entries.push(TraceEntry {
            k: s.k,
            parameters: s.parameters.clone(),
            state: StateVector::new(state),
            partial: CarryVector::new(partial),
            common: CarryVector::new(common),
        });
    }
    let termination = match doc.termination.as_str() {
        "fixed-point" => Termination::FixedPoint,
        "step-limit" => Termination::StepLimit,
        other => return Err(FormatError::Invalid(format!("unknown termination `{other}`"))),
    };
    let trace = CstTrace {
        spec,
        entries,
        termination,
    };
    if trace.step_count() != doc.step_count {
        return Err(FormatError::Invalid(format!(
            "step_count {} disagrees with {} recorded steps",
            doc.step_count,
            trace.step_count()
        )));
    }
    Ok(trace)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DefaultDoc {
    Keyword(String),
    Explicit(ParameterSet),
}

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default: Option<DefaultDoc>,
    #[serde(default)]
    steps: Vec<ScheduledStep>,
}

#[derive(Serialize, Deserialize)]
struct ScheduledStep {
    k: u64,
    parameters: ParameterSet,
}

/// Reads a schedule for `topology`.
///
/// `"default"` may be omitted (unscheduled steps are then an error), the
/// string `"spec"` (fall back to the CAO's own parameters), or a parameter set.
pub fn parse_schedule(text: &str, topology: &CaoSpec) -> Result<ParameterSchedule, FormatError> {
    let doc: ScheduleDoc = serde_json::from_str(text)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(FormatError::Version(doc.format_version));
    }
    let default = match doc.default {
        None => None,
        Some(DefaultDoc::Keyword(k)) if k == "spec" => Some(topology.parameters()),
        Some(DefaultDoc::Keyword(k)) => {
            return Err(FormatError::Invalid(format!("unknown default `{k}` (expected \"spec\")")))
        }
        Some(DefaultDoc::Explicit(p)) => Some(p),
    };
    let mut steps = BTreeMap::new();
    for s in doc.steps {
        if steps.insert(s.k, s.parameters).is_some() {
            return Err(FormatError::Invalid(format!("step {} is scheduled twice", s.k)));
        }
    }
    let schedule = ParameterSchedule { default, steps };
    schedule.check(topology).map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(schedule)
}

pub fn write_schedule(schedule: &ParameterSchedule) -> String {
    let doc = ScheduleDoc {
        format_version: FORMAT_VERSION,
        default: schedule.default.clone().map(DefaultDoc::Explicit),
        steps: schedule
            .steps
            .iter()
            .map(|(&k, p)| ScheduledStep {
                k,
                parameters: p.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("schedule documents always serialize") + "\n"
}
