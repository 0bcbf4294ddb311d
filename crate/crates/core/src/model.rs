//! Cardinal abstract objects: entities, operators, validation and the
//! configuration matrix.
//!
//! A [`CaoSpec`] can only be obtained through [`validate`], so every value of
//! that type satisfies the structural rules the engines rely on: each entity
//! feeds at most one operator (one radix per row of the configuration
//! matrix), radices are at least 2, coefficients at least 1, no operator
//! touches the same entity on both sides, and the entity graph is acyclic
//! unless cycles were explicitly allowed.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::StateVector;

/// Position of an entity within its CAO (declaration order).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityId(pub usize);

impl EntityId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Initial,
    Intermediate,
    Final,
}

impl Role {
    pub fn keyword(self) -> &'static str {
        match self {
            Role::Initial => "initial",
            Role::Intermediate => "intermediate",
            Role::Final => "final",
        }
    }
}

impl FromStr for Role {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "initial" => Ok(Role::Initial),
            "intermediate" => Ok(Role::Intermediate),
            "final" => Ok(Role::Final),
            other => Err(ModelError::UnknownRole(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entity {
    pub name: String,
    pub role: Role,
}

/// Operator form, determined by valence `(W, V)`.
///
/// Only the cardinal-increasing kind is modelled, so the kind is implicit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorForm {
    /// Line, valence (1, 1).
    L,
    /// Distribution, valence (1, v > 1).
    D,
    /// Fusion, valence (w > 1, 1).
    F,
    /// Multi, valence (w > 1, v > 1).
    M,
}

impl OperatorForm {
    pub fn infer(input_count: usize, output_count: usize) -> Result<Self, ModelError> {
        match (input_count, output_count) {
            (0, _) | (_, 0) => Err(ModelError::EmptyValence {
                inputs: input_count,
                outputs: output_count,
            }),
            (1, 1) => Ok(OperatorForm::L),
            (1, _) => Ok(OperatorForm::D),
            (_, 1) => Ok(OperatorForm::F),
            _ => Ok(OperatorForm::M),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            OperatorForm::L => "L",
            OperatorForm::D => "D",
            OperatorForm::F => "F",
            OperatorForm::M => "M",
        }
    }

    /// Forms with more than one input need a common carry.
    pub fn is_fusing(self) -> bool {
        matches!(self, OperatorForm::F | OperatorForm::M)
    }
}

impl fmt::Display for OperatorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for OperatorForm {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "L" => Ok(OperatorForm::L),
            "D" => Ok(OperatorForm::D),
            "F" => Ok(OperatorForm::F),
            "M" => Ok(OperatorForm::M),
            other => Err(ModelError::UnknownForm(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Input {
    pub entity: EntityId,
    pub radix: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Output {
    pub entity: EntityId,
    pub coefficient: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OperatorSpec {
    pub form: OperatorForm,
    pub inputs: Vec<Input>,
    pub outputs: Vec<Output>,
}

impl OperatorSpec {
    /// Input column that carries the coefficient of the `k`-th output in Rᵀ.
    ///
    /// Outputs are matched to inputs positionally, with trailing outputs
    /// sharing the last input.
    pub fn representative_input(&self, output_position: usize) -> EntityId {
        let slot = output_position.min(self.inputs.len() - 1);
        self.inputs[slot].entity
    }
}

/// Radices and coefficients of one operator, in declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperatorParameters {
    pub radices: Vec<u64>,
    pub coefficients: Vec<u64>,
}

/// Every numeric parameter of a CAO on a fixed topology.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParameterSet {
    pub operators: Vec<OperatorParameters>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("operator valence ({inputs}, {outputs}) needs at least one input and one output")]
    EmptyValence { inputs: usize, outputs: usize },
    #[error("unknown operator form `{0}` (expected L, D, F or M)")]
    UnknownForm(String),
    #[error("unknown entity role `{0}` (expected initial, intermediate or final)")]
    UnknownRole(String),
    #[error("parameter set has {found} operators, topology has {expected}")]
    OperatorCountMismatch { expected: usize, found: usize },
    #[error("operator {operator}: parameter shape ({radices}, {coefficients}) does not match valence ({inputs}, {outputs})")]
    ParameterShapeMismatch {
        operator: usize,
        inputs: usize,
        outputs: usize,
        radices: usize,
        coefficients: usize,
    },
    #[error("operator {operator}: radix {radix} is below 2")]
    BadRadix { operator: usize, radix: u64 },
    #[error("operator {operator}: coefficient {coefficient} is below 1")]
    BadCoefficient { operator: usize, coefficient: u64 },
    #[error("state has dimension {found}, CAO has {expected} entities")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Unvalidated CAO description, as produced by a parser or a generator.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawCao {
    pub name: String,
    pub entities: Vec<RawEntity>,
    pub operators: Vec<RawOperator>,
    /// Default initial cardinals; unnamed entities start at zero.
    pub initial: Vec<(String, BigUint)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawEntity {
    pub name: String,
    /// `None` lets validation infer the role from the topology.
    pub role: Option<Role>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawOperator {
    /// `None` lets validation infer the form from the valence.
    pub form: Option<OperatorForm>,
    pub inputs: Vec<(String, u64)>,
    pub outputs: Vec<(String, u64)>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ValidateOptions {
    pub allow_cycles: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IssueKind {
    InvalidName,
    DuplicateName,
    UnknownEntity,
    EmptyValence,
    DuplicateInput,
    DuplicateOutput,
    MultipleOutgoingOperators,
    SelfLoop,
    CycleDetected,
    BadRadix,
    BadCoefficient,
    FormMismatch,
    RoleMismatch,
    DuplicateInitialValue,
    /// Warning: an initial entity also receives transformants.
    InitialHasIncoming,
    /// Warning: no initial entity reaches this entity.
    Unreachable,
}

impl IssueKind {
    pub fn code(self) -> &'static str {
        match self {
            IssueKind::InvalidName => "invalid-name",
            IssueKind::DuplicateName => "duplicate-name",
            IssueKind::UnknownEntity => "unknown-entity",
            IssueKind::EmptyValence => "empty-valence",
            IssueKind::DuplicateInput => "duplicate-input",
            IssueKind::DuplicateOutput => "duplicate-output",
            IssueKind::MultipleOutgoingOperators => "multiple-outgoing-operators",
            IssueKind::SelfLoop => "self-loop",
            IssueKind::CycleDetected => "cycle-detected",
            IssueKind::BadRadix => "bad-radix",
            IssueKind::BadCoefficient => "bad-coefficient",
            IssueKind::FormMismatch => "form-mismatch",
            IssueKind::RoleMismatch => "role-mismatch",
            IssueKind::DuplicateInitialValue => "duplicate-initial-value",
            IssueKind::InitialHasIncoming => "initial-has-incoming",
            IssueKind::Unreachable => "unreachable",
        }
    }
}

/// What an issue is about, so front ends can point at the right source text.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Subject {
    Cao,
    /// Index into `RawCao::entities`.
    Entity(usize),
    /// Index into `RawCao::operators`.
    Operator(usize),
    /// Index into `RawCao::initial`.
    InitialValue(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub kind: IssueKind,
    pub subject: Subject,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.code(), self.message)
    }
}

/// Every violated invariant of a raw description.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("invalid CAO: {}", summarize(.issues))]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn has(&self, kind: IssueKind) -> bool {
        self.issues.iter().any(|i| i.kind == kind)
    }
}

fn summarize(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A validated cardinal abstract object.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CaoSpec {
    name: String,
    entities: Vec<Entity>,
    operators: Vec<OperatorSpec>,
    initial: Option<StateVector>,
    /// For each entity, the operator it feeds (if any).
    outgoing: Vec<Option<usize>>,
    cyclic: bool,
}

pub fn validate(raw: &RawCao, options: ValidateOptions) -> Result<CaoSpec, ValidationReport> {
    let mut issues = Vec::new();
    let mut push = |kind, subject, message: String| issues.push(Issue { kind, subject, message });

    if !is_identifier(&raw.name) {
        push(
            IssueKind::InvalidName,
            Subject::Cao,
            format!("CAO name `{}` is not an identifier", raw.name),
        );
    }

    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, e) in raw.entities.iter().enumerate() {
        if !is_identifier(&e.name) {
            push(
                IssueKind::InvalidName,
                Subject::Entity(i),
                format!("entity name `{}` is not an identifier", e.name),
            );
        } else if index.insert(e.name.as_str(), i).is_some() {
            push(
                IssueKind::DuplicateName,
                Subject::Entity(i),
                format!("entity `{}` is declared more than once", e.name),
            );
        }
    }
    // Later duplicates shadow earlier ones above; resolve to the first.
    let mut first: HashMap<&str, usize> = HashMap::new();
    for (i, e) in raw.entities.iter().enumerate() {
        first.entry(e.name.as_str()).or_insert(i);
    }

    let m = raw.entities.len();
    let mut outgoing: Vec<Option<usize>> = vec![None; m];
    let mut incoming = vec![false; m];
    let mut operators = Vec::with_capacity(raw.operators.len());

    for (k, op) in raw.operators.iter().enumerate() {
        let subject = || Subject::Operator(k);
        let resolve = |name: &str, push: &mut dyn FnMut(IssueKind, Subject, String)| {
            let id = first.get(name).copied().map(EntityId);
            if id.is_none() {
                push(
                    IssueKind::UnknownEntity,
                    subject(),
                    format!("operator #{k} refers to undeclared entity `{name}`"),
                );
            }
            id
        };

        let inferred = OperatorForm::infer(op.inputs.len(), op.outputs.len());
        let form = match (inferred, op.form) {
            (Err(_), _) => {
                push(
                    IssueKind::EmptyValence,
                    subject(),
                    format!(
                        "operator #{k} has valence ({}, {}); both sides need at least one entity",
                        op.inputs.len(),
                        op.outputs.len()
                    ),
                );
                None
            }
            (Ok(inf), Some(declared)) if inf != declared => {
                push(
                    IssueKind::FormMismatch,
                    subject(),
                    format!(
                        "operator #{k}: declared form {declared} conflicts with inferred {inf} for valence ({}, {})",
                        op.inputs.len(),
                        op.outputs.len()
                    ),
                );
                None
            }
            (Ok(inf), _) => Some(inf),
        };

        let mut inputs = Vec::with_capacity(op.inputs.len());
        let mut seen = HashSet::new();
        for (name, radix) in &op.inputs {
            if *radix < 2 {
                push(
                    IssueKind::BadRadix,
                    subject(),
                    format!("operator #{k}: radix {radix} of `{name}` is below 2"),
                );
            }
            if !seen.insert(name.as_str()) {
                push(
                    IssueKind::DuplicateInput,
                    subject(),
                    format!("operator #{k}: `{name}` appears twice among the inputs"),
                );
                continue;
            }
            if let Some(id) = resolve(name, &mut push) {
                match outgoing[id.0] {
                    Some(prev) => push(
                        IssueKind::MultipleOutgoingOperators,
                        Subject::Entity(id.0),
                        format!("entity `{name}` is an input of operators #{prev} and #{k}"),
                    ),
                    None => outgoing[id.0] = Some(k),
                }
                inputs.push(Input { entity: id, radix: *radix });
            }
        }

        let mut outputs = Vec::with_capacity(op.outputs.len());
        let mut seen_out = HashSet::new();
        for (name, coefficient) in &op.outputs {
            if *coefficient < 1 {
                push(
                    IssueKind::BadCoefficient,
                    subject(),
                    format!("operator #{k}: coefficient {coefficient} of `{name}` is below 1"),
                );
            }
            if !seen_out.insert(name.as_str()) {
                push(
                    IssueKind::DuplicateOutput,
                    subject(),
                    format!("operator #{k}: `{name}` appears twice among the outputs"),
                );
                continue;
            }
            if seen.contains(name.as_str()) {
                push(
                    IssueKind::SelfLoop,
                    subject(),
                    format!("operator #{k}: `{name}` is both an input and an output"),
                );
                continue;
            }
            if let Some(id) = resolve(name, &mut push) {
                incoming[id.0] = true;
                outputs.push(Output {
                    entity: id,
                    coefficient: *coefficient,
                });
            }
        }

        if let Some(form) = form {
            operators.push(OperatorSpec { form, inputs, outputs });
        }
    }

    let mut entities = Vec::with_capacity(m);
    for (i, e) in raw.entities.iter().enumerate() {
        let has_out = outgoing[i].is_some();
        let role = match e.role {
            None if !has_out => Role::Final,
            None if !incoming[i] => Role::Initial,
            None => Role::Intermediate,
            Some(Role::Final) if has_out => {
                push(
                    IssueKind::RoleMismatch,
                    Subject::Entity(i),
                    format!("entity `{}` is declared final but feeds operator #{}", e.name, outgoing[i].unwrap_or(0)),
                );
                Role::Final
            }
            Some(role) if role != Role::Final && !has_out => {
                push(
                    IssueKind::RoleMismatch,
                    Subject::Entity(i),
                    format!(
                        "entity `{}` is declared {} but feeds no operator (only final entities may)",
                        e.name,
                        role.keyword()
                    ),
                );
                role
            }
            Some(role) => role,
        };
        entities.push(Entity {
            name: e.name.clone(),
            role,
        });
    }

    let structurally_complete = operators.len() == raw.operators.len();
    let cyclic = structurally_complete && find_cycle(m, &operators).is_some();
    if structurally_complete && !options.allow_cycles {
        if let Some(path) = find_cycle(m, &operators) {
            let names: Vec<&str> = path.iter().map(|id| raw.entities[id.0].name.as_str()).collect();
            push(
                IssueKind::CycleDetected,
                Subject::Entity(path[0].0),
                format!("cycle detected: {}", names.join(" -> ")),
            );
        }
    }

    let mut initial = None;
    if !raw.initial.is_empty() {
        let mut state = StateVector::zeros(m);
        let mut assigned = HashSet::new();
        for (n, (name, value)) in raw.initial.iter().enumerate() {
            match first.get(name.as_str()) {
                None => push(
                    IssueKind::UnknownEntity,
                    Subject::InitialValue(n),
                    format!("initial value for undeclared entity `{name}`"),
                ),
                Some(&i) => {
                    if !assigned.insert(i) {
                        push(
                            IssueKind::DuplicateInitialValue,
                            Subject::InitialValue(n),
                            format!("entity `{name}` is given an initial value twice"),
                        );
                    }
                    state.set(EntityId(i), value.clone());
                }
            }
        }
        initial = Some(state);
    }

    if !issues.is_empty() {
        return Err(ValidationReport { issues });
    }

    Ok(CaoSpec {
        name: raw.name.clone(),
        entities,
        operators,
        initial,
        outgoing,
        cyclic,
    })
}

/// `[A-Za-z_][A-Za-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Returns the entity path of some directed cycle, closed (first == last).
fn find_cycle(m: usize, operators: &[OperatorSpec]) -> Option<Vec<EntityId>> {
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); m];
    for op in operators {
        for i in &op.inputs {
            for o in &op.outputs {
                succ[i.entity.0].push(o.entity.0);
            }
        }
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut mark = vec![Mark::White; m];
    let mut parent = vec![usize::MAX; m];

    for root in 0..m {
        if mark[root] != Mark::White {
            continue;
        }
        // iterative DFS: (node, next successor position)
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Grey;
        while let Some(&mut (node, ref mut pos)) = stack.last_mut() {
            if *pos < succ[node].len() {
                let next = succ[node][*pos];
                *pos += 1;
                match mark[next] {
                    Mark::White => {
                        mark[next] = Mark::Grey;
                        parent[next] = node;
                        stack.push((next, 0));
                    }
                    Mark::Grey => {
                        let mut path = vec![next];
                        let mut cur = node;
                        while cur != next {
                            path.push(cur);
                            cur = parent[cur];
                        }
                        path.push(next);
                        path.reverse();
                        return Some(path.into_iter().map(EntityId).collect());
                    }
                    Mark::Black => {}
                }
            } else {
                mark[node] = Mark::Black;
                stack.pop();
            }
        }
    }
    None
}

/// Non-fatal findings: unreachable entities and initial entities with inputs.
pub fn lint(spec: &CaoSpec) -> Vec<Issue> {
    let m = spec.m();
    let mut warnings = Vec::new();
    let mut incoming = vec![false; m];
    for op in &spec.operators {
        for o in &op.outputs {
            incoming[o.entity.0] = true;
        }
    }

    let mut reached: Vec<bool> = spec.entities.iter().map(|e| e.role == Role::Initial).collect();
    let mut frontier: Vec<usize> = (0..m).filter(|&i| reached[i]).collect();
    while let Some(i) = frontier.pop() {
        if let Some(k) = spec.outgoing[i] {
            for o in &spec.operators[k].outputs {
                if !reached[o.entity.0] {
                    reached[o.entity.0] = true;
                    frontier.push(o.entity.0);
                }
            }
        }
    }

    for (i, e) in spec.entities.iter().enumerate() {
        if e.role == Role::Initial && incoming[i] {
            warnings.push(Issue {
                kind: IssueKind::InitialHasIncoming,
                subject: Subject::Entity(i),
                message: format!("initial entity `{}` receives transformants", e.name),
            });
        }
        // An operator-free singleton is trivially its own source.
        if !reached[i] && (incoming[i] || spec.outgoing[i].is_some()) {
            warnings.push(Issue {
                kind: IssueKind::Unreachable,
                subject: Subject::Entity(i),
                message: format!("entity `{}` is not reachable from any initial entity", e.name),
            });
        }
    }
    warnings
}

impl CaoSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of entities, the state-space dimension.
    pub fn m(&self) -> usize {
        self.entities.len()
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn entity(&self, id: EntityId) -> &Entity {
        &self.entities[id.0]
    }

    pub fn entity_id(&self, name: &str) -> Option<EntityId> {
        self.entities.iter().position(|e| e.name == name).map(EntityId)
    }

    pub fn operators(&self) -> &[OperatorSpec] {
        &self.operators
    }

    /// Index of the operator `id` feeds, if any.
    pub fn outgoing(&self, id: EntityId) -> Option<usize> {
        self.outgoing[id.0]
    }

    pub fn default_state(&self) -> Option<&StateVector> {
        self.initial.as_ref()
    }

    /// Initial state: the embedded default if present, otherwise zeros.
    pub fn initial_state(&self) -> StateVector {
        self.initial.clone().unwrap_or_else(|| StateVector::zeros(self.m()))
    }

    pub fn with_default_state(mut self, state: Option<StateVector>) -> Result<Self, ModelError> {
        if let Some(s) = &state {
            self.check_dimension(s.len())?;
        }
        self.initial = state;
        Ok(self)
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn check_dimension(&self, found: usize) -> Result<(), ModelError> {
        if found == self.m() {
            Ok(())
        } else {
            Err(ModelError::DimensionMismatch {
                expected: self.m(),
                found,
            })
        }
    }

    /// Longest operator path length, `None` for cyclic topologies.
    pub fn depth(&self) -> Option<usize> {
        if self.cyclic {
            return None;
        }
        let m = self.m();
        let mut memo: Vec<Option<usize>> = vec![None; m];
        fn visit(spec: &CaoSpec, i: usize, memo: &mut Vec<Option<usize>>) -> usize {
            if let Some(d) = memo[i] {
                return d;
            }
            let d = match spec.outgoing[i] {
                None => 0,
                Some(k) => {
                    1 + spec.operators[k]
                        .outputs
                        .iter()
                        .map(|o| visit(spec, o.entity.0, memo))
                        .max()
                        .unwrap_or(0)
                }
            };
            memo[i] = Some(d);
            d
        }
        Some((0..m).map(|i| visit(self, i, &mut memo)).max().unwrap_or(0))
    }

    pub fn parameters(&self) -> ParameterSet {
        ParameterSet {
            operators: self
                .operators
                .iter()
                .map(|op| OperatorParameters {
                    radices: op.inputs.iter().map(|i| i.radix).collect(),
                    coefficients: op.outputs.iter().map(|o| o.coefficient).collect(),
                })
                .collect(),
        }
    }

    /// Checks that `params` fits this topology and satisfies the bounds.
    pub fn check_parameters(&self, params: &ParameterSet) -> Result<(), ModelError> {
        if params.operators.len() != self.operators.len() {
            return Err(ModelError::OperatorCountMismatch {
                expected: self.operators.len(),
                found: params.operators.len(),
            });
        }
        for (k, (op, p)) in self.operators.iter().zip(&params.operators).enumerate() {
            if p.radices.len() != op.inputs.len() || p.coefficients.len() != op.outputs.len() {
                return Err(ModelError::ParameterShapeMismatch {
                    operator: k,
                    inputs: op.inputs.len(),
                    outputs: op.outputs.len(),
                    radices: p.radices.len(),
                    coefficients: p.coefficients.len(),
                });
            }
            if let Some(&radix) = p.radices.iter().find(|&&r| r < 2) {
                return Err(ModelError::BadRadix { operator: k, radix });
            }
            if let Some(&coefficient) = p.coefficients.iter().find(|&&c| c < 1) {
                return Err(ModelError::BadCoefficient { operator: k, coefficient });
            }
        }
        Ok(())
    }

    /// Same topology, different radices and coefficients.
    pub fn with_parameters(&self, params: &ParameterSet) -> Result<CaoSpec, ModelError> {
        self.check_parameters(params)?;
        let mut spec = self.clone();
        for (op, p) in spec.operators.iter_mut().zip(&params.operators) {
            for (input, &radix) in op.inputs.iter_mut().zip(&p.radices) {
                input.radix = radix;
            }
            for (output, &coefficient) in op.outputs.iter_mut().zip(&p.coefficients) {
                output.coefficient = coefficient;
            }
        }
        Ok(spec)
    }

    pub fn config_matrix(&self) -> ConfigurationMatrix {
        build_config_matrix(self)
    }

    /// Back to an unvalidated description (roles and forms kept explicit).
    pub fn to_raw(&self) -> RawCao {
        let name = |id: EntityId| self.entities[id.0].name.clone();
        RawCao {
            name: self.name.clone(),
            entities: self
                .entities
                .iter()
                .map(|e| RawEntity {
                    name: e.name.clone(),
                    role: Some(e.role),
                })
                .collect(),
            operators: self
                .operators
                .iter()
                .map(|op| RawOperator {
                    form: Some(op.form),
                    inputs: op.inputs.iter().map(|i| (name(i.entity), i.radix)).collect(),
                    outputs: op.outputs.iter().map(|o| (name(o.entity), o.coefficient)).collect(),
                })
                .collect(),
            initial: self
                .initial
                .iter()
                .flat_map(|s| s.values().iter().enumerate())
                .filter(|(_, v)| !num_traits::Zero::is_zero(*v))
                .map(|(i, v)| (self.entities[i].name.clone(), v.clone()))
                .collect(),
        }
    }
}

/// The m×m matrix with radices on the diagonal and conversion coefficients
/// off the diagonal, one row per entity in declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConfigurationMatrix {
    entries: Vec<Vec<u64>>,
}

pub fn build_config_matrix(spec: &CaoSpec) -> ConfigurationMatrix {
    let m = spec.m();
    let mut entries = vec![vec![0u64; m]; m];
    for op in spec.operators() {
        for input in &op.inputs {
            let row = &mut entries[input.entity.0];
            row[input.entity.0] = input.radix;
            for output in &op.outputs {
                row[output.entity.0] = output.coefficient;
            }
        }
    }
    ConfigurationMatrix { entries }
}

impl ConfigurationMatrix {
    pub fn m(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.entries[row][col]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<u64> {
        (0..self.m()).map(|i| self.entries[i][i]).collect()
    }

    /// Reads operator parameters back out of the matrix, given the topology.
    pub fn reconstruct_parameters(&self, topology: &CaoSpec) -> ParameterSet {
        ParameterSet {
            operators: topology
                .operators()
                .iter()
                .map(|op| {
                    let row = op.inputs[0].entity.0;
                    OperatorParameters {
                        radices: op.inputs.iter().map(|i| self.entries[i.entity.0][i.entity.0]).collect(),
                        coefficients: op.outputs.iter().map(|o| self.entries[row][o.entity.0]).collect(),
                    }
                })
                .collect(),
        }
    }
}

impl fmt::Display for ConfigurationMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// A state paired with the structure it lives on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multinumber {
    state: StateVector,
    config: ConfigurationMatrix,
}

impl Multinumber {
    pub fn new(state: StateVector, config: ConfigurationMatrix) -> Result<Self, ModelError> {
        if state.len() != config.m() {
            return Err(ModelError::DimensionMismatch {
                expected: config.m(),
                found: state.len(),
            });
        }
        Ok(Multinumber { state, config })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn config(&self) -> &ConfigurationMatrix {
        &self.config
    }
}
