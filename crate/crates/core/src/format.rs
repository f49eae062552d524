//! The JSON model file format.
//!
//! Files are UTF-8 JSON with a strict schema: unknown keys are rejected and
//! every error carries a JSON-pointer path (plus line and column for syntax
//! and schema errors). [`serialize_model`] emits the canonical form: sorted
//! keys, two-space indentation, shortest round-trip decimals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::contract::{Contract, TraceContract};
use crate::diagram::{BoxDecl, PortRef, Subject, Supplier, WiringDiagram};
use crate::hierarchy::{HierarchicalModel, MAX_DEPTH};
use crate::lti::LtiSystem;
use crate::matrix::Matrix;
use crate::moore::MooreMachine;
use crate::types::{decode, encode, Interface, Side, Valuation};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub version: String,
    pub model: HierarchicalModel,
    pub metadata: BTreeMap<String, String>,
}

impl ModelFile {
    pub fn new(model: HierarchicalModel) -> Self {
        ModelFile {
            version: FORMAT_VERSION.to_string(),
            model,
            metadata: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at {path} (line {line}, column {column}): {message}")]
    Schema {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error at {path}: {reason}")]
    Validation { path: String, reason: String },
}

impl FormatError {
    fn invalid(path: &Pointer, reason: impl Into<String>) -> Self {
        FormatError::Validation {
            path: path.to_string(),
            reason: reason.into(),
        }
    }

    /// Model path of the error (empty for syntax errors).
    pub fn path(&self) -> &str {
        match self {
            FormatError::Syntax { .. } => "",
            FormatError::Schema { path, .. } | FormatError::Validation { path, .. } => path,
        }
    }
}

type FResult<T> = Result<T, FormatError>;

/// A JSON pointer under construction.
#[derive(Debug, Clone, Default)]
struct Pointer(Vec<String>);

impl Pointer {
    fn join(&self, seg: impl fmt::Display) -> Pointer {
        let mut p = self.0.clone();
        p.push(seg.to_string());
        Pointer(p)
    }
}

impl fmt::Display for Pointer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        for seg in &self.0 {
            write!(f, "/{}", seg.replace('~', "~0").replace('/', "~1"))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDto {
    version: String,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
    model: ModelDto,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDto {
    interface: Interface,
    boxes: Vec<BoxDto>,
    wiring: WiringDto,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    children: BTreeMap<String, ModelDto>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    moore: BTreeMap<String, MachineDto>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    lti: BTreeMap<String, LtiDto>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    contracts: BTreeMap<String, ContractDto>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    trace_contracts: BTreeMap<String, TraceContractDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxDto {
    id: String,
    interface: Interface,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WiringDto {
    inputs: Vec<InputWireDto>,
    outputs: Vec<OutputWireDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PortRefDto {
    #[serde(rename = "box")]
    box_id: String,
    port: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum SupplierDto {
    Outer(String),
    Inner(PortRefDto),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputWireDto {
    #[serde(rename = "box")]
    box_id: String,
    port: String,
    from: SupplierDto,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputWireDto {
    port: String,
    from: PortRefDto,
}

type Labels = BTreeMap<String, String>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineDto {
    states: Vec<String>,
    init: String,
    readout: BTreeMap<String, Labels>,
    transitions: Vec<TransitionDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDto {
    from: String,
    input: Labels,
    to: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDto {
    rows: usize,
    cols: usize,
    data: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LtiDto {
    a: MatrixDto,
    b: MatrixDto,
    c: MatrixDto,
    d: MatrixDto,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDto {
    input: Labels,
    output: Labels,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContractDto {
    pairs: Vec<PairDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TracePairDto {
    input: Vec<Labels>,
    output: Vec<Labels>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceContractDto {
    horizon: usize,
    pairs: Vec<TracePairDto>,
}

/// Parses and fully validates a model file.
pub fn parse_model(text: &str) -> FResult<ModelFile> {
    let mut de = serde_json::Deserializer::from_str(text);
    let dto: FileDto = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = pointer_of(e.path());
        let inner = e.into_inner();
        let (line, column) = (inner.line(), inner.column());
        match inner.classify() {
            serde_json::error::Category::Syntax | serde_json::error::Category::Eof | serde_json::error::Category::Io => {
                FormatError::Syntax {
                    line,
                    column,
                    message: inner.to_string(),
                }
            }
            serde_json::error::Category::Data => FormatError::Schema {
                path,
                line,
                column,
                message: strip_position(&inner.to_string()),
            },
        }
    })?;
    de.end().map_err(|e| FormatError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if dto.version != FORMAT_VERSION {
        return Err(FormatError::Schema {
            path: "/version".into(),
            line: 0,
            column: 0,
            message: format!("unsupported format version `{}` (expected `{FORMAT_VERSION}`)", dto.version),
        });
    }
    let root = Pointer::default().join("model");
    let model = model_from_dto(dto.model, &root, 1)?;
    Ok(ModelFile {
        version: dto.version,
        model,
        metadata: dto.metadata,
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut p = Pointer::default();
    for seg in path.iter() {
        p = match seg {
            Segment::Seq { index } => p.join(index),
            Segment::Map { key } => p.join(key),
            Segment::Enum { variant } => p.join(variant),
            Segment::Unknown => p.join("?"),
        };
    }
    p.to_string()
}

fn model_from_dto(dto: ModelDto, at: &Pointer, depth: usize) -> FResult<HierarchicalModel> {
    if depth > MAX_DEPTH {
        return Err(FormatError::invalid(at, format!("hierarchy deeper than {MAX_DEPTH} levels")));
    }
    let mut diagram = WiringDiagram::new(dto.interface);
    diagram.inner = dto
        .boxes
        .into_iter()
        .map(|b| BoxDecl::new(b.id, b.interface))
        .collect();

    let wiring_at = at.join("wiring");
    let mut input_entries = BTreeMap::new();
    for (i, w) in dto.wiring.inputs.into_iter().enumerate() {
        let key = PortRef::new(w.box_id, w.port);
        if input_entries.insert(key.clone(), i).is_some() {
            return Err(FormatError::invalid(
                &wiring_at.join("inputs").join(i),
                format!("input `{key}` has more than one supplier"),
            ));
        }
        let supplier = match w.from {
            SupplierDto::Outer(p) => Supplier::OuterInput(p),
            SupplierDto::Inner(r) => Supplier::inner(r.box_id, r.port),
        };
        diagram.phi_in.insert(key, supplier);
    }
    let mut output_entries = BTreeMap::new();
    for (i, w) in dto.wiring.outputs.into_iter().enumerate() {
        if output_entries.insert(w.port.clone(), i).is_some() {
            return Err(FormatError::invalid(
                &wiring_at.join("outputs").join(i),
                format!("outer output `{}` is read more than once", w.port),
            ));
        }
        diagram
            .phi_out
            .insert(w.port, PortRef::new(w.from.box_id, w.from.port));
    }

    let report = diagram.validate();
    if let Some(v) = report.violations.first() {
        let path = violation_pointer(&diagram, &v.subject, at, &input_entries, &output_entries);
        return Err(FormatError::invalid(&path, v.to_string()));
    }

    let box_at = |id: &str, section: &str| -> FResult<(Pointer, Interface)> {
        let here = at.join(section).join(id);
        match diagram.find_box(id) {
            Some(b) => Ok((here, b.interface.clone())),
            None => Err(FormatError::invalid(&here, format!("no box `{id}` in this diagram"))),
        }
    };

    let mut model = HierarchicalModel::new(diagram.clone());
    for (id, child) in dto.children {
        let (here, iface) = box_at(&id, "children")?;
        let child = model_from_dto(child, &here, depth + 1)?;
        if child.outer() != &iface {
            return Err(FormatError::invalid(
                &here.join("interface"),
                format!("implementation interface differs from box `{id}`"),
            ));
        }
        model.children.insert(id, child);
    }
    for (id, m) in dto.moore {
        let (here, iface) = box_at(&id, "moore")?;
        model.moore.insert(id, machine_from_dto(m, iface, &here)?);
    }
    for (id, s) in dto.lti {
        let (here, iface) = box_at(&id, "lti")?;
        model.lti.insert(id, lti_from_dto(s, iface, &here)?);
    }
    for (id, c) in dto.contracts {
        let (here, iface) = box_at(&id, "contracts")?;
        model.contracts.insert(id, contract_from_dto(c, iface, &here)?);
    }
    for (id, c) in dto.trace_contracts {
        let (here, iface) = box_at(&id, "trace_contracts")?;
        model
            .trace_contracts
            .insert(id, trace_contract_from_dto(c, iface, &here)?);
    }
    Ok(model)
}

fn violation_pointer(
    d: &WiringDiagram,
    subject: &Subject,
    at: &Pointer,
    inputs: &BTreeMap<PortRef, usize>,
    outputs: &BTreeMap<String, usize>,
) -> Pointer {
    let side_key = |side: Side| match side {
        Side::Input => "inputs",
        Side::Output => "outputs",
    };
    let box_pos = |id: &str| d.box_index(id);
    let port_pos = |iface: &Interface, side: Side, name: &str| iface.ports(side).iter().position(|p| p.name == name);
    match subject {
        Subject::Box(id) => match box_pos(id) {
            Some(i) => at.join("boxes").join(i),
            None => at.join("boxes"),
        },
        Subject::OuterPort(side, name) => {
            let base = at.join("interface").join(side_key(*side));
            match port_pos(&d.outer, *side, name) {
                Some(i) => base.join(i),
                None => base,
            }
        }
        Subject::BoxPort(id, side, name) => match box_pos(id) {
            Some(i) => {
                let base = at.join("boxes").join(i).join("interface").join(side_key(*side));
                match port_pos(&d.inner[i].interface, *side, name) {
                    Some(k) => base.join(k),
                    None => base,
                }
            }
            None => at.join("boxes"),
        },
        Subject::InnerInput(r) => match inputs.get(r) {
            Some(i) => at.join("wiring").join("inputs").join(i),
            None => at.join("wiring").join("inputs"),
        },
        Subject::OuterOutput(q) => match outputs.get(q) {
            Some(i) => at.join("wiring").join("outputs").join(i),
            None => at.join("wiring").join("outputs"),
        },
    }
}

fn valuation_from_labels(iface: &Interface, side: Side, labels: &Labels, at: &Pointer) -> FResult<Valuation> {
    let ports = iface.ports(side);
    for key in labels.keys() {
        if !ports.iter().any(|p| &p.name == key) {
            return Err(FormatError::invalid(&at.join(key), format!("no {side} port `{key}`")));
        }
    }
    ports
        .iter()
        .map(|p| {
            let value = labels
                .get(&p.name)
                .ok_or_else(|| FormatError::invalid(at, format!("missing value for {side} port `{}`", p.name)))?;
            let choices = p.ty.labels().ok_or_else(|| {
                FormatError::invalid(at, format!("{side} port `{}` is not finite-typed", p.name))
            })?;
            choices
                .iter()
                .position(|l| l == value)
                .ok_or_else(|| FormatError::invalid(&at.join(&p.name), format!("`{value}` is not a label of port `{}`", p.name)))
        })
        .collect()
}

fn labels_from_valuation(iface: &Interface, side: Side, v: &[usize]) -> Labels {
    iface
        .ports(side)
        .iter()
        .zip(v)
        .map(|(p, &i)| (p.name.clone(), p.ty.labels().map(|l| l[i].clone()).unwrap_or_default()))
        .collect()
}

fn machine_from_dto(dto: MachineDto, iface: Interface, at: &Pointer) -> FResult<MooreMachine> {
    iface
        .require_finite()
        .map_err(|e| FormatError::invalid(at, e.to_string()))?;
    let state_index = |label: &str, here: &Pointer| {
        dto.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| FormatError::invalid(here, format!("unknown state `{label}`")))
    };
    let init = state_index(&dto.init, &at.join("init"))?;
    let mut readout = Vec::with_capacity(dto.states.len());
    for s in &dto.states {
        let here = at.join("readout").join(s);
        let labels = dto
            .readout
            .get(s)
            .ok_or_else(|| FormatError::invalid(&here, format!("no readout for state `{s}`")))?;
        readout.push(valuation_from_labels(&iface, Side::Output, labels, &here)?);
    }
    if let Some(extra) = dto.readout.keys().find(|k| !dto.states.contains(k)) {
        return Err(FormatError::invalid(&at.join("readout").join(extra), format!("unknown state `{extra}`")));
    }
    let radices = iface.radices(Side::Input);
    let inputs = crate::types::valuation_count(&radices);
    let cells = inputs.saturating_mul(dto.states.len() as u128);
    if cells > 1 << 24 {
        return Err(FormatError::invalid(at, "transition table too large"));
    }
    let inputs = inputs as usize;
    let mut table: Vec<Option<usize>> = vec![None; cells as usize];
    for (i, t) in dto.transitions.iter().enumerate() {
        let here = at.join("transitions").join(i);
        let from = state_index(&t.from, &here.join("from"))?;
        let to = state_index(&t.to, &here.join("to"))?;
        let v = valuation_from_labels(&iface, Side::Input, &t.input, &here.join("input"))?;
        let cell = &mut table[from * inputs + encode(&radices, &v)];
        if cell.is_some() {
            return Err(FormatError::invalid(&here, "duplicate transition"));
        }
        *cell = Some(to);
    }
    let mut update = Vec::with_capacity(table.len());
    for (k, cell) in table.into_iter().enumerate() {
        match cell {
            Some(to) => update.push(to),
            None => {
                let state = &dto.states[k / inputs];
                let v = decode(&radices, k % inputs);
                return Err(FormatError::invalid(
                    &at.join("transitions"),
                    format!(
                        "no transition from `{state}` on input {}",
                        iface.show(Side::Input, &v)
                    ),
                ));
            }
        }
    }
    MooreMachine::new(iface, dto.states, init, readout, update).map_err(|e| FormatError::invalid(at, e.to_string()))
}

fn machine_to_dto(m: &MooreMachine) -> MachineDto {
    let iface = m.interface();
    let radices = m.input_radices();
    let mut transitions = Vec::with_capacity(m.state_count() * m.input_count());
    for s in 0..m.state_count() {
        for i in 0..m.input_count() {
            transitions.push(TransitionDto {
                from: m.states()[s].clone(),
                input: labels_from_valuation(iface, Side::Input, &decode(radices, i)),
                to: m.states()[m.next_state(s, i)].clone(),
            });
        }
    }
    MachineDto {
        states: m.states().to_vec(),
        init: m.states()[m.init()].clone(),
        readout: (0..m.state_count())
            .map(|s| {
                (
                    m.states()[s].clone(),
                    labels_from_valuation(iface, Side::Output, m.readout(s)),
                )
            })
            .collect(),
        transitions,
    }
}

fn matrix_from_dto(dto: MatrixDto, at: &Pointer) -> FResult<Matrix> {
    if dto.data.len() != dto.rows {
        return Err(FormatError::invalid(
            &at.join("data"),
            format!("{} rows declared, {} given", dto.rows, dto.data.len()),
        ));
    }
    let mut flat = Vec::with_capacity(dto.rows * dto.cols);
    for (r, row) in dto.data.iter().enumerate() {
        if row.len() != dto.cols {
            return Err(FormatError::invalid(
                &at.join("data").join(r),
                format!("{} columns declared, {} given", dto.cols, row.len()),
            ));
        }
        flat.extend_from_slice(row);
    }
    Matrix::new(dto.rows, dto.cols, flat).map_err(|e| FormatError::invalid(at, e.to_string()))
}

fn matrix_to_dto(m: &Matrix) -> MatrixDto {
    MatrixDto {
        rows: m.rows(),
        cols: m.cols(),
        data: (0..m.rows()).map(|r| m.row(r).to_vec()).collect(),
    }
}

fn lti_from_dto(dto: LtiDto, iface: Interface, at: &Pointer) -> FResult<LtiSystem> {
    let a = matrix_from_dto(dto.a, &at.join("a"))?;
    let b = matrix_from_dto(dto.b, &at.join("b"))?;
    let c = matrix_from_dto(dto.c, &at.join("c"))?;
    let d = matrix_from_dto(dto.d, &at.join("d"))?;
    LtiSystem::new(iface, a, b, c, d).map_err(|e| FormatError::invalid(at, e.to_string()))
}

fn lti_to_dto(s: &LtiSystem) -> LtiDto {
    LtiDto {
        a: matrix_to_dto(s.a()),
        b: matrix_to_dto(s.b()),
        c: matrix_to_dto(s.c()),
        d: matrix_to_dto(s.d()),
    }
}

fn contract_from_dto(dto: ContractDto, iface: Interface, at: &Pointer) -> FResult<Contract> {
    iface
        .require_finite()
        .map_err(|e| FormatError::invalid(at, e.to_string()))?;
    let mut pairs = BTreeSet::new();
    for (i, p) in dto.pairs.iter().enumerate() {
        let here = at.join("pairs").join(i);
        let input = valuation_from_labels(&iface, Side::Input, &p.input, &here.join("input"))?;
        let output = valuation_from_labels(&iface, Side::Output, &p.output, &here.join("output"))?;
        if !pairs.insert((input, output)) {
            return Err(FormatError::invalid(&here, "duplicate pair"));
        }
    }
    Contract::new(iface, pairs).map_err(|e| FormatError::invalid(at, e.to_string()))
}

fn contract_to_dto(c: &Contract) -> ContractDto {
    let iface = c.interface();
    ContractDto {
        pairs: c
            .pairs()
            .iter()
            .map(|(i, o)| PairDto {
                input: labels_from_valuation(iface, Side::Input, i),
                output: labels_from_valuation(iface, Side::Output, o),
            })
            .collect(),
    }
}

fn trace_contract_from_dto(dto: TraceContractDto, iface: Interface, at: &Pointer) -> FResult<TraceContract> {
    iface
        .require_finite()
        .map_err(|e| FormatError::invalid(at, e.to_string()))?;
    let mut pairs = BTreeSet::new();
    for (i, p) in dto.pairs.iter().enumerate() {
        let here = at.join("pairs").join(i);
        for (field, seq) in [("input", &p.input), ("output", &p.output)] {
            if seq.len() != dto.horizon {
                return Err(FormatError::invalid(
                    &here.join(field),
                    format!("sequence of length {} at horizon {}", seq.len(), dto.horizon),
                ));
            }
        }
        let input = p
            .input
            .iter()
            .enumerate()
            .map(|(t, l)| valuation_from_labels(&iface, Side::Input, l, &here.join("input").join(t)))
            .collect::<FResult<Vec<_>>>()?;
        let output = p
            .output
            .iter()
            .enumerate()
            .map(|(t, l)| valuation_from_labels(&iface, Side::Output, l, &here.join("output").join(t)))
            .collect::<FResult<Vec<_>>>()?;
        if !pairs.insert((input, output)) {
            return Err(FormatError::invalid(&here, "duplicate pair"));
        }
    }
    TraceContract::new(iface, dto.horizon, pairs).map_err(|e| FormatError::invalid(at, e.to_string()))
}

fn trace_contract_to_dto(c: &TraceContract) -> TraceContractDto {
    let iface = c.interface();
    TraceContractDto {
        horizon: c.horizon(),
        pairs: c
            .pairs()
            .iter()
            .map(|(i, o)| TracePairDto {
                input: i.iter().map(|v| labels_from_valuation(iface, Side::Input, v)).collect(),
                output: o.iter().map(|v| labels_from_valuation(iface, Side::Output, v)).collect(),
            })
            .collect(),
    }
}

fn model_to_dto(m: &HierarchicalModel) -> ModelDto {
    let d = &m.diagram;
    let mut inputs = Vec::new();
    for b in &d.inner {
        for p in &b.interface.inputs {
            let key = PortRef::new(b.id.clone(), p.name.clone());
            if let Some(s) = d.phi_in.get(&key) {
                inputs.push(InputWireDto {
                    box_id: key.box_id,
                    port: key.port,
                    from: match s {
                        Supplier::OuterInput(q) => SupplierDto::Outer(q.clone()),
                        Supplier::InnerOutput(r) => SupplierDto::Inner(PortRefDto {
                            box_id: r.box_id.clone(),
                            port: r.port.clone(),
                        }),
                    },
                });
            }
        }
    }
    let outputs = d
        .outer
        .outputs
        .iter()
        .filter_map(|q| {
            d.phi_out.get(&q.name).map(|r| OutputWireDto {
                port: q.name.clone(),
                from: PortRefDto {
                    box_id: r.box_id.clone(),
                    port: r.port.clone(),
                },
            })
        })
        .collect();
    ModelDto {
        interface: d.outer.clone(),
        boxes: d
            .inner
            .iter()
            .map(|b| BoxDto {
                id: b.id.clone(),
                interface: b.interface.clone(),
            })
            .collect(),
        wiring: WiringDto { inputs, outputs },
        children: m.children.iter().map(|(k, c)| (k.clone(), model_to_dto(c))).collect(),
        moore: m.moore.iter().map(|(k, x)| (k.clone(), machine_to_dto(x))).collect(),
        lti: m.lti.iter().map(|(k, x)| (k.clone(), lti_to_dto(x))).collect(),
        contracts: m.contracts.iter().map(|(k, x)| (k.clone(), contract_to_dto(x))).collect(),
        trace_contracts: m
            .trace_contracts
            .iter()
            .map(|(k, x)| (k.clone(), trace_contract_to_dto(x)))
            .collect(),
    }
}

/// Canonical text of a model file.
pub fn serialize_model(file: &ModelFile) -> String {
    let dto = FileDto {
        version: file.version.clone(),
        metadata: file.metadata.clone(),
        model: model_to_dto(&file.model),
    };
    let value = serde_json::to_value(&dto).expect("model DTOs serialize");
    let mut out = String::new();
    write_canonical(&value, 0, &mut out);
    out.push('\n');
    out
}

/// Pretty JSON with keys sorted at every level.
pub fn write_canonical(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_canonical(&map[*k], indent + 1, out);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            if items.iter().all(|x| x.is_number()) {
                let cells: Vec<String> = items.iter().map(Value::to_string).collect();
                let _ = write!(out, "[{}]", cells.join(", "));
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_canonical(x, indent + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}
