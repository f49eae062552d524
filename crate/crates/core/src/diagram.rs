//! Wiring diagrams: the syntax every algebra in this crate interprets.
//!
//! A [`WiringDiagram`] places inner boxes inside an outer interface. Every
//! inner input port is fed by exactly one [`Supplier`] (`phi_in`), and every
//! outer output port reads exactly one inner output port (`phi_out`). Outer
//! inputs never feed outer outputs directly; a pass-through needs an
//! explicit identity box.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::types::{Interface, Port, Side};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoxDecl {
    pub id: String,
    pub interface: Interface,
}

impl BoxDecl {
    pub fn new(id: impl Into<String>, interface: Interface) -> Self {
        BoxDecl {
            id: id.into(),
            interface,
        }
    }
}

/// A port on one of the inner boxes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub box_id: String,
    pub port: String,
}

impl PortRef {
    pub fn new(box_id: impl Into<String>, port: impl Into<String>) -> Self {
        PortRef {
            box_id: box_id.into(),
            port: port.into(),
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.box_id, self.port)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Supplier {
    OuterInput(String),
    InnerOutput(PortRef),
}

impl Supplier {
    pub fn outer(port: impl Into<String>) -> Self {
        Supplier::OuterInput(port.into())
    }

    pub fn inner(box_id: impl Into<String>, port: impl Into<String>) -> Self {
        Supplier::InnerOutput(PortRef::new(box_id, port))
    }
}

impl fmt::Display for Supplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Supplier::OuterInput(p) => write!(f, "outer input `{p}`"),
            Supplier::InnerOutput(r) => write!(f, "output `{r}`"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct WiringDiagram {
    pub inner: Vec<BoxDecl>,
    pub outer: Interface,
    /// Supplier of every inner input port.
    pub phi_in: BTreeMap<PortRef, Supplier>,
    /// Inner output read by every outer output port.
    pub phi_out: BTreeMap<String, PortRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationCode {
    MissingSupplier,
    TypeMismatch,
    DanglingReference,
    DuplicateId,
    InvalidType,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// What a violation is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Box(String),
    OuterPort(Side, String),
    BoxPort(String, Side, String),
    /// The `phi_in` entry (or missing entry) of an inner input.
    InnerInput(PortRef),
    /// The `phi_out` entry (or missing entry) of an outer output.
    OuterOutput(String),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Box(id) => write!(f, "box `{id}`"),
            Subject::OuterPort(side, p) => write!(f, "outer {side} `{p}`"),
            Subject::BoxPort(id, side, p) => write!(f, "box `{id}` {side} `{p}`"),
            Subject::InnerInput(r) => write!(f, "input `{r}`"),
            Subject::OuterOutput(p) => write!(f, "outer output `{p}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub code: ViolationCode,
    pub subject: Subject,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.subject, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidDiagram(self))
        }
    }

    fn push(&mut self, code: ViolationCode, subject: Subject, detail: impl Into<String>) {
        self.violations.push(Violation {
            code,
            subject,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let lines: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&lines.join("; "))
    }
}

fn check_ports(report: &mut ValidationReport, owner: Option<&str>, ports: &[Port], side: Side) {
    let subject = |name: &str| match owner {
        None => Subject::OuterPort(side, name.to_string()),
        Some(id) => Subject::BoxPort(id.to_string(), side, name.to_string()),
    };
    let mut seen = BTreeSet::new();
    for p in ports {
        if !seen.insert(p.name.as_str()) {
            report.push(ViolationCode::DuplicateId, subject(&p.name), "port name declared twice");
        }
        if let Some(defect) = p.ty.defect() {
            report.push(ViolationCode::InvalidType, subject(&p.name), defect);
        }
    }
}

impl WiringDiagram {
    pub fn new(outer: Interface) -> Self {
        WiringDiagram {
            outer,
            ..Default::default()
        }
    }

    /// The diagram with no boxes and no ports: the monoidal unit.
    pub fn empty() -> Self {
        WiringDiagram::default()
    }

    pub fn with_box(mut self, id: impl Into<String>, interface: Interface) -> Self {
        self.inner.push(BoxDecl::new(id, interface));
        self
    }

    /// Feeds inner input `box_id.port` from `supplier`.
    pub fn wire(mut self, box_id: &str, port: &str, supplier: Supplier) -> Self {
        self.phi_in.insert(PortRef::new(box_id, port), supplier);
        self
    }

    /// Exposes inner output `box_id.port` as outer output `outer_port`.
    pub fn expose(mut self, outer_port: &str, box_id: &str, port: &str) -> Self {
        self.phi_out
            .insert(outer_port.to_string(), PortRef::new(box_id, port));
        self
    }

    pub fn find_box(&self, id: &str) -> Option<&BoxDecl> {
        self.inner.iter().find(|b| b.id == id)
    }

    pub fn box_index(&self, id: &str) -> Option<usize> {
        self.inner.iter().position(|b| b.id == id)
    }

    fn inner_port(&self, r: &PortRef, side: Side) -> Option<&Port> {
        let b = self.find_box(&r.box_id)?;
        b.interface.ports(side).iter().find(|p| p.name == r.port)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        check_ports(&mut report, None, &self.outer.inputs, Side::Input);
        check_ports(&mut report, None, &self.outer.outputs, Side::Output);
        let mut ids = BTreeSet::new();
        for b in &self.inner {
            if !ids.insert(b.id.as_str()) {
                report.push(
                    ViolationCode::DuplicateId,
                    Subject::Box(b.id.clone()),
                    "box id declared twice",
                );
            }
            check_ports(&mut report, Some(&b.id), &b.interface.inputs, Side::Input);
            check_ports(&mut report, Some(&b.id), &b.interface.outputs, Side::Output);
        }

        for (consumer, supplier) in &self.phi_in {
            let location = Subject::InnerInput(consumer.clone());
            let Some(target) = self.inner_port(consumer, Side::Input) else {
                report.push(
                    ViolationCode::DanglingReference,
                    location,
                    "no such inner input port",
                );
                continue;
            };
            let source = match supplier {
                Supplier::OuterInput(p) => self.outer.input(p).map(|(_, port)| port),
                Supplier::InnerOutput(r) => self.inner_port(r, Side::Output),
            };
            match source {
                None => report.push(
                    ViolationCode::DanglingReference,
                    location,
                    format!("supplier {supplier} does not exist"),
                ),
                Some(src) if src.ty != target.ty => report.push(
                    ViolationCode::TypeMismatch,
                    location,
                    format!("{supplier} has type {} but `{consumer}` has type {}", src.ty, target.ty),
                ),
                Some(_) => {}
            }
        }
        for b in &self.inner {
            for p in &b.interface.inputs {
                let r = PortRef::new(b.id.clone(), p.name.clone());
                if !self.phi_in.contains_key(&r) {
                    report.push(
                        ViolationCode::MissingSupplier,
                        Subject::InnerInput(r),
                        "inner input has no supplier",
                    );
                }
            }
        }

        for (outer_port, source) in &self.phi_out {
            let location = Subject::OuterOutput(outer_port.clone());
            let Some((_, target)) = self.outer.output(outer_port) else {
                report.push(
                    ViolationCode::DanglingReference,
                    location,
                    "no such outer output port",
                );
                continue;
            };
            match self.inner_port(source, Side::Output) {
                None => report.push(
                    ViolationCode::DanglingReference,
                    location,
                    format!("inner output `{source}` does not exist"),
                ),
                Some(src) if src.ty != target.ty => report.push(
                    ViolationCode::TypeMismatch,
                    location,
                    format!(
                        "output `{source}` has type {} but `{outer_port}` has type {}",
                        src.ty, target.ty
                    ),
                ),
                Some(_) => {}
            }
        }
        for p in &self.outer.outputs {
            if !self.phi_out.contains_key(&p.name) {
                report.push(
                    ViolationCode::MissingSupplier,
                    Subject::OuterOutput(p.name.clone()),
                    "outer output reads no inner output",
                );
            }
        }

        report
    }

    /// Renames every inner box; wiring follows.
    pub fn map_box_ids<F>(&self, mut rename: F) -> WiringDiagram
    where
        F: FnMut(&str) -> String,
    {
        let names: BTreeMap<String, String> = self
            .inner
            .iter()
            .map(|b| (b.id.clone(), rename(&b.id)))
            .collect();
        let map = |id: &str| names.get(id).cloned().unwrap_or_else(|| id.to_string());
        let map_ref = |r: &PortRef| PortRef::new(map(&r.box_id), r.port.clone());
        WiringDiagram {
            inner: self
                .inner
                .iter()
                .map(|b| BoxDecl::new(map(&b.id), b.interface.clone()))
                .collect(),
            outer: self.outer.clone(),
            phi_in: self
                .phi_in
                .iter()
                .map(|(k, s)| {
                    let s = match s {
                        Supplier::InnerOutput(r) => Supplier::InnerOutput(map_ref(r)),
                        other => other.clone(),
                    };
                    (map_ref(k), s)
                })
                .collect(),
            phi_out: self
                .phi_out
                .iter()
                .map(|(k, r)| (k.clone(), map_ref(r)))
                .collect(),
        }
    }

    /// Renames inner boxes positionally (`b0`, `b1`, ...).
    pub fn normalized(&self) -> WiringDiagram {
        let positions: BTreeMap<String, usize> = self
            .inner
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id.clone(), i))
            .collect();
        self.map_box_ids(|id| format!("b{}", positions[id]))
    }

    /// Equality up to box-id normalization.
    pub fn structurally_eq(&self, other: &WiringDiagram) -> bool {
        self.normalized() == other.normalized()
    }
}

/// Id of the single box created by [`identity_wiring`].
pub const IDENTITY_BOX: &str = "id";

pub fn identity_wiring(x: &Interface) -> WiringDiagram {
    identity_wiring_named(x, IDENTITY_BOX)
}

/// One box with interface `x`, every port wired to its same-named outer port.
pub fn identity_wiring_named(x: &Interface, box_id: &str) -> WiringDiagram {
    let mut d = WiringDiagram::new(x.clone()).with_box(box_id, x.clone());
    for p in &x.inputs {
        d = d.wire(box_id, &p.name, Supplier::outer(p.name.clone()));
    }
    for p in &x.outputs {
        d = d.expose(&p.name, box_id, &p.name);
    }
    d
}

/// Operadic substitution: replaces box `slot` of `f` by the diagram `g`.
///
/// Boxes of `g` are renamed `slot/<id>`. Suppliers crossing the former
/// boundary of `slot` are chased through `g.phi_in` and `g.phi_out`; the
/// chase is at most two links long because `phi_out` only targets inner
/// outputs.
pub fn substitute(f: &WiringDiagram, slot: &str, g: &WiringDiagram) -> Result<WiringDiagram> {
    let pos = f
        .box_index(slot)
        .ok_or_else(|| Error::UnknownBox(slot.to_string()))?;
    if f.inner[pos].interface != g.outer {
        return Err(Error::InterfaceMismatch(format!(
            "diagram outer interface does not match box `{slot}`"
        )));
    }

    let prefixed = |id: &str| format!("{slot}/{id}");
    let through_slot = |q: &str| -> Option<Supplier> {
        g.phi_out
            .get(q)
            .map(|r| Supplier::inner(prefixed(&r.box_id), r.port.clone()))
    };
    let lift = |s: &Supplier| -> Option<Supplier> {
        match s {
            Supplier::InnerOutput(r) if r.box_id == slot => through_slot(&r.port),
            other => Some(other.clone()),
        }
    };

    let mut inner = Vec::with_capacity(f.inner.len() + g.inner.len());
    for (i, b) in f.inner.iter().enumerate() {
        if i == pos {
            inner.extend(
                g.inner
                    .iter()
                    .map(|gb| BoxDecl::new(prefixed(&gb.id), gb.interface.clone())),
            );
        } else {
            inner.push(b.clone());
        }
    }

    let mut phi_in = BTreeMap::new();
    for (k, s) in &f.phi_in {
        if k.box_id == slot {
            continue;
        }
        if let Some(s) = lift(s) {
            phi_in.insert(k.clone(), s);
        }
    }
    for (k, s) in &g.phi_in {
        let resolved = match s {
            Supplier::OuterInput(p) => f
                .phi_in
                .get(&PortRef::new(slot, p.clone()))
                .and_then(|s| lift(s)),
            Supplier::InnerOutput(r) => Some(Supplier::inner(prefixed(&r.box_id), r.port.clone())),
        };
        if let Some(s) = resolved {
            phi_in.insert(PortRef::new(prefixed(&k.box_id), k.port.clone()), s);
        }
    }

    let mut phi_out = BTreeMap::new();
    for (q, r) in &f.phi_out {
        let target = if r.box_id == slot {
            match g.phi_out.get(&r.port) {
                Some(gr) => PortRef::new(prefixed(&gr.box_id), gr.port.clone()),
                None => continue,
            }
        } else {
            r.clone()
        };
        phi_out.insert(q.clone(), target);
    }

    Ok(WiringDiagram {
        inner,
        outer: f.outer.clone(),
        phi_in,
        phi_out,
    })
}

fn fresh_names<'a>(taken: &mut BTreeSet<String>, names: impl Iterator<Item = &'a str> + Clone) -> BTreeMap<String, String> {
    let originals: BTreeSet<&str> = names.clone().collect();
    let mut out = BTreeMap::new();
    for n in names {
        let mut candidate = n.to_string();
        while taken.contains(&candidate) || (candidate != n && originals.contains(candidate.as_str())) {
            candidate.push('\'');
        }
        taken.insert(candidate.clone());
        out.insert(n.to_string(), candidate);
    }
    out
}

/// Parallel juxtaposition. Colliding names on the `g` side get a `'` suffix.
pub fn tensor(f: &WiringDiagram, g: &WiringDiagram) -> WiringDiagram {
    let mut taken: BTreeSet<String> = f.inner.iter().map(|b| b.id.clone()).collect();
    let box_names = fresh_names(&mut taken, g.inner.iter().map(|b| b.id.as_str()));
    let mut taken: BTreeSet<String> = f.outer.inputs.iter().map(|p| p.name.clone()).collect();
    let in_names = fresh_names(&mut taken, g.outer.inputs.iter().map(|p| p.name.as_str()));
    let mut taken: BTreeSet<String> = f.outer.outputs.iter().map(|p| p.name.clone()).collect();
    let out_names = fresh_names(&mut taken, g.outer.outputs.iter().map(|p| p.name.as_str()));

    let g = g.map_box_ids(|id| box_names[id].clone());
    let mut d = f.clone();
    d.inner.extend(g.inner);
    d.outer.inputs.extend(
        g.outer
            .inputs
            .iter()
            .map(|p| Port::new(in_names[&p.name].clone(), p.ty.clone())),
    );
    d.outer.outputs.extend(
        g.outer
            .outputs
            .iter()
            .map(|p| Port::new(out_names[&p.name].clone(), p.ty.clone())),
    );
    for (k, s) in g.phi_in {
        let s = match s {
            Supplier::OuterInput(p) => {
                let renamed = in_names.get(&p).cloned().unwrap_or(p);
                Supplier::OuterInput(renamed)
            }
            other => other,
        };
        d.phi_in.insert(k, s);
    }
    for (q, r) in g.phi_out {
        let renamed = out_names.get(&q).cloned().unwrap_or(q);
        d.phi_out.insert(renamed, r);
    }
    d
}
