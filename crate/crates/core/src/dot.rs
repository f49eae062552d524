//! Graphviz export.

use std::fmt::Write;

use crate::diagram::{Supplier, WiringDiagram};
use crate::error::{Error, Result};
use crate::types::Port;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn port_list(ports: &[Port]) -> String {
    ports
        .iter()
        .map(|p| format!("{}: {}", p.name, p.ty))
        .collect::<Vec<_>>()
        .join(", ")
}

fn box_node(id: &str) -> String {
    quote(&format!("box:{id}"))
}

/// Renders `d` as a Graphviz digraph.
///
/// One node per inner box, one boundary node per outer port, one edge per
/// `phi_in` / `phi_out` entry. Output is a pure function of the diagram.
pub fn export_dot(d: &WiringDiagram) -> Result<String> {
    let report = d.validate();
    if !report.is_ok() {
        return Err(Error::InvalidDiagram(report));
    }
    let mut out = String::new();
    out.push_str("digraph wiring {\n  rankdir=LR;\n  node [shape=box];\n");
    for p in &d.outer.inputs {
        let _ = writeln!(
            out,
            "  {} [shape=circle, label={}];",
            quote(&format!("in:{}", p.name)),
            quote(&format!("{}: {}", p.name, p.ty))
        );
    }
    for b in &d.inner {
        let label = format!(
            "{}\nin: {}\nout: {}",
            b.id,
            port_list(&b.interface.inputs),
            port_list(&b.interface.outputs)
        );
        let _ = writeln!(out, "  {} [label={}];", box_node(&b.id), quote(&label));
    }
    for p in &d.outer.outputs {
        let _ = writeln!(
            out,
            "  {} [shape=doublecircle, label={}];",
            quote(&format!("out:{}", p.name)),
            quote(&format!("{}: {}", p.name, p.ty))
        );
    }
    for b in &d.inner {
        for p in &b.interface.inputs {
            let key = crate::diagram::PortRef::new(b.id.clone(), p.name.clone());
            match &d.phi_in[&key] {
                Supplier::OuterInput(src) => {
                    let _ = writeln!(
                        out,
                        "  {} -> {} [headlabel={}];",
                        quote(&format!("in:{src}")),
                        box_node(&b.id),
                        quote(&p.name)
                    );
                }
                Supplier::InnerOutput(r) => {
                    let _ = writeln!(
                        out,
                        "  {} -> {} [taillabel={}, headlabel={}];",
                        box_node(&r.box_id),
                        box_node(&b.id),
                        quote(&r.port),
                        quote(&p.name)
                    );
                }
            }
        }
    }
    for p in &d.outer.outputs {
        let r = &d.phi_out[&p.name];
        let _ = writeln!(
            out,
            "  {} -> {} [taillabel={}];",
            box_node(&r.box_id),
            quote(&format!("out:{}", p.name)),
            quote(&r.port)
        );
    }
    out.push_str("}\n");
    Ok(out)
}
