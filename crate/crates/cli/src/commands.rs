use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use opwire::format::{parse_model, serialize_model, FormatError, ModelFile};
use opwire::hierarchy::{check_contracts, default_refinement_horizon, Algebra, RefinementOutcome, Verdict};
use opwire::lti::DEFAULT_PIVOT_EPS;
use opwire::{HierarchicalModel, Interface, Limits, Side, Valuation};

use crate::traces::{columns, write_table, TraceFile};

pub struct Report {
    pub stdout: String,
    pub code: u8,
}

impl Report {
    fn ok(stdout: String) -> Self {
        Report { stdout, code: 0 }
    }

    fn violated(stdout: String) -> Self {
        Report { stdout, code: 1 }
    }
}

type Outcome = Result<Report, String>;

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<ModelFile, String> {
    parse_model(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn err(e: opwire::Error) -> String {
    e.to_string()
}

pub fn validate(path: &Path) -> Outcome {
    match parse_model(&read(path)?) {
        Ok(file) => {
            let model = &file.model;
            Ok(Report::ok(format!(
                "valid: {} boxes, {} levels\n",
                model.box_paths().len(),
                model.depth()
            )))
        }
        Err(FormatError::Validation { path: at, reason }) => Ok(Report::violated(format!("invalid at {at}: {reason}\n"))),
        Err(e) => Err(format!("{}: {e}", path.display())),
    }
}

/// The model with every implementation substituted in, carrying each leaf's
/// assignments under its full path.
fn flattened(file: &ModelFile) -> Result<ModelFile, String> {
    let model = &file.model;
    let (diagram, provenance) = model.flatten().map_err(err)?;
    let mut flat = HierarchicalModel::new(diagram);
    let mut metadata = file.metadata.clone();
    for (leaf, ancestors) in &provenance {
        let (parent, id) = model.locate(leaf).map_err(err)?;
        if let Some(m) = parent.moore.get(id) {
            flat.moore.insert(leaf.clone(), m.clone());
        }
        if let Some(s) = parent.lti.get(id) {
            flat.lti.insert(leaf.clone(), s.clone());
        }
        if let Some(c) = parent.contracts.get(id) {
            flat.contracts.insert(leaf.clone(), c.clone());
        }
        if let Some(c) = parent.trace_contracts.get(id) {
            flat.trace_contracts.insert(leaf.clone(), c.clone());
        }
        metadata.insert(format!("provenance:{leaf}"), ancestors.join(";"));
    }
    Ok(ModelFile {
        version: file.version.clone(),
        model: flat,
        metadata,
    })
}

pub fn flatten(path: &Path) -> Outcome {
    let file = load(path)?;
    Ok(Report::ok(serialize_model(&flattened(&file)?)))
}

fn label_row(iface: &Interface, v: &Valuation) -> Vec<String> {
    iface
        .outputs
        .iter()
        .zip(v)
        .map(|(p, &k)| p.ty.labels().map_or_else(|| k.to_string(), |l| l[k].clone()))
        .collect()
}

pub fn simulate(path: &Path, inputs: &Path, horizon: Option<usize>, limits: &Limits) -> Outcome {
    let model = load(path)?.model;
    let trace = TraceFile::read(inputs)?;
    let iface = model.outer().clone();
    let header = columns(&iface, Side::Output);
    let rows: Vec<Vec<String>> = match model.leaf_algebra() {
        Some(Algebra::Moore) => {
            let m = model.composite_moore(limits).map_err(err)?;
            let seq = trace.finite_inputs(&iface, horizon)?;
            let run = m.simulate(&seq).map_err(err)?;
            run.outputs.iter().map(|y| label_row(&iface, y)).collect()
        }
        Some(Algebra::Lti) => {
            let s = model.composite_lti(DEFAULT_PIVOT_EPS).map_err(err)?;
            let seq = trace.real_inputs(&iface, horizon)?;
            let ys = s.simulate(&vec![0.0; s.order()], &seq).map_err(err)?;
            ys.iter().map(|y| y.iter().map(|v| format!("{v}")).collect()).collect()
        }
        None => return Err("every leaf needs a Moore machine, or every leaf an LTI system".into()),
    };
    Ok(Report::ok(write_table(&header, &rows)))
}

pub fn compose_contracts(path: &Path, limits: &Limits) -> Outcome {
    let model = load(path)?.model;
    let c = model.composite_contract(limits).map_err(err)?;
    let mut out = format!("composite contract: {} pairs\n", c.pairs().len());
    for pair in c.pairs() {
        let _ = writeln!(out, "{}", c.show_pair(pair));
    }
    Ok(Report::ok(out))
}

pub fn check(path: &Path, horizon: usize, limits: &Limits) -> Outcome {
    let model = load(path)?.model;
    let checks = check_contracts(&model, horizon, limits);
    if checks.is_empty() {
        return Ok(Report::ok("no contracts\n".into()));
    }
    let mut out = String::new();
    let mut code = 0;
    for c in &checks {
        let _ = writeln!(out, "{} {}: {}", c.path, c.kind, c.verdict);
        code = code.max(match c.verdict {
            Verdict::Holds => 0,
            Verdict::Violated(_) => 1,
            Verdict::Unavailable(_) => 2,
        });
    }
    Ok(Report { stdout: out, code })
}

pub fn check_naturality(path: &Path, horizon: usize, limits: &Limits) -> Outcome {
    let model = load(path)?.model;
    let (flat, leaves) = model.flatten_with(|m| &m.moore).map_err(err)?;
    let report = opwire::check_naturality(&flat, &leaves, horizon, limits).map_err(err)?;
    if report.holds() {
        return Ok(Report::ok(format!("naturality holds ({} traces)\n", report.behavior_leg.len())));
    }
    let lines = report.discrepancy_lines();
    let mut out = format!("naturality fails ({} discrepancies)\n", lines.len());
    for l in lines {
        let _ = writeln!(out, "{l}");
    }
    Ok(Report::violated(out))
}

fn show_sequence(iface: &Interface, side: Side, seq: &[Valuation]) -> String {
    let parts: Vec<String> = seq.iter().map(|v| iface.show(side, v)).collect();
    format!("[{}]", parts.join("; "))
}

pub fn check_refinement(path: &Path, box_path: &str, horizon: Option<usize>, tol: f64, limits: &Limits) -> Outcome {
    let model = load(path)?.model;
    let (parent, id) = model.locate(box_path).map_err(err)?;
    if parent.lti.contains_key(id) {
        let outcome = opwire::check_refinement_lti(&model, box_path, tol, DEFAULT_PIVOT_EPS).map_err(err)?;
        return Ok(match outcome {
            RefinementOutcome::MarkovMismatch { index, gap } => Report::violated(format!(
                "refinement fails: {box_path} differs from its implementation\nMarkov parameter {index} differs by {gap:e} (tol {tol:e})\n"
            )),
            _ => Report::ok(format!("refinement holds: {box_path} matches its implementation (tol {tol:e})\n")),
        });
    }
    let outcome = opwire::check_refinement_moore(&model, box_path, horizon, limits).map_err(err)?;
    let spec = &parent.moore[id];
    let implementation = model.effective_moore(box_path, limits).map_err(err)?;
    let h = horizon.unwrap_or_else(|| default_refinement_horizon(spec, &implementation));
    let iface = spec.interface();
    Ok(match outcome {
        RefinementOutcome::MooreCounterexample(seq) => {
            let a = spec.simulate(&seq).map_err(err)?;
            let b = implementation.simulate(&seq).map_err(err)?;
            Report::violated(format!(
                "refinement fails: {box_path} differs from its implementation\ncounterexample inputs: {}\nabstract outputs: {}\nimplementation outputs: {}\n",
                show_sequence(iface, Side::Input, &seq),
                show_sequence(iface, Side::Output, &a.outputs),
                show_sequence(iface, Side::Output, &b.outputs),
            ))
        }
        _ => Report::ok(format!("refinement holds: {box_path} is trace-equivalent to its implementation up to horizon {h}\n")),
    })
}

pub fn export_dot(path: &Path, flat: bool) -> Outcome {
    let model = load(path)?.model;
    let diagram = if flat { model.flatten().map_err(err)?.0 } else { model.diagram };
    opwire::export_dot(&diagram).map(Report::ok).map_err(err)
}

pub fn fmt(path: &Path) -> Outcome {
    Ok(Report::ok(serialize_model(&load(path)?)))
}
