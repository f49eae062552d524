use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};

use crate::contract::Contract;
use crate::diagram::{PortRef, Supplier, WiringDiagram};
use crate::lti::LtiSystem;
use crate::moore::{MooreMachine, Trace};
use crate::types::{decode, valuation_count, Side, Valuation};

/// Runs every component side by side, resolving each supplier by name at
/// every tick, and returns the outer output sequence.
pub fn cosimulate_moore(
    d: &WiringDiagram,
    assign: &BTreeMap<String, MooreMachine>,
    inputs: &[Valuation],
) -> Vec<Valuation> {
    let mut state: BTreeMap<&str, usize> = assign.iter().map(|(k, m)| (k.as_str(), m.init())).collect();
    let mut outputs = Vec::with_capacity(inputs.len());
    for v in inputs {
        let mut published: BTreeMap<(String, String), usize> = BTreeMap::new();
        for b in &d.inner {
            let m = &assign[&b.id];
            let r = m.readout(state[b.id.as_str()]);
            for (p, &label) in b.interface.outputs.iter().zip(r) {
                published.insert((b.id.clone(), p.name.clone()), label);
            }
        }
        let outer_in: BTreeMap<&str, usize> = d
            .outer
            .inputs
            .iter()
            .zip(v)
            .map(|(p, &x)| (p.name.as_str(), x))
            .collect();
        let value = |s: &Supplier| match s {
            Supplier::OuterInput(q) => outer_in[q.as_str()],
            Supplier::InnerOutput(r) => published[&(r.box_id.clone(), r.port.clone())],
        };
        outputs.push(
            d.outer
                .outputs
                .iter()
                .map(|q| {
                    let r = &d.phi_out[&q.name];
                    published[&(r.box_id.clone(), r.port.clone())]
                })
                .collect(),
        );
        let mut next = state.clone();
        for b in &d.inner {
            let local: Valuation = b
                .interface
                .inputs
                .iter()
                .map(|p| value(&d.phi_in[&PortRef::new(b.id.clone(), p.name.clone())]))
                .collect();
            let (s, _) = assign[&b.id].step(state[b.id.as_str()], &local).expect("valid input");
            next.insert(b.id.as_str(), s);
        }
        state = next;
    }
    outputs
}

/// Enumerates all traces of length `h` by recursion over input sequences.
pub fn brute_traces(m: &MooreMachine, h: usize) -> BTreeSet<Trace> {
    fn go(m: &MooreMachine, s: usize, left: usize, prefix: &mut Trace, out: &mut BTreeSet<Trace>) {
        if left == 0 {
            out.insert(prefix.clone());
            return;
        }
        let radices = m.interface().radices(Side::Input);
        for i in 0..valuation_count(&radices) as usize {
            let v = decode(&radices, i);
            let (next, y) = m.step(s, &v).expect("valid input");
            prefix.inputs.push(v);
            prefix.outputs.push(y);
            go(m, next, left - 1, prefix, out);
            prefix.inputs.pop();
            prefix.outputs.pop();
        }
    }
    let mut out = BTreeSet::new();
    go(m, m.init(), h, &mut Trace::empty(), &mut out);
    out
}

/// Composite contract by exhaustive search over outer inputs and the joint
/// valuation of every inner output port.
pub fn brute_compose(d: &WiringDiagram, assign: &BTreeMap<String, Contract>) -> BTreeSet<(Valuation, Valuation)> {
    let outer_radices = d.outer.radices(Side::Input);
    let mut slots: Vec<(String, String)> = Vec::new();
    let mut radices = Vec::new();
    for b in &d.inner {
        for p in &b.interface.outputs {
            slots.push((b.id.clone(), p.name.clone()));
            radices.push(p.ty.labels().expect("finite").len());
        }
    }
    let mut out = BTreeSet::new();
    for x in 0..valuation_count(&outer_radices) as usize {
        let xv = decode(&outer_radices, x);
        for z in 0..valuation_count(&radices) as usize {
            let zv = decode(&radices, z);
            let inner: BTreeMap<(String, String), usize> = slots.iter().cloned().zip(zv.iter().copied()).collect();
            let value = |s: &Supplier| match s {
                Supplier::OuterInput(q) => xv[d.outer.input(q).expect("port").0],
                Supplier::InnerOutput(r) => inner[&(r.box_id.clone(), r.port.clone())],
            };
            let consistent = d.inner.iter().all(|b| {
                let u: Valuation = b
                    .interface
                    .inputs
                    .iter()
                    .map(|p| value(&d.phi_in[&PortRef::new(b.id.clone(), p.name.clone())]))
                    .collect();
                let y: Valuation = b
                    .interface
                    .outputs
                    .iter()
                    .map(|p| inner[&(b.id.clone(), p.name.clone())])
                    .collect();
                assign[&b.id].allows(&u, &y)
            });
            if consistent {
                let y = d
                    .outer
                    .outputs
                    .iter()
                    .map(|q| {
                        let r = &d.phi_out[&q.name];
                        inner[&(r.box_id.clone(), r.port.clone())]
                    })
                    .collect();
                out.insert((xv.clone(), y));
            }
        }
    }
    out
}

fn to_na(m: &crate::matrix::Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j))
}

/// Per-step co-simulation of an LTI diagram.
///
/// Each tick assembles one linear system whose unknowns are every inner
/// input and output entry: `y_b - D_b u_b = C_b x_b` for each box and
/// `u_b[port] - (supplier) = (outer input, if any)` for each wire. It is
/// solved with LU; states then advance box by box. `x0` gives each box's
/// initial state (missing boxes start at zero).
pub fn cosimulate_lti(
    d: &WiringDiagram,
    assign: &BTreeMap<String, LtiSystem>,
    x0: &BTreeMap<String, Vec<f64>>,
    inputs: &[Vec<f64>],
) -> Option<Vec<Vec<f64>>> {
    let mut x: Vec<DVector<f64>> = d
        .inner
        .iter()
        .map(|b| {
            let n = assign[&b.id].order();
            x0.get(&b.id)
                .map(|v| DVector::from_column_slice(v))
                .unwrap_or_else(|| DVector::zeros(n))
        })
        .collect();

    // Unknown layout: for each box, its input entries then its output entries.
    let mut u_off = Vec::new();
    let mut y_off = Vec::new();
    let mut total = 0;
    for b in &d.inner {
        let s = &assign[&b.id];
        u_off.push(total);
        total += s.input_dim();
        y_off.push(total);
        total += s.output_dim();
    }
    let index: BTreeMap<&str, usize> = d.inner.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();
    let outer_in_off = d.outer.real_offsets(Side::Input);

    let mut result = Vec::with_capacity(inputs.len());
    for w in inputs {
        let mut lhs = DMatrix::<f64>::zeros(total, total);
        let mut rhs = DVector::<f64>::zeros(total);
        for (k, b) in d.inner.iter().enumerate() {
            let s = &assign[&b.id];
            let (c, dd) = (to_na(s.c()), to_na(s.d()));
            let cx = &c * &x[k];
            for i in 0..s.output_dim() {
                lhs[(y_off[k] + i, y_off[k] + i)] = 1.0;
                for j in 0..s.input_dim() {
                    lhs[(y_off[k] + i, u_off[k] + j)] -= dd[(i, j)];
                }
                rhs[y_off[k] + i] = cx[i];
            }
            let offs = b.interface.real_offsets(Side::Input);
            for (pi, p) in b.interface.inputs.iter().enumerate() {
                let width = p.ty.real_dim().expect("real");
                let row0 = u_off[k] + offs[pi];
                match &d.phi_in[&PortRef::new(b.id.clone(), p.name.clone())] {
                    Supplier::OuterInput(q) => {
                        let (qi, _) = d.outer.input(q).expect("port");
                        for e in 0..width {
                            lhs[(row0 + e, row0 + e)] = 1.0;
                            rhs[row0 + e] = w[outer_in_off[qi] + e];
                        }
                    }
                    Supplier::InnerOutput(r) => {
                        let src = index[r.box_id.as_str()];
                        let sb = &d.inner[src];
                        let (si, _) = sb.interface.output(&r.port).expect("port");
                        let col0 = y_off[src] + sb.interface.real_offsets(Side::Output)[si];
                        for e in 0..width {
                            lhs[(row0 + e, row0 + e)] += 1.0;
                            lhs[(row0 + e, col0 + e)] -= 1.0;
                        }
                    }
                }
            }
        }
        let sol = lhs.lu().solve(&rhs)?;
        let mut y = Vec::new();
        for q in &d.outer.outputs {
            let r = &d.phi_out[&q.name];
            let src = index[r.box_id.as_str()];
            let sb = &d.inner[src];
            let (si, p) = sb.interface.output(&r.port).expect("port");
            let col0 = y_off[src] + sb.interface.real_offsets(Side::Output)[si];
            for e in 0..p.ty.real_dim().expect("real") {
                y.push(sol[col0 + e]);
            }
        }
        result.push(y);
        for (k, b) in d.inner.iter().enumerate() {
            let s = &assign[&b.id];
            let u = sol.rows(u_off[k], s.input_dim()).into_owned();
            x[k] = to_na(s.a()) * &x[k] + to_na(s.b()) * u;
        }
    }
    Some(result)
}
