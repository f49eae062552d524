use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::Rng;
use crate::contract::Contract;
use crate::diagram::{Supplier, WiringDiagram};
use crate::hierarchy::HierarchicalModel;
use crate::lti::LtiSystem;
use crate::matrix::Matrix;
use crate::moore::MooreMachine;
use crate::types::{decode, valuation_count, Interface, Port, Side, ValueType};

#[derive(Debug, Clone)]
pub struct Shape {
    /// Inclusive upper bound on inner boxes (at least one is generated).
    pub max_boxes: usize,
    /// Inclusive upper bound on ports per side of every interface.
    pub max_ports: usize,
    /// Port types to draw from.
    pub types: Vec<ValueType>,
}

impl Shape {
    pub fn bits(max_boxes: usize, max_ports: usize) -> Self {
        Shape {
            max_boxes,
            max_ports,
            types: vec![ValueType::bit()],
        }
    }

    pub fn reals(max_boxes: usize, max_ports: usize) -> Self {
        Shape {
            max_boxes,
            max_ports,
            types: vec![ValueType::Real, ValueType::RealVector(2)],
        }
    }
}

fn ports(rng: &mut Rng, prefix: &str, count: usize, types: &[ValueType]) -> Vec<Port> {
    (0..count)
        .map(|i| Port::new(format!("{prefix}{i}"), types.choose(rng).expect("types").clone()))
        .collect()
}

pub fn interface(rng: &mut Rng, shape: &Shape, min_in: usize, min_out: usize) -> Interface {
    let n_in = rng.gen_range(min_in..=shape.max_ports.max(min_in));
    let n_out = rng.gen_range(min_out..=shape.max_ports.max(min_out));
    Interface::new(
        ports(rng, "u", n_in, &shape.types),
        ports(rng, "y", n_out, &shape.types),
    )
}

/// A random valid diagram with the given outer interface.
///
/// Inner boxes get fresh ids `B0, B1, ...`. Whenever a consumer type has no
/// inner output to read from, an output port of that type is added to a
/// random box, so suppliers always exist.
pub fn diagram_with_outer(rng: &mut Rng, shape: &Shape, outer: Interface) -> WiringDiagram {
    let n_boxes = rng.gen_range(1..=shape.max_boxes.max(1));
    let mut boxes: Vec<(String, Interface)> = (0..n_boxes)
        .map(|i| (format!("B{i}"), interface(rng, shape, 0, 0)))
        .collect();

    let mut needed: Vec<ValueType> = outer.outputs.iter().map(|p| p.ty.clone()).collect();
    for (_, iface) in &boxes {
        needed.extend(iface.inputs.iter().map(|p| p.ty.clone()));
    }
    for ty in needed {
        let present = boxes
            .iter()
            .any(|(_, i)| i.outputs.iter().any(|p| p.ty == ty));
        if !present {
            let roomy: Vec<usize> = (0..boxes.len())
                .filter(|&k| boxes[k].1.outputs.len() < shape.max_ports)
                .collect();
            let k = *roomy.choose(rng).unwrap_or(&rng.gen_range(0..boxes.len()));
            let iface = &mut boxes[k].1;
            let name = format!("y{}", iface.outputs.len());
            iface.outputs.push(Port::new(name, ty));
        }
    }

    let mut d = WiringDiagram::new(outer.clone());
    for (id, iface) in &boxes {
        d = d.with_box(id.clone(), iface.clone());
    }
    for (id, iface) in &boxes {
        for p in &iface.inputs {
            let mut candidates: Vec<Supplier> = outer
                .inputs
                .iter()
                .filter(|q| q.ty == p.ty)
                .map(|q| Supplier::outer(q.name.clone()))
                .collect();
            for (other, oi) in &boxes {
                candidates.extend(
                    oi.outputs
                        .iter()
                        .filter(|q| q.ty == p.ty)
                        .map(|q| Supplier::inner(other.clone(), q.name.clone())),
                );
            }
            let s = candidates.choose(rng).expect("supplier exists").clone();
            d = d.wire(id, &p.name, s);
        }
    }
    for q in &outer.outputs {
        let candidates: Vec<(String, String)> = boxes
            .iter()
            .flat_map(|(id, i)| {
                i.outputs
                    .iter()
                    .filter(|p| p.ty == q.ty)
                    .map(move |p| (id.clone(), p.name.clone()))
            })
            .collect();
        let (b, p) = candidates.choose(rng).expect("output exists").clone();
        d = d.expose(&q.name, &b, &p);
    }
    debug_assert!(d.validate().is_ok());
    d
}

pub fn diagram(rng: &mut Rng, shape: &Shape) -> WiringDiagram {
    let outer = interface(rng, shape, 0, 0);
    diagram_with_outer(rng, shape, outer)
}

/// Random machine over a finite interface with `1..=max_states` states.
pub fn moore(rng: &mut Rng, iface: &Interface, max_states: usize) -> MooreMachine {
    let n = rng.gen_range(1..=max_states.max(1));
    let out_radices = iface.radices(Side::Output);
    let inputs = valuation_count(&iface.radices(Side::Input)) as usize;
    let readout = (0..n)
        .map(|_| out_radices.iter().map(|&r| rng.gen_range(0..r)).collect())
        .collect();
    let update = (0..n * inputs).map(|_| rng.gen_range(0..n)).collect();
    let init = rng.gen_range(0..n);
    MooreMachine::new(
        iface.clone(),
        (0..n).map(|s| format!("s{s}")).collect(),
        init,
        readout,
        update,
    )
    .expect("generated machine is well formed")
}

fn uniform(rng: &mut Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..=1.0) * scale).collect();
    Matrix::new(rows, cols, data).expect("finite")
}

/// Random system with entries in [-1, 1]; `D` is scaled by 0.3.
pub fn lti(rng: &mut Rng, iface: &Interface, max_order: usize) -> LtiSystem {
    let n = rng.gen_range(0..=max_order);
    let m = iface.real_width(Side::Input);
    let p = iface.real_width(Side::Output);
    LtiSystem::new(
        iface.clone(),
        uniform(rng, n, n, 1.0),
        uniform(rng, n, m, 1.0),
        uniform(rng, p, n, 1.0),
        uniform(rng, p, m, 0.3),
    )
    .expect("dimensions agree")
}

/// Random contract: each pair is kept with probability `density`.
pub fn contract(rng: &mut Rng, iface: &Interface, density: f64) -> Contract {
    let ri = iface.radices(Side::Input);
    let ro = iface.radices(Side::Output);
    let mut pairs = Vec::new();
    for a in 0..valuation_count(&ri) as usize {
        for b in 0..valuation_count(&ro) as usize {
            if rng.gen_bool(density) {
                pairs.push((decode(&ri, a), decode(&ro, b)));
            }
        }
    }
    Contract::new(iface.clone(), pairs).expect("finite interface")
}

pub fn moore_assignment(rng: &mut Rng, d: &WiringDiagram, max_states: usize) -> BTreeMap<String, MooreMachine> {
    d.inner
        .iter()
        .map(|b| (b.id.clone(), moore(rng, &b.interface, max_states)))
        .collect()
}

pub fn lti_assignment(rng: &mut Rng, d: &WiringDiagram, max_order: usize) -> BTreeMap<String, LtiSystem> {
    d.inner
        .iter()
        .map(|b| (b.id.clone(), lti(rng, &b.interface, max_order)))
        .collect()
}

pub fn contract_assignment(rng: &mut Rng, d: &WiringDiagram, density: f64) -> BTreeMap<String, Contract> {
    d.inner
        .iter()
        .map(|b| (b.id.clone(), contract(rng, &b.interface, density)))
        .collect()
}

/// A nested instance: `outer` with `slot` to be implemented by `inner`.
#[derive(Debug, Clone)]
pub struct Nested {
    pub outer: WiringDiagram,
    pub slot: String,
    pub inner: WiringDiagram,
}

pub fn nested(rng: &mut Rng, shape: &Shape) -> Nested {
    let outer = diagram(rng, shape);
    let slot = outer.inner.choose(rng).expect("boxes").clone();
    let inner = diagram_with_outer(rng, shape, slot.interface.clone());
    Nested {
        outer,
        slot: slot.id,
        inner,
    }
}

/// A two-level Moore model: one random box of a random diagram is refined.
pub fn two_level_moore(rng: &mut Rng, shape: &Shape, max_states: usize) -> HierarchicalModel {
    let n = nested(rng, shape);
    let mut child = HierarchicalModel::new(n.inner.clone());
    child.moore = moore_assignment(rng, &n.inner, max_states);
    let mut root = HierarchicalModel::new(n.outer.clone());
    root.moore = moore_assignment(rng, &n.outer, max_states);
    root.moore.remove(&n.slot);
    root.children.insert(n.slot, child);
    root
}

/// Strictly proper or biproper SISO transfer function
/// `(num[1] z + num[0]) / (z^2 + den[1] z + den[0]) + feedthrough`.
#[derive(Debug, Clone, Copy)]
pub struct SecondOrder {
    pub den: [f64; 2],
    pub num: [f64; 2],
    pub feedthrough: f64,
}

fn siso() -> Interface {
    Interface::new(vec![Port::new("u", ValueType::Real)], vec![Port::new("y", ValueType::Real)])
}

impl SecondOrder {
    pub fn controllable(&self) -> LtiSystem {
        let [a0, a1] = self.den;
        let [b0, b1] = self.num;
        LtiSystem::new(
            siso(),
            Matrix::from_rows(&[vec![0.0, 1.0], vec![-a0, -a1]]),
            Matrix::from_rows(&[vec![0.0], vec![1.0]]),
            Matrix::from_rows(&[vec![b0, b1]]),
            Matrix::from_rows(&[vec![self.feedthrough]]),
        )
        .expect("dimensions agree")
    }

    pub fn observable(&self) -> LtiSystem {
        let c = self.controllable();
        LtiSystem::new(siso(), c.a().transpose(), c.c().transpose(), c.b().transpose(), c.d().clone())
            .expect("dimensions agree")
    }
}

/// A two-level LTI model. Random loops may be ill-posed.
pub fn two_level_lti(rng: &mut Rng, shape: &Shape, max_order: usize) -> HierarchicalModel {
    let n = nested(rng, shape);
    let mut child = HierarchicalModel::new(n.inner.clone());
    child.lti = lti_assignment(rng, &n.inner, max_order);
    let mut root = HierarchicalModel::new(n.outer.clone());
    root.lti = lti_assignment(rng, &n.outer, max_order);
    root.lti.remove(&n.slot);
    root.children.insert(n.slot, child);
    root
}
