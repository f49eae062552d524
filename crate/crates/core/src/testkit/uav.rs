//! The three-box UAV loop (sensor `L`, controller `C`, dynamics `D`) in
//! finite and linear flavors, plus a two-level variant where `D` is
//! implemented by an autopilot feeding an airframe.

use crate::contract::{alpha, Contract, TraceContract};
use crate::diagram::{Supplier, WiringDiagram};
use crate::exec::Limits;
use crate::hierarchy::HierarchicalModel;
use crate::lti::{apply_lti, LtiSystem, DEFAULT_PIVOT_EPS};
use crate::matrix::Matrix;
use crate::moore::MooreMachine;
use crate::types::{Interface, Port, ValueType};

fn level() -> ValueType {
    ValueType::finite(["lo", "hi"])
}

fn command() -> ValueType {
    ValueType::finite(["down", "up"])
}

fn wind() -> ValueType {
    ValueType::finite(["calm", "gust"])
}

fn power() -> ValueType {
    ValueType::finite(["off", "on"])
}

fn iface(ins: &[(&str, &ValueType)], outs: &[(&str, &ValueType)]) -> Interface {
    let ports = |ps: &[(&str, &ValueType)]| ps.iter().map(|(n, t)| Port::new(*n, (*t).clone())).collect();
    Interface::new(ports(ins), ports(outs))
}

/// Port names and wiring shared by both flavors; `t` supplies the types of
/// (level, command, wind).
fn wiring(t: [&ValueType; 3]) -> WiringDiagram {
    let [lv, cmd, wd] = t;
    WiringDiagram::new(iface(&[("d", lv), ("e", wd)], &[("s", lv)]))
        .with_box("L", iface(&[("s", lv)], &[("s_est", lv)]))
        .with_box("C", iface(&[("s_est", lv), ("d", lv)], &[("c", cmd)]))
        .with_box("D", iface(&[("c", cmd), ("e", wd)], &[("s", lv)]))
        .wire("L", "s", Supplier::inner("D", "s"))
        .wire("C", "s_est", Supplier::inner("L", "s_est"))
        .wire("C", "d", Supplier::outer("d"))
        .wire("D", "c", Supplier::inner("C", "c"))
        .wire("D", "e", Supplier::outer("e"))
        .expose("s", "D", "s")
}

pub fn diagram() -> WiringDiagram {
    let (lv, cmd, wd) = (level(), command(), wind());
    wiring([&lv, &cmd, &wd])
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Latches the measured level.
pub fn sensor() -> MooreMachine {
    let d = diagram();
    MooreMachine::from_fn(
        d.find_box("L").unwrap().interface.clone(),
        labels(&["lo", "hi"]),
        0,
        |s| vec![s],
        |_, v| v[0],
    )
    .expect("well formed")
}

/// Commands up when the demand exceeds the estimate, down when below,
/// otherwise holds its previous command.
pub fn controller() -> MooreMachine {
    let d = diagram();
    MooreMachine::from_fn(
        d.find_box("C").unwrap().interface.clone(),
        labels(&["down", "up"]),
        0,
        |s| vec![s],
        |s, v| match v[1].cmp(&v[0]) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => s,
        },
    )
    .expect("well formed")
}

/// Gusts knock the level down; otherwise it follows the command.
fn settle(drive: usize, gust: usize) -> usize {
    if gust == 1 {
        0
    } else {
        drive
    }
}

pub fn dynamics() -> MooreMachine {
    let d = diagram();
    MooreMachine::from_fn(
        d.find_box("D").unwrap().interface.clone(),
        labels(&["lo", "hi"]),
        0,
        |s| vec![s],
        |_, v| settle(v[0], v[1]),
    )
    .expect("well formed")
}

pub fn flat_model() -> HierarchicalModel {
    let mut m = HierarchicalModel::new(diagram());
    m.moore.insert("L".into(), sensor());
    m.moore.insert("C".into(), controller());
    m.moore.insert("D".into(), dynamics());
    m
}

/// Implementation of `D`: the autopilot latches the command into a power
/// setting, which the airframe then follows.
pub fn dynamics_diagram() -> WiringDiagram {
    let (lv, cmd, wd, pw) = (level(), command(), wind(), power());
    WiringDiagram::new(iface(&[("c", &cmd), ("e", &wd)], &[("s", &lv)]))
        .with_box("autopilot", iface(&[("c", &cmd)], &[("pwm", &pw)]))
        .with_box("airframe", iface(&[("pwm", &pw), ("e", &wd)], &[("s", &lv)]))
        .wire("autopilot", "c", Supplier::outer("c"))
        .wire("airframe", "pwm", Supplier::inner("autopilot", "pwm"))
        .wire("airframe", "e", Supplier::outer("e"))
        .expose("s", "airframe", "s")
}

pub fn autopilot() -> MooreMachine {
    MooreMachine::from_fn(
        dynamics_diagram().find_box("autopilot").unwrap().interface.clone(),
        labels(&["off", "on"]),
        0,
        |s| vec![s],
        |_, v| v[0],
    )
    .expect("well formed")
}

pub fn airframe() -> MooreMachine {
    MooreMachine::from_fn(
        dynamics_diagram().find_box("airframe").unwrap().interface.clone(),
        labels(&["lo", "hi"]),
        0,
        |s| vec![s],
        |_, v| settle(v[0], v[1]),
    )
    .expect("well formed")
}

/// Airframe that climbs in calm air even with the power off, from `lo`.
pub fn faulty_airframe() -> MooreMachine {
    airframe().with_transition(0, &[0, 0], 1).expect("valid transition")
}

/// Two-stage pipeline specification of `D`: state `(power, level)`.
pub fn pipelined_dynamics() -> MooreMachine {
    let names = labels(&["off.lo", "off.hi", "on.lo", "on.hi"]);
    MooreMachine::from_fn(
        dynamics().interface().clone(),
        names,
        0,
        |s| vec![s % 2],
        |s, v| 2 * v[0] + settle(s / 2, v[1]),
    )
    .expect("well formed")
}

/// `D` refined into autopilot and airframe. Every leaf carries the full
/// single-step contract; `D` carries its specification's traces at horizon 2.
pub fn hierarchical_model(airframe_machine: MooreMachine) -> HierarchicalModel {
    let limits = Limits::default();
    let mut child = HierarchicalModel::new(dynamics_diagram());
    child.moore.insert("autopilot".into(), autopilot());
    child.moore.insert("airframe".into(), airframe_machine);
    for id in ["autopilot", "airframe"] {
        let iface = dynamics_diagram().find_box(id).unwrap().interface.clone();
        child.contracts.insert(id.into(), Contract::full(iface).expect("finite"));
    }

    let mut root = HierarchicalModel::new(diagram());
    root.moore.insert("L".into(), sensor());
    root.moore.insert("C".into(), controller());
    root.moore.insert("D".into(), pipelined_dynamics());
    root.children.insert("D".into(), child);
    for (id, m) in [("L", sensor()), ("C", controller())] {
        root.contracts.insert(id.into(), Contract::full(m.interface().clone()).expect("finite"));
    }
    let spec: TraceContract = alpha(&pipelined_dynamics(), 2, &limits).expect("small");
    root.trace_contracts.insert("D".into(), spec);
    root
}

pub fn model() -> HierarchicalModel {
    hierarchical_model(airframe())
}

pub fn perturbed_model() -> HierarchicalModel {
    hierarchical_model(faulty_airframe())
}

fn real_wiring() -> WiringDiagram {
    wiring([&ValueType::Real, &ValueType::Real, &ValueType::Real])
}

fn real_iface(ins: &[&str], outs: &[&str]) -> Interface {
    Interface::new(
        ins.iter().map(|n| Port::new(*n, ValueType::Real)).collect(),
        outs.iter().map(|n| Port::new(*n, ValueType::Real)).collect(),
    )
}

fn lti_dynamics_diagram() -> WiringDiagram {
    WiringDiagram::new(real_iface(&["c", "e"], &["s"]))
        .with_box("autopilot", real_iface(&["c"], &["pwm"]))
        .with_box("airframe", real_iface(&["pwm", "e"], &["s"]))
        .wire("autopilot", "c", Supplier::outer("c"))
        .wire("airframe", "pwm", Supplier::inner("autopilot", "pwm"))
        .wire("airframe", "e", Supplier::outer("e"))
        .expose("s", "airframe", "s")
}

/// Linear loop: unit sensor, proportional controller, and a plant realized
/// by a first-order autopilot in series with a first-order airframe. The
/// plant is also stored as a similarity-transformed abstract system.
pub fn lti_model() -> HierarchicalModel {
    let m = |rows: &[Vec<f64>]| Matrix::from_rows(rows);
    let mut child = HierarchicalModel::new(lti_dynamics_diagram());
    child.lti.insert(
        "autopilot".into(),
        LtiSystem::new(
            real_iface(&["c"], &["pwm"]),
            m(&[vec![0.25]]),
            m(&[vec![1.0]]),
            m(&[vec![0.75]]),
            m(&[vec![0.0]]),
        )
        .expect("dimensions"),
    );
    child.lti.insert(
        "airframe".into(),
        LtiSystem::new(
            real_iface(&["pwm", "e"], &["s"]),
            m(&[vec![0.5]]),
            m(&[vec![0.5, -0.25]]),
            m(&[vec![1.0]]),
            m(&[vec![0.0, 0.0]]),
        )
        .expect("dimensions"),
    );
    let composite = child.composite_lti(DEFAULT_PIVOT_EPS).expect("well posed");
    let t = m(&[vec![1.0, 1.0], vec![0.0, 2.0]]);
    let abstract_plant = composite.transformed(&t, DEFAULT_PIVOT_EPS).expect("invertible");

    let mut root = HierarchicalModel::new(real_wiring());
    root.lti.insert(
        "L".into(),
        LtiSystem::static_gain(real_iface(&["s"], &["s_est"]), m(&[vec![1.0]])).expect("dimensions"),
    );
    root.lti.insert(
        "C".into(),
        LtiSystem::static_gain(real_iface(&["s_est", "d"], &["c"]), m(&[vec![-0.5, 0.5]])).expect("dimensions"),
    );
    root.lti.insert("D".into(), abstract_plant);
    root.children.insert("D".into(), child);
    debug_assert!(apply_lti(&real_wiring(), &root.lti, DEFAULT_PIVOT_EPS).is_ok());
    root
}
