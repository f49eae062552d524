//! Deterministic Moore machines over finite-typed interfaces, their
//! wiring-diagram composite, simulation, and finite-horizon trace semantics.
//!
//! Output at tick `t` is the readout of the state held at `t`, before input
//! `t` is consumed. Because readouts never see the current input, any
//! feedback wiring composes without fixpoint solving.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::diagram::{Supplier, WiringDiagram};
use crate::error::{Error, Result};
use crate::exec::{checked_pow, map_indices, Limits};
use crate::types::{decode, encode, valuation_count, Interface, Side, Valuation};

const MAX_TABLE: u128 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MooreMachine {
    interface: Interface,
    states: Vec<String>,
    init: usize,
    readout: Vec<Valuation>,
    /// `update[s * input_count + encode(v)]`
    update: Vec<usize>,
    in_radices: Vec<usize>,
    input_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace {
    pub inputs: Vec<Valuation>,
    pub outputs: Vec<Valuation>,
}

impl Trace {
    pub fn empty() -> Self {
        Trace {
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn prefix(&self, len: usize) -> Trace {
        Trace {
            inputs: self.inputs[..len].to_vec(),
            outputs: self.outputs[..len].to_vec(),
        }
    }
}

impl MooreMachine {
    /// Builds a machine from explicit tables.
    ///
    /// `update` is indexed by `state * input_count + encode(input)`, where
    /// inputs enumerate in mixed-radix order over the input ports.
    pub fn new(
        interface: Interface,
        states: Vec<String>,
        init: usize,
        readout: Vec<Valuation>,
        update: Vec<usize>,
    ) -> Result<Self> {
        interface.require_finite()?;
        if states.is_empty() {
            return Err(Error::MalformedMachine("no states".into()));
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(Error::MalformedMachine(format!("duplicate state `{s}`")));
            }
        }
        if init >= states.len() {
            return Err(Error::UnknownState(init));
        }
        if readout.len() != states.len() {
            return Err(Error::MalformedMachine(format!(
                "readout covers {} of {} states",
                readout.len(),
                states.len()
            )));
        }
        for r in &readout {
            interface
                .check_valuation(Side::Output, r)
                .map_err(|e| Error::MalformedMachine(format!("readout: {e}")))?;
        }
        let in_radices = interface.radices(Side::Input);
        let inputs = valuation_count(&in_radices);
        if inputs.saturating_mul(states.len() as u128) > MAX_TABLE {
            return Err(Error::MalformedMachine("transition table too large".into()));
        }
        let input_count = inputs as usize;
        if update.len() != states.len() * input_count {
            return Err(Error::MalformedMachine(format!(
                "transition table has {} entries, expected {}",
                update.len(),
                states.len() * input_count
            )));
        }
        if let Some(&bad) = update.iter().find(|&&s| s >= states.len()) {
            return Err(Error::UnknownState(bad));
        }
        Ok(MooreMachine {
            interface,
            states,
            init,
            readout,
            update,
            in_radices,
            input_count,
        })
    }

    /// Builds a machine from readout and update functions over state indices.
    pub fn from_fn<R, U>(
        interface: Interface,
        states: Vec<String>,
        init: usize,
        readout: R,
        update: U,
    ) -> Result<Self>
    where
        R: Fn(usize) -> Valuation,
        U: Fn(usize, &[usize]) -> usize,
    {
        interface.require_finite()?;
        let radices = interface.radices(Side::Input);
        let inputs = valuation_count(&radices);
        if inputs.saturating_mul(states.len() as u128) > MAX_TABLE {
            return Err(Error::MalformedMachine("transition table too large".into()));
        }
        let readout_table = (0..states.len()).map(&readout).collect();
        let mut table = Vec::with_capacity(states.len() * inputs as usize);
        for s in 0..states.len() {
            for i in 0..inputs as usize {
                table.push(update(s, &decode(&radices, i)));
            }
        }
        MooreMachine::new(interface, states, init, readout_table, table)
    }

    pub fn interface(&self) -> &Interface {
        &self.interface
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn readout(&self, s: usize) -> &Valuation {
        &self.readout[s]
    }

    /// Number of distinct input valuations.
    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn input_radices(&self) -> &[usize] {
        &self.in_radices
    }

    pub fn next_state(&self, s: usize, input_index: usize) -> usize {
        self.update[s * self.input_count + input_index]
    }

    /// Copy of this machine with a different initial state.
    pub fn with_init(&self, init: usize) -> Result<Self> {
        if init >= self.states.len() {
            return Err(Error::UnknownState(init));
        }
        Ok(MooreMachine {
            init,
            ..self.clone()
        })
    }

    /// Copy with one transition redirected.
    pub fn with_transition(&self, s: usize, input: &[usize], to: usize) -> Result<Self> {
        if s >= self.states.len() {
            return Err(Error::UnknownState(s));
        }
        if to >= self.states.len() {
            return Err(Error::UnknownState(to));
        }
        self.interface.check_valuation(Side::Input, input)?;
        let mut m = self.clone();
        let at = s * self.input_count + encode(&self.in_radices, input);
        m.update[at] = to;
        Ok(m)
    }

    /// Returns `(next state, output)`; the output is the pre-step readout.
    pub fn step(&self, s: usize, v: &[usize]) -> Result<(usize, Valuation)> {
        if s >= self.states.len() {
            return Err(Error::UnknownState(s));
        }
        self.interface.check_valuation(Side::Input, v)?;
        let next = self.next_state(s, encode(&self.in_radices, v));
        Ok((next, self.readout[s].clone()))
    }

    pub fn simulate(&self, inputs: &[Valuation]) -> Result<Trace> {
        let mut s = self.init;
        let mut outputs = Vec::with_capacity(inputs.len());
        for v in inputs {
            let (next, y) = self.step(s, v)?;
            outputs.push(y);
            s = next;
        }
        Ok(Trace {
            inputs: inputs.to_vec(),
            outputs,
        })
    }

    /// Simulation over input indices; skips validation.
    fn run_indices(&self, inputs: &[usize]) -> Vec<Valuation> {
        let mut s = self.init;
        inputs
            .iter()
            .map(|&i| {
                let y = self.readout[s].clone();
                s = self.next_state(s, i);
                y
            })
            .collect()
    }

    /// All traces of length `h`, one per input sequence.
    pub fn traces(&self, h: usize, limits: &Limits) -> Result<BTreeSet<Trace>> {
        let count = checked_pow(self.input_count as u128, h);
        limits.guard(count)?;
        let radices = vec![self.input_count; h];
        let traces = map_indices(limits, count as usize, |idx| {
            let seq = decode(&radices, idx);
            let outputs = self.run_indices(&seq);
            Trace {
                inputs: seq.iter().map(|&i| decode(&self.in_radices, i)).collect(),
                outputs,
            }
        });
        Ok(traces.into_iter().collect())
    }
}

/// Shortest, then lexicographically least, input sequence of length at most
/// `h` on which `a` and `b` produce different outputs.
///
/// The last input of a returned sequence never influences the diverging
/// output; it is the least valuation.
pub fn first_divergence(
    a: &MooreMachine,
    b: &MooreMachine,
    h: usize,
    limits: &Limits,
) -> Result<Option<Vec<Valuation>>> {
    if a.interface != b.interface {
        return Err(Error::InterfaceMismatch(
            "machines have different interfaces".into(),
        ));
    }
    let pairs = (a.state_count() as u128) * (b.state_count() as u128);
    limits.guard(pairs.saturating_mul(a.input_count as u128))?;
    if h == 0 {
        return Ok(None);
    }
    let least = vec![0; a.in_radices.len()];
    let start = (a.init, b.init);
    let mut parent: BTreeMap<(usize, usize), Option<((usize, usize), usize)>> = BTreeMap::new();
    parent.insert(start, None);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some(((sa, sb), depth)) = queue.pop_front() {
        if a.readout[sa] != b.readout[sb] {
            let mut path = Vec::new();
            let mut at = (sa, sb);
            while let Some(Some((prev, input))) = parent.get(&at) {
                path.push(decode(&a.in_radices, *input));
                at = *prev;
            }
            path.reverse();
            path.push(least);
            return Ok(Some(path));
        }
        if depth + 1 >= h {
            continue;
        }
        for i in 0..a.input_count {
            let next = (a.next_state(sa, i), b.next_state(sb, i));
            if !parent.contains_key(&next) {
                parent.insert(next, Some(((sa, sb), i)));
                queue.push_back((next, depth + 1));
            }
        }
    }
    Ok(None)
}

pub fn trace_equivalent(a: &MooreMachine, b: &MooreMachine, h: usize, limits: &Limits) -> Result<bool> {
    first_divergence(a, b, h, limits).map(|d| d.is_none())
}

/// Where each inner input reads from, resolved to indices.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Source {
    Outer(usize),
    Inner(usize, usize),
}

/// Resolves `phi_in` into per-box, per-port sources and `phi_out` into
/// `(box, port)` indices. Assumes `d` validates.
pub(crate) fn resolve_wiring(d: &WiringDiagram) -> (Vec<Vec<Source>>, Vec<(usize, usize)>) {
    let index: BTreeMap<&str, usize> = d
        .inner
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id.as_str(), i))
        .collect();
    let out_port = |box_id: &str, port: &str| {
        let k = index[box_id];
        let (p, _) = d.inner[k].interface.output(port).expect("validated");
        (k, p)
    };
    let sources = d
        .inner
        .iter()
        .map(|b| {
            b.interface
                .inputs
                .iter()
                .map(|p| {
                    let key = crate::diagram::PortRef::new(b.id.clone(), p.name.clone());
                    match &d.phi_in[&key] {
                        Supplier::OuterInput(q) => Source::Outer(d.outer.input(q).expect("validated").0),
                        Supplier::InnerOutput(r) => {
                            let (k, p) = out_port(&r.box_id, &r.port);
                            Source::Inner(k, p)
                        }
                    }
                })
                .collect()
        })
        .collect();
    let reads = d
        .outer
        .outputs
        .iter()
        .map(|q| {
            let r = &d.phi_out[&q.name];
            out_port(&r.box_id, &r.port)
        })
        .collect();
    (sources, reads)
}

pub(crate) fn check_assignment<'a, T, F>(
    d: &WiringDiagram,
    assign: &'a BTreeMap<String, T>,
    interface_of: F,
) -> Result<Vec<&'a T>>
where
    F: Fn(&T) -> &Interface,
{
    d.validate().into_result()?;
    d.inner
        .iter()
        .map(|b| {
            let item = assign
                .get(&b.id)
                .ok_or_else(|| Error::MissingAssignment(b.id.clone()))?;
            if interface_of(item) != &b.interface {
                return Err(Error::InterfaceMismatch(format!(
                    "assignment for box `{}` has a different interface",
                    b.id
                )));
            }
            Ok(item)
        })
        .collect()
}

/// Composite machine of a wiring diagram.
///
/// States are tuples of component states in inner-box order; the composite
/// reads its outputs through `phi_out` and steps every component on inputs
/// resolved through `phi_in` from the outer input and the current inner
/// readouts.
pub fn apply_moore(
    d: &WiringDiagram,
    assign: &BTreeMap<String, MooreMachine>,
    limits: &Limits,
) -> Result<MooreMachine> {
    let machines = check_assignment(d, assign, MooreMachine::interface)?;
    d.outer.require_finite()?;
    for b in &d.inner {
        b.interface.require_finite()?;
    }

    let counts: Vec<usize> = machines.iter().map(|m| m.state_count()).collect();
    let total = valuation_count(&counts);
    let in_radices = d.outer.radices(Side::Input);
    let inputs = valuation_count(&in_radices);
    limits.guard(total.saturating_mul(inputs))?;
    let (total, inputs) = (total as usize, inputs as usize);
    let (sources, reads) = resolve_wiring(d);

    let rows = map_indices(limits, total, |s| {
        let comp = decode(&counts, s);
        let outs: Vec<&Valuation> = machines
            .iter()
            .zip(&comp)
            .map(|(m, &cs)| m.readout(cs))
            .collect();
        let readout: Valuation = reads.iter().map(|&(k, p)| outs[k][p]).collect();
        let mut next = Vec::with_capacity(inputs);
        let mut local = Vec::new();
        for i in 0..inputs {
            let v = decode(&in_radices, i);
            let succ: Vec<usize> = machines
                .iter()
                .enumerate()
                .map(|(j, m)| {
                    local.clear();
                    local.extend(sources[j].iter().map(|src| match *src {
                        Source::Outer(q) => v[q],
                        Source::Inner(k, p) => outs[k][p],
                    }));
                    m.next_state(comp[j], encode(m.input_radices(), &local))
                })
                .collect();
            next.push(encode(&counts, &succ));
        }
        (readout, next)
    });

    let labels = (0..total)
        .map(|s| {
            let comp = decode(&counts, s);
            let parts: Vec<&str> = machines
                .iter()
                .zip(&comp)
                .map(|(m, &cs)| m.states()[cs].as_str())
                .collect();
            format!("({})", parts.join(","))
        })
        .collect();
    let init = encode(&counts, &machines.iter().map(|m| m.init()).collect::<Vec<_>>());
    let mut readout = Vec::with_capacity(total);
    let mut update = Vec::with_capacity(total * inputs);
    for (r, n) in rows {
        readout.push(r);
        update.extend(n);
    }
    MooreMachine::new(d.outer.clone(), labels, init, readout, update)
}
