//! Contracts: relations of allowed input/output observations over an
//! interface, composed along wiring diagrams by pulling each box's relation
//! back along the wiring and projecting onto the outer interface.
//!
//! [`alpha`] sends a Moore machine to the trace contract of its behaviors at
//! a fixed horizon; [`check_naturality`] verifies that doing this before or
//! after composing along a diagram gives the same relation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::diagram::WiringDiagram;
use crate::error::{Error, Result};
use crate::exec::{checked_pow, Limits};
use crate::moore::{apply_moore, check_assignment, resolve_wiring, MooreMachine};
use crate::relation::{compose, Wiring};
use crate::types::{decode, valuation_count, Interface, Side, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Contract {
    interface: Interface,
    pairs: BTreeSet<(Valuation, Valuation)>,
}

impl Contract {
    pub fn new(interface: Interface, pairs: impl IntoIterator<Item = (Valuation, Valuation)>) -> Result<Self> {
        interface.require_finite()?;
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        for (i, o) in &pairs {
            interface
                .check_valuation(Side::Input, i)
                .and_then(|_| interface.check_valuation(Side::Output, o))
                .map_err(|e| Error::MalformedContract(e.to_string()))?;
        }
        Ok(Contract { interface, pairs })
    }

    /// Every pair satisfying `allowed`.
    pub fn from_predicate<F>(interface: Interface, allowed: F) -> Result<Self>
    where
        F: Fn(&[usize], &[usize]) -> bool,
    {
        interface.require_finite()?;
        let ri = interface.radices(Side::Input);
        let ro = interface.radices(Side::Output);
        let (ni, no) = (valuation_count(&ri), valuation_count(&ro));
        if ni.saturating_mul(no) > 1 << 24 {
            return Err(Error::ExplosionGuard {
                size: ni.saturating_mul(no),
                cap: 1 << 24,
            });
        }
        let mut pairs = BTreeSet::new();
        for a in 0..ni as usize {
            let i = decode(&ri, a);
            for b in 0..no as usize {
                let o = decode(&ro, b);
                if allowed(&i, &o) {
                    pairs.insert((i.clone(), o));
                }
            }
        }
        Ok(Contract { interface, pairs })
    }

    /// The contract that allows everything.
    pub fn full(interface: Interface) -> Result<Self> {
        Contract::from_predicate(interface, |_, _| true)
    }

    pub fn interface(&self) -> &Interface {
        &self.interface
    }

    pub fn pairs(&self) -> &BTreeSet<(Valuation, Valuation)> {
        &self.pairs
    }

    pub fn allows(&self, input: &[usize], output: &[usize]) -> bool {
        self.pairs.contains(&(input.to_vec(), output.to_vec()))
    }

    pub fn show_pair(&self, pair: &(Valuation, Valuation)) -> String {
        format!(
            "{} -> {}",
            self.interface.show(Side::Input, &pair.0),
            self.interface.show(Side::Output, &pair.1)
        )
    }
}

/// Contract over length-`horizon` input and output sequences (time-major).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TraceContract {
    interface: Interface,
    horizon: usize,
    pairs: BTreeSet<(Vec<Valuation>, Vec<Valuation>)>,
}

impl TraceContract {
    pub fn new(
        interface: Interface,
        horizon: usize,
        pairs: impl IntoIterator<Item = (Vec<Valuation>, Vec<Valuation>)>,
    ) -> Result<Self> {
        interface.require_finite()?;
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        for (i, o) in &pairs {
            if i.len() != horizon || o.len() != horizon {
                return Err(Error::HorizonMismatch {
                    expected: horizon,
                    found: if i.len() != horizon { i.len() } else { o.len() },
                });
            }
            for v in i {
                interface
                    .check_valuation(Side::Input, v)
                    .map_err(|e| Error::MalformedContract(e.to_string()))?;
            }
            for v in o {
                interface
                    .check_valuation(Side::Output, v)
                    .map_err(|e| Error::MalformedContract(e.to_string()))?;
            }
        }
        Ok(TraceContract {
            interface,
            horizon,
            pairs,
        })
    }

    pub fn interface(&self) -> &Interface {
        &self.interface
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn pairs(&self) -> &BTreeSet<(Vec<Valuation>, Vec<Valuation>)> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The pairs whose sequences are cut to their first `len` steps.
    pub fn prefixes(&self, len: usize) -> BTreeSet<(Vec<Valuation>, Vec<Valuation>)> {
        self.pairs
            .iter()
            .map(|(i, o)| (i[..len].to_vec(), o[..len].to_vec()))
            .collect()
    }

    pub fn show_pair(&self, pair: &(Vec<Valuation>, Vec<Valuation>)) -> String {
        let seq = |side: Side, s: &[Valuation]| {
            s.iter()
                .map(|v| self.interface.show(side, v))
                .collect::<Vec<_>>()
                .join("; ")
        };
        format!("[{}] -> [{}]", seq(Side::Input, &pair.0), seq(Side::Output, &pair.1))
    }
}

fn finite_boxes(d: &WiringDiagram) -> Result<()> {
    d.outer.require_finite()?;
    d.inner.iter().try_for_each(|b| b.interface.require_finite())
}

/// Composite contract of the assigned box contracts along `d`.
pub fn compose_contracts(
    d: &WiringDiagram,
    assign: &BTreeMap<String, Contract>,
    limits: &Limits,
) -> Result<Contract> {
    let contracts = check_assignment(d, assign, Contract::interface)?;
    finite_boxes(d)?;
    let (sources, reads) = resolve_wiring(d);
    let wiring = Wiring {
        sources: &sources,
        reads: &reads,
        outer_inputs: d.outer.inputs.len(),
    };
    let relations: Vec<Vec<_>> = contracts.iter().map(|c| c.pairs.iter().cloned().collect()).collect();
    let domains: Vec<Vec<usize>> = d
        .outer
        .radices(Side::Input)
        .into_iter()
        .map(|r| (0..r).collect())
        .collect();
    let pairs = compose(&wiring, &relations, &domains, limits)?;
    Ok(Contract {
        interface: d.outer.clone(),
        pairs,
    })
}

fn to_port_major(seq: &[Valuation], ports: usize) -> Vec<Vec<usize>> {
    (0..ports).map(|k| seq.iter().map(|v| v[k]).collect()).collect()
}

fn to_time_major(ports: &[Vec<usize>], horizon: usize) -> Vec<Valuation> {
    (0..horizon).map(|t| ports.iter().map(|p| p[t]).collect()).collect()
}

/// Composite of trace contracts, all at horizon `horizon`.
pub fn compose_trace_contracts(
    d: &WiringDiagram,
    assign: &BTreeMap<String, TraceContract>,
    horizon: usize,
    limits: &Limits,
) -> Result<TraceContract> {
    let contracts = check_assignment(d, assign, TraceContract::interface)?;
    finite_boxes(d)?;
    if let Some(c) = contracts.iter().find(|c| c.horizon != horizon) {
        return Err(Error::HorizonMismatch {
            expected: horizon,
            found: c.horizon,
        });
    }
    let (sources, reads) = resolve_wiring(d);
    let wiring = Wiring {
        sources: &sources,
        reads: &reads,
        outer_inputs: d.outer.inputs.len(),
    };
    let relations: Vec<Vec<_>> = contracts
        .iter()
        .map(|c| {
            let (ni, no) = (c.interface.inputs.len(), c.interface.outputs.len());
            c.pairs
                .iter()
                .map(|(i, o)| (to_port_major(i, ni), to_port_major(o, no)))
                .collect()
        })
        .collect();

    // Sequence domains are only materialized for outer inputs nobody reads.
    let mut consumed = vec![false; d.outer.inputs.len()];
    for s in sources.iter().flatten() {
        if let crate::moore::Source::Outer(q) = *s {
            consumed[q] = true;
        }
    }
    let radices = d.outer.radices(Side::Input);
    let sizes: Vec<usize> = radices
        .iter()
        .map(|&r| checked_pow(r as u128, horizon).min(usize::MAX as u128) as usize)
        .collect();
    let mut domains = Vec::with_capacity(radices.len());
    for (q, &r) in radices.iter().enumerate() {
        if consumed[q] {
            domains.push(Vec::new());
            continue;
        }
        limits.guard(sizes[q] as u128)?;
        let digits = vec![r; horizon];
        domains.push((0..sizes[q]).map(|i| decode(&digits, i)).collect());
    }
    let size = crate::relation::search_size(&wiring, &relations, &sizes);
    limits.guard(size)?;

    let pairs = compose(&wiring, &relations, &domains, limits)?
        .into_iter()
        .map(|(i, o)| (to_time_major(&i, horizon), to_time_major(&o, horizon)))
        .collect();
    Ok(TraceContract {
        interface: d.outer.clone(),
        horizon,
        pairs,
    })
}

/// A violating run: `inputs` drives the machine to output `output` at
/// `tick`, and `(inputs[tick], output)` is not allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub inputs: Vec<Valuation>,
    pub tick: usize,
    pub output: Valuation,
}

impl Counterexample {
    pub fn display<'a>(&'a self, interface: &'a Interface) -> impl fmt::Display + 'a {
        CounterexampleDisplay { cex: self, interface }
    }
}

struct CounterexampleDisplay<'a> {
    cex: &'a Counterexample,
    interface: &'a Interface,
}

impl fmt::Display for CounterexampleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let seq: Vec<String> = self
            .cex
            .inputs
            .iter()
            .map(|v| self.interface.show(Side::Input, v))
            .collect();
        write!(
            f,
            "inputs [{}] at t={}: output {}",
            seq.join("; "),
            self.cex.tick,
            self.interface.show(Side::Output, &self.cex.output)
        )
    }
}

/// Checks that every step of every run of length `h` is allowed by `r`.
///
/// Returns the violation with the lexicographically least input sequence,
/// then the least tick, or `None` when the machine satisfies the contract.
pub fn satisfies(m: &MooreMachine, r: &Contract, h: usize, limits: &Limits) -> Result<Option<Counterexample>> {
    if m.interface() != r.interface() {
        return Err(Error::InterfaceMismatch(
            "machine and contract have different interfaces".into(),
        ));
    }
    limits.guard(checked_pow(m.input_count() as u128, h))?;
    let radices = m.input_radices().to_vec();
    let mut path = Vec::with_capacity(h);
    Ok(violation(m, r, h, &radices, m.init(), &mut path))
}

fn violation(
    m: &MooreMachine,
    r: &Contract,
    h: usize,
    radices: &[usize],
    s: usize,
    path: &mut Vec<Valuation>,
) -> Option<Counterexample> {
    if path.len() == h {
        return None;
    }
    let y = m.readout(s);
    for i in 0..m.input_count() {
        let v = decode(radices, i);
        if !r.allows(&v, y) {
            let tick = path.len();
            let mut inputs = path.clone();
            inputs.push(v);
            inputs.resize(h, vec![0; radices.len()]);
            return Some(Counterexample {
                inputs,
                tick,
                output: y.clone(),
            });
        }
        path.push(v);
        let found = violation(m, r, h, radices, m.next_state(s, i), path);
        path.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// The trace contract of all behaviors of `m` at horizon `h`.
pub fn alpha(m: &MooreMachine, h: usize, limits: &Limits) -> Result<TraceContract> {
    let pairs = m
        .traces(h, limits)?
        .into_iter()
        .map(|t| (t.inputs, t.outputs));
    Ok(TraceContract {
        interface: m.interface().clone(),
        horizon: h,
        pairs: pairs.collect(),
    })
}

/// Least trace of `m` (at the contract's horizon) that `tc` does not allow.
pub fn satisfies_trace(
    m: &MooreMachine,
    tc: &TraceContract,
    limits: &Limits,
) -> Result<Option<(Vec<Valuation>, Vec<Valuation>)>> {
    if m.interface() != tc.interface() {
        return Err(Error::InterfaceMismatch(
            "machine and trace contract have different interfaces".into(),
        ));
    }
    let behaviors = alpha(m, tc.horizon, limits)?;
    Ok(behaviors.pairs.into_iter().find(|p| !tc.pairs.contains(p)))
}

/// Both legs of the naturality square and their symmetric difference.
#[derive(Debug, Clone)]
pub struct NaturalityReport {
    /// `alpha` of the composite machine.
    pub behavior_leg: TraceContract,
    /// Composite of the per-box `alpha` contracts.
    pub contract_leg: TraceContract,
    pub only_behavior: Vec<(Vec<Valuation>, Vec<Valuation>)>,
    pub only_contract: Vec<(Vec<Valuation>, Vec<Valuation>)>,
}

impl NaturalityReport {
    pub fn holds(&self) -> bool {
        self.only_behavior.is_empty() && self.only_contract.is_empty()
    }

    /// One line per discrepant pair, sorted.
    pub fn discrepancy_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .only_behavior
            .iter()
            .map(|p| format!("behavior-only {}", self.behavior_leg.show_pair(p)))
            .chain(
                self.only_contract
                    .iter()
                    .map(|p| format!("contract-only {}", self.contract_leg.show_pair(p))),
            )
            .collect();
        lines.sort();
        lines
    }
}

/// Computes `alpha(apply_moore(d))` and `compose(d, alpha per box)` and
/// compares them.
pub fn check_naturality(
    d: &WiringDiagram,
    assign: &BTreeMap<String, MooreMachine>,
    h: usize,
    limits: &Limits,
) -> Result<NaturalityReport> {
    let composite = apply_moore(d, assign, limits)?;
    let behavior_leg = alpha(&composite, h, limits)?;
    let per_box = assign
        .iter()
        .filter(|(id, _)| d.find_box(id).is_some())
        .map(|(id, m)| Ok((id.clone(), alpha(m, h, limits)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let contract_leg = compose_trace_contracts(d, &per_box, h, limits)?;
    let only_behavior = behavior_leg
        .pairs
        .difference(&contract_leg.pairs)
        .cloned()
        .collect();
    let only_contract = contract_leg
        .pairs
        .difference(&behavior_leg.pairs)
        .cloned()
        .collect();
    Ok(NaturalityReport {
        behavior_leg,
        contract_leg,
        only_behavior,
        only_contract,
    })
}
