//! Hierarchical models: boxes may be implemented by sub-diagrams with the
//! same outer interface. Flattening substitutes implementations bottom-up
//! and keeps a provenance trace from each leaf back to its ancestors.

use std::collections::BTreeMap;
use std::fmt;

use crate::contract::{compose_contracts, satisfies, satisfies_trace, Contract, TraceContract};
use crate::diagram::{substitute, WiringDiagram};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Limits};
use crate::lti::{apply_lti, markov_mismatch, LtiSystem};
use crate::moore::{apply_moore, first_divergence, MooreMachine};
use crate::types::{Interface, Valuation};

pub const MAX_DEPTH: usize = 32;

/// Leaf path (slash-joined box ids) to the paths of its refined ancestors,
/// outermost first.
pub type Provenance = BTreeMap<String, Vec<String>>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HierarchicalModel {
    pub diagram: WiringDiagram,
    pub children: BTreeMap<String, HierarchicalModel>,
    pub moore: BTreeMap<String, MooreMachine>,
    pub lti: BTreeMap<String, LtiSystem>,
    pub contracts: BTreeMap<String, Contract>,
    pub trace_contracts: BTreeMap<String, TraceContract>,
}

fn join(prefix: &str, id: &str) -> String {
    if prefix.is_empty() {
        id.to_string()
    } else {
        format!("{prefix}/{id}")
    }
}

/// Which behavior algebra a box or sub-tree is populated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algebra {
    Moore,
    Lti,
}

impl HierarchicalModel {
    pub fn new(diagram: WiringDiagram) -> Self {
        HierarchicalModel {
            diagram,
            ..Default::default()
        }
    }

    pub fn outer(&self) -> &Interface {
        &self.diagram.outer
    }

    /// Checks every level: diagrams validate, children and assignments match
    /// their boxes, depth stays within [`MAX_DEPTH`]. Errors carry the path.
    pub fn check(&self) -> Result<()> {
        self.check_at("", 1)
    }

    fn check_at(&self, prefix: &str, depth: usize) -> Result<()> {
        if depth > MAX_DEPTH {
            return Err(Error::DepthExceeded(MAX_DEPTH));
        }
        let report = self.diagram.validate();
        if !report.is_ok() {
            return Err(Error::InvalidDiagram(report));
        }
        let boxed = |id: &str| {
            self.diagram
                .find_box(id)
                .ok_or_else(|| Error::UnknownBox(join(prefix, id)))
        };
        fn matches(path: &str, want: &Interface, got: &Interface, what: &str) -> Result<()> {
            if want == got {
                Ok(())
            } else {
                Err(Error::InterfaceMismatch(format!(
                    "{path}: {what} interface differs from its box"
                )))
            }
        }
        for (id, child) in &self.children {
            let b = boxed(id)?;
            let path = join(prefix, id);
            matches(&path, &b.interface, child.outer(), "implementation")?;
            child.check_at(&path, depth + 1)?;
        }
        for (id, m) in &self.moore {
            matches(&join(prefix, id), &boxed(id)?.interface, m.interface(), "machine")?;
        }
        for (id, s) in &self.lti {
            matches(&join(prefix, id), &boxed(id)?.interface, s.interface(), "system")?;
        }
        for (id, c) in &self.contracts {
            matches(&join(prefix, id), &boxed(id)?.interface, c.interface(), "contract")?;
        }
        for (id, c) in &self.trace_contracts {
            matches(&join(prefix, id), &boxed(id)?.interface, c.interface(), "trace contract")?;
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        1 + self.children.values().map(Self::depth).max().unwrap_or(0)
    }

    /// Substitutes every implementation, innermost first.
    pub fn flatten(&self) -> Result<(WiringDiagram, Provenance)> {
        self.flatten_at("", 1)
    }

    fn flatten_at(&self, prefix: &str, depth: usize) -> Result<(WiringDiagram, Provenance)> {
        if depth > MAX_DEPTH {
            return Err(Error::DepthExceeded(MAX_DEPTH));
        }
        let mut flat = self.diagram.clone();
        let mut provenance = Provenance::new();
        for b in &self.diagram.inner {
            let Some(child) = self.children.get(&b.id) else {
                provenance.insert(b.id.clone(), Vec::new());
                continue;
            };
            let path = join(prefix, &b.id);
            let (sub, sub_prov) = child.flatten_at(&path, depth + 1)?;
            flat = substitute(&flat, &b.id, &sub).map_err(|e| e.at(&path))?;
            for (leaf, ancestors) in sub_prov {
                let mut chain = vec![b.id.clone()];
                chain.extend(ancestors.iter().map(|a| join(&b.id, a)));
                provenance.insert(join(&b.id, &leaf), chain);
            }
        }
        Ok((flat, provenance))
    }

    /// Flattened diagram with each leaf's assignment from `select`.
    pub fn flatten_with<T: Clone>(
        &self,
        select: fn(&HierarchicalModel) -> &BTreeMap<String, T>,
    ) -> Result<(WiringDiagram, BTreeMap<String, T>)> {
        let (flat, provenance) = self.flatten()?;
        let mut leaves = BTreeMap::new();
        for leaf in provenance.keys() {
            let (parent, id) = self.locate(leaf)?;
            let item = select(parent)
                .get(id)
                .ok_or_else(|| Error::MissingAssignment(leaf.clone()))?;
            leaves.insert(leaf.clone(), item.clone());
        }
        Ok((flat, leaves))
    }

    /// Splits a slash-separated box path into the chain of refined boxes to
    /// descend through and the final box id.
    ///
    /// Ids may themselves contain `/` (flattened models do); at each level a
    /// box whose id is the whole remaining path wins, otherwise the longest
    /// refined id that prefixes it is descended into.
    fn resolve<'a>(&self, path: &'a str) -> Result<(Vec<&'a str>, &'a str)> {
        let mut model = self;
        let mut rest = path;
        let mut trail = Vec::new();
        loop {
            if model.diagram.find_box(rest).is_some() {
                return Ok((trail, rest));
            }
            let next = model
                .children
                .iter()
                .filter(|(id, _)| {
                    rest.len() > id.len() && rest.starts_with(id.as_str()) && rest.as_bytes()[id.len()] == b'/'
                })
                .max_by_key(|(id, _)| id.len());
            let Some((id, child)) = next else {
                return Err(Error::UnknownBox(path.to_string()));
            };
            trail.push(&rest[..id.len()]);
            rest = &rest[id.len() + 1..];
            model = child;
        }
    }

    /// Parent model and box id of a slash-separated box path.
    pub fn locate<'a>(&'a self, path: &'a str) -> Result<(&'a HierarchicalModel, &'a str)> {
        let (trail, id) = self.resolve(path)?;
        let model = trail.iter().fold(self, |m, step| &m.children[*step]);
        Ok((model, id))
    }

    fn locate_mut(&mut self, path: &str) -> Result<(&mut HierarchicalModel, String)> {
        let (trail, id) = self.resolve(path)?;
        let id = id.to_string();
        let trail: Vec<String> = trail.into_iter().map(str::to_string).collect();
        let mut model = self;
        for step in &trail {
            model = model.children.get_mut(step).expect("resolved");
        }
        Ok((model, id))
    }

    /// The algebra every leaf of this model is assigned in, if uniform.
    pub fn leaf_algebra(&self) -> Option<Algebra> {
        let (_, provenance) = self.flatten().ok()?;
        let all = |alg: Algebra| {
            provenance.keys().all(|leaf| match self.locate(leaf) {
                Ok((parent, id)) => match alg {
                    Algebra::Moore => parent.moore.contains_key(id),
                    Algebra::Lti => parent.lti.contains_key(id),
                },
                Err(_) => false,
            })
        };
        if all(Algebra::Moore) {
            Some(Algebra::Moore)
        } else if all(Algebra::Lti) {
            Some(Algebra::Lti)
        } else {
            None
        }
    }

    /// Composite machine of the whole model.
    pub fn composite_moore(&self, limits: &Limits) -> Result<MooreMachine> {
        let (flat, leaves) = self.flatten_with(|m| &m.moore)?;
        apply_moore(&flat, &leaves, limits)
    }

    pub fn composite_lti(&self, eps: f64) -> Result<LtiSystem> {
        let (flat, leaves) = self.flatten_with(|m| &m.lti)?;
        apply_lti(&flat, &leaves, eps)
    }

    /// Behavior of the box at `path`: its implementation's composite when
    /// refined, otherwise its own machine.
    pub fn effective_moore(&self, path: &str, limits: &Limits) -> Result<MooreMachine> {
        let (parent, id) = self.locate(path)?;
        match parent.children.get(id) {
            Some(child) => child.composite_moore(limits),
            None => parent
                .moore
                .get(id)
                .cloned()
                .ok_or_else(|| Error::MissingAssignment(path.to_string())),
        }
    }

    /// Every box path in the tree, sorted.
    pub fn box_paths(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_paths("", &mut out);
        out.sort();
        out
    }

    fn collect_paths(&self, prefix: &str, out: &mut Vec<String>) {
        for b in &self.diagram.inner {
            let path = join(prefix, &b.id);
            if let Some(child) = self.children.get(&b.id) {
                child.collect_paths(&path, out);
            }
            out.push(path);
        }
    }

    /// Composite contract of the root diagram. Boxes use their own contract
    /// when they have one, otherwise the composite of their implementation.
    pub fn composite_contract(&self, limits: &Limits) -> Result<Contract> {
        self.composite_contract_at("", limits)
    }

    fn composite_contract_at(&self, prefix: &str, limits: &Limits) -> Result<Contract> {
        let mut assign = BTreeMap::new();
        for b in &self.diagram.inner {
            let path = join(prefix, &b.id);
            let c = match (self.contracts.get(&b.id), self.children.get(&b.id)) {
                (Some(c), _) => c.clone(),
                (None, Some(child)) => child.composite_contract_at(&path, limits)?,
                (None, None) => return Err(Error::MissingAssignment(path)),
            };
            assign.insert(b.id.clone(), c);
        }
        compose_contracts(&self.diagram, &assign, limits)
    }

    /// Replaces the Moore machine of the leaf at `path`.
    pub fn with_moore(&self, path: &str, machine: MooreMachine) -> Result<HierarchicalModel> {
        let mut model = self.clone();
        let (parent, id) = model.locate_mut(path)?;
        if parent.children.contains_key(&id) {
            return Err(Error::MissingAssignment(format!("{path} is refined, not a leaf")));
        }
        let b = parent.diagram.find_box(&id).expect("located");
        if &b.interface != machine.interface() {
            return Err(Error::InterfaceMismatch(format!("{path}: machine interface differs from its box")));
        }
        parent.moore.insert(id, machine);
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RefinementOutcome {
    Equivalent,
    /// Shortest, then least, input sequence on which the outputs differ.
    MooreCounterexample(Vec<Valuation>),
    /// Index of the first differing Markov parameter and the entry gap.
    MarkovMismatch { index: usize, gap: f64 },
}

impl RefinementOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, RefinementOutcome::Equivalent)
    }
}

fn refinement_parts<'a>(model: &'a HierarchicalModel, path: &'a str) -> Result<(&'a HierarchicalModel, &'a str, &'a HierarchicalModel)> {
    let (parent, id) = model.locate(path)?;
    let child = parent
        .children
        .get(id)
        .ok_or_else(|| Error::MissingAssignment(format!("{path} has no implementation")))?;
    Ok((parent, id, child))
}

/// Default Moore refinement horizon: product of the state counts plus one.
pub fn default_refinement_horizon(abstract_machine: &MooreMachine, implementation: &MooreMachine) -> usize {
    abstract_machine
        .state_count()
        .saturating_mul(implementation.state_count())
        .saturating_add(1)
}

/// Trace equivalence of the abstract machine at `path` and its implementation.
pub fn check_refinement_moore(
    model: &HierarchicalModel,
    path: &str,
    horizon: Option<usize>,
    limits: &Limits,
) -> Result<RefinementOutcome> {
    let (parent, id, child) = refinement_parts(model, path)?;
    let Some(abstract_machine) = parent.moore.get(id) else {
        if parent.lti.contains_key(id) {
            return Err(Error::MixedAlgebra(path.to_string()));
        }
        return Err(Error::MissingAssignment(path.to_string()));
    };
    if child.leaf_algebra() == Some(Algebra::Lti) {
        return Err(Error::MixedAlgebra(path.to_string()));
    }
    let implementation = child.composite_moore(limits)?;
    let h = horizon.unwrap_or_else(|| default_refinement_horizon(abstract_machine, &implementation));
    Ok(match first_divergence(abstract_machine, &implementation, h, limits)? {
        None => RefinementOutcome::Equivalent,
        Some(seq) => RefinementOutcome::MooreCounterexample(seq),
    })
}

/// Markov-parameter equivalence of the abstract system at `path` and its
/// implementation.
pub fn check_refinement_lti(model: &HierarchicalModel, path: &str, tol: f64, eps: f64) -> Result<RefinementOutcome> {
    let (parent, id, child) = refinement_parts(model, path)?;
    let Some(abstract_system) = parent.lti.get(id) else {
        if parent.moore.contains_key(id) {
            return Err(Error::MixedAlgebra(path.to_string()));
        }
        return Err(Error::MissingAssignment(path.to_string()));
    };
    if child.leaf_algebra() == Some(Algebra::Moore) {
        return Err(Error::MixedAlgebra(path.to_string()));
    }
    let implementation = child.composite_lti(eps)?;
    Ok(match markov_mismatch(abstract_system, &implementation, tol)? {
        None => RefinementOutcome::Equivalent,
        Some((index, gap)) => RefinementOutcome::MarkovMismatch { index, gap },
    })
}

/// Outcome of checking one stored contract.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Holds,
    Violated(String),
    Unavailable(String),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => f.write_str("holds"),
            Verdict::Violated(cex) => write!(f, "violated ({cex})"),
            Verdict::Unavailable(why) => write!(f, "unavailable ({why})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ContractKind {
    Step,
    Trace,
}

impl fmt::Display for ContractKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContractKind::Step => "contract",
            ContractKind::Trace => "trace-contract",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ContractCheck {
    pub path: String,
    pub kind: ContractKind,
    pub verdict: Verdict,
}

fn verdicts_at(model: &HierarchicalModel, path: &str, h: usize, limits: &Limits) -> Vec<ContractCheck> {
    let Ok((parent, id)) = model.locate(path) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let machine = || model.effective_moore(path, limits);
    if let Some(c) = parent.contracts.get(id) {
        let verdict = match machine().and_then(|m| satisfies(&m, c, h, limits)) {
            Ok(None) => Verdict::Holds,
            Ok(Some(cex)) => Verdict::Violated(cex.display(c.interface()).to_string()),
            Err(e) => Verdict::Unavailable(e.to_string()),
        };
        out.push(ContractCheck {
            path: path.to_string(),
            kind: ContractKind::Step,
            verdict,
        });
    }
    if let Some(tc) = parent.trace_contracts.get(id) {
        let verdict = match machine().and_then(|m| satisfies_trace(&m, tc, limits)) {
            Ok(None) => Verdict::Holds,
            Ok(Some(p)) => Verdict::Violated(format!("trace {} not allowed", tc.show_pair(&p))),
            Err(e) => Verdict::Unavailable(e.to_string()),
        };
        out.push(ContractCheck {
            path: path.to_string(),
            kind: ContractKind::Trace,
            verdict,
        });
    }
    out
}

/// Checks every stored contract against the behavior of its box.
/// Single-step contracts are checked over runs of length `h`; trace
/// contracts at their own horizon. Sorted by path.
pub fn check_contracts(model: &HierarchicalModel, h: usize, limits: &Limits) -> Vec<ContractCheck> {
    let paths = model.box_paths();
    let mut out: Vec<ContractCheck> = map_slice(limits, &paths, |p| verdicts_at(model, p, h, &Limits { parallel: false, ..*limits }))
        .into_iter()
        .flatten()
        .collect();
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Impact {
    pub path: String,
    pub kind: ContractKind,
    pub before: Verdict,
    pub after: Verdict,
}

impl fmt::Display for Impact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {} -> {}", self.path, self.kind, self.before, self.after)
    }
}

/// Ancestor paths of `path`, innermost last, including `path` itself.
fn lineage(path: &str) -> Vec<String> {
    let parts: Vec<&str> = path.split('/').collect();
    (1..=parts.len()).map(|n| parts[..n].join("/")).collect()
}

/// Contract verdicts at `path` and each of its ancestors that differ
/// between `before` and `after`. Sorted by path.
pub fn impact(
    before: &HierarchicalModel,
    after: &HierarchicalModel,
    path: &str,
    h: usize,
    limits: &Limits,
) -> Result<Vec<Impact>> {
    before.locate(path)?;
    let mut out = Vec::new();
    for p in lineage(path) {
        let old = verdicts_at(before, &p, h, limits);
        let new = verdicts_at(after, &p, h, limits);
        for (o, n) in old.into_iter().zip(new) {
            if o.verdict != n.verdict {
                out.push(Impact {
                    path: p.clone(),
                    kind: o.kind,
                    before: o.verdict,
                    after: n.verdict,
                });
            }
        }
    }
    out.sort_by(|a, b| (&a.path, a.kind).cmp(&(&b.path, b.kind)));
    Ok(out)
}

/// Replaces the leaf machine at `path` and reports which contracts on the
/// leaf or its ancestors change verdict.
pub fn propagate_change(
    model: &HierarchicalModel,
    path: &str,
    replacement: MooreMachine,
    h: usize,
    limits: &Limits,
) -> Result<Vec<Impact>> {
    let changed = model.with_moore(path, replacement)?;
    impact(model, &changed, path, h, limits)
}
