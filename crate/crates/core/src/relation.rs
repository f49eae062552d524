//! Existential composition of per-box input/output relations along a wiring
//! diagram. Shared by single-step and trace-level contracts, which differ
//! only in what a port value is (a label index, or a sequence of them).

use std::collections::BTreeSet;

use crate::error::Result;
use crate::exec::{map_slice, Limits};
use crate::moore::Source;

/// One allowed observation: input values then output values, per port.
pub(crate) type Pair<V> = (Vec<V>, Vec<V>);

pub(crate) struct Wiring<'a> {
    pub sources: &'a [Vec<Source>],
    pub reads: &'a [(usize, usize)],
    pub outer_inputs: usize,
}

struct Search<'a, V> {
    wiring: &'a Wiring<'a>,
    relations: &'a [Vec<Pair<V>>],
    /// Domains of outer inputs that no inner input consumes.
    free: Vec<(usize, &'a [V])>,
    /// For box `j`: checks `(box, input port, source box, output port)` that
    /// become decidable once boxes `0..=j` are chosen.
    checks: Vec<Vec<(usize, usize, usize, usize)>>,
}

impl<'a, V: Ord + Clone> Search<'a, V> {
    fn consistent(&self, j: usize, chosen: &[&Pair<V>]) -> bool {
        self.checks[j]
            .iter()
            .all(|&(b, k, src, p)| chosen[b].0[k] == chosen[src].1[p])
    }

    fn bind_outer(&self, j: usize, pair: &Pair<V>, outer: &mut [Option<V>], bound: &mut Vec<usize>) -> bool {
        for (k, s) in self.wiring.sources[j].iter().enumerate() {
            if let Source::Outer(q) = *s {
                match &outer[q] {
                    Some(v) if *v != pair.0[k] => return false,
                    Some(_) => {}
                    None => {
                        outer[q] = Some(pair.0[k].clone());
                        bound.push(q);
                    }
                }
            }
        }
        true
    }

    fn descend<'p>(
        &'p self,
        j: usize,
        chosen: &mut Vec<&'p Pair<V>>,
        outer: &mut Vec<Option<V>>,
        out: &mut BTreeSet<Pair<V>>,
    ) {
        if j == self.relations.len() {
            self.emit(chosen, outer, 0, out);
            return;
        }
        for pair in &self.relations[j] {
            chosen.push(pair);
            let mut bound = Vec::new();
            if self.consistent(j, chosen) && self.bind_outer(j, pair, outer, &mut bound) {
                self.descend(j + 1, chosen, outer, out);
            }
            for q in bound {
                outer[q] = None;
            }
            chosen.pop();
        }
    }

    fn emit(&self, chosen: &[&Pair<V>], outer: &mut Vec<Option<V>>, f: usize, out: &mut BTreeSet<Pair<V>>) {
        if f == self.free.len() {
            let inputs = outer.iter().map(|v| v.clone().expect("bound")).collect();
            let outputs = self
                .wiring
                .reads
                .iter()
                .map(|&(b, p)| chosen[b].1[p].clone())
                .collect();
            out.insert((inputs, outputs));
            return;
        }
        let (q, domain) = self.free[f];
        for v in domain {
            outer[q] = Some(v.clone());
            self.emit(chosen, outer, f + 1, out);
        }
        outer[q] = None;
    }
}

/// Size of the search space: product of relation sizes times the domains of
/// unconsumed outer inputs.
pub(crate) fn search_size<V>(wiring: &Wiring<'_>, relations: &[Vec<Pair<V>>], domain_sizes: &[usize]) -> u128 {
    let used = consumed(wiring);
    let mut size = relations
        .iter()
        .fold(1u128, |acc, r| acc.saturating_mul(r.len() as u128));
    for (q, &n) in domain_sizes.iter().enumerate() {
        if !used[q] {
            size = size.saturating_mul(n as u128);
        }
    }
    size
}

fn consumed(wiring: &Wiring<'_>) -> Vec<bool> {
    let mut used = vec![false; wiring.outer_inputs];
    for s in wiring.sources.iter().flatten() {
        if let Source::Outer(q) = *s {
            used[q] = true;
        }
    }
    used
}

/// All `(outer inputs, outer outputs)` for which some choice of one pair per
/// box agrees on every wire.
///
/// `domains[q]` lists the values of outer input `q`; it is only consulted
/// for outer inputs no box consumes.
pub(crate) fn compose<V>(
    wiring: &Wiring<'_>,
    relations: &[Vec<Pair<V>>],
    domains: &[Vec<V>],
    limits: &Limits,
) -> Result<BTreeSet<Pair<V>>>
where
    V: Ord + Clone + Send + Sync,
{
    let sizes: Vec<usize> = domains.iter().map(Vec::len).collect();
    limits.guard(search_size(wiring, relations, &sizes))?;

    let used = consumed(wiring);
    let free = (0..wiring.outer_inputs)
        .filter(|&q| !used[q])
        .map(|q| (q, domains[q].as_slice()))
        .collect();
    let n = relations.len();
    let mut checks = vec![Vec::new(); n];
    for (b, srcs) in wiring.sources.iter().enumerate() {
        for (k, s) in srcs.iter().enumerate() {
            if let Source::Inner(src, p) = *s {
                checks[b.max(src)].push((b, k, src, p));
            }
        }
    }
    let search = Search {
        wiring,
        relations,
        free,
        checks,
    };

    if n == 0 {
        let mut out = BTreeSet::new();
        search.emit(&[], &mut vec![None; wiring.outer_inputs], 0, &mut out);
        return Ok(out);
    }
    let parts = map_slice(limits, &relations[0], |first| {
        let mut out = BTreeSet::new();
        let mut chosen = vec![first];
        let mut outer = vec![None; wiring.outer_inputs];
        let mut bound = Vec::new();
        if search.consistent(0, &chosen) && search.bind_outer(0, first, &mut outer, &mut bound) {
            search.descend(1, &mut chosen, &mut outer, &mut out);
        }
        out
    });
    Ok(parts.into_iter().flatten().collect())
}
