//! Port value types, interfaces, and finite valuations.
//!
//! A valuation over finite-typed ports is a `Vec<usize>` holding one label
//! index per port, in declared port order. Valuations enumerate in
//! mixed-radix order with the first port most significant, which is also
//! lexicographic order on the index vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label indices, one per port, in port order.
pub type Valuation = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueType {
    Finite(Vec<String>),
    Real,
    RealVector(usize),
}

impl ValueType {
    pub fn finite<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ValueType::Finite(labels.into_iter().map(Into::into).collect())
    }

    /// Binary type with labels "0" and "1".
    pub fn bit() -> Self {
        ValueType::finite(["0", "1"])
    }

    pub fn labels(&self) -> Option<&[String]> {
        match self {
            ValueType::Finite(l) => Some(l),
            _ => None,
        }
    }

    /// Scalar width under the real packing; `None` for finite types.
    pub fn real_dim(&self) -> Option<usize> {
        match self {
            ValueType::Real => Some(1),
            ValueType::RealVector(d) => Some(*d),
            ValueType::Finite(_) => None,
        }
    }

    /// Describes the first violated invariant, if any.
    pub fn defect(&self) -> Option<String> {
        match self {
            ValueType::Finite(labels) => {
                if labels.is_empty() {
                    return Some("finite type has no labels".into());
                }
                for (i, l) in labels.iter().enumerate() {
                    if labels[..i].contains(l) {
                        return Some(format!("duplicate label `{l}`"));
                    }
                }
                None
            }
            ValueType::RealVector(0) => Some("real vector of dimension 0".into()),
            _ => None,
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Finite(l) => write!(f, "{{{}}}", l.join(",")),
            ValueType::Real => f.write_str("real"),
            ValueType::RealVector(d) => write!(f, "real^{d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Port {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ValueType,
}

impl Port {
    pub fn new(name: impl Into<String>, ty: ValueType) -> Self {
        Port {
            name: name.into(),
            ty,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interface {
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Input,
    Output,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Input => "input",
            Side::Output => "output",
        })
    }
}

impl Interface {
    pub fn new(inputs: Vec<Port>, outputs: Vec<Port>) -> Self {
        Interface { inputs, outputs }
    }

    pub fn empty() -> Self {
        Interface::default()
    }

    pub fn ports(&self, side: Side) -> &[Port] {
        match side {
            Side::Input => &self.inputs,
            Side::Output => &self.outputs,
        }
    }

    pub fn input(&self, name: &str) -> Option<(usize, &Port)> {
        self.inputs.iter().enumerate().find(|(_, p)| p.name == name)
    }

    pub fn output(&self, name: &str) -> Option<(usize, &Port)> {
        self.outputs.iter().enumerate().find(|(_, p)| p.name == name)
    }

    /// Concatenation of two interfaces (parallel juxtaposition).
    pub fn concat(&self, other: &Interface) -> Interface {
        let mut out = self.clone();
        out.inputs.extend(other.inputs.iter().cloned());
        out.outputs.extend(other.outputs.iter().cloned());
        out
    }

    pub fn require_finite(&self) -> Result<()> {
        for p in self.inputs.iter().chain(&self.outputs) {
            if p.ty.labels().is_none() {
                return Err(Error::NonFiniteType(p.name.clone()));
            }
        }
        Ok(())
    }

    pub fn require_real(&self) -> Result<()> {
        for p in self.inputs.iter().chain(&self.outputs) {
            if p.ty.real_dim().is_none() {
                return Err(Error::NonRealType(p.name.clone()));
            }
        }
        Ok(())
    }

    /// Label counts of finite ports (0 for non-finite ports).
    pub fn radices(&self, side: Side) -> Vec<usize> {
        self.ports(side)
            .iter()
            .map(|p| p.ty.labels().map_or(0, <[String]>::len))
            .collect()
    }

    /// Total packed width of the real ports on one side.
    pub fn real_width(&self, side: Side) -> usize {
        self.ports(side)
            .iter()
            .map(|p| p.ty.real_dim().unwrap_or(0))
            .sum()
    }

    /// Offsets of each port inside the packed real vector.
    pub fn real_offsets(&self, side: Side) -> Vec<usize> {
        let mut acc = 0;
        self.ports(side)
            .iter()
            .map(|p| {
                let at = acc;
                acc += p.ty.real_dim().unwrap_or(0);
                at
            })
            .collect()
    }

    /// Renders a finite valuation as `port=label,...`.
    pub fn show(&self, side: Side, v: &[usize]) -> String {
        self.ports(side)
            .iter()
            .zip(v)
            .map(|(p, &i)| match p.ty.labels() {
                Some(l) if i < l.len() => format!("{}={}", p.name, l[i]),
                _ => format!("{}=#{i}", p.name),
            })
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Checks that `v` is a total, in-range valuation of `side`.
    pub fn check_valuation(&self, side: Side, v: &[usize]) -> Result<()> {
        let radices = self.radices(side);
        if v.len() != radices.len() {
            return Err(Error::PartialInput(format!(
                "expected {} {side} values, got {}",
                radices.len(),
                v.len()
            )));
        }
        for ((p, &r), &x) in self.ports(side).iter().zip(&radices).zip(v) {
            if x >= r {
                return Err(Error::PartialInput(format!(
                    "value #{x} out of range for port `{}`",
                    p.name
                )));
            }
        }
        Ok(())
    }
}

/// Number of valuations of ports with the given label counts.
pub fn valuation_count(radices: &[usize]) -> u128 {
    radices
        .iter()
        .fold(1u128, |acc, &r| acc.saturating_mul(r as u128))
}

/// Mixed-radix index of `v`, first port most significant.
pub fn encode(radices: &[usize], v: &[usize]) -> usize {
    radices
        .iter()
        .zip(v)
        .fold(0usize, |acc, (&r, &x)| acc * r + x)
}

pub fn decode(radices: &[usize], mut idx: usize) -> Valuation {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = idx % r;
        idx /= r;
    }
    out
}
