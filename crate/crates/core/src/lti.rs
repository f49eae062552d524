//! Discrete-time LTI state-space systems and their wiring-diagram composite.
//!
//! Ports pack into one input and one output vector in declared port order,
//! `RealVector` ports taking contiguous blocks. Instantaneous feedback
//! through `D` terms is resolved by inverting `I - E_y D_d`; a pivot below
//! the tolerance is reported as an ill-posed loop.

use std::collections::BTreeMap;

use crate::diagram::WiringDiagram;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::moore::{check_assignment, resolve_wiring, Source};
use crate::types::{Interface, Side};

/// Default pivot tolerance for loop resolution.
pub const DEFAULT_PIVOT_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    interface: Interface,
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
}

impl LtiSystem {
    pub fn new(interface: Interface, a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        interface.require_real()?;
        let m = interface.real_width(Side::Input);
        let p = interface.real_width(Side::Output);
        let n = a.rows();
        let want = [
            ("A", a.shape(), (n, n)),
            ("B", b.shape(), (n, m)),
            ("C", c.shape(), (p, n)),
            ("D", d.shape(), (p, m)),
        ];
        for (name, got, expected) in want {
            if got != expected {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {}x{}",
                    got.0, got.1, expected.0, expected.1
                )));
            }
        }
        Ok(LtiSystem { interface, a, b, c, d })
    }

    /// Memoryless system `y = D u`.
    pub fn static_gain(interface: Interface, d: Matrix) -> Result<Self> {
        let m = interface.real_width(Side::Input);
        let p = interface.real_width(Side::Output);
        LtiSystem::new(
            interface,
            Matrix::zeros(0, 0),
            Matrix::zeros(0, m),
            Matrix::zeros(p, 0),
            d,
        )
    }

    pub fn interface(&self) -> &Interface {
        &self.interface
    }

    pub fn order(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.rows()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn d(&self) -> &Matrix {
        &self.d
    }

    /// The same system in coordinates `z = T x`.
    pub fn transformed(&self, t: &Matrix, eps: f64) -> Result<Self> {
        let t_inv = t
            .inverse(eps)
            .map_err(|_| Error::DimensionMismatch("singular similarity transform".into()))?;
        LtiSystem::new(
            self.interface.clone(),
            &(t * &self.a) * &t_inv,
            t * &self.b,
            &self.c * &t_inv,
            self.d.clone(),
        )
    }

    /// Runs `x+ = A x + B u`, `y = C x + D u` and returns the outputs.
    pub fn simulate(&self, x0: &[f64], inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if x0.len() != self.order() {
            return Err(Error::DimensionMismatch(format!(
                "initial state has {} entries, expected {}",
                x0.len(),
                self.order()
            )));
        }
        let mut x = x0.to_vec();
        let mut out = Vec::with_capacity(inputs.len());
        for (t, u) in inputs.iter().enumerate() {
            if u.len() != self.input_dim() {
                return Err(Error::DimensionMismatch(format!(
                    "input {t} has {} entries, expected {}",
                    u.len(),
                    self.input_dim()
                )));
            }
            let y: Vec<f64> = self
                .c
                .mul_vec(&x)
                .iter()
                .zip(self.d.mul_vec(u))
                .map(|(a, b)| a + b)
                .collect();
            x = self
                .a
                .mul_vec(&x)
                .iter()
                .zip(self.b.mul_vec(u))
                .map(|(a, b)| a + b)
                .collect();
            out.push(y);
        }
        Ok(out)
    }

    /// `[D, CB, CAB, ..., C A^(count-2) B]`.
    pub fn markov_parameters(&self, count: usize) -> Vec<Matrix> {
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        out.push(self.d.clone());
        let mut ab = self.b.clone();
        for _ in 1..count {
            out.push(&self.c * &ab);
            ab = &self.a * &ab;
        }
        out
    }
}

/// Index and size of the first Markov parameter on which two systems differ
/// by more than `tol`, comparing `n1 + n2 + 1` parameters.
pub fn markov_mismatch(s1: &LtiSystem, s2: &LtiSystem, tol: f64) -> Result<Option<(usize, f64)>> {
    if s1.interface != s2.interface {
        return Err(Error::InterfaceMismatch(
            "systems have different interfaces".into(),
        ));
    }
    let count = s1.order() + s2.order() + 1;
    let m1 = s1.markov_parameters(count);
    let m2 = s2.markov_parameters(count);
    Ok(m1
        .iter()
        .zip(&m2)
        .enumerate()
        .map(|(i, (a, b))| (i, a.max_abs_diff(b)))
        .find(|&(_, diff)| diff > tol))
}

/// Input/output equivalence by Markov parameters.
pub fn lti_equivalent(s1: &LtiSystem, s2: &LtiSystem, tol: f64) -> Result<bool> {
    markov_mismatch(s1, s2, tol).map(|m| m.is_none())
}

/// Interconnection of the assigned systems along `d`.
pub fn apply_lti(d: &WiringDiagram, assign: &BTreeMap<String, LtiSystem>, eps: f64) -> Result<LtiSystem> {
    let systems = check_assignment(d, assign, LtiSystem::interface)?;
    d.outer.require_real()?;
    for b in &d.inner {
        b.interface.require_real()?;
    }

    let (sources, reads) = resolve_wiring(d);
    let in_off: Vec<Vec<usize>> = d.inner.iter().map(|b| b.interface.real_offsets(Side::Input)).collect();
    let out_off: Vec<Vec<usize>> = d.inner.iter().map(|b| b.interface.real_offsets(Side::Output)).collect();
    let outer_in_off = d.outer.real_offsets(Side::Input);

    let mut in_base = Vec::with_capacity(systems.len());
    let mut out_base = Vec::with_capacity(systems.len());
    let (mut md, mut pd) = (0, 0);
    for s in &systems {
        in_base.push(md);
        out_base.push(pd);
        md += s.input_dim();
        pd += s.output_dim();
    }
    let m = d.outer.real_width(Side::Input);
    let p = d.outer.real_width(Side::Output);

    let mut e_y = Matrix::zeros(md, pd);
    let mut e_v = Matrix::zeros(md, m);
    for (j, b) in d.inner.iter().enumerate() {
        for (k, port) in b.interface.inputs.iter().enumerate() {
            let row = in_base[j] + in_off[j][k];
            let width = port.ty.real_dim().unwrap_or(0);
            for w in 0..width {
                match sources[j][k] {
                    Source::Outer(q) => e_v.set(row + w, outer_in_off[q] + w, 1.0),
                    Source::Inner(src, op) => e_y.set(row + w, out_base[src] + out_off[src][op] + w, 1.0),
                }
            }
        }
    }
    let mut f = Matrix::zeros(p, pd);
    let outer_out_off = d.outer.real_offsets(Side::Output);
    for (q, port) in d.outer.outputs.iter().enumerate() {
        let (src, op) = reads[q];
        for w in 0..port.ty.real_dim().unwrap_or(0) {
            f.set(outer_out_off[q] + w, out_base[src] + out_off[src][op] + w, 1.0);
        }
    }

    let a_d = Matrix::block_diag(&systems.iter().map(|s| &s.a).collect::<Vec<_>>());
    let b_d = Matrix::block_diag(&systems.iter().map(|s| &s.b).collect::<Vec<_>>());
    let c_d = Matrix::block_diag(&systems.iter().map(|s| &s.c).collect::<Vec<_>>());
    let d_d = Matrix::block_diag(&systems.iter().map(|s| &s.d).collect::<Vec<_>>());

    let loop_matrix = &Matrix::identity(md) - &(&e_y * &d_d);
    let resolve = loop_matrix
        .inverse(eps)
        .map_err(|pivot| Error::IllPosedLoop { pivot, eps })?;

    let feedback = &(&resolve * &e_y) * &c_d;
    let feedthrough = &resolve * &e_v;
    let a = &a_d + &(&b_d * &feedback);
    let b = &b_d * &feedthrough;
    let c = &f * &(&c_d + &(&d_d * &feedback));
    let dd = &(&f * &d_d) * &feedthrough;
    LtiSystem::new(d.outer.clone(), a, b, c, dd)
}
