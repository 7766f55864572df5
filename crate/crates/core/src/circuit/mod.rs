//! Noncommutative arithmetic circuits: a DAG of binary `+` and `×` gates over
//! free variables and field constants.
//!
//! Gates are stored in topological order and referenced by index. Every gate
//! also carries the numeric label it had in its source file so that
//! diagnostics can point back at `g<k>`.

mod classify;
mod parse;

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::field::{FieldElem, PrimeField};
use crate::linform::LinForm;
use crate::matrix::Matrix;

pub use classify::{
    classify_plus_regular, classify_sps, PlusLayering, Rejection, SpsSummand, SpsView,
};
pub(crate) use classify::{analyze_regular, extract_products, linear_form_at};
pub use parse::{parse, parse_over, parse_with_default_field, serialize, ParseError};

/// Index of a gate inside [`Circuit::gates`].
pub type GateId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    /// A variable, 0-based (`x1` is `Input(0)`).
    Input(usize),
    Const(FieldElem),
    Add(GateId, GateId),
    /// Noncommutative product: left operand first.
    Mul(GateId, GateId),
}

impl Gate {
    pub fn children(&self) -> Option<(GateId, GateId)> {
        match *self {
            Gate::Add(a, b) | Gate::Mul(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn is_add(&self) -> bool {
        matches!(self, Gate::Add(..))
    }

    pub fn as_const(&self) -> Option<FieldElem> {
        match *self {
            Gate::Const(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("expected {expected} matrices, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("assignment matrices must be square of one common dimension")]
    Dimension,
    #[error("assignment is over a different field than the circuit")]
    FieldMismatch,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Circuit {
    field: PrimeField,
    n: usize,
    gates: Vec<Gate>,
    labels: Vec<u64>,
    output: GateId,
}

impl fmt::Debug for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self))
    }
}

impl Circuit {
    /// Assembles a circuit from parts, checking references and labels.
    ///
    /// Panics if a gate references itself or a later gate, if a variable is
    /// out of range, if a constant lives in another field, or if labels are
    /// not strictly increasing.
    pub fn from_parts(
        field: PrimeField,
        n: usize,
        gates: Vec<Gate>,
        labels: Vec<u64>,
        output: GateId,
    ) -> Self {
        assert_eq!(gates.len(), labels.len(), "one label per gate");
        assert!(output < gates.len(), "output gate out of range");
        for (i, g) in gates.iter().enumerate() {
            match *g {
                Gate::Input(v) => assert!(v < n, "variable x{} out of range", v + 1),
                Gate::Const(c) => assert_eq!(c.field(), field, "constant in wrong field"),
                Gate::Add(a, b) | Gate::Mul(a, b) => {
                    assert!(a < i && b < i, "gate {i} references a later gate")
                }
            }
        }
        assert!(labels.windows(2).all(|w| w[0] < w[1]), "labels must increase");
        Self {
            field,
            n,
            gates,
            labels,
            output,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: GateId) -> Gate {
        self.gates[id]
    }

    pub fn output(&self) -> GateId {
        self.output
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// The source-file label of a gate (`g<label>`).
    pub fn label(&self, id: GateId) -> u64 {
        self.labels[id]
    }

    pub fn size(&self) -> usize {
        self.gates.len()
    }

    /// Syntactic degree of every gate: inputs 1, constants 0, `×` adds and
    /// `+` takes the maximum.
    pub fn syntactic_degrees(&self) -> Vec<BigUint> {
        let mut deg: Vec<BigUint> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let d = match *g {
                Gate::Input(_) => BigUint::one(),
                Gate::Const(_) => BigUint::zero(),
                Gate::Add(a, b) => deg[a].clone().max(deg[b].clone()),
                Gate::Mul(a, b) => &deg[a] + &deg[b],
            };
            deg.push(d);
        }
        deg
    }

    /// Syntactic degree of the output gate.
    pub fn degree(&self) -> BigUint {
        self.syntactic_degrees().swap_remove(self.output)
    }

    /// Checks that every `+` gate adds two operands of equal degree, after
    /// constant folding. A folded zero constant may be added to anything.
    /// Returns the label of the first violating gate.
    pub fn check_homogeneous(&self) -> Result<(), u64> {
        let folded = self.fold();
        match folded.first_inhomogeneous() {
            None => Ok(()),
            Some(g) => Err(self.label(folded.origin[g])),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.check_homogeneous().is_ok()
    }

    /// Evaluates the circuit on square matrices, one per variable. Constants
    /// become scalar matrices.
    pub fn evaluate_matrix(&self, assign: &[Matrix]) -> Result<Matrix, CircuitError> {
        let dim = assign.first().map_or(1, Matrix::rows);
        self.evaluate_matrix_dim(dim, assign)
    }

    /// Like [`Circuit::evaluate_matrix`] with an explicit dimension, which
    /// matters when the circuit has no variables.
    pub fn evaluate_matrix_dim(&self, dim: usize, assign: &[Matrix]) -> Result<Matrix, CircuitError> {
        if assign.len() != self.n {
            return Err(CircuitError::ArityMismatch {
                expected: self.n,
                got: assign.len(),
            });
        }
        for m in assign {
            if m.rows() != dim || m.cols() != dim {
                return Err(CircuitError::Dimension);
            }
            if m.field() != self.field {
                return Err(CircuitError::FieldMismatch);
            }
        }
        let live = self.live_gates();
        let mut vals: Vec<Option<Matrix>> = vec![None; self.gates.len()];
        for (i, g) in self.gates.iter().enumerate() {
            if !live[i] {
                continue;
            }
            let v = match *g {
                Gate::Input(v) => assign[v].clone(),
                Gate::Const(c) => Matrix::scalar(self.field, dim, c),
                Gate::Add(a, b) => vals[a].as_ref().unwrap().add(vals[b].as_ref().unwrap()).unwrap(),
                Gate::Mul(a, b) => vals[a].as_ref().unwrap().mul(vals[b].as_ref().unwrap()).unwrap(),
            };
            vals[i] = Some(v);
        }
        Ok(vals[self.output].take().expect("output is live"))
    }

    /// Evaluates at scalars (the commutative image).
    pub fn evaluate(&self, point: &[FieldElem]) -> Result<FieldElem, CircuitError> {
        if point.len() != self.n {
            return Err(CircuitError::ArityMismatch {
                expected: self.n,
                got: point.len(),
            });
        }
        if point.iter().any(|e| e.field() != self.field) {
            return Err(CircuitError::FieldMismatch);
        }
        let mut vals: Vec<FieldElem> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let v = match *g {
                Gate::Input(v) => point[v],
                Gate::Const(c) => c,
                Gate::Add(a, b) => vals[a] + vals[b],
                Gate::Mul(a, b) => vals[a] * vals[b],
            };
            vals.push(v);
        }
        Ok(vals[self.output])
    }

    /// Gates reachable from the output.
    pub fn live_gates(&self) -> Vec<bool> {
        let mut live = vec![false; self.gates.len()];
        live[self.output] = true;
        for i in (0..self.gates.len()).rev() {
            if live[i] {
                if let Some((a, b)) = self.gates[i].children() {
                    live[a] = true;
                    live[b] = true;
                }
            }
        }
        live
    }

    /// Constant folding: degree-0 subcircuits become constants, products with
    /// a zero constant become zero, and unreachable gates are dropped.
    /// Additions of a zero constant are kept so that the `+` gate structure
    /// of the circuit is not disturbed.
    pub(crate) fn fold(&self) -> Folded {
        let live = self.live_gates();
        let mut value: Vec<Option<FieldElem>> = vec![None; self.gates.len()];
        for (i, g) in self.gates.iter().enumerate() {
            if !live[i] {
                continue;
            }
            value[i] = match *g {
                Gate::Input(_) => None,
                Gate::Const(c) => Some(c),
                Gate::Add(a, b) => match (value[a], value[b]) {
                    (Some(x), Some(y)) => Some(x + y),
                    _ => None,
                },
                Gate::Mul(a, b) => match (value[a], value[b]) {
                    (Some(x), Some(y)) => Some(x * y),
                    (Some(x), _) | (_, Some(x)) if x.is_zero() => Some(x),
                    _ => None,
                },
            };
        }
        // second pass: which gates survive once folded constants cut the DAG
        let mut keep = vec![false; self.gates.len()];
        keep[self.output] = true;
        for i in (0..self.gates.len()).rev() {
            if keep[i] && value[i].is_none() {
                if let Some((a, b)) = self.gates[i].children() {
                    keep[a] = true;
                    keep[b] = true;
                }
            }
        }
        let mut remap = vec![usize::MAX; self.gates.len()];
        let mut gates = Vec::new();
        let mut labels = Vec::new();
        let mut origin = Vec::new();
        for i in 0..self.gates.len() {
            if !keep[i] {
                continue;
            }
            let g = match (value[i], self.gates[i]) {
                (Some(c), _) => Gate::Const(c),
                (None, Gate::Add(a, b)) => Gate::Add(remap[a], remap[b]),
                (None, Gate::Mul(a, b)) => Gate::Mul(remap[a], remap[b]),
                (None, g) => g,
            };
            remap[i] = gates.len();
            gates.push(g);
            labels.push(self.labels[i]);
            origin.push(i);
        }
        let circuit = Circuit {
            field: self.field,
            n: self.n,
            output: remap[self.output],
            gates,
            labels,
        };
        let degrees = circuit.syntactic_degrees();
        Folded {
            circuit,
            degrees,
            origin,
        }
    }
}

/// A constant-folded circuit with its degrees and a map back to the gates of
/// the circuit it came from.
#[derive(Debug, Clone)]
pub(crate) struct Folded {
    pub circuit: Circuit,
    pub degrees: Vec<BigUint>,
    pub origin: Vec<GateId>,
}

impl Folded {
    pub fn is_zero_const(&self, g: GateId) -> bool {
        matches!(self.circuit.gates[g], Gate::Const(c) if c.is_zero())
    }

    /// First `+` gate whose nonzero operands differ in degree.
    pub fn first_inhomogeneous(&self) -> Option<GateId> {
        self.circuit.gates.iter().enumerate().find_map(|(i, g)| match *g {
            Gate::Add(a, b) => {
                let ok = self.is_zero_const(a)
                    || self.is_zero_const(b)
                    || self.degrees[a] == self.degrees[b];
                (!ok).then_some(i)
            }
            _ => None,
        })
    }

    pub fn output_const(&self) -> Option<FieldElem> {
        self.circuit.gates[self.circuit.output].as_const()
    }
}

/// Incremental construction of circuits; labels are assigned `1, 2, ...`.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    field: PrimeField,
    n: usize,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new(field: PrimeField, n: usize) -> Self {
        Self {
            field,
            n,
            gates: Vec::new(),
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn push(&mut self, g: Gate) -> GateId {
        self.gates.push(g);
        self.gates.len() - 1
    }

    /// Variable `x_{var+1}`.
    pub fn input(&mut self, var: usize) -> GateId {
        assert!(var < self.n, "variable out of range");
        self.push(Gate::Input(var))
    }

    pub fn constant(&mut self, c: FieldElem) -> GateId {
        assert_eq!(c.field(), self.field);
        self.push(Gate::Const(c))
    }

    pub fn constant_i64(&mut self, c: i64) -> GateId {
        let c = self.field.from_i64(c);
        self.push(Gate::Const(c))
    }

    pub fn add(&mut self, a: GateId, b: GateId) -> GateId {
        assert!(a < self.gates.len() && b < self.gates.len());
        self.push(Gate::Add(a, b))
    }

    pub fn mul(&mut self, a: GateId, b: GateId) -> GateId {
        assert!(a < self.gates.len() && b < self.gates.len());
        self.push(Gate::Mul(a, b))
    }

    /// `c * a` via a constant gate.
    pub fn scale(&mut self, c: FieldElem, a: GateId) -> GateId {
        let k = self.constant(c);
        self.mul(k, a)
    }

    /// `a - b` as `a + (-1) * b`.
    pub fn sub(&mut self, a: GateId, b: GateId) -> GateId {
        let minus = self.field.from_i64(-1);
        let nb = self.scale(minus, b);
        self.add(a, nb)
    }

    /// Left-to-right sum of a nonempty list.
    pub fn sum(&mut self, terms: &[GateId]) -> GateId {
        let (&first, rest) = terms.split_first().expect("nonempty sum");
        rest.iter().fold(first, |acc, &t| self.add(acc, t))
    }

    /// Left-to-right product of a nonempty list.
    pub fn product(&mut self, factors: &[GateId]) -> GateId {
        let (&first, rest) = factors.split_first().expect("nonempty product");
        rest.iter().fold(first, |acc, &t| self.mul(acc, t))
    }

    /// A homogeneous linear form as a `+`-tree of scaled inputs. The zero form
    /// becomes `x1 + (-1) * x1`.
    pub fn linear_form(&mut self, form: &LinForm) -> GateId {
        assert_eq!(form.num_vars(), self.n);
        let mut terms = Vec::new();
        for (v, &c) in form.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let x = self.input(v);
            terms.push(if c.is_one() { x } else { self.scale(c, x) });
        }
        if terms.is_empty() {
            let x = self.input(0);
            let y = self.input(0);
            return self.sub(x, y);
        }
        self.sum(&terms)
    }

    pub fn build(self, output: GateId) -> Circuit {
        let labels = (1..=self.gates.len() as u64).collect();
        Circuit::from_parts(self.field, self.n, self.gates, labels, output)
    }
}
