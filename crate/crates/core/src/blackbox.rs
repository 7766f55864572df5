//! Randomized black-box tests that only evaluate the polynomial on matrices.
//!
//! [`blackbox_sps_test`] substitutes small upper-triangular "automaton"
//! matrices: the `(0, k)` entry of the result is a commutative polynomial in
//! the random point that is nonzero whenever some `k`-position projection of
//! the input is. [`lowdeg_bw_test`] substitutes uniformly random `d x d`
//! matrices, which suffices for degree at most `2d - 1`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError};
use crate::field::{seeded_rng, split_seed, FieldElem, PrimeField};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlackboxError {
    #[error("field F_{p} is too small: need p > {needed}")]
    FieldTooSmall { p: u64, needed: BigUint },
    #[error("fan-in bound must be at least 1")]
    FanIn,
    #[error("degree {degree} exceeds what {dim}x{dim} matrices detect ({})", 2 * dim - 1)]
    DimensionTooSmall { degree: u64, dim: usize },
    #[error("witness does not match the black box: {0}")]
    Witness(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Something that can be evaluated on square matrices.
pub trait BlackBox {
    fn field(&self) -> PrimeField;
    fn num_vars(&self) -> usize;
    /// Evaluates at one `dim x dim` matrix per variable.
    fn evaluate(&self, dim: usize, assign: &[Matrix]) -> Result<Matrix, BlackboxError>;
    /// Upper bound on the degree, when known.
    fn degree_bound(&self) -> Option<BigUint> {
        None
    }
}

impl BlackBox for Circuit {
    fn field(&self) -> PrimeField {
        Circuit::field(self)
    }

    fn num_vars(&self) -> usize {
        Circuit::num_vars(self)
    }

    fn evaluate(&self, dim: usize, assign: &[Matrix]) -> Result<Matrix, BlackboxError> {
        Ok(self.evaluate_matrix_dim(dim, assign)?)
    }

    fn degree_bound(&self) -> Option<BigUint> {
        Some(self.degree())
    }
}

/// A random point for the automaton substitution with `k + 1` states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomatonPoint {
    pub k: usize,
    /// One value per variable.
    pub z: Vec<FieldElem>,
    /// `xi[q]` weights a stay in state `q`; `k + 1` values.
    pub xi: Vec<FieldElem>,
    /// `x[i][q]` labels the move from state `q` to `q + 1` on variable `i`.
    pub x: Vec<Vec<FieldElem>>,
}

impl AutomatonPoint {
    pub fn sample<R: Rng + ?Sized>(field: PrimeField, n: usize, k: usize, rng: &mut R) -> Self {
        let z = (0..n).map(|_| field.sample(rng)).collect();
        let xi = (0..=k).map(|_| field.sample(rng)).collect();
        let x = (0..n)
            .map(|_| (0..k).map(|_| field.sample(rng)).collect())
            .collect();
        Self { k, z, xi, x }
    }

    pub fn num_vars(&self) -> usize {
        self.z.len()
    }
}

/// The transition matrix of each variable: `z_i * xi_q` on the diagonal,
/// `x_{i,q}` just above it.
pub fn build_automaton_matrices(field: PrimeField, pt: &AutomatonPoint) -> Vec<Matrix> {
    let k = pt.k;
    (0..pt.num_vars())
        .map(|i| {
            let mut m = Matrix::zeros(field, k + 1, k + 1);
            for q in 0..=k {
                m[(q, q)] = pt.z[i] * pt.xi[q];
            }
            for q in 1..=k {
                m[(q - 1, q)] = pt.x[i][q - 1];
            }
            m
        })
        .collect()
}

/// Everything needed to reproduce a nonzero evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Automaton {
        k: usize,
        seed: u64,
        z: Vec<u64>,
        xi: Vec<u64>,
        x: Vec<Vec<u64>>,
        row: usize,
        col: usize,
        value: u64,
    },
    Matrices {
        dim: usize,
        seed: u64,
        matrices: Vec<Vec<Vec<u64>>>,
        row: usize,
        col: usize,
        value: u64,
    },
}

impl Witness {
    fn assignment(&self, field: PrimeField) -> (usize, Vec<Matrix>) {
        match self {
            Witness::Automaton { k, z, xi, x, .. } => {
                let el = |v: &u64| field.elem(*v);
                let pt = AutomatonPoint {
                    k: *k,
                    z: z.iter().map(el).collect(),
                    xi: xi.iter().map(el).collect(),
                    x: x.iter().map(|r| r.iter().map(el).collect()).collect(),
                };
                (k + 1, build_automaton_matrices(field, &pt))
            }
            Witness::Matrices { dim, matrices, .. } => (
                *dim,
                matrices.iter().map(|m| Matrix::from_rows(field, m)).collect(),
            ),
        }
    }

    /// Re-evaluates the black box at the recorded point and returns the
    /// recorded entry, failing if it no longer matches.
    pub fn replay(&self, bb: &dyn BlackBox) -> Result<FieldElem, BlackboxError> {
        let field = bb.field();
        let (dim, assign) = self.assignment(field);
        if assign.len() != bb.num_vars() {
            return Err(BlackboxError::Witness(format!(
                "{} matrices for {} variables",
                assign.len(),
                bb.num_vars()
            )));
        }
        let out = bb.evaluate(dim, &assign)?;
        let (row, col, value) = match self {
            Witness::Automaton { row, col, value, .. } | Witness::Matrices { row, col, value, .. } => {
                (*row, *col, *value)
            }
        };
        let got = out[(row, col)];
        if got.value() != value || got.is_zero() {
            return Err(BlackboxError::Witness(format!(
                "entry ({row},{col}) is {} not {value}",
                got.value()
            )));
        }
        Ok(got)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Outcome {
    NonZero { witness: Witness },
    /// No nonzero evaluation found; `epsilon` bounds the chance that the
    /// polynomial is nonzero anyway.
    ProbablyZero { epsilon: f64 },
}

impl Outcome {
    pub fn is_nonzero(&self) -> bool {
        matches!(self, Outcome::NonZero { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestConfig {
    pub trials: usize,
    pub seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self { trials: 10, seed: 0 }
    }
}

fn values(v: &[FieldElem]) -> Vec<u64> {
    v.iter().map(FieldElem::value).collect()
}

/// Black-box test for sums of at most `s` products of linear forms of degree
/// at most `degree`.
///
/// Sweeps `k = 0 ..= min(s - 1, degree)`; for each `k` runs `cfg.trials`
/// independent points and inspects entry `(0, k)`. Requires `p > 4 * degree`
/// so that one trial at the right `k` errs with probability at most
/// `2 * degree / p <= 1/2`.
pub fn blackbox_sps_test(
    bb: &dyn BlackBox,
    s: usize,
    degree: &BigUint,
    cfg: &TestConfig,
) -> Result<Outcome, BlackboxError> {
    if s == 0 {
        return Err(BlackboxError::FanIn);
    }
    let field = bb.field();
    let p = field.modulus();
    let needed = degree * 4u32;
    if BigUint::from(p) <= needed {
        return Err(BlackboxError::FieldTooSmall { p, needed });
    }
    // p > 4D and p < 2^62 keep D in u64
    let d = degree.to_u64().expect("bounded by the modulus");
    let n = bb.num_vars();
    let kmax = (s - 1).min(d as usize);
    for k in 0..=kmax {
        let k_seed = split_seed(cfg.seed, k as u64);
        for trial in 0..cfg.trials {
            let seed = split_seed(k_seed, trial as u64);
            let pt = AutomatonPoint::sample(field, n, k, &mut seeded_rng(seed));
            let out = bb.evaluate(k + 1, &build_automaton_matrices(field, &pt))?;
            let v = out[(0, k)];
            if !v.is_zero() {
                return Ok(Outcome::NonZero {
                    witness: Witness::Automaton {
                        k,
                        seed,
                        z: values(&pt.z),
                        xi: values(&pt.xi),
                        x: pt.x.iter().map(|r| values(r)).collect(),
                        row: 0,
                        col: k,
                        value: v.value(),
                    },
                });
            }
        }
    }
    let eps = (2.0 * d as f64 / p as f64).powi(cfg.trials as i32);
    Ok(Outcome::ProbablyZero { epsilon: eps })
}

/// Evaluates at uniformly random `dim x dim` matrices. A nonzero polynomial
/// of degree at most `2 * dim - 1` survives each trial with probability at
/// least `1 - (2 * dim - 1) / p`.
pub fn lowdeg_bw_test(
    bb: &dyn BlackBox,
    dim: usize,
    cfg: &TestConfig,
) -> Result<Outcome, BlackboxError> {
    let field = bb.field();
    let p = field.modulus();
    if dim == 0 {
        return Err(BlackboxError::DimensionTooSmall { degree: 0, dim });
    }
    if (p as u128) < 4 * dim as u128 {
        return Err(BlackboxError::FieldTooSmall {
            p,
            needed: BigUint::from(4 * dim - 1),
        });
    }
    if let Some(deg) = bb.degree_bound() {
        if deg > BigUint::from(2 * dim - 1) {
            return Err(BlackboxError::DimensionTooSmall {
                degree: deg.to_u64().unwrap_or(u64::MAX),
                dim,
            });
        }
    }
    let n = bb.num_vars();
    for trial in 0..cfg.trials {
        let seed = split_seed(cfg.seed, trial as u64);
        let mut rng = seeded_rng(seed);
        let assign: Vec<Matrix> = (0..n).map(|_| Matrix::random(field, dim, dim, &mut rng)).collect();
        let out = bb.evaluate(dim, &assign)?;
        if let Some((row, col, v)) = out.first_nonzero() {
            return Ok(Outcome::NonZero {
                witness: Witness::Matrices {
                    dim,
                    seed,
                    matrices: assign.iter().map(Matrix::to_rows).collect(),
                    row,
                    col,
                    value: v.value(),
                },
            });
        }
    }
    let eps = ((2 * dim - 1) as f64 / p as f64).powi(cfg.trials as i32);
    Ok(Outcome::ProbablyZero { epsilon: eps })
}
