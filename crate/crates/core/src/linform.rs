//! Homogeneous linear forms, their scalar-multiple classes, and exact
//! leftmost row independence by Gaussian elimination.

use std::collections::HashMap;
use std::fmt;

use crate::field::{FieldElem, PrimeField};

/// A homogeneous linear form `sum_i a_i x_i` over `n` variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LinForm {
    coeffs: Vec<FieldElem>,
}

impl fmt::Debug for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.is_one() {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "{c}*x{}", i + 1)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl LinForm {
    pub fn new(coeffs: Vec<FieldElem>) -> Self {
        Self { coeffs }
    }

    pub fn zero(field: PrimeField, n: usize) -> Self {
        Self {
            coeffs: vec![field.zero(); n],
        }
    }

    /// The form `x_var` (0-based variable index).
    pub fn variable(field: PrimeField, n: usize, var: usize) -> Self {
        let mut f = Self::zero(field, n);
        f.coeffs[var] = field.one();
        f
    }

    pub fn from_u64(field: PrimeField, coeffs: &[u64]) -> Self {
        Self {
            coeffs: coeffs.iter().map(|&c| field.elem(c)).collect(),
        }
    }

    pub fn from_i64(field: PrimeField, coeffs: &[i64]) -> Self {
        Self {
            coeffs: coeffs.iter().map(|&c| field.from_i64(c)).collect(),
        }
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn coeff(&self, var: usize) -> FieldElem {
        self.coeffs[var]
    }

    pub fn num_vars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(FieldElem::is_zero)
    }

    pub fn scale(&self, c: FieldElem) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| *a * c).collect(),
        }
    }

    pub fn add(&self, other: &LinForm) -> Self {
        assert_eq!(self.num_vars(), other.num_vars(), "linear forms over different variable counts");
        Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a + *b).collect(),
        }
    }

    /// Splits the form as `scalar * canonical`, where the canonical form has
    /// its first nonzero coefficient equal to one. `None` for the zero form.
    pub fn canonicalize(&self) -> Option<(LinForm, FieldElem)> {
        let lead = *self.coeffs.iter().find(|c| !c.is_zero())?;
        let inv = lead.inv().expect("nonzero lead");
        Some((self.scale(inv), lead))
    }

    /// Evaluates the form at a point.
    pub fn eval(&self, point: &[FieldElem]) -> FieldElem {
        let field = self.coeffs[0].field();
        self.coeffs
            .iter()
            .zip(point)
            .fold(field.zero(), |acc, (a, x)| acc + *a * *x)
    }
}

/// Letters for the pairwise non-proportional forms in a collection.
///
/// Letter `a` stands for `canonical[a]`; original form `i` equals
/// `scalar * canonical[letter]`, or is zero (`None`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinAlphabet {
    canonical: Vec<LinForm>,
    map: Vec<Option<(u32, FieldElem)>>,
}

impl LinAlphabet {
    /// Assigns letters in first-occurrence order of the canonical forms.
    pub fn build(forms: &[LinForm]) -> Self {
        let mut canonical: Vec<LinForm> = Vec::new();
        let mut index: HashMap<LinForm, u32> = HashMap::new();
        let map = forms
            .iter()
            .map(|form| {
                let (canon, scalar) = form.canonicalize()?;
                let letter = *index.entry(canon.clone()).or_insert_with(|| {
                    canonical.push(canon);
                    (canonical.len() - 1) as u32
                });
                Some((letter, scalar))
            })
            .collect();
        Self { canonical, map }
    }

    /// Number of letters `r`.
    pub fn size(&self) -> usize {
        self.canonical.len()
    }

    pub fn letters(&self) -> &[LinForm] {
        &self.canonical
    }

    pub fn form(&self, letter: u32) -> &LinForm {
        &self.canonical[letter as usize]
    }

    /// `(letter, scalar)` for input form `i`, or `None` if it was zero.
    pub fn lookup(&self, i: usize) -> Option<(u32, FieldElem)> {
        self.map[i]
    }

    /// Indices of the input forms that were identically zero.
    pub fn zero_forms(&self) -> Vec<usize> {
        self.map
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.is_none().then_some(i))
            .collect()
    }
}

/// Outcome of [`max_indep_rows`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndepRows {
    /// Leftmost maximal independent subset of row indices, ascending.
    pub pivots: Vec<usize>,
    /// For each non-pivot row: its index and coefficients over `pivots`.
    pub expressions: Vec<(usize, Vec<FieldElem>)>,
}

impl IndepRows {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Coefficients expressing row `i` over the pivots, if it is dependent.
    pub fn expression_of(&self, i: usize) -> Option<&[FieldElem]> {
        self.expressions
            .iter()
            .find(|(j, _)| *j == i)
            .map(|(_, c)| c.as_slice())
    }
}

struct BasisVector {
    reduced: Vec<FieldElem>,
    pivot_col: usize,
    /// `reduced` as a combination of the original pivot rows.
    combo: Vec<FieldElem>,
}

/// Greedy leftmost maximal independent subset of `rows` (all of length
/// `width`), expressing every other row exactly over the chosen ones.
pub fn max_indep_rows(field: PrimeField, rows: &[Vec<FieldElem>]) -> IndepRows {
    let mut basis: Vec<BasisVector> = Vec::new();
    let mut pivots = Vec::new();
    let mut expressions = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut r = row.clone();
        // combination of pivot rows subtracted from `row` so far
        let mut taken = vec![field.zero(); pivots.len()];
        for b in &basis {
            let c = r[b.pivot_col];
            if c.is_zero() {
                continue;
            }
            for (x, y) in r.iter_mut().zip(&b.reduced) {
                *x -= c * *y;
            }
            for (t, y) in taken.iter_mut().zip(&b.combo) {
                *t += c * *y;
            }
        }
        match r.iter().position(|x| !x.is_zero()) {
            None => expressions.push((i, taken)),
            Some(col) => {
                let inv = r[col].inv().expect("nonzero pivot");
                let k = pivots.len();
                pivots.push(i);
                // reduced = (row - taken . pivots) / r[col]
                let mut combo: Vec<FieldElem> = taken.iter().map(|t| -*t * inv).collect();
                combo.push(inv);
                for b in &mut basis {
                    b.combo.push(field.zero());
                }
                let reduced = r.iter().map(|x| *x * inv).collect();
                basis.push(BasisVector {
                    reduced,
                    pivot_col: col,
                    combo,
                });
                debug_assert_eq!(basis[k].combo.len(), pivots.len());
            }
        }
    }
    // pad earlier expressions to the final pivot count
    let k = pivots.len();
    for (_, e) in &mut expressions {
        e.resize(k, field.zero());
    }
    IndepRows {
        pivots,
        expressions,
    }
}
