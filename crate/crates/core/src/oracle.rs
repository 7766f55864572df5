//! Explicit sparse noncommutative polynomials: the brute-force ground truth
//! behind every identity test in the crate.
//!
//! Besides budgeted circuit expansion this module hosts the position-wise
//! transformations used to reason about zeroness: invertible linear maps
//! applied at one position, set-multilinearization, and `I`-projections
//! (positions outside `I` become commutative), together with an exhaustive
//! search for isolating position sets.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::field::{FieldElem, PrimeField};
use crate::linform::LinForm;
use crate::matrix::Matrix;

pub const DEFAULT_MAX_TERMS: usize = 1 << 20;
pub const DEFAULT_MAX_DEGREE: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("more than {limit} terms in an intermediate polynomial")]
    TermBudget { limit: usize },
    #[error("syntactic degree {degree} exceeds the limit {limit}")]
    DegreeBudget { degree: String, limit: u64 },
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("position {position} outside 1..={degree}")]
    PositionOutOfRange { position: usize, degree: usize },
    #[error("linear map is singular")]
    SingularMap,
    #[error("linear map must be {n}x{n}")]
    MapShape { n: usize },
    #[error("products must be nonempty, of one length, with one scalar each")]
    ProductShape,
}

/// Expansion limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_terms: usize,
    pub max_degree: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_terms: DEFAULT_MAX_TERMS,
            max_degree: DEFAULT_MAX_DEGREE,
        }
    }
}

/// A monomial: 0-based variable indices in order. Ordered by length first,
/// then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_char(' ')?;
            }
            write!(f, "x{}", v + 1)?;
        }
        Ok(())
    }
}

/// A sparse polynomial in `n` noncommuting variables.
#[derive(Clone, PartialEq, Eq)]
pub struct NcPoly {
    field: PrimeField,
    n: usize,
    terms: BTreeMap<Word, FieldElem>,
}

impl fmt::Debug for NcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*{w}")?;
        }
        Ok(())
    }
}

impl NcPoly {
    pub fn zero(field: PrimeField, n: usize) -> Self {
        Self {
            field,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: PrimeField, n: usize, c: FieldElem) -> Self {
        let mut p = Self::zero(field, n);
        p.add_term(Word::default(), c);
        p
    }

    pub fn variable(field: PrimeField, n: usize, var: usize) -> Self {
        assert!(var < n);
        let mut p = Self::zero(field, n);
        p.add_term(Word(vec![var as u32]), field.one());
        p
    }

    pub fn from_terms(
        field: PrimeField,
        n: usize,
        terms: impl IntoIterator<Item = (Word, FieldElem)>,
    ) -> Self {
        let mut p = Self::zero(field, n);
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    /// The linear form `sum_i a_i x_i`.
    pub fn from_linear_form(form: &LinForm) -> Self {
        let field = form.coeffs().first().map(|c| c.field()).expect("nonempty form");
        let n = form.num_vars();
        Self::from_terms(
            field,
            n,
            form.coeffs()
                .iter()
                .enumerate()
                .map(|(i, &c)| (Word(vec![i as u32]), c)),
        )
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Word, FieldElem> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &Word) -> FieldElem {
        self.terms.get(w).copied().unwrap_or(self.field.zero())
    }

    /// Adds `c * w`, dropping the term if it cancels.
    pub fn add_term(&mut self, w: Word, c: FieldElem) {
        assert!(w.0.iter().all(|&v| (v as usize) < self.n), "variable out of range");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = *e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// Largest monomial length, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(Word::len)
    }

    /// The common degree of all monomials. The zero polynomial counts as
    /// homogeneous of every degree and yields `Some(None)`.
    pub fn homogeneous_degree(&self) -> Option<Option<usize>> {
        let lo = self.terms.keys().next().map(Word::len);
        let hi = self.degree();
        (lo == hi).then_some(hi)
    }

    pub fn add(&self, other: &NcPoly) -> NcPoly {
        let mut out = self.clone();
        for (w, &c) in &other.terms {
            out.add_term(w.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: FieldElem) -> NcPoly {
        if c.is_zero() {
            return NcPoly::zero(self.field, self.n);
        }
        NcPoly {
            terms: self.terms.iter().map(|(w, &a)| (w.clone(), a * c)).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &NcPoly) -> NcPoly {
        self.add(&other.scale(-self.field.one()))
    }

    /// Product with an intermediate term limit.
    pub fn mul_bounded(&self, other: &NcPoly, max_terms: usize) -> Result<NcPoly, OracleError> {
        let mut acc: HashMap<Word, FieldElem> = HashMap::new();
        for (u, &a) in &self.terms {
            for (v, &b) in &other.terms {
                *acc.entry(u.concat(v)).or_insert(self.field.zero()) += a * b;
                if acc.len() > max_terms {
                    return Err(OracleError::TermBudget { limit: max_terms });
                }
            }
        }
        Ok(NcPoly {
            field: self.field,
            n: self.n,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn mul(&self, other: &NcPoly) -> NcPoly {
        self.mul_bounded(other, usize::MAX).expect("unbounded")
    }

    /// Evaluates the commutative image at a scalar point.
    pub fn eval_commutative(&self, point: &[FieldElem]) -> FieldElem {
        self.terms.iter().fold(self.field.zero(), |acc, (w, &c)| {
            acc + w.0.iter().fold(c, |m, &v| m * point[v as usize])
        })
    }

    /// Evaluates at square matrices, one per variable.
    pub fn eval_matrix(&self, assign: &[Matrix]) -> Matrix {
        let dim = assign.first().map_or(1, Matrix::rows);
        let mut out = Matrix::zeros(self.field, dim, dim);
        for (w, &c) in &self.terms {
            let mut m = Matrix::scalar(self.field, dim, c);
            for &v in &w.0 {
                m = m.mul(&assign[v as usize]).expect("square matrices");
            }
            out = out.add(&m).expect("same shape");
        }
        out
    }

    /// One line `coeff: x_i1 x_i2 ...` per term, in word order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (w, c) in &self.terms {
            let _ = writeln!(s, "{c}: {w}");
        }
        s
    }

    fn require_homogeneous(&self) -> Result<usize, OracleError> {
        match self.homogeneous_degree() {
            Some(d) => Ok(d.unwrap_or(0)),
            None => Err(OracleError::NotHomogeneous),
        }
    }
}

/// Expands a circuit into an explicit polynomial, failing cleanly when a
/// gate's syntactic degree or term count exceeds the budget.
pub fn expand(c: &Circuit, budget: Budget) -> Result<NcPoly, OracleError> {
    let folded = c.fold();
    let fc = &folded.circuit;
    for d in &folded.degrees {
        if d.to_u64().map_or(true, |d| d > budget.max_degree) {
            return Err(OracleError::DegreeBudget {
                degree: d.to_string(),
                limit: budget.max_degree,
            });
        }
    }
    let (field, n) = (fc.field(), fc.num_vars());
    // remaining uses, so intermediate polynomials can be dropped early
    let mut uses = vec![0usize; fc.size()];
    for g in fc.gates() {
        if let Some((a, b)) = g.children() {
            uses[a] += 1;
            uses[b] += 1;
        }
    }
    let mut vals: Vec<Option<NcPoly>> = vec![None; fc.size()];
    for (i, g) in fc.gates().iter().enumerate() {
        let p = match *g {
            Gate::Input(v) => NcPoly::variable(field, n, v),
            Gate::Const(k) => NcPoly::constant(field, n, k),
            Gate::Add(a, b) => vals[a].as_ref().unwrap().add(vals[b].as_ref().unwrap()),
            Gate::Mul(a, b) => {
                let (pa, pb) = (vals[a].as_ref().unwrap(), vals[b].as_ref().unwrap());
                pa.mul_bounded(pb, budget.max_terms)?
            }
        };
        if p.num_terms() > budget.max_terms {
            return Err(OracleError::TermBudget {
                limit: budget.max_terms,
            });
        }
        if let Some((a, b)) = g.children() {
            for ch in [a, b] {
                uses[ch] -= 1;
                if uses[ch] == 0 {
                    vals[ch] = None;
                }
            }
        }
        vals[i] = Some(p);
    }
    Ok(vals[fc.output()].take().expect("output computed"))
}

/// Replaces the variable at position `j` (1-based) of every monomial by its
/// image `A(x_i) = sum_k A[i][k] x_k`.
pub fn apply_position_map(f: &NcPoly, j: usize, a: &Matrix) -> Result<NcPoly, OracleError> {
    let n = f.num_vars();
    if a.rows() != n || a.cols() != n {
        return Err(OracleError::MapShape { n });
    }
    let d = f.require_homogeneous()?;
    if j == 0 || (j > d && !f.is_zero()) {
        return Err(OracleError::PositionOutOfRange { position: j, degree: d });
    }
    if a.determinant().is_some_and(|det| det.is_zero()) {
        return Err(OracleError::SingularMap);
    }
    let mut out = NcPoly::zero(f.field(), n);
    for (w, &c) in f.terms() {
        let i = w.0[j - 1] as usize;
        for k in 0..n {
            let coeff = a[(i, k)];
            if coeff.is_zero() {
                continue;
            }
            let mut v = w.clone();
            v.0[j - 1] = k as u32;
            out.add_term(v, c * coeff);
        }
    }
    Ok(out)
}

/// Renames the variable `x_i` at position `j` to a fresh variable with
/// 0-based index `i * d + j`, giving a polynomial in `n * d` variables.
pub fn set_multilinearize(f: &NcPoly) -> Result<NcPoly, OracleError> {
    let d = f.require_homogeneous()?;
    let mut out = NcPoly::zero(f.field(), f.num_vars() * d);
    for (w, &c) in f.terms() {
        let renamed = w
            .0
            .iter()
            .enumerate()
            .map(|(j, &i)| i * d as u32 + j as u32)
            .collect();
        out.add_term(Word(renamed), c);
    }
    Ok(out)
}

/// Monomial of an `I`-projection: the variables at the positions of `I`,
/// in order, and the exponent vector of the commutative variables.
pub type ProjMonomial = (Vec<u32>, Vec<u32>);

/// A polynomial whose positions in `I` are noncommutative while all other
/// positions have been made commutative (`x_i -> z_i`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjPoly {
    field: PrimeField,
    n: usize,
    positions: Vec<usize>,
    terms: BTreeMap<ProjMonomial, FieldElem>,
}

impl ProjPoly {
    /// The sorted 1-based positions kept noncommutative.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn terms(&self) -> &BTreeMap<ProjMonomial, FieldElem> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Noncommutative part of a monomial as `(position, variable)` pairs.
    pub fn pairs(&self, m: &ProjMonomial) -> Vec<(usize, u32)> {
        self.positions.iter().copied().zip(m.0.iter().copied()).collect()
    }

    /// Evaluates with commutative values `z[i]` and, for the `t`-th position
    /// of `I`, `x[i][t]` in place of `x_i`.
    pub fn eval(&self, z: &[FieldElem], x: &[Vec<FieldElem>]) -> FieldElem {
        let mut acc = self.field.zero();
        for ((nc, exps), &c) in &self.terms {
            let mut m = c;
            for (t, &v) in nc.iter().enumerate() {
                m *= x[v as usize][t];
            }
            for (i, &e) in exps.iter().enumerate() {
                m *= z[i].pow(e as u64);
            }
            acc += m;
        }
        acc
    }
}

/// The `I`-projection of a homogeneous polynomial (positions 1-based).
pub fn project(f: &NcPoly, positions: &[usize]) -> Result<ProjPoly, OracleError> {
    let d = f.require_homogeneous()?;
    let mut positions = positions.to_vec();
    positions.sort_unstable();
    positions.dedup();
    if let Some(&bad) = positions.iter().find(|&&j| j == 0 || j > d) {
        return Err(OracleError::PositionOutOfRange { position: bad, degree: d });
    }
    let mut terms: BTreeMap<ProjMonomial, FieldElem> = BTreeMap::new();
    for (w, &c) in f.terms() {
        let mut exps = vec![0u32; f.num_vars()];
        let mut nc = Vec::with_capacity(positions.len());
        let mut next = positions.iter().peekable();
        for (j, &v) in w.0.iter().enumerate() {
            if next.peek() == Some(&&(j + 1)) {
                next.next();
                nc.push(v);
            } else {
                exps[v as usize] += 1;
            }
        }
        let e = terms.entry((nc, exps)).or_insert(f.field().zero());
        *e += c;
    }
    terms.retain(|_, c| !c.is_zero());
    Ok(ProjPoly {
        field: f.field(),
        n: f.num_vars(),
        positions,
        terms,
    })
}

/// `L_1 L_2 ... L_D` expanded.
pub fn product_poly(forms: &[LinForm], max_terms: usize) -> Result<NcPoly, OracleError> {
    let first = forms.first().ok_or(OracleError::ProductShape)?;
    let field = first.coeffs()[0].field();
    let mut p = NcPoly::constant(field, first.num_vars(), field.one());
    for l in forms {
        p = p.mul_bounded(&NcPoly::from_linear_form(l), max_terms)?;
        if p.num_terms() > max_terms {
            return Err(OracleError::TermBudget { limit: max_terms });
        }
    }
    Ok(p)
}

/// `sum_i beta_i P_i` for explicit products of equal length.
pub fn combination(
    products: &[Vec<LinForm>],
    beta: &[FieldElem],
    max_terms: usize,
) -> Result<NcPoly, OracleError> {
    if products.is_empty() || products.len() != beta.len() {
        return Err(OracleError::ProductShape);
    }
    let d = products[0].len();
    if products.iter().any(|p| p.len() != d || p.is_empty()) {
        return Err(OracleError::ProductShape);
    }
    let mut f: Option<NcPoly> = None;
    for (p, &b) in products.iter().zip(beta) {
        let term = product_poly(p, max_terms)?.scale(b);
        f = Some(match f {
            None => term,
            Some(acc) => acc.add(&term),
        });
        if f.as_ref().unwrap().num_terms() > max_terms {
            return Err(OracleError::TermBudget { limit: max_terms });
        }
    }
    Ok(f.unwrap())
}

/// Smallest position set `I` (by size, then lexicographically) such that
/// `sum beta_i P_i` is zero exactly when its `I`-projection is zero.
pub fn find_isolating_set(
    products: &[Vec<LinForm>],
    beta: &[FieldElem],
    max_terms: usize,
) -> Result<Vec<usize>, OracleError> {
    let f = combination(products, beta, max_terms)?;
    let d = products[0].len();
    if f.is_zero() {
        return Ok(Vec::new());
    }
    for size in 0..=d {
        for subset in subsets_of_size(d, size) {
            if !project(&f, &subset)?.is_zero() {
                return Ok(subset);
            }
        }
    }
    unreachable!("the full projection of a nonzero polynomial is nonzero")
}

/// All `size`-subsets of `1..=d` in lexicographic order.
pub fn subsets_of_size(d: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for j in start..=d {
            if d - j + 1 < left {
                break;
            }
            cur.push(j);
            rec(j + 1, d, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, d, size, &mut Vec::new(), &mut out);
    out
}
