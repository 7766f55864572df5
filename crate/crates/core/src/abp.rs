//! Layer-by-layer basis maintenance for sets of products of linear forms.
//!
//! For polynomials `P_j = alpha_j L_{j,1} ... L_{j,L}` the full coefficient
//! matrix (degree-`q` monomials by polynomials) of the length-`q` prefixes is
//! exponentially tall, but its row space has dimension at most `m`. A
//! [`LayerBasis`] keeps at most `m` monomials whose rows span it, and
//! [`rs_advance`] moves from prefix length `q` to `q + 1`. After the last
//! layer the column dependencies of the small matrix are exactly the linear
//! dependencies among the polynomials.

use thiserror::Error;

use crate::field::{FieldElem, PrimeField};
use crate::linform::{max_indep_rows, IndepRows, LinForm};
use crate::oracle::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbpError {
    #[error("products must all have the same length")]
    LengthMismatch,
    #[error("linear forms must all be over {0} variables")]
    VariableMismatch(usize),
    #[error("at least one product is required")]
    Empty,
}

/// `m` path-shaped branching programs of a common length.
#[derive(Debug, Clone)]
pub struct ProductAbp {
    field: PrimeField,
    n: usize,
    scalars: Vec<FieldElem>,
    forms: Vec<Vec<LinForm>>,
}

impl ProductAbp {
    pub fn new(
        field: PrimeField,
        n: usize,
        products: Vec<(FieldElem, Vec<LinForm>)>,
    ) -> Result<Self, AbpError> {
        let len = products.first().ok_or(AbpError::Empty)?.1.len();
        if products.iter().any(|(_, f)| f.len() != len) {
            return Err(AbpError::LengthMismatch);
        }
        if products.iter().flat_map(|(_, f)| f).any(|l| l.num_vars() != n) {
            return Err(AbpError::VariableMismatch(n));
        }
        let (scalars, forms) = products.into_iter().unzip();
        Ok(Self {
            field,
            n,
            scalars,
            forms,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    /// Number of products `m`.
    pub fn count(&self) -> usize {
        self.scalars.len()
    }

    /// Common product length `L`.
    pub fn length(&self) -> usize {
        self.forms[0].len()
    }

    pub fn scalars(&self) -> &[FieldElem] {
        &self.scalars
    }

    /// Factor at 0-based position `q` of product `j`.
    pub fn form(&self, j: usize, q: usize) -> &LinForm {
        &self.forms[j][q]
    }

    /// The forms at 0-based position `q`, one per product.
    pub fn column(&self, q: usize) -> Vec<LinForm> {
        self.forms.iter().map(|f| f[q].clone()).collect()
    }
}

/// Representative degree-`q` monomials with their coefficient rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerBasis {
    monomials: Vec<Word>,
    /// `coeffs[i][j]`: coefficient of `monomials[i]` in the prefix of
    /// product `j`.
    coeffs: Vec<Vec<FieldElem>>,
}

impl LayerBasis {
    /// Layer 0: the empty monomial with the product scalars as its row.
    pub fn initial(scalars: &[FieldElem]) -> Self {
        Self {
            monomials: vec![Word::default()],
            coeffs: vec![scalars.to_vec()],
        }
    }

    pub fn monomials(&self) -> &[Word] {
        &self.monomials
    }

    pub fn coeffs(&self) -> &[Vec<FieldElem>] {
        &self.coeffs
    }

    pub fn size(&self) -> usize {
        self.monomials.len()
    }
}

/// Extends every basis monomial by every variable, weights the rows by the
/// next factor of each product, and keeps a leftmost row basis among the
/// candidates sorted by monomial.
pub fn rs_advance(field: PrimeField, b: &LayerBasis, forms: &[LinForm]) -> LayerBasis {
    let n = forms.first().map_or(0, LinForm::num_vars);
    let mut candidates: Vec<(Word, Vec<FieldElem>)> = Vec::with_capacity(b.size() * n);
    for (mono, row) in b.monomials.iter().zip(&b.coeffs) {
        for v in 0..n {
            let weighted: Vec<FieldElem> =
                row.iter().zip(forms).map(|(c, l)| *c * l.coeff(v)).collect();
            candidates.push((mono.concat(&Word(vec![v as u32])), weighted));
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0));
    let rows: Vec<Vec<FieldElem>> = candidates.iter().map(|(_, r)| r.clone()).collect();
    let keep = max_indep_rows(field, &rows).pivots;
    let mut monomials = Vec::with_capacity(keep.len());
    let mut coeffs = Vec::with_capacity(keep.len());
    for i in keep {
        let (w, r) = candidates[i].clone();
        monomials.push(w);
        coeffs.push(r);
    }
    LayerBasis { monomials, coeffs }
}

/// The basis after every layer, `0..=L`.
pub fn rs_layers(p: &ProductAbp) -> Vec<LayerBasis> {
    let mut layers = vec![LayerBasis::initial(&p.scalars)];
    for q in 0..p.length() {
        let next = rs_advance(p.field, layers.last().unwrap(), &p.column(q));
        layers.push(next);
    }
    layers
}

/// Leftmost maximal independent subset of the products, with every other
/// product expressed exactly over it.
pub fn rs_dependencies(p: &ProductAbp) -> IndepRows {
    let mut basis = LayerBasis::initial(&p.scalars);
    for q in 0..p.length() {
        basis = rs_advance(p.field, &basis, &p.column(q));
    }
    let m = p.count();
    let columns: Vec<Vec<FieldElem>> = (0..m)
        .map(|j| basis.coeffs.iter().map(|row| row[j]).collect())
        .collect();
    max_indep_rows(p.field, &columns)
}
