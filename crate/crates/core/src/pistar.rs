//! Linear independence of products of linear forms given as compressed words.
//!
//! A [`SigmaProduct`] is `alpha * L_1 L_2 ... L_D` where the sequence of
//! linear forms is a straight-line program over the letters of a
//! [`LinAlphabet`]. Two nonzero products are proportional exactly when their
//! words coincide, and products that are dependent with each other can only
//! disagree at a few positions. [`max_lin_indep`] uses both facts to find a
//! leftmost maximal independent subset and express the rest.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::abp::{rs_dependencies, AbpError, ProductAbp};
use crate::field::{FieldElem, PrimeField};
use crate::linform::{LinAlphabet, LinForm};
use crate::slp::{FingerprintKey, Mismatches, Slp, SlpArena, SlpBuilder, SlpError, WordComparer};

/// `scalar * L_1 ... L_D` with the forms spelled by `word`.
#[derive(Debug, Clone)]
pub struct SigmaProduct {
    scalar: FieldElem,
    degree: u64,
    /// `None` when some factor is the zero form.
    word: Option<Slp>,
    alphabet: Arc<LinAlphabet>,
}

impl SigmaProduct {
    pub fn new(scalar: FieldElem, word: Slp, alphabet: Arc<LinAlphabet>) -> Self {
        assert_eq!(word.alphabet() as usize, alphabet.size(), "word over another alphabet");
        Self {
            scalar,
            degree: word.len(),
            word: Some(word),
            alphabet,
        }
    }

    /// The zero polynomial, recorded with the syntactic degree it came from.
    pub fn zero(field: PrimeField, degree: u64, alphabet: Arc<LinAlphabet>) -> Self {
        Self {
            scalar: field.zero(),
            degree,
            word: None,
            alphabet,
        }
    }

    /// Products given by explicit factor lists, sharing one alphabet and one
    /// word arena. Every list must be nonempty and over `n` variables.
    pub fn batch_from_forms(
        field: PrimeField,
        products: &[(FieldElem, Vec<LinForm>)],
    ) -> Result<Vec<SigmaProduct>, SlpError> {
        let all: Vec<LinForm> = products.iter().flat_map(|(_, f)| f.iter().cloned()).collect();
        let alphabet = Arc::new(LinAlphabet::build(&all));
        let mut builder = SlpBuilder::new(alphabet.size().max(1) as u32);
        let mut roots = Vec::new();
        let mut offset = 0;
        for (scalar, forms) in products {
            assert!(!forms.is_empty(), "empty product");
            let mut letters = Vec::with_capacity(forms.len());
            let mut scalar = *scalar;
            let mut zero = false;
            for i in offset..offset + forms.len() {
                match alphabet.lookup(i) {
                    Some((a, c)) => {
                        letters.push(a);
                        scalar *= c;
                    }
                    None => zero = true,
                }
            }
            offset += forms.len();
            roots.push(if zero {
                Err(forms.len() as u64)
            } else {
                Ok((scalar, builder.word(&letters)?))
            });
        }
        let arena = builder.finish();
        Ok(roots
            .into_iter()
            .map(|r| match r {
                Ok((scalar, root)) if alphabet.size() > 0 => {
                    SigmaProduct::new(scalar, Slp::new(arena.clone(), root), alphabet.clone())
                }
                Ok((_, root)) => SigmaProduct::zero(field, arena.len_of(root), alphabet.clone()),
                Err(d) => SigmaProduct::zero(field, d, alphabet.clone()),
            })
            .collect())
    }

    pub fn scalar(&self) -> FieldElem {
        self.scalar
    }

    pub fn field(&self) -> PrimeField {
        self.scalar.field()
    }

    /// Number of linear-form factors.
    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn word(&self) -> Option<&Slp> {
        self.word.as_ref()
    }

    pub fn alphabet(&self) -> &Arc<LinAlphabet> {
        &self.alphabet
    }

    pub fn is_zero(&self) -> bool {
        self.scalar.is_zero() || self.word.is_none()
    }

    /// The same product with its scalar multiplied by `c`.
    pub fn scaled(&self, c: FieldElem) -> Self {
        Self {
            scalar: self.scalar * c,
            ..self.clone()
        }
    }

    /// Canonical factor list, if the product is nonzero and at most `limit`
    /// long.
    pub fn forms(&self, limit: u64) -> Option<Result<Vec<LinForm>, SlpError>> {
        let word = self.word.as_ref()?;
        Some(word.to_letters(limit).map(|letters| {
            letters.iter().map(|&a| self.alphabet.form(a).clone()).collect()
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PistarError {
    #[error("products are over different alphabets")]
    AlphabetMismatch,
    #[error("{needed} mismatch positions exceed the limit {limit}")]
    TooManyPositions { needed: usize, limit: usize },
    #[error(transparent)]
    Word(#[from] SlpError),
    #[error(transparent)]
    Abp(#[from] AbpError),
}

/// Tuning of [`max_lin_indep`].
#[derive(Debug, Clone)]
pub struct PistarConfig {
    /// The constant `c` in the mismatch bound `c * l^4` and the position
    /// bound `c * l^5`, where `l` is the number of distinct products.
    pub c_const: u64,
    pub comparer: WordComparer,
    /// Hard cap on the number of retained positions.
    pub max_positions: usize,
    /// Re-key all words with fingerprint points drawn from this seed.
    pub fingerprint_seed: Option<u64>,
}

impl Default for PistarConfig {
    fn default() -> Self {
        Self {
            c_const: 4,
            comparer: WordComparer::default(),
            max_positions: 1 << 12,
            fingerprint_seed: None,
        }
    }
}

/// Products that are scalar multiples of a representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarClass {
    pub representative: usize,
    /// `(index, ratio)` with `P_index = ratio * P_representative`; the
    /// representative itself is listed first with ratio one.
    pub members: Vec<(usize, FieldElem)>,
}

/// Outcome of [`max_lin_indep`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndepResult {
    /// Leftmost maximal independent subset, ascending.
    pub independent: Vec<usize>,
    /// Every other index with its coefficients over `independent`.
    pub dependent: Vec<(usize, Vec<FieldElem>)>,
    /// True when every word comparison was done by full expansion.
    pub exact: bool,
}

impl IndepResult {
    pub fn expression_of(&self, i: usize) -> Option<&[FieldElem]> {
        self.dependent
            .iter()
            .find(|(j, _)| *j == i)
            .map(|(_, c)| c.as_slice())
    }
}

fn check_alphabets(ps: &[SigmaProduct]) -> Result<(), PistarError> {
    let Some(first) = ps.first() else { return Ok(()) };
    for p in ps {
        if !Arc::ptr_eq(p.alphabet(), first.alphabet()) && **p.alphabet() != **first.alphabet() {
            return Err(PistarError::AlphabetMismatch);
        }
    }
    Ok(())
}

/// Groups the nonzero products into classes of scalar multiples: equal
/// degree and equal words. Zero products belong to no class.
pub fn scalar_classes(
    ps: &[SigmaProduct],
    comparer: &WordComparer,
) -> Result<Vec<ScalarClass>, PistarError> {
    check_alphabets(ps)?;
    let mut classes: Vec<ScalarClass> = Vec::new();
    'next: for (i, p) in ps.iter().enumerate() {
        let Some(w) = p.word().filter(|_| !p.is_zero()) else { continue };
        for class in &mut classes {
            let rep = &ps[class.representative];
            if rep.degree() != p.degree() {
                continue;
            }
            if comparer.equals(rep.word().unwrap(), w)?.is_equal() {
                let ratio = p.scalar() * rep.scalar().inv().expect("nonzero representative");
                class.members.push((i, ratio));
                continue 'next;
            }
        }
        classes.push(ScalarClass {
            representative: i,
            members: vec![(i, p.field().one())],
        });
    }
    Ok(classes)
}

/// The factors of `p` at the given 1-based positions, in order, with the
/// product's scalar.
pub fn restrict_to_positions(
    p: &SigmaProduct,
    positions: &[u64],
    cap: usize,
) -> Result<(FieldElem, Vec<LinForm>), PistarError> {
    if positions.len() > cap {
        return Err(PistarError::TooManyPositions {
            needed: positions.len(),
            limit: cap,
        });
    }
    let Some(word) = p.word() else {
        let n = p.alphabet().letters().first().map_or(0, LinForm::num_vars);
        return Ok((p.field().zero(), vec![LinForm::zero(p.field(), n); positions.len()]));
    };
    let forms = positions
        .iter()
        .map(|&k| Ok(p.alphabet().form(word.letter_at(k)?).clone()))
        .collect::<Result<Vec<_>, SlpError>>()?;
    Ok((p.scalar(), forms))
}

fn rekey_all(ps: &[SigmaProduct], seed: u64) -> Vec<SigmaProduct> {
    let key = Arc::new(FingerprintKey::from_seed(seed));
    let mut cache: HashMap<*const SlpArena, Arc<SlpArena>> = HashMap::new();
    ps.iter()
        .map(|p| {
            let mut q = p.clone();
            if let Some(w) = &p.word {
                let arena = cache
                    .entry(Arc::as_ptr(w.arena()))
                    .or_insert_with(|| w.rekeyed(key.clone()).arena().clone());
                q.word = Some(Slp::new(arena.clone(), w.root()));
            }
            q
        })
        .collect()
}

/// Finds a leftmost maximal linearly independent subset of the products and
/// expresses every other product over it.
///
/// Proportional products are grouped first. Each remaining representative
/// is compared with the earlier independent ones of the same degree; those
/// that differ from it in at most `c * l^4` positions are candidates, the
/// union `T` of the mismatch positions is kept, and the dependency question
/// is settled exactly on the products restricted to `T`. Every reported
/// dependency is therefore exact; an independence claim can only be wrong if
/// the mismatch bound is too small or a fingerprint collides above the
/// expansion threshold.
pub fn max_lin_indep(ps: &[SigmaProduct], cfg: &PistarConfig) -> Result<IndepResult, PistarError> {
    check_alphabets(ps)?;
    let rekeyed;
    let ps = match cfg.fingerprint_seed {
        Some(seed) => {
            rekeyed = rekey_all(ps, seed);
            &rekeyed[..]
        }
        None => ps,
    };
    let Some(first) = ps.first() else {
        return Ok(IndepResult {
            independent: vec![],
            dependent: vec![],
            exact: true,
        });
    };
    let field = first.field();
    let n = first.alphabet().letters().first().map_or(0, LinForm::num_vars);
    let cmp = &cfg.comparer;
    let mut exact = ps.iter().all(|p| cmp.is_exact_for(p.degree()));

    let classes = scalar_classes(ps, cmp)?;
    let ell = classes.len() as u64;
    let bound = cfg.c_const.saturating_mul(ell.saturating_pow(4)).max(1) as usize;
    let t_limit = (cfg.c_const.saturating_mul(ell.saturating_pow(5)) as usize).min(cfg.max_positions);

    // per representative: None if independent, else coefficients over the
    // earlier independent representatives (by their position in `reps_a`)
    let mut reps_a: Vec<usize> = Vec::new();
    let mut rep_expr: HashMap<usize, Vec<(usize, FieldElem)>> = HashMap::new();
    for class in &classes {
        let r = class.representative;
        let pr = &ps[r];
        let wr = pr.word().unwrap();
        let mut support: Vec<usize> = Vec::new();
        let mut positions: Vec<u64> = Vec::new();
        for &a in &reps_a {
            let pa = &ps[a];
            if pa.degree() != pr.degree() {
                continue;
            }
            match cmp.mismatch_positions_up_to(wr, pa.word().unwrap(), bound)? {
                Mismatches::Positions(list) => {
                    support.push(a);
                    positions.extend(list);
                }
                Mismatches::TooMany => {}
            }
        }
        if support.is_empty() {
            reps_a.push(r);
            continue;
        }
        positions.sort_unstable();
        positions.dedup();
        if positions.len() > t_limit {
            return Err(PistarError::TooManyPositions {
                needed: positions.len(),
                limit: t_limit,
            });
        }
        let mut restricted = Vec::with_capacity(support.len() + 1);
        for &j in support.iter().chain(std::iter::once(&r)) {
            restricted.push(restrict_to_positions(&ps[j], &positions, t_limit)?);
        }
        let abp = ProductAbp::new(field, n, restricted)?;
        let deps = rs_dependencies(&abp);
        match deps.expression_of(support.len()) {
            Some(coeffs) => {
                // pivots are a subset of the support columns
                let expr = deps
                    .pivots
                    .iter()
                    .zip(coeffs)
                    .map(|(&col, &c)| (support[col], c))
                    .collect();
                rep_expr.insert(r, expr);
            }
            None => reps_a.push(r),
        }
    }
    if classes.iter().any(|c| !rep_expr.contains_key(&c.representative)) && !exact {
        // independence above the expansion threshold rests on fingerprints
        exact = false;
    }

    let mut independent: Vec<usize> = reps_a.clone();
    independent.sort_unstable();
    let slot = |i: usize| independent.binary_search(&i).expect("independent index");
    let mut coeffs: Vec<Option<Vec<FieldElem>>> = vec![None; ps.len()];
    for (i, p) in ps.iter().enumerate() {
        if p.is_zero() {
            coeffs[i] = Some(vec![field.zero(); independent.len()]);
        }
    }
    for class in &classes {
        let r = class.representative;
        let base: Vec<FieldElem> = match rep_expr.get(&r) {
            None => {
                let mut v = vec![field.zero(); independent.len()];
                v[slot(r)] = field.one();
                v
            }
            Some(expr) => {
                let mut v = vec![field.zero(); independent.len()];
                for &(a, c) in expr {
                    v[slot(a)] += c;
                }
                v
            }
        };
        for &(m, ratio) in &class.members {
            if m == r && !rep_expr.contains_key(&r) {
                continue;
            }
            coeffs[m] = Some(base.iter().map(|&c| c * ratio).collect());
        }
    }
    let dependent = coeffs
        .into_iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|c| (i, c)))
        .collect();
    Ok(IndepResult {
        independent,
        dependent,
        exact,
    })
}
