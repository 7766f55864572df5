//! White-box identity testing for `+`-regular circuits.
//!
//! Each round takes the products feeding the second sum layer, finds a
//! maximal independent subset with [`max_lin_indep`], and replaces the
//! products by fresh variables (independent ones) or linear combinations of
//! them (dependent ones). The result is again `+`-regular with one layer
//! fewer and the same zeroness. When a single layer is left the circuit is a
//! linear form and the answer can be read off.

use num_bigint::BigUint;
use thiserror::Error;

use crate::circuit::{
    analyze_regular, extract_products, linear_form_at, Circuit, CircuitBuilder, Gate, GateId,
    Rejection,
};
use crate::field::FieldElem;
use crate::pistar::{max_lin_indep, PistarConfig, PistarError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegularError {
    #[error("not plus-regular: {0}")]
    Rejected(#[from] Rejection),
    #[error(transparent)]
    Independence(#[from] PistarError),
    #[error("frontier of round {round} reaches input x{var} directly")]
    Structure { round: usize, var: usize },
}

#[derive(Debug, Clone, Default)]
pub struct RegularConfig {
    pub pistar: PistarConfig,
}

/// What one elimination round saw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundReport {
    /// Sum layers before the round.
    pub layers: usize,
    /// Syntactic degree before the round.
    pub degree: BigUint,
    /// Degree of the eliminated products.
    pub product_degree: BigUint,
    pub products: usize,
    pub independent: usize,
    pub zero_products: usize,
    /// Whether all word comparisons were exact.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularReport {
    pub is_zero: bool,
    pub rounds: Vec<RoundReport>,
    /// False when some independence claim relied on word fingerprints.
    pub exact: bool,
}

/// Decides whether a `+`-regular circuit computes the zero polynomial.
pub fn pit_plus_regular(c: &Circuit, cfg: &RegularConfig) -> Result<RegularReport, RegularError> {
    let mut current = c.clone();
    let mut rounds = Vec::new();
    loop {
        let folded = current.fold();
        if let Some(k) = folded.output_const() {
            return Ok(finish(k.is_zero(), rounds));
        }
        let s = analyze_regular(&current)?;
        let fc = &s.folded.circuit;
        if s.num_layers() == 1 {
            let form = linear_form_at(&s.folded, fc.output())?;
            return Ok(finish(form.is_zero(), rounds));
        }
        let round = rounds.len();
        let frontier = s.frontier();
        let mut pcfg = cfg.pistar.clone();
        if let Some(seed) = pcfg.fingerprint_seed {
            pcfg.fingerprint_seed = Some(crate::field::split_seed(seed, round as u64));
        }
        let products = extract_products(&s.folded, &frontier)?;
        let indep = max_lin_indep(&products, &pcfg)?;

        let field = fc.field();
        let k = indep.independent.len();
        let mut b = CircuitBuilder::new(field, k);
        let fresh: Vec<GateId> = (0..k).map(|i| b.input(i)).collect();
        let mut subst: Vec<Option<GateId>> = vec![None; fc.size()];
        let mut zero_products = 0;
        for (pos, &g) in frontier.iter().enumerate() {
            let gate = if let Ok(slot) = indep.independent.binary_search(&pos) {
                fresh[slot]
            } else {
                let coeffs = indep.expression_of(pos).expect("every product is accounted for");
                match combination(&mut b, &fresh, coeffs) {
                    Some(g) => g,
                    None => {
                        zero_products += 1;
                        let zero = field.zero();
                        b.constant(zero)
                    }
                }
            };
            subst[g] = Some(gate);
        }

        // copy everything above the frontier
        let mut needed = vec![false; fc.size()];
        needed[fc.output()] = true;
        for i in (0..fc.size()).rev() {
            if needed[i] && subst[i].is_none() {
                if let Some((a, c)) = fc.gate(i).children() {
                    needed[a] = true;
                    needed[c] = true;
                }
            }
        }
        let mut map: Vec<Option<GateId>> = vec![None; fc.size()];
        for i in 0..fc.size() {
            if !needed[i] {
                continue;
            }
            map[i] = Some(match (subst[i], fc.gate(i)) {
                (Some(g), _) => g,
                (None, Gate::Const(k)) => b.constant(k),
                (None, Gate::Add(x, y)) => b.add(map[x].unwrap(), map[y].unwrap()),
                (None, Gate::Mul(x, y)) => b.mul(map[x].unwrap(), map[y].unwrap()),
                (None, Gate::Input(var)) => return Err(RegularError::Structure { round, var }),
            });
        }
        let next = b.build(map[fc.output()].unwrap());

        let degree = s.folded.degrees[fc.output()].clone();
        let product_degree = s.layering.layer_degrees()[1].clone();
        if zero_products == 0 {
            assert_eq!(
                next.degree() * &product_degree,
                degree,
                "elimination must divide the degree by the product degree"
            );
        }
        rounds.push(RoundReport {
            layers: s.num_layers(),
            degree,
            product_degree,
            products: frontier.len(),
            independent: k,
            zero_products,
            exact: indep.exact,
        });
        current = next;
    }
}

fn finish(is_zero: bool, rounds: Vec<RoundReport>) -> RegularReport {
    let exact = rounds.iter().all(|r| r.exact);
    RegularReport {
        is_zero,
        rounds,
        exact,
    }
}

/// `sum_i coeffs[i] * fresh[i]`, or `None` when every coefficient vanishes.
fn combination(b: &mut CircuitBuilder, fresh: &[GateId], coeffs: &[FieldElem]) -> Option<GateId> {
    let terms: Vec<GateId> = fresh
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| !c.is_zero())
        .map(|(&y, &c)| if c.is_one() { y } else { b.scale(c, y) })
        .collect();
    (!terms.is_empty()).then(|| b.sum(&terms))
}
