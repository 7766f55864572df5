//! Seeded random circuits with known structure, for testing and benchmarks.
//!
//! Zero circuits are zero by construction: a sum or product is subtracted
//! from a copy of itself that was rebuilt with different gates (terms
//! reordered, scalars moved into factors, a linear form split into two).
//! Nonzero sum-of-products circuits are nonzero by construction as well;
//! for `+`-regular circuits without `force_zero` the ground truth is left to
//! the caller.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CircuitBuilder, GateId};
use crate::field::{seeded_rng, FieldElem, PrimeField, SeededRng};
use crate::linform::LinForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenClass {
    /// Sum of products of linear forms.
    Sps,
    PlusRegular,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub class: GenClass,
    pub seed: u64,
    pub field: PrimeField,
    pub n: usize,
    /// Number of sum layers (`+`-regular only, at least 2).
    pub layers: usize,
    /// Product length: the degree for sums of products, the number of
    /// factors per product at every layer for `+`-regular circuits.
    pub degree: usize,
    /// Summands per sum.
    pub fan_in: usize,
    /// Largest number of variables in one linear form.
    pub max_support: usize,
    pub force_zero: bool,
}

impl GenConfig {
    pub fn new(class: GenClass, field: PrimeField, seed: u64) -> Self {
        Self {
            class,
            seed,
            field,
            n: 2,
            layers: 2,
            degree: 2,
            fan_in: 2,
            max_support: 2,
            force_zero: false,
        }
    }
}

/// The sidecar record written next to a generated circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub class: GenClass,
    /// `None` when the generator does not know.
    pub is_zero: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub circuit: Circuit,
    pub truth: GroundTruth,
}

pub fn generate(cfg: &GenConfig) -> Generated {
    assert!(cfg.n >= 1 && cfg.degree >= 1 && cfg.fan_in >= 1);
    let mut g = Gen {
        rng: seeded_rng(cfg.seed),
        f: cfg.field,
        n: cfg.n,
        max_support: cfg.max_support.clamp(1, cfg.n),
        b: CircuitBuilder::new(cfg.field, cfg.n),
    };
    let (out, is_zero) = match cfg.class {
        GenClass::Sps => g.sps(cfg),
        GenClass::PlusRegular => g.plus_regular(cfg),
    };
    Generated {
        circuit: g.b.build(out),
        truth: GroundTruth {
            seed: cfg.seed,
            class: cfg.class,
            is_zero,
        },
    }
}

struct Gen {
    rng: SeededRng,
    f: PrimeField,
    n: usize,
    max_support: usize,
    b: CircuitBuilder,
}

/// A sum of scaled products of members of the layer below.
#[derive(Clone)]
struct SumNode {
    terms: Vec<(FieldElem, Vec<usize>)>,
}

impl Gen {
    fn nonzero(&mut self) -> FieldElem {
        self.f.sample_nonzero(&mut self.rng)
    }

    fn form(&mut self) -> LinForm {
        let mut vars: Vec<usize> = (0..self.n).collect();
        vars.shuffle(&mut self.rng);
        let k = self.rng.gen_range(1..=self.max_support);
        let mut coeffs = vec![self.f.zero(); self.n];
        for &v in &vars[..k] {
            coeffs[v] = self.nonzero();
        }
        LinForm::new(coeffs)
    }

    /// `l = a + (l - a)` with both parts nonzero, if such a split is found.
    fn split(&mut self, l: &LinForm) -> Option<(LinForm, LinForm)> {
        for _ in 0..4 {
            let a = self.form();
            let rest = l.add(&a.scale(self.f.from_i64(-1)));
            if !rest.is_zero() && !a.is_zero() {
                return Some((a, rest));
            }
        }
        None
    }

    /// Product of forms, either left-folded or as a balanced tree.
    fn product_of(&mut self, gates: &[GateId]) -> GateId {
        if self.rng.gen_bool(0.5) {
            self.b.product(gates)
        } else {
            self.balanced(gates)
        }
    }

    fn balanced(&mut self, gates: &[GateId]) -> GateId {
        if gates.len() == 1 {
            return gates[0];
        }
        let mid = gates.len() / 2;
        let l = self.balanced(&gates[..mid]);
        let r = self.balanced(&gates[mid..]);
        self.b.mul(l, r)
    }

    /// `c * L_1 ... L_D` with the forms built fresh; one factor absorbs a
    /// random multiplier that the scalar compensates.
    fn emit_product(&mut self, c: FieldElem, forms: &[LinForm]) -> GateId {
        let lambda = self.nonzero();
        let at = self.rng.gen_range(0..forms.len());
        let gates: Vec<GateId> = forms
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let l = if i == at { l.scale(lambda) } else { l.clone() };
                self.b.linear_form(&l)
            })
            .collect();
        let p = self.product_of(&gates);
        let scalar = c * lambda.inv().expect("nonzero");
        if scalar.is_one() {
            p
        } else {
            self.b.scale(scalar, p)
        }
    }

    fn random_product(&mut self, d: usize) -> Vec<LinForm> {
        if d >= 4 && self.rng.gen_bool(0.3) {
            // a repeated block, which compresses well
            let k = self.rng.gen_range(1..=d / 2);
            let block: Vec<LinForm> = (0..k).map(|_| self.form()).collect();
            (0..d).map(|i| block[i % k].clone()).collect()
        } else {
            (0..d).map(|_| self.form()).collect()
        }
    }

    fn sps(&mut self, cfg: &GenConfig) -> (GateId, Option<bool>) {
        let s = cfg.fan_in;
        let d = cfg.degree;
        // (scalar, forms) summands, in blocks that cancel
        let mut blocks: Vec<Vec<(FieldElem, Vec<LinForm>)>> = Vec::new();
        let mut left = s;
        if !cfg.force_zero {
            // one block that keeps the sum nonzero
            let p = self.random_product(d);
            let c = self.nonzero();
            if s >= 2 && self.rng.gen_bool(0.5) {
                let c2 = loop {
                    let c2 = self.nonzero();
                    if c2 != c {
                        break c2;
                    }
                };
                blocks.push(vec![(c, p.clone()), (-c2, p)]);
                left -= 2;
            } else {
                blocks.push(vec![(c, p)]);
                left -= 1;
            }
        }
        if cfg.force_zero && s == 1 {
            let mut p = self.random_product(d);
            let at = self.rng.gen_range(0..d);
            p[at] = LinForm::zero(self.f, self.n);
            blocks.push(vec![(self.nonzero(), p)]);
            left = 0;
        }
        while left >= 2 {
            let p = self.random_product(d);
            let c = self.nonzero();
            if left >= 3 && self.rng.gen_bool(0.5) {
                let at = self.rng.gen_range(0..d);
                if let Some((a, r)) = self.split(&p[at]) {
                    let mut pa = p.clone();
                    pa[at] = a;
                    let mut pr = p.clone();
                    pr[at] = r;
                    blocks.push(vec![(c, p), (-c, pa), (-c, pr)]);
                    left -= 3;
                    continue;
                }
            }
            blocks.push(vec![(c, p.clone()), (-c, p)]);
            left -= 2;
        }
        // a single leftover slot in a zero circuit: pad the last block with
        // a summand that has a zero factor
        if left == 1 {
            let mut p = self.random_product(d);
            p[0] = LinForm::zero(self.f, self.n);
            blocks.push(vec![(self.nonzero(), p)]);
        }
        let mut summands: Vec<(FieldElem, Vec<LinForm>)> = blocks.into_iter().flatten().collect();
        summands.shuffle(&mut self.rng);
        let gates: Vec<GateId> = summands
            .iter()
            .map(|(c, forms)| self.emit_product(*c, forms))
            .collect();
        (self.b.sum(&gates), Some(cfg.force_zero))
    }

    fn plus_regular(&mut self, cfg: &GenConfig) -> (GateId, Option<bool>) {
        assert!(cfg.layers >= 2, "need at least two sum layers");
        let a = cfg.degree.max(1);
        let t = cfg.fan_in.max(2);
        let pool_size = 3;
        let forms: Vec<LinForm> = (0..pool_size).map(|_| self.form()).collect();
        let mut gates: Vec<Vec<GateId>> = vec![forms.iter().map(|l| self.b.linear_form(l)).collect()];
        let mut sums: Vec<Vec<SumNode>> = vec![vec![]];
        for level in 1..cfg.layers - 1 {
            let mut layer_gates = Vec::new();
            let mut layer_sums = Vec::new();
            for _ in 0..pool_size {
                let node = SumNode {
                    terms: (0..t)
                        .map(|_| {
                            let picks = (0..a).map(|_| self.rng.gen_range(0..pool_size)).collect();
                            (self.nonzero(), picks)
                        })
                        .collect(),
                };
                layer_gates.push(self.emit_sum(&node, &gates[level - 1]));
                layer_sums.push(node);
            }
            gates.push(layer_gates);
            sums.push(layer_sums);
        }
        let below = cfg.layers - 2;
        // top layer: c * (P - P') with P' built from copies of some factors
        let mut terms = Vec::new();
        let perturb = !cfg.force_zero && self.rng.gen_bool(0.5);
        let structured = cfg.force_zero || perturb;
        let pairs = if structured { t.div_ceil(2) } else { t };
        for i in 0..pairs {
            let picks: Vec<usize> = (0..a).map(|_| self.rng.gen_range(0..pool_size)).collect();
            let c = self.nonzero();
            let orig: Vec<GateId> = picks.iter().map(|&k| gates[below][k]).collect();
            let p = self.product_of(&orig);
            let p = self.b.scale(c, p);
            terms.push(p);
            if !structured {
                continue;
            }
            let mut copied = vec![false; a];
            let how_many = self.rng.gen_range(1..=a);
            for slot in rand::seq::index::sample(&mut self.rng, a, how_many) {
                copied[slot] = true;
            }
            let mut factor = self.f.one();
            let mut copy_gates = Vec::with_capacity(a);
            for (slot, &k) in picks.iter().enumerate() {
                if !copied[slot] {
                    copy_gates.push(gates[below][k]);
                    continue;
                }
                let (g, s) = if below == 0 {
                    let lambda = self.nonzero();
                    (self.b.linear_form(&forms[k].scale(lambda)), lambda)
                } else {
                    let node = sums[below][k].clone();
                    (self.copy_sum(&node, &gates[below - 1], &forms, below == 1), self.f.one())
                };
                factor *= s;
                copy_gates.push(g);
            }
            let q = self.product_of(&copy_gates);
            let mut cq = -c * factor.inv().expect("nonzero");
            if perturb && i == 0 {
                cq += self.nonzero();
            }
            terms.push(self.b.scale(cq, q));
        }
        terms.shuffle(&mut self.rng);
        let out = self.b.sum(&terms);
        (out, cfg.force_zero.then_some(true))
    }

    fn emit_sum(&mut self, node: &SumNode, below: &[GateId]) -> GateId {
        let terms: Vec<GateId> = node
            .terms
            .iter()
            .map(|(c, picks)| {
                let gs: Vec<GateId> = picks.iter().map(|&k| below[k]).collect();
                let p = self.product_of(&gs);
                self.b.scale(*c, p)
            })
            .collect();
        self.b.sum(&terms)
    }

    /// The same polynomial as `node` with different gates: terms shuffled and,
    /// over linear forms, factors rebuilt with moved scalars or split.
    fn copy_sum(&mut self, node: &SumNode, below: &[GateId], forms: &[LinForm], over_forms: bool) -> GateId {
        let mut terms: Vec<(FieldElem, Vec<LinForm>, Vec<usize>)> = Vec::new();
        for (c, picks) in &node.terms {
            if over_forms {
                let fs: Vec<LinForm> = picks.iter().map(|&k| forms[k].clone()).collect();
                let at = self.rng.gen_range(0..fs.len());
                if self.rng.gen_bool(0.5) {
                    if let Some((x, r)) = self.split(&fs[at]) {
                        let mut fx = fs.clone();
                        fx[at] = x;
                        let mut fr = fs;
                        fr[at] = r;
                        terms.push((*c, fx, vec![]));
                        terms.push((*c, fr, vec![]));
                        continue;
                    }
                }
                terms.push((*c, fs, vec![]));
            } else {
                terms.push((*c, vec![], picks.clone()));
            }
        }
        terms.shuffle(&mut self.rng);
        let gates: Vec<GateId> = terms
            .iter()
            .map(|(c, fs, picks)| {
                if over_forms {
                    self.emit_product(*c, fs)
                } else {
                    let gs: Vec<GateId> = picks.iter().map(|&k| below[k]).collect();
                    let p = self.product_of(&gs);
                    self.b.scale(*c, p)
                }
            })
            .collect();
        if gates.len() == 1 {
            // keep a sum gate so that every path crosses this layer
            let zero = self.b.field().zero();
            let z = self.b.constant(zero);
            return self.b.add(gates[0], z);
        }
        self.b.sum(&gates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{classify_plus_regular, classify_sps, serialize};
    use crate::oracle::{expand, Budget};

    #[test]
    fn deterministic() {
        let f = PrimeField::new(101).unwrap();
        for class in [GenClass::Sps, GenClass::PlusRegular] {
            let mut cfg = GenConfig::new(class, f, 7);
            cfg.layers = 3;
            let a = serialize(&generate(&cfg).circuit);
            let b = serialize(&generate(&cfg).circuit);
            assert_eq!(a, b);
            cfg.seed = 8;
            assert_ne!(a, serialize(&generate(&cfg).circuit));
        }
    }

    #[test]
    fn sps_ground_truth_holds() {
        let f = PrimeField::new(101).unwrap();
        for seed in 0..80 {
            let mut cfg = GenConfig::new(GenClass::Sps, f, seed);
            cfg.fan_in = 1 + (seed % 5) as usize;
            cfg.degree = 1 + (seed % 4) as usize;
            cfg.n = 3;
            cfg.force_zero = seed % 2 == 0;
            let g = generate(&cfg);
            let view = classify_sps(&g.circuit).unwrap();
            if cfg.degree >= 2 {
                assert_eq!(view.fan_in(), cfg.fan_in);
            }
            let zero = expand(&g.circuit, Budget::default()).unwrap().is_zero();
            assert_eq!(Some(zero), g.truth.is_zero, "seed {seed}");
        }
    }

    #[test]
    fn plus_regular_layers_and_forced_zeros() {
        let f = PrimeField::new(101).unwrap();
        for seed in 0..60 {
            let mut cfg = GenConfig::new(GenClass::PlusRegular, f, seed);
            cfg.layers = 2 + (seed % 2) as usize;
            cfg.n = 3;
            cfg.force_zero = seed % 3 == 0;
            let g = generate(&cfg);
            let layering = classify_plus_regular(&g.circuit).unwrap();
            assert_eq!(layering.num_layers(), cfg.layers, "seed {seed}");
            let zero = expand(&g.circuit, Budget::default()).unwrap().is_zero();
            if cfg.force_zero {
                assert!(zero);
            }
        }
    }
}
