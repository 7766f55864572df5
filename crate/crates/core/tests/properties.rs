use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use ncpit::abp::{rs_layers, rs_dependencies, ProductAbp};
use ncpit::blackbox::{blackbox_sps_test, Outcome, TestConfig};
use ncpit::circuit::{
    classify_plus_regular, classify_sps, parse, serialize, Circuit, CircuitBuilder, Gate, GateId,
};
use ncpit::cli::{check, CheckOptions, Mode};
use ncpit::field::{seeded_rng, FieldElem, PrimeField, SeededRng};
use ncpit::gen::{generate, GenClass, GenConfig};
use ncpit::linform::{max_indep_rows, LinForm};
use ncpit::matrix::Matrix;
use ncpit::oracle::{expand, product_poly, Budget, NcPoly, Word};
use ncpit::pistar::{max_lin_indep, PistarConfig, SigmaProduct};
use ncpit::slp::{SlpBuilder, WordComparer};

fn primes() -> impl Strategy<Value = PrimeField> {
    prop::sample::select(vec![2u64, 3, 5, 7, 101, 65537, (1 << 61) - 1, 4611686018427387847])
        .prop_map(|p| PrimeField::new(p).unwrap())
}

fn form(f: PrimeField, n: usize, rng: &mut SeededRng) -> LinForm {
    LinForm::new((0..n).map(|_| f.sample(rng)).collect())
}

/// Replays a random sequence of gate operations into a builder.
#[derive(Debug, Clone)]
enum Op {
    Input(usize),
    Const(u64),
    Add(usize, usize),
    Mul(usize, usize),
}

fn random_ops(rng: &mut SeededRng, n: usize, len: usize) -> Vec<Op> {
    let mut ops: Vec<Op> = (0..n).map(Op::Input).collect();
    // keep degrees small by limiting multiplications
    let mut muls = 0;
    while ops.len() < len {
        let a = rng.gen_range(0..ops.len());
        let b = rng.gen_range(0..ops.len());
        ops.push(match rng.gen_range(0..4) {
            0 => Op::Const(rng.gen_range(0..7)),
            1 | 2 => Op::Add(a, b),
            _ if muls < 4 => {
                muls += 1;
                Op::Mul(a, b)
            }
            _ => Op::Add(a, b),
        });
    }
    ops
}

fn replay(b: &mut CircuitBuilder, ops: &[Op]) -> GateId {
    let mut ids = Vec::with_capacity(ops.len());
    for op in ops {
        ids.push(match *op {
            Op::Input(v) => b.input(v),
            Op::Const(c) => {
                let c = b.field().elem(c);
                b.constant(c)
            }
            Op::Add(x, y) => b.add(ids[x], ids[y]),
            Op::Mul(x, y) => b.mul(ids[x], ids[y]),
        });
    }
    *ids.last().unwrap()
}

fn circuit_of(f: PrimeField, n: usize, ops: &[Op]) -> Circuit {
    let mut b = CircuitBuilder::new(f, n);
    let out = replay(&mut b, ops);
    b.build(out)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn field_axioms(f in primes(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let p = f.modulus();
        let (a, b, c) = (f.elem(a % p), f.elem(b % p), f.elem(c % p));
        prop_assert_eq!((a + b) + c, a + (b + c));
        prop_assert_eq!((a * b) * c, a * (b * c));
        prop_assert_eq!(a * (b + c), a * b + a * c);
        prop_assert_eq!(a + b, b + a);
        prop_assert_eq!(a * b, b * a);
        prop_assert_eq!(a - a, f.zero());
        if !a.is_zero() {
            prop_assert_eq!(a * a.inv().unwrap(), f.one());
        } else {
            prop_assert!(a.inv().is_err());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), f in primes()) {
        let mut r1 = seeded_rng(seed);
        let mut r2 = seeded_rng(seed);
        for _ in 0..32 {
            prop_assert_eq!(f.sample(&mut r1), f.sample(&mut r2));
        }
    }

    #[test]
    fn parse_serialize_round_trip(seed in any::<u64>(), n in 1usize..4, len in 4usize..30) {
        let f = PrimeField::new(101).unwrap();
        let ops = random_ops(&mut seeded_rng(seed), n, len);
        let c = circuit_of(f, n, &ops);
        let text = serialize(&c);
        let back = parse(&text).unwrap();
        prop_assert_eq!(back.gates(), c.gates());
        prop_assert_eq!(back.labels(), c.labels());
        prop_assert_eq!(serialize(&back), text);
    }

    #[test]
    fn scalar_evaluation_matches_expansion(seed in any::<u64>(), n in 1usize..4, len in 4usize..25) {
        let f = PrimeField::new(10007).unwrap();
        let mut rng = seeded_rng(seed);
        let ops = random_ops(&mut rng, n, len);
        let c = circuit_of(f, n, &ops);
        let Ok(poly) = expand(&c, Budget { max_terms: 10_000, max_degree: 64 }) else {
            return Ok(());
        };
        let point: Vec<FieldElem> = (0..n).map(|_| f.sample(&mut rng)).collect();
        let mats: Vec<Matrix> = point.iter().map(|&x| Matrix::scalar(f, 1, x)).collect();
        let got = c.evaluate_matrix(&mats).unwrap()[(0, 0)];
        prop_assert_eq!(got, poly.eval_commutative(&point));
        prop_assert_eq!(c.evaluate(&point).unwrap(), got);
    }

    #[test]
    fn expansion_is_a_ring_morphism(seed in any::<u64>(), n in 1usize..3) {
        let f = PrimeField::new(101).unwrap();
        let mut rng = seeded_rng(seed);
        let ops_a = random_ops(&mut rng, n, 12);
        let ops_b = random_ops(&mut rng, n, 12);
        let pa = expand(&circuit_of(f, n, &ops_a), Budget::default()).unwrap();
        let pb = expand(&circuit_of(f, n, &ops_b), Budget::default()).unwrap();
        for mul in [false, true] {
            let mut b = CircuitBuilder::new(f, n);
            let x = replay(&mut b, &ops_a);
            let y = replay(&mut b, &ops_b);
            let out = if mul { b.mul(x, y) } else { b.add(x, y) };
            let got = expand(&b.build(out), Budget::default()).unwrap();
            let expect = if mul { pa.mul(&pb) } else { pa.add(&pb) };
            prop_assert_eq!(got, expect);
        }
    }

    #[test]
    fn generated_circuits_classify(seed in any::<u64>(), layers in 2usize..5, n in 1usize..4) {
        let f = PrimeField::new(101).unwrap();
        let mut cfg = GenConfig::new(GenClass::PlusRegular, f, seed);
        cfg.layers = layers;
        cfg.n = n;
        cfg.force_zero = seed % 2 == 0;
        let c = generate(&cfg).circuit;
        prop_assert_eq!(classify_plus_regular(&c).unwrap().num_layers(), layers);

        // replace one operand of a sum of degree >= 2 by an input
        let degrees = c.syntactic_degrees();
        let live = c.live_gates();
        let input = c.gates().iter().position(|g| matches!(g, Gate::Input(_))).unwrap();
        let sums: Vec<GateId> = (0..c.size())
            .filter(|&i| live[i] && c.gate(i).is_add() && degrees[i] >= 2u32.into())
            .collect();
        let mut rng = seeded_rng(seed);
        let &target = sums.choose(&mut rng).unwrap();
        let mut gates = c.gates().to_vec();
        let Gate::Add(a, b) = gates[target] else { unreachable!() };
        gates[target] = if rng.gen_bool(0.5) { Gate::Add(input, b) } else { Gate::Add(a, input) };
        let mutated = Circuit::from_parts(f, n, gates, c.labels().to_vec(), c.output());
        prop_assert!(classify_plus_regular(&mutated).is_err());
    }

    #[test]
    fn canonical_forms(seed in any::<u64>(), n in 1usize..5) {
        let f = PrimeField::new(101).unwrap();
        let mut rng = seeded_rng(seed);
        let l = form(f, n, &mut rng);
        let c = f.sample_nonzero(&mut rng);
        match l.canonicalize() {
            None => prop_assert!(l.is_zero()),
            Some((canon, s)) => {
                prop_assert_eq!(canon.scale(s), l.clone());
                prop_assert_eq!(canon.canonicalize().unwrap().0, canon.clone());
                prop_assert_eq!(l.scale(c).canonicalize().unwrap().0, canon);
            }
        }
    }

    #[test]
    fn leftmost_independent_rows(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..5) {
        let f = PrimeField::new(5).unwrap();
        let mut rng = seeded_rng(seed);
        let pool: Vec<Vec<FieldElem>> = (0..3).map(|_| (0..cols).map(|_| f.sample(&mut rng)).collect()).collect();
        // mix of random rows and combinations of earlier ones
        let m: Vec<Vec<FieldElem>> = (0..rows)
            .map(|_| {
                let a = f.sample(&mut rng);
                let b = f.sample(&mut rng);
                let (p, q) = (&pool[rng.gen_range(0..3)], &pool[rng.gen_range(0..3)]);
                p.iter().zip(q).map(|(&x, &y)| a * x + b * y).collect()
            })
            .collect();
        let r = max_indep_rows(f, &m);
        for i in 0..rows {
            let before = Matrix::from_rows(f, &m[..i].iter().map(|r| r.iter().map(|e| e.value()).collect()).collect::<Vec<_>>());
            let with = Matrix::from_rows(f, &m[..=i].iter().map(|r| r.iter().map(|e| e.value()).collect()).collect::<Vec<_>>());
            let new_direction = i == 0 && m[0].iter().any(|e| !e.is_zero()) || i > 0 && with.rank() > before.rank();
            prop_assert_eq!(r.pivots.contains(&i), new_direction);
        }
        for (i, coeffs) in &r.expressions {
            for col in 0..cols {
                let mut acc = f.zero();
                for (k, &p) in r.pivots.iter().enumerate() {
                    acc += coeffs[k] * m[p][col];
                }
                prop_assert_eq!(acc, m[*i][col]);
            }
        }
    }

    #[test]
    fn basis_dependencies_reconstruct(seed in any::<u64>(), m in 1usize..6, len in 1usize..7, n in 1usize..4) {
        let f = PrimeField::new(7).unwrap();
        let mut rng = seeded_rng(seed);
        let pool: Vec<LinForm> = (0..3).map(|_| form(f, n, &mut rng)).collect();
        let products: Vec<(FieldElem, Vec<LinForm>)> = (0..m)
            .map(|_| (f.sample(&mut rng), (0..len).map(|_| pool[rng.gen_range(0..3)].clone()).collect()))
            .collect();
        let p = ProductAbp::new(f, n, products.clone()).unwrap();
        for layer in rs_layers(&p) {
            prop_assert!(layer.size() <= m);
        }
        let polys: Vec<NcPoly> = products.iter().map(|(c, fs)| product_poly(fs, 1 << 20).unwrap().scale(*c)).collect();
        let deps = rs_dependencies(&p);
        for (j, coeffs) in &deps.expressions {
            let mut acc = polys[*j].scale(f.from_i64(-1));
            for (k, &piv) in deps.pivots.iter().enumerate() {
                acc = acc.add(&polys[piv].scale(coeffs[k]));
            }
            prop_assert!(acc.is_zero());
        }
    }

    #[test]
    fn concatenation_trees_agree(seed in any::<u64>(), pieces in 2usize..8) {
        let mut rng = seeded_rng(seed);
        let cmp = WordComparer::default().with_exact_threshold(0);
        let mut b = SlpBuilder::new(3);
        let parts: Vec<usize> = (0..pieces)
            .map(|_| {
                let w: Vec<u32> = (0..rng.gen_range(1..6)).map(|_| rng.gen_range(0..3)).collect();
                b.word(&w).unwrap()
            })
            .collect();
        let left = parts.iter().skip(1).fold(parts[0], |acc, &p| b.concat(acc, p).unwrap());
        let right = parts.iter().rev().skip(1).fold(*parts.last().unwrap(), |acc, &p| b.concat(p, acc).unwrap());
        let arena = b.finish();
        let u = ncpit::slp::Slp::new(arena.clone(), left);
        let v = ncpit::slp::Slp::new(arena, right);
        prop_assert!(cmp.equals(&u, &v).unwrap().is_equal());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn independence_matches_expansion(seed in any::<u64>(), m in 1usize..6, d in 1usize..11, n in 1usize..4) {
        let f = PrimeField::new(5).unwrap();
        let mut rng = seeded_rng(seed);
        let pool: Vec<LinForm> = (0..3).map(|_| form(f, n, &mut rng)).collect();
        let products: Vec<(FieldElem, Vec<LinForm>)> = (0..m)
            .map(|_| {
                let base: Vec<LinForm> = (0..d).map(|_| pool[rng.gen_range(0..3)].clone()).collect();
                (f.sample(&mut rng), base)
            })
            .collect();
        let ps = SigmaProduct::batch_from_forms(f, &products).unwrap();
        let r = max_lin_indep(&ps, &PistarConfig::default()).unwrap();
        let polys: Vec<NcPoly> = products.iter().map(|(c, fs)| product_poly(fs, 1 << 20).unwrap().scale(*c)).collect();
        let words: BTreeSet<Word> = polys.iter().flat_map(|p| p.terms().keys().cloned()).collect();
        let rows: Vec<Vec<FieldElem>> = polys.iter().map(|p| words.iter().map(|w| p.coeff(w)).collect()).collect();
        let expect = max_indep_rows(f, &rows);
        prop_assert_eq!(&r.independent, &expect.pivots);
        for (j, coeffs) in &r.dependent {
            let mut acc = polys[*j].scale(f.from_i64(-1));
            for (k, &piv) in r.independent.iter().enumerate() {
                acc = acc.add(&polys[piv].scale(coeffs[k]));
            }
            prop_assert!(acc.is_zero());
        }
        prop_assert!(r.exact);
        // deterministic across fingerprint keys below the expansion threshold
        let seeded = PistarConfig { fingerprint_seed: Some(seed), ..PistarConfig::default() };
        prop_assert_eq!(max_lin_indep(&ps, &seeded).unwrap(), r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn blackbox_is_one_sided(seed in any::<u64>(), s in 1usize..6, d in 1usize..8, n in 1usize..4) {
        let f = PrimeField::new(65537).unwrap();
        let mut cfg = GenConfig::new(GenClass::Sps, f, seed);
        cfg.fan_in = s;
        cfg.degree = d;
        cfg.n = n;
        cfg.force_zero = true;
        let c = generate(&cfg).circuit;
        let view = classify_sps(&c).unwrap();
        for trial_seed in 0..3 {
            let out = blackbox_sps_test(&c, view.fan_in(), &view.max_degree(), &TestConfig { trials: 4, seed: trial_seed }).unwrap();
            let probably_zero = matches!(out, Outcome::ProbablyZero { .. });
            prop_assert!(probably_zero);
        }
    }

    #[test]
    fn verdicts_are_reproducible(seed in any::<u64>(), zero in any::<bool>()) {
        let f = PrimeField::new(65537).unwrap();
        let mut cfg = GenConfig::new(GenClass::Sps, f, seed);
        cfg.fan_in = 3;
        cfg.degree = 4;
        cfg.force_zero = zero;
        let text = serialize(&generate(&cfg).circuit);
        for mode in [Mode::Sps, Mode::Auto, Mode::Lowdeg] {
            let opts = CheckOptions { mode, seed, ..CheckOptions::default() };
            let mut a = check(&text, &opts).unwrap();
            let mut b = check(&text, &opts).unwrap();
            a.timing_ms = 0.0;
            b.timing_ms = 0.0;
            prop_assert_eq!(a.to_json(), b.to_json());
            prop_assert!(a.witness.is_some() || a.epsilon.is_some() || a.exact.is_some() || mode == Mode::Auto);
        }
    }
}
