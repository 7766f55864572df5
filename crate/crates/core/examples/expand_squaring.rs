//! Exact expansion into a sparse polynomial, and where it stops being feasible.

use ncpit::circuit::CircuitBuilder;
use ncpit::field::PrimeField;
use ncpit::oracle::{expand, Budget};

fn main() {
    let f = PrimeField::new(65537).unwrap();
    for n in 1..=2 {
        for s in 0..=4 {
            // (x1 + ... + xn)^(2^s) by repeated squaring
            let mut b = CircuitBuilder::new(f, n);
            let vars: Vec<_> = (0..n).map(|i| b.input(i)).collect();
            let mut g = b.sum(&vars);
            for _ in 0..s {
                g = b.mul(g, g);
            }
            let c = b.build(g);
            match expand(&c, Budget { max_terms: 100_000, max_degree: 64 }) {
                Ok(p) => println!("n={n} s={s}: {} gates, {} monomials", c.size(), p.num_terms()),
                Err(e) => println!("n={n} s={s}: {} gates, expansion refused: {e}", c.size()),
            }
        }
    }

    let mut b = CircuitBuilder::new(f, 2);
    let (x, y) = (b.input(0), b.input(1));
    let s = b.add(x, y);
    let sq = b.mul(s, s);
    print!("(x1 + x2)^2 =\n{}", expand(&b.build(sq), Budget::default()).unwrap().dump());
}
