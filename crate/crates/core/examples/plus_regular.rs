//! Deterministic zero test for circuits with regular sum layers.

use ncpit::circuit::{Circuit, CircuitBuilder};
use ncpit::field::PrimeField;
use ncpit::linform::LinForm;
use ncpit::regular::{pit_plus_regular, RegularConfig};

/// Sum of c * (l1)(l2) over the given terms.
fn sum_of_products(f: PrimeField, terms: &[(i64, [i64; 2], [i64; 2])]) -> Circuit {
    let mut b = CircuitBuilder::new(f, 2);
    let mut summands = Vec::new();
    for (c, l1, l2) in terms {
        let g1 = b.linear_form(&LinForm::from_i64(f, l1));
        let g2 = b.linear_form(&LinForm::from_i64(f, l2));
        let p = b.mul(g1, g2);
        summands.push(b.scale(f.from_i64(*c), p));
    }
    let out = b.sum(&summands);
    b.build(out)
}

fn main() {
    let f = PrimeField::new(101).unwrap();
    // (x1 + x2) times (x1 - x2) - (2x1 + x2) + (x1 + 2x2), which is zero
    let zero = sum_of_products(f, &[(1, [1, 1], [1, -1]), (-1, [1, 1], [2, 1]), (1, [1, 1], [1, 2])]);
    // swapping the factors of one product leaves x1x2 - x2x1
    let nonzero = sum_of_products(f, &[(1, [1, 1], [1, 2]), (-1, [1, 2], [1, 1])]);

    for (name, c) in [("cancelling", zero), ("swapped", nonzero)] {
        let report = pit_plus_regular(&c, &RegularConfig::default()).unwrap();
        println!("{name}: zero = {}, exact = {}", report.is_zero, report.exact);
        for (i, r) in report.rounds.iter().enumerate() {
            println!(
                "  round {i}: {} layers, degree {}, {} products of degree {}, {} independent, {} zero",
                r.layers, r.degree, r.products, r.product_degree, r.independent, r.zero_products
            );
        }
    }
}
