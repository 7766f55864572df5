//! Independence of products whose degree is far too large to expand.

use std::sync::Arc;

use ncpit::field::PrimeField;
use ncpit::linform::{LinAlphabet, LinForm};
use ncpit::pistar::{max_lin_indep, PistarConfig, SigmaProduct};
use ncpit::slp::SlpBuilder;

fn main() {
    let f = PrimeField::new((1 << 61) - 1).unwrap();
    let forms = [
        LinForm::from_i64(f, &[1, 0]),
        LinForm::from_i64(f, &[0, 1]),
        LinForm::from_i64(f, &[2, 0]),
    ];
    let alphabet = Arc::new(LinAlphabet::build(&forms));
    let letter = |i: usize| alphabet.lookup(i).unwrap();

    // x^N y^N, y^N x^N and (2x)^N y^N for N = 2^40
    let (lx, cx) = letter(0);
    let (ly, _) = letter(1);
    let (l2x, c2x) = letter(2);
    let n = 1u64 << 40;
    let mut b = SlpBuilder::new(alphabet.size() as u32);
    let x = b.letter(lx).unwrap();
    let y = b.letter(ly).unwrap();
    let xn = b.power(x, n).unwrap();
    let yn = b.power(y, n).unwrap();
    let w1 = b.concat(xn, yn).unwrap();
    let w2 = b.concat(yn, xn).unwrap();
    let x2 = b.letter(l2x).unwrap();
    let x2n = b.power(x2, n).unwrap();
    let w3 = b.concat(x2n, yn).unwrap();
    let arena = b.finish();

    // 2x is stored as 2 times the letter for x
    let words = [(w1, cx), (w2, cx), (w3, c2x.pow(n))];
    let ps: Vec<SigmaProduct> = words
        .iter()
        .map(|&(root, c)| {
            let word = ncpit::slp::Slp::new(arena.clone(), root);
            SigmaProduct::new(c, word, alphabet.clone())
        })
        .collect();
    println!("degree of each product: {}", ps[0].degree());

    let r = max_lin_indep(&ps, &PistarConfig::default()).unwrap();
    println!("independent: {:?}", r.independent);
    for (j, coeffs) in &r.dependent {
        let c: Vec<u64> = coeffs.iter().map(|c| c.value()).collect();
        println!("product {j} = {c:?} over the independent ones");
    }
    println!("exact: {}", r.exact);
}
