//! Arithmetic in a prime field and small matrix algebra over it.

use ncpit::field::{seeded_rng, PrimeField};
use ncpit::matrix::Matrix;

fn main() {
    let f = PrimeField::new(101).unwrap();
    let a = f.elem(37);
    let b = f.from_i64(-5);
    println!("a = {}, b = {}", a.value(), b.value());
    println!("a + b = {}", (a + b).value());
    println!("a * b = {}", (a * b).value());
    println!("a^-1 = {}", a.inv().unwrap().value());
    println!("a^100 = {}", a.pow(100).value());

    let m = Matrix::from_rows(f, &[vec![6, 7], vec![0, 10]]);
    let n = Matrix::from_rows(f, &[vec![1, 2], vec![3, 4]]);
    let mn = m.mul(&n).unwrap();
    let nm = n.mul(&m).unwrap();
    println!("MN = {:?}", mn.to_rows());
    println!("NM = {:?}", nm.to_rows());
    println!("MN - NM = {:?}", mn.add(&nm.scale(f.from_i64(-1))).unwrap().to_rows());
    println!("det M = {}", m.determinant().unwrap().value());

    // Same seed, same draws.
    let mut rng = seeded_rng(7);
    let r = Matrix::random(f, 3, 3, &mut rng);
    println!("random 3x3 has rank {}", r.rank());
    match r.inverse() {
        Some(inv) => println!("R * R^-1 is identity: {}", r.mul(&inv).unwrap() == Matrix::identity(f, 3)),
        None => println!("R is singular"),
    }
}
