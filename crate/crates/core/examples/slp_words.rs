//! Compressed words: random access, subwords and comparison of words far
//! longer than memory.

use ncpit::slp::{Slp, SlpBuilder, WordComparer, WordEquality};

fn main() {
    let mut b = SlpBuilder::new(2);
    let ab = b.word(&[0, 1]).unwrap();
    let huge = b.power(ab, 1 << 40).unwrap();
    let a = b.letter(0).unwrap();
    let tail = b.power(ab, (1 << 40) - 1).unwrap();
    let aa = b.word(&[0, 0]).unwrap();
    let near = b.concat(tail, aa).unwrap();
    let arena = b.finish();

    let u = Slp::new(arena.clone(), huge);
    let v = Slp::new(arena.clone(), near);
    println!("|u| = {}, {} nodes, depth {}", u.length(), u.size(), u.depth());
    println!("u[10^12] = {}", u.letter_at(1_000_000_000_000).unwrap());
    let mid = u.subword(5, 13).unwrap();
    println!("u[5..13] = {:?}", mid.to_letters(64).unwrap());

    let cmp = WordComparer::default();
    match cmp.equals(&u, &v).unwrap() {
        WordEquality::Equal { exact } => println!("u == v (exact: {exact})"),
        WordEquality::Unequal(cert) => println!("u != v: {cert:?}"),
    }
    println!("leftmost mismatch: {:?}", cmp.leftmost_mismatch(&u, &v).unwrap());
    println!("mismatches up to 4: {:?}", cmp.mismatch_positions_up_to(&u, &v, 4).unwrap());

    let w = Slp::new(arena, a);
    println!("u == a: {}", cmp.equals(&u, &w).unwrap().is_equal());
}
