//! Reading a circuit from text and asking which structural class it is in.

use ncpit::circuit::{classify_plus_regular, classify_sps, parse, serialize};
use ncpit::cli::ClassReport;

const COMMUTATOR: &str = "\
field 101
vars 2
g1 = x1
g2 = x2
g3 = mul g1 g2
g4 = mul g2 g1
g5 = const -1
g6 = mul g5 g4
g7 = add g3 g6
output g7
";

fn main() {
    let c = parse(COMMUTATOR).expect("well-formed circuit");
    println!("{} gates, {} variables, degree {}", c.size(), c.num_vars(), c.degree());
    println!("homogeneous: {}", c.is_homogeneous());

    let sps = classify_sps(&c).unwrap();
    println!("sps view: fan-in {}, degree {}", sps.fan_in(), sps.max_degree());

    let layering = classify_plus_regular(&c).unwrap();
    println!("plus-regular with {} sum layers", layering.num_layers());

    println!("summary: {}", ClassReport::of(&c).summary());

    let mixed = parse("field 101\nvars 1\ng1 = x1\ng2 = mul g1 g1\ng3 = add g2 g1\ng4 = mul g3 g1\noutput g4\n").unwrap();
    println!("x(x^2 + x): {}", ClassReport::of(&mixed).summary());

    print!("round trip:\n{}", serialize(&c));
}
