//! Random circuits with known answers, for testing and benchmarking.

use ncpit::circuit::{classify_plus_regular, classify_sps, serialize};
use ncpit::field::PrimeField;
use ncpit::gen::{generate, GenClass, GenConfig};

fn main() {
    let f = PrimeField::new(65537).unwrap();

    let mut cfg = GenConfig::new(GenClass::Sps, f, 11);
    cfg.fan_in = 4;
    cfg.degree = 3;
    for force_zero in [true, false] {
        cfg.force_zero = force_zero;
        let g = generate(&cfg);
        let view = classify_sps(&g.circuit).unwrap();
        println!(
            "sps: {} gates, fan-in {}, degree {}, zero = {:?}",
            g.circuit.size(),
            view.fan_in(),
            view.max_degree(),
            g.truth.is_zero
        );
    }

    let mut cfg = GenConfig::new(GenClass::PlusRegular, f, 5);
    cfg.layers = 3;
    cfg.force_zero = true;
    let g = generate(&cfg);
    let layers = classify_plus_regular(&g.circuit).unwrap();
    println!(
        "plus-regular: {} gates, {} layers, zero = {:?}",
        g.circuit.size(),
        layers.num_layers(),
        g.truth.is_zero
    );
    let text = serialize(&g.circuit);
    println!("first lines:");
    for line in text.lines().take(6) {
        println!("  {line}");
    }
}
