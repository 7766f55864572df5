//! Linear dependencies among products of linear forms, found layer by layer
//! without expanding anything.

use ncpit::abp::{rs_dependencies, rs_layers, ProductAbp};
use ncpit::field::PrimeField;
use ncpit::linform::LinForm;

fn main() {
    let f = PrimeField::new(101).unwrap();
    let x = LinForm::from_i64(f, &[1, 0]);
    let y = LinForm::from_i64(f, &[0, 1]);
    let s = LinForm::from_i64(f, &[1, 1]);

    // (x+y)(x+y) = xy + yx + xx + yy, so the five products have rank 4
    let products = vec![
        (f.one(), vec![x.clone(), y.clone()]),
        (f.one(), vec![y.clone(), x.clone()]),
        (f.one(), vec![s.clone(), s.clone()]),
        (f.one(), vec![x.clone(), x.clone()]),
        (f.elem(3), vec![y.clone(), y.clone()]),
    ];
    let p = ProductAbp::new(f, 2, products).unwrap();
    for (i, layer) in rs_layers(&p).iter().enumerate() {
        println!("layer {i}: basis of size {}", layer.size());
    }
    let deps = rs_dependencies(&p);
    println!("independent products: {:?}", deps.pivots);
    for (j, coeffs) in &deps.expressions {
        let c: Vec<u64> = coeffs.iter().map(|c| c.value()).collect();
        println!("product {j} = {c:?} over the independent ones");
    }
}
