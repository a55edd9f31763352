//! Shows how a precision vector turns bits into real parameters.
//!
//! ```text
//! cargo run --example precision_encoding
//! ```

use nalgebra::DVector;
use qubo_ml::encoding::build_regression_precision_matrix;
use qubo_ml::PrecisionVector;

pub fn run_example() -> Vec<f64> {
    let p = PrecisionVector::parse_list("-2, -1, 1/2, 2^0").unwrap();
    println!("entries {:?}", p.entries());
    println!("representable {:?}", p.representable_values());
    println!("smallest positive entry at position {:?}", p.k_plus());

    let pm = build_regression_precision_matrix(&p, 1);
    println!("precision matrix is {}x{}:\n{}", pm.rows(), pm.cols(), pm.dense());

    let target = DVector::from_row_slice(&[0.7, -2.4]);
    let bits = pm.encode_nearest(&target).unwrap();
    let decoded = pm.decode(&bits).unwrap();
    println!("{:?} -> {:?} -> {:?}", target.as_slice(), bits, decoded.as_slice());
    decoded.iter().copied().collect()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
