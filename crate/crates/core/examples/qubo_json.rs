//! Writes a QUBO to JSON and reads it back bit for bit.
//!
//! ```text
//! cargo run --example qubo_json
//! ```

use nalgebra::{DMatrix, DVector};
use qubo_ml::{BitVector, QuboInstance};

pub fn run_example() -> bool {
    let a = DMatrix::from_row_slice(3, 3, &[0.1, 1.0 / 3.0, 0.0, 0.0, -2.5, 1e-17, 0.0, 0.0, 7.0]);
    let b = DVector::from_row_slice(&[-0.2, 0.3, std::f64::consts::PI]);
    let qubo = QuboInstance::new(a, b).unwrap();

    let text = qubo.to_json().unwrap();
    println!("{text}");
    let back = QuboInstance::from_json(&text).unwrap();

    let same = back == qubo;
    println!("identical after round trip: {same}");
    for mask in [0b011, 0b101, 0b111] {
        let z = BitVector::from_mask(mask, 3);
        println!("E({z:?}) = {}", back.evaluate(&z).unwrap());
    }
    same
}

#[allow(dead_code)]
fn main() {
    run_example();
}
