//! Fits a line through four points by minimizing its QUBO exactly, then
//! compares with the least-squares solution.
//!
//! ```text
//! cargo run --example linear_regression
//! ```

use nalgebra::{DMatrix, DVector};
use qubo_ml::regression::{decode_regression, formulate_regression, solve_regression_analytic, RegressionProblem};
use qubo_ml::{solve_exact, PrecisionVector};

pub fn run_example() -> (Vec<f64>, f64) {
    let x = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
    let y = DVector::from_row_slice(&[0.5, 1.0, 1.5, 2.0]);
    let problem = RegressionProblem::new(x, y).unwrap();
    let precision = PrecisionVector::parse_list("-1,0.25,0.5").unwrap();

    let qubo = formulate_regression(&problem, &precision).unwrap();
    let report = solve_exact(&qubo).unwrap();
    let fit = decode_regression(&problem, &precision, &qubo, &report.best).unwrap();
    let analytic = solve_regression_analytic(&problem);

    println!("{} binary variables, minimum energy {}", qubo.m(), report.energy);
    println!("qubo weights     {:?}  sse {}", fit.w.as_slice(), fit.sse);
    println!("analytic weights {:?}  sse {}", analytic.as_slice(), problem.sse(&analytic));
    println!("energy + |Y|^2 = {}", fit.qubo_energy + problem.y_norm_sq());
    (fit.w.iter().copied().collect(), fit.sse)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
