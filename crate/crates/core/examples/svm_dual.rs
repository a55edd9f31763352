//! Builds the SVM dual QUBO for a small two-class data set and inspects the
//! exact minimizer.
//!
//! ```text
//! cargo run --example svm_dual
//! ```

use nalgebra::{DMatrix, DVector};
use qubo_ml::oracles::oracle_svm_margins;
use qubo_ml::svm::{decode_svm, formulate_svm, precision_matrix, validate_classifier, SvmProblem, SvmSolution};
use qubo_ml::{solve_exact, PrecisionVector};

pub fn run_example() -> SvmSolution {
    let x = DMatrix::from_row_slice(3, 1, &[2.0, 1.0, -1.0]);
    let y = DVector::from_row_slice(&[1.0, 1.0, -1.0]);
    let problem = SvmProblem::new(x, y).unwrap();
    let precision = PrecisionVector::parse_list("-1,0.5,1").unwrap();

    let qubo = formulate_svm(&problem, &precision).unwrap();
    let report = solve_exact(&qubo).unwrap();
    let pm = precision_matrix(&problem, &precision).unwrap();
    let solution = decode_svm(&problem, &pm, &report.best).unwrap();
    let check = validate_classifier(&solution, &problem);

    println!("{} variables, {} optimal assignment(s)", qubo.m(), report.all_optima.as_ref().map_or(0, Vec::len));
    println!("w = {:?}, b = {}, lambda = {:?}", solution.w, solution.b, solution.lambda);
    println!("dual objective {} (energy {})", solution.dual_objective, report.energy);
    println!("margins {:?}, separates: {}", check.margins, check.separates);

    let oracle = oracle_svm_margins(&problem, &precision).unwrap();
    println!("smallest representable hard-margin |w|^2: {:?}", oracle.objective);
    solution
}

#[allow(dead_code)]
fn main() {
    run_example();
}
