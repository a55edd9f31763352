//! QUBO formulations for training three classical machine-learning models.
//!
//! Linear regression, the Lagrangian dual of a hard-margin SVM and
//! equal-size k-means clustering are each rewritten as
//!
//! ```text
//! min_{z in {0,1}^M}  z^T A z + z^T b
//! ```
//!
//! Real-valued parameters are encoded with a [`PrecisionVector`] of signed
//! powers of two; the resulting [`QuboInstance`] can be minimized with the
//! exhaustive solver ([`solve_exact`]) or simulated annealing
//! ([`solve_anneal`]), and the minimizers decoded back into model
//! parameters.
//!
//! ```
//! use nalgebra::{DMatrix, DVector};
//! use qubo_ml::{regression, solve_exact, PrecisionVector};
//!
//! let x = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
//! let y = DVector::from_vec(vec![1.0, 2.0]);
//! let problem = regression::RegressionProblem::new(x, y).unwrap();
//! let precision = PrecisionVector::parse_list("0.5,1").unwrap();
//!
//! let qubo = regression::formulate_regression(&problem, &precision).unwrap();
//! let report = solve_exact(&qubo).unwrap();
//! let solution = regression::decode_regression(&problem, &precision, &qubo, &report.best).unwrap();
//! assert_eq!(solution.w.as_slice(), &[1.0, 0.0]);
//! ```

pub mod audit;
pub mod cli;
pub mod encoding;
mod error;
pub mod hexfloat;
pub mod kmeans;
pub mod oracles;
pub mod qubo;
pub mod regression;
pub mod solver;
pub mod svm;
pub mod terms;

pub use encoding::{PrecisionMatrix, PrecisionVector};
pub use error::{Error, Result};
pub use qubo::{BitVector, QuboInstance};
pub use solver::{solve_anneal, solve_exact, AnnealConfig, ExactConfig, SolverReport};

use serde::{Deserialize, Serialize};

/// The three supported formulations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Regression,
    Svm,
    Kmeans,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Regression => "regression",
            Model::Svm => "svm",
            Model::Kmeans => "kmeans",
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
