//! Minimizers for [`QuboInstance`](crate::QuboInstance): exhaustive
//! enumeration for small instances and seeded simulated annealing.

mod anneal;
mod exact;

use serde::{Deserialize, Serialize};

use crate::BitVector;

pub use anneal::{solve_anneal, AnnealConfig};
pub use exact::{solve_exact, solve_exact_with, ExactConfig, DEFAULT_EXACT_CAP, OPTIMA_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Anneal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub backend: Backend,
    pub best: BitVector,
    /// Objective at `best`, evaluated directly.
    pub energy: f64,
    /// Every assignment within [`OPTIMA_TOLERANCE`] of the minimum, in
    /// lexicographic order. Exact backend only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_optima: Option<Vec<BitVector>>,
    pub stats: SolverStats,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    /// Assignments visited (exact) or single-flip proposals made (anneal).
    pub evaluated: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Best energy reached by each restart, in restart order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart_energies: Option<Vec<f64>>,
}

/// Energy change from flipping bit `i`, given the local field
/// `h_i = sum_j A_ij z_j` of a symmetric `A`.
#[inline]
pub(crate) fn flip_delta(a_ii: f64, b_i: f64, h_i: f64, currently_set: bool) -> f64 {
    if currently_set {
        -(2.0 * (h_i - a_ii) + a_ii + b_i)
    } else {
        2.0 * h_i + a_ii + b_i
    }
}
