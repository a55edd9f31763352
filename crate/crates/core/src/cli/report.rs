use serde::Serialize;

use super::{CommandKind, RunConfig};
use crate::oracles::OracleReport;
use crate::{Model, SolverReport};

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LegendEntry {
    pub index: usize,
    pub label: String,
}

/// Meaning of every QUBO variable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Legend {
    pub model: Model,
    pub m: usize,
    pub variables: Vec<LegendEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuboStats {
    pub m: usize,
    pub nonzeros: usize,
    pub construction_wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariableCountCheck {
    pub formula: String,
    pub expected: usize,
    pub actual: usize,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Solution {
    Regression {
        /// Feature weights followed by the intercept.
        weights: Vec<f64>,
        sse: f64,
        qubo_energy: f64,
        /// Equals `sse` up to rounding.
        energy_plus_y_norm: f64,
    },
    Svm {
        w: Vec<f64>,
        b: f64,
        lambda: Vec<f64>,
        margins: Vec<f64>,
        dual_objective: f64,
        separates: bool,
        margin_violations: usize,
    },
    Kmeans {
        labels: Option<Vec<usize>>,
        row_sums: Vec<usize>,
        column_sums: Vec<usize>,
        row_violations: usize,
        column_deviations: Vec<f64>,
        feasible: bool,
        cost: f64,
        alpha: f64,
        beta: f64,
        restored_constant: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerificationStatus {
    Verified,
    Unverified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verification {
    pub status: VerificationStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<String>,
    pub pass: Option<bool>,
    pub qubo_objective: Option<f64>,
    pub oracle_objective: Option<f64>,
    /// `qubo_objective - oracle_objective`.
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separates: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unrepresentable_components: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
}

impl Verification {
    pub(super) fn verified(
        criterion: &str,
        pass: bool,
        qubo_objective: Option<f64>,
        oracle_objective: Option<f64>,
        oracle: OracleReport,
    ) -> Self {
        Self {
            status: VerificationStatus::Verified,
            reason: None,
            criterion: Some(criterion.into()),
            pass: Some(pass),
            gap: qubo_objective.zip(oracle_objective).map(|(q, o)| q - o),
            qubo_objective,
            oracle_objective,
            separates: None,
            unrepresentable_components: None,
            oracle: Some(oracle),
        }
    }

    pub(super) fn unverified(reason: String) -> Self {
        Self {
            status: VerificationStatus::Unverified,
            reason: Some(reason),
            criterion: None,
            pass: None,
            qubo_objective: None,
            oracle_objective: None,
            gap: None,
            separates: None,
            unrepresentable_components: None,
            oracle: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub version: u32,
    pub command: CommandKind,
    pub config: RunConfig,
    pub qubo: QuboStats,
    pub variable_count: VariableCountCheck,
    pub solver: SolverReport,
    pub solution: Solution,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    pub warnings: Vec<String>,
}
