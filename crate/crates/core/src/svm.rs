//! The SVM Lagrangian dual as a QUBO.
//!
//! With `theta = [w; b; lambda]` the dual objective is written as
//! `theta^T U theta + theta^T v` where
//!
//! ```text
//!     | -I_d  0  (X . Y')^T |          |  0  |
//! U = |  0    0     Y^T     |,   v = - |  0  |
//!     |  0    0      0      |          | 1_N |
//! ```
//!
//! and `X . Y'` scales each row of `X` by its label. Substituting
//! `theta = P_mat theta_hat`, with only positive precision entries for the
//! multipliers, gives `A = P_mat^T U P_mat` and `b = P_mat^T v`.
//!
//! The objective is implemented with the `-w^T w` sign as stated, which is
//! not the textbook dual. Decoded classifiers are therefore checked for
//! separation empirically rather than assumed optimal.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::encoding::{build_svm_precision_matrix, Layout, PrecisionMatrix};
use crate::terms::QuboTerms;
use crate::{BitVector, Error, PrecisionVector, QuboInstance, Result};

/// Labelled training data; labels are exactly `-1` or `+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmProblem {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl SvmProblem {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let (n, d) = x.shape();
        if n == 0 || d == 0 {
            return Err(Error::InvalidProblem(format!(
                "SVM needs at least one sample and one feature, got {n}x{d}"
            )));
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: y.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("SVM data"));
        }
        if let Some(bad) = y.iter().find(|&&l| l != 1.0 && l != -1.0) {
            return Err(Error::InvalidProblem(format!("label {bad} is not -1 or +1")));
        }
        if !y.iter().any(|&l| l == 1.0) || !y.iter().any(|&l| l == -1.0) {
            return Err(Error::InvalidProblem("both classes must be present".into()));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// The same points with every label negated.
    pub fn flipped(&self) -> Self {
        Self {
            x: self.x.clone(),
            y: -&self.y,
        }
    }

    /// `y_i (w^T x_i + b)` for every point.
    pub fn margins(&self, w: &DVector<f64>, b: f64) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                let score: f64 = (0..self.d()).map(|j| w[j] * self.x[(i, j)]).sum::<f64>() + b;
                self.y[i] * score
            })
            .collect()
    }
}

/// The raw (non-symmetric) `U`, `v` and `X . Y'` of the dual.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmDualStructure {
    pub u: DMatrix<f64>,
    pub v: DVector<f64>,
    pub x_hadamard_y: DMatrix<f64>,
}

pub fn build_dual_structure(prob: &SvmProblem) -> SvmDualStructure {
    let (n, d) = (prob.n(), prob.d());
    let size = n + d + 1;
    let xy = DMatrix::from_fn(n, d, |i, j| prob.y[i] * prob.x[(i, j)]);
    let mut u = DMatrix::zeros(size, size);
    for j in 0..d {
        u[(j, j)] = -1.0;
    }
    u.view_mut((0, d + 1), (d, n)).copy_from(&xy.transpose());
    u.view_mut((d, d + 1), (1, n)).copy_from(&prob.y.transpose());
    let mut v = DVector::zeros(size);
    v.rows_mut(d + 1, n).fill(-1.0);
    SvmDualStructure {
        u,
        v,
        x_hadamard_y: xy,
    }
}

/// `K (d + 1) + N (K - K_+ + 1)`.
pub fn variable_count(n: usize, d: usize, k: usize, positive: usize) -> usize {
    k * (d + 1) + n * positive
}

pub fn precision_matrix(prob: &SvmProblem, p: &PrecisionVector) -> Result<PrecisionMatrix> {
    build_svm_precision_matrix(p, prob.d(), prob.n())
}

/// Adds `P_mat[r, .]^T * u * P_mat[s, .]` for one nonzero `U[r, s] = u`.
fn add_sandwich(terms: &mut QuboTerms, pm: &PrecisionMatrix, r: usize, s: usize, u: f64) {
    let (row_start, row_coeffs) = pm.block(r);
    let (col_start, col_coeffs) = pm.block(s);
    for (a, pa) in row_coeffs.iter().enumerate() {
        let scaled = pa * u;
        for (c, pc) in col_coeffs.iter().enumerate() {
            terms.add_quadratic(row_start + a, col_start + c, scaled * pc);
        }
    }
}

/// Raw coefficients of `P_mat^T U P_mat` and `P_mat^T v`, visiting only the
/// nonzero entries of `U` and `v`.
pub fn svm_terms(prob: &SvmProblem, p: &PrecisionVector) -> Result<QuboTerms> {
    let pm = precision_matrix(prob, p)?;
    let (n, d) = (prob.n(), prob.d());
    let k = p.len();
    let kp = p.positive_count();
    let capacity = d * k * k + (d + 1) * n * k * kp;
    let mut terms = QuboTerms::with_capacity(pm.cols(), capacity);
    let lambda_row = |i: usize| d + 1 + i;

    for j in 0..d {
        add_sandwich(&mut terms, &pm, j, j, -1.0);
    }
    for i in 0..n {
        let yi = prob.y[i];
        for j in 0..d {
            let u = yi * prob.x[(i, j)];
            if u != 0.0 {
                add_sandwich(&mut terms, &pm, j, lambda_row(i), u);
            }
        }
        add_sandwich(&mut terms, &pm, d, lambda_row(i), yi);
        let (start, coeffs) = pm.block(lambda_row(i));
        for (l, pl) in coeffs.iter().enumerate() {
            terms.add_linear(start + l, -pl);
        }
    }
    Ok(terms)
}

/// QUBO with variables ordered as the `w_hat`, `b_hat`, `lambda_hat` blocks.
pub fn formulate_svm(prob: &SvmProblem, p: &PrecisionVector) -> Result<QuboInstance> {
    svm_terms(prob, p)?.into_instance()
}

/// `-w^T w + w^T (X . Y')^T lambda + b Y^T lambda - 1^T lambda`, term by term.
pub fn dual_objective(prob: &SvmProblem, w: &DVector<f64>, b: f64, lambda: &DVector<f64>) -> f64 {
    let (n, d) = (prob.n(), prob.d());
    let ww: f64 = w.iter().map(|v| v * v).sum();
    let mut cross = 0.0;
    let mut bias = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        let yi = prob.y[i];
        for j in 0..d {
            cross += w[j] * prob.x[(i, j)] * yi * lambda[i];
        }
        bias += b * yi * lambda[i];
        total += lambda[i];
    }
    -ww + cross + bias - total
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SvmSolution {
    pub w: Vec<f64>,
    pub b: f64,
    pub lambda: Vec<f64>,
    pub margins: Vec<f64>,
    pub dual_objective: f64,
}

/// Splits `P_mat * bits` into `(w, b, lambda)` and scores it.
pub fn decode_svm(prob: &SvmProblem, pm: &PrecisionMatrix, bits: &BitVector) -> Result<SvmSolution> {
    let expected = Layout::Svm {
        features: prob.d(),
        points: prob.n(),
    };
    if pm.layout() != expected {
        return Err(Error::InvalidProblem(format!(
            "precision matrix layout {:?} does not match problem {expected:?}",
            pm.layout()
        )));
    }
    let theta = pm.decode(bits)?;
    let d = prob.d();
    let w = DVector::from_iterator(d, theta.rows(0, d).iter().copied());
    let b = theta[d];
    let lambda = DVector::from_iterator(prob.n(), theta.rows(d + 1, prob.n()).iter().copied());
    Ok(SvmSolution {
        margins: prob.margins(&w, b),
        dual_objective: dual_objective(prob, &w, b, &lambda),
        w: w.iter().copied().collect(),
        b,
        lambda: lambda.iter().copied().collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifierReport {
    pub margins: Vec<f64>,
    /// Points with margin below 1.
    pub violations: usize,
    /// Every margin strictly positive.
    pub separates: bool,
}

pub fn validate_classifier(sol: &SvmSolution, prob: &SvmProblem) -> ClassifierReport {
    let w = DVector::from_row_slice(&sol.w);
    let margins = prob.margins(&w, sol.b);
    ClassifierReport {
        violations: margins.iter().filter(|&&m| m < 1.0).count(),
        separates: margins.iter().all(|&m| m > 0.0),
        margins,
    }
}
