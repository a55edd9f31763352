//! Linear regression as a QUBO.
//!
//! With the augmented data matrix `X` (a trailing column of ones) and the
//! precision matrix `P_mat = I_{d+1} (x) P^T`, the squared error becomes
//!
//! ```text
//! E(w_hat) = w_hat^T P_mat^T X^T X P_mat w_hat - 2 w_hat^T P_mat^T X^T Y   (+ Y^T Y)
//! ```
//!
//! The constant `Y^T Y` is not part of the QUBO.

use nalgebra::{DMatrix, DVector};

use crate::encoding::{build_regression_precision_matrix, PrecisionMatrix};
use crate::terms::QuboTerms;
use crate::{BitVector, Error, PrecisionVector, QuboInstance, Result};

/// Training data for least-squares regression.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionProblem {
    x_raw: DMatrix<f64>,
    y: DVector<f64>,
    x_aug: DMatrix<f64>,
}

impl RegressionProblem {
    pub fn new(x_raw: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let (n, d) = x_raw.shape();
        if n == 0 || d == 0 {
            return Err(Error::InvalidProblem(format!(
                "regression needs at least one sample and one feature, got {n}x{d}"
            )));
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: y.len(),
            });
        }
        if x_raw.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("regression data"));
        }
        let x_aug = x_raw.clone().insert_column(d, 1.0);
        Ok(Self { x_raw, y, x_aug })
    }

    pub fn n(&self) -> usize {
        self.x_raw.nrows()
    }

    pub fn d(&self) -> usize {
        self.x_raw.ncols()
    }

    pub fn x_raw(&self) -> &DMatrix<f64> {
        &self.x_raw
    }

    /// Data with the intercept column of ones appended last.
    pub fn x_aug(&self) -> &DMatrix<f64> {
        &self.x_aug
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// `Y^T Y`, the constant dropped from the QUBO.
    pub fn y_norm_sq(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum()
    }

    /// `||X_aug w - Y||^2`.
    pub fn sse(&self, w: &DVector<f64>) -> f64 {
        (0..self.n())
            .map(|row| {
                let fitted: f64 = (0..=self.d()).map(|j| self.x_aug[(row, j)] * w[j]).sum();
                let r = fitted - self.y[row];
                r * r
            })
            .sum()
    }

    /// `X^T X` and `X^T Y` of the augmented data, accumulated in sample order.
    fn gram(&self) -> (DMatrix<f64>, DVector<f64>) {
        let p = self.d() + 1;
        let x = &self.x_aug;
        let mut gram = DMatrix::zeros(p, p);
        let mut xty = DVector::zeros(p);
        for row in 0..self.n() {
            for i in 0..p {
                let xi = x[(row, i)];
                xty[i] += xi * self.y[row];
                for j in i..p {
                    gram[(i, j)] += xi * x[(row, j)];
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                gram[(i, j)] = gram[(j, i)];
            }
        }
        (gram, xty)
    }
}

/// `K (d + 1)`.
pub fn variable_count(d: usize, k: usize) -> usize {
    k * (d + 1)
}

pub fn precision_matrix(prob: &RegressionProblem, p: &PrecisionVector) -> PrecisionMatrix {
    build_regression_precision_matrix(p, prob.d())
}

/// Raw QUBO coefficients, `P^T (X^T X) P` and `-2 P^T X^T Y`, built from the
/// block structure of the precision matrix.
pub fn regression_terms(prob: &RegressionProblem, p: &PrecisionVector) -> QuboTerms {
    let params = prob.d() + 1;
    let k = p.len();
    let coeffs = p.entries();
    let (gram, xty) = prob.gram();
    let m = variable_count(prob.d(), k);
    let mut terms = QuboTerms::with_capacity(m, m * m);
    for i in 0..params {
        for j in 0..params {
            let g = gram[(i, j)];
            for (a, pa) in coeffs.iter().enumerate() {
                for (b, pb) in coeffs.iter().enumerate() {
                    terms.add_quadratic(i * k + a, j * k + b, pa * g * pb);
                }
            }
        }
        for (a, pa) in coeffs.iter().enumerate() {
            terms.add_linear(i * k + a, -2.0 * pa * xty[i]);
        }
    }
    terms
}

/// QUBO over `K (d + 1)` variables, ordered `w_hat_11 .. w_hat_1K, w_hat_21, ..`.
pub fn formulate_regression(prob: &RegressionProblem, p: &PrecisionVector) -> Result<QuboInstance> {
    regression_terms(prob, p).into_instance()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionSolution {
    /// Weights; the last entry is the intercept.
    pub w: DVector<f64>,
    pub sse: f64,
    pub qubo_energy: f64,
    pub bits: BitVector,
}

/// Decodes a bit vector into weights and scores it against the data.
pub fn decode_regression(
    prob: &RegressionProblem,
    p: &PrecisionVector,
    qubo: &QuboInstance,
    bits: &BitVector,
) -> Result<RegressionSolution> {
    let w = precision_matrix(prob, p).decode(bits)?;
    Ok(RegressionSolution {
        sse: prob.sse(&w),
        qubo_energy: qubo.evaluate(bits)?,
        w,
        bits: bits.clone(),
    })
}

/// Least-squares weights from the normal equations, falling back to the
/// minimum-norm pseudo-inverse solution when `X^T X` is rank deficient
/// (singular values below `1e-10` times the largest).
pub fn solve_regression_analytic(prob: &RegressionProblem) -> DVector<f64> {
    let x = prob.x_aug();
    let gram = x.transpose() * x;
    let xty = x.transpose() * prob.y();
    let svd = gram.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let tol = 1e-10 * max_sv;
    let full_rank = max_sv > 0.0 && svd.singular_values.iter().all(|&s| s > tol);
    if full_rank {
        if let Some(chol) = gram.cholesky() {
            return chol.solve(&xty);
        }
    }
    let pinv = svd
        .pseudo_inverse(tol)
        .expect("SVD was computed with both U and V");
    pinv * xty
}

/// Components of `w` outside `[min, max]` of the representable values.
pub fn unrepresentable_components(w: &DVector<f64>, p: &PrecisionVector) -> Vec<usize> {
    let (lo, hi) = (p.min_representable(), p.max_representable());
    w.iter()
        .enumerate()
        .filter(|(_, v)| **v < lo || **v > hi)
        .map(|(i, _)| i)
        .collect()
}
