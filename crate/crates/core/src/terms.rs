//! Coefficient lists produced by the formulators before densification.
//!
//! Generating coefficients costs time proportional to the number of nonzero
//! terms; turning them into a dense [`QuboInstance`] costs `O(M^2)` on top.

use nalgebra::{DMatrix, DVector};

use crate::{QuboInstance, Result};

/// Raw (not yet symmetrized) QUBO coefficients.
#[derive(Clone, Debug, Default)]
pub struct QuboTerms {
    m: usize,
    quadratic: Vec<(usize, usize, f64)>,
    linear: Vec<f64>,
}

impl QuboTerms {
    pub fn new(m: usize) -> Self {
        Self::with_capacity(m, 0)
    }

    pub fn with_capacity(m: usize, quadratic_terms: usize) -> Self {
        Self {
            m,
            quadratic: Vec::with_capacity(quadratic_terms),
            linear: vec![0.0; m],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Adds `value` to raw entry `A[row, col]`.
    #[inline]
    pub fn add_quadratic(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.m && col < self.m);
        self.quadratic.push((row, col, value));
    }

    #[inline]
    pub fn add_linear(&mut self, index: usize, value: f64) {
        self.linear[index] += value;
    }

    /// Number of quadratic terms recorded.
    pub fn len(&self) -> usize {
        self.quadratic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quadratic.is_empty()
    }

    /// The raw matrix with every term accumulated in insertion order.
    pub fn raw_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.m, self.m);
        for &(i, j, v) in &self.quadratic {
            a[(i, j)] += v;
        }
        a
    }

    /// Accumulates the terms densely and symmetrizes.
    pub fn into_instance(self) -> Result<QuboInstance> {
        let a = self.raw_matrix();
        QuboInstance::new(a, DVector::from_vec(self.linear))
    }
}
