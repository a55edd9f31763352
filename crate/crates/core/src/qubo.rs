//! The canonical QUBO instance `min z^T A z + z^T b` over binary `z`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{hexfloat, Error, Result};

/// An ordered sequence of binary decision variables.
///
/// Ordering is lexicographic with index 0 most significant, which is the
/// order used to break ties between degenerate optima.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct BitVector(Vec<u8>);

impl BitVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidProblem(format!("bit value {bad} is not 0 or 1")));
        }
        Ok(Self(bits))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![1; len])
    }

    /// Bit `i` of `mask` becomes variable `i`.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        debug_assert!(len <= 64);
        Self((0..len).map(|i| ((mask >> i) & 1) as u8).collect())
    }

    pub fn to_mask(&self) -> u64 {
        debug_assert!(self.0.len() <= 64);
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i] == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = u8::from(value);
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// Indices of the set bits, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i)
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }
}

impl TryFrom<Vec<u8>> for BitVector {
    type Error = Error;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        Self::new(bits)
    }
}

impl From<BitVector> for Vec<u8> {
    fn from(bits: BitVector) -> Self {
        bits.0
    }
}

impl FromIterator<bool> for BitVector {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().map(u8::from).collect())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BitVector(")?;
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        f.write_str(")")
    }
}

/// Returns `(A + A^T) / 2`. The quadratic form `z^T A z` is unchanged.
pub fn symmetrize(raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !raw.is_square() {
        return Err(Error::NotSquare {
            rows: raw.nrows(),
            cols: raw.ncols(),
        });
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("QUBO matrix"));
    }
    let n = raw.nrows();
    let mut out = raw.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (raw[(i, j)] + raw[(j, i)]) / 2.0;
            out[(i, j)] = avg;
            out[(j, i)] = avg;
        }
    }
    Ok(out)
}

/// A QUBO instance with its quadratic matrix stored symmetrized.
#[derive(Clone, Debug, PartialEq)]
pub struct QuboInstance {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl QuboInstance {
    /// Builds an instance from a possibly non-symmetric matrix; `a_raw` is
    /// symmetrized on the way in.
    pub fn new(a_raw: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let a = symmetrize(&a_raw)?;
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                actual: b.len(),
            });
        }
        if a.nrows() == 0 {
            return Err(Error::InvalidProblem("QUBO must have at least one variable".into()));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("QUBO vector"));
        }
        Ok(Self { a, b })
    }

    /// Number of binary variables.
    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    /// `z^T A z + z^T b`.
    pub fn evaluate(&self, z: &BitVector) -> Result<f64> {
        if z.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                actual: z.len(),
            });
        }
        Ok(self.evaluate_unchecked(z.as_slice()))
    }

    pub(crate) fn evaluate_unchecked(&self, z: &[u8]) -> f64 {
        let set: Vec<usize> = (0..z.len()).filter(|&i| z[i] == 1).collect();
        let mut energy = 0.0;
        for &i in &set {
            // A is symmetric, so column i doubles as row i.
            let row = self.a.column(i);
            let mut acc = self.b[i];
            for &j in &set {
                acc += row[j];
            }
            energy += acc;
        }
        energy
    }

    /// Energy at a variable assignment given as a bitmask.
    pub(crate) fn evaluate_mask(&self, mask: u64) -> f64 {
        let m = self.m();
        let mut energy = 0.0;
        for i in (0..m).filter(|i| mask >> i & 1 == 1) {
            let row = self.a.column(i);
            let mut acc = self.b[i];
            for j in (0..m).filter(|j| mask >> j & 1 == 1) {
                acc += row[j];
            }
            energy += acc;
        }
        energy
    }

    /// Multiplies `A` and `b` by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            a: &self.a * factor,
            b: &self.b * factor,
        }
    }

    /// Number of nonzero entries of `A`.
    pub fn nonzeros(&self) -> usize {
        self.a.iter().filter(|v| **v != 0.0).count()
    }

    /// Largest absolute matrix entry.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn to_document(&self) -> QuboDocument {
        let m = self.m();
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| self.a[(i, j)]).collect())
            .collect();
        let b: Vec<f64> = self.b.iter().copied().collect();
        QuboDocument {
            m,
            a_hex: Some(
                rows.iter()
                    .map(|r| r.iter().map(|&v| hexfloat::format(v)).collect())
                    .collect(),
            ),
            b_hex: Some(b.iter().map(|&v| hexfloat::format(v)).collect()),
            a: rows,
            b,
        }
    }

    pub fn from_document(doc: &QuboDocument) -> Result<Self> {
        let m = doc.m;
        let decode_hex = |s: &String| {
            hexfloat::parse(s)
                .ok_or_else(|| Error::InvalidProblem(format!("malformed hex float {s:?}")))
        };
        let rows: Vec<Vec<f64>> = match &doc.a_hex {
            Some(hex) => hex
                .iter()
                .map(|r| r.iter().map(decode_hex).collect::<Result<_>>())
                .collect::<Result<_>>()?,
            None => doc.a.clone(),
        };
        let b: Vec<f64> = match &doc.b_hex {
            Some(hex) => hex.iter().map(decode_hex).collect::<Result<_>>()?,
            None => doc.b.clone(),
        };
        if rows.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: rows.len(),
            });
        }
        if let Some(r) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: r.len(),
            });
        }
        let a = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
        Self::new(a, DVector::from_vec(b))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: QuboDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}

/// On-disk form of a [`QuboInstance`]. The `*_hex` fields carry the exact
/// bit patterns and take precedence over the decimal fields when present.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuboDocument {
    pub m: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_hex: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_hex: Option<Vec<String>>,
}

/// Free-function form of [`QuboInstance::evaluate`].
pub fn evaluate(q: &QuboInstance, z: &BitVector) -> Result<f64> {
    q.evaluate(z)
}
