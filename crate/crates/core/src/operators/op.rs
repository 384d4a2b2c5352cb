//! Dense discrete operators with an attached weighted inner product.
//!
//! An operator H acts on node vectors; Hermiticity is always meant with
//! respect to the measure weights w: ⟨φ, Hψ⟩_w = ⟨Hφ, ψ⟩_w, i.e. W·H is
//! (conjugate-)symmetric with W = diag(w).

use faer::c64;
use faer::Mat;

/// Backing matrix of a discrete operator.
#[derive(Clone, Debug)]
pub enum OpMatrix {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl OpMatrix {
    pub fn dim(&self) -> usize {
        match self {
            OpMatrix::Real(m) => m.nrows(),
            OpMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn as_real(&self) -> Option<&Mat<f64>> {
        match self {
            OpMatrix::Real(m) => Some(m),
            OpMatrix::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&Mat<c64>> {
        match self {
            OpMatrix::Complex(m) => Some(m),
            OpMatrix::Real(_) => None,
        }
    }

    /// Entry as a complex number regardless of backing type.
    pub fn get(&self, i: usize, j: usize) -> c64 {
        match self {
            OpMatrix::Real(m) => c64::new(m[(i, j)], 0.0),
            OpMatrix::Complex(m) => m[(i, j)],
        }
    }
}

/// A square operator over grid nodes together with its measure weights.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub matrix: OpMatrix,
    pub weights: Vec<f64>,
    pub label: String,
    /// Set when the operator is Hermitian in the weighted sense at its
    /// stated assembly threshold.
    pub hermitian: bool,
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// max|W·H − (W·H)†| / max(max|W·H|, tiny).
pub fn hermiticity_residual(op: &DiscreteOperator) -> f64 {
    let n = op.dim();
    let w = &op.weights;
    let mut max_abs: f64 = 0.0;
    let mut max_dev: f64 = 0.0;
    match &op.matrix {
        OpMatrix::Real(m) => {
            for i in 0..n {
                for j in 0..n {
                    let wij = w[i] * m[(i, j)];
                    let wji = w[j] * m[(j, i)];
                    max_abs = max_abs.max(wij.abs());
                    max_dev = max_dev.max((wij - wji).abs());
                }
            }
        }
        OpMatrix::Complex(m) => {
            for i in 0..n {
                for j in 0..n {
                    let wij = m[(i, j)] * w[i];
                    let wji = m[(j, i)] * w[j];
                    max_abs = max_abs.max(wij.norm());
                    max_dev = max_dev.max((wij - wji.conj()).norm());
                }
            }
        }
    }
    max_dev / max_abs.max(f64::MIN_POSITIVE)
}
