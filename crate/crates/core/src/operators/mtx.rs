//! Matrix Market coordinate-format export of discrete operators.

use std::io::Write;

use crate::error::Result;
use crate::operators::op::{DiscreteOperator, OpMatrix};

/// Write the nonzero entries of the operator in Matrix Market coordinate
/// format (1-based indices; `real general` or `complex general`).
pub fn write_matrix_market<W: Write>(op: &DiscreteOperator, out: &mut W) -> Result<()> {
    let n = op.dim();
    match &op.matrix {
        OpMatrix::Real(m) => {
            let mut entries = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if m[(i, j)] != 0.0 {
                        entries.push((i + 1, j + 1, m[(i, j)]));
                    }
                }
            }
            writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
            writeln!(out, "% {}", op.label)?;
            writeln!(out, "{} {} {}", n, n, entries.len())?;
            for (i, j, v) in entries {
                writeln!(out, "{i} {j} {v:.17e}")?;
            }
        }
        OpMatrix::Complex(m) => {
            let mut entries = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let v = m[(i, j)];
                    if v.re != 0.0 || v.im != 0.0 {
                        entries.push((i + 1, j + 1, v));
                    }
                }
            }
            writeln!(out, "%%MatrixMarket matrix coordinate complex general")?;
            writeln!(out, "% {}", op.label)?;
            writeln!(out, "{} {} {}", n, n, entries.len())?;
            for (i, j, v) in entries {
                writeln!(out, "{i} {j} {:.17e} {:.17e}", v.re, v.im)?;
            }
        }
    }
    Ok(())
}
