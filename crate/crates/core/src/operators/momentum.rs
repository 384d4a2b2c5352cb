//! Symmetrized geometric momentum components on the surface.
//!
//! The Cartesian component along axis e of the Hermitized surface momentum
//! is p_e = (−iħ/2√g){√g c^a, ∂_a}_+ with c^a = (g^{ab} a_b)·e. Centered
//! differences make the measure-scaled matrix W·p exactly anti-symmetric
//! times −iħ/2, hence exactly weighted-Hermitian.

use faer::c64;
use faer::Mat;

use crate::error::Result;
use crate::operators::grid::Grid2;
use crate::operators::op::{DiscreteOperator, OpMatrix};

/// Contravariant tangent component c^a at node `idx` for Cartesian `axis`.
fn c_component(grid: &Grid2, idx: usize, a: usize, axis: usize) -> f64 {
    let p = &grid.points[idx];
    let (t1, t2) = (p.a1[axis], p.a2[axis]);
    if a == 0 {
        p.g_inv.m11 * t1 + p.g_inv.m12 * t2
    } else {
        p.g_inv.m12 * t1 + p.g_inv.m22 * t2
    }
}

/// Discretized geometric momentum component; `axis` is 0, 1, 2 for x, y, z.
pub fn geometric_momentum(grid: &Grid2, axis: usize, hbar: f64) -> Result<DiscreteOperator> {
    assert!(axis < 3, "Cartesian axis must be 0, 1, or 2");
    let n = grid.len();
    let mut b = Mat::<f64>::zeros(n, n);
    // B = Σ_a [C^a D_a + S^{-1} D_a S C^a], S = diag(√g), D centered.
    for p in 0..n {
        for a in 0..2 {
            let h = if a == 0 { grid.axis1.h } else { grid.axis2.h };
            for step in [-1i64, 1] {
                if let Some(q) = grid.neighbor(p, a, step) {
                    let s = step as f64 / (2.0 * h);
                    let c_p = c_component(grid, p, a, axis);
                    let c_q = c_component(grid, q, a, axis);
                    let ratio = grid.points[q].sqrt_g / grid.points[p].sqrt_g;
                    b[(p, q)] += s * (c_p + ratio * c_q);
                }
            }
        }
    }
    let mut m = Mat::<c64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = c64::new(0.0, -0.5 * hbar * b[(i, j)]);
        }
    }
    Ok(DiscreteOperator {
        matrix: OpMatrix::Complex(m),
        weights: grid.weights.clone(),
        label: format!("geometric_momentum_{}", ["x", "y", "z"][axis]),
        hermitian: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::builtin_chart;
    use crate::operators::grid::build_grid;
    use crate::operators::op::hermiticity_residual;
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeMap;

    fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn plane_momentum_is_centered_difference() {
        let c = builtin_chart("plane", &params(&[])).unwrap();
        let g = build_grid(&c, 8, 8).unwrap();
        let p = geometric_momentum(&g, 0, 1.0).unwrap();
        let m = p.matrix.as_complex().unwrap();
        let h = g.axis1.h;
        for idx in 0..g.len() {
            let fwd = g.neighbor(idx, 0, 1).unwrap();
            let bwd = g.neighbor(idx, 0, -1).unwrap();
            assert_abs_diff_eq!(m[(idx, fwd)].im, -1.0 / (2.0 * h), epsilon = 1e-14);
            assert_abs_diff_eq!(m[(idx, bwd)].im, 1.0 / (2.0 * h), epsilon = 1e-14);
            assert_abs_diff_eq!(m[(idx, idx)].im, 0.0, epsilon = 1e-14);
            // No coupling along y for the x component on a plane.
            let up = g.neighbor(idx, 1, 1).unwrap();
            assert_abs_diff_eq!(m[(idx, up)].norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn momentum_weighted_hermitian() {
        for (name, ps) in [
            ("sphere", params(&[("R", 1.0)])),
            ("torus", params(&[("R", 2.0), ("r", 1.0)])),
            ("cylinder", params(&[("R", 1.0)])),
        ] {
            let c = builtin_chart(name, &ps).unwrap();
            let g = build_grid(&c, 10, 10).unwrap();
            for axis in 0..3 {
                let p = geometric_momentum(&g, axis, 1.0).unwrap();
                let res = hermiticity_residual(&p);
                assert!(res <= 1e-10, "{name} axis {axis}: {res}");
            }
        }
    }

    #[test]
    fn plane_wave_eigenstate_on_plane() {
        // On the flat periodic plane, e^{ik·u} is an eigenvector of p_x
        // with the centered-difference symbol ħ sin(k h)/h.
        let c = builtin_chart("plane", &params(&[])).unwrap();
        let g = build_grid(&c, 12, 12).unwrap();
        let p = geometric_momentum(&g, 0, 1.0).unwrap();
        let m = p.matrix.as_complex().unwrap();
        let k = 2.0;
        let h = g.axis1.h;
        let psi: Vec<c64> = (0..g.len())
            .map(|idx| {
                let (i1, _) = g.coords_of(idx);
                let th = k * g.axis1.coord(i1);
                c64::new(th.cos(), th.sin())
            })
            .collect();
        let lam = (k * h).sin() / h;
        for i in 0..g.len() {
            let mut out = c64::new(0.0, 0.0);
            for j in 0..g.len() {
                out += m[(i, j)] * psi[j];
            }
            let expect = psi[i] * lam;
            assert_abs_diff_eq!(out.re, expect.re, epsilon = 1e-12);
            assert_abs_diff_eq!(out.im, expect.im, epsilon = 1e-12);
        }
    }
}
