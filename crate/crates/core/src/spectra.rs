//! Eigensolves in the weighted inner product, degeneracy clustering,
//! closed-form reference spectra, and Richardson extrapolation.
//!
//! A weighted-Hermitian operator H (W·H symmetric, W = diag of measure
//! weights) is reduced to the ordinary symmetric matrix
//! S = W^{1/2} H W^{−1/2}; eigenvectors are mapped back by v = W^{−1/2} y,
//! which makes them orthonormal in the weighted inner product.

use faer::c64;
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{hermiticity_residual, DiscreteOperator, OpMatrix};

/// One group of (nearly) degenerate eigenvalues.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

/// Eigenvectors in the weighted inner product; complex in general.
#[derive(Clone, Debug)]
pub struct Eigenvectors {
    /// Column-major: vectors[k] is the k-th eigenvector over nodes.
    pub vectors: Vec<Vec<c64>>,
}

/// Solved spectrum with clustering and per-pair residuals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub label: String,
    pub dim: usize,
    pub count: usize,
    /// True when the requested count exceeded the dimension and was clamped.
    pub clamped: bool,
    pub eigenvalues: Vec<f64>,
    pub clusters: Vec<Cluster>,
    /// ‖WHv − λWv‖ / ‖Wv‖ per reported pair.
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Option<Eigenvectors>,
}

/// Default relative tolerance for degeneracy clustering.
pub const CLUSTER_REL_TOL: f64 = 0.02;

fn normalize_sign(v: &mut [c64]) {
    // Reproducible phase: rotate so the first significant component is
    // real and positive.
    let max = v.iter().map(|x| x.norm()).fold(0.0f64, f64::max);
    if max == 0.0 {
        return;
    }
    let lead = v.iter().find(|x| x.norm() > 1e-8 * max).copied();
    if let Some(lead) = lead {
        let phase = lead / lead.norm();
        for x in v.iter_mut() {
            *x /= phase;
        }
    }
}

/// Solve the lowest `count` eigenpairs of a weighted-Hermitian operator.
pub fn solve_spectrum(op: &DiscreteOperator, count: usize) -> Result<SpectrumReport> {
    let res = hermiticity_residual(op);
    if !op.hermitian || res > 1e-10 {
        return Err(Error::NonHermitian { residual: res });
    }
    let n = op.dim();
    let clamped = count > n;
    let count = count.min(n);
    let sqrt_w: Vec<f64> = op.weights.iter().map(|&w| w.sqrt()).collect();

    // S = W^{1/2} H W^{-1/2}, symmetrized to kill assembly roundoff.
    let (evals, vectors): (Vec<f64>, Vec<Vec<c64>>) = match &op.matrix {
        OpMatrix::Real(h) => {
            let mut s = Mat::<f64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    s[(i, j)] = sqrt_w[i] * h[(i, j)] / sqrt_w[j];
                }
            }
            for i in 0..n {
                for j in 0..i {
                    let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
                    s[(i, j)] = avg;
                    s[(j, i)] = avg;
                }
            }
            let evd = s
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Solver(format!("{e:?}")))?;
            let sd = evd.S();
            let u = evd.U();
            let evals: Vec<f64> = (0..count).map(|k| sd.column_vector()[k]).collect();
            let vectors: Vec<Vec<c64>> = (0..count)
                .map(|k| {
                    let mut v: Vec<c64> = (0..n)
                        .map(|i| c64::new(u[(i, k)] / sqrt_w[i], 0.0))
                        .collect();
                    normalize_sign(&mut v);
                    v
                })
                .collect();
            (evals, vectors)
        }
        OpMatrix::Complex(h) => {
            let mut s = Mat::<c64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    s[(i, j)] = h[(i, j)] * (sqrt_w[i] / sqrt_w[j]);
                }
            }
            for i in 0..n {
                for j in 0..=i {
                    let avg = (s[(i, j)] + s[(j, i)].conj()) * 0.5;
                    s[(i, j)] = avg;
                    s[(j, i)] = avg.conj();
                }
            }
            let evd = s
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Solver(format!("{e:?}")))?;
            let sd = evd.S();
            let u = evd.U();
            let evals: Vec<f64> = (0..count).map(|k| sd.column_vector()[k].re).collect();
            let vectors: Vec<Vec<c64>> = (0..count)
                .map(|k| {
                    let mut v: Vec<c64> =
                        (0..n).map(|i| u[(i, k)] / sqrt_w[i]).collect();
                    normalize_sign(&mut v);
                    v
                })
                .collect();
            (evals, vectors)
        }
    };

    // Generalized residual ‖WHv − λWv‖ / ‖Wv‖ for each pair.
    let mut residuals = Vec::with_capacity(count);
    for (k, v) in vectors.iter().enumerate() {
        let lam = evals[k];
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for i in 0..n {
            let mut hv = c64::new(0.0, 0.0);
            for j in 0..n {
                hv += op.matrix.get(i, j) * v[j];
            }
            let wi = op.weights[i];
            num += ((hv - v[i] * lam) * wi).norm_sqr();
            den += (v[i] * wi).norm_sqr();
        }
        residuals.push(num.sqrt() / den.sqrt());
    }

    let clusters = cluster_degeneracies(&evals, CLUSTER_REL_TOL);
    Ok(SpectrumReport {
        label: op.label.clone(),
        dim: n,
        count,
        clamped,
        eigenvalues: evals,
        clusters,
        residuals,
        eigenvectors: Some(Eigenvectors { vectors }),
    })
}

/// Greedy clustering of an ascending list: a value joins the current
/// cluster when within rel_tol·max(|value|, scale) of the cluster mean,
/// with scale the mean magnitude of the whole list.
pub fn cluster_degeneracies(evals: &[f64], rel_tol: f64) -> Vec<Cluster> {
    if evals.is_empty() {
        return Vec::new();
    }
    let scale = evals.iter().map(|v| v.abs()).sum::<f64>() / evals.len() as f64;
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut sum = evals[0];
    let mut count = 1usize;
    for &v in &evals[1..] {
        let mean = sum / count as f64;
        if (v - mean).abs() <= rel_tol * v.abs().max(scale) {
            sum += v;
            count += 1;
        } else {
            clusters.push(Cluster { value: sum / count as f64, multiplicity: count });
            sum = v;
            count = 1;
        }
    }
    clusters.push(Cluster { value: sum / count as f64, multiplicity: count });
    clusters
}

/// Closed-form reference surfaces.
#[derive(Clone, Copy, Debug)]
pub enum ReferenceSurface {
    /// Round sphere: E_l = ħ²l(l+1)/(2mR²), multiplicity 2l+1.
    Sphere { r: f64 },
    /// Cylinder with periodic z of length L, threaded by reduced flux
    /// φ = qΦ/(2πħ): E = ħ²((n−φ)²/R² + (2πk/L)²)/2m − ħ²/(8mR²).
    Cylinder { r: f64, l: f64, reduced_flux: f64 },
    /// Ring-reduced cylinder (k = 0 family only).
    Ring { r: f64, reduced_flux: f64 },
    /// Flat torus with periods l1 × l2.
    FlatTorus { l1: f64, l2: f64 },
}

/// Lowest `count` closed-form eigenvalues (with degeneracies expanded).
pub fn analytic_reference(
    surface: ReferenceSurface,
    hbar: f64,
    m: f64,
    count: usize,
) -> Result<Vec<f64>> {
    let mut vals = Vec::new();
    let e0 = hbar * hbar / (2.0 * m);
    match surface {
        ReferenceSurface::Sphere { r } => {
            if r <= 0.0 {
                return Err(Error::InvalidParameter("sphere radius must be positive".into()));
            }
            let mut l = 0u64;
            while vals.len() < count {
                let e = e0 * (l * (l + 1)) as f64 / (r * r);
                for _ in 0..(2 * l + 1) {
                    vals.push(e);
                }
                l += 1;
            }
        }
        ReferenceSurface::Cylinder { r, l, reduced_flux } => {
            if r <= 0.0 || l <= 0.0 {
                return Err(Error::InvalidParameter(
                    "cylinder radius and length must be positive".into(),
                ));
            }
            let shift = -e0 / (4.0 * r * r);
            let lim = (count as i64) + 2;
            for n in -lim..=lim {
                for k in -lim..=lim {
                    let ang = (n as f64 - reduced_flux) / r;
                    let ax = 2.0 * std::f64::consts::PI * k as f64 / l;
                    vals.push(e0 * (ang * ang + ax * ax) + shift);
                }
            }
        }
        ReferenceSurface::Ring { r, reduced_flux } => {
            if r <= 0.0 {
                return Err(Error::InvalidParameter("ring radius must be positive".into()));
            }
            let shift = -e0 / (4.0 * r * r);
            let lim = (count as i64) + 2;
            for n in -lim..=lim {
                let ang = (n as f64 - reduced_flux) / r;
                vals.push(e0 * ang * ang + shift);
            }
        }
        ReferenceSurface::FlatTorus { l1, l2 } => {
            if l1 <= 0.0 || l2 <= 0.0 {
                return Err(Error::InvalidParameter("torus periods must be positive".into()));
            }
            let lim = (count as i64) + 2;
            for n in -lim..=lim {
                for k in -lim..=lim {
                    let k1 = 2.0 * std::f64::consts::PI * n as f64 / l1;
                    let k2 = 2.0 * std::f64::consts::PI * k as f64 / l2;
                    vals.push(e0 * (k1 * k1 + k2 * k2));
                }
            }
        }
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals.truncate(count);
    Ok(vals)
}

/// Pairwise Richardson elimination of the h^order error term.
///
/// Returns the extrapolant from the finest pair and the spread across all
/// pairwise extrapolants as an error estimate.
pub fn richardson_extrapolate(pairs: &[(f64, f64)], order: i32) -> Result<(f64, f64)> {
    if pairs.len() < 2 {
        return Err(Error::Invalid(
            "Richardson extrapolation needs at least 2 (h, value) pairs".into(),
        ));
    }
    let mut sorted: Vec<(f64, f64)> = pairs.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::Invalid("Richardson h values must be distinct".into()));
        }
    }
    let mut extrapolants = Vec::new();
    for w in sorted.windows(2) {
        let (h1, v1) = w[0];
        let (h2, v2) = w[1];
        let ratio = (h1 / h2).powi(order);
        extrapolants.push(v2 + (v2 - v1) / (ratio - 1.0));
    }
    let limit = *extrapolants.last().unwrap();
    let spread = extrapolants
        .iter()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - extrapolants.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    Ok((limit, if extrapolants.len() == 1 { 0.0 } else { spread }))
}
