//! Pointwise differential geometry of a parametrized surface and its
//! normal-coordinate layer.
//!
//! Everything is computed from third-order jets of the embedding r(u1,u2):
//! tangent vectors a_a = ∂_a r, surface metric g_ab = a_a·a_b, unit normal
//! n̂ = a1×a2/|a1×a2|, curvature tensor K_ab = n̂·∂_a∂_b r, mean curvature
//! M = ½K^a_a and Gaussian curvature K = det K_ab / det g_ab. The layer
//! metric G_ab(u3) = g_ab − 2u3 K_ab + u3² K_ac K^c_b has determinant
//! det G = det g · (1 − 2Mu3 + Ku3²)², so the volume ratio γ = √G/√g and
//! the counterterm F = −(1/2√G)∂₃√G are evaluated in closed form; u3
//! derivatives are never taken numerically.

use serde::{Deserialize, Serialize};

use crate::dsl::{Jet, SurfaceChart};
use crate::error::{Error, Result};

/// Regularity floor for √g; charts are rejected pointwise below it.
pub const EPS_REG: f64 = 1e-8;

/// Focal-caustic cutoff: layer evaluation requires γ > this.
pub const GAMMA_MIN: f64 = 0.1;

/// Symmetric 2×2 tensor with lower indices (or a 2×2 inverse with upper).
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct Sym2 {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

impl Sym2 {
    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m12
    }

    pub fn inverse(&self) -> Sym2 {
        let d = self.det();
        Sym2 { m11: self.m22 / d, m12: -self.m12 / d, m22: self.m11 / d }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        match (a, b) {
            (0, 0) => self.m11,
            (1, 1) => self.m22,
            _ => self.m12,
        }
    }
}

pub(crate) fn dot3(a: &[Jet; 3], b: &[Jet; 3]) -> Jet {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: &[Jet; 3], b: &[Jet; 3]) -> [Jet; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dvec(v: &[Jet; 3], axis: usize) -> [Jet; 3] {
    [v[0].derivative(axis), v[1].derivative(axis), v[2].derivative(axis)]
}

fn values(v: &[Jet; 3]) -> [f64; 3] {
    [v[0].value(), v[1].value(), v[2].value()]
}

/// Jets of every first-order geometric quantity at one chart point.
///
/// Validity orders (top retained total order of each jet): r is 3, tangent
/// vectors and the normal are 2, curvatures and everything built from them
/// are 1, so first parameter derivatives of curvature-level quantities are
/// still exact.
#[derive(Clone, Debug)]
pub struct JetFrame {
    pub r: [Jet; 3],
    pub a: [[Jet; 3]; 2],
    /// Second derivatives ∂_a∂_b r, indexed 11, 12, 22.
    pub ddr: [[Jet; 3]; 3],
    pub n_hat: [Jet; 3],
    pub g11: Jet,
    pub g12: Jet,
    pub g22: Jet,
    pub det_g: Jet,
    pub sqrt_g: Jet,
    pub k11: Jet,
    pub k12: Jet,
    pub k22: Jet,
    pub mean: Jet,
    pub gauss: Jet,
}

impl JetFrame {
    fn build(r: [Jet; 3], u1: f64, u2: f64) -> Result<JetFrame> {
        let a1 = dvec(&r, 0);
        let a2 = dvec(&r, 1);
        let g11 = dot3(&a1, &a1);
        let g12 = dot3(&a1, &a2);
        let g22 = dot3(&a2, &a2);
        let det_g = g11 * g22 - g12 * g12;
        if !(det_g.value() > EPS_REG * EPS_REG) {
            return Err(Error::DegenerateMetric {
                u1,
                u2,
                sqrt_g: det_g.value().max(0.0).sqrt(),
            });
        }
        let sqrt_g = det_g.sqrt().map_err(|e| Error::Domain {
            expr: "sqrt(det g)".into(),
            message: e.to_string(),
        })?;
        let cross = cross3(&a1, &a2);
        let inv_norm = sqrt_g.recip().map_err(|e| Error::Domain {
            expr: "1/sqrt(det g)".into(),
            message: e.to_string(),
        })?;
        let n_hat = [cross[0] * inv_norm, cross[1] * inv_norm, cross[2] * inv_norm];
        let ddr = [dvec(&a1, 0), dvec(&a1, 1), dvec(&a2, 1)];
        let k11 = dot3(&n_hat, &ddr[0]);
        let k12 = dot3(&n_hat, &ddr[1]);
        let k22 = dot3(&n_hat, &ddr[2]);
        let inv_det = det_g.recip().map_err(|e| Error::Domain {
            expr: "1/det g".into(),
            message: e.to_string(),
        })?;
        let mean =
            (g22 * k11 + g11 * k22 - (k12 * g12).scale(2.0)) * inv_det.scale(0.5);
        let gauss = (k11 * k22 - k12 * k12) * inv_det;
        Ok(JetFrame { r, a: [a1, a2], ddr, n_hat, g11, g12, g22, det_g, sqrt_g, k11, k12, k22, mean, gauss })
    }

    pub fn curvature_jet(&self, a: usize, b: usize) -> Jet {
        match (a, b) {
            (0, 0) => self.k11,
            (1, 1) => self.k22,
            _ => self.k12,
        }
    }
}

/// All pointwise surface data at one (u1, u2).
#[derive(Clone, Debug)]
pub struct SurfacePoint {
    pub u1: f64,
    pub u2: f64,
    pub position: [f64; 3],
    pub a1: [f64; 3],
    pub a2: [f64; 3],
    pub n_hat: [f64; 3],
    /// Surface metric g_ab.
    pub g: Sym2,
    /// Inverse metric g^{ab}.
    pub g_inv: Sym2,
    pub sqrt_g: f64,
    /// Curvature tensor K_ab = n̂·∂_a∂_b r.
    pub k: Sym2,
    /// Mean curvature M = ½K^a_a.
    pub mean: f64,
    /// Gaussian curvature K = det K / det g.
    pub gauss: f64,
    /// Jets retained for identity checks and layer assembly.
    pub frame: JetFrame,
}

/// Evaluate tangent frame, metric, normal, and curvatures at a chart point.
///
/// The normal is oriented along a1×a2. Fails with a degenerate-metric error
/// when √g ≤ 1e−8 (for example at a sphere pole).
pub fn fundamental_forms(chart: &SurfaceChart, u1: f64, u2: f64) -> Result<SurfacePoint> {
    let r = chart.position_jets(u1, u2)?;
    let frame = JetFrame::build(r, u1, u2)?;
    let sqrt_g = frame.sqrt_g.value();
    if !(sqrt_g > EPS_REG) {
        return Err(Error::DegenerateMetric { u1, u2, sqrt_g });
    }
    let g = Sym2 {
        m11: frame.g11.value(),
        m12: frame.g12.value(),
        m22: frame.g22.value(),
    };
    Ok(SurfacePoint {
        u1,
        u2,
        position: values(&frame.r),
        a1: values(&frame.a[0]),
        a2: values(&frame.a[1]),
        n_hat: values(&frame.n_hat),
        g,
        g_inv: g.inverse(),
        sqrt_g,
        k: Sym2 {
            m11: frame.k11.value(),
            m12: frame.k12.value(),
            m22: frame.k22.value(),
        },
        mean: frame.mean.value(),
        gauss: frame.gauss.value(),
        frame,
    })
}

/// Attractive curvature-induced potential −(ħ²/2m)(M² − K); never positive.
pub fn geometric_potential(p: &SurfacePoint, hbar: f64, m: f64) -> f64 {
    -(hbar * hbar) / (2.0 * m) * (p.mean * p.mean - p.gauss)
}

/// Volume ratio γ(u3) = 1 − 2Mu3 + Ku3²; exact because det G(u3) is the
/// square of this quadratic times det g.
pub fn gamma_of(mean: f64, gauss: f64, u3: f64) -> f64 {
    1.0 - 2.0 * mean * u3 + gauss * u3 * u3
}

/// Counterterm F(u3) = (M − Ku3)/γ(u3) = −(1/2√G)∂₃√G.
pub fn f_of(mean: f64, gauss: f64, u3: f64) -> f64 {
    (mean - gauss * u3) / gamma_of(mean, gauss, u3)
}

/// Closed-form ∂₃F(u3); reduces to 2M² − K at u3 = 0.
pub fn d3f_of(mean: f64, gauss: f64, u3: f64) -> f64 {
    let gamma = gamma_of(mean, gauss, u3);
    let dgamma = -2.0 * mean + 2.0 * gauss * u3;
    (-gauss * gamma - (mean - gauss * u3) * dgamma) / (gamma * gamma)
}

/// Pointwise layer data at normal offset u3 from the surface.
#[derive(Clone, Debug)]
pub struct LayerPoint {
    pub surface: SurfacePoint,
    pub u3: f64,
    /// Layer metric G_ab = g_ab − 2u3 K_ab + u3² K_ac K^c_b.
    pub g_layer: Sym2,
    pub g_layer_inv: Sym2,
    pub sqrt_g_layer: f64,
    /// γ = √G/√g.
    pub gamma: f64,
    /// F = −(1/2√G)∂₃√G.
    pub f: f64,
}

/// Build the layer metric and derived scalars at offset u3.
///
/// Errors with a caustic report when γ ≤ 0.1: the normal coordinates have
/// approached a focal point and the layer chart is no longer trustworthy.
pub fn layer_point(p: &SurfacePoint, u3: f64) -> Result<LayerPoint> {
    let gamma = gamma_of(p.mean, p.gauss, u3);
    if !(gamma > GAMMA_MIN) {
        return Err(Error::Caustic { gamma, u3 });
    }
    // K_ac K^c_b = K_ac g^{cd} K_db, symmetric.
    let k = p.k;
    let gi = p.g_inv;
    let mut kk = Sym2::default();
    for (slot, (a, b)) in [(0usize, (0usize, 0usize)), (1, (0, 1)), (2, (1, 1))] {
        let mut s = 0.0;
        for c in 0..2 {
            for d in 0..2 {
                s += k.get(a, c) * gi.get(c, d) * k.get(d, b);
            }
        }
        match slot {
            0 => kk.m11 = s,
            1 => kk.m12 = s,
            _ => kk.m22 = s,
        }
    }
    let g_layer = Sym2 {
        m11: p.g.m11 - 2.0 * u3 * k.m11 + u3 * u3 * kk.m11,
        m12: p.g.m12 - 2.0 * u3 * k.m12 + u3 * u3 * kk.m12,
        m22: p.g.m22 - 2.0 * u3 * k.m22 + u3 * u3 * kk.m22,
    };
    let sqrt_g_layer = g_layer.det().sqrt();
    Ok(LayerPoint {
        surface: p.clone(),
        u3,
        g_layer,
        g_layer_inv: g_layer.inverse(),
        sqrt_g_layer,
        gamma,
        f: f_of(p.mean, p.gauss, u3),
    })
}

/// Residual of the frame divergence identity
/// (1/√G)[∂₃(√G) n̂ + ∂_a(√G u^a)] at a layer point, as a 3-vector.
///
/// The tangential part is evaluated with jets of u_a = a_a + u3 ∂_a n̂; the
/// normal part uses ∂₃ det G from entry derivatives ∂₃G_ab = ∂_a n̂·u_b +
/// u_a·∂_b n̂, deliberately not from the (M, K) closed form, so the two
/// routes cross-check each other.
pub fn divergence_identity_residual(
    chart: &SurfaceChart,
    u1: f64,
    u2: f64,
    u3: f64,
) -> Result<[f64; 3]> {
    let p = fundamental_forms(chart, u1, u2)?;
    let gamma = gamma_of(p.mean, p.gauss, u3);
    if !(gamma > GAMMA_MIN) {
        return Err(Error::Caustic { gamma, u3 });
    }
    let frame = &p.frame;
    let dn = [dvec(&frame.n_hat, 0), dvec(&frame.n_hat, 1)];
    let u3j = Jet::constant(u3);
    let u_low: [[Jet; 3]; 2] = [
        [
            frame.a[0][0] + u3j * dn[0][0],
            frame.a[0][1] + u3j * dn[0][1],
            frame.a[0][2] + u3j * dn[0][2],
        ],
        [
            frame.a[1][0] + u3j * dn[1][0],
            frame.a[1][1] + u3j * dn[1][1],
            frame.a[1][2] + u3j * dn[1][2],
        ],
    ];
    let big_g = [
        [dot3(&u_low[0], &u_low[0]), dot3(&u_low[0], &u_low[1])],
        [dot3(&u_low[0], &u_low[1]), dot3(&u_low[1], &u_low[1])],
    ];
    let det_g = big_g[0][0] * big_g[1][1] - big_g[0][1] * big_g[0][1];
    let sqrt_g_layer = det_g.sqrt().map_err(|e| Error::Domain {
        expr: "sqrt(det G)".into(),
        message: e.to_string(),
    })?;
    let inv_det = det_g.recip().map_err(|e| Error::Domain {
        expr: "1/det G".into(),
        message: e.to_string(),
    })?;
    let ginv = [
        [big_g[1][1] * inv_det, -(big_g[0][1] * inv_det)],
        [-(big_g[0][1] * inv_det), big_g[0][0] * inv_det],
    ];
    // Contravariant frame vectors u^a = G^{ab} u_b.
    let mut u_up = [[Jet::zero(); 3]; 2];
    for a in 0..2 {
        for c in 0..3 {
            u_up[a][c] = ginv[a][0] * u_low[0][c] + ginv[a][1] * u_low[1][c];
        }
    }
    // Tangential divergence Σ_a ∂_a(√G u^a), per embedding component.
    let mut tangential = [0.0; 3];
    for c in 0..3 {
        for a in 0..2 {
            tangential[c] += (sqrt_g_layer * u_up[a][c]).derivative(a).value();
        }
    }
    // ∂₃ det G from entry derivatives; ∂₃u_a = ∂_a n̂.
    let gv = [
        [big_g[0][0].value(), big_g[0][1].value()],
        [big_g[0][1].value(), big_g[1][1].value()],
    ];
    let mut dgv = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            dgv[a][b] = dot3(&dn[a], &u_low[b]).value() + dot3(&u_low[a], &dn[b]).value();
        }
    }
    let ddet = dgv[0][0] * gv[1][1] + gv[0][0] * dgv[1][1] - 2.0 * gv[0][1] * dgv[0][1];
    let sqrt_val = sqrt_g_layer.value();
    let d3_sqrt = ddet / (2.0 * sqrt_val);
    let n_val = values(&frame.n_hat);
    let mut residual = [0.0; 3];
    for c in 0..3 {
        residual[c] = (d3_sqrt * n_val[c] + tangential[c]) / sqrt_val;
    }
    Ok(residual)
}

/// Numerical u3 → 0 limit verification for F² and ∂₃F.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitReport {
    pub mean: f64,
    pub gauss: f64,
    /// Extrapolated limit of F(u3)² and its target M².
    pub f_sq_limit: f64,
    pub f_sq_target: f64,
    pub f_sq_residual: f64,
    /// Extrapolated limit of ∂₃F(u3) and its target 2M² − K.
    pub d3f_limit: f64,
    pub d3f_target: f64,
    pub d3f_residual: f64,
    /// Observed convergence orders of the two raw sequences (NaN when the
    /// sequence is already flat to roundoff, e.g. on a plane).
    pub f_sq_order: f64,
    pub d3f_order: f64,
}

fn extrapolate_to_zero(e: [f64; 4]) -> (f64, f64) {
    // Richardson on a halving sequence, eliminating the h, h², and h³
    // error terms in turn.
    let mut row = e.to_vec();
    for pass in 1..=3 {
        let f = 2f64.powi(pass);
        row = row.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
    }
    let limit = row[0];
    let d0 = (e[1] - e[0]).abs();
    let d1 = (e[2] - e[1]).abs();
    let order = if d1 > 0.0 { (d0 / d1).log2() } else { f64::NAN };
    (limit, order)
}

/// Check the u3 → 0 limits F² → M² and ∂₃F → 2M² − K by sampling at
/// u3 ∈ {1e−2, 5e−3, 2.5e−3, 1.25e−3} and extrapolating.
pub fn limit_checks(p: &SurfacePoint) -> LimitReport {
    let samples = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let f_sq: [f64; 4] = samples.map(|u3| {
        let f = f_of(p.mean, p.gauss, u3);
        f * f
    });
    let d3f: [f64; 4] = samples.map(|u3| d3f_of(p.mean, p.gauss, u3));
    let (f_sq_limit, f_sq_order) = extrapolate_to_zero(f_sq);
    let (d3f_limit, d3f_order) = extrapolate_to_zero(d3f);
    let f_sq_target = p.mean * p.mean;
    let d3f_target = 2.0 * p.mean * p.mean - p.gauss;
    LimitReport {
        mean: p.mean,
        gauss: p.gauss,
        f_sq_limit,
        f_sq_target,
        f_sq_residual: (f_sq_limit - f_sq_target).abs(),
        d3f_limit,
        d3f_target,
        d3f_residual: (d3f_limit - d3f_target).abs(),
        f_sq_order,
        d3f_order,
    }
}
