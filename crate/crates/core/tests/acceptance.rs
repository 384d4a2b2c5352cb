//! Acceptance suite: ten pinned criteria, one pass/fail line each
//! (visible with `--nocapture`). Tolerances are hard-coded on purpose;
//! loosening them is a contract change, not a fix.

use std::collections::BTreeMap;
use std::time::Instant;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use surfq_core::dsl::builtin_chart;
use surfq_core::experiments::{
    cross_term_identity_check, cross_term_pointwise, default_test_bank, sample_layer_points,
    thin_layer_convergence, tlq_transform_check, TestFunction, U3Factor,
};
use surfq_core::geometry::{
    divergence_identity_residual, fundamental_forms, geometric_potential, layer_point,
    limit_checks,
};
use surfq_core::operators::{
    build_grid, em_surface_hamiltonian, geometric_momentum, hermiticity_residual,
    layer_hamiltonian, surface_hamiltonian, transverse_level, DiscreteOperator, LayerConfig,
    OpMatrix, VectorPotentialField,
};
use surfq_core::spectra::{richardson_extrapolate, solve_spectrum};

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn report(id: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "acceptance {id:02} {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance {id:02} {name} failed: {detail}");
}

#[test]
fn acceptance_01_closed_form_geometry() {
    let t0 = Instant::now();
    let sphere = builtin_chart("sphere", &params(&[("R", 1.0)])).unwrap();
    let mut worst: f64 = 0.0;
    for (u1, u2) in [(0.7, 0.3), (1.5, 2.0), (2.4, 5.0)] {
        let p = fundamental_forms(&sphere, u1, u2).unwrap();
        worst = worst.max((p.mean * p.mean - p.gauss).abs());
    }
    let cylinder = builtin_chart("cylinder", &params(&[("R", 1.0)])).unwrap();
    let p = fundamental_forms(&cylinder, 1.0, 0.5).unwrap();
    let v_geo = geometric_potential(&p, 1.0, 1.0);
    let torus = builtin_chart("torus", &params(&[("R", 2.0), ("r", 1.0)])).unwrap();
    let outer = fundamental_forms(&torus, 0.0, 1.0).unwrap();
    let inner = fundamental_forms(&torus, std::f64::consts::PI, 1.0).unwrap();
    let ok = worst <= 1e-10
        && (v_geo + 0.125).abs() <= 1e-10
        && (outer.mean - 2.0 / 3.0).abs() <= 1e-10
        && (outer.gauss - 1.0 / 3.0).abs() <= 1e-10
        && inner.mean.abs() <= 1e-10
        && (inner.gauss + 1.0).abs() <= 1e-10
        && t0.elapsed().as_secs_f64() < 1.0;
    report(
        1,
        "closed-form geometry",
        ok,
        &format!(
            "sphere |M²−K| {worst:.2e}, cylinder V_geo {v_geo:.10}, torus ({:.10},{:.10})/({:.2e},{:.10}), {:.2}s",
            outer.mean, outer.gauss, inner.mean, inner.gauss,
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn acceptance_02_divergence_identity() {
    let t0 = Instant::now();
    let torus = builtin_chart("torus", &params(&[("R", 2.0), ("r", 1.0)])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut max_res: f64 = 0.0;
    for _ in 0..100 {
        let u1 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let u2 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let u3 = rng.gen_range(-0.1..0.1);
        for v in divergence_identity_residual(&torus, u1, u2, u3).unwrap() {
            max_res = max_res.max(v.abs());
        }
    }
    let ok = max_res <= 1e-8 && t0.elapsed().as_secs_f64() < 5.0;
    report(
        2,
        "divergence identity",
        ok,
        &format!("max residual {max_res:.2e}, {:.2}s", t0.elapsed().as_secs_f64()),
    );
}

#[test]
fn acceptance_03_expansion_checks() {
    // The det ratio det G/det g equals the square of 1 − 2Mu3 + Ku3², so
    // its defect against the quadratic truncation 1 − 4Mu3 + (4M²+2K)u3²
    // is −4MKu3³ + K²u3⁴: cubic, halving ratio ≈ 8.
    let torus = builtin_chart("torus", &params(&[("R", 2.0), ("r", 1.0)])).unwrap();
    let p = fundamental_forms(&torus, 0.9, 1.7).unwrap();
    let defect = |u3: f64| {
        let lp = layer_point(&p, u3).unwrap();
        let ratio = lp.g_layer.det() / p.g.det();
        let quad = 1.0 - 4.0 * p.mean * u3 + (4.0 * p.mean * p.mean + 2.0 * p.gauss) * u3 * u3;
        (ratio - quad).abs()
    };
    let ratio = defect(0.02) / defect(0.01);
    let mut worst_limit: f64 = 0.0;
    for (name, ps, u1, u2) in [
        ("sphere", params(&[("R", 1.0)]), 1.0, 0.0),
        ("cylinder", params(&[("R", 1.0)]), 0.5, 0.5),
        ("torus", params(&[("R", 2.0), ("r", 1.0)]), 0.9, 1.7),
    ] {
        let chart = builtin_chart(name, &ps).unwrap();
        let rep = limit_checks(&fundamental_forms(&chart, u1, u2).unwrap());
        worst_limit = worst_limit.max(rep.f_sq_residual).max(rep.d3f_residual);
    }
    let ok = ratio >= 7.0 && worst_limit <= 1e-6;
    report(
        3,
        "expansion checks",
        ok,
        &format!("gamma cubic ratio {ratio:.2}, worst limit residual {worst_limit:.2e}"),
    );
}

#[test]
fn acceptance_04_hermiticity() {
    let t0 = Instant::now();
    let torus = builtin_chart("torus", &params(&[("R", 2.0), ("r", 1.0)])).unwrap();
    let sphere = builtin_chart("sphere", &params(&[("R", 1.0)])).unwrap();
    let gt = build_grid(&torus, 16, 16).unwrap();
    let gs = build_grid(&sphere, 16, 16).unwrap();
    let mut worst_h: f64 = 0.0;
    worst_h = worst_h.max(hermiticity_residual(&surface_hamiltonian(&gt, 1.0, 1.0).unwrap()));
    worst_h = worst_h.max(hermiticity_residual(&surface_hamiltonian(&gs, 1.0, 1.0).unwrap()));
    let field = VectorPotentialField::parse_strs(
        "-0.3*y",
        "0.3*x",
        "0.1",
        Some("0.2*z"),
        1.0,
        params(&[]),
    )
    .unwrap();
    worst_h = worst_h.max(hermiticity_residual(
        &em_surface_hamiltonian(&gt, &field, 1.0, 1.0).unwrap(),
    ));
    let mut cfg = LayerConfig::new(12, 4, 6, 0.2, 1.0, 1.0);
    cfg.sector = Some(1);
    worst_h = worst_h.max(hermiticity_residual(&layer_hamiltonian(&torus, &cfg).unwrap()));
    let mut worst_p: f64 = 0.0;
    for axis in 0..3 {
        worst_p = worst_p.max(hermiticity_residual(
            &geometric_momentum(&gt, axis, 1.0).unwrap(),
        ));
    }
    // Unsymmetrized fixture: a naive one-coefficient stencil that skips
    // the face averaging and the measure; must fail clearly.
    let n = gt.len();
    let mut m = Mat::<f64>::zeros(n, n);
    for p in 0..n {
        for (a, h) in [(0usize, gt.axis1.h), (1, gt.axis2.h)] {
            let c = if a == 0 { gt.points[p].g_inv.m11 } else { gt.points[p].g_inv.m22 };
            for step in [-1i64, 1] {
                if let Some(q) = gt.neighbor(p, a, step) {
                    m[(p, q)] += c / (h * h);
                    m[(p, p)] -= c / (h * h);
                }
            }
        }
    }
    let naive = DiscreteOperator {
        matrix: OpMatrix::Real(m),
        weights: gt.weights.clone(),
        label: "naive_unsymmetrized".into(),
        hermitian: false,
    };
    let naive_res = hermiticity_residual(&naive);
    let ok = worst_h <= 1e-12
        && worst_p <= 1e-10
        && naive_res >= 1e-3
        && t0.elapsed().as_secs_f64() < 10.0;
    report(
        4,
        "weighted Hermiticity",
        ok,
        &format!(
            "hamiltonians {worst_h:.2e}, momenta {worst_p:.2e}, naive fixture {naive_res:.2e}, {:.2}s",
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn acceptance_05_sphere_spectrum() {
    let t0 = Instant::now();
    let sphere = builtin_chart("sphere", &params(&[("R", 1.0)])).unwrap();
    let g = build_grid(&sphere, 64, 32).unwrap();
    let h = surface_hamiltonian(&g, 1.0, 1.0).unwrap();
    let rep = solve_spectrum(&h, 16).unwrap();
    let expect = [(0.0, 1usize), (1.0, 3), (3.0, 5), (6.0, 7)];
    let mut ok = rep.clusters.len() >= 4;
    let mut detail = String::new();
    for (k, &(val, mult)) in expect.iter().enumerate() {
        let c = &rep.clusters[k];
        ok &= (c.value - val).abs() <= 0.02 * val.max(1.0) && c.multiplicity == mult;
        detail.push_str(&format!("{:.4}×{} ", c.value, c.multiplicity));
    }
    let dt = t0.elapsed().as_secs_f64();
    ok &= dt < 30.0;
    report(5, "sphere spectrum", ok, &format!("clusters {detail}, {dt:.2}s"));
}

#[test]
fn acceptance_06_cylinder_flux() {
    let cylinder = builtin_chart("cylinder", &params(&[("R", 1.0)])).unwrap();
    let g = build_grid(&cylinder, 8, 64).unwrap();
    let field = |phi0: f64, az: &str| {
        VectorPotentialField::parse_strs(
            "-phi0*y/(x*x + y*y)",
            "phi0*x/(x*x + y*y)",
            az,
            None,
            1.0,
            params(&[("phi0", phi0)]),
        )
        .unwrap()
    };
    let h = em_surface_hamiltonian(&g, &field(0.5, "0"), 1.0, 1.0).unwrap();
    let rep = solve_spectrum(&h, 4).unwrap();
    // Angular part of the ground family must be (1/2)²/2 = 1/8 within 1%.
    let ez = transverse_level(1.0, 1.0, 2.0 * std::f64::consts::PI, 8, 1);
    let ang = rep.eigenvalues[0] - ez + 0.125;
    let shift_ok = (ang - 0.125).abs() <= 0.01 * 0.125;
    // Gauge transformation χ = 0.7z: spectrum invariant to roundoff.
    let h2 = em_surface_hamiltonian(&g, &field(0.5, "0.7"), 1.0, 1.0).unwrap();
    let rep2 = solve_spectrum(&h2, 4).unwrap();
    let gauge_dev = rep
        .eigenvalues
        .iter()
        .zip(&rep2.eigenvalues)
        .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
        .fold(0.0f64, f64::max);
    let ok = shift_ok && gauge_dev <= 1e-12;
    report(
        6,
        "cylinder flux",
        ok,
        &format!("angular family {ang:.6} vs 0.125, gauge deviation {gauge_dev:.2e}"),
    );
}

#[test]
fn acceptance_07_torus_self_convergence() {
    let torus = builtin_chart("torus", &params(&[("R", 2.0), ("r", 1.0)])).unwrap();
    let mut pairs = Vec::new();
    let mut finest = Vec::new();
    for n in [12usize, 24, 48] {
        let g = build_grid(&torus, n, n).unwrap();
        let rep = solve_spectrum(&surface_hamiltonian(&g, 1.0, 1.0).unwrap(), 6).unwrap();
        pairs.push((g.axis1.h, rep.eigenvalues[0]));
        finest = rep.eigenvalues;
    }
    let ratio = (pairs[0].1 - pairs[1].1) / (pairs[1].1 - pairs[2].1);
    let (limit, _) = richardson_extrapolate(&pairs, 2).unwrap();
    let close = (limit - pairs[2].1).abs() <= 0.005 * pairs[2].1.abs();
    // Per-angular-mode 1D oracle.
    let mut oracle = Vec::new();
    for m in -3i64..=3 {
        let op = surfq_core::experiments::sector_surface_hamiltonian(&torus, 512, m, 1.0, 1.0, true)
            .unwrap();
        oracle.extend(solve_spectrum(&op, 4).unwrap().eigenvalues);
    }
    oracle.sort_by(f64::total_cmp);
    let scale = oracle[..5].iter().map(|e| e.abs()).sum::<f64>() / 5.0;
    let oracle_dev = finest
        .iter()
        .zip(&oracle)
        .take(5)
        .map(|(&e, &r)| (e - r).abs() / r.abs().max(scale))
        .fold(0.0f64, f64::max);
    let ok = (3.5..=4.5).contains(&ratio) && close && oracle_dev <= 0.01;
    report(
        7,
        "torus self-convergence",
        ok,
        &format!("error ratio {ratio:.2}, extrapolant gap {:.2e}, oracle deviation {oracle_dev:.2e}",
            (limit - pairs[2].1).abs()),
    );
}

#[test]
fn acceptance_08_thin_layer_convergence() {
    let t0 = Instant::now();
    let torus = builtin_chart("torus", &params(&[("R", 2.0), ("r", 1.0)])).unwrap();
    let rep = thin_layer_convergence(&torus, 0, &[0.2, 0.1, 0.05], 16, 128, 1.0, 1.0, 5)
        .unwrap();
    let dt = t0.elapsed().as_secs_f64();
    let ok = rep.matches_with_vgeo && rep.beats_without_vgeo && rep.linear_fit_ok && dt < 60.0;
    report(
        8,
        "thin-layer convergence",
        ok,
        &format!(
            "errors with V_geo {:?}, without {:?}, fit {:.2e}, {dt:.1}s",
            rep.errors_with_vgeo
                .iter()
                .map(|e| format!("{e:.4}"))
                .collect::<Vec<_>>(),
            rep.errors_without_vgeo
                .iter()
                .map(|e| format!("{e:.4}"))
                .collect::<Vec<_>>(),
            rep.linear_fit_residual
        ),
    );
}

#[test]
fn acceptance_09_cross_term_identity() {
    let torus = builtin_chart("torus", &params(&[("R", 2.0), ("r", 1.0)])).unwrap();
    let pts = sample_layer_points(&torus, 20, 0.3, 42).unwrap();
    let res = cross_term_identity_check(&torus, &pts, &default_test_bank(), 1.0).unwrap();
    // Closed-form spot check on the cylinder.
    let cylinder = builtin_chart("cylinder", &params(&[("R", 1.0)])).unwrap();
    let tf = TestFunction::new("cos(u2)", U3Factor::Linear).unwrap();
    let (lhs, rhs) = cross_term_pointwise(&cylinder, 1.0, 0.7, 0.2, &tf, 1.0).unwrap();
    let gamma: f64 = 0.8;
    let rhs_cf = -(0.5 / (gamma * gamma)) * 0.7f64.cos() * 0.2;
    let cyl_ok = (rhs - rhs_cf).abs() <= 1e-10 && (lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1.0);
    let ok = res <= 1e-6 && cyl_ok;
    report(
        9,
        "cross-term identity",
        ok,
        &format!("torus bank residual {res:.2e}, cylinder lhs−rhs {:.2e}", (lhs - rhs).abs()),
    );
}

#[test]
fn acceptance_10_tlq_transform() {
    let torus = builtin_chart("torus", &params(&[("R", 2.0), ("r", 1.0)])).unwrap();
    let mut cfg = LayerConfig::new(12, 4, 6, 0.2, 1.0, 1.0);
    cfg.sector = Some(0);
    let rep = tlq_transform_check(&torus, &cfg).unwrap();
    let sum_res = hermiticity_residual(&layer_hamiltonian(&torus, &cfg).unwrap());
    let ok = rep.surface_pre >= 1e-3
        && rep.normal_pre >= 1e-3
        && rep.surface_post <= 1e-10
        && rep.normal_post <= 1e-10
        && sum_res <= 1e-12;
    report(
        10,
        "TLQ transform",
        ok,
        &format!(
            "pre ({:.2e}, {:.2e}), post ({:.2e}, {:.2e}), sum {sum_res:.2e}",
            rep.surface_pre, rep.normal_pre, rep.surface_post, rep.normal_post
        ),
    );
}
