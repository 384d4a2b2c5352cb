//! `surfq`: command-line front end for the curved-surface quantum toolkit.
//!
//! Exit codes: 0 success, 1 contract failure (`verify`), 2 usage error,
//! 3 numerical-domain error. All reports are JSON (optionally CSV) and
//! embed the fully resolved run configuration for provenance.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use surfq_core::dsl::{builtin_chart, SurfaceChart, BUILTIN_NAMES};
use surfq_core::experiments::{
    cross_term_identity_check, default_test_bank, psquared_expansion_report,
    sample_layer_points, thin_layer_convergence, tlq_transform_check,
};
use surfq_core::geometry::{
    divergence_identity_residual, fundamental_forms, geometric_potential, limit_checks,
};
use surfq_core::operators::{
    build_grid, em_surface_hamiltonian, geometric_momentum, hermiticity_residual,
    laplace_beltrami, layer_hamiltonian, surface_hamiltonian, write_matrix_market,
    LayerConfig, VectorPotentialField,
};
use surfq_core::spectra::{
    cluster_degeneracies, solve_spectrum, SpectrumReport, CLUSTER_REL_TOL,
};

#[derive(Parser)]
#[command(name = "surfq", version, about = "Quantum mechanics on curved surfaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Emit errors as JSON on stderr.
    #[arg(long, global = true)]
    errors_json: bool,
    /// Omit the timestamp from reports (byte-identical reruns).
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Args, Clone)]
struct ChartArgs {
    /// Builtin chart name (plane, sphere, cylinder, torus, catenoid) or a
    /// chart JSON file path.
    #[arg(long)]
    chart: String,
    /// Comma-separated chart parameters, e.g. R=2,r=1.
    #[arg(long, default_value = "")]
    params: String,
}

#[derive(Args, Clone, Copy)]
struct PhysicsArgs {
    /// Reduced Planck constant.
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// Particle mass.
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pointwise geometry: metric, curvatures, geometric potential.
    Geom {
        #[command(flatten)]
        chart: ChartArgs,
        /// Evaluation point "u1,u2".
        #[arg(long)]
        at: String,
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Geometric potential sampled over a grid.
    Potential {
        #[command(flatten)]
        chart: ChartArgs,
        /// Grid "N1xN2" (or "N" for square).
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write u1,u2,M,K,V_geo rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Assemble an operator and export it in Matrix Market format.
    Assemble {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long)]
        grid: String,
        /// surface | laplace | momentum-x | momentum-y | momentum-z | em
        #[arg(long, default_value = "surface")]
        operator: String,
        /// Field JSON file (required for `em`).
        #[arg(long)]
        field: Option<PathBuf>,
        #[command(flatten)]
        physics: PhysicsArgs,
        /// Output .mtx path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Surface Hamiltonian spectrum.
    Spectrum {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 8)]
        count: usize,
        /// Degeneracy clustering tolerance (relative).
        #[arg(long)]
        cluster_tol: Option<f64>,
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write index,eigenvalue,cluster_id,multiplicity rows.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Spectrum with minimal EM coupling via per-link Peierls phases.
    EmSpectrum {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 8)]
        count: usize,
        /// Field JSON file with Ax, Ay, Az (and optional V, q, params).
        #[arg(long)]
        field: PathBuf,
        /// Override the charge from the field file.
        #[arg(long)]
        charge: Option<f64>,
        #[arg(long)]
        cluster_tol: Option<f64>,
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Thin-layer squeezing experiment on an axisymmetric chart.
    ThinLayer {
        #[command(flatten)]
        chart: ChartArgs,
        /// Angular sector, "m=0" or a bare integer.
        #[arg(long, default_value = "m=0")]
        sector: String,
        /// Comma-separated decreasing thicknesses, e.g. 0.2,0.1,0.05.
        #[arg(long)]
        d: String,
        #[arg(long, default_value_t = 16)]
        n3: usize,
        /// Surface resolution n1 shared by the layer and the references.
        #[arg(long, default_value_t = 128)]
        surface_grid: usize,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; exits 1 on any failed contract.
    Verify {
        /// identities | tlq | all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A usage-level error (exit 2), as opposed to a numerical-domain error.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<surfq_core::Error>() {
        Some(
            surfq_core::Error::Domain { .. }
            | surfq_core::Error::DegenerateMetric { .. }
            | surfq_core::Error::DegenerateNode { .. }
            | surfq_core::Error::Caustic { .. }
            | surfq_core::Error::NonHermitian { .. }
            | surfq_core::Error::Solver(_),
        ) => 3,
        _ => 2,
    }
}

fn parse_params(text: &str) -> anyhow::Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for piece in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, val) = piece
            .split_once('=')
            .ok_or_else(|| usage(format!("expected name=value in --params, got `{piece}`")))?;
        let v: f64 = val
            .trim()
            .parse()
            .map_err(|_| usage(format!("parameter `{key}` has non-numeric value `{val}`")))?;
        out.insert(key.trim().to_string(), v);
    }
    Ok(out)
}

fn load_chart(args: &ChartArgs) -> anyhow::Result<(SurfaceChart, Value)> {
    let params = parse_params(&args.params)?;
    if BUILTIN_NAMES.contains(&args.chart.as_str()) {
        let chart = builtin_chart(&args.chart, &params)?;
        let resolved = json!({
            "builtin": args.chart,
            "params": chart.params,
        });
        return Ok((chart, resolved));
    }
    let text = std::fs::read_to_string(&args.chart)
        .map_err(|e| usage(format!("cannot read chart file `{}`: {e}", args.chart)))?;
    let base = SurfaceChart::from_json(&text)?;
    let mut merged = base.params.clone();
    for (k, v) in params {
        merged.insert(k, v);
    }
    let chart = SurfaceChart::new(base.x, base.y, base.z, base.u1, base.u2, merged)?;
    let resolved = json!({
        "file": args.chart,
        "params": chart.params,
    });
    Ok((chart, resolved))
}

fn parse_grid(text: &str) -> anyhow::Result<(usize, usize)> {
    let parse_one = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| usage(format!("bad grid size `{s}`")))
    };
    match text.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse_one(a)?, parse_one(b)?)),
        None => {
            let n = parse_one(text)?;
            Ok((n, n))
        }
    }
}

fn parse_at(text: &str) -> anyhow::Result<(f64, f64)> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| usage(format!("--at expects `u1,u2`, got `{text}`")))?;
    let p = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("bad coordinate `{s}` in --at")))
    };
    Ok((p(a)?, p(b)?))
}

fn parse_sector(text: &str) -> anyhow::Result<i64> {
    let raw = text.strip_prefix("m=").unwrap_or(text);
    raw.trim()
        .parse()
        .map_err(|_| usage(format!("--sector expects `m=<int>` or an integer, got `{text}`")))
}

fn parse_d_list(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad thickness `{s}` in --d")))
        })
        .collect()
}

fn load_field(path: &PathBuf, charge: Option<f64>) -> anyhow::Result<VectorPotentialField> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read field file `{}`: {e}", path.display())))?;
    let mut field = VectorPotentialField::from_json(&text)?;
    if let Some(q) = charge {
        field.q = q;
    }
    Ok(field)
}

fn emit(report: &Value, out: &Option<PathBuf>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| usage(format!("cannot write `{}`: {e}", path.display())))?,
        None => {
            // Ignore broken pipes so `surfq ... | head` exits cleanly.
            use std::io::Write as _;
            let _ = writeln!(std::io::stdout(), "{text}");
        }
    }
    Ok(())
}

fn write_csv(path: &PathBuf, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text)
        .map_err(|e| usage(format!("cannot write `{}`: {e}", path.display())))
}

fn finish(mut report: Value, no_timestamp: bool, out: &Option<PathBuf>) -> anyhow::Result<()> {
    if !no_timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        report["timestamp_unix"] = json!(secs);
    }
    emit(&report, out)
}

/// index,eigenvalue,cluster_id,multiplicity rows for a solved spectrum.
fn spectrum_csv(rep: &SpectrumReport) -> String {
    let mut cluster_of = Vec::new();
    for (cid, c) in rep.clusters.iter().enumerate() {
        for _ in 0..c.multiplicity {
            cluster_of.push(cid);
        }
    }
    let mut out = String::from("index,eigenvalue,cluster_id,multiplicity\n");
    for (i, &e) in rep.eigenvalues.iter().enumerate() {
        let cid = cluster_of.get(i).copied().unwrap_or(0);
        let mult = rep.clusters.get(cid).map(|c| c.multiplicity).unwrap_or(1);
        let _ = writeln!(out, "{i},{e:.17e},{cid},{mult}");
    }
    out
}

fn recluster(rep: &mut SpectrumReport, tol: Option<f64>) {
    if let Some(t) = tol {
        rep.clusters = cluster_degeneracies(&rep.eigenvalues, t);
    }
}

fn configure_threads() {
    if let Ok(raw) = std::env::var("SURFQ_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(0) | Err(_) => {}
            Ok(1) => faer::set_global_parallelism(faer::Par::Seq),
            Ok(n) => faer::set_global_parallelism(faer::Par::rayon(n)),
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.cmd {
        Cmd::Geom { chart, at, physics, out } => {
            let (c, resolved) = load_chart(chart)?;
            let (u1, u2) = parse_at(at)?;
            let p = fundamental_forms(&c, u1, u2)?;
            let report = json!({
                "config": {
                    "subcommand": "geom",
                    "chart": resolved,
                    "at": [u1, u2],
                    "hbar": physics.hbar,
                    "mass": physics.mass,
                },
                "position": p.position,
                "a1": p.a1,
                "a2": p.a2,
                "n_hat": p.n_hat,
                "g": p.g,
                "g_inv": p.g_inv,
                "sqrt_g": p.sqrt_g,
                "curvature_tensor": p.k,
                "M": p.mean,
                "K": p.gauss,
                "V_geo": geometric_potential(&p, physics.hbar, physics.mass),
                "limits": limit_checks(&p),
            });
            finish(report, cli.no_timestamp, out)?;
            Ok(0)
        }
        Cmd::Potential { chart, grid, physics, out, csv } => {
            let (c, resolved) = load_chart(chart)?;
            let (n1, n2) = parse_grid(grid)?;
            let g = build_grid(&c, n1, n2)?;
            let rows: Vec<Value> = g
                .points
                .iter()
                .map(|p| {
                    json!({
                        "u1": p.u1,
                        "u2": p.u2,
                        "M": p.mean,
                        "K": p.gauss,
                        "V_geo": geometric_potential(p, physics.hbar, physics.mass),
                    })
                })
                .collect();
            if let Some(path) = csv {
                let mut text = String::from("u1,u2,M,K,V_geo\n");
                for p in &g.points {
                    let _ = writeln!(
                        text,
                        "{},{},{:.17e},{:.17e},{:.17e}",
                        p.u1,
                        p.u2,
                        p.mean,
                        p.gauss,
                        geometric_potential(p, physics.hbar, physics.mass)
                    );
                }
                write_csv(path, &text)?;
            }
            let report = json!({
                "config": {
                    "subcommand": "potential",
                    "chart": resolved,
                    "grid": [n1, n2],
                    "hbar": physics.hbar,
                    "mass": physics.mass,
                },
                "nodes": rows,
            });
            finish(report, cli.no_timestamp, out)?;
            Ok(0)
        }
        Cmd::Assemble { chart, grid, operator, field, physics, out } => {
            let (c, resolved) = load_chart(chart)?;
            let (n1, n2) = parse_grid(grid)?;
            let g = build_grid(&c, n1, n2)?;
            let op = match operator.as_str() {
                "surface" => surface_hamiltonian(&g, physics.hbar, physics.mass)?,
                "laplace" => laplace_beltrami(&g)?,
                "momentum-x" => geometric_momentum(&g, 0, physics.hbar)?,
                "momentum-y" => geometric_momentum(&g, 1, physics.hbar)?,
                "momentum-z" => geometric_momentum(&g, 2, physics.hbar)?,
                "em" => {
                    let path = field
                        .as_ref()
                        .ok_or_else(|| usage("--operator em requires --field"))?;
                    let f = load_field(path, None)?;
                    em_surface_hamiltonian(&g, &f, physics.hbar, physics.mass)?
                }
                other => {
                    return Err(usage(format!(
                        "unknown operator `{other}` (surface, laplace, momentum-x/y/z, em)"
                    )))
                }
            };
            let mut file = std::fs::File::create(out)
                .map_err(|e| usage(format!("cannot create `{}`: {e}", out.display())))?;
            write_matrix_market(&op, &mut file)?;
            eprintln!(
                "wrote {} ({}x{}, residual {:.2e}) to {}",
                op.label,
                op.dim(),
                op.dim(),
                hermiticity_residual(&op),
                out.display()
            );
            let _ = resolved;
            Ok(0)
        }
        Cmd::Spectrum { chart, grid, count, cluster_tol, physics, out, csv } => {
            let (c, resolved) = load_chart(chart)?;
            let (n1, n2) = parse_grid(grid)?;
            let g = build_grid(&c, n1, n2)?;
            let h = surface_hamiltonian(&g, physics.hbar, physics.mass)?;
            let mut rep = solve_spectrum(&h, *count)?;
            recluster(&mut rep, *cluster_tol);
            if let Some(path) = csv {
                write_csv(path, &spectrum_csv(&rep))?;
            }
            let report = json!({
                "config": {
                    "subcommand": "spectrum",
                    "chart": resolved,
                    "grid": [n1, n2],
                    "count": count,
                    "cluster_tol": cluster_tol.unwrap_or(CLUSTER_REL_TOL),
                    "hbar": physics.hbar,
                    "mass": physics.mass,
                },
                "spectrum": rep,
            });
            finish(report, cli.no_timestamp, out)?;
            Ok(0)
        }
        Cmd::EmSpectrum {
            chart,
            grid,
            count,
            field,
            charge,
            cluster_tol,
            physics,
            out,
            csv,
        } => {
            let (c, resolved) = load_chart(chart)?;
            let (n1, n2) = parse_grid(grid)?;
            let g = build_grid(&c, n1, n2)?;
            let f = load_field(field, *charge)?;
            let h = em_surface_hamiltonian(&g, &f, physics.hbar, physics.mass)?;
            let mut rep = solve_spectrum(&h, *count)?;
            recluster(&mut rep, *cluster_tol);
            if let Some(path) = csv {
                write_csv(path, &spectrum_csv(&rep))?;
            }
            let report = json!({
                "config": {
                    "subcommand": "em-spectrum",
                    "chart": resolved,
                    "grid": [n1, n2],
                    "count": count,
                    "field": field.display().to_string(),
                    "charge": f.q,
                    "cluster_tol": cluster_tol.unwrap_or(CLUSTER_REL_TOL),
                    "hbar": physics.hbar,
                    "mass": physics.mass,
                },
                "spectrum": rep,
            });
            finish(report, cli.no_timestamp, out)?;
            Ok(0)
        }
        Cmd::ThinLayer { chart, sector, d, n3, surface_grid, levels, physics, out } => {
            let (c, resolved) = load_chart(chart)?;
            let m = parse_sector(sector)?;
            let d_list = parse_d_list(d)?;
            let rep = thin_layer_convergence(
                &c,
                m,
                &d_list,
                *n3,
                *surface_grid,
                physics.hbar,
                physics.mass,
                *levels,
            )?;
            let report = json!({
                "config": {
                    "subcommand": "thin-layer",
                    "chart": resolved,
                    "sector": m,
                    "d": d_list,
                    "n3": n3,
                    "surface_grid": surface_grid,
                    "levels": levels,
                    "hbar": physics.hbar,
                    "mass": physics.mass,
                },
                "convergence": rep,
            });
            finish(report, cli.no_timestamp, out)?;
            Ok(0)
        }
        Cmd::Verify { suite, out } => {
            let checks = match suite.as_str() {
                "identities" => verify_identities()?,
                "tlq" => verify_tlq()?,
                "all" => {
                    let mut v = verify_identities()?;
                    v.extend(verify_tlq()?);
                    v.extend(verify_squeeze()?);
                    v
                }
                other => {
                    return Err(usage(format!(
                        "unknown suite `{other}` (identities, tlq, all)"
                    )))
                }
            };
            let passed = checks.iter().all(|c| c["pass"].as_bool() == Some(true));
            for c in &checks {
                eprintln!(
                    "{} {}: {}",
                    if c["pass"].as_bool() == Some(true) { "PASS" } else { "FAIL" },
                    c["name"].as_str().unwrap_or("?"),
                    c["detail"].as_str().unwrap_or("")
                );
            }
            let report = json!({
                "config": { "subcommand": "verify", "suite": suite },
                "checks": checks,
                "passed": passed,
            });
            finish(report, cli.no_timestamp, out)?;
            Ok(if passed { 0 } else { 1 })
        }
    }
}

fn check(name: &str, pass: bool, detail: String) -> Value {
    json!({ "name": name, "pass": pass, "detail": detail })
}

fn verify_identities() -> anyhow::Result<Vec<Value>> {
    let mut out = Vec::new();
    let torus = builtin_chart("torus", &[("R".to_string(), 2.0), ("r".to_string(), 1.0)].into())?;
    let plane = builtin_chart("plane", &BTreeMap::new())?;
    let sphere = builtin_chart("sphere", &[("R".to_string(), 1.0)].into())?;

    let bank = default_test_bank();
    let pts = sample_layer_points(&torus, 20, 0.3, 42)?;
    let res = cross_term_identity_check(&torus, &pts, &bank, 1.0)?;
    out.push(check("cross-term identity (torus)", res <= 1e-6, format!("max residual {res:.2e}")));
    let pts = sample_layer_points(&plane, 10, 0.3, 7)?;
    let res = cross_term_identity_check(&plane, &pts, &bank, 1.0)?;
    out.push(check("cross-term identity (plane)", res <= 1e-12, format!("max residual {res:.2e}")));

    let mut div_max: f64 = 0.0;
    for &(u1, u2, u3) in &sample_layer_points(&torus, 50, 0.1, 3)? {
        for v in divergence_identity_residual(&torus, u1, u2, u3)? {
            div_max = div_max.max(v.abs());
        }
    }
    out.push(check("frame divergence identity", div_max <= 1e-8, format!("max residual {div_max:.2e}")));

    let rep = psquared_expansion_report(&plane, (12, 12), (16, 16), 1.0, 1.0)?;
    out.push(check(
        "squared-momentum expansion (plane)",
        rep.coarse_residual <= 1e-10 && rep.fine_residual <= 1e-10,
        format!("residuals {:.2e}, {:.2e}", rep.coarse_residual, rep.fine_residual),
    ));
    let rep = psquared_expansion_report(&sphere, (16, 8), (32, 16), 1.0, 1.0)?;
    out.push(check(
        "squared-momentum expansion (sphere, order 2)",
        rep.ratio > 2.5 && rep.ratio < 6.0,
        format!("ratio {:.2}", rep.ratio),
    ));

    let mut worst: f64 = 0.0;
    for (chart, u1, u2) in [(&torus, 0.9, 1.7), (&sphere, 1.0, 0.3)] {
        let lr = limit_checks(&fundamental_forms(chart, u1, u2)?);
        worst = worst.max(lr.f_sq_residual).max(lr.d3f_residual);
    }
    out.push(check("u3 -> 0 limits of F", worst <= 1e-6, format!("worst residual {worst:.2e}")));
    Ok(out)
}

fn verify_tlq() -> anyhow::Result<Vec<Value>> {
    let mut out = Vec::new();
    let torus = builtin_chart("torus", &[("R".to_string(), 2.0), ("r".to_string(), 1.0)].into())?;
    let cylinder = builtin_chart("cylinder", &[("R".to_string(), 1.0)].into())?;

    let mut cfg = LayerConfig::new(12, 4, 6, 0.2, 1.0, 1.0);
    cfg.sector = Some(0);
    let rep = tlq_transform_check(&torus, &cfg)?;
    let sum_res = hermiticity_residual(&layer_hamiltonian(&torus, &cfg)?);
    out.push(check(
        "TLQ transform (torus sector)",
        rep.surface_pre >= 1e-3
            && rep.normal_pre >= 1e-3
            && rep.surface_post <= 1e-10
            && rep.normal_post <= 1e-10
            && sum_res <= 1e-12,
        format!(
            "pre ({:.2e}, {:.2e}), post ({:.2e}, {:.2e}), sum {sum_res:.2e}",
            rep.surface_pre, rep.normal_pre, rep.surface_post, rep.normal_post
        ),
    ));

    let cfg = LayerConfig::new(5, 6, 6, 0.2, 1.0, 1.0);
    let rep = tlq_transform_check(&cylinder, &cfg)?;
    out.push(check(
        "TLQ transform (cylinder normal block)",
        rep.normal_pre >= 1e-3 && rep.normal_post <= 1e-10,
        format!("pre {:.2e}, post {:.2e}", rep.normal_pre, rep.normal_post),
    ));
    Ok(out)
}

fn verify_squeeze() -> anyhow::Result<Vec<Value>> {
    let torus = builtin_chart("torus", &[("R".to_string(), 2.0), ("r".to_string(), 1.0)].into())?;
    let rep = thin_layer_convergence(&torus, 0, &[0.2, 0.1, 0.05], 8, 64, 1.0, 1.0, 5)?;
    Ok(vec![check(
        "thin-layer convergence (torus m=0)",
        rep.matches_with_vgeo && rep.beats_without_vgeo && rep.linear_fit_ok,
        format!(
            "errors with V_geo {:?}, fit residual {:.2e}",
            rep.errors_with_vgeo.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>(),
            rep.linear_fit_residual
        ),
    )])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let code = exit_code_for(&err);
            if cli.errors_json {
                eprintln!(
                    "{}",
                    json!({ "error": { "message": err.to_string(), "exit_code": code } })
                );
            } else {
                eprintln!("error: {err}");
            }
            ExitCode::from(code)
        }
    }
}
