//! Surface charts: parametrization expressions plus domain metadata.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::expr::{Expr, VarValues};
use super::jet::Jet;
use crate::error::{Error, Result};

/// Domain of one chart coordinate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub periodic: bool,
}

impl AxisSpec {
    pub fn periodic(min: f64, max: f64) -> Self {
        AxisSpec { min, max, periodic: true }
    }

    pub fn hard_wall(min: f64, max: f64) -> Self {
        AxisSpec { min, max, periodic: false }
    }

    pub fn length(&self) -> f64 {
        self.max - self.min
    }

    fn validate(&self, which: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::InvalidParameter(format!(
                "{which} domain [{}, {}] is not a finite nonempty interval",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// A parametrized surface x(u1,u2), y(u1,u2), z(u1,u2) with its domain.
#[derive(Clone, Debug)]
pub struct SurfaceChart {
    pub x: Expr,
    pub y: Expr,
    pub z: Expr,
    pub u1: AxisSpec,
    pub u2: AxisSpec,
    pub params: BTreeMap<String, f64>,
}

/// On-disk JSON form of a chart.
#[derive(Serialize, Deserialize)]
struct ChartFile {
    x: String,
    y: String,
    z: String,
    u1: AxisSpec,
    u2: AxisSpec,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

/// Built-in chart names accepted by [`builtin_chart`].
pub const BUILTIN_NAMES: [&str; 5] = ["plane", "sphere", "cylinder", "torus", "catenoid"];

impl SurfaceChart {
    pub fn new(
        x: Expr,
        y: Expr,
        z: Expr,
        u1: AxisSpec,
        u2: AxisSpec,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        u1.validate("u1")?;
        u2.validate("u2")?;
        let chart = SurfaceChart { x, y, z, u1, u2, params };
        for (name, e) in [("x", &chart.x), ("y", &chart.y), ("z", &chart.z)] {
            for p in e.parameters() {
                if !chart.params.contains_key(&p) {
                    return Err(Error::InvalidParameter(format!(
                        "{name} references unbound parameter `{p}`"
                    )));
                }
            }
        }
        Ok(chart)
    }

    pub fn parse_strs(
        x: &str,
        y: &str,
        z: &str,
        u1: AxisSpec,
        u2: AxisSpec,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        SurfaceChart::new(Expr::parse(x)?, Expr::parse(y)?, Expr::parse(z)?, u1, u2, params)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ChartFile = serde_json::from_str(text)?;
        SurfaceChart::parse_strs(&f.x, &f.y, &f.z, f.u1, f.u2, f.params)
    }

    pub fn to_json(&self) -> Result<String> {
        let f = ChartFile {
            x: self.x.to_string(),
            y: self.y.to_string(),
            z: self.z.to_string(),
            u1: self.u1,
            u2: self.u2,
            params: self.params.clone(),
        };
        Ok(serde_json::to_string_pretty(&f)?)
    }

    /// Embedding position at a point.
    pub fn position(&self, u1: f64, u2: f64) -> Result<[f64; 3]> {
        let vars = VarValues::surface(u1, u2);
        Ok([
            self.x.eval(&vars, &self.params)?,
            self.y.eval(&vars, &self.params)?,
            self.z.eval(&vars, &self.params)?,
        ])
    }

    /// Third-order jets of the three embedding components about a point.
    pub fn position_jets(&self, u1: f64, u2: f64) -> Result<[Jet; 3]> {
        Ok([
            self.x.eval_jet(u1, u2, None, &self.params)?,
            self.y.eval_jet(u1, u2, None, &self.params)?,
            self.z.eval_jet(u1, u2, None, &self.params)?,
        ])
    }

    pub fn contains(&self, u1: f64, u2: f64) -> bool {
        let in1 = if self.u1.periodic {
            true
        } else {
            u1 > self.u1.min && u1 < self.u1.max
        };
        let in2 = if self.u2.periodic {
            true
        } else {
            u2 > self.u2.min && u2 < self.u2.max
        };
        in1 && in2
    }

    /// Check value-and-derivative continuity of the embedding across each
    /// periodic seam at `n_samples` stations along the other coordinate.
    pub fn check_seams(&self, n_samples: usize) -> Result<()> {
        let tol = 1e-10;
        for axis in [0usize, 1] {
            let (spec, other) = if axis == 0 { (self.u1, self.u2) } else { (self.u2, self.u1) };
            if !spec.periodic {
                continue;
            }
            for s in 0..n_samples {
                let t = other.min + (s as f64 + 0.5) / n_samples as f64 * other.length();
                let (a1, a2, b1, b2) = if axis == 0 {
                    (spec.min, t, spec.max, t)
                } else {
                    (t, spec.min, t, spec.max)
                };
                let ja = self.position_jets(a1, a2)?;
                let jb = self.position_jets(b1, b2)?;
                let mut scale: f64 = 1.0;
                for c in 0..3 {
                    for i in 0..=1 {
                        for j in 0..=(1 - i) {
                            scale = scale.max(ja[c].partial(i, j).abs());
                        }
                    }
                }
                for c in 0..3 {
                    for i in 0..=1 {
                        for j in 0..=(1 - i) {
                            let diff = (ja[c].partial(i, j) - jb[c].partial(i, j)).abs();
                            if diff > tol * scale {
                                return Err(Error::Invalid(format!(
                                    "periodic seam mismatch on u{} at parameter {t}: \
                                     |Δ∂^({i},{j})| = {diff:.3e}",
                                    axis + 1
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn get_param(params: &BTreeMap<String, f64>, name: &str, default: Option<f64>) -> Result<f64> {
    match (params.get(name), default) {
        (Some(&v), _) => Ok(v),
        (None, Some(v)) => Ok(v),
        (None, None) => Err(Error::InvalidParameter(format!("missing parameter `{name}`"))),
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("parameter `{name}` must be positive, got {v}")))
    }
}

/// Standard parametrizations, with periodicity flags set accordingly:
///
/// - `plane`: x=u1, y=u2, z=0, both axes periodic on [0, L) (L defaults 2π)
/// - `sphere`: radius R, u1 = polar θ ∈ (0, π) hard-wall, u2 = azimuth periodic
/// - `cylinder`: radius R, u1 = z ∈ [0, L] hard-wall (L defaults 2π), u2 = φ periodic
/// - `torus`: radii R > r > 0, u1 = poloidal and u2 = toroidal, both periodic
/// - `catenoid`: waist radius R, x = R cosh(u1/R) cos u2, u1 ∈ [−R, R] hard-wall
pub fn builtin_chart(name: &str, params: &BTreeMap<String, f64>) -> Result<SurfaceChart> {
    use std::f64::consts::PI;
    let two_pi = 2.0 * PI;
    match name {
        "plane" => {
            let l = positive("L", get_param(params, "L", Some(two_pi))?)?;
            let mut p = BTreeMap::new();
            p.insert("L".to_string(), l);
            SurfaceChart::parse_strs(
                "u1",
                "u2",
                "0",
                AxisSpec::periodic(0.0, l),
                AxisSpec::periodic(0.0, l),
                p,
            )
        }
        "sphere" => {
            let r = positive("R", get_param(params, "R", None)?)?;
            let mut p = BTreeMap::new();
            p.insert("R".to_string(), r);
            SurfaceChart::parse_strs(
                "R*sin(u1)*cos(u2)",
                "R*sin(u1)*sin(u2)",
                "R*cos(u1)",
                AxisSpec::hard_wall(0.0, PI),
                AxisSpec::periodic(0.0, two_pi),
                p,
            )
        }
        "cylinder" => {
            let r = positive("R", get_param(params, "R", None)?)?;
            let l = positive("L", get_param(params, "L", Some(two_pi))?)?;
            let mut p = BTreeMap::new();
            p.insert("R".to_string(), r);
            p.insert("L".to_string(), l);
            SurfaceChart::parse_strs(
                "R*cos(u2)",
                "R*sin(u2)",
                "u1",
                AxisSpec::hard_wall(0.0, l),
                AxisSpec::periodic(0.0, two_pi),
                p,
            )
        }
        "torus" => {
            let big_r = positive("R", get_param(params, "R", None)?)?;
            let small_r = positive("r", get_param(params, "r", None)?)?;
            if small_r >= big_r {
                return Err(Error::InvalidParameter(format!(
                    "torus requires R > r > 0, got R = {big_r}, r = {small_r}"
                )));
            }
            let mut p = BTreeMap::new();
            p.insert("R".to_string(), big_r);
            p.insert("r".to_string(), small_r);
            SurfaceChart::parse_strs(
                "(R+r*cos(u1))*cos(u2)",
                "(R+r*cos(u1))*sin(u2)",
                "r*sin(u1)",
                AxisSpec::periodic(0.0, two_pi),
                AxisSpec::periodic(0.0, two_pi),
                p,
            )
        }
        "catenoid" => {
            let r = positive("R", get_param(params, "R", None)?)?;
            let mut p = BTreeMap::new();
            p.insert("R".to_string(), r);
            SurfaceChart::parse_strs(
                "R*cosh(u1/R)*cos(u2)",
                "R*cosh(u1/R)*sin(u2)",
                "u1",
                AxisSpec::hard_wall(-r, r),
                AxisSpec::periodic(0.0, two_pi),
                p,
            )
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown builtin chart `{other}` (expected one of {BUILTIN_NAMES:?})"
        ))),
    }
}
