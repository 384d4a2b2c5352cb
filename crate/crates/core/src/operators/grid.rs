//! Structured 2D grids over a surface chart.
//!
//! Periodic axes are node-centered on [min, max); hard-wall axes are
//! cell-centered strictly inside (min, max), so poles and other boundary
//! degeneracies never coincide with a node. Node weights carry the surface
//! measure: w_i = √g_i · h1 · h2.

use crate::dsl::SurfaceChart;
use crate::error::{Error, Result};
use crate::geometry::{fundamental_forms, SurfacePoint};

/// One discretized coordinate axis.
#[derive(Clone, Copy, Debug)]
pub struct GridAxis {
    pub n: usize,
    pub h: f64,
    pub min: f64,
    pub max: f64,
    pub periodic: bool,
}

impl GridAxis {
    pub(crate) fn from_spec(spec: crate::dsl::AxisSpec, n: usize) -> Result<GridAxis> {
        if n < 4 {
            return Err(Error::Grid(format!("axis needs at least 4 nodes, got {n}")));
        }
        Ok(GridAxis {
            n,
            h: (spec.max - spec.min) / n as f64,
            min: spec.min,
            max: spec.max,
            periodic: spec.periodic,
        })
    }

    /// Coordinate of node `i`: node-centered for periodic axes,
    /// cell-centered for hard-wall axes.
    pub fn coord(&self, i: usize) -> f64 {
        if self.periodic {
            self.min + i as f64 * self.h
        } else {
            self.min + (i as f64 + 0.5) * self.h
        }
    }
}

/// Surface grid with precomputed geometry at every node.
#[derive(Clone, Debug)]
pub struct Grid2 {
    pub chart: SurfaceChart,
    pub axis1: GridAxis,
    pub axis2: GridAxis,
    pub points: Vec<SurfacePoint>,
    pub weights: Vec<f64>,
}

impl Grid2 {
    pub fn len(&self) -> usize {
        self.axis1.n * self.axis2.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i1: usize, i2: usize) -> usize {
        i1 * self.axis2.n + i2
    }

    pub fn coords_of(&self, idx: usize) -> (usize, usize) {
        (idx / self.axis2.n, idx % self.axis2.n)
    }

    /// Index of the neighbor one step along `axis` (0 or 1), or None past a
    /// hard wall.
    pub fn neighbor(&self, idx: usize, axis: usize, step: i64) -> Option<usize> {
        let (i1, i2) = self.coords_of(idx);
        let (i, ax) = if axis == 0 { (i1, self.axis1) } else { (i2, self.axis2) };
        let n = ax.n as i64;
        let j = i as i64 + step;
        let j = if ax.periodic {
            j.rem_euclid(n)
        } else if (0..n).contains(&j) {
            j
        } else {
            return None;
        } as usize;
        Some(if axis == 0 { self.idx(j, i2) } else { self.idx(i1, j) })
    }

    pub fn point(&self, i1: usize, i2: usize) -> &SurfacePoint {
        &self.points[self.idx(i1, i2)]
    }
}

/// Evaluate geometry at every node of an n1×n2 grid over the chart.
///
/// Fails with a degenerate-node error naming (i, j) when √g ≤ 1e−8 at any
/// proposed node.
pub fn build_grid(chart: &SurfaceChart, n1: usize, n2: usize) -> Result<Grid2> {
    let axis1 = GridAxis::from_spec(chart.u1, n1)?;
    let axis2 = GridAxis::from_spec(chart.u2, n2)?;
    let mut points = Vec::with_capacity(n1 * n2);
    let mut weights = Vec::with_capacity(n1 * n2);
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let p = fundamental_forms(chart, axis1.coord(i1), axis2.coord(i2))
                .map_err(|e| match e {
                    Error::DegenerateMetric { .. } => Error::DegenerateNode { i: i1, j: i2 },
                    other => other,
                })?;
            weights.push(p.sqrt_g * axis1.h * axis2.h);
            points.push(p);
        }
    }
    Ok(Grid2 { chart: chart.clone(), axis1, axis2, points, weights })
}
