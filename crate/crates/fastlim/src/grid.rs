//! Uniform tensor-product grids (1-D and 2-D) and nodal scalar fields.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// One grid axis: closed interval [lo, hi] sampled at n equispaced nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub h: f64,
}

impl Axis {
    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.h
        }
    }
}

/// Uniform grid over a 1-D interval or a 2-D axis-aligned rectangle.
///
/// Node ordering is lexicographic in the axis indices: in 2-D the linear
/// index is `ix * ny + iy`, so axis 0 (x) is the slow index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    /// Coordinates of the node with linear index `idx`.
    pub fn node(&self, idx: usize) -> (f64, f64) {
        match self.axes.len() {
            1 => (self.axes[0].coord(idx), 0.0),
            2 => {
                let ny = self.axes[1].n;
                let ix = idx / ny;
                let iy = idx % ny;
                (self.axes[0].coord(ix), self.axes[1].coord(iy))
            }
            _ => unreachable!("grids are 1-D or 2-D"),
        }
    }

    /// Trapezoidal quadrature weight of node `idx`, including the h^n factor.
    pub fn quad_weight(&self, idx: usize) -> f64 {
        let mut w = 1.0;
        match self.axes.len() {
            1 => {
                let a = &self.axes[0];
                w *= a.h * if idx == 0 || idx + 1 == a.n { 0.5 } else { 1.0 };
            }
            2 => {
                let ny = self.axes[1].n;
                let ix = idx / ny;
                let iy = idx % ny;
                let ax = &self.axes[0];
                let ay = &self.axes[1];
                w *= ax.h * if ix == 0 || ix + 1 == ax.n { 0.5 } else { 1.0 };
                w *= ay.h * if iy == 0 || iy + 1 == ay.n { 0.5 } else { 1.0 };
            }
            _ => unreachable!(),
        }
        w
    }
}

/// Build a uniform grid. Extents are (lo, hi) per axis; every axis needs at
/// least 3 nodes so the interior Laplacian stencil exists.
pub fn build_grid(extents: &[(f64, f64)], points: &[usize]) -> Result<Arc<Grid>> {
    if extents.is_empty() || extents.len() > 2 {
        return Err(Error::Config(format!(
            "grid must be 1-D or 2-D, got {} axes",
            extents.len()
        )));
    }
    if extents.len() != points.len() {
        return Err(Error::Config(
            "extents and points-per-axis length mismatch".into(),
        ));
    }
    let mut axes = Vec::with_capacity(extents.len());
    for (&(lo, hi), &n) in extents.iter().zip(points) {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("degenerate extent ({lo}, {hi})")));
        }
        if n < 3 {
            return Err(Error::Config(format!(
                "need at least 3 points per axis, got {n}"
            )));
        }
        axes.push(Axis {
            lo,
            hi,
            n,
            h: (hi - lo) / (n - 1) as f64,
        });
    }
    Ok(Arc::new(Grid { axes }))
}

/// Grid function: one value per node plus a time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
    pub t: f64,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, t: f64) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::Config(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("field contains non-finite values".into()));
        }
        Ok(Field { grid, values, t })
    }

    pub fn zeros(grid: Arc<Grid>, t: f64) -> Self {
        let n = grid.node_count();
        Field {
            grid,
            values: vec![0.0; n],
            t,
        }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Arc<Grid>, t: f64, f: F) -> Self {
        let values = (0..grid.node_count())
            .map(|i| {
                let (x, y) = grid.node(i);
                f(x, y)
            })
            .collect();
        Field { grid, values, t }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Trapezoidal mass: sum of values weighted by h^n with half cells at
    /// the domain boundary. This is the quantity the Neumann diffusion step
    /// conserves exactly.
    pub fn mass(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.grid.quad_weight(i))
            .sum()
    }

    pub fn sup_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_1d_example() {
        let g = build_grid(&[(-1.0, 1.0)], &[5]).unwrap();
        assert_eq!(g.axes[0].h, 0.5);
        let xs: Vec<f64> = (0..5).map(|i| g.node(i).0).collect();
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn grid_2d_example() {
        let g = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[3, 3]).unwrap();
        assert_eq!(g.node_count(), 9);
        assert_eq!(g.axes[0].h, 0.5);
        assert_eq!(g.axes[1].h, 0.5);
        // lexicographic ordering: ix slow, iy fast
        assert_eq!(g.node(1), (0.0, 0.5));
        assert_eq!(g.node(3), (0.5, 0.0));
    }

    #[test]
    fn grid_rejects_two_points() {
        assert!(build_grid(&[(-1.0, 1.0)], &[2]).is_err());
    }

    #[test]
    fn grid_rejects_degenerate_extent() {
        assert!(build_grid(&[(1.0, 1.0)], &[5]).is_err());
    }

    #[test]
    fn grid_deterministic() {
        let a = build_grid(&[(-1.0, 1.0), (0.0, 2.0)], &[17, 9]).unwrap();
        let b = build_grid(&[(-1.0, 1.0), (0.0, 2.0)], &[17, 9]).unwrap();
        for i in 0..a.node_count() {
            assert_eq!(a.node(i), b.node(i));
        }
    }

    #[test]
    fn trapezoid_mass_of_constant_is_volume() {
        let g = build_grid(&[(0.0, 2.0), (0.0, 1.0)], &[21, 11]).unwrap();
        let f = Field::from_fn(g, 0.0, |_, _| 3.0);
        assert!((f.mass() - 6.0).abs() < 1e-12);
    }
}
