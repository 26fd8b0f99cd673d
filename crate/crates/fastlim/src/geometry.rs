//! Geometry of supp(v0): membership, exact signed distance to its boundary,
//! nearest-boundary projection and reflection.
//!
//! Sign convention: the signed distance `rho` is positive outside supp(v0)
//! (i.e. in the non-reactive complement where u diffuses) and negative
//! inside supp(v0). Nodes with rho <= 0 belong to the support.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SupportGeometry {
    /// 1-D: supp(v0) is a finite union of closed intervals touching both
    /// ends of the domain, so the complement is compactly inside.
    Intervals {
        domain: (f64, f64),
        support: Vec<(f64, f64)>,
    },
    /// 2-D: supp(v0) is the closure of the domain minus one open disk.
    DiskComplement { center: (f64, f64), radius: f64 },
    /// 2-D: supp(v0) is the domain minus one open axis-aligned rectangle
    /// with rounded corners (half extents measured to the rounded edge).
    RoundedRectComplement {
        center: (f64, f64),
        half: (f64, f64),
        corner_radius: f64,
    },
}

impl SupportGeometry {
    pub fn dim(&self) -> usize {
        match self {
            SupportGeometry::Intervals { .. } => 1,
            _ => 2,
        }
    }

    /// Validate internal consistency against the computational domain.
    pub fn validate(&self, extents: &[(f64, f64)]) -> Result<()> {
        match self {
            SupportGeometry::Intervals { domain, support } => {
                let (lo, hi) = *domain;
                if extents.len() != 1 || extents[0] != (lo, hi) {
                    return Err(Error::Config(
                        "support geometry domain does not match grid extents".into(),
                    ));
                }
                if support.is_empty() {
                    return Err(Error::Config("empty support".into()));
                }
                let mut iv = support.clone();
                iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                for &(a, b) in &iv {
                    if !(b > a) {
                        return Err(Error::Config(format!("degenerate support interval ({a}, {b})")));
                    }
                    if a < lo - 1e-14 || b > hi + 1e-14 {
                        return Err(Error::Config("support interval outside domain".into()));
                    }
                }
                for w in iv.windows(2) {
                    if w[1].0 <= w[0].1 {
                        return Err(Error::Config("support intervals overlap or touch".into()));
                    }
                }
                // complement compactly contained: both domain ends covered
                if (iv[0].0 - lo).abs() > 1e-14 || (iv.last().unwrap().1 - hi).abs() > 1e-14 {
                    return Err(Error::Config(
                        "support must touch both domain endpoints so the complement is compactly inside".into(),
                    ));
                }
                if iv.len() < 2 {
                    return Err(Error::Config("complement of the support is empty".into()));
                }
                Ok(())
            }
            SupportGeometry::DiskComplement { center, radius } => {
                if extents.len() != 2 {
                    return Err(Error::Config("disk-complement geometry needs a 2-D grid".into()));
                }
                if !(*radius > 0.0) {
                    return Err(Error::Config("disk radius must be positive".into()));
                }
                let (cx, cy) = *center;
                let ((x0, x1), (y0, y1)) = (extents[0], extents[1]);
                if cx - radius <= x0 || cx + radius >= x1 || cy - radius <= y0 || cy + radius >= y1 {
                    return Err(Error::Config("disk must be strictly inside the domain".into()));
                }
                Ok(())
            }
            SupportGeometry::RoundedRectComplement {
                center,
                half,
                corner_radius,
            } => {
                if extents.len() != 2 {
                    return Err(Error::Config("rounded-rect geometry needs a 2-D grid".into()));
                }
                let (hx, hy) = *half;
                let r = *corner_radius;
                if !(hx > 0.0 && hy > 0.0) || !(r > 0.0) || r > hx.min(hy) {
                    return Err(Error::Config(
                        "rounded rectangle needs 0 < corner_radius <= min(half extents)".into(),
                    ));
                }
                let (cx, cy) = *center;
                let ((x0, x1), (y0, y1)) = (extents[0], extents[1]);
                if cx - hx <= x0 || cx + hx >= x1 || cy - hy <= y0 || cy + hy >= y1 {
                    return Err(Error::Config(
                        "rounded rectangle must be strictly inside the domain".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Boundary points of supp(v0) interior to the 1-D domain, ascending.
    pub fn boundary_points_1d(&self) -> Vec<f64> {
        match self {
            SupportGeometry::Intervals { support, .. } => {
                let mut iv = support.clone();
                iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let mut pts = Vec::new();
                for w in iv.windows(2) {
                    pts.push(w[0].1);
                    pts.push(w[1].0);
                }
                pts
            }
            _ => panic!("boundary_points_1d on a 2-D geometry"),
        }
    }

    /// Signed distance to the boundary of supp(v0): positive outside the
    /// support (in the complement), negative inside. |grad rho| = 1 away
    /// from the medial axis.
    pub fn signed_distance(&self, x: f64, y: f64) -> f64 {
        match self {
            SupportGeometry::Intervals { support, .. } => {
                let pts = self.boundary_points_1d();
                let d = pts
                    .iter()
                    .map(|p| (x - p).abs())
                    .fold(f64::INFINITY, f64::min);
                let inside_support = support.iter().any(|&(a, b)| x >= a && x <= b);
                if inside_support {
                    -d
                } else {
                    d
                }
            }
            SupportGeometry::DiskComplement { center, radius } => {
                let d = ((x - center.0).powi(2) + (y - center.1).powi(2)).sqrt();
                radius - d
            }
            SupportGeometry::RoundedRectComplement {
                center,
                half,
                corner_radius,
            } => {
                let r = *corner_radius;
                let bx = half.0 - r;
                let by = half.1 - r;
                let qx = (x - center.0).abs() - bx;
                let qy = (y - center.1).abs() - by;
                let outside = (qx.max(0.0).powi(2) + qy.max(0.0).powi(2)).sqrt();
                let sd_box = outside + qx.max(qy).min(0.0);
                // sd_box - r is negative inside the rounded region; flip sign
                -(sd_box - r)
            }
        }
    }

    /// Nearest point on the boundary of supp(v0).
    pub fn nearest_boundary_point(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            SupportGeometry::Intervals { .. } => {
                let pts = self.boundary_points_1d();
                let p = pts
                    .iter()
                    .copied()
                    .min_by(|a, b| (x - a).abs().partial_cmp(&(x - b).abs()).unwrap())
                    .expect("nonempty boundary");
                (p, 0.0)
            }
            SupportGeometry::DiskComplement { center, radius } => {
                let dx = x - center.0;
                let dy = y - center.1;
                let d = (dx * dx + dy * dy).sqrt();
                if d == 0.0 {
                    return (center.0 + radius, center.1);
                }
                (center.0 + radius * dx / d, center.1 + radius * dy / d)
            }
            SupportGeometry::RoundedRectComplement {
                center,
                half,
                corner_radius,
            } => {
                let r = *corner_radius;
                let bx = half.0 - r;
                let by = half.1 - r;
                let qx = x - center.0;
                let qy = y - center.1;
                let px = qx.clamp(-bx, bx);
                let py = qy.clamp(-by, by);
                let dx = qx - px;
                let dy = qy - py;
                let d = (dx * dx + dy * dy).sqrt();
                if d > 0.0 {
                    // shell or exterior: project radially from the core point
                    (center.0 + px + r * dx / d, center.1 + py + r * dy / d)
                } else {
                    // strictly inside the core box: walk to the nearest flat edge
                    let gap_x = half.0 - qx.abs();
                    let gap_y = half.1 - qy.abs();
                    if gap_x <= gap_y {
                        let sx = if qx >= 0.0 { 1.0 } else { -1.0 };
                        (center.0 + sx * half.0, center.1 + qy)
                    } else {
                        let sy = if qy >= 0.0 { 1.0 } else { -1.0 };
                        (center.0 + qx, center.1 + sy * half.1)
                    }
                }
            }
        }
    }

    /// Mirror image of (x, y) across the boundary of supp(v0).
    pub fn reflect(&self, x: f64, y: f64) -> (f64, f64) {
        let (bx, by) = self.nearest_boundary_point(x, y);
        (2.0 * bx - x, 2.0 * by - y)
    }

    /// Largest collar width d for which the d-enlargement of the complement
    /// keeps a well-defined geometry: limited by the distance from the
    /// support boundary to the domain boundary, the half-gap between
    /// boundary components (1-D) and the curvature radius (2-D).
    pub fn reach(&self) -> f64 {
        match self {
            SupportGeometry::Intervals { domain, .. } => {
                let pts = self.boundary_points_1d();
                let mut reach = f64::INFINITY;
                for &p in &pts {
                    reach = reach.min((p - domain.0).min(domain.1 - p));
                }
                for w in pts.windows(2) {
                    reach = reach.min(0.5 * (w[1] - w[0]));
                }
                reach
            }
            SupportGeometry::DiskComplement { radius, .. } => *radius,
            SupportGeometry::RoundedRectComplement { corner_radius, .. } => *corner_radius,
        }
    }

    /// Dense boundary sampling for oracle comparisons in tests: `n` points
    /// on each boundary component.
    pub fn sample_boundary(&self, n: usize) -> Vec<(f64, f64)> {
        match self {
            SupportGeometry::Intervals { .. } => self
                .boundary_points_1d()
                .into_iter()
                .map(|p| (p, 0.0))
                .collect(),
            SupportGeometry::DiskComplement { center, radius } => (0..n)
                .map(|i| {
                    let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    (center.0 + radius * th.cos(), center.1 + radius * th.sin())
                })
                .collect(),
            SupportGeometry::RoundedRectComplement {
                center,
                half,
                corner_radius,
            } => {
                // parametrize by walking the perimeter: 4 edges + 4 arcs
                let r = *corner_radius;
                let bx = half.0 - r;
                let by = half.1 - r;
                let per = 8.0 * (bx + by) / 2.0 + 2.0 * std::f64::consts::PI * r;
                let mut pts = Vec::with_capacity(n);
                for i in 0..n {
                    let mut s = per * i as f64 / n as f64;
                    // top edge, then corners/edges clockwise from (-bx, +hy)
                    let edge_x = 2.0 * bx;
                    let edge_y = 2.0 * by;
                    let quarter = 0.5 * std::f64::consts::PI * r;
                    let segs = [
                        (edge_x, 0),
                        (quarter, 1),
                        (edge_y, 2),
                        (quarter, 3),
                        (edge_x, 4),
                        (quarter, 5),
                        (edge_y, 6),
                        (quarter, 7),
                    ];
                    let mut pt = (center.0, center.1 + half.1);
                    for (len, kind) in segs {
                        if s <= len {
                            let f = s / len;
                            pt = match kind {
                                0 => (center.0 - bx + f * 2.0 * bx, center.1 + half.1),
                                1 => {
                                    let th = 0.5 * std::f64::consts::PI * (1.0 - f);
                                    (center.0 + bx + r * th.cos(), center.1 + by + r * th.sin())
                                }
                                2 => (center.0 + half.0, center.1 + by - f * 2.0 * by),
                                3 => {
                                    let th = -0.5 * std::f64::consts::PI * f;
                                    (center.0 + bx + r * th.cos(), center.1 - by + r * th.sin())
                                }
                                4 => (center.0 + bx - f * 2.0 * bx, center.1 - half.1),
                                5 => {
                                    let th = -0.5 * std::f64::consts::PI * (1.0 + f);
                                    (center.0 - bx + r * th.cos(), center.1 - by + r * th.sin())
                                }
                                6 => (center.0 - half.0, center.1 - by + f * 2.0 * by),
                                _ => {
                                    let th = std::f64::consts::PI * (1.0 + 0.5 * f);
                                    (center.0 - bx + r * th.cos(), center.1 + by + r * th.sin())
                                }
                            };
                            break;
                        }
                        s -= len;
                    }
                    pts.push(pt);
                }
                pts
            }
        }
    }
}
