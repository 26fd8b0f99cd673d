//! Problem description: domain, support geometry, initial data, reaction
//! parameters and solver policy, plus the TOML configuration format.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::SupportGeometry;
use crate::grid::{build_grid, Field, Grid};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const DEFAULT_SEED: u64 = 0x5eed_f457_11;

/// Initial datum given piecewise by region: one expression evaluated on
/// supp(v0) nodes, one on complement nodes. Omitted pieces are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RegionExpr {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support: Option<Expr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complement: Option<Expr>,
}

impl RegionExpr {
    pub fn on_support(src: &str) -> Result<Self> {
        Ok(RegionExpr {
            support: Some(Expr::parse(src)?),
            complement: None,
        })
    }

    pub fn on_complement(src: &str) -> Result<Self> {
        Ok(RegionExpr {
            support: None,
            complement: Some(Expr::parse(src)?),
        })
    }

    fn eval(&self, on_support: bool, x: f64, y: f64) -> f64 {
        let piece = if on_support {
            &self.support
        } else {
            &self.complement
        };
        piece.as_ref().map_or(0.0, |e| e.eval(x, y))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub u0: RegionExpr,
    pub v0: RegionExpr,
}

/// Time-step policy: dt = min(h^2, c / (k ||v0||_inf)) unless overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverPolicy {
    /// Reaction-resolution constant c in dt = min(h^2, c/(k ||v0||)).
    pub c: f64,
    /// Explicit dt override; bypasses the policy when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Default number of output snapshots for the CLI.
    pub snapshots: usize,
    /// Seed for randomized property runs.
    pub seed: u64,
}

impl Default for SolverPolicy {
    fn default() -> Self {
        SolverPolicy {
            c: 0.5,
            dt: None,
            snapshots: 11,
            seed: DEFAULT_SEED,
        }
    }
}

/// Full description of one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub grid: Arc<Grid>,
    pub geometry: SupportGeometry,
    pub initial: InitialData,
    pub k: f64,
    pub m3: f64,
    pub m4: f64,
    pub t_end: f64,
    pub solver: SolverPolicy,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) {
            return Err(Error::Config(format!("k must be positive, got {}", self.k)));
        }
        if !(self.m3 >= 1.0) || !(self.m4 >= 1.0) {
            return Err(Error::Config("m3 and m4 must be >= 1".into()));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Config("T must be positive".into()));
        }
        if self.geometry.dim() != self.grid.dim() {
            return Err(Error::Config(
                "geometry dimension does not match grid dimension".into(),
            ));
        }
        let extents: Vec<(f64, f64)> = self.grid.axes.iter().map(|a| (a.lo, a.hi)).collect();
        self.geometry.validate(&extents)?;
        Ok(())
    }

    /// True when the Theorem-class exponent condition (m3 > 1 or m4 >= 2)
    /// holds; convergence experiments require it.
    pub fn convergence_exponents_ok(&self) -> bool {
        self.m3 > 1.0 || self.m4 >= 2.0
    }

    /// dt chosen by policy; both the h^2 cap and the reaction-layer cap are
    /// accuracy constraints (the reaction substeps are exact and the
    /// diffusion solve unconditionally stable).
    pub fn policy_dt(&self, v0_max: f64) -> f64 {
        if let Some(dt) = self.solver.dt {
            return dt;
        }
        let h2 = self
            .grid
            .axes
            .iter()
            .map(|a| a.h * a.h)
            .fold(f64::INFINITY, f64::min);
        let k_eff = self.k * v0_max.max(f64::MIN_POSITIVE);
        h2.min(self.solver.c / k_eff)
    }

    pub fn to_toml(&self) -> String {
        let cfg = Config::from_spec(self);
        toml::to_string_pretty(&cfg).expect("spec serializes")
    }

    pub fn from_toml(text: &str) -> Result<ProblemSpec> {
        let cfg: Config = toml::from_str(text)
            .map_err(|e| Error::Config(format!("cannot parse problem file: {e}")))?;
        cfg.into_spec()
    }
}

/// Evaluate the initial data on the grid and enforce the segregation and
/// nonnegativity assumptions node by node.
pub fn eval_initial_data(spec: &ProblemSpec) -> Result<(Field, Field)> {
    spec.validate()?;
    let grid = spec.grid.clone();
    let n = grid.node_count();
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n];
    for i in 0..n {
        let (x, y) = grid.node(i);
        let on_support = spec.geometry.signed_distance(x, y) <= 0.0;
        u[i] = spec.initial.u0.eval(on_support, x, y);
        v[i] = spec.initial.v0.eval(on_support, x, y);
        let loc = format!("x={x}, y={y}");
        if !u[i].is_finite() || !v[i].is_finite() {
            return Err(Error::Assumption(format!(
                "initial data not finite at node {i} ({loc})"
            )));
        }
        if u[i] < 0.0 {
            return Err(Error::Assumption(format!(
                "u0 negative ({:e}) at node {i} ({loc})",
                u[i]
            )));
        }
        if v[i] < 0.0 {
            return Err(Error::Assumption(format!(
                "v0 negative ({:e}) at node {i} ({loc})",
                v[i]
            )));
        }
        if u[i] * v[i] != 0.0 {
            return Err(Error::Segregation {
                index: i,
                location: loc,
                product: u[i] * v[i],
            });
        }
        if on_support && u[i] != 0.0 {
            return Err(Error::Assumption(format!(
                "u0 must vanish on supp(v0); u0 = {:e} at node {i} ({loc})",
                u[i]
            )));
        }
    }
    if u.iter().all(|&x| x == 0.0) {
        return Err(Error::Assumption("u0 is identically zero".into()));
    }
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::Assumption("v0 is identically zero".into()));
    }
    Ok((
        Field::new(grid.clone(), u, 0.0)?,
        Field::new(grid, v, 0.0)?,
    ))
}

// ---------------------------------------------------------------------------
// TOML configuration format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub domain: DomainSection,
    pub grid: GridSection,
    pub support: SupportSection,
    pub initial: InitialData,
    pub params: ParamsSection,
    #[serde(default)]
    pub solver: SolverPolicy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub points: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum SupportSection {
    Intervals { intervals: Vec<(f64, f64)> },
    DiskComplement { center: (f64, f64), radius: f64 },
    RoundedRectComplement {
        center: (f64, f64),
        half: (f64, f64),
        corner_radius: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub k: f64,
    pub m3: f64,
    pub m4: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
}

impl Config {
    pub fn into_spec(self) -> Result<ProblemSpec> {
        if self.domain.lo.len() != self.domain.hi.len() {
            return Err(Error::Config("domain lo/hi length mismatch".into()));
        }
        let extents: Vec<(f64, f64)> = self
            .domain
            .lo
            .iter()
            .zip(&self.domain.hi)
            .map(|(&a, &b)| (a, b))
            .collect();
        let grid = build_grid(&extents, &self.grid.points)?;
        let geometry = match self.support {
            SupportSection::Intervals { intervals } => {
                if extents.len() != 1 {
                    return Err(Error::Config("interval support needs a 1-D domain".into()));
                }
                SupportGeometry::Intervals {
                    domain: extents[0],
                    support: intervals,
                }
            }
            SupportSection::DiskComplement { center, radius } => {
                SupportGeometry::DiskComplement { center, radius }
            }
            SupportSection::RoundedRectComplement {
                center,
                half,
                corner_radius,
            } => SupportGeometry::RoundedRectComplement {
                center,
                half,
                corner_radius,
            },
        };
        let spec = ProblemSpec {
            grid,
            geometry,
            initial: self.initial,
            k: self.params.k,
            m3: self.params.m3,
            m4: self.params.m4,
            t_end: self.params.t_end,
            solver: self.solver,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &ProblemSpec) -> Config {
        let support = match &spec.geometry {
            SupportGeometry::Intervals { support, .. } => SupportSection::Intervals {
                intervals: support.clone(),
            },
            SupportGeometry::DiskComplement { center, radius } => SupportSection::DiskComplement {
                center: *center,
                radius: *radius,
            },
            SupportGeometry::RoundedRectComplement {
                center,
                half,
                corner_radius,
            } => SupportSection::RoundedRectComplement {
                center: *center,
                half: *half,
                corner_radius: *corner_radius,
            },
        };
        Config {
            domain: DomainSection {
                lo: spec.grid.axes.iter().map(|a| a.lo).collect(),
                hi: spec.grid.axes.iter().map(|a| a.hi).collect(),
            },
            grid: GridSection {
                points: spec.grid.axes.iter().map(|a| a.n).collect(),
            },
            support,
            initial: spec.initial.clone(),
            params: ParamsSection {
                k: spec.k,
                m3: spec.m3,
                m4: spec.m4,
                t_end: spec.t_end,
            },
            solver: spec.solver.clone(),
        }
    }
}

/// The canonical 1-D test instance used across the test suites:
/// domain (-1,1), supp v0 = [-1,-0.3] u [0.3,1] with v0 = 1 there, and
/// u0 = cos(pi x / 0.6) on the middle gap.
pub fn canonical_p1(points: usize, k: f64, m3: f64, m4: f64, t_end: f64) -> ProblemSpec {
    let grid = build_grid(&[(-1.0, 1.0)], &[points]).expect("valid grid");
    ProblemSpec {
        grid,
        geometry: SupportGeometry::Intervals {
            domain: (-1.0, 1.0),
            support: vec![(-1.0, -0.3), (0.3, 1.0)],
        },
        initial: InitialData {
            u0: RegionExpr::on_complement("cos(pi*x/0.6)").expect("parses"),
            v0: RegionExpr::on_support("1").expect("parses"),
        },
        k,
        m3,
        m4,
        t_end,
        solver: SolverPolicy::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_initial_data_is_valid_and_segregated() {
        let spec = canonical_p1(801, 100.0, 2.0, 1.0, 0.1);
        let (u0, v0) = eval_initial_data(&spec).unwrap();
        let worst = u0
            .values
            .iter()
            .zip(&v0.values)
            .fold(0.0f64, |m, (a, b)| m.max((a * b).abs()));
        assert_eq!(worst, 0.0, "segregation must hold exactly");
        assert!(u0.values.iter().all(|&x| x >= 0.0));
        assert!(v0.values.iter().all(|&x| x >= 0.0));
        assert!(u0.max_abs() > 0.9); // the cosine hump peaks near 1
        // u0 vanishes at the interface nodes +-0.3
        for i in 0..spec.grid.node_count() {
            let (x, _) = spec.grid.node(i);
            if spec.geometry.signed_distance(x, 0.0) <= 0.0 {
                assert_eq!(u0.values[i], 0.0);
            }
        }
    }

    #[test]
    fn overlapping_initial_data_is_a_segregation_error() {
        let mut spec = canonical_p1(101, 1.0, 1.0, 1.0, 0.1);
        // both positive on the complement (x = 0 included)
        spec.initial.v0 = RegionExpr {
            support: Some(Expr::parse("1").unwrap()),
            complement: Some(Expr::parse("1").unwrap()),
        };
        match eval_initial_data(&spec) {
            Err(Error::Segregation { .. }) => {}
            other => panic!("expected segregation error, got {other:?}"),
        }
    }

    #[test]
    fn zero_v0_is_an_assumption_error() {
        let mut spec = canonical_p1(101, 1.0, 1.0, 1.0, 0.1);
        spec.initial.v0 = RegionExpr::on_support("0").unwrap();
        assert!(matches!(
            eval_initial_data(&spec),
            Err(Error::Assumption(_))
        ));
    }

    #[test]
    fn u0_on_support_is_rejected() {
        let mut spec = canonical_p1(101, 1.0, 1.0, 1.0, 0.1);
        spec.initial.u0 = RegionExpr {
            support: Some(Expr::parse("0.5").unwrap()),
            complement: Some(Expr::parse("cos(pi*x/0.6)").unwrap()),
        };
        spec.initial.v0 = RegionExpr::on_support("0.5").unwrap();
        assert!(eval_initial_data(&spec).is_err());
    }

    #[test]
    fn toml_round_trip_is_identity() {
        let spec = canonical_p1(801, 1e4, 2.0, 1.0, 0.1);
        let text = spec.to_toml();
        let back = ProblemSpec::from_toml(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        let spec = canonical_p1(101, 1.0, 1.0, 1.0, 0.1);
        let mut text = spec.to_toml();
        text.push_str("\n[extra]\nfoo = 1\n");
        assert!(ProblemSpec::from_toml(&text).is_err());
    }

    #[test]
    fn policy_dt_caps() {
        let spec = canonical_p1(801, 1e5, 2.0, 1.0, 0.1);
        let h2 = spec.grid.axes[0].h.powi(2);
        assert!((spec.policy_dt(1.0) - (0.5 / 1e5)).abs() < 1e-18);
        let slow = canonical_p1(801, 1.0, 2.0, 1.0, 0.1);
        assert_eq!(slow.policy_dt(1.0), h2);
    }
}
