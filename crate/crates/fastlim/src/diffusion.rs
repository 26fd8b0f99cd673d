//! Discrete Laplacians with Neumann reflection or an interior Dirichlet-zero
//! node set, unconditionally stable implicit diffusion steps, and the
//! heat-equation reference solver for the large-k limit.
//!
//! The explicit Laplacian uses the second-order central stencil with ghost
//! node reflection at the domain boundary. It is self-adjoint with respect
//! to the trapezoidal inner product (half-weight cells at the boundary), and
//! the implicit step conserves the trapezoidal mass under Neumann conditions.
//!
//! Scheme selection: Crank-Nicolson when dt is below the entrywise
//! positivity cap dt <= 1 / sum_axes(1/h_i^2) (dt <= h^2 in 1-D), otherwise
//! backward Euler. Both are monotone, so nodewise-ordered inputs stay
//! ordered; that property is what the discrete comparison tests rely on.

use crate::error::{Error, Result};
use crate::geometry::SupportGeometry;
use crate::grid::{Field, Grid};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub enum BoundaryCondition {
    /// Homogeneous Neumann on the domain boundary via ghost reflection.
    NeumannReflect,
    /// Values pinned to zero on a node mask (true = pinned); used for the
    /// interface Dirichlet condition on supp(v0).
    DirichletZero(Arc<Vec<bool>>),
}

#[derive(Debug, Clone)]
pub struct LinearStencil {
    pub grid: Arc<Grid>,
    pub bc: BoundaryCondition,
}

impl LinearStencil {
    pub fn neumann(grid: Arc<Grid>) -> Self {
        LinearStencil {
            grid,
            bc: BoundaryCondition::NeumannReflect,
        }
    }

    /// Dirichlet-zero on every node inside or on supp(v0).
    pub fn dirichlet_on_support(grid: Arc<Grid>, geometry: &SupportGeometry) -> Self {
        let mask: Vec<bool> = (0..grid.node_count())
            .map(|i| {
                let (x, y) = grid.node(i);
                geometry.signed_distance(x, y) <= 0.0
            })
            .collect();
        LinearStencil {
            grid,
            bc: BoundaryCondition::DirichletZero(Arc::new(mask)),
        }
    }

    /// Dirichlet-zero outside the d-enlarged complement (nodes with
    /// rho <= -d pinned); used by the enlarged-domain heat barrier.
    pub fn dirichlet_outside_enlarged_complement(
        grid: Arc<Grid>,
        geometry: &SupportGeometry,
        d: f64,
    ) -> Self {
        let mask: Vec<bool> = (0..grid.node_count())
            .map(|i| {
                let (x, y) = grid.node(i);
                geometry.signed_distance(x, y) <= -d
            })
            .collect();
        LinearStencil {
            grid,
            bc: BoundaryCondition::DirichletZero(Arc::new(mask)),
        }
    }

    pub fn mask(&self) -> Option<&[bool]> {
        match &self.bc {
            BoundaryCondition::NeumannReflect => None,
            BoundaryCondition::DirichletZero(m) => Some(m),
        }
    }

    fn is_pinned(&self, i: usize) -> bool {
        self.mask().is_some_and(|m| m[i])
    }

    /// Largest dt for which the Crank-Nicolson explicit half-operator
    /// I + (dt/2) L stays entrywise nonnegative (monotonicity condition).
    pub fn cn_dt_cap(&self) -> f64 {
        let s: f64 = self.grid.axes.iter().map(|a| 1.0 / (a.h * a.h)).sum();
        1.0 / s
    }

    /// Apply the Laplacian. Pinned rows produce 0; pinned node values are
    /// read as stored (the steppers keep them at 0).
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        let grid = &self.grid;
        match grid.axes.len() {
            1 => {
                let n = grid.axes[0].n;
                let ih2 = 1.0 / (grid.axes[0].h * grid.axes[0].h);
                for i in 0..n {
                    if self.is_pinned(i) {
                        out[i] = 0.0;
                        continue;
                    }
                    let left = if i == 0 { f[1] } else { f[i - 1] };
                    let right = if i + 1 == n { f[n - 2] } else { f[i + 1] };
                    out[i] = (left - 2.0 * f[i] + right) * ih2;
                }
            }
            2 => {
                let nx = grid.axes[0].n;
                let ny = grid.axes[1].n;
                let ihx2 = 1.0 / (grid.axes[0].h * grid.axes[0].h);
                let ihy2 = 1.0 / (grid.axes[1].h * grid.axes[1].h);
                for ix in 0..nx {
                    for iy in 0..ny {
                        let i = ix * ny + iy;
                        if self.is_pinned(i) {
                            out[i] = 0.0;
                            continue;
                        }
                        let xm = if ix == 0 { f[ny + iy] } else { f[i - ny] };
                        let xp = if ix + 1 == nx {
                            f[(nx - 2) * ny + iy]
                        } else {
                            f[i + ny]
                        };
                        let ym = if iy == 0 { f[i + 1] } else { f[i - 1] };
                        let yp = if iy + 1 == ny { f[i - 1] } else { f[i + 1] };
                        out[i] = (xm - 2.0 * f[i] + xp) * ihx2 + (ym - 2.0 * f[i] + yp) * ihy2;
                    }
                }
            }
            _ => unreachable!(),
        }
    }
}

/// Discrete Laplacian of a field under Neumann reflection.
pub fn neumann_laplacian(field: &Field) -> Field {
    let st = LinearStencil::neumann(field.grid.clone());
    let mut out = vec![0.0; field.values.len()];
    st.apply(&field.values, &mut out);
    Field {
        grid: field.grid.clone(),
        values: out,
        t: field.t,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    CrankNicolson,
    BackwardEuler,
}

/// Prefactored implicit stepper for a fixed (stencil, dt) pair.
pub struct DiffusionSolver {
    pub stencil: LinearStencil,
    pub dt: f64,
    pub scheme: Scheme,
    tri: Option<TridiagFactors>,
    scratch: Vec<f64>,
}

struct TridiagFactors {
    // forward-elimination coefficients for the constant system
    cp: Vec<f64>,
    inv_denom: Vec<f64>,
    lower: Vec<f64>,
}

impl DiffusionSolver {
    pub fn new(stencil: LinearStencil, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        let scheme = if dt <= stencil.cn_dt_cap() * (1.0 + 1e-12) {
            Scheme::CrankNicolson
        } else {
            Scheme::BackwardEuler
        };
        let n = stencil.grid.node_count();
        let mut solver = DiffusionSolver {
            stencil,
            dt,
            scheme,
            tri: None,
            scratch: vec![0.0; n],
        };
        if solver.stencil.grid.dim() == 1 {
            solver.tri = Some(solver.factor_tridiag());
        }
        Ok(solver)
    }

    fn theta(&self) -> f64 {
        match self.scheme {
            Scheme::CrankNicolson => 0.5,
            Scheme::BackwardEuler => 1.0,
        }
    }

    fn factor_tridiag(&self) -> TridiagFactors {
        let grid = &self.stencil.grid;
        let n = grid.axes[0].n;
        let ih2 = 1.0 / (grid.axes[0].h * grid.axes[0].h);
        let th = self.theta() * self.dt;
        let mut lower = vec![0.0f64; n];
        let mut diag = vec![0.0f64; n];
        let mut upper = vec![0.0f64; n];
        for i in 0..n {
            if self.stencil.is_pinned(i) {
                diag[i] = 1.0;
                continue;
            }
            let (l, c, u) = if i == 0 {
                (0.0, 2.0, 2.0)
            } else if i + 1 == n {
                (2.0, 2.0, 0.0)
            } else {
                (1.0, 2.0, 1.0)
            };
            diag[i] = 1.0 + th * c * ih2;
            // couplings into pinned columns are dropped (their value is 0)
            if i > 0 && !self.stencil.is_pinned(i - 1) {
                lower[i] = -th * l * ih2;
            }
            if i + 1 < n && !self.stencil.is_pinned(i + 1) {
                upper[i] = -th * u * ih2;
            }
        }
        // Thomas forward elimination, factor once
        let mut cp = vec![0.0f64; n];
        let mut inv_denom = vec![0.0f64; n];
        cp[0] = upper[0] / diag[0];
        inv_denom[0] = 1.0 / diag[0];
        for i in 1..n {
            let denom = diag[i] - lower[i] * cp[i - 1];
            inv_denom[i] = 1.0 / denom;
            cp[i] = upper[i] * inv_denom[i];
        }
        TridiagFactors {
            cp,
            inv_denom,
            lower,
        }
    }

    /// One implicit step in place.
    pub fn step_in_place(&mut self, u: &mut [f64]) -> Result<()> {
        let n = u.len();
        if let Some(mask) = self.stencil.mask() {
            for i in 0..n {
                if mask[i] {
                    u[i] = 0.0;
                }
            }
        }
        // rhs = u + (1-theta) dt L u
        let expl = self.dt * (1.0 - self.theta());
        let mut rhs = std::mem::take(&mut self.scratch);
        self.stencil.apply(u, &mut rhs);
        for i in 0..n {
            rhs[i] = u[i] + expl * rhs[i];
        }
        if let Some(mask) = self.stencil.mask() {
            for i in 0..n {
                if mask[i] {
                    rhs[i] = 0.0;
                }
            }
        }
        let result = match self.stencil.grid.dim() {
            1 => {
                self.solve_tridiag(&rhs, u);
                Ok(())
            }
            _ => self.solve_cg(&rhs, u),
        };
        self.scratch = rhs;
        result
    }

    fn solve_tridiag(&self, rhs: &[f64], x: &mut [f64]) {
        let f = self.tri.as_ref().expect("1-D factorization present");
        let n = rhs.len();
        // forward sweep into x
        x[0] = rhs[0] * f.inv_denom[0];
        for i in 1..n {
            x[i] = (rhs[i] - f.lower[i] * x[i - 1]) * f.inv_denom[i];
        }
        // back substitution
        for i in (0..n - 1).rev() {
            x[i] -= f.cp[i] * x[i + 1];
        }
    }

    /// Conjugate gradients in the trapezoid-weighted inner product, where
    /// the operator I - theta dt L is self-adjoint and positive definite.
    fn solve_cg(&self, rhs: &[f64], x: &mut [f64]) -> Result<()> {
        let n = rhs.len();
        let grid = &self.stencil.grid;
        let th = self.theta() * self.dt;
        let w: Vec<f64> = (0..n).map(|i| grid.quad_weight(i)).collect();
        let wdot = |a: &[f64], b: &[f64]| -> f64 {
            a.iter()
                .zip(b)
                .zip(&w)
                .map(|((&a, &b), &w)| w * a * b)
                .sum()
        };
        let apply_a = |p: &[f64], out: &mut [f64], stencil: &LinearStencil| {
            stencil.apply(p, out);
            for i in 0..n {
                out[i] = p[i] - th * out[i];
                if stencil.is_pinned(i) {
                    out[i] = p[i];
                }
            }
        };
        let mut r = vec![0.0f64; n];
        apply_a(x, &mut r, &self.stencil);
        for i in 0..n {
            r[i] = rhs[i] - r[i];
            if self.stencil.is_pinned(i) {
                r[i] = 0.0;
            }
        }
        let bnorm = wdot(rhs, rhs).sqrt().max(1e-300);
        let tol = 1e-12 * bnorm;
        let mut p = r.clone();
        let mut ap = vec![0.0f64; n];
        let mut rr = wdot(&r, &r);
        let max_iter = 40 * (n as f64).sqrt() as usize + 200;
        for _ in 0..max_iter {
            if rr.sqrt() <= tol {
                return Ok(());
            }
            apply_a(&p, &mut ap, &self.stencil);
            let alpha = rr / wdot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new = wdot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
        }
        if rr.sqrt() <= tol {
            Ok(())
        } else {
            Err(Error::Numerical(format!(
                "CG did not reach residual {tol:e} (got {:e}) in {max_iter} iterations",
                rr.sqrt()
            )))
        }
    }
}

/// One implicit diffusion step of a field (convenience wrapper).
pub fn implicit_diffusion_step(field: &Field, dt: f64, stencil: &LinearStencil) -> Result<Field> {
    let mut solver = DiffusionSolver::new(stencil.clone(), dt)?;
    let mut vals = field.values.clone();
    solver.step_in_place(&mut vals)?;
    Field::new(field.grid.clone(), vals, field.t + dt)
}

/// Solve the heat equation on the complement of supp(v0) with zero
/// Dirichlet data on the interface node set, extended by zero into the
/// support. Snapshots are taken at `output_times` (exact landing).
pub fn heat_reference_solve(
    u0: &Field,
    geometry: &SupportGeometry,
    t_end: f64,
    dt: f64,
    output_times: &[f64],
) -> Result<Vec<Field>> {
    let stencil = LinearStencil::dirichlet_on_support(u0.grid.clone(), geometry);
    if let Some(mask) = stencil.mask() {
        for (i, (&pinned, &v)) in mask.iter().zip(&u0.values).enumerate() {
            if pinned && v != 0.0 {
                let (x, y) = u0.grid.node(i);
                return Err(Error::Config(format!(
                    "heat reference needs u0 = 0 on supp(v0); u0 = {v:e} at ({x}, {y})"
                )));
            }
        }
    }
    march_heat(u0, stencil, t_end, dt, output_times)
}

/// Plain Neumann heat flow on the whole domain (used as the reference when
/// the reaction is negligible).
pub fn neumann_heat_solve(
    u0: &Field,
    t_end: f64,
    dt: f64,
    output_times: &[f64],
) -> Result<Vec<Field>> {
    let stencil = LinearStencil::neumann(u0.grid.clone());
    march_heat(u0, stencil, t_end, dt, output_times)
}

fn march_heat(
    u0: &Field,
    stencil: LinearStencil,
    t_end: f64,
    dt: f64,
    output_times: &[f64],
) -> Result<Vec<Field>> {
    validate_output_times(output_times, t_end)?;
    let mut out = Vec::with_capacity(output_times.len());
    let mut u = u0.values.clone();
    if let Some(mask) = stencil.mask() {
        for i in 0..u.len() {
            if mask[i] {
                u[i] = 0.0;
            }
        }
    }
    let mut t = 0.0f64;
    let mut solver = DiffusionSolver::new(stencil.clone(), dt)?;
    for &t_out in output_times {
        if t_out <= 0.0 {
            out.push(Field::new(u0.grid.clone(), u.clone(), 0.0)?);
            continue;
        }
        while t < t_out - 1e-13 * t_out.max(1.0) {
            let step = dt.min(t_out - t);
            if (step - dt).abs() > 1e-15 * dt {
                // shortened landing step gets its own factorization
                let mut landing = DiffusionSolver::new(stencil.clone(), step)?;
                landing.step_in_place(&mut u)?;
            } else {
                solver.step_in_place(&mut u)?;
            }
            t += step;
        }
        out.push(Field::new(u0.grid.clone(), u.clone(), t_out)?);
    }
    Ok(out)
}

pub(crate) fn validate_output_times(times: &[f64], t_end: f64) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Config("no output times requested".into()));
    }
    for w in times.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Config(format!(
                "output times must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if times[0] < 0.0 || *times.last().unwrap() > t_end * (1.0 + 1e-12) {
        return Err(Error::Config("output times outside [0, T]".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::problem::canonical_p1;

    #[test]
    fn laplacian_of_constant_is_zero() {
        let g = build_grid(&[(-1.0, 1.0)], &[101]).unwrap();
        let f = Field::from_fn(g, 0.0, |_, _| 4.2);
        let lap = neumann_laplacian(&f);
        assert!(lap.max_abs() < 1e-13);
    }

    #[test]
    fn laplacian_of_quadratic_is_two_in_the_interior() {
        let g = build_grid(&[(-1.0, 1.0)], &[101]).unwrap();
        let f = Field::from_fn(g.clone(), 0.0, |x, _| x * x);
        let lap = neumann_laplacian(&f);
        for i in 1..g.node_count() - 1 {
            assert!((lap.values[i] - 2.0).abs() < 1e-10, "node {i}");
        }
    }

    #[test]
    fn laplacian_of_neumann_mode_is_second_order_accurate() {
        // f = cos(pi x / L) on (0, L) is Neumann-compatible; the analytic
        // Laplacian is -(pi/L)^2 f. Error bound h^2/12 * max|f''''| * 1.2.
        let l = 2.0;
        let lam = std::f64::consts::PI / l;
        for &n in &[101usize, 201] {
            let g = build_grid(&[(0.0, l)], &[n]).unwrap();
            let h = g.axes[0].h;
            let f = Field::from_fn(g.clone(), 0.0, |x, _| (lam * x).cos());
            let lap = neumann_laplacian(&f);
            let bound = 1.2 * h * h / 12.0 * lam.powi(4) + 1e-12;
            for i in 0..g.node_count() {
                let exact = -lam * lam * f.values[i];
                assert!(
                    (lap.values[i] - exact).abs() <= bound,
                    "n={n} node {i}: {} vs {exact}",
                    lap.values[i]
                );
            }
        }
    }

    #[test]
    fn laplacian_weighted_self_adjointness() {
        let g = build_grid(&[(0.0, 1.0), (0.0, 2.0)], &[13, 17]).unwrap();
        let st = LinearStencil::neumann(g.clone());
        let a = Field::from_fn(g.clone(), 0.0, |x, y| (x * 3.1).sin() + y * y);
        let b = Field::from_fn(g.clone(), 0.0, |x, y| (y * 2.0).cos() * (1.0 + x));
        let mut la = vec![0.0; g.node_count()];
        let mut lb = vec![0.0; g.node_count()];
        st.apply(&a.values, &mut la);
        st.apply(&b.values, &mut lb);
        let dot = |p: &[f64], q: &[f64]| -> f64 {
            (0..g.node_count())
                .map(|i| g.quad_weight(i) * p[i] * q[i])
                .sum()
        };
        let lhs = dot(&la, &b.values);
        let rhs = dot(&a.values, &lb);
        assert!(
            (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0),
            "{lhs} vs {rhs}"
        );
    }

    #[test]
    fn implicit_step_preserves_constants_and_mass() {
        let g = build_grid(&[(-1.0, 1.0)], &[201]).unwrap();
        let st = LinearStencil::neumann(g.clone());
        let f = Field::from_fn(g.clone(), 0.0, |_, _| 2.5);
        let stepped = implicit_diffusion_step(&f, 1e-4, &st).unwrap();
        assert!(f.sup_diff(&stepped) < 1e-13);

        let bump = Field::from_fn(g, 0.0, |x, _| (-(x * x) * 20.0).exp());
        let stepped = implicit_diffusion_step(&bump, 1e-4, &st).unwrap();
        assert!(
            (bump.mass() - stepped.mass()).abs() < 1e-12,
            "mass drift {}",
            (bump.mass() - stepped.mass()).abs()
        );
    }

    #[test]
    fn cn_eigenmode_amplification_factor() {
        // one CN step multiplies a discrete Neumann eigenmode by
        // (1 - lam dt/2) / (1 + lam dt/2) with lam the discrete eigenvalue
        let n = 41usize;
        let l = 2.0;
        let g = build_grid(&[(0.0, l)], &[n]).unwrap();
        let h = g.axes[0].h;
        let m = 3usize;
        let theta = m as f64 * std::f64::consts::PI / (n - 1) as f64;
        let mode = Field::from_fn(g.clone(), 0.0, |x, _| {
            (m as f64 * std::f64::consts::PI * x / l).cos()
        });
        let lam = (2.0 - 2.0 * theta.cos()) / (h * h);
        let dt = 0.9 * h * h; // below the CN positivity cap
        let st = LinearStencil::neumann(g.clone());
        let stepped = implicit_diffusion_step(&mode, dt, &st).unwrap();
        let factor = (1.0 - lam * dt / 2.0) / (1.0 + lam * dt / 2.0);
        for i in 0..g.node_count() {
            let expect = factor * mode.values[i];
            assert!(
                (stepped.values[i] - expect).abs() < 1e-10,
                "node {i}: {} vs {expect}",
                stepped.values[i]
            );
        }
    }

    #[test]
    fn scheme_falls_back_to_backward_euler_above_cap() {
        let g = build_grid(&[(-1.0, 1.0)], &[101]).unwrap();
        let st = LinearStencil::neumann(g.clone());
        let h2 = g.axes[0].h * g.axes[0].h;
        let cn = DiffusionSolver::new(st.clone(), 0.9 * h2).unwrap();
        assert_eq!(cn.scheme, Scheme::CrankNicolson);
        let be = DiffusionSolver::new(st, 4.0 * h2).unwrap();
        assert_eq!(be.scheme, Scheme::BackwardEuler);
    }

    #[test]
    fn monotone_comparison_and_nonnegativity() {
        let g = build_grid(&[(-1.0, 1.0)], &[101]).unwrap();
        let st = LinearStencil::neumann(g.clone());
        let h2 = g.axes[0].h * g.axes[0].h;
        let f = Field::from_fn(g.clone(), 0.0, |x, _| (1.0 - x * x).max(0.0));
        let gfield = Field::from_fn(g.clone(), 0.0, |x, _| 1.1 * (1.0 - x * x).max(0.0) + 0.05);
        for &dt in &[0.5 * h2, h2] {
            let sf = implicit_diffusion_step(&f, dt, &st).unwrap();
            let sg = implicit_diffusion_step(&gfield, dt, &st).unwrap();
            for i in 0..g.node_count() {
                assert!(sf.values[i] <= sg.values[i] + 1e-12);
                assert!(sf.values[i] >= -1e-13);
            }
        }
    }

    #[test]
    fn cg_matches_tridiagonal_on_a_separable_2d_problem() {
        // 2-D solve agrees with the analytic CN amplification of a product
        // of Neumann modes (which is an eigenvector of the 2-D operator)
        let n = 21usize;
        let g = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[n, n]).unwrap();
        let h = g.axes[0].h;
        let theta = 2.0 * std::f64::consts::PI / (n - 1) as f64;
        let lam1 = (2.0 - 2.0 * theta.cos()) / (h * h);
        let mode = Field::from_fn(g.clone(), 0.0, |x, y| {
            (2.0 * std::f64::consts::PI * x).cos() * (2.0 * std::f64::consts::PI * y).cos()
        });
        let lam = 2.0 * lam1;
        let dt = 0.4 * h * h; // below the 2-D cap h^2/2
        let st = LinearStencil::neumann(g.clone());
        let stepped = implicit_diffusion_step(&mode, dt, &st).unwrap();
        let factor = (1.0 - lam * dt / 2.0) / (1.0 + lam * dt / 2.0);
        for i in 0..g.node_count() {
            assert!(
                (stepped.values[i] - factor * mode.values[i]).abs() < 1e-9,
                "node {i}"
            );
        }
    }

    #[test]
    fn heat_reference_zero_initial_data() {
        let spec = canonical_p1(101, 1.0, 1.0, 1.0, 0.1);
        let u0 = Field::zeros(spec.grid.clone(), 0.0);
        let out = heat_reference_solve(&u0, &spec.geometry, 0.1, 1e-3, &[0.05, 0.1]).unwrap();
        for f in out {
            assert_eq!(f.max_abs(), 0.0);
        }
    }

    #[test]
    fn heat_reference_rejects_mass_on_support() {
        let spec = canonical_p1(101, 1.0, 1.0, 1.0, 0.1);
        let u0 = Field::from_fn(spec.grid.clone(), 0.0, |_, _| 1.0);
        assert!(heat_reference_solve(&u0, &spec.geometry, 0.1, 1e-3, &[0.1]).is_err());
    }

    #[test]
    fn heat_reference_eigenmode_decay() {
        // u0 = cos(pi x / 0.6) is the principal Dirichlet mode on (-0.3, 0.3)
        let spec = canonical_p1(801, 1.0, 1.0, 1.0, 0.05);
        let (u0, _v0) = crate::problem::eval_initial_data(&spec).unwrap();
        let lam = (std::f64::consts::PI / 0.6).powi(2);
        let times = [0.01, 0.025, 0.05];
        let sols = heat_reference_solve(&u0, &spec.geometry, 0.05, 1e-5, &times).unwrap();
        let mut worst = 0.0f64;
        for (f, &t) in sols.iter().zip(&times) {
            for i in 0..spec.grid.node_count() {
                let (x, _) = spec.grid.node(i);
                let exact = if spec.geometry.signed_distance(x, 0.0) > 0.0 {
                    (-lam * t).exp() * (std::f64::consts::PI * x / 0.6).cos()
                } else {
                    0.0
                };
                worst = worst.max((f.values[i] - exact).abs());
            }
        }
        println!("eigenmode sup error at grid 801: {worst:e}");
        assert!(worst <= 1e-3, "sup error {worst:e}");
    }

    #[test]
    fn output_time_validation() {
        assert!(validate_output_times(&[0.1, 0.05], 1.0).is_err());
        assert!(validate_output_times(&[0.1, 0.2], 0.15).is_err());
        assert!(validate_output_times(&[0.1, 0.2], 1.0).is_ok());
    }
}
