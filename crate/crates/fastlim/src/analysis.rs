//! Convergence studies and verification harnesses: discrete comparison
//! checks, k sweeps against the heat-equation limit, interface tracking and
//! barrier-dominance verification.

use crate::diffusion::heat_reference_solve;
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::numerics::fmt_g17;
use crate::problem::ProblemSpec;
use crate::simulator::{run, run_fields, Snapshot, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

// ---------------------------------------------------------------------------
// comparison_check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    /// min over nodes/times of (u - u_tilde); pass needs >= -tol
    pub worst_u_margin: f64,
    /// min over nodes/times of (v_tilde - v); pass needs >= -tol
    pub worst_v_margin: f64,
    pub worst_location: String,
    pub tol: f64,
    pub pass: bool,
}

/// Verify the discrete comparison ordering between a super-pair (u, v) and
/// a sub-pair (u_tilde, v_tilde): u >= u_tilde - tol and v <= v_tilde + tol
/// at every node of every snapshot.
pub fn comparison_check(
    super_pair: &[Snapshot],
    sub_pair: &[Snapshot],
    tol: f64,
) -> Result<ComparisonReport> {
    if super_pair.len() != sub_pair.len() {
        return Err(Error::Config("snapshot count mismatch".into()));
    }
    let mut worst_u = f64::INFINITY;
    let mut worst_v = f64::INFINITY;
    let mut where_ = String::from("-");
    for (a, b) in super_pair.iter().zip(sub_pair) {
        if a.u.grid != b.u.grid {
            return Err(Error::Config("grids differ between trajectories".into()));
        }
        if (a.t - b.t).abs() > 1e-12 * a.t.abs().max(1.0) {
            return Err(Error::Config(format!(
                "snapshot times differ: {} vs {}",
                a.t, b.t
            )));
        }
        for i in 0..a.u.values.len() {
            let mu = a.u.values[i] - b.u.values[i];
            let mv = b.v.values[i] - a.v.values[i];
            if mu < worst_u || mv < worst_v {
                let (x, y) = a.u.grid.node(i);
                where_ = format!("t={}, x={}, y={}", a.t, x, y);
            }
            worst_u = worst_u.min(mu);
            worst_v = worst_v.min(mv);
        }
    }
    Ok(ComparisonReport {
        worst_u_margin: worst_u,
        worst_v_margin: worst_v,
        worst_location: where_,
        tol,
        pass: worst_u >= -tol && worst_v >= -tol,
    })
}

/// Seeded smooth ordered initial pairs for comparison property runs: the
/// returned tuples satisfy u >= u_tilde and v <= v_tilde nodewise.
pub fn seeded_ordered_pairs(
    grid: std::sync::Arc<crate::grid::Grid>,
    seed: u64,
    count: usize,
) -> Vec<(Field, Field, Field, Field)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let coef: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();
        let coefv: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();
        let shrink = rng.gen_range(0.05..0.4);
        let lift = rng.gen_range(0.05..0.3);
        let smooth = move |x: f64, c: &[f64]| -> f64 {
            let mut s = 0.3;
            for (j, &a) in c.iter().enumerate() {
                s += a / (1.0 + (j * j) as f64)
                    * (j as f64 * std::f64::consts::PI * x).cos().powi(2);
            }
            s
        };
        let cu = coef.clone();
        let cv = coefv.clone();
        let u_hi = Field::from_fn(grid.clone(), 0.0, |x, _| smooth(x, &cu));
        let u_lo = Field::from_fn(grid.clone(), 0.0, |x, _| smooth(x, &cu) * (1.0 - shrink));
        let v_lo = Field::from_fn(grid.clone(), 0.0, |x, _| smooth(x, &cv) * 0.5);
        let v_hi = Field::from_fn(grid.clone(), 0.0, |x, _| smooth(x, &cv) * 0.5 + lift);
        out.push((u_hi, v_lo, u_lo, v_hi));
    }
    out
}

/// Evolve `count` seeded ordered pairs with identical dt and report the
/// worst ordering violation across all of them.
pub fn comparison_property_run(
    grid: std::sync::Arc<crate::grid::Grid>,
    k: f64,
    m3: f64,
    m4: f64,
    t_end: f64,
    seed: u64,
    count: usize,
    tol: f64,
) -> Result<ComparisonReport> {
    let pairs = seeded_ordered_pairs(grid.clone(), seed, count);
    let h2 = grid.axes.iter().map(|a| a.h * a.h).fold(f64::INFINITY, f64::min);
    let times: Vec<f64> = (1..=5).map(|i| t_end * i as f64 / 5.0).collect();
    let mut worst = ComparisonReport {
        worst_u_margin: f64::INFINITY,
        worst_v_margin: f64::INFINITY,
        worst_location: "-".into(),
        tol,
        pass: true,
    };
    for (u_hi, v_lo, u_lo, v_hi) in &pairs {
        let dt = h2.min(0.5 / (k * v_hi.max().max(1e-300)));
        let (sup, _) = run_fields(u_hi, v_lo, k, m3, m4, dt, &times)?;
        let (sub, _) = run_fields(u_lo, v_hi, k, m3, m4, dt, &times)?;
        let rep = comparison_check(&sup, &sub, tol)?;
        if rep.worst_u_margin < worst.worst_u_margin {
            worst.worst_u_margin = rep.worst_u_margin;
            worst.worst_location = rep.worst_location.clone();
        }
        worst.worst_v_margin = worst.worst_v_margin.min(rep.worst_v_margin);
    }
    worst.pass = worst.worst_u_margin >= -tol && worst.worst_v_margin >= -tol;
    Ok(worst)
}

// ---------------------------------------------------------------------------
// interface_position
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub enum Crossing {
    /// Interpolated position where v crosses the threshold.
    At(f64),
    /// No crossing near this boundary component: v stayed above the
    /// threshold there (the deficit never reached it).
    Absorbed,
}

/// Level crossings of v = theta near each boundary component of supp(v0).
/// In 2-D the scan runs along the horizontal line through the complement's
/// center, giving one component on each side.
pub fn interface_position(
    v: &Field,
    geometry: &crate::geometry::SupportGeometry,
    theta: f64,
) -> Result<Vec<Crossing>> {
    if !(theta > 0.0) {
        return Err(Error::Config("theta must be positive".into()));
    }
    use crate::geometry::SupportGeometry as G;
    let line: Vec<(f64, f64)> = match geometry {
        G::Intervals { .. } => (0..v.grid.axes[0].n)
            .map(|i| (v.grid.axes[0].coord(i), v.values[i]))
            .collect(),
        G::DiskComplement { center, .. } | G::RoundedRectComplement { center, .. } => {
            // nearest grid line iy to the center's y
            let ay = &v.grid.axes[1];
            let iy = (((center.1 - ay.lo) / ay.h).round() as usize).min(ay.n - 1);
            (0..v.grid.axes[0].n)
                .map(|ix| (v.grid.axes[0].coord(ix), v.values[ix * ay.n + iy]))
                .collect()
        }
    };
    let components: Vec<f64> = match geometry {
        G::Intervals { .. } => geometry.boundary_points_1d(),
        G::DiskComplement { center, radius } => {
            vec![center.0 - radius, center.0 + radius]
        }
        G::RoundedRectComplement { center, half, .. } => {
            vec![center.0 - half.0, center.0 + half.0]
        }
    };
    let window = geometry.reach() * 0.9;
    let mut out = Vec::with_capacity(components.len());
    for &p in &components {
        let mut best: Option<f64> = None;
        for w in line.windows(2) {
            let (x0, v0) = w[0];
            let (x1, v1) = w[1];
            if x1 < p - window || x0 > p + window {
                continue;
            }
            let d0 = v0 - theta;
            let d1 = v1 - theta;
            if d0 == 0.0 {
                best = pick_nearer(best, x0, p);
            }
            if d0 * d1 < 0.0 {
                let xc = x0 + (x1 - x0) * d0 / (d0 - d1);
                best = pick_nearer(best, xc, p);
            }
        }
        out.push(match best {
            Some(x) => Crossing::At(x),
            None => Crossing::Absorbed,
        });
    }
    Ok(out)
}

fn pick_nearer(best: Option<f64>, candidate: f64, p: f64) -> Option<f64> {
    match best {
        None => Some(candidate),
        Some(b) if (candidate - p).abs() < (b - p).abs() => Some(candidate),
        other => other,
    }
}

// ---------------------------------------------------------------------------
// k_sweep
// ---------------------------------------------------------------------------

/// A compact region strictly inside supp(v0) on which the v-deficit is
/// measured.
#[derive(Debug, Clone, Serialize)]
pub enum CompactRegion {
    Intervals(Vec<(f64, f64)>),
    Boxes(Vec<((f64, f64), (f64, f64))>),
}

impl CompactRegion {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            CompactRegion::Intervals(iv) => iv.iter().any(|&(a, b)| x >= a && x <= b),
            CompactRegion::Boxes(bx) => bx
                .iter()
                .any(|&((xa, xb), (ya, yb))| x >= xa && x <= xb && y >= ya && y <= yb),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KRow {
    pub k: f64,
    pub sup_u_err: f64,
    /// min over nodes/times of u_k - u_inf (one-sided bound check)
    pub min_u_minus_uinf: f64,
    pub v_deficit: f64,
    pub interface_disp: f64,
    pub dt: f64,
    pub h: f64,
    /// per-snapshot sup |u_k - u_inf| for the JSON detail
    pub sup_u_err_per_time: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<KRow>,
    pub times: Vec<f64>,
    pub theta: f64,
    pub sup_err_strictly_decreasing: bool,
    pub v_deficit_nonincreasing: bool,
    pub one_sided_ok: bool,
    pub one_sided_tol: f64,
}

impl ConvergenceReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,sup_u_err,v_deficit,interface_disp,dt,h")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_g17(r.k),
                fmt_g17(r.sup_u_err),
                fmt_g17(r.v_deficit),
                fmt_g17(r.interface_disp),
                fmt_g17(r.dt),
                fmt_g17(r.h)
            )?;
        }
        Ok(())
    }
}

/// Sweep over increasing k, computing per-k error metrics against the heat
/// reference u_inf (extended by zero into supp v0).
pub fn k_sweep(
    spec: &ProblemSpec,
    k_list: &[f64],
    omega_prime: &CompactRegion,
) -> Result<ConvergenceReport> {
    spec.validate()?;
    if !spec.convergence_exponents_ok() {
        return Err(Error::Config(
            "convergence experiments need m3 > 1 or m4 >= 2".into(),
        ));
    }
    for w in k_list.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Config("k list must be increasing".into()));
        }
    }
    let h = spec
        .grid
        .axes
        .iter()
        .map(|a| a.h)
        .fold(f64::INFINITY, f64::min);
    // the region must sit at least 2 cells inside supp v0
    for i in 0..spec.grid.node_count() {
        let (x, y) = spec.grid.node(i);
        if omega_prime.contains(x, y) && spec.geometry.signed_distance(x, y) > -2.0 * h {
            return Err(Error::Config(format!(
                "Omega' must be >= 2 grid cells inside supp v0; violated at ({x}, {y})"
            )));
        }
    }
    let n_times = spec.solver.snapshots.max(2);
    let times: Vec<f64> = (1..=n_times)
        .map(|i| spec.t_end * i as f64 / n_times as f64)
        .collect();
    let (u0, v0) = crate::problem::eval_initial_data(spec)?;
    let h2 = h * h;
    let u_inf = heat_reference_solve(&u0, &spec.geometry, spec.t_end, h2, &times)?;
    let theta = 0.5 * positive_min(&v0.values);

    let interface_t0 = interface_position(&v0, &spec.geometry, theta)?;
    let rows: Result<Vec<KRow>> = k_list
        .par_iter()
        .map(|&k| {
            let mut s = spec.clone();
            s.k = k;
            let traj = run(&s, &times)?;
            let mut sup_err = 0.0f64;
            let mut min_one_sided = f64::INFINITY;
            let mut v_deficit = 0.0f64;
            let mut per_time = Vec::with_capacity(times.len());
            for (snap, uref) in traj.snapshots.iter().zip(&u_inf) {
                let mut snap_err = 0.0f64;
                for i in 0..snap.u.values.len() {
                    let diff = snap.u.values[i] - uref.values[i];
                    snap_err = snap_err.max(diff.abs());
                    min_one_sided = min_one_sided.min(diff);
                    let (x, y) = snap.u.grid.node(i);
                    if omega_prime.contains(x, y) {
                        v_deficit = v_deficit.max(v0.values[i] - snap.v.values[i]);
                    }
                }
                per_time.push(snap_err);
                sup_err = sup_err.max(snap_err);
            }
            let final_v = &traj.snapshots.last().expect("snapshots").v;
            let interface_t = interface_position(final_v, &spec.geometry, theta)?;
            let mut disp = 0.0f64;
            for (a, b) in interface_t0.iter().zip(&interface_t) {
                match (a, b) {
                    (Crossing::At(x0), Crossing::At(x1)) => disp = disp.max((x1 - x0).abs()),
                    _ => disp = f64::INFINITY,
                }
            }
            Ok(KRow {
                k,
                sup_u_err: sup_err,
                min_u_minus_uinf: min_one_sided,
                v_deficit,
                interface_disp: disp,
                dt: traj.meta.dt,
                h,
                sup_u_err_per_time: per_time,
            })
        })
        .collect();
    let rows = rows?;
    let one_sided_tol = 1e-8;
    let report = ConvergenceReport {
        sup_err_strictly_decreasing: rows.windows(2).all(|w| w[1].sup_u_err < w[0].sup_u_err),
        v_deficit_nonincreasing: rows.windows(2).all(|w| w[1].v_deficit <= w[0].v_deficit),
        one_sided_ok: rows.iter().all(|r| r.min_u_minus_uinf >= -one_sided_tol),
        one_sided_tol,
        rows,
        times,
        theta,
    };
    Ok(report)
}

fn positive_min(values: &[f64]) -> f64 {
    values
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// dominance_check
// ---------------------------------------------------------------------------

/// A space-time barrier envelope: an upper bound for u and a lower bound
/// for v on a region covering the trajectory domain.
pub trait BarrierEnvelope {
    fn k(&self) -> f64;
    fn upper_u(&self, x: f64, y: f64, t: f64) -> f64;
    fn lower_v(&self, x: f64, y: f64, t: f64) -> f64;
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    /// min over nodes/times of (U - u_k); pass needs >= -tol
    pub worst_u_margin: f64,
    /// min over nodes/times of (v_k - V); pass needs >= -tol
    pub worst_v_margin: f64,
    pub worst_u_location: String,
    pub worst_v_location: String,
    pub tol: f64,
    pub pass: bool,
}

/// Check that the barrier dominates the simulated trajectory:
/// u_k <= U + tol and v_k >= V - tol everywhere.
pub fn dominance_check<B: BarrierEnvelope>(
    traj: &Trajectory,
    barrier: &B,
    tol: f64,
) -> Result<DominanceReport> {
    let spec = ProblemSpec::from_toml(&traj.meta.config_echo)?;
    if (spec.k - barrier.k()).abs() > 1e-12 * spec.k.abs() {
        return Err(Error::Config(format!(
            "barrier built for k={}, trajectory ran at k={}",
            barrier.k(),
            spec.k
        )));
    }
    let mut worst_u = f64::INFINITY;
    let mut worst_v = f64::INFINITY;
    let mut loc_u = String::from("-");
    let mut loc_v = String::from("-");
    for snap in &traj.snapshots {
        for i in 0..snap.u.values.len() {
            let (x, y) = snap.u.grid.node(i);
            let mu = barrier.upper_u(x, y, snap.t) - snap.u.values[i];
            let mv = snap.v.values[i] - barrier.lower_v(x, y, snap.t);
            if mu < worst_u {
                worst_u = mu;
                loc_u = format!("t={}, x={x}, y={y}", snap.t);
            }
            if mv < worst_v {
                worst_v = mv;
                loc_v = format!("t={}, x={x}, y={y}", snap.t);
            }
        }
    }
    Ok(DominanceReport {
        worst_u_margin: worst_u,
        worst_v_margin: worst_v,
        worst_u_location: loc_u,
        worst_v_location: loc_v,
        tol,
        pass: worst_u >= -tol && worst_v >= -tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::canonical_p1;

    #[test]
    fn identical_trajectories_pass_with_zero_margin() {
        let spec = canonical_p1(101, 10.0, 1.0, 1.0, 0.02);
        let traj = run(&spec, &[0.01, 0.02]).unwrap();
        let rep = comparison_check(&traj.snapshots, &traj.snapshots, 1e-10).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.worst_u_margin, 0.0);
        assert_eq!(rep.worst_v_margin, 0.0);
    }

    #[test]
    fn swapped_strictly_ordered_pair_fails() {
        let grid = crate::grid::build_grid(&[(-1.0, 1.0)], &[101]).unwrap();
        let pairs = seeded_ordered_pairs(grid, 7, 1);
        let (u_hi, v_lo, u_lo, v_hi) = &pairs[0];
        let times = [0.01];
        let (sup, _) = run_fields(u_hi, v_lo, 10.0, 1.0, 1.0, 1e-4, &times).unwrap();
        let (sub, _) = run_fields(u_lo, v_hi, 10.0, 1.0, 1.0, 1e-4, &times).unwrap();
        let ok = comparison_check(&sup, &sub, 1e-10).unwrap();
        assert!(ok.pass);
        let swapped = comparison_check(&sub, &sup, 1e-10).unwrap();
        assert!(!swapped.pass);
        assert!(swapped.worst_u_margin < 0.0);
    }

    #[test]
    fn comparison_property_20_pairs() {
        let grid = crate::grid::build_grid(&[(-1.0, 1.0)], &[101]).unwrap();
        let rep =
            comparison_property_run(grid, 50.0, 2.0, 1.0, 0.05, crate::problem::DEFAULT_SEED, 20, 1e-10)
                .unwrap();
        println!(
            "comparison margins: u {:e}, v {:e} at {}",
            rep.worst_u_margin, rep.worst_v_margin, rep.worst_location
        );
        assert!(rep.pass, "worst margins {rep:?}");
    }

    #[test]
    fn interface_positions_at_t0() {
        let spec = canonical_p1(801, 10.0, 2.0, 1.0, 0.1);
        let (_u0, v0) = crate::problem::eval_initial_data(&spec).unwrap();
        let crossings = interface_position(&v0, &spec.geometry, 0.5).unwrap();
        assert_eq!(crossings.len(), 2);
        let h = spec.grid.axes[0].h;
        for (c, expect) in crossings.iter().zip([-0.3, 0.3]) {
            match c {
                Crossing::At(x) => assert!((x - expect).abs() <= h, "{x} vs {expect}"),
                Crossing::Absorbed => panic!("unexpected absorbed"),
            }
        }
    }

    #[test]
    fn uniformly_high_v_reports_absorbed() {
        let spec = canonical_p1(101, 10.0, 2.0, 1.0, 0.1);
        let v = Field::from_fn(spec.grid.clone(), 0.0, |_, _| 1.0);
        let crossings = interface_position(&v, &spec.geometry, 0.5).unwrap();
        assert!(crossings.iter().all(|c| matches!(c, Crossing::Absorbed)));
    }

    #[test]
    fn trivial_barrier_dominates() {
        struct Box_;
        impl BarrierEnvelope for Box_ {
            fn k(&self) -> f64 {
                100.0
            }
            fn upper_u(&self, _x: f64, _y: f64, _t: f64) -> f64 {
                2.0
            }
            fn lower_v(&self, _x: f64, _y: f64, _t: f64) -> f64 {
                0.0
            }
        }
        let spec = canonical_p1(101, 100.0, 2.0, 1.0, 0.02);
        let traj = run(&spec, &[0.01, 0.02]).unwrap();
        let rep = dominance_check(&traj, &Box_, 1e-8).unwrap();
        assert!(rep.pass);

        // fault injection: a scaled-down barrier must fail with a location
        struct Tiny;
        impl BarrierEnvelope for Tiny {
            fn k(&self) -> f64 {
                100.0
            }
            fn upper_u(&self, _x: f64, _y: f64, _t: f64) -> f64 {
                2.0e-3
            }
            fn lower_v(&self, _x: f64, _y: f64, _t: f64) -> f64 {
                0.0
            }
        }
        let rep = dominance_check(&traj, &Tiny, 1e-8).unwrap();
        assert!(!rep.pass);
        assert!(rep.worst_u_margin < 0.0);
        assert!(rep.worst_u_location.contains("x="));
    }

    #[test]
    fn k_sweep_smoke_on_coarse_grid() {
        let spec = canonical_p1(201, 1.0, 2.0, 1.0, 0.05);
        let region = CompactRegion::Intervals(vec![(-0.9, -0.45), (0.45, 0.9)]);
        let rep = k_sweep(&spec, &[1e2, 1e3], &region).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert!(rep.rows[0].sup_u_err.is_finite());
        assert!(rep.one_sided_ok, "u_k >= u_inf violated: {:?}", rep.rows);
        assert!(
            rep.sup_err_strictly_decreasing,
            "{:?}",
            rep.rows.iter().map(|r| r.sup_u_err).collect::<Vec<_>>()
        );
        let mut csv = Vec::new();
        rep.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("k,"));
    }

    #[test]
    fn k_sweep_rejects_region_too_close_to_interface() {
        let spec = canonical_p1(201, 1.0, 2.0, 1.0, 0.05);
        let region = CompactRegion::Intervals(vec![(0.30, 0.9)]);
        assert!(k_sweep(&spec, &[1e2], &region).is_err());
    }

    #[test]
    fn report_determinism() {
        let spec = canonical_p1(101, 1.0, 1.0, 2.0, 0.02);
        let region = CompactRegion::Intervals(vec![(0.5, 0.9)]);
        let a = k_sweep(&spec, &[10.0, 100.0], &region).unwrap();
        let b = k_sweep(&spec, &[10.0, 100.0], &region).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
