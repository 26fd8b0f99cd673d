//! Discrete certification of differential inequalities by finite
//! differences on the profile samples.
//!
//! Derivative stencils never cross breakpoints: every segment is scanned on
//! its own, with centered 4th-order stencils inside and one-sided 4th-order
//! stencils at the first/last two samples. U' comes from the stored analytic
//! column; U'' is reconstructed from the U samples. The V-side inequality is
//! certified through the accumulated-integral column (see module docs in
//! `barriers`): its residual is k V^m4 (U^m3 - (s/k) A'_fd), which vanishes
//! to quadrature accuracy when V was built from A.

use super::{BarrierProfile, InequalityResidual, ResidualReport, Segment};
use crate::error::{Error, Result};

/// One inequality to scan over a profile.
#[derive(Debug, Clone, Copy)]
pub enum ScanCheck {
    /// -a3 |U'| - U'' + k U V >= 0
    Mo1 { a3: f64, k: f64 },
    /// s V' + k U^m3 V^m4 <= 0, certified via the accum column
    /// (accum = (k/s) int U^m3)
    Mo2 { s: f64, k: f64, m3: f64, m4: f64 },
    /// -U'' >= 0
    ConcaveU,
    /// identity |U'' - a1 k U| <= tol * scale
    CoshIdentity { a1: f64, k: f64 },
}

impl ScanCheck {
    fn name(&self) -> &'static str {
        match self {
            ScanCheck::Mo1 { .. } => "mo1",
            ScanCheck::Mo2 { .. } => "mo2",
            ScanCheck::ConcaveU => "concave_u",
            ScanCheck::CoshIdentity { .. } => "cosh_identity",
        }
    }
}

/// Finite-difference weights on an arbitrary stencil (Fornberg's algorithm):
/// weights w such that sum w_i f(x_i) approximates f^(m)(z).
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0f64; m + 1]; n];
    let mut c1 = 1.0f64;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0f64;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for v in (1..=mn).rev() {
                    c[i][v] = c1 * (v as f64 * c[i - 1][v - 1] - c5 * c[i - 1][v]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for v in (1..=mn).rev() {
                c[j][v] = (c4 * c[j][v] - v as f64 * c[j][v - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// 4th-order derivative of order `m` (1 or 2) of `vals` at index `i` within
/// a uniformly sampled segment, using centered stencils inside and
/// one-sided stencils near the segment ends.
fn fd(vals: &[f64], i: usize, h: f64, m: usize) -> f64 {
    let n = vals.len();
    let width = m + 4; // points needed for 4th-order accuracy
    let lo = if i < 2 {
        0
    } else if i + 2 >= n {
        n - width
    } else {
        i - 2
    };
    let lo = lo.min(n - width);
    let xs: Vec<f64> = (0..width).map(|j| (lo + j) as f64 * h).collect();
    let w = fornberg_weights(i as f64 * h, &xs, m);
    (0..width).map(|j| w[j] * vals[lo + j]).sum()
}

struct Worst {
    residual: f64,
    argmin: f64,
    scale: f64,
}

impl Worst {
    fn new() -> Self {
        Worst {
            residual: f64::INFINITY,
            argmin: f64::NAN,
            scale: 0.0,
        }
    }

    fn update(&mut self, residual: f64, y: f64, scale: f64) {
        // track the worst residual relative to its local scale
        let rel = residual / scale.max(f64::MIN_POSITIVE);
        let cur = self.residual / self.scale.max(f64::MIN_POSITIVE);
        if rel < cur {
            self.residual = residual;
            self.argmin = y;
            self.scale = scale;
        }
    }
}

fn scan_segment(seg: &Segment, check: &ScanCheck, worst: &mut Worst) {
    let n = seg.len();
    let h = seg.h();
    for i in 0..n {
        let y = seg.y[i];
        match *check {
            ScanCheck::Mo1 { a3, k } => {
                let upp = fd(&seg.u, i, h, 2);
                let residual = -a3 * seg.du[i].abs() - upp + k * seg.u[i] * seg.v[i];
                let scale = k * seg.u[i] * seg.v[i] + a3 * seg.du[i].abs() + upp.abs();
                worst.update(residual, y, scale);
            }
            ScanCheck::Mo2 { s, k, m3, m4 } => {
                let da = fd(&seg.accum, i, h, 1);
                let upow = if m3 == 1.0 { seg.u[i] } else { seg.u[i].powf(m3) };
                let vpow = if m4 == 1.0 { seg.v[i] } else { seg.v[i].powf(m4) };
                // s V' + k U^m3 V^m4 with V' = -V^m4 * A'
                let residual = vpow * (k * upow - s * da);
                let scale = k * upow * vpow;
                // mo2 must be <= 0: flip so violations are negative
                worst.update(-residual, y, scale);
            }
            ScanCheck::ConcaveU => {
                let upp = fd(&seg.u, i, h, 2);
                worst.update(-upp, y, upp.abs().max(1.0));
            }
            ScanCheck::CoshIdentity { a1, k } => {
                let upp = fd(&seg.u, i, h, 2);
                let residual = -(upp - a1 * k * seg.u[i]).abs();
                worst.update(residual, y, a1 * k * seg.u[i]);
            }
        }
    }
}

/// Scan the listed inequalities over every sample of the profile.
/// `tol` is relative to each check's local scale; `pass` means the worst
/// signed residual stays above -tol * scale.
pub fn residual_scan(
    profile: &BarrierProfile,
    checks: &[ScanCheck],
    tol: f64,
) -> Result<ResidualReport> {
    profile.validate()?;
    for (si, seg) in profile.segments.iter().enumerate() {
        if seg.len() < 8 {
            return Err(Error::Config(format!(
                "segment {si} has {} samples; the 4th-order stencils need >= 8 — rebuild the profile with more samples per piece",
                seg.len()
            )));
        }
    }
    let mut report = ResidualReport::default();
    for check in checks {
        let mut worst = Worst::new();
        for seg in &profile.segments {
            scan_segment(seg, check, &mut worst);
        }
        let pass = worst.residual >= -tol * worst.scale.max(f64::MIN_POSITIVE);
        report.push(InequalityResidual {
            name: check.name().into(),
            min_residual: worst.residual,
            argmin: worst.argmin,
            tol,
            scale_at_argmin: worst.scale,
            pass,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barriers::{BarrierParams, ConstructionKind, PieceForm};

    fn segment_from_fn(
        a: f64,
        b: f64,
        n: usize,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
    ) -> Segment {
        let ys: Vec<f64> = (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect();
        Segment {
            u: ys.iter().map(|&y| f(y)).collect(),
            du: ys.iter().map(|&y| df(y)).collect(),
            v: vec![0.0; n],
            accum: vec![0.0; n],
            y: ys,
            form: PieceForm::Samples,
        }
    }

    fn wrap(seg: Segment) -> BarrierProfile {
        BarrierProfile {
            kind: ConstructionKind::Patched,
            segments: vec![seg],
            breakpoints: vec![],
            params: BarrierParams::default(),
        }
    }

    #[test]
    fn fornberg_reproduces_centered_weights() {
        let xs: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let w2 = fornberg_weights(2.0, &xs, 2);
        let expect = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w2.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{w2:?}");
        }
        let w1 = fornberg_weights(0.0, &xs, 1);
        let expect1 = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -1.0 / 4.0];
        for (a, b) in w1.iter().zip(expect1) {
            assert!((a - b).abs() < 1e-12, "{w1:?}");
        }
    }

    #[test]
    fn linear_profile_has_zero_concavity_residual() {
        let seg = segment_from_fn(0.0, 1.0, 64, |y| 2.0 + 3.0 * y, |_| 3.0);
        let rep = residual_scan(&wrap(seg), &[ScanCheck::ConcaveU], 1e-12).unwrap();
        let r = rep.get("concave_u").unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.min_residual.abs() < 1e-12);
    }

    #[test]
    fn cosh_identity_scan_passes_at_1e8_relative() {
        let k = 1e6f64;
        let a1 = 1.0;
        let rate = (a1 * k).sqrt();
        let x_hi = 30.0 / rate;
        let n = crate::barriers::samples_for(x_hi + 1.0 / k, rate);
        let seg = segment_from_fn(
            -1.0 / k,
            x_hi,
            n,
            |y| (rate * y).cosh() / (k * k),
            |y| rate * (rate * y).sinh() / (k * k),
        );
        let rep = residual_scan(&wrap(seg), &[ScanCheck::CoshIdentity { a1, k }], 1e-8).unwrap();
        let r = rep.get("cosh_identity").unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn corrupted_sample_fails_with_correct_argmin() {
        let k = 1e4f64;
        let a1 = 1.0;
        let rate = (a1 * k).sqrt();
        let x_hi = 10.0 / rate;
        let mut seg = segment_from_fn(
            0.0,
            x_hi,
            512,
            |y| (rate * y).cosh() / (k * k),
            |y| rate * (rate * y).sinh() / (k * k),
        );
        let bad = 300;
        let bad_y = seg.y[bad];
        seg.u[bad] = -seg.u[bad];
        let rep = residual_scan(&wrap(seg), &[ScanCheck::CoshIdentity { a1, k }], 1e-8).unwrap();
        let r = rep.get("cosh_identity").unwrap();
        assert!(!r.pass);
        assert!(
            (r.argmin - bad_y).abs() <= 3.0 * (x_hi / 511.0),
            "argmin {} vs corrupted {}",
            r.argmin,
            bad_y
        );
    }

    #[test]
    fn refuses_undersampled_segments() {
        let seg = segment_from_fn(0.0, 1.0, 32, |y| y, |_| 1.0);
        let mut profile = wrap(seg);
        profile.segments[0].y.truncate(6);
        profile.segments[0].u.truncate(6);
        profile.segments[0].du.truncate(6);
        profile.segments[0].v.truncate(6);
        profile.segments[0].accum.truncate(6);
        assert!(residual_scan(&profile, &[ScanCheck::ConcaveU], 1e-8).is_err());
    }

    #[test]
    fn mo2_consistency_on_built_v() {
        // build a smooth U, accumulate A, fill V; the mo2 scan must pass at
        // the 1e-8 level because V solves the inequality with equality
        let (k, s, m3, m4) = (1e6f64, 0.25f64, 2.0f64, 1.0f64);
        let n = 4096;
        let mut seg = segment_from_fn(
            0.0,
            0.5,
            n,
            |y| 1e-3 + y * y,
            |y| 2.0 * y,
        );
        crate::barriers::accumulate_power_integral(std::slice::from_mut(&mut seg), m3, k / s);
        crate::barriers::fill_v_from_accum(std::slice::from_mut(&mut seg), 2.0, m4);
        let rep = residual_scan(&wrap(seg), &[ScanCheck::Mo2 { s, k, m3, m4 }], 1e-8).unwrap();
        let r = rep.get("mo2").unwrap();
        assert!(r.pass, "{r:?}");
    }
}
