//! The hyperbolic-cosine barrier U(x) = k^{-2} cosh(sqrt(a1 k) x) on
//! [-1/k, x_tilde] and the certification of its three defining conditions:
//! the window x_tilde in (1/k, k^{-1/3}), the unit bound on the integral of
//! k U^m, and the slope/size condition at x_tilde.
//!
//! The cut point x_tilde solves U(x_tilde) = k^{-1/(2 sqrt m)} for m > 1 and
//! U(x_tilde) = 2 k^{-2/3} for m = 1. The m > 1 exponent is the reading
//! under which the integral bound decays like k^{(1 - sqrt m)/2} and the
//! slope grows like k^{1/2 - 1/(2 sqrt m)}, so both conditions hold for
//! large k; the alternative literal exponent -sqrt(m)/2 (selectable for
//! comparison scans) makes the slope condition fail as k grows.

use super::{
    samples_for, BarrierParams, BarrierProfile, ConstructionKind, PieceForm, Segment,
};
use crate::error::{Error, Result};
use crate::numerics::{acosh_from_ln, adaptive_simpson, bisect, ln_cosh, ln_sinh_abs};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExponentRule {
    /// U(x_tilde) = k^{-1/(2 sqrt m)} for m > 1 (internally consistent).
    Corrected,
    /// U(x_tilde) = k^{-sqrt(m)/2} (the display being cross-checked).
    Literal,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoshBarrierReport {
    pub a1: f64,
    pub m: f64,
    pub k: f64,
    pub rule: ExponentRule,
    pub constructed: bool,
    pub failure: Option<String>,
    pub x_tilde: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub window_ok: bool,
    /// adaptive quadrature of k U^m over [-1/k, x_tilde] (tolerance 1e-12)
    pub integral_quadrature: f64,
    pub integral_quadrature_ok: bool,
    /// the closed-form majorant of the same integral
    pub integral_bound: f64,
    pub integral_bound_ok: bool,
    /// U'(x_tilde) for m > 1, U(x_tilde) for m = 1
    pub slope_or_size_value: f64,
    pub slope_or_size_required: f64,
    pub slope_or_size_ok: bool,
    pub all_pass: bool,
    #[serde(skip)]
    pub profile: Option<BarrierProfile>,
}

pub(crate) struct CoshEval {
    pub ln_scale: f64, // -2 ln k
    pub rate: f64,     // sqrt(a1 k)
}

impl CoshEval {
    pub fn new(a1: f64, k: f64) -> Self {
        CoshEval {
            ln_scale: -2.0 * k.ln(),
            rate: (a1 * k).sqrt(),
        }
    }

    pub fn u(&self, x: f64) -> f64 {
        (self.ln_scale + ln_cosh(self.rate * x)).exp()
    }

    pub fn du(&self, x: f64) -> f64 {
        let arg = self.rate * x;
        let mag = (self.ln_scale + self.rate.ln() + ln_sinh_abs(arg)).exp();
        if arg >= 0.0 {
            mag
        } else {
            -mag
        }
    }

    pub fn ln_u(&self, x: f64) -> f64 {
        self.ln_scale + ln_cosh(self.rate * x)
    }
}

/// Build and certify the cosh barrier with the corrected cut exponent.
pub fn cosh_barrier(a1: f64, m: f64, k: f64) -> Result<CoshBarrierReport> {
    cosh_barrier_with_rule(a1, m, k, ExponentRule::Corrected)
}

pub fn cosh_barrier_with_rule(
    a1: f64,
    m: f64,
    k: f64,
    rule: ExponentRule,
) -> Result<CoshBarrierReport> {
    if !(a1 > 0.0) || !(m >= 1.0) || !(k > 1.0) {
        return Err(Error::Config(format!(
            "cosh barrier needs a1 > 0, m >= 1, k > 1 (got a1={a1}, m={m}, k={k})"
        )));
    }
    let eval = CoshEval::new(a1, k);
    let lnk = k.ln();
    // target value of U at the cut point
    let ln_target = if m == 1.0 {
        2.0f64.ln() - 2.0 / 3.0 * lnk
    } else {
        match rule {
            ExponentRule::Corrected => -lnk / (2.0 * m.sqrt()),
            ExponentRule::Literal => -m.sqrt() / 2.0 * lnk,
        }
    };
    let mut report = CoshBarrierReport {
        a1,
        m,
        k,
        rule,
        constructed: false,
        failure: None,
        x_tilde: f64::NAN,
        window_lo: 1.0 / k,
        window_hi: k.powf(-1.0 / 3.0),
        window_ok: false,
        integral_quadrature: f64::NAN,
        integral_quadrature_ok: false,
        integral_bound: f64::NAN,
        integral_bound_ok: false,
        slope_or_size_value: f64::NAN,
        slope_or_size_required: f64::NAN,
        slope_or_size_ok: false,
        all_pass: false,
        profile: None,
    };
    // the cut solves ln U(x) = ln_target; U(0) = k^-2 is the minimum
    if ln_target <= eval.ln_scale {
        report.failure = Some(format!(
            "cut target {:.3e} below the vertex value k^-2 = {:.3e}; k below threshold",
            ln_target.exp(),
            eval.ln_scale.exp()
        ));
        return Ok(report);
    }
    // bracket by doubling, then bisect (monotone for x > 0)
    let obj = |x: f64| eval.ln_u(x) - ln_target;
    let mut hi = 1.0 / k;
    let mut tries = 0;
    while obj(hi) < 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 4000 {
            report.failure = Some("cut-point bracket not found".into());
            return Ok(report);
        }
    }
    let x_tilde = bisect(obj, 0.0, hi, 1e-14)?;
    report.x_tilde = x_tilde;
    report.window_ok = x_tilde > report.window_lo && x_tilde < report.window_hi;

    // quadrature of k U^m over [-1/k, x_tilde] at tolerance 1e-12
    let integrand = |x: f64| (k.ln() + m * eval.ln_u(x)).exp();
    let quad = adaptive_simpson(&integrand, -1.0 / k, x_tilde, 1e-12, 1e-300);
    report.integral_quadrature = quad;
    report.integral_quadrature_ok = quad < 1.0;

    // closed-form majorant from the construction
    report.integral_bound = if m == 1.0 {
        2.0 * (4.0 * k * k).ln() / a1.sqrt() * k.powf(-1.0 / 6.0)
    } else {
        2.0 * (2.0 * k * k).ln() / a1.sqrt() * (k.ln() * (1.0 - m.sqrt()) / 2.0).exp()
    };
    report.integral_bound_ok = report.integral_bound < 1.0;

    if m == 1.0 {
        report.slope_or_size_value = eval.u(x_tilde);
        report.slope_or_size_required = 2.0 * k.powf(-2.0 / 3.0);
        report.slope_or_size_ok =
            report.slope_or_size_value >= report.slope_or_size_required * (1.0 - 1e-12);
    } else {
        report.slope_or_size_value = eval.du(x_tilde);
        report.slope_or_size_required = lnk;
        report.slope_or_size_ok = report.slope_or_size_value >= report.slope_or_size_required;
    }

    // sampled profile on [-1/k, x_tilde]
    let n = samples_for(x_tilde + 1.0 / k, eval.rate);
    let lo = -1.0 / k;
    let ys: Vec<f64> = (0..n)
        .map(|i| lo + (x_tilde - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let seg = Segment {
        u: ys.iter().map(|&y| eval.u(y)).collect(),
        du: ys.iter().map(|&y| eval.du(y)).collect(),
        v: vec![0.0; n],
        accum: vec![0.0; n],
        y: ys,
        form: PieceForm::Cosh {
            ln_scale: eval.ln_scale,
            rate: eval.rate,
            center: 0.0,
        },
    };
    report.profile = Some(BarrierProfile {
        kind: ConstructionKind::Cosh,
        segments: vec![seg],
        breakpoints: vec![("x_tilde".into(), x_tilde)],
        params: BarrierParams {
            k,
            a1: Some(a1),
            m3: Some(m),
            ..Default::default()
        },
    });
    report.constructed = true;
    report.all_pass = report.window_ok
        && report.integral_quadrature_ok
        && report.integral_bound_ok
        && report.slope_or_size_ok;
    Ok(report)
}

/// Scan k over powers of ten and report the first value at which all
/// conditions pass, plus the per-k reports.
pub fn cosh_threshold_scan(
    a1: f64,
    m: f64,
    k_min: f64,
    k_max: f64,
) -> Result<(Option<f64>, Vec<CoshBarrierReport>)> {
    let mut reports = Vec::new();
    let mut threshold = None;
    let mut k = 10f64.powf(k_min.log10().ceil());
    while k <= k_max * (1.0 + 1e-9) {
        let rep = cosh_barrier(a1, m, k)?;
        if threshold.is_none() && rep.all_pass {
            threshold = Some(k);
        }
        reports.push(rep);
        k *= 10.0;
    }
    Ok((threshold, reports))
}
