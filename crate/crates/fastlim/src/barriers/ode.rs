//! The integro-ODE barrier: U'' = a2 k U / (k I + b2) with I' = U,
//! U(0) = k^{-2/3}, U'(0) = 0, integrated on [0, k^{-1/6}].
//!
//! Its first integral U' = a2 (ln(k I + b2) - ln b2) is exact, so any
//! residual in it is pure integration error and serves as the accuracy
//! certificate. The report also checks the endpoint slope, the pointwise
//! bound k^{1/8} U' < U'' (empirical threshold recorded, not asserted), and
//! for m > 2 the power-mean bound on U''.

use super::{samples_for, BarrierParams, BarrierProfile, ConstructionKind, PieceForm, Segment};
use crate::error::{Error, Result};
use crate::numerics::rk45;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct OdeBarrierReport {
    pub a2: f64,
    pub b2: f64,
    pub m: f64,
    pub k: f64,
    /// sup over samples of |U' - a2 ln((k I + b2)/b2)|
    pub first_integral_residual: f64,
    pub endpoint_slope: f64,
    pub endpoint_slope_required: f64,
    pub endpoint_slope_ok: bool,
    /// min over samples of U'' - k^{1/8} U'
    pub k18_margin_min: f64,
    pub k18_ok: bool,
    /// min over samples of a2 k U ((m-1) k I + b2^(m-1))^(-1/(m-1)) - U''
    /// (only for m > 2; equality holds at m = 2)
    pub power_bound_margin_min: Option<f64>,
    pub power_bound_ok: Option<bool>,
    #[serde(skip)]
    pub profile: BarrierProfile,
}

/// Integrate the augmented system (U, U', I) and sample it at `ys`
/// (ascending, within [0, k^{-1/6}]). Returns [U, U', I] per sample.
pub(crate) fn integrate_ode(a2: f64, b2: f64, k: f64, ys: &[f64]) -> Result<Vec<[f64; 3]>> {
    let y0 = [k.powf(-2.0 / 3.0), 0.0, 0.0];
    let t_end = *ys.last().expect("nonempty sample list");
    if t_end == 0.0 {
        return Ok(vec![y0; ys.len()]);
    }
    let sol = rk45(
        |_t, y, dy| {
            dy[0] = y[1];
            dy[1] = a2 * k * y[0] / (k * y[2] + b2);
            dy[2] = y[0];
        },
        0.0,
        &y0,
        t_end,
        ys,
        1e-10,
        1e-300,
        100_000_000,
    )?;
    Ok(sol.outputs.iter().map(|(_, y)| [y[0], y[1], y[2]]).collect())
}

pub fn ode_barrier(a2: f64, b2: f64, m: f64, k: f64) -> Result<OdeBarrierReport> {
    if !(a2 > 0.0 && a2 <= 1.0) || !(b2 >= 1.0) || !(m >= 2.0) || !(k > 1.0) {
        return Err(Error::Config(format!(
            "ode barrier needs 0 < a2 <= 1, b2 >= 1, m >= 2, k > 1 (got a2={a2}, b2={b2}, m={m}, k={k})"
        )));
    }
    let len = k.powf(-1.0 / 6.0);
    let rate = (a2 * k / b2).sqrt();
    let n = samples_for(len, rate);
    let ys: Vec<f64> = (0..n).map(|i| len * i as f64 / (n - 1) as f64).collect();
    let states = integrate_ode(a2, b2, k, &ys)?;

    let lnk = k.ln();
    let mut first_integral_residual = 0.0f64;
    let mut k18_margin = f64::INFINITY;
    let k18 = k.powf(1.0 / 8.0);
    let mut power_margin = if m > 2.0 { Some(f64::INFINITY) } else { None };
    for st in &states {
        let [u, du, i_acc] = *st;
        let upp = a2 * k * u / (k * i_acc + b2);
        let fi = (du - a2 * ((k * i_acc + b2).ln() - b2.ln())).abs();
        first_integral_residual = first_integral_residual.max(fi);
        k18_margin = k18_margin.min(upp - k18 * du);
        if let Some(pm) = power_margin.as_mut() {
            let p = m - 1.0;
            let bound = a2 * k * u * (p * k * i_acc + b2.powf(p)).powf(-1.0 / p);
            *pm = (*pm).min(bound - upp);
        }
    }
    let endpoint_slope = states[n - 1][1];
    let endpoint_slope_required = a2 / 8.0 * lnk;

    let seg = Segment {
        u: states.iter().map(|s| s[0]).collect(),
        du: states.iter().map(|s| s[1]).collect(),
        v: vec![0.0; n],
        accum: states.iter().map(|s| s[2]).collect(),
        y: ys,
        form: PieceForm::Samples,
    };
    let profile = BarrierProfile {
        kind: ConstructionKind::Ode,
        segments: vec![seg],
        breakpoints: vec![("length".into(), len)],
        params: BarrierParams {
            k,
            a2: Some(a2),
            b2: Some(b2),
            m4: Some(m),
            ..Default::default()
        },
    };
    Ok(OdeBarrierReport {
        a2,
        b2,
        m,
        k,
        first_integral_residual,
        endpoint_slope,
        endpoint_slope_required,
        endpoint_slope_ok: endpoint_slope >= endpoint_slope_required,
        k18_margin_min: k18_margin,
        k18_ok: k18_margin > 0.0,
        power_bound_margin_min: power_margin,
        power_bound_ok: power_margin.map(|p| p >= -1e-12),
        profile,
    })
}

/// Scan k over powers of ten for the first decade at which
/// k^{1/8} U' < U'' holds everywhere (recorded, not asserted: the true
/// threshold can lie beyond any feasible integration range).
pub fn k18_threshold_scan(a2: f64, b2: f64, m: f64, k_min: f64, k_max: f64) -> Result<Option<f64>> {
    let mut k = 10f64.powf(k_min.log10().ceil());
    while k <= k_max * (1.0 + 1e-9) {
        if ode_barrier(a2, b2, m, k)?.k18_ok {
            return Ok(Some(k));
        }
        k *= 10.0;
    }
    Ok(None)
}
