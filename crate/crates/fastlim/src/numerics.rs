//! Shared numerical kernels: bisection, adaptive quadrature, an adaptive
//! Runge-Kutta integrator, overflow-safe hyperbolics and number formatting.

use crate::error::{Error, Result};

/// Natural log of cosh(x), safe for |x| up to ~1e300.
///
/// ln cosh x = |x| + ln(1 + e^{-2|x|}) - ln 2.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Natural log of |sinh(x)|, safe for large |x|. Returns -inf at x = 0.
pub fn ln_sinh_abs(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        return f64::NEG_INFINITY;
    }
    if a < 1e-8 {
        return a.ln();
    }
    a + (-(-2.0 * a).exp()).ln_1p() - std::f64::consts::LN_2
}

/// Inverse hyperbolic cosine evaluated in log space: returns acosh(exp(ln_z))
/// for ln_z = ln(z), valid for z >= 1 of any magnitude representable in logs.
pub fn acosh_from_ln(ln_z: f64) -> f64 {
    // acosh z = ln(z + sqrt(z^2 - 1)) = ln z + ln(1 + sqrt(1 - z^-2))
    if ln_z < 0.0 {
        return f64::NAN;
    }
    if ln_z < 30.0 {
        let z = ln_z.exp();
        return z.acosh();
    }
    let inv2 = (-2.0 * ln_z).exp();
    ln_z + (1.0 + (1.0 - inv2).sqrt()).ln()
}

/// Bisection to relative tolerance `rel_tol` on a bracket [a, b] with
/// f(a), f(b) of opposite sign. The callers guarantee monotonicity, so the
/// returned point is the unique root of f on the bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, rel_tol: f64) -> Result<f64> {
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!(
            "bisection bracket [{a:e}, {b:e}] does not change sign (f(a)={fa:e}, f(b)={fb:e})"
        )));
    }
    let mut fa = fa;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= rel_tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Adaptive Simpson quadrature with absolute+relative error control.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        rel_tol: f64,
        abs_tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth >= 60 || delta.abs() <= 15.0 * (abs_tol + rel_tol * (left + right).abs()) {
            return left + right + delta / 15.0;
        }
        let half_abs = 0.5 * abs_tol;
        recurse(f, a, m, fa, flm, fm, left, rel_tol, half_abs, depth + 1)
            + recurse(f, m, b, fm, frm, fb, right, rel_tol, half_abs, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, rel_tol, abs_tol, 0)
}

/// Outcome of one adaptive integration run.
pub struct OdeSolution {
    /// (t, y) at every requested output point, in order.
    pub outputs: Vec<(f64, Vec<f64>)>,
    pub steps_accepted: u64,
    pub steps_rejected: u64,
}

/// Dormand-Prince 5(4) adaptive integrator. `rhs(t, y, dy)` fills dy.
/// Output points must be increasing and within [t0, t_end]; the integrator
/// lands on each exactly. Error control: max_i |e_i| / (atol + rtol|y_i|) <= 1.
pub fn rk45<F: FnMut(f64, &[f64], &mut [f64])>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    outputs: &[f64],
    rtol: f64,
    atol: f64,
    max_steps: u64,
) -> Result<OdeSolution> {
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    // embedded 4th order weights
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;

    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut out = Vec::with_capacity(outputs.len());
    let mut out_iter = outputs.iter().copied().peekable();
    while let Some(&tn) = out_iter.peek() {
        if tn <= t0 {
            out.push((tn, y.clone()));
            out_iter.next();
        } else {
            break;
        }
    }

    let mut k = vec![vec![0.0f64; n]; 7];
    let mut ytmp = vec![0.0f64; n];
    rhs(t, &y, &mut k[0]);
    let mut h = ((t_end - t0) / 100.0).min(1e-3 * (t_end - t0).max(1e-30)).max(1e-14);
    let mut accepted = 0u64;
    let mut rejected = 0u64;

    while t < t_end {
        if accepted + rejected > max_steps {
            return Err(Error::Numerical(format!(
                "ODE integrator exceeded step budget ({max_steps}) at t={t:e}"
            )));
        }
        let next_stop = out_iter.peek().copied().unwrap_or(t_end).min(t_end);
        if t + h > next_stop {
            h = next_stop - t;
        }
        // stages
        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k[0][i];
        }
        rhs(t + h / 5.0, &ytmp, &mut k[1]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        rhs(t + 0.3 * h, &ytmp, &mut k[2]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        rhs(t + 0.8 * h, &ytmp, &mut k[3]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        rhs(t + 8.0 / 9.0 * h, &ytmp, &mut k[4]);
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i]
                    + A65 * k[4][i]);
        }
        rhs(t + h, &ytmp, &mut k[5]);
        let mut y5 = vec![0.0f64; n];
        for i in 0..n {
            y5[i] = y[i]
                + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        rhs(t + h, &y5, &mut k[6]);
        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
            let sc = atol + rtol * y[i].abs().max(y5[i].abs());
            err = err.max((e / sc).abs());
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            k.swap(0, 6); // FSAL
            accepted += 1;
            while let Some(&tn) = out_iter.peek() {
                if tn <= t + 1e-14 * t.abs().max(1.0) {
                    out.push((tn, y.clone()));
                    out_iter.next();
                } else {
                    break;
                }
            }
        } else {
            rejected += 1;
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * fac).max(1e-300);
        if t < t_end && h < 1e-16 * t_end.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "ODE integrator step size underflow at t={t:e}"
            )));
        }
    }
    for (tn, _) in out_iter.by_ref().map(|tn| (tn, ())) {
        out.push((tn, y.clone()));
    }
    Ok(OdeSolution {
        outputs: out,
        steps_accepted: accepted,
        steps_rejected: rejected,
    })
}

/// Format a float like C's `%.17g`: 17 significant digits, trailing zeros
/// trimmed, scientific notation outside the fixed-point exponent range.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{:.16e}", x);
    // split "d.dddd...e±exp"
    let (mant, exp) = sci.split_once('e').expect("exponent in sci format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let neg = x < 0.0;
    let trimmed: String = {
        let t = digits.trim_end_matches('0');
        if t.is_empty() { "0" } else { t }.to_string()
    };
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    if exp < -4 || exp >= 17 {
        s.push_str(&trimmed[..1]);
        if trimmed.len() > 1 {
            s.push('.');
            s.push_str(&trimmed[1..]);
        }
        s.push('e');
        if exp >= 0 {
            s.push('+');
        } else {
            s.push('-');
        }
        let ea = exp.unsigned_abs();
        if ea < 10 {
            s.push('0');
        }
        s.push_str(&ea.to_string());
    } else if exp >= 0 {
        let e = exp as usize;
        if trimmed.len() > e + 1 {
            s.push_str(&trimmed[..=e]);
            s.push('.');
            s.push_str(&trimmed[e + 1..]);
        } else {
            s.push_str(&trimmed);
            for _ in 0..(e + 1 - trimmed.len()) {
                s.push('0');
            }
        }
    } else {
        s.push_str("0.");
        for _ in 0..(-exp - 1) {
            s.push('0');
        }
        s.push_str(&trimmed);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_cosh_matches_direct_for_moderate_args() {
        for &x in &[0.0, 0.5, -3.0, 10.0, 25.0] {
            let direct = x.cosh().ln();
            assert!((ln_cosh(x) - direct).abs() <= 1e-13 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn ln_cosh_large_arg() {
        // cosh(800) overflows f64; ln cosh 800 = 800 - ln 2
        let v = ln_cosh(800.0);
        assert!((v - (800.0 - std::f64::consts::LN_2)).abs() < 1e-10);
    }

    #[test]
    fn acosh_roundtrip() {
        for &lnz in &[0.1, 1.0, 40.0, 200.0] {
            let w = acosh_from_ln(lnz);
            assert!((ln_cosh(w) - lnz).abs() < 1e-11 * lnz.max(1.0), "lnz={lnz}");
        }
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        assert!(bisect(|x| x * x + 1.0, 0.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn simpson_integrates_exp() {
        let v = adaptive_simpson(&|x: f64| x.exp(), 0.0, 1.0, 1e-13, 1e-300);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn simpson_handles_sharp_boundary_layer() {
        // integrand e^{c(x-1)} concentrated at x = 1
        let c = 1e6;
        let v = adaptive_simpson(&|x: f64| (c * (x - 1.0)).exp(), 0.0, 1.0, 1e-12, 1e-300);
        let exact = (1.0 - (-c).exp()) / c;
        assert!(
            ((v - exact) / exact).abs() < 1e-10,
            "v={v:e} exact={exact:e}"
        );
    }

    #[test]
    fn rk45_exponential_decay() {
        let sol = rk45(
            |_t, y, dy| dy[0] = -y[0],
            0.0,
            &[1.0],
            2.0,
            &[1.0, 2.0],
            1e-12,
            1e-14,
            1_000_000,
        )
        .unwrap();
        assert_eq!(sol.outputs.len(), 2);
        assert!((sol.outputs[0].1[0] - (-1.0f64).exp()).abs() < 1e-11);
        assert!((sol.outputs[1].1[0] - (-2.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn g17_formatting() {
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(0.0025), "0.0025");
        assert_eq!(fmt_g17(1e-5), "1e-05");
        assert_eq!(fmt_g17(12345678.0), "12345678");
        // round-trip at full precision
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 6.25e-6, 1e17, 123.456e-21] {
            let s = fmt_g17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }
}
