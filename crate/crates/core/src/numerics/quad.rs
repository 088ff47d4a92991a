//! Quadrature rules.
//!
//! Two independent adaptive rules are provided on purpose: Gauss-Kronrod 7-15
//! is the workhorse, adaptive Simpson is the second opinion used by the
//! two-rule agreement checks. They share no kernel code. Fixed Gauss-Legendre
//! covers the smooth parametric integrals of the saddle charts.

use crate::error::{Error, Result};
use std::sync::OnceLock;

// QUADPACK qk15 abscissae/weights (positive half; last xgk entry is the center).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

/// One Gauss-Kronrod 7-15 panel: returns (estimate, error estimate).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(center - x) + f(center + x);
        res_k += WGK[j] * fsum;
        if j % 2 == 1 {
            res_g += WG[j / 2] * fsum;
        }
    }
    (res_k * half, ((res_k - res_g) * half).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` on `[a, b]` to absolute accuracy
/// `tol`. Interval orientation is respected (a > b negates).
pub fn adaptive_gk(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let f = &f;
    let mut stack = vec![(lo, hi, gk15(f, lo, hi))];
    let mut total = 0.0;
    let mut err_accum = 0.0;
    let max_panels = 4000;
    let mut panels = 0;
    while let Some((x0, x1, (est, err))) = stack.pop() {
        panels += 1;
        let width = x1 - x0;
        if err <= tol * width / (hi - lo) || width < 1e-14 * (hi - lo) || panels > max_panels {
            if panels > max_panels && err > tol {
                return Err(Error::QuadratureFailed { a, b, err });
            }
            total += est;
            err_accum += err;
            continue;
        }
        let mid = 0.5 * (x0 + x1);
        stack.push((x0, mid, gk15(f, x0, mid)));
        stack.push((mid, x1, gk15(f, mid, x1)));
    }
    if !total.is_finite() {
        return Err(Error::QuadratureSingular { a, b });
    }
    let _ = err_accum;
    Ok(sign * total)
}

/// Adaptive Simpson integration (independent second rule).
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let f = &f;
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 {
            return Err(Error::QuadratureFailed { a, b, err: delta.abs() });
        }
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        Ok(recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)?)
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let fa = f(lo);
    let fb = f(hi);
    let fm = f(0.5 * (lo + hi));
    let whole = simpson(lo, fa, hi, fb, fm);
    let v = recurse(f, lo, fa, hi, fb, fm, whole, tol, 48)?;
    if !v.is_finite() {
        return Err(Error::QuadratureSingular { a, b });
    }
    Ok(sign * v)
}

const GL_N: usize = 32;

fn gl_nodes() -> &'static ([f64; GL_N], [f64; GL_N]) {
    static NODES: OnceLock<([f64; GL_N], [f64; GL_N])> = OnceLock::new();
    NODES.get_or_init(|| {
        // Newton iteration on P_n with the usual cosine initial guesses.
        let n = GL_N;
        let mut xs = [0.0; GL_N];
        let mut ws = [0.0; GL_N];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            xs[i] = x;
            ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (xs, ws)
    })
}

/// Legendre P_n(x) and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Fixed 32-point Gauss-Legendre quadrature on [0, 1]; intended for smooth
/// parametric integrands (the saddle-chart j and h integrals).
pub fn gauss_legendre_01(f: impl Fn(f64) -> f64) -> f64 {
    let (xs, ws) = gl_nodes();
    let mut acc = 0.0;
    for i in 0..GL_N {
        let t = 0.5 * (xs[i] + 1.0);
        acc += ws[i] * f(t);
    }
    0.5 * acc
}
