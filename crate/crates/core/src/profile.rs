//! The periodic profile f and its combinatorial geometry: verified period,
//! zeros with slopes, sign bands, critical points, symmetry axis.
//!
//! f is the squared norm of the Killing field in the transverse coordinate;
//! everything downstream (geodesics, Jacobi data, certificates) reads f and
//! its first three derivatives through this module.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::root;
use serde::{Deserialize, Serialize};

/// Numeric tolerances shared across the pipeline.
///
/// `tol_root`/`margin_simple` protect the square-root substitution at band
/// boundaries: a near-degenerate zero of f silently breaks it, so certifiable
/// profiles must clear the slope margin at every zero.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// root refinement in x (and event polish in t)
    pub tol_root: f64,
    /// periodicity / symmetry residuals
    pub tol_sym: f64,
    /// minimum |f'| at a zero of a certifiable profile
    pub margin_simple: f64,
    /// certificate margins below this are Degenerate, never a verdict
    pub tol_sign: f64,
    /// "C^2 equals a critical value" detection
    pub tol_crit: f64,
    /// ODE relative tolerance
    pub ode_rtol: f64,
    /// ODE absolute tolerance
    pub ode_atol: f64,
    /// adaptive quadrature absolute tolerance
    pub quad_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_root: 1e-12,
            tol_sym: 1e-9,
            margin_simple: 1e-6,
            tol_sign: 1e-6,
            tol_crit: 1e-9,
            ode_rtol: 1e-11,
            ode_atol: 1e-11,
            quad_tol: 1e-10,
        }
    }
}

/// One sign-component of {f != 0} in a period, bounded by consecutive zeros.
#[derive(Debug, Clone, Serialize)]
pub struct Band {
    /// left boundary zero (in [0, P))
    pub lo: f64,
    /// right boundary zero; `hi > lo`, possibly past P for the wrapping band
    pub hi: f64,
    /// sign of f on the interior
    pub sign: i8,
    /// M_eps = sup of sign*f over the band
    pub sup_abs: f64,
    /// interior critical point where the sup is attained
    pub sup_at: f64,
    /// critical points of f strictly inside
    pub critical_xs: Vec<f64>,
    /// zeros of f'' strictly inside
    pub curvature_zeros: Vec<f64>,
    /// f'(lo) + f'(hi): the lambda-obstruction residual for this zero pair
    pub obstruction_residual: f64,
}

/// Flag describing why a profile cannot be certified (it stays inspectable).
#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum ProfileFlag {
    /// f is constant: flat metric, certification short-circuits
    Flat { value: f64 },
    /// f never vanishes: single band, no null orbits
    NoZeros,
    /// a zero of f with |f'| at or below margin_simple
    DegenerateZero { x: f64, slope: f64 },
}

/// A periodic profile with verified combinatorial data.
#[derive(Debug, Clone)]
pub struct FProfile {
    pub source: String,
    expr: Expr,
    deriv: [Expr; 3],
    pub period: f64,
    /// ordered zeros of f in [0, P)
    pub zeros: Vec<f64>,
    /// f' at each zero
    pub zero_slopes: Vec<f64>,
    pub bands: Vec<Band>,
    /// critical points of f in [0, P)
    pub critical_points: Vec<f64>,
    pub symmetry_axis: Option<f64>,
    pub n_bands: usize,
    pub flag: Option<ProfileFlag>,
    pub tol: Tolerances,
}

const ZERO_GRID: usize = 10_000;

impl FProfile {
    pub fn f(&self, x: f64) -> f64 {
        self.expr.eval(x).unwrap_or(f64::NAN)
    }
    pub fn f1(&self, x: f64) -> f64 {
        self.deriv[0].eval(x).unwrap_or(f64::NAN)
    }
    pub fn f2(&self, x: f64) -> f64 {
        self.deriv[1].eval(x).unwrap_or(f64::NAN)
    }
    pub fn f3(&self, x: f64) -> f64 {
        self.deriv[2].eval(x).unwrap_or(f64::NAN)
    }

    /// Exact rule-based derivatives (f, f', f'', f''') at x, with domain errors
    /// surfaced instead of NaN-propagated.
    pub fn sample_derivatives(&self, x: f64) -> Result<(f64, f64, f64, f64)> {
        let wrap = |r: std::result::Result<f64, String>| {
            r.map_err(|message| Error::Domain { x, message })
        };
        Ok((
            wrap(self.expr.eval(x))?,
            wrap(self.deriv[0].eval(x))?,
            wrap(self.deriv[1].eval(x))?,
            wrap(self.deriv[2].eval(x))?,
        ))
    }

    /// True when the profile may enter certification (simple zeros, sign
    /// changes present, not flat).
    pub fn certifiable(&self) -> bool {
        self.flag.is_none()
    }

    /// The band containing x (taken mod P), if x is not on a zero.
    pub fn band_of(&self, x: f64) -> Option<&Band> {
        let xm = x.rem_euclid(self.period);
        self.bands
            .iter()
            .find(|b| (b.lo < xm && xm < b.hi) || (b.lo < xm + self.period && xm + self.period < b.hi))
    }
}

/// Build and validate a profile from a parsed expression.
///
/// The verified period is the smallest hint/k (k = 1..16) passing the
/// periodicity residual test; zeros come from a 10^4-point sign-change grid
/// refined by bisection + Newton; tangential zeros (f = 0 at a critical point,
/// no sign change) are caught by scanning critical points.
pub fn build_profile(
    expr: Expr,
    source: &str,
    hint_period: f64,
    tol: Tolerances,
) -> Result<FProfile> {
    if !(hint_period > 0.0) {
        return Err(Error::Config(format!("period hint must be positive, got {hint_period}")));
    }
    let deriv = {
        let d1 = expr.diff();
        let d2 = d1.diff();
        let d3 = d2.diff();
        [d1, d2, d3]
    };

    // evaluability screen over [0, 4*hint]
    let mut scale: f64 = 0.0;
    let mut fmin = f64::INFINITY;
    let mut fmax = f64::NEG_INFINITY;
    for i in 0..=2048 {
        let x = 4.0 * hint_period * i as f64 / 2048.0;
        let v = expr.eval(x).map_err(|message| Error::Domain { x, message })?;
        deriv[0].eval(x).map_err(|message| Error::Domain { x, message })?;
        scale = scale.max(v.abs());
        fmin = fmin.min(v);
        fmax = fmax.max(v);
    }

    let feval = |x: f64| expr.eval(x).unwrap_or(f64::NAN);
    let f1 = |x: f64| deriv[0].eval(x).unwrap_or(f64::NAN);
    let f2 = |x: f64| deriv[1].eval(x).unwrap_or(f64::NAN);

    // flat profile short-circuits everything
    if fmax - fmin <= 1e-12 * (1.0 + scale) {
        let value = 0.5 * (fmin + fmax);
        return Ok(FProfile {
            source: source.to_string(),
            expr,
            deriv,
            period: hint_period,
            zeros: vec![],
            zero_slopes: vec![],
            bands: vec![],
            critical_points: vec![],
            symmetry_axis: None,
            n_bands: 0,
            flag: Some(ProfileFlag::Flat { value }),
            tol,
        });
    }

    // verified smallest period among hint/k
    let residual_of = |p: f64| -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..512 {
            // irrational stride de-aliases the grid from the candidate period
            let x = (i as f64 * 0.618_033_988_749_895).rem_euclid(1.0) * p;
            r = r.max((feval(x + p) - feval(x)).abs());
        }
        r
    };
    let mut period = None;
    for k in (1..=16).rev() {
        let p = hint_period / k as f64;
        if residual_of(p) < tol.tol_sym * (1.0 + scale) {
            period = Some(p);
            break;
        }
    }
    let period = period.ok_or(Error::NonPeriodic { residual: residual_of(hint_period) })?;

    // zeros of f in [0, P)
    let eps_x = tol.tol_root;
    let raw = root::grid_roots(feval, 0.0, period, ZERO_GRID, eps_x);
    let mut zeros: Vec<f64> = Vec::new();
    for z in raw {
        let zm = z.rem_euclid(period);
        let zm = if period - zm < 1e-9 { 0.0 } else { zm };
        if zeros.iter().all(|&w| (w - zm).abs() > 1e-9) {
            zeros.push(zm);
        }
    }
    zeros.sort_by(f64::total_cmp);

    // polish zeros with the exact derivative
    for z in zeros.iter_mut() {
        let d = f1(*z);
        if d.abs() > 1e-12 {
            for _ in 0..3 {
                *z -= feval(*z) / f1(*z);
            }
        }
    }

    let zero_slopes: Vec<f64> = zeros.iter().map(|&z| f1(z)).collect();

    let critical_points = root::grid_roots(f1, 0.0, period, ZERO_GRID, eps_x);

    let mut flag = None;
    if zeros.is_empty() {
        flag = Some(ProfileFlag::NoZeros);
    }
    for (&z, &s) in zeros.iter().zip(&zero_slopes) {
        if s.abs() <= tol.margin_simple {
            flag = Some(ProfileFlag::DegenerateZero { x: z, slope: s });
        }
    }
    // tangential zeros: f vanishes at a critical point without a sign change
    if flag.is_none() {
        for &c in &critical_points {
            if feval(c).abs() < 1e-10 * (1.0 + scale)
                && zeros.iter().all(|&z| (z - c).abs() > 1e-6)
            {
                flag = Some(ProfileFlag::DegenerateZero { x: c, slope: f1(c) });
            }
        }
    }

    // bands between consecutive zeros (cyclically; last one wraps past P)
    let mut bands = Vec::new();
    let n = zeros.len();
    for k in 0..n {
        let lo = zeros[k];
        let hi = if k + 1 < n { zeros[k + 1] } else { zeros[0] + period };
        let mid = 0.5 * (lo + hi);
        let sign = if feval(mid) > 0.0 { 1i8 } else { -1i8 };
        let inside = |c: f64| {
            let margin = 1e-9;
            (lo + margin < c && c < hi - margin)
                || (lo + margin < c + period && c + period < hi - margin)
        };
        let critical_xs: Vec<f64> = critical_points
            .iter()
            .copied()
            .map(|c| if c > lo { c } else { c + period })
            .filter(|&c| inside(c))
            .collect();
        let curvature_zeros: Vec<f64> = root::grid_roots(f2, 0.0, period, ZERO_GRID, eps_x)
            .into_iter()
            .map(|c| if c > lo { c } else { c + period })
            .filter(|&c| inside(c))
            .collect();
        let (mut sup_abs, mut sup_at) = (0.0f64, mid);
        for &c in &critical_xs {
            let v = sign as f64 * feval(c);
            if v > sup_abs {
                sup_abs = v;
                sup_at = c;
            }
        }
        if critical_xs.is_empty() {
            // fallback: fine scan (cannot happen for smooth sign-changing f,
            // kept for robustness)
            for i in 1..512 {
                let x = lo + (hi - lo) * i as f64 / 512.0;
                let v = sign as f64 * feval(x);
                if v > sup_abs {
                    sup_abs = v;
                    sup_at = x;
                }
            }
        }
        let next_slope = if k + 1 < n { zero_slopes[k + 1] } else { zero_slopes[0] };
        bands.push(Band {
            lo,
            hi,
            sign,
            sup_abs,
            sup_at,
            critical_xs,
            curvature_zeros,
            obstruction_residual: zero_slopes[k] + next_slope,
        });
    }
    if n == 0 {
        let sign = if feval(0.0) > 0.0 { 1 } else { -1 };
        let mut sup_abs = 0.0f64;
        let mut sup_at = 0.0;
        for &c in &critical_points {
            let v = sign as f64 * feval(c);
            if v > sup_abs {
                sup_abs = v;
                sup_at = c;
            }
        }
        bands.push(Band {
            lo: 0.0,
            hi: period,
            sign,
            sup_abs,
            sup_at,
            critical_xs: critical_points.clone(),
            curvature_zeros: root::grid_roots(f2, 0.0, period, ZERO_GRID, eps_x),
            obstruction_residual: 0.0,
        });
    }

    let mut profile = FProfile {
        source: source.to_string(),
        expr,
        deriv,
        period,
        zeros,
        zero_slopes,
        bands,
        critical_points,
        symmetry_axis: None,
        n_bands: n,
        flag,
        tol,
    };
    profile.symmetry_axis = detect_symmetry(&profile, tol.tol_sym);
    Ok(profile)
}

/// Search for a reflection axis a with f(a+t) = f(a-t).
///
/// Candidates are the critical points and the midpoints between consecutive
/// zeros; the best candidate is refined locally, then accepted iff the grid
/// residual stays below `tol` (relative to the profile's scale).
pub fn detect_symmetry(p: &FProfile, tol: f64) -> Option<f64> {
    let period = p.period;
    let scale = (0..256)
        .map(|i| p.f(period * i as f64 / 256.0).abs())
        .fold(0.0f64, f64::max);
    let residual = |a: f64| -> f64 {
        let mut r: f64 = 0.0;
        for i in 1..=256 {
            let t = 0.5 * period * i as f64 / 256.0;
            r = r.max((p.f(a + t) - p.f(a - t)).abs());
        }
        r
    };
    let mut candidates: Vec<f64> = p.critical_points.clone();
    for (i, &z) in p.zeros.iter().enumerate() {
        let next = if i + 1 < p.zeros.len() { p.zeros[i + 1] } else { p.zeros[0] + period };
        candidates.push(0.5 * (z + next));
    }
    if candidates.is_empty() {
        candidates.extend((0..32).map(|i| period * i as f64 / 32.0));
    }
    let best = candidates
        .into_iter()
        .min_by(|&a, &b| residual(a).total_cmp(&residual(b)))?;
    let w = period / 200.0;
    let refined = crate::numerics::root::golden_min(residual, best - w, best + w, 1e-12);
    let a = if residual(refined) < residual(best) { refined } else { best };
    if residual(a) < tol * (1.0 + scale) {
        Some(a.rem_euclid(period))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn build(src: &str, hint: f64) -> FProfile {
        build_profile(parse(src).unwrap(), src, hint, Tolerances::default()).unwrap()
    }

    #[test]
    fn clifton_pohl_bands() {
        let p = build("sin(2*x)", PI);
        assert_abs_diff_eq!(p.period, PI, epsilon = 1e-12);
        assert_eq!(p.n_bands, 2);
        assert_eq!(p.zeros.len(), 2);
        assert_abs_diff_eq!(p.zeros[0], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(p.zeros[1], FRAC_PI_2, epsilon = 1e-10);
        assert_abs_diff_eq!(p.zero_slopes[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.zero_slopes[1], -2.0, epsilon = 1e-9);
        assert!(p.certifiable());

        assert_eq!(p.bands.len(), 2);
        assert_eq!(p.bands[0].sign, 1);
        assert_eq!(p.bands[1].sign, -1);
        assert_abs_diff_eq!(p.bands[0].sup_abs, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(p.bands[0].sup_at, FRAC_PI_4, epsilon = 1e-9);
        assert_abs_diff_eq!(p.bands[0].obstruction_residual, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(p.bands[1].obstruction_residual, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn smallest_period_detected_from_multiple_hint() {
        // hint covers 3 fundamental periods
        let p = build("sin(2*x)", 3.0 * PI);
        assert_abs_diff_eq!(p.period, PI, epsilon = 1e-12);
    }

    #[test]
    fn obstruction_profile_slopes() {
        let p = build("sin(x) + 0.3*sin(2*x)", 2.0 * PI);
        assert_eq!(p.n_bands, 2);
        assert_abs_diff_eq!(p.zeros[0], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(p.zeros[1], PI, epsilon = 1e-10);
        assert_abs_diff_eq!(p.zero_slopes[0], 1.6, epsilon = 1e-9);
        assert_abs_diff_eq!(p.zero_slopes[1], -0.4, epsilon = 1e-9);
        // f'(0)+f'(pi) = 1.6 - 0.4 for both cyclic pairs
        assert_abs_diff_eq!(p.bands[0].obstruction_residual, 1.2, epsilon = 1e-8);
        assert_abs_diff_eq!(p.bands[1].obstruction_residual, 1.2, epsilon = 1e-8);
    }

    #[test]
    fn quadratic_variation_sample_derivatives() {
        // f = sin 2x - 2a cos^2 x, a = 0.5: (-1, 2, 2, -8) at x = 0, and
        // kappa = -2f - 2a, i.e. f'' + 4f + 4a = 0 identically
        let p = build("sin(2*x) - 2*0.5*cos(x)^2", 2.0 * PI);
        let (f, d1, d2, d3) = p.sample_derivatives(0.0).unwrap();
        assert_abs_diff_eq!(f, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d1, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d2, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d3, -8.0, epsilon = 1e-12);
        for i in 0..100 {
            let x = 0.0625 * i as f64;
            let (f, _, d2, _) = p.sample_derivatives(x).unwrap();
            assert_abs_diff_eq!(d2 + 4.0 * f + 2.0, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn symmetry_axis_detection() {
        let p = build("sin(2*x)", PI);
        let a = p.symmetry_axis.expect("sin 2x has an axis");
        // any critical point works; nearest canonical representative
        let r = (a - FRAC_PI_4).rem_euclid(FRAC_PI_2);
        assert!(r < 1e-6 || FRAC_PI_2 - r < 1e-6, "axis {a}");

        // cos(sin x) is even, so both 0 and pi/2 are axes; accept any true one
        let p = build("cos(sin(x)) - 3/4", 2.0 * PI);
        let a = p.symmetry_axis.expect("cos(sin x) has an axis");
        for i in 1..=64 {
            let t = PI * i as f64 / 64.0;
            assert!((p.f(a + t) - p.f(a - t)).abs() < 1e-9, "axis {a} residual at t={t}");
        }

        let p = build("sin(x) + 0.3*sin(2*x)", 2.0 * PI);
        assert!(p.symmetry_axis.is_none(), "asymmetric profile must be rejected");
    }

    #[test]
    fn flat_profile_flagged() {
        let p = build("1 + 0*x", 1.0);
        assert_eq!(p.flag, Some(ProfileFlag::Flat { value: 1.0 }));
        assert!(!p.certifiable());
    }

    #[test]
    fn no_zero_profile_flagged() {
        let p = build("2 + sin(x)", 2.0 * PI);
        assert_eq!(p.flag, Some(ProfileFlag::NoZeros));
        assert_eq!(p.bands.len(), 1);
        assert_abs_diff_eq!(p.bands[0].sup_abs, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn tangential_zero_rejected() {
        // ln(2+sin x) vanishes tangentially at sin x = -1
        let p = build("ln(2+sin(x))", 2.0 * PI);
        assert!(matches!(p.flag, Some(ProfileFlag::DegenerateZero { .. })));
        assert!(!p.certifiable());
    }

    #[test]
    fn shifted_log_fixture_certifiable() {
        let p = build("ln(2+sin(x)) - 0.25", 2.0 * PI);
        assert!(p.certifiable(), "flag: {:?}", p.flag);
        assert_eq!(p.n_bands, 2);
    }

    #[test]
    fn nonperiodic_rejected() {
        let e = parse("sin(x) + 0.1*x").unwrap();
        let err = build_profile(e, "lin", 2.0 * PI, Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::NonPeriodic { .. }));
    }

    #[test]
    fn derivative_consistency_finite_difference() {
        for src in ["sin(2*x)", "sin(x)/(10+sin(x))", "jacobi_sd(x, 0.5)"] {
            let p = build(src, if src.starts_with("jacobi") { 6.743_001_419_250_384 } else { 2.0 * PI });
            let h = 1e-5;
            for i in 0..100 {
                let x = 0.061 * i as f64;
                let fd1 = (p.f(x + h) - p.f(x - h)) / (2.0 * h);
                let fd2 = (p.f1(x + h) - p.f1(x - h)) / (2.0 * h);
                let fd3 = (p.f2(x + h) - p.f2(x - h)) / (2.0 * h);
                assert_abs_diff_eq!(p.f1(x), fd1, epsilon = 1e-6 * (1.0 + fd1.abs()));
                assert_abs_diff_eq!(p.f2(x), fd2, epsilon = 1e-6 * (1.0 + fd2.abs()));
                assert_abs_diff_eq!(p.f3(x), fd3, epsilon = 1e-6 * (1.0 + fd3.abs()));
            }
        }
    }

    #[test]
    fn periodicity_random_sample() {
        let p = build("sin(x)/(10+sin(x))", 2.0 * PI);
        let mut x: f64 = 0.123;
        for _ in 0..1000 {
            x = (x * 1.618_033_988_749_895 + 0.3).rem_euclid(13.0);
            assert!((p.f(x + p.period) - p.f(x)).abs() < 1e-9);
        }
    }
}
