//! Hypothesis and inequality checks on the profile f: necessary conditions
//! for absence of conjugate points, the lambda-obstruction, the sufficient
//! family conditions, the stability inequalities, and the Hill/Sturm-Liouville
//! bound diagnostics along individual geodesics.
//!
//! Every boolean in a report carries the numeric margin that decided it.

use crate::error::{Error, Result};
use crate::geodesic::GeodesicTrace;
use crate::jacobi::{monodromy_at, JacobiBasis};
use crate::numerics::{quad, root};
use crate::profile::{FProfile, ProfileFlag};
use serde::Serialize;
use std::f64::consts::PI;

const COND_GRID: usize = 10_000;

/// Necessary conditions for a torus without conjugate points.
#[derive(Debug, Clone, Serialize)]
pub struct NecessaryReport {
    /// zeros per period are finite by construction; the count is reported
    pub zero_count: usize,
    pub locally_finite: bool,
    /// consecutive bands alternate sign (cyclically)
    pub sign_alternation: bool,
    /// zeros of f' strictly inside each band
    pub fprime_zeros_per_band: Vec<usize>,
    /// exactly one sign change of f' per band
    pub fprime_one_change: bool,
    /// structural under the one-zero-per-chart construction
    pub type_ii_only: bool,
    pub note: Option<String>,
    pub pass: bool,
}

pub fn check_necessary(p: &FProfile) -> NecessaryReport {
    if !p.certifiable() || p.bands.is_empty() {
        let note = match &p.flag {
            Some(ProfileFlag::Flat { value }) => Some(format!("flat profile, f = {value}")),
            Some(ProfileFlag::NoZeros) | None => Some("no null orbits".to_string()),
            Some(ProfileFlag::DegenerateZero { x, slope }) => {
                Some(format!("degenerate zero at x = {x} (slope {slope})"))
            }
        };
        let vacuous = !matches!(p.flag, Some(ProfileFlag::DegenerateZero { .. }));
        return NecessaryReport {
            zero_count: p.zeros.len(),
            locally_finite: true,
            sign_alternation: vacuous,
            fprime_zeros_per_band: vec![],
            fprime_one_change: vacuous,
            type_ii_only: vacuous,
            note,
            pass: vacuous,
        };
    }
    let n = p.bands.len();
    let sign_alternation = (0..n).all(|i| p.bands[i].sign != p.bands[(i + 1) % n].sign);
    let fprime_zeros_per_band: Vec<usize> =
        p.bands.iter().map(|b| b.critical_xs.len()).collect();
    let fprime_one_change = fprime_zeros_per_band.iter().all(|&c| c == 1);
    let pass = sign_alternation && fprime_one_change;
    NecessaryReport {
        zero_count: p.zeros.len(),
        locally_finite: true,
        sign_alternation,
        fprime_zeros_per_band,
        fprime_one_change,
        type_ii_only: true,
        note: None,
        pass,
    }
}

/// The lambda-obstruction: for a torus without conjugate points the
/// incompleteness parameters of consecutive null orbits must cancel,
/// lambda_n = lambda_{n+1} with lambda_n = (-1)^n f'(x_n); the signed
/// residual (-1)^n (f'(x_n) + f'(x_{n+1})) is reported per cyclic pair.
#[derive(Debug, Clone, Serialize)]
pub struct ObstructionReport {
    pub residuals: Vec<f64>,
    pub tol: f64,
    pub pass: bool,
}

pub fn check_lambda_obstruction(p: &FProfile, tol: f64) -> ObstructionReport {
    let n = p.zeros.len();
    let residuals: Vec<f64> = (0..n)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * (p.zero_slopes[i] + p.zero_slopes[(i + 1) % n])
        })
        .collect();
    let pass = residuals.iter().all(|r| r.abs() < tol);
    ObstructionReport { residuals, tol, pass }
}

/// The five sufficient conditions of the no-conjugate-point family theorem.
#[derive(Debug, Clone, Serialize)]
pub struct FamilleReport {
    /// (i) simple zeros; margin = min |f'| over zeros
    pub simple_zeros: bool,
    pub simple_zeros_margin: f64,
    /// (ii) f' changes sign exactly once per band
    pub one_sign_change: bool,
    pub fprime_zeros_per_band: Vec<usize>,
    /// (iii) f'.f''' <= 0; margin = min of -f'.f''' over the grid
    pub fpfppp_nonpositive: bool,
    pub fpfppp_min: f64,
    /// (iv) reflection symmetry axis; margin = best residual
    pub symmetry: bool,
    pub symmetry_axis: Option<f64>,
    /// (v) exactly two zeros in the smallest period
    pub two_zeros: bool,
    pub zero_count: usize,
    pub pass: bool,
}

pub fn check_famille(p: &FProfile) -> FamilleReport {
    let simple_zeros_margin = p
        .zero_slopes
        .iter()
        .map(|s| s.abs())
        .fold(f64::INFINITY, f64::min);
    let simple_zeros = p.certifiable() && simple_zeros_margin > p.tol.margin_simple;

    let fprime_zeros_per_band: Vec<usize> =
        p.bands.iter().map(|b| b.critical_xs.len()).collect();
    let one_sign_change =
        !fprime_zeros_per_band.is_empty() && fprime_zeros_per_band.iter().all(|&c| c == 1);

    let mut fpfppp_min = f64::INFINITY;
    for i in 0..=COND_GRID {
        let x = p.period * i as f64 / COND_GRID as f64;
        let v = -p.f1(x) * p.f3(x);
        if v.is_finite() {
            fpfppp_min = fpfppp_min.min(v);
        }
    }
    let fpfppp_nonpositive = fpfppp_min >= -1e-9;

    let symmetry = p.symmetry_axis.is_some();
    let two_zeros = p.zeros.len() == 2;

    let pass = simple_zeros && one_sign_change && fpfppp_nonpositive && symmetry && two_zeros;
    FamilleReport {
        simple_zeros,
        simple_zeros_margin,
        one_sign_change,
        fprime_zeros_per_band,
        fpfppp_nonpositive,
        fpfppp_min,
        symmetry,
        symmetry_axis: p.symmetry_axis,
        two_zeros,
        zero_count: p.zeros.len(),
        pass,
    }
}

/// Stability-theorem condition (3) for one causal type.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityEps {
    pub eps: i8,
    /// best witness tangency coordinate
    pub witness_x0: Option<f64>,
    /// LHS - 2 pi^2 of the first inequality at the witness
    pub ineq1_margin: f64,
    /// LHS - 2 pi^2 of the second inequality at the witness
    pub ineq2_margin: f64,
    /// grid points skipped because the second integrand lost positivity
    pub skipped: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// (1) every zero of f'' in a period is simple (|f'''| above margin)
    pub kappa_simple_zeros: bool,
    /// kappa vanishes exactly twice per smallest period
    pub kappa_two_zeros: bool,
    /// (2) one critical orbit per band
    pub one_critical_per_band: bool,
    pub per_eps: Vec<StabilityEps>,
    pub pass: bool,
    pub note: Option<String>,
}

/// Zeros of f'' in [0, P), polished.
fn curvature_zeros(p: &FProfile) -> Vec<f64> {
    root::grid_roots(|x| p.f2(x), 0.0, p.period, COND_GRID, p.tol.tol_root)
        .into_iter()
        .filter(|&z| z < p.period - 1e-9)
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn eval_stability_point(
    p: &FProfile,
    eps: f64,
    x0: f64,
    d1: f64,
    d2: f64,
    m_eps: f64,
    x_cr: f64,
    zeta0: f64,
    zeta1: f64,
) -> Result<(f64, f64)> {
    let x1 = d1 + d2 - x0;
    let i1 = quad::adaptive_gk(
        |x| 1.0 / (m_eps - eps * p.f(x)).sqrt(),
        x0,
        x1,
        p.tol.quad_tol,
    )?;
    let lhs1 = -eps * p.f2(x0) * i1 * i1;

    let c02 = eps * p.f(x0);
    // positivity screen for the second integrand
    for k in 0..=64 {
        let x = zeta0 + (zeta1 - zeta0) * k as f64 / 64.0;
        if c02 - eps * p.f(x) <= 0.0 {
            return Err(Error::QuadratureSingular { a: zeta0, b: zeta1 });
        }
    }
    let i2 = quad::adaptive_gk(
        |x| 1.0 / (c02 - eps * p.f(x)).sqrt(),
        zeta0,
        zeta1,
        p.tol.quad_tol,
    )?;
    let lhs2 = eps * p.f2(x_cr) * i2 * i2;
    Ok((lhs1 - 2.0 * PI * PI, lhs2 - 2.0 * PI * PI))
}

pub fn check_stability_inequalities(p: &FProfile) -> StabilityReport {
    let fail = |note: &str| StabilityReport {
        kappa_simple_zeros: false,
        kappa_two_zeros: false,
        one_critical_per_band: false,
        per_eps: vec![],
        pass: false,
        note: Some(note.to_string()),
    };
    if !p.certifiable() {
        return fail("profile outside the certifiable class");
    }
    let kzeros = curvature_zeros(p);
    let kappa_two_zeros = kzeros.len() == 2;
    let kappa_simple_zeros =
        !kzeros.is_empty() && kzeros.iter().all(|&z| p.f3(z).abs() > p.tol.margin_simple);
    let one_critical_per_band = p.bands.iter().all(|b| b.critical_xs.len() == 1);
    if !(kappa_two_zeros && kappa_simple_zeros && one_critical_per_band) {
        return StabilityReport {
            kappa_simple_zeros,
            kappa_two_zeros,
            one_critical_per_band,
            per_eps: vec![],
            pass: false,
            note: Some("curvature/band structure outside the theorem's hypotheses".to_string()),
        };
    }

    let mut per_eps = Vec::new();
    for eps_i in [1i8, -1i8] {
        let eps = eps_i as f64;
        // the -eps band and its extremal critical point
        let Some(bm) = p.bands.iter().find(|b| b.sign == -eps_i) else {
            continue;
        };
        let Some(bp) = p.bands.iter().find(|b| b.sign == eps_i) else {
            continue;
        };
        let (d1, d2) = (bm.lo, bm.hi);
        let x_cr = bm.sup_at;
        // consecutive zeros of f'' flanking x_cr
        let zeta1 = kzeros
            .iter()
            .map(|&z| x_cr + (z - x_cr).rem_euclid(p.period))
            .fold(f64::INFINITY, f64::min);
        let zeta0 = kzeros
            .iter()
            .map(|&z| x_cr - (x_cr - z).rem_euclid(p.period))
            .fold(f64::NEG_INFINITY, f64::max);
        // x0 lives in the eps band adjacent to d1 on the left, beyond the
        // curvature zero (so kappa changes sign along the tangent geodesic)
        let shift = (bp.hi - d1) / p.period;
        let shift = shift.round() * p.period;
        let hi = bp.hi - shift; // == d1 up to periodicity
        // x0 between the eps band's critical point and the shared zero d1.
        // kappa changes sign along the tangent orbit through its far end
        // (the mirror crosses zeta1), and the second integrand stays positive
        // only while the whole window [zeta0, zeta1] sits inside the orbit:
        // x0 <= zeta0 and the mirror d1 + d2 - x0 >= zeta1.
        let a = bp.sup_at - shift;
        let mut b = hi;
        if zeta0 > a && zeta0 < b {
            b = zeta0;
        }
        let mirror_cap = d1 + d2 - zeta1;
        if mirror_cap < b {
            b = mirror_cap;
        }
        let m_eps = bp.sup_abs;
        if !(b > a) {
            per_eps.push(StabilityEps {
                eps: eps_i,
                witness_x0: None,
                ineq1_margin: f64::INFINITY,
                ineq2_margin: f64::INFINITY,
                skipped: 0,
                pass: false,
            });
            continue;
        }

        let mut skipped = 0usize;
        // (objective, x0, margin1, margin2)
        let mut best: Option<(f64, f64, f64, f64)> = None;
        let n_grid = 256;
        let inset = 1e-4 * (b - a);
        fn consider(
            p: &FProfile,
            eps: f64,
            x0: f64,
            geom: (f64, f64, f64, f64, f64, f64),
            best: &mut Option<(f64, f64, f64, f64)>,
            skipped: &mut usize,
        ) {
            let (d1, d2, m_eps, x_cr, zeta0, zeta1) = geom;
            match eval_stability_point(p, eps, x0, d1, d2, m_eps, x_cr, zeta0, zeta1) {
                Ok((m1, m2)) => {
                    let obj = m1.max(m2);
                    if best.is_none_or(|(bo, _, _, _)| obj < bo) {
                        *best = Some((obj, x0, m1, m2));
                    }
                }
                Err(_) => *skipped += 1,
            }
        }
        let geom = (d1, d2, m_eps, x_cr, zeta0, zeta1);
        for k in 0..n_grid {
            // Chebyshev nodes concentrate near both ends of (a, b)
            let theta = PI * (k as f64 + 0.5) / n_grid as f64;
            let x0 = 0.5 * (a + inset + b - inset) + 0.5 * (b - a - 2.0 * inset) * theta.cos();
            consider(p, eps, x0, geom, &mut best, &mut skipped);
        }
        if let Some((_, x0b, _, _)) = best {
            // golden refinement of the objective around the best candidate
            let half = (b - a) / n_grid as f64;
            let lo = (x0b - half).max(a + inset);
            let hi2 = (x0b + half).min(b - inset);
            let refined = root::golden_min(
                |x0| match eval_stability_point(p, eps, x0, d1, d2, m_eps, x_cr, zeta0, zeta1) {
                    Ok((m1, m2)) => m1.max(m2),
                    Err(_) => f64::INFINITY,
                },
                lo,
                hi2,
                1e-10,
            );
            consider(p, eps, refined, geom, &mut best, &mut skipped);
        }
        let (m1, m2) = best.map_or((f64::INFINITY, f64::INFINITY), |(_, _, m1, m2)| (m1, m2));
        per_eps.push(StabilityEps {
            eps: eps_i,
            witness_x0: best.map(|(_, x0, _, _)| x0),
            ineq1_margin: m1,
            ineq2_margin: m2,
            skipped,
            pass: best.is_some() && m1 < 0.0 && m2 < 0.0,
        });
    }
    let pass = !per_eps.is_empty() && per_eps.iter().all(|e| e.pass);
    StabilityReport {
        kappa_simple_zeros,
        kappa_two_zeros,
        one_critical_per_band,
        per_eps,
        pass,
        note: None,
    }
}

/// T * integral of q over [0, T], the Hill-bound functional.
pub fn hill_value(q: impl Fn(f64) -> f64, t_period: f64, tol: f64) -> Result<f64> {
    Ok(t_period * quad::adaptive_gk(q, 0.0, t_period, tol)?)
}

/// Hill bound T * int_0^T eps*kappa <= pi^2, applicable only when every
/// solution is T-antiperiodic (monodromy over T = 2*omega equals -Id).
pub fn hill_diagnostic(
    p: &FProfile,
    trace: &GeodesicTrace,
    basis: &JacobiBasis,
) -> Result<f64> {
    let omega = trace.omega.ok_or(Error::NotPeriodic)?;
    let t_period = 2.0 * omega;
    let m = monodromy_at(basis, t_period);
    if !m.is_minus_identity(1e-6) {
        return Err(Error::NotApplicable(
            "Hill bound needs all solutions antiperiodic over 2 omega (monodromy = -Id)".into(),
        ));
    }
    let eps = trace.spec.eps as f64;
    hill_value(|t| 0.5 * eps * p.f2(basis.x(t)), t_period, p.tol.quad_tol)
}

/// Sturm-Liouville bound diagnostics along one periodic trace.
#[derive(Debug, Clone, Serialize)]
pub struct SlBounds {
    /// (1/omega) int_0^omega eps*kappa (lemma-0 minimum quotient)
    pub d2: f64,
    /// int_0^{2 omega} eps*kappa
    pub lemma0_lhs: f64,
    /// pi^2 / (2 omega)
    pub lemma0_bound: f64,
    pub lemma0_ok: bool,
    /// sup{(1/omega) int_omega^{2 omega} eps*kappa, -eps*kappa(0)} vs
    /// pi^2/(4 omega^2); only when all solutions are periodic
    pub lemma1: Option<(f64, bool)>,
    /// (omega - tau)^2 eps*kappa(omega) vs pi^2/4; only when additionally
    /// kappa changes sign, tau = first zero of kappa(t)
    pub lemma2: Option<(f64, bool)>,
}

/// Core checker on the coefficient q(t) = eps*kappa(t) directly; `all_periodic`
/// tells whether the Jacobi equation has only periodic solutions (monodromy
/// over 4 omega = identity), which gates the lemma-(1)/(2) inequalities.
pub fn sl_bounds_from_q(
    q: impl Fn(f64) -> f64 + Copy,
    omega: f64,
    all_periodic: bool,
    tol: f64,
) -> Result<SlBounds> {
    let int_0_w = quad::adaptive_gk(q, 0.0, omega, tol)?;
    let int_w_2w = quad::adaptive_gk(q, omega, 2.0 * omega, tol)?;
    let d2 = int_0_w / omega;
    let lemma0_lhs = int_0_w + int_w_2w;
    let lemma0_bound = PI * PI / (2.0 * omega);
    let lemma0_ok = lemma0_lhs <= lemma0_bound + 1e-6;

    let lemma1 = if all_periodic {
        let v = (int_w_2w / omega).max(-q(0.0));
        Some((v, v >= PI * PI / (4.0 * omega * omega) - 1e-6))
    } else {
        None
    };
    let lemma2 = if all_periodic {
        let zeros = root::grid_roots(q, 0.0, omega, 2000, 1e-12);
        zeros.into_iter().find(|&t| t > 1e-9 && t < omega - 1e-9).map(|tau| {
            let v = (omega - tau).powi(2) * q(omega);
            (v, v >= PI * PI / 4.0 - 1e-6)
        })
    } else {
        None
    };
    Ok(SlBounds { d2, lemma0_lhs, lemma0_bound, lemma0_ok, lemma1, lemma2 })
}

pub fn sl_bounds(p: &FProfile, trace: &GeodesicTrace, basis: &JacobiBasis) -> Result<SlBounds> {
    let omega = trace.omega.ok_or(Error::NotPeriodic)?;
    let eps = trace.spec.eps as f64;
    let all_periodic = monodromy_at(basis, 4.0 * omega).is_identity(1e-6);
    let bx = |t: f64| 0.5 * eps * p.f2(basis.x(t));
    sl_bounds_from_q(bx, omega, all_periodic, p.tol.quad_tol)
}
