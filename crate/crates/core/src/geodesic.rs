//! Radial dynamics of non-null geodesics tangent to the Killing field.
//!
//! A trace integrates x'' = -eps f'(x)/2 from the tangency point (z0, 0); the
//! first integral x'^2 = C^2 - eps f(x) is monitored, never enforced. Event
//! times (band-boundary crossings t0, t1 and the turning time) come from
//! dense-output root location, so they never constrain the step size.

use crate::error::{Error, Result};
use crate::numerics::ode::{self, DenseOutput, StepControl};
use crate::numerics::{quad, root};
use crate::profile::FProfile;
use serde::{Deserialize, Serialize};

/// Which side of the band's top critical point the tangency sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Travel direction of the geodesic: away from the critical point.
    pub fn direction(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

/// Launch data for one tangent geodesic family member.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LaunchSpec {
    /// causal type: sign of <gamma', gamma'>
    pub eps: i8,
    /// squared Clairaut constant, 0 < C^2 < M_eps
    pub c2: f64,
    /// index into the profile's band list (band sign must equal eps)
    pub band_idx: usize,
    pub side: Side,
}

/// Global behaviour of the radial dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Classification {
    /// oscillates between the two tangency mirrors; x has period 4*omega
    Periodic { omega: f64 },
    /// C^2 is a critical value: x creeps into a critical orbit
    Asymptotic { x_limit: f64 },
    /// tangency at the critical orbit itself (analytic case, never integrated)
    CriticalOrbit,
    /// C = 0, perpendicular to K (analytic case, never integrated)
    Perpendicular,
}

/// One integrated tangent geodesic's radial data.
#[derive(Debug, Clone)]
pub struct GeodesicTrace {
    pub spec: LaunchSpec,
    /// tangency coordinate: eps f(z0) = C^2 on the requested side
    pub z0: f64,
    /// Clairaut constant with the regular-branch sign: C = eps * direction * |C|,
    /// which keeps |eps C + x'| >= |C| on the outbound branch
    pub signed_c: f64,
    /// dense radial solution (x, x')
    pub dense: DenseOutput<2>,
    /// first f = 0 crossing time
    pub t0: Option<f64>,
    /// second crossing time
    pub t1: Option<f64>,
    /// first turning time t > 0 with x' = 0
    pub t_turn: Option<f64>,
    /// half the turning time for periodic traces
    pub omega: Option<f64>,
    pub classification: Option<Classification>,
    pub t_end: f64,
    /// C^2 within relative 1e-3 of M_eps: certificates get flagged
    pub near_degenerate: bool,
    pub horizon_exceeded: bool,
}

impl GeodesicTrace {
    pub fn x(&self, t: f64) -> f64 {
        self.dense.eval(t)[0]
    }
    pub fn x_prime(&self, t: f64) -> f64 {
        self.dense.eval(t)[1]
    }
    /// Curvature along the geodesic: kappa(t) = f''(x(t))/2.
    pub fn kappa(&self, p: &FProfile, t: f64) -> f64 {
        0.5 * p.f2(self.x(t))
    }
}

/// Default integration horizon.
pub fn t_max_default(p: &FProfile, c2: f64) -> f64 {
    50.0 * p.period / c2.sqrt()
}

/// Find the tangency coordinate and integrate the radial ODE until turning,
/// asymptote, or horizon.
pub fn launch_tangent(p: &FProfile, spec: LaunchSpec) -> Result<GeodesicTrace> {
    let band = p
        .bands
        .get(spec.band_idx)
        .ok_or_else(|| Error::Config(format!("band index {} out of range", spec.band_idx)))?;
    if band.sign != spec.eps {
        return Err(Error::Config(format!(
            "band {} has sign {}, launch asked eps {}",
            spec.band_idx, band.sign, spec.eps
        )));
    }
    let eps = spec.eps as f64;
    if !(spec.c2 > 0.0) {
        return Err(Error::Config(format!("C^2 must be positive, got {}", spec.c2)));
    }
    if spec.c2 >= band.sup_abs {
        return Err(Error::NoTangency { c2: spec.c2, sup: band.sup_abs });
    }

    let g = |x: f64| eps * p.f(x) - spec.c2;
    let dg = |x: f64| eps * p.f1(x);
    let (a, b) = match spec.side {
        Side::Left => (band.lo, band.sup_at),
        Side::Right => (band.sup_at, band.hi),
    };
    let z0 = root::refine_root(g, Some(&dg), a, b, p.tol.tol_root);
    let d = spec.side.direction();
    let signed_c = eps * d * spec.c2.sqrt();

    let rhs = |_t: f64, y: &[f64; 2]| [y[1], -0.5 * eps * p.f1(y[0])];
    let t_max = t_max_default(p, spec.c2);
    let cons_tol = 1e-9 * spec.c2.max(1.0);

    // critical orbits the trace could asymptote onto
    let asym_targets: Vec<f64> = p
        .critical_points
        .iter()
        .copied()
        .filter(|&c| (eps * p.f(c) - spec.c2).abs() < 1e-4 * spec.c2.max(1.0))
        .collect();

    let mut drift_err: Option<Error> = None;
    let mut asymptote: Option<f64> = None;
    let dense = ode::integrate(
        rhs,
        0.0,
        [z0, 0.0],
        t_max,
        p.tol.ode_rtol,
        p.tol.ode_atol,
        |step, y| {
            let drift = (y[1] * y[1] + eps * p.f(y[0]) - spec.c2).abs();
            if drift > cons_tol {
                drift_err = Some(Error::ConservationDrift { t: step.t_end(), drift });
                return StepControl::Stop;
            }
            if step.t_end() > 1e-6 && y[1] * d < 0.0 {
                return StepControl::Stop; // past the turning point
            }
            if y[1].abs() < 1e-8 && step.t_end() > 1e-6 {
                for &c in &asym_targets {
                    let dx = (y[0] - c).rem_euclid(p.period);
                    if dx.min(p.period - dx) < 1e-6 {
                        asymptote = Some(c);
                        return StepControl::Stop;
                    }
                }
            }
            StepControl::Continue
        },
    )?;
    if let Some(e) = drift_err {
        return Err(e);
    }

    let crossings = ode::event_times(&dense, |_, y| p.f(y[0]), 4, 16);
    let crossings: Vec<f64> = crossings.into_iter().filter(|&t| t > 1e-9).collect();
    let t0 = crossings.first().copied();
    let t1 = crossings.get(1).copied();

    let turns = ode::event_times(&dense, |_, y| y[1], 3, 16);
    let t_turn = turns.into_iter().find(|&t| t > 1e-6);

    // The dichotomy is analytic: C^2 at a critical value means the trace
    // creeps into the critical orbit, even if roundoff made it turn just shy
    // of it. Pick the matching critical point nearest the final position.
    let x_end = dense.eval(dense.t_end)[0];
    let crit_limit = p
        .critical_points
        .iter()
        .copied()
        .filter(|&c| (eps * p.f(c) - spec.c2).abs() < p.tol.tol_crit * spec.c2.max(1.0))
        .min_by(|&a, &b| {
            let da = {
                let d = (x_end - a).rem_euclid(p.period);
                d.min(p.period - d)
            };
            let db = {
                let d = (x_end - b).rem_euclid(p.period);
                d.min(p.period - d)
            };
            da.total_cmp(&db)
        });

    let horizon_exceeded = t_turn.is_none() && asymptote.is_none() && crit_limit.is_none();
    let classification = if let Some(x_limit) = asymptote.or(crit_limit) {
        Some(Classification::Asymptotic { x_limit })
    } else {
        t_turn.map(|t| Classification::Periodic { omega: 0.5 * t })
    };
    let omega = match classification {
        Some(Classification::Periodic { omega }) => Some(omega),
        _ => None,
    };

    Ok(GeodesicTrace {
        spec,
        z0,
        signed_c,
        t_end: dense.t_end,
        dense,
        t0,
        t1,
        t_turn,
        omega,
        classification,
        near_degenerate: spec.c2 > (1.0 - 1e-3) * band.sup_abs,
        horizon_exceeded,
    })
}

/// Re-derive the classification from the trace and profile (the analytic
/// dichotomy: periodic unless C^2 is a critical value).
pub fn classify(p: &FProfile, trace: &GeodesicTrace) -> Option<Classification> {
    let eps = trace.spec.eps as f64;
    for &c in &p.critical_points {
        if (eps * p.f(c) - trace.spec.c2).abs() < p.tol.tol_crit * trace.spec.c2.max(1.0) {
            // the asymptotically approached orbit is the one the trace stalls at
            if let Some(Classification::Asymptotic { x_limit }) = trace.classification {
                return Some(Classification::Asymptotic { x_limit });
            }
            return Some(Classification::Asymptotic { x_limit: c });
        }
    }
    trace.omega.map(|omega| Classification::Periodic { omega })
}

/// y-coordinate of the geodesic on [t_a, t_b] via the regular branch
/// y' = eps/(eps C + x'), sampled at `n` points. Fails if the branch
/// denominator comes within 1e-9 of zero anywhere on the span.
pub fn y_trace(
    p: &FProfile,
    trace: &GeodesicTrace,
    y0: f64,
    t_a: f64,
    t_b: f64,
    n: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    let eps = trace.spec.eps as f64;
    let c = trace.signed_c;
    let denom = |t: f64| eps * c + trace.dense.eval(t)[1];
    // pre-scan for branch singularities
    for i in 0..=4 * n {
        let t = t_a + (t_b - t_a) * i as f64 / (4 * n) as f64;
        let v = denom(t).abs();
        if v < 1e-9 {
            return Err(Error::BranchSingular { value: v });
        }
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut y = y0;
    let mut t_prev = t_a;
    for i in 0..=n {
        let t = t_a + (t_b - t_a) * i as f64 / n as f64;
        if i > 0 {
            y += quad::adaptive_gk(|s| eps / denom(s), t_prev, t, p.tol.quad_tol)?;
        }
        out.push((t, trace.dense.eval(t)[0], y));
        t_prev = t;
    }
    Ok(out)
}

/// Crossing times of the first `n` zeros of f(x(t)) for a transversal
/// geodesic launched at a zero of f with x'(0) = +sqrt(C^2) (C^2 above every
/// band supremum, so the motion never turns).
pub fn band_crossing_growth(p: &FProfile, eps: i8, c2: f64, n: usize) -> Result<Vec<f64>> {
    let epsf = eps as f64;
    if p.zeros.is_empty() {
        return Err(Error::Config("profile has no zeros to cross".into()));
    }
    let sup_all = p
        .bands
        .iter()
        .map(|b| epsf * b.sign as f64 * b.sup_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if c2 <= sup_all {
        return Err(Error::Config(format!(
            "C^2 = {c2} must exceed the global sup of eps*f = {sup_all} for transversal motion"
        )));
    }
    let x0 = p.zeros[0];
    let rhs = |_t: f64, y: &[f64; 2]| [y[1], -0.5 * epsf * p.f1(y[0])];
    // per-crossing gap is at least width/|x'|_max; budget with slack
    let gap_max = p.period / (c2 + sup_all.abs()).sqrt();
    let t_budget = 4.0 * (n as f64 + 1.0) * gap_max.max(p.period / c2.sqrt());
    let mut count = 0usize;
    let dense = ode::integrate(
        rhs,
        0.0,
        [x0, c2.sqrt()],
        t_budget,
        p.tol.ode_rtol,
        p.tol.ode_atol,
        |step, y| {
            // cheap overcount: one crossing per band width travelled
            let travelled = (y[0] - x0).abs();
            count = (travelled / p.period * p.zeros.len() as f64) as usize;
            let _ = step;
            if count > n + 2 {
                StepControl::Stop
            } else {
                StepControl::Continue
            }
        },
    )?;
    let times: Vec<f64> = ode::event_times(&dense, |_, y| p.f(y[0]), n + 1, 16)
        .into_iter()
        .filter(|&t| t > 1e-9)
        .take(n)
        .collect();
    if times.len() < n {
        return Err(Error::HorizonExceeded { t_max: t_budget });
    }
    Ok(times)
}
