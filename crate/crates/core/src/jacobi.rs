//! Jacobi equation u'' + eps kappa(t) u = 0 along a radial trace.
//!
//! The Jacobi variables are integrated jointly with the radial ODE as one
//! augmented system (x, x', s, s', c, c'), so the curvature kappa(t) =
//! f''(x(t))/2 is evaluated exactly at stage points and never interpolated.
//! Negative times come from direct backward integration of the same system.

use crate::error::{Error, Result};
use crate::geodesic::GeodesicTrace;
use crate::numerics::ode::{self, DenseOutput, StepControl};
use crate::numerics::root;
use crate::profile::FProfile;

/// Fundamental Jacobi basis along a trace: s(0)=0, s'(0)=1, c(0)=1, c'(0)=0,
/// together with the Killing-induced solution beta = beta'_0 * s.
#[derive(Debug, Clone)]
pub struct JacobiBasis {
    fwd: DenseOutput<6>,
    bwd: DenseOutput<6>,
    /// beta'(0) = eps f'(z0)/2
    pub beta_prime0: f64,
    /// basis valid on [-t_span, t_span]
    pub t_span: f64,
}

impl JacobiBasis {
    fn state(&self, t: f64) -> [f64; 6] {
        if t >= 0.0 {
            self.fwd.eval(t)
        } else {
            self.bwd.eval(t)
        }
    }
    pub fn x(&self, t: f64) -> f64 {
        self.state(t)[0]
    }
    pub fn s(&self, t: f64) -> f64 {
        self.state(t)[2]
    }
    pub fn s_prime(&self, t: f64) -> f64 {
        self.state(t)[3]
    }
    pub fn c(&self, t: f64) -> f64 {
        self.state(t)[4]
    }
    pub fn c_prime(&self, t: f64) -> f64 {
        self.state(t)[5]
    }
    pub fn beta(&self, t: f64) -> f64 {
        self.beta_prime0 * self.s(t)
    }
    pub fn beta_prime(&self, t: f64) -> f64 {
        self.beta_prime0 * self.s_prime(t)
    }
    /// c s' - c' s, identically 1 for an exact solve.
    pub fn wronskian(&self, t: f64) -> f64 {
        let y = self.state(t);
        y[4] * y[3] - y[5] * y[2]
    }
    /// The solution vanishing at `a` with unit derivative there.
    pub fn u_a(&self, a: f64, t: f64) -> f64 {
        let ya = self.state(a);
        let yt = self.state(t);
        ya[4] * yt[2] - ya[2] * yt[4]
    }
    pub fn u_a_prime(&self, a: f64, t: f64) -> f64 {
        let ya = self.state(a);
        let yt = self.state(t);
        ya[4] * yt[3] - ya[2] * yt[5]
    }
}

fn integrate_pair(
    rhs: impl Fn(f64, &[f64; 6]) -> [f64; 6] + Copy,
    y0: [f64; 6],
    t_span: f64,
    rtol: f64,
    atol: f64,
) -> Result<(DenseOutput<6>, DenseOutput<6>)> {
    let fwd = ode::integrate(rhs, 0.0, y0, t_span, rtol, atol, |_, _| StepControl::Continue)?;
    let bwd = ode::integrate(rhs, 0.0, y0, -t_span, rtol, atol, |_, _| StepControl::Continue)?;
    Ok((fwd, bwd))
}

/// Fundamental basis along `trace`, valid on [-t_span, t_span].
pub fn fundamental_basis(p: &FProfile, trace: &GeodesicTrace, t_span: f64) -> Result<JacobiBasis> {
    let eps = trace.spec.eps as f64;
    let rhs = move |_t: f64, y: &[f64; 6]| {
        let q = 0.5 * eps * p.f2(y[0]); // eps * kappa
        [y[1], -0.5 * eps * p.f1(y[0]), y[3], -q * y[2], y[5], -q * y[4]]
    };
    let y0 = [trace.z0, 0.0, 0.0, 1.0, 1.0, 0.0];
    let (fwd, bwd) = integrate_pair(rhs, y0, t_span, p.tol.ode_rtol, p.tol.ode_atol)?;
    Ok(JacobiBasis { fwd, bwd, beta_prime0: 0.5 * eps * p.f1(trace.z0), t_span })
}

/// Basis for a synthetic coefficient q(t) = eps*kappa(t); used by fixtures and
/// the bound diagnostics, which work directly on u'' + q u = 0.
pub fn basis_from_q(q: impl Fn(f64) -> f64 + Copy, t_span: f64, tol: f64) -> Result<JacobiBasis> {
    let rhs = move |t: f64, y: &[f64; 6]| {
        let qv = q(t);
        [0.0, 0.0, y[3], -qv * y[2], y[5], -qv * y[4]]
    };
    let y0 = [0.0, 0.0, 0.0, 1.0, 1.0, 0.0];
    let (fwd, bwd) = integrate_pair(rhs, y0, t_span, tol, tol)?;
    Ok(JacobiBasis { fwd, bwd, beta_prime0: 0.0, t_span })
}

/// Smallest zero > a of the solution vanishing at `a`, by sign-bracketing with
/// scan step `step` on the dense output and bisection/Newton polish.
pub fn next_zero(basis: &JacobiBasis, a: f64, step: f64) -> Result<f64> {
    assert!(step > 0.0);
    let f = |t: f64| basis.u_a(a, t);
    let df = |t: f64| basis.u_a_prime(a, t);
    // leave the double-root at t = a: u_a ~ (t - a) near a
    let mut t_prev = a + step.min(0.25 * (basis.t_span - a).max(step));
    let mut f_prev = f(t_prev);
    if f_prev == 0.0 {
        return Ok(t_prev);
    }
    let mut t = t_prev;
    loop {
        t += step;
        if t > basis.t_span {
            return Err(Error::SpanExhausted { span: basis.t_span });
        }
        let ft = f(t);
        if ft == 0.0 {
            return Ok(t);
        }
        if (ft < 0.0) != (f_prev < 0.0) {
            return Ok(root::refine_root(f, Some(&df), t_prev, t, 1e-12));
        }
        t_prev = t;
        f_prev = ft;
    }
}

/// Period-shift operator of the Jacobi equation in the basis (c, s),
/// over the trace's kappa-period 4*omega.
#[derive(Debug, Clone, Copy)]
pub struct Monodromy {
    /// columns are the images of c and s expressed in (c, s)
    pub m: [[f64; 2]; 2],
    pub period: f64,
}

impl Monodromy {
    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }
    pub fn is_identity(&self, tol: f64) -> bool {
        (self.m[0][0] - 1.0).abs() < tol
            && (self.m[1][1] - 1.0).abs() < tol
            && self.m[0][1].abs() < tol
            && self.m[1][0].abs() < tol
    }
    pub fn is_minus_identity(&self, tol: f64) -> bool {
        (self.m[0][0] + 1.0).abs() < tol
            && (self.m[1][1] + 1.0).abs() < tol
            && self.m[0][1].abs() < tol
            && self.m[1][0].abs() < tol
    }
}

/// Shift operator over an explicit period (fixtures, half-period diagnostics).
pub fn monodromy_at(basis: &JacobiBasis, period: f64) -> Monodromy {
    // u(t + T) has value u(T) and derivative u'(T) at 0; in the (c, s) basis
    // that is the pair of coordinates directly.
    Monodromy {
        m: [
            [basis.c(period), basis.s(period)],
            [basis.c_prime(period), basis.s_prime(period)],
        ],
        period,
    }
}

/// Monodromy over one kappa-period of a periodic trace.
pub fn monodromy(trace: &GeodesicTrace, basis: &JacobiBasis) -> Result<Monodromy> {
    let omega = trace.omega.ok_or(Error::NotPeriodic)?;
    let period = 4.0 * omega;
    if period > basis.t_span {
        return Err(Error::SpanExhausted { span: basis.t_span });
    }
    Ok(monodromy_at(basis, period))
}

/// Minimum conjugate-point gap: min over `grid_n` launch times a in one
/// kappa-period of z(a) - a.
pub fn min_gap(trace: &GeodesicTrace, basis: &JacobiBasis, grid_n: usize) -> Result<f64> {
    let omega = trace.omega.ok_or(Error::NotPeriodic)?;
    let period = 4.0 * omega;
    let step = omega / 200.0;
    let mut best = f64::INFINITY;
    for i in 0..grid_n {
        let a = period * i as f64 / grid_n as f64;
        let z = next_zero(basis, a, step)?;
        best = best.min(z - a);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geodesic::{launch_tangent, LaunchSpec, Side};
    use crate::profile::{build_profile, FProfile, Tolerances};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn build(src: &str, hint: f64) -> FProfile {
        build_profile(parse(src).unwrap(), src, hint, Tolerances::default()).unwrap()
    }

    fn cp_basis() -> (FProfile, GeodesicTrace, JacobiBasis) {
        let p = build("sin(2*x)", PI);
        let spec = LaunchSpec { eps: 1, c2: 0.5, band_idx: 0, side: Side::Left };
        let t = launch_tangent(&p, spec).unwrap();
        let omega = t.omega.unwrap();
        let b = fundamental_basis(&p, &t, 8.0 * omega).unwrap();
        (p, t, b)
    }

    // Frozen reference values for sin 2x, eps = +1, C^2 = 1/2, left side.
    const T0: f64 = 0.762443419040948;
    const T1: f64 = 2.287330257122844;
    const OMEGA: f64 = 1.524886838081896;

    #[test]
    fn zero_kappa_is_linear() {
        let b = basis_from_q(|_| 0.0, 10.0, 1e-11).unwrap();
        for i in 0..=40 {
            let t = -10.0 + 20.0 * i as f64 / 40.0;
            assert_abs_diff_eq!(b.s(t), t, epsilon = 1e-10);
            assert_abs_diff_eq!(b.c(t), 1.0, epsilon = 1e-10);
        }
        assert!(matches!(next_zero(&b, 0.5, 0.05), Err(Error::SpanExhausted { .. })));
    }

    #[test]
    fn constant_kappa_is_harmonic() {
        let k = 1.7;
        let b = basis_from_q(move |_| k * k, 10.0 / k, 1e-11).unwrap();
        for i in 0..=100 {
            let t = 10.0 / k * i as f64 / 100.0;
            assert_abs_diff_eq!(b.s(t), (k * t).sin() / k, epsilon = 1e-8);
            assert_abs_diff_eq!(b.c(t), (k * t).cos(), epsilon = 1e-8);
        }
    }

    #[test]
    fn unit_kappa_gap_is_pi() {
        let b = basis_from_q(|_| 1.0, 12.0, 1e-11).unwrap();
        for a in [0.0, 0.3, 1.9, 4.4] {
            let z = next_zero(&b, a, 0.02).unwrap();
            assert_abs_diff_eq!(z, a + PI, epsilon = 1e-8);
        }
    }

    #[test]
    fn cp_frozen_basis_values() {
        let (_p, t, b) = cp_basis();
        assert_abs_diff_eq!(b.beta_prime0, 3.0f64.sqrt() / 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(b.s(T0), (2.0f64 / 3.0).sqrt(), epsilon = 1e-7);
        assert_abs_diff_eq!(b.c(T0), 1.25396270491, epsilon = 1e-7);
        assert_abs_diff_eq!(b.c(T1), 0.29778649958, epsilon = 1e-7);
        let tau = 2.0 * t.omega.unwrap();
        assert_abs_diff_eq!(b.c(tau), -1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(b.s_prime(tau), -1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(b.c_prime(tau), -1.90049687988, epsilon = 1e-6);
        assert!(b.c(tau) < 0.0);
    }

    #[test]
    fn wronskian_and_beta_conservation() {
        let (p, t, b) = cp_basis();
        let omega = t.omega.unwrap();
        for i in 0..=400 {
            let s = -4.0 * omega + 8.0 * omega * i as f64 / 400.0;
            assert!((b.wronskian(s) - 1.0).abs() < 1e-8, "W drift at t={s}");
            // C^2 - beta^2 = eps f(x(t))
            let res = 0.5 - b.beta(s).powi(2) - p.f(b.x(s));
            assert!(res.abs() < 1e-7, "conservation residual {res} at t={s}");
            // beta' = eps f'(x(t))/2, independent of the Jacobi solve
            let res = b.beta_prime(s) - 0.5 * p.f1(b.x(s));
            assert!(res.abs() < 1e-7, "beta' residual {res} at t={s}");
        }
    }

    #[test]
    fn kappa_even_periodic_beta_odd() {
        let (p, t, b) = cp_basis();
        let omega = t.omega.unwrap();
        let kappa = |s: f64| 0.5 * p.f2(b.x(s));
        for i in 0..=200 {
            let s = 4.0 * omega * i as f64 / 200.0;
            assert!((kappa(s) - kappa(-s)).abs() < 1e-7);
            if s <= 4.0 * omega {
                assert!((kappa(s) - kappa(s - 4.0 * omega)).abs() < 1e-7);
            }
            assert!((b.beta(s) + b.beta(-s)).abs() < 1e-7, "beta not odd at {s}");
            assert!((b.beta(s) - b.beta(s - 4.0 * omega)).abs() < 1e-7);
        }
        // zeros of beta spaced 2 omega: beta ~ s vanishes at 0, 2 omega, ...
        for k in [-1.0, 1.0, 2.0] {
            assert!(b.s(2.0 * k * omega).abs() < 1e-7);
        }
    }

    #[test]
    fn shift_identity_and_eq14() {
        let (_p, t, b) = cp_basis();
        let omega = t.omega.unwrap();
        let tau = 2.0 * omega;
        let r = b.c_prime(tau) / b.s_prime(tau);
        let rh = b.c(0.5 * tau) / b.s(0.5 * tau);
        for i in 0..=160 {
            let s = 2.0 * tau * i as f64 / 160.0;
            let lhs = b.c(2.0 * tau - s);
            let rhs = b.c(s) - 2.0 * r * b.s(s);
            assert!((lhs - rhs).abs() < 1e-6, "shift identity residual at t={s}");
        }
        // the profile is symmetric about pi/4, so Eq. (14) applies
        for i in 0..=160 {
            let s = tau * i as f64 / 160.0;
            let res = b.c(tau - s) - 2.0 * rh * b.s(s) + b.c(s);
            assert!(res.abs() < 1e-6, "symmetric half-shift residual at t={s}");
        }
    }

    #[test]
    fn monodromy_full_period_identity_fixture() {
        let omega = 0.9;
        let k = PI / (2.0 * omega);
        let b = basis_from_q(move |_| k * k, 5.0 * omega, 1e-11).unwrap();
        let m = monodromy_at(&b, 4.0 * omega);
        assert!(m.is_identity(1e-6), "{:?}", m.m);
        // half period gives -Id for the pure oscillator
        let m = monodromy_at(&b, 2.0 * omega);
        assert!(m.is_minus_identity(1e-6));
    }

    #[test]
    fn monodromy_det_one_random_fixtures() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let bq: f64 = rng.gen_range(-1.5..1.5);
            let cq: f64 = rng.gen_range(0.3..3.0);
            let t_end: f64 = rng.gen_range(1.0..6.0);
            let b = basis_from_q(move |t: f64| a + bq * (cq * t).cos(), t_end, 1e-11).unwrap();
            let m = monodromy_at(&b, t_end);
            assert!((m.det() - 1.0).abs() < 1e-8, "det {} for ({a},{bq},{cq})", m.det());
        }
    }

    #[test]
    fn cp_monodromy_not_identity() {
        let (_p, t, b) = cp_basis();
        let m = monodromy(&t, &b).unwrap();
        assert!((m.det() - 1.0).abs() < 1e-8);
        assert!(!m.is_identity(1e-6) && !m.is_minus_identity(1e-6));
        // unipotent block structure: c(4w)=1, s(4w)=0, s'(4w)=1
        assert_abs_diff_eq!(m.m[0][0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.m[0][1], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.m[1][1], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(m.m[1][0], 2.0 * b.c_prime(2.0 * OMEGA) / b.s_prime(2.0 * OMEGA), epsilon = 1e-5);
    }

    #[test]
    fn min_gap_cp_equals_two_omega() {
        let (_p, t, b) = cp_basis();
        let omega = t.omega.unwrap();
        assert_abs_diff_eq!(omega, OMEGA, epsilon = 1e-7);
        assert_abs_diff_eq!(omega, 0.5 * (T0 + T1), epsilon = 1e-7);
        let g = min_gap(&t, &b, 64).unwrap();
        assert_abs_diff_eq!(g, 2.0 * omega, epsilon = 1e-5);
        // the minimum is attained at a = 0 (beta is the minimizing solution)
        let z0 = next_zero(&b, 0.0, omega / 200.0).unwrap();
        assert_abs_diff_eq!(z0, 2.0 * omega, epsilon = 1e-7);
    }

    #[test]
    fn min_gap_obstruction_profile_below_two_omega() {
        let p = build("sin(x) + 0.3*sin(2*x)", 2.0 * PI);
        let spec = LaunchSpec { eps: 1, c2: 1e-3, band_idx: 0, side: Side::Left };
        let t = launch_tangent(&p, spec).unwrap();
        let omega = t.omega.unwrap();
        let b = fundamental_basis(&p, &t, 8.0 * omega).unwrap();
        let g = min_gap(&t, &b, 64).unwrap();
        assert!(g < 2.0 * omega - 1e-3, "gap {g} vs 2w {}", 2.0 * omega);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn interlacing_of_zeros(a in 0.0f64..3.0, db in 0.01f64..0.9) {
            // distinct solutions' zeros strictly interlace: if b lies strictly
            // between a and z(a), the next zero after b is at or past z(a)
            let basis = basis_from_q(|t: f64| 1.0 + 0.5 * (1.3 * t).cos(), 16.0, 1e-11).unwrap();
            let za = next_zero(&basis, a, 0.02).unwrap();
            let b = a + db * (za - a);
            prop_assume!(b > a + 1e-3 && b < za - 1e-3);
            let zb = next_zero(&basis, b, 0.02).unwrap();
            prop_assert!(zb >= za - 1e-7, "z({b}) = {zb} < z({a}) = {za}");
        }
    }
}
