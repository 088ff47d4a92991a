//! Chart-level geometry: ribbon metric and Christoffel symbols, curvature,
//! transition primitives between ribbons, and the saddle-chart extension
//! around a simple zero of f.

use crate::error::{Error, Result};
use crate::numerics::quad;
use crate::profile::FProfile;
use serde::Serialize;

/// Geodesic curvature function: kappa(x) = f''(x)/2.
pub fn curvature(p: &FProfile, x: f64) -> f64 {
    0.5 * p.f2(x)
}

/// Nonzero Christoffel symbols of the ribbon metric 2*sigma dx dy + f dy^2.
///
/// With g_xy = sigma (sigma^2 = 1) and g_yy = f the inverse metric is
/// g^xx = -f, g^xy = sigma, and the standard computation gives
/// Gamma^x_yy = f f'/2 (sigma-free), Gamma^y_yy = -sigma f'/2,
/// Gamma^x_xy = sigma f'/2. Consistency with the radial equation
/// x'' = -eps f'/2 is covered by the geodesic-equation residual test.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChristoffelData {
    pub gamma_x_yy: f64,
    pub gamma_y_yy: f64,
    pub gamma_x_xy: f64,
}

pub fn christoffel(p: &FProfile, x: f64, sigma: f64) -> ChristoffelData {
    debug_assert!(sigma == 1.0 || sigma == -1.0);
    let f = p.f(x);
    let f1 = p.f1(x);
    ChristoffelData {
        gamma_x_yy: 0.5 * f * f1,
        gamma_y_yy: -0.5 * sigma * f1,
        gamma_x_xy: 0.5 * sigma * f1,
    }
}

/// One ribbon chart I x R with parity sign sigma = (-1)^k.
#[derive(Debug, Clone)]
pub struct RibbonChart {
    pub lo: f64,
    pub hi: f64,
    pub sigma: f64,
}

impl RibbonChart {
    /// (g_xx, g_xy, g_yy) at x; the determinant is identically -1.
    pub fn metric_components(&self, p: &FProfile, x: f64) -> (f64, f64, f64) {
        (0.0, self.sigma, p.f(x))
    }
}

/// Primitive G of -1/f anchored at a band-interior reference point.
///
/// G blows up at band boundaries, so evaluation is restricted to the open
/// band; the transition map between consecutive ribbons is
/// psi(x, y) = (x, 2G(x) + y).
pub struct TransitionPrimitive<'a> {
    p: &'a FProfile,
    pub lo: f64,
    pub hi: f64,
    pub x_ref: f64,
    tol: f64,
}

/// Build the primitive for a band, anchored at `x_ref` strictly inside it.
pub fn transition_primitive<'a>(
    p: &'a FProfile,
    band_lo: f64,
    band_hi: f64,
    x_ref: f64,
) -> Result<TransitionPrimitive<'a>> {
    if !(band_lo < x_ref && x_ref < band_hi) {
        return Err(Error::OutOfBand { x: x_ref, lo: band_lo, hi: band_hi });
    }
    Ok(TransitionPrimitive { p, lo: band_lo, hi: band_hi, x_ref, tol: p.tol.quad_tol })
}

impl TransitionPrimitive<'_> {
    /// G(x) = -Int_{x_ref}^{x} dt/f(t), defined on the open band only.
    pub fn g(&self, x: f64) -> Result<f64> {
        if !(self.lo < x && x < self.hi) {
            return Err(Error::OutOfBand { x, lo: self.lo, hi: self.hi });
        }
        let p = self.p;
        quad::adaptive_gk(|t| -1.0 / p.f(t), self.x_ref, x, self.tol)
    }

    /// Transition map to the neighbouring ribbon.
    pub fn psi(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        Ok((x, 2.0 * self.g(x)? + y))
    }

    /// Inverse transition map.
    pub fn psi_inv(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        Ok((x, y - 2.0 * self.g(x)?))
    }

    /// Generic reflection phi(x, y) = (-x, 2G(-x) + y); sends K to -K. Exposed
    /// for isometry testing only - the certifier uses the beta-symmetries
    /// analytically.
    pub fn reflection(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        Ok((-x, 2.0 * self.g(-x)? + y))
    }
}

/// The Eq.-(5) saddle chart at a simple zero x_k of f:
/// (1/lambda)[v^2 h(uv) du^2 - 2(j(uv)+1/j(uv)) du dv + u^2 h(uv) dv^2]
/// with j(x) = Int_0^1 f'(t x) dt, l = j - 1/j, h(x) = Int_0^1 l'(t x) dt.
pub struct SaddleChart<'a> {
    p: &'a FProfile,
    pub x_k: f64,
    pub lambda: f64,
    pub j_halfwidth: f64,
}

/// Build the saddle chart at zero index `k`. `j_halfwidth` of `None` defaults
/// to 0.4x the distance to the nearest other zero, keeping j away from 0.
pub fn saddle_chart<'a>(
    p: &'a FProfile,
    k: usize,
    j_halfwidth: Option<f64>,
) -> Result<SaddleChart<'a>> {
    let x_k = p.zeros[k];
    let lambda = p.zero_slopes[k];
    if lambda.abs() <= p.tol.margin_simple {
        return Err(Error::DegenerateZero { x: x_k, slope: lambda });
    }
    let nearest = p
        .zeros
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, &z)| {
            let d = (z - x_k).abs();
            d.min(p.period - d)
        })
        .fold(p.period, f64::min);
    let j_halfwidth = j_halfwidth.unwrap_or(0.4 * nearest);
    Ok(SaddleChart { p, x_k, lambda, j_halfwidth })
}

impl SaddleChart<'_> {
    /// j(x) = Int_0^1 f'(x_k + t x) dt; j(0) = lambda and x j(x) = f(x_k + x).
    pub fn j(&self, x: f64) -> f64 {
        let p = self.p;
        let x_k = self.x_k;
        quad::gauss_legendre_01(|t| p.f1(x_k + t * x))
    }

    fn j_prime(&self, x: f64) -> f64 {
        let p = self.p;
        let x_k = self.x_k;
        quad::gauss_legendre_01(|t| t * p.f2(x_k + t * x))
    }

    pub fn l(&self, x: f64) -> f64 {
        let j = self.j(x);
        j - 1.0 / j
    }

    fn l_prime(&self, x: f64) -> f64 {
        let j = self.j(x);
        self.j_prime(x) * (1.0 + 1.0 / (j * j))
    }

    /// h(x) = Int_0^1 l'(t x) dt = (l(x) - l(0))/x with the removable
    /// singularity at 0 built in.
    pub fn h(&self, x: f64) -> f64 {
        quad::gauss_legendre_01(|t| self.l_prime(t * x))
    }

    /// Metric components (g_uu, g_uv, g_vv) at (u, v), valid for |uv| within
    /// the chart halfwidth.
    pub fn metric_at(&self, u: f64, v: f64) -> Result<(f64, f64, f64)> {
        let w = u * v;
        if w.abs() > self.j_halfwidth {
            return Err(Error::OutOfBand {
                x: w,
                lo: -self.j_halfwidth,
                hi: self.j_halfwidth,
            });
        }
        let j = self.j(w);
        let h = self.h(w);
        let inv_l = 1.0 / self.lambda;
        Ok((v * v * h * inv_l, -(j + 1.0 / j) * inv_l, u * u * h * inv_l))
    }

    /// The Killing field K = (2/lambda)(u d_u - v d_v) in chart coordinates.
    pub fn killing_at(&self, u: f64, v: f64) -> (f64, f64) {
        (2.0 / self.lambda * u, -2.0 / self.lambda * v)
    }
}

/// Exponent coefficient of the incomplete null orbit at zero k with
/// orientation eta: the orbit is parametrized by -2(eta f')^{-1} e^{-eta f' t/2},
/// and nabla_K K = -(f'(x_k)/2) K there. Returns the coefficient -eta f'(x_k)/2
/// together with the Christoffel residual |Gamma^y_yy(x_k) + f'(x_k)/2| of the
/// sigma = +1 chart as a numerical consistency check.
pub fn null_orbit_parametrization(p: &FProfile, k: usize, eta: f64) -> Result<(f64, f64)> {
    let x_k = p.zeros[k];
    let slope = p.zero_slopes[k];
    if slope.abs() <= p.tol.margin_simple {
        return Err(Error::DegenerateZero { x: x_k, slope });
    }
    let ch = christoffel(p, x_k, 1.0);
    let residual = (ch.gamma_y_yy + 0.5 * slope).abs();
    Ok((-0.5 * eta * slope, residual))
}
