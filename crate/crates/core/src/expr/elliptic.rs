//! Jacobi elliptic functions by the arithmetic-geometric mean / descending
//! Landen transformation (Abramowitz & Stegun 16.4).
//!
//! All functions take the *parameter* m = k^2. The expression DSL exposes the
//! modulus k and squares it before reaching this module.

const MAX_AGM: usize = 32;

/// sn(u|m), cn(u|m), dn(u|m) for 0 <= m < 1.
///
/// dn is recovered from `sqrt(1 - m sn^2)` rather than the amplitude recursion:
/// the radicand is bounded below by 1-m, so this form keeps full accuracy where
/// the cosine-ratio form cancels.
pub fn sncndn(u: f64, m: f64) -> (f64, f64, f64) {
    debug_assert!((0.0..1.0).contains(&m), "parameter m out of [0,1): {m}");
    if m < 1e-16 {
        return (u.sin(), u.cos(), 1.0);
    }

    let mut a = [0.0f64; MAX_AGM];
    let mut c = [0.0f64; MAX_AGM];
    a[0] = 1.0;
    c[0] = m.sqrt();
    let mut b = (1.0 - m).sqrt();
    let mut n = 0;
    while c[n].abs() > f64::EPSILON * a[n] && n + 1 < MAX_AGM {
        let (an, bn) = (a[n], b);
        a[n + 1] = 0.5 * (an + bn);
        b = (an * bn).sqrt();
        c[n + 1] = 0.5 * (an - bn);
        n += 1;
    }

    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for i in (1..=n).rev() {
        let s = (c[i] / a[i] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + s.asin());
    }

    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (1.0 - m * sn * sn).sqrt();
    (sn, cn, dn)
}

/// Complete elliptic integral of the first kind K(m), parameter convention.
pub fn complete_k(m: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&m));
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..MAX_AGM {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    std::f64::consts::FRAC_PI_2 / a
}
