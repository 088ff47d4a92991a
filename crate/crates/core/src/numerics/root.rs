//! Scalar root bracketing and refinement.

/// Refine a root of `f` inside a sign-change bracket `[a, b]` to absolute
/// tolerance `tol` by bisection, then polish with a few guarded Newton steps
/// when a derivative is supplied.
pub fn refine_root(
    f: impl Fn(f64) -> f64,
    df: Option<&dyn Fn(f64) -> f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> f64 {
    let mut fa = f(a);
    let fb = f(b);
    debug_assert!(
        fa == 0.0 || fb == 0.0 || (fa < 0.0) != (fb < 0.0),
        "refine_root needs a sign change on [{a}, {b}]"
    );
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // float exhaustion
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let mut x = 0.5 * (a + b);
    if let Some(df) = df {
        for _ in 0..4 {
            let d = df(x);
            if d == 0.0 {
                break;
            }
            let step = f(x) / d;
            let next = x - step;
            if next < a || next > b {
                break;
            }
            x = next;
            if step.abs() < tol * 1e-3 {
                break;
            }
        }
    }
    x
}

/// All sign-change roots of `f` on `[a, b]`, located on an `n`-point grid and
/// refined to `tol`. Grid points that evaluate exactly to zero are taken as
/// roots directly.
pub fn grid_roots(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64, n: usize, tol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let h = (b - a) / n as f64;
    let mut x_prev = a;
    let mut f_prev = f(a);
    for i in 1..=n {
        let x = a + h * i as f64;
        let fx = f(x);
        if f_prev == 0.0 {
            push_unique(&mut roots, x_prev, tol);
        } else if fx != 0.0 && (fx < 0.0) != (f_prev < 0.0) {
            push_unique(&mut roots, refine_root(f, None, x_prev, x, tol), tol);
        }
        x_prev = x;
        f_prev = fx;
    }
    if f_prev == 0.0 {
        push_unique(&mut roots, x_prev, tol);
    }
    roots
}

fn push_unique(roots: &mut Vec<f64>, x: f64, tol: f64) {
    if roots.last().is_none_or(|&r| (x - r).abs() > 10.0 * tol.max(1e-14)) {
        roots.push(x);
    }
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn refines_cosine_root() {
        let r = refine_root(|x| x.cos(), Some(&|x: f64| -x.sin()), 1.0, 2.0, 1e-12);
        assert_abs_diff_eq!(r, std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn grid_roots_finds_all_sine_zeros() {
        let roots = grid_roots(|x| (2.0 * x).sin(), -0.1, 6.2, 10_000, 1e-12);
        let expected: Vec<f64> = (0..4).map(|k| k as f64 * std::f64::consts::FRAC_PI_2).collect();
        assert_eq!(roots.len(), expected.len());
        for (r, e) in roots.iter().zip(&expected) {
            assert_abs_diff_eq!(*r, *e, epsilon = 1e-11);
        }
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let m = golden_min(|x| (x - 0.37).powi(2), -1.0, 1.0, 1e-10);
        assert_abs_diff_eq!(m, 0.37, epsilon = 1e-8);
    }
}
