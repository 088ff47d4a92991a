//! Closed-form profile expressions: a small scalar DSL with exact rule-based
//! differentiation on the tree.
//!
//! Finite differences are never used for derivatives: downstream sign
//! conditions involve f''' and would drown in truncation noise. The Jacobi
//! elliptic entries `jacobi_sn`/`jacobi_sd` take the *modulus* k as second
//! argument (parameter m = k^2 internally); `sd` is lowered to `sn/dn` at
//! parse time so the derivative closure only needs sn, cn, dn.

// float literals are compared in guards rather than matched as patterns
#![allow(clippy::redundant_guards)]

pub mod elliptic;
pub mod parser;

pub use parser::parse;

/// Expression tree over the single variable `x`.
///
/// The elliptic nodes carry the parameter m = k^2 as a plain constant; cn and
/// dn are not producible by the parser but arise under differentiation.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Ln(Box<Expr>),
    Exp(Box<Expr>),
    Sn(Box<Expr>, f64),
    Cn(Box<Expr>, f64),
    Dn(Box<Expr>, f64),
}

use Expr::*;

// Smart constructors with light constant folding; they keep derivative trees
// from ballooning (0 and 1 elimination matters a lot under the product rule).

pub fn num(v: f64) -> Expr {
    Num(v)
}

pub fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Num(x), Num(y)) => Num(x + y),
        (Num(z), b) if z == 0.0 => b,
        (a, Num(z)) if z == 0.0 => a,
        (a, b) => Add(Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Num(x), Num(y)) => Num(x - y),
        (a, Num(z)) if z == 0.0 => a,
        (Num(z), b) if z == 0.0 => neg(b),
        (a, b) => Sub(Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Num(x), Num(y)) => Num(x * y),
        (Num(z), _) | (_, Num(z)) if z == 0.0 => Num(0.0),
        (Num(o), b) if o == 1.0 => b,
        (a, Num(o)) if o == 1.0 => a,
        (a, b) => Mul(Box::new(a), Box::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Num(z), _) if z == 0.0 => Num(0.0),
        (a, Num(o)) if o == 1.0 => a,
        (a, b) => Div(Box::new(a), Box::new(b)),
    }
}

pub fn pow(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, Num(o)) if o == 1.0 => a,
        (_, Num(z)) if z == 0.0 => Num(1.0),
        (a, b) => Pow(Box::new(a), Box::new(b)),
    }
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Num(v) => Num(-v),
        Neg(inner) => *inner,
        a => Neg(Box::new(a)),
    }
}

pub fn sin(a: Expr) -> Expr {
    Sin(Box::new(a))
}
pub fn cos(a: Expr) -> Expr {
    Cos(Box::new(a))
}
pub fn ln(a: Expr) -> Expr {
    Ln(Box::new(a))
}
pub fn exp(a: Expr) -> Expr {
    Exp(Box::new(a))
}
pub fn jacobi_sn(a: Expr, m: f64) -> Expr {
    Sn(Box::new(a), m)
}
pub fn jacobi_cn(a: Expr, m: f64) -> Expr {
    Cn(Box::new(a), m)
}
pub fn jacobi_dn(a: Expr, m: f64) -> Expr {
    Dn(Box::new(a), m)
}

impl Expr {
    /// Evaluate at x. Domain violations (log of a non-positive value, fractional
    /// power of a negative base, non-finite intermediate) are reported, never
    /// silently propagated as NaN.
    pub fn eval(&self, x: f64) -> Result<f64, String> {
        let v = self.eval_raw(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite value {v}"))
        }
    }

    fn eval_raw(&self, x: f64) -> Result<f64, String> {
        Ok(match self {
            Num(v) => *v,
            X => x,
            Add(a, b) => a.eval_raw(x)? + b.eval_raw(x)?,
            Sub(a, b) => a.eval_raw(x)? - b.eval_raw(x)?,
            Mul(a, b) => a.eval_raw(x)? * b.eval_raw(x)?,
            Div(a, b) => {
                let d = b.eval_raw(x)?;
                if d == 0.0 {
                    return Err("division by zero".into());
                }
                a.eval_raw(x)? / d
            }
            Pow(a, b) => {
                let base = a.eval_raw(x)?;
                let e = b.eval_raw(x)?;
                let v = base.powf(e);
                if v.is_nan() {
                    return Err(format!("invalid power {base}^{e}"));
                }
                v
            }
            Neg(a) => -a.eval_raw(x)?,
            Sin(a) => a.eval_raw(x)?.sin(),
            Cos(a) => a.eval_raw(x)?.cos(),
            Ln(a) => {
                let v = a.eval_raw(x)?;
                if v <= 0.0 {
                    return Err(format!("ln of non-positive value {v}"));
                }
                v.ln()
            }
            Exp(a) => a.eval_raw(x)?.exp(),
            Sn(a, m) => elliptic::sncndn(a.eval_raw(x)?, *m).0,
            Cn(a, m) => elliptic::sncndn(a.eval_raw(x)?, *m).1,
            Dn(a, m) => elliptic::sncndn(a.eval_raw(x)?, *m).2,
        })
    }

    /// Exact derivative with respect to x, as a new tree.
    pub fn diff(&self) -> Expr {
        match self {
            Num(_) => Num(0.0),
            X => Num(1.0),
            Add(a, b) => add(a.diff(), b.diff()),
            Sub(a, b) => sub(a.diff(), b.diff()),
            Mul(a, b) => add(mul(a.diff(), (**b).clone()), mul((**a).clone(), b.diff())),
            Div(a, b) => div(
                sub(mul(a.diff(), (**b).clone()), mul((**a).clone(), b.diff())),
                mul((**b).clone(), (**b).clone()),
            ),
            Pow(a, b) => match &**b {
                // d(u^n) = n u^(n-1) u' keeps integer powers rational
                Num(n) => mul(
                    mul(Num(*n), pow((**a).clone(), Num(n - 1.0))),
                    a.diff(),
                ),
                _ => mul(
                    Pow(a.clone(), b.clone()),
                    add(
                        mul(b.diff(), ln((**a).clone())),
                        mul((**b).clone(), div(a.diff(), (**a).clone())),
                    ),
                ),
            },
            Neg(a) => neg(a.diff()),
            Sin(a) => mul(cos((**a).clone()), a.diff()),
            Cos(a) => neg(mul(sin((**a).clone()), a.diff())),
            Ln(a) => div(a.diff(), (**a).clone()),
            Exp(a) => mul(exp((**a).clone()), a.diff()),
            Sn(a, m) => mul(
                mul(jacobi_cn((**a).clone(), *m), jacobi_dn((**a).clone(), *m)),
                a.diff(),
            ),
            Cn(a, m) => neg(mul(
                mul(jacobi_sn((**a).clone(), *m), jacobi_dn((**a).clone(), *m)),
                a.diff(),
            )),
            Dn(a, m) => neg(mul(
                mul(
                    Num(*m),
                    mul(jacobi_sn((**a).clone(), *m), jacobi_cn((**a).clone(), *m)),
                ),
                a.diff(),
            )),
        }
    }

    /// True when the tree references the variable.
    pub fn depends_on_x(&self) -> bool {
        match self {
            Num(_) => false,
            X => true,
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => {
                a.depends_on_x() || b.depends_on_x()
            }
            Neg(a) | Sin(a) | Cos(a) | Ln(a) | Exp(a) | Sn(a, _) | Cn(a, _) | Dn(a, _) => {
                a.depends_on_x()
            }
        }
    }
}
