//! Second-order forward-mode automatic differentiation.
//!
//! A [`Dual2`] carries a value together with its first and second derivative
//! with respect to a single scalar parameter. Every arithmetic operation and
//! elementary function propagates both derivatives by the chain rule, so a
//! function written once over `Dual2` yields `(h, h', h'')` exactly up to
//! rounding.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Dual2 {
    pub const fn new(v: f64, d1: f64, d2: f64) -> Self {
        Self { v, d1, d2 }
    }

    /// The independent variable at `x`: derivative one, curvature zero.
    pub const fn var(x: f64) -> Self {
        Self::new(x, 1.0, 0.0)
    }

    pub const fn constant(c: f64) -> Self {
        Self::new(c, 0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    /// Applies a scalar function given its value and first two derivatives at `self.v`.
    #[inline]
    fn chain(self, h: f64, dh: f64, ddh: f64) -> Self {
        Self::new(h, dh * self.d1, ddh * self.d1 * self.d1 + dh * self.d2)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(self) -> Self {
        let t = self.v.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(self.v.ln(), inv, -inv * inv)
    }

    pub fn abs(self) -> Self {
        let sign = if self.v < 0.0 { -1.0 } else { 1.0 };
        Self::new(self.v.abs(), sign * self.d1, sign * self.d2)
    }

    pub fn atan(self) -> Self {
        let q = 1.0 / (1.0 + self.v * self.v);
        self.chain(self.v.atan(), q, -2.0 * self.v * q * q)
    }

    pub fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::constant(1.0),
            1 => self,
            _ => {
                let nf = n as f64;
                let p2 = self.v.powi(n - 2);
                let p1 = p2 * self.v;
                self.chain(p1 * self.v, nf * p1, nf * (nf - 1.0) * p2)
            }
        }
    }

    /// Real power with a constant exponent; integral exponents go through [`Dual2::powi`].
    pub fn powf(self, n: f64) -> Self {
        if n.fract() == 0.0 && n.abs() <= i32::MAX as f64 {
            return self.powi(n as i32);
        }
        let p = self.v.powf(n);
        self.chain(p, n * p / self.v, n * (n - 1.0) * p / (self.v * self.v))
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    pub fn scale(self, c: f64) -> Self {
        Self::new(c * self.v, c * self.d1, c * self.d2)
    }

    /// `sin(x)/x`, continued analytically through the origin.
    pub fn sinc(self) -> Self {
        let x = self.v;
        if x.abs() < 1.0 {
            // alternating series in x², converges to rounding for |x| < 1
            let (h, dh, ddh) = even_series(x, &SINC_COEFFS);
            self.chain(h, dh, ddh)
        } else {
            self.sin() / self
        }
    }

    /// `(sin(x) − x)/x²`, continued analytically through the origin.
    pub fn sin_defect(self) -> Self {
        let x = self.v;
        if x.abs() < 1.0 {
            // (sin x − x)/x² = x · Σ c_k x^{2k}
            let (q, dq, ddq) = even_series(x, &SIN_DEFECT_COEFFS);
            self.chain(x * q, q + x * dq, 2.0 * dq + x * ddq)
        } else {
            (self.sin() - self) / (self * self)
        }
    }
}

const SINC_COEFFS: [f64; 12] = [
    1.0,
    -1.0 / 6.0,
    1.0 / 120.0,
    -1.0 / 5040.0,
    1.0 / 362880.0,
    -1.0 / 39916800.0,
    1.0 / 6227020800.0,
    -1.0 / 1307674368000.0,
    1.0 / 355687428096000.0,
    -1.0 / 121645100408832000.0,
    1.0 / 51090942171709440000.0,
    -1.0 / 25852016738884976640000.0,
];

// coefficients of (sin x − x)/x³ in powers of x²: −1/3!, 1/5!, −1/7!, ...
const SIN_DEFECT_COEFFS: [f64; 11] = [
    -1.0 / 6.0,
    1.0 / 120.0,
    -1.0 / 5040.0,
    1.0 / 362880.0,
    -1.0 / 39916800.0,
    1.0 / 6227020800.0,
    -1.0 / 1307674368000.0,
    1.0 / 355687428096000.0,
    -1.0 / 121645100408832000.0,
    1.0 / 51090942171709440000.0,
    -1.0 / 25852016738884976640000.0,
];

/// Evaluates `Σ c_k x^{2k}` and its first two derivatives by Horner's rule.
fn even_series(x: f64, coeffs: &[f64]) -> (f64, f64, f64) {
    let y = x * x;
    let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
    for &c in coeffs.iter().rev() {
        ddp = ddp * y + 2.0 * dp;
        dp = dp * y + p;
        p = p * y + c;
    }
    // d/dx = 2x d/dy, d²/dx² = 2 d/dy + 4x² d²/dy²
    (p, 2.0 * x * dp, 2.0 * dp + 4.0 * y * ddp)
}

impl From<f64> for Dual2 {
    fn from(c: f64) -> Self {
        Self::constant(c)
    }
}

impl fmt::Display for Dual2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.v, self.d1, self.d2)
    }
}

impl Neg for Dual2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.v, -self.d1, -self.d2)
    }
}

impl Add for Dual2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Dual2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Dual2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )
    }
}

impl Div for Dual2 {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for Dual2 {
            type Output = Dual2;
            fn $m(self, o: f64) -> Dual2 { $tr::$m(self, Dual2::constant(o)) }
        }
        impl $tr<Dual2> for f64 {
            type Output = Dual2;
            fn $m(self, o: Dual2) -> Dual2 { $tr::$m(Dual2::constant(self), o) }
        }
    )*};
}
scalar_ops!(Add add, Sub sub, Mul mul, Div div);

#[cfg(test)]
mod tests {
    use super::*;

    fn fd2(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
        let h = 1e-4;
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (d1, d2)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn product_rule_second_order() {
        let x = Dual2::var(0.7);
        let y = x * x * x;
        assert!(close(y.d1, 3.0 * 0.49, 1e-15));
        assert!(close(y.d2, 6.0 * 0.7, 1e-15));
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        let x0 = 0.83;
        let cases: Vec<(Box<dyn Fn(Dual2) -> Dual2>, Box<dyn Fn(f64) -> f64>)> = vec![
            (Box::new(|x: Dual2| x.sin()), Box::new(|x: f64| x.sin())),
            (Box::new(|x: Dual2| x.cos()), Box::new(|x: f64| x.cos())),
            (Box::new(|x: Dual2| x.tan()), Box::new(|x: f64| x.tan())),
            (Box::new(|x: Dual2| x.sqrt()), Box::new(|x: f64| x.sqrt())),
            (Box::new(|x: Dual2| x.exp()), Box::new(|x: f64| x.exp())),
            (Box::new(|x: Dual2| x.ln()), Box::new(|x: f64| x.ln())),
            (Box::new(|x: Dual2| x.atan()), Box::new(|x: f64| x.atan())),
            (Box::new(|x: Dual2| x.powf(2.5)), Box::new(|x: f64| x.powf(2.5))),
            (Box::new(|x: Dual2| x.powi(-3)), Box::new(|x: f64| x.powi(-3))),
            (Box::new(|x: Dual2| (-x).abs()), Box::new(|x: f64| x.abs())),
            (Box::new(|x: Dual2| 1.0 / (x - 2.0)), Box::new(|x: f64| 1.0 / (x - 2.0))),
        ];
        for (i, (fd, f)) in cases.iter().enumerate() {
            let y = fd(Dual2::var(x0));
            let (d1, d2) = fd2(f, x0);
            assert!(close(y.v, f(x0), 1e-15), "case {i}");
            assert!(close(y.d1, d1, 1e-7), "case {i}: {} vs {}", y.d1, d1);
            assert!(close(y.d2, d2, 1e-5), "case {i}: {} vs {}", y.d2, d2);
        }
    }

    #[test]
    fn series_branches_agree_with_closed_forms_at_the_switch() {
        for &x in &[0.999_999, -0.999_999, 0.5, 1e-3] {
            let a = Dual2::var(x).sinc();
            let b = Dual2::var(x).sin() / Dual2::var(x);
            assert!(close(a.v, b.v, 1e-13) && close(a.d1, b.d1, 1e-11) && close(a.d2, b.d2, 1e-9));
            let a = Dual2::var(x).sin_defect();
            let xv = Dual2::var(x);
            let b = (xv.sin() - xv) / (xv * xv);
            let tol = if x.abs() < 0.1 { 1e-6 } else { 1e-10 };
            assert!(close(a.v, b.v, tol) && close(a.d1, b.d1, tol) && close(a.d2, b.d2, 1e3 * tol));
        }
        let z = Dual2::var(0.0);
        assert_eq!(z.sinc(), Dual2::new(1.0, 0.0, -1.0 / 3.0));
        let w = z.sin_defect();
        assert_eq!((w.v, w.d1, w.d2), (0.0, -1.0 / 6.0, 0.0));
    }

    #[test]
    fn composition_through_a_seeded_inner_derivative() {
        // h(u(x)) with u = x² seeded by hand
        let x = 1.3_f64;
        let u = Dual2::new(x * x, 2.0 * x, 2.0);
        let h = u.sin();
        assert!(close(h.d1, (x * x).cos() * 2.0 * x, 1e-14));
        assert!(close(h.d2, -(x * x).sin() * 4.0 * x * x + 2.0 * (x * x).cos(), 1e-13));
    }
}
