//! Truncated-Taylor (jet) arithmetic in two variables.
//!
//! A [`Jet`] carries the Taylor coefficients of a scalar function of
//! (u1, u2) about a base point, through total order 3 — ten coefficients.
//! Arithmetic on jets reproduces the product/chain rule exactly, so the
//! coefficients of any composite expression equal the analytic partial
//! derivatives (divided by factorials) up to roundoff.
//!
//! Truncation is benign under composition: the order-k coefficient of a
//! product depends only on coefficients of orders <= k of the factors, so a
//! chain that starts from exact order-3 jets stays exact through order
//! 3 minus the number of explicit differentiations taken along the way.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Number of coefficients of a bivariate jet of total order 3.
pub const JET_LEN: usize = 10;

/// Multi-index (i, j) of each coefficient slot, ordered by total degree.
const IJ: [(usize, usize); JET_LEN] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

const fn slot(i: usize, j: usize) -> usize {
    // Degree-major layout; valid for i + j <= 3.
    match (i, j) {
        (0, 0) => 0,
        (1, 0) => 1,
        (0, 1) => 2,
        (2, 0) => 3,
        (1, 1) => 4,
        (0, 2) => 5,
        (3, 0) => 6,
        (2, 1) => 7,
        (1, 2) => 8,
        (0, 3) => 9,
        _ => usize::MAX,
    }
}

/// Domain failures of jet-valued elementary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetError {
    DivisionByZero,
    LogNonPositive,
    SqrtNonPositive,
    PowNonPositiveBase,
    Atan2Origin,
}

impl fmt::Display for JetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            JetError::DivisionByZero => "division by zero",
            JetError::LogNonPositive => "log of non-positive value",
            JetError::SqrtNonPositive => "sqrt of non-positive value",
            JetError::PowNonPositiveBase => "non-integer power of non-positive base",
            JetError::Atan2Origin => "atan2 at the origin",
        };
        f.write_str(msg)
    }
}

/// Taylor coefficients of a scalar about a base point in (u1, u2),
/// all mixed partials through total order 3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; JET_LEN],
}

impl Jet {
    pub fn zero() -> Self {
        Jet { c: [0.0; JET_LEN] }
    }

    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = v;
        Jet { c }
    }

    /// The jet of the coordinate itself: value `v`, unit first derivative
    /// along `axis` (0 for u1, 1 for u2).
    pub fn variable(v: f64, axis: usize) -> Self {
        assert!(axis < 2, "jet axis must be 0 or 1");
        let mut c = [0.0; JET_LEN];
        c[0] = v;
        c[if axis == 0 { slot(1, 0) } else { slot(0, 1) }] = 1.0;
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Partial derivative ∂₁^i ∂₂^j at the base point (coefficients times
    /// factorials). Valid for i + j <= 3.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        let s = slot(i, j);
        assert!(s != usize::MAX, "partial order out of range");
        self.c[s] * FACT[i] * FACT[j]
    }

    /// Jet of the first derivative along `axis`. The top-order coefficients
    /// of the result are unknowable and set to zero, so the result is valid
    /// one order lower than the input.
    pub fn derivative(&self, axis: usize) -> Jet {
        let mut out = [0.0; JET_LEN];
        for p in 0..JET_LEN {
            let (i, j) = IJ[p];
            let src = if axis == 0 {
                if i + 1 + j > 3 {
                    continue;
                }
                slot(i + 1, j)
            } else {
                if i + j + 1 > 3 {
                    continue;
                }
                slot(i, j + 1)
            };
            let factor = if axis == 0 { (i + 1) as f64 } else { (j + 1) as f64 };
            out[p] = factor * self.c[src];
        }
        Jet { c: out }
    }

    pub fn is_constant(&self) -> bool {
        self.c[1..].iter().all(|&v| v == 0.0)
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut c = self.c;
        for v in &mut c {
            *v *= s;
        }
        Jet { c }
    }

    fn without_value(&self) -> Jet {
        let mut c = self.c;
        c[0] = 0.0;
        Jet { c }
    }

    /// Univariate composition g(self) given the derivatives
    /// `d = [g(v), g'(v), g''(v), g'''(v)]` at `v = self.value()`.
    fn compose(&self, d: [f64; 4]) -> Jet {
        let w = self.without_value();
        // Horner in the nilpotent part.
        let mut r = Jet::constant(d[3] / 6.0);
        r = r * w + Jet::constant(d[2] / 2.0);
        r = r * w + Jet::constant(d[1]);
        r = r * w + Jet::constant(d[0]);
        r
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        Ok(self.compose([1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v), -6.0 / (v * v * v * v)]))
    }

    pub fn div(&self, rhs: &Jet) -> Result<Jet, JetError> {
        Ok(*self * rhs.recip()?)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v <= 0.0 {
            return Err(JetError::LogNonPositive);
        }
        Ok(self.compose([v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)]))
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v <= 0.0 {
            if v == 0.0 && self.is_constant() {
                return Ok(Jet::constant(0.0));
            }
            return Err(JetError::SqrtNonPositive);
        }
        let s = v.sqrt();
        Ok(self.compose([s, 0.5 / s, -0.25 / (v * s), 0.375 / (v * v * s)]))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn tan(&self) -> Result<Jet, JetError> {
        self.sin().div(&self.cos())
    }

    pub fn sinh(&self) -> Jet {
        let s = self.value().sinh();
        let c = self.value().cosh();
        self.compose([s, c, s, c])
    }

    pub fn cosh(&self) -> Jet {
        let s = self.value().sinh();
        let c = self.value().cosh();
        self.compose([c, s, c, s])
    }

    pub fn tanh(&self) -> Jet {
        let t = self.value().tanh();
        let sech2 = 1.0 - t * t;
        self.compose([t, sech2, -2.0 * t * sech2, sech2 * (6.0 * t * t - 2.0)])
    }

    pub fn atan(&self) -> Jet {
        let v = self.value();
        let q = 1.0 + v * v;
        self.compose([
            v.atan(),
            1.0 / q,
            -2.0 * v / (q * q),
            (6.0 * v * v - 2.0) / (q * q * q),
        ])
    }

    /// Four-quadrant arctangent of (self, x), correct to order 3.
    ///
    /// Rotates the pair by minus the base angle so the rotated abscissa is
    /// positive, then composes the ordinary arctangent about zero.
    pub fn atan2(&self, x: &Jet) -> Result<Jet, JetError> {
        let y0 = self.value();
        let x0 = x.value();
        let r0 = y0.hypot(x0);
        if r0 == 0.0 {
            return Err(JetError::Atan2Origin);
        }
        let theta0 = y0.atan2(x0);
        let (s, c) = theta0.sin_cos();
        let xt = *x * Jet::constant(c) + *self * Jet::constant(s);
        let yt = *self * Jet::constant(c) - *x * Jet::constant(s);
        let t = yt.div(&xt)?;
        Ok(t.atan() + Jet::constant(theta0))
    }

    /// Integer power by repeated squaring (handles non-positive bases).
    pub fn powi(&self, n: i64) -> Result<Jet, JetError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Jet::constant(1.0);
        let mut base = *self;
        let mut n = n as u64;
        while n > 0 {
            if n & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            n >>= 1;
        }
        Ok(result)
    }

    /// Real power; requires a strictly positive base value.
    pub fn powf(&self, p: f64) -> Result<Jet, JetError> {
        let v = self.value();
        if v <= 0.0 {
            return Err(JetError::PowNonPositiveBase);
        }
        Ok(self.compose([
            v.powf(p),
            p * v.powf(p - 1.0),
            p * (p - 1.0) * v.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * v.powf(p - 3.0),
        ]))
    }

    /// General power a^b = exp(b ln a); base value must be positive unless
    /// the exponent is a constant integer (use [`Jet::powi`] for that case).
    pub fn pow(&self, rhs: &Jet) -> Result<Jet, JetError> {
        if rhs.is_constant() {
            let p = rhs.value();
            if p == p.trunc() && p.abs() <= 1e9 {
                return self.powi(p as i64);
            }
            return self.powf(p);
        }
        if self.value() <= 0.0 {
            return Err(JetError::PowNonPositiveBase);
        }
        Ok((*rhs * self.ln()?).exp())
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        Jet { c }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        Jet { c }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut out = [0.0; JET_LEN];
        for p in 0..JET_LEN {
            let ap = self.c[p];
            if ap == 0.0 {
                continue;
            }
            let (i1, j1) = IJ[p];
            for q in 0..JET_LEN {
                let (i2, j2) = IJ[q];
                let (i, j) = (i1 + i2, j1 + j2);
                if i + j <= 3 {
                    out[slot(i, j)] += ap * rhs.c[q];
                }
            }
        }
        Jet { c: out }
    }
}
