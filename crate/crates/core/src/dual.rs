//! Forward-mode dual numbers for exact first derivatives of closed-form coefficients.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// `value + deriv * eps` with `eps^2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    pub const fn new(value: f64, deriv: f64) -> Self {
        Dual { value, deriv }
    }

    pub const fn constant(value: f64) -> Self {
        Dual { value, deriv: 0.0 }
    }

    pub const fn variable(value: f64) -> Self {
        Dual { value, deriv: 1.0 }
    }

    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        Dual::new(s, 0.5 * self.deriv / s)
    }

    pub fn sin(self) -> Self {
        Dual::new(self.value.sin(), self.deriv * self.value.cos())
    }

    pub fn cos(self) -> Self {
        Dual::new(self.value.cos(), -self.deriv * self.value.sin())
    }

    pub fn powi(self, n: i32) -> Self {
        Dual::new(self.value.powi(n), f64::from(n) * self.value.powi(n - 1) * self.deriv)
    }
}

impl From<f64> for Dual {
    fn from(v: f64) -> Self {
        Dual::constant(v)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.value + o.value, self.deriv + o.deriv)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.value - o.value, self.deriv - o.deriv)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.value * o.value, self.deriv * o.value + self.value * o.deriv)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual::new(self.value / o.value, (self.deriv * o.value - self.value * o.deriv) / (o.value * o.value))
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.deriv)
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, s: f64) -> Dual {
        Dual::new(self.value * s, self.deriv * s)
    }
}

/// Complex number with dual real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualComplex {
    pub re: Dual,
    pub im: Dual,
}

impl DualComplex {
    pub fn new(re: Dual, im: Dual) -> Self {
        DualComplex { re, im }
    }

    pub fn real(re: Dual) -> Self {
        DualComplex { re, im: Dual::constant(0.0) }
    }

    /// `e^{i phase}`.
    pub fn expi(phase: Dual) -> Self {
        DualComplex { re: phase.cos(), im: phase.sin() }
    }

    pub fn value(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.value, self.im.value)
    }

    pub fn deriv(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.deriv, self.im.deriv)
    }
}

impl Add for DualComplex {
    type Output = DualComplex;
    fn add(self, o: Self) -> Self {
        DualComplex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for DualComplex {
    type Output = DualComplex;
    fn sub(self, o: Self) -> Self {
        DualComplex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for DualComplex {
    type Output = DualComplex;
    fn mul(self, o: Self) -> Self {
        DualComplex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Mul<Dual> for DualComplex {
    type Output = DualComplex;
    fn mul(self, s: Dual) -> Self {
        DualComplex::new(self.re * s, self.im * s)
    }
}

impl Neg for DualComplex {
    type Output = DualComplex;
    fn neg(self) -> Self {
        DualComplex::new(-self.re, -self.im)
    }
}
