//! Second-order Taylor data in one variable.

use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

/// Value, first and second derivative of a scalar function at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Jet2 {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

impl Jet2 {
    pub const fn new(value: f64, first: f64, second: f64) -> Self {
        Self { value, first, second }
    }

    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0, 0.0)
    }

    /// The independent variable seeded at `x`.
    pub const fn variable(x: f64) -> Self {
        Self::new(x, 1.0, 0.0)
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(k * self.value, k * self.first, k * self.second)
    }

    /// Compose with a scalar function given its value and two derivatives at
    /// `self.value`.
    pub fn compose(self, g: f64, dg: f64, d2g: f64) -> Self {
        Self::new(
            g,
            dg * self.first,
            d2g * self.first * self.first + dg * self.second,
        )
    }

    pub fn tanh(self) -> Self {
        let t = self.value.tanh();
        let s = 1.0 - t * t;
        self.compose(t, s, -2.0 * t * s)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.compose(e, e, e)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2::new(self.value + o.value, self.first + o.first, self.second + o.second)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2::new(self.value - o.value, self.first - o.first, self.second - o.second)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2::new(-self.value, -self.first, -self.second)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2::new(
            self.value * o.value,
            self.first * o.value + self.value * o.first,
            self.second * o.value + 2.0 * self.first * o.first + self.value * o.second,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
        let h = 1e-4;
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn tanh_at_origin() {
        let j = Jet2::variable(0.0).tanh();
        assert_eq!(j, Jet2::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn product_and_chain_rules_match_finite_differences() {
        let f = |x: f64| (x * x).sin() * (0.3 * x).tanh() + (x - 1.0).exp();
        for &x in &[-1.3, -0.2, 0.4, 1.7] {
            let v = Jet2::variable(x);
            let j = (v * v).sin() * v.scale(0.3).tanh() + (v - Jet2::constant(1.0)).exp();
            let (d1, d2) = fd(f, x);
            assert!((j.value - f(x)).abs() < 1e-14);
            assert!((j.first - d1).abs() < 1e-6 * (1.0 + d1.abs()));
            assert!((j.second - d2).abs() < 1e-5 * (1.0 + d2.abs()));
        }
    }
}
