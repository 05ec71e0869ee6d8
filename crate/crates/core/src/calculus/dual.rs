//! Nested dual numbers with tagged perturbations.
//!
//! A [`Dual`] carries one coefficient per subset of active perturbations
//! `ε_0, ε_1, …` with `ε_k² = 0`. Index `mask` of the coefficient vector holds
//! the coefficient of `∏_{k ∈ mask} ε_k`. With one perturbation this is an
//! ordinary dual number, with two it is a hyper-dual number, and deeper
//! nesting (derivatives of expressions that themselves contain derivatives)
//! just adds tags. Every nested differentiation draws a fresh tag, so
//! perturbations from different levels never get confused.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use smallvec::{smallvec, SmallVec};

use crate::error::EvalError;

type Coeffs = SmallVec<[f64; 8]>;

#[derive(Clone, PartialEq)]
pub struct Dual {
    c: Coeffs,
}

impl fmt::Debug for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dual{:?}", self.c.as_slice())
    }
}

impl Dual {
    pub fn constant(v: f64) -> Self {
        Dual { c: smallvec![v] }
    }

    /// The bare perturbation `ε_tag`.
    pub fn epsilon(tag: usize) -> Self {
        let mut c: Coeffs = smallvec![0.0; 2 << tag];
        c[1 << tag] = 1.0;
        Dual { c }
    }

    pub fn from_coeffs(c: &[f64]) -> Self {
        assert!(c.len().is_power_of_two(), "coefficient count must be a power of two");
        Dual { c: c.into() }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn re(&self) -> f64 {
        self.c[0]
    }

    /// Number of perturbation tags this value may carry.
    pub fn depth(&self) -> usize {
        self.c.len().trailing_zeros() as usize
    }

    /// Coefficient of the monomial given by `mask` (zero when out of range).
    pub fn coeff(&self, mask: usize) -> f64 {
        self.c.get(mask).copied().unwrap_or(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    /// Coefficient of `ε_tag` as a number in the remaining perturbations.
    pub fn tangent(&self, tag: usize) -> Dual {
        let bit = 1usize << tag;
        let len = bit.min(self.c.len()).max(1);
        let c: Coeffs = (0..len).map(|s| self.coeff(s | bit)).collect();
        Dual { c }
    }

    fn zip(&self, other: &Dual, f: impl Fn(f64, f64) -> f64) -> Dual {
        let len = self.c.len().max(other.c.len());
        let c = (0..len).map(|s| f(self.coeff(s), other.coeff(s))).collect();
        Dual { c }
    }

    fn map_coeffs(&self, f: impl Fn(f64) -> f64) -> Dual {
        Dual {
            c: self.c.iter().map(|&v| f(v)).collect(),
        }
    }

    fn scale(&self, k: f64) -> Dual {
        self.map_coeffs(|v| v * k)
    }

    fn mul_dual(&self, other: &Dual) -> Dual {
        if other.c.len() == 1 {
            return self.scale(other.c[0]);
        }
        if self.c.len() == 1 {
            return other.scale(self.c[0]);
        }
        let len = self.c.len().max(other.c.len());
        let mut c: Coeffs = smallvec![0.0; len];
        for (s, out) in c.iter_mut().enumerate() {
            // Sum over all splittings of the monomial `s` into two disjoint parts.
            let mut a = s;
            let mut acc = 0.0;
            loop {
                acc += self.coeff(a) * other.coeff(s ^ a);
                if a == 0 {
                    break;
                }
                a = (a - 1) & s;
            }
            *out = acc;
        }
        Dual { c }
    }

    /// Applies a scalar function given the list of its derivatives at the real part:
    /// `f(x0 + δ) = Σ_j f⁽ʲ⁾(x0) δʲ / j!`, which terminates because `δ^(depth+1) = 0`.
    fn compose(&self, derivs: &[f64]) -> Dual {
        let depth = self.depth();
        debug_assert!(derivs.len() > depth);
        let mut delta = self.clone();
        delta.c[0] = 0.0;
        let mut out = Dual::constant(derivs[0]);
        let mut power = Dual::constant(1.0);
        let mut factorial = 1.0;
        for (j, &d) in derivs.iter().enumerate().take(depth + 1).skip(1) {
            power = power.mul_dual(&delta);
            factorial *= j as f64;
            out = &out + &power.scale(d / factorial);
        }
        out
    }

    pub fn exp(&self) -> Dual {
        let e = self.re().exp();
        self.compose(&vec![e; self.depth() + 1])
    }

    pub fn ln(&self) -> Result<Dual, EvalError> {
        let x = self.re();
        if x.is_nan() || x <= 0.0 {
            return Err(EvalError::Domain(format!("log of non-positive value {x}")));
        }
        let mut d = vec![x.ln()];
        // d^j/dx^j ln x = (-1)^(j-1) (j-1)! / x^j
        let mut fact = 1.0;
        for j in 1..=self.depth() {
            if j > 1 {
                fact *= (j - 1) as f64;
            }
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * fact / x.powi(j as i32));
        }
        Ok(self.compose(&d))
    }

    pub fn sin(&self) -> Dual {
        let (s, c) = self.re().sin_cos();
        let cycle = [s, c, -s, -c];
        let d: Vec<f64> = (0..=self.depth()).map(|j| cycle[j % 4]).collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Dual {
        let (s, c) = self.re().sin_cos();
        let cycle = [c, -s, -c, s];
        let d: Vec<f64> = (0..=self.depth()).map(|j| cycle[j % 4]).collect();
        self.compose(&d)
    }

    pub fn recip(&self) -> Result<Dual, EvalError> {
        let x = self.re();
        if x == 0.0 {
            return Err(EvalError::Domain("division by zero".into()));
        }
        // d^j/dx^j 1/x = (-1)^j j! / x^(j+1)
        let mut d = Vec::with_capacity(self.depth() + 1);
        let mut fact = 1.0;
        for j in 0..=self.depth() {
            if j > 0 {
                fact *= j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            d.push(sign * fact / x.powi(j as i32 + 1));
        }
        Ok(self.compose(&d))
    }

    pub fn powi(&self, n: i32) -> Result<Dual, EvalError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut out = Dual::constant(1.0);
        let mut base = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul_dual(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_dual(&base);
            }
        }
        Ok(out)
    }

    /// `x^r` for a real exponent; requires `x > 0` unless `r` is an integer.
    pub fn powf(&self, r: f64) -> Result<Dual, EvalError> {
        if r.fract() == 0.0 && r.abs() <= i32::MAX as f64 {
            return self.powi(r as i32);
        }
        let x = self.re();
        if x.is_nan() || x <= 0.0 {
            return Err(EvalError::Domain(format!(
                "non-integer power {r} of non-positive value {x}"
            )));
        }
        let mut d = Vec::with_capacity(self.depth() + 1);
        let mut falling = 1.0;
        for j in 0..=self.depth() {
            if j > 0 {
                falling *= r - (j - 1) as f64;
            }
            d.push(falling * x.powf(r - j as f64));
        }
        Ok(self.compose(&d))
    }

    pub fn checked_div(&self, other: &Dual) -> Result<Dual, EvalError> {
        if other.c.len() == 1 {
            if other.c[0] == 0.0 {
                return Err(EvalError::Domain("division by zero".into()));
            }
            return Ok(self.scale(1.0 / other.c[0]));
        }
        Ok(self.mul_dual(&other.recip()?))
    }
}

impl From<f64> for Dual {
    fn from(v: f64) -> Self {
        Dual::constant(v)
    }
}

impl Add for &Dual {
    type Output = Dual;
    fn add(self, rhs: &Dual) -> Dual {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &Dual {
    type Output = Dual;
    fn sub(self, rhs: &Dual) -> Dual {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &Dual {
    type Output = Dual;
    fn mul(self, rhs: &Dual) -> Dual {
        self.mul_dual(rhs)
    }
}

/// Panics on a zero real part in the divisor; use [`Dual::checked_div`] when that can happen.
impl Div for &Dual {
    type Output = Dual;
    fn div(self, rhs: &Dual) -> Dual {
        self.checked_div(rhs).expect("division by zero")
    }
}

impl Neg for &Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        self.map_coeffs(|v| -v)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Dual {
            type Output = Dual;
            fn $method(self, rhs: Dual) -> Dual {
                (&self).$method(&rhs)
            }
        }
        impl $tr<f64> for Dual {
            type Output = Dual;
            fn $method(self, rhs: f64) -> Dual {
                (&self).$method(&Dual::constant(rhs))
            }
        }
        impl $tr<Dual> for f64 {
            type Output = Dual;
            fn $method(self, rhs: Dual) -> Dual {
                (&Dual::constant(self)).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(v: f64, tags: &[usize]) -> Dual {
        tags.iter()
            .fold(Dual::constant(v), |acc, &t| &acc + &Dual::epsilon(t))
    }

    #[test]
    fn first_derivative_of_product() {
        let x = var(3.0, &[0]);
        let y = &(&x * &x) * &x;
        assert_eq!(y.coeffs(), &[27.0, 27.0]);
    }

    #[test]
    fn hyper_dual_second_derivative() {
        // f = sin(x) at x = 0.7 seeded with two tags: coefficient of e0 e1 is f''.
        let x = var(0.7, &[0, 1]);
        let y = x.sin();
        assert!((y.coeff(3) + 0.7f64.sin()).abs() < 1e-15);
        assert!((y.coeff(1) - 0.7f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn third_derivative_of_log() {
        let x = var(2.0, &[0, 1, 2]);
        let y = x.ln().unwrap();
        // (ln x)''' = 2/x^3
        assert!((y.coeff(7) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn recip_and_powf_match_closed_forms() {
        let x = var(1.5, &[0, 1]);
        let r = x.recip().unwrap();
        assert!((r.coeff(3) - 2.0 / 1.5f64.powi(3)).abs() < 1e-14);
        let p = x.powf(0.5).unwrap();
        assert!((p.coeff(3) + 0.25 * 1.5f64.powf(-1.5)).abs() < 1e-14);
    }

    #[test]
    fn tangent_strips_a_tag() {
        let x = var(2.0, &[0, 1]);
        let y = &x * &x; // x^2: coeffs [4, 4, 4, 2]
        assert_eq!(y.coeffs(), &[4.0, 4.0, 4.0, 2.0]);
        assert_eq!(y.tangent(1).coeffs(), &[4.0, 2.0]);
    }

    #[test]
    fn domain_errors() {
        assert!(Dual::constant(-1.0).ln().is_err());
        assert!(Dual::constant(0.0).recip().is_err());
        assert!(Dual::constant(-2.0).powf(0.5).is_err());
        assert!(Dual::constant(-2.0).powf(3.0).is_ok());
    }
}
