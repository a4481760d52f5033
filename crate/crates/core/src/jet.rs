//! Second-order forward-mode differentiation.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a scalar quantity
//! with respect to a fixed set of `d` active variables. Every derivative in
//! the crate (differentials, vertical derivatives, Legendre linearizations)
//! is obtained by evaluating a field on seeded jets.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::DomainError;

/// Value, gradient and Hessian of a scalar field at a point.
///
/// The Hessian is stored row-major as a dense `d × d` block. Only the upper
/// triangle is ever computed; the lower triangle is mirrored from it, so the
/// matrix is exactly symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    /// The `index`-th coordinate function at `value`.
    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut j = Jet2::constant(value, dim);
        j.grad[index] = 1.0;
        j
    }

    /// Seeds one jet per coordinate of `point`.
    pub fn seed(point: &[f64]) -> Vec<Jet2> {
        let d = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet2::variable(v, i, d))
            .collect()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    #[inline]
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    /// Hessian rows as nested vectors (convenience for tests and printing).
    pub fn hess_rows(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d).map(|i| self.hess[i * d..(i + 1) * d].to_vec()).collect()
    }

    /// Builds a jet from its parts, filling the Hessian by symmetric mirroring
    /// of the values produced by `upper(i, j)` for `i <= j`.
    fn build(value: f64, grad: Vec<f64>, mut upper: impl FnMut(usize, usize) -> f64) -> Self {
        let d = grad.len();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = upper(i, j);
                hess[i * d + j] = v;
                hess[j * d + i] = v;
            }
        }
        Jet2 { value, grad, hess }
    }

    /// Applies a scalar function given its value and first two derivatives at
    /// `self.value`.
    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        let grad = self.grad.iter().map(|g| df * g).collect();
        Jet2::build(f, grad, |i, j| {
            df * self.h(i, j) + d2f * self.grad[i] * self.grad[j]
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.chain(c * self.value, c, 0.0)
    }

    pub fn recip(&self) -> Result<Self, DomainError> {
        let v = self.value;
        if v == 0.0 {
            return Err(DomainError::new("division by zero", v));
        }
        Ok(self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)))
    }

    pub fn try_div(&self, rhs: &Jet2) -> Result<Self, DomainError> {
        Ok(self * &rhs.recip()?)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (libm::sin(self.value), libm::cos(self.value));
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (libm::sin(self.value), libm::cos(self.value));
        self.chain(c, -s, -c)
    }

    pub fn exp(&self) -> Self {
        let e = libm::exp(self.value);
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Result<Self, DomainError> {
        let v = self.value;
        if v <= 0.0 {
            return Err(DomainError::new("log of non-positive argument", v));
        }
        Ok(self.chain(libm::log(v), 1.0 / v, -1.0 / (v * v)))
    }

    pub fn sqrt(&self) -> Result<Self, DomainError> {
        let v = self.value;
        if v < 0.0 {
            return Err(DomainError::new("sqrt of negative argument", v));
        }
        let s = libm::sqrt(v);
        if v == 0.0 {
            if self.grad.iter().any(|&g| g != 0.0) {
                return Err(DomainError::new("sqrt not differentiable at zero", v));
            }
            return Ok(Jet2::constant(0.0, self.dim()));
        }
        Ok(self.chain(s, 0.5 / s, -0.25 / (s * v)))
    }

    /// `self^c` for a constant exponent. Integer exponents accept any base.
    pub fn powf(&self, c: f64) -> Result<Self, DomainError> {
        let v = self.value;
        if c == 0.0 {
            return Ok(Jet2::constant(1.0, self.dim()));
        }
        let integral = libm::trunc(c) == c && libm::fabs(c) < 2.0e9;
        if integral {
            let k = c as i32;
            if v == 0.0 && k < 0 {
                return Err(DomainError::new("division by zero", v));
            }
            let f = powi(v, k);
            let df = if k == 0 { 0.0 } else { c * powi(v, k - 1) };
            let d2f = if k == 0 || k == 1 {
                0.0
            } else {
                c * (c - 1.0) * powi(v, k - 2)
            };
            return Ok(self.chain(f, df, d2f));
        }
        if v < 0.0 || (v == 0.0 && c < 2.0) {
            return Err(DomainError::new("non-integer power of non-positive base", v));
        }
        if v == 0.0 {
            return Ok(Jet2::constant(0.0, self.dim()));
        }
        let f = libm::pow(v, c);
        Ok(self.chain(f, c * f / v, c * (c - 1.0) * f / (v * v)))
    }

    /// `self^e` with a variable exponent, evaluated as `exp(e·ln self)`.
    pub fn pow(&self, e: &Jet2) -> Result<Self, DomainError> {
        Ok((&self.ln()? * e).exp())
    }
}

/// Integer power by repeated squaring; exact for small exponents so that
/// `x*x` and `x^2` agree bit for bit.
pub(crate) fn powi(base: f64, k: i32) -> f64 {
    let mut n = k.unsigned_abs();
    let mut acc = 1.0;
    let mut b = base;
    while n > 0 {
        if n & 1 == 1 {
            acc *= b;
        }
        b *= b;
        n >>= 1;
    }
    if k < 0 {
        1.0 / acc
    } else {
        acc
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        let (a, b) = (self, rhs);
        let grad = a
            .grad
            .iter()
            .zip(&b.grad)
            .map(|(ga, gb)| a.value * gb + b.value * ga)
            .collect();
        Jet2::build(a.value * b.value, grad, |i, j| {
            a.value * b.h(i, j) + b.value * a.h(i, j) + a.grad[i] * b.grad[j] + b.grad[i] * a.grad[j]
        })
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet2 {
            type Output = Jet2;
            fn $m(self, rhs: Jet2) -> Jet2 {
                <&Jet2 as $tr<&Jet2>>::$m(&self, &rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Number types the expression evaluator can run on: plain reals or jets.
pub trait Scalar: Clone + core::fmt::Debug {
    fn constant(value: f64, dim: usize) -> Self;
    fn dim(&self) -> usize;
    fn value(&self) -> f64;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, rhs: &Self) -> Result<Self, DomainError>;
    fn powf(&self, c: f64) -> Result<Self, DomainError>;
    fn pow(&self, e: &Self) -> Result<Self, DomainError>;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self, DomainError>;
    fn sqrt(&self) -> Result<Self, DomainError>;
}

impl Scalar for f64 {
    fn constant(value: f64, _dim: usize) -> Self {
        value
    }
    fn dim(&self) -> usize {
        0
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, rhs: &Self) -> Result<Self, DomainError> {
        if *rhs == 0.0 {
            return Err(DomainError::new("division by zero", *rhs));
        }
        // Same rounding path as the jet: multiply by the reciprocal.
        Ok(self * (1.0 / rhs))
    }
    fn powf(&self, c: f64) -> Result<Self, DomainError> {
        Jet2::constant(*self, 0).powf(c).map(|j| j.value)
    }
    fn pow(&self, e: &Self) -> Result<Self, DomainError> {
        Ok(libm::exp(Scalar::ln(self)? * e))
    }
    fn sin(&self) -> Self {
        libm::sin(*self)
    }
    fn cos(&self) -> Self {
        libm::cos(*self)
    }
    fn exp(&self) -> Self {
        libm::exp(*self)
    }
    fn ln(&self) -> Result<Self, DomainError> {
        Jet2::constant(*self, 0).ln().map(|j| j.value)
    }
    fn sqrt(&self) -> Result<Self, DomainError> {
        Jet2::constant(*self, 0).sqrt().map(|j| j.value)
    }
}

impl Scalar for Jet2 {
    fn constant(value: f64, dim: usize) -> Self {
        Jet2::constant(value, dim)
    }
    fn dim(&self) -> usize {
        Jet2::dim(self)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, rhs: &Self) -> Result<Self, DomainError> {
        self.try_div(rhs)
    }
    fn powf(&self, c: f64) -> Result<Self, DomainError> {
        Jet2::powf(self, c)
    }
    fn pow(&self, e: &Self) -> Result<Self, DomainError> {
        Jet2::pow(self, e)
    }
    fn sin(&self) -> Self {
        Jet2::sin(self)
    }
    fn cos(&self) -> Self {
        Jet2::cos(self)
    }
    fn exp(&self) -> Self {
        Jet2::exp(self)
    }
    fn ln(&self) -> Result<Self, DomainError> {
        Jet2::ln(self)
    }
    fn sqrt(&self) -> Result<Self, DomainError> {
        Jet2::sqrt(self)
    }
}

/// A scalar function of `arity` real variables that can be evaluated on any
/// [`Scalar`] type.
pub trait ScalarFn {
    fn eval_on<S: Scalar>(&self, args: &[S]) -> Result<S, crate::Error>;
}

/// Exact value, gradient and Hessian of `f` at `point`.
pub fn jet_eval<F: ScalarFn + ?Sized>(f: &F, point: &[f64]) -> Result<Jet2, crate::Error> {
    let seeds = Jet2::seed(point);
    let j = f.eval_on(&seeds)?;
    if j.dim() != point.len() {
        // Constant-only expressions evaluated with no seeds come back 0-dim.
        return Ok(Jet2::constant(j.value, point.len()));
    }
    Ok(j)
}

/// Largest absolute deviation between the jet derivatives of `f` and central
/// finite differences with step `h` (gradient and Hessian entries).
pub fn finite_diff_check<F: ScalarFn + ?Sized>(
    f: &F,
    point: &[f64],
    h: f64,
) -> Result<f64, crate::Error> {
    assert!(h > 0.0, "finite-difference step must be positive");
    let jet = jet_eval(f, point)?;
    let d = point.len();
    let eval = |p: &[f64]| f.eval_on::<f64>(p);
    let f0 = eval(point)?;
    let mut worst: f64 = 0.0;
    let mut p = point.to_vec();
    for i in 0..d {
        p[i] = point[i] + h;
        let fp = eval(&p)?;
        p[i] = point[i] - h;
        let fm = eval(&p)?;
        p[i] = point[i];
        let g = (fp - fm) / (2.0 * h);
        worst = worst.max(libm::fabs(g - jet.grad[i]));
        let hii = (fp - 2.0 * f0 + fm) / (h * h);
        worst = worst.max(libm::fabs(hii - jet.h(i, i)));
        for j in (i + 1)..d {
            let mut corner = |si: f64, sj: f64| {
                p[i] = point[i] + si * h;
                p[j] = point[j] + sj * h;
                let v = eval(&p);
                p[i] = point[i];
                p[j] = point[j];
                v
            };
            let hij = (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)?
                + corner(-1.0, -1.0)?)
                / (4.0 * h * h);
            worst = worst.max(libm::fabs(hij - jet.h(i, j)));
        }
    }
    Ok(worst)
}
