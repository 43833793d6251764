//! Ring abstraction shared by the float, exact-rational and jet code paths.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Complex double, the working scalar of every analysis path.
pub type C64 = Complex64;

/// Gaussian rationals, used for exact Lie algebra and representation checks.
pub type QI = Complex<BigRational>;

/// A commutative ring element that can build constants of its own "kind".
///
/// Constants are produced from an existing element so that types carrying
/// runtime shape (jets of a given order) can be handled uniformly.
pub trait Coeff:
    Clone + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_i64_like(&self, n: i64) -> Self;

    /// Real constant; exact rings round to the nearest representable value.
    fn from_f64_like(&self, x: f64) -> Self;

    /// Multiplicative inverse. Callers guarantee the element is a unit.
    fn recip(&self) -> Self;

    fn zero_like(&self) -> Self {
        self.from_i64_like(0)
    }

    fn one_like(&self) -> Self {
        self.from_i64_like(1)
    }

    fn powi(&self, n: i32) -> Self {
        let base = if n < 0 { self.recip() } else { self.clone() };
        let mut acc = self.one_like();
        for _ in 0..n.unsigned_abs() {
            acc = acc * base.clone();
        }
        acc
    }
}

impl Coeff for f64 {
    fn from_i64_like(&self, n: i64) -> Self {
        n as f64
    }
    fn from_f64_like(&self, x: f64) -> Self {
        x
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
}

impl Coeff for C64 {
    fn from_i64_like(&self, n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
    fn from_f64_like(&self, x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn recip(&self) -> Self {
        self.inv()
    }
}

impl Coeff for BigRational {
    fn from_i64_like(&self, n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_f64_like(&self, x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }
    fn recip(&self) -> Self {
        num_traits::Inv::inv(self.clone())
    }
}

impl Coeff for QI {
    fn from_i64_like(&self, n: i64) -> Self {
        QI::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }
    fn from_f64_like(&self, x: f64) -> Self {
        QI::new(BigRational::from_float(x).unwrap_or_else(BigRational::zero), BigRational::zero())
    }
    fn recip(&self) -> Self {
        let norm = self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone();
        QI::new(self.re.clone() / norm.clone(), -self.im.clone() / norm)
    }
}

/// Rings containing ℂ (floats and jets), used by the differential operators.
pub trait ComplexCoeff: Coeff {
    fn from_c64_like(&self, z: C64) -> Self;
}

impl ComplexCoeff for C64 {
    fn from_c64_like(&self, z: C64) -> Self {
        z
    }
}

/// Exact rational from a numerator/denominator pair.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact Gaussian rational from integer real and imaginary parts.
pub fn qi(re: i64, im: i64) -> QI {
    QI::new(rat(re, 1), rat(im, 1))
}

pub fn qi_zero() -> QI {
    QI::new(BigRational::zero(), BigRational::zero())
}

pub fn qi_one() -> QI {
    QI::new(BigRational::one(), BigRational::zero())
}

/// Floating-point image of an exact rational.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn qi_to_c64(z: &QI) -> C64 {
    C64::new(rat_to_f64(&z.re), rat_to_f64(&z.im))
}

/// 2×2 matrix over any [`Coeff`] ring, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat2<T>(pub [[T; 2]; 2]);

impl<T: Coeff> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.0[i][j]
    }

    pub fn det(&self) -> T {
        let m = &self.0;
        m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone()
    }

    pub fn trace(&self) -> T {
        self.0[0][0].clone() + self.0[1][1].clone()
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0].clone(), m[1][0].clone(), m[0][1].clone(), m[1][1].clone())
    }

    /// Adjugate: `adj(m) m = det(m) I`.
    pub fn adj(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[1][1].clone(), -m[0][1].clone(), -m[1][0].clone(), m[0][0].clone())
    }

    pub fn inverse(&self) -> Self {
        let inv_det = self.det().recip();
        self.adj().scale(&inv_det)
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> Mat2<U> {
        let m = &self.0;
        Mat2([[f(&m[0][0]), f(&m[0][1])], [f(&m[1][0]), f(&m[1][1])]])
    }

    pub fn add(&self, o: &Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0].clone() + b[0][0].clone(),
            a[0][1].clone() + b[0][1].clone(),
            a[1][0].clone() + b[1][0].clone(),
            a[1][1].clone() + b[1][1].clone(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.map(|x| -x.clone()))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        let e = |i: usize, j: usize| a[i][0].clone() * b[0][j].clone() + a[i][1].clone() * b[1][j].clone();
        Mat2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn identity_like(t: &T) -> Self {
        Mat2::new(t.one_like(), t.zero_like(), t.zero_like(), t.one_like())
    }
}

impl Mat2<C64> {
    pub fn from_real(m: &Mat2<f64>) -> Self {
        m.map(|x| C64::new(*x, 0.0))
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Mat2<f64> {
    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.0[0][1] - self.0[1][0]).abs() <= tol
    }
}
