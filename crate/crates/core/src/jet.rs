//! Truncated multivariate Taylor series ("jets") in the six real coordinates
//! `(x1, u, x2, y1, v, y2)` of a point of the genus-2 half space.
//!
//! A jet of order `n` stores the Taylor coefficients of a smooth complex
//! function around a base point up to total degree `n`. Arithmetic and the
//! elementary functions propagate the truncated expansion exactly, so every
//! derivative up to order `n` is correct to rounding.

use std::ops::{Add, Mul, Neg, Sub};

use once_cell::sync::Lazy;

use crate::scalar::{Coeff, C64};

/// Number of real coordinates on the half space.
pub const NVARS: usize = 6;
/// Largest supported jet order.
pub const MAX_ORDER: usize = 6;

/// Coordinate indices.
pub const X1: usize = 0;
pub const U: usize = 1;
pub const X2: usize = 2;
pub const Y1: usize = 3;
pub const V: usize = 4;
pub const Y2: usize = 5;

type Exps = [u8; NVARS];

struct Tables {
    exps: Vec<Exps>,
    /// `len_upto[n]` is the number of monomials of degree ≤ n.
    len_upto: [usize; MAX_ORDER + 1],
    /// For each monomial, the factor pairs `(i, j)` with `m_i m_j = m_k`.
    products: Vec<Vec<(u32, u32)>>,
    /// `shift[v][k]`: index of `m_k · x_v`, if within `MAX_ORDER`.
    shift: Vec<Vec<Option<usize>>>,
}

static TABLES: Lazy<Tables> = Lazy::new(build_tables);

fn build_tables() -> Tables {
    let mut exps: Vec<Exps> = Vec::new();
    let mut len_upto = [0usize; MAX_ORDER + 1];
    for deg in 0..=MAX_ORDER {
        let mut cur = [0u8; NVARS];
        push_degree(deg as u8, 0, &mut cur, &mut exps);
        len_upto[deg] = exps.len();
    }
    let index = |e: &Exps| exps.iter().position(|x| x == e);
    let degree = |e: &Exps| e.iter().map(|&x| x as usize).sum::<usize>();
    let mut products = vec![Vec::new(); exps.len()];
    for (i, a) in exps.iter().enumerate() {
        for (j, b) in exps.iter().enumerate() {
            if degree(a) + degree(b) > MAX_ORDER {
                continue;
            }
            let mut s = [0u8; NVARS];
            for t in 0..NVARS {
                s[t] = a[t] + b[t];
            }
            let k = index(&s).expect("monomial present");
            products[k].push((i as u32, j as u32));
        }
    }
    let mut shift = vec![vec![None; exps.len()]; NVARS];
    for (k, e) in exps.iter().enumerate() {
        if degree(e) == MAX_ORDER {
            continue;
        }
        for (v, row) in shift.iter_mut().enumerate() {
            let mut s = *e;
            s[v] += 1;
            row[k] = index(&s);
        }
    }
    Tables { exps, len_upto, products, shift }
}

fn push_degree(remaining: u8, var: usize, cur: &mut Exps, out: &mut Vec<Exps>) {
    if var == NVARS - 1 {
        cur[var] = remaining;
        out.push(*cur);
        cur[var] = 0;
        return;
    }
    for take in (0..=remaining).rev() {
        cur[var] = take;
        push_degree(remaining - take, var + 1, cur, out);
    }
    cur[var] = 0;
}

fn len_for(order: usize) -> usize {
    assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
    TABLES.len_upto[order]
}

/// Truncated Taylor expansion with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    order: usize,
    coeffs: Vec<C64>,
}

impl Jet {
    pub fn constant(value: C64, order: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); len_for(order)];
        coeffs[0] = value;
        Jet { order, coeffs }
    }

    /// The coordinate function `base + δ_var`.
    pub fn variable(base: f64, var: usize, order: usize) -> Self {
        let mut j = Jet::constant(C64::new(base, 0.0), order);
        if order > 0 {
            // degree-one monomials follow the constant, in variable order
            j.coeffs[1 + var] = C64::new(1.0, 0.0);
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> C64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Exponent vector of the `i`-th coefficient.
    pub fn exponents(i: usize) -> [u8; NVARS] {
        TABLES.exps[i]
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet { order, coeffs: self.coeffs[..len_for(order)].to_vec() }
    }

    /// First-order partial derivative in `var`; the result has order `n - 1`.
    pub fn partial(&self, var: usize) -> Jet {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let n = len_for(order);
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let src = TABLES.shift[var][k].expect("within table");
            let factor = TABLES.exps[k][var] as f64 + 1.0;
            *c = self.coeffs[src] * factor;
        }
        Jet { order, coeffs }
    }

    /// Value of `∂^α f` at the base point for the multi-index `α`.
    pub fn derivative(&self, alpha: [u8; NVARS]) -> C64 {
        let idx = TABLES.exps[..self.coeffs.len()].iter().position(|e| *e == alpha);
        match idx {
            Some(i) => {
                let fact: f64 = alpha.iter().map(|&a| (1..=a as u32).product::<u32>() as f64).product();
                self.coeffs[i] * fact
            }
            None => C64::new(0.0, 0.0),
        }
    }

    pub fn scale(&self, s: C64) -> Jet {
        Jet { order: self.order, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_const(&self, s: C64) -> Jet {
        let mut j = self.clone();
        j.coeffs[0] += s;
        j
    }

    pub fn conj(&self) -> Jet {
        Jet { order: self.order, coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    /// Real part, valid because the expansion variables are real.
    pub fn re(&self) -> Jet {
        Jet { order: self.order, coeffs: self.coeffs.iter().map(|c| C64::new(c.re, 0.0)).collect() }
    }

    pub fn im(&self) -> Jet {
        Jet { order: self.order, coeffs: self.coeffs.iter().map(|c| C64::new(c.im, 0.0)).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn binary(&self, o: &Jet) -> (usize, usize) {
        let order = self.order.min(o.order);
        (order, len_for(order))
    }

    fn mul_ref(&self, o: &Jet) -> Jet {
        let (order, n) = self.binary(o);
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        for (k, out) in coeffs.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &(i, j) in &TABLES.products[k] {
                acc += self.coeffs[i as usize] * o.coeffs[j as usize];
            }
            *out = acc;
        }
        Jet { order, coeffs }
    }

    /// Applies a power series `Σ a_n r^n` in the non-constant part `r`.
    pub fn series(&self, a: &[C64]) -> Jet {
        let mut r = self.clone();
        r.coeffs[0] = C64::new(0.0, 0.0);
        // Horner in r
        let mut acc = Jet::constant(a[self.order.min(a.len() - 1)], self.order);
        for n in (0..self.order.min(a.len() - 1)).rev() {
            acc = acc.mul_ref(&r).add_const(a[n]);
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let e0 = self.value().exp();
        let mut a = vec![e0];
        for n in 1..=self.order {
            let prev = a[n - 1];
            a.push(prev / n as f64);
        }
        self.series(&a)
    }

    /// Principal-branch power `f^p`; the base value must be nonzero.
    pub fn powc(&self, p: C64) -> Jet {
        let f0 = self.value();
        let lead = f0.powc(p);
        // (f0 + r)^p = f0^p Σ binom(p, n) (r / f0)^n
        let inv = f0.inv();
        let mut a = vec![lead];
        let mut binom = C64::new(1.0, 0.0);
        let mut invp = C64::new(1.0, 0.0);
        for n in 1..=self.order {
            binom = binom * (p - C64::new((n - 1) as f64, 0.0)) / n as f64;
            invp *= inv;
            a.push(lead * binom * invp);
        }
        self.series(&a)
    }

    pub fn powf(&self, p: f64) -> Jet {
        self.powc(C64::new(p, 0.0))
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn ln(&self) -> Jet {
        let f0 = self.value();
        let inv = f0.inv();
        let mut a = vec![f0.ln()];
        let mut invp = C64::new(1.0, 0.0);
        for n in 1..=self.order {
            invp *= inv;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            a.push(invp * (sign / n as f64));
        }
        self.series(&a)
    }

    /// Substitutes jets with zero constant term for the expansion variables.
    ///
    /// `self` is a Taylor expansion in deviations `ε`; `deltas[i]` expresses
    /// `ε_i` as a jet in new variables. The result has the order of the
    /// arguments, capped by the order of `self`.
    pub fn compose(&self, deltas: &[Jet; NVARS]) -> Jet {
        let order = deltas.iter().map(|d| d.order).min().unwrap_or(0).min(self.order);
        let deltas: Vec<Jet> = deltas.iter().map(|d| d.truncate(order)).collect();
        // powers[i][p] = deltas[i]^p
        let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(NVARS);
        for d in &deltas {
            let mut row = vec![Jet::constant(C64::new(1.0, 0.0), order)];
            for p in 1..=order {
                let next = row[p - 1].mul_ref(d);
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = Jet::constant(C64::new(0.0, 0.0), order);
        for (k, c) in self.coeffs[..len_for(order)].iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let e = TABLES.exps[k];
            let mut term = Jet::constant(*c, order);
            for (v, &p) in e.iter().enumerate() {
                if p > 0 {
                    term = term.mul_ref(&powers[v][p as usize]);
                }
            }
            out = out + term;
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let (order, n) = self.binary(&o);
        let coeffs = (0..n).map(|k| self.coeffs[k] + o.coeffs[k]).collect();
        Jet { order, coeffs }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let (order, n) = self.binary(&o);
        let coeffs = (0..n).map(|k| self.coeffs[k] - o.coeffs[k]).collect();
        Jet { order, coeffs }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        self.mul_ref(&o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl crate::scalar::ComplexCoeff for Jet {
    fn from_c64_like(&self, z: C64) -> Self {
        Jet::constant(z, self.order)
    }
}

impl Coeff for Jet {
    fn from_i64_like(&self, n: i64) -> Self {
        Jet::constant(C64::new(n as f64, 0.0), self.order)
    }

    fn from_f64_like(&self, x: f64) -> Self {
        Jet::constant(C64::new(x, 0.0), self.order)
    }

    fn recip(&self) -> Self {
        let f0 = self.value();
        let inv = f0.inv();
        let mut a = vec![inv];
        for n in 1..=self.order {
            let prev = a[n - 1];
            a.push(-prev * inv);
        }
        self.series(&a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn monomial_counts() {
        // C(6 + n, n)
        assert_eq!(len_for(0), 1);
        assert_eq!(len_for(1), 7);
        assert_eq!(len_for(2), 28);
        assert_eq!(len_for(3), 84);
        assert_eq!(len_for(6), 924);
    }

    #[test]
    fn product_rule_on_polynomials() {
        let x = Jet::variable(2.0, Y1, 3);
        let y = Jet::variable(-1.0, V, 3);
        // f = x^2 y at (2, -1): f_x = 2xy = -4, f_xy = 2x = 4, f_xx = 2y = -2
        let f = x.clone() * x * y;
        assert!((f.value() - c(-4.0)).norm() < 1e-15);
        let mut a = [0u8; NVARS];
        a[Y1] = 1;
        assert!((f.derivative(a) - c(-4.0)).norm() < 1e-14);
        a[V] = 1;
        assert!((f.derivative(a) - c(4.0)).norm() < 1e-14);
        let mut b = [0u8; NVARS];
        b[Y1] = 2;
        assert!((f.derivative(b) - c(-2.0)).norm() < 1e-14);
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let x = Jet::variable(0.7, X1, 4);
        let e = x.exp();
        let mut a = [0u8; NVARS];
        for n in 0..=4u8 {
            a[X1] = n;
            assert!((e.derivative(a) - c(0.7f64.exp())).norm() < 1e-13);
        }
        let p = x.powf(-1.5);
        a[X1] = 2;
        // d²/dx² x^{-3/2} = (15/4) x^{-7/2}
        assert!((p.derivative(a) - c(3.75 * 0.7f64.powf(-3.5))).norm() < 1e-12);
        let l = x.ln();
        a[X1] = 3;
        // d³/dx³ ln x = 2 / x³
        assert!((l.derivative(a) - c(2.0 / 0.343)).norm() < 1e-11);
        let r = x.recip() * x.clone();
        assert!((r.value() - c(1.0)).norm() < 1e-15);
        assert!(r.coeffs()[1..].iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn partial_lowers_order() {
        let x = Jet::variable(1.5, Y2, 3);
        let f = x.clone() * x.clone() * x;
        let g = f.partial(Y2);
        assert_eq!(g.order(), 2);
        assert!((g.value() - c(3.0 * 2.25)).norm() < 1e-14);
    }

    #[test]
    fn composition_is_chain_rule() {
        // f(e) = exp(e1) * e2 around 0, e1 = 2 d, e2 = d + d^2 (single variable d = δ_y1)
        let order = 3;
        let e1 = Jet::variable(0.0, X1, order);
        let e2 = Jet::variable(0.0, U, order);
        let f = e1.exp() * (e2.add_const(c(1.0)));
        let d = Jet::variable(0.0, Y1, order);
        let zero = Jet::constant(c(0.0), order);
        let deltas = [
            d.scale(c(2.0)),
            d.clone() + d.clone() * d.clone(),
            zero.clone(),
            zero.clone(),
            zero.clone(),
            zero,
        ];
        let g = f.compose(&deltas);
        // g(d) = exp(2d)(1 + d + d^2); g'(0) = 3, g''(0) = 4 + 4 + 2 = 10
        let mut a = [0u8; NVARS];
        a[Y1] = 1;
        assert!((g.derivative(a) - c(3.0)).norm() < 1e-13);
        a[Y1] = 2;
        assert!((g.derivative(a) - c(10.0)).norm() < 1e-12);
    }
}
