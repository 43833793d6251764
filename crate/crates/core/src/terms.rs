//! Closed-form scalar terms on the half space, closed under coordinate derivatives.

use std::f64::consts::PI;

use crate::jet::{Jet, NVARS, U, V, X1, X2, Y1, Y2};
use crate::scalar::C64;

/// `c · x^α · y^β · (y⁻¹)^γ · det(y)^{p/2} · e(tx) · exp(−2π tr(sy))`,
/// where monomials run over the entries `(x1, u, x2)`, `(y1, v, y2)` and
/// `(w11, w12, w22)` of `y⁻¹`, and `tr(tx) = t11 x1 + 2 t12 u + t22 x2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicTerm {
    pub coeff: C64,
    pub x_exp: [u32; 3],
    pub y_exp: [u32; 3],
    pub w_exp: [u32; 3],
    pub det_half: i32,
    /// `(t11, t12, t22)`
    pub t: [f64; 3],
    /// `(s11, s12, s22)`
    pub s: [f64; 3],
}

impl SymbolicTerm {
    pub fn constant(c: C64) -> Self {
        SymbolicTerm { coeff: c, x_exp: [0; 3], y_exp: [0; 3], w_exp: [0; 3], det_half: 0, t: [0.0; 3], s: [0.0; 3] }
    }

    /// `det(y)^{p/2}`.
    pub fn det_y_half(p: i32) -> Self {
        SymbolicTerm { det_half: p, ..Self::constant(C64::new(1.0, 0.0)) }
    }

    /// `e(tx)`.
    pub fn e_tx(t: [f64; 3]) -> Self {
        SymbolicTerm { t, ..Self::constant(C64::new(1.0, 0.0)) }
    }

    /// `e(tτ) = e(tx)·exp(−2π tr(ty))`.
    pub fn e_t_tau(t: [f64; 3]) -> Self {
        SymbolicTerm { t, s: t, ..Self::constant(C64::new(1.0, 0.0)) }
    }

    pub fn times(mut self, o: &SymbolicTerm) -> Self {
        self.coeff *= o.coeff;
        for i in 0..3 {
            self.x_exp[i] += o.x_exp[i];
            self.y_exp[i] += o.y_exp[i];
            self.w_exp[i] += o.w_exp[i];
            self.t[i] += o.t[i];
            self.s[i] += o.s[i];
        }
        self.det_half += o.det_half;
        self
    }

    pub fn scaled(mut self, c: C64) -> Self {
        self.coeff *= c;
        self
    }

    /// Evaluates on coordinate jets `(x1, u, x2, y1, v, y2)`.
    pub fn eval(&self, c: &[Jet; NVARS]) -> Jet {
        let order = c[0].order();
        let mut acc = Jet::constant(self.coeff, order);
        let pw = |j: &Jet, n: u32| (0..n).fold(Jet::constant(C64::new(1.0, 0.0), order), |a, _| a * j.clone());
        for (i, var) in [X1, U, X2].into_iter().enumerate() {
            if self.x_exp[i] > 0 {
                acc = acc * pw(&c[var], self.x_exp[i]);
            }
        }
        for (i, var) in [Y1, V, Y2].into_iter().enumerate() {
            if self.y_exp[i] > 0 {
                acc = acc * pw(&c[var], self.y_exp[i]);
            }
        }
        let det = c[Y1].clone() * c[Y2].clone() - c[V].clone() * c[V].clone();
        if self.w_exp.iter().any(|&e| e > 0) {
            let inv = crate::scalar::Coeff::recip(&det);
            let w = [c[Y2].clone() * inv.clone(), -(c[V].clone() * inv.clone()), c[Y1].clone() * inv];
            for i in 0..3 {
                if self.w_exp[i] > 0 {
                    acc = acc * pw(&w[i], self.w_exp[i]);
                }
            }
        }
        if self.det_half != 0 {
            acc = acc * det.powf(self.det_half as f64 / 2.0);
        }
        let ex = self.t.iter().any(|&v| v != 0.0) || self.s.iter().any(|&v| v != 0.0);
        if ex {
            let i2pi = C64::new(0.0, 2.0 * PI);
            let lin = c[X1].scale(i2pi * self.t[0]) + c[U].scale(i2pi * 2.0 * self.t[1]) + c[X2].scale(i2pi * self.t[2])
                - c[Y1].scale(C64::new(2.0 * PI * self.s[0], 0.0))
                - c[V].scale(C64::new(4.0 * PI * self.s[1], 0.0))
                - c[Y2].scale(C64::new(2.0 * PI * self.s[2], 0.0));
            acc = acc * lin.exp();
        }
        acc
    }

    /// Symbolic partial derivative in coordinate `var`, as a sum of terms of the same class.
    pub fn partial(&self, var: usize) -> Vec<SymbolicTerm> {
        let mut out = Vec::new();
        let base = self.clone();
        match var {
            X1 | U | X2 => {
                let i = [X1, U, X2].iter().position(|&v| v == var).unwrap();
                if self.x_exp[i] > 0 {
                    let mut t = base.clone();
                    t.coeff *= self.x_exp[i] as f64;
                    t.x_exp[i] -= 1;
                    out.push(t);
                }
                let f = [1.0, 2.0, 1.0][i] * self.t[i];
                if f != 0.0 {
                    out.push(base.scaled(C64::new(0.0, 2.0 * PI * f)));
                }
            }
            _ => {
                let i = [Y1, V, Y2].iter().position(|&v| v == var).unwrap();
                if self.y_exp[i] > 0 {
                    let mut t = base.clone();
                    t.coeff *= self.y_exp[i] as f64;
                    t.y_exp[i] -= 1;
                    out.push(t);
                }
                // ∂w = −w E w with E = ∂y/∂var; entries of w are (w11, w12, w22)
                let idx = |r: usize, c: usize| -> usize {
                    match (r.min(c), r.max(c)) {
                        (0, 0) => 0,
                        (0, 1) => 1,
                        _ => 2,
                    }
                };
                let entries = [(0usize, 0usize), (0, 1), (1, 1)];
                let e_pairs: &[(usize, usize)] = match i {
                    0 => &[(0, 0)],
                    1 => &[(0, 1), (1, 0)],
                    _ => &[(1, 1)],
                };
                for (k, &(r, c)) in entries.iter().enumerate() {
                    if self.w_exp[k] == 0 {
                        continue;
                    }
                    for &(p, q) in e_pairs {
                        let mut t = base.clone();
                        t.coeff *= -(self.w_exp[k] as f64);
                        t.w_exp[k] -= 1;
                        t.w_exp[idx(r, p)] += 1;
                        t.w_exp[idx(q, c)] += 1;
                        out.push(t);
                    }
                }
                // ∂ det^{p/2} = (p/2) det^{p/2} tr(w E)
                if self.det_half != 0 {
                    let (k, mult) = [(0usize, 1.0), (1, 2.0), (2, 1.0)][i];
                    let mut t = base.clone();
                    t.coeff *= self.det_half as f64 / 2.0 * mult;
                    t.w_exp[k] += 1;
                    out.push(t);
                }
                let f = [1.0, 2.0, 1.0][i] * self.s[i];
                if f != 0.0 {
                    out.push(base.scaled(C64::new(-2.0 * PI * f, 0.0)));
                }
            }
        }
        out
    }

    /// `true` when the term is a constant multiple of a product of `e(tτ)` factors,
    /// hence holomorphic.
    pub fn is_holomorphic(&self) -> bool {
        self.x_exp == [0; 3] && self.y_exp == [0; 3] && self.w_exp == [0; 3] && self.det_half == 0 && self.t == self.s
    }
}

/// A sum of terms.
pub fn eval_sum(terms: &[SymbolicTerm], c: &[Jet; NVARS]) -> Jet {
    let order = c[0].order();
    terms.iter().fold(Jet::constant(C64::new(0.0, 0.0), order), |acc, t| acc + t.eval(c))
}
