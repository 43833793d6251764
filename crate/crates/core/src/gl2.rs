//! Finite-dimensional representations `det^k sym^l` of GL₂.
//!
//! `sym^l` is modeled on homogeneous polynomials of degree `l` in `X, Y`, with
//! coefficient `j` attached to `X^{l−j} Y^j`, and `g` acting by `P(v) ↦ P(v g)`
//! for the row vector `v = (X, Y)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::{Coeff, Mat2, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight {
    pub k: i64,
    pub l: u32,
}

impl Weight {
    pub fn new(k: i64, l: u32) -> Self {
        Weight { k, l }
    }

    pub fn dim(&self) -> usize {
        self.l as usize + 1
    }

    /// `det^k sym^l ↦ det^{−k−l} sym^l`.
    pub fn dual(&self) -> Weight {
        Weight { k: -self.k - self.l as i64, l: self.l }
    }

    /// Tensoring with `det^m`.
    pub fn twist(&self, m: i64) -> Weight {
        Weight { k: self.k + m, l: self.l }
    }
}

impl std::fmt::Display for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "det^{} sym^{}", self.k, self.l)
    }
}

pub fn dual_weight(w: Weight) -> Weight {
    w.dual()
}

/// An element of `V(det^k sym^l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RepVector<T = C64> {
    pub weight: Weight,
    pub coeffs: Vec<T>,
}

impl<T: Coeff> RepVector<T> {
    pub fn new(weight: Weight, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != weight.dim() {
            return domain(format!("{} needs {} coefficients, got {}", weight, weight.dim(), coeffs.len()));
        }
        Ok(RepVector { weight, coeffs })
    }

    pub fn zero(weight: Weight, like: &T) -> Self {
        RepVector { weight, coeffs: vec![like.zero_like(); weight.dim()] }
    }

    /// The monomial `X^{l−j} Y^j`.
    pub fn monomial(weight: Weight, j: usize, like: &T) -> Self {
        let mut v = Self::zero(weight, like);
        v.coeffs[j] = like.one_like();
        v
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.weight, o.weight);
        RepVector { weight: self.weight, coeffs: zip_with(&self.coeffs, &o.coeffs, |a, b| a + b) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.weight, o.weight);
        RepVector { weight: self.weight, coeffs: zip_with(&self.coeffs, &o.coeffs, |a, b| a - b) }
    }

    pub fn scale(&self, s: &T) -> Self {
        RepVector { weight: self.weight, coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect() }
    }
}

impl RepVector<C64> {
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// An element of `sym² ⊗ V(det^k sym^l)`; row `i` is the factor `X^{2−i}Y^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorVector<T = C64> {
    pub weight: Weight,
    pub coeffs: Vec<T>,
}

impl<T: Coeff> TensorVector<T> {
    pub fn new(weight: Weight, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != 3 * weight.dim() {
            return domain(format!("tensor over {} needs {} coefficients", weight, 3 * weight.dim()));
        }
        Ok(TensorVector { weight, coeffs })
    }

    pub fn zero(weight: Weight, like: &T) -> Self {
        TensorVector { weight, coeffs: vec![like.zero_like(); 3 * weight.dim()] }
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.coeffs[i * self.weight.dim() + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        let n = self.weight.dim();
        &mut self.coeffs[i * n + j]
    }

    /// `s ⊗ v` for `s ∈ sym²` given by its three coefficients.
    pub fn outer(s: &[T; 3], v: &RepVector<T>) -> Self {
        let mut coeffs = Vec::with_capacity(3 * v.coeffs.len());
        for a in s {
            coeffs.extend(v.coeffs.iter().map(|b| a.clone() * b.clone()));
        }
        TensorVector { weight: v.weight, coeffs }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.weight, o.weight);
        TensorVector { weight: self.weight, coeffs: zip_with(&self.coeffs, &o.coeffs, |a, b| a + b) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.weight, o.weight);
        TensorVector { weight: self.weight, coeffs: zip_with(&self.coeffs, &o.coeffs, |a, b| a - b) }
    }

    pub fn scale(&self, s: &T) -> Self {
        TensorVector { weight: self.weight, coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect() }
    }
}

impl TensorVector<C64> {
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn zip_with<T: Clone, F: Fn(T, T) -> T>(a: &[T], b: &[T], f: F) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| f(x.clone(), y.clone())).collect()
}

fn poly_mul<T: Coeff>(a: &[T], b: &[T]) -> Vec<T> {
    let z = a[0].zero_like();
    let mut out = vec![z; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

/// Matrix of `sym^l(g)` in the monomial basis: column `j` is the image of `X^{l−j}Y^j`.
pub fn sym_matrix<T: Coeff>(l: u32, g: &Mat2<T>) -> Vec<Vec<T>> {
    let [[a, b], [c, d]] = &g.0;
    let one = a.one_like();
    // X ↦ aX + cY, Y ↦ bX + dY
    let xi = [a.clone(), c.clone()];
    let yi = [b.clone(), d.clone()];
    let mut xpow = vec![vec![one.clone()]];
    let mut ypow = vec![vec![one.clone()]];
    for _ in 0..l {
        xpow.push(poly_mul(xpow.last().unwrap(), &xi));
        ypow.push(poly_mul(ypow.last().unwrap(), &yi));
    }
    let l = l as usize;
    let mut m = vec![vec![one.zero_like(); l + 1]; l + 1];
    for j in 0..=l {
        let col = poly_mul(&xpow[l - j], &ypow[j]);
        for (i, v) in col.into_iter().enumerate() {
            m[i][j] = v;
        }
    }
    m
}

fn apply<T: Coeff>(m: &[Vec<T>], v: &[T]) -> Vec<T> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(v[0].zero_like(), |acc, (a, b)| acc + a.clone() * b.clone()))
        .collect()
}

/// `det(g)^k · sym^l(g)` applied to coefficients; no invertibility check.
pub fn weight_act_raw<T: Coeff>(w: Weight, g: &Mat2<T>, v: &[T]) -> Vec<T> {
    let det = g.det();
    let s = det.powi(w.k as i32);
    apply(&sym_matrix(w.l, g), v).into_iter().map(|x| x * s.clone()).collect()
}

/// `det(g)^k · sym^l(g) · v`.
pub fn weight_act<T: Coeff>(w: Weight, g: &Mat2<T>, v: &RepVector<T>) -> Result<RepVector<T>> {
    if v.weight != w {
        return domain(format!("vector has weight {}, expected {}", v.weight, w));
    }
    Ok(RepVector { weight: w, coeffs: weight_act_raw(w, g, &v.coeffs) })
}

/// Diagonal action on `sym² ⊗ det^k sym^l` (the `sym²` factor carries no determinant).
pub fn tensor_act<T: Coeff>(g: &Mat2<T>, t: &TensorVector<T>) -> TensorVector<T> {
    let w = t.weight;
    let n = w.dim();
    let s2 = sym_matrix(2, g);
    let rows: Vec<Vec<T>> = (0..3).map(|i| weight_act_raw(w, g, &t.coeffs[i * n..(i + 1) * n])).collect();
    let mut out = TensorVector::zero(w, &t.coeffs[0]);
    for i in 0..3 {
        for j in 0..n {
            let mut acc = t.coeffs[0].zero_like();
            for (r, row) in rows.iter().enumerate() {
                acc = acc + s2[i][r].clone() * row[j].clone();
            }
            *out.get_mut(i, j) = acc;
        }
    }
    out
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// Invariant pairing `V(det^k sym^l) × V(det^{−k−l} sym^l) → ℂ`:
/// `⟨P, Q⟩ = Σ_j (−1)^j C(l, j)^{−1} p_j q_{l−j}`.
pub fn invariant_pairing<T: Coeff>(p: &RepVector<T>, q: &RepVector<T>) -> Result<T> {
    if q.weight != p.weight.dual() {
        return domain(format!("{} is not dual to {}", q.weight, p.weight));
    }
    let l = p.weight.l;
    let mut acc = p.coeffs[0].zero_like();
    for j in 0..=l as usize {
        let c = p.coeffs[0].from_i64_like(binomial(l, j as u32)).recip();
        let term = c * p.coeffs[j].clone() * q.coeffs[l as usize - j].clone();
        acc = if j % 2 == 0 { acc + term } else { acc - term };
    }
    Ok(acc)
}

/// The symmetrization map `𝔱` on `sym² ⊗ det^k sym^l`.
///
/// Writing `sym²` in variables `A` and `sym^l` in `B`, the defining sum over
/// exchanges of one linear factor equals `(B·∇_A)(A·∇_B) − l`; hence
/// `𝔱 = ((B·∇_A)(A·∇_B) − l)/(2l)`, and `𝔱 = 0` for `l = 0`.
pub fn symmetrize_t<T: Coeff>(t: &TensorVector<T>) -> TensorVector<T> {
    let l = t.weight.l as usize;
    let z = t.coeffs[0].zero_like();
    if l == 0 {
        return TensorVector::zero(t.weight, &z);
    }
    // A·∇_B : bidegree (2, l) → (3, l−1)
    let mut mid = vec![vec![z.clone(); l]; 4];
    for i in 0..3 {
        for j in 0..=l {
            let c = t.get(i, j);
            // A_X ∂_{B_X}: B_X exponent l−j
            if j < l {
                let f = z.from_i64_like((l - j) as i64);
                mid[i][j] = mid[i][j].clone() + f * c.clone();
            }
            // A_Y ∂_{B_Y}: B_Y exponent j
            if j > 0 {
                let f = z.from_i64_like(j as i64);
                mid[i + 1][j - 1] = mid[i + 1][j - 1].clone() + f * c.clone();
            }
        }
    }
    // B·∇_A : bidegree (3, l−1) → (2, l)
    let mut out = TensorVector::zero(t.weight, &z);
    for (i, row) in mid.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if i < 3 {
                let f = z.from_i64_like((3 - i) as i64);
                *out.get_mut(i, j) = out.get(i, j).clone() + f * c.clone();
            }
            if i > 0 {
                let f = z.from_i64_like(i as i64);
                *out.get_mut(i - 1, j + 1) = out.get(i - 1, j + 1).clone() + f * c.clone();
            }
        }
    }
    let lf = z.from_i64_like(l as i64);
    let inv = z.from_i64_like(2 * l as i64).recip();
    TensorVector {
        weight: t.weight,
        coeffs: out.coeffs.iter().zip(&t.coeffs).map(|(o, s)| (o.clone() - lf.clone() * s.clone()) * inv.clone()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rand_g(rng: &mut ChaCha8Rng) -> Mat2<C64> {
        loop {
            let mut e = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let g = Mat2::new(e(), e(), e(), e());
            if g.det().norm() > 0.2 {
                return g;
            }
        }
    }

    fn rand_rat_g(rng: &mut ChaCha8Rng) -> Mat2<BigRational> {
        loop {
            let mut e = || rat(rng.gen_range(-5..=5), rng.gen_range(1..=4));
            let g = Mat2::new(e(), e(), e(), e());
            if g.det() != rat(0, 1) {
                return g;
            }
        }
    }

    #[test]
    fn action_examples() {
        let one = c(1.0, 0.0);
        let v = RepVector::new(Weight::new(1, 0), vec![one]).unwrap();
        let g = Mat2::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0));
        assert_eq!(weight_act(Weight::new(1, 0), &g, &v).unwrap().coeffs, vec![c(6.0, 0.0)]);
        let swap = Mat2::new(c(0.0, 0.0), one, one, c(0.0, 0.0));
        let x = RepVector::monomial(Weight::new(0, 1), 0, &one);
        assert_eq!(weight_act(Weight::new(0, 1), &swap, &x).unwrap().coeffs, vec![c(0.0, 0.0), one]);
        let x2 = RepVector::monomial(Weight::new(0, 2), 0, &one);
        let r = weight_act(Weight::new(0, 2), &g, &x2).unwrap();
        assert_eq!(r.coeffs, vec![c(4.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn duals() {
        assert_eq!(dual_weight(Weight::new(3, 0)), Weight::new(-3, 0));
        assert_eq!(dual_weight(Weight::new(0, 2)), Weight::new(-2, 2));
    }

    #[test]
    fn action_is_multiplicative_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let w = Weight::new(rng.gen_range(-3..=3), rng.gen_range(0..=5));
            let (g, h) = (rand_rat_g(&mut rng), rand_rat_g(&mut rng));
            let v: Vec<BigRational> = (0..w.dim()).map(|_| rat(rng.gen_range(-9..=9), rng.gen_range(1..=5))).collect();
            let lhs = weight_act_raw(w, &g.mul(&h), &v);
            let rhs = weight_act_raw(w, &g, &weight_act_raw(w, &h, &v));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn pairing_is_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let w = Weight::new(rng.gen_range(-3..=3), rng.gen_range(0..=6));
            let g = rand_g(&mut rng);
            let mut rv = |w: Weight| {
                RepVector::new(w, (0..w.dim()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
                    .unwrap()
            };
            let (p, q) = (rv(w), rv(w.dual()));
            let before = invariant_pairing(&p, &q).unwrap();
            let after =
                invariant_pairing(&weight_act(w, &g, &p).unwrap(), &weight_act(w.dual(), &g, &q).unwrap()).unwrap();
            assert!((before - after).norm() < 1e-11 * (1.0 + before.norm()));
        }
    }

    /// Literal expansion of the defining sum on a factored monomial
    /// `v1 v2 ⊗ w1 … wl` (each factor `X` or `Y`).
    fn t_oracle(v: [bool; 2], w: &[bool]) -> TensorVector<BigRational> {
        let l = w.len();
        let weight = Weight::new(0, l as u32);
        let mut out = TensorVector::zero(weight, &rat(0, 1));
        let ny = |fs: &[bool]| fs.iter().filter(|&&b| b).count();
        for jp in 0..l {
            let rest: Vec<bool> = w.iter().enumerate().filter(|(i, _)| *i != jp).map(|(_, b)| *b).collect();
            for a in 0..2 {
                let left = [w[jp], v[1 - a]];
                let mut right = rest.clone();
                right.push(v[a]);
                let e = out.get_mut(ny(&left), ny(&right));
                *e = e.clone() + rat(1, 2 * l as i64);
            }
        }
        out
    }

    #[test]
    fn t_matches_literal_expansion() {
        // XY ⊗ X
        let w = Weight::new(0, 1);
        let mut t = TensorVector::zero(w, &rat(0, 1));
        *t.get_mut(1, 0) = rat(1, 1);
        let got = symmetrize_t(&t);
        assert_eq!(got, t_oracle([false, true], &[false]));
        // ½(XY⊗X + X²⊗Y)
        assert_eq!(got.get(1, 0), &rat(1, 2));
        assert_eq!(got.get(0, 1), &rat(1, 2));
        // every factored monomial up to l = 4; the sum depends only on exponents
        for l in 1..=4usize {
            for mask in 0..(1u32 << (l + 2)) {
                let bits: Vec<bool> = (0..l + 2).map(|i| mask >> i & 1 == 1).collect();
                let v = [bits[0], bits[1]];
                let ws = &bits[2..];
                let mut t = TensorVector::zero(Weight::new(0, l as u32), &rat(0, 1));
                let i = v.iter().filter(|&&b| b).count();
                let j = ws.iter().filter(|&&b| b).count();
                *t.get_mut(i, j) = rat(1, 1);
                assert_eq!(symmetrize_t(&t), t_oracle(v, ws), "l={l} mask={mask}");
            }
        }
        let z = TensorVector::outer(&[rat(1, 1), rat(2, 1), rat(3, 1)], &RepVector::monomial(Weight::new(2, 0), 0, &rat(0, 1)));
        assert_eq!(symmetrize_t(&z), TensorVector::zero(Weight::new(2, 0), &rat(0, 1)));
    }

    #[test]
    fn t_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let w = Weight::new(rng.gen_range(-2..=2), rng.gen_range(0..=6));
            let g = rand_g(&mut rng);
            let t = TensorVector::new(
                w,
                (0..3 * w.dim()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            )
            .unwrap();
            let a = tensor_act(&g, &symmetrize_t(&t));
            let b = symmetrize_t(&tensor_act(&g, &t));
            assert!(a.sub(&b).max_abs() < 1e-10 * (1.0 + a.max_abs()));
        }
    }
}
