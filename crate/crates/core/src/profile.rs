//! The analytic part `a_t(y)` of the Fourier coefficients of the twisted Eisenstein sum.
//!
//! Unfolding the rank-2 cosets turns the coefficient into `∫_{Sym₂(ℝ)} g(x+iy) e(−tx) dx`
//! with `g(τ) = det(τ)^{−k}|det τ|^{−1}det(y)^{1/2}`. Writing both determinant powers as
//! Laplace transforms and integrating out `x` leaves, up to a constant,
//!
//! `a_t(y) = det(y)^{1/2} e^{−2π tr(ty)} ∫_0^π F_t(θ, λ(θ)) dθ`, `λ(θ) = 4π ᵗθ y θ`,
//!
//! with `q(θ) = ᵗθ adj(t) θ` and `m = k − 1`:
//! indefinite `t`: `F = q^m m! λ^{−m−1} e^{−λ s₀}` on `q > 0`, `s₀ = −det t / q`;
//! positive definite `t`: `F = Σ_i C(m,i) (det t)^{m−i} q^i i! λ^{−i−1}`;
//! negative definite `t`: `F = 0`.
//! The θ-integrand is smooth and π-periodic, so the trapezoid rule converges fast.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::eisenstein::{fourier_table, FourierIndex, Signature, TorusSpec};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{Mat2, C64};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticProfile {
    /// Eisenstein weight.
    pub k: i64,
    pub t: FourierIndex,
    pub n_theta: usize,
}

fn binom(n: i64, r: i64) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: i64) -> f64 {
    (1..=n).fold(1.0, |a, i| a * i as f64)
}

/// Taylor coefficients at `λ₀` of `λ^{−p} e^{−s₀λ}`.
fn pow_exp_taylor(l0: f64, p: i64, s0: f64, order: usize) -> Vec<f64> {
    let u: Vec<f64> = (0..=order as i64).map(|i| binom(-p, i) * l0.powi((-p - i) as i32)).collect();
    let e0 = (-s0 * l0).exp();
    let w: Vec<f64> = (0..=order as i64).map(|j| e0 * (-s0).powi(j as i32) / factorial(j)).collect();
    (0..=order).map(|n| (0..=n).map(|i| u[i] * w[n - i]).sum()).collect()
}

impl AnalyticProfile {
    pub fn new(k: i64, t: FourierIndex, n_theta: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::Domain(format!("profile weight must be ≥ 1, got {k}")));
        }
        if t.signature() == Signature::Degenerate {
            return Err(Error::Domain(format!("analytic profile needs nondegenerate t, got {t}")));
        }
        if n_theta < 8 || n_theta % 2 != 0 {
            return Err(Error::Config(format!("n_theta must be even and ≥ 8, got {n_theta}")));
        }
        Ok(AnalyticProfile { k, t, n_theta })
    }

    /// `a_t(y)` on jets of `(y1, v, y2)`, using every `stride`-th quadrature node.
    pub fn eval_jet_stride(&self, y1: &Jet, v: &Jet, y2: &Jet, stride: usize) -> Jet {
        let order = y1.order();
        let zero = Jet::constant(C64::new(0.0, 0.0), order);
        let sig = self.t.signature();
        if sig == Signature::NegativeDefinite {
            return zero;
        }
        let [t11, t12, t22] = self.t.entries();
        let det_t = t11 * t22 - t12 * t12;
        let m = self.k - 1;
        let h = PI / self.n_theta as f64 * stride as f64;
        let mut acc = zero;
        for j in (0..self.n_theta).step_by(stride) {
            let th = PI * j as f64 / self.n_theta as f64;
            let (c, s) = (th.cos(), th.sin());
            // adj(t) = (t22 −t12; −t12 t11)
            let q = t22 * c * c - 2.0 * t12 * c * s + t11 * s * s;
            let lam = (y1.scale(C64::new(c * c, 0.0)) + v.scale(C64::new(2.0 * c * s, 0.0)) + y2.scale(C64::new(s * s, 0.0)))
                .scale(C64::new(4.0 * PI, 0.0));
            let l0 = lam.value().re;
            let coeffs: Vec<f64> = match sig {
                Signature::Indefinite => {
                    if q <= 0.0 {
                        continue;
                    }
                    let s0 = -det_t / q;
                    if s0 * l0 > 700.0 {
                        continue;
                    }
                    pow_exp_taylor(l0, m + 1, s0, order).into_iter().map(|a| a * q.powi(m as i32) * factorial(m)).collect()
                }
                _ => {
                    let mut sum = vec![0.0; order + 1];
                    for i in 0..=m {
                        let c_i = binom(m, i) * det_t.powi((m - i) as i32) * q.powi(i as i32) * factorial(i);
                        for (a, b) in sum.iter_mut().zip(pow_exp_taylor(l0, i + 1, 0.0, order)) {
                            *a += c_i * b;
                        }
                    }
                    sum
                }
            };
            let a: Vec<C64> = coeffs.iter().map(|&x| C64::new(x * h, 0.0)).collect();
            acc = acc + lam.series(&a);
        }
        let det = y1.clone() * y2.clone() - v.clone() * v.clone();
        let tr = y1.scale(C64::new(t11, 0.0)) + v.scale(C64::new(2.0 * t12, 0.0)) + y2.scale(C64::new(t22, 0.0));
        det.sqrt() * tr.scale(C64::new(-2.0 * PI, 0.0)).exp() * acc
    }

    pub fn eval_jet(&self, y1: &Jet, v: &Jet, y2: &Jet) -> Jet {
        self.eval_jet_stride(y1, v, y2, 1)
    }

    /// Value and a step-halving error estimate at a point.
    pub fn value(&self, y: &Mat2<f64>) -> (C64, f64) {
        let c = |x: f64| Jet::constant(C64::new(x, 0.0), 0);
        let (a, b, d) = (c(y.0[0][0]), c(y.0[0][1]), c(y.0[1][1]));
        let full = self.eval_jet(&a, &b, &d).value();
        let half = self.eval_jet_stride(&a, &b, &d, 2).value();
        (full, (full - half).norm())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn nodes(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64).collect()
    }

    fn fixed(x: f64) -> Axis {
        Axis { lo: x, hi: x, n: 1 }
    }

    /// Quadratic and linear Lagrange weights `(node, w_quad, w_lin)` at `x`.
    fn weights(&self, x: f64) -> Result<Vec<(usize, f64, f64)>> {
        let nodes = self.nodes();
        let tol = 1e-12 * (1.0 + x.abs());
        if self.n == 1 {
            if (x - self.lo).abs() > tol {
                return Err(Error::Domain(format!("{x} is off the fixed grid value {}", self.lo)));
            }
            return Ok(vec![(0, 1.0, 1.0)]);
        }
        if x < self.lo - tol || x > self.hi + tol {
            return Err(Error::Domain(format!("{x} lies outside the grid [{}, {}]", self.lo, self.hi)));
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        let cell = (((x - self.lo) / step).floor() as usize).min(self.n - 2);
        let lin_t = (x - nodes[cell]) / step;
        let mut out = vec![(cell, 0.0, 1.0 - lin_t), (cell + 1, 0.0, lin_t)];
        if self.n >= 3 {
            let start = if cell + 2 < self.n { cell } else { cell - 1 };
            let idx = [start, start + 1, start + 2];
            for &i in &idx {
                let w: f64 = idx.iter().filter(|&&j| j != i).map(|&j| (x - nodes[j]) / (nodes[i] - nodes[j])).product();
                match out.iter_mut().find(|e| e.0 == i) {
                    Some(e) => e.1 = w,
                    None => out.push((i, w, 0.0)),
                }
            }
        } else {
            out.iter_mut().for_each(|e| e.1 = e.2);
        }
        Ok(out)
    }
}

/// Grid of `y` values: a ray `y = s·I₂` or a box in `(y1, v, y2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum GridSpec {
    Ray(Axis),
    Box { y1: Axis, v: Axis, y2: Axis },
}

impl GridSpec {
    pub fn single(y: &Mat2<f64>) -> GridSpec {
        GridSpec::Box { y1: Axis::fixed(y.0[0][0]), v: Axis::fixed(y.0[0][1]), y2: Axis::fixed(y.0[1][1]) }
    }

    pub fn points(&self) -> Vec<Mat2<f64>> {
        match self {
            GridSpec::Ray(s) => s.nodes().into_iter().map(|s| Mat2::new(s, 0.0, 0.0, s)).collect(),
            GridSpec::Box { y1, v, y2 } => {
                let mut out = Vec::new();
                for a in y1.nodes() {
                    for b in v.nodes() {
                        for c in y2.nodes() {
                            out.push(Mat2::new(a, b, b, c));
                        }
                    }
                }
                out
            }
        }
    }

    /// Every point must have smallest eigenvalue ≥ `margin`.
    pub fn validate(&self, margin: f64) -> Result<()> {
        for y in self.points() {
            let (tr, det) = (y.trace(), y.det());
            let lmin = tr / 2.0 - ((tr / 2.0).powi(2) - det).max(0.0).sqrt();
            if !(lmin >= margin) {
                return Err(Error::Domain(format!(
                    "grid point (y1, v, y2) = ({}, {}, {}) is within {margin} of the cone boundary",
                    y.0[0][0], y.0[0][1], y.0[1][1]
                )));
            }
        }
        Ok(())
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// `s=lo:hi:n` for a ray, or `y1=lo:hi:n,v=lo:hi:n,y2=lo:hi:n` (a bare number fixes an axis).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse grid '{s}'"));
        let axis = |t: &str| -> Result<Axis> {
            let p: Vec<&str> = t.split(':').collect();
            let f = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
            match p.len() {
                1 => Ok(Axis::fixed(f(p[0])?)),
                3 => {
                    let n = p[2].trim().parse::<usize>().map_err(|_| bad())?;
                    let (lo, hi) = (f(p[0])?, f(p[1])?);
                    if n == 0 || (n > 1 && !(hi > lo)) {
                        return Err(bad());
                    }
                    Ok(Axis { lo, hi, n })
                }
                _ => Err(bad()),
            }
        };
        let mut parts = std::collections::BTreeMap::new();
        for kv in s.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            if parts.insert(k.trim().to_string(), axis(v)?).is_some() {
                return Err(bad());
            }
        }
        match (parts.len(), parts.get("s"), parts.get("y1"), parts.get("v"), parts.get("y2")) {
            (1, Some(a), ..) => Ok(GridSpec::Ray(*a)),
            (3, None, Some(a), Some(b), Some(c)) => Ok(GridSpec::Box { y1: *a, v: *b, y2: *c }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = |x: &Axis| if x.n == 1 { format!("{}", x.lo) } else { format!("{}:{}:{}", x.lo, x.hi, x.n) };
        match self {
            GridSpec::Ray(s) => write!(f, "s={}", a(s)),
            GridSpec::Box { y1, v, y2 } => write!(f, "y1={},v={},y2={}", a(y1), a(v), a(y2)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileSample {
    pub y: [f64; 3],
    pub value: C64,
    pub err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub enum ProfileMethod {
    Torus(TorusSpec),
    Analytic { n_theta: usize },
}

/// Tabulated values of a Fourier coefficient on a grid of `y`.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientProfile {
    pub k: i64,
    pub t: FourierIndex,
    pub grid: GridSpec,
    pub method: ProfileMethod,
    pub samples: Vec<ProfileSample>,
}

/// Smallest eigenvalue allowed on profile grids.
pub const CONE_MARGIN: f64 = 0.05;

/// Samples `∫ E(x+iy) e(−tx) dx` on the grid by torus extraction.
pub fn build_profile(spec: TorusSpec, t: FourierIndex, grid: GridSpec) -> Result<CoefficientProfile> {
    grid.validate(CONE_MARGIN)?;
    let samples = grid
        .points()
        .iter()
        .map(|y| {
            let r = fourier_table(spec, &[t], y)?.remove(0);
            Ok(ProfileSample { y: r.y, value: r.value, err: r.err })
        })
        .collect::<Result<_>>()?;
    Ok(CoefficientProfile { k: spec.k, t, grid, method: ProfileMethod::Torus(spec), samples })
}

/// Samples the analytic part on the grid.
pub fn analytic_profile(p: &AnalyticProfile, grid: GridSpec) -> Result<CoefficientProfile> {
    grid.validate(CONE_MARGIN)?;
    let samples = grid
        .points()
        .iter()
        .map(|y| {
            let (value, err) = p.value(y);
            ProfileSample { y: [y.0[0][0], y.0[0][1], y.0[1][1]], value, err }
        })
        .collect();
    Ok(CoefficientProfile { k: p.k, t: p.t, grid, method: ProfileMethod::Analytic { n_theta: p.n_theta }, samples })
}

impl CoefficientProfile {
    /// Tensor quadratic interpolation; the error adds `|quadratic − linear|` and the
    /// weighted sample errors.
    pub fn interpolate(&self, y: &Mat2<f64>) -> Result<(C64, f64)> {
        let (axes, coords): (Vec<Axis>, Vec<f64>) = match self.grid {
            GridSpec::Ray(s) => {
                if y.0[0][1] != 0.0 || y.0[0][0] != y.0[1][1] {
                    return Err(Error::Domain("ray profile only covers y = s·I₂".into()));
                }
                (vec![s], vec![y.0[0][0]])
            }
            GridSpec::Box { y1, v, y2 } => (vec![y1, v, y2], vec![y.0[0][0], y.0[0][1], y.0[1][1]]),
        };
        let w: Vec<Vec<(usize, f64, f64)>> = axes.iter().zip(&coords).map(|(a, &x)| a.weights(x)).collect::<Result<_>>()?;
        let dims: Vec<usize> = axes.iter().map(|a| a.n).collect();
        let flat = |idx: &[usize]| idx.iter().zip(&dims).fold(0, |acc, (i, n)| acc * n + i);
        let (mut quad, mut lin, mut err) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), 0.0);
        let mut stack = vec![(Vec::new(), 1.0, 1.0)];
        for wa in &w {
            let mut next = Vec::new();
            for (idx, q, l) in &stack {
                for &(i, wq, wl) in wa {
                    let mut id = idx.clone();
                    id.push(i);
                    next.push((id, q * wq, l * wl));
                }
            }
            stack = next;
        }
        for (idx, q, l) in stack {
            let s = &self.samples[flat(&idx)];
            quad += s.value * q;
            lin += s.value * l;
            err += q.abs() * s.err;
        }
        Ok((quad, err + (quad - lin).norm()))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t11,t12,t22,y1,v,y2,re,im,err")?;
        let [a, b, c] = self.t.entries();
        for s in &self.samples {
            writeln!(w, "{a},{b},{c},{},{},{},{:.17e},{:.17e},{:.6e}", s.y[0], s.y[1], s.y[2], s.value.re, s.value.im, s.err)?;
        }
        Ok(())
    }
}

/// Mean of `torus / analytic` over the common grid and the relative spread of the ratios.
pub fn fit_scale(torus: &CoefficientProfile, analytic: &CoefficientProfile) -> Result<(C64, f64)> {
    if torus.samples.len() != analytic.samples.len() || torus.samples.is_empty() {
        return Err(Error::Domain("profiles must share a nonempty grid".into()));
    }
    let r: Vec<C64> = torus.samples.iter().zip(&analytic.samples).map(|(a, b)| a.value / b.value).collect();
    let mean = r.iter().sum::<C64>() / r.len() as f64;
    let spread = r.iter().map(|z| (z - mean).norm()).fold(0.0, f64::max) / mean.norm();
    Ok((mean, spread))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t_ind() -> FourierIndex {
        FourierIndex::new(0, 1, 0)
    }

    #[test]
    fn grid_parsing_and_validation() {
        let g: GridSpec = "s=1:3:5".parse().unwrap();
        assert_eq!(g.points().len(), 5);
        assert_eq!(g.to_string(), "s=1:3:5");
        let b: GridSpec = "y1=0.8:1.2:3,v=0.1,y2=1:2:2".parse().unwrap();
        assert_eq!(b.points().len(), 6);
        assert!("s=1:3".parse::<GridSpec>().is_err());
        assert!("s=3:1:4".parse::<GridSpec>().is_err());
        assert!("y1=1,v=0".parse::<GridSpec>().is_err());
        let edge: GridSpec = "y1=1,v=0.99,y2=1".parse().unwrap();
        assert!(edge.validate(CONE_MARGIN).is_err());
    }

    #[test]
    fn negative_definite_vanishes_and_quadrature_converges() {
        let y = Mat2::new(1.2, 0.1, 0.1, 0.9);
        let nd = AnalyticProfile::new(5, FourierIndex::new(-1, 1, -2), 64).unwrap();
        assert_eq!(nd.value(&y).0, C64::new(0.0, 0.0));
        for t in [t_ind(), FourierIndex::new(1, 1, -1), FourierIndex::new(1, 0, 1)] {
            let a = AnalyticProfile::new(5, t, 256).unwrap().value(&y);
            let b = AnalyticProfile::new(5, t, 512).unwrap().value(&y);
            assert!((a.0 - b.0).norm() <= 1e-10 * a.0.norm(), "{t}: {a:?} {b:?}");
            assert!(a.1 <= 1e-6 * a.0.norm(), "{t}: {a:?}");
        }
        assert!(AnalyticProfile::new(5, FourierIndex::new(1, 2, 1), 64).is_err());
    }

    #[test]
    fn jets_match_values() {
        let p = AnalyticProfile::new(2, FourierIndex::new(1, 1, -1), 128).unwrap();
        let base = [1.1, 0.2, 0.9];
        let j = |i: usize| Jet::variable(base[i], crate::jet::Y1 + i, 1);
        let jet = p.eval_jet(&j(0), &j(1), &j(2));
        let h = 1e-5;
        for i in 0..3 {
            let mut a = base;
            let mut b = base;
            a[i] += h;
            b[i] -= h;
            let f = |c: [f64; 3]| p.value(&Mat2::new(c[0], c[1], c[1], c[2])).0;
            let fd = (f(a) - f(b)) / (2.0 * h);
            let ad = jet.partial(crate::jet::Y1 + i).value();
            assert!((fd - ad).norm() < 1e-7 * ad.norm().max(1e-12), "{i}: {fd} {ad}");
        }
    }

    #[test]
    fn torus_matches_analytic_shape() {
        let spec = TorusSpec::new(10, 12, 3).unwrap();
        let grid: GridSpec = "y1=0.9:1.3:3,v=0.1,y2=1.0".parse().unwrap();
        for t in [t_ind(), FourierIndex::new(1, 1, 1)] {
            let torus = build_profile(spec, t, grid).unwrap();
            let ana = analytic_profile(&AnalyticProfile::new(10, t, 256).unwrap(), grid).unwrap();
            let (_, spread) = fit_scale(&torus, &ana).unwrap();
            assert!(spread < 1e-6, "{t}: spread {spread}");
        }
    }

    #[test]
    fn interpolation_refines() {
        let p = AnalyticProfile::new(5, t_ind(), 128).unwrap();
        let prof = analytic_profile(&p, "s=1:2:11".parse().unwrap()).unwrap();
        let y = Mat2::new(1.45, 0.0, 0.0, 1.45);
        let (v, err) = prof.interpolate(&y).unwrap();
        let direct = p.value(&y).0;
        assert!((v - direct).norm() <= err, "{v} {direct} {err}");
        let single = analytic_profile(&p, GridSpec::single(&y)).unwrap();
        assert_eq!(single.samples[0].value, direct);
        assert!(prof.interpolate(&Mat2::new(2.5, 0.0, 0.0, 2.5)).is_err());
    }
}
