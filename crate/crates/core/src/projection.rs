//! Clebsch–Gordan projections of `sym² ⊗ sym^l` onto `sym^{l+2}`, `det·sym^l` and `det²·sym^{l−2}`.
//!
//! Each component is embedded by sending `X^m` to its highest-weight vector and
//! lowering with `F = Y∂_X`. Projections are orthogonal for the Fischer inner
//! product `‖X^aY^b‖² = a!b!/(a+b)!`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_rational::BigRational;
use num_traits::Zero;
use once_cell::sync::Lazy;
use serde::Serialize;

use crate::gl2::{tensor_act, weight_act_raw, RepVector, TensorVector, Weight};
use crate::scalar::{rat, rat_to_f64, Coeff, Mat2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Direction {
    L,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Component {
    Plus,
    Zero,
    Minus,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Plus, Component::Zero, Component::Minus];

    /// Number of `Y`-steps of the highest-weight vector; the component is `det^r sym^{l+2−2r}`.
    pub fn r(self) -> u32 {
        match self {
            Component::Plus => 0,
            Component::Zero => 1,
            Component::Minus => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Component::Plus => "+",
            Component::Zero => "0",
            Component::Minus => "-",
        }
    }
}

impl Direction {
    /// Determinant shift of the operator target relative to `sym² ⊗ σ`.
    pub fn det_shift(self) -> i64 {
        match self {
            Direction::L => -2,
            Direction::R => 0,
        }
    }
}

/// Weight of `π_{dir,comp}` applied to the operator target of `σ`, or `None` if absent.
pub fn target_weight(sigma: Weight, dir: Direction, comp: Component) -> Option<Weight> {
    let r = comp.r();
    if r > sigma.l {
        return None;
    }
    Some(Weight::new(sigma.k + r as i64 + dir.det_shift(), sigma.l + 2 - 2 * r))
}

type RatMat = Vec<Vec<BigRational>>;

fn factorial(n: u32) -> BigRational {
    (1..=n as i64).fold(rat(1, 1), |acc, i| acc * rat(i, 1))
}

/// `‖X^{n−j}Y^j‖²`.
pub fn fischer_norm(n: u32, j: u32) -> BigRational {
    factorial(n - j) * factorial(j) / factorial(n)
}

/// Diagonal of the Fischer Gram matrix on `sym² ⊗ sym^l` (row-major tensor index).
pub fn tensor_gram(l: u32) -> Vec<BigRational> {
    let mut g = Vec::new();
    for i in 0..3 {
        for j in 0..=l {
            g.push(fischer_norm(2, i) * fischer_norm(l, j));
        }
    }
    g
}

/// `F = Y∂_X` acting on `sym² ⊗ sym^l` by the Leibniz rule.
pub fn lower_tensor<T: Coeff>(l: u32, v: &[T]) -> Vec<T> {
    let n = l as usize + 1;
    let z = v[0].zero_like();
    let mut out = vec![z.clone(); v.len()];
    for i in 0..3 {
        for j in 0..n {
            let c = &v[i * n + j];
            if i < 2 {
                out[(i + 1) * n + j] = out[(i + 1) * n + j].clone() + z.from_i64_like(2 - i as i64) * c.clone();
            }
            if j + 1 < n {
                out[i * n + j + 1] = out[i * n + j + 1].clone() + z.from_i64_like((l as usize - j) as i64) * c.clone();
            }
        }
    }
    out
}

#[derive(Debug)]
struct ComponentData {
    /// `3(l+1) × (m+1)`
    iota: RatMat,
    /// `(m+1) × 3(l+1)`
    pi: RatMat,
    pi_f64: Vec<Vec<f64>>,
    iota_f64: Vec<Vec<f64>>,
}

/// Exact tables for one `l`; independent of `k` and of the direction.
#[derive(Debug)]
pub struct ExactTable {
    pub l: u32,
    comps: [Option<ComponentData>; 3],
}

impl ExactTable {
    fn build(l: u32) -> Self {
        let comps = Component::ALL.map(|c| (c.r() <= l).then(|| Self::component(l, c.r())));
        ExactTable { l, comps }
    }

    fn component(l: u32, r: u32) -> ComponentData {
        let n = l as usize + 1;
        let dim = 3 * n;
        let m = l + 2 - 2 * r;
        // highest weight: x_0 = 1 at (0, r), x_{i+1} = −(r−i)/(i+1)·x_i at (i+1, r−i−1)
        let mut hw = vec![rat(0, 1); dim];
        let mut x = rat(1, 1);
        for i in 0..=r.min(2) {
            hw[i as usize * n + (r - i) as usize] = x.clone();
            x = -x * rat((r - i) as i64, (i + 1) as i64);
        }
        // ι(X^{m−s}Y^s) = (m−s)!/m! · F^s(hw)
        let mut cols = vec![hw];
        for _ in 1..=m {
            let next = lower_tensor(l, cols.last().unwrap());
            cols.push(next);
        }
        for (s, col) in cols.iter_mut().enumerate() {
            let fix = factorial(m - s as u32) / factorial(m);
            col.iter_mut().for_each(|v| *v = v.clone() * fix.clone());
        }
        let iota: RatMat = (0..dim).map(|row| cols.iter().map(|c| c[row].clone()).collect()).collect();
        let gram = tensor_gram(l);
        let pi: RatMat = cols
            .iter()
            .map(|c| {
                let d: BigRational = c.iter().zip(&gram).map(|(a, g)| a * a * g).fold(BigRational::zero(), |s, x| s + x);
                c.iter().zip(&gram).map(|(a, g)| a * g / &d).collect()
            })
            .collect();
        let to_f = |m: &RatMat| m.iter().map(|r| r.iter().map(rat_to_f64).collect()).collect();
        ComponentData { pi_f64: to_f(&pi), iota_f64: to_f(&iota), iota, pi }
    }

    pub fn has(&self, c: Component) -> bool {
        self.comps[c.r() as usize].is_some()
    }

    pub fn pi_exact(&self, c: Component) -> Option<&RatMat> {
        self.comps[c.r() as usize].as_ref().map(|d| &d.pi)
    }

    pub fn iota_exact(&self, c: Component) -> Option<&RatMat> {
        self.comps[c.r() as usize].as_ref().map(|d| &d.iota)
    }

    pub fn pi_f64(&self, c: Component) -> Option<&Vec<Vec<f64>>> {
        self.comps[c.r() as usize].as_ref().map(|d| &d.pi_f64)
    }

    pub fn iota_f64(&self, c: Component) -> Option<&Vec<Vec<f64>>> {
        self.comps[c.r() as usize].as_ref().map(|d| &d.iota_f64)
    }
}

static CACHE: Lazy<Mutex<HashMap<u32, Arc<ExactTable>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

pub fn exact_table(l: u32) -> Arc<ExactTable> {
    let mut cache = CACHE.lock().expect("projection cache poisoned");
    cache.entry(l).or_insert_with(|| Arc::new(ExactTable::build(l))).clone()
}

/// Projections for the operator targets of a fixed weight `σ`.
#[derive(Clone, Debug)]
pub struct ProjectionTable {
    pub weight: Weight,
    table: Arc<ExactTable>,
}

pub fn build_projection_table(sigma: Weight) -> ProjectionTable {
    ProjectionTable { weight: sigma, table: exact_table(sigma.l) }
}

fn matvec<T: Coeff>(m: &[Vec<f64>], v: &[T], z: &T) -> Vec<T> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .filter(|(a, _)| **a != 0.0)
                .fold(z.clone(), |acc, (a, b)| acc + z.from_f64_like(*a) * b.clone())
        })
        .collect()
}

impl ProjectionTable {
    pub fn exact(&self) -> &ExactTable {
        &self.table
    }

    /// `π_{dir,comp}(w)`; a zero vector of the degenerate target when the component is absent.
    pub fn project<T: Coeff>(&self, dir: Direction, comp: Component, w: &TensorVector<T>) -> RepVector<T> {
        assert_eq!(w.weight, self.weight, "tensor weight does not match table");
        let z = w.coeffs[0].zero_like();
        match (target_weight(self.weight, dir, comp), self.table.pi_f64(comp)) {
            (Some(tw), Some(pi)) => RepVector { weight: tw, coeffs: matvec(pi, &w.coeffs, &z) },
            _ => {
                let r = comp.r() as i64;
                let l = (self.weight.l as i64 + 2 - 2 * r).max(0) as u32;
                RepVector::zero(Weight::new(self.weight.k + r + dir.det_shift(), l), &z)
            }
        }
    }

    /// Embedding of a component back into the operator target.
    pub fn embed<T: Coeff>(&self, comp: Component, v: &RepVector<T>) -> TensorVector<T> {
        let z = v.coeffs[0].zero_like();
        match self.table.iota_f64(comp) {
            Some(iota) => TensorVector { weight: self.weight, coeffs: matvec(iota, &v.coeffs, &z) },
            None => TensorVector::zero(self.weight, &z),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut mats = serde_json::Map::new();
        for dir in [Direction::L, Direction::R] {
            for comp in Component::ALL {
                let name = format!("pi_{:?}{}", dir, comp.symbol());
                let entry = match (target_weight(self.weight, dir, comp), self.table.pi_f64(comp)) {
                    (Some(tw), Some(m)) => serde_json::json!({ "target": tw, "matrix": m }),
                    _ => serde_json::Value::Null,
                };
                mats.insert(name, entry);
            }
        }
        serde_json::json!({ "weight": self.weight, "projections": mats })
    }
}

fn rmul(a: &RatMat, b: &RatMat) -> RatMat {
    (0..a.len())
        .map(|i| {
            (0..b[0].len())
                .map(|j| (0..b.len()).fold(rat(0, 1), |s, k| s + &a[i][k] * &b[k][j]))
                .collect()
        })
        .collect()
}

fn ident(n: usize) -> RatMat {
    (0..n).map(|i| (0..n).map(|j| rat((i == j) as i64, 1)).collect()).collect()
}

fn add(a: &RatMat, b: &RatMat) -> RatMat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect()).collect()
}

/// Casimir `EF + FE + H²/2` on `sym² ⊗ sym^l`, exact.
fn casimir(l: u32) -> RatMat {
    let n = l as usize + 1;
    let dim = 3 * n;
    let raise = |v: &[BigRational]| -> Vec<BigRational> {
        let mut out = vec![rat(0, 1); dim];
        for i in 0..3 {
            for j in 0..n {
                let c = &v[i * n + j];
                if i > 0 {
                    out[(i - 1) * n + j] += c * rat(i as i64, 1);
                }
                if j > 0 {
                    out[i * n + j - 1] += c * rat(j as i64, 1);
                }
            }
        }
        out
    };
    let h = |v: &[BigRational]| -> Vec<BigRational> {
        (0..dim).map(|idx| &v[idx] * rat(2 + l as i64 - 2 * (idx / n + idx % n) as i64, 1)).collect()
    };
    let cols: Vec<Vec<BigRational>> = (0..dim)
        .map(|e| {
            let mut v = vec![rat(0, 1); dim];
            v[e] = rat(1, 1);
            let ef = raise(&lower_tensor(l, &v));
            let fe = lower_tensor(l, &raise(&v));
            let hh = h(&h(&v));
            (0..dim).map(|i| &ef[i] + &fe[i] + &hh[i] * rat(1, 2)).collect()
        })
        .collect();
    (0..dim).map(|i| (0..dim).map(|j| cols[j][i].clone()).collect()).collect()
}

/// `π_c ι_{c'} = δ_{cc'}` and `Σ ι_c π_c = 1` on `sym² ⊗ sym^l`, in exact arithmetic.
pub fn completeness_holds(l: u32) -> bool {
    let t = exact_table(l);
    let n = 3 * (l as usize + 1);
    let mut sum: RatMat = vec![vec![rat(0, 1); n]; n];
    for c in Component::ALL {
        let Some(iota) = t.iota_exact(c) else { continue };
        sum = add(&sum, &rmul(iota, t.pi_exact(c).expect("present")));
        for c2 in Component::ALL {
            let Some(pi2) = t.pi_exact(c2) else { continue };
            let prod = rmul(pi2, iota);
            let expect = if c == c2 { ident(prod.len()) } else { vec![vec![rat(0, 1); prod[0].len()]; prod.len()] };
            if prod != expect {
                return false;
            }
        }
    }
    sum == ident(n)
}

/// `π_c(g·w) = g·π_c(w)` for every present component, exactly, with `g` rational.
pub fn equivariance_holds_exact(l: u32, g: &Mat2<BigRational>, w: &[BigRational]) -> bool {
    let t = exact_table(l);
    let sigma = Weight::new(0, l);
    let Ok(w) = TensorVector::new(sigma, w.to_vec()) else { return false };
    let gw = tensor_act(g, &w);
    let apply = |m: &RatMat, v: &[BigRational]| -> Vec<BigRational> {
        m.iter().map(|r| r.iter().zip(v).fold(rat(0, 1), |s, (a, b)| s + a * b)).collect()
    };
    Component::ALL.into_iter().filter(|c| t.has(*c)).all(|c| {
        let pi = t.pi_exact(c).expect("present");
        let tw = target_weight(sigma, Direction::R, c).expect("present");
        apply(pi, &gw.coeffs) == weight_act_raw(tw, g, &apply(pi, &w.coeffs))
    })
}

/// Largest deviation of `ι_c π_c` from an independent float construction: the null space of
/// `Casimir − λ_c` by SVD, orthonormalized in the Fischer inner product.
pub fn gram_oracle_deviation(l: u32) -> f64 {
    use nalgebra::DMatrix;
    let t = exact_table(l);
    let gram: Vec<f64> = tensor_gram(l).iter().map(rat_to_f64).collect();
    let dim = gram.len();
    let cas = casimir(l);
    let ip = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&gram).map(|((x, y), g)| x * y * g).sum::<f64>();
    let mut worst = 0.0f64;
    for c in Component::ALL {
        if !t.has(c) {
            continue;
        }
        let m = (l + 2 - 2 * c.r()) as f64;
        let lam = m * (m + 2.0) / 2.0;
        let a = DMatrix::from_fn(dim, dim, |i, j| rat_to_f64(&cas[i][j]) - if i == j { lam } else { 0.0 });
        let svd = a.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for (k, sv) in svd.singular_values.iter().enumerate() {
            if *sv > 1e-8 {
                continue;
            }
            let mut v: Vec<f64> = vt.row(k).iter().copied().collect();
            for b in &basis {
                let p = ip(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
            let nrm = ip(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= nrm);
            basis.push(v);
        }
        if basis.len() != m as usize + 1 {
            return f64::INFINITY;
        }
        let (iota, pi) = (t.iota_f64(c).expect("present"), t.pi_f64(c).expect("present"));
        for i in 0..dim {
            for j in 0..dim {
                let p: f64 = basis.iter().map(|b| b[i] * b[j] * gram[j]).sum();
                let q: f64 = (0..basis.len()).map(|s| iota[i][s] * pi[s][j]).sum();
                worst = worst.max((p - q).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn completeness_and_orthogonality_exact() {
        for l in 0..=12 {
            assert!(completeness_holds(l), "l={l}");
        }
    }

    #[test]
    fn exact_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for l in [0u32, 1, 4, 12] {
            let r = |rng: &mut ChaCha8Rng| rat(rng.gen_range(-5..=5), rng.gen_range(1..=4));
            let g = Mat2::new(rat(2, 1), rat(-1, 3), rat(1, 2), rat(3, 1));
            let w: Vec<BigRational> = (0..3 * (l as usize + 1)).map(|_| r(&mut rng)).collect();
            assert!(equivariance_holds_exact(l, &g, &w), "l={l}");
        }
    }

    #[test]
    fn degenerate_components() {
        let t = build_projection_table(Weight::new(3, 0));
        assert!(t.exact().has(Component::Plus));
        assert!(!t.exact().has(Component::Zero) && !t.exact().has(Component::Minus));
        let w = TensorVector::new(Weight::new(3, 0), vec![C64::new(1.0, 0.0); 3]).unwrap();
        let p = t.project(Direction::L, Component::Minus, &w);
        assert!(p.coeffs.iter().all(|z| z.norm() == 0.0));
        assert_eq!(t.project(Direction::R, Component::Plus, &w).weight, Weight::new(3, 2));
    }

    #[test]
    fn highest_weight_normalization() {
        let t = build_projection_table(Weight::new(0, 2));
        let mut w = TensorVector::zero(Weight::new(0, 2), &C64::new(0.0, 0.0));
        *w.get_mut(0, 0) = C64::new(1.0, 0.0);
        let p = t.project(Direction::R, Component::Plus, &w);
        assert_eq!(p.weight, Weight::new(0, 4));
        assert_eq!(p.coeffs[0], C64::new(1.0, 0.0));
        assert!(p.coeffs[1..].iter().all(|z| z.norm() == 0.0));
        assert!(t.project(Direction::R, Component::Minus, &w).max_abs() == 0.0);
        // embed a highest weight of each component and recover it
        for c in Component::ALL {
            let tw = target_weight(t.weight, Direction::L, c).unwrap();
            let v = RepVector::monomial(tw, 0, &C64::new(0.0, 0.0));
            let back = t.project(Direction::L, c, &t.embed(c, &v));
            assert!((back.coeffs[0] - 1.0).norm() < 1e-15);
            for c2 in Component::ALL {
                if c2 != c {
                    assert!(t.project(Direction::L, c2, &t.embed(c, &v)).max_abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn casimir_projectors_agree_exactly() {
        for l in 0..=6u32 {
            let t = exact_table(l);
            let cas = casimir(l);
            let dim = cas.len();
            let present: Vec<Component> = Component::ALL.into_iter().filter(|c| t.has(*c)).collect();
            let eig = |c: Component| {
                let m = (l + 2 - 2 * c.r()) as i64;
                rat(m * (m + 2), 2)
            };
            for &c in &present {
                let mut p = ident(dim);
                for &c2 in &present {
                    if c2 == c {
                        continue;
                    }
                    let shifted: RatMat = cas
                        .iter()
                        .enumerate()
                        .map(|(i, r)| r.iter().enumerate().map(|(j, x)| if i == j { x - eig(c2) } else { x.clone() }).collect())
                        .collect();
                    let scale = (eig(c) - eig(c2)).recip();
                    let factor: RatMat = shifted.iter().map(|r| r.iter().map(|x| x * &scale).collect()).collect();
                    p = rmul(&p, &factor);
                }
                assert_eq!(rmul(t.iota_exact(c).unwrap(), t.pi_exact(c).unwrap()), p, "l={l} {c:?}");
            }
        }
    }

    #[test]
    fn gram_schmidt_oracle() {
        for l in [0u32, 1, 2, 5, 12] {
            assert!(gram_oracle_deviation(l) < 1e-12, "l={l}");
        }
    }

    #[test]
    fn projections_are_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let sigma = Weight::new(rng.gen_range(-3..=3), rng.gen_range(0..=6));
            let table = build_projection_table(sigma);
            let g = loop {
                let mut e = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let g = Mat2::new(e(), e(), e(), e());
                if g.det().norm() > 0.3 {
                    break g;
                }
            };
            let w = TensorVector::new(
                sigma,
                (0..3 * sigma.dim()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            )
            .unwrap();
            for dir in [Direction::L, Direction::R] {
                // the L target carries an extra det^{−2}
                let extra = g.det().powi(dir.det_shift() as i32);
                let gw = tensor_act(&g, &w).scale(&extra);
                for c in Component::ALL {
                    let Some(tw) = target_weight(sigma, dir, c) else { continue };
                    let lhs = table.project(dir, c, &gw);
                    let rhs = weight_act_raw(tw, &g, &table.project(dir, c, &w).coeffs);
                    let scale = 1.0 + lhs.max_abs();
                    let err = lhs.coeffs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                    assert!(err < 1e-10 * scale, "{sigma} {dir:?} {c:?}: {err}");
                }
            }
        }
    }

    #[test]
    fn json_export_lists_six_projections() {
        let j = build_projection_table(Weight::new(1, 2)).to_json();
        assert_eq!(j["projections"].as_object().unwrap().len(), 6);
        assert_eq!(j["projections"]["pi_R+"]["target"]["l"], 4);
    }
}
