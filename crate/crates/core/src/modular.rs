//! Vector-valued functions on the half space and the covariant operators acting on them.
//!
//! A [`ModularMap`] is an expression tree evaluated on jets: asking for order
//! `n` returns Taylor data of every coefficient in the local coordinates
//! `(x1, u, x2, y1, v, y2)` around the evaluation point. Exact operators consume
//! one order of their argument. Numeric operators only need values of their
//! argument and differentiate by Richardson-extrapolated central differences.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gl2::{symmetrize_t, tensor_act, weight_act_raw, TensorVector, Weight};
use crate::jet::{Jet, MAX_ORDER, NVARS, U, V, X1, X2, Y1, Y2};
use crate::projection::{build_projection_table, target_weight, Component, Direction};
use crate::scalar::{Coeff, ComplexCoeff, Mat2, C64};
use crate::symplectic::{moebius_act, moebius_generic, SiegelPoint, SymplecticMatrix};
use crate::terms::{eval_sum, SymbolicTerm};

pub type JetFn = Arc<dyn Fn(&[Jet; NVARS]) -> Result<Vec<Jet>> + Send + Sync>;
pub type PointFn = Arc<dyn Fn(&SiegelPoint) -> Result<Vec<C64>> + Send + Sync>;

/// Value space of a map: `V(σ)`, or the operator target `sym² ⊗ σ` twisted by `det^{−2}` for L.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Rep(Weight),
    Tensor { sigma: Weight, dir: Direction },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Rep(w) => w.dim(),
            Shape::Tensor { sigma, .. } => 3 * sigma.dim(),
        }
    }

    /// Representation of `g` on the value space.
    pub fn act<T: Coeff>(&self, g: &Mat2<T>, v: &[T]) -> Vec<T> {
        match *self {
            Shape::Rep(w) => weight_act_raw(w, g, v),
            Shape::Tensor { sigma, dir } => {
                let t = TensorVector { weight: sigma, coeffs: v.to_vec() };
                let s = g.det().powi(dir.det_shift() as i32);
                tensor_act(g, &t).scale(&s).coeffs
            }
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Rep(w) => write!(f, "{w}"),
            Shape::Tensor { sigma, dir: Direction::L } => write!(f, "det^-2 sym^2 ⊗ {sigma}"),
            Shape::Tensor { sigma, dir: Direction::R } => write!(f, "sym^2 ⊗ {sigma}"),
        }
    }
}

/// Step control for numeric differentiation: `h = h0·max(1, ‖y‖)`, halved per Richardson level.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StepPolicy {
    pub h0: f64,
    pub levels: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy { h0: 1e-2, levels: 3 }
    }
}

impl StepPolicy {
    pub fn new(h0: f64, levels: usize) -> Result<Self> {
        if !(h0 > 0.0 && h0.is_finite()) || levels == 0 {
            return Err(Error::Config(format!("invalid step policy h0={h0}, levels={levels}")));
        }
        Ok(StepPolicy { h0, levels })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    Exact,
    Numeric(StepPolicy),
}

enum Node {
    Terms(Vec<Vec<SymbolicTerm>>),
    Jet(JetFn),
    Point(PointFn),
    Slash(ModularMap, SymplecticMatrix),
    Lower(ModularMap, Strategy),
    Raise(ModularMap, Strategy),
    Project(ModularMap, Direction, Component),
    Linear(Vec<(C64, ModularMap)>),
}

/// An evaluable function `ℍ → V`, see the module docs.
#[derive(Clone)]
pub struct ModularMap {
    shape: Shape,
    /// `Some(t)` when the map is `g(y)·e(tx)`, which makes x-derivatives exact.
    fourier: Option<[f64; 3]>,
    node: Arc<Node>,
}

impl fmt::Debug for ModularMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &*self.node {
            Node::Terms(_) => "terms".to_string(),
            Node::Jet(_) => "jet-fn".to_string(),
            Node::Point(_) => "pointwise".to_string(),
            Node::Slash(m, _) => format!("slash({m:?})"),
            Node::Lower(m, s) => format!("L[{s:?}]({m:?})"),
            Node::Raise(m, s) => format!("R[{s:?}]({m:?})"),
            Node::Project(m, d, c) => format!("pi_{d:?}{}({m:?})", c.symbol()),
            Node::Linear(v) => format!("linear[{}]", v.len()),
        };
        write!(f, "{kind} : {}", self.shape)
    }
}

/// Coordinate jets `(x1, …, y2)` at `tau`.
pub fn coordinate_jets(tau: &SiegelPoint, order: usize) -> [Jet; NVARS] {
    let c = tau.coords();
    std::array::from_fn(|i| Jet::variable(c[i], i, order))
}

fn tau_matrix(c: &[Jet; NVARS]) -> Mat2<Jet> {
    let i = C64::new(0.0, 1.0);
    let e = |x: &Jet, y: &Jet| x.clone() + y.scale(i);
    Mat2::new(e(&c[X1], &c[Y1]), e(&c[U], &c[V]), e(&c[U], &c[V]), e(&c[X2], &c[Y2]))
}

fn y_matrix<T: Clone + Coeff>(y1: T, v: T, y2: T) -> Mat2<T> {
    Mat2::new(y1, v.clone(), v, y2)
}

/// The matrix differentials `∂_τ` and `∂_τ̄` from the six real partials.
pub fn wirtinger<T: ComplexCoeff>(p: &[T; NVARS]) -> (Mat2<T>, Mat2<T>) {
    let z = &p[0];
    let half = z.from_f64_like(0.5);
    let quarter = z.from_f64_like(0.25);
    let i = z.from_c64_like(C64::new(0.0, 1.0));
    let d = |x: &T, y: &T, s: &T, sign: &T| s.clone() * (x.clone() + sign.clone() * i.clone() * y.clone());
    let minus = z.from_i64_like(-1);
    let plus = z.one_like();
    let dt = Mat2::new(
        d(&p[X1], &p[Y1], &half, &minus),
        d(&p[U], &p[V], &quarter, &minus),
        d(&p[U], &p[V], &quarter, &minus),
        d(&p[X2], &p[Y2], &half, &minus),
    );
    let dtb = Mat2::new(
        d(&p[X1], &p[Y1], &half, &plus),
        d(&p[U], &p[V], &quarter, &plus),
        d(&p[U], &p[V], &quarter, &plus),
        d(&p[X2], &p[Y2], &half, &plus),
    );
    (dt, dtb)
}

/// Symmetric matrix to `sym²` coefficients `(X², XY, Y²)` for the lowering operator.
pub fn sym2_of_lower<T: Coeff>(s: &Mat2<T>) -> [T; 3] {
    let two = s.0[0][0].from_i64_like(2);
    [s.0[1][1].clone(), -(two * s.0[0][1].clone()), s.0[0][0].clone()]
}

/// Symmetric matrix to `sym²` coefficients for the raising operator.
pub fn sym2_of_raise<T: Coeff>(s: &Mat2<T>) -> [T; 3] {
    let two = s.0[0][0].from_i64_like(2);
    [s.0[0][0].clone(), two * s.0[0][1].clone(), s.0[1][1].clone()]
}

/// `L f = y (∂_τ̄ f) y` given partials `partials[var][j]` of the coefficients of `f`.
pub fn lower_kernel<T: ComplexCoeff>(sigma: Weight, y: &Mat2<T>, partials: &[Vec<T>; NVARS]) -> Vec<T> {
    let n = sigma.dim();
    let z = y.0[0][0].zero_like();
    let mut out = vec![z; 3 * n];
    for j in 0..n {
        let p: [T; NVARS] = std::array::from_fn(|v| partials[v][j].clone());
        let (_, dtb) = wirtinger(&p);
        let s = sym2_of_lower(&y.mul(&dtb).mul(y));
        for (i, c) in s.into_iter().enumerate() {
            out[i * n + j] = c;
        }
    }
    out
}

/// `R f = ∂_τ f − (ik/2) y⁻¹ f − (il/2) 𝔱(y⁻¹ ⊗ f)`.
pub fn raise_kernel<T: ComplexCoeff>(sigma: Weight, y: &Mat2<T>, f: &[T], partials: &[Vec<T>; NVARS]) -> Vec<T> {
    let n = sigma.dim();
    let z = y.0[0][0].zero_like();
    let i = z.from_c64_like(C64::new(0.0, 1.0));
    let yinv = sym2_of_raise(&y.inverse());
    let mut out = vec![z.clone(); 3 * n];
    for j in 0..n {
        let p: [T; NVARS] = std::array::from_fn(|v| partials[v][j].clone());
        let (dt, _) = wirtinger(&p);
        let s = sym2_of_raise(&dt);
        for r in 0..3 {
            out[r * n + j] = s[r].clone();
        }
    }
    let fv = crate::gl2::RepVector { weight: sigma, coeffs: f.to_vec() };
    let outer = TensorVector::outer(&yinv, &fv);
    let kf = i.clone() * z.from_f64_like(sigma.k as f64 / 2.0);
    let lf = i * z.from_f64_like(sigma.l as f64 / 2.0);
    let t = symmetrize_t(&outer);
    for idx in 0..3 * n {
        out[idx] = out[idx].clone() - kf.clone() * outer.coeffs[idx].clone() - lf.clone() * t.coeffs[idx].clone();
    }
    out
}

/// Richardson-extrapolated central differences of all coefficients in all six coordinates.
/// Returns the partials and a per-coordinate error estimate.
pub fn numeric_partials(f: &ModularMap, tau: &SiegelPoint, policy: &StepPolicy) -> Result<([Vec<C64>; NVARS], [f64; NVARS])> {
    let base = tau.coords();
    let ynorm = tau.y().0.iter().flatten().map(|v| v.abs()).fold(1.0, f64::max);
    let h0 = policy.h0 * ynorm;
    let dim = f.shape.dim();
    let mut out: [Vec<C64>; NVARS] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); dim]);
    let mut err = [0.0; NVARS];
    let mut value = None;
    for var in 0..NVARS {
        if var < 3 {
            if let Some(t) = f.fourier {
                let val = match &value {
                    Some(v) => v,
                    None => value.insert(f.eval(tau)?),
                };
                let mult = C64::new(0.0, 2.0 * PI * [t[0], 2.0 * t[1], t[2]][var]);
                out[var] = val.iter().map(|c| c * mult).collect();
                continue;
            }
        }
        let mut table: Vec<Vec<Vec<C64>>> = Vec::new();
        for lvl in 0..policy.levels {
            let h = h0 / (1u64 << lvl) as f64;
            let shifted = |s: f64| -> Result<Vec<C64>> {
                let mut c = base;
                c[var] += s;
                let p = SiegelPoint::from_coords(c)
                    .map_err(|_| Error::Numerical(format!("stencil leaves the half space at {c:?}"), h))?;
                f.eval(&p)
            };
            let (fp, fm) = (shifted(h)?, shifted(-h)?);
            let d: Vec<C64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let mut row = vec![d];
            for m in 1..=lvl {
                let fac = 4f64.powi(m as i32);
                let prev = &table[lvl - 1][m - 1];
                let cur = &row[m - 1];
                let next: Vec<C64> = cur.iter().zip(prev).map(|(c, p)| c + (c - p) / (fac - 1.0)).collect();
                row.push(next);
            }
            table.push(row);
        }
        let last = table.last().unwrap();
        let best = last.last().unwrap().clone();
        if last.len() >= 2 {
            let prev = &last[last.len() - 2];
            err[var] = best.iter().zip(prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        }
        out[var] = best;
    }
    Ok((out, err))
}

impl ModularMap {
    fn wrap(shape: Shape, fourier: Option<[f64; 3]>, node: Node) -> Self {
        ModularMap { shape, fourier, node: Arc::new(node) }
    }

    /// One term list per coefficient.
    pub fn from_terms(weight: Weight, comps: Vec<Vec<SymbolicTerm>>) -> Result<Self> {
        if comps.len() != weight.dim() {
            return Err(Error::Domain(format!("{weight} needs {} term lists, got {}", weight.dim(), comps.len())));
        }
        let all: Vec<&SymbolicTerm> = comps.iter().flatten().collect();
        let fourier = match all.first() {
            Some(t0) if all.iter().all(|t| t.x_exp == [0; 3] && t.t == t0.t) => Some(t0.t),
            None => Some([0.0; 3]),
            _ => None,
        };
        Ok(Self::wrap(Shape::Rep(weight), fourier, Node::Terms(comps)))
    }

    /// Scalar-weight map `det^k` from a term list.
    pub fn scalar(k: i64, terms: Vec<SymbolicTerm>) -> Self {
        Self::from_terms(Weight::new(k, 0), vec![terms]).expect("scalar weight has one coefficient")
    }

    pub fn from_jet_fn(shape: Shape, fourier: Option<[f64; 3]>, f: JetFn) -> Self {
        Self::wrap(shape, fourier, Node::Jet(f))
    }

    pub fn from_point_fn(shape: Shape, fourier: Option<[f64; 3]>, f: PointFn) -> Self {
        Self::wrap(shape, fourier, Node::Point(f))
    }

    pub fn zero(shape: Shape) -> Self {
        Self::wrap(shape, Some([0.0; 3]), Node::Linear(vec![]))
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// The weight of a `V(σ)`-valued map.
    pub fn weight(&self) -> Result<Weight> {
        match self.shape {
            Shape::Rep(w) => Ok(w),
            s => Err(Error::Domain(format!("map with values in {s} has no single weight; project first"))),
        }
    }

    pub fn fourier_index(&self) -> Option<[f64; 3]> {
        self.fourier
    }

    /// True for term lists built only from `e(tτ)` factors (and the zero map).
    pub fn is_holomorphic(&self) -> bool {
        match &*self.node {
            Node::Terms(c) => c.iter().flatten().all(|t| t.is_holomorphic()),
            Node::Linear(v) => v.iter().all(|(_, m)| m.is_holomorphic()),
            _ => false,
        }
    }

    pub fn slash(&self, g: &SymplecticMatrix) -> Self {
        Self::wrap(self.shape, None, Node::Slash(self.clone(), g.clone()))
    }

    pub fn lower(&self, strategy: Strategy) -> Result<Self> {
        let sigma = self.weight()?;
        let shape = Shape::Tensor { sigma, dir: Direction::L };
        if self.is_holomorphic() {
            return Ok(Self::zero(shape));
        }
        Ok(Self::wrap(shape, self.fourier, Node::Lower(self.clone(), strategy)))
    }

    pub fn raise(&self, strategy: Strategy) -> Result<Self> {
        let sigma = self.weight()?;
        Ok(Self::wrap(Shape::Tensor { sigma, dir: Direction::R }, self.fourier, Node::Raise(self.clone(), strategy)))
    }

    pub fn project(&self, comp: Component) -> Result<Self> {
        let Shape::Tensor { sigma, dir } = self.shape else {
            return Err(Error::Domain("projection needs an operator target".into()));
        };
        let target = target_weight(sigma, dir, comp).unwrap_or_else(|| {
            let r = comp.r() as i64;
            Weight::new(sigma.k + r + dir.det_shift(), (sigma.l as i64 + 2 - 2 * r).max(0) as u32)
        });
        Ok(Self::wrap(Shape::Rep(target), self.fourier, Node::Project(self.clone(), dir, comp)))
    }

    /// `π_{dir,comp} ∘ (L or R)`.
    pub fn projected_op(&self, dir: Direction, comp: Component, strategy: Strategy) -> Result<Self> {
        match dir {
            Direction::L => self.lower(strategy)?.project(comp),
            Direction::R => self.raise(strategy)?.project(comp),
        }
    }

    /// `Σ c_i f_i`; all maps must share a shape.
    pub fn linear(shape: Shape, parts: Vec<(C64, ModularMap)>) -> Result<Self> {
        if let Some((_, m)) = parts.iter().find(|(_, m)| m.shape != shape) {
            return Err(Error::Domain(format!("cannot combine {} with {}", m.shape, shape)));
        }
        let fourier = match parts.first() {
            None => Some([0.0; 3]),
            Some((_, m0)) => m0.fourier.filter(|t| parts.iter().all(|(_, m)| m.fourier == Some(*t))),
        };
        Ok(Self::wrap(shape, fourier, Node::Linear(parts)))
    }

    pub fn add(&self, o: &ModularMap) -> Result<Self> {
        Self::linear(self.shape, vec![(C64::new(1.0, 0.0), self.clone()), (C64::new(1.0, 0.0), o.clone())])
    }

    pub fn sub(&self, o: &ModularMap) -> Result<Self> {
        Self::linear(self.shape, vec![(C64::new(1.0, 0.0), self.clone()), (C64::new(-1.0, 0.0), o.clone())])
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::linear(self.shape, vec![(c, self.clone())]).expect("same shape")
    }

    pub fn eval(&self, tau: &SiegelPoint) -> Result<Vec<C64>> {
        Ok(self.eval_jet(tau, 0)?.iter().map(|j| j.value()).collect())
    }

    /// Taylor data of order `order` in the local coordinates at `tau`.
    pub fn eval_jet(&self, tau: &SiegelPoint, order: usize) -> Result<Vec<Jet>> {
        if order > MAX_ORDER {
            return Err(Error::Config(format!("derivative order {order} exceeds the supported {MAX_ORDER}")));
        }
        let out = match &*self.node {
            Node::Terms(comps) => {
                let c = coordinate_jets(tau, order);
                comps.iter().map(|ts| eval_sum(ts, &c)).collect()
            }
            Node::Jet(f) => f(&coordinate_jets(tau, order))?,
            Node::Point(f) => {
                if order > 0 {
                    return Err(Error::Config("pointwise map cannot be differentiated exactly; use a numeric strategy".into()));
                }
                f(tau)?.into_iter().map(|v| Jet::constant(v, 0)).collect()
            }
            Node::Slash(inner, g) => self.eval_slash(inner, g, tau, order)?,
            Node::Lower(inner, Strategy::Exact) => {
                let sigma = inner.weight()?;
                let f = inner.eval_jet(tau, order + 1)?;
                let partials: [Vec<Jet>; NVARS] = std::array::from_fn(|v| f.iter().map(|j| j.partial(v)).collect());
                let c = coordinate_jets(tau, order);
                lower_kernel(sigma, &y_matrix(c[Y1].clone(), c[V].clone(), c[Y2].clone()), &partials)
            }
            Node::Raise(inner, Strategy::Exact) => {
                let sigma = inner.weight()?;
                let f = inner.eval_jet(tau, order + 1)?;
                let partials: [Vec<Jet>; NVARS] = std::array::from_fn(|v| f.iter().map(|j| j.partial(v)).collect());
                let c = coordinate_jets(tau, order);
                let vals: Vec<Jet> = f.iter().map(|j| j.truncate(order)).collect();
                raise_kernel(sigma, &y_matrix(c[Y1].clone(), c[V].clone(), c[Y2].clone()), &vals, &partials)
            }
            Node::Lower(inner, Strategy::Numeric(policy)) | Node::Raise(inner, Strategy::Numeric(policy)) => {
                if order > 0 {
                    return Err(Error::Config("numeric operator output cannot be differentiated exactly".into()));
                }
                let sigma = inner.weight()?;
                let (partials, _) = numeric_partials(inner, tau, policy)?;
                let y = tau.y();
                let y = y_matrix(C64::new(y.0[0][0], 0.0), C64::new(y.0[0][1], 0.0), C64::new(y.0[1][1], 0.0));
                let vals = if matches!(&*self.node, Node::Lower(..)) {
                    lower_kernel(sigma, &y, &partials)
                } else {
                    raise_kernel(sigma, &y, &inner.eval(tau)?, &partials)
                };
                vals.into_iter().map(|v| Jet::constant(v, 0)).collect()
            }
            Node::Project(inner, dir, comp) => {
                let Shape::Tensor { sigma, .. } = inner.shape else { unreachable!("checked at construction") };
                let t = TensorVector { weight: sigma, coeffs: inner.eval_jet(tau, order)? };
                build_projection_table(sigma).project(*dir, *comp, &t).coeffs
            }
            Node::Linear(parts) => {
                let mut acc = vec![Jet::constant(C64::new(0.0, 0.0), order); self.shape.dim()];
                for (c, m) in parts {
                    for (a, v) in acc.iter_mut().zip(m.eval_jet(tau, order)?) {
                        *a = a.clone() + v.scale(*c);
                    }
                }
                acc
            }
        };
        if out.len() != self.shape.dim() {
            return Err(Error::Internal(format!("evaluator returned {} values for {}", out.len(), self.shape)));
        }
        Ok(out)
    }

    fn eval_slash(&self, inner: &ModularMap, g: &SymplecticMatrix, tau: &SiegelPoint, order: usize) -> Result<Vec<Jet>> {
        let image = moebius_act(g, tau)?;
        let inner_jets = inner.eval_jet(&image, order)?;
        let c = coordinate_jets(tau, order);
        let (tp, cocycle) = moebius_generic(g, &tau_matrix(&c));
        let vals: Vec<Jet> = if order == 0 {
            inner_jets
        } else {
            let base = image.coords();
            let off = (tp.0[0][1].clone() + tp.0[1][0].clone()).scale(C64::new(0.5, 0.0));
            let parts = [tp.0[0][0].re(), off.re(), tp.0[1][1].re(), tp.0[0][0].im(), off.im(), tp.0[1][1].im()];
            let deltas: [Jet; NVARS] = std::array::from_fn(|i| parts[i].add_const(C64::new(-base[i], 0.0)));
            inner_jets.iter().map(|j| j.compose(&deltas)).collect()
        };
        Ok(self.shape.act(&cocycle.inverse(), &vals))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::random_word;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt() -> SiegelPoint {
        SiegelPoint::new(0.13, -0.21, 0.35, 1.3, 0.27, 0.9).unwrap()
    }

    fn rel(a: &[C64], b: &[C64]) -> f64 {
        let n = a.iter().chain(b).map(|z| z.norm()).fold(1e-300, f64::max);
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / n
    }

    #[test]
    fn lower_of_det_power() {
        for s_half in [1, 3, -2] {
            let s = s_half as f64 / 2.0;
            let f = ModularMap::scalar(0, vec![SymbolicTerm::det_y_half(s_half)]);
            let lf = f.lower(Strategy::Exact).unwrap().eval(&pt()).unwrap();
            let t = pt();
            let d = t.det_y().powf(s);
            let scale = C64::new(0.0, s / 2.0) * d;
            let y = Mat2::from_real(t.y());
            let expect = sym2_of_lower(&y.scale(&scale));
            assert!(rel(&lf, &expect) < 1e-13, "{lf:?} vs {expect:?}");
        }
    }

    #[test]
    fn holomorphic_and_constant_cases() {
        let t = [1.0, 0.5, 2.0];
        let f = ModularMap::scalar(3, vec![SymbolicTerm::e_t_tau(t)]);
        assert!(f.lower(Strategy::Exact).unwrap().eval(&pt()).unwrap().iter().all(|z| z.norm() == 0.0));
        let one = ModularMap::scalar(0, vec![SymbolicTerm::constant(C64::new(1.0, 0.0))]);
        assert!(one.raise(Strategy::Exact).unwrap().eval(&pt()).unwrap().iter().all(|z| z.norm() == 0.0));
        // R e(tτ) = (2πi t − (ik/2) y⁻¹) e(tτ)
        let k = 3.0;
        let rf = f.raise(Strategy::Exact).unwrap().eval(&pt()).unwrap();
        let e = f.eval(&pt()).unwrap()[0];
        let tm = Mat2::new(C64::new(t[0], 0.0), C64::new(t[1], 0.0), C64::new(t[1], 0.0), C64::new(t[2], 0.0));
        let yi = Mat2::from_real(&pt().y().inverse());
        let m = tm.scale(&C64::new(0.0, 2.0 * PI)).sub(&yi.scale(&C64::new(0.0, k / 2.0))).scale(&e);
        assert!(rel(&rf, &sym2_of_raise(&m)) < 1e-13);
        // projected: π_{R,+} of that
        let p = f.projected_op(Direction::R, Component::Plus, Strategy::Exact).unwrap().eval(&pt()).unwrap();
        let tv = TensorVector { weight: Weight::new(3, 0), coeffs: sym2_of_raise(&m).to_vec() };
        let q = build_projection_table(Weight::new(3, 0)).project(Direction::R, Component::Plus, &tv);
        assert!(rel(&p, &q.coeffs) < 1e-13);
        // degenerate component for scalar weight
        let z = f.projected_op(Direction::L, Component::Minus, Strategy::Exact).unwrap();
        assert_eq!(z.weight().unwrap(), Weight::new(3, 0));
        assert!(z.eval(&pt()).unwrap().iter().all(|c| c.norm() == 0.0));
    }

    fn battery() -> Vec<ModularMap> {
        let t = [1.0, 0.5, -1.0];
        let s = [0.4, 0.1, 0.3];
        vec![
            ModularMap::scalar(0, vec![SymbolicTerm::det_y_half(1)]),
            ModularMap::scalar(2, vec![SymbolicTerm::det_y_half(3)]),
            ModularMap::scalar(1, vec![SymbolicTerm::e_tx(t).times(&SymbolicTerm { s, ..SymbolicTerm::e_tx([0.0; 3]) })]),
            ModularMap::from_terms(
                Weight::new(-1, 2),
                vec![
                    vec![SymbolicTerm::det_y_half(1)],
                    vec![SymbolicTerm::e_t_tau([1.0, 0.0, 1.0])],
                    vec![SymbolicTerm { y_exp: [1, 0, 0], ..SymbolicTerm::e_tx(t) }],
                ],
            )
            .unwrap(),
        ]
    }

    #[test]
    fn numeric_agrees_with_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for f in battery() {
            for _ in 0..10 {
                let tau = SiegelPoint::new(
                    rng.gen_range(-0.5..0.5),
                    rng.gen_range(-0.5..0.5),
                    rng.gen_range(-0.5..0.5),
                    rng.gen_range(0.8..1.6),
                    rng.gen_range(-0.3..0.3),
                    rng.gen_range(0.8..1.6),
                )
                .unwrap();
                for dir in [Direction::L, Direction::R] {
                    let op = |s| match dir {
                        Direction::L => f.lower(s).unwrap(),
                        Direction::R => f.raise(s).unwrap(),
                    };
                    let a = op(Strategy::Exact).eval(&tau).unwrap();
                    let b = op(Strategy::Numeric(StepPolicy::default())).eval(&tau).unwrap();
                    assert!(rel(&a, &b) < 1e-8, "{f:?} {dir:?}: {}", rel(&a, &b));
                }
            }
        }
    }

    #[test]
    fn slash_identity_and_cocycle() {
        let f = &battery()[3];
        let tau = pt();
        let id = f.slash(&SymplecticMatrix::identity());
        assert!(rel(&id.eval(&tau).unwrap(), &f.eval(&tau).unwrap()) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..10 {
            let g1 = SymplecticMatrix::from(&random_word(&mut rng, 3).1);
            let g2 = SymplecticMatrix::from(&random_word(&mut rng, 3).1);
            let a = f.slash(&g1).slash(&g2);
            let b = f.slash(&g1.mul(&g2));
            for order in [0, 2] {
                let ja = a.eval_jet(&tau, order).unwrap();
                let jb = b.eval_jet(&tau, order).unwrap();
                for (x, y) in ja.iter().zip(&jb) {
                    assert!((x.clone() - y.clone()).max_abs() < 1e-8 * (1.0 + x.max_abs()));
                }
            }
        }
    }

    #[test]
    fn slash_of_det_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let tau = pt();
        for k in [0i64, 3] {
            let f = ModularMap::scalar(k, vec![SymbolicTerm::det_y_half(1)]);
            for _ in 0..10 {
                let g = SymplecticMatrix::from(&random_word(&mut rng, 4).1);
                let j = g.cocycle(&tau.tau()).det();
                let expect = j.powi(-(k as i32)) * tau.det_y().sqrt() / j.norm();
                let got = f.slash(&g).eval(&tau).unwrap()[0];
                assert!((got - expect).norm() < 1e-10 * expect.norm());
            }
        }
        let tr = SymplecticMatrix::translation(&Mat2::new(1.0, 2.0, 2.0, -1.0)).unwrap();
        let f = ModularMap::scalar(0, vec![SymbolicTerm::det_y_half(1)]);
        assert!((f.slash(&tr).eval(&tau).unwrap()[0] - f.eval(&tau).unwrap()[0]).norm() < 1e-14);
    }

    #[test]
    fn operators_are_linear() {
        let b = battery();
        let (f, g) = (&b[0], &b[1].scale(C64::new(0.0, 0.0)));
        let _ = g;
        let f2 = ModularMap::scalar(0, vec![SymbolicTerm::det_y_half(3)]);
        let (a, c) = (C64::new(0.7, -0.2), C64::new(-1.1, 0.4));
        let combo = ModularMap::linear(f.shape(), vec![(a, f.clone()), (c, f2.clone())]).unwrap();
        for dir in [Direction::L, Direction::R] {
            for comp in Component::ALL {
                let lhs = combo.projected_op(dir, comp, Strategy::Exact).unwrap().eval(&pt()).unwrap();
                let p1 = f.projected_op(dir, comp, Strategy::Exact).unwrap().eval(&pt()).unwrap();
                let p2 = f2.projected_op(dir, comp, Strategy::Exact).unwrap().eval(&pt()).unwrap();
                let rhs: Vec<C64> = p1.iter().zip(&p2).map(|(x, y)| a * x + c * y).collect();
                assert!(rel(&lhs, &rhs) < 1e-14);
            }
        }
    }
}
