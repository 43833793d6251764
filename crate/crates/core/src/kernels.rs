//! Lifted kernels `(π_{L,+}L)^j (a_t(y) e(tx))`, the series `f*` built from them, the
//! decomposition `f = f⁺ + f⁻`, and a K-Bessel reference profile.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::covariance::C64Ser;
use crate::eisenstein::{FourierIndex, Signature};
use crate::error::{Error, Result};
use crate::gl2::Weight;
use crate::jet::{Jet, NVARS, U, V, X1, X2, Y1, Y2};
use crate::modular::{ModularMap, Shape, StepPolicy, Strategy};
use crate::profile::{AnalyticProfile, CoefficientProfile};
use crate::projection::{Component, Direction};
use crate::scalar::{Mat2, C64};
use crate::symplectic::SiegelPoint;

/// Where the scalar profile comes from.
#[derive(Clone, Debug)]
pub enum KernelSource {
    /// Closed-form quadrature, differentiable on jets.
    Analytic(AnalyticProfile),
    /// Interpolated table; only numeric derivatives.
    Tabulated(Arc<CoefficientProfile>),
}

impl KernelSource {
    pub fn k(&self) -> i64 {
        match self {
            KernelSource::Analytic(p) => p.k,
            KernelSource::Tabulated(p) => p.k,
        }
    }

    pub fn t(&self) -> FourierIndex {
        match self {
            KernelSource::Analytic(p) => p.t,
            KernelSource::Tabulated(p) => p.t,
        }
    }
}

fn e_tx(t: &FourierIndex, c: &[Jet; NVARS]) -> Jet {
    let [t11, t12, t22] = t.entries();
    let i2pi = C64::new(0.0, 2.0 * PI);
    (c[X1].scale(i2pi * t11) + c[U].scale(i2pi * 2.0 * t12) + c[X2].scale(i2pi * t22)).exp()
}

/// `a_t(y) e(tx)` as a map of weight `det^{k'}`, `k'` the profile weight.
pub fn seed_map(src: &KernelSource) -> ModularMap {
    let t = src.t();
    let shape = Shape::Rep(Weight::new(src.k(), 0));
    match src.clone() {
        KernelSource::Analytic(p) => ModularMap::from_jet_fn(
            shape,
            Some(t.entries()),
            Arc::new(move |c: &[Jet; NVARS]| Ok(vec![p.eval_jet(&c[Y1], &c[V], &c[Y2]) * e_tx(&t, c)])),
        ),
        KernelSource::Tabulated(p) => ModularMap::from_point_fn(
            shape,
            Some(t.entries()),
            Arc::new(move |tau: &SiegelPoint| {
                let (v, _) = p.interpolate(tau.y()).map_err(|e| {
                    let c = tau.coords();
                    Error::Domain(format!("stencil point (y1, v, y2) = ({}, {}, {}) leaves the profile grid: {e}", c[3], c[4], c[5]))
                })?;
                let [t11, t12, t22] = t.entries();
                let x = tau.x();
                let ph = 2.0 * PI * (t11 * x.0[0][0] + 2.0 * t12 * x.0[0][1] + t22 * x.0[1][1]);
                Ok(vec![v * C64::from_polar(1.0, ph)])
            }),
        ),
    }
}

#[derive(Clone, Debug)]
pub struct LiftedKernel {
    /// Siegel weight `k = 2k'`.
    pub k: i64,
    pub t: FourierIndex,
    pub j: u32,
    pub weight: Weight,
    pub map: ModularMap,
}

/// `j` applications of `π_{L,+}L` to the seed.
pub fn lift_kernel(src: &KernelSource, j: u32, strategy: Strategy) -> Result<LiftedKernel> {
    let kp = src.k();
    if j as i64 > kp {
        return Err(Error::Domain(format!("level j = {j} exceeds k/2 = {kp}")));
    }
    let mut map = seed_map(src);
    for _ in 0..j {
        map = map.projected_op(Direction::L, Component::Plus, strategy)?;
    }
    Ok(LiftedKernel { k: 2 * kp, t: src.t(), j, weight: map.weight()?, map })
}

/// Analytic kernel at level `j` for Siegel weight `k` (profile weight `k/2`).
pub fn analytic_kernel(k: i64, t: FourierIndex, j: u32, n_theta: usize) -> Result<LiftedKernel> {
    if k % 4 != 0 || k < 4 {
        return Err(Error::Domain(format!("lifted kernels need 4 | k and k ≥ 4, got {k}")));
    }
    lift_kernel(&KernelSource::Analytic(AnalyticProfile::new(k / 2, t, n_theta)?), j, Strategy::Exact)
}

/// Multiples of machine epsilon allowed per unit of output scale.
pub const ROUNDING_FACTOR: f64 = 1e4;

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub t: FourierIndex,
    pub tau: [f64; 6],
    pub residual: f64,
    /// Quadrature part: the same residual recomputed with half the θ nodes on the jet side.
    pub budget_quad: f64,
    /// Rounding part: `ROUNDING_FACTOR · ε ·` the size of the unprojected operator output.
    pub budget_round: f64,
    /// Finite-difference part, where a side is differentiated numerically.
    pub budget_fd: f64,
    pub budget: f64,
    pub pass: bool,
}

fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn diff(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Residual of a quantity that should vanish, with its budget.
fn check(name: &str, t: FourierIndex, tau: &SiegelPoint, full: Vec<C64>, half: Vec<C64>, scale: f64) -> IdentityCheck {
    let residual = max_abs(&full);
    let budget_quad = max_abs(&diff(&full, &half));
    let budget_round = ROUNDING_FACTOR * f64::EPSILON * scale;
    let budget = budget_quad + budget_round;
    IdentityCheck { name: name.into(), t, tau: tau.coords(), residual, budget_quad, budget_round, budget_fd: 0.0, budget, pass: residual <= budget }
}

/// The three level-`(k/2−1)` identities and the four level-`k/2` vanishings at `tau`.
pub fn kernel_identities(k: i64, t: FourierIndex, n_theta: usize, tau: &SiegelPoint) -> Result<Vec<IdentityCheck>> {
    let top = (k / 2) as u32;
    let mk = |n| -> Result<(LiftedKernel, LiftedKernel)> { Ok((analytic_kernel(k, t, top - 1, n)?, analytic_kernel(k, t, top, n)?)) };
    let (lo, hi) = mk(n_theta)?;
    let (lo_h, hi_h) = mk(n_theta / 2)?;
    let ev = |m: &ModularMap| m.eval(tau);
    let op = |m: &ModularMap, d, c| m.projected_op(d, c, Strategy::Exact);
    let mut out = Vec::new();
    let scale_l = max_abs(&ev(&lo.map.lower(Strategy::Exact)?)?);
    // K_hi is built with jets; the left side here uses Richardson differences instead
    let fd = |levels| -> Result<Vec<C64>> {
        let policy = StepPolicy::new(StepPolicy::default().h0, levels)?;
        ev(&lo.map.projected_op(Direction::L, Component::Plus, Strategy::Numeric(policy))?)
    };
    let (fd3, fd2) = (fd(3)?, fd(2)?);
    let mut first = check("pi_L+ L K_lo - K_hi", t, tau, diff(&fd3, &ev(&hi.map)?), diff(&fd3, &ev(&hi_h.map)?), scale_l);
    first.budget_fd = max_abs(&diff(&fd3, &fd2));
    first.budget += first.budget_fd;
    first.pass = first.residual <= first.budget;
    out.push(first);
    for c in [Component::Zero, Component::Minus] {
        let name = format!("pi_L{} L K_lo", c.symbol());
        out.push(check(&name, t, tau, ev(&op(&lo.map, Direction::L, c)?)?, ev(&op(&lo_h.map, Direction::L, c)?)?, scale_l));
    }
    for d in [Direction::L, Direction::R] {
        let scale = match d {
            Direction::L => max_abs(&ev(&hi.map.lower(Strategy::Exact)?)?),
            Direction::R => max_abs(&ev(&hi.map.raise(Strategy::Exact)?)?),
        };
        for c in [Component::Zero, Component::Minus] {
            let name = format!("pi_{d:?}{} K_hi", c.symbol());
            out.push(check(&name, t, tau, ev(&op(&hi.map, d, c)?)?, ev(&op(&hi_h.map, d, c)?)?, scale));
        }
    }
    Ok(out)
}

/// `det(y)^{(k+2)/4} K_{k/2}(w) / w^{k/4}` with `w = tr(ty)² − det(t) det(y)`.
pub fn bessel_reference(k: i64, t: &FourierIndex, y: &Mat2<f64>) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!("need k/2 ≥ 1, got k = {k}")));
    }
    let tr = t.matrix().mul(y).trace();
    let w = tr * tr - t.matrix().det() * y.det();
    if !(w > 0.0) {
        return Err(Error::Domain(format!("w = {w} is not positive for t = {t}")));
    }
    Ok(y.det().powf((k + 2) as f64 / 4.0) * bessel_k(k as f64 / 2.0, w) / w.powf(k as f64 / 4.0))
}

/// `K_ν(w) = ∫_0^∞ e^{−w cosh s} cosh(νs) ds` by the trapezoid rule, which converges
/// geometrically for this entire, even integrand.
pub fn bessel_k(nu: f64, w: f64) -> f64 {
    let h = 0.02;
    let mut acc = 0.5 * (-w).exp();
    let mut n = 1;
    loop {
        let s = n as f64 * h;
        let e = -w * s.cosh() + nu * s;
        if e < -745.0 && s > 1.0 {
            break;
        }
        acc += (-w * s.cosh()).exp() * (nu * s).cosh();
        n += 1;
    }
    acc * h
}

/// Coefficients `c(f; t)` with a bound on the entries of `t`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CoefficientList {
    pub trunc: i64,
    #[serde(serialize_with = "entries_as_list")]
    pub entries: BTreeMap<FourierIndex, C64Ser>,
}

fn entries_as_list<S: serde::Serializer>(m: &BTreeMap<FourierIndex, C64Ser>, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry<'a> {
        t: String,
        c: &'a C64Ser,
    }
    s.collect_seq(m.iter().map(|(t, c)| Entry { t: t.to_string(), c }))
}

impl CoefficientList {
    pub fn new(trunc: i64, entries: impl IntoIterator<Item = (FourierIndex, C64)>) -> Result<Self> {
        let mut m = BTreeMap::new();
        for (t, c) in entries {
            if t.t11.abs() > trunc || t.t12_twice.abs() > 2 * trunc || t.t22.abs() > trunc {
                return Err(Error::Domain(format!("{t} lies outside the truncation {trunc}")));
            }
            m.insert(t, c.into());
        }
        Ok(CoefficientList { trunc, entries: m })
    }

    pub fn get(&self, t: &FourierIndex) -> C64 {
        self.entries.get(t).map(|c| C64::new(c.re, c.im)).unwrap_or_default()
    }

    /// Indefinite indices within the truncation.
    pub fn indefinite_box(trunc: i64) -> Vec<FourierIndex> {
        FourierIndex::box_all(trunc).into_iter().filter(|t| t.signature() == Signature::Indefinite).collect()
    }
}

/// A finite partial sum `Σ c(t) K_{k/2−1}(t)`.
#[derive(Clone, Debug)]
pub struct FStar {
    pub k: i64,
    pub coeffs: CoefficientList,
    pub n_theta: usize,
    pub map: ModularMap,
}

pub fn assemble_fstar(coeffs: &CoefficientList, k: i64, n_theta: usize) -> Result<FStar> {
    if k % 4 != 0 || k < 4 {
        return Err(Error::Domain(format!("f* needs 4 | k and k ≥ 4, got {k}")));
    }
    let weight = Weight::new(2 - k / 2, (k - 2) as u32);
    let mut parts = Vec::new();
    for (t, c) in &coeffs.entries {
        if t.signature() != Signature::Indefinite {
            return Err(Error::Domain(format!("coefficient at {t} rejected: f* only takes indefinite indices")));
        }
        let kern = analytic_kernel(k, *t, (k / 2 - 1) as u32, n_theta)?;
        parts.push((C64::new(c.re, c.im), kern.map));
    }
    let map = if parts.is_empty() { ModularMap::zero(Shape::Rep(weight)) } else { ModularMap::linear(Shape::Rep(weight), parts)? };
    Ok(FStar { k, coeffs: coeffs.clone(), n_theta, map })
}

impl FStar {
    /// First-omitted-shell estimate: `max|c| · Σ |K(t; τ)|` over indefinite `t` with
    /// `max(|t11|, |t12|, |t22|) = trunc + 1`.
    pub fn tail_estimate(&self, tau: &SiegelPoint) -> Result<f64> {
        let cmax = self.coeffs.entries.values().map(|c| c.re.hypot(c.im)).fold(0.0, f64::max);
        if cmax == 0.0 {
            return Ok(0.0);
        }
        let n = self.coeffs.trunc + 1;
        let mut acc = 0.0;
        for t in CoefficientList::indefinite_box(n) {
            if t.t11.abs() < n && t.t12_twice.abs() < 2 * n && t.t22.abs() < n {
                continue;
            }
            let kern = analytic_kernel(self.k, t, (self.k / 2 - 1) as u32, self.n_theta)?;
            acc += max_abs(&kern.map.eval(tau)?);
        }
        Ok(cmax * acc)
    }
}

/// `π_{L,+}L f* − Σ c(t) K_{k/2}(t)` at `tau`, budgeted like the kernel identities.
pub fn fstar_identity(fs: &FStar, tau: &SiegelPoint) -> Result<IdentityCheck> {
    let residual_at = |n_theta: usize| -> Result<(Vec<C64>, f64)> {
        let star = assemble_fstar(&fs.coeffs, fs.k, n_theta)?;
        let lhs = star.map.projected_op(Direction::L, Component::Plus, Strategy::Exact)?.eval(tau)?;
        let scale = max_abs(&star.map.lower(Strategy::Exact)?.eval(tau)?);
        let mut rhs = vec![C64::default(); lhs.len()];
        for (t, c) in &fs.coeffs.entries {
            let top = analytic_kernel(fs.k, *t, (fs.k / 2) as u32, n_theta)?.map.eval(tau)?;
            for (r, v) in rhs.iter_mut().zip(top) {
                *r += C64::new(c.re, c.im) * v;
            }
        }
        Ok((diff(&lhs, &rhs), scale))
    };
    let (full, scale) = residual_at(fs.n_theta)?;
    let (half, _) = residual_at(fs.n_theta / 2)?;
    let t = fs.coeffs.entries.keys().next().copied().unwrap_or(FourierIndex::new(0, 0, 0));
    Ok(check("pi_L+ L f* - sum c K_top", t, tau, full, half, scale))
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub f_plus: ModularMap,
    pub f_minus: FStar,
    pub condition: f64,
}

/// Largest condition number accepted when recovering coefficients.
pub const MAX_CONDITION: f64 = 1e10;

/// Recovers `c(t)` for `t ∈ candidates` from `π_{L,+}L f ≈ Σ c(t) K_{k/2}(t)` at the sample
/// points (least squares by SVD), then `f⁻ = Σ c(t) K_{k/2−1}(t)` and `f⁺ = f − f⁻`.
pub fn decompose(
    f: &ModularMap,
    k: i64,
    candidates: &[FourierIndex],
    points: &[SiegelPoint],
    n_theta: usize,
    trunc: i64,
) -> Result<Decomposition> {
    let weight = Weight::new(2 - k / 2, (k - 2) as u32);
    if f.weight()? != weight {
        return Err(Error::Domain(format!("decompose for k = {k} expects {weight}, got {}", f.weight()?)));
    }
    let g = f.projected_op(Direction::L, Component::Plus, Strategy::Exact)?;
    let dim = (k + 1) as usize;
    let rows = dim * points.len();
    let mut b = DVector::<C64>::zeros(rows);
    for (i, tau) in points.iter().enumerate() {
        for (r, v) in g.eval(tau)?.into_iter().enumerate() {
            b[i * dim + r] = v;
        }
    }
    let zero = CoefficientList::new(trunc, [])?;
    if b.iter().all(|z| z.norm() == 0.0) || candidates.is_empty() {
        return Ok(Decomposition { f_plus: f.clone(), f_minus: assemble_fstar(&zero, k, n_theta)?, condition: 1.0 });
    }
    let mut a = DMatrix::<C64>::zeros(rows, candidates.len());
    for (col, t) in candidates.iter().enumerate() {
        let kern = analytic_kernel(k, *t, (k / 2) as u32, n_theta)?;
        for (i, tau) in points.iter().enumerate() {
            for (r, v) in kern.map.eval(tau)?.into_iter().enumerate() {
                a[(i * dim + r, col)] = v;
            }
        }
    }
    // column scaling keeps the condition number about the basis, not the kernel sizes
    let norms: Vec<f64> = (0..candidates.len()).map(|c| a.column(c).norm().max(f64::MIN_POSITIVE)).collect();
    for (c, n) in norms.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / n);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::Numerical(e.to_string(), condition))?;
    let coeffs = CoefficientList::new(trunc, candidates.iter().enumerate().map(|(i, t)| (*t, x[i] / norms[i])))?;
    let f_minus = assemble_fstar(&coeffs, k, n_theta)?;
    let f_plus = f.sub(&f_minus.map)?;
    Ok(Decomposition { f_plus, f_minus, condition })
}

/// Deterministic sample points spread over x and a moderate range of y.
pub fn sample_points(n: usize, seed: u64) -> Vec<SiegelPoint> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let a: f64 = rng.gen_range(0.7..1.4);
            let c: f64 = rng.gen_range(0.7..1.4);
            let v = rng.gen_range(-0.3..0.3) * (a * c).sqrt();
            SiegelPoint::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), a, v, c)
                .expect("positive definite by construction")
        })
        .collect()
}
