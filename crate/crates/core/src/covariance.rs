//! Covariance residuals, the lift of functions on the half space to the group, and
//! the roundtrip constant of the alternating lowering/raising chain.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gl2::{weight_act_raw, Weight};
use crate::modular::{ModularMap, Shape, Strategy};
use crate::projection::{Component, Direction};
use crate::scalar::{Mat2, C64};
use crate::symplectic::{base_point_transfer, moebius_act, random_word, SiegelPoint, SymplecticMatrix};
use crate::terms::SymbolicTerm;

/// A covariant operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Op {
    L,
    R,
    Projected(Direction, Component),
}

impl Op {
    pub fn apply(self, f: &ModularMap, s: Strategy) -> Result<ModularMap> {
        match self {
            Op::L => f.lower(s),
            Op::R => f.raise(s),
            Op::Projected(d, c) => f.projected_op(d, c, s),
        }
    }

    pub fn all() -> Vec<Op> {
        let mut v = vec![Op::L, Op::R];
        for d in [Direction::L, Direction::R] {
            v.extend(Component::ALL.into_iter().map(|c| Op::Projected(d, c)));
        }
        v
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::L => write!(f, "L"),
            Op::R => write!(f, "R"),
            Op::Projected(d, c) => write!(f, "pi_{d:?}{}", c.symbol()),
        }
    }
}

/// Max-norm of `a − b` relative to the larger of the two; zero when both vanish.
pub fn relative_residual(a: &[C64], b: &[C64]) -> f64 {
    let scale = a.iter().chain(b).map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

/// `‖(op f)|γ − op(f|γ)‖` at `tau`, relative to the larger of both sides and `‖(f|γ)(τ)‖`
/// (the latter keeps identically vanishing sides from turning rounding into a residual of 1).
pub fn check_covariance(f: &ModularMap, g: &SymplecticMatrix, op: Op, tau: &SiegelPoint, s: Strategy) -> Result<f64> {
    let fg = f.slash(g);
    let lhs = op.apply(f, s)?.slash(g).eval(tau)?;
    let rhs = op.apply(&fg, s)?.eval(tau)?;
    let floor = fg.eval(tau)?.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = lhs.iter().chain(&rhs).map(|z| z.norm()).fold(floor, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs.iter().zip(&rhs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale)
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualRecord {
    pub op: String,
    pub function: String,
    pub gamma: Vec<[f64; 4]>,
    pub tau: [f64; 6],
    pub residual: f64,
}

pub struct CovarianceCase {
    pub label: String,
    pub f: ModularMap,
    pub gamma: SymplecticMatrix,
    pub op: Op,
    pub tau: SiegelPoint,
}

/// Evaluates every case in parallel; the output order follows the input.
pub fn run_battery(cases: &[CovarianceCase], s: Strategy) -> Result<Vec<ResidualRecord>> {
    cases
        .par_iter()
        .map(|c| {
            let residual = check_covariance(&c.f, &c.gamma, c.op, &c.tau, s)?;
            let m = c.gamma.matrix();
            Ok(ResidualRecord {
                op: c.op.to_string(),
                function: c.label.clone(),
                gamma: (0..4).map(|i| [m[(i, 0)], m[(i, 1)], m[(i, 2)], m[(i, 3)]]).collect(),
                tau: c.tau.coords(),
                residual,
            })
        })
        .collect()
}

/// `j(g, iI₂) = c·i + d`.
pub fn j_at_base(g: &SymplecticMatrix) -> Mat2<C64> {
    g.cocycle(&SiegelPoint::base().tau())
}

/// `A(f)(g) = σ(j(g, iI₂))⁻¹ f(g·iI₂)`.
pub fn lift_to_group(f: &ModularMap, g: &SymplecticMatrix) -> Result<Vec<C64>> {
    let w = f.weight()?;
    let v = f.eval(&moebius_act(g, &SiegelPoint::base())?)?;
    Ok(weight_act_raw(w, &j_at_base(g).inverse(), &v))
}

pub type GroupFn = Arc<dyn Fn(&SymplecticMatrix) -> Result<Vec<C64>> + Send + Sync>;

/// `τ ↦ σ(j(g_τ, iI₂)) F(g_τ)` with `g_τ` from [`base_point_transfer`].
pub fn unlift(weight: Weight, big_f: GroupFn) -> ModularMap {
    let f = move |tau: &SiegelPoint| -> Result<Vec<C64>> {
        let g = base_point_transfer(tau)?;
        Ok(weight_act_raw(weight, &j_at_base(&g), &big_f(&g)?))
    };
    ModularMap::from_point_fn(Shape::Rep(weight), None, Arc::new(f))
}

/// `k = (a b; −b a)` with `a + ib ∈ U(2)`, as an element of the compact subgroup.
pub fn compact_element(u: &Mat2<C64>) -> Result<SymplecticMatrix> {
    let uu = u.mul(&u.conj().transpose());
    let id = Mat2::<C64>::identity_like(&C64::new(1.0, 0.0));
    if uu.sub(&id).max_abs() > 1e-12 {
        return Err(Error::Domain("matrix is not unitary".into()));
    }
    let (a, b) = (u.map(|z| z.re), u.map(|z| z.im));
    let mut m = nalgebra::Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = a.0[i][j];
            m[(i, j + 2)] = b.0[i][j];
            m[(i + 2, j)] = -b.0[i][j];
            m[(i + 2, j + 2)] = a.0[i][j];
        }
    }
    SymplecticMatrix::new(m)
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundtripEstimate {
    pub k: i64,
    pub mean: C64Ser,
    /// `max |c_τ − mean| / |mean|`.
    pub spread: f64,
    pub ratios: Vec<C64Ser>,
    pub skipped: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct C64Ser {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for C64Ser {
    fn from(z: C64) -> Self {
        C64Ser { re: z.re, im: z.im }
    }
}

/// `(π_{L,+}L)^p (π_{R,−}R)^p` with `p = k/2 − 1`.
pub fn roundtrip_map(f: &ModularMap, k: i64, s: Strategy) -> Result<ModularMap> {
    if k < 4 || k % 4 != 0 {
        return Err(Error::Domain(format!("roundtrip needs k ≥ 4 with 4 | k, got {k}")));
    }
    let expect = Weight::new(2 - k / 2, (k - 2) as u32);
    if f.weight()? != expect {
        return Err(Error::Domain(format!("roundtrip for k = {k} acts on {expect}, got {}", f.weight()?)));
    }
    let p = k / 2 - 1;
    let mut g = f.clone();
    for _ in 0..p {
        g = g.projected_op(Direction::R, Component::Minus, s)?;
    }
    for _ in 0..p {
        g = g.projected_op(Direction::L, Component::Plus, s)?;
    }
    Ok(g)
}

/// Per-point least-squares ratio `⟨out, f⟩ / ⟨f, f⟩`; points where `f` vanishes are skipped.
pub fn roundtrip_constant(f: &ModularMap, k: i64, points: &[SiegelPoint], s: Strategy) -> Result<RoundtripEstimate> {
    let g = roundtrip_map(f, k, s)?;
    let per: Vec<Option<C64>> = points
        .par_iter()
        .map(|tau| -> Result<Option<C64>> {
            let a = f.eval(tau)?;
            let b = g.eval(tau)?;
            let nf: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            if nf == 0.0 || !nf.is_finite() {
                return Ok(None);
            }
            let ip: C64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
            Ok(Some(ip / nf))
        })
        .collect::<Result<_>>()?;
    let skipped: Vec<usize> = per.iter().enumerate().filter(|(_, r)| r.is_none()).map(|(i, _)| i).collect();
    let ratios: Vec<C64> = per.into_iter().flatten().collect();
    if ratios.is_empty() {
        return Err(Error::Domain("f vanishes at every sample point".into()));
    }
    let mean = ratios.iter().sum::<C64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max) / mean.norm().max(f64::MIN_POSITIVE);
    Ok(RoundtripEstimate { k, mean: mean.into(), spread, ratios: ratios.into_iter().map(Into::into).collect(), skipped })
}

/// Random point with x in [−½, ½]³ and y of moderate size and skew.
pub fn random_point<R: Rng>(rng: &mut R) -> SiegelPoint {
    let a: f64 = rng.gen_range(0.6..1.8);
    let c: f64 = rng.gen_range(0.6..1.8);
    let b: f64 = rng.gen_range(-0.4..0.4) * (a * c).sqrt();
    SiegelPoint::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), a, b, c)
        .expect("positive definite by construction")
}

/// Test functions at weights `det¹ sym^l`, `l ∈ {0, 2, 4}`.
pub fn battery_functions() -> Vec<(String, ModularMap)> {
    let t = [1.0, 0.5, 1.0];
    let mut out = Vec::new();
    for l in [0u32, 2, 4] {
        let w = Weight::new(1, l);
        let family: Vec<(&str, SymbolicTerm)> = vec![
            ("det^1/2", SymbolicTerm::det_y_half(1)),
            ("det^3/2", SymbolicTerm::det_y_half(3)),
            ("e(tx)exp(-2pi tr ty)", SymbolicTerm::e_t_tau(t)),
            ("e(tx)det^1/2", SymbolicTerm::e_tx(t).times(&SymbolicTerm::det_y_half(1))),
        ];
        for (name, term) in family {
            let comps = (0..=l).map(|j| vec![term.clone().scaled(C64::new(1.0 + j as f64, 0.5 * j as f64))]).collect();
            out.push((format!("{name} @ {w}"), ModularMap::from_terms(w, comps).expect("dimensions match")));
        }
    }
    out
}

/// `n_gamma` random words of length ≤ 4, each paired with `n_tau` random points, every
/// battery function and every operator. Deterministic in `seed`.
pub fn default_battery(seed: u64, n_gamma: usize, n_tau: usize) -> Vec<CovarianceCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = battery_functions();
    let mut cases = Vec::new();
    for _ in 0..n_gamma {
        let len = rng.gen_range(1..=4);
        let g = SymplecticMatrix::from(&random_word(&mut rng, len).1);
        for _ in 0..n_tau {
            let tau = random_point(&mut rng);
            for (label, f) in &fs {
                for op in Op::all() {
                    cases.push(CovarianceCase { label: label.clone(), f: f.clone(), gamma: g.clone(), op, tau: tau.clone() });
                }
            }
        }
    }
    cases
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ktypes::{direction_dictionary, weight_to_pair};
    use crate::modular::StepPolicy;

    #[test]
    fn identity_and_translation_are_covariant() {
        let tau = SiegelPoint::new(0.1, 0.2, -0.3, 1.2, 0.3, 0.9).unwrap();
        let tr = SymplecticMatrix::translation(&Mat2::new(1.0, -1.0, -1.0, 2.0)).unwrap();
        for (_, f) in battery_functions() {
            for op in Op::all() {
                assert_eq!(check_covariance(&f, &SymplecticMatrix::identity(), op, &tau, Strategy::Exact).unwrap(), 0.0);
                assert!(check_covariance(&f, &tr, op, &tau, Strategy::Exact).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn j2_on_det_power() {
        let tau = SiegelPoint::new(0.1, 0.2, -0.3, 1.2, 0.3, 0.9).unwrap();
        let f = ModularMap::scalar(2, vec![SymbolicTerm::det_y_half(1)]);
        let j = SymplecticMatrix::j2();
        assert!(check_covariance(&f, &j, Op::L, &tau, Strategy::Exact).unwrap() < 1e-8);
        let num = Strategy::Numeric(StepPolicy::default());
        assert!(check_covariance(&f, &j, Op::L, &tau, num).unwrap() < 1e-5);
    }

    #[test]
    fn random_covariance_battery() {
        let recs = run_battery(&default_battery(7, 6, 1), Strategy::Exact).unwrap();
        let worst = recs.iter().max_by(|a, b| a.residual.total_cmp(&b.residual)).unwrap();
        assert!(worst.residual < 1e-6, "{worst:?}");
    }

    #[test]
    fn lift_and_unlift() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = battery_functions().swap_remove(9);
        let f = f.1;
        let w = f.weight().unwrap();
        let ff = f.clone();
        let big: GroupFn = Arc::new(move |g| lift_to_group(&ff, g));
        let back = unlift(w, big);
        for _ in 0..20 {
            let tau = random_point(&mut rng);
            assert!(relative_residual(&back.eval(&tau).unwrap(), &f.eval(&tau).unwrap()) < 1e-12);
        }
        // K-equivariance: A(f)(gk) = σ(j(k, i))⁻¹ A(f)(g)
        for _ in 0..20 {
            let g = SymplecticMatrix::from(&random_word(&mut rng, 3).1);
            let (p, q): (f64, f64) = (rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3));
            let r: f64 = rng.gen_range(0.0..6.3);
            let e = |x: f64| C64::from_polar(1.0, x);
            let u = Mat2::new(e(p) * r.cos(), e(q) * r.sin(), -e(-q) * r.sin(), e(-p) * r.cos()).scale(&e(0.3));
            let k = compact_element(&u).unwrap();
            let lhs = lift_to_group(&f, &g.mul(&k)).unwrap();
            let rhs = weight_act_raw(w, &j_at_base(&k).inverse(), &lift_to_group(&f, &g).unwrap());
            assert!(relative_residual(&lhs, &rhs) < 1e-10);
        }
        let c = ModularMap::scalar(0, vec![SymbolicTerm::constant(C64::new(2.0, 1.0))]);
        let g = SymplecticMatrix::from(&random_word(&mut rng, 3).1);
        assert_eq!(lift_to_group(&c, &g).unwrap(), vec![C64::new(2.0, 1.0)]);
    }

    #[test]
    fn projected_weights_follow_dictionary() {
        let f = battery_functions().swap_remove(10).1;
        let src = weight_to_pair(f.weight().unwrap());
        for e in direction_dictionary() {
            let out = f.projected_op(e.direction, e.component, Strategy::Exact).unwrap();
            let p = weight_to_pair(out.weight().unwrap());
            assert_eq!((p.a - src.a, p.b - src.b), e.offset, "{e:?}");
        }
    }

    #[test]
    fn roundtrip_rejects_bad_k() {
        let f = ModularMap::scalar(1, vec![SymbolicTerm::det_y_half(1)]);
        assert!(roundtrip_map(&f, 2, Strategy::Exact).is_err());
        assert!(roundtrip_map(&f, 6, Strategy::Exact).is_err());
        assert!(roundtrip_map(&f, 4, Strategy::Exact).is_err());
    }
}
