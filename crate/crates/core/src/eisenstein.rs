//! Truncated genus-2 Eisenstein sums `Σ det(y)^{1/2} |_{det^k} γ`, the skew sum, and
//! Fourier coefficients extracted on the 3-torus of `x`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use serde::Serialize;

use crate::cosets::{enumerate_cosets, CosetRep, IntMat2};
use crate::error::{Error, Result};
use crate::reduce::{par_sum, par_sum_many};
use crate::scalar::{Mat2, C64};
use crate::symplectic::SiegelPoint;

static COSETS: Lazy<Mutex<BTreeMap<u32, Arc<Vec<CosetRep>>>>> = Lazy::new(|| Mutex::new(BTreeMap::new()));

/// Representatives with height ≤ `b`, computed once per bound.
pub fn cosets(b: u32) -> Arc<Vec<CosetRep>> {
    if let Some(v) = COSETS.lock().expect("coset cache").get(&b) {
        return v.clone();
    }
    let v = Arc::new(enumerate_cosets(b));
    COSETS.lock().expect("coset cache").entry(b).or_insert(v).clone()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Signature {
    PositiveDefinite,
    NegativeDefinite,
    Indefinite,
    Degenerate,
}

/// Half-integral symmetric `t = (t11, t12; t12, t22)`, stored with `t12 = t12_twice / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FourierIndex {
    pub t11: i64,
    pub t12_twice: i64,
    pub t22: i64,
}

impl FourierIndex {
    pub fn new(t11: i64, t12_twice: i64, t22: i64) -> Self {
        FourierIndex { t11, t12_twice, t22 }
    }

    pub fn entries(&self) -> [f64; 3] {
        [self.t11 as f64, self.t12_twice as f64 / 2.0, self.t22 as f64]
    }

    pub fn matrix(&self) -> Mat2<f64> {
        let [a, b, c] = self.entries();
        Mat2::new(a, b, b, c)
    }

    /// `4·det t`, an integer.
    pub fn det4(&self) -> i64 {
        4 * self.t11 * self.t22 - self.t12_twice * self.t12_twice
    }

    pub fn signature(&self) -> Signature {
        match self.det4().signum() {
            0 => Signature::Degenerate,
            -1 => Signature::Indefinite,
            _ if self.t11 > 0 => Signature::PositiveDefinite,
            _ => Signature::NegativeDefinite,
        }
    }

    /// All indices with `|t11|, |t12|, |t22| ≤ bound`.
    pub fn box_all(bound: i64) -> Vec<FourierIndex> {
        let mut v = Vec::new();
        for t11 in -bound..=bound {
            for t12 in -2 * bound..=2 * bound {
                for t22 in -bound..=bound {
                    v.push(FourierIndex::new(t11, t12, t22));
                }
            }
        }
        v
    }
}

impl fmt::Display for FourierIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.entries();
        write!(f, "[{a}, {b}; {b}, {c}]")
    }
}

impl std::str::FromStr for FourierIndex {
    type Err = Error;

    /// `t11,t12,t22` with integer diagonal and `t12 ∈ ½ℤ`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse Fourier index '{s}' (expected t11,t12,t22 with t12 in Z/2)"));
        let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        let int = |x: f64| if x.fract() == 0.0 && x.abs() < 1e9 { Some(x as i64) } else { None };
        match v.as_slice() {
            [a, b, c] => Ok(FourierIndex::new(int(*a).ok_or_else(bad)?, int(2.0 * b).ok_or_else(bad)?, int(*c).ok_or_else(bad)?)),
            _ => Err(bad()),
        }
    }
}

fn c_tau_d(c: &IntMat2, d: &IntMat2, tau: &Mat2<C64>) -> C64 {
    let e = |i: usize, j: usize| {
        C64::new(c[i][0] as f64, 0.0) * tau.0[0][j] + C64::new(c[i][1] as f64, 0.0) * tau.0[1][j] + d[i][j] as f64
    };
    e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0)
}

/// `det(cτ+d)^{−k} det(Im γτ)^{1/2}` with `det Im γτ = det(y)/|det(cτ+d)|²`.
pub fn eisenstein_term(k: i64, rep: &CosetRep, tau: &SiegelPoint) -> C64 {
    let j = c_tau_d(&rep.c, &rep.d, &tau.tau());
    j.powi(-(k as i32)) * (tau.det_y().sqrt() / j.norm())
}

/// `det(cτ+d)^{−1/2} det(cτ̄+d)^{−(k+1/2)}`, where the antiholomorphic factor is taken
/// as the conjugate of the principal power of `det(cτ+d)`.
pub fn skew_term(k_plus_1: i64, rep: &CosetRep, tau: &SiegelPoint) -> C64 {
    let j = c_tau_d(&rep.c, &rep.d, &tau.tau());
    let k = (k_plus_1 - 1) as f64;
    j.powf(-0.5) * j.powf(-(k + 0.5)).conj()
}

fn check_k(k: i64) -> Result<()> {
    if k <= 2 || k % 2 != 0 {
        return Err(Error::Domain(format!("Eisenstein sum needs even k > 2, got {k}")));
    }
    Ok(())
}

/// Truncated sum over the cosets of height ≤ `height_bound`.
pub fn eval_eisenstein(k: i64, tau: &SiegelPoint, height_bound: u32) -> Result<C64> {
    check_k(k)?;
    let reps = cosets(height_bound);
    Ok(par_sum(reps.len(), |i| eisenstein_term(k, &reps[i], tau)))
}

pub fn skew_eisenstein(k_plus_1: i64, tau: &SiegelPoint, height_bound: u32) -> Result<C64> {
    check_k(k_plus_1 - 1)?;
    let reps = cosets(height_bound);
    Ok(par_sum(reps.len(), |i| skew_term(k_plus_1, &reps[i], tau)))
}

/// Automorphy factor `det(cτ+d)^k` of weight `det^k` (the sum transforms as `E(γτ) = det(cτ+d)^k E(τ)`).
pub fn automorphy(k: i64, g: &crate::symplectic::SymplecticMatrix, tau: &SiegelPoint) -> C64 {
    g.cocycle(&tau.tau()).det().powi(k as i32)
}

#[derive(Clone, Debug, Serialize)]
pub struct FourierRecord {
    pub t: FourierIndex,
    pub y: [f64; 3],
    pub value: C64,
    /// `|I_N − I_{N/2}|`
    pub err_quad: f64,
    /// `|I(B) − I(B−1)|`
    pub err_trunc: f64,
    pub err: f64,
}

/// Quadrature and truncation settings for torus extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TorusSpec {
    pub k: i64,
    pub n_quad: usize,
    /// Coset height bound; for nondegenerate indices, the bound on `det c` of the orbits.
    pub height_bound: u32,
    /// Translates `|B_ij| ≤ translate_box` summed per orbit.
    pub translate_box: i64,
}

impl TorusSpec {
    pub fn new(k: i64, n_quad: usize, height_bound: u32) -> Result<Self> {
        check_k(k)?;
        if n_quad < 4 || n_quad % 2 != 0 {
            return Err(Error::Config(format!("N_quad must be even and ≥ 4, got {n_quad}")));
        }
        Ok(TorusSpec { k, n_quad, height_bound, translate_box: 6 })
    }

    pub fn with_translate_box(mut self, m: i64) -> Result<Self> {
        if m < 1 {
            return Err(Error::Config(format!("translate box must be ≥ 1, got {m}")));
        }
        self.translate_box = m;
        Ok(self)
    }
}

/// Translation orbit of rank-2 cosets: `c` in row Hermite form and `S = c⁻¹d = s_num/den`
/// modulo integral symmetric matrices. Entries of `s_num` are `(s11, s12, s22)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rank2Orbit {
    pub c: IntMat2,
    pub den: i64,
    pub s_num: [i64; 3],
}

impl Rank2Orbit {
    pub fn det_c(&self) -> i64 {
        self.c[0][0] * self.c[1][1] - self.c[0][1] * self.c[1][0]
    }

    pub fn d(&self) -> IntMat2 {
        let [n11, n12, n22] = self.s_num;
        let c = &self.c;
        let q = |x: i64| x / self.den;
        [[q(c[0][0] * n11 + c[0][1] * n12), q(c[0][0] * n12 + c[0][1] * n22)], [q(c[1][0] * n11 + c[1][1] * n12), q(c[1][0] * n12 + c[1][1] * n22)]]
    }

    /// `e(tS)`.
    pub fn character(&self, t: &FourierIndex) -> C64 {
        let [n11, n12, n22] = self.s_num;
        let num = t.t11 * n11 + t.t12_twice * n12 + t.t22 * n22;
        C64::from_polar(1.0, 2.0 * PI * (num.rem_euclid(self.den)) as f64 / self.den as f64)
    }
}

/// All orbits with `det c ≤ max_det`, in lexicographic order of `(det c, c, S)`.
pub fn rank2_orbits(max_det: i64) -> Vec<Rank2Orbit> {
    let mut out = Vec::new();
    for det in 1..=max_det {
        for a in 1..=det {
            if det % a != 0 {
                continue;
            }
            let e = det / a;
            for b in 0..e {
                let c = [[a, b], [0, e]];
                for n11 in 0..det {
                    for n12 in 0..det {
                        for n22 in 0..det {
                            let cn = [a * n11 + b * n12, a * n12 + b * n22, e * n12, e * n22];
                            if cn.iter().any(|x| x % det != 0) {
                                continue;
                            }
                            let o = Rank2Orbit { c, den: det, s_num: [n11, n12, n22] };
                            if crate::cosets::is_coprime_pair(&c, &o.d()) {
                                out.push(o);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// `Σ_orbits det(c)^{−k−1} e(tS)` over `det c ≤ max_det`, and the last shell's contribution.
pub fn singular_series(k: i64, t: &FourierIndex, max_det: i64) -> (C64, f64) {
    let orbits = rank2_orbits(max_det);
    let mut acc = crate::reduce::Neumaier::default();
    let mut shell = crate::reduce::Neumaier::default();
    for o in &orbits {
        let v = o.character(t) * (o.det_c() as f64).powi(-(k as i32) - 1);
        acc.add(v);
        if o.det_c() == max_det {
            shell.add(v);
        }
    }
    (acc.value(), shell.value().norm())
}

/// `g(τ) = det(τ)^{−k} |det τ|^{−1} det(y)^{1/2}`, the common shape of all rank-2 terms.
fn big_cell_seed(k: i64, tau: &SiegelPoint) -> C64 {
    let j = tau.tau().det();
    j.powi(-(k as i32)) * (tau.det_y().sqrt() / j.norm())
}

/// Trapezoid rule with step `1/N` for `∫ g(x+iy) e(−tx) dx` over the box `[−M, M+1)³`,
/// together with the step-`2/N` and box-`M−1` values.
fn big_cell_trapezoid(spec: &TorusSpec, ts: &[FourierIndex], y: &Mat2<f64>) -> Result<Vec<[C64; 3]>> {
    let n = spec.n_quad as i64;
    let m = spec.translate_box;
    let side = (2 * m + 1) * n;
    let total = (side * side * side) as usize;
    let h3 = 1.0 / (n * n * n) as f64;
    SiegelPoint::new(0.0, 0.0, 0.0, y.0[0][0], y.0[0][1], y.0[1][1])?;
    let sums = par_sum_many(total, 3 * ts.len(), |idx, out| {
        let idx = idx as i64;
        let g = [idx / (side * side), (idx / side) % side, idx % side];
        let x = g.map(|v| (v - m * n) as f64 / n as f64);
        let tau = SiegelPoint::new(x[0], x[1], x[2], y.0[0][0], y.0[0][1], y.0[1][1]).expect("y checked");
        let v = big_cell_seed(spec.k, &tau);
        let even = g.iter().all(|v| v % 2 == 0);
        let inner = g.iter().all(|&v| v >= n && v < side - n);
        for (i, t) in ts.iter().enumerate() {
            let [t11, t12, t22] = t.entries();
            let ph = C64::from_polar(1.0, -2.0 * PI * (t11 * x[0] + 2.0 * t12 * x[1] + t22 * x[2]));
            let w = v * ph * h3;
            out[3 * i] = w;
            if even {
                out[3 * i + 1] = w * 8.0;
            }
            if inner {
                out[3 * i + 2] = w;
            }
        }
    });
    Ok((0..ts.len()).map(|i| [sums[3 * i], sums[3 * i + 1], sums[3 * i + 2]]).collect())
}

/// `∫_{[0,1]³} E(x+iy) e(−tx) dx` for every `t` in `ts`.
///
/// Nondegenerate `t` only see cosets with `rank c = 2`. Those are regrouped into translation
/// orbits, which factors the coefficient into [`singular_series`] times a box-truncated
/// trapezoid integral of the common seed; the error adds the step-halving, box-shrinking
/// and last-shell differences. Degenerate `t` use the height-truncated sum on an `N³` torus
/// grid with error `|I_N − I_{N/2}| + |I(B) − I(B−1)|`.
pub fn fourier_table(spec: TorusSpec, ts: &[FourierIndex], y: &Mat2<f64>) -> Result<Vec<FourierRecord>> {
    let (deg, nondeg): (Vec<FourierIndex>, Vec<FourierIndex>) =
        ts.iter().partition(|t| t.signature() == Signature::Degenerate);
    let mut by_t = BTreeMap::new();
    for r in torus_height_truncated(spec, &deg, y)? {
        by_t.insert(r.t, r);
    }
    let cells = big_cell_trapezoid(&spec, &nondeg, y)?;
    for (t, [full, half, inner]) in nondeg.into_iter().zip(cells) {
        let (series, shell) = singular_series(spec.k, &t, spec.height_bound.max(1) as i64);
        let value = series * full;
        let err_quad = series.norm() * ((full - half).norm() + (full - inner).norm());
        let err_trunc = shell * full.norm();
        by_t.insert(t, FourierRecord { t, y: [y.0[0][0], y.0[0][1], y.0[1][1]], value, err_quad, err_trunc, err: err_quad + err_trunc });
    }
    Ok(ts.iter().map(|t| by_t[t].clone()).collect())
}

fn torus_height_truncated(spec: TorusSpec, ts: &[FourierIndex], y: &Mat2<f64>) -> Result<Vec<FourierRecord>> {
    if ts.is_empty() {
        return Ok(vec![]);
    }
    let n = spec.n_quad;
    let base = SiegelPoint::new(0.0, 0.0, 0.0, y.0[0][0], y.0[0][1], y.0[1][1])?;
    let reps = cosets(spec.height_bound);
    let lower = spec.height_bound as i64 - 1;
    let width = 3 * ts.len();
    let inv = 1.0 / (n * n * n) as f64;
    let inv_half = 8.0 * inv;
    let sums = par_sum_many(n * n * n, width, |idx, out| {
        let (a, b, c) = (idx / (n * n), (idx / n) % n, idx % n);
        let x = [a as f64 / n as f64, b as f64 / n as f64, c as f64 / n as f64];
        let tau = SiegelPoint::new(x[0], x[1], x[2], base.y().0[0][0], base.y().0[0][1], base.y().0[1][1])
            .expect("shifted point keeps y");
        let mut full = crate::reduce::Neumaier::default();
        let mut low = crate::reduce::Neumaier::default();
        for r in reps.iter() {
            let v = eisenstein_term(spec.k, r, &tau);
            full.add(v);
            if r.height <= lower {
                low.add(v);
            }
        }
        let (e_full, e_low) = (full.value(), low.value());
        let even = a % 2 == 0 && b % 2 == 0 && c % 2 == 0;
        for (i, t) in ts.iter().enumerate() {
            let [t11, t12, t22] = t.entries();
            let phase = C64::from_polar(1.0, -2.0 * PI * (t11 * x[0] + 2.0 * t12 * x[1] + t22 * x[2]));
            out[3 * i] = e_full * phase * inv;
            out[3 * i + 1] = if even { e_full * phase * inv_half } else { C64::new(0.0, 0.0) };
            out[3 * i + 2] = e_low * phase * inv;
        }
    });
    Ok(ts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let value = sums[3 * i];
            let err_quad = (value - sums[3 * i + 1]).norm();
            let err_trunc = if spec.height_bound == 0 { 0.0 } else { (value - sums[3 * i + 2]).norm() };
            FourierRecord { t, y: [y.0[0][0], y.0[0][1], y.0[1][1]], value, err_quad, err_trunc, err: err_quad + err_trunc }
        })
        .collect())
}

pub fn fourier_coefficient(spec: TorusSpec, t: FourierIndex, y: &Mat2<f64>) -> Result<FourierRecord> {
    Ok(fourier_table(spec, &[t], y)?.remove(0))
}

pub fn write_fourier_csv<W: Write>(recs: &[FourierRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "t11,t12,t22,y1,v,y2,re,im,err")?;
    for r in recs {
        let [a, b, c] = r.t.entries();
        writeln!(
            w,
            "{a},{b},{c},{},{},{},{:.17e},{:.17e},{:.6e}",
            r.y[0], r.y[1], r.y[2], r.value.re, r.value.im, r.err
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::SymplecticMatrix;

    fn base() -> SiegelPoint {
        SiegelPoint::base()
    }

    #[test]
    fn identity_only() {
        let tau = SiegelPoint::new(0.3, 0.1, -0.2, 1.5, 0.4, 0.8).unwrap();
        let e = eval_eisenstein(10, &tau, 0).unwrap();
        assert!((e - C64::new(tau.det_y().sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(skew_eisenstein(11, &tau, 0).unwrap(), C64::new(1.0, 0.0));
        assert!(eval_eisenstein(2, &tau, 1).is_err());
        assert!(eval_eisenstein(7, &tau, 1).is_err());
    }

    #[test]
    fn skew_relation_per_term() {
        let tau = SiegelPoint::new(0.3, 0.1, -0.2, 1.1, 0.2, 0.9).unwrap();
        let s = tau.det_y().sqrt();
        for r in cosets(2).iter() {
            let a = eisenstein_term(10, r, &tau);
            let b = skew_term(11, r, &tau).conj() * s;
            assert!((a - b).norm() <= 1e-14 * a.norm().max(1e-300), "{:?}", r.key);
        }
        let lhs = skew_eisenstein(11, &base(), 2).unwrap().conj();
        assert!((lhs - eval_eisenstein(10, &base(), 2).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn truncation_converges_at_base() {
        let e2 = eval_eisenstein(10, &base(), 2).unwrap();
        let e3 = eval_eisenstein(10, &base(), 3).unwrap();
        assert!((e2 - e3).norm() < 1e-3, "{e2} {e3}");
    }

    #[test]
    fn slash_invariance() {
        let tau = SiegelPoint::new(0.1, 0.05, -0.1, 0.95, 0.1, 1.05).unwrap();
        let e = eval_eisenstein(10, &tau, 2).unwrap();
        for g in [
            SymplecticMatrix::j2(),
            SymplecticMatrix::translation(&Mat2::new(1.0, 0.0, 0.0, -1.0)).unwrap(),
            SymplecticMatrix::gl_embed(&Mat2::new(1.0, 1.0, 0.0, 1.0)).unwrap(),
        ] {
            let gt = crate::symplectic::moebius_act(&g, &tau).unwrap();
            let lhs = eval_eisenstein(10, &gt, 2).unwrap();
            let rhs = automorphy(10, &g, &tau) * e;
            assert!((lhs - rhs).norm() < 1e-3 * rhs.norm(), "{lhs} {rhs}");
        }
    }

    #[test]
    fn parse_index() {
        assert_eq!("1, 0.5, -1".parse::<FourierIndex>().unwrap(), FourierIndex::new(1, 1, -1));
        assert!("1,0.25,0".parse::<FourierIndex>().is_err());
        assert!("1,0".parse::<FourierIndex>().is_err());
    }

    #[test]
    fn signature_and_csv() {
        assert_eq!(FourierIndex::new(1, 1, 1).signature(), Signature::PositiveDefinite);
        assert_eq!(FourierIndex::new(-1, 1, -1).signature(), Signature::NegativeDefinite);
        assert_eq!(FourierIndex::new(1, 0, -1).signature(), Signature::Indefinite);
        assert_eq!(FourierIndex::new(1, 2, 1).signature(), Signature::Degenerate);
        assert_eq!(FourierIndex::box_all(1).len(), 3 * 5 * 3);
        let spec = TorusSpec::new(10, 4, 1).unwrap();
        let r = fourier_table(spec, &[FourierIndex::new(0, 0, 0)], &Mat2::new(1.0, 0.0, 0.0, 1.0)).unwrap();
        let mut buf = Vec::new();
        write_fourier_csv(&r, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("t11,t12,t22,y1,v,y2,re,im,err\n0,0,0,1,0,1,"));
        assert!(TorusSpec::new(10, 5, 1).is_err());
    }

    #[test]
    fn orbits_match_height_truncated_cosets() {
        // Every rank-2 coset of height ≤ 2 lies in an orbit with det c ≤ 8 (= 2·2²), and each orbit
        // appears once.
        let orbits = rank2_orbits(8);
        let keys: std::collections::BTreeSet<_> = orbits.iter().map(|o| (o.c, o.s_num, o.den)).collect();
        assert_eq!(keys.len(), orbits.len());
        assert_eq!(orbits.iter().filter(|o| o.det_c() == 1).count(), 1);
        for r in cosets(2).iter().filter(|r| r.rank_c() == 2) {
            let (h, _) = crate::cosets::hermite_rows(&[vec![r.c[0][0], r.c[0][1], r.d[0][0], r.d[0][1]], vec![r.c[1][0], r.c[1][1], r.d[1][0], r.d[1][1]]]);
            let c = [[h[0][0], h[0][1]], [h[1][0], h[1][1]]];
            let d = [[h[0][2], h[0][3]], [h[1][2], h[1][3]]];
            let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
            // S = c⁻¹ d = adj(c) d / det
            let adj = [[c[1][1], -c[0][1]], [-c[1][0], c[0][0]]];
            let s = |i: usize, j: usize| (adj[i][0] * d[0][j] + adj[i][1] * d[1][j]).rem_euclid(det);
            assert!(det <= 8 && keys.contains(&(c, [s(0, 0), s(0, 1), s(1, 1)], det)), "{r:?}");
        }
    }

    #[test]
    fn constant_term_for_large_y() {
        let spec = TorusSpec::new(10, 8, 1).unwrap();
        let s = 4.0;
        let r = fourier_coefficient(spec, FourierIndex::new(0, 0, 0), &Mat2::new(s, 0.0, 0.0, s)).unwrap();
        assert!((r.value - C64::new(s, 0.0)).norm() < 1e-3 * s, "{:?}", r);
    }
}
