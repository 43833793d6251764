//! The group Sp₂(ℝ), the Siegel upper half space and the Möbius action.

use nalgebra::Matrix4;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::{rat_to_f64, Coeff, Mat2, C64};

/// `J₂ = (0 −I₂; I₂ 0)`.
pub fn j2_matrix() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(0, 2)] = -1.0;
    j[(1, 3)] = -1.0;
    j[(2, 0)] = 1.0;
    j[(3, 1)] = 1.0;
    j
}

/// Checks `ᵗg J₂ g = J₂` entrywise within `tol`, relative to the size of `g`.
pub fn is_symplectic(g: &Matrix4<f64>, tol: f64) -> bool {
    let j = j2_matrix();
    let lhs = g.transpose() * j * g;
    let scale = g.amax().powi(2).max(1.0);
    (lhs - j).amax() <= tol * scale
}

/// A real symplectic 4×4 matrix `(a b; c d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMatrix {
    m: Matrix4<f64>,
}

impl SymplecticMatrix {
    pub const TOL: f64 = 1e-12;

    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        if !is_symplectic(&m, Self::TOL) {
            return domain("matrix is not symplectic");
        }
        Ok(SymplecticMatrix { m })
    }

    pub(crate) fn new_unchecked(m: Matrix4<f64>) -> Self {
        SymplecticMatrix { m }
    }

    pub fn identity() -> Self {
        SymplecticMatrix { m: Matrix4::identity() }
    }

    pub fn j2() -> Self {
        SymplecticMatrix { m: j2_matrix() }
    }

    /// `(I₂ b; 0 I₂)` for symmetric `b`.
    pub fn translation(b: &Mat2<f64>) -> Result<Self> {
        if !b.is_symmetric(1e-15) {
            return domain("translation block must be symmetric");
        }
        let mut m = Matrix4::identity();
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j + 2)] = b.0[i][j];
            }
        }
        Ok(SymplecticMatrix { m })
    }

    /// `(u 0; 0 ᵗu⁻¹)` for invertible `u`.
    pub fn gl_embed(u: &Mat2<f64>) -> Result<Self> {
        if u.det().abs() < 1e-300 {
            return domain("GL-embedding needs an invertible block");
        }
        let dinv = u.inverse().transpose();
        let mut m = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = u.0[i][j];
                m[(i + 2, j + 2)] = dinv.0[i][j];
            }
        }
        Ok(SymplecticMatrix { m })
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    fn block(&self, r: usize, c: usize) -> Mat2<f64> {
        let m = &self.m;
        Mat2::new(m[(r, c)], m[(r, c + 1)], m[(r + 1, c)], m[(r + 1, c + 1)])
    }

    pub fn a(&self) -> Mat2<f64> {
        self.block(0, 0)
    }
    pub fn b(&self) -> Mat2<f64> {
        self.block(0, 2)
    }
    pub fn c(&self) -> Mat2<f64> {
        self.block(2, 0)
    }
    pub fn d(&self) -> Mat2<f64> {
        self.block(2, 2)
    }

    pub fn mul(&self, o: &SymplecticMatrix) -> SymplecticMatrix {
        SymplecticMatrix { m: self.m * o.m }
    }

    pub fn inverse(&self) -> SymplecticMatrix {
        // g⁻¹ = J⁻¹ ᵗg J = (ᵗd −ᵗb; −ᵗc ᵗa)
        let j = j2_matrix();
        SymplecticMatrix { m: -(j * self.m.transpose() * j) }
    }

    /// The cocycle `j(g, τ) = cτ + d`.
    pub fn cocycle(&self, tau: &Mat2<C64>) -> Mat2<C64> {
        let c = Mat2::from_real(&self.c());
        let d = Mat2::from_real(&self.d());
        c.mul(tau).add(&d)
    }
}

/// A point `τ = x + iy` of the genus-2 Siegel upper half space.
#[derive(Clone, Debug, PartialEq)]
pub struct SiegelPoint {
    x: Mat2<f64>,
    y: Mat2<f64>,
}

impl SiegelPoint {
    /// Builds `τ` from the entries `x = (x1 u; u x2)`, `y = (y1 v; v y2)`.
    pub fn new(x1: f64, u: f64, x2: f64, y1: f64, v: f64, y2: f64) -> Result<Self> {
        let all = [x1, u, x2, y1, v, y2];
        if all.iter().any(|a| !a.is_finite()) {
            return domain("non-finite coordinate");
        }
        if !(y1 > 0.0 && y1 * y2 - v * v > 0.0) {
            return domain(format!("imaginary part not positive definite (y1={y1}, v={v}, y2={y2})"));
        }
        Ok(SiegelPoint { x: Mat2::new(x1, u, u, x2), y: Mat2::new(y1, v, v, y2) })
    }

    pub fn from_coords(c: [f64; 6]) -> Result<Self> {
        Self::new(c[0], c[1], c[2], c[3], c[4], c[5])
    }

    /// `i·I₂`.
    pub fn base() -> Self {
        SiegelPoint { x: Mat2::new(0.0, 0.0, 0.0, 0.0), y: Mat2::new(1.0, 0.0, 0.0, 1.0) }
    }

    /// Builds a point from a complex matrix, symmetrizing rounding noise.
    pub fn from_tau(tau: &Mat2<C64>) -> Result<Self> {
        let off = (tau.0[0][1] + tau.0[1][0]) * 0.5;
        Self::new(tau.0[0][0].re, off.re, tau.0[1][1].re, tau.0[0][0].im, off.im, tau.0[1][1].im)
    }

    pub fn x(&self) -> &Mat2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Mat2<f64> {
        &self.y
    }

    /// Coordinates `(x1, u, x2, y1, v, y2)`.
    pub fn coords(&self) -> [f64; 6] {
        [self.x.0[0][0], self.x.0[0][1], self.x.0[1][1], self.y.0[0][0], self.y.0[0][1], self.y.0[1][1]]
    }

    pub fn tau(&self) -> Mat2<C64> {
        Mat2::new(
            C64::new(self.x.0[0][0], self.y.0[0][0]),
            C64::new(self.x.0[0][1], self.y.0[0][1]),
            C64::new(self.x.0[1][0], self.y.0[1][0]),
            C64::new(self.x.0[1][1], self.y.0[1][1]),
        )
    }

    pub fn det_y(&self) -> f64 {
        self.y.det()
    }
}

/// `g·τ = (aτ + b)(cτ + d)⁻¹`.
pub fn moebius_act(g: &SymplecticMatrix, tau: &SiegelPoint) -> Result<SiegelPoint> {
    let t = tau.tau();
    let num = Mat2::from_real(&g.a()).mul(&t).add(&Mat2::from_real(&g.b()));
    let den = g.cocycle(&t);
    let det = den.det();
    if det.norm() < 1e-300 {
        return domain("cτ + d is singular");
    }
    SiegelPoint::from_tau(&num.mul(&den.inverse()))
}

/// Möbius action over an arbitrary coefficient ring (used with jets).
/// Returns `(g·τ, cτ + d)`.
pub fn moebius_generic<T: Coeff>(g: &SymplecticMatrix, tau: &Mat2<T>) -> (Mat2<T>, Mat2<T>) {
    let t0 = &tau.0[0][0];
    let lift = |m: Mat2<f64>| m.map(|x| t0.from_f64_like(*x));
    let num = lift(g.a()).mul(tau).add(&lift(g.b()));
    let den = lift(g.c()).mul(tau).add(&lift(g.d()));
    (num.mul(&den.inverse()), den)
}

/// Positive definite square root of a 2×2 SPD matrix:
/// `√y = (y + √det y · I) / √(tr y + 2√det y)`.
pub fn spd_sqrt(y: &Mat2<f64>) -> Result<Mat2<f64>> {
    let det = y.det();
    if !(y.0[0][0] > 0.0 && det > 0.0) {
        return domain("matrix is not positive definite");
    }
    let s = det.sqrt();
    let t = (y.trace() + 2.0 * s).sqrt();
    Ok(Mat2::new((y.0[0][0] + s) / t, y.0[0][1] / t, y.0[1][0] / t, (y.0[1][1] + s) / t))
}

/// `g_τ = (√y  x√y⁻¹; 0  √y⁻¹)`, which maps `iI₂` to `τ`.
pub fn base_point_transfer(tau: &SiegelPoint) -> Result<SymplecticMatrix> {
    let r = spd_sqrt(tau.y())?;
    let rinv = r.inverse();
    let top_right = tau.x().mul(&rinv);
    let mut m = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = r.0[i][j];
            m[(i, j + 2)] = top_right.0[i][j];
            m[(i + 2, j + 2)] = rinv.0[i][j];
        }
    }
    Ok(SymplecticMatrix::new_unchecked(m))
}

/// Exact rational 4×4 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMatrix4(pub [[BigRational; 4]; 4]);

impl ExactMatrix4 {
    pub fn from_ints(m: [[i64; 4]; 4]) -> Self {
        ExactMatrix4(m.map(|row| row.map(|x| BigRational::from_integer(BigInt::from(x)))))
    }

    pub fn identity() -> Self {
        let mut m = [[0i64; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1;
        }
        Self::from_ints(m)
    }

    pub fn j2() -> Self {
        Self::from_ints([[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]])
    }

    pub fn mul(&self, o: &ExactMatrix4) -> ExactMatrix4 {
        let mut out: [[BigRational; 4]; 4] = Default::default();
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                let mut acc = BigRational::zero();
                for k in 0..4 {
                    acc += &self.0[i][k] * &o.0[k][j];
                }
                *e = acc;
            }
        }
        ExactMatrix4(out)
    }

    pub fn transpose(&self) -> ExactMatrix4 {
        let mut out: [[BigRational; 4]; 4] = Default::default();
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.0[j][i].clone();
            }
        }
        ExactMatrix4(out)
    }

    pub fn to_f64(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| rat_to_f64(&self.0[i][j]))
    }

    pub fn det(&self) -> BigRational {
        // cofactor expansion is fine at this size
        fn det_n(m: &[Vec<BigRational>]) -> BigRational {
            if m.len() == 1 {
                return m[0][0].clone();
            }
            let mut acc = BigRational::zero();
            for j in 0..m.len() {
                let minor: Vec<Vec<BigRational>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
                    .collect();
                let term = &m[0][j] * det_n(&minor);
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
        let rows: Vec<Vec<BigRational>> = self.0.iter().map(|r| r.to_vec()).collect();
        det_n(&rows)
    }
}

/// Exact check of `ᵗg J₂ g = J₂`.
pub fn is_symplectic_exact(g: &ExactMatrix4) -> bool {
    let j = ExactMatrix4::j2();
    g.transpose().mul(&j).mul(g) == j
}

/// Generators of Sp₂(ℤ) used for random test matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    /// `(I b; 0 I)` with symmetric integer `b = (b1 b2; b2 b3)`.
    Translation([i64; 3]),
    /// `(u 0; 0 ᵗu⁻¹)` with `u ∈ GL₂(ℤ)` given row-major.
    GlEmbed([i64; 4]),
    J2,
}

impl Generator {
    pub fn exact(&self) -> ExactMatrix4 {
        match *self {
            Generator::Translation([b1, b2, b3]) => {
                ExactMatrix4::from_ints([[1, 0, b1, b2], [0, 1, b2, b3], [0, 0, 1, 0], [0, 0, 0, 1]])
            }
            Generator::GlEmbed([a, b, c, d]) => {
                let det = a * d - b * c;
                assert!(det == 1 || det == -1, "GL₂(ℤ) element required");
                // ᵗu⁻¹ = (d −c; −b a) / det
                let (e, f, g, h) = (d * det, -c * det, -b * det, a * det);
                ExactMatrix4::from_ints([[a, b, 0, 0], [c, d, 0, 0], [0, 0, e, f], [0, 0, g, h]])
            }
            Generator::J2 => ExactMatrix4::j2(),
        }
    }

    pub fn random<R: Rng>(rng: &mut R) -> Generator {
        match rng.gen_range(0..3) {
            0 => Generator::Translation([rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2)]),
            1 => {
                const UNITS: [[i64; 4]; 6] =
                    [[1, 1, 0, 1], [1, 0, 1, 1], [0, 1, 1, 0], [1, 0, 0, -1], [0, 1, -1, 0], [1, -1, 0, 1]];
                Generator::GlEmbed(UNITS[rng.gen_range(0..UNITS.len())])
            }
            _ => Generator::J2,
        }
    }
}

/// Product of `len` random generators, exactly.
pub fn random_word<R: Rng>(rng: &mut R, len: usize) -> (Vec<Generator>, ExactMatrix4) {
    let mut word = Vec::with_capacity(len);
    let mut g = ExactMatrix4::identity();
    for _ in 0..len {
        let s = Generator::random(rng);
        g = g.mul(&s.exact());
        word.push(s);
    }
    (word, g)
}

impl From<&ExactMatrix4> for SymplecticMatrix {
    fn from(e: &ExactMatrix4) -> Self {
        SymplecticMatrix::new_unchecked(e.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt() -> SiegelPoint {
        SiegelPoint::new(0.3, -0.1, 0.7, 1.2, 0.25, 0.9).unwrap()
    }

    #[test]
    fn symplectic_examples() {
        assert!(is_symplectic(&Matrix4::identity(), 0.0));
        assert!(is_symplectic(&j2_matrix(), 0.0));
        let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(2.0, 1.0, 1.0, 1.0));
        assert!(!is_symplectic(&d, 1e-12));
        assert!(is_symplectic_exact(&ExactMatrix4::j2()));
    }

    #[test]
    fn moebius_examples() {
        let t = pt();
        let id = moebius_act(&SymplecticMatrix::identity(), &t).unwrap();
        assert!(id.coords().iter().zip(t.coords()).all(|(a, b)| (a - b).abs() < 1e-15));
        let j = moebius_act(&SymplecticMatrix::j2(), &SiegelPoint::base()).unwrap();
        assert!(j.coords().iter().zip(SiegelPoint::base().coords()).all(|(a, b)| (a - b).abs() < 1e-15));
        let b = Mat2::new(1.0, -2.0, -2.0, 3.0);
        let s = moebius_act(&SymplecticMatrix::translation(&b).unwrap(), &t).unwrap();
        let c = t.coords();
        let expect = [c[0] + 1.0, c[1] - 2.0, c[2] + 3.0, c[3], c[4], c[5]];
        assert!(s.coords().iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn base_point_examples() {
        assert_eq!(base_point_transfer(&SiegelPoint::base()).unwrap().matrix(), &Matrix4::identity());
        let t = SiegelPoint::new(0.5, 0.25, -1.0, 1.0, 0.0, 1.0).unwrap();
        let g = base_point_transfer(&t).unwrap();
        assert_eq!(g.b(), Mat2::new(0.5, 0.25, 0.25, -1.0));
        assert_eq!(g.a(), Mat2::new(1.0, 0.0, 0.0, 1.0));
        let t = SiegelPoint::new(0.0, 0.0, 0.0, 4.0, 0.0, 1.0).unwrap();
        let g = base_point_transfer(&t).unwrap();
        let expect = Matrix4::from_diagonal(&nalgebra::Vector4::new(2.0, 1.0, 0.5, 1.0));
        assert!((g.matrix() - expect).amax() < 1e-15);
        let back = moebius_act(&base_point_transfer(&pt()).unwrap(), &SiegelPoint::base()).unwrap();
        assert!(back.coords().iter().zip(pt().coords()).all(|(a, b)| (a - b).abs() < 1e-13));
        assert!(SiegelPoint::new(0.0, 0.0, 0.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn random_words_are_exactly_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let len = rng.gen_range(1..=6);
            let (_, g) = random_word(&mut rng, len);
            assert!(is_symplectic_exact(&g));
            assert_eq!(g.det(), crate::scalar::rat(1, 1));
        }
    }

    #[test]
    fn action_is_a_group_action_and_scales_det_y() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = pt();
        for _ in 0..200 {
            let (_, g) = random_word(&mut rng, 3);
            let (_, h) = random_word(&mut rng, 3);
            let (g, h) = (SymplecticMatrix::from(&g), SymplecticMatrix::from(&h));
            let lhs = moebius_act(&g.mul(&h), &t).unwrap();
            let rhs = moebius_act(&g, &moebius_act(&h, &t).unwrap()).unwrap();
            let scale = lhs.coords().iter().map(|a| a.abs()).fold(1.0, f64::max);
            assert!(lhs.coords().iter().zip(rhs.coords()).all(|(a, b)| (a - b).abs() < 1e-9 * scale));
            let j = g.mul(&h).cocycle(&t.tau()).det();
            let expect = t.det_y() / j.norm_sqr();
            assert!((lhs.det_y() - expect).abs() < 1e-10 * expect);
        }
    }
}
