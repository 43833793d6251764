//! The complex Lie algebra sp₄ with its Cartan decomposition `𝔨 ⊕ 𝔪` and a named basis.

use std::fmt;

use num_traits::Zero;
use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::exact::{nullspace, solve};
use crate::scalar::{qi, qi_one, qi_zero, Coeff, QI};

/// A 4×4 matrix over the Gaussian rationals.
#[derive(Clone, PartialEq)]
pub struct LieElement(pub [[QI; 4]; 4]);

impl fmt::Debug for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .0
            .iter()
            .map(|r| r.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

impl LieElement {
    pub fn zero() -> Self {
        LieElement(std::array::from_fn(|_| std::array::from_fn(|_| qi_zero())))
    }

    pub fn from_fn<F: Fn(usize, usize) -> QI>(f: F) -> Self {
        LieElement(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    /// From Gaussian-integer entries `(re, im)`.
    pub fn from_ints(m: [[(i64, i64); 4]; 4]) -> Self {
        Self::from_fn(|i, j| qi(m[i][j].0, m[i][j].1))
    }

    fn from_vec(v: &[QI]) -> Self {
        Self::from_fn(|i, j| v[4 * i + j].clone())
    }

    pub fn to_vec(&self) -> Vec<QI> {
        self.0.iter().flatten().cloned().collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j].clone() + o.0[i][j].clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j].clone() - o.0[i][j].clone())
    }

    pub fn scale(&self, s: &QI) -> Self {
        Self::from_fn(|i, j| self.0[i][j].clone() * s.clone())
    }

    pub fn matmul(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| (0..4).fold(qi_zero(), |acc, k| acc + self.0[i][k].clone() * o.0[k][j].clone()))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_zero())
    }

    /// `ᵗX J₂ + J₂ X = 0`.
    pub fn is_in_sp4(&self) -> bool {
        let j = j2();
        self.transpose().matmul(&j).add(&j.matmul(self)).is_zero()
    }
}

fn j2() -> LieElement {
    LieElement::from_ints([
        [(0, 0), (0, 0), (-1, 0), (0, 0)],
        [(0, 0), (0, 0), (0, 0), (-1, 0)],
        [(1, 0), (0, 0), (0, 0), (0, 0)],
        [(0, 0), (1, 0), (0, 0), (0, 0)],
    ])
}

pub fn bracket(x: &LieElement, y: &LieElement) -> LieElement {
    x.matmul(y).sub(&y.matmul(x))
}

/// `θ(X) = −ᵗX`.
pub fn cartan_involution(x: &LieElement) -> LieElement {
    x.transpose().scale(&qi(-1, 0))
}

pub const NAMES: [&str; 10] = ["h_c", "h_k", "e_k", "f_k", "h_m+", "e_m+", "f_m+", "h_m-", "e_m-", "f_m-"];

/// Named basis with its structure constants.
#[derive(Clone, Debug)]
pub struct BasisTable {
    pub elements: Vec<LieElement>,
    /// `table[i][j]` = coordinates of `[b_i, b_j]` in the basis.
    pub table: Vec<Vec<Vec<QI>>>,
}

impl BasisTable {
    pub fn index(name: &str) -> Option<usize> {
        NAMES.iter().position(|n| *n == name)
    }

    pub fn get(&self, name: &str) -> &LieElement {
        &self.elements[Self::index(name).unwrap_or_else(|| panic!("unknown basis element {name}"))]
    }

    /// Coordinates of `x` in the basis, if `x ∈ sp₄`.
    pub fn coords(&self, x: &LieElement) -> Option<Vec<QI>> {
        let cols: Vec<Vec<QI>> = self.elements.iter().map(|e| e.to_vec()).collect();
        let m: Vec<Vec<QI>> = (0..16).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
        solve(&m, &x.to_vec()).filter(|c| self.combine(c) == *x)
    }

    pub fn combine(&self, c: &[QI]) -> LieElement {
        self.elements.iter().zip(c).fold(LieElement::zero(), |acc, (e, s)| acc.add(&e.scale(s)))
    }

    pub fn bracket_coords(&self, a: &str, b: &str) -> &[QI] {
        let (i, j) = (Self::index(a).expect("name"), Self::index(b).expect("name"));
        &self.table[i][j]
    }
}

/// Matrix (16 rows per map) of the linear conditions defining a joint eigenspace inside sp₄.
fn eigen_conditions(pairs: &[(&LieElement, QI)]) -> Vec<Vec<QI>> {
    let units: Vec<LieElement> = (0..16)
        .map(|n| LieElement::from_fn(|i, j| if 4 * i + j == n { qi_one() } else { qi_zero() }))
        .collect();
    let j = j2();
    let mut maps: Vec<Box<dyn Fn(&LieElement) -> LieElement>> =
        vec![Box::new(move |x: &LieElement| x.transpose().matmul(&j).add(&j.matmul(x)))];
    for (h, lam) in pairs {
        let h = (*h).clone();
        let lam = lam.clone();
        maps.push(Box::new(move |x: &LieElement| bracket(&h, x).sub(&x.scale(&lam))));
    }
    let mut rows = Vec::new();
    for f in &maps {
        let images: Vec<Vec<QI>> = units.iter().map(|u| f(u).to_vec()).collect();
        for r in 0..16 {
            rows.push(images.iter().map(|im| im[r].clone()).collect());
        }
    }
    rows
}

fn joint_eigenvector(h_c: &LieElement, h_k: &LieElement, c: i64, k: i64) -> Result<LieElement> {
    let ns = nullspace(&eigen_conditions(&[(h_c, qi(c, 0)), (h_k, qi(k, 0))]), &qi_zero());
    if ns.len() != 1 {
        return Err(Error::Internal(format!("joint eigenspace ({c},{k}) has dimension {}", ns.len())));
    }
    Ok(normalize_leading(LieElement::from_vec(&ns[0])))
}

/// Scales so that the first nonzero entry (row-major) equals 1.
fn normalize_leading(x: LieElement) -> LieElement {
    let lead = x.0.iter().flatten().find(|z| !z.is_zero()).cloned().expect("nonzero element");
    x.scale(&lead.recip())
}

/// Builds the basis from `h_c = −iJ₂` and `h_k = −i(0 −D; D 0)`, `D = diag(1, −1)`.
pub fn construct_basis() -> Result<BasisTable> {
    let h_c = j2().scale(&qi(0, -1));
    let h_k = LieElement::from_ints([
        [(0, 0), (0, 0), (-1, 0), (0, 0)],
        [(0, 0), (0, 0), (0, 0), (1, 0)],
        [(1, 0), (0, 0), (0, 0), (0, 0)],
        [(0, 0), (-1, 0), (0, 0), (0, 0)],
    ])
    .scale(&qi(0, -1));
    let e_k = joint_eigenvector(&h_c, &h_k, 0, 2)?;
    let f_raw = joint_eigenvector(&h_c, &h_k, 0, -2)?;
    // fix the scale of f_k by [e_k, f_k] = h_k
    let br = bracket(&e_k, &f_raw);
    let s = ratio(&h_k, &br)?;
    let f_k = f_raw.scale(&s);
    let mut elements = vec![h_c.clone(), h_k.clone(), e_k, f_k.clone()];
    for sign in [2, -2] {
        let e_m = joint_eigenvector(&h_c, &h_k, sign, 2)?;
        let h_m = bracket(&f_k, &e_m).scale(&qi(-1, 0));
        let f_m = bracket(&f_k, &h_m).scale(&QI::new(crate::scalar::rat(1, 2), num_rational::BigRational::zero()));
        elements.extend([h_m, e_m, f_m]);
    }
    let mut t = BasisTable { elements, table: vec![] };
    let n = t.elements.len();
    let mut table = vec![vec![vec![]; n]; n];
    for i in 0..n {
        for j in 0..n {
            table[i][j] = t
                .coords(&bracket(&t.elements[i], &t.elements[j]))
                .ok_or_else(|| Error::Internal("bracket left sp₄".into()))?;
        }
    }
    t.table = table;
    Ok(t)
}

/// `a = s·b` for a scalar `s`.
fn ratio(a: &LieElement, b: &LieElement) -> Result<QI> {
    let (va, vb) = (a.to_vec(), b.to_vec());
    let idx = vb.iter().position(|z| !z.is_zero()).ok_or_else(|| Error::Internal("zero bracket".into()))?;
    let s = va[idx].clone() * vb[idx].recip();
    if b.scale(&s) != *a {
        return Err(Error::Internal("elements are not proportional".into()));
    }
    Ok(s)
}

pub static BASIS: Lazy<BasisTable> = Lazy::new(|| construct_basis().expect("sp₄ basis construction"));

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rref;
    use crate::scalar::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn b(name: &str) -> &'static LieElement {
        BASIS.get(name)
    }

    #[test]
    fn quoted_relations() {
        assert!(bracket(b("e_k"), b("e_m+")).is_zero());
        assert_eq!(bracket(b("e_k"), b("h_m+")), b("e_m+").scale(&qi(-2, 0)));
        assert_eq!(bracket(b("h_c"), b("e_m-")), b("e_m-").scale(&qi(-2, 0)));
        for n in ["h_m+", "e_m+", "f_m+"] {
            assert_eq!(bracket(b("h_c"), b(n)), b(n).scale(&qi(2, 0)));
        }
        for n in ["h_m-", "e_m-", "f_m-"] {
            assert_eq!(bracket(b("h_c"), b(n)), b(n).scale(&qi(-2, 0)));
        }
        for (n, w) in [("e_m+", 2), ("h_m+", 0), ("f_m+", -2), ("e_m-", 2), ("h_m-", 0), ("f_m-", -2)] {
            assert_eq!(bracket(b("h_k"), b(n)), b(n).scale(&qi(w, 0)));
        }
        assert_eq!(bracket(b("e_k"), b("f_k")), *b("h_k"));
        assert_eq!(bracket(b("h_k"), b("e_k")), b("e_k").scale(&qi(2, 0)));
        // e-elements lead with 1
        for n in ["e_k", "e_m+", "e_m-"] {
            let lead = b(n).0.iter().flatten().find(|z| !z.is_zero()).unwrap().clone();
            assert_eq!(lead, qi(1, 0));
        }
    }

    #[test]
    fn cartan_decomposition() {
        let mut k_dim = 0;
        let mut m_dim = 0;
        for (i, e) in BASIS.elements.iter().enumerate() {
            assert!(e.is_in_sp4());
            let t = cartan_involution(e);
            if i < 4 {
                assert_eq!(t, *e, "{}", NAMES[i]);
                // 𝔨 = (a b; −b a) with a antisymmetric
                let m = &e.0;
                for r in 0..2 {
                    for c in 0..2 {
                        assert_eq!(m[r][c], m[r + 2][c + 2]);
                        assert_eq!(m[r][c + 2], -m[r + 2][c].clone());
                        assert_eq!(m[r][c], -m[c][r].clone());
                    }
                }
                k_dim += 1;
            } else {
                assert_eq!(t, e.scale(&qi(-1, 0)), "{}", NAMES[i]);
                m_dim += 1;
            }
        }
        assert_eq!((k_dim, m_dim), (4, 6));
        let mut rows: Vec<Vec<QI>> = BASIS.elements.iter().map(|e| e.to_vec()).collect();
        assert_eq!(rref(&mut rows).len(), 10);
    }

    fn random_element(rng: &mut ChaCha8Rng) -> LieElement {
        let c: Vec<QI> =
            (0..10).map(|_| QI::new(rat(rng.gen_range(-4..=4), rng.gen_range(1..=3)), rat(rng.gen_range(-4..=4), 1))).collect();
        BASIS.combine(&c)
    }

    #[test]
    fn jacobi_and_involution_on_random_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let (x, y, z) = (random_element(&mut rng), random_element(&mut rng), random_element(&mut rng));
            let j = bracket(&x, &bracket(&y, &z)).add(&bracket(&y, &bracket(&z, &x))).add(&bracket(&z, &bracket(&x, &y)));
            assert!(j.is_zero());
            assert!(bracket(&x, &y).is_in_sp4());
            assert_eq!(bracket(&x, &y), bracket(&y, &x).scale(&qi(-1, 0)));
        }
        for _ in 0..50 {
            let x = random_element(&mut rng);
            assert_eq!(cartan_involution(&cartan_involution(&x)), x);
        }
    }

    #[test]
    fn bracket_table_matches_direct_brackets() {
        let t = &*BASIS;
        assert_eq!(t.bracket_coords("e_k", "h_m+")[BasisTable::index("e_m+").unwrap()], qi(-2, 0));
        for i in 0..10 {
            for j in 0..10 {
                assert_eq!(t.combine(&t.table[i][j]), bracket(&t.elements[i], &t.elements[j]));
            }
        }
    }
}
