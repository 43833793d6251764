//! Representatives of Γ∞ \ Sp₂(ℤ), where Γ∞ is the Siegel parabolic `(a b; 0 d)`.
//!
//! The coset of `γ = (a b; c d)` only depends on the bottom row `(c, d)` up to
//! left multiplication by `GL₂(ℤ)`. The row Hermite normal form of the 2×4
//! matrix `(c | d)` is used as the canonical key.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::Matrix4;
use num_integer::Integer;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::symplectic::{is_symplectic_exact, ExactMatrix4, SymplecticMatrix};

pub type IntMat2 = [[i64; 2]; 2];

/// Unimodular row reduction: returns `(h, u)` with `u·m = h` in row Hermite normal form
/// (positive pivots, entries above each pivot reduced into `[0, pivot)`).
pub fn hermite_rows(m: &[Vec<i64>]) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut h: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..rows).map(|i| (0..rows).map(|j| (i == j) as i128).collect()).collect();

    let combine = |mat: &mut Vec<Vec<i128>>, i: usize, j: usize, (p, q, r, s): (i128, i128, i128, i128)| {
        // row_i, row_j ← p·row_i + q·row_j, r·row_i + s·row_j
        for c in 0..mat[i].len() {
            let (a, b) = (mat[i][c], mat[j][c]);
            mat[i][c] = p * a + q * b;
            mat[j][c] = r * a + s * b;
        }
    };

    let mut pr = 0;
    for col in 0..cols {
        if pr == rows {
            break;
        }
        for r in pr + 1..rows {
            let (a, b) = (h[pr][col], h[r][col]);
            if b == 0 {
                continue;
            }
            let eg = a.extended_gcd(&b);
            let (g, x, y) = (eg.gcd, eg.x, eg.y);
            let t = (x, y, -b / g, a / g);
            combine(&mut h, pr, r, t);
            combine(&mut u, pr, r, t);
        }
        if h[pr][col] == 0 {
            continue;
        }
        if h[pr][col] < 0 {
            h[pr].iter_mut().for_each(|x| *x = -*x);
            u[pr].iter_mut().for_each(|x| *x = -*x);
        }
        let p = h[pr][col];
        for r in 0..pr {
            let f = Integer::div_floor(&h[r][col], &p);
            if f != 0 {
                for c in 0..cols {
                    h[r][c] -= f * h[pr][c];
                }
                for c in 0..rows {
                    u[r][c] -= f * u[pr][c];
                }
            }
        }
        pr += 1;
    }
    let back = |m: Vec<Vec<i128>>| -> Vec<Vec<i64>> {
        m.into_iter().map(|r| r.into_iter().map(|x| i64::try_from(x).expect("HNF overflow")).collect()).collect()
    };
    (back(h), back(u))
}

fn mul2(a: &IntMat2, b: &IntMat2) -> IntMat2 {
    let mut o = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            o[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    o
}

fn tr2(a: &IntMat2) -> IntMat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn det2(a: &IntMat2) -> i64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// `c ᵗd` symmetric.
pub fn is_symmetric_pair(c: &IntMat2, d: &IntMat2) -> bool {
    let p = mul2(c, &tr2(d));
    p[0][1] == p[1][0]
}

/// The 2×4 matrix `(c | d)` has coprime 2×2 minors.
pub fn is_coprime_pair(c: &IntMat2, d: &IntMat2) -> bool {
    let m = [[c[0][0], c[0][1], d[0][0], d[0][1]], [c[1][0], c[1][1], d[1][0], d[1][1]]];
    let mut g = 0i64;
    for i in 0..4 {
        for j in i + 1..4 {
            g = g.gcd(&(m[0][i] * m[1][j] - m[0][j] * m[1][i]));
            if g == 1 {
                return true;
            }
        }
    }
    g == 1
}

/// Canonical key of the class of `(c, d)` under left `GL₂(ℤ)` multiplication.
pub fn canonical_key(c: &IntMat2, d: &IntMat2) -> [i64; 8] {
    let m = vec![vec![c[0][0], c[0][1], d[0][0], d[0][1]], vec![c[1][0], c[1][1], d[1][0], d[1][1]]];
    let (h, _) = hermite_rows(&m);
    let mut k = [0; 8];
    for i in 0..2 {
        for j in 0..4 {
            k[4 * i + j] = h[i][j];
        }
    }
    k
}

/// Completes a symmetric coprime pair to an element `(a b; c d)` of Sp₂(ℤ).
pub fn complete(c: &IntMat2, d: &IntMat2) -> Result<[[i64; 4]; 4]> {
    if !is_symmetric_pair(c, d) || !is_coprime_pair(c, d) {
        return Err(Error::Domain(format!("({c:?}, {d:?}) is not a symmetric coprime pair")));
    }
    // Solve (a0 | b0)·(ᵗd ; −ᵗc) = I₂ by row-reducing the 4×2 stack.
    let n: Vec<Vec<i64>> = vec![
        vec![d[0][0], d[1][0]],
        vec![d[0][1], d[1][1]],
        vec![-c[0][0], -c[1][0]],
        vec![-c[0][1], -c[1][1]],
    ];
    let (h, w) = hermite_rows(&n);
    if h[0] != vec![1, 0] || h[1] != vec![0, 1] {
        return Err(Error::Internal("primitive pair did not reduce to the identity".into()));
    }
    let a0: IntMat2 = [[w[0][0], w[0][1]], [w[1][0], w[1][1]]];
    let b0: IntMat2 = [[w[0][2], w[0][3]], [w[1][2], w[1][3]]];
    // a0 ᵗb0 − b0 ᵗa0 = (0 μ; −μ 0); shift by s = (0 0; −μ 0).
    let mu = mul2(&a0, &tr2(&b0))[0][1] - mul2(&b0, &tr2(&a0))[0][1];
    let s: IntMat2 = [[0, 0], [-mu, 0]];
    let sc = mul2(&s, c);
    let sd = mul2(&s, d);
    let mut g = [[0i64; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = a0[i][j] + sc[i][j];
            g[i][j + 2] = b0[i][j] + sd[i][j];
            g[i + 2][j] = c[i][j];
            g[i + 2][j + 2] = d[i][j];
        }
    }
    if !is_symplectic_exact(&ExactMatrix4::from_ints(g)) {
        return Err(Error::Internal(format!("completion of ({c:?}, {d:?}) failed")));
    }
    Ok(g)
}

/// One coset of Γ∞ \ Sp₂(ℤ).
#[derive(Clone, Debug, PartialEq)]
pub struct CosetRep {
    pub c: IntMat2,
    pub d: IntMat2,
    /// Smallest max-entry of any `(c, d)` in the class (0 for the identity coset).
    pub height: i64,
    pub key: [i64; 8],
    witness: [[i64; 4]; 4],
}

impl CosetRep {
    fn build(c: IntMat2, d: IntMat2, height: i64) -> Result<Self> {
        let witness = complete(&c, &d)?;
        Ok(CosetRep { c, d, height, key: canonical_key(&c, &d), witness })
    }

    pub fn identity() -> Self {
        Self::build([[0, 0], [0, 0]], [[1, 0], [0, 1]], 0).expect("identity completes")
    }

    pub fn witness_ints(&self) -> &[[i64; 4]; 4] {
        &self.witness
    }

    pub fn witness(&self) -> SymplecticMatrix {
        SymplecticMatrix::new_unchecked(Matrix4::from_fn(|i, j| self.witness[i][j] as f64))
    }

    pub fn rank_c(&self) -> usize {
        if det2(&self.c) != 0 {
            2
        } else if self.c.iter().flatten().any(|&x| x != 0) {
            1
        } else {
            0
        }
    }
}

fn max_abs(c: &IntMat2, d: &IntMat2) -> i64 {
    c.iter().chain(d.iter()).flatten().map(|x| x.abs()).max().unwrap_or(0)
}

fn box_mats(b: i64) -> Vec<IntMat2> {
    let r = -b..=b;
    let mut out = Vec::new();
    for p in r.clone() {
        for q in r.clone() {
            for s in r.clone() {
                for t in r.clone() {
                    out.push([[p, q], [s, t]]);
                }
            }
        }
    }
    out
}

/// All cosets having a representative with entries bounded by `height_bound`,
/// ordered by height and then by canonical key. The identity coset is always first.
pub fn enumerate_cosets(height_bound: u32) -> Vec<CosetRep> {
    let b = height_bound as i64;
    let mats = box_mats(b);
    let found: Vec<([i64; 8], (i64, IntMat2, IntMat2))> = mats
        .par_iter()
        .flat_map_iter(|c| {
            let mats = &mats;
            mats.iter().filter_map(move |d| {
                if !is_symmetric_pair(c, d) || !is_coprime_pair(c, d) {
                    return None;
                }
                Some((canonical_key(c, d), (max_abs(c, d), *c, *d)))
            })
        })
        .collect();
    let mut classes: BTreeMap<[i64; 8], (i64, IntMat2, IntMat2)> = BTreeMap::new();
    for (k, v) in found {
        classes.entry(k).and_modify(|e| if v < *e { *e = v }).or_insert(v);
    }
    let id_key = CosetRep::identity().key;
    let mut out: Vec<CosetRep> = classes
        .into_iter()
        .filter(|(k, _)| *k != id_key)
        .map(|(_, (h, c, d))| CosetRep::build(c, d, h).expect("enumerated pair completes"))
        .collect();
    out.sort_by(|x, y| (x.height, x.key).cmp(&(y.height, y.key)));
    out.insert(0, CosetRep::identity());
    out
}

/// CSV with columns `c11,c12,c21,c22,d11,d12,d21,d22`.
pub fn write_csv<W: Write>(reps: &[CosetRep], mut w: W) -> std::io::Result<()> {
    writeln!(w, "c11,c12,c21,c22,d11,d12,d21,d22")?;
    for r in reps {
        let e: Vec<String> = r.c.iter().chain(r.d.iter()).flatten().map(|x| x.to_string()).collect();
        writeln!(w, "{}", e.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn height_zero_is_identity_only() {
        let reps = enumerate_cosets(0);
        assert_eq!(reps.len(), 1);
        assert_eq!(reps[0].c, [[0, 0], [0, 0]]);
        assert_eq!(reps[0].d, [[1, 0], [0, 1]]);
    }

    /// Independent count: group the box pairs into orbits by explicitly applying
    /// GL₂(ℤ) elements and checking whether one pair maps onto another.
    fn orbit_count(b: i64) -> usize {
        let mats = box_mats(b);
        let mut pairs = Vec::new();
        for c in &mats {
            for d in &mats {
                if is_symmetric_pair(c, d) && is_coprime_pair(c, d) {
                    pairs.push((*c, *d));
                }
            }
        }
        // (c',d') = u(c,d) iff (c'|d') has the same row space as (c|d); test by solving
        // for u rationally on a pivot 2×2 block and checking integrality.
        let same = |p: &(IntMat2, IntMat2), q: &(IntMat2, IntMat2)| -> bool {
            let m = |x: &(IntMat2, IntMat2)| [[x.0[0][0], x.0[0][1], x.1[0][0], x.1[0][1]], [x.0[1][0], x.0[1][1], x.1[1][0], x.1[1][1]]];
            let (mp, mq) = (m(p), m(q));
            for i in 0..4 {
                for j in i + 1..4 {
                    let blk = [[mp[0][i], mp[0][j]], [mp[1][i], mp[1][j]]];
                    let det = det2(&blk);
                    if det == 0 {
                        continue;
                    }
                    // u = Q_blk · P_blk⁻¹, must be integral, unimodular and map all columns
                    let qb = [[mq[0][i], mq[0][j]], [mq[1][i], mq[1][j]]];
                    let adj = [[blk[1][1], -blk[0][1]], [-blk[1][0], blk[0][0]]];
                    let num = mul2(&qb, &adj);
                    if num.iter().flatten().any(|x| x % det != 0) {
                        return false;
                    }
                    let u = num.map(|r| r.map(|x| x / det));
                    if det2(&u).abs() != 1 {
                        return false;
                    }
                    return (0..4).all(|k| (0..2).all(|r| u[r][0] * mp[0][k] + u[r][1] * mp[1][k] == mq[r][k]));
                }
            }
            false
        };
        let mut reps: Vec<(IntMat2, IntMat2)> = Vec::new();
        for p in &pairs {
            if !reps.iter().any(|r| same(r, p)) {
                reps.push(*p);
            }
        }
        reps.len()
    }

    #[test]
    fn height_one_matches_orbit_oracle() {
        let reps = enumerate_cosets(1);
        assert_eq!(reps.len(), orbit_count(1));
        assert_eq!(reps.len(), 68);
        let keys: BTreeSet<_> = reps.iter().map(|r| r.key).collect();
        assert_eq!(keys.len(), reps.len());
        for r in &reps {
            assert!(is_symmetric_pair(&r.c, &r.d));
            assert!(is_symplectic_exact(&ExactMatrix4::from_ints(*r.witness_ints())));
        }
    }

    #[test]
    fn enumeration_is_nested() {
        let k1: BTreeSet<_> = enumerate_cosets(1).iter().map(|r| r.key).collect();
        let k2: BTreeSet<_> = REPS2.iter().map(|r| r.key).collect();
        assert!(k1.is_subset(&k2));
        assert!(k2.len() > k1.len());
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_csv(&enumerate_cosets(0), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "c11,c12,c21,c22,d11,d12,d21,d22\n0,0,0,0,1,0,0,1\n");
    }

    fn unimodular() -> impl Strategy<Value = IntMat2> {
        prop::collection::vec((0usize..4, -2i64..=2), 1..5).prop_map(|ops| {
            let mut u = [[1, 0], [0, 1]];
            for (kind, n) in ops {
                let e = match kind {
                    0 => [[1, n], [0, 1]],
                    1 => [[1, 0], [n, 1]],
                    2 => [[0, 1], [1, 0]],
                    _ => [[-1, 0], [0, 1]],
                };
                u = mul2(&e, &u);
            }
            u
        })
    }

    static REPS2: once_cell::sync::Lazy<Vec<CosetRep>> = once_cell::sync::Lazy::new(|| enumerate_cosets(2));

    proptest! {
        #[test]
        fn key_is_left_invariant(idx in 0usize..200, u in unimodular()) {
            let reps = &*REPS2;
            let r = &reps[idx % reps.len()];
            let (c2, d2) = (mul2(&u, &r.c), mul2(&u, &r.d));
            prop_assert_eq!(canonical_key(&c2, &d2), r.key);
        }
    }
}
