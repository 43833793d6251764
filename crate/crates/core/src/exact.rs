//! Gaussian elimination over exact fields (rationals, Gaussian rationals).

use crate::scalar::Coeff;

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref<T: Coeff + PartialEq>(m: &mut [Vec<T>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let zero = m[0][0].zero_like();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| m[i][c] != zero) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && m[i][c] != zero {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let v = m[r][j].clone();
                    m[i][j] = m[i][j].clone() - f.clone() * v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of `{x : m x = 0}`.
pub fn nullspace<T: Coeff + PartialEq>(m: &[Vec<T>], like: &T) -> Vec<Vec<T>> {
    let mut a = m.to_vec();
    let cols = if a.is_empty() { 0 } else { a[0].len() };
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![like.zero_like(); cols];
            v[f] = like.one_like();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][f].clone();
            }
            v
        })
        .collect()
}

/// Solves `m x = b` when consistent; `None` otherwise. Free variables are set to zero.
pub fn solve<T: Coeff + PartialEq>(m: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let cols = m[0].len();
    let mut aug: Vec<Vec<T>> = m.iter().zip(b).map(|(r, x)| r.iter().cloned().chain([x.clone()]).collect()).collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let zero = b[0].zero_like();
    let mut x = vec![zero; cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[row][cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn nullspace_and_solve() {
        let m = vec![vec![rat(1, 1), rat(2, 1), rat(3, 1)], vec![rat(2, 1), rat(4, 1), rat(6, 1)]];
        let ns = nullspace(&m, &rat(0, 1));
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let dot = m[0].iter().zip(v).fold(rat(0, 1), |s, (a, b)| s + a * b);
            assert_eq!(dot, rat(0, 1));
        }
        let x = solve(&m, &[rat(1, 1), rat(2, 1)]).unwrap();
        assert_eq!(x, vec![rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert!(solve(&m, &[rat(1, 1), rat(3, 1)]).is_none());
    }
}
