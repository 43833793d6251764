//! Compensated summation with a fixed reduction tree, so parallel sums do not
//! depend on the number of worker threads.

use rayon::prelude::*;

use crate::scalar::C64;

/// Items per leaf of the reduction tree.
pub const CHUNK: usize = 256;

/// Neumaier's variant of Kahan summation, separately on real and imaginary parts.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: [f64; 2],
    comp: [f64; 2],
}

impl Neumaier {
    pub fn add(&mut self, z: C64) {
        for (i, x) in [z.re, z.im].into_iter().enumerate() {
            let t = self.sum[i] + x;
            if self.sum[i].abs() >= x.abs() {
                self.comp[i] += (self.sum[i] - t) + x;
            } else {
                self.comp[i] += (x - t) + self.sum[i];
            }
            self.sum[i] = t;
        }
    }

    pub fn value(&self) -> C64 {
        C64::new(self.sum[0] + self.comp[0], self.sum[1] + self.comp[1])
    }
}

pub fn compensated_sum<I: IntoIterator<Item = C64>>(it: I) -> C64 {
    let mut acc = Neumaier::default();
    it.into_iter().for_each(|z| acc.add(z));
    acc.value()
}

/// `Σ_{i<n} f(i)`: fixed-size leaves summed in parallel, then combined in index order.
pub fn par_sum<F>(n: usize, f: F) -> C64
where
    F: Fn(usize) -> C64 + Sync,
{
    let leaves: Vec<C64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| compensated_sum((c * CHUNK..((c + 1) * CHUNK).min(n)).map(&f)))
        .collect();
    compensated_sum(leaves)
}

/// Several sums over the same index range at once; `f` writes its contributions into the slice.
pub fn par_sum_many<F>(n: usize, width: usize, f: F) -> Vec<C64>
where
    F: Fn(usize, &mut [C64]) + Sync,
{
    let leaves: Vec<Vec<C64>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Neumaier::default(); width];
            let mut buf = vec![C64::new(0.0, 0.0); width];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                f(i, &mut buf);
                for (a, z) in acc.iter_mut().zip(&buf) {
                    a.add(*z);
                }
            }
            acc.iter().map(|a| a.value()).collect()
        })
        .collect();
    (0..width).map(|w| compensated_sum(leaves.iter().map(|l| l[w]))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs.iter().map(|&x| C64::new(x, -x))), C64::new(2.0, -2.0));
    }

    #[test]
    fn independent_of_pool_size() {
        let f = |i: usize| C64::new((i as f64).sin() * 1e8, 1.0 / (1.0 + i as f64));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| par_sum(10_000, f))
        };
        let a = run(1);
        assert_eq!(a, run(3));
        assert_eq!(a, run(8));
        let many = par_sum_many(10_000, 2, |i, out| {
            out[0] = f(i);
            out[1] = f(i) * 2.0;
        });
        assert_eq!(many[0], a);
        assert_eq!(many[1], a * 2.0);
    }
}
