//! Estimates the constant c_k of the lowering/raising roundtrip on lifted kernels.
use siegel_maass::covariance::roundtrip_constant;
use siegel_maass::eisenstein::FourierIndex;
use siegel_maass::kernels::{analytic_kernel, sample_points};
use siegel_maass::modular::Strategy;

fn main() -> siegel_maass::Result<()> {
    // weight 4 only: higher k needs derivatives beyond the jet order
    let k = 4;
    for t in [FourierIndex::new(1, 1, -1), FourierIndex::new(0, 1, 0)] {
        let f = analytic_kernel(k, t, 1, 128)?.map;
        let est = roundtrip_constant(&f, k, &sample_points(6, 9), Strategy::Exact)?;
        println!("t = {t}: c = {:.12} {:+.1e}i, spread {:.1e}", est.mean.re, est.mean.im, est.spread);
    }
    Ok(())
}
