//! Fourier coefficients of the k = 10 Eisenstein sum on the 3-torus: negative definite
//! indices vanish to within the error estimate, indefinite ones decay along y = s·I₂.

use siegel_maass::eisenstein::{fourier_table, FourierIndex, Signature, TorusSpec};
use siegel_maass::scalar::Mat2;

fn main() -> siegel_maass::Result<()> {
    let spec = TorusSpec::new(10, 12, 3)?;
    let neg: Vec<FourierIndex> =
        FourierIndex::box_all(2).into_iter().filter(|t| t.signature() == Signature::NegativeDefinite).collect();
    let t0 = std::time::Instant::now();
    for r in fourier_table(spec, &neg, &Mat2::new(1.0, 0.0, 0.0, 1.0))? {
        println!("{}  |c| = {:.3e}  err = {:.3e}", r.t, r.value.norm(), r.err);
    }
    eprintln!("negative definite scan: {:?}", t0.elapsed());
    let ind = [FourierIndex::new(0, 1, 0), FourierIndex::new(1, 1, -1), FourierIndex::new(1, 0, -1)];
    for s in [1.0, 1.5, 2.0, 2.5, 3.0] {
        for r in fourier_table(spec, &ind, &Mat2::new(s, 0.0, 0.0, s))? {
            println!("s = {s}  {}  log|c| = {:.4}  err = {:.3e}  |c| = {:.3e}", r.t, r.value.norm().ln(), r.err, r.value.norm());
        }
    }
    Ok(())
}
