//! Assembles f* from three coefficients and checks that lowering it recovers the top kernels.
use siegel_maass::eisenstein::FourierIndex;
use siegel_maass::kernels::{assemble_fstar, fstar_identity, sample_points, CoefficientList};
use siegel_maass::scalar::C64;

fn main() -> siegel_maass::Result<()> {
    let list = CoefficientList::new(
        1,
        [
            (FourierIndex::new(1, 1, -1), C64::new(1.0, 0.5)),
            (FourierIndex::new(0, 1, 0), C64::new(-0.3, 0.2)),
            (FourierIndex::new(-1, 1, 1), C64::new(0.7, 0.0)),
        ],
    )?;
    let fs = assemble_fstar(&list, 4, 128)?;
    println!("f* has weight {}", fs.map.shape());
    for tau in sample_points(4, 1) {
        let c = fstar_identity(&fs, &tau)?;
        println!("tau = {:.3?}: residual {:.2e} budget {:.2e} tail {:.2e}", c.tau, c.residual, c.budget, fs.tail_estimate(&tau)?);
    }
    Ok(())
}
