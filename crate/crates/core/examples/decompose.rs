//! Splits e(tτ) + f* into its holomorphic part and f*, recovering the coefficients of f*.
use siegel_maass::cli::holomorphic_test_form;
use siegel_maass::eisenstein::FourierIndex;
use siegel_maass::kernels::{assemble_fstar, decompose, sample_points, CoefficientList};
use siegel_maass::scalar::C64;

fn main() -> siegel_maass::Result<()> {
    let truth = CoefficientList::new(1, [(FourierIndex::new(1, 1, -1), C64::new(1.0, 0.5)), (FourierIndex::new(0, 1, 0), C64::new(-0.3, 0.2))])?;
    let f = holomorphic_test_form(4)?.add(&assemble_fstar(&truth, 4, 128)?.map)?;
    let candidates = CoefficientList::indefinite_box(1);
    let d = decompose(&f, 4, &candidates, &sample_points(10, 5), 128, 1)?;
    println!("{} candidates, condition {:.1}", candidates.len(), d.condition);
    for t in &candidates {
        let c = d.f_minus.coeffs.get(t);
        if c.norm() > 1e-9 {
            println!("  c({t}) = {c:.10}");
        }
    }
    Ok(())
}
