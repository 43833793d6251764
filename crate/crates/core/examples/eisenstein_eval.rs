//! Truncated weight-10 Eisenstein values at a generic point: truncation behaviour, the skew
//! relation and invariance under J.
use siegel_maass::eisenstein::{automorphy, eval_eisenstein, skew_eisenstein};
use siegel_maass::symplectic::{moebius_act, SiegelPoint, SymplecticMatrix};

fn main() -> siegel_maass::Result<()> {
    let k = 10;
    let tau = SiegelPoint::new(0.1, 0.05, -0.1, 0.95, 0.1, 1.05)?;
    for b in 0..=3 {
        let e = eval_eisenstein(k, &tau, b)?;
        let skew = tau.det_y().sqrt() * skew_eisenstein(k + 1, &tau, b)?.conj();
        println!("B = {b}: E = {e:.12}  |E - skew side| = {:.1e}", (e - skew).norm());
    }
    let j = SymplecticMatrix::j2();
    let lhs = eval_eisenstein(k, &moebius_act(&j, &tau)?, 2)?;
    let rhs = automorphy(k, &j, &tau) * eval_eisenstein(k, &tau, 2)?;
    println!("J-invariance at B = 2: relative residual {:.2e}", (lhs - rhs).norm() / rhs.norm());
    Ok(())
}
