//! Builds the weight-4 lifted kernels and prints the identity residuals against their budgets.
use siegel_maass::eisenstein::FourierIndex;
use siegel_maass::kernels::{analytic_kernel, kernel_identities};
use siegel_maass::symplectic::SiegelPoint;

fn main() -> siegel_maass::Result<()> {
    let t = FourierIndex::new(1, 1, -1);
    for j in 0..=2 {
        println!("level {j}: weight {}", analytic_kernel(4, t, j, 128)?.weight);
    }
    let tau = SiegelPoint::new(0.3, 0.1, 0.7, 1.1, 0.2, 0.9)?;
    for c in kernel_identities(4, t, 128, &tau)? {
        println!("{:<22} residual {:.2e}  budget {:.2e}  {}", c.name, c.residual, c.budget, if c.pass { "ok" } else { "FAIL" });
    }
    Ok(())
}
