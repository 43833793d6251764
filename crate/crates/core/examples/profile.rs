//! Compares the torus-extracted coefficient profile with the analytic θ-integral on a small grid.
use siegel_maass::eisenstein::{FourierIndex, TorusSpec};
use siegel_maass::profile::{analytic_profile, build_profile, fit_scale, AnalyticProfile, GridSpec};

fn main() -> siegel_maass::Result<()> {
    let spec = TorusSpec::new(10, 12, 3)?;
    let grid: GridSpec = "y1=0.9:1.3:3,v=0.1,y2=1.0".parse()?;
    let t = FourierIndex::new(1, 1, 1);
    let torus = build_profile(spec, t, grid)?;
    let ana = analytic_profile(&AnalyticProfile::new(10, t, 256)?, grid)?;
    for (a, b) in torus.samples.iter().zip(&ana.samples) {
        println!("y = {:?}: torus {:.6e} (err {:.1e}), analytic {:.6e}", a.y, a.value, a.err, b.value);
    }
    let (scale, spread) = fit_scale(&torus, &ana)?;
    println!("torus / analytic = {scale:.10} with relative spread {spread:.1e}");
    Ok(())
}
