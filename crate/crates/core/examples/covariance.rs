//! Runs the covariance battery with exact and numeric derivatives and prints the worst cases.
use siegel_maass::covariance::{default_battery, run_battery};
use siegel_maass::modular::{StepPolicy, Strategy};

fn main() -> siegel_maass::Result<()> {
    for (name, strategy, gammas, points) in
        [("exact", Strategy::Exact, 20, 10), ("numeric", Strategy::Numeric(StepPolicy::default()), 5, 2)]
    {
        let mut recs = run_battery(&default_battery(7, gammas, points), strategy)?;
        recs.sort_by(|a, b| b.residual.total_cmp(&a.residual));
        println!("{name}: {} cases", recs.len());
        for r in recs.iter().take(3) {
            println!("  {:>10.3e}  {} on {}", r.residual, r.op, r.function);
        }
    }
    Ok(())
}
