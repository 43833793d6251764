//! Coset counts and timing per height bound.
use siegel_maass::cosets::enumerate_cosets;
use std::time::Instant;

fn main() {
    let max: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    for b in 0..=max {
        let t = Instant::now();
        let reps = enumerate_cosets(b);
        let rank2 = reps.iter().filter(|r| r.rank_c() == 2).count();
        println!("B={b} classes={} rank2={rank2} time={:.2?}", reps.len(), t.elapsed());
    }
}
