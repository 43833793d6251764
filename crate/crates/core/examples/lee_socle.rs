//! Lee's sets for weight k in a window, printed as a character grid (a across, b down).
use siegel_maass::ktypes::{lee_socle, KTypePair, LeeSet};

fn main() -> siegel_maass::Result<()> {
    let k: i64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let s = lee_socle(k)?;
    let r = 2 * k + 2;
    println!("k = {k}: finite layer L12 has {} K-types", s.l12.len());
    for b in (-r..=r).rev() {
        let row: String = (-r..=r)
            .map(|a| match s.classify(KTypePair { a, b }) {
                Some(LeeSet::L11) => 'a',
                Some(LeeSet::L12) => '#',
                Some(LeeSet::L21) => 'c',
                Some(LeeSet::L22) => 'd',
                None => '.',
            })
            .collect();
        println!("{b:>4} {row}");
    }
    Ok(())
}
