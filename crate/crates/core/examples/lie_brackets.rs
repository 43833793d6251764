//! Structure constants of the named sp₄ basis.
use num_traits::Zero;
use siegel_maass::lie::{BASIS, NAMES};

fn main() {
    for (i, a) in NAMES.iter().enumerate() {
        for (j, b) in NAMES.iter().enumerate().skip(i + 1) {
            let terms: Vec<String> = BASIS.table[i][j]
                .iter()
                .zip(NAMES)
                .filter(|(c, _)| !(c.re.is_zero() && c.im.is_zero()))
                .map(|(c, n)| if c.im.is_zero() { format!("{} {n}", c.re) } else { format!("({} + {}i) {n}", c.re, c.im) })
                .collect();
            if !terms.is_empty() {
                println!("[{a}, {b}] = {}", terms.join(" + "));
            }
        }
    }
}
