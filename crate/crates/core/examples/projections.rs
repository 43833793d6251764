//! Prints the six projection matrices out of sym² ⊗ V(σ) for one weight, as JSON.
use siegel_maass::gl2::Weight;
use siegel_maass::projection::{build_projection_table, completeness_holds};

fn main() {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<i64>().ok());
    let k = args.next().flatten().unwrap_or(1);
    let l = args.next().flatten().unwrap_or(2).max(0) as u32;
    let table = build_projection_table(Weight::new(k, l));
    eprintln!("complete and orthogonal: {}", completeness_holds(l));
    println!("{}", serde_json::to_string_pretty(&table.to_json()).expect("json"));
}
