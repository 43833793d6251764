//! Renders the Saito–Kurokawa support cone from a minimal K-type, with its walls.
use siegel_maass::diagram::{render_diagram, Window};
use siegel_maass::ktypes::{aq_support, KTypePair, Parabolic};

fn main() -> siegel_maass::Result<()> {
    let m: i64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let s = aq_support(Parabolic::SK, KTypePair::new(m, -m)?);
    print!("{}", render_diagram(std::slice::from_ref(&s), &s.walls, Window::square(6))?);
    Ok(())
}
