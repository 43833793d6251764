//! SVG rendering of K-type diagrams: `a` grows to the right, `b` grows upward.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::error::{domain, Result};
use crate::ktypes::{KTypePair, SupportSpec, Wall};

const CELL: f64 = 24.0;
const MARGIN: f64 = 30.0;
const RADIUS: f64 = 6.0;

/// Inclusive ranges for `a` and `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub a: (i64, i64),
    pub b: (i64, i64),
}

impl Window {
    pub fn square(r: i64) -> Self {
        Window { a: (-r, r), b: (-r, r) }
    }

    fn x(&self, a: f64) -> f64 {
        MARGIN + (a - self.a.0 as f64) * CELL
    }

    fn y(&self, b: f64) -> f64 {
        MARGIN + (self.b.1 as f64 - b) * CELL
    }
}

pub fn render_diagram(supports: &[SupportSpec], walls: &[Wall], window: Window) -> Result<String> {
    let r = window.a.1.abs().max(window.a.0.abs()).max(window.b.0.abs()).max(window.b.1.abs()) + 2;
    let mut filled = BTreeSet::new();
    for s in supports {
        filled.extend(s.bfs_window((-r * 2, r * 2, -r * 2, r * 2)));
    }
    render_pairs(&filled, walls, window)
}

/// Filled circles for members of `filled`, open circles for the other dominant pairs.
pub fn render_pairs(filled: &BTreeSet<KTypePair>, walls: &[Wall], w: Window) -> Result<String> {
    if w.a.0 > w.a.1 || w.b.0 > w.b.1 {
        return domain("empty diagram window");
    }
    let width = 2.0 * MARGIN + (w.a.1 - w.a.0) as f64 * CELL;
    let height = 2.0 * MARGIN + (w.b.1 - w.b.0) as f64 * CELL;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    s.push_str(
        r#"<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="4" refY="4" orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="black"/></marker></defs>"#,
    );
    s.push('\n');
    for b in (w.b.0..=w.b.1).rev() {
        for a in w.a.0..=w.a.1 {
            if a < b {
                continue;
            }
            let fill = if filled.contains(&KTypePair { a, b }) { "black" } else { "none" };
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="{RADIUS:.1}" fill="{fill}" stroke="black"/>"#,
                w.x(a as f64),
                w.y(b as f64)
            );
        }
    }
    for wall in walls {
        if let Some(seg) = wall_segment(wall, w) {
            let ((x1, y1), (x2, y2)) = seg;
            let _ = writeln!(s, r#"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="black" stroke-width="1.5"/>"#);
            // arrow from the midpoint along sign·(w_a, w_b)
            let (mx, my) = ((x1 + x2) / 2.0, (y1 + y2) / 2.0);
            let n = ((wall.w_a * wall.w_a + wall.w_b * wall.w_b) as f64).sqrt();
            let (dx, dy) = (wall.sign as f64 * wall.w_a as f64 / n, -(wall.sign as f64) * wall.w_b as f64 / n);
            let _ = writeln!(
                s,
                r#"<line x1="{mx:.1}" y1="{my:.1}" x2="{:.1}" y2="{:.1}" stroke="black" marker-end="url(#arrow)"/>"#,
                mx + dx * CELL * 0.8,
                my + dy * CELL * 0.8
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Clips the wall line to the window, padded by half a cell.
fn wall_segment(wall: &Wall, w: Window) -> Option<((f64, f64), (f64, f64))> {
    let (a0, a1) = (w.a.0 as f64 - 0.5, w.a.1 as f64 + 0.5);
    let (b0, b1) = (w.b.0 as f64 - 0.5, w.b.1 as f64 + 0.5);
    let (wa, wb, wc) = (wall.w_a as f64, wall.w_b as f64, wall.w_c as f64);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    if wb != 0.0 {
        for a in [a0, a1] {
            let b = (wc - wa * a) / wb;
            if b >= b0 && b <= b1 {
                pts.push((a, b));
            }
        }
    }
    if wa != 0.0 {
        for b in [b0, b1] {
            let a = (wc - wb * b) / wa;
            if a >= a0 && a <= a1 {
                pts.push((a, b));
            }
        }
    }
    pts.dedup();
    if pts.len() < 2 {
        return None;
    }
    let (p, q) = (pts[0], pts[pts.len() - 1]);
    Some(((w.x(p.0), w.y(p.1)), (w.x(q.0), w.y(q.1))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ktypes::{aq_support, Parabolic};

    #[test]
    fn empty_support_is_all_open() {
        let svg = render_diagram(&[], &[], Window::square(3)).unwrap();
        assert!(!svg.contains(r#"fill="black" stroke"#));
        assert_eq!(svg.matches("<circle").count(), (0..7).map(|i| i + 1).sum::<usize>());
        assert!(render_pairs(&BTreeSet::new(), &[], Window { a: (1, 0), b: (0, 0) }).is_err());
    }

    #[test]
    fn vertical_wall() {
        let wall = Wall::new(1, 0, 4, 1).unwrap();
        let ((x1, _), (x2, _)) = wall_segment(&wall, Window::square(6)).unwrap();
        assert_eq!(x1, x2);
    }

    #[test]
    fn sk_snapshot() {
        let s = aq_support(Parabolic::SK, KTypePair::new(2, -2).unwrap());
        let svg = render_diagram(std::slice::from_ref(&s), &s.walls, Window::square(6)).unwrap();
        let golden = include_str!("../tests/fixtures/sk_minimal_2_-2.svg");
        assert_eq!(svg, golden);
    }
}
