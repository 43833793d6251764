//! K-types of Sp₂(ℝ) as dominant pairs `(a, b)`, their transitions, and support cones.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{domain, Result};
use crate::gl2::Weight;
use crate::projection::{target_weight, Component, Direction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct KTypePair {
    pub a: i64,
    pub b: i64,
}

impl KTypePair {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a < b {
            return domain(format!("({a}, {b}) is not dominant"));
        }
        Ok(KTypePair { a, b })
    }

    pub fn offset(&self, (da, db): (i64, i64)) -> Option<KTypePair> {
        KTypePair::new(self.a + da, self.b + db).ok()
    }
}

/// `(a, b) ↦ det^b sym^{a−b}`.
pub fn pair_to_weight(p: KTypePair) -> Weight {
    Weight::new(p.b, (p.a - p.b) as u32)
}

pub fn weight_to_pair(w: Weight) -> KTypePair {
    KTypePair { a: w.k + w.l as i64, b: w.k }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    MPlus,
    MMinus,
}

impl Side {
    pub fn direction(self) -> Direction {
        match self {
            Side::MPlus => Direction::R,
            Side::MMinus => Direction::L,
        }
    }
}

/// Targets of `𝔪^±` acting on the K-type `p`, following the Clebsch–Gordan components of `sym² ⊗ sym^{a−b}`.
pub fn transitions(p: KTypePair, side: Side) -> BTreeSet<KTypePair> {
    Component::ALL
        .into_iter()
        .filter_map(|c| target_weight(pair_to_weight(p), side.direction(), c))
        .map(weight_to_pair)
        .collect()
}

/// Entry of the projection/transition dictionary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DirectionEntry {
    pub direction: Direction,
    pub component: Component,
    pub basis: &'static str,
    pub offset: (i64, i64),
}

/// `π_{dir,comp}` ↦ (basis element of `𝔪`, pair offset). Offsets come from the target weights.
pub fn direction_dictionary() -> Vec<DirectionEntry> {
    let probe = Weight::new(0, 4);
    let src = weight_to_pair(probe);
    let mut out = Vec::new();
    for direction in [Direction::L, Direction::R] {
        for component in Component::ALL {
            let t = weight_to_pair(target_weight(probe, direction, component).expect("l = 4 has all components"));
            let basis = match (direction, component) {
                (Direction::L, Component::Plus) => "e_m-",
                (Direction::L, Component::Zero) => "h_m-",
                (Direction::L, Component::Minus) => "f_m-",
                (Direction::R, Component::Plus) => "e_m+",
                (Direction::R, Component::Zero) => "h_m+",
                (Direction::R, Component::Minus) => "f_m+",
            };
            out.push(DirectionEntry { direction, component, basis, offset: (t.a - src.a, t.b - src.b) });
        }
    }
    out
}

pub fn offset_of_basis(name: &str) -> Option<(i64, i64)> {
    direction_dictionary().into_iter().find(|e| e.basis == name).map(|e| e.offset)
}

/// Linear relation `w_a a + w_b b = w_c` with a sign: a transition leaving the
/// wall to `(a', b')` vanishes when `sign·(w_a a' + w_b b' − w_c) < 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Wall {
    pub w_a: i64,
    pub w_b: i64,
    pub w_c: i64,
    pub sign: i8,
}

impl Wall {
    pub fn new(w_a: i64, w_b: i64, w_c: i64, sign: i8) -> Result<Self> {
        if (w_a, w_b) == (0, 0) || !(sign == 1 || sign == -1) {
            return domain("wall needs a nonzero normal and sign ±1");
        }
        Ok(Wall { w_a, w_b, w_c, sign })
    }

    pub fn on(&self, p: KTypePair) -> bool {
        self.w_a * p.a + self.w_b * p.b == self.w_c
    }

    pub fn blocks(&self, from: KTypePair, to: KTypePair) -> bool {
        self.on(from) && (self.sign as i64) * (self.w_a * to.a + self.w_b * to.b - self.w_c) < 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Parabolic {
    Hol,
    AntiHol,
    SK,
}

impl Parabolic {
    /// Basis elements spanning `𝔲_q ∩ 𝔪`.
    pub fn u_cap_m(self) -> &'static [&'static str] {
        match self {
            Parabolic::Hol => &["h_m+", "e_m+", "f_m+"],
            Parabolic::AntiHol => &["h_m-", "e_m-", "f_m-"],
            Parabolic::SK => &["e_m+", "e_m-"],
        }
    }

    /// `2ρ_q` as a pair: twice the half-sum of `(ad h_c, ad h_k)`-weights on `𝔲_q ∩ 𝔪`,
    /// converted by `(c, k) ↦ ((c+k)/2, (c−k)/2)`.
    pub fn two_rho(self) -> KTypePair {
        let (mut c, mut k) = (0i64, 0i64);
        for name in self.u_cap_m() {
            let (wc, wk) = root_of(name);
            c += wc;
            k += wk;
        }
        KTypePair { a: (c + k) / 2, b: (c - k) / 2 }
    }
}

fn root_of(name: &str) -> (i64, i64) {
    let c = if name.ends_with('+') { 2 } else { -2 };
    let k = match &name[..1] {
        "e" => 2,
        "h" => 0,
        _ => -2,
    };
    (c, k)
}

/// Minimal K-type `2ρ_q + λ` for `λ` given as a pair.
pub fn minimal_from_lambda(q: Parabolic, lambda: KTypePair) -> KTypePair {
    let r = q.two_rho();
    KTypePair { a: r.a + lambda.a, b: r.b + lambda.b }
}

/// Closure of a minimal K-type under a set of offsets, intersected with Λ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportSpec {
    pub minimal: KTypePair,
    pub directions: Vec<(i64, i64)>,
    pub walls: Vec<Wall>,
}

impl SupportSpec {
    pub fn new(minimal: KTypePair, directions: Vec<(i64, i64)>) -> Self {
        let walls = derive_walls(minimal, &directions);
        SupportSpec { minimal, directions, walls }
    }

    /// Decides membership by searching step counts; every offset used here
    /// strictly increases a linear functional, which bounds the search.
    pub fn contains(&self, p: KTypePair) -> bool {
        if p.a < p.b {
            return false;
        }
        if p == self.minimal {
            return true;
        }
        let Some(phi) = positive_functional(&self.directions) else {
            return self.bfs_window(window_around(self.minimal, p)).contains(&p);
        };
        let val = |q: KTypePair| phi.0 * q.a + phi.1 * q.b;
        let gap = val(p) - val(self.minimal);
        if gap < 0 {
            return false;
        }
        let min_step = self.directions.iter().map(|d| phi.0 * d.0 + phi.1 * d.1).min().unwrap_or(1);
        let steps = gap / min_step.max(1);
        let r = steps * 2 + 2;
        let win = (self.minimal.a - r, self.minimal.a + r, self.minimal.b - r, self.minimal.b + r);
        self.bfs_window(win).contains(&p)
    }

    /// Breadth-first closure restricted to the window `(amin, amax, bmin, bmax)`.
    pub fn bfs_window(&self, (amin, amax, bmin, bmax): (i64, i64, i64, i64)) -> BTreeSet<KTypePair> {
        let inside = |p: &KTypePair| p.a >= amin && p.a <= amax && p.b >= bmin && p.b <= bmax;
        let mut seen = BTreeSet::new();
        if !inside(&self.minimal) {
            return seen;
        }
        let mut queue = VecDeque::from([self.minimal]);
        seen.insert(self.minimal);
        while let Some(p) = queue.pop_front() {
            for d in &self.directions {
                if let Some(q) = p.offset(*d) {
                    if inside(&q) && seen.insert(q) {
                        queue.push_back(q);
                    }
                }
            }
        }
        seen
    }
}

fn window_around(a: KTypePair, b: KTypePair) -> (i64, i64, i64, i64) {
    let r = 4 + (a.a - b.a).abs() + (a.b - b.b).abs();
    (a.a.min(b.a) - r, a.a.max(b.a) + r, a.b.min(b.b) - r, a.b.max(b.b) + r)
}

fn positive_functional(dirs: &[(i64, i64)]) -> Option<(i64, i64)> {
    [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)]
        .into_iter()
        .find(|f: &(i64, i64)| dirs.iter().all(|d| f.0 * d.0 + f.1 * d.1 > 0))
}

/// Coordinate walls through the minimal pair: a coordinate that no offset can
/// decrease (increase) bounds the support from below (above).
fn derive_walls(m: KTypePair, dirs: &[(i64, i64)]) -> Vec<Wall> {
    let mut walls = Vec::new();
    if dirs.is_empty() {
        return walls;
    }
    for (axis, (w_a, w_b)) in [(0usize, (1i64, 0i64)), (1, (0, 1))] {
        let comp = |d: &(i64, i64)| if axis == 0 { d.0 } else { d.1 };
        let c = if axis == 0 { m.a } else { m.b };
        if dirs.iter().all(|d| comp(d) >= 0) {
            walls.push(Wall { w_a, w_b, w_c: c, sign: 1 });
        } else if dirs.iter().all(|d| comp(d) <= 0) {
            walls.push(Wall { w_a, w_b, w_c: c, sign: -1 });
        }
    }
    walls
}

pub fn aq_support(q: Parabolic, minimal: KTypePair) -> SupportSpec {
    let dirs = q.u_cap_m().iter().map(|n| offset_of_basis(n).expect("dictionary covers 𝔪")).collect();
    SupportSpec::new(minimal, dirs)
}

/// Lee's four sets `L_{p,q}` inside `2Λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum LeeSet {
    L11,
    L12,
    L21,
    L22,
}

#[derive(Clone, Debug, Serialize)]
pub struct SocleSeries {
    pub k: i64,
    /// The finite top layer.
    pub l12: Vec<KTypePair>,
}

impl SocleSeries {
    pub fn classify(&self, p: KTypePair) -> Option<LeeSet> {
        if p.a < p.b || p.a % 2 != 0 || p.b % 2 != 0 {
            return None;
        }
        let x1 = p.a < self.k;
        let y1 = p.b <= -self.k;
        Some(match (x1, y1) {
            (true, true) => LeeSet::L11,
            (true, false) => LeeSet::L12,
            (false, true) => LeeSet::L21,
            (false, false) => LeeSet::L22,
        })
    }

    /// Socle layer: 0 = bottom `L_{2,1}`, 1 = middle `L_{2,2} ⊕ L_{1,1}`, 2 = top `L_{1,2}`.
    pub fn layer(&self, p: KTypePair) -> Option<usize> {
        self.classify(p).map(|s| match s {
            LeeSet::L21 => 0,
            LeeSet::L22 | LeeSet::L11 => 1,
            LeeSet::L12 => 2,
        })
    }

    pub fn window(&self, lo: i64, hi: i64) -> Vec<(KTypePair, LeeSet)> {
        let mut out = Vec::new();
        for a in lo..=hi {
            for b in lo..=a.min(hi) {
                let p = KTypePair { a, b };
                if let Some(s) = self.classify(p) {
                    out.push((p, s));
                }
            }
        }
        out
    }

    pub fn to_json(&self, lo: i64, hi: i64) -> serde_json::Value {
        let mut sets = serde_json::Map::new();
        for s in [LeeSet::L11, LeeSet::L12, LeeSet::L21, LeeSet::L22] {
            let pts: Vec<[i64; 2]> = self.window(lo, hi).into_iter().filter(|(_, t)| *t == s).map(|(p, _)| [p.a, p.b]).collect();
            sets.insert(format!("{s:?}"), serde_json::json!(pts));
        }
        serde_json::json!({ "k": self.k, "window": [lo, hi], "L12_finite": self.l12.iter().map(|p| [p.a, p.b]).collect::<Vec<_>>(), "sets": sets })
    }
}

pub fn lee_socle(k: i64) -> Result<SocleSeries> {
    if k <= 0 || k % 2 != 0 {
        return domain(format!("k = {k} must be even and positive"));
    }
    let mut l12 = Vec::new();
    // a < k, b > −k and a ≥ b bound both entries
    for a in (-k + 2..k).step_by(2) {
        for b in (-k + 2..=a).step_by(2) {
            l12.push(KTypePair { a, b });
        }
    }
    l12.sort();
    Ok(SocleSeries { k, l12 })
}
