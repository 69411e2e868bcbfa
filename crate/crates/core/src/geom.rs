//! Planar geometry and the hexagonal partition of the unit square.
//!
//! Hexagons are flat-top. Cell `(i, j)` has its center at
//!
//! ```text
//!     x = ox + 1.5 c i
//!     y = oy + sqrt(3) c (j - i / 2)
//! ```
//!
//! where `c` is the circumradius and `(ox, oy)` the center of cell `(0, 0)`.
//! In this basis the six edge-sharing neighbors of a cell are
//! `(±1, 0)`, `(0, ±1)` and `±(1, 1)`. The per-axis rule
//! `|di| <= 1 && |dj| <= 1` additionally admits `±(1, -1)`, two cells that
//! only sit two steps apart on the lattice; see [`are_hex_neighbors`] and
//! [`HexGrid::adjacent`].

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn dist2(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dot(&self, other: &Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }
}

/// Axial cell index of a [`HexGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HexIndex {
    pub i: i64,
    pub j: i64,
}

impl HexIndex {
    pub const fn new(i: i64, j: i64) -> Self {
        Self { i, j }
    }
}

/// Hamming distance `|i - i'| + |j - j'|` between two cells.
pub fn hamming(a: HexIndex, b: HexIndex) -> i64 {
    (a.i - b.i).abs() + (a.j - b.j).abs()
}

/// The lattice neighbor rule as stated on indices: Hamming distance at most 2
/// with each axis differing by at most 1.
///
/// This admits the pair `±(1, -1)`, which is not edge-sharing in this
/// coordinate basis. Graph construction uses [`HexGrid::adjacent`].
pub fn are_hex_neighbors(a: HexIndex, b: HexIndex) -> bool {
    let di = (a.i - b.i).abs();
    let dj = (a.j - b.j).abs();
    di <= 1 && dj <= 1 && di + dj <= 2
}

/// Signed per-axis offsets of the six edge-sharing neighbors.
pub const NEIGHBOR_OFFSETS: [(i64, i64); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    FlatTop,
}

/// Hexagonal partition of the unit square, parameterized by circumradius.
#[derive(Debug, Clone, PartialEq)]
pub struct HexGrid {
    circumradius: f64,
    origin: Point2,
    orientation: Orientation,
    torus: bool,
    i_min: i64,
    i_max: i64,
    j_min: i64,
    j_max: i64,
    size: i64,
}

impl HexGrid {
    /// Grid with cell `(0, 0)` centered at the origin.
    pub fn new(circumradius: f64) -> Result<Self> {
        Self::with_origin(circumradius, Point2::ORIGIN)
    }

    pub fn with_origin(circumradius: f64, origin: Point2) -> Result<Self> {
        if !(circumradius.is_finite() && circumradius > 0.0) {
            return Err(domain(format!("circumradius must be positive and finite, got {circumradius}")));
        }
        if !(origin.x.is_finite() && origin.y.is_finite()) {
            return Err(domain("grid origin must be finite"));
        }
        let c = circumradius;
        // Any cell meeting the square has its center within c of it.
        let i_min = ((-c - origin.x) / (1.5 * c)).ceil() as i64;
        let i_max = ((1.0 + c - origin.x) / (1.5 * c)).floor() as i64;
        let lo = (-c - origin.y) / (SQRT_3 * c);
        let hi = (1.0 + c - origin.y) / (SQRT_3 * c);
        let j_min = (lo + i_min as f64 / 2.0).ceil() as i64;
        let j_max = (hi + i_max as f64 / 2.0).floor() as i64;
        let size = (i_max - i_min + 1).max(j_max - j_min + 1).max(1);
        Ok(Self {
            circumradius,
            origin,
            orientation: Orientation::FlatTop,
            torus: false,
            i_min,
            i_max,
            j_min,
            j_max,
            size,
        })
    }

    pub fn with_torus(mut self, torus: bool) -> Self {
        self.torus = torus;
        self
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn is_torus(&self) -> bool {
        self.torus
    }

    /// Number of index values per axis used for torus wraparound.
    pub fn size(&self) -> i64 {
        self.size
    }

    pub fn center(&self, idx: HexIndex) -> Point2 {
        let c = self.circumradius;
        Point2::new(
            self.origin.x + 1.5 * c * idx.i as f64,
            self.origin.y + SQRT_3 * c * (idx.j as f64 - idx.i as f64 / 2.0),
        )
    }

    /// Vertices counter-clockwise starting from angle 0.
    pub fn vertices(&self, idx: HexIndex) -> [Point2; 6] {
        let ctr = self.center(idx);
        let c = self.circumradius;
        let mut out = [Point2::ORIGIN; 6];
        for (k, v) in out.iter_mut().enumerate() {
            let a = std::f64::consts::FRAC_PI_3 * k as f64;
            *v = Point2::new(ctr.x + c * a.cos(), ctr.y + c * a.sin());
        }
        out
    }

    /// Closed point-in-hexagon test with a relative slack of `1e-12`.
    pub fn contains(&self, idx: HexIndex, p: Point2) -> bool {
        let ctr = self.center(idx);
        let c = self.circumradius;
        let slack = 1e-12 * c.max(1.0);
        let dx = (p.x - ctr.x).abs();
        let dy = (p.y - ctr.y).abs();
        dy <= SQRT_3 / 2.0 * c + slack && SQRT_3 * dx + dy <= SQRT_3 * c + 2.0 * slack
    }

    /// Cell containing `p`. Points on shared edges or vertices go to the
    /// lexicographically smallest containing `(i, j)`.
    pub fn locate(&self, p: Point2) -> Result<HexIndex> {
        if !(p.x.is_finite() && p.y.is_finite()) || !p.in_unit_square() {
            return Err(domain(format!("point ({}, {}) lies outside the unit square", p.x, p.y)));
        }
        Ok(self.locate_unchecked(p))
    }

    pub(crate) fn locate_unchecked(&self, p: Point2) -> HexIndex {
        let nearest = self.round_to_cell(p);
        let mut best: Option<HexIndex> = None;
        let candidates = std::iter::once((0, 0)).chain(NEIGHBOR_OFFSETS);
        for (di, dj) in candidates {
            let cand = HexIndex::new(nearest.i + di, nearest.j + dj);
            if self.contains(cand, p) && best.is_none_or(|b| cand < b) {
                best = Some(cand);
            }
        }
        best.unwrap_or(nearest)
    }

    fn round_to_cell(&self, p: Point2) -> HexIndex {
        let c = self.circumradius;
        let dx = p.x - self.origin.x;
        let dy = p.y - self.origin.y;
        // Fractional cube coordinates of the standard flat-top axial basis.
        let q = (2.0 / 3.0 * dx) / c;
        let r = (-dx / 3.0 + SQRT_3 / 3.0 * dy) / c;
        let s = -q - r;
        let (mut rq, mut rr, rs) = (q.round(), r.round(), s.round());
        let (eq, er, es) = ((rq - q).abs(), (rr - r).abs(), (rs - s).abs());
        if eq > er && eq > es {
            rq = -rr - rs;
        } else if er > es {
            rr = -rq - rs;
        }
        let i = rq as i64;
        HexIndex::new(i, rr as i64 + i)
    }

    /// Per-axis index difference, wrapped into `(-size/2, size/2]` on a torus.
    fn axis_delta(&self, a: i64, b: i64) -> i64 {
        let d = a - b;
        if !self.torus {
            return d;
        }
        let m = self.size;
        let w = d.rem_euclid(m);
        if 2 * w > m {
            w - m
        } else {
            w
        }
    }

    /// Hamming distance, with modular wrap on a torus.
    pub fn hamming(&self, a: HexIndex, b: HexIndex) -> i64 {
        self.axis_delta(a.i, b.i).abs() + self.axis_delta(a.j, b.j).abs()
    }

    /// True for the same cell or one of its six edge-sharing neighbors.
    pub fn adjacent(&self, a: HexIndex, b: HexIndex) -> bool {
        let di = self.axis_delta(a.i, b.i);
        let dj = self.axis_delta(a.j, b.j);
        di.abs() <= 1 && dj.abs() <= 1 && di * dj >= 0
    }

    /// The shift `(i, j) -> (i + k, j + l)` taken modulo the grid size.
    pub fn torus_shift(&self, idx: HexIndex, k: i64, l: i64) -> Result<HexIndex> {
        if !self.torus {
            return Err(Error::State("torus_shift requires a torus grid".into()));
        }
        let m = self.size;
        Ok(HexIndex::new(
            self.i_min + (idx.i - self.i_min + k).rem_euclid(m),
            self.j_min + (idx.j - self.j_min + l).rem_euclid(m),
        ))
    }

    /// Every cell whose intersection with the unit square has positive area,
    /// in lexicographic order.
    pub fn cells(&self) -> Vec<HexIndex> {
        let mut out = Vec::new();
        for i in self.i_min..=self.i_max {
            for j in self.j_min..=self.j_max {
                let idx = HexIndex::new(i, j);
                if self.clipped_area(idx) > 1e-15 {
                    out.push(idx);
                }
            }
        }
        out
    }

    /// Area of the cell clipped to the unit square.
    pub fn clipped_area(&self, idx: HexIndex) -> f64 {
        polygon_area(&clip_to_unit_square(&self.vertices(idx)))
    }
}

/// Sutherland-Hodgman clip of a convex polygon against `[0, 1]²`.
pub fn clip_to_unit_square(poly: &[Point2]) -> Vec<Point2> {
    type Plane = (fn(&Point2) -> f64, fn(&Point2, &Point2) -> Point2);
    fn lerp(a: &Point2, b: &Point2, t: f64) -> Point2 {
        Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
    }
    let planes: [Plane; 4] = [
        (|p| p.x, |a, b| lerp(a, b, a.x / (a.x - b.x))),
        (|p| 1.0 - p.x, |a, b| lerp(a, b, (1.0 - a.x) / (b.x - a.x))),
        (|p| p.y, |a, b| lerp(a, b, a.y / (a.y - b.y))),
        (|p| 1.0 - p.y, |a, b| lerp(a, b, (1.0 - a.y) / (b.y - a.y))),
    ];
    let mut cur = poly.to_vec();
    for (side, cut) in planes {
        if cur.is_empty() {
            break;
        }
        let mut next = Vec::with_capacity(cur.len() + 2);
        for k in 0..cur.len() {
            let a = &cur[k];
            let b = &cur[(k + 1) % cur.len()];
            let (sa, sb) = (side(a), side(b));
            if sa >= 0.0 {
                next.push(*a);
                if sb < 0.0 {
                    next.push(cut(a, b));
                }
            } else if sb >= 0.0 {
                next.push(cut(a, b));
            }
        }
        cur = next;
    }
    cur
}

/// Shoelace area.
pub fn polygon_area(poly: &[Point2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in 0..poly.len() {
        let a = &poly[k];
        let b = &poly[(k + 1) % poly.len()];
        acc += a.x * b.y - b.x * a.y;
    }
    acc.abs() / 2.0
}
