//! r-graphs and hexagonal H_r-graphs over planar point sets.
//!
//! In continuum mode two points are joined when their Euclidean distance is
//! at most `r`. In hexagonal mode the unit square is partitioned into
//! hexagons of circumradius `r / 4` and two points are joined when their
//! cells coincide or share an edge.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geom::{HexGrid, HexIndex, Point2};

mod union_find;

pub use union_find::UnionFind;

/// Forward half of the edge-sharing neighbor offsets; the other half is
/// reached from the neighboring cell.
const FORWARD_OFFSETS: [(i64, i64); 3] = [(1, 0), (0, 1), (1, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphMode {
    /// Edges join points within Euclidean distance `r`.
    Continuum,
    /// Edges join points in the same or edge-sharing hexagons of
    /// circumradius `r / 4`.
    Hex,
}

impl GraphMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            GraphMode::Continuum => "continuum",
            GraphMode::Hex => "hex",
        }
    }
}

impl std::fmt::Display for GraphMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Circumradius of the hexagons backing an H_r-graph.
pub fn hex_circumradius(r: f64) -> f64 {
    r / 4.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub n: usize,
    /// Sorted `(u, v)` pairs with `u < v`.
    pub edges: Vec<(usize, usize)>,
    pub mode: GraphMode,
    pub radius: f64,
}

/// Partition of point indices into clusters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSet {
    /// Cluster id of every point.
    pub assignment: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Mean of each cluster's members.
    pub centers: Vec<Point2>,
}

impl ClusterSet {
    /// Relabel arbitrary labels so cluster ids follow the smallest member
    /// index, and compute sizes and centers.
    pub fn from_labels(points: &[Point2], labels: &[usize]) -> Self {
        assert_eq!(points.len(), labels.len());
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut assignment = Vec::with_capacity(labels.len());
        for &l in labels {
            let next = remap.len();
            assignment.push(*remap.entry(l).or_insert(next));
        }
        let k = remap.len();
        let mut sizes = vec![0usize; k];
        let mut sums = vec![(0.0f64, 0.0f64); k];
        for (p, &c) in points.iter().zip(&assignment) {
            sizes[c] += 1;
            sums[c].0 += p.x;
            sums[c].1 += p.y;
        }
        let centers = sums
            .iter()
            .zip(&sizes)
            .map(|(&(sx, sy), &s)| Point2::new(sx / s as f64, sy / s as f64))
            .collect();
        Self { assignment, sizes, centers }
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Member indices of each cluster, in ascending order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("radius must be positive and finite, got {r}")))
    }
}

/// Uniform bucket grid with cells no smaller than the query radius.
struct Buckets {
    min_x: f64,
    min_y: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl Buckets {
    fn new(points: &[Point2], r: f64) -> Self {
        let (mut min_x, mut min_y, mut max_x, mut max_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in points {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        let span = (max_x - min_x).max(max_y - min_y).max(f64::MIN_POSITIVE);
        // At most ~2 sqrt(n) cells per axis keeps memory linear in n.
        let cap = (2.0 * (points.len() as f64).sqrt()).ceil().max(1.0);
        let cell = r.max(span / cap);
        let nx = ((max_x - min_x) / cell).floor() as usize + 1;
        let ny = ((max_y - min_y) / cell).floor() as usize + 1;
        let key = |p: &Point2| {
            let cx = (((p.x - min_x) / cell) as usize).min(nx - 1);
            let cy = (((p.y - min_y) / cell) as usize).min(ny - 1);
            cy * nx + cx
        };
        let mut start = vec![0usize; nx * ny + 1];
        for p in points {
            start[key(p) + 1] += 1;
        }
        for k in 1..start.len() {
            start[k] += start[k - 1];
        }
        let mut fill = start.clone();
        let mut items = vec![0usize; points.len()];
        for (i, p) in points.iter().enumerate() {
            let k = key(p);
            items[fill[k]] = i;
            fill[k] += 1;
        }
        Self { min_x, min_y, cell, nx, ny, start, items }
    }

    fn bucket(&self, cx: usize, cy: usize) -> &[usize] {
        let k = cy * self.nx + cx;
        &self.items[self.start[k]..self.start[k + 1]]
    }

    /// Visit every unordered pair within distance `r` exactly once.
    fn for_each_close_pair(&self, points: &[Point2], r: f64, mut visit: impl FnMut(usize, usize)) {
        for cy in 0..self.ny {
            for cx in 0..self.nx {
                let here = self.bucket(cx, cy);
                for (a, &u) in here.iter().enumerate() {
                    for &v in &here[a + 1..] {
                        if points[u].dist(&points[v]) <= r {
                            visit(u, v);
                        }
                    }
                }
                // Forward neighbors: E, NW, N, NE.
                let forward = [(1isize, 0isize), (-1, 1), (0, 1), (1, 1)];
                for (dx, dy) in forward {
                    let (ox, oy) = (cx as isize + dx, cy as isize + dy);
                    if ox < 0 || oy < 0 || ox as usize >= self.nx || oy as usize >= self.ny {
                        continue;
                    }
                    let there = self.bucket(ox as usize, oy as usize);
                    for &u in here {
                        for &v in there {
                            if points[u].dist(&points[v]) <= r {
                                visit(u, v);
                            }
                        }
                    }
                }
            }
        }
        let _ = (self.min_x, self.min_y, self.cell);
    }
}

/// Cell of every point on the H_r grid. Fails for points off the unit square.
pub fn hex_cells(points: &[Point2], r: f64) -> Result<(HexGrid, Vec<HexIndex>)> {
    check_radius(r)?;
    let grid = HexGrid::new(hex_circumradius(r))?;
    let cells = points.iter().map(|&p| grid.locate(p)).collect::<Result<Vec<_>>>()?;
    Ok((grid, cells))
}

/// Points grouped by occupied cell, in lexicographic cell order.
fn group_by_cell(cells: &[HexIndex]) -> Vec<(HexIndex, Vec<usize>)> {
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by_key(|&i| (cells[i], i));
    let mut out: Vec<(HexIndex, Vec<usize>)> = Vec::new();
    for i in order {
        match out.last_mut() {
            Some((c, members)) if *c == cells[i] => members.push(i),
            _ => out.push((cells[i], vec![i])),
        }
    }
    out
}

pub fn build_graph(points: &[Point2], r: f64, mode: GraphMode) -> Result<Graph> {
    check_radius(r)?;
    let mut edges = Vec::new();
    match mode {
        GraphMode::Continuum => {
            if !points.is_empty() {
                Buckets::new(points, r).for_each_close_pair(points, r, |u, v| edges.push((u.min(v), u.max(v))));
            }
        }
        GraphMode::Hex => {
            let (grid, cells) = hex_cells(points, r)?;
            let groups = group_by_cell(&cells);
            let lookup: HashMap<HexIndex, usize> = groups.iter().enumerate().map(|(g, (c, _))| (*c, g)).collect();
            for (cell, members) in &groups {
                for (a, &u) in members.iter().enumerate() {
                    for &v in &members[a + 1..] {
                        edges.push((u.min(v), u.max(v)));
                    }
                }
                for (di, dj) in FORWARD_OFFSETS {
                    let other = HexIndex::new(cell.i + di, cell.j + dj);
                    if let Some(&g) = lookup.get(&other) {
                        debug_assert!(grid.adjacent(*cell, other));
                        for &u in members {
                            for &v in &groups[g].1 {
                                edges.push((u.min(v), u.max(v)));
                            }
                        }
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    Ok(Graph { n: points.len(), edges, mode, radius: r })
}

fn cluster_set_from_uf(points: &[Point2], uf: &mut UnionFind) -> ClusterSet {
    let labels: Vec<usize> = (0..points.len()).map(|i| uf.find(i)).collect();
    ClusterSet::from_labels(points, &labels)
}

/// Maximal connected components; ids follow the smallest member index.
pub fn connected_components(points: &[Point2], g: &Graph) -> ClusterSet {
    assert_eq!(points.len(), g.n, "graph was built over a different point set");
    let mut uf = UnionFind::new(g.n);
    for &(u, v) in &g.edges {
        uf.union(u, v);
    }
    cluster_set_from_uf(points, &mut uf)
}

/// Union-find over the graph's edges without materializing the edge list.
pub fn component_forest(points: &[Point2], r: f64, mode: GraphMode) -> Result<UnionFind> {
    check_radius(r)?;
    let mut uf = UnionFind::new(points.len());
    if points.is_empty() {
        return Ok(uf);
    }
    match mode {
        GraphMode::Continuum => {
            Buckets::new(points, r).for_each_close_pair(points, r, |u, v| {
                uf.union(u, v);
            });
        }
        GraphMode::Hex => {
            let (_, cells) = hex_cells(points, r)?;
            let mut rep: HashMap<HexIndex, usize> = HashMap::with_capacity(points.len());
            for (i, c) in cells.iter().enumerate() {
                let first = *rep.entry(*c).or_insert(i);
                uf.union(first, i);
            }
            for (cell, &u) in &rep {
                for (di, dj) in FORWARD_OFFSETS {
                    if let Some(&v) = rep.get(&HexIndex::new(cell.i + di, cell.j + dj)) {
                        uf.union(u, v);
                    }
                }
            }
        }
    }
    Ok(uf)
}

/// Components of the r-graph (or H_r-graph) computed directly from points.
pub fn components(points: &[Point2], r: f64, mode: GraphMode) -> Result<ClusterSet> {
    let mut uf = component_forest(points, r, mode)?;
    Ok(cluster_set_from_uf(points, &mut uf))
}

/// Size of the largest cluster divided by the point count.
pub fn largest_fraction(cs: &ClusterSet) -> f64 {
    let n = cs.n();
    if n == 0 {
        return 0.0;
    }
    *cs.sizes.iter().max().unwrap_or(&0) as f64 / n as f64
}

pub fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.5 && rho < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("rho must lie in (1/2, 1), got {rho}")))
    }
}

/// True when some component holds at least a `rho` fraction of the points.
pub fn has_dominant_component(cs: &ClusterSet, rho: f64) -> Result<bool> {
    check_rho(rho)?;
    Ok(largest_fraction(cs) >= rho)
}

/// Same test as [`has_dominant_component`] on raw component sizes.
pub(crate) fn dominant(largest: usize, n: usize, rho: f64) -> bool {
    n > 0 && largest as f64 / n as f64 >= rho
}

/// Largest cluster of occupied hexagons (circumradius `r / 4`) divided by
/// the number of hexagons meeting the unit square. With `torus` the
/// boundary rows and columns are identified before clustering.
pub fn occupied_hex_fraction(points: &[Point2], r: f64, torus: bool) -> Result<f64> {
    check_radius(r)?;
    let grid = HexGrid::new(hex_circumradius(r))?.with_torus(torus);
    let total = grid.cells().len();
    let occupied: BTreeSet<HexIndex> = points.iter().map(|&p| grid.locate(p)).collect::<Result<_>>()?;
    if occupied.is_empty() || total == 0 {
        return Ok(0.0);
    }
    let cells: Vec<HexIndex> = occupied.into_iter().collect();
    let slot: HashMap<HexIndex, usize> = cells.iter().enumerate().map(|(k, c)| (*c, k)).collect();
    let mut uf = UnionFind::new(cells.len());
    for (k, &c) in cells.iter().enumerate() {
        for (di, dj) in FORWARD_OFFSETS {
            let other = if torus { grid.torus_shift(c, di, dj)? } else { HexIndex::new(c.i + di, c.j + dj) };
            if let Some(&m) = slot.get(&other) {
                uf.union(k, m);
            }
        }
    }
    let largest = (0..cells.len()).map(|k| uf.size_of(k)).max().unwrap_or(0);
    Ok(largest as f64 / total as f64)
}
