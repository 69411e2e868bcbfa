use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Point2;

const POWER_ITERATIONS: usize = 10_000;
const POWER_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestOptions {
    /// Replace each projected coordinate by `rank / (n + 1)`.
    pub rank_uniformize: bool,
}

/// How raw rows map to the unit square.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Projection {
    pub center: Vec<f64>,
    /// Orthonormal principal axes, largest variance first.
    pub axes: [Vec<f64>; 2],
    /// Variance captured along each axis.
    pub variances: [f64; 2],
    pub min: [f64; 2],
    pub max: [f64; 2],
    pub rank_uniformized: bool,
    /// Sorted projected coordinates, kept for rank mode.
    #[serde(skip)]
    sorted: [Vec<f64>; 2],
}

impl Projection {
    /// Coordinates along the principal axes, before scaling.
    pub fn project_raw(&self, row: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (a, axis) in self.axes.iter().enumerate() {
            out[a] = row.iter().zip(&self.center).zip(axis).map(|((x, c), v)| (x - c) * v).sum();
        }
        out
    }

    /// Map a raw row to the plane. Rows seen during ingestion land in the
    /// unit square; others may fall outside it in min-max mode.
    pub fn apply(&self, row: &[f64]) -> Point2 {
        let raw = self.project_raw(row);
        let mut out = [0.0; 2];
        for a in 0..2 {
            out[a] = if self.rank_uniformized {
                let sorted = &self.sorted[a];
                let rank = sorted.partition_point(|&v| v <= raw[a]);
                rank as f64 / (sorted.len() + 1) as f64
            } else {
                scale(raw[a], self.min[a], self.max[a])
            };
        }
        Point2::new(out[0], out[1])
    }
}

fn scale(v: f64, min: f64, max: f64) -> f64 {
    let range = max - min;
    if range <= 1e-12 * max.abs().max(min.abs()).max(1.0) {
        0.5
    } else {
        ((v - min) / range).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub raw_dim: usize,
    pub rows: Vec<Vec<f64>>,
    pub projected: Vec<Point2>,
    pub transform: Projection,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Read comma-separated numeric records. Blank lines are skipped.
pub fn read_csv<R: Read>(reader: R, has_header: bool) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Ingest(e.to_string()))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(k + 1 + usize::from(has_header));
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse { row: line, column: c + 1, value: cell.to_string() }),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Project rows onto their top two principal axes and scale into the unit
/// square.
pub fn ingest(rows: Vec<Vec<f64>>, options: IngestOptions) -> Result<Dataset> {
    let Some(first) = rows.first() else {
        return Err(Error::Ingest("no records".into()));
    };
    let d = first.len();
    if d < 2 {
        return Err(Error::Ingest(format!("records need at least 2 fields, got {d}")));
    }
    if let Some(k) = rows.iter().position(|r| r.len() != d) {
        return Err(Error::Ingest(format!(
            "record {} has {} fields, expected {d}",
            k + 1,
            rows[k].len()
        )));
    }
    if let Some((k, c)) = rows
        .iter()
        .enumerate()
        .find_map(|(k, r)| r.iter().position(|v| !v.is_finite()).map(|c| (k, c)))
    {
        return Err(Error::Parse { row: k + 1, column: c + 1, value: rows[k][c].to_string() });
    }

    let n = rows.len() as f64;
    let mut center = vec![0.0; d];
    for r in &rows {
        for (c, v) in center.iter_mut().zip(r) {
            *c += v;
        }
    }
    center.iter_mut().for_each(|c| *c /= n);

    let mut cov = vec![vec![0.0; d]; d];
    for r in &rows {
        for a in 0..d {
            let da = r[a] - center[a];
            for b in a..d {
                cov[a][b] += da * (r[b] - center[b]);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            cov[a][b] /= n;
            cov[b][a] = cov[a][b];
        }
    }
    let trace: f64 = (0..d).map(|a| cov[a][a]).sum();
    let magnitude = center.iter().map(|c| c * c).sum::<f64>().max(1.0);
    if trace <= f64::EPSILON * f64::EPSILON * magnitude {
        return Err(Error::Ingest("data has zero variance".into()));
    }

    let (v1, l1) = power_iteration(&cov, &[]);
    let mut deflated = cov.clone();
    for a in 0..d {
        for b in 0..d {
            deflated[a][b] -= l1 * v1[a] * v1[b];
        }
    }
    let (v2, l2) = power_iteration(&deflated, &[&v1]);

    let mut projection = Projection {
        center,
        axes: [v1, v2],
        variances: [l1, l2.max(0.0)],
        min: [f64::INFINITY; 2],
        max: [f64::NEG_INFINITY; 2],
        rank_uniformized: options.rank_uniformize,
        sorted: [Vec::new(), Vec::new()],
    };
    let raw: Vec<[f64; 2]> = rows.iter().map(|r| projection.project_raw(r)).collect();
    for p in &raw {
        for a in 0..2 {
            projection.min[a] = projection.min[a].min(p[a]);
            projection.max[a] = projection.max[a].max(p[a]);
        }
    }
    if options.rank_uniformize {
        for a in 0..2 {
            let mut s: Vec<f64> = raw.iter().map(|p| p[a]).collect();
            s.sort_by(f64::total_cmp);
            projection.sorted[a] = s;
        }
    }
    let projected = rows.iter().map(|r| projection.apply(r)).collect();
    Ok(Dataset { raw_dim: d, rows, projected, transform: projection })
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [f64], against: &[&Vec<f64>]) {
    for u in against {
        let dot: f64 = v.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(u.iter()).for_each(|(a, b)| *a -= dot * b);
    }
}

/// Dominant eigenpair of a symmetric positive semidefinite matrix, orthogonal
/// to `against`. Starts from the matrix column of largest norm, falling back
/// to the coordinate axis least aligned with `against`.
fn power_iteration(m: &[Vec<f64>], against: &[&Vec<f64>]) -> (Vec<f64>, f64) {
    let d = m.len();
    let scale = m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut v: Vec<f64> = (0..d)
        .map(|c| (0..d).map(|r| m[r][c]).collect::<Vec<f64>>())
        .max_by(|a, b| norm(a).total_cmp(&norm(b)))
        .unwrap();
    orthogonalize(&mut v, against);
    if norm(&v) <= 1e-12 * scale {
        let k = (0..d)
            .min_by(|&a, &b| {
                let wa: f64 = against.iter().map(|u| u[a].abs()).sum();
                let wb: f64 = against.iter().map(|u| u[b].abs()).sum();
                wa.total_cmp(&wb)
            })
            .unwrap();
        v = vec![0.0; d];
        v[k] = 1.0;
        orthogonalize(&mut v, against);
    }
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    for _ in 0..POWER_ITERATIONS {
        let mut next = mat_vec(m, &v);
        orthogonalize(&mut next, against);
        let nn = norm(&next);
        if nn <= 1e-14 * scale {
            break;
        }
        next.iter_mut().for_each(|x| *x /= nn);
        let change = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if change < POWER_TOL {
            break;
        }
    }
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let lambda = v.iter().zip(mat_vec(m, &v)).map(|(a, b)| a * b).sum();
    (v, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| vec![rng.random::<f64>() * 0.9 + 0.05, rng.random::<f64>() * 0.3 + 0.35]).collect()
    }

    #[test]
    fn axis_aligned_data_passes_through() {
        let rows: Vec<Vec<f64>> =
            (0..200).map(|k| vec![0.05 + 0.9 * (k % 20) as f64 / 19.0, 0.35 + 0.3 * (k / 20) as f64 / 9.0]).collect();
        let ds = ingest(rows.clone(), IngestOptions::default()).unwrap();
        // Largest variance along x, so the axes are e1 and e2 up to sign.
        assert!((ds.transform.axes[0][0].abs() - 1.0).abs() < 1e-9);
        assert!((ds.transform.axes[1][1].abs() - 1.0).abs() < 1e-9);
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r[0], r[1])).unzip();
        let lo = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (r, p) in rows.iter().zip(&ds.projected) {
            let ex = (r[0] - lo(&xs)) / (hi(&xs) - lo(&xs));
            let ey = (r[1] - lo(&ys)) / (hi(&ys) - lo(&ys));
            let px = if ds.transform.axes[0][0] > 0.0 { p.x } else { 1.0 - p.x };
            let py = if ds.transform.axes[1][1] > 0.0 { p.y } else { 1.0 - p.y };
            assert!((px - ex).abs() < 1e-9 && (py - ey).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_column_is_ignored() {
        let rows = cloud(150, 2);
        let padded: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[1], 3.5]).collect();
        let a = ingest(rows, IngestOptions::default()).unwrap();
        let b = ingest(padded, IngestOptions::default()).unwrap();
        for (p, q) in a.projected.iter().zip(&b.projected) {
            assert!(p.dist(q) < 1e-9);
        }
    }

    #[test]
    fn lifted_line_recovers_its_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lift = DMatrix::<f64>::from_fn(5, 2, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|_| {
                let t: f64 = rng.random();
                let v = &lift * nalgebra::DVector::from_vec(vec![t, t]);
                v.iter().copied().collect()
            })
            .collect();
        let ds = ingest(rows.clone(), IngestOptions::default()).unwrap();

        let n = rows.len() as f64;
        let data = DMatrix::from_fn(rows.len(), 5, |i, j| rows[i][j]);
        let mean = data.row_mean();
        let centered = DMatrix::from_fn(rows.len(), 5, |i, j| data[(i, j)] - mean[j]);
        let cov = centered.transpose() * &centered / n;
        let eig = SymmetricEigen::new(cov);
        let top = eig.eigenvalues.imax();
        let oracle = eig.eigenvectors.column(top);
        let dot: f64 = ds.transform.axes[0].iter().zip(oracle.iter()).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-9);
        assert!((ds.transform.variances[0] - eig.eigenvalues[top]).abs() < 1e-9 * eig.eigenvalues[top]);
        assert!(ds.transform.variances[1] < 1e-8 * ds.transform.variances[0]);
    }

    #[test]
    fn five_dimensional_axes_match_eigendecomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let scales = [3.0, 2.0, 1.0, 0.5, 0.25];
        let rows: Vec<Vec<f64>> =
            (0..300).map(|_| scales.iter().map(|s| s * (rng.random::<f64>() - 0.5) + 0.1).collect()).collect();
        let ds = ingest(rows.clone(), IngestOptions::default()).unwrap();
        let n = rows.len() as f64;
        let data = DMatrix::from_fn(rows.len(), 5, |i, j| rows[i][j]);
        let mean = data.row_mean();
        let centered = DMatrix::from_fn(rows.len(), 5, |i, j| data[(i, j)] - mean[j]);
        let eig = SymmetricEigen::new(centered.transpose() * &centered / n);
        let mut order: Vec<usize> = (0..5).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        for a in 0..2 {
            let col = eig.eigenvectors.column(order[a]);
            let dot: f64 = ds.transform.axes[a].iter().zip(col.iter()).map(|(x, y)| x * y).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-8, "axis {a}: {dot}");
            let first = ds.transform.axes[a].iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn projected_points_stay_in_the_unit_square_and_replay() {
        for rank in [false, true] {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let rows: Vec<Vec<f64>> = (0..80).map(|_| (0..4).map(|_| rng.random::<f64>() * 10.0).collect()).collect();
            let ds = ingest(rows.clone(), IngestOptions { rank_uniformize: rank }).unwrap();
            assert!(ds.projected.iter().all(Point2::in_unit_square));
            for (r, p) in rows.iter().zip(&ds.projected) {
                assert_eq!(ds.transform.apply(r), *p);
            }
            if rank {
                let mut xs: Vec<f64> = ds.projected.iter().map(|p| p.x).collect();
                xs.sort_by(f64::total_cmp);
                for (k, x) in xs.iter().enumerate() {
                    assert!((x - (k + 1) as f64 / 81.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ingest(vec![vec![1.0]; 5], IngestOptions::default()), Err(Error::Ingest(_))));
        assert!(matches!(ingest(vec![vec![1.0, 2.0]; 5], IngestOptions::default()), Err(Error::Ingest(_))));
        assert!(matches!(ingest(vec![], IngestOptions::default()), Err(Error::Ingest(_))));
        let err = read_csv("a,b\n1,2\n3,x\n".as_bytes(), true).unwrap_err();
        assert_eq!(err, Error::Parse { row: 3, column: 2, value: "x".into() });
        let rows = read_csv("1, 2\n\n3,4\n".as_bytes(), false).unwrap();
        assert_eq!(rows, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }
}
