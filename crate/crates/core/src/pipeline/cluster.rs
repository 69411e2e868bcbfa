use crate::error::Result;
use crate::geom::Point2;
use crate::rgg::ClusterSet;
use crate::thresh;

const MAX_ITERATIONS: usize = 100;

/// Radius-bounded k-means with radius `R(M, N)`.
pub fn cluster(points: &[Point2], m: u64, n: u64) -> Result<ClusterSet> {
    Ok(cluster_with_radius(points, thresh::circumradius(m, n)?))
}

/// Clusters whose members all lie within `radius` of their mean.
///
/// A leader-follower pass seeds the clusters, Lloyd iterations recenter
/// them (opening a singleton for any point beyond `radius` of every
/// center), clusters are merged greedily while the union still fits, and a
/// final sweep re-seeds out-of-radius members as singletons.
pub fn cluster_with_radius(points: &[Point2], radius: f64) -> ClusterSet {
    if points.is_empty() {
        return ClusterSet::from_labels(points, &[]);
    }
    let mut centers: Vec<Point2> = Vec::new();
    let mut labels = Vec::with_capacity(points.len());
    for p in points {
        match nearest(&centers, p) {
            Some((c, d)) if d <= radius => labels.push(c),
            _ => {
                labels.push(centers.len());
                centers.push(*p);
            }
        }
    }
    lloyd(points, &mut labels, radius);
    merge(points, &mut labels, radius);
    lloyd(points, &mut labels, radius);
    enforce_radius(points, &mut labels, radius);
    ClusterSet::from_labels(points, &labels)
}

fn nearest(centers: &[Point2], p: &Point2) -> Option<(usize, f64)> {
    centers
        .iter()
        .enumerate()
        .map(|(c, q)| (c, q.dist(p)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
}

fn compact(points: &[Point2], labels: &mut [usize]) -> Vec<Point2> {
    let cs = ClusterSet::from_labels(points, labels);
    labels.copy_from_slice(&cs.assignment);
    cs.centers
}

fn lloyd(points: &[Point2], labels: &mut Vec<usize>, radius: f64) {
    for _ in 0..MAX_ITERATIONS {
        let mut centers = compact(points, labels);
        let mut next = Vec::with_capacity(points.len());
        for p in points {
            match nearest(&centers, p) {
                Some((c, d)) if d <= radius => next.push(c),
                _ => {
                    next.push(centers.len());
                    centers.push(*p);
                }
            }
        }
        let cs = ClusterSet::from_labels(points, &next);
        if cs.assignment == *labels {
            return;
        }
        *labels = cs.assignment;
    }
}

fn fits(points: &[Point2], members: &[usize], radius: f64) -> bool {
    let k = members.len() as f64;
    let (sx, sy) = members.iter().fold((0.0, 0.0), |(x, y), &i| (x + points[i].x, y + points[i].y));
    let c = Point2::new(sx / k, sy / k);
    members.iter().all(|&i| points[i].dist(&c) <= radius)
}

/// Repeatedly join the closest pair of clusters whose union stays within
/// `radius` of its mean.
fn merge(points: &[Point2], labels: &mut [usize], radius: f64) {
    loop {
        let cs = ClusterSet::from_labels(points, labels);
        labels.copy_from_slice(&cs.assignment);
        let members = cs.members();
        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for a in 0..cs.len() {
            for b in a + 1..cs.len() {
                let d = cs.centers[a].dist(&cs.centers[b]);
                if d <= 2.0 * radius {
                    candidates.push((d, a, b));
                }
            }
        }
        candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let found = candidates.into_iter().find(|&(_, a, b)| {
            let union: Vec<usize> = members[a].iter().chain(&members[b]).copied().collect();
            fits(points, &union, radius)
        });
        let Some((_, a, b)) = found else { return };
        for l in labels.iter_mut() {
            if *l == b {
                *l = a;
            }
        }
    }
}

fn enforce_radius(points: &[Point2], labels: &mut [usize], radius: f64) {
    loop {
        let centers = compact(points, labels);
        let mut next_label = centers.len();
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            if p.dist(&centers[labels[i]]) > radius {
                labels[i] = next_label;
                next_label += 1;
                changed = true;
            }
        }
        if !changed {
            compact(points, labels);
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rgg::UnionFind;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn single_linkage_count(points: &[Point2], r: f64) -> usize {
        let mut uf = UnionFind::new(points.len());
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i].dist(&points[j]) <= r {
                    uf.union(i, j);
                }
            }
        }
        (0..points.len()).filter(|&i| uf.find(i) == i).count()
    }

    #[test]
    fn separated_masses_form_two_clusters() {
        let r = thresh::circumradius(10, 3).unwrap();
        let a = Point2::new(0.2, 0.5);
        let b = Point2::new(0.2 + 10.0 * r, 0.5);
        let pts: Vec<Point2> = (0..20).map(|i| if i % 2 == 0 { a } else { b }).collect();
        let cs = cluster(&pts, 10, 3).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.assignment[0], 0);
        assert_eq!(cs.assignment[1], 1);
    }

    #[test]
    fn identical_points_form_one_cluster() {
        let pts = vec![Point2::new(0.4, 0.4); 30];
        assert_eq!(cluster(&pts, 6, 2).unwrap().len(), 1);
    }

    #[test]
    fn planted_gaussian_grid() {
        let (m, n) = (30u64, 3u64);
        let r = thresh::circumradius(m, n).unwrap();
        let mut feasible = 0;
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noise = Normal::new(0.0, r / 4.0).unwrap();
            let mut pts = Vec::new();
            for k in 0..(m * m) as usize {
                let (gx, gy) = (k % 3, (k / 3) % 3);
                let c = Point2::new(0.2 + 0.3 * gx as f64, 0.2 + 0.3 * gy as f64);
                pts.push(Point2::new(c.x + noise.sample(&mut rng), c.y + noise.sample(&mut rng)));
            }
            let cs = cluster(&pts, m, n).unwrap();
            assert_eq!(single_linkage_count(&pts, r), 9, "seed {seed}");
            let planted = ClusterSet::from_labels(&pts, &(0..pts.len()).map(|k| k % 9).collect::<Vec<_>>());
            let fits = (0..pts.len()).all(|k| pts[k].dist(&planted.centers[planted.assignment[k]]) <= r);
            if fits {
                assert_eq!(cs.len(), 9, "seed {seed}");
                feasible += 1;
            } else {
                // A blob member lies beyond R of its mean and must stand alone.
                assert!(cs.len() > 9);
            }
        }
        assert!(feasible >= 8);
    }

    proptest! {
        #[test]
        fn members_stay_within_radius(
            coords in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..120),
            radius in 0.01f64..0.3,
        ) {
            let pts: Vec<Point2> = coords.iter().map(|&(x, y)| Point2::new(x, y)).collect();
            let cs = cluster_with_radius(&pts, radius);
            prop_assert_eq!(cs.sizes.iter().sum::<usize>(), pts.len());
            for (i, p) in pts.iter().enumerate() {
                prop_assert!(p.dist(&cs.centers[cs.assignment[i]]) <= radius + 1e-12);
            }
            let mut seen = vec![false; cs.len()];
            let mut expect = 0;
            for &c in &cs.assignment {
                if !seen[c] {
                    prop_assert_eq!(c, expect);
                    seen[c] = true;
                    expect += 1;
                }
            }
        }
    }
}
