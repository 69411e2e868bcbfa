use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::geom::Point2;
use crate::rgg::ClusterSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hyperplane {
    /// Unit normal.
    pub w: [f64; 2],
    pub theta: f64,
}

impl Hyperplane {
    pub fn new(w: [f64; 2], theta: f64) -> Result<Self> {
        let norm = w[0].hypot(w[1]);
        if !(norm > 0.0) || !theta.is_finite() {
            return Err(domain("hyperplane normal must be nonzero and finite"));
        }
        Ok(Self { w: [w[0] / norm, w[1] / norm], theta: theta / norm })
    }
}

pub fn signed_distance(p: Point2, h: &Hyperplane) -> f64 {
    h.w[0] * p.x + h.w[1] * p.y - h.theta
}

/// Orthogonal least-squares line through the centroid of `points`.
pub fn fit_hyperplane(points: &[Point2]) -> Result<Hyperplane> {
    let Some(first) = points.first() else {
        return Err(Error::DegenerateFit("no points".into()));
    };
    if points.iter().all(|p| p == first) {
        return Err(Error::DegenerateFit("all points coincide".into()));
    }
    let k = points.len() as f64;
    let cx = points.iter().map(|p| p.x).sum::<f64>() / k;
    let cy = points.iter().map(|p| p.y).sum::<f64>() / k;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p.x - cx, p.y - cy);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // Direction of largest spread; the normal is perpendicular to it.
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut w = [-phi.sin(), phi.cos()];
    if w[0] < -1e-15 || (w[0].abs() <= 1e-15 && w[1] < 0.0) {
        w = [-w[0], -w[1]];
    }
    Ok(Hyperplane { w, theta: w[0] * cx + w[1] * cy })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnomalyReport {
    pub r0: f64,
    /// Cluster ids whose center lies at least `r0` from the plane.
    pub anomalous_classes: Vec<usize>,
    /// Indices at least `r0` from the plane, ascending.
    pub anomalous_points: Vec<usize>,
    pub regular_points: Vec<usize>,
    /// Signed distance of every point to the plane.
    pub distances: Vec<f64>,
    /// Signed distance of every cluster center to the plane.
    pub center_distances: Vec<f64>,
    pub class_of: Vec<usize>,
}

impl AnomalyReport {
    pub fn is_anomalous(&self, i: usize) -> bool {
        self.distances[i].abs() >= self.r0
    }
}

pub fn detect(points: &[Point2], clusters: &ClusterSet, h: &Hyperplane, r0: f64) -> Result<AnomalyReport> {
    if !(r0 > 0.0) {
        return Err(domain(format!("R0 must be positive, got {r0}")));
    }
    if clusters.n() != points.len() {
        return Err(domain("cluster assignment does not cover the points"));
    }
    let distances: Vec<f64> = points.iter().map(|&p| signed_distance(p, h)).collect();
    let center_distances: Vec<f64> = clusters.centers.iter().map(|&c| signed_distance(c, h)).collect();
    let anomalous_classes = (0..clusters.len()).filter(|&c| center_distances[c].abs() >= r0).collect();
    let (anomalous_points, regular_points) = (0..points.len()).partition(|&i| distances[i].abs() >= r0);
    Ok(AnomalyReport {
        r0,
        anomalous_classes,
        anomalous_points,
        regular_points,
        distances,
        center_distances,
        class_of: clusters.assignment.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorModel {
    pub base: Hyperplane,
    pub gamma: f64,
    pub d_theta: f64,
    pub theta_gamma: f64,
    pub x_star: usize,
    /// Regular point farthest from the plane, if any.
    pub y_hat: Option<usize>,
    pub w_shift: [f64; 2],
}

impl DetectorModel {
    /// Side of the plane holding `x_star`, as +1 or -1.
    pub fn side(&self, report: &AnomalyReport) -> f64 {
        if report.distances[self.x_star] < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Farthest regular point, smallest index on ties.
pub(crate) fn farthest_regular(report: &AnomalyReport, regular: &[usize]) -> Option<usize> {
    regular.iter().copied().fold(None, |best: Option<usize>, i| match best {
        Some(b) if report.distances[b].abs() >= report.distances[i].abs() => Some(b),
        _ => Some(i),
    })
}

pub fn compute_shift(report: &AnomalyReport, h: &Hyperplane, gamma: f64) -> Result<DetectorModel> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if report.anomalous_points.is_empty() {
        return Err(Error::NotSeparable("no anomalous points; the data forms a single class".into()));
    }
    let y_hat = farthest_regular(report, &report.regular_points);
    let floor = y_hat.map_or(0.0, |y| report.distances[y].abs());
    let mut x_star = report.anomalous_points[0];
    for &x in &report.anomalous_points {
        if report.distances[x].abs() < report.distances[x_star].abs() {
            x_star = x;
        }
    }
    let d_theta = report.distances[x_star].abs() - floor;
    if !(d_theta > 0.0) {
        return Err(Error::Inconsistent(format!(
            "closest anomaly is not farther from the plane than the farthest regular point (gap {d_theta})"
        )));
    }
    let theta_gamma = report.distances[x_star].abs() - gamma * d_theta;
    Ok(DetectorModel {
        base: *h,
        gamma,
        d_theta,
        theta_gamma,
        x_star,
        y_hat,
        w_shift: [(1.0 + theta_gamma) * h.w[0], (1.0 + theta_gamma) * h.w[1]],
    })
}

/// `φ(y) = w_shift·y - (θ + θ_γ)`.
pub fn activation(model: &DetectorModel, y: Point2) -> f64 {
    model.w_shift[0] * y.x + model.w_shift[1] * y.y - (model.base.theta + model.theta_gamma)
}

/// `φ` with the reflected shift `-θ_γ`.
pub fn reflected_activation(model: &DetectorModel, y: Point2) -> f64 {
    let s = 1.0 - model.theta_gamma;
    s * model.base.w[0] * y.x + s * model.base.w[1] * y.y - (model.base.theta - model.theta_gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Anomalous,
    Regular,
}

/// Anomalous outside the band of half-width `θ_γ` around the base plane.
pub fn classify(model: &DetectorModel, y: Point2) -> Label {
    if signed_distance(y, &model.base).abs() >= model.theta_gamma {
        Label::Anomalous
    } else {
        Label::Regular
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandAgreement {
    pub samples: usize,
    /// Agreement of `classify` with `φ <= 0 && φ̂ > 0 ⇔ regular` as written.
    pub literal: f64,
    /// Same test after dividing each activation by its weight norm.
    pub renormalized: f64,
}

/// Compare `classify` with the activation-band test on `points`.
pub fn band_agreement(model: &DetectorModel, points: &[Point2]) -> BandAgreement {
    let (mut literal, mut renorm) = (0usize, 0usize);
    for &y in points {
        let regular = classify(model, y) == Label::Regular;
        let phi = activation(model, y);
        let phi_hat = reflected_activation(model, y);
        if (phi <= 0.0 && phi_hat > 0.0) == regular {
            literal += 1;
        }
        // Unit-norm weights put the thresholds at θ + θ_γ and θ - θ_γ.
        let sd = signed_distance(y, &model.base);
        if (sd - model.theta_gamma <= 0.0 && sd + model.theta_gamma > 0.0) == regular {
            renorm += 1;
        }
    }
    let n = points.len().max(1) as f64;
    BandAgreement { samples: points.len(), literal: literal as f64 / n, renormalized: renorm as f64 / n }
}
