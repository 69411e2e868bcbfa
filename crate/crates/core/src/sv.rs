//! Support vectors of the shifted-line detector, found by iterated
//! boundary harvesting rather than quadratic programming.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::pipeline::{farthest_regular, AnomalyReport, DetectorModel};

/// Absolute tolerance for distance ties.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportVectorSet {
    /// Harvested anomalies, ascending.
    pub anomaly_side: Vec<usize>,
    /// Harvested regular points, ascending.
    pub regular_side: Vec<usize>,
    pub equivalency_class: Vec<usize>,
    pub x_star: usize,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("gamma must lie in (0, 1), got {gamma}")))
    }
}

fn not_separable() -> Error {
    Error::NotSeparable("no anomalous points to harvest".into())
}

/// Anomalies closest to the shifted line, harvested over at most `N0²`
/// rounds. Each round removes the harvested points and the class of the
/// round's minimizer.
pub fn extract_anomaly_side(report: &AnomalyReport, gamma: f64, n0: u64) -> Result<Vec<usize>> {
    check_gamma(gamma)?;
    if report.anomalous_points.is_empty() {
        return Err(not_separable());
    }
    let d = &report.distances;
    let mut anomalies = report.anomalous_points.clone();
    let mut regular = report.regular_points.clone();
    let mut out = Vec::new();
    for _ in 0..n0 * n0 {
        if anomalies.is_empty() {
            break;
        }
        let floor = farthest_regular(report, &regular).map_or(0.0, |y| d[y].abs());
        let mut x = anomalies[0];
        for &a in &anomalies {
            if d[a].abs() < d[x].abs() {
                x = a;
            }
        }
        let d_theta = d[x].abs() - floor;
        let side = if d[x] < 0.0 { -1.0 } else { 1.0 };
        let shift = side * (d[x].abs() - gamma * d_theta);
        let gap = |i: usize| (d[i] - shift).abs();
        let least = anomalies.iter().map(|&i| gap(i)).fold(f64::INFINITY, f64::min);
        let harvest: Vec<usize> = anomalies.iter().copied().filter(|&i| gap(i) <= least + TOLERANCE).collect();
        let class = report.class_of[x];
        anomalies.retain(|i| !harvest.contains(i) && report.class_of[*i] != class);
        regular.retain(|i| report.class_of[*i] != class);
        out.extend(harvest);
    }
    out.sort_unstable();
    Ok(out)
}

/// Regular points farthest from the base line, harvested over at most
/// `N0²` rounds. Each round removes the harvested points and the class of
/// the farthest one.
pub fn extract_regular_side(report: &AnomalyReport, n0: u64) -> Result<Vec<usize>> {
    if report.anomalous_points.is_empty() {
        return Err(not_separable());
    }
    let d = &report.distances;
    let mut regular = report.regular_points.clone();
    let mut out = Vec::new();
    for _ in 0..n0 * n0 {
        let Some(y) = farthest_regular(report, &regular) else { break };
        let top = d[y].abs();
        let harvest: Vec<usize> = regular.iter().copied().filter(|&i| d[i].abs() >= top - TOLERANCE).collect();
        let class = report.class_of[y];
        regular.retain(|i| !harvest.contains(i) && report.class_of[*i] != class);
        out.extend(harvest);
    }
    out.sort_unstable();
    Ok(out)
}

/// Points attaining the min-max gap, together with every point within
/// `d_theta` of the shifted line or its mirror image across the base line.
pub fn equivalency_class(report: &AnomalyReport, model: &DetectorModel) -> Vec<usize> {
    if report.anomalous_points.is_empty() {
        return Vec::new();
    }
    let d = &report.distances;
    let floor = model.y_hat.map_or(0.0, |y| d[y].abs());
    let attains = |i: usize| report.is_anomalous(i) && d[i].abs() - floor <= model.d_theta + TOLERANCE;
    let near = |i: usize| (d[i].abs() - model.theta_gamma).abs() <= model.d_theta + TOLERANCE;
    (0..d.len()).filter(|&i| attains(i) || near(i)).collect()
}

pub fn support_vectors(report: &AnomalyReport, model: &DetectorModel, n0: u64) -> Result<SupportVectorSet> {
    Ok(SupportVectorSet {
        anomaly_side: extract_anomaly_side(report, model.gamma, n0)?,
        regular_side: extract_regular_side(report, n0)?,
        equivalency_class: equivalency_class(report, model),
        x_star: model.x_star,
    })
}
