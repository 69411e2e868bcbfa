//! Projection to the plane, radius-bounded clustering, anomaly detection
//! against a regression line, and the shifted-line detector.

mod cluster;
mod detect;
mod ingest;

use serde::Serialize;

pub use cluster::{cluster, cluster_with_radius};
pub(crate) use detect::farthest_regular;
pub use detect::{
    activation, band_agreement, classify, compute_shift, detect, fit_hyperplane, reflected_activation,
    signed_distance, AnomalyReport, BandAgreement, DetectorModel, Hyperplane, Label,
};
pub use ingest::{ingest, read_csv, Dataset, IngestOptions, Projection};

use crate::error::{domain, Error, Result};
use crate::geom::Point2;
use crate::rgg::ClusterSet;
use crate::thresh;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Side of the sample grid; defaults to `ceil(sqrt(n))`.
    pub m: Option<u64>,
    /// Side of the class grid; defaults to `sqrt(expected_classes(M, rho))`.
    pub n: Option<u64>,
    pub rho: f64,
    pub gamma: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { m: None, n: None, rho: thresh::critical_probability(), gamma: 0.5 }
    }
}

/// Every stage of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineRun {
    pub m: u64,
    pub n: u64,
    /// Clustering radius `R(M, N)`.
    pub cluster_radius: f64,
    /// `ceil(sqrt(cluster count))`, clamped to `[1, M]`.
    pub n0: u64,
    pub clusters: ClusterSet,
    pub hyperplane: Hyperplane,
    pub report: AnomalyReport,
    /// `None` when no point is anomalous.
    pub detector: Option<DetectorModel>,
    /// Set when `n > M²`.
    pub warnings: Vec<String>,
}

/// Grid sides for `count` points under `config`.
pub fn resolve_grid(count: usize, config: &PipelineConfig) -> Result<(u64, u64)> {
    if count == 0 {
        return Err(domain("no points"));
    }
    let m = config.m.unwrap_or_else(|| (count as f64).sqrt().ceil() as u64).max(1);
    let n = match config.n {
        Some(n) => n,
        None => (thresh::expected_classes(m, config.rho)? as f64).sqrt().round() as u64,
    };
    thresh::hex_count(m, n)?;
    Ok((m, n))
}

/// Cluster, fit the line once on all points, detect, and build the detector.
pub fn analyze(points: &[Point2], config: &PipelineConfig) -> Result<PipelineRun> {
    let (m, n) = resolve_grid(points.len(), config)?;
    if !(config.gamma > 0.0 && config.gamma < 1.0) {
        return Err(domain(format!("gamma must lie in (0, 1), got {}", config.gamma)));
    }
    let mut warnings = Vec::new();
    if points.len() as u64 > m * m {
        warnings.push(format!("{} points exceed M² = {}", points.len(), m * m));
    }
    let cluster_radius = thresh::circumradius(m, n)?;
    let clusters = cluster_with_radius(points, cluster_radius);
    let n0 = ((clusters.len() as f64).sqrt().ceil() as u64).clamp(1, m);
    let r0 = thresh::circumradius(m, n0)?;
    let hyperplane = fit_hyperplane(points)?;
    let report = detect(points, &clusters, &hyperplane, r0)?;
    let detector = match compute_shift(&report, &hyperplane, config.gamma) {
        Ok(model) => Some(model),
        Err(Error::NotSeparable(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(PipelineRun { m, n, cluster_radius, n0, clusters, hyperplane, report, detector, warnings })
}
