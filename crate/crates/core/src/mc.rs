//! Monte Carlo percolation lab.
//!
//! Every estimate is computed over a bank of point samples drawn once per
//! [`Experiment`]. All radii and both graph modes are evaluated on the same
//! samples (common random numbers), so per-trial monotone relations carry
//! over to the estimates exactly rather than statistically.
//!
//! Note on determinism: trial `t` draws from the ChaCha8 stream `t` of the
//! master seed. Trials run on a dedicated rayon pool and results are
//! collected by trial index, so the output does not depend on the number of
//! workers or on scheduling order.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geom::Point2;
use crate::rgg::{self, GraphMode};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    FixedN,
    PoissonLambda,
}

/// Random point process on the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeProcessSpec {
    pub count_mode: CountMode,
    pub n_or_lambda: f64,
    pub seed: u64,
}

impl NodeProcessSpec {
    pub fn fixed(n: usize, seed: u64) -> Self {
        Self { count_mode: CountMode::FixedN, n_or_lambda: n as f64, seed }
    }

    pub fn poisson(lambda: f64, seed: u64) -> Self {
        Self { count_mode: CountMode::PoissonLambda, n_or_lambda: lambda, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.n_or_lambda;
        match self.count_mode {
            CountMode::FixedN if v >= 0.0 && v.fract() == 0.0 && v.is_finite() => Ok(()),
            CountMode::FixedN => Err(domain(format!("fixed point count must be a non-negative integer, got {v}"))),
            CountMode::PoissonLambda if v > 0.0 && v.is_finite() => Ok(()),
            CountMode::PoissonLambda => Err(domain(format!("Poisson intensity must be positive, got {v}"))),
        }
    }

    /// Generator for trial `trial`: stream `trial` of the master seed.
    pub fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<Point2>> {
        self.validate()?;
        let n = match self.count_mode {
            CountMode::FixedN => self.n_or_lambda as usize,
            CountMode::PoissonLambda => {
                let dist = Poisson::new(self.n_or_lambda).map_err(|e| domain(e.to_string()))?;
                dist.sample(rng) as usize
            }
        };
        Ok((0..n).map(|_| Point2::new(rng.random(), rng.random())).collect())
    }

    pub fn sample_trial(&self, trial: u64) -> Result<Vec<Point2>> {
        self.sample_with(&mut self.trial_rng(trial))
    }
}

/// Points of the node process for the spec's seed (trial 0).
pub fn sample(spec: &NodeProcessSpec) -> Result<Vec<Point2>> {
    spec.sample_trial(0)
}

/// Proportion of successes with a 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbEstimate {
    pub p_hat: f64,
    pub successes: usize,
    pub trials: usize,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ProbEstimate {
    pub fn wilson(successes: usize, trials: usize) -> Self {
        assert!(trials > 0 && successes <= trials);
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z_95 * Z_95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Self {
            p_hat: p,
            successes,
            trials,
            ci_low: (center - half).clamp(0.0, p),
            ci_high: (center + half).clamp(p, 1.0),
        }
    }

    pub fn from_outcomes(outcomes: &[bool]) -> Self {
        Self::wilson(outcomes.iter().filter(|&&b| b).count(), outcomes.len())
    }

    pub fn overlaps(&self, other: &ProbEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCurve {
    pub mode: GraphMode,
    pub radii: Vec<f64>,
    pub p_hats: Vec<ProbEstimate>,
    /// Every radius was evaluated on the same point samples.
    pub coupled: bool,
}

impl ThresholdCurve {
    pub fn is_non_decreasing(&self) -> bool {
        self.p_hats.windows(2).all(|w| w[0].p_hat <= w[1].p_hat)
    }
}

/// One CSV row of experiment output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRecord {
    pub n: f64,
    pub rho: f64,
    pub mode: GraphMode,
    pub r: f64,
    pub trials: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// Radius at which every point set in the unit square is a single cluster.
pub fn universal_radius(mode: GraphMode) -> f64 {
    match mode {
        GraphMode::Continuum => 2.0 * std::f64::consts::SQRT_2,
        // Hexagons with circumradius >= the set's diameter leave only
        // edge-sharing cells occupied.
        GraphMode::Hex => 8.0 * std::f64::consts::SQRT_2,
    }
}

/// Per-sample radius that joins all points into one cluster: twice the
/// diameter in continuum mode, eight times it in hex mode.
pub fn full_connectivity_radius(points: &[Point2], mode: GraphMode) -> f64 {
    let mut diam2: f64 = 0.0;
    for (k, a) in points.iter().enumerate() {
        for b in &points[k + 1..] {
            diam2 = diam2.max(a.dist2(b));
        }
    }
    let diam = diam2.sqrt();
    if diam == 0.0 {
        return 1.0;
    }
    match mode {
        GraphMode::Continuum => 2.0 * diam,
        GraphMode::Hex => 8.0 * diam,
    }
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("tolerance must be positive, got {tol}")))
    }
}

/// Spacing `2^-k` of the probe grid: the largest power of two not above `tol`.
pub fn dyadic_step(tol: f64) -> f64 {
    let k = (-tol.log2()).ceil().clamp(0.0, 52.0);
    (-k).exp2()
}

/// Per-trial outcomes keyed by mode and radius bits.
type OutcomeCache = HashMap<(GraphMode, u64), Arc<Vec<bool>>>;

/// A bank of coupled samples for one node process and occupancy target.
#[derive(Debug)]
pub struct Experiment {
    spec: NodeProcessSpec,
    rho: f64,
    samples: Vec<Vec<Point2>>,
    pool: rayon::ThreadPool,
    cache: Mutex<OutcomeCache>,
}

impl Experiment {
    pub fn new(spec: NodeProcessSpec, rho: f64, trials: usize, workers: usize) -> Result<Self> {
        spec.validate()?;
        rgg::check_rho(rho)?;
        if trials == 0 {
            return Err(domain("trials must be at least 1"));
        }
        if workers == 0 {
            return Err(domain("workers must be at least 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::State(format!("cannot start worker pool: {e}")))?;
        let samples = pool.install(|| {
            (0..trials as u64).into_par_iter().map(|t| spec.sample_trial(t)).collect::<Result<Vec<_>>>()
        })?;
        Ok(Self { spec, rho, samples, pool, cache: Mutex::new(HashMap::new()) })
    }

    pub fn spec(&self) -> &NodeProcessSpec {
        &self.spec
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn trials(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Vec<Point2>] {
        &self.samples
    }

    /// Whether each trial's graph at radius `r` has a dominant component.
    pub fn outcomes(&self, r: f64, mode: GraphMode) -> Result<Arc<Vec<bool>>> {
        if !(r.is_finite() && r > 0.0) {
            return Err(domain(format!("radius must be positive and finite, got {r}")));
        }
        let key = (mode, r.to_bits());
        if let Some(hit) = self.cache.lock().expect("outcome cache poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let rho = self.rho;
        let computed = self.pool.install(|| {
            self.samples
                .par_iter()
                .map(|pts| {
                    let uf = rgg::component_forest(pts, r, mode)?;
                    Ok(rgg::dominant(uf.largest(), pts.len(), rho))
                })
                .collect::<Result<Vec<bool>>>()
        })?;
        let computed = Arc::new(computed);
        self.cache.lock().expect("outcome cache poisoned").insert(key, Arc::clone(&computed));
        Ok(computed)
    }

    pub fn estimate(&self, r: f64, mode: GraphMode) -> Result<ProbEstimate> {
        Ok(ProbEstimate::from_outcomes(&self.outcomes(r, mode)?))
    }

    /// Outcomes with each trial evaluated at its own full-connectivity radius.
    pub fn full_radius_outcomes(&self, mode: GraphMode) -> Result<Vec<bool>> {
        let rho = self.rho;
        self.pool.install(|| {
            self.samples
                .par_iter()
                .map(|pts| {
                    let r = full_connectivity_radius(pts, mode);
                    let uf = rgg::component_forest(pts, r, mode)?;
                    Ok(rgg::dominant(uf.largest(), pts.len(), rho))
                })
                .collect()
        })
    }

    /// Estimates along sorted radii. In continuum mode every trial is
    /// checked to switch on at most once along the radii.
    pub fn curve(&self, radii: &[f64], mode: GraphMode) -> Result<ThresholdCurve> {
        if radii.is_empty() {
            return Err(domain("radii list is empty"));
        }
        if radii.windows(2).any(|w| w[0] > w[1]) {
            return Err(domain("radii must be sorted ascending"));
        }
        let mut p_hats = Vec::with_capacity(radii.len());
        let mut prev: Option<Arc<Vec<bool>>> = None;
        for &r in radii {
            let cur = self.outcomes(r, mode)?;
            if let (GraphMode::Continuum, Some(prev)) = (mode, &prev) {
                if let Some(t) = prev.iter().zip(cur.iter()).position(|(&a, &b)| a && !b) {
                    return Err(Error::Inconsistent(format!(
                        "trial {t} lost its dominant component when the radius grew to {r}"
                    )));
                }
            }
            p_hats.push(ProbEstimate::from_outcomes(&cur));
            prev = Some(cur);
        }
        Ok(ThresholdCurve { mode, radii: radii.to_vec(), p_hats, coupled: true })
    }

    /// Smallest probe radius on the dyadic grid of spacing at most `tol`
    /// whose estimate satisfies `accept`. Probes gallop upward from the
    /// grid spacing, then bisect; `accept` must be monotone along the curve.
    pub fn first_radius(&self, mode: GraphMode, tol: f64, accept: impl Fn(&ProbEstimate) -> bool) -> Result<f64> {
        check_tol(tol)?;
        let step = dyadic_step(tol);
        let top = (universal_radius(mode) / step).ceil() as u64;
        let test = |k: u64| -> Result<bool> { Ok(accept(&self.estimate(k as f64 * step, mode)?)) };
        let mut hi = 1u64;
        let mut lo = 0u64;
        while !test(hi)? {
            if hi >= top {
                return Err(Error::Estimation(format!(
                    "target not reached by radius {} in {mode} mode",
                    top as f64 * step
                )));
            }
            lo = hi;
            hi = (hi * 2).min(top);
        }
        // Invariant: test(hi) holds, and lo is 0 or fails.
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if test(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi as f64 * step)
    }

    /// Smallest grid radius with `p_hat >= eps`.
    pub fn r_eps(&self, mode: GraphMode, eps: f64, tol: f64) -> Result<f64> {
        check_unit_interval("eps", eps)?;
        self.first_radius(mode, tol, |e| e.p_hat >= eps)
    }

    /// `r(1 - eps) - r(eps)` on the shared samples.
    pub fn delta(&self, mode: GraphMode, eps: f64, tol: f64) -> Result<f64> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(domain(format!("eps must lie in (0, 1/2), got {eps}")));
        }
        let low = self.r_eps(mode, eps, tol)?;
        let high = self.r_eps(mode, 1.0 - eps, tol)?;
        Ok(high - low)
    }

    /// Radii between which one half lies inside the 95% interval: from the
    /// first radius whose upper bound reaches 1/2 to the first whose lower
    /// bound does.
    pub fn median_bracket(&self, mode: GraphMode, tol: f64) -> Result<(f64, f64)> {
        let lo = self.first_radius(mode, tol, |e| e.ci_high >= 0.5)?;
        let hi = self.first_radius(mode, tol, |e| e.ci_low >= 0.5)?;
        Ok((lo, hi))
    }

    /// Continuum and hexagonal estimates on the same samples. Fails if any
    /// trial has the hexagonal property without the continuum one.
    pub fn compare(&self, r: f64) -> Result<(ProbEstimate, ProbEstimate)> {
        let cont = self.outcomes(r, GraphMode::Continuum)?;
        let hex = self.outcomes(r, GraphMode::Hex)?;
        check_hex_implies_continuum(&hex, &cont, r)?;
        Ok((ProbEstimate::from_outcomes(&cont), ProbEstimate::from_outcomes(&hex)))
    }

    pub fn record(&self, r: f64, mode: GraphMode, est: &ProbEstimate) -> SimRecord {
        SimRecord {
            n: self.spec.n_or_lambda,
            rho: self.rho,
            mode,
            r,
            trials: est.trials,
            p_hat: est.p_hat,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            seed: self.spec.seed,
        }
    }
}

pub fn check_hex_implies_continuum(hex: &[bool], cont: &[bool], r: f64) -> Result<()> {
    match hex.iter().zip(cont).position(|(&h, &c)| h && !c) {
        Some(t) => Err(Error::Inconsistent(format!(
            "trial {t} has a dominant H_r component but no dominant r component at r = {r}"
        ))),
        None => Ok(()),
    }
}

pub fn estimate_prob(
    spec: &NodeProcessSpec,
    rho: f64,
    r: f64,
    mode: GraphMode,
    trials: usize,
    workers: usize,
) -> Result<ProbEstimate> {
    Experiment::new(*spec, rho, trials, workers)?.estimate(r, mode)
}

pub fn threshold_curve(
    spec: &NodeProcessSpec,
    rho: f64,
    mode: GraphMode,
    radii: &[f64],
    trials: usize,
    workers: usize,
) -> Result<ThresholdCurve> {
    Experiment::new(*spec, rho, trials, workers)?.curve(radii, mode)
}

pub fn estimate_r_eps(
    spec: &NodeProcessSpec,
    rho: f64,
    mode: GraphMode,
    eps: f64,
    trials: usize,
    tol: f64,
    workers: usize,
) -> Result<f64> {
    Experiment::new(*spec, rho, trials, workers)?.r_eps(mode, eps, tol)
}

pub fn estimate_delta(
    spec: &NodeProcessSpec,
    rho: f64,
    mode: GraphMode,
    eps: f64,
    trials: usize,
    tol: f64,
    workers: usize,
) -> Result<f64> {
    Experiment::new(*spec, rho, trials, workers)?.delta(mode, eps, tol)
}

pub fn compare_models(
    spec: &NodeProcessSpec,
    rho: f64,
    r: f64,
    trials: usize,
    workers: usize,
) -> Result<(ProbEstimate, ProbEstimate)> {
    Experiment::new(*spec, rho, trials, workers)?.compare(r)
}

/// Least-squares slope `c` of `ln p_hat ≈ a - c (r0 - r) ln n` over curve
/// points below `r0` with a positive estimate. Returns `None` with fewer
/// than two usable points.
pub fn fit_tail_exponent(curve: &ThresholdCurve, r0: f64, n: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = curve
        .radii
        .iter()
        .zip(&curve.p_hats)
        .filter(|(&r, e)| r < r0 && e.p_hat > 0.0)
        .map(|(&r, e)| ((r0 - r) * n.ln(), e.p_hat.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}
