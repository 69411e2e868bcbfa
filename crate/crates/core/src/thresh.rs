//! Closed-form thresholds for partitioning `M²` points into `N²` classes
//! with hexagons.
//!
//! | quantity | value |
//! |---|---|
//! | hexagon count `S` | `M² + 2M(N-1)²` |
//! | circumradius bound `R` | `1 / (2 sqrt(S))` |
//! | diameter `B` | `2R` |
//! | critical radius estimate `r0*` | `(1/(2N) + R) / 2` |
//! | threshold interval length `Δ*` | `1/(2N) - R` |
//! | site percolation threshold `p_c` | `1 - 2 sin(π/18)` |

use serde::Serialize;

use crate::error::{domain, Result};

/// Critical site-occupation probability of the hexagonal lattice.
pub fn critical_probability() -> f64 {
    1.0 - 2.0 * (std::f64::consts::PI / 18.0).sin()
}

fn check_mn(m: u64, n: u64) -> Result<()> {
    if m == 0 {
        return Err(domain("M must be at least 1"));
    }
    if n == 0 {
        return Err(domain("N must be at least 1"));
    }
    if n > m {
        return Err(domain(format!("N > M (N = {n}, M = {m}); the class grid cannot exceed the sample grid")));
    }
    Ok(())
}

/// Minimum number of hexagons partitioning `M²` points into `N²` classes.
pub fn hex_count(m: u64, n: u64) -> Result<u64> {
    check_mn(m, n)?;
    Ok(m * m + 2 * m * (n - 1) * (n - 1))
}

pub fn circumradius(m: u64, n: u64) -> Result<f64> {
    let s = hex_count(m, n)? as f64;
    Ok(1.0 / (2.0 * s.sqrt()))
}

pub fn diameter(m: u64, n: u64) -> Result<f64> {
    Ok(2.0 * circumradius(m, n)?)
}

/// Real root `N = 1 + sqrt(M (1 - ρ) / (2ρ))` of `M² / S(M, N) = ρ`.
pub fn class_grid_root(m: u64, rho: f64) -> Result<f64> {
    if m == 0 {
        return Err(domain("M must be at least 1"));
    }
    let pc = critical_probability();
    if !(rho > 0.0 && rho <= pc) {
        return Err(domain(format!("rho must lie in (0, p_c] = (0, {pc}], got {rho}")));
    }
    Ok(1.0 + (m as f64 * (1.0 - rho) / (2.0 * rho)).sqrt())
}

/// Expected number of classes `K = N²`, with `N` the ceiling of the real
/// root clamped to `M`.
pub fn expected_classes(m: u64, rho: f64) -> Result<u64> {
    let root = class_grid_root(m, rho)?;
    // The ceiling of the real root can land one off when the root is an
    // integer; settle it on the exact occupancy ratio M² / S(M, N).
    let occupancy = |n: u64| (m * m) as f64 / (m * m + 2 * m * (n - 1) * (n - 1)) as f64;
    let mut n = (root.ceil() as u64).max(1);
    while n > 1 && occupancy(n - 1) <= rho {
        n -= 1;
    }
    while occupancy(n) > rho {
        n += 1;
    }
    let n = n.min(m);
    Ok(n * n)
}

/// Nearest integer solution of `M² + 2M(N-1)² - 2M² = 0`.
pub fn majority_n(m: u64) -> Result<u64> {
    if m == 0 {
        return Err(domain("M must be at least 1"));
    }
    Ok((1.0 + (m as f64 / 2.0).sqrt()).round() as u64)
}

/// Midpoint of `R(M, N)` and `1/(2N)`.
pub fn estimate_r0_star(m: u64, n: u64) -> Result<f64> {
    let r = circumradius(m, n)?;
    Ok((1.0 / (2.0 * n as f64) + r) / 2.0)
}

/// Length `1/(2N) - R(M, N)` of the sharp-threshold interval estimate.
pub fn interval_length(m: u64, n: u64) -> Result<f64> {
    let r = circumradius(m, n)?;
    let delta = 1.0 / (2.0 * n as f64) - r;
    if delta <= 0.0 {
        return Err(domain(format!(
            "interval length 1/(2N) - R(M,N) = {delta} is not positive for M = {m}, N = {n}"
        )));
    }
    Ok(delta)
}

/// Order estimate `sqrt(ln n / n)` of the continuum critical radius.
pub fn continuum_rc(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("n must be at least 2, got {n}")));
    }
    let n = n as f64;
    Ok((n.ln() / n).sqrt())
}

/// All closed-form quantities for one `(M, N)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdParams {
    pub m: u64,
    pub n: u64,
    /// Hexagon occupancy target, when one was supplied.
    pub rho: Option<f64>,
    pub s: u64,
    pub r: f64,
    pub b: f64,
    pub p_c: f64,
    /// Expected class count for `rho`, when supplied.
    pub k: Option<u64>,
    pub r0_star: f64,
    /// `None` when `1/(2N) <= R(M, N)`.
    pub delta_star: Option<f64>,
    /// Side of the raw record grid (`T²` rows), carried as metadata.
    pub t: Option<u64>,
}

impl ThresholdParams {
    pub fn compute(m: u64, n: u64, rho: Option<f64>) -> Result<Self> {
        let k = rho.map(|rho| expected_classes(m, rho)).transpose()?;
        Ok(Self {
            m,
            n,
            rho,
            s: hex_count(m, n)?,
            r: circumradius(m, n)?,
            b: diameter(m, n)?,
            p_c: critical_probability(),
            k,
            r0_star: estimate_r0_star(m, n)?,
            delta_star: interval_length(m, n).ok(),
            t: None,
        })
    }
}
