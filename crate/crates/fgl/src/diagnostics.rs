//! Regularity diagnostics: measured counterparts of the qualitative
//! theorems.
//!
//! Each function turns one regularity statement into a number or a series:
//! oscillation decay over shrinking balls and its log-log Hölder exponent
//! fit, the boundary ratio |u|/d^s, the d^s operator-residual test on a
//! ball, the weak Harnack inequality with an explicitly instantiated
//! error constant, and the global two-point Hölder quotient. Everything is
//! a pure measurement over immutable inputs; reports record the grid and
//! parameters they were computed on.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{LatticeError, LatticeFunction};
use crate::operator::{pointwise_apply, Field, OperatorError, QuadratureSpec};
use crate::young::YoungFunction;

/// Errors from diagnostic measurements.
#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("empty sampling band: {0}")]
    EmptyBand(String),
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Oscillations of u over shrinking balls around a point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OscillationProfile {
    /// (radius, osc over nodes in the closed ball), largest radius first.
    pub entries: Vec<(f64, f64)>,
    /// Radii whose balls contained no node, dropped with a warning.
    pub dropped: Vec<f64>,
}

/// osc_{B_r(x0)} u over grid nodes for each radius (given decreasing).
///
/// Radii should stay at or above 3h so the balls are meaningfully
/// populated; empty balls are dropped into the warning list instead of
/// aborting the profile.
pub fn oscillation_profile(u: &LatticeFunction, x0: [f64; 2], radii: &[f64]) -> OscillationProfile {
    let mut entries = Vec::with_capacity(radii.len());
    let mut dropped = Vec::new();
    for &r in radii {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut hits = 0usize;
        for i in 0..u.len() {
            let p = u.node(i);
            let d2 = (p[0] - x0[0]).powi(2) + (p[1] - x0[1]).powi(2);
            if d2 <= r * r * (1.0 + 1e-12) {
                lo = lo.min(u.values[i]);
                hi = hi.max(u.values[i]);
                hits += 1;
            }
        }
        if hits == 0 {
            dropped.push(r);
        } else {
            entries.push((r, hi - lo));
        }
    }
    OscillationProfile { entries, dropped }
}

/// Result of the log-log oscillation fit osc ≈ C·r^α.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HolderFit {
    pub alpha: f64,
    pub constant: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

/// Least-squares fit of log osc = α log r + log C.
///
/// Zero oscillations are excluded; fewer than three usable radii is an
/// insufficient-data error.
pub fn fit_holder_exponent(profile: &[(f64, f64)]) -> Result<HolderFit, DiagnosticsError> {
    let pts: Vec<(f64, f64)> = profile
        .iter()
        .filter(|&&(r, o)| r > 0.0 && o > 0.0)
        .map(|&(r, o)| (r.ln(), o.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(DiagnosticsError::InsufficientData(format!(
            "Hölder fit needs at least 3 radii with positive oscillation, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let alpha = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let logc = (sy - alpha * sx) / n;
    let residual = (pts
        .iter()
        .map(|&(x, y)| (y - alpha * x - logc).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(HolderFit { alpha, constant: logc.exp(), residual })
}

/// The boundary ratio |u|/d^s over a distance band.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryRatioProfile {
    pub sup_ratio: f64,
    pub inf_ratio: f64,
    /// (distance, ratio) per node in the band.
    pub samples: Vec<(f64, f64)>,
}

/// Computes |u(x)|/d(x)^s over nodes with d(x) in the band.
///
/// The band should sit inside (2h, inradius/2) so that neither
/// discretization noise nor the domain's far side dominates.
pub fn boundary_ratio_profile(
    u: &LatticeFunction,
    dist: impl Fn([f64; 2]) -> f64,
    s: f64,
    band: (f64, f64),
) -> Result<BoundaryRatioProfile, DiagnosticsError> {
    if !(band.0 > 0.0 && band.1 > band.0) {
        return Err(DiagnosticsError::EmptyBand(format!(
            "band ({}, {}) is not a positive interval",
            band.0, band.1
        )));
    }
    let mut samples = Vec::new();
    for i in 0..u.len() {
        let d = dist(u.node(i));
        if d >= band.0 && d <= band.1 {
            samples.push((d, u.values[i].abs() / d.powf(s)));
        }
    }
    if samples.is_empty() {
        return Err(DiagnosticsError::EmptyBand(format!(
            "no grid nodes with distance in ({}, {})",
            band.0, band.1
        )));
    }
    let sup_ratio = samples.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let inf_ratio = samples.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(BoundaryRatioProfile { sup_ratio, inf_ratio, samples })
}

/// The d^s operator-residual measurement on a ball.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceResidual {
    /// (cutoff, sup over band points of |L d_+^s|), largest cutoff first.
    pub per_cutoff_sup: Vec<(f64, f64)>,
    /// Sup at the smallest cutoff.
    pub sup: f64,
    /// Relative movement of the sup between the last two cutoffs.
    pub last_two_rel_change: f64,
}

/// Evaluates the operator on the analytic barrier d_+^s for the ball
/// B_R(0), d(x) = R − |x|, over points with boundary distance in `band`,
/// and reports the per-cutoff sup of |L d_+^s|.
///
/// The barrier is genuinely analytic data (extended by zero outside the
/// ball), so this exercises the principal-value machine rather than any
/// grid. Points closer to the boundary than the smallest cutoff are a
/// configuration error: the principal-value core would poke outside the
/// region where d_+^s is C^{1,1}.
pub fn distance_profile_residual(
    yf: &YoungFunction,
    radius: f64,
    s: f64,
    band: (f64, f64),
    n_points: usize,
    q: &QuadratureSpec,
) -> Result<DistanceResidual, DiagnosticsError> {
    if !(radius > 0.0) {
        return Err(DiagnosticsError::EmptyBand(format!("ball radius {radius} must be positive")));
    }
    if !(band.0 > 0.0 && band.1 > band.0 && band.1 < radius) {
        return Err(DiagnosticsError::EmptyBand(format!(
            "band ({}, {}) must sit strictly inside (0, {radius})",
            band.0, band.1
        )));
    }
    let eps_min = *q.cutoffs().last().expect("nonempty cutoffs");
    if band.0 <= eps_min {
        return Err(DiagnosticsError::EmptyBand(format!(
            "band approaches the boundary closer ({}) than the smallest cutoff ({eps_min})",
            band.0
        )));
    }
    if n_points < 2 {
        return Err(DiagnosticsError::InsufficientData(
            "need at least 2 band points for a sup".into(),
        ));
    }
    let barrier = Field::analytic(2, format!("(R - |x|)_+^{s} on B_{radius}"), move |p| {
        let d = radius - (p[0] * p[0] + p[1] * p[1]).sqrt();
        if d > 0.0 {
            d.powf(s)
        } else {
            0.0
        }
    });
    // Band points: distances spread across the band, at four azimuths to
    // surface any angular bias of the quadrature.
    let angles: [f64; 4] = [0.0, 0.9, 2.1, 3.9];
    let mut sups: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cutoffs: Vec<f64> = Vec::new();
    for k in 0..n_points {
        let d = band.0 + (band.1 - band.0) * k as f64 / (n_points - 1) as f64;
        let rho = radius - d;
        let angle = angles[k % angles.len()];
        let x = [rho * angle.cos(), rho * angle.sin()];
        let res = pointwise_apply(yf, &barrier, x, s, q)?;
        if cutoffs.is_empty() {
            cutoffs = res.series.iter().map(|&(e, _)| e).collect();
        }
        for (j, &(_, v)) in res.series.iter().enumerate() {
            let slot = sups.entry(j).or_insert(0.0);
            *slot = slot.max(v.abs());
        }
    }
    let per_cutoff_sup: Vec<(f64, f64)> =
        cutoffs.iter().copied().zip(sups.values().copied()).collect();
    let sup = per_cutoff_sup.last().expect("nonempty").1;
    let k = per_cutoff_sup.len();
    let last_two_rel_change = if k >= 2 {
        let a = per_cutoff_sup[k - 2].1;
        let b = per_cutoff_sup[k - 1].1;
        (a - b).abs() / b.abs().max(1e-300)
    } else {
        0.0
    };
    Ok(DistanceResidual { per_cutoff_sup, sup, last_two_rel_change })
}

/// Outcome of the weak Harnack measurement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarnackReport {
    /// Largest σ ∈ (0,1] satisfying the inequality, 0 when none does.
    pub sigma_hat: f64,
    /// inf of u over nodes in B_{R/4}.
    pub inf_quarter: f64,
    /// R^s g⁻¹ of the weighted mean of g(R^{−s}|u|) over B_R∖B_{R/2}.
    pub averaged_term: f64,
    /// R^s g⁻¹(C₀ K).
    pub tail_term: f64,
    pub c0: f64,
    pub c2: f64,
    pub pass: bool,
}

/// Measures the weak Harnack inequality
///
///   inf_{B_{R/4}} u ≥ σ·R^s g⁻¹(⨍_{B_R∖B_{R/2}} g(R^{−s}|u|)) − R^s g⁻¹(C₀K)
///
/// for a nonnegative supersolution u with right-hand bound K, and returns
/// the largest admissible σ̂ ∈ (0,1]. The error constant is instantiated
/// as C₀ = 2/C₂ with C₂ = 2^{2−Λ}·nω_n·(1−2^{−n}); the theorem only
/// asserts existence of these constants, so the measured σ̂ is
/// informational and the report records the instantiation.
pub fn weak_harnack_check(
    yf: &YoungFunction,
    u: &LatticeFunction,
    k_bound: f64,
    big_r: f64,
    s: f64,
    center: [f64; 2],
) -> Result<HarnackReport, DiagnosticsError> {
    if let Some((i, &v)) = u.values.iter().enumerate().find(|&(_, &v)| v < 0.0) {
        let p = u.node(i);
        return Err(DiagnosticsError::HypothesisViolation(format!(
            "u must be nonnegative, found {v} at ({}, {})",
            p[0], p[1]
        )));
    }
    if !(big_r > 0.0) {
        return Err(DiagnosticsError::EmptyBand(format!("Harnack radius {big_r} must be positive")));
    }
    let n = u.dim as f64;
    let nomega = if u.dim == 1 { 2.0 } else { 2.0 * std::f64::consts::PI };
    let c2 = (2f64).powf(2.0 - yf.big_lambda()) * nomega * (1.0 - (2f64).powf(-n));
    let c0 = 2.0 / c2;

    let rs = big_r.powf(s);
    let inv_rs = big_r.powf(-s);
    let mut inf_quarter = f64::INFINITY;
    let mut quarter_hits = 0usize;
    let mut mean_num = 0.0;
    let mut mean_den = 0.0;
    for i in 0..u.len() {
        let p = u.node(i);
        let d = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
        if d <= big_r / 4.0 {
            inf_quarter = inf_quarter.min(u.values[i]);
            quarter_hits += 1;
        }
        if d > big_r / 2.0 && d <= big_r {
            let w = u.node_weight(i);
            mean_num += w * yf.g(inv_rs * u.values[i].abs());
            mean_den += w;
        }
    }
    if quarter_hits == 0 || mean_den == 0.0 {
        return Err(DiagnosticsError::InsufficientData(format!(
            "mesh does not resolve B_{{R/4}} ({quarter_hits} nodes) or the annulus"
        )));
    }
    let averaged_term = rs
        * yf
            .g_inverse(mean_num / mean_den)
            .map_err(|e| DiagnosticsError::InsufficientData(e.to_string()))?;
    let tail_term = rs
        * yf
            .g_inverse(c0 * k_bound)
            .map_err(|e| DiagnosticsError::InsufficientData(e.to_string()))?;

    let sigma_hat = if averaged_term <= 0.0 {
        1.0
    } else {
        ((inf_quarter + tail_term) / averaged_term).min(1.0)
    };
    Ok(HarnackReport {
        sigma_hat,
        inf_quarter,
        averaged_term,
        tail_term,
        c0,
        c2,
        pass: sigma_hat > 0.0,
    })
}

/// Global two-point Hölder quotient max_{i≠j} |u_i − u_j|/|x_i − x_j|^α
/// over all node pairs.
pub fn global_holder_quotient(u: &LatticeFunction, alpha: f64) -> f64 {
    let n = u.len();
    let nodes: Vec<[f64; 2]> = (0..n).map(|i| u.node(i)).collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in (i + 1)..n {
                let dx = nodes[i][0] - nodes[j][0];
                let dy = nodes[i][1] - nodes[j][1];
                let d = (dx * dx + dy * dy).sqrt();
                let q = (u.values[i] - u.values[j]).abs() / d.powf(alpha);
                best = best.max(q);
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Discrete modulus of continuity: max |u_i − u_j| over node pairs at
/// distance at most `scale`. This is the natural interpolation tolerance
/// for statements that compare node values across a gap of that size.
pub fn discrete_modulus(u: &LatticeFunction, scale: f64) -> f64 {
    let n = u.len();
    let nodes: Vec<[f64; 2]> = (0..n).map(|i| u.node(i)).collect();
    let s2 = scale * scale * (1.0 + 1e-12);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in (i + 1)..n {
                let dx = nodes[i][0] - nodes[j][0];
                let dy = nodes[i][1] - nodes[j][1];
                if dx * dx + dy * dy <= s2 {
                    best = best.max((u.values[i] - u.values[j]).abs());
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Radial asymmetry about `center`: max |u_i − u_j| over node pairs whose
/// radii differ by at most `dr`, restricted to nodes within `radius`.
/// Zero for an exactly radial grid function.
pub fn radial_asymmetry(u: &LatticeFunction, center: [f64; 2], radius: f64, dr: f64) -> f64 {
    let mut by_r: Vec<(f64, f64)> = (0..u.len())
        .filter_map(|i| {
            let p = u.node(i);
            let r = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
            (r <= radius).then_some((r, u.values[i]))
        })
        .collect();
    by_r.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut worst = 0.0f64;
    for i in 0..by_r.len() {
        for j in (i + 1)..by_r.len() {
            if by_r[j].0 - by_r[i].0 > dr {
                break;
            }
            worst = worst.max((by_r[i].1 - by_r[j].1).abs());
        }
    }
    worst
}

/// Mean of u over radius bins of width `dr` about `center`, returned as
/// (bin midpoint, mean) with increasing radius. Empty bins are skipped.
pub fn radial_profile(u: &LatticeFunction, center: [f64; 2], dr: f64) -> Vec<(f64, f64)> {
    let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for i in 0..u.len() {
        let p = u.node(i);
        let r = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
        let bin = (r / dr) as usize;
        let slot = sums.entry(bin).or_insert((0.0, 0));
        slot.0 += u.values[i];
        slot.1 += 1;
    }
    sums.into_iter()
        .map(|(bin, (sum, count))| ((bin as f64 + 0.5) * dr, sum / count as f64))
        .collect()
}

/// Status of one report entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Pass,
    Fail,
    Informational,
    Warning,
}

/// One named measurement inside a [`DiagnosticsReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsEntry {
    pub name: String,
    /// Scalar results in deterministic (sorted) key order.
    pub scalars: BTreeMap<String, f64>,
    /// Optional (abscissa, value) series, also exported as CSV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<(f64, f64)>>,
    /// Human-readable record of the radii/band/mesh parameters used.
    pub parameters: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub status: EntryStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A bundle of diagnostics with the grid they were measured on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// Provenance: domain, mesh shape, spacing.
    pub grid: String,
    pub family: String,
    pub s: f64,
    pub entries: Vec<DiagnosticsEntry>,
}

impl DiagnosticsReport {
    pub fn failed(&self) -> Vec<&DiagnosticsEntry> {
        self.entries.iter().filter(|e| e.status == EntryStatus::Fail).collect()
    }
}
