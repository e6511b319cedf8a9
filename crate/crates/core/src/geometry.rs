//! Separated center sets, spherical cones, and cap measures.
//!
//! Two separation notions are used. A set is `(β, δ)`-separated when every
//! pair of centers projects at least `δ` apart along the single direction
//! `β`; it is `(β, δ, η)`-separated when that holds along *every* unit
//! direction `β'` in the cone `{β' : β'ᵀβ ≥ η}`. The cone condition reduces
//! per pair to a closed-form minimization over the spherical cap, kept exact
//! here; a brute-force cap search exists only as a test oracle.

use nalgebra::DVector;

use crate::radon::sphere::surface_measure;
use crate::{Error, Result};

/// A spherical cap `{β' ∈ S^{d−1} : β'ᵀ axis ≥ η}`.
#[derive(Debug, Clone)]
pub struct ConeSpec {
    axis: DVector<f64>,
    eta: f64,
}

impl ConeSpec {
    /// Normalizes `axis` (rejecting zero vectors) and requires `0 < η ≤ 1`.
    pub fn new(axis: DVector<f64>, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::OutOfRange {
                name: "eta",
                value: eta,
                range: "(0, 1]",
            });
        }
        let norm = axis.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NonPositive {
                name: "axis norm",
                value: norm,
            });
        }
        Ok(Self {
            axis: axis / norm,
            eta,
        })
    }

    pub fn axis(&self) -> &DVector<f64> {
        &self.axis
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Pairwise separation diagnostics for a center set.
///
/// `min_axis_margin` is the smallest `|βᵀ(xᵢ−xⱼ)|` over pairs;
/// `min_cone_margin` the smallest cap-minimized projection. Cone fields are
/// `None` when only the single-direction check ran. Sets with fewer than two
/// centers pass trivially with infinite margins.
#[derive(Debug, Clone)]
pub struct SeparatedSetReport {
    pub n: usize,
    pub min_axis_margin: f64,
    pub min_cone_margin: Option<f64>,
    pub passes_beta_delta: bool,
    pub passes_beta_delta_eta: Option<bool>,
}

/// Collinear construction: centers `xᵢ = (i−1) δ β'` along the in-cone
/// direction `β' = η₀ β + √(1−η₀²) u`, where `u ⟂ β` is chosen
/// deterministically (the canonical basis vector with the largest orthogonal
/// residual, lowest index on ties). Pairwise projections along `β'` are then
/// exactly `|i−j| δ`.
///
/// In one dimension no orthogonal direction exists and the only unit vectors
/// are `±β`; the construction degenerates to `β' = β` for every `η₀`.
pub fn collinear_centers(
    beta: &DVector<f64>,
    delta: f64,
    eta0: f64,
    n: usize,
) -> Result<Vec<DVector<f64>>> {
    crate::ensure_positive("delta", delta)?;
    if !(0.0..=1.0).contains(&eta0) {
        return Err(Error::OutOfRange {
            name: "eta0",
            value: eta0,
            range: "[0, 1]",
        });
    }
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "n",
            value: 0.0,
            range: "n >= 1",
        });
    }
    let norm = beta.norm();
    crate::ensure_positive("beta norm", norm)?;
    let beta = beta / norm;
    let d = beta.len();

    let dir = if d == 1 {
        beta.clone()
    } else {
        // Canonical basis vector with the largest orthogonal residual
        // 1 − βⱼ², i.e. the smallest |βⱼ|; ties resolve to the lowest index.
        let mut best = 0usize;
        for j in 1..d {
            if beta[j].abs() < beta[best].abs() {
                best = j;
            }
        }
        let mut u = DVector::zeros(d);
        u[best] = 1.0;
        u -= &beta * beta[best];
        u /= u.norm();
        &beta * eta0 + u * (1.0 - eta0 * eta0).sqrt()
    };

    Ok((0..n)
        .map(|i| &dir * ((i as f64) * delta))
        .collect())
}

/// Check `(β, δ)`-separation along the single direction `β`.
///
/// Margins are compared against `δ` exactly, with no tolerance; callers
/// wanting slack pass a deflated `δ` themselves. Duplicate centers yield a
/// zero margin and a failing report, not an error.
pub fn is_beta_delta_separated(
    centers: &[DVector<f64>],
    beta: &DVector<f64>,
    delta: f64,
) -> Result<SeparatedSetReport> {
    crate::ensure_positive("delta", delta)?;
    let norm = beta.norm();
    crate::ensure_positive("beta norm", norm)?;
    let beta = beta / norm;

    let mut min_margin = f64::INFINITY;
    let proj: Vec<f64> = centers.iter().map(|c| beta.dot(c)).collect();
    for i in 0..proj.len() {
        for j in (i + 1)..proj.len() {
            min_margin = min_margin.min((proj[i] - proj[j]).abs());
        }
    }
    Ok(SeparatedSetReport {
        n: centers.len(),
        min_axis_margin: min_margin,
        min_cone_margin: None,
        passes_beta_delta: min_margin >= delta,
        passes_beta_delta_eta: None,
    })
}

/// Minimum of `|β'ᵀ diff|` over the cap `{β' : β'ᵀ axis ≥ η, ‖β'‖ = 1}`.
///
/// Decompose `diff = p·axis + w` with `w ⟂ axis`, `r = ‖w‖`. The linear form
/// `β' ↦ β'ᵀdiff` attains its extremes either at `±diff/‖diff‖` (when that
/// direction lies in the cap) or on the boundary circle `β'ᵀaxis = η`, where
/// they equal `ηp ± √(1−η²) r`. The range over the cap is the interval
/// between those extremes, so the minimum absolute value is 0 when the range
/// straddles 0 and the nearer endpoint otherwise.
pub fn min_cone_projection(diff: &DVector<f64>, cone: &ConeSpec) -> f64 {
    let p = cone.axis().dot(diff);
    let w = diff - cone.axis() * p;
    let r = w.norm();
    let total = diff.norm();
    if total == 0.0 {
        return 0.0;
    }
    let eta = cone.eta();
    let slack = (1.0 - eta * eta).max(0.0).sqrt();

    let f_max = if p >= eta * total {
        total
    } else {
        eta * p + slack * r
    };
    let f_min = if -p >= eta * total {
        -total
    } else {
        eta * p - slack * r
    };

    if f_min <= 0.0 && 0.0 <= f_max {
        0.0
    } else {
        f_min.abs().min(f_max.abs())
    }
}

/// Check `(β, δ, η)`-separation: every pair must keep a projected margin of
/// at least `δ` along every direction in the cone. Also reports the
/// single-direction margin along the cone axis.
pub fn is_eta_separated(
    centers: &[DVector<f64>],
    cone: &ConeSpec,
    delta: f64,
) -> Result<SeparatedSetReport> {
    let axis_report = is_beta_delta_separated(centers, cone.axis(), delta)?;

    let mut min_cone = f64::INFINITY;
    for i in 0..centers.len() {
        for j in (i + 1)..centers.len() {
            let diff = &centers[i] - &centers[j];
            min_cone = min_cone.min(min_cone_projection(&diff, cone));
        }
    }
    Ok(SeparatedSetReport {
        n: centers.len(),
        min_axis_margin: axis_report.min_axis_margin,
        min_cone_margin: Some(min_cone),
        passes_beta_delta: axis_report.passes_beta_delta,
        passes_beta_delta_eta: Some(min_cone >= delta),
    })
}

/// Surface measure of the spherical cap `{β' ∈ S^{d−1} : β'ᵀβ ≥ η}`.
///
/// `d = 1` uses the counting measure on `S⁰` (the cap is the single point
/// `β`); `d = 2` is the arc length `2·arccos η`; `d = 3` the classical
/// `2π(1−η)`; in general `|S^{d−2}| ∫_η^1 (1−t²)^{(d−3)/2} dt`, evaluated
/// with a Gauss-Legendre rule that is exact for the polynomial integrands
/// arising at odd `d`.
pub fn cone_volume(d: usize, eta: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::OutOfRange {
            name: "d",
            value: 0.0,
            range: "d >= 1",
        });
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::OutOfRange {
            name: "eta",
            value: eta,
            range: "(0, 1]",
        });
    }
    Ok(match d {
        1 => 1.0,
        2 => 2.0 * eta.acos(),
        3 => 2.0 * std::f64::consts::PI * (1.0 - eta),
        _ => {
            let exponent = (d as f64 - 3.0) / 2.0;
            let (nodes, weights) = crate::radon::quad::gauss_legendre_rule(2 * d + 8);
            let half = 0.5 * (1.0 - eta);
            let mid = 0.5 * (1.0 + eta);
            let integral: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| {
                    let t = mid + half * x;
                    w * half * (1.0 - t * t).max(0.0).powf(exponent)
                })
                .sum();
            surface_measure(d - 1) * integral
        }
    })
}
