//! Probabilist's Hermite polynomials `He_n` and the derived constants used by
//! the RTV² machinery: the absolute-integral constant `C_d`, the safe mass
//! `ρ(d, ε)`, the peak radius `δ'`, and certified Hermite-Gaussian tail sums.
//!
//! `He_n` satisfies the recurrence `He_{n+1}(y) = y·He_n(y) − n·He_{n−1}(y)`
//! with `He_0 = 1`, `He_1 = y`, and is orthogonal for the weight `e^{−y²/2}`.
//! The workhorse identity throughout this module is
//!
//! ```text
//! d/dy [ He_n(y) e^{−y²/2} ] = −He_{n+1}(y) e^{−y²/2},
//! ```
//!
//! which turns every `∫ |He_{n+1}(y) e^{−y²/2}| dy` into an exact sum of
//! antiderivative differences between consecutive roots — no quadrature
//! tolerance enters any downstream bound.

use crate::tridiag;
use crate::{Error, Result};

/// Evaluate `He_n(y)` by the three-term recurrence.
pub fn hermite_eval(n: usize, y: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => y,
        _ => {
            let mut prev = 1.0;
            let mut cur = y;
            for k in 1..n {
                let next = y * cur - (k as f64) * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `He_n(y) · e^{−y²/2}`, underflowing to exactly 0 for huge `|y|` instead of
/// producing `∞ · 0 = NaN`.
pub fn weighted_hermite(n: usize, y: f64) -> f64 {
    let w = (-0.5 * y * y).exp();
    if w == 0.0 {
        return 0.0;
    }
    hermite_eval(n, y) * w
}

/// Roots of `He_n`, strictly increasing and symmetrized about 0.
///
/// Computed as eigenvalues of the symmetric tridiagonal Jacobi matrix with
/// zero diagonal and off-diagonals `√1, √2, …, √(n−1)` (Golub-Welsch), which
/// stays stable far beyond the degrees needed here.
pub fn hermite_roots(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::NoRoots);
    }
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    let (mut roots, _) = tridiag::eigen_with_first_components(&diag, &off);

    // The spectrum is symmetric about 0; enforce it exactly.
    for i in 0..n / 2 {
        let r = 0.5 * (roots[n - 1 - i] - roots[i]);
        roots[i] = -r;
        roots[n - 1 - i] = r;
    }
    if n % 2 == 1 {
        roots[n / 2] = 0.0;
    }
    Ok(roots)
}

/// Gauss-Hermite rule for the weight `e^{−y²/2}` (weights sum to `√(2π)`).
///
/// Exact for polynomials of degree at most `2n − 1`.
pub fn gauss_hermite_rule(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::NoRoots);
    }
    let mu0 = (2.0 * std::f64::consts::PI).sqrt();
    if n == 1 {
        return Ok((vec![0.0], vec![mu0]));
    }
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    let (nodes, firsts) = tridiag::eigen_with_first_components(&diag, &off);
    let weights = firsts.iter().map(|f| mu0 * f * f).collect();
    Ok((nodes, weights))
}

/// How a [`PiecewiseIntegralResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralMethod {
    /// Exact antiderivative differences between sign changes.
    ExactAntiderivative,
    /// Adaptive numerical quadrature (used by oracles, not by this module).
    AdaptiveQuadrature,
}

/// An absolute integral split at the integrand's sign changes.
#[derive(Debug, Clone)]
pub struct PiecewiseIntegralResult {
    pub value: f64,
    /// Breakpoints (roots) the real line was split at, strictly increasing.
    pub breakpoints: Vec<f64>,
    pub method: IntegralMethod,
}

/// `∫_ℝ |He_{n+1}(u) e^{−u²/2}| du` for any `n ≥ 0`, exactly.
///
/// Splits at the roots of `He_{n+1}`; on each piece the integrand has one
/// sign, so the piece equals `|G(b) − G(a)|` for the antiderivative
/// `G(u) = −He_n(u) e^{−u²/2}` (which vanishes at `±∞`).
pub fn abs_weighted_integral(n: usize) -> Result<PiecewiseIntegralResult> {
    let roots = hermite_roots(n + 1)?;
    let g = |u: f64| -weighted_hermite(n, u);

    let mut total = (g(roots[0])).abs(); // piece (−∞, r_1]
    for w in roots.windows(2) {
        total += (g(w[1]) - g(w[0])).abs();
    }
    total += (g(roots[roots.len() - 1])).abs(); // piece [r_m, ∞)

    Ok(PiecewiseIntegralResult {
        value: total,
        breakpoints: roots,
        method: IntegralMethod::ExactAntiderivative,
    })
}

/// The constant `C_d = ∫_ℝ |He_{d+1}(u) e^{−u²/2}| du` for odd `d`.
///
/// `C_d` is the inner integral of a single-center machine after the change of
/// variables that removes the center and scale; see [`crate::radon`].
pub fn cd_constant(d: usize) -> Result<PiecewiseIntegralResult> {
    require_odd(d)?;
    abs_weighted_integral(d)
}

/// `ρ(d, ε) = ∫_{[−ε,ε]} |He_{d+1}(y) e^{−y²/2}| dy` for odd `d`, exactly.
///
/// This is the guaranteed mass each center contributes to the inner integral
/// on its own ε-neighborhood; it is strictly positive for every `ε > 0`.
pub fn rho_constant(d: usize, eps: f64) -> Result<f64> {
    require_odd(d)?;
    crate::ensure_positive("eps", eps)?;

    let roots = hermite_roots(d + 1)?;
    let g = |u: f64| -weighted_hermite(d, u);

    let mut points = vec![-eps];
    points.extend(roots.iter().copied().filter(|r| r.abs() < eps));
    points.push(eps);

    let mut total = 0.0;
    for w in points.windows(2) {
        total += (g(w[1]) - g(w[0])).abs();
    }
    Ok(total)
}

/// Peak radius `δ'`: the largest root of `He_{d+2}`.
///
/// `d/dy [He_{d+1}(y) e^{−y²/2}] = −He_{d+2}(y) e^{−y²/2}`, and `He_{d+2}`
/// keeps one sign beyond its largest root, so `|He_{d+1}(y) e^{−y²/2}|` decays
/// monotonically outside `[−δ', δ']`.
pub fn delta_peak(d: usize) -> Result<f64> {
    require_odd(d)?;
    let roots = hermite_roots(d + 2)?;
    Ok(roots[roots.len() - 1])
}

/// A truncated Hermite-Gaussian tail sum with a certified remainder.
#[derive(Debug, Clone, Copy)]
pub struct TailSum {
    /// Partial sum of the computed terms.
    pub value: f64,
    /// Certified upper bound on everything left out.
    pub remainder_bound: f64,
    /// Number of terms summed.
    pub terms: usize,
}

impl TailSum {
    /// Certified upper bound on the full infinite sum.
    pub fn upper(&self) -> f64 {
        self.value + self.remainder_bound
    }
}

/// `Σ_{j=2}^∞ |He_{d+1}(jδ)| e^{−(jδ)²/2}`, truncated once the polynomial
/// majorant certifies the remainder below `truncation_tol`.
pub fn tail_sum(d: usize, delta: f64, truncation_tol: f64) -> Result<TailSum> {
    tail_sum_from(d, delta, 2, truncation_tol)
}

/// Same tail starting at `j = start` (the cross-talk bound needs `j = 1`).
pub fn tail_sum_from(d: usize, delta: f64, start: usize, truncation_tol: f64) -> Result<TailSum> {
    require_odd(d)?;
    crate::ensure_positive("delta", delta)?;
    assert!(start >= 1, "tail sums start at j >= 1");

    let deg = d + 1;
    let c = hermite_majorant_constant(deg);
    let majorant = |y: f64| c * (1.0 + y).powi(deg as i32) * (-0.5 * y * y).exp();

    let mut sum = 0.0;
    let mut terms = 0usize;
    let mut j = start;
    loop {
        sum += weighted_hermite(deg, (j as f64) * delta).abs();
        terms += 1;

        // Remainder over j' > j: majorant terms decay at least geometrically
        // once the ratio of consecutive majorant values drops below 1.
        let y1 = ((j + 1) as f64) * delta;
        let y2 = ((j + 2) as f64) * delta;
        let t1 = majorant(y1);
        let ratio = if t1 > 0.0 { majorant(y2) / t1 } else { 0.0 };
        if ratio < 1.0 {
            let remainder = t1 / (1.0 - ratio);
            if remainder < truncation_tol {
                return Ok(TailSum {
                    value: sum,
                    remainder_bound: remainder,
                    terms,
                });
            }
        }
        j += 1;
        assert!(j - start < 20_000_000, "tail sum failed to converge");
    }
}

/// Smallest `δ₀` on a doubling-then-bisection grid with
/// `tail_sum(d, δ₀) < ρ/4` (certified including the truncation remainder).
#[derive(Debug, Clone, Copy)]
pub struct DeltaZero {
    pub value: f64,
    /// Width of the final bisection bracket; 0 when the search lower bound
    /// already satisfied the condition.
    pub bracket_width: f64,
}

/// Find `δ₀` such that the `j ≥ 2` tail is below `ρ/4` for all `δ ≥ δ₀`.
///
/// Deterministic search: start at `max(δ'(d), 1)`, double until the condition
/// holds, then 40 bisection steps. Always terminates because the tail tends
/// to 0 as `δ → ∞`.
pub fn delta_zero(d: usize, rho: f64) -> Result<DeltaZero> {
    require_odd(d)?;
    crate::ensure_positive("rho", rho)?;

    let tol = (rho / 4.0) * 1e-9;
    let ok = |delta: f64| -> Result<bool> {
        Ok(tail_sum(d, delta, tol)?.upper() < rho / 4.0)
    };

    let start = delta_peak(d)?.max(1.0);
    if ok(start)? {
        return Ok(DeltaZero {
            value: start,
            bracket_width: 0.0,
        });
    }

    let mut lo = start;
    let mut hi = start * 2.0;
    while !ok(hi)? {
        lo = hi;
        hi *= 2.0;
        assert!(hi.is_finite(), "tail sum never dropped below rho/4");
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(DeltaZero {
        value: hi,
        bracket_width: hi - lo,
    })
}

/// A constant `c` with `|He_n(y)| ≤ c·(1+|y|)^n` on all of ℝ.
///
/// The ratio `|He_n(y)|/(1+|y|)^n` tends to 1 at `±∞` and is largest either
/// there or at an interior extremum; take the maximum over the roots, a dense
/// grid past the largest root, and the asymptote, with a small inflation to
/// cover between-sample variation.
pub(crate) fn hermite_majorant_constant(n: usize) -> f64 {
    let ratio = |y: f64| hermite_eval(n, y).abs() / (1.0 + y.abs()).powi(n as i32);

    let reach = match hermite_roots(n) {
        Ok(roots) => roots.last().copied().unwrap_or(0.0) + 20.0,
        Err(_) => 20.0,
    };
    let samples = 8000;
    let mut c: f64 = 1.0;
    for i in 0..=samples {
        let y = -reach + 2.0 * reach * (i as f64) / (samples as f64);
        c = c.max(ratio(y));
    }
    c * 1.0001
}

fn require_odd(d: usize) -> Result<()> {
    if d.is_multiple_of(2) {
        Err(Error::EvenDimension(d))
    } else {
        Ok(())
    }
}
