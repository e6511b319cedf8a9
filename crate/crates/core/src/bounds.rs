//! The quantitative divergence chain: cross-talk bounds between separated
//! centers, per-neighborhood lower bounds on the inner integral, and the
//! final RTV² lower bound
//!
//! ```text
//! RTV²(f_n) ≥ (1/(|det L| √(2π))) · λ_min(M)^{(d+1)/2} · vol(K) · (ρ/2) Σ_{i≤n} |αᵢ| ,
//! ```
//!
//! which diverges whenever `Σ|αᵢ| → ∞` (harmonic coefficients). The `ρ/2`
//! factor is certified by checking that the nearest-neighbor Hermite tail
//! `Σ_{j≥1} |He_{d+1}(jδ)| e^{−(jδ)²/2}` stays below `ρ/4`; that is strictly
//! stronger than the `j ≥ 2` condition the tail lemma guarantees, and it is
//! what the double-sum over neighborhoods actually needs.
//!
//! The cross-talk bound is evaluated at arguments `jδ` verbatim. The chain
//! that produces it replaces `|Δᵢ − Δⱼ + y|` for `|y| ≤ ε` by `|i−j|δ`,
//! dropping a `−(2/3)δ` shift; keeping the lax form only weakens the lower
//! bound, never strengthens it.

use crate::geometry::cone_volume;
use crate::hermite;
use crate::kernel::{CoefficientSequence, MahalanobisMetric};
use crate::{Error, Result};

/// `η` must be at least `√3/2` for the certified construction.
pub const MIN_ETA: f64 = 0.866_025_403_784_438_6;

/// Cross-talk bound: every neighborhood integral of foreign terms is at most
/// `2 (Σ_{j≥1} |He_{d+1}(jδ)| e^{−(jδ)²/2}) · Σ|αᵢ|`, using the certified
/// upper value of the truncated tail.
pub fn theta_bound(coeffs: &CoefficientSequence, d: usize, delta: f64) -> Result<f64> {
    let l1 = coeffs.l1_norm();
    if l1 == 0.0 {
        return Ok(0.0);
    }
    let tail = hermite::tail_sum_from(d, delta, 1, 1e-16 * l1.max(1.0))?;
    Ok(2.0 * tail.upper() * l1)
}

/// Lower bound on the inner integral with certification status.
#[derive(Debug, Clone, Copy)]
pub struct InnerLowerBound {
    /// `(ρ − θ-factor) · Σ|αᵢ|`.
    pub value: f64,
    /// Whether the nearest-neighbor tail condition `tail₁ < ρ/4` held, which
    /// forces `value ≥ (ρ/2) Σ|αᵢ|`.
    pub certified: bool,
}

/// `I_inner ≥ (ρ − 2·tail₁) Σ|αᵢ|`, flagged uncertified when the tail
/// condition fails (e.g. δ too small for the lemma hypothesis).
pub fn inner_lower_bound(
    coeffs: &CoefficientSequence,
    d: usize,
    rho: f64,
    delta: f64,
) -> Result<InnerLowerBound> {
    crate::ensure_positive("rho", rho)?;
    let l1 = coeffs.l1_norm();
    let tail = hermite::tail_sum_from(d, delta, 1, 1e-12 * rho)?;
    let theta_factor = 2.0 * tail.upper();
    let certified = tail.upper() < rho / 4.0;
    let value = (rho - theta_factor) * l1;
    if certified {
        debug_assert!(value >= 0.5 * rho * l1 - 1e-12 * rho * l1);
    }
    Ok(InnerLowerBound { value, certified })
}

/// Everything the divergence bound needs, bundled for validation.
#[derive(Debug, Clone)]
pub struct DivergenceBoundInputs {
    pub metric: MahalanobisMetric,
    pub d: usize,
    pub eta: f64,
    pub rho: f64,
    pub delta: f64,
    pub coeffs: CoefficientSequence,
}

impl DivergenceBoundInputs {
    /// Check the certification preconditions; returns advisory warnings on
    /// success and an error listing every violated condition otherwise.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut violations = Vec::new();
        let mut warnings = Vec::new();

        if self.d.is_multiple_of(2) || self.d != self.metric.dim() {
            violations.push(format!(
                "d must be odd and match the metric dimension (d = {}, metric dim = {})",
                self.d,
                self.metric.dim()
            ));
        }
        if !(self.eta >= MIN_ETA - 1e-12 && self.eta <= 1.0) {
            violations.push(format!("eta = {} must lie in [√3/2, 1]", self.eta));
        }
        if !(self.rho > 0.0) {
            violations.push(format!("rho = {} must be positive", self.rho));
        }
        if !(self.delta > 0.0) {
            violations.push(format!("delta = {} must be positive", self.delta));
        }

        // The recipe checks only need a valid (d, ρ, δ) triple, so they run
        // even when η is already known to be out of range.
        if self.d % 2 == 1 && self.rho > 0.0 && self.delta > 0.0 {
            let dp = hermite::delta_peak(self.d)?;
            let dz = hermite::delta_zero(self.d, self.rho)?.value;
            let needed = 3.0 * dp.max(dz);
            if self.delta < needed * (1.0 - 1e-9) {
                violations.push(format!(
                    "delta = {} below the certified recipe 3·max(δ'(d), δ₀(ρ)) = {}",
                    self.delta, needed
                ));
            }
            let tail = hermite::tail_sum_from(self.d, self.delta, 1, 1e-12 * self.rho)?;
            if !(tail.upper() < self.rho / 4.0) {
                violations.push(format!(
                    "nearest-neighbor tail {} not below rho/4 = {}",
                    tail.upper(),
                    self.rho / 4.0
                ));
            }
        }
        if violations.is_empty() && self.metric.lambda_min() < 1.0 {
            warnings.push(format!(
                "lambda_min(M_eff) = {} < 1: the bound carries the factor \
                 lambda_min^{{(d+1)/2}} explicitly; rescale if a unit factor is wanted",
                self.metric.lambda_min()
            ));
        }

        if violations.is_empty() {
            Ok(warnings)
        } else {
            Err(Error::Preconditions(violations.join("; ")))
        }
    }
}

/// Certified lower bound on `RTV²(f_n)` for the first `n` coefficients:
///
/// ```text
/// (1/(|det L| √(2π))) λ_min(M)^{(d+1)/2} vol(K(η)) (ρ/2) Σ_{i≤n} |αᵢ| .
/// ```
///
/// Monotone nondecreasing in `n`; grows like `H_n` for harmonic coefficients.
pub fn rtv2_lower_bound(inputs: &DivergenceBoundInputs, n: usize) -> Result<f64> {
    inputs.validate()?;
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "n",
            value: 0.0,
            range: "n >= 1",
        });
    }
    let l1 = inputs.coeffs.l1_prefix(n)?;
    let vol = cone_volume(inputs.d, inputs.eta)?;
    let pref = 1.0
        / (inputs.metric.det_factor().abs() * (2.0 * std::f64::consts::PI).sqrt());
    let lam = inputs
        .metric
        .lambda_min()
        .powf((inputs.d as f64 + 1.0) / 2.0);
    Ok(pref * lam * vol * 0.5 * inputs.rho * l1)
}

/// Parameters produced by the certification recipe.
#[derive(Debug, Clone, Copy)]
pub struct CertifiedParams {
    pub rho: f64,
    pub delta_prime: f64,
    pub delta_zero: f64,
    /// `δ = 3 max{ε, δ₀(ρ), δ'}`.
    pub delta: f64,
}

/// Compute `(ρ, δ', δ₀, δ)` from `(d, ε, η)` under the hypotheses
/// `ε ∈ (0, 1/2]` and `η ≥ √3/2`.
pub fn certify_preconditions(d: usize, eps: f64, eta: f64) -> Result<CertifiedParams> {
    if d.is_multiple_of(2) {
        return Err(Error::EvenDimension(d));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            range: "(0, 1/2]",
        });
    }
    if !(MIN_ETA - 1e-12..=1.0).contains(&eta) {
        return Err(Error::OutOfRange {
            name: "eta",
            value: eta,
            range: "[sqrt(3)/2, 1]",
        });
    }
    let rho = hermite::rho_constant(d, eps)?;
    let delta_prime = hermite::delta_peak(d)?;
    let delta_zero = hermite::delta_zero(d, rho)?.value;
    let delta = 3.0 * eps.max(delta_prime).max(delta_zero);
    Ok(CertifiedParams {
        rho,
        delta_prime,
        delta_zero,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::harmonic_number;

    fn harmonic(n: usize) -> CoefficientSequence {
        CoefficientSequence::Harmonic { n }
    }

    #[test]
    fn theta_bound_zero_coefficients() {
        let coeffs = CoefficientSequence::Explicit(vec![0.0, 0.0]);
        assert_eq!(theta_bound(&coeffs, 1, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn theta_bound_negligible_for_huge_delta() {
        let coeffs = harmonic(100);
        let b = theta_bound(&coeffs, 1, 50.0).unwrap();
        assert!(b < 1e-15 * coeffs.l1_norm());
    }

    #[test]
    fn theta_bound_single_coefficient_matches_sum() {
        let coeffs = CoefficientSequence::Explicit(vec![1.0]);
        let b = theta_bound(&coeffs, 1, 5.0).unwrap();
        let direct: f64 = (1..1000)
            .map(|j| hermite::weighted_hermite(2, 5.0 * j as f64).abs())
            .sum();
        assert!((b - 2.0 * direct).abs() < 1e-14 + 1e-10 * direct);
    }

    #[test]
    fn inner_lower_bound_certified_case() {
        let params = certify_preconditions(1, 0.5, MIN_ETA).unwrap();
        let coeffs = harmonic(10);
        let lb = inner_lower_bound(&coeffs, 1, params.rho, params.delta).unwrap();
        assert!(lb.certified);
        assert!(lb.value >= 0.5 * params.rho * harmonic_number(10));
    }

    #[test]
    fn inner_lower_bound_single_term() {
        let params = certify_preconditions(1, 0.5, 1.0).unwrap();
        let coeffs = CoefficientSequence::Explicit(vec![0.7]);
        let lb = inner_lower_bound(&coeffs, 1, params.rho, params.delta).unwrap();
        assert!(lb.certified);
        assert!(lb.value >= 0.5 * params.rho * 0.7);
    }

    #[test]
    fn inner_lower_bound_uncertified_for_tiny_delta() {
        let rho = hermite::rho_constant(1, 0.5).unwrap();
        let lb = inner_lower_bound(&harmonic(5), 1, rho, 0.05).unwrap();
        assert!(!lb.certified);
    }

    #[test]
    fn certify_d1_recipe() {
        let p = certify_preconditions(1, 0.5, MIN_ETA).unwrap();
        // δ' = √3 participates in the max, so δ ≥ 3√3.
        assert!((p.delta_prime - 3f64.sqrt()).abs() < 1e-12);
        assert!(p.delta >= 3.0 * 3f64.sqrt() - 1e-12);
        let rho_check = hermite::rho_constant(1, 0.5).unwrap();
        assert_eq!(p.rho, rho_check);
        // Lemma postcondition at δ₀.
        let tail = hermite::tail_sum(1, p.delta_zero, 1e-12 * p.rho).unwrap();
        assert!(tail.upper() < p.rho / 4.0);
    }

    #[test]
    fn certify_rejects_out_of_range() {
        assert!(certify_preconditions(1, 0.6, 0.9).is_err());
        assert!(certify_preconditions(1, 0.0, 0.9).is_err());
        assert!(certify_preconditions(1, 0.5, 0.5).is_err());
        assert!(certify_preconditions(2, 0.5, 0.9).is_err());
    }

    #[test]
    fn lower_bound_d1_plugin() {
        let params = certify_preconditions(1, 0.5, MIN_ETA).unwrap();
        let metric = MahalanobisMetric::identity(1, 1.0).unwrap();
        let inputs = DivergenceBoundInputs {
            metric,
            d: 1,
            eta: MIN_ETA,
            rho: params.rho,
            delta: params.delta,
            coeffs: harmonic(64),
        };
        for n in [1usize, 2, 8, 64] {
            let b = rtv2_lower_bound(&inputs, n).unwrap();
            let expect = params.rho / 2.0 * harmonic_number(n)
                / (2.0 * std::f64::consts::PI).sqrt();
            assert!((b - expect).abs() < 1e-14 * expect.max(1.0), "n={n}");
        }
    }

    #[test]
    fn lower_bound_monotone_in_n() {
        let params = certify_preconditions(3, 0.5, MIN_ETA).unwrap();
        let metric = MahalanobisMetric::identity(3, 1.0).unwrap();
        let inputs = DivergenceBoundInputs {
            metric,
            d: 3,
            eta: MIN_ETA,
            rho: params.rho,
            delta: params.delta,
            coeffs: harmonic(40),
        };
        let mut last = 0.0;
        for n in 1..=40 {
            let b = rtv2_lower_bound(&inputs, n).unwrap();
            assert!(b >= last);
            last = b;
        }
        // Ratio to H_n is a constant.
        let r1 = rtv2_lower_bound(&inputs, 7).unwrap() / harmonic_number(7);
        let r2 = rtv2_lower_bound(&inputs, 29).unwrap() / harmonic_number(29);
        assert!((r1 - r2).abs() < 1e-12 * r1);
    }

    #[test]
    fn lower_bound_lambda_scaling_by_recomputation() {
        let params = certify_preconditions(1, 0.5, MIN_ETA).unwrap();
        let base = |m: f64| {
            let metric = MahalanobisMetric::from_matrix(
                nalgebra::DMatrix::from_row_slice(1, 1, &[m]),
                1.0,
            )
            .unwrap();
            let inputs = DivergenceBoundInputs {
                metric,
                d: 1,
                eta: MIN_ETA,
                rho: params.rho,
                delta: params.delta,
                coeffs: harmonic(8),
            };
            rtv2_lower_bound(&inputs, 8).unwrap()
        };
        let at1 = base(1.0);
        let at4 = base(4.0);
        // pref scales by 1/√m = 1/2, λ_min^{(d+1)/2} = m scales by 4.
        assert!((at4 - 2.0 * at1).abs() < 1e-12 * at1);
    }

    #[test]
    fn lower_bound_rejects_n_zero_and_bad_inputs() {
        let params = certify_preconditions(1, 0.5, MIN_ETA).unwrap();
        let metric = MahalanobisMetric::identity(1, 1.0).unwrap();
        let inputs = DivergenceBoundInputs {
            metric: metric.clone(),
            d: 1,
            eta: MIN_ETA,
            rho: params.rho,
            delta: params.delta,
            coeffs: harmonic(8),
        };
        assert!(matches!(
            rtv2_lower_bound(&inputs, 0),
            Err(Error::OutOfRange { .. })
        ));

        let bad = DivergenceBoundInputs {
            metric,
            d: 1,
            eta: 0.5,
            rho: params.rho,
            delta: 0.1,
            coeffs: harmonic(8),
        };
        let err = rtv2_lower_bound(&bad, 4).unwrap_err().to_string();
        assert!(err.contains("eta"), "error should list eta: {err}");
        assert!(err.contains("delta"), "error should list delta: {err}");
    }

    #[test]
    fn validate_warns_on_small_lambda_min() {
        let params = certify_preconditions(1, 0.5, MIN_ETA).unwrap();
        let metric = MahalanobisMetric::from_matrix(
            nalgebra::DMatrix::from_row_slice(1, 1, &[0.25]),
            1.0,
        )
        .unwrap();
        let inputs = DivergenceBoundInputs {
            metric,
            d: 1,
            eta: MIN_ETA,
            rho: params.rho,
            delta: params.delta,
            coeffs: harmonic(4),
        };
        let warnings = inputs.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("lambda_min"));
    }
}
