//! End-to-end gap experiments: for the collinear harmonic machine with a
//! certified separation, tabulate per `n` the ℓ₁ norm (diverging), the RKHS
//! norm and its fixed upper bound (bounded), the computed RTV² with its
//! error estimate (diverging), and the certified RTV² lower bound.
//!
//! Runs are deterministic: the only randomness is the seeded Monte Carlo
//! sphere rule for `d ≥ 5`, and identical configs produce byte-identical
//! CSV output.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bounds::{certify_preconditions, rtv2_lower_bound, DivergenceBoundInputs};
use crate::geometry::collinear_centers;
use crate::kernel::{harmonic_norm_bound, CoefficientSequence, KernelMachine, MahalanobisMetric};
use crate::radon::sphere::SphereRule;
use crate::radon::{rtv2, Normalization};
use crate::{Error, Result};

/// Configuration of a gap experiment, mirrored one-to-one by its JSON form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapExperimentConfig {
    /// Odd input dimension.
    pub d: usize,
    /// Safe-constant half-width, in `(0, 1/2]`.
    pub eps: f64,
    /// Cone aperture for the lower bound, at least `√3/2`.
    pub eta: f64,
    /// Construction direction alignment, `η ≤ η₀ ≤ 1`.
    pub eta0: f64,
    /// Machine sizes to tabulate, strictly increasing.
    pub n_list: Vec<usize>,
    /// Row-major metric matrix; identity when omitted.
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<f64>>,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    pub inner_tol: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, with = "normalization_serde")]
    pub normalization: Normalization,
}

fn default_sigma() -> f64 {
    1.0
}

fn default_resolution() -> usize {
    16
}

/// Serialize [`Normalization`] as the strings accepted everywhere else.
mod normalization_serde {
    use super::Normalization;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &Normalization, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match n {
            Normalization::Standard => "standard",
            Normalization::UnitAmplitude => "unit-amplitude",
        })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Normalization, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse_normalization(&raw).map_err(serde::de::Error::custom)
    }
}

/// Parse a normalization name. `"paper"` is accepted as an alias of
/// `"standard"` for compatibility with configs written against the original
/// convention naming.
pub fn parse_normalization(raw: &str) -> std::result::Result<Normalization, String> {
    match raw {
        "standard" | "paper" => Ok(Normalization::Standard),
        "unit-amplitude" => Ok(Normalization::UnitAmplitude),
        other => Err(format!(
            "unknown normalization `{other}` (expected `standard` or `unit-amplitude`)"
        )),
    }
}

impl GapExperimentConfig {
    /// The cleanest certified configuration: `d = 1` makes the sphere rule
    /// exact, so the reported error is pure inner quadrature.
    pub fn preset_d1() -> Self {
        Self {
            d: 1,
            eps: 0.5,
            eta: crate::bounds::MIN_ETA,
            eta0: crate::bounds::MIN_ETA,
            n_list: vec![1, 2, 4, 8, 16, 32, 64],
            m: None,
            sigma: 1.0,
            inner_tol: 1e-8,
            resolution: 1,
            seed: 0,
            normalization: Normalization::Standard,
        }
    }

    /// Product-rule sphere quadrature preset in three dimensions.
    pub fn preset_d3() -> Self {
        Self {
            d: 3,
            eps: 0.5,
            eta: crate::bounds::MIN_ETA,
            eta0: crate::bounds::MIN_ETA,
            n_list: vec![1, 2, 4, 8, 16],
            m: None,
            sigma: 1.0,
            inner_tol: 1e-6,
            resolution: 16,
            seed: 0,
            normalization: Normalization::Standard,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "d1" => Ok(Self::preset_d1()),
            "d3" => Ok(Self::preset_d3()),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected `d1` or `d3`)"
            ))),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::Config("n_list must not be empty".into()));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) || self.n_list[0] == 0 {
            return Err(Error::Config(
                "n_list must be strictly increasing and start at n >= 1".into(),
            ));
        }
        if !(self.eps > 0.0 && self.eps <= 0.5) {
            return Err(Error::Config(format!(
                "eps = {} must lie in (0, 1/2]",
                self.eps
            )));
        }
        if !(self.eta0 >= self.eta && self.eta0 <= 1.0) {
            return Err(Error::Config(format!(
                "eta0 = {} must lie in [eta, 1] (eta = {})",
                self.eta0, self.eta
            )));
        }
        if !(self.inner_tol > 0.0) {
            return Err(Error::Config(format!(
                "inner_tol = {} must be positive",
                self.inner_tol
            )));
        }
        Ok(())
    }

    fn metric(&self) -> Result<MahalanobisMetric> {
        match &self.m {
            None => MahalanobisMetric::identity(self.d, self.sigma),
            Some(flat) => {
                if flat.len() != self.d * self.d {
                    return Err(Error::Config(format!(
                        "M must have {} entries for d = {}, got {}",
                        self.d * self.d,
                        self.d,
                        flat.len()
                    )));
                }
                MahalanobisMetric::from_matrix(
                    DMatrix::from_row_slice(self.d, self.d, flat),
                    self.sigma,
                )
            }
        }
    }
}

/// One tabulated machine size.
#[derive(Debug, Clone, Serialize)]
pub struct GapExperimentRow {
    pub n: usize,
    pub l1_norm: f64,
    pub rkhs_norm_sq: f64,
    pub rkhs_upper_bound: f64,
    pub rtv2_value: f64,
    pub rtv2_error: f64,
    pub rtv2_lower_bound: f64,
}

/// Run the experiment: build the certified separation `δ`, the collinear
/// centers along `β = e₁`, harmonic coefficients, and one row per requested
/// `n`.
pub fn run_gap_experiment(config: &GapExperimentConfig) -> Result<Vec<GapExperimentRow>> {
    config.validate()?;
    let params = certify_preconditions(config.d, config.eps, config.eta)?;
    let metric = config.metric()?;

    let n_max = *config.n_list.last().expect("validated non-empty");
    let mut beta = DVector::zeros(config.d);
    beta[0] = 1.0;
    let centers = collinear_centers(&beta, params.delta, config.eta0, n_max)?;
    let coeffs = CoefficientSequence::Harmonic { n: n_max };
    let machine = KernelMachine::new(metric.clone(), centers, coeffs.values())?;

    // One O(n_max²) pass covers the RKHS norms of every prefix.
    let rkhs_prefixes = machine.rkhs_norm_sq_prefixes();

    // Euclidean spacing is exactly δ along the construction direction; under
    // the metric it is at least δ·√λ_min, which the norm bound needs.
    let delta_metric = params.delta * metric.lambda_min().sqrt();

    let rule = SphereRule::new(config.d, config.resolution, config.seed)?;
    let bound_inputs = DivergenceBoundInputs {
        metric: metric.clone(),
        d: config.d,
        eta: config.eta,
        rho: params.rho,
        delta: params.delta,
        coeffs: coeffs.clone(),
    };

    let mut rows = Vec::with_capacity(config.n_list.len());
    for &n in &config.n_list {
        let sub = machine.prefix(n)?;
        let est = rtv2(&sub, &rule, config.inner_tol, config.normalization)?;
        rows.push(GapExperimentRow {
            n,
            l1_norm: coeffs.l1_prefix(n)?,
            rkhs_norm_sq: rkhs_prefixes[n - 1],
            rkhs_upper_bound: harmonic_norm_bound(n, delta_metric, 1.0)?,
            rtv2_value: est.value,
            rtv2_error: est.quadrature_error,
            rtv2_lower_bound: rtv2_lower_bound(&bound_inputs, n)?,
        });
    }
    Ok(rows)
}

/// CSV text for a row list: fixed header, shortest round-trip decimals, one
/// line per row, trailing newline.
pub fn csv_string(rows: &[GapExperimentRow]) -> String {
    let mut out = String::from(
        "n,l1_norm,rkhs_norm_sq,rkhs_upper_bound,rtv2_value,rtv2_error,rtv2_lower_bound\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n,
            r.l1_norm,
            r.rkhs_norm_sq,
            r.rkhs_upper_bound,
            r.rtv2_value,
            r.rtv2_error,
            r.rtv2_lower_bound
        ));
    }
    out
}

/// Write [`csv_string`] to a file.
pub fn emit_csv(rows: &[GapExperimentRow], path: &std::path::Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    file.write_all(csv_string(rows).as_bytes())
        .map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_validation() {
        assert!(GapExperimentConfig::preset("d1").is_ok());
        assert!(GapExperimentConfig::preset("d3").is_ok());
        assert!(GapExperimentConfig::preset("d2").is_err());
    }

    #[test]
    fn config_rejects_bad_n_list() {
        let mut c = GapExperimentConfig::preset_d1();
        c.n_list = vec![1, 4, 4];
        assert!(run_gap_experiment(&c).is_err());
        c.n_list = vec![];
        assert!(run_gap_experiment(&c).is_err());
        c.n_list = vec![0, 1];
        assert!(run_gap_experiment(&c).is_err());
    }

    #[test]
    fn config_json_roundtrip() {
        let c = GapExperimentConfig::preset_d3();
        let json = serde_json::to_string(&c).unwrap();
        let back: GapExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.d, 3);
        assert_eq!(back.n_list, c.n_list);
        assert_eq!(back.normalization, Normalization::Standard);

        let legacy = r#"{
            "d": 1, "eps": 0.5, "eta": 0.87, "eta0": 0.9,
            "n_list": [1, 2], "inner_tol": 1e-8,
            "normalization": "paper"
        }"#;
        let parsed: GapExperimentConfig = serde_json::from_str(legacy).unwrap();
        assert_eq!(parsed.normalization, Normalization::Standard);
        assert_eq!(parsed.sigma, 1.0);
        assert_eq!(parsed.resolution, 16);
    }

    #[test]
    fn small_d1_run_gap_signature() {
        let mut c = GapExperimentConfig::preset_d1();
        c.n_list = vec![1, 2, 4, 8];
        let rows = run_gap_experiment(&c).unwrap();
        assert_eq!(rows.len(), 4);

        for w in rows.windows(2) {
            assert!(w[1].rtv2_value > w[0].rtv2_value, "rtv2 not increasing");
            assert!(w[1].rkhs_norm_sq > w[0].rkhs_norm_sq);
            assert!(w[1].l1_norm > w[0].l1_norm);
        }
        for r in &rows {
            assert!(r.rkhs_norm_sq <= r.rkhs_upper_bound + 1e-9);
            assert!(r.rtv2_value + 3.0 * r.rtv2_error >= r.rtv2_lower_bound);
        }
        // n = 1 row matches the single-center closed form.
        let metric = MahalanobisMetric::identity(1, 1.0).unwrap();
        let closed = crate::radon::rtv2_single_center(&metric).unwrap();
        assert!((rows[0].rtv2_value - closed).abs() < 1e-7);
    }

    #[test]
    fn csv_shape_and_determinism() {
        let mut c = GapExperimentConfig::preset_d1();
        c.n_list = vec![1, 2, 4];
        let rows = run_gap_experiment(&c).unwrap();
        let csv = csv_string(&rows);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with(
            "n,l1_norm,rkhs_norm_sq,rkhs_upper_bound,rtv2_value,rtv2_error,rtv2_lower_bound\n"
        ));
        assert!(csv.ends_with('\n'));

        let rows2 = run_gap_experiment(&c).unwrap();
        assert_eq!(csv, csv_string(&rows2), "identical configs must agree byte-for-byte");

        let empty = csv_string(&[]);
        assert_eq!(empty.lines().count(), 1);
    }

    #[test]
    fn emit_csv_reports_path_on_failure() {
        let rows = [];
        let err = emit_csv(&rows, std::path::Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
