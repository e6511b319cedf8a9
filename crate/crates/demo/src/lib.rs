//! Browser demo bindings: three interactive views over the core library,
//! each returning a JSON payload for the static page in `www/` to plot.
//!
//! Build with `wasm-pack build crates/demo --target web` and serve `www/`.
//! The functions are plain Rust underneath, so the payloads are also
//! testable on the host.

use nalgebra::DVector;
use wasm_bindgen::prelude::wasm_bindgen;

use radon_gap::bounds::{certify_preconditions, rtv2_lower_bound, DivergenceBoundInputs};
use radon_gap::experiments::{run_gap_experiment, GapExperimentConfig};
use radon_gap::geometry::collinear_centers;
use radon_gap::hermite;
use radon_gap::kernel::{CoefficientSequence, KernelMachine, MahalanobisMetric};
use radon_gap::radon::sphere::SphereRule;
use radon_gap::radon::{rtv2, rtv2_direct_1d, Normalization};

fn err_json(msg: impl std::fmt::Display) -> String {
    serde_json::json!({ "error": msg.to_string() }).to_string()
}

/// Weighted Hermite profile `He_{d+1}(y) e^{−y²/2}` with the constants the
/// divergence argument is built from: `C_d`, `ρ(d, ε)`, the peak radius,
/// and the tail threshold `δ₀`.
#[wasm_bindgen]
pub fn hermite_profile(d: usize, eps: f64) -> String {
    let compute = || -> radon_gap::Result<String> {
        let cd = hermite::cd_constant(d)?;
        let rho = hermite::rho_constant(d, eps)?;
        let peak = hermite::delta_peak(d)?;
        let delta_zero = hermite::delta_zero(d, rho)?.value;

        let reach = (peak + 4.0).max(6.0);
        let samples = 601usize;
        let mut ys = Vec::with_capacity(samples);
        let mut weighted = Vec::with_capacity(samples);
        for i in 0..samples {
            let y = -reach + 2.0 * reach * (i as f64) / (samples as f64 - 1.0);
            ys.push(y);
            weighted.push(hermite::weighted_hermite(d + 1, y));
        }
        Ok(serde_json::json!({
            "d": d,
            "eps": eps,
            "ys": ys,
            "weighted": weighted,
            "roots": cd.breakpoints,
            "c_d": cd.value,
            "rho": rho,
            "delta_peak": peak,
            "delta_zero": delta_zero,
        })
        .to_string())
    };
    compute().unwrap_or_else(err_json)
}

/// A 1-D harmonic kernel machine on centers spaced `delta` apart: function
/// and second-derivative curves plus both norms and, when `delta` meets the
/// certified recipe, the RTV² lower bound.
#[wasm_bindgen]
pub fn machine_profile(n: usize, delta: f64) -> String {
    let compute = || -> radon_gap::Result<String> {
        let metric = MahalanobisMetric::identity(1, 1.0)?;
        let beta = DVector::from_column_slice(&[1.0]);
        let centers = collinear_centers(&beta, delta, 1.0, n)?;
        let coeffs = CoefficientSequence::Harmonic { n };
        let machine = KernelMachine::new(metric, centers, coeffs.values())?;

        let rule = SphereRule::new(1, 1, 0)?;
        let est = rtv2(&machine, &rule, 1e-8, Normalization::Standard)?;
        let (direct, _) = rtv2_direct_1d(&machine, 1e-8)?;

        // Lower bound only when delta satisfies the certified recipe for
        // some admissible eps; use eps = 1/2 (the largest allowed).
        let params = certify_preconditions(1, 0.5, radon_gap::bounds::MIN_ETA)?;
        let lower = if delta >= params.delta {
            let inputs = DivergenceBoundInputs {
                metric: machine.metric.clone(),
                d: 1,
                eta: radon_gap::bounds::MIN_ETA,
                rho: params.rho,
                delta,
                coeffs: coeffs.clone(),
            };
            rtv2_lower_bound(&inputs, n).ok()
        } else {
            None
        };

        let span_lo = -3.0;
        let span_hi = (n as f64 - 1.0) * delta + 3.0;
        let samples = 801usize;
        let mut ts = Vec::with_capacity(samples);
        let mut f = Vec::with_capacity(samples);
        let mut f2 = Vec::with_capacity(samples);
        for i in 0..samples {
            let t = span_lo + (span_hi - span_lo) * (i as f64) / (samples as f64 - 1.0);
            let tv = DVector::from_column_slice(&[t]);
            ts.push(t);
            f.push(machine.eval(&tv)?);
            // Second derivative of a unit-metric Gaussian mixture.
            let mut acc = 0.0;
            for (a, c) in machine.coeffs().iter().zip(machine.centers()) {
                let z = t - c[0];
                acc += a * (z * z - 1.0) * (-0.5 * z * z).exp();
            }
            f2.push(acc);
        }

        Ok(serde_json::json!({
            "n": n,
            "delta": delta,
            "ts": ts,
            "f": f,
            "f2": f2,
            "l1_norm": coeffs.l1_norm(),
            "rkhs_norm_sq": machine.rkhs_norm_sq(),
            "rtv2": est.value,
            "rtv2_error": est.quadrature_error,
            "rtv2_direct": 2.0 / (2.0 * std::f64::consts::PI).sqrt() * direct,
            "rtv2_lower_bound": lower,
            "certified_delta": params.delta,
        })
        .to_string())
    };
    compute().unwrap_or_else(err_json)
}

/// Gap curve: the certified `d = 1` experiment at sizes `1, 2, 4, …` up to
/// `n_max`, tabulating the bounded RKHS norm against the growing ℓ₁ norm
/// and RTV².
#[wasm_bindgen]
pub fn gap_curve(n_max: usize, eps: f64, eta: f64) -> String {
    let compute = || -> radon_gap::Result<String> {
        let mut n_list = vec![1usize];
        while *n_list.last().unwrap() * 2 <= n_max.max(1) {
            n_list.push(n_list.last().unwrap() * 2);
        }
        let config = GapExperimentConfig {
            d: 1,
            eps,
            eta,
            eta0: eta,
            n_list,
            m: None,
            sigma: 1.0,
            inner_tol: 1e-8,
            resolution: 1,
            seed: 0,
            normalization: Normalization::Standard,
        };
        let rows = run_gap_experiment(&config)?;
        let json_rows: Vec<_> = rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "n": r.n,
                    "l1_norm": r.l1_norm,
                    "rkhs_norm_sq": r.rkhs_norm_sq,
                    "rkhs_upper_bound": r.rkhs_upper_bound,
                    "rtv2_value": r.rtv2_value,
                    "rtv2_error": r.rtv2_error,
                    "rtv2_lower_bound": r.rtv2_lower_bound,
                })
            })
            .collect();
        Ok(serde_json::json!({ "rows": json_rows }).to_string())
    };
    compute().unwrap_or_else(err_json)
}
