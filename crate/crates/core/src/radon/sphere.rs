//! Quadrature rules on the unit sphere `S^{d−1}` for odd `d`.
//!
//! * `d = 1`: the sphere is the two-point set `{+1, −1}` with counting
//!   measure — the rule is exact.
//! * `d = 3`: a product rule, Gauss-Legendre in the polar cosine times
//!   midpoint-uniform in azimuth; weights sum to `4π` exactly and the rule
//!   converges spectrally for smooth integrands.
//! * `d ≥ 5` (odd): seeded uniform Monte Carlo with equal weights
//!   `|S^{d−1}|/N`, so estimates are reproducible and carry a standard
//!   error.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::radon::quad::gauss_legendre_rule;
use crate::{Error, Result};

/// Error model of a sphere rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    /// Two-point rule on `S⁰`; no discretization error.
    ExactS0,
    /// Polar-azimuth product rule on `S²`.
    Product,
    /// Seeded uniform sampling; weights are `measure/N`.
    MonteCarlo { seed: u64 },
}

/// Nodes and weights integrating over `S^{d−1}`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    nodes: Vec<DVector<f64>>,
    weights: Vec<f64>,
    kind: RuleKind,
}

impl SphereRule {
    /// Build a rule for odd `d`. `resolution` controls node counts for the
    /// `d = 3` product rule (`resolution` polar × `2·resolution` azimuthal)
    /// and is the sample count for Monte Carlo; `seed` only affects Monte
    /// Carlo.
    pub fn new(d: usize, resolution: usize, seed: u64) -> Result<Self> {
        if d == 0 || d.is_multiple_of(2) {
            return Err(Error::EvenDimension(d));
        }
        match d {
            1 => Ok(Self {
                dim: 1,
                nodes: vec![
                    DVector::from_column_slice(&[1.0]),
                    DVector::from_column_slice(&[-1.0]),
                ],
                weights: vec![1.0, 1.0],
                kind: RuleKind::ExactS0,
            }),
            3 => {
                let n_polar = resolution.max(2);
                let n_az = 2 * n_polar;
                let (t_nodes, t_weights) = gauss_legendre_rule(n_polar);
                let az_weight = 2.0 * std::f64::consts::PI / n_az as f64;
                let mut nodes = Vec::with_capacity(n_polar * n_az);
                let mut weights = Vec::with_capacity(n_polar * n_az);
                for (t, tw) in t_nodes.iter().zip(&t_weights) {
                    let s = (1.0 - t * t).max(0.0).sqrt();
                    for k in 0..n_az {
                        let phi = (k as f64 + 0.5) * 2.0 * std::f64::consts::PI / n_az as f64;
                        nodes.push(DVector::from_column_slice(&[
                            s * phi.cos(),
                            s * phi.sin(),
                            *t,
                        ]));
                        weights.push(tw * az_weight);
                    }
                }
                Ok(Self {
                    dim: 3,
                    nodes,
                    weights,
                    kind: RuleKind::Product,
                })
            }
            _ => {
                let n = resolution.max(1);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let w = surface_measure(d) / n as f64;
                let mut nodes = Vec::with_capacity(n);
                while nodes.len() < n {
                    let v = DVector::from_fn(d, |_, _| standard_normal(&mut rng));
                    let norm = v.norm();
                    if norm > 1e-12 {
                        nodes.push(v / norm);
                    }
                }
                Ok(Self {
                    dim: d,
                    nodes,
                    weights: vec![w; n],
                    kind: RuleKind::MonteCarlo { seed },
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[DVector<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }
}

/// Box-Muller; keeps the dependency surface at `rand` core only.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    loop {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        if u > f64::MIN_POSITIVE {
            return (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
        }
    }
}

/// Surface measure `|S^{d−1}| = 2 π^{d/2} / Γ(d/2)`.
///
/// `Γ` is evaluated in closed form: factorials for integer arguments and
/// `Γ(k + 1/2) = (2k)! √π / (4^k k!)` for half-integers.
pub fn surface_measure(d: usize) -> f64 {
    assert!(d >= 1);
    let pi = std::f64::consts::PI;
    if d.is_multiple_of(2) {
        // Γ(d/2) = (d/2 − 1)!
        let mut gamma = 1.0;
        for k in 2..d / 2 {
            gamma *= k as f64;
        }
        2.0 * pi.powi((d / 2) as i32) / gamma
    } else {
        // Γ(d/2) with d = 2k + 1.
        let k = (d - 1) / 2;
        let mut gamma = pi.sqrt();
        for j in 0..k {
            gamma *= j as f64 + 0.5;
        }
        2.0 * pi.powf(d as f64 / 2.0) / gamma
    }
}
