//! Mahalanobis-Gaussian kernel geometry: the metric, kernel machines, Gram
//! matrices, RKHS norms, and the harmonic-coefficient norm bound.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An SPD Mahalanobis matrix with its factorization and spectral data.
///
/// The scale `σ` of the kernel `exp(−‖x−y‖²_M / (2σ²))` is absorbed at
/// construction into the effective matrix `M_eff = M/σ²`, so every quantity
/// stored here (factor, determinant, eigenvalue extremes) refers to `M_eff`
/// and the kernel is simply `exp(−‖x−y‖²_{M_eff} / 2)`.
///
/// The factor is the upper-triangular `L` with `M_eff = LᵀL`. All formulas
/// downstream only use `|det L| = √(det M_eff)` and `‖L^{−T}β‖`, which do not
/// depend on which triangular convention is chosen.
#[derive(Debug, Clone)]
pub struct MahalanobisMetric {
    dim: usize,
    m: DMatrix<f64>,
    l: DMatrix<f64>,
    sigma: f64,
    det_l: f64,
    lambda_min: f64,
    lambda_max: f64,
}

impl MahalanobisMetric {
    /// Build a metric from an SPD matrix and scale, absorbing `σ` into
    /// `M_eff = M/σ²`.
    pub fn from_matrix(m: DMatrix<f64>, sigma: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        crate::ensure_positive("sigma", sigma)?;
        let dim = m.nrows();

        let scale = m.amax().max(1.0);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let dev = (m[(i, j)] - m[(j, i)]).abs();
                if dev > 1e-12 * scale {
                    return Err(Error::Asymmetric {
                        row: i,
                        col: j,
                        deviation: dev,
                    });
                }
            }
        }

        let m_eff = &m / (sigma * sigma);
        let sym = (&m_eff + m_eff.transpose()) * 0.5;

        let eig = sym.clone().symmetric_eigen();
        let lambda_min = eig.eigenvalues.min();
        let lambda_max = eig.eigenvalues.max();

        let chol = nalgebra::Cholesky::new(sym.clone());
        let chol = match chol {
            Some(c) if lambda_min > 0.0 => c,
            _ => return Err(Error::NotPositiveDefinite { lambda_min }),
        };
        // Cholesky gives lower C with M = CCᵀ; take L = Cᵀ so M = LᵀL.
        let l = chol.l().transpose();
        let det_l = (0..dim).map(|i| l[(i, i)]).product::<f64>();

        Ok(Self {
            dim,
            m: sym,
            l,
            sigma,
            det_l,
            lambda_min,
            lambda_max,
        })
    }

    /// Identity metric in `dim` dimensions.
    pub fn identity(dim: usize, sigma: f64) -> Result<Self> {
        Self::from_matrix(DMatrix::identity(dim, dim), sigma)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The effective matrix `M_eff = M/σ²`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Upper-triangular factor with `M_eff = LᵀL`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `|det L| = √(det M_eff)`.
    pub fn det_factor(&self) -> f64 {
        self.det_l
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Whether `M_eff` is a multiple of the identity (within rounding).
    pub fn isotropic_scale(&self) -> Option<f64> {
        let s = self.m[(0, 0)];
        let tol = 1e-12 * self.lambda_max.max(1.0);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let expect = if i == j { s } else { 0.0 };
                if (self.m[(i, j)] - expect).abs() > tol {
                    return None;
                }
            }
        }
        Some(s)
    }

    /// Kernel value `exp(−(x−y)ᵀ M_eff (x−y) / 2)`, in `(0, 1]`.
    pub fn kernel(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        let diff = x - y;
        let q = (&self.m * &diff).dot(&diff);
        Ok((-0.5 * q).exp())
    }
}

/// A finite kernel machine `f = Σ αᵢ k(xᵢ, ·)`.
#[derive(Debug, Clone)]
pub struct KernelMachine {
    pub metric: MahalanobisMetric,
    centers: Vec<DVector<f64>>,
    coeffs: Vec<f64>,
}

impl KernelMachine {
    pub fn new(
        metric: MahalanobisMetric,
        centers: Vec<DVector<f64>>,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::EmptyMachine);
        }
        if centers.len() != coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: centers.len(),
                got: coeffs.len(),
            });
        }
        for c in &centers {
            if c.len() != metric.dim() {
                return Err(Error::DimensionMismatch {
                    expected: metric.dim(),
                    got: c.len(),
                });
            }
        }
        Ok(Self {
            metric,
            centers,
            coeffs,
        })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn centers(&self) -> &[DVector<f64>] {
        &self.centers
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The machine restricted to its first `n` centers.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::OutOfRange {
                name: "n",
                value: n as f64,
                range: "1 ..= number of centers",
            });
        }
        Ok(Self {
            metric: self.metric.clone(),
            centers: self.centers[..n].to_vec(),
            coeffs: self.coeffs[..n].to_vec(),
        })
    }

    /// Evaluate `f(x)`.
    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (c, a) in self.centers.iter().zip(&self.coeffs) {
            acc += a * self.metric.kernel(c, x)?;
        }
        Ok(acc)
    }

    /// Gram matrix `K[i,j] = k(xᵢ, xⱼ)`: symmetric, unit diagonal, PSD.
    pub fn gram_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = 1.0;
            for j in (i + 1)..n {
                let v = self
                    .metric
                    .kernel(&self.centers[i], &self.centers[j])
                    .expect("centers validated at construction");
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }

    /// Squared RKHS norm `αᵀKα`.
    pub fn rkhs_norm_sq(&self) -> f64 {
        let k = self.gram_matrix();
        let alpha = DVector::from_column_slice(&self.coeffs);
        (&k * &alpha).dot(&alpha)
    }

    /// Squared RKHS norms of all prefix machines `f_1, …, f_n` in one
    /// `O(n²)` pass:
    /// `‖f_m‖² = ‖f_{m−1}‖² + α_m² + 2 α_m Σ_{i<m} αᵢ k(xᵢ, x_m)`.
    pub fn rkhs_norm_sq_prefixes(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n);
        let mut acc = 0.0;
        for m in 0..n {
            let mut cross = 0.0;
            for i in 0..m {
                cross += self.coeffs[i]
                    * self
                        .metric
                        .kernel(&self.centers[i], &self.centers[m])
                        .expect("centers validated at construction");
            }
            acc += self.coeffs[m] * self.coeffs[m] + 2.0 * self.coeffs[m] * cross;
            out.push(acc);
        }
        out
    }

    /// `Σ |αᵢ|`.
    pub fn l1_norm(&self) -> f64 {
        l1_norm(&self.coeffs)
    }
}

/// `Σ |αᵢ|` of a coefficient slice.
pub fn l1_norm(coeffs: &[f64]) -> f64 {
    coeffs.iter().map(|a| a.abs()).sum()
}

/// Coefficient sequences: the harmonic rule `αᵢ = 1/i` or an explicit list.
///
/// The harmonic sequence is the divergence witness: its partial ℓ₁ norms are
/// the harmonic numbers `H_n → ∞` while the RKHS norm of the corresponding
/// separated machine stays bounded.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientSequence {
    Harmonic { n: usize },
    Explicit(Vec<f64>),
}

impl CoefficientSequence {
    pub fn len(&self) -> usize {
        match self {
            Self::Harmonic { n } => *n,
            Self::Explicit(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Harmonic { n } => (1..=*n).map(|i| 1.0 / i as f64).collect(),
            Self::Explicit(v) => v.clone(),
        }
    }

    /// ℓ₁ norm of the first `n` coefficients.
    pub fn l1_prefix(&self, n: usize) -> Result<f64> {
        if n > self.len() {
            return Err(Error::OutOfRange {
                name: "n",
                value: n as f64,
                range: "0 ..= sequence length",
            });
        }
        Ok(match self {
            Self::Harmonic { .. } => harmonic_number(n),
            Self::Explicit(v) => l1_norm(&v[..n]),
        })
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1_prefix(self.len()).expect("full prefix always valid")
    }
}

/// `H_n = Σ_{i=1}^n 1/i`.
pub fn harmonic_number(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

/// Upper bound on the squared RKHS norm of the harmonic machine on any
/// centers with `‖xᵢ − xⱼ‖ ≥ |i−j| δ`:
///
/// ```text
/// Σ_{i≤n} 1/i²  +  2 Σ_{k≥1} exp(−(kδ)²/(2σ²)) H_k / k .
/// ```
///
/// The diagonal part is the partial sum (→ π²/6); the off-diagonal series is
/// truncated once a geometric-tail certificate puts the remainder below
/// `1e−16` of the accumulated value. `H_k/k ≤ 1` makes the certificate a
/// pure Gaussian tail.
pub fn harmonic_norm_bound(n: usize, delta: f64, sigma: f64) -> Result<f64> {
    crate::ensure_positive("delta", delta)?;
    crate::ensure_positive("sigma", sigma)?;

    let diag: f64 = (1..=n).map(|i| 1.0 / ((i * i) as f64)).sum();

    let s2 = 2.0 * sigma * sigma;
    let mut off = 0.0;
    let mut h_k = 0.0;
    let mut k = 1usize;
    loop {
        h_k += 1.0 / k as f64;
        let kd = (k as f64) * delta;
        off += (-kd * kd / s2).exp() * h_k / k as f64;

        // Remainder: terms are ≤ exp(−(kδ)²/(2σ²)) and shrink at least by
        // exp(−(2k+3)δ²/(2σ²)) from k+1 on.
        let next = ((k + 1) as f64) * delta;
        let head = (-next * next / s2).exp();
        let ratio = (-((2 * k + 3) as f64) * delta * delta / s2).exp();
        let remainder = head / (1.0 - ratio);
        if remainder < 1e-16 * (diag + 2.0 * off).max(1.0) {
            break;
        }
        k += 1;
        assert!(k < 100_000_000, "off-diagonal series failed to converge");
    }

    Ok(diag + 2.0 * off)
}

/// JSON machine description accepted by the command-line tools.
///
/// `M` is row-major and optional (identity by default).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MachineSpec {
    pub dimension: usize,
    pub sigma: f64,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<f64>>,
    pub centers: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
}

impl MachineSpec {
    pub fn to_machine(&self) -> Result<KernelMachine> {
        let d = self.dimension;
        if d == 0 {
            return Err(Error::Spec("field `dimension` must be at least 1".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Spec(format!(
                "field `sigma` must be positive, got {}",
                self.sigma
            )));
        }
        let m = match &self.m {
            None => DMatrix::identity(d, d),
            Some(flat) => {
                if flat.len() != d * d {
                    return Err(Error::Spec(format!(
                        "field `M` must have {}x{} = {} entries (row-major), got {}",
                        d,
                        d,
                        d * d,
                        flat.len()
                    )));
                }
                DMatrix::from_row_slice(d, d, flat)
            }
        };
        if self.centers.is_empty() {
            return Err(Error::Spec("field `centers` must not be empty".into()));
        }
        if self.centers.len() != self.alphas.len() {
            return Err(Error::Spec(format!(
                "fields `centers` ({}) and `alphas` ({}) must have equal length",
                self.centers.len(),
                self.alphas.len()
            )));
        }
        let mut centers = Vec::with_capacity(self.centers.len());
        for (i, c) in self.centers.iter().enumerate() {
            if c.len() != d {
                return Err(Error::Spec(format!(
                    "field `centers[{}]` has {} coordinates, expected dimension {}",
                    i,
                    c.len(),
                    d
                )));
            }
            centers.push(DVector::from_column_slice(c));
        }
        let metric = MahalanobisMetric::from_matrix(m, self.sigma)?;
        KernelMachine::new(metric, centers, self.alphas.clone())
    }
}
