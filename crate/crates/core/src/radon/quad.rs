//! Quadrature support for absolute values of smooth mixtures.
//!
//! The integrands here are `|g|` for a smooth Hermite-Gaussian mixture `g`;
//! the absolute value destroys smoothness exactly at the sign changes of
//! `g`, so panels are aligned with numerically bracketed roots and then a
//! nested Gauss-Legendre pair per panel drives adaptive bisection.

use std::sync::OnceLock;

use crate::tridiag;

/// Gauss-Legendre rule on `[−1, 1]` (weights sum to 2), exact through
/// polynomial degree `2n − 1`.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let (nodes, firsts) = tridiag::eigen_with_first_components(&diag, &off);
    let weights = firsts.iter().map(|f| 2.0 * f * f).collect();
    (nodes, weights)
}

fn nested_rules() -> &'static ((Vec<f64>, Vec<f64>), (Vec<f64>, Vec<f64>)) {
    static RULES: OnceLock<((Vec<f64>, Vec<f64>), (Vec<f64>, Vec<f64>))> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre_rule(15), gauss_legendre_rule(31)))
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

/// Result of an adaptive panel integration.
#[derive(Debug, Clone, Copy)]
pub struct PanelIntegral {
    pub value: f64,
    /// Sum of per-panel nested-rule discrepancies.
    pub error: f64,
    pub panels: usize,
}

fn eval_panel<F: Fn(f64) -> f64>(g: &F, lo: f64, hi: f64) -> Panel {
    let ((n_lo, w_lo), (n_hi, w_hi)) = nested_rules();
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut coarse = 0.0;
    for (x, w) in n_lo.iter().zip(w_lo) {
        coarse += w * g(mid + half * x).abs();
    }
    let mut fine = 0.0;
    for (x, w) in n_hi.iter().zip(w_hi) {
        fine += w * g(mid + half * x).abs();
    }
    Panel {
        lo,
        hi,
        value: half * fine,
        error: half * (fine - coarse).abs(),
    }
}

/// Bracket and bisect the sign changes of `g` between `lo` and `hi`.
fn sign_changes<F: Fn(f64) -> f64>(g: &F, lo: f64, hi: f64, probes: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let step = (hi - lo) / probes as f64;
    let mut prev_x = lo;
    let mut prev_v = g(lo);
    for i in 1..=probes {
        let x = lo + step * i as f64;
        let v = g(x);
        if prev_v == 0.0 {
            roots.push(prev_x);
        } else if v != 0.0 && prev_v.signum() != v.signum() {
            let (mut a, mut b) = (prev_x, x);
            let mut fa = prev_v;
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let fm = g(m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fa.signum() != fm.signum() {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_x = x;
        prev_v = v;
    }
    roots
}

/// Integrate `|g|` over `[lo, hi]`.
///
/// `seeds` are locations where the mixture structure changes (the shifted
/// centers); panel boundaries start there, get refined with bracketed roots
/// of `g`, and panels are bisected worst-first until the summed nested-rule
/// discrepancy drops below `tol` (or a panel cap is hit, in which case the
/// reported error stays honest).
pub fn integrate_abs<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, seeds: &[f64], tol: f64) -> PanelIntegral {
    if !(hi > lo) {
        return PanelIntegral {
            value: 0.0,
            error: 0.0,
            panels: 0,
        };
    }

    let mut cuts = vec![lo, hi];
    cuts.extend(seeds.iter().copied().filter(|s| *s > lo && *s < hi));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut boundaries = Vec::new();
    for w in cuts.windows(2) {
        boundaries.push(w[0]);
        // Probe density proportional to panel width, bounded for huge spans.
        let probes = (((w[1] - w[0]) * 8.0).ceil() as usize).clamp(16, 256);
        boundaries.extend(sign_changes(&g, w[0], w[1], probes));
    }
    boundaries.push(hi);
    boundaries.sort_by(f64::total_cmp);
    boundaries.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

    let mut panels: Vec<Panel> = boundaries
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| eval_panel(&g, w[0], w[1]))
        .collect();

    const MAX_PANELS: usize = 40_000;
    loop {
        let total_error: f64 = panels.iter().map(|p| p.error).sum();
        if total_error <= tol || panels.len() >= MAX_PANELS {
            break;
        }
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if p.error > panels[worst].error {
                worst = i;
            }
        }
        let p = panels[worst];
        if p.hi - p.lo < 1e-14 * (hi - lo).max(1.0) {
            break; // cannot meaningfully split further
        }
        let mid = 0.5 * (p.lo + p.hi);
        panels[worst] = eval_panel(&g, p.lo, mid);
        panels.push(eval_panel(&g, mid, p.hi));
    }

    // Deterministic accumulation order: left to right.
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    PanelIntegral {
        value,
        error,
        panels: panels.len(),
    }
}

/// Plain adaptive Simpson on `|g|` — an intentionally separate integration
/// path used by the one-dimensional cross-check.
pub fn adaptive_simpson_abs<F: Fn(f64) -> f64>(g: &F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        g: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = g(lm).abs();
        let frm = g(rm).abs();
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            (left + right + delta / 15.0, delta.abs() / 15.0)
        } else {
            let (lv, le) = recurse(g, a, m, fa, flm, fm, left, tol * 0.5, depth - 1);
            let (rv, re) = recurse(g, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
            (lv + rv, le + re)
        }
    }

    if !(hi > lo) {
        return (0.0, 0.0);
    }
    // Split into unit-ish chunks so one deep recursion cannot starve others.
    let chunks = ((hi - lo).ceil() as usize).clamp(1, 4096);
    let step = (hi - lo) / chunks as f64;
    let mut value = 0.0;
    let mut error = 0.0;
    for i in 0..chunks {
        let a = lo + step * i as f64;
        let b = a + step;
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (g(a).abs(), g(m).abs(), g(b).abs());
        let whole = simpson(fa, fm, fb, b - a);
        let (v, e) = recurse(g, a, b, fa, fm, fb, whole, tol / chunks as f64, 48);
        value += v;
        error += e;
    }
    (value, error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_weights_sum_to_two() {
        for n in [1usize, 2, 5, 15, 31] {
            let (_, w) = gauss_legendre_rule(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn legendre_integrates_monomials() {
        let (x, w) = gauss_legendre_rule(8);
        // ∫_{-1}^{1} t^4 dt = 2/5.
        let v: f64 = x.iter().zip(&w).map(|(t, w)| w * t.powi(4)).sum();
        assert!((v - 0.4).abs() < 1e-14);
    }

    #[test]
    fn integrate_abs_of_sine() {
        // ∫_0^{2π} |sin| = 4, with a kink at π.
        let r = integrate_abs(
            |t: f64| t.sin(),
            0.0,
            2.0 * std::f64::consts::PI,
            &[],
            1e-12,
        );
        assert!((r.value - 4.0).abs() < 1e-10, "value {}", r.value);
        assert!(r.error < 1e-10);
    }

    #[test]
    fn integrate_abs_gaussian_hump() {
        // ∫ e^{−t²/2} over ±10 ≈ √(2π).
        let r = integrate_abs(|t: f64| (-0.5 * t * t).exp(), -10.0, 10.0, &[0.0], 1e-12);
        assert!((r.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn simpson_matches_panels() {
        let g = |t: f64| (t - 1.0) * (-0.2 * t * t).exp();
        let a = integrate_abs(g, -8.0, 8.0, &[1.0], 1e-11);
        let (v, e) = adaptive_simpson_abs(&g, -8.0, 8.0, 1e-11);
        assert!((a.value - v).abs() < 1e-8 + a.error + e);
    }

    #[test]
    fn degenerate_interval() {
        let r = integrate_abs(|_| 1.0, 3.0, 3.0, &[], 1e-10);
        assert_eq!(r.value, 0.0);
    }
}
