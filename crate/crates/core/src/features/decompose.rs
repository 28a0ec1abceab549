//! Trend/remainder decomposition with a tricube-weighted local linear
//! smoother, and the features derived from it.
//!
//! Series are treated as non-seasonal, so the seasonal component is zero and
//! `input = trend + remainder`.

use super::stats::{has_spread, mean, var};

pub const MIN_LENGTH: usize = 7;
const WINDOW_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub trend: Vec<f64>,
    pub remainder: Vec<f64>,
}

/// Smoothing window in points: max(7, ceil(0.1 n)).
pub fn window_len(n: usize) -> usize {
    MIN_LENGTH.max((WINDOW_FRACTION * n as f64).ceil() as usize)
}

fn tricube(u: f64) -> f64 {
    let a = 1.0 - u.abs().powi(3);
    if a <= 0.0 {
        0.0
    } else {
        a * a * a
    }
}

pub fn decompose(x: &[f64]) -> Option<Decomposition> {
    let n = x.len();
    if n < MIN_LENGTH {
        return None;
    }
    let half = window_len(n) / 2;
    let bandwidth = (half + 1) as f64;
    let mut trend = Vec::with_capacity(n);
    for t in 0..n {
        let lo = t.saturating_sub(half);
        let hi = (t + half).min(n - 1);
        let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, &y) in x.iter().enumerate().take(hi + 1).skip(lo) {
            let d = i as f64 - t as f64;
            let w = tricube(d / bandwidth);
            s0 += w;
            s1 += w * d;
            s2 += w * d * d;
            t0 += w * y;
            t1 += w * d * y;
        }
        let det = s0 * s2 - s1 * s1;
        let fit = if det.abs() > 1e-12 * s0 * s2 {
            (s2 * t0 - s1 * t1) / det
        } else {
            t0 / s0
        };
        trend.push(fit);
    }
    let remainder = x.iter().zip(&trend).map(|(a, b)| a - b).collect();
    Some(Decomposition { trend, remainder })
}

/// Strength of trend: 1 - Var(remainder) / Var(x), clipped to [0, 1].
pub fn trend_strength(x: &[f64], d: &Decomposition) -> Option<f64> {
    if !has_spread(x) {
        return None;
    }
    let vx = var(x)?;
    let vr = var(&d.remainder)?;
    Some((1.0 - vr / vx).clamp(0.0, 1.0))
}

/// Variance of the leave-one-out variances of the remainder.
pub fn spike(d: &Decomposition) -> Option<f64> {
    let r = &d.remainder;
    let n = r.len();
    if n < 3 {
        return None;
    }
    let v = var(r)?;
    let m = mean(r);
    let loo: Vec<f64> = r
        .iter()
        .map(|e| (v * (n - 1) as f64 - (e - m) * (e - m)) / (n - 2) as f64)
        .collect();
    var(&loo)
}

/// Orthonormal degree-1 and degree-2 polynomial bases over t = 1..n.
fn orthonormal_poly(n: usize) -> (Vec<f64>, Vec<f64>) {
    let t: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let tm = mean(&t);
    let mut p1: Vec<f64> = t.iter().map(|v| v - tm).collect();
    let n1 = p1.iter().map(|v| v * v).sum::<f64>().sqrt();
    p1.iter_mut().for_each(|v| *v /= n1);

    let sq: Vec<f64> = t.iter().map(|v| v * v).collect();
    let sm = mean(&sq);
    let mut p2: Vec<f64> = sq.iter().map(|v| v - sm).collect();
    let proj: f64 = p2.iter().zip(&p1).map(|(a, b)| a * b).sum();
    p2.iter_mut().zip(&p1).for_each(|(a, b)| *a -= proj * b);
    let n2 = p2.iter().map(|v| v * v).sum::<f64>().sqrt();
    p2.iter_mut().for_each(|v| *v /= n2);
    (p1, p2)
}

/// Linearity and curvature: regression coefficients of the trend component
/// on orthonormal linear and quadratic polynomials.
pub fn linearity_curvature(d: &Decomposition) -> Option<(f64, f64)> {
    let n = d.trend.len();
    if n < 3 {
        return None;
    }
    let (p1, p2) = orthonormal_poly(n);
    let lin = d.trend.iter().zip(&p1).map(|(a, b)| a * b).sum();
    let curv = d.trend.iter().zip(&p2).map(|(a, b)| a * b).sum();
    Some((lin, curv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_lines() {
        for &n in &[7usize, 10, 33, 200] {
            let b = 0.37;
            let x: Vec<f64> = (1..=n).map(|t| 2.5 + b * t as f64).collect();
            let d = decompose(&x).unwrap();
            for r in &d.remainder {
                assert!(r.abs() < 1e-6 * b * n as f64, "n={n} r={r}");
            }
            assert!(trend_strength(&x, &d).unwrap() >= 0.99);
        }
    }

    #[test]
    fn reconstructs_input() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.9).sin() * 3.0 + i as f64).collect();
        let d = decompose(&x).unwrap();
        for ((a, t), r) in x.iter().zip(&d.trend).zip(&d.remainder) {
            assert!((a - (t + r)).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn constant_has_zero_remainder() {
        let d = decompose(&[4.0; 12]).unwrap();
        assert!(d.trend.iter().all(|t| (t - 4.0).abs() < 1e-12));
        assert!(d.remainder.iter().all(|r| r.abs() < 1e-12));
        assert_eq!(trend_strength(&[4.0; 12], &d), None);
    }

    #[test]
    fn too_short() {
        assert!(decompose(&[1.0; 6]).is_none());
    }

    #[test]
    fn increasing_line_is_linear_not_curved() {
        let x: Vec<f64> = (1..=40).map(|t| t as f64).collect();
        let d = decompose(&x).unwrap();
        let (lin, curv) = linearity_curvature(&d).unwrap();
        assert!(lin > 0.0);
        assert!(curv.abs() < 1e-8);
    }

    #[test]
    fn quadratic_has_curvature() {
        let x: Vec<f64> = (1..=40).map(|t| ((t as f64) - 20.0).powi(2)).collect();
        let d = decompose(&x).unwrap();
        let (lin, curv) = linearity_curvature(&d).unwrap();
        assert!(curv > 0.0);
        assert!(lin.abs() < curv.abs());
    }
}
