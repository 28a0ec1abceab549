//! Small numeric helpers shared by the feature implementations.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Neumaier-compensated sum.
pub fn sum(xs: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

pub fn mean(xs: &[f64]) -> f64 {
    sum(xs) / xs.len() as f64
}

/// Sample variance (denominator n - 1). `None` for fewer than two values.
pub fn var(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    Some(ss / (xs.len() - 1) as f64)
}

pub fn sd(xs: &[f64]) -> Option<f64> {
    var(xs).map(f64::sqrt)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn diff(xs: &[f64]) -> Vec<f64> {
    xs.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Standardizes to zero mean and unit sample sd; a zero-variance input is
/// only centered.
pub fn zscore(xs: &[f64]) -> Vec<f64> {
    let m = mean(xs);
    match sd(xs) {
        Some(s) if has_spread(xs) => xs.iter().map(|x| (x - m) / s).collect(),
        _ => xs.iter().map(|x| x - m).collect(),
    }
}

/// False for series that are constant (up to rounding of the mean).
pub fn has_spread(xs: &[f64]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    !negligible_spread(ss, xs)
}

/// True when a centered sum of squares is zero up to the rounding left by
/// subtracting the mean of a constant series.
pub fn negligible_spread(centered_ss: f64, xs: &[f64]) -> bool {
    let scale = xs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    !centered_ss.is_finite() || centered_ss <= xs.len() as f64 * (scale * 1e-13).powi(2)
}

/// Autocorrelations r_1..r_max_lag. `None` when the series is constant or
/// too short for the requested lag.
pub fn acf(xs: &[f64], max_lag: usize) -> Option<Vec<f64>> {
    let n = xs.len();
    if n <= max_lag {
        return None;
    }
    let m = mean(xs);
    let c: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let denom: f64 = c.iter().map(|v| v * v).sum();
    if negligible_spread(denom, xs) {
        return None;
    }
    Some(
        (1..=max_lag)
            .map(|k| c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / denom)
            .collect(),
    )
}

/// All autocorrelations r_0..r_{n-1} via FFT.
pub fn acf_full(xs: &[f64]) -> Option<Vec<f64>> {
    let n = xs.len();
    let m = mean(xs);
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = xs
        .iter()
        .map(|x| Complex::new(x - m, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex::new(v.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let r0 = buf[0].re / size as f64;
    if negligible_spread(r0, xs) {
        return None;
    }
    let r0 = buf[0].re;
    Some(buf[..n].iter().map(|v| v.re / r0).collect())
}

/// Partial autocorrelations 1..=max_lag by Durbin-Levinson recursion.
pub fn pacf(xs: &[f64], max_lag: usize) -> Option<Vec<f64>> {
    let r = acf(xs, max_lag)?;
    let mut out = Vec::with_capacity(max_lag);
    let mut phi: Vec<f64> = Vec::new();
    for k in 1..=max_lag {
        let num = r[k - 1] - (1..k).map(|j| phi[j - 1] * r[k - j - 1]).sum::<f64>();
        let den = 1.0 - (1..k).map(|j| phi[j - 1] * r[j - 1]).sum::<f64>();
        if den.abs() < 1e-300 {
            return None;
        }
        let pk = num / den;
        let mut next = vec![0.0; k];
        for j in 1..k {
            next[j - 1] = phi[j - 1] - pk * phi[k - j - 1];
        }
        next[k - 1] = pk;
        phi = next;
        out.push(pk);
    }
    Some(out)
}

/// Residuals of the least-squares projection of `y` on the span of
/// `columns` (modified Gram-Schmidt; near-dependent columns are skipped).
pub fn ols_residuals(columns: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    for col in columns {
        let mut v = col.clone();
        let scale = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        for q in &basis {
            let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-10 * scale.max(1e-300) {
            v.iter_mut().for_each(|a| *a /= norm);
            basis.push(v);
        }
    }
    let mut r = y.to_vec();
    for q in &basis {
        let d: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
        r.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
    }
    r
}

/// Intercept and slope of the simple regression of `y` on `x`.
pub fn simple_regression(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

/// Bartlett-weighted long-run variance of already-centered residuals.
pub fn long_run_variance(e: &[f64], lags: usize) -> f64 {
    let n = e.len() as f64;
    let mut s = e.iter().map(|v| v * v).sum::<f64>() / n;
    for l in 1..=lags.min(e.len().saturating_sub(1)) {
        let w = 1.0 - l as f64 / (lags as f64 + 1.0);
        let cov: f64 = e[l..].iter().zip(e).map(|(a, b)| a * b).sum();
        s += 2.0 * w * cov / n;
    }
    s
}
