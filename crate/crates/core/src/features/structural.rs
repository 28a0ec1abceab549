//! Shape and structure features: crossings, flat spots, tiled-window
//! stability, rolling shifts, nonlinearity, Hurst exponent and a few
//! distributional summaries.

use super::stats::{has_spread, mean, median, ols_residuals, sd, var, zscore};

/// Window width used by tiling and rolling-window features.
pub const WINDOW: usize = 10;

/// Number of times the series crosses its median.
pub fn crossing_points(x: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let med = median(x);
    let below: Vec<bool> = x.iter().map(|v| *v <= med).collect();
    Some(below.windows(2).filter(|w| w[0] != w[1]).count() as f64)
}

/// Longest run of consecutive points falling into the same of ten
/// equal-width bins.
pub fn flat_spots(x: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / 10.0;
    let bin = |v: f64| {
        if width > 0.0 {
            (((v - lo) / width).floor() as usize).min(9)
        } else {
            0
        }
    };
    let mut best = 1;
    let mut run = 1;
    for w in x.windows(2) {
        if bin(w[0]) == bin(w[1]) {
            run += 1;
            best = best.max(run);
        } else {
            run = 1;
        }
    }
    Some(best as f64)
}

fn tiles(x: &[f64]) -> impl Iterator<Item = &[f64]> {
    x.chunks(WINDOW)
}

/// Variance of the means of non-overlapping windows of the standardized series.
pub fn stability(x: &[f64]) -> Option<f64> {
    if x.len() < 2 * WINDOW {
        return None;
    }
    let z = zscore(x);
    let means: Vec<f64> = tiles(&z).map(mean).collect();
    var(&means)
}

/// Variance of the variances of non-overlapping windows of the standardized
/// series (single-point trailing windows are ignored).
pub fn lumpiness(x: &[f64]) -> Option<f64> {
    if x.len() < 2 * WINDOW {
        return None;
    }
    let z = zscore(x);
    let vars: Vec<f64> = tiles(&z).filter_map(var).collect();
    var(&vars)
}

fn rolling<T, F: Fn(&[f64]) -> Option<T>>(z: &[f64], f: F) -> Vec<Option<T>> {
    z.windows(WINDOW).map(f).collect()
}

fn max_lagged_abs_diff(stats: &[Option<f64>]) -> Option<f64> {
    stats
        .iter()
        .zip(&stats[WINDOW.min(stats.len())..])
        .filter_map(|(a, b)| Some((b.as_ref()? - a.as_ref()?).abs()))
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
}

/// Largest absolute change in rolling mean between windows one width apart.
pub fn max_level_shift(x: &[f64]) -> Option<f64> {
    if x.len() < 2 * WINDOW {
        return None;
    }
    let z = zscore(x);
    max_lagged_abs_diff(&rolling(&z, |w| Some(mean(w))))
}

/// Largest absolute change in rolling variance between windows one width apart.
pub fn max_var_shift(x: &[f64]) -> Option<f64> {
    if x.len() < 2 * WINDOW {
        return None;
    }
    let z = zscore(x);
    max_lagged_abs_diff(&rolling(&z, var))
}

/// Largest Gaussian Kullback-Leibler divergence between rolling windows one
/// width apart. Windows with zero variance are skipped.
pub fn max_kl_shift(x: &[f64]) -> Option<f64> {
    if x.len() < 2 * WINDOW || !has_spread(x) {
        return None;
    }
    let z = zscore(x);
    let params: Vec<Option<(f64, f64)>> = rolling(&z, |w| {
        let v = var(w)?;
        (v > 1e-12).then(|| (mean(w), v))
    });
    params
        .iter()
        .zip(&params[WINDOW..])
        .filter_map(|(a, b)| {
            let (ma, va) = (*a)?;
            let (mb, vb) = (*b)?;
            Some(0.5 * ((vb / va).ln() + (va + (ma - mb).powi(2)) / vb - 1.0))
        })
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
}

/// Teräsvirta neural-network test statistic at lag 1, scaled by 10/n.
pub fn nonlinearity(x: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 10 || !has_spread(x) {
        return None;
    }
    let z = zscore(x);
    let y = &z[1..];
    let lag: Vec<f64> = z[..n - 1].to_vec();
    let ones = vec![1.0; n - 1];
    let u = ols_residuals(&[ones.clone(), lag.clone()], y);
    let ssr0: f64 = u.iter().map(|v| v * v).sum();
    let sq: Vec<f64> = lag.iter().map(|v| v * v).collect();
    let cube: Vec<f64> = lag.iter().map(|v| v * v * v).collect();
    let v = ols_residuals(&[ones, lag, sq, cube], &u);
    let ssr1: f64 = v.iter().map(|e| e * e).sum();
    if !(ssr0 > 1e-12) || !(ssr1 > 0.0) {
        return None;
    }
    let stat = (n - 1) as f64 * (ssr0 / ssr1).ln();
    Some((10.0 * stat / n as f64).max(0.0))
}

/// Hurst exponent from rescaled-range analysis over dyadic window sizes
/// 8, 16, ... up to n/2.
pub fn hurst(x: &[f64]) -> Option<f64> {
    let n = x.len();
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut size = 8;
    while size <= n / 2 {
        let mut rs = Vec::new();
        for chunk in x.chunks_exact(size) {
            let m = mean(chunk);
            let mut cum = 0.0;
            let (mut lo, mut hi) = (0.0f64, 0.0f64);
            for v in chunk {
                cum += v - m;
                lo = lo.min(cum);
                hi = hi.max(cum);
            }
            let s = (chunk.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / size as f64).sqrt();
            if has_spread(chunk) && s > 0.0 {
                rs.push((hi - lo) / s);
            }
        }
        if !rs.is_empty() {
            let avg = mean(&rs);
            if avg > 0.0 {
                points.push(((size as f64).ln(), avg.ln()));
            }
        }
        size *= 2;
    }
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    super::stats::simple_regression(&xs, &ys).map(|(_, slope)| slope)
}

/// Standard deviation of the first differences.
pub fn std1st_der(x: &[f64]) -> Option<f64> {
    if x.len() < 3 {
        return None;
    }
    sd(&super::stats::diff(x))
}

/// First lag at which the autocorrelation is non-positive (n if never).
pub fn firstzero_ac(acf: &[f64]) -> f64 {
    acf.iter()
        .enumerate()
        .skip(1)
        .find(|(_, r)| **r <= 0.0)
        .map_or(acf.len() as f64, |(k, _)| k as f64)
}

/// First lag that is a strict local minimum of the autocorrelation function
/// (n if none).
pub fn firstmin_ac(acf: &[f64]) -> f64 {
    (1..acf.len().saturating_sub(1))
        .find(|&k| acf[k] < acf[k - 1] && acf[k] < acf[k + 1])
        .map_or(acf.len() as f64, |k| k as f64)
}

/// Centre of the most populated of ten equal-width bins of the z-scored series.
pub fn histogram_mode(x: &[f64]) -> Option<f64> {
    if !has_spread(x) {
        return None;
    }
    let z = zscore(x);
    let lo = z.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / 10.0;
    let mut counts = [0usize; 10];
    for v in &z {
        counts[(((v - lo) / width).floor() as usize).min(9)] += 1;
    }
    let best = (0..10).fold(0, |b, i| if counts[i] > counts[b] { i } else { b });
    Some(lo + (best as f64 + 0.5) * width)
}

/// Median, over increasing thresholds on the z-scored series, of the
/// normalized median position of the points exceeding the threshold.
/// Thresholds step by 0.01 and are kept while more than 2% of points exceed
/// them. Values near -1/+1 mean large excursions concentrate early/late.
pub fn outlier_include_mdrmd(x: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 3 || !has_spread(x) {
        return None;
    }
    let z = zscore(x);
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let steps = (max / 0.01).floor() as usize;
    let half = n as f64 / 2.0;
    let mut stats = Vec::new();
    for j in 0..=steps {
        let th = j as f64 * 0.01;
        let idx: Vec<f64> = z
            .iter()
            .enumerate()
            .filter(|(_, v)| **v >= th)
            .map(|(i, _)| (i + 1) as f64)
            .collect();
        if (idx.len() as f64) / (n as f64) <= 0.02 {
            break;
        }
        stats.push(median(&idx) / half - 1.0);
    }
    if stats.is_empty() {
        return None;
    }
    Some(median(&stats))
}
