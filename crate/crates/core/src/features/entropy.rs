//! Entropy-type features: histogram Shannon estimators, spectral entropy,
//! approximate entropy and sample entropy.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::stats::{has_spread, mean, sd};

/// Embedding dimension for ApEn/SampEn.
pub const EMBED_DIM: usize = 2;
/// Tolerance factor: r = 0.2 * sd.
pub const TOLERANCE_FACTOR: f64 = 0.2;

/// Equal-width histogram with ceil(sqrt(n)) bins over [min, max]. A
/// degenerate range collapses into a single bin.
pub fn histogram_counts(x: &[f64]) -> Vec<usize> {
    let n = x.len();
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![n];
    }
    let k = (n as f64).sqrt().ceil() as usize;
    let width = (hi - lo) / k as f64;
    let mut counts = vec![0usize; k];
    for &v in x {
        let b = (((v - lo) / width).floor() as usize).min(k - 1);
        counts[b] += 1;
    }
    counts
}

/// Chao-Shen coverage-adjusted Shannon entropy (nats) of bin counts.
pub fn chao_shen(counts: &[usize]) -> Option<f64> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return None;
    }
    let nf = n as f64;
    let mut f1 = counts.iter().filter(|&&c| c == 1).count();
    if f1 == n {
        f1 = n - 1;
    }
    let coverage = 1.0 - f1 as f64 / nf;
    let mut h = 0.0;
    for &c in counts.iter().filter(|&&c| c > 0) {
        let pa = coverage * c as f64 / nf;
        let denom = 1.0 - (1.0 - pa).powf(nf);
        if pa > 0.0 && denom > 0.0 {
            h -= pa * pa.ln() / denom;
        }
    }
    Some(h.max(0.0))
}

/// Schurmann-Grassberger estimator: Shannon entropy of the posterior mean
/// under a symmetric Dirichlet prior with pseudocount 1/K.
pub fn schurmann_grassberger(counts: &[usize]) -> Option<f64> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return None;
    }
    let k = counts.len() as f64;
    let a = 1.0 / k;
    let total = n as f64 + k * a;
    let h = counts
        .iter()
        .map(|&c| (c as f64 + a) / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum::<f64>();
    Some(h.max(0.0))
}

/// Shannon entropy of the normalized periodogram (frequencies 1..n/2)
/// divided by log of the number of frequencies.
pub fn spectral_entropy(x: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 4 || !has_spread(x) {
        return None;
    }
    let m = mean(x);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(v - m, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let power: Vec<f64> = buf[1..=n / 2].iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = power.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let h: f64 = power
        .iter()
        .map(|p| p / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    Some((h / (power.len() as f64).ln()).clamp(0.0, 1.0))
}

fn within(x: &[f64], i: usize, j: usize, len: usize, r: f64) -> bool {
    (0..len).all(|k| (x[i + k] - x[j + k]).abs() <= r)
}

/// Approximate entropy ApEn(m, r) with self-matches counted.
pub fn approximate_entropy(x: &[f64], m: usize, r: f64) -> Option<f64> {
    let n = x.len();
    if n < m + 2 || !(r > 0.0) {
        return None;
    }
    let phi = |len: usize| -> f64 {
        let count = n - len + 1;
        let mut total = 0.0;
        for i in 0..count {
            let c = (0..count).filter(|&j| within(x, i, j, len, r)).count();
            total += (c as f64 / count as f64).ln();
        }
        total / count as f64
    };
    Some(phi(m) - phi(m + 1))
}

/// Sample entropy SampEn(m, r): -ln(A/B) over the first n-m templates,
/// self-matches excluded. Undefined when no matches of length m+1 exist.
pub fn sample_entropy(x: &[f64], m: usize, r: f64) -> Option<f64> {
    let n = x.len();
    if n < m + 2 || !(r > 0.0) {
        return None;
    }
    let templates = n - m;
    let (mut a, mut b) = (0u64, 0u64);
    for i in 0..templates {
        for j in i + 1..templates {
            if within(x, i, j, m, r) {
                b += 1;
                if (x[i + m] - x[j + m]).abs() <= r {
                    a += 1;
                }
            }
        }
    }
    if a == 0 || b == 0 {
        return None;
    }
    Some(-(a as f64 / b as f64).ln())
}

/// Default-parameter ApEn and SampEn (m = 2, r = 0.2 * sd).
pub fn default_tolerance(x: &[f64]) -> Option<f64> {
    if !has_spread(x) {
        return None;
    }
    sd(x).map(|s| TOLERANCE_FACTOR * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_histogram_has_zero_entropy() {
        let counts = histogram_counts(&[4.0; 9]);
        assert_eq!(counts, vec![9]);
        assert_eq!(chao_shen(&counts), Some(0.0));
        assert_eq!(schurmann_grassberger(&counts), Some(0.0));
    }

    #[test]
    fn histogram_uses_sqrt_rule() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let counts = histogram_counts(&x);
        assert_eq!(counts.len(), 4);
        assert_eq!(counts.iter().sum::<usize>(), 10);
        // max lands in the last bin
        assert_eq!(counts, vec![3, 2, 2, 3]);
    }

    #[test]
    fn chao_shen_exceeds_plugin_with_singletons() {
        let counts = [1, 1, 2, 3, 5];
        let n: f64 = 12.0;
        let plugin: f64 = counts.iter().map(|&c| c as f64 / n).map(|p| -p * p.ln()).sum();
        assert!(chao_shen(&counts).unwrap() > plugin);
    }

    #[test]
    fn sinusoid_is_spectrally_concentrated() {
        let x: Vec<f64> = (1..=128)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 16.0).sin())
            .collect();
        assert!(spectral_entropy(&x).unwrap() <= 0.2);
    }

    /// Direct O(n^2) sample entropy written from the definition (counts
    /// over ordered pairs, then halves cancel in the ratio).
    fn sampen_oracle(x: &[f64], m: usize, r: f64) -> f64 {
        let n = x.len();
        let count = |len: usize| {
            let mut c = 0;
            for i in 0..n - m {
                for j in 0..n - m {
                    if i != j && (0..len).all(|k| (x[i + k] - x[j + k]).abs() <= r) {
                        c += 1;
                    }
                }
            }
            c as f64
        };
        -(count(m + 1) / count(m)).ln()
    }

    #[test]
    fn sample_entropy_matches_oracle() {
        let x: Vec<f64> = (0..60).map(|i| ((i * 37 % 11) as f64).sin() + 0.1 * i as f64).collect();
        let r = default_tolerance(&x).unwrap();
        let got = sample_entropy(&x, 2, r).unwrap();
        assert!((got - sampen_oracle(&x, 2, r)).abs() < 1e-12);
    }

    #[test]
    fn regular_series_has_low_apen() {
        let periodic: Vec<f64> = (0..100).map(|i| (i % 4) as f64).collect();
        let r = default_tolerance(&periodic).unwrap();
        let apen = approximate_entropy(&periodic, 2, r).unwrap();
        assert!(apen.abs() < 0.05, "{apen}");
    }
}
