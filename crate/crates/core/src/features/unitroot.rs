//! KPSS level-stationarity and Phillips-Perron Z-alpha statistics, used as
//! descriptive features rather than hypothesis tests.

use super::stats::{has_spread, long_run_variance, mean, simple_regression};

pub const MIN_LENGTH: usize = 12;

/// Short Bartlett bandwidth trunc(4 (n/100)^0.25).
pub fn short_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).trunc() as usize
}

/// KPSS statistic for level stationarity.
pub fn kpss(x: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < MIN_LENGTH || !has_spread(x) {
        return None;
    }
    let m = mean(x);
    let e: Vec<f64> = x.iter().map(|v| v - m).collect();
    let mut partial = 0.0;
    let mut eta = 0.0;
    for v in &e {
        partial += v;
        eta += partial * partial;
    }
    let nf = n as f64;
    eta /= nf * nf;
    let s2 = long_run_variance(&e, short_bandwidth(n));
    if !(s2 > 0.0) {
        return None;
    }
    Some(eta / s2)
}

/// Phillips-Perron Z-alpha statistic from the regression
/// y_t = c + a y_{t-1} + u_t.
pub fn phillips_perron(x: &[f64]) -> Option<f64> {
    if x.len() < MIN_LENGTH || !has_spread(x) {
        return None;
    }
    let y = &x[1..];
    let lagged = &x[..x.len() - 1];
    let n = y.len();
    let nf = n as f64;
    let (c, a) = simple_regression(lagged, y)?;
    let res: Vec<f64> = y.iter().zip(lagged).map(|(yt, yl)| yt - c - a * yl).collect();
    let s = res.iter().map(|v| v * v).sum::<f64>() / nf;
    let sig = long_run_variance(&res, short_bandwidth(n));
    let lambda = 0.5 * (sig - s);
    let ym = mean(y);
    let yybar = y.iter().map(|v| (v - ym) * (v - ym)).sum::<f64>() / (nf * nf);
    if !(yybar > 0.0) {
        return None;
    }
    Some(nf * (a - 1.0) - lambda / yybar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bandwidth_values() {
        assert_eq!(short_bandwidth(100), 4);
        assert_eq!(short_bandwidth(500), 5);
        assert_eq!(short_bandwidth(12), 2);
    }

    #[test]
    fn short_and_constant_inputs() {
        assert_eq!(kpss(&[1.0, 2.0, 3.0]), None);
        assert_eq!(phillips_perron(&[1.0; 11]), None);
        assert_eq!(kpss(&[2.0; 40]), None);
    }

    #[test]
    fn random_walk_has_larger_kpss_than_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise: Vec<f64> = (0..500).map(|_| rng.gen::<f64>() - 0.5).collect();
        let walk: Vec<f64> = noise
            .iter()
            .scan(0.0, |s, v| {
                *s += v;
                Some(*s)
            })
            .collect();
        assert!(kpss(&walk).unwrap() > kpss(&noise).unwrap());
        // Z-alpha is strongly negative for stationary noise, near zero for a walk
        assert!(phillips_perron(&noise).unwrap() < phillips_perron(&walk).unwrap());
    }

    /// KPSS with the sums spelled out term by term.
    #[test]
    fn kpss_matches_literal_formula() {
        let x: Vec<f64> = (0..30).map(|i| ((i * 13 % 7) as f64) + 0.2 * i as f64).collect();
        let n = x.len();
        let xbar = x.iter().sum::<f64>() / n as f64;
        let e: Vec<f64> = x.iter().map(|v| v - xbar).collect();
        let s: Vec<f64> = (0..n).map(|t| e[..=t].iter().sum()).collect();
        let num = s.iter().map(|v| v * v).sum::<f64>() / (n * n) as f64;
        let l = 2usize; // trunc(4 * 0.3^0.25) = 2
        let mut lrv = e.iter().map(|v| v * v).sum::<f64>() / n as f64;
        for lag in 1..=l {
            let w = 1.0 - lag as f64 / (l as f64 + 1.0);
            let g: f64 = (lag..n).map(|t| e[t] * e[t - lag]).sum();
            lrv += 2.0 * w * g / n as f64;
        }
        assert!((kpss(&x).unwrap() - num / lrv).abs() < 1e-12);
    }
}
