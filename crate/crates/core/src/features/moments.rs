use super::stats::mean;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub skewness: f64,
    pub kurtosis: f64,
}

/// Pearson (non-excess) kurtosis and moment skewness from the 1/n central
/// moments. `None` for fewer than two points or zero variance.
pub fn moments(x: &[f64]) -> Option<Moments> {
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let m = mean(x);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    // relative threshold: rounding in the mean can leave tiny m2 on constant input
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m2 <= (scale * 1e-14).powi(2) {
        return None;
    }
    Some(Moments {
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent central-moment oracle written in the most literal way.
    fn oracle(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let xbar = x.iter().sum::<f64>() / n;
        let mk = |k: i32| x.iter().map(|v| (v - xbar).powi(k)).sum::<f64>() / n;
        (mk(3) / mk(2).powf(1.5), mk(4) / mk(2).powi(2))
    }

    #[test]
    fn symmetric_series_has_zero_skew() {
        let m = moments(&[1.0, 2.0, 3.0]).unwrap();
        assert!(m.skewness.abs() < 1e-12);
    }

    #[test]
    fn oracle_values() {
        // [0,0,0,1]: m2 = 3/16, m3 = 3/32 -> 2/sqrt(3)
        let m = moments(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((m.skewness - 1.154_700_538_379_251_5).abs() < 1e-12);
        assert!((m.skewness - oracle(&[0.0, 0.0, 0.0, 1.0]).0).abs() < 1e-12);
        // [1,2,3,4]: m2 = 1.25, m4 = 2.5625 -> 1.64
        let m = moments(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((m.kurtosis - 1.64).abs() < 1e-12);
    }

    #[test]
    fn constant_is_undefined() {
        assert!(moments(&[5.0; 4]).is_none());
        assert!(moments(&[0.1; 7]).is_none());
        assert!(moments(&[3.0]).is_none());
    }
}
