//! Per-channel feature catalog and extraction.
//!
//! Every feature is a total function of a channel: anything undefined (short
//! input, zero variance, missing observations, non-finite intermediate
//! results) comes back as `None`.

pub mod decompose;
pub mod entropy;
pub mod moments;
pub mod stats;
pub mod structural;
pub mod unitroot;

use std::cell::OnceCell;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::Channel;
use crate::error::{Error, Result};
use decompose::Decomposition;

/// A feature value: finite real or NA.
pub type FeatureValue = Option<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueRange {
    AllReals,
    NonNegReals,
    UnitInterval,
    NonNegInteger,
}

impl ValueRange {
    pub fn contains(self, v: f64) -> bool {
        match self {
            ValueRange::AllReals => v.is_finite(),
            ValueRange::NonNegReals => v >= 0.0,
            ValueRange::UnitInterval => (0.0..=1.0).contains(&v),
            ValueRange::NonNegInteger => v >= 0.0 && v.fract() == 0.0,
        }
    }

    fn label(self) -> &'static str {
        match self {
            ValueRange::AllReals => "real",
            ValueRange::NonNegReals => "[0, inf)",
            ValueRange::UnitInterval => "[0, 1]",
            ValueRange::NonNegInteger => "{0, 1, 2, ...}",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// Part of the core published feature set.
    Core,
    /// Added to complete the 41-feature catalog.
    Completion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureDescriptor {
    pub name: &'static str,
    pub range: ValueRange,
    pub requires_min_length: usize,
    pub provenance: Provenance,
    pub formula: &'static str,
}

macro_rules! features {
    ($( $variant:ident => $name:literal, $range:ident, $min:literal, $prov:ident, $formula:literal; )*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Feature { $( $variant, )* }

        impl Feature {
            pub const ALL: &'static [Feature] = &[ $( Feature::$variant, )* ];

            pub fn descriptor(self) -> FeatureDescriptor {
                match self {
                    $( Feature::$variant => FeatureDescriptor {
                        name: $name,
                        range: ValueRange::$range,
                        requires_min_length: $min,
                        provenance: Provenance::$prov,
                        formula: $formula,
                    }, )*
                }
            }
        }
    };
}

features! {
    Length => "length", NonNegInteger, 1, Core,
        "number of observations n";
    Nperiods => "nperiods", NonNegInteger, 1, Core,
        "number of seasonal periods; always 0 (series are treated as non-seasonal)";
    SeasonalPeriods => "seasonal_periods", NonNegInteger, 1, Core,
        "seasonal period length; always 1 (series are treated as non-seasonal)";
    Trend => "trend", UnitInterval, 7, Core,
        "max(0, 1 - Var(remainder)/Var(x)) from a tricube local-linear trend (window max(7, ceil(0.1 n)))";
    Spike => "spike", NonNegReals, 7, Core,
        "variance of the leave-one-out variances of the remainder";
    Linearity => "linearity", AllReals, 7, Core,
        "coefficient of the degree-1 orthonormal polynomial in a regression of the trend on t = 1..n";
    Curvature => "curvature", AllReals, 7, Core,
        "coefficient of the degree-2 orthonormal polynomial in a regression of the trend on t = 1..n";
    EAcf1 => "e_acf1", AllReals, 7, Core,
        "lag-1 autocorrelation of the remainder";
    XAcf1 => "x_acf1", AllReals, 2, Core,
        "r_1 = sum_{t<=n-1} (x_t - m)(x_{t+1} - m) / sum (x_t - m)^2";
    XAcf10 => "x_acf10", NonNegReals, 11, Core,
        "sum_{k=1..10} r_k^2";
    Diff1Acf1 => "diff1_acf1", AllReals, 3, Completion,
        "r_1 of the first difference";
    Diff1Acf10 => "diff1_acf10", NonNegReals, 12, Completion,
        "sum of squared r_1..r_10 of the first difference";
    Diff2Acf1 => "diff2_acf1", AllReals, 4, Completion,
        "r_1 of the second difference";
    Diff2Acf10 => "diff2_acf10", NonNegReals, 13, Completion,
        "sum of squared r_1..r_10 of the second difference";
    XPacf5 => "x_pacf5", NonNegReals, 6, Completion,
        "sum of squared partial autocorrelations at lags 1..5 (Durbin-Levinson)";
    Diff1Pacf5 => "diff1_pacf5", NonNegReals, 7, Completion,
        "x_pacf5 of the first difference";
    Diff2Pacf5 => "diff2_pacf5", NonNegReals, 8, Completion,
        "x_pacf5 of the second difference";
    Kurtosis => "kurtosis", NonNegReals, 2, Core,
        "m4 / m2^2 with central moments m_k = (1/n) sum (x - m)^k";
    Skewness => "skewness", AllReals, 2, Core,
        "m3 / m2^1.5";
    ShannonEntropyCs => "shannon_entropy_cs", NonNegReals, 2, Core,
        "Chao-Shen coverage-adjusted Shannon entropy (nats) of a ceil(sqrt(n))-bin equal-width histogram";
    ShannonEntropySg => "shannon_entropy_sg", NonNegReals, 2, Core,
        "Schurmann-Grassberger (Dirichlet prior 1/K) Shannon entropy of the same histogram";
    SpectralEntropy => "spectral_entropy", UnitInterval, 4, Core,
        "Shannon entropy of the normalized periodogram at frequencies 1..floor(n/2), divided by log(floor(n/2))";
    ApproxEntropy => "approx_entropy", NonNegReals, 4, Core,
        "ApEn(m = 2, r = 0.2 sd), self-matches included; small negative estimates are floored at 0";
    Entropy => "entropy", NonNegReals, 4, Core,
        "sample entropy SampEn(m = 2, r = 0.2 sd)";
    SampleEntropy => "sample_entropy", NonNegReals, 4, Completion,
        "SampEn(m = 2, r = 0.2 sd) = -ln(A/B) over the first n - m templates";
    UnitrootKpss => "unitroot_kpss", NonNegReals, 12, Core,
        "KPSS level statistic, Bartlett long-run variance with bandwidth trunc(4 (n/100)^0.25)";
    UnitrootPp => "unitroot_pp", AllReals, 12, Core,
        "Phillips-Perron Z-alpha from y_t = c + a y_{t-1} + u_t, same bandwidth";
    CrossingPoints => "crossing_points", NonNegInteger, 2, Completion,
        "number of crossings of the median";
    FlatSpots => "flat_spots", NonNegInteger, 2, Completion,
        "longest run of consecutive points in the same of 10 equal-width bins";
    Stability => "stability", NonNegReals, 20, Completion,
        "variance of the means of non-overlapping width-10 windows of the z-scored series";
    Lumpiness => "lumpiness", NonNegReals, 20, Completion,
        "variance of the variances of non-overlapping width-10 windows of the z-scored series";
    Nonlinearity => "nonlinearity", NonNegReals, 10, Completion,
        "10/n times the lag-1 Terasvirta statistic (n-1) ln(SSR0/SSR1) on the z-scored series";
    Hurst => "hurst", AllReals, 32, Completion,
        "slope of log mean rescaled range against log window size, windows 8, 16, ... <= n/2";
    MaxLevelShift => "max_level_shift", NonNegReals, 20, Completion,
        "max |mean(w_{i+10}) - mean(w_i)| over width-10 rolling windows of the z-scored series";
    MaxVarShift => "max_var_shift", NonNegReals, 20, Completion,
        "max |var(w_{i+10}) - var(w_i)| over width-10 rolling windows of the z-scored series";
    MaxKlShift => "max_kl_shift", NonNegReals, 20, Completion,
        "max Gaussian KL divergence KL(w_i || w_{i+10}) over width-10 rolling windows of the z-scored series";
    Std1stDer => "std1st_der", NonNegReals, 3, Completion,
        "sample sd of the first difference";
    FirstzeroAc => "firstzero_ac", NonNegInteger, 3, Completion,
        "first lag k >= 1 with r_k <= 0 (n if none)";
    FirstminAc => "firstmin_ac", NonNegInteger, 3, Completion,
        "first lag k >= 1 with r_k < r_{k-1} and r_k < r_{k+1} (n if none)";
    HistogramMode => "histogram_mode", AllReals, 2, Completion,
        "centre of the most populated of 10 equal-width bins of the z-scored series";
    OutlierIncludeMdrmd => "outlier_include_mdrmd", AllReals, 3, Completion,
        "median over thresholds 0, 0.01, ... (while >2% exceed) of median(index of z >= threshold)/(n/2) - 1";
    XAcfLag10 => "x_acf_lag10", AllReals, 11, Completion,
        "single autocorrelation coefficient r_10 (not in the default catalog)";
}

/// Number of features in the default catalog.
pub const DEFAULT_CATALOG_SIZE: usize = 41;

impl Feature {
    pub fn name(self) -> &'static str {
        self.descriptor().name
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.iter().copied().find(|f| f.name() == name)
    }

    /// Features defined even when the channel has interior missing values.
    fn tolerates_missing(self) -> bool {
        matches!(self, Feature::Length | Feature::Nperiods | Feature::SeasonalPeriods)
    }
}

/// Ordered selection of features computed for every channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureCatalog {
    features: Vec<Feature>,
}

impl Default for FeatureCatalog {
    fn default() -> Self {
        FeatureCatalog {
            features: Feature::ALL
                .iter()
                .copied()
                .filter(|f| *f != Feature::XAcfLag10)
                .collect(),
        }
    }
}

impl FeatureCatalog {
    pub fn new(features: Vec<Feature>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Config("feature catalog is empty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for f in &features {
            if !seen.insert(*f) {
                return Err(Error::Config(format!("feature {} listed twice", f.name())));
            }
        }
        Ok(FeatureCatalog { features })
    }

    /// Parses `all` or a comma-separated list of feature names.
    pub fn parse(list: &str) -> Result<Self> {
        let list = list.trim();
        if list.eq_ignore_ascii_case("all") {
            return Ok(FeatureCatalog::default());
        }
        let features = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| Feature::from_name(name).ok_or_else(|| Error::Config(format!("unknown feature {name:?}"))))
            .collect::<Result<Vec<_>>>()?;
        FeatureCatalog::new(features)
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        FeatureCatalog::parse(&names.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(","))
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.features.iter().map(|f| f.name()).collect()
    }

    pub fn descriptors(&self) -> Vec<FeatureDescriptor> {
        self.features.iter().map(|f| f.descriptor()).collect()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name() == name)
    }

    /// Hex SHA-256 of the comma-joined feature names.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.names().join(",").as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Markdown table documenting every selected feature.
    pub fn reference_markdown(&self) -> String {
        let mut out = String::from(
            "# Feature catalog\n\n| # | name | formula | range | min length | provenance |\n|---|---|---|---|---|---|\n",
        );
        for (i, d) in self.descriptors().iter().enumerate() {
            let prov = match d.provenance {
                Provenance::Core => "core",
                Provenance::Completion => "completion",
            };
            let _ = writeln!(
                out,
                "| {} | `{}` | {} | {} | {} | {} |",
                i + 1,
                d.name,
                d.formula,
                d.range.label(),
                d.requires_min_length,
                prov
            );
        }
        out
    }
}

/// Lazily computed intermediate results shared by several features.
struct SeriesContext<'a> {
    x: &'a [f64],
    decomposition: OnceCell<Option<Decomposition>>,
    diff1: OnceCell<Vec<f64>>,
    diff2: OnceCell<Vec<f64>>,
    acf_full: OnceCell<Option<Vec<f64>>>,
    moments: OnceCell<Option<moments::Moments>>,
    histogram: OnceCell<Vec<usize>>,
    sample_entropy: OnceCell<Option<f64>>,
}

impl<'a> SeriesContext<'a> {
    fn new(x: &'a [f64]) -> Self {
        SeriesContext {
            x,
            decomposition: OnceCell::new(),
            diff1: OnceCell::new(),
            diff2: OnceCell::new(),
            acf_full: OnceCell::new(),
            moments: OnceCell::new(),
            histogram: OnceCell::new(),
            sample_entropy: OnceCell::new(),
        }
    }

    fn decomposition(&self) -> Option<&Decomposition> {
        self.decomposition.get_or_init(|| decompose::decompose(self.x)).as_ref()
    }

    fn diff1(&self) -> &[f64] {
        self.diff1.get_or_init(|| stats::diff(self.x))
    }

    fn diff2(&self) -> &[f64] {
        self.diff2.get_or_init(|| stats::diff(self.diff1()))
    }

    fn acf_full(&self) -> Option<&[f64]> {
        self.acf_full.get_or_init(|| stats::acf_full(self.x)).as_deref()
    }

    fn moments(&self) -> Option<moments::Moments> {
        *self.moments.get_or_init(|| moments::moments(self.x))
    }

    fn histogram(&self) -> &[usize] {
        self.histogram.get_or_init(|| entropy::histogram_counts(self.x))
    }

    fn sample_entropy(&self) -> Option<f64> {
        *self.sample_entropy.get_or_init(|| {
            let r = entropy::default_tolerance(self.x)?;
            entropy::sample_entropy(self.x, entropy::EMBED_DIM, r)
        })
    }

    fn compute(&self, feature: Feature) -> Option<f64> {
        let x = self.x;
        let acf1 = |s: &[f64]| stats::acf(s, 1).map(|r| r[0]);
        let acf10 = |s: &[f64]| stats::acf(s, 10).map(|r| r.iter().map(|v| v * v).sum());
        let pacf5 = |s: &[f64]| stats::pacf(s, 5).map(|p| p.iter().map(|v| v * v).sum());
        match feature {
            Feature::Length => Some(x.len() as f64),
            Feature::Nperiods => Some(0.0),
            Feature::SeasonalPeriods => Some(1.0),
            Feature::Trend => decompose::trend_strength(x, self.decomposition()?),
            Feature::Spike => decompose::spike(self.decomposition()?),
            Feature::Linearity => decompose::linearity_curvature(self.decomposition()?).map(|p| p.0),
            Feature::Curvature => decompose::linearity_curvature(self.decomposition()?).map(|p| p.1),
            Feature::EAcf1 => acf1(&self.decomposition()?.remainder),
            Feature::XAcf1 => acf1(x),
            Feature::XAcf10 => acf10(x),
            Feature::Diff1Acf1 => acf1(self.diff1()),
            Feature::Diff1Acf10 => acf10(self.diff1()),
            Feature::Diff2Acf1 => acf1(self.diff2()),
            Feature::Diff2Acf10 => acf10(self.diff2()),
            Feature::XPacf5 => pacf5(x),
            Feature::Diff1Pacf5 => pacf5(self.diff1()),
            Feature::Diff2Pacf5 => pacf5(self.diff2()),
            Feature::Kurtosis => self.moments().map(|m| m.kurtosis),
            Feature::Skewness => self.moments().map(|m| m.skewness),
            Feature::ShannonEntropyCs => entropy::chao_shen(self.histogram()),
            Feature::ShannonEntropySg => entropy::schurmann_grassberger(self.histogram()),
            Feature::SpectralEntropy => entropy::spectral_entropy(x),
            Feature::ApproxEntropy => {
                let r = entropy::default_tolerance(x)?;
                entropy::approximate_entropy(x, entropy::EMBED_DIM, r).map(|v| v.max(0.0))
            }
            Feature::Entropy | Feature::SampleEntropy => self.sample_entropy(),
            Feature::UnitrootKpss => unitroot::kpss(x),
            Feature::UnitrootPp => unitroot::phillips_perron(x),
            Feature::CrossingPoints => structural::crossing_points(x),
            Feature::FlatSpots => structural::flat_spots(x),
            Feature::Stability => structural::stability(x),
            Feature::Lumpiness => structural::lumpiness(x),
            Feature::Nonlinearity => structural::nonlinearity(x),
            Feature::Hurst => structural::hurst(x),
            Feature::MaxLevelShift => structural::max_level_shift(x),
            Feature::MaxVarShift => structural::max_var_shift(x),
            Feature::MaxKlShift => structural::max_kl_shift(x),
            Feature::Std1stDer => structural::std1st_der(x),
            Feature::FirstzeroAc => self.acf_full().map(structural::firstzero_ac),
            Feature::FirstminAc => self.acf_full().map(structural::firstmin_ac),
            Feature::HistogramMode => structural::histogram_mode(x),
            Feature::OutlierIncludeMdrmd => structural::outlier_include_mdrmd(x),
            Feature::XAcfLag10 => stats::acf(x, 10).map(|r| r[9]),
        }
    }
}

/// Computes every catalog feature for one channel, in catalog order.
pub fn extract_features(channel: &Channel, catalog: &FeatureCatalog) -> Vec<FeatureValue> {
    let x = channel.values();
    let missing = channel.has_missing();
    let ctx = SeriesContext::new(x);
    catalog
        .features()
        .iter()
        .map(|&f| {
            let d = f.descriptor();
            if x.len() < d.requires_min_length || (missing && !f.tolerates_missing()) {
                return None;
            }
            ctx.compute(f).filter(|v| v.is_finite())
        })
        .collect()
}

/// Convenience wrapper pairing each value with its feature name.
pub fn extract_named(channel: &Channel, catalog: &FeatureCatalog) -> Vec<(&'static str, FeatureValue)> {
    catalog
        .names()
        .into_iter()
        .zip(extract_features(channel, catalog))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(x: &[f64], f: Feature) -> FeatureValue {
        let cat = FeatureCatalog::new(vec![f]).unwrap();
        extract_features(&Channel::new(x.to_vec()), &cat)[0]
    }

    #[test]
    fn default_catalog_has_41_unique_features() {
        let cat = FeatureCatalog::default();
        assert_eq!(cat.len(), DEFAULT_CATALOG_SIZE);
        let names: std::collections::HashSet<_> = cat.names().into_iter().collect();
        assert_eq!(names.len(), DEFAULT_CATALOG_SIZE);
        let core = cat
            .descriptors()
            .iter()
            .filter(|d| d.provenance == Provenance::Core)
            .count();
        assert_eq!(core, 19);
    }

    #[test]
    fn core_features_present() {
        let cat = FeatureCatalog::default();
        for name in [
            "curvature",
            "kurtosis",
            "linearity",
            "shannon_entropy_cs",
            "skewness",
            "trend",
            "shannon_entropy_sg",
            "spectral_entropy",
            "unitroot_kpss",
            "unitroot_pp",
            "x_acf1",
            "entropy",
            "e_acf1",
            "spike",
            "nperiods",
            "seasonal_periods",
            "length",
            "approx_entropy",
            "x_acf10",
        ] {
            let i = cat.index_of(name).unwrap_or_else(|| panic!("{name} missing"));
            assert_eq!(cat.descriptors()[i].provenance, Provenance::Core);
        }
    }

    #[test]
    fn parse_selection() {
        let cat = FeatureCatalog::parse("trend, x_acf1").unwrap();
        assert_eq!(cat.names(), vec!["trend", "x_acf1"]);
        assert!(FeatureCatalog::parse("trend,bogus").is_err());
        assert!(FeatureCatalog::parse("trend,trend").is_err());
        assert_eq!(FeatureCatalog::parse("ALL").unwrap().len(), 41);
    }

    #[test]
    fn constant_channel_moments_na() {
        let x = [5.0; 4];
        assert_eq!(value(&x, Feature::Kurtosis), None);
        assert_eq!(value(&x, Feature::Skewness), None);
        assert_eq!(value(&x, Feature::XAcf1), None);
    }

    #[test]
    fn acf10_needs_eleven_points() {
        let x: Vec<f64> = (1..=10).map(|v| (v as f64).sin()).collect();
        assert_eq!(value(&x, Feature::XAcf10), None);
        let x: Vec<f64> = (1..=11).map(|v| (v as f64).sin()).collect();
        assert!(value(&x, Feature::XAcf10).is_some());
    }

    #[test]
    fn acf1_of_ramp() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        // sum of lagged products 57.75 over sum of squares 82.5
        assert!((value(&x, Feature::XAcf1).unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(value(&x, Feature::Length), Some(10.0));
    }

    #[test]
    fn non_seasonal_constants() {
        let x = [0.3, 1.0, -2.0, 4.0, 0.0, 1.0, 2.0];
        assert_eq!(value(&x, Feature::Length), Some(7.0));
        assert_eq!(value(&x, Feature::Nperiods), Some(0.0));
        assert_eq!(value(&x, Feature::SeasonalPeriods), Some(1.0));
    }

    #[test]
    fn interior_missing_yields_na() {
        let ch = Channel::new(vec![1.0, f64::NAN, 3.0, 2.0, 5.0, 1.0, 0.0, 2.0]);
        let out = extract_named(&ch, &FeatureCatalog::default());
        for (name, v) in out {
            match name {
                "length" => assert_eq!(v, Some(8.0)),
                "nperiods" => assert_eq!(v, Some(0.0)),
                "seasonal_periods" => assert_eq!(v, Some(1.0)),
                _ => assert_eq!(v, None, "{name}"),
            }
        }
    }

    #[test]
    fn reference_doc_lists_everything() {
        let doc = FeatureCatalog::default().reference_markdown();
        assert_eq!(
            doc.lines()
                .filter(|l| l.starts_with("| ") && !l.starts_with("| #"))
                .count(),
            41
        );
        assert!(doc.contains("completion"));
    }
}
