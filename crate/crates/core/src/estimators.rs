//! Finite-sample estimators with the index conventions of the asymptotic
//! results: `X_(ceil(n p))` for the sample quantile, the `(n - 1)` variance,
//! `1/n` absolute deviations and the two-point median.

use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};

/// A finite, nonempty sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("sample is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "sample entry {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl TryFrom<&[f64]> for Sample {
    type Error = Error;
    fn try_from(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }
}

/// Dispersion measure paired with a quantile estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispersionKind {
    Variance,
    Mad,
    MedianAd,
    /// `(1/n) sum |X_i - mean|^r`, `r >= 1`.
    AbsCentralMoment(u32),
}

impl DispersionKind {
    pub fn label(&self) -> String {
        match self {
            DispersionKind::Variance => "variance".into(),
            DispersionKind::Mad => "mad".into(),
            DispersionKind::MedianAd => "medianad".into(),
            DispersionKind::AbsCentralMoment(r) => format!("absmoment{r}"),
        }
    }

    /// Parses `variance`, `mad`, `medianad` or `absmoment<r>`.
    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "variance" | "var" => Ok(DispersionKind::Variance),
            "mad" => Ok(DispersionKind::Mad),
            "medianad" | "median_ad" => Ok(DispersionKind::MedianAd),
            other => {
                let r = other
                    .strip_prefix("absmoment")
                    .and_then(|r| r.parse::<u32>().ok())
                    .ok_or_else(|| Error::domain(format!("unknown dispersion measure '{s}'")))?;
                if r == 0 {
                    return Err(Error::domain("absolute central moment order must be >= 1"));
                }
                Ok(DispersionKind::AbsCentralMoment(r))
            }
        }
    }

    /// Evaluates the estimator on `s`.
    pub fn estimate(&self, s: &Sample) -> Result<f64> {
        match *self {
            DispersionKind::Variance => sample_variance(s),
            DispersionKind::Mad => Ok(sample_mad(s)),
            DispersionKind::MedianAd => Ok(sample_median_ad(s)),
            DispersionKind::AbsCentralMoment(r) => abs_central_moment(s, r),
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn median_of_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    // 1-based indices floor((n+1)/2) and floor((n+2)/2).
    let i = n.div_ceil(2);
    let j = (n + 2) / 2;
    0.5 * (v[i - 1] + v[j - 1])
}

/// `X_(ceil(n p))`, the 1-based order statistic.
pub fn sample_quantile(s: &Sample, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("probability must lie in (0, 1), got {p}")));
    }
    let n = s.len();
    let k = ((n as f64) * p).ceil().clamp(1.0, n as f64) as usize;
    let v = sorted(s.values());
    Ok(v[k - 1])
}

/// Unbiased variance with denominator `n - 1`.
pub fn sample_variance(s: &Sample) -> Result<f64> {
    let n = s.len();
    if n < 2 {
        return Err(Error::domain("sample variance needs at least two observations"));
    }
    let m = s.mean();
    let ss: f64 = s.values().iter().map(|x| (x - m) * (x - m)).sum();
    Ok(ss / (n - 1) as f64)
}

/// Mean absolute deviation about the sample mean, denominator `n`.
pub fn sample_mad(s: &Sample) -> f64 {
    let m = s.mean();
    s.values().iter().map(|x| (x - m).abs()).sum::<f64>() / s.len() as f64
}

pub fn sample_median(s: &Sample) -> f64 {
    median_of_sorted(&sorted(s.values()))
}

/// Median of `|X_i - median|`.
pub fn sample_median_ad(s: &Sample) -> f64 {
    let med = sample_median(s);
    let w: Vec<f64> = s.values().iter().map(|x| (x - med).abs()).collect();
    median_of_sorted(&sorted(&w))
}

/// `(1/n) sum |X_i - mean|^r`.
pub fn abs_central_moment(s: &Sample, r: u32) -> Result<f64> {
    if r == 0 {
        return Err(Error::domain("absolute central moment order must be >= 1"));
    }
    if r == 1 {
        return Ok(sample_mad(s));
    }
    let m = s.mean();
    let n = s.len() as f64;
    let total: f64 = if r == 2 {
        s.values().iter().map(|x| (x - m) * (x - m)).sum()
    } else {
        s.values().iter().map(|x| (x - m).abs().powi(r as i32)).sum()
    };
    Ok(total / n)
}

/// `mean + sd * q_Y(p)`, with the true location when `mean_known`.
pub fn loc_scale_quantile(s: &Sample, p: f64, dist: &Distribution, mean_known: bool) -> Result<f64> {
    let q_y = dist.quantile_y(p)?;
    let sd = sample_variance(s)?.sqrt();
    let centre = if mean_known { dist.mean()? } else { s.mean() };
    Ok(centre + sd * q_y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Sample {
        Sample::try_from(v).unwrap()
    }

    #[test]
    fn quantile_convention() {
        assert_eq!(sample_quantile(&s(&[3.0, 1.0, 2.0]), 0.5).unwrap(), 2.0);
        assert_eq!(sample_quantile(&s(&[1.0, 2.0, 3.0, 4.0]), 0.25).unwrap(), 1.0);
        assert_eq!(sample_quantile(&s(&[3.0, 1.0, 2.0]), 0.95).unwrap(), 3.0);
        assert!(sample_quantile(&s(&[1.0]), 1.0).is_err());
    }

    #[test]
    fn variance_and_mad() {
        assert_eq!(sample_variance(&s(&[1.0, 2.0, 3.0])).unwrap(), 1.0);
        assert_eq!(sample_variance(&s(&[5.0, 5.0, 5.0])).unwrap(), 0.0);
        assert_eq!(sample_variance(&s(&[0.0, 4.0])).unwrap(), 8.0);
        assert!(sample_variance(&s(&[1.0])).is_err());
        assert!((sample_mad(&s(&[1.0, 2.0, 3.0])) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(sample_mad(&s(&[4.0, 4.0])), 0.0);
        assert_eq!(sample_mad(&s(&[0.0, 4.0])), 2.0);
    }

    #[test]
    fn medians() {
        assert_eq!(sample_median(&s(&[1.0, 2.0, 3.0])), 2.0);
        assert_eq!(sample_median(&s(&[1.0, 2.0, 3.0, 4.0])), 2.5);
        assert_eq!(sample_median(&s(&[7.0])), 7.0);
        assert_eq!(sample_median_ad(&s(&[1.0, 2.0, 3.0])), 1.0);
        assert_eq!(sample_median_ad(&s(&[2.0, 2.0, 2.0])), 0.0);
        assert_eq!(sample_median_ad(&s(&[0.0, 0.0, 0.0, 10.0])), 0.0);
        assert_eq!(sample_median_ad(&s(&[-3.5])), 0.0);
    }

    #[test]
    fn abs_moments() {
        let x = s(&[1.0, 2.0, 3.0]);
        assert!((abs_central_moment(&x, 2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(abs_central_moment(&x, 1).unwrap(), sample_mad(&x));
        assert_eq!(abs_central_moment(&s(&[0.0, 4.0]), 3).unwrap(), 8.0);
        assert!(abs_central_moment(&x, 0).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
        assert!(Sample::new(vec![f64::INFINITY]).is_err());
        assert!(Sample::new(vec![]).is_err());
    }

    #[test]
    fn loc_scale() {
        let g = Distribution::standard_gaussian();
        let x = s(&[-1.0, 1.0]);
        let q = loc_scale_quantile(&x, 0.95, &g, true).unwrap();
        assert!((q - 2.0f64.sqrt() * 1.644_853_626_951_472_2).abs() < 1e-12);
        assert_eq!(loc_scale_quantile(&x, 0.5, &g, false).unwrap(), 0.0);
        let g3 = Distribution::gaussian(3.0, 2.0).unwrap();
        assert_eq!(loc_scale_quantile(&s(&[0.0, 9.0, 2.0]), 0.5, &g3, true).unwrap(), 3.0);
    }

    #[test]
    fn dispersion_parse() {
        assert_eq!(DispersionKind::parse("MAD").unwrap(), DispersionKind::Mad);
        assert_eq!(DispersionKind::parse("absmoment3").unwrap(), DispersionKind::AbsCentralMoment(3));
        assert!(DispersionKind::parse("absmoment0").is_err());
        assert!(DispersionKind::parse("iqr").is_err());
    }
}
