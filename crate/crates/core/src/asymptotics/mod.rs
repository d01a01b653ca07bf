//! Closed-form joint asymptotics of a quantile estimator and a dispersion
//! estimator.
//!
//! Every matrix refers to the `sqrt(n)`-scaled limit. Transforms `h1`, `h2`
//! enter only through their derivatives at the limit point (delta method), so
//! the correlation of the transformed pair is `sign(h1' h2')` times the
//! correlation of the untransformed pair.

mod conditions;
mod historical;
mod locscale;
mod vector;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::distributions::{Distribution, GammaConvention};
use crate::error::{Error, Result};
use crate::estimators::DispersionKind;

pub use conditions::{validate_conditions, ConditionCheck, ConditionReport, ConditionStatus};
pub use historical::{
    asymptotic_hist_abs_moment, asymptotic_hist_dispersion, asymptotic_hist_medianad,
    asymptotic_hist_medianad_with, tau, Eta, TauSpec,
};
pub use locscale::{
    asymptotic_locscale_dispersion, asymptotic_locscale_medianad, asymptotic_locscale_medianad_with,
};
pub use vector::{delta_method, vector_asymptotics};

/// Quantile estimator of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuantileKind {
    /// Order statistic `X_(ceil(n p))`.
    SampleQuantile,
    /// `mean_n + sd_n q_Y(p)`.
    LocScaleUnknownMean,
    /// `mu + sd_n q_Y(p)` with the true mean.
    LocScaleKnownMean,
}

impl QuantileKind {
    pub fn label(&self) -> &'static str {
        match self {
            QuantileKind::SampleQuantile => "sample",
            QuantileKind::LocScaleUnknownMean => "locscale",
            QuantileKind::LocScaleKnownMean => "locscale-known",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sample" => Ok(QuantileKind::SampleQuantile),
            "locscale" | "locscale-unknown" => Ok(QuantileKind::LocScaleUnknownMean),
            "locscale-known" => Ok(QuantileKind::LocScaleKnownMean),
            other => Err(Error::domain(format!("unknown quantile estimator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformPreset {
    Identity,
    Negate,
    Log,
    Square,
    Custom,
}

/// A transform known through its value and derivative at the limit point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    /// `h` at the limit point, when known; the formulas never read it.
    pub value_at: Option<f64>,
    pub derivative_at: f64,
    pub preset: TransformPreset,
}

impl Default for TransformSpec {
    fn default() -> Self {
        Self::identity()
    }
}

impl TransformSpec {
    pub fn identity() -> Self {
        Self {
            value_at: None,
            derivative_at: 1.0,
            preset: TransformPreset::Identity,
        }
    }

    pub fn negate() -> Self {
        Self {
            value_at: None,
            derivative_at: -1.0,
            preset: TransformPreset::Negate,
        }
    }

    /// `ln` at `at > 0`.
    pub fn log(at: f64) -> Result<Self> {
        if !(at > 0.0 && at.is_finite()) {
            return Err(Error::domain(format!("log transform needs a positive point, got {at}")));
        }
        Ok(Self {
            value_at: Some(at.ln()),
            derivative_at: 1.0 / at,
            preset: TransformPreset::Log,
        })
    }

    pub fn square(at: f64) -> Result<Self> {
        if !at.is_finite() {
            return Err(Error::domain(format!("square transform needs a finite point, got {at}")));
        }
        Ok(Self {
            value_at: Some(at * at),
            derivative_at: 2.0 * at,
            preset: TransformPreset::Square,
        })
    }

    pub fn custom(value_at: Option<f64>, derivative_at: f64) -> Result<Self> {
        if !derivative_at.is_finite() {
            return Err(Error::domain(format!(
                "transform derivative must be finite, got {derivative_at}"
            )));
        }
        Ok(Self {
            value_at,
            derivative_at,
            preset: TransformPreset::Custom,
        })
    }

    /// Builds a preset at the given limit point.
    pub fn preset(preset: TransformPreset, at: f64) -> Result<Self> {
        match preset {
            TransformPreset::Identity => Ok(Self { value_at: Some(at), ..Self::identity() }),
            TransformPreset::Negate => Ok(Self { value_at: Some(-at), ..Self::negate() }),
            TransformPreset::Log => Self::log(at),
            TransformPreset::Square => Self::square(at),
            TransformPreset::Custom => Err(Error::domain(
                "custom transforms need an explicit derivative",
            )),
        }
    }

    fn checked(&self) -> Result<f64> {
        if self.derivative_at.is_finite() {
            Ok(self.derivative_at)
        } else {
            Err(Error::domain(format!(
                "transform derivative must be finite, got {}",
                self.derivative_at
            )))
        }
    }
}

/// Which estimator pair to analyse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorPairSpec {
    pub quantile_kind: QuantileKind,
    pub p: f64,
    pub dispersion: DispersionKind,
    pub h1: TransformSpec,
    pub h2: TransformSpec,
}

impl EstimatorPairSpec {
    /// Pair with identity transforms.
    pub fn new(quantile_kind: QuantileKind, p: f64, dispersion: DispersionKind) -> Result<Self> {
        check_p(p)?;
        Ok(Self {
            quantile_kind,
            p,
            dispersion,
            h1: TransformSpec::identity(),
            h2: TransformSpec::identity(),
        })
    }

    pub fn with_transforms(mut self, h1: TransformSpec, h2: TransformSpec) -> Self {
        self.h1 = h1;
        self.h2 = h2;
        self
    }
}

/// Which closed form produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// Sample quantile with variance (`r = 2`) or MAD (`r = 1`).
    HistoricalDispersion { r: u32 },
    /// Sample quantile with the r-th absolute central moment.
    HistoricalAbsMoment { r: u32 },
    HistoricalMedianAd,
    LocScaleDispersion { r: u32, mean_known: bool },
    LocScaleMedianAd { mean_known: bool },
}

impl Provenance {
    /// The closed form [`asymptotic`] uses for a pairing.
    pub fn for_pair(kind: QuantileKind, dispersion: DispersionKind) -> Self {
        let r = match dispersion {
            DispersionKind::Variance => Some(2),
            DispersionKind::Mad => Some(1),
            DispersionKind::AbsCentralMoment(r) => Some(r),
            DispersionKind::MedianAd => None,
        };
        let mean_known = kind == QuantileKind::LocScaleKnownMean;
        match (kind, dispersion, r) {
            (QuantileKind::SampleQuantile, DispersionKind::AbsCentralMoment(r), _) => {
                Provenance::HistoricalAbsMoment { r }
            }
            (QuantileKind::SampleQuantile, _, Some(r)) => Provenance::HistoricalDispersion { r },
            (QuantileKind::SampleQuantile, _, None) => Provenance::HistoricalMedianAd,
            (_, _, Some(r)) => Provenance::LocScaleDispersion { r, mean_known },
            (_, _, None) => Provenance::LocScaleMedianAd { mean_known },
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::HistoricalDispersion { .. } => "hist-dispersion",
            Provenance::HistoricalAbsMoment { .. } => "hist-absmoment",
            Provenance::HistoricalMedianAd => "hist-medianad",
            Provenance::LocScaleDispersion { mean_known: false, .. } => "locscale-dispersion",
            Provenance::LocScaleDispersion { mean_known: true, .. } => "locscale-known-dispersion",
            Provenance::LocScaleMedianAd { mean_known: false } => "locscale-medianad",
            Provenance::LocScaleMedianAd { mean_known: true } => "locscale-known-medianad",
        }
    }
}

/// Limit covariance of `sqrt(n) (h1(q_hat) - h1(q), h2(D_hat) - h2(D))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticResult {
    pub cov: [[f64; 2]; 2],
    pub corr: f64,
    /// `sign(h1' h2')`, zero when either derivative vanishes.
    pub sign_factor: i8,
    pub theorem: Provenance,
    /// Sample-size multipliers `(v, w)`; `(1, 1)` unless rescaled.
    pub sample_sizes: (u32, u32),
}

impl AsymptoticResult {
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.cov[0][0], self.cov[0][1], self.cov[1][0], self.cov[1][1])
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("probability must lie in (0, 1), got {p}")))
    }
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Applies the transforms to an untransformed limit covariance.
pub(crate) fn assemble(
    s11: f64,
    s12: f64,
    s22: f64,
    h1: &TransformSpec,
    h2: &TransformSpec,
    theorem: Provenance,
) -> Result<AsymptoticResult> {
    let d1 = h1.checked()?;
    let d2 = h2.checked()?;
    if ![s11, s12, s22].iter().all(|v| v.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite covariance entries ({s11}, {s12}, {s22}) from {}",
            theorem.tag()
        )));
    }
    let base = if s12 == 0.0 {
        0.0
    } else if s11 > 0.0 && s22 > 0.0 {
        s12 / (s11 * s22).sqrt()
    } else {
        return Err(Error::ConditionViolated {
            label: "degenerate".into(),
            detail: format!("limit variances ({s11}, {s22}) are not both positive"),
        });
    };
    let sign = sign_of(d1 * d2);
    let cov = [[d1 * d1 * s11, d1 * d2 * s12], [d1 * d2 * s12, d2 * d2 * s22]];
    Ok(AsymptoticResult {
        cov,
        corr: (f64::from(sign) * base).clamp(-1.0, 1.0),
        sign_factor: sign,
        theorem,
        sample_sizes: (1, 1),
    })
}

/// Evaluates the closed form matching `spec`.
pub fn asymptotic(dist: &Distribution, spec: &EstimatorPairSpec) -> Result<AsymptoticResult> {
    asymptotic_with(dist, spec, GammaConvention::default())
}

/// As [`asymptotic`], choosing the MedianAD variance convention.
pub fn asymptotic_with(
    dist: &Distribution,
    spec: &EstimatorPairSpec,
    convention: GammaConvention,
) -> Result<AsymptoticResult> {
    let (p, h1, h2) = (spec.p, &spec.h1, &spec.h2);
    match (spec.quantile_kind, spec.dispersion) {
        (QuantileKind::SampleQuantile, DispersionKind::Variance) => asymptotic_hist_dispersion(dist, p, 2, h1, h2),
        (QuantileKind::SampleQuantile, DispersionKind::Mad) => asymptotic_hist_dispersion(dist, p, 1, h1, h2),
        (QuantileKind::SampleQuantile, DispersionKind::MedianAd) => {
            asymptotic_hist_medianad_with(dist, p, h1, h2, convention)
        }
        (QuantileKind::SampleQuantile, DispersionKind::AbsCentralMoment(r)) => {
            asymptotic_hist_abs_moment(dist, p, r, h1, h2)
        }
        (kind, dispersion) => {
            let mean_known = kind == QuantileKind::LocScaleKnownMean;
            match dispersion {
                DispersionKind::Variance => asymptotic_locscale_dispersion(dist, p, 2, mean_known, h1, h2),
                DispersionKind::Mad => asymptotic_locscale_dispersion(dist, p, 1, mean_known, h1, h2),
                DispersionKind::AbsCentralMoment(r) => {
                    asymptotic_locscale_dispersion(dist, p, r, mean_known, h1, h2)
                }
                DispersionKind::MedianAd => {
                    asymptotic_locscale_medianad_with(dist, p, mean_known, h1, h2, convention)
                }
            }
        }
    }
}

/// Rescales a result to sample sizes `v n` (quantile) and `w n` (dispersion)
/// drawn from nested samples: variances scale by `1/v`, `1/w`, the
/// covariance by `1/max(v, w)`, hence the correlation by `sqrt(min/max)`.
pub fn scale_for_sample_sizes(base: &AsymptoticResult, v: u32, w: u32) -> Result<AsymptoticResult> {
    if v == 0 || w == 0 {
        return Err(Error::domain(format!("sample-size multipliers must be positive, got ({v}, {w})")));
    }
    let (vf, wf) = (f64::from(v), f64::from(w));
    let m = vf.max(wf);
    let mut out = *base;
    out.cov[0][0] = base.cov[0][0] / vf;
    out.cov[1][1] = base.cov[1][1] / wf;
    out.cov[0][1] = base.cov[0][1] / m;
    out.cov[1][0] = base.cov[1][0] / m;
    out.corr = base.corr * (vf.min(wf) / m).sqrt();
    out.sample_sizes = (base.sample_sizes.0 * v, base.sample_sizes.1 * w);
    Ok(out)
}

/// Population value targeted by a dispersion estimator.
pub fn dispersion_limit(dist: &Distribution, kind: DispersionKind) -> Result<f64> {
    match kind {
        DispersionKind::Variance => Ok(dist.std_dev()?.powi(2)),
        DispersionKind::Mad => Ok(dist.std_dev()? * dist.standardized_abs_moment(1)?),
        DispersionKind::MedianAd => Ok(dist.summary()?.xi),
        DispersionKind::AbsCentralMoment(r) => {
            Ok(dist.std_dev()?.powi(r as i32) * dist.standardized_abs_moment(r)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> AsymptoticResult {
        assemble(2.0, 0.6, 1.5, &TransformSpec::identity(), &TransformSpec::identity(),
            Provenance::HistoricalMedianAd).unwrap()
    }

    #[test]
    fn scaling_identity_and_halving() {
        let b = base();
        assert_eq!(scale_for_sample_sizes(&b, 1, 1).unwrap(), b);
        let s = scale_for_sample_sizes(&b, 1, 4).unwrap();
        assert!((s.corr - 0.5 * b.corr).abs() < 1e-15);
        let s = scale_for_sample_sizes(&b, 2, 3).unwrap();
        assert!((s.cov[0][1] - b.cov[0][1] / 3.0).abs() < 1e-15);
        assert!(scale_for_sample_sizes(&b, 0, 1).is_err());
    }

    #[test]
    fn sign_factor_from_derivatives() {
        let r = assemble(1.0, 0.5, 1.0, &TransformSpec::identity(), &TransformSpec::negate(),
            Provenance::HistoricalMedianAd).unwrap();
        assert_eq!(r.sign_factor, -1);
        assert_eq!(r.corr, -0.5);
        let z = TransformSpec::custom(None, 0.0).unwrap();
        let r = assemble(1.0, 0.5, 1.0, &z, &TransformSpec::identity(), Provenance::HistoricalMedianAd).unwrap();
        assert_eq!(r.sign_factor, 0);
        assert_eq!(r.corr, 0.0);
    }

    #[test]
    fn transform_constructors() {
        assert!(TransformSpec::log(0.0).is_err());
        assert!(TransformSpec::custom(None, f64::INFINITY).is_err());
        let l = TransformSpec::log(2.0).unwrap();
        assert_eq!(l.derivative_at, 0.5);
        let s = TransformSpec::square(-3.0).unwrap();
        assert_eq!(s.derivative_at, -6.0);
        assert_eq!(TransformSpec::identity().derivative_at, 1.0);
    }

    #[test]
    fn quantile_kind_labels_round_trip() {
        for k in [QuantileKind::SampleQuantile, QuantileKind::LocScaleUnknownMean, QuantileKind::LocScaleKnownMean] {
            assert_eq!(QuantileKind::parse(k.label()).unwrap(), k);
        }
    }

    #[test]
    fn for_pair_matches_dispatch() {
        let g = Distribution::standard_gaussian();
        for k in [QuantileKind::SampleQuantile, QuantileKind::LocScaleUnknownMean, QuantileKind::LocScaleKnownMean] {
            for d in [
                DispersionKind::Variance,
                DispersionKind::Mad,
                DispersionKind::MedianAd,
                DispersionKind::AbsCentralMoment(3),
            ] {
                let spec = EstimatorPairSpec::new(k, 0.8, d).unwrap();
                assert_eq!(asymptotic(&g, &spec).unwrap().theorem, Provenance::for_pair(k, d));
            }
        }
    }
}
