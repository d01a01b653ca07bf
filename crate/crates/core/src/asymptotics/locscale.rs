//! Location-scale quantile estimator `mean + sd q_Y(p)` paired with a
//! dispersion estimator. With a known mean only `sd` is estimated.

use super::conditions::{require_continuity, require_positive};
use super::historical::{abs_moment, dispersion_linear, require_medianad_conditions, signed_abs_moment};
use super::{assemble, check_p, AsymptoticResult, Provenance, TransformSpec};
use crate::distributions::{Distribution, GammaConvention};
use crate::error::Result;

/// Linear term of the quantile estimator in Y units:
/// `Y + q (Y^2 - 1)/2`, or `q (Y^2 - 1)/2` with a known mean.
struct QuantileLinear {
    qy: f64,
    e3: f64,
    var: f64,
    mean_known: bool,
}

fn quantile_linear(dist: &Distribution, p: f64, mean_known: bool) -> Result<QuantileLinear> {
    check_p(p)?;
    let e4 = dist.standardized_moment(4)?;
    require_positive("(Q2)", "Var((X - mu)^2)", e4 - 1.0)?;
    let e3 = if dist.is_symmetric() { 0.0 } else { dist.standardized_moment(3)? };
    let qy = dist.quantile_y(p)?;
    let scale_part = qy * qy * (e4 - 1.0) / 4.0;
    let var = if mean_known { scale_part } else { 1.0 + qy * e3 + scale_part };
    Ok(QuantileLinear { qy, e3, var, mean_known })
}

/// Location-scale quantile with the r-th absolute central moment estimator
/// (`r = 2`: variance, `r = 1`: MAD; higher `r` use the same linearization).
pub fn asymptotic_locscale_dispersion(
    dist: &Distribution,
    p: f64,
    r: u32,
    mean_known: bool,
    h1: &TransformSpec,
    h2: &TransformSpec,
) -> Result<AsymptoticResult> {
    let q = quantile_linear(dist, p, mean_known)?;
    let lin = dispersion_linear(dist, r)?;
    if r == 1 {
        require_continuity(dist, "(MD2)", dist.mean()?)?;
    }
    let sd = dist.std_dev()?;
    let rf = f64::from(r);
    let with_mean = if q.mean_known {
        0.0
    } else {
        signed_abs_moment(dist, r + 1)? - rf * lin.c
    };
    let with_scale = 0.5 * (abs_moment(dist, r + 2)? - lin.abs_r - rf * lin.c * q.e3);
    let s11 = sd * sd * q.var;
    let s12 = sd.powi(r as i32 + 1) * (with_mean + q.qy * with_scale);
    let s22 = sd.powi(2 * r as i32) * lin.var;
    assemble(s11, s12, s22, h1, h2, Provenance::LocScaleDispersion { r, mean_known })
}

/// Location-scale quantile with the sample MedianAD.
pub fn asymptotic_locscale_medianad(
    dist: &Distribution,
    p: f64,
    mean_known: bool,
    h1: &TransformSpec,
    h2: &TransformSpec,
) -> Result<AsymptoticResult> {
    asymptotic_locscale_medianad_with(dist, p, mean_known, h1, h2, GammaConvention::default())
}

pub fn asymptotic_locscale_medianad_with(
    dist: &Distribution,
    p: f64,
    mean_known: bool,
    h1: &TransformSpec,
    h2: &TransformSpec,
    convention: GammaConvention,
) -> Result<AsymptoticResult> {
    let q = quantile_linear(dist, p, mean_known)?;
    let s = dist.summary()?;
    require_medianad_conditions(dist)?;
    let sd = dist.std_dev()?;
    let mean = dist.mean()?;
    let a = (s.med - s.xi - mean) / sd;
    let b = (s.med + s.xi - mean) / sd;
    let c = (s.med - mean) / sd;
    let ratio = s.alpha / s.f_med;
    let below = f64::NEG_INFINITY;
    // Covariances of Y and (Y^2 - 1)/2 with the MedianAD linearization.
    let with_scale = (ratio * dist.partial_expectation(2, below, c)?
        - dist.partial_expectation(2, a, b)?
        - 0.5 * (ratio - 1.0))
        / (2.0 * s.beta);
    let with_mean = if q.mean_known {
        0.0
    } else {
        (ratio * dist.partial_expectation(1, below, c)? - dist.partial_expectation(1, a, b)?) / s.beta
    };
    let gamma = s.gamma_for(convention);
    let s11 = sd * sd * q.var;
    let s12 = sd * (with_mean + q.qy * with_scale);
    let s22 = (1.0 + gamma / (s.f_med * s.f_med)) / (4.0 * s.beta * s.beta);
    assemble(s11, s12, s22, h1, h2, Provenance::LocScaleMedianAd { mean_known })
}
