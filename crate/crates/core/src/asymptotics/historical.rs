//! Sample quantile paired with a dispersion estimator.

use serde::{Deserialize, Serialize};

use super::conditions::{require_continuity, require_density, require_positive};
use super::{assemble, check_p, AsymptoticResult, Provenance, TransformSpec};
use crate::distributions::{Distribution, GammaConvention};
use crate::error::{Error, Result};

const INF: f64 = f64::INFINITY;

/// Argument of a truncated moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Eta {
    /// `X` itself.
    Identity,
    /// `|X - E[X]|`.
    AbsDevFromMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauSpec {
    pub eta: Eta,
    pub k: u32,
    pub p: f64,
}

/// E[|Y|^k 1{a < Y <= b}].
pub(super) fn abs_partial(dist: &Distribution, k: u32, a: f64, b: f64) -> Result<f64> {
    let mut total = 0.0;
    if a < 0.0 {
        let v = dist.partial_expectation(k, a, b.min(0.0))?;
        total += if k.is_multiple_of(2) { v } else { -v };
    }
    if b > 0.0 {
        total += dist.partial_expectation(k, a.max(0.0), b)?;
    }
    Ok(total)
}

/// E|Y|^k; even orders use the closed-form raw moment.
pub(super) fn abs_moment(dist: &Distribution, k: u32) -> Result<f64> {
    if k.is_multiple_of(2) {
        dist.standardized_moment(k)
    } else {
        dist.standardized_abs_moment(k)
    }
}

/// E[|Y|^k sign(Y)], zero for symmetric families.
pub(super) fn signed_abs_moment(dist: &Distribution, k: u32) -> Result<f64> {
    if dist.is_symmetric() {
        if !dist.moment_availability(k).exists {
            return Err(Error::MomentUnavailable {
                order: k,
                family: dist.name(),
            });
        }
        return Ok(0.0);
    }
    if k % 2 == 1 {
        return dist.standardized_moment(k);
    }
    let upper = dist.partial_expectation(k, 0.0, INF)?;
    let lower = dist.partial_expectation(k, -INF, 0.0)?;
    Ok(upper - lower)
}

/// Linearization of the r-th absolute central moment estimator in units of
/// Y: `|Y|^r - r c Y` with `c = E[|Y|^(r-1) sign(Y)]`.
///
/// For `r = 1`, `c = 1 - 2 F(E[X])`; for `r = 2`, `c = E[Y] = 0`.
#[derive(Debug, Clone, Copy)]
pub(super) struct DispersionLinear {
    pub r: u32,
    pub c: f64,
    /// E|Y|^r.
    pub abs_r: f64,
    /// Var(|Y|^r - r c Y).
    pub var: f64,
}

pub(super) fn dispersion_linear(dist: &Distribution, r: u32) -> Result<DispersionLinear> {
    if r == 0 {
        return Err(Error::domain("absolute central moment order must be >= 1"));
    }
    let abs_2r = abs_moment(dist, 2 * r)?;
    let abs_r = abs_moment(dist, r)?;
    let c = match r {
        1 => 1.0 - 2.0 * dist.cdf_y(0.0)?,
        2 => 0.0,
        _ => signed_abs_moment(dist, r - 1)?,
    };
    let rf = f64::from(r);
    let cross = if c == 0.0 { 0.0 } else { signed_abs_moment(dist, r + 1)? };
    let var = abs_2r - abs_r * abs_r - 2.0 * rf * c * cross + rf * rf * c * c;
    Ok(DispersionLinear { r, c, abs_r, var })
}

/// Scaled cross covariance `sqrt(n) Cov(q_hat, D_hat)` of the sample
/// quantile with the r-th absolute central moment, in X units, and f(q).
pub(super) fn quantile_dispersion_cross(
    dist: &Distribution,
    p: f64,
    lin: &DispersionLinear,
) -> Result<(f64, f64)> {
    let sd = dist.std_dev()?;
    let qx = dist.quantile(p)?;
    let qy = dist.quantile_y(p)?;
    let fq = dist.pdf(qx);
    require_density("(Q1)", "q_X(p)", qx, fq)?;
    let tau_r = abs_partial(dist, lin.r, qy, INF)? - (1.0 - p) * lin.abs_r;
    let tau_1 = if lin.c == 0.0 { 0.0 } else { dist.partial_expectation(1, qy, INF)? };
    let s12 = sd.powi(lin.r as i32) * (tau_r - f64::from(lin.r) * lin.c * tau_1) / fq;
    Ok((fq, s12))
}

/// Untransformed limit covariance of the sample quantile with the r-th
/// absolute central moment estimator (`r = 2`: variance up to a vanishing
/// factor; `r = 1`: MAD).
fn hist_abs_core(dist: &Distribution, p: f64, r: u32) -> Result<(f64, f64, f64)> {
    check_p(p)?;
    let lin = dispersion_linear(dist, r)?;
    if r == 1 {
        require_continuity(dist, "(MD2)", dist.mean()?)?;
    }
    let sd = dist.std_dev()?;
    let (fq, s12) = quantile_dispersion_cross(dist, p, &lin)?;
    let s11 = p * (1.0 - p) / (fq * fq);
    let s22 = sd.powi(2 * r as i32) * lin.var;
    Ok((s11, s12, s22))
}

/// Truncated moment `tau_k(eta(X), p) = E[eta^k 1{X > q_X(p)}] - (1 - p) E[eta^k]`.
pub fn tau(dist: &Distribution, spec: &TauSpec) -> Result<f64> {
    check_p(spec.p)?;
    if spec.k == 0 {
        return Err(Error::domain("truncated moment order must be >= 1"));
    }
    let p = spec.p;
    let qy = dist.quantile_y(p)?;
    let sd = dist.std_dev()?;
    match spec.eta {
        Eta::AbsDevFromMean => {
            let abs_k = abs_moment(dist, spec.k)?;
            Ok(sd.powi(spec.k as i32) * (abs_partial(dist, spec.k, qy, INF)? - (1.0 - p) * abs_k))
        }
        Eta::Identity => {
            // X^k = sum_j C(k, j) m^(k-j) sd^j Y^j; the j = 0 term cancels.
            let m = dist.mean()?;
            let mut total = 0.0;
            let mut binom = 1.0;
            for j in 1..=spec.k {
                binom = binom * f64::from(spec.k - j + 1) / f64::from(j);
                let tail = dist.partial_expectation(j, qy, INF)? - (1.0 - p) * dist.standardized_moment(j)?;
                total += binom * m.powi((spec.k - j) as i32) * sd.powi(j as i32) * tail;
            }
            Ok(total)
        }
    }
}

/// Sample quantile with the sample variance (`r = 2`) or MAD (`r = 1`).
pub fn asymptotic_hist_dispersion(
    dist: &Distribution,
    p: f64,
    r: u32,
    h1: &TransformSpec,
    h2: &TransformSpec,
) -> Result<AsymptoticResult> {
    if r != 1 && r != 2 {
        return Err(Error::domain(format!("dispersion order must be 1 or 2, got {r}")));
    }
    let (s11, s12, s22) = hist_abs_core(dist, p, r)?;
    assemble(s11, s12, s22, h1, h2, Provenance::HistoricalDispersion { r })
}

/// Sample quantile with the r-th sample absolute central moment, any `r >= 1`.
///
/// The cross covariance carries the correction `-r E[|Y|^(r-1) sign(Y)] tau_1`
/// accounting for the estimated mean; it vanishes for even `r`.
pub fn asymptotic_hist_abs_moment(
    dist: &Distribution,
    p: f64,
    r: u32,
    h1: &TransformSpec,
    h2: &TransformSpec,
) -> Result<AsymptoticResult> {
    let (s11, s12, s22) = hist_abs_core(dist, p, r)?;
    assemble(s11, s12, s22, h1, h2, Provenance::HistoricalAbsMoment { r })
}

/// Sample quantile with the sample MedianAD. Needs no moments.
pub fn asymptotic_hist_medianad(
    dist: &Distribution,
    p: f64,
    h1: &TransformSpec,
    h2: &TransformSpec,
) -> Result<AsymptoticResult> {
    asymptotic_hist_medianad_with(dist, p, h1, h2, GammaConvention::default())
}

pub fn asymptotic_hist_medianad_with(
    dist: &Distribution,
    p: f64,
    h1: &TransformSpec,
    h2: &TransformSpec,
    convention: GammaConvention,
) -> Result<AsymptoticResult> {
    check_p(p)?;
    let s = dist.summary()?;
    let qx = dist.quantile(p)?;
    let fq = dist.pdf(qx);
    require_density("(Q1)", "q_X(p)", qx, fq)?;
    require_medianad_conditions(dist)?;
    let f_med = s.f_med;
    // Cov(1{X > q}, 1/2 - 1{|X - med| <= xi}) * f(med), minus the median-estimation term.
    let joint_tail = (s.cdf_med_plus_xi - s.cdf_med_minus_xi.max(p)).max(0.0);
    let cov_ind = s.alpha * (-p / 2.0).max((p - 1.0) / 2.0) - f_med * (joint_tail - (1.0 - p) / 2.0);
    let gamma = s.gamma_for(convention);
    let s11 = p * (1.0 - p) / (fq * fq);
    let s12 = cov_ind / (s.beta * f_med * fq);
    let s22 = (1.0 + gamma / (f_med * f_med)) / (4.0 * s.beta * s.beta);
    assemble(s11, s12, s22, h1, h2, Provenance::HistoricalMedianAd)
}

/// Density conditions of the MedianAD linearization, as hard errors.
pub(super) fn require_medianad_conditions(dist: &Distribution) -> Result<()> {
    let s = dist.summary()?;
    require_density("(MD3)", "med", s.med, s.f_med)?;
    require_positive(
        "(MD3)",
        "max(f(med - xi), f(med + xi))",
        s.f_med_minus_xi.max(s.f_med_plus_xi),
    )?;
    require_continuity(dist, "(MD3)", s.med + s.xi)?;
    require_continuity(dist, "(MD3)", s.med - s.xi)
}
