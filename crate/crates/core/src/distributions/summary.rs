use serde::Serialize;

use super::Distribution;
use crate::error::{Error, Result};

/// A moment-type scalar that may not exist for heavy-tailed families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Moment {
    Finite(f64),
    Unavailable { order: u32 },
}

impl Moment {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Moment::Finite(v) => Some(v),
            Moment::Unavailable { .. } => None,
        }
    }

    pub fn is_available(&self) -> bool {
        matches!(self, Moment::Finite(_))
    }

    fn from_result(r: Result<f64>) -> Result<Self> {
        match r {
            Ok(v) => Ok(Moment::Finite(v)),
            Err(Error::MomentUnavailable { order, .. }) => Ok(Moment::Unavailable { order }),
            Err(e) => Err(e),
        }
    }
}

/// Which expression for the MedianAD variance correction `gamma` to use.
///
/// Both agree when `alpha = f(med + xi) - f(med - xi)` vanishes, i.e. for
/// symmetric families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum GammaConvention {
    /// `alpha^2 - 4 alpha f(med) (1 - F(med - xi) - F(med + xi))`.
    #[default]
    Derived,
    /// `alpha f(med) (alpha - 4) (1 - F(med - xi) - F(med + xi))`, kept for comparison.
    Stated,
}

/// Scalars of a distribution used by the asymptotic covariance formulas.
///
/// Densities and cdf values refer to X; `e_y3`, `e_y4` to the standardized Y.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub e_y3: Moment,
    pub e_y4: Moment,
    /// E|X - E[X]|.
    pub theta: Moment,
    pub med: f64,
    pub xi: f64,
    pub f_med: f64,
    pub f_med_plus_xi: f64,
    pub f_med_minus_xi: f64,
    pub cdf_med_plus_xi: f64,
    pub cdf_med_minus_xi: f64,
    /// F(E[X]).
    pub cdf_at_mean: Moment,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub gamma_stated: f64,
}

impl DistributionSummary {
    pub(super) fn compute(dist: &Distribution) -> Result<Self> {
        let e_y3 = Moment::from_result(dist.standardized_moment(3))?;
        let e_y4 = Moment::from_result(dist.standardized_moment(4))?;
        let theta = Moment::from_result(
            dist.standardized_abs_moment(1)
                .and_then(|m| Ok(m * dist.std_dev()?)),
        )?;
        let cdf_at_mean = Moment::from_result(dist.mean().map(|m| dist.cdf(m)))?;
        let (med, xi) = dist.median_abs_deviation()?;
        let f_med = dist.pdf(med);
        let f_plus = dist.pdf(med + xi);
        let f_minus = dist.pdf(med - xi);
        let c_plus = dist.cdf(med + xi);
        let c_minus = dist.cdf(med - xi);
        let alpha = f_plus - f_minus;
        let beta = f_plus + f_minus;
        let tail = 1.0 - c_minus - c_plus;
        let gamma = alpha * alpha - 4.0 * alpha * f_med * tail;
        let gamma_stated = alpha * f_med * (alpha - 4.0) * tail;
        Ok(Self {
            e_y3,
            e_y4,
            theta,
            med,
            xi,
            f_med,
            f_med_plus_xi: f_plus,
            f_med_minus_xi: f_minus,
            cdf_med_plus_xi: c_plus,
            cdf_med_minus_xi: c_minus,
            cdf_at_mean,
            alpha,
            beta,
            gamma,
            gamma_stated,
        })
    }

    pub fn gamma_for(&self, convention: GammaConvention) -> f64 {
        match convention {
            GammaConvention::Derived => self.gamma,
            GammaConvention::Stated => self.gamma_stated,
        }
    }
}
