//! Location-scale distribution families and the scalar functionals consumed
//! by the asymptotic formulas.
//!
//! A [`Distribution`] is `X = mu + sigma * Z` for a base variate `Z`. For the
//! built-in families `Z` is already standardized; for custom families the
//! standardized variate is `Y = (Z - E[Z]) / sd(Z)` whenever the first two
//! moments of `Z` exist. All `*_y` methods and
//! [`partial_expectation`](Distribution::partial_expectation) refer to `Y`.

mod custom;
mod family;
mod summary;

use std::fmt;
use std::sync::{Arc, OnceLock};

pub use custom::{CustomFamily, TabulatedDescriptor};
pub use summary::{DistributionSummary, GammaConvention, Moment};

pub(crate) use family::{normal_cdf, normal_pdf};
pub use family::normal_quantile;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadOptions};
use family::{normal_moment, normal_partial_moment, student_moment, StudentT};

/// Densities at or below this value count as zero in condition checks.
pub const DENSITY_THRESHOLD: f64 = 1e-12;

const BISECTION_TOL: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 400;

/// Family tag of a [`Distribution`].
#[derive(Debug, Clone)]
pub enum Family {
    Gaussian,
    /// Student-t rescaled to unit variance; requires `df > 2`.
    Student { df: f64 },
    Custom(CustomFamily),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MomentAvailability {
    pub order: u32,
    pub exists: bool,
}

#[derive(Debug, Clone, Copy)]
enum Base {
    Gaussian,
    Student { t: StudentT, scale: f64 },
    Custom,
}

/// An immutable distribution value. Cloning is cheap and clones share the
/// lazily computed [`DistributionSummary`].
#[derive(Clone)]
pub struct Distribution {
    family: Family,
    base: Base,
    mu: f64,
    sigma: f64,
    /// Mean and standard deviation of the base variate, when they exist.
    base_moments: Option<(f64, f64)>,
    summary: Arc<OnceLock<Result<DistributionSummary>>>,
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Distribution")
            .field("family", &self.family)
            .field("mu", &self.mu)
            .field("sigma", &self.sigma)
            .finish()
    }
}

fn check_location_scale(mu: f64, sigma: f64) -> Result<()> {
    if !mu.is_finite() {
        return Err(Error::domain(format!("location must be finite, got {mu}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::domain(format!("scale must be positive and finite, got {sigma}")));
    }
    Ok(())
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("probability must lie in (0, 1), got {p}")))
    }
}

impl Distribution {
    fn build(family: Family, base: Base, mu: f64, sigma: f64, base_moments: Option<(f64, f64)>) -> Self {
        Self {
            family,
            base,
            mu,
            sigma,
            base_moments,
            summary: Arc::new(OnceLock::new()),
        }
    }

    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        check_location_scale(mu, sigma)?;
        Ok(Self::build(Family::Gaussian, Base::Gaussian, mu, sigma, Some((0.0, 1.0))))
    }

    pub fn standard_gaussian() -> Self {
        Self::build(Family::Gaussian, Base::Gaussian, 0.0, 1.0, Some((0.0, 1.0)))
    }

    /// Standardized Student-t with `df > 2`, located at `mu` and scaled by `sigma`.
    pub fn student(df: f64, mu: f64, sigma: f64) -> Result<Self> {
        check_location_scale(mu, sigma)?;
        if !(df.is_finite() && df > 2.0) {
            return Err(Error::domain(format!(
                "standardized Student-t needs df > 2, got {df}"
            )));
        }
        let base = Base::Student {
            t: StudentT::new(df),
            scale: ((df - 2.0) / df).sqrt(),
        };
        Ok(Self::build(Family::Student { df }, base, mu, sigma, Some((0.0, 1.0))))
    }

    pub fn standard_student(df: f64) -> Result<Self> {
        Self::student(df, 0.0, 1.0)
    }

    /// Wraps a caller-supplied base variate. Its mean and variance are found
    /// by quadrature unless the declared tail index rules them out.
    pub fn custom(family: CustomFamily, mu: f64, sigma: f64) -> Result<Self> {
        check_location_scale(mu, sigma)?;
        let (lo, hi) = family.support;
        if !(lo < hi) {
            return Err(Error::domain("custom support must be a nonempty interval"));
        }
        let opts = QuadOptions::default();
        let pdf = family.pdf.clone();
        let mass = integrate_with_breaks(|z| pdf(z), lo, hi, &family.breaks, &opts)?;
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::domain(format!(
                "custom density integrates to {mass}, expected 1"
            )));
        }
        let base_moments = if family.moment_exists(2) {
            let m0 = integrate_with_breaks(|z| z * pdf(z), lo, hi, &family.breaks, &opts)?;
            let var = integrate_with_breaks(
                |z| (z - m0) * (z - m0) * pdf(z),
                lo,
                hi,
                &family.breaks,
                &opts,
            )?;
            if !(var > 0.0) {
                return Err(Error::domain("custom base variate has zero variance"));
            }
            Some((m0, var.sqrt()))
        } else {
            None
        };
        Ok(Self::build(Family::Custom(family), Base::Custom, mu, sigma, base_moments))
    }

    /// Same family, new location and scale (fresh summary cache).
    pub fn with_location_scale(&self, mu: f64, sigma: f64) -> Result<Self> {
        check_location_scale(mu, sigma)?;
        Ok(Self::build(self.family.clone(), self.base, mu, sigma, self.base_moments))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Location parameter of `X = mu + sigma * Z`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Scale parameter of `X = mu + sigma * Z`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn name(&self) -> String {
        match &self.family {
            Family::Gaussian => "gaussian".to_string(),
            Family::Student { df } => format!("student({df})"),
            Family::Custom(c) => c.name.clone(),
        }
    }

    /// True when the family is known to be symmetric about its location.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self.family, Family::Custom(_))
    }

    fn custom_family(&self) -> &CustomFamily {
        match &self.family {
            Family::Custom(c) => c,
            _ => unreachable!("custom base without custom family"),
        }
    }

    fn unavailable(&self, order: u32) -> Error {
        Error::MomentUnavailable {
            order,
            family: self.name(),
        }
    }

    fn standardization(&self) -> Result<(f64, f64)> {
        self.base_moments.ok_or_else(|| self.unavailable(2))
    }

    /// E[X].
    pub fn mean(&self) -> Result<f64> {
        let (m0, _) = self.standardization()?;
        Ok(self.mu + self.sigma * m0)
    }

    /// sd(X); the scale that maps `Y` onto `X - E[X]`.
    pub fn std_dev(&self) -> Result<f64> {
        let (_, s0) = self.standardization()?;
        Ok(self.sigma * s0)
    }

    // Base variate Z.

    fn base_cdf(&self, z: f64) -> f64 {
        match self.base {
            Base::Gaussian => normal_cdf(z),
            Base::Student { t, scale } => t.cdf(z / scale),
            Base::Custom => (self.custom_family().cdf)(z).clamp(0.0, 1.0),
        }
    }

    fn base_pdf(&self, z: f64) -> f64 {
        match self.base {
            Base::Gaussian => normal_pdf(z),
            Base::Student { t, scale } => t.pdf(z / scale) / scale,
            Base::Custom => (self.custom_family().pdf)(z).max(0.0),
        }
    }

    fn base_quantile(&self, p: f64) -> f64 {
        match self.base {
            Base::Gaussian => normal_quantile(p),
            Base::Student { t, scale } => scale * t.quantile(p),
            Base::Custom => {
                let fam = self.custom_family();
                match &fam.quantile {
                    Some(q) => q(p),
                    None => self.bisect_quantile(p),
                }
            }
        }
    }

    /// inf{z : F(z) >= p} by bisection on the base cdf.
    fn bisect_quantile(&self, p: f64) -> f64 {
        let (s_lo, s_hi) = self.custom_family().support;
        let mut lo = if s_lo.is_finite() { s_lo } else { -1.0 };
        let mut hi = if s_hi.is_finite() { s_hi } else { 1.0 };
        while !s_lo.is_finite() && self.base_cdf(lo) >= p && lo > -1e300 {
            lo *= 2.0;
        }
        while !s_hi.is_finite() && self.base_cdf(hi) < p && hi < 1e300 {
            hi *= 2.0;
        }
        for _ in 0..BISECTION_MAX_ITER {
            if hi - lo <= BISECTION_TOL * hi.abs().max(lo.abs()).max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.base_cdf(mid) >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    // Observable X.

    pub fn cdf(&self, x: f64) -> f64 {
        self.base_cdf((x - self.mu) / self.sigma)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.base_pdf((x - self.mu) / self.sigma) / self.sigma
    }

    /// q_X(p) = inf{x : F_X(x) >= p}.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        Ok(self.mu + self.sigma * self.base_quantile(p))
    }

    // Standardized Y.

    pub fn cdf_y(&self, y: f64) -> Result<f64> {
        let (m0, s0) = self.standardization()?;
        Ok(self.base_cdf(m0 + s0 * y))
    }

    pub fn pdf_y(&self, y: f64) -> Result<f64> {
        let (m0, s0) = self.standardization()?;
        Ok(s0 * self.base_pdf(m0 + s0 * y))
    }

    pub fn quantile_y(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        let (m0, s0) = self.standardization()?;
        Ok((self.base_quantile(p) - m0) / s0)
    }

    pub fn moment_availability(&self, k: u32) -> MomentAvailability {
        let exists = match &self.family {
            Family::Gaussian => true,
            Family::Student { df } => (k as f64) < *df,
            Family::Custom(c) => c.moment_exists(k) && (k == 0 || self.base_moments.is_some()),
        };
        MomentAvailability { order: k, exists }
    }

    /// E[Y^k 1{a < Y <= b}].
    pub fn partial_expectation(&self, k: u32, a: f64, b: f64) -> Result<f64> {
        if a.is_nan() || b.is_nan() {
            return Err(Error::domain("NaN bound in partial expectation"));
        }
        if a > b {
            return Err(Error::domain(format!("partial expectation bounds reversed: {a} > {b}")));
        }
        if a == b {
            return Ok(0.0);
        }
        match self.base {
            Base::Gaussian => Ok(normal_partial_moment(k, a, b)),
            Base::Student { t, scale } => {
                let v = t.partial_moment(k, a / scale, b / scale).map_err(|e| match e {
                    Error::MomentUnavailable { order, .. } => self.unavailable(order),
                    other => other,
                })?;
                Ok(scale.powi(k as i32) * v)
            }
            Base::Custom => {
                let (m0, s0) = self.standardization()?;
                let fam = self.custom_family();
                let (s_lo, s_hi) = fam.support;
                let lo = (m0 + s0 * a).max(s_lo);
                let hi = (m0 + s0 * b).min(s_hi);
                if lo >= hi {
                    return Ok(0.0);
                }
                if (lo.is_infinite() || hi.is_infinite()) && !fam.moment_exists(k) {
                    return Err(self.unavailable(k));
                }
                let pdf = fam.pdf.clone();
                let f = |z: f64| ((z - m0) / s0).powi(k as i32) * pdf(z).max(0.0);
                let mut breaks = fam.breaks.clone();
                breaks.push(m0);
                integrate_with_breaks(f, lo, hi, &breaks, &QuadOptions::default())
            }
        }
    }

    /// E[Y^k].
    pub fn standardized_moment(&self, k: u32) -> Result<f64> {
        if !self.moment_availability(k).exists {
            return Err(self.unavailable(k));
        }
        match self.base {
            Base::Gaussian => Ok(normal_moment(k)),
            Base::Student { t, scale } => Ok(scale.powi(k as i32) * student_moment(t.df, k)),
            Base::Custom => match k {
                0 => Ok(1.0),
                1 => Ok(0.0),
                2 => Ok(1.0),
                _ => self.partial_expectation(k, f64::NEG_INFINITY, f64::INFINITY),
            },
        }
    }

    /// E[|Y|^r].
    pub fn standardized_abs_moment(&self, r: u32) -> Result<f64> {
        let sign = if r.is_multiple_of(2) { 1.0 } else { -1.0 };
        let lower = self.partial_expectation(r, f64::NEG_INFINITY, 0.0)?;
        let upper = self.partial_expectation(r, 0.0, f64::INFINITY)?;
        Ok(upper + sign * lower)
    }

    /// Median `nu` and median absolute deviation `xi` of X.
    ///
    /// `xi` solves F(nu + xi) - F(nu - xi) = 1/2, found by bisection and
    /// polished by one Newton step when that stays inside the final bracket.
    pub fn median_abs_deviation(&self) -> Result<(f64, f64)> {
        let med = self.quantile(0.5)?;
        let g = |xi: f64| self.cdf(med + xi) - self.cdf(med - xi) - 0.5;
        let mut lo = 0.0;
        let mut hi = 100.0 * self.sigma;
        if g(hi) < 0.0 {
            // Wide custom bases may need a larger bracket.
            let mut grown = false;
            for _ in 0..60 {
                hi *= 2.0;
                if g(hi) >= 0.0 {
                    grown = true;
                    break;
                }
            }
            if !grown {
                return Err(Error::Numeric(format!(
                    "no bracket for the median absolute deviation of {}: F(med+x)-F(med-x) < 1/2 up to x = {hi}",
                    self.name()
                )));
            }
        }
        let mut iter = 0;
        while hi - lo > BISECTION_TOL * hi.max(1.0) && iter < BISECTION_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if g(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            iter += 1;
        }
        let mut xi = 0.5 * (lo + hi);
        let slope = self.pdf(med + xi) + self.pdf(med - xi);
        if slope > DENSITY_THRESHOLD {
            let polished = xi - g(xi) / slope;
            if polished >= lo && polished <= hi && g(polished).abs() <= g(xi).abs() {
                xi = polished;
            }
        }
        if !(xi > 0.0) {
            return Err(Error::Numeric(format!(
                "median absolute deviation of {} is not positive",
                self.name()
            )));
        }
        Ok((med, xi))
    }

    /// Computes every cached scalar afresh.
    pub fn summarize(&self) -> Result<DistributionSummary> {
        DistributionSummary::compute(self)
    }

    /// Cached [`summarize`](Self::summarize); computed at most once per value.
    pub fn summary(&self) -> Result<&DistributionSummary> {
        self.summary
            .get_or_init(|| DistributionSummary::compute(self))
            .as_ref()
            .map_err(Clone::clone)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gaussian_quantiles() {
        let d = Distribution::standard_gaussian();
        assert_eq!(d.quantile(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(d.quantile(0.95).unwrap(), 1.644_853_626_951_472_2, epsilon = 1e-12);
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
        assert!(d.quantile(f64::NAN).is_err());
    }

    #[test]
    fn student_rejects_small_df() {
        assert!(Distribution::standard_student(2.0).is_err());
        assert!(Distribution::standard_student(1.5).is_err());
        assert!(Distribution::standard_student(2.5).is_ok());
        assert!(Distribution::gaussian(0.0, 0.0).is_err());
        assert!(Distribution::gaussian(0.0, -1.0).is_err());
    }

    #[test]
    fn student_median_is_zero() {
        let d = Distribution::standard_student(5.0).unwrap();
        assert_eq!(d.quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn partial_expectations() {
        let d = Distribution::standard_gaussian();
        let inf = f64::INFINITY;
        assert_abs_diff_eq!(d.partial_expectation(0, -inf, inf).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.partial_expectation(1, -inf, inf).unwrap(), 0.0, epsilon = 1e-15);
        let q = d.quantile(0.95).unwrap();
        assert_abs_diff_eq!(d.partial_expectation(1, q, inf).unwrap(), normal_pdf(q), epsilon = 1e-15);
        assert!(d.partial_expectation(1, 1.0, 0.0).is_err());
    }

    #[test]
    fn student_moments() {
        let d = Distribution::standard_student(5.0).unwrap();
        assert_abs_diff_eq!(d.standardized_moment(2).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.standardized_moment(4).unwrap(), 9.0, epsilon = 1e-12);
        assert!(d.standardized_moment(5).unwrap_err().is_moment_unavailable());
        let d3 = Distribution::standard_student(3.0).unwrap();
        assert!(d3.standardized_moment(4).unwrap_err().is_moment_unavailable());
        assert!(!d3.moment_availability(3).exists);
        assert!(d3.moment_availability(2).exists);
    }

    #[test]
    fn median_abs_deviation_gaussian() {
        let (med, xi) = Distribution::standard_gaussian().median_abs_deviation().unwrap();
        assert_eq!(med, 0.0);
        assert_abs_diff_eq!(xi, 0.674_489_750_196_081_7, epsilon = 1e-11);
        let (med, xi) = Distribution::gaussian(3.0, 2.0).unwrap().median_abs_deviation().unwrap();
        assert_abs_diff_eq!(med, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(xi, 1.348_979_500_392_163_4, epsilon = 1e-11);
    }

    #[test]
    fn custom_uniform_standardizes() {
        let fam = CustomFamily::new(
            "uniform",
            |z: f64| z.clamp(0.0, 1.0),
            |z: f64| if (0.0..=1.0).contains(&z) { 1.0 } else { 0.0 },
        )
        .with_support(0.0, 1.0);
        let d = Distribution::custom(fam, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(d.mean().unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(d.std_dev().unwrap(), (1.0f64 / 12.0).sqrt(), epsilon = 1e-12);
        // Uniform kurtosis E[Y^4] = 9/5.
        assert_abs_diff_eq!(d.standardized_moment(4).unwrap(), 1.8, epsilon = 1e-9);
        assert_abs_diff_eq!(d.quantile(0.3).unwrap(), 0.3, epsilon = 1e-11);
        let (med, xi) = d.median_abs_deviation().unwrap();
        assert_abs_diff_eq!(med, 0.5, epsilon = 1e-11);
        assert_abs_diff_eq!(xi, 0.25, epsilon = 1e-11);
    }

    #[test]
    fn custom_rejects_unnormalized_density() {
        let fam = CustomFamily::new("bad", |z: f64| z.clamp(0.0, 1.0), |_| 2.0).with_support(0.0, 1.0);
        assert!(Distribution::custom(fam, 0.0, 1.0).is_err());
    }

    #[test]
    fn summary_is_cached_and_shared() {
        let d = Distribution::standard_gaussian();
        let e = d.clone();
        let a = d.summary().unwrap() as *const DistributionSummary;
        let b = e.summary().unwrap() as *const DistributionSummary;
        assert_eq!(a, b);
    }
}
