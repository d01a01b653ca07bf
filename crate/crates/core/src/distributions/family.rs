//! Base variates of the built-in families.
//!
//! Both built-in bases are already standardized (mean 0, variance 1): the
//! Gaussian base is N(0, 1) and the Student base is `T * sqrt((df - 2) / df)`
//! for a classical Student-t variate `T`.

use std::f64::consts::FRAC_1_SQRT_2;

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadOptions};

const SQRT_2PI: f64 = 2.506_628_274_631_000_2;


pub(crate) fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

pub(crate) fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

pub fn normal_quantile(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    let mut x = Normal::standard().inverse_cdf(p);
    // The stock inverse is good to ~1e-11; one Newton step on an accurate cdf fixes that.
    let d = normal_pdf(x);
    if d > 0.0 {
        let resid = if p < 0.5 { normal_cdf(x) - p } else { (1.0 - p) - normal_sf(x) };
        x -= resid / d;
    }
    x
}

/// E[Z^k 1{a < Z <= b}] for Z ~ N(0, 1).
pub(crate) fn normal_partial_moment(k: u32, a: f64, b: f64) -> f64 {
    let edge = |x: f64, pow: u32| -> f64 {
        if x.is_infinite() {
            0.0
        } else {
            x.powi(pow as i32) * normal_pdf(x)
        }
    };
    let j0 = if a >= 0.0 {
        normal_sf(a) - normal_sf(b)
    } else {
        normal_cdf(b) - normal_cdf(a)
    };
    if k == 0 {
        return j0;
    }
    let j1 = edge(a, 0) - edge(b, 0);
    let (mut prev, mut cur) = (j0, j1);
    for m in 2..=k {
        let next = edge(a, m - 1) - edge(b, m - 1) + (m - 1) as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Classical Student-t with `df` degrees of freedom.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StudentT {
    pub df: f64,
    log_norm: f64,
}

impl StudentT {
    pub fn new(df: f64) -> Self {
        let log_norm =
            ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * std::f64::consts::PI).ln();
        Self { df, log_norm }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t.is_infinite() {
            return 0.0;
        }
        (self.log_norm - 0.5 * (self.df + 1.0) * (t * t / self.df).ln_1p()).exp()
    }

    /// P(T > |t|) computed without cancellation on either side of the median.
    fn upper_tail(&self, t: f64) -> f64 {
        let t = t.abs();
        if t.is_infinite() {
            return 0.0;
        }
        let nu = self.df;
        let t2 = t * t;
        if t2 < nu {
            0.5 - 0.5 * beta_reg(0.5, 0.5 * nu, t2 / (nu + t2))
        } else {
            0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + t2))
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t.is_nan() {
            return f64::NAN;
        }
        if t <= 0.0 { self.upper_tail(t) } else { 1.0 - self.upper_tail(t) }
    }

    pub fn sf(&self, t: f64) -> f64 {
        self.cdf(-t)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if p == 0.5 {
            return 0.0;
        }
        if p < 0.5 {
            return -self.quantile(1.0 - p);
        }
        let tail = 1.0 - p;
        let mut t = statrs::distribution::StudentsT::new(0.0, 1.0, self.df)
            .map(|d| d.inverse_cdf(p))
            .unwrap_or(f64::NAN);
        if !t.is_finite() || t < 0.0 {
            t = normal_quantile(p);
        }
        for _ in 0..8 {
            let d = self.pdf(t);
            if d <= 0.0 {
                break;
            }
            // Residual on the tail side keeps precision for p close to 1.
            let step = (tail - self.sf(t)) / d;
            t -= step;
            if step.abs() <= 1e-15 * t.abs().max(1.0) {
                break;
            }
        }
        t
    }

    /// E[T^k 1{a < T <= b}], closed form by the recursion
    /// (df - k) J_k = df [t^{k-1} f(t) (1 + t^2/df)]_b^a + df (k - 1) J_{k-2}.
    pub fn partial_moment(&self, k: u32, a: f64, b: f64) -> Result<f64> {
        let nu = self.df;
        let unbounded = a.is_infinite() || b.is_infinite();
        if unbounded && (k as f64) >= nu {
            return Err(Error::MomentUnavailable {
                order: k,
                family: format!("Student(df={nu})"),
            });
        }
        if (1..=k).any(|m| (m as f64 - nu).abs() < 1e-9) {
            // The recursion divides by (df - m); integrate directly instead.
            let f = |t: f64| t.powi(k as i32) * self.pdf(t);
            return integrate_with_breaks(f, a, b, &[0.0], &QuadOptions::default());
        }
        let edge = |t: f64, pow: u32| -> f64 {
            if t.is_infinite() {
                0.0
            } else {
                t.powi(pow as i32) * self.pdf(t) * (1.0 + t * t / nu)
            }
        };
        let j0 = if a >= 0.0 { self.sf(a) - self.sf(b) } else { self.cdf(b) - self.cdf(a) };
        if k == 0 {
            return Ok(j0);
        }
        let j1 = nu * (edge(a, 0) - edge(b, 0)) / (nu - 1.0);
        let (mut prev, mut cur) = (j0, j1);
        for m in 2..=k {
            let mf = m as f64;
            let next = (nu * (edge(a, m - 1) - edge(b, m - 1)) + nu * (mf - 1.0) * prev) / (nu - mf);
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }
}

/// Raw moment E[Z^k] of N(0, 1).
pub(crate) fn normal_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    // (k - 1)!!
    (1..k).step_by(2).map(|i| i as f64).product()
}

/// Raw moment E[T^k] of a classical Student-t, `k < df`.
pub(crate) fn student_moment(df: f64, k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let half = k / 2;
    (1..=half)
        .map(|i| df * (2 * i - 1) as f64 / (df - 2.0 * i as f64))
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn student_cdf_round_trip_near_median() {
        let t = StudentT::new(5.0);
        for &p in &[0.5000001, 0.51, 0.6, 0.75, 0.95, 0.999, 1e-6] {
            let q = t.quantile(p);
            assert!((t.cdf(q) - p).abs() < 1e-13, "p={p} q={q} cdf={}", t.cdf(q));
        }
    }

    #[test]
    fn student_even_moments() {
        // E[T^4] = 3 df^2 / ((df-2)(df-4))
        assert!((student_moment(5.0, 4) - 3.0 * 25.0 / 3.0).abs() < 1e-12);
        assert!((student_moment(5.0, 2) - 5.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn normal_moments() {
        assert_eq!(normal_moment(4), 3.0);
        assert_eq!(normal_moment(6), 15.0);
        assert_eq!(normal_moment(3), 0.0);
    }
}
