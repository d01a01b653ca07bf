//! Several sample quantiles jointly with one absolute central moment.

use nalgebra::DMatrix;

use super::check_p;
use super::historical::{dispersion_linear, quantile_dispersion_cross};
use crate::distributions::Distribution;
use crate::error::{Error, Result};

/// `J S J^T` for a covariance `S` and a Jacobian `J` of matching size.
pub fn delta_method(cov: &DMatrix<f64>, jacobian: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !cov.is_square() || jacobian.ncols() != cov.nrows() {
        return Err(Error::domain(format!(
            "jacobian is {}x{} but covariance is {}x{}",
            jacobian.nrows(),
            jacobian.ncols(),
            cov.nrows(),
            cov.ncols()
        )));
    }
    if jacobian.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("jacobian has non-finite entries"));
    }
    Ok(jacobian * cov * jacobian.transpose())
}

/// Limit covariance of `(q_n(p_1), ..., q_n(p_m), m_hat(r))` mapped through
/// `jacobian`, an `(m+1) x (m+1)` matrix of partial derivatives. The identity
/// returns the untransformed matrix; for `m = 1` a full 2x2 Jacobian gives the
/// delta method for a general bivariate transform.
pub fn vector_asymptotics(
    dist: &Distribution,
    ps: &[f64],
    r: u32,
    jacobian: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let m = ps.len();
    if m == 0 {
        return Err(Error::domain("at least one probability is required"));
    }
    for &p in ps {
        check_p(p)?;
    }
    if ps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("probabilities must be strictly increasing"));
    }
    if jacobian.nrows() != m + 1 || jacobian.ncols() != m + 1 {
        return Err(Error::domain(format!(
            "jacobian must be {}x{}, got {}x{}",
            m + 1,
            m + 1,
            jacobian.nrows(),
            jacobian.ncols()
        )));
    }
    let lin = dispersion_linear(dist, r)?;
    let sd = dist.std_dev()?;
    let mut dens = Vec::with_capacity(m);
    let mut cov = DMatrix::zeros(m + 1, m + 1);
    for (i, &p) in ps.iter().enumerate() {
        let (fq, s12) = quantile_dispersion_cross(dist, p, &lin)?;
        dens.push(fq);
        cov[(i, m)] = s12;
        cov[(m, i)] = s12;
    }
    for i in 0..m {
        for j in i..m {
            let v = ps[i] * (1.0 - ps[j]) / (dens[i] * dens[j]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov[(m, m)] = sd.powi(2 * r as i32) * lin.var;
    delta_method(&cov, jacobian)
}
