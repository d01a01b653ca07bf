//! Numeric spot checks of the regularity conditions behind each closed form.
//!
//! Labels: `(Q1)` density positive and finite at q_X(p); `(Q2)` finite
//! E[X^4] and non-degenerate (X - mu)^2; `(MD1)` as `(Q2)`, for the variance;
//! `(MD2)` finite E[X^2] and F continuous at the mean; `(MD3)` density
//! positive at the median and at one of med +- xi, F continuous there;
//! `(M_r)` finite E|X|^(2r) for the r-th absolute central moment.

use serde::Serialize;

use super::{EstimatorPairSpec, QuantileKind};
use crate::distributions::{Distribution, DENSITY_THRESHOLD};
use crate::error::{Error, Result};
use crate::estimators::DispersionKind;

/// Largest cdf increase over `[x - h, x + h]`, `h = 1e-9 scale`, still read as continuous.
const JUMP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionStatus {
    Satisfied,
    Violated,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub label: String,
    pub status: ConditionStatus,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.status == ConditionStatus::Satisfied)
    }

    pub fn violations(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| c.status == ConditionStatus::Violated)
    }

    pub fn get(&self, label: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.label == label)
    }

    /// `ok`, or the offending labels such as `violated:(MD1)` / `unknown:(Q1)`.
    pub fn status_label(&self) -> String {
        let collect = |status| {
            self.checks
                .iter()
                .filter(|c| c.status == status)
                .map(|c| c.label.as_str())
                .collect::<Vec<_>>()
                .join("+")
        };
        let violated = collect(ConditionStatus::Violated);
        let unknown = collect(ConditionStatus::Unknown);
        match (violated.is_empty(), unknown.is_empty()) {
            (true, true) => "ok".into(),
            (false, true) => format!("violated:{violated}"),
            (true, false) => format!("unknown:{unknown}"),
            (false, false) => format!("violated:{violated};unknown:{unknown}"),
        }
    }
}

fn check(label: &str, status: ConditionStatus, evidence: String) -> ConditionCheck {
    ConditionCheck {
        label: label.to_string(),
        status,
        evidence,
    }
}

fn density_ok(f: f64) -> bool {
    f.is_finite() && f > DENSITY_THRESHOLD
}

fn jump_at(dist: &Distribution, x: f64) -> f64 {
    let scale = dist.std_dev().unwrap_or_else(|_| dist.sigma());
    let h = 1e-9 * scale;
    dist.cdf(x + h) - dist.cdf(x - h)
}

pub(super) fn require_density(label: &str, what: &str, x: f64, f: f64) -> Result<()> {
    if density_ok(f) {
        Ok(())
    } else {
        Err(Error::ConditionViolated {
            label: label.into(),
            detail: format!("density at {what} = {x} is {f}, needs to be positive and finite"),
        })
    }
}

pub(super) fn require_positive(label: &str, what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > DENSITY_THRESHOLD {
        Ok(())
    } else {
        Err(Error::ConditionViolated {
            label: label.into(),
            detail: format!("{what} = {v}, needs to be positive"),
        })
    }
}

pub(super) fn require_continuity(dist: &Distribution, label: &str, x: f64) -> Result<()> {
    let jump = jump_at(dist, x);
    if jump <= JUMP_TOLERANCE {
        Ok(())
    } else {
        Err(Error::ConditionViolated {
            label: label.into(),
            detail: format!("cdf jumps by {jump} at {x}"),
        })
    }
}

fn moment_check(dist: &Distribution, label: &str, order: u32) -> ConditionCheck {
    let avail = dist.moment_availability(order);
    if avail.exists {
        check(label, ConditionStatus::Satisfied, format!("E|X|^{order} finite"))
    } else {
        check(label, ConditionStatus::Violated, format!("E|X|^{order} does not exist"))
    }
}

/// `(Q2)` / `(MD1)`: finite fourth moment and Var((X - mu)^2) > 0.
fn fourth_moment_check(dist: &Distribution, label: &str) -> ConditionCheck {
    let base = moment_check(dist, label, 4);
    if base.status != ConditionStatus::Satisfied {
        return base;
    }
    match dist.standardized_moment(4) {
        Ok(e4) if e4 - 1.0 > DENSITY_THRESHOLD => {
            check(label, ConditionStatus::Satisfied, format!("E[Y^4] = {e4}"))
        }
        Ok(e4) => check(
            label,
            ConditionStatus::Violated,
            format!("(X - mu)^2 is constant: E[Y^4] = {e4}"),
        ),
        Err(e) => check(label, ConditionStatus::Unknown, e.to_string()),
    }
}

fn continuity_check(dist: &Distribution, x: f64, what: &str) -> (bool, String) {
    let jump = jump_at(dist, x);
    (jump <= JUMP_TOLERANCE, format!("cdf jump at {what} = {jump:.3e}"))
}

fn mad_check(dist: &Distribution) -> ConditionCheck {
    let m = moment_check(dist, "(MD2)", 2);
    if m.status != ConditionStatus::Satisfied {
        return m;
    }
    match dist.mean() {
        Ok(mean) => {
            let (ok, evidence) = continuity_check(dist, mean, "mean");
            let status = if ok { ConditionStatus::Satisfied } else { ConditionStatus::Violated };
            check("(MD2)", status, evidence)
        }
        Err(e) => check("(MD2)", ConditionStatus::Unknown, e.to_string()),
    }
}

fn medianad_check(dist: &Distribution) -> ConditionCheck {
    let s = match dist.summary() {
        Ok(s) => s,
        Err(e) => return check("(MD3)", ConditionStatus::Unknown, e.to_string()),
    };
    let f_side = s.f_med_minus_xi.max(s.f_med_plus_xi);
    let (c_plus, e_plus) = continuity_check(dist, s.med + s.xi, "med+xi");
    let (c_minus, e_minus) = continuity_check(dist, s.med - s.xi, "med-xi");
    let finite = [s.f_med, s.f_med_plus_xi, s.f_med_minus_xi].iter().all(|f| f.is_finite());
    let ok = density_ok(s.f_med) && density_ok(f_side) && finite && c_plus && c_minus;
    let evidence = format!(
        "f(med) = {:.6e}, f(med-xi) = {:.6e}, f(med+xi) = {:.6e}, {e_minus}, {e_plus}",
        s.f_med, s.f_med_minus_xi, s.f_med_plus_xi
    );
    let status = if ok { ConditionStatus::Satisfied } else { ConditionStatus::Violated };
    check("(MD3)", status, evidence)
}

fn quantile_density_check(dist: &Distribution, p: f64) -> ConditionCheck {
    match dist.quantile(p) {
        Ok(q) => {
            let f = dist.pdf(q);
            let status = if density_ok(f) { ConditionStatus::Satisfied } else { ConditionStatus::Violated };
            check("(Q1)", status, format!("f(q_X(p)) = {f:.6e} at q = {q}"))
        }
        Err(e) => check("(Q1)", ConditionStatus::Unknown, e.to_string()),
    }
}

/// Evaluates every condition the pairing relies on. Never fails; problems
/// that prevent a check are reported as [`ConditionStatus::Unknown`].
pub fn validate_conditions(dist: &Distribution, spec: &EstimatorPairSpec) -> ConditionReport {
    let mut checks = Vec::new();
    match spec.quantile_kind {
        QuantileKind::SampleQuantile => checks.push(quantile_density_check(dist, spec.p)),
        QuantileKind::LocScaleUnknownMean | QuantileKind::LocScaleKnownMean => {
            checks.push(fourth_moment_check(dist, "(Q2)"))
        }
    }
    match spec.dispersion {
        DispersionKind::Variance | DispersionKind::AbsCentralMoment(2) => {
            checks.push(fourth_moment_check(dist, "(MD1)"))
        }
        DispersionKind::Mad | DispersionKind::AbsCentralMoment(1) => checks.push(mad_check(dist)),
        DispersionKind::MedianAd => checks.push(medianad_check(dist)),
        DispersionKind::AbsCentralMoment(r) => {
            checks.push(moment_check(dist, &format!("(M_{r})"), 2 * r))
        }
    }
    ConditionReport { checks }
}
