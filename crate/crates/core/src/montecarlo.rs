//! Reproducible simulation of estimator correlations.
//!
//! Each replication draws `l` disjoint windows; window `t` of replication
//! `rep` is generated by a ChaCha8 stream keyed on `(seed, rep, t)`, so the
//! output does not depend on how replications are scheduled across threads.

use rand::distr::{Distribution as _, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::ChiSquared;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{asymptotic, scale_for_sample_sizes, EstimatorPairSpec, QuantileKind};
use crate::distributions::{normal_quantile, Distribution, Family};
use crate::error::{Error, Result};
use crate::estimators::{loc_scale_quantile, sample_quantile, Sample};

/// One simulation cell.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub dist: Distribution,
    pub spec: EstimatorPairSpec,
    /// Base window size.
    pub n: usize,
    /// Windows per correlation estimate.
    pub l: usize,
    pub reps: usize,
    pub seed: u64,
    /// The quantile uses `v n` points per window.
    pub v: u32,
    /// The dispersion uses `w n` points per window.
    pub w: u32,
}

impl SimulationConfig {
    pub fn new(dist: Distribution, spec: EstimatorPairSpec, n: usize, l: usize, reps: usize, seed: u64) -> Result<Self> {
        let c = Self { dist, spec, n, l, reps, seed, v: 1, w: 1 };
        c.validate()?;
        Ok(c)
    }

    pub fn with_sample_sizes(mut self, v: u32, w: u32) -> Result<Self> {
        self.v = v;
        self.w = w;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain(format!("window size n must be >= 2, got {}", self.n)));
        }
        if self.l < 3 {
            return Err(Error::domain(format!("series length l must be >= 3, got {}", self.l)));
        }
        if self.reps < 1 {
            return Err(Error::domain("at least one replication is required"));
        }
        if self.v < 1 || self.w < 1 {
            return Err(Error::domain(format!(
                "sample-size multipliers must be positive, got ({}, {})",
                self.v, self.w
            )));
        }
        if !(self.spec.p > 0.0 && self.spec.p < 1.0) {
            return Err(Error::domain(format!("probability must lie in (0, 1), got {}", self.spec.p)));
        }
        Ok(())
    }

    /// Points drawn per window.
    pub fn window_len(&self) -> usize {
        self.n * self.v.max(self.w) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub mean_corr: f64,
    /// Sample standard deviation of the replicated correlations.
    pub sd_corr: f64,
    /// 2.5% and 97.5% percentiles (linear interpolation).
    pub empirical_ci: (f64, f64),
    pub theoretical_corr: Option<f64>,
    pub fisher_ci: Option<(f64, f64)>,
    /// Why the theoretical value is missing, if it is.
    pub unavailable_reason: Option<String>,
    pub reps_used: usize,
}

/// Random stream for one window of one replication.
pub fn window_rng(seed: u64, rep: u64, window: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((rep << 32) | (window & 0xffff_ffff));
    rng
}

/// Draws iid copies of X.
#[derive(Debug, Clone)]
pub struct Sampler {
    dist: Distribution,
    chi2: Option<(ChiSquared<f64>, f64, f64)>,
}

impl Sampler {
    pub fn new(dist: &Distribution) -> Result<Self> {
        let chi2 = match dist.family() {
            Family::Student { df } => {
                let c = ChiSquared::new(*df).map_err(|e| Error::domain(format!("chi-square({df}): {e}")))?;
                Some((c, *df, ((df - 2.0) / df).sqrt()))
            }
            _ => None,
        };
        Ok(Self { dist: dist.clone(), chi2 })
    }

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        Open01.sample(rng)
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (mu, sigma) = (self.dist.mu(), self.dist.sigma());
        match (self.dist.family(), &self.chi2) {
            (Family::Gaussian, _) => mu + sigma * normal_quantile(Self::uniform(rng)),
            (Family::Student { .. }, Some((chi2, df, scale))) => {
                let z = normal_quantile(Self::uniform(rng));
                let c: f64 = chi2.sample(rng);
                mu + sigma * scale * z / (c / df).sqrt()
            }
            _ => self
                .dist
                .quantile(Self::uniform(rng))
                .expect("open-interval uniform is a valid probability"),
        }
    }

    pub fn fill(&self, rng: &mut ChaCha8Rng, out: &mut Vec<f64>, len: usize) {
        out.clear();
        out.extend((0..len).map(|_| self.draw(rng)));
    }
}

/// Estimator series `(h1' q_hat_t, h2' D_hat_t)`, `t = 0..l`, for one
/// replication. The derivative factors linearize the transforms.
pub fn simulate_series(config: &SimulationConfig, rep: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    config.validate()?;
    let sampler = Sampler::new(&config.dist)?;
    let spec = &config.spec;
    let nq = config.n * config.v as usize;
    let nd = config.n * config.w as usize;
    let (d1, d2) = (spec.h1.derivative_at, spec.h2.derivative_at);
    let mut qs = Vec::with_capacity(config.l);
    let mut ds = Vec::with_capacity(config.l);
    let mut buf = Vec::with_capacity(config.window_len());
    for t in 0..config.l {
        let mut rng = window_rng(config.seed, rep as u64, t as u64);
        sampler.fill(&mut rng, &mut buf, config.window_len());
        let qsample = Sample::new(buf[..nq].to_vec())?;
        let q = match spec.quantile_kind {
            QuantileKind::SampleQuantile => sample_quantile(&qsample, spec.p)?,
            QuantileKind::LocScaleUnknownMean => loc_scale_quantile(&qsample, spec.p, &config.dist, false)?,
            QuantileKind::LocScaleKnownMean => loc_scale_quantile(&qsample, spec.p, &config.dist, true)?,
        };
        let dsample = if nd == nq { qsample } else { Sample::new(buf[..nd].to_vec())? };
        let d = spec.dispersion.estimate(&dsample)?;
        qs.push(d1 * q);
        ds.push(d2 * d);
    }
    Ok((qs, ds))
}

/// Sample product-moment correlation.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::domain(format!("series lengths differ: {} vs {}", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::domain("correlation needs at least three pairs"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        let which = if sxx == 0.0 { "first" } else { "second" };
        return Err(Error::DegenerateSeries(format!("{which} series is constant")));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Fisher-transform interval `tanh(atanh(rho) -+ z / sqrt(l - 3))`.
pub fn fisher_ci(rho: f64, l: usize, level: f64) -> Result<(f64, f64)> {
    if !(rho.abs() <= 1.0) {
        return Err(Error::domain(format!("correlation must lie in [-1, 1], got {rho}")));
    }
    if l < 4 {
        return Err(Error::domain(format!("Fisher interval needs l >= 4, got {l}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("confidence level must lie in (0, 1), got {level}")));
    }
    if rho.abs() == 1.0 {
        return Ok((rho, rho));
    }
    let z = normal_quantile(0.5 * (1.0 + level));
    let centre = rho.atanh();
    let half = z / ((l - 3) as f64).sqrt();
    Ok(((centre - half).tanh(), (centre + half).tanh()))
}

/// Linear-interpolation percentile of sorted data, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Correlations of all replications, in replication order.
pub fn replicate_correlations(config: &SimulationConfig) -> Result<Vec<f64>> {
    config.validate()?;
    (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let (q, d) = simulate_series(config, rep)?;
            pearson_correlation(&q, &d)
        })
        .collect()
}

/// Theoretical correlation for the configured pair, rescaled for `(v, w)`.
/// Missing moments or violated conditions yield `Err(reason)`.
pub fn theoretical_correlation(config: &SimulationConfig) -> Result<std::result::Result<f64, String>> {
    match asymptotic(&config.dist, &config.spec) {
        Ok(r) => {
            let scaled = if (config.v, config.w) == (1, 1) {
                r
            } else {
                scale_for_sample_sizes(&r, config.v, config.w)?
            };
            Ok(Ok(scaled.corr))
        }
        Err(e @ (Error::MomentUnavailable { .. } | Error::ConditionViolated { .. })) => Ok(Err(e.to_string())),
        Err(e) => Err(e),
    }
}

pub fn run_experiment(config: &SimulationConfig) -> Result<SimulationSummary> {
    let corrs = replicate_correlations(config)?;
    let k = corrs.len() as f64;
    let mean = corrs.iter().sum::<f64>() / k;
    let sd = if corrs.len() > 1 {
        (corrs.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = corrs.clone();
    sorted.sort_by(f64::total_cmp);
    let empirical_ci = (percentile(&sorted, 0.025), percentile(&sorted, 0.975));
    let (theoretical_corr, fisher, reason) = match theoretical_correlation(config)? {
        Ok(rho) => (Some(rho), Some(fisher_ci(rho, config.l, 0.95)?), None),
        Err(reason) => (None, None, Some(reason)),
    };
    Ok(SimulationSummary {
        mean_corr: mean,
        sd_corr: sd,
        empirical_ci,
        theoretical_corr,
        fisher_ci: fisher,
        unavailable_reason: reason,
        reps_used: corrs.len(),
    })
}
