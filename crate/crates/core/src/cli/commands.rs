use super::args::{
    preset_label, CurveArgs, DistChoice, DistSettings, PairSettings, ScalingArgs, SimulateArgs, TheoryArgs,
};
use super::output::{cell, fmt_num, fmt_opt, fmt_pct, join_nums, RunManifest, Table};
use super::{CliError, Outcome};
use crate::asymptotics::{
    asymptotic, dispersion_limit, scale_for_sample_sizes, validate_conditions, EstimatorPairSpec, Provenance,
    QuantileKind, TransformPreset, TransformSpec,
};
use crate::distributions::{CustomFamily, Distribution};
use crate::error::Error;
use crate::estimators::DispersionKind;
use crate::montecarlo::{run_experiment, SimulationConfig};

const DEFAULT_DISPERSIONS: [DispersionKind; 3] = [DispersionKind::Variance, DispersionKind::Mad, DispersionKind::MedianAd];
const ALL_QUANTILES: [QuantileKind; 3] =
    [QuantileKind::SampleQuantile, QuantileKind::LocScaleUnknownMean, QuantileKind::LocScaleKnownMean];

fn build_dist(s: &DistSettings) -> Result<Distribution, CliError> {
    let d = match &s.choice {
        DistChoice::Gaussian => Distribution::gaussian(s.mu, s.sigma),
        DistChoice::Student(nu) => Distribution::student(*nu, s.mu, s.sigma),
        DistChoice::Custom(path) => {
            CustomFamily::from_json_file(path).and_then(|f| Distribution::custom(f, s.mu, s.sigma))
        }
    };
    d.map_err(|e| CliError::Usage(e.to_string()))
}

fn record_dist(m: &mut RunManifest, s: &DistSettings) {
    match &s.choice {
        DistChoice::Gaussian => m.param("dist", "gaussian"),
        DistChoice::Student(nu) => {
            m.param("dist", "student");
            m.param("nu", nu.to_string());
        }
        DistChoice::Custom(path) => {
            m.param("dist", "custom");
            m.param("custom", path.display().to_string());
        }
    }
    m.param("mu", s.mu.to_string());
    m.param("sigma", s.sigma.to_string());
}

fn record_pair(m: &mut RunManifest, pair: &PairSettings, with_p: bool) {
    if with_p {
        m.param("p", join_nums(&pair.ps));
    }
    let disp: Vec<String> = pair.dispersions.iter().map(DispersionKind::label).collect();
    m.param("dispersion", disp.join(","));
    let quant: Vec<&str> = pair.quantiles.iter().map(QuantileKind::label).collect();
    m.param("quantile", quant.join(","));
    m.param("h1", preset_label(pair.h1));
    m.param("h2", preset_label(pair.h2));
}

/// Errors that turn a row into `NA` rather than aborting.
fn is_na(e: &Error) -> bool {
    matches!(e, Error::MomentUnavailable { .. } | Error::ConditionViolated { .. })
}

fn classify(e: Error) -> CliError {
    match e {
        Error::Domain(_) => CliError::Usage(e.to_string()),
        Error::DegenerateSeries(_) => CliError::Degenerate(e.to_string()),
        other => CliError::Failure(other.to_string()),
    }
}

fn transform(
    preset: TransformPreset,
    at: impl FnOnce() -> crate::error::Result<f64>,
) -> crate::error::Result<TransformSpec> {
    match preset {
        TransformPreset::Identity => Ok(TransformSpec::identity()),
        TransformPreset::Negate => Ok(TransformSpec::negate()),
        other => TransformSpec::preset(other, at()?),
    }
}

fn pair_spec(
    dist: &Distribution,
    kind: QuantileKind,
    p: f64,
    d: DispersionKind,
    pair: &PairSettings,
) -> crate::error::Result<EstimatorPairSpec> {
    let h1 = transform(pair.h1, || dist.quantile(p))?;
    let h2 = transform(pair.h2, || dispersion_limit(dist, d))?;
    Ok(EstimatorPairSpec::new(kind, p, d)?.with_transforms(h1, h2))
}

pub fn theory(a: &TheoryArgs) -> Result<(Table, Outcome), CliError> {
    let ds = a.dist.resolve(true)?.expect("default distribution");
    let pair = a.pair.resolve(vec![0.95], &DEFAULT_DISPERSIONS, &[QuantileKind::SampleQuantile])?;
    let dist = build_dist(&ds)?;
    let mut m = RunManifest::new("theory");
    record_dist(&mut m, &ds);
    record_pair(&mut m, &pair, true);
    m.output = a.io.output.clone();
    let mut table = Table::new(
        m,
        vec![
            "dist", "quantile_kind", "dispersion", "p", "h1", "h2", "sigma11", "sigma12", "sigma22", "corr",
            "corr_pct", "theorem", "conditions",
        ],
    );
    let mut outcome = Outcome::Ok;
    for &kind in &pair.quantiles {
        for &d in &pair.dispersions {
            for &p in &pair.ps {
                let mut row = vec![
                    cell(&dist.name()),
                    kind.label().to_string(),
                    d.label(),
                    fmt_num(p),
                    preset_label(pair.h1).to_string(),
                    preset_label(pair.h2).to_string(),
                ];
                let tag = Provenance::for_pair(kind, d).tag();
                let result = pair_spec(&dist, kind, p, d, &pair).and_then(|spec| {
                    let report = validate_conditions(&dist, &spec);
                    asymptotic(&dist, &spec).map(|r| (r, report))
                });
                match result {
                    Ok((r, report)) => {
                        row.extend([
                            fmt_num(r.cov[0][0]),
                            fmt_num(r.cov[0][1]),
                            fmt_num(r.cov[1][1]),
                            fmt_num(r.corr),
                            fmt_pct(r.corr),
                            r.theorem.tag().to_string(),
                            report.status_label(),
                        ]);
                    }
                    Err(e) if is_na(&e) => {
                        outcome = Outcome::NotAvailable;
                        let status = EstimatorPairSpec::new(kind, p, d)
                            .map(|s| validate_conditions(&dist, &s).status_label())
                            .unwrap_or_else(|_| "unknown".into());
                        let status = if status == "ok" { format!("na:{}", cell(&e.to_string())) } else { status };
                        row.extend(["NA", "NA", "NA", "NA", "NA"].map(String::from));
                        row.extend([tag.to_string(), status]);
                    }
                    Err(e) => return Err(classify(e)),
                }
                table.push(row);
            }
        }
    }
    Ok((table, outcome))
}

fn default_panels() -> Vec<DistSettings> {
    [DistChoice::Gaussian, DistChoice::Student(10.0), DistChoice::Student(5.0)]
        .into_iter()
        .map(|choice| DistSettings { choice, mu: 0.0, sigma: 1.0 })
        .collect()
}

pub fn curve(a: &CurveArgs) -> Result<(Table, Outcome), CliError> {
    let grid = a.grid.unwrap_or(200);
    if grid < 2 {
        return Err(CliError::Usage("--grid must be >= 2".into()));
    }
    let grid_ps: Vec<f64> = (1..grid).map(|i| f64::from(i) / f64::from(grid)).collect();
    let pair = a.pair.resolve(grid_ps, &DEFAULT_DISPERSIONS, &ALL_QUANTILES)?;
    let mut m = RunManifest::new("curve");
    let panels = match a.dist.resolve(false)? {
        Some(ds) => {
            record_dist(&mut m, &ds);
            vec![ds]
        }
        None => {
            let mut panels = default_panels();
            for p in &mut panels {
                p.mu = a.dist.mu.unwrap_or(0.0);
                p.sigma = a.dist.sigma.unwrap_or(1.0);
            }
            m.param("mu", panels[0].mu.to_string());
            m.param("sigma", panels[0].sigma.to_string());
            panels
        }
    };
    if a.pair.p.is_empty() {
        m.param("grid", grid.to_string());
    }
    record_pair(&mut m, &pair, !a.pair.p.is_empty());
    m.output = a.io.output.clone();
    let mut table = Table::new(m, vec!["dist", "quantile_kind", "dispersion", "p", "corr", "corr_pct"]);
    let mut outcome = Outcome::Ok;
    for ds in &panels {
        let dist = build_dist(ds)?;
        let name = cell(&dist.name());
        for &kind in &pair.quantiles {
            for &d in &pair.dispersions {
                for &p in &pair.ps {
                    let corr = match pair_spec(&dist, kind, p, d, &pair).and_then(|s| asymptotic(&dist, &s)) {
                        Ok(r) => Some(r.corr),
                        Err(e) if is_na(&e) => {
                            outcome = Outcome::NotAvailable;
                            None
                        }
                        Err(e) => return Err(classify(e)),
                    };
                    table.push(vec![
                        name.clone(),
                        kind.label().to_string(),
                        d.label(),
                        fmt_num(p),
                        fmt_opt(corr),
                        corr.map_or_else(|| "NA".into(), fmt_pct),
                    ]);
                }
            }
        }
    }
    Ok((table, outcome))
}

pub fn simulate(a: &SimulateArgs) -> Result<(Table, Outcome), CliError> {
    let ds = a.dist.resolve(true)?.expect("default distribution");
    let pair = a.pair.resolve(vec![0.95], &DEFAULT_DISPERSIONS, &[QuantileKind::SampleQuantile])?;
    let sim = a.sim.resolve(&[126, 252, 504, 1008], 1000)?;
    let (vs, ws) = a.sizes.resolve(&[1], &[1])?;
    let dist = build_dist(&ds)?;
    let mut m = RunManifest::new("simulate");
    record_dist(&mut m, &ds);
    record_pair(&mut m, &pair, true);
    m.param("n", join_nums(&sim.ns));
    m.param("l", sim.l.to_string());
    m.param("reps", sim.reps.to_string());
    m.param("seed", sim.seed.to_string());
    m.param("v", join_nums(&vs));
    m.param("w", join_nums(&ws));
    m.seed = Some(sim.seed);
    m.output = a.io.output.clone();
    let mut table = Table::new(
        m,
        vec![
            "dist", "quantile_kind", "dispersion", "p", "n", "l", "v", "w", "mean_corr", "corr_pct", "emp_lo",
            "emp_hi", "theoretical", "theoretical_pct", "fisher_lo", "fisher_hi", "reps", "seed",
        ],
    );
    let mut outcome = Outcome::Ok;
    let name = cell(&dist.name());
    for &kind in &pair.quantiles {
        for &d in &pair.dispersions {
            for &p in &pair.ps {
                let spec = match pair_spec(&dist, kind, p, d, &pair) {
                    Ok(s) => s,
                    Err(e) if is_na(&e) => {
                        return Err(CliError::Usage(format!("transform needs the limit value: {e}")))
                    }
                    Err(e) => return Err(classify(e)),
                };
                for &n in &sim.ns {
                    for &v in &vs {
                        for &w in &ws {
                            let config = SimulationConfig::new(dist.clone(), spec, n, sim.l, sim.reps, sim.seed)
                                .and_then(|c| c.with_sample_sizes(v, w))
                                .map_err(classify)?;
                            let s = run_experiment(&config).map_err(classify)?;
                            if s.theoretical_corr.is_none() {
                                outcome = Outcome::NotAvailable;
                            }
                            let (flo, fhi) = match s.fisher_ci {
                                Some((lo, hi)) => (fmt_num(lo), fmt_num(hi)),
                                None => ("NA".into(), "NA".into()),
                            };
                            table.push(vec![
                                name.clone(),
                                kind.label().to_string(),
                                d.label(),
                                fmt_num(p),
                                n.to_string(),
                                sim.l.to_string(),
                                v.to_string(),
                                w.to_string(),
                                fmt_num(s.mean_corr),
                                fmt_pct(s.mean_corr),
                                fmt_num(s.empirical_ci.0),
                                fmt_num(s.empirical_ci.1),
                                fmt_opt(s.theoretical_corr),
                                s.theoretical_corr.map_or_else(|| "NA".into(), fmt_pct),
                                flo,
                                fhi,
                                s.reps_used.to_string(),
                                sim.seed.to_string(),
                            ]);
                        }
                    }
                }
            }
        }
    }
    Ok((table, outcome))
}

pub fn scaling(a: &ScalingArgs) -> Result<(Table, Outcome), CliError> {
    let ds = a.dist.resolve(true)?.expect("default distribution");
    let pair = a.pair.resolve(vec![0.95], &[DispersionKind::Variance], &[QuantileKind::SampleQuantile])?;
    let (vs, ws) = a.sizes.resolve(&[1, 2, 4], &[1, 2, 4])?;
    let sim = a.sim.resolve(&[252], 200)?;
    let dist = build_dist(&ds)?;
    let mut m = RunManifest::new("scaling");
    record_dist(&mut m, &ds);
    record_pair(&mut m, &pair, true);
    m.param("v", join_nums(&vs));
    m.param("w", join_nums(&ws));
    if a.verify {
        m.param("n", join_nums(&sim.ns));
        m.param("l", sim.l.to_string());
        m.param("reps", sim.reps.to_string());
        m.param("seed", sim.seed.to_string());
        m.param("verify", "");
        m.seed = Some(sim.seed);
    }
    m.output = a.io.output.clone();
    let mut columns = vec![
        "dist", "quantile_kind", "dispersion", "p", "v", "w", "base_corr", "scaled_corr", "ratio", "cov_factor",
    ];
    if a.verify {
        columns.extend(["n", "mc_base_corr", "mc_scaled_corr", "mc_ratio"]);
    }
    let mut table = Table::new(m, columns);
    let mut outcome = Outcome::Ok;
    let name = cell(&dist.name());
    for &kind in &pair.quantiles {
        for &d in &pair.dispersions {
            for &p in &pair.ps {
                let spec = pair_spec(&dist, kind, p, d, &pair);
                let base = match spec.and_then(|s| asymptotic(&dist, &s).map(|r| (s, r))) {
                    Ok(x) => Some(x),
                    Err(e) if is_na(&e) => {
                        outcome = Outcome::NotAvailable;
                        None
                    }
                    Err(e) => return Err(classify(e)),
                };
                let mut mc_base = Vec::new();
                if a.verify {
                    let spec = match &base {
                        Some((s, _)) => *s,
                        None => EstimatorPairSpec::new(kind, p, d).map_err(classify)?,
                    };
                    for &n in &sim.ns {
                        let c = SimulationConfig::new(dist.clone(), spec, n, sim.l, sim.reps, sim.seed)
                            .map_err(classify)?;
                        mc_base.push((n, spec, run_experiment(&c).map_err(classify)?.mean_corr));
                    }
                }
                for &v in &vs {
                    for &w in &ws {
                        let ratio = (f64::from(v.min(w)) / f64::from(v.max(w))).sqrt();
                        let cov_factor = 1.0 / f64::from(v.max(w));
                        let (b, scaled) = match &base {
                            Some((_, r)) => (Some(r.corr), Some(scale_for_sample_sizes(r, v, w).map_err(classify)?.corr)),
                            None => (None, None),
                        };
                        let prefix = vec![
                            name.clone(),
                            kind.label().to_string(),
                            d.label(),
                            fmt_num(p),
                            v.to_string(),
                            w.to_string(),
                            fmt_opt(b),
                            fmt_opt(scaled),
                            fmt_num(ratio),
                            fmt_num(cov_factor),
                        ];
                        if !a.verify {
                            table.push(prefix);
                            continue;
                        }
                        for (n, spec, mc_b) in &mc_base {
                            let c = SimulationConfig::new(dist.clone(), *spec, *n, sim.l, sim.reps, sim.seed)
                                .and_then(|c| c.with_sample_sizes(v, w))
                                .map_err(classify)?;
                            let mc_s = run_experiment(&c).map_err(classify)?.mean_corr;
                            let mut row = prefix.clone();
                            row.extend([n.to_string(), fmt_num(*mc_b), fmt_num(mc_s), fmt_num(mc_s / mc_b)]);
                            table.push(row);
                        }
                    }
                }
            }
        }
    }
    Ok((table, outcome))
}
