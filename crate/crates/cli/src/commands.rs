//! The four subcommands, each producing a table.

use serde::Serialize;

use stochrate::montecarlo::{
    trajectory, validate_as_rate_scaled, validate_exceed_bound, validate_fast_bound,
    validate_mean_rate, ville_check,
};
use stochrate::{Index, McConfig, Process, ProcessModel, RowStatus, ValidationRow};

use crate::build::{build_model, build_theorem, Rates, Theorem, MODELS, THEOREMS};
use crate::config::ExperimentConfig;
use crate::CliError;

/// JSON numbers stop at `u64`; larger indices are written as decimal strings.
fn index_ser<S: serde::Serializer>(i: &Index, s: S) -> Result<S::Ok, S::Error> {
    match u64::try_from(*i) {
        Ok(v) => s.serialize_u64(v),
        Err(_) => s.serialize_str(&i.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub theorem: String,
    pub kind: &'static str,
    pub epsilon: Option<f64>,
    pub lambda: Option<f64>,
    #[serde(serialize_with = "index_ser")]
    pub index: Index,
    pub value: Option<f64>,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub theorem: String,
    pub kind: &'static str,
    pub epsilon: Option<f64>,
    pub lambda: Option<f64>,
    #[serde(serialize_with = "index_ser")]
    pub index: Index,
    #[serde(serialize_with = "index_ser")]
    pub horizon: Index,
    pub mean: Option<f64>,
    pub std_err: Option<f64>,
    pub trials: Option<u64>,
    pub bound: f64,
    pub ci_multiplier: f64,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub trial: u64,
    pub n: u64,
    pub functional: f64,
    pub dist: f64,
}

pub const RATE_SCHEMA: &str = "stochrate-rate/1";
pub const VALIDATE_SCHEMA: &str = "stochrate-validate/1";
pub const TRAJECTORY_SCHEMA: &str = "stochrate-trajectory/1";

pub const RATE_HEADER: [&str; 7] = ["theorem", "kind", "epsilon", "lambda", "index", "value", "provenance"];
pub const VALIDATE_HEADER: [&str; 12] = [
    "theorem",
    "kind",
    "epsilon",
    "lambda",
    "index",
    "horizon",
    "mean",
    "std_err",
    "trials",
    "bound",
    "ci_multiplier",
    "status",
];
pub const TRAJECTORY_HEADER: [&str; 4] = ["trial", "n", "functional", "dist"];

pub fn catalog() -> String {
    let mut s = String::new();
    s.push_str("slowing functions (moduli.f)\n");
    for line in [
        "id                      x",
        "sqrt                    x^0.5",
        "power:q                 x^q, q in (0,1]",
        "log:c                   log_c(1+x), c > 1",
        "sum(a*f, b*g)           a f + b g, a, b > 0",
        "compose(f, g)           f(g(x))",
        "min(f, g)               min(f(x), g(x))",
    ] {
        s.push_str(&format!("  {line}\n"));
    }
    s.push_str("schedules\n");
    for line in [
        "const:v                 v",
        "harmonic:beta,r         1/(beta(n+r))",
        "power:p                 (n+1)^-p",
        "geometric:s,q           s q^n, q in (0,1)",
    ] {
        s.push_str(&format!("  {line}\n"));
    }
    s.push_str("rates of divergence (moduli.theta)\n");
    s.push_str("  linear:c                terms bounded below by c\n");
    s.push_str("  [w*]sum:schedule        partial sums of w times a schedule\n");
    s.push_str("tail rates (moduli.chi)\n");
    s.push_str("  zero | inverse:c | [w*]sum[-powP]:schedule\n");
    s.push_str("liminf-moduli (moduli.phi)\n");
    s.push_str("  identity | shift-inverse:c | geometric:C,eta\n");
    s.push_str("regularity moduli (moduli.tau, moduli.kappa)\n");
    for line in [
        "id | power:p | linear:a | poly:a,p",
        "convex:tau                       convex tau, checked on samples",
        "ui(K=k, pi=const:c, mu=const:m)  uniformly integrable X",
        "bounded(K=k, pi=const:c)         X <= K almost surely",
        "quasi-contraction:r              r in [0,1)",
        "sharp-min(tau) | sharp-min-quarter(tau)",
        "strongly-quasiconvex:mu",
        "frechet                          Frechet mean objective",
        "prox-transfer(gamma, tau)        from F to the resolvent residual",
    ] {
        s.push_str(&format!("  {line}\n"));
    }
    s.push_str("models (model.name)\n");
    let params = [
        "eta_check",
        "beta, dim, noise_sd, steps, x0",
        "noise_sd, steps, x0",
        "noise_sd, steps, x0",
        "contraction, lambda, noise, space, x0",
        "gamma, noise, z, x0",
        "anchors, weights, lambda, space, x0",
        "a, b, c, noise, z, x0",
    ];
    for (m, p) in MODELS.iter().zip(params) {
        s.push_str(&format!("  {m:<23} {p}\n"));
    }
    s.push_str("theorems (theorem.name)\n");
    let about = [
        "general rate: K, chi, phi, f",
        "Robbins-Siegmund rate: K, L, M, chi, theta, tau, f",
        "linear Robbins-Siegmund bounds: c, d, r, t, K, L",
        "Dvoretzky rate: certified from a dvoretzky model",
        "quasi-Fejer rate: K, chi, phi, tau, kappa",
        "Robbins-Monro rate: c, d, L, M, theta, chi, tau, f",
        "Robbins-Monro square-root rate: as rm",
        "strongly monotone Robbins-Monro: beta, c, d, r, L, K",
        "Ville inequality for supermartingale models",
    ];
    for (t, a) in THEOREMS.iter().zip(about) {
        s.push_str(&format!("  {t:<23} {a}\n"));
    }
    s
}

fn model_of(cfg: &ExperimentConfig) -> Result<Option<ProcessModel>, CliError> {
    cfg.model.as_ref().map(build_model).transpose()
}

fn need_eps(cfg: &ExperimentConfig) -> Result<&[f64], CliError> {
    if cfg.grid.epsilon.is_empty() {
        return Err(CliError::key("grid.epsilon", "must be nonempty"));
    }
    Ok(&cfg.grid.epsilon)
}

fn need_indices(cfg: &ExperimentConfig) -> Result<&[u64], CliError> {
    if cfg.grid.indices.is_empty() {
        return Err(CliError::key("grid.indices", "must be nonempty"));
    }
    Ok(&cfg.grid.indices)
}

fn eval_err(e: stochrate::Error) -> CliError {
    match e {
        stochrate::Error::Config { key, message } => CliError::key(&format!("mc.{key}"), message),
        other => CliError::Config(format!("evaluation failed: {other}")),
    }
}

pub fn rate(cfg: &ExperimentConfig) -> Result<Vec<RateRow>, CliError> {
    let model = model_of(cfg)?;
    let th = build_theorem(cfg, model.as_ref())?;
    let prov = th.provenance();
    let row = |kind, epsilon, lambda, index, value| RateRow {
        theorem: th.name.clone(),
        kind,
        epsilon,
        lambda,
        index,
        value,
        provenance: prov.clone(),
    };
    let mut rows = Vec::new();
    let lams = &cfg.grid.lambda;
    match &th.rates {
        Rates::Bundle { bundle, .. } => {
            for &e in need_eps(cfg)? {
                rows.push(row("rho", Some(e), None, bundle.rho.eval(e).map_err(eval_err)?, None));
            }
            for &l in lams {
                for &e in &cfg.grid.epsilon {
                    rows.push(row("rho_as", Some(e), Some(l), bundle.rho_as.eval(l, e).map_err(eval_err)?, None));
                }
            }
        }
        Rates::Fejer(f) => {
            for &e in need_eps(cfg)? {
                rows.push(row("rho", Some(e), None, f.rho.eval(e).map_err(eval_err)?, None));
            }
            for &l in lams {
                for &e in &cfg.grid.epsilon {
                    rows.push(row("rho_as", Some(e), Some(l), f.rho_as.eval(l, e).map_err(eval_err)?, None));
                    rows.push(row("rho_metric", Some(e), Some(l), f.rho_metric.eval(l, e).map_err(eval_err)?, None));
                }
            }
        }
        Rates::Fast { rate, .. } => {
            for &n in need_indices(cfg)? {
                rows.push(row("mean_bound", None, None, n as Index, Some(rate.mean_bound(n))));
                for &e in &cfg.grid.epsilon {
                    rows.push(row("exceed_bound", Some(e), None, n as Index, Some(rate.exceed_bound_clamped(n, e))));
                }
            }
        }
        Rates::Dvoretzky { rate, .. } => {
            if lams.is_empty() {
                return Err(CliError::key("grid.lambda", "must be nonempty for dvoretzky"));
            }
            for &l in lams {
                for &e in need_eps(cfg)? {
                    rows.push(row("rho_as", Some(e), Some(l), rate.rate.eval(l, e).map_err(eval_err)?, None));
                }
            }
        }
        Rates::Ville => {
            let m = model.as_ref().expect("ville has a model");
            let u0 = m.constants().get("initial_mean").map_err(eval_err)?;
            for &a in need_eps(cfg)? {
                rows.push(row("ville_bound", Some(a), None, 0, Some(u0 / a)));
            }
        }
    }
    Ok(rows)
}

fn mc_config(cfg: &ExperimentConfig) -> Result<McConfig, CliError> {
    let mut mc = McConfig::new(cfg.mc.trials, cfg.mc.horizon as Index, cfg.mc.seed).map_err(eval_err)?;
    mc.ci_multiplier = cfg.mc.ci_multiplier;
    mc.auto_horizon = cfg.mc.auto_horizon;
    mc.marginal = cfg.mc.marginal;
    Ok(mc)
}

fn report_row(theorem: &str, r: ValidationRow) -> ReportRow {
    ReportRow {
        theorem: theorem.to_string(),
        kind: r.kind,
        epsilon: (r.kind != "fast").then_some(r.epsilon),
        lambda: r.lambda,
        index: r.index,
        horizon: r.horizon,
        mean: r.estimate.map(|e| e.mean),
        std_err: r.estimate.map(|e| e.std_err),
        trials: r.estimate.map(|e| e.trials),
        bound: r.bound,
        ci_multiplier: r.ci_multiplier,
        status: r.status,
    }
}

fn pairs(cfg: &ExperimentConfig) -> Vec<(f64, f64)> {
    cfg.grid
        .lambda
        .iter()
        .flat_map(|&l| cfg.grid.epsilon.iter().map(move |&e| (l, e)))
        .collect()
}

pub fn validate(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>, CliError> {
    let model = model_of(cfg)?.ok_or_else(|| CliError::key("model", "missing"))?;
    let th: Theorem = build_theorem(cfg, Some(&model))?;
    let mc = mc_config(cfg)?;
    let mut rows: Vec<ValidationRow> = Vec::new();
    let square = |e: f64| e * e;
    let same = |e: f64| e;
    match &th.rates {
        Rates::Bundle { bundle, mean_f, squared } => {
            rows.extend(validate_mean_rate(&model, mean_f, bundle, need_eps(cfg)?, &mc).map_err(eval_err)?);
            let threshold: &dyn Fn(f64) -> f64 = if *squared { &square } else { &same };
            rows.extend(validate_as_rate_scaled(&model, &bundle.rho_as, &pairs(cfg), threshold, &mc).map_err(eval_err)?);
        }
        Rates::Fejer(f) => {
            let id = stochrate::moduli::sicc_identity();
            let bundle = stochrate::RateBundle {
                rho: f.rho.clone(),
                rho_as: f.rho_as.clone(),
                provenance: f.provenance.clone(),
            };
            rows.extend(validate_mean_rate(&model, &id, &bundle, need_eps(cfg)?, &mc).map_err(eval_err)?);
            rows.extend(validate_as_rate_scaled(&model, &f.rho_as, &pairs(cfg), &same, &mc).map_err(eval_err)?);
        }
        Rates::Fast { rate, .. } => {
            let idx = need_indices(cfg)?;
            rows.extend(validate_fast_bound(&model, &|n| rate.mean_bound(n), idx, &mc).map_err(eval_err)?);
            for &e in &cfg.grid.epsilon {
                rows.extend(
                    validate_exceed_bound(&model, &|n, e| rate.exceed_bound_clamped(n, e), e, idx, &mc).map_err(eval_err)?,
                );
            }
        }
        Rates::Dvoretzky { rate, .. } => {
            if cfg.grid.lambda.is_empty() {
                return Err(CliError::key("grid.lambda", "must be nonempty for dvoretzky"));
            }
            need_eps(cfg)?;
            rows.extend(validate_as_rate_scaled(&model, &rate.rate, &pairs(cfg), &same, &mc).map_err(eval_err)?);
        }
        Rates::Ville => {
            for &a in need_eps(cfg)? {
                rows.push(ville_check(&model, a, &mc).map_err(eval_err)?);
            }
        }
    }
    Ok(rows.into_iter().map(|r| report_row(&th.name, r)).collect())
}

pub fn trajectories(cfg: &ExperimentConfig, count: u64) -> Result<Vec<TrajectoryRow>, CliError> {
    if count < 1 {
        return Err(CliError::key("--count", "must be at least 1"));
    }
    let model = model_of(cfg)?.ok_or_else(|| CliError::key("model", "missing"))?;
    let mut rows = Vec::new();
    for trial in 0..count {
        for (n, (functional, dist)) in trajectory(&model, cfg.mc.horizon, cfg.mc.seed, trial).into_iter().enumerate() {
            rows.push(TrajectoryRow { trial, n: n as u64, functional, dist });
        }
    }
    Ok(rows)
}

/// `(passed, failed, infeasible)`
pub fn tally(rows: &[ReportRow]) -> (usize, usize, usize) {
    let count = |s| rows.iter().filter(|r| r.status == s).count();
    (count(RowStatus::Pass), count(RowStatus::Fail), count(RowStatus::Infeasible))
}
