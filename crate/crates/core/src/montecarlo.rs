//! Seeded Monte Carlo estimators and rate validation.
//!
//! Trial `i` draws from the stream seeded with
//! `splitmix64(master_seed ^ splitmix64(i))` (see [`trial_seed`]). Trials run
//! on the rayon pool when the `parallel` feature is on; results are always
//! reduced sequentially in trial order, so reports are bit-identical across
//! thread counts.
//!
//! [`trial_seed`]: crate::processes::random::trial_seed

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moduli::{Index, RateAsFn, SiccFunction};
use crate::processes::{Process, RandomSource, StatePoint};
use crate::rates::RateBundle;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McConfig {
    pub trials: u64,
    /// Feasibility cap on rate indices and, unless `auto_horizon` is set, the
    /// last simulated index.
    pub horizon: Index,
    pub master_seed: u64,
    pub ci_multiplier: f64,
    /// Index of the first trial stream.
    pub first_trial: u64,
    /// Simulate each row up to [`default_horizon`] of its own index.
    pub auto_horizon: bool,
    /// Draw `x_n` from the model's closed-form marginal instead of stepping,
    /// when the model has one.
    pub marginal: bool,
}

impl McConfig {
    pub fn new(trials: u64, horizon: Index, master_seed: u64) -> Result<Self> {
        let cfg = McConfig {
            trials,
            horizon,
            master_seed,
            ci_multiplier: 3.0,
            first_trial: 0,
            auto_horizon: false,
            marginal: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 2 {
            return Err(Error::config("trials", "need at least 2 trials"));
        }
        if self.horizon < 1 {
            return Err(Error::config("horizon", "horizon must be ≥ 1"));
        }
        if !(self.ci_multiplier > 0.0 && self.ci_multiplier.is_finite()) {
            return Err(Error::config("ci_multiplier", "must be positive"));
        }
        Ok(())
    }

    fn row_horizon(&self, index: Index) -> Index {
        if self.auto_horizon {
            default_horizon(index)
        } else {
            self.horizon
        }
    }
}

/// `max(10·index, index + 1000)`.
pub fn default_horizon(index: Index) -> Index {
    index.saturating_mul(10).max(index.saturating_add(1000))
}

/// How trials are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Parallel,
    Sequential,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Runs `trial(i, rng)` for every trial stream and returns the results in trial order.
pub fn run_trials_with<T, F>(cfg: &McConfig, mode: Execution, trial: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut RandomSource) -> T + Sync + Send,
{
    let ids = cfg.first_trial..cfg.first_trial + cfg.trials;
    let run = |i: u64| {
        let mut rng = RandomSource::new(cfg.master_seed, i);
        trial(i, &mut rng)
    };
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            ids.into_par_iter().map(run).collect()
        }
        _ => ids.map(run).collect(),
    }
}

pub fn run_trials<T, F>(cfg: &McConfig, trial: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut RandomSource) -> T + Sync + Send,
{
    run_trials_with(cfg, Execution::default(), trial)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub std_err: f64,
    pub trials: u64,
}

impl EstimateWithCI {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        EstimateWithCI {
            mean,
            std_err: (var / n).sqrt(),
            trials: xs.len() as u64,
        }
    }

    /// `mean ≤ bound + k·std_err`.
    pub fn dominated_by(&self, bound: f64, k: f64) -> bool {
        self.mean <= bound + k * self.std_err
    }

    /// `|mean − target| ≤ k·std_err`.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Pass,
    Fail,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationRow {
    pub kind: &'static str,
    pub epsilon: f64,
    pub lambda: Option<f64>,
    /// Rate index (or evaluation index for fixed-index checks).
    pub index: Index,
    pub horizon: Index,
    pub estimate: Option<EstimateWithCI>,
    pub bound: f64,
    pub ci_multiplier: f64,
    pub status: RowStatus,
}

impl ValidationRow {
    #[allow(clippy::too_many_arguments)]
    fn judged(
        kind: &'static str,
        epsilon: f64,
        lambda: Option<f64>,
        index: Index,
        horizon: Index,
        estimate: EstimateWithCI,
        bound: f64,
        k: f64,
    ) -> Self {
        let status = if estimate.dominated_by(bound, k) {
            RowStatus::Pass
        } else {
            RowStatus::Fail
        };
        ValidationRow {
            kind,
            epsilon,
            lambda,
            index,
            horizon,
            estimate: Some(estimate),
            bound,
            ci_multiplier: k,
            status,
        }
    }

    fn infeasible(kind: &'static str, epsilon: f64, lambda: Option<f64>, index: Index, horizon: Index, bound: f64, k: f64) -> Self {
        ValidationRow {
            kind,
            epsilon,
            lambda,
            index,
            horizon,
            estimate: None,
            bound,
            ci_multiplier: k,
            status: RowStatus::Infeasible,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == RowStatus::Pass
    }
}

fn steps_of(n: Index) -> Result<u64> {
    u64::try_from(n).map_err(|_| Error::Range(format!("index {n} cannot be simulated step by step")))
}

/// Values of `g(x_n)` at each of `indices` (sorted ascending) along one trajectory.
fn path_values<P: Process + ?Sized>(
    model: &P,
    g: &(dyn Fn(&StatePoint) -> f64 + Sync),
    indices: &[Index],
    marginal: bool,
    rng: &mut RandomSource,
) -> Vec<f64> {
    if let (true, Some(first)) = (marginal, indices.first()) {
        if let Some(p) = model.sample_marginal(*first, rng) {
            let mut out = vec![g(&p)];
            for &n in &indices[1..] {
                let p = model.sample_marginal(n, rng).expect("marginal sampler");
                out.push(g(&p));
            }
            return out;
        }
    }
    let mut x = model.initial(rng);
    let mut out = Vec::with_capacity(indices.len());
    let mut m: u64 = 0;
    for &n in indices {
        let n = n as u64;
        while m < n {
            model.step(&mut x, m, rng);
            m += 1;
        }
        out.push(g(&x));
    }
    out
}

/// Estimates `E[g(x_n)]` at each of `indices` from the same trajectories.
pub fn estimate_path_means<P: Process + ?Sized>(
    model: &P,
    g: &(dyn Fn(&StatePoint) -> f64 + Sync),
    indices: &[Index],
    cfg: &McConfig,
) -> Result<Vec<EstimateWithCI>> {
    cfg.validate()?;
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    for &n in &sorted {
        if n > cfg.horizon {
            return Err(Error::Range(format!("index {n} exceeds horizon {}", cfg.horizon)));
        }
    }
    let marginal = cfg.marginal && model.sample_marginal(0, &mut RandomSource::new(0, 0)).is_some();
    if !marginal {
        if let Some(&last) = sorted.last() {
            steps_of(last)?;
        }
    }
    let samples = run_trials(cfg, |_, rng| path_values(model, g, &sorted, marginal, rng));
    Ok(indices
        .iter()
        .map(|n| {
            let j = sorted.binary_search(n).expect("index present");
            let col: Vec<f64> = samples.iter().map(|s| s[j]).collect();
            EstimateWithCI::from_samples(&col)
        })
        .collect())
}

/// Estimates `E[g(x_n)]`.
pub fn estimate_mean_functional<P: Process + ?Sized>(
    model: &P,
    g: &(dyn Fn(&StatePoint) -> f64 + Sync),
    n: Index,
    cfg: &McConfig,
) -> Result<EstimateWithCI> {
    Ok(estimate_path_means(model, g, &[n], cfg)?[0])
}

/// One trajectory: whether `φ(x_m, z) ≥ ε` for some `m ∈ [from, horizon]`.
/// Stops early once the model certifies the distance stays below `ε`.
fn exceeds<P: Process + ?Sized>(model: &P, from: u64, horizon: u64, eps: f64, rng: &mut RandomSource) -> bool {
    let mut x = model.initial(rng);
    let mut m: u64 = 0;
    loop {
        if m >= from && model.target_dist(&x) >= eps {
            return true;
        }
        if m >= horizon || model.future_dist_bound(&x, m) < eps {
            return false;
        }
        model.step(&mut x, m, rng);
        m += 1;
    }
}

/// Fraction of trials with `φ(x_m, z) ≥ ε` for some `m ∈ [N, horizon]`;
/// a lower bound for the infinite-horizon event.
pub fn estimate_sup_exceedance<P: Process + ?Sized>(
    model: &P,
    from: Index,
    eps: f64,
    cfg: &McConfig,
) -> Result<EstimateWithCI> {
    exceedance_with_horizon(model, from, cfg.horizon, eps, cfg)
}

fn exceedance_with_horizon<P: Process + ?Sized>(
    model: &P,
    from: Index,
    horizon: Index,
    eps: f64,
    cfg: &McConfig,
) -> Result<EstimateWithCI> {
    cfg.validate()?;
    if from > horizon {
        return Err(Error::Range(format!("start {from} exceeds horizon {horizon}")));
    }
    let (from, horizon) = (steps_of(from)?, steps_of(horizon)?);
    let hits = run_trials(cfg, |_, rng| {
        if exceeds(model, from, horizon, eps, rng) {
            1.0
        } else {
            0.0
        }
    });
    Ok(EstimateWithCI::from_samples(&hits))
}

/// Ville's inequality `P(sup U_n ≥ a) ≤ E[U_0]/a` over `[0, horizon]`.
pub fn ville_check<P: Process + ?Sized>(model: &P, a: f64, cfg: &McConfig) -> Result<ValidationRow> {
    if !model.is_supermartingale() {
        return Err(Error::Contract(format!("{} is not a nonnegative supermartingale", model.name())));
    }
    if !(a > 0.0) {
        return Err(Error::domain(format!("threshold must be positive, got {a}")));
    }
    let u0 = model.constants().get("initial_mean")?;
    let est = estimate_sup_exceedance(model, 0, a, cfg)?;
    Ok(ValidationRow::judged("ville", a, None, 0, cfg.horizon, est, u0 / a, cfg.ci_multiplier))
}

fn spot_indices(index: Index, horizon: Index) -> Vec<Index> {
    let mut v = vec![index];
    for s in [index.saturating_add(1), index.saturating_mul(2).saturating_add(1)] {
        if s <= horizon && !v.contains(&s) {
            v.push(s);
        }
    }
    v
}

/// For each `ε`: `E[f(X_ρ(ε))] ≤ ε` (with `X_n = φ(x_n, z)`), plus spot checks
/// at `ρ(ε)+1` and `2ρ(ε)+1` when within the horizon.
pub fn validate_mean_rate<P: Process + ?Sized>(
    model: &P,
    f: &SiccFunction,
    bundle: &RateBundle,
    eps_list: &[f64],
    cfg: &McConfig,
) -> Result<Vec<ValidationRow>> {
    cfg.validate()?;
    let g = |x: &StatePoint| f.eval_unchecked(model.target_dist(x));
    let mut rows = Vec::new();
    for &eps in eps_list {
        let index = bundle.rho.eval(eps)?;
        if index > cfg.horizon {
            rows.push(ValidationRow::infeasible("mean", eps, None, index, cfg.horizon, eps, cfg.ci_multiplier));
            continue;
        }
        let idx = spot_indices(index, cfg.horizon);
        let ests = estimate_path_means(model, &g, &idx, cfg)?;
        for (n, est) in idx.into_iter().zip(ests) {
            let kind = if n == index { "mean" } else { "mean-spot" };
            rows.push(ValidationRow::judged(kind, eps, None, n, cfg.horizon, est, eps, cfg.ci_multiplier));
        }
    }
    Ok(rows)
}

/// For each `(λ, ε)`: `P(∃ n ≥ ρ′(λ,ε): φ(x_n, z) ≥ ε) ≤ λ` on the truncated horizon.
pub fn validate_as_rate<P: Process + ?Sized>(
    model: &P,
    rate_as: &RateAsFn,
    pairs: &[(f64, f64)],
    cfg: &McConfig,
) -> Result<Vec<ValidationRow>> {
    validate_as_rate_scaled(model, rate_as, pairs, &|e| e, cfg)
}

/// As [`validate_as_rate`], with the event `φ(x_n, z) ≥ threshold(ε)`; e.g.
/// `ε ↦ ε²` when `φ` is a squared distance and the rate is on the metric.
pub fn validate_as_rate_scaled<P: Process + ?Sized>(
    model: &P,
    rate_as: &RateAsFn,
    pairs: &[(f64, f64)],
    threshold: &dyn Fn(f64) -> f64,
    cfg: &McConfig,
) -> Result<Vec<ValidationRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &(lambda, eps) in pairs {
        let index = rate_as.eval(lambda, eps)?;
        let horizon = cfg.row_horizon(index);
        if index > cfg.horizon || u64::try_from(horizon).is_err() {
            rows.push(ValidationRow::infeasible("as", eps, Some(lambda), index, horizon, lambda, cfg.ci_multiplier));
            continue;
        }
        let est = exceedance_with_horizon(model, index, horizon, threshold(eps), cfg)?;
        rows.push(ValidationRow::judged("as", eps, Some(lambda), index, horizon, est, lambda, cfg.ci_multiplier));
    }
    Ok(rows)
}

/// `E[φ(x_n, z)] ≤ bound(n)` at each sampled index.
pub fn validate_fast_bound<P: Process + ?Sized>(
    model: &P,
    mean_bound: &dyn Fn(u64) -> f64,
    indices: &[u64],
    cfg: &McConfig,
) -> Result<Vec<ValidationRow>> {
    let idx: Vec<Index> = indices.iter().map(|&n| n as Index).collect();
    let g = |x: &StatePoint| model.target_dist(x);
    let ests = estimate_path_means(model, &g, &idx, cfg)?;
    Ok(indices
        .iter()
        .zip(ests)
        .map(|(&n, est)| {
            ValidationRow::judged("fast", 0.0, None, n as Index, cfg.horizon, est, mean_bound(n), cfg.ci_multiplier)
        })
        .collect())
}

/// `P(∃ m ≥ n: φ(x_m, z) ≥ ε) ≤ bound(n)` at each sampled index.
pub fn validate_exceed_bound<P: Process + ?Sized>(
    model: &P,
    exceed_bound: &dyn Fn(u64, f64) -> f64,
    eps: f64,
    indices: &[u64],
    cfg: &McConfig,
) -> Result<Vec<ValidationRow>> {
    let mut rows = Vec::new();
    for &n in indices {
        let horizon = cfg.row_horizon(n as Index);
        let est = exceedance_with_horizon(model, n as Index, horizon, eps, cfg)?;
        rows.push(ValidationRow::judged(
            "exceed",
            eps,
            None,
            n as Index,
            horizon,
            est,
            exceed_bound(n, eps),
            cfg.ci_multiplier,
        ));
    }
    Ok(rows)
}

/// Per-step `(F(x_n), φ(x_n, z))` for one trial, `n = 0..=horizon`.
pub fn trajectory<P: Process + ?Sized>(model: &P, horizon: u64, master_seed: u64, trial: u64) -> Vec<(f64, f64)> {
    let mut rng = RandomSource::new(master_seed, trial);
    let mut x = model.initial(&mut rng);
    let mut out = Vec::with_capacity(horizon as usize + 1);
    for n in 0..=horizon {
        out.push((model.functional(&x), model.target_dist(&x)));
        if n < horizon {
            model.step(&mut x, n, &mut rng);
        }
    }
    out
}
