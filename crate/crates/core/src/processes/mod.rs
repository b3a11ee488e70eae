//! Seeded stochastic iterations with known targets.

mod counterexample;
mod dvoretzky;
pub mod geometry;
mod km;
mod prox;
pub mod random;
mod robbins_monro;
mod splitting;

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub use counterexample::Counterexample;
pub use dvoretzky::{shrink, Dvoretzky};
pub use geometry::{star_distance, star_geodesic, Space, StatePoint};
pub use km::Km;
pub use prox::{resolvent, Prox};
pub use random::RandomSource;
pub use robbins_monro::{Field, RobbinsMonro};
pub use splitting::{frechet_mean, prox_parameter, Splitting};

/// Named constants certified for a model.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Constants(BTreeMap<String, f64>);

impl Constants {
    pub fn insert(&mut self, key: &str, value: f64) {
        self.0.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        self.0
            .get(key)
            .copied()
            .ok_or_else(|| Error::config(key, "no certified value for this model"))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// A stochastic iteration `x_{n+1} = step(x_n, n, ω)` with target `z`.
pub trait Process: Send + Sync {
    fn name(&self) -> &'static str;

    fn space(&self) -> Space;

    fn target(&self) -> StatePoint;

    fn initial(&self, rng: &mut RandomSource) -> StatePoint;

    fn step(&self, x: &mut StatePoint, n: u64, rng: &mut RandomSource);

    /// The functional `F`, zero at the target.
    fn functional(&self, x: &StatePoint) -> f64;

    /// The distance map `φ` (a metric or its square).
    fn dist_map(&self, x: &StatePoint, y: &StatePoint) -> f64;

    /// `φ(x, z)`.
    fn target_dist(&self, x: &StatePoint) -> f64 {
        self.dist_map(x, &self.target())
    }

    /// Almost sure bound on `sup_{m≥n} φ(x_m, z)` given `x_n = x`.
    fn future_dist_bound(&self, _x: &StatePoint, _n: u64) -> f64 {
        f64::INFINITY
    }

    /// Whether `φ(x_n, z)` is a nonnegative supermartingale.
    fn is_supermartingale(&self) -> bool {
        false
    }

    /// Direct draw of `x_n` when its law is known in closed form.
    fn sample_marginal(&self, _n: crate::moduli::Index, _rng: &mut RandomSource) -> Option<StatePoint> {
        None
    }

    fn constants(&self) -> Constants;
}

#[derive(Clone, Debug)]
pub enum ProcessModel {
    Counterexample(Counterexample),
    RobbinsMonro(RobbinsMonro),
    Km(Km),
    Prox(Prox),
    Splitting(Splitting),
    Dvoretzky(Dvoretzky),
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            ProcessModel::Counterexample($m) => $e,
            ProcessModel::RobbinsMonro($m) => $e,
            ProcessModel::Km($m) => $e,
            ProcessModel::Prox($m) => $e,
            ProcessModel::Splitting($m) => $e,
            ProcessModel::Dvoretzky($m) => $e,
        }
    };
}

impl Process for ProcessModel {
    fn name(&self) -> &'static str {
        dispatch!(self, m => m.name())
    }
    fn space(&self) -> Space {
        dispatch!(self, m => m.space())
    }
    fn target(&self) -> StatePoint {
        dispatch!(self, m => m.target())
    }
    fn initial(&self, rng: &mut RandomSource) -> StatePoint {
        dispatch!(self, m => m.initial(rng))
    }
    fn step(&self, x: &mut StatePoint, n: u64, rng: &mut RandomSource) {
        dispatch!(self, m => m.step(x, n, rng))
    }
    fn functional(&self, x: &StatePoint) -> f64 {
        dispatch!(self, m => m.functional(x))
    }
    fn dist_map(&self, x: &StatePoint, y: &StatePoint) -> f64 {
        dispatch!(self, m => m.dist_map(x, y))
    }
    fn target_dist(&self, x: &StatePoint) -> f64 {
        dispatch!(self, m => m.target_dist(x))
    }
    fn future_dist_bound(&self, x: &StatePoint, n: u64) -> f64 {
        dispatch!(self, m => m.future_dist_bound(x, n))
    }
    fn is_supermartingale(&self) -> bool {
        dispatch!(self, m => m.is_supermartingale())
    }
    fn sample_marginal(&self, n: crate::moduli::Index, rng: &mut RandomSource) -> Option<StatePoint> {
        dispatch!(self, m => m.sample_marginal(n, rng))
    }
    fn constants(&self) -> Constants {
        dispatch!(self, m => m.constants())
    }
}

macro_rules! from_model {
    ($($v:ident),*) => {$(
        impl From<$v> for ProcessModel {
            fn from(m: $v) -> Self {
                ProcessModel::$v(m)
            }
        }
    )*};
}
from_model!(Counterexample, RobbinsMonro, Km, Prox, Splitting, Dvoretzky);

pub fn counterexample_model(eta_check: bool) -> ProcessModel {
    Counterexample::new(eta_check).into()
}

pub fn rm_model(
    field: Field,
    noise_sd: f64,
    steps: crate::Schedule,
    x0: StatePoint,
) -> Result<ProcessModel> {
    Ok(RobbinsMonro::new(field, noise_sd, steps, x0)?.into())
}

pub fn km_model(
    contraction_r: f64,
    lambda: crate::Schedule,
    noise_sd_seq: crate::Schedule,
    space: Space,
    x0: StatePoint,
) -> Result<ProcessModel> {
    Ok(Km::new(contraction_r, lambda, noise_sd_seq, space, x0)?.into())
}

pub fn prox_model(
    gamma: crate::Schedule,
    noise_sd_seq: crate::Schedule,
    z: StatePoint,
    x0: StatePoint,
) -> Result<ProcessModel> {
    Ok(Prox::new(gamma, noise_sd_seq, z, x0)?.into())
}

pub fn splitting_model(
    anchors: Vec<(StatePoint, f64)>,
    lambda: crate::Schedule,
    space: Space,
    x0: StatePoint,
) -> Result<ProcessModel> {
    Ok(Splitting::new(anchors, lambda, space, x0)?.into())
}

pub fn dvoretzky_model(
    a_seq: crate::Schedule,
    b_seq: crate::Schedule,
    c_seq: crate::Schedule,
    noise_sd_seq: crate::Schedule,
    z: StatePoint,
    x0: StatePoint,
) -> Result<ProcessModel> {
    Ok(Dvoretzky::new(a_seq, b_seq, c_seq, noise_sd_seq, z, x0)?.into())
}

pub(crate) fn euclid(p: &StatePoint, key: &str) -> Result<Vec<f64>> {
    match p {
        StatePoint::Euclidean(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(v.clone()),
        _ => Err(Error::config(key, format!("expected a finite Euclidean point, got {p:?}"))),
    }
}

pub(crate) fn coords(p: &StatePoint) -> &[f64] {
    match p {
        StatePoint::Euclidean(v) => v,
        StatePoint::Star { .. } => panic!("expected a Euclidean point"),
    }
}

pub(crate) fn coords_mut(p: &mut StatePoint) -> &mut [f64] {
    match p {
        StatePoint::Euclidean(v) => v,
        StatePoint::Star { .. } => panic!("expected a Euclidean point"),
    }
}

pub(crate) fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn check_schedule(key: &str, s: &crate::Schedule) -> Result<()> {
    s.validate().map_err(|e| Error::config(key, e.to_string()))
}
