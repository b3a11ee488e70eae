//! Regularity moduli and moduli of strong uniqueness in expectation.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{positive, Error, Result};
use crate::moduli::RegularityModulus;

/// `π(ε, l)`: a pointwise lower bound on `V` whenever `X ∈ [ε, l]`.
#[derive(Clone)]
pub struct PointwiseLowerBound {
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    label: String,
}

impl PointwiseLowerBound {
    pub fn new(label: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        PointwiseLowerBound { f: Arc::new(f), label: label.into() }
    }

    pub fn constant(c: f64) -> Self {
        PointwiseLowerBound::new(format!("const:{c}"), move |_, _| c)
    }

    pub fn eval(&self, eps: f64, l: f64) -> f64 {
        (self.f)(eps, l)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for PointwiseLowerBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("PointwiseLowerBound").field(&self.label).finish()
    }
}

/// Modulus of uniform integrability `μ`, valued in `(0, 1]`.
#[derive(Clone)]
pub struct UiModulus {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    label: String,
}

impl UiModulus {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        UiModulus { f: Arc::new(f), label: label.into() }
    }

    pub fn constant(m: f64) -> Self {
        UiModulus::new(format!("const:{m}"), move |_| m)
    }

    pub fn eval(&self, eps: f64) -> f64 {
        (self.f)(eps)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for UiModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("UiModulus").field(&self.label).finish()
    }
}

const CHECK_SEED: u64 = 0x7a75_c0de;
const CHECK_BOUND: f64 = 1e3;
const CHECK_SLACK: f64 = 1e-12;

fn sample(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random::<bool>() {
        rng.random::<f64>() * CHECK_BOUND
    } else {
        let (lo, hi) = (1e-6f64.ln(), CHECK_BOUND.ln());
        (lo + rng.random::<f64>() * (hi - lo)).exp()
    }
}

/// Wraps a convex, strictly increasing `τ` with `τ(0) = 0`. Convexity and
/// monotonicity are checked on `check_samples` seeded pairs in `[0, 10³]`.
pub fn reg_from_convex(
    label: impl Into<String>,
    tau: impl Fn(f64) -> f64 + Send + Sync + 'static,
    check_samples: usize,
) -> Result<RegularityModulus> {
    let label = label.into();
    let t0 = tau(0.0);
    if t0.abs() > CHECK_SLACK || t0.is_nan() {
        return Err(Error::Construction(format!("{label}: tau(0) = {t0}, expected 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED);
    for _ in 0..check_samples {
        let (mut x, mut y) = (sample(&mut rng), sample(&mut rng));
        if x > y {
            std::mem::swap(&mut x, &mut y);
        }
        let (tx, ty) = (tau(x), tau(y));
        if x < y && !(tx < ty) {
            return Err(Error::Construction(format!(
                "{label}: not strictly increasing, tau({x}) = {tx} ≥ tau({y}) = {ty}"
            )));
        }
        let mid = tau(0.5 * (x + y));
        let chord = 0.5 * (tx + ty);
        if mid > chord + CHECK_SLACK * chord.abs().max(1.0) {
            return Err(Error::Construction(format!(
                "{label}: midpoint convexity fails between {x} and {y}"
            )));
        }
    }
    Ok(RegularityModulus::new(label, tau))
}

/// `τ(ε) = π(ε/4, K/μ(ε/4))·μ(ε/4)/2`.
pub fn reg_from_ui(pi: &PointwiseLowerBound, k: f64, mu: &UiModulus) -> Result<RegularityModulus> {
    positive("K", k)?;
    let (pi, mu) = (pi.clone(), mu.clone());
    Ok(RegularityModulus::new(
        format!("ui(K={k}, pi={}, mu={})", pi.label(), mu.label()),
        move |e| {
            let m = mu.eval(e / 4.0);
            pi.eval(e / 4.0, k / m) * m / 2.0
        },
    ))
}

/// `τ(ε) = π(ε/2, K)·ε/(2K)` for `X ≤ K` almost surely.
pub fn reg_bounded(pi: &PointwiseLowerBound, k: f64) -> Result<RegularityModulus> {
    positive("K", k)?;
    let pi = pi.clone();
    Ok(RegularityModulus::new(
        format!("bounded(K={k}, pi={})", pi.label()),
        move |e| pi.eval(e / 2.0, k) * e / (2.0 * k),
    ))
}

/// `τ(ε) = (1−r)ε` for `F(x) = d(x, Tx)` with `d(Tx, z) ≤ r·d(x, z)`.
pub fn uniq_quasi_contraction(r: f64) -> Result<RegularityModulus> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain(format!("quasi-contraction constant must lie in [0,1), got {r}")));
    }
    Ok(RegularityModulus::new(format!("quasi-contraction:{r}"), move |e| (1.0 - r) * e))
}

/// Sharp minimum `f(x) ≥ min f + τ(d(x,z))`; with `quarter` the uniformly
/// quasiconvex variant `τ/4`.
pub fn uniq_sharp_min(tau: &RegularityModulus, quarter: bool) -> RegularityModulus {
    let t = tau.clone();
    if quarter {
        RegularityModulus::new(format!("sharp-min-quarter({})", t.label()), move |e| 0.25 * t.call(e))
    } else {
        t.relabel(format!("sharp-min({})", tau.label()))
    }
}

/// Strongly quasiconvex with parameter `μ`: `τ(ε) = (μ/8)ε²`.
pub fn uniq_strongly_quasiconvex(mu: f64) -> Result<RegularityModulus> {
    positive("mu", mu)?;
    Ok(RegularityModulus::new(
        format!("strongly-quasiconvex:{mu}"),
        move |e| mu / 8.0 * e * e,
    ))
}

/// Fréchet mean objective: `τ(ε) = ε²`.
pub fn uniq_frechet() -> RegularityModulus {
    RegularityModulus::new("frechet", |e| e * e)
}

/// `τ′(ε) = min{τ(ε/2)·γ̲, ε/2}` for `F′(x) = ‖x − J_{γ̲A}x‖`.
pub fn uniq_prox_transfer(tau: &RegularityModulus, gamma_lower: f64) -> Result<RegularityModulus> {
    positive("gamma_lower", gamma_lower)?;
    let t = tau.clone();
    Ok(RegularityModulus::new(
        format!("prox-transfer({gamma_lower}, {})", t.label()),
        move |e| (t.call(e / 2.0) * gamma_lower).min(e / 2.0),
    ))
}

/// Error bound `τ(f(x) − min f) ≥ d(x,z)` with concave `τ`: the caller
/// supplies `τ⁻¹` explicitly.
pub fn uniq_error_bound(
    label: impl Into<String>,
    inverse: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> RegularityModulus {
    RegularityModulus::new(label, inverse)
}
