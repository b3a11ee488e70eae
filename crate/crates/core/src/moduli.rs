//! Subadditive increasing continuous concave (s.i.c.c.) functions and the
//! function types used for rates and moduli.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{positive, Error, Result};

/// Iteration index produced by rate functions. Rates built from exponential
/// divergence moduli routinely exceed `u64`, so indices are 128-bit.
pub type Index = u128;

/// Saturation value for indices that do not fit (or are infinite).
pub const INDEX_MAX: Index = u128::MAX;

/// Rounds a real-valued index up. NaN and +inf saturate at [`INDEX_MAX`],
/// nonpositive values map to 0.
pub fn ceil_index(x: f64) -> Index {
    if x.is_nan() {
        INDEX_MAX
    } else if x <= 0.0 {
        0
    } else {
        x.ceil() as Index
    }
}

/// Largest index not above `x`, with the same saturation rules as [`ceil_index`].
pub fn floor_index(x: f64) -> Index {
    if x.is_nan() {
        INDEX_MAX
    } else if x <= 0.0 {
        0
    } else {
        x.floor() as Index
    }
}

type Real1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An s.i.c.c. function `f` with its supermultiplicativity modulus `psi`
/// (`f(x·a) ≥ f(x)·psi(a)`) and continuity modulus `kappa`
/// (`x < kappa(ε) ⇒ f(x) < ε`).
#[derive(Clone)]
pub struct SiccFunction {
    eval: Real1,
    psi: Real1,
    kappa: Real1,
    label: String,
}

impl SiccFunction {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        psi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        kappa: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SiccFunction {
            eval: Arc::new(eval),
            psi: Arc::new(psi),
            kappa: Arc::new(kappa),
            label: label.into(),
        }
    }

    /// Evaluates `f(x)`; negative (or NaN) inputs are rejected.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x >= 0.0 {
            Ok((self.eval)(x))
        } else {
            Err(Error::domain(format!("{} evaluated at {x} < 0", self.label)))
        }
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn psi(&self, a: f64) -> f64 {
        (self.psi)(a)
    }

    pub fn kappa(&self, eps: f64) -> f64 {
        (self.kappa)(eps)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for SiccFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SiccFunction").field(&self.label).finish()
    }
}

/// `x ↦ x^q` for `q ∈ (0, 1]`, with `psi(a) = a^q` and `kappa(ε) = ε^{1/q}`.
pub fn sicc_power(q: f64) -> Result<SiccFunction> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::domain(format!("power exponent must lie in (0,1], got {q}")));
    }
    if q == 1.0 {
        return Ok(sicc_identity());
    }
    Ok(SiccFunction::new(
        format!("power:{q}"),
        move |x| x.powf(q),
        move |a| a.powf(q),
        move |e| e.powf(1.0 / q),
    ))
}

pub fn sicc_identity() -> SiccFunction {
    SiccFunction::new("id", |x| x, |a| a, |e| e)
}

pub fn sicc_sqrt() -> SiccFunction {
    SiccFunction::new("power:0.5", f64::sqrt, f64::sqrt, |e| e * e)
}

/// `x ↦ log_c(1 + x)` for `c > 1`, with `psi(a) = a` and `kappa(ε) = c^ε − 1`.
pub fn sicc_log(c: f64) -> Result<SiccFunction> {
    if !(c > 1.0 && c.is_finite()) {
        return Err(Error::domain(format!("log base must exceed 1, got {c}")));
    }
    let ln_c = c.ln();
    Ok(SiccFunction::new(
        format!("log:{c}"),
        move |x| x.ln_1p() / ln_c,
        |a| a,
        move |e| (e * ln_c).exp_m1(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Combine {
    /// `α·f + β·g`
    Sum { alpha: f64, beta: f64 },
    /// `f ∘ g`
    Compose,
    /// `min{f, g}`
    Min,
}

/// Closure operations preserving the s.i.c.c. class together with moduli.
pub fn sicc_combine(kind: Combine, f: &SiccFunction, g: &SiccFunction) -> Result<SiccFunction> {
    let (f, g) = (f.clone(), g.clone());
    match kind {
        Combine::Sum { alpha, beta } => {
            positive("alpha", alpha)?;
            positive("beta", beta)?;
            let label = format!("sum({alpha}*{}, {beta}*{})", f.label, g.label);
            let (f1, g1) = (f.clone(), g.clone());
            let (f2, g2) = (f.clone(), g.clone());
            Ok(SiccFunction::new(
                label,
                move |x| alpha * f1.eval_unchecked(x) + beta * g1.eval_unchecked(x),
                move |a| f2.psi(a).min(g2.psi(a)),
                move |e| f.kappa(e / (2.0 * alpha)).min(g.kappa(e / (2.0 * beta))),
            ))
        }
        Combine::Compose => {
            let label = format!("compose({}, {})", f.label, g.label);
            let (f1, g1) = (f.clone(), g.clone());
            let (f2, g2) = (f.clone(), g.clone());
            Ok(SiccFunction::new(
                label,
                move |x| f1.eval_unchecked(g1.eval_unchecked(x)),
                move |a| f2.psi(g2.psi(a)),
                move |e| g.kappa(f.kappa(e)),
            ))
        }
        Combine::Min => {
            let label = format!("min({}, {})", f.label, g.label);
            let (f1, g1) = (f.clone(), g.clone());
            let (f2, g2) = (f.clone(), g.clone());
            Ok(SiccFunction::new(
                label,
                move |x| f1.eval_unchecked(x).min(g1.eval_unchecked(x)),
                move |a| f2.psi(a).min(g2.psi(a)),
                move |e| f.kappa(e).max(g.kappa(e)),
            ))
        }
    }
}

/// Additive slack for the sampled s.i.c.c. checks, scaled by `max(1, |value|)`.
pub const SICC_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub samples: usize,
    pub violations: usize,
    /// Largest observed violation magnitude (0 when none).
    pub worst_violation: f64,
}

impl PropertyCheck {
    fn new(name: &'static str) -> Self {
        PropertyCheck {
            name,
            samples: 0,
            violations: 0,
            worst_violation: 0.0,
        }
    }

    fn record(&mut self, excess: f64, violated: bool) {
        self.samples += 1;
        if violated {
            self.violations += 1;
            self.worst_violation = self.worst_violation.max(excess);
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub label: String,
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(PropertyCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn slack(v: f64) -> f64 {
    SICC_SLACK * v.abs().max(1.0)
}

/// Samples `x` uniformly on `[0, bound]` half of the time and log-uniformly
/// on `[1e-9, bound]` otherwise, so that behaviour near zero is exercised.
fn sample_point(rng: &mut ChaCha8Rng, bound: f64) -> f64 {
    if rng.random::<bool>() {
        rng.random::<f64>() * bound
    } else {
        let (lo, hi) = (1e-9f64.ln(), bound.ln());
        (lo + rng.random::<f64>() * (hi - lo)).exp()
    }
}

/// Checks every [`SiccFunction`] invariant on seeded random samples:
/// `x, y ∈ [0, domain_bound]`, `a ∈ [0, 1]`, `ε ∈ (0, 10]`.
pub fn verify_sicc(f: &SiccFunction, samples: usize, domain_bound: f64, seed: u64) -> PropertyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zero = PropertyCheck::new("zero");
    let mut mono = PropertyCheck::new("strictly-increasing");
    let mut concave = PropertyCheck::new("midpoint-concavity");
    let mut supermult = PropertyCheck::new("supermultiplicativity");
    let mut psi_pos = PropertyCheck::new("psi-positive");
    let mut cont = PropertyCheck::new("continuity-at-zero");

    let f0 = f.eval_unchecked(0.0);
    zero.record(f0.abs(), f0.abs() > SICC_SLACK || f0.is_nan());

    for _ in 0..samples.max(1) {
        let (mut x, mut y) = (sample_point(&mut rng, domain_bound), sample_point(&mut rng, domain_bound));
        if x > y {
            std::mem::swap(&mut x, &mut y);
        }
        if x < y {
            let (fx, fy) = (f.eval_unchecked(x), f.eval_unchecked(y));
            mono.record(fx - fy, fx >= fy || fx.is_nan() || fy.is_nan());
        }

        let (fx, fy) = (f.eval_unchecked(x), f.eval_unchecked(y));
        let lhs = f.eval_unchecked(0.5 * (x + y));
        let rhs = 0.5 * (fx + fy);
        concave.record(rhs - lhs, lhs < rhs - slack(rhs) || lhs.is_nan());

        let a: f64 = rng.random();
        let lhs = f.eval_unchecked(x * a);
        let rhs = fx * f.psi(a);
        supermult.record(rhs - lhs, lhs < rhs - slack(rhs) || lhs.is_nan());
        if a > 0.0 {
            let p = f.psi(a);
            psi_pos.record(-p, !(p > 0.0));
        }

        let eps = 10.0 * (1.0 - rng.random::<f64>());
        let k = f.kappa(eps);
        for xs in [k * rng.random::<f64>(), k.next_down().max(0.0)] {
            if xs < k {
                let v = f.eval_unchecked(xs);
                cont.record(v - eps, !(v < eps + slack(eps)));
            }
        }
    }

    PropertyReport {
        label: f.label.clone(),
        checks: vec![zero, mono, concave, supermult, psi_pos, cont],
    }
}

macro_rules! labelled_fn {
    ($(#[$meta:meta])* $name:ident, ($($arg:ident: $ty:ty),*) -> $out:ty) => {
        $(#[$meta])*
        #[derive(Clone)]
        pub struct $name {
            f: Arc<dyn Fn($($ty),*) -> $out + Send + Sync>,
            label: String,
        }

        impl $name {
            pub fn new(
                label: impl Into<String>,
                f: impl Fn($($ty),*) -> $out + Send + Sync + 'static,
            ) -> Self {
                $name { f: Arc::new(f), label: label.into() }
            }

            pub fn label(&self) -> &str {
                &self.label
            }

            pub(crate) fn call(&self, $($arg: $ty),*) -> $out {
                (self.f)($($arg),*)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_tuple(stringify!($name)).field(&self.label).finish()
            }
        }
    };
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {v}")))
    }
}

labelled_fn!(
    /// Mean rate `ρ: ε ↦ index`.
    RateFn, (eps: f64) -> Index
);
labelled_fn!(
    /// Almost-sure rate `ρ′: (λ, ε) ↦ index`.
    RateAsFn, (lambda: f64, eps: f64) -> Index
);
labelled_fn!(
    /// liminf-modulus `φ: (ε, N) ↦ index ≥ N`.
    LiminfModulus, (eps: f64, n: Index) -> Index
);
labelled_fn!(
    /// Rate of divergence `θ: (k, b) ↦ index ≥ k` with `Σ_{n=k}^{θ(k,b)} u_n ≥ b`.
    DivergenceRate, (k: Index, b: f64) -> Index
);
labelled_fn!(
    /// Tail rate `χ: ε ↦ index` with `Σ_{n≥χ(ε)} c_n < ε`.
    TailRate, (eps: f64) -> Index
);
labelled_fn!(
    /// Regularity modulus `τ: ε ↦ δ > 0`.
    RegularityModulus, (eps: f64) -> f64
);

impl RateFn {
    pub fn eval(&self, eps: f64) -> Result<Index> {
        check_pos("epsilon", eps)?;
        Ok(self.call(eps))
    }
}

impl RateAsFn {
    pub fn eval(&self, lambda: f64, eps: f64) -> Result<Index> {
        check_pos("lambda", lambda)?;
        check_pos("epsilon", eps)?;
        Ok(self.call(lambda, eps))
    }
}

impl LiminfModulus {
    pub fn eval(&self, eps: f64, n: Index) -> Result<Index> {
        check_pos("epsilon", eps)?;
        Ok(self.call(eps, n).max(n))
    }

    /// `(ε, N) ↦ N`: every index is a witness.
    pub fn identity() -> Self {
        LiminfModulus::new("identity", |_, n| n)
    }

    /// `(ε, N) ↦ N + ⌈c/ε⌉`.
    pub fn shift_inverse(c: f64) -> Self {
        LiminfModulus::new(format!("shift-inverse:{c}"), move |e, n| {
            n.saturating_add(ceil_index(c / e))
        })
    }

    /// Modulus for a sequence with `E[f(X_n)] ≤ C·η^n`.
    pub fn geometric(c: f64, eta: f64) -> Self {
        LiminfModulus::new(format!("geometric:{c},{eta}"), move |e, n| {
            let first = if c < e {
                0
            } else {
                floor_index((e / c).ln() / eta.ln()).saturating_add(1)
            };
            n.max(first)
        })
    }
}

impl DivergenceRate {
    pub fn eval(&self, k: Index, b: f64) -> Result<Index> {
        if b.is_nan() {
            return Err(Error::domain("divergence target is NaN"));
        }
        if b <= 0.0 {
            return Ok(k);
        }
        Ok(self.call(k, b).max(k))
    }

    /// `(k, b) ↦ k + ⌈b/c⌉`, valid whenever `u_n ≥ c` for all `n`.
    pub fn linear(c: f64) -> Self {
        DivergenceRate::new(format!("linear:{c}"), move |k, b| {
            k.saturating_add(ceil_index(b / c))
        })
    }
}

impl TailRate {
    pub fn eval(&self, eps: f64) -> Result<Index> {
        check_pos("epsilon", eps)?;
        Ok(self.call(eps))
    }

    /// The tail of an identically vanishing series.
    pub fn zero() -> Self {
        TailRate::new("zero", |_| 0)
    }

    /// `ε ↦ ⌈c/ε⌉`.
    pub fn inverse(c: f64) -> Self {
        TailRate::new(format!("inverse:{c}"), move |e| ceil_index(c / e))
    }
}

impl RegularityModulus {
    pub fn eval(&self, eps: f64) -> Result<f64> {
        check_pos("epsilon", eps)?;
        Ok(self.call(eps))
    }

    pub fn identity() -> Self {
        RegularityModulus::new("id", |e| e)
    }

    /// `ε ↦ a·ε^p`.
    pub fn poly(a: f64, p: f64) -> Self {
        let label = match (a == 1.0, p == 1.0) {
            (true, true) => "id".to_string(),
            (true, false) => format!("power:{p}"),
            (false, true) => format!("linear:{a}"),
            (false, false) => format!("poly:{a},{p}"),
        };
        RegularityModulus::new(label, move |e| a * e.powf(p))
    }

    pub(crate) fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_index_saturates() {
        assert_eq!(ceil_index(f64::INFINITY), INDEX_MAX);
        assert_eq!(ceil_index(f64::NAN), INDEX_MAX);
        assert_eq!(ceil_index(-3.0), 0);
        assert_eq!(ceil_index(2.0), 2);
        assert_eq!(ceil_index(2.000001), 3);
        assert_eq!(ceil_index(1e30), 1_000_000_000_000_000_019_884_624_838_656);
    }

    #[test]
    fn negative_input_is_rejected() {
        assert!(matches!(sicc_identity().eval(-1.0), Err(Error::Domain(_))));
        assert!(sicc_identity().eval(0.0).is_ok());
    }

    #[test]
    fn geometric_liminf_first_index() {
        let phi = LiminfModulus::geometric(0.5, 0.5);
        // 0.5^(n+1) < 0.1 first at n = 3
        assert_eq!(phi.eval(0.1, 0).unwrap(), 3);
        assert_eq!(phi.eval(0.1, 7).unwrap(), 7);
        assert_eq!(phi.eval(0.6, 0).unwrap(), 0);
    }
}
