//! Closed-form rates of convergence, as executable functions.

use std::sync::Arc;

use crate::error::{nonnegative, positive, Error, Result};
use crate::moduli::{
    ceil_index, DivergenceRate, Index, LiminfModulus, RateAsFn, RateFn, RegularityModulus,
    SiccFunction, TailRate,
};

/// Mean rate `ρ` and almost-sure rate `ρ′` produced by one constructor.
#[derive(Clone, Debug)]
pub struct RateBundle {
    pub rho: RateFn,
    pub rho_as: RateAsFn,
    pub provenance: String,
}

fn check_k_ge_one(k: f64) -> Result<()> {
    if k >= 1.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("product bound K must be finite and ≥ 1, got {k}")))
    }
}

/// Data for the general rate: `Π(1+A_i) < K`, a tail rate `χ` for `Σ E[C_i]`,
/// the slowing function `f` and a liminf-modulus `φ` for `E[f(X_n)]`.
#[derive(Clone, Debug)]
pub struct GeneralSpec {
    pub k: f64,
    pub chi: TailRate,
    pub f: SiccFunction,
    pub liminf_mod: LiminfModulus,
}

/// `ρ(ε) = φ(ε′, χ(κ(ε′)))` with `ε′ = ε·ψ(1/K)/2`, and `ρ′(λ,ε) = ρ(λ·f(ε))`.
pub fn rate_general(spec: &GeneralSpec) -> Result<RateBundle> {
    check_k_ge_one(spec.k)?;
    let provenance = format!(
        "general(K={}, chi={}, f={}, phi={})",
        spec.k,
        spec.chi.label(),
        spec.f.label(),
        spec.liminf_mod.label()
    );
    let scale = spec.f.psi(1.0 / spec.k) / 2.0;
    let (chi, f, phi) = (spec.chi.clone(), spec.f.clone(), spec.liminf_mod.clone());
    let rho = RateFn::new(provenance.clone(), move |eps| {
        let e = eps * scale;
        let n = chi.call(f.kappa(e));
        phi.call(e, n).max(n)
    });
    Ok(bundle_with_f(rho, spec.f.clone(), provenance))
}

fn bundle_with_f(rho: RateFn, f: SiccFunction, provenance: String) -> RateBundle {
    let r = rho.clone();
    let rho_as = RateAsFn::new(provenance.clone(), move |lambda, eps| {
        r.call(lambda * f.eval_unchecked(eps))
    });
    RateBundle { rho, rho_as, provenance }
}

/// `(ε, N) ↦ φ_V(τ(ε), N)`.
pub fn compose_liminf(liminf_v: &LiminfModulus, tau: &RegularityModulus) -> LiminfModulus {
    let (phi, tau) = (liminf_v.clone(), tau.clone());
    LiminfModulus::new(
        format!("compose({}, {})", phi.label(), tau.label()),
        move |eps, n| phi.call(tau.call(eps), n).max(n),
    )
}

/// Bound `L·(K+M)` on `Σ β_i` for `x_{n+1} ≤ (1+α_n)x_n − β_n + γ_n`,
/// given `x_0 < K`, `Π(1+α_i) < L` and `Σ γ_i < M`.
pub fn qihou_sum_bound(init_bound: f64, prod_bound: f64, err_bound: f64) -> Result<f64> {
    positive("initial bound", init_bound)?;
    positive("product bound", prod_bound)?;
    nonnegative("error bound", err_bound)?;
    Ok(prod_bound * (init_bound + err_bound))
}

/// `(ε, N) ↦ θ(N, L/ε)` for `Σ u_n v_n < L`.
pub fn liminf_from_sum(theta: &DivergenceRate, l: f64) -> Result<LiminfModulus> {
    positive("L", l)?;
    let theta = theta.clone();
    Ok(LiminfModulus::new(
        format!("window({}, L={l})", theta.label()),
        move |eps, n| theta.call(n, l / eps).max(n),
    ))
}

/// Robbins-Siegmund data.
#[derive(Clone, Debug)]
pub struct RsSpec {
    /// `Π(1+a_i) < K`
    pub k: f64,
    /// `E[X_0] < L`
    pub l: f64,
    /// `Σ E[C_i] < M`
    pub m: f64,
    pub chi: TailRate,
    pub theta: DivergenceRate,
    pub tau: RegularityModulus,
    pub f: SiccFunction,
}

/// `ρ(ε) = θ(χ(κ(ε′)), K(L+M)/τ(ε′))` with `ε′ = ε·ψ(1/K)/2`.
pub fn rate_rs(spec: &RsSpec) -> Result<RateBundle> {
    check_k_ge_one(spec.k)?;
    positive("L", spec.l)?;
    nonnegative("M", spec.m)?;
    let provenance = format!(
        "rs(K={}, L={}, M={}, chi={}, theta={}, tau={}, f={})",
        spec.k,
        spec.l,
        spec.m,
        spec.chi.label(),
        spec.theta.label(),
        spec.tau.label(),
        spec.f.label()
    );
    let scale = spec.f.psi(1.0 / spec.k) / 2.0;
    let mass = spec.k * (spec.l + spec.m);
    let (chi, theta, tau, f) = (spec.chi.clone(), spec.theta.clone(), spec.tau.clone(), spec.f.clone());
    let rho = RateFn::new(provenance.clone(), move |eps| {
        let e = eps * scale;
        let start = chi.call(f.kappa(e));
        theta.call(start, mass / tau.call(e)).max(start)
    });
    Ok(bundle_with_f(rho, spec.f.clone(), provenance))
}

/// Envelope `u/(n+r)` for `x_{n+1} ≤ (1 − c/(n+r))x_n + d/(n+r)²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecurrenceBound {
    pub u: f64,
    pub r: u64,
    /// The envelope is proven only when `r ≥ c`; for smaller `r` the factor
    /// `1 − c/(n+r)` is negative at `n = 0` and the induction breaks.
    pub guaranteed: bool,
}

impl RecurrenceBound {
    pub fn bound(&self, n: u64) -> f64 {
        self.u / (n as f64 + self.r as f64)
    }
}

/// `u = max{d/(c−1), r·x_0}`.
pub fn recurrence_bound(c: f64, d: f64, r: u64, x0: f64) -> Result<RecurrenceBound> {
    if !(c > 1.0 && c.is_finite()) {
        return Err(Error::domain(format!("c must exceed 1, got {c}")));
    }
    nonnegative("d", d)?;
    nonnegative("x0", x0)?;
    if r == 0 {
        return Err(Error::domain("r must be at least 1"));
    }
    let u = (d / (c - 1.0)).max(r as f64 * x0);
    Ok(RecurrenceBound {
        u,
        r,
        guaranteed: r as f64 >= c,
    })
}

/// Data for linear rates under `E[C_n] ≤ d/(n+r)²` and `a_n + c/(n+r) ≤ t·u_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FastSpec {
    pub c: f64,
    pub d: f64,
    pub r: u64,
    pub t: f64,
    pub k: f64,
    pub l: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FastRate {
    pub u: f64,
    pub d: f64,
    pub r: u64,
    pub k: f64,
    pub guaranteed: bool,
}

impl FastRate {
    /// `E[X_n] ≤ u/(n+r)`
    pub fn mean_bound(&self, n: u64) -> f64 {
        self.u / (n as f64 + self.r as f64)
    }

    /// `P(∃m ≥ n: X_m ≥ ε) ≤ K(u+2d)/(ε(n+r))`, unclamped.
    pub fn exceed_bound(&self, n: u64, eps: f64) -> f64 {
        self.k * (self.u + 2.0 * self.d) / (eps * (n as f64 + self.r as f64))
    }

    pub fn exceed_bound_clamped(&self, n: u64, eps: f64) -> f64 {
        self.exceed_bound(n, eps).min(1.0)
    }
}

pub fn fast_rate_rs(spec: &FastSpec) -> Result<FastRate> {
    let rec = recurrence_bound(spec.c, spec.d, spec.r, spec.l)?;
    positive("t", spec.t)?;
    check_k_ge_one(spec.k)?;
    Ok(FastRate {
        u: rec.u,
        d: spec.d,
        r: spec.r,
        k: spec.k,
        guaranteed: rec.guaranteed,
    })
}

/// Dvoretzky data: bounds `A, B, C, M` on `sup a_n`, `Σ b_n`, `Σ c_n²`,
/// `Σ E‖y_n‖²`, rates for each, a divergence rate for `Σ c_n`, and bounds
/// `L_n ≥ E‖x_n‖²`.
#[derive(Clone)]
pub struct DvoretzkySpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub m: f64,
    /// `a_n < ε` for all `n ≥ varphi_a(ε)`
    pub varphi_a: TailRate,
    pub beta_b: TailRate,
    pub gamma_c: TailRate,
    pub mu_y: TailRate,
    pub theta: DivergenceRate,
    pub l_of: Arc<dyn Fn(Index) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for DvoretzkySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DvoretzkySpec")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("c", &self.c)
            .field("m", &self.m)
            .field("theta", &self.theta)
            .finish_non_exhaustive()
    }
}

/// Every intermediate quantity of one Dvoretzky rate evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DvoretzkyBreakdown {
    pub delta: f64,
    pub k_delta: f64,
    pub m_delta: f64,
    pub phi_index: Index,
    pub chi_arg: f64,
    pub chi_index: Index,
    pub start: Index,
    pub l_value: f64,
    pub theta_arg: f64,
    pub index: Index,
}

#[derive(Clone, Debug)]
pub struct DvoretzkyRate {
    spec: Arc<DvoretzkySpec>,
    pub rate: RateAsFn,
}

impl DvoretzkySpec {
    /// `K_δ = (1+B²)e^{δB}`
    pub fn k_delta(&self, delta: f64) -> f64 {
        (1.0 + self.b * self.b) * (delta * self.b).exp()
    }

    /// `M_δ = (1+δB)C + δ(1+δB)B + M`
    pub fn m_delta(&self, delta: f64) -> f64 {
        let g = 1.0 + delta * self.b;
        g * self.c + delta * g * self.b + self.m
    }

    /// `χ_δ(ε) = max{μ(ε/3), γ(ε/(3(1+δB))), β(ε/(3δ(1+δB)))}`; the last
    /// component is dropped when `B = 0`.
    pub fn chi_delta(&self, delta: f64, eps: f64) -> Index {
        let g = 1.0 + delta * self.b;
        let mut n = self.mu_y.call(eps / 3.0).max(self.gamma_c.call(eps / (3.0 * g)));
        if self.b > 0.0 {
            n = n.max(self.beta_b.call(eps / (3.0 * delta * g)));
        }
        n
    }

    fn breakdown(&self, lambda: f64, eps: f64) -> DvoretzkyBreakdown {
        let delta = eps / 2.0;
        let k_delta = self.k_delta(delta);
        let m_delta = self.m_delta(delta);
        let phi_index = self.varphi_a.call(delta);
        let chi_arg = lambda * lambda * eps / (4.0 * k_delta);
        let chi_index = self.chi_delta(delta, chi_arg);
        let start = chi_index.max(phi_index);
        let l_value = (self.l_of)(phi_index);
        let theta_arg = 2.0 * k_delta * k_delta.sqrt() * (l_value + m_delta) / (lambda * eps);
        let index = self.theta.call(start, theta_arg).max(start);
        DvoretzkyBreakdown {
            delta,
            k_delta,
            m_delta,
            phi_index,
            chi_arg,
            chi_index,
            start,
            l_value,
            theta_arg,
            index,
        }
    }
}

impl DvoretzkyRate {
    pub fn breakdown(&self, lambda: f64, eps: f64) -> Result<DvoretzkyBreakdown> {
        positive("lambda", lambda)?;
        positive("epsilon", eps)?;
        Ok(self.spec.breakdown(lambda, eps))
    }

    pub fn spec(&self) -> &DvoretzkySpec {
        &self.spec
    }
}

pub fn rate_dvoretzky(spec: DvoretzkySpec) -> Result<DvoretzkyRate> {
    nonnegative("A", spec.a)?;
    nonnegative("B", spec.b)?;
    nonnegative("C", spec.c)?;
    nonnegative("M", spec.m)?;
    let provenance = format!(
        "dvoretzky(A={}, B={}, C={}, M={}, phi={}, beta={}, gamma={}, mu={}, theta={})",
        spec.a,
        spec.b,
        spec.c,
        spec.m,
        spec.varphi_a.label(),
        spec.beta_b.label(),
        spec.gamma_c.label(),
        spec.mu_y.label(),
        spec.theta.label()
    );
    let spec = Arc::new(spec);
    let s = spec.clone();
    let rate = RateAsFn::new(provenance, move |lambda, eps| s.breakdown(lambda, eps).index);
    Ok(DvoretzkyRate { spec, rate })
}

/// Mean rate, almost-sure rate for `φ(x_n,z)`, and almost-sure metric rate.
#[derive(Clone, Debug)]
pub struct FejerRates {
    pub rho: RateFn,
    pub rho_as: RateAsFn,
    pub rho_metric: RateAsFn,
    pub provenance: String,
}

/// `ρ(ε) = φ(τ(ε/2K), χ(ε/2K))`, `ρ′(λ,ε) = ρ(λε)`, metric rate `ρ′(λ, κ(ε))`.
pub fn rate_fejer(
    tau: &RegularityModulus,
    k: f64,
    chi: &TailRate,
    liminf_mod: &LiminfModulus,
    consistency: &RegularityModulus,
) -> Result<FejerRates> {
    positive("K", k)?;
    let provenance = format!(
        "fejer(K={k}, tau={}, chi={}, phi={}, kappa={})",
        tau.label(),
        chi.label(),
        liminf_mod.label(),
        consistency.label()
    );
    let (tau, chi, phi) = (tau.clone(), chi.clone(), liminf_mod.clone());
    let rho = RateFn::new(provenance.clone(), move |eps| {
        let e = eps / (2.0 * k);
        let n = chi.call(e);
        phi.call(tau.call(e), n).max(n)
    });
    let r1 = rho.clone();
    let rho_as = RateAsFn::new(provenance.clone(), move |lambda, eps| r1.call(lambda * eps));
    let r2 = rho.clone();
    let kappa = consistency.clone();
    let rho_metric = RateAsFn::new(provenance.clone(), move |lambda, eps| {
        r2.call(lambda * kappa.call(eps))
    });
    Ok(FejerRates {
        rho,
        rho_as,
        rho_metric,
        provenance,
    })
}

/// Robbins-Monro data.
#[derive(Clone, Debug)]
pub struct RmSpec {
    /// `E[‖y_n‖² | F_n] ≤ c‖x_n − z‖² + d_n`
    pub c: f64,
    pub d: f64,
    /// `‖x_0 − z‖² < L`
    pub l: f64,
    /// `Σ a_n² < M`
    pub m: f64,
    pub theta: DivergenceRate,
    pub chi: TailRate,
    pub tau: RegularityModulus,
    pub f: SiccFunction,
}

impl RmSpec {
    fn validate(&self) -> Result<()> {
        nonnegative("c", self.c)?;
        nonnegative("d", self.d)?;
        positive("L", self.l)?;
        nonnegative("M", self.m)?;
        Ok(())
    }

    fn k2(&self) -> f64 {
        (self.c * self.m).exp() * (self.l + self.d * self.m)
    }

    fn label(&self, name: &str) -> String {
        format!(
            "{name}(c={}, d={}, L={}, M={}, theta={}, chi={}, tau={}, f={})",
            self.c,
            self.d,
            self.l,
            self.m,
            self.theta.label(),
            self.chi.label(),
            self.tau.label(),
            self.f.label()
        )
    }
}

fn chi_over_d(chi: &TailRate, arg: f64, d: f64) -> Index {
    if d == 0.0 {
        0
    } else {
        chi.call(arg / d)
    }
}

/// `ρ(ε) = θ(χ(κ(K₁ε)/d), K₂/τ(K₁ε))` with `K₁ = ψ(e^{−cM})/2`,
/// `K₂ = e^{cM}(L + dM)`; `ρ′(λ,ε) = ρ(λ·f(ε²))`.
pub fn rate_rm(spec: &RmSpec) -> Result<RateBundle> {
    spec.validate()?;
    let provenance = spec.label("rm");
    let k1 = 0.5 * spec.f.psi((-spec.c * spec.m).exp());
    let k2 = spec.k2();
    let s = spec.clone();
    let rho = RateFn::new(provenance.clone(), move |eps| {
        let e = k1 * eps;
        let start = chi_over_d(&s.chi, s.f.kappa(e), s.d);
        s.theta.call(start, k2 / s.tau.call(e)).max(start)
    });
    let r = rho.clone();
    let f = spec.f.clone();
    let rho_as = RateAsFn::new(provenance.clone(), move |lambda, eps| {
        r.call(lambda * f.eval_unchecked(eps * eps))
    });
    Ok(RateBundle { rho, rho_as, provenance })
}

/// Square-root specialisation: `K₁ = e^{−cM/2}/2`,
/// `ρ(ε) = θ(χ((K₁ε)²/d), K₂/τ(K₁ε))`, `ρ′(λ,ε) = ρ(λε)`.
pub fn rate_rm_sqrt(spec: &RmSpec) -> Result<RateBundle> {
    spec.validate()?;
    let provenance = spec.label("rm-sqrt");
    let k1 = 0.5 * (-spec.c * spec.m / 2.0).exp();
    let k2 = spec.k2();
    let s = spec.clone();
    let rho = RateFn::new(provenance.clone(), move |eps| {
        let e = k1 * eps;
        let start = chi_over_d(&s.chi, e * e, s.d);
        s.theta.call(start, k2 / s.tau.call(e)).max(start)
    });
    let r = rho.clone();
    let rho_as = RateAsFn::new(provenance.clone(), move |lambda, eps| r.call(lambda * eps));
    Ok(RateBundle { rho, rho_as, provenance })
}

/// `K₁` of [`rate_rm_sqrt`].
pub fn rm_sqrt_k1(c: f64, m: f64) -> f64 {
    0.5 * (-c * m / 2.0).exp()
}

/// Linear rates for Robbins-Monro on a `β`-strongly monotone field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StronglyMonotoneRate {
    pub beta: f64,
    pub r: u64,
    pub u: f64,
    pub fast: FastRate,
}

impl StronglyMonotoneRate {
    /// `a_n = 1/(β(n+r))`
    pub fn step(&self, n: u64) -> f64 {
        1.0 / (self.beta * (n as f64 + self.r as f64))
    }

    pub fn mean_bound(&self, n: u64) -> f64 {
        self.u / (n as f64 + self.r as f64)
    }

    pub fn exceed_bound(&self, n: u64, eps: f64) -> f64 {
        self.fast.exceed_bound(n, eps)
    }

    pub fn exceed_bound_clamped(&self, n: u64, eps: f64) -> f64 {
        self.fast.exceed_bound_clamped(n, eps)
    }

    /// Whether the underlying recurrence envelope is proven (`r ≥ 3/2`).
    pub fn guaranteed(&self) -> bool {
        self.fast.guaranteed
    }
}

/// `u = max{2d/β, 2d/β², rL}`; the exceedance bound is the linear-rate bound
/// with `c = 3/2`, error constant `d/β²` and `t = β`.
pub fn fast_rate_strongly_monotone(
    beta: f64,
    c: f64,
    d: f64,
    r: u64,
    l: f64,
    k: f64,
) -> Result<StronglyMonotoneRate> {
    positive("beta", beta)?;
    nonnegative("c", c)?;
    nonnegative("d", d)?;
    nonnegative("L", l)?;
    let need = ceil_index(2.0 * c / (beta * beta));
    if (r as Index) < need || r == 0 {
        return Err(Error::precondition(format!(
            "r = {r} is below max(1, ⌈2c/β²⌉) = {}",
            need.max(1)
        )));
    }
    let u = (2.0 * d / beta).max(2.0 * d / (beta * beta)).max(r as f64 * l);
    let mut fast = fast_rate_rs(&FastSpec {
        c: 1.5,
        d: d / (beta * beta),
        r,
        t: beta,
        k,
        l,
    })?;
    fast.u = u;
    Ok(StronglyMonotoneRate { beta, r, u, fast })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::sicc_identity;

    fn theta_unit() -> DivergenceRate {
        DivergenceRate::linear(1.0)
    }

    #[test]
    fn general_collapses_with_trivial_moduli() {
        let spec = GeneralSpec {
            k: 1.0,
            chi: TailRate::zero(),
            f: sicc_identity(),
            liminf_mod: LiminfModulus::identity(),
        };
        let b = rate_general(&spec).unwrap();
        for e in [1.0, 0.1, 1e-6] {
            assert_eq!(b.rho.eval(e).unwrap(), 0);
        }
    }

    #[test]
    fn rs_first_example() {
        let spec = RsSpec {
            k: 1.0,
            l: 1.0,
            m: 0.0,
            chi: TailRate::zero(),
            theta: theta_unit(),
            tau: RegularityModulus::identity(),
            f: sicc_identity(),
        };
        let b = rate_rs(&spec).unwrap();
        assert_eq!(b.rho.eval(0.1).unwrap(), 20);
        assert_eq!(b.rho_as.eval(0.5, 0.1).unwrap(), 40);
    }

    #[test]
    fn strongly_monotone_precondition() {
        assert!(matches!(
            fast_rate_strongly_monotone(1.0, 2.0, 1.0, 3, 1.0, 1.0),
            Err(Error::Precondition(_))
        ));
        assert!(fast_rate_strongly_monotone(1.0, 2.0, 1.0, 4, 1.0, 1.0).is_ok());
    }
}
