use super::geometry::{dist, move_toward};
use super::{Constants, Process, RandomSource, Space, StatePoint};
use crate::error::{Error, Result};
use crate::moduli::{LiminfModulus, RegularityModulus};
use crate::rates::{rate_fejer, FejerRates};
use crate::schedule::Schedule;

/// Noisy Krasnoselskii-Mann iteration `x_{n+1} = (1−λ_n)x_n ⊕ λ_n y_n` for
/// the contraction `T(x) = r·x` towards the origin, with
/// `d(y_n, Tx_n) ≤ 3σ_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Km {
    r: f64,
    lambda: Schedule,
    noise: Schedule,
    space: Space,
    x0: StatePoint,
}

impl Km {
    pub fn new(r: f64, lambda: Schedule, noise: Schedule, space: Space, x0: StatePoint) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::config("contraction_r", format!("must lie in [0,1), got {r}")));
        }
        super::check_schedule("lambda", &lambda)?;
        if lambda.sup() > 1.0 {
            return Err(Error::config("lambda", "values must lie in [0,1]"));
        }
        super::check_schedule("noise_sd", &noise)?;
        space.contains(&x0).map_err(|e| Error::config("x0", e.to_string()))?;
        Ok(Km { r, lambda, noise, space, x0 })
    }

    pub fn contraction(&self) -> f64 {
        self.r
    }

    /// `T(x)`.
    pub fn apply_t(&self, x: &StatePoint) -> StatePoint {
        match x {
            StatePoint::Euclidean(v) => StatePoint::Euclidean(v.iter().map(|c| self.r * c).collect()),
            StatePoint::Star { leg, t } => StatePoint::star(*leg, self.r * t),
        }
    }

    fn radius(&self, x: &StatePoint) -> f64 {
        dist(x, &self.space.origin())
    }

    /// `Σ λ_n·3σ_n ≤ sup λ · 3Σσ_n`.
    pub fn error_mass(&self) -> Result<f64> {
        self.noise
            .sum_bound(3.0 * self.lambda.sup(), 1.0)
            .map_err(|e| Error::config("noise_sd", e.to_string()))
    }

    /// Deterministic bound `L` on `Σ λ_n(1−λ_n)E[d²(x_n, Tx_n)]`.
    pub fn window_mass(&self) -> Result<f64> {
        let m = self.error_mass()?;
        let kd = (self.radius(&self.x0) + m).powi(2);
        Ok(kd + m * (4.0 * kd.sqrt() + 1.0))
    }

    fn divergence(&self) -> Result<crate::moduli::DivergenceRate> {
        match self.lambda {
            Schedule::Const(v) => Schedule::Const(v * (1.0 - v)).divergence_rate(1.0),
            s if s.sup() < 1.0 => s.divergence_rate(1.0 - s.sup()),
            _ => Err(Error::config("lambda", "needs sup λ < 1 for a divergence rate of λ(1−λ)")),
        }
    }

    /// Fejér rates for `φ = d`, `ζ = 0`, `ξ_n = 3λ_nσ_n` and the liminf
    /// modulus `(ε, N) ↦ θ(N, L/ε²)` for `E[d(x_n, Tx_n)]`.
    pub fn fejer_rates(&self, tau: &RegularityModulus) -> Result<FejerRates> {
        if 3.0 * self.noise.sup() > 1.0 {
            return Err(Error::config("noise_sd", "needs 3σ_n ≤ 1"));
        }
        let l = self.window_mass()?;
        let theta = self.divergence()?;
        let phi = LiminfModulus::new(format!("window({}, L={l}, sq)", theta.label()), move |e, n| {
            theta.eval(n, l / (e * e)).unwrap_or(crate::moduli::INDEX_MAX)
        });
        let chi = self.noise.tail_rate(3.0 * self.lambda.sup(), 1.0)?;
        rate_fejer(tau, 1.0, &chi, &phi, &RegularityModulus::identity())
    }
}

impl Process for Km {
    fn name(&self) -> &'static str {
        "km"
    }

    fn space(&self) -> Space {
        self.space
    }

    fn target(&self) -> StatePoint {
        self.space.origin()
    }

    fn initial(&self, _rng: &mut RandomSource) -> StatePoint {
        self.x0.clone()
    }

    fn step(&self, x: &mut StatePoint, n: u64, rng: &mut RandomSource) {
        let sd = self.noise.value(n);
        let mut y = self.apply_t(x);
        if sd > 0.0 {
            match &mut y {
                StatePoint::Euclidean(v) => {
                    let cap = 3.0 * sd / (v.len() as f64).sqrt();
                    for c in v.iter_mut() {
                        *c += (sd * rng.normal()).clamp(-cap, cap);
                    }
                }
                StatePoint::Star { leg, t } => {
                    let e = (sd * rng.normal()).clamp(-3.0 * sd, 3.0 * sd);
                    y = StatePoint::star(*leg, (*t + e).max(0.0));
                }
            }
        }
        move_toward(x, &y, self.lambda.value(n));
    }

    /// `d(x, Tx) = (1−r)·d(x, 0)`.
    fn functional(&self, x: &StatePoint) -> f64 {
        (1.0 - self.r) * self.radius(x)
    }

    fn dist_map(&self, x: &StatePoint, y: &StatePoint) -> f64 {
        dist(x, y)
    }

    fn target_dist(&self, x: &StatePoint) -> f64 {
        self.radius(x)
    }

    fn future_dist_bound(&self, x: &StatePoint, n: u64) -> f64 {
        self.radius(x) + self.noise.tail_sum_quick(3.0 * self.lambda.sup(), 1.0, n)
    }

    fn constants(&self) -> Constants {
        let mut k = Constants::default();
        k.insert("r", self.r);
        k.insert("K", 1.0);
        k.insert("d0", self.radius(&self.x0));
        if let (Ok(m), Ok(l)) = (self.error_mass(), self.window_mass()) {
            k.insert("M", m);
            k.insert("Kd", (self.radius(&self.x0) + m).powi(2));
            k.insert("L", l);
        }
        k
    }
}
