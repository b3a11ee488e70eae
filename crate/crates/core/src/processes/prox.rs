use super::{coords, coords_mut, euclid, Constants, Process, RandomSource, Space, StatePoint};
use crate::error::{Error, Result};
use crate::moduli::{ceil_index, LiminfModulus, RegularityModulus};
use crate::rates::{rate_fejer, FejerRates};
use crate::regularity::uniq_prox_transfer;
use crate::schedule::Schedule;

/// `J_γ(x) = (x + γz)/(1+γ)`, the resolvent of `∂(½‖· − z‖²)`.
pub fn resolvent(x: &[f64], z: &[f64], gamma: f64) -> Vec<f64> {
    x.iter().zip(z).map(|(a, b)| (a + gamma * b) / (1.0 + gamma)).collect()
}

/// Noisy proximal point iteration `x_{n+1} = J_{γ_n}(x_n) + ε_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Prox {
    gamma: Schedule,
    gamma_lower: f64,
    noise: Schedule,
    z: Vec<f64>,
    x0: Vec<f64>,
}

impl Prox {
    pub fn new(gamma: Schedule, noise: Schedule, z: StatePoint, x0: StatePoint) -> Result<Self> {
        super::check_schedule("gamma", &gamma)?;
        super::check_schedule("noise_sd", &noise)?;
        let gamma_lower = match gamma {
            Schedule::Const(v) => v,
            _ => 0.0,
        };
        if !(gamma_lower > 0.0) {
            return Err(Error::config("gamma", "step sizes need a positive infimum"));
        }
        let (z, x0) = (euclid(&z, "z")?, euclid(&x0, "x0")?);
        if z.len() != x0.len() {
            return Err(Error::config("x0", "dimension differs from z"));
        }
        Ok(Prox { gamma, gamma_lower, noise, z, x0 })
    }

    pub fn gamma_lower(&self) -> f64 {
        self.gamma_lower
    }

    fn dim(&self) -> f64 {
        self.z.len() as f64
    }

    fn kd(&self) -> Result<f64> {
        let s2 = self
            .noise
            .sum_bound(self.dim(), 2.0)
            .map_err(|e| Error::config("noise_sd", e.to_string()))?;
        Ok(super::dist_sq(&self.x0, &self.z) + s2)
    }

    /// `Σ √E‖ε_n‖² = √dim·Σσ_n`.
    pub fn error_mass(&self) -> Result<f64> {
        self.noise
            .sum_bound(self.dim().sqrt(), 1.0)
            .map_err(|e| Error::config("noise_sd", e.to_string()))
    }

    pub fn window_mass(&self) -> Result<f64> {
        let (kd, m) = (self.kd()?, self.error_mass()?);
        Ok(kd + m * (2.0 * kd.sqrt() + 1.0))
    }

    /// Fejér rates for `φ = d` with liminf modulus `N + ⌈4L/ε²⌉` and the
    /// transferred modulus `min{τ(ε/2)γ̲, ε/2}`.
    pub fn fejer_rates(&self, tau: &RegularityModulus) -> Result<FejerRates> {
        if self.dim() * self.noise.sup().powi(2) > 1.0 {
            return Err(Error::config("noise_sd", "needs dim·σ_n² ≤ 1"));
        }
        let l = self.window_mass()?;
        let phi = LiminfModulus::new(format!("shift-inverse-sq:{}", 4.0 * l), move |e, n| {
            n.saturating_add(ceil_index(4.0 * l / (e * e)))
        });
        let chi = self.noise.tail_rate(self.dim().sqrt(), 1.0)?;
        let tau = uniq_prox_transfer(tau, self.gamma_lower)?;
        rate_fejer(&tau, 1.0, &chi, &phi, &RegularityModulus::identity())
    }
}

impl Process for Prox {
    fn name(&self) -> &'static str {
        "prox"
    }

    fn space(&self) -> Space {
        Space::Euclidean { dim: self.z.len() }
    }

    fn target(&self) -> StatePoint {
        StatePoint::Euclidean(self.z.clone())
    }

    fn initial(&self, _rng: &mut RandomSource) -> StatePoint {
        StatePoint::Euclidean(self.x0.clone())
    }

    fn step(&self, x: &mut StatePoint, n: u64, rng: &mut RandomSource) {
        let g = self.gamma.value(n);
        let sd = self.noise.value(n);
        for (v, z) in coords_mut(x).iter_mut().zip(&self.z) {
            *v = (*v + g * z) / (1.0 + g);
            if sd > 0.0 {
                *v += sd * rng.normal();
            }
        }
    }

    /// `‖x − J_{γ̲}x‖ = γ̲/(1+γ̲)·‖x − z‖`.
    fn functional(&self, x: &StatePoint) -> f64 {
        self.gamma_lower / (1.0 + self.gamma_lower) * self.target_dist(x)
    }

    fn dist_map(&self, x: &StatePoint, y: &StatePoint) -> f64 {
        super::dist_sq(coords(x), coords(y)).sqrt()
    }

    fn target_dist(&self, x: &StatePoint) -> f64 {
        super::dist_sq(coords(x), &self.z).sqrt()
    }

    fn future_dist_bound(&self, x: &StatePoint, n: u64) -> f64 {
        if self.noise.value(n) == 0.0 {
            self.target_dist(x)
        } else {
            f64::INFINITY
        }
    }

    fn constants(&self) -> Constants {
        let mut k = Constants::default();
        k.insert("K", 1.0);
        k.insert("gamma_lower", self.gamma_lower);
        if let (Ok(kd), Ok(m), Ok(l)) = (self.kd(), self.error_mass(), self.window_mass()) {
            k.insert("Kd", kd);
            k.insert("M", m);
            k.insert("L", l);
        }
        k
    }
}
