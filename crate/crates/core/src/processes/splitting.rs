use super::geometry::{dist, move_toward};
use super::{Constants, Process, RandomSource, Space, StatePoint};
use crate::error::{Error, Result};
use crate::moduli::{LiminfModulus, RegularityModulus};
use crate::rates::{rate_fejer, FejerRates};
use crate::schedule::Schedule;

/// Geodesic parameter of the proximal step of `y ↦ w·d²(y, a)` with step `λ`.
pub fn prox_parameter(lambda: f64, w: f64) -> f64 {
    2.0 * lambda * w / (1.0 + 2.0 * lambda * w)
}

/// Minimiser of `Σ w_i d²(·, a_i)` on Euclidean space or a star tree.
pub fn frechet_mean(space: Space, anchors: &[(StatePoint, f64)]) -> StatePoint {
    match space {
        Space::Euclidean { dim } => {
            let mut m = vec![0.0; dim];
            for (a, w) in anchors {
                for (mi, ai) in m.iter_mut().zip(super::coords(a)) {
                    *mi += w * ai;
                }
            }
            StatePoint::Euclidean(m)
        }
        // On leg ℓ the objective is a parabola in t with vertex
        // S_ℓ = Σ_{on ℓ} w t − Σ_{off ℓ} w t; at most one S_ℓ is positive.
        Space::Star { legs } => {
            let total: f64 = anchors
                .iter()
                .map(|(a, w)| match a {
                    StatePoint::Star { t, .. } => w * t,
                    _ => 0.0,
                })
                .sum();
            for leg in 0..legs {
                let on: f64 = anchors
                    .iter()
                    .map(|(a, w)| match a {
                        StatePoint::Star { leg: l, t } if *l == leg => w * t,
                        _ => 0.0,
                    })
                    .sum();
                let s = 2.0 * on - total;
                if s > 0.0 {
                    return StatePoint::star(leg, s);
                }
            }
            StatePoint::star(0, 0.0)
        }
    }
}

/// Random-order proximal splitting for `f = Σ w_i d²(·, a_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Splitting {
    anchors: Vec<(StatePoint, f64)>,
    lambda: Schedule,
    space: Space,
    x0: StatePoint,
    mean: StatePoint,
    min_value: f64,
}

impl Splitting {
    pub fn new(anchors: Vec<(StatePoint, f64)>, lambda: Schedule, space: Space, x0: StatePoint) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::config("anchors", "need at least one anchor"));
        }
        for (a, w) in &anchors {
            space.contains(a).map_err(|e| Error::config("anchors", e.to_string()))?;
            if !(*w > 0.0 && w.is_finite()) {
                return Err(Error::config("weights", format!("weights must be positive, got {w}")));
            }
        }
        let total: f64 = anchors.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::config("weights", format!("weights sum to {total}, expected 1")));
        }
        super::check_schedule("lambda", &lambda)?;
        if lambda.is_zero() {
            return Err(Error::config("lambda", "step sizes must be positive"));
        }
        space.contains(&x0).map_err(|e| Error::config("x0", e.to_string()))?;
        let mean = frechet_mean(space, &anchors);
        let mut s = Splitting { anchors, lambda, space, x0, mean, min_value: 0.0 };
        s.min_value = s.objective(&s.mean);
        Ok(s)
    }

    pub fn mean(&self) -> &StatePoint {
        &self.mean
    }

    pub fn objective(&self, x: &StatePoint) -> f64 {
        self.anchors.iter().map(|(a, w)| w * dist(x, a).powi(2)).sum()
    }

    /// Diameter of the start point and anchors; iterates never leave their hull.
    pub fn diameter(&self) -> f64 {
        let mut pts: Vec<&StatePoint> = self.anchors.iter().map(|(a, _)| a).collect();
        pts.push(&self.x0);
        self.space.diameter(&pts)
    }

    /// Lipschitz constant `2D·max w` of the summands on the hull.
    pub fn lipschitz(&self) -> f64 {
        let wmax = self.anchors.iter().map(|(_, w)| *w).fold(0.0, f64::max);
        2.0 * self.diameter() * wmax
    }

    /// `L′ = D² + 4·Σλ²·Lip²`.
    pub fn window_mass(&self) -> Result<f64> {
        let lip = self.lipschitz();
        let m2 = self
            .lambda
            .sum_bound(4.0 * lip * lip, 2.0)
            .map_err(|e| Error::config("lambda", e.to_string()))?;
        Ok(self.diameter().powi(2) + m2)
    }

    /// Fejér rates for `φ = d²`, `ζ = 0`, `ξ_k = 4λ_k²Lip²` and the liminf
    /// modulus `(ε, N) ↦ θ(N, L′/ε)` over `Σ 2λ_k/N`.
    pub fn fejer_rates(&self, tau: &RegularityModulus) -> Result<FejerRates> {
        let l = self.window_mass()?;
        let theta = self.lambda.divergence_rate(2.0 / self.anchors.len() as f64)?;
        let phi = LiminfModulus::new(format!("window({}, L={l})", theta.label()), move |e, n| {
            theta.eval(n, l / e).unwrap_or(crate::moduli::INDEX_MAX)
        });
        let lip = self.lipschitz();
        let chi = self.lambda.tail_rate(4.0 * lip * lip, 2.0)?;
        rate_fejer(tau, 1.0, &chi, &phi, &RegularityModulus::poly(1.0, 2.0))
    }
}

impl Process for Splitting {
    fn name(&self) -> &'static str {
        "splitting"
    }

    fn space(&self) -> Space {
        self.space
    }

    fn target(&self) -> StatePoint {
        self.mean.clone()
    }

    fn initial(&self, _rng: &mut RandomSource) -> StatePoint {
        self.x0.clone()
    }

    fn step(&self, x: &mut StatePoint, n: u64, rng: &mut RandomSource) {
        let (a, w) = &self.anchors[rng.index(self.anchors.len())];
        move_toward(x, a, prox_parameter(self.lambda.value(n), *w));
    }

    fn functional(&self, x: &StatePoint) -> f64 {
        (self.objective(x) - self.min_value).max(0.0)
    }

    fn dist_map(&self, x: &StatePoint, y: &StatePoint) -> f64 {
        dist(x, y).powi(2)
    }

    fn target_dist(&self, x: &StatePoint) -> f64 {
        dist(x, &self.mean).powi(2)
    }

    fn constants(&self) -> Constants {
        let mut k = Constants::default();
        k.insert("K", 1.0);
        k.insert("D", self.diameter());
        k.insert("Kd", self.diameter().powi(2));
        k.insert("Lip", self.lipschitz());
        k.insert("N", self.anchors.len() as f64);
        k.insert("min_f", self.min_value);
        if let Ok(l) = self.window_mass() {
            k.insert("L", l);
        }
        k
    }
}
