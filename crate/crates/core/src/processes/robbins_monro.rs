use super::{coords, coords_mut, euclid, norm_sq, Constants, Process, RandomSource, Space, StatePoint};
use crate::error::{Error, Result};
use crate::moduli::{RegularityModulus, SiccFunction};
use crate::rates::{fast_rate_strongly_monotone, RmSpec, RsSpec, StronglyMonotoneRate};
use crate::schedule::Schedule;

/// Mean field `M` of a Robbins-Monro scheme; all have root `z = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Field {
    /// `M(x) = βx` in dimension `dim`.
    Linear { beta: f64, dim: usize },
    /// `M(x) = x³` in one dimension.
    Cubic,
    /// `M(x) = sign(x)` in one dimension.
    Abs,
}

impl Field {
    pub fn dim(&self) -> usize {
        match *self {
            Field::Linear { dim, .. } => dim,
            _ => 1,
        }
    }

    #[inline]
    fn apply(&self, x: f64) -> f64 {
        match *self {
            Field::Linear { beta, .. } => beta * x,
            Field::Cubic => x * x * x,
            Field::Abs => {
                if x == 0.0 {
                    0.0
                } else {
                    x.signum()
                }
            }
        }
    }
}

/// `x_{n+1} = x_n − a_n(M(x_n) + g_n)` with Gaussian `g_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct RobbinsMonro {
    field: Field,
    noise_sd: f64,
    steps: Schedule,
    x0: Vec<f64>,
}

impl RobbinsMonro {
    pub fn new(field: Field, noise_sd: f64, steps: Schedule, x0: StatePoint) -> Result<Self> {
        if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
            return Err(Error::config("noise_sd", format!("must be finite and ≥ 0, got {noise_sd}")));
        }
        if let Field::Linear { beta, dim } = field {
            if !(beta > 0.0 && beta.is_finite()) || dim == 0 {
                return Err(Error::config("beta", "linear field needs β > 0 and dim ≥ 1"));
            }
        }
        super::check_schedule("steps", &steps)?;
        if steps.is_zero() {
            return Err(Error::config("steps", "step sizes must be positive"));
        }
        let x0 = euclid(&x0, "x0")?;
        if x0.len() != field.dim() {
            return Err(Error::config("x0", format!("expected dimension {}", field.dim())));
        }
        Ok(RobbinsMonro { field, noise_sd, steps, x0 })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn steps(&self) -> Schedule {
        self.steps
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    /// One noisy evaluation `y = M(x) + g`.
    pub fn observe(&self, x: &[f64], rng: &mut RandomSource) -> Vec<f64> {
        x.iter()
            .map(|&v| self.field.apply(v) + self.noise_sd * rng.normal())
            .collect()
    }

    /// `E[‖y‖² | x]` in closed form.
    pub fn conditional_second_moment(&self, x: &[f64]) -> f64 {
        let s2 = self.noise_sd * self.noise_sd;
        x.iter().map(|&v| self.field.apply(v).powi(2) + s2).sum()
    }

    /// `(c, d)` with `E[‖y‖² | x] ≤ c‖x‖² + d`; none for the cubic field.
    pub fn growth(&self) -> Option<(f64, f64)> {
        let s2 = self.noise_sd * self.noise_sd;
        match self.field {
            Field::Linear { beta, dim } => Some((beta * beta, dim as f64 * s2)),
            Field::Abs => Some((0.0, 1.0 + s2)),
            Field::Cubic => None,
        }
    }

    fn growth_or_err(&self) -> Result<(f64, f64)> {
        self.growth()
            .ok_or_else(|| Error::config("field", "no linear growth bound for the cubic field"))
    }

    /// `Σ a_n² < M`.
    pub fn step_square_sum(&self) -> Result<f64> {
        self.steps
            .sum_bound(1.0, 2.0)
            .map_err(|e| Error::config("steps", e.to_string()))
    }

    fn initial_sq(&self) -> f64 {
        norm_sq(&self.x0)
    }

    /// Robbins-Siegmund data for `X_n = ‖x_n‖²`, `V_n = ⟨x_n, M(x_n)⟩`,
    /// `A_n = c·a_n²`, `C_n = d·a_n²` and weights `u_n = 2a_n`.
    pub fn rs_spec(&self, tau: RegularityModulus, f: SiccFunction) -> Result<RsSpec> {
        let (c, d) = self.growth_or_err()?;
        let m = self.step_square_sum()?;
        Ok(RsSpec {
            k: (c * m).exp().next_up(),
            l: self.initial_sq().next_up(),
            m: d * m,
            chi: self.steps.tail_rate(d, 2.0)?,
            theta: self.steps.divergence_rate(2.0)?,
            tau,
            f,
        })
    }

    pub fn rm_spec(&self, tau: RegularityModulus, f: SiccFunction) -> Result<RmSpec> {
        let (c, d) = self.growth_or_err()?;
        Ok(RmSpec {
            c,
            d,
            l: self.initial_sq().next_up(),
            m: self.step_square_sum()?,
            theta: self.steps.divergence_rate(1.0)?,
            chi: self.steps.tail_rate(1.0, 2.0)?,
            tau,
            f,
        })
    }

    /// Linear-rate bounds; needs the linear field with `a_n = 1/(β(n+r))`.
    pub fn strongly_monotone(&self) -> Result<StronglyMonotoneRate> {
        let (Field::Linear { beta, .. }, Schedule::Harmonic { beta: b, r }) = (self.field, self.steps)
        else {
            return Err(Error::config("steps", "needs the linear field with harmonic steps"));
        };
        if b != beta || r.fract() != 0.0 {
            return Err(Error::config("steps", "needs a_n = 1/(β(n+r)) with the field's β and integer r"));
        }
        let (c, d) = self.growth_or_err()?;
        let k = (c * self.step_square_sum()?).exp().next_up();
        fast_rate_strongly_monotone(beta, c, d, r as u64, self.initial_sq(), k)
    }

    fn matched_harmonic(&self) -> Option<(f64, f64)> {
        match (self.field, self.steps) {
            (Field::Linear { beta, .. }, Schedule::Harmonic { beta: b, r }) if b == beta => Some((beta, r)),
            _ => None,
        }
    }
}

impl Process for RobbinsMonro {
    fn name(&self) -> &'static str {
        match self.field {
            Field::Linear { .. } => "rm:linear",
            Field::Cubic => "rm:cubic",
            Field::Abs => "rm:abs",
        }
    }

    fn space(&self) -> Space {
        Space::Euclidean { dim: self.field.dim() }
    }

    fn target(&self) -> StatePoint {
        StatePoint::Euclidean(vec![0.0; self.field.dim()])
    }

    fn initial(&self, _rng: &mut RandomSource) -> StatePoint {
        StatePoint::Euclidean(self.x0.clone())
    }

    fn step(&self, x: &mut StatePoint, n: u64, rng: &mut RandomSource) {
        let a = self.steps.value(n);
        for v in coords_mut(x) {
            let noise = if self.noise_sd > 0.0 { self.noise_sd * rng.normal() } else { 0.0 };
            *v -= a * (self.field.apply(*v) + noise);
        }
    }

    /// `⟨x, M(x)⟩`.
    fn functional(&self, x: &StatePoint) -> f64 {
        coords(x).iter().map(|&v| v * self.field.apply(v)).sum()
    }

    fn dist_map(&self, x: &StatePoint, y: &StatePoint) -> f64 {
        super::dist_sq(coords(x), coords(y))
    }

    fn target_dist(&self, x: &StatePoint) -> f64 {
        norm_sq(coords(x))
    }

    fn future_dist_bound(&self, x: &StatePoint, n: u64) -> f64 {
        match self.field {
            Field::Linear { beta, .. } if self.noise_sd == 0.0 && self.steps.value(n) * beta <= 2.0 => {
                norm_sq(coords(x))
            }
            _ => f64::INFINITY,
        }
    }

    /// For `a_n = 1/(β(n+r))` the iterate is
    /// `x_n = ((r−1)x_0 − (σ/β)√n·Z)/(n+r−1)` with `Z` standard normal.
    fn sample_marginal(&self, n: crate::moduli::Index, rng: &mut RandomSource) -> Option<StatePoint> {
        let (beta, r) = self.matched_harmonic()?;
        if n == 0 {
            return Some(StatePoint::Euclidean(self.x0.clone()));
        }
        let nf = n as f64;
        let spread = self.noise_sd / beta * nf.sqrt();
        let denom = nf + r - 1.0;
        Some(StatePoint::Euclidean(
            self.x0
                .iter()
                .map(|&v| {
                    let z = if self.noise_sd > 0.0 { rng.normal() } else { 0.0 };
                    ((r - 1.0) * v - spread * z) / denom
                })
                .collect(),
        ))
    }

    fn constants(&self) -> Constants {
        let mut k = Constants::default();
        k.insert("noise_sd", self.noise_sd);
        k.insert("x0_sq", self.initial_sq());
        k.insert("L", self.initial_sq().next_up());
        if let Field::Linear { beta, .. } = self.field {
            k.insert("beta", beta);
        }
        if let Schedule::Harmonic { r, .. } = self.steps {
            k.insert("r", r);
        }
        if let Some((c, d)) = self.growth() {
            k.insert("c", c);
            k.insert("d", d);
            if let Ok(m) = self.step_square_sum() {
                k.insert("M", m);
                k.insert("K", (c * m).exp().next_up());
            }
        }
        k
    }
}
