use std::sync::Arc;

use super::{coords, coords_mut, euclid, Constants, Process, RandomSource, Space, StatePoint};
use crate::error::{Error, Result};
use crate::moduli::{Index, TailRate};
use crate::rates::DvoretzkySpec;
use crate::schedule::Schedule;

/// Soft shrinkage `z + (x−z)·max{0, 1 − c/‖x−z‖}`.
pub fn shrink(x: &[f64], z: &[f64], c: f64) -> Vec<f64> {
    let mut out = x.to_vec();
    shrink_in_place(&mut out, z, c);
    out
}

fn shrink_in_place(x: &mut [f64], z: &[f64], c: f64) {
    let r = super::dist_sq(x, z).sqrt();
    let f = if r > c { 1.0 - c / r } else { 0.0 };
    for (v, zi) in x.iter_mut().zip(z) {
        *v = zi + (*v - zi) * f;
    }
}

/// Partial sums beyond this length are replaced by the full-series bound.
const PARTIAL_LIMIT: u64 = 1 << 20;

/// `x_{n+1} = T_{n+1}(x_n) + y_n` with shrinkage `T_{n+1}` by `c_n` and
/// Gaussian `y_n` of sd `σ_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dvoretzky {
    a: Schedule,
    b: Schedule,
    c: Schedule,
    noise: Schedule,
    z: Vec<f64>,
    x0: Vec<f64>,
}

impl Dvoretzky {
    pub fn new(a: Schedule, b: Schedule, c: Schedule, noise: Schedule, z: StatePoint, x0: StatePoint) -> Result<Self> {
        for (key, s) in [("a", &a), ("b", &b), ("c", &c), ("noise_sd", &noise)] {
            super::check_schedule(key, s)?;
        }
        let (z, x0) = (euclid(&z, "z")?, euclid(&x0, "x0")?);
        if z.len() != x0.len() {
            return Err(Error::config("x0", "dimension differs from z"));
        }
        Ok(Dvoretzky { a, b, c, noise, z, x0 })
    }

    fn dim(&self) -> f64 {
        self.z.len() as f64
    }

    fn cfg<T>(key: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| Error::config(key, e.to_string()))
    }

    /// `(A, B, C, M)`: `a_n ≤ A`, `Σb_n < B`, `Σc_n² < C`, `ΣE‖y_n‖² < M`.
    pub fn bounds(&self) -> Result<(f64, f64, f64, f64)> {
        Ok((
            self.a.sup(),
            Self::cfg("b", self.b.sum_bound(1.0, 1.0))?,
            Self::cfg("c", self.c.sum_bound(1.0, 2.0))?,
            Self::cfg("noise_sd", self.noise.sum_bound(self.dim(), 2.0))?,
        ))
    }

    /// `(√(‖x_0−z‖² + dim·Σ_{k<n}σ_k²) + ‖z‖)² ≥ E‖x_n‖²`.
    pub fn second_moment_bound(&self, n: u64) -> f64 {
        let noise = if n <= PARTIAL_LIMIT {
            self.noise.partial_sum(self.dim(), 2.0, n)
        } else {
            self.noise.sum_bound(self.dim(), 2.0).unwrap_or(f64::INFINITY)
        };
        let spread = (super::dist_sq(&self.x0, &self.z) + noise).sqrt();
        (spread + super::norm_sq(&self.z).sqrt()).powi(2) * (1.0 + 1e-12)
    }

    pub fn dvoretzky_spec(&self) -> Result<DvoretzkySpec> {
        let (a, b, c, m) = self.bounds()?;
        let sa = self.a;
        let me = self.clone();
        Ok(DvoretzkySpec {
            a,
            b,
            c,
            m,
            varphi_a: TailRate::new(format!("decay:{sa}"), move |e| sa.decay_index(e)),
            beta_b: Self::cfg("b", self.b.tail_rate(1.0, 1.0))?,
            gamma_c: Self::cfg("c", self.c.tail_rate(1.0, 2.0))?,
            mu_y: Self::cfg("noise_sd", self.noise.tail_rate(self.dim(), 2.0))?,
            theta: Self::cfg("c", self.c.divergence_rate(1.0))?,
            l_of: Arc::new(move |n: Index| me.second_moment_bound(u64::try_from(n).unwrap_or(u64::MAX))),
        })
    }
}

impl Process for Dvoretzky {
    fn name(&self) -> &'static str {
        "dvoretzky"
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
        let v = coords_mut(x);
        shrink_in_place(v, &self.z, self.c.value(n));
        let sd = self.noise.value(n);
        if sd > 0.0 {
            for c in v.iter_mut() {
                *c += sd * rng.normal();
            }
        }
    }

    fn functional(&self, x: &StatePoint) -> f64 {
        self.target_dist(x)
    }

    fn dist_map(&self, x: &StatePoint, y: &StatePoint) -> f64 {
        super::dist_sq(coords(x), coords(y)).sqrt()
    }

    fn target_dist(&self, x: &StatePoint) -> f64 {
        super::dist_sq(coords(x), &self.z).sqrt()
    }

    /// Shrinkage never moves away from `z`, so once the noise has vanished
    /// the distance is nonincreasing.
    fn future_dist_bound(&self, x: &StatePoint, n: u64) -> f64 {
        if self.noise.value(n) == 0.0 {
            self.target_dist(x)
        } else {
            f64::INFINITY
        }
    }

    fn constants(&self) -> Constants {
        let mut k = Constants::default();
        if let Ok((a, b, c, m)) = self.bounds() {
            k.insert("A", a);
            k.insert("B", b);
            k.insert("C", c);
            k.insert("M", m);
        }
        k.insert("x0_dist", super::dist_sq(&self.x0, &self.z).sqrt());
        k
    }
}
