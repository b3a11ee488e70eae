use super::{Constants, Process, RandomSource, Space, StatePoint};

/// Product martingale `X_0 = Y_0`, `X_{n+1} = X_n·Y_{n+1}` with i.i.d.
/// `Y ∈ {0, 2}` uniform. `E[X_n] = 1` while `E[√X_n] → 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    eta_check: bool,
}

impl Counterexample {
    pub fn new(eta_check: bool) -> Self {
        Counterexample { eta_check }
    }

    /// `E[√Y] = √2/2`.
    pub fn eta() -> f64 {
        0.5 * 2f64.sqrt()
    }

    /// `E[√X_n] = η^{n+1}`.
    pub fn sqrt_mean(n: u64) -> f64 {
        Self::eta().powi(n as i32 + 1)
    }

    /// `P(∃ k ∈ [from, horizon]: X_k ≥ a)` in closed form: `X_k` is either 0
    /// or `2^{k+1}`, the latter with probability `2^{-(k+1)}`.
    pub fn exceedance(a: f64, from: u64, horizon: u64) -> f64 {
        (from..=horizon)
            .find(|&k| 2f64.powi(k as i32 + 1) >= a)
            .map_or(0.0, |k| 0.5f64.powi(k as i32 + 1))
    }

    fn draw(rng: &mut RandomSource) -> f64 {
        if rng.bernoulli(0.5) {
            2.0
        } else {
            0.0
        }
    }
}

impl Process for Counterexample {
    fn name(&self) -> &'static str {
        "counterexample"
    }

    fn space(&self) -> Space {
        Space::Euclidean { dim: 1 }
    }

    fn target(&self) -> StatePoint {
        StatePoint::scalar(0.0)
    }

    fn initial(&self, rng: &mut RandomSource) -> StatePoint {
        StatePoint::scalar(Self::draw(rng))
    }

    fn step(&self, x: &mut StatePoint, _n: u64, rng: &mut RandomSource) {
        let y = Self::draw(rng);
        super::coords_mut(x)[0] *= y;
    }

    fn functional(&self, x: &StatePoint) -> f64 {
        x.first().sqrt()
    }

    fn dist_map(&self, x: &StatePoint, y: &StatePoint) -> f64 {
        (x.first() - y.first()).abs()
    }

    fn target_dist(&self, x: &StatePoint) -> f64 {
        x.first()
    }

    fn future_dist_bound(&self, x: &StatePoint, _n: u64) -> f64 {
        if x.first() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn is_supermartingale(&self) -> bool {
        true
    }

    fn constants(&self) -> Constants {
        let mut c = Constants::default();
        c.insert("mean", 1.0);
        c.insert("initial_mean", 1.0);
        if self.eta_check {
            c.insert("eta", Self::eta());
        }
        c
    }
}
