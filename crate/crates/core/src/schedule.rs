//! Deterministic nonnegative sequences (step sizes, noise levels, perturbation
//! series) together with the rates the theorems ask for: divergence rates,
//! tail rates, sum bounds and decay indices.

use std::fmt;

use crate::error::{Error, Result};
use crate::moduli::{ceil_index, floor_index, DivergenceRate, Index, TailRate, INDEX_MAX};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    /// `a_n = v`
    Const(f64),
    /// `a_n = 1/(β(n+r))`
    Harmonic { beta: f64, r: f64 },
    /// `a_n = (n+1)^{-p}`
    Power(f64),
    /// `a_n = s·q^n`
    Geometric { scale: f64, ratio: f64 },
}

/// Number of leading terms summed exactly before switching to an integral tail bound.
const EXACT_TERMS: u64 = 4096;

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Schedule::Const(v) => v >= 0.0 && v.is_finite(),
            Schedule::Harmonic { beta, r } => beta > 0.0 && r > 0.0 && beta.is_finite() && r.is_finite(),
            Schedule::Power(p) => p > 0.0 && p.is_finite(),
            Schedule::Geometric { scale, ratio } => {
                scale >= 0.0 && scale.is_finite() && ratio > 0.0 && ratio < 1.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid schedule {self}")))
        }
    }

    pub fn value(&self, n: u64) -> f64 {
        let x = n as f64;
        match *self {
            Schedule::Const(v) => v,
            Schedule::Harmonic { beta, r } => 1.0 / (beta * (x + r)),
            Schedule::Power(p) => (x + 1.0).powf(-p),
            Schedule::Geometric { scale, ratio } => scale * ratio.powf(x),
        }
    }

    /// `sup_n a_n`; every variant is nonincreasing so this is `a_0`.
    pub fn sup(&self) -> f64 {
        self.value(0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self, Schedule::Const(v) if v == 0.0)
            || matches!(*self, Schedule::Geometric { scale, .. } if scale == 0.0)
    }

    /// Whether `Σ a_n^power` is finite.
    pub fn is_summable(&self, power: f64) -> bool {
        match *self {
            Schedule::Const(v) => v == 0.0,
            Schedule::Harmonic { .. } => power > 1.0,
            Schedule::Power(p) => p * power > 1.0,
            Schedule::Geometric { .. } => true,
        }
    }

    /// Rate of divergence for `Σ w·a_n`: `Σ_{n=k}^{θ(k,b)} w·a_n ≥ b`.
    pub fn divergence_rate(&self, weight: f64) -> Result<DivergenceRate> {
        self.validate()?;
        if !(weight > 0.0) {
            return Err(Error::domain(format!("divergence weight must be positive, got {weight}")));
        }
        let label = if weight == 1.0 {
            format!("sum:{self}")
        } else {
            format!("{weight}*sum:{self}")
        };
        let w = weight;
        match *self {
            Schedule::Const(v) if v > 0.0 => Ok(DivergenceRate::new(label, move |k, b| {
                k.saturating_add(ceil_index(b / (w * v))).saturating_sub(1)
            })),
            // Σ_{n=k}^{m} 1/(β(n+r)) ≥ ln((m+1+r)/(k+r))/β
            Schedule::Harmonic { beta, r } => Ok(DivergenceRate::new(label, move |k, b| {
                let kf = k as f64;
                ceil_index((kf + r) * (beta * b / w).exp() - r - 1.0)
            })),
            // Σ_{n=k}^{m} (n+1)^{-p} ≥ ∫_{k+1}^{m+2} x^{-p} dx
            Schedule::Power(1.0) => Ok(DivergenceRate::new(label, move |k, b| {
                ceil_index((k as f64 + 1.0) * (b / w).exp() - 2.0)
            })),
            Schedule::Power(p) if p < 1.0 => Ok(DivergenceRate::new(label, move |k, b| {
                let e = 1.0 - p;
                let base = (k as f64 + 1.0).powf(e) + e * b / w;
                ceil_index(base.powf(1.0 / e) - 2.0)
            })),
            _ => Err(Error::domain(format!("series of {self} does not diverge"))),
        }
    }

    /// Tail rate for `Σ w·a_n^power`: `Σ_{n≥χ(ε)} w·a_n^power < ε`.
    pub fn tail_rate(&self, weight: f64, power: f64) -> Result<TailRate> {
        self.validate()?;
        if !(weight >= 0.0 && power > 0.0) {
            return Err(Error::domain("tail rate needs weight ≥ 0 and power > 0"));
        }
        let label = match (weight == 1.0, power == 1.0) {
            (true, true) => format!("sum:{self}"),
            (true, false) => format!("sum-pow{power}:{self}"),
            (false, true) => format!("{weight}*sum:{self}"),
            (false, false) => format!("{weight}*sum-pow{power}:{self}"),
        };
        if weight == 0.0 || self.is_zero() {
            return Ok(TailRate::new(label, |_| 0));
        }
        if !self.is_summable(power) {
            return Err(Error::domain(format!("series of {self}^{power} is not summable")));
        }
        let w = weight;
        let s = power;
        Ok(match *self {
            // Σ_{n≥N} (n+r)^{-s} < (N+r-1)^{1-s}/(s-1)
            Schedule::Harmonic { beta, r } => TailRate::new(label, move |eps| {
                let need = (w / (beta.powf(s) * (s - 1.0) * eps)).powf(1.0 / (s - 1.0));
                ceil_index(need + 1.0 - r)
            }),
            // Σ_{n≥N} (n+1)^{-q} < N^{1-q}/(q-1), N ≥ 1
            Schedule::Power(p) => {
                let q = p * s;
                TailRate::new(label, move |eps| {
                    ceil_index((w / ((q - 1.0) * eps)).powf(1.0 / (q - 1.0))).max(1)
                })
            }
            Schedule::Geometric { scale, ratio } => {
                let qs = ratio.powf(s);
                let head = w * scale.powf(s) / (1.0 - qs);
                TailRate::new(label, move |eps| {
                    if head < eps {
                        0
                    } else {
                        floor_index((eps / head).ln() / qs.ln()).saturating_add(1)
                    }
                })
            }
            Schedule::Const(_) => unreachable!("nonzero constant series are not summable"),
        })
    }

    /// Upper bound on `Σ_{n≥start} w·a_n^power`.
    pub fn tail_sum_bound(&self, weight: f64, power: f64, start: u64) -> Result<f64> {
        self.validate()?;
        if weight == 0.0 || self.is_zero() {
            return Ok(0.0);
        }
        if !self.is_summable(power) {
            return Err(Error::domain(format!("series of {self}^{power} is not summable")));
        }
        if let Schedule::Geometric { scale, ratio } = *self {
            let qs = ratio.powf(power);
            let v = weight * scale.powf(power) * qs.powf(start as f64) / (1.0 - qs);
            return Ok(v.next_up());
        }
        let stop = start + EXACT_TERMS;
        let mut head = 0.0;
        for n in start..stop {
            head += self.value(n).powf(power);
        }
        // a_n^power is convex and decreasing, so a_n^power ≤ ∫_{n-1/2}^{n+1/2}.
        let x0 = stop as f64 - 0.5;
        let tail = match *self {
            Schedule::Harmonic { beta, r } => {
                (x0 + r).powf(1.0 - power) / (beta.powf(power) * (power - 1.0))
            }
            Schedule::Power(p) => {
                let q = p * power;
                (x0 + 1.0).powf(1.0 - q) / (q - 1.0)
            }
            _ => unreachable!(),
        };
        // Generous rounding margin on the accumulated head.
        Ok((weight * (head * (1.0 + 1e-12) + tail)).next_up())
    }

    /// Cheaper, looser tail bound: `g(start) + ∫_start^∞ g`; infinite when the
    /// series diverges.
    pub fn tail_sum_quick(&self, weight: f64, power: f64, start: u64) -> f64 {
        if weight == 0.0 || self.is_zero() {
            return 0.0;
        }
        if !self.is_summable(power) {
            return f64::INFINITY;
        }
        let x = start as f64;
        let v = match *self {
            Schedule::Geometric { scale, ratio } => {
                let qs = ratio.powf(power);
                scale.powf(power) * qs.powf(x) / (1.0 - qs)
            }
            Schedule::Harmonic { beta, r } => {
                self.value(start).powf(power)
                    + (x + r).powf(1.0 - power) / (beta.powf(power) * (power - 1.0))
            }
            Schedule::Power(p) => {
                let q = p * power;
                self.value(start).powf(power) + (x + 1.0).powf(1.0 - q) / (q - 1.0)
            }
            Schedule::Const(_) => 0.0,
        };
        (weight * v * (1.0 + 1e-12)).next_up()
    }

    /// `Σ_{n<end} w·a_n^power`, summed directly.
    pub fn partial_sum(&self, weight: f64, power: f64, end: u64) -> f64 {
        weight * (0..end).map(|n| self.value(n).powf(power)).sum::<f64>()
    }

    /// Upper bound on `Σ_{n≥0} w·a_n^power`.
    pub fn sum_bound(&self, weight: f64, power: f64) -> Result<f64> {
        self.tail_sum_bound(weight, power, 0)
    }

    /// Rate of `a_n → 0`: `a_n < ε` for every `n ≥` the returned index.
    pub fn decay_index(&self, eps: f64) -> Index {
        match *self {
            Schedule::Const(v) => {
                if v < eps {
                    0
                } else {
                    INDEX_MAX
                }
            }
            Schedule::Harmonic { beta, r } => {
                let t = 1.0 / (beta * eps) - r;
                if t < 0.0 {
                    0
                } else {
                    floor_index(t).saturating_add(1)
                }
            }
            Schedule::Power(p) => floor_index(eps.powf(-1.0 / p)),
            Schedule::Geometric { scale, ratio } => {
                if scale < eps {
                    0
                } else {
                    floor_index((eps / scale).ln() / ratio.ln()).saturating_add(1)
                }
            }
        }
    }

    /// Pointwise product bound `a_n·b_n ≤ sup(a)·b_n`, as a sum over `n`.
    pub fn weighted_sum_bound(&self, other: &Schedule) -> Result<f64> {
        other.sum_bound(self.sup(), 1.0)
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Schedule::Const(v) => write!(f, "const:{v}"),
            Schedule::Harmonic { beta, r } => write!(f, "harmonic:{beta},{r}"),
            Schedule::Power(p) => write!(f, "power:{p}"),
            Schedule::Geometric { scale, ratio } => write!(f, "geometric:{scale},{ratio}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partial(s: &Schedule, k: u64, m: u64) -> f64 {
        (k..=m).map(|n| s.value(n)).sum()
    }

    #[test]
    fn divergence_windows_reach_target() {
        for s in [
            Schedule::Const(0.5),
            Schedule::Harmonic { beta: 1.0, r: 2.0 },
            Schedule::Harmonic { beta: 0.5, r: 1.0 },
            Schedule::Power(1.0),
            Schedule::Power(0.6),
        ] {
            let theta = s.divergence_rate(1.0).unwrap();
            for k in [0u128, 3, 17] {
                for b in [0.3, 1.0, 2.5] {
                    let m = theta.eval(k, b).unwrap();
                    assert!(partial(&s, k as u64, m as u64) >= b, "{s} k={k} b={b} m={m}");
                }
            }
        }
    }

    #[test]
    fn tail_rates_bound_tails() {
        for (s, p) in [
            (Schedule::Harmonic { beta: 1.0, r: 2.0 }, 2.0),
            (Schedule::Harmonic { beta: 2.0, r: 1.0 }, 2.0),
            (Schedule::Power(1.0), 2.0),
            (Schedule::Geometric { scale: 1.0, ratio: 0.5 }, 1.0),
            (Schedule::Geometric { scale: 0.1, ratio: 0.5 }, 2.0),
        ] {
            let chi = s.tail_rate(1.0, p).unwrap();
            for eps in [0.5, 0.1, 0.01] {
                let n = chi.eval(eps).unwrap() as u64;
                let tail = s.tail_sum_bound(1.0, p, n).unwrap();
                assert!(tail < eps * (1.0 + 1e-9), "{s} eps={eps} n={n} tail={tail}");
            }
        }
    }

    #[test]
    fn basel_tail_bound() {
        let s = Schedule::Harmonic { beta: 1.0, r: 2.0 };
        let m = s.sum_bound(1.0, 2.0).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 6.0 - 1.0;
        assert!(m >= exact && m - exact < 1e-7, "{m}");
    }

    #[test]
    fn decay_index_is_sharp() {
        let s = Schedule::Harmonic { beta: 1.0, r: 1.0 };
        let n = s.decay_index(0.25) as u64;
        assert_eq!(n, 4);
        assert!(s.value(n) < 0.25 && s.value(n - 1) >= 0.25);
        let g = Schedule::Geometric { scale: 1.0, ratio: 0.5 };
        assert_eq!(g.decay_index(0.25), 3);
    }
}
