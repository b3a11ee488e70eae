//! Euclidean space and the star ℝ-tree.

use crate::error::{Error, Result};

/// A point of a Euclidean space or of a star tree.
#[derive(Clone, Debug, PartialEq)]
pub enum StatePoint {
    Euclidean(Vec<f64>),
    /// Distance `t ≥ 0` from the centre along leg `leg`; the centre is
    /// always stored as leg 0.
    Star { leg: usize, t: f64 },
}

impl StatePoint {
    pub fn scalar(x: f64) -> Self {
        StatePoint::Euclidean(vec![x])
    }

    pub fn star(leg: usize, t: f64) -> Self {
        if t == 0.0 {
            StatePoint::Star { leg: 0, t: 0.0 }
        } else {
            StatePoint::Star { leg, t }
        }
    }

    /// First coordinate of a Euclidean point (or the radius on a star).
    pub fn first(&self) -> f64 {
        match self {
            StatePoint::Euclidean(v) => v[0],
            StatePoint::Star { t, .. } => *t,
        }
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            StatePoint::Euclidean(v) => Some(v),
            StatePoint::Star { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Euclidean { dim: usize },
    Star { legs: usize },
}

impl Space {
    pub fn origin(&self) -> StatePoint {
        match *self {
            Space::Euclidean { dim } => StatePoint::Euclidean(vec![0.0; dim]),
            Space::Star { .. } => StatePoint::star(0, 0.0),
        }
    }

    pub fn contains(&self, p: &StatePoint) -> Result<()> {
        match (*self, p) {
            (Space::Euclidean { dim }, StatePoint::Euclidean(v)) if v.len() == dim => {
                if v.iter().all(|x| x.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::domain("non-finite coordinate"))
                }
            }
            (Space::Star { legs }, StatePoint::Star { leg, t }) => {
                if *leg >= legs {
                    Err(Error::domain(format!("leg {leg} out of range for {legs} legs")))
                } else if !(*t >= 0.0 && t.is_finite()) {
                    Err(Error::domain(format!("star radius must be finite and ≥ 0, got {t}")))
                } else {
                    Ok(())
                }
            }
            _ => Err(Error::domain(format!("{p:?} is not a point of {self:?}"))),
        }
    }

    pub fn distance(&self, x: &StatePoint, y: &StatePoint) -> Result<f64> {
        self.contains(x)?;
        self.contains(y)?;
        Ok(dist(x, y))
    }

    /// Point at fraction `t ∈ [0,1]` of the way from `x` to `y`.
    pub fn geodesic(&self, x: &StatePoint, y: &StatePoint, t: f64) -> Result<StatePoint> {
        self.contains(x)?;
        self.contains(y)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("geodesic parameter must lie in [0,1], got {t}")));
        }
        let mut p = x.clone();
        move_toward(&mut p, y, t);
        Ok(p)
    }

    /// Largest pairwise distance among `points`.
    pub fn diameter(&self, points: &[&StatePoint]) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in points.iter().enumerate() {
            for q in &points[i + 1..] {
                d = d.max(dist(p, q));
            }
        }
        d
    }
}

pub(crate) fn dist(x: &StatePoint, y: &StatePoint) -> f64 {
    match (x, y) {
        (StatePoint::Euclidean(a), StatePoint::Euclidean(b)) => a
            .iter()
            .zip(b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt(),
        (StatePoint::Star { leg: l1, t: t1 }, StatePoint::Star { leg: l2, t: t2 }) => {
            if l1 == l2 {
                (t1 - t2).abs()
            } else {
                t1 + t2
            }
        }
        _ => f64::NAN,
    }
}

/// Replaces `x` by the point at fraction `t` along the geodesic to `y`.
pub(crate) fn move_toward(x: &mut StatePoint, y: &StatePoint, t: f64) {
    match (x, y) {
        (StatePoint::Euclidean(a), StatePoint::Euclidean(b)) => {
            for (p, q) in a.iter_mut().zip(b) {
                *p += t * (q - *p);
            }
        }
        (x @ StatePoint::Star { .. }, &StatePoint::Star { leg: l2, t: t2 }) => {
            let StatePoint::Star { leg: l1, t: t1 } = *x else { unreachable!() };
            *x = if l1 == l2 || t1 == 0.0 || t2 == 0.0 {
                let leg = if t1 == 0.0 { l2 } else { l1 };
                // with one end at the centre both lie on a common leg
                let (s1, s2) = if l1 == l2 {
                    (t1, t2)
                } else if t1 == 0.0 {
                    (0.0, t2)
                } else {
                    (t1, 0.0)
                };
                StatePoint::star(leg, (1.0 - t) * s1 + t * s2)
            } else {
                let s = t * (t1 + t2);
                if s <= t1 {
                    StatePoint::star(l1, t1 - s)
                } else {
                    StatePoint::star(l2, s - t1)
                }
            };
        }
        _ => panic!("geodesic between points of different spaces"),
    }
}

/// Distance on a star tree with `legs` legs.
pub fn star_distance(legs: usize, x: &StatePoint, y: &StatePoint) -> Result<f64> {
    Space::Star { legs }.distance(x, y)
}

/// Geodesic on a star tree with `legs` legs; paths between legs pass through the centre.
pub fn star_geodesic(legs: usize, x: &StatePoint, y: &StatePoint, t: f64) -> Result<StatePoint> {
    Space::Star { legs }.geodesic(x, y, t)
}
