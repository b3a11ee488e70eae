//! The small expression grammar used in experiment configs.
//!
//! ```text
//! sicc      := id | sqrt | power:q | log:c
//!            | sum(α*sicc, β*sicc) | compose(sicc, sicc) | min(sicc, sicc)
//! schedule  := const:v | harmonic:β,r | power:p | geometric:s,q
//! theta     := linear:c | [w*]sum:schedule
//! chi       := zero | inverse:c | [w*]sum[-powP]:schedule
//! phi       := identity | shift-inverse:c | geometric:C,η
//! tau       := id | power:p | linear:a | poly:a,p | frechet
//!            | quasi-contraction:r | strongly-quasiconvex:μ | convex:tau
//!            | sharp-min(tau) | sharp-min-quarter(tau) | prox-transfer(γ, tau)
//!            | bounded(K=k, pi=const:c) | ui(K=k, pi=const:c, mu=const:m)
//! ```
//!
//! Every label produced by a constructor in this crate parses back to an
//! equivalent object.

use crate::error::{Error, Result};
use crate::moduli::{
    sicc_combine, sicc_identity, sicc_log, sicc_power, sicc_sqrt, Combine, DivergenceRate,
    LiminfModulus, RegularityModulus, SiccFunction, TailRate,
};
use crate::regularity::{
    reg_bounded, reg_from_convex, reg_from_ui, uniq_frechet, uniq_prox_transfer,
    uniq_quasi_contraction, uniq_sharp_min, uniq_strongly_quasiconvex, PointwiseLowerBound,
    UiModulus,
};
use crate::schedule::Schedule;

fn perr(what: &str, s: &str, why: impl std::fmt::Display) -> Error {
    Error::Parse(format!("bad {what} `{s}`: {why}"))
}

fn num(what: &str, s: &str, x: &str) -> Result<f64> {
    x.trim()
        .parse::<f64>()
        .map_err(|_| perr(what, s, format!("`{x}` is not a number")))
}

fn nums<const N: usize>(what: &str, s: &str, args: &str) -> Result<[f64; N]> {
    let parts: Vec<&str> = args.split(',').collect();
    if parts.len() != N {
        return Err(perr(what, s, format!("expected {N} argument(s)")));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = num(what, s, p)?;
    }
    Ok(out)
}

/// Splits `s` on commas that are not nested inside parentheses.
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn call<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')
}

fn pair<'a>(what: &str, s: &'a str, inner: &'a str) -> Result<(&'a str, &'a str)> {
    match split_top(inner)[..] {
        [a, b] => Ok((a, b)),
        _ => Err(perr(what, s, "expected two arguments")),
    }
}

/// `α*f`, `α·f` or plain `f`.
fn weighted(s: &str) -> Result<(f64, &str)> {
    for sep in ['*', '·'] {
        if let Some((w, rest)) = s.split_once(sep) {
            if let Ok(w) = w.trim().parse::<f64>() {
                return Ok((w, rest.trim()));
            }
        }
    }
    Ok((1.0, s.trim()))
}

pub fn parse_sicc(s: &str) -> Result<SiccFunction> {
    let t = s.trim();
    let what = "s.i.c.c. function";
    if let Some(inner) = call(t, "sum") {
        let (a, b) = pair(what, s, inner)?;
        let ((alpha, f), (beta, g)) = (weighted(a)?, weighted(b)?);
        return sicc_combine(Combine::Sum { alpha, beta }, &parse_sicc(f)?, &parse_sicc(g)?);
    }
    if let Some(inner) = call(t, "compose") {
        let (f, g) = pair(what, s, inner)?;
        return sicc_combine(Combine::Compose, &parse_sicc(f)?, &parse_sicc(g)?);
    }
    if let Some(inner) = call(t, "min") {
        let (f, g) = pair(what, s, inner)?;
        return sicc_combine(Combine::Min, &parse_sicc(f)?, &parse_sicc(g)?);
    }
    match t.split_once(':') {
        None if t == "id" => Ok(sicc_identity()),
        None if t == "sqrt" => Ok(sicc_sqrt()),
        Some(("power", q)) => sicc_power(num(what, s, q)?),
        Some(("log", c)) => sicc_log(num(what, s, c)?),
        _ => Err(perr(what, s, "unknown name (expected id, sqrt, power:q, log:c, sum, compose, min)")),
    }
}

pub fn parse_schedule(s: &str) -> Result<Schedule> {
    let what = "schedule";
    let t = s.trim();
    let sched = match t.split_once(':') {
        Some(("const", v)) => Schedule::Const(num(what, s, v)?),
        Some(("harmonic", a)) => {
            let [beta, r] = nums(what, s, a)?;
            Schedule::Harmonic { beta, r }
        }
        Some(("power", p)) => Schedule::Power(num(what, s, p)?),
        Some(("geometric", a)) => {
            let [scale, ratio] = nums(what, s, a)?;
            Schedule::Geometric { scale, ratio }
        }
        _ => return Err(perr(what, s, "expected const:v, harmonic:β,r, power:p or geometric:s,q")),
    };
    sched.validate().map_err(|e| perr(what, s, e))?;
    Ok(sched)
}

/// `[w*]sum[-powP]:schedule` → `(w, P, schedule)`.
fn series(what: &str, s: &str) -> Result<Option<(f64, f64, Schedule)>> {
    let (w, rest) = weighted(s)?;
    let Some((head, sched)) = rest.split_once(':') else {
        return Ok(None);
    };
    let power = if head == "sum" {
        1.0
    } else if let Some(p) = head.strip_prefix("sum-pow") {
        num(what, s, p)?
    } else {
        return Ok(None);
    };
    Ok(Some((w, power, parse_schedule(sched)?)))
}

pub fn parse_divergence(s: &str) -> Result<DivergenceRate> {
    let what = "divergence rate";
    let t = s.trim();
    if let Some(c) = t.strip_prefix("linear:") {
        let c = num(what, s, c)?;
        if !(c > 0.0) {
            return Err(perr(what, s, "c must be positive"));
        }
        return Ok(DivergenceRate::linear(c));
    }
    match series(what, t)? {
        Some((w, 1.0, sched)) => sched.divergence_rate(w),
        _ => Err(perr(what, s, "expected linear:c or [w*]sum:schedule")),
    }
}

pub fn parse_tail(s: &str) -> Result<TailRate> {
    let what = "tail rate";
    let t = s.trim();
    if t == "zero" {
        return Ok(TailRate::zero());
    }
    if let Some(c) = t.strip_prefix("inverse:") {
        return Ok(TailRate::inverse(num(what, s, c)?));
    }
    match series(what, t)? {
        Some((w, p, sched)) => sched.tail_rate(w, p),
        None => Err(perr(what, s, "expected zero, inverse:c or [w*]sum[-powP]:schedule")),
    }
}

pub fn parse_liminf(s: &str) -> Result<LiminfModulus> {
    let what = "liminf-modulus";
    let t = s.trim();
    match t.split_once(':') {
        None if t == "identity" => Ok(LiminfModulus::identity()),
        Some(("shift-inverse", c)) => Ok(LiminfModulus::shift_inverse(num(what, s, c)?)),
        Some(("geometric", a)) => {
            let [c, eta] = nums(what, s, a)?;
            if !(c > 0.0 && eta > 0.0 && eta < 1.0) {
                return Err(perr(what, s, "needs C > 0 and η ∈ (0,1)"));
            }
            Ok(LiminfModulus::geometric(c, eta))
        }
        _ => Err(perr(what, s, "expected identity, shift-inverse:c or geometric:C,η")),
    }
}

/// `key=const:v`
fn keyed_const(what: &str, s: &str, part: &str, key: &str) -> Result<f64> {
    let v = part
        .strip_prefix(key)
        .and_then(|r| r.trim_start().strip_prefix('='))
        .ok_or_else(|| perr(what, s, format!("expected `{key}=...`")))?
        .trim();
    match v.strip_prefix("const:") {
        Some(c) => num(what, s, c),
        None if key == "K" => num(what, s, v),
        None => Err(perr(what, s, format!("`{key}` must be const:c"))),
    }
}

pub fn parse_regularity(s: &str) -> Result<RegularityModulus> {
    let what = "regularity modulus";
    let t = s.trim();
    if let Some(inner) = call(t, "sharp-min") {
        return Ok(uniq_sharp_min(&parse_regularity(inner)?, false));
    }
    if let Some(inner) = call(t, "sharp-min-quarter") {
        return Ok(uniq_sharp_min(&parse_regularity(inner)?, true));
    }
    if let Some(inner) = call(t, "prox-transfer") {
        let (g, tau) = pair(what, s, inner)?;
        return uniq_prox_transfer(&parse_regularity(tau)?, num(what, s, g)?);
    }
    if let Some(inner) = call(t, "bounded") {
        let (k, pi) = pair(what, s, inner)?;
        let k = keyed_const(what, s, k, "K")?;
        let pi = PointwiseLowerBound::constant(keyed_const(what, s, pi, "pi")?);
        return reg_bounded(&pi, k);
    }
    if let Some(inner) = call(t, "ui") {
        let [k, pi, mu] = split_top(inner)[..] else {
            return Err(perr(what, s, "expected three arguments"));
        };
        let k = keyed_const(what, s, k, "K")?;
        let pi = PointwiseLowerBound::constant(keyed_const(what, s, pi, "pi")?);
        let m = keyed_const(what, s, mu, "mu")?;
        if !(m > 0.0 && m <= 1.0) {
            return Err(perr(what, s, "mu must lie in (0,1]"));
        }
        return reg_from_ui(&pi, k, &UiModulus::constant(m));
    }
    if let Some(inner) = t.strip_prefix("convex:") {
        let tau = parse_regularity(inner)?;
        return reg_from_convex(t, move |e| if e == 0.0 { 0.0 } else { tau.eval(e).unwrap_or(f64::NAN) }, 1000);
    }
    let positive = |v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(perr(what, s, "parameters must be positive"))
        }
    };
    match t.split_once(':') {
        None if t == "id" => Ok(RegularityModulus::identity()),
        None if t == "frechet" => Ok(uniq_frechet()),
        Some(("power", p)) => Ok(RegularityModulus::poly(1.0, positive(num(what, s, p)?)?)),
        Some(("linear", a)) => Ok(RegularityModulus::poly(positive(num(what, s, a)?)?, 1.0)),
        Some(("poly", a)) => {
            let [a, p] = nums(what, s, a)?;
            Ok(RegularityModulus::poly(positive(a)?, positive(p)?))
        }
        Some(("quasi-contraction", r)) => uniq_quasi_contraction(num(what, s, r)?),
        Some(("strongly-quasiconvex", m)) => uniq_strongly_quasiconvex(num(what, s, m)?),
        _ => Err(perr(what, s, "unknown modulus")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_combinations() {
        let f = parse_sicc("sum(2*power:0.5, 1·compose(log:2, min(id, sqrt)))").unwrap();
        let x: f64 = 4.0;
        let expect = 2.0 * x.sqrt() + (1.0 + x.min(x.sqrt())).log2();
        assert!((f.eval(x).unwrap() - expect).abs() < 1e-12);
        assert_eq!(parse_sicc(f.label()).unwrap().label(), f.label());
    }

    #[test]
    fn regularity_labels_round_trip() {
        for src in [
            "id",
            "frechet",
            "power:2",
            "poly:0.5,3",
            "quasi-contraction:0.5",
            "strongly-quasiconvex:2",
            "convex:power:4",
            "sharp-min(power:2)",
            "sharp-min-quarter(id)",
            "prox-transfer(2, power:2)",
            "bounded(K=2, pi=const:1)",
            "ui(K=1, pi=const:1, mu=const:0.5)",
        ] {
            let tau = parse_regularity(src).unwrap();
            let again = parse_regularity(tau.label()).unwrap();
            assert_eq!(tau.label(), again.label(), "{src}");
            assert_eq!(tau.eval(0.3).unwrap(), again.eval(0.3).unwrap(), "{src}");
        }
        assert!(parse_regularity("convex:power:0.5").is_err());
    }

    #[test]
    fn rejects_unknown_names() {
        assert!(parse_sicc("cube").is_err());
        assert!(parse_schedule("harmonic:1").is_err());
        assert!(parse_tail("sum:const:1").is_err());
        assert!(parse_divergence("sum:geometric:1,0.5").is_err());
    }
}
