//! Turns config sections into models and rate objects.

use stochrate::expr::{parse_divergence, parse_liminf, parse_regularity, parse_schedule, parse_sicc, parse_tail};
use stochrate::moduli::sicc_sqrt;
use stochrate::processes::{
    counterexample_model, dvoretzky_model, km_model, prox_model, rm_model, splitting_model, Field,
};
use stochrate::rates::{
    fast_rate_rs, fast_rate_strongly_monotone, rate_dvoretzky, rate_fejer, rate_general, rate_rm,
    rate_rm_sqrt, rate_rs, DvoretzkyRate, FastRate, FastSpec, FejerRates, GeneralSpec, RmSpec,
    RsSpec, StronglyMonotoneRate,
};
use stochrate::{ProcessModel, RateBundle, Schedule, SiccFunction, Space, StatePoint};

use crate::config::{ConstantsSection, ExperimentConfig, ModelSection, ModuliSection, PointSpec};
use crate::CliError;

pub const THEOREMS: [&str; 9] = [
    "general",
    "rs",
    "rs-fast",
    "dvoretzky",
    "fejer",
    "rm",
    "rm-sqrt",
    "strong-monotone",
    "ville",
];

pub const MODELS: [&str; 8] = [
    "counterexample",
    "rm:linear",
    "rm:cubic",
    "rm:abs",
    "km",
    "prox",
    "splitting",
    "dvoretzky",
];

fn need<'a, T>(v: &'a Option<T>, key: &str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| CliError::key(key, "missing"))
}

fn schedule(v: &Option<String>, key: &str) -> Result<Schedule, CliError> {
    parse_schedule(need(v, key)?).map_err(|e| CliError::key(key, e.to_string()))
}

fn point(p: &PointSpec, space: Space, key: &str) -> Result<StatePoint, CliError> {
    let sp = match (p, space) {
        (PointSpec::Scalar(x), Space::Euclidean { .. }) => StatePoint::scalar(*x),
        (PointSpec::Coords(v), Space::Euclidean { .. }) => StatePoint::Euclidean(v.clone()),
        (PointSpec::Star { leg, t }, Space::Star { .. }) => StatePoint::star(*leg, *t),
        _ => return Err(CliError::key(key, "point does not match the space")),
    };
    space.contains(&sp).map_err(|e| CliError::key(key, e.to_string()))?;
    Ok(sp)
}

fn point_dim(p: &PointSpec) -> usize {
    match p {
        PointSpec::Coords(v) => v.len(),
        _ => 1,
    }
}

fn space_of(m: &ModelSection) -> Result<Space, CliError> {
    let Some(s) = &m.space else {
        let dim = m.x0.as_ref().map_or(1, point_dim);
        return Ok(Space::Euclidean { dim });
    };
    let bad = || CliError::key("model.space", format!("expected euclidean:dim or star:legs, got `{s}`"));
    let (kind, n) = s.split_once(':').ok_or_else(bad)?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    match kind.trim() {
        "euclidean" if n >= 1 => Ok(Space::Euclidean { dim: n }),
        "star" if n >= 2 => Ok(Space::Star { legs: n }),
        _ => Err(bad()),
    }
}

fn model_err(e: stochrate::Error) -> CliError {
    match e {
        stochrate::Error::Config { key, message } => CliError::key(&format!("model.{key}"), message),
        other => CliError::key("model", other.to_string()),
    }
}

pub fn build_model(m: &ModelSection) -> Result<ProcessModel, CliError> {
    let space = space_of(m)?;
    let x0 = || point(need(&m.x0, "model.x0")?, space, "model.x0");
    let z = || point(need(&m.z, "model.z")?, space, "model.z");
    let built = match m.name.as_str() {
        "counterexample" => Ok(counterexample_model(m.eta_check.unwrap_or(false))),
        "rm:linear" | "rm:cubic" | "rm:abs" => {
            let field = match m.name.as_str() {
                "rm:linear" => {
                    let dim = m.dim.unwrap_or(match space {
                        Space::Euclidean { dim } => dim,
                        Space::Star { .. } => 1,
                    });
                    Field::Linear { beta: *need(&m.beta, "model.beta")?, dim }
                }
                "rm:cubic" => Field::Cubic,
                _ => Field::Abs,
            };
            rm_model(field, *need(&m.noise_sd, "model.noise_sd")?, schedule(&m.steps, "model.steps")?, x0()?)
        }
        "km" => km_model(
            *need(&m.contraction, "model.contraction")?,
            schedule(&m.lambda, "model.lambda")?,
            schedule(&m.noise, "model.noise")?,
            space,
            x0()?,
        ),
        "prox" => prox_model(schedule(&m.gamma, "model.gamma")?, schedule(&m.noise, "model.noise")?, z()?, x0()?),
        "splitting" => {
            let anchors = need(&m.anchors, "model.anchors")?;
            let weights = need(&m.weights, "model.weights")?;
            if anchors.len() != weights.len() {
                return Err(CliError::key("model.weights", "needs one weight per anchor"));
            }
            let pts = anchors
                .iter()
                .zip(weights)
                .map(|(a, &w)| Ok((point(a, space, "model.anchors")?, w)))
                .collect::<Result<Vec<_>, CliError>>()?;
            splitting_model(pts, schedule(&m.lambda, "model.lambda")?, space, x0()?)
        }
        "dvoretzky" => dvoretzky_model(
            schedule(&m.a, "model.a")?,
            schedule(&m.b, "model.b")?,
            schedule(&m.c, "model.c")?,
            schedule(&m.noise, "model.noise")?,
            z()?,
            x0()?,
        ),
        other => {
            return Err(CliError::key("model.name", format!("unknown model `{other}` (expected one of {})", MODELS.join(", "))))
        }
    };
    built.map_err(model_err)
}

/// A constructed theorem, ready to evaluate.
pub enum Rates {
    /// Mean rate plus almost-sure rate; `mean_f` is the slowing function the
    /// mean statement is about and `squared` marks a squared-distance
    /// functional whose almost-sure statement is on the metric.
    Bundle { bundle: RateBundle, mean_f: SiccFunction, squared: bool },
    Fejer(FejerRates),
    Fast { rate: FastRate, provenance: String },
    Dvoretzky { rate: DvoretzkyRate, provenance: String },
    Ville,
}

pub struct Theorem {
    pub name: String,
    pub rates: Rates,
}

impl Theorem {
    pub fn provenance(&self) -> String {
        match &self.rates {
            Rates::Bundle { bundle, .. } => bundle.provenance.clone(),
            Rates::Fejer(f) => f.provenance.clone(),
            Rates::Fast { provenance, .. } | Rates::Dvoretzky { provenance, .. } => provenance.clone(),
            Rates::Ville => "ville".to_string(),
        }
    }
}

struct Keys<'a> {
    moduli: &'a ModuliSection,
    consts: &'a ConstantsSection,
}

impl Keys<'_> {
    fn f(&self) -> Result<SiccFunction, CliError> {
        parse_sicc(self.moduli.f.as_deref().unwrap_or("id")).map_err(|e| CliError::key("moduli.f", e.to_string()))
    }

    fn tau(&self) -> Result<stochrate::RegularityModulus, CliError> {
        parse_regularity(need(&self.moduli.tau, "moduli.tau")?).map_err(|e| CliError::key("moduli.tau", e.to_string()))
    }

    fn theta(&self) -> Result<stochrate::DivergenceRate, CliError> {
        parse_divergence(need(&self.moduli.theta, "moduli.theta")?).map_err(|e| CliError::key("moduli.theta", e.to_string()))
    }

    fn chi(&self) -> Result<stochrate::TailRate, CliError> {
        parse_tail(need(&self.moduli.chi, "moduli.chi")?).map_err(|e| CliError::key("moduli.chi", e.to_string()))
    }

    fn phi(&self) -> Result<stochrate::LiminfModulus, CliError> {
        parse_liminf(need(&self.moduli.phi, "moduli.phi")?).map_err(|e| CliError::key("moduli.phi", e.to_string()))
    }

    fn kappa(&self) -> Result<stochrate::RegularityModulus, CliError> {
        parse_regularity(self.moduli.kappa.as_deref().unwrap_or("id"))
            .map_err(|e| CliError::key("moduli.kappa", e.to_string()))
    }

    fn num(&self, v: Option<f64>, key: &str) -> Result<f64, CliError> {
        v.ok_or_else(|| CliError::key(&format!("constants.{key}"), "missing"))
    }
}

fn rate_err(e: stochrate::Error) -> CliError {
    match e {
        stochrate::Error::Config { key, message } => CliError::key(&format!("model.{key}"), message),
        other => CliError::key("theorem", other.to_string()),
    }
}

fn rm_of<'a>(model: Option<&'a ProcessModel>, theorem: &str) -> Result<&'a stochrate::processes::RobbinsMonro, CliError> {
    match model {
        Some(ProcessModel::RobbinsMonro(rm)) => Ok(rm),
        _ => Err(CliError::key("theorem.certified", format!("`{theorem}` certificates need an rm:* model"))),
    }
}

pub fn build_theorem(cfg: &ExperimentConfig, model: Option<&ProcessModel>) -> Result<Theorem, CliError> {
    let sec = need(&cfg.theorem, "theorem")?;
    let keys = Keys { moduli: &cfg.moduli, consts: &cfg.constants };
    let c = keys.consts;
    let name = sec.name.as_str();
    let no_certificate = || CliError::key("theorem.certified", format!("`{name}` has no model certificate; give every key explicitly"));
    let rates = match name {
        "general" => {
            if sec.certified {
                return Err(no_certificate());
            }
            let f = keys.f()?;
            let spec = GeneralSpec { k: keys.num(c.k, "K")?, chi: keys.chi()?, f: f.clone(), liminf_mod: keys.phi()? };
            Rates::Bundle { bundle: rate_general(&spec).map_err(rate_err)?, mean_f: f, squared: false }
        }
        "rs" => {
            let f = keys.f()?;
            let spec = if sec.certified {
                rm_of(model, name)?.rs_spec(keys.tau()?, f.clone()).map_err(rate_err)?
            } else {
                RsSpec {
                    k: keys.num(c.k, "K")?,
                    l: keys.num(c.l, "L")?,
                    m: keys.num(c.m, "M")?,
                    chi: keys.chi()?,
                    theta: keys.theta()?,
                    tau: keys.tau()?,
                    f: f.clone(),
                }
            };
            Rates::Bundle { bundle: rate_rs(&spec).map_err(rate_err)?, mean_f: f, squared: false }
        }
        "rm" | "rm-sqrt" => {
            let f = keys.f()?;
            let spec = if sec.certified {
                rm_of(model, name)?.rm_spec(keys.tau()?, f.clone()).map_err(rate_err)?
            } else {
                RmSpec {
                    c: keys.num(c.c, "c")?,
                    d: keys.num(c.d, "d")?,
                    l: keys.num(c.l, "L")?,
                    m: keys.num(c.m, "M")?,
                    theta: keys.theta()?,
                    chi: keys.chi()?,
                    tau: keys.tau()?,
                    f: f.clone(),
                }
            };
            if name == "rm" {
                Rates::Bundle { bundle: rate_rm(&spec).map_err(rate_err)?, mean_f: f, squared: true }
            } else {
                Rates::Bundle { bundle: rate_rm_sqrt(&spec).map_err(rate_err)?, mean_f: sicc_sqrt(), squared: true }
            }
        }
        "rs-fast" => {
            if sec.certified {
                return Err(no_certificate());
            }
            let spec = FastSpec {
                c: keys.num(c.c, "c")?,
                d: keys.num(c.d, "d")?,
                r: c.r.ok_or_else(|| CliError::key("constants.r", "missing"))?,
                t: keys.num(c.t, "t")?,
                k: keys.num(c.k, "K")?,
                l: keys.num(c.l, "L")?,
            };
            let rate = fast_rate_rs(&spec).map_err(rate_err)?;
            let provenance = format!(
                "rs-fast(c={}, d={}, r={}, t={}, K={}, L={}, u={})",
                spec.c, spec.d, spec.r, spec.t, spec.k, spec.l, rate.u
            );
            Rates::Fast { rate, provenance }
        }
        "strong-monotone" => {
            let s: StronglyMonotoneRate = if sec.certified {
                rm_of(model, name)?.strongly_monotone().map_err(rate_err)?
            } else {
                fast_rate_strongly_monotone(
                    keys.num(c.beta, "beta")?,
                    keys.num(c.c, "c")?,
                    keys.num(c.d, "d")?,
                    c.r.ok_or_else(|| CliError::key("constants.r", "missing"))?,
                    keys.num(c.l, "L")?,
                    keys.num(c.k, "K")?,
                )
                .map_err(rate_err)?
            };
            let provenance = format!("strong-monotone(beta={}, r={}, u={}, K={})", s.beta, s.r, s.u, s.fast.k);
            Rates::Fast { rate: s.fast, provenance }
        }
        "fejer" => {
            let tau = keys.tau()?;
            let rates = if sec.certified {
                match model {
                    Some(ProcessModel::Km(m)) => m.fejer_rates(&tau),
                    Some(ProcessModel::Prox(m)) => m.fejer_rates(&tau),
                    Some(ProcessModel::Splitting(m)) => m.fejer_rates(&tau),
                    _ => return Err(CliError::key("theorem.certified", "`fejer` certificates need a km, prox or splitting model")),
                }
                .map_err(rate_err)?
            } else {
                rate_fejer(&tau, keys.num(c.k, "K")?, &keys.chi()?, &keys.phi()?, &keys.kappa()?).map_err(rate_err)?
            };
            Rates::Fejer(rates)
        }
        "dvoretzky" => {
            let Some(ProcessModel::Dvoretzky(m)) = model else {
                return Err(CliError::key("theorem.certified", "`dvoretzky` needs a dvoretzky model"));
            };
            if !sec.certified {
                return Err(CliError::key("theorem.certified", "`dvoretzky` rates are only available from the model certificate"));
            }
            let rate = rate_dvoretzky(m.dvoretzky_spec().map_err(rate_err)?).map_err(rate_err)?;
            let provenance = rate.rate.label().to_string();
            Rates::Dvoretzky { rate, provenance }
        }
        "ville" => {
            if model.is_none() {
                return Err(CliError::key("model", "`ville` needs a model"));
            }
            Rates::Ville
        }
        other => {
            return Err(CliError::key("theorem.name", format!("unknown theorem `{other}` (expected one of {})", THEOREMS.join(", "))))
        }
    };
    Ok(Theorem { name: name.to_string(), rates })
}
